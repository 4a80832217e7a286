//! Finite signed measures on the real line and the Fourier-weighted
//! Hilbert structure on them.
//!
//! A measure `μ` is represented by weighted atoms. Its Fourier transform
//! `μ̂(y) = Σ w_j exp(i x_j y)` is evaluated exactly, and the `M^(k)` inner
//! product
//!
//! ```text
//! ⟨μ, η⟩_k = E[ ∫ Re(conj(μ̂(y)) η̂(y)) |y|^k e^{-y²} dy ]
//! ```
//!
//! is discretised with a [`QuadratureRule`] whose weights carry the
//! `e^{-y²}` factor. The `|y|^k` factor stays in the integrand so that a
//! single rule serves every `k`.

use std::f64::consts::PI;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance below which a negative squared norm is treated as round-off.
pub const NORM_CLAMP: f64 = 1e-12;

/// Default Gauss–Hermite order used across the crate.
pub const DEFAULT_GH_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(location: f64, weight: f64) -> Self {
        Self { location, weight }
    }
}

/// A finite signed measure given as a list of weighted point masses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    /// Builds a measure, rejecting non-finite locations or weights.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if let Some(a) = atoms
            .iter()
            .find(|a| !a.location.is_finite() || !a.weight.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "atom ({}, {}) is not finite",
                a.location, a.weight
            )));
        }
        Ok(Self { atoms })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(x, w)| Atom::new(x, w)).collect())
    }

    /// The unit point mass at `x`.
    pub fn dirac(x: f64) -> Self {
        Self {
            atoms: vec![Atom::new(x, 1.0)],
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// True when all weights are non-negative and the mass is one within `tol`.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.atoms.iter().all(|a| a.weight >= 0.0) && (self.total_mass() - 1.0).abs() <= tol
    }

    /// `μ̂(y) = Σ w_j exp(i x_j y)`, summed in atom order.
    pub fn fourier_transform(&self, y: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for a in &self.atoms {
            let (s, c) = (a.location * y).sin_cos();
            re += a.weight * c;
            im += a.weight * s;
        }
        Complex64::new(re, im)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.location, factor * a.weight))
                .collect(),
        }
    }

    /// Merges atoms sharing exactly the same location and drops zero weights.
    /// Atoms come out sorted by location.
    pub fn coalesced(&self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match out.last_mut() {
                Some(last) if last.location == a.location => last.weight += a.weight,
                _ => out.push(a),
            }
        }
        out.retain(|a| a.weight != 0.0);
        Self { atoms: out }
    }

    /// `μ(V)` for an interval `V`.
    pub fn mass_in(&self, v: &Interval) -> f64 {
        self.atoms
            .iter()
            .filter(|a| v.contains(a.location))
            .map(|a| a.weight)
            .sum()
    }

    /// `∫ x dμ(x)`.
    pub fn first_moment(&self) -> f64 {
        self.atoms.iter().map(|a| a.location * a.weight).sum()
    }
}

impl Add for &DiscreteMeasure {
    type Output = DiscreteMeasure;

    fn add(self, rhs: &DiscreteMeasure) -> DiscreteMeasure {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&rhs.atoms);
        DiscreteMeasure { atoms }
    }
}

impl Sub for &DiscreteMeasure {
    type Output = DiscreteMeasure;

    fn sub(self, rhs: &DiscreteMeasure) -> DiscreteMeasure {
        self + &rhs.scaled(-1.0)
    }
}

impl Neg for &DiscreteMeasure {
    type Output = DiscreteMeasure;

    fn neg(self) -> DiscreteMeasure {
        self.scaled(-1.0)
    }
}

/// The interval `(lo, hi]`. Use infinite endpoints for half-lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidInput(format!("empty interval ({lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `(0, ∞)`.
    pub fn positive_half_line() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x <= self.hi
    }

    /// A finite point inside the interval, used to place adjustment atoms.
    pub fn interior_point(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo + 1.0,
            (false, true) => self.hi - 1.0,
            (false, false) => 0.0,
        }
    }

    /// A finite point outside the interval, if the interval is not all of ℝ.
    pub fn exterior_point(&self) -> Option<f64> {
        if self.lo.is_finite() {
            Some(self.lo - 1.0)
        } else if self.hi.is_finite() {
            Some(self.hi + 1.0)
        } else {
            None
        }
    }
}

/// Linear functionals `m ↦ ∫ h dm` through which model coefficients read
/// measures. Directional derivatives in the measure argument reduce to
/// ordinary partial derivatives in these coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureFunctional {
    /// `m(V)`.
    MassOn(Interval),
    /// `∫ x dm(x)`.
    FirstMoment,
    /// `m(ℝ)`.
    TotalMass,
}

impl MeasureFunctional {
    pub fn eval(&self, m: &DiscreteMeasure) -> f64 {
        match self {
            Self::MassOn(v) => m.mass_in(v),
            Self::FirstMoment => m.first_moment(),
            Self::TotalMass => m.total_mass(),
        }
    }

    /// Value at the empirical law of `samples` without building the measure.
    pub fn eval_empirical(&self, samples: &[f64]) -> f64 {
        if samples.is_empty() {
            return 0.0;
        }
        let n = samples.len() as f64;
        match self {
            Self::MassOn(v) => samples.iter().filter(|&&x| v.contains(x)).count() as f64 / n,
            Self::FirstMoment => samples.iter().sum::<f64>() / n,
            Self::TotalMass => 1.0,
        }
    }
}

/// A random measure represented by paired scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomMeasureEnsemble {
    scenarios: Vec<DiscreteMeasure>,
    weights: Option<Vec<f64>>,
}

impl RandomMeasureEnsemble {
    /// Uniformly weighted scenarios.
    pub fn new(scenarios: Vec<DiscreteMeasure>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::InvalidInput(
                "ensemble needs at least one scenario".into(),
            ));
        }
        Ok(Self {
            scenarios,
            weights: None,
        })
    }

    pub fn with_weights(scenarios: Vec<DiscreteMeasure>, weights: Vec<f64>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::InvalidInput(
                "ensemble needs at least one scenario".into(),
            ));
        }
        if weights.len() != scenarios.len() {
            return Err(Error::LengthMismatch {
                left: scenarios.len(),
                right: weights.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "scenario weights must be non-negative and sum to 1 (sum = {total})"
            )));
        }
        Ok(Self {
            scenarios,
            weights: Some(weights),
        })
    }

    /// A deterministic measure seen as a one-scenario ensemble.
    pub fn deterministic(m: DiscreteMeasure) -> Self {
        Self {
            scenarios: vec![m],
            weights: None,
        }
    }

    pub fn scenarios(&self) -> &[DiscreteMeasure] {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn weight(&self, s: usize) -> f64 {
        match &self.weights {
            Some(w) => w[s],
            None => 1.0 / self.scenarios.len() as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussHermite,
    TruncatedTrapezoid,
}

/// Nodes and weights for `∫ f(y) e^{-y²} dy ≈ Σ w_i f(y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: QuadratureKind,
    order: u32,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    /// The `k` the rule was requested for. Evaluation accepts any `k`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(y_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }

    /// Weights with the `|y|^k` factor folded in.
    pub fn weighted(&self, k: u32) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * abs_pow(y, k))
            .collect()
    }
}

fn abs_pow(y: f64, k: u32) -> f64 {
    if k == 0 {
        1.0
    } else {
        y.abs().powi(k as i32)
    }
}

/// Gauss–Hermite rule with `n` nodes for the weight `e^{-y²}`.
///
/// Nodes are the roots of the Hermite polynomial `H_n`, found by Newton
/// iteration on the orthonormal three-term recurrence.
pub fn gauss_hermite_rule(n: usize, k: u32) -> Result<QuadratureRule> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "Gauss-Hermite rule needs at least 2 nodes, got {n}"
        )));
    }
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[n - 1],
            3 => 1.91 * z - 0.91 * nodes[n - 2],
            _ => 2.0 * z - nodes[n - i + 1],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        // Store positive roots from the top down so later guesses can use them.
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        let w = 2.0 / (pp * pp);
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        kind: QuadratureKind::GaussHermite,
        order: k,
    })
}

/// Trapezoid rule on `[-half_width, half_width]` with `points` nodes, carrying
/// the `e^{-y²}` factor in its weights. Used as an independent cross-check.
pub fn trapezoid_rule(half_width: f64, points: usize, k: u32) -> Result<QuadratureRule> {
    if points < 3 || !(half_width > 0.0) {
        return Err(Error::InvalidInput(format!(
            "trapezoid rule needs >= 3 points and a positive half-width (got {points}, {half_width})"
        )));
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    let nodes: Vec<f64> = (0..points).map(|i| -half_width + i as f64 * h).collect();
    let weights = nodes
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let end = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
            end * h * (-y * y).exp()
        })
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        kind: QuadratureKind::TruncatedTrapezoid,
        order: k,
    })
}

/// Fourier transform of a measure tabulated on the nodes of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable {
    values: Vec<Complex64>,
}

impl FourierTable {
    pub fn from_values(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn of_measure(m: &DiscreteMeasure, quad: &QuadratureRule) -> Self {
        Self {
            values: quad
                .nodes()
                .iter()
                .map(|&y| m.fourier_transform(y))
                .collect(),
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `a·self + b·other`, node by node.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        }
    }

    /// `Σ w_i |y_i|^k Re(conj(self_i) other_i)`.
    pub fn inner(&self, other: &Self, k: u32, quad: &QuadratureRule) -> f64 {
        quad.weighted(k)
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * (a.conj() * b).re)
            .sum()
    }

    pub fn norm_sq(&self, k: u32, quad: &QuadratureRule) -> f64 {
        quad.weighted(k)
            .iter()
            .zip(&self.values)
            .map(|(w, a)| w * a.norm_sqr())
            .sum()
    }
}

fn check_pairing(mu: &RandomMeasureEnsemble, eta: &RandomMeasureEnsemble) -> Result<()> {
    if mu.len() != eta.len() {
        return Err(Error::Pairing {
            left: mu.len(),
            right: eta.len(),
        });
    }
    Ok(())
}

/// `⟨μ, η⟩` in `M^(k)`: scenario-weighted average of the Fourier pairing.
/// Scenario weights are taken from `mu`.
pub fn inner_product(
    mu: &RandomMeasureEnsemble,
    eta: &RandomMeasureEnsemble,
    k: u32,
    quad: &QuadratureRule,
) -> Result<f64> {
    check_pairing(mu, eta)?;
    let mut total = 0.0;
    for (s, (a, b)) in mu.scenarios().iter().zip(eta.scenarios()).enumerate() {
        total += mu.weight(s) * measure_inner(a, b, k, quad);
    }
    Ok(total)
}

/// Deterministic version of [`inner_product`].
pub fn measure_inner(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    k: u32,
    quad: &QuadratureRule,
) -> f64 {
    quad.nodes()
        .iter()
        .zip(quad.weighted(k))
        .map(|(&y, w)| w * (a.fourier_transform(y).conj() * b.fourier_transform(y)).re)
        .sum()
}

/// `‖μ‖²` in `M^(k)`, with round-off negatives clamped to zero.
pub fn norm_sq(mu: &RandomMeasureEnsemble, k: u32, quad: &QuadratureRule) -> Result<f64> {
    clamp_norm(inner_product(mu, mu, k, quad)?)
}

pub fn measure_norm_sq(m: &DiscreteMeasure, k: u32, quad: &QuadratureRule) -> Result<f64> {
    clamp_norm(measure_inner(m, m, k, quad))
}

/// `‖a − b‖²` in `M^(k)`.
pub fn distance_sq(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    k: u32,
    quad: &QuadratureRule,
) -> Result<f64> {
    measure_norm_sq(&(a - b), k, quad)
}

fn clamp_norm(v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -NORM_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NegativeNorm(v))
    }
}

/// Both sides of `‖L(X₁) − L(X₂)‖²_{M₀} ≤ √π E[(X₁ − X₂)²]` for paired samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Slack allowed on the law-distance bound for quadrature error.
pub const BOUND_TOLERANCE: f64 = 1e-8;

pub fn law_distance_bound_check(
    x1: &[f64],
    x2: &[f64],
    quad: &QuadratureRule,
) -> Result<BoundCheck> {
    if x1.len() != x2.len() {
        return Err(Error::LengthMismatch {
            left: x1.len(),
            right: x2.len(),
        });
    }
    if x1.is_empty() {
        return Err(Error::InvalidInput(
            "need at least one paired sample".into(),
        ));
    }
    let n = x1.len() as f64;
    let w = 1.0 / n;
    let mut atoms: Vec<Atom> = x1.iter().map(|&x| Atom::new(x, w)).collect();
    atoms.extend(x2.iter().map(|&x| Atom::new(x, -w)));
    let diff = DiscreteMeasure::new(atoms)?;
    let lhs = measure_norm_sq(&diff, 0, quad)?;
    let msd = x1
        .iter()
        .zip(x2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    let rhs = PI.sqrt() * msd;
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + BOUND_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gh() -> QuadratureRule {
        gauss_hermite_rule(DEFAULT_GH_ORDER, 0).unwrap()
    }

    #[test]
    fn fourier_of_dirac_and_symmetric_pair() {
        let y = 0.7;
        let ft = DiscreteMeasure::dirac(1.3).fourier_transform(y);
        assert_abs_diff_eq!(ft.re, (1.3 * y).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(ft.im, (1.3 * y).sin(), epsilon = 1e-15);

        let zero = DiscreteMeasure::zero().fourier_transform(y);
        assert_eq!(zero, Complex64::new(0.0, 0.0));

        let pair = DiscreteMeasure::from_pairs(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let ft = pair.fourier_transform(y);
        assert_abs_diff_eq!(ft.re, y.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(ft.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_finite_atoms() {
        assert!(DiscreteMeasure::from_pairs(&[(f64::NAN, 1.0)]).is_err());
        assert!(DiscreteMeasure::from_pairs(&[(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn two_point_rule() {
        let q = gauss_hermite_rule(2, 0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(q.nodes()[0], -r, epsilon = 1e-14);
        assert_abs_diff_eq!(q.nodes()[1], r, epsilon = 1e-14);
        for &w in q.weights() {
            assert_abs_diff_eq!(w, PI.sqrt() / 2.0, epsilon = 1e-14);
        }
        assert!(gauss_hermite_rule(1, 0).is_err());
    }

    #[test]
    fn rule_exactness() {
        let q = gauss_hermite_rule(20, 0).unwrap();
        assert_abs_diff_eq!(q.integrate(|_| 1.0), PI.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            q.integrate(|y| y.cos()),
            PI.sqrt() * (-0.25f64).exp(),
            epsilon = 1e-10
        );
        // Degree 2n-1 = 39 is integrated exactly; check y^6.
        assert_abs_diff_eq!(
            q.integrate(|y| y.powi(6)),
            15.0 * PI.sqrt() / 8.0,
            epsilon = 1e-11
        );
        for w in q.nodes().windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(q.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn odd_order_has_zero_node() {
        let q = gauss_hermite_rule(5, 0).unwrap();
        assert_eq!(q.nodes()[2], 0.0);
        assert_abs_diff_eq!(q.integrate(|y| y * y), PI.sqrt() / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn dirac_norms() {
        let q = gh();
        for x0 in [0.0, 1.0, -3.7] {
            let d = RandomMeasureEnsemble::deterministic(DiscreteMeasure::dirac(x0));
            assert_abs_diff_eq!(norm_sq(&d, 0, &q).unwrap(), PI.sqrt(), epsilon = 1e-10);
        }
        let d0 = RandomMeasureEnsemble::deterministic(DiscreteMeasure::dirac(0.0));
        assert_abs_diff_eq!(
            norm_sq(&d0, 2, &q).unwrap(),
            PI.sqrt() / 2.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn dirac_difference_matches_closed_form() {
        let q = gh();
        let trap = trapezoid_rule(8.0, 4096, 0).unwrap();
        for c in [0.1f64, 1.0, 3.0] {
            let exact = 2.0 * PI.sqrt() * (1.0 - (-c * c / 4.0).exp());
            let a = DiscreteMeasure::dirac(0.0);
            let b = DiscreteMeasure::dirac(c);
            assert_abs_diff_eq!(distance_sq(&a, &b, 0, &q).unwrap(), exact, epsilon = 1e-10);
            assert_abs_diff_eq!(
                distance_sq(&a, &b, 0, &trap).unwrap(),
                exact,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn mass_bound_for_positive_measures() {
        let q = gh();
        let m = DiscreteMeasure::from_pairs(&[(-0.4, 0.7), (2.0, 1.1), (5.0, 0.2)]).unwrap();
        let mass = m.total_mass();
        for k in 0..5 {
            let bound = mass * mass * q.integrate(|y| abs_pow(y, k));
            assert!(measure_norm_sq(&m, k, &q).unwrap() <= bound + 1e-12);
        }
    }

    #[test]
    fn pairing_mismatch_is_an_error() {
        let q = gh();
        let a = RandomMeasureEnsemble::new(vec![DiscreteMeasure::dirac(0.0); 2]).unwrap();
        let b = RandomMeasureEnsemble::new(vec![DiscreteMeasure::dirac(0.0); 3]).unwrap();
        assert!(matches!(
            inner_product(&a, &b, 0, &q),
            Err(Error::Pairing { left: 2, right: 3 })
        ));
    }

    #[test]
    fn scenario_weights_validated() {
        let s = vec![DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0)];
        assert!(RandomMeasureEnsemble::with_weights(s.clone(), vec![0.5, 0.6]).is_err());
        assert!(RandomMeasureEnsemble::with_weights(s.clone(), vec![0.5]).is_err());
        let e = RandomMeasureEnsemble::with_weights(s, vec![0.25, 0.75]).unwrap();
        assert_eq!(e.weight(1), 0.75);
        assert!(RandomMeasureEnsemble::new(vec![]).is_err());
    }

    #[test]
    fn bound_check_examples() {
        let q = gh();
        let x = vec![0.3, -1.2, 2.0];
        let r = law_distance_bound_check(&x, &x, &q).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-14);
        assert_eq!(r.rhs, 0.0);
        assert!(r.holds);

        let c = 1.5;
        let r = law_distance_bound_check(&[0.0; 10], &[c; 10], &q).unwrap();
        assert_abs_diff_eq!(
            r.lhs,
            2.0 * PI.sqrt() * (1.0 - (-c * c / 4.0).exp()),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(r.rhs, PI.sqrt() * c * c, epsilon = 1e-12);
        assert!(r.holds);

        assert!(law_distance_bound_check(&[0.0], &[0.0, 1.0], &q).is_err());
        assert!(law_distance_bound_check(&[], &[], &q).is_err());
    }

    #[test]
    fn coalescing_preserves_transform() {
        let m = DiscreteMeasure::from_pairs(&[(1.0, 0.25), (3.0, 0.5), (1.0, 0.25), (3.0, -0.5)])
            .unwrap();
        let c = m.coalesced();
        assert_eq!(c.atoms(), &[Atom::new(1.0, 0.5)]);
        for y in [-2.0, 0.1, 4.0] {
            let d = m.fourier_transform(y) - c.fourier_transform(y);
            assert!(d.norm() < 1e-14);
        }
    }

    #[test]
    fn functionals_agree_with_empirical_law() {
        let v = Interval::new(-0.5, 1.0).unwrap();
        let samples = [0.0, 1.0, 1.0, 2.5, -3.0];
        let m = DiscreteMeasure::new(samples.iter().map(|&x| Atom::new(x, 0.2)).collect()).unwrap();
        for f in [
            MeasureFunctional::MassOn(v),
            MeasureFunctional::FirstMoment,
            MeasureFunctional::TotalMass,
        ] {
            assert_abs_diff_eq!(f.eval(&m), f.eval_empirical(&samples), epsilon = 1e-15);
        }
        assert!(v.contains(1.0) && !v.contains(-0.5));
        assert!(Interval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn negative_norm_clamping() {
        assert_eq!(clamp_norm(-1e-13).unwrap(), 0.0);
        assert!(matches!(clamp_norm(-1e-6), Err(Error::NegativeNorm(_))));
    }
}
