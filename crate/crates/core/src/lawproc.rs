//! Law processes `M(t) = L(X(t))`: empirical laws from particles, the
//! Itô–Lévy generator on Fourier test functions, and time derivatives and
//! increment scans of measure paths.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{measure_norm_sq, Atom, DiscreteMeasure, FourierTable, QuadratureRule};
use crate::output::{num, CsvTable};

/// Finite-activity Lévy measure `ν = Σ_j rate_j δ_{ζ_j}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevyMeasure {
    jump_sizes: Vec<f64>,
    rates: Vec<f64>,
}

impl LevyMeasure {
    pub fn new(jump_sizes: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if jump_sizes.len() != rates.len() {
            return Err(Error::LengthMismatch {
                left: jump_sizes.len(),
                right: rates.len(),
            });
        }
        if rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidInput(
                "Lévy rates must be positive and finite".into(),
            ));
        }
        if jump_sizes.iter().any(|&z| z == 0.0 || !z.is_finite()) {
            return Err(Error::InvalidInput(
                "jump sizes must be finite and nonzero".into(),
            ));
        }
        Ok(Self { jump_sizes, rates })
    }

    /// No jumps.
    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(zeta: f64, rate: f64) -> Result<Self> {
        Self::new(vec![zeta], vec![rate])
    }

    pub fn jump_sizes(&self) -> &[f64] {
        &self.jump_sizes
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// `∫ f(ζ) ν(dζ)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.jump_sizes
            .iter()
            .zip(&self.rates)
            .map(|(&z, &r)| r * f(z))
            .sum()
    }

    /// Picks a jump atom from a uniform draw in `[0, 1)`, proportional to rates.
    pub fn pick(&self, u: f64) -> usize {
        let target = u * self.total_rate();
        let mut acc = 0.0;
        for (j, &r) in self.rates.iter().enumerate() {
            acc += r;
            if target < acc {
                return j;
            }
        }
        self.rates.len() - 1
    }
}

type ScalarFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;
type JumpFn = Arc<dyn Fn(f64, f64, usize) -> f64 + Send + Sync>;

/// Coefficients of `dX = α dt + β dB + ∫ γ(ζ) Ñ(dt, dζ)`.
#[derive(Clone)]
pub struct ItoLevyCoeffs {
    pub alpha: ScalarFn,
    pub beta: ScalarFn,
    pub gamma: JumpFn,
    pub levy: LevyMeasure,
    /// Declared bound on |α|, |β|, |γ|.
    pub bound: f64,
}

impl ItoLevyCoeffs {
    /// Time- and scenario-independent coefficients with `γ(ζ) = gamma_scale·ζ`.
    pub fn constant(alpha: f64, beta: f64, gamma_scale: f64, levy: LevyMeasure) -> Self {
        let max_jump = levy.jump_sizes().iter().fold(0.0f64, |m, z| m.max(z.abs()));
        Self {
            alpha: Arc::new(move |_, _| alpha),
            beta: Arc::new(move |_, _| beta),
            gamma: Arc::new(move |_, z, _| gamma_scale * z),
            levy,
            bound: alpha
                .abs()
                .max(beta.abs())
                .max(gamma_scale.abs() * max_jump),
        }
    }
}

/// `A φ_y(x)` for `φ_y(x) = exp(ixy)`:
/// `(iyα − ½β²y² + Σ_j rate_j (exp(iγ_j y) − 1 − iyγ_j)) exp(ixy)`.
pub fn generator_on_test_fn(
    coeffs: &ItoLevyCoeffs,
    t: f64,
    x: f64,
    y: f64,
    scenario: usize,
) -> Complex64 {
    let alpha = (coeffs.alpha)(t, scenario);
    let beta = (coeffs.beta)(t, scenario);
    let i = Complex64::i();
    let mut symbol = i * (y * alpha) - Complex64::new(0.5 * beta * beta * y * y, 0.0);
    for (&zeta, &rate) in coeffs.levy.jump_sizes().iter().zip(coeffs.levy.rates()) {
        let g = (coeffs.gamma)(t, zeta, scenario);
        symbol += rate * (Complex64::from_polar(1.0, g * y) - 1.0 - i * (y * g));
    }
    symbol * Complex64::from_polar(1.0, x * y)
}

/// Uniform-weight empirical law of `particles`, with exactly equal
/// locations merged. Atoms are sorted by location.
pub fn empirical_law(particles: &[f64]) -> Result<DiscreteMeasure> {
    if particles.is_empty() {
        return Err(Error::InvalidInput(
            "empirical law of an empty sample".into(),
        ));
    }
    let mut sorted = particles.to_vec();
    if sorted.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite particle".into()));
    }
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut atoms: Vec<Atom> = Vec::new();
    let mut count = 0usize;
    for (idx, &x) in sorted.iter().enumerate() {
        count += 1;
        if idx + 1 == sorted.len() || sorted[idx + 1] != x {
            atoms.push(Atom::new(x, count as f64 / n));
            count = 0;
        }
    }
    DiscreteMeasure::new(atoms)
}

/// A measure-valued path on an increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePath {
    times: Vec<f64>,
    values: Vec<DiscreteMeasure>,
}

impl MeasurePath {
    pub fn new(times: Vec<f64>, values: Vec<DiscreteMeasure>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: times.len(),
                right: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(
                "path times must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    /// Builds a path by evaluating `law` at every grid time.
    pub fn from_fn(times: Vec<f64>, law: impl Fn(f64) -> DiscreteMeasure) -> Result<Self> {
        let values = times.iter().map(|&t| law(t)).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[DiscreteMeasure] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Common step of a uniform grid, or an error if the grid is not uniform.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::InvalidInput("path needs at least two times".into()));
        }
        let h = self.times[1] - self.times[0];
        let tol = 1e-9 * h.abs().max(self.times.last().unwrap().abs());
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - h).abs() > tol {
                return Err(Error::InvalidInput("grid is not uniform".into()));
            }
        }
        Ok(h)
    }

    /// Rows `(time, atom_location, atom_weight)`.
    pub fn to_csv(&self, seed: Option<u64>) -> CsvTable {
        let mut table = CsvTable::new(&["time", "atom_location", "atom_weight"], seed);
        for (t, m) in self.times.iter().zip(&self.values) {
            for a in m.atoms() {
                table.push(vec![num(*t), num(a.location), num(a.weight)]);
            }
        }
        table
    }

    fn tables(&self, quad: &QuadratureRule) -> Vec<FourierTable> {
        self.values
            .iter()
            .map(|m| FourierTable::of_measure(m, quad))
            .collect()
    }
}

/// Central difference `(M̂_{t+h} − M̂_{t−h}) / 2h` on the quadrature nodes.
pub fn law_derivative_fd(
    path: &MeasurePath,
    index: usize,
    quad: &QuadratureRule,
) -> Result<FourierTable> {
    let m = path.len();
    if m < 3 || index == 0 || index + 1 >= m {
        return Err(Error::BoundaryIndex {
            index,
            lo: 1,
            hi: m.saturating_sub(2),
        });
    }
    let t = path.times();
    let (hl, hr) = (t[index] - t[index - 1], t[index + 1] - t[index]);
    if (hl - hr).abs() > 1e-9 * hl.max(hr) {
        return Err(Error::InvalidInput(format!(
            "grid not locally uniform at index {index}"
        )));
    }
    let after = FourierTable::of_measure(&path.values()[index + 1], quad);
    let before = FourierTable::of_measure(&path.values()[index - 1], quad);
    let span = t[index + 1] - t[index - 1];
    Ok(after.combine(1.0 / span, &before, -1.0 / span))
}

/// Worst-case squared `M₀` increment `max_t ‖M_{t+h} − M_t‖²` for `h` in the
/// dyadic multiples `1, 2, 4, …` of the grid step up to half the path length.
pub fn abs_continuity_scan(path: &MeasurePath, quad: &QuadratureRule) -> Result<Vec<(f64, f64)>> {
    if path.len() < 3 {
        return Err(Error::InvalidInput(
            "increment scan needs at least 3 path points".into(),
        ));
    }
    let dt = path.uniform_step()?;
    let tables = path.tables(quad);
    let steps = path.len() - 1;
    let mut out = Vec::new();
    let mut mult = 1;
    while mult <= steps / 2 {
        let worst = (0..=steps - mult)
            .map(|k| {
                tables[k + mult]
                    .combine(1.0, &tables[k], -1.0)
                    .norm_sq(0, quad)
            })
            .fold(0.0f64, f64::max);
        out.push((mult as f64 * dt, worst));
        mult *= 2;
    }
    Ok(out)
}

/// Least-squares slope of `log v` against `log h` over entries with
/// `h ∈ [h_min, h_max]` and `v > 0`. `None` with fewer than two usable points.
pub fn loglog_slope(scan: &[(f64, f64)], h_min: f64, h_max: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = scan
        .iter()
        .filter(|(h, v)| *h >= h_min * (1.0 - 1e-9) && *h <= h_max * (1.0 + 1e-9) && *v > 0.0)
        .map(|(h, v)| (h.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// `‖M′(t)‖_{M₀} / ‖M(t)‖_{M^(4)}` at every interior grid point.
pub fn m4_norm_bound_check(path: &MeasurePath, quad: &QuadratureRule) -> Result<Vec<f64>> {
    path.uniform_step()?;
    if path.len() < 3 {
        return Err(Error::BoundaryIndex {
            index: 1,
            lo: 1,
            hi: 0,
        });
    }
    (1..path.len() - 1)
        .map(|k| {
            let deriv = law_derivative_fd(path, k, quad)?.norm_sq(0, quad).sqrt();
            let base = measure_norm_sq(&path.values()[k], 4, quad)?.sqrt();
            Ok(if deriv == 0.0 { 0.0 } else { deriv / base })
        })
        .collect()
}

/// `N(mean, sd²)` discretised into `bins` equal cells over
/// `mean ± half_width`; each cell's exact probability sits at its centre.
pub fn binned_normal_law(
    mean: f64,
    sd: f64,
    half_width: f64,
    bins: usize,
) -> Result<DiscreteMeasure> {
    if !(sd > 0.0) || bins == 0 || !(half_width > 0.0) {
        return Err(Error::InvalidInput(
            "binned normal needs sd > 0, bins > 0, half_width > 0".into(),
        ));
    }
    let width = 2.0 * half_width / bins as f64;
    let cdf = |x: f64| 0.5 * libm::erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2));
    let atoms = (0..bins)
        .map(|b| {
            let lo = mean - half_width + b as f64 * width;
            Atom::new(lo + 0.5 * width, cdf(lo + width) - cdf(lo))
        })
        .filter(|a| a.weight > 0.0)
        .collect();
    DiscreteMeasure::new(atoms)
}

/// Poisson(`rate·t`) probability mass function on `{0, …, max_k}` as atoms.
pub fn poisson_law(rate: f64, t: f64, max_k: usize) -> DiscreteMeasure {
    let lt = rate * t;
    let mut p = (-lt).exp();
    let mut atoms = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        if k > 0 {
            p *= lt / k as f64;
        }
        atoms.push(Atom::new(k as f64, p));
    }
    DiscreteMeasure::new(atoms).expect("finite pmf")
}

/// The Dirac path `t ↦ δ_t` of the drift-only dynamics `X_t = t`.
pub fn dirac_drift_path(times: Vec<f64>) -> Result<MeasurePath> {
    MeasurePath::from_fn(times, DiscreteMeasure::dirac)
}

/// Uniform grid with `steps` intervals on `[t0, t1]`.
pub fn uniform_times(t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    let dt = (t1 - t0) / steps as f64;
    (0..=steps).map(|k| t0 + k as f64 * dt).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{gauss_hermite_rule, DEFAULT_GH_ORDER};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn gh() -> QuadratureRule {
        gauss_hermite_rule(DEFAULT_GH_ORDER, 0).unwrap()
    }

    #[test]
    fn empirical_law_counts() {
        let m = empirical_law(&[0.0]).unwrap();
        assert_eq!(m.atoms(), &[Atom::new(0.0, 1.0)]);
        let m = empirical_law(&[3.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atoms()[0].location, 1.0);
        assert_abs_diff_eq!(m.atoms()[0].weight, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.atoms()[1].weight, 1.0 / 3.0, epsilon = 1e-15);
        assert!(empirical_law(&[]).is_err());
    }

    #[test]
    fn generator_examples() {
        let (t, x, y) = (0.3, 0.8, 1.7);
        let e = Complex64::from_polar(1.0, x * y);
        let null = ItoLevyCoeffs::constant(0.0, 0.0, 0.0, LevyMeasure::none());
        assert_eq!(
            generator_on_test_fn(&null, t, x, y, 0),
            Complex64::new(0.0, 0.0)
        );

        let drift = ItoLevyCoeffs::constant(1.0, 0.0, 0.0, LevyMeasure::none());
        let g = generator_on_test_fn(&drift, t, x, y, 0);
        assert!((g - Complex64::i() * y * e).norm() < 1e-14);

        let diff = ItoLevyCoeffs::constant(0.0, 1.0, 0.0, LevyMeasure::none());
        let g = generator_on_test_fn(&diff, t, x, y, 0);
        assert!((g - e * (-0.5 * y * y)).norm() < 1e-14);

        // Compensated jump part: rate (e^{iγy} − 1 − iγy).
        let jumps = ItoLevyCoeffs::constant(0.0, 0.0, 1.0, LevyMeasure::single(0.5, 2.0).unwrap());
        let g = generator_on_test_fn(&jumps, t, x, y, 0);
        let want = 2.0 * (Complex64::from_polar(1.0, 0.5 * y) - 1.0 - Complex64::i() * 0.5 * y) * e;
        assert!((g - want).norm() < 1e-14);
    }

    #[test]
    fn levy_validation_and_pick() {
        assert!(LevyMeasure::new(vec![0.0], vec![1.0]).is_err());
        assert!(LevyMeasure::new(vec![1.0], vec![-1.0]).is_err());
        assert!(LevyMeasure::new(vec![1.0, 2.0], vec![1.0]).is_err());
        let l = LevyMeasure::new(vec![-0.2, 0.1], vec![1.0, 3.0]).unwrap();
        assert_eq!(l.total_rate(), 4.0);
        assert_eq!(l.pick(0.0), 0);
        assert_eq!(l.pick(0.24), 0);
        assert_eq!(l.pick(0.26), 1);
        assert_eq!(l.pick(0.999), 1);
    }

    #[test]
    fn constant_path_has_zero_derivative_and_increments() {
        let q = gh();
        let times = uniform_times(0.0, 1.0, 8);
        let m = DiscreteMeasure::from_pairs(&[(0.5, 0.3), (-1.0, 0.7)]).unwrap();
        let path = MeasurePath::from_fn(times, |_| m.clone()).unwrap();
        let d = law_derivative_fd(&path, 3, &q).unwrap();
        assert!(d.values().iter().all(|v| v.norm() == 0.0));
        let scan = abs_continuity_scan(&path, &q).unwrap();
        assert!(scan.iter().all(|&(_, v)| v == 0.0));
        assert!(loglog_slope(&scan, 0.0, 1.0).is_none());
        let ratios = m4_norm_bound_check(&path, &q).unwrap();
        assert!(ratios.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn derivative_rejects_boundary() {
        let q = gh();
        let path = dirac_drift_path(uniform_times(0.0, 1.0, 4)).unwrap();
        assert!(matches!(
            law_derivative_fd(&path, 0, &q),
            Err(Error::BoundaryIndex { .. })
        ));
        assert!(matches!(
            law_derivative_fd(&path, 4, &q),
            Err(Error::BoundaryIndex { .. })
        ));
        assert!(law_derivative_fd(&path, 2, &q).is_ok());
    }

    #[test]
    fn path_validation() {
        assert!(MeasurePath::new(vec![0.0, 0.0], vec![DiscreteMeasure::zero(); 2]).is_err());
        assert!(MeasurePath::new(vec![0.0], vec![]).is_err());
        let short = dirac_drift_path(vec![0.0, 1.0]).unwrap();
        assert!(abs_continuity_scan(&short, &gh()).is_err());
    }

    #[test]
    fn dirac_drift_scan_is_analytic() {
        let q = gh();
        let path = dirac_drift_path(uniform_times(0.0, 1.0, 64)).unwrap();
        let scan = abs_continuity_scan(&path, &q).unwrap();
        for &(h, v) in &scan {
            let exact = 2.0 * PI.sqrt() * (1.0 - (-h * h / 4.0).exp());
            assert_abs_diff_eq!(v, exact, epsilon = 1e-12);
        }
        let slope = loglog_slope(&scan, 0.0, 1.0).unwrap();
        assert!(slope > 1.95 && slope <= 2.0 + 1e-9, "slope {slope}");
    }

    #[test]
    fn dirac_drift_m4_ratio_matches_closed_form() {
        // M(t) = δ_t: M̂′(y) = iy e^{ity}, so ‖M′‖²_{M₀} = √π/2 and
        // ‖M‖²_{M⁽⁴⁾} = ∫ y⁴ e^{-y²} = 3√π/4. The central difference carries
        // the factor sin(hy)/(hy); compare against the exact difference table.
        let q = gh();
        let h = 0.01;
        let path = dirac_drift_path(uniform_times(0.0, 0.1, 10)).unwrap();
        let ratios = m4_norm_bound_check(&path, &q).unwrap();
        let fd_norm_sq = q.integrate(|y| {
            let s = if y == 0.0 {
                1.0
            } else {
                (h * y).sin() / (h * y)
            };
            y * y * s * s
        });
        let want = fd_norm_sq.sqrt() / (0.75 * PI.sqrt()).sqrt();
        for r in ratios {
            assert_abs_diff_eq!(r, want, epsilon = 1e-12);
        }
        let limit = (0.5f64 * PI.sqrt()).sqrt() / (0.75 * PI.sqrt()).sqrt();
        assert_abs_diff_eq!(want, limit, epsilon = 1e-4);
    }

    #[test]
    fn csv_has_one_row_per_atom() {
        let path = dirac_drift_path(vec![0.0, 0.5]).unwrap();
        let t = path.to_csv(Some(3));
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.header, vec!["time", "atom_location", "atom_weight"]);
    }

    #[test]
    fn binned_normal_mass() {
        let m = binned_normal_law(0.0, 1.0, 10.0, 2000).unwrap();
        assert_abs_diff_eq!(m.total_mass(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.first_moment(), 0.0, epsilon = 1e-12);
        let p = poisson_law(1.0, 1.0, 40);
        assert_abs_diff_eq!(p.total_mass(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.first_moment(), 1.0, epsilon = 1e-13);
    }
}
