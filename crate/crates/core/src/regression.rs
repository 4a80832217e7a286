//! Least-squares conditional expectations.
//!
//! `E[Y | X]` is approximated by projecting `Y` on a small basis of functions
//! of a scalar regressor. Features are standardised before the normal
//! equations are formed, and a tiny ridge keeps the solve well posed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Ridge added to the diagonal of the standardised normal equations.
pub const RIDGE: f64 = 1e-10;

/// Largest acceptable condition number of the standardised Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// One basis function of the regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTerm {
    /// `x^k`; `Power(0)` is the constant.
    Power(u32),
    /// `1/x`.
    Inverse,
}

impl BasisTerm {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Power(k) => x.powi(k as i32),
            Self::Inverse => 1.0 / x,
        }
    }
}

/// A regression basis. The constant is always included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    terms: Vec<BasisTerm>,
}

impl Basis {
    pub fn new(terms: Vec<BasisTerm>) -> Self {
        Self { terms }
    }

    /// `1, x, …, x^degree`.
    pub fn polynomial(degree: u32) -> Self {
        Self::new((0..=degree).map(BasisTerm::Power).collect())
    }

    /// Cubic polynomial plus `1/x`.
    pub fn cubic_with_inverse() -> Self {
        let mut b = Self::polynomial(3);
        b.terms.push(BasisTerm::Inverse);
        b
    }

    pub fn terms(&self) -> &[BasisTerm] {
        &self.terms
    }

    /// The non-constant terms.
    fn features(&self) -> impl Iterator<Item = &BasisTerm> {
        self.terms.iter().filter(|t| **t != BasisTerm::Power(0))
    }
}

impl Default for Basis {
    fn default() -> Self {
        Self::polynomial(3)
    }
}

/// Fitted values of a projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub fitted: Vec<f64>,
    /// Condition number of the standardised Gram matrix; 1 for the constant fit.
    pub condition: f64,
}

/// Projects `y` on the basis evaluated at `x`. `step` only labels errors.
///
/// A regressor with no spread carries no information, so the fit falls back
/// to the sample mean.
pub fn project(x: &[f64], y: &[f64], basis: &Basis, step: usize) -> Result<Fit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidInput(
            "regression needs at least one sample".into(),
        ));
    }
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let constant = Fit {
        fitted: vec![mean_y; n],
        condition: 1.0,
    };
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if lo == hi {
        return Ok(constant);
    }

    let raw: Vec<Vec<f64>> = basis
        .features()
        .map(|t| x.iter().map(|&v| t.eval(v)).collect())
        .collect();
    if raw.is_empty() {
        return Ok(constant);
    }
    let mut columns = Vec::with_capacity(raw.len());
    for col in raw {
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
        if !sd.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite regression feature at step {step}"
            )));
        }
        if sd > 0.0 {
            columns.push(col.into_iter().map(|v| (v - mean) / sd).collect::<Vec<_>>());
        }
    }
    if columns.is_empty() {
        return Ok(constant);
    }

    let p = columns.len();
    let design = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
    let centred = DVector::from_iterator(n, y.iter().map(|v| v - mean_y));
    let gram = design.tr_mul(&design) / n as f64;
    let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
    let (emin, emax) = eig
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    let condition = if emin > 0.0 {
        emax / emin
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::RankDeficient { step, condition });
    }
    let rhs = design.tr_mul(&centred) / n as f64;
    let ridged = gram + DMatrix::identity(p, p) * RIDGE;
    let beta = ridged
        .cholesky()
        .ok_or(Error::RankDeficient { step, condition })?
        .solve(&rhs);
    let fitted = (design * beta).iter().map(|v| v + mean_y).collect();
    Ok(Fit { fitted, condition })
}
