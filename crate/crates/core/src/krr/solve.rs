//! Closed-form KRR solves in intrinsic and empirical space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted normwise relative residual of any defining system.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Pivot-ratio condition estimates above this abort the fit.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Weights and bias of a primal (intrinsic-space) fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicFit {
    pub u: Vec<f64>,
    pub b: f64,
    pub rho: f64,
    /// Normwise relative residual of the block system.
    pub residual: f64,
}

/// Dual weights and bias of an empirical-space fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalFit {
    pub a: Vec<f64>,
    pub b: f64,
    pub rho: f64,
    /// Normwise relative residual of `(K + ρI) a = y − b e`.
    pub residual: f64,
    /// `|eᵀa|` relative to the magnitude of its summands.
    pub stationarity: f64,
}

/// `‖AX − B‖∞ / (‖A‖∞ ‖X‖∞ + ‖B‖∞)`, the normwise backward error.
pub(crate) fn relative_residual(a: &DMatrix<f64>, x: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let inf_norm = |m: &DMatrix<f64>| {
        m.row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let r = a * x - b;
    let denom = inf_norm(a) * inf_norm(x) + inf_norm(b);
    if denom == 0.0 {
        0.0
    } else {
        inf_norm(&r) / denom
    }
}

/// Solves `A X = B` by LU with partial pivoting and checks the result.
fn solve_checked(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let lu = a.clone().lu();
    let u = lu.u();
    let pivots = u.diagonal().map(f64::abs);
    let (max_p, min_p) = (pivots.max(), pivots.min());
    let condition = if min_p > 0.0 { max_p / min_p } else { f64::INFINITY };
    let x = lu.solve(b).ok_or(Error::Conditioning {
        condition,
        residual: f64::INFINITY,
    })?;
    let residual = relative_residual(a, &x, b);
    if !(condition <= CONDITION_LIMIT) || !(residual <= RESIDUAL_TOL) || x.iter().any(|v| !v.is_finite())
    {
        return Err(Error::Conditioning {
            condition,
            residual,
        });
    }
    Ok((x, residual))
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::param("rho", format!("{rho} must be positive")));
    }
    Ok(())
}

/// Primal ridge regression with bias.
///
/// `features` holds one sample per row (N × J). Solves the (J+1) × (J+1)
/// block system
///
/// ```text
/// [ ΦΦᵀ + ρI   Φe ] [u]   [ Φy ]
/// [ eᵀΦᵀ       N  ] [b] = [ eᵀy ]
/// ```
///
/// where Φ = `features`ᵀ.
pub fn fit_intrinsic(features: &DMatrix<f64>, y: &[f64], rho: f64) -> Result<IntrinsicFit> {
    check_rho(rho)?;
    let (n, j) = features.shape();
    if y.len() != n {
        return Err(Error::shape(n, y.len()));
    }
    if !(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0)) {
        return Err(Error::DegenerateTarget);
    }
    let yv = DVector::from_column_slice(y);
    let col_sums = features.row_sum().transpose();

    let mut a = DMatrix::zeros(j + 1, j + 1);
    let mut gram = features.tr_mul(features);
    for i in 0..j {
        gram[(i, i)] += rho;
    }
    a.view_mut((0, 0), (j, j)).copy_from(&gram);
    a.view_mut((0, j), (j, 1)).copy_from(&col_sums);
    a.view_mut((j, 0), (1, j)).copy_from(&col_sums.transpose());
    a[(j, j)] = n as f64;

    let mut rhs = DMatrix::zeros(j + 1, 1);
    rhs.view_mut((0, 0), (j, 1)).copy_from(&features.tr_mul(&yv));
    rhs[(j, 0)] = yv.sum();

    let (x, residual) = solve_checked(&a, &rhs)?;
    Ok(IntrinsicFit {
        u: x.rows(0, j).iter().copied().collect(),
        b: x[(j, 0)],
        rho,
        residual,
    })
}

/// Dual ridge regression with bias over an N × N kernel matrix.
///
/// With `v_y = (K+ρI)⁻¹ y` and `v_e = (K+ρI)⁻¹ e` from one factorization,
/// the bias is `b = eᵀv_y / eᵀv_e` and the weights are `a = v_y − b v_e`,
/// which enforces the bias stationarity condition `eᵀa = 0`. For symmetric
/// `K` this bias equals `yᵀ(K+ρI)⁻¹e / eᵀ(K+ρI)⁻¹e`. `K` may be asymmetric.
pub fn fit_empirical(k: &DMatrix<f64>, y: &[f64], rho: f64) -> Result<EmpiricalFit> {
    check_rho(rho)?;
    let n = k.nrows();
    if !k.is_square() {
        return Err(Error::shape(n, k.ncols()));
    }
    if y.len() != n {
        return Err(Error::shape(n, y.len()));
    }
    let mut a = k.clone();
    for i in 0..n {
        a[(i, i)] += rho;
    }
    let mut rhs = DMatrix::from_element(n, 2, 1.0);
    rhs.set_column(0, &DVector::from_column_slice(y));
    let (v, _) = solve_checked(&a, &rhs)?;
    let (vy, ve) = (v.column(0), v.column(1));

    let denom = ve.sum();
    let scale = ve.iter().map(|x| x.abs()).sum::<f64>();
    if !(denom.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::BiasDegenerate(denom));
    }
    let b = vy.sum() / denom;
    let weights: DVector<f64> = vy - ve * b;

    let target = DMatrix::from_iterator(n, 1, y.iter().map(|yi| yi - b));
    let weights_m = DMatrix::from_column_slice(n, 1, weights.as_slice());
    let residual = relative_residual(&a, &weights_m, &target);
    let sum_scale = vy.iter().map(|x| x.abs()).sum::<f64>() + b.abs() * scale;
    let stationarity = if sum_scale == 0.0 {
        0.0
    } else {
        weights.sum().abs() / sum_scale
    };
    if !(residual <= RESIDUAL_TOL) || !(stationarity <= RESIDUAL_TOL) {
        return Err(Error::Conditioning {
            condition: f64::NAN,
            residual: residual.max(stationarity),
        });
    }
    Ok(EmpiricalFit {
        a: weights.iter().copied().collect(),
        b,
        rho,
        residual,
        stationarity,
    })
}
