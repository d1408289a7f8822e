//! The rate function `D_t²(x) = sup_ξ (ξ·x - tΛ(ξ))` and its minimiser `ξ₀`.
//!
//! `v_t(ξ, x) = -ξ·x + tΛ(ξ)` is strictly convex when the second-moment
//! matrix is positive definite, so `ξ₀` is the unique stationary point.

use std::fmt::Write as _;

use serde::Serialize;

use crate::density::{density_grid, GridParams};
use crate::error::{Error, Result};
use crate::kernels::solve;
use crate::levy_model::LevyModel;

const GRAD_TOL: f64 = 1e-12;
const MAX_ITER: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateStatus {
    Converged,
    /// The cumulant overflowed before stationarity; `d_sq` is a lower bound.
    BoundaryCapped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateResult {
    pub t: f64,
    pub x: Vec<f64>,
    pub d_sq: f64,
    pub xi0: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub status: RateStatus,
}

/// `v_t(ξ, x) = -ξ·x + tΛ(ξ)`.
pub fn v_eval(model: &LevyModel, t: f64, xi: &[f64], x: &[f64]) -> Result<f64> {
    if xi.len() != x.len() {
        return Err(Error::invalid("ξ and x must have the same dimension"));
    }
    if xi.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let dot: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
    Ok(-dot + t * model.cumulant(xi)?)
}

fn check_inputs(model: &LevyModel, t: f64, x: &[f64]) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!(
            "time must be positive and finite, got {t}"
        )));
    }
    if x.len() != model.dim() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "x must be a finite point of the model's dimension",
        ));
    }
    if !model.has_exp_moments() {
        return Err(Error::unavailable(
            "the rate function requires exponential moments",
        ));
    }
    match model.quadratic_constant() {
        Some(c) if c > 0.0 => Ok(()),
        _ => Err(Error::precondition(
            "second-moment matrix is singular; the rate function is infinite off its range",
        )),
    }
}

/// Solves for `ξ₀` and returns `D_t²(x) = -v_t(ξ₀, x)`.
pub fn rate_function(model: &LevyModel, t: f64, x: &[f64]) -> Result<RateResult> {
    check_inputs(model, t, x)?;
    if x.iter().all(|&v| v == 0.0) {
        return Ok(RateResult {
            t,
            x: x.to_vec(),
            d_sq: 0.0,
            xi0: vec![0.0; x.len()],
            iterations: 0,
            gradient_norm: 0.0,
            status: RateStatus::Converged,
        });
    }
    if model.dim() == 1 {
        solve_1d(model, t, x[0])
    } else {
        solve_nd(model, t, x)
    }
}

/// Bracketing on the increasing derivative `-x + tΛ'(ξ)` followed by
/// safeguarded Newton steps.
fn solve_1d(model: &LevyModel, t: f64, x: f64) -> Result<RateResult> {
    let sign = x.signum();
    let ax = x.abs();
    let tol = GRAD_TOL * (1.0 + ax);
    let deriv = |xi: f64| -> Result<(f64, f64)> {
        let (_, g, h) = model.cumulant_hess(&[xi])?;
        Ok((-ax + t * g[0], t * h[0]))
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut iterations = 0;
    loop {
        let (g, _) = deriv(hi)?;
        iterations += 1;
        if g >= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > 2f64.powi(60) {
            return finish_1d(
                model,
                t,
                x,
                sign * lo,
                iterations,
                RateStatus::BoundaryCapped,
            );
        }
    }
    let mut xi = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, xi);
    while iterations < MAX_ITER {
        iterations += 1;
        let (g, h) = deriv(xi)?;
        if g.abs() < best.0 {
            best = (g.abs(), xi);
        }
        if g.abs() <= tol {
            break;
        }
        if g < 0.0 {
            lo = xi;
        } else {
            hi = xi;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let newton = xi - g / h;
        xi = if h.is_finite() && h > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    finish_1d(
        model,
        t,
        x,
        sign * best.1,
        iterations,
        RateStatus::Converged,
    )
}

fn finish_1d(
    model: &LevyModel,
    t: f64,
    x: f64,
    xi: f64,
    iterations: usize,
    status: RateStatus,
) -> Result<RateResult> {
    let (lam, g) = model.cumulant_grad(&[xi])?;
    Ok(RateResult {
        t,
        x: vec![x],
        d_sq: (xi * x - t * lam).max(0.0),
        xi0: vec![xi],
        iterations,
        gradient_norm: (-x + t * g[0]).abs(),
        status,
    })
}

/// Damped Newton with a Levenberg shift and backtracking on `v_t`.
fn solve_nd(model: &LevyModel, t: f64, x: &[f64]) -> Result<RateResult> {
    let n = x.len();
    let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = GRAD_TOL * (1.0 + xnorm);
    let v = |xi: &[f64]| v_eval(model, t, xi, x);
    let mut xi = vec![0.0; n];
    let mut value = 0.0;
    let mut status = RateStatus::Converged;
    let mut iterations = 0;
    let mut grad_norm = xnorm;
    while iterations < MAX_ITER {
        iterations += 1;
        let (_, g, h) = model.cumulant_hess(&xi)?;
        let grad: Vec<f64> = g.iter().zip(x).map(|(gi, xi)| -xi + t * gi).collect();
        grad_norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad_norm <= tol {
            break;
        }
        let mut hess: Vec<f64> = h.iter().map(|v| t * v).collect();
        let trace: f64 = (0..n).map(|i| hess[i * n + i]).sum();
        for i in 0..n {
            hess[i * n + i] += 1e-10 * trace;
        }
        let neg: Vec<f64> = grad.iter().map(|v| -v).collect();
        let step = solve(&hess, &neg, n).ok_or_else(|| Error::Numeric {
            what: "Newton step for the rate function".into(),
            estimate: value,
            error_bound: grad_norm,
        })?;
        let slope: f64 = step.iter().zip(&grad).map(|(a, b)| a * b).sum();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = xi.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            let vc = v(&cand)?;
            if vc.is_finite() && vc <= value + 1e-4 * alpha * slope {
                xi = cand;
                value = vc;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // no decrease available at machine precision
            if grad_norm > 1e-8 * (1.0 + xnorm) {
                status = RateStatus::BoundaryCapped;
            }
            break;
        }
    }
    Ok(RateResult {
        t,
        x: x.to_vec(),
        d_sq: (-value).max(0.0),
        xi0: xi,
        iterations,
        gradient_norm: grad_norm,
        status,
    })
}

/// `max_ℓ |D_{ℓt}²(ℓx) - ℓ D_t²(x)| / (ℓ D_t²(x))`.
pub fn rate_scaling_check(model: &LevyModel, t: f64, x: &[f64], ells: &[f64]) -> Result<f64> {
    let base = rate_function(model, t, x)?;
    if base.d_sq == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0_f64;
    for &l in ells {
        let lx: Vec<f64> = x.iter().map(|v| l * v).collect();
        let r = rate_function(model, l * t, &lx)?;
        worst = worst.max((r.d_sq - l * base.d_sq).abs() / (l * base.d_sq));
    }
    Ok(worst)
}

/// `max_x (D_t²(x) - |x|² / (4ct))` with `c = ½ λ_min(∫ y yᵀ ν(dy))`.
pub fn quadratic_bound_check(model: &LevyModel, t: f64, xs: &[Vec<f64>]) -> Result<f64> {
    let c = model
        .quadratic_constant()
        .ok_or_else(|| Error::precondition("second moments are infinite"))?;
    let mut worst = f64::NEG_INFINITY;
    for x in xs {
        let r = rate_function(model, t, x)?;
        let bound = x.iter().map(|v| v * v).sum::<f64>() / (4.0 * c * t);
        worst = worst.max(r.d_sq - bound);
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct LdpRow {
    pub ell: f64,
    /// `ℓ^{-1} log p_{ℓt}(ℓx)`, absent when the density failed.
    pub scaled_log_density: Option<f64>,
    pub error: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LdpReport {
    pub t: f64,
    pub x: f64,
    pub d_sq: f64,
    pub rows: Vec<LdpRow>,
    pub threshold: f64,
    pub strictly_decreasing: bool,
    pub passed: bool,
}

/// `½ log(4πℓ) / ℓ`: the error of the Gaussian channel at `t = x = 1`.
pub fn gaussian_log_prefactor(ell: f64) -> f64 {
    0.5 * (4.0 * std::f64::consts::PI * ell).ln() / ell
}

/// Tabulates `e(ℓ) = |ℓ^{-1} log p_{ℓt}(ℓx) + D_t²(x)|` in one dimension.
pub fn ldp_check(
    model: &LevyModel,
    t: f64,
    x: f64,
    ells: &[f64],
    params: &GridParams,
) -> Result<LdpReport> {
    if model.dim() != 1 {
        return Err(Error::unavailable(
            "the density-level large-deviation check is one-dimensional",
        ));
    }
    if ells.is_empty() {
        return Err(Error::invalid("need at least one scale ℓ"));
    }
    let d_sq = rate_function(model, t, &[x])?.d_sq;
    let rows: Vec<LdpRow> = ells
        .iter()
        .map(|&l| {
            let p = density_grid(model, l * t, params).and_then(|g| g.value_at(&[l * x]));
            match p {
                Ok(p) if p > 0.0 => {
                    let s = p.ln() / l;
                    LdpRow {
                        ell: l,
                        scaled_log_density: Some(s),
                        error: Some((s + d_sq).abs()),
                        failure: None,
                    }
                }
                Ok(p) => LdpRow {
                    ell: l,
                    scaled_log_density: None,
                    error: None,
                    failure: Some(format!("density {p:e} is not positive")),
                },
                Err(e) => LdpRow {
                    ell: l,
                    scaled_log_density: None,
                    error: None,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    let errors: Vec<f64> = rows.iter().filter_map(|r| r.error).collect();
    let strictly_decreasing = errors.len() == rows.len() && errors.windows(2).all(|w| w[1] < w[0]);
    let ell_max = ells.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = 0.02_f64.max(2.0 * gaussian_log_prefactor(ell_max));
    let last = rows.last().and_then(|r| r.error);
    let first = rows.first().and_then(|r| r.error);
    let passed = match (first, last) {
        (Some(f), Some(l)) => strictly_decreasing && l < f && l <= threshold,
        _ => false,
    };
    Ok(LdpReport {
        t,
        x,
        d_sq,
        rows,
        threshold,
        strictly_decreasing,
        passed,
    })
}

/// CSV rows `(x, D_sq, xi0, status)`; multi-dimensional points are written
/// with `;`-separated coordinates.
pub fn rate_table_csv(results: &[RateResult]) -> String {
    let mut out = String::from("x,D_sq,xi0,status\n");
    let join = |v: &[f64]| {
        v.iter()
            .map(|c| format!("{c:.16e}"))
            .collect::<Vec<_>>()
            .join(";")
    };
    for r in results {
        let status = match r.status {
            RateStatus::Converged => "converged",
            RateStatus::BoundaryCapped => "boundary-capped",
        };
        let _ = writeln!(
            out,
            "{},{:.16e},{},{}",
            join(&r.x),
            r.d_sq,
            join(&r.xi0),
            status
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::{ClosedForm, LevyMeasure};

    fn cp1() -> LevyModel {
        LevyModel::new(LevyMeasure::symmetric_atoms(&[(1.0, 0.5)]), 1).unwrap()
    }

    #[test]
    fn v_at_known_points() {
        let m = cp1();
        assert_eq!(v_eval(&m, 1.0, &[0.0], &[3.0]).unwrap(), 0.0);
        assert!((v_eval(&m, 1.0, &[1.0], &[0.0]).unwrap() - 0.543_080_634_815_243_8).abs() < 1e-15);
        let xi = 1f64.asinh();
        assert!((v_eval(&m, 1.0, &[xi], &[1.0]).unwrap() + 0.467_160_024_646_447_98).abs() < 1e-15);
    }

    #[test]
    fn unit_pair_rate() {
        let r = rate_function(&cp1(), 1.0, &[1.0]).unwrap();
        assert!((r.d_sq - 0.467_160_024_646_447_98).abs() < 1e-14);
        assert!((r.xi0[0] - 1f64.asinh()).abs() < 1e-13);
        assert_eq!(r.status, RateStatus::Converged);
        assert!(r.gradient_norm <= 1e-10 * 2.0);
        let neg = rate_function(&cp1(), 1.0, &[-1.0]).unwrap();
        assert_eq!(neg.xi0[0], -r.xi0[0]);
    }

    #[test]
    fn gaussian_rate_is_quadratic() {
        let g = LevyModel::from_closed_form(ClosedForm::Gaussian, 1).unwrap();
        assert!((rate_function(&g, 1.0, &[2.0]).unwrap().d_sq - 1.0).abs() < 1e-14);
        assert!(rate_scaling_check(&g, 0.7, &[1.3], &[2.0, 4.0, 8.0]).unwrap() < 1e-12);
    }

    #[test]
    fn two_dimensional_solver() {
        // atoms on both axes: Λ separates into cosh terms
        let atoms = vec![
            crate::levy_model::Atom {
                point: vec![1.0, 0.0],
                mass: 0.5,
            },
            crate::levy_model::Atom {
                point: vec![-1.0, 0.0],
                mass: 0.5,
            },
            crate::levy_model::Atom {
                point: vec![0.0, 2.0],
                mass: 0.25,
            },
            crate::levy_model::Atom {
                point: vec![0.0, -2.0],
                mass: 0.25,
            },
        ];
        let m = LevyModel::new(LevyMeasure::Atoms(atoms), 2).unwrap();
        let r = rate_function(&m, 1.0, &[1.0, 0.0]).unwrap();
        assert!((r.d_sq - 0.467_160_024_646_447_98).abs() < 1e-12);
        assert!(r.xi0[1].abs() < 1e-12);
        let g = LevyModel::from_closed_form(ClosedForm::Gaussian, 2).unwrap();
        let r = rate_function(&g, 2.0, &[1.0, -3.0]).unwrap();
        assert!((r.d_sq - 10.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_measure_refused() {
        let atoms = vec![
            crate::levy_model::Atom {
                point: vec![1.0, 0.0],
                mass: 1.0,
            },
            crate::levy_model::Atom {
                point: vec![-1.0, 0.0],
                mass: 1.0,
            },
        ];
        let m = LevyModel::new(LevyMeasure::Atoms(atoms), 2).unwrap();
        assert!(matches!(
            rate_function(&m, 1.0, &[0.0, 1.0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn quadratic_bound_for_unit_pair() {
        let xs: Vec<Vec<f64>> = [0.0, 0.5, 1.0, 3.0].iter().map(|&x| vec![x]).collect();
        assert!(quadratic_bound_check(&cp1(), 1.0, &xs).unwrap() <= 0.0);
    }

    #[test]
    fn csv_layout() {
        let r = rate_function(&cp1(), 1.0, &[1.0]).unwrap();
        let csv = rate_table_csv(&[r]);
        assert!(csv.starts_with("x,D_sq,xi0,status\n1.0000000000000000e0,4.67160024646"));
        assert!(csv.trim_end().ends_with("converged"));
    }
}
