//! Numerical verification of heat-kernel bounds: the off-diagonal estimate
//! `p_t(x) ≤ e^{-D_t²(x)} p_t(0)`, on-diagonal fits `sup p_t ≤ c [f^{-1}(1/(γt))]^{n/2}`,
//! their combination, and the closed-form asymptotics for measures with
//! bounded support or tempered tails.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::bernstein::BernsteinFn;
use crate::density::{density_grid, DensityGrid, GridParams};
use crate::error::{Error, Result};
use crate::kernels::sphere_area;
use crate::levy_model::{LevyMeasure, LevyModel};
use crate::quadrature::origin_shells;
use crate::rate::{rate_function, RateStatus};

/// Relative slack allowed by the off-diagonal and combined checks.
pub const OFF_DIAGONAL_TOL: f64 = 1e-8;
/// Default `ε` of the closed-form asymptotic bounds.
pub const DEFAULT_EPS: f64 = 0.2;
const UNDERFLOW_LOG: f64 = -690.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "flag", content = "detail")]
pub enum RowFlag {
    Ok,
    /// Both sides are below the smallest normal double.
    PassByUnderflow,
    /// The point lies outside the regime of the bound and does not count.
    Regime(String),
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    /// `x` for spatial bounds, `t` for on-diagonal fits.
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub flag: RowFlag,
}

impl BoundRow {
    fn failed(point: Vec<f64>, why: impl ToString) -> Self {
        BoundRow {
            point,
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            flag: RowFlag::Failed(why.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_id: String,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub rows: Vec<BoundRow>,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub verdict: bool,
    /// `(γ, c(γ))` for every trial `γ` of an on-diagonal fit.
    pub fits: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl BoundReport {
    fn assemble(bound_id: &str, rows: Vec<BoundRow>, tolerance: f64) -> Self {
        let counted: Vec<&BoundRow> = rows.iter().filter(|r| r.flag == RowFlag::Ok).collect();
        let worst_slack = counted
            .iter()
            .map(|r| r.slack)
            .fold(f64::NEG_INFINITY, f64::max);
        let any_failed = rows.iter().any(|r| matches!(r.flag, RowFlag::Failed(_)));
        let verdict = !any_failed && worst_slack <= tolerance;
        BoundReport {
            bound_id: bound_id.into(),
            c: None,
            gamma: None,
            delta: None,
            rows,
            worst_slack,
            tolerance,
            verdict,
            fits: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,lhs,rhs,slack,flag\n");
        for r in &self.rows {
            let point = r
                .point
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect::<Vec<_>>()
                .join(";");
            let flag = match &r.flag {
                RowFlag::Ok => "ok".to_string(),
                RowFlag::PassByUnderflow => "pass-by-underflow".to_string(),
                RowFlag::Regime(_) => "regime".to_string(),
                RowFlag::Failed(why) => format!("failed: {}", why.replace(',', ";")),
            };
            let _ = writeln!(
                out,
                "{point},{:.16e},{:.16e},{:.16e},{flag}",
                r.lhs, r.rhs, r.slack
            );
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bound_id": self.bound_id,
            "c": self.c,
            "gamma": self.gamma,
            "verdict": if self.verdict { "pass" } else { "fail" },
        })
    }
}

fn grid_value(grid: &DensityGrid, x: &[f64]) -> Result<f64> {
    let half = grid.half_width();
    if x.iter().any(|v| v.abs() >= half) {
        return Err(Error::invalid(format!(
            "point lies outside the density grid (half width {half})"
        )));
    }
    grid.value_at(x)
}

/// Checks `p_t(x) ≤ e^{-D_t²(x)} p_t(0)`; a row passes when
/// `p_t(x) - e^{-D_t²(x)} p_t(0) ≤ 1e-8 p_t(0)`.
pub fn off_diagonal_check(
    model: &LevyModel,
    t: f64,
    xs: &[Vec<f64>],
    params: &GridParams,
) -> Result<BoundReport> {
    let grid = density_grid(model, t, params)?;
    let p0 = grid.value_at(&vec![0.0; model.dim()])?;
    let rows: Vec<BoundRow> = xs
        .par_iter()
        .map(|x| {
            let lhs = match grid_value(&grid, x) {
                Ok(v) => v,
                Err(e) => return BoundRow::failed(x.clone(), e),
            };
            match rate_function(model, t, x) {
                Ok(r) => {
                    let rhs = (-r.d_sq).exp() * p0;
                    let flag = if r.status == RateStatus::BoundaryCapped {
                        RowFlag::Failed("rate solver reached the overflow region".into())
                    } else {
                        RowFlag::Ok
                    };
                    BoundRow {
                        point: x.clone(),
                        lhs,
                        rhs,
                        slack: lhs - rhs,
                        flag,
                    }
                }
                Err(e) => BoundRow::failed(x.clone(), e),
            }
        })
        .collect();
    let mut report = BoundReport::assemble("off-diagonal", rows, OFF_DIAGONAL_TOL * p0);
    report.warnings = grid.diagnostics.warnings.clone();
    Ok(report)
}

fn check_admissible(f: &BernsteinFn) -> Result<()> {
    if f.a() > 0.0 || f.b() > 0.0 {
        return Err(Error::precondition(format!(
            "{} must satisfy f(0) = 0 and have no linear term",
            f.label()
        )));
    }
    Ok(())
}

/// `ln [f^{-1}(1/(γt))]^{n/2}`.
fn log_profile(f: &BernsteinFn, gamma: f64, t: f64, n: usize) -> Result<f64> {
    Ok(0.5 * n as f64 * f.invert(1.0 / (gamma * t))?.ln())
}

/// Fits the smallest `c` with `sup_x p_t(x) ≤ c [f^{-1}(1/(γt))]^{n/2}` over
/// `ts` for `γ = 1, ½, ¼, …, 2^{-12}`, and reports the largest admissible `γ`.
pub fn on_diagonal_fit(
    model: &LevyModel,
    f: &BernsteinFn,
    ts: &[f64],
    params: &GridParams,
) -> Result<BoundReport> {
    check_admissible(f)?;
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::invalid("times must be positive and finite"));
    }
    let n = model.dim();
    let peaks: Vec<Result<f64>> = ts
        .iter()
        .map(|&t| density_grid(model, t, params).map(|g| g.max_value()))
        .collect();
    let ok: Vec<(f64, f64)> = ts
        .iter()
        .zip(&peaks)
        .filter_map(|(&t, p)| p.as_ref().ok().map(|&m| (t, m)))
        .collect();
    let mut fits = Vec::new();
    let mut chosen: Option<(f64, f64)> = None;
    for k in 0..=12 {
        let gamma = 0.5f64.powi(k);
        let logs: Result<Vec<f64>> = ok
            .iter()
            .map(|&(t, m)| Ok(m.ln() - log_profile(f, gamma, t, n)?))
            .collect();
        if let Ok(logs) = logs {
            let c = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp();
            if c.is_finite() && c > 0.0 {
                fits.push((gamma, c));
                chosen.get_or_insert((gamma, c));
            }
        }
    }
    let rows: Vec<BoundRow> = ts
        .iter()
        .zip(peaks)
        .map(|(&t, p)| match (p, chosen) {
            (Ok(m), Some((gamma, c))) => {
                let rhs = c * log_profile(f, gamma, t, n)
                    .map(f64::exp)
                    .unwrap_or(f64::NAN);
                BoundRow {
                    point: vec![t],
                    lhs: m,
                    rhs,
                    slack: m - rhs,
                    flag: RowFlag::Ok,
                }
            }
            (Ok(_), None) => BoundRow::failed(vec![t], "no trial γ admits a finite constant"),
            (Err(e), _) => BoundRow::failed(vec![t], e),
        })
        .collect();
    let tol = rows
        .iter()
        .filter(|r| r.flag == RowFlag::Ok)
        .map(|r| 1e-12 * r.rhs)
        .fold(0.0, f64::max);
    let mut report = BoundReport::assemble("on-diagonal", rows, tol);
    report.verdict &= chosen.is_some();
    if let Some((gamma, c)) = chosen {
        report.gamma = Some(gamma);
        report.c = Some(c);
    }
    report.delta = Some(0.0);
    report.fits = fits;
    Ok(report)
}

/// Checks `p_t(x) ≤ c e^{-D_t²(x)} [f^{-1}(1/(γt))]^{n/2}` with `(c, γ)` from
/// an on-diagonal fit, for `0 < t ≤ 1`.
pub fn combined_bound_check(
    model: &LevyModel,
    f: &BernsteinFn,
    fit: &BoundReport,
    t: f64,
    xs: &[Vec<f64>],
    params: &GridParams,
) -> Result<BoundReport> {
    check_admissible(f)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Regime(format!(
            "the combined bound is checked for 0 < t ≤ 1, got {t}"
        )));
    }
    let (Some(c), Some(gamma)) = (fit.c, fit.gamma) else {
        return Err(Error::precondition(
            "the on-diagonal fit produced no constants",
        ));
    };
    let n = model.dim();
    let log_diag = c.ln() + log_profile(f, gamma, t, n)?;
    let grid = density_grid(model, t, params)?;
    let p0 = grid.value_at(&vec![0.0; n])?;
    let rows: Vec<BoundRow> = xs
        .par_iter()
        .map(|x| {
            let d = match rate_function(model, t, x) {
                Ok(r) => r.d_sq,
                Err(e) => return BoundRow::failed(x.clone(), e),
            };
            let log_rhs = log_diag - d;
            let lhs = grid_value(&grid, x);
            if log_rhs < UNDERFLOW_LOG {
                // p_t(x) ≤ e^{-D} p_t(0) puts the density below the rhs as well
                let lhs = lhs.unwrap_or(0.0);
                return BoundRow {
                    point: x.clone(),
                    lhs,
                    rhs: log_rhs.exp(),
                    slack: 0.0,
                    flag: if lhs <= OFF_DIAGONAL_TOL * p0 {
                        RowFlag::PassByUnderflow
                    } else {
                        RowFlag::Failed("density above noise where the bound underflows".into())
                    },
                };
            }
            match lhs {
                Ok(lhs) => {
                    let rhs = log_rhs.exp();
                    BoundRow {
                        point: x.clone(),
                        lhs,
                        rhs,
                        slack: lhs - rhs,
                        flag: RowFlag::Ok,
                    }
                }
                Err(e) => BoundRow::failed(x.clone(), e),
            }
        })
        .collect();
    let mut report = BoundReport::assemble("combined", rows, OFF_DIAGONAL_TOL * p0);
    report.c = Some(c);
    report.gamma = Some(gamma);
    report.delta = Some(0.0);
    Ok(report)
}

/// `min_ξ (-ξx + c₁ t e^{ξ(1+ε)}) = -x/(1+ε) ln(x / (t c₁ (1+ε))) + x/(1+ε)`.
pub fn small_jump_rate_bound(c1: f64, eps: f64, t: f64, x: f64) -> Result<f64> {
    if !(c1 > 0.0 && eps > 0.0 && t > 0.0) {
        return Err(Error::invalid("c₁, ε and t must be positive"));
    }
    let threshold = t * c1 * (1.0 + eps);
    if !(x > threshold) {
        return Err(Error::Regime(format!(
            "needs x > t c₁ (1+ε) = {threshold}, got {x}"
        )));
    }
    let a = x / (1.0 + eps);
    Ok(-a * (x / threshold).ln() + a)
}

/// `c₁ = ∫ y² e^{|y|} ν(dy)` for a measure supported in the unit ball.
pub fn small_jump_constant(model: &LevyModel) -> Result<f64> {
    let m = model
        .measure()
        .ok_or_else(|| Error::unavailable("c₁ needs a Lévy measure"))?;
    weighted_moment(m, model.dim())
}

fn weighted_moment(m: &LevyMeasure, n: usize) -> Result<f64> {
    let outside = || Error::Regime("the measure is not supported in the unit ball".into());
    match m {
        LevyMeasure::Atoms(atoms) => atoms
            .iter()
            .map(|a| {
                let r2: f64 = a.point.iter().map(|v| v * v).sum();
                if r2 > 1.0 {
                    Err(outside())
                } else {
                    Ok(a.mass * r2 * r2.sqrt().exp())
                }
            })
            .sum(),
        LevyMeasure::Radial(g) => {
            if g.radius() > 1.0 {
                return Err(outside());
            }
            let h = |r: f64| g.eval(r) * r.powi(n as i32 + 1) * r.exp();
            let v = origin_shells(&h, g.radius(), 1e-12)?.value;
            Ok(sphere_area(n) * v)
        }
        LevyMeasure::TemperedTail { .. } => Err(outside()),
        LevyMeasure::Composite(parts) => parts.iter().map(|p| weighted_moment(p, n)).sum(),
    }
}

/// Compares `-D_t²(x)` with [`small_jump_rate_bound`] at fitted `c₁`.
pub fn small_jump_check(model: &LevyModel, t: f64, xs: &[f64], eps: f64) -> Result<BoundReport> {
    if model.dim() != 1 {
        return Err(Error::unavailable(
            "the closed-form rate bounds are one-dimensional",
        ));
    }
    let c1 = small_jump_constant(model)?;
    let rows = xs
        .iter()
        .map(|&x| {
            let bound = match small_jump_rate_bound(c1, eps, t, x.abs()) {
                Ok(b) => b,
                Err(e) => {
                    return BoundRow {
                        point: vec![x],
                        lhs: f64::NAN,
                        rhs: f64::NAN,
                        slack: f64::NAN,
                        flag: RowFlag::Regime(e.to_string()),
                    }
                }
            };
            match rate_function(model, t, &[x]) {
                Ok(r) => BoundRow {
                    point: vec![x],
                    lhs: -r.d_sq,
                    rhs: bound,
                    slack: -r.d_sq - bound,
                    flag: RowFlag::Ok,
                },
                Err(e) => BoundRow::failed(vec![x], e),
            }
        })
        .collect();
    let mut report = BoundReport::assemble("small-jump", rows, 1e-10);
    report.c = Some(c1);
    Ok(report)
}

/// Laplace-method constants for `I₁(ξ) = ∫_1^∞ e^{ξy - y^β} dy`:
/// `I₁(ξ) ~ c₂ ξ^{power} e^{c₁ ξ^{growth}}` as `ξ → ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaplaceConstants {
    pub beta: f64,
    /// `(β-1) β^{β/(1-β)}`.
    pub c1: f64,
    /// `√(2π / (β(β-1))) β^{(β-2)/(2(β-1))}`.
    pub c2: f64,
    /// `(2-β) / (2(β-1))`.
    pub power: f64,
    /// `β / (β-1)`.
    pub growth: f64,
    pub warnings: Option<&'static str>,
}

pub fn laplace_constants(beta: f64) -> Result<LaplaceConstants> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::precondition(format!(
            "a tail e^(-|y|^β) has exponential moments only for β > 1, got {beta}"
        )));
    }
    let c1 = if beta == 2.0 {
        0.25
    } else {
        (beta - 1.0) * beta.powf(beta / (1.0 - beta))
    };
    let c2 = (2.0 * std::f64::consts::PI / (beta * (beta - 1.0))).sqrt()
        * beta.powf((beta - 2.0) / (2.0 * (beta - 1.0)));
    Ok(LaplaceConstants {
        beta,
        c1,
        c2,
        power: (2.0 - beta) / (2.0 * (beta - 1.0)),
        growth: beta / (beta - 1.0),
        warnings: (beta < 1.05)
            .then_some("β close to 1: c₁ tends to 0 and the asymptotics set in late"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsRow {
    pub x: f64,
    pub xi0: f64,
    /// `(c_{β,1}^{-1} log(x/t))^{(β-1)/β}`.
    pub predicted: f64,
    pub ratio: f64,
    pub d_sq: f64,
    /// `(1-ε) x (c_{β,1}^{-1} log(x/t))^{(β-1)/β}`.
    pub exponent: f64,
    pub flag: RowFlag,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub beta: f64,
    pub t: f64,
    pub eps: f64,
    pub rows: Vec<AsymptoticsRow>,
    /// `|ratio - 1|` decreases along the counted rows.
    pub deviation_decreasing: bool,
    pub final_deviation: f64,
    /// `-D_t²(x) ≤ -(1-ε) x (…)^{(β-1)/β}` at the largest counted `x`.
    pub exponent_bound_holds: bool,
}

/// Compares the numerical `ξ₀` of a tempered-tail model with its predicted
/// growth `(c_{β,1}^{-1} log(x/t))^{(β-1)/β}`. Rows with `x/t < 10` are
/// flagged as outside the asymptotic regime.
pub fn tempered_asymptotics_check(
    model: &LevyModel,
    t: f64,
    xs: &[f64],
    eps: f64,
) -> Result<AsymptoticsReport> {
    let beta = match model.measure() {
        Some(LevyMeasure::TemperedTail { beta, .. }) => *beta,
        _ => {
            return Err(Error::precondition(
                "the asymptotics need a tempered-tail measure",
            ))
        }
    };
    if model.dim() != 1 {
        return Err(Error::unavailable(
            "the closed-form rate bounds are one-dimensional",
        ));
    }
    let lc = laplace_constants(beta)?;
    let power = (beta - 1.0) / beta;
    let rows: Vec<AsymptoticsRow> = xs
        .iter()
        .map(|&x| {
            let predicted = ((x / t).ln() / lc.c1).powf(power);
            let exponent = (1.0 - eps) * x * predicted;
            let mut row = AsymptoticsRow {
                x,
                xi0: f64::NAN,
                predicted,
                ratio: f64::NAN,
                d_sq: f64::NAN,
                exponent,
                flag: RowFlag::Ok,
            };
            if x / t < 10.0 {
                row.flag =
                    RowFlag::Regime(format!("x/t = {} is below the asymptotic regime", x / t));
                return row;
            }
            match rate_function(model, t, &[x]) {
                Ok(r) if r.status == RateStatus::Converged => {
                    row.xi0 = r.xi0[0];
                    row.ratio = r.xi0[0] / predicted;
                    row.d_sq = r.d_sq;
                }
                Ok(_) => {
                    row.flag = RowFlag::Failed("rate solver reached the overflow region".into())
                }
                Err(e) => row.flag = RowFlag::Failed(e.to_string()),
            }
            row
        })
        .collect();
    let counted: Vec<&AsymptoticsRow> = rows.iter().filter(|r| r.flag == RowFlag::Ok).collect();
    let deviations: Vec<f64> = counted.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    let deviation_decreasing = !deviations.is_empty() && deviations.windows(2).all(|w| w[1] < w[0]);
    let last = counted.last();
    Ok(AsymptoticsReport {
        beta,
        t,
        eps,
        final_deviation: deviations.last().copied().unwrap_or(f64::NAN),
        exponent_bound_holds: last.is_some_and(|r| -r.d_sq <= -r.exponent),
        rows,
        deviation_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::ClosedForm;

    #[test]
    fn example_i_formula() {
        let x = std::f64::consts::E * 1.1;
        assert!(small_jump_rate_bound(1.0, 0.1, 1.0, x).unwrap().abs() < 1e-15);
        assert!(matches!(
            small_jump_rate_bound(1.0, 0.1, 1.0, 1.0),
            Err(Error::Regime(_))
        ));
        let a = small_jump_rate_bound(1.0, 0.2, 1.0, 4.0).unwrap();
        let b = small_jump_rate_bound(1.0, 0.2, 1.0, 5.0).unwrap();
        assert!(b < a);
    }

    #[test]
    fn laplace_values() {
        assert_eq!(laplace_constants(2.0).unwrap().c1, 0.25);
        assert!((laplace_constants(3.0).unwrap().c1 - 0.384_900_179_459_750_5).abs() < 1e-15);
        assert!(laplace_constants(1.0).is_err());
        assert!(laplace_constants(1.01).unwrap().warnings.is_some());
        let c = laplace_constants(2.0).unwrap();
        assert!((c.c2 - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(c.power, 0.0);
        // max_y (y - y³) on a fine grid
        let brute = (1..200_000)
            .map(|k| k as f64 * 5e-6)
            .map(|y| y - y * y * y)
            .fold(0.0, f64::max);
        assert!((brute - laplace_constants(3.0).unwrap().c1).abs() < 1e-9);
    }

    #[test]
    fn gaussian_off_diagonal_is_equality() {
        let g = LevyModel::from_closed_form(ClosedForm::Gaussian, 1).unwrap();
        let xs: Vec<Vec<f64>> = [0.0, 0.5, 1.0, 3.0, 6.0].iter().map(|&x| vec![x]).collect();
        let r = off_diagonal_check(&g, 1.0, &xs, &GridParams::default()).unwrap();
        assert!(r.verdict);
        for row in &r.rows {
            assert!(row.slack.abs() < 1e-13, "{row:?}");
        }
        assert_eq!(r.rows[0].slack, 0.0);
    }

    #[test]
    fn cauchy_on_diagonal_constant() {
        let m = LevyModel::from_closed_form(ClosedForm::Stable { alpha: 1.0 }, 1).unwrap();
        let f = BernsteinFn::power(0.5).unwrap();
        let r = on_diagonal_fit(&m, &f, &[0.25, 0.5, 1.0], &GridParams::default()).unwrap();
        assert!(r.verdict);
        assert_eq!(r.gamma, Some(1.0));
        assert!((r.c.unwrap() * std::f64::consts::PI - 1.0).abs() < 1e-6);
        for w in r.fits.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
        let lin = BernsteinFn::power(1.0).unwrap();
        assert!(matches!(
            on_diagonal_fit(&m, &lin, &[1.0], &GridParams::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unit_pair_small_jump_constant() {
        let m = LevyModel::new(LevyMeasure::symmetric_atoms(&[(1.0, 0.5)]), 1).unwrap();
        assert!((small_jump_constant(&m).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let r = small_jump_check(&m, 1.0, &[4.0, 8.0, 16.0], DEFAULT_EPS).unwrap();
        assert_eq!(r.rows[0].flag, RowFlag::Ok);
        assert!(r.verdict, "{r:?}");
    }
}
