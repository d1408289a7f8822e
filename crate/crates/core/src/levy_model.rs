//! Symmetric pure-jump Lévy measures and their exponents.
//!
//! * `ψ(ξ) = ∫ (1 - cos ξ·y) ν(dy)`
//! * `Λ(ξ) = ∫ (cosh ξ·y - 1) ν(dy)`, the cumulant `log E e^{ξ·X_1}`
//! * `Γ(u, u)(x) = ½ ∫ (u(x+y) - u(x))² ν(dy)`
//!
//! Radial densities and tempered tails are reduced to one-dimensional radial
//! integrals through the spherical averages in [`crate::kernels`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    cosh_minus_one, cosh_moment2, one_minus_cos, sinh_moment, sinh_moment_over_a, sphere_area,
    symmetric_eigenvalues,
};
use crate::quadrature::{adaptive, origin_shells, panels, Tolerance};

const REL: f64 = 1e-13;
/// Arguments of `cosh`/`sinh` beyond this are handled in log space.
pub const OVERFLOW_ARG: f64 = 700.0;
const MAX_DENSITY_DIM: usize = 3;

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radially symmetric density `g(|y|)` supported on `|y| ≤ radius`.
#[derive(Clone)]
pub struct RadialDensity {
    profile: Profile,
    radius: f64,
}

impl RadialDensity {
    pub fn new(profile: Profile, radius: f64) -> Self {
        RadialDensity { profile, radius }
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.profile)(r)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl fmt::Debug for RadialDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialDensity")
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: Vec<f64>,
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub enum LevyMeasure {
    Radial(RadialDensity),
    Atoms(Vec<Atom>),
    /// Density `e^{-|y|^β}` on `|y| ≥ 1`, plus an optional core measure.
    TemperedTail {
        beta: f64,
        core: Option<Box<LevyMeasure>>,
    },
    Composite(Vec<LevyMeasure>),
}

impl LevyMeasure {
    /// One-dimensional atoms at `±y` with mass `m` each.
    pub fn symmetric_atoms(pairs: &[(f64, f64)]) -> Self {
        LevyMeasure::Atoms(
            pairs
                .iter()
                .flat_map(|&(y, m)| {
                    [
                        Atom {
                            point: vec![y],
                            mass: m,
                        },
                        Atom {
                            point: vec![-y],
                            mass: m,
                        },
                    ]
                })
                .collect(),
        )
    }

    /// `Σ_{n ≥ 0} 2^{αn} (δ_{2^{-n}} + δ_{-2^{-n}})`, truncated where the
    /// remaining levels contribute below `1e-18` relative.
    pub fn semi_stable(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::invalid(format!(
                "semi-stable index must lie in (0, 2), got {alpha}"
            )));
        }
        let levels = semi_stable_levels(alpha);
        let pairs: Vec<(f64, f64)> = (0..levels)
            .map(|n| (2f64.powi(-n), 2f64.powf(alpha * n as f64)))
            .collect();
        Ok(Self::symmetric_atoms(&pairs))
    }

    pub fn tempered(beta: f64, core: Option<LevyMeasure>) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "tail exponent must be positive, got {beta}"
            )));
        }
        Ok(LevyMeasure::TemperedTail {
            beta,
            core: core.map(Box::new),
        })
    }

    /// Exponential moments of all orders: compact support, or a tail
    /// `e^{-|y|^β}` with `β > 1`.
    pub fn has_exp_moments(&self) -> bool {
        match self {
            LevyMeasure::Radial(_) | LevyMeasure::Atoms(_) => true,
            LevyMeasure::TemperedTail { beta, core } => {
                *beta > 1.0 && core.as_ref().is_none_or(|c| c.has_exp_moments())
            }
            LevyMeasure::Composite(parts) => parts.iter().all(|p| p.has_exp_moments()),
        }
    }

    fn needs_radial_dim(&self) -> bool {
        match self {
            LevyMeasure::Radial(_) | LevyMeasure::TemperedTail { .. } => true,
            LevyMeasure::Atoms(_) => false,
            LevyMeasure::Composite(parts) => parts.iter().any(|p| p.needs_radial_dim()),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            LevyMeasure::Radial(g) => {
                if !(g.radius > 0.0 && g.radius.is_finite()) {
                    return Err(Error::invalid(
                        "radial density needs a positive finite radius",
                    ));
                }
                let w = |r: f64| r.min(1.0).powi(2) * g.eval(r) * r.powi(dim as i32 - 1);
                let mut total =
                    origin_shells(&w, g.radius.min(1.0), 1e-10).map_err(|e| match e {
                        Error::Divergence(_) => {
                            Error::invalid("radial density is not integrable against 1 ∧ |y|²")
                        }
                        e => e,
                    })?;
                if g.radius > 1.0 {
                    total = total + adaptive(&w, 1.0, g.radius, Tolerance::new(0.0, 1e-10), 500)?;
                }
                if !(total.value.is_finite() && total.value >= 0.0) {
                    return Err(Error::invalid(
                        "radial density must be nonnegative and integrable",
                    ));
                }
                Ok(())
            }
            LevyMeasure::Atoms(atoms) => validate_atoms(atoms, dim),
            LevyMeasure::TemperedTail { beta, core } => {
                if !(*beta > 0.0) {
                    return Err(Error::invalid("tail exponent must be positive"));
                }
                core.as_ref().map_or(Ok(()), |c| c.validate(dim))
            }
            LevyMeasure::Composite(parts) => parts.iter().try_for_each(|p| p.validate(dim)),
        }
    }
}

fn validate_atoms(atoms: &[Atom], dim: usize) -> Result<()> {
    for a in atoms {
        if a.point.len() != dim {
            return Err(Error::invalid(format!(
                "atom {:?} does not live in dimension {dim}",
                a.point
            )));
        }
        if !(a.mass > 0.0 && a.mass.is_finite()) || a.point.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid(
                "atoms need finite points and positive finite masses",
            ));
        }
        if a.point.iter().all(|&c| c == 0.0) {
            return Err(Error::invalid("a Lévy measure has no mass at the origin"));
        }
    }
    for a in atoms {
        let scale = a.point.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let mirrored = atoms.iter().any(|b| {
            a.point
                .iter()
                .zip(&b.point)
                .all(|(x, y)| (x + y).abs() <= 1e-12 * scale)
                && (a.mass - b.mass).abs() <= 1e-12 * a.mass
        });
        if !mirrored {
            return Err(Error::invalid(format!(
                "atom at {:?} has no mirror image of equal mass",
                a.point
            )));
        }
    }
    Ok(())
}

pub(crate) fn semi_stable_levels(alpha: f64) -> i32 {
    (18.0 * 10f64.log2() / (2.0 - alpha)).ceil() as i32 + 8
}

/// Analytic exponents that bypass the measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedForm {
    /// `ψ(ξ) = |ξ|²`.
    Gaussian,
    /// `ψ(ξ) = |ξ|^α`.
    Stable { alpha: f64 },
    /// `ψ(ξ) = Σ_{n ≥ 0} 2^{αn} · 2 (1 - cos(ξ 2^{-n}))` in one dimension.
    SemiStable { alpha: f64 },
}

impl ClosedForm {
    fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            ClosedForm::Gaussian => Ok(()),
            ClosedForm::Stable { alpha } if alpha > 0.0 && alpha <= 2.0 => Ok(()),
            ClosedForm::SemiStable { alpha } if alpha > 0.0 && alpha < 2.0 && dim == 1 => Ok(()),
            _ => Err(Error::invalid(format!(
                "invalid closed-form exponent {self:?} in dimension {dim}"
            ))),
        }
    }

    fn has_exp_moments(&self) -> bool {
        match *self {
            ClosedForm::Gaussian | ClosedForm::SemiStable { .. } => true,
            ClosedForm::Stable { alpha } => alpha == 2.0,
        }
    }

    fn psi(&self, xi: &[f64]) -> f64 {
        let s2: f64 = xi.iter().map(|v| v * v).sum();
        match *self {
            ClosedForm::Gaussian => s2,
            ClosedForm::Stable { alpha } => s2.powf(0.5 * alpha),
            ClosedForm::SemiStable { alpha } => {
                semi_stable_series(alpha, xi[0], |a, lw| one_minus_cos(1, a) * lw.exp())
            }
        }
    }

    fn hyper(&self, xi: &[f64], want: Want) -> Result<Hyper> {
        let n = xi.len();
        let mut h = Hyper::zero(n);
        match *self {
            ClosedForm::Gaussian | ClosedForm::Stable { alpha: 2.0 } => {
                h.value = xi.iter().map(|v| v * v).sum();
                if want >= Want::Grad {
                    h.grad = xi.iter().map(|v| 2.0 * v).collect();
                }
                if want >= Want::Hess {
                    for i in 0..n {
                        h.hess[i * n + i] = 2.0;
                    }
                }
            }
            ClosedForm::Stable { .. } => {
                return Err(Error::unavailable(
                    "stable exponents with α < 2 have no exponential moments",
                ));
            }
            ClosedForm::SemiStable { alpha } => {
                let x = xi[0];
                h.value = semi_stable_series(alpha, x, |a, lw| cosh_minus_one(1, a, lw));
                if want >= Want::Grad {
                    // d/dξ of 2^{αn} 2 (cosh(ξ 2^{-n}) - 1)
                    h.grad[0] =
                        semi_stable_series_scaled(alpha, x, 1, |a, lw| sinh_moment(1, a, lw));
                }
                if want >= Want::Hess {
                    h.hess[0] =
                        semi_stable_series_scaled(alpha, x, 2, |a, lw| cosh_moment2(1, a, lw));
                }
            }
        }
        Ok(h)
    }
}

fn semi_stable_series<K: Fn(f64, f64) -> f64>(alpha: f64, xi: f64, kernel: K) -> f64 {
    semi_stable_series_scaled(alpha, xi, 0, kernel)
}

/// `Σ_n 2^{αn} · 2 · 2^{-pn} K(ξ 2^{-n})`, stopped once `ξ 2^{-n} < 1` and a
/// term falls below `1e-18` of the running sum.
fn semi_stable_series_scaled<K: Fn(f64, f64) -> f64>(
    alpha: f64,
    xi: f64,
    p: i32,
    kernel: K,
) -> f64 {
    let mut sum = 0.0;
    for n in 0..4000 {
        let scale = 2f64.powi(-n);
        let a = xi * scale;
        let log_w = (alpha * n as f64 + 1.0) * std::f64::consts::LN_2
            - (p * n) as f64 * std::f64::consts::LN_2;
        let term = kernel(a, log_w);
        sum += term;
        if a.abs() < 1.0 && term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Want {
    Value,
    Grad,
    Hess,
}

#[derive(Clone, Debug)]
struct Hyper {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl Hyper {
    fn zero(n: usize) -> Self {
        Hyper {
            value: 0.0,
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
        }
    }

    fn add(&mut self, other: &Hyper) {
        self.value += other.value;
        self.grad
            .iter_mut()
            .zip(&other.grad)
            .for_each(|(a, b)| *a += b);
        self.hess
            .iter_mut()
            .zip(&other.hess)
            .for_each(|(a, b)| *a += b);
    }

    fn from_radial(xi: &[f64], phi: f64, dphi: f64, d2phi: f64, dphi_over_s: f64) -> Self {
        let n = xi.len();
        let s = norm(xi);
        let mut h = Hyper::zero(n);
        h.value = phi;
        if s > 0.0 {
            for i in 0..n {
                h.grad[i] = dphi * xi[i] / s;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let proj = if s > 0.0 {
                    xi[i] * xi[j] / (s * s)
                } else {
                    0.0
                };
                let id = if i == j { 1.0 } else { 0.0 };
                h.hess[i * n + j] = if s > 0.0 {
                    d2phi * proj + dphi_over_s * (id - proj)
                } else {
                    d2phi * id
                };
            }
        }
        h
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `[r_lo, r_hi] ⊂ [1, ∞)` outside of which `e^{φ(r)}` is below `e^{-64}`
/// of its maximum, for `φ(r) = s r - r^β + k ln r`. Returns the window and
/// `max φ`.
fn tempered_window(s: f64, beta: f64, k: f64) -> (f64, f64, f64) {
    let phi = |r: f64| s * r - r.powf(beta) + k * r.ln();
    let step = 2f64.powf(0.125);
    let mut grid = vec![(1.0, phi(1.0))];
    let mut best = phi(1.0);
    let mut r = 1.0;
    loop {
        r *= step;
        let v = phi(r);
        best = best.max(v);
        grid.push((r, v));
        if v < best - 64.0 || !r.is_finite() || grid.len() > 20_000 {
            break;
        }
    }
    let first = grid
        .iter()
        .position(|&(_, v)| v >= best - 64.0)
        .unwrap_or(0);
    let last = grid
        .iter()
        .rposition(|&(_, v)| v >= best - 64.0)
        .unwrap_or(0);
    let lo = if first == 0 { 1.0 } else { grid[first - 1].0 };
    let hi = grid[(last + 1).min(grid.len() - 1)].0;
    (lo, hi, best)
}

fn measure_psi(m: &LevyMeasure, xi: &[f64]) -> Result<f64> {
    let n = xi.len();
    let s = norm(xi);
    if s == 0.0 {
        return Ok(0.0);
    }
    match m {
        LevyMeasure::Atoms(atoms) => Ok(atoms
            .iter()
            .map(|a| a.mass * one_minus_cos(1, dot(xi, &a.point)))
            .sum()),
        LevyMeasure::Radial(g) => {
            let area = sphere_area(n);
            let h = |r: f64| one_minus_cos(n, s * r) * g.eval(r) * r.powi(n as i32 - 1);
            let r0 = g.radius.min(1.0 / s);
            let near = origin_shells(&h, r0, REL)?;
            let far = panels(&h, r0, g.radius, PI / s, REL)?;
            Ok(area * (near.value + far.value))
        }
        LevyMeasure::TemperedTail { beta, core } => {
            let area = sphere_area(n);
            let (lo, hi, _) = tempered_window(0.0, *beta, (n - 1) as f64);
            let h =
                |r: f64| one_minus_cos(n, s * r) * (-r.powf(*beta)).exp() * r.powi(n as i32 - 1);
            let width = (PI / s).min((hi - lo) / 64.0);
            let tail = panels(&h, lo, hi, width, REL)?.value;
            let core = core.as_ref().map_or(Ok(0.0), |c| measure_psi(c, xi))?;
            Ok(area * tail + core)
        }
        LevyMeasure::Composite(parts) => parts.iter().map(|p| measure_psi(p, xi)).sum(),
    }
}

fn measure_hyper(m: &LevyMeasure, xi: &[f64], want: Want) -> Result<Hyper> {
    let n = xi.len();
    match m {
        LevyMeasure::Atoms(atoms) => {
            let mut h = Hyper::zero(n);
            for a in atoms {
                let u = dot(xi, &a.point);
                let lw = a.mass.ln();
                h.value += cosh_minus_one(1, u, lw);
                if want >= Want::Grad {
                    let sh = sinh_moment(1, u, lw);
                    h.grad
                        .iter_mut()
                        .zip(&a.point)
                        .for_each(|(g, y)| *g += y * sh);
                }
                if want >= Want::Hess {
                    let ch = cosh_moment2(1, u, lw);
                    for i in 0..n {
                        for j in 0..n {
                            h.hess[i * n + j] += a.point[i] * a.point[j] * ch;
                        }
                    }
                }
            }
            Ok(h)
        }
        LevyMeasure::Radial(g) => {
            let s = norm(xi);
            let area = sphere_area(n);
            let radius = g.radius;
            let log_w = |r: f64| g.eval(r).ln() + (n as f64 - 1.0) * r.ln();
            if s * radius + log_w(radius) > OVERFLOW_ARG {
                return Ok(Hyper::infinite(n));
            }
            let integrate = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
                Ok(area * origin_shells(&f, radius, REL)?.value)
            };
            radial_hyper(xi, s, want, integrate, log_w, n)
        }
        LevyMeasure::TemperedTail { beta, core } => {
            if *beta <= 1.0 {
                return Err(Error::unavailable(
                    "tail e^{-|y|^β} with β ≤ 1 has no exponential moments",
                ));
            }
            let s = norm(xi);
            let area = sphere_area(n);
            let (lo, hi, peak) = tempered_window(s, *beta, (n + 1) as f64);
            if peak > OVERFLOW_ARG {
                return Ok(Hyper::infinite(n));
            }
            let beta = *beta;
            let log_w = move |r: f64| -r.powf(beta) + (n as f64 - 1.0) * r.ln();
            let integrate = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
                Ok(area * panels(&f, lo, hi, (hi - lo) / 64.0, REL)?.value)
            };
            let mut h = radial_hyper(xi, s, want, integrate, log_w, n)?;
            if let Some(c) = core {
                h.add(&measure_hyper(c, xi, want)?);
            }
            Ok(h)
        }
        LevyMeasure::Composite(parts) => {
            let mut h = Hyper::zero(n);
            for p in parts {
                h.add(&measure_hyper(p, xi, want)?);
            }
            Ok(h)
        }
    }
}

impl Hyper {
    fn infinite(n: usize) -> Self {
        Hyper {
            value: f64::INFINITY,
            grad: vec![f64::INFINITY; n],
            hess: vec![f64::INFINITY; n * n],
        }
    }
}

fn radial_hyper<I, L>(
    xi: &[f64],
    s: f64,
    want: Want,
    integrate: I,
    log_w: L,
    n: usize,
) -> Result<Hyper>
where
    I: Fn(&dyn Fn(f64) -> f64) -> Result<f64>,
    L: Fn(f64) -> f64,
{
    let phi = integrate(&|r| cosh_minus_one(n, s * r, log_w(r)))?;
    let (mut dphi, mut d2phi, mut dphi_over_s) = (0.0, 0.0, 0.0);
    if want >= Want::Grad {
        dphi = integrate(&|r| sinh_moment(n, s * r, log_w(r) + r.ln()))?;
    }
    if want >= Want::Hess {
        d2phi = integrate(&|r| cosh_moment2(n, s * r, log_w(r) + 2.0 * r.ln()))?;
        dphi_over_s = if n > 1 {
            integrate(&|r| sinh_moment_over_a(n, s * r, log_w(r) + 2.0 * r.ln()))?
        } else {
            0.0
        };
    }
    let mut h = Hyper::from_radial(xi, phi, dphi, d2phi, dphi_over_s);
    if !h.value.is_finite() {
        h = Hyper::infinite(n);
    }
    Ok(h)
}

fn measure_second_moment(m: &LevyMeasure, n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n * n];
    let iso = |out: &mut Vec<f64>, v: f64| {
        for i in 0..n {
            out[i * n + i] += v;
        }
    };
    match m {
        LevyMeasure::Atoms(atoms) => {
            for a in atoms {
                for i in 0..n {
                    for j in 0..n {
                        out[i * n + j] += a.mass * a.point[i] * a.point[j];
                    }
                }
            }
        }
        LevyMeasure::Radial(g) => {
            let h = |r: f64| g.eval(r) * r.powi(n as i32 + 1);
            let v = origin_shells(&h, g.radius, REL)?.value;
            iso(&mut out, sphere_area(n) / n as f64 * v);
        }
        LevyMeasure::TemperedTail { beta, core } => {
            let (lo, hi, _) = tempered_window(0.0, *beta, (n + 1) as f64);
            let h = |r: f64| (-r.powf(*beta)).exp() * r.powi(n as i32 + 1);
            let v = panels(&h, lo, hi, (hi - lo) / 64.0, REL)?.value;
            iso(&mut out, sphere_area(n) / n as f64 * v);
            if let Some(c) = core {
                out.iter_mut()
                    .zip(measure_second_moment(c, n)?)
                    .for_each(|(a, b)| *a += b);
            }
        }
        LevyMeasure::Composite(parts) => {
            for p in parts {
                out.iter_mut()
                    .zip(measure_second_moment(p, n)?)
                    .for_each(|(a, b)| *a += b);
            }
        }
    }
    Ok(out)
}

fn measure_gamma<U: Fn(&[f64]) -> f64>(m: &LevyMeasure, u: &U, x: &[f64]) -> Result<f64> {
    let ux = u(x);
    let shifted = |y: &[f64]| -> f64 {
        let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let d = u(&p) - ux;
        d * d
    };
    match m {
        LevyMeasure::Atoms(atoms) => Ok(0.5
            * atoms
                .iter()
                .map(|a| a.mass * shifted(&a.point))
                .sum::<f64>()),
        LevyMeasure::Radial(g) if x.len() == 1 => {
            let h = |r: f64| (shifted(&[r]) + shifted(&[-r])) * g.eval(r);
            Ok(0.5 * origin_shells(&h, g.radius, REL)?.value)
        }
        LevyMeasure::TemperedTail { beta, core } if x.len() == 1 => {
            let (lo, hi, _) = tempered_window(0.0, *beta, 0.0);
            let h = |r: f64| (shifted(&[r]) + shifted(&[-r])) * (-r.powf(*beta)).exp();
            let tail = 0.5 * panels(&h, lo, hi, (hi - lo) / 256.0, REL)?.value;
            let core = core.as_ref().map_or(Ok(0.0), |c| measure_gamma(c, u, x))?;
            Ok(tail + core)
        }
        LevyMeasure::Composite(parts) => parts.iter().map(|p| measure_gamma(p, u, x)).sum(),
        _ => Err(Error::unavailable(
            "carré du champ of density measures is implemented in one dimension",
        )),
    }
}

/// Exponential-moment and Hartman–Wintner flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModelFlags {
    pub has_exp_moments: bool,
    pub hartman_wintner_ok: bool,
}

/// Exponent-level view of a symmetric Lévy process.
#[derive(Clone, Debug)]
pub struct LevyModel {
    measure: Option<LevyMeasure>,
    closed_form: Option<ClosedForm>,
    dim: usize,
    second_moment: Option<Vec<f64>>,
    has_exp_moments: bool,
    hartman_wintner: OnceLock<bool>,
    label: String,
}

impl LevyModel {
    pub fn new(measure: LevyMeasure, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if measure.needs_radial_dim() && dim > MAX_DENSITY_DIM {
            return Err(Error::invalid(format!(
                "density measures are supported up to dimension {MAX_DENSITY_DIM}, got {dim}"
            )));
        }
        measure.validate(dim)?;
        let second_moment = Some(measure_second_moment(&measure, dim)?);
        Ok(LevyModel {
            has_exp_moments: measure.has_exp_moments(),
            measure: Some(measure),
            closed_form: None,
            dim,
            second_moment,
            hartman_wintner: OnceLock::new(),
            label: "levy".into(),
        })
    }

    /// Model given only by an analytic exponent.
    pub fn from_closed_form(cf: ClosedForm, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        cf.validate(dim)?;
        let second_moment = match cf {
            ClosedForm::Gaussian | ClosedForm::Stable { alpha: 2.0 } => Some(
                (0..dim * dim)
                    .map(|k| if k % (dim + 1) == 0 { 2.0 } else { 0.0 })
                    .collect(),
            ),
            ClosedForm::SemiStable { alpha } => Some(vec![2.0 / (1.0 - 2f64.powf(alpha - 2.0))]),
            ClosedForm::Stable { .. } => None,
        };
        let label = match cf {
            ClosedForm::Gaussian => "gaussian".to_string(),
            ClosedForm::Stable { alpha } => format!("stable({alpha})"),
            ClosedForm::SemiStable { alpha } => format!("semi_stable({alpha})"),
        };
        Ok(LevyModel {
            measure: None,
            closed_form: Some(cf),
            dim,
            second_moment,
            has_exp_moments: cf.has_exp_moments(),
            hartman_wintner: OnceLock::new(),
            label,
        })
    }

    /// Adds an analytic exponent that takes precedence over the measure.
    pub fn with_closed_form(mut self, cf: ClosedForm) -> Result<Self> {
        cf.validate(self.dim)?;
        self.has_exp_moments = cf.has_exp_moments();
        self.closed_form = Some(cf);
        self.hartman_wintner = OnceLock::new();
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn measure(&self) -> Option<&LevyMeasure> {
        self.measure.as_ref()
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.closed_form
    }

    /// `∫ y yᵀ ν(dy)`, row-major; `None` when infinite.
    pub fn second_moment_matrix(&self) -> Option<&[f64]> {
        self.second_moment.as_deref()
    }

    /// `½ λ_min(∫ y yᵀ ν(dy))`, the constant in `Λ(ξ) ≥ c|ξ|²`.
    pub fn quadratic_constant(&self) -> Option<f64> {
        self.second_moment
            .as_ref()
            .map(|m| 0.5 * symmetric_eigenvalues(m, self.dim)[0])
    }

    pub fn has_exp_moments(&self) -> bool {
        self.has_exp_moments
    }

    pub fn flags(&self) -> ModelFlags {
        ModelFlags {
            has_exp_moments: self.has_exp_moments,
            hartman_wintner_ok: *self
                .hartman_wintner
                .get_or_init(|| self.check_hartman_wintner(1.0).unwrap_or(false)),
        }
    }

    fn check_dim(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::invalid(format!(
                "expected a point in dimension {}, got {}",
                self.dim,
                xi.len()
            )));
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point has non-finite coordinates"));
        }
        Ok(())
    }

    pub fn psi(&self, xi: &[f64]) -> Result<f64> {
        self.check_dim(xi)?;
        if let Some(cf) = &self.closed_form {
            return Ok(cf.psi(xi));
        }
        measure_psi(
            self.measure
                .as_ref()
                .expect("model has a measure or a closed form"),
            xi,
        )
    }

    pub fn psi_1d(&self, xi: f64) -> Result<f64> {
        self.psi(&[xi])
    }

    fn hyper(&self, xi: &[f64], want: Want) -> Result<Hyper> {
        self.check_dim(xi)?;
        if !self.has_exp_moments {
            return Err(Error::unavailable(
                "the cumulant requires exponential moments of the Lévy measure",
            ));
        }
        match (&self.closed_form, &self.measure) {
            (Some(cf), _) => cf.hyper(xi, want),
            (None, Some(m)) => measure_hyper(m, xi, want),
            (None, None) => unreachable!("model has a measure or a closed form"),
        }
    }

    /// `Λ(ξ) = ∫ (cosh ξ·y - 1) ν(dy)`; `+∞` beyond the floating range.
    pub fn cumulant(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.hyper(xi, Want::Value)?.value)
    }

    pub fn cumulant_1d(&self, xi: f64) -> Result<f64> {
        self.cumulant(&[xi])
    }

    /// `(Λ, ∇Λ)` with `∇Λ(ξ) = ∫ y sinh(ξ·y) ν(dy)`.
    pub fn cumulant_grad(&self, xi: &[f64]) -> Result<(f64, Vec<f64>)> {
        let h = self.hyper(xi, Want::Grad)?;
        Ok((h.value, h.grad))
    }

    /// `(Λ, ∇Λ, ∇²Λ)` with `∇²Λ(ξ) = ∫ y yᵀ cosh(ξ·y) ν(dy)`, row-major.
    pub fn cumulant_hess(&self, xi: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let h = self.hyper(xi, Want::Hess)?;
        Ok((h.value, h.grad, h.hess))
    }

    /// Checks `ψ(ξ) / log(1 + |ξ|) > C` on `|ξ| = 2^k` over the upper half of
    /// the probed range, along a coordinate axis and the diagonal.
    pub fn check_hartman_wintner(&self, c: f64) -> Result<bool> {
        let cheap =
            self.closed_form.is_some() || matches!(self.measure, Some(LevyMeasure::Atoms(_)));
        let kmax: i32 = if cheap { 20 } else { 14 };
        let n = self.dim;
        let mut directions = vec![{
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        }];
        if n > 1 {
            directions.push(vec![1.0 / (n as f64).sqrt(); n]);
        }
        let mut running_min = f64::INFINITY;
        for k in (kmax / 2)..=kmax {
            let r = 2f64.powi(k);
            for d in &directions {
                let xi: Vec<f64> = d.iter().map(|v| v * r).collect();
                running_min = running_min.min(self.psi(&xi)? / r.ln_1p());
            }
        }
        Ok(running_min > c)
    }

    /// `Γ(u, u)(x) = ½ ∫ (u(x+y) - u(x))² ν(dy)`.
    pub fn gamma_op<U: Fn(&[f64]) -> f64>(&self, u: U, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        match &self.measure {
            Some(m) => measure_gamma(m, &u, x),
            None => Err(Error::unavailable(
                "the carré du champ needs a Lévy measure",
            )),
        }
    }

    /// Runs the structural checks on `ψ` and, when available, `Λ`.
    pub fn validate(&self) -> Result<ValidationReport> {
        let n = self.dim;
        let mut checks = Vec::new();
        let zero = vec![0.0; n];
        let psi0 = self.psi(&zero)?;
        checks.push(ValidationCheck::new(
            "psi_zero_at_origin",
            psi0 == 0.0,
            format!("psi(0) = {psi0:e}"),
        ));

        let radii: Vec<f64> = (-12..=12).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
        let mut dirs = vec![{
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        }];
        if n > 1 {
            dirs.push(
                (0..n)
                    .map(|i| if i % 2 == 0 { 0.6 } else { -0.8 } / ((n as f64 / 2.0).ceil()).sqrt())
                    .collect(),
            );
        }
        let mut c_psi = 0.0_f64;
        for d in &dirs {
            for k in 0..=20 {
                let xi: Vec<f64> = d.iter().map(|v| v * k as f64 / 20.0 / norm(d)).collect();
                c_psi = c_psi.max(self.psi(&xi)?);
            }
        }
        let (mut even_dev, mut min_psi, mut poly_excess) =
            (0.0_f64, f64::INFINITY, f64::NEG_INFINITY);
        for d in &dirs {
            for &r in &radii {
                let xi: Vec<f64> = d.iter().map(|v| v * r / norm(d)).collect();
                let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
                let (p, q) = (self.psi(&xi)?, self.psi(&neg)?);
                even_dev = even_dev.max((p - q).abs() / p.abs().max(1e-300));
                min_psi = min_psi.min(p);
                poly_excess = poly_excess.max(p / (c_psi * (1.0 + r * r)) - 1.0);
            }
        }
        checks.push(ValidationCheck::new(
            "psi_even",
            even_dev <= 1e-10,
            format!("max relative asymmetry {even_dev:e}"),
        ));
        checks.push(ValidationCheck::new(
            "psi_nonnegative",
            min_psi >= 0.0,
            format!("min psi {min_psi:e}"),
        ));
        checks.push(ValidationCheck::new(
            "psi_polynomial_bound",
            poly_excess <= 1e-9,
            format!("c_psi = {c_psi:e}, max psi / (c_psi (1 + |xi|^2)) - 1 = {poly_excess:e}"),
        ));

        if self.has_exp_moments {
            let c = self.quadratic_constant().unwrap_or(0.0);
            let mut lower_excess = f64::NEG_INFINITY;
            let mut convex_excess = f64::NEG_INFINITY;
            for d in &dirs {
                for &r in radii.iter().filter(|&&r| r <= 8.0) {
                    let xi: Vec<f64> = d.iter().map(|v| v * r / norm(d)).collect();
                    let lam = self.cumulant(&xi)?;
                    if lam.is_finite() {
                        lower_excess = lower_excess.max((c * r * r - lam) / lam.max(1e-300));
                    }
                    let a: Vec<f64> = xi.iter().map(|v| 0.5 * v).collect();
                    let b: Vec<f64> = xi.iter().map(|v| -0.25 * v).collect();
                    let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
                    let (la, lb, lm) = (self.cumulant(&a)?, self.cumulant(&b)?, self.cumulant(&m)?);
                    if la.is_finite() && lb.is_finite() {
                        convex_excess = convex_excess
                            .max((lm - 0.5 * (la + lb)) / (0.5 * (la + lb)).max(1e-300));
                    }
                }
            }
            checks.push(ValidationCheck::new(
                "cumulant_quadratic_lower_bound",
                lower_excess <= 1e-10,
                format!("c = {c:e}, max relative excess {lower_excess:e}"),
            ));
            checks.push(ValidationCheck::new(
                "cumulant_midpoint_convex",
                convex_excess <= 1e-10,
                format!("max relative excess {convex_excess:e}"),
            ));
        }
        let passed = checks.iter().all(|c| c.passed);
        Ok(ValidationReport { checks, passed })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl ValidationCheck {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        ValidationCheck {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
    pub passed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp1() -> LevyModel {
        LevyModel::new(LevyMeasure::symmetric_atoms(&[(1.0, 0.5)]), 1).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn unit_pair_exponents() {
        let m = cp1();
        assert_eq!(m.psi_1d(0.0).unwrap(), 0.0);
        assert!(rel(m.psi_1d(PI).unwrap(), 2.0) < 1e-15);
        assert!(rel(m.cumulant_1d(1.0).unwrap(), 0.543_080_634_815_243_8) < 1e-15);
        let (_, g, h) = m.cumulant_hess(&[0.0]).unwrap();
        assert_eq!((g[0], h[0]), (0.0, 1.0));
        let (_, _, h) = m.cumulant_hess(&[1.0]).unwrap();
        assert!(rel(h[0], 1.543_080_634_815_243_8) < 1e-15);
    }

    #[test]
    fn asymmetric_atoms_rejected() {
        let m = LevyMeasure::Atoms(vec![Atom {
            point: vec![1.0],
            mass: 1.0,
        }]);
        assert!(matches!(LevyModel::new(m, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn gamma_of_unit_pair() {
        let m = cp1();
        assert_eq!(m.gamma_op(|_: &[f64]| 3.0, &[0.2]).unwrap(), 0.0);
        assert!(rel(m.gamma_op(|x: &[f64]| x[0], &[0.7]).unwrap(), 0.5) < 1e-15);
        let g = m.gamma_op(|x: &[f64]| x[0].sin(), &[0.0]).unwrap();
        assert!(rel(g, 0.354_036_709_136_785_6) < 1e-14);
    }

    #[test]
    fn gamma_identity_for_exponentials() {
        // ½ Σ m (e^{ξy} - 1)(e^{-ξy} - 1) = -Λ(ξ)
        let m =
            LevyModel::new(LevyMeasure::symmetric_atoms(&[(0.5, 1.0), (1.25, 0.3)]), 1).unwrap();
        let xi = 0.8;
        let LevyMeasure::Atoms(atoms) = m.measure().unwrap() else {
            unreachable!()
        };
        let w: f64 = 0.5
            * atoms
                .iter()
                .map(|a| {
                    a.mass * ((xi * a.point[0]).exp() - 1.0) * ((-xi * a.point[0]).exp() - 1.0)
                })
                .sum::<f64>();
        assert!(rel(-w, m.cumulant_1d(xi).unwrap()) < 1e-14);
    }

    #[test]
    fn tempered_tail_cumulant_matches_closed_form() {
        // ∫_{|y|≥1} (cosh y - 1) e^{-y²} dy in closed form via erfc
        let m = LevyModel::new(LevyMeasure::tempered(2.0, None).unwrap(), 1).unwrap();
        assert!(rel(m.cumulant_1d(1.0).unwrap(), 0.305_406_013_831_337_1) < 1e-12);
    }

    #[test]
    fn semi_stable_closed_form_agrees_with_atoms() {
        let atoms = LevyModel::new(LevyMeasure::semi_stable(1.0).unwrap(), 1).unwrap();
        let series = LevyModel::from_closed_form(ClosedForm::SemiStable { alpha: 1.0 }, 1).unwrap();
        let frozen = 35.495_387_984_201_415;
        assert!(rel(atoms.psi_1d(8.0).unwrap(), frozen) < 1e-13);
        assert!(rel(series.psi_1d(8.0).unwrap(), frozen) < 1e-13);
        for &xi in &[0.3, 2.0, 5.0] {
            assert!(
                rel(
                    atoms.cumulant_1d(xi).unwrap(),
                    series.cumulant_1d(xi).unwrap()
                ) < 1e-13
            );
            let (_, ga, ha) = atoms.cumulant_hess(&[xi]).unwrap();
            let (_, gs, hs) = series.cumulant_hess(&[xi]).unwrap();
            assert!(rel(ga[0], gs[0]) < 1e-13 && rel(ha[0], hs[0]) < 1e-13);
        }
        let m2 = atoms.second_moment_matrix().unwrap()[0];
        assert!(rel(m2, 4.0) < 1e-15);
    }

    #[test]
    fn cumulant_overflow_is_infinite() {
        let m = cp1();
        assert_eq!(m.cumulant_1d(800.0).unwrap(), f64::INFINITY);
        let t = LevyModel::new(LevyMeasure::tempered(2.0, None).unwrap(), 1).unwrap();
        assert_eq!(t.cumulant_1d(200.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn exp_moment_classification() {
        assert!(LevyMeasure::symmetric_atoms(&[(1.0, 1.0)]).has_exp_moments());
        assert!(!LevyMeasure::tempered(0.5, None).unwrap().has_exp_moments());
        let core = LevyMeasure::symmetric_atoms(&[(0.5, 1.0)]);
        assert!(LevyMeasure::tempered(3.0, Some(core))
            .unwrap()
            .has_exp_moments());
        let heavy = LevyModel::new(LevyMeasure::tempered(0.5, None).unwrap(), 1).unwrap();
        assert!(matches!(
            heavy.cumulant_1d(1.0),
            Err(Error::FeatureUnavailable(_))
        ));
    }

    #[test]
    fn hartman_wintner_flags() {
        let stable = LevyModel::from_closed_form(ClosedForm::Stable { alpha: 1.5 }, 1).unwrap();
        assert!(stable.check_hartman_wintner(1e3).unwrap());
        assert!(!cp1().check_hartman_wintner(1.0).unwrap());
        let semi = LevyModel::new(LevyMeasure::semi_stable(1.0).unwrap(), 1).unwrap();
        assert!(semi.check_hartman_wintner(10.0).unwrap());
    }

    #[test]
    fn radial_density_matches_atoms_free_closed_form() {
        // g = 1 on [-1, 1]: ψ(ξ) = 2 (1 - sin ξ / ξ), Λ(ξ) = 2 (sinh ξ / ξ - 1)
        let g = RadialDensity::new(Arc::new(|_| 1.0), 1.0);
        let m = LevyModel::new(LevyMeasure::Radial(g), 1).unwrap();
        for &xi in &[0.1, 3.0, 40.0] {
            assert!(
                rel(m.psi_1d(xi).unwrap(), 2.0 * (1.0 - xi.sin() / xi)) < 1e-12,
                "xi={xi}"
            );
        }
        assert!(rel(m.cumulant_1d(2.0).unwrap(), 2.0 * (2f64.sinh() / 2.0 - 1.0)) < 1e-12);
        assert!(rel(m.second_moment_matrix().unwrap()[0], 2.0 / 3.0) < 1e-13);
    }

    #[test]
    fn uniform_ball_in_three_dimensions() {
        // g = 1 on the unit ball of R^3: ψ(ξ) = 4π ∫_0^1 (1 - sin(sr)/(sr)) r² dr
        let g = RadialDensity::new(Arc::new(|_| 1.0), 1.0);
        let m = LevyModel::new(LevyMeasure::Radial(g), 3).unwrap();
        let s: f64 = 2.0;
        let exact = 4.0 * PI * (1.0 / 3.0 - (s.sin() - s * s.cos()) / s.powi(3));
        assert!(rel(m.psi(&[1.2, 0.0, -1.6]).unwrap(), exact) < 1e-12);
        let mm = m.second_moment_matrix().unwrap();
        assert!(rel(mm[0], 4.0 * PI / 15.0) < 1e-13 && mm[1].abs() < 1e-15);
        let (_, _, h) = m.cumulant_hess(&[0.0, 0.0, 0.0]).unwrap();
        assert!(rel(h[4], 4.0 * PI / 15.0) < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let g = RadialDensity::new(Arc::new(|r: f64| r.powf(-2.5)), 1.0);
        let models = [
            LevyModel::new(LevyMeasure::Radial(g.clone()), 1).unwrap(),
            LevyModel::new(LevyMeasure::Radial(g), 2).unwrap(),
            LevyModel::new(
                LevyMeasure::tempered(2.0, Some(LevyMeasure::symmetric_atoms(&[(0.5, 1.0)])))
                    .unwrap(),
                1,
            )
            .unwrap(),
        ];
        for m in &models {
            let n = m.dim();
            let xi: Vec<f64> = (0..n).map(|i| 0.7 - 0.3 * i as f64).collect();
            let (_, grad, hess) = m.cumulant_hess(&xi).unwrap();
            for i in 0..n {
                let h = 1e-5;
                let mut p = xi.clone();
                let mut q = xi.clone();
                p[i] += h;
                q[i] -= h;
                let fd = (m.cumulant(&p).unwrap() - m.cumulant(&q).unwrap()) / (2.0 * h);
                assert!(rel(grad[i], fd) < 1e-6, "{} grad {i}", m.label());
                let (_, gp) = m.cumulant_grad(&p).unwrap();
                let (_, gq) = m.cumulant_grad(&q).unwrap();
                for j in 0..n {
                    let fd2 = (gp[j] - gq[j]) / (2.0 * h);
                    assert!(
                        (hess[i * n + j] - fd2).abs() < 1e-6 * hess[i * n + i].abs(),
                        "{} hess {i}{j}",
                        m.label()
                    );
                }
            }
        }
    }

    #[test]
    fn validation_passes_for_reference_models() {
        for m in [
            cp1(),
            LevyModel::new(LevyMeasure::semi_stable(1.0).unwrap(), 1).unwrap(),
            LevyModel::from_closed_form(ClosedForm::Gaussian, 2).unwrap(),
        ] {
            let r = m.validate().unwrap();
            assert!(r.passed, "{}: {:?}", m.label(), r.checks);
        }
    }
}
