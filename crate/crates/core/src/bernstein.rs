//! Bernstein functions `f(x) = a + b x + ∫ (1 - e^{-x t}) μ(dt)` on `[0, ∞)`.
//!
//! Closed forms (`x^α`, `log(1 + x)`, `x / (1 + x)`) are evaluated and
//! inverted analytically. Triplets with a general representing measure go
//! through the adaptive quadrature in [`crate::quadrature`], split at `t = 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_finite, Error, Result};
use crate::levy_model::{LevyMeasure, LevyModel, RadialDensity};
use crate::quadrature::{origin_shells, to_infinity};
use crate::roots::newton_bisect;

const QUAD_REL: f64 = 1e-13;
/// Relative tolerance of the generic inverse.
pub const INVERSE_RTOL: f64 = 1e-12;

/// Density of a representing measure, `m(t)` on `(0, ∞)`.
#[derive(Clone)]
pub struct MeasureDensity(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl MeasureDensity {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        MeasureDensity(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

impl fmt::Debug for MeasureDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MeasureDensity(<fn>)")
    }
}

/// Representing measure of a Bernstein triplet. The density is assumed to be
/// `(1 ∧ t)`-integrable.
#[derive(Clone, Debug)]
pub enum RepresentingMeasure {
    Atoms(Vec<(f64, f64)>),
    Density(MeasureDensity),
}

#[derive(Clone, Debug)]
pub enum BernsteinKind {
    /// `x^α`, `0 < α ≤ 1`. `α = 1` is the pure linear term.
    Power {
        alpha: f64,
    },
    Log1p,
    /// `x / (1 + x)`.
    Ratio,
    Triplet {
        a: f64,
        b: f64,
        mu: RepresentingMeasure,
    },
    /// `μ(t) = ∫_0^t ∫_r^∞ g(s) s^{-2} ds dr` for a complete Bernstein `g`.
    Potential(Box<BernsteinFn>),
}

#[derive(Clone, Debug)]
pub struct BernsteinFn {
    kind: BernsteinKind,
    growth_index: Option<f64>,
}

/// One row of [`BernsteinFn::derivative_bound_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeBoundRow {
    pub x: f64,
    pub order: u32,
    pub derivative: f64,
    pub bound: f64,
    /// `|f^{(k)}(x)| - k! f(x) / x^k`; negative when the bound holds.
    pub excess: f64,
    /// Allowance for finite-difference and quadrature error.
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeBoundReport {
    pub rows: Vec<DerivativeBoundRow>,
    pub max_excess: f64,
}

impl DerivativeBoundReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.excess <= r.tolerance)
    }
}

impl BernsteinFn {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "power exponent must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self::from_kind(BernsteinKind::Power { alpha }))
    }

    pub fn log1p() -> Self {
        Self::from_kind(BernsteinKind::Log1p)
    }

    pub fn ratio() -> Self {
        Self::from_kind(BernsteinKind::Ratio)
    }

    pub fn triplet(a: f64, b: f64, mu: RepresentingMeasure) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite() && b >= 0.0 && b.is_finite()) {
            return Err(Error::invalid(
                "triplet coefficients a, b must be finite and nonnegative",
            ));
        }
        if let RepresentingMeasure::Atoms(atoms) = &mu {
            if atoms
                .iter()
                .any(|&(t, m)| !(t > 0.0 && t.is_finite() && m > 0.0 && m.is_finite()))
            {
                return Err(Error::invalid(
                    "atoms need positive finite locations and masses",
                ));
            }
        }
        Ok(Self::from_kind(BernsteinKind::Triplet { a, b, mu }))
    }

    fn from_kind(kind: BernsteinKind) -> Self {
        BernsteinFn {
            kind,
            growth_index: None,
        }
    }

    /// Attaches the exponent `κ` for which `f(t) t^{-κ}` is claimed to be
    /// increasing. Carried as metadata only.
    pub fn with_growth_index(mut self, kappa: f64) -> Self {
        self.growth_index = Some(kappa);
        self
    }

    pub fn growth_index(&self) -> Option<f64> {
        self.growth_index
    }

    pub fn kind(&self) -> &BernsteinKind {
        &self.kind
    }

    pub fn label(&self) -> String {
        match &self.kind {
            BernsteinKind::Power { alpha } => format!("power({alpha})"),
            BernsteinKind::Log1p => "log1p".into(),
            BernsteinKind::Ratio => "ratio".into(),
            BernsteinKind::Triplet { a, b, .. } => format!("triplet(a={a}, b={b})"),
            BernsteinKind::Potential(g) => format!("potential[{}]", g.label()),
        }
    }

    /// Constant term `f(0)`.
    pub fn a(&self) -> f64 {
        match &self.kind {
            BernsteinKind::Triplet { a, .. } => *a,
            _ => 0.0,
        }
    }

    /// Linear coefficient `lim f(x)/x`.
    pub fn b(&self) -> f64 {
        match &self.kind {
            BernsteinKind::Power { alpha } if *alpha == 1.0 => 1.0,
            BernsteinKind::Triplet { b, .. } => *b,
            _ => 0.0,
        }
    }

    /// Whether the representing measure has a completely monotone density.
    /// Custom densities are taken at face value.
    pub fn is_complete(&self) -> bool {
        match &self.kind {
            BernsteinKind::Triplet { mu, .. } => match mu {
                RepresentingMeasure::Atoms(atoms) => atoms.is_empty(),
                RepresentingMeasure::Density(_) => true,
            },
            _ => true,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        ensure_finite(x, "x")?;
        if x < 0.0 {
            return Err(Error::invalid(format!(
                "Bernstein functions live on [0, ∞), got x = {x}"
            )));
        }
        match &self.kind {
            BernsteinKind::Power { alpha } => Ok(x.powf(*alpha)),
            BernsteinKind::Log1p => Ok(x.ln_1p()),
            BernsteinKind::Ratio => Ok(x / (1.0 + x)),
            BernsteinKind::Triplet { a, b, mu } => {
                if x == 0.0 {
                    return Ok(*a);
                }
                let integral = match mu {
                    RepresentingMeasure::Atoms(atoms) => {
                        atoms.iter().map(|&(t, m)| -m * (-x * t).exp_m1()).sum()
                    }
                    RepresentingMeasure::Density(m) => {
                        split_integral(|t| -(-x * t).exp_m1() * m.eval(t), 1.0 / x)?
                    }
                };
                Ok(a + b * x + integral)
            }
            BernsteinKind::Potential(g) => potential_eval(g, x),
        }
    }

    /// Analytic first (`k = 1`) or second (`k = 2`) derivative at `x > 0`.
    pub fn derivative(&self, x: f64, k: u32) -> Result<f64> {
        ensure_finite(x, "x")?;
        if x <= 0.0 || !(1..=2).contains(&k) {
            return Err(Error::invalid(
                "derivatives are provided for x > 0 and k ∈ {1, 2}",
            ));
        }
        let first = k == 1;
        match &self.kind {
            BernsteinKind::Power { alpha } => Ok(if first {
                alpha * x.powf(alpha - 1.0)
            } else {
                alpha * (alpha - 1.0) * x.powf(alpha - 2.0)
            }),
            BernsteinKind::Log1p => Ok(if first {
                1.0 / (1.0 + x)
            } else {
                -1.0 / ((1.0 + x) * (1.0 + x))
            }),
            BernsteinKind::Ratio => Ok(if first {
                1.0 / ((1.0 + x) * (1.0 + x))
            } else {
                -2.0 / (1.0 + x).powi(3)
            }),
            BernsteinKind::Triplet { b, mu, .. } => {
                let p = if first { 1 } else { 2 };
                let integral = match mu {
                    RepresentingMeasure::Atoms(atoms) => atoms
                        .iter()
                        .map(|&(t, m)| m * t.powi(p) * (-x * t).exp())
                        .sum(),
                    RepresentingMeasure::Density(m) => {
                        split_integral(|t| t.powi(p) * (-x * t).exp() * m.eval(t), 1.0 / x)?
                    }
                };
                Ok(if first { b + integral } else { -integral })
            }
            BernsteinKind::Potential(g) => {
                if first {
                    inner_antiderivative(g, x)
                } else {
                    Ok(-g.eval(x)? / (x * x))
                }
            }
        }
    }

    /// `sup_{x ≥ 0} f(x)`, possibly infinite.
    pub fn sup(&self) -> Result<f64> {
        match &self.kind {
            BernsteinKind::Ratio => Ok(1.0),
            BernsteinKind::Triplet { a, b, mu } => {
                if *b > 0.0 {
                    return Ok(f64::INFINITY);
                }
                match mu {
                    RepresentingMeasure::Atoms(atoms) => {
                        Ok(a + atoms.iter().map(|&(_, m)| m).sum::<f64>())
                    }
                    RepresentingMeasure::Density(m) => match split_integral(|t| m.eval(t), 1.0) {
                        Ok(total) => Ok(a + total),
                        Err(Error::Divergence(_)) => Ok(f64::INFINITY),
                        Err(e) => Err(e),
                    },
                }
            }
            _ => Ok(f64::INFINITY),
        }
    }

    /// Solves `f(x) = y`.
    pub fn invert(&self, y: f64) -> Result<f64> {
        ensure_finite(y, "y")?;
        let lo = self.a();
        let hi = self.sup()?;
        if y < lo || y > hi {
            return Err(Error::OutOfRange { value: y, lo, hi });
        }
        if y == lo {
            return Ok(0.0);
        }
        match &self.kind {
            BernsteinKind::Power { alpha } => return Ok(y.powf(1.0 / alpha)),
            BernsteinKind::Log1p => return Ok(y.exp_m1()),
            BernsteinKind::Ratio => {
                return Ok(if y == 1.0 {
                    f64::INFINITY
                } else {
                    y / (1.0 - y)
                });
            }
            _ => {}
        }
        if y == hi {
            return Ok(f64::INFINITY);
        }
        self.invert_numeric(y)
    }

    fn invert_numeric(&self, y: f64) -> Result<f64> {
        let mut hi = 1.0;
        while self.eval(hi)? < y {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::OutOfRange {
                    value: y,
                    lo: self.a(),
                    hi: self.sup()?,
                });
            }
        }
        let mut lo = 0.5 * hi;
        while lo > 0.0 && self.eval(lo)? > y {
            hi = lo;
            lo *= 0.5;
        }
        let mut eval_err = None;
        let root = newton_bisect(
            |x| {
                let fx = self.eval(x).unwrap_or_else(|e| {
                    eval_err.get_or_insert(e);
                    f64::NAN
                });
                let dfx = if x > 0.0 {
                    self.derivative(x, 1).unwrap_or(0.0)
                } else {
                    0.0
                };
                (fx - y, dfx)
            },
            lo,
            hi,
            1e-15 * hi,
            200,
        );
        if let Some(e) = eval_err {
            return Err(e);
        }
        let x = root?;
        let residual = (self.eval(x)? - y).abs();
        if residual > INVERSE_RTOL * y.max(1.0) {
            return Err(Error::Numeric {
                what: format!("inverse of {}", self.label()),
                estimate: x,
                error_bound: residual,
            });
        }
        Ok(x)
    }

    /// Compares central finite-difference derivatives with `k! f(x) / x^k`.
    pub fn derivative_bound_check(&self, xs: &[f64]) -> Result<DerivativeBoundReport> {
        if xs.is_empty() || xs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::invalid(
                "derivative bound check needs a nonempty list of positive points",
            ));
        }
        let eps = f64::EPSILON;
        let mut rows = Vec::with_capacity(2 * xs.len());
        for &x in xs {
            let fx = self.eval(x)?;
            let h1 = x * eps.cbrt();
            let d1 = (self.eval(x + h1)? - self.eval(x - h1)?) / (2.0 * h1);
            let h2 = x * eps.powf(0.25);
            let d2 = (self.eval(x + h2)? - 2.0 * fx + self.eval(x - h2)?) / (h2 * h2);
            for (order, d, h) in [(1u32, d1, h1), (2, d2, h2)] {
                let bound = if order == 1 {
                    fx / x
                } else {
                    2.0 * fx / (x * x)
                };
                // roundoff of the difference quotient plus truncation
                let noise = (4.0 * eps + QUAD_REL) * fx.abs().max(1e-300) / h.powi(order as i32);
                let tolerance = noise + 1e-7 * bound;
                rows.push(DerivativeBoundRow {
                    x,
                    order,
                    derivative: d,
                    bound,
                    excess: d.abs() - bound,
                    tolerance,
                });
            }
        }
        let max_excess = rows
            .iter()
            .map(|r| r.excess)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(DerivativeBoundReport { rows, max_excess })
    }
}

/// `∫_0^∞ h(t) dt` split at `t = 1`, with an extra cut at `scale` so that the
/// origin leg resolves features at `t ~ scale`.
fn split_integral<H: Fn(f64) -> f64>(h: H, scale: f64) -> Result<f64> {
    let near = origin_shells(&h, 1.0, QUAD_REL)?;
    let min_end = (4.0 * scale).max(2.0);
    let far = to_infinity(&h, 1.0, 1.0, 2.0, min_end, QUAD_REL)?;
    Ok(near.value + far.value)
}

/// `G(r) = ∫_r^∞ g(s) s^{-2} ds`.
fn inner_antiderivative(g: &BernsteinFn, r: f64) -> Result<f64> {
    match &g.kind {
        BernsteinKind::Power { alpha } if *alpha < 1.0 => Ok(r.powf(alpha - 1.0) / (1.0 - alpha)),
        BernsteinKind::Log1p => Ok(r.ln_1p() / r + (1.0 / r).ln_1p()),
        BernsteinKind::Ratio => Ok((1.0 / r).ln_1p()),
        _ if g.b() > 0.0 => Err(Error::Divergence(
            "g(s)/s² is not integrable at ∞ when g has a linear term".into(),
        )),
        // Fubini: ∫_r^∞ (1 - e^{-su}) s^{-2} ds = (1 - e^{-ru})/r + u E1(ru)
        BernsteinKind::Triplet { a, mu, .. } => {
            let kernel = |u: f64| -(-r * u).exp_m1() / r + u * exp_integral_e1(r * u);
            let rest = match mu {
                RepresentingMeasure::Atoms(atoms) => {
                    atoms.iter().map(|&(u, m)| m * kernel(u)).sum()
                }
                RepresentingMeasure::Density(m) => {
                    split_integral(|u| kernel(u) * m.eval(u), 1.0 / r)?
                }
            };
            Ok(a / r + rest)
        }
        _ => {
            let h = |s: f64| g.eval(s).unwrap_or(f64::NAN) / (s * s);
            Ok(to_infinity(&h, r, r, 2.0, 4.0 * r, QUAD_REL)?.value)
        }
    }
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-s}/s ds` for `x > 0`.
fn exp_integral_e1(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut power = 1.0;
        for k in 1..60 {
            power *= -x / k as f64;
            let term = -power / k as f64;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        // modified Lentz evaluation of the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

fn potential_eval(g: &BernsteinFn, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let err = std::cell::RefCell::new(None);
    let h = |r: f64| {
        inner_antiderivative(g, r).unwrap_or_else(|e| {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        })
    };
    let out = origin_shells(&h, t, QUAD_REL);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(out?.value)
}

/// `μ(t) = ∫_0^t ∫_r^∞ g(s) s^{-2} ds dr`, itself a complete Bernstein
/// function.
pub fn mu_from_cbf(g: &BernsteinFn) -> Result<BernsteinFn> {
    if !g.is_complete() {
        return Err(Error::precondition(format!(
            "{} is not a complete Bernstein function (atomic representing measure)",
            g.label()
        )));
    }
    if g.b() > 0.0 {
        return Err(Error::Divergence(format!(
            "∫ g(s) s^-2 ds diverges at ∞ for {} (linear term)",
            g.label()
        )));
    }
    Ok(BernsteinFn::from_kind(BernsteinKind::Potential(Box::new(
        g.clone(),
    ))))
}

/// Lévy model with radial density `f(1/|y|²) / |y|^n` on the unit ball.
pub fn build_psi1(f: &BernsteinFn, dim: usize) -> Result<LevyModel> {
    if f.a() > 0.0 || f.b() > 0.0 {
        return Err(Error::precondition(format!(
            "{} must satisfy f(0) = 0 and have no linear term",
            f.label()
        )));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::invalid(format!(
            "radial models support dimensions 1 to 3, got {dim}"
        )));
    }
    let n = dim as i32;
    let profile: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match f.kind {
        BernsteinKind::Power { alpha } => {
            let p = -2.0 * alpha - dim as f64;
            Arc::new(move |r: f64| r.powf(p))
        }
        _ => {
            let f = f.clone();
            Arc::new(move |r: f64| f.eval(1.0 / (r * r)).unwrap_or(f64::NAN) / r.powi(n))
        }
    };
    let measure = LevyMeasure::Radial(RadialDensity::new(profile, 1.0));
    Ok(LevyModel::new(measure, dim)?.with_label(format!("psi1[{}; n={dim}]", f.label())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn unit_atom() -> BernsteinFn {
        BernsteinFn::triplet(0.0, 0.0, RepresentingMeasure::Atoms(vec![(1.0, 1.0)])).unwrap()
    }

    /// `x^α` written as a triplet: density `α / Γ(1-α) t^{-1-α}`.
    fn power_as_triplet(alpha: f64, gamma_one_minus_alpha: f64) -> BernsteinFn {
        let c = alpha / gamma_one_minus_alpha;
        BernsteinFn::triplet(
            0.0,
            0.0,
            RepresentingMeasure::Density(MeasureDensity::new(move |t| c * t.powf(-1.0 - alpha))),
        )
        .unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(BernsteinFn::power(0.5).unwrap().eval(4.0).unwrap(), 2.0);
        assert_eq!(BernsteinFn::ratio().eval(1.0).unwrap(), 0.5);
        assert!(rel(unit_atom().eval(1.0).unwrap(), 0.632_120_558_828_557_7) < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            BernsteinFn::log1p().eval(f64::NAN),
            Err(Error::InvalidInput(_))
        ));
        assert!(BernsteinFn::power(1.5).is_err());
    }

    #[test]
    fn triplet_density_matches_power() {
        // Γ(1/2) = √π
        let f = power_as_triplet(0.5, std::f64::consts::PI.sqrt());
        for &x in &[1e-3, 0.5, 4.0, 900.0] {
            assert!(rel(f.eval(x).unwrap(), x.sqrt()) < 1e-11, "x={x}");
            assert!(
                rel(f.derivative(x, 1).unwrap(), 0.5 / x.sqrt()) < 1e-10,
                "x={x}"
            );
        }
    }

    #[test]
    fn log1p_as_triplet() {
        // log(1+x) = ∫ (1 - e^{-xt}) e^{-t}/t dt
        let f = BernsteinFn::triplet(
            0.0,
            0.0,
            RepresentingMeasure::Density(MeasureDensity::new(|t: f64| (-t).exp() / t)),
        )
        .unwrap();
        assert!(rel(f.eval(3.0).unwrap(), 4f64.ln()) < 1e-12);
        assert!(rel(f.invert(1.0).unwrap(), std::f64::consts::E - 1.0) < 1e-11);
        assert!(f.sup().unwrap().is_infinite());
    }

    #[test]
    fn closed_form_inverses() {
        assert_eq!(BernsteinFn::power(0.5).unwrap().invert(3.0).unwrap(), 9.0);
        assert!(
            rel(
                BernsteinFn::log1p().invert(1.0).unwrap(),
                1.718_281_828_459_045
            ) < 1e-15
        );
        assert_eq!(BernsteinFn::ratio().invert(0.5).unwrap(), 1.0);
    }

    #[test]
    fn out_of_range_inverse_names_range() {
        match BernsteinFn::ratio().invert(1.5) {
            Err(Error::OutOfRange { lo, hi, .. }) => assert_eq!((lo, hi), (0.0, 1.0)),
            other => panic!("unexpected {other:?}"),
        }
        match unit_atom().invert(2.0) {
            Err(Error::OutOfRange { hi, .. }) => assert_eq!(hi, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn atom_inverse_round_trip() {
        let f = unit_atom();
        let x = f.invert(0.3).unwrap();
        assert!(rel(x, -(0.7f64).ln()) < 1e-12);
    }

    #[test]
    fn derivative_bounds_hold() {
        let r = BernsteinFn::power(0.5)
            .unwrap()
            .derivative_bound_check(&[1.0])
            .unwrap();
        assert!(r.passes());
        assert!(rel(r.rows[0].derivative, 0.5) < 1e-9);
        let r = BernsteinFn::log1p().derivative_bound_check(&[2.0]).unwrap();
        assert!(rel(r.rows[0].derivative, 1.0 / 3.0) < 1e-9);
        assert!(rel(r.rows[0].bound, 3f64.ln() / 2.0) < 1e-15);
        assert!(BernsteinFn::ratio()
            .derivative_bound_check(&[0.5, 1.0, 2.0, 4.0])
            .unwrap()
            .passes());
        assert!(BernsteinFn::power(1.0)
            .unwrap()
            .derivative_bound_check(&[0.3, 7.0])
            .unwrap()
            .passes());
    }

    #[test]
    fn potential_of_power() {
        for &alpha in &[0.25, 0.5, 0.75] {
            let mu = mu_from_cbf(&BernsteinFn::power(alpha).unwrap()).unwrap();
            assert_eq!(mu.eval(0.0).unwrap(), 0.0);
            let exact = 1.0 / (alpha * (1.0 - alpha));
            assert!(rel(mu.eval(1.0).unwrap(), exact) < 1e-11, "alpha={alpha}");
        }
        let mu = mu_from_cbf(&BernsteinFn::power(0.5).unwrap()).unwrap();
        assert!(rel(mu.eval(4.0).unwrap(), 8.0) < 1e-11);
        assert!(rel(mu.invert(8.0).unwrap(), 4.0) < 1e-10);
    }

    #[test]
    fn potential_of_ratio_by_nested_quadrature() {
        // μ(t) = ∫_0^t log(1 + 1/r) dr = t log(1 + 1/t) + log(1 + t)
        let g = BernsteinFn::triplet(
            0.0,
            0.0,
            RepresentingMeasure::Density(MeasureDensity::new(|t: f64| (-t).exp())),
        )
        .unwrap();
        let mu = mu_from_cbf(&g).unwrap();
        let t: f64 = 2.5;
        let exact = t * (1.0 / t).ln_1p() + t.ln_1p();
        assert!(rel(mu.eval(t).unwrap(), exact) < 1e-10);
        let closed = mu_from_cbf(&BernsteinFn::ratio()).unwrap();
        assert!(rel(closed.eval(t).unwrap(), exact) < 1e-12);
    }

    #[test]
    fn exponential_integral() {
        for &(x, e1) in &[
            (1e-3, 6.331_539_364_136_15),
            (0.1, 1.822_923_958_419_39),
            (1.0, 0.219_383_934_395_52),
            (2.5, 0.024_914_917_870_269_7),
            (5.0, 0.001_148_295_591_275_33),
            (30.0, 3.021_552_010_688_81e-15),
        ] {
            assert!(rel(exp_integral_e1(x), e1) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn potential_rejects_linear_and_atoms() {
        assert!(matches!(
            mu_from_cbf(&BernsteinFn::power(1.0).unwrap()),
            Err(Error::Divergence(_))
        ));
        assert!(matches!(
            mu_from_cbf(&unit_atom()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn psi1_preconditions() {
        assert!(matches!(
            build_psi1(&BernsteinFn::power(1.0).unwrap(), 1),
            Err(Error::Precondition(_))
        ));
        let shifted = BernsteinFn::triplet(1.0, 0.0, RepresentingMeasure::Atoms(vec![])).unwrap();
        assert!(matches!(
            build_psi1(&shifted, 1),
            Err(Error::Precondition(_))
        ));
        assert!(build_psi1(&BernsteinFn::power(0.5).unwrap(), 4).is_err());
    }

    #[test]
    fn psi1_matches_series() {
        // 2 Σ_k (-1)^{k+1} 10^{2k} / ((2k)! (2k - 1.5)), summed in 40-digit arithmetic.
        let m = build_psi1(&BernsteinFn::power(0.75).unwrap(), 1).unwrap();
        let v = m.psi_1d(10.0).unwrap();
        assert!((v / 104.419_462_887_464_32 - 1.0).abs() < 1e-9, "{v}");
    }
}
