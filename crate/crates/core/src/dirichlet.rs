//! The Dirichlet form `E(u, v)` of a one-dimensional Lévy model in its
//! spectral and difference representations, the carré du champ identity, and
//! empirical Nash constants.
//!
//! Fourier coefficients use `û(ξ) = (2π)^{-1} ∫ u(x) e^{-ixξ} dx`, so that
//! `E(u, u) = 2π ∫ ψ(ξ) |û(ξ)|² dξ = ½ ∫∫ (u(x+y) - u(x))² ν(dy) dx`.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::bernstein::BernsteinFn;
use crate::error::{Error, Result};
use crate::levy_model::{LevyMeasure, LevyModel};
use crate::quadrature::{adaptive, origin_shells, panels, to_infinity, Tolerance};

const DEFAULT_NODES: usize = 4096;
const REL: f64 = 1e-11;
/// Outer tolerance when a hat makes the lattice sum kinked in `y`.
const REL_KINKED: f64 = 1e-7;
/// Below this a Gaussian profile is treated as zero.
const GAUSS_CUT: f64 = 8.6;
const TAIL_WARN: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestKind {
    /// `exp(-(x-c)² / (2w²))`.
    Gaussian {
        center: f64,
        width: f64,
    },
    /// `exp(-1 / (1 - ((x-c)/r)²))` on `|x-c| < r`.
    Bump {
        center: f64,
        radius: f64,
    },
    /// `max(0, 1 - |x-c|/r)`.
    Hat {
        center: f64,
        radius: f64,
    },
    Scaled {
        factor: f64,
        inner: Box<TestKind>,
    },
    Product {
        left: Box<TestKind>,
        right: Box<TestKind>,
    },
}

impl TestKind {
    pub fn gaussian(center: f64, width: f64) -> Self {
        TestKind::Gaussian { center, width }
    }

    pub fn bump(center: f64, radius: f64) -> Self {
        TestKind::Bump { center, radius }
    }

    pub fn hat(center: f64, radius: f64) -> Self {
        TestKind::Hat { center, radius }
    }

    pub fn zero() -> Self {
        TestKind::Scaled {
            factor: 0.0,
            inner: Box::new(TestKind::gaussian(0.0, 1.0)),
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        TestKind::Scaled {
            factor,
            inner: Box::new(self),
        }
    }

    pub fn times(self, other: TestKind) -> Self {
        TestKind::Product {
            left: Box::new(self),
            right: Box::new(other),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            TestKind::Gaussian { center, width } => {
                center.is_finite() && *width > 0.0 && width.is_finite()
            }
            TestKind::Bump { center, radius } | TestKind::Hat { center, radius } => {
                center.is_finite() && *radius > 0.0 && radius.is_finite()
            }
            TestKind::Scaled { factor, inner } => {
                return if factor.is_finite() {
                    inner.validate()
                } else {
                    Err(Error::invalid("non-finite scale"))
                }
            }
            TestKind::Product { left, right } => {
                left.validate()?;
                return right.validate();
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "invalid test function {}",
                self.label()
            )))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestKind::Gaussian { center, width } => {
                let z = (x - center) / width;
                (-0.5 * z * z).exp()
            }
            TestKind::Bump { center, radius } => {
                let z = (x - center) / radius;
                let q = 1.0 - z * z;
                if q > 0.0 {
                    (-1.0 / q).exp()
                } else {
                    0.0
                }
            }
            TestKind::Hat { center, radius } => (1.0 - (x - center).abs() / radius).max(0.0),
            TestKind::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * inner.eval(x)
                }
            }
            TestKind::Product { left, right } => left.eval(x) * right.eval(x),
        }
    }

    /// Interval outside which the function vanishes (to double precision for
    /// Gaussians); `None` for the zero function.
    pub fn extent(&self) -> Option<(f64, f64)> {
        match self {
            TestKind::Gaussian { center, width } => {
                Some((center - GAUSS_CUT * width, center + GAUSS_CUT * width))
            }
            TestKind::Bump { center, radius } | TestKind::Hat { center, radius } => {
                Some((center - radius, center + radius))
            }
            TestKind::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    None
                } else {
                    inner.extent()
                }
            }
            TestKind::Product { left, right } => {
                let (a, b) = left.extent()?;
                let (c, d) = right.extent()?;
                let (lo, hi) = (a.max(c), b.min(d));
                (lo < hi).then_some((lo, hi))
            }
        }
    }

    fn is_smooth(&self) -> bool {
        match self {
            TestKind::Hat { .. } => false,
            TestKind::Scaled { inner, .. } => inner.is_smooth(),
            TestKind::Product { left, right } => left.is_smooth() && right.is_smooth(),
            _ => true,
        }
    }

    /// Identifier without commas, usable as a CSV field.
    pub fn label(&self) -> String {
        match self {
            TestKind::Gaussian { center, width } => format!("gaussian:{center}:{width}"),
            TestKind::Bump { center, radius } => format!("bump:{center}:{radius}"),
            TestKind::Hat { center, radius } => format!("hat:{center}:{radius}"),
            TestKind::Scaled { factor, inner } => format!("{factor}*{}", inner.label()),
            TestKind::Product { left, right } => format!("({})*({})", left.label(), right.label()),
        }
    }
}

/// A test function sampled at `x_j = (j - N/2) h`, `j = 0..N`, with its
/// Fourier coefficients at `ξ_k = 2πk / (Nh)`, `k` in FFT order.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub kind: TestKind,
    pub nodes: usize,
    pub spacing: f64,
    pub samples: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

impl TestFunction {
    pub fn new(kind: TestKind, nodes: usize, spacing: f64) -> Result<Self> {
        kind.validate()?;
        if nodes < 8 || !nodes.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "grid needs an even number of nodes ≥ 8, got {nodes}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        let half = (nodes / 2) as f64;
        let samples: Vec<f64> = (0..nodes)
            .map(|j| kind.eval((j as f64 - half) * spacing))
            .collect();
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(nodes).process(&mut buf);
        let scale = spacing / (2.0 * PI);
        let coeffs = buf
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                // x_0 = -(N/2) h contributes the phase (-1)^k
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                c * (sign * scale)
            })
            .collect();
        Ok(TestFunction {
            kind,
            nodes,
            spacing,
            samples,
            coeffs,
        })
    }

    /// `N = 4096` nodes on `[-L, L)` with `L = 1.25 (edge + margin)`, where
    /// `edge` bounds the support.
    pub fn on_default_grid(kind: TestKind, margin: f64) -> Result<Self> {
        let edge = kind.extent().map_or(1.0, |(a, b)| a.abs().max(b.abs()));
        let half_width = 1.25 * (edge + margin.max(0.0));
        Self::new(kind, DEFAULT_NODES, 2.0 * half_width / DEFAULT_NODES as f64)
    }

    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 - (self.nodes / 2) as f64) * self.spacing
    }

    /// Signed frequency of coefficient `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.nodes;
        let signed = if k < n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        };
        2.0 * PI * signed / (n as f64 * self.spacing)
    }

    fn trapezoid(&self, g: impl Fn(f64) -> f64) -> f64 {
        let n = self.samples.len();
        let inner: f64 = self.samples.iter().map(|&v| g(v)).sum();
        (inner - 0.5 * (g(self.samples[0]) + g(self.samples[n - 1]))) * self.spacing
    }

    pub fn l1(&self) -> f64 {
        self.trapezoid(f64::abs)
    }

    pub fn l2(&self) -> f64 {
        self.trapezoid(|v| v * v).sqrt()
    }

    /// Largest sample magnitude at the two ends of the grid relative to the
    /// largest overall.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.samples.len();
        self.samples[0].abs().max(self.samples[n - 1].abs()) / peak
    }

    /// `max_j |u_j - IFFT(FFT(u))_j|`.
    pub fn round_trip_error(&self) -> f64 {
        let n = self.nodes;
        let scale = 2.0 * PI / self.spacing;
        let mut buf: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                c * (sign * scale)
            })
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf.iter()
            .zip(&self.samples)
            .map(|(c, &v)| (c.re / n as f64 - v).abs())
            .fold(0.0, f64::max)
    }
}

/// A form value with its accuracy diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormEstimate {
    pub value: f64,
    /// Share of `ψ|û|²` carried by the outer quarter of the frequency range;
    /// zero for the difference form.
    pub tail_fraction: f64,
    pub warnings: Vec<String>,
}

/// `ψ` tabulated on the non-negative frequencies of one grid.
#[derive(Clone, Debug)]
pub struct SpectralForm {
    nodes: usize,
    spacing: f64,
    psi: Vec<f64>,
}

impl SpectralForm {
    pub fn new(model: &LevyModel, nodes: usize, spacing: f64) -> Result<Self> {
        require_1d(model)?;
        let step = 2.0 * PI / (nodes as f64 * spacing);
        let psi = (0..=nodes / 2)
            .into_par_iter()
            .map(|k| model.psi_1d(k as f64 * step))
            .collect::<Result<Vec<f64>>>()?;
        Ok(SpectralForm {
            nodes,
            spacing,
            psi,
        })
    }

    fn check_grid(&self, u: &TestFunction) -> Result<()> {
        if u.nodes != self.nodes || u.spacing != self.spacing {
            return Err(Error::invalid("test function lives on a different grid"));
        }
        Ok(())
    }

    fn psi_at(&self, k: usize) -> f64 {
        self.psi[k.min(self.nodes - k)]
    }

    /// `2π ∫ ψ(ξ) Re(û(ξ) conj(v̂(ξ))) dξ` by the rectangle rule on the grid
    /// frequencies.
    pub fn bilinear(&self, u: &TestFunction, v: &TestFunction) -> Result<FormEstimate> {
        self.check_grid(u)?;
        self.check_grid(v)?;
        let step = 2.0 * PI / (self.nodes as f64 * self.spacing);
        let cut = 0.75 * PI / self.spacing;
        let mut total = 0.0;
        let mut abs_total = 0.0;
        let mut tail = 0.0;
        for k in 0..self.nodes {
            let w = self.psi_at(k) * (u.coeffs[k] * v.coeffs[k].conj()).re;
            total += w;
            abs_total += w.abs();
            if u.frequency(k).abs() > cut {
                tail += w.abs();
            }
        }
        let tail_fraction = if abs_total > 0.0 {
            tail / abs_total
        } else {
            0.0
        };
        let mut warnings = Vec::new();
        if tail_fraction > TAIL_WARN {
            warnings.push(format!(
                "frequency grid does not resolve ψ|û|²: outer-band share {tail_fraction:.2e}"
            ));
        }
        let edge = u.edge_ratio().max(v.edge_ratio());
        if edge > 1e-12 {
            warnings.push(format!(
                "test function does not decay at the grid edge (ratio {edge:.2e})"
            ));
        }
        Ok(FormEstimate {
            value: 2.0 * PI * total * step,
            tail_fraction,
            warnings,
        })
    }

    pub fn eval(&self, u: &TestFunction) -> Result<FormEstimate> {
        let mut e = self.bilinear(u, u)?;
        e.value = e.value.max(0.0);
        Ok(e)
    }
}

/// `E(u, u)` from the spectral representation.
pub fn form_spectral(model: &LevyModel, u: &TestFunction) -> Result<FormEstimate> {
    if u.kind.extent().is_none() {
        return Ok(FormEstimate {
            value: 0.0,
            tail_fraction: 0.0,
            warnings: Vec::new(),
        });
    }
    SpectralForm::new(model, u.nodes, u.spacing)?.eval(u)
}

fn require_1d(model: &LevyModel) -> Result<()> {
    if model.dim() != 1 {
        return Err(Error::unavailable(
            "Dirichlet forms are evaluated for one-dimensional models",
        ));
    }
    Ok(())
}

/// `Σ_j (u(x_j + y) - u(x_j)) (v(x_j + y) - v(x_j)) h` over every lattice
/// point where a term can be non-zero.
fn shifted_product(u: &TestKind, v: &TestKind, y: f64, h: f64) -> f64 {
    let (Some((ua, ub)), Some((va, vb))) = (u.extent(), v.extent()) else {
        return 0.0;
    };
    let (lo, hi) = (ua.min(va), ub.max(vb));
    let (lo, hi) = (lo.min(lo - y), hi.max(hi - y));
    let j0 = (lo / h).floor() as i64 - 1;
    let j1 = (hi / h).ceil() as i64 + 1;
    let mut sum = 0.0;
    for j in j0..=j1 {
        let x = j as f64 * h;
        let du = u.eval(x + y) - u.eval(x);
        let dv = v.eval(x + y) - v.eval(x);
        sum += du * dv;
    }
    sum * h
}

/// `½ ∫ S(y) ν(dy)` where `S(y)` is even up to lattice effects.
/// With `kink = Some(h)` the sum has kinks about every `h` in `y`, and the
/// radial part is integrated in panels of width `h`.
fn integrate_against(
    m: &LevyMeasure,
    s: &(dyn Fn(f64) -> f64 + Sync),
    rel: f64,
    kink: Option<f64>,
) -> Result<f64> {
    match m {
        LevyMeasure::Atoms(atoms) => {
            Ok(0.5 * atoms.iter().map(|a| a.mass * s(a.point[0])).sum::<f64>())
        }
        LevyMeasure::Radial(g) => {
            let f = |r: f64| g.eval(r) * 0.5 * (s(r) + s(-r));
            if let Some(h) = kink.filter(|h| *h < g.radius()) {
                return Ok(
                    origin_shells(&f, h, rel)?.value + panels(&f, h, g.radius(), h, rel)?.value
                );
            }
            let r0 = g.radius().min(1.0);
            let mut total = origin_shells(&f, r0, rel)?.value;
            if g.radius() > r0 {
                total += adaptive(&f, r0, g.radius(), Tolerance::new(0.0, rel), 400)?.value;
            }
            Ok(total)
        }
        LevyMeasure::TemperedTail { beta, core } => {
            let f = |r: f64| (-r.powf(*beta)).exp() * 0.5 * (s(r) + s(-r));
            let end = 40f64.powf(1.0 / beta).max(2.0);
            let tail = to_infinity(&f, 1.0, 0.25, 1.2, end, rel)?.value;
            let core = core
                .as_ref()
                .map_or(Ok(0.0), |c| integrate_against(c, s, rel, kink))?;
            Ok(tail + core)
        }
        LevyMeasure::Composite(parts) => parts
            .iter()
            .map(|p| integrate_against(p, s, rel, kink))
            .sum(),
    }
}

/// `E(u, v) = ½ ∫∫ (u(x+y) - u(x)) (v(x+y) - v(x)) ν(dy) dx` with the inner
/// integral summed on the lattice `hZ` and the outer one taken over `ν`.
pub fn bilinear_difference(
    model: &LevyModel,
    u: &TestKind,
    v: &TestKind,
    spacing: f64,
) -> Result<f64> {
    require_1d(model)?;
    let measure = model
        .measure()
        .ok_or_else(|| Error::unavailable("the difference form needs a Lévy measure"))?;
    if u.extent().is_none() || v.extent().is_none() {
        return Ok(0.0);
    }
    let s = |y: f64| shifted_product(u, v, y, spacing);
    if u.is_smooth() && v.is_smooth() {
        integrate_against(measure, &s, REL, None)
    } else {
        integrate_against(measure, &s, REL_KINKED, Some(spacing))
    }
}

/// `E(u, u)` from the difference representation.
pub fn form_difference(model: &LevyModel, u: &TestFunction) -> Result<FormEstimate> {
    let value = bilinear_difference(model, &u.kind, &u.kind, u.spacing)?.max(0.0);
    let mut warnings = Vec::new();
    if let Some((a, b)) = u.kind.extent() {
        let half = u.spacing * (u.nodes / 2) as f64;
        if a < -half || b > half {
            warnings.push(format!(
                "support [{a}, {b}] leaks past the grid [-{half}, {half})"
            ));
        }
    }
    Ok(FormEstimate {
        value,
        tail_fraction: 0.0,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdcReport {
    /// `2E(fh, f) - E(h, f²)`.
    pub lhs: f64,
    /// `∫ h Γ(f, f) dx` with `Γ(f, f)(x) = ∫ (f(x+y) - f(x))² ν(dy)`.
    pub rhs: f64,
    pub residual: f64,
    /// `max(|E(fh, f)|, ∫ |h| Γ(f, f) dx)`.
    pub scale: f64,
}

/// Compares the two sides of the carré du champ identity. The form side is
/// summed over differences, the other side integrates `Γ(f, f)` pointwise
/// through [`LevyModel::gamma_op`].
pub fn cdc_identity_check(
    model: &LevyModel,
    f: &TestFunction,
    h: &TestFunction,
) -> Result<CdcReport> {
    require_1d(model)?;
    if f.spacing != h.spacing || f.nodes != h.nodes {
        return Err(Error::invalid("f and h must share a grid"));
    }
    let fh = f.kind.clone().times(h.kind.clone());
    let ff = f.kind.clone().times(f.kind.clone());
    let e1 = bilinear_difference(model, &fh, &f.kind, f.spacing)?;
    let e2 = bilinear_difference(model, &h.kind, &ff, f.spacing)?;
    let lhs = 2.0 * e1 - e2;
    let (rhs, abs_rhs) = match (f.kind.extent(), h.kind.extent()) {
        (Some(_), Some((a, b))) => {
            let j0 = (a / f.spacing).floor() as i64 - 1;
            let j1 = (b / f.spacing).ceil() as i64 + 1;
            let terms = (j0..=j1)
                .into_par_iter()
                .map(|j| {
                    let x = j as f64 * f.spacing;
                    let hv = h.kind.eval(x);
                    if hv == 0.0 {
                        return Ok((0.0, 0.0));
                    }
                    let g = 2.0 * model.gamma_op(|p: &[f64]| f.kind.eval(p[0]), &[x])?;
                    Ok((hv * g, hv.abs() * g))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let (s, sa) = terms
                .iter()
                .fold((0.0, 0.0), |acc, t| (acc.0 + t.0, acc.1 + t.1));
            (s * f.spacing, sa * f.spacing)
        }
        _ => (0.0, 0.0),
    };
    Ok(CdcReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        scale: e1.abs().max(abs_rhs),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NashRow {
    pub function_id: String,
    pub l1: f64,
    pub l2: f64,
    pub form: f64,
    pub lhs: f64,
    pub rhs0: f64,
    pub c0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NashReport {
    pub delta: f64,
    pub rows: Vec<NashRow>,
    pub worst_c0: f64,
    /// Some `u` had a vanishing right-hand side with a positive left-hand side.
    pub counterexample: bool,
    /// Members dropped because they vanish identically.
    pub excluded: usize,
    pub warnings: Vec<String>,
}

impl NashReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("function_id,L1,L2,form,lhs,rhs0,C0\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.function_id, r.l1, r.l2, r.form, r.lhs, r.rhs0, r.c0
            );
        }
        out
    }
}

/// Ratios `C0(u) = ‖u‖₂² f((‖u‖₂/‖u‖₁)⁴) / (E(u, u) + δ‖u‖₂²)` over a family.
///
/// Models with a Lévy measure use the difference form; closed-form models use
/// the spectral form on each function's grid.
pub fn nash_check(
    model: &LevyModel,
    f: &BernsteinFn,
    delta: f64,
    family: &[TestFunction],
) -> Result<NashReport> {
    require_1d(model)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!(
            "δ must be a finite non-negative number, got {delta}"
        )));
    }
    let exponent = 4.0 / model.dim() as f64;
    let mut spectral: HashMap<(usize, u64), SpectralForm> = HashMap::new();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut excluded = 0;
    let mut counterexample = false;
    for u in family {
        let l2 = u.l2();
        if u.kind.extent().is_none() || l2 == 0.0 {
            excluded += 1;
            continue;
        }
        let l1 = u.l1();
        let est = if model.measure().is_some() {
            form_difference(model, u)?
        } else {
            let key = (u.nodes, u.spacing.to_bits());
            let form = match spectral.entry(key) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(SpectralForm::new(model, u.nodes, u.spacing)?),
            };
            form.eval(u)?
        };
        warnings.extend(
            est.warnings
                .iter()
                .map(|w| format!("{}: {w}", u.kind.label())),
        );
        let lhs = l2 * l2 * f.eval((l2 / l1).powf(exponent))?;
        let rhs0 = est.value + delta * l2 * l2;
        if rhs0 == 0.0 && lhs > 0.0 {
            counterexample = true;
        }
        rows.push(NashRow {
            function_id: u.kind.label(),
            l1,
            l2,
            form: est.value,
            lhs,
            rhs0,
            c0: lhs / rhs0,
        });
    }
    let worst_c0 = rows.iter().map(|r| r.c0).fold(f64::NEG_INFINITY, f64::max);
    Ok(NashReport {
        delta,
        rows,
        worst_c0,
        counterexample,
        excluded,
        warnings,
    })
}

/// Twelve functions: Gaussians of width ¼ to 2, and bumps and hats of radius
/// ½ to 4, all centred at the origin.
pub fn default_family(margin: f64) -> Result<Vec<TestFunction>> {
    let mut kinds = Vec::new();
    for w in [0.25, 0.5, 1.0, 2.0] {
        kinds.push(TestKind::gaussian(0.0, w));
    }
    for r in [0.5, 1.0, 2.0, 4.0] {
        kinds.push(TestKind::bump(0.0, r));
    }
    for r in [0.5, 1.0, 2.0, 4.0] {
        kinds.push(TestKind::hat(0.0, r));
    }
    kinds
        .into_iter()
        .map(|k| TestFunction::on_default_grid(k, margin))
        .collect()
}

/// The Nash constant `8/γ` implied by an on-diagonal fit, and whether it
/// covers the measured worst ratio up to a factor of ten.
pub fn nash_consistency(worst_c0: f64, gamma: f64) -> (f64, bool) {
    let implied = 8.0 / gamma;
    (implied, worst_c0 <= 10.0 * implied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::ClosedForm;

    fn cp1() -> LevyModel {
        LevyModel::new(LevyMeasure::symmetric_atoms(&[(1.0, 0.5)]), 1).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn fourier_round_trip() {
        let u = TestFunction::on_default_grid(TestKind::bump(0.3, 2.0), 1.0).unwrap();
        assert!(u.round_trip_error() < 1e-12);
        // û(0) = ∫u / 2π
        let total: f64 = u.samples.iter().sum::<f64>() * u.spacing;
        assert!((u.coeffs[0].re - total / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_norms() {
        let u = TestFunction::on_default_grid(TestKind::gaussian(0.0, 1.0), 0.0).unwrap();
        assert!(rel(u.l1(), (2.0 * PI).sqrt()) < 1e-13);
        assert!(rel(u.l2(), PI.sqrt().sqrt()) < 1e-13);
    }

    #[test]
    fn classical_energy() {
        // ψ = ξ² gives ‖u'‖² = √π / 2 for exp(-x²/2)
        let g = LevyModel::from_closed_form(ClosedForm::Gaussian, 1).unwrap();
        let u = TestFunction::on_default_grid(TestKind::gaussian(0.0, 1.0), 0.0).unwrap();
        let e = form_spectral(&g, &u).unwrap();
        assert!(rel(e.value, PI.sqrt() / 2.0) < 1e-12, "{}", e.value);
        assert!(e.warnings.is_empty());
    }

    #[test]
    fn representations_agree_for_unit_pair() {
        let u = TestFunction::on_default_grid(TestKind::gaussian(0.0, 1.0), 1.0).unwrap();
        let s = form_spectral(&cp1(), &u).unwrap().value;
        let d = form_difference(&cp1(), &u).unwrap().value;
        // ½ Σ m (2‖u‖² - 2⟨u(·+1), u⟩) = √π (1 - e^{-1/4})
        let exact = PI.sqrt() * (1.0 - (-0.25f64).exp());
        assert!(rel(d, exact) < 1e-12, "{d} {exact}");
        assert!(rel(s, d) < 1e-10, "{s} {d}");
    }

    #[test]
    fn hat_against_direct_sum() {
        let u = TestFunction::on_default_grid(TestKind::hat(0.0, 2.0), 1.0).unwrap();
        let mut direct = 0.0;
        for j in -2000..2000 {
            let x = j as f64 * u.spacing;
            for y in [1.0, -1.0] {
                let d = u.kind.eval(x + y) - u.kind.eval(x);
                direct += 0.5 * 0.5 * d * d * u.spacing;
            }
        }
        let d = form_difference(&cp1(), &u).unwrap().value;
        assert!(rel(d, direct) < 1e-13);
        // ‖u‖² - ⟨u(·+1), u⟩ for the hat of radius 2
        assert!(rel(d, 4.0 / 3.0 - 23.0 / 24.0) < 1e-5);
    }

    #[test]
    fn zero_function() {
        let z = TestFunction::on_default_grid(TestKind::zero(), 0.0).unwrap();
        assert_eq!(form_spectral(&cp1(), &z).unwrap().value, 0.0);
        assert_eq!(form_difference(&cp1(), &z).unwrap().value, 0.0);
        let h = TestFunction::on_default_grid(TestKind::bump(0.0, 3.0), 0.0).unwrap();
        let zg = TestFunction::new(TestKind::zero(), h.nodes, h.spacing).unwrap();
        assert_eq!(cdc_identity_check(&cp1(), &zg, &h).unwrap().residual, 0.0);
    }

    #[test]
    fn carre_du_champ_identity() {
        let f = TestFunction::on_default_grid(TestKind::gaussian(0.0, 1.0), 1.0).unwrap();
        let h = TestFunction::new(TestKind::bump(0.0, 3.0), f.nodes, f.spacing).unwrap();
        let r = cdc_identity_check(&cp1(), &f, &h).unwrap();
        assert!(r.residual <= 1e-10 * r.scale, "{r:?}");
        assert!(r.scale > 0.1);
    }

    #[test]
    fn nash_ratio_is_dilation_invariant() {
        let alpha = 0.75;
        let m = LevyModel::from_closed_form(ClosedForm::Stable { alpha: 2.0 * alpha }, 1).unwrap();
        let f = BernsteinFn::power(alpha).unwrap();
        let fam: Vec<TestFunction> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&s| TestFunction::on_default_grid(TestKind::gaussian(0.0, s), 0.0).unwrap())
            .collect();
        let r = nash_check(&m, &f, 0.0, &fam).unwrap();
        let c = r.rows[0].c0;
        for row in &r.rows {
            assert!(rel(row.c0, c) < 1e-9, "{:?}", r.rows);
        }
        assert!(r
            .to_csv()
            .starts_with("function_id,L1,L2,form,lhs,rhs0,C0\ngaussian:0:0.5,"));
    }

    #[test]
    fn consistency_rule() {
        assert_eq!(nash_consistency(5.0, 2.0), (4.0, true));
        assert!(!nash_consistency(41.0, 2.0).1);
    }
}
