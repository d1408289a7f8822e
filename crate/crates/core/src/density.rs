//! Transition densities `p_t(x) = (2π)^{-n} ∫ e^{iξ·x - tψ(ξ)} dξ` by FFT.
//!
//! The frequency cutoff `ξ_max` is the point beyond which `tψ > 40`
//! (`e^{-tψ} < 5e-18`); the spatial step is `π / ξ_max`. The node count grows
//! until the density at the grid edge is negligible relative to its peak.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::kernels::sphere_area;
use crate::levy_model::{LevyMeasure, LevyModel};
use crate::quadrature::{panels, to_infinity};

/// `tψ` level beyond which `e^{-tψ}` is treated as zero.
const EXPONENT_CUTOFF: f64 = 40.0;
/// Ringing below this is a hard failure.
pub const RINGING_FLOOR: f64 = -1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GridParams {
    /// Nodes per axis; `None` picks a dimension-dependent default.
    pub nodes: Option<usize>,
    /// Spatial step; `None` derives it from the frequency cutoff.
    pub spacing: Option<f64>,
    pub max_nodes: Option<usize>,
    /// Target for `max |p(edge)| / max p`.
    pub edge_tol: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            nodes: None,
            spacing: None,
            max_nodes: None,
            edge_tol: 1e-11,
        }
    }
}

impl GridParams {
    /// A fixed grid without automatic growth.
    pub fn fixed(nodes: usize, spacing: f64) -> Self {
        GridParams {
            nodes: Some(nodes),
            spacing: Some(spacing),
            max_nodes: Some(nodes),
            edge_tol: f64::INFINITY,
        }
    }

    fn defaults(&self, dim: usize) -> (usize, usize) {
        let (n0, nmax) = if dim == 1 {
            (1 << 14, 1 << 20)
        } else {
            (1 << 9, 1 << 11)
        };
        let n = self.nodes.unwrap_or(n0);
        (n, self.max_nodes.unwrap_or(nmax).max(n))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DensityDiagnostics {
    /// Trapezoid mass `h^n Σ p`.
    pub mass: f64,
    pub min_value: f64,
    /// Nodes in `(RINGING_FLOOR, 0)` set to zero.
    pub clamped: usize,
    /// `max e^{-tψ}` on the outermost frequency shell.
    pub frequency_tail: f64,
    pub edge_ratio: f64,
    pub symmetry_error: f64,
    pub expansions: usize,
    pub warnings: Vec<String>,
}

/// Density values on a centred uniform grid `x_j = (j - N/2) h`.
#[derive(Clone, Debug)]
pub struct DensityGrid {
    pub t: f64,
    pub dim: usize,
    pub nodes: usize,
    pub spacing: f64,
    pub values: Vec<f64>,
    pub diagnostics: DensityDiagnostics,
    pub model_label: String,
    /// `e^{-tψ(ξ_k)}` for `ξ_k = k dξ`: `k = 0..=N/2` in 1-D, the full
    /// centred `N × N` array in 2-D.
    spectrum: Vec<f64>,
}

impl DensityGrid {
    pub fn half_width(&self) -> f64 {
        0.5 * self.nodes as f64 * self.spacing
    }

    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / (self.nodes as f64 * self.spacing)
    }

    /// Coordinate of node `j` along one axis.
    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * self.nodes as f64) * self.spacing
    }

    /// Index of the node at the origin along one axis.
    pub fn center(&self) -> usize {
        self.nodes / 2
    }

    /// `p_t(0)`.
    pub fn at_origin(&self) -> f64 {
        let c = self.center();
        match self.dim {
            1 => self.values[c],
            _ => self.values[c * self.nodes + c],
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trigonometric interpolant through the grid, i.e. the truncated
    /// inversion integral evaluated at an arbitrary point.
    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::invalid("point dimension does not match the grid"));
        }
        let dxi = self.frequency_step();
        let n = self.nodes;
        match self.dim {
            1 => {
                let half = n / 2;
                let mut sum = self.spectrum[0];
                for k in 1..half {
                    sum += 2.0 * self.spectrum[k] * (k as f64 * dxi * x[0]).cos();
                }
                sum += self.spectrum[half] * (half as f64 * dxi * x[0]).cos();
                Ok(sum * dxi / (2.0 * PI))
            }
            _ => {
                let mut sum = 0.0;
                for a in 0..n {
                    let ka = a as f64 - 0.5 * n as f64;
                    for b in 0..n {
                        let kb = b as f64 - 0.5 * n as f64;
                        sum += self.spectrum[a * n + b] * (dxi * (ka * x[0] + kb * x[1])).cos();
                    }
                }
                Ok(sum * (dxi / (2.0 * PI)).powi(2))
            }
        }
    }

    /// Distribution function `P(X_t ≤ x)` of the interpolant on `[-L, L)`.
    pub fn cdf_at(&self, x: f64) -> Result<f64> {
        if self.dim != 1 {
            return Err(Error::unavailable(
                "distribution functions are one-dimensional",
            ));
        }
        let l = self.half_width();
        let dxi = self.frequency_step();
        let half = self.nodes / 2;
        let mut sum = self.spectrum[0] * (x + l);
        for k in 1..=half {
            let xi = k as f64 * dxi;
            let w = if k == half { 1.0 } else { 2.0 };
            sum += w * self.spectrum[k] * (xi * x).sin() / xi;
        }
        Ok(sum * dxi / (2.0 * PI))
    }

    /// Distribution function on a grid `refine` times finer than the density
    /// grid, returned as `(x_0, step, values)`.
    pub fn cdf_table(&self, refine: usize) -> Result<(f64, f64, Vec<f64>)> {
        if self.dim != 1 {
            return Err(Error::unavailable(
                "distribution functions are one-dimensional",
            ));
        }
        let refine = refine.max(1);
        let m = self.nodes * refine;
        let half = self.nodes / 2;
        let dxi = self.frequency_step();
        let l = self.half_width();
        let step = self.spacing / refine as f64;
        // Σ_k b_k sin(ξ_k x_j) with x_j = (j - m/2) step is the imaginary part
        // of an inverse DFT of b_k (-1)^k.
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for k in 1..=half {
            let w = if k == half { 1.0 } else { 2.0 };
            let b = w * self.spectrum[k] / (k as f64 * dxi);
            buf[k] = Complex64::new(if k % 2 == 0 { b } else { -b }, 0.0);
        }
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        let x0 = -l;
        let values = (0..m)
            .map(|j| {
                let x = x0 + j as f64 * step;
                (self.spectrum[0] * (x + l) + buf[j].im) * dxi / (2.0 * PI)
            })
            .collect();
        Ok((x0, step, values))
    }

    /// Writes `(x, p)` rows with `#`-prefixed metadata.
    pub fn write_csv(&self, path: &Path, header: &[String]) -> Result<()> {
        let mut out = Vec::new();
        for line in header {
            writeln!(out, "# {line}").map_err(io_err)?;
        }
        writeln!(out, "#t={:.16e}", self.t).map_err(io_err)?;
        writeln!(out, "#model={}", self.model_label).map_err(io_err)?;
        writeln!(out, "#mass={:.16e}", self.diagnostics.mass).map_err(io_err)?;
        if self.dim == 1 {
            writeln!(out, "x,p").map_err(io_err)?;
            for (j, p) in self.values.iter().enumerate() {
                writeln!(out, "{:.16e},{:.16e}", self.coord(j), p).map_err(io_err)?;
            }
        } else {
            writeln!(out, "x1,x2,p").map_err(io_err)?;
            for a in 0..self.nodes {
                for b in 0..self.nodes {
                    writeln!(
                        out,
                        "{:.16e},{:.16e},{:.16e}",
                        self.coord(a),
                        self.coord(b),
                        self.values[a * self.nodes + b]
                    )
                    .map_err(io_err)?;
                }
            }
        }
        crate::io::write_atomic(path, &out)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::invalid(format!("i/o failure: {e}"))
}

/// Total mass of the Lévy measure when finite (then the law of `X_t` has an
/// atom of size `e^{-t ν(R^n)}` at the origin).
fn finite_total_mass(model: &LevyModel) -> Option<f64> {
    fn mass(m: &LevyMeasure, n: usize) -> Option<f64> {
        match m {
            LevyMeasure::Atoms(atoms) => Some(atoms.iter().map(|a| a.mass).sum()),
            LevyMeasure::Composite(parts) => parts.iter().map(|p| mass(p, n)).sum(),
            // radial densities of interest are singular at the origin
            LevyMeasure::Radial(_) => None,
            LevyMeasure::TemperedTail { beta, core } => {
                let core = match core {
                    Some(c) => mass(c, n)?,
                    None => 0.0,
                };
                let f = |r: f64| r.powi(n as i32 - 1) * (-r.powf(*beta)).exp();
                let end = 40f64.powf(1.0 / beta).max(2.0);
                let tail = to_infinity(&f, 1.0, 0.25, 1.2, end, 1e-12).ok()?.value;
                Some(core + sphere_area(n) * tail)
            }
        }
    }
    if model.closed_form().is_some() {
        return None;
    }
    model.measure().and_then(|m| mass(m, model.dim()))
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!(
            "time must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

fn ensure_density_exists(model: &LevyModel, t: f64) -> Result<()> {
    if let Some(total) = finite_total_mass(model) {
        let atom = (-t * total).exp();
        if atom > 0.0 {
            return Err(Error::NoDensity(format!(
                "finite Lévy measure (total mass {total:e}): the law at t = {t} has an atom of mass {atom:e} at 0; \
                 Hartman–Wintner check fails"
            )));
        }
    }
    Ok(())
}

fn directions(dim: usize) -> Vec<Vec<f64>> {
    let mut e1 = vec![0.0; dim];
    e1[0] = 1.0;
    if dim == 1 {
        vec![e1]
    } else {
        vec![e1, vec![1.0 / (dim as f64).sqrt(); dim]]
    }
}

/// Smallest `ξ` (to within bisection) such that `tψ(mξe) ≥ 40` for the probe
/// multiples `m` and directions `e`.
pub fn frequency_cutoff(model: &LevyModel, t: f64) -> Result<f64> {
    check_time(t)?;
    let dirs = directions(model.dim());
    let beyond = |xi: f64| -> Result<bool> {
        for m in [1.0, 1.25, 1.5, 2.0, 3.0, 4.0] {
            for d in &dirs {
                let p: Vec<f64> = d.iter().map(|v| v * m * xi).collect();
                if t * model.psi(&p)? < EXPONENT_CUTOFF {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    let mut hi = 2f64.powi(-20);
    while !beyond(hi)? {
        hi *= 2.0;
        if hi > 2f64.powi(40) {
            return Err(Error::NoDensity(format!(
                "e^(-tψ) is not integrable at t = {t}: tψ stays below {EXPONENT_CUTOFF} up to |ξ| = 2^40 \
                 (Hartman–Wintner check fails)"
            )));
        }
    }
    let mut lo = 0.5 * hi;
    for _ in 0..6 {
        let mid = 0.5 * (lo + hi);
        if beyond(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `p_t` on a uniform grid.
pub fn density_grid(model: &LevyModel, t: f64, params: &GridParams) -> Result<DensityGrid> {
    check_time(t)?;
    ensure_density_exists(model, t)?;
    let dim = model.dim();
    if dim > 2 {
        return Err(Error::unavailable(
            "grid densities are implemented in dimensions 1 and 2",
        ));
    }
    let spacing = match params.spacing {
        Some(h) if h > 0.0 => h,
        Some(h) => {
            return Err(Error::invalid(format!(
                "grid spacing must be positive, got {h}"
            )))
        }
        None => PI / frequency_cutoff(model, t)?,
    };
    let (mut nodes, max_nodes) = params.defaults(dim);
    if nodes < 8 || nodes % 4 != 0 {
        return Err(Error::invalid(
            "node count must be a multiple of 4 and at least 8",
        ));
    }
    let mut expansions = 0;
    loop {
        let mut grid = if dim == 1 {
            grid_1d(model, t, nodes, spacing)?
        } else {
            grid_2d(model, t, nodes, spacing)?
        };
        if grid.diagnostics.edge_ratio <= params.edge_tol || 2 * nodes > max_nodes {
            grid.diagnostics.expansions = expansions;
            if grid.diagnostics.edge_ratio > params.edge_tol {
                grid.diagnostics.warnings.push(format!(
                    "edge ratio {:e} above target {:e} at the node cap {nodes}",
                    grid.diagnostics.edge_ratio, params.edge_tol
                ));
            }
            if !model.flags().hartman_wintner_ok {
                grid.diagnostics
                    .warnings
                    .push("Hartman–Wintner growth check failed; density may be irregular".into());
            }
            return Ok(grid);
        }
        nodes *= 2;
        expansions += 1;
    }
}

fn spectrum_values(model: &LevyModel, t: f64, points: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    points
        .into_par_iter()
        .map(|xi| model.psi(&xi).map(|p| (-t * p).exp()))
        .collect()
}

fn finish(values: &mut [f64], peak: f64) -> Result<(f64, usize)> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < RINGING_FLOOR {
        return Err(Error::Numeric {
            what: "Fourier inversion (negative ringing)".into(),
            estimate: min,
            error_bound: peak,
        });
    }
    let mut clamped = 0;
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clamped += 1;
        }
    }
    Ok((min, clamped))
}

fn grid_1d(model: &LevyModel, t: f64, nodes: usize, spacing: f64) -> Result<DensityGrid> {
    let dxi = 2.0 * PI / (nodes as f64 * spacing);
    let half = nodes / 2;
    let spectrum = spectrum_values(model, t, (0..=half).map(|k| vec![k as f64 * dxi]).collect())?;
    let mut buf: Vec<Complex64> = (0..nodes)
        .map(|k| {
            let kk = k as isize - half as isize;
            let v = spectrum[kk.unsigned_abs()];
            Complex64::new(if k % 2 == 0 { v } else { -v }, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(nodes).process(&mut buf);
    let scale = dxi / (2.0 * PI);
    let mut values: Vec<f64> = buf
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if j % 2 == 0 {
                c.re * scale
            } else {
                -c.re * scale
            }
        })
        .collect();
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let edge_ratio = values[0]
        .abs()
        .max(values[1].abs())
        .max(values[nodes - 1].abs())
        / peak;
    let symmetry_error = (1..nodes)
        .map(|j| (values[j] - values[nodes - j]).abs())
        .fold(0.0, f64::max)
        / peak;
    let (min_value, clamped) = finish(&mut values, peak)?;
    let mass = values.iter().sum::<f64>() * spacing;
    Ok(DensityGrid {
        t,
        dim: 1,
        nodes,
        spacing,
        diagnostics: DensityDiagnostics {
            mass,
            min_value,
            clamped,
            frequency_tail: spectrum[half],
            edge_ratio,
            symmetry_error,
            expansions: 0,
            warnings: Vec::new(),
        },
        values,
        model_label: model.label().to_string(),
        spectrum,
    })
}

fn grid_2d(model: &LevyModel, t: f64, nodes: usize, spacing: f64) -> Result<DensityGrid> {
    let n = nodes;
    let dxi = 2.0 * PI / (n as f64 * spacing);
    let half = n as f64 / 2.0;
    let points: Vec<Vec<f64>> = (0..n * n)
        .map(|idx| {
            vec![(idx / n) as f64 - half, (idx % n) as f64 - half]
                .into_iter()
                .map(|k| k * dxi)
                .collect()
        })
        .collect();
    let spectrum = spectrum_values(model, t, points)?;
    let mut buf: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            let parity = (idx / n + idx % n) % 2;
            Complex64::new(if parity == 0 { v } else { -v }, 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    buf.par_chunks_mut(n).for_each(|row| fft.process(row));
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for b in 0..n {
        for a in 0..n {
            col[a] = buf[a * n + b];
        }
        fft.process(&mut col);
        for a in 0..n {
            buf[a * n + b] = col[a];
        }
    }
    let scale = (dxi / (2.0 * PI)).powi(2);
    let mut values: Vec<f64> = buf
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let parity = (idx / n + idx % n) % 2;
            if parity == 0 {
                c.re * scale
            } else {
                -c.re * scale
            }
        })
        .collect();
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut edge = 0.0_f64;
    for k in 0..n {
        edge = edge
            .max(values[k].abs())
            .max(values[k * n].abs())
            .max(values[(n - 1) * n + k].abs());
    }
    let mut symmetry = 0.0_f64;
    for a in 1..n {
        for b in 1..n {
            symmetry = symmetry.max((values[a * n + b] - values[(n - a) * n + (n - b)]).abs());
        }
    }
    let (min_value, clamped) = finish(&mut values, peak)?;
    let mass = values.iter().sum::<f64>() * spacing * spacing;
    let tail = (0..n).map(|k| spectrum[k]).fold(0.0, f64::max);
    Ok(DensityGrid {
        t,
        dim: 2,
        nodes,
        spacing,
        diagnostics: DensityDiagnostics {
            mass,
            min_value,
            clamped,
            frequency_tail: tail,
            edge_ratio: edge / peak,
            symmetry_error: symmetry / peak,
            expansions: 0,
            warnings: Vec::new(),
        },
        values,
        model_label: model.label().to_string(),
        spectrum,
    })
}

/// Pointwise `p_t(x) = π^{-1} ∫_0^∞ e^{-tψ(ξ)} cos(ξx) dξ` in one dimension,
/// integrated on panels keyed to the period of `cos(ξx)`.
pub fn density_at(model: &LevyModel, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    if model.dim() != 1 {
        return Err(Error::unavailable("pointwise inversion is one-dimensional"));
    }
    ensure_density_exists(model, t)?;
    let cut = frequency_cutoff(model, t)?;
    let err = std::cell::RefCell::new(None);
    let f = |xi: f64| match model.psi_1d(xi) {
        Ok(p) => (-t * p).exp() * (xi * x).cos(),
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let width = if x == 0.0 {
        cut / 64.0
    } else {
        (PI / x.abs()).min(cut / 64.0)
    };
    let v = panels(&f, 0.0, cut, width, 1e-12);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(v?.value / PI)
}

/// `sup |p_{t+s} - p_t * p_s|` on the central half of a common grid, with the
/// convolution taken without wrap-around.
pub fn semigroup_check(model: &LevyModel, t: f64, s: f64, params: &GridParams) -> Result<f64> {
    if model.dim() != 1 {
        return Err(Error::unavailable("semigroup check is one-dimensional"));
    }
    let base = density_grid(model, t.min(s), params)?;
    let common = GridParams::fixed(base.nodes, base.spacing);
    let pt = density_grid(model, t, &common)?;
    let ps = density_grid(model, s, &common)?;
    let pts = density_grid(model, t + s, &common)?;
    let n = base.nodes;
    let m = 2 * n;
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(m);
    let inverse = planner.plan_fft_inverse(m);
    let pad = |v: &[f64]| -> Vec<Complex64> {
        let mut b: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        b.resize(m, Complex64::new(0.0, 0.0));
        b
    };
    let mut a = pad(&pt.values);
    let mut b = pad(&ps.values);
    forward.process(&mut a);
    forward.process(&mut b);
    let mut c: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    inverse.process(&mut c);
    let h = base.spacing;
    // full linear convolution index i + j corresponds to node (i + j) - N/2
    let quarter = n / 4;
    let mut worst = 0.0_f64;
    for j in quarter..(n - quarter) {
        let conv = c[j + n / 2].re * h / m as f64;
        worst = worst.max((conv - pts.values[j]).abs());
    }
    Ok(worst)
}
