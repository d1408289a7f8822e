//! Monte Carlo samples of `X_t` for one-dimensional models and their
//! comparison with Fourier-inverted densities.
//!
//! Jumps of size at least `ε` are drawn exactly (Poisson counts per atom,
//! compound Poisson for densities); smaller jumps are dropped or replaced by
//! a centred Gaussian of variance `t ∫_{|y|<ε} y² ν(dy)`.
//!
//! Samples are generated in chunks of 65536. Chunk `c` uses a ChaCha8
//! generator seeded from `seed` on stream `c`, so the output depends only on
//! the seed and not on the thread count.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::levy_model::{ClosedForm, LevyMeasure, LevyModel};
use crate::quadrature::{adaptive, origin_shells, to_infinity, Tolerance};

pub const CHUNK: usize = 65_536;
const TABLE_NODES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Compensation {
    None,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplePlan {
    pub t: f64,
    pub samples: usize,
    pub seed: u64,
    /// Jumps below this size are not drawn individually.
    pub epsilon: Option<f64>,
    pub compensation: Compensation,
}

impl SamplePlan {
    pub fn new(t: f64, samples: usize, seed: u64) -> Self {
        SamplePlan {
            t,
            samples,
            seed,
            epsilon: None,
            compensation: Compensation::Gaussian,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_compensation(mut self, compensation: Compensation) -> Self {
        self.compensation = compensation;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::invalid(format!(
                "time must be positive, got {}",
                self.t
            )));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::invalid(format!("ε must be positive, got {e}")));
            }
        }
        Ok(())
    }
}

/// Inverse CDF of jump sizes `|y|` on `[lo, hi]` for a radial profile,
/// tabulated on a geometric grid and interpolated linearly.
#[derive(Clone, Debug)]
struct SizeTable {
    radii: Vec<f64>,
    cdf: Vec<f64>,
}

impl SizeTable {
    fn sample(&self, u: f64) -> f64 {
        let k = self
            .cdf
            .partition_point(|&c| c < u)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.radii[k - 1] + w * (self.radii[k] - self.radii[k - 1])
    }
}

#[derive(Clone, Debug)]
enum Part {
    Atoms(Vec<(f64, Poisson<f64>)>),
    Radial {
        count: Poisson<f64>,
        sizes: SizeTable,
    },
    Tail {
        count: Poisson<f64>,
        beta: f64,
        proposal: Exp<f64>,
    },
}

impl Part {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Part::Atoms(list) => list.iter().map(|(y, p)| y * p.sample(rng)).sum(),
            Part::Radial { count, sizes } => {
                let k = count.sample(rng) as u64;
                (0..k)
                    .map(|_| {
                        let r = sizes.sample(rng.random::<f64>());
                        if rng.random::<bool>() {
                            r
                        } else {
                            -r
                        }
                    })
                    .sum()
            }
            Part::Tail {
                count,
                beta,
                proposal,
            } => {
                let k = count.sample(rng) as u64;
                let mut sum = 0.0;
                for _ in 0..k {
                    // e^{-r^β} ≤ e^{-1-β(r-1)} on r ≥ 1
                    let r = loop {
                        let r = 1.0 + proposal.sample(rng);
                        let log_accept = -(r.powf(*beta) - 1.0 - beta * (r - 1.0));
                        if rng.random::<f64>().ln() <= log_accept {
                            break r;
                        }
                    };
                    sum += if rng.random::<bool>() { r } else { -r };
                }
                sum
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Sampler {
    parts: Vec<Part>,
    gauss_sd: f64,
}

fn poisson(mean: f64) -> Result<Poisson<f64>> {
    Poisson::new(mean).map_err(|_| {
        Error::unavailable(format!(
            "jump intensity {mean:e} is too large for exact Poisson counts; raise ε"
        ))
    })
}

fn build(
    m: &LevyMeasure,
    t: f64,
    eps: Option<f64>,
    parts: &mut Vec<Part>,
    small_var: &mut f64,
) -> Result<()> {
    let cut = eps.unwrap_or(0.0);
    match m {
        LevyMeasure::Atoms(atoms) => {
            let mut list = Vec::new();
            for a in atoms {
                let y = a.point[0];
                if y.abs() < cut {
                    *small_var += t * a.mass * y * y;
                } else if a.mass > 0.0 {
                    list.push((y, poisson(t * a.mass)?));
                }
            }
            parts.push(Part::Atoms(list));
        }
        LevyMeasure::Radial(g) => {
            let radius = g.radius();
            let lo = cut.min(radius);
            if lo == 0.0 {
                let mass = origin_shells(&|r: f64| g.eval(r), radius, 1e-10).map_err(|_| {
                    Error::precondition("the radial density has infinite mass; set a truncation ε")
                })?;
                if !mass.value.is_finite() {
                    return Err(Error::precondition(
                        "the radial density has infinite mass; set a truncation ε",
                    ));
                }
            } else {
                let v = origin_shells(&|r: f64| r * r * g.eval(r), lo, 1e-12)?;
                *small_var += t * 2.0 * v.value;
            }
            if lo < radius {
                let start = if lo > 0.0 { lo } else { radius * 1e-12 };
                let ratio = (radius / start).powf(1.0 / (TABLE_NODES - 1) as f64);
                let radii: Vec<f64> = (0..TABLE_NODES)
                    .map(|k| {
                        if k + 1 == TABLE_NODES {
                            radius
                        } else {
                            start * ratio.powi(k as i32)
                        }
                    })
                    .collect();
                let mut cdf = vec![0.0; TABLE_NODES];
                if lo == 0.0 {
                    cdf[0] = origin_shells(&|r: f64| g.eval(r), start, 1e-10)?.value;
                }
                let tol = Tolerance::new(0.0, 1e-12);
                for k in 1..TABLE_NODES {
                    cdf[k] = cdf[k - 1]
                        + adaptive(&|r: f64| g.eval(r), radii[k - 1], radii[k], tol, 100)?.value;
                }
                let half_mass = cdf[TABLE_NODES - 1];
                let mut radii = radii;
                if lo == 0.0 {
                    radii.insert(0, 0.0);
                    cdf.insert(0, 0.0);
                }
                cdf.iter_mut().for_each(|c| *c /= half_mass);
                parts.push(Part::Radial {
                    count: poisson(t * 2.0 * half_mass)?,
                    sizes: SizeTable { radii, cdf },
                });
            }
        }
        LevyMeasure::TemperedTail { beta, core } => {
            let end = 40f64.powf(1.0 / beta).max(2.0);
            let half_mass =
                to_infinity(&|r: f64| (-r.powf(*beta)).exp(), 1.0, 0.25, 1.2, end, 1e-13)?.value;
            parts.push(Part::Tail {
                count: poisson(t * 2.0 * half_mass)?,
                beta: *beta,
                proposal: Exp::new(*beta).map_err(|e| Error::invalid(e.to_string()))?,
            });
            if let Some(c) = core {
                build(c, t, eps, parts, small_var)?;
            }
        }
        LevyMeasure::Composite(list) => {
            for p in list {
                build(p, t, eps, parts, small_var)?;
            }
        }
    }
    Ok(())
}

fn sampler(model: &LevyModel, plan: &SamplePlan) -> Result<Sampler> {
    if model.dim() != 1 {
        return Err(Error::unavailable(
            "sampling is implemented for one-dimensional models",
        ));
    }
    if let Some(m) = model.measure() {
        let mut parts = Vec::new();
        let mut small_var = 0.0;
        build(m, plan.t, plan.epsilon, &mut parts, &mut small_var)?;
        let gauss_sd = match plan.compensation {
            Compensation::Gaussian => small_var.sqrt(),
            Compensation::None => 0.0,
        };
        return Ok(Sampler { parts, gauss_sd });
    }
    match model.closed_form() {
        // ψ = |ξ|² is the law N(0, 2t)
        Some(ClosedForm::Gaussian) => Ok(Sampler {
            parts: Vec::new(),
            gauss_sd: (2.0 * plan.t).sqrt(),
        }),
        _ => Err(Error::unavailable(
            "sampling needs a Lévy measure or the Gaussian exponent",
        )),
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Draws `plan.samples` independent copies of `X_t`.
pub fn sample_increments(model: &LevyModel, plan: &SamplePlan) -> Result<Vec<f64>> {
    plan.validate()?;
    let s = sampler(model, plan)?;
    let mut out = vec![0.0; plan.samples];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut rng = chunk_rng(plan.seed, c);
            for v in chunk.iter_mut() {
                let jumps: f64 = s.parts.iter().map(|p| p.draw(&mut rng)).sum();
                let z: f64 = if s.gauss_sd > 0.0 {
                    rng.sample(StandardNormal)
                } else {
                    0.0
                };
                *v = jumps + s.gauss_sd * z;
            }
        });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McComparison {
    pub samples: usize,
    pub ks_distance: f64,
    /// `sup |histogram - density|` over bins with at least one grid cell.
    pub sup_density_gap: f64,
    pub bin_width: f64,
    /// Fraction of samples outside the density grid.
    pub outside: f64,
}

/// Kolmogorov–Smirnov distance to the CDF of `grid` and the largest gap
/// between a histogram and the density. Bins are `m` grid cells wide with
/// `m h ≥ 0.02`.
pub fn empirical_vs_fourier(samples: &[f64], grid: &DensityGrid) -> Result<McComparison> {
    if grid.dim != 1 {
        return Err(Error::unavailable("the comparison is one-dimensional"));
    }
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let refine = 4;
    let (x0, step, table) = grid.cdf_table(refine)?;
    let cdf = |x: f64| {
        let p = (x - x0) / step;
        if p <= 0.0 {
            return 0.0;
        }
        let k = p.floor() as usize;
        if k + 1 >= table.len() {
            return 1.0;
        }
        let w = p - k as f64;
        table[k] * (1.0 - w) + table[k + 1] * w
    };
    let n = xs.len() as f64;
    let ks = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .reduce(|| 0.0, f64::max);

    let h = grid.spacing;
    let m = ((0.02 / h).ceil() as usize).max(1);
    let width = m as f64 * h;
    let lo = grid.coord(0) - 0.5 * h;
    let bins = grid.nodes / m;
    let mut counts = vec![0usize; bins];
    let mut outside = 0usize;
    for &x in &xs {
        let b = ((x - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        } else {
            outside += 1;
        }
    }
    let mut gap = 0.0_f64;
    for (b, &c) in counts.iter().enumerate() {
        let mean: f64 = grid.values[b * m..(b + 1) * m].iter().sum::<f64>() / m as f64;
        gap = gap.max((c as f64 / (n * width) - mean).abs());
    }
    Ok(McComparison {
        samples: xs.len(),
        ks_distance: ks,
        sup_density_gap: gap,
        bin_width: width,
        outside: outside as f64 / n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSidecar {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub t: f64,
    pub model: String,
    pub epsilon: Option<f64>,
    pub compensation: Compensation,
}

/// Writes the samples as little-endian `f64` to `path` and the sidecar JSON
/// to `path` with `.json` appended.
pub fn write_samples(path: &Path, samples: &[f64], sidecar: &SampleSidecar) -> Result<()> {
    let bytes: Vec<u8> = samples.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_atomic(path, &bytes)?;
    let mut side = path.as_os_str().to_owned();
    side.push(".json");
    let json = serde_json::to_vec_pretty(sidecar).map_err(|e| Error::invalid(e.to_string()))?;
    write_atomic(Path::new(&side), &json)
}

pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::invalid("sample file length is not a multiple of 8"));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}
