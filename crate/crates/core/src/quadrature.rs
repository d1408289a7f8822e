//! Adaptive quadrature used throughout the crate.
//!
//! The building block is the 15-point Gauss-Kronrod rule with the QUADPACK
//! error heuristic. On top of it sit three drivers tailored to the integrals
//! that show up for Lévy measures:
//!
//! * [`adaptive`] for smooth integrands on a finite interval,
//! * [`origin_shells`] for integrands with an integrable power-type
//!   singularity at the left endpoint `0` (Lévy densities near the origin),
//! * [`to_infinity`] for decaying integrands on `[a, ∞)`.
//!
//! The last two sum contributions of geometrically shrinking (or growing)
//! pieces and extrapolate the remainder once the ratio of consecutive
//! contributions has settled.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Requested accuracy: a panel is accepted once its error estimate is below
/// `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn bound(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(0.0, 1e-13)
    }
}

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            evals: self.evals + rhs.evals,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    roundoff_floor: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    Panel {
        a,
        b,
        value,
        error,
        roundoff_floor: 50.0 * f64::EPSILON * res_abs,
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error until the summed error meets
/// `tol`, or fails after `limit` subdivisions.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: Tolerance,
    limit: usize,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::default());
    }
    let first = gk15(f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Numeric {
            what: format!("quadrature on [{a}, {b}]"),
            estimate: first.value,
            error_bound: f64::INFINITY,
        });
    }
    let mut panels = vec![first];
    let mut evals = 15;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let floor: f64 = panels.iter().map(|p| p.roundoff_floor).sum();
        if error <= tol.bound(value) || error <= floor {
            return Ok(Estimate {
                value,
                error,
                evals,
            });
        }
        if panels.len() > limit {
            return Err(Error::Numeric {
                what: format!("adaptive quadrature on [{a}, {b}]"),
                estimate: value,
                error_bound: error,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.error > p.roundoff_floor)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .unwrap_or((0, &panels[0]));
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval exhausted at machine resolution
            panels.push(Panel { error: 0.0, ..p });
            continue;
        }
        let left = gk15(f, p.a, mid);
        let right = gk15(f, mid, p.b);
        evals += 30;
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::Numeric {
                what: format!("quadrature on [{}, {}]", p.a, p.b),
                estimate: f64::NAN,
                error_bound: f64::INFINITY,
            });
        }
        panels.push(left);
        panels.push(right);
    }
}

/// Sums a sequence of contributions that eventually decay geometrically,
/// extrapolating the remainder once consecutive ratios stabilise.
#[derive(Debug, Default)]
pub(crate) struct GeometricTail {
    pub sum: f64,
    pub error: f64,
    prev: Option<f64>,
    prev_ratio: Option<f64>,
    small_streak: usize,
    growth_streak: usize,
}

pub(crate) enum TailStatus {
    Continue,
    Done,
    Divergent,
}

impl GeometricTail {
    pub fn push(&mut self, c: Estimate, rel: f64) -> TailStatus {
        self.sum += c.value;
        self.error += c.error;
        let scale = self.sum.abs();
        if c.value.abs() <= rel * scale || (scale == 0.0 && c.value == 0.0) {
            self.small_streak += 1;
        } else {
            self.small_streak = 0;
        }
        if self.small_streak >= 2 {
            return TailStatus::Done;
        }
        let status = match self.prev {
            Some(prev) if prev != 0.0 => {
                let q = c.value / prev;
                let out = match self.prev_ratio {
                    Some(pq) if q > 0.0 && q < 1.0 && (q - pq).abs() <= 1e-6 * q => {
                        let tail = c.value * q / (1.0 - q);
                        let tail_err = (c.value * (q - pq).abs() / ((1.0 - q) * (1.0 - q))).abs();
                        if tail_err <= rel * (self.sum + tail).abs() {
                            self.sum += tail;
                            self.error += tail_err;
                            TailStatus::Done
                        } else {
                            TailStatus::Continue
                        }
                    }
                    _ => TailStatus::Continue,
                };
                // non-decaying contributions with a settled ratio
                match self.prev_ratio {
                    Some(pq)
                        if q >= 1.0
                            && (q - pq).abs() <= 1e-3 * q
                            && c.value.abs() > rel * scale =>
                    {
                        self.growth_streak += 1
                    }
                    _ => self.growth_streak = 0,
                }
                let out = if self.growth_streak >= 6 {
                    TailStatus::Divergent
                } else {
                    out
                };
                self.prev_ratio = Some(q);
                out
            }
            _ => TailStatus::Continue,
        };
        self.prev = Some(c.value);
        status
    }
}

/// Integrates `f` over `(0, a]` where `f` may carry an integrable power-type
/// singularity at the origin. The interval is cut into dyadic shells
/// `[a 2^{-k-1}, a 2^{-k}]`.
pub fn origin_shells<F: Fn(f64) -> f64>(f: &F, a: f64, rel: f64) -> Result<Estimate> {
    let mut acc = GeometricTail::default();
    let mut evals = 0;
    let mut hi = a;
    let shell_tol = Tolerance::new(0.0, rel * 0.1);
    for _ in 0..4000 {
        let lo = 0.5 * hi;
        if lo == 0.0 {
            break;
        }
        let c = adaptive(f, lo, hi, shell_tol, 200)?;
        evals += c.evals;
        match acc.push(c, rel) {
            TailStatus::Done => {
                return Ok(Estimate {
                    value: acc.sum,
                    error: acc.error,
                    evals,
                })
            }
            TailStatus::Divergent => {
                return Err(Error::Divergence(format!(
                    "integrand is not integrable at the origin (partial sum {:e})",
                    acc.sum
                )))
            }
            TailStatus::Continue => {}
        }
        hi = lo;
    }
    Err(Error::Numeric {
        what: "origin-singular quadrature".into(),
        estimate: acc.sum,
        error_bound: acc.error,
    })
}

/// Integrates a decaying `f` over `[a, ∞)` by marching panels of width
/// `width * growth^k`. Termination is only tested beyond `min_end`, which
/// should sit past the bulk of the integrand.
pub fn to_infinity<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    width: f64,
    growth: f64,
    min_end: f64,
    rel: f64,
) -> Result<Estimate> {
    let mut acc = GeometricTail::default();
    let mut evals = 0;
    let mut lo = a;
    let mut w = width;
    let tol = Tolerance::new(0.0, rel * 0.1);
    for _ in 0..5000 {
        let hi = lo + w;
        let c = adaptive(f, lo, hi, tol, 200)?;
        evals += c.evals;
        if hi < min_end {
            acc.sum += c.value;
            acc.error += c.error;
        } else {
            match acc.push(c, rel) {
                TailStatus::Done => {
                    return Ok(Estimate {
                        value: acc.sum,
                        error: acc.error,
                        evals,
                    })
                }
                TailStatus::Divergent => {
                    return Err(Error::Divergence(format!(
                        "integrand does not decay on [{a}, ∞) (partial sum {:e})",
                        acc.sum
                    )))
                }
                TailStatus::Continue => {}
            }
        }
        lo = hi;
        w *= growth;
        if !lo.is_finite() {
            break;
        }
    }
    Err(Error::Numeric {
        what: format!("quadrature on [{a}, ∞)"),
        estimate: acc.sum,
        error_bound: acc.error,
    })
}

/// Integrates over `[a, b]` cut into panels of roughly `width`, each handled
/// adaptively. Used for oscillatory integrands with `width` tied to the
/// period.
pub fn panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, width: f64, rel: f64) -> Result<Estimate> {
    if b <= a {
        return Ok(Estimate::default());
    }
    let count = ((b - a) / width).ceil().clamp(1.0, 1e7) as usize;
    let step = (b - a) / count as f64;
    let mut total = Estimate::default();
    let mut scale = 0.0_f64;
    for i in 0..count {
        let lo = a + step * i as f64;
        let hi = if i + 1 == count { b } else { lo + step };
        let first = gk15(f, lo, hi);
        scale = scale.max(first.value.abs()).max(total.value.abs());
        let tol = Tolerance::new(rel * 1e-2 * scale, rel * 1e-2);
        let est = if first.error <= tol.bound(first.value) || first.error <= first.roundoff_floor {
            Estimate {
                value: first.value,
                error: first.error,
                evals: 15,
            }
        } else {
            adaptive(f, lo, hi, tol, 200)?
        };
        total = total + est;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let est = adaptive(
            &|x: f64| x.powi(5) - 2.0 * x,
            0.0,
            2.0,
            Tolerance::default(),
            50,
        )
        .unwrap();
        assert!((est.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_panels() {
        let est = panels(
            &|x: f64| (50.0 * x).cos(),
            0.0,
            3.0,
            std::f64::consts::PI / 50.0,
            1e-13,
        )
        .unwrap();
        assert!((est.value - (150.0f64).sin() / 50.0).abs() < 1e-13);
    }

    #[test]
    fn power_singularity_at_origin() {
        // ∫_0^1 x^{-0.98} dx = 50, the slowest-decaying case the shells must handle
        let est = origin_shells(&|x: f64| x.powf(-0.98), 1.0, 1e-12).unwrap();
        assert!((est.value - 50.0).abs() < 1e-8, "{}", est.value);
        let est = origin_shells(&|x: f64| x.powf(-0.5) * (1.0 + x), 1.0, 1e-13).unwrap();
        assert!((est.value - (2.0 + 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn log_singularity() {
        let est = origin_shells(&|x: f64| -x.ln(), 1.0, 1e-13).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12, "{}", est.value);
    }

    #[test]
    fn non_integrable_detected() {
        assert!(matches!(
            origin_shells(&|x: f64| 1.0 / x, 1.0, 1e-12),
            Err(Error::Divergence(_)) | Err(Error::Numeric { .. })
        ));
    }

    #[test]
    fn gaussian_tail() {
        // ∫_1^∞ e^{-y^2} dy = (√π/2) erfc(1)
        let est = to_infinity(&|y: f64| (-y * y).exp(), 1.0, 0.5, 1.0, 2.0, 1e-14).unwrap();
        assert!(
            (est.value - 0.139_402_792_640_331).abs() < 1e-14,
            "{}",
            est.value
        );
    }

    #[test]
    fn power_tail_extrapolated() {
        // ∫_1^∞ y^{-1.5} dy = 2
        let est = to_infinity(&|y: f64| y.powf(-1.5), 1.0, 1.0, 2.0, 1.0, 1e-12).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9, "{}", est.value);
    }
}
