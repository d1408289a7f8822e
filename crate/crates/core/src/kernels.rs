//! Spherical averages of `cos`/`cosh` used to reduce radially symmetric Lévy
//! densities in `n ≤ 3` to one-dimensional radial integrals.
//!
//! For `ω` uniform on the unit sphere of `R^n` and `u = ω_1`:
//!
//! * `one_minus_cos(n, a)  = 1 - E[cos(a u)]`
//! * `cosh_minus_one(n, a) = E[cosh(a u)] - 1`
//! * `sinh_moment(n, a)    = E[u sinh(a u)]`   (derivative of the above)
//! * `cosh_moment2(n, a)   = E[u^2 cosh(a u)]` (second derivative)
//!
//! For `n = 1`, `u = ±1`; for `n = 2`, `u = cos θ`; for `n = 3`, `u` is
//! uniform on `[-1, 1]`. The hyperbolic averages come with a `log_w` weight
//! so that `e^{a}`-sized values can be combined with tiny density weights
//! without overflowing.

use std::f64::consts::PI;

/// Surface measure of the unit sphere `S^{n-1}` (`2` for `n = 1`).
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            let half = n as f64 / 2.0;
            2.0 * PI.powf(half) / gamma_fn(half)
        }
    }
}

fn gamma_fn(x: f64) -> f64 {
    // Lanczos approximation; only used for sphere areas beyond n = 3.
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_fn(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = G[0];
        let t = x + 7.5;
        for (i, g) in G.iter().enumerate().skip(1) {
            acc += g / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

fn trapezoid_nodes(a: f64) -> usize {
    (a.abs().ceil() as usize + 40).max(48)
}

/// Averages `h(cos θ)` over the circle with the periodic trapezoid rule,
/// which converges geometrically for entire integrands.
fn circle_average<H: Fn(f64) -> f64>(a: f64, h: H) -> f64 {
    let m = trapezoid_nodes(a);
    let step = 2.0 * PI / m as f64;
    (0..m).map(|k| h((k as f64 * step).cos())).sum::<f64>() / m as f64
}

#[inline]
fn one_minus_cos_scalar(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        0.5 * u2 - u2 * u2 / 24.0
    } else {
        let s = (0.5 * u).sin();
        2.0 * s * s
    }
}

/// `1 - E[cos(a u)]`.
pub fn one_minus_cos(n: usize, a: f64) -> f64 {
    match n {
        1 => one_minus_cos_scalar(a),
        2 => circle_average(a, |c| one_minus_cos_scalar(a * c)),
        _ => {
            if a.abs() < 1.0 {
                // sum_{k>=1} (-1)^{k+1} a^{2k} / (2k+1)!
                let a2 = a * a;
                let mut term = a2 / 6.0;
                let mut sum: f64 = 0.0;
                let mut k = 1.0;
                while term.abs() > 1e-18 * sum.abs().max(1e-300) {
                    sum += term;
                    term *= -a2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
                    k += 1.0;
                }
                sum
            } else {
                1.0 - a.sin() / a
            }
        }
    }
}

const LARGE: f64 = 30.0;

/// `(E[cosh(a u)] - 1) * e^{log_w}`, evaluated without intermediate overflow.
pub fn cosh_minus_one(n: usize, a: f64, log_w: f64) -> f64 {
    let a = a.abs();
    if a <= LARGE {
        let v = match n {
            1 => {
                let s = (0.5 * a).sinh();
                2.0 * s * s
            }
            2 => circle_average(a, |c| {
                let s = (0.5 * a * c).sinh();
                2.0 * s * s
            }),
            _ => series_or(
                a,
                |a2, k| a2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0)),
                a * a / 6.0,
                |a| a.sinh() / a - 1.0,
            ),
        };
        v * log_w.exp()
    } else {
        (a + log_w).exp() * scaled_cosh(n, a) - log_w.exp()
    }
}

/// `E[cosh(a u)] e^{-a}` for large `a`.
fn scaled_cosh(n: usize, a: f64) -> f64 {
    match n {
        1 => 0.5 * (1.0 + (-2.0 * a).exp()),
        2 => circle_average(a, |c| {
            0.5 * ((a * (c - 1.0)).exp() + (-a * (c + 1.0)).exp())
        }),
        _ => (1.0 - (-2.0 * a).exp()) / (2.0 * a),
    }
}

/// `E[u sinh(a u)] * e^{log_w}`; odd in `a`.
pub fn sinh_moment(n: usize, a: f64, log_w: f64) -> f64 {
    let sign = a.signum();
    let a = a.abs();
    let v = if a <= LARGE {
        let v = match n {
            1 => a.sinh(),
            2 => circle_average(a, |c| c * (a * c).sinh()),
            // sum_k a^{2k+1} / ((2k+1)! (2k+3))
            _ => {
                if a < 2.0 {
                    let a2 = a * a;
                    let mut fact_term = a; // a^{2k+1}/(2k+1)!
                    let mut sum = 0.0;
                    let mut k = 0.0;
                    loop {
                        let term = fact_term / (2.0 * k + 3.0);
                        sum += term;
                        if term <= 1e-18 * sum {
                            break;
                        }
                        fact_term *= a2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
                        k += 1.0;
                    }
                    sum
                } else {
                    (a * a.cosh() - a.sinh()) / (a * a)
                }
            }
        };
        v * log_w.exp()
    } else {
        let scaled = match n {
            1 => 0.5 * (1.0 - (-2.0 * a).exp()),
            2 => circle_average(a, |c| {
                0.5 * c * ((a * (c - 1.0)).exp() - (-a * (c + 1.0)).exp())
            }),
            _ => ((1.0 + (-2.0 * a).exp()) * a - (1.0 - (-2.0 * a).exp())) / (2.0 * a * a),
        };
        (a + log_w).exp() * scaled
    };
    sign * v
}

/// `E[u^2 cosh(a u)] * e^{log_w}`.
pub fn cosh_moment2(n: usize, a: f64, log_w: f64) -> f64 {
    let a = a.abs();
    if a <= LARGE {
        let v = match n {
            1 => a.cosh(),
            2 => circle_average(a, |c| c * c * (a * c).cosh()),
            _ => {
                if a < 2.0 {
                    // sum_k a^{2k} / ((2k)! (2k+3))
                    let a2 = a * a;
                    let mut fact_term = 1.0;
                    let mut sum = 0.0;
                    let mut k = 0.0;
                    loop {
                        let term = fact_term / (2.0 * k + 3.0);
                        sum += term;
                        if term <= 1e-18 * sum {
                            break;
                        }
                        fact_term *= a2 / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
                        k += 1.0;
                    }
                    sum
                } else {
                    a.sinh() / a - 2.0 * a.cosh() / (a * a) + 2.0 * a.sinh() / (a * a * a)
                }
            }
        };
        v * log_w.exp()
    } else {
        let e = (-2.0 * a).exp();
        let scaled = match n {
            1 => 0.5 * (1.0 + e),
            2 => circle_average(a, |c| {
                0.5 * c * c * ((a * (c - 1.0)).exp() + (-a * (c + 1.0)).exp())
            }),
            _ => (1.0 - e) / (2.0 * a) - (1.0 + e) / (a * a) + (1.0 - e) / (a * a * a),
        };
        (a + log_w).exp() * scaled
    }
}

/// `E[u sinh(a u)] / a * e^{log_w}`, finite at `a = 0` (equals `E[u^2]`).
pub fn sinh_moment_over_a(n: usize, a: f64, log_w: f64) -> f64 {
    let a = a.abs();
    if a < 1e-3 {
        // E[u^2] + a^2 E[u^4]/6
        let (m2, m4) = match n {
            1 => (1.0, 1.0),
            2 => (0.5, 0.375),
            _ => (1.0 / 3.0, 0.2),
        };
        (m2 + a * a * m4 / 6.0) * log_w.exp()
    } else {
        sinh_moment(n, a, log_w) / a
    }
}

fn series_or<T, C>(a: f64, ratio: T, first: f64, closed: C) -> f64
where
    T: Fn(f64, f64) -> f64,
    C: Fn(f64) -> f64,
{
    if a < 2.0 {
        let a2 = a * a;
        let mut term = first;
        let mut sum = 0.0;
        let mut k = 1.0;
        while term > 1e-18 * sum || sum == 0.0 {
            sum += term;
            if term == 0.0 {
                break;
            }
            term *= ratio(a2, k);
            k += 1.0;
        }
        sum
    } else {
        closed(a)
    }
}

/// Eigenvalues of a symmetric `n × n` matrix (row-major) by cyclic Jacobi.
pub fn symmetric_eigenvalues(m: &[f64], n: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
        }
        let scale: f64 = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum::<f64>();
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
pub fn solve(m: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let factor = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in (col + 1)..n {
            acc -= a[col * n + k] * x[k];
        }
        x[col] = acc / a[col * n + col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn sphere_areas() {
        assert!(close(sphere_area(3), 4.0 * PI, 1e-15));
        assert!(close(sphere_area(4), 2.0 * PI * PI, 1e-12));
    }

    #[test]
    fn bessel_j0_average() {
        // 1 - J0(2.5); J0(2.5) = -0.048383776468197996
        assert!(close(one_minus_cos(2, 2.5), 1.048_383_776_468_198, 1e-14));
    }

    #[test]
    fn bessel_i0_average() {
        // I0(3) = 4.880792585865024
        assert!(close(
            cosh_minus_one(2, 3.0, 0.0),
            3.880_792_585_865_024,
            1e-13
        ));
        // I0(40) e^{-40} = 0.06315337... check continuity across the scaled branch
        let lo = cosh_minus_one(2, 29.999_999, -30.0);
        let hi = cosh_minus_one(2, 30.000_001, -30.0);
        assert!(close(lo, hi, 1e-5));
    }

    #[test]
    fn three_dim_kernels_match_closed_forms() {
        for &a in &[0.3, 1.9, 2.1, 10.0, 45.0] {
            let ch = cosh_minus_one(3, a, 0.0);
            assert!(close(ch, a.sinh() / a - 1.0, 1e-12), "a={a}");
            let sm = sinh_moment(3, a, 0.0);
            assert!(
                close(sm, (a * a.cosh() - a.sinh()) / (a * a), 1e-12),
                "a={a}"
            );
            let c2 = cosh_moment2(3, a, 0.0);
            let exact = a.sinh() / a - 2.0 * a.cosh() / (a * a) + 2.0 * a.sinh() / a.powi(3);
            assert!(close(c2, exact, 1e-11), "a={a}");
        }
    }

    #[test]
    fn kernel_derivatives_by_finite_differences() {
        for n in 1..=3 {
            for &a in &[0.5, 3.0, 31.0] {
                let h = 1e-6 * a;
                let fd = (cosh_minus_one(n, a + h, -a) - cosh_minus_one(n, a - h, -a)) / (2.0 * h);
                assert!(close(sinh_moment(n, a, -a), fd, 1e-8), "n={n} a={a}");
                let fd2 = (sinh_moment(n, a + h, -a) - sinh_moment(n, a - h, -a)) / (2.0 * h);
                assert!(close(cosh_moment2(n, a, -a), fd2, 1e-8), "n={n} a={a}");
            }
        }
    }

    #[test]
    fn jacobi_eigenvalues() {
        let m = [2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0];
        let ev = symmetric_eigenvalues(&m, 3);
        assert!(close(ev[0], 1.0, 1e-12) && close(ev[1], 3.0, 1e-12) && close(ev[2], 5.0, 1e-12));
    }

    #[test]
    fn linear_solve() {
        let m = [4.0, 1.0, 1.0, 3.0];
        let x = solve(&m, &[1.0, 2.0], 2).unwrap();
        assert!(close(x[0], 1.0 / 11.0, 1e-14) && close(x[1], 7.0 / 11.0, 1e-14));
    }
}
