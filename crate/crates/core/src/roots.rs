use crate::error::{Error, Result};

/// Root of an increasing function on a sign-changing bracket `[lo, hi]`.
///
/// `f` returns the value and derivative. Newton steps are taken when they land
/// inside the current bracket and shrink the residual; otherwise the bracket is
/// bisected.
pub(crate) fn newton_bisect<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::Numeric {
            what: "root bracket".into(),
            estimate: f64::NAN,
            error_bound: f64::INFINITY,
        });
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= xtol {
            return Ok(0.5 * (lo + hi));
        }
        let newton = x - fx / dfx;
        let next = if dfx > 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 0.25 * xtol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Numeric {
        what: "root finding".into(),
        estimate: x,
        error_bound: hi - lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let r = newton_bisect(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn survives_flat_derivative() {
        let r = newton_bisect(|x| ((x - 1.0).powi(3), 0.0), 0.0, 3.0, 1e-12, 400).unwrap();
        assert!((r - 1.0).abs() < 1e-4);
    }
}
