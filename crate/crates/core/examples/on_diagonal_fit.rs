//! Fit of sup_x p_t(x) ≤ c [f^{-1}(1/(γt))]^{n/2} for a subordinate model,
//! then the combined bound at t = 0.5.

use levy_heat::bernstein::{build_psi1, BernsteinFn};
use levy_heat::bounds::{combined_bound_check, on_diagonal_fit};
use levy_heat::density::GridParams;

fn main() -> levy_heat::Result<()> {
    let f = BernsteinFn::power(0.75)?;
    let m = build_psi1(&f, 1)?;
    let ts: Vec<f64> = (1..=10).map(|k| k as f64 * 0.1).collect();
    let params = GridParams::default();
    let fit = on_diagonal_fit(&m, &f, &ts, &params)?;
    println!("gamma = {:?}  c = {:?}", fit.gamma, fit.c);
    let xs: Vec<Vec<f64>> = (0..=8).map(|k| vec![k as f64 * 0.5]).collect();
    let r = combined_bound_check(&m, &f, &fit, 0.5, &xs, &params)?;
    println!("{}", r.to_csv());
    println!("verdict {}", r.verdict);
    Ok(())
}
