//! Rate function D_t²(x) = sup_ξ (ξx - tΛ(ξ)) and its scaling.

use levy_heat::levy_model::{LevyMeasure, LevyModel};
use levy_heat::rate::{quadratic_bound_check, rate_function, rate_scaling_check};

fn main() -> levy_heat::Result<()> {
    let m = LevyModel::new(LevyMeasure::symmetric_atoms(&[(1.0, 0.5)]), 1)?;
    for x in [0.5, 1.0, 2.0, 4.0] {
        let r = rate_function(&m, 1.0, &[x])?;
        println!(
            "x={x:<4} D^2={:.14}  xi0={:.12}  ({:?})",
            r.d_sq, r.xi0[0], r.status
        );
    }
    // Closed form for the unit pair: x asinh(x) - sqrt(1+x^2) + 1.
    let x: f64 = 1.0;
    println!(
        "closed form at x=1: {:.14}",
        x * x.asinh() - (1.0 + x * x).sqrt() + 1.0
    );
    println!(
        "scaling residual: {:.3e}",
        rate_scaling_check(&m, 1.0, &[1.5], &[2.0, 4.0, 8.0])?
    );
    let xs: Vec<Vec<f64>> = (1..=8).map(|k| vec![k as f64 * 0.5]).collect();
    println!(
        "max D^2 - |x|^2/(4ct): {:.3e}",
        quadratic_bound_check(&m, 1.0, &xs)?
    );
    Ok(())
}
