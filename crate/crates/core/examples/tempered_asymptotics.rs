//! Laplace constants and the growth of the maximizer ξ₀ for a tempered tail.

use levy_heat::bounds::{laplace_constants, tempered_asymptotics_check};
use levy_heat::levy_model::{LevyMeasure, LevyModel};

fn main() -> levy_heat::Result<()> {
    for beta in [1.5, 2.0, 3.0] {
        let c = laplace_constants(beta)?;
        println!("beta={beta}  c1={:.14}  c2={:.14}", c.c1, c.c2);
    }
    let m = LevyModel::new(LevyMeasure::tempered(2.0, None)?, 1)?;
    let r = tempered_asymptotics_check(&m, 1.0, &[20.0, 40.0, 80.0], 0.2)?;
    for row in &r.rows {
        println!(
            "x={:<4} xi0={:.6}  predicted={:.6}  ratio={:.4}",
            row.x, row.xi0, row.predicted, row.ratio
        );
    }
    println!(
        "deviation decreasing {}  exponent bound holds {}",
        r.deviation_decreasing, r.exponent_bound_holds
    );
    Ok(())
}
