//! Closed-form lower bound on D_t²(x) for a measure supported in [-1, 1].

use levy_heat::bounds::{small_jump_check, small_jump_constant};
use levy_heat::levy_model::{LevyMeasure, LevyModel};

fn main() -> levy_heat::Result<()> {
    let m = LevyModel::new(LevyMeasure::symmetric_atoms(&[(1.0, 0.5), (0.25, 2.0)]), 1)?;
    println!("c1 = {:.12}", small_jump_constant(&m)?);
    let xs: Vec<f64> = (1..=12).map(|k| k as f64 * 2.0).collect();
    let r = small_jump_check(&m, 1.0, &xs, 0.2)?;
    print!("{}", r.to_csv());
    println!("verdict {}", r.verdict);
    Ok(())
}
