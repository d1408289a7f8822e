//! p_t(x) ≤ e^{-D_t²(x)} p_t(0) on a grid of points.

use levy_heat::bounds::off_diagonal_check;
use levy_heat::density::GridParams;
use levy_heat::levy_model::{LevyMeasure, LevyModel};

fn main() -> levy_heat::Result<()> {
    let m = LevyModel::new(LevyMeasure::semi_stable(1.0)?, 1)?;
    let xs: Vec<Vec<f64>> = (-24..=24).map(|k| vec![k as f64 * 0.25]).collect();
    for t in [0.25, 0.5, 1.0] {
        let r = off_diagonal_check(&m, t, &xs, &GridParams::default())?;
        println!(
            "t={t:<5} worst slack {:.3e}  verdict {}",
            r.worst_slack, r.verdict
        );
    }
    Ok(())
}
