//! Simulated increments compared with the Fourier density.

use levy_heat::density::{density_grid, GridParams};
use levy_heat::levy_model::{LevyMeasure, LevyModel};
use levy_heat::simulate::{empirical_vs_fourier, sample_increments, SamplePlan};

fn main() -> levy_heat::Result<()> {
    let m = LevyModel::new(LevyMeasure::semi_stable(1.0)?, 1)?;
    let plan = SamplePlan::new(1.0, 200_000, 42).with_epsilon(2f64.powi(-20));
    let samples = sample_increments(&m, &plan)?;
    let grid = density_grid(&m, 1.0, &GridParams::default())?;
    let c = empirical_vs_fourier(&samples, &grid)?;
    println!(
        "KS distance {:.5}  sup density gap {:.5}",
        c.ks_distance, c.sup_density_gap
    );
    Ok(())
}
