//! Transition density by FFT, checked against the Gaussian closed form.

use levy_heat::density::{density_at, density_grid, semigroup_check, GridParams};
use levy_heat::levy_model::{ClosedForm, LevyMeasure, LevyModel};

fn main() -> levy_heat::Result<()> {
    let gauss = LevyModel::from_closed_form(ClosedForm::Gaussian, 1)?;
    let g = density_grid(&gauss, 1.0, &GridParams::default())?;
    let exact = |x: f64| (-x * x / 4.0).exp() / (4.0 * std::f64::consts::PI).sqrt();
    for x in [0.0, 1.0, 2.0, 4.0] {
        println!(
            "gauss p_1({x}) = {:.14}  exact {:.14}",
            g.value_at(&[x])?,
            exact(x)
        );
    }
    println!("mass = {:.14}", g.diagnostics.mass);

    let semi = LevyModel::new(LevyMeasure::semi_stable(1.0)?, 1)?;
    println!(
        "semi-stable p_1(0.5) = {:.12}",
        density_at(&semi, 1.0, 0.5)?
    );
    println!(
        "semigroup residual = {:.3e}",
        semigroup_check(&semi, 0.5, 0.5, &GridParams::default())?
    );
    Ok(())
}
