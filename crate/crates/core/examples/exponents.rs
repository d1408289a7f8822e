//! Characteristic exponent ψ and cumulant Λ for a few measures.

use levy_heat::levy_model::{ClosedForm, LevyMeasure, LevyModel};

fn main() -> levy_heat::Result<()> {
    let models = [
        LevyModel::new(LevyMeasure::symmetric_atoms(&[(1.0, 0.5)]), 1)?.with_label("unit pair"),
        LevyModel::new(LevyMeasure::semi_stable(1.0)?, 1)?.with_label("semi-stable"),
        LevyModel::from_closed_form(ClosedForm::Gaussian, 1)?,
    ];
    for m in &models {
        let report = m.validate()?;
        println!("{} (checks passed: {})", m.label(), report.passed);
        for xi in [0.5, 1.0, 2.0, 4.0] {
            println!(
                "  xi={xi:<4} psi={:.10}  Lambda={:.10}",
                m.psi_1d(xi)?,
                m.cumulant_1d(xi)?
            );
        }
    }
    Ok(())
}
