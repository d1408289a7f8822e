//! ℓ^{-1} log p_{ℓt}(ℓx) → -D_t²(x) as ℓ grows.

use levy_heat::density::GridParams;
use levy_heat::levy_model::{ClosedForm, LevyMeasure, LevyModel};
use levy_heat::rate::ldp_check;

fn main() -> levy_heat::Result<()> {
    let ells = [1.0, 2.0, 4.0, 8.0, 16.0];
    let cases = [
        (
            LevyModel::new(LevyMeasure::semi_stable(1.0)?, 1)?.with_label("semi-stable"),
            2.0,
        ),
        (LevyModel::from_closed_form(ClosedForm::Gaussian, 1)?, 1.0),
    ];
    for (m, x) in &cases {
        let r = ldp_check(m, 1.0, *x, &ells, &GridParams::default())?;
        println!(
            "{}  D^2 = {:.12}  threshold {:.4}",
            m.label(),
            r.d_sq,
            r.threshold
        );
        for row in &r.rows {
            println!("  ell={:<3} error {:?}", row.ell, row.error);
        }
        println!(
            "  decreasing {}  passed {}",
            r.strictly_decreasing, r.passed
        );
    }
    Ok(())
}
