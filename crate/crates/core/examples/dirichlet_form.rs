//! Dirichlet form in Fourier and in difference form, and the carré du champ
//! identity 2E(fh, f) - E(h, f²) = ∫ h Γ(f, f).

use levy_heat::dirichlet::{
    cdc_identity_check, form_difference, form_spectral, TestFunction, TestKind,
};
use levy_heat::levy_model::{LevyMeasure, LevyModel};

fn main() -> levy_heat::Result<()> {
    let m = LevyModel::new(
        LevyMeasure::symmetric_atoms(&[(0.5, 1.0), (1.25, 0.3), (2.0, 0.1)]),
        1,
    )?;
    for kind in [
        TestKind::gaussian(0.0, 1.0),
        TestKind::bump(0.3, 1.5),
        TestKind::hat(0.0, 1.0),
    ] {
        let u = TestFunction::on_default_grid(kind, 2.0)?;
        let s = form_spectral(&m, &u)?;
        let d = form_difference(&m, &u)?;
        println!(
            "{:<20} spectral {:.12}  difference {:.12}",
            u.kind.label(),
            s.value,
            d.value
        );
    }
    let f = TestFunction::new(TestKind::gaussian(0.2, 0.8), 4096, 0.005)?;
    let h = TestFunction::new(TestKind::bump(-0.1, 2.0), 4096, 0.005)?;
    let r = cdc_identity_check(&m, &f, &h)?;
    println!(
        "lhs {:.12}  rhs {:.12}  residual {:.3e}",
        r.lhs, r.rhs, r.residual
    );
    Ok(())
}
