//! Empirical Nash constant over the default family of test functions.

use levy_heat::bernstein::{build_psi1, BernsteinFn};
use levy_heat::dirichlet::{default_family, nash_check, nash_consistency};

fn main() -> levy_heat::Result<()> {
    let f = BernsteinFn::power(0.75)?;
    let m = build_psi1(&f, 1)?;
    let family = default_family(1.0)?;
    let r = nash_check(&m, &f, 0.0, &family)?;
    print!("{}", r.to_csv());
    let (implied, ok) = nash_consistency(r.worst_c0, 1.0);
    println!(
        "worst C0 {:.12}  implied by the on-diagonal fit {implied}  consistent {ok}",
        r.worst_c0
    );
    Ok(())
}
