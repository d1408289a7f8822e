//! Bernstein functions: evaluation, inversion, derivative sign pattern.

use levy_heat::bernstein::BernsteinFn;

fn main() -> levy_heat::Result<()> {
    let fs = [
        BernsteinFn::power(0.75)?,
        BernsteinFn::log1p(),
        BernsteinFn::ratio(),
    ];
    for f in &fs {
        let y = f.eval(10.0)?;
        let back = f.invert(y)?;
        println!(
            "{:>16}  f(10) = {y:.12}  f^-1(f(10)) = {back:.12}",
            f.label()
        );
        let report = f.derivative_bound_check(&[0.1, 1.0, 10.0])?;
        println!("{:>16}  derivative bounds hold: {}", "", report.passes());
    }
    Ok(())
}
