//! Acceptance criteria 1–10. Runs without the libtest harness so that each
//! criterion prints exactly one pass/fail line.

use std::f64::consts::PI;
use std::time::Instant;

use levy_heat::bernstein::{build_psi1, BernsteinFn};
use levy_heat::bounds::{
    laplace_constants, off_diagonal_check, on_diagonal_fit, tempered_asymptotics_check,
};
use levy_heat::density::{density_grid, GridParams};
use levy_heat::dirichlet::{
    cdc_identity_check, default_family, form_difference, form_spectral, nash_check, TestFunction,
    TestKind,
};
use levy_heat::levy_model::{ClosedForm, LevyMeasure, LevyModel};
use levy_heat::rate::{ldp_check, quadratic_bound_check, rate_function, rate_scaling_check};
use levy_heat::simulate::{
    empirical_vs_fourier, sample_increments, write_samples, SamplePlan, SampleSidecar,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Oracle = (ClosedForm, fn(f64) -> f64);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn unit_pair() -> LevyModel {
    LevyModel::new(LevyMeasure::symmetric_atoms(&[(1.0, 0.5)]), 1).unwrap()
}

fn semi_stable() -> LevyModel {
    LevyModel::new(LevyMeasure::semi_stable(1.0).unwrap(), 1).unwrap()
}

fn three_atoms() -> LevyModel {
    LevyModel::new(
        LevyMeasure::symmetric_atoms(&[(0.5, 1.0), (1.25, 0.3), (2.0, 0.1)]),
        1,
    )
    .unwrap()
}

fn oracle_densities() -> Outcome {
    let mut worst_rel0: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    let cases: [Oracle; 2] = [
        (ClosedForm::Gaussian, |x| {
            (-x * x / 4.0).exp() / (4.0 * PI).sqrt()
        }),
        (ClosedForm::Stable { alpha: 1.0 }, |x| {
            1.0 / (PI * (1.0 + x * x))
        }),
    ];
    for (cf, exact) in cases {
        let m = LevyModel::from_closed_form(cf, 1).map_err(err)?;
        let start = Instant::now();
        let g = density_grid(&m, 1.0, &GridParams::default()).map_err(err)?;
        let elapsed = start.elapsed().as_secs_f64();
        worst_rel0 = worst_rel0.max((g.value_at(&[0.0]).map_err(err)? / exact(0.0) - 1.0).abs());
        for k in -50..=50 {
            let x = k as f64 * 0.1;
            worst_abs = worst_abs.max((g.value_at(&[x]).map_err(err)? - exact(x)).abs());
        }
        if elapsed >= 1.0 {
            return Err(format!("{cf:?} took {elapsed:.2} s"));
        }
    }
    check(
        worst_rel0 <= 1e-8 && worst_abs <= 1e-7,
        format!("rel error at 0 {worst_rel0:.2e}, abs error on |x|<=5 {worst_abs:.2e}"),
    )
}

fn rate_oracle() -> Outcome {
    let d = rate_function(&unit_pair(), 1.0, &[1.0]).map_err(err)?.d_sq;
    let analytic = 1f64.asinh() - (2f64.sqrt() - 1.0);
    // Brute force: maximize ξ - (cosh ξ - 1) on a fine grid, then parabolic refinement.
    let v = |xi: f64| xi - (xi.cosh() - 1.0);
    let step = 1e-5;
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for k in 0..=300_000 {
        let xi = k as f64 * step;
        if v(xi) > best {
            best = v(xi);
            arg = xi;
        }
    }
    let (a, b, c) = (v(arg - step), v(arg), v(arg + step));
    let brute = b + (a - c) * (a - c) / (8.0 * (2.0 * b - a - c));
    let (ea, eb) = ((d - analytic).abs(), (d - brute).abs());
    check(
        ea <= 1e-10 && eb <= 1e-10,
        format!("D = {d:.14}, |D - analytic| {ea:.1e}, |D - brute force| {eb:.1e}"),
    )
}

fn off_diagonal() -> Outcome {
    let f = BernsteinFn::power(0.75).map_err(err)?;
    let models = [semi_stable(), build_psi1(&f, 1).map_err(err)?];
    let xs: Vec<Vec<f64>> = (-24..=24).map(|k| vec![k as f64 * 0.25]).collect();
    let mut worst = f64::NEG_INFINITY;
    for m in &models {
        for t in [0.25, 0.5, 1.0] {
            let r = off_diagonal_check(m, t, &xs, &GridParams::default()).map_err(err)?;
            let p0 = r
                .rows
                .iter()
                .find(|row| row.point[0] == 0.0)
                .map(|row| row.lhs)
                .unwrap();
            for row in &r.rows {
                if !row.lhs.is_finite() || !row.rhs.is_finite() {
                    return Err(format!("t={t} x={:?}: {:?}", row.point, row.flag));
                }
                worst = worst.max((row.lhs - row.rhs) / p0);
            }
        }
    }
    check(
        worst <= 1e-8,
        format!("max (p_t(x) - e^-D p_t(0)) / p_t(0) = {worst:.2e}"),
    )
}

fn quadratic_bound() -> Outcome {
    let f = BernsteinFn::power(0.75).map_err(err)?;
    let tempered =
        LevyModel::new(LevyMeasure::tempered(2.0, None).map_err(err)?, 1).map_err(err)?;
    let models = [
        unit_pair(),
        semi_stable(),
        three_atoms(),
        tempered,
        build_psi1(&f, 1).map_err(err)?,
    ];
    let xs: Vec<Vec<f64>> = (-24..=24).map(|k| vec![k as f64 * 0.25]).collect();
    let mut worst = f64::NEG_INFINITY;
    for m in &models {
        for t in [0.25, 0.5, 1.0, 2.0] {
            worst = worst.max(quadratic_bound_check(m, t, &xs).map_err(err)?);
        }
    }
    let plane = LevyModel::new(
        LevyMeasure::Atoms(
            [
                ([1.0, 0.0], 0.5),
                ([-1.0, 0.0], 0.5),
                ([0.6, 0.8], 0.3),
                ([-0.6, -0.8], 0.3),
            ]
            .into_iter()
            .map(|(p, mass)| levy_heat::levy_model::Atom {
                point: p.to_vec(),
                mass,
            })
            .collect(),
        ),
        2,
    )
    .map_err(err)?;
    let xs2: Vec<Vec<f64>> = (-4..=4)
        .flat_map(|i| (-4..=4).map(move |j| vec![i as f64, j as f64 * 0.5]))
        .collect();
    worst = worst.max(quadratic_bound_check(&plane, 1.0, &xs2).map_err(err)?);
    check(worst <= 1e-10, format!("max D - |x|^2/(4ct) = {worst:.3e}"))
}

fn scaling() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [unit_pair(), semi_stable()] {
        for x in [0.5, 1.0, 3.0] {
            worst = worst.max(rate_scaling_check(&m, 1.0, &[x], &[2.0, 4.0, 8.0]).map_err(err)?);
        }
    }
    check(
        worst <= 1e-9,
        format!("max relative scaling residual {worst:.2e}"),
    )
}

fn ldp() -> Outcome {
    let ells = [1.0, 2.0, 4.0, 8.0, 16.0];
    let mut details = Vec::new();
    let mut ok = true;
    let gauss = LevyModel::from_closed_form(ClosedForm::Gaussian, 1).map_err(err)?;
    for (m, x, limit, name) in [
        (gauss, 1.0, 0.2, "gaussian"),
        (semi_stable(), 2.0, 0.25, "semi-stable"),
    ] {
        let r = ldp_check(&m, 1.0, x, &ells, &GridParams::default()).map_err(err)?;
        let errors: Vec<f64> = r
            .rows
            .iter()
            .map(|row| row.error.unwrap_or(f64::NAN))
            .collect();
        let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
        let last = errors[errors.len() - 1];
        ok &= decreasing && last <= limit;
        details.push(format!(
            "{name} e(16) = {last:.4} (limit {limit}, decreasing {decreasing})"
        ));
    }
    check(ok, details.join("; "))
}

fn random_kind(rng: &mut ChaCha8Rng) -> TestKind {
    let center = rng.random_range(-1.0..1.0);
    let base = match rng.random_range(0..3) {
        0 => TestKind::gaussian(center, rng.random_range(0.3..1.5)),
        1 => TestKind::bump(center, rng.random_range(0.5..3.0)),
        _ => TestKind::gaussian(center, rng.random_range(0.3..1.0))
            .times(TestKind::bump(-center, 3.0)),
    };
    base.scaled(rng.random_range(0.5..2.0))
}

fn dirichlet_equivalence() -> Outcome {
    let m = three_atoms();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let family: Vec<TestFunction> = (0..10)
        .map(|_| TestFunction::new(random_kind(&mut rng), 4096, 0.01))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let mut worst_form: f64 = 0.0;
    for u in &family {
        let s = form_spectral(&m, u).map_err(err)?.value;
        let d = form_difference(&m, u).map_err(err)?.value;
        worst_form = worst_form.max((s - d).abs() / d.abs());
    }
    let mut worst_cdc: f64 = 0.0;
    for i in 0..family.len() {
        let r = cdc_identity_check(&m, &family[i], &family[(i + 1) % family.len()]).map_err(err)?;
        worst_cdc = worst_cdc.max(r.residual / r.scale);
    }
    check(
        worst_form <= 1e-6 && worst_cdc <= 1e-6,
        format!("max relative form gap {worst_form:.2e}, max carre du champ residual/scale {worst_cdc:.2e}"),
    )
}

fn nash() -> Outcome {
    let f = BernsteinFn::power(0.75).map_err(err)?;
    let m = build_psi1(&f, 1).map_err(err)?;
    let family = default_family(1.0).map_err(err)?;
    let doubled: Vec<TestFunction> = family
        .iter()
        .map(|u| TestFunction::new(u.kind.clone(), u.nodes * 2, u.spacing / 2.0))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let w1 = nash_check(&m, &f, 0.0, &family).map_err(err)?.worst_c0;
    let w2 = nash_check(&m, &f, 0.0, &doubled).map_err(err)?.worst_c0;
    let stable = w1.is_finite() && (w2 / w1 - 1.0).abs() <= 0.1;

    let ts: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
    let fit = on_diagonal_fit(&m, &f, &ts, &GridParams::default()).map_err(err)?;
    let covers = fit.verdict && fit.gamma.is_some_and(|g| g <= 1.0);

    let half = BernsteinFn::power(0.5).map_err(err)?;
    let cauchy = LevyModel::from_closed_form(ClosedForm::Stable { alpha: 1.0 }, 1).map_err(err)?;
    let cfit = on_diagonal_fit(&cauchy, &half, &ts, &GridParams::default()).map_err(err)?;
    let cauchy_gap = cfit
        .rows
        .iter()
        .map(|r| {
            let m = 1.0 / (PI * r.point[0]);
            ((r.lhs - m).abs() / m).max((r.rhs - m).abs() / m)
        })
        .fold(0.0, f64::max);
    check(
        stable && covers && cauchy_gap <= 1e-6,
        format!(
            "worst C0 {w1:.6} vs {w2:.6} doubled; fit gamma {:?} c {:.6}; cauchy relative gap {cauchy_gap:.2e}",
            fit.gamma,
            fit.c.unwrap_or(f64::NAN)
        ),
    )
}

fn tempered_asymptotics() -> Outcome {
    let m = LevyModel::new(LevyMeasure::tempered(2.0, None).map_err(err)?, 1).map_err(err)?;
    let r = tempered_asymptotics_check(&m, 1.0, &[20.0, 40.0, 80.0], 0.2).map_err(err)?;
    let devs: Vec<f64> = r.rows.iter().map(|row| (row.ratio - 1.0).abs()).collect();
    let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
    let c = laplace_constants(2.0).map_err(err)?.c1;
    check(
        decreasing && devs[2] <= 0.15 && c == 0.25,
        format!("|ratio - 1| = {devs:.4?}; c_(2,1) = {c}"),
    )
}

fn monte_carlo() -> Outcome {
    let m = semi_stable();
    let plan = SamplePlan::new(1.0, 1_000_000, 42).with_epsilon(2f64.powi(-20));
    let a = sample_increments(&m, &plan).map_err(err)?;
    let grid = density_grid(&m, 1.0, &GridParams::default()).map_err(err)?;
    let ks = empirical_vs_fourier(&a, &grid).map_err(err)?.ks_distance;
    let dir = tempfile::tempdir().map_err(err)?;
    let sidecar = SampleSidecar {
        seed: 42,
        n: plan.samples,
        t: 1.0,
        model: m.label().into(),
        epsilon: plan.epsilon,
        compensation: plan.compensation,
    };
    let (p1, p2) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    write_samples(&p1, &a, &sidecar).map_err(err)?;
    let b = sample_increments(&m, &plan).map_err(err)?;
    write_samples(&p2, &b, &sidecar).map_err(err)?;
    let identical = std::fs::read(&p1).map_err(err)? == std::fs::read(&p2).map_err(err)?;
    check(
        ks <= 0.01 && identical,
        format!("KS {ks:.5}; reruns byte-identical {identical}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("oracle densities", oracle_densities),
        ("rate-function oracle", rate_oracle),
        ("off-diagonal bound", off_diagonal),
        ("quadratic rate bound", quadratic_bound),
        ("rate scaling", scaling),
        ("large deviations", ldp),
        ("Dirichlet form equivalence", dirichlet_equivalence),
        ("Nash constant and on-diagonal fit", nash),
        ("tempered-tail asymptotics", tempered_asymptotics),
        ("Monte Carlo", monte_carlo),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
