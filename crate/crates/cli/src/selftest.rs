use serde::Serialize;
use spectral_sens::deriv_sv::{sv_derivative_reduced, sv_directional_derivative};
use spectral_sens::fd::{default_step, fd_directional, DEFAULT_LEVELS};
use spectral_sens::hermitian::{hermitian_eig, DEFAULT_CONVERGENCE_TOL};
use spectral_sens::ikramov::{classify_critical_point, CriticalCase};
use spectral_sens::{eig_directional_derivative, kato_family, make_affine, ComplexMatrix, C64};

use crate::args::{Format, GlobalArgs};
use crate::commands::Outcome;
use crate::error::CliResult;
use crate::output::{num, render_csv, render_json, Table};

#[derive(Serialize)]
struct Check {
    name: &'static str,
    expected: f64,
    observed: f64,
    delta: f64,
    tolerance: f64,
    pass: bool,
}

fn check(name: &'static str, expected: f64, observed: f64, tolerance: f64) -> Check {
    let delta = (expected - observed).abs();
    Check {
        name,
        expected,
        observed,
        delta,
        tolerance,
        pass: delta <= tolerance,
    }
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    pass: bool,
    checks: Vec<Check>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn checks() -> spectral_sens::Result<Vec<Check>> {
    let mut out = Vec::new();
    let kato = kato_family();
    let d = [0.6, 0.8];
    let top = eig_directional_derivative(&kato, &[0.0, 0.0], 1, &d, None)?;
    let bottom = eig_directional_derivative(&kato, &[0.0, 0.0], 2, &d, None)?;
    out.push(check("kato_top_slope_at_crossing", 1.0, top.derivative, 1e-12));
    out.push(check(
        "kato_bottom_slope_at_crossing",
        -1.0,
        bottom.derivative,
        1e-12,
    ));

    let x0 = [3.0, 4.0];
    let smooth = eig_directional_derivative(&kato, &x0, 1, &[1.0, 0.0], None)?;
    let fd = fd_directional(
        |x| {
            let a = kato.evaluate(x).expect("kato is unbounded");
            hermitian_eig(&a, DEFAULT_CONVERGENCE_TOL).map_or(f64::NAN, |e| e.eigenvalues[0])
        },
        &x0,
        &[1.0, 0.0],
        default_step(&x0),
        DEFAULT_LEVELS,
    )?;
    out.push(check("kato_smooth_point", 0.6, smooth.derivative, 1e-12));
    out.push(check(
        "kato_finite_difference",
        smooth.derivative,
        fd.extrapolated,
        1e-5,
    ));

    let scalar = make_affine(ComplexMatrix::zeros(1, 1), vec![ComplexMatrix::identity(1)])?;
    let at_one = sv_directional_derivative(&scalar, &[1.0], 1, &[1.0], None)?;
    let at_minus_two = sv_derivative_reduced(&scalar, &[-2.0], 1, &[1.0], None)?;
    out.push(check("abs_slope_positive_side", 1.0, at_one.derivative, 1e-12));
    out.push(check(
        "abs_slope_negative_side",
        -1.0,
        at_minus_two.derivative,
        1e-12,
    ));

    let base = ComplexMatrix::from_rows(&[
        vec![c(2.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(2.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0)],
    ])?;
    let b1 = ComplexMatrix::from_rows(&[
        vec![c(0.5, 0.25), c(-1.0, 0.5)],
        vec![c(0.3, -0.7), c(0.2, 0.0)],
        vec![c(1.0, 1.0), c(0.0, -0.4)],
    ])?;
    let b2 = ComplexMatrix::from_rows(&[
        vec![c(-0.2, 0.0), c(0.1, 0.9)],
        vec![c(0.6, 0.6), c(-0.8, 0.3)],
        vec![c(0.0, 0.5), c(0.7, -0.1)],
    ])?;
    let rect = make_affine(base, vec![b1, b2])?;
    let d = [0.8, -0.6];
    for (name_emb, k) in [
        ("repeated_singular_value_top", 1),
        ("repeated_singular_value_bottom", 2),
    ] {
        let emb = sv_directional_derivative(&rect, &[0.0, 0.0], k, &d, None)?;
        let red = sv_derivative_reduced(&rect, &[0.0, 0.0], k, &d, None)?;
        out.push(check(name_emb, emb.derivative, red.derivative, 1e-9));
    }

    let a = ComplexMatrix::from_real_diagonal(&[3.0, 2.0, 1.0]);
    let dirs = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.6, 0.8]];
    let analysis = classify_critical_point(&a, &[0.0; 4], &dirs, None)?;
    out.push(check("critical_point_cluster_size", 3.0, analysis.m as f64, 0.0));
    out.push(check("critical_point_position", 1.0, analysis.p as f64, 0.0));
    let decisive = if analysis.case == CriticalCase::Decisive {
        1.0
    } else {
        0.0
    };
    out.push(check("critical_point_decisive", 1.0, decisive, 0.0));
    let reflection = analysis.max_reflection_delta.unwrap_or(f64::INFINITY);
    out.push(check("critical_point_reflection", 0.0, reflection, 1e-9));

    let h = ComplexMatrix::from_rows(&[
        vec![c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.5), c(0.25, 0.0)],
        vec![c(1.0, 1.0), c(-1.0, 0.0), c(0.3, 0.2), c(0.0, -0.6)],
        vec![c(0.0, -0.5), c(0.3, -0.2), c(0.5, 0.0), c(1.5, 0.0)],
        vec![c(0.25, 0.0), c(0.0, 0.6), c(1.5, 0.0), c(0.0, 0.0)],
    ])?;
    let eig = hermitian_eig(&h, DEFAULT_CONVERGENCE_TOL)?;
    let scale = 4.0 * h.frobenius_norm();
    out.push(check(
        "eigensolver_residual",
        0.0,
        eig.residual(&h),
        1e-12 * scale,
    ));
    out.push(check(
        "eigensolver_orthonormality",
        0.0,
        eig.orthonormality_defect(),
        1e-12 * scale,
    ));
    Ok(out)
}

pub fn run(args: &GlobalArgs) -> CliResult<Outcome> {
    let checks = checks()?;
    let pass = checks.iter().all(|c| c.pass);
    let report = Report {
        command: "selftest",
        pass,
        checks,
    };
    let bytes = match args.format.unwrap_or(Format::Json) {
        Format::Json => render_json(&report)?,
        Format::Csv => {
            let mut t = Table::new(["name", "expected", "observed", "delta", "tolerance", "pass"]);
            for c in &report.checks {
                t.push(vec![
                    c.name.to_string(),
                    num(c.expected),
                    num(c.observed),
                    num(c.delta),
                    num(c.tolerance),
                    c.pass.to_string(),
                ]);
            }
            render_csv(&t)?
        }
    };
    Ok(Outcome {
        bytes,
        warnings: false,
        failed: !pass,
    })
}
