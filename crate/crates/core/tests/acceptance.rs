//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary (`harness = false`) and exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use dirac_spectral::charfn::{asymptotic_seed, delta, delta_dot};
use dirac_spectral::eigensolver::{find_eigenvalues, gram_matrix};
use dirac_spectral::expansion::{coefficients, resolvent_apply, resolvent_residual, HElement};
use dirac_spectral::integrator::{phi, psi, solution_c};
use dirac_spectral::inverse::{reconstruct, synthesize_data, uniqueness_probe, Basis, InverseProblem, NelderMead};
use dirac_spectral::model::State;
use dirac_spectral::presets;
use dirac_spectral::weyl::{residue_estimate, weyl_direct, weyl_series_truncated, weyl_solution, RESIDUE_RADIUS};
use dirac_spectral::{Complex64, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String)>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn closed_delta(l: f64) -> f64 {
    (1.0 - l * l) * (l * PI).sin() + 2.0 * l * (l * PI).cos()
}

fn bisect(mut a: f64, mut b: f64) -> f64 {
    let mut fa = closed_delta(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = closed_delta(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `R0` closed forms of `phi`, `psi` and `C`.
fn oracle(l: Complex64, x: f64) -> [State; 3] {
    let (s, co) = ((l * x).sin(), (l * x).cos());
    let (sp, cp) = ((l * (x - PI)).sin(), (l * (x - PI)).cos());
    [
        [l * co + s, l * s - co],
        [-l * cp + sp, -l * sp - cp],
        [-co, -s],
    ]
}

type Criterion = (&'static str, fn() -> Outcome);

fn criterion_1() -> Outcome {
    let cfg = presets::r0();
    let mut worst: f64 = 0.0;
    for l in [c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 1.0), c(10.0, 0.0)] {
        let sols = [phi(&cfg, l)?, psi(&cfg, l)?, solution_c(&cfg, l)?];
        for (k, t) in sols.iter().enumerate() {
            for (x, y) in t.xs.iter().zip(&t.ys) {
                let e = oracle(l, *x)[k];
                worst = worst.max((y[0] - e[0]).norm()).max((y[1] - e[1]).norm());
            }
        }
    }
    Ok((worst <= 1e-8, format!("max-norm deviation {worst:.3e} (tol 1e-8)")))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut agree: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for cfg in [presets::r0(), presets::r1()] {
        for _ in 0..50 {
            let r = 20.0 * rng.gen::<f64>().sqrt();
            let t = 2.0 * PI * rng.gen::<f64>();
            let ev = delta(&cfg, Complex64::from_polar(r, t))?;
            let scale = ev.delta.norm();
            agree = agree
                .max((ev.delta_via_u1 - ev.delta).norm() / scale)
                .max((ev.delta_via_u2 - ev.delta).norm() / scale);
            spread = spread.max(ev.wronskian_spread);
        }
    }
    let pass = agree <= 1e-6 && spread <= 1e-8;
    Ok((pass, format!("three-way relative gap {agree:.3e} (tol 1e-6), Wronskian spread {spread:.3e} (tol 1e-8)")))
}

fn criterion_3() -> Outcome {
    let set = find_eigenvalues(&presets::r0(), -2, 2)?;
    let get = |n| set.labeled(n).map(|d| d.lambda_n).unwrap_or(f64::NAN);
    let (l0, l1, lm1, l2) = (get(0), get(1), get(-1), get(2));
    let (b1, b2) = (bisect(1.3, 1.5), bisect(2.2, 2.3));
    let pass = l0.abs() <= 1e-6
        && (l1 - 1.396).abs() <= 2e-3
        && (lm1 + 1.396).abs() <= 2e-3
        && (l2 - 2.26).abs() <= 1e-2
        && (l1 - b1).abs() <= 1e-8
        && (lm1 + b1).abs() <= 1e-8
        && (l2 - b2).abs() <= 1e-8;
    Ok((
        pass,
        format!("lambda_0 = {l0:.2e}, lambda_1 = {l1:.10}, lambda_-1 = {lm1:.10}, lambda_2 = {l2:.10}; bisection {b1:.10}, {b2:.10}"),
    ))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for cfg in [presets::r0(), presets::r1()] {
        let set = find_eigenvalues(&cfg, -20, 20)?;
        for d in &set.data {
            worst = worst.max(d.norming_defect());
            count += 1;
        }
    }
    let r0 = find_eigenvalues(&presets::r0(), 0, 0)?;
    let d0 = &r0.data[0];
    let dd0 = delta_dot(&presets::r0(), c(0.0, 0.0))?.re;
    let ab = d0.alpha_n * d0.beta_n;
    let pass = worst <= 1e-4 && (ab - (PI + 2.0)).abs() <= 1e-5 && (dd0 - (PI + 2.0)).abs() <= 1e-5;
    Ok((
        pass,
        format!("max relative defect {worst:.3e} over {count} eigenvalues (tol 1e-4); alpha_0 beta_0 = {ab:.10}, Delta'(0) = {dd0:.10}"),
    ))
}

fn criterion_5() -> Outcome {
    let cfg = presets::r1();
    let set = find_eigenvalues(&cfg, -25, 25)?;
    let l = |n: i64| set.labeled(n).map(|d| d.lambda_n).unwrap_or(f64::NAN);
    let target = 2.0 / 3.0;
    let gap_pos = (l(20) - l(19) - target).abs() / target;
    let gap_neg = (l(-19) - l(-20) - target).abs() / target;
    let eps = |n: i64| -> Result<f64> { Ok((n as f64 * (l(n) - asymptotic_seed(&cfg, n)?)).abs()) };
    let (ref_pos, ref_neg) = (eps(10)?, eps(-10)?);
    let mut ratio: f64 = 0.0;
    for n in 10..=25 {
        ratio = ratio.max(eps(n)? / ref_pos).max(eps(-n)? / ref_neg);
    }
    let pass = gap_pos <= 0.05 && gap_neg <= 0.05 && ratio <= 3.0;
    Ok((
        pass,
        format!("spacing deviation at |n| = 20: {gap_pos:.3e}, {gap_neg:.3e} (tol 5%); max n|eps_n| / value at |n| = 10: {ratio:.4} (tol 3)"),
    ))
}

fn criterion_6() -> Outcome {
    let cfg = presets::r0();
    let i = c(0.0, 1.0);
    let m = weyl_direct(&cfg, i)?;
    let direct_err = (m - c(0.0, -0.5)).norm();
    let data = find_eigenvalues(&cfg, -40, 40)?;
    let gaps: Vec<f64> = (5..=40)
        .map(|n| weyl_series_truncated(&cfg, i, &data, n).map(|s| (s - c(0.0, -0.5)).norm()))
        .collect::<Result<_>>()?;
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let res = residue_estimate(&cfg, 0.0, RESIDUE_RADIUS)?;
    let res_err = (res - 1.0 / (PI + 2.0)).norm();
    let pass = direct_err <= 1e-6 && monotone && res_err <= 1e-3;
    Ok((
        pass,
        format!(
            "|M(i) + 0.5i| = {direct_err:.3e}; series gap {:.3e} (N=5) -> {:.3e} (N=40), monotone = {monotone}; residue error {res_err:.3e}",
            gaps[0],
            gaps[gaps.len() - 1]
        ),
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let cfg = if k % 2 == 0 { presets::r0() } else { presets::r1() };
        let im = rng.gen_range(0.1..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let l = c(rng.gen_range(-5.0..5.0), im);
        let sol = weyl_solution(&cfg, l)?;
        worst = worst.max(sol.identity_defect / (1.0 + sol.m.norm()));
    }
    Ok((worst <= 1e-6, format!("max |Phi - C - M phi| / (1 + |M|) = {worst:.3e} (tol 1e-6)")))
}

fn criterion_8() -> Outcome {
    let mut off: f64 = 0.0;
    for cfg in [presets::r0(), presets::r1()] {
        let set = find_eigenvalues(&cfg, -10, 10)?;
        let gram = gram_matrix(&cfg, &set)?;
        for (i, row) in gram.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    off = off.max(v.norm() / (gram[i][i].re * gram[j][j].re).sqrt());
                }
            }
        }
    }
    let cfg = presets::r0();
    let set = find_eigenvalues(&cfg, -40, 40)?;
    let f = HElement::from_fn(&cfg, |x| [c(x.sin(), 0.0), c(0.0, 0.0)]);
    let co = coefficients(&cfg, &set, &f)?;
    let defects: Vec<f64> = (0..=40).map(|n| co.parseval_defect(n)).collect();
    let monotone = defects.windows(2).all(|w| w[1] <= w[0]);
    let (d10, d40) = (defects[10], defects[40]);
    let pass = off <= 1e-5 && monotone && d10 >= 2.0 * d40;
    Ok((
        pass,
        format!("Gram off-diagonal {off:.3e} (tol 1e-5); Parseval defect N=10 {d10:.3e}, N=40 {d40:.3e}, non-increasing = {monotone}"),
    ))
}

fn criterion_9() -> Outcome {
    let cfg = presets::r0();
    let i = c(0.0, 1.0);
    let fs = [
        HElement::from_fn(&cfg, |_| [c(1.0, 0.0), c(0.0, 0.0)]).with_scalars(c(0.0, 0.0), c(0.0, 0.0)),
        HElement::from_fn(&cfg, |x| [c(x.sin(), 0.0), c(x.cos(), 0.0)]).with_scalars(c(1.0, 0.0), c(-2.0, 0.0)),
        HElement::from_fn(&cfg, |x| [c(x, 0.5), c(x * x / PI, 0.0)]),
    ];
    let mut worst: f64 = 0.0;
    for f in &fs {
        let y = resolvent_apply(&cfg, i, f)?;
        worst = worst.max(resolvent_residual(&cfg, &y, f)?.max());
    }
    Ok((worst <= 1e-5, format!("max plug-back residual {worst:.3e} over 3 elements (tol 1e-5)")))
}

fn criterion_10() -> Outcome {
    let truth = presets::r0_with_potential(0.3, -0.2);
    let data = synthesize_data(&truth, 10)?;
    let problem = InverseProblem::new(data, Basis::PiecewiseConstant { m: 1 }, truth.boundary, truth.weight)?;
    let r = reconstruct(&problem, &[0.0, 0.0], &NelderMead::default())?;
    let (dp, dq) = ((r.parameters[0] - 0.3).abs(), (r.parameters[1] + 0.2).abs());
    let probe = uniqueness_probe(&presets::r0(), &truth, 10)?;
    let pass = r.converged && dp <= 1e-3 && dq <= 1e-3 && r.evaluations <= 2000 && probe > 1e-3;
    Ok((
        pass,
        format!(
            "recovered ({:.6}, {:.6}) in {} evaluations, misfit {:.3e}; probe distance {probe:.3e} (tol > 1e-3)",
            r.parameters[0], r.parameters[1], r.evaluations, r.misfit
        ),
    ))
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir()?;
    let cfg_path = dir.path().join("r0.json");
    std::fs::write(&cfg_path, presets::r0().to_json())?;
    let run = |out: &str| -> Result<Vec<u8>> {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_diracspec"))
            .args(["eigs", "--config"])
            .arg(&cfg_path)
            .args(["--n-min", "-5", "--n-max", "5", "--out"])
            .arg(&out)
            .status()?;
        if !status.success() {
            return Err(dirac_spectral::Error::Precondition(format!("eigs exited with {status}")));
        }
        Ok(std::fs::read(out.join("eigs.csv"))?)
    };
    let (a, b) = (run("first")?, run("second")?);
    let rows = String::from_utf8_lossy(&a).lines().count() - 1;
    Ok((a == b && rows == 11, format!("byte-identical = {}, {rows} rows", a == b)))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("zero-potential oracle", criterion_1),
        ("characteristic function cross-check", criterion_2),
        ("eigenvalue ground truth", criterion_3),
        ("norming constant identity", criterion_4),
        ("asymptotic law", criterion_5),
        ("Weyl function two ways", criterion_6),
        ("Weyl identity", criterion_7),
        ("orthogonality and Parseval", criterion_8),
        ("resolvent plug-back", criterion_9),
        ("inverse round trip", criterion_10),
        ("CLI determinism", criterion_11),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name}: {detail} [{:.1}s]", k + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
