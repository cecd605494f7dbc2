//! The characteristic function `Delta(lambda) = W[phi, psi]`, its
//! derivative, the leading-order envelope `chi`, and the asymptotic
//! eigenvalue seeds.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{self, propagate_end, wronskian, Endpoint, StepPlan};
use crate::model::{mu, Grid, ProblemConfig};
use crate::output::fmt_f64;
use crate::par::{self, Execution};

/// `Delta` evaluated three ways, plus the Wronskian's variation over `x`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CharEval {
    pub lambda: Complex64,
    /// Wronskian at the grid midpoint.
    pub delta: Complex64,
    /// `U1(psi)`.
    pub delta_via_u1: Complex64,
    /// `-U2(phi)`.
    pub delta_via_u2: Complex64,
    pub wronskian_spread: f64,
}

impl CharEval {
    /// Largest of the two alternate-route deviations, relative to `1 + |Delta|`.
    pub fn agreement(&self) -> f64 {
        let scale = 1.0 + self.delta.norm();
        ((self.delta_via_u1 - self.delta).norm() / scale).max((self.delta_via_u2 - self.delta).norm() / scale)
    }
}

pub fn delta(config: &ProblemConfig, lambda: Complex64) -> Result<CharEval> {
    let f = integrator::phi(config, lambda)?;
    let s = integrator::psi(config, lambda)?;
    let mid = f.len() / 2;
    Ok(CharEval {
        lambda,
        delta: wronskian(f.ys[mid], s.ys[mid]),
        delta_via_u1: config.boundary.u1(s.first(), lambda),
        delta_via_u2: -config.boundary.u2(f.last(), lambda),
        wronskian_spread: integrator::wronskian_spread(&f, &s),
    })
}

/// `-U2(phi)` with an explicit step plan; one forward sweep, no storage.
pub(crate) fn delta_fast(config: &ProblemConfig, grid: &Grid, plan: StepPlan, lambda: Complex64) -> Result<Complex64> {
    let end = propagate_end(config, grid, plan, lambda, config.boundary.phi_init(lambda), Endpoint::Left)?;
    Ok(-config.boundary.u2(end, lambda))
}

/// `Delta(lambda)` via a single forward sweep.
pub fn characteristic(config: &ProblemConfig, lambda: Complex64) -> Result<Complex64> {
    let grid = config.grid();
    let plan = StepPlan::for_lambda(config, &grid, lambda);
    delta_fast(config, &grid, plan, lambda)
}

/// Richardson-extrapolated central difference of `Delta`. The step plan
/// is frozen at the centre so all four samples share one discretization.
pub fn delta_dot(config: &ProblemConfig, lambda: Complex64) -> Result<Complex64> {
    let grid = config.grid();
    // Plan for a slightly larger modulus so the frozen plan is also valid
    // at the outer samples.
    let plan = StepPlan::for_lambda(config, &grid, lambda * (1.0 + 1e-5) + 1e-5);
    delta_dot_with(config, &grid, plan, lambda)
}

pub(crate) fn delta_dot_with(config: &ProblemConfig, grid: &Grid, plan: StepPlan, lambda: Complex64) -> Result<Complex64> {
    let h = 1e-6 * (1.0 + lambda.norm());
    let d = |step: f64| -> Result<Complex64> {
        let up = delta_fast(config, grid, plan, lambda + step)?;
        let down = delta_fast(config, grid, plan, lambda - step)?;
        Ok((up - down) / (2.0 * step))
    };
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Real sweep of `Delta` as CSV with columns `lambda, re_delta, im_delta, spread`.
pub fn write_sweep<W: Write>(config: &ProblemConfig, lambdas: &[f64], exec: Execution, mut out: W) -> Result<()> {
    let evals = par::map(exec, lambdas, |&l| delta(config, Complex64::new(l, 0.0)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    writeln!(out, "lambda,re_delta,im_delta,spread")?;
    for (l, e) in lambdas.iter().zip(&evals) {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(*l),
            fmt_f64(e.delta.re),
            fmt_f64(e.delta.im),
            fmt_f64(e.wronskian_spread)
        )?;
    }
    Ok(())
}

fn check_seed_coefficients(config: &ProblemConfig) -> Result<()> {
    let [_, _, b3, b4] = config.boundary.b();
    let [_, _, c3, c4] = config.boundary.c();
    if (b3 == 0.0 && b4 == 0.0) || (c3 == 0.0 && c4 == 0.0) {
        return Err(Error::UnsupportedConfig(
            "asymptotics need (b3, b4) != 0 and (c3, c4) != 0".into(),
        ));
    }
    Ok(())
}

/// Fractional offset `atan2(c3 b4 - c4 b3, b3 c3 + c4 b4) / pi`.
pub fn seed_offset(config: &ProblemConfig) -> Result<f64> {
    check_seed_coefficients(config)?;
    let [_, _, b3, b4] = config.boundary.b();
    let [_, _, c3, c4] = config.boundary.c();
    Ok((c3 * b4 - c4 * b3).atan2(b3 * c3 + c4 * b4) / PI)
}

/// Asymptotic spacing `pi / mu(pi)` of consecutive eigenvalues.
pub fn asymptotic_spacing(config: &ProblemConfig) -> f64 {
    PI / config.weight.mu_pi()
}

/// `[n + atan2(..) / pi] pi / mu(pi)`.
pub fn asymptotic_seed(config: &ProblemConfig, n: i64) -> Result<f64> {
    Ok((n as f64 + seed_offset(config)?) * asymptotic_spacing(config))
}

/// `chi(lambda) = (c3 b4 - c4 b3) cos(lambda mu(pi)) - (b3 c3 + b4 c4) sin(lambda mu(pi))`.
pub fn chi(config: &ProblemConfig, lambda: Complex64) -> Complex64 {
    let [_, _, b3, b4] = config.boundary.b();
    let [_, _, c3, c4] = config.boundary.c();
    let arg = lambda * config.weight.mu_pi();
    c3 * b4 * arg.cos() - b3 * c3 * arg.sin() - c4 * b3 * arg.cos() - b4 * c4 * arg.sin()
}

/// Max over the grid of the deviation of `phi` from its leading-order
/// form `lambda (b3 cos + b4 sin, b3 sin - b4 cos)(lambda mu(x))`.
pub fn leading_order_check(config: &ProblemConfig, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda.abs() >= 10.0) {
        return Err(Error::Precondition(format!("leading-order check needs real |lambda| >= 10, got {lambda}")));
    }
    let [_, _, b3, b4] = config.boundary.b();
    let f = integrator::phi(config, Complex64::new(lambda, 0.0))?;
    let mut worst: f64 = 0.0;
    for (x, y) in f.xs.iter().zip(&f.ys) {
        let (s, c) = (lambda * mu(*x, &config.weight)?).sin_cos();
        let d1 = (y[0].re - lambda * (b3 * c + b4 * s)).abs();
        let d2 = (y[1].re - lambda * (b3 * s - b4 * c)).abs();
        worst = worst.max(d1).max(d2);
    }
    Ok(worst)
}
