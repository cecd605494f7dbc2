//! Reference configurations with known closed-form behaviour.
//!
//! `R0` has `b = c = (0, -1, 1, 0)`, a continuous weight and zero
//! potential; its characteristic function is
//! `(1 - lambda^2) sin(lambda pi) + 2 lambda cos(lambda pi)`. `R1` keeps the
//! coefficients and puts a jump `alpha = 2` at `a = pi / 2`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::Result;
use crate::integrator::Endpoint;
use crate::model::{mu, BoundaryParams, PotentialSpec, ProblemConfig, State, Weight, DEFAULT_GRID_POINTS};

pub fn r0_boundary() -> BoundaryParams {
    BoundaryParams::new([0.0, -1.0, 1.0, 0.0], [0.0, -1.0, 1.0, 0.0]).expect("valid preset")
}

pub fn r0() -> ProblemConfig {
    r0_with_potential(0.0, 0.0)
}

pub fn r1() -> ProblemConfig {
    r1_with_potential(0.0, 0.0)
}

/// `R0` geometry with constant `p`, `q` (zero uses the empty closed form).
pub fn r0_with_potential(p: f64, q: f64) -> ProblemConfig {
    build(1.0, p, q)
}

/// `R1` geometry with constant `p`, `q`.
pub fn r1_with_potential(p: f64, q: f64) -> ProblemConfig {
    build(2.0, p, q)
}

fn build(alpha: f64, p: f64, q: f64) -> ProblemConfig {
    let potential = if p == 0.0 && q == 0.0 {
        PotentialSpec::zero()
    } else {
        PotentialSpec::constant(p, q)
    };
    ProblemConfig::new(
        r0_boundary(),
        Weight::new(alpha, FRAC_PI_2).expect("valid preset"),
        potential,
        DEFAULT_GRID_POINTS,
    )
    .expect("valid preset")
}

/// Exact solution of the system with zero potential: the initial state at
/// the chosen endpoint rotated by `lambda (mu(x) - mu(x0))`.
pub fn free_solution(w: &Weight, lambda: Complex64, init: State, from: Endpoint, x: f64) -> Result<State> {
    let x0 = match from {
        Endpoint::Left => 0.0,
        Endpoint::Right => PI,
    };
    let theta = lambda * (mu(x, w)? - mu(x0, w)?);
    let (s, c) = (theta.sin(), theta.cos());
    let [u, v] = init;
    Ok([u * c - v * s, u * s + v * c])
}
