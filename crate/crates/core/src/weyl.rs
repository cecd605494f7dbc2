//! The Weyl function `M(lambda)`, the Weyl solution `Phi = psi / Delta`
//! and the residues of `M` at the eigenvalues.
//!
//! For real coefficients the residues `1 / alpha_n` are positive, so
//! `Im M(lambda)` and `Im lambda` have opposite signs off the real axis.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::eigensolver::{nearest_root, SpectralDataSet, SpectralDatum};
use crate::error::{Error, Result};
use crate::expansion::POLE_GUARD;
use crate::integrator::{self, propagate_end, Endpoint, StepPlan, Trajectory};
use crate::model::{ProblemConfig, State};
use crate::par::{self, Execution};

/// Radius of the circle used by [`residue_check`].
pub const RESIDUE_RADIUS: f64 = 1e-3;

fn pole(config: &ProblemConfig, lambda: Complex64, delta_abs: f64) -> Error {
    Error::Pole {
        lambda,
        delta_abs,
        nearest: nearest_root(config, &config.grid(), lambda.re),
    }
}

fn m_from_psi0(config: &ProblemConfig, lambda: Complex64, psi0: State) -> Result<(Complex64, Complex64)> {
    let delta = config.boundary.u1(psi0, lambda);
    if delta.norm().is_nan() || delta.norm() <= POLE_GUARD {
        return Err(pole(config, lambda, delta.norm()));
    }
    let m = -config.boundary.left_trace(psi0) / (config.boundary.k1() * delta);
    Ok((m, delta))
}

/// `M(lambda) = -(b4 psi1(0) + b3 psi2(0)) / (k1 Delta)` from one backward sweep.
pub fn weyl_direct(config: &ProblemConfig, lambda: Complex64) -> Result<Complex64> {
    let grid = config.grid();
    let plan = StepPlan::for_lambda(config, &grid, lambda);
    let psi0 = propagate_end(config, &grid, plan, lambda, config.boundary.psi_init(lambda), Endpoint::Right)?;
    Ok(m_from_psi0(config, lambda, psi0)?.0)
}

/// `sum 1 / (alpha_n (lambda - lambda_n))` over every datum of `data`.
pub fn weyl_series(_config: &ProblemConfig, lambda: Complex64, data: &SpectralDataSet) -> Result<Complex64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for d in &data.data {
        let gap = lambda - d.lambda_n;
        if gap.norm() == 0.0 {
            return Err(Error::Pole {
                lambda,
                delta_abs: 0.0,
                nearest: Some(d.lambda_n),
            });
        }
        sum += 1.0 / (d.alpha_n * gap);
    }
    Ok(sum)
}

/// Symmetric partial sum over `|n| <= big_n` (plus the surplus roots inside).
pub fn weyl_series_truncated(
    config: &ProblemConfig,
    lambda: Complex64,
    data: &SpectralDataSet,
    big_n: i64,
) -> Result<Complex64> {
    weyl_series(config, lambda, &data.truncated(big_n))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeylSample {
    pub lambda: Complex64,
    pub m_direct: Complex64,
    pub m_series: Complex64,
    /// Largest `|n|` of the symmetric series.
    pub series_terms: i64,
    /// `max |Phi - C - M phi|` over the grid.
    pub identity_defect: f64,
}

impl WeylSample {
    pub fn series_defect(&self) -> f64 {
        (self.m_direct - self.m_series).norm()
    }
}

pub fn weyl_sample(config: &ProblemConfig, lambda: Complex64, data: &SpectralDataSet) -> Result<WeylSample> {
    let sol = weyl_solution(config, lambda)?;
    let big_n = data.symmetric_extent().ok_or(Error::EmptyData)?;
    Ok(WeylSample {
        lambda,
        m_direct: sol.m,
        m_series: weyl_series_truncated(config, lambda, data, big_n)?,
        series_terms: big_n,
        identity_defect: sol.identity_defect,
    })
}

/// Samples over many `lambda`, in input order.
pub fn weyl_samples(
    config: &ProblemConfig,
    lambdas: &[Complex64],
    data: &SpectralDataSet,
    exec: Execution,
) -> Result<Vec<WeylSample>> {
    par::map(exec, lambdas, |&l| weyl_sample(config, l, data)).into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct WeylSolution {
    /// `psi / Delta`.
    pub phi_weyl: Trajectory,
    /// `C + M phi` on the same grid.
    pub via_c: Trajectory,
    pub m: Complex64,
    pub delta: Complex64,
    pub identity_defect: f64,
}

impl WeylSolution {
    /// `U1(Phi)`, equal to one.
    pub fn u1(&self, config: &ProblemConfig) -> Complex64 {
        config.boundary.u1(self.phi_weyl.first(), self.phi_weyl.lambda)
    }

    /// `U2(Phi)`, equal to zero.
    pub fn u2(&self, config: &ProblemConfig) -> Complex64 {
        config.boundary.u2(self.phi_weyl.last(), self.phi_weyl.lambda)
    }

    /// `-(b4 Phi1(0) + b3 Phi2(0)) / k1`, equal to `M`.
    pub fn m_from_trace(&self, config: &ProblemConfig) -> Complex64 {
        -config.boundary.left_trace(self.phi_weyl.first()) / config.boundary.k1()
    }
}

pub fn weyl_solution(config: &ProblemConfig, lambda: Complex64) -> Result<WeylSolution> {
    let psi = integrator::psi(config, lambda)?;
    let (m, delta) = m_from_psi0(config, lambda, psi.first())?;
    let phi = integrator::phi(config, lambda)?;
    let c = integrator::solution_c(config, lambda)?;
    let phi_weyl = psi.scaled(1.0 / delta);
    let via_c = Trajectory {
        ys: c
            .ys
            .iter()
            .zip(&phi.ys)
            .map(|(u, v)| [u[0] + m * v[0], u[1] + m * v[1]])
            .collect(),
        ..c
    };
    let identity_defect = phi_weyl.max_distance(&via_c);
    Ok(WeylSolution {
        phi_weyl,
        via_c,
        m,
        delta,
        identity_defect,
    })
}

/// Mean of `(lambda - lambda_n) M(lambda)` at four points of the circle
/// `|lambda - lambda_n| = radius`.
pub fn residue_estimate(config: &ProblemConfig, lambda_n: f64, radius: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        let offset = Complex64::from_polar(radius, FRAC_PI_2 * k as f64);
        acc += offset * weyl_direct(config, lambda_n + offset)?;
    }
    Ok(acc / 4.0)
}

/// `|Res M - 1 / alpha_n| / (1 / alpha_n)` at the datum's eigenvalue.
pub fn residue_check(config: &ProblemConfig, datum: &SpectralDatum) -> Result<f64> {
    let expected = 1.0 / datum.alpha_n;
    let est = residue_estimate(config, datum.lambda_n, RESIDUE_RADIUS)?;
    Ok((est - expected).norm() / expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::find_eigenvalues;
    use crate::presets;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn direct_values() {
        let cfg = presets::r0();
        assert!((weyl_direct(&cfg, c(0.0, 1.0)).unwrap() - c(0.0, -0.5)).norm() < 1e-8);
        assert!((weyl_direct(&cfg, c(0.5, 0.0)).unwrap() - c(-2.0 / 3.0, 0.0)).norm() < 1e-9);
        match weyl_direct(&cfg, c(0.0, 0.0)) {
            Err(Error::Pole { nearest: Some(n), .. }) => assert!(n.abs() < 1e-9),
            other => panic!("expected pole, got {other:?}"),
        }
    }

    #[test]
    fn series_single_term() {
        let cfg = presets::r0();
        let data = find_eigenvalues(&cfg, 0, 0).unwrap();
        let s = weyl_series(&cfg, c(0.0, 1.0), &data).unwrap();
        assert!((s - c(0.0, -1.0 / (PI + 2.0))).norm() < 1e-9);
        assert!((s.im + 0.19452).abs() < 1e-4);
        assert!(weyl_series(&cfg, c(0.0, 0.0), &data).is_err());
    }

    #[test]
    fn solution_normalization() {
        let cfg = presets::r0();
        let sol = weyl_solution(&cfg, c(0.0, 1.0)).unwrap();
        assert!((sol.u1(&cfg) - 1.0).norm() < 1e-8);
        assert!(sol.u2(&cfg).norm() < 1e-8);
        assert!(sol.identity_defect < 1e-8);
        let half = weyl_solution(&cfg, c(0.5, 0.0)).unwrap();
        assert!((half.m_from_trace(&cfg) - c(-2.0 / 3.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn residues() {
        let cfg = presets::r0();
        let data = find_eigenvalues(&cfg, -1, 1).unwrap();
        let est = residue_estimate(&cfg, 0.0, RESIDUE_RADIUS).unwrap();
        assert!((est.re - 1.0 / (PI + 2.0)).abs() < 1e-6);
        assert!((est.re - 0.19453).abs() < 1e-4);
        for d in &data.data {
            assert!(residue_check(&cfg, d).unwrap() < 1e-3);
        }
        let half = residue_estimate(&cfg, 0.0, RESIDUE_RADIUS / 2.0).unwrap();
        assert!((half - est).norm() / est.norm() < 1e-4);
    }

    #[test]
    fn decay_and_sign() {
        let cfg = presets::r1();
        let mut last = f64::INFINITY;
        for t in [2.0, 5.0, 10.0, 20.0] {
            let m = weyl_direct(&cfg, c(0.0, t)).unwrap().norm();
            assert!(m < last);
            last = m;
        }
        for l in [c(0.3, 0.5), c(-2.0, -1.0), c(4.0, 0.2)] {
            let m = weyl_direct(&cfg, l).unwrap();
            assert!(m.im / l.im < 0.0);
        }
    }
}
