//! Elements of `H_rho = L2_rho(0, pi; C^2) (+) C^2`, the inner product,
//! eigenfunction expansions and the resolvent.

use num_complex::Complex64;
use serde::Serialize;

use crate::eigensolver::SpectralDataSet;
use crate::error::{Error, Result};
use crate::integrator::{self, Trajectory};
use crate::model::{Grid, ProblemConfig, State};
use crate::par::{self, Execution};
use crate::quadrature::{cumulative_weighted, integrate_weighted};

/// Below this `|Delta|` the resolvent and the Weyl function refuse to evaluate.
pub const POLE_GUARD: f64 = 1e-8;

/// `(f1, f2)` sampled on the configuration grid plus the boundary scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct HElement {
    pub f1: Vec<Complex64>,
    pub f2: Vec<Complex64>,
    pub f3: Complex64,
    pub f4: Complex64,
    split: usize,
}

impl HElement {
    pub fn new(grid: &Grid, f1: Vec<Complex64>, f2: Vec<Complex64>, f3: Complex64, f4: Complex64) -> Result<Self> {
        for v in [&f1, &f2] {
            if v.len() != grid.len() {
                return Err(Error::GridMismatch {
                    expected: grid.len(),
                    found: v.len(),
                });
            }
        }
        Ok(Self {
            f1,
            f2,
            f3,
            f4,
            split: grid.split(),
        })
    }

    pub fn zero(config: &ProblemConfig) -> Self {
        let grid = config.grid();
        let z = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self::new(&grid, z.clone(), z, 0.0.into(), 0.0.into()).expect("lengths match")
    }

    /// Samples `f` on the grid; the boundary scalars are the traces
    /// `b3 f2(0) + b4 f1(0)` and `c3 f2(pi) + c4 f1(pi)`.
    pub fn from_fn(config: &ProblemConfig, f: impl Fn(f64) -> State) -> Self {
        let grid = config.grid();
        let (f1, f2): (Vec<_>, Vec<_>) = grid.xs().iter().map(|&x| f(x)).map(|y| (y[0], y[1])).unzip();
        let f3 = config.boundary.left_trace([f1[0], f2[0]]);
        let n = f1.len() - 1;
        let f4 = config.boundary.right_trace([f1[n], f2[n]]);
        Self::new(&grid, f1, f2, f3, f4).expect("lengths match")
    }

    /// Same samples with explicit boundary scalars.
    pub fn with_scalars(mut self, f3: Complex64, f4: Complex64) -> Self {
        self.f3 = f3;
        self.f4 = f4;
        self
    }

    pub fn from_trajectory(config: &ProblemConfig, t: &Trajectory) -> Self {
        let grid = config.grid();
        let (f1, f2) = t.ys.iter().map(|y| (y[0], y[1])).unzip();
        let f3 = config.boundary.left_trace(t.first());
        let f4 = config.boundary.right_trace(t.last());
        Self::new(&grid, f1, f2, f3, f4).expect("trajectory lies on the config grid")
    }

    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            f1: self.f1.iter().map(|v| v * s).collect(),
            f2: self.f2.iter().map(|v| v * s).collect(),
            f3: self.f3 * s,
            f4: self.f4 * s,
            split: self.split,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            f1: self.f1.iter().zip(&other.f1).map(|(a, b)| a + b).collect(),
            f2: self.f2.iter().zip(&other.f2).map(|(a, b)| a + b).collect(),
            f3: self.f3 + other.f3,
            f4: self.f4 + other.f4,
            split: self.split,
        }
    }

    /// Max-norm distance over samples and boundary scalars.
    pub fn max_distance(&self, other: &Self) -> f64 {
        let funcs = self
            .f1
            .iter()
            .zip(&other.f1)
            .chain(self.f2.iter().zip(&other.f2))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        funcs.max((self.f3 - other.f3).norm()).max((self.f4 - other.f4).norm())
    }

    /// Max-norm distance of the function part only.
    pub fn max_function_distance(&self, other: &Self) -> f64 {
        self.f1
            .iter()
            .zip(&other.f1)
            .chain(self.f2.iter().zip(&other.f2))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.len() || self.split != grid.split() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// The element `(phi(., lambda), b3 phi2(0) + b4 phi1(0), c3 phi2(pi) + c4 phi1(pi))`.
pub fn eigen_element(config: &ProblemConfig, lambda: f64) -> Result<HElement> {
    let f = integrator::phi(config, Complex64::new(lambda, 0.0))?;
    Ok(HElement::from_trajectory(config, &f))
}

/// `<Y, Z> = int (y1 conj z1 + y2 conj z2) rho + y3 conj z3 / k1 + y4 conj z4 / k2`.
pub fn inner(config: &ProblemConfig, y: &HElement, z: &HElement) -> Result<Complex64> {
    let grid = config.grid();
    y.check_grid(&grid)?;
    z.check_grid(&grid)?;
    let g: Vec<Complex64> = (0..y.len())
        .map(|i| y.f1[i] * z.f1[i].conj() + y.f2[i] * z.f2[i].conj())
        .collect();
    let b = &config.boundary;
    Ok(integrate_weighted(&grid, config.weight.alpha(), &g)
        + y.f3 * z.f3.conj() / b.k1()
        + y.f4 * z.f4.conj() / b.k2())
}

/// Expansion coefficients of one element against a data set.
#[derive(Clone, Debug, Serialize)]
pub struct Coefficients {
    pub n: Vec<Option<i64>>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    /// `<f, Y_n> / alpha_n`.
    pub a: Vec<Complex64>,
    /// `(int phi~ f rho - f3 - f4 / beta_n) / alpha_n`.
    pub a_integral: Vec<Complex64>,
    /// Largest `|a - a_integral|` relative to `1 + |a|`.
    pub defect: f64,
    pub norm_sq: f64,
}

impl Coefficients {
    /// `sum alpha_n |a_n|^2` over labels `|n| <= big_n` and the surplus
    /// roots inside the labelled span.
    pub fn partial_energy(&self, big_n: i64) -> f64 {
        self.included(big_n).map(|i| self.alpha[i] * self.a[i].norm_sqr()).sum()
    }

    /// Indices of the terms kept by a symmetric truncation at `big_n`.
    pub fn included(&self, big_n: i64) -> impl Iterator<Item = usize> + '_ {
        let bound = |m: i64| {
            self.n
                .iter()
                .position(|&k| k == Some(m))
                .map(|i| self.lambda[i])
        };
        let (lo, hi) = (bound(-big_n), bound(big_n));
        (0..self.n.len()).filter(move |&i| match self.n[i] {
            Some(k) => k.abs() <= big_n,
            None => matches!((lo, hi), (Some(l), Some(h)) if self.lambda[i] > l && self.lambda[i] < h),
        })
    }

    /// `|<f, f> - partial_energy| / <f, f>`.
    pub fn parseval_defect(&self, big_n: i64) -> f64 {
        (self.norm_sq - self.partial_energy(big_n)).abs() / self.norm_sq
    }
}

fn eigen_elements(config: &ProblemConfig, data: &SpectralDataSet) -> Result<Vec<HElement>> {
    par::map(Execution::default(), &data.data, |d| eigen_element(config, d.lambda_n))
        .into_iter()
        .collect()
}

pub fn coefficients(config: &ProblemConfig, data: &SpectralDataSet, f: &HElement) -> Result<Coefficients> {
    let elements = eigen_elements(config, data)?;
    coefficients_with(config, data, &elements, f)
}

fn coefficients_with(config: &ProblemConfig, data: &SpectralDataSet, elements: &[HElement], f: &HElement) -> Result<Coefficients> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let grid = config.grid();
    f.check_grid(&grid)?;
    let mut a = Vec::with_capacity(data.len());
    let mut a_int = Vec::with_capacity(data.len());
    let mut defect: f64 = 0.0;
    for (d, y) in data.data.iter().zip(elements) {
        let full = inner(config, f, y)? / d.alpha_n;
        let g: Vec<Complex64> = (0..f.len()).map(|i| y.f1[i] * f.f1[i] + y.f2[i] * f.f2[i]).collect();
        let integral = integrate_weighted(&grid, config.weight.alpha(), &g);
        let proof = (integral - f.f3 - f.f4 / d.beta_n) / d.alpha_n;
        defect = defect.max((full - proof).norm() / (1.0 + full.norm()));
        a.push(full);
        a_int.push(proof);
    }
    Ok(Coefficients {
        n: data.data.iter().map(|d| d.n).collect(),
        lambda: data.lambdas(),
        alpha: data.data.iter().map(|d| d.alpha_n).collect(),
        a,
        a_integral: a_int,
        defect,
        norm_sq: inner(config, f, f)?.re,
    })
}

/// `|<f, f> - sum alpha_n |a_n|^2| / <f, f>` over every datum in `data`.
pub fn parseval_defect(config: &ProblemConfig, data: &SpectralDataSet, f: &HElement) -> Result<f64> {
    let norm = inner(config, f, f)?.re;
    if norm <= 0.0 {
        return Err(Error::Precondition("Parseval defect needs a nonzero element".into()));
    }
    let c = coefficients(config, data, f)?;
    let energy: f64 = c.alpha.iter().zip(&c.a).map(|(al, a)| al * a.norm_sqr()).sum();
    Ok((norm - energy).abs() / norm)
}

/// Partial sum of the expansion together with its error against `f`.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub sum: HElement,
    pub coefficients: Coefficients,
    /// Max-norm distance between the function parts of `sum` and `f`.
    pub max_error: f64,
}

/// `sum a_n Y_n` over every datum in `data`.
pub fn expand(config: &ProblemConfig, data: &SpectralDataSet, f: &HElement) -> Result<Expansion> {
    let elements = eigen_elements(config, data)?;
    let coefficients = coefficients_with(config, data, &elements, f)?;
    let mut sum = HElement::zero(config);
    for (y, a) in elements.iter().zip(&coefficients.a) {
        sum = sum.add(&y.scale(*a));
    }
    let max_error = sum.max_function_distance(f);
    Ok(Expansion {
        sum,
        coefficients,
        max_error,
    })
}

fn dot(u: State, f1: Complex64, f2: Complex64) -> Complex64 {
    u[0] * f1 + u[1] * f2
}

/// `y = int R_lambda(x, t) f(t) rho(t) dt + (f4 phi + f3 psi) / Delta`.
pub fn resolvent_apply(config: &ProblemConfig, lambda: Complex64, f: &HElement) -> Result<Trajectory> {
    let grid = config.grid();
    f.check_grid(&grid)?;
    let phi = integrator::phi(config, lambda)?;
    let psi = integrator::psi(config, lambda)?;
    let mid = phi.len() / 2;
    let delta = integrator::wronskian(phi.ys[mid], psi.ys[mid]);
    if delta.norm() <= POLE_GUARD {
        return Err(Error::Pole {
            lambda,
            delta_abs: delta.norm(),
            nearest: crate::eigensolver::nearest_root(config, &grid, lambda.re),
        });
    }
    let alpha = config.weight.alpha();
    let gp: Vec<Complex64> = (0..f.len()).map(|i| dot(phi.ys[i], f.f1[i], f.f2[i])).collect();
    let gs: Vec<Complex64> = (0..f.len()).map(|i| dot(psi.ys[i], f.f1[i], f.f2[i])).collect();
    let left = cumulative_weighted(&grid, alpha, &gp);
    let cum_s = cumulative_weighted(&grid, alpha, &gs);
    let total_s = *cum_s.last().expect("non-empty grid");
    let ys = (0..f.len())
        .map(|i| {
            let right = total_s - cum_s[i];
            let (u, v) = (phi.ys[i], psi.ys[i]);
            let k = |c: usize| (-(v[c] * left[i] + u[c] * right) + f.f4 * u[c] + f.f3 * v[c]) / delta;
            [k(0), k(1)]
        })
        .collect();
    Ok(Trajectory { ys, ..phi })
}

/// Residuals of `B y' + Omega y = lambda rho y + rho f` and of the boundary
/// conditions `U1(y) = f3`, `U2(y) = -f4`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResolventResidual {
    pub ode: f64,
    pub left_bc: f64,
    pub right_bc: f64,
}

impl ResolventResidual {
    pub fn max(&self) -> f64 {
        self.ode.max(self.left_bc).max(self.right_bc)
    }
}

fn derivative(h: f64, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    debug_assert!(n >= 5);
    let w = 1.0 / (12.0 * h);
    (0..n)
        .map(|i| {
            w * if i == 0 {
                -25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]
            } else if i == 1 {
                -3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]
            } else if i == n - 2 {
                3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5]
            } else if i == n - 1 {
                25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4] + 3.0 * v[n - 5]
            } else {
                v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]
            }
        })
        .collect()
}

/// Plug-back check of a resolvent output using fourth-order differences on
/// each side of the jump. The potential is assumed smooth on each side.
pub fn resolvent_residual(config: &ProblemConfig, y: &Trajectory, f: &HElement) -> Result<ResolventResidual> {
    let grid = config.grid();
    f.check_grid(&grid)?;
    let lambda = y.lambda;
    let s = grid.split();
    let mut ode: f64 = 0.0;
    let alpha = config.weight.alpha();
    for (range, h, rho) in [(0..s + 1, grid.h_left(), 1.0), (s..grid.len(), grid.h_right(), alpha)] {
        let y1: Vec<Complex64> = y.ys[range.clone()].iter().map(|v| v[0]).collect();
        let y2: Vec<Complex64> = y.ys[range.clone()].iter().map(|v| v[1]).collect();
        let d1 = derivative(h, &y1);
        let d2 = derivative(h, &y2);
        for (k, i) in range.enumerate() {
            let (p, q) = config.potential.eval_unchecked(grid.xs()[i]);
            let r1 = d2[k] + p * y1[k] + q * y2[k] - lambda * rho * y1[k] - rho * f.f1[i];
            let r2 = -d1[k] + q * y1[k] - p * y2[k] - lambda * rho * y2[k] - rho * f.f2[i];
            ode = ode.max(r1.norm()).max(r2.norm());
        }
    }
    Ok(ResolventResidual {
        ode,
        left_bc: (config.boundary.u1(y.first(), lambda) - f.f3).norm(),
        right_bc: (config.boundary.u2(y.last(), lambda) + f.f4).norm(),
    })
}
