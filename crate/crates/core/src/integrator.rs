//! Fixed-step RK4 propagation of the Dirac system at a fixed spectral
//! parameter. The two sides of the weight jump are integrated on their own
//! uniform grids, so `x = a` is always a node and the state is shared there.
//!
//! In components the system reads
//!
//! ```text
//! y1' = q y1 - p y2 - lambda rho y2
//! y2' = lambda rho y1 - p y1 - q y2
//! ```

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Grid, ProblemConfig, State};
use crate::output::fmt_f64;

/// Largest phase `|lambda| rho h` advanced by a single RK4 substep. Grid
/// cells are subdivided until every substep satisfies it.
pub const MAX_PHASE_PER_STEP: f64 = 0.005;

/// Where the initial data is imposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    /// At `x = 0`, integrating towards `pi`.
    Left,
    /// At `x = pi`, integrating towards `0`.
    Right,
}

/// Number of RK4 substeps per grid cell on each side of the jump.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepPlan {
    pub substeps_left: usize,
    pub substeps_right: usize,
}

impl StepPlan {
    pub fn for_lambda(config: &ProblemConfig, grid: &Grid, lambda: Complex64) -> Self {
        Self::with_max_phase(config, grid, lambda, MAX_PHASE_PER_STEP)
    }

    /// Plan with a custom phase bound per substep.
    pub fn with_max_phase(config: &ProblemConfig, grid: &Grid, lambda: Complex64, max_phase: f64) -> Self {
        let norm = lambda.norm();
        let sub = |h: f64, rho: f64| -> usize {
            let phase = norm * rho * h;
            ((phase / max_phase).ceil() as usize).max(1)
        };
        Self {
            substeps_left: sub(grid.h_left(), 1.0),
            substeps_right: sub(grid.h_right(), config.weight.alpha()),
        }
    }
}

/// Solution of the system sampled on the configuration grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub lambda: Complex64,
    pub xs: Vec<f64>,
    pub ys: Vec<State>,
    /// Index of the node at `x = a`.
    pub split: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn first(&self) -> State {
        self.ys[0]
    }

    pub fn last(&self) -> State {
        *self.ys.last().expect("trajectory is non-empty")
    }

    /// Value at a grid node within 1e-12 of `x`.
    pub fn at(&self, x: f64) -> Option<State> {
        let i = self.xs.partition_point(|&v| v < x - 1e-12);
        (i < self.xs.len() && (self.xs[i] - x).abs() <= 1e-12).then(|| self.ys[i])
    }

    pub fn scaled(&self, s: Complex64) -> Trajectory {
        Trajectory {
            ys: self.ys.iter().map(|y| [y[0] * s, y[1] * s]).collect(),
            ..self.clone()
        }
    }

    /// Max over the grid of `max(|y1 - z1|, |y2 - z2|)`.
    pub fn max_distance(&self, other: &Trajectory) -> f64 {
        self.ys
            .iter()
            .zip(&other.ys)
            .map(|(a, b)| (a[0] - b[0]).norm().max((a[1] - b[1]).norm()))
            .fold(0.0, f64::max)
    }

    /// Columns `x, re_y1, im_y1, re_y2, im_y2`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,re_y1,im_y1,re_y2,im_y2")?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(*x),
                fmt_f64(y[0].re),
                fmt_f64(y[0].im),
                fmt_f64(y[1].re),
                fmt_f64(y[1].im)
            )?;
        }
        Ok(())
    }
}

/// `W[u, v](x) = u2 v1 - u1 v2`.
pub fn wronskian(u: State, v: State) -> Complex64 {
    u[1] * v[0] - u[0] * v[1]
}

#[inline]
fn rhs(p: f64, q: f64, lr: Complex64, y: State) -> State {
    [q * y[0] - (p + lr) * y[1], (lr - p) * y[0] - q * y[1]]
}

/// Walks the grid from the chosen endpoint, calling `visit(node, state)`
/// at every node (including the starting one). Returns the state at the
/// far end.
pub(crate) fn integrate<F: FnMut(usize, State)>(
    config: &ProblemConfig,
    grid: &Grid,
    plan: StepPlan,
    lambda: Complex64,
    init: State,
    endpoint: Endpoint,
    mut visit: F,
) -> Result<State> {
    if !init.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::Precondition("initial state must be finite".into()));
    }
    let xs = grid.xs();
    let last = xs.len() - 1;
    let split = grid.split();
    let alpha = config.weight.alpha();
    let pot = &config.potential;

    let mut y = init;
    let cells: Box<dyn Iterator<Item = usize>> = match endpoint {
        Endpoint::Left => {
            visit(0, y);
            Box::new(0..last)
        }
        Endpoint::Right => {
            visit(last, y);
            Box::new((0..last).rev())
        }
    };

    for cell in cells {
        let (lo, hi) = (xs[cell], xs[cell + 1]);
        let (rho, k) = if cell < split {
            (1.0, plan.substeps_left)
        } else {
            (alpha, plan.substeps_right)
        };
        let lr = lambda * rho;
        let (start, end, target) = match endpoint {
            Endpoint::Left => (lo, hi, cell + 1),
            Endpoint::Right => (hi, lo, cell),
        };
        let h = (end - start) / k as f64;
        // Keep stage abscissae strictly inside the cell so a jump of a
        // piecewise potential at a node is seen from the correct side.
        let eps = 1e-13 * (hi - lo).abs().max(1.0);
        let eval = |x: f64| pot.eval_unchecked(x.clamp(lo + eps, hi - eps));
        let mut x = start;
        let mut pq0 = eval(x);
        for s in 0..k {
            let x1 = if s + 1 == k { end } else { start + (s + 1) as f64 * h };
            let xm = 0.5 * (x + x1);
            let pqm = eval(xm);
            let pq1 = eval(x1);
            let h = x1 - x;
            let k1 = rhs(pq0.0, pq0.1, lr, y);
            let y2 = [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]];
            let k2 = rhs(pqm.0, pqm.1, lr, y2);
            let y3 = [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]];
            let k3 = rhs(pqm.0, pqm.1, lr, y3);
            let y4 = [y[0] + h * k3[0], y[1] + h * k3[1]];
            let k4 = rhs(pq1.0, pq1.1, lr, y4);
            let w = h / 6.0;
            y = [
                y[0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            x = x1;
            pq0 = pq1;
        }
        if !y.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Overflow { lambda });
        }
        visit(target, y);
    }
    Ok(y)
}

/// Propagates `init` across `[0, pi]` from the chosen endpoint.
pub fn propagate(config: &ProblemConfig, lambda: Complex64, init: State, endpoint: Endpoint) -> Result<Trajectory> {
    let grid = config.grid();
    let plan = StepPlan::for_lambda(config, &grid, lambda);
    propagate_on(config, &grid, plan, lambda, init, endpoint)
}

pub(crate) fn propagate_on(
    config: &ProblemConfig,
    grid: &Grid,
    plan: StepPlan,
    lambda: Complex64,
    init: State,
    endpoint: Endpoint,
) -> Result<Trajectory> {
    let zero = Complex64::new(0.0, 0.0);
    let mut ys = vec![[zero, zero]; grid.len()];
    integrate(config, grid, plan, lambda, init, endpoint, |i, y| ys[i] = y)?;
    Ok(Trajectory {
        lambda,
        xs: grid.xs().to_vec(),
        ys,
        split: grid.split(),
    })
}

/// State at the far endpoint only.
pub(crate) fn propagate_end(
    config: &ProblemConfig,
    grid: &Grid,
    plan: StepPlan,
    lambda: Complex64,
    init: State,
    endpoint: Endpoint,
) -> Result<State> {
    integrate(config, grid, plan, lambda, init, endpoint, |_, _| {})
}

/// Solution with `phi(0, lambda) = (lambda b3 - b1, b2 - lambda b4)`.
pub fn phi(config: &ProblemConfig, lambda: Complex64) -> Result<Trajectory> {
    propagate(config, lambda, config.boundary.phi_init(lambda), Endpoint::Left)
}

/// Solution with `psi(pi, lambda) = (-c1 - lambda c3, c2 + lambda c4)`.
pub fn psi(config: &ProblemConfig, lambda: Complex64) -> Result<Trajectory> {
    propagate(config, lambda, config.boundary.psi_init(lambda), Endpoint::Right)
}

/// Solution with `C(0, lambda) = (-b3 / k1, b4 / k1)`.
pub fn solution_c(config: &ProblemConfig, lambda: Complex64) -> Result<Trajectory> {
    propagate(config, lambda, config.boundary.c_init(), Endpoint::Left)
}

/// Relative variation of `W[u, v]` over the grid, measured against its
/// value at the grid midpoint.
pub fn wronskian_spread(u: &Trajectory, v: &Trajectory) -> f64 {
    let mid = u.len() / 2;
    let w_mid = wronskian(u.ys[mid], v.ys[mid]);
    let scale = w_mid.norm().max(f64::MIN_POSITIVE);
    u.ys
        .iter()
        .zip(&v.ys)
        .map(|(a, b)| (wronskian(*a, *b) - w_mid).norm() / scale)
        .fold(0.0, f64::max)
}
