//! Recovery of a finitely parametrised potential from spectral data
//! `{lambda_n, alpha_n}` with the boundary coefficients and the weight known.

mod simplex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use simplex::{Minimum, NelderMead, StopReason, TracePoint};

use crate::charfn::{asymptotic_spacing, delta_fast};
use crate::eigensolver::{alpha_from_phi, find_eigenvalues, refine_root, SpectralDataSet};
use crate::error::{Error, Result};
use crate::integrator::{propagate_on, Endpoint, StepPlan};
use crate::model::{BoundaryParams, Grid, PotentialKind, PotentialSpec, ProblemConfig, Weight};
use crate::par::{self, Execution};

/// Misfit contribution of a target eigenvalue without a matching root.
pub const MISS_PENALTY: f64 = 1e3;

/// Potential family with `m` coefficients for each of `p` and `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    PiecewiseConstant { m: usize },
    Cosine { m: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::PiecewiseConstant { m } | Basis::Cosine { m } => 2 * m,
        }
    }

    /// Parameters are `[p_1 .. p_m, q_1 .. q_m]`.
    pub fn potential(&self, params: &[f64]) -> Result<PotentialSpec> {
        if params.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: params.len(),
            });
        }
        let (p, q) = params.split_at(self.dim() / 2);
        let kind = match self {
            Basis::PiecewiseConstant { .. } => PotentialKind::PiecewiseConstant,
            Basis::Cosine { .. } => PotentialKind::Cosine,
        };
        PotentialSpec::new(kind, p.to_vec(), q.to_vec())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `w_n = 1 / (1 + n^2)`; unlabelled roots use `lambda / spacing` for `n`.
    #[default]
    InverseSquare,
    Uniform,
}

/// Discretisation used by forward solves inside the objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardAccuracy {
    pub grid_points: usize,
    /// Phase bound per RK4 substep.
    pub max_phase: f64,
}

impl Default for ForwardAccuracy {
    fn default() -> Self {
        Self {
            grid_points: 256,
            max_phase: 0.05,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InverseProblem {
    pub target: SpectralDataSet,
    pub basis: Basis,
    pub boundary: BoundaryParams,
    pub weight: Weight,
    pub weighting: Weighting,
    pub accuracy: ForwardAccuracy,
}

impl InverseProblem {
    pub fn new(target: SpectralDataSet, basis: Basis, boundary: BoundaryParams, weight: Weight) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::EmptyData);
        }
        if basis.dim() == 0 || basis.dim() > 2 * target.len() {
            return Err(Error::InvalidConfig(format!(
                "{} parameters for {} scalar data",
                basis.dim(),
                2 * target.len()
            )));
        }
        Ok(Self {
            target,
            basis,
            boundary,
            weight,
            weighting: Weighting::default(),
            accuracy: ForwardAccuracy::default(),
        })
    }

    pub fn with_weighting(mut self, weighting: Weighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn with_accuracy(mut self, accuracy: ForwardAccuracy) -> Self {
        self.accuracy = accuracy;
        self
    }

    pub fn config(&self, params: &[f64]) -> Result<ProblemConfig> {
        ProblemConfig::new(
            self.boundary,
            self.weight,
            self.basis.potential(params)?,
            self.accuracy.grid_points,
        )
    }

    fn weights(&self, config: &ProblemConfig) -> Vec<f64> {
        let spacing = asymptotic_spacing(config);
        self.target
            .data
            .iter()
            .map(|d| match self.weighting {
                Weighting::Uniform => 1.0,
                Weighting::InverseSquare => {
                    let n = d.n.map(|n| n as f64).unwrap_or(d.lambda_n / spacing);
                    1.0 / (1.0 + n * n)
                }
            })
            .collect()
    }
}

/// Objective value; `misses > 0` means some target eigenvalue had no
/// nearby root and was charged [`MISS_PENALTY`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MisfitValue {
    pub value: f64,
    pub misses: usize,
}

impl MisfitValue {
    pub fn penalized(&self) -> bool {
        self.misses > 0
    }
}

/// Root of `Delta` nearest to `target`, searched no farther than `reach`.
fn root_near(config: &ProblemConfig, grid: &Grid, max_phase: f64, target: f64, reach: f64) -> Result<Option<f64>> {
    let at = |x: f64| -> Result<f64> {
        let l = Complex64::new(x, 0.0);
        let plan = StepPlan::with_max_phase(config, grid, l, max_phase);
        Ok(delta_fast(config, grid, plan, l)?.re)
    };
    let f0 = at(target)?;
    if f0 == 0.0 {
        return Ok(Some(target));
    }
    let mut width = (0.02 * asymptotic_spacing(config)).min(reach);
    loop {
        let (a, b) = (target - width, target + width);
        let (fa, fb) = (at(a)?, at(b)?);
        let left = (fa * f0 <= 0.0).then_some((a, target, fa, f0));
        let right = (fb * f0 <= 0.0).then_some((target, b, f0, fb));
        let mut found: Vec<f64> = Vec::new();
        for (lo, hi, flo, fhi) in left.into_iter().chain(right) {
            found.push(brent_with(config, grid, max_phase, lo, hi, flo, fhi)?);
        }
        if let Some(r) = found.into_iter().min_by(|x, y| (x - target).abs().total_cmp(&(y - target).abs())) {
            return Ok(Some(r));
        }
        if width >= reach {
            return Ok(None);
        }
        width = (width * 3.0).min(reach);
    }
}

fn brent_with(config: &ProblemConfig, grid: &Grid, max_phase: f64, a: f64, b: f64, fa: f64, fb: f64) -> Result<f64> {
    if max_phase == crate::integrator::MAX_PHASE_PER_STEP {
        return refine_root(config, grid, a, b, fa, fb);
    }
    let scale = 1.0 + a.abs().max(b.abs());
    let root = crate::roots::brent(
        |x| {
            let l = Complex64::new(x, 0.0);
            let plan = StepPlan::with_max_phase(config, grid, l, max_phase);
            Ok(delta_fast(config, grid, plan, l)?.re)
        },
        a,
        b,
        fa,
        fb,
        1e-12 * scale,
        0.0,
    )?;
    Ok(root.x)
}

/// `J = sum w_n [(lambda_n(params) - lambda_n*)^2 + (log alpha_n(params) - log alpha_n*)^2]`.
pub fn misfit(problem: &InverseProblem, params: &[f64]) -> Result<MisfitValue> {
    misfit_with(problem, params, Execution::default())
}

pub fn misfit_with(problem: &InverseProblem, params: &[f64], exec: Execution) -> Result<MisfitValue> {
    let config = problem.config(params)?;
    let grid = config.grid();
    let weights = problem.weights(&config);
    let data = &problem.target.data;
    let reach: Vec<f64> = (0..data.len())
        .map(|i| {
            let prev = i.checked_sub(1).map(|j| data[i].lambda_n - data[j].lambda_n);
            let next = data.get(i + 1).map(|d| d.lambda_n - data[i].lambda_n);
            let gap = match (prev, next) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => asymptotic_spacing(&config),
            };
            0.45 * gap
        })
        .collect();
    let idx: Vec<usize> = (0..data.len()).collect();
    let max_phase = problem.accuracy.max_phase;
    let terms = par::map(exec, &idx, |&i| -> Result<Option<f64>> {
        let d = &data[i];
        let Some(r) = root_near(&config, &grid, max_phase, d.lambda_n, reach[i])? else {
            return Ok(None);
        };
        let l = Complex64::new(r, 0.0);
        let plan = StepPlan::with_max_phase(&config, &grid, l, max_phase);
        let phi = propagate_on(&config, &grid, plan, l, config.boundary.phi_init(l), Endpoint::Left)?;
        let alpha = alpha_from_phi(&config, &grid, &phi);
        Ok(Some((r - d.lambda_n).powi(2) + (alpha.ln() - d.alpha_n.ln()).powi(2)))
    });
    let mut value = 0.0;
    let mut misses = 0;
    for (w, t) in weights.iter().zip(terms) {
        match t {
            Ok(Some(v)) => value += w * v,
            // an unsolvable forward problem is also a miss
            Ok(None) | Err(Error::Overflow { .. }) => {
                value += w * MISS_PENALTY;
                misses += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MisfitValue { value, misses })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionResult {
    pub parameters: Vec<f64>,
    pub misfit: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub penalized: bool,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

/// Minimises [`misfit`] from `init` with Nelder–Mead.
pub fn reconstruct(problem: &InverseProblem, init: &[f64], optimizer: &NelderMead) -> Result<ReconstructionResult> {
    if init.len() != problem.basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.basis.dim(),
            found: init.len(),
        });
    }
    // configuration errors surface here rather than as penalties
    problem.config(init)?;
    let objective = |x: &[f64]| match misfit_with(problem, x, Execution::Sequential) {
        Ok(m) => m.value,
        Err(_) => f64::INFINITY,
    };
    let min = optimizer.minimize(&objective, init, Execution::default());
    let check = misfit(problem, &min.x)?;
    Ok(ReconstructionResult {
        parameters: min.x,
        misfit: check.value,
        iterations: min.iterations,
        evaluations: min.evaluations,
        converged: min.stop != StopReason::Budget,
        stop_reason: min.stop,
        penalized: check.penalized(),
        trace: min.trace,
    })
}

/// Forward map `config -> {lambda_n, alpha_n}` over `|n| <= big_n`.
pub fn synthesize_data(config: &ProblemConfig, big_n: i64) -> Result<SpectralDataSet> {
    find_eigenvalues(config, -big_n, big_n)
}

/// Misfit-style distance between the data of two problems sharing boundary
/// coefficients and weight. Data are paired in increasing order.
pub fn uniqueness_probe(a: &ProblemConfig, b: &ProblemConfig, big_n: i64) -> Result<f64> {
    if a.boundary != b.boundary || a.weight != b.weight {
        return Err(Error::Precondition("probe needs shared boundary coefficients and weight".into()));
    }
    let da = synthesize_data(a, big_n)?;
    let db = synthesize_data(b, big_n)?;
    data_distance(&da, &db, asymptotic_spacing(a))
}

fn data_distance(a: &SpectralDataSet, b: &SpectralDataSet, spacing: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| {
            let n = 0.5 * (x.lambda_n + y.lambda_n) / spacing;
            ((x.lambda_n - y.lambda_n).powi(2) + (x.alpha_n.ln() - y.alpha_n.ln()).powi(2)) / (1.0 + n * n)
        })
        .sum())
}

/// Optimiser settings read by the `invert` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseConfig {
    pub basis: Basis,
    pub init: Vec<f64>,
    #[serde(default)]
    pub optimizer: Option<NelderMead>,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default)]
    pub accuracy: Option<ForwardAccuracy>,
}

impl InverseConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
