//! Problem definition: boundary coefficients, the piecewise-constant weight,
//! the potential, and the integration grid derived from them.
//!
//! The system is `B y' + Omega(x) y = lambda rho(x) y` on `[0, pi]` with
//! `B = [[0, 1], [-1, 0]]` and `Omega = [[p, q], [q, -p]]`. The weight is
//! `1` on `[0, a]` and `alpha` on `(a, pi]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Two-component complex state `(y1, y2)`.
pub type State = [Complex64; 2];

/// Default number of integration steps across `[0, pi]`.
pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Smallest accepted `grid_points`.
pub const MIN_GRID_POINTS: usize = 16;
/// Each side of the discontinuity receives at least this many steps.
pub const MIN_STEPS_PER_SIDE: usize = 64;

fn check_unit_interval(what: &'static str, x: f64) -> Result<()> {
    if (0.0..=PI).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x })
    }
}

/// Coefficients of the two eigenparameter-dependent boundary forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBoundary", into = "RawBoundary")]
pub struct BoundaryParams {
    b: [f64; 4],
    c: [f64; 4],
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct RawBoundary {
    b1: f64,
    b2: f64,
    b3: f64,
    b4: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    c4: f64,
}

impl TryFrom<RawBoundary> for BoundaryParams {
    type Error = Error;
    fn try_from(r: RawBoundary) -> Result<Self> {
        BoundaryParams::new([r.b1, r.b2, r.b3, r.b4], [r.c1, r.c2, r.c3, r.c4])
    }
}

impl From<BoundaryParams> for RawBoundary {
    fn from(p: BoundaryParams) -> Self {
        let [b1, b2, b3, b4] = p.b;
        let [c1, c2, c3, c4] = p.c;
        RawBoundary {
            b1,
            b2,
            b3,
            b4,
            c1,
            c2,
            c3,
            c4,
        }
    }
}

impl BoundaryParams {
    /// `b = (b1, b2, b3, b4)`, `c = (c1, c2, c3, c4)`. Requires
    /// `k1 = b1 b4 - b2 b3 > 0` and `k2 = c1 c4 - c2 c3 > 0`.
    pub fn new(b: [f64; 4], c: [f64; 4]) -> Result<Self> {
        if b.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("boundary coefficients must be finite".into()));
        }
        let p = Self { b, c };
        if p.k1() <= 0.0 {
            return Err(Error::InvalidConfig(format!("k1 = b1*b4 - b2*b3 = {} must be positive", p.k1())));
        }
        if p.k2() <= 0.0 {
            return Err(Error::InvalidConfig(format!("k2 = c1*c4 - c2*c3 = {} must be positive", p.k2())));
        }
        Ok(p)
    }

    pub fn b(&self) -> [f64; 4] {
        self.b
    }

    pub fn c(&self) -> [f64; 4] {
        self.c
    }

    pub fn k1(&self) -> f64 {
        self.b[0] * self.b[3] - self.b[1] * self.b[2]
    }

    pub fn k2(&self) -> f64 {
        self.c[0] * self.c[3] - self.c[1] * self.c[2]
    }

    /// `U1(y) = b1 y2(0) + b2 y1(0) - lambda (b3 y2(0) + b4 y1(0))`.
    pub fn u1(&self, y0: State, lambda: Complex64) -> Complex64 {
        let [b1, b2, _, _] = self.b;
        b1 * y0[1] + b2 * y0[0] - lambda * self.left_trace(y0)
    }

    /// `U2(y) = c1 y2(pi) + c2 y1(pi) + lambda (c3 y2(pi) + c4 y1(pi))`.
    pub fn u2(&self, y_pi: State, lambda: Complex64) -> Complex64 {
        let [c1, c2, _, _] = self.c;
        c1 * y_pi[1] + c2 * y_pi[0] + lambda * self.right_trace(y_pi)
    }

    /// `b3 y2(0) + b4 y1(0)`, the left boundary scalar of an element of the domain.
    pub fn left_trace(&self, y0: State) -> Complex64 {
        self.b[2] * y0[1] + self.b[3] * y0[0]
    }

    /// `c3 y2(pi) + c4 y1(pi)`, the right boundary scalar.
    pub fn right_trace(&self, y_pi: State) -> Complex64 {
        self.c[2] * y_pi[1] + self.c[3] * y_pi[0]
    }

    /// `phi(0, lambda) = (lambda b3 - b1, b2 - lambda b4)`.
    pub fn phi_init(&self, lambda: Complex64) -> State {
        let [b1, b2, b3, b4] = self.b;
        [lambda * b3 - b1, b2 - lambda * b4]
    }

    /// `psi(pi, lambda) = (-c1 - lambda c3, c2 + lambda c4)`.
    pub fn psi_init(&self, lambda: Complex64) -> State {
        let [c1, c2, c3, c4] = self.c;
        [-c1 - lambda * c3, c2 + lambda * c4]
    }

    /// `C(0) = (-b3 / k1, b4 / k1)`.
    pub fn c_init(&self) -> State {
        let k1 = self.k1();
        [Complex64::new(-self.b[2] / k1, 0.0), Complex64::new(self.b[3] / k1, 0.0)]
    }
}

/// Piecewise-constant weight with a single jump at `a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeight", into = "RawWeight")]
pub struct Weight {
    alpha: f64,
    a: f64,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct RawWeight {
    alpha: f64,
    a: f64,
}

impl TryFrom<RawWeight> for Weight {
    type Error = Error;
    fn try_from(r: RawWeight) -> Result<Self> {
        Weight::new(r.alpha, r.a)
    }
}

impl From<Weight> for RawWeight {
    fn from(w: Weight) -> Self {
        RawWeight { alpha: w.alpha, a: w.a }
    }
}

impl Weight {
    /// `alpha > 0`, `0 < a < pi`. `alpha = 1` is accepted and gives the
    /// continuous-weight problem used by the closed-form oracles.
    pub fn new(alpha: f64, a: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidConfig(format!("alpha = {alpha} must be positive")));
        }
        if !(a > 0.0 && a < PI) {
            return Err(Error::InvalidConfig(format!("jump position a = {a} must lie in (0, pi)")));
        }
        Ok(Self { alpha, a })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `true` when the weight actually jumps.
    pub fn is_discontinuous(&self) -> bool {
        self.alpha != 1.0
    }

    /// Optical length of `[0, pi]`.
    pub fn mu_pi(&self) -> f64 {
        self.alpha * PI - self.alpha * self.a + self.a
    }
}

/// Optical length `mu(x)`: `x` up to `a`, then `alpha x - alpha a + a`.
pub fn mu(x: f64, w: &Weight) -> Result<f64> {
    check_unit_interval("x", x)?;
    Ok(if x <= w.a { x } else { w.alpha * x - w.alpha * w.a + w.a })
}

/// `rho(x)`; the closed interval `[0, a]` carries weight 1.
pub fn rho_at(x: f64, w: &Weight) -> Result<f64> {
    check_unit_interval("x", x)?;
    Ok(if x <= w.a { 1.0 } else { w.alpha })
}

/// How the potential pair `(p, q)` is parametrized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// Polynomials in `x`, coefficients in ascending order.
    ClosedForm,
    /// Equal-width segments on `[0, pi]`, right-continuous at the joins.
    PiecewiseConstant,
    /// Cosine modes: `sum_k c_k cos(k x)`, `k = 0, 1, ...`.
    Cosine,
}

/// Real potential pair `(p, q)` in one of three finite parametrizations.
/// Empty parameter sequences mean the zero function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub struct PotentialSpec {
    kind: PotentialKind,
    p: Vec<f64>,
    q: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawPotential {
    kind: PotentialKind,
    #[serde(default)]
    p_params: Vec<f64>,
    #[serde(default)]
    q_params: Vec<f64>,
}

impl TryFrom<RawPotential> for PotentialSpec {
    type Error = Error;
    fn try_from(r: RawPotential) -> Result<Self> {
        PotentialSpec::new(r.kind, r.p_params, r.q_params)
    }
}

impl From<PotentialSpec> for RawPotential {
    fn from(p: PotentialSpec) -> Self {
        RawPotential {
            kind: p.kind,
            p_params: p.p,
            q_params: p.q,
        }
    }
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.iter().chain(q.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("potential parameters must be finite".into()));
        }
        Ok(Self { kind, p, q })
    }

    pub fn zero() -> Self {
        Self {
            kind: PotentialKind::ClosedForm,
            p: Vec::new(),
            q: Vec::new(),
        }
    }

    /// Constant `p` and `q`.
    pub fn constant(p: f64, q: f64) -> Self {
        Self {
            kind: PotentialKind::PiecewiseConstant,
            p: vec![p],
            q: vec![q],
        }
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn p_params(&self) -> &[f64] {
        &self.p
    }

    pub fn q_params(&self) -> &[f64] {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.p.iter().chain(self.q.iter()).all(|&v| v == 0.0)
    }

    fn eval_one(&self, coeffs: &[f64], x: f64) -> f64 {
        if coeffs.is_empty() {
            return 0.0;
        }
        match self.kind {
            PotentialKind::ClosedForm => coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            PotentialKind::PiecewiseConstant => {
                let m = coeffs.len();
                let idx = ((x / PI) * m as f64).floor();
                let idx = (idx.max(0.0) as usize).min(m - 1);
                coeffs[idx]
            }
            PotentialKind::Cosine => coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * (k as f64 * x).cos())
                .sum(),
        }
    }

    /// `(p(x), q(x))` without a domain check; used inside the integrator.
    pub(crate) fn eval_unchecked(&self, x: f64) -> (f64, f64) {
        (self.eval_one(&self.p, x), self.eval_one(&self.q, x))
    }

    pub fn p_at(&self, x: f64) -> Result<f64> {
        check_unit_interval("x", x)?;
        Ok(self.eval_one(&self.p, x))
    }

    pub fn q_at(&self, x: f64) -> Result<f64> {
        check_unit_interval("x", x)?;
        Ok(self.eval_one(&self.q, x))
    }
}

/// `Omega(x) = sigma2 p(x) + sigma3 q(x) = [[p, q], [q, -p]]`.
pub fn omega_at(x: f64, pot: &PotentialSpec) -> Result<[[f64; 2]; 2]> {
    check_unit_interval("x", x)?;
    let (p, q) = pot.eval_unchecked(x);
    Ok([[p, q], [q, -p]])
}

/// Full problem definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct ProblemConfig {
    pub boundary: BoundaryParams,
    pub weight: Weight,
    pub potential: PotentialSpec,
    grid_points: usize,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawConfig {
    boundary: BoundaryParams,
    weight: Weight,
    potential: PotentialSpec,
    #[serde(default = "default_grid_points")]
    grid_points: usize,
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

impl TryFrom<RawConfig> for ProblemConfig {
    type Error = Error;
    fn try_from(r: RawConfig) -> Result<Self> {
        ProblemConfig::new(r.boundary, r.weight, r.potential, r.grid_points)
    }
}

impl From<ProblemConfig> for RawConfig {
    fn from(c: ProblemConfig) -> Self {
        RawConfig {
            boundary: c.boundary,
            weight: c.weight,
            potential: c.potential,
            grid_points: c.grid_points,
        }
    }
}

impl ProblemConfig {
    pub fn new(boundary: BoundaryParams, weight: Weight, potential: PotentialSpec, grid_points: usize) -> Result<Self> {
        if grid_points < MIN_GRID_POINTS {
            return Err(Error::InvalidConfig(format!(
                "grid_points = {grid_points} is below the minimum of {MIN_GRID_POINTS}"
            )));
        }
        Ok(Self {
            boundary,
            weight,
            potential,
            grid_points,
        })
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    pub fn with_grid_points(&self, grid_points: usize) -> Result<Self> {
        Self::new(self.boundary, self.weight, self.potential.clone(), grid_points)
    }

    pub fn with_potential(&self, potential: PotentialSpec) -> Self {
        Self {
            potential,
            ..self.clone()
        }
    }

    /// Integration grid with `a` as an exact node.
    pub fn grid(&self) -> Grid {
        Grid::new(&self.weight, self.grid_points)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Short hex digest of the compact JSON text.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Node-aligned grid on `[0, pi]`: uniform on `[0, a]` and on `[a, pi]`
/// separately, with an even number of steps on each side.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    xs: Vec<f64>,
    split: usize,
    a: f64,
}

fn even_at_least(n: usize, min: usize) -> usize {
    let n = n.max(min);
    n + (n % 2)
}

impl Grid {
    pub fn new(w: &Weight, total_steps: usize) -> Self {
        let a = w.a();
        let left = even_at_least((total_steps as f64 * a / PI).round() as usize, MIN_STEPS_PER_SIDE);
        let right = even_at_least(total_steps.saturating_sub(left), MIN_STEPS_PER_SIDE);
        let h_left = a / left as f64;
        let h_right = (PI - a) / right as f64;
        let mut xs = Vec::with_capacity(left + right + 1);
        xs.extend((0..left).map(|i| i as f64 * h_left));
        xs.push(a);
        xs.extend((1..right).map(|i| a + i as f64 * h_right));
        xs.push(PI);
        Self { xs, split: left, a }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Index of the node at `x = a`.
    pub fn split(&self) -> usize {
        self.split
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn steps_left(&self) -> usize {
        self.split
    }

    pub fn steps_right(&self) -> usize {
        self.xs.len() - 1 - self.split
    }

    pub fn h_left(&self) -> f64 {
        self.a / self.steps_left() as f64
    }

    pub fn h_right(&self) -> f64 {
        (PI - self.a) / self.steps_right() as f64
    }

    /// Index of the node equal to `x` (within 1e-12), if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let i = self.xs.partition_point(|&v| v < x - 1e-12);
        (i < self.xs.len() && (self.xs[i] - x).abs() <= 1e-12).then_some(i)
    }
}
