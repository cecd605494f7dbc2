//! Real eigenvalues of the boundary value problem together with their
//! norming constants `alpha_n` and proportionality factors `beta_n`
//! (`psi(x, lambda_n) = beta_n phi(x, lambda_n)`).
//!
//! # Indexing
//!
//! Far from the origin every half-spacing window around the asymptotic
//! seed `lambda~_n` holds exactly one zero of `Delta`; those windows anchor
//! the labels. Near the origin `Delta` has two more zeros than there are
//! seeds (its leading term is `lambda^2 chi(lambda)`). The central block is
//! labelled by an order-preserving assignment to the predicted positions
//! `lambda~_n + c / n`, with `c` taken from the anchored roots; the roots
//! left over are kept as *surplus* data with `n = None`. Surplus roots are
//! genuine eigenvalues and take part in every sum over the spectrum.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::{asymptotic_seed, asymptotic_spacing, delta_dot_with, delta_fast, seed_offset};
use crate::error::{Error, Result};
use crate::expansion::{eigen_element, inner};
use crate::integrator::{propagate_on, Endpoint, StepPlan, Trajectory};
use crate::model::{Grid, ProblemConfig};
use crate::output::{fmt_f64, fmt_opt};
use crate::par::{self, Execution};
use crate::quadrature::integrate_weighted;
use crate::roots::brent;

/// Labels with `|n| <= CENTRAL_BLOCK` are never used as anchors.
const CENTRAL_BLOCK: i64 = 3;
/// Extra labels scanned beyond the requested range on either side.
const PADDING: i64 = 2;
/// Samples per window near the origin and far from it.
const FINE_SAMPLES: usize = 64;
const COARSE_SAMPLES: usize = 8;
/// Largest accepted relative residual of the `psi = beta phi` fit.
pub const BETA_RESIDUAL_TOL: f64 = 1e-5;
/// Below this `|Delta'(lambda_n)|` the datum carries a multiplicity warning.
pub const SIMPLE_ROOT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDatum {
    /// Asymptotic label, `None` for a surplus root.
    pub n: Option<i64>,
    pub lambda_n: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
    pub delta_dot_n: f64,
    /// `lambda~_n`, absent for surplus roots.
    pub seed: Option<f64>,
    /// `lambda_n - lambda~_n`.
    pub seed_gap: Option<f64>,
    /// Relative residual of the `psi = beta phi` least-squares fit.
    pub beta_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl SpectralDatum {
    pub fn is_surplus(&self) -> bool {
        self.n.is_none()
    }

    /// `|alpha_n beta_n - Delta'(lambda_n)| / |Delta'(lambda_n)|`.
    pub fn norming_defect(&self) -> f64 {
        (self.alpha_n * self.beta_n - self.delta_dot_n).abs() / self.delta_dot_n.abs()
    }
}

/// Eigen-data ordered by increasing `lambda_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDataSet {
    pub fingerprint: String,
    pub n_min: i64,
    pub n_max: i64,
    /// Summation order used by partial sums over the set.
    pub ordering: String,
    pub data: Vec<SpectralDatum>,
}

impl SpectralDataSet {
    pub fn new(fingerprint: String, n_min: i64, n_max: i64, mut data: Vec<SpectralDatum>) -> Result<Self> {
        data.sort_by(|a, b| a.lambda_n.total_cmp(&b.lambda_n));
        let set = Self {
            fingerprint,
            n_min,
            n_max,
            ordering: "symmetric".into(),
            data,
        };
        set.validate()?;
        Ok(set)
    }

    /// Strictly increasing eigenvalues, no near-duplicates, increasing labels.
    pub fn validate(&self) -> Result<()> {
        for w in self.data.windows(2) {
            if w[1].lambda_n - w[0].lambda_n <= 1e-8 {
                return Err(Error::InvalidConfig(format!(
                    "eigenvalues {} and {} are not strictly increasing",
                    w[0].lambda_n, w[1].lambda_n
                )));
            }
        }
        let labels: Vec<i64> = self.data.iter().filter_map(|d| d.n).collect();
        if labels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("labels must increase with lambda".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn labeled(&self, n: i64) -> Option<&SpectralDatum> {
        self.data.iter().find(|d| d.n == Some(n))
    }

    pub fn surplus(&self) -> impl Iterator<Item = &SpectralDatum> {
        self.data.iter().filter(|d| d.is_surplus())
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.data.iter().map(|d| d.lambda_n).collect()
    }

    /// Largest `N` such that every label in `[-N, N]` is present.
    pub fn symmetric_extent(&self) -> Option<i64> {
        let mut n = 0;
        self.labeled(0)?;
        while self.labeled(n + 1).is_some() && self.labeled(-n - 1).is_some() {
            n += 1;
        }
        Some(n)
    }

    /// Symmetric truncation: labels `|n| <= big_n` plus the surplus roots
    /// lying strictly between `lambda_{-N}` and `lambda_N`.
    pub fn truncated(&self, big_n: i64) -> SpectralDataSet {
        let lo = self.labeled(-big_n).map(|d| d.lambda_n);
        let hi = self.labeled(big_n).map(|d| d.lambda_n);
        let data = self
            .data
            .iter()
            .filter(|d| match d.n {
                Some(n) => n.abs() <= big_n,
                None => matches!((lo, hi), (Some(l), Some(h)) if d.lambda_n > l && d.lambda_n < h),
            })
            .cloned()
            .collect();
        SpectralDataSet {
            fingerprint: self.fingerprint.clone(),
            n_min: -big_n,
            n_max: big_n,
            ordering: self.ordering.clone(),
            data,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("data set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: SpectralDataSet = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    /// Columns `n, lambda, alpha, beta, delta_dot, seed, seed_gap`; labelled
    /// data only.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_rows(out, self.data.iter().filter(|d| !d.is_surplus()))
    }

    /// Same columns for the surplus roots (`n`, `seed`, `seed_gap` empty).
    pub fn write_surplus_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_rows(out, self.surplus())
    }
}

fn write_rows<'a, W: Write>(mut out: W, rows: impl Iterator<Item = &'a SpectralDatum>) -> std::io::Result<()> {
    writeln!(out, "n,lambda,alpha,beta,delta_dot,seed,seed_gap")?;
    for d in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            d.n.map(|n| n.to_string()).unwrap_or_default(),
            fmt_f64(d.lambda_n),
            fmt_f64(d.alpha_n),
            fmt_f64(d.beta_n),
            fmt_f64(d.delta_dot_n),
            fmt_opt(d.seed),
            fmt_opt(d.seed_gap)
        )?;
    }
    Ok(())
}

/// Result of a search that may have missed some labels.
#[derive(Clone, Debug)]
pub struct EigenSearch {
    pub data: SpectralDataSet,
    pub missing: Vec<i64>,
}

pub fn find_eigenvalues(config: &ProblemConfig, n_min: i64, n_max: i64) -> Result<SpectralDataSet> {
    find_eigenvalues_with(config, n_min, n_max, Execution::default())
}

pub fn find_eigenvalues_with(config: &ProblemConfig, n_min: i64, n_max: i64, exec: Execution) -> Result<SpectralDataSet> {
    let search = search_eigenvalues(config, n_min, n_max, exec)?;
    match search.missing.first() {
        Some(&n) => Err(Error::MissingRoot { n }),
        None => Ok(search.data),
    }
}

fn delta_real(config: &ProblemConfig, grid: &Grid, lambda: f64) -> Result<f64> {
    let l = Complex64::new(lambda, 0.0);
    let plan = StepPlan::for_lambda(config, grid, l);
    Ok(delta_fast(config, grid, plan, l)?.re)
}

/// Refines a bracketed zero of `Delta` on the real line.
pub(crate) fn refine_root(config: &ProblemConfig, grid: &Grid, a: f64, b: f64, fa: f64, fb: f64) -> Result<f64> {
    let scale = 1.0 + a.abs().max(b.abs());
    let root = brent(
        |x| delta_real(config, grid, x),
        a,
        b,
        fa,
        fb,
        1e-14 * scale,
        1e-13 * scale * scale,
    )?;
    Ok(root.x)
}

/// All real zeros of `Delta` in `[lo, hi]`, detected as sign changes on
/// the given sample points.
fn zeros_on_samples(config: &ProblemConfig, grid: &Grid, xs: &[f64], exec: Execution) -> Result<Vec<f64>> {
    let values: Vec<f64> = par::map(exec, xs, |&x| delta_real(config, grid, x)).into_iter().collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for i in 0..xs.len() {
        if values[i] == 0.0 {
            brackets.push((xs[i], xs[i], 0.0, 0.0));
        } else if i + 1 < xs.len() && values[i + 1] != 0.0 && values[i] * values[i + 1] < 0.0 {
            brackets.push((xs[i], xs[i + 1], values[i], values[i + 1]));
        }
    }
    let mut roots: Vec<f64> = par::map(exec, &brackets, |&(a, b, fa, fb)| {
        if a == b {
            Ok(a)
        } else {
            refine_root(config, grid, a, b, fa, fb)
        }
    })
    .into_iter()
    .collect::<Result<_>>()?;
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-8 * (1.0 + b.abs()));
    Ok(roots)
}

/// Real zero of `Delta` closest to `x`, searched within one asymptotic
/// spacing on either side.
pub(crate) fn nearest_root(config: &ProblemConfig, grid: &Grid, x: f64) -> Option<f64> {
    let s = asymptotic_spacing(config);
    let xs: Vec<f64> = (0..=64).map(|i| x - s + 2.0 * s * i as f64 / 64.0).collect();
    let roots = zeros_on_samples(config, grid, &xs, Execution::Sequential).ok()?;
    roots.into_iter().min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
}

#[derive(Debug, Default, PartialEq)]
pub(crate) struct Labeling {
    pub labeled: Vec<(i64, f64)>,
    pub surplus: Vec<f64>,
    pub missing: Vec<i64>,
}

/// Assigns asymptotic labels in `[lo, hi]` to sorted `roots`; see the
/// module documentation.
pub(crate) fn label_roots(roots: &[f64], seed0: f64, spacing: f64, lo: i64, hi: i64) -> Labeling {
    let seed = |n: i64| seed0 + n as f64 * spacing;
    let cell = |r: f64| ((r - seed0) / spacing).round() as i64;
    let roots: Vec<f64> = roots.iter().copied().filter(|&r| (lo..=hi).contains(&cell(r))).collect();
    let count = |n: i64| roots.iter().filter(|&&r| cell(r) == n).count();

    let mut top = hi + 1;
    while top - 1 > CENTRAL_BLOCK.max(lo) && count(top - 1) == 1 {
        top -= 1;
    }
    let mut bottom = lo - 1;
    while bottom + 1 < (-CENTRAL_BLOCK).min(top - 1) && count(bottom + 1) == 1 {
        bottom += 1;
    }

    let mut out = Labeling::default();
    let mut central_roots = Vec::new();
    for &r in &roots {
        let n = cell(r);
        if n >= top || n <= bottom {
            out.labeled.push((n, r));
        } else {
            central_roots.push(r);
        }
    }

    // n * eps_n from the innermost anchors on each side.
    let slope = |labels: &mut dyn Iterator<Item = i64>| -> f64 {
        let vals: Vec<f64> = labels
            .take(3)
            .filter_map(|n| out.labeled.iter().find(|(m, _)| *m == n).map(|&(_, r)| n as f64 * (r - seed(n))))
            .collect();
        if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    let c_plus = slope(&mut (top..=hi));
    let c_minus = slope(&mut (lo..=bottom).rev());
    let predicted = |n: i64| -> f64 {
        let eps = match n {
            0 => 0.5 * (c_plus - c_minus),
            n if n > 0 => c_plus / n as f64,
            n => c_minus / n as f64,
        };
        seed(n) + eps
    };

    let labels: Vec<i64> = (bottom + 1..top).collect();
    let (matches, unmatched_labels, unmatched_roots) = align(&labels, &central_roots, predicted, spacing);
    out.labeled.extend(matches);
    out.labeled.sort_by(|a, b| a.1.total_cmp(&b.1));
    out.surplus = unmatched_roots;
    out.missing = unmatched_labels;
    out
}

/// Order-preserving partial matching of labels to roots minimising the sum
/// of squared distances to the predicted positions. Skipping a root is
/// free; skipping a label costs far more than any match.
#[allow(clippy::type_complexity)]
fn align(
    labels: &[i64],
    roots: &[f64],
    predicted: impl Fn(i64) -> f64,
    spacing: f64,
) -> (Vec<(i64, f64)>, Vec<i64>, Vec<f64>) {
    let (k, m) = (labels.len(), roots.len());
    let skip_label = 1e6 * spacing * spacing * (1 + k + m) as f64;
    let mut cost = vec![vec![f64::INFINITY; m + 1]; k + 1];
    // 0 = match, 1 = skip label, 2 = skip root
    let mut step = vec![vec![0u8; m + 1]; k + 1];
    cost[0][0] = 0.0;
    for i in 0..=k {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut how = 0;
            if i > 0 && j > 0 {
                let d = roots[j - 1] - predicted(labels[i - 1]);
                let c = cost[i - 1][j - 1] + d * d;
                if c < best {
                    best = c;
                    how = 0;
                }
            }
            if i > 0 {
                let c = cost[i - 1][j] + skip_label;
                if c < best {
                    best = c;
                    how = 1;
                }
            }
            if j > 0 {
                let c = cost[i][j - 1];
                if c < best {
                    best = c;
                    how = 2;
                }
            }
            cost[i][j] = best;
            step[i][j] = how;
        }
    }
    let (mut i, mut j) = (k, m);
    let (mut matched, mut lost, mut spare) = (Vec::new(), Vec::new(), Vec::new());
    while i > 0 || j > 0 {
        match step[i][j] {
            0 => {
                matched.push((labels[i - 1], roots[j - 1]));
                i -= 1;
                j -= 1;
            }
            1 => {
                lost.push(labels[i - 1]);
                i -= 1;
            }
            _ => {
                spare.push(roots[j - 1]);
                j -= 1;
            }
        }
    }
    matched.reverse();
    lost.reverse();
    spare.reverse();
    (matched, lost, spare)
}

/// Scan, label and complete eigen-data for labels in `[n_min, n_max]`.
pub fn search_eigenvalues(config: &ProblemConfig, n_min: i64, n_max: i64, exec: Execution) -> Result<EigenSearch> {
    if n_min > n_max {
        return Err(Error::Precondition(format!("n_min = {n_min} exceeds n_max = {n_max}")));
    }
    let grid = config.grid();
    let spacing = asymptotic_spacing(config);
    let seed0 = seed_offset(config)? * spacing;
    let lo = n_min.min(-CENTRAL_BLOCK) - PADDING;
    let hi = n_max.max(CENTRAL_BLOCK) + PADDING;

    let mut xs = Vec::new();
    for n in lo..=hi {
        let samples = if n.abs() <= CENTRAL_BLOCK + PADDING {
            FINE_SAMPLES
        } else {
            COARSE_SAMPLES
        };
        let left = seed0 + (n as f64 - 0.5) * spacing;
        xs.extend((0..samples).map(|i| left + spacing * i as f64 / samples as f64));
    }
    xs.push(seed0 + (hi as f64 + 0.5) * spacing);

    let roots = zeros_on_samples(config, &grid, &xs, exec)?;
    let labeling = label_roots(&roots, seed0, spacing, lo, hi);

    let wanted: Vec<(i64, f64)> = labeling
        .labeled
        .iter()
        .copied()
        .filter(|(n, _)| (n_min..=n_max).contains(n))
        .collect();
    let span = match (wanted.first(), wanted.last()) {
        (Some(a), Some(b)) if a.0 == n_min && b.0 == n_max && n_min < n_max => Some((a.1, b.1)),
        _ => None,
    };
    let mut jobs: Vec<(Option<i64>, f64)> = wanted.iter().map(|&(n, r)| (Some(n), r)).collect();
    if let Some((l, h)) = span {
        jobs.extend(labeling.surplus.iter().filter(|&&r| r > l && r < h).map(|&r| (None, r)));
    }
    let data: Vec<SpectralDatum> = par::map(exec, &jobs, |&(n, r)| complete_datum(config, &grid, n, r))
        .into_iter()
        .collect::<Result<_>>()?;
    let missing = labeling
        .missing
        .iter()
        .copied()
        .filter(|n| (n_min..=n_max).contains(n))
        .collect();
    Ok(EigenSearch {
        data: SpectralDataSet::new(config.fingerprint(), n_min, n_max, data)?,
        missing,
    })
}

/// `psi` against `phi` by least squares over every sample and component.
#[derive(Clone, Copy, Debug)]
pub struct BetaFit {
    pub beta: Complex64,
    pub residual: f64,
}

pub(crate) fn fit_beta(phi: &Trajectory, psi: &Trajectory) -> BetaFit {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    let mut psi_norm = 0.0;
    for (f, s) in phi.ys.iter().zip(&psi.ys) {
        for k in 0..2 {
            num += s[k] * f[k].conj();
            den += f[k].norm_sqr();
            psi_norm += s[k].norm_sqr();
        }
    }
    let beta = num / den;
    let res: f64 = phi
        .ys
        .iter()
        .zip(&psi.ys)
        .map(|(f, s)| (s[0] - beta * f[0]).norm_sqr() + (s[1] - beta * f[1]).norm_sqr())
        .sum();
    BetaFit {
        beta,
        residual: (res / psi_norm).sqrt(),
    }
}

/// `alpha` from a sampled `phi`: weighted `L2` part plus the two boundary terms.
pub(crate) fn alpha_from_phi(config: &ProblemConfig, grid: &Grid, phi: &Trajectory) -> f64 {
    let g: Vec<Complex64> = phi.ys.iter().map(|y| y[0] * y[0] + y[1] * y[1]).collect();
    let integral = integrate_weighted(grid, config.weight.alpha(), &g).re;
    let lt = config.boundary.left_trace(phi.first()).re;
    let rt = config.boundary.right_trace(phi.last()).re;
    integral + lt * lt / config.boundary.k1() + rt * rt / config.boundary.k2()
}

fn trajectories(config: &ProblemConfig, grid: &Grid, lambda: f64) -> Result<(Trajectory, Trajectory)> {
    let l = Complex64::new(lambda, 0.0);
    let plan = StepPlan::for_lambda(config, grid, l);
    let f = propagate_on(config, grid, plan, l, config.boundary.phi_init(l), Endpoint::Left)?;
    let s = propagate_on(config, grid, plan, l, config.boundary.psi_init(l), Endpoint::Right)?;
    Ok((f, s))
}

fn complete_datum(config: &ProblemConfig, grid: &Grid, n: Option<i64>, lambda: f64) -> Result<SpectralDatum> {
    let (f, s) = trajectories(config, grid, lambda)?;
    let fit = fit_beta(&f, &s);
    let alpha = alpha_from_phi(config, grid, &f);
    let l = Complex64::new(lambda, 0.0);
    let plan = StepPlan::for_lambda(config, grid, l * (1.0 + 1e-5) + 1e-5);
    let dd = delta_dot_with(config, grid, plan, l)?.re;
    let seed = n.map(|n| asymptotic_seed(config, n)).transpose()?;
    let mut warning = None;
    if dd.abs() < SIMPLE_ROOT_TOL {
        warning = Some(format!("Delta'(lambda) = {dd:e}; eigenvalue may not be simple"));
    } else if fit.residual > BETA_RESIDUAL_TOL {
        warning = Some(format!("psi/phi fit residual {:e} above tolerance", fit.residual));
    }
    Ok(SpectralDatum {
        n,
        lambda_n: lambda,
        alpha_n: alpha,
        beta_n: fit.beta.re,
        delta_dot_n: dd,
        seed,
        seed_gap: seed.map(|s| lambda - s),
        beta_residual: fit.residual,
        warning,
    })
}

/// `beta_n` with its fit residual; fails if `psi` is not proportional to `phi`.
pub fn beta_fit(config: &ProblemConfig, lambda_n: f64) -> Result<BetaFit> {
    let grid = config.grid();
    let (f, s) = trajectories(config, &grid, lambda_n)?;
    let fit = fit_beta(&f, &s);
    if fit.residual > BETA_RESIDUAL_TOL {
        return Err(Error::NonProportional {
            lambda: lambda_n,
            residual: fit.residual,
        });
    }
    Ok(fit)
}

pub fn beta(config: &ProblemConfig, lambda_n: f64) -> Result<f64> {
    Ok(beta_fit(config, lambda_n)?.beta.re)
}

/// `alpha_n`; rejects inputs that are not eigenvalues.
pub fn norming_constant(config: &ProblemConfig, lambda_n: f64) -> Result<f64> {
    let grid = config.grid();
    let (f, s) = trajectories(config, &grid, lambda_n)?;
    let fit = fit_beta(&f, &s);
    if fit.residual > BETA_RESIDUAL_TOL {
        return Err(Error::StaleDatum {
            lambda: lambda_n,
            reason: format!("psi/phi fit residual {:e}", fit.residual),
        });
    }
    Ok(alpha_from_phi(config, &grid, &f))
}

/// Largest `|<Y_n, Y_m>| / sqrt(alpha_n alpha_m)` over distinct pairs.
pub fn orthogonality_check(config: &ProblemConfig, data: &SpectralDataSet) -> Result<f64> {
    let gram = gram_matrix(config, data)?;
    let mut worst: f64 = 0.0;
    for (i, row) in gram.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                worst = worst.max(v.norm() / (data.data[i].alpha_n * data.data[j].alpha_n).sqrt());
            }
        }
    }
    Ok(worst)
}

/// Gram matrix of the eigen-elements of `data`.
pub fn gram_matrix(config: &ProblemConfig, data: &SpectralDataSet) -> Result<Vec<Vec<Complex64>>> {
    let elements = par::map(Execution::default(), &data.data, |d| eigen_element(config, d.lambda_n))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let idx: Vec<usize> = (0..elements.len()).collect();
    par::map(Execution::default(), &idx, |&i| {
        elements.iter().map(|e| inner(config, &elements[i], e)).collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use std::f64::consts::PI;

    #[test]
    fn labeling_r0_like_cluster() {
        // zeros of (1 - l^2) sin(l pi) + 2 l cos(l pi), frozen from bisection
        let pos = [0.638_322_262_334_294_6, 1.395_773_843_796_417, 2.264_713_242_016_419, 3.193_207_935_412_059, 4.150_514_676_822_111, 5.122_730_134_386_958];
        let mut roots: Vec<f64> = pos.iter().map(|r| -r).collect();
        roots.push(0.0);
        roots.extend(pos);
        roots.sort_by(f64::total_cmp);
        let lab = label_roots(&roots, 0.0, 1.0, -5, 5);
        assert!(lab.missing.is_empty());
        assert_eq!(lab.surplus.len(), 2);
        assert!((lab.surplus[1] - 0.638_322).abs() < 1e-5);
        let get = |n: i64| lab.labeled.iter().find(|(m, _)| *m == n).unwrap().1;
        assert_eq!(get(0), 0.0);
        assert!((get(1) - 1.3958).abs() < 1e-3);
        assert!((get(-1) + 1.3958).abs() < 1e-3);
        assert!((get(2) - 2.2647).abs() < 1e-3);
    }

    #[test]
    fn labeling_reports_missing() {
        let roots = [-2.05, -0.98, 1.02, 2.01];
        let lab = label_roots(&roots, 0.0, 1.0, -2, 2);
        assert_eq!(lab.missing, vec![0]);
        assert!(lab.surplus.is_empty());
    }

    #[test]
    fn r0_ground_values() {
        let cfg = presets::r0();
        let set = find_eigenvalues(&cfg, -1, 1).unwrap();
        assert!(set.labeled(0).unwrap().lambda_n.abs() < 1e-10);
        assert!((set.labeled(1).unwrap().lambda_n - 1.396).abs() < 2e-3);
        assert!((set.labeled(-1).unwrap().lambda_n + 1.396).abs() < 2e-3);
        assert_eq!(set.surplus().count(), 2);
        let two = find_eigenvalues(&cfg, 2, 2).unwrap();
        assert_eq!(two.len(), 1);
        assert!((two.data[0].lambda_n - 2.26).abs() < 1e-2);
        let g1 = set.labeled(1).unwrap().seed_gap.unwrap().abs();
        let g2 = two.data[0].seed_gap.unwrap().abs();
        assert!(g2 < g1);
    }

    #[test]
    fn r0_norming_and_beta() {
        let cfg = presets::r0();
        let a0 = norming_constant(&cfg, 0.0).unwrap();
        assert!((a0 - (PI + 2.0)).abs() < 1e-10);
        let b0 = beta(&cfg, 0.0).unwrap();
        assert!((b0 - 1.0).abs() < 1e-12);
        let fine = norming_constant(&cfg.with_grid_points(4096).unwrap(), 0.0).unwrap();
        assert!((fine - a0).abs() < 1e-8);
        assert!(matches!(beta(&cfg, 0.5), Err(Error::NonProportional { .. })));
        assert!(matches!(norming_constant(&cfg, 0.5), Err(Error::StaleDatum { .. })));
    }

    #[test]
    fn orthogonality_small() {
        let cfg = presets::r0();
        let set = find_eigenvalues(&cfg, 0, 1).unwrap();
        assert!(orthogonality_check(&cfg, &set).unwrap() < 1e-6);
        let single = find_eigenvalues(&cfg, 0, 0).unwrap();
        assert_eq!(orthogonality_check(&cfg, &single).unwrap(), 0.0);
        let gram = gram_matrix(&cfg, &set).unwrap();
        for (i, d) in set.data.iter().enumerate() {
            assert!((gram[i][i].re - d.alpha_n).abs() < 1e-8 * d.alpha_n);
        }
    }

    #[test]
    fn invalid_range() {
        assert!(matches!(
            find_eigenvalues(&presets::r0(), 2, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn truncation_and_json() {
        let cfg = presets::r0();
        let set = find_eigenvalues(&cfg, -3, 3).unwrap();
        assert_eq!(set.len(), 9);
        assert_eq!(set.symmetric_extent(), Some(3));
        let t1 = set.truncated(1);
        assert_eq!(t1.len(), 5);
        assert_eq!(set.truncated(0).len(), 1);
        let back = SpectralDataSet::from_json(&set.to_json()).unwrap();
        assert_eq!(back, set);
        let mut csv = Vec::new();
        set.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 8);
    }
}
