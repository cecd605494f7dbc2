//! Command implementations. Each returns a process exit code and reports
//! problems on stderr. Every command writes `manifest.json` into its output
//! directory before any data file.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::eigensolver::{search_eigenvalues, SpectralDataSet};
use crate::error::{Error, Result};
use crate::expansion::{expand, resolvent_apply, resolvent_residual, HElement};
use crate::integrator::{self, wronskian_spread, Endpoint};
use crate::inverse::{reconstruct, InverseConfig, InverseProblem};
use crate::model::{ProblemConfig, State, Weight};
use crate::output::fmt_f64;
use crate::par::Execution;
use crate::presets;
use crate::weyl::{residue_check, weyl_samples, weyl_series_truncated, weyl_direct};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_SELFCHECK: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_paths: Vec<String>,
    pub out_dir: String,
    pub tool_version: String,
    pub timestamp: String,
    pub parameters: Value,
}

impl RunManifest {
    pub fn new(command: &str, config_paths: &[&Path], out_dir: &Path, parameters: Value) -> Self {
        Self {
            command: command.into(),
            config_paths: config_paths.iter().map(|p| p.display().to_string()).collect(),
            out_dir: out_dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            parameters,
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        fs::create_dir_all(out_dir)?;
        write_json(&out_dir.join("manifest.json"), self)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn create(path: PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn load_config(path: &Path) -> std::result::Result<ProblemConfig, i32> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_IO
    })?;
    ProblemConfig::from_json(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_IO
    })
}

/// Exit code for an error raised after the inputs were accepted.
fn failure(e: Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::Io(_) | Error::Json(_) => EXIT_IO,
        Error::Precondition(_) | Error::DimensionMismatch { .. } | Error::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_PARTIAL,
    }
}

macro_rules! try_exit {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return failure(e.into()),
        }
    };
}

/// `eigs`: `eigs.csv`, `eigs_surplus.csv`, `spectral_data.json`.
pub fn cmd_eigs(config_path: &Path, n_min: i64, n_max: i64, out_dir: &Path) -> i32 {
    cmd_eigs_with(config_path, n_min, n_max, out_dir, Execution::default())
}

pub fn cmd_eigs_with(config_path: &Path, n_min: i64, n_max: i64, out_dir: &Path, exec: Execution) -> i32 {
    if n_min > n_max {
        eprintln!("error: --n-min {n_min} exceeds --n-max {n_max}");
        return EXIT_USAGE;
    }
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let params = json!({ "config": config, "n_min": n_min, "n_max": n_max });
    try_exit!(RunManifest::new("eigs", &[config_path], out_dir, params).write(out_dir));
    let search = try_exit!(search_eigenvalues(&config, n_min, n_max, exec));
    try_exit!(write_eigs(&search.data, out_dir));
    if search.missing.is_empty() {
        EXIT_OK
    } else {
        eprintln!("error: no eigenvalue found for n = {:?}", search.missing);
        EXIT_PARTIAL
    }
}

fn write_eigs(data: &SpectralDataSet, out_dir: &Path) -> Result<()> {
    let mut w = create(out_dir.join("eigs.csv"))?;
    data.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(out_dir.join("eigs_surplus.csv"))?;
    data.write_surplus_csv(&mut w)?;
    w.flush()?;
    let mut json = data.to_json();
    json.push('\n');
    fs::write(out_dir.join("spectral_data.json"), json)?;
    Ok(())
}

/// `sweep`: `sweep.csv` with `Delta` on `steps` equally spaced real points.
pub fn cmd_sweep(config_path: &Path, lo: f64, hi: f64, steps: usize, out_dir: &Path) -> i32 {
    if steps < 2 || lo.is_nan() || hi.is_nan() || lo >= hi {
        eprintln!("error: sweep needs lambda_min < lambda_max and at least 2 steps");
        return EXIT_USAGE;
    }
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let params = json!({ "config": config, "lambda_min": lo, "lambda_max": hi, "steps": steps });
    try_exit!(RunManifest::new("sweep", &[config_path], out_dir, params).write(out_dir));
    let lambdas: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
    let mut w = try_exit!(create(out_dir.join("sweep.csv")));
    try_exit!(crate::charfn::write_sweep(&config, &lambdas, Execution::default(), &mut w));
    try_exit!(w.flush());
    EXIT_OK
}

/// Rectangle of sample points `re x im`, both inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeylGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub re_steps: usize,
    pub im_min: f64,
    pub im_max: f64,
    pub im_steps: usize,
    /// Smallest admissible `|Im lambda|`.
    pub margin: f64,
}

impl WeylGrid {
    pub fn single(lambda: Complex64) -> Self {
        Self {
            re_min: lambda.re,
            re_max: lambda.re,
            re_steps: 1,
            im_min: lambda.im,
            im_max: lambda.im,
            im_steps: 1,
            margin: 0.1,
        }
    }

    fn axis(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
        match steps {
            1 => vec![lo],
            n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    /// Points in row-major order (imaginary part outer).
    pub fn points(&self) -> std::result::Result<Vec<Complex64>, String> {
        if self.margin.is_nan() || self.margin <= 0.0 {
            return Err(format!("margin {} must be positive", self.margin));
        }
        if self.re_steps == 0 || self.im_steps == 0 {
            return Err("grid needs at least one step per axis".into());
        }
        let mut out = Vec::with_capacity(self.re_steps * self.im_steps);
        for im in Self::axis(self.im_min, self.im_max, self.im_steps) {
            if im.abs() < self.margin {
                return Err(format!("Im lambda = {im} is within the margin {} of the real axis", self.margin));
            }
            for re in Self::axis(self.re_min, self.re_max, self.re_steps) {
                out.push(Complex64::new(re, im));
            }
        }
        Ok(out)
    }
}

/// `weyl`: `weyl.csv` with `M` two ways over a rectangle.
pub fn cmd_weyl(config_path: &Path, grid: &WeylGrid, series_n: i64, out_dir: &Path) -> i32 {
    let points = match grid.points() {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    if series_n < 0 {
        eprintln!("error: --series-n must be non-negative");
        return EXIT_USAGE;
    }
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let params = json!({ "config": config, "grid": grid, "series_n": series_n, "series_order": "symmetric" });
    try_exit!(RunManifest::new("weyl", &[config_path], out_dir, params).write(out_dir));
    let data = try_exit!(search_eigenvalues(&config, -series_n, series_n, Execution::default()));
    if !data.missing.is_empty() {
        eprintln!("error: no eigenvalue found for n = {:?}", data.missing);
        return EXIT_PARTIAL;
    }
    let samples = try_exit!(weyl_samples(&config, &points, &data.data, Execution::default()));
    let mut w = try_exit!(create(out_dir.join("weyl.csv")));
    let body = (|| -> std::io::Result<()> {
        writeln!(w, "re_lambda,im_lambda,re_m,im_m,series_defect")?;
        for s in &samples {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(s.lambda.re),
                fmt_f64(s.lambda.im),
                fmt_f64(s.m_direct.re),
                fmt_f64(s.m_direct.im),
                fmt_f64(s.series_defect())
            )?;
        }
        w.flush()
    })();
    try_exit!(body);
    EXIT_OK
}

/// Test functions for `expand` and `resolvent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `(sin x, 0)`
    Sin,
    /// `(1, 0)`
    One,
    /// `(x, x^2 / pi)`
    Poly,
}

impl TestFunction {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Self::Sin),
            "one" => Some(Self::One),
            "poly" => Some(Self::Poly),
            _ => None,
        }
    }

    pub fn eval(self, x: f64) -> State {
        let r = |v: f64| Complex64::new(v, 0.0);
        match self {
            Self::Sin => [r(x.sin()), r(0.0)],
            Self::One => [r(1.0), r(0.0)],
            Self::Poly => [r(x), r(x * x / std::f64::consts::PI)],
        }
    }

    /// Sampled element with trace-matched boundary scalars.
    pub fn element(self, config: &ProblemConfig) -> HElement {
        HElement::from_fn(config, |x| self.eval(x))
    }
}

/// `expand`: `expand.csv` with `(x, f, partial sum)` and `expand_summary.json`.
pub fn cmd_expand(config_path: &Path, function: TestFunction, big_n: i64, out_dir: &Path) -> i32 {
    if big_n < 0 {
        eprintln!("error: --n must be non-negative");
        return EXIT_USAGE;
    }
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let params = json!({ "config": config, "function": function, "n": big_n });
    try_exit!(RunManifest::new("expand", &[config_path], out_dir, params).write(out_dir));
    let search = try_exit!(search_eigenvalues(&config, -big_n, big_n, Execution::default()));
    if !search.missing.is_empty() {
        eprintln!("error: no eigenvalue found for n = {:?}", search.missing);
        return EXIT_PARTIAL;
    }
    let f = function.element(&config);
    let ex = try_exit!(expand(&config, &search.data, &f));
    let grid = config.grid();
    let mut w = try_exit!(create(out_dir.join("expand.csv")));
    let body = (|| -> std::io::Result<()> {
        writeln!(w, "x,f1,f2,partial_sum1,partial_sum2")?;
        for (i, x) in grid.xs().iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(*x),
                fmt_f64(f.f1[i].re),
                fmt_f64(f.f2[i].re),
                fmt_f64(ex.sum.f1[i].re),
                fmt_f64(ex.sum.f2[i].re)
            )?;
        }
        w.flush()
    })();
    try_exit!(body);
    let summary = json!({
        "N": big_n,
        "parseval_defect": ex.coefficients.parseval_defect(big_n),
        "max_pointwise_error": ex.max_error,
        "coefficient_form_defect": ex.coefficients.defect,
    });
    try_exit!(write_json(&out_dir.join("expand_summary.json"), &summary));
    EXIT_OK
}

/// `resolvent`: `resolvent.csv` with `y = R_lambda F` and a residual summary.
pub fn cmd_resolvent(
    config_path: &Path,
    lambda: Complex64,
    function: TestFunction,
    f3: f64,
    f4: f64,
    out_dir: &Path,
) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let params = json!({ "config": config, "lambda": lambda, "function": function, "f3": f3, "f4": f4 });
    try_exit!(RunManifest::new("resolvent", &[config_path], out_dir, params).write(out_dir));
    let f = function.element(&config).with_scalars(f3.into(), f4.into());
    let y = try_exit!(resolvent_apply(&config, lambda, &f));
    let residual = try_exit!(resolvent_residual(&config, &y, &f));
    let mut w = try_exit!(create(out_dir.join("resolvent.csv")));
    try_exit!(y.write_csv(&mut w).and_then(|_| w.flush()));
    try_exit!(write_json(&out_dir.join("resolvent_summary.json"), &residual));
    EXIT_OK
}

/// `invert`: `reconstruction.json` and `invert_trace.csv`. Boundary
/// coefficients and weight come from `config_path`; its potential is ignored.
pub fn cmd_invert(config_path: &Path, data_path: &Path, inverse_path: &Path, out_dir: &Path) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|e| {
            eprintln!("error: cannot read {}: {e}", p.display());
            EXIT_IO
        })
    };
    let (data_text, inv_text) = match (read(data_path), read(inverse_path)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(c), _) | (_, Err(c)) => return c,
    };
    let data = match SpectralDataSet::from_json(&data_text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {}: {e}", data_path.display());
            return EXIT_IO;
        }
    };
    let inv = match InverseConfig::from_json(&inv_text) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {}: {e}", inverse_path.display());
            return EXIT_IO;
        }
    };
    let params = json!({ "config": config, "inverse": inv, "data_fingerprint": data.fingerprint });
    try_exit!(RunManifest::new("invert", &[config_path, data_path, inverse_path], out_dir, params).write(out_dir));
    let mut problem = try_exit!(InverseProblem::new(data, inv.basis, config.boundary, config.weight));
    problem = problem.with_weighting(inv.weighting);
    if let Some(acc) = inv.accuracy {
        problem = problem.with_accuracy(acc);
    }
    let optimizer = inv.optimizer.unwrap_or_default();
    let result = try_exit!(reconstruct(&problem, &inv.init, &optimizer));
    try_exit!(write_json(&out_dir.join("reconstruction.json"), &result));
    let mut w = try_exit!(create(out_dir.join("invert_trace.csv")));
    let body = (|| -> std::io::Result<()> {
        writeln!(w, "iteration,evaluations,misfit")?;
        for t in &result.trace {
            writeln!(w, "{},{},{}", t.iteration, t.evaluations, fmt_f64(t.best))?;
        }
        w.flush()
    })();
    try_exit!(body);
    if result.converged {
        EXIT_OK
    } else {
        eprintln!("warning: evaluation budget exhausted, misfit {}", result.misfit);
        EXIT_PARTIAL
    }
}

/// Negative controls for `selfcheck`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Compares the `R0` solver against the closed form of a different weight.
    Oracle,
}

impl Fault {
    pub fn parse(name: &str) -> Option<Self> {
        (name == "oracle").then_some(Self::Oracle)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub preset: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn row(check: &str, preset: &str, value: Result<f64>, tolerance: f64) -> CheckRow {
    let value = value.unwrap_or(f64::NAN);
    CheckRow {
        check: check.into(),
        preset: preset.into(),
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

fn oracle_defect(config: &ProblemConfig, oracle_weight: &Weight) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for lambda in [Complex64::new(0.5, 0.0), Complex64::new(1.5, 0.5), Complex64::new(0.0, 1.0)] {
        for (t, init, from) in [
            (integrator::phi(config, lambda)?, config.boundary.phi_init(lambda), Endpoint::Left),
            (integrator::psi(config, lambda)?, config.boundary.psi_init(lambda), Endpoint::Right),
        ] {
            for (x, y) in t.xs.iter().zip(&t.ys) {
                let e = presets::free_solution(oracle_weight, lambda, init, from, *x)?;
                worst = worst.max((y[0] - e[0]).norm()).max((y[1] - e[1]).norm());
            }
        }
    }
    Ok(worst)
}

/// Largest increase along a sequence that should not increase.
fn max_increase(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

pub fn selfcheck_rows(fault: Option<Fault>) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let i = Complex64::new(0.0, 1.0);
    for (name, config) in [("R0", presets::r0()), ("R1", presets::r1())] {
        let lambda = Complex64::new(2.5, 0.5);
        let spread = integrator::phi(&config, lambda)
            .and_then(|f| Ok(wronskian_spread(&f, &integrator::psi(&config, lambda)?)));
        rows.push(row("wronskian_constancy", name, spread, 1e-8));

        let oracle_weight = match (fault, name) {
            (Some(Fault::Oracle), "R0") => Weight::new(1.5, config.weight.a()).expect("valid weight"),
            _ => config.weight,
        };
        rows.push(row("oracle_agreement", name, oracle_defect(&config, &oracle_weight), 1e-8));

        let data = crate::eigensolver::find_eigenvalues(&config, -10, 10);
        let norming = data
            .as_ref()
            .map_err(|e| Error::Precondition(e.to_string()))
            .map(|d| d.data.iter().map(|x| x.norming_defect()).fold(0.0, f64::max));
        rows.push(row("norming_identity", name, norming, 1e-4));

        let residue = data
            .as_ref()
            .map_err(|e| Error::Precondition(e.to_string()))
            .and_then(|d| {
                let mut worst: f64 = 0.0;
                for n in [0, 1] {
                    let datum = d.labeled(n).ok_or(Error::MissingRoot { n })?;
                    worst = worst.max(residue_check(&config, datum)?);
                }
                Ok(worst)
            });
        rows.push(row("residue", name, residue, 1e-3));

        let parseval = data
            .as_ref()
            .map_err(|e| Error::Precondition(e.to_string()))
            .and_then(|d| {
                let f = TestFunction::Sin.element(&config);
                let c = crate::expansion::coefficients(&config, d, &f)?;
                let defects: Vec<f64> = [2, 5, 10].iter().map(|&n| c.parseval_defect(n)).collect();
                Ok(max_increase(&defects))
            });
        rows.push(row("parseval_monotone", name, parseval, 1e-12));

        let weyl = data
            .as_ref()
            .map_err(|e| Error::Precondition(e.to_string()))
            .and_then(|d| {
                let direct = weyl_direct(&config, i)?;
                let gaps = [5, 7, 10]
                    .iter()
                    .map(|&n| Ok((weyl_series_truncated(&config, i, d, n)? - direct).norm()))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(max_increase(&gaps))
            });
        rows.push(row("weyl_two_way_monotone", name, weyl, 0.0));
    }
    rows
}

/// `selfcheck`: `selfcheck.csv` with one row per invariant.
pub fn cmd_selfcheck(out_dir: &Path, fault: Option<Fault>) -> i32 {
    let params = json!({ "inject_fault": fault.map(|_| "oracle") });
    try_exit!(RunManifest::new("selfcheck", &[], out_dir, params).write(out_dir));
    let rows = selfcheck_rows(fault);
    let mut w = try_exit!(create(out_dir.join("selfcheck.csv")));
    let body = (|| -> std::io::Result<()> {
        writeln!(w, "check,preset,value,tolerance,status")?;
        for r in &rows {
            let status = if r.pass { "pass" } else { "fail" };
            writeln!(w, "{},{},{},{},{}", r.check, r.preset, fmt_f64(r.value), fmt_f64(r.tolerance), status)?;
        }
        w.flush()
    })();
    try_exit!(body);
    for r in rows.iter().filter(|r| !r.pass) {
        eprintln!("fail: {} on {} ({} > {})", r.check, r.preset, r.value, r.tolerance);
    }
    if rows.iter().all(|r| r.pass) {
        EXIT_OK
    } else {
        EXIT_SELFCHECK
    }
}
