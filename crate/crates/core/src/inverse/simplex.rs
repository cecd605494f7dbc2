//! Nelder–Mead simplex minimisation with restarts.

use serde::{Deserialize, Serialize};

use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Objective fell below the tolerance.
    Objective,
    /// Simplex diameter fell below the tolerance.
    Step,
    /// Evaluation budget exhausted.
    Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub evaluations: usize,
    pub best: f64,
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
    pub trace: Vec<TracePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NelderMead {
    pub initial_step: f64,
    pub max_evaluations: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.2,
            max_evaluations: 2000,
            f_tol: 1e-8,
            x_tol: 1e-6,
            restarts: 2,
        }
    }
}

struct Counter<'a, F> {
    f: &'a F,
    evals: usize,
    exec: Execution,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Counter<'_, F> {
    fn one(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        (self.f)(x)
    }

    fn many(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        self.evals += xs.len();
        let f = self.f;
        par::map(self.exec, xs, |x| f(x))
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect()
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

impl NelderMead {
    pub fn minimize<F>(&self, f: &F, x0: &[f64], exec: Execution) -> Minimum
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let dim = x0.len();
        let mut counter = Counter { f, evals: 0, exec };
        let mut trace = Vec::new();
        let f0 = counter.one(x0);
        trace.push(TracePoint {
            iteration: 0,
            evaluations: 1,
            best: f0,
        });
        if f0 < self.f_tol || dim == 0 {
            return Minimum {
                x: x0.to_vec(),
                f: f0,
                iterations: 0,
                evaluations: 1,
                stop: StopReason::Objective,
                trace,
            };
        }

        let (mut best_x, mut best_f) = (x0.to_vec(), f0);
        let mut step = self.initial_step;
        let mut restarts_left = self.restarts;
        let mut iteration = 0;
        loop {
            let mut simplex = vec![best_x.clone()];
            for i in 0..dim {
                let mut v = best_x.clone();
                v[i] += step;
                simplex.push(v);
            }
            let mut values = vec![best_f];
            values.extend(counter.many(&simplex[1..]));
            let stop = loop {
                let mut order: Vec<usize> = (0..=dim).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
                simplex = order.iter().map(|&i| simplex[i].clone()).collect();
                values = order.iter().map(|&i| values[i]).collect();
                if values[0] < best_f {
                    best_f = values[0];
                    best_x = simplex[0].clone();
                }
                if best_f < self.f_tol {
                    break StopReason::Objective;
                }
                if diameter(&simplex) < self.x_tol {
                    break StopReason::Step;
                }
                if counter.evals >= self.max_evaluations {
                    break StopReason::Budget;
                }
                iteration += 1;

                let mut centroid = vec![0.0; dim];
                for v in &simplex[..dim] {
                    for (c, x) in centroid.iter_mut().zip(v) {
                        *c += x / dim as f64;
                    }
                }
                let worst = &simplex[dim];
                let xr = lerp(&centroid, worst, -1.0);
                let fr = counter.one(&xr);
                if fr < values[0] {
                    let xe = lerp(&centroid, worst, -2.0);
                    let fe = counter.one(&xe);
                    if fe < fr {
                        simplex[dim] = xe;
                        values[dim] = fe;
                    } else {
                        simplex[dim] = xr;
                        values[dim] = fr;
                    }
                } else if fr < values[dim - 1] {
                    simplex[dim] = xr;
                    values[dim] = fr;
                } else {
                    let (xc, fc) = if fr < values[dim] {
                        let xc = lerp(&centroid, &xr, 0.5);
                        let fc = counter.one(&xc);
                        (xc, fc)
                    } else {
                        let xc = lerp(&centroid, worst, 0.5);
                        let fc = counter.one(&xc);
                        (xc, fc)
                    };
                    if fc < values[dim].min(fr) {
                        simplex[dim] = xc;
                        values[dim] = fc;
                    } else {
                        let shrunk: Vec<Vec<f64>> = simplex[1..].iter().map(|v| lerp(&simplex[0], v, 0.5)).collect();
                        let fs = counter.many(&shrunk);
                        for (i, (v, fv)) in shrunk.into_iter().zip(fs).enumerate() {
                            simplex[i + 1] = v;
                            values[i + 1] = fv;
                        }
                    }
                }
                trace.push(TracePoint {
                    iteration,
                    evaluations: counter.evals,
                    best: best_f.min(values.iter().copied().fold(f64::INFINITY, f64::min)),
                });
            };
            if stop == StopReason::Step && restarts_left > 0 && counter.evals < self.max_evaluations {
                restarts_left -= 1;
                step *= 0.1;
                continue;
            }
            return Minimum {
                x: best_x,
                f: best_f,
                iterations: iteration,
                evaluations: counter.evals,
                stop,
                trace,
            };
        }
    }
}
