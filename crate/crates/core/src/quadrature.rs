//! Weighted quadrature on the node-aligned grid. Each side of the jump
//! is treated as its own uniform panel so the weight never jumps inside
//! a rule.

use num_complex::Complex64;

use crate::model::Grid;

fn simpson(h: f64, g: &[Complex64]) -> Complex64 {
    let n = g.len() - 1;
    debug_assert!(n.is_multiple_of(2), "Simpson needs an even number of steps");
    let mut odd = Complex64::new(0.0, 0.0);
    let mut even = Complex64::new(0.0, 0.0);
    for (i, v) in g.iter().enumerate().take(n).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    (g[0] + g[n] + 4.0 * odd + 2.0 * even) * (h / 3.0)
}

/// `int_0^pi g(x) rho(x) dx` by composite Simpson on both panels.
pub fn integrate_weighted(grid: &Grid, alpha: f64, g: &[Complex64]) -> Complex64 {
    assert_eq!(g.len(), grid.len(), "samples must match the grid");
    let s = grid.split();
    simpson(grid.h_left(), &g[..=s]) + alpha * simpson(grid.h_right(), &g[s..])
}

/// Real-valued convenience wrapper of [`integrate_weighted`].
pub fn integrate_weighted_real(grid: &Grid, alpha: f64, g: &[f64]) -> f64 {
    let c: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    integrate_weighted(grid, alpha, &c).re
}

fn cumulative_panel(h: f64, g: &[Complex64], scale: f64, start: Complex64, out: &mut Vec<Complex64>) {
    let n = g.len() - 1;
    debug_assert!(n >= 3);
    let w = h * scale / 24.0;
    let mut acc = start;
    for j in 0..n {
        let cell = if j == 0 {
            9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]
        } else if j + 1 == n {
            g[j - 2] - 5.0 * g[j - 1] + 19.0 * g[j] + 9.0 * g[j + 1]
        } else {
            -g[j - 1] + 13.0 * g[j] + 13.0 * g[j + 1] - g[j + 2]
        };
        acc += w * cell;
        out.push(acc);
    }
}

/// Running integral `I[j] = int_0^{x_j} g rho dx` at every node, using a
/// local cubic on each cell (fourth order, panel-local at the jump).
pub fn cumulative_weighted(grid: &Grid, alpha: f64, g: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(g.len(), grid.len(), "samples must match the grid");
    let s = grid.split();
    let mut out = Vec::with_capacity(g.len());
    out.push(Complex64::new(0.0, 0.0));
    cumulative_panel(grid.h_left(), &g[..=s], 1.0, out[0], &mut out);
    let mid = out[s];
    cumulative_panel(grid.h_right(), &g[s..], alpha, mid, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Weight;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn weighted_integral_of_cosine() {
        let w = Weight::new(2.0, 1.0).unwrap();
        let grid = Grid::new(&w, 512);
        let g: Vec<Complex64> = grid.xs().iter().map(|x| c(x.cos())).collect();
        // int_0^1 cos + 2 int_1^pi cos = sin 1 + 2 (0 - sin 1)
        let exact = 1f64.sin() - 2.0 * 1f64.sin();
        assert!((integrate_weighted(&grid, 2.0, &g).re - exact).abs() < 1e-10);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let w = Weight::new(3.0, 2.0).unwrap();
        let grid = Grid::new(&w, 1024);
        let g: Vec<Complex64> = grid.xs().iter().map(|x| c((3.0 * x).sin())).collect();
        let cum = cumulative_weighted(&grid, 3.0, &g);
        for (x, v) in grid.xs().iter().zip(&cum) {
            let anti = |t: f64| (1.0 - (3.0 * t).cos()) / 3.0;
            let exact = if *x <= 2.0 {
                anti(*x)
            } else {
                anti(2.0) + 3.0 * (anti(*x) - anti(2.0))
            };
            assert!((v.re - exact).abs() < 1e-9, "x={x}");
        }
        let total = integrate_weighted(&grid, 3.0, &g).re;
        assert!((cum.last().unwrap().re - total).abs() < 1e-8);
    }
}
