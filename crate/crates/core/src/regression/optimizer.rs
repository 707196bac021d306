//! BFGS quasi-Newton minimizer with backtracking Armijo line search.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop once the gradient infinity-norm falls below this.
    pub grad_tol: f64,
    /// Largest infinity-norm of a single step.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iterations: 500, grad_tol: 1e-9, max_step: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step, starting with the initial point.
    pub trace: Vec<f64>,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Consecutive accepted steps without a representable decrease before giving up.
const MAX_STALLS: usize = 3;

/// Minimizes `objective`, which returns `f(x)` and writes `grad f(x)` into its
/// second argument.
pub fn minimize<F>(mut objective: F, x0: &[f64], opts: &BfgsOptions) -> BfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut g = DVector::zeros(n);
    let mut f = objective(x.as_slice(), g.as_mut_slice());
    let mut trace = vec![f];
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return BfgsOutcome {
            x: x0.to_vec(),
            value: f,
            grad_norm: f64::INFINITY,
            iterations: 0,
            converged: false,
            trace,
        };
    }

    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut x_new = DVector::zeros(n);
    let mut g_new = DVector::zeros(n);
    let mut iterations = 0;
    let mut stalls = 0;

    while iterations < opts.max_iterations {
        if g.amax() < opts.grad_tol {
            break;
        }
        iterations += 1;

        let mut dir = -(&h_inv * &g);
        let mut slope = g.dot(&dir);
        if slope.is_nan() || slope >= 0.0 {
            h_inv.fill_with_identity();
            fresh = true;
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let longest = dir.amax();
        if longest > opts.max_step {
            dir *= opts.max_step / longest;
            slope = g.dot(&dir);
        }

        let mut step = 1.0;
        let mut accepted = false;
        let mut f_new = f;
        for _ in 0..MAX_BACKTRACKS {
            x_new.copy_from(&x);
            x_new.axpy(step, &dir, 1.0);
            f_new = objective(x_new.as_slice(), g_new.as_mut_slice());
            if f_new.is_finite() && f_new <= f + ARMIJO_C1 * step * slope && g_new.iter().all(|v| v.is_finite()) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if fresh {
                break;
            }
            // curvature model went stale: retry along steepest descent
            h_inv.fill_with_identity();
            fresh = true;
            continue;
        }

        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() && sy > 0.0 {
            if fresh {
                let scale = sy / y.dot(&y);
                h_inv.fill_with_identity();
                h_inv *= scale;
            }
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H' = H - rho (H y s' + s y' H) + (rho^2 y'Hy + rho) s s'
            h_inv -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
            h_inv += (&s * s.transpose()) * (rho * rho * yhy + rho);
            fresh = false;
        }

        let stalled = f - f_new <= f64::EPSILON * f.abs().max(1.0);
        x.copy_from(&x_new);
        g.copy_from(&g_new);
        f = f_new;
        trace.push(f);
        stalls = if stalled { stalls + 1 } else { 0 };
        if stalls >= MAX_STALLS {
            break;
        }
    }

    let grad_norm = g.amax();
    BfgsOutcome {
        x: x.as_slice().to_vec(),
        value: f,
        grad_norm,
        iterations,
        converged: grad_norm < opts.grad_tol,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let rosen = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let out = minimize(rosen, &[-1.2, 1.0], &BfgsOptions { max_iterations: 2000, ..Default::default() });
        assert!(out.converged, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_in_few_steps() {
        let quad = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 3.0);
            g[1] = 20.0 * (x[1] + 1.0);
            g[2] = 0.2 * x[2];
            (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2) + 0.1 * x[2] * x[2]
        };
        let out = minimize(quad, &[0.0, 0.0, 5.0], &BfgsOptions::default());
        assert!(out.converged);
        assert!(out.iterations < 40);
        assert!((out.x[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn non_finite_start_reports_failure() {
        let out = minimize(|_: &[f64], g: &mut [f64]| {
            g[0] = 0.0;
            f64::NAN
        }, &[0.0], &BfgsOptions::default());
        assert!(!out.converged);
        assert_eq!(out.iterations, 0);
    }
}
