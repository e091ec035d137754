//! Fast iterative shrinkage-thresholding for the complex LASSO problem
//! minimize 0.5 ||A x - y||^2 + lambda ||x||_1.
//!
//! The solver touches the operator only through forward and adjoint
//! applications. Iterates carry Nesterov momentum; shrinkage acts on complex
//! magnitudes so phases survive thresholding. The returned solution is the
//! iterate with the smallest objective seen, which is not always the last one
//! produced.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::transforms::LinearOperator;

/// How the gradient step size is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lipschitz {
    /// Power iteration on A^H A, inflated by five percent for safety.
    Auto,
    /// Caller-supplied bound on the squared operator norm.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FistaConfig {
    /// Sparsity weight. Zero reduces the problem to least squares.
    pub lambda: f64,
    /// Hard iteration cap.
    pub max_iters: usize,
    /// Stop once successive residual norms differ by less than this.
    /// Zero disables early stopping, so exactly `max_iters` iterations run.
    pub error_tol: f64,
    pub lipschitz: Lipschitz,
}

impl FistaConfig {
    pub fn new(lambda: f64) -> Self {
        FistaConfig {
            lambda,
            max_iters: 500,
            error_tol: 1e-6,
            lipschitz: Lipschitz::Auto,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FistaResult {
    /// Iterate with the smallest objective value encountered.
    pub solution: Vec<Complex64>,
    /// Number of iterations actually run.
    pub iterations: usize,
    /// Residual norm ||A x_k - y|| after each iteration; one entry per
    /// iteration run.
    pub residual_history: Vec<f64>,
    /// Whether the residual-difference test fired before the cap.
    pub converged: bool,
}

/// Complex soft threshold: shrink the magnitude by `t`, preserve the phase,
/// and collapse to zero when the magnitude does not exceed `t`.
pub fn soft_threshold(z: Complex64, t: f64) -> Complex64 {
    let mag = z.norm();
    if mag <= t {
        Complex64::new(0.0, 0.0)
    } else {
        z * (1.0 - t / mag)
    }
}

/// Largest eigenvalue of A^H A by power iteration, times a 1.05 safety
/// factor. Deterministic: the start vector comes from a fixed-seed stream.
pub fn estimate_lipschitz(op: &dyn LinearOperator) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
    let mut v: Vec<Complex64> = (0..op.domain_len())
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let mut sigma_sq = 0.0;
    for _ in 0..50 {
        let w = op.adjoint(&op.forward(&v));
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::Solver(
                "power iteration collapsed; operator is numerically zero".into(),
            ));
        }
        sigma_sq = norm;
        for (vi, wi) in v.iter_mut().zip(w.iter()) {
            *vi = wi / norm;
        }
    }
    Ok(1.05 * sigma_sq)
}

fn residual(op: &dyn LinearOperator, x: &[Complex64], y: &[Complex64]) -> (Vec<Complex64>, f64) {
    let mut r = op.forward(x);
    for (ri, yi) in r.iter_mut().zip(y.iter()) {
        *ri -= yi;
    }
    let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (r, norm)
}

/// Run FISTA from a zero start.
pub fn solve(op: &dyn LinearOperator, y: &[Complex64], cfg: &FistaConfig) -> Result<FistaResult> {
    if y.len() != op.range_len() {
        return Err(Error::Shape(format!(
            "observation length {} does not match operator range {}",
            y.len(),
            op.range_len()
        )));
    }
    if !cfg.lambda.is_finite() || cfg.lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and nonnegative, got {}",
            cfg.lambda
        )));
    }
    if cfg.max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    if !cfg.error_tol.is_finite() || cfg.error_tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "error_tol must be finite and nonnegative, got {}",
            cfg.error_tol
        )));
    }
    let lip = match cfg.lipschitz {
        Lipschitz::Auto => estimate_lipschitz(op)?,
        Lipschitz::Fixed(l) => l,
    };
    if !lip.is_finite() || lip <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Lipschitz constant must be finite and positive, got {lip}"
        )));
    }

    let n = op.domain_len();
    let mut x_prev = vec![Complex64::new(0.0, 0.0); n];
    let mut momentum = x_prev.clone();
    let mut t = 1.0f64;

    let mut best: Vec<Complex64> = Vec::new();
    let mut best_obj = f64::INFINITY;
    let mut history = Vec::new();
    let mut prev_err: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iters {
        let (grad_residual, _) = residual(op, &momentum, y);
        let grad = op.adjoint(&grad_residual);
        let shrink = cfg.lambda / lip;
        let x: Vec<Complex64> = momentum
            .iter()
            .zip(grad.iter())
            .map(|(mi, gi)| soft_threshold(mi - gi / lip, shrink))
            .collect();

        let (_, err) = residual(op, &x, y);
        history.push(err);
        iterations += 1;

        let l1: f64 = x.iter().map(|z| z.norm()).sum();
        let obj = 0.5 * err * err + cfg.lambda * l1;
        if obj < best_obj {
            best_obj = obj;
            best = x.clone();
        }

        if let Some(pe) = prev_err {
            if (pe - err).abs() < cfg.error_tol {
                converged = true;
                break;
            }
        }
        prev_err = Some(err);

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        momentum = x
            .iter()
            .zip(x_prev.iter())
            .map(|(xi, pi)| xi + (xi - pi) * ((t - 1.0) / t_next))
            .collect();
        x_prev = x;
        t = t_next;
    }

    Ok(FistaResult {
        solution: best,
        iterations,
        residual_history: history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occupancy::SelectionIndex;
    use crate::transforms::{range_sensing_operator, SensingOperator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// A x = s x on C^n; the LASSO solution is soft(y/s, lambda/s^2) per
    /// coordinate, which pins down the solver's fixed point exactly.
    struct ScaledIdentity {
        n: usize,
        s: f64,
    }

    impl LinearOperator for ScaledIdentity {
        fn domain_len(&self) -> usize {
            self.n
        }
        fn range_len(&self) -> usize {
            self.n
        }
        fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
            x.iter().map(|z| z * self.s).collect()
        }
        fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
            y.iter().map(|z| z * self.s).collect()
        }
    }

    fn random_operator(rng: &mut ChaCha8Rng, len: usize) -> SensingOperator {
        let mask: Vec<bool> = loop {
            let m: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.6)).collect();
            if m.iter().any(|&b| b) {
                break m;
            }
        };
        let idx: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        let sel = SelectionIndex::new(idx, len).unwrap();
        range_sensing_operator(&mask, &sel).unwrap()
    }

    fn randn_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect()
    }

    #[test]
    fn soft_threshold_shrinks_magnitude_and_keeps_phase() {
        let z = Complex64::new(3.0, 4.0);
        let out = soft_threshold(z, 1.0);
        assert!((out.norm() - 4.0).abs() < 1e-12);
        assert!((out.arg() - z.arg()).abs() < 1e-12);
        assert_eq!(soft_threshold(z, 5.0), Complex64::new(0.0, 0.0));
        assert_eq!(soft_threshold(z, 5.5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn scaled_identity_reaches_the_closed_form() {
        let op = ScaledIdentity { n: 3, s: 2.0 };
        let y = vec![
            Complex64::new(10.0, 0.0),
            Complex64::new(0.0, -6.0),
            Complex64::new(1.0, 1.0),
        ];
        let cfg = FistaConfig {
            lambda: 3.2,
            max_iters: 500,
            error_tol: 0.0,
            lipschitz: Lipschitz::Fixed(4.2),
        };
        let out = solve(&op, &y, &cfg).unwrap();
        // soft(y/s, lambda/s^2) with s=2, lambda=3.2: threshold 0.8.
        let want = [
            soft_threshold(Complex64::new(5.0, 0.0), 0.8),
            soft_threshold(Complex64::new(0.0, -3.0), 0.8),
            soft_threshold(Complex64::new(0.5, 0.5), 0.8),
        ];
        assert!((want[0].re - 4.2).abs() < 1e-12);
        for (a, b) in out.solution.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
        assert_eq!(want[2], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn large_lambda_yields_the_zero_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let op = random_operator(&mut rng, 32);
        let y = randn_vec(&mut rng, op.range_len());
        let corr = op.adjoint(&y);
        let lambda_max = corr.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let cfg = FistaConfig {
            lambda: lambda_max * 1.0001,
            ..FistaConfig::new(0.0)
        };
        let out = solve(&op, &y, &cfg).unwrap();
        for z in &out.solution {
            assert_eq!(*z, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn zero_lambda_on_a_coisometry_recovers_the_adjoint_image() {
        // With orthonormal rows the least-squares solution from a zero start
        // is exactly A^H y.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let op = random_operator(&mut rng, 64);
        let y = randn_vec(&mut rng, op.range_len());
        let cfg = FistaConfig {
            error_tol: 0.0,
            ..FistaConfig::new(0.0)
        };
        let out = solve(&op, &y, &cfg).unwrap();
        let want = op.adjoint(&y);
        for (a, b) in out.solution.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_tolerance_runs_the_full_iteration_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let op = random_operator(&mut rng, 16);
        let y = randn_vec(&mut rng, op.range_len());
        let cfg = FistaConfig {
            lambda: 0.01,
            max_iters: 37,
            error_tol: 0.0,
            lipschitz: Lipschitz::Auto,
        };
        let out = solve(&op, &y, &cfg).unwrap();
        assert_eq!(out.iterations, 37);
        assert_eq!(out.residual_history.len(), 37);
        assert!(!out.converged);
    }

    #[test]
    fn loose_tolerance_stops_early() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let op = random_operator(&mut rng, 16);
        let y = randn_vec(&mut rng, op.range_len());
        let cfg = FistaConfig {
            lambda: 0.05,
            max_iters: 500,
            error_tol: 1e-3,
            lipschitz: Lipschitz::Auto,
        };
        let out = solve(&op, &y, &cfg).unwrap();
        assert!(out.converged);
        assert!(out.iterations < 500, "stopped after {} iterations", out.iterations);
        assert_eq!(out.residual_history.len(), out.iterations);
    }

    #[test]
    fn l1_norm_of_the_solution_decreases_along_the_lambda_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let op = random_operator(&mut rng, 32);
        let y = randn_vec(&mut rng, op.range_len());
        let mut last = f64::INFINITY;
        for lambda in [0.0, 0.05, 0.1, 0.2, 0.4, 0.8] {
            let cfg = FistaConfig {
                lambda,
                max_iters: 2000,
                error_tol: 0.0,
                lipschitz: Lipschitz::Auto,
            };
            let out = solve(&op, &y, &cfg).unwrap();
            let l1: f64 = out.solution.iter().map(|z| z.norm()).sum();
            assert!(l1 <= last + 1e-6, "l1 {l1} after {last} at lambda {lambda}");
            last = l1;
        }
    }

    #[test]
    fn power_iteration_finds_unit_norm_for_partial_fourier() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let op = random_operator(&mut rng, 48);
        let l = estimate_lipschitz(&op).unwrap();
        assert!((l - 1.05).abs() < 1e-6, "expected 1.05, got {l}");
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let op = ScaledIdentity { n: 4, s: 1.0 };
        let y = vec![Complex64::new(1.0, 0.0); 4];
        assert!(solve(&op, &y[..3], &FistaConfig::new(0.0)).is_err());
        assert!(solve(&op, &y, &FistaConfig::new(-1.0)).is_err());
        let mut cfg = FistaConfig::new(0.0);
        cfg.max_iters = 0;
        assert!(solve(&op, &y, &cfg).is_err());
        let mut cfg = FistaConfig::new(0.0);
        cfg.lipschitz = Lipschitz::Fixed(0.0);
        assert!(solve(&op, &y, &cfg).is_err());
        let mut cfg = FistaConfig::new(0.0);
        cfg.error_tol = f64::NAN;
        assert!(solve(&op, &y, &cfg).is_err());
    }
}
