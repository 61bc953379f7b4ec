//! Elastic-net penalized logistic regression.
//!
//! Minimizes
//!
//! ```text
//! Σ_i [log(1 + e^{η_i}) − y_i η_i] + λ₂ Σ_j β_j² + λ₁ Σ_j |β_j|,   η = β₀ + Xβ
//! ```
//!
//! with the intercept `β₀` left out of both penalties unless
//! [`ElasticNetParams::penalize_intercept`] is set. Inputs are used as given;
//! no standardization is applied.

use serde::{Deserialize, Serialize};

use crate::error::TrainError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Proximal Newton: a coordinate-descent solve of the penalized quadratic
    /// model per outer step, polished by an exact solve on its support, then
    /// a backtracking line search.
    #[default]
    ProximalNewton,
    /// Accelerated proximal gradient with adaptive restart and step halving.
    ProximalGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElasticNetParams {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Proximal-gradient step as a fraction of `1/L`, `L` the smooth part's
    /// Lipschitz bound. Values ≤ 1 make every step a descent step.
    pub learning_rate: f64,
    pub max_iter: usize,
    /// Convergence threshold on the largest coefficient change.
    pub tol: f64,
    pub penalize_intercept: bool,
    pub solver: Solver,
}

impl Default for ElasticNetParams {
    fn default() -> Self {
        ElasticNetParams {
            lambda1: 0.0,
            lambda2: 0.0,
            learning_rate: 1.0,
            max_iter: 100_000,
            tol: 1e-8,
            penalize_intercept: false,
            solver: Solver::ProximalNewton,
        }
    }
}

impl ElasticNetParams {
    pub fn new(lambda1: f64, lambda2: f64) -> Self {
        ElasticNetParams {
            lambda1,
            lambda2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidParameter(format!("elastic net: {m}")));
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return bad("lambda1 must be finite and >= 0");
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return bad("lambda2 must be finite and >= 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad("tol must be > 0");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1");
        }
        Ok(())
    }
}

/// A fitted model. `beta[0]` is the intercept; `beta[j + 1]` weighs column `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct ElasticNetModel<F: Scalar> {
    pub beta: Vec<F>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the training labels were all one class; only the intercept
    /// is fitted then.
    pub single_class: bool,
}

impl<F: Scalar> ElasticNetModel<F> {
    pub fn n_features(&self) -> usize {
        self.beta.len() - 1
    }

    /// Linear predictor `β₀ + Σ_j β_j x_j` for each row. `columns[j]` holds
    /// column `j` of the design, one entry per row.
    pub fn decision_function(&self, columns: &[Vec<F>]) -> Result<Vec<F>, TrainError> {
        let n = self.check_width(columns)?;
        let mut eta = vec![self.beta[0]; n];
        for (col, &b) in columns.iter().zip(&self.beta[1..]) {
            if b != F::zero() {
                for (e, &x) in eta.iter_mut().zip(col) {
                    *e += b * x;
                }
            }
        }
        Ok(eta)
    }

    /// Probabilities, kept strictly inside (0, 1).
    pub fn predict_proba(&self, columns: &[Vec<F>]) -> Result<Vec<F>, TrainError> {
        let lo = F::epsilon();
        let hi = F::one() - F::epsilon();
        Ok(self
            .decision_function(columns)?
            .into_iter()
            .map(|e| e.sigmoid().max(lo).min(hi))
            .collect())
    }

    fn check_width(&self, columns: &[Vec<F>]) -> Result<usize, TrainError> {
        if columns.len() != self.n_features() {
            return Err(TrainError::InvalidParameter(format!(
                "elastic net expects {} columns, got {}",
                self.n_features(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(TrainError::InvalidParameter("ragged design columns".into()));
        }
        Ok(n)
    }
}

/// Design matrix with the intercept column implied, plus labels and penalties.
struct Problem<'a, F> {
    columns: &'a [Vec<F>],
    y: Vec<F>,
    n: usize,
    lambda1: F,
    lambda2: F,
    penalize_intercept: bool,
}

impl<F: Scalar> Problem<'_, F> {
    fn p(&self) -> usize {
        self.columns.len() + 1
    }

    fn penalized(&self, j: usize) -> bool {
        j > 0 || self.penalize_intercept
    }

    fn x(&self, j: usize, i: usize) -> F {
        if j == 0 {
            F::one()
        } else {
            self.columns[j - 1][i]
        }
    }

    fn eta(&self, beta: &[F]) -> Vec<F> {
        let mut eta = vec![beta[0]; self.n];
        for (col, &b) in self.columns.iter().zip(&beta[1..]) {
            if b != F::zero() {
                for (e, &x) in eta.iter_mut().zip(col) {
                    *e += b * x;
                }
            }
        }
        eta
    }

    fn nll(&self, eta: &[F]) -> F {
        eta.iter().zip(&self.y).map(|(&e, &y)| softplus(e) - y * e).sum()
    }

    fn smooth(&self, beta: &[F]) -> F {
        let ridge: F = (0..self.p())
            .filter(|&j| self.penalized(j))
            .map(|j| beta[j] * beta[j])
            .sum();
        self.nll(&self.eta(beta)) + self.lambda2 * ridge
    }

    fn l1(&self, beta: &[F]) -> F {
        self.lambda1
            * (0..self.p())
                .filter(|&j| self.penalized(j))
                .map(|j| beta[j].abs())
                .sum::<F>()
    }

    fn objective(&self, beta: &[F]) -> F {
        self.smooth(beta) + self.l1(beta)
    }

    fn gradient(&self, beta: &[F]) -> Vec<F> {
        let eta = self.eta(beta);
        let resid: Vec<F> = eta.iter().zip(&self.y).map(|(&e, &y)| e.sigmoid() - y).collect();
        (0..self.p())
            .map(|j| {
                let total: F = if j == 0 {
                    resid.iter().copied().sum()
                } else {
                    resid.iter().zip(&self.columns[j - 1]).map(|(&r, &x)| r * x).sum()
                };
                let mut g = total;
                if self.penalized(j) {
                    g += F::of(2.0) * self.lambda2 * beta[j];
                }
                g
            })
            .collect()
    }

    fn threshold(&self, j: usize, v: F, t: F) -> F {
        if self.penalized(j) {
            soft_threshold(v, t)
        } else {
            v
        }
    }

    /// Upper bound on the Lipschitz constant of the smooth gradient:
    /// `‖X̃‖₂² / 4 + 2λ₂`, the norm from power iteration with a safety margin.
    fn lipschitz(&self) -> F {
        let p = self.p();
        let mut v = vec![F::one() / F::of(p as f64).sqrt(); p];
        let mut norm = F::zero();
        for _ in 0..100 {
            let xv: Vec<F> = (0..self.n).map(|i| (0..p).map(|j| self.x(j, i) * v[j]).sum()).collect();
            let w: Vec<F> = (0..p)
                .map(|j| (0..self.n).map(|i| self.x(j, i) * xv[i]).sum())
                .collect();
            let next = w.iter().map(|&a| a * a).sum::<F>().sqrt();
            if next == F::zero() {
                break;
            }
            let converged = (next - norm).abs() <= F::of(1e-10) * next;
            norm = next;
            v = w.into_iter().map(|a| a / next).collect();
            if converged {
                break;
            }
        }
        norm * F::of(1.05) / F::of(4.0) + F::of(2.0) * self.lambda2 + F::epsilon()
    }
}

fn softplus<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn soft_threshold<F: Scalar>(v: F, t: F) -> F {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        F::zero()
    }
}

fn max_abs_diff<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

fn validate_inputs<F: Scalar>(columns: &[Vec<F>], y: &[u8]) -> Result<(), TrainError> {
    if y.is_empty() {
        return Err(TrainError::EmptyTrain);
    }
    for (j, c) in columns.iter().enumerate() {
        if c.len() != y.len() {
            return Err(TrainError::InvalidParameter(format!(
                "design column {j} has {} rows, labels have {}",
                c.len(),
                y.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(TrainError::InvalidParameter(format!("design column {j} is not finite")));
        }
    }
    if let Some(v) = y.iter().find(|&&v| v > 1) {
        return Err(TrainError::LabelMismatch(format!("elastic net label {v} is not 0/1")));
    }
    Ok(())
}

/// Value of the smooth part (log-loss plus ridge term) at `beta`.
pub fn smooth_objective<F: Scalar>(columns: &[Vec<F>], y: &[u8], beta: &[F], params: &ElasticNetParams) -> F {
    problem(columns, y, params).smooth(beta)
}

/// Gradient of [`smooth_objective`] with respect to `beta`.
pub fn smooth_gradient<F: Scalar>(columns: &[Vec<F>], y: &[u8], beta: &[F], params: &ElasticNetParams) -> Vec<F> {
    problem(columns, y, params).gradient(beta)
}

/// Full penalized objective at `beta`.
pub fn objective<F: Scalar>(columns: &[Vec<F>], y: &[u8], beta: &[F], params: &ElasticNetParams) -> F {
    problem(columns, y, params).objective(beta)
}

fn problem<'a, F: Scalar>(columns: &'a [Vec<F>], y: &[u8], params: &ElasticNetParams) -> Problem<'a, F> {
    Problem {
        columns,
        y: y.iter().map(|&v| F::of(v as f64)).collect(),
        n: y.len(),
        lambda1: F::of(params.lambda1),
        lambda2: F::of(params.lambda2),
        penalize_intercept: params.penalize_intercept,
    }
}

/// Fits the model on `columns` (one vector per feature) and labels `y`.
pub fn fit_elastic_net<F: Scalar>(
    columns: &[Vec<F>],
    y: &[u8],
    params: &ElasticNetParams,
) -> Result<ElasticNetModel<F>, TrainError> {
    fit_traced(columns, y, params, &mut |_| {})
}

/// As [`fit_elastic_net`], calling `trace` with the objective after each
/// accepted iterate.
pub fn fit_traced<F: Scalar>(
    columns: &[Vec<F>],
    y: &[u8],
    params: &ElasticNetParams,
    trace: &mut dyn FnMut(F),
) -> Result<ElasticNetModel<F>, TrainError> {
    params.validate()?;
    validate_inputs(columns, y)?;
    let prob = problem(columns, y, params);
    let n_pos = y.iter().filter(|&&v| v == 1).count();
    let p = prob.p();
    let mut beta = vec![F::zero(); p];

    if n_pos == 0 || n_pos == y.len() {
        // Smoothed base rate keeps the intercept finite.
        let rate = (n_pos as f64 + 0.5) / (y.len() as f64 + 1.0);
        beta[0] = F::of((rate / (1.0 - rate)).ln());
        return Ok(ElasticNetModel {
            beta,
            iterations: 0,
            converged: true,
            single_class: true,
        });
    }
    let rate = n_pos as f64 / y.len() as f64;
    beta[0] = F::of((rate / (1.0 - rate)).ln());

    let (iterations, converged) = match params.solver {
        Solver::ProximalNewton => prox_newton(&prob, &mut beta, params, trace),
        Solver::ProximalGradient => prox_gradient(&prob, &mut beta, params, trace),
    };
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(TrainError::InvalidParameter("elastic net diverged".into()));
    }
    Ok(ElasticNetModel {
        beta,
        iterations,
        converged,
        single_class: false,
    })
}

const MAX_HALVINGS: usize = 60;

fn prox_gradient<F: Scalar>(
    prob: &Problem<'_, F>,
    beta: &mut Vec<F>,
    params: &ElasticNetParams,
    trace: &mut dyn FnMut(F),
) -> (usize, bool) {
    let mut step = F::of(params.learning_rate) / prob.lipschitz();
    let mut obj = prob.objective(beta);
    let mut momentum_point = beta.clone();
    let mut t = F::one();
    let prox_step = |from: &[F], step: F| -> Vec<F> {
        let g = prob.gradient(from);
        (0..from.len())
            .map(|j| prob.threshold(j, from[j] - step * g[j], step * prob.lambda1))
            .collect()
    };

    for iter in 1..=params.max_iter {
        let mut cand = prox_step(&momentum_point, step);
        let mut cand_obj = prob.objective(&cand);
        if cand_obj > obj {
            // Restart from the last iterate; halve the step until it descends.
            t = F::one();
            let mut halvings = 0;
            loop {
                cand = prox_step(beta, step);
                cand_obj = prob.objective(&cand);
                if cand_obj <= obj || halvings == MAX_HALVINGS {
                    break;
                }
                step /= F::of(2.0);
                halvings += 1;
            }
            if cand_obj > obj {
                return (iter, false);
            }
        }
        let change = max_abs_diff(&cand, beta);
        let t_next = (F::one() + (F::one() + F::of(4.0) * t * t).sqrt()) / F::of(2.0);
        let mix = (t - F::one()) / t_next;
        momentum_point = cand.iter().zip(beta.iter()).map(|(&c, &b)| c + mix * (c - b)).collect();
        t = t_next;
        *beta = cand;
        obj = cand_obj;
        trace(obj);
        if change < F::of(params.tol) {
            return (iter, true);
        }
    }
    (params.max_iter, false)
}

fn prox_newton<F: Scalar>(
    prob: &Problem<'_, F>,
    beta: &mut Vec<F>,
    params: &ElasticNetParams,
    trace: &mut dyn FnMut(F),
) -> (usize, bool) {
    let p = prob.p();
    let two = F::of(2.0);
    let mut obj = prob.objective(beta);

    for iter in 1..=params.max_iter {
        let eta = prob.eta(beta);
        let mut resid = vec![F::zero(); prob.n];
        let mut w = vec![F::zero(); prob.n];
        for i in 0..prob.n {
            let pi = eta[i].sigmoid();
            resid[i] = pi - prob.y[i];
            w[i] = pi * (F::one() - pi);
        }
        // Gradient and Hessian of the smooth part.
        let mut grad = vec![F::zero(); p];
        let mut hess = vec![F::zero(); p * p];
        for i in 0..prob.n {
            for a in 0..p {
                let xa = prob.x(a, i);
                if xa == F::zero() {
                    continue;
                }
                grad[a] += resid[i] * xa;
                let wx = w[i] * xa;
                for b in a..p {
                    hess[a * p + b] += wx * prob.x(b, i);
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                hess[a * p + b] = hess[b * p + a];
            }
            if prob.penalized(a) {
                grad[a] += two * prob.lambda2 * beta[a];
                hess[a * p + a] += two * prob.lambda2;
            }
        }

        let direction = newton_direction(prob, beta, &grad, &hess);
        let direction = match support_direction(prob, beta, &grad, &hess, &direction) {
            Some(exact)
                if model_value(prob, beta, &grad, &hess, &exact)
                    <= model_value(prob, beta, &grad, &hess, &direction) =>
            {
                exact
            }
            _ => direction,
        };
        // Predicted decrease of the penalized quadratic model, for Armijo.
        let l1_now = prob.l1(beta);
        let full: Vec<F> = beta.iter().zip(&direction).map(|(&b, &d)| b + d).collect();
        let decrease = grad.iter().zip(&direction).map(|(&g, &d)| g * d).sum::<F>() + prob.l1(&full) - l1_now;

        let mut step = F::one();
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<F> = beta.iter().zip(&direction).map(|(&b, &d)| b + step * d).collect();
            let cand_obj = prob.objective(&cand);
            if cand_obj <= obj + F::of(1e-4) * step * decrease.min(F::zero()) {
                accepted = Some((cand, cand_obj));
                break;
            }
            step /= two;
        }
        let Some((cand, cand_obj)) = accepted else {
            // No descent left at working precision.
            return (
                iter,
                max_abs_diff(&direction, &vec![F::zero(); p]) < F::of(params.tol).sqrt(),
            );
        };
        let change = max_abs_diff(&cand, beta);
        *beta = cand;
        obj = cand_obj;
        trace(obj);
        if change < F::of(params.tol) {
            return (iter, true);
        }
    }
    (params.max_iter, false)
}

/// Coordinate descent on `gᵀd + ½ dᵀHd + λ₁ Σ_j |β_j + d_j|`.
fn newton_direction<F: Scalar>(prob: &Problem<'_, F>, beta: &[F], grad: &[F], hess: &[F]) -> Vec<F> {
    let p = beta.len();
    let mut d = vec![F::zero(); p];
    let mut hd = vec![F::zero(); p];
    for _ in 0..10_000 {
        let mut biggest = F::zero();
        for j in 0..p {
            let hjj = hess[j * p + j];
            if hjj <= F::min_positive_value() {
                continue;
            }
            let partial = grad[j] + hd[j] - hjj * d[j];
            let z = prob.threshold(j, hjj * beta[j] - partial, prob.lambda1) / hjj;
            let dj = z - beta[j];
            let delta = dj - d[j];
            if delta != F::zero() {
                for a in 0..p {
                    hd[a] += hess[a * p + j] * delta;
                }
                d[j] = dj;
                biggest = biggest.max(delta.abs() * (F::one() + beta[j].abs()).recip());
            }
        }
        if biggest < F::of(1e-13) {
            break;
        }
    }
    d
}

/// Exact minimizer of the quadratic model on the support and signs found by
/// coordinate descent, which stalls when columns are nearly collinear.
/// `None` if the reduced system is not positive definite or the signs flip.
fn support_direction<F: Scalar>(prob: &Problem<'_, F>, beta: &[F], grad: &[F], hess: &[F], d: &[F]) -> Option<Vec<F>> {
    let p = beta.len();
    let sign = |j: usize| {
        let v = beta[j] + d[j];
        if !prob.penalized(j) || v == F::zero() {
            F::zero()
        } else {
            v.signum()
        }
    };
    let support: Vec<usize> = (0..p)
        .filter(|&j| !prob.penalized(j) || beta[j] + d[j] != F::zero())
        .collect();
    let mut out = vec![F::zero(); p];
    for j in 0..p {
        if !support.contains(&j) {
            out[j] = -beta[j];
        }
    }
    let m = support.len();
    let mut a = vec![F::zero(); m * m];
    let mut rhs = vec![F::zero(); m];
    for (r, &i) in support.iter().enumerate() {
        let fixed: F = (0..p).map(|j| hess[i * p + j] * out[j]).sum();
        rhs[r] = -(grad[i] + prob.lambda1 * sign(i) + fixed);
        for (c, &j) in support.iter().enumerate() {
            a[r * m + c] = hess[i * p + j];
        }
    }
    let z = cholesky_solve(&mut a, rhs)?;
    for (r, &j) in support.iter().enumerate() {
        out[j] = z[r];
        let s = sign(j);
        if s != F::zero() && (beta[j] + z[r]) * s <= F::zero() {
            return None;
        }
    }
    Some(out)
}

/// `gᵀd + ½ dᵀHd + λ₁ Σ_j |β_j + d_j|`, the penalized quadratic model.
fn model_value<F: Scalar>(prob: &Problem<'_, F>, beta: &[F], grad: &[F], hess: &[F], d: &[F]) -> F {
    let p = beta.len();
    let mut q = F::zero();
    for a in 0..p {
        let hd: F = (0..p).map(|b| hess[a * p + b] * d[b]).sum();
        q += d[a] * (grad[a] + F::of(0.5) * hd);
    }
    let full: Vec<F> = beta.iter().zip(d).map(|(&b, &x)| b + x).collect();
    q + prob.l1(&full)
}

/// Solves `A x = b` in place for symmetric positive definite `A` (row-major).
fn cholesky_solve<F: Scalar>(a: &mut [F], mut b: Vec<F>) -> Option<Vec<F>> {
    let m = b.len();
    for j in 0..m {
        let mut diag = a[j * m + j];
        for k in 0..j {
            diag -= a[j * m + k] * a[j * m + k];
        }
        if diag.is_nan() || diag <= F::zero() {
            return None;
        }
        let diag = diag.sqrt();
        a[j * m + j] = diag;
        for i in j + 1..m {
            let mut v = a[i * m + j];
            for k in 0..j {
                v -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = v / diag;
        }
    }
    for i in 0..m {
        for k in 0..i {
            b[i] = b[i] - a[i * m + k] * b[k];
        }
        b[i] /= a[i * m + i];
    }
    for i in (0..m).rev() {
        for k in i + 1..m {
            b[i] = b[i] - a[k * m + i] * b[k];
        }
        b[i] /= a[i * m + i];
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lcg_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let x1 = next();
            let x2 = next() * 2.0 - 1.0;
            let p = 1.0 / (1.0 + (-(3.0 * x1 - 1.5 + x2)).exp());
            y.push((next() < p) as u8);
            a.push(x1);
            b.push(x2);
        }
        (vec![a, b], y)
    }

    #[test]
    fn intercept_only_half_positive() {
        let y = vec![1, 0, 1, 0, 0, 1];
        let m = fit_elastic_net::<f64>(&[], &y, &ElasticNetParams::default()).unwrap();
        assert_abs_diff_eq!(m.beta[0], 0.0, epsilon = 1e-12);
        let p = m.predict_proba(&[]).unwrap();
        assert!(p.is_empty());
        let p = ElasticNetModel {
            beta: m.beta.clone(),
            iterations: 0,
            converged: true,
            single_class: false,
        }
        .predict_proba(&[])
        .unwrap();
        assert!(p.iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn huge_l1_zeroes_feature_and_keeps_base_rate() {
        let (cols, y) = lcg_data(200, 3);
        let cols = vec![cols[0].clone()];
        for solver in [Solver::ProximalNewton, Solver::ProximalGradient] {
            let params = ElasticNetParams {
                lambda1: 1e6,
                solver,
                ..ElasticNetParams::default()
            };
            let m = fit_elastic_net(&cols, &y, &params).unwrap();
            assert_eq!(m.beta[1], 0.0);
            let rate = y.iter().map(|&v| v as f64).sum::<f64>() / y.len() as f64;
            assert_abs_diff_eq!(m.beta[0], (rate / (1.0 - rate)).ln(), epsilon = 1e-7);
        }
    }

    #[test]
    fn predict_examples() {
        let m = ElasticNetModel {
            beta: vec![1.0, 2.0],
            iterations: 0,
            converged: true,
            single_class: false,
        };
        assert_abs_diff_eq!(
            m.predict_proba(&[vec![0.5]]).unwrap()[0],
            0.880_797_077_977_882_3,
            epsilon = 1e-15
        );
        let m = ElasticNetModel {
            beta: vec![0.0, 1.0],
            ..m
        };
        assert_eq!(m.predict_proba(&[vec![0.0]]).unwrap(), vec![0.5]);
        assert!(m.predict_proba(&[vec![0.0], vec![1.0]]).is_err());
    }

    fn twenty_rows() -> (Vec<Vec<f64>>, Vec<u8>) {
        let x1: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let x2 = vec![
            0.3, -0.2, 0.8, -0.5, 0.1, 0.9, -0.7, 0.4, -0.1, 0.6, -0.9, 0.2, -0.4, 0.7, -0.3, 0.5, -0.8, 0.0, -0.6,
            0.35,
        ];
        let y = vec![0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 1, 0, 1];
        (vec![x1, x2], y)
    }

    #[test]
    fn unregularized_fit_matches_newton_oracle() {
        // 50-digit Newton iterations give beta = (-2.18132387892659923,
        // 3.57561728947916288, 1.72423688598876928) and this loss.
        let oracle_loss = 10.995_678_943_026_473;
        let (cols, y) = twenty_rows();
        for solver in [Solver::ProximalNewton, Solver::ProximalGradient] {
            let params = ElasticNetParams {
                solver,
                ..ElasticNetParams::default()
            };
            let m = fit_elastic_net(&cols, &y, &params).unwrap();
            assert!(m.converged, "{solver:?}");
            let g = smooth_gradient(&cols, &y, &m.beta, &params);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm <= 1e-4, "{solver:?}: {norm}");
            assert_abs_diff_eq!(objective(&cols, &y, &m.beta, &params), oracle_loss, epsilon = 1e-6);
            assert_abs_diff_eq!(m.beta[1], 3.575_617_289_479_163, epsilon = 1e-5);
        }
    }

    #[test]
    fn nearly_collinear_columns_converge_in_few_steps() {
        let (mut cols, y) = lcg_data(400, 3);
        let twin: Vec<f64> = cols[0].iter().zip(&cols[1]).map(|(a, b)| a + 1e-3 * b).collect();
        cols.push(twin);
        let params = ElasticNetParams::new(1e-3, 1e-6);
        let m = fit_elastic_net(&cols, &y, &params).unwrap();
        assert!(m.converged);
        assert!(m.iterations < 40, "{} iterations", m.iterations);
        let g = smooth_gradient(&cols, &y, &m.beta, &params);
        for (gj, bj) in g.iter().zip(&m.beta).skip(1) {
            if *bj != 0.0 {
                assert_abs_diff_eq!(*gj, -1e-3 * bj.signum(), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn proximal_gradient_objective_never_increases() {
        let (cols, y) = lcg_data(60, 5);
        let params = ElasticNetParams {
            lambda1: 0.5,
            lambda2: 0.1,
            solver: Solver::ProximalGradient,
            max_iter: 5000,
            ..ElasticNetParams::default()
        };
        let mut trace = Vec::new();
        fit_traced(&cols, &y, &params, &mut |v: f64| trace.push(v)).unwrap();
        assert!(trace.len() > 2);
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn solvers_agree() {
        let (cols, y) = lcg_data(80, 9);
        let mut params = ElasticNetParams::new(0.3, 0.2);
        let a = fit_elastic_net(&cols, &y, &params).unwrap();
        params.solver = Solver::ProximalGradient;
        let b = fit_elastic_net(&cols, &y, &params).unwrap();
        for (x, z) in a.beta.iter().zip(&b.beta) {
            assert_abs_diff_eq!(x, z, epsilon = 1e-6);
        }
    }

    #[test]
    fn ridge_grid_shrinks_coefficients() {
        let (cols, y) = lcg_data(100, 21);
        let mut prev = f64::INFINITY;
        for l2 in [0.0, 0.01, 0.1, 1.0, 10.0, 100.0] {
            let m = fit_elastic_net(&cols, &y, &ElasticNetParams::new(0.0, l2)).unwrap();
            let norm = m.beta[1..].iter().map(|b| b * b).sum::<f64>().sqrt();
            assert!(norm <= prev + 1e-9, "lambda2 {l2}: {norm} > {prev}");
            prev = norm;
        }
    }

    #[test]
    fn single_class_sets_flag() {
        let m = fit_elastic_net(&[vec![0.1f64, 0.2, 0.3]], &[0, 0, 0], &ElasticNetParams::default()).unwrap();
        assert!(m.single_class);
        assert_eq!(m.beta[1], 0.0);
        assert!(m.beta[0].is_finite() && m.beta[0] < 0.0);
    }

    #[test]
    fn penalizing_the_intercept_pulls_it_toward_zero() {
        let (cols, y) = lcg_data(100, 2);
        let cols = vec![cols[1].clone()];
        let free = fit_elastic_net(&cols, &y, &ElasticNetParams::new(0.0, 5.0)).unwrap();
        let tied = fit_elastic_net(
            &cols,
            &y,
            &ElasticNetParams {
                penalize_intercept: true,
                ..ElasticNetParams::new(0.0, 5.0)
            },
        )
        .unwrap();
        assert!(tied.beta[0].abs() < free.beta[0].abs());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ElasticNetParams::default();
        assert!(fit_elastic_net(&[vec![1.0, f64::NAN]], &[0, 1], &p).is_err());
        assert!(fit_elastic_net(&[vec![1.0]], &[0, 1], &p).is_err());
        assert!(fit_elastic_net(&[vec![1.0, 2.0]], &[0, 2], &p).is_err());
        assert!(fit_elastic_net::<f64>(&[], &[], &p).is_err());
        assert!(ElasticNetParams::new(-1.0, 0.0).validate().is_err());
    }
}
