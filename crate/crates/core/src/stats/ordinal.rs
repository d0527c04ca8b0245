//! Proportional-odds (ordered logistic) regression with one predictor.
//!
//! `P(y <= k | x) = logistic(theta_k - beta * x)` for the two cut points
//! between `Minus|Neutral` and `Neutral|Plus`. The likelihood is maximized by
//! Newton's method over `(beta, theta_1, ln(theta_2 - theta_1))`, which keeps
//! the thresholds ordered, with step-halving so the log-likelihood never drops.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{logistic, softplus};
use crate::error::{Error, Result};
use crate::model::FactualityCategory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrdinalConfig {
    pub max_iter: usize,
    /// Relative log-likelihood change that counts as converged.
    pub tol: f64,
}

impl Default for OrdinalConfig {
    fn default() -> Self {
        OrdinalConfig {
            max_iter: 200,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedLogitModel {
    pub beta: f64,
    /// `(theta_{-|o}, theta_{o|+})`, strictly increasing.
    pub thresholds: [f64; 2],
    pub converged: bool,
    pub loglik: f64,
    pub iterations: usize,
    /// Observed-information standard errors of `(beta, theta_1, theta_2)`.
    pub std_errors: Option<[f64; 3]>,
    pub n: usize,
    /// Log-likelihood after each accepted iterate, starting with the initial point.
    pub loglik_trace: Vec<f64>,
}

/// `(P(Minus), P(Neutral), P(Plus))` at `x`.
pub fn predict_ordered_logistic(m: &OrderedLogitModel, x: f64) -> [f64; 3] {
    let c1 = logistic(m.thresholds[0] - m.beta * x);
    let c2 = logistic(m.thresholds[1] - m.beta * x).max(c1);
    [c1, c2 - c1, 1.0 - c2]
}

/// Log-likelihood of the data at the given parameters.
pub fn ordered_logit_loglik(beta: f64, thresholds: [f64; 2], x: &[f64], y: &[FactualityCategory]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| obs_loglik(thresholds[0] - beta * xi, thresholds[1] - beta * xi, yi))
        .sum()
}

fn obs_loglik(eta1: f64, eta2: f64, y: FactualityCategory) -> f64 {
    match y {
        FactualityCategory::Minus => -softplus(-eta1),
        FactualityCategory::Plus => -softplus(eta2),
        FactualityCategory::Neutral => {
            let p = logistic(eta2) - logistic(eta1);
            if p > 1e-12 {
                p.ln()
            } else {
                // ln(F2 - F1) = ln F2 + ln(1 - F1/F2), in log space
                let l2 = -softplus(-eta2);
                let l1 = -softplus(-eta1);
                l2 + (-(l1 - l2).exp()).ln_1p().max(-745.0)
            }
        }
    }
}

/// Gradient and Hessian of the log-likelihood in `(beta, theta_1, theta_2)`.
fn derivatives(beta: f64, t: [f64; 2], x: &[f64], y: &[FactualityCategory]) -> (Vector3<f64>, Matrix3<f64>) {
    let mut g = Vector3::zeros();
    let mut h = Matrix3::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let e1 = t[0] - beta * xi;
        let e2 = t[1] - beta * xi;
        let (f1c, f2c) = (logistic(e1), logistic(e2));
        let (d1, d2) = (f1c * (1.0 - f1c), f2c * (1.0 - f2c));
        // first and second derivatives w.r.t. (eta1, eta2)
        let (l1, l2, l11, l22, l12) = match yi {
            FactualityCategory::Minus => (1.0 - f1c, 0.0, -d1, 0.0, 0.0),
            FactualityCategory::Plus => (0.0, -f2c, 0.0, -d2, 0.0),
            FactualityCategory::Neutral => {
                let p = (f2c - f1c).max(1e-300);
                let dd1 = d1 * (1.0 - 2.0 * f1c);
                let dd2 = d2 * (1.0 - 2.0 * f2c);
                (
                    -d1 / p,
                    d2 / p,
                    -dd1 / p - (d1 / p).powi(2),
                    dd2 / p - (d2 / p).powi(2),
                    d1 * d2 / (p * p),
                )
            }
        };
        g[0] += -xi * (l1 + l2);
        g[1] += l1;
        g[2] += l2;
        let s = l11 + l22 + 2.0 * l12;
        h[(0, 0)] += xi * xi * s;
        h[(0, 1)] += -xi * (l11 + l12);
        h[(0, 2)] += -xi * (l22 + l12);
        h[(1, 1)] += l11;
        h[(2, 2)] += l22;
        h[(1, 2)] += l12;
    }
    h[(1, 0)] = h[(0, 1)];
    h[(2, 0)] = h[(0, 2)];
    h[(2, 1)] = h[(1, 2)];
    (g, h)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Thresholds from category frequencies; exact cumulative logits when all
/// three categories occur, half-count smoothed otherwise.
fn initial_thresholds(counts: [usize; 3]) -> [f64; 2] {
    let n = counts.iter().sum::<usize>() as f64;
    if counts.iter().all(|&c| c > 0) {
        let p1 = counts[0] as f64 / n;
        let p2 = (counts[0] + counts[1]) as f64 / n;
        [logit(p1), logit(p2)]
    } else {
        let s = counts.map(|c| c as f64 + 0.5);
        let total: f64 = s.iter().sum();
        [logit(s[0] / total), logit((s[0] + s[1]) / total)]
    }
}

pub fn fit_ordered_logistic(x: &[f64], y: &[FactualityCategory]) -> Result<OrderedLogitModel> {
    fit_ordered_logistic_with(x, y, OrdinalConfig::default())
}

pub fn fit_ordered_logistic_with(
    x: &[f64],
    y: &[FactualityCategory],
    cfg: OrdinalConfig,
) -> Result<OrderedLogitModel> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} predictors vs {} outcomes",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InvalidArgument("ordered logit needs at least 3 observations".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite predictor value".into()));
    }
    let mut counts = [0usize; 3];
    for c in y {
        counts[c.rank()] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::Degenerate("ordered logit needs at least two distinct categories".into()));
    }

    let t0 = initial_thresholds(counts);
    // phi = (beta, theta_1, ln gap)
    let mut phi = Vector3::new(0.0, t0[0], (t0[1] - t0[0]).max(1e-8).ln());
    let unpack = |p: &Vector3<f64>| (p[0], [p[1], p[1] + p[2].exp()]);
    let ll_at = |p: &Vector3<f64>| {
        let (b, t) = unpack(p);
        ordered_logit_loglik(b, t, x, y)
    };

    let mut ll = ll_at(&phi);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let (beta, t) = unpack(&phi);
        let (g, h) = derivatives(beta, t, x, y);
        let gap = phi[2].exp();
        // chain rule to phi: theta_2 = theta_1 + e^gamma
        let j = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, gap);
        let g_phi = j.transpose() * g;
        let mut h_phi = j.transpose() * h * j;
        h_phi[(2, 2)] += gap * g[2];

        if g_phi.amax() < 1e-10 * (x.len() as f64).max(1.0) {
            converged = true;
            break;
        }

        // Newton direction on the negative Hessian, damped until positive definite.
        let neg = -h_phi;
        let scale = neg.diagonal().amax().max(1e-8);
        let mut lambda = 0.0;
        let step = loop {
            let damped = neg + Matrix3::identity() * lambda;
            if let Some(ch) = damped.cholesky() {
                break ch.solve(&g_phi);
            }
            lambda = if lambda == 0.0 { 1e-8 * scale } else { lambda * 10.0 };
            if lambda > 1e12 * scale {
                break g_phi / scale;
            }
        };

        let mut t_step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = phi + step * t_step;
            let cand_ll = ll_at(&cand);
            if cand_ll.is_finite() && cand_ll >= ll {
                accepted = Some((cand, cand_ll));
                break;
            }
            t_step *= 0.5;
        }
        iterations += 1;
        let Some((cand, cand_ll)) = accepted else {
            // no ascent possible along the step: stationary to working precision
            converged = true;
            break;
        };
        let rel = (cand_ll - ll).abs() / ll.abs().max(1e-300);
        phi = cand;
        ll = cand_ll;
        trace.push(ll);
        if rel < cfg.tol {
            converged = true;
            break;
        }
        if phi[0].abs() > 1e3 {
            // coefficient diverging: (quasi-)complete separation
            break;
        }
    }

    // A likelihood at its supremum of 1 only happens under separation.
    if ll.abs() < 1e-6 * x.len() as f64 {
        converged = false;
    }

    let (beta, thresholds) = unpack(&phi);
    let (_, h) = derivatives(beta, thresholds, x, y);
    let std_errors = (-h).try_inverse().and_then(|cov| {
        let se = [cov[(0, 0)], cov[(1, 1)], cov[(2, 2)]];
        se.iter().all(|v| v.is_finite() && *v >= 0.0).then(|| se.map(f64::sqrt))
    });
    Ok(OrderedLogitModel {
        beta,
        thresholds,
        converged,
        loglik: ll,
        iterations,
        std_errors,
        n: x.len(),
        loglik_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use FactualityCategory::*;

    /// Draws categories from the proportional-odds model by inverting the
    /// logistic CDF of the latent variable.
    fn simulate(beta: f64, t: [f64; 2], n: usize, seed: u64) -> (Vec<f64>, Vec<FactualityCategory>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let x: f64 = rng.random_range(-3.0..3.0);
            let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
            let latent = beta * x + (u / (1.0 - u)).ln();
            ys.push(if latent <= t[0] {
                Minus
            } else if latent <= t[1] {
                Neutral
            } else {
                Plus
            });
            xs.push(x);
        }
        (xs, ys)
    }

    #[test]
    fn recovers_known_parameters() {
        let (x, y) = simulate(1.5, [-2.2, 0.4], 5000, 7);
        let m = fit_ordered_logistic(&x, &y).unwrap();
        assert!(m.converged);
        assert!((m.beta - 1.5).abs() < 0.1, "beta {}", m.beta);
        assert!((m.thresholds[0] + 2.2).abs() < 0.2);
        assert!((m.thresholds[1] - 0.4).abs() < 0.2);
        assert!(m.loglik <= 0.0);
        assert!(m.loglik_trace.windows(2).all(|w| w[1] >= w[0]));
        let se = m.std_errors.unwrap();
        assert!(se.iter().all(|&s| s > 0.0 && s < 0.2));
    }

    #[test]
    fn constant_predictor_gives_cumulative_logits() {
        let y: Vec<_> = [Minus; 3].into_iter().chain([Neutral; 5]).chain([Plus; 12]).collect();
        for c in [0.0, 1.7] {
            let x = vec![c; y.len()];
            let m = fit_ordered_logistic(&x, &y).unwrap();
            assert!(m.beta.abs() < 1e-6);
            assert!((m.thresholds[0] - (3.0f64 / 17.0).ln()).abs() < 1e-6);
            assert!((m.thresholds[1] - (8.0f64 / 12.0).ln()).abs() < 1e-6);
        }
    }

    #[test]
    fn separation_is_flagged() {
        let x = [-2.0, -1.5, -1.0, 1.0, 1.5, 2.0];
        let y = [Minus, Minus, Minus, Plus, Plus, Plus];
        let m = fit_ordered_logistic(&x, &y).unwrap();
        assert!(!m.converged);
        assert!(m.beta > 5.0);
        assert!(m.loglik_trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_ordered_logistic(&[1.0, 2.0, 3.0], &[Plus, Plus, Plus]).is_err());
        assert!(fit_ordered_logistic(&[1.0, 2.0], &[Plus, Minus]).is_err());
        assert!(fit_ordered_logistic(&[1.0, 2.0, 3.0], &[Plus, Minus]).is_err());
    }

    #[test]
    fn probabilities() {
        let m = OrderedLogitModel {
            beta: 1.488,
            thresholds: [-2.165, 0.429],
            converged: true,
            loglik: 0.0,
            iterations: 0,
            std_errors: None,
            n: 0,
            loglik_trace: vec![],
        };
        let p = predict_ordered_logistic(&m, 0.0);
        assert!((p[0] - 0.10291).abs() < 1e-4, "{p:?}");
        assert!((p[0] + p[1] - 0.60564).abs() < 1e-4);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(predict_ordered_logistic(&m, 1e6)[2] > 1.0 - 1e-12);
        let flat = OrderedLogitModel { beta: 0.0, ..m };
        assert_eq!(predict_ordered_logistic(&flat, -2.0), predict_ordered_logistic(&flat, 2.0));
    }
}
