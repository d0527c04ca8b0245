//! Linear mixed model with a random intercept and slope per group:
//!
//! `y_ij = (a + u_j0) + (b + u_j1) x_ij + e_ij`, `u_j ~ N(0, G)`, `e_ij ~ N(0, s2)`.
//!
//! Fitted by maximum likelihood with ECME: each iteration sets the fixed
//! effects to their generalized least squares solution, then takes an EM step
//! for the variance parameters. Everything is computed from per-group
//! sufficient statistics (`Z'Z`, `Z'y`, `y'y`, with `Z = [1, x]`), so each
//! iteration costs O(groups) 2x2 solves and never needs `G^-1`.

use std::collections::BTreeMap;
use std::fmt::Display;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedConfig {
    pub max_iter: usize,
    /// Relative log-likelihood change that counts as converged.
    pub tol: f64,
    /// When false, `G` is held at zero and the fit reduces to pooled OLS.
    pub estimate_covariance: bool,
    pub min_groups: usize,
    pub min_group_size: usize,
    /// Lower bound on the residual variance, relative to `max(1, var(y))`.
    pub residual_floor: f64,
}

impl Default for MixedConfig {
    fn default() -> Self {
        MixedConfig {
            max_iter: 200,
            tol: 1e-10,
            estimate_covariance: true,
            min_groups: 2,
            min_group_size: 3,
            residual_floor: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEffect {
    pub group: String,
    pub n: usize,
    /// Posterior-mode deviations from the fixed effects.
    pub intercept_dev: f64,
    pub slope_dev: f64,
    /// Fixed effect plus deviation.
    pub intercept: f64,
    pub slope: f64,
    /// Posterior standard deviations of the deviations.
    pub intercept_sd: f64,
    pub slope_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedLinearModel {
    pub fixed_intercept: f64,
    pub fixed_slope: f64,
    /// Standard errors of `(fixed_intercept, fixed_slope)`.
    pub fixed_se: [f64; 2],
    pub group_effects: Vec<GroupEffect>,
    /// Random-effect covariance `G`, row-major.
    pub cov: [[f64; 2]; 2],
    pub residual_var: f64,
    pub converged: bool,
    pub loglik: f64,
    pub iterations: usize,
    pub loglik_trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MixedLinearModel {
    pub fn group(&self, name: &str) -> Option<&GroupEffect> {
        self.group_effects.iter().find(|g| g.group == name)
    }
}

#[derive(Debug, Clone)]
struct GroupStats {
    name: String,
    n: usize,
    ztz: Matrix2<f64>,
    zty: Vector2<f64>,
    yty: f64,
}

/// Per-group posterior of the random effects at given parameters.
struct Posterior {
    mean: Vector2<f64>,
    cov: Matrix2<f64>,
    loglik: f64,
}

fn posterior(g: &GroupStats, beta: &Vector2<f64>, gmat: &Matrix2<f64>, s2: f64) -> Posterior {
    // V = s2 I + Z G Z';  A = s2 I + G Z'Z
    let a = Matrix2::identity() * s2 + gmat * g.ztz;
    let a_inv = a.try_inverse().expect("s2 > 0 keeps A invertible");
    let ztr = g.zty - g.ztz * beta;
    let rtr = g.yty - 2.0 * beta.dot(&g.zty) + beta.dot(&(g.ztz * beta));
    let ag = a_inv * gmat;
    let mean = ag * ztr;
    let cov = ag * s2;
    let n = g.n as f64;
    let logdet_v = (n - 2.0) * s2.ln() + a.determinant().ln();
    let quad = (rtr - ztr.dot(&(ag * ztr))) / s2;
    let loglik = -0.5 * (n * (2.0 * std::f64::consts::PI).ln() + logdet_v + quad);
    Posterior { mean, cov, loglik }
}

fn ols(ztz: &Matrix2<f64>, zty: &Vector2<f64>) -> Option<Vector2<f64>> {
    ztz.try_inverse().map(|inv| inv * zty)
}

/// Generalized least squares for the fixed effects at given variance
/// parameters, using `Z'V^-1 Z = (Z'Z - Z'Z A^-1 G Z'Z) / s2`.
fn gls(groups: &[GroupStats], gmat: &Matrix2<f64>, s2: f64) -> Option<Vector2<f64>> {
    let mut lhs = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    for g in groups {
        let a = Matrix2::identity() * s2 + gmat * g.ztz;
        let sag = g.ztz * a.try_inverse()? * gmat;
        lhs += g.ztz - sag * g.ztz;
        rhs += g.zty - sag * g.zty;
    }
    lhs.try_inverse().map(|inv| inv * rhs)
}

pub fn fit_mixed_linear<K: Ord + Clone + Display>(x: &[f64], y: &[f64], group: &[K]) -> Result<MixedLinearModel> {
    fit_mixed_linear_with(x, y, group, MixedConfig::default())
}

pub fn fit_mixed_linear_with<K: Ord + Clone + Display>(
    x: &[f64],
    y: &[f64],
    group: &[K],
    cfg: MixedConfig,
) -> Result<MixedLinearModel> {
    if x.len() != y.len() || x.len() != group.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: x {}, y {}, group {}",
            x.len(),
            y.len(),
            group.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite input value".into()));
    }
    let mut by_group: BTreeMap<K, GroupStats> = BTreeMap::new();
    for ((&xi, &yi), k) in x.iter().zip(y).zip(group) {
        let g = by_group.entry(k.clone()).or_insert_with(|| GroupStats {
            name: k.to_string(),
            n: 0,
            ztz: Matrix2::zeros(),
            zty: Vector2::zeros(),
            yty: 0.0,
        });
        let z = Vector2::new(1.0, xi);
        g.n += 1;
        g.ztz += z * z.transpose();
        g.zty += z * yi;
        g.yty += yi * yi;
    }
    if by_group.len() < cfg.min_groups {
        return Err(Error::Degenerate(format!(
            "mixed model needs at least {} groups, got {}",
            cfg.min_groups,
            by_group.len()
        )));
    }
    if let Some(small) = by_group.values().find(|g| g.n < cfg.min_group_size) {
        return Err(Error::Degenerate(format!(
            "group `{}` has {} points; at least {} required",
            small.name, small.n, cfg.min_group_size
        )));
    }
    let groups: Vec<GroupStats> = by_group.into_values().collect();
    let m = groups.len() as f64;
    let n_total = x.len() as f64;

    let xtx: Matrix2<f64> = groups.iter().map(|g| g.ztz).sum();
    let xty: Vector2<f64> = groups.iter().map(|g| g.zty).sum();
    let xtx_inv = xtx.try_inverse().ok_or_else(|| {
        Error::Degenerate("predictor has no variation; slope is not identifiable".into())
    })?;

    let y_mean = y.iter().sum::<f64>() / n_total;
    let y_var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n_total;
    let s2_floor = cfg.residual_floor * y_var.max(1.0);

    // initial point: pooled OLS, spread of per-group OLS fits
    let mut beta = xtx_inv * xty;
    let rss: f64 = groups
        .iter()
        .map(|g| g.yty - 2.0 * beta.dot(&g.zty) + beta.dot(&(g.ztz * beta)))
        .sum();
    let mut s2 = (rss / n_total).max(s2_floor);
    let mut gmat = Matrix2::zeros();
    if cfg.estimate_covariance {
        for g in &groups {
            if let Some(b) = ols(&g.ztz, &g.zty) {
                let d = b - beta;
                gmat += d * d.transpose() / m;
            }
        }
        gmat += Matrix2::identity() * 1e-6 * s2.max(1e-6);
    }

    let mut warnings = Vec::new();
    let mut ll: f64 = groups.iter().map(|g| posterior(g, &beta, &gmat, s2).loglik).sum();
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let mut warned_singular = false;

    while iterations < cfg.max_iter {
        // conditional maximization of the marginal likelihood over beta
        if let Some(b) = gls(&groups, &gmat, s2) {
            beta = b;
        }
        let posts: Vec<Posterior> = groups.iter().map(|g| posterior(g, &beta, &gmat, s2)).collect();
        let ss: f64 = groups
            .iter()
            .zip(&posts)
            .map(|(g, p)| {
                let c = beta + p.mean;
                g.yty - 2.0 * c.dot(&g.zty) + c.dot(&(g.ztz * c)) + (g.ztz * p.cov).trace()
            })
            .sum();
        let new_s2 = (ss / n_total).max(s2_floor);

        let mut new_g = Matrix2::zeros();
        if cfg.estimate_covariance {
            for p in &posts {
                new_g += (p.mean * p.mean.transpose() + p.cov) / m;
            }
            new_g = (new_g + new_g.transpose()) * 0.5;
            let eig = new_g.symmetric_eigenvalues();
            let scale = new_g.trace().abs().max(1e-300);
            if eig.min() < 1e-12 * scale {
                if !warned_singular {
                    warnings.push(format!(
                        "random-effect covariance became singular at iteration {}; ridge-stabilized",
                        iterations + 1
                    ));
                    warned_singular = true;
                }
                if eig.min() < 0.0 {
                    new_g += Matrix2::identity() * (-eig.min() + 1e-14 * scale);
                }
            }
        }

        s2 = new_s2;
        gmat = new_g;
        iterations += 1;

        let new_ll: f64 = groups.iter().map(|g| posterior(g, &beta, &gmat, s2).loglik).sum();
        let rel = (new_ll - ll).abs() / ll.abs().max(1e-300);
        ll = new_ll;
        trace.push(ll);
        if rel < cfg.tol {
            converged = true;
            break;
        }
    }

    let posts: Vec<Posterior> = groups.iter().map(|g| posterior(g, &beta, &gmat, s2)).collect();

    // Var(beta_hat) = (sum_j X_j' V_j^-1 X_j)^-1,  X'V^-1X = (Z'Z - Z'Z A^-1 G Z'Z) / s2
    let info: Matrix2<f64> = groups
        .iter()
        .map(|g| {
            let a = Matrix2::identity() * s2 + gmat * g.ztz;
            let ag = a.try_inverse().expect("invertible") * gmat;
            (g.ztz - g.ztz * ag * g.ztz) / s2
        })
        .sum();
    let fixed_se = info
        .try_inverse()
        .map(|c| [c[(0, 0)].max(0.0).sqrt(), c[(1, 1)].max(0.0).sqrt()])
        .unwrap_or([f64::NAN, f64::NAN]);

    let group_effects = groups
        .iter()
        .zip(&posts)
        .map(|(g, p)| GroupEffect {
            group: g.name.clone(),
            n: g.n,
            intercept_dev: p.mean[0],
            slope_dev: p.mean[1],
            intercept: beta[0] + p.mean[0],
            slope: beta[1] + p.mean[1],
            intercept_sd: p.cov[(0, 0)].max(0.0).sqrt(),
            slope_sd: p.cov[(1, 1)].max(0.0).sqrt(),
        })
        .collect();

    if !converged {
        warnings.push(format!("EM stopped after {iterations} iterations without converging"));
    }

    Ok(MixedLinearModel {
        fixed_intercept: beta[0],
        fixed_slope: beta[1],
        fixed_se,
        group_effects,
        cov: [[gmat[(0, 0)], gmat[(0, 1)]], [gmat[(1, 0)], gmat[(1, 1)]]],
        residual_var: s2,
        converged,
        loglik: ll,
        iterations,
        loglik_trace: trace,
        warnings,
    })
}
