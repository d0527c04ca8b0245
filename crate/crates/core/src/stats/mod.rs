//! Metrics and model fitting.

mod metrics;
mod mixed;
mod ordinal;

pub use metrics::{mae, pearson, Correlation};
pub use mixed::{fit_mixed_linear, fit_mixed_linear_with, GroupEffect, MixedConfig, MixedLinearModel};
pub use ordinal::{
    fit_ordered_logistic, fit_ordered_logistic_with, ordered_logit_loglik, predict_ordered_logistic,
    OrderedLogitModel, OrdinalConfig,
};

/// Numerically stable logistic function.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}
