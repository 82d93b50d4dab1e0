//! Differentially private topic modeling: vocabulary selection by DP set
//! union, a document-level DP LDA trainer, the composed pipeline, and the
//! budget accountant.
//!
//! Adjacency is document-level with one author per document unless the
//! corpus carries explicit authors, in which case DPSU protects authors.

mod dpsu;
mod lda;
mod pipeline;

use crate::error::{Error, Result};
use crate::stats::std_normal_cdf;

pub use dpsu::{dpsu_histogram, dpsu_select, dpsu_select_detailed, DpsuCalibration, DpsuParams, DpsuRelease};
pub use lda::{default_max_doc_len, dp_lda_train, dp_lda_train_detailed, DpLdaParams, DpLdaRelease};
pub use pipeline::{fdptm, fdptm_bow, privacy_report, FdptmLearner, FdptmOutput};

/// Total `(ε, δ)` of a release.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || epsilon.is_infinite() {
            return Err(Error::invalid(format!("epsilon must be finite and non-negative, got {epsilon}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta must lie in [0, 1], got {delta}")));
        }
        Ok(PrivacyBudget { epsilon, delta })
    }

    /// Sequential (adaptive) composition: budgets add.
    pub fn compose(self, other: PrivacyBudget) -> PrivacyBudget {
        PrivacyBudget {
            epsilon: self.epsilon + other.epsilon,
            delta: self.delta + other.delta,
        }
    }
}

/// Budget of running an `(ε₁, δ₁)` mechanism followed by an `(ε₂, δ₂)` one.
pub fn compose_privacy(e1: f64, d1: f64, e2: f64, d2: f64) -> Result<PrivacyBudget> {
    if d1 >= 1.0 || d2 >= 1.0 {
        return Err(Error::invalid("each delta must be below 1"));
    }
    Ok(PrivacyBudget::new(e1, d1)?.compose(PrivacyBudget::new(e2, d2)?))
}

/// The tight δ of the Gaussian mechanism with noise `sigma` and L2
/// sensitivity `sensitivity` at privacy loss `epsilon`.
fn gaussian_delta(sigma: f64, epsilon: f64, sensitivity: f64) -> f64 {
    let a = sensitivity / (2.0 * sigma);
    let b = epsilon * sigma / sensitivity;
    let tail = std_normal_cdf(-a - b);
    let second = if tail > 0.0 { (epsilon + tail.ln()).exp() } else { 0.0 };
    std_normal_cdf(a - b) - second
}

/// Smallest σ for which Gaussian noise gives `(epsilon, delta)`-DP at the
/// given L2 sensitivity (the analytic Gaussian mechanism), by bisection.
pub fn analytic_gaussian_sigma(epsilon: f64, delta: f64, sensitivity: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must be in (0, 1), got {delta}")));
    }
    if !(sensitivity > 0.0 && sensitivity.is_finite()) {
        return Err(Error::invalid("sensitivity must be positive"));
    }
    let mut hi = sensitivity;
    while gaussian_delta(hi, epsilon, sensitivity) > delta {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while lo > 1e-12 && gaussian_delta(lo, epsilon, sensitivity) <= delta {
        lo /= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gaussian_delta(mid, epsilon, sensitivity) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}
