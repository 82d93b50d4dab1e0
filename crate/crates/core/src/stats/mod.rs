//! Query statistics over `(Φ, d)`, normal fits of shadow statistics, and the
//! normality/separation diagnostics used to compare candidate statistics.

mod swilk;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::lda::{estimate_theta, ThetaOptions, TopicMixture, TopicModel};

pub use swilk::{shapiro_wilk, ShapiroWilk};

/// Lower bound applied to fitted variances.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Largest max-posterior value fed to the logit.
pub const LOGIT_CLAMP: f64 = 1.0 - 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryStatisticKind {
    /// Maximized document log-likelihood `ζ(Φ, d)`.
    LogLikelihood,
    NegEntropy,
    LogitMaxPosterior,
    StdDev,
}

impl QueryStatisticKind {
    pub const ALL: [QueryStatisticKind; 4] = [
        QueryStatisticKind::LogLikelihood,
        QueryStatisticKind::NegEntropy,
        QueryStatisticKind::LogitMaxPosterior,
        QueryStatisticKind::StdDev,
    ];

    /// The three θ̂-shape statistics used by the global-threshold baselines.
    pub const BASELINES: [QueryStatisticKind; 3] = [
        QueryStatisticKind::NegEntropy,
        QueryStatisticKind::LogitMaxPosterior,
        QueryStatisticKind::StdDev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QueryStatisticKind::LogLikelihood => "log_likelihood",
            QueryStatisticKind::NegEntropy => "neg_entropy",
            QueryStatisticKind::LogitMaxPosterior => "logit_max_posterior",
            QueryStatisticKind::StdDev => "std_dev",
        }
    }
}

impl std::fmt::Display for QueryStatisticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for QueryStatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QueryStatisticKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown statistic `{s}`")))
    }
}

/// All four statistics for one `(Φ, d)` pair, sharing a single θ̂ estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatisticValues {
    pub log_likelihood: f64,
    pub neg_entropy: f64,
    pub logit_max_posterior: f64,
    pub std_dev: f64,
    /// Set when max θ̂ was clamped to [`LOGIT_CLAMP`] before the logit.
    pub logit_clamped: bool,
}

impl StatisticValues {
    pub fn get(&self, kind: QueryStatisticKind) -> f64 {
        match kind {
            QueryStatisticKind::LogLikelihood => self.log_likelihood,
            QueryStatisticKind::NegEntropy => self.neg_entropy,
            QueryStatisticKind::LogitMaxPosterior => self.logit_max_posterior,
            QueryStatisticKind::StdDev => self.std_dev,
        }
    }

    /// Shape statistics of `theta` paired with a given log-likelihood.
    pub fn from_theta(theta: &TopicMixture, log_likelihood: f64) -> Self {
        let w = theta.weights();
        let k = w.len() as f64;
        let neg_entropy = w.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum();
        let max = w.iter().copied().fold(0.0, f64::max);
        let logit_clamped = max > LOGIT_CLAMP;
        let m = max.min(LOGIT_CLAMP);
        let mean = 1.0 / k;
        let var = w.iter().map(|&p| (p - mean) * (p - mean)).sum::<f64>() / k;
        StatisticValues {
            log_likelihood,
            neg_entropy,
            logit_max_posterior: (m / (1.0 - m)).ln(),
            std_dev: var.sqrt(),
            logit_clamped,
        }
    }
}

/// Estimates θ̂ once and evaluates every statistic on it.
pub fn query_statistics(model: &TopicModel, d: &Document, opts: ThetaOptions) -> Result<StatisticValues> {
    let (theta, zeta) = estimate_theta(model, d, opts)?;
    Ok(StatisticValues::from_theta(&theta, zeta))
}

pub fn query_statistic(kind: QueryStatisticKind, model: &TopicModel, d: &Document) -> Result<f64> {
    Ok(query_statistics(model, d, ThetaOptions::default())?.get(kind))
}

/// Mean/variance summary of a statistic sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalFit {
    pub mean: f64,
    pub variance: f64,
    pub n: usize,
}

impl NormalFit {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * (2.0 * std::f64::consts::PI * self.variance).ln() - d * d / (2.0 * self.variance)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.mean) / self.std_dev())
    }
}

/// Unbiased mean and variance, variance floored at [`VARIANCE_FLOOR`].
pub fn fit_normal(samples: &[f64]) -> Result<NormalFit> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid(format!("a normal fit needs at least 2 samples, got {n}")));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok(NormalFit {
        mean,
        variance: (ss / (n - 1) as f64).max(VARIANCE_FLOOR),
        n,
    })
}

/// `KL(N_a ‖ N_b)` in closed form.
pub fn kl_normal(a: &NormalFit, b: &NormalFit) -> f64 {
    let d = a.mean - b.mean;
    let kl = 0.5 * (b.variance / a.variance).ln() + (a.variance + d * d) / (2.0 * b.variance) - 0.5;
    kl.max(0.0)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

pub fn std_normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Upper tail `1 − Φ(x)`, accurate for large `x`.
pub fn std_normal_sf(x: f64) -> f64 {
    std_normal().sf(x)
}

pub fn std_normal_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

/// Benjamini-Hochberg step-up procedure at level `q`. Flags are in input order.
pub fn bh_fdr(p_values: &[f64], q: f64) -> Vec<bool> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let cutoff = order
        .iter()
        .enumerate()
        .rev()
        .find(|&(rank, &i)| p_values[i] <= (rank + 1) as f64 * q / m as f64)
        .map_or(0, |(rank, _)| rank + 1);
    let mut reject = vec![false; m];
    for &i in &order[..cutoff] {
        reject[i] = true;
    }
    reject
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn mixture(w: &[f64]) -> TopicMixture {
        TopicMixture::new(w.to_vec()).unwrap()
    }

    #[test]
    fn uniform_theta_statistics() {
        let s = StatisticValues::from_theta(&TopicMixture::uniform(5), 0.0);
        assert!((s.neg_entropy + 5f64.ln()).abs() < 1e-12);
        assert!((s.neg_entropy - (-1.60944)).abs() < 1e-5);
        assert_eq!(s.std_dev, 0.0);
    }

    #[test]
    fn logit_of_half_is_zero() {
        let s = StatisticValues::from_theta(&mixture(&[0.5, 0.5]), 0.0);
        assert_eq!(s.logit_max_posterior, 0.0);
        assert!(!s.logit_clamped);
    }

    #[test]
    fn point_mass_statistics() {
        for k in 2..8 {
            let mut w = vec![0.0; k];
            w[0] = 1.0;
            let s = StatisticValues::from_theta(&mixture(&w), 0.0);
            assert_eq!(s.neg_entropy, 0.0);
            assert!(s.logit_clamped);
            assert!((s.logit_max_posterior - (LOGIT_CLAMP / (1.0 - LOGIT_CLAMP)).ln()).abs() < 1e-9);
            assert!((s.std_dev - ((k - 1) as f64).sqrt() / k as f64).abs() < 1e-12);
            assert!(s.std_dev <= 0.5);
        }
    }

    #[test]
    fn fit_normal_edge_cases() {
        let f = fit_normal(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(f.mean, 1.0);
        assert_eq!(f.variance, VARIANCE_FLOOR);
        let f = fit_normal(&[0.0, 2.0]).unwrap();
        assert_eq!((f.mean, f.variance), (1.0, 2.0));
        assert!(fit_normal(&[1.0]).is_err());
    }

    #[test]
    fn fit_normal_monte_carlo() {
        let mut rng = rng_from_seed(2024);
        let xs: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let f = fit_normal(&xs).unwrap();
        assert!(f.mean.abs() < 0.05);
        assert!((f.variance - 1.0).abs() < 0.05);
    }

    #[test]
    fn kl_closed_form_cases() {
        let a = NormalFit { mean: 1.0, variance: 1.0, n: 10 };
        let b = NormalFit { mean: 0.0, variance: 1.0, n: 10 };
        assert_eq!(kl_normal(&a, &a), 0.0);
        assert!((kl_normal(&a, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bh_step_up() {
        assert_eq!(bh_fdr(&[0.01, 0.04, 0.9], 0.05), vec![true, false, false]);
        assert_eq!(bh_fdr(&[0.0; 4], 0.05), vec![true; 4]);
        // Only the largest p meets its own bound; step-up rejects everything below it too.
        assert_eq!(bh_fdr(&[0.04, 0.03, 0.045], 0.05), vec![true, true, true]);
        assert!(bh_fdr(&[], 0.05).is_empty());
    }

    #[test]
    fn statistic_names_round_trip() {
        for k in QueryStatisticKind::ALL {
            assert_eq!(k.name().parse::<QueryStatisticKind>().unwrap(), k);
        }
        assert!("loss".parse::<QueryStatisticKind>().is_err());
    }

    #[test]
    fn normal_helpers() {
        assert!((std_normal_cdf(3.0) - 0.998650101968370).abs() < 1e-12);
        assert!((std_normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
        assert!(std_normal_sf(10.0) > 0.0);
    }
}
