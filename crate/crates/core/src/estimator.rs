//! Monte Carlo estimate of the fraction of discriminatory inputs.
//!
//! `K` independent trials each draw `m` uniform inputs and record the
//! percentage that is discriminatory. The estimate is the mean of the per-trial
//! percentages; its 95% interval uses the normal approximation over trials.

use alloc::format;
use alloc::vec::Vec;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::InputDomain;
use crate::error::{Error, Result};
use crate::fairness::{check_discriminatory, DiscriminationConfig};
use crate::model::Classifier;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationParams {
    /// Samples per trial.
    pub samples_per_trial: u64,
    /// Number of trials.
    pub trials: u64,
    pub discrimination: DiscriminationConfig,
}

impl EstimationParams {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_trial < 1 {
            return Err(Error::Config("need at least one sample per trial".into()));
        }
        if self.trials < 2 {
            return Err(Error::Config(format!(
                "need at least two trials for an interval, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

/// All values are percentages in `[0, 100]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub samples_per_trial: u64,
    pub per_trial: Vec<f64>,
}

impl EstimationResult {
    /// Builds the summary from per-trial percentages. The interval is clipped
    /// to `[0, 100]` and collapses to the point when all trials agree.
    pub fn from_trials(per_trial: Vec<f64>, samples_per_trial: u64) -> Self {
        let k = per_trial.len() as f64;
        let mean = per_trial.iter().sum::<f64>() / k;
        let var = per_trial.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
        let half = Z_95 * libm::sqrt(var) / libm::sqrt(k);
        Self {
            point_estimate: mean,
            ci_low: (mean - half).max(0.0),
            ci_high: (mean + half).min(100.0),
            trials: per_trial.len() as u64,
            samples_per_trial,
            per_trial,
        }
    }

    /// Running mean of the per-trial percentages after each trial.
    pub fn running_mean(&self) -> Vec<f64> {
        let mut sum = 0.0;
        self.per_trial
            .iter()
            .enumerate()
            .map(|(i, x)| {
                sum += x;
                sum / (i + 1) as f64
            })
            .collect()
    }
}

/// Runs the `K × m` sampling experiment. Each trial uses its own random
/// stream seeded from `rng`, so trials are independent of each other's length.
pub fn estimate_fraction<C, R>(
    model: &C,
    domain: &InputDomain,
    params: &EstimationParams,
    rng: &mut R,
) -> Result<EstimationResult>
where
    C: Classifier + ?Sized,
    R: RngCore + ?Sized,
{
    params.validate()?;
    let seeds: Vec<u64> = (0..params.trials).map(|_| rng.next_u64()).collect();
    let mut per_trial = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let mut trial_rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0u64;
        for _ in 0..params.samples_per_trial {
            let input = domain.sample_uniform(&mut trial_rng);
            if check_discriminatory(model, &input, domain, &params.discrimination)?.is_some() {
                hits += 1;
            }
        }
        per_trial.push(hits as f64 * 100.0 / params.samples_per_trial as f64);
    }
    Ok(EstimationResult::from_trials(per_trial, params.samples_per_trial))
}

/// Chance that `n` uniform samples contain at least one discriminatory input
/// when a `fraction` of the domain is discriminatory: `1 - (1 - fraction)^n`.
pub fn detection_probability(fraction: f64, n: u64) -> f64 {
    let fraction = fraction.clamp(0.0, 1.0);
    1.0 - libm::pow(1.0 - fraction, n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ParameterSpec;
    use crate::planted::{make_planted, PlantedBiasSpec, Region, RegionBound};
    use alloc::vec;

    fn domain() -> InputDomain {
        InputDomain::new(vec![
            ParameterSpec::new("a", 0, 99, false),
            ParameterSpec::new("b", 0, 99, false),
            ParameterSpec::new("g", 0, 1, true),
        ])
        .unwrap()
    }

    fn params(m: u64, k: u64) -> EstimationParams {
        EstimationParams {
            samples_per_trial: m,
            trials: k,
            discrimination: DiscriminationConfig::default(),
        }
    }

    #[test]
    fn fair_model_estimates_zero() {
        let d = domain();
        let m = make_planted(&d, PlantedBiasSpec::new(&d, Region::Empty, 1)).unwrap();
        let r = estimate_fraction(&m, &d, &params(100, 10), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!((r.point_estimate, r.ci_low, r.ci_high), (0.0, 0.0, 0.0));
    }

    #[test]
    fn fully_biased_model_estimates_hundred() {
        let d = domain();
        let m = make_planted(&d, PlantedBiasSpec::new(&d, Region::Box(vec![]), 1)).unwrap();
        let r = estimate_fraction(&m, &d, &params(100, 10), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.point_estimate, 100.0);
        assert_eq!((r.ci_low, r.ci_high), (100.0, 100.0));
    }

    #[test]
    fn interval_brackets_the_estimate() {
        let d = domain();
        let spec = PlantedBiasSpec::new(&d, Region::Box(vec![RegionBound::new(0, 0, 9)]), 1);
        let m = make_planted(&d, spec).unwrap();
        let r = estimate_fraction(&m, &d, &params(200, 30), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert!(r.ci_low <= r.point_estimate && r.point_estimate <= r.ci_high);
        assert!(r.ci_low < r.ci_high);
        let mean = r.per_trial.iter().sum::<f64>() / 30.0;
        assert_eq!(r.point_estimate, mean);
        assert_eq!(*r.running_mean().last().unwrap(), mean);
    }

    #[test]
    fn needs_two_trials() {
        let d = domain();
        let m = make_planted(&d, PlantedBiasSpec::new(&d, Region::Empty, 1)).unwrap();
        assert!(estimate_fraction(&m, &d, &params(10, 1), &mut ChaCha8Rng::seed_from_u64(1)).is_err());
        assert!(estimate_fraction(&m, &d, &params(0, 5), &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn detection_probability_edges() {
        assert_eq!(detection_probability(0.0, 1000), 0.0);
        assert_eq!(detection_probability(1.0, 1), 1.0);
        assert_eq!(detection_probability(0.5, 0), 0.0);
        let p = detection_probability(0.01, 1000);
        assert!((p - 0.999_956_828_752_4).abs() < 1e-12, "{p}");
    }
}
