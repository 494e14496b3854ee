//! Global and local search for discriminatory inputs.
//!
//! A run samples the domain uniformly (global phase), then starts a random
//! walk from every discriminatory sample (local phase). Each walk step moves
//! one non-protected parameter by ±1; the parameter is drawn from `sigma_pr`
//! and the direction is `-1` with probability `sigma_v[p]`. The strategy
//! decides how those two distributions react to findings:
//!
//! * [`Strategy::AequitasRandom`] never changes them.
//! * [`Strategy::SemiDirected`] nudges `sigma_v[p]` towards directions that
//!   keep producing findings.
//! * [`Strategy::FullyDirected`] additionally raises `sigma_pr[p]` for
//!   parameters whose perturbation produced a finding.
//! * [`Strategy::BaselineRandom`] skips the local phase entirely and spends
//!   the whole budget on uniform samples.
//!
//! The probability state is shared by all walks of one run.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use core::time::Duration;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{InputDomain, PointInput};
use crate::error::{Error, Result};
use crate::fairness::{check_discriminatory, perturb, Delta, DiscriminationConfig, Finding, Origin};
use crate::model::Classifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    AequitasRandom,
    SemiDirected,
    FullyDirected,
    BaselineRandom,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::FullyDirected,
        Strategy::SemiDirected,
        Strategy::AequitasRandom,
        Strategy::BaselineRandom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::AequitasRandom => "aequitas_random",
            Strategy::SemiDirected => "semi_directed",
            Strategy::FullyDirected => "fully_directed",
            Strategy::BaselineRandom => "baseline_random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub discrimination: DiscriminationConfig,
    /// Uniform samples in the global phase.
    pub global_trials: u64,
    /// Walk length per seed in the local phase.
    pub local_trials: u64,
    pub delta_v: f64,
    pub delta_pr: f64,
    pub strategy: Strategy,
    pub seed: u64,
    /// Stop once this many (raw) findings were recorded.
    pub max_findings: Option<u64>,
    /// Stop once this many inputs were generated and tested.
    pub max_inputs: Option<u64>,
    /// Stop once the run's clock passes this budget.
    pub time_budget: Option<Duration>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            discrimination: DiscriminationConfig::default(),
            global_trials: 1000,
            local_trials: 1000,
            delta_v: 0.001,
            delta_pr: 0.001,
            strategy: Strategy::FullyDirected,
            seed: 0,
            max_findings: None,
            max_inputs: None,
            time_budget: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_v > 0.0 && self.delta_v < 1.0) {
            return Err(Error::Config(format!(
                "delta_v must lie in (0, 1), got {}",
                self.delta_v
            )));
        }
        if !(self.delta_pr > 0.0 && self.delta_pr.is_finite()) {
            return Err(Error::Config(format!(
                "delta_pr must be positive, got {}",
                self.delta_pr
            )));
        }
        DiscriminationConfig::new(self.discrimination.gamma())?;
        Ok(())
    }

    /// The random source a run with this config should use.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Source of elapsed time for time-budgeted runs.
pub trait Clock {
    fn elapsed(&self) -> Duration;
}

/// A clock that never advances; time budgets other than zero never expire.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}

/// Parameter-choice (`sigma_pr`) and direction (`sigma_v`) probabilities for
/// the non-protected parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityState {
    params: Vec<usize>,
    sigma_pr: Vec<f64>,
    /// Probability of choosing `delta = -1`.
    sigma_v: Vec<f64>,
}

impl ProbabilityState {
    /// Uniform `sigma_pr` and `sigma_v = 0.5` everywhere.
    pub fn new(domain: &InputDomain) -> Self {
        let params = domain.free_params().to_vec();
        let n = params.len();
        Self {
            sigma_pr: alloc::vec![1.0 / n as f64; n],
            sigma_v: alloc::vec![0.5; n],
            params,
        }
    }

    /// Free parameter indices, in the order of the probability vectors.
    pub fn params(&self) -> &[usize] {
        &self.params
    }

    pub fn sigma_pr(&self, param: usize) -> Option<f64> {
        self.slot(param).map(|i| self.sigma_pr[i])
    }

    pub fn sigma_v(&self, param: usize) -> Option<f64> {
        self.slot(param).map(|i| self.sigma_v[i])
    }

    pub fn sigma_pr_values(&self) -> &[f64] {
        &self.sigma_pr
    }

    pub fn sigma_v_values(&self) -> &[f64] {
        &self.sigma_v
    }

    fn slot(&self, param: usize) -> Option<usize> {
        self.params.binary_search(&param).ok()
    }

    fn slot_or_contract(&self, param: usize) -> Result<usize> {
        self.slot(param)
            .ok_or_else(|| Error::Contract(format!("parameter {param} is protected or unknown")))
    }

    /// Draws a parameter by `sigma_pr`, then a direction by `sigma_v`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, Delta) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut slot = self.params.len() - 1;
        for (i, &pr) in self.sigma_pr.iter().enumerate() {
            acc += pr;
            if u < acc {
                slot = i;
                break;
            }
        }
        let delta = if rng.gen::<f64>() < self.sigma_v[slot] {
            Delta::Down
        } else {
            Delta::Up
        };
        (self.params[slot], delta)
    }

    /// Direction update: reward `delta` when it found something, penalize it
    /// otherwise. `sigma_pr` is untouched.
    pub fn update_semi(&mut self, param: usize, found: bool, delta: Delta, cfg: &SearchConfig) -> Result<()> {
        let i = self.slot_or_contract(param)?;
        let v = &mut self.sigma_v[i];
        match (found, delta) {
            (true, Delta::Down) | (false, Delta::Up) => *v = (*v + cfg.delta_v).min(1.0),
            (false, Delta::Down) | (true, Delta::Up) => *v = (*v - cfg.delta_v).max(0.0),
        }
        Ok(())
    }

    /// [`Self::update_semi`], then on a finding add `delta_pr` to
    /// `sigma_pr[param]` and renormalize.
    pub fn update_full(&mut self, param: usize, found: bool, delta: Delta, cfg: &SearchConfig) -> Result<()> {
        self.update_semi(param, found, delta, cfg)?;
        if !found {
            return Ok(());
        }
        let i = self.slot_or_contract(param)?;
        self.sigma_pr[i] += cfg.delta_pr;
        let total: f64 = self.sigma_pr.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Invariant(format!("sigma_pr sums to {total}")));
        }
        for pr in &mut self.sigma_pr {
            *pr /= total;
        }
        Ok(())
    }

    /// Dispatches on `strategy`; random strategies leave the state alone.
    pub fn update(
        &mut self,
        strategy: Strategy,
        param: usize,
        found: bool,
        delta: Delta,
        cfg: &SearchConfig,
    ) -> Result<()> {
        match strategy {
            Strategy::SemiDirected => self.update_semi(param, found, delta, cfg),
            Strategy::FullyDirected => self.update_full(param, found, delta, cfg),
            Strategy::AequitasRandom | Strategy::BaselineRandom => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseCounters {
    pub inputs: u64,
    pub findings: u64,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Termination {
    #[default]
    Completed,
    MaxFindings,
    MaxInputs,
    TimeBudget,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::MaxFindings => "max_findings",
            Termination::MaxInputs => "max_inputs",
            Termination::TimeBudget => "time_budget",
        }
    }
}

/// Everything a run generated.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestSuite {
    /// Every discriminatory input tested, in discovery order; the same input
    /// may appear more than once when a walk revisits it.
    pub findings: Vec<Finding>,
    /// Distinct discriminatory inputs in first-discovery order.
    pub unique_inputs: Vec<PointInput>,
    pub global: PhaseCounters,
    pub local: PhaseCounters,
    pub baseline: PhaseCounters,
    pub wall_time: Duration,
    pub termination: Termination,
    /// Probability state at the end of the local phase, if it ran.
    pub final_state: Option<ProbabilityState>,
    seen: BTreeSet<PointInput>,
}

impl TestSuite {
    pub fn inputs_generated(&self) -> u64 {
        self.global.inputs + self.local.inputs + self.baseline.inputs
    }

    pub fn findings_count(&self) -> u64 {
        self.global.findings + self.local.findings + self.baseline.findings
    }

    /// `100 * findings / inputs`, `None` when nothing was generated.
    pub fn percent_discriminatory(&self) -> Option<f64> {
        let n = self.inputs_generated();
        (n > 0).then(|| 100.0 * self.findings_count() as f64 / n as f64)
    }

    fn counters_mut(&mut self, origin: Origin) -> &mut PhaseCounters {
        match origin {
            Origin::Global => &mut self.global,
            Origin::Local => &mut self.local,
            Origin::Baseline => &mut self.baseline,
        }
    }

    fn record(&mut self, mut finding: Finding, origin: Origin) {
        finding.origin = origin;
        finding.step = self.inputs_generated() - 1;
        self.counters_mut(origin).findings += 1;
        if self.seen.insert(finding.input.clone()) {
            self.unique_inputs.push(finding.input.clone());
        }
        self.findings.push(finding);
    }
}

struct Runner<'a, C: ?Sized, K: ?Sized> {
    model: &'a C,
    domain: &'a InputDomain,
    cfg: &'a SearchConfig,
    clock: &'a K,
    suite: TestSuite,
    limits: bool,
}

impl<C: Classifier + ?Sized, K: Clock + ?Sized> Runner<'_, C, K> {
    fn exhausted(&mut self) -> bool {
        if !self.limits {
            return false;
        }
        let cfg = self.cfg;
        let stop = if cfg.max_findings.is_some_and(|m| self.suite.findings_count() >= m) {
            Some(Termination::MaxFindings)
        } else if cfg.max_inputs.is_some_and(|m| self.suite.inputs_generated() >= m) {
            Some(Termination::MaxInputs)
        } else if cfg.time_budget.is_some_and(|b| self.clock.elapsed() >= b) {
            Some(Termination::TimeBudget)
        } else {
            None
        };
        if let Some(reason) = stop {
            self.suite.termination = reason;
        }
        stop.is_some()
    }

    /// Tests one generated input. `None` means a budget ran out first.
    fn test(&mut self, input: &PointInput, origin: Origin) -> Result<Option<bool>> {
        if self.exhausted() {
            return Ok(None);
        }
        let found = check_discriminatory(self.model, input, self.domain, &self.cfg.discrimination)?;
        self.suite.counters_mut(origin).inputs += 1;
        Ok(Some(match found {
            Some(f) => {
                self.suite.record(f, origin);
                true
            }
            None => false,
        }))
    }

    /// Uniform sampling; returns false if a budget stopped it.
    fn sample_phase<R: Rng + ?Sized>(&mut self, trials: u64, origin: Origin, rng: &mut R) -> Result<bool> {
        for _ in 0..trials {
            let input = self.domain.sample_uniform(rng);
            if self.test(&input, origin)?.is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn local_phase<R: Rng + ?Sized>(&mut self, seeds: &[PointInput], rng: &mut R) -> Result<()> {
        let mut state = ProbabilityState::new(self.domain);
        'seeds: for seed in seeds {
            let mut walker = seed.clone();
            for _ in 0..self.cfg.local_trials {
                let (param, delta) = state.draw(rng);
                walker = perturb(&walker, param, delta, self.domain)?;
                let Some(found) = self.test(&walker, Origin::Local)? else {
                    break 'seeds;
                };
                state.update(self.cfg.strategy, param, found, delta, self.cfg)?;
            }
        }
        self.suite.final_state = Some(state);
        Ok(())
    }
}

fn dedup_inputs(findings: &[Finding]) -> Vec<PointInput> {
    let mut seen = BTreeSet::new();
    findings
        .iter()
        .filter(|f| seen.insert(f.input.clone()))
        .map(|f| f.input.clone())
        .collect()
}

/// Exactly `cfg.global_trials` uniform samples, each checked for
/// discrimination. Findings come back in discovery order with repeated inputs
/// dropped. Budgets in `cfg` are ignored.
pub fn global_search<C, R>(model: &C, domain: &InputDomain, cfg: &SearchConfig, rng: &mut R) -> Result<Vec<Finding>>
where
    C: Classifier + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let mut runner = Runner {
        model,
        domain,
        cfg,
        clock: &NoClock,
        suite: TestSuite::default(),
        limits: false,
    };
    runner.sample_phase(cfg.global_trials, Origin::Global, rng)?;
    let mut seen = BTreeSet::new();
    Ok(runner
        .suite
        .findings
        .into_iter()
        .filter(|f| seen.insert(f.input.clone()))
        .collect())
}

/// Random walks of `cfg.local_trials` steps from each seed, with one
/// probability state shared across seeds. The seeds themselves are not
/// re-tested; only perturbed inputs count.
pub fn local_search<C, R>(
    model: &C,
    domain: &InputDomain,
    seeds: &[Finding],
    cfg: &SearchConfig,
    rng: &mut R,
) -> Result<TestSuite>
where
    C: Classifier + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let mut runner = Runner {
        model,
        domain,
        cfg,
        clock: &NoClock,
        suite: TestSuite::default(),
        limits: true,
    };
    let seeds: Vec<PointInput> = seeds.iter().map(|f| f.input.clone()).collect();
    runner.local_phase(&seeds, rng)?;
    Ok(runner.suite)
}

/// Pure uniform sampling with no local phase; the comparison baseline.
pub fn baseline_random<C, R>(
    model: &C,
    domain: &InputDomain,
    trials: u64,
    discrimination: &DiscriminationConfig,
    rng: &mut R,
) -> Result<TestSuite>
where
    C: Classifier + ?Sized,
    R: Rng + ?Sized,
{
    let cfg = SearchConfig {
        discrimination: *discrimination,
        strategy: Strategy::BaselineRandom,
        global_trials: trials,
        ..SearchConfig::default()
    };
    run_audit(model, domain, &cfg, rng)
}

/// [`run_audit_with_clock`] without a clock: time budgets never expire.
pub fn run_audit<C, R>(model: &C, domain: &InputDomain, cfg: &SearchConfig, rng: &mut R) -> Result<TestSuite>
where
    C: Classifier + ?Sized,
    R: Rng + ?Sized,
{
    run_audit_with_clock(model, domain, cfg, rng, &NoClock)
}

/// Global phase, then (except for the baseline strategy) the local phase from
/// the distinct global findings. Budgets end the run early without error.
pub fn run_audit_with_clock<C, R, K>(
    model: &C,
    domain: &InputDomain,
    cfg: &SearchConfig,
    rng: &mut R,
    clock: &K,
) -> Result<TestSuite>
where
    C: Classifier + ?Sized,
    R: Rng + ?Sized,
    K: Clock + ?Sized,
{
    match run_audit_partial(model, domain, cfg, rng, clock) {
        (suite, None) => Ok(suite),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`run_audit_with_clock`], but a failing model does not discard the
/// work done so far: the suite holds everything generated before the error.
pub fn run_audit_partial<C, R, K>(
    model: &C,
    domain: &InputDomain,
    cfg: &SearchConfig,
    rng: &mut R,
    clock: &K,
) -> (TestSuite, Option<Error>)
where
    C: Classifier + ?Sized,
    R: Rng + ?Sized,
    K: Clock + ?Sized,
{
    if let Err(e) = cfg.validate() {
        return (TestSuite::default(), Some(e));
    }
    if domain.free_params().is_empty() {
        return (
            TestSuite::default(),
            Some(Error::Domain("no non-protected parameter".to_string())),
        );
    }
    let mut runner = Runner {
        model,
        domain,
        cfg,
        clock,
        suite: TestSuite::default(),
        limits: true,
    };
    let outcome = (|| {
        if cfg.strategy == Strategy::BaselineRandom {
            runner.sample_phase(cfg.global_trials, Origin::Baseline, rng)?;
        } else if runner.sample_phase(cfg.global_trials, Origin::Global, rng)? {
            let seeds = dedup_inputs(&runner.suite.findings);
            runner.local_phase(&seeds, rng)?;
        }
        Ok(())
    })();
    runner.suite.wall_time = clock.elapsed();
    (runner.suite, outcome.err())
}
