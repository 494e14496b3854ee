//! Retraining with generated discriminatory inputs.
//!
//! Iteration `i = 2, 3, ..` draws a percentage `p_i` uniformly from
//! `(2^(i-2), 2^(i-1))` and stops once it exceeds 100. Otherwise
//! `floor(p_i * |training| / 100)` generated inputs are labeled, appended to
//! the *original* training data, and a new model is trained. The new model
//! replaces the current one only if its estimated discriminatory fraction is
//! strictly lower; the first non-improving round ends the loop.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{InputDomain, LabeledDataset, PointInput};
use crate::error::{Error, Result};
use crate::estimator::{estimate_fraction, EstimationParams};
use crate::logistic::{train_logistic, LogisticParams};
use crate::model::{Classifier, Label, NativeModel};
use crate::tree::{train_tree, TreeParams};

/// A deterministic training procedure.
pub trait Trainer {
    fn train(&self, data: &LabeledDataset) -> Result<NativeModel>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainerSpec {
    Logistic(LogisticParams),
    Tree(TreeParams),
}

impl Trainer for TrainerSpec {
    fn train(&self, data: &LabeledDataset) -> Result<NativeModel> {
        Ok(match self {
            TrainerSpec::Logistic(p) => train_logistic(data, p)?.into(),
            TrainerSpec::Tree(p) => train_tree(data, p)?.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrainIteration {
    pub iteration: u32,
    /// Percentage of the training size added this round.
    pub percent: f64,
    pub rows_added: u64,
    pub estimate_before: f64,
    pub estimate_after: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrainReport {
    /// Every round that trained a model, accepted or not.
    pub iterations: Vec<RetrainIteration>,
    pub final_model: NativeModel,
    pub initial_estimate: f64,
    pub final_estimate: f64,
    /// Rows added to the training data of the final model.
    pub total_added: u64,
    pub percent_added: f64,
    pub improvement_percent: f64,
}

impl RetrainReport {
    pub fn accepted(&self) -> impl Iterator<Item = &RetrainIteration> {
        self.iterations.iter().filter(|it| it.accepted)
    }
}

/// First iteration whose draw always exceeds 100 and ends the loop.
pub const LAST_ITERATION: u32 = 9;

/// Label for a generated input: the majority label of `model` over the
/// input's protected variants. Ties go to whichever tied label appears first
/// in variant enumeration order, i.e. the label of the lowest-valued variant
/// when it is among them.
pub fn label_generated<C: Classifier + ?Sized>(input: &PointInput, model: &C, domain: &InputDomain) -> Result<Label> {
    let labels = model.predict_batch(&domain.protected_variants(input))?;
    let mut tally: Vec<(Label, usize)> = Vec::new();
    for l in &labels {
        match tally.iter_mut().find(|(x, _)| x == l) {
            Some((_, n)) => *n += 1,
            None => tally.push((*l, 1)),
        }
    }
    // `tally` is in first-appearance order, so the first maximum wins ties.
    let mut best = tally
        .first()
        .copied()
        .ok_or_else(|| Error::Contract("input has no variants".into()))?;
    for &(l, n) in &tally[1..] {
        if n > best.1 {
            best = (l, n);
        }
    }
    Ok(best.0)
}

/// Draws a uniform real strictly inside `(lo, hi)`.
fn open_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let x = lo + (hi - lo) * rng.gen::<f64>();
        if x > lo && x < hi {
            return x;
        }
    }
}

/// `n` inputs from `pool`: a random permutation prefix while the pool lasts,
/// then uniform draws with replacement.
fn pick<R: Rng + ?Sized>(pool: &[PointInput], n: usize, rng: &mut R) -> Vec<PointInput> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let distinct = n.min(pool.len());
    for i in 0..distinct {
        let j = rng.gen_range(i..order.len());
        order.swap(i, j);
    }
    let mut out: Vec<PointInput> = order[..distinct].iter().map(|&i| pool[i].clone()).collect();
    while out.len() < n {
        out.push(pool[rng.gen_range(0..pool.len())].clone());
    }
    out
}

/// Runs the retraining loop starting from `initial`.
///
/// `generated` holds the distinct discriminatory inputs of an audit. Each
/// model is estimated once on a fresh random stream, and that estimate is
/// reused when the model is compared in the next round, so accepted
/// estimates form a strictly decreasing sequence.
pub fn retrain_loop<T, R>(
    initial: NativeModel,
    trainer: &T,
    training_data: &LabeledDataset,
    generated: &[PointInput],
    estimation: &EstimationParams,
    rng: &mut R,
) -> Result<RetrainReport>
where
    T: Trainer + ?Sized,
    R: Rng + ?Sized,
{
    if generated.is_empty() {
        return Err(Error::Contract(
            "no generated discriminatory inputs to retrain with".into(),
        ));
    }
    estimation.validate()?;
    let domain = training_data.domain();
    for input in generated {
        domain.validate(input)?;
    }

    let estimate = |model: &NativeModel, rng: &mut R| -> Result<f64> {
        let mut sub = ChaCha8Rng::seed_from_u64(rng.next_u64());
        Ok(estimate_fraction(model, domain, estimation, &mut sub)?.point_estimate)
    };

    let initial_estimate = estimate(&initial, rng)?;
    let mut current = initial;
    let mut current_estimate = initial_estimate;
    let mut total_added = 0u64;
    let mut iterations = Vec::new();
    let k = training_data.len();

    for i in 2..=LAST_ITERATION {
        let lo = (1u64 << (i - 2)) as f64;
        let percent = open_uniform(rng, lo, 2.0 * lo);
        if percent > 100.0 {
            break;
        }
        let n_add = libm::floor(percent * k as f64 / 100.0) as usize;
        let mut rows = Vec::with_capacity(n_add);
        for input in pick(generated, n_add, rng) {
            let label = label_generated(&input, &current, domain)?;
            rows.push((input, label));
        }
        let mut augmented = training_data.clone();
        augmented.extend(rows)?;
        augmented.source = format!("{} + {} generated", training_data.source, n_add);

        let candidate = trainer.train(&augmented)?;
        let candidate_estimate = estimate(&candidate, rng)?;
        let accepted = current_estimate > candidate_estimate;
        iterations.push(RetrainIteration {
            iteration: i,
            percent,
            rows_added: n_add as u64,
            estimate_before: current_estimate,
            estimate_after: candidate_estimate,
            accepted,
        });
        if !accepted {
            break;
        }
        current = candidate;
        current_estimate = candidate_estimate;
        total_added = n_add as u64;
    }

    let improvement_percent = if initial_estimate > 0.0 {
        (initial_estimate - current_estimate) * 100.0 / initial_estimate
    } else {
        0.0
    };
    Ok(RetrainReport {
        iterations,
        final_model: current,
        initial_estimate,
        final_estimate: current_estimate,
        total_added,
        percent_added: if k == 0 {
            0.0
        } else {
            total_added as f64 * 100.0 / k as f64
        },
        improvement_percent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ParameterSpec;
    use crate::model::{Alphabet, ModelError};
    use alloc::vec;

    struct Table(Alphabet, Vec<i64>);

    impl Classifier for Table {
        fn alphabet(&self) -> &Alphabet {
            &self.0
        }
        fn predict(&self, input: &PointInput) -> core::result::Result<Label, ModelError> {
            Ok(Label(self.1[*input.values().last().unwrap() as usize]))
        }
    }

    fn domain(protected_width: i64) -> InputDomain {
        InputDomain::new(vec![
            ParameterSpec::new("a", 0, 9, false),
            ParameterSpec::new("g", 0, protected_width - 1, true),
        ])
        .unwrap()
    }

    #[test]
    fn unanimous_variants() {
        let m = Table(Alphabet::binary(), vec![1, 1]);
        assert_eq!(
            label_generated(&PointInput(vec![3, 1]), &m, &domain(2)).unwrap(),
            Label(1)
        );
    }

    #[test]
    fn tie_goes_to_lowest_variant() {
        let m = Table(Alphabet::binary(), vec![-1, 1]);
        assert_eq!(
            label_generated(&PointInput(vec![3, 1]), &m, &domain(2)).unwrap(),
            Label(-1)
        );
        let m = Table(Alphabet::binary(), vec![1, -1]);
        assert_eq!(
            label_generated(&PointInput(vec![3, 0]), &m, &domain(2)).unwrap(),
            Label(1)
        );
    }

    #[test]
    fn three_valued_majority() {
        let m = Table(Alphabet::binary(), vec![1, 1, -1]);
        assert_eq!(
            label_generated(&PointInput(vec![3, 2]), &m, &domain(3)).unwrap(),
            Label(1)
        );
        let m = Table(Alphabet::binary(), vec![-1, 1, 1]);
        assert_eq!(
            label_generated(&PointInput(vec![3, 0]), &m, &domain(3)).unwrap(),
            Label(1)
        );
    }

    #[test]
    fn pick_prefers_distinct_inputs() {
        let pool: Vec<PointInput> = (0..5).map(|i| PointInput(vec![i, 0])).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut few = pick(&pool, 5, &mut rng);
        few.sort();
        assert_eq!(few, pool);
        let many = pick(&pool, 12, &mut rng);
        assert_eq!(many.len(), 12);
        assert!(many.iter().all(|x| pool.contains(x)));
    }

    #[test]
    fn draw_intervals_double() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for i in 2..=9u32 {
            let lo = (1u64 << (i - 2)) as f64;
            for _ in 0..1000 {
                let p = open_uniform(&mut rng, lo, 2.0 * lo);
                assert!(p > lo && p < 2.0 * lo);
                if i == 9 {
                    assert!(p > 100.0);
                }
            }
        }
    }
}
