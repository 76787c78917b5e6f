use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::ingest::ClassLabel;

/// Stratified baseline: predicts depressed with the training prevalence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DummyModel {
    pub positive_prior: f64,
    pub seed: u64,
}

pub fn fit_dummy(labels: &[ClassLabel], seed: u64) -> Result<DummyModel, ModelError> {
    if labels.is_empty() {
        return Err(ModelError::TooFewRows(0));
    }
    let positives = labels.iter().filter(|l| l.is_positive()).count();
    Ok(DummyModel {
        positive_prior: positives as f64 / labels.len() as f64,
        seed,
    })
}

/// `n` independent draws.
pub fn predict_dummy<R: Rng + ?Sized>(
    model: &DummyModel,
    n: usize,
    rng: &mut R,
) -> Vec<ClassLabel> {
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < model.positive_prior {
                ClassLabel::Depressed
            } else {
                ClassLabel::Healthy
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_prior_predicts_healthy() {
        let m = fit_dummy(&[ClassLabel::Healthy; 5], 1).unwrap();
        assert_eq!(m.positive_prior, 0.0);
        let p = predict_dummy(&m, 1000, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(p.iter().all(|l| *l == ClassLabel::Healthy));
    }

    #[test]
    fn empirical_rate_tracks_prior() {
        let m = DummyModel {
            positive_prior: 0.345,
            seed: 0,
        };
        let p = predict_dummy(&m, 100_000, &mut ChaCha8Rng::seed_from_u64(99));
        let rate = p.iter().filter(|l| l.is_positive()).count() as f64 / 1e5;
        // binomial sd at n = 1e5 is ~0.0015
        assert!((rate - 0.345).abs() < 0.005, "{rate}");
    }

    #[test]
    fn prior_is_prevalence() {
        let labels = [
            ClassLabel::Depressed,
            ClassLabel::Healthy,
            ClassLabel::Healthy,
            ClassLabel::Healthy,
        ];
        assert_eq!(fit_dummy(&labels, 0).unwrap().positive_prior, 0.25);
        assert!(fit_dummy(&[], 0).is_err());
    }
}
