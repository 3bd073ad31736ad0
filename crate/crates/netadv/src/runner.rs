//! Parallel attack fan-out.

use std::time::Instant;

use netadv_core::attacks::{assemble_batch, attack_sample, eligible_rows, AttackConfig, AttackError, SuiteOutput};
use netadv_core::models::Classifier;
use netadv_core::Matrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "CONSTRAINED_ADV_THREADS";

/// Worker count: `CONSTRAINED_ADV_THREADS` if set to a positive integer,
/// else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))
}

/// Same contract as the sequential suite runner: samples the surrogate
/// already calls benign are excluded, per-sample seeds derive from
/// `(cfg.seed, row)`, and batches come back in input order regardless of
/// the worker count.
pub fn run_suite(
    pool: &rayon::ThreadPool,
    model: &dyn Classifier,
    surrogate_id: &str,
    samples: &Matrix,
    cfgs: &[AttackConfig],
) -> Result<SuiteOutput> {
    if samples.is_empty() {
        return Err(AttackError::EmptySamples.into());
    }
    let rows = eligible_rows(model, samples)?;
    let excluded = samples.rows() - rows.len();
    log::info!(
        "attacking {} samples ({} excluded as already benign) with {} workers",
        rows.len(),
        excluded,
        pool.current_num_threads()
    );
    let mut batches = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        cfg.validate()?;
        let started = Instant::now();
        let advs: Vec<Vec<f64>> = pool.install(|| {
            rows.par_iter()
                .map(|&r| attack_sample(model, samples.row(r), cfg, r))
                .collect::<Result<_, AttackError>>()
        })?;
        let adversarials = Matrix::from_rows(samples.cols(), &advs);
        let batch = assemble_batch(model, samples, &rows, adversarials, cfg, surrogate_id, excluded)?;
        log::info!(
            "{}: surrogate evasion {:.1}% in {:.1}s",
            cfg.attack_kind.id(),
            100.0 * batch.success_rate(),
            started.elapsed().as_secs_f64()
        );
        batches.push(batch);
    }
    Ok(SuiteOutput {
        batches,
        attacked_rows: rows,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use netadv_core::attacks::{run_attack_suite, AttackKind};
    use netadv_core::dataset::{build_schema, encode, split_traffic, synth_dataset};
    use netadv_core::models::{train_svm, LinearModel, SvmConfig};

    #[test]
    fn matches_sequential_runner_for_any_worker_count() {
        let recs = synth_dataset(5, 300);
        let data = encode(&recs, &build_schema(&recs).unwrap()).unwrap();
        let svm = train_svm(&data, &SvmConfig::default()).unwrap();
        let lin = LinearModel::new(svm.weights.clone(), svm.bias);
        let (_, mal) = split_traffic(&data);
        let samples = mal.features.select(&(0..20).collect::<Vec<_>>());
        let cfgs: Vec<_> = [AttackKind::Bim, AttackKind::Pgd, AttackKind::DeepFool]
            .iter()
            .map(|&k| AttackConfig {
                seed: 9,
                ..AttackConfig::default_for(k)
            })
            .collect();
        let expected = run_attack_suite(&lin, "lin", &samples, &cfgs).unwrap();
        for threads in [1, 3] {
            let pool = thread_pool(threads).unwrap();
            assert_eq!(run_suite(&pool, &lin, "lin", &samples, &cfgs).unwrap(), expected);
        }
    }

    #[test]
    fn empty_samples_are_rejected() {
        let lin = LinearModel::new(vec![1.0], 0.0);
        let pool = thread_pool(1).unwrap();
        let cfg = AttackConfig::default_for(AttackKind::Fgsm);
        assert!(run_suite(&pool, &lin, "lin", &Matrix::empty(1), &[cfg]).is_err());
    }
}
