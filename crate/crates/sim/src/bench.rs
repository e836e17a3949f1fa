//! Monte Carlo runs and ln(t) histograms.

use std::collections::BTreeMap;
use std::io::Write;

use dialplan_core::pddl::Effect;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{StrategyKind, Tree};

pub const DEFAULT_TRIALS: usize = 100_000;
pub const BINS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub seed: u64,
    pub trials: usize,
    /// Per strategy, one total per trial in trial order.
    pub samples: BTreeMap<StrategyKind, Vec<f64>>,
}

impl BenchResult {
    pub fn mean(&self, k: StrategyKind) -> f64 {
        let v = &self.samples[&k];
        v.iter().sum::<f64>() / v.len() as f64
    }

    /// One row per trial, one column per strategy.
    pub fn write_samples_csv(&self, w: impl Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["trial".to_string()];
        header.extend(StrategyKind::ALL.iter().map(|k| k.to_string()));
        out.write_record(&header)?;
        for i in 0..self.trials {
            let mut row = vec![i.to_string()];
            row.extend(StrategyKind::ALL.iter().map(|k| self.samples[k][i].to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Trial `i` draws from a ChaCha8 stream `i` under `seed`, so the dataset does
/// not depend on how trials are scheduled across threads.
pub fn run_bench(tree: &Effect, trials: usize, seed: u64) -> BenchResult {
    let t = Tree::new(tree);
    let rows: Vec<[f64; 4]> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (times, picks) = t.sample(&mut rng);
            StrategyKind::ALL.map(|k| t.total(k, &times, &picks).expect("sampled trials are complete"))
        })
        .collect();
    let samples = StrategyKind::ALL
        .iter()
        .enumerate()
        .map(|(j, &k)| (k, rows.iter().map(|r| r[j]).collect()))
        .collect();
    BenchResult { seed, trials, samples }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Bin edges over ln(t); `BINS + 1` values.
    pub edges: Vec<f64>,
    pub counts: BTreeMap<StrategyKind, Vec<u64>>,
}

/// Uniform bins over the ln(t) range observed across all strategies.
pub fn histogram(r: &BenchResult, bins: usize) -> Histogram {
    let logs: BTreeMap<StrategyKind, Vec<f64>> =
        r.samples.iter().map(|(k, v)| (*k, v.iter().map(|x| x.ln()).collect())).collect();
    let all = logs.values().flatten().copied();
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let (lo, hi) = if lo.is_finite() { (lo, if hi > lo { hi } else { lo + 1.0 }) } else { (0.0, 1.0) };
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let counts = logs
        .into_iter()
        .map(|(k, v)| {
            let mut c = vec![0u64; bins];
            for x in v {
                let b = (((x - lo) / width) as usize).min(bins - 1);
                c[b] += 1;
            }
            (k, c)
        })
        .collect();
    Histogram { edges, counts }
}

impl Histogram {
    pub fn write_csv(&self, w: impl Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["bin".to_string(), "ln_lo".into(), "ln_hi".into()];
        header.extend(StrategyKind::ALL.iter().map(|k| k.to_string()));
        out.write_record(&header)?;
        for b in 0..self.edges.len() - 1 {
            let mut row = vec![b.to_string(), self.edges[b].to_string(), self.edges[b + 1].to_string()];
            row.extend(StrategyKind::ALL.iter().map(|k| self.counts[k][b].to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}
