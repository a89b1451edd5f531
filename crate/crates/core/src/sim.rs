//! Erasure-channel simulation: blind reconstruction of random unit signals
//! under configurable packet-loss models, checked against the exact
//! worst-case errors.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::erasures::{self, e1_lower_bound, e2_lower_bound};
use crate::error::{Error, Result};
use crate::spectra::{self, CVector, GaugeNorm};
use crate::systems::{ErasurePattern, Field, ReconstructionMode, ReconSystem, CLASSIFY_TOL};

/// Packet-loss model for a simulation run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum LossModel {
    /// Every trial erases a uniformly random subset of exactly `p` packets.
    UniformP { p: usize },
    /// Every packet is lost independently with probability `q`.
    Bernoulli { q: f64 },
    /// Enumerates all patterns of size `p` and drives each with the extremal
    /// singular vector instead of sampling; an exact certificate.
    AdversarialScan { p: usize },
}

/// Simulation configuration; identical configurations reproduce identical
/// reports byte for byte.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: usize,
    pub loss: LossModel,
    /// Norm used for the theoretical bound columns.
    pub norm: GaugeNorm,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidArgument("need trials >= 1".into()));
        }
        if let LossModel::Bernoulli { q } = self.loss {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidArgument(format!(
                    "Bernoulli loss probability must lie in [0,1], got {q}"
                )));
            }
        }
        Ok(())
    }
}

/// One simulated transmission.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub pattern: ErasurePattern,
    /// Relative blind-reconstruction error of a unit signal.
    pub error: f64,
    /// Worst-case error over patterns of this size (operator norm).
    pub bound: f64,
    pub slack: f64,
}

/// Aggregate counts for one erasure pattern.
#[derive(Clone, Debug, Serialize)]
pub struct PatternStat {
    pub pattern: ErasurePattern,
    pub count: usize,
    pub max_error: f64,
}

/// Theoretical reference values for one loss count.
#[derive(Clone, Debug, Serialize)]
pub struct TheoreticalRow {
    pub p: usize,
    /// Exact worst-case error in the operator norm.
    pub worst_case_operator: f64,
    /// Exact worst-case error in the configured norm.
    pub worst_case_norm: f64,
    /// Lower bound in the configured norm, when one applies.
    pub lower_bound: Option<f64>,
}

/// Simulation report.
#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub trials: usize,
    pub empirical_max: f64,
    pub empirical_mean: f64,
    pub theoretical: Vec<TheoreticalRow>,
    pub histogram: Vec<PatternStat>,
}

/// Full result: summary report plus the per-trial table (for CSV export).
#[derive(Clone, Debug)]
pub struct SimRun {
    pub report: SimReport,
    pub records: Vec<TrialRecord>,
}

fn random_unit_signal(d: usize, field: Field, rng: &mut ChaCha8Rng) -> CVector {
    let mut x = DVector::from_fn(d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = if field == Field::Complex {
            StandardNormal.sample(rng)
        } else {
            0.0
        };
        Complex64::new(re, im)
    });
    let n = x.norm();
    if n > 0.0 {
        x /= Complex64::new(n, 0.0);
    }
    x
}

fn sample_pattern(model: LossModel, m: usize, rng: &mut ChaCha8Rng) -> Result<ErasurePattern> {
    match model {
        LossModel::UniformP { p } => {
            if p > m {
                return Err(Error::InvalidArgument(format!(
                    "cannot erase {p} of {m} packets"
                )));
            }
            let chosen = sample(rng, m, p).into_iter().map(|i| i + 1).collect();
            ErasurePattern::new(chosen, m)
        }
        LossModel::Bernoulli { q } => {
            let chosen = (1..=m).filter(|_| rng.random::<f64>() < q).collect();
            ErasurePattern::new(chosen, m)
        }
        LossModel::AdversarialScan { .. } => Err(Error::Internal(
            "adversarial scan does not sample patterns".into(),
        )),
    }
}

/// Blind-reconstruction error of `x` under the pattern, computed in the
/// packet domain and cross-checked against the operator route
/// `|| V* D_K V x ||`.
fn trial_error(sys: &ReconSystem, x: &CVector, pattern: &ErasurePattern) -> Result<f64> {
    let packets = sys.encode(x)?;
    let xr = sys.reconstruct(&packets, ReconstructionMode::Blind, pattern)?;
    let packet_domain = (x - &xr).norm();
    let operator_domain = (erasures::error_matrix(sys, pattern)? * x).norm();
    if (packet_domain - operator_domain).abs() > 1e-12 * (1.0 + packet_domain) {
        return Err(Error::Internal(format!(
            "packet-domain and operator-domain errors disagree: {packet_domain} vs {operator_domain}"
        )));
    }
    Ok(packet_domain)
}

/// Runs the simulation. Blind reconstruction presumes a protocol; anything
/// else is rejected.
pub fn simulate(sys: &ReconSystem, config: &SimConfig) -> Result<SimRun> {
    config.validate()?;
    let shape = sys.shape();
    if !sys.classify(CLASSIFY_TOL).is_protocol {
        return Err(Error::InvalidSystem(
            "blind-reconstruction simulation needs a protocol (S = I)".into(),
        ));
    }

    let records = match config.loss {
        LossModel::AdversarialScan { p } => adversarial_records(sys, p)?,
        _ => {
            // per-trial substreams keep the run order-independent
            let drawn: Result<Vec<(ErasurePattern, f64)>> = (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    let stream = config
                        .seed
                        .wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                    let mut rng = ChaCha8Rng::seed_from_u64(stream);
                    let pattern = sample_pattern(config.loss, shape.m, &mut rng)?;
                    let x = random_unit_signal(shape.d, shape.field, &mut rng);
                    let error = trial_error(sys, &x, &pattern)?;
                    Ok((pattern, error))
                })
                .collect();
            let mut bounds: BTreeMap<usize, f64> = BTreeMap::new();
            drawn?
                .into_iter()
                .enumerate()
                .map(|(trial, (pattern, error))| {
                    let p = pattern.len();
                    let bound = match bounds.entry(p) {
                        std::collections::btree_map::Entry::Occupied(e) => *e.get(),
                        std::collections::btree_map::Entry::Vacant(e) => *e.insert(
                            erasures::worst_case_error(sys, p, GaugeNorm::operator())?
                                .worst_error,
                        ),
                    };
                    Ok(TrialRecord {
                        trial: trial + 1,
                        pattern,
                        error,
                        bound,
                        slack: bound - error,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    // empirical errors can never beat the exact worst case
    for r in &records {
        if r.error > r.bound + 1e-9 {
            return Err(Error::Internal(format!(
                "trial {} exceeded the worst-case bound: {} > {}",
                r.trial, r.error, r.bound
            )));
        }
    }

    let empirical_max = records.iter().map(|r| r.error).fold(0.0, f64::max);
    let empirical_mean =
        records.iter().map(|r| r.error).sum::<f64>() / records.len().max(1) as f64;

    let mut histogram: BTreeMap<ErasurePattern, PatternStat> = BTreeMap::new();
    for r in &records {
        let stat = histogram
            .entry(r.pattern.clone())
            .or_insert_with(|| PatternStat {
                pattern: r.pattern.clone(),
                count: 0,
                max_error: 0.0,
            });
        stat.count += 1;
        stat.max_error = stat.max_error.max(r.error);
    }

    let sizes: std::collections::BTreeSet<usize> = records.iter().map(|r| r.pattern.len()).collect();
    let mut theoretical = Vec::new();
    for p in sizes {
        let op = erasures::worst_case_error(sys, p, GaugeNorm::operator())?;
        let in_norm = erasures::worst_case_error(sys, p, config.norm)?;
        let lower_bound = match p {
            1 => Some(e1_lower_bound(shape, config.norm)),
            2 if shape.m >= 2 => Some(e2_lower_bound(shape, config.norm)?),
            _ => None,
        };
        theoretical.push(TheoreticalRow {
            p,
            worst_case_operator: op.worst_error,
            worst_case_norm: in_norm.worst_error,
            lower_bound,
        });
    }

    Ok(SimRun {
        report: SimReport {
            config: config.clone(),
            trials: records.len(),
            empirical_max,
            empirical_mean,
            theoretical,
            histogram: histogram.into_values().collect(),
        },
        records,
    })
}

/// One record per pattern of size `p`, each driven by the extremal
/// eigenvector of its error operator.
fn adversarial_records(sys: &ReconSystem, p: usize) -> Result<Vec<TrialRecord>> {
    let m = sys.shape().m;
    if p > m {
        return Err(Error::InvalidArgument(format!(
            "cannot erase {p} of {m} packets"
        )));
    }
    let bound = erasures::worst_case_error(sys, p, GaugeNorm::operator())?.worst_error;
    use itertools::Itertools;
    let mut records = Vec::new();
    for (idx, combo) in (1..=m).combinations(p).enumerate() {
        let pattern = ErasurePattern::new(combo, m)?;
        let e = erasures::error_matrix(sys, &pattern)?;
        let (vals, vecs) = spectra::eig_desc(&e)?;
        let x = vecs.column(0).into_owned();
        let error = if vals.is_empty() { 0.0 } else { trial_error(sys, &x, &pattern)? };
        records.push(TrialRecord {
            trial: idx + 1,
            pattern,
            error,
            bound,
            slack: bound - error,
        });
    }
    Ok(records)
}

/// Writes the per-trial table as CSV with the fixed column set
/// `trial,pattern,error,bound,slack`.
pub fn write_trials_csv(records: &[TrialRecord], mut out: impl std::io::Write) -> Result<()> {
    writeln!(out, "trial,pattern,error,bound,slack")?;
    for r in records {
        writeln!(
            out,
            "{},{},{:.17e},{:.17e},{:.17e}",
            r.trial, r.pattern, r.error, r.bound, r.slack
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{dft_uwp, random_protocol, random_system};
    use approx::assert_abs_diff_eq;

    fn cfg(trials: usize, loss: LossModel, seed: u64) -> SimConfig {
        SimConfig {
            trials,
            loss,
            norm: GaugeNorm::operator(),
            seed,
        }
    }

    #[test]
    fn zero_loss_gives_zero_error() {
        // lossless blind reconstruction applies S = I up to rounding
        let sys = random_protocol(4, 2, 5, 1).unwrap();
        let run = simulate(&sys, &cfg(20, LossModel::UniformP { p: 0 }, 3)).unwrap();
        assert!(run.report.empirical_max <= 1e-12);
        assert!(run.report.empirical_mean <= 1e-12);
        // Bernoulli(0) behaves identically
        let run = simulate(&sys, &cfg(20, LossModel::Bernoulli { q: 0.0 }, 3)).unwrap();
        assert!(run.report.empirical_max <= 1e-12);
    }

    #[test]
    fn adversarial_scan_attains_worst_case() {
        let sys = dft_uwp(4, 2, 2).unwrap();
        let run = simulate(&sys, &cfg(1, LossModel::AdversarialScan { p: 1 }, 0)).unwrap();
        assert_abs_diff_eq!(run.report.empirical_max, 0.5, epsilon = 1e-6);
        assert_eq!(run.records.len(), 4);
        for r in &run.records {
            assert!(r.slack >= -1e-9);
        }
    }

    #[test]
    fn monte_carlo_stays_below_worst_case() {
        let sys = random_protocol(5, 1, 3, 9).unwrap();
        let run = simulate(&sys, &cfg(200, LossModel::UniformP { p: 1 }, 17)).unwrap();
        let worst = run.report.theoretical[0].worst_case_operator;
        assert!(run.report.empirical_max <= worst + 1e-9);
        assert!(run.report.empirical_mean <= run.report.empirical_max);
    }

    #[test]
    fn bernoulli_histogram_covers_sizes() {
        let sys = random_protocol(4, 1, 3, 5).unwrap();
        let run = simulate(&sys, &cfg(300, LossModel::Bernoulli { q: 0.4 }, 23)).unwrap();
        let total: usize = run.report.histogram.iter().map(|h| h.count).sum();
        assert_eq!(total, 300);
        assert!(run.report.theoretical.len() > 1);
    }

    #[test]
    fn byte_identical_reports_for_equal_configs() {
        let sys = random_protocol(4, 2, 5, 2).unwrap();
        let c = cfg(50, LossModel::UniformP { p: 2 }, 31);
        let a = simulate(&sys, &c).unwrap();
        let b = simulate(&sys, &c).unwrap();
        let ja = serde_json::to_string(&a.report).unwrap();
        let jb = serde_json::to_string(&b.report).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn non_protocol_is_rejected() {
        let sys = random_system(3, 2, 4, 7).unwrap();
        assert!(matches!(
            simulate(&sys, &cfg(5, LossModel::UniformP { p: 1 }, 0)),
            Err(Error::InvalidSystem(_))
        ));
    }

    #[test]
    fn config_validation() {
        let sys = random_protocol(3, 1, 2, 0).unwrap();
        assert!(simulate(&sys, &cfg(0, LossModel::UniformP { p: 1 }, 0)).is_err());
        assert!(simulate(&sys, &cfg(5, LossModel::Bernoulli { q: 1.5 }, 0)).is_err());
        assert!(simulate(&sys, &cfg(5, LossModel::UniformP { p: 9 }, 0)).is_err());
    }

    #[test]
    fn csv_has_fixed_columns() {
        let sys = dft_uwp(3, 1, 2).unwrap();
        let run = simulate(&sys, &cfg(3, LossModel::UniformP { p: 1 }, 1)).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&run.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "trial,pattern,error,bound,slack");
        assert_eq!(lines.count(), 3);
    }
}
