//! Finite-statistics experiment simulation and analysis.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::{self, ChshAngles, CorrelationSource};
use crate::lhv::{self, LhvModel};
use crate::qstate::{self, CorrelationSign, EntangledState, JointDistribution, Outcome, StateKind};
use crate::rng;

/// Labels of the CHSH setting pairs, in `(δ,γ), (δ,γ′), (δ′,γ), (δ′,γ′)` order.
pub const CHSH_LABELS: [&str; 4] = ["dg", "dg'", "d'g", "d'g'"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SettingsPolicy {
    RoundRobin,
    #[default]
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettingsSchedule {
    pub pairs: Vec<(f64, f64)>,
    pub policy: SettingsPolicy,
}

impl SettingsSchedule {
    pub fn new(pairs: Vec<(f64, f64)>, policy: SettingsPolicy) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidSchedule("no settings pairs".into()));
        }
        if pairs.iter().any(|(d, g)| !d.is_finite() || !g.is_finite()) {
            return Err(Error::InvalidSchedule("angles must be finite".into()));
        }
        Ok(SettingsSchedule { pairs, policy })
    }

    /// The four CHSH pairs in [`CHSH_LABELS`] order.
    pub fn chsh(angles: ChshAngles, policy: SettingsPolicy) -> Result<Self> {
        SettingsSchedule::new(angles.pairs().to_vec(), policy)
    }
}

/// What generates the outcomes of a simulated trial.
#[derive(Debug, Clone)]
pub enum TrialSource {
    Quantum(EntangledState),
    Lhv(LhvModel),
}

impl TrialSource {
    pub fn describe(&self) -> String {
        match self {
            TrialSource::Quantum(s) => format!("quantum {}", s.kind),
            TrialSource::Lhv(m) => format!("lhv {}", m.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub pair_index: usize,
    pub outcome_d: Outcome,
    pub outcome_g: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub pairs: Vec<(f64, f64)>,
    pub records: Vec<TrialRecord>,
    pub seed: u64,
    pub source_description: String,
}

fn sample_joint<R: Rng + ?Sized>(j: &JointDistribution, rng: &mut R) -> (Outcome, Outcome) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let cells = [
        (Outcome::Plus, Outcome::Plus),
        (Outcome::Plus, Outcome::Minus),
        (Outcome::Minus, Outcome::Plus),
    ];
    for (cell, p) in cells.into_iter().zip(j.as_array()) {
        acc += p;
        if u < acc {
            return cell;
        }
    }
    (Outcome::Minus, Outcome::Minus)
}

/// Simulates `n` trials. Each block of [`rng::BLOCK_SIZE`] trials uses its
/// own substream of `seed`, so the log is identical for any thread count.
pub fn run_trials(source: &TrialSource, schedule: &SettingsSchedule, n: usize, seed: u64) -> Result<TrialLog> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let n_pairs = schedule.pairs.len();
    let joints: Vec<JointDistribution> = match source {
        TrialSource::Quantum(state) => schedule
            .pairs
            .iter()
            .map(|&(d, g)| state.joint_distribution(d, g))
            .collect(),
        TrialSource::Lhv(_) => Vec::new(),
    };
    let blocks: Vec<_> = rng::blocks(n).collect();
    let records: Vec<TrialRecord> = blocks
        .par_iter()
        .flat_map_iter(|&(block, start, len)| {
            let mut r = rng::substream(seed, block);
            let joints = &joints;
            (start..start + len)
                .map(|trial| {
                    let pair_index = match schedule.policy {
                        SettingsPolicy::RoundRobin => trial % n_pairs,
                        SettingsPolicy::UniformRandom => r.random_range(0..n_pairs),
                    };
                    let (outcome_d, outcome_g) = match source {
                        TrialSource::Quantum(_) => sample_joint(&joints[pair_index], &mut r),
                        TrialSource::Lhv(model) => {
                            let (d, g) = schedule.pairs[pair_index];
                            lhv::sample_pair(model, d, g, &mut r)
                        }
                    };
                    TrialRecord {
                        pair_index,
                        outcome_d,
                        outcome_g,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(TrialLog {
        pairs: schedule.pairs.clone(),
        records,
        seed,
        source_description: source.describe(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PairCounts {
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }

    pub fn add(&mut self, d: Outcome, g: Outcome) {
        match (d, g) {
            (Outcome::Plus, Outcome::Plus) => self.n_pp += 1,
            (Outcome::Plus, Outcome::Minus) => self.n_pm += 1,
            (Outcome::Minus, Outcome::Plus) => self.n_mp += 1,
            (Outcome::Minus, Outcome::Minus) => self.n_mm += 1,
        }
    }

    /// Empirical `E`, or `None` without trials.
    pub fn correlation(&self) -> Option<f64> {
        let t = self.total();
        (t > 0).then(|| {
            (self.n_pp as f64 + self.n_mm as f64 - self.n_pm as f64 - self.n_mp as f64) / t as f64
        })
    }

    pub fn frequencies(&self) -> Option<JointDistribution> {
        let t = self.total() as f64;
        (self.total() > 0).then(|| JointDistribution {
            p_pp: self.n_pp as f64 / t,
            p_pm: self.n_pm as f64 / t,
            p_mp: self.n_mp as f64 / t,
            p_mm: self.n_mm as f64 / t,
        })
    }
}

/// Outcome-pair counts per settings pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountsTable {
    pub pairs: Vec<(f64, f64)>,
    pub counts: Vec<PairCounts>,
}

impl CountsTable {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(PairCounts::total).sum()
    }

    pub fn find(&self, delta: f64, gamma: f64, tol: f64) -> Option<&PairCounts> {
        self.pairs
            .iter()
            .position(|(d, g)| (d - delta).abs() <= tol && (g - gamma).abs() <= tol)
            .map(|i| &self.counts[i])
    }
}

pub fn tabulate(log: &TrialLog) -> CountsTable {
    let mut counts = vec![PairCounts::default(); log.pairs.len()];
    for r in &log.records {
        counts[r.pair_index].add(r.outcome_d, r.outcome_g);
    }
    CountsTable {
        pairs: log.pairs.clone(),
        counts,
    }
}

/// Which table rows hold `(δ,γ), (δ,γ′), (δ′,γ), (δ′,γ′)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChshMapping(pub [usize; 4]);

impl Default for ChshMapping {
    fn default() -> Self {
        ChshMapping([0, 1, 2, 3])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub pair: String,
    #[serde(rename = "E")]
    pub correlation: f64,
    pub std_error: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshAnalysis {
    pub per_pair: Vec<PairEstimate>,
    pub s_mean: f64,
    pub s_std_error: f64,
    pub violated_2sigma: bool,
    pub violated_5sigma: bool,
}

impl ChshAnalysis {
    /// Distance of `|S|` above 2 in standard errors.
    pub fn sigmas_above_bound(&self) -> f64 {
        (self.s_mean.abs() - 2.0) / self.s_std_error
    }
}

/// Estimates `S` with binomial error bars, pairs treated as independent.
pub fn analyze_chsh(counts: &CountsTable, mapping: ChshMapping) -> Result<ChshAnalysis> {
    let mut per_pair = Vec::with_capacity(4);
    for (label, &row) in CHSH_LABELS.iter().zip(&mapping.0) {
        let c = counts
            .counts
            .get(row)
            .ok_or_else(|| Error::InvalidArgument(format!("no row {row} for pair {label}")))?;
        let e = c.correlation().ok_or_else(|| Error::EmptyPair(label.to_string()))?;
        let n = c.total();
        per_pair.push(PairEstimate {
            pair: label.to_string(),
            correlation: e,
            std_error: ((1.0 - e * e) / n as f64).max(0.0).sqrt(),
            n,
        });
    }
    let e: Vec<f64> = per_pair.iter().map(|p| p.correlation).collect();
    let s_mean = e[0] + e[1] + e[2] - e[3];
    let s_std_error = per_pair.iter().map(|p| p.std_error * p.std_error).sum::<f64>().sqrt();
    let excess = s_mean.abs() - 2.0;
    Ok(ChshAnalysis {
        per_pair,
        s_mean,
        s_std_error,
        violated_2sigma: excess > 2.0 * s_std_error,
        violated_5sigma: excess > 5.0 * s_std_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshOptimum {
    pub angles: ChshAngles,
    pub s_star: f64,
}

/// Smallest step of the coordinate-descent refinement, in radians.
pub const REFINE_TOLERANCE: f64 = 1e-8;

/// Maximises `objective` over four angles: an exhaustive grid with spacing
/// `coarse_step` (radians) over `[0, 2π)⁴`, then coordinate descent from
/// the best grid point with the step halved whenever no coordinate move
/// improves, down to [`REFINE_TOLERANCE`] or `refine_iters` sweeps.
pub fn maximize_over_angles<F>(objective: F, coarse_step: f64, refine_iters: usize) -> ([f64; 4], f64)
where
    F: Fn(&[f64; 4]) -> f64 + Sync,
{
    let k = (std::f64::consts::TAU / coarse_step).round().max(1.0) as usize;
    let grid = |i: usize| i as f64 * coarse_step;
    let (mut best, mut best_val) = (0..k * k)
        .into_par_iter()
        .map(|ab| {
            let (a, b) = (ab / k, ab % k);
            let mut local = ([0.0; 4], f64::NEG_INFINITY);
            for c in 0..k {
                for d in 0..k {
                    let x = [grid(a), grid(b), grid(c), grid(d)];
                    let v = objective(&x);
                    if v > local.1 {
                        local = (x, v);
                    }
                }
            }
            local
        })
        .reduce(
            || ([0.0; 4], f64::NEG_INFINITY),
            |p, q| if q.1 > p.1 { q } else { p },
        );

    let mut step = coarse_step / 2.0;
    for _ in 0..refine_iters {
        if step < REFINE_TOLERANCE {
            break;
        }
        let mut improved = false;
        for axis in 0..4 {
            for dir in [1.0, -1.0] {
                let mut x = best;
                x[axis] += dir * step;
                let v = objective(&x);
                if v > best_val {
                    best = x;
                    best_val = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (best, best_val)
}

/// Largest `|S|` of a state's closed-form correlations over all angles.
pub fn maximize_chsh(kind: StateKind, coarse_step_deg: f64, refine_iters: usize) -> Result<ChshOptimum> {
    if !(coarse_step_deg > 0.0 && coarse_step_deg <= 15.0) {
        return Err(Error::InvalidArgument(format!(
            "coarse step must be in (0, 15] degrees, got {coarse_step_deg}"
        )));
    }
    let objective = |x: &[f64; 4]| {
        let e = |d, g| qstate::closed_form_correlation(kind, d, g);
        (e(x[0], x[2]) + e(x[0], x[3]) + e(x[1], x[2]) - e(x[1], x[3])).abs()
    };
    let (angles, s_star) = maximize_over_angles(objective, coarse_step_deg.to_radians(), refine_iters);
    Ok(ChshOptimum {
        angles: ChshAngles::from_array(angles),
        s_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WignerPoint {
    pub theta2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Wigner inequality for the spin singlet with `ϑ₂` swept over `steps`
/// evenly spaced points from `ϑ₁` to `ϑ₃` inclusive.
pub fn wigner_scan(theta1: f64, theta3: f64, steps: usize) -> Result<Vec<WignerPoint>> {
    if steps < 3 {
        return Err(Error::InvalidArgument(format!("steps must be >= 3, got {steps}")));
    }
    let source = CorrelationSource::QuantumBorn(qstate::make_state(StateKind::SpinAnticorrelated));
    (0..steps)
        .map(|i| {
            let theta2 = theta1 + (theta3 - theta1) * i as f64 / (steps - 1) as f64;
            let r = inequalities::wigner_check(&source, CorrelationSign::Anticorrelated, theta1, theta2, theta3)?;
            Ok(WignerPoint {
                theta2,
                lhs: r.lhs,
                rhs: r.bound,
                margin: r.margin,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn singlet() -> TrialSource {
        TrialSource::Quantum(qstate::make_state(StateKind::SpinAnticorrelated))
    }

    fn canonical() -> ChshAngles {
        ChshAngles::new(0.0, -FRAC_PI_2, 3.0 * FRAC_PI_4, -3.0 * FRAC_PI_4)
    }

    #[test]
    fn equal_angle_runs_are_anticorrelated() {
        let schedule = SettingsSchedule::new(vec![(0.0, 0.0)], SettingsPolicy::UniformRandom).unwrap();
        for source in [singlet(), TrialSource::Lhv(lhv::sign_model())] {
            let log = run_trials(&source, &schedule, 1000, 5).unwrap();
            assert_eq!(log.records.len(), 1000);
            assert!(log.records.iter().all(|r| r.outcome_d != r.outcome_g));
            let t = tabulate(&log);
            assert_eq!(t.counts[0].n_pp + t.counts[0].n_mm, 0);
            assert_eq!(t.total(), 1000);
        }
        let log = run_trials(&singlet(), &schedule, 1, 5).unwrap();
        assert_eq!(log.records.len(), 1);
        assert!(run_trials(&singlet(), &schedule, 0, 5).is_err());
    }

    #[test]
    fn empty_log_tabulates_to_zero() {
        let log = TrialLog {
            pairs: vec![(0.0, 1.0), (1.0, 2.0)],
            records: vec![],
            seed: 0,
            source_description: String::new(),
        };
        let t = tabulate(&log);
        assert!(t.counts.iter().all(|c| c.total() == 0));
    }

    #[test]
    fn round_robin_cycles_pairs() {
        let schedule = SettingsSchedule::chsh(canonical(), SettingsPolicy::RoundRobin).unwrap();
        let log = run_trials(&singlet(), &schedule, 10_001, 1).unwrap();
        for (i, r) in log.records.iter().enumerate() {
            assert_eq!(r.pair_index, i % 4);
        }
    }

    #[test]
    fn concentrated_counts_give_s_two() {
        let c = PairCounts {
            n_pp: 7,
            ..Default::default()
        };
        let table = CountsTable {
            pairs: canonical().pairs().to_vec(),
            counts: vec![c; 4],
        };
        let a = analyze_chsh(&table, ChshMapping::default()).unwrap();
        assert_eq!(a.s_mean, 2.0);
        assert_eq!(a.s_std_error, 0.0);
        assert!(!a.violated_2sigma && !a.violated_5sigma);
    }

    #[test]
    fn empty_pair_is_an_error() {
        let mut counts = vec![PairCounts { n_pp: 1, ..Default::default() }; 4];
        counts[2] = PairCounts::default();
        let table = CountsTable {
            pairs: canonical().pairs().to_vec(),
            counts,
        };
        assert_eq!(
            analyze_chsh(&table, ChshMapping::default()),
            Err(Error::EmptyPair("d'g".into()))
        );
    }

    #[test]
    fn simulated_singlet_violates() {
        let schedule = SettingsSchedule::chsh(canonical(), SettingsPolicy::UniformRandom).unwrap();
        let log = run_trials(&singlet(), &schedule, 1_000_000, 11).unwrap();
        let a = analyze_chsh(&tabulate(&log), ChshMapping::default()).unwrap();
        assert!((a.s_mean - 2.0 * SQRT_2).abs() <= 5.0 * a.s_std_error);
        assert!(a.violated_5sigma);
    }

    #[test]
    fn simulated_sign_model_respects_bound() {
        let schedule = SettingsSchedule::chsh(canonical(), SettingsPolicy::UniformRandom).unwrap();
        let log = run_trials(&TrialSource::Lhv(lhv::sign_model()), &schedule, 1_000_000, 11).unwrap();
        let a = analyze_chsh(&tabulate(&log), ChshMapping::default()).unwrap();
        assert!(a.s_mean <= 2.0 + 5.0 * a.s_std_error);
        assert!(!a.violated_5sigma);
    }

    #[test]
    fn maximize_examples() {
        for kind in [StateKind::SpinAnticorrelated, StateKind::SpinCorrelated] {
            let opt = maximize_chsh(kind, 15.0, 200).unwrap();
            assert!((opt.s_star - 2.0 * SQRT_2).abs() < 1e-6, "{kind}");
        }
        // off-grid start still refines to the ceiling
        let opt = maximize_chsh(StateKind::SpinAnticorrelated, 14.0, 500).unwrap();
        assert!((opt.s_star - 2.0 * SQRT_2).abs() < 1e-6);
        assert!(opt.s_star <= 2.0 * SQRT_2 + 1e-6);
        assert!(maximize_chsh(StateKind::SpinAnticorrelated, 20.0, 10).is_err());
    }

    #[test]
    fn tied_angles_cap_at_two() {
        let objective = |x: &[f64; 4]| {
            let e = |d, g| qstate::closed_form_correlation(StateKind::SpinAnticorrelated, d, g);
            let a = x[0];
            (e(a, a) + e(a, a) + e(a, a) - e(a, a)).abs()
        };
        let (_, v) = maximize_over_angles(objective, 15f64.to_radians(), 50);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wigner_scan_examples() {
        let scan = wigner_scan(0.0, FRAC_PI_2, 17).unwrap();
        assert_eq!(scan.len(), 17);
        assert!(scan[1..16].iter().all(|p| p.margin > 0.0));
        assert!((scan[0].lhs - 0.25).abs() < 1e-12);
        assert!((scan[0].rhs - 0.25).abs() < 1e-12);
        assert!(scan[0].margin.abs() < 1e-12);
        let mid = &scan[8];
        assert!((mid.theta2 - FRAC_PI_4).abs() < 1e-12);
        assert!((mid.margin - 0.103553).abs() < 1e-6);
        assert!(wigner_scan(0.0, 1.0, 2).is_err());
    }
}
