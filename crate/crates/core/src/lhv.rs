//! Local hidden-variable models.
//!
//! A model is a single density over a scalar hidden variable `λ`, shared by
//! every analyzer setting, plus one deterministic response per particle.
//! A response only ever sees its own analyzer angle.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::Outcome;
use crate::rng;

/// Minimum node count accepted by [`quadrature_correlation`].
pub const MIN_QUADRATURE_NODES: usize = 1000;

/// Nodes used when checking that a density is normalized.
const NORMALIZATION_NODES: usize = 20_000;
const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Probability density of the hidden variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform { low: f64, high: f64 },
    /// Constant density on each `[edges[i], edges[i+1])`, carrying total
    /// probability `masses[i]`.
    Piecewise { edges: Vec<f64>, masses: Vec<f64> },
    Normal { mean: f64, std_dev: f64 },
}

impl Density {
    fn validate(&self) -> Result<()> {
        match self {
            Density::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(Error::InvalidDensity(format!("uniform on [{low}, {high})")));
                }
            }
            Density::Piecewise { edges, masses } => {
                if edges.len() < 2 || masses.len() + 1 != edges.len() {
                    return Err(Error::InvalidDensity(
                        "piecewise density needs n+1 edges for n masses".into(),
                    ));
                }
                if edges.windows(2).any(|w| !(w[0] < w[1]) || !w[1].is_finite()) {
                    return Err(Error::InvalidDensity("edges must be increasing".into()));
                }
                if masses.iter().any(|m| !(*m >= 0.0)) {
                    return Err(Error::InvalidDensity("masses must be non-negative".into()));
                }
            }
            Density::Normal { mean, std_dev } => {
                if !(mean.is_finite() && std_dev.is_finite() && *std_dev > 0.0) {
                    return Err(Error::InvalidDensity(format!("normal({mean}, {std_dev})")));
                }
            }
        }
        Ok(())
    }

    /// Bounded support, or `None` for unbounded densities.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Density::Uniform { low, high } => Some((*low, *high)),
            Density::Piecewise { edges, .. } => Some((edges[0], edges[edges.len() - 1])),
            Density::Normal { .. } => None,
        }
    }

    pub fn pdf(&self, lambda: f64) -> f64 {
        match self {
            Density::Uniform { low, high } => {
                if (*low..*high).contains(&lambda) {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Density::Piecewise { edges, masses } => edges
                .windows(2)
                .zip(masses)
                .find(|(w, _)| (w[0]..w[1]).contains(&lambda))
                .map_or(0.0, |(w, m)| m / (w[1] - w[0])),
            Density::Normal { mean, std_dev } => {
                let z = (lambda - mean) / std_dev;
                (-0.5 * z * z).exp() / (std_dev * TAU.sqrt())
            }
        }
    }

    /// Points inside the support where the density jumps.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density::Piecewise { edges, .. } => edges[1..edges.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Density::Uniform { low, high } => rng.random_range(*low..*high),
            Density::Piecewise { edges, masses } => {
                let total: f64 = masses.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let last = masses.len() - 1;
                for (i, m) in masses.iter().enumerate() {
                    if u < *m || i == last {
                        let frac = if *m > 0.0 { (u / m).min(1.0) } else { 0.0 };
                        let x = edges[i] + frac * (edges[i + 1] - edges[i]);
                        return x.min(edges[i + 1].next_down());
                    }
                    u -= m;
                }
                unreachable!("piecewise density has at least one segment")
            }
            Density::Normal { mean, std_dev } => Normal::new(*mean, *std_dev)
                .expect("validated normal parameters")
                .sample(rng),
        }
    }

    /// Midpoint-rule integral of the pdf; unbounded densities are cut at ±12σ.
    fn integral(&self) -> f64 {
        let (low, high) = match self {
            Density::Normal { mean, std_dev } => (mean - 12.0 * std_dev, mean + 12.0 * std_dev),
            _ => self.support().expect("bounded"),
        };
        let mut cuts = vec![low];
        cuts.extend(self.breakpoints());
        cuts.push(high);
        midpoint_segments(&cuts, NORMALIZATION_NODES, |x| self.pdf(x))
    }
}

/// Deterministic local response `(λ, own angle) → ±1`.
pub trait Response: Send + Sync + fmt::Debug {
    fn outcome(&self, lambda: f64, angle: f64) -> Outcome;

    /// Values of `λ` in `[low, high]` where the response may change sign for
    /// this angle. Quadrature splits its intervals there.
    fn breakpoints(&self, _angle: f64, _low: f64, _high: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// `±sgn cos(λ − θ)`, with `sgn 0 = +1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignOfCosine {
    pub negate: bool,
}

impl Response for SignOfCosine {
    fn outcome(&self, lambda: f64, angle: f64) -> Outcome {
        let o = Outcome::from_sign((lambda - angle).cos());
        if self.negate {
            o.flipped()
        } else {
            o
        }
    }

    fn breakpoints(&self, angle: f64, low: f64, high: f64) -> Vec<f64> {
        // zeros of cos(λ − θ): θ + π/2 + kπ
        let base = angle + FRAC_PI_2;
        let first = ((low - base) / std::f64::consts::PI).ceil() as i64;
        let last = ((high - base) / std::f64::consts::PI).floor() as i64;
        (first..=last)
            .map(|k| base + k as f64 * std::f64::consts::PI)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantResponse(pub Outcome);

impl Response for ConstantResponse {
    fn outcome(&self, _lambda: f64, _angle: f64) -> Outcome {
        self.0
    }
}

#[derive(Clone)]
pub struct LhvModel {
    name: String,
    description: String,
    density: Density,
    response_d: Arc<dyn Response>,
    response_g: Arc<dyn Response>,
}

impl fmt::Debug for LhvModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LhvModel")
            .field("name", &self.name)
            .field("density", &self.density)
            .field("response_d", &self.response_d)
            .field("response_g", &self.response_g)
            .finish()
    }
}

impl LhvModel {
    /// Builds a model, rejecting densities that do not integrate to one.
    pub fn new(
        name: impl Into<String>,
        density: Density,
        response_d: Arc<dyn Response>,
        response_g: Arc<dyn Response>,
    ) -> Result<Self> {
        let name = name.into();
        density.validate()?;
        let integral = density.integral();
        if (integral - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::DensityNotNormalized {
                model: name,
                integral,
            });
        }
        Ok(LhvModel {
            name,
            description: String::new(),
            density,
            response_d,
            response_g,
        })
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn outcome_d(&self, lambda: f64, delta: f64) -> Outcome {
        self.response_d.outcome(lambda, delta)
    }

    pub fn outcome_g(&self, lambda: f64, gamma: f64) -> Outcome {
        self.response_g.outcome(lambda, gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Draws one `λ` and returns both local outcomes for it.
pub fn sample_pair<R: Rng + ?Sized>(
    model: &LhvModel,
    delta: f64,
    gamma: f64,
    rng: &mut R,
) -> (Outcome, Outcome) {
    let lambda = model.density.sample(rng);
    (model.outcome_d(lambda, delta), model.outcome_g(lambda, gamma))
}

fn midpoint_segments(cuts: &[f64], nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
    let width = cuts[cuts.len() - 1] - cuts[0];
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let len = w[1] - w[0];
            let k = ((nodes as f64 * len / width).round() as usize).max(1);
            let h = len / k as f64;
            (0..k).map(|i| f(w[0] + (i as f64 + 0.5) * h)).sum::<f64>() * h
        })
        .sum()
}

/// `∫ρ(λ) d(λ, δ) g(λ, γ) dλ` by the midpoint rule.
///
/// The support is first split wherever the density or either response can
/// jump, so piecewise-constant integrands are integrated without
/// discontinuity error.
pub fn quadrature_correlation(model: &LhvModel, delta: f64, gamma: f64, nodes: usize) -> Result<f64> {
    if nodes < MIN_QUADRATURE_NODES {
        return Err(Error::TooFewNodes {
            min: MIN_QUADRATURE_NODES,
            got: nodes,
        });
    }
    let (low, high) = model
        .density
        .support()
        .ok_or_else(|| Error::UnboundedSupport(model.name.clone()))?;
    let mut cuts = vec![low, high];
    cuts.extend(model.density.breakpoints());
    cuts.extend(model.response_d.breakpoints(delta, low, high));
    cuts.extend(model.response_g.breakpoints(gamma, low, high));
    cuts.retain(|c| (low..=high).contains(c));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    Ok(midpoint_segments(&cuts, nodes, |lambda| {
        let product = model.outcome_d(lambda, delta).value() * model.outcome_g(lambda, gamma).value();
        model.density.pdf(lambda) * f64::from(product)
    }))
}

/// Monte Carlo mean of `d·g` over `n` independent draws of `λ`.
///
/// Work is split into fixed blocks with their own substreams, so the result
/// depends only on `seed` and `n`.
pub fn estimate_correlation(
    model: &LhvModel,
    delta: f64,
    gamma: f64,
    n: usize,
    seed: u64,
) -> Result<CorrelationEstimate> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let parts: Vec<_> = rng::blocks(n).collect();
    let sum: i64 = parts
        .par_iter()
        .map(|&(block, _, len)| {
            let mut r = rng::substream(seed, block);
            (0..len)
                .map(|_| {
                    let (d, g) = sample_pair(model, delta, gamma, &mut r);
                    i64::from(d.value() * g.value())
                })
                .sum::<i64>()
        })
        .sum();
    let nf = n as f64;
    let mean = sum as f64 / nf;
    // products are ±1, so Σx² = n
    let std_error = if n > 1 {
        let var = ((nf - nf * mean * mean) / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    Ok(CorrelationEstimate {
        mean,
        std_error,
        n_samples: n,
    })
}

/// `λ` uniform on the circle, `d = sgn cos(λ−δ)`, `g = −sgn cos(λ−γ)`.
///
/// Its correlation is `−1 + 2|γ−δ|/π` for `|γ−δ| ≤ π`.
pub fn sign_model() -> LhvModel {
    LhvModel::new(
        "sign_model",
        Density::Uniform { low: 0.0, high: TAU },
        Arc::new(SignOfCosine { negate: false }),
        Arc::new(SignOfCosine { negate: true }),
    )
    .expect("uniform density is normalized")
    .with_description("lambda uniform on [0, 2pi); d = sgn cos(lambda - delta), g = -sgn cos(lambda - gamma)")
}

/// `d = +1`, `g = −1` for every `λ`.
pub fn constant_model() -> LhvModel {
    LhvModel::new(
        "constant_model",
        Density::Uniform { low: 0.0, high: TAU },
        Arc::new(ConstantResponse(Outcome::Plus)),
        Arc::new(ConstantResponse(Outcome::Minus)),
    )
    .expect("uniform density is normalized")
    .with_description("d = +1, g = -1 always")
}

/// Sign responses over a density that favours hidden axes within π/4 of
/// the 0–π line (three times the weight of the other octants).
///
/// This sharpens the correlation for analyzers near that line, pulling it
/// toward the quantum cosine there, while keeping perfect anticorrelation at
/// equal angles. It still cannot push `|S|` past 2.
pub fn quantum_mimic_attempt() -> LhvModel {
    let edges: Vec<f64> = (0..=8).map(|i| i as f64 * FRAC_PI_4).collect();
    let (hi, lo) = (3.0 / 16.0, 1.0 / 16.0);
    let masses = vec![hi, lo, lo, hi, hi, lo, lo, hi];
    LhvModel::new(
        "quantum_mimic_attempt",
        Density::Piecewise { edges, masses },
        Arc::new(SignOfCosine { negate: false }),
        Arc::new(SignOfCosine { negate: true }),
    )
    .expect("masses sum to one")
    .with_description(
        "sign responses with lambda concentrated near the 0/pi axis (3:1 octant weights)",
    )
}

pub fn builtin_models() -> Vec<LhvModel> {
    vec![sign_model(), constant_model(), quantum_mimic_attempt()]
}

pub fn model_by_name(name: &str) -> Result<LhvModel> {
    builtin_models()
        .into_iter()
        .find(|m| m.name == name)
        .ok_or_else(|| Error::UnknownModel(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const NODES: usize = 4000;

    /// Direct λ-grid average, independent of the breakpoint splitting.
    fn grid_average(model: &LhvModel, delta: f64, gamma: f64, n: usize) -> f64 {
        let (low, high) = model.density().support().unwrap();
        let h = (high - low) / n as f64;
        (0..n)
            .map(|i| {
                let l = low + (i as f64 + 0.5) * h;
                model.density().pdf(l)
                    * f64::from(model.outcome_d(l, delta).value() * model.outcome_g(l, gamma).value())
            })
            .sum::<f64>()
            * h
    }

    fn sign_closed_form(delta: f64, gamma: f64) -> f64 {
        let mut diff = (gamma - delta).rem_euclid(TAU);
        if diff > PI {
            diff = TAU - diff;
        }
        -1.0 + 2.0 * diff / PI
    }

    #[test]
    fn sign_model_equal_angles_always_anticorrelated() {
        let m = sign_model();
        for i in 0..10_000 {
            let l = i as f64 * TAU / 10_000.0;
            for delta in [0.0, 0.5, 2.0] {
                assert_eq!(m.outcome_d(l, delta).value() * m.outcome_g(l, delta).value(), -1);
            }
        }
    }

    #[test]
    fn sample_pair_is_reproducible() {
        let m = sign_model();
        let a = sample_pair(&m, 0.0, FRAC_PI_2, &mut rng::substream(42, 0));
        let b = sample_pair(&m, 0.0, FRAC_PI_2, &mut rng::substream(42, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn quadrature_examples_for_sign_model() {
        let m = sign_model();
        let q = |d, g| quadrature_correlation(&m, d, g, NODES).unwrap();
        assert!((q(0.3, 0.3) + 1.0).abs() < 1e-12);
        assert!(q(0.3, 0.3 + FRAC_PI_2).abs() < 1e-12);
        assert!((q(0.3, 0.3 + PI) - 1.0).abs() < 1e-12);
        for (d, g) in [(0.0, 1.0), (0.2, 2.9), (1.0, -2.0), (4.0, 0.1)] {
            let oracle = grid_average(&m, d, g, 2_000_000);
            assert!((q(d, g) - oracle).abs() < 1e-5, "{d} {g}");
            assert!((q(d, g) - sign_closed_form(d, g)).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_matches_grid_for_mimic() {
        let m = quantum_mimic_attempt();
        for (d, g) in [(0.0, 0.7), (0.4, 2.1), (-1.0, 1.3)] {
            let q = quadrature_correlation(&m, d, g, NODES).unwrap();
            assert!((q - grid_average(&m, d, g, 2_000_000)).abs() < 1e-5);
        }
    }

    #[test]
    fn quadrature_errors() {
        let m = sign_model();
        assert_eq!(
            quadrature_correlation(&m, 0.0, 0.0, 999),
            Err(Error::TooFewNodes { min: 1000, got: 999 })
        );
        let gaussian = LhvModel::new(
            "gaussian",
            Density::Normal { mean: 0.0, std_dev: 1.0 },
            Arc::new(SignOfCosine { negate: false }),
            Arc::new(SignOfCosine { negate: true }),
        )
        .unwrap();
        assert!(matches!(
            quadrature_correlation(&gaussian, 0.0, 0.0, NODES),
            Err(Error::UnboundedSupport(_))
        ));
        let est = estimate_correlation(&gaussian, 0.0, 0.0, 1000, 1).unwrap();
        assert_eq!(est.mean, -1.0);
    }

    #[test]
    fn unnormalized_density_rejected() {
        let r = LhvModel::new(
            "bad",
            Density::Piecewise {
                edges: vec![0.0, 1.0, 2.0],
                masses: vec![0.5, 0.6],
            },
            Arc::new(ConstantResponse(Outcome::Plus)),
            Arc::new(ConstantResponse(Outcome::Plus)),
        );
        assert!(matches!(r, Err(Error::DensityNotNormalized { .. })));
        let r = LhvModel::new(
            "bad",
            Density::Uniform { low: 1.0, high: 1.0 },
            Arc::new(ConstantResponse(Outcome::Plus)),
            Arc::new(ConstantResponse(Outcome::Plus)),
        );
        assert!(matches!(r, Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn estimate_examples() {
        let m = sign_model();
        let e = estimate_correlation(&m, 0.4, 0.4, 100_000, 3).unwrap();
        assert_eq!(e.mean, -1.0);
        assert_eq!(e.std_error, 0.0);
        let e = estimate_correlation(&m, 0.0, FRAC_PI_2, 1_000_000, 3).unwrap();
        assert!(e.mean.abs() <= 5.0 * e.std_error);
        let e = estimate_correlation(&m, 0.0, 1.0, 1, 3).unwrap();
        assert!(e.mean == 1.0 || e.mean == -1.0);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(estimate_correlation(&m, 0.0, 1.0, 0, 3), Err(Error::NoSamples));
    }

    #[test]
    fn constant_model_is_always_minus_one() {
        let m = constant_model();
        for (d, g) in [(0.0, 0.0), (1.0, -2.0), (3.0, 0.5)] {
            assert!((quadrature_correlation(&m, d, g, NODES).unwrap() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn piecewise_sampling_stays_in_support() {
        let m = quantum_mimic_attempt();
        let mut r = rng::substream(9, 0);
        let mut counts = [0usize; 8];
        for _ in 0..80_000 {
            let l = m.density().sample(&mut r);
            assert!((0.0..TAU).contains(&l));
            counts[(l / FRAC_PI_4) as usize] += 1;
        }
        // heavy octants carry 3/16 of the mass each
        assert!((counts[0] as f64 / 80_000.0 - 3.0 / 16.0).abs() < 0.01);
        assert!((counts[1] as f64 / 80_000.0 - 1.0 / 16.0).abs() < 0.01);
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(model_by_name("sign_model").unwrap().name(), "sign_model");
        assert!(matches!(model_by_name("nope"), Err(Error::UnknownModel(_))));
    }
}
