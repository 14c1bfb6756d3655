//! Bell-type inequalities and their exhaustive enumeration oracles.
//!
//! Every evaluator works against a [`CorrelationSource`], so the same code
//! path checks quantum predictions, hidden-variable models, simulated or
//! ingested counts, and explicit quartet/sextet mixtures.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::CountsTable;
use crate::lhv::{self, LhvModel};
use crate::qstate::{self, CorrelationSign, EntangledState, JointDistribution, Outcome, StateKind};

/// A report is violated when `lhs − bound` exceeds this.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

/// Angles are matched against stored settings within this tolerance.
const ANGLE_MATCH: f64 = 1e-12;

const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// How correlations of an LHV model are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LhvMethod {
    Quadrature { nodes: usize },
    MonteCarlo { n: usize, seed: u64 },
}

/// Anything that yields `E(δ, γ)` and possibly joint probabilities.
#[derive(Debug, Clone)]
pub enum CorrelationSource {
    QuantumClosedForm(StateKind),
    QuantumBorn(EntangledState),
    Lhv { model: LhvModel, method: LhvMethod },
    Empirical(CountsTable),
    /// Mixture over the 16 Peres quartets, measured at `[δ, δ′, γ, γ′]`.
    QuartetMixture { weights: [f64; 16], angles: [f64; 4] },
    /// Mixture over the 8 Wigner sextets, measured at `[ϑ₁, ϑ₂, ϑ₃]` on
    /// both sides.
    SextetMixture {
        sign: CorrelationSign,
        weights: [f64; 8],
        angles: [f64; 3],
    },
}

fn find_angle(angles: &[f64], x: f64) -> Option<usize> {
    angles.iter().position(|a| (a - x).abs() <= ANGLE_MATCH)
}

impl CorrelationSource {
    pub fn describe(&self) -> String {
        match self {
            CorrelationSource::QuantumClosedForm(k) => format!("quantum closed form ({k})"),
            CorrelationSource::QuantumBorn(s) => format!("quantum Born rule ({})", s.kind),
            CorrelationSource::Lhv { model, method } => match method {
                LhvMethod::Quadrature { nodes } => {
                    format!("lhv {} (quadrature, {nodes} nodes)", model.name())
                }
                LhvMethod::MonteCarlo { n, seed } => {
                    format!("lhv {} (monte carlo, n={n}, seed={seed})", model.name())
                }
            },
            CorrelationSource::Empirical(t) => format!("empirical counts ({} pairs)", t.len()),
            CorrelationSource::QuartetMixture { .. } => "quartet mixture".to_string(),
            CorrelationSource::SextetMixture { sign, .. } => {
                format!("sextet mixture ({})", sign_name(*sign))
            }
        }
    }

    fn missing(&self, delta: f64, gamma: f64) -> Error {
        Error::MissingAnglePair {
            source_name: self.describe(),
            delta,
            gamma,
        }
    }

    /// Correlation function `E(δ, γ)`.
    pub fn correlation(&self, delta: f64, gamma: f64) -> Result<f64> {
        match self {
            CorrelationSource::QuantumClosedForm(k) => {
                Ok(qstate::closed_form_correlation(*k, delta, gamma))
            }
            CorrelationSource::QuantumBorn(s) => Ok(s.correlation(delta, gamma)),
            CorrelationSource::Lhv { model, method } => match *method {
                LhvMethod::Quadrature { nodes } => {
                    lhv::quadrature_correlation(model, delta, gamma, nodes)
                }
                LhvMethod::MonteCarlo { n, seed } => {
                    lhv::estimate_correlation(model, delta, gamma, n, seed).map(|e| e.mean)
                }
            },
            CorrelationSource::Empirical(t) => t
                .find(delta, gamma, ANGLE_MATCH)
                .ok_or_else(|| self.missing(delta, gamma))?
                .correlation()
                .ok_or_else(|| Error::EmptyPair(format!("({delta}, {gamma})"))),
            _ => self.joint(delta, gamma).map(|j| j.correlation()),
        }
    }

    /// Joint outcome probabilities at `(δ, γ)`.
    pub fn joint(&self, delta: f64, gamma: f64) -> Result<JointDistribution> {
        match self {
            CorrelationSource::QuantumClosedForm(k) => {
                Ok(qstate::make_state(*k).joint_distribution(delta, gamma))
            }
            CorrelationSource::QuantumBorn(s) => Ok(s.joint_distribution(delta, gamma)),
            CorrelationSource::Lhv { .. } => Err(Error::NoJointProbabilities(self.describe())),
            CorrelationSource::Empirical(t) => t
                .find(delta, gamma, ANGLE_MATCH)
                .ok_or_else(|| self.missing(delta, gamma))?
                .frequencies()
                .ok_or_else(|| Error::EmptyPair(format!("({delta}, {gamma})"))),
            CorrelationSource::QuartetMixture { weights, angles } => {
                validate_distribution(weights)?;
                let d_idx = find_angle(&angles[..2], delta);
                let g_idx = find_angle(&angles[2..], gamma);
                let (Some(di), Some(gi)) = (d_idx, g_idx) else {
                    return Err(self.missing(delta, gamma));
                };
                let quartets = enumerate_quartets();
                Ok(mixture_joint(weights, |i, d, g| {
                    let q = &quartets[i];
                    let qd = if di == 0 { q.d_delta } else { q.d_delta_prime };
                    let qg = if gi == 0 { q.g_gamma } else { q.g_gamma_prime };
                    qd == d && qg == g
                }))
            }
            CorrelationSource::SextetMixture {
                sign,
                weights,
                angles,
            } => {
                validate_distribution(weights)?;
                let (Some(di), Some(gi)) = (find_angle(angles, delta), find_angle(angles, gamma))
                else {
                    return Err(self.missing(delta, gamma));
                };
                let sextets = enumerate_sextets(*sign);
                Ok(mixture_joint(weights, |i, d, g| {
                    sextets[i].d[di] == d && sextets[i].g[gi] == g
                }))
            }
        }
    }
}

fn mixture_joint(weights: &[f64], matches: impl Fn(usize, Outcome, Outcome) -> bool) -> JointDistribution {
    let p = |d, g| {
        weights
            .iter()
            .enumerate()
            .filter(|(i, _)| matches(*i, d, g))
            .map(|(_, w)| w)
            .sum::<f64>()
    };
    JointDistribution {
        p_pp: p(Outcome::Plus, Outcome::Plus),
        p_pm: p(Outcome::Plus, Outcome::Minus),
        p_mp: p(Outcome::Minus, Outcome::Plus),
        p_mm: p(Outcome::Minus, Outcome::Minus),
    }
}

fn validate_distribution(weights: &[f64]) -> Result<()> {
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidDistribution(format!("weight {w} is not a non-negative number")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
    }
    Ok(())
}

fn sign_name(sign: CorrelationSign) -> &'static str {
    match sign {
        CorrelationSign::Anticorrelated => "anticorrelated",
        CorrelationSign::Correlated => "correlated",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub violated: bool,
    pub inputs: Vec<(String, f64)>,
    pub source: String,
}

impl InequalityReport {
    fn new(name: &str, lhs: f64, bound: f64, inputs: Vec<(String, f64)>, source: &CorrelationSource) -> Self {
        let margin = lhs - bound;
        InequalityReport {
            name: name.to_string(),
            lhs,
            bound,
            margin,
            violated: margin > VIOLATION_TOLERANCE,
            inputs,
            source: source.describe(),
        }
    }
}

impl fmt::Display for InequalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: lhs = {:.6}, bound = {:.6}, margin = {:+.6} ({})",
            self.name,
            self.lhs,
            self.bound,
            self.margin,
            if self.violated { "violated" } else { "holds" }
        )
    }
}

fn named(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Bell's original inequality `|E(δ,γ) − E(δ,γ′)| ∓ E(γ,γ′) ≤ 1`.
///
/// The third term needs particle D's analyzer set to `γ`.
pub fn bell_d1(
    source: &CorrelationSource,
    delta: f64,
    gamma: f64,
    gamma_prime: f64,
    sign: CorrelationSign,
) -> Result<InequalityReport> {
    let e1 = source.correlation(delta, gamma)?;
    let e2 = source.correlation(delta, gamma_prime)?;
    let e3 = source.correlation(gamma, gamma_prime)?;
    let lhs = (e1 - e2).abs() + f64::from(sign.factor()) * e3;
    Ok(InequalityReport::new(
        "bell_d1",
        lhs,
        1.0,
        named(&[("delta", delta), ("gamma", gamma), ("gamma_prime", gamma_prime)]),
        source,
    ))
}

/// The four analyzer angles of a CHSH experiment, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub delta: f64,
    pub delta_prime: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
}

impl ChshAngles {
    pub fn new(delta: f64, delta_prime: f64, gamma: f64, gamma_prime: f64) -> Self {
        ChshAngles {
            delta,
            delta_prime,
            gamma,
            gamma_prime,
        }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        ChshAngles::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.delta, self.delta_prime, self.gamma, self.gamma_prime]
    }

    /// Setting pairs in `(δ,γ), (δ,γ′), (δ′,γ), (δ′,γ′)` order.
    pub fn pairs(self) -> [(f64, f64); 4] {
        [
            (self.delta, self.gamma),
            (self.delta, self.gamma_prime),
            (self.delta_prime, self.gamma),
            (self.delta_prime, self.gamma_prime),
        ]
    }

    fn inputs(self) -> Vec<(String, f64)> {
        named(&[
            ("delta", self.delta),
            ("delta_prime", self.delta_prime),
            ("gamma", self.gamma),
            ("gamma_prime", self.gamma_prime),
        ])
    }
}

/// Correlations at the four CHSH setting pairs.
fn chsh_correlations(source: &CorrelationSource, angles: ChshAngles) -> Result<[f64; 4]> {
    let p = angles.pairs();
    Ok([
        source.correlation(p[0].0, p[0].1)?,
        source.correlation(p[1].0, p[1].1)?,
        source.correlation(p[2].0, p[2].1)?,
        source.correlation(p[3].0, p[3].1)?,
    ])
}

/// `⟨S⟩ = E(δ,γ) + E(δ,γ′) + E(δ′,γ) − E(δ′,γ′)`.
pub fn chsh_s(source: &CorrelationSource, angles: ChshAngles) -> Result<f64> {
    let e = chsh_correlations(source, angles)?;
    Ok(e[0] + e[1] + e[2] - e[3])
}

/// `|⟨S⟩| ≤ 2`.
pub fn chsh_d4(source: &CorrelationSource, angles: ChshAngles) -> Result<InequalityReport> {
    let s = chsh_s(source, angles)?;
    Ok(InequalityReport::new("chsh_d4", s.abs(), 2.0, angles.inputs(), source))
}

/// `|E(δ,γ) − E(δ,γ′)| ± E(δ′,γ′) + E(δ′,γ) ≤ 1 ± 1`, with the lower sign
/// for anticorrelated systems.
pub fn chsh_d2(
    source: &CorrelationSource,
    angles: ChshAngles,
    sign: CorrelationSign,
) -> Result<InequalityReport> {
    let e = chsh_correlations(source, angles)?;
    let c = f64::from(sign.factor());
    let lhs = (e[0] - e[1]).abs() + c * e[3] + e[2];
    Ok(InequalityReport::new("chsh_d2", lhs, 1.0 + c, angles.inputs(), source))
}

/// `|E(δ,γ) − E(δ,γ′)| + E(δ′,γ′) + E(δ′,γ) ≤ 2`, valid for both signs.
pub fn chsh_d3(source: &CorrelationSource, angles: ChshAngles) -> Result<InequalityReport> {
    let e = chsh_correlations(source, angles)?;
    let lhs = (e[0] - e[1]).abs() + e[3] + e[2];
    Ok(InequalityReport::new("chsh_d3", lhs, 2.0, angles.inputs(), source))
}

/// The three probabilities entering Wigner's inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WignerProbabilities {
    /// `P(d_ϑ₃ = −, g_ϑ₂ = +)`
    pub lhs: f64,
    /// `P(d_ϑ₁ = +, g_ϑ₂ = +)`
    pub first: f64,
    /// `P(d_ϑ₁ = −, g_ϑ₃ = ∓)`, upper sign for anticorrelated systems
    pub second: f64,
}

impl WignerProbabilities {
    pub fn rhs(&self) -> f64 {
        self.first + self.second
    }
}

/// Reads the three Wigner probabilities from a source's joint distributions.
pub fn wigner_probabilities(
    source: &CorrelationSource,
    sign: CorrelationSign,
    theta1: f64,
    theta2: f64,
    theta3: f64,
) -> Result<WignerProbabilities> {
    let g3 = if sign == CorrelationSign::Anticorrelated {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    Ok(WignerProbabilities {
        lhs: source.joint(theta3, theta2)?.get(Outcome::Minus, Outcome::Plus),
        first: source.joint(theta1, theta2)?.get(Outcome::Plus, Outcome::Plus),
        second: source.joint(theta1, theta3)?.get(Outcome::Minus, g3),
    })
}

fn wigner_report(
    probs: WignerProbabilities,
    angles: [f64; 3],
    source: &CorrelationSource,
) -> InequalityReport {
    let mut inputs = named(&[
        ("theta1", angles[0]),
        ("theta2", angles[1]),
        ("theta3", angles[2]),
    ]);
    inputs.push(("p_first".into(), probs.first));
    inputs.push(("p_second".into(), probs.second));
    InequalityReport::new("wigner", probs.lhs, probs.rhs(), inputs, source)
}

/// Wigner's inequality: the `lhs` probability never exceeds the sum of the
/// other two for any sextet mixture.
pub fn wigner_check(
    source: &CorrelationSource,
    sign: CorrelationSign,
    theta1: f64,
    theta2: f64,
    theta3: f64,
) -> Result<InequalityReport> {
    let probs = wigner_probabilities(source, sign, theta1, theta2, theta3)?;
    Ok(wigner_report(probs, [theta1, theta2, theta3], source))
}

/// One hypothetical joint assignment of outcomes at all four CHSH settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quartet {
    pub d_delta: Outcome,
    pub g_gamma: Outcome,
    pub d_delta_prime: Outcome,
    pub g_gamma_prime: Outcome,
    pub s_value: i32,
}

impl Quartet {
    pub fn new(d_delta: Outcome, g_gamma: Outcome, d_delta_prime: Outcome, g_gamma_prime: Outcome) -> Self {
        let (d, g, dp, gp) = (
            d_delta.value(),
            g_gamma.value(),
            d_delta_prime.value(),
            g_gamma_prime.value(),
        );
        Quartet {
            d_delta,
            g_gamma,
            d_delta_prime,
            g_gamma_prime,
            s_value: d * g + d * gp + dp * g - dp * gp,
        }
    }

    pub fn outcomes(&self) -> [Outcome; 4] {
        [self.d_delta, self.g_gamma, self.d_delta_prime, self.g_gamma_prime]
    }
}

fn bit_outcome(index: usize, bit: u32) -> Outcome {
    if index >> bit & 1 == 0 {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// All 16 quartets, `+1` before `−1` with `d_δ` varying slowest.
pub fn enumerate_quartets() -> Vec<Quartet> {
    (0..16)
        .map(|i| Quartet::new(bit_outcome(i, 3), bit_outcome(i, 2), bit_outcome(i, 1), bit_outcome(i, 0)))
        .collect()
}

/// `⟨S⟩` of a probability mixture over the quartets.
pub fn quartet_mixture_s(weights: &[f64]) -> Result<f64> {
    if weights.len() != 16 {
        return Err(Error::InvalidDistribution(format!(
            "expected 16 weights, got {}",
            weights.len()
        )));
    }
    validate_distribution(weights)?;
    Ok(enumerate_quartets()
        .iter()
        .zip(weights)
        .map(|(q, w)| w * f64::from(q.s_value))
        .sum())
}

/// Outcomes at `ϑ₁, ϑ₂, ϑ₃` for both particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sextet {
    pub d: [Outcome; 3],
    pub g: [Outcome; 3],
    pub sign: CorrelationSign,
}

impl Sextet {
    /// Completes `d` with the G outcomes forced by strict (anti)correlation.
    pub fn from_d(d: [Outcome; 3], sign: CorrelationSign) -> Self {
        let g = d.map(|o| match sign {
            CorrelationSign::Anticorrelated => o.flipped(),
            CorrelationSign::Correlated => o,
        });
        Sextet { d, g, sign }
    }

    pub fn is_consistent(&self) -> bool {
        (0..3).all(|j| self.d[j].value() == self.sign.factor() * self.g[j].value())
    }
}

/// The 8 sextets allowed by strict (anti)correlation, `d_ϑ₁` slowest.
pub fn enumerate_sextets(sign: CorrelationSign) -> Vec<Sextet> {
    (0..8)
        .map(|i| Sextet::from_d([bit_outcome(i, 2), bit_outcome(i, 1), bit_outcome(i, 0)], sign))
        .collect()
}

/// A sextet pattern: `None` is a wildcard.
pub type SextetPattern = ([Option<Outcome>; 3], [Option<Outcome>; 3]);

pub fn matches_pattern(s: &Sextet, pattern: &SextetPattern) -> bool {
    let ok = |v: &[Outcome; 3], p: &[Option<Outcome>; 3]| {
        v.iter().zip(p).all(|(o, p)| p.is_none_or(|p| p == *o))
    };
    ok(&s.d, &pattern.0) && ok(&s.g, &pattern.1)
}

/// Total weight of sextets matching `pattern`.
pub fn pattern_probability(weights: &[f64], sign: CorrelationSign, pattern: &SextetPattern) -> f64 {
    enumerate_sextets(sign)
        .iter()
        .zip(weights)
        .filter(|(s, _)| matches_pattern(s, pattern))
        .map(|(_, w)| w)
        .sum()
}

/// The patterns of the three Wigner probabilities, in
/// [`WignerProbabilities`] field order. Measured entries are fixed; entries
/// forced by (anti)correlation are filled in; the rest are wildcards.
pub fn wigner_patterns(sign: CorrelationSign) -> [SextetPattern; 3] {
    let c = |o: Outcome| match sign {
        CorrelationSign::Anticorrelated => o.flipped(),
        CorrelationSign::Correlated => o,
    };
    let (p, m) = (Outcome::Plus, Outcome::Minus);
    let g3 = c(m);
    [
        ([None, Some(c(p)), Some(m)], [None, Some(p), Some(c(m))]),
        ([Some(p), Some(c(p)), None], [Some(c(p)), Some(p), None]),
        ([Some(m), None, Some(c(g3))], [Some(c(m)), None, Some(g3)]),
    ]
}

/// Wigner probabilities of a sextet mixture, by summing matching patterns.
pub fn sextet_mixture_probabilities(weights: &[f64], sign: CorrelationSign) -> Result<WignerProbabilities> {
    if weights.len() != 8 {
        return Err(Error::InvalidDistribution(format!(
            "expected 8 weights, got {}",
            weights.len()
        )));
    }
    validate_distribution(weights)?;
    let [lhs, first, second] = wigner_patterns(sign).map(|p| pattern_probability(weights, sign, &p));
    Ok(WignerProbabilities { lhs, first, second })
}

/// Wigner check evaluated directly on sextet-mixture weights.
pub fn wigner_check_mixture(weights: &[f64; 8], sign: CorrelationSign) -> Result<InequalityReport> {
    let probs = sextet_mixture_probabilities(weights, sign)?;
    let source = CorrelationSource::SextetMixture {
        sign,
        weights: *weights,
        angles: [0.0, 1.0, 2.0],
    };
    Ok(wigner_report(probs, [f64::NAN; 3], &source))
}
