//! Entangled two-particle states and their Born-rule statistics.
//!
//! Outcomes are encoded as `+1` (spin up, vertical polarization) and `-1`
//! (spin down, horizontal polarization). Amplitudes are stored over the
//! ordered product basis `(+,+), (+,-), (-,+), (-,-)` where the first factor
//! belongs to particle D and the second to particle G.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Tolerance for exact-math assertions on states and distributions.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParticleKind {
    /// Analyzer angle `θ` rotates the measurement basis by `θ/2`.
    SpinHalf,
    /// Analyzer angle `θ` rotates the measurement basis by `θ`.
    Photon,
}

/// Whether equal-angle measurements give opposite or equal outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationSign {
    Anticorrelated,
    Correlated,
}

impl CorrelationSign {
    /// `+1` for correlated, `-1` for anticorrelated systems: the factor `s`
    /// in `d = s·g` at equal angles.
    pub fn factor(self) -> i32 {
        match self {
            CorrelationSign::Anticorrelated => -1,
            CorrelationSign::Correlated => 1,
        }
    }
}

impl FromStr for CorrelationSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "anticorrelated" => Ok(CorrelationSign::Anticorrelated),
            "correlated" => Ok(CorrelationSign::Correlated),
            other => Err(Error::InvalidArgument(format!(
                "unknown sign `{other}` (expected anticorrelated or correlated)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    SpinAnticorrelated,
    SpinCorrelated,
    PhotonCorrelated,
    PhotonAnticorrelated,
}

impl StateKind {
    pub const ALL: [StateKind; 4] = [
        StateKind::SpinAnticorrelated,
        StateKind::SpinCorrelated,
        StateKind::PhotonCorrelated,
        StateKind::PhotonAnticorrelated,
    ];

    pub fn particle(self) -> ParticleKind {
        match self {
            StateKind::SpinAnticorrelated | StateKind::SpinCorrelated => ParticleKind::SpinHalf,
            StateKind::PhotonCorrelated | StateKind::PhotonAnticorrelated => ParticleKind::Photon,
        }
    }

    pub fn sign(self) -> CorrelationSign {
        match self {
            StateKind::SpinAnticorrelated | StateKind::PhotonAnticorrelated => {
                CorrelationSign::Anticorrelated
            }
            StateKind::SpinCorrelated | StateKind::PhotonCorrelated => CorrelationSign::Correlated,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StateKind::SpinAnticorrelated => "spin-anticorrelated",
            StateKind::SpinCorrelated => "spin-correlated",
            StateKind::PhotonCorrelated => "photon-correlated",
            StateKind::PhotonAnticorrelated => "photon-anticorrelated",
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown state `{s}`")))
    }
}

/// A single measurement result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i32 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    /// `+1` for non-negative input, `-1` otherwise.
    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl TryFrom<i64> for Outcome {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            _ => Err(Error::InvalidArgument(
                "outcome must be +1 or -1".to_string(),
            )),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        })
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i32(self.value())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Outcome::try_from(v).map_err(serde::de::Error::custom)
    }
}

/// Probabilities of the four outcome pairs `(d, g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
}

impl JointDistribution {
    pub fn get(&self, d: Outcome, g: Outcome) -> f64 {
        match (d, g) {
            (Outcome::Plus, Outcome::Plus) => self.p_pp,
            (Outcome::Plus, Outcome::Minus) => self.p_pm,
            (Outcome::Minus, Outcome::Plus) => self.p_mp,
            (Outcome::Minus, Outcome::Minus) => self.p_mm,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_pp + self.p_pm + self.p_mp + self.p_mm
    }

    /// Expectation of the outcome product.
    pub fn correlation(&self) -> f64 {
        self.p_pp + self.p_mm - self.p_mp - self.p_pm
    }

    /// Probability that particle D yields `+1`.
    pub fn marginal_d_plus(&self) -> f64 {
        self.p_pp + self.p_pm
    }

    /// Probability that particle G yields `+1`.
    pub fn marginal_g_plus(&self) -> f64 {
        self.p_pp + self.p_mp
    }

    /// Entries in `(+,+), (+,-), (-,+), (-,-)` order.
    pub fn as_array(&self) -> [f64; 4] {
        [self.p_pp, self.p_pm, self.p_mp, self.p_mm]
    }
}

/// Measurement basis of one analyzer: eigenvectors for outcomes `+1` and `-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerBasis {
    pub plus: [f64; 2],
    pub minus: [f64; 2],
}

impl AnalyzerBasis {
    pub fn vector(&self, outcome: Outcome) -> [f64; 2] {
        match outcome {
            Outcome::Plus => self.plus,
            Outcome::Minus => self.minus,
        }
    }
}

/// Real rotation of the `(+, -)` basis for an analyzer at `angle` radians.
pub fn analyzer_basis(particle: ParticleKind, angle: f64) -> AnalyzerBasis {
    let phi = match particle {
        ParticleKind::SpinHalf => angle / 2.0,
        ParticleKind::Photon => angle,
    };
    let (s, c) = phi.sin_cos();
    AnalyzerBasis {
        plus: [c, s],
        minus: [-s, c],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledState {
    pub kind: StateKind,
    pub particle: ParticleKind,
    pub amplitudes: [Complex64; 4],
}

/// Builds one of the four maximally entangled states.
///
/// Anticorrelated states carry a relative phase of `-1` between their two
/// terms, so that the correlation depends only on the angle difference.
pub fn make_state(kind: StateKind) -> EntangledState {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let amplitudes = match kind.sign() {
        CorrelationSign::Correlated => [h, z, z, h],
        CorrelationSign::Anticorrelated => [z, h, -h, z],
    };
    EntangledState {
        kind,
        particle: kind.particle(),
        amplitudes,
    }
}

impl EntangledState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Joint outcome probabilities with particle D at `delta` and G at `gamma`.
    pub fn joint_distribution(&self, delta: f64, gamma: f64) -> JointDistribution {
        joint_distribution(self, delta, gamma)
    }

    pub fn correlation(&self, delta: f64, gamma: f64) -> f64 {
        correlation(self, delta, gamma)
    }
}

fn projection(state: &EntangledState, d: [f64; 2], g: [f64; 2]) -> Complex64 {
    let a = &state.amplitudes;
    a[0] * (d[0] * g[0]) + a[1] * (d[0] * g[1]) + a[2] * (d[1] * g[0]) + a[3] * (d[1] * g[1])
}

/// Born-rule probabilities of the four outcome pairs.
pub fn joint_distribution(state: &EntangledState, delta: f64, gamma: f64) -> JointDistribution {
    let bd = analyzer_basis(state.particle, delta);
    let bg = analyzer_basis(state.particle, gamma);
    let p = |d: Outcome, g: Outcome| projection(state, bd.vector(d), bg.vector(g)).norm_sqr();
    JointDistribution {
        p_pp: p(Outcome::Plus, Outcome::Plus),
        p_pm: p(Outcome::Plus, Outcome::Minus),
        p_mp: p(Outcome::Minus, Outcome::Plus),
        p_mm: p(Outcome::Minus, Outcome::Minus),
    }
}

/// Correlation function `⟨d·g⟩` from the Born-rule distribution.
pub fn correlation(state: &EntangledState, delta: f64, gamma: f64) -> f64 {
    joint_distribution(state, delta, gamma).correlation()
}

/// Analytic correlation: `∓cos(γ−δ)` for spins, `±cos 2(γ−δ)` for photons.
pub fn closed_form_correlation(kind: StateKind, delta: f64, gamma: f64) -> f64 {
    let diff = gamma - delta;
    let magnitude = match kind.particle() {
        ParticleKind::SpinHalf => diff.cos(),
        ParticleKind::Photon => (2.0 * diff).cos(),
    };
    f64::from(kind.sign().factor()) * magnitude
}
