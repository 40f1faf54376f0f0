//! Expressibility: KL divergence between a circuit's pairwise state-fidelity
//! distribution and the fidelity distribution of Haar-random states.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{CircuitError, ParameterizedCircuit};
use crate::gates::GateKind;
use crate::noise::NoiseModel;
use crate::state::{fidelity, StateError};

pub const DEFAULT_SAMPLES: usize = 5000;
pub const DEFAULT_BINS: usize = 75;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpressibilityError {
    #[error("fidelity {0} outside [0, 1]")]
    Fidelity(f64),
    #[error("Hilbert dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("r1 = {r1} must lie in [-1, 1] and r2 = {r2} in [0, 1]")]
    AngleDraw { r1: f64, r2: f64 },
    #[error("sample count must be positive")]
    Samples,
    #[error("bin count must be positive")]
    Bins,
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// `(N - 1)(1 - F)^(N - 2)`.
pub fn haar_pdf(f: f64, dim: usize) -> Result<f64, ExpressibilityError> {
    if !(0.0..=1.0).contains(&f) {
        return Err(ExpressibilityError::Fidelity(f));
    }
    if dim < 2 {
        return Err(ExpressibilityError::Dimension(dim));
    }
    let n = dim as f64;
    Ok((n - 1.0) * (1.0 - f).powi(dim as i32 - 2))
}

/// Haar probability of each of `bins` equal-width fidelity bins, from the
/// exact CDF `1 - (1 - F)^(N - 1)`.
pub fn haar_bin_masses(bins: usize, dim: usize) -> Result<Vec<f64>, ExpressibilityError> {
    if bins == 0 {
        return Err(ExpressibilityError::Bins);
    }
    if dim < 2 {
        return Err(ExpressibilityError::Dimension(dim));
    }
    let survival = |f: f64| (1.0 - f).powi(dim as i32 - 1);
    Ok((0..bins)
        .map(|i| {
            let lo = i as f64 / bins as f64;
            let hi = (i + 1) as f64 / bins as f64;
            survival(lo) - survival(hi)
        })
        .collect())
}

/// `arccos(r1) + pi * H(0.5 - r2)` with the step `H(0) = 1`; lies in `[0, 2 pi]`.
pub fn nonuniform_angle(r1: f64, r2: f64) -> Result<f64, ExpressibilityError> {
    if !((-1.0..=1.0).contains(&r1) && (0.0..=1.0).contains(&r2)) {
        return Err(ExpressibilityError::AngleDraw { r1, r2 });
    }
    let step = if 0.5 - r2 >= 0.0 { 1.0 } else { 0.0 };
    Ok(r1.acos() + std::f64::consts::PI * step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Every parameter uniform in `[-pi, pi)`.
    Uniform,
    /// RZ parameters from [`nonuniform_angle`], all others uniform.
    Nonuniform,
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampler::Uniform => "uniform",
            Sampler::Nonuniform => "nonuniform",
        })
    }
}

impl std::str::FromStr for Sampler {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Sampler::Uniform),
            "nonuniform" => Ok(Sampler::Nonuniform),
            other => Err(format!("unknown sampler `{other}` (uniform|nonuniform)")),
        }
    }
}

fn draw_parameters(rng: &mut ChaCha8Rng, sampler: Sampler, rz_slot: &[bool]) -> Vec<f64> {
    use std::f64::consts::PI;
    rz_slot
        .iter()
        .map(|&is_rz| {
            if sampler == Sampler::Nonuniform && is_rz {
                let r1 = rng.random_range(-1.0..=1.0);
                let r2 = rng.random::<f64>();
                nonuniform_angle(r1, r2).expect("draws are in range")
            } else {
                rng.random_range(-PI..PI)
            }
        })
        .collect()
}

/// `samples` fidelities between the states of two independent parameter
/// draws. Repetition `i` uses RNG stream `i` of `seed`, so the result does
/// not depend on thread scheduling.
pub fn sample_fidelities(
    circuit: &ParameterizedCircuit,
    samples: usize,
    sampler: Sampler,
    noise: Option<&NoiseModel>,
    seed: u64,
) -> Result<Vec<f64>, ExpressibilityError> {
    if samples == 0 {
        return Err(ExpressibilityError::Samples);
    }
    let mut rz_slot = vec![false; circuit.n_parameters()];
    for s in circuit.slots_for(GateKind::RZ) {
        rz_slot[s] = true;
    }
    (0..samples)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let theta = draw_parameters(&mut rng, sampler, &rz_slot);
            let phi = draw_parameters(&mut rng, sampler, &rz_slot);
            let f = match noise {
                None => fidelity(
                    &circuit.simulate_ideal(&theta)?,
                    &circuit.simulate_ideal(&phi)?,
                )?,
                Some(model) => fidelity(
                    &circuit.simulate_noisy(&theta, model)?,
                    &circuit.simulate_noisy(&phi, model)?,
                )?,
            };
            Ok(f)
        })
        .collect()
}

/// Counts over equal-width bins on `[0, 1]`; `F = 1` falls in the last bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FidelityHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl FidelityHistogram {
    pub fn new(bins: usize) -> Result<Self, ExpressibilityError> {
        if bins == 0 {
            return Err(ExpressibilityError::Bins);
        }
        Ok(Self {
            counts: vec![0; bins],
            total: 0,
        })
    }

    pub fn from_fidelities(fidelities: &[f64], bins: usize) -> Result<Self, ExpressibilityError> {
        let mut h = Self::new(bins)?;
        for &f in fidelities {
            h.add(f)?;
        }
        Ok(h)
    }

    pub fn from_counts(counts: Vec<u64>) -> Result<Self, ExpressibilityError> {
        if counts.is_empty() {
            return Err(ExpressibilityError::Bins);
        }
        let total = counts.iter().sum();
        Ok(Self { counts, total })
    }

    /// Values within 1e-9 outside `[0, 1]` are treated as round-off and
    /// clamped.
    pub fn add(&mut self, f: f64) -> Result<(), ExpressibilityError> {
        if !(-1e-9..=1.0 + 1e-9).contains(&f) {
            return Err(ExpressibilityError::Fidelity(f));
        }
        let bins = self.counts.len();
        let index = ((f.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        self.counts[index] += 1;
        self.total += 1;
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn edges(&self) -> Vec<f64> {
        let bins = self.bins();
        (0..=bins).map(|i| i as f64 / bins as f64).collect()
    }
}

/// `sum_i P_i ln(P_i / Q_i)` against the Haar bin masses for dimension
/// `dim`; empty bins contribute zero.
pub fn kl_divergence(hist: &FidelityHistogram, dim: usize) -> Result<f64, ExpressibilityError> {
    if hist.total() == 0 {
        return Err(ExpressibilityError::EmptyHistogram);
    }
    let q = haar_bin_masses(hist.bins(), dim)?;
    let total = hist.total() as f64;
    let kl: f64 = hist
        .counts()
        .iter()
        .zip(&q)
        .filter(|(c, _)| **c > 0)
        .map(|(c, qi)| {
            let p = *c as f64 / total;
            p * (p / qi).ln()
        })
        .sum();
    Ok(kl)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Ideal,
    Noisy(String),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Ideal => f.write_str("ideal"),
            Mode::Noisy(name) => write!(f, "noisy:{name}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpressibilitySettings {
    pub samples: usize,
    pub bins: usize,
    pub sampler: Sampler,
    pub seed: u64,
}

impl Default for ExpressibilitySettings {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            bins: DEFAULT_BINS,
            sampler: Sampler::Uniform,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpressibilityResult {
    pub label: String,
    pub mode: Mode,
    pub sampler: Sampler,
    pub samples: usize,
    /// KL divergence in nats.
    pub value: f64,
    pub histogram: FidelityHistogram,
}

impl ExpressibilityResult {
    /// `label,mode,sampler,samples,bins,value`
    pub fn summary_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6}",
            self.label,
            self.mode,
            self.sampler,
            self.samples,
            self.histogram.bins(),
            self.value
        )
    }
}

pub fn estimate_expressibility(
    circuit: &ParameterizedCircuit,
    settings: &ExpressibilitySettings,
    noise: Option<&NoiseModel>,
) -> Result<ExpressibilityResult, ExpressibilityError> {
    if settings.bins == 0 {
        return Err(ExpressibilityError::Bins);
    }
    let fidelities = sample_fidelities(
        circuit,
        settings.samples,
        settings.sampler,
        noise,
        settings.seed,
    )?;
    let histogram = FidelityHistogram::from_fidelities(&fidelities, settings.bins)?;
    let value = kl_divergence(&histogram, 1 << circuit.n_qubits())?;
    Ok(ExpressibilityResult {
        label: circuit.label().to_string(),
        mode: noise.map_or(Mode::Ideal, |m| Mode::Noisy(m.name().to_string())),
        sampler: settings.sampler,
        samples: settings.samples,
        value,
        histogram,
    })
}
