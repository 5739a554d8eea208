//! von Neumann and Tsallis entropies of bipartite states.
//!
//! Matrix functions are evaluated on the spectrum: with eigenvalues `p_i`,
//! `S = −Σ p ln p` and `S_q = −Tr ρ ln_q ρ = (1 − Σ p^q)/(q − 1)`, where
//! the trace is taken against `(ρ^(q−1) − I)/(q − 1)`, which tends to `ln ρ` as q → 1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{partial_trace, purity, DensityMatrix, Subsystem};

/// Within this distance of 1 the Tsallis entropy is the von Neumann entropy.
pub const Q_ONE_WINDOW: f64 = 1e-6;

pub fn von_neumann_from_spectrum(spectrum: &[f64]) -> f64 {
    -spectrum
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

pub fn tsallis_from_spectrum(spectrum: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::NonPositiveQ(q));
    }
    if (q - 1.0).abs() < Q_ONE_WINDOW {
        return Ok(von_neumann_from_spectrum(spectrum));
    }
    let power_sum: f64 = spectrum
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p.powf(q))
        .sum();
    Ok((1.0 - power_sum) / (q - 1.0))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    von_neumann_from_spectrum(&rho.eigenvalues())
}

pub fn tsallis_entropy(rho: &DensityMatrix, q: f64) -> Result<f64> {
    tsallis_from_spectrum(&rho.eigenvalues(), q)
}

/// Entropies of a bipartite state and its two marginals at one q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub q: f64,
    pub s_joint: f64,
    pub s_1: f64,
    pub s_2: f64,
    /// `S(ρ1) + S(ρ2) − S(ρ12)`.
    pub mutual_info: f64,
    /// Same as `mutual_info`; non-negative when subadditivity holds.
    pub subadditivity_margin: f64,
    pub purity: f64,
    pub temperature: Option<f64>,
}

impl EntropyReport {
    pub fn is_subadditive(&self, tol: f64) -> bool {
        self.subadditivity_margin >= -tol
    }
}

/// Spectra of a bipartite state and its marginals, reusable across q.
#[derive(Debug, Clone)]
pub struct BipartiteSpectra {
    pub joint: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub purity: f64,
    pub temperature: Option<f64>,
}

impl BipartiteSpectra {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let first = partial_trace(rho, Subsystem::First)?;
        let second = partial_trace(rho, Subsystem::Second)?;
        Ok(Self {
            joint: rho.eigenvalues(),
            first: first.eigenvalues(),
            second: second.eigenvalues(),
            purity: purity(rho),
            temperature: rho.temperature(),
        })
    }

    pub fn report(&self, q: f64) -> Result<EntropyReport> {
        let s_joint = tsallis_from_spectrum(&self.joint, q)?;
        let s_1 = tsallis_from_spectrum(&self.first, q)?;
        let s_2 = tsallis_from_spectrum(&self.second, q)?;
        let margin = s_1 + s_2 - s_joint;
        Ok(EntropyReport {
            q,
            s_joint,
            s_1,
            s_2,
            mutual_info: margin,
            subadditivity_margin: margin,
            purity: self.purity,
            temperature: self.temperature,
        })
    }
}

pub fn analyze_bipartite(rho: &DensityMatrix, q: f64) -> Result<EntropyReport> {
    if !(q > 0.0) {
        return Err(Error::NonPositiveQ(q));
    }
    BipartiteSpectra::new(rho)?.report(q)
}
