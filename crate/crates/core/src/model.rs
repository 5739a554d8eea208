//! Two inductively coupled LC circuits as a pair of harmonic oscillators.
//!
//! Everything is dimensionless with ħ = k_B = m = ω₁ = 1, so the second
//! circuit has frequency λ and the coupling enters the potential as
//!
//! ```text
//! V = ½ x₁² + ½ λ² x₂² + g λ x₁ x₂
//! ```
//!
//! A rotation of the coordinates by φ removes the cross term and yields two
//! independent normal modes Ω₁, Ω₂. Ω₁ is always the mode that goes to 1 as
//! g → 0, regardless of which frequency is larger.

use crate::error::{Error, Result};

/// Above this |φ| the small-angle expansion is flagged as unreliable.
pub const SMALL_ANGLE_LIMIT: f64 = 0.3;

/// Relative tolerance for `g = L12 / sqrt(L1 L2)`.
const INDUCTANCE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inductances {
    pub l1: f64,
    pub l2: f64,
    pub l12: f64,
}

impl Inductances {
    pub fn coupling(&self) -> f64 {
        self.l12 / (self.l1 * self.l2).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    lambda: f64,
    g: f64,
    inductances: Option<Inductances>,
}

impl CircuitParams {
    /// Validates `lambda > 0` and mechanical stability. The potential matrix
    /// `[[1, gλ], [gλ, λ²]]` has trace `1 + λ²` and determinant `λ²(1 − g²)`,
    /// so both exact squared frequencies are positive iff `|g| < 1`.
    pub fn new(lambda: f64, g: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "lambda",
                reason: format!("must be positive and finite, got {lambda}"),
            });
        }
        if !g.is_finite() {
            return Err(Error::InvalidParameter {
                field: "g",
                reason: format!("must be finite, got {g}"),
            });
        }
        let (w1, w2) = potential_eigenvalues(lambda, g);
        if w1 <= 0.0 {
            return Err(Error::UnstableMode {
                mode: 1,
                omega_sq: w1,
            });
        }
        if w2 <= 0.0 {
            return Err(Error::UnstableMode {
                mode: 2,
                omega_sq: w2,
            });
        }
        Ok(Self {
            lambda,
            g,
            inductances: None,
        })
    }

    /// Builds parameters from physical inductances, deriving g.
    pub fn from_inductances(lambda: f64, inductances: Inductances) -> Result<Self> {
        let Inductances { l1, l2, l12 } = inductances;
        if !(l1 > 0.0 && l2 > 0.0) || !l12.is_finite() {
            return Err(Error::InvalidParameter {
                field: "inductances",
                reason: format!("need L1, L2 > 0 and finite L12, got ({l1}, {l2}, {l12})"),
            });
        }
        let mut params = Self::new(lambda, inductances.coupling())?;
        params.inductances = Some(inductances);
        Ok(params)
    }

    /// Attaches inductances to an existing (lambda, g) pair, checking that they
    /// reproduce g.
    pub fn with_inductances(self, inductances: Inductances) -> Result<Self> {
        let derived = inductances.coupling();
        let scale = self.g.abs().max(derived.abs()).max(f64::MIN_POSITIVE);
        if (derived - self.g).abs() > INDUCTANCE_REL_TOL * scale {
            return Err(Error::InvalidParameter {
                field: "g",
                reason: format!("inductances give g = {derived}, expected {}", self.g),
            });
        }
        Ok(Self {
            inductances: Some(inductances),
            ..self
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn inductances(&self) -> Option<Inductances> {
        self.inductances
    }

    /// Length scale of the uncoupled second oscillator, `sqrt(1/λ)`.
    pub fn length_scale(&self) -> f64 {
        self.lambda.recip().sqrt()
    }
}

/// Eigenvalues of `[[1, gλ], [gλ, λ²]]`, ordered as (mode 1, mode 2) by
/// continuity with (1, λ²) at g = 0.
pub fn potential_eigenvalues(lambda: f64, g: f64) -> (f64, f64) {
    let l2 = lambda * lambda;
    let mean = 0.5 * (1.0 + l2);
    let half_gap = (0.25 * (l2 - 1.0).powi(2) + g * g * l2).sqrt();
    let (lo, hi) = (mean - half_gap, mean + half_gap);
    if lambda >= 1.0 {
        (lo, hi)
    } else {
        (hi, lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeMethod {
    SmallAngle,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModes {
    pub phi: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub method: ModeMethod,
}

impl NormalModes {
    /// True when a small-angle result lies outside the regime where the
    /// expansion can be trusted.
    pub fn regime_warning(&self) -> bool {
        self.method == ModeMethod::SmallAngle && self.phi.abs() >= SMALL_ANGLE_LIMIT
    }

    /// (cos φ, sin φ) as used by the coordinate substitution. The small-angle
    /// method linearises to (1, φ).
    pub fn rotation(&self) -> (f64, f64) {
        match self.method {
            ModeMethod::SmallAngle => (1.0, self.phi),
            ModeMethod::Exact => (self.phi.cos(), self.phi.sin()),
        }
    }
}

/// `φ ≈ gλ/(λ² − 1)`.
pub fn rotation_angle_small(params: &CircuitParams) -> Result<f64> {
    let l = params.lambda;
    let denom = l * l - 1.0;
    if denom == 0.0 {
        return Err(Error::DegenerateFrequencies);
    }
    Ok(params.g * l / denom)
}

/// Solves `tan 2φ = 2gλ/(λ² − 1)` on the branch where φ → 0 as g → 0.
/// For λ = 1 and g ≠ 0 the modes are fully mixed and |φ| = π/4.
pub fn rotation_angle_exact(params: &CircuitParams) -> f64 {
    let (l, g) = (params.lambda, params.g);
    if g == 0.0 {
        return 0.0;
    }
    let num = 2.0 * g * l;
    let den = l * l - 1.0;
    if den >= 0.0 {
        0.5 * num.atan2(den)
    } else {
        0.5 * (-num).atan2(-den)
    }
}

/// Squared frequencies of the rotated modes for an arbitrary angle.
pub fn general_angle_frequencies_sq(params: &CircuitParams, phi: f64) -> (f64, f64) {
    let (l, g) = (params.lambda, params.g);
    let (s, c) = phi.sin_cos();
    let w1 = l * l * s * s + c * c - 2.0 * g * l * s * c;
    let w2 = s * s + l * l * c * c + 2.0 * g * l * s * c;
    (w1, w2)
}

/// Squared frequencies from the small-angle expansion, as printed.
pub fn small_angle_frequencies_sq(params: &CircuitParams, phi: f64) -> (f64, f64) {
    let (l, g) = (params.lambda, params.g);
    let w1 = 1.0 - 2.0 * g * l * phi + l * l * phi * phi;
    let w2 = phi * phi + l * l + 2.0 * g * l * phi;
    (w1, w2)
}

pub fn normal_modes(params: &CircuitParams, method: ModeMethod) -> Result<NormalModes> {
    if method == ModeMethod::SmallAngle && params.lambda == 1.0 {
        return Err(Error::DegenerateFrequencies);
    }
    if params.g == 0.0 {
        return Ok(NormalModes {
            phi: 0.0,
            omega1: 1.0,
            omega2: params.lambda,
            method,
        });
    }
    let (phi, (w1, w2)) = match method {
        ModeMethod::SmallAngle => {
            let phi = rotation_angle_small(params)?;
            (phi, small_angle_frequencies_sq(params, phi))
        }
        ModeMethod::Exact => {
            let phi = rotation_angle_exact(params);
            (phi, general_angle_frequencies_sq(params, phi))
        }
    };
    if w1 <= 0.0 {
        return Err(Error::UnstableMode {
            mode: 1,
            omega_sq: w1,
        });
    }
    if w2 <= 0.0 {
        return Err(Error::UnstableMode {
            mode: 2,
            omega_sq: w2,
        });
    }
    Ok(NormalModes {
        phi,
        omega1: w1.sqrt(),
        omega2: w2.sqrt(),
        method,
    })
}
