//! Thermal density matrices over the truncated two-mode Fock basis.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::NormalModes;
use crate::transform::TransformTensor;

/// Eigenvalues down to this are treated as rounding noise and clamped to 0.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

/// Below this temperature the state is the exact ground-state projector.
pub const GROUND_STATE_TEMPERATURE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    NormalMode,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    First,
    Second,
}

/// Real symmetric, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<f64>,
    basis: Basis,
    temperature: Option<f64>,
}

impl DensityMatrix {
    /// Symmetrizes, clamps rounding-level negative eigenvalues and normalizes
    /// the trace. Fails if the matrix is not square, has non-positive trace,
    /// or has an eigenvalue below `-1e-10`.
    pub fn from_matrix(m: DMatrix<f64>, basis: Basis, temperature: Option<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity("non-finite entry".into()));
        }
        let mut sym = (&m + m.transpose()) * 0.5;
        let trace = sym.trace();
        if !(trace > 0.0) {
            return Err(Error::InvalidDensity(format!(
                "trace {trace} is not positive"
            )));
        }
        sym /= trace;
        let eig = SymmetricEigen::new(sym.clone());
        let min = eig.eigenvalues.min();
        if min < -NEGATIVE_EIGEN_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        if min < 0.0 {
            let clamped = eig.eigenvalues.map(|v| v.max(0.0));
            let d = DMatrix::from_diagonal(&clamped);
            let v = &eig.eigenvectors;
            sym = v * d * v.transpose();
            sym = (&sym + sym.transpose()) * 0.5;
            let t = sym.trace();
            sym /= t;
        }
        Ok(Self {
            entries: sym,
            basis,
            temperature,
        })
    }

    pub fn from_diagonal(diag: &[f64], basis: Basis) -> Result<Self> {
        Self::from_matrix(
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)),
            basis,
            None,
        )
    }

    /// `a ⊗ b` with the second factor's index running fastest.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        Self {
            entries: a.entries.kronecker(&b.entries),
            basis: a.basis,
            temperature: a.temperature,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Ascending eigenvalues with rounding-level negatives set to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.entries.clone());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Levels per mode if the dimension is a perfect square.
    pub fn levels_per_mode(&self) -> Result<usize> {
        let dim = self.dim();
        let d = (dim as f64).sqrt().round() as usize;
        if d * d == dim && d > 0 {
            Ok(d)
        } else {
            Err(Error::NotAProductDimension(dim))
        }
    }
}

/// Normal-mode thermal state `e^(-E_nm/T)/Z` with `E_nm = Ω1(n+½) + Ω2(m+½)`,
/// Z summed over the `d²` retained levels only.
pub fn thermal_density(modes: &NormalModes, temperature: f64, d: usize) -> Result<DensityMatrix> {
    if !(temperature > 0.0) {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    if d < 2 {
        return Err(Error::InvalidParameter {
            field: "levels",
            reason: format!("need at least 2 levels per mode, got {d}"),
        });
    }
    let dim = d * d;
    let mut pops = vec![0.0; dim];
    if temperature < GROUND_STATE_TEMPERATURE {
        pops[0] = 1.0;
    } else {
        // energies relative to E_00 so the ground weight is exactly 1
        for n in 0..d {
            for m in 0..d {
                let excess = modes.omega1 * n as f64 + modes.omega2 * m as f64;
                pops[n * d + m] = (-excess / temperature).exp();
            }
        }
        let z: f64 = pops.iter().sum();
        pops.iter_mut().for_each(|p| *p /= z);
    }
    Ok(DensityMatrix {
        entries: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(pops)),
        basis: Basis::NormalMode,
        temperature: Some(temperature),
    })
}

/// `Uᵀ ρ U`, symmetrized and renormalized. The transpose stands in for the
/// inverse of the (nearly orthogonal) truncated overlap matrix.
pub fn transform_density(rho: &DensityMatrix, u: &TransformTensor) -> Result<DensityMatrix> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: rho.dim(),
        });
    }
    if rho.basis != Basis::NormalMode {
        return Err(Error::InvalidDensity(
            "transform expects a normal-mode basis state".into(),
        ));
    }
    let out = u.entries.transpose() * &rho.entries * &u.entries;
    DensityMatrix::from_matrix(out, Basis::Physical, rho.temperature)
}

/// Reduced state of one mode, with `row = n·d + m` (n: first mode).
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    let d = rho.levels_per_mode()?;
    let r = &rho.entries;
    let mut out = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = (0..d)
                .map(|k| match keep {
                    Subsystem::First => r[(i * d + k, j * d + k)],
                    Subsystem::Second => r[(k * d + i, k * d + j)],
                })
                .sum();
        }
    }
    Ok(DensityMatrix {
        entries: out,
        basis: rho.basis,
        temperature: rho.temperature,
    })
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries.iter().map(|v| v * v).sum()
}

/// Purity diagnostics of the low-level block of a larger truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceValidity {
    /// Purity of the `d_small²` block after renormalizing it to unit trace.
    pub mu_i: f64,
    /// `Tr B²` of the complementary block, unnormalized.
    pub mu_ii: f64,
    /// Sum of `|ρ_ij|`, `i ≠ j`, over the renormalized small block.
    pub offdiag_sum: f64,
}

/// Splits a physical-basis state at truncation `d_big` into the block with
/// both levels below `d_small` and the rest.
pub fn split_subspace(rho: &DensityMatrix, d_small: usize) -> Result<SubspaceValidity> {
    let d_big = rho.levels_per_mode()?;
    if d_small < 1 || d_small >= d_big {
        return Err(Error::InvalidParameter {
            field: "levels-small",
            reason: format!("need 1 <= d_small < d_big = {d_big}, got {d_small}"),
        });
    }
    let (inner, outer): (Vec<usize>, Vec<usize>) =
        (0..d_big * d_big).partition(|&i| i / d_big < d_small && i % d_big < d_small);
    let r = &rho.entries;
    let block = r.select_rows(&inner).select_columns(&inner);
    let rest = r.select_rows(&outer).select_columns(&outer);
    let block = &block / block.trace();
    let mu_i = block.iter().map(|v| v * v).sum();
    let mu_ii = rest.iter().map(|v| v * v).sum();
    let mut offdiag_sum = 0.0;
    for i in 0..block.nrows() {
        for j in 0..block.ncols() {
            if i != j {
                offdiag_sum += block[(i, j)].abs();
            }
        }
    }
    Ok(SubspaceValidity {
        mu_i,
        mu_ii,
        offdiag_sum,
    })
}

/// Builds the physical-basis state at truncation `d_big` from an overlap
/// tensor of the same size, then reports the block purities.
pub fn subspace_validity(
    modes: &NormalModes,
    u_big: &TransformTensor,
    temperature: f64,
    d_small: usize,
) -> Result<SubspaceValidity> {
    let d_big = u_big.dim_per_mode;
    if d_big <= d_small {
        return Err(Error::InvalidParameter {
            field: "levels-big",
            reason: format!("must exceed levels-small = {d_small}, got {d_big}"),
        });
    }
    let rho = thermal_density(modes, temperature, d_big)?;
    let physical = transform_density(&rho, u_big)?;
    split_subspace(&physical, d_small)
}
