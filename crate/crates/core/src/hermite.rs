//! Hermite polynomials, oscillator eigenfunctions and two-dimensional Gaussian
//! integrals, both in closed form and by Gauss–Hermite quadrature.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub const DEFAULT_QUAD_ORDER: usize = 64;
pub const MIN_QUAD_ORDER: usize = 16;

/// Physicists' Hermite polynomial `H_k(x)` from the three-term recurrence.
pub fn hermite_poly(k: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for n in 1..k {
        let next = 2.0 * x * cur - 2.0 * n as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[n] = H_n(y) / sqrt(2ⁿ n! √π)` for `n < out.len()`.
///
/// The orthonormal recurrence avoids the factorial overflow of the plain one.
pub fn normalized_hermite_into(y: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI.powf(-0.25);
    if out.len() > 1 {
        out[1] = 2f64.sqrt() * y * out[0];
    }
    for n in 1..out.len().saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * y * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

/// Oscillator eigenfunction with length scale `L`:
/// `Ψ_n(x/L) / √L` with `Ψ_n(y) = (2ⁿ n! √π)^(-1/2) e^(-y²/2) H_n(y)`.
pub fn ho_eigenfunction(n: usize, x: f64, length_scale: f64) -> f64 {
    let y = x / length_scale;
    let mut h = vec![0.0; n + 1];
    normalized_hermite_into(y, &mut h);
    h[n] * (-0.5 * y * y).exp() / length_scale.sqrt()
}

/// Exponent `-(a11 x1² + a22 x2² + 2 a12 x1 x2) + b1 x1 + b2 x2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianQuadraticForm {
    pub a11: f64,
    pub a22: f64,
    pub a12: f64,
    pub b1: f64,
    pub b2: f64,
}

impl GaussianQuadraticForm {
    pub fn new(a11: f64, a22: f64, a12: f64) -> Result<Self> {
        Self::with_linear(a11, a22, a12, 0.0, 0.0)
    }

    pub fn with_linear(a11: f64, a22: f64, a12: f64, b1: f64, b2: f64) -> Result<Self> {
        let form = Self {
            a11,
            a22,
            a12,
            b1,
            b2,
        };
        form.check_positive_definite()?;
        Ok(form)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn check_positive_definite(&self) -> Result<()> {
        let det = self.det();
        if self.a11 > 0.0 && det > 0.0 && det.is_finite() {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite { a11: self.a11, det })
        }
    }

    pub fn quadratic(&self, x1: f64, x2: f64) -> f64 {
        self.a11 * x1 * x1 + self.a22 * x2 * x2 + 2.0 * self.a12 * x1 * x2
    }

    /// Covariances (Σ11, Σ22, Σ12) of the normalized density `∝ e^(-xᵀAx)`,
    /// i.e. `Σ = A⁻¹ / 2`.
    pub fn covariance(&self) -> (f64, f64, f64) {
        let two_det = 2.0 * self.det();
        (self.a22 / two_det, self.a11 / two_det, -self.a12 / two_det)
    }

    fn has_linear_part(&self) -> bool {
        self.b1 != 0.0 || self.b2 != 0.0
    }
}

/// `∫∫ e^(-xᵀAx + bᵀx) dx = π/√det A · exp[(a22 b1² − 2 a12 b1 b2 + a11 b2²) / (4 det A)]`.
pub fn gauss2d_integral(form: &GaussianQuadraticForm) -> Result<f64> {
    form.check_positive_definite()?;
    let det = form.det();
    let GaussianQuadraticForm {
        a11,
        a22,
        a12,
        b1,
        b2,
    } = *form;
    let shift = (a22 * b1 * b1 - 2.0 * a12 * b1 * b2 + a11 * b2 * b2) / (4.0 * det);
    Ok(PI / det.sqrt() * shift.exp())
}

/// `∫∫ x1^i x2^j e^(-xᵀAx) dx` for `i + j ≤ 4`.
///
/// Moments of a centred Gaussian via Wick pairings of Σ = A⁻¹/2; every odd
/// total degree returns exactly zero.
pub fn gauss2d_moment(form: &GaussianQuadraticForm, i: usize, j: usize) -> Result<f64> {
    let degree = i + j;
    if degree > 4 {
        return Err(Error::UnsupportedDegree(degree));
    }
    if form.has_linear_part() {
        return Err(Error::NonZeroLinearPart);
    }
    form.check_positive_definite()?;
    if degree % 2 == 1 {
        return Ok(0.0);
    }
    let (s11, s22, s12) = form.covariance();
    let expectation = match (i, j) {
        (0, 0) => 1.0,
        (2, 0) => s11,
        (0, 2) => s22,
        (1, 1) => s12,
        (4, 0) => 3.0 * s11 * s11,
        (0, 4) => 3.0 * s22 * s22,
        (3, 1) => 3.0 * s11 * s12,
        (1, 3) => 3.0 * s22 * s12,
        (2, 2) => s11 * s22 + 2.0 * s12 * s12,
        _ => unreachable!("odd and oversize degrees handled above"),
    };
    Ok(PI / form.det().sqrt() * expectation)
}

/// Gauss–Hermite nodes and weights for the weight `e^(-y²)`.
#[derive(Debug, Clone)]
pub struct GaussHermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `weights[i] * exp(nodes[i]²)`, for integrands that carry their own
    /// Gaussian decay.
    pub scaled_weights: Vec<f64>,
}

impl GaussHermiteRule {
    /// Newton iteration on the orthonormal Hermite recurrence, seeded with
    /// the usual asymptotic root estimates.
    fn compute(order: usize) -> Self {
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut scaled = vec![0.0; n];
        let pim4 = PI.powf(-0.25);
        let nf = n as f64;
        let m = n.div_ceil(2);
        let mut z = 0.0f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            let w = 2.0 / (pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
            // pp grows like e^(z²/2); fold the exponential in before squaring
            let damped = pp * (-0.5 * z * z).exp();
            let sw = 2.0 / (damped * damped);
            scaled[i] = sw;
            scaled[n - 1 - i] = sw;
        }
        // ascending order
        nodes.reverse();
        weights.reverse();
        scaled.reverse();
        Self {
            nodes,
            weights,
            scaled_weights: scaled,
        }
    }

    /// Cached rule of the given order; tables are built once per order.
    pub fn get(order: usize) -> Result<Arc<Self>> {
        if order < MIN_QUAD_ORDER {
            return Err(Error::QuadratureOrderTooLow(order));
        }
        static RULES: OnceLock<Mutex<HashMap<usize, Arc<GaussHermiteRule>>>> = OnceLock::new();
        let cache = RULES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(guard
            .entry(order)
            .or_insert_with(|| Arc::new(Self::compute(order)))
            .clone())
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

/// `∫ f(x) dx` for an integrand that decays like `e^(-x²)`.
pub fn quad1d<F: Fn(f64) -> f64>(f: F, order: usize) -> Result<f64> {
    let rule = GaussHermiteRule::get(order)?;
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.scaled_weights)
        .map(|(&x, &w)| w * f(x))
        .sum())
}

/// `∫ f(x) dx` where the integrand decays like `e^(-x²/(2σ²))`.
pub fn quad1d_scaled<F: Fn(f64) -> f64>(f: F, sigma: f64, order: usize) -> Result<f64> {
    let s = sigma * std::f64::consts::SQRT_2;
    Ok(s * quad1d(|y| f(s * y), order)?)
}

/// Tensor-product `∫∫ f(x1, x2) dx1 dx2` for an integrand that decays like
/// `e^(-x1² - x2²)`.
pub fn quad2d<F: Fn(f64, f64) -> f64>(f: F, order: usize) -> Result<f64> {
    let rule = GaussHermiteRule::get(order)?;
    let mut total = 0.0;
    for (&x1, &w1) in rule.nodes.iter().zip(&rule.scaled_weights) {
        let mut row = 0.0;
        for (&x2, &w2) in rule.nodes.iter().zip(&rule.scaled_weights) {
            row += w2 * f(x1, x2);
        }
        total += w1 * row;
    }
    Ok(total)
}

/// `∫∫ f(x) e^(-xᵀAx + bᵀx) dx` with the quadratic part of `weight` mapped
/// onto standard nodes through its Cholesky factor. The linear part is left
/// in the integrand.
pub fn quad2d_weighted<F: Fn(f64, f64) -> f64>(
    weight: &GaussianQuadraticForm,
    f: F,
    order: usize,
) -> Result<f64> {
    let map = CholeskyMap::new(weight)?;
    let rule = GaussHermiteRule::get(order)?;
    let (b1, b2) = (weight.b1, weight.b2);
    let mut total = 0.0;
    for (&y1, &w1) in rule.nodes.iter().zip(&rule.weights) {
        let mut row = 0.0;
        for (&y2, &w2) in rule.nodes.iter().zip(&rule.weights) {
            let (x1, x2) = map.apply(y1, y2);
            row += w2 * f(x1, x2) * (b1 * x1 + b2 * x2).exp();
        }
        total += w1 * row;
    }
    Ok(total * map.jacobian)
}

/// `x = L⁻ᵀ y` with `A = L Lᵀ`, so that `xᵀAx = yᵀy`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CholeskyMap {
    u11: f64,
    u12: f64,
    u22: f64,
    pub jacobian: f64,
}

impl CholeskyMap {
    pub fn new(form: &GaussianQuadraticForm) -> Result<Self> {
        form.check_positive_definite()?;
        let l11 = form.a11.sqrt();
        let l21 = form.a12 / l11;
        let l22 = (form.a22 - l21 * l21).sqrt();
        if !(l22 > 0.0) {
            return Err(Error::NotPositiveDefinite {
                a11: form.a11,
                det: form.det(),
            });
        }
        Ok(Self {
            u11: 1.0 / l11,
            u12: -l21 / (l11 * l22),
            u22: 1.0 / l22,
            jacobian: 1.0 / (l11 * l22),
        })
    }

    #[inline]
    pub fn apply(&self, y1: f64, y2: f64) -> (f64, f64) {
        (self.u11 * y1 + self.u12 * y2, self.u22 * y2)
    }
}
