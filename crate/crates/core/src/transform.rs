//! Overlaps between the uncoupled product Fock basis `|n m⟩` and the rotated
//! normal-mode basis `|n' m'⟩`.
//!
//! ```text
//! U[n m, n' m'] = ∫∫ ψ_n(x1; 1) ψ_m(x2; l) ψ_n'(x1'; L1) ψ_m'(x2'; L2) dx1 dx2
//! x1' = c x1 + s x2,   x2' = −s x1 + c x2
//! ```
//!
//! with `l = λ^(-1/2)`, `L_i = Ω_i^(-1/2)` and `(c, s) = (1, φ)` in the
//! small-angle regime. The product of the four Gaussians is `e^(-xᵀAx)`; the
//! closed forms below are its second and fourth moments. The quadrature path
//! evaluates the eigenfunctions directly and only uses `A` to place nodes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermite::{
    normalized_hermite_into, CholeskyMap, GaussHermiteRule, GaussianQuadraticForm,
    DEFAULT_QUAD_ORDER,
};
use crate::model::{CircuitParams, NormalModes};

/// Upper bound for automatic order doubling.
pub const MAX_QUAD_ORDER: usize = 256;

/// Two consecutive orders must agree this well on `U[00,00]`.
const ORDER_AGREEMENT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformMethod {
    ClosedForm,
    Quadrature,
}

/// Which set of closed-form expressions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ClosedFormVariant {
    /// Expressions re-derived from the moments of `e^(-xᵀAx)`.
    #[default]
    Derived,
    /// The coefficient and element formulas exactly as printed in the
    /// original derivation. Kept for reference; several prefactors there are
    /// inconsistent and disagree with the overlap integral.
    Printed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformTensor {
    pub dim_per_mode: usize,
    /// Row `n·d + m` is the uncoupled state, column `n'·d + m'` the rotated one.
    pub entries: DMatrix<f64>,
    pub method: TransformMethod,
}

impl TransformTensor {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn element(&self, n: usize, m: usize, np: usize, mp: usize) -> f64 {
        let d = self.dim_per_mode;
        self.entries[(n * d + m, np * d + mp)]
    }

    /// `max |UᵀU − I|`, the truncation leakage.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.entries.transpose() * &self.entries;
        let id = DMatrix::<f64>::identity(self.dim(), self.dim());
        (gram - id).amax()
    }
}

/// Length scales and rotation shared by every overlap element.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    lambda: f64,
    omega1: f64,
    omega2: f64,
    c: f64,
    s: f64,
}

impl Geometry {
    fn new(params: &CircuitParams, modes: &NormalModes) -> Self {
        let (c, s) = modes.rotation();
        Self {
            lambda: params.lambda(),
            omega1: modes.omega1,
            omega2: modes.omega2,
            c,
            s,
        }
    }

    /// `K = sqrt(l L1 L2) = (λ Ω1 Ω2)^(-1/4)`.
    fn k(&self) -> f64 {
        (self.lambda * self.omega1 * self.omega2).powf(-0.25)
    }

    fn lengths(&self) -> [f64; 4] {
        [
            1.0,
            self.lambda.recip().sqrt(),
            self.omega1.recip().sqrt(),
            self.omega2.recip().sqrt(),
        ]
    }

    fn rotated(&self, x1: f64, x2: f64) -> (f64, f64) {
        (self.c * x1 + self.s * x2, -self.s * x1 + self.c * x2)
    }

    /// Sum of the four eigenfunction exponents, `x1²/2 + λx2²/2 + Ω1x1'²/2 + Ω2x2'²/2`.
    fn exponent(&self, x1: f64, x2: f64) -> f64 {
        let (y1, y2) = self.rotated(x1, x2);
        0.5 * (x1 * x1 + self.lambda * x2 * x2 + self.omega1 * y1 * y1 + self.omega2 * y2 * y2)
    }
}

/// Coefficients of the combined Gaussian exponent `xᵀAx` of the overlap
/// integrand, obtained by substituting the rotated coordinates:
///
/// ```text
/// A = ½ [diag(1, λ) + Ω1 (c, s)(c, s)ᵀ + Ω2 (−s, c)(−s, c)ᵀ]
/// ```
///
/// For the small-angle substitution this is
/// `a11 = (1 + Ω1 + φ²Ω2)/2`, `a22 = (λ + φ²Ω1 + Ω2)/2`, `a12 = φ(Ω1 − Ω2)/2`.
pub fn gaussian_coefficients(
    params: &CircuitParams,
    modes: &NormalModes,
) -> Result<GaussianQuadraticForm> {
    let geo = Geometry::new(params, modes);
    let (c, s, w1, w2) = (geo.c, geo.s, geo.omega1, geo.omega2);
    let a11 = 0.5 * (1.0 + w1 * c * c + w2 * s * s);
    let a22 = 0.5 * (geo.lambda + w1 * s * s + w2 * c * c);
    let a12 = 0.5 * (w1 - w2) * c * s;
    GaussianQuadraticForm::new(a11, a22, a12)
}

/// The printed coefficient formulas, evaluated at the small-angle φ.
pub fn printed_gaussian_coefficients(
    params: &CircuitParams,
    modes: &NormalModes,
) -> Result<GaussianQuadraticForm> {
    let (l, g, phi) = (params.lambda(), params.g(), modes.phi);
    let p2 = phi * phi;
    let a11 = 1.5 + 2.0 * l * l * p2 - 2.0 * g * l * phi + p2 * (p2 + 2.0 * g * l * phi);
    let a22 =
        l / 2.0 + l * l + 2.0 * p2 + 2.0 * g * l * phi + p2 * (l * l * p2 - 2.0 * g * l * phi);
    let a12 = (l * l * p2 + 1.0 - l * l - p2 - 4.0 * g * l * phi) * phi;
    GaussianQuadraticForm::new(a11, a22, a12)
}

/// Elements whose integrand is odd in `x → −x`.
pub fn is_parity_odd(n: usize, m: usize, np: usize, mp: usize) -> bool {
    (n + m + np + mp) % 2 == 1
}

/// Closed-form `U[n m, n' m']` for levels 0 and 1.
pub fn overlap_element_closed(
    n: usize,
    m: usize,
    np: usize,
    mp: usize,
    params: &CircuitParams,
    modes: &NormalModes,
) -> Result<f64> {
    overlap_element_closed_variant(n, m, np, mp, params, modes, ClosedFormVariant::Derived)
}

pub fn overlap_element_closed_variant(
    n: usize,
    m: usize,
    np: usize,
    mp: usize,
    params: &CircuitParams,
    modes: &NormalModes,
    variant: ClosedFormVariant,
) -> Result<f64> {
    if let Some(&bad) = [n, m, np, mp].iter().find(|&&i| i > 1) {
        return Err(Error::IndexOutOfRange(bad));
    }
    if is_parity_odd(n, m, np, mp) {
        return Ok(0.0);
    }
    match variant {
        ClosedFormVariant::Derived => derived_element(n, m, np, mp, params, modes),
        ClosedFormVariant::Printed => printed_element(n, m, np, mp, params, modes),
    }
}

fn derived_element(
    n: usize,
    m: usize,
    np: usize,
    mp: usize,
    params: &CircuitParams,
    modes: &NormalModes,
) -> Result<f64> {
    let geo = Geometry::new(params, modes);
    let form = gaussian_coefficients(params, modes)?;
    let (a11, a22, a12) = (form.a11, form.a22, form.a12);
    let det = form.det();
    let (c, s) = (geo.c, geo.s);
    let k = geo.k();
    let (rl, r1, r2) = (geo.lambda.sqrt(), geo.omega1.sqrt(), geo.omega2.sqrt());
    // common prefactor of every element with two or four Hermite factors
    let pre = 1.0 / (k * det.powf(1.5));
    let value = match (n, m, np, mp) {
        (0, 0, 0, 0) => 1.0 / (k * det.sqrt()),
        (0, 0, 1, 1) => r1 * r2 * pre * (c * s * (a11 - a22) - (c * c - s * s) * a12),
        (0, 1, 0, 1) => rl * r2 * pre * (c * a11 + s * a12),
        (0, 1, 1, 0) => rl * r1 * pre * (s * a11 - c * a12),
        (1, 0, 0, 1) => -r2 * pre * (s * a22 + c * a12),
        (1, 0, 1, 0) => r1 * pre * (c * a22 - s * a12),
        (1, 1, 0, 0) => -rl * pre * a12,
        (1, 1, 1, 1) => {
            rl * r1
                * r2
                * pre
                * ((c * c - s * s) * (1.0 + 3.0 * a12 * a12 / det)
                    - 3.0 * c * s * a12 * (a11 - a22) / det)
        }
        _ => unreachable!("odd elements return early"),
    };
    Ok(value)
}

fn printed_element(
    n: usize,
    m: usize,
    np: usize,
    mp: usize,
    params: &CircuitParams,
    modes: &NormalModes,
) -> Result<f64> {
    let (l, g, phi) = (params.lambda(), params.g(), modes.phi);
    let form = printed_gaussian_coefficients(params, modes)?;
    let (a11, a22, a12) = (form.a11, form.a22, form.a12);
    let det = form.det();
    let w1_sq = l * l * phi * phi + 1.0 - 2.0 * g * l * phi;
    let w2_sq = phi * phi + l * l + 2.0 * g * l * phi;
    let k = (l * l * w1_sq * w2_sq).powf(-0.125);
    let d32 = det.powf(1.5);
    let value = match (n, m, np, mp) {
        (0, 0, 0, 0) => 1.0 / (k * det.sqrt()),
        (0, 0, 1, 1) => {
            (a12 * (phi * phi - 1.0) - phi * a22 + phi * a11) / ((k * det).powf(1.5) * l.sqrt())
        }
        (0, 1, 0, 1) => (phi * a12 + a11) / (k.powi(3) * d32 * w1_sq.powf(0.25)),
        (0, 1, 1, 0) => (phi * a11 - a12) / (k.powi(3) * d32 * w2_sq.powf(0.25)),
        (1, 0, 0, 1) => -w2_sq.sqrt() / (k * d32) * (phi * a22 + a12),
        (1, 0, 1, 0) => w1_sq.sqrt() / (k * d32) * (a22 - phi * a12),
        (1, 1, 0, 0) => -a12 * l.sqrt() / (k * d32),
        (1, 1, 1, 1) => (1.0 - phi * phi) * (1.0 + 3.0 * a12 * a12 / det) / (k * det).powf(1.5),
        _ => unreachable!("odd elements return early"),
    };
    Ok(value)
}

/// Quadrature of all `U[n m, n' m']` with `n, m, n', m' < d` at once.
fn quadrature_matrix(
    params: &CircuitParams,
    modes: &NormalModes,
    d: usize,
    order: usize,
) -> Result<DMatrix<f64>> {
    let geo = Geometry::new(params, modes);
    let weight = gaussian_coefficients(params, modes)?;
    let map = CholeskyMap::new(&weight)?;
    let rule = GaussHermiteRule::get(order)?;
    let lengths = geo.lengths();
    let norm = 1.0 / lengths.iter().product::<f64>().sqrt();

    let dim = d * d;
    let mut acc = DMatrix::<f64>::zeros(dim, dim);
    let (mut h1, mut h2, mut h3, mut h4) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut left = vec![0.0; dim];
    let mut right = vec![0.0; dim];
    for (&y1, &w1) in rule.nodes.iter().zip(&rule.weights) {
        for (&y2, &w2) in rule.nodes.iter().zip(&rule.weights) {
            let (x1, x2) = map.apply(y1, y2);
            let (xp1, xp2) = geo.rotated(x1, x2);
            // zero up to rounding; keeps the oracle independent of `A`
            let residual = weight.quadratic(x1, x2) - geo.exponent(x1, x2);
            let w = w1 * w2 * residual.exp() * norm;
            normalized_hermite_into(x1 / lengths[0], &mut h1);
            normalized_hermite_into(x2 / lengths[1], &mut h2);
            normalized_hermite_into(xp1 / lengths[2], &mut h3);
            normalized_hermite_into(xp2 / lengths[3], &mut h4);
            for a in 0..d {
                for b in 0..d {
                    left[a * d + b] = h1[a] * h2[b];
                    right[a * d + b] = h3[a] * h4[b];
                }
            }
            for (col, &r) in right.iter().enumerate() {
                let wr = w * r;
                let mut column = acc.column_mut(col);
                for (row, &l) in left.iter().enumerate() {
                    column[row] += wr * l;
                }
            }
        }
    }
    Ok(acc * map.jacobian)
}

/// Quadrature value of a single overlap element, any level.
pub fn overlap_element_quadrature(
    n: usize,
    m: usize,
    np: usize,
    mp: usize,
    params: &CircuitParams,
    modes: &NormalModes,
    order: usize,
) -> Result<f64> {
    let d = [n, m, np, mp].into_iter().max().unwrap_or(0) + 1;
    let mat = quadrature_matrix(params, modes, d, order)?;
    Ok(mat[(n * d + m, np * d + mp)])
}

/// Starting from `base`, doubles the order until two consecutive orders agree
/// on `U[00,00]` to 1e-10, or [`MAX_QUAD_ORDER`] is reached.
pub fn resolve_quadrature_order(
    params: &CircuitParams,
    modes: &NormalModes,
    base: usize,
) -> Result<usize> {
    let mut order = base;
    let mut current = overlap_element_quadrature(0, 0, 0, 0, params, modes, order)?;
    while order < MAX_QUAD_ORDER {
        let next_order = (order * 2).min(MAX_QUAD_ORDER);
        let next = overlap_element_quadrature(0, 0, 0, 0, params, modes, next_order)?;
        if (next - current).abs() <= ORDER_AGREEMENT {
            return Ok(order);
        }
        order = next_order;
        current = next;
    }
    Ok(order)
}

pub fn build_transform(
    params: &CircuitParams,
    modes: &NormalModes,
    d: usize,
    method: TransformMethod,
) -> Result<TransformTensor> {
    build_transform_with_order(params, modes, d, method, DEFAULT_QUAD_ORDER)
}

pub fn build_transform_with_order(
    params: &CircuitParams,
    modes: &NormalModes,
    d: usize,
    method: TransformMethod,
    order: usize,
) -> Result<TransformTensor> {
    if d < 2 {
        return Err(Error::InvalidParameter {
            field: "levels",
            reason: format!("need at least 2 levels per mode, got {d}"),
        });
    }
    if method == TransformMethod::ClosedForm && d != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: d,
        });
    }
    let dim = d * d;
    // uncoupled modes coincide with the physical ones
    if params.g() == 0.0 && modes.phi == 0.0 {
        return Ok(TransformTensor {
            dim_per_mode: d,
            entries: DMatrix::identity(dim, dim),
            method,
        });
    }
    let entries = match method {
        TransformMethod::ClosedForm => {
            let mut u = DMatrix::zeros(dim, dim);
            for row in 0..dim {
                for col in 0..dim {
                    let (n, m, np, mp) = (row / d, row % d, col / d, col % d);
                    u[(row, col)] = overlap_element_closed(n, m, np, mp, params, modes)?;
                }
            }
            u
        }
        TransformMethod::Quadrature => {
            let order = resolve_quadrature_order(params, modes, order)?;
            quadrature_matrix(params, modes, d, order)?
        }
    };
    Ok(TransformTensor {
        dim_per_mode: d,
        entries,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normal_modes, ModeMethod};
    use proptest::prelude::*;

    fn setup(lambda: f64, g: f64) -> (CircuitParams, NormalModes) {
        let p = CircuitParams::new(lambda, g).unwrap();
        let m = normal_modes(&p, ModeMethod::SmallAngle).unwrap();
        (p, m)
    }

    const ODD: [(usize, usize, usize, usize); 8] = [
        (0, 0, 0, 1),
        (0, 0, 1, 0),
        (0, 1, 0, 0),
        (1, 0, 0, 0),
        (0, 1, 1, 1),
        (1, 0, 1, 1),
        (1, 1, 1, 0),
        (1, 1, 0, 1),
    ];

    #[test]
    fn coefficients_separable_without_coupling() {
        let p = CircuitParams::new(1.0, 0.0).unwrap();
        let m = normal_modes(&p, ModeMethod::Exact).unwrap();
        let form = gaussian_coefficients(&p, &m).unwrap();
        assert_eq!(form.a12, 0.0);
        assert_eq!((form.a11, form.a22), (1.0, 1.0));
    }

    #[test]
    fn printed_a12_formula() {
        let (p, m) = setup(1.5, 0.1);
        let (l, g, phi) = (1.5, 0.1, 0.12);
        let want = (l * l * phi * phi + 1.0 - l * l - phi * phi - 4.0 * g * l * phi) * phi;
        let form = printed_gaussian_coefficients(&p, &m).unwrap();
        assert!((form.a12 - want).abs() < 1e-15);
    }

    #[test]
    fn derived_coefficients_match_direct_substitution() {
        let (p, m) = setup(1.5, 0.1);
        let form = gaussian_coefficients(&p, &m).unwrap();
        let (w1, w2, phi, l) = (m.omega1, m.omega2, m.phi, 1.5);
        assert!((form.a11 - 0.5 * (1.0 + w1 + phi * phi * w2)).abs() < 1e-15);
        assert!((form.a22 - 0.5 * (l + phi * phi * w1 + w2)).abs() < 1e-15);
        assert!((form.a12 - 0.5 * phi * (w1 - w2)).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_elements() {
        let (p, m) = setup(1.5, 0.0);
        assert!((overlap_element_closed(0, 0, 0, 0, &p, &m).unwrap() - 1.0).abs() < 1e-15);
        let q = overlap_element_quadrature(0, 0, 0, 0, &p, &m, 64).unwrap();
        assert!((q - 1.0).abs() < 1e-12);
        let q = overlap_element_quadrature(0, 0, 1, 1, &p, &m, 64).unwrap();
        assert!(q.abs() < 1e-12);
    }

    #[test]
    fn odd_elements_vanish() {
        let (p, m) = setup(1.5, 0.1);
        for &(a, b, c, d) in &ODD {
            let v = overlap_element_closed(a, b, c, d, &p, &m).unwrap();
            assert_eq!(v.to_bits(), 0u64);
            let q = overlap_element_quadrature(a, b, c, d, &p, &m, 64).unwrap();
            assert!(q.abs() < 1e-12, "{a}{b}{c}{d}: {q}");
        }
    }

    #[test]
    fn index_out_of_range() {
        let (p, m) = setup(1.5, 0.1);
        assert_eq!(
            overlap_element_closed(2, 0, 0, 0, &p, &m),
            Err(Error::IndexOutOfRange(2))
        );
    }

    #[test]
    fn closed_matches_quadrature_reference_point() {
        let (p, m) = setup(1.5, 0.1);
        for idx in 0..16 {
            let (a, b, c, d) = (idx >> 3 & 1, idx >> 2 & 1, idx >> 1 & 1, idx & 1);
            let closed = overlap_element_closed(a, b, c, d, &p, &m).unwrap();
            let quad = overlap_element_quadrature(a, b, c, d, &p, &m, 64).unwrap();
            assert!(
                (closed - quad).abs() < 1e-12,
                "U{a}{b}{c}{d}: {closed} vs {quad}"
            );
        }
    }

    #[test]
    fn printed_prefactors_disagree_with_integral() {
        // U1100 survives verbatim; U1111 does not
        let (p, m) = setup(1.5, 0.1);
        let exact = overlap_element_quadrature(1, 1, 1, 1, &p, &m, 64).unwrap();
        let printed =
            overlap_element_closed_variant(1, 1, 1, 1, &p, &m, ClosedFormVariant::Printed)
                .unwrap();
        assert!((exact - printed).abs() > 1e-3);
        let printed_u0000 =
            overlap_element_closed_variant(0, 0, 0, 0, &p, &m, ClosedFormVariant::Printed)
                .unwrap();
        assert!(printed_u0000.is_finite());
    }

    #[test]
    fn identity_without_coupling() {
        let (p, m) = setup(1.5, 0.0);
        for method in [TransformMethod::ClosedForm, TransformMethod::Quadrature] {
            let u = build_transform(&p, &m, 2, method).unwrap();
            assert_eq!(u.entries, DMatrix::identity(4, 4));
        }
    }

    #[test]
    fn closed_form_requires_two_levels() {
        let (p, m) = setup(1.5, 0.1);
        assert!(build_transform(&p, &m, 3, TransformMethod::ClosedForm).is_err());
        assert!(build_transform(&p, &m, 1, TransformMethod::Quadrature).is_err());
    }

    /// Gram defect of the columns `n', m' < 2` inside a `d`-level tensor.
    fn low_block_defect(u: &TransformTensor) -> f64 {
        let d = u.dim_per_mode;
        let sub = u.entries.select_columns(&[0, 1, d, d + 1]);
        (sub.transpose() * &sub - DMatrix::<f64>::identity(4, 4)).amax()
    }

    #[test]
    fn leakage_shrinks_with_truncation() {
        for method in [ModeMethod::SmallAngle, ModeMethod::Exact] {
            let p = CircuitParams::new(1.5, 0.1).unwrap();
            let m = normal_modes(&p, method).unwrap();
            let defects: Vec<f64> = [2, 4, 6]
                .iter()
                .map(|&d| {
                    low_block_defect(
                        &build_transform(&p, &m, d, TransformMethod::Quadrature).unwrap(),
                    )
                })
                .collect();
            assert!(
                defects[0] > defects[1] && defects[1] > defects[2],
                "{method:?} {defects:?}"
            );
            if method == ModeMethod::Exact {
                // the exact rotation is unitary once enough levels are kept
                assert!(defects[2] < 1e-10, "{defects:?}");
            } else {
                // the linearised rotation stretches areas by 1 + φ²
                assert!((defects[2] - m.phi * m.phi).abs() < 1e-3, "{defects:?}");
            }
        }
    }

    #[test]
    fn row_ordering_matches_basis_labels() {
        let (p, m) = setup(1.5, 0.1);
        let u = build_transform(&p, &m, 2, TransformMethod::ClosedForm).unwrap();
        let direct = overlap_element_closed(1, 0, 0, 1, &p, &m).unwrap();
        assert_eq!(u.entries[(2, 1)], direct);
        assert_eq!(u.element(1, 0, 0, 1), direct);
    }

    #[test]
    fn quadrature_order_is_resolved() {
        let (p, m) = setup(1.5, 0.1);
        assert_eq!(resolve_quadrature_order(&p, &m, 64).unwrap(), 64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn closed_form_tracks_quadrature(l in 1.2f64..2.0, g in 0.0f64..0.1) {
            let (p, m) = setup(l, g);
            let closed = build_transform(&p, &m, 2, TransformMethod::ClosedForm).unwrap();
            let quad = build_transform(&p, &m, 2, TransformMethod::Quadrature).unwrap();
            prop_assert!((&closed.entries - &quad.entries).amax() < 1e-8);
            prop_assert!(closed.orthogonality_defect() <= LEAKAGE_BOUND_D2);
        }

        #[test]
        fn entries_continuous_in_g(l in 1.2f64..2.0, g in 0.0f64..0.1) {
            let (p0, m0) = setup(l, g);
            let (p1, m1) = setup(l, g + 1e-6);
            let u0 = build_transform(&p0, &m0, 2, TransformMethod::ClosedForm).unwrap();
            let u1 = build_transform(&p1, &m1, 2, TransformMethod::ClosedForm).unwrap();
            prop_assert!((&u0.entries - &u1.entries).amax() <= 1e-4);
        }
    }

    // max ‖UᵀU − I‖ over g ≤ 0.1, λ ∈ [1.2, 2], d = 2 is 0.3187 at
    // (λ = 1.2, g = 0.1), where φ ≈ 0.27
    const LEAKAGE_BOUND_D2: f64 = 0.32;
}
