//! Generalized multiple Fourier coefficients of the iterated-integral
//! kernel `ψ₁(t₁)ψ₂(t₂)ψ₃(t₃)·1{t₁<t₂<t₃}` with binomial weights
//! `ψ_i(s) = (t - s)^{l_i}`.
//!
//! `C_{j3 j2 j1}` integrates `φ_{j1}` innermost and `φ_{j3}` outermost.
//! Every triple coefficient is evaluated in its middle variable,
//!
//! ```text
//! C_{j3 j2 j1} = ∫_t^T ψ₂(s) φ_{j2}(s) A_{j1}(s) B_{j3}(s) ds,
//! A_{j1}(s) = ∫_t^s ψ₁ φ_{j1},   B_{j3}(s) = ∫_s^T ψ₃ φ_{j3},
//! ```
//!
//! with `A`, `B` in closed form for constant weights and by inner quadrature
//! otherwise.

mod diagonal;
mod export;
mod trig_closed;

pub use diagonal::{diagonal_profile, residual_tail_direct, DiagonalFamily};
pub use export::{read_tensor_json, read_values_csv, tensor_to_json, write_tensor_csv, write_tensor_json, TensorRecord};
pub use trig_closed::{trig_coeff_closed, trig_coeff_closed_as_printed};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{power, BasisKind, BasisSpec};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gauss_kronrod, CompositeRule, GaussLegendre};
use crate::scalar::{CompensatedSum, Scalar};

/// Default upper bound on each tensor truncation index.
pub const DEFAULT_TENSOR_CAP: usize = 64;

/// Exponents of the binomial weights `(t - s)^l` on the innermost,
/// middle and outermost integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightExponents {
    pub l1: u32,
    pub l2: u32,
    pub l3: u32,
}

impl WeightExponents {
    pub const CONSTANT: Self = Self { l1: 0, l2: 0, l3: 0 };

    pub const fn new(l1: u32, l2: u32, l3: u32) -> Self {
        Self { l1, l2, l3 }
    }

    pub const fn uniform(l: u32) -> Self {
        Self { l1: l, l2: l, l3: l }
    }

    pub fn is_constant(&self) -> bool {
        *self == Self::CONSTANT
    }

    pub fn total(&self) -> u32 {
        self.l1 + self.l2 + self.l3
    }

    /// Homogeneity degree in the width `w` of a triple coefficient.
    pub fn triple_scale<T: Scalar>(&self, width: T) -> T {
        width.powf(T::of(self.total() as usize) + T::lit(1.5))
    }
}

/// `ψ(s) = (t - s)^l`.
#[inline]
fn weight<T: Scalar>(basis: &BasisSpec<T>, l: u32, s: T) -> T {
    power(basis.interval.start() - s, l)
}

/// Nodes and weights on `[t, T]`: exact for Legendre integrands of
/// polynomial `degree`, spectrally accurate for trigonometric products whose
/// harmonic numbers `r` add up to `harmonics`.
fn outer_grid<T: Scalar>(basis: &BasisSpec<T>, degree: usize, harmonics: usize) -> (Vec<T>, Vec<T>) {
    let (a, b) = (basis.interval.start(), basis.interval.end());
    match basis.kind {
        BasisKind::Legendre => GaussLegendre::for_degree(degree).mapped(a, b),
        BasisKind::Trigonometric => {
            // Polynomial weight factors are absorbed by the 20-point panels.
            let omega = T::lit(2.0) * T::PI() * T::of(harmonics + 1) / basis.width();
            let rule = CompositeRule::<T>::for_frequency(omega, basis.width());
            rule.mapped(a, b)
        }
    }
}

#[inline]
fn harmonic(j: usize) -> usize {
    j.div_ceil(2)
}

/// `C_j = ∫_t^T φ_j(s)(t - s)^l ds`.
pub fn coeff_single<T: Scalar>(basis: &BasisSpec<T>, j: usize, l: u32) -> T {
    let (xs, ws) = outer_grid(basis, j + l as usize, harmonic(j));
    let acc: CompensatedSum<T> = xs
        .iter()
        .zip(&ws)
        .map(|(&s, &w)| w * weight(basis, l, s) * basis.phi_unchecked(j, s))
        .collect();
    acc.value()
}

/// `C_{j2 j1} = ∫_t^T ψ₂ φ_{j2}(s) ∫_t^s ψ₁ φ_{j1}(s₁) ds₁ ds`.
pub fn coeff_double<T: Scalar>(basis: &BasisSpec<T>, j1: usize, j2: usize, (l1, l2): (u32, u32)) -> T {
    let degree = j1 + j2 + (l1 + l2) as usize + 1;
    let (xs, ws) = outer_grid(basis, degree, harmonic(j1) + harmonic(j2));
    let acc: CompensatedSum<T> = xs
        .iter()
        .zip(&ws)
        .map(|(&s, &w)| {
            w * weight(basis, l2, s)
                * basis.phi_unchecked(j2, s)
                * basis.weighted_antiderivative_unchecked(j1, l1, s)
        })
        .collect();
    acc.value()
}

/// The triple coefficient `C_{j3 j2 j1}`.
///
/// Legendre: fixed-order Gauss–Legendre sized from the total polynomial
/// degree, exact to rounding. Trigonometric: adaptive Gauss–Kronrod on the
/// middle variable to `Scalar::quadrature_tolerance()` times the natural
/// scale `w^{l1+l2+l3+3/2}`.
pub fn coeff_triple<T: Scalar>(
    basis: &BasisSpec<T>,
    j1: usize,
    j2: usize,
    j3: usize,
    weights: WeightExponents,
) -> Result<T> {
    let WeightExponents { l1, l2, l3 } = weights;
    let tail_total = basis.weighted_antiderivative_unchecked(j3, l3, basis.interval.end());
    let integrand = |s: T| {
        let a = basis.weighted_antiderivative_unchecked(j1, l1, s);
        let b = tail_total - basis.weighted_antiderivative_unchecked(j3, l3, s);
        weight(basis, l2, s) * basis.phi_unchecked(j2, s) * a * b
    };
    match basis.kind {
        BasisKind::Legendre => {
            let degree = j1 + j2 + j3 + weights.total() as usize + 2;
            let rule = GaussLegendre::for_degree(degree);
            Ok(rule.integrate(basis.interval.start(), basis.interval.end(), integrand))
        }
        BasisKind::Trigonometric => {
            let tol = T::quadrature_tolerance() * weights.triple_scale(basis.width());
            adaptive_gauss_kronrod(integrand, basis.interval.start(), basis.interval.end(), tol, 4000)
        }
    }
}

/// Entries of a Legendre tensor that vanish identically.
///
/// Degree cap: in middle-variable form `C_{j3 j2 j1}` pairs `φ_{j}` against
/// a polynomial of degree `(sum of the other two) + l1 + l2 + l3 + 2`, so it
/// is zero whenever any index exceeds that. Parity (constant weights only):
/// `C_{j3 j1 j1} = 0` for odd `j3` and `j1 ≥ 1`; `C_{j3 j3 j1} = 0` for odd
/// `j1` and `j3 ≥ 1`.
pub fn is_structural_zero(kind: BasisKind, weights: WeightExponents, j3: usize, j2: usize, j1: usize) -> bool {
    if kind != BasisKind::Legendre {
        return false;
    }
    let extra = weights.total() as usize + 2;
    if j3 > j1 + j2 + extra || j1 > j2 + j3 + extra || j2 > j1 + j3 + extra {
        return true;
    }
    if weights.is_constant() {
        if j2 == j1 && j1 >= 1 && j3 % 2 == 1 {
            return true;
        }
        if j3 == j2 && j3 >= 1 && j1 % 2 == 1 {
            return true;
        }
    }
    false
}

#[derive(Clone, Copy, Debug)]
pub struct TensorOptions {
    pub cap: usize,
    /// Skip quadrature for entries known to vanish and evaluate the rest
    /// on one shared tabulated grid. With `false` every entry is computed
    /// independently by [`coeff_triple`].
    pub structural_shortcuts: bool,
}

impl Default for TensorOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_TENSOR_CAP,
            structural_shortcuts: true,
        }
    }
}

/// Dense table of `C_{j3 j2 j1}`, row-major over `(j3, j2, j1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTensor<T> {
    pub basis: BasisSpec<T>,
    pub weights: WeightExponents,
    /// `(p1, p2, p3)`: inclusive maxima of `j1`, `j2`, `j3`.
    pub bounds: (usize, usize, usize),
    values: Vec<T>,
}

impl<T: Scalar> CoefficientTensor<T> {
    pub fn from_values(
        basis: BasisSpec<T>,
        weights: WeightExponents,
        bounds: (usize, usize, usize),
        values: Vec<T>,
    ) -> Result<Self> {
        let expected = (bounds.0 + 1) * (bounds.1 + 1) * (bounds.2 + 1);
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "tensor with bounds {bounds:?} needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            basis,
            weights,
            bounds,
            values,
        })
    }

    #[inline]
    fn index(&self, j3: usize, j2: usize, j1: usize) -> usize {
        let (p1, p2, _) = self.bounds;
        (j3 * (p2 + 1) + j2) * (p1 + 1) + j1
    }

    #[inline]
    pub fn get(&self, j3: usize, j2: usize, j1: usize) -> T {
        debug_assert!(j1 <= self.bounds.0 && j2 <= self.bounds.1 && j3 <= self.bounds.2);
        self.values[self.index(j3, j2, j1)]
    }

    pub fn try_get(&self, j3: usize, j2: usize, j1: usize) -> Option<T> {
        let (p1, p2, p3) = self.bounds;
        (j1 <= p1 && j2 <= p2 && j3 <= p3).then(|| self.get(j3, j2, j1))
    }

    pub fn set(&mut self, j3: usize, j2: usize, j1: usize, value: T) {
        let k = self.index(j3, j2, j1);
        self.values[k] = value;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| **v != T::zero()).count()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `(j3, j2, j1, value)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, T)> + '_ {
        let (p1, p2, p3) = self.bounds;
        (0..=p3).flat_map(move |j3| {
            (0..=p2).flat_map(move |j2| (0..=p1).map(move |j1| (j3, j2, j1, self.get(j3, j2, j1))))
        })
    }

    /// `Σ_{j1 ≤ p1} C_{j3 j1 j1}`.
    pub fn diagonal_sum_13(&self, j3: usize, p1: usize) -> Result<T> {
        let (b1, b2, b3) = self.bounds;
        if j3 > b3 || p1 > b1.min(b2) {
            return Err(Error::TruncationExceedsTensor {
                p1,
                p2: p1,
                p3: j3,
                b1,
                b2,
                b3,
            });
        }
        let acc: CompensatedSum<T> = (0..=p1).map(|j| self.get(j3, j, j)).collect();
        Ok(acc.value())
    }

    /// `Σ_{j3 ≤ p3} C_{j3 j3 j1}`.
    pub fn diagonal_sum_23(&self, j1: usize, p3: usize) -> Result<T> {
        let (b1, b2, b3) = self.bounds;
        if j1 > b1 || p3 > b2.min(b3) {
            return Err(Error::TruncationExceedsTensor {
                p1: j1,
                p2: p3,
                p3,
                b1,
                b2,
                b3,
            });
        }
        let acc: CompensatedSum<T> = (0..=p3).map(|j| self.get(j, j, j1)).collect();
        Ok(acc.value())
    }

    /// `Σ_{j1 ≤ p1} C_{j1 j2 j1}`.
    pub fn diagonal_sum_13_middle(&self, j2: usize, p1: usize) -> Result<T> {
        let (b1, b2, b3) = self.bounds;
        if j2 > b2 || p1 > b1.min(b3) {
            return Err(Error::TruncationExceedsTensor {
                p1,
                p2: j2,
                p3: p1,
                b1,
                b2,
                b3,
            });
        }
        let acc: CompensatedSum<T> = (0..=p1).map(|j| self.get(j, j2, j)).collect();
        Ok(acc.value())
    }

    /// `Σ_{j3 even, 2 ≤ j3 ≤ 2p1+2} (Σ_{j1 ≤ p1} C_{j3 j1 j1})²`; needs
    /// `j3` bounds up to `2p1 + 2`.
    pub fn residual_tail(&self, p1: usize) -> Result<T> {
        let top = 2 * p1 + 2;
        let (b1, b2, b3) = self.bounds;
        if top > b3 || p1 > b1.min(b2) {
            return Err(Error::TruncationExceedsTensor {
                p1,
                p2: p1,
                p3: top,
                b1,
                b2,
                b3,
            });
        }
        let mut acc = CompensatedSum::new();
        for j3 in (2..=top).step_by(2) {
            let s = self.diagonal_sum_13(j3, p1)?;
            acc.add(s * s);
        }
        Ok(acc.value())
    }
}

/// Fills every `C_{j3 j2 j1}` with `j_i ≤ p_i`.
pub fn build_tensor<T: Scalar>(
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    bounds: (usize, usize, usize),
) -> Result<CoefficientTensor<T>> {
    build_tensor_with(basis, weights, bounds, &TensorOptions::default())
}

pub fn build_tensor_with<T: Scalar>(
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    bounds: (usize, usize, usize),
    options: &TensorOptions,
) -> Result<CoefficientTensor<T>> {
    let (p1, p2, p3) = bounds;
    for (what, p) in [("p1", p1), ("p2", p2), ("p3", p3)] {
        if p > options.cap {
            return Err(Error::ResourceCap {
                what,
                requested: p,
                cap: options.cap,
            });
        }
    }
    let rows: Vec<Vec<T>> = if options.structural_shortcuts {
        tabulated_rows(basis, weights, bounds)
    } else {
        (0..=p3)
            .into_par_iter()
            .map(|j3| {
                let mut row = Vec::with_capacity((p1 + 1) * (p2 + 1));
                for j2 in 0..=p2 {
                    for j1 in 0..=p1 {
                        row.push(coeff_triple(basis, j1, j2, j3, weights)?);
                    }
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?
    };
    let values = rows.into_iter().flatten().collect();
    CoefficientTensor::from_values(*basis, weights, bounds, values)
}

/// Tabulates `ψ₂φ_{j2}`, `A_{j1}` and `B_{j3}` once on a grid that is exact
/// for the largest entry, then contracts per entry.
fn tabulated_rows<T: Scalar>(
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    (p1, p2, p3): (usize, usize, usize),
) -> Vec<Vec<T>> {
    let WeightExponents { l1, l2, l3 } = weights;
    let degree = p1 + p2 + p3 + weights.total() as usize + 2;
    let (xs, ws) = outer_grid(basis, degree, harmonic(p1) + harmonic(p2) + harmonic(p3));
    let end = basis.interval.end();

    let middle: Vec<Vec<T>> = (0..=p2)
        .map(|j2| {
            xs.iter()
                .zip(&ws)
                .map(|(&s, &w)| w * weight(basis, l2, s) * basis.phi_unchecked(j2, s))
                .collect()
        })
        .collect();
    let inner = basis.weighted_antiderivative_table(p1, l1, &xs);
    let outer_partial = basis.weighted_antiderivative_table(p3, l3, &xs);
    let outer: Vec<Vec<T>> = outer_partial
        .into_iter()
        .enumerate()
        .map(|(j3, row)| {
            let total = basis.weighted_antiderivative_unchecked(j3, l3, end);
            row.into_iter().map(|a| total - a).collect()
        })
        .collect();

    (0..=p3)
        .into_par_iter()
        .map(|j3| {
            let mut row = Vec::with_capacity((p1 + 1) * (p2 + 1));
            let b = &outer[j3];
            let mut mb = vec![T::zero(); xs.len()];
            for j2 in 0..=p2 {
                for (k, v) in mb.iter_mut().enumerate() {
                    *v = middle[j2][k] * b[k];
                }
                for j1 in 0..=p1 {
                    if is_structural_zero(basis.kind, weights, j3, j2, j1) {
                        row.push(T::zero());
                        continue;
                    }
                    let acc: CompensatedSum<T> = mb.iter().zip(&inner[j1]).map(|(&x, &a)| x * a).collect();
                    row.push(acc.value());
                }
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Interval;
    use approx::assert_abs_diff_eq;

    fn legendre(w: f64) -> BasisSpec<f64> {
        BasisSpec::legendre(Interval::new(0.0, w).unwrap())
    }

    #[test]
    fn single_coefficient_examples() {
        let b = legendre(1.7);
        assert_abs_diff_eq!(coeff_single(&b, 0, 0), 1.7f64.sqrt(), epsilon = 1e-14);
        for l in 0..4 {
            for j in (l as usize + 1)..(l as usize + 6) {
                assert_abs_diff_eq!(coeff_single(&b, j, l), 0.0, epsilon = 1e-13);
            }
        }
        // ∫_0^1 √3(2s-1)(-s) ds = -√3(2/3 - 1/2) = -1/(2√3)
        let oracle = -(3f64.sqrt()) * (2.0 / 3.0 - 0.5);
        assert_abs_diff_eq!(oracle, -1.0 / (2.0 * 3f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(coeff_single(&legendre(1.0), 1, 1), oracle, epsilon = 1e-15);
    }

    #[test]
    fn double_coefficient_examples() {
        let w: f64 = 2.3;
        let b = legendre(w);
        // (1/√w)² · w²/2
        assert_abs_diff_eq!(coeff_double(&b, 0, 0, (0, 0)), w / 2.0, epsilon = 1e-13);
        // ∫_0^1 √3(2s-1)·s ds = √3/6 = 1/(2√3)
        assert_abs_diff_eq!(coeff_double(&legendre(1.0), 0, 1, (0, 0)), 1.0 / (2.0 * 3f64.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn double_coefficients_integrate_by_parts() {
        for basis in [legendre(1.3), BasisSpec::trigonometric(Interval::new(0.0, 1.3).unwrap())] {
            for l in [(0, 0), (1, 1), (2, 0)] {
                for j1 in 0..6 {
                    for j2 in 0..6 {
                        if l.0 != l.1 {
                            continue;
                        }
                        let lhs = coeff_double(&basis, j1, j2, l) + coeff_double(&basis, j2, j1, l);
                        let rhs = coeff_single(&basis, j1, l.0) * coeff_single(&basis, j2, l.1);
                        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn triple_coefficient_known_constants() {
        let w: f64 = 1.9;
        let b = legendre(w);
        let s = w.powf(1.5);
        let c = |j1, j2, j3| coeff_triple(&b, j1, j2, j3, WeightExponents::CONSTANT).unwrap();
        assert_abs_diff_eq!(c(0, 0, 0), s / 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c(0, 0, 1), s / (4.0 * 3f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(c(1, 0, 0), -s / (4.0 * 3f64.sqrt()), epsilon = 1e-14);
        for j in 1..15usize {
            let jf = j as f64;
            let closed = s / (8.0 * (2.0 * jf + 1.0)) * (1.0 / (2.0 * jf + 3.0) + 1.0 / (2.0 * jf - 1.0));
            assert_abs_diff_eq!(c(j, j, 0), closed, epsilon = 1e-13);
        }
    }

    #[test]
    fn structural_zero_rules_are_sound() {
        let b = legendre(1.0);
        for w in [WeightExponents::CONSTANT, WeightExponents::new(1, 1, 0), WeightExponents::new(0, 2, 1)] {
            for j3 in 0..9 {
                for j2 in 0..9 {
                    for j1 in 0..9 {
                        if is_structural_zero(BasisKind::Legendre, w, j3, j2, j1) {
                            let v = coeff_triple(&b, j1, j2, j3, w).unwrap();
                            assert!(v.abs() < 1e-13, "C[{j3}][{j2}][{j1}] = {v} with {w:?}");
                        }
                    }
                }
            }
        }
        assert!(!is_structural_zero(BasisKind::Legendre, WeightExponents::CONSTANT, 1, 0, 0));
        assert!(!is_structural_zero(BasisKind::Legendre, WeightExponents::CONSTANT, 0, 0, 1));
        assert!(is_structural_zero(BasisKind::Legendre, WeightExponents::CONSTANT, 3, 1, 1));
        assert!(!is_structural_zero(BasisKind::Trigonometric, WeightExponents::CONSTANT, 3, 1, 1));
    }

    #[test]
    fn tensor_guards_cap() {
        let err = build_tensor(&legendre(1.0), WeightExponents::CONSTANT, (100, 100, 100)).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { requested: 100, cap: 64, .. }));
    }

    #[test]
    fn tensor_single_entry_and_parity() {
        let t = build_tensor(&legendre(1.0), WeightExponents::CONSTANT, (0, 0, 0)).unwrap();
        assert_eq!(t.len(), 1);
        assert_abs_diff_eq!(t.get(0, 0, 0), 1.0 / 6.0, epsilon = 1e-15);
        let t = build_tensor(&legendre(1.0), WeightExponents::CONSTANT, (2, 2, 2)).unwrap();
        for j in 1..=2 {
            assert_eq!(t.get(1, j, j), 0.0);
        }
    }

    #[test]
    fn tensor_accessors_and_sums() {
        let t = build_tensor(&legendre(1.0), WeightExponents::CONSTANT, (3, 3, 8)).unwrap();
        assert_eq!(t.try_get(9, 0, 0), None);
        assert_abs_diff_eq!(t.diagonal_sum_13(1, 3).unwrap(), 1.0 / (4.0 * 3f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(t.diagonal_sum_13(3, 3).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.diagonal_sum_23(2, 0).unwrap(), t.get(0, 0, 2), epsilon = 0.0);
        assert!(t.diagonal_sum_13(9, 1).is_err());
        assert!(t.residual_tail(3).unwrap() >= 0.0);
        let single = t.residual_tail(0).unwrap();
        assert_abs_diff_eq!(single, t.get(2, 0, 0).powi(2), epsilon = 1e-18);
        assert!(t.residual_tail(4).is_err());
    }

    #[test]
    fn f32_tensor_is_close_to_f64() {
        let b32 = BasisSpec::<f32>::legendre(Interval::unit());
        let t32 = build_tensor(&b32, WeightExponents::CONSTANT, (3, 3, 3)).unwrap();
        let t64 = build_tensor(&legendre(1.0), WeightExponents::CONSTANT, (3, 3, 3)).unwrap();
        for ((_, _, _, a), (_, _, _, b)) in t32.entries().zip(t64.entries()) {
            assert!((a as f64 - b).abs() < 1e-6);
        }
    }
}
