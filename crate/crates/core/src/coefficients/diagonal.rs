//! Diagonal partial sums straight from the basis, without materializing a
//! tensor. These reach truncation orders far beyond the tensor cap.

use crate::basis::{BasisKind, BasisSpec, Scratch};
use crate::coefficients::{weight, WeightExponents};
use crate::quadrature::{CompositeRule, GaussLegendre};
use crate::scalar::{CompensatedSum, Scalar};

/// Which pair of indices is tied together in the partial sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalFamily {
    /// `Σ_{j ≤ p} C_{k j j}` for each free outer index `k`.
    Outer,
    /// `Σ_{j ≤ p} C_{j j k}` for each free inner index `k`.
    Inner,
    /// `Σ_{j ≤ p} C_{j k j}` for each free middle index `k`.
    Middle,
}

/// Partial sums of one diagonal family for every free index `k ≤ max_free`.
///
/// Returns a vector of length `max_free + 1`. The sum over `j` is folded
/// into one function of the middle variable before integrating, so the
/// cost is `O(nodes · (p + max_free))`.
pub fn diagonal_profile<T: Scalar>(
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    family: DiagonalFamily,
    p: usize,
    max_free: usize,
) -> Vec<T> {
    let WeightExponents { l1, l2, l3 } = weights;
    let jmax = p.max(max_free);
    let (xs, ws) = match basis.kind {
        BasisKind::Legendre => {
            let degree = 2 * p + max_free + weights.total() as usize + 2;
            GaussLegendre::for_degree(degree).mapped(basis.interval.start(), basis.interval.end())
        }
        BasisKind::Trigonometric => {
            let harmonics = 2 * p.div_ceil(2) + max_free.div_ceil(2) + 1;
            let omega = T::lit(2.0) * T::PI() * T::of(harmonics) / basis.width();
            CompositeRule::for_frequency(omega, basis.width()).mapped(basis.interval.start(), basis.interval.end())
        }
    };
    let end = basis.interval.end();
    let outer_totals: Vec<T> = (0..=jmax)
        .map(|j| basis.weighted_antiderivative_unchecked(j, l3, end))
        .collect();

    let n = jmax + 1;
    let mut phi = vec![T::zero(); n];
    let mut anti = vec![T::zero(); n];
    let mut inner = vec![T::zero(); n];
    let mut tail = vec![T::zero(); n];
    let mut poly = Vec::new();
    let mut scratch = Scratch::default();
    let mut sums: Vec<CompensatedSum<T>> = vec![CompensatedSum::new(); max_free + 1];

    for (&x, &wx) in xs.iter().zip(&ws) {
        basis.eval_all(x, &mut phi, &mut anti, &mut poly);
        basis.weighted_antiderivatives_at(l1, x, &mut inner, &mut scratch);
        basis.weighted_antiderivatives_at(l3, x, &mut tail, &mut scratch);
        for (b, total) in tail.iter_mut().zip(&outer_totals) {
            *b = *total - *b;
        }
        let g = wx * weight(basis, l2, x);
        match family {
            DiagonalFamily::Outer => {
                let folded: CompensatedSum<T> = (0..=p).map(|j| phi[j] * inner[j]).collect();
                let f = g * folded.value();
                for (k, acc) in sums.iter_mut().enumerate() {
                    acc.add(f * tail[k]);
                }
            }
            DiagonalFamily::Inner => {
                let folded: CompensatedSum<T> = (0..=p).map(|j| phi[j] * tail[j]).collect();
                let f = g * folded.value();
                for (k, acc) in sums.iter_mut().enumerate() {
                    acc.add(f * inner[k]);
                }
            }
            DiagonalFamily::Middle => {
                let folded: CompensatedSum<T> = (0..=p).map(|j| inner[j] * tail[j]).collect();
                let f = g * folded.value();
                for (k, acc) in sums.iter_mut().enumerate() {
                    acc.add(f * phi[k]);
                }
            }
        }
    }
    sums.into_iter().map(|s| s.value()).collect()
}

/// `Σ_{j3 even, 2 ≤ j3 ≤ 2p+2} (Σ_{j1 ≤ p} C_{j3 j1 j1})²` without a tensor.
pub fn residual_tail_direct<T: Scalar>(basis: &BasisSpec<T>, weights: WeightExponents, p: usize) -> T {
    let top = 2 * p + 2;
    let profile = diagonal_profile(basis, weights, DiagonalFamily::Outer, p, top);
    let acc: CompensatedSum<T> = (2..=top).step_by(2).map(|k| profile[k] * profile[k]).collect();
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Interval;
    use crate::coefficients::build_tensor;
    use approx::assert_abs_diff_eq;

    #[test]
    fn profiles_match_tensor_sums() {
        for basis in [
            BasisSpec::legendre(Interval::new(0.0, 1.4).unwrap()),
            BasisSpec::trigonometric(Interval::new(0.0, 1.4).unwrap()),
        ] {
            for weights in [WeightExponents::CONSTANT, WeightExponents::new(1, 0, 2)] {
                let t = build_tensor(&basis, weights, (6, 6, 6)).unwrap();
                let outer = diagonal_profile(&basis, weights, DiagonalFamily::Outer, 5, 6);
                let inner = diagonal_profile(&basis, weights, DiagonalFamily::Inner, 5, 6);
                let middle = diagonal_profile(&basis, weights, DiagonalFamily::Middle, 5, 6);
                for k in 0..=6 {
                    let o: f64 = (0..=5).map(|j| t.get(k, j, j)).sum();
                    let i: f64 = (0..=5).map(|j| t.get(j, j, k)).sum();
                    let m: f64 = (0..=5).map(|j| t.get(j, k, j)).sum();
                    assert_abs_diff_eq!(outer[k], o, epsilon = 1e-13);
                    assert_abs_diff_eq!(inner[k], i, epsilon = 1e-13);
                    assert_abs_diff_eq!(middle[k], m, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn residual_tail_direct_matches_tensor() {
        let basis = BasisSpec::<f64>::legendre(Interval::unit());
        let t = build_tensor(&basis, WeightExponents::CONSTANT, (4, 4, 10)).unwrap();
        for p in 0..=4 {
            assert_abs_diff_eq!(
                residual_tail_direct(&basis, WeightExponents::CONSTANT, p),
                t.residual_tail(p).unwrap(),
                epsilon = 1e-16
            );
        }
    }
}
