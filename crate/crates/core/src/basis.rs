//! Complete orthonormal systems of L₂([t, T]): shifted Legendre
//! polynomials and the trigonometric system.
//!
//! Trigonometric indexing: `φ_0 = 1/√w`, `φ_{2r-1} = √(2/w)·sin(2πr(s-t)/w)`,
//! `φ_{2r} = √(2/w)·cos(2πr(s-t)/w)` for `r ≥ 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{CompositeRule, GaussLegendre};
use crate::scalar::Scalar;

/// The integration window `[t, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    t: T,
    end: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(t: T, end: T) -> Result<Self> {
        if !(end > t) || !t.is_finite() || !end.is_finite() {
            return Err(Error::InvalidInterval {
                t: t.to_f64_lossy(),
                end: end.to_f64_lossy(),
            });
        }
        Ok(Self { t, end })
    }

    /// `[0, 1]`.
    pub fn unit() -> Self {
        Self {
            t: T::zero(),
            end: T::one(),
        }
    }

    #[inline]
    pub fn start(&self) -> T {
        self.t
    }

    #[inline]
    pub fn end(&self) -> T {
        self.end
    }

    #[inline]
    pub fn width(&self) -> T {
        self.end - self.t
    }

    /// Affine map onto [-1, 1], written as `2(s-t)/w - 1` so points near
    /// `t` do not suffer cancellation.
    #[inline]
    pub fn to_reference(&self, s: T) -> T {
        T::lit(2.0) * (s - self.t) / self.width() - T::one()
    }

    pub fn contains(&self, s: T) -> bool {
        s >= self.t && s <= self.end
    }

    fn check(&self, s: T) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::OutOfInterval {
                s: s.to_f64_lossy(),
                t: self.t.to_f64_lossy(),
                end: self.end.to_f64_lossy(),
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Legendre,
    #[serde(alias = "trig")]
    Trigonometric,
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisKind::Legendre => f.write_str("legendre"),
            BasisKind::Trigonometric => f.write_str("trigonometric"),
        }
    }
}

/// Which orthonormal system is in force on which interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec<T> {
    pub kind: BasisKind,
    pub interval: Interval<T>,
}

/// `P_n(y)` by the upward Bonnet recurrence.
pub fn legendre_p<T: Scalar>(n: usize, y: T) -> T {
    let mut p0 = T::one();
    if n == 0 {
        return p0;
    }
    let mut p1 = y;
    for k in 1..n {
        let kf = T::of(k);
        let p2 = ((kf + kf + T::one()) * y * p1 - kf * p0) / (kf + T::one());
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Fills `out[n] = P_n(y)` for `n < out.len()`.
pub fn legendre_table<T: Scalar>(y: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    out[0] = T::one();
    if out.len() > 1 {
        out[1] = y;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = T::of(k);
        out[k + 1] = ((kf + kf + T::one()) * y * out[k] - kf * out[k - 1]) / (kf + T::one());
    }
}

#[inline]
fn trig_frequency(j: usize) -> usize {
    j.div_ceil(2)
}

impl<T: Scalar> BasisSpec<T> {
    pub fn new(kind: BasisKind, interval: Interval<T>) -> Self {
        Self { kind, interval }
    }

    pub fn legendre(interval: Interval<T>) -> Self {
        Self::new(BasisKind::Legendre, interval)
    }

    pub fn trigonometric(interval: Interval<T>) -> Self {
        Self::new(BasisKind::Trigonometric, interval)
    }

    #[inline]
    pub fn width(&self) -> T {
        self.interval.width()
    }

    /// `φ_j(s)`; rejects points outside the interval.
    pub fn phi(&self, j: usize, s: T) -> Result<T> {
        self.interval.check(s)?;
        Ok(self.phi_unchecked(j, s))
    }

    /// `∫_t^s φ_j(u) du` in closed form.
    pub fn phi_antiderivative(&self, j: usize, s: T) -> Result<T> {
        self.interval.check(s)?;
        Ok(self.antiderivative_unchecked(j, s))
    }

    pub(crate) fn phi_unchecked(&self, j: usize, s: T) -> T {
        let w = self.width();
        match self.kind {
            BasisKind::Legendre => {
                let z = self.interval.to_reference(s);
                (T::of(2 * j + 1) / w).sqrt() * legendre_p(j, z)
            }
            BasisKind::Trigonometric => {
                if j == 0 {
                    return T::one() / w.sqrt();
                }
                let angle = self.angle(j, s);
                let amp = (T::lit(2.0) / w).sqrt();
                if j % 2 == 1 {
                    amp * angle.sin()
                } else {
                    amp * angle.cos()
                }
            }
        }
    }

    pub(crate) fn antiderivative_unchecked(&self, j: usize, s: T) -> T {
        let w = self.width();
        let t = self.interval.start();
        match self.kind {
            BasisKind::Legendre => {
                if j == 0 {
                    return (s - t) / w.sqrt();
                }
                let z = self.interval.to_reference(s);
                let mut p = vec![T::zero(); j + 2];
                legendre_table(z, &mut p);
                w.sqrt() / (T::lit(2.0) * T::of(2 * j + 1).sqrt()) * (p[j + 1] - p[j - 1])
            }
            BasisKind::Trigonometric => {
                if j == 0 {
                    return (s - t) / w.sqrt();
                }
                let k = self.angular_frequency(j);
                let angle = self.angle(j, s);
                let amp = (T::lit(2.0) / w).sqrt();
                if j % 2 == 1 {
                    // 1 - cos x = 2 sin²(x/2) avoids cancellation near s = t.
                    let h = (angle * T::lit(0.5)).sin();
                    amp * T::lit(2.0) * h * h / k
                } else {
                    amp * angle.sin() / k
                }
            }
        }
    }

    /// `2πr/w` for trig index `j`.
    fn angular_frequency(&self, j: usize) -> T {
        T::lit(2.0) * T::PI() * T::of(trig_frequency(j)) / self.width()
    }

    fn angle(&self, j: usize, s: T) -> T {
        let r = T::of(trig_frequency(j));
        T::lit(2.0) * T::PI() * r * ((s - self.interval.start()) / self.width())
    }

    /// Highest angular frequency among `φ_0..=φ_jmax` (zero for Legendre).
    pub(crate) fn max_angular_frequency(&self, jmax: usize) -> T {
        match self.kind {
            BasisKind::Legendre => T::zero(),
            BasisKind::Trigonometric => self.angular_frequency(jmax.max(1)),
        }
    }

    /// Fills `phi[j] = φ_j(s)` and `anti[j] = ∫_t^s φ_j` for `j < phi.len()`.
    pub(crate) fn eval_all(&self, s: T, phi: &mut [T], anti: &mut [T], scratch: &mut Vec<T>) {
        let n = phi.len();
        debug_assert_eq!(anti.len(), n);
        let w = self.width();
        let t = self.interval.start();
        match self.kind {
            BasisKind::Legendre => {
                scratch.resize(n + 1, T::zero());
                let z = self.interval.to_reference(s);
                legendre_table(z, scratch);
                let sw = w.sqrt();
                for j in 0..n {
                    let c = T::of(2 * j + 1);
                    phi[j] = (c / w).sqrt() * scratch[j];
                    anti[j] = if j == 0 {
                        (s - t) / sw
                    } else {
                        sw / (T::lit(2.0) * c.sqrt()) * (scratch[j + 1] - scratch[j - 1])
                    };
                }
            }
            BasisKind::Trigonometric => {
                for j in 0..n {
                    phi[j] = self.phi_unchecked(j, s);
                    anti[j] = self.antiderivative_unchecked(j, s);
                }
            }
        }
    }

    /// `∫_t^s (t-u)^l φ_j(u) du`.
    ///
    /// Closed form for `l = 0`; otherwise Gauss–Legendre (exact for the
    /// polynomial Legendre integrand) or a frequency-resolving composite
    /// rule for the trigonometric one.
    pub fn weighted_antiderivative(&self, j: usize, l: u32, s: T) -> Result<T> {
        self.interval.check(s)?;
        Ok(self.weighted_antiderivative_unchecked(j, l, s))
    }

    pub(crate) fn weighted_antiderivative_unchecked(&self, j: usize, l: u32, s: T) -> T {
        if l == 0 {
            return self.antiderivative_unchecked(j, s);
        }
        let t = self.interval.start();
        if s <= t {
            return T::zero();
        }
        let f = |u: T| power(t - u, l) * self.phi_unchecked(j, u);
        match self.kind {
            BasisKind::Legendre => GaussLegendre::for_degree(j + l as usize).integrate(t, s, f),
            BasisKind::Trigonometric => {
                CompositeRule::for_frequency(self.max_angular_frequency(j), s - t).integrate(t, s, f)
            }
        }
    }

    /// `out[j] = ∫_t^x (t-u)^l φ_j(u) du` for `j < out.len()`.
    pub(crate) fn weighted_antiderivatives_at(&self, l: u32, x: T, out: &mut [T], scratch: &mut Scratch<T>) {
        let n = out.len();
        scratch.phi.resize(n, T::zero());
        scratch.anti.resize(n, T::zero());
        if l == 0 {
            self.eval_all(x, &mut scratch.phi, out, &mut scratch.poly);
            return;
        }
        out.iter_mut().for_each(|v| *v = T::zero());
        let t = self.interval.start();
        if x <= t || n == 0 {
            return;
        }
        let (us, ws) = match self.kind {
            BasisKind::Legendre => GaussLegendre::for_degree(n - 1 + l as usize).mapped(t, x),
            BasisKind::Trigonometric => {
                CompositeRule::for_frequency(self.max_angular_frequency(n - 1), x - t).mapped(t, x)
            }
        };
        for (&u, &wu) in us.iter().zip(&ws) {
            self.eval_all(u, &mut scratch.phi, &mut scratch.anti, &mut scratch.poly);
            let g = wu * power(t - u, l);
            for (o, &p) in out.iter_mut().zip(scratch.phi.iter()) {
                *o += g * p;
            }
        }
    }

    /// `out[j][k] = ∫_t^{xs[k]} (t-u)^l φ_j(u) du` for every `j ≤ jmax`.
    pub(crate) fn weighted_antiderivative_table(&self, jmax: usize, l: u32, xs: &[T]) -> Vec<Vec<T>> {
        let n = jmax + 1;
        let mut out = vec![vec![T::zero(); xs.len()]; n];
        let mut col = vec![T::zero(); n];
        let mut scratch = Scratch::default();
        for (k, &x) in xs.iter().enumerate() {
            self.weighted_antiderivatives_at(l, x, &mut col, &mut scratch);
            for j in 0..n {
                out[j][k] = col[j];
            }
        }
        out
    }
}

/// Reusable buffers for batched basis evaluation.
#[derive(Debug, Default)]
pub(crate) struct Scratch<T> {
    phi: Vec<T>,
    anti: Vec<T>,
    poly: Vec<T>,
}

#[inline]
pub(crate) fn power<T: Scalar>(x: T, l: u32) -> T {
    x.powi(l as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(kind: BasisKind) -> BasisSpec<f64> {
        BasisSpec::new(kind, Interval::unit())
    }

    #[test]
    fn interval_rejects_degenerate_width() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::NAN).is_err());
        assert!(Interval::new(-0.5, 0.25).is_ok());
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert_abs_diff_eq!(legendre_p(5, 1.0), 1.0, epsilon = 1e-15);
        let y: f64 = 0.5;
        let explicit = (35.0 * y.powi(4) - 30.0 * y * y + 3.0) / 8.0;
        assert_abs_diff_eq!(explicit, -0.2890625, epsilon = 1e-15);
        assert_abs_diff_eq!(legendre_p(4, y), explicit, epsilon = 1e-15);
    }

    #[test]
    fn legendre_parity_and_endpoint() {
        for n in 0..60 {
            assert_abs_diff_eq!(legendre_p(n, 1.0), 1.0, epsilon = 1e-12);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(legendre_p(n, -1.0), sign, epsilon = 1e-12);
        }
    }

    #[test]
    fn phi_examples() {
        let leg = BasisSpec::legendre(Interval::new(0.5, 2.5).unwrap());
        let w: f64 = 2.0;
        for s in [0.5, 1.1, 2.5] {
            assert_abs_diff_eq!(leg.phi(0, s).unwrap(), 1.0 / w.sqrt(), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(leg.phi(1, 1.5).unwrap(), 0.0, epsilon = 1e-15);
        let trig = unit(BasisKind::Trigonometric);
        assert_abs_diff_eq!(trig.phi(1, 0.25).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(trig.phi(2, 0.25).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn out_of_interval_is_rejected() {
        let leg = unit(BasisKind::Legendre);
        assert!(matches!(leg.phi(2, 1.5), Err(Error::OutOfInterval { .. })));
        assert!(matches!(leg.phi_antiderivative(2, -0.1), Err(Error::OutOfInterval { .. })));
        assert!(leg.weighted_antiderivative(1, 2, 1.01).is_err());
    }

    #[test]
    fn antiderivative_examples() {
        let spec = BasisSpec::legendre(Interval::new(-1.0, 2.0).unwrap());
        for j in 1..20 {
            assert_abs_diff_eq!(spec.phi_antiderivative(j, 2.0).unwrap(), 0.0, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(spec.phi_antiderivative(0, 2.0).unwrap(), 3f64.sqrt(), epsilon = 1e-14);

        // φ_2 on [0,1] integrated to the midpoint by an adaptive oracle.
        let unit = unit(BasisKind::Legendre);
        let oracle = crate::quadrature::adaptive_gauss_kronrod(
            |u| unit.phi_unchecked(2, u),
            0.0,
            0.5,
            1e-14,
            200,
        )
        .unwrap();
        assert_abs_diff_eq!(unit.phi_antiderivative(2, 0.5).unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn trig_antiderivative_matches_quadrature() {
        let spec = BasisSpec::trigonometric(Interval::new(0.0, 1.7).unwrap());
        for j in 0..12 {
            for s in [0.0, 0.3, 1.0, 1.7] {
                let q = GaussLegendre::new(40).integrate(0.0, s, |u| spec.phi_unchecked(j, u));
                assert_abs_diff_eq!(spec.phi_antiderivative(j, s).unwrap(), q, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn weighted_antiderivative_matches_unweighted_at_l0_and_polynomial_case() {
        let spec = unit(BasisKind::Legendre);
        // ∫_0^s (-u) φ_0 du = -s²/2
        assert_abs_diff_eq!(spec.weighted_antiderivative(0, 1, 0.6).unwrap(), -0.18, epsilon = 1e-15);
        for j in 0..6 {
            assert_abs_diff_eq!(
                spec.weighted_antiderivative(j, 0, 0.4).unwrap(),
                spec.phi_antiderivative(j, 0.4).unwrap(),
                epsilon = 1e-15
            );
        }
        let table = spec.weighted_antiderivative_table(5, 2, &[0.0, 0.3, 1.0]);
        for j in 0..=5 {
            for (k, &x) in [0.0, 0.3, 1.0].iter().enumerate() {
                assert_abs_diff_eq!(
                    table[j][k],
                    spec.weighted_antiderivative(j, 2, x).unwrap(),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn eval_all_agrees_with_pointwise() {
        for kind in [BasisKind::Legendre, BasisKind::Trigonometric] {
            let spec = BasisSpec::new(kind, Interval::new(0.2, 1.9).unwrap());
            let mut phi = vec![0.0; 15];
            let mut anti = vec![0.0; 15];
            let mut scratch = Vec::new();
            spec.eval_all(1.234, &mut phi, &mut anti, &mut scratch);
            for j in 0..15 {
                assert_abs_diff_eq!(phi[j], spec.phi(j, 1.234).unwrap(), epsilon = 1e-13);
                assert_abs_diff_eq!(anti[j], spec.phi_antiderivative(j, 1.234).unwrap(), epsilon = 1e-13);
            }
        }
    }
}
