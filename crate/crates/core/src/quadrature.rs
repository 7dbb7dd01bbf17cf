//! Gauss–Legendre and adaptive Gauss–Kronrod quadrature.
//!
//! Legendre-basis coefficient integrands are polynomials, so a single
//! Gauss–Legendre rule of sufficient order integrates them exactly up to
//! rounding. Trigonometric integrands are entire but oscillatory; those go
//! through a composite rule sized from the highest frequency, or through the
//! adaptive G7–K15 driver when an error estimate is needed.

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// An `n`-point Gauss–Legendre rule on the reference interval [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// Builds the rule by Newton iteration on `P_n`, starting from the
    /// Tricomi asymptotic guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        let half = n.div_ceil(2);
        for i in 0..half {
            // Work in f64 for the iteration itself, then refine once in T.
            let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let mut xt = T::lit(x);
            if T::epsilon() < T::lit(f64::EPSILON) * T::lit(0.5) {
                // Extended-precision scalar: polish in T.
                for _ in 0..3 {
                    let (p, dp) = legendre_with_derivative_t(n, xt);
                    xt = xt - p / dp;
                }
            }
            let (_, dp) = legendre_with_derivative_t(n, xt);
            let w = T::lit(2.0) / ((T::one() - xt * xt) * dp * dp);
            nodes[i] = -xt;
            nodes[n - 1 - i] = xt;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    /// Smallest rule that integrates polynomials of `degree` exactly.
    pub fn for_degree(degree: usize) -> Self {
        Self::new(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn reference_nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn reference_weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> (Vec<T>, Vec<T>) {
        let half = (b - a) * T::lit(0.5);
        let mid = a + half;
        let xs = self.nodes.iter().map(|&x| mid + half * x).collect();
        let ws = self.weights.iter().map(|&w| half * w).collect();
        (xs, ws)
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = a + half;
        let acc: CompensatedSum<T> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .collect();
        acc.value() * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

fn legendre_with_derivative_t<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 1..n {
        let kf = T::of(k);
        let p2 = ((kf + kf + T::one()) * x * p1 - kf * p0) / (kf + T::one());
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    (p1, T::of(n) * (x * p1 - p0) / (x * x - T::one()))
}

/// Composite Gauss–Legendre: `panels` equal sub-intervals, one rule each.
#[derive(Clone, Debug)]
pub struct CompositeRule<T> {
    rule: GaussLegendre<T>,
    panels: usize,
}

impl<T: Scalar> CompositeRule<T> {
    pub fn new(points_per_panel: usize, panels: usize) -> Self {
        Self {
            rule: GaussLegendre::new(points_per_panel),
            panels: panels.max(1),
        }
    }

    /// Rule resolving `exp(i·ω·s)` on an interval of length `width` to
    /// near machine precision: 20 points per panel, panels of phase ≤ 4.
    pub fn for_frequency(omega: T, width: T) -> Self {
        let phase = (omega.abs() * width).to_f64_lossy();
        let panels = (phase / 4.0).ceil().max(1.0) as usize;
        Self::new(20, panels)
    }

    pub fn mapped(&self, a: T, b: T) -> (Vec<T>, Vec<T>) {
        let h = (b - a) / T::of(self.panels);
        let mut xs = Vec::with_capacity(self.panels * self.rule.len());
        let mut ws = Vec::with_capacity(self.panels * self.rule.len());
        for k in 0..self.panels {
            let lo = a + h * T::of(k);
            let (x, w) = self.rule.mapped(lo, lo + h);
            xs.extend(x);
            ws.extend(w);
        }
        (xs, ws)
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let (xs, ws) = self.mapped(a, b);
        let acc: CompensatedSum<T> = xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).collect();
        acc.value()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = a + half;
    let fc = f(mid);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for k in 0..7 {
        let dx = half * T::lit(XGK[k]);
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += pair * T::lit(WGK[k]);
        if k % 2 == 1 {
            gauss += pair * T::lit(WG[k / 2]);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive G7–K15 with global bisection of the worst interval.
///
/// Returns the integral or `QuadratureNonConvergence` carrying the
/// achieved error estimate once `max_intervals` is exhausted.
pub fn adaptive_gauss_kronrod<T, F>(
    mut f: F,
    a: T,
    b: T,
    tolerance: T,
    max_intervals: usize,
) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total_err: T = pieces.iter().map(|p| p.3).sum();
        if total_err <= tolerance {
            let acc: CompensatedSum<T> = pieces.iter().map(|p| p.2).collect();
            return Ok(acc.value());
        }
        if pieces.len() >= max_intervals {
            return Err(Error::QuadratureNonConvergence {
                achieved: total_err.to_f64_lossy(),
                requested: tolerance.to_f64_lossy(),
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (k, p)| {
                if p.3 > best.1 {
                    (k, p.3)
                } else {
                    best
                }
            });
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let m = (lo + hi) * T::lit(0.5);
        let (v1, e1) = gk15(&mut f, lo, m);
        let (v2, e2) = gk15(&mut f, m, hi);
        pieces.push((lo, m, v1, e1));
        pieces.push((m, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_rule_is_exact_to_its_degree() {
        for n in [1usize, 2, 5, 17, 64] {
            let rule = GaussLegendre::<f64>::new(n);
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
            assert_abs_diff_eq!(got, exact, epsilon = 1e-13);
            let even = deg - 1;
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(even as i32));
            assert_abs_diff_eq!(got, 2.0 / (even as f64 + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn weights_sum_to_two_for_large_rules() {
        for n in [200usize, 1600] {
            let rule = GaussLegendre::<f64>::new(n);
            let s: f64 = rule.reference_weights().iter().sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-12);
            assert!(rule.reference_nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn mapped_rule_integrates_on_shifted_interval() {
        let rule = GaussLegendre::<f64>::for_degree(3);
        assert_eq!(rule.len(), 2);
        let got = rule.integrate(1.0, 3.0, |x| x * x * x);
        assert_abs_diff_eq!(got, (81.0 - 1.0) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn composite_rule_resolves_high_frequency() {
        let omega = 2.0 * std::f64::consts::PI * 300.0;
        let rule = CompositeRule::for_frequency(omega, 1.0);
        let got = rule.integrate(0.0, 1.0, |x| (omega * x + 0.3).cos() * x);
        // ∫ x cos(ωx+c) = [x sin/ω + cos/ω²]
        let exact = ((omega + 0.3).sin()) / omega + ((omega + 0.3).cos() - 0.3f64.cos()) / (omega * omega);
        assert_abs_diff_eq!(got, exact, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_converges_on_smooth_integrand() {
        let got = adaptive_gauss_kronrod(|x: f64| (10.0 * x).sin().powi(2), 0.0, 2.0, 1e-12, 1000).unwrap();
        let exact = 1.0 - (40.0f64).sin() / 40.0;
        assert_abs_diff_eq!(got, exact, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let err = adaptive_gauss_kronrod(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-14, 4)
            .unwrap_err();
        match err {
            Error::QuadratureNonConvergence { achieved, .. } => assert!(achieved > 1e-14),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn f32_rule_is_usable() {
        let rule = GaussLegendre::<f32>::new(8);
        let got = rule.integrate(0.0, 1.0, |x| x * x);
        assert!((got - 1.0 / 3.0).abs() < 1e-6);
    }
}
