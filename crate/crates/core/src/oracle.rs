//! Fine-grid Wiener paths and reference values of iterated integrals.
//!
//! Itô references are strict left-point iterated sums accumulated in
//! `O(N)`. Stratonovich references add the half-trace corrections, whose
//! inner integrals are deterministic and evaluated exactly at the grid
//! points.
//!
//! Path dump format (little-endian): `t: f64, T: f64, N: u64, m: u64,
//! seed: u64`, then the `m × N` increments row-major as `f64`.

use std::io::{Read, Write};

use crate::basis::{power, BasisSpec, Interval};
use crate::error::{Error, Result};
use crate::expansion::{Calculus, IntegralSpec};
use crate::gaussians::{GaussianBlock, NormalStream, Provenance, StreamDomain};
use crate::scalar::{CompensatedSum, Scalar};

/// Increments of an `m`-dimensional Wiener process on the uniform grid
/// `τ_k = t + k·w/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath<T> {
    pub interval: Interval<T>,
    n: usize,
    m: usize,
    pub seed: u64,
    pub replica: u64,
    increments: Vec<T>,
}

impl<T: Scalar> WienerPath<T> {
    pub fn from_increments(interval: Interval<T>, n: usize, m: usize, seed: u64, increments: Vec<T>) -> Result<Self> {
        if n < 2 || m == 0 {
            return Err(Error::InvalidArgument(format!("a path needs N >= 2 and m >= 1, got N = {n}, m = {m}")));
        }
        if increments.len() != n * m {
            return Err(Error::InvalidArgument(format!(
                "{m} components of {n} steps need {} increments, got {}",
                n * m,
                increments.len()
            )));
        }
        Ok(Self {
            interval,
            n,
            m,
            seed,
            replica: 0,
            increments,
        })
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.m
    }

    pub fn step(&self) -> T {
        self.interval.width() / T::of(self.n)
    }

    /// Left endpoint of step `k`.
    #[inline]
    pub fn tau(&self, k: usize) -> T {
        self.interval.start() + self.interval.width() * (T::of(k) / T::of(self.n))
    }

    /// `ΔW^{(i)}_k` for all `k`, `i` 1-based.
    pub fn increments(&self, i: usize) -> &[T] {
        &self.increments[(i - 1) * self.n..i * self.n]
    }

    /// `W^{(i)}_T − W^{(i)}_t`.
    pub fn total(&self, i: usize) -> T {
        self.increments(i).iter().copied().collect::<CompensatedSum<T>>().value()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&self.interval.start().to_f64_lossy().to_le_bytes())?;
        out.write_all(&self.interval.end().to_f64_lossy().to_le_bytes())?;
        for v in [self.n as u64, self.m as u64, self.seed] {
            out.write_all(&v.to_le_bytes())?;
        }
        for x in &self.increments {
            out.write_all(&x.to_f64_lossy().to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |input: &mut R| -> Result<[u8; 8]> {
            input.read_exact(&mut word)?;
            Ok(word)
        };
        let t = f64::from_le_bytes(next(&mut input)?);
        let end = f64::from_le_bytes(next(&mut input)?);
        let n = u64::from_le_bytes(next(&mut input)?) as usize;
        let m = u64::from_le_bytes(next(&mut input)?) as usize;
        let seed = u64::from_le_bytes(next(&mut input)?);
        let count = n
            .checked_mul(m)
            .ok_or_else(|| Error::InvalidArgument("path header overflows".into()))?;
        let mut bytes = vec![0u8; count * 8];
        input.read_exact(&mut bytes)?;
        let increments = bytes
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("chunk of 8"))))
            .collect();
        Self::from_increments(Interval::new(T::lit(t), T::lit(end))?, n, m, seed, increments)
    }
}

pub fn simulate_path<T: Scalar>(interval: Interval<T>, n: usize, m: usize, seed: u64) -> Result<WienerPath<T>> {
    simulate_path_replica(interval, n, m, seed, 0)
}

/// Path for Monte Carlo replica `replica`. Component `i` depends only on
/// `(seed, replica, i)`, not on `m`.
pub fn simulate_path_replica<T: Scalar>(
    interval: Interval<T>,
    n: usize,
    m: usize,
    seed: u64,
    replica: u64,
) -> Result<WienerPath<T>> {
    if n < 2 || m == 0 {
        return Err(Error::InvalidArgument(format!("a path needs N >= 2 and m >= 1, got N = {n}, m = {m}")));
    }
    let scale = (interval.width() / T::of(n)).sqrt();
    let mut increments = vec![T::zero(); n * m];
    for (i, row) in increments.chunks_mut(n).enumerate() {
        let mut stream = NormalStream::new(seed, StreamDomain::Path, i + 1, replica);
        for x in row {
            *x = scale * T::lit(stream.next_normal());
        }
    }
    let mut path = WienerPath::from_increments(interval, n, m, seed, increments)?;
    path.replica = replica;
    Ok(path)
}

/// `φ_j(τ_k)` tabulated once for many paths on the same grid.
#[derive(Clone, Debug)]
pub struct PathGrid<T> {
    basis: BasisSpec<T>,
    n: usize,
    p_max: usize,
    phi: Vec<T>,
}

impl<T: Scalar> PathGrid<T> {
    /// Requires `p_max ≤ N/100`.
    pub fn new(basis: &BasisSpec<T>, n: usize, p_max: usize) -> Result<Self> {
        if n < 2 || p_max.saturating_mul(100) > n {
            return Err(Error::GridTooCoarse { p_max, n });
        }
        let cols = p_max + 1;
        let mut phi = vec![T::zero(); cols * n];
        let mut row = vec![T::zero(); cols];
        let mut anti = vec![T::zero(); cols];
        let mut scratch = Vec::new();
        let (t, w) = (basis.interval.start(), basis.width());
        for k in 0..n {
            let tau = t + w * (T::of(k) / T::of(n));
            basis.eval_all(tau, &mut row, &mut anti, &mut scratch);
            for (j, &v) in row.iter().enumerate() {
                phi[j * n + k] = v;
            }
        }
        Ok(Self {
            basis: *basis,
            n,
            p_max,
            phi,
        })
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    fn column(&self, j: usize) -> &[T] {
        &self.phi[j * self.n..(j + 1) * self.n]
    }
}

/// `ζ_j^{(i)} = Σ_k φ_j(τ_k) ΔW_k^{(i)}` for every component of the path.
pub fn zeta_from_path<T: Scalar>(path: &WienerPath<T>, basis: &BasisSpec<T>, p_max: usize) -> Result<GaussianBlock<T>> {
    zeta_from_path_on(&PathGrid::new(basis, path.n, p_max)?, path)
}

pub fn zeta_from_path_on<T: Scalar>(grid: &PathGrid<T>, path: &WienerPath<T>) -> Result<GaussianBlock<T>> {
    if grid.n != path.n || grid.basis.interval != path.interval {
        return Err(Error::Mismatch(format!(
            "basis grid has {} steps on [{}, {}], path has {} on [{}, {}]",
            grid.n,
            grid.basis.interval.start(),
            grid.basis.interval.end(),
            path.n,
            path.interval.start(),
            path.interval.end()
        )));
    }
    let mut values = Vec::with_capacity(path.m * (grid.p_max + 1));
    for i in 1..=path.m {
        let dw = path.increments(i);
        for j in 0..=grid.p_max {
            let acc: CompensatedSum<T> = grid.column(j).iter().zip(dw).map(|(&f, &d)| f * d).collect();
            values.push(acc.value());
        }
    }
    let mut block = GaussianBlock::from_values(path.m, grid.p_max, values, Provenance::FromPath)?;
    block.seed = path.seed;
    block.replica = path.replica;
    Ok(block)
}

fn check_components<T: Scalar>(path: &WienerPath<T>, spec: &IntegralSpec<T>) -> Result<()> {
    if spec.dimension() > path.m {
        return Err(Error::Mismatch(format!(
            "integral uses component {} but the path has {}",
            spec.dimension(),
            path.m
        )));
    }
    if spec.basis.interval != path.interval {
        return Err(Error::Mismatch("integral and path live on different intervals".into()));
    }
    Ok(())
}

/// Left-point iterated Itô sum, e.g. for multiplicity 3
/// `Σ_{k3} ψ₃ΔW^{(i3)} Σ_{k2<k3} ψ₂ΔW^{(i2)} Σ_{k1<k2} ψ₁ΔW^{(i1)}`.
pub fn iterated_ito_reference<T: Scalar>(path: &WienerPath<T>, spec: &IntegralSpec<T>) -> Result<T> {
    check_components(path, spec)?;
    let t = path.interval.start();
    let ls = [spec.weights.l1, spec.weights.l2, spec.weights.l3];
    let k = spec.multiplicity();
    let rows: Vec<&[T]> = (1..=k).map(|level| path.increments(spec.component(level))).collect();
    // prefix[level] holds the iterated sum of the first `level` integrals over
    // all steps strictly before the current one.
    let mut prefix = [CompensatedSum::<T>::new(); 4];
    prefix[0].add(T::one());
    for step in 0..path.n {
        let tau = path.tau(step);
        for level in (1..=k).rev() {
            let psi = power(t - tau, ls[level - 1]);
            let inc = psi * rows[level - 1][step] * prefix[level - 1].value();
            prefix[level].add(inc);
        }
    }
    Ok(prefix[k].value())
}

/// An Itô reference together with the half-trace terms that convert it to
/// Stratonovich.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceParts<T> {
    pub ito: T,
    /// Applies when `i1 = i2`.
    pub correction_12: T,
    /// Applies when `i2 = i3` (triple integrals only).
    pub correction_23: T,
}

impl<T: Scalar> ReferenceParts<T> {
    pub fn stratonovich(&self) -> T {
        self.ito + self.correction_12 + self.correction_23
    }
}

/// Itô reference and the corrections that apply to `spec`'s components;
/// corrections whose indicator is off are zero.
pub fn reference_parts<T: Scalar>(path: &WienerPath<T>, spec: &IntegralSpec<T>) -> Result<ReferenceParts<T>> {
    let ito = iterated_ito_reference(path, spec)?;
    let t = path.interval.start();
    let end = path.interval.end();
    let half = T::lit(0.5);
    let crate::coefficients::WeightExponents { l1, l2, l3 } = spec.weights;
    let mut parts = ReferenceParts {
        ito,
        correction_12: T::zero(),
        correction_23: T::zero(),
    };
    match spec.multiplicity() {
        2 if spec.component(1) == spec.component(2) => {
            // ½∫_t^T (t-s)^{l1+l2} ds
            let l = l1 + l2 + 1;
            parts.correction_12 = -half * power(t - end, l) / T::of(l as usize);
        }
        3 => {
            if spec.component(1) == spec.component(2) {
                // ½∫ψ₃(s) D(s) dW^{(i3)}, D(s) = ∫_t^s (t-u)^{l1+l2} du
                let l = l1 + l2 + 1;
                let lp = T::of(l as usize);
                let dw = path.increments(spec.component(3));
                let acc: CompensatedSum<T> = (0..path.n)
                    .map(|k| {
                        let x = t - path.tau(k);
                        power(x, l3) * (-power(x, l) / lp) * dw[k]
                    })
                    .collect();
                parts.correction_12 = half * acc.value();
            }
            if spec.component(2) == spec.component(3) {
                // ½∫ψ₁(s) F(s) dW^{(i1)}, F(s) = ∫_s^T (t-u)^{l2+l3} du
                let l = l2 + l3 + 1;
                let lp = T::of(l as usize);
                let tail = power(t - end, l);
                let dw = path.increments(spec.component(1));
                let acc: CompensatedSum<T> = (0..path.n)
                    .map(|k| {
                        let x = t - path.tau(k);
                        power(x, l1) * ((power(x, l) - tail) / lp) * dw[k]
                    })
                    .collect();
                parts.correction_23 = half * acc.value();
            }
        }
        _ => {}
    }
    Ok(parts)
}

/// Itô reference plus the half-trace corrections.
pub fn iterated_strat_reference<T: Scalar>(path: &WienerPath<T>, spec: &IntegralSpec<T>) -> Result<T> {
    Ok(reference_parts(path, spec)?.stratonovich())
}

/// Reference in the calculus requested by `spec`.
pub fn iterated_reference<T: Scalar>(path: &WienerPath<T>, spec: &IntegralSpec<T>) -> Result<T> {
    match spec.calculus {
        Calculus::Ito => iterated_ito_reference(path, spec),
        Calculus::Stratonovich => iterated_strat_reference(path, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::WeightExponents;
    use approx::assert_abs_diff_eq;

    fn unit() -> Interval<f64> {
        Interval::unit()
    }

    fn spec(calculus: Calculus, i: &[usize], l: WeightExponents) -> IntegralSpec<f64> {
        IntegralSpec::new(calculus, i, l, BasisSpec::legendre(unit())).unwrap()
    }

    #[test]
    fn simulation_is_reproducible() {
        let a = simulate_path(unit(), 1000, 2, 17).unwrap();
        let b = simulate_path(unit(), 1000, 2, 17).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(unit(), 1000, 1, 17).unwrap();
        assert_eq!(a.increments(1), c.increments(1));
        assert!(simulate_path::<f64>(unit(), 1, 1, 0).is_err());
    }

    #[test]
    fn grid_is_uniform() {
        let p = simulate_path(Interval::new(0.5, 2.5).unwrap(), 8, 1, 0).unwrap();
        assert_eq!(p.tau(0), 0.5);
        assert_eq!(p.tau(8), 2.5);
        assert_abs_diff_eq!((0..8).map(|k| p.tau(k + 1) - p.tau(k)).sum::<f64>(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_variation_concentrates() {
        let n = 100_000;
        let p = simulate_path(unit(), n, 1, 3).unwrap();
        let qv: f64 = p.increments(1).iter().map(|d| d * d).sum();
        assert!((qv - 1.0).abs() < 3.0 / (n as f64).sqrt(), "qv {qv}");
    }

    #[test]
    fn zeta_zero_telescopes() {
        let w: f64 = 1.5;
        let interval = Interval::new(0.0, w).unwrap();
        let path = simulate_path(interval, 1000, 2, 4).unwrap();
        let block = zeta_from_path(&path, &BasisSpec::legendre(interval), 3).unwrap();
        assert_eq!(block.provenance, Provenance::FromPath);
        for i in 1..=2 {
            assert_abs_diff_eq!(block.zeta(i, 0), path.total(i) / w.sqrt(), epsilon = 1e-13);
        }
        assert!(matches!(
            zeta_from_path(&path, &BasisSpec::legendre(interval), 11),
            Err(Error::GridTooCoarse { p_max: 11, n: 1000 })
        ));
    }

    #[test]
    fn single_integral_is_the_total_increment() {
        let path = simulate_path(unit(), 500, 1, 9).unwrap();
        let v = iterated_ito_reference(&path, &spec(Calculus::Ito, &[1], WeightExponents::CONSTANT)).unwrap();
        assert_abs_diff_eq!(v, path.total(1), epsilon = 1e-14);
    }

    #[test]
    fn repeated_component_sums_are_algebraic() {
        // Strict left-point sums over a single component satisfy exact
        // discrete identities in the increments.
        let path = simulate_path(unit(), 2000, 1, 21).unwrap();
        let dw = path.increments(1);
        let s1: f64 = dw.iter().sum();
        let s2: f64 = dw.iter().map(|d| d * d).sum();
        let s3: f64 = dw.iter().map(|d| d * d * d).sum();
        let double = iterated_ito_reference(&path, &spec(Calculus::Ito, &[1, 1], WeightExponents::CONSTANT)).unwrap();
        assert_abs_diff_eq!(double, 0.5 * (s1 * s1 - s2), epsilon = 1e-12);
        let triple = iterated_ito_reference(&path, &spec(Calculus::Ito, &[1, 1, 1], WeightExponents::CONSTANT)).unwrap();
        let e3 = (s1.powi(3) - 3.0 * s1 * s2 + 2.0 * s3) / 6.0;
        assert_abs_diff_eq!(triple, e3, epsilon = 1e-12);
    }

    #[test]
    fn stratonovich_triple_of_one_component_is_a_cube() {
        let n = 200_000;
        let path = simulate_path(unit(), n, 1, 5).unwrap();
        let v = iterated_strat_reference(&path, &spec(Calculus::Stratonovich, &[1, 1, 1], WeightExponents::CONSTANT))
            .unwrap();
        let w = path.total(1);
        assert!((v - w.powi(3) / 6.0).abs() < 10.0 / (n as f64).sqrt(), "{v} vs {}", w.powi(3) / 6.0);
    }

    #[test]
    fn conversion_adds_exactly_the_corrections() {
        let path = simulate_path(unit(), 5000, 3, 2).unwrap();
        let dw3 = path.increments(3);
        let s = spec(Calculus::Stratonovich, &[1, 1, 3], WeightExponents::CONSTANT);
        let parts = reference_parts(&path, &s).unwrap();
        let manual: f64 = (0..path.steps()).map(|k| 0.5 * path.tau(k) * dw3[k]).sum();
        assert_abs_diff_eq!(parts.correction_12, manual, epsilon = 1e-13);
        assert_eq!(parts.correction_23, 0.0);
        let distinct = spec(Calculus::Stratonovich, &[1, 2, 3], WeightExponents::CONSTANT);
        let ito = spec(Calculus::Ito, &[1, 2, 3], WeightExponents::CONSTANT);
        assert_eq!(
            iterated_strat_reference(&path, &distinct).unwrap(),
            iterated_ito_reference(&path, &ito).unwrap()
        );
    }

    #[test]
    fn dump_round_trips() {
        let path = simulate_path(Interval::new(-1.0, 0.5).unwrap(), 64, 2, 77).unwrap();
        let mut buf = Vec::new();
        path.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 40 + 2 * 64 * 8);
        let back = WienerPath::<f64>::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.increments, path.increments);
        assert_eq!(back.seed, 77);
        assert!(WienerPath::<f64>::read_from(&buf[..50]).is_err());
    }
}
