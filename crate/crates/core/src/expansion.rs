//! Truncated expansions of single, double and triple Itô and Stratonovich
//! integrals in the independent normals `ζ_j^{(i)}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{power, BasisKind, BasisSpec};
use crate::coefficients::{build_tensor, coeff_double, coeff_single, CoefficientTensor, WeightExponents};
use crate::error::{Error, Result};
use crate::gaussians::GaussianBlock;
use crate::oracle::{iterated_reference, simulate_path_replica, zeta_from_path_on, PathGrid};
use crate::quadrature::{CompositeRule, GaussLegendre};
use crate::scalar::{CompensatedSum, Scalar};

/// Harmonics kept in the trigonometric series of the double integrals
/// with one time differential.
pub const DEFAULT_TRIG_HARMONICS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    Ito,
    Stratonovich,
}

/// Which iterated integral is being expanded.
///
/// `components[k]` is the Wiener component (1-based) of the `k`-th
/// innermost differential. Weight exponents beyond the multiplicity are
/// ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralSpec<T> {
    pub calculus: Calculus,
    components: Vec<usize>,
    pub weights: WeightExponents,
    pub basis: BasisSpec<T>,
}

impl<T: Scalar> IntegralSpec<T> {
    /// Validates the shape and, for triple Stratonovich integrals, that the
    /// combination of weights and components has a proven expansion.
    pub fn new(
        calculus: Calculus,
        components: &[usize],
        weights: WeightExponents,
        basis: BasisSpec<T>,
    ) -> Result<Self> {
        if components.is_empty() || components.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "multiplicity must be 1, 2 or 3, got {}",
                components.len()
            )));
        }
        if components.contains(&0) {
            return Err(Error::InvalidArgument("Wiener components are numbered from 1".into()));
        }
        let weights = match components.len() {
            1 => WeightExponents::new(weights.l1, 0, 0),
            2 => WeightExponents::new(weights.l1, weights.l2, 0),
            _ => weights,
        };
        if calculus == Calculus::Stratonovich && components.len() == 3 {
            check_stratonovich_case(basis.kind, weights, components)?;
        }
        Ok(Self {
            calculus,
            components: components.to_vec(),
            weights,
            basis,
        })
    }

    pub fn multiplicity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[usize] {
        &self.components
    }

    /// Component of the `k`-th differential, `k` 1-based.
    pub fn component(&self, k: usize) -> usize {
        self.components[k - 1]
    }

    /// Largest component index, i.e. the dimension the oracle must simulate.
    pub fn dimension(&self) -> usize {
        self.components.iter().copied().max().unwrap_or(1)
    }
}

/// Combinations for which the triple Stratonovich series is known to
/// converge in mean square.
///
/// Legendre: pairwise distinct components with any weights;
/// `i1 = i2 ≠ i3` with `l1 = l2 ≠ l3`; `i1 ≠ i2 = i3` with `l1 ≠ l2 = l3`;
/// or any components with `l1 = l2 = l3`. Trigonometric: constant weights.
pub fn check_stratonovich_case(kind: BasisKind, weights: WeightExponents, components: &[usize]) -> Result<()> {
    let WeightExponents { l1, l2, l3 } = weights;
    let (i1, i2, i3) = (components[0], components[1], components[2]);
    let proven = match kind {
        BasisKind::Trigonometric => weights.is_constant(),
        BasisKind::Legendre => {
            let distinct = i1 != i2 && i2 != i3 && i1 != i3;
            let case2 = i1 == i2 && i2 != i3 && l1 == l2 && l2 != l3;
            let case3 = i1 != i2 && i2 == i3 && l1 != l2 && l2 == l3;
            let equal_weights = l1 == l2 && l2 == l3;
            distinct || case2 || case3 || equal_weights
        }
    };
    if proven {
        Ok(())
    } else {
        Err(Error::UnprovenCase(format!(
            "{kind} basis, components ({i1}, {i2}, {i3}), weights ({l1}, {l2}, {l3})"
        )))
    }
}

/// Inclusive upper summation limits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationOrder {
    pub p1: usize,
    pub p2: usize,
    pub p3: usize,
}

impl TruncationOrder {
    pub const fn new(p1: usize, p2: usize, p3: usize) -> Self {
        Self { p1, p2, p3 }
    }

    pub const fn uniform(p: usize) -> Self {
        Self { p1: p, p2: p, p3: p }
    }

    pub fn max(&self) -> usize {
        self.p1.max(self.p2).max(self.p3)
    }
}

fn check_tensor<T: Scalar>(tensor: &CoefficientTensor<T>, spec: &IntegralSpec<T>, p: TruncationOrder) -> Result<()> {
    if spec.multiplicity() != 3 {
        return Err(Error::Mismatch(format!(
            "a triple coefficient tensor cannot expand an integral of multiplicity {}",
            spec.multiplicity()
        )));
    }
    if tensor.basis != spec.basis || tensor.weights != spec.weights {
        return Err(Error::Mismatch(format!(
            "tensor is for {} basis with {:?}, integral needs {} basis with {:?}",
            tensor.basis.kind, tensor.weights, spec.basis.kind, spec.weights
        )));
    }
    let (b1, b2, b3) = tensor.bounds;
    if p.p1 > b1 || p.p2 > b2 || p.p3 > b3 {
        return Err(Error::TruncationExceedsTensor {
            p1: p.p1,
            p2: p.p2,
            p3: p.p3,
            b1,
            b2,
            b3,
        });
    }
    Ok(())
}

fn check_block<T: Scalar>(block: &GaussianBlock<T>, spec: &IntegralSpec<T>, needed: usize) -> Result<()> {
    if spec.dimension() > block.m() {
        return Err(Error::InsufficientBlock {
            required: spec.dimension(),
            available: block.m(),
        });
    }
    block.require(needed)
}

/// Triple Itô integral truncated at `p`, with the three indicator
/// corrections for coinciding components and indices.
pub fn ito_triple_truncated<T: Scalar>(
    tensor: &CoefficientTensor<T>,
    block: &GaussianBlock<T>,
    spec: &IntegralSpec<T>,
    p: TruncationOrder,
) -> Result<T> {
    if spec.calculus != Calculus::Ito {
        return Err(Error::Mismatch("Itô expansion requested for a Stratonovich integral".into()));
    }
    check_tensor(tensor, spec, p)?;
    check_block(block, spec, p.max())?;
    let (i1, i2, i3) = (spec.component(1), spec.component(2), spec.component(3));
    let (z1, z2, z3) = (block.row(i1), block.row(i2), block.row(i3));
    let mut acc = CompensatedSum::new();
    for j3 in 0..=p.p3 {
        for j2 in 0..=p.p2 {
            for j1 in 0..=p.p1 {
                let c = tensor.get(j3, j2, j1);
                if c == T::zero() {
                    continue;
                }
                let mut term = z1[j1] * z2[j2] * z3[j3];
                if i1 == i2 && j1 == j2 {
                    term -= z3[j3];
                }
                if i2 == i3 && j2 == j3 {
                    term -= z1[j1];
                }
                if i1 == i3 && j1 == j3 {
                    term -= z2[j2];
                }
                acc.add(c * term);
            }
        }
    }
    Ok(acc.value())
}

/// Triple Stratonovich integral truncated at `p`: the plain product series.
pub fn strat_triple_truncated<T: Scalar>(
    tensor: &CoefficientTensor<T>,
    block: &GaussianBlock<T>,
    spec: &IntegralSpec<T>,
    p: TruncationOrder,
) -> Result<T> {
    if spec.calculus != Calculus::Stratonovich {
        return Err(Error::Mismatch("Stratonovich expansion requested for an Itô integral".into()));
    }
    check_tensor(tensor, spec, p)?;
    check_block(block, spec, p.max())?;
    let (z1, z2, z3) = (block.row(spec.component(1)), block.row(spec.component(2)), block.row(spec.component(3)));
    let mut acc = CompensatedSum::new();
    for j3 in 0..=p.p3 {
        for j2 in 0..=p.p2 {
            let outer = z2[j2] * z3[j3];
            for j1 in 0..=p.p1 {
                let c = tensor.get(j3, j2, j1);
                if c != T::zero() {
                    acc.add(c * z1[j1] * outer);
                }
            }
        }
    }
    Ok(acc.value())
}

/// Converts a triple Itô value to Stratonovich by adding the half-trace
/// corrections that apply to the component pattern of `spec`.
pub fn strat_from_ito<T: Scalar>(ito_value: T, correction_12: T, correction_23: T, spec: &IntegralSpec<T>) -> T {
    let mut v = ito_value;
    if spec.multiplicity() == 3 {
        if spec.component(1) == spec.component(2) {
            v += correction_12;
        }
        if spec.component(2) == spec.component(3) {
            v += correction_23;
        }
    }
    v
}

/// Order of the time and Wiener differentials in a double integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `½∫_t^T ∫_t^s ds₁ dW_s = ½∫_t^T (s - t) dW_s`.
    DsDw,
    /// `½∫_t^T ∫_t^s dW_{s₁} ds = ½∫_t^T (T - s) dW_s`.
    DwDs,
}

/// Closed-form expansion of the constant-weight double integral with one
/// time differential on component `i`.
///
/// Legendre: `¼w^{3/2}(ζ₀ ± ζ₁/√3)`. Trigonometric:
/// `¼w^{3/2}(ζ₀ ∓ (√2/π) Σ_{r ≤ harmonics} ζ_{2r-1}/r)`; `harmonics` is
/// ignored for Legendre.
pub fn double_time_expansion<T: Scalar>(
    block: &GaussianBlock<T>,
    i: usize,
    basis: &BasisSpec<T>,
    orientation: Orientation,
    harmonics: usize,
) -> Result<T> {
    if i == 0 || i > block.m() {
        return Err(Error::InsufficientBlock {
            required: i,
            available: block.m(),
        });
    }
    let quarter = basis.width().powf(T::lit(1.5)) / T::lit(4.0);
    let sign = match orientation {
        Orientation::DsDw => T::one(),
        Orientation::DwDs => -T::one(),
    };
    let z = block.row(i);
    match basis.kind {
        BasisKind::Legendre => {
            block.require(1)?;
            Ok(quarter * (z[0] + sign * z[1] / T::lit(3.0).sqrt()))
        }
        BasisKind::Trigonometric => {
            if harmonics > 0 {
                block.require(2 * harmonics - 1)?;
            }
            let series: CompensatedSum<T> = (1..=harmonics).map(|r| z[2 * r - 1] / T::of(r)).collect();
            Ok(quarter * (z[0] - sign * T::SQRT_2() / T::PI() * series.value()))
        }
    }
}

/// `∫_t^T g(s) φ_j(s) ds` for `j < count`, exact for Legendre when `g` is a
/// polynomial of degree at most `degree`.
fn project<T: Scalar, G: Fn(T) -> T>(basis: &BasisSpec<T>, g: G, degree: usize, count: usize) -> Vec<T> {
    let (a, b) = (basis.interval.start(), basis.interval.end());
    let (xs, ws) = match basis.kind {
        BasisKind::Legendre => GaussLegendre::for_degree(degree + count).mapped(a, b),
        BasisKind::Trigonometric => {
            let omega = basis.max_angular_frequency(count.max(2));
            CompositeRule::for_frequency(omega, basis.width()).mapped(a, b)
        }
    };
    let mut acc = vec![CompensatedSum::new(); count];
    let mut phi = vec![T::zero(); count];
    let mut anti = vec![T::zero(); count];
    let mut scratch = Vec::new();
    for (&x, &w) in xs.iter().zip(&ws) {
        basis.eval_all(x, &mut phi, &mut anti, &mut scratch);
        let gx = w * g(x);
        for (a, &f) in acc.iter_mut().zip(&phi) {
            a.add(gx * f);
        }
    }
    acc.into_iter().map(|a| a.value()).collect()
}

/// Basis coefficients of the two half-trace integrals of a triple
/// integral: `½∫ψ₃(s)(∫_t^s ψ₁ψ₂)dW^{(i3)}_s` for [`Orientation::DsDw`] and
/// `½∫ψ₁(s)(∫_s^T ψ₂ψ₃)dW^{(i1)}_s` for [`Orientation::DwDs`].
///
/// For Legendre the expansion is finite and `count` beyond
/// `l1 + l2 + l3 + 2` only adds zeros.
pub fn correction_coefficients<T: Scalar>(
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    orientation: Orientation,
    count: usize,
) -> Vec<T> {
    let WeightExponents { l1, l2, l3 } = weights;
    let t = basis.interval.start();
    let end = basis.interval.end();
    let half = T::lit(0.5);
    match orientation {
        Orientation::DsDw => {
            let l = l1 + l2;
            let lp = T::of(l as usize + 1);
            let g = |s: T| half * power(t - s, l3) * (-power(t - s, l + 1) / lp);
            project(basis, g, (l + l3 + 1) as usize, count)
        }
        Orientation::DwDs => {
            let l = l2 + l3;
            let lp = T::of(l as usize + 1);
            let g = |s: T| half * power(t - s, l1) * (power(t - s, l + 1) - power(t - end, l + 1)) / lp;
            project(basis, g, (l + l1 + 1) as usize, count)
        }
    }
}

/// Half-trace corrections `(c12, c23)` of a triple integral, expanded in
/// the block's normals on components `i3` and `i1` respectively.
///
/// Constant weights use [`double_time_expansion`] with `harmonics` terms
/// for the trigonometric series. Weighted Legendre integrals use their
/// finite exact expansion.
pub fn stratonovich_corrections<T: Scalar>(
    block: &GaussianBlock<T>,
    spec: &IntegralSpec<T>,
    harmonics: usize,
) -> Result<(T, T)> {
    if spec.multiplicity() != 3 {
        return Err(Error::InvalidArgument("half-trace corrections need a triple integral".into()));
    }
    check_block(block, spec, 0)?;
    let (i1, i3) = (spec.component(1), spec.component(3));
    if spec.weights.is_constant() {
        return Ok((
            double_time_expansion(block, i3, &spec.basis, Orientation::DsDw, harmonics)?,
            double_time_expansion(block, i1, &spec.basis, Orientation::DwDs, harmonics)?,
        ));
    }
    if spec.basis.kind != BasisKind::Legendre {
        return Err(Error::UnprovenCase("weighted trigonometric corrections".into()));
    }
    let count = spec.weights.total() as usize + 3;
    block.require(count - 1)?;
    let dot = |coeffs: Vec<T>, z: &[T]| -> T { coeffs.iter().zip(z).map(|(&c, &x)| c * x).collect::<CompensatedSum<T>>().value() };
    let c12 = dot(correction_coefficients(&spec.basis, spec.weights, Orientation::DsDw, count), block.row(i3));
    let c23 = dot(correction_coefficients(&spec.basis, spec.weights, Orientation::DwDs, count), block.row(i1));
    Ok((c12, c23))
}

/// Coefficients of an expansion of multiplicity 1, 2 or 3.
#[derive(Clone, Debug, PartialEq)]
pub enum ExpansionCoefficients<T> {
    Single(Vec<T>),
    /// Row-major `[j2][j1]` with inclusive bounds `(p1, p2)`.
    Double { bounds: (usize, usize), values: Vec<T> },
    Triple(CoefficientTensor<T>),
}

impl<T: Scalar> ExpansionCoefficients<T> {
    pub fn build(spec: &IntegralSpec<T>, p: TruncationOrder) -> Result<Self> {
        let WeightExponents { l1, l2, .. } = spec.weights;
        let basis = &spec.basis;
        Ok(match spec.multiplicity() {
            1 => Self::Single((0..=p.p1).map(|j| coeff_single(basis, j, l1)).collect()),
            2 => {
                let values = (0..=p.p2)
                    .into_par_iter()
                    .flat_map_iter(|j2| (0..=p.p1).map(move |j1| coeff_double(basis, j1, j2, (l1, l2))))
                    .collect();
                Self::Double {
                    bounds: (p.p1, p.p2),
                    values,
                }
            }
            _ => Self::Triple(build_tensor(basis, spec.weights, (p.p1, p.p2, p.p3))?),
        })
    }
}

/// Samples the truncated expansion of `spec` from `block`.
pub fn truncated<T: Scalar>(
    coefficients: &ExpansionCoefficients<T>,
    block: &GaussianBlock<T>,
    spec: &IntegralSpec<T>,
    p: TruncationOrder,
) -> Result<T> {
    match (coefficients, spec.multiplicity()) {
        (ExpansionCoefficients::Single(c), 1) => {
            if p.p1 >= c.len() {
                return Err(Error::TruncationExceedsTensor {
                    p1: p.p1,
                    p2: 0,
                    p3: 0,
                    b1: c.len().saturating_sub(1),
                    b2: 0,
                    b3: 0,
                });
            }
            check_block(block, spec, p.p1)?;
            let z = block.row(spec.component(1));
            Ok((0..=p.p1).map(|j| c[j] * z[j]).collect::<CompensatedSum<T>>().value())
        }
        (ExpansionCoefficients::Double { bounds, values }, 2) => {
            let (b1, b2) = *bounds;
            if p.p1 > b1 || p.p2 > b2 {
                return Err(Error::TruncationExceedsTensor {
                    p1: p.p1,
                    p2: p.p2,
                    p3: 0,
                    b1,
                    b2,
                    b3: 0,
                });
            }
            check_block(block, spec, p.p1.max(p.p2))?;
            let (i1, i2) = (spec.component(1), spec.component(2));
            let (z1, z2) = (block.row(i1), block.row(i2));
            let ito = spec.calculus == Calculus::Ito && i1 == i2;
            let mut acc = CompensatedSum::new();
            for j2 in 0..=p.p2 {
                for j1 in 0..=p.p1 {
                    let mut term = z1[j1] * z2[j2];
                    if ito && j1 == j2 {
                        term -= T::one();
                    }
                    acc.add(values[j2 * (b1 + 1) + j1] * term);
                }
            }
            Ok(acc.value())
        }
        (ExpansionCoefficients::Triple(tensor), 3) => match spec.calculus {
            Calculus::Ito => ito_triple_truncated(tensor, block, spec, p),
            Calculus::Stratonovich => strat_triple_truncated(tensor, block, spec, p),
        },
        _ => Err(Error::Mismatch(format!(
            "coefficients do not fit an integral of multiplicity {}",
            spec.multiplicity()
        ))),
    }
}

/// Monte Carlo mean-square error with a normal-approximation 95%
/// half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseEstimate {
    pub mse: f64,
    pub ci95: f64,
    pub trials: usize,
}

impl MseEstimate {
    /// Summarizes per-trial differences `truncated - reference`.
    pub fn from_differences(diffs: &[f64]) -> Result<Self> {
        let n = diffs.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 trials, got {n}")));
        }
        let squares: Vec<f64> = diffs.iter().map(|d| d * d).collect();
        let mean = squares.iter().sum::<f64>() / n as f64;
        let var = squares.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Ok(Self {
            mse: mean,
            ci95: 1.96 * (var / n as f64).sqrt(),
            trials: n,
        })
    }
}

/// `E[(truncated − reference)²]` over `trials` independent paths on a grid
/// of `grid` steps, with `ζ` extracted from each path.
pub fn mean_square_error<T: Scalar>(
    spec: &IntegralSpec<T>,
    p: TruncationOrder,
    trials: usize,
    grid: usize,
    seed: u64,
) -> Result<MseEstimate> {
    let replicas: Vec<u64> = (0..trials as u64).collect();
    mean_square_error_replicas(spec, p, grid, seed, &replicas)
}

/// As [`mean_square_error`], over an explicit list of path replicas.
pub fn mean_square_error_replicas<T: Scalar>(
    spec: &IntegralSpec<T>,
    p: TruncationOrder,
    grid: usize,
    seed: u64,
    replicas: &[u64],
) -> Result<MseEstimate> {
    let coefficients = ExpansionCoefficients::build(spec, p)?;
    mse_with_coefficients(&coefficients, spec, p, grid, seed, replicas)
}

pub(crate) fn mse_with_coefficients<T: Scalar>(
    coefficients: &ExpansionCoefficients<T>,
    spec: &IntegralSpec<T>,
    p: TruncationOrder,
    grid: usize,
    seed: u64,
    replicas: &[u64],
) -> Result<MseEstimate> {
    if replicas.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 trials, got {}", replicas.len())));
    }
    let p_max = p.max();
    let table = PathGrid::new(&spec.basis, grid, p_max)?;
    let diffs = replicas
        .par_iter()
        .map(|&r| {
            let path = simulate_path_replica(spec.basis.interval, grid, spec.dimension(), seed, r)?;
            let block = zeta_from_path_on(&table, &path)?;
            let approx = truncated(coefficients, &block, spec, p)?;
            let reference = iterated_reference(&path, spec)?;
            Ok((approx - reference).to_f64_lossy())
        })
        .collect::<Result<Vec<f64>>>()?;
    MseEstimate::from_differences(&diffs)
}
