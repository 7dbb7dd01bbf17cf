//! Checkable claims about the coefficients and expansions: identity suites,
//! convergence tables and residual-rate reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisKind, BasisSpec};
use crate::coefficients::{
    build_tensor, coeff_single, coeff_triple, diagonal_profile, is_structural_zero, residual_tail_direct,
    trig_coeff_closed, CoefficientTensor, DiagonalFamily, WeightExponents,
};
use crate::error::{Error, Result};
use crate::expansion::{
    correction_coefficients, mse_with_coefficients, Calculus, ExpansionCoefficients, IntegralSpec, Orientation,
    TruncationOrder,
};
use crate::scalar::{CompensatedSum, Scalar};

/// Which limit statement a [`ConvergenceReport`] tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    DiagonalSum13,
    DiagonalSum23,
    VanishingMiddle,
    ResidualTail,
    Mse,
    ParsevalDeficit,
}

impl Claim {
    pub fn family(self) -> Option<DiagonalFamily> {
        match self {
            Claim::DiagonalSum13 => Some(DiagonalFamily::Outer),
            Claim::DiagonalSum23 => Some(DiagonalFamily::Inner),
            Claim::VanishingMiddle => Some(DiagonalFamily::Middle),
            _ => None,
        }
    }
}

/// Configuration a report was computed for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSetting {
    pub basis: BasisKind,
    pub t: f64,
    #[serde(rename = "T")]
    pub end: f64,
    pub weights: WeightExponents,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calculus: Option<Calculus>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<usize>,
}

impl ReportSetting {
    pub fn new<T: Scalar>(basis: &BasisSpec<T>, weights: WeightExponents) -> Self {
        Self {
            basis: basis.kind,
            t: basis.interval.start().to_f64_lossy(),
            end: basis.interval.end().to_f64_lossy(),
            weights,
            calculus: None,
            components: Vec::new(),
        }
    }

    pub fn for_integral<T: Scalar>(spec: &IntegralSpec<T>) -> Self {
        Self {
            calculus: Some(spec.calculus),
            components: spec.components().to_vec(),
            ..Self::new(&spec.basis, spec.weights)
        }
    }
}

fn decreasing<'a>(rows: impl Iterator<Item = &'a ConvergenceRow>, floor: f64) -> bool {
    let rows: Vec<_> = rows.collect();
    rows.windows(2)
        .all(|w| w[1].statistic < w[0].statistic || w[1].statistic <= floor)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub p: TruncationOrder,
    pub statistic: f64,
    pub ci95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub setting: ReportSetting,
    pub claim: Claim,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln statistic` against `ln p` over rows with
    /// positive `p` and statistic; absent with fewer than two such rows.
    pub slope: Option<f64>,
    /// Statistics at or below this level are rounding noise around an
    /// already attained limit.
    pub floor: f64,
    /// Each row is below its predecessor or at the floor.
    pub strictly_decreasing: bool,
}

impl ConvergenceReport {
    fn new(setting: ReportSetting, claim: Claim, rows: Vec<ConvergenceRow>, floor: f64) -> Self {
        let slope = loglog_slope(&rows);
        let strictly_decreasing = decreasing(rows.iter(), floor);
        Self {
            setting,
            claim,
            rows,
            slope,
            floor,
            strictly_decreasing,
        }
    }

    /// Whether the statistic keeps decreasing from `p = from` onwards.
    pub fn decreasing_beyond(&self, from: usize) -> bool {
        decreasing(self.rows.iter().filter(|r| r.p.p1 >= from), self.floor)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["p1", "p2", "p3", "statistic", "ci95"])?;
        for r in &self.rows {
            out.write_record([
                r.p.p1.to_string(),
                r.p.p2.to_string(),
                r.p.p3.to_string(),
                format_f64(r.statistic),
                format_f64(r.ci95),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

fn loglog_slope(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.p.p1 > 0 && r.statistic > 0.0)
        .map(|r| ((r.p.p1 as f64).ln(), r.statistic.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn check_increasing(p_list: &[usize]) -> Result<()> {
    if p_list.is_empty() {
        return Err(Error::InvalidArgument("empty list of truncation orders".into()));
    }
    if p_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("truncation orders must increase: {p_list:?}")));
    }
    Ok(())
}

/// Limit of the diagonal partial sums of `family` at free index `k`.
///
/// `Σ_j C_{k j j} → ½∫ψ₃(s)(∫_t^s ψ₁ψ₂)φ_k(s) ds`,
/// `Σ_j C_{j j k} → ½∫ψ₁(s)(∫_s^T ψ₂ψ₃)φ_k(s) ds`, `Σ_j C_{j k j} → 0`.
pub fn diagonal_limit<T: Scalar>(basis: &BasisSpec<T>, weights: WeightExponents, family: DiagonalFamily, k: usize) -> T {
    match family {
        DiagonalFamily::Outer => correction_coefficients(basis, weights, Orientation::DsDw, k + 1)[k],
        DiagonalFamily::Inner => correction_coefficients(basis, weights, Orientation::DwDs, k + 1)[k],
        DiagonalFamily::Middle => T::zero(),
    }
}

/// `|Σ_{j ≤ p} − limit|` of one diagonal family at free index `k`, per `p`.
pub fn diagonal_convergence<T: Scalar>(
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    claim: Claim,
    k: usize,
    p_list: &[usize],
) -> Result<ConvergenceReport> {
    check_increasing(p_list)?;
    let family = claim
        .family()
        .ok_or_else(|| Error::InvalidArgument(format!("{claim:?} is not a diagonal-sum claim")))?;
    let limit = diagonal_limit(basis, weights, family, k);
    let rows = p_list
        .iter()
        .map(|&p| {
            let s = diagonal_profile(basis, weights, family, p, k)[k];
            ConvergenceRow {
                p: TruncationOrder::uniform(p),
                statistic: (s - limit).abs().to_f64_lossy(),
                ci95: 0.0,
            }
        })
        .collect();
    let floor = 1e-13 * weights.triple_scale(basis.width()).to_f64_lossy();
    Ok(ConvergenceReport::new(ReportSetting::new(basis, weights), claim, rows, floor))
}

/// `Σ_{j3 even, 2 ≤ j3 ≤ 2p+2} (Σ_{j1 ≤ p} C_{j3 j1 j1})²` for each `p`.
pub fn residual_rate<T: Scalar>(
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    p_list: &[usize],
) -> Result<ConvergenceReport> {
    check_increasing(p_list)?;
    let rows = p_list
        .iter()
        .map(|&p| ConvergenceRow {
            p: TruncationOrder::uniform(p),
            statistic: residual_tail_direct(basis, weights, p).to_f64_lossy(),
            ci95: 0.0,
        })
        .collect();
    let scale = weights.triple_scale(basis.width()).to_f64_lossy();
    let floor = 1e-26 * scale * scale;
    Ok(ConvergenceReport::new(ReportSetting::new(basis, weights), Claim::ResidualTail, rows, floor))
}

/// `(s - t) - Σ_{j ≤ p} (∫_t^s φ_j)²`.
pub fn parseval_deficit<T: Scalar>(basis: &BasisSpec<T>, s: T, p: usize) -> Result<T> {
    let mut acc = CompensatedSum::new();
    for j in 0..=p {
        let a = basis.phi_antiderivative(j, s)?;
        acc.add(a * a);
    }
    Ok(s - basis.interval.start() - acc.value())
}

/// Parseval deficit at `s = t + fraction·w` for each `p`.
pub fn parseval_report<T: Scalar>(basis: &BasisSpec<T>, fraction: T, p_list: &[usize]) -> Result<ConvergenceReport> {
    check_increasing(p_list)?;
    let s = basis.interval.start() + fraction * basis.width();
    let rows = p_list
        .iter()
        .map(|&p| {
            Ok(ConvergenceRow {
                p: TruncationOrder::uniform(p),
                statistic: parseval_deficit(basis, s, p)?.to_f64_lossy(),
                ci95: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(
        ReportSetting::new(basis, WeightExponents::CONSTANT),
        Claim::ParsevalDeficit,
        rows,
        1e-14 * basis.width().to_f64_lossy(),
    ))
}

/// Coupled-path mean-square error of the truncated expansion for each
/// uniform truncation order in `p_list`. The same paths are reused for
/// every order.
pub fn mse_study<T: Scalar>(
    spec: &IntegralSpec<T>,
    p_list: &[usize],
    trials: usize,
    grid: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    check_increasing(p_list)?;
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 trials, got {trials}")));
    }
    let p_top = TruncationOrder::uniform(*p_list.last().expect("non-empty"));
    let coefficients = ExpansionCoefficients::build(spec, p_top)?;
    let replicas: Vec<u64> = (0..trials as u64).collect();
    let rows = p_list
        .iter()
        .map(|&p| {
            let p = TruncationOrder::uniform(p);
            let e = mse_with_coefficients(&coefficients, spec, p, grid, seed, &replicas)?;
            Ok(ConvergenceRow {
                p,
                statistic: e.mse,
                ci95: e.ci95,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(ReportSetting::for_integral(spec), Claim::Mse, rows, 0.0))
}

/// Outcome of one identity over all the cases it was checked on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn from_errors(name: &str, errors: impl IntoIterator<Item = f64>, tolerance: f64) -> Self {
        let mut cases = 0;
        let mut max_error: f64 = 0.0;
        let mut finite = true;
        for e in errors {
            cases += 1;
            finite &= e.is_finite();
            max_error = max_error.max(e);
        }
        Self {
            name: name.to_string(),
            cases,
            max_error,
            tolerance,
            passed: finite && max_error <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub setting: ReportSetting,
    pub max_index: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["name", "cases", "max_error", "tolerance", "passed"])?;
        for c in &self.checks {
            out.write_record([
                c.name.clone(),
                c.cases.to_string(),
                format_f64(c.max_error),
                format_f64(c.tolerance),
                c.passed.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Adds `delta` to one tensor entry before the identities are checked;
/// a negative control for the suite itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    pub j3: usize,
    pub j2: usize,
    pub j1: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub perturbation: Option<Perturbation>,
    /// Truncation orders for the diagonal-limit envelope checks.
    pub envelope_orders: Vec<usize>,
    /// Largest free index in the diagonal-limit checks.
    pub diagonal_free_max: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            perturbation: None,
            envelope_orders: vec![8, 16, 32, 64, 128],
            diagonal_free_max: 4,
        }
    }
}

/// Runs every identity that applies to `(basis, weights)` on a tensor with
/// all indices up to `max_index`.
pub fn identity_suite<T: Scalar>(
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    max_index: usize,
) -> Result<IdentityReport> {
    identity_suite_with(basis, weights, max_index, &SuiteOptions::default())
}

pub fn identity_suite_with<T: Scalar>(
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    max_index: usize,
    options: &SuiteOptions,
) -> Result<IdentityReport> {
    let mut tensor = build_tensor(basis, weights, (max_index, max_index, max_index))?;
    if let Some(p) = options.perturbation {
        if tensor.try_get(p.j3, p.j2, p.j1).is_none() {
            return Err(Error::InvalidArgument(format!(
                "perturbed entry ({}, {}, {}) is outside the tensor",
                p.j3, p.j2, p.j1
            )));
        }
        let v = tensor.get(p.j3, p.j2, p.j1) + T::lit(p.delta);
        tensor.set(p.j3, p.j2, p.j1, v);
    }
    let scale = weights.triple_scale(basis.width()).to_f64_lossy();
    let f = |x: T| x.to_f64_lossy();
    let mut checks = Vec::new();

    checks.push(self_oracle_check(&tensor, max_index.min(5), scale)?);

    if weights.l1 == weights.l2 && weights.l2 == weights.l3 {
        let single: Vec<T> = (0..=max_index).map(|j| coeff_single(basis, j, weights.l1)).collect();
        let errors = (0..=max_index).flat_map(|j1| {
            let tensor = &tensor;
            let single = &single;
            (0..=max_index).map(move |j3| {
                let lhs = tensor.get(j1, j1, j3) + tensor.get(j1, j3, j1) + tensor.get(j3, j1, j1);
                let rhs = T::lit(0.5) * single[j1] * single[j1] * single[j3];
                f((lhs - rhs).abs())
            })
        });
        checks.push(IdentityCheck::from_errors("symmetry", errors, 1e-11 * scale));
    }

    if basis.kind == BasisKind::Legendre && weights.is_constant() {
        let s3 = T::lit(3.0).sqrt();
        let sc = T::lit(scale);
        let mut exact = vec![f((tensor.get(0, 0, 0) - sc / T::lit(6.0)).abs())];
        if max_index >= 1 {
            exact.push(f((tensor.get(1, 0, 0) - sc / (T::lit(4.0) * s3)).abs()));
            exact.push(f((tensor.get(0, 0, 1) + sc / (T::lit(4.0) * s3)).abs()));
        }
        checks.push(IdentityCheck::from_errors("exact_constants", exact, 1e-12 * scale));
        let closed = (1..=max_index).map(|j| {
            let jf = T::of(j);
            let two = T::lit(2.0);
            let c = sc / (T::lit(8.0) * (two * jf + T::one()))
                * (T::one() / (two * jf + T::lit(3.0)) + T::one() / (two * jf - T::one()));
            f((tensor.get(0, j, j) - c).abs())
        });
        checks.push(IdentityCheck::from_errors("c0jj_closed_form", closed, 1e-11 * scale));
    }

    if basis.kind == BasisKind::Legendre {
        let mut errors = Vec::new();
        for j3 in 0..=max_index {
            for j2 in 0..=max_index {
                for j1 in 0..=max_index {
                    if is_structural_zero(basis.kind, weights, j3, j2, j1) {
                        let direct = coeff_triple(basis, j1, j2, j3, weights)?;
                        errors.push(f(tensor.get(j3, j2, j1).abs().max(direct.abs())));
                    }
                }
            }
        }
        checks.push(IdentityCheck::from_errors("structural_zeros", errors, 1e-12 * scale));
    }

    if basis.kind == BasisKind::Trigonometric && weights.is_constant() {
        let w = basis.width();
        let errors = tensor
            .entries()
            .filter_map(|(j3, j2, j1, v)| trig_coeff_closed(j3, j2, j1, w).map(|c| f((v - c).abs())))
            .collect::<Vec<_>>();
        checks.push(IdentityCheck::from_errors("trig_closed_forms", errors, 1e-10 * scale));
    }

    let orders: Vec<usize> = if basis.kind == BasisKind::Trigonometric && !weights.is_constant() {
        options.envelope_orders.iter().copied().filter(|&p| p <= 32).collect()
    } else {
        options.envelope_orders.clone()
    };
    if orders.len() >= 3 {
        let free = options.diagonal_free_max.min(max_index);
        for (name, family) in [
            ("diagonal_limit_outer", DiagonalFamily::Outer),
            ("diagonal_limit_inner", DiagonalFamily::Inner),
            ("diagonal_limit_middle", DiagonalFamily::Middle),
        ] {
            checks.push(envelope_check(name, basis, weights, family, free, &orders, scale));
        }
    }

    Ok(IdentityReport {
        setting: ReportSetting::new(basis, weights),
        max_index,
        checks,
    })
}

/// Entries of a small leading block recomputed independently, one
/// quadrature per entry.
fn self_oracle_check<T: Scalar>(tensor: &CoefficientTensor<T>, top: usize, scale: f64) -> Result<IdentityCheck> {
    let tol = match tensor.basis.kind {
        BasisKind::Legendre => 1e-12,
        BasisKind::Trigonometric => 1e-10,
    };
    let mut errors = Vec::new();
    for j3 in 0..=top {
        for j2 in 0..=top {
            for j1 in 0..=top {
                let direct = coeff_triple(&tensor.basis, j1, j2, j3, tensor.weights)?;
                errors.push((tensor.get(j3, j2, j1) - direct).abs().to_f64_lossy());
            }
        }
    }
    Ok(IdentityCheck::from_errors("tensor_matches_direct_quadrature", errors, tol * scale))
}

/// `|S_p − L| ≤ c/p`, with `c` fitted on the first two orders (times a
/// safety factor of 2) and validated on the rest. The reported tolerance
/// is the envelope at the largest order.
fn envelope_check<T: Scalar>(
    name: &str,
    basis: &BasisSpec<T>,
    weights: WeightExponents,
    family: DiagonalFamily,
    free: usize,
    orders: &[usize],
    scale: f64,
) -> IdentityCheck {
    let limits: Vec<f64> = (0..=free)
        .map(|k| diagonal_limit(basis, weights, family, k).to_f64_lossy())
        .collect();
    let errors: Vec<f64> = orders
        .iter()
        .map(|&p| {
            let profile = diagonal_profile(basis, weights, family, p, free);
            profile
                .iter()
                .zip(&limits)
                .map(|(s, l)| (s.to_f64_lossy() - l).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let floor = 1e-12 * scale;
    let c = 2.0 * orders[..2].iter().zip(&errors).map(|(&p, e)| p as f64 * e).fold(0.0, f64::max);
    let within = orders.iter().zip(&errors).all(|(&p, &e)| e <= c / p as f64 + floor);
    let last = *errors.last().expect("non-empty");
    let shrinking = last <= floor || last < errors[0];
    IdentityCheck {
        name: name.to_string(),
        cases: orders.len() * (free + 1),
        max_error: last,
        tolerance: c / *orders.last().expect("non-empty") as f64 + floor,
        passed: within && shrinking && errors.iter().all(|e| e.is_finite()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Interval;
    use approx::assert_abs_diff_eq;

    fn legendre() -> BasisSpec<f64> {
        BasisSpec::legendre(Interval::unit())
    }

    #[test]
    fn limits_match_known_values() {
        let b = legendre();
        let c = WeightExponents::CONSTANT;
        let s3 = 3f64.sqrt();
        assert_abs_diff_eq!(diagonal_limit(&b, c, DiagonalFamily::Outer, 0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(diagonal_limit(&b, c, DiagonalFamily::Outer, 1), 0.25 / s3, epsilon = 1e-15);
        assert_abs_diff_eq!(diagonal_limit(&b, c, DiagonalFamily::Inner, 0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(diagonal_limit(&b, c, DiagonalFamily::Inner, 1), -0.25 / s3, epsilon = 1e-15);
        assert_abs_diff_eq!(diagonal_limit(&b, c, DiagonalFamily::Outer, 2), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn slope_and_monotonicity() {
        let rows: Vec<_> = [(4, 1.0 / 16.0), (8, 1.0 / 64.0), (16, 1.0 / 256.0)]
            .iter()
            .map(|&(p, s)| ConvergenceRow {
                p: TruncationOrder::uniform(p),
                statistic: s,
                ci95: 0.0,
            })
            .collect();
        let r = ConvergenceReport::new(ReportSetting::new(&legendre(), WeightExponents::CONSTANT), Claim::Mse, rows, 0.0);
        assert_abs_diff_eq!(r.slope.unwrap(), -2.0, epsilon = 1e-12);
        assert!(r.strictly_decreasing);
        assert!(r.decreasing_beyond(8));
    }

    #[test]
    fn residual_rate_single_row_has_no_slope() {
        let r = residual_rate(&legendre(), WeightExponents::CONSTANT, &[4]).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.slope, None);
        assert!(residual_rate(&legendre(), WeightExponents::CONSTANT, &[8, 4]).is_err());
    }

    #[test]
    fn parseval_deficit_is_small_and_positive() {
        let b = BasisSpec::legendre(Interval::new(0.0, 2.0).unwrap());
        let d = parseval_deficit(&b, 1.4, 200).unwrap();
        assert!(d > 0.0 && d < 2e-2 * 2.0, "deficit {d}");
        let r = parseval_report(&b, 0.7, &[10, 50, 200]).unwrap();
        assert!(r.strictly_decreasing);
    }

    #[test]
    fn default_suite_passes_and_perturbation_fails() {
        let report = identity_suite(&legendre(), WeightExponents::CONSTANT, 6).unwrap();
        assert!(report.passed(), "{:#?}", report.failures().collect::<Vec<_>>());
        let options = SuiteOptions {
            perturbation: Some(Perturbation {
                j3: 1,
                j2: 0,
                j1: 0,
                delta: 1e-6,
            }),
            ..SuiteOptions::default()
        };
        let bad = identity_suite_with(&legendre(), WeightExponents::CONSTANT, 6, &options).unwrap();
        let failed: Vec<_> = bad.failures().map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"exact_constants"), "{failed:?}");
        assert!(failed.contains(&"symmetry"));
    }

    #[test]
    fn report_csv_layout() {
        let r = residual_rate(&legendre(), WeightExponents::CONSTANT, &[1, 2]).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p1,p2,p3,statistic,ci95\n1,1,1,"));
        assert_eq!(text.lines().count(), 3);
    }
}
