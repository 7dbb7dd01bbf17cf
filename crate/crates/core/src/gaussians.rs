//! Independent standard normals `ζ_j^{(i)}`.
//!
//! Every value is a pure function of `(seed, domain, component, replica,
//! index)`: the ChaCha8 stream is selected from the key and the `j`-th
//! normal is the inverse CDF of the `j`-th 64-bit word of that stream, so
//! blocks can be regenerated in any order or on any thread.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Keeps fresh coefficient draws and simulated paths on disjoint streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamDomain {
    Block = 0,
    Path = 1,
}

/// One keyed stream of standard normal variates.
#[derive(Clone, Debug)]
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    /// `component` is 1-based; at most 65535 components per replica.
    pub fn new(seed: u64, domain: StreamDomain, component: usize, replica: u64) -> Self {
        debug_assert!(component < 1 << 16 && replica < 1 << 47);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((domain as u64) << 63) | (replica << 16) | component as u64);
        Self { rng }
    }

    /// Jumps to the `index`-th variate of the stream.
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(2 * index as u128);
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        inverse_normal_cdf(unit_open(self.rng.next_u64()))
    }

    pub fn fill<T: Scalar>(&mut self, out: &mut [T]) {
        for v in out {
            *v = T::lit(self.next_normal());
        }
    }
}

/// Maps 52 random bits to the open interval (0, 1).
#[inline]
fn unit_open(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal quantile, Wichura's algorithm AS 241 (PPND16), relative
/// accuracy about 1e-16.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];
    fn ratio(num: &[f64; 8], den: &[f64; 8], r: f64) -> f64 {
        let n = num.iter().rev().fold(0.0, |acc, &c| acc * r + c);
        let d = den.iter().rev().fold(0.0, |acc, &c| acc * r + c);
        n / d
    }

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        return q * ratio(&A, &B, 0.180_625 - q * q);
    }
    let r = (-(p.min(1.0 - p)).ln()).sqrt();
    let x = if r <= 5.0 {
        ratio(&C, &D, r - 1.6)
    } else {
        ratio(&E, &F, r - 5.0)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Fresh,
    FromPath,
}

/// `ζ_j^{(i)}` for components `i = 1..=m` and indices `j = 0..=p_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBlock<T> {
    m: usize,
    p_max: usize,
    values: Vec<T>,
    pub seed: u64,
    pub replica: u64,
    pub provenance: Provenance,
}

impl<T: Scalar> GaussianBlock<T> {
    /// Wraps explicit values laid out row-major over `[i - 1][j]`.
    pub fn from_values(m: usize, p_max: usize, values: Vec<T>, provenance: Provenance) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("a gaussian block needs m >= 1".into()));
        }
        if values.len() != m * (p_max + 1) {
            return Err(Error::InvalidArgument(format!(
                "block of shape {m} x {} needs {} values, got {}",
                p_max + 1,
                m * (p_max + 1),
                values.len()
            )));
        }
        Ok(Self {
            m,
            p_max,
            values,
            seed: 0,
            replica: 0,
            provenance,
        })
    }

    pub fn zeros(m: usize, p_max: usize) -> Self {
        Self::from_values(m, p_max, vec![T::zero(); m.max(1) * (p_max + 1)], Provenance::Fresh)
            .expect("shape is consistent by construction")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    /// `ζ_j^{(i)}`, `i` 1-based.
    #[inline]
    pub fn zeta(&self, i: usize, j: usize) -> T {
        debug_assert!(i >= 1 && i <= self.m && j <= self.p_max);
        self.values[(i - 1) * (self.p_max + 1) + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let k = (i - 1) * (self.p_max + 1) + j;
        self.values[k] = value;
    }

    /// All `ζ_j^{(i)}` for one component.
    pub fn row(&self, i: usize) -> &[T] {
        let n = self.p_max + 1;
        &self.values[(i - 1) * n..i * n]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Fails unless indices `0..=needed` exist for every component.
    pub fn require(&self, needed: usize) -> Result<()> {
        if needed > self.p_max {
            Err(Error::InsufficientBlock {
                required: needed + 1,
                available: self.p_max + 1,
            })
        } else {
            Ok(())
        }
    }
}

/// Fresh i.i.d. standard normals for replica 0.
pub fn draw_block<T: Scalar>(m: usize, p_max: usize, seed: u64) -> Result<GaussianBlock<T>> {
    draw_block_replica(m, p_max, seed, 0)
}

/// Fresh block for Monte Carlo replica `replica`; distinct replicas use
/// disjoint streams.
pub fn draw_block_replica<T: Scalar>(m: usize, p_max: usize, seed: u64, replica: u64) -> Result<GaussianBlock<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("a gaussian block needs m >= 1".into()));
    }
    let n = p_max + 1;
    let mut values = vec![T::zero(); m * n];
    for (i, row) in values.chunks_mut(n).enumerate() {
        NormalStream::new(seed, StreamDomain::Block, i + 1, replica).fill(row);
    }
    Ok(GaussianBlock {
        m,
        p_max,
        values,
        seed,
        replica,
        provenance: Provenance::Fresh,
    })
}
