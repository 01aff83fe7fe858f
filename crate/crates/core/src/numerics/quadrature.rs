//! Adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! `integrate_endpoints` additionally splits the interval geometrically toward
//! chosen endpoints, which handles integrable power singularities and integrands
//! that concentrate in a tiny neighbourhood of an endpoint. The sum of the
//! remaining dyadic pieces is extrapolated from the ratio of consecutive pieces;
//! a ratio that stays at or above one is reported as divergence.

use crate::error::{Result, ZrpError};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_483_881,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Upper bound on dyadic pieces per singular endpoint.
    pub max_pieces: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 2000, max_pieces: 1100 }
    }
}

impl QuadOptions {
    #[must_use]
    pub fn abs(abs_tol: f64) -> Self {
        Self { abs_tol, rel_tol: 0.0, ..Self::default() }
    }

    #[must_use]
    pub fn rel(rel_tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol, ..Self::default() }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[10];
    let mut g = 0.0;
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    let value = k * h;
    let err = ((k - g) * h).abs();
    (value, err)
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Quadrature> {
    integrate_ref(&f, a, b, opts)
}

fn integrate_ref<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: QuadOptions) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (v, e) = kronrod(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut evals = 21;
    while err > opts.target(total) {
        if heap.len() >= opts.max_intervals {
            break;
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod(f, worst.a, mid);
        let (v2, e2) = kronrod(f, mid, worst.b);
        evals += 42;
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the running totals.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    if !value.is_finite() {
        return Err(ZrpError::Divergent(format!("non-finite integral on [{a}, {b}]")));
    }
    if error > opts.target(value) {
        return Err(ZrpError::NonConvergence { what: "quadrature".into(), value, error });
    }
    Ok(Quadrature { value, error, evaluations: evals })
}

/// Quadrature over `[a, b]` with geometric refinement toward the flagged endpoints.
pub fn integrate_endpoints<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    left: bool,
    right: bool,
    opts: QuadOptions,
) -> Result<Quadrature> {
    match (left, right) {
        (false, false) => integrate_ref(&f, a, b, opts),
        (true, false) => dyadic(&f, a, b, opts),
        (false, true) => dyadic(&|t| f(a + b - t), a, b, opts),
        (true, true) => {
            let mid = 0.5 * (a + b);
            let half = QuadOptions { abs_tol: 0.5 * opts.abs_tol, ..opts };
            let l = dyadic(&f, a, mid, half)?;
            let r = dyadic(&|t| f(mid + b - t), mid, b, half)?;
            Ok(Quadrature {
                value: l.value + r.value,
                error: l.error + r.error,
                evaluations: l.evaluations + r.evaluations,
            })
        }
    }
}

/// Pieces `[a + w/2^{k+1}, a + w/2^k]`, stopping once the geometric tail is negligible.
fn dyadic<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: QuadOptions) -> Result<Quadrature> {
    let width = b - a;
    let piece_opts = QuadOptions { abs_tol: opts.abs_tol / 256.0, ..opts };
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evals = 0;
    let mut prev: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut growing = 0usize;
    let mut zeros = 0usize;
    for k in 0..opts.max_pieces {
        let hi = a + width * 0.5f64.powi(k as i32);
        let lo = a + width * 0.5f64.powi(k as i32 + 1);
        if hi <= a || lo <= a && k > 0 {
            return Ok(Quadrature { value, error, evaluations: evals });
        }
        let q = integrate_ref(f, lo, hi, piece_opts).or_else(|e| match e {
            ZrpError::NonConvergence { value, error, .. } => Ok(Quadrature { value, error, evaluations: 0 }),
            other => Err(other),
        })?;
        value += q.value;
        error += q.error;
        evals += q.evaluations;
        let tol = opts.target(value);
        if q.value == 0.0 {
            if value != 0.0 {
                zeros += 1;
            }
            if zeros >= 4 {
                return finish(value, error, evals, opts);
            }
            prev = None;
            prev_ratio = None;
            continue;
        }
        zeros = 0;
        if let Some(p) = prev {
            let r = (q.value / p).abs();
            if r >= 1.0 - 1e-6 {
                growing += 1;
                if growing >= 12 {
                    return Err(ZrpError::Divergent(format!(
                        "dyadic pieces stop shrinking near {a} (ratio {r:.6})"
                    )));
                }
            } else {
                growing = 0;
                if k >= 6 {
                    let tail = q.value * r / (1.0 - r);
                    let drift = prev_ratio.map_or(f64::INFINITY, |pr| (r - pr).abs());
                    let tail_err = tail.abs() * (drift / (1.0 - r)).min(1.0);
                    let budget = 0.25 * tol;
                    if tail.abs() <= budget || tail_err <= budget {
                        return finish(value + tail, error + tail_err, evals, opts);
                    }
                }
            }
            prev_ratio = Some(r);
        }
        prev = Some(q.value);
    }
    Err(ZrpError::NonConvergence { what: "dyadic quadrature".into(), value, error })
}

fn finish(value: f64, error: f64, evaluations: usize, opts: QuadOptions) -> Result<Quadrature> {
    if !value.is_finite() {
        return Err(ZrpError::Divergent("non-finite integral".into()));
    }
    if error > opts.target(value) {
        return Err(ZrpError::NonConvergence { what: "quadrature".into(), value, error });
    }
    Ok(Quadrature { value, error, evaluations })
}
