//! Quadrature rules: Gauss–Legendre nodes for smooth contour segments and a
//! globally adaptive Gauss–Kronrod (7/15) integrator for real-interval
//! integrals of matrix-valued functions with nearby poles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
///
/// Newton iteration on the three-term recurrence; accurate to a few ulps for
/// the orders used here (up to several thousand).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p_n, p_nm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p_n - p_nm1) / (x * x - 1.0);
    (p_n, d)
}

/// Values that can be integrated: closed under addition and real scaling,
/// with a norm for error control.
pub trait Quadrable: Clone {
    fn add_scaled(&mut self, other: &Self, w: f64);
    fn scaled(&self, w: f64) -> Self;
    fn distance(&self, other: &Self) -> f64;
    fn magnitude(&self) -> f64;
}

impl Quadrable for f64 {
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += w * other;
    }
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Quadrable for Complex64 {
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += other * w;
    }
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Quadrable for CMat {
    fn add_scaled(&mut self, other: &Self, w: f64) {
        self.zip_apply(other, |a, b| *a += b * w);
    }
    fn scaled(&self, w: f64) -> Self {
        self.map(|v| v * w)
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
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
    0.0,
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

fn kronrod15<T, F>(f: &mut F, a: f64, b: f64) -> Result<(T, f64)>
where
    T: Quadrable,
    F: FnMut(f64) -> Result<T>,
{
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let fc = f(center)?;
    let mut kron = fc.scaled(WGK[7]);
    let mut gauss = fc.scaled(WG[3]);
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let f1 = f(center - half * x)?;
        let f2 = f(center + half * x)?;
        kron.add_scaled(&f1, WGK[j]);
        kron.add_scaled(&f2, WGK[j]);
        if j % 2 == 1 {
            gauss.add_scaled(&f1, WG[j / 2]);
            gauss.add_scaled(&f2, WG[j / 2]);
        }
    }
    let kron = kron.scaled(half);
    let gauss = gauss.scaled(half);
    let err = kron.distance(&gauss);
    Ok((kron, err))
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subintervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            max_subintervals: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// `breakpoints` (clipped to the open interval) seed the initial partition;
/// callers place them at or around near-singular points of the integrand.
pub fn integrate_adaptive<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: AdaptiveOptions,
) -> Result<Integral<T>>
where
    T: Quadrable,
    F: FnMut(f64) -> Result<T>,
{
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (b - a));

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let (value, error) = kronrod15(&mut f, w[0], w[1])?;
        evaluations += 15;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    loop {
        let (total, total_err) = sum_pieces(&heap);
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if total_err <= target {
            return Ok(Integral {
                value: total,
                error: total_err,
                evaluations,
            });
        }
        if heap.len() >= opts.max_subintervals {
            return Err(Error::Quadrature {
                error: total_err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("non-empty partition");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature {
                error: total_err,
                evaluations,
            });
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod15(&mut f, lo, hi)?;
            evaluations += 15;
            heap.push(Piece {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
}

fn sum_pieces<T: Quadrable>(heap: &BinaryHeap<Piece<T>>) -> (T, f64) {
    // Sum in interval order so the result does not depend on heap layout.
    let mut pieces: Vec<&Piece<T>> = heap.iter().collect();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut iter = pieces.into_iter();
    let first = iter.next().expect("non-empty partition");
    let mut total = first.value.clone();
    let mut err = first.error;
    for p in iter {
        total.add_scaled(&p.value, 1.0);
        err += p.error;
    }
    (total, err)
}

/// Breakpoints clustering dyadically around `center` at scales down to
/// `width`, restricted to `[a, b]`. Used to resolve the near-pole peak of
/// `(z - mu)^{-1}` with `|Im z| = width`.
pub fn dyadic_breakpoints(center: f64, width: f64, a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![center];
    let span = b - a;
    let mut h = width.max(1e-14 * span);
    while h < span {
        out.push(center - h);
        out.push(center + h);
        h *= 2.0;
    }
    out.retain(|x| *x > a && *x < b);
    out
}
