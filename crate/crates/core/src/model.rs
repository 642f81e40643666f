//! The block operator model in its multiplication realization.
//!
//! The entry `A0` is multiplication by the independent variable on
//! `L²(Δ₀; ℂᵐ)`, `A1` is a Hermitian `n×n` matrix, and the coupling `B` is
//! multiplication by a matrix polynomial `b(μ)` of shape `m×n`. With these
//! choices the density `K′_B(μ) = b(μ)* b(μ)` continues to an entire function.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// `Σ_k C_k μ^k` with all `C_k` of a common shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    rows: usize,
    cols: usize,
    coeffs: Vec<CMat>,
}

impl MatrixPolynomial {
    pub fn new(coeffs: Vec<CMat>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::Shape("matrix polynomial needs at least one coefficient".into()))?;
        let (rows, cols) = first.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("coefficient matrices must be non-empty".into()));
        }
        if let Some((k, c)) = coeffs.iter().enumerate().find(|(_, c)| c.shape() != (rows, cols)) {
            return Err(Error::Shape(format!(
                "coefficient {k} has shape {:?}, expected {:?}",
                c.shape(),
                (rows, cols)
            )));
        }
        if coeffs.iter().flat_map(|c| c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Shape("coefficients must be finite".into()));
        }
        Ok(Self { rows, cols, coeffs })
    }

    pub fn constant(c: CMat) -> Result<Self> {
        Self::new(vec![c])
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: vec![CMat::zeros(rows, cols)],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|v| *v == Complex64::new(0.0, 0.0)))
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex64) -> CMat {
        let mut acc = self.coeffs[self.degree()].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.map(|v| v * z) + c;
        }
        acc
    }

    /// `p♯(μ) := (p(μ̄))*`: coefficient-wise conjugate transpose.
    pub fn sharp(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            coeffs: self.coeffs.iter().map(|c| c.adjoint()).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{} polynomials",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let deg = self.degree() + rhs.degree();
        let mut out = vec![CMat::zeros(self.rows, rhs.cols); deg + 1];
        for (i, p) in self.coeffs.iter().enumerate() {
            for (j, q) in rhs.coeffs.iter().enumerate() {
                out[i + j] += p * q;
            }
        }
        Self::new(out)
    }

    /// Coefficients of `s ↦ p(center + s)`.
    pub fn shifted(&self, center: f64) -> Self {
        let deg = self.degree();
        let mut out = vec![CMat::zeros(self.rows, self.cols); deg + 1];
        for (k, ck) in self.coeffs.iter().enumerate() {
            // binom(k, j) center^(k-j)
            let mut binom = 1.0;
            for j in 0..=k {
                if j > 0 {
                    binom = binom * (k - j + 1) as f64 / j as f64;
                }
                let factor = binom * center.powi((k - j) as i32);
                out[j] += ck.map(|v| v * factor);
            }
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            coeffs: out,
        }
    }

    /// Exact `∫_lo^hi p(μ) dμ` over a real segment.
    pub fn integrate(&self, lo: f64, hi: f64) -> CMat {
        let mut acc = CMat::zeros(self.rows, self.cols);
        for (k, ck) in self.coeffs.iter().enumerate() {
            let p = (k + 1) as i32;
            let w = (hi.powi(p) - lo.powi(p)) / (k + 1) as f64;
            acc += ck.map(|v| v * w);
        }
        acc
    }
}

/// Finite real interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::DegenerateInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_len(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, mu: f64) -> bool {
        mu >= self.lo && mu <= self.hi
    }

    pub fn contains_strictly(&self, mu: f64) -> bool {
        mu > self.lo && mu < self.hi
    }
}

/// Analytic continuation of `μ ↦ K′_B(μ)` as an `n×n` matrix polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingDensity {
    pub kprime: MatrixPolynomial,
}

impl CouplingDensity {
    pub fn eval(&self, mu: Complex64) -> CMat {
        self.kprime.eval(mu)
    }
}

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SpectralModel {
    delta0: Interval,
    a1: CMat,
    b: MatrixPolynomial,
    sigma1: Vec<f64>,
    feshbach: bool,
    kprime: MatrixPolynomial,
    /// `K′_B(mid + s)` as a polynomial in `s`, used by the Cauchy integrals.
    kprime_centered: MatrixPolynomial,
}

/// Validates and assembles a model. `a1` is replaced by its Hermitian part
/// once it passes the tolerance check.
pub fn build_model(delta0: Interval, a1: CMat, b: MatrixPolynomial) -> Result<SpectralModel> {
    Interval::new(delta0.lo, delta0.hi)?;
    if a1.nrows() != a1.ncols() || a1.nrows() == 0 {
        return Err(Error::Shape(format!("A1 must be square and non-empty, got {:?}", a1.shape())));
    }
    if b.cols() != a1.nrows() {
        return Err(Error::Shape(format!(
            "coupling has {} columns but A1 is {}x{}",
            b.cols(),
            a1.nrows(),
            a1.nrows()
        )));
    }
    if a1.iter().any(|v| !v.is_finite()) {
        return Err(Error::Shape("A1 entries must be finite".into()));
    }
    let defect = linalg::hermitian_defect(&a1);
    let tolerance = HERMITIAN_TOL * linalg::norm2(&a1);
    if defect > tolerance {
        return Err(Error::NotHermitian { defect, tolerance });
    }
    let a1 = (&a1 + a1.adjoint()).scale(0.5);
    let sigma1 = linalg::hermitian_eigenvalues(&a1);
    let feshbach = sigma1.iter().all(|s| delta0.contains_strictly(*s));
    let kprime = b.sharp().mul(&b)?;
    let kprime_centered = kprime.shifted(delta0.mid());
    Ok(SpectralModel {
        delta0,
        a1,
        b,
        sigma1,
        feshbach,
        kprime,
        kprime_centered,
    })
}

impl SpectralModel {
    pub fn delta0(&self) -> Interval {
        self.delta0
    }

    pub fn a1(&self) -> &CMat {
        &self.a1
    }

    pub fn b(&self) -> &MatrixPolynomial {
        &self.b
    }

    /// Eigenvalues of `A1`, ascending.
    pub fn sigma1(&self) -> &[f64] {
        &self.sigma1
    }

    /// Whether every eigenvalue of `A1` is embedded in the open interval.
    pub fn is_feshbach(&self) -> bool {
        self.feshbach
    }

    pub fn dim(&self) -> usize {
        self.a1.nrows()
    }

    pub fn multiplicity(&self) -> usize {
        self.b.rows()
    }

    pub fn kprime_of(&self) -> CouplingDensity {
        CouplingDensity {
            kprime: self.kprime.clone(),
        }
    }

    pub fn kprime(&self) -> &MatrixPolynomial {
        &self.kprime
    }

    pub(crate) fn kprime_centered(&self) -> &MatrixPolynomial {
        &self.kprime_centered
    }

    pub fn kprime_at(&self, mu: Complex64) -> CMat {
        self.kprime.eval(mu)
    }

    pub fn has_zero_coupling(&self) -> bool {
        self.b.is_zero()
    }

    /// `K_B(μ) = ∫_{lo}^{μ} K′_B(ν) dν`.
    pub fn kb_cumulative(&self, mu: f64) -> Result<CMat> {
        if !self.delta0.contains(mu) {
            return Err(Error::OutsideInterval {
                mu,
                lo: self.delta0.lo,
                hi: self.delta0.hi,
            });
        }
        Ok(self.kprime.integrate(self.delta0.lo, mu))
    }

    /// Checks `λ_min(K′_B(μ)) ≥ c0` at every sample of `region`.
    pub fn check_semibounded_density(&self, region: &[f64], c0: f64) -> Result<SemiboundedVerdict> {
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        if !(c0 > 0.0) {
            return Err(Error::InvalidParameter(format!("c0 must be positive, got {c0}")));
        }
        let mut min_eigenvalue = f64::INFINITY;
        let mut at = region[0];
        for &mu in region {
            if !self.delta0.contains(mu) {
                return Err(Error::OutsideInterval {
                    mu,
                    lo: self.delta0.lo,
                    hi: self.delta0.hi,
                });
            }
            let k = self.kprime_at(Complex64::new(mu, 0.0));
            let lam = linalg::hermitian_eigenvalues(&k)[0];
            if lam < min_eigenvalue {
                min_eigenvalue = lam;
                at = mu;
            }
        }
        Ok(SemiboundedVerdict {
            pass: min_eigenvalue >= c0,
            min_eigenvalue,
            at,
        })
    }

    /// Sample grid of `Δ₀ ∩ O_radius(σ₁)`: for each eigenvalue of `A1`,
    /// `points` equispaced samples of `[σ - radius, σ + radius]` clipped to
    /// the closed interval.
    pub fn neighborhood_grid(&self, radius: f64, points: usize) -> Vec<f64> {
        let points = points.max(2);
        let mut out = Vec::new();
        for &s in &self.sigma1 {
            let lo = (s - radius).max(self.delta0.lo);
            let hi = (s + radius).min(self.delta0.hi);
            if lo > hi {
                continue;
            }
            for k in 0..points {
                out.push(lo + (hi - lo) * k as f64 / (points - 1) as f64);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiboundedVerdict {
    pub pass: bool,
    pub min_eigenvalue: f64,
    pub at: f64,
}
