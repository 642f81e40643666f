#![allow(dead_code)]

use num_complex::Complex64;
use oproot::contour::{admissibility, make_contour, ContourKind, Side};
use oproot::linalg::{self, CMat};
use oproot::model::{build_model, Interval, MatrixPolynomial, SpectralModel};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::Rng;

/// Parameters of a 2×2 model on [-1, 1] with `m = 2`:
/// `A₁ = R(θ) diag(s₁, s₂) R(θ)ᵀ`, `b(μ) = c(I + E₀) + (c/2)E₁μ`.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub s1: f64,
    pub s2: f64,
    pub theta: f64,
    pub c: f64,
    pub e0: [[Complex64; 2]; 2],
    pub e1: [[Complex64; 2]; 2],
}

fn mat(e: &[[Complex64; 2]; 2]) -> CMat {
    CMat::from_fn(2, 2, |i, j| e[i][j])
}

impl ModelParams {
    pub fn model(&self) -> SpectralModel {
        let (s, co) = self.theta.sin_cos();
        let r = CMat::from_row_slice(2, 2, &[co.into(), (-s).into(), s.into(), co.into()]);
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![self.s1.into(), self.s2.into()]));
        let a1 = &r * d * r.transpose();
        let a1 = (&a1 + a1.adjoint()).scale(0.5);
        let b0 = (linalg::identity(2) + mat(&self.e0)).scale(self.c);
        let b1 = mat(&self.e1).scale(0.5 * self.c);
        build_model(Interval::new(-1.0, 1.0).unwrap(), a1, MatrixPolynomial::new(vec![b0, b1]).unwrap()).unwrap()
    }

    pub fn is_real(&self) -> bool {
        self.e0.iter().chain(&self.e1).flatten().all(|z| z.im == 0.0)
    }
}

/// Admissible on the unit semicircle (both sides) and strictly positive
/// density on the `d/2`-neighbourhood of `σ₁`.
pub fn usable(model: &SpectralModel) -> bool {
    let g = make_contour(model, Side::Upper, ContourKind::Semicircle, 1.0, 200).unwrap();
    let rep = admissibility(model, &g);
    if !rep.admissible || !model.is_feshbach() {
        return false;
    }
    let region = model.neighborhood_grid(0.5 * rep.distance, 60);
    model.check_semibounded_density(&region, 1e-6).is_ok_and(|v| v.pass)
}

fn entry(rng: &mut StdRng, real: bool) -> Complex64 {
    let im = if real { 0.0 } else { rng.random_range(-0.3..0.3) };
    Complex64::new(rng.random_range(-0.3..0.3), im)
}

pub fn random_params(rng: &mut StdRng, real: bool) -> ModelParams {
    let mut e = || [[entry(rng, real), entry(rng, real)], [entry(rng, real), entry(rng, real)]];
    let (e0, e1) = (e(), e());
    ModelParams {
        s1: rng.random_range(-0.55..-0.15),
        s2: rng.random_range(0.15..0.55),
        theta: rng.random_range(0.0..std::f64::consts::PI),
        c: rng.random_range(0.03..0.09),
        e0,
        e1,
    }
}

/// Draws until the model is usable.
pub fn random_model(rng: &mut StdRng, real: bool) -> (ModelParams, SpectralModel) {
    loop {
        let p = random_params(rng, real);
        let m = p.model();
        if usable(&m) {
            return (p, m);
        }
    }
}

fn entry_strategy(real: bool) -> BoxedStrategy<Complex64> {
    if real {
        (-0.3..0.3f64).prop_map(|re| Complex64::new(re, 0.0)).boxed()
    } else {
        (-0.3..0.3f64, -0.3..0.3f64).prop_map(|(re, im)| Complex64::new(re, im)).boxed()
    }
}

pub fn params_strategy(real: bool) -> impl Strategy<Value = ModelParams> {
    let block = move || [[entry_strategy(real), entry_strategy(real)], [entry_strategy(real), entry_strategy(real)]];
    (-0.55..-0.15f64, 0.15..0.55f64, 0.0..std::f64::consts::PI, 0.03..0.09f64, block(), block())
        .prop_map(|(s1, s2, theta, c, e0, e1)| ModelParams { s1, s2, theta, c, e0, e1 })
}

/// Usable models only.
pub fn model_strategy(real: bool) -> impl Strategy<Value = (ModelParams, SpectralModel)> {
    params_strategy(real).prop_filter_map("inadmissible or not Feshbach", |p| {
        let m = p.model();
        usable(&m).then_some((p, m))
    })
}
