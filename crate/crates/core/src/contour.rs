//! Admissible deformations of the spectral interval into a half-plane.
//!
//! Two shapes are supported: the semicircle over `Δ₀` and the three-segment
//! rectangle of a given depth. Both run from the left endpoint to the right
//! endpoint, so contour integrals need no orientation sign.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::model::SpectralModel;
use crate::quadrature::gauss_legendre;

/// Half-plane containing the contour: `+1` for `ℂ⁺`, `-1` for `ℂ⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Upper => Side::Lower,
            Side::Lower => Side::Upper,
        }
    }

    pub fn both() -> [Side; 2] {
        [Side::Upper, Side::Lower]
    }
}

impl TryFrom<i32> for Side {
    type Error = String;
    fn try_from(v: i32) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Side::Upper),
            -1 => Ok(Side::Lower),
            _ => Err(format!("side must be +1 or -1, got {v}")),
        }
    }
}

impl From<Side> for i32 {
    fn from(s: Side) -> i32 {
        match s {
            Side::Upper => 1,
            Side::Lower => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContourKind {
    Semicircle,
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub point: Complex64,
    /// Weight for `∫ f(μ) dμ`.
    pub weight: Complex64,
    /// Weight for `∫ f(μ) |dμ|`.
    pub arc_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Segment {
    Line { from: Complex64, to: Complex64 },
    /// `μ(s) = center - r cos s + i·sign·r sin s`, `s ∈ [0, π]`.
    Arc { center: f64, radius: f64, sign: f64 },
}

impl Segment {
    fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc { radius, .. } => PI * radius,
        }
    }

    fn distance(&self, z: Complex64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let t = ((z - from) * d.conj()).re / d.norm_sqr();
                let p = from + d * t.clamp(0.0, 1.0);
                (z - p).norm()
            }
            Segment::Arc { center, radius, sign } => {
                let w = z - center;
                if sign * w.im >= 0.0 {
                    (w.norm() - radius).abs()
                } else {
                    let a = c(center - radius, 0.0);
                    let b = c(center + radius, 0.0);
                    (z - a).norm().min((z - b).norm())
                }
            }
        }
    }

    fn nodes(&self, n: usize) -> Vec<Node> {
        let (x, w) = gauss_legendre(n);
        match *self {
            Segment::Line { from, to } => {
                let half = (to - from) * 0.5;
                x.iter()
                    .zip(&w)
                    .map(|(&x, &w)| Node {
                        point: from + half * (x + 1.0),
                        weight: half * w,
                        arc_weight: half.norm() * w,
                    })
                    .collect()
            }
            Segment::Arc { center, radius, sign } => x
                .iter()
                .zip(&w)
                .map(|(&x, &w)| {
                    let s = 0.5 * PI * (x + 1.0);
                    let ws = 0.5 * PI * w;
                    let point = c(center - radius * s.cos(), sign * radius * s.sin());
                    let tangent = c(radius * s.sin(), sign * radius * s.cos());
                    Node {
                        point,
                        weight: tangent * ws,
                        arc_weight: radius * ws,
                    }
                })
                .collect(),
        }
    }
}

/// Minimum Gauss–Legendre nodes per smooth piece.
pub const MIN_NODES_PER_SEGMENT: usize = 200;

#[derive(Debug, Clone)]
pub struct Contour {
    side: Side,
    kind: ContourKind,
    depth: f64,
    endpoints: (f64, f64),
    segments: Vec<Segment>,
    nodes: Vec<Node>,
    segment_offsets: Vec<usize>,
}

/// Builds a contour over the model's interval.
///
/// For a semicircle `depth` is the radius and must equal half the interval
/// length; for a rectangle it is the distance of the horizontal side from the
/// real axis.
pub fn make_contour(
    model: &SpectralModel,
    side: Side,
    kind: ContourKind,
    depth: f64,
    nodes_per_unit: usize,
) -> Result<Contour> {
    if !(depth > 0.0 && depth.is_finite()) {
        return Err(Error::InvalidContour(format!("depth must be positive, got {depth}")));
    }
    if nodes_per_unit == 0 {
        return Err(Error::InvalidContour("nodes_per_unit must be positive".into()));
    }
    let iv = model.delta0();
    let (a, b) = (iv.lo, iv.hi);
    let sign = side.sign();
    let segments = match kind {
        ContourKind::Semicircle => {
            let r = iv.half_len();
            if (depth - r).abs() > 1e-12 * r {
                return Err(Error::InvalidContour(format!(
                    "semicircle depth {depth} must equal the half-length {r} of the interval"
                )));
            }
            vec![Segment::Arc {
                center: iv.mid(),
                radius: r,
                sign,
            }]
        }
        ContourKind::Rectangle => {
            let lift = c(0.0, sign * depth);
            vec![
                Segment::Line {
                    from: c(a, 0.0),
                    to: c(a, 0.0) + lift,
                },
                Segment::Line {
                    from: c(a, 0.0) + lift,
                    to: c(b, 0.0) + lift,
                },
                Segment::Line {
                    from: c(b, 0.0) + lift,
                    to: c(b, 0.0),
                },
            ]
        }
    };
    let mut nodes = Vec::new();
    let mut segment_offsets = Vec::new();
    for seg in &segments {
        let n = MIN_NODES_PER_SEGMENT.max((nodes_per_unit as f64 * seg.length()).ceil() as usize);
        segment_offsets.push(nodes.len());
        nodes.extend(seg.nodes(n));
    }
    segment_offsets.push(nodes.len());
    Ok(Contour {
        side,
        kind,
        depth,
        endpoints: (a, b),
        segments,
        nodes,
        segment_offsets,
    })
}

impl Contour {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn kind(&self) -> ContourKind {
        self.kind
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn endpoints(&self) -> (f64, f64) {
        self.endpoints
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arclength(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Exact Euclidean distance from `z` to the curve.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `z` to the nearest quadrature node.
    pub fn distance_to_nodes(&self, z: Complex64) -> f64 {
        self.nodes
            .iter()
            .map(|n| (n.point - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Gap between the node nearest to `z` and its neighbours along the curve
    /// (the larger of the two gaps).
    pub fn local_spacing(&self, z: Complex64) -> f64 {
        let (k, _) = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (k, (n.point - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("contour has nodes");
        let seg = self.segment_offsets.windows(2).position(|w| k >= w[0] && k < w[1]).unwrap_or(0);
        let (lo, hi) = (self.segment_offsets[seg], self.segment_offsets[seg + 1]);
        let mut gap: f64 = 0.0;
        if k > lo {
            gap = gap.max((self.nodes[k].point - self.nodes[k - 1].point).norm());
        }
        if k + 1 < hi {
            gap = gap.max((self.nodes[k + 1].point - self.nodes[k].point).norm());
        }
        gap
    }

    /// Whether `z` lies strictly between the interval and the curve, off the
    /// real axis.
    pub fn lens_contains(&self, z: Complex64) -> bool {
        let (a, b) = self.endpoints;
        let sign = self.side.sign();
        if sign * z.im <= 0.0 {
            return false;
        }
        match self.kind {
            ContourKind::Semicircle => (z - c(0.5 * (a + b), 0.0)).norm() < 0.5 * (b - a),
            ContourKind::Rectangle => z.re > a && z.re < b && sign * z.im < self.depth,
        }
    }

    /// `∫_Γ f(μ) dμ` by the contour's quadrature rule.
    pub fn integrate<F>(&self, mut f: F) -> Complex64
    where
        F: FnMut(Complex64) -> Complex64,
    {
        self.nodes.iter().map(|n| n.weight * f(n.point)).sum()
    }

    /// Distance to `σ₁` by dense sampling of the curve (10⁴ points per
    /// piece); a geometry-independent cross-check for [`distance_to_sigma1`].
    pub fn sampled_distance(&self, points: &[f64]) -> f64 {
        let samples = 10_000;
        let mut best = f64::INFINITY;
        for seg in &self.segments {
            for k in 0..=samples {
                let t = k as f64 / samples as f64;
                let p = match *seg {
                    Segment::Line { from, to } => from + (to - from) * t,
                    Segment::Arc { center, radius, sign } => {
                        let s = PI * t;
                        c(center - radius * s.cos(), sign * radius * s.sin())
                    }
                };
                for &x in points {
                    best = best.min((p - x).norm());
                }
            }
        }
        best
    }
}

/// Quadrature nodes of a contour paired with `K′_B` at each node, so repeated
/// contour integrals do not re-evaluate the density.
#[derive(Debug, Clone)]
pub struct DensityOnContour {
    pub nodes: Vec<Node>,
    pub kprime: Vec<CMat>,
}

impl DensityOnContour {
    pub fn new(model: &SpectralModel, contour: &Contour) -> Self {
        let nodes = contour.nodes().to_vec();
        let kprime = nodes.iter().map(|n| model.kprime_at(n.point)).collect();
        Self { nodes, kprime }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Node, &CMat)> {
        self.nodes.iter().zip(&self.kprime)
    }
}

/// `𝒱₀(B, Γ) = ∫_Γ |dμ| ‖K′_B(μ)‖`.
pub fn variation(model: &SpectralModel, contour: &Contour) -> f64 {
    if model.has_zero_coupling() {
        return 0.0;
    }
    contour
        .nodes()
        .iter()
        .map(|n| n.arc_weight * linalg::norm2(&model.kprime_at(n.point)))
        .sum()
}

/// `d(Γ) = dist(σ₁, Γ)`, exact for both supported shapes.
pub fn distance_to_sigma1(model: &SpectralModel, contour: &Contour) -> f64 {
    model
        .sigma1()
        .iter()
        .map(|&s| contour.distance_to(c(s, 0.0)))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub variation: f64,
    pub distance: f64,
    /// `ω = d² - 4𝒱₀`.
    pub omega: f64,
    pub admissible: bool,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
}

impl AdmissibilityReport {
    /// Radii from a variation and distance. `r_min` uses the form
    /// `𝒱₀ / (d/2 + √(d²/4 - 𝒱₀))`, free of cancellation for small `𝒱₀`.
    pub fn from_parts(variation: f64, distance: f64) -> Self {
        let omega = distance * distance - 4.0 * variation;
        let admissible = omega > 0.0;
        let (r_min, r_max) = if admissible {
            let root = (0.25 * distance * distance - variation).sqrt();
            let r_min = variation / (0.5 * distance + root);
            let r_max = distance - variation.sqrt();
            (Some(r_min), Some(r_max))
        } else {
            (None, None)
        };
        Self {
            variation,
            distance,
            omega,
            admissible,
            r_min,
            r_max,
        }
    }

    /// Report for the coupling `t·B`, whose variation is `t²𝒱₀`.
    pub fn scaled(&self, t: f64) -> Self {
        Self::from_parts(t * t * self.variation, self.distance)
    }

    pub fn into_error(self, scale: f64) -> Error {
        Error::Inadmissible {
            variation: self.variation,
            distance: self.distance,
            quarter_d2: 0.25 * self.distance * self.distance,
            scale,
        }
    }
}

pub fn admissibility(model: &SpectralModel, contour: &Contour) -> AdmissibilityReport {
    AdmissibilityReport::from_parts(variation(model, contour), distance_to_sigma1(model, contour))
}

/// One-parameter contour family for the `r₀` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourFamily {
    pub kind: ContourKind,
    pub depth_min: f64,
    pub depth_max: f64,
    pub nodes_per_unit: usize,
}

#[derive(Debug, Clone)]
pub struct R0Search {
    pub contour: Contour,
    pub report: AdmissibilityReport,
    /// Smallest `r_min` found; an upper bound for the infimum over all
    /// admissible contours.
    pub r0: f64,
    pub probes: usize,
}

const GRID_PROBES: usize = 33;
const GOLDEN_TOL: f64 = 1e-12;

/// Minimizes `r_min(Γ_h)` over the depth `h` of the family.
pub fn optimize_r0(model: &SpectralModel, side: Side, family: ContourFamily) -> Result<R0Search> {
    let ContourFamily {
        kind,
        depth_min,
        depth_max,
        nodes_per_unit,
    } = family;
    if !(depth_min > 0.0 && depth_min <= depth_max && depth_max.is_finite()) {
        return Err(Error::InvalidContour(format!(
            "depth range [{depth_min}, {depth_max}] is invalid"
        )));
    }
    let mut probes = 0usize;
    let mut best: Option<(f64, Contour, AdmissibilityReport)> = None;
    let mut eval = |h: f64, best: &mut Option<(f64, Contour, AdmissibilityReport)>| -> Result<f64> {
        let contour = make_contour(model, side, kind, h, nodes_per_unit)?;
        let report = admissibility(model, &contour);
        probes += 1;
        let r = report.r_min.unwrap_or(f64::INFINITY);
        if best.as_ref().map_or(report.admissible, |(rb, _, _)| report.admissible && r < *rb) {
            *best = Some((r, contour, report));
        }
        Ok(r)
    };

    if kind == ContourKind::Semicircle {
        let h = model.delta0().half_len();
        if h < depth_min * (1.0 - 1e-12) || h > depth_max * (1.0 + 1e-12) {
            return Err(Error::NoAdmissibleContour);
        }
        eval(h, &mut best)?;
    } else {
        let grid: Vec<f64> = (0..GRID_PROBES)
            .map(|k| depth_min + (depth_max - depth_min) * k as f64 / (GRID_PROBES - 1) as f64)
            .collect();
        let mut values = Vec::with_capacity(grid.len());
        for &h in &grid {
            values.push(eval(h, &mut best)?);
        }
        let (k, v) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| (k, *v))
            .expect("non-empty grid");
        if v.is_finite() && depth_max > depth_min {
            let mut lo = grid[k.saturating_sub(1)];
            let mut hi = grid[(k + 1).min(grid.len() - 1)];
            let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = hi - inv_phi * (hi - lo);
            let mut x2 = lo + inv_phi * (hi - lo);
            let mut f1 = eval(x1, &mut best)?;
            let mut f2 = eval(x2, &mut best)?;
            while hi - lo > GOLDEN_TOL * hi.max(1.0) {
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = eval(x1, &mut best)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = eval(x2, &mut best)?;
                }
            }
        }
    }
    match best {
        Some((r0, contour, report)) => Ok(R0Search {
            contour,
            report,
            r0,
            probes,
        }),
        None => Err(Error::NoAdmissibleContour),
    }
}
