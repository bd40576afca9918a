//! Eigenvalue-estimate functionals: Orlicz norms, the `ζ̂` sequence and its
//! weak-`ℓ¹` quasinorm, the annuli sequence `μ`, and the lattice, plane and
//! graph functionals that bound `N₋`.
//!
//! All logarithms are natural.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::potential::{
    effective_g, radial_split, EdgeId, EdgePotentialField, EdgeProfile, EffectiveMode, EffectivePotential1D, LatticePotential, PlaneKind,
    PlanePotential, PolarGridSpec, RadialSplit,
};
use crate::quad::{gauss_legendre, integrate_with_breaks};

// ---------------------------------------------------------------------------
// N-functions

/// `𝔅(t) = (1+t)log(1+t) − t`.
pub fn orlicz_b(t: f64) -> f64 {
    let t = t.abs();
    (1.0 + t) * t.ln_1p() - t
}

/// `𝔄(t) = eᵗ − t − 1`, complementary to `𝔅`.
pub fn orlicz_a(t: f64) -> f64 {
    let t = t.abs();
    t.exp_m1() - t
}

/// Inverse of `𝔄` on `[0, ∞)`, by bisection.
pub fn orlicz_a_inv(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    // 𝔄(t) ≥ t²/2 and 𝔄(t) ≥ eᵗ/2 for t ≥ 2
    let mut hi = (2.0 * y).sqrt().min((2.0 * y).ln().max(2.0)) + 1.0;
    while orlicz_a(hi) < y {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if orlicz_a(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `𝔄(log(1+s)) = s − log(1+s)`, accurate for small `s`.
fn a_of_log1p(s: f64) -> f64 {
    if s < 1e-4 {
        // s²/2 − s³/3 + s⁴/4
        s * s * (0.5 - s * (1.0 / 3.0 - 0.25 * s))
    } else {
        s - s.ln_1p()
    }
}

/// A function that is constant on pieces of given measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub value: f64,
    pub measure: f64,
}

impl Piece {
    pub fn new(value: f64, measure: f64) -> Self {
        Piece { value, measure }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrliczNorm {
    pub value: f64,
    /// Multiplier of the dual problem; the maximizer is `g = log(1 + |v|/λ)`.
    pub lambda: f64,
    /// `∫_E 𝔄(g) − |E|` at the returned maximizer.
    pub residual: f64,
}

/// `sup {∫_E v g : ∫_E 𝔄(|g|) ≤ |E|}` for `v` constant on pieces of `E`;
/// `E` may extend beyond the pieces (where `v = 0`).
///
/// The supremum is attained at `g = log(1 + |v|/λ)`, with `λ > 0` fixed by
/// `Σ mᵢ (sᵢ − log(1+sᵢ)) = |E|`, `sᵢ = |vᵢ|/λ`; `λ` is found by bisection.
pub fn averaged_orlicz_norm(pieces: &[Piece], total_measure: f64) -> OrliczNorm {
    let active: Vec<(f64, f64)> = pieces
        .iter()
        .filter(|p| p.value != 0.0 && p.measure > 0.0)
        .map(|p| (p.value.abs(), p.measure))
        .collect();
    if active.is_empty() || total_measure <= 0.0 {
        return OrliczNorm {
            value: 0.0,
            lambda: f64::INFINITY,
            residual: 0.0,
        };
    }
    let budget = |lam: f64| active.iter().map(|&(v, m)| m * a_of_log1p(v / lam)).sum::<f64>();
    // budget is decreasing in λ; bracket in log λ
    let vmax = active.iter().map(|a| a.0).fold(0.0, f64::max);
    let (mut lo, mut hi) = (vmax.ln() - 1.0, vmax.ln() + 1.0);
    while budget(lo.exp()) < total_measure {
        lo -= 2.0 * (hi - lo);
    }
    while budget(hi.exp()) > total_measure {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if budget(mid.exp()) > total_measure {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = (0.5 * (lo + hi)).exp();
    let value = active.iter().map(|&(v, m)| m * v * (v / lambda).ln_1p()).sum();
    OrliczNorm {
        value,
        lambda,
        residual: budget(lambda) - total_measure,
    }
}

/// Luxemburg norm `inf {κ > 0 : ∫_E 𝔅(|v|/κ) ≤ budget}`.
pub fn luxemburg_norm(pieces: &[Piece], budget: f64) -> f64 {
    let active: Vec<(f64, f64)> = pieces
        .iter()
        .filter(|p| p.value != 0.0 && p.measure > 0.0)
        .map(|p| (p.value.abs(), p.measure))
        .collect();
    if active.is_empty() {
        return 0.0;
    }
    let f = |k: f64| active.iter().map(|&(v, m)| m * orlicz_b(v / k)).sum::<f64>();
    let vmax = active.iter().map(|a| a.0).fold(0.0, f64::max);
    let (mut lo, mut hi) = (vmax.ln() - 1.0, vmax.ln() + 1.0);
    while f(lo.exp()) < budget {
        lo -= 2.0 * (hi - lo);
    }
    while f(hi.exp()) > budget {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid.exp()) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

// ---------------------------------------------------------------------------
// ζ̂ and weak ℓ¹

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaSequence {
    /// `ζ̂ⱼ` for `j = 0..=J`.
    pub zeta: Vec<f64>,
    /// Largest index `J`.
    pub truncation: usize,
    /// The effective potential was cut off below this `t`.
    pub tail_truncated_below: f64,
}

/// `∫_c^d (p + q t) w(t) dt` with `w = 1` or `w = |t|`, `c, d` on one side of 0.
fn poly_moment(p: f64, q: f64, c: f64, d: f64, weighted: bool) -> f64 {
    if !weighted {
        return p * (d - c) + 0.5 * q * (d * d - c * c);
    }
    let prim = |t: f64| 0.5 * p * t * t + q * t * t * t / 3.0;
    let sign = if c + d >= 0.0 { 1.0 } else { -1.0 };
    sign * (prim(d) - prim(c))
}

/// `ζ̂₀ = ∫_{−1}^{1} G`, `ζ̂ⱼ = ∫_{e^{j−1} < |t| < e^j} |t| G(t) dt`, integrated
/// exactly for the piecewise-linear `G`. `J = ⌈log T⌉ + 1` where `T` bounds
/// `|t|` on the support of `G`.
pub fn zeta_sequence(g: &EffectivePotential1D) -> ZetaSequence {
    let tmax = g.profile.support().map_or(0.0, |(lo, hi)| lo.abs().max(hi.abs()));
    let j_max = if tmax <= 1.0 { 1 } else { tmax.ln().ceil() as usize + 1 };
    let mut zeta = vec![0.0; j_max + 1];
    // intervals on each side of the origin
    let mut bands: Vec<(usize, f64, f64)> = vec![(0, -1.0, 0.0), (0, 0.0, 1.0)];
    for j in 1..=j_max {
        let (a, b) = (((j - 1) as f64).exp(), (j as f64).exp());
        bands.push((j, a, b));
        bands.push((j, -b, -a));
    }
    for (a, b, va, vb) in g.profile.segments() {
        let q = (vb - va) / (b - a);
        let p = va - q * a;
        for &(j, c, d) in &bands {
            let (lo, hi) = (a.max(c), b.min(d));
            if hi > lo {
                zeta[j] += poly_moment(p, q, lo, hi, j > 0);
            }
        }
    }
    ZetaSequence {
        zeta,
        truncation: j_max,
        tail_truncated_below: g.truncated_below,
    }
}

/// `sup_{s>0} s·#{j : aⱼ > s} = max_k k·a₍ₖ₎` over the decreasing rearrangement.
pub fn weak_l1(seq: &[f64]) -> f64 {
    let mut a: Vec<f64> = seq.iter().map(|x| x.abs()).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    a.iter().enumerate().map(|(k, &x)| (k + 1) as f64 * x).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// annuli

/// Area of `[0, a] × [0, b]` inside the disc of radius `r` (`a, b ≥ 0`).
fn quadrant_box_disc(a: f64, b: f64, r: f64) -> f64 {
    if r <= 0.0 || a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    let h = |x: f64| 0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).clamp(-1.0, 1.0).asin());
    let xr = a.min(r);
    if b >= r {
        return h(xr);
    }
    let xc = (r * r - b * b).sqrt().min(xr);
    b * xc + h(xr) - h(xc)
}

/// Area of `[x0, x1] × [y0, y1] ∩ {|x| ≤ r}`.
pub fn rect_disc_area(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> f64 {
    let g = |x: f64, y: f64| x.signum() * y.signum() * quadrant_box_disc(x.abs(), y.abs(), r);
    g(x1, y1) - g(x0, y1) - g(x1, y0) + g(x0, y0)
}

/// Radii `(inner, outer)` of `Ω_k`: `Ω₀ = {|x| ≤ 1}`, `Ω_k = {2^{k−1} ≤ |x| ≤ 2^k}`.
pub fn annulus_radii(k: usize) -> (f64, f64) {
    if k == 0 {
        (0.0, 1.0)
    } else {
        (2f64.powi(k as i32 - 1), 2f64.powi(k as i32))
    }
}

pub fn annulus_area(k: usize) -> f64 {
    let (a, b) = annulus_radii(k);
    PI * (b * b - a * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PieceResolution {
    /// Radial rings per annulus for smooth radial potentials.
    pub rings: usize,
    /// Angular sectors for non-radial sampled potentials.
    pub sectors: usize,
}

impl Default for PieceResolution {
    fn default() -> Self {
        PieceResolution { rings: 256, sectors: 256 }
    }
}

/// `V` restricted to `{r_in ≤ |x| ≤ r_out}` as constant pieces.
pub fn plane_pieces(v: &PlanePotential, r_in: f64, r_out: f64, res: &PieceResolution) -> Vec<Piece> {
    let ring = |a: f64, b: f64| PI * (b * b - a * a);
    let clip = |a: f64, b: f64| (a.max(r_in), b.min(r_out));
    match v.kind() {
        PlaneKind::RadialIndicator { radius, value } => {
            let (a, b) = clip(0.0, *radius);
            if b > a {
                vec![Piece::new(*value, ring(a, b))]
            } else {
                vec![]
            }
        }
        PlaneKind::Annulus { inner, outer, value } => {
            let (a, b) = clip(*inner, *outer);
            if b > a {
                vec![Piece::new(*value, ring(a, b))]
            } else {
                vec![]
            }
        }
        PlaneKind::LatticeLift(l) => l
            .iter()
            .filter_map(|((x, y), val)| {
                let (x0, x1, y0, y1) = (x as f64, (x + 1) as f64, y as f64, (y + 1) as f64);
                let area = rect_disc_area(x0, x1, y0, y1, r_out) - rect_disc_area(x0, x1, y0, y1, r_in);
                (area > 0.0).then(|| Piece::new(val, area))
            })
            .collect(),
        PlaneKind::Gaussian { .. } => {
            let (a, b) = clip(0.0, v.support_radius());
            if b <= a {
                return vec![];
            }
            let n = res.rings.max(1);
            let (gx, gw) = gauss_legendre(4);
            (0..n)
                .map(|i| {
                    let r0 = a + (b - a) * i as f64 / n as f64;
                    let r1 = a + (b - a) * (i + 1) as f64 / n as f64;
                    // area-weighted ring average
                    let mass: f64 = gx
                        .iter()
                        .zip(&gw)
                        .map(|(x, w)| {
                            let r = r0 + 0.5 * (x + 1.0) * (r1 - r0);
                            w * 0.5 * (r1 - r0) * 2.0 * PI * r * v.value_polar(r, 0.0)
                        })
                        .sum();
                    Piece::new(mass / ring(r0, r1), ring(r0, r1))
                })
                .collect()
        }
        PlaneKind::Polar(_) | PlaneKind::Function(_) => {
            let (a, b) = clip(0.0, v.support_radius());
            if b <= a {
                return vec![];
            }
            let (nr, ns) = (res.rings.max(1), res.sectors.max(3));
            let mut out = Vec::with_capacity(nr * ns);
            for i in 0..nr {
                let r0 = a + (b - a) * i as f64 / nr as f64;
                let r1 = a + (b - a) * (i + 1) as f64 / nr as f64;
                let rm = 0.5 * (r0 + r1);
                for j in 0..ns {
                    let th = 2.0 * PI * (j as f64 + 0.5) / ns as f64;
                    out.push(Piece::new(v.value_polar(rm, th), ring(r0, r1) / ns as f64));
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSequence {
    pub mu: Vec<f64>,
}

impl MuSequence {
    pub fn l1(&self) -> f64 {
        self.mu.iter().sum()
    }
}

/// `μ_k = ‖V‖^{(av)}_{Ω_k}` for every annulus meeting the support.
pub fn mu_sequence(v: &PlanePotential) -> MuSequence {
    mu_sequence_with(v, &PieceResolution::default())
}

pub fn mu_sequence_with(v: &PlanePotential, res: &PieceResolution) -> MuSequence {
    if v.is_zero() {
        return MuSequence { mu: vec![0.0] };
    }
    let r = v.support_radius();
    let k_max = if r <= 1.0 { 0 } else { r.log2().ceil() as usize };
    let mu = (0..=k_max)
        .map(|k| {
            let (a, b) = annulus_radii(k);
            averaged_orlicz_norm(&plane_pieces(v, a, b, res), annulus_area(k)).value
        })
        .collect();
    MuSequence { mu }
}

// ---------------------------------------------------------------------------
// functionals

/// `Σ_x V(x) log(2 + |x|)`.
pub fn mv_functional(v: &LatticePotential) -> f64 {
    v.iter().map(|((x, y), val)| val * (2.0 + (x as f64).hypot(y as f64)).ln()).sum()
}

/// `∫ V(x) |log|x|| dx`.
pub fn log_integral(v: &PlanePotential) -> f64 {
    let radial = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
        // geometric grading towards the logarithmic singularity at 0
        let mut breaks: Vec<f64> = (0..48).map(|k| 0.5f64.powi(k)).collect();
        breaks.extend(v.radial_breaks());
        integrate_with_breaks(|r| 2.0 * PI * r * r.ln().abs() * f(r), a, b, &breaks, 2, 10)
    };
    match v.kind() {
        PlaneKind::RadialIndicator { radius, value } => value * radial(&|_| 1.0, 0.0, *radius),
        PlaneKind::Annulus { inner, outer, value } => value * radial(&|_| 1.0, *inner, *outer),
        PlaneKind::Gaussian { .. } => radial(&|r| v.value_polar(r, 0.0), 0.0, v.support_radius()),
        PlaneKind::LatticeLift(l) => l.iter().map(|((x, y), val)| val * square_abs_log(x, y)).sum(),
        PlaneKind::Polar(g) => {
            // ∫∫ V e^{2t} |t| dt dθ, trapezoid in t, periodic rule in θ
            let dth = 2.0 * PI / g.n_theta() as f64;
            let t = g.t();
            let f: Vec<f64> = (0..t.len())
                .map(|i| g.row(i).iter().sum::<f64>() * dth * (2.0 * t[i]).exp() * t[i].abs())
                .collect();
            (1..t.len()).map(|i| 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1])).sum()
        }
        PlaneKind::Function(_) => {
            let n = 512;
            let r_max = v.support_radius();
            let mut total = 0.0;
            for j in 0..n {
                let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                let breaks = [1.0];
                total +=
                    integrate_with_breaks(|r| r * r.ln().abs() * v.value_polar(r, th), 0.0, r_max, &breaks, 64, 8) * 2.0 * PI / n as f64;
            }
            total
        }
    }
}

/// `∫∫ |log|x|| dx` over the unit square with lower-left corner `(x, y)`.
///
/// `∫∫ log(x² + y²)` has the antiderivative
/// `xy log(x² + y²) − 3xy + x² atan(y/x) + y² atan(x/y)`; only the four squares
/// at the origin meet the unit disc, each in a quarter disc where
/// `∫ log r = −π/8`.
pub fn square_abs_log(x: i64, y: i64) -> f64 {
    let f = |x: f64, y: f64| {
        let mut s = 0.0;
        if x != 0.0 && y != 0.0 {
            s += x * y * (x * x + y * y).ln() - 3.0 * x * y;
        }
        if x != 0.0 {
            s += x * x * (y / x).atan();
        }
        if y != 0.0 {
            s += y * y * (x / y).atan();
        }
        s
    };
    let (x0, y0) = (x as f64, y as f64);
    let (x1, y1) = (x0 + 1.0, y0 + 1.0);
    let log_r = 0.5 * (f(x1, y1) - f(x0, y1) - f(x1, y0) + f(x0, y0));
    let at_origin = (-1..=0).contains(&x) && (-1..=0).contains(&y);
    if at_origin {
        log_r + PI / 4.0
    } else {
        log_r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mz94Terms {
    pub mu_l1: f64,
    pub log_integral: f64,
    pub mu: Vec<f64>,
}

impl Mz94Terms {
    pub fn total(&self) -> f64 {
        self.mu_l1 + self.log_integral
    }
}

/// `‖μ(V)‖_{ℓ¹}` and `∫ V |log|x|| dx`.
pub fn mz94_functional(v: &PlanePotential) -> Mz94Terms {
    if v.is_zero() {
        return Mz94Terms {
            mu_l1: 0.0,
            log_integral: 0.0,
            mu: vec![0.0],
        };
    }
    let mu = mu_sequence(v);
    Mz94Terms {
        mu_l1: mu.l1(),
        log_integral: log_integral(v),
        mu: mu.mu,
    }
}

/// How the per-circle norm of `V_nrad(r, ·)` is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleNorm {
    /// Averaged norm with `|S| = 2π`.
    #[default]
    Averaged,
    /// Luxemburg norm with budget 1.
    Luxemburg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShargTerms {
    pub weak_l1: f64,
    pub x_norm: f64,
    pub zeta: ZetaSequence,
}

/// `‖V_nrad(r, ·)‖` on the circle, for every grid radius.
pub fn circle_norms(split: &RadialSplit, norm: CircleNorm) -> Vec<f64> {
    let n = split.n_theta;
    let w = 2.0 * PI / n as f64;
    (0..split.t.len())
        .map(|i| {
            let pieces: Vec<Piece> = split.nrad_row(i).iter().map(|&x| Piece::new(x.abs(), w)).collect();
            match norm {
                CircleNorm::Averaged => averaged_orlicz_norm(&pieces, 2.0 * PI).value,
                CircleNorm::Luxemburg => luxemburg_norm(&pieces, 1.0),
            }
        })
        .collect()
}

/// `weak-ℓ¹(ζ̂(G_V))` and `∫₀^∞ ‖V_nrad(r, ·)‖ r dr`, both on the polar grid `spec`.
pub fn shargorodsky_functional(v: &PlanePotential, mode: EffectiveMode, spec: &PolarGridSpec, norm: CircleNorm) -> Result<ShargTerms> {
    let split = radial_split(v, spec)?;
    Ok(sharg_from_split(&split, mode, norm))
}

pub fn sharg_from_split(split: &RadialSplit, mode: EffectiveMode, norm: CircleNorm) -> ShargTerms {
    let zeta = zeta_sequence(&effective_g(split, mode));
    // ∫ f(r) r dr = ∫ f(eᵗ) e^{2t} dt
    let f: Vec<f64> = circle_norms(split, norm)
        .iter()
        .zip(&split.t)
        .map(|(n, t)| n * (2.0 * t).exp())
        .collect();
    let t = &split.t;
    let x_norm = (1..t.len()).map(|i| 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1])).sum();
    ShargTerms {
        weak_l1: weak_l1(&zeta.zeta),
        x_norm,
        zeta,
    }
}

/// Split points along an edge: profile breakpoints and the foot of the
/// perpendicular from the origin.
fn edge_breaks(e: &EdgeId, p: &EdgeProfile) -> Vec<f64> {
    let mut b = p.breaks();
    let (ax, ay) = (e.a.0 as f64, e.a.1 as f64);
    let (dx, dy) = ((e.b.0 - e.a.0) as f64, (e.b.1 - e.a.1) as f64);
    b.push((-(ax * dx + ay * dy)).clamp(0.0, 1.0));
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// `Λ(V) = Σ_e η(e) log(2 + ρ(e))`.
pub fn graph_lambda(v: &EdgePotentialField) -> f64 {
    v.masses().map(|(e, eta)| eta * (2.0 + e.rho()).ln()).sum()
}

/// `M(V) = ∫_Γ V(z) log(2 + |z|) dz`, Gauss quadrature between breakpoints.
pub fn graph_m(v: &EdgePotentialField) -> f64 {
    let (gx, gw) = gauss_legendre(8);
    v.iter()
        .map(|(e, p)| {
            let b = edge_breaks(e, p);
            b.windows(2)
                .map(|w| {
                    let (s0, s1) = (w[0], w[1]);
                    gx.iter()
                        .zip(&gw)
                        .map(|(x, wt)| {
                            let s = s0 + 0.5 * (x + 1.0) * (s1 - s0);
                            let (px, py) = e.point(s);
                            wt * 0.5 * (s1 - s0) * p.value(s) * (2.0 + px.hypot(py)).ln()
                        })
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum()
}

/// `Σ_e η(e) log(4 + ρ(e))`, an upper bound for `M` on unit edges.
pub fn graph_m_upper(v: &EdgePotentialField) -> f64 {
    v.masses().map(|(e, eta)| eta * (4.0 + e.rho()).ln()).sum()
}

// ---------------------------------------------------------------------------
// report

/// Evaluated functionals next to the counts they bound. Functionals that do
/// not apply to the potential type are absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub mv: Option<f64>,
    pub mz94_mu_l1: Option<f64>,
    pub mz94_log_integral: Option<f64>,
    pub sharg_weak_l1: Option<f64>,
    pub sharg_x_norm: Option<f64>,
    pub lambda: Option<f64>,
    pub m_integral: Option<f64>,
    pub zeta: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    /// Fitted constants, keyed by the inequality they calibrate.
    pub calibration: BTreeMap<String, f64>,
    /// Counts the functionals are compared against, keyed by operator.
    pub counts: BTreeMap<String, usize>,
}

impl BoundReport {
    pub fn for_lattice(v: &LatticePotential) -> Self {
        BoundReport {
            mv: Some(mv_functional(v)),
            ..Default::default()
        }
    }

    pub fn for_plane(v: &PlanePotential, mode: EffectiveMode, spec: &PolarGridSpec) -> Result<Self> {
        let mz = mz94_functional(v);
        let sh = shargorodsky_functional(v, mode, spec, CircleNorm::Averaged)?;
        Ok(BoundReport {
            mz94_mu_l1: Some(mz.mu_l1),
            mz94_log_integral: Some(mz.log_integral),
            sharg_weak_l1: Some(sh.weak_l1),
            sharg_x_norm: Some(sh.x_norm),
            zeta: Some(sh.zeta.zeta),
            mu: Some(mz.mu),
            ..Default::default()
        })
    }

    pub fn for_edges(v: &EdgePotentialField) -> Self {
        BoundReport {
            lambda: Some(graph_lambda(v)),
            m_integral: Some(graph_m(v)),
            ..Default::default()
        }
    }

    /// `(name, value)` for every evaluated scalar functional.
    pub fn functionals(&self) -> Vec<(&'static str, f64)> {
        [
            ("mv", self.mv),
            ("mz94_mu_l1", self.mz94_mu_l1),
            ("mz94_log_integral", self.mz94_log_integral),
            ("sharg_weak_l1", self.sharg_weak_l1),
            ("sharg_x_norm", self.sharg_x_norm),
            ("lambda", self.lambda),
            ("m_integral", self.m_integral),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }

    /// Rows `kind,name,value` for functionals, calibration constants and counts.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "name", "value"])?;
        for (k, v) in self.functionals() {
            w.write_record(["functional", k, &v.to_string()])?;
        }
        for (k, v) in &self.calibration {
            w.write_record(["calibration", k, &v.to_string()])?;
        }
        for (k, v) in &self.counts {
            w.write_record(["count", k, &v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{lift_lattice, Profile1D};

    fn g_of(profile: Profile1D) -> EffectivePotential1D {
        EffectivePotential1D {
            profile,
            mode: EffectiveMode::Jacobian,
            truncated_below: -10.0,
        }
    }

    #[test]
    fn orlicz_pair_basics() {
        assert_eq!(orlicz_a(0.0), 0.0);
        assert_eq!(orlicz_b(0.0), 0.0);
        assert!((orlicz_a(orlicz_a_inv(10.0)) - 10.0).abs() < 1e-12);
        assert!((orlicz_a_inv(1.0) - 1.1461932206205825).abs() < 1e-12);
        // Young: st ≤ 𝔄(s) + 𝔅(t)
        for i in 0..40 {
            for j in 0..40 {
                let (s, t) = (0.25 * i as f64, 0.5 * j as f64);
                assert!(s * t <= orlicz_a(s) + orlicz_b(t) + 1e-12);
            }
        }
    }

    #[test]
    fn averaged_norm_examples() {
        let r = averaged_orlicz_norm(&[Piece::new(1.0, 1.0)], 10.0);
        assert!((r.value - orlicz_a_inv(10.0)).abs() < 1e-9);
        assert!((r.value - 2.610868638149876).abs() < 1e-9);
        assert!(r.residual.abs() < 1e-9);
        let c = 3.0;
        let r = averaged_orlicz_norm(&[Piece::new(c, 2.0), Piece::new(c, 3.0)], 5.0);
        assert!((r.value - c * 5.0 * orlicz_a_inv(1.0)).abs() < 1e-9);
        assert_eq!(averaged_orlicz_norm(&[Piece::new(0.0, 2.0)], 2.0).value, 0.0);
        assert_eq!(averaged_orlicz_norm(&[], 2.0).value, 0.0);
    }

    #[test]
    fn averaged_norm_is_homogeneous() {
        let p = [Piece::new(0.3, 1.0), Piece::new(4.0, 0.5), Piece::new(1e-3, 2.0)];
        let p2: Vec<Piece> = p.iter().map(|x| Piece::new(2.0 * x.value, x.measure)).collect();
        let (a, b) = (averaged_orlicz_norm(&p, 6.0).value, averaged_orlicz_norm(&p2, 6.0).value);
        assert!((b - 2.0 * a).abs() < 1e-10 * b);
    }

    #[test]
    fn luxemburg_examples() {
        // constant c on measure m: m 𝔅(c/κ) = 1
        let k = luxemburg_norm(&[Piece::new(2.0, 1.0)], 1.0);
        assert!((orlicz_b(2.0 / k) - 1.0).abs() < 1e-10);
        assert_eq!(luxemburg_norm(&[], 1.0), 0.0);
    }

    #[test]
    fn zeta_examples() {
        let z = zeta_sequence(&g_of(Profile1D::indicator(-1.0, 1.0, 1.0).unwrap()));
        assert!((z.zeta[0] - 2.0).abs() < 1e-15);
        assert!(z.zeta[1..].iter().all(|&x| x == 0.0));
        let e = 1f64.exp();
        let z = zeta_sequence(&g_of(Profile1D::indicator(1.0, e, 1.0).unwrap()));
        assert!((z.zeta[1] - (e * e - 1.0) / 2.0).abs() < 1e-12);
        assert_eq!(z.zeta[0], 0.0);
        let z = zeta_sequence(&g_of(Profile1D::zero()));
        assert!(z.zeta.iter().all(|&x| x == 0.0));
        // negative side uses |t|
        let z = zeta_sequence(&g_of(Profile1D::indicator(-e, -1.0, 1.0).unwrap()));
        assert!((z.zeta[1] - (e * e - 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zeta_of_linear_piece_matches_quadrature() {
        let p = Profile1D::new(vec![-3.0, 0.5, 9.0], vec![2.0, 0.0, 5.0]).unwrap();
        let z = zeta_sequence(&g_of(p.clone()));
        for (j, &zj) in z.zeta.iter().enumerate() {
            let q = if j == 0 {
                crate::quad::integrate_with_breaks(|t| p.value(t), -1.0, 1.0, &[0.5], 8, 8)
            } else {
                let (a, b) = (((j - 1) as f64).exp(), (j as f64).exp());
                crate::quad::integrate_with_breaks(|t| t * p.value(t), a, b, &[0.5, 9.0], 8, 8)
                    + crate::quad::integrate_with_breaks(|t| -t * p.value(t), -b, -a, &[-3.0], 8, 8)
            };
            assert!((zj - q).abs() < 1e-10 * (1.0 + q.abs()), "j={j}: {zj} vs {q}");
        }
    }

    #[test]
    fn weak_l1_examples() {
        assert_eq!(weak_l1(&[3.0, 1.0, 1.0]), 3.0);
        assert_eq!(weak_l1(&[2.0, 2.0]), 4.0);
        assert_eq!(weak_l1(&[0.0, 0.0]), 0.0);
        // brute force over a grid of s
        let seq = [0.5, 4.0, 1.5, 1.5, 0.2];
        let brute = (1..100000)
            .map(|i| {
                let s = i as f64 * 1e-4;
                s * seq.iter().filter(|&&a| a > s).count() as f64
            })
            .fold(0.0, f64::max);
        assert!((weak_l1(&seq) - brute).abs() < 1e-3);
    }

    #[test]
    fn rect_disc_area_covers_disc() {
        for r in [0.7f64, 1.0, 2.5, 4.0] {
            let n = r.ceil() as i64 + 1;
            let total: f64 = (-n..n)
                .flat_map(|x| (-n..n).map(move |y| (x, y)))
                .map(|(x, y)| rect_disc_area(x as f64, (x + 1) as f64, y as f64, (y + 1) as f64, r))
                .sum();
            assert!((total - PI * r * r).abs() < 1e-12);
        }
        assert!((rect_disc_area(0.0, 1.0, 0.0, 1.0, 2f64.sqrt()) - 1.0).abs() < 1e-14);
        assert!((rect_disc_area(0.0, 1.0, 0.0, 1.0, 1.0) - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn mu_examples() {
        let v = PlanePotential::annulus(1.0, 2.0, 1.0).unwrap();
        let mu = mu_sequence(&v);
        assert!((mu.mu[1] - 3.0 * PI * orlicz_a_inv(1.0)).abs() < 1e-8);
        assert!((mu.mu[1] - 10.80).abs() < 1e-2);
        assert_eq!(mu.mu[0], 0.0);
        assert!(mu_sequence(&PlanePotential::radial_indicator(1.0, 0.0).unwrap())
            .mu
            .iter()
            .all(|&m| m == 0.0));
        let lift = lift_lattice(&LatticePotential::single((0, 0), 1.0).unwrap());
        let mu = mu_sequence(&lift);
        assert_eq!(mu.mu.len(), 2);
        assert!(mu.mu[0] > 0.0 && mu.mu[1] > 0.0);
    }

    #[test]
    fn mv_examples() {
        assert!((mv_functional(&LatticePotential::single((0, 0), 3.0).unwrap()) - 3.0 * 2f64.ln()).abs() < 1e-15);
        assert!((mv_functional(&LatticePotential::single((3, 4), 1.0).unwrap()) - 7f64.ln()).abs() < 1e-15);
        assert_eq!(mv_functional(&LatticePotential::new()), 0.0);
    }

    #[test]
    fn log_integral_examples() {
        let v = PlanePotential::annulus(1.0, 2.0, 1.0).unwrap();
        let exact = 2.0 * PI * (2.0 * 2f64.ln() - 0.75);
        assert!((log_integral(&v) - exact).abs() < 1e-12);
        let v = PlanePotential::radial_indicator(1.0, 1.0).unwrap();
        assert!((log_integral(&v) - PI / 2.0).abs() < 1e-12);
        let t = mz94_functional(&PlanePotential::radial_indicator(1.0, 0.0).unwrap());
        assert_eq!((t.mu_l1, t.log_integral), (0.0, 0.0));
        // lift of the four unit squares around the origin is the square [−1,1]²
        let four = LatticePotential::from_entries([((0, 0), 1.0), ((-1, 0), 1.0), ((0, -1), 1.0), ((-1, -1), 1.0)]).unwrap();
        let li = log_integral(&lift_lattice(&four));
        // ∫∫ log r over the unit square is (log 2 − 3 + π/2)/2; the part inside r < 1 is −π/8
        let quarter = PI / 4.0 + 0.5 * (2f64.ln() - 3.0 + PI / 2.0);
        assert!((li - 4.0 * quarter).abs() < 1e-12, "{}", li - 4.0 * quarter);
        for (x, y) in [(2, -1), (-3, 1), (0, 1), (5, 5)] {
            let q = crate::quad::adaptive_rect(
                &|px: f64, py: f64| px.hypot(py).ln().abs(),
                x as f64,
                (x + 1) as f64,
                y as f64,
                (y + 1) as f64,
                1e-13,
            );
            assert!((square_abs_log(x, y) - q).abs() < 1e-9);
        }
    }

    #[test]
    fn sharg_homogeneity_and_radial_case() {
        let spec = PolarGridSpec::symmetric(4.0, 401, 64);
        let v = PlanePotential::radial_indicator(1.0, 1.0).unwrap();
        let a = shargorodsky_functional(&v, EffectiveMode::Jacobian, &spec, CircleNorm::Averaged).unwrap();
        assert_eq!(a.x_norm, 0.0);
        let b = shargorodsky_functional(&v.scaled(3.0).unwrap(), EffectiveMode::Jacobian, &spec, CircleNorm::Averaged).unwrap();
        assert!((b.weak_l1 - 3.0 * a.weak_l1).abs() < 1e-12 * b.weak_l1);
        let nr = PlanePotential::from_fn(1.5, |r, th| if r <= 1.5 { 1.0 + th.cos() } else { 0.0 });
        let c = shargorodsky_functional(&nr, EffectiveMode::Jacobian, &spec, CircleNorm::Averaged).unwrap();
        let d = shargorodsky_functional(&nr.scaled(2.0).unwrap(), EffectiveMode::Jacobian, &spec, CircleNorm::Averaged).unwrap();
        assert!(c.x_norm > 0.0);
        assert!((d.x_norm - 2.0 * c.x_norm).abs() < 1e-10 * d.x_norm);
        let zero = PlanePotential::radial_indicator(1.0, 0.0).unwrap();
        let z = shargorodsky_functional(&zero, EffectiveMode::Jacobian, &spec, CircleNorm::Averaged).unwrap();
        assert_eq!((z.weak_l1, z.x_norm), (0.0, 0.0));
    }

    #[test]
    fn graph_functional_examples() {
        let one = |a, b| EdgePotentialField::from_edges([(EdgeId::new(a, b).unwrap(), EdgeProfile::Constant(1.0))]).unwrap();
        assert!((graph_lambda(&one((0, 0), (1, 0))) - 2f64.ln()).abs() < 1e-15);
        let far = one((3, 0), (4, 0));
        assert!((graph_lambda(&far) - 5f64.ln()).abs() < 1e-15);
        let exact = 6.0 * 6f64.ln() - 5.0 * 5f64.ln() - 1.0;
        assert!((graph_m(&far) - exact).abs() < 1e-13);
        assert!(graph_lambda(&far) <= graph_m(&far) && graph_m(&far) <= graph_m_upper(&far));
        assert_eq!(graph_lambda(&EdgePotentialField::new()), 0.0);
        assert_eq!(graph_m(&EdgePotentialField::new()), 0.0);
        // an edge through the origin
        let through = one((-1, 0), (0, 0));
        let exact = 3.0 * 3f64.ln() - 2.0 * 2f64.ln() - 1.0;
        assert!((graph_m(&through) - exact).abs() < 1e-13);
    }

    #[test]
    fn report_round_trip() {
        let r = BoundReport::for_lattice(&LatticePotential::single((1, 1), 2.0).unwrap());
        let js = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<BoundReport>(&js).unwrap(), r);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("functional,mv,"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn weak_below_l1(seq in proptest::collection::vec(0.0..100.0f64, 0..20)) {
                prop_assert!(weak_l1(&seq) <= seq.iter().sum::<f64>() + 1e-9);
            }

            #[test]
            fn dual_residual_small(vals in proptest::collection::vec((0.01..50.0f64, 0.1..3.0f64), 1..6), extra in 0.0..10.0f64) {
                let pieces: Vec<Piece> = vals.iter().map(|&(v, m)| Piece::new(v, m)).collect();
                let total = pieces.iter().map(|p| p.measure).sum::<f64>() + extra;
                let r = averaged_orlicz_norm(&pieces, total);
                prop_assert!(r.residual.abs() <= 1e-9 * total.max(1.0));
            }

            #[test]
            fn functionals_are_homogeneous(vals in proptest::collection::vec((-10i64..10, -10i64..10, 0.1..10.0f64), 1..10), c in 0.1..10.0f64) {
                let v = LatticePotential::from_entries(vals.iter().map(|&(x, y, w)| ((x, y), w))).unwrap();
                let cv = v.scaled(c).unwrap();
                prop_assert!((mv_functional(&cv) - c * mv_functional(&v)).abs() <= 1e-12 * c * mv_functional(&v).max(1.0));
                let e = EdgePotentialField::from_edges(vals.iter().map(|&(x, y, w)| (EdgeId::from_site((x, y), 0), EdgeProfile::Constant(w)))).unwrap();
                let ce = e.scaled(c).unwrap();
                prop_assert!((graph_lambda(&ce) - c * graph_lambda(&e)).abs() <= 1e-12 * c * graph_lambda(&e).max(1.0));
                prop_assert!((graph_m(&ce) - c * graph_m(&e)).abs() <= 1e-12 * c * graph_m(&e).max(1.0));
                prop_assert!(graph_lambda(&e) <= graph_m(&e));
                prop_assert!(graph_m(&e) <= graph_m_upper(&e));
            }
        }
    }
}
