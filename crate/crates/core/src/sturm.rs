//! Oscillation counting for `−u'' − q u` on intervals and half-lines.
//!
//! With `(u, u') = ρ (sin θ, cos θ)` the zero-energy equation becomes
//! `θ' = cos²θ + q sin²θ`. Starting from `θ(a) = 0` (Dirichlet), the number
//! of negative Dirichlet eigenvalues on `[a, b]` is `⌊θ(b)/π⌋`.
//!
//! Pieces where `q ≡ 0` are propagated in closed form
//! (`tan θ` grows linearly); everything else goes through an adaptive
//! Dormand–Prince pair.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{EffectivePotential1D, Profile1D};

/// Potential `q ≥ 0` on `[a, b]`; the profile is restricted to the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential1D {
    a: f64,
    b: f64,
    profile: Profile1D,
}

impl Potential1D {
    pub fn new(a: f64, b: f64, profile: Profile1D) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidInput(format!("interval [{a}, {b}] is empty or not finite")));
        }
        Ok(Potential1D { a, b, profile })
    }

    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(a, b, Profile1D::indicator(a, b, c)?)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn profile(&self) -> &Profile1D {
        &self.profile
    }

    pub fn value(&self, t: f64) -> f64 {
        self.profile.value(t)
    }

    /// Linear pieces of `q` covering `[a, b]`, gaps filled with zero.
    fn pieces(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut out = Vec::new();
        let mut cursor = self.a;
        for (s0, s1, v0, v1) in self.profile.segments() {
            let (c0, c1) = (s0.max(self.a), s1.min(self.b));
            if c1 <= c0 {
                continue;
            }
            if c0 > cursor {
                out.push((cursor, c0, 0.0, 0.0));
            }
            let at = |t: f64| v0 + (v1 - v0) * (t - s0) / (s1 - s0);
            out.push((c0, c1, at(c0), at(c1)));
            cursor = c1;
        }
        if cursor < self.b {
            out.push((cursor, self.b, 0.0, 0.0));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PruferConfig {
    /// Absolute local error tolerance on the angle.
    pub abs_tol: f64,
    /// `θ(b)` this close to a multiple of `π` raises the boundary flag.
    pub boundary_tol: f64,
    pub max_steps: usize,
}

impl Default for PruferConfig {
    fn default() -> Self {
        PruferConfig {
            abs_tol: 1e-9,
            boundary_tol: 1e-6,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SturmCount {
    pub count: usize,
    pub theta_end: f64,
    /// `θ(b)` lies within the boundary tolerance of a multiple of `π`: zero
    /// is (nearly) an eigenvalue and the count may be off by one.
    pub boundary_case: bool,
}

/// `θ` after a stretch of length `len` with `q ≡ 0`: `tan θ` increases by `len`.
fn free_advance(theta: f64, len: f64) -> f64 {
    let k = (theta / PI + 0.5).floor();
    let phi = theta - k * PI;
    if phi <= -FRAC_PI_2 {
        return theta;
    }
    k * PI + (phi.tan() + len).atan()
}

// Dormand–Prince 5(4)
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rk_piece(theta0: f64, a: f64, b: f64, qa: f64, qb: f64, cfg: &PruferConfig, steps: &mut usize) -> Result<f64> {
    let slope = (qb - qa) / (b - a);
    let rhs = |t: f64, th: f64| {
        let q = qa + slope * (t - a);
        let (s, c) = th.sin_cos();
        c * c + q * s * s
    };
    let qmax = qa.max(qb);
    let mut h = ((b - a).min(0.1 / (1.0 + qmax.sqrt()))).max(1e-12);
    let mut t = a;
    let mut th = theta0;
    let mut k = [0.0; 7];
    while t < b {
        if *steps >= cfg.max_steps {
            return Err(Error::Precondition("Prüfer integration exceeded its step budget".into()));
        }
        let last = t + h >= b;
        let hh = if last { b - t } else { h };
        for i in 0..7 {
            let y = th + hh * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
            k[i] = rhs(t + C[i] * hh, y);
        }
        let y5 = th + hh * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
        let y4 = th + hh * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
        let err = (y5 - y4).abs();
        *steps += 1;
        // θ is nondecreasing; a step that moves backwards or jumps more than a
        // quarter turn could skip a crossing of a multiple of π
        let sane = y5 >= th - cfg.abs_tol && y5 - th <= FRAC_PI_2;
        if err <= cfg.abs_tol && sane {
            t = if last { b } else { t + hh };
            th = y5.max(th);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (cfg.abs_tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h = if sane { hh * factor } else { hh * 0.25 };
        if h < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::Precondition("Prüfer step size underflow".into()));
        }
    }
    Ok(th)
}

/// `θ(b)` for the Dirichlet start `θ(a) = 0`.
pub fn prufer_angle(q: &Potential1D, cfg: &PruferConfig) -> Result<f64> {
    if q.profile.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition("potential must be nonnegative".into()));
    }
    let mut theta = 0.0;
    let mut steps = 0;
    for (a, b, qa, qb) in q.pieces() {
        theta = if qa == 0.0 && qb == 0.0 {
            free_advance(theta, b - a)
        } else {
            rk_piece(theta, a, b, qa, qb, cfg, &mut steps)?
        };
    }
    Ok(theta)
}

fn classify(theta: f64, cfg: &PruferConfig) -> SturmCount {
    let count = (theta / PI).floor().max(0.0) as usize;
    let nearest = (theta / PI).round() * PI;
    SturmCount {
        count,
        theta_end: theta,
        boundary_case: theta > cfg.boundary_tol && (theta - nearest).abs() <= cfg.boundary_tol,
    }
}

/// Number of negative eigenvalues of `−u'' − q u` on `[a, b]` with Dirichlet ends.
pub fn prufer_count_interval(q: &Potential1D) -> Result<SturmCount> {
    prufer_count_interval_with(q, &PruferConfig::default())
}

pub fn prufer_count_interval_with(q: &Potential1D, cfg: &PruferConfig) -> Result<SturmCount> {
    Ok(classify(prufer_angle(q, cfg)?, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineCount {
    pub count: usize,
    /// Truncation length at which the count was read off.
    pub t_end: f64,
    /// The last two doublings of the truncation agreed.
    pub stable: bool,
    pub boundary_case: bool,
}

const MAX_DOUBLINGS: usize = 64;

/// Negative eigenvalues of `−u'' − q u` on `[0, T]`, Dirichlet at both
/// ends, with `T` doubled from `t_start` until two truncations agree.
///
/// `t_start = None` uses `support end + 8`.
pub fn halfline_count(q: &Profile1D, t_start: Option<f64>) -> Result<HalfLineCount> {
    halfline_count_with(q, t_start, &PruferConfig::default())
}

pub fn halfline_count_with(q: &Profile1D, t_start: Option<f64>, cfg: &PruferConfig) -> Result<HalfLineCount> {
    let Some((lo, hi)) = q.support() else {
        return Ok(HalfLineCount {
            count: 0,
            t_end: t_start.unwrap_or(8.0),
            stable: true,
            boundary_case: false,
        });
    };
    if lo < 0.0 {
        return Err(Error::InvalidInput(format!("half-line potential has support below 0 (at {lo})")));
    }
    let t0 = t_start.unwrap_or(hi + 8.0);
    if t0 < hi {
        return Err(Error::SupportOutsideDomain(format!("support reaches {hi}, beyond truncation {t0}")));
    }
    // everything past the support is free propagation, so only the support is integrated
    let theta_support = prufer_angle(&Potential1D::new(0.0, hi.max(f64::MIN_POSITIVE), q.clone())?, cfg)?;
    let at = |t: f64| classify(free_advance(theta_support, t - hi), cfg);
    // As T → ∞ the free tail drives θ to the next odd multiple of π/2, which
    // fixes the limiting count; doubling stops once the truncated counts reach it.
    let limit = (theta_support / PI + 0.5).floor() as usize;
    let near_threshold = ((theta_support / PI + 0.5) - (limit as f64)).abs() * PI <= cfg.boundary_tol;
    let mut t = t0;
    let mut prev = at(t);
    for _ in 0..MAX_DOUBLINGS {
        let next = at(2.0 * t);
        t *= 2.0;
        if next.count == prev.count && next.count == limit {
            return Ok(HalfLineCount {
                count: next.count,
                t_end: t,
                stable: true,
                boundary_case: next.boundary_case || near_threshold,
            });
        }
        prev = next;
    }
    Ok(HalfLineCount {
        count: prev.count,
        t_end: t,
        stable: false,
        boundary_case: prev.boundary_case || near_threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgCount {
    pub total: usize,
    pub positive_side: HalfLineCount,
    pub negative_side: HalfLineCount,
}

impl MgCount {
    pub fn stable(&self) -> bool {
        self.positive_side.stable && self.negative_side.stable
    }
}

/// `N₋` of `−φ'' − Gφ` on the line with `φ(0) = 0`: the sum of the two
/// half-line problems.
pub fn mg_count(g: &EffectivePotential1D, t_start: Option<f64>) -> Result<MgCount> {
    let pos = halfline_count(&g.profile.positive_part(), t_start)?;
    let neg = halfline_count(&g.profile.reflected_negative_part(), t_start)?;
    Ok(MgCount {
        total: pos.count + neg.count,
        positive_side: pos,
        negative_side: neg,
    })
}
