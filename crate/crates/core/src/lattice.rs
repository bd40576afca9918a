//! The discrete operator `−Δ − αV` on `Z²`, truncated to Dirichlet boxes.
//!
//! The form is `Σ_x |u(x+e₁) − u(x)|² + |u(x+e₂) − u(x)|² − α Σ_x V(x)|u(x)|²`,
//! so the free symbol is `4 − 2cos ξ₁ − 2cos ξ₂ ∈ [0, 8]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inertia::{ldlt_inertia_with, InertiaConfig, Ordering, SymSkylineMatrix, SymSparse};
use crate::potential::{LatticePotential, Site};

/// Finitely supported function on `Z²`.
pub type LatticeFunction = BTreeMap<Site, f64>;

/// Sites of `[−L, L]²`; everything outside is clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxTruncation {
    pub half_width: i64,
}

impl BoxTruncation {
    pub fn new(half_width: i64) -> Result<Self> {
        if half_width < 1 {
            return Err(Error::InvalidInput(format!("box half-width must be ≥ 1, got {half_width}")));
        }
        Ok(BoxTruncation { half_width })
    }

    pub fn side(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, (x, y): Site) -> Option<usize> {
        let l = self.half_width;
        if x.abs() > l || y.abs() > l {
            return None;
        }
        Some(((y + l) as usize) * self.side() + (x + l) as usize)
    }

    pub fn site(&self, k: usize) -> Site {
        let s = self.side();
        ((k % s) as i64 - self.half_width, (k / s) as i64 - self.half_width)
    }

    /// The support of `v` avoids the outermost ring of the box.
    pub fn strictly_contains(&self, v: &LatticePotential) -> bool {
        v.chebyshev_extent().is_none_or(|e| e < self.half_width)
    }
}

/// Free-form sparse matrix on `box`: `Σ` squared differences minus `diag`
/// at each site. Sites where `keep` is false are removed (clamped).
fn lattice_form(b: &BoxTruncation, diag: impl Fn(Site) -> f64, keep: impl Fn(Site) -> bool) -> (SymSparse, Vec<Site>) {
    let mut id = vec![usize::MAX; b.len()];
    let mut sites = Vec::new();
    for (k, slot) in id.iter_mut().enumerate() {
        let s = b.site(k);
        if keep(s) {
            *slot = sites.len();
            sites.push(s);
        }
    }
    let mut a = SymSparse::with_capacity(sites.len(), 3 * sites.len());
    for (i, &(x, y)) in sites.iter().enumerate() {
        a.add(i, i, 4.0 - diag((x, y)));
        for nb in [(x + 1, y), (x, y + 1)] {
            if let Some(k) = b.index(nb) {
                if id[k] != usize::MAX {
                    a.add(id[k], i, -1.0);
                }
            }
        }
    }
    (a, sites)
}

/// Assembled `−Δ − αV` on a box, rows in reverse Cuthill–McKee order.
#[derive(Debug, Clone)]
pub struct LatticeAssembly {
    pub matrix: SymSkylineMatrix,
    pub ordering: Ordering,
    /// `sites[k]` is the site of original row `k` (row-major in the box).
    pub sites: Vec<Site>,
    /// False when the support touches or leaves the box.
    pub support_inside: bool,
}

pub fn assemble_lattice(v: &LatticePotential, alpha: f64, b: BoxTruncation) -> Result<LatticeAssembly> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("coupling must be finite and ≥ 0, got {alpha}")));
    }
    let (sparse, sites) = lattice_form(&b, |s| alpha * v.get(s), |_| true);
    let (matrix, ordering) = SymSkylineMatrix::from_sparse_rcm(&sparse);
    Ok(LatticeAssembly {
        matrix,
        ordering,
        sites,
        support_inside: b.strictly_contains(v),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeCountConfig {
    pub l_max: i64,
    /// Eigenvalues strictly below this shift are counted.
    pub shift: f64,
    pub inertia: InertiaConfig,
}

impl Default for LatticeCountConfig {
    fn default() -> Self {
        LatticeCountConfig {
            l_max: 64,
            shift: 0.0,
            inertia: InertiaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxCount {
    pub half_width: i64,
    pub count: usize,
    /// Eigenvalues within pivot tolerance of the shift.
    pub zeros: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeCountResult {
    pub counts: Vec<BoxCount>,
    /// The last two boxes agree (and, for a nonzero potential, on a nonzero count).
    pub converged: bool,
    /// `|supp V|`.
    pub rank_bound: usize,
}

impl LatticeCountResult {
    pub fn count(&self) -> usize {
        self.counts.last().map_or(0, |c| c.count)
    }

    pub fn final_half_width(&self) -> Option<i64> {
        self.counts.last().map(|c| c.half_width)
    }

    pub fn monotone(&self) -> bool {
        self.counts.windows(2).all(|w| w[0].count <= w[1].count)
    }
}

/// Count on a single box.
pub fn count_lattice_box(v: &LatticePotential, alpha: f64, b: BoxTruncation, shift: f64, cfg: &InertiaConfig) -> Result<BoxCount> {
    let asm = assemble_lattice(v, alpha, b)?;
    let r = ldlt_inertia_with(&asm.matrix, shift, cfg)?;
    Ok(BoxCount {
        half_width: b.half_width,
        count: r.negatives,
        zeros: r.zeros,
    })
}

/// `N₋(−Δ − αV)` over boxes `L = 2, 4, 8, … ≤ l_max` that strictly contain
/// the support, stopping when two consecutive boxes agree.
///
/// Box counts are lower bounds for the count on `Z²`. Every nonzero
/// `V ≥ 0` binds at least one state in two dimensions, so a pair of zero
/// counts is treated as unresolved rather than converged.
pub fn count_negative_lattice(v: &LatticePotential, alpha: f64, l_max: i64) -> Result<LatticeCountResult> {
    count_negative_lattice_with(
        v,
        alpha,
        &LatticeCountConfig {
            l_max,
            ..Default::default()
        },
    )
}

pub fn count_negative_lattice_with(v: &LatticePotential, alpha: f64, cfg: &LatticeCountConfig) -> Result<LatticeCountResult> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("coupling must be finite and ≥ 0, got {alpha}")));
    }
    let rank_bound = v.support_len();
    let mut result = LatticeCountResult {
        counts: Vec::new(),
        converged: false,
        rank_bound,
    };
    if (v.is_empty() || alpha == 0.0) && cfg.shift <= 0.0 {
        // −Δ ≥ 0 on every box
        result.counts.push(BoxCount {
            half_width: 2.max(v.chebyshev_extent().unwrap_or(0) + 1),
            count: 0,
            zeros: 0,
        });
        result.converged = true;
        return Ok(result);
    }
    let extent = v.chebyshev_extent().unwrap_or(0);
    let mut l = 2;
    while l <= cfg.l_max {
        if l > extent {
            let c = count_lattice_box(v, alpha, BoxTruncation::new(l)?, cfg.shift, &cfg.inertia)?;
            result.counts.push(c);
            let n = result.counts.len();
            if n >= 2 && result.counts[n - 2].count == c.count && (c.count > 0 || cfg.shift > 0.0) {
                result.converged = true;
                break;
            }
        }
        l *= 2;
    }
    Ok(result)
}

/// `Σ` over both edge directions of squared differences.
pub fn sobolev_seminorm(u: &LatticeFunction) -> f64 {
    let get = |s: Site| u.get(&s).copied().unwrap_or(0.0);
    let mut total = 0.0;
    for (&(x, y), &val) in u {
        for (dx, dy) in [(1, 0), (0, 1)] {
            let nb = (x + dx, y + dy);
            total += (get(nb) - val).powi(2);
            // edges into the support from outside
            let back = (x - dx, y - dy);
            if !u.contains_key(&back) {
                total += val * val;
            }
        }
    }
    total
}

/// `|x|⁻² log(|x| + 2)⁻²`, the lattice Hardy weight (undefined at the origin).
pub fn hardy_weight((x, y): Site) -> f64 {
    let r = (x as f64).hypot(y as f64);
    1.0 / (r * r * (r + 2.0).ln().powi(2))
}

/// `‖u‖² / Σ_{x≠0} |u(x)|² w(x)` for `u` vanishing at the origin.
pub fn hardy_ratio(u: &LatticeFunction) -> Result<f64> {
    if u.get(&(0, 0)).is_some_and(|&v| v != 0.0) {
        return Err(Error::Precondition("u must vanish at the origin".into()));
    }
    let denom: f64 = u
        .iter()
        .filter(|(s, _)| **s != (0, 0))
        .map(|(&s, &v)| v * v * hardy_weight(s))
        .sum();
    if denom == 0.0 {
        return Err(Error::Precondition("u must be nonzero".into()));
    }
    Ok(sobolev_seminorm(u) / denom)
}

fn hardy_pencil(b: &BoxTruncation, sigma: f64) -> SymSkylineMatrix {
    let (sparse, _) = lattice_form(b, |s| sigma * hardy_weight(s), |s| s != (0, 0));
    SymSkylineMatrix::from_sparse_rcm(&sparse).0
}

/// Smallest generalized eigenvalue of (seminorm, Hardy weight) on the box
/// with the origin clamped, by bisection on the inertia of `K − σW`.
///
/// `upper` must bound the answer from above; `None` uses the ratio of `δ_(1,0)`.
pub fn min_hardy_ratio(b: BoxTruncation, upper: Option<f64>, rel_tol: f64) -> Result<f64> {
    let cfg = InertiaConfig::default();
    let mut hi = upper.unwrap_or(4.0 / hardy_weight((1, 0)));
    let mut lo = 0.0;
    // make sure `hi` really brackets
    while ldlt_inertia_with(&hardy_pencil(&b, hi), 0.0, &cfg)?.negatives == 0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        let r = ldlt_inertia_with(&hardy_pencil(&b, mid), 0.0, &cfg)?;
        if r.negatives + r.zeros > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Minimal Hardy ratios over growing boxes. Each box reuses the previous
/// value as its upper bracket, so the sequence is nonincreasing by construction
/// of the bracket and by domain inclusion.
pub fn hardy_scan(half_widths: &[i64], rel_tol: f64) -> Result<Vec<(i64, f64)>> {
    let mut out = Vec::with_capacity(half_widths.len());
    let mut upper = None;
    for &l in half_widths {
        let r = min_hardy_ratio(BoxTruncation::new(l)?, upper, rel_tol)?;
        out.push((l, r));
        upper = Some(r);
    }
    Ok(out)
}
