//! The chessboard mesh: vertices `Z²`, unit edges between neighbours, and
//! `−d²/dz² − αV` on every edge with Kirchhoff conditions at the vertices.
//!
//! Each edge is split into `m` P1 elements. Vertex values are shared
//! between the incident edges, which imposes continuity; the Kirchhoff
//! condition is the natural condition of the form. Vertices on the patch
//! boundary are clamped.
//!
//! Counting eliminates the interior nodes of every edge first (one
//! tridiagonal block per edge) and factors the remaining vertex system:
//! by Haynsworth's inertia additivity the negatives of the full matrix are
//! the negatives of the edge blocks plus those of the Schur complement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inertia::{ldlt_inertia, SymSkylineMatrix, SymSparse};
use crate::lattice::{count_negative_lattice_with, LatticeCountConfig, LatticeFunction};
use crate::potential::{edge_effective_lattice, EdgeId, EdgePotentialField, Profile1D, Site};
use crate::quad::gauss_legendre;
use crate::sturm::{prufer_count_interval, Potential1D};

/// Finite piece of the mesh: vertices of `[−L, L]²` and the edges between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChessboardPatch {
    pub half_width: i64,
    /// Elements per edge.
    pub m: usize,
}

impl ChessboardPatch {
    pub fn new(half_width: i64, m: usize) -> Result<Self> {
        if half_width < 1 || m < 2 {
            return Err(Error::InvalidInput(format!(
                "patch needs L ≥ 1 and m ≥ 2, got L={half_width}, m={m}"
            )));
        }
        Ok(ChessboardPatch { half_width, m })
    }

    fn side_interior(&self) -> usize {
        (2 * self.half_width - 1) as usize
    }

    pub fn interior_vertices(&self) -> usize {
        self.side_interior().pow(2)
    }

    /// Unknown index of an interior vertex; `None` for clamped or outside vertices.
    pub fn vertex_index(&self, (x, y): Site) -> Option<usize> {
        let l = self.half_width;
        if x.abs() >= l || y.abs() >= l {
            return None;
        }
        Some(((y + l - 1) as usize) * self.side_interior() + (x + l - 1) as usize)
    }

    pub fn is_clamped(&self, (x, y): Site) -> bool {
        x.abs() == self.half_width || y.abs() == self.half_width
    }

    pub fn contains_vertex(&self, (x, y): Site) -> bool {
        x.abs() <= self.half_width && y.abs() <= self.half_width
    }

    /// All unit edges with both endpoints in the patch.
    pub fn edges(&self) -> Vec<EdgeId> {
        let l = self.half_width;
        let mut out = Vec::with_capacity(2 * (2 * l + 1) as usize * (2 * l) as usize);
        for y in -l..=l {
            for x in -l..=l {
                if x < l {
                    out.push(EdgeId::from_site((x, y), 0));
                }
                if y < l {
                    out.push(EdgeId::from_site((x, y), 1));
                }
            }
        }
        out
    }

    /// Edge inside the patch and not lying on its boundary square.
    pub fn holds_edge(&self, e: &EdgeId) -> bool {
        self.contains_vertex(e.a) && self.contains_vertex(e.b) && !(self.is_clamped(e.a) && self.is_clamped(e.b))
    }

    pub fn unknowns(&self) -> usize {
        self.interior_vertices() + self.edges().len() * (self.m - 1)
    }

    fn check_support(&self, v: &EdgePotentialField) -> Result<()> {
        for (e, _) in v.iter() {
            if !self.holds_edge(e) {
                return Err(Error::SupportOutsideDomain(format!(
                    "edge {:?}–{:?} is not inside the patch of half-width {}",
                    e.a, e.b, self.half_width
                )));
            }
        }
        Ok(())
    }
}

type Mat2 = [[f64; 2]; 2];

/// Element matrices `stiffness − (αV-weighted mass) − σ·mass` along one edge.
/// `V` is taken linear on each element, which is exact whenever the profile
/// breakpoints fall on element nodes.
fn edge_elements(v: &EdgePotentialField, e: &EdgeId, alpha: f64, sigma: f64, m: usize) -> Vec<Mat2> {
    let h = 1.0 / m as f64;
    let profile = v.profile(e);
    let val = |k: usize| profile.map_or(0.0, |p| alpha * p.value(k as f64 * h));
    (0..m)
        .map(|k| {
            let (va, vb) = (val(k), val(k + 1));
            let s = 1.0 / h;
            let m00 = h / 12.0 * (3.0 * va + vb) + sigma * h / 3.0;
            let m01 = h / 12.0 * (va + vb) + sigma * h / 6.0;
            let m11 = h / 12.0 * (va + 3.0 * vb) + sigma * h / 3.0;
            [[s - m00, -s - m01], [-s - m01, s - m11]]
        })
        .collect()
}

/// Weighted mass `∫ w φᵢφⱼ` on each element of an edge, by 4-point Gauss.
fn weighted_elements(e: &EdgeId, m: usize, w: &dyn Fn(f64, f64) -> f64) -> Vec<Mat2> {
    let h = 1.0 / m as f64;
    let (gx, gw) = gauss_legendre(4);
    (0..m)
        .map(|k| {
            let mut out = [[0.0; 2]; 2];
            for (x, wt) in gx.iter().zip(&gw) {
                let t = 0.5 * (x + 1.0);
                let (px, py) = e.point((k as f64 + t) * h);
                let f = [1.0 - t, t];
                let ww = w(px, py) * wt * 0.5 * h;
                for i in 0..2 {
                    for j in 0..2 {
                        out[i][j] += ww * f[i] * f[j];
                    }
                }
            }
            out
        })
        .collect()
}

/// Assembled graph form with the layout of its unknowns.
#[derive(Debug, Clone)]
pub struct GraphAssembly {
    pub sparse: SymSparse,
    pub patch: ChessboardPatch,
    /// Edges in the order their interior nodes are numbered after the vertices.
    pub edges: Vec<EdgeId>,
    /// Unknowns touching an element with `V > 0`.
    pub rank_bound: usize,
}

impl GraphAssembly {
    pub fn edge_node(&self, edge_pos: usize, k: usize) -> usize {
        self.patch.interior_vertices() + edge_pos * (self.patch.m - 1) + (k - 1)
    }

    pub fn to_skyline(&self) -> SymSkylineMatrix {
        SymSkylineMatrix::from_sparse_rcm(&self.sparse).0
    }
}

fn assemble_with(
    patch: ChessboardPatch,
    elements: &dyn Fn(&EdgeId) -> Vec<Mat2>,
    clamp: &dyn Fn(Site) -> bool,
) -> (SymSparse, Vec<EdgeId>) {
    let edges = patch.edges();
    let nv = patch.interior_vertices();
    let m = patch.m;
    let n = nv + edges.len() * (m - 1);
    let mut a = SymSparse::with_capacity(n, 3 * n);
    for (pos, e) in edges.iter().enumerate() {
        let els = elements(e);
        let node = |k: usize| -> Option<usize> {
            if k == 0 {
                patch.vertex_index(e.a).filter(|_| !clamp(e.a))
            } else if k == m {
                patch.vertex_index(e.b).filter(|_| !clamp(e.b))
            } else {
                Some(nv + pos * (m - 1) + (k - 1))
            }
        };
        for (k, el) in els.iter().enumerate() {
            let ids = [node(k), node(k + 1)];
            for i in 0..2 {
                let Some(gi) = ids[i] else { continue };
                for j in 0..=i {
                    let Some(gj) = ids[j] else { continue };
                    a.add(gi, gj, el[i][j]);
                }
            }
        }
    }
    // clamped interior vertices keep a unit row so the matrix stays nonsingular
    let l = patch.half_width;
    for y in 1 - l..l {
        for x in 1 - l..l {
            if let Some(i) = patch.vertex_index((x, y)).filter(|_| clamp((x, y))) {
                a.add(i, i, 1.0);
            }
        }
    }
    (a, edges)
}

/// Sparse `K − αM_V − σM` on a patch.
pub fn assemble_graph_pencil(v: &EdgePotentialField, alpha: f64, sigma: f64, patch: ChessboardPatch) -> Result<GraphAssembly> {
    if !(alpha >= 0.0 && alpha.is_finite() && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("need finite α ≥ 0 and finite σ, got {alpha}, {sigma}")));
    }
    patch.check_support(v)?;
    let (sparse, edges) = assemble_with(patch, &|e| edge_elements(v, e, alpha, sigma, patch.m), &|_| false);
    let m = patch.m;
    let mut touched = std::collections::BTreeSet::new();
    for (pos, e) in edges.iter().enumerate() {
        if v.profile(e).is_some() && alpha > 0.0 {
            for k in 1..m {
                touched.insert(patch.interior_vertices() + pos * (m - 1) + (k - 1));
            }
            for s in [e.a, e.b] {
                if let Some(i) = patch.vertex_index(s) {
                    touched.insert(i);
                }
            }
        }
    }
    Ok(GraphAssembly {
        sparse,
        patch,
        edges,
        rank_bound: touched.len(),
    })
}

/// `K − αM_V`; negatives at shift 0 are the negative eigenvalues on the patch.
pub fn assemble_graph(v: &EdgePotentialField, alpha: f64, patch: ChessboardPatch) -> Result<GraphAssembly> {
    assemble_graph_pencil(v, alpha, 0.0, patch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInertia {
    pub negatives: usize,
    pub zeros: usize,
    /// Negatives of the edge blocks alone: the patch count with every vertex clamped.
    pub edge_block_negatives: usize,
    /// False when a singular edge block forced a factorization of the full matrix.
    pub condensed: bool,
}

/// Inertia of a tridiagonal matrix via its LDLᵀ pivots plus the corner
/// entries of the inverse; `None` if a pivot falls below `tol`.
fn tridiagonal_condense(diag: &[f64], off: &[f64], tol: f64) -> Option<(usize, f64, f64, f64)> {
    let n = diag.len();
    let mut d = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n.saturating_sub(1));
    let mut neg = 0;
    for i in 0..n {
        let di = if i == 0 {
            diag[0]
        } else {
            diag[i] - l[i - 1] * l[i - 1] * d[i - 1]
        };
        if !(di.abs() > tol) {
            return None;
        }
        if di < 0.0 {
            neg += 1;
        }
        d.push(di);
        if i + 1 < n {
            l.push(off[i] / di);
        }
    }
    let solve = |k: usize| {
        let mut x = vec![0.0; n];
        x[k] = 1.0;
        for i in 1..n {
            x[i] -= l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= d[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= l[i] * x[i + 1];
        }
        x
    };
    let x = solve(0);
    let y = solve(n - 1);
    Some((neg, x[0], x[n - 1], y[n - 1]))
}

/// Inertia of `K − αM_V − σM` on the patch.
pub fn graph_inertia(v: &EdgePotentialField, alpha: f64, sigma: f64, patch: ChessboardPatch) -> Result<GraphInertia> {
    if !(alpha >= 0.0 && alpha.is_finite() && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("need finite α ≥ 0 and finite σ, got {alpha}, {sigma}")));
    }
    patch.check_support(v)?;
    let m = patch.m;
    let nv = patch.interior_vertices();
    let mut schur = SymSparse::with_capacity(nv, 3 * nv);
    let mut edge_neg = 0;
    let mut blocked = false;
    for e in patch.edges() {
        let els = edge_elements(v, &e, alpha, sigma, m);
        let diag: Vec<f64> = (1..m).map(|k| els[k - 1][1][1] + els[k][0][0]).collect();
        let off: Vec<f64> = (1..m - 1).map(|k| els[k][0][1]).collect();
        let scale = diag.iter().chain(&off).fold(0.0_f64, |s, x| s.max(x.abs()));
        let Some((neg, g11, g1n, gnn)) = tridiagonal_condense(&diag, &off, 1e-12 * scale) else {
            blocked = true;
            break;
        };
        edge_neg += neg;
        let (ia, ib) = (patch.vertex_index(e.a), patch.vertex_index(e.b));
        let (ca, cb) = (els[0][0][1], els[m - 1][0][1]);
        if let Some(i) = ia {
            schur.add(i, i, els[0][0][0] - ca * ca * g11);
        }
        if let Some(j) = ib {
            schur.add(j, j, els[m - 1][1][1] - cb * cb * gnn);
        }
        if let (Some(i), Some(j)) = (ia, ib) {
            schur.add(i, j, -ca * cb * g1n);
        }
    }
    if blocked {
        let full = assemble_graph_pencil(v, alpha, sigma, patch)?;
        let r = ldlt_inertia(&full.to_skyline(), 0.0)?;
        let edge_only = edge_block_count(v, alpha, sigma, patch)?;
        return Ok(GraphInertia {
            negatives: r.negatives,
            zeros: r.zeros,
            edge_block_negatives: edge_only,
            condensed: false,
        });
    }
    let (s, _) = SymSkylineMatrix::from_sparse_rcm(&schur);
    let r = ldlt_inertia(&s, 0.0)?;
    Ok(GraphInertia {
        negatives: edge_neg + r.negatives,
        zeros: r.zeros,
        edge_block_negatives: edge_neg,
        condensed: true,
    })
}

/// Negatives of the edge blocks with every vertex clamped, through the
/// general factorization (used when a block is singular).
fn edge_block_count(v: &EdgePotentialField, alpha: f64, sigma: f64, patch: ChessboardPatch) -> Result<usize> {
    let (sparse, _) = assemble_with(patch, &|e| edge_elements(v, e, alpha, sigma, patch.m), &|_| true);
    Ok(ldlt_inertia(&SymSkylineMatrix::from_sparse_rcm(&sparse).0, 0.0)?.negatives)
}

/// Eigenvalues of the pencil on the patch strictly below `sigma`.
pub fn count_graph_below(v: &EdgePotentialField, alpha: f64, patch: ChessboardPatch, sigma: f64) -> Result<usize> {
    Ok(graph_inertia(v, alpha, sigma, patch)?.negatives)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphCountConfig {
    pub l_max: i64,
    pub m: usize,
    /// Recount the final patch with `2m` elements per edge.
    pub refine: bool,
}

impl Default for GraphCountConfig {
    fn default() -> Self {
        GraphCountConfig {
            l_max: 32,
            m: 16,
            refine: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphCountResult {
    /// `(L, count)` in increasing `L`.
    pub counts: Vec<(i64, usize)>,
    pub m: usize,
    pub converged: bool,
    pub refined_count: Option<usize>,
    /// Per-edge Dirichlet negatives on the final patch.
    pub edge_block_negatives: usize,
}

impl GraphCountResult {
    pub fn count(&self) -> usize {
        self.counts.last().map_or(0, |c| c.1)
    }

    pub fn monotone(&self) -> bool {
        self.counts.windows(2).all(|w| w[0].1 <= w[1].1)
    }
}

/// Counts over patches `L = 2, 4, 8, … ≤ l_max` that hold the support,
/// stopping when two consecutive patches agree on a nonzero count.
pub fn count_negative_graph(v: &EdgePotentialField, alpha: f64, cfg: &GraphCountConfig) -> Result<GraphCountResult> {
    let mut result = GraphCountResult {
        counts: Vec::new(),
        m: cfg.m,
        converged: false,
        refined_count: None,
        edge_block_negatives: 0,
    };
    let extent = v.chebyshev_extent().unwrap_or(0);
    if v.is_empty() || alpha == 0.0 {
        result.counts.push((2.max(extent + 1), 0));
        result.converged = true;
        return Ok(result);
    }
    let mut l = 2;
    while l <= cfg.l_max {
        if l > extent {
            let r = graph_inertia(v, alpha, 0.0, ChessboardPatch::new(l, cfg.m)?)?;
            result.counts.push((l, r.negatives));
            result.edge_block_negatives = r.edge_block_negatives;
            let n = result.counts.len();
            if n >= 2 && result.counts[n - 2].1 == r.negatives && r.negatives > 0 {
                result.converged = true;
                break;
            }
        }
        l *= 2;
    }
    if cfg.refine {
        if let Some(&(last, _)) = result.counts.last() {
            result.refined_count = Some(count_graph_below(v, alpha, ChessboardPatch::new(last, 2 * cfg.m)?, 0.0)?);
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirichletComponentCount {
    pub count: usize,
    /// Some edge sits at (or within tolerance of) a zero Dirichlet eigenvalue.
    pub boundary_case: bool,
}

/// `N₋(H_𝒟)`: the sum over edges of the Dirichlet counts of `−u'' − αV`.
pub fn dirichlet_component_count(v: &EdgePotentialField, alpha: f64) -> Result<DirichletComponentCount> {
    let mut out = DirichletComponentCount {
        count: 0,
        boundary_case: false,
    };
    if alpha == 0.0 {
        return Ok(out);
    }
    for (_, p) in v.iter() {
        let s = p.breaks();
        let q = Profile1D::new(s.clone(), s.iter().map(|&t| alpha * p.value(t)).collect())?;
        let r = prufer_count_interval(&Potential1D::new(0.0, 1.0, q)?)?;
        out.count += r.count;
        out.boundary_case |= r.boundary_case;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecouplingConfig {
    pub graph: GraphCountConfig,
    pub lattice_l_max: i64,
}

impl Default for DecouplingConfig {
    fn default() -> Self {
        DecouplingConfig {
            graph: GraphCountConfig::default(),
            lattice_l_max: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub alpha: f64,
    /// `N₋` of the graph operator with potential `αV/2`.
    pub lhs: usize,
    pub lhs_converged: bool,
    /// `N₋(H_𝒟)` with `αV`.
    pub rhs_dirichlet: usize,
    /// `N₋` of the lattice operator with the effective potential of `αV`.
    pub rhs_lattice: usize,
    pub rhs_lattice_converged: bool,
    pub final_patch: i64,
    pub m: usize,
    /// `None` when a side did not converge and the inequality is not asserted.
    pub holds: Option<bool>,
}

/// `N₋(H_{αV/2}) ≤ N₋(H_𝒟(αV)) + N₋(H⁽⁰⁾(V⁰))` with `V⁰(x) = Σ_{e∋x} η(e, αV)`.
pub fn decoupling_check(v: &EdgePotentialField, alpha: f64, cfg: &DecouplingConfig) -> Result<DecouplingReport> {
    let lhs = count_negative_graph(v, 0.5 * alpha, &cfg.graph)?;
    let rhs_d = dirichlet_component_count(v, alpha)?;
    let v0 = edge_effective_lattice(v);
    let lat = count_negative_lattice_with(
        &v0,
        alpha,
        &LatticeCountConfig {
            l_max: cfg.lattice_l_max,
            ..Default::default()
        },
    )?;
    let trivial = v.is_empty() || alpha == 0.0;
    let rhs = rhs_d.count + lat.count();
    let holds = (trivial || (lhs.converged && lat.converged)).then_some(lhs.count() <= rhs);
    Ok(DecouplingReport {
        alpha,
        lhs: lhs.count(),
        lhs_converged: lhs.converged,
        rhs_dirichlet: rhs_d.count,
        rhs_lattice: lat.count(),
        rhs_lattice_converged: lat.converged || trivial,
        final_patch: lhs.counts.last().map_or(0, |c| c.0),
        m: cfg.graph.m,
        holds,
    })
}

// ---------------------------------------------------------------------------
// Hardy ratio on the graph

/// `|z|⁻² log(|z| + 2)⁻²`.
pub fn graph_hardy_weight(x: f64, y: f64) -> f64 {
    let r = x.hypot(y);
    1.0 / (r * r * (r + 2.0).ln().powi(2))
}

/// Energy over weighted `L²` for the edgewise-linear extension of `u`, which
/// must vanish at the origin. The energy equals the lattice seminorm; the
/// weighted integral uses `m` Gauss-integrated elements per edge.
pub fn graph_hardy_ratio(u: &LatticeFunction, m: usize) -> Result<f64> {
    if u.get(&(0, 0)).is_some_and(|&x| x != 0.0) {
        return Err(Error::Precondition("u must vanish at the origin".into()));
    }
    let get = |s: Site| u.get(&s).copied().unwrap_or(0.0);
    let mut edges: Vec<EdgeId> = u
        .keys()
        .flat_map(|&(x, y)| [((x, y), 0), ((x, y), 1), ((x - 1, y), 0), ((x, y - 1), 1)])
        .map(|(s, d)| EdgeId::from_site(s, d))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let mut energy = 0.0;
    let mut weighted = 0.0;
    for e in &edges {
        let (ua, ub) = (get(e.a), get(e.b));
        energy += (ub - ua).powi(2);
        let h = 1.0 / m as f64;
        for (k, el) in weighted_elements(e, m, &graph_hardy_weight).iter().enumerate() {
            let s0 = k as f64 * h;
            let f = [ua + (ub - ua) * s0, ua + (ub - ua) * (s0 + h)];
            for i in 0..2 {
                for j in 0..2 {
                    weighted += f[i] * el[i][j] * f[j];
                }
            }
        }
    }
    if weighted == 0.0 {
        return Err(Error::Precondition("u must be nonzero".into()));
    }
    Ok(energy / weighted)
}

/// Smallest generalized eigenvalue of (graph energy, Hardy-weighted mass) on
/// a patch with the origin clamped, by bisection on the inertia of `K − σW`.
pub fn graph_hardy_min_ratio(patch: ChessboardPatch, rel_tol: f64) -> Result<f64> {
    let m = patch.m;
    let h = 1.0 / m as f64;
    let pencil = |sigma: f64| {
        let els = |e: &EdgeId| {
            let w = weighted_elements(e, m, &graph_hardy_weight);
            w.iter()
                .map(|wm| {
                    let s = 1.0 / h;
                    [
                        [s - sigma * wm[0][0], -s - sigma * wm[0][1]],
                        [-s - sigma * wm[1][0], s - sigma * wm[1][1]],
                    ]
                })
                .collect()
        };
        let (sparse, _) = assemble_with(patch, &els, &|s| s == (0, 0));
        SymSkylineMatrix::from_sparse_rcm(&sparse).0
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while ldlt_inertia(&pencil(hi), 0.0)?.negatives == 0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Precondition("Hardy pencil has no eigenvalue below 1e12".into()));
        }
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        let r = ldlt_inertia(&pencil(mid), 0.0)?;
        if r.negatives + r.zeros > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::EdgeProfile;
    use nalgebra::{DMatrix, SymmetricEigen};
    use std::f64::consts::PI;

    fn single(e: (Site, Site), v: f64) -> EdgePotentialField {
        EdgePotentialField::from_edges([(EdgeId::new(e.0, e.1).unwrap(), EdgeProfile::Constant(v))]).unwrap()
    }

    fn dense_negatives(s: &SymSparse, sigma: f64) -> usize {
        let d = s.to_dense();
        let n = d.len();
        let a = DMatrix::from_fn(n, n, |i, j| d[i][j]);
        SymmetricEigen::new(a).eigenvalues.iter().filter(|&&x| x < sigma).count()
    }

    #[test]
    fn free_graph_has_no_negatives() {
        for (l, m) in [(1, 2), (2, 4), (3, 8)] {
            let p = ChessboardPatch::new(l, m).unwrap();
            let r = graph_inertia(&EdgePotentialField::new(), 1.0, 0.0, p).unwrap();
            assert_eq!(r.negatives, 0);
            let v = single(((0, 0), (1, 0)), 50.0);
            if l >= 2 {
                assert_eq!(graph_inertia(&v, 0.0, 0.0, p).unwrap().negatives, 0);
            }
        }
    }

    #[test]
    fn condensation_matches_dense_oracle() {
        let mut v = single(((0, 0), (1, 0)), 30.0);
        v.insert(
            EdgeId::new((0, 0), (0, 1)).unwrap(),
            EdgeProfile::Sampled(vec![0.0, 80.0, 10.0, 0.0, 5.0]),
        )
        .unwrap();
        v.insert(EdgeId::new((-1, 1), (0, 1)).unwrap(), EdgeProfile::Constant(12.0))
            .unwrap();
        for (alpha, sigma) in [(1.0, 0.0), (2.0, 0.0), (1.0, 3.0), (0.5, -1.0)] {
            let p = ChessboardPatch::new(2, 4).unwrap();
            let asm = assemble_graph_pencil(&v, alpha, sigma, p).unwrap();
            let dense = dense_negatives(&asm.sparse, 0.0);
            let cond = graph_inertia(&v, alpha, sigma, p).unwrap();
            assert!(cond.condensed);
            assert_eq!(cond.negatives, dense, "α={alpha} σ={sigma}");
            assert!(cond.edge_block_negatives <= cond.negatives);
        }
    }

    #[test]
    fn interior_vertices_couple_four_chains() {
        let p = ChessboardPatch::new(2, 4).unwrap();
        let asm = assemble_graph(&EdgePotentialField::new(), 1.0, p).unwrap();
        let adj = asm.sparse.adjacency();
        for y in -1..=1 {
            for x in -1..=1 {
                let i = p.vertex_index((x, y)).unwrap();
                let chains = adj[i].iter().filter(|&&j| j >= p.interior_vertices()).count();
                assert_eq!(chains, 4);
                assert!(adj[i].iter().all(|&j| j >= p.interior_vertices()));
            }
        }
    }

    #[test]
    fn single_strong_edge() {
        let v = single(((0, 0), (1, 0)), 50.0);
        assert_eq!(dirichlet_component_count(&v, 1.0).unwrap().count, 2);
        let r = count_negative_graph(&v, 1.0, &GraphCountConfig::default()).unwrap();
        assert!(r.count() >= 2, "{r:?}");
        assert!(r.monotone());
        assert!(r.edge_block_negatives <= r.count());
    }

    #[test]
    fn weak_edges_have_no_dirichlet_states() {
        let star = [(1, 0), (-1, 0), (0, 1), (0, -1)].map(|n| (EdgeId::new((0, 0), n).unwrap(), EdgeProfile::Constant(5.0)));
        let v = EdgePotentialField::from_edges(star).unwrap();
        assert_eq!(dirichlet_component_count(&v, 1.0).unwrap().count, 0);
        assert_eq!(dirichlet_component_count(&EdgePotentialField::new(), 1.0).unwrap().count, 0);
    }

    #[test]
    fn embedded_eigenvalue_window_grows() {
        let window = |l| {
            let p = ChessboardPatch::new(l, 16).unwrap();
            let z = EdgePotentialField::new();
            count_graph_below(&z, 0.0, p, PI * PI + 0.1).unwrap() - count_graph_below(&z, 0.0, p, PI * PI - 0.1).unwrap()
        };
        let (a, b) = (window(4), window(8));
        assert!(b > a, "{a} {b}");
    }

    #[test]
    fn decoupling_examples() {
        let r = decoupling_check(&EdgePotentialField::new(), 1.0, &DecouplingConfig::default()).unwrap();
        assert_eq!((r.lhs, r.rhs_dirichlet, r.rhs_lattice), (0, 0, 0));
        assert_eq!(r.holds, Some(true));
        let r = decoupling_check(&single(((0, 0), (1, 0)), 50.0), 1.0, &DecouplingConfig::default()).unwrap();
        assert_eq!(r.rhs_dirichlet, 2);
        assert_eq!(r.holds, Some(true), "{r:?}");
    }

    #[test]
    fn support_on_boundary_is_rejected() {
        let v = single(((2, 2), (2, 1)), 1.0);
        assert!(graph_inertia(&v, 1.0, 0.0, ChessboardPatch::new(2, 4).unwrap()).is_err());
        assert!(graph_inertia(&v, 1.0, 0.0, ChessboardPatch::new(3, 4).unwrap()).is_ok());
    }

    #[test]
    fn graph_hardy() {
        let u: LatticeFunction = [((1, 0), 1.0)].into_iter().collect();
        let r = graph_hardy_ratio(&u, 16).unwrap();
        assert!(r > 0.0 && r.is_finite());
        let p = ChessboardPatch::new(2, 8).unwrap();
        let min = graph_hardy_min_ratio(p, 1e-6).unwrap();
        assert!(min > 0.0);
        assert!(min <= r * (1.0 + 1e-3));
        assert!(graph_hardy_ratio(&[((0, 0), 1.0)].into_iter().collect(), 8).is_err());
    }
}
