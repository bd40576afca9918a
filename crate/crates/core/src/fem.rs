//! The plane side: Q1 finite elements for `−Δ − αV` on Dirichlet squares,
//! the bilinear interpolant of lattice functions, the cutoff near the origin,
//! and the lattice-to-plane carryover experiment.

use std::io::Write;

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inertia::{ldlt_inertia, SymSkylineMatrix, SymSparse};
use crate::lattice::{count_negative_lattice, LatticeFunction};
use crate::potential::{lift_lattice, LatticePotential, PlaneKind, PlanePotential, Site};
use crate::quad::gauss_legendre;

// ---------------------------------------------------------------------------
// bilinear interpolation

/// `(A² + AB + B² + C² + CD + D²) / 3` times three, for the corner values
/// `u00, u10, u01, u11` of a unit cell; `A, B` are the horizontal and `C, D`
/// the vertical differences.
fn cell_energy3(u00: f64, u10: f64, u01: f64, u11: f64) -> f64 {
    let (a, b) = (u10 - u00, u11 - u01);
    let (c, d) = (u01 - u00, u11 - u10);
    a * a + a * b + b * b + c * c + c * d + d * d
}

/// `J₀u`: the continuous function that is bilinear on every unit cell and
/// equals `u` at the lattice points.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearInterpolant {
    values: LatticeFunction,
}

pub fn interpolate_j0(u: &LatticeFunction) -> BilinearInterpolant {
    BilinearInterpolant { values: u.clone() }
}

impl BilinearInterpolant {
    pub fn node(&self, s: Site) -> f64 {
        self.values.get(&s).copied().unwrap_or(0.0)
    }

    fn corners(&self, (i, j): Site) -> [f64; 4] {
        [
            self.node((i, j)),
            self.node((i + 1, j)),
            self.node((i, j + 1)),
            self.node((i + 1, j + 1)),
        ]
    }

    /// Lower-left corners of all cells on which the interpolant is not identically zero.
    pub fn cells(&self) -> Vec<Site> {
        let mut cells: Vec<Site> = self
            .values
            .iter()
            .filter(|(_, &v)| v != 0.0)
            .flat_map(|(&(x, y), _)| [(x, y), (x - 1, y), (x, y - 1), (x - 1, y - 1)])
            .collect();
        cells.sort_unstable();
        cells.dedup();
        cells
    }

    /// `∫_cell |∇J₀u|²` for the cell with lower-left corner `c`.
    pub fn cell_energy(&self, c: Site) -> f64 {
        let [u00, u10, u01, u11] = self.corners(c);
        cell_energy3(u00, u10, u01, u11) / 3.0
    }

    /// `∫ |∇J₀u|² dx`. The per-cell numerators are summed before the single
    /// division, so integer data give an exactly rounded result.
    pub fn energy(&self) -> f64 {
        self.cells()
            .into_iter()
            .map(|c| {
                let [u00, u10, u01, u11] = self.corners(c);
                cell_energy3(u00, u10, u01, u11)
            })
            .sum::<f64>()
            / 3.0
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (i, j) = (x.floor(), y.floor());
        let (s, t) = (x - i, y - j);
        let [u00, u10, u01, u11] = self.corners((i as i64, j as i64));
        u00 * (1.0 - s) * (1.0 - t) + u10 * s * (1.0 - t) + u01 * (1.0 - s) * t + u11 * s * t
    }

    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let (i, j) = (x.floor(), y.floor());
        let (s, t) = (x - i, y - j);
        let [u00, u10, u01, u11] = self.corners((i as i64, j as i64));
        ((1.0 - t) * (u10 - u00) + t * (u11 - u01), (1.0 - s) * (u01 - u00) + s * (u11 - u10))
    }

    /// Plain-text `x y U` rows on a uniform grid covering all nonzero cells.
    pub fn write_grid<W: Write>(&self, per_unit: usize, mut out: W) -> Result<()> {
        let cells = self.cells();
        let Some(x0) = cells.iter().map(|c| c.0).min() else {
            return Ok(());
        };
        let x1 = cells.iter().map(|c| c.0).max().unwrap_or(x0) + 1;
        let y0 = cells.iter().map(|c| c.1).min().unwrap_or(0);
        let y1 = cells.iter().map(|c| c.1).max().unwrap_or(y0) + 1;
        let n = per_unit.max(1) as i64;
        for iy in y0 * n..=y1 * n {
            for ix in x0 * n..=x1 * n {
                let (x, y) = (ix as f64 / n as f64, iy as f64 / n as f64);
                writeln!(out, "{x} {y} {}", self.value(x, y))?;
            }
        }
        Ok(())
    }
}

/// Extreme ratios `D̃/Q̃` over bilinear functions on one cell modulo constants,
/// where `D̃` is the Dirichlet integral and `Q̃` the sum of squared
/// differences along the four cell edges.
///
/// Solved as a 3×3 generalized eigenproblem with the value at `(0,0)` fixed to zero.
pub fn cell_constants() -> (f64, f64) {
    let (d, q) = cell_forms();
    // Q = LLᵀ, eigenvalues of L⁻¹ D L⁻ᵀ
    let l = q.cholesky().expect("edge form is positive definite modulo constants").l();
    let li = l.try_inverse().expect("Cholesky factor is invertible");
    let s = li * d * li.transpose();
    let s = 0.5 * (s + s.transpose());
    let eig = SymmetricEigen::new(s).eigenvalues;
    (eig.min(), eig.max())
}

/// Gram matrices of `D̃` and `Q̃` in the coordinates `(u10, u01, u11)`.
pub fn cell_forms() -> (Matrix3<f64>, Matrix3<f64>) {
    let basis = |k: usize| {
        let mut v = [0.0; 3];
        v[k] = 1.0;
        v
    };
    let dform = |x: [f64; 3], y: [f64; 3]| {
        // polarization of the quadratic form
        let e = |z: [f64; 3]| cell_energy3(0.0, z[0], z[1], z[2]) / 3.0;
        let s = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
        let m = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
        0.25 * (e(s) - e(m))
    };
    let qform = |x: [f64; 3], y: [f64; 3]| {
        let e = |z: [f64; 3]| {
            let (u10, u01, u11) = (z[0], z[1], z[2]);
            u10 * u10 + u01 * u01 + (u11 - u01).powi(2) + (u11 - u10).powi(2)
        };
        let s = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
        let m = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
        0.25 * (e(s) - e(m))
    };
    let d = Matrix3::from_fn(|i, j| dform(basis(i), basis(j)));
    let q = Matrix3::from_fn(|i, j| qform(basis(i), basis(j)));
    (d, q)
}

// ---------------------------------------------------------------------------
// cutoff

/// `ψ(x) = s(|x|)` with a quintic smoothstep from 0 at `r₀` to 1 at `r₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffProfile {
    pub r0: f64,
    pub r1: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile { r0: 0.25, r1: 0.5 }
    }
}

impl CutoffProfile {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(0.0 <= r0 && r0 <= r1 && r1 <= 1.0) {
            return Err(Error::InvalidInput(format!("cutoff radii need 0 ≤ r0 ≤ r1 ≤ 1, got {r0}, {r1}")));
        }
        Ok(CutoffProfile { r0, r1 })
    }

    /// `ψ ≡ 1`.
    pub fn identity() -> Self {
        CutoffProfile { r0: 0.0, r1: 0.0 }
    }

    pub fn is_identity(&self) -> bool {
        self.r1 == 0.0
    }

    pub fn value(&self, r: f64) -> f64 {
        if r >= self.r1 {
            return 1.0;
        }
        if r <= self.r0 {
            return 0.0;
        }
        let s = (r - self.r0) / (self.r1 - self.r0);
        s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }

    /// `dψ/dr`.
    pub fn derivative(&self, r: f64) -> f64 {
        if r >= self.r1 || r <= self.r0 {
            return 0.0;
        }
        let w = self.r1 - self.r0;
        let s = (r - self.r0) / w;
        30.0 * s * s * (1.0 - s) * (1.0 - s) / w
    }
}

/// `∫ |∇(ψ J₀u)|² dx`: exact cell energies away from the origin, composite
/// Gauss quadrature on the four cells around it.
pub fn cutoff_energy(u0: &BilinearInterpolant, psi: &CutoffProfile) -> f64 {
    if psi.is_identity() {
        return u0.energy();
    }
    const CENTRAL: [Site; 4] = [(0, 0), (-1, 0), (0, -1), (-1, -1)];
    let outer: f64 = u0
        .cells()
        .into_iter()
        .filter(|c| !CENTRAL.contains(c))
        .map(|c| {
            let [a, b, cc, d] = u0.corners(c);
            cell_energy3(a, b, cc, d)
        })
        .sum::<f64>()
        / 3.0;
    let (x, w) = gauss_legendre(6);
    let panels = 32;
    let hp = 1.0 / panels as f64;
    let mut inner = 0.0;
    for &(ci, cj) in &CENTRAL {
        for pi in 0..panels {
            for pj in 0..panels {
                for (a, &xa) in x.iter().enumerate() {
                    for (b, &xb) in x.iter().enumerate() {
                        let px = ci as f64 + hp * (pi as f64 + 0.5 * (xa + 1.0));
                        let py = cj as f64 + hp * (pj as f64 + 0.5 * (xb + 1.0));
                        let r = px.hypot(py);
                        let (gx, gy) = u0.gradient(px, py);
                        let (ps, dps) = (psi.value(r), psi.derivative(r));
                        let val = u0.value(px, py);
                        let (ex, ey) = if r > 0.0 {
                            (ps * gx + val * dps * px / r, ps * gy + val * dps * py / r)
                        } else {
                            (ps * gx, ps * gy)
                        };
                        inner += w[a] * w[b] * 0.25 * hp * hp * (ex * ex + ey * ey);
                    }
                }
            }
        }
    }
    outer + inner
}

// ---------------------------------------------------------------------------
// Q1 finite elements

/// Square `[−R, R]²` meshed with step `h = 1/m`, Dirichlet on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FemBox {
    pub half_width: i64,
    pub m: usize,
}

impl FemBox {
    pub fn new(half_width: i64, m: usize) -> Result<Self> {
        if half_width < 1 || m < 1 {
            return Err(Error::InvalidInput(format!(
                "FEM box needs R ≥ 1 and m ≥ 1, got R={half_width}, m={m}"
            )));
        }
        Ok(FemBox { half_width, m })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Elements per side.
    pub fn cells_per_side(&self) -> usize {
        2 * self.half_width as usize * self.m
    }

    /// Interior nodes per side.
    pub fn interior_per_side(&self) -> usize {
        self.cells_per_side() - 1
    }

    pub fn unknowns(&self) -> usize {
        self.interior_per_side().pow(2)
    }

    fn coord(&self, i: usize) -> f64 {
        -(self.half_width as f64) + i as f64 * self.h()
    }

    /// Checks that the support of `v` lies in the open square.
    pub fn check_support(&self, v: &PlanePotential) -> Result<()> {
        let r = self.half_width as f64;
        let inside = match v.kind() {
            PlaneKind::LatticeLift(l) => l.iter().all(|((x, y), _)| {
                let (x, y) = (x as f64, y as f64);
                x > -r && x + 1.0 < r && y > -r && y + 1.0 < r
            }),
            _ => v.support_radius() < r,
        };
        if inside || v.is_zero() {
            Ok(())
        } else {
            Err(Error::SupportOutsideDomain(format!(
                "support radius {} does not fit in the FEM box of half-width {r}",
                v.support_radius()
            )))
        }
    }
}

const K_REF: [[f64; 4]; 4] = [
    [4.0, -1.0, -2.0, -1.0],
    [-1.0, 4.0, -1.0, -2.0],
    [-2.0, -1.0, 4.0, -1.0],
    [-1.0, -2.0, -1.0, 4.0],
];
const M_REF: [[f64; 4]; 4] = [
    [4.0, 2.0, 1.0, 2.0],
    [2.0, 4.0, 2.0, 1.0],
    [1.0, 2.0, 4.0, 2.0],
    [2.0, 1.0, 2.0, 4.0],
];

/// Element-averaged potential: midpoint rule, which is exact for lifts
/// because elements never straddle unit squares.
fn element_value(v: &PlanePotential, x0: f64, y0: f64, h: f64) -> f64 {
    v.value(x0 + 0.5 * h, y0 + 0.5 * h)
}

/// Sparse `K − αM_V` on the interior nodes, plus the number of interior
/// nodes touching an element where `V > 0` (the rank of `M_V`).
pub fn assemble_fem_sparse(v: &PlanePotential, alpha: f64, b: FemBox) -> Result<(SymSparse, usize)> {
    assemble_pencil(v, alpha, 0.0, b)
}

/// Sparse `K − αM_V − σM`: negative inertia counts pencil eigenvalues below `σ`.
pub fn assemble_pencil(v: &PlanePotential, alpha: f64, sigma: f64, b: FemBox) -> Result<(SymSparse, usize)> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("coupling must be finite and ≥ 0, got {alpha}")));
    }
    b.check_support(v)?;
    let n = b.cells_per_side();
    let ni = b.interior_per_side();
    let h = b.h();
    let id = |i: usize, j: usize| -> Option<usize> { (i >= 1 && i < n && j >= 1 && j < n).then(|| (j - 1) * ni + (i - 1)) };
    let mut a = SymSparse::with_capacity(b.unknowns(), 10 * n * n);
    let mut touched = vec![false; b.unknowns()];
    let support = v.support_radius();
    let mass_scale = h * h / 36.0;
    for ej in 0..n {
        for ei in 0..n {
            let (x0, y0) = (b.coord(ei), b.coord(ej));
            // skip the quadrature for elements far outside the support
            let near = x0.abs().min((x0 + h).abs()).hypot(y0.abs().min((y0 + h).abs())) <= support;
            let ve = if near && !v.is_zero() { element_value(v, x0, y0, h) } else { 0.0 };
            let nodes = [id(ei, ej), id(ei + 1, ej), id(ei + 1, ej + 1), id(ei, ej + 1)];
            for (p, np) in nodes.iter().enumerate() {
                let Some(gp) = *np else { continue };
                if ve > 0.0 {
                    touched[gp] = true;
                }
                for (q, nq) in nodes.iter().enumerate().take(p + 1) {
                    let Some(gq) = *nq else { continue };
                    let val = K_REF[p][q] / 6.0 - (alpha * ve + sigma) * mass_scale * M_REF[p][q];
                    a.add(gp, gq, val);
                }
            }
        }
    }
    Ok((a, touched.into_iter().filter(|&t| t).count()))
}

#[derive(Debug, Clone)]
pub struct FemAssembly {
    pub matrix: SymSkylineMatrix,
    pub rank_bound: usize,
}

/// `K − αM_V`; its negative inertia is the number of negative eigenvalues of
/// the pencil `(K, M)` with `M` the (positive definite) mass matrix.
pub fn assemble_fem(v: &PlanePotential, alpha: f64, b: FemBox) -> Result<FemAssembly> {
    let (sparse, rank_bound) = assemble_fem_sparse(v, alpha, b)?;
    let (matrix, _) = SymSkylineMatrix::from_sparse_rcm(&sparse);
    Ok(FemAssembly { matrix, rank_bound })
}

pub fn count_fem_box(v: &PlanePotential, alpha: f64, b: FemBox) -> Result<usize> {
    if alpha == 0.0 || v.is_zero() {
        return Ok(0);
    }
    Ok(ldlt_inertia(&assemble_fem(v, alpha, b)?.matrix, 0.0)?.negatives)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FemCountConfig {
    pub r_max: i64,
    /// Subdivisions per unit length.
    pub m: usize,
    /// Recount the final box at `2m`.
    pub refine: bool,
}

impl Default for FemCountConfig {
    fn default() -> Self {
        FemCountConfig {
            r_max: 16,
            m: 8,
            refine: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemCountResult {
    /// `(R, count)` in increasing `R`.
    pub counts: Vec<(i64, usize)>,
    pub h: f64,
    pub converged: bool,
    /// Count on the final box at half the mesh step, when requested.
    pub refined_count: Option<usize>,
}

impl FemCountResult {
    pub fn count(&self) -> usize {
        self.counts.last().map_or(0, |c| c.1)
    }

    pub fn monotone(&self) -> bool {
        self.counts.windows(2).all(|w| w[0].1 <= w[1].1)
    }

    pub fn refinement_stable(&self) -> Option<bool> {
        self.refined_count.map(|r| r == self.count())
    }
}

/// Smallest integer half-width whose open square holds the support.
pub fn minimal_half_width(v: &PlanePotential) -> i64 {
    match v.kind() {
        PlaneKind::LatticeLift(l) => l
            .iter()
            .map(|((x, y), _)| x.abs().max((x + 1).abs()).max(y.abs()).max((y + 1).abs()))
            .max()
            .unwrap_or(0),
        _ => v.support_radius().ceil() as i64,
    }
}

/// Counts over `R = R₀, 2R₀, 4R₀, … ≤ r_max` with `R₀ = ⌈support⌉ + 1`,
/// stopping when two consecutive squares agree.
pub fn count_negative_fem(v: &PlanePotential, alpha: f64, cfg: &FemCountConfig) -> Result<FemCountResult> {
    let h = 1.0 / cfg.m as f64;
    let mut result = FemCountResult {
        counts: Vec::new(),
        h,
        converged: false,
        refined_count: None,
    };
    let mut r = minimal_half_width(v) + 1;
    if alpha == 0.0 || v.is_zero() {
        result.counts.push((r, 0));
        result.converged = true;
        return Ok(result);
    }
    if r > cfg.r_max {
        return Err(Error::SupportOutsideDomain(format!(
            "support needs R ≥ {r}, above r_max = {}",
            cfg.r_max
        )));
    }
    while r <= cfg.r_max {
        let c = count_fem_box(v, alpha, FemBox::new(r, cfg.m)?)?;
        result.counts.push((r, c));
        let n = result.counts.len();
        if n >= 2 && result.counts[n - 2].1 == c && c > 0 {
            result.converged = true;
            break;
        }
        r *= 2;
    }
    if cfg.refine {
        let last = result.counts.last().expect("at least one box").0;
        result.refined_count = Some(count_fem_box(v, alpha, FemBox::new(last, 2 * cfg.m)?)?);
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// carryover

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarryoverReport {
    pub alpha: f64,
    pub lattice_count: usize,
    pub lattice_converged: bool,
    /// `(γ, N₋ of the FEM problem with γα𝓘(V⁰))`.
    pub fem_counts: Vec<(f64, usize)>,
    /// Least grid `γ` with `N₋(lattice) ≤ N₋(FEM)`.
    pub least_gamma: Option<f64>,
    /// The inequality at the largest `γ`.
    pub holds_at_max_gamma: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CarryoverConfig {
    pub lattice_l_max: i64,
    /// FEM subdivisions per unit square.
    pub m: usize,
    /// Margin of the FEM square beyond the support.
    pub margin: i64,
}

impl Default for CarryoverConfig {
    fn default() -> Self {
        CarryoverConfig {
            lattice_l_max: 64,
            m: 4,
            margin: 4,
        }
    }
}

/// Compares `N₋(−Δ⁽⁰⁾ − αV⁰)` with `N₋(−Δ − γα𝓘(V⁰))` over a `γ` grid.
///
/// The FEM count is taken on one Dirichlet square, a lower bound for the
/// count on `R²`, so any `γ` that passes here also passes on the plane.
pub fn carryover_check(v0: &LatticePotential, alpha: f64, gamma_grid: &[f64], cfg: &CarryoverConfig) -> Result<CarryoverReport> {
    let lat = count_negative_lattice(v0, alpha, cfg.lattice_l_max)?;
    let lift = lift_lattice(v0);
    let r = minimal_half_width(&lift) + cfg.margin.max(1);
    let b = FemBox::new(r, cfg.m)?;
    let mut grid: Vec<f64> = gamma_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut fem_counts = Vec::with_capacity(grid.len());
    for &g in &grid {
        fem_counts.push((g, count_fem_box(&lift, g * alpha, b)?));
    }
    let n = lat.count();
    let least_gamma = fem_counts.iter().find(|(_, c)| *c >= n).map(|(g, _)| *g);
    let holds_at_max_gamma = fem_counts.last().map_or(n == 0, |(_, c)| *c >= n);
    Ok(CarryoverReport {
        alpha,
        lattice_count: n,
        lattice_converged: lat.converged,
        fem_counts,
        least_gamma,
        holds_at_max_gamma,
    })
}

/// Weyl's leading term `(4π)⁻¹ α ∫V dx` for a radial indicator.
pub fn weyl_estimate_indicator(radius: f64, value: f64, alpha: f64) -> f64 {
    alpha * value * radius * radius / 4.0
}
