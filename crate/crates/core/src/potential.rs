//! Potentials on the lattice, the plane and the chessboard mesh, and the
//! maps between them.
//!
//! * [`LatticePotential`]: finitely supported `V ≥ 0` on `Z²`.
//! * [`PlanePotential`]: compactly supported `V ≥ 0` on `R²`, either from a
//!   named analytic family, a lift of a lattice potential, or samples on a
//!   `(log r, θ)` tensor grid.
//! * [`EdgePotentialField`]: `V ≥ 0` on the unit edges of the chessboard mesh.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Site = (i64, i64);

fn check_value(v: f64, what: &str) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidInput(format!("{what} must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// lattice

/// Nonnegative, finitely supported potential on `Z²`. Absent sites are zero
/// and zero values are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(i64, i64, f64)>", into = "Vec<(i64, i64, f64)>")]
pub struct LatticePotential {
    entries: BTreeMap<Site, f64>,
}

impl TryFrom<Vec<(i64, i64, f64)>> for LatticePotential {
    type Error = Error;

    fn try_from(rows: Vec<(i64, i64, f64)>) -> Result<Self> {
        LatticePotential::from_entries(rows.into_iter().map(|(x, y, v)| ((x, y), v)))
    }
}

impl From<LatticePotential> for Vec<(i64, i64, f64)> {
    fn from(p: LatticePotential) -> Self {
        p.iter().map(|((x, y), v)| (x, y, v)).collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    x: i64,
    y: i64,
    value: f64,
}

impl LatticePotential {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from `(site, value)` pairs; repeated sites are summed.
    pub fn from_entries<I: IntoIterator<Item = (Site, f64)>>(entries: I) -> Result<Self> {
        let mut p = LatticePotential::new();
        for (s, v) in entries {
            check_value(v, "lattice potential value")?;
            if v > 0.0 {
                *p.entries.entry(s).or_insert(0.0) += v;
            }
        }
        Ok(p)
    }

    pub fn single(site: Site, value: f64) -> Result<Self> {
        Self::from_entries([(site, value)])
    }

    pub fn get(&self, site: Site) -> f64 {
        self.entries.get(&site).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.entries.iter().map(|(&s, &v)| (s, v))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// `max(|x₁|, |x₂|)` over the support; `None` for the zero potential.
    pub fn chebyshev_extent(&self) -> Option<i64> {
        self.entries.keys().map(|&(x, y)| x.abs().max(y.abs())).max()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_entries(self.iter().map(|(s, v)| (s, v * factor)))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for ((x, y), value) in self.iter() {
            w.serialize(CsvRow { x, y, value })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for row in r.deserialize() {
            let row: CsvRow = row?;
            rows.push(((row.x, row.y), row.value));
        }
        Self::from_entries(rows)
    }
}

// ---------------------------------------------------------------------------
// one-dimensional profiles

/// Piecewise-linear function of one variable, zero outside its node range.
///
/// Nodes are nondecreasing; a repeated abscissa encodes a jump, so
/// piecewise-constant functions are represented exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile1D {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl Profile1D {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::InvalidInput("profile nodes and values differ in length".into()));
        }
        if nodes.iter().any(|t| !t.is_finite()) || nodes.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("profile nodes must be finite and nondecreasing".into()));
        }
        if nodes.windows(3).any(|w| w[0] == w[1] && w[1] == w[2]) {
            return Err(Error::InvalidInput("profile node repeated more than twice".into()));
        }
        for &v in &values {
            check_value(v, "profile value")?;
        }
        Ok(Profile1D { nodes, values })
    }

    pub fn zero() -> Self {
        Profile1D {
            nodes: Vec::new(),
            values: Vec::new(),
        }
    }

    /// `value` on `(a, b)`, zero elsewhere.
    pub fn indicator(a: f64, b: f64, value: f64) -> Result<Self> {
        Self::new(vec![a, a, b, b], vec![0.0, value, value, 0.0])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Smallest interval outside which the profile vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|&v| v > 0.0)?;
        let last = self.values.iter().rposition(|&v| v > 0.0)?;
        let lo = if first > 0 { self.nodes[first - 1] } else { self.nodes[first] };
        let hi = if last + 1 < self.nodes.len() {
            self.nodes[last + 1]
        } else {
            self.nodes[last]
        };
        Some((lo, hi))
    }

    /// Nondegenerate linear pieces `(a, b, value_a, value_b)`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (1..self.nodes.len()).filter_map(move |k| {
            let (a, b) = (self.nodes[k - 1], self.nodes[k]);
            (b > a).then(|| (a, b, self.values[k - 1], self.values[k]))
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        let n = self.nodes.len();
        if n == 0 || t < self.nodes[0] || t > self.nodes[n - 1] {
            return 0.0;
        }
        // last node ≤ t, so a jump at t takes its right value
        let k = self.nodes.partition_point(|&s| s <= t);
        if k == n {
            return self.values[n - 1];
        }
        let (a, b) = (self.nodes[k - 1], self.nodes[k]);
        let (va, vb) = (self.values[k - 1], self.values[k]);
        va + (vb - va) * (t - a) / (b - a)
    }

    pub fn integral(&self) -> f64 {
        self.segments().map(|(a, b, va, vb)| 0.5 * (b - a) * (va + vb)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.nodes.clone(), self.values.iter().map(|v| v * factor).collect())
    }

    /// Restriction to `t ≥ 0`, re-expressed on `[0, ∞)`.
    pub fn positive_part(&self) -> Self {
        self.clip(0.0, f64::INFINITY)
    }

    /// `s ↦ f(−s)` restricted to `s ≥ 0`.
    pub fn reflected_negative_part(&self) -> Self {
        let neg = self.clip(f64::NEG_INFINITY, 0.0);
        let nodes = neg.nodes.iter().rev().map(|t| -t).collect();
        let values = neg.values.iter().rev().copied().collect();
        Profile1D { nodes, values }
    }

    fn clip(&self, lo: f64, hi: f64) -> Self {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (a, b, va, vb) in self.segments() {
            let (ca, cb) = (a.max(lo), b.min(hi));
            if cb <= ca {
                continue;
            }
            let at = |t: f64| va + (vb - va) * (t - a) / (b - a);
            let (ua, ub) = (at(ca), at(cb));
            if nodes.last() == Some(&ca) && values.last() == Some(&ua) {
                nodes.push(cb);
                values.push(ub);
            } else {
                nodes.extend([ca, cb]);
                values.extend([ua, ub]);
            }
        }
        Profile1D { nodes, values }
    }
}

// ---------------------------------------------------------------------------
// plane

/// Tensor grid in `(t = log r, θ)`; `θ` is uniform and periodic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    t: Vec<f64>,
    theta0: f64,
    n_theta: usize,
    /// Row-major: `values[i * n_theta + j]` at `(t[i], θ_j)`.
    values: Vec<f64>,
}

impl PolarGrid {
    /// Validates explicit `θ` nodes: they must be `θ₀ + 2πj/n`, `j = 0..n`.
    pub fn new(t: Vec<f64>, theta: &[f64], values: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config(
                "polar_grid.t",
                "log-radius nodes must be strictly increasing (at least 2)",
            ));
        }
        let n = theta.len();
        if n < 3 {
            return Err(Error::config("polar_grid.theta", "need at least 3 angular nodes"));
        }
        let step = 2.0 * PI / n as f64;
        let theta0 = theta[0];
        for (j, &th) in theta.iter().enumerate() {
            if (th - (theta0 + step * j as f64)).abs() > 1e-9 * (1.0 + th.abs()) {
                return Err(Error::config(
                    "polar_grid.theta",
                    "angular nodes must be uniform with spacing 2π/n (periodic)",
                ));
            }
        }
        if values.len() != t.len() * n {
            return Err(Error::config("polar_grid.values", "expected len(t) * len(theta) samples"));
        }
        for &v in &values {
            check_value(v, "polar sample")?;
        }
        Ok(PolarGrid {
            t,
            theta0,
            n_theta: n,
            values,
        })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.theta0 + 2.0 * PI * j as f64 / self.n_theta as f64
    }

    pub fn sample(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_theta..(i + 1) * self.n_theta]
    }

    /// Bilinear interpolation in `(log r, θ)`; constant below the first radius.
    pub fn value_polar(&self, r: f64, theta: f64) -> f64 {
        let last = self.t.len() - 1;
        if r <= 0.0 {
            return self.row(0).iter().sum::<f64>() / self.n_theta as f64;
        }
        let t = r.ln();
        if t > self.t[last] {
            return 0.0;
        }
        let (i0, ft) = if t <= self.t[0] {
            (0, 0.0)
        } else {
            let k = self.t.partition_point(|&s| s <= t).min(last);
            (k - 1, (t - self.t[k - 1]) / (self.t[k] - self.t[k - 1]))
        };
        let i1 = (i0 + 1).min(last);
        let step = 2.0 * PI / self.n_theta as f64;
        let u = (theta - self.theta0).rem_euclid(2.0 * PI) / step;
        let j0 = (u.floor() as usize) % self.n_theta;
        let j1 = (j0 + 1) % self.n_theta;
        let fj = u - u.floor();
        let v = |i: usize, j: usize| self.sample(i, j);
        (1.0 - ft) * ((1.0 - fj) * v(i0, j0) + fj * v(i0, j1)) + ft * ((1.0 - fj) * v(i1, j0) + fj * v(i1, j1))
    }
}

/// Resolution of a polar sampling; `t = log r` runs over `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolarGridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub n_theta: usize,
}

impl Default for PolarGridSpec {
    fn default() -> Self {
        PolarGridSpec::symmetric(10.0, 2001, 256)
    }
}

impl PolarGridSpec {
    pub fn symmetric(half_width: f64, n_t: usize, n_theta: usize) -> Self {
        PolarGridSpec {
            t_min: -half_width,
            t_max: half_width,
            n_t,
            n_theta,
        }
    }

    /// Symmetric grid wide enough to contain the support of `v`.
    pub fn covering(v: &PlanePotential, n_per_unit: usize, n_theta: usize) -> Self {
        let half = v.support_radius().max(1.0).ln().max(0.0) + 10.0;
        let n_t = (2.0 * half * n_per_unit as f64).ceil() as usize + 1;
        PolarGridSpec::symmetric(half, n_t, n_theta)
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        let h = (self.t_max - self.t_min) / (self.n_t - 1) as f64;
        (0..self.n_t).map(|i| self.t_min + h * i as f64).collect()
    }
}

pub type PlaneFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PlaneKind {
    RadialIndicator {
        radius: f64,
        value: f64,
    },
    Annulus {
        inner: f64,
        outer: f64,
        value: f64,
    },
    /// `A·exp(−|x|²/w²)`, truncated at `truncation` widths.
    Gaussian {
        amplitude: f64,
        width: f64,
        truncation: f64,
    },
    /// Piecewise constant on unit squares: `V(x) = V⁰([x₁], [x₂])`.
    LatticeLift(LatticePotential),
    Polar(PolarGrid),
    /// Arbitrary `(r, θ) ↦ V`, zero beyond the support radius.
    Function(PlaneFn),
}

impl fmt::Debug for PlaneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaneKind::RadialIndicator { radius, value } => write!(f, "RadialIndicator(r≤{radius}, {value})"),
            PlaneKind::Annulus { inner, outer, value } => write!(f, "Annulus({inner}≤r≤{outer}, {value})"),
            PlaneKind::Gaussian {
                amplitude,
                width,
                truncation,
            } => {
                write!(f, "Gaussian({amplitude}, w={width}, cut={truncation})")
            }
            PlaneKind::LatticeLift(v) => write!(f, "LatticeLift({} sites)", v.support_len()),
            PlaneKind::Polar(g) => write!(f, "Polar({}x{})", g.t.len(), g.n_theta),
            PlaneKind::Function(_) => write!(f, "Function"),
        }
    }
}

/// Nonnegative compactly supported potential on `R²`.
#[derive(Debug, Clone)]
pub struct PlanePotential {
    kind: PlaneKind,
    support_radius: f64,
}

impl PlanePotential {
    pub fn radial_indicator(radius: f64, value: f64) -> Result<Self> {
        check_value(value, "indicator value")?;
        check_value(radius, "indicator radius")?;
        Ok(PlanePotential {
            kind: PlaneKind::RadialIndicator { radius, value },
            support_radius: radius,
        })
    }

    pub fn annulus(inner: f64, outer: f64, value: f64) -> Result<Self> {
        check_value(value, "annulus value")?;
        if !(0.0 <= inner && inner < outer && outer.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "annulus needs 0 ≤ inner < outer, got {inner}, {outer}"
            )));
        }
        Ok(PlanePotential {
            kind: PlaneKind::Annulus { inner, outer, value },
            support_radius: outer,
        })
    }

    pub fn gaussian(amplitude: f64, width: f64, truncation: f64) -> Result<Self> {
        check_value(amplitude, "gaussian amplitude")?;
        if !(width > 0.0 && truncation > 0.0) {
            return Err(Error::InvalidInput("gaussian width and truncation must be positive".into()));
        }
        Ok(PlanePotential {
            kind: PlaneKind::Gaussian {
                amplitude,
                width,
                truncation,
            },
            support_radius: width * truncation,
        })
    }

    pub fn from_polar(grid: PolarGrid) -> Self {
        let support_radius = grid.t[grid.t.len() - 1].exp();
        PlanePotential {
            kind: PlaneKind::Polar(grid),
            support_radius,
        }
    }

    /// `f(r, θ)` on `r ≤ support_radius`. Negative values are rejected at sampling time.
    pub fn from_fn(support_radius: f64, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        PlanePotential {
            kind: PlaneKind::Function(Arc::new(f)),
            support_radius,
        }
    }

    pub fn kind(&self) -> &PlaneKind {
        &self.kind
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PlaneKind::RadialIndicator { value, radius } => *value == 0.0 || *radius == 0.0,
            PlaneKind::Annulus { value, .. } => *value == 0.0,
            PlaneKind::Gaussian { amplitude, .. } => *amplitude == 0.0,
            PlaneKind::LatticeLift(v) => v.is_empty(),
            PlaneKind::Polar(g) => g.values.iter().all(|&v| v == 0.0),
            PlaneKind::Function(_) => false,
        }
    }

    /// Radially symmetric by construction.
    pub fn is_radial(&self) -> bool {
        matches!(
            self.kind,
            PlaneKind::RadialIndicator { .. } | PlaneKind::Annulus { .. } | PlaneKind::Gaussian { .. }
        )
    }

    pub fn value_polar(&self, r: f64, theta: f64) -> f64 {
        if r > self.support_radius {
            return 0.0;
        }
        match &self.kind {
            PlaneKind::RadialIndicator { radius, value } => {
                if r <= *radius {
                    *value
                } else {
                    0.0
                }
            }
            PlaneKind::Annulus { inner, outer, value } => {
                if r >= *inner && r <= *outer {
                    *value
                } else {
                    0.0
                }
            }
            PlaneKind::Gaussian { amplitude, width, .. } => amplitude * (-(r / width).powi(2)).exp(),
            PlaneKind::LatticeLift(_) => self.value(r * theta.cos(), r * theta.sin()),
            PlaneKind::Polar(g) => g.value_polar(r, theta),
            PlaneKind::Function(f) => f(r, theta),
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            PlaneKind::LatticeLift(v) => v.get((x.floor() as i64, y.floor() as i64)),
            _ => self.value_polar(x.hypot(y), y.atan2(x)),
        }
    }

    /// Radii across which the potential jumps.
    pub fn radial_breaks(&self) -> Vec<f64> {
        match &self.kind {
            PlaneKind::RadialIndicator { radius, .. } => vec![*radius],
            PlaneKind::Annulus { inner, outer, .. } => vec![*inner, *outer],
            PlaneKind::Gaussian { .. } => vec![self.support_radius],
            _ => Vec::new(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        check_value(factor, "scale factor")?;
        let kind = match &self.kind {
            PlaneKind::RadialIndicator { radius, value } => PlaneKind::RadialIndicator {
                radius: *radius,
                value: value * factor,
            },
            PlaneKind::Annulus { inner, outer, value } => PlaneKind::Annulus {
                inner: *inner,
                outer: *outer,
                value: value * factor,
            },
            PlaneKind::Gaussian {
                amplitude,
                width,
                truncation,
            } => PlaneKind::Gaussian {
                amplitude: amplitude * factor,
                width: *width,
                truncation: *truncation,
            },
            PlaneKind::LatticeLift(v) => PlaneKind::LatticeLift(v.scaled(factor)?),
            PlaneKind::Polar(g) => {
                let mut g = g.clone();
                g.values.iter_mut().for_each(|v| *v *= factor);
                PlaneKind::Polar(g)
            }
            PlaneKind::Function(f) => {
                let f = Arc::clone(f);
                PlaneKind::Function(Arc::new(move |r, th| factor * f(r, th)))
            }
        };
        Ok(PlanePotential {
            kind,
            support_radius: self.support_radius,
        })
    }

    /// Samples onto a polar grid.
    pub fn to_polar(&self, spec: &PolarGridSpec) -> Result<PolarGrid> {
        if let PlaneKind::Polar(g) = &self.kind {
            return Ok(g.clone());
        }
        if spec.n_t < 2 || spec.n_theta < 3 || !(spec.t_max > spec.t_min) {
            return Err(Error::config("polar_grid", "need n_t ≥ 2, n_theta ≥ 3 and t_max > t_min"));
        }
        let t = spec.t_nodes();
        let theta: Vec<f64> = (0..spec.n_theta).map(|j| 2.0 * PI * j as f64 / spec.n_theta as f64).collect();
        let mut values = Vec::with_capacity(t.len() * theta.len());
        for &ti in &t {
            let r = ti.exp();
            for &th in &theta {
                values.push(self.value_polar(r, th));
            }
        }
        PolarGrid::new(t, &theta, values)
    }
}

/// Lift of a lattice potential to the plane, constant on unit squares.
pub fn lift_lattice(v: &LatticePotential) -> PlanePotential {
    let support_radius = v
        .iter()
        .map(|((x, y), _)| {
            let fx = (x as f64).abs().max(((x + 1) as f64).abs());
            let fy = (y as f64).abs().max(((y + 1) as f64).abs());
            fx.hypot(fy)
        })
        .fold(0.0, f64::max);
    PlanePotential {
        kind: PlaneKind::LatticeLift(v.clone()),
        support_radius,
    }
}

// ---------------------------------------------------------------------------
// radial split and effective potential

/// `V = V_rad + V_nrad` on a polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSplit {
    pub t: Vec<f64>,
    pub v_rad: Vec<f64>,
    pub theta0: f64,
    pub n_theta: usize,
    /// Row-major like [`PolarGrid`]; signed.
    pub v_nrad: Vec<f64>,
}

impl RadialSplit {
    pub fn from_grid(grid: &PolarGrid) -> Self {
        let n = grid.n_theta;
        let mut v_rad = Vec::with_capacity(grid.t.len());
        let mut v_nrad = Vec::with_capacity(grid.values.len());
        for i in 0..grid.t.len() {
            let row = grid.row(i);
            // periodic trapezoid rule on a uniform grid
            let mean = row.iter().sum::<f64>() / n as f64;
            v_rad.push(mean);
            v_nrad.extend(row.iter().map(|v| v - mean));
        }
        RadialSplit {
            t: grid.t.clone(),
            v_rad,
            theta0: grid.theta0,
            n_theta: n,
            v_nrad,
        }
    }

    pub fn nrad_row(&self, i: usize) -> &[f64] {
        &self.v_nrad[i * self.n_theta..(i + 1) * self.n_theta]
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.t.iter().map(|t| t.exp())
    }
}

pub fn radial_split(v: &PlanePotential, spec: &PolarGridSpec) -> Result<RadialSplit> {
    Ok(RadialSplit::from_grid(&v.to_polar(spec)?))
}

/// Which exponential weight turns `V_rad(eᵗ)` into the one-dimensional potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectiveMode {
    /// `G(t) = e^{2t} V_rad(eᵗ)`, the Jacobian of `r = eᵗ` in `∫|∇u|² dx`.
    #[default]
    Jacobian,
    /// `G(t) = e^{2|t|} V_rad(eᵗ)`.
    AbsExponent,
}

/// One-dimensional effective potential `G` on `[t_min, t_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePotential1D {
    pub profile: Profile1D,
    pub mode: EffectiveMode,
    /// `G` is truncated below this `t` (the grid's lower end).
    pub truncated_below: f64,
}

pub fn effective_g(split: &RadialSplit, mode: EffectiveMode) -> EffectivePotential1D {
    let values = split
        .t
        .iter()
        .zip(&split.v_rad)
        .map(|(&t, &v)| {
            let w = match mode {
                EffectiveMode::Jacobian => (2.0 * t).exp(),
                EffectiveMode::AbsExponent => (2.0 * t.abs()).exp(),
            };
            (w * v).max(0.0)
        })
        .collect();
    EffectivePotential1D {
        profile: Profile1D {
            nodes: split.t.clone(),
            values,
        },
        mode,
        truncated_below: split.t[0],
    }
}

// ---------------------------------------------------------------------------
// chessboard mesh

/// Unit edge `ν = (x, y)` of the chessboard mesh, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId {
    pub a: Site,
    pub b: Site,
}

impl EdgeId {
    pub fn new(x: Site, y: Site) -> Result<Self> {
        let d = (x.0 - y.0).abs() + (x.1 - y.1).abs();
        if d != 1 {
            return Err(Error::InvalidInput(format!("{x:?} and {y:?} are not lattice neighbours")));
        }
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        Ok(EdgeId { a, b })
    }

    /// Edge from `site` in the positive direction `dir` (0: `e₁`, 1: `e₂`).
    pub fn from_site(site: Site, dir: usize) -> Self {
        let b = if dir == 0 { (site.0 + 1, site.1) } else { (site.0, site.1 + 1) };
        EdgeId { a: site, b }
    }

    /// Point at arclength `s ∈ [0, 1]` from `a`.
    pub fn point(&self, s: f64) -> (f64, f64) {
        let (ax, ay) = (self.a.0 as f64, self.a.1 as f64);
        (ax + s * (self.b.0 - self.a.0) as f64, ay + s * (self.b.1 - self.a.1) as f64)
    }

    /// Distance from the origin to the nearest point of the edge.
    pub fn rho(&self) -> f64 {
        let (ax, ay) = (self.a.0 as f64, self.a.1 as f64);
        let (dx, dy) = ((self.b.0 - self.a.0) as f64, (self.b.1 - self.a.1) as f64);
        let s = (-(ax * dx + ay * dy)).clamp(0.0, 1.0);
        (ax + s * dx).hypot(ay + s * dy)
    }

    pub fn endpoints(&self) -> [Site; 2] {
        [self.a, self.b]
    }
}

/// Potential along one edge, parametrized by arclength from `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeProfile {
    Constant(f64),
    /// Equispaced samples on `[0, 1]` including both ends, linearly interpolated.
    Sampled(Vec<f64>),
}

impl EdgeProfile {
    fn validate(&self) -> Result<()> {
        match self {
            EdgeProfile::Constant(v) => check_value(*v, "edge value"),
            EdgeProfile::Sampled(s) => {
                if s.len() < 2 {
                    return Err(Error::InvalidInput("sampled edge profile needs ≥ 2 samples".into()));
                }
                s.iter().try_for_each(|&v| check_value(v, "edge sample"))
            }
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            EdgeProfile::Constant(v) => *v,
            EdgeProfile::Sampled(samples) => {
                let m = samples.len() - 1;
                let u = (s.clamp(0.0, 1.0) * m as f64).min(m as f64);
                let k = (u.floor() as usize).min(m - 1);
                let f = u - k as f64;
                samples[k] * (1.0 - f) + samples[k + 1] * f
            }
        }
    }

    /// Arclength breakpoints of the piecewise-linear profile.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            EdgeProfile::Constant(_) => vec![0.0, 1.0],
            EdgeProfile::Sampled(s) => {
                let m = s.len() - 1;
                (0..=m).map(|k| k as f64 / m as f64).collect()
            }
        }
    }

    /// `∫_e V dz`, exact for the piecewise-linear profile.
    pub fn mass(&self) -> f64 {
        match self {
            EdgeProfile::Constant(v) => *v,
            EdgeProfile::Sampled(s) => {
                let m = (s.len() - 1) as f64;
                s.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() / m
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            EdgeProfile::Constant(v) => *v,
            EdgeProfile::Sampled(s) => s.iter().copied().fold(0.0, f64::max),
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        match self {
            EdgeProfile::Constant(v) => EdgeProfile::Constant(v * factor),
            EdgeProfile::Sampled(s) => EdgeProfile::Sampled(s.iter().map(|v| v * factor).collect()),
        }
    }
}

/// Potential on the chessboard mesh with cached edge masses `η(e) = ∫_e V dz`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgePotentialField {
    edges: BTreeMap<EdgeId, EdgeProfile>,
    masses: BTreeMap<EdgeId, f64>,
}

impl EdgePotentialField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges<I: IntoIterator<Item = (EdgeId, EdgeProfile)>>(edges: I) -> Result<Self> {
        let mut f = Self::new();
        for (e, p) in edges {
            f.insert(e, p)?;
        }
        Ok(f)
    }

    pub fn insert(&mut self, e: EdgeId, p: EdgeProfile) -> Result<()> {
        p.validate()?;
        let eta = p.mass();
        if eta > 0.0 || p.sup() > 0.0 {
            self.masses.insert(e, eta);
            self.edges.insert(e, p);
        } else {
            self.masses.remove(&e);
            self.edges.remove(&e);
        }
        Ok(())
    }

    pub fn profile(&self, e: &EdgeId) -> Option<&EdgeProfile> {
        self.edges.get(e)
    }

    pub fn eta(&self, e: &EdgeId) -> f64 {
        self.masses.get(e).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EdgeId, &EdgeProfile)> {
        self.edges.iter()
    }

    /// `(edge, η(e))` pairs.
    pub fn masses(&self) -> impl Iterator<Item = (EdgeId, f64)> + '_ {
        self.masses.iter().map(|(&e, &m)| (e, m))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `max(|x₁|, |x₂|)` over all edge endpoints.
    pub fn chebyshev_extent(&self) -> Option<i64> {
        self.edges
            .keys()
            .flat_map(|e| e.endpoints())
            .map(|(x, y)| x.abs().max(y.abs()))
            .max()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        check_value(factor, "scale factor")?;
        Self::from_edges(self.edges.iter().map(|(e, p)| (*e, p.scaled(factor))))
    }
}

/// `V⁰(x) = Σ_{e ∋ x} η(e)`.
pub fn edge_effective_lattice(v: &EdgePotentialField) -> LatticePotential {
    let mut acc: BTreeMap<Site, f64> = BTreeMap::new();
    for (e, eta) in v.masses() {
        for s in e.endpoints() {
            *acc.entry(s).or_insert(0.0) += eta;
        }
    }
    LatticePotential::from_entries(acc).expect("edge masses are nonnegative")
}

// ---------------------------------------------------------------------------
// named families

/// `{"kind": ..., "params": {...}, "seed": n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: String,
    #[serde(default = "empty_params")]
    pub params: serde_json::Value,
    #[serde(default)]
    pub seed: u64,
}

fn empty_params() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

impl FamilySpec {
    pub fn new(kind: &str, params: serde_json::Value, seed: u64) -> Self {
        FamilySpec {
            kind: kind.to_string(),
            params,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        FamilySpec { seed, ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    Lattice(LatticePotential),
    Plane(PlanePotential),
    Edge(EdgePotentialField),
}

impl Family {
    pub fn lattice(self) -> Result<LatticePotential> {
        match self {
            Family::Lattice(v) => Ok(v),
            _ => Err(Error::config("family.kind", "expected a lattice family")),
        }
    }

    pub fn plane(self) -> Result<PlanePotential> {
        match self {
            Family::Plane(v) => Ok(v),
            Family::Lattice(v) => Ok(lift_lattice(&v)),
            _ => Err(Error::config("family.kind", "expected a plane family")),
        }
    }

    pub fn edge(self) -> Result<EdgePotentialField> {
        match self {
            Family::Edge(v) => Ok(v),
            _ => Err(Error::config("family.kind", "expected an edge family")),
        }
    }
}

pub const FAMILY_NAMES: [&str; 8] = [
    "single-site",
    "random-box",
    "radial-indicator",
    "gaussian",
    "annulus",
    "lattice-lift",
    "edge-constant",
    "edge-random",
];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SingleSiteParams {
    value: f64,
    site: [i64; 2],
}

impl Default for SingleSiteParams {
    fn default() -> Self {
        SingleSiteParams { value: 1.0, site: [0, 0] }
    }
}

/// Sites of `[−L, L]²` are kept independently with probability `density`,
/// with values uniform in `(0, max_value]`; at least one site is kept.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RandomBoxParams {
    half_width: i64,
    max_value: f64,
    density: f64,
}

impl Default for RandomBoxParams {
    fn default() -> Self {
        RandomBoxParams {
            half_width: 20,
            max_value: 10.0,
            density: 0.02,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct IndicatorParams {
    radius: f64,
    value: f64,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        IndicatorParams { radius: 1.0, value: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GaussianParams {
    amplitude: f64,
    width: f64,
    truncation: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        GaussianParams {
            amplitude: 1.0,
            width: 1.0,
            truncation: 6.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AnnulusParams {
    inner: f64,
    outer: f64,
    value: f64,
}

impl Default for AnnulusParams {
    fn default() -> Self {
        AnnulusParams {
            inner: 1.0,
            outer: 2.0,
            value: 1.0,
        }
    }
}

/// Every edge with `ρ(e) ≤ max_rho` carries `value`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EdgeConstantParams {
    value: f64,
    max_rho: f64,
}

impl Default for EdgeConstantParams {
    fn default() -> Self {
        EdgeConstantParams { value: 1.0, max_rho: 2.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EdgeRandomParams {
    half_width: i64,
    max_value: f64,
    density: f64,
    /// Samples per edge; 0 or 1 means constant edges.
    samples: usize,
}

impl Default for EdgeRandomParams {
    fn default() -> Self {
        EdgeRandomParams {
            half_width: 3,
            max_value: 10.0,
            density: 0.3,
            samples: 0,
        }
    }
}

fn parse_params<T: for<'de> Deserialize<'de>>(kind: &str, params: &serde_json::Value) -> Result<T> {
    serde_json::from_value(params.clone()).map_err(|e| Error::config(format!("family.params ({kind})"), e.to_string()))
}

fn positive(field: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::config(field, format!("must be positive, got {v}")));
    }
    Ok(())
}

fn random_box(p: &RandomBoxParams, seed: u64) -> Result<LatticePotential> {
    if p.half_width < 0 {
        return Err(Error::config("family.params.half_width", "must be ≥ 0"));
    }
    positive("family.params.max_value", p.max_value)?;
    if !(0.0..=1.0).contains(&p.density) {
        return Err(Error::config("family.params.density", "must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = p.half_width;
    let mut entries = Vec::new();
    for x in -l..=l {
        for y in -l..=l {
            let keep = rng.gen::<f64>() < p.density;
            let u = 1.0 - rng.gen::<f64>();
            if keep {
                entries.push(((x, y), p.max_value * u));
            }
        }
    }
    if entries.is_empty() {
        let x = rng.gen_range(-l..=l);
        let y = rng.gen_range(-l..=l);
        entries.push(((x, y), p.max_value * (1.0 - rng.gen::<f64>())));
    }
    LatticePotential::from_entries(entries)
}

/// Builds a named potential family. Deterministic given `spec.seed`.
pub fn make_family(spec: &FamilySpec) -> Result<Family> {
    let kind = spec.kind.as_str();
    let params = &spec.params;
    match kind {
        "single-site" => {
            let p: SingleSiteParams = parse_params(kind, params)?;
            Ok(Family::Lattice(LatticePotential::single((p.site[0], p.site[1]), p.value)?))
        }
        "random-box" => {
            let p: RandomBoxParams = parse_params(kind, params)?;
            Ok(Family::Lattice(random_box(&p, spec.seed)?))
        }
        "lattice-lift" => {
            let p: RandomBoxParams = parse_params(kind, params)?;
            Ok(Family::Plane(lift_lattice(&random_box(&p, spec.seed)?)))
        }
        "radial-indicator" => {
            let p: IndicatorParams = parse_params(kind, params)?;
            positive("family.params.radius", p.radius)?;
            Ok(Family::Plane(PlanePotential::radial_indicator(p.radius, p.value)?))
        }
        "gaussian" => {
            let p: GaussianParams = parse_params(kind, params)?;
            Ok(Family::Plane(PlanePotential::gaussian(p.amplitude, p.width, p.truncation)?))
        }
        "annulus" => {
            let p: AnnulusParams = parse_params(kind, params)?;
            Ok(Family::Plane(PlanePotential::annulus(p.inner, p.outer, p.value)?))
        }
        "edge-constant" => {
            let p: EdgeConstantParams = parse_params(kind, params)?;
            check_value(p.value, "edge-constant value")?;
            let l = p.max_rho.ceil() as i64 + 1;
            let mut f = EdgePotentialField::new();
            for x in -l..=l {
                for y in -l..=l {
                    for dir in 0..2 {
                        let e = EdgeId::from_site((x, y), dir);
                        if e.rho() <= p.max_rho {
                            f.insert(e, EdgeProfile::Constant(p.value))?;
                        }
                    }
                }
            }
            Ok(Family::Edge(f))
        }
        "edge-random" => {
            let p: EdgeRandomParams = parse_params(kind, params)?;
            positive("family.params.max_value", p.max_value)?;
            if p.half_width < 1 {
                return Err(Error::config("family.params.half_width", "must be ≥ 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let l = p.half_width;
            let mut f = EdgePotentialField::new();
            for x in -l..=l {
                for y in -l..=l {
                    for dir in 0..2 {
                        let e = EdgeId::from_site((x, y), dir);
                        let inside = e.b.0 <= l && e.b.1 <= l;
                        let keep = rng.gen::<f64>() < p.density;
                        if !(inside && keep) {
                            continue;
                        }
                        let profile = if p.samples >= 2 {
                            EdgeProfile::Sampled((0..p.samples).map(|_| p.max_value * rng.gen::<f64>()).collect())
                        } else {
                            EdgeProfile::Constant(p.max_value * (1.0 - rng.gen::<f64>()))
                        };
                        f.insert(e, profile)?;
                    }
                }
            }
            if f.is_empty() {
                f.insert(EdgeId::from_site((0, 0), 0), EdgeProfile::Constant(p.max_value))?;
            }
            Ok(Family::Edge(f))
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}
