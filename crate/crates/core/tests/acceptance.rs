//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Oracles here are computed independently of the library paths they check:
//! dense eigendecomposition, closed-form eigenvalues, Gauss-integrated cell
//! forms, Newton inversion and brute-force grid search.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use negcount::bounds::{averaged_orlicz_norm, Piece};
use negcount::fem::{cell_constants, count_negative_fem, interpolate_j0, FemCountConfig};
use negcount::graph::{count_graph_below, ChessboardPatch};
use negcount::inertia::SymSparse;
use negcount::lattice::{sobolev_seminorm, LatticeFunction};
use negcount::potential::FamilySpec;
use negcount::sturm::{prufer_count_interval, Potential1D};
use negcount::workbench::{run, ExperimentConfig, ExperimentKind, Outcome, Tally};
use negcount::{ldlt_inertia, EdgePotentialField, PlanePotential, SymSkylineMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn tally(outs: &[&Outcome], check: &str) -> Tally {
    let mut t = Tally::default();
    for o in outs {
        if let Some(c) = o.summary.checks.get(check) {
            t.passed += c.passed;
            t.failed += c.failed;
        }
    }
    t
}

// ---------------------------------------------------------------------------

fn inertia_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    for k in 0..200 {
        let n = rng.gen_range(1..=50);
        // alternate dense, banded and sparse patterns
        let band = match k % 3 {
            0 => n,
            1 => rng.gen_range(1..=4),
            _ => 0,
        };
        let mut s = SymSparse::with_capacity(n, n * n);
        let mut d = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let keep = if band == 0 {
                    i == j || rng.gen::<f64>() < 0.1
                } else {
                    i - j <= band
                };
                if keep {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    s.add(i, j, x);
                    d[(i, j)] = x;
                    d[(j, i)] = x;
                }
            }
        }
        let (m, _) = SymSkylineMatrix::from_sparse_rcm(&s);
        let r = ldlt_inertia(&m, 0.0).unwrap();
        let eig = SymmetricEigen::new(d).eigenvalues;
        let neg = eig.iter().filter(|&&l| l < 0.0).count();
        let pos = eig.iter().filter(|&&l| l > 0.0).count();
        if r.negatives != neg || r.positives != pos || r.zeros != n - neg - pos {
            mismatches += 1;
        }
    }
    let t = start.elapsed();
    verdict(
        mismatches == 0 && t < Duration::from_secs(10),
        format!("200 random symmetric matrices (n ≤ 50), {mismatches} mismatches, {}", secs(t)),
    )
}

fn sturm_closed_form() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = Vec::new();
    for _ in 0..50 {
        let c: f64 = rng.gen_range(0.0..500.0);
        let expected = (1..).take_while(|&k: &usize| PI * PI * ((k * k) as f64) < c).count();
        let got = prufer_count_interval(&Potential1D::constant(0.0, 1.0, c).unwrap()).unwrap().count;
        if got != expected {
            bad.push((c, got, expected));
        }
    }
    verdict(bad.is_empty(), format!("50 constant wells on [0,1], mismatches {bad:?}"))
}

/// Bilinear energy form of a unit cell by 3-point Gauss quadrature, corners
/// ordered (0,0), (1,0), (0,1), (1,1).
fn bilinear_energy_form() -> Matrix4<f64> {
    let gx = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let gw = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let grads = |x: f64, y: f64| -> [[f64; 2]; 4] { [[-(1.0 - y), -(1.0 - x)], [1.0 - y, -x], [-y, 1.0 - x], [y, x]] };
    let mut d = Matrix4::zeros();
    for (xi, wi) in gx.iter().zip(&gw) {
        for (yj, wj) in gx.iter().zip(&gw) {
            let (x, y) = (0.5 * (xi + 1.0), 0.5 * (yj + 1.0));
            let g = grads(x, y);
            for a in 0..4 {
                for b in 0..4 {
                    d[(a, b)] += 0.25 * wi * wj * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
    }
    d
}

fn cell_constants_oracle() -> Verdict {
    let d = bilinear_energy_form();
    // sum of squared differences along the four cell edges
    let mut q = Matrix4::zeros();
    for (a, b) in [(0, 1), (2, 3), (0, 2), (1, 3)] {
        q[(a, a)] += 1.0;
        q[(b, b)] += 1.0;
        q[(a, b)] -= 1.0;
        q[(b, a)] -= 1.0;
    }
    // restrict to the complement of constants: u = P w, w ∈ R³
    let p = nalgebra::Matrix4x3::new(1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -1.0);
    let (dr, qr) = (p.transpose() * d * p, p.transpose() * q * p);
    let l = qr.cholesky().expect("edge form is positive on the complement").l();
    let li = l.try_inverse().unwrap();
    let eig = SymmetricEigen::new(li * dr * li.transpose()).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    let (c, cp) = cell_constants();
    let err = (c - lo).abs().max((cp - hi).abs());
    verdict(
        err < 1e-10 && (lo - 1.0 / 6.0).abs() < 1e-10 && (hi - 0.5).abs() < 1e-10,
        format!("library ({c:.12}, {cp:.12}), oracle ({lo:.12}, {hi:.12}), max error {err:.1e}"),
    )
}

fn interpolation_inequality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut mismatched_seminorm = 0;
    let mut tight = 0;
    for _ in 0..1000 {
        let (w, h) = (rng.gen_range(1..=20i64), rng.gen_range(1..=20i64));
        let (x0, y0) = (rng.gen_range(-10..=10i64), rng.gen_range(-10..=10i64));
        let density = rng.gen_range(0.05..1.0);
        let mut u = LatticeFunction::new();
        for x in x0..x0 + w {
            for y in y0..y0 + h {
                if rng.gen::<f64>() < density {
                    // integer data keeps both sides exact in f64
                    let val = rng.gen_range(-50..=50i64) as f64;
                    if val != 0.0 {
                        u.insert((x, y), val);
                    }
                }
            }
        }
        let mut sob = 0.0;
        for (&(x, y), &val) in &u {
            for nb in [(x + 1, y), (x, y + 1)] {
                sob += (val - u.get(&nb).copied().unwrap_or(0.0)).powi(2);
            }
            for nb in [(x - 1, y), (x, y - 1)] {
                if !u.contains_key(&nb) {
                    sob += val * val;
                }
            }
        }
        if sob != sobolev_seminorm(&u) {
            mismatched_seminorm += 1;
        }
        let energy = interpolate_j0(&u).energy();
        if energy > sob {
            violations += 1;
        }
        if energy == sob {
            tight += 1;
        }
    }
    verdict(
        violations == 0 && mismatched_seminorm == 0,
        format!("1000 integer-valued u, supports up to 20×20: {violations} violations, {mismatched_seminorm} seminorm mismatches, {tight} with equality"),
    )
}

/// `eᵗ − t − 1 = y` by Newton from above.
fn a_inverse(y: f64) -> f64 {
    let mut t = (1.0 + y).ln().max((2.0 * y).sqrt()) + 1.0;
    for _ in 0..100 {
        let f = t.exp() - t - 1.0 - y;
        let step = f / (t.exp() - 1.0);
        t -= step;
        if step.abs() < 1e-15 * t {
            break;
        }
    }
    t
}

/// Maximizes `Σ mᵢvᵢgᵢ` subject to `Σ mᵢ𝔄(gᵢ) ≤ total` by zooming grid search
/// over `g₁..g_{k−1}`; the last coordinate takes the remaining budget.
fn brute_force(pieces: &[(f64, f64)], total: f64) -> f64 {
    let k = pieces.len();
    let last = |g: &[f64]| -> Option<f64> {
        let used: f64 = g.iter().zip(pieces).map(|(gi, (_, m))| m * (gi.exp() - gi - 1.0)).sum();
        let rest = total - used;
        (rest >= 0.0).then(|| a_inverse(rest / pieces[k - 1].1))
    };
    let value = |g: &[f64], gk: f64| -> f64 {
        g.iter().zip(pieces).map(|(gi, (v, m))| m * v * gi).sum::<f64>() + pieces[k - 1].0 * pieces[k - 1].1 * gk
    };
    let free = k - 1;
    if free == 0 {
        return value(&[], last(&[]).unwrap());
    }
    let mut center: Vec<f64> = pieces[..free].iter().map(|&(_, m)| 0.5 * a_inverse(total / m)).collect();
    let mut half: Vec<f64> = center.clone();
    let n = 10usize;
    let mut best = f64::NEG_INFINITY;
    for _ in 0..60 {
        let mut best_g = center.clone();
        let mut idx = vec![0usize; free];
        loop {
            let g: Vec<f64> = (0..free)
                .map(|i| (center[i] - half[i] + 2.0 * half[i] * idx[i] as f64 / n as f64).max(0.0))
                .collect();
            if let Some(gk) = last(&g) {
                let val = value(&g, gk);
                if val > best {
                    best = val;
                    best_g = g;
                }
            }
            let mut i = 0;
            while i < free {
                idx[i] += 1;
                if idx[i] <= n {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == free {
                break;
            }
        }
        center = best_g;
        for h in &mut half {
            *h *= 0.6;
        }
    }
    best
}

fn orlicz_norm() -> Verdict {
    let unit = averaged_orlicz_norm(&[Piece::new(1.0, 1.0)], 10.0).value;
    let oracle = a_inverse(10.0);
    let err_unit = (unit - oracle).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for trial in 0..25 {
        let k = 1 + trial % 5;
        let pieces: Vec<(f64, f64)> = (0..k).map(|_| (rng.gen_range(0.1..10.0), rng.gen_range(0.2..2.0))).collect();
        let total = pieces.iter().map(|p| p.1).sum::<f64>() + rng.gen_range(0.0..5.0);
        let dual = averaged_orlicz_norm(&pieces.iter().map(|&(v, m)| Piece::new(v, m)).collect::<Vec<_>>(), total).value;
        worst = worst.max((dual - brute_force(&pieces, total)).abs());
    }
    verdict(
        err_unit < 1e-8 && worst < 1e-6,
        format!("unit square in |E|=10: {unit:.12} vs 𝔄⁻¹(10) = {oracle:.12}; 25 partitions (1–5 pieces), max |dual − grid search| = {worst:.1e}"),
    )
}

fn lattice_suite() -> (Outcome, Outcome, Duration) {
    let start = Instant::now();
    let family = FamilySpec::new("random-box", json!({"half_width": 20, "max_value": 10.0, "density": 0.02}), 0);
    let mut mv = ExperimentConfig::new(ExperimentKind::VerifyMv, family.clone());
    mv.instances = 20;
    mv.seed = 100;
    mv.alphas = (0..7).map(|k| 2f64.powi(k)).collect();
    let mv_out = run(&mv).expect("verify-mv run");
    let mut cl = ExperimentConfig::new(ExperimentKind::CountLattice, family);
    cl.instances = 20;
    cl.seed = 200;
    cl.alphas = vec![0.5, 2.0, 8.0, 32.0];
    let cl_out = run(&cl).expect("count-lattice run");
    (mv_out, cl_out, start.elapsed())
}

fn mv_bound(mv: &Outcome, t: Duration) -> Verdict {
    let f = &mv.summary.fitted[0];
    let converged = mv.rows.iter().filter(|r| r.get("converged") == Some("true")).count();
    verdict(
        f.finite && f.stable && f.points > 0 && t < Duration::from_secs(600),
        format!(
            "20 random potentials, α ∈ {{1..64}}: C = {:.4}, doubled grid C = {:.4} (change {:.2}%), {} of {} counts converged, {}",
            f.base,
            f.doubled,
            100.0 * f.relative_change,
            converged,
            mv.rows.len(),
            secs(t)
        ),
    )
}

fn rank_bound(mv: &Outcome, cl: &Outcome) -> Verdict {
    let t = tally(&[mv, cl], "rank-bound");
    verdict(
        t.failed == 0 && t.passed > 0,
        format!("N₋ ≤ |supp V| on {} converged instances, {} violations", t.passed, t.failed),
    )
}

fn decoupling() -> (Verdict, Outcome) {
    let family = FamilySpec::new("edge-random", json!({"half_width": 2, "max_value": 10.0, "density": 0.3}), 0);
    let mut c = ExperimentConfig::new(ExperimentKind::VerifyDecoupling, family);
    c.instances = 12;
    c.seed = 300;
    c.alphas = vec![1.0, 4.0];
    c.limits.graph.m = 8;
    let out = run(&c).expect("verify-decoupling run");
    let t = tally(&[&out], "decoupling");
    (
        verdict(
            t.failed == 0 && t.passed >= 10,
            format!("{} converged chessboard instances, {} violations", t.passed, t.failed),
        ),
        out,
    )
}

fn graph_ordering() -> Verdict {
    let mut outs = Vec::new();
    for (kind, params, n) in [
        ("edge-random", json!({"half_width": 4, "density": 0.3}), 30),
        ("edge-random", json!({"half_width": 3, "density": 0.5, "samples": 5}), 20),
        ("edge-constant", json!({"value": 2.0, "max_rho": 3.0}), 1),
    ] {
        let mut c = ExperimentConfig::new(ExperimentKind::Bounds, FamilySpec::new(kind, params, 0));
        c.instances = n;
        c.seed = 400;
        outs.push(run(&c).expect("bounds run"));
    }
    let t = tally(&outs.iter().collect::<Vec<_>>(), "graph-ordering");
    verdict(
        t.failed == 0 && t.passed == 51,
        format!("Λ ≤ M ≤ Σ η log(4+ρ) on {} edge potentials, {} violations", t.passed, t.failed),
    )
}

fn weyl() -> (Verdict, Vec<bool>) {
    let start = Instant::now();
    let v = PlanePotential::radial_indicator(1.0, 1.0).unwrap();
    let cfg = FemCountConfig {
        m: 16,
        ..Default::default()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    let mut monotone = Vec::new();
    for alpha in [100.0, 200.0, 400.0] {
        let r = count_negative_fem(&v, alpha, &cfg).unwrap();
        let ratio = r.count() as f64 / alpha;
        ok &= r.converged && (0.15..=0.35).contains(&ratio);
        monotone.push(r.monotone());
        parts.push(format!(
            "α={alpha}: N={} ratio {ratio:.3}{}",
            r.count(),
            if r.converged { "" } else { " (not converged)" }
        ));
    }
    let t = start.elapsed();
    (
        verdict(ok && t < Duration::from_secs(300), format!("{}; {}", parts.join(", "), secs(t))),
        monotone,
    )
}

fn graph_counts() -> Outcome {
    let mut c = ExperimentConfig::new(
        ExperimentKind::CountGraph,
        FamilySpec::new("edge-random", json!({"half_width": 2, "density": 0.4}), 0),
    );
    c.instances = 6;
    c.seed = 500;
    c.alphas = vec![0.5, 2.0, 8.0];
    c.limits.graph.m = 8;
    run(&c).expect("count-graph run")
}

fn monotonicity(lattice: &[&Outcome], graph: &[&Outcome], fem: &[bool]) -> Verdict {
    let l = tally(lattice, "dirichlet-monotone");
    let g = tally(graph, "dirichlet-monotone");
    let fem_bad = fem.iter().filter(|m| !**m).count();
    verdict(
        l.failed == 0 && g.failed == 0 && fem_bad == 0 && l.passed > 0 && g.passed > 0 && !fem.is_empty(),
        format!(
            "lattice {} scans ({} failed), graph {} scans ({} failed), FEM {} scans ({} failed)",
            l.passed + l.failed,
            l.failed,
            g.passed + g.failed,
            g.failed,
            fem.len(),
            fem_bad
        ),
    )
}

fn nonpositive_vs_doubled(cl: &Outcome) -> Verdict {
    let t = tally(&[cl], "nonpositive-vs-doubled");
    verdict(
        t.failed == 0 && t.passed > 0,
        format!(
            "#{{λ ≤ 1e-9}}(αV) ≤ N₋(2αV) on {} converged instances, {} violations",
            t.passed, t.failed
        ),
    )
}

fn embedded_eigenvalues() -> Verdict {
    let window = |l: i64| {
        let p = ChessboardPatch::new(l, 16).unwrap();
        let z = EdgePotentialField::new();
        count_graph_below(&z, 0.0, p, PI * PI + 0.1).unwrap() - count_graph_below(&z, 0.0, p, PI * PI - 0.1).unwrap()
    };
    let (a, b) = (window(4), window(8));
    verdict(b > a, format!("free graph eigenvalues in (π²−0.1, π²+0.1): {a} at L=4, {b} at L=8"))
}

fn main() {
    let total = Instant::now();
    let inertia = inertia_oracle();
    let sturm = sturm_closed_form();
    let cells = cell_constants_oracle();
    let interp = interpolation_inequality();
    let orlicz = orlicz_norm();
    let (mv, cl, lattice_time) = lattice_suite();
    let (dec, dec_out) = decoupling();
    let ordering = graph_ordering();
    let (weyl_verdict, fem_monotone) = weyl();
    let graph_out = graph_counts();
    let results = [
        ("inertia matches dense eigendecomposition", inertia),
        ("Prüfer counts of constant wells", sturm),
        ("cell-form equivalence constants", cells),
        ("interpolation energy ≤ lattice seminorm", interp),
        ("averaged Orlicz norm", orlicz),
        ("MV bound constant fit", mv_bound(&mv, lattice_time)),
        ("rank bound", rank_bound(&mv, &cl)),
        ("decoupling inequality", dec),
        ("graph functional ordering", ordering),
        (
            "Dirichlet monotonicity",
            monotonicity(&[&mv, &cl, &dec_out], &[&graph_out], &fem_monotone),
        ),
        ("Weyl sanity for the unit-disc well", weyl_verdict),
        ("nonpositive count vs doubled coupling", nonpositive_vs_doubled(&cl)),
        ("embedded eigenvalue multiplicity grows", embedded_eigenvalues()),
    ];

    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!("AC{:<2} {} {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!(
        "{} of {} criteria passed in {}",
        results.len() - failed,
        results.len(),
        secs(total.elapsed())
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
