//! Gauss–Legendre rules and small composite/adaptive integrators.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            z = 0.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = if n == 1 { 2.0 } else { 2.0 / ((1.0 - z * z) * dp * dp) };
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre rule over `panels` equal panels of `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            sum += wi * f(mid + 0.5 * h * xi);
        }
    }
    0.5 * h * sum
}

/// Integral over `[a, b]` split at the given breakpoints (those outside are ignored).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], panels: usize, order: usize) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| integrate(&f, w[0], w[1], panels, order)).sum()
}

fn rect_gauss<F: Fn(f64, f64) -> f64>(f: &F, x0: f64, x1: f64, y0: f64, y1: f64, x: &[f64], w: &[f64]) -> f64 {
    let (hx, hy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        for (yj, wj) in x.iter().zip(w) {
            s += wi * wj * f(cx + hx * xi, cy + hy * yj);
        }
    }
    s * hx * hy
}

/// Adaptive quadrisection cubature of `f` over a rectangle with a tensor Gauss rule.
pub fn adaptive_rect<F: Fn(f64, f64) -> f64>(f: &F, x0: f64, x1: f64, y0: f64, y1: f64, tol: f64) -> f64 {
    let (x, w) = gauss_legendre(4);
    let whole = rect_gauss(f, x0, x1, y0, y1, &x, &w);
    adaptive_rect_rec(f, x0, x1, y0, y1, whole, tol, 0, &x, &w)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rect_rec<F: Fn(f64, f64) -> f64>(
    f: &F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    x: &[f64],
    w: &[f64],
) -> f64 {
    let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let quads = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)];
    let parts: Vec<f64> = quads.iter().map(|&(a, b, c, d)| rect_gauss(f, a, b, c, d, x, w)).collect();
    let refined: f64 = parts.iter().sum();
    if (refined - whole).abs() <= tol || depth >= 14 {
        return refined;
    }
    quads
        .iter()
        .zip(&parts)
        .map(|(&(a, b, c, d), &p)| adaptive_rect_rec(f, a, b, c, d, p, 0.25 * tol, depth + 1, x, w))
        .sum()
}
