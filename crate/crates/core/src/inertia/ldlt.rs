use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::skyline::SymSkylineMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InertiaConfig {
    /// Pivots with `|d| ≤ pivot_tol · ‖A − σI‖_max` block the factorization.
    pub pivot_tol: f64,
    /// Relative size of the shift window used when a pivot blocks.
    pub perturbation: f64,
    pub seed: u64,
    pub max_retries: usize,
}

impl Default for InertiaConfig {
    fn default() -> Self {
        InertiaConfig {
            pivot_tol: 1e-12,
            perturbation: 1e-10,
            seed: 0x5eed,
            max_retries: 12,
        }
    }
}

/// Inertia of `A − shift·I`.
///
/// When `perturbation_used > 0` the factorization at `shift` was blocked by a
/// vanishing pivot; `negatives` then counts eigenvalues below
/// `shift − perturbation_used` and `zeros` those inside
/// `[shift − perturbation_used, shift + perturbation_used)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaResult {
    pub negatives: usize,
    pub zeros: usize,
    pub positives: usize,
    pub shift: f64,
    pub perturbation_used: f64,
}

impl InertiaResult {
    pub fn dim(&self) -> usize {
        self.negatives + self.zeros + self.positives
    }
}

/// Skyline LDLᵀ of `A − shift·I` without pivoting. Returns the number of
/// negative pivots, or `None` as soon as a pivot falls below `tol`.
fn factor_negatives(m: &SymSkylineMatrix, shift: f64, tol: f64, work: &mut Vec<f64>, d: &mut Vec<f64>) -> Option<usize> {
    let n = m.dim();
    let (first, ptr, values) = m.storage();
    work.clear();
    work.extend_from_slice(values);
    d.clear();
    d.resize(n, 0.0);

    let mut negatives = 0;
    for i in 0..n {
        let fi = first[i];
        let (done, rest) = work.split_at_mut(ptr[i]);
        let row = &mut rest[..ptr[i + 1] - ptr[i]];
        let len = i - fi;

        // g_ij = a_ij − Σ_k g_ik l_jk, with rows j < i already holding l_jk
        for j in fi..i {
            let fj = first[j];
            let k0 = fi.max(fj);
            if k0 < j {
                let lj = &done[ptr[j] + (k0 - fj)..ptr[j] + (j - fj)];
                let gi = &row[k0 - fi..j - fi];
                let s: f64 = gi.iter().zip(lj).map(|(a, b)| a * b).sum();
                row[j - fi] -= s;
            }
        }
        let mut diag = row[len] - shift;
        for k in 0..len {
            let g = row[k];
            if g != 0.0 {
                let l = g / d[fi + k];
                diag -= g * l;
                row[k] = l;
            }
        }
        if !(diag.abs() > tol) {
            return None;
        }
        d[i] = diag;
        if diag < 0.0 {
            negatives += 1;
        }
    }
    Some(negatives)
}

fn shifted_norm(m: &SymSkylineMatrix, shift: f64) -> f64 {
    let mut norm = 0.0_f64;
    for i in 0..m.dim() {
        let row = m.row(i);
        let (diag, off) = row.split_last().expect("row holds its diagonal");
        norm = norm.max((diag - shift).abs());
        for v in off {
            norm = norm.max(v.abs());
        }
    }
    norm
}

pub fn ldlt_inertia(m: &SymSkylineMatrix, shift: f64) -> Result<InertiaResult> {
    ldlt_inertia_with(m, shift, &InertiaConfig::default())
}

pub fn ldlt_inertia_with(m: &SymSkylineMatrix, shift: f64, cfg: &InertiaConfig) -> Result<InertiaResult> {
    let n = m.dim();
    if !m.is_finite() || !shift.is_finite() {
        return Err(Error::InvalidInput("matrix or shift has non-finite entries".into()));
    }
    let mut result = InertiaResult {
        negatives: 0,
        zeros: 0,
        positives: 0,
        shift,
        perturbation_used: 0.0,
    };
    if n == 0 {
        return Ok(result);
    }
    let norm = shifted_norm(m, shift);
    if norm == 0.0 {
        result.zeros = n;
        return Ok(result);
    }

    let tol = cfg.pivot_tol * norm;
    let mut work = Vec::with_capacity(m.envelope_len());
    let mut d = Vec::with_capacity(n);
    if let Some(neg) = factor_negatives(m, shift, tol, &mut work, &mut d) {
        result.negatives = neg;
        result.positives = n - neg;
        return Ok(result);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut eps = cfg.perturbation * norm;
    for _ in 0..cfg.max_retries {
        let e = eps * (1.0 + rng.gen::<f64>());
        let below = factor_negatives(m, shift - e, tol, &mut work, &mut d);
        let above = factor_negatives(m, shift + e, tol, &mut work, &mut d);
        if let (Some(lo), Some(hi)) = (below, above) {
            result.negatives = lo;
            result.zeros = hi - lo;
            result.positives = n - hi;
            result.perturbation_used = e;
            return Ok(result);
        }
        eps *= 4.0;
    }
    Err(Error::InvalidInput(format!(
        "LDLT factorization blocked at shift {shift} after {} retries",
        cfg.max_retries
    )))
}

/// Number of eigenvalues strictly below `sigma`.
pub fn count_below(m: &SymSkylineMatrix, sigma: f64) -> Result<usize> {
    Ok(ldlt_inertia(m, sigma)?.negatives)
}
