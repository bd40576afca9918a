use super::rcm::{rcm_order, Ordering};
use super::sparse::SymSparse;

/// Symmetric matrix in envelope (skyline) storage.
///
/// Row `i` stores the lower-triangle entries in columns `first[i]..=i`
/// contiguously; the upper triangle is implied by symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSkylineMatrix {
    n: usize,
    first: Vec<usize>,
    ptr: Vec<usize>,
    values: Vec<f64>,
}

impl SymSkylineMatrix {
    /// Builds the envelope of `sparse` relabelled by `ordering` (identity when `None`).
    pub fn from_sparse(sparse: &SymSparse, ordering: Option<&Ordering>) -> Self {
        let n = sparse.dim();
        let map = |u: usize| ordering.map_or(u, |o| o.old_to_new[u]);
        let entries: Vec<(usize, usize, f64)> = sparse
            .compressed()
            .into_iter()
            .map(|(r, c, v)| {
                let (a, b) = (map(r), map(c));
                if a >= b {
                    (a, b, v)
                } else {
                    (b, a, v)
                }
            })
            .collect();

        let mut first: Vec<usize> = (0..n).collect();
        for &(r, c, _) in &entries {
            first[r] = first[r].min(c);
        }
        let mut ptr = Vec::with_capacity(n + 1);
        ptr.push(0);
        for i in 0..n {
            let len = i - first[i] + 1;
            ptr.push(ptr[i] + len);
        }
        let mut values = vec![0.0; ptr[n]];
        for (r, c, v) in entries {
            values[ptr[r] + (c - first[r])] += v;
        }
        SymSkylineMatrix { n, first, ptr, values }
    }

    /// Builds with a reverse Cuthill–McKee relabelling and returns the ordering used.
    pub fn from_sparse_rcm(sparse: &SymSparse) -> (Self, Ordering) {
        let ordering = rcm_order(&sparse.adjacency());
        (SymSkylineMatrix::from_sparse(sparse, Some(&ordering)), ordering)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        SymSkylineMatrix::from_sparse(&SymSparse::from_dense(rows), None)
    }

    pub fn identity(n: usize) -> Self {
        let mut s = SymSparse::new(n);
        for i in 0..n {
            s.add(i, i, 1.0);
        }
        SymSkylineMatrix::from_sparse(&s, None)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn first_column(&self, row: usize) -> usize {
        self.first[row]
    }

    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.values[self.ptr[i]..self.ptr[i + 1]]
    }

    pub(crate) fn storage(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.first, &self.ptr, &self.values)
    }

    /// Entry `(i, j)`; zero outside the envelope.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if c < self.first[r] {
            0.0
        } else {
            self.values[self.ptr[r] + c - self.first[r]]
        }
    }

    /// Stored entries (including explicit zeros inside the envelope).
    pub fn envelope_len(&self) -> usize {
        self.values.len()
    }

    pub fn bandwidth(&self) -> usize {
        (0..self.n).map(|i| i - self.first[i]).max().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.values[self.ptr[i + 1] - 1]).collect()
    }

    /// Lower-triangle nonzeros as `(row, col, value)`.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row(i)
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(move |(k, &v)| (i, self.first[i] + k, v))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.lower_entries() {
            d[i][j] = v;
            d[j][i] = v;
        }
        d
    }
}
