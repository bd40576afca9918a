/// Triplet accumulator for a symmetric matrix; only the lower triangle is kept.
#[derive(Debug, Clone, Default)]
pub struct SymSparse {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    pub fn new(n: usize) -> Self {
        SymSparse { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, nnz: usize) -> Self {
        SymSparse {
            n,
            entries: Vec::with_capacity(nnz),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds `value` at `(i, j)`; `(j, i)` is implied. Duplicates are summed.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of range for n = {}", self.n);
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, value));
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut s = SymSparse::new(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().take(i + 1) {
                if v != 0.0 || i == j {
                    s.add(i, j, v);
                }
            }
        }
        s
    }

    /// Sorted, duplicate-free lower-triangle entries.
    pub fn compressed(&self) -> Vec<(usize, usize, f64)> {
        let mut e = self.entries.clone();
        e.sort_unstable_by_key(|a| (a.0, a.1));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(e.len());
        for (r, c, v) in e {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out
    }

    /// Symmetric adjacency lists of the off-diagonal pattern.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(r, c, _) in &self.entries {
            if r != c {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (r, c, v) in self.compressed() {
            d[r][c] += v;
            if r != c {
                d[c][r] += v;
            }
        }
        d
    }
}
