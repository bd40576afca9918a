use std::collections::VecDeque;

/// A symmetric permutation: `new_to_old[k]` is the original index placed at
/// position `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    pub new_to_old: Vec<usize>,
    pub old_to_new: Vec<usize>,
    pub before: EnvelopeProfile,
    pub after: EnvelopeProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EnvelopeProfile {
    /// Number of stored strictly-lower entries, `Σ_i (i − first_i)`.
    pub envelope: usize,
    pub bandwidth: usize,
}

impl Ordering {
    pub fn identity(n: usize, profile: EnvelopeProfile) -> Self {
        Ordering {
            new_to_old: (0..n).collect(),
            old_to_new: (0..n).collect(),
            before: profile,
            after: profile,
        }
    }

    pub fn len(&self) -> usize {
        self.new_to_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_to_old.is_empty()
    }
}

/// Envelope size and bandwidth of `adj` under the labeling `old_to_new`.
pub fn envelope_profile(adj: &[Vec<usize>], old_to_new: &[usize]) -> EnvelopeProfile {
    let n = adj.len();
    let mut first: Vec<usize> = (0..n).collect();
    for (u, nbrs) in adj.iter().enumerate() {
        let nu = old_to_new[u];
        for &w in nbrs {
            let nw = old_to_new[w];
            if nw < nu && nw < first[nu] {
                first[nu] = nw;
            }
        }
    }
    let mut p = EnvelopeProfile::default();
    for (i, &f) in first.iter().enumerate() {
        p.envelope += i - f;
        p.bandwidth = p.bandwidth.max(i - f);
    }
    p
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, level: &mut [usize], stamp: &mut [usize], tag: usize) -> (usize, usize) {
    // returns (eccentricity, a node of minimum degree in the last level)
    let mut queue = VecDeque::new();
    queue.push_back(start);
    stamp[start] = tag;
    level[start] = 0;
    let mut ecc = 0;
    let mut last = vec![start];
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if stamp[w] != tag {
                stamp[w] = tag;
                level[w] = level[u] + 1;
                if level[w] > ecc {
                    ecc = level[w];
                    last.clear();
                }
                if level[w] == ecc {
                    last.push(w);
                }
                queue.push_back(w);
            }
        }
    }
    let far = *last.iter().min_by_key(|&&u| (adj[u].len(), u)).expect("non-empty level");
    (ecc, far)
}

/// Reverse Cuthill–McKee ordering of a symmetric pattern.
///
/// Components are ordered one after another, each started from a
/// pseudo-peripheral node (George–Liu). If the result has a larger envelope
/// than the natural order, the natural order is returned instead, so the
/// envelope never grows.
pub fn rcm_order(adj: &[Vec<usize>]) -> Ordering {
    let n = adj.len();
    let identity: Vec<usize> = (0..n).collect();
    let before = envelope_profile(adj, &identity);
    if n == 0 {
        return Ordering::identity(0, before);
    }

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![0usize; n];
    let mut stamp = vec![usize::MAX; n];
    let mut tag = 0usize;

    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&u| (adj[u].len(), u));

    for &seed in &seeds {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start node
        let mut root = seed;
        let (mut ecc, mut far) = bfs_levels(adj, root, &mut level, &mut stamp, tag);
        tag += 1;
        loop {
            let (e2, f2) = bfs_levels(adj, far, &mut level, &mut stamp, tag);
            tag += 1;
            if e2 > ecc {
                root = far;
                ecc = e2;
                far = f2;
            } else {
                break;
            }
        }

        let start = order.len();
        order.push(root);
        visited[root] = true;
        let mut head = start;
        let mut nbrs = Vec::new();
        while head < order.len() {
            let u = order[head];
            head += 1;
            nbrs.clear();
            nbrs.extend(adj[u].iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_by_key(|&w| (adj[w].len(), w));
            for &w in &nbrs {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();

    let mut old_to_new = vec![0; n];
    for (k, &u) in order.iter().enumerate() {
        old_to_new[u] = k;
    }
    let after = envelope_profile(adj, &old_to_new);
    if after.envelope > before.envelope {
        return Ordering::identity(n, before);
    }
    Ordering {
        new_to_old: order,
        old_to_new,
        before,
        after,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Vec<Vec<usize>> {
        (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < n {
                    v.push(i + 1);
                }
                v
            })
            .collect()
    }

    fn grid(k: usize) -> Vec<Vec<usize>> {
        let id = |i: usize, j: usize| i * k + j;
        let mut adj = vec![Vec::new(); k * k];
        for i in 0..k {
            for j in 0..k {
                if i + 1 < k {
                    adj[id(i, j)].push(id(i + 1, j));
                    adj[id(i + 1, j)].push(id(i, j));
                }
                if j + 1 < k {
                    adj[id(i, j)].push(id(i, j + 1));
                    adj[id(i, j + 1)].push(id(i, j));
                }
            }
        }
        adj
    }

    fn is_permutation(o: &Ordering) -> bool {
        let mut seen = vec![false; o.len()];
        for &u in &o.new_to_old {
            if seen[u] {
                return false;
            }
            seen[u] = true;
        }
        o.new_to_old.iter().enumerate().all(|(k, &u)| o.old_to_new[u] == k)
    }

    #[test]
    fn path_has_bandwidth_one() {
        let o = rcm_order(&path(12));
        assert!(is_permutation(&o));
        assert_eq!(o.after.bandwidth, 1);
    }

    #[test]
    fn grid_5x5_bandwidth_at_most_5() {
        let adj = grid(5);
        let o = rcm_order(&adj);
        assert!(is_permutation(&o));
        assert!(o.after.bandwidth <= 5, "bandwidth {}", o.after.bandwidth);
        assert!(o.after.envelope <= o.before.envelope);
    }

    #[test]
    fn empty_pattern() {
        let o = rcm_order(&[]);
        assert!(o.is_empty());
        assert_eq!(o.after.bandwidth, 0);
        let o = rcm_order(&vec![Vec::new(); 4]);
        assert!(is_permutation(&o));
        assert_eq!(o.after.bandwidth, 0);
    }

    #[test]
    fn disconnected_components() {
        // two paths, interleaved labels
        let mut adj = vec![Vec::new(); 6];
        for (a, b) in [(0, 2), (2, 4), (1, 3), (3, 5)] {
            adj[a].push(b);
            adj[b].push(a);
        }
        let o = rcm_order(&adj);
        assert!(is_permutation(&o));
        assert_eq!(o.after.bandwidth, 1);
    }
}
