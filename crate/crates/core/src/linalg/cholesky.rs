use std::collections::VecDeque;

use super::BlockSparse;
use crate::{Error, Result};

/// Envelope (skyline) Cholesky factorization `P A Pᵀ = L Lᵀ` of a symmetric
/// positive definite block-sparse matrix.
///
/// The permutation is a reverse Cuthill–McKee ordering of the block graph,
/// expanded to scalar unknowns block by block. Element-block matrices from
/// structured meshes then have a narrow envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &BlockSparse) -> Result<Self> {
        if a.nrows() != a.ncols() || a.row_block_size() != a.col_block_size() {
            return Err(Error::invalid("Cholesky needs a square matrix with square blocks"));
        }
        let n = a.nrows();
        let bs = a.row_block_size();
        let block_order = reverse_cuthill_mckee(a);
        let mut perm = Vec::with_capacity(n);
        for &b in &block_order {
            perm.extend(b * bs..(b + 1) * bs);
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pj < pi {
                first[pi] = first[pi].min(pj);
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; offset[n]];
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pj <= pi {
                values[offset[pi] + pj - first[pi]] = v;
            }
        }

        for i in 0..n {
            let fi = first[i];
            let oi = offset[i];
            for j in fi..i {
                let fj = first[j];
                let oj = offset[j];
                let k0 = fi.max(fj);
                let mut s = values[oi + j - fi];
                let (ri, rj) = (&values[oi + k0 - fi..oi + j - fi], &values[oj + k0 - fj..oj + j - fj]);
                for (x, y) in ri.iter().zip(rj) {
                    s -= x * y;
                }
                let ljj = values[oj + j - fj];
                values[oi + j - fi] = s / ljj;
            }
            let row = &values[oi..oi + i - fi];
            let d = values[oi + i - fi] - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::numerical(format!(
                    "matrix not positive definite (pivot {d:e} at row {i})"
                )));
            }
            values[oi + i - fi] = d.sqrt();
        }
        Ok(Self {
            n,
            perm,
            first,
            offset,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let oi = self.offset[i];
            let row = &self.values[oi..oi + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / self.values[oi + i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let oi = self.offset[i];
            y[i] /= self.values[oi + i - fi];
            let xi = y[i];
            for (yj, l) in y[fi..i].iter_mut().zip(&self.values[oi..oi + i - fi]) {
                *yj -= l * xi;
            }
        }
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

fn reverse_cuthill_mckee(a: &BlockSparse) -> Vec<usize> {
    let nb = a.block_rows();
    let adj: Vec<Vec<usize>> = (0..nb)
        .map(|i| a.row_pattern(i).iter().copied().filter(|&j| j != i).collect())
        .collect();
    let mut visited = vec![false; nb];
    let mut order = Vec::with_capacity(nb);
    while order.len() < nb {
        let seed = (0..nb)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| adj[i].len())
            .expect("unvisited block");
        // pseudo-peripheral start: last node of a BFS from the seed
        let start = *bfs(&adj, seed, &visited).last().unwrap_or(&seed);
        let component = bfs(&adj, start, &visited);
        for &v in &component {
            visited[v] = true;
        }
        order.extend(component);
    }
    order.reverse();
    order
}

fn bfs(adj: &[Vec<usize>], start: usize, blocked: &[bool]) -> Vec<usize> {
    let mut seen = blocked.to_vec();
    let mut out = vec![start];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
        nbrs.sort_by_key(|&w| adj[w].len());
        for w in nbrs {
            seen[w] = true;
            out.push(w);
            queue.push_back(w);
        }
    }
    out
}
