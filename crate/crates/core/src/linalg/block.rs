use nalgebra::DMatrix;

/// Block compressed-row matrix with uniform dense blocks.
///
/// Row blocks have `rb` rows and column blocks `cb` columns. For DG operators
/// a block row is one element and `rb == cb == n_local`; prolongations map
/// coarse element blocks to fine element blocks and have `rb != cb` when the
/// degree changes. Blocks are stored row-major.
#[derive(Clone, Debug)]
pub struct BlockSparse {
    block_rows: usize,
    block_cols: usize,
    rb: usize,
    cb: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl BlockSparse {
    pub fn identity(n_blocks: usize, bs: usize) -> Self {
        let mut b = BlockSparseBuilder::new(n_blocks, n_blocks, bs, bs);
        let eye = DMatrix::<f64>::identity(bs, bs);
        for i in 0..n_blocks {
            b.add(i, i, &eye);
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.block_rows * self.rb
    }

    pub fn ncols(&self) -> usize {
        self.block_cols * self.cb
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn row_block_size(&self) -> usize {
        self.rb
    }

    pub fn col_block_size(&self) -> usize {
        self.cb
    }

    pub fn nnz_blocks(&self) -> usize {
        self.col_idx.len()
    }

    /// Column block indices present in block row `bi`.
    pub fn row_pattern(&self, bi: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[bi]..self.row_ptr[bi + 1]]
    }

    fn block_size(&self) -> usize {
        self.rb * self.cb
    }

    /// Row-major dense block at `(bi, bj)`, if stored.
    pub fn block(&self, bi: usize, bj: usize) -> Option<&[f64]> {
        let range = self.row_ptr[bi]..self.row_ptr[bi + 1];
        let pos = self.col_idx[range.clone()].binary_search(&bj).ok()?;
        let k = range.start + pos;
        let bs = self.block_size();
        Some(&self.values[k * bs..(k + 1) * bs])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (bi, r) = (i / self.rb, i % self.rb);
        let (bj, c) = (j / self.cb, j % self.cb);
        self.block(bi, bj).map_or(0.0, |b| b[r * self.cb + c])
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols());
        assert_eq!(y.len(), self.nrows());
        let (rb, cb) = (self.rb, self.cb);
        let bs = rb * cb;
        for bi in 0..self.block_rows {
            let out = &mut y[bi * rb..(bi + 1) * rb];
            out.iter_mut().for_each(|v| *v = 0.0);
            for k in self.row_ptr[bi]..self.row_ptr[bi + 1] {
                let bj = self.col_idx[k];
                let xs = &x[bj * cb..(bj + 1) * cb];
                let blk = &self.values[k * bs..(k + 1) * bs];
                for (r, o) in out.iter_mut().enumerate() {
                    let row = &blk[r * cb..(r + 1) * cb];
                    let mut acc = 0.0;
                    for (a, b) in row.iter().zip(xs) {
                        acc += a * b;
                    }
                    *o += acc;
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.mul_vec(x, &mut y);
        y
    }

    /// `y = Aᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows());
        assert_eq!(y.len(), self.ncols());
        let (rb, cb) = (self.rb, self.cb);
        let bs = rb * cb;
        y.iter_mut().for_each(|v| *v = 0.0);
        for bi in 0..self.block_rows {
            let xs = &x[bi * rb..(bi + 1) * rb];
            for k in self.row_ptr[bi]..self.row_ptr[bi + 1] {
                let bj = self.col_idx[k];
                let out = &mut y[bj * cb..(bj + 1) * cb];
                let blk = &self.values[k * bs..(k + 1) * bs];
                for (r, xr) in xs.iter().enumerate() {
                    let row = &blk[r * cb..(r + 1) * cb];
                    for (o, a) in out.iter_mut().zip(row) {
                        *o += a * xr;
                    }
                }
            }
        }
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols()];
        self.tr_mul_vec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> BlockSparse {
        let mut b = BlockSparseBuilder::new(self.block_cols, self.block_rows, self.cb, self.rb);
        let bs = self.block_size();
        for bi in 0..self.block_rows {
            for k in self.row_ptr[bi]..self.row_ptr[bi + 1] {
                let blk = &self.values[k * bs..(k + 1) * bs];
                b.add_with(self.col_idx[k], bi, |r, c| blk[c * self.cb + r]);
            }
        }
        b.build()
    }

    /// Sparse product `self * other` (block Gustavson).
    pub fn matmul(&self, other: &BlockSparse) -> BlockSparse {
        assert_eq!(self.block_cols, other.block_rows, "inner block dimension");
        assert_eq!(self.cb, other.rb, "inner block size");
        let (rb, mid, cb) = (self.rb, self.cb, other.cb);
        let (sa, sb, sc) = (rb * mid, mid * cb, rb * cb);
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut marker = vec![usize::MAX; other.block_cols];
        for bi in 0..self.block_rows {
            let row_start = col_idx.len();
            for ka in self.row_ptr[bi]..self.row_ptr[bi + 1] {
                let bk = self.col_idx[ka];
                let a = &self.values[ka * sa..(ka + 1) * sa];
                for kb in other.row_ptr[bk]..other.row_ptr[bk + 1] {
                    let bj = other.col_idx[kb];
                    let b = &other.values[kb * sb..(kb + 1) * sb];
                    let slot = if marker[bj] == usize::MAX || marker[bj] < row_start {
                        marker[bj] = col_idx.len();
                        col_idx.push(bj);
                        values.extend(std::iter::repeat_n(0.0, sc));
                        marker[bj]
                    } else {
                        marker[bj]
                    };
                    let c = &mut values[slot * sc..(slot + 1) * sc];
                    for r in 0..rb {
                        for m in 0..mid {
                            let arm = a[r * mid + m];
                            if arm == 0.0 {
                                continue;
                            }
                            let brow = &b[m * cb..(m + 1) * cb];
                            let crow = &mut c[r * cb..(r + 1) * cb];
                            for (cv, bv) in crow.iter_mut().zip(brow) {
                                *cv += arm * bv;
                            }
                        }
                    }
                }
            }
            // keep columns sorted within the row
            let n_in_row = col_idx.len() - row_start;
            let mut order: Vec<usize> = (0..n_in_row).collect();
            order.sort_by_key(|&t| col_idx[row_start + t]);
            let cols: Vec<usize> = order.iter().map(|&t| col_idx[row_start + t]).collect();
            let mut vals = Vec::with_capacity(n_in_row * sc);
            for &t in &order {
                let s = (row_start + t) * sc;
                vals.extend_from_slice(&values[s..s + sc]);
            }
            col_idx.truncate(row_start);
            col_idx.extend(cols);
            values.truncate(row_start * sc);
            values.extend(vals);
            row_ptr.push(col_idx.len());
        }
        BlockSparse {
            block_rows: self.block_rows,
            block_cols: other.block_cols,
            rb,
            cb,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `self + alpha * other`, patterns merged.
    pub fn add_scaled(&self, alpha: f64, other: &BlockSparse) -> BlockSparse {
        assert_eq!(self.nrows(), other.nrows());
        assert_eq!(self.ncols(), other.ncols());
        assert_eq!((self.rb, self.cb), (other.rb, other.cb));
        let mut b = BlockSparseBuilder::new(self.block_rows, self.block_cols, self.rb, self.cb);
        let bs = self.block_size();
        for (m, f) in [(self, 1.0), (other, alpha)] {
            for bi in 0..m.block_rows {
                for k in m.row_ptr[bi]..m.row_ptr[bi + 1] {
                    let blk = &m.values[k * bs..(k + 1) * bs];
                    b.add_with(bi, m.col_idx[k], |r, c| f * blk[r * m.cb + c]);
                }
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows(), self.ncols());
        let bs = self.block_size();
        for bi in 0..self.block_rows {
            for k in self.row_ptr[bi]..self.row_ptr[bi + 1] {
                let bj = self.col_idx[k];
                let blk = &self.values[k * bs..(k + 1) * bs];
                for r in 0..self.rb {
                    for c in 0..self.cb {
                        d[(bi * self.rb + r, bj * self.cb + c)] = blk[r * self.cb + c];
                    }
                }
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|` over stored entries.
    pub fn symmetry_defect(&self) -> f64 {
        assert_eq!(self.nrows(), self.ncols());
        let mut worst = 0.0f64;
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - self.get(j, i)).abs());
        }
        worst
    }

    /// All stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let bs = self.block_size();
        (0..self.block_rows).flat_map(move |bi| {
            (self.row_ptr[bi]..self.row_ptr[bi + 1]).flat_map(move |k| {
                let bj = self.col_idx[k];
                (0..bs).map(move |t| {
                    let (r, c) = (t / self.cb, t % self.cb);
                    (bi * self.rb + r, bj * self.cb + c, self.values[k * bs + t])
                })
            })
        })
    }

    /// Diagonal entries (square matrices).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows().min(self.ncols())).map(|i| self.get(i, i)).collect()
    }
}

/// Accumulating builder for [`BlockSparse`].
pub struct BlockSparseBuilder {
    block_rows: usize,
    block_cols: usize,
    rb: usize,
    cb: usize,
    rows: Vec<Vec<(usize, Vec<f64>)>>,
}

impl BlockSparseBuilder {
    pub fn new(block_rows: usize, block_cols: usize, rb: usize, cb: usize) -> Self {
        Self {
            block_rows,
            block_cols,
            rb,
            cb,
            rows: vec![Vec::new(); block_rows],
        }
    }

    fn slot(&mut self, bi: usize, bj: usize) -> &mut Vec<f64> {
        assert!(bi < self.block_rows && bj < self.block_cols, "block index out of range");
        let bs = self.rb * self.cb;
        let row = &mut self.rows[bi];
        let pos = match row.iter().position(|(c, _)| *c == bj) {
            Some(p) => p,
            None => {
                row.push((bj, vec![0.0; bs]));
                row.len() - 1
            }
        };
        &mut row[pos].1
    }

    /// Accumulate `f(r, c)` into block `(bi, bj)`.
    pub fn add_with(&mut self, bi: usize, bj: usize, f: impl Fn(usize, usize) -> f64) {
        let cb = self.cb;
        let rb = self.rb;
        let blk = self.slot(bi, bj);
        for r in 0..rb {
            for c in 0..cb {
                blk[r * cb + c] += f(r, c);
            }
        }
    }

    pub fn add(&mut self, bi: usize, bj: usize, m: &DMatrix<f64>) {
        assert_eq!((m.nrows(), m.ncols()), (self.rb, self.cb));
        self.add_with(bi, bj, |r, c| m[(r, c)]);
    }

    pub fn build(self) -> BlockSparse {
        let mut row_ptr = Vec::with_capacity(self.block_rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut row in self.rows {
            row.sort_by_key(|(c, _)| *c);
            for (c, v) in row {
                col_idx.push(c);
                values.extend(v);
            }
            row_ptr.push(col_idx.len());
        }
        BlockSparse {
            block_rows: self.block_rows,
            block_cols: self.block_cols,
            rb: self.rb,
            cb: self.cb,
            row_ptr,
            col_idx,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rb: usize, cb: usize, rows: usize, cols: usize, seed: u64) -> BlockSparse {
        let mut b = BlockSparseBuilder::new(rows, cols, rb, cb);
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as f64) / (1u64 << 31) as f64 - 0.5
        };
        for i in 0..rows {
            for j in 0..cols {
                if (i + 2 * j) % 3 != 1 {
                    let vals: Vec<f64> = (0..rb * cb).map(|_| next()).collect();
                    b.add_with(i, j, |r, c| vals[r * cb + c]);
                }
            }
        }
        b.build()
    }

    #[test]
    fn matvec_matches_dense() {
        let a = sample(2, 3, 4, 3, 7);
        let x: Vec<f64> = (0..a.ncols()).map(|i| i as f64 * 0.3 - 1.0).collect();
        let y = a.apply(&x);
        let yd = a.to_dense() * nalgebra::DVector::from_vec(x.clone());
        for (u, v) in y.iter().zip(yd.iter()) {
            assert!((u - v).abs() < 1e-14);
        }
        let z: Vec<f64> = (0..a.nrows()).map(|i| (i as f64).sin()).collect();
        let w = a.apply_transpose(&z);
        let wd = a.to_dense().transpose() * nalgebra::DVector::from_vec(z);
        for (u, v) in w.iter().zip(wd.iter()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn matmul_and_transpose_match_dense() {
        let a = sample(2, 3, 4, 3, 1);
        let b = sample(3, 2, 3, 5, 2);
        let c = a.matmul(&b);
        let cd = a.to_dense() * b.to_dense();
        assert!((c.to_dense() - cd).amax() < 1e-13);
        assert!((a.transpose().to_dense() - a.to_dense().transpose()).amax() == 0.0);
    }

    #[test]
    fn add_scaled_merges_patterns() {
        let a = sample(2, 2, 3, 3, 3);
        let b = sample(2, 2, 3, 3, 4);
        let c = a.add_scaled(-2.0, &b);
        let cd = a.to_dense() - b.to_dense() * 2.0;
        assert!((c.to_dense() - cd).amax() < 1e-14);
    }

    #[test]
    fn builder_accumulates() {
        let mut b = BlockSparseBuilder::new(1, 1, 1, 1);
        b.add_with(0, 0, |_, _| 1.5);
        b.add_with(0, 0, |_, _| 2.0);
        assert_eq!(b.build().get(0, 0), 3.5);
    }
}
