use std::io::{self, Write};

use rayon::prelude::*;

use super::LinalgError;

/// Compressed sparse row matrix with sorted, unique column indices per row
/// and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Coordinate-format accumulator. Duplicates are summed in insertion order,
/// so the finished matrix depends only on the order of pushes.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> TripletBuilder {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> TripletBuilder {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i, j, v));
    }

    pub fn extend(&mut self, other: Vec<(usize, usize, f64)>) {
        self.entries.extend(other);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let mut k = 0;
        let n = self.entries.len();
        while k < n {
            let (i, j, mut v) = self.entries[k];
            k += 1;
            while k < n && self.entries[k].0 == i && self.entries[k].1 == j {
                v += self.entries[k].2;
                k += 1;
            }
            if v != 0.0 {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> CsrMatrix {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> CsrMatrix {
        CsrMatrix::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> CsrMatrix {
        let mut b = TripletBuilder::with_capacity(d.len(), d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            b.push(i, i, v);
        }
        b.build()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> CsrMatrix {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut b = TripletBuilder::new(rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                b.push(i, j, v);
            }
        }
        b.build()
    }

    /// Builds from raw parts, validating the structural invariants.
    pub fn from_parts(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<CsrMatrix, LinalgError> {
        let bad = |m: &str| Err(LinalgError::InvalidStructure(m.to_string()));
        if row_ptr.len() != nrows + 1 || row_ptr[0] != 0 || *row_ptr.last().unwrap() != col_idx.len() {
            return bad("row pointer inconsistent");
        }
        if col_idx.len() != values.len() {
            return bad("column and value arrays differ in length");
        }
        for i in 0..nrows {
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= ncols) {
                return bad("column indices unsorted, duplicated or out of range");
            }
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            d[i][j] = v;
        }
        d
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let row = |i: usize| -> f64 {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            s
        };
        if self.nnz() > 200_000 {
            y.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
                for (o, yi) in chunk.iter_mut().enumerate() {
                    *yi = row(c * 4096 + o);
                }
            });
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row(i);
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let mut next = count.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                col_idx[next[j]] = i;
                values[next[j]] = self.values[k];
                next[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: count,
            col_idx,
            values,
        }
    }

    /// `alpha * self + beta * other`.
    pub fn add(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        row_ptr.push(0);
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let (j, v) = if q == cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                    p += 1;
                    (ca[p - 1], alpha * va[p - 1])
                } else if p == ca.len() || cb[q] < ca[p] {
                    q += 1;
                    (cb[q - 1], beta * vb[q - 1])
                } else {
                    p += 1;
                    q += 1;
                    (ca[p - 1], alpha * va[p - 1] + beta * vb[q - 1])
                };
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn scale(&self, alpha: f64) -> CsrMatrix {
        if alpha == 0.0 {
            return CsrMatrix::zeros(self.nrows, self.ncols);
        }
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= alpha);
        m
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut acc = vec![0.0; other.ncols];
        let mut used = vec![false; other.ncols];
        let mut pattern = Vec::new();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&j, &b) in cb.iter().zip(vb) {
                    if !used[j] {
                        used[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                if acc[j] != 0.0 {
                    col_idx.push(j);
                    values.push(acc[j]);
                }
                acc[j] = 0.0;
                used[j] = false;
            }
            pattern.clear();
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `D_left * self * D_right` for diagonal scalings given as vectors.
    pub fn scale_rows_cols(&self, left: Option<&[f64]>, right: Option<&[f64]>) -> CsrMatrix {
        let mut m = self.clone();
        for i in 0..m.nrows {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                let l = left.map_or(1.0, |d| d[i]);
                let r = right.map_or(1.0, |d| d[m.col_idx[k]]);
                m.values[k] *= l * r;
            }
        }
        m.drop_zeros();
        m
    }

    pub fn drop_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut w = 0;
        let mut start = 0;
        for i in 0..self.nrows {
            let end = self.row_ptr[i + 1];
            for k in start..end {
                if self.values[k] != 0.0 {
                    self.col_idx[w] = self.col_idx[k];
                    self.values[w] = self.values[k];
                    w += 1;
                }
            }
            start = end;
            self.row_ptr[i + 1] = w;
        }
        self.col_idx.truncate(w);
        self.values.truncate(w);
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Sum of all entries.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let t = self.transpose();
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        let diff = self.add(1.0, &t, -1.0);
        diff.values.iter().all(|v| v.abs() <= tol * scale)
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    /// Zeroes the listed rows in place (structure kept until `drop_zeros`).
    pub fn zero_rows(&mut self, rows: &[bool]) {
        for i in 0..self.nrows {
            if rows[i] {
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    self.values[k] = 0.0;
                }
            }
        }
    }

    /// Matrix Market style dump: a header line with the shape and entry
    /// count, then one `row col value` line per entry (0-based).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "% indices are 0-based")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }
}

/// Assembles a matrix from per-chunk triplet lists produced in parallel.
/// Chunks are concatenated in index order, so the result is independent of
/// the number of worker threads.
pub fn assemble_parallel<F>(nrows: usize, ncols: usize, n_items: usize, chunk: usize, f: F) -> CsrMatrix
where
    F: Fn(usize, &mut Vec<(usize, usize, f64)>) + Sync,
{
    let chunks: Vec<Vec<(usize, usize, f64)>> = (0..n_items.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::new();
            for item in c * chunk..((c + 1) * chunk).min(n_items) {
                f(item, &mut out);
            }
            out
        })
        .collect();
    let total = chunks.iter().map(|c| c.len()).sum();
    let mut b = TripletBuilder::with_capacity(nrows, ncols, total);
    for c in chunks {
        b.extend(c);
    }
    b.build()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(1, 0, 2.0);
        b.push(0, 1, 1.0);
        b.push(1, 0, -2.0);
        b.push(0, 0, 3.0);
        b.push(0, 1, 0.5);
        let m = b.build();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 1.5);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.row(0).0, &[0, 1]);
    }

    #[test]
    fn products_and_transpose() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
        let at = a.transpose();
        assert_eq!(at.to_dense(), vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 3.0]]);
        let ata = at.matmul(&a);
        assert_eq!(ata.get(0, 1), 2.0);
        assert_eq!(ata.get(2, 2), 9.0);
        assert!(ata.is_symmetric(0.0));
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 3.0]);
        let s = a.add(2.0, &a, -2.0);
        assert_eq!(s.nnz(), 0);
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("2 3 3") && text.contains("1 2 3.0"));
    }

    #[test]
    fn parallel_assembly_is_deterministic() {
        let f = |i: usize, out: &mut Vec<(usize, usize, f64)>| {
            out.push((i % 7, (i * 3) % 7, 1.0 / (i as f64 + 1.0)));
        };
        let a = assemble_parallel(7, 7, 1000, 13, f);
        let b = assemble_parallel(7, 7, 1000, 13, f);
        assert_eq!(a, b);
        let mut s = TripletBuilder::new(7, 7);
        let mut out = Vec::new();
        for i in 0..1000 {
            f(i, &mut out);
        }
        s.extend(out);
        assert_eq!(s.build(), a);
    }
}
