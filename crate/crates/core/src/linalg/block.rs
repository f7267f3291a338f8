use super::{CsrMatrix, LinalgError, TripletBuilder};

/// Grid of sparse blocks with one right-hand-side segment per field.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    names: Vec<String>,
    sizes: Vec<usize>,
    blocks: Vec<Option<CsrMatrix>>,
    pub rhs: Vec<Vec<f64>>,
}

impl BlockSystem {
    pub fn new<S: Into<String>>(fields: Vec<(S, usize)>) -> BlockSystem {
        let (names, sizes): (Vec<String>, Vec<usize>) =
            fields.into_iter().map(|(n, s)| (n.into(), s)).unzip();
        let k = names.len();
        BlockSystem {
            rhs: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            names,
            sizes,
            blocks: vec![None; k * k],
        }
    }

    pub fn num_fields(&self) -> usize {
        self.names.len()
    }

    pub fn field_names(&self) -> &[String] {
        &self.names
    }

    pub fn field_size(&self, i: usize) -> usize {
        self.sizes[i]
    }

    pub fn field_index(&self, name: &str) -> Result<usize, LinalgError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| LinalgError::UnknownField(name.to_string()))
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for &s in &self.sizes {
            off.push(off.last().unwrap() + s);
        }
        off
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&CsrMatrix> {
        self.blocks[i * self.names.len() + j].as_ref()
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> Option<&mut CsrMatrix> {
        let k = self.names.len();
        self.blocks[i * k + j].as_mut()
    }

    pub fn set_block(&mut self, i: usize, j: usize, m: CsrMatrix) -> Result<(), LinalgError> {
        if m.nrows() != self.sizes[i] || m.ncols() != self.sizes[j] {
            return Err(LinalgError::DimensionMismatch(format!(
                "block ({i},{j}) is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                self.sizes[i],
                self.sizes[j]
            )));
        }
        let k = self.names.len();
        self.blocks[i * k + j] = Some(m);
        Ok(())
    }

    /// Adds `alpha * m` to block (i, j).
    pub fn add_block(&mut self, i: usize, j: usize, alpha: f64, m: &CsrMatrix) -> Result<(), LinalgError> {
        let sum = match self.block(i, j) {
            Some(b) => {
                if (b.nrows(), b.ncols()) != (m.nrows(), m.ncols()) {
                    return Err(LinalgError::DimensionMismatch(format!("block ({i},{j})")));
                }
                b.add(1.0, m, alpha)
            }
            None => m.scale(alpha),
        };
        self.set_block(i, j, sum)
    }

    pub fn set_rhs(&mut self, i: usize, r: Vec<f64>) -> Result<(), LinalgError> {
        if r.len() != self.sizes[i] {
            return Err(LinalgError::DimensionMismatch(format!("rhs segment {i}")));
        }
        self.rhs[i] = r;
        Ok(())
    }

    /// Monolithic matrix in field order.
    pub fn matrix(&self) -> CsrMatrix {
        let off = self.offsets();
        let k = self.names.len();
        let nnz = self.blocks.iter().flatten().map(|b| b.nnz()).sum();
        let mut b = TripletBuilder::with_capacity(self.dim(), self.dim(), nnz);
        for bi in 0..k {
            for bj in 0..k {
                if let Some(m) = self.block(bi, bj) {
                    for (i, j, v) in m.iter() {
                        b.push(off[bi] + i, off[bj] + j, v);
                    }
                }
            }
        }
        b.build()
    }

    pub fn rhs_vector(&self) -> Vec<f64> {
        self.rhs.concat()
    }

    /// Splits a monolithic vector into per-field segments.
    pub fn split(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let off = self.offsets();
        (0..self.names.len()).map(|i| x[off[i]..off[i + 1]].to_vec()).collect()
    }
}
