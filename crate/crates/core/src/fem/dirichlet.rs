use super::FemError;
use crate::linalg::{BlockSystem, CsrMatrix, TripletBuilder};
use crate::mesh::TetMesh;

/// Boolean mask of the vertices lying on facets with `marker`.
pub fn marker_mask(mesh: &TetMesh, marker: u8) -> Result<Vec<bool>, FemError> {
    let mut mask = vec![false; mesh.num_vertices()];
    for v in mesh.boundary_vertices(marker)? {
        mask[v] = true;
    }
    Ok(mask)
}

/// Symmetric elimination of the dofs in `mask` with prescribed `values`:
/// the columns are moved to the right-hand side, the rows and columns are
/// cleared and a unit diagonal is inserted. Applying it twice is a no-op.
pub fn apply_dirichlet_matrix(a: &CsrMatrix, rhs: &mut [f64], mask: &[bool], values: &[f64]) -> CsrMatrix {
    let mut b = TripletBuilder::with_capacity(a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.iter() {
        if mask[i] {
            continue;
        }
        if mask[j] {
            rhs[i] -= v * values[j];
        } else {
            b.push(i, j, v);
        }
    }
    for (i, &m) in mask.iter().enumerate() {
        if m {
            b.push(i, i, 1.0);
            rhs[i] = values[i];
        }
    }
    b.build()
}

/// Block version of [`apply_dirichlet_matrix`] acting on field `field`.
pub fn apply_dirichlet(system: &mut BlockSystem, field: usize, mask: &[bool], values: &[f64]) -> Result<(), FemError> {
    let n = system.field_size(field);
    if mask.len() != n || values.len() != n {
        return Err(FemError::Invalid(format!("dirichlet data has wrong length for field {field}")));
    }
    for k in 0..system.num_fields() {
        if k == field {
            let a = system.block(k, k).cloned().unwrap_or_else(|| CsrMatrix::zeros(n, n));
            let mut rhs = std::mem::take(&mut system.rhs[k]);
            let a = apply_dirichlet_matrix(&a, &mut rhs, mask, values);
            system.rhs[k] = rhs;
            system.set_block(k, k, a)?;
            continue;
        }
        if let Some(col) = system.block(k, field).cloned() {
            let mut b = TripletBuilder::with_capacity(col.nrows(), col.ncols(), col.nnz());
            for (i, j, v) in col.iter() {
                if mask[j] {
                    system.rhs[k][i] -= v * values[j];
                } else {
                    b.push(i, j, v);
                }
            }
            system.set_block(k, field, b.build())?;
        }
        if let Some(row) = system.block_mut(field, k) {
            row.zero_rows(mask);
            row.drop_zeros();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idempotent_and_symmetric() {
        let a = CsrMatrix::from_dense(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ]);
        let mask = [true, false, false];
        let vals = [1.0, 0.0, 0.0];
        let mut rhs = vec![0.0; 3];
        let a1 = apply_dirichlet_matrix(&a, &mut rhs, &mask, &vals);
        assert!(a1.is_symmetric(0.0));
        assert_eq!(rhs, vec![1.0, 1.0, 0.0]);
        let mut rhs2 = rhs.clone();
        let a2 = apply_dirichlet_matrix(&a1, &mut rhs2, &mask, &vals);
        assert_eq!(a1, a2);
        assert_eq!(rhs, rhs2);
    }

    #[test]
    fn block_elimination_matches_monolithic() {
        let mut sys = BlockSystem::new(vec![("a", 2), ("b", 1)]);
        sys.set_block(0, 0, CsrMatrix::from_dense(&[vec![3.0, 1.0], vec![1.0, 3.0]])).unwrap();
        sys.set_block(0, 1, CsrMatrix::from_dense(&[vec![-1.0], vec![0.5]])).unwrap();
        sys.set_block(1, 0, CsrMatrix::from_dense(&[vec![-1.0, 0.5]])).unwrap();
        sys.set_block(1, 1, CsrMatrix::from_dense(&[vec![2.0]])).unwrap();
        sys.rhs = vec![vec![1.0, 2.0], vec![3.0]];
        let mut mono_rhs = sys.rhs_vector();
        let mono = apply_dirichlet_matrix(&sys.matrix(), &mut mono_rhs, &[false, true, false], &[0.0, 4.0, 0.0]);
        apply_dirichlet(&mut sys, 0, &[false, true], &[0.0, 4.0]).unwrap();
        assert_eq!(sys.matrix().to_dense(), mono.to_dense());
        assert_eq!(sys.rhs_vector(), mono_rhs);
    }
}
