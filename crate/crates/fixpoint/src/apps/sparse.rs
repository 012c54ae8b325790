use sprs::{CsMat, TriMat};

/// A CSR matrix kept together with its transpose so both products are row sweeps.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    fwd: CsMat<f64>,
    adj: CsMat<f64>,
}

impl SparseMatrix {
    /// Duplicate entries are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut tri = TriMat::new((rows, cols));
        for &(i, j, v) in triplets {
            tri.add_triplet(i, j, v);
        }
        let fwd: CsMat<f64> = tri.to_csr();
        let adj = fwd.transpose_view().to_csr();
        SparseMatrix { fwd, adj }
    }

    pub fn rows(&self) -> usize {
        self.fwd.rows()
    }

    pub fn cols(&self) -> usize {
        self.fwd.cols()
    }

    pub fn nnz(&self) -> usize {
        self.fwd.nnz()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        sweep(&self.fwd, x)
    }

    pub fn tr_mul(&self, x: &[f64]) -> Vec<f64> {
        sweep(&self.adj, x)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols()]; self.rows()];
        for (i, row) in self.fwd.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                out[i][j] = v;
            }
        }
        out
    }
}

fn sweep(m: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(m.cols(), x.len(), "sparse product dimension");
    m.outer_iterator()
        .map(|row| row.iter().map(|(j, &v)| v * x[j]).sum())
        .collect()
}
