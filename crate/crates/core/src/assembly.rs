//! Degree-of-freedom numbering, sparse global assembly and elimination of
//! prescribed degrees of freedom.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::mesher::Mesh;

/// Node-major numbering: node n, component c -> n * n_components + c.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    num_nodes: usize,
    n_components: usize,
}

impl DofMap {
    pub fn new(num_nodes: usize, n_components: usize) -> Self {
        assert!(n_components == 1 || n_components == 2);
        DofMap {
            num_nodes,
            n_components,
        }
    }

    pub fn index(&self, node: usize, component: usize) -> usize {
        node * self.n_components + component
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn total_dofs(&self) -> usize {
        self.num_nodes * self.n_components
    }

    /// Global indices of an element's local vector, in local order.
    pub fn element_dofs(&self, polygon: &Polygon) -> Vec<usize> {
        polygon
            .nodes()
            .iter()
            .flat_map(|&n| (0..self.n_components).map(move |c| self.index(n, c)))
            .collect()
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries in insertion order, so the result only depends
    /// on the order of `triplets`.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable: equal (row, col) keep insertion order
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &t in &order {
            let (r, c, v) = triplets[t];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.n, (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub k: CsrMatrix,
    pub f: DVector<f64>,
}

/// Scatters element matrices and vectors into the global system.
///
/// Element contributions are computed in parallel; scatter happens in
/// element-index order, so the result is bitwise independent of threading.
pub fn assemble<KS, FS>(
    mesh: &Mesh,
    dofs: &DofMap,
    stiffness: KS,
    force: FS,
) -> Result<GlobalSystem>
where
    KS: Fn(usize) -> Result<DMatrix<f64>> + Sync,
    FS: Fn(usize) -> Result<DVector<f64>> + Sync,
{
    let locals: Vec<Result<(DMatrix<f64>, DVector<f64>)>> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let k = stiffness(e).map_err(|err| err.in_element(e))?;
            let f = force(e).map_err(|err| err.in_element(e))?;
            Ok((k, f))
        })
        .collect();
    let n = dofs.total_dofs();
    let mut triplets = Vec::new();
    let mut f = DVector::zeros(n);
    for (e, local) in locals.into_iter().enumerate() {
        let (ke, fe) = local?;
        let map = dofs.element_dofs(&mesh.elements()[e]);
        if ke.nrows() != map.len() || ke.ncols() != map.len() || fe.len() != map.len() {
            return Err(Error::DimensionError {
                expected: map.len(),
                got: ke.nrows(),
            }
            .in_element(e));
        }
        for (a, &ga) in map.iter().enumerate() {
            f[ga] += fe[a];
            for (b, &gb) in map.iter().enumerate() {
                triplets.push((ga, gb, ke[(a, b)]));
            }
        }
    }
    Ok(GlobalSystem {
        k: CsrMatrix::from_triplets(n, &triplets),
        f,
    })
}

/// A system with prescribed dofs eliminated, plus what is needed to rebuild
/// the full solution vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub system: GlobalSystem,
    /// Global index of every retained dof, ascending.
    pub free: Vec<usize>,
    /// Full-length vector holding prescribed values (zero on free dofs).
    pub prescribed: DVector<f64>,
}

impl ReducedSystem {
    /// Reinserts prescribed values around the reduced solution.
    pub fn recover(&self, reduced: &DVector<f64>) -> DVector<f64> {
        let mut u = self.prescribed.clone();
        for (k, &g) in self.free.iter().enumerate() {
            u[g] = reduced[k];
        }
        u
    }
}

/// Symmetric elimination: rows and columns of prescribed dofs are removed and
/// the right-hand side is shifted by −K[:, c] g_c.
pub fn impose_essential(system: &GlobalSystem, essential: &[(usize, f64)]) -> Result<ReducedSystem> {
    let n = system.k.nrows();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for &(dof, v) in essential {
        if dof >= n {
            return Err(Error::InvalidInput(format!(
                "prescribed dof {dof} out of range (have {n})"
            )));
        }
        match fixed[dof] {
            Some(old) if old != v => {
                return Err(Error::ConstraintConflict {
                    dof,
                    first: old,
                    second: v,
                })
            }
            _ => fixed[dof] = Some(v),
        }
    }
    let mut prescribed = DVector::zeros(n);
    let mut new_index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for i in 0..n {
        match fixed[i] {
            Some(v) => prescribed[i] = v,
            None => {
                new_index[i] = free.len();
                free.push(i);
            }
        }
    }
    let m = free.len();
    let mut triplets = Vec::new();
    let mut f = DVector::zeros(m);
    for (ri, &i) in free.iter().enumerate() {
        let mut rhs = system.f[i];
        for (j, v) in system.k.row(i) {
            if fixed[j].is_some() {
                rhs -= v * prescribed[j];
            } else {
                triplets.push((ri, new_index[j], v));
            }
        }
        f[ri] = rhs;
    }
    Ok(ReducedSystem {
        system: GlobalSystem {
            k: CsrMatrix::from_triplets(m, &triplets),
            f,
        },
        free,
        prescribed,
    })
}
