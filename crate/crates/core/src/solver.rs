//! Linear solvers for symmetric positive definite sparse systems.
//!
//! The default is a profile (skyline) Cholesky factorization on a reverse
//! Cuthill-McKee ordering. A Jacobi-preconditioned conjugate gradient solver
//! is available for large systems.

use std::collections::VecDeque;

use nalgebra::DVector;

use crate::assembly::{CsrMatrix, GlobalSystem};
use crate::error::{Error, Result};

/// Pivots below this fraction of the original diagonal entry are counted as
/// null-space directions.
const PIVOT_TOL: f64 = 1e-11;
/// Accepted relative residual ‖K u − F‖ / ‖F‖.
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const CG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Direct,
    ConjugateGradient,
}

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(k: &CsrMatrix) -> Vec<usize> {
    let n = k.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| k.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| {
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            out.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    };

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: last node of a BFS from the seed
        let mut probe_seen = visited.clone();
        let mut probe = Vec::new();
        bfs(seed, &mut probe_seen, &mut probe);
        let start = *probe.last().unwrap_or(&seed);
        bfs(start, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Lower-triangular profile Cholesky factor of a permuted matrix.
struct SkylineCholesky {
    perm: Vec<usize>,
    /// first[i]: first column stored in row i.
    first: Vec<usize>,
    /// row_start[i]: offset of row i in `values`; row i stores columns first[i]..=i.
    row_start: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineCholesky {
    fn factor(k: &CsrMatrix) -> std::result::Result<Self, (usize, String)> {
        let n = k.nrows();
        let perm = reverse_cuthill_mckee(k);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in k.row(old) {
                let jn = inv[j];
                if jn < first[new] {
                    first[new] = jn;
                }
            }
        }
        let mut row_start = vec![0usize; n + 1];
        for i in 0..n {
            row_start[i + 1] = row_start[i] + (i - first[i] + 1);
        }
        let mut values = vec![0.0; row_start[n]];
        let mut diag = vec![0.0; n];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in k.row(old) {
                let jn = inv[j];
                if jn <= new {
                    values[row_start[new] + jn - first[new]] = v;
                }
                if jn == new {
                    diag[new] = v;
                }
            }
        }

        let mut singular = 0usize;
        let mut indefinite = false;
        for i in 0..n {
            let fi = first[i];
            let ri = row_start[i];
            for j in fi..i {
                let fj = first[j];
                let rj = row_start[j];
                let k0 = fi.max(fj);
                let mut s = values[ri + j - fi];
                for kk in k0..j {
                    s -= values[ri + kk - fi] * values[rj + kk - fj];
                }
                values[ri + j - fi] = s / values[rj + j - fj];
            }
            let mut d = values[ri + i - fi];
            for kk in fi..i {
                let l = values[ri + kk - fi];
                d -= l * l;
            }
            let scale = diag[i].abs().max(f64::MIN_POSITIVE);
            if !(d > PIVOT_TOL * scale) {
                if d < -PIVOT_TOL * scale {
                    indefinite = true;
                }
                singular += 1;
                // decouple the row and keep going to estimate the nullity
                for kk in fi..i {
                    values[ri + kk - fi] = 0.0;
                }
                values[ri + i - fi] = 1.0;
            } else {
                values[ri + i - fi] = d.sqrt();
            }
        }
        if singular > 0 {
            let what = if indefinite { "indefinite" } else { "singular" };
            return Err((singular, format!("matrix is {what}: {singular} non-positive pivot(s)")));
        }
        Ok(SkylineCholesky {
            perm,
            first,
            row_start,
            values,
        })
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        // forward: L y = b
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.row_start[i];
            let mut s = y[i];
            for kk in fi..i {
                s -= self.values[ri + kk - fi] * y[kk];
            }
            y[i] = s / self.values[ri + i - fi];
        }
        // backward: Lᵀ x = y, column-oriented over the row storage
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.row_start[i];
            y[i] /= self.values[ri + i - fi];
            let xi = y[i];
            for kk in fi..i {
                y[kk] -= self.values[ri + kk - fi] * xi;
            }
        }
        let mut x = DVector::zeros(n);
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

fn relative_residual(k: &CsrMatrix, u: &DVector<f64>, f: &DVector<f64>) -> f64 {
    let r = k.mul_vec(u) - f;
    let fnorm = f.norm();
    if fnorm == 0.0 {
        r.norm()
    } else {
        r.norm() / fnorm
    }
}

/// Solves K u = F with the default direct solver.
pub fn solve(system: &GlobalSystem) -> Result<DVector<f64>> {
    solve_with(system, SolverKind::Direct)
}

pub fn solve_with(system: &GlobalSystem, kind: SolverKind) -> Result<DVector<f64>> {
    let n = system.k.nrows();
    if system.f.len() != n {
        return Err(Error::DimensionError {
            expected: n,
            got: system.f.len(),
        });
    }
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let u = match kind {
        SolverKind::Direct => {
            let chol = SkylineCholesky::factor(&system.k).map_err(|(nullity, reason)| {
                Error::SolveFailure {
                    null_space_estimate: nullity,
                    reason,
                }
            })?;
            chol.solve(&system.f)
        }
        SolverKind::ConjugateGradient => conjugate_gradient(&system.k, &system.f, CG_TOL, 20 * n + 100)?,
    };
    let res = relative_residual(&system.k, &u, &system.f);
    if !(res <= RESIDUAL_TOL) {
        return Err(Error::SolveFailure {
            null_space_estimate: 0,
            reason: format!("relative residual {res:e} exceeds {RESIDUAL_TOL:e}"),
        });
    }
    Ok(u)
}

/// Jacobi-preconditioned conjugate gradients.
pub fn conjugate_gradient(
    k: &CsrMatrix,
    f: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>> {
    let n = k.nrows();
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = k.get(i, i);
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let precond = |r: &DVector<f64>| DVector::from_iterator(n, r.iter().zip(&inv_diag).map(|(a, b)| a * b));
    let fnorm = f.norm();
    let mut u = DVector::zeros(n);
    if fnorm == 0.0 {
        return Ok(u);
    }
    let mut r = f.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for _ in 0..max_iter {
        let kp = k.mul_vec(&p);
        let pkp = p.dot(&kp);
        if !(pkp > 0.0) {
            return Err(Error::SolveFailure {
                null_space_estimate: 1,
                reason: "conjugate gradient met a non-positive curvature direction".into(),
            });
        }
        let alpha = rz / pkp;
        u.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &kp, 1.0);
        if r.norm() <= tol * fnorm {
            return Ok(u);
        }
        z = precond(&r);
        let rz_new = r.dot(&z);
        p = &z + &p * (rz_new / rz);
        rz = rz_new;
    }
    Err(Error::SolveFailure {
        null_space_estimate: 0,
        reason: format!("conjugate gradient did not converge in {max_iter} iterations"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn identity_system() {
        let sys = GlobalSystem {
            k: CsrMatrix::from_dense(&DMatrix::identity(3, 3)),
            f: DVector::from_vec(vec![1.0, 0.0, 0.0]),
        };
        assert_eq!(solve(&sys).unwrap(), DVector::from_vec(vec![1.0, 0.0, 0.0]));
    }

    #[test]
    fn direct_and_cg_agree() {
        let k = laplacian_1d(50);
        let f = DVector::from_fn(50, |i, _| (i as f64).sin());
        let sys = GlobalSystem { k, f };
        let a = solve(&sys).unwrap();
        let b = solve_with(&sys, SolverKind::ConjugateGradient).unwrap();
        assert!((a - b).amax() < 1e-8);
    }

    #[test]
    fn rcm_is_a_permutation() {
        let k = laplacian_1d(17);
        let mut p = reverse_cuthill_mckee(&k);
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn singular_matrix_reports_nullity() {
        // free-free chain has one constant mode
        let mut t = Vec::new();
        for i in 0..9 {
            t.push((i, i, 1.0));
            t.push((i + 1, i + 1, 1.0));
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
        let sys = GlobalSystem {
            k: CsrMatrix::from_triplets(10, &t),
            f: DVector::zeros(10),
        };
        match solve(&sys) {
            Err(Error::SolveFailure {
                null_space_estimate, ..
            }) => assert_eq!(null_space_estimate, 1),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
