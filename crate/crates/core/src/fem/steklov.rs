use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::prelude::*;
use faer::{Par, Side};
use serde::{Deserialize, Serialize};

use super::{dot, FemSystem, Matrix, Spd};
use crate::error::{Error, Result};

/// Boundary size up to which the dense Schur route is used.
pub const DENSE_BOUNDARY_LIMIT: usize = 1200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SteklovMethod {
    /// Dense boundary Schur complement.
    Schur,
    /// Shift-invert subspace iteration on the full pencil.
    Subspace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteklovResult {
    /// `σ₀ ≤ σ₁ ≤ …`
    pub eigenvalues: Vec<f64>,
    /// Boundary traces in loop order, `B`-orthonormal.
    pub eigenvectors: Vec<Vec<f64>>,
    pub method: SteklovMethod,
}

impl SteklovResult {
    pub fn sigma1(&self) -> f64 {
        self.eigenvalues[1]
    }
}

/// Generalized symmetric-definite eigenproblem `S x = λ B x`, ascending,
/// `B`-orthonormal vectors.
fn generalized_eigen(s: &Mat<f64>, b: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = s.nrows();
    let llt = b
        .llt(Side::Lower)
        .map_err(|e| Error::Factorization(format!("boundary mass: {e:?}")))?;
    let l = llt.L();
    // C = L⁻¹ S L⁻ᵀ, built as L⁻¹ (L⁻¹ S)ᵀ since S is symmetric
    let mut w = s.clone();
    solve_lower_triangular_in_place(l, w.as_mut(), Par::Seq);
    let mut c = w.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let evd = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("eigensolver: {e:?}")))?;
    let vals: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
    let mut x = evd.U().to_owned();
    solve_upper_triangular_in_place(l.transpose(), x.as_mut(), Par::Seq);
    Ok((vals, x))
}

/// First `count` Steklov eigenpairs, choosing the route by boundary size.
pub fn steklov_spectrum(sys: &FemSystem, count: usize) -> Result<SteklovResult> {
    let nb = sys.mesh.boundary_edges.len();
    let method = if nb <= DENSE_BOUNDARY_LIMIT {
        SteklovMethod::Schur
    } else {
        SteklovMethod::Subspace
    };
    steklov_spectrum_with(sys, count, method)
}

pub fn steklov_spectrum_with(sys: &FemSystem, count: usize, method: SteklovMethod) -> Result<SteklovResult> {
    if count < 2 {
        return Err(Error::InvalidInput(format!("count must be at least 2, got {count}")));
    }
    let boundary = sys.mesh.boundary_nodes();
    if count > boundary.len() {
        return Err(Error::InvalidInput(format!(
            "count {count} exceeds the {} boundary nodes",
            boundary.len()
        )));
    }
    let (eigenvalues, eigenvectors) = match method {
        SteklovMethod::Schur => schur(sys, &boundary, count)?,
        SteklovMethod::Subspace => subspace(sys, &boundary, count)?,
    };
    Ok(SteklovResult {
        eigenvalues,
        eigenvectors,
        method,
    })
}

fn boundary_mass_dense(sys: &FemSystem, boundary: &[usize]) -> Mat<f64> {
    let nb = boundary.len();
    let mut b = Mat::<f64>::zeros(nb, nb);
    for (p, e) in sys.mesh.boundary_edges.iter().enumerate() {
        let l = sys.mesh.nodes[e[0]].dist(sys.mesh.nodes[e[1]]);
        let q = (p + 1) % nb;
        b[(p, p)] += l / 3.0;
        b[(q, q)] += l / 3.0;
        b[(p, q)] += l / 6.0;
        b[(q, p)] += l / 6.0;
    }
    b
}

type Pairs = (Vec<f64>, Vec<Vec<f64>>);

fn schur(sys: &FemSystem, boundary: &[usize], count: usize) -> Result<Pairs> {
    let (map, interior) = sys.interior_map();
    let nb = boundary.len();
    let mut bpos = vec![usize::MAX; sys.n()];
    for (p, &i) in boundary.iter().enumerate() {
        bpos[i] = p;
    }
    let pat = &sys.pattern;
    let k = &sys.stiffness;
    let mut s = Mat::<f64>::zeros(nb, nb);
    for (q, &j) in boundary.iter().enumerate() {
        for slot in pat.column(j) {
            let i = pat.row_idx[slot];
            if bpos[i] != usize::MAX {
                s[(bpos[i], q)] += k[slot];
            }
        }
    }
    if !interior.is_empty() {
        let a = sys.lower(0.0, Some(&map), interior.len())?;
        let f = Spd::new(&a).map_err(|e| Error::Geometry(format!("mesh quality: interior stiffness {e}")))?;
        let ni = interior.len();
        const BLOCK: usize = 64;
        for start in (0..nb).step_by(BLOCK) {
            let cols = (nb - start).min(BLOCK);
            let mut x = Mat::<f64>::zeros(ni, cols);
            for c in 0..cols {
                let j = boundary[start + c];
                for slot in pat.column(j) {
                    if let Some(r) = map[pat.row_idx[slot]] {
                        x[(r, c)] = k[slot];
                    }
                }
            }
            sys_solve(&f, &mut x);
            // S[:, block] −= K_bi X
            for (p, &bi) in boundary.iter().enumerate() {
                for slot in pat.column(bi) {
                    if let Some(r) = map[pat.row_idx[slot]] {
                        let kv = k[slot];
                        for c in 0..cols {
                            s[(p, start + c)] -= kv * x[(r, c)];
                        }
                    }
                }
            }
        }
    }
    let s = Mat::from_fn(nb, nb, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let b = boundary_mass_dense(sys, boundary);
    let (vals, vecs) = generalized_eigen(&s, &b)?;
    let vectors = (0..count).map(|c| (0..nb).map(|p| vecs[(p, c)]).collect()).collect();
    Ok((vals[..count].iter().map(|v| v.max(0.0)).collect(), vectors))
}

fn sys_solve(f: &Spd, x: &mut Mat<f64>) {
    f.solve_mat(x);
}

/// Shift-invert subspace iteration on `K x = σ B x` with shift `s`,
/// Rayleigh–Ritz on each sweep.
fn subspace(sys: &FemSystem, boundary: &[usize], count: usize) -> Result<Pairs> {
    let n = sys.n();
    let shift = sys.perimeter / (2.0 * sys.area).max(f64::MIN_POSITIVE);
    let a = sys.lower(shift, None, n)?;
    let f = Spd::new(&a).map_err(|e| Error::Geometry(format!("mesh quality: shifted system {e}")))?;
    let p = (2 * count).max(count + 6).min(boundary.len());
    // start from boundary Fourier modes in arc length
    let mut arc = vec![0.0; boundary.len()];
    for (q, e) in sys.mesh.boundary_edges.iter().enumerate().take(boundary.len() - 1) {
        arc[q + 1] = arc[q] + sys.mesh.nodes[e[0]].dist(sys.mesh.nodes[e[1]]);
    }
    let mut x = Mat::<f64>::zeros(n, p);
    for c in 0..p {
        let m = c.div_ceil(2) as f64;
        for (q, &i) in boundary.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * m * arc[q] / sys.perimeter;
            x[(i, c)] = if c % 2 == 0 { th.cos() } else { th.sin() };
        }
    }
    let mut prev = vec![f64::INFINITY; count];
    let mut vals = Vec::new();
    for _ in 0..500 {
        let mut y = Mat::<f64>::zeros(n, p);
        for c in 0..p {
            let col: Vec<f64> = (0..n).map(|i| x[(i, c)]).collect();
            let bx = sys.apply_matrix(Matrix::BoundaryMass, &col);
            for i in 0..n {
                y[(i, c)] = bx[i];
            }
        }
        f.solve_mat(&mut y);
        let cols: Vec<Vec<f64>> = (0..p).map(|c| (0..n).map(|i| y[(i, c)]).collect()).collect();
        let ky: Vec<Vec<f64>> = cols.iter().map(|v| sys.apply_matrix(Matrix::Stiffness, v)).collect();
        let by: Vec<Vec<f64>> = cols.iter().map(|v| sys.apply_matrix(Matrix::BoundaryMass, v)).collect();
        let kp = Mat::from_fn(p, p, |i, j| 0.5 * (dot(&cols[i], &ky[j]) + dot(&cols[j], &ky[i])));
        let bp = Mat::from_fn(p, p, |i, j| 0.5 * (dot(&cols[i], &by[j]) + dot(&cols[j], &by[i])));
        let (v, w) = generalized_eigen(&kp, &bp)?;
        x = &y * &w;
        vals = v;
        let done = (0..count).all(|i| (vals[i] - prev[i]).abs() <= 1e-13 * vals[count - 1].abs().max(1e-300));
        prev.copy_from_slice(&vals[..count]);
        if done {
            let vectors = (0..count)
                .map(|c| boundary.iter().map(|&i| x[(i, c)]).collect())
                .collect();
            return Ok((vals[..count].iter().map(|v| v.max(0.0)).collect(), vectors));
        }
    }
    Err(Error::Factorization(format!(
        "subspace iteration did not converge (last {:?})",
        &vals[..count.min(vals.len())]
    )))
}
