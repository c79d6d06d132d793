//! P1 finite elements on convex polygons: Robin and Dirichlet torsion, the
//! Steklov spectrum, and refinement-based error budgets.

mod budget;
mod mesh;
mod steklov;

use std::sync::Arc;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::lblt::factor::LbltParams;
use faer::prelude::*;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Par, Side, Spec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;

pub use budget::{error_budget, refinement_systems, ErrorBudget, Extrapolation};
pub use mesh::{triangulate, TriangleMesh, MAX_NODES};
pub use steklov::{steklov_spectrum, steklov_spectrum_with, SteklovMethod, SteklovResult, DENSE_BOUNDARY_LIMIT};

/// Symmetric sparsity pattern, both triangles stored, rows sorted.
#[derive(Debug, Clone, PartialEq)]
struct Pattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl Pattern {
    fn from_triangles(n: usize, triangles: &[[usize; 3]]) -> Self {
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in triangles {
            for &i in t {
                for &j in t {
                    cols[j].push(i);
                }
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for c in &mut cols {
            c.sort_unstable();
            c.dedup();
            row_idx.extend_from_slice(c);
            col_ptr.push(row_idx.len());
        }
        Pattern { n, col_ptr, row_idx }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        lo + self.row_idx[lo..hi]
            .binary_search(&i)
            .expect("entry outside the mesh pattern")
    }

    fn column(&self, j: usize) -> std::ops::Range<usize> {
        self.col_ptr[j]..self.col_ptr[j + 1]
    }
}

/// Assembled P1 system. Matrices share one pattern and are stored as value
/// arrays over it.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub mesh: Arc<TriangleMesh>,
    pattern: Arc<Pattern>,
    pub stiffness: Vec<f64>,
    pub boundary_mass: Vec<f64>,
    pub mass: Vec<f64>,
    pub load: Vec<f64>,
    pub area: f64,
    pub perimeter: f64,
}

/// Exact element integrals: stiffness from constant gradients, consistent
/// mass `A/12 (1 + δᵢⱼ)`, load `A/3`, boundary mass `L/6 [2 1; 1 2]`.
pub fn assemble(mesh: &TriangleMesh) -> Result<FemSystem> {
    let n = mesh.n_nodes();
    let pattern = Pattern::from_triangles(n, &mesh.triangles);
    let nnz = pattern.row_idx.len();
    let mut k = vec![0.0; nnz];
    let mut m = vec![0.0; nnz];
    let mut bm = vec![0.0; nnz];
    let mut load = vec![0.0; n];
    let mut area = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.nodes[i]);
        let a = mesh.triangle_area(t);
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::DegenerateTriangle { index: t, area: a });
        }
        area += a;
        // ∇φᵢ = (y_{i+1} − y_{i+2}, x_{i+2} − x_{i+1}) / 2A
        let g: [(f64, f64); 3] = std::array::from_fn(|i| {
            let (q, r) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            (q.y - r.y, r.x - q.x)
        });
        for i in 0..3 {
            load[tri[i]] += a / 3.0;
            for j in 0..3 {
                let s = pattern.slot(tri[i], tri[j]);
                k[s] += (g[i].0 * g[j].0 + g[i].1 * g[j].1) / (4.0 * a);
                m[s] += a / 12.0 * if i == j { 2.0 } else { 1.0 };
            }
        }
    }
    let mut perimeter = 0.0;
    for e in &mesh.boundary_edges {
        let l = mesh.nodes[e[0]].dist(mesh.nodes[e[1]]);
        perimeter += l;
        for (i, j, w) in [(0, 0, 2.0), (1, 1, 2.0), (0, 1, 1.0), (1, 0, 1.0)] {
            bm[pattern.slot(e[i], e[j])] += w * l / 6.0;
        }
    }
    Ok(FemSystem {
        mesh: Arc::new(mesh.clone()),
        pattern: Arc::new(pattern),
        stiffness: k,
        boundary_mass: bm,
        mass: m,
        load,
        area,
        perimeter,
    })
}

/// Meshes and assembles in one step.
pub fn discretize(poly: &ConvexPolygon, target_h: f64) -> Result<FemSystem> {
    assemble(&triangulate(poly, target_h)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Matrix {
    Stiffness,
    BoundaryMass,
    Mass,
}

impl FemSystem {
    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn values(&self, which: Matrix) -> &[f64] {
        match which {
            Matrix::Stiffness => &self.stiffness,
            Matrix::BoundaryMass => &self.boundary_mass,
            Matrix::Mass => &self.mass,
        }
    }

    /// `y = (K + αB) x`.
    pub fn apply(&self, alpha: f64, x: &[f64]) -> Vec<f64> {
        let p = &self.pattern;
        let mut y = vec![0.0; p.n];
        for (j, &xj) in x.iter().enumerate().take(p.n) {
            for s in p.column(j) {
                y[p.row_idx[s]] += (self.stiffness[s] + alpha * self.boundary_mass[s]) * xj;
            }
        }
        y
    }

    pub fn apply_matrix(&self, which: Matrix, x: &[f64]) -> Vec<f64> {
        let p = &self.pattern;
        let v = self.values(which);
        let mut y = vec![0.0; p.n];
        for (j, &xj) in x.iter().enumerate().take(p.n) {
            for s in p.column(j) {
                y[p.row_idx[s]] += v[s] * xj;
            }
        }
        y
    }

    pub fn quadratic(&self, which: Matrix, x: &[f64]) -> f64 {
        dot(x, &self.apply_matrix(which, x))
    }

    /// Largest absolute asymmetry over all three matrices.
    pub fn asymmetry(&self) -> f64 {
        let p = &self.pattern;
        let mut worst: f64 = 0.0;
        for j in 0..p.n {
            for s in p.column(j) {
                let t = p.slot(j, p.row_idx[s]);
                for v in [&self.stiffness, &self.boundary_mass, &self.mass] {
                    worst = worst.max((v[s] - v[t]).abs());
                }
            }
        }
        worst
    }

    /// Lower triangle of `K + αB` restricted to `keep` (by new index).
    fn lower(&self, alpha: f64, map: Option<&[Option<usize>]>, size: usize) -> Result<SparseColMat<usize, f64>> {
        let p = &self.pattern;
        let mut trip = Vec::new();
        for j in 0..p.n {
            let cj = match map {
                Some(m) => match m[j] {
                    Some(c) => c,
                    None => continue,
                },
                None => j,
            };
            for s in p.column(j) {
                let i = p.row_idx[s];
                let ri = match map {
                    Some(m) => match m[i] {
                        Some(r) => r,
                        None => continue,
                    },
                    None => i,
                };
                if ri >= cj {
                    trip.push(Triplet::new(ri, cj, self.stiffness[s] + alpha * self.boundary_mass[s]));
                }
            }
        }
        SparseColMat::try_new_from_triplets(size, size, &trip).map_err(|e| Error::Factorization(format!("{e:?}")))
    }

    fn interior_map(&self) -> (Vec<Option<usize>>, Vec<usize>) {
        let mut on_boundary = vec![false; self.n()];
        for e in &self.mesh.boundary_edges {
            on_boundary[e[0]] = true;
        }
        let mut map = vec![None; self.n()];
        let mut interior = Vec::new();
        for i in 0..self.n() {
            if !on_boundary[i] {
                map[i] = Some(interior.len());
                interior.push(i);
            }
        }
        (map, interior)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Symmetric-indefinite sparse factorization (supernodal Bunch–Kaufman).
pub(crate) struct Lblt {
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
    subdiag: Vec<f64>,
    fwd: Vec<usize>,
    bwd: Vec<usize>,
}

impl Lblt {
    pub(crate) fn new(a: &SparseColMat<usize, f64>) -> Result<Self> {
        let symbolic = factorize_symbolic_cholesky(
            a.symbolic(),
            Side::Lower,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams {
                supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
                ..Default::default()
            },
        )
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let n = a.nrows();
        let mut values = vec![0.0; symbolic.len_val()];
        let mut subdiag = vec![0.0; n];
        let mut fwd = vec![0usize; n];
        let mut bwd = vec![0usize; n];
        let params: Spec<LbltParams, f64> = Default::default();
        let mut mem = MemBuffer::new(symbolic.factorize_numeric_intranode_lblt_scratch::<f64>(Par::Seq, params));
        symbolic.factorize_numeric_intranode_lblt(
            &mut values,
            &mut subdiag,
            &mut fwd,
            &mut bwd,
            a.as_ref(),
            Side::Lower,
            Par::Seq,
            MemStack::new(&mut mem),
            params,
        );
        if values.iter().chain(&subdiag).any(|v| !v.is_finite()) {
            return Err(Error::Factorization("non-finite factor entries".into()));
        }
        Ok(Lblt {
            symbolic,
            values,
            subdiag,
            fwd,
            bwd,
        })
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        use faer::sparse::linalg::cholesky::IntranodeLbltRef;
        let perm = faer::perm::PermRef::new_checked(&self.fwd, &self.bwd, self.fwd.len());
        let f = IntranodeLbltRef::new(&self.symbolic, &self.values, &self.subdiag, perm);
        let mut x = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        f.solve_in_place_with_conj(Conj::No, x.as_mut(), Par::Seq, MemStack::new(&mut mem));
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }
}

/// Sparse symmetric positive-definite factorization.
pub(crate) struct Spd(faer::sparse::linalg::solvers::Llt<usize, f64>);

impl Spd {
    pub(crate) fn new(a: &SparseColMat<usize, f64>) -> Result<Self> {
        a.sp_cholesky(Side::Lower)
            .map(Spd)
            .map_err(|e| Error::Factorization(format!("{e:?}")))
    }

    pub(crate) fn solve_mat(&self, rhs: &mut Mat<f64>) {
        self.0.solve_in_place(rhs.as_mut());
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.solve_mat(&mut x);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Nodal values.
    pub u: Vec<f64>,
    /// `bᵀu`
    pub tau: f64,
    /// `|uᵀAu − bᵀu| / |τ|`, i.e. the discrete energy identity defect.
    pub energy_residual: f64,
    /// `‖b − Au‖∞ / ‖b‖∞` after refinement.
    pub residual: f64,
    /// Smallest eigenvalue magnitude of the system matrix (inverse iteration).
    pub min_eigenvalue: f64,
    /// `‖A‖∞ / |λ|min`
    pub condition_estimate: f64,
    pub n_nodes: usize,
    pub h: f64,
}

/// Ratio `|λ|min / ‖A‖∞` below which the Robin system is treated as
/// resonant.
pub const RESONANCE_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinOptions<'a> {
    /// Known discrete Steklov values to screen against.
    pub steklov: Option<&'a SteklovResult>,
    /// Required relative gap `|α + σⱼ| / max(σⱼ, |α|)`.
    pub margin: f64,
}

impl Default for RobinOptions<'_> {
    fn default() -> Self {
        RobinOptions {
            steklov: None,
            margin: 1e-6,
        }
    }
}

fn matrix_norm_inf(sys: &FemSystem, alpha: f64, map: Option<&[Option<usize>]>) -> f64 {
    let p = &sys.pattern;
    let mut rows = vec![0.0; p.n];
    for j in 0..p.n {
        if map.is_some_and(|m| m[j].is_none()) {
            continue;
        }
        for s in p.column(j) {
            let i = p.row_idx[s];
            if map.is_some_and(|m| m[i].is_none()) {
                continue;
            }
            rows[i] += (sys.stiffness[s] + alpha * sys.boundary_mass[s]).abs();
        }
    }
    norm_inf(&rows)
}

/// Smallest |eigenvalue| by inverse iteration through `solve`.
fn inverse_iteration(n: usize, apply: impl Fn(&[f64]) -> Vec<f64>, solve: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i as f64) * 0.618_033_988_749_895).fract())
        .collect();
    let mut lam = f64::INFINITY;
    for _ in 0..12 {
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let y = solve(&x);
        let ny = dot(&y, &y).sqrt();
        if !(ny.is_finite()) || ny == 0.0 {
            return 0.0;
        }
        x = y.into_iter().map(|v| v / ny).collect();
        let ax = apply(&x);
        lam = dot(&x, &ax).abs().min(dot(&ax, &ax).sqrt());
    }
    lam
}

fn nearest_steklov(sys: &FemSystem, alpha: f64, given: Option<&SteklovResult>) -> f64 {
    let pick = |s: &SteklovResult| {
        s.eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| (a + alpha).abs().total_cmp(&(b + alpha).abs()))
            .unwrap_or(f64::NAN)
    };
    if let Some(s) = given {
        return pick(s);
    }
    match steklov_spectrum(sys, 12) {
        Ok(s) => pick(&s),
        Err(_) => f64::NAN,
    }
}

/// Solves `(K + αB) u = b` with a symmetric-indefinite factorization and
/// two steps of iterative refinement.
pub fn solve_robin_torsion(sys: &FemSystem, alpha: f64) -> Result<SolveResult> {
    solve_robin_torsion_with(sys, alpha, RobinOptions::default())
}

pub fn solve_robin_torsion_with(sys: &FemSystem, alpha: f64, opts: RobinOptions<'_>) -> Result<SolveResult> {
    if alpha == 0.0 {
        return Err(Error::NeumannCase);
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("alpha must be finite, got {alpha}")));
    }
    if alpha < 0.0 {
        if let Some(s) = opts.steklov {
            for &sig in &s.eigenvalues {
                if (alpha + sig).abs() <= opts.margin * sig.max(alpha.abs()) {
                    return Err(Error::Resonance { alpha, nearest: sig });
                }
            }
        }
    }
    let a = sys.lower(alpha, None, sys.n())?;
    let resonance = || Error::Resonance {
        alpha,
        nearest: nearest_steklov(sys, alpha, opts.steklov),
    };
    let f = match Lblt::new(&a) {
        Ok(f) => f,
        Err(_) => return Err(resonance()),
    };
    let b = &sys.load;
    let mut u = f.solve(b);
    for _ in 0..2 {
        let au = sys.apply(alpha, &u);
        let r: Vec<f64> = b.iter().zip(&au).map(|(x, y)| x - y).collect();
        let du = f.solve(&r);
        u.iter_mut().zip(&du).for_each(|(x, d)| *x += d);
    }
    let au = sys.apply(alpha, &u);
    let residual = b.iter().zip(&au).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / norm_inf(b);
    let norm = matrix_norm_inf(sys, alpha, None);
    let min_eig = inverse_iteration(sys.n(), |x| sys.apply(alpha, x), |x| f.solve(x));
    if !(min_eig > RESONANCE_RATIO * norm) || !residual.is_finite() || residual > 1e-6 {
        return Err(resonance());
    }
    let tau = dot(b, &u);
    let delta = dot(&u, &au);
    Ok(SolveResult {
        energy_residual: (delta - tau).abs() / tau.abs(),
        tau,
        residual,
        min_eigenvalue: min_eig,
        condition_estimate: norm / min_eig,
        n_nodes: sys.n(),
        h: sys.mesh.h,
        u,
    })
}

/// Homogeneous Dirichlet torsion: boundary nodes eliminated, interior
/// system solved by sparse Cholesky.
pub fn solve_dirichlet_torsion(sys: &FemSystem) -> Result<SolveResult> {
    let (map, interior) = sys.interior_map();
    if interior.is_empty() {
        return Err(Error::EmptyInterior(sys.mesh.target_h));
    }
    let a = sys.lower(0.0, Some(&map), interior.len())?;
    let f = Spd::new(&a)?;
    let bi: Vec<f64> = interior.iter().map(|&i| sys.load[i]).collect();
    let mut ui = f.solve(&bi);
    let apply_i = |x: &[f64]| {
        let mut full = vec![0.0; sys.n()];
        for (k, &i) in interior.iter().enumerate() {
            full[i] = x[k];
        }
        let y = sys.apply_matrix(Matrix::Stiffness, &full);
        interior.iter().map(|&i| y[i]).collect::<Vec<_>>()
    };
    let r: Vec<f64> = bi.iter().zip(apply_i(&ui)).map(|(x, y)| x - y).collect();
    let du = f.solve(&r);
    ui.iter_mut().zip(&du).for_each(|(x, d)| *x += d);
    let au = apply_i(&ui);
    let residual = bi.iter().zip(&au).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / norm_inf(&bi);
    let norm = matrix_norm_inf(sys, 0.0, Some(&map));
    let min_eig = inverse_iteration(interior.len(), apply_i, |x| f.solve(x));
    let tau = dot(&bi, &ui);
    let delta = dot(&ui, &au);
    let mut u = vec![0.0; sys.n()];
    for (k, &i) in interior.iter().enumerate() {
        u[i] = ui[k];
    }
    Ok(SolveResult {
        energy_residual: (delta - tau).abs() / tau.abs(),
        tau,
        residual,
        min_eigenvalue: min_eig,
        condition_estimate: norm / min_eig,
        n_nodes: sys.n(),
        h: sys.mesh.h,
        u,
    })
}
