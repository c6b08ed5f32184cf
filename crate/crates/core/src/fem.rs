//! Piecewise-linear finite elements on a uniform mesh of (0, 1).
//!
//! Functions in `V_h` are represented either by nodal values at the interior
//! nodes or by coordinates in the generalized eigenbasis `S psi = mu M psi`,
//! normalized so that `Psi^T M Psi = I`. In eigen-coordinates the discrete
//! Laplacian is diagonal and the coordinate l2 norm is the L2 norm.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{check_len, Error, Result};
use crate::field::Field;
use crate::linalg::{dot, Tridiagonal};

/// Uniform mesh with `n_interior` interior nodes `x_i = i h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    n_interior: usize,
    h: f64,
}

impl Mesh1D {
    pub fn new(n_interior: usize) -> Result<Self> {
        if n_interior == 0 {
            return Err(Error::config("finite element mesh", "need at least one interior node"));
        }
        Ok(Mesh1D {
            n_interior,
            h: 1.0 / (n_interior + 1) as f64,
        })
    }

    /// Mesh of width `h`; `1/h` must be an integer >= 2.
    pub fn from_width(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::config("finite element mesh", format!("mesh width {h} outside (0,1)")));
        }
        let cells = (1.0 / h).round();
        if ((cells * h) - 1.0).abs() > 1e-12 {
            return Err(Error::config(
                "finite element mesh",
                format!("1/h must be an integer, got h = {h}"),
            ));
        }
        Mesh1D::new(cells as usize - 1)
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn cells(&self) -> usize {
        self.n_interior + 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }
}

/// Generalized eigenpairs of `(S, M)`; `vectors` holds `psi_k` as columns.
#[derive(Debug, Clone)]
pub struct FemEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct FemOperators {
    pub mesh: Mesh1D,
    pub mass: Tridiagonal,
    pub stiffness: Tridiagonal,
    eigen: Option<FemEigen>,
}

/// Exact hat-function integrals: `S = tridiag(-1, 2, -1)/h`, `M = h tridiag(1, 4, 1)/6`.
pub fn assemble(mesh: &Mesh1D) -> FemOperators {
    let n = mesh.n_interior();
    let h = mesh.h();
    FemOperators {
        mesh: *mesh,
        mass: Tridiagonal::constant(n, 2.0 * h / 3.0, h / 6.0),
        stiffness: Tridiagonal::constant(n, 2.0 / h, -1.0 / h),
        eigen: None,
    }
}

/// Dense symmetric-definite generalized eigensolve via the Cholesky factor of `M`.
pub fn decompose(mut ops: FemOperators) -> Result<FemOperators> {
    let n = ops.mass.len();
    let m = ops.mass.to_dense();
    let s = ops.stiffness.to_dense();
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Eigen("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    // C = L^{-1} S L^{-T}
    let linv_s = l
        .solve_lower_triangular(&s)
        .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&linv_s.transpose())
        .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let y = eig.eigenvectors;
    let psi = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::Eigen("back substitution failed".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if values.iter().any(|&mu| !(mu > 0.0 && mu.is_finite())) {
        return Err(Error::Eigen("non-positive generalized eigenvalue".into()));
    }
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = psi.column(src).clone_owned();
        // sign convention: sum_i psi_i sin(k pi x_i) > 0, matching the sine mode
        let k = (dst + 1) as f64;
        let align: f64 = (0..n)
            .map(|i| col[i] * (k * PI * ops.mesh.node(i + 1)).sin())
            .sum();
        if align < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    ops.eigen = Some(FemEigen { values, vectors });
    Ok(ops)
}

/// `mu_k = (6 / h^2) (1 - cos(k pi h)) / (2 + cos(k pi h))` on a uniform mesh.
pub fn closed_form_eigenvalue(mesh: &Mesh1D, k: usize) -> f64 {
    let h = mesh.h();
    let c = (k as f64 * PI * h).cos();
    6.0 / (h * h) * (1.0 - c) / (2.0 + c)
}

/// `b_i = int sqrt(2) sin(j pi x) phi_i(x) dx`
/// `    = sqrt(2) sin(j pi x_i) 2 (1 - cos(j pi h)) / ((j pi)^2 h)`.
pub fn sine_load_vector(mesh: &Mesh1D, j: usize) -> Vec<f64> {
    let h = mesh.h();
    let k = j as f64 * PI;
    // 1 - cos(kh) = 2 sin^2(kh/2)
    let factor = SQRT_2 * 4.0 * (0.5 * k * h).sin().powi(2) / (k * k * h);
    (1..=mesh.n_interior())
        .map(|i| factor * (k * mesh.node(i)).sin())
        .collect()
}

impl FemOperators {
    pub fn is_decomposed(&self) -> bool {
        self.eigen.is_some()
    }

    pub fn eigen(&self) -> Result<&FemEigen> {
        self.eigen
            .as_ref()
            .ok_or_else(|| Error::Eigen("operators not decomposed".into()))
    }

    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// Nodal values of `P_h e_j`, solving `M c = b` with the closed-form load vector.
    pub fn project_sine_mode(&self, j: usize) -> Result<Field> {
        if j == 0 {
            return Err(Error::config("projection", "sine modes are numbered from 1"));
        }
        let b = sine_load_vector(&self.mesh, j);
        Field::new(self.mass.solve(&b))
    }

    /// Eigen-coordinates `a = Psi^T M f` of a nodal field.
    pub fn to_eigen_coords(&self, nodal: &Field) -> Result<Field> {
        check_len(self.dim(), nodal.len())?;
        let e = self.eigen()?;
        let mut mf = vec![0.0; self.dim()];
        self.mass.apply(nodal.coeffs(), &mut mf);
        let a = e.vectors.tr_mul(&nalgebra::DVector::from_vec(mf));
        Field::new(a.as_slice().to_vec())
    }

    /// Nodal values `Psi a`.
    pub fn from_eigen_coords(&self, coords: &Field) -> Result<Field> {
        check_len(self.dim(), coords.len())?;
        let e = self.eigen()?;
        let f = &e.vectors * nalgebra::DVector::from_column_slice(coords.coeffs());
        Field::new(f.as_slice().to_vec())
    }

    /// `phi(Lambda_h) f = Psi phi(mu) Psi^T M f` on nodal values.
    pub fn apply_fem_function<F: Fn(f64) -> f64>(&self, f: &Field, phi: F) -> Result<Field> {
        let mut a = self.to_eigen_coords(f)?;
        for (c, &mu) in a.coeffs_mut().iter_mut().zip(&self.eigen()?.values) {
            let w = phi(mu);
            if !w.is_finite() {
                return Err(Error::NonFinite("spectral function value"));
            }
            *c *= w;
        }
        self.from_eigen_coords(&a)
    }

    /// Discrete norm of order `alpha` in {-1, 0, 1} of a nodal field.
    pub fn fem_norm(&self, f: &Field, alpha: i32) -> Result<f64> {
        check_len(self.dim(), f.len())?;
        match alpha {
            0 => Ok(self.mass.quadratic_form(f.coeffs()).max(0.0).sqrt()),
            1 => Ok(self.stiffness.quadratic_form(f.coeffs()).max(0.0).sqrt()),
            -1 => {
                let a = self.to_eigen_coords(f)?;
                Ok(crate::spectral::weighted_norm(a.coeffs(), &self.eigen()?.values, -1.0))
            }
            other => Err(Error::UnsupportedNorm(other)),
        }
    }

    /// L2 projection onto this mesh of a piecewise-linear function given by
    /// nodal values on a nested finer mesh (`fine.cells()` a multiple of `cells()`).
    pub fn project_nested(&self, fine: &Mesh1D, nodal: &Field) -> Result<Field> {
        check_len(fine.n_interior(), nodal.len())?;
        let coarse = self.mesh;
        if !fine.cells().is_multiple_of(coarse.cells()) {
            return Err(Error::config(
                "nested meshes",
                format!("{} fine cells do not refine {} coarse cells", fine.cells(), coarse.cells()),
            ));
        }
        let ratio = fine.cells() / coarse.cells();
        let value = |i: usize| {
            if i == 0 || i == fine.cells() {
                0.0
            } else {
                nodal.coeffs()[i - 1]
            }
        };
        let (g1, g2) = (0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt());
        let mut b = vec![0.0; coarse.n_interior()];
        for e in 0..fine.cells() {
            let (x0, hf) = (fine.node(e), fine.h());
            let (u0, u1) = (value(e), value(e + 1));
            let c = e / ratio;
            let xc = coarse.node(c);
            for t in [g1, g2] {
                let x = x0 + t * hf;
                let u = u0 + t * (u1 - u0);
                let s = (x - xc) / coarse.h();
                let w = 0.5 * hf * u;
                // hat at coarse node c decreases, hat at c+1 increases
                if c >= 1 {
                    b[c - 1] += w * (1.0 - s);
                }
                if c < coarse.n_interior() {
                    b[c] += w * s;
                }
            }
        }
        Field::new(self.mass.solve(&b))
    }

    /// Nodal values on a nested finer mesh of the piecewise-linear function
    /// with nodal values `nodal` on this mesh. Exact: the coarse space is a
    /// subspace of the fine one.
    pub fn prolong_nested(&self, fine: &Mesh1D, nodal: &Field) -> Result<Field> {
        check_len(self.dim(), nodal.len())?;
        let coarse = self.mesh;
        if !fine.cells().is_multiple_of(coarse.cells()) {
            return Err(Error::config(
                "nested meshes",
                format!("{} fine cells do not refine {} coarse cells", fine.cells(), coarse.cells()),
            ));
        }
        let ratio = fine.cells() / coarse.cells();
        let value = |i: usize| {
            if i == 0 || i == coarse.cells() {
                0.0
            } else {
                nodal.coeffs()[i - 1]
            }
        };
        let out = (1..fine.cells())
            .map(|i| {
                let (c, r) = (i / ratio, i % ratio);
                let t = r as f64 / ratio as f64;
                if r == 0 {
                    value(c)
                } else {
                    (1.0 - t) * value(c) + t * value(c + 1)
                }
            })
            .collect();
        Field::new(out)
    }
}

const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// FEM realization of the discrete space, working in eigen-coordinates.
///
/// The grid used for nonlinear terms is the three-point Gauss rule on every
/// cell; it integrates the AVF cubic of a piecewise-linear function against a
/// hat function (degree 4) and the quartic potential exactly.
#[derive(Debug, Clone)]
pub struct FemSpace {
    ops: FemOperators,
    /// `Psi` row-major (`n x n`): nodal = Psi a.
    psi: Vec<f64>,
    /// `Psi^T` row-major.
    psi_t: Vec<f64>,
    noise_modes: usize,
    /// `Psi^T B` row-major (`n x noise_modes`), `B` the sine load vectors.
    noise_map: Vec<f64>,
}

impl FemSpace {
    pub fn new(mesh: Mesh1D, noise_modes: usize) -> Result<Self> {
        let ops = decompose(assemble(&mesh))?;
        let n = ops.dim();
        let vecs = &ops.eigen()?.vectors;
        let mut psi = vec![0.0; n * n];
        let mut psi_t = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                psi[i * n + k] = vecs[(i, k)];
                psi_t[k * n + i] = vecs[(i, k)];
            }
        }
        let mut noise_map = vec![0.0; n * noise_modes];
        for j in 0..noise_modes {
            let b = sine_load_vector(&mesh, j + 1);
            for k in 0..n {
                noise_map[k * noise_modes + j] = dot(&psi_t[k * n..(k + 1) * n], &b);
            }
        }
        Ok(FemSpace {
            ops,
            psi,
            psi_t,
            noise_modes,
            noise_map,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.ops.mesh
    }

    pub fn operators(&self) -> &FemOperators {
        &self.ops
    }

    pub fn noise_modes(&self) -> usize {
        self.noise_modes
    }

    pub(crate) fn nodal_into(&self, coords: &[f64], nodal: &mut [f64]) {
        crate::linalg::matvec(&self.psi, self.ops.dim(), coords, nodal);
    }

    /// Eigen-coordinates of `P_h e_j`.
    pub fn sine_mode_coords(&self, j: usize) -> Result<Field> {
        let nodal = self.ops.project_sine_mode(j)?;
        self.ops.to_eigen_coords(&nodal)
    }

    /// Eigen-coordinates on `self` of the L2 projection of a field given in
    /// eigen-coordinates on the nested finer space `fine`.
    pub fn transfer_from(&self, fine: &FemSpace, coords: &Field) -> Result<Field> {
        let nodal = fine.ops.from_eigen_coords(coords)?;
        let coarse = self.ops.project_nested(fine.mesh(), &nodal)?;
        self.ops.to_eigen_coords(&coarse)
    }

    /// Eigen-coordinates on the nested finer space `fine` of a field given
    /// in eigen-coordinates on `self`.
    pub fn embed_into(&self, fine: &FemSpace, coords: &Field) -> Result<Field> {
        let nodal = self.ops.from_eigen_coords(coords)?;
        let fine_nodal = self.ops.prolong_nested(fine.mesh(), &nodal)?;
        fine.ops.to_eigen_coords(&fine_nodal)
    }

    pub(crate) fn grid_len_impl(&self) -> usize {
        3 * self.ops.mesh.cells()
    }

    pub(crate) fn to_grid(&self, coords: &[f64], grid: &mut [f64]) {
        let n = self.ops.dim();
        let mut nodal = vec![0.0; n];
        self.nodal_into(coords, &mut nodal);
        let value = |i: usize| if i == 0 || i == n + 1 { 0.0 } else { nodal[i - 1] };
        for e in 0..=n {
            let (u0, u1) = (value(e), value(e + 1));
            for (q, &(t, _)) in GAUSS3.iter().enumerate() {
                grid[3 * e + q] = u0 + t * (u1 - u0);
            }
        }
    }

    pub(crate) fn project_grid(&self, grid: &[f64], coords: &mut [f64]) {
        let n = self.ops.dim();
        let h = self.ops.mesh.h();
        let mut b = vec![0.0; n];
        for e in 0..=n {
            let (mut left, mut right) = (0.0, 0.0);
            for (q, &(t, w)) in GAUSS3.iter().enumerate() {
                let g = w * h * grid[3 * e + q];
                left += g * (1.0 - t);
                right += g * t;
            }
            // cell e spans nodes e and e+1; interior node i sits at index i-1
            if e >= 1 {
                b[e - 1] += left;
            }
            if e < n {
                b[e] += right;
            }
        }
        crate::linalg::matvec(&self.psi_t, n, &b, coords);
    }

    pub(crate) fn integrate_grid(&self, grid: &[f64]) -> f64 {
        let h = self.ops.mesh.h();
        grid.chunks_exact(3)
            .map(|c| GAUSS3.iter().zip(c).map(|(&(_, w), g)| w * g).sum::<f64>())
            .sum::<f64>()
            * h
    }

    pub(crate) fn project_noise_impl(&self, increments: &[f64], out: &mut [f64]) {
        let used = increments.len().min(self.noise_modes);
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.noise_map[k * self.noise_modes..k * self.noise_modes + used];
            *o = dot(row, &increments[..used]);
        }
    }

    pub(crate) fn noise_trace_impl(&self, q: &[f64]) -> f64 {
        let used = q.len().min(self.noise_modes);
        let n = self.ops.dim();
        (0..used)
            .map(|j| {
                let col: f64 = (0..n).map(|k| self.noise_map[k * self.noise_modes + j].powi(2)).sum();
                q[j] * col
            })
            .fold(0.0, |a, b| a + b)
    }
}
