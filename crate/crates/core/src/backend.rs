//! Common interface of the two spatial discretizations.
//!
//! Both backends work in coordinates that diagonalize the discrete Laplacian
//! and are orthonormal in L2, so the time stepper only needs the eigenvalues,
//! a way to evaluate nonlinear terms, and the projection of the noise.

use crate::fem::FemSpace;
use crate::field::Field;
use crate::nonlinearity::CubicDrift;
use crate::spectral::SpectralBasis;

pub trait Galerkin: Send + Sync {
    /// Dimension of the discrete space.
    fn dim(&self) -> usize;

    /// Eigenvalues of the discrete Laplacian, ascending.
    fn eigenvalues(&self) -> &[f64];

    /// Number of evaluation points used for nonlinear terms.
    fn grid_len(&self) -> usize;

    /// Evaluate a field (given by coordinates) on the evaluation grid.
    fn synthesize_into(&self, coords: &[f64], grid: &mut [f64]);

    /// Coordinates of `P_h g` for a function `g` given on the evaluation grid.
    fn project_into(&self, grid: &[f64], coords: &mut [f64]);

    /// Coordinates of `P_h avf(a, b)` for fields given on the grid; `scratch`
    /// has grid length. Backends whose plain projection is not exact for every
    /// part of the AVF field override this.
    fn project_avf_into(&self, drift: &CubicDrift, a: &[f64], b: &[f64], scratch: &mut [f64], coords: &mut [f64]) {
        drift.avf_into(a, b, scratch);
        self.project_into(scratch, coords);
    }

    /// `int_0^1 F(u) dx`.
    fn potential_integral(&self, coords: &[f64], drift: &CubicDrift) -> f64;

    /// Coordinates of `P_h dW` for increments given in the sine basis
    /// (`dW = sum_j increments[j] e_{j+1}`).
    fn project_noise_into(&self, increments: &[f64], coords: &mut [f64]);

    /// `Tr(P_h Q P_h)` for the diagonal covariance `Q e_j = q_j e_j`.
    fn noise_trace(&self, q: &[f64]) -> f64;

    /// Characteristic mesh parameter `h`.
    fn h(&self) -> f64;

    fn project_noise(&self, increments: &[f64]) -> Field {
        let mut out = vec![0.0; self.dim()];
        self.project_noise_into(increments, &mut out);
        Field::from_vec_unchecked(out)
    }
}

impl Galerkin for SpectralBasis {
    fn dim(&self) -> usize {
        self.modes()
    }

    fn eigenvalues(&self) -> &[f64] {
        self.lambdas()
    }

    fn grid_len(&self) -> usize {
        self.nodes()
    }

    fn synthesize_into(&self, coords: &[f64], grid: &mut [f64]) {
        SpectralBasis::synthesize_into(self, coords, grid)
    }

    fn project_into(&self, grid: &[f64], coords: &mut [f64]) {
        self.analyze_into(grid, coords)
    }

    // The node rule is exact for the odd part (a3, a1 terms) against e_j, but
    // the even part (a2, a0 terms) times e_j is a sine polynomial and needs the
    // odd-frequency weights. Both parts share one transform.
    fn project_avf_into(&self, drift: &CubicDrift, a: &[f64], b: &[f64], scratch: &mut [f64], coords: &mut [f64]) {
        if drift.a2 == 0.0 && drift.a0 == 0.0 {
            drift.avf_into(a, b, scratch);
        } else {
            let scale = self.even_projection_scale();
            for (m, o) in scratch.iter_mut().enumerate() {
                let (x, y) = (a[m], b[m]);
                let odd = 0.25 * drift.a3 * (x * x + y * y) * (x + y) + 0.5 * drift.a1 * (x + y);
                let even = drift.a2 / 3.0 * (x * x + x * y + y * y) + drift.a0;
                *o = odd + scale[m] * even;
            }
        }
        self.analyze_into(scratch, coords)
    }

    fn potential_integral(&self, coords: &[f64], drift: &CubicDrift) -> f64 {
        let mut u = vec![0.0; self.nodes()];
        SpectralBasis::synthesize_into(self, coords, &mut u);
        // u^2, u^4 are cosine polynomials vanishing at the boundary; u, u^3 are
        // sine polynomials of degree <= 3J. Each part gets its exact rule.
        let even: Vec<f64> = u
            .iter()
            .map(|&x| {
                let x2 = x * x;
                (0.25 * drift.a3 * x2 + 0.5 * drift.a1) * x2
            })
            .collect();
        let odd: Vec<f64> = u
            .iter()
            .map(|&x| (drift.a2 / 3.0 * x * x + drift.a0) * x)
            .collect();
        self.integrate_split(&even, &odd)
    }

    fn project_noise_into(&self, increments: &[f64], coords: &mut [f64]) {
        let used = increments.len().min(coords.len());
        coords[..used].copy_from_slice(&increments[..used]);
        coords[used..].fill(0.0);
    }

    fn noise_trace(&self, q: &[f64]) -> f64 {
        q.iter().take(self.modes()).fold(0.0, |a, b| a + b)
    }

    fn h(&self) -> f64 {
        SpectralBasis::h(self)
    }
}

impl Galerkin for FemSpace {
    fn dim(&self) -> usize {
        self.operators().dim()
    }

    fn eigenvalues(&self) -> &[f64] {
        // decomposition always exists for a constructed FemSpace
        &self
            .operators()
            .eigen()
            .expect("FemSpace is built from decomposed operators")
            .values
    }

    fn grid_len(&self) -> usize {
        self.grid_len_impl()
    }

    fn synthesize_into(&self, coords: &[f64], grid: &mut [f64]) {
        self.to_grid(coords, grid)
    }

    fn project_into(&self, grid: &[f64], coords: &mut [f64]) {
        self.project_grid(grid, coords)
    }

    fn potential_integral(&self, coords: &[f64], drift: &CubicDrift) -> f64 {
        let mut u = vec![0.0; self.grid_len_impl()];
        self.to_grid(coords, &mut u);
        for x in u.iter_mut() {
            *x = drift.eval_potential(*x);
        }
        self.integrate_grid(&u)
    }

    fn project_noise_into(&self, increments: &[f64], coords: &mut [f64]) {
        self.project_noise_impl(increments, coords)
    }

    fn noise_trace(&self, q: &[f64]) -> f64 {
        self.noise_trace_impl(q)
    }

    fn h(&self) -> f64 {
        self.mesh().h()
    }
}

/// `int_0^1 F(u) dx` for a field in backend coordinates.
pub fn potential_integral<B: Galerkin + ?Sized>(u: &Field, drift: &CubicDrift, backend: &B) -> crate::Result<f64> {
    crate::error::check_len(backend.dim(), u.len())?;
    Ok(backend.potential_integral(u.coeffs(), drift))
}

/// Norm of order `alpha` of a field in backend coordinates:
/// `(sum_k lambda_k^alpha c_k^2)^{1/2}`.
pub fn coord_norm<B: Galerkin + ?Sized>(f: &Field, alpha: f64, backend: &B) -> crate::Result<f64> {
    crate::error::check_len(backend.dim(), f.len())?;
    Ok(crate::spectral::weighted_norm(f.coeffs(), backend.eigenvalues(), alpha))
}
