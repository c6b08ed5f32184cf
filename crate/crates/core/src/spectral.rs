//! Sine spectral Galerkin backend on (0, 1) with homogeneous Dirichlet data.
//!
//! The discrete space is spanned by `e_j(x) = sqrt(2) sin(j pi x)`, `j = 1..J`,
//! the eigenfunctions of the Dirichlet Laplacian with eigenvalues `(j pi)^2`.
//! Nonlinear terms are evaluated on `M = 3J` interior collocation nodes
//! `x_m = m / (M + 1)`; the discrete sine transform on those nodes is exact for
//! sine polynomials of degree `<= M`, which covers the cube of a `J`-mode field.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{check_len, Error, Result};
use crate::field::Field;
use crate::linalg::{dot, matvec};

#[derive(Debug, Clone)]
pub struct SpectralBasis {
    modes: usize,
    nodes: usize,
    lambdas: Vec<f64>,
    x: Vec<f64>,
    /// `nodes x modes`, entry `(m, j) = e_j(x_m)`.
    synth: Vec<f64>,
    /// `modes x nodes`, entry `(j, m) = e_j(x_m) / (M + 1)`.
    analysis: Vec<f64>,
    /// Node weights integrating odd (sine-polynomial) grid functions exactly.
    odd_weights: Vec<f64>,
    /// `(M + 1) odd_weights`, turning the node rule into the odd rule.
    even_scale: Vec<f64>,
}

impl SpectralBasis {
    /// Basis with `modes` sine modes and the default `3 * modes` collocation nodes.
    pub fn new(modes: usize) -> Result<Self> {
        Self::with_nodes(modes, 3 * modes)
    }

    pub fn with_nodes(modes: usize, nodes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::config("spectral basis", "mode count must be positive"));
        }
        if nodes < 3 * modes {
            return Err(Error::config(
                "spectral basis",
                format!("need at least 3J = {} collocation nodes, got {nodes}", 3 * modes),
            ));
        }
        let period = 2 * (nodes + 1);
        // sin(pi k / (M + 1)) for k = 0..2(M+1); indexing by (j m) mod 2(M+1)
        // keeps every entry of the transform matrix exactly odd/symmetric.
        let sines: Vec<f64> = (0..period)
            .map(|k| (PI * k as f64 / (nodes + 1) as f64).sin())
            .collect();
        let e = |j: usize, m: usize| SQRT_2 * sines[(j * m) % period];

        let lambdas = (1..=modes).map(|j| (j as f64 * PI).powi(2)).collect();
        let x = (1..=nodes).map(|m| m as f64 / (nodes + 1) as f64).collect();

        let mut synth = vec![0.0; nodes * modes];
        for m in 0..nodes {
            for j in 0..modes {
                synth[m * modes + j] = e(j + 1, m + 1);
            }
        }
        let inv = 1.0 / (nodes + 1) as f64;
        let mut analysis = vec![0.0; modes * nodes];
        for j in 0..modes {
            for m in 0..nodes {
                analysis[j * nodes + m] = e(j + 1, m + 1) * inv;
            }
        }
        // int_0^1 e_k = 2 sqrt(2) / (k pi) for odd k, 0 for even k.
        let odd_weights: Vec<f64> = (1..=nodes)
            .map(|m| {
                let mut w = 0.0;
                for k in (1..=nodes).step_by(2) {
                    w += e(k, m) * 2.0 * SQRT_2 / (k as f64 * PI);
                }
                w * inv
            })
            .collect();

        let even_scale = odd_weights.iter().map(|w| w * (nodes + 1) as f64).collect();
        Ok(SpectralBasis {
            modes,
            nodes,
            lambdas,
            x,
            synth,
            analysis,
            odd_weights,
            even_scale,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn node_positions(&self) -> &[f64] {
        &self.x
    }

    /// Mesh parameter `h = lambda_{J+1}^{-1/2}`.
    pub fn h(&self) -> f64 {
        1.0 / ((self.modes + 1) as f64 * PI)
    }

    /// Values of `f` at the collocation nodes.
    pub fn synthesize(&self, f: &Field) -> Result<Vec<f64>> {
        check_len(self.modes, f.len())?;
        let mut out = vec![0.0; self.nodes];
        self.synthesize_into(f.coeffs(), &mut out);
        Ok(out)
    }

    pub(crate) fn synthesize_into(&self, coeffs: &[f64], grid: &mut [f64]) {
        matvec(&self.synth, self.modes, coeffs, grid);
    }

    /// Leading `J` sine coefficients of grid data, i.e. the L2 projection of
    /// the sine polynomial interpolating the nodes.
    pub fn analyze(&self, grid: &[f64]) -> Result<Field> {
        check_len(self.nodes, grid.len())?;
        let mut out = vec![0.0; self.modes];
        self.analyze_into(grid, &mut out);
        Field::new(out)
    }

    pub(crate) fn analyze_into(&self, grid: &[f64], coeffs: &mut [f64]) {
        matvec(&self.analysis, self.nodes, grid, coeffs);
    }

    /// `c_j -> phi(lambda_j) c_j`.
    pub fn apply_spectral_function<F: Fn(f64) -> f64>(&self, f: &Field, phi: F) -> Result<Field> {
        check_len(self.modes, f.len())?;
        let mut out = Vec::with_capacity(self.modes);
        for (c, &lam) in f.coeffs().iter().zip(&self.lambdas) {
            let w = phi(lam);
            if !w.is_finite() {
                return Err(Error::NonFinite("spectral function value"));
            }
            out.push(w * c);
        }
        Field::new(out)
    }

    /// `(sum_j lambda_j^alpha c_j^2)^{1/2}`, the norm of the fractional space of order `alpha`.
    pub fn sobolev_norm(&self, f: &Field, alpha: f64) -> Result<f64> {
        check_len(self.modes, f.len())?;
        Ok(weighted_norm(f.coeffs(), &self.lambdas, alpha))
    }

    /// Integral over (0,1) of `even + odd` given at the nodes. Exact when
    /// `even` samples a cosine polynomial of degree `< 2(M+1)` vanishing at the
    /// endpoints and `odd` samples a sine polynomial of degree `<= M`.
    pub(crate) fn even_projection_scale(&self) -> &[f64] {
        &self.even_scale
    }

    pub(crate) fn integrate_split(&self, even: &[f64], odd: &[f64]) -> f64 {
        let inv = 1.0 / (self.nodes + 1) as f64;
        even.iter().sum::<f64>() * inv + dot(odd, &self.odd_weights)
    }
}

pub(crate) fn weighted_norm(coeffs: &[f64], lambdas: &[f64], alpha: f64) -> f64 {
    if alpha == 0.0 {
        return dot(coeffs, coeffs).sqrt();
    }
    coeffs
        .iter()
        .zip(lambdas)
        .map(|(c, l)| l.powf(alpha) * c * c)
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn synthesize_single_mode_at_midpoint() {
        // M = 3 nodes: 1/4, 1/2, 3/4.
        let b = SpectralBasis::new(1).unwrap();
        let g = b.synthesize(&Field::unit(1, 0)).unwrap();
        assert_relative_eq!(g[1], SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn synthesize_second_mode_at_quarter() {
        // nodes m/8 include x = 1/4
        let b = SpectralBasis::with_nodes(2, 7).unwrap();
        let g = b.synthesize(&Field::unit(2, 1)).unwrap();
        let i = b.node_positions().iter().position(|&x| (x - 0.25).abs() < 1e-15).unwrap();
        assert_relative_eq!(g[i], SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn zero_field_synthesizes_to_zero() {
        let b = SpectralBasis::new(5).unwrap();
        assert!(b.synthesize(&Field::zeros(5)).unwrap().iter().all(|&v| v == 0.0));
        assert!(b.analyze(&[0.0; 15]).unwrap().coeffs().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let b = SpectralBasis::new(4).unwrap();
        assert!(matches!(
            b.synthesize(&Field::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(b.analyze(&[0.0; 11]).is_err());
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(SpectralBasis::with_nodes(4, 11).is_err());
        assert!(SpectralBasis::new(0).is_err());
    }

    #[test]
    fn spectral_functions() {
        let b = SpectralBasis::new(3).unwrap();
        let e1 = Field::unit(3, 0);
        let f = Field::new(vec![0.3, -1.2, 2.0]).unwrap();
        assert_eq!(b.apply_spectral_function(&f, |_| 1.0).unwrap(), f);
        assert_eq!(b.apply_spectral_function(&f, |l| (0.0 * l.sqrt()).cos()).unwrap(), f);
        let g = b.apply_spectral_function(&e1, |l| l).unwrap();
        assert_relative_eq!(g.coeffs()[0], PI * PI, epsilon = 1e-14);
        assert!(b.apply_spectral_function(&f, |l| 1.0 / (l - PI * PI)).is_err());
    }

    #[test]
    fn sobolev_norms() {
        let b = SpectralBasis::new(4).unwrap();
        assert_relative_eq!(b.sobolev_norm(&Field::unit(4, 0), 1.0).unwrap(), PI, epsilon = 1e-15);
        assert_eq!(b.sobolev_norm(&Field::zeros(4), 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            b.sobolev_norm(&Field::unit(4, 1), -1.0).unwrap(),
            1.0 / (2.0 * PI),
            epsilon = 1e-15
        );
    }

    #[test]
    fn odd_weights_integrate_sines() {
        let b = SpectralBasis::new(4).unwrap();
        for k in 1..=b.nodes() {
            let g: Vec<f64> = b
                .node_positions()
                .iter()
                .map(|&x| SQRT_2 * (k as f64 * PI * x).sin())
                .collect();
            let exact = if k % 2 == 1 { 2.0 * SQRT_2 / (k as f64 * PI) } else { 0.0 };
            assert_relative_eq!(dot(&g, &b.odd_weights), exact, epsilon = 1e-13);
        }
    }
}
