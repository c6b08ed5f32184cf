//! The exponential AVF scheme
//!
//! ```text
//! U' = C U + L^{-1/2} S V - L^{-1} (I - C) P_h g
//! V' = -L^{1/2} S U + C V - L^{-1/2} S P_h g + P_h dW
//! g  = int_0^1 f(U + theta (U' - U)) d theta
//! ```
//!
//! with `C = cos(tau L^{1/2})`, `S = sin(tau L^{1/2})`, `L` the discrete
//! Laplacian. In eigen-coordinates all operators are diagonal. `U'` is found
//! by fixed-point iteration; the AVF term of the accepted iterate is reused
//! for the velocity update.

use serde::{Deserialize, Serialize};

use crate::backend::Galerkin;
use crate::error::{check_len, Error, Result};
use crate::field::{Field, State};
use crate::linalg::dot;
use crate::noise::IncrementTable;
use crate::nonlinearity::CubicDrift;

/// Diagonal step operators, one entry per eigenvalue.
#[derive(Debug, Clone)]
pub struct StepOperators {
    pub tau: f64,
    pub cos_op: Vec<f64>,
    pub sin_op: Vec<f64>,
    /// `lambda^{-1/2} sin(tau sqrt(lambda))`
    pub lam_inv_half_sin: Vec<f64>,
    /// `lambda^{-1} (1 - cos(tau sqrt(lambda)))`
    pub lam_inv_one_minus_cos: Vec<f64>,
    /// `lambda^{1/2} sin(tau sqrt(lambda))`
    pub lam_half_sin: Vec<f64>,
}

impl StepOperators {
    /// `tau` may be negative (backward linear flow); `|tau| < 2` is required
    /// for unique solvability of the implicit step.
    pub fn new(eigenvalues: &[f64], tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau.abs() < 2.0) {
            return Err(Error::config(
                "step-size bound",
                format!("step size must satisfy tau < 2, got {tau}"),
            ));
        }
        if eigenvalues.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::config("discrete Laplacian", "eigenvalues must be positive"));
        }
        let n = eigenvalues.len();
        let mut ops = StepOperators {
            tau,
            cos_op: Vec::with_capacity(n),
            sin_op: Vec::with_capacity(n),
            lam_inv_half_sin: Vec::with_capacity(n),
            lam_inv_one_minus_cos: Vec::with_capacity(n),
            lam_half_sin: Vec::with_capacity(n),
        };
        for &lam in eigenvalues {
            let omega = lam.sqrt();
            let (s, c) = (tau * omega).sin_cos();
            let half = (0.5 * tau * omega).sin();
            ops.cos_op.push(c);
            ops.sin_op.push(s);
            ops.lam_inv_half_sin.push(s / omega);
            ops.lam_inv_one_minus_cos.push(2.0 * half * half / lam);
            ops.lam_half_sin.push(s * omega);
        }
        Ok(ops)
    }

    pub fn for_backend<B: Galerkin + ?Sized>(backend: &B, tau: f64) -> Result<Self> {
        Self::new(backend.eigenvalues(), tau)
    }

    pub fn dim(&self) -> usize {
        self.cos_op.len()
    }

    /// Free linear flow `E_h(tau) x`.
    pub fn rotate(&self, x: &State) -> Result<State> {
        check_len(self.dim(), x.dim())?;
        let (u, v) = (x.u.coeffs(), x.v.coeffs());
        let nu = (0..self.dim())
            .map(|k| self.cos_op[k] * u[k] + self.lam_inv_half_sin[k] * v[k])
            .collect();
        let nv = (0..self.dim())
            .map(|k| -self.lam_half_sin[k] * u[k] + self.cos_op[k] * v[k])
            .collect();
        Ok(State {
            u: Field::from_vec_unchecked(nu),
            v: Field::from_vec_unchecked(nv),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Absolute tolerance on the l2 distance of consecutive iterates.
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation factor in (0, 1].
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            max_iter: 100,
            damping: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::config("solver", format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::config("solver", "max_iter must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::config("solver", format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub iterations: usize,
    pub avf_evaluations: usize,
}

/// Reusable one-step map with scratch buffers.
pub struct Stepper<'a, B: Galerkin + ?Sized> {
    backend: &'a B,
    ops: &'a StepOperators,
    drift: &'a CubicDrift,
    solver: SolverConfig,
    lin_u: Vec<f64>,
    lin_v: Vec<f64>,
    w: Vec<f64>,
    w_next: Vec<f64>,
    g: Vec<f64>,
    noise: Vec<f64>,
    grid_old: Vec<f64>,
    grid_new: Vec<f64>,
    grid_avf: Vec<f64>,
    avf_evaluations: usize,
}

impl<'a, B: Galerkin + ?Sized> Stepper<'a, B> {
    pub fn new(backend: &'a B, ops: &'a StepOperators, drift: &'a CubicDrift, solver: SolverConfig) -> Result<Self> {
        check_len(backend.dim(), ops.dim())?;
        solver.validate()?;
        let n = backend.dim();
        let m = backend.grid_len();
        Ok(Stepper {
            backend,
            ops,
            drift,
            solver,
            lin_u: vec![0.0; n],
            lin_v: vec![0.0; n],
            w: vec![0.0; n],
            w_next: vec![0.0; n],
            g: vec![0.0; n],
            noise: vec![0.0; n],
            grid_old: vec![0.0; m],
            grid_new: vec![0.0; m],
            grid_avf: vec![0.0; m],
            avf_evaluations: 0,
        })
    }

    /// Total AVF field evaluations performed by this stepper.
    pub fn avf_evaluations(&self) -> usize {
        self.avf_evaluations
    }

    fn eval_avf(&mut self, at: &[f64]) {
        self.backend.synthesize_into(at, &mut self.grid_new);
        self.backend
            .project_avf_into(self.drift, &self.grid_old, &self.grid_new, &mut self.grid_avf, &mut self.g);
        self.avf_evaluations += 1;
    }

    /// Advance `x` in place; `dw` is the already projected increment `P_h dW`.
    pub fn advance(&mut self, x: &mut State, dw: &[f64]) -> Result<StepStats> {
        let n = self.backend.dim();
        check_len(n, x.dim())?;
        check_len(n, dw.len())?;
        let ops = self.ops;
        let u = x.u.coeffs();
        let v = x.v.coeffs();
        for k in 0..n {
            self.lin_u[k] = ops.cos_op[k] * u[k] + ops.lam_inv_half_sin[k] * v[k];
            self.lin_v[k] = -ops.lam_half_sin[k] * u[k] + ops.cos_op[k] * v[k];
        }
        let evals_before = self.avf_evaluations;
        let iterations = if self.drift.is_zero() {
            self.g.fill(0.0);
            self.w_next.copy_from_slice(&self.lin_u);
            0
        } else {
            self.backend.synthesize_into(u, &mut self.grid_old);
            self.w.copy_from_slice(&self.lin_u);
            let mut residual = f64::INFINITY;
            let mut iterations = 0;
            while iterations < self.solver.max_iter {
                iterations += 1;
                let w = std::mem::take(&mut self.w);
                self.eval_avf(&w);
                self.w = w;
                let mut r2 = 0.0;
                for k in 0..n {
                    let next = self.lin_u[k] - ops.lam_inv_one_minus_cos[k] * self.g[k];
                    self.w_next[k] = next;
                    let d = next - self.w[k];
                    r2 += d * d;
                }
                residual = r2.sqrt();
                if !residual.is_finite() {
                    return Err(Error::NonFinite("fixed-point iterate"));
                }
                if residual <= self.solver.tol {
                    break;
                }
                let damping = self.solver.damping;
                for k in 0..n {
                    self.w[k] += damping * (self.w_next[k] - self.w[k]);
                }
            }
            if residual > self.solver.tol {
                return Err(Error::NonConvergence { iterations, residual });
            }
            iterations
        };
        // U' = lin_u - L^{-1}(I - C) g and V' use the same g
        x.u.coeffs_mut().copy_from_slice(&self.w_next);
        let v = x.v.coeffs_mut();
        for k in 0..n {
            v[k] = self.lin_v[k] - ops.lam_inv_half_sin[k] * self.g[k] + dw[k];
        }
        if !(x.u.is_finite() && x.v.is_finite()) {
            return Err(Error::NonFinite("state after step"));
        }
        Ok(StepStats {
            iterations,
            avf_evaluations: self.avf_evaluations - evals_before,
        })
    }

    /// One step from `x` returning the new state.
    pub fn step(&mut self, x: &State, dw: &Field) -> Result<(State, StepStats)> {
        let mut next = x.clone();
        let stats = self.advance(&mut next, dw.coeffs())?;
        Ok((next, stats))
    }

    /// Run over every row of `increments`, calling `observe(n, state)` for
    /// `n = 0..=N`. Returns the final state.
    pub fn integrate<F: FnMut(usize, &State)>(
        &mut self,
        x0: &State,
        increments: &IncrementTable,
        mut observe: F,
    ) -> Result<State> {
        let mut x = x0.clone();
        observe(0, &x);
        let mut noise = std::mem::take(&mut self.noise);
        for n in 0..increments.steps() {
            self.backend.project_noise_into(increments.row(n), &mut noise);
            if let Err(e) = self.advance(&mut x, &noise) {
                self.noise = noise;
                return Err(Error::StepFailed {
                    step: n,
                    source: Box::new(e),
                });
            }
            observe(n + 1, &x);
        }
        self.noise = noise;
        Ok(x)
    }
}

/// One step of the scheme from `x` with projected increment `dw`.
pub fn step<B: Galerkin + ?Sized>(
    x: &State,
    dw: &Field,
    ops: &StepOperators,
    drift: &CubicDrift,
    backend: &B,
    solver: SolverConfig,
) -> Result<(State, usize)> {
    let mut stepper = Stepper::new(backend, ops, drift, solver)?;
    let (next, stats) = stepper.step(x, dw)?;
    Ok((next, stats.iterations))
}

/// States at `t_0, ..., t_N`.
pub fn trajectory<B: Galerkin + ?Sized>(
    x0: &State,
    increments: &IncrementTable,
    ops: &StepOperators,
    drift: &CubicDrift,
    backend: &B,
    solver: SolverConfig,
) -> Result<Vec<State>> {
    let mut stepper = Stepper::new(backend, ops, drift, solver)?;
    let mut states = Vec::with_capacity(increments.steps() + 1);
    stepper.integrate(x0, increments, |_, x| states.push(x.clone()))?;
    Ok(states)
}

/// `J(u, v) = |grad u|^2 / 2 + |v|^2 / 2 + int F(u) + C1`.
pub fn energy<B: Galerkin + ?Sized>(x: &State, drift: &CubicDrift, backend: &B) -> Result<f64> {
    check_len(backend.dim(), x.dim())?;
    Ok(energy_unchecked(x.u.coeffs(), x.v.coeffs(), drift, backend))
}

pub(crate) fn energy_unchecked<B: Galerkin + ?Sized>(u: &[f64], v: &[f64], drift: &CubicDrift, backend: &B) -> f64 {
    let grad: f64 = u.iter().zip(backend.eigenvalues()).map(|(c, l)| l * c * c).sum();
    0.5 * grad + 0.5 * dot(v, v) + backend.potential_integral(u, drift) + drift.c1
}

/// `|J(U', V' - P_h dW) - J(U, V)|`.
pub fn hamiltonian_residual<B: Galerkin + ?Sized>(
    x_n: &State,
    x_next: &State,
    dw: &Field,
    drift: &CubicDrift,
    backend: &B,
) -> Result<f64> {
    let v_bar = x_next.v.sub(dw)?;
    let before = energy(x_n, drift, backend)?;
    check_len(backend.dim(), v_bar.len())?;
    let after = energy_unchecked(x_next.u.coeffs(), v_bar.coeffs(), drift, backend);
    Ok((after - before).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{FemSpace, Mesh1D};
    use crate::noise::{sample_increments, NoiseModel, SeedPlan};
    use crate::spectral::SpectralBasis;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn smooth_state(n: usize, amp: f64) -> State {
        let u = (0..n).map(|k| amp / ((k + 1) as f64).powi(3)).collect();
        let v = (0..n).map(|k| -0.5 * amp / ((k + 1) as f64).powi(2)).collect();
        State::new(Field::new(u).unwrap(), Field::new(v).unwrap()).unwrap()
    }

    #[test]
    fn operator_identities() {
        let b = SpectralBasis::new(32).unwrap();
        let ops = StepOperators::for_backend(&b, 0.3).unwrap();
        for k in 0..32 {
            assert!((ops.cos_op[k].powi(2) + ops.sin_op[k].powi(2) - 1.0).abs() < 1e-14);
        }
        let tiny = StepOperators::new(&[PI * PI, 4.0 * PI * PI], 1e-6).unwrap();
        for k in 0..2 {
            assert_relative_eq!(tiny.lam_inv_half_sin[k], 1e-6, max_relative = 1e-9);
            assert_relative_eq!(tiny.lam_inv_one_minus_cos[k], 0.5e-12, max_relative = 1e-9);
        }
        assert!(StepOperators::new(&[1.0], 2.0).is_err());
        assert!(StepOperators::new(&[1.0], f64::NAN).is_err());
        assert!(StepOperators::new(&[0.0], 0.1).is_err());
    }

    #[test]
    fn linear_step_is_exact_rotation() {
        let b = SpectralBasis::new(1).unwrap();
        let tau = 0.37;
        let ops = StepOperators::for_backend(&b, tau).unwrap();
        let x = State::new(Field::new(vec![0.8]).unwrap(), Field::new(vec![-0.3]).unwrap()).unwrap();
        let (next, iters) = step(&x, &Field::zeros(1), &ops, &CubicDrift::zero(), &b, SolverConfig::default()).unwrap();
        assert_eq!(iters, 0);
        let w = PI;
        let eu = (tau * w).cos() * 0.8 + (tau * w).sin() / w * -0.3;
        let ev = -w * (tau * w).sin() * 0.8 + (tau * w).cos() * -0.3;
        assert_relative_eq!(next.u.coeffs()[0], eu, epsilon = 1e-15);
        assert_relative_eq!(next.v.coeffs()[0], ev, epsilon = 1e-15);
    }

    #[test]
    fn single_mode_matches_scalar_root() {
        // With one sine mode the AVF projection is (3/8)(c^3 + c^2 c' + c c'^2 + c'^3)
        // because int_0^1 e_1^4 = 3/2; solve the scalar equation by bisection.
        let b = SpectralBasis::new(1).unwrap();
        let tau = 0.4;
        let ops = StepOperators::for_backend(&b, tau).unwrap();
        let (c, d) = (1.7, -0.9);
        let x = State::new(Field::new(vec![c]).unwrap(), Field::new(vec![d]).unwrap()).unwrap();
        let (next, _) = step(&x, &Field::zeros(1), &ops, &CubicDrift::default(), &b, SolverConfig::default()).unwrap();
        let lin = ops.cos_op[0] * c + ops.lam_inv_half_sin[0] * d;
        let g = |y: f64| 0.375 * (c * c * c + c * c * y + c * y * y + y * y * y);
        let phi = |y: f64| y - lin + ops.lam_inv_one_minus_cos[0] * g(y);
        let (mut lo, mut hi) = (-20.0, 20.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((next.u.coeffs()[0] - root).abs() < 1e-10);
        let v_expect = -ops.lam_half_sin[0] * c + ops.cos_op[0] * d - ops.lam_inv_half_sin[0] * g(root);
        assert!((next.v.coeffs()[0] - v_expect).abs() < 1e-10);
    }

    #[test]
    fn small_step_consistency() {
        let b = SpectralBasis::new(8).unwrap();
        let drift = CubicDrift::default();
        let x = smooth_state(8, 1.0);
        let tau = 1e-5;
        let ops = StepOperators::for_backend(&b, tau).unwrap();
        let (next, _) = step(&x, &Field::zeros(8), &ops, &drift, &b, SolverConfig::default()).unwrap();
        // generator: (v, -Lambda u - P_h f(u))
        let grid = b.synthesize(&x.u).unwrap();
        let fu: Vec<f64> = grid.iter().map(|&u| drift.eval_f(u)).collect();
        let pf = b.analyze(&fu).unwrap();
        let mut scale = 0.0f64;
        for k in 0..8 {
            let du = x.v.coeffs()[k];
            let dv = -b.lambdas()[k] * x.u.coeffs()[k] - pf.coeffs()[k];
            scale = scale.max(du.abs()).max(dv.abs());
            let fd_u = (next.u.coeffs()[k] - x.u.coeffs()[k]) / tau;
            let fd_v = (next.v.coeffs()[k] - x.v.coeffs()[k]) / tau;
            assert!((fd_u - du).abs() < 1e-2 * (1.0 + du.abs()), "u mode {k}: {fd_u} vs {du}");
            assert!((fd_v - dv).abs() < 1e-2 * (1.0 + dv.abs()), "v mode {k}: {fd_v} vs {dv}");
        }
        assert!(scale > 0.0);
    }

    #[test]
    fn energy_examples() {
        let b = SpectralBasis::new(6).unwrap();
        let d = CubicDrift::default();
        assert_eq!(energy(&State::zeros(6), &d, &b).unwrap(), 0.0);
        let x = State::new(Field::unit(6, 0), Field::zeros(6)).unwrap();
        assert_relative_eq!(energy(&x, &d, &b).unwrap(), 0.5 * PI * PI + 0.375, epsilon = 1e-13);
        assert!((energy(&x, &d, &b).unwrap() - 5.30980).abs() < 1e-5);
        let y = State::new(Field::zeros(6), Field::unit(6, 0)).unwrap();
        assert_relative_eq!(energy(&y, &d, &b).unwrap(), 0.5, epsilon = 1e-15);
        assert!(energy(&State::zeros(5), &d, &b).is_err());
    }

    #[test]
    fn hamiltonian_residual_examples() {
        let b = SpectralBasis::new(16).unwrap();
        let ops = StepOperators::for_backend(&b, 0.1).unwrap();
        let x = smooth_state(16, 2.0);
        let zero = Field::zeros(16);
        let (lin, _) = step(&x, &zero, &ops, &CubicDrift::zero(), &b, SolverConfig::default()).unwrap();
        assert!(hamiltonian_residual(&x, &lin, &zero, &CubicDrift::zero(), &b).unwrap() <= 1e-12);

        let d = CubicDrift::default();
        let (a, _) = step(&x, &zero, &ops, &d, &b, SolverConfig::default()).unwrap();
        let r0 = hamiltonian_residual(&x, &a, &zero, &d, &b).unwrap();
        assert!(r0 <= 1e-9, "{r0}");
        let dw = Field::new((0..16).map(|k| 0.3 / (k + 1) as f64).collect()).unwrap();
        let (bn, _) = step(&x, &dw, &ops, &d, &b, SolverConfig::default()).unwrap();
        // noise enters only the velocity, additively
        assert_eq!(bn.u, a.u);
        let r1 = hamiltonian_residual(&x, &bn, &dw, &d, &b).unwrap();
        assert!((r1 - r0).abs() <= 1e-12);
    }

    #[test]
    fn fem_step_conserves_energy() {
        let space = FemSpace::new(Mesh1D::new(15).unwrap(), 15).unwrap();
        let ops = StepOperators::for_backend(&space, 0.05).unwrap();
        let d = CubicDrift::default();
        let x = smooth_state(15, 3.0);
        let dw = Field::zeros(15);
        let (next, _) = step(&x, &dw, &ops, &d, &space, SolverConfig::default()).unwrap();
        let r = hamiltonian_residual(&x, &next, &dw, &d, &space).unwrap();
        assert!(r <= 1e-10, "{r}");
    }

    #[test]
    fn avf_evaluated_once_per_iterate() {
        let b = SpectralBasis::new(8).unwrap();
        let ops = StepOperators::for_backend(&b, 0.2).unwrap();
        let d = CubicDrift::default();
        let mut st = Stepper::new(&b, &ops, &d, SolverConfig::default()).unwrap();
        let (_, stats) = st.step(&smooth_state(8, 2.0), &Field::zeros(8)).unwrap();
        assert!(stats.iterations >= 2);
        assert_eq!(stats.avf_evaluations, stats.iterations);
        assert_eq!(st.avf_evaluations(), stats.iterations);
    }

    #[test]
    fn non_convergence_reported() {
        let b = SpectralBasis::new(4).unwrap();
        let ops = StepOperators::for_backend(&b, 0.5).unwrap();
        let solver = SolverConfig {
            max_iter: 2,
            ..SolverConfig::default()
        };
        let err = step(&smooth_state(4, 5.0), &Field::zeros(4), &ops, &CubicDrift::default(), &b, solver).unwrap_err();
        match err {
            Error::NonConvergence { iterations, residual } => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-12);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(Stepper::new(&b, &ops, &CubicDrift::default(), SolverConfig { tol: 0.0, ..solver }).is_err());
        assert!(Stepper::new(&b, &ops, &CubicDrift::default(), SolverConfig { damping: 1.5, ..solver }).is_err());
    }

    #[test]
    fn damped_iteration_converges_to_same_step() {
        let b = SpectralBasis::new(8).unwrap();
        let ops = StepOperators::for_backend(&b, 0.25).unwrap();
        let x = smooth_state(8, 2.0);
        let d = CubicDrift::default();
        let (plain, _) = step(&x, &Field::zeros(8), &ops, &d, &b, SolverConfig::default()).unwrap();
        let damped = SolverConfig {
            damping: 0.6,
            ..SolverConfig::default()
        };
        let (relaxed, _) = step(&x, &Field::zeros(8), &ops, &d, &b, damped).unwrap();
        assert!(plain.u.sub(&relaxed.u).unwrap().l2() < 1e-11);
    }

    #[test]
    fn trajectory_properties() {
        let b = SpectralBasis::new(8).unwrap();
        let ops = StepOperators::for_backend(&b, 0.125).unwrap();
        let zero_table = IncrementTable::zeros(8, 8, 0.125);
        let traj = trajectory(&State::zeros(8), &zero_table, &ops, &CubicDrift::default(), &b, SolverConfig::default()).unwrap();
        assert_eq!(traj.len(), 9);
        assert!(traj.iter().all(|s| *s == State::zeros(8)));

        // group property of the linear flow
        let x = smooth_state(8, 1.0);
        let back = StepOperators::for_backend(&b, -0.125).unwrap();
        let lin = CubicDrift::zero();
        let (fwd, _) = step(&x, &Field::zeros(8), &ops, &lin, &b, SolverConfig::default()).unwrap();
        let (ret, _) = step(&fwd, &Field::zeros(8), &back, &lin, &b, SolverConfig::default()).unwrap();
        assert!(ret.u.sub(&x.u).unwrap().l2() < 1e-12 && ret.v.sub(&x.v).unwrap().l2() < 1e-12);

        let half = StepOperators::for_backend(&b, 0.0625).unwrap();
        let (h1, _) = step(&x, &Field::zeros(8), &half, &lin, &b, SolverConfig::default()).unwrap();
        let (h2, _) = step(&h1, &Field::zeros(8), &half, &lin, &b, SolverConfig::default()).unwrap();
        assert!(h2.u.sub(&fwd.u).unwrap().l2() < 1e-12 && h2.v.sub(&fwd.v).unwrap().l2() < 1e-12);
    }

    #[test]
    fn trajectory_is_deterministic_and_reports_failing_step() {
        let b = SpectralBasis::new(8).unwrap();
        let ops = StepOperators::for_backend(&b, 0.125).unwrap();
        let model = NoiseModel::power_law(0.5005, 8, 1.0).unwrap();
        let table = sample_increments(&model, &SeedPlan::new(5), 0, 8, 0.125).unwrap();
        let d = CubicDrift::default();
        let a = trajectory(&State::zeros(8), &table, &ops, &d, &b, SolverConfig::default()).unwrap();
        let c = trajectory(&State::zeros(8), &table, &ops, &d, &b, SolverConfig::default()).unwrap();
        assert_eq!(a, c);

        // a large kick in the velocity at step 2 makes step 3 stiff
        let rows = (0..5)
            .map(|n| vec![if n == 2 { 1e3 } else { 0.0 }; 8])
            .collect();
        let kicked = IncrementTable::from_rows(rows, 0.125).unwrap();
        let strict = SolverConfig {
            max_iter: 3,
            ..SolverConfig::default()
        };
        let err = trajectory(&State::zeros(8), &kicked, &ops, &d, &b, strict).unwrap_err();
        match err {
            Error::StepFailed { step, .. } => assert_eq!(step, 3),
            other => panic!("unexpected {other}"),
        }
    }
}
