use crate::backend::Galerkin;
use crate::error::{check_len, Error, Result};
use crate::fem::{FemSpace, Mesh1D};
use crate::field::{Field, State};
use crate::nonlinearity::CubicDrift;
use crate::spectral::SpectralBasis;

use super::config::{BackendKind, InitialData};

/// A discrete space of either kind.
#[derive(Debug, Clone)]
pub enum Space {
    Spectral(SpectralBasis),
    Fem(FemSpace),
}

impl Space {
    /// `resolution` is `J` (spectral) or the number of interior nodes (FEM).
    pub fn build(kind: BackendKind, resolution: usize, noise_modes: usize) -> Result<Self> {
        match kind {
            BackendKind::Spectral => Ok(Space::Spectral(SpectralBasis::new(resolution)?)),
            BackendKind::Fem => Ok(Space::Fem(FemSpace::new(Mesh1D::new(resolution)?, noise_modes)?)),
        }
    }

    fn inner(&self) -> &dyn Galerkin {
        match self {
            Space::Spectral(b) => b,
            Space::Fem(f) => f,
        }
    }

    /// Coordinates of `amplitude P_h e_index`.
    pub fn sine_mode(&self, index: usize, amplitude: f64) -> Result<Field> {
        if index == 0 {
            return Err(Error::config("initial data", "sine modes are numbered from 1"));
        }
        let f = match self {
            Space::Spectral(b) => {
                if index <= b.modes() {
                    Field::unit(b.modes(), index - 1)
                } else {
                    Field::zeros(b.modes())
                }
            }
            Space::Fem(f) => f.sine_mode_coords(index)?,
        };
        Ok(f.scaled(amplitude))
    }

    pub fn initial_state(&self, initial: &InitialData) -> Result<State> {
        match *initial {
            InitialData::Zero => Ok(State::zeros(self.dim())),
            InitialData::Mode { index, amplitude } => {
                State::new(self.sine_mode(index, amplitude)?, Field::zeros(self.dim()))
            }
        }
    }

    /// Express a state of the finer space `fine` on `self`: leading
    /// coefficients for spectral spaces, L2 projection for nested meshes.
    pub fn restrict_from(&self, fine: &Space, x: &State) -> Result<State> {
        check_len(fine.dim(), x.dim())?;
        match (self, fine) {
            (Space::Spectral(c), Space::Spectral(_)) => {
                Ok(State {
                    u: x.u.truncated(c.modes())?,
                    v: x.v.truncated(c.modes())?,
                })
            }
            (Space::Fem(c), Space::Fem(f)) => Ok(State {
                u: c.transfer_from(f, &x.u)?,
                v: c.transfer_from(f, &x.v)?,
            }),
            _ => Err(Error::config("spatial refinement", "cannot compare spectral and finite element spaces")),
        }
    }

    /// Express a state of `self` on the finer space `fine` without loss:
    /// zero padding for spectral spaces, nodal prolongation for nested meshes.
    pub fn embed_into(&self, fine: &Space, x: &State) -> Result<State> {
        check_len(self.dim(), x.dim())?;
        match (self, fine) {
            (Space::Spectral(_), Space::Spectral(f)) => {
                if f.modes() < x.dim() {
                    return Err(Error::config("spatial refinement", "target space is coarser"));
                }
                let pad = |c: &Field| {
                    let mut v = c.coeffs().to_vec();
                    v.resize(f.modes(), 0.0);
                    Field::new(v)
                };
                Ok(State {
                    u: pad(&x.u)?,
                    v: pad(&x.v)?,
                })
            }
            (Space::Fem(c), Space::Fem(f)) => Ok(State {
                u: c.embed_into(f, &x.u)?,
                v: c.embed_into(f, &x.v)?,
            }),
            _ => Err(Error::config("spatial refinement", "cannot compare spectral and finite element spaces")),
        }
    }

    pub fn energy(&self, x: &State, drift: &CubicDrift) -> Result<f64> {
        crate::stepper::energy(x, drift, self)
    }
}

impl Galerkin for Space {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn eigenvalues(&self) -> &[f64] {
        match self {
            Space::Spectral(b) => b.lambdas(),
            Space::Fem(f) => Galerkin::eigenvalues(f),
        }
    }

    fn grid_len(&self) -> usize {
        self.inner().grid_len()
    }

    fn synthesize_into(&self, coords: &[f64], grid: &mut [f64]) {
        self.inner().synthesize_into(coords, grid)
    }

    fn project_into(&self, grid: &[f64], coords: &mut [f64]) {
        self.inner().project_into(grid, coords)
    }

    fn project_avf_into(&self, drift: &CubicDrift, a: &[f64], b: &[f64], scratch: &mut [f64], coords: &mut [f64]) {
        self.inner().project_avf_into(drift, a, b, scratch, coords)
    }

    fn potential_integral(&self, coords: &[f64], drift: &CubicDrift) -> f64 {
        self.inner().potential_integral(coords, drift)
    }

    fn project_noise_into(&self, increments: &[f64], coords: &mut [f64]) {
        self.inner().project_noise_into(increments, coords)
    }

    fn noise_trace(&self, q: &[f64]) -> f64 {
        self.inner().noise_trace(q)
    }

    fn h(&self) -> f64 {
        self.inner().h()
    }
}
