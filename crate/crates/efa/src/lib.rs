//! Equation-free multiscale solver for second-order wave equations in
//! non-divergence form, `u_tt = sum_ij A_ij(x) d_ij u + f`, with rapidly
//! oscillating coefficients.
//!
//! The macro solver never sees the oscillatory medium: the missing flux
//! `F(x_I, hess U)` is measured on demand by solving the heterogeneous wave
//! equation in a periodic box of size `O(eta)` around each macro point,
//! lifting the macro state to a quadratic polynomial, and averaging
//! `sum_ij A_ij d_ij u` against a compactly supported space-time kernel with
//! vanishing moments. For media with an `A(x/eps)` structure the flux
//! converges to the non-divergence homogenized flux `A0 : hess U` at rate
//! `(eps/eta)^(q+2)` in the kernel smoothness `q`.
//!
//! Modules:
//! - [`coefficient`]: heterogeneous media (periodic, locally periodic,
//!   almost periodic) as pure evaluable fields with ellipticity bounds
//! - [`kernel`]: averaging kernels and weighted trapezoidal quadrature
//! - [`micro`]: quadratic lifting and the periodic-box leap-frog micro solver
//! - [`upscale`]: space-time averaging of the micro flux, effective tensors
//! - [`macroscale`]: the coarse leap-frog stepper with pluggable fluxes
//! - [`reference`](mod@reference): harmonic means, invariant-measure cell
//!   problems, direct numerical simulation, and kernel averaging of
//!   resolved fields
//! - [`harness`]: experiment configs, sweeps, error reports, CSV output and
//!   the acceptance checks behind `efa check`

pub mod coefficient;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod macroscale;
pub mod micro;
pub mod reference;
pub mod upscale;

pub use coefficient::{CoefficientField, CoefficientKind, SymMat};
pub use error::{EfaError, Result};
pub use kernel::Kernel;
pub use micro::{fit_quadratic, solve_micro, MicroField, MicroProblemSpec, QuadraticPoly};
pub use upscale::{upscale_flux, ReusePolicy, UpscaleConfig};
