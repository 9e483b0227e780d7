//! Exact solutions for two spinless particles hopping on a 1D lattice while
//! coupled to a common thermal bath.
//!
//! The reduced density matrix of this model is known in closed form, as a
//! Bessel-function series in the Wannier (site) basis and as the exponential
//! of a quadratic generator in the Fourier (quasi-momentum) basis. This crate
//! evaluates both forms, cross-validates them, and derives every quantity of
//! interest on top of them:
//!
//! - [`specfun`]: numerically robust integer-order Bessel kernels. All
//!   modified Bessel values are produced in scaled form `e^{-x} I_n(x)` with
//!   explicit exponent bookkeeping so that no intermediate overflows.
//! - [`generator`]: the Fourier-space infinitesimal generator and propagator.
//! - [`rho`]: two-body and one-body density matrices via two independent
//!   engines (Bessel series and momentum-grid spectral transform), the
//!   dynamic change of basis that removes the hopping energy, and spectra.
//! - [`observables`]: purity, entropy, mutual information, cross-term
//!   coherence, probability profile and spatial moments.
//! - [`wigner`]: the lattice Wigner quasi-distribution on the enlarged
//!   (integer plus half-integer) lattice, its marginals and negative volume.
//! - [`gqd`]: mirror-bipartition qutrit coarse-graining and the geometric
//!   quantum discord lower bound.
//! - [`fock`]: exact integer-arithmetic checks of the bosonic shift-operator
//!   algebra on a finite periodic lattice.
//! - [`pseudo`]: the normalized but non-positive solution driven only by the
//!   bath-mediated interaction term.
//! - [`export`]: CSV and binary artifact writers shared by the CLI.

pub mod error;
pub mod export;
pub mod fock;
pub mod generator;
pub mod gqd;
pub mod observables;
pub mod pseudo;
pub mod rho;
pub mod specfun;
pub mod wigner;
mod util;
pub mod window;

pub use error::DqwError;
pub use generator::ModelParams;
pub use window::SiteWindow;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, DqwError>;
