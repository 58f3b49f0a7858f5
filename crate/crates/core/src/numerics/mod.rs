//! Shared numerical kernels: grids and quadrature, bracketed root finding,
//! adaptive Runge–Kutta integration, dense symmetric eigensolver and the
//! discrete Fourier transform pair.

pub mod eigen;
pub mod fd;
pub mod fourier;
pub mod grid;
pub mod ivp;
pub mod quad;
pub mod roots;

pub use eigen::{symmetric_eigen, symmetric_eigenvalues, SquareMatrix, SymmetricEigen};
pub use fourier::{dft, idft, SpectralOps};
pub use grid::{quadrature, Grid, Topology};
pub use ivp::{integrate_ivp, IvpProblem, IvpSolution};
pub use roots::find_root_bracketed;
