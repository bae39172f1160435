//! Connection matrices of d − (A0/z² + x/z)dz as solutions of the gauge
//! transformation equation between r₀ and the Alekseev–Meinrenken r-matrix,
//! with the Poisson geometry that surrounds them.

pub mod error;
pub mod experiments;
pub mod fd;
pub mod lie;
pub mod linalg;
pub mod ode;
pub mod poisson;
pub mod rmatrix;
pub mod serial;
pub mod stokes;
pub mod tensor;

pub type C64 = num_complex::Complex64;
pub type Mat = nalgebra::DMatrix<C64>;

pub use error::{Error, Result};
pub use fd::FdScheme;
pub use lie::{GOperator, LieContext};
pub use ode::OdeTolerances;
pub use poisson::GStarTriple;
pub use rmatrix::{AlekseevMeinrenken, DynamicalRMatrix, GValuedMap};
pub use stokes::{C2piField, IrregularConnection, MonodromyData, SectorLayout, SolverOptions};
pub use tensor::{ThreeTensor, TwoTensor};
