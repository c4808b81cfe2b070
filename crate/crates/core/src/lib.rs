//! Discontinuous Galerkin spectral element discretisation of the thermal
//! rotating shallow water equations on cubed-sphere and doubly periodic
//! planar meshes.

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod fluxes;
pub mod mesh;
pub mod operators;
pub mod solver;
pub mod state;
pub mod testcases;
pub mod timeint;

pub use basis::ReferenceBasis;
pub use error::{Error, Result};
pub use fluxes::{BetaRule, FluxConfig, FluxMode, FluxParams};
pub use mesh::{Mesh, MeshKind, Vec3};
pub use solver::{Coriolis, SchemeConfig, Solver, Variant};
pub use state::{State, Tendency};
pub use timeint::{advance, ssp_rk3_step, StepController};
