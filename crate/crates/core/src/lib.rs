//! Matrix bundles over the 2-sphere and the matrix-function algebras built
//! from them.
//!
//! * [`cmatrix`]: dense complex matrices, structural predicates, the
//!   standard polynomial and commutants.
//! * [`loops`]: sampled unitary loops and their winding index.
//! * [`bundle`]: two-chart bundles over `S^2`, their sections and
//!   classification mod `n`.
//! * [`fpalg`]: fixed-point algebras (block-diagonal boundary conditions)
//!   over spheres, disks and intervals.
//! * [`iso`]: the gcd criterion and the explicit isomorphisms between
//!   fixed-point algebras over bundles of different index.
//! * [`presentations`]: finitely presented *-algebras and checks of
//!   candidate finite-dimensional representations.
//! * [`cli`]: command implementations behind the `fixalg` binary.

pub mod cmatrix;
pub mod error;
pub mod loops;
pub mod presentations;
pub mod bundle;
pub mod cli;
pub mod fpalg;
pub mod iso;
pub mod rng;

pub use cmatrix::{BlockStructure, CMatrix};
pub use error::{Error, Result};
pub use loops::{canonical_loop, UnitaryLoop};
