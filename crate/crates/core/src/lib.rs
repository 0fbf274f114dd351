//! Finite Kantorovich transport with an eye on the structure of optimal
//! couplings.
//!
//! * [`lp`]: network simplex solver, dual potentials, c-transforms, zero
//!   sets, and a brute-force vertex enumerator used as an oracle.
//! * [`extremality`]: a coupling is an extreme point of its transportation
//!   polytope iff its support is a forest; cycle witnesses split the rest.
//! * [`limb`]: numbered limb systems, forest decomposition, and the backward
//!   recursion that recovers the unique coupling living on a limb system.
//! * [`circle`]: the circle example with cost `1 - cos(theta - phi)`.
//! * [`io`] and [`cli`]: file formats and the `limbsys` command line.

pub mod circle;
pub mod cli;
pub mod error;
pub mod extremality;
pub mod io;
pub mod limb;
pub mod lp;
pub mod measure;
pub mod registry;
pub mod scalar;

pub use error::{Error, Result};
pub use extremality::{is_acyclic, is_extremal, CycleWitness, SupportGraph};
pub use limb::{decompose, reconstruct, two_limb_check, NumberedLimbSystem};
pub use lp::{solve, DualPotentials, SolveReport, TransportSolver};
pub use measure::{Coupling, CostMatrix, DiscreteMarginal, PartialMap, ToleranceConfig};
pub use scalar::{Rational, Scalar};
