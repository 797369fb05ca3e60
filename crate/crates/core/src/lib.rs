//! Completely-positive maps on two `d`-dimensional systems that commute with
//! every `U⊗U`.
//!
//! Such maps are in one-to-one correspondence with four-party states that are
//! invariant under `U⊗U⊗V⊗V`, and those states are fixed by four weights
//! `λ = (λ1, λ2, λ3, λ4)` on the blocks `Â⊗Â, Â⊗Ŝ, Ŝ⊗Â, Ŝ⊗Ŝ`. The crate
//! builds the states, decides separability through a five-vertex polytope,
//! certifies the dual witnesses on product states, shows that the PPT set is
//! the same polytope, and checks that separable maps never raise the Werner
//! parameter of an entangled Werner state.
//!
//! Four-factor operators always use the ordering `(A, B, A′, B′)`, with
//! `(A, B)` the input pair of the map and `(A′, B′)` the output pair.
//! Separability is always across `(A A′) | (B B′)`.

pub mod choi;
pub mod error;
pub mod monotonicity;
pub mod polytope;
pub mod ppt;
pub mod symmetric;
pub mod tensor;
pub mod witness;

pub use choi::{CovariantMap, LambdaVec};
pub use error::{Error, Result};
pub use polytope::FacetVec;
pub use symmetric::WernerParam;
pub use tensor::{ComplexMatrix, SubsystemShape, C64};

/// Default tolerance for algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Tolerance on facet margins and PPT eigenvalues.
pub const BOUNDARY_TOL: f64 = 1e-12;
