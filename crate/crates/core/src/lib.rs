//! Normal factor graphs as executable objects.
//!
//! An NFG is a graph whose vertices carry local functions (finite tensors)
//! and whose edges carry variables. Internal edges join two vertex ports and
//! are summed over; dangling edges touch one port and form the arguments of
//! the *exterior function*. This crate builds NFGs, contracts them (by brute
//! force and by planned pairwise grouping), rewrites them, combines them into
//! formal sums, and uses them to check classic linear-algebra identities
//! (trace, cross product, determinant, Pfaffian) with exact arithmetic.
//!
//! ```
//! use nfg_core::{contraction, linalg, tensor::Tensor};
//!
//! let a = Tensor::from_ints(&[2, 2], &[1, 2, 3, 4]).unwrap();
//! let g = linalg::trace_diagram(&a).unwrap();
//! let z = contraction::exterior_brute(&g).unwrap();
//! assert_eq!(z.scalar_value().unwrap().to_string(), "5");
//! ```

pub mod algebra;
pub mod builtins;
pub mod contraction;
pub mod dsl;
pub mod linalg;
pub mod nfg;
pub mod scalar;
pub mod suites;
pub mod tensor;

pub use algebra::CompoundNfg;
pub use builtins::Permutation;
pub use contraction::{ContractionPlan, Engine};
pub use nfg::{EdgeId, Nfg, PortRef, VertexId};
pub use scalar::{Backend, Rational, Scalar};
pub use tensor::{Shape, Tensor};
