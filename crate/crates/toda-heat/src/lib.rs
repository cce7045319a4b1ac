//! Exact computation of discrete heat-kernel expansions on the integers and
//! their Toda-lattice structure.
//!
//! The crate computes the coefficients `alpha_k(n, m)` of the Bessel
//! expansion of the fundamental solution of `u_t = L u` for a tridiagonal
//! difference operator `L`, by several independent routes (defining
//! recurrence, wave-function residue formula, contour formula for Darboux
//! operators, generating function for constant coefficients), evaluates the
//! Toda vector fields and their heat-coefficient recombinations, constructs
//! the bispectral Darboux operators with their commuting partners, and
//! certifies the finite two-Bessel closed form of the kernel. Everything
//! algebraic is exact over the rationals; floating point is confined to the
//! Bessel evaluation layer.

pub mod alpha;
pub mod bessel;
pub mod darboux;
pub mod error;
pub mod flows;
pub mod gpoly;
pub mod laurent;
pub mod operator;
pub mod rational;
pub mod rng;
pub mod sequence;
pub mod series;
pub mod verify;
pub mod wave;
pub mod window;

pub use error::{Error, Result};
pub use rational::Rat;
pub use sequence::{Interval, Seq};
pub use window::Window;
