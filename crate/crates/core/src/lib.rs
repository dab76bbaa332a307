//! Upsilon-type concordance invariants computed from bi-filtered knot
//! complexes over `Z2[U, U^-1]`.
//!
//! The crate is organised around [`complex::KnotComplex`]. Complexes come
//! from staircase and twist-knot families ([`oneone`]), from twisted grid
//! diagrams of lens spaces ([`grid`]) or from JSON. Invariants live in
//! [`upsilon`], and the branched-cover obstructions in [`concordance`].

pub mod complex;
pub mod concordance;
pub mod exec;
pub mod gf2;
pub mod grid;
pub mod models;
pub mod oneone;
pub mod rational;
pub mod regions;
pub mod upsilon;

pub use complex::{ComplexError, KnotComplex};
pub use exec::Exec;
pub use rational::Q;
pub use regions::SouthWestRegion;
pub use upsilon::PiecewiseLinear;
