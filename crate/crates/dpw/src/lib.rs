//! Construction of integrable surfaces by the generalized DPW method.
//!
//! The pipeline runs from a pair of holomorphic potentials to a discretized
//! surface: integrate the holomorphic frames ([`ode`]), impose the real form
//! ([`realform`]), split on the big cell ([`factor`]), apply the Sym–Bobenko
//! formula ([`sym`]) and verify the resulting geometry ([`geometry`]).
//! [`cli`] wires these stages into the `dpw` command line tool.

pub mod cli;
pub mod factor;
pub mod geometry;
pub mod loopalg;
pub mod ode;
pub mod potential;
pub mod realform;
pub mod sym;
