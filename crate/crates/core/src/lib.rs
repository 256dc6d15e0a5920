//! Higher order fermionic and bosonic operators of spin 1 and 3/2 on flat
//! space, together with their fundamental-solution kernels and the periodized
//! kernel series living on l-cylinders, tori and Hopf manifolds.
//!
//! The crate is organized around a dense real Clifford algebra ([`clifford`]),
//! a truncated-Taylor jet engine used to apply the differential operators
//! exactly ([`jets`]), the closed-form kernels ([`kernels`]), the operators
//! themselves ([`operators`]), the lattice and dilation series ([`cylinder`],
//! [`hopf`]) and a verification harness ([`verify`]).

pub mod accum;
pub mod clifford;
pub mod cylinder;
pub mod error;
pub mod hopf;
pub mod jets;
pub mod kernels;
pub mod operators;
pub mod verify;

pub use clifford::{
    reflect, reflect_coords, vector_inverse, vector_inverse_with, InversionConvention,
    Multivector,
};
pub use error::{Error, Result};
pub use jets::Jet;
pub use kernels::{e_1k, g_k, z1_harmonic, z1_monogenic, KernelParams, Parity, ULinearValue};
pub use operators::OperatorSpec;
