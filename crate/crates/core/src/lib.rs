//! Large-margin kernel classifiers and kernel methods.
//!
//! `no_std` with `alloc`. Kernels and low-rank Gram factors, convex surrogate
//! losses and their ψ-transforms, nonsmooth minimizers, RKHS classifiers,
//! exact risk analysis on finite and mixture distributions, kernel CCA and
//! kernel dimension reduction.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod classify;
pub mod kernels;
pub mod kmethods;
pub mod linalg;
pub mod losses;
pub mod optim;
pub mod quadrature;
pub mod rng;
