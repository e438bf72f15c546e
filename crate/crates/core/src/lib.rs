//! Minimum-probability-of-error measurements for symmetric coherent-state codebooks.
//!
//! The crate answers one question: given an ensemble of coherent-state
//! codewords with priors, which quantum measurement minimizes the average
//! probability of misidentifying the transmitted word, and what error does it
//! achieve? Everything runs on the Gram matrix of the ensemble, so state
//! vectors never leave a finite-dimensional coordinate space.
//!
//! The main entry points, bottom up:
//!
//! * [`coherent`] builds codebooks (PPM, two-pulse PPM, phase-coded PPM, BPSK
//!   over a binary linear code) and their Gram matrices.
//! * [`matfun`] is the dense Hermitian kernel: spectral decomposition, PSD
//!   square root, polar decomposition.
//! * [`symmetry`] handles permutation groups acting on codeword indices:
//!   orbits, Gram automorphisms, characters, isotypic projectors, double
//!   cosets.
//! * [`gu`] computes the pretty good measurement and the closed forms that
//!   hold when the group acts transitively (geometrically uniform sets).
//! * [`cgu`] solves the multi-orbit case by Fourier block reduction plus a
//!   Newton search over the residual measurement freedom, and contains the
//!   symmetry-reduced solver for ensembles with only a partial symmetry.
//! * [`ykl`] certifies any proposed measurement against the optimality
//!   conditions (two equalities and an operator inequality).
//! * [`baselines`] evaluates conventional receivers (photon counting,
//!   homodyne, Dolinar-switched) for comparison sweeps.

pub mod baselines;
pub mod cgu;
pub mod coherent;
pub mod error;
pub mod gu;
pub mod matfun;
pub mod symmetry;
mod util;
pub mod ykl;

pub use error::{Error, Result};
pub use matfun::{ComplexMatrix, HermitianMatrix, C64};
