//! Exact-arithmetic toolkit for formal solutions of the classical
//! Yang-Baxter equation over a finite-dimensional simple Lie algebra.
//!
//! Everything is computed over the rationals at explicit truncation
//! windows. A window is part of every value: residuals are asserted to be
//! *exactly* zero on a guaranteed window, never "small", and coefficients
//! outside a window are treated as unknown rather than zero.
//!
//! The main capabilities, each with a runnable example under `examples/`:
//!
//! * [`lie`] — simple Lie algebras by structure constants: Killing form,
//!   Casimir tensor and the Drinfeld-Jimbo tensor of a triangular
//!   decomposition.
//! * [`series`] — windowed scalar and `g (x) g`-valued series, the standard
//!   form `r = s(y) Omega/(x-y) + g(x,y)` and its two regime expansions,
//!   skew-symmetry residuals.
//! * [`residuals`] — the formal CYBE residual in the mixed trivariate
//!   regime, cobrackets, cocycle / co-Jacobi residuals and the twist
//!   condition.
//! * [`doubles`] — trace extensions of `F[[x]]`, the bilinear forms `B_i`
//!   on `g((x)) x g[x]/x^m g[x]`, and the normalization of trace
//!   extensions.
//! * [`lagrangian`] — the Lagrangian subalgebra `W_r` built from an
//!   r-matrix, the standard subalgebras `W_0..W_3`, twist <-> linear map
//!   <-> subalgebra conversions, and windowed isotropy / duality /
//!   subalgebra / commensurability checks.
//! * [`normalize`] — multiplicity classification of `s(y)`, the residue
//!   obstruction, the normalizing coordinate transformation and coordinate
//!   substitution.
//! * [`gauge`] — polynomial gauge automorphisms of `g[[x]]` acting on
//!   r-matrices and subalgebras.
//! * [`manifest`] / [`cli`] — a JSON batch driver with byte-stable reports
//!   (the `cybe` binary).

pub mod cli;
pub mod doubles;
pub mod gauge;
pub mod lagrangian;
pub mod lie;
pub mod manifest;
pub mod normalize;
pub mod rat;
pub mod report;
pub mod residuals;
pub mod series;

pub use lie::{GElement, LieAlgebra, Tensor2};
pub use rat::Rat;
pub use series::tensor::{StandardRMatrix, Tensor2Series};
pub use series::{Cap, ScalarSeries};
