//! Numerical tools for prescribing Gauduchon scalar curvature on flat tori.
//!
//! A conformal change `e^u h` of an almost Hermitian metric transforms the
//! Gauduchon scalar curvatures by an explicit law; prescribing the new
//! curvature reduces to the Kazdan–Warner type equation
//! `Δ_d w + ⟨α, dw⟩ + c = φ e^w`, which [`kw`] solves with sub/super-solutions,
//! monotone iteration and Newton–Krylov.

pub mod error;
pub mod fieldexpr;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod kw;
pub mod linsolve;
pub mod operators;
pub mod random;
pub mod spectral;

pub use error::{KwError, Result};
pub use geometry::{GeometrySetup, ReducedProblem};
pub use grid::{GridSpec, OneForm, ScalarField};
pub use kw::{KWProblem, KwConfig, Method, SolveReport, Status};
pub use linsolve::{LinearConfig, SolveStats};
