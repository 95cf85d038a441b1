//! Numerical machinery for singular solutions of the Yamabe and
//! sigma_k-Yamabe equations on the half-cylinder R_+ x S^{n-1}:
//! radial (Delaunay/Fowler-type) profiles and their conserved quantity,
//! kernels of the projected linearized operators, expansion index sets,
//! asymptotic-term extraction, and the spherical-harmonic calculus that
//! supports all of it.
//!
//! Everything is desk-scale and deterministic; the library favors explicit
//! constructions (exact eigenvalues, exact sphere integrals, closed-form
//! kernels where they exist) over generic machinery, so that every fitted
//! quantity can be cross-checked against an independent route.
//!
//! The main pipelines:
//!
//! * [`radial`] - radial profiles, first-integral bookkeeping, period
//!   detection, and the tail expansion of unbounded profiles.
//! * [`kernels`] - kernel bases (closed-form, asymptotic shooting, Floquet),
//!   variation-of-parameters particular solutions, and modewise solves with a
//!   certified tail bound.
//! * [`sigma`] - the curvature-matrix algebra on the cylinder, equation
//!   residuals, the linearization/remainder split, and the averaged
//!   first-integral identity.
//! * [`index_set`] - admissible decay-rate ladders per regime, with witness
//!   multisets and resonance flags.
//! * [`expansion`] - improved radial matching, the order-1 term, and
//!   arbitrary-order extraction with resonant t-powers.
//! * [`pde`] - a spectral-collocation Newton solver that manufactures
//!   singular solutions on a truncated cylinder, plus synthetic fields for
//!   oracle tests.
//!
//! See the `examples/` directory for one runnable example per capability and
//! the `sigmak` binary for the batch CLI.

pub mod error;
pub mod fit;
pub mod ode;
pub mod radial;
pub mod sphere;
pub mod symfunc;

pub use error::{Error, Result};

/// Library version embedded in every report for reproducibility.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
