//! Spherical-harmonic calculus: explicit bases, quadrature, projection,
//! product decomposition, and the symmetrized Hessian-trace operators with
//! their degree bounds.

pub mod basis;
pub mod poly;
pub mod quadrature;
pub mod traces;

pub use basis::{BasisEntry, HarmonicBasis, HarmonicCoefficients};
pub use poly::{sphere_area, Poly};
pub use quadrature::SphereQuadrature;
pub use traces::{hessian_traces, qk_recursion_residual, SphereJet, TraceKind};

use crate::error::{Error, Result};

/// Outcome of a degree-bound check: the relative size of harmonic content
/// above the claimed degree.
#[derive(Debug, Clone)]
pub struct DegreeBoundReport {
    pub claimed: usize,
    pub result_norm: f64,
    pub spill_rel: f64,
    pub passed: bool,
}

/// Check that a sphere function (nodal values) has no harmonic content above
/// `claimed` degree, relative tolerance 1e-8. Quadrature insufficiency is an
/// error, not a failure verdict.
pub fn verify_degree_bound(
    basis: &HarmonicBasis,
    values: &[f64],
    claimed: usize,
) -> Result<DegreeBoundReport> {
    if claimed > basis.max_degree {
        return Err(Error::Precision(format!(
            "claimed bound {claimed} exceeds basis max degree {}",
            basis.max_degree
        )));
    }
    let (coeffs, remainder) = basis.project_values(values)?;
    let norm = basis.quad.l2_norm(values).max(1e-300);
    if remainder > 1e-7 * norm && basis.max_degree < 2 * claimed {
        return Err(Error::Precision(format!(
            "projection remainder {remainder:.3e} too large to certify the bound"
        )));
    }
    let mut spill2 = remainder * remainder;
    for (c, e) in coeffs.iter().zip(&basis.entries) {
        if e.degree > claimed {
            spill2 += c * c;
        }
    }
    let spill_rel = spill2.sqrt() / norm;
    Ok(DegreeBoundReport { claimed, result_norm: norm, spill_rel, passed: spill_rel < 1e-8 })
}
