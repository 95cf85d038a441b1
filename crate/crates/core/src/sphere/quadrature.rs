//! Product quadrature on S^{n-1}, exact for polynomials up to a stated degree.
//!
//! The rule is built recursively: S^1 uses uniform azimuth nodes, and each
//! higher sphere adds a Gauss-Gegenbauer level in the polar cosine (weight
//! (1-u^2)^{(n-3)/2}), so S^2 is the classical Gauss-Legendre x uniform-azimuth
//! rule. Every node also carries a deterministic orthonormal tangent frame,
//! used to express covariant derivatives of restricted polynomials.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    /// Ambient dimension; the sphere is S^{n-1}.
    pub n: usize,
    /// Polynomials of total degree <= exact_degree integrate exactly.
    pub exact_degree: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Per node, an orthonormal basis of the tangent space (n-1 vectors).
    pub frames: Vec<Vec<DVector<f64>>>,
}

impl SphereQuadrature {
    pub fn build(n: usize, exact_degree: usize) -> Result<Self> {
        if !(2..=5).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let (nodes, weights) = sphere_rule(n, exact_degree);
        let frames = nodes.iter().map(|x| tangent_frame(x)).collect();
        Ok(SphereQuadrature { n, exact_degree, nodes, weights, frames })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature of nodal values against the raw surface measure.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        let mut acc = 0.0;
        for (w, v) in self.weights.iter().zip(values) {
            acc += w * v;
        }
        acc
    }

    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (w, v) in self.weights.iter().zip(values) {
            acc += w * v * v;
        }
        acc.max(0.0).sqrt()
    }
}

/// Gauss quadrature for the weight (1-x^2)^{lambda} on [-1,1], where
/// 2*lambda = `lambda_twice` >= 0, via the Golub-Welsch eigenvalue method.
fn gauss_gegenbauer(npts: usize, lambda_twice: i64) -> (Vec<f64>, Vec<f64>) {
    assert!(npts >= 1);
    let lam = lambda_twice as f64 / 2.0;
    // mu0 = 2^{2lam+1} Gamma(lam+1)^2 / Gamma(2lam+2)
    let mu0 = 2f64.powf(2.0 * lam + 1.0) * gamma_half(2 * lambda_twice as u64 / 2 + 2).powi(2)
        / gamma_half(2 * (lambda_twice as u64 + 2));
    // Symmetric Jacobi matrix: zero diagonal, b_k^2 = k(k+2lam)/((2k+2lam)^2-1)
    let mut jac = DMatrix::<f64>::zeros(npts, npts);
    for k in 1..npts {
        let kf = k as f64;
        let b2 = kf * (kf + 2.0 * lam) / ((2.0 * kf + 2.0 * lam).powi(2) - 1.0);
        let b = b2.sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..npts)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let w = mu0 * eig.eigenvectors[(0, i)].powi(2);
            (node, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // enforce exact symmetry of the rule about 0
    let m = pairs.len();
    for i in 0..m / 2 {
        let a = pairs[i].0;
        let b = pairs[m - 1 - i].0;
        let node = 0.5 * (b - a);
        pairs[i].0 = -node;
        pairs[m - 1 - i].0 = node;
        let w = 0.5 * (pairs[i].1 + pairs[m - 1 - i].1);
        pairs[i].1 = w;
        pairs[m - 1 - i].1 = w;
    }
    if m % 2 == 1 {
        pairs[m / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Gamma(k/2) for integer k >= 1 (duplicated from poly.rs on purpose: the
/// quadrature does not depend on the polynomial module).
fn gamma_half(k: u64) -> f64 {
    let mut val = if k % 2 == 1 { std::f64::consts::PI.sqrt() } else { 1.0 };
    let mut arg = if k % 2 == 1 { 1u64 } else { 2u64 };
    while arg < k {
        val *= arg as f64 / 2.0;
        arg += 2;
    }
    val
}

fn sphere_rule(n: usize, exact: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if n == 2 {
        let mut m = exact + 2;
        if m % 2 == 1 {
            m += 1;
        }
        let w = 2.0 * std::f64::consts::PI / m as f64;
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for j in 0..m {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            nodes.push(vec![phi.cos(), phi.sin()]);
            weights.push(w);
        }
        return (nodes, weights);
    }
    let (sub_nodes, sub_weights) = sphere_rule(n - 1, exact);
    let npts = exact / 2 + 2;
    let (us, ws) = gauss_gegenbauer(npts, (n as i64) - 3);
    let mut nodes = Vec::with_capacity(us.len() * sub_nodes.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (u, wu) in us.iter().zip(&ws) {
        let s = (1.0 - u * u).max(0.0).sqrt();
        for (y, wy) in sub_nodes.iter().zip(&sub_weights) {
            let mut x = Vec::with_capacity(n);
            x.push(*u);
            for yi in y {
                x.push(s * yi);
            }
            nodes.push(x);
            weights.push(wu * wy);
        }
    }
    (nodes, weights)
}

/// Deterministic orthonormal tangent frame at a unit vector x: greedy
/// Gram-Schmidt of the coordinate axes against x, largest residual first.
fn tangent_frame(x: &[f64]) -> Vec<DVector<f64>> {
    let n = x.len();
    let xv = DVector::from_column_slice(x);
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    while frame.len() < n - 1 {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for j in 0..n {
            let mut v = DVector::zeros(n);
            v[j] = 1.0;
            let mut w = v.clone();
            w -= &xv * xv.dot(&v);
            for f in &frame {
                let c = f.dot(&w);
                w -= f * c;
            }
            let norm = w.norm();
            if best.as_ref().map_or(true, |(bn, _)| norm > *bn + 1e-12) {
                best = Some((norm, w));
            }
        }
        let (norm, w) = best.unwrap();
        assert!(norm > 1e-8, "degenerate tangent frame");
        frame.push(w / norm);
    }
    frame
}
