//! Sparse multivariate polynomials over the ambient space R^n.
//!
//! Spherical harmonics are represented as restrictions of harmonic polynomials
//! to the unit sphere; covariant derivatives on the sphere reduce to ambient
//! partial derivatives followed by tangential projection. Monomials integrate
//! exactly over S^{n-1}, which gives machine-accurate Gram matrices and
//! normalization constants without any quadrature.

use std::collections::BTreeMap;

/// Polynomial in `nvars` variables, stored as exponent-vector -> coefficient.
///
/// BTreeMap keeps term order deterministic, which keeps every downstream
/// reduction and report byte-stable.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u8>, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Poly::zero(nvars);
        if c != 0.0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The coordinate function x_i.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut e = vec![0u8; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(e, 1.0);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, exps: Vec<u8>, c: f64) {
        assert_eq!(exps.len(), self.nvars);
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            // keep the map minimal; exact cancellations happen in the
            // harmonic constructions
        }
    }

    /// Drop terms with |coefficient| below `eps` (used after long products).
    pub fn prune(&mut self, eps: f64) {
        self.terms.retain(|_, c| c.abs() > eps);
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert(0.0);
            *entry += *c;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        if s == 0.0 {
            return Poly::zero(self.nvars);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(e).or_insert(0.0);
                *entry += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn powi(&self, k: usize) -> Poly {
        let mut out = Poly::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to x_i.
    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut en = e.clone();
                en[i] -= 1;
                let entry = out.terms.entry(en).or_insert(0.0);
                *entry += c * f64::from(e[i]);
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<Poly> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    pub fn laplacian(&self) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for i in 0..self.nvars {
            out = out.add(&self.partial(i).partial(i));
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut m = *c;
            for (xi, &ei) in x.iter().zip(e) {
                for _ in 0..ei {
                    m *= *xi;
                }
            }
            acc += m;
        }
        acc
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Exact integral of the polynomial over the unit sphere S^{nvars-1}
    /// (raw surface measure).
    pub fn sphere_integral(&self) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            acc += c * monomial_sphere_integral(self.nvars, e);
        }
        acc
    }

    /// Terms as (exponents, coefficient) pairs in deterministic order.
    pub fn terms_vec(&self) -> Vec<(Vec<u8>, f64)> {
        self.terms.iter().map(|(e, c)| (e.clone(), *c)).collect()
    }

    /// Euler pairing x . grad(p); for homogeneous p of degree d this is d*p.
    pub fn radial_derivative(&self) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for i in 0..self.nvars {
            out = out.add(&Poly::var(self.nvars, i).mul(&self.partial(i)));
        }
        out
    }
}

/// Gamma(k/2) for positive integer k, via the recurrence from Gamma(1/2) and
/// Gamma(1). Exact to f64 rounding for the small arguments used here.
fn gamma_half_integer(k: u64) -> f64 {
    assert!(k >= 1);
    let mut val = if k % 2 == 1 { std::f64::consts::PI.sqrt() } else { 1.0 };
    let mut arg = if k % 2 == 1 { 1u64 } else { 2u64 };
    while arg < k {
        val *= arg as f64 / 2.0;
        arg += 2;
    }
    val
}

/// Integral of x^alpha over S^{n-1}: zero unless every exponent is even, in
/// which case it equals 2 prod Gamma((a_i+1)/2) / Gamma((|a|+n)/2).
pub fn monomial_sphere_integral(n: usize, exps: &[u8]) -> f64 {
    if exps.iter().any(|&e| e % 2 == 1) {
        return 0.0;
    }
    let total: u64 = exps.iter().map(|&e| u64::from(e)).sum();
    let mut num = 2.0;
    for &e in exps {
        num *= gamma_half_integer(u64::from(e) + 1);
    }
    num / gamma_half_integer(total + n as u64)
}

/// Surface area of S^{n-1}.
pub fn sphere_area(n: usize) -> f64 {
    monomial_sphere_integral(n, &vec![0u8; n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas_match_closed_forms() {
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
    }

    #[test]
    fn monomial_integrals() {
        // int x^2 over S^2 = |S^2|/3
        let mut e = vec![0u8; 3];
        e[0] = 2;
        let v = monomial_sphere_integral(3, &e);
        assert!((v - sphere_area(3) / 3.0).abs() < 1e-13);
        // odd exponent vanishes
        e[1] = 1;
        assert_eq!(monomial_sphere_integral(3, &e), 0.0);
    }

    #[test]
    fn calculus_ops() {
        let n = 3;
        let x = Poly::var(n, 0);
        let y = Poly::var(n, 1);
        let p = x.mul(&x).add(&x.mul(&y).scale(2.0)); // x^2 + 2xy
        let px = p.partial(0); // 2x + 2y
        assert!((px.eval(&[1.0, 2.0, 0.0]) - 6.0).abs() < 1e-15);
        assert_eq!(p.total_degree(), 2);
        // harmonic polynomial x^2 - y^2 has zero Laplacian
        let h = x.mul(&x).sub(&y.mul(&y));
        assert!(h.laplacian().is_zero());
    }
}
