//! Orthonormal spherical-harmonic bases for S^2, S^3, S^4.
//!
//! Each basis function is an explicit homogeneous harmonic polynomial,
//! built by the classical zonal recursion: on S^1 the pair Re/Im (x+iy)^d,
//! and on S^m the Gegenbauer ladder
//!     f = G_{d-l}^{(l+(m-1)/2)}(x_1; r^2) * g(x_2..x_{m+1}),
//! where g runs over the degree-l basis of S^{m-1} and G is the homogenized
//! Gegenbauer polynomial. For S^2 this is the associated-Legendre family.
//! Normalization constants come from exact monomial integration over the
//! sphere, so the basis is orthonormal to machine precision.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sphere::poly::Poly;
use crate::sphere::quadrature::SphereQuadrature;

/// Jet of a basis function at quadrature nodes, in tangent-frame components.
#[derive(Debug, Clone)]
pub struct EntryJet {
    pub grad: Vec<DVector<f64>>,
    pub hess: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct BasisEntry {
    pub index: usize,
    pub degree: usize,
    /// Eigenvalue of -Laplace_theta: d(d+n-2), exact integer.
    pub eigenvalue: f64,
    pub poly: Poly,
    pub values: Vec<f64>,
    pub jet: EntryJet,
}

#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub n: usize,
    pub max_degree: usize,
    pub quad: SphereQuadrature,
    pub entries: Vec<BasisEntry>,
}

/// Coefficients of a projection onto the basis, one row per t-grid point.
/// For a single sphere function the grid is the singleton [0].
#[derive(Debug, Clone)]
pub struct HarmonicCoefficients {
    pub t_grid: Vec<f64>,
    /// coeffs[j][i] = coefficient of mode i at t_grid[j].
    pub coeffs: Vec<Vec<f64>>,
    /// L2 norm of the unprojected remainder at each t.
    pub remainder_l2: Vec<f64>,
}

impl HarmonicBasis {
    /// Build the basis through `max_degree` with quadrature exact through
    /// 2*max_degree + 4 (products and Hessian traces at most double the
    /// degree, plus a curvature shift).
    pub fn build(n: usize, max_degree: usize) -> Result<Self> {
        Self::build_with_exactness(n, max_degree, 2 * max_degree + 4)
    }

    pub fn build_with_exactness(n: usize, max_degree: usize, exact: usize) -> Result<Self> {
        if !(3..=5).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if exact < 2 * max_degree {
            return Err(Error::Precision(format!(
                "exactness {exact} below 2*max_degree = {}",
                2 * max_degree
            )));
        }
        let quad = SphereQuadrature::build(n, exact)?;
        let mut entries = Vec::new();
        for d in 0..=max_degree {
            for raw in chain_polys(n, d) {
                let norm2 = raw.mul(&raw).sphere_integral();
                assert!(norm2 > 0.0, "degenerate chain polynomial");
                let poly = raw.scale(1.0 / norm2.sqrt());
                let lap = poly.laplacian();
                debug_assert!(
                    lap.is_zero()
                        || lap
                            .mul(&lap)
                            .sphere_integral()
                            .abs()
                            .sqrt()
                            < 1e-9,
                    "chain polynomial is not harmonic"
                );
                let values: Vec<f64> = quad.nodes.iter().map(|x| poly.eval(x)).collect();
                let jet = restrict_jet(&poly, &quad);
                entries.push(BasisEntry {
                    index: entries.len(),
                    degree: d,
                    eigenvalue: (d * (d + n - 2)) as f64,
                    poly,
                    values,
                    jet,
                });
            }
        }
        Ok(HarmonicBasis { n, max_degree, quad, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of basis functions of degree <= d.
    pub fn dim_through_degree(&self, d: usize) -> usize {
        self.entries.iter().take_while(|e| e.degree <= d).count()
    }

    /// Largest basis index whose degree does not exceed `d` (None if d < 0
    /// cannot happen; the constant always qualifies).
    pub fn max_index_with_degree(&self, d: usize) -> usize {
        self.dim_through_degree(d.min(self.max_degree)) - 1
    }

    /// L2 projection of nodal values onto every basis mode, plus the norm of
    /// what the truncated basis cannot represent.
    pub fn project_values(&self, values: &[f64]) -> Result<(Vec<f64>, f64)> {
        if values.len() != self.quad.len() {
            return Err(Error::ShapeMismatch(format!(
                "field sampled at {} nodes, quadrature has {}",
                values.len(),
                self.quad.len()
            )));
        }
        let coeffs: Vec<f64> = self
            .entries
            .iter()
            .map(|e| {
                let mut acc = 0.0;
                for ((w, v), b) in self.quad.weights.iter().zip(values).zip(&e.values) {
                    acc += w * v * b;
                }
                acc
            })
            .collect();
        let recon = self.reconstruct(&coeffs);
        let resid: Vec<f64> = values.iter().zip(&recon).map(|(v, r)| v - r).collect();
        Ok((coeffs, self.quad.l2_norm(&resid)))
    }

    pub fn reconstruct(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.quad.len()];
        for (c, e) in coeffs.iter().zip(&self.entries) {
            if *c != 0.0 {
                for (o, b) in out.iter_mut().zip(&e.values) {
                    *o += c * b;
                }
            }
        }
        out
    }

    /// Decompose the pointwise product X_i * X_j over the basis. The content
    /// above degree deg(X_i) + deg(X_j) must vanish; its size is returned as
    /// the spill.
    pub fn decompose_product(&self, i: usize, j: usize) -> Result<(Vec<f64>, f64)> {
        let (di, dj) = (self.entries[i].degree, self.entries[j].degree);
        if 2 * (di + dj) > self.quad.exact_degree {
            return Err(Error::Precision(format!(
                "product degree {} exceeds what the quadrature resolves ({})",
                di + dj,
                self.quad.exact_degree / 2
            )));
        }
        let prod: Vec<f64> = self.entries[i]
            .values
            .iter()
            .zip(&self.entries[j].values)
            .map(|(a, b)| a * b)
            .collect();
        let (coeffs, _) = self.project_values(&prod)?;
        let bound = di + dj;
        let mut spill: f64 = 0.0;
        for (c, e) in coeffs.iter().zip(&self.entries) {
            if e.degree > bound {
                spill = spill.max(c.abs());
            }
        }
        Ok((coeffs, spill))
    }

    /// Max |Gram - I| entry over the quadrature-exact range.
    pub fn gram_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.entries {
            for b in &self.entries {
                if a.degree + b.degree > self.quad.exact_degree {
                    continue;
                }
                let prod: Vec<f64> =
                    a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
                let g = self.quad.integrate(&prod);
                let want = if a.index == b.index { 1.0 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
        worst
    }

    /// Project a function given on the quadrature nodes at several t-slices.
    pub fn project_slices(
        &self,
        t_grid: &[f64],
        slices: &[Vec<f64>],
    ) -> Result<HarmonicCoefficients> {
        if t_grid.len() != slices.len() {
            return Err(Error::ShapeMismatch("t grid and slice count differ".into()));
        }
        let mut coeffs = Vec::with_capacity(slices.len());
        let mut rem = Vec::with_capacity(slices.len());
        for s in slices {
            let (c, r) = self.project_values(s)?;
            coeffs.push(c);
            rem.push(r);
        }
        Ok(HarmonicCoefficients { t_grid: t_grid.to_vec(), coeffs, remainder_l2: rem })
    }
}

/// Unnormalized harmonic chain polynomials of exact degree d on S^{n-1},
/// as ambient polynomials in n variables.
fn chain_polys(n: usize, d: usize) -> Vec<Poly> {
    if n == 2 {
        return circle_polys(d);
    }
    let m = n - 1; // sphere dimension
    let mut out = Vec::new();
    for l in 0..=d {
        let subs = chain_polys(n - 1, l);
        // Gegenbauer parameter alpha = l + (m-1)/2; store 2*alpha.
        let alpha_twice = (2 * l + m - 1) as i64;
        let k = gegenbauer_homogenized(d - l, alpha_twice, n);
        for g_sub in subs {
            let g = embed_shift(&g_sub, n);
            out.push(k.mul(&g));
        }
    }
    out
}

fn circle_polys(d: usize) -> Vec<Poly> {
    if d == 0 {
        return vec![Poly::constant(2, 1.0)];
    }
    // Re and Im of (x + i y)^d via binomial expansion
    let mut re = Poly::zero(2);
    let mut im = Poly::zero(2);
    let mut binom = 1.0f64;
    for j in 0..=d {
        let mut e = vec![0u8; 2];
        e[0] = (d - j) as u8;
        e[1] = j as u8;
        match j % 4 {
            0 => re.add_term(e, binom),
            1 => im.add_term(e, binom),
            2 => re.add_term(e, -binom),
            _ => im.add_term(e, -binom),
        }
        binom = binom * (d - j) as f64 / (j + 1) as f64;
    }
    vec![re, im]
}

/// r^q C_q^{(alpha)}(x_0 / r) as a polynomial in x_0 and s^2 = x_1^2+..+x_{n-1}^2,
/// homogenized with r^2 = x_0^2 + s^2. `alpha_twice` = 2*alpha.
fn gegenbauer_homogenized(q: usize, alpha_twice: i64, nvars: usize) -> Poly {
    let alpha = alpha_twice as f64 / 2.0;
    let mut r2 = Poly::zero(nvars);
    for i in 0..nvars {
        r2 = r2.add(&Poly::var(nvars, i).powi(2));
    }
    let x0 = Poly::var(nvars, 0);
    let mut out = Poly::zero(nvars);
    for j in 0..=q / 2 {
        // (-1)^j * rising(alpha, q-j) / (j! (q-2j)!) * 2^{q-2j}
        let mut c = if j % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..(q - j) {
            c *= alpha + i as f64;
        }
        for i in 1..=j {
            c /= i as f64;
        }
        for i in 1..=(q - 2 * j) {
            c /= i as f64;
        }
        c *= 2f64.powi((q - 2 * j) as i32);
        let term = x0.powi(q - 2 * j).mul(&r2.powi(j)).scale(c);
        out = out.add(&term);
    }
    out
}

/// Embed a polynomial in (n-1) variables as one in n variables acting on the
/// last n-1 coordinates.
fn embed_shift(p_sub: &Poly, n: usize) -> Poly {
    let mut out = Poly::zero(n);
    for (e, c) in p_sub_terms(p_sub) {
        let mut en = vec![0u8; n];
        en[1..].copy_from_slice(&e);
        out.add_term(en, c);
    }
    out
}

fn p_sub_terms(p: &Poly) -> Vec<(Vec<u8>, f64)> {
    // reconstruct terms by evaluating partials is wasteful; expose via Debug
    // would be brittle. Instead rebuild from the public API: differentiate to
    // probe is overkill, so Poly gives us iteration through `terms_vec`.
    p.terms_vec()
}

/// Jet of a polynomial restricted to the sphere, at every quadrature node.
/// grad = F^T grad(P), hess = F^T hess(P) F - (x . grad P) I, with F the
/// tangent frame (second fundamental form of the unit sphere).
pub fn restrict_jet(p: &Poly, quad: &SphereQuadrature) -> EntryJet {
    let n = quad.n;
    let grad_p = p.gradient();
    let hess_p: Vec<Vec<Poly>> =
        (0..n).map(|i| (0..n).map(|j| grad_p[i].partial(j)).collect()).collect();
    let m = n - 1;
    let mut grads = Vec::with_capacity(quad.len());
    let mut hesses = Vec::with_capacity(quad.len());
    for (x, frame) in quad.nodes.iter().zip(&quad.frames) {
        let gp = DVector::from_iterator(n, grad_p.iter().map(|g| g.eval(x)));
        let mut hp = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = 0.5 * (hess_p[i][j].eval(x) + hess_p[j][i].eval(x));
                hp[(i, j)] = v;
                hp[(j, i)] = v;
            }
        }
        let radial: f64 = x.iter().zip(gp.iter()).map(|(a, b)| a * b).sum();
        let mut g_t = DVector::zeros(m);
        let mut h_t = DMatrix::zeros(m, m);
        for a in 0..m {
            g_t[a] = frame[a].dot(&gp);
            for b in 0..=a {
                let v = (frame[a].transpose() * &hp * &frame[b])[(0, 0)]
                    - if a == b { radial } else { 0.0 };
                h_t[(a, b)] = v;
                h_t[(b, a)] = v;
            }
        }
        grads.push(g_t);
        hesses.push(h_t);
    }
    EntryJet { grad: grads, hess: hesses }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_are_the_standard_spectrum() {
        // degree-1 eigenvalue n-1, degree-2 eigenvalue 2n
        let b3 = HarmonicBasis::build(3, 2).unwrap();
        assert_eq!(b3.entries[0].eigenvalue, 0.0);
        assert_eq!(b3.entries[1].eigenvalue, 2.0);
        let b4 = HarmonicBasis::build(4, 2).unwrap();
        let first_deg2 = b4.entries.iter().find(|e| e.degree == 2).unwrap();
        assert_eq!(first_deg2.eigenvalue, 8.0);
    }

    #[test]
    fn mode_zero_is_normalized_constant() {
        for n in 3..=5 {
            let b = HarmonicBasis::build(n, 1).unwrap();
            let want = 1.0 / crate::sphere::poly::sphere_area(n).sqrt();
            for v in &b.entries[0].values {
                assert!((v - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gram_is_identity() {
        for (n, d) in [(3usize, 4usize), (4, 3), (5, 2)] {
            let b = HarmonicBasis::build(n, d).unwrap();
            assert!(b.gram_error() < 1e-10, "gram error {} for n={n}", b.gram_error());
        }
    }

    #[test]
    fn laplace_eigen_relation_via_jets() {
        // trace of the covariant Hessian must equal -lambda * X at every node
        let b = HarmonicBasis::build(4, 3).unwrap();
        for e in &b.entries {
            for (q, h) in e.jet.hess.iter().enumerate() {
                let lap = h.trace();
                assert!(
                    (lap + e.eigenvalue * e.values[q]).abs() < 1e-9,
                    "degree {} node {q}",
                    e.degree
                );
            }
        }
    }

    #[test]
    fn counts_match_harmonic_dimensions() {
        // dim H_d(S^{n-1}) = C(n+d-1,d) - C(n+d-3,d-2)
        fn dim(n: usize, d: usize) -> usize {
            fn c(a: usize, b: usize) -> usize {
                if b > a {
                    return 0;
                }
                let mut v = 1usize;
                for i in 0..b {
                    v = v * (a - i) / (i + 1);
                }
                v
            }
            if d < 2 {
                c(n + d - 1, d)
            } else {
                c(n + d - 1, d) - c(n + d - 3, d - 2)
            }
        }
        for n in 3..=5 {
            let b = HarmonicBasis::build(n, 3).unwrap();
            for d in 0..=3 {
                let count = b.entries.iter().filter(|e| e.degree == d).count();
                assert_eq!(count, dim(n, d), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn projection_is_exact_on_basis_elements() {
        let b = HarmonicBasis::build(3, 3).unwrap();
        let (coeffs, rem) = b.project_values(&b.entries[3].values).unwrap();
        for (i, c) in coeffs.iter().enumerate() {
            let want = if i == 3 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-10);
        }
        assert!(rem < 1e-10);
    }

    #[test]
    fn product_of_degree_ones_lives_in_even_degrees() {
        let b = HarmonicBasis::build(3, 4).unwrap();
        // zonal degree-1 squared on S^2: degree-1 content must vanish by parity
        let (coeffs, spill) = b.decompose_product(1, 1).unwrap();
        assert!(spill < 1e-10);
        for (c, e) in coeffs.iter().zip(&b.entries) {
            if e.degree == 1 || e.degree == 3 {
                assert!(c.abs() < 1e-10, "odd-degree content {c}");
            }
        }
    }
}
