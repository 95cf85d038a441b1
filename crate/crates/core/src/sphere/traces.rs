//! Symmetrized Hessian-trace operators on the sphere and their degree bounds.
//!
//! For functions phi^1..phi^k on an interval x sphere, the operators are
//!
//!   H_k = sum over permutations of tr(Hess phi^{t1} o ... o Hess phi^{tk}),
//!   Q_k = sum over permutations of (Hess o ... o Hess)(grad phi, grad phi),
//!   P1_k, P2_k = the variants with one resp. two factors carrying a
//!                t-derivative inside the gradient slots,
//!
//! all with covariant sphere derivatives and no second t-derivatives.
//! Two evaluation routes are provided: a nodewise contraction of tangent-frame
//! jets, and a symbolic route that manipulates ambient polynomial
//! representatives (needed where jets of derived functions such as
//! <grad phi, grad psi> enter, e.g. the Q_k reduction identity).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sphere::poly::Poly;
use crate::sphere::quadrature::SphereQuadrature;

/// Jet of a sphere function at quadrature nodes (tangent-frame components).
/// `val_t`, `grad_t`, `val_tt` are the t-derivative rows for functions that
/// also depend on the cylinder coordinate; pure sphere functions leave them
/// zero.
#[derive(Debug, Clone)]
pub struct SphereJet {
    pub val: Vec<f64>,
    pub grad: Vec<DVector<f64>>,
    pub hess: Vec<DMatrix<f64>>,
    pub val_t: Vec<f64>,
    pub grad_t: Vec<DVector<f64>>,
    pub val_tt: Vec<f64>,
}

impl SphereJet {
    pub fn from_poly(p: &Poly, quad: &SphereQuadrature) -> Self {
        let jet = crate::sphere::basis::restrict_jet(p, quad);
        let val: Vec<f64> = quad.nodes.iter().map(|x| p.eval(x)).collect();
        let m = quad.n - 1;
        let len = quad.len();
        SphereJet {
            val,
            grad: jet.grad,
            hess: jet.hess,
            val_t: vec![0.0; len],
            grad_t: vec![DVector::zeros(m); len],
            val_tt: vec![0.0; len],
        }
    }

    /// Jet of c(t) * p(theta) at a fixed t, given (c, c', c'').
    pub fn separable(p: &Poly, quad: &SphereQuadrature, c: f64, ct: f64, ctt: f64) -> Self {
        let base = SphereJet::from_poly(p, quad);
        SphereJet {
            val: base.val.iter().map(|v| c * v).collect(),
            grad: base.grad.iter().map(|g| g * c).collect(),
            hess: base.hess.iter().map(|h| h * c).collect(),
            val_t: base.val.iter().map(|v| ct * v).collect(),
            grad_t: base.grad.iter().map(|g| g * ct).collect(),
            val_tt: base.val.iter().map(|v| ctt * v).collect(),
        }
    }

    pub fn add(&self, other: &SphereJet) -> SphereJet {
        SphereJet {
            val: zip_add(&self.val, &other.val),
            grad: self.grad.iter().zip(&other.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&other.hess).map(|(a, b)| a + b).collect(),
            val_t: zip_add(&self.val_t, &other.val_t),
            grad_t: self.grad_t.iter().zip(&other.grad_t).map(|(a, b)| a + b).collect(),
            val_tt: zip_add(&self.val_tt, &other.val_tt),
        }
    }

    pub fn scale(&self, s: f64) -> SphereJet {
        SphereJet {
            val: self.val.iter().map(|v| s * v).collect(),
            grad: self.grad.iter().map(|g| g * s).collect(),
            hess: self.hess.iter().map(|h| h * s).collect(),
            val_t: self.val_t.iter().map(|v| s * v).collect(),
            grad_t: self.grad_t.iter().map(|g| g * s).collect(),
            val_tt: self.val_tt.iter().map(|v| s * v).collect(),
        }
    }

    /// Max asymmetry of the stored Hessians (zero by construction here, but
    /// asserted as an invariant on external inputs).
    pub fn hessian_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for h in &self.hess {
            for a in 0..h.nrows() {
                for b in 0..a {
                    worst = worst.max((h[(a, b)] - h[(b, a)]).abs());
                }
            }
        }
        worst
    }
}

fn zip_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// tr of a product of Hessians; k = 0 gives the constant n-1.
    H,
    /// Hessian chain applied to two gradients.
    Q,
    /// Hessian chain applied to (grad phi, grad phi_t).
    P1,
    /// Hessian chain applied to (grad phi_t, grad phi_t).
    P2,
}

/// Evaluate the symmetrized operator on the given jets at every node.
pub fn hessian_traces(jets: &[&SphereJet], kind: TraceKind, m: usize) -> Result<Vec<f64>> {
    let k = jets.len();
    let min = match kind {
        TraceKind::H => 0,
        _ => 2,
    };
    if k < min {
        return Err(Error::Arity { min, got: k });
    }
    if kind == TraceKind::H && k == 0 {
        return Ok(vec![m as f64]);
    }
    let nodes = jets[0].val.len();
    let perms = permutations(k);
    let mut out = vec![0.0; nodes];
    for q in 0..nodes {
        let mut acc = 0.0;
        for perm in &perms {
            acc += match kind {
                TraceKind::H => {
                    let mut mprod = jets[perm[0]].hess[q].clone();
                    for &p in &perm[1..] {
                        mprod *= &jets[p].hess[q];
                    }
                    mprod.trace()
                }
                TraceKind::Q => chain_bilinear(
                    jets,
                    perm,
                    q,
                    &jets[perm[k - 2]].grad[q],
                    &jets[perm[k - 1]].grad[q],
                    m,
                ),
                TraceKind::P1 => chain_bilinear(
                    jets,
                    perm,
                    q,
                    &jets[perm[k - 2]].grad[q],
                    &jets[perm[k - 1]].grad_t[q],
                    m,
                ),
                TraceKind::P2 => chain_bilinear(
                    jets,
                    perm,
                    q,
                    &jets[perm[k - 2]].grad_t[q],
                    &jets[perm[k - 1]].grad_t[q],
                    m,
                ),
            };
        }
        out[q] = acc;
    }
    Ok(out)
}

fn chain_bilinear(
    jets: &[&SphereJet],
    perm: &[usize],
    q: usize,
    left: &DVector<f64>,
    right: &DVector<f64>,
    m: usize,
) -> f64 {
    let k = perm.len();
    if k == 2 {
        return left.dot(right);
    }
    let mut mprod = jets[perm[0]].hess[q].clone();
    for &p in &perm[1..k - 2] {
        mprod *= &jets[p].hess[q];
    }
    debug_assert_eq!(mprod.nrows(), m);
    (left.transpose() * mprod * right)[(0, 0)]
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..k).collect();
    heap_permute(&mut items, k, &mut out);
    out.sort();
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

// ---------------------------------------------------------------------------
// Symbolic route: ambient polynomial representatives.
// On the unit sphere, with P = I - x x^T,
//   grad_theta phi  ~ P grad(Phi)
//   Hess_theta phi  ~ P Hess(Phi) P - (x . grad Phi) P
// as ambient tensors annihilating x; traces and contractions of these
// representatives equal the covariant ones.
// ---------------------------------------------------------------------------

/// Ambient matrix representative of the covariant Hessian (n x n polynomials).
pub fn hessian_matrix_sym(phi: &Poly) -> Vec<Vec<Poly>> {
    let n = phi.nvars();
    let grad = phi.gradient();
    let radial = phi.radial_derivative(); // x . grad Phi
    let proj = projector(n);
    // P H P - radial * P
    let mut hp = vec![vec![Poly::zero(n); n]; n];
    for i in 0..n {
        for j in 0..n {
            hp[i][j] = grad[i].partial(j);
        }
    }
    let ph = mat_mul(&proj, &hp);
    let php = mat_mul(&ph, &proj);
    let mut out = vec![vec![Poly::zero(n); n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = php[i][j].sub(&radial.mul(&proj[i][j]));
        }
    }
    out
}

/// Ambient vector representative of the covariant gradient.
pub fn gradient_vec_sym(phi: &Poly) -> Vec<Poly> {
    let n = phi.nvars();
    let grad = phi.gradient();
    let radial = phi.radial_derivative();
    (0..n).map(|i| grad[i].sub(&Poly::var(n, i).mul(&radial))).collect()
}

/// <grad_theta a, grad_theta b> as an ambient polynomial (valid on the sphere).
pub fn grad_inner_sym(a: &Poly, b: &Poly) -> Poly {
    let n = a.nvars();
    let (ga, gb) = (a.gradient(), b.gradient());
    let mut dot = Poly::zero(n);
    for i in 0..n {
        dot = dot.add(&ga[i].mul(&gb[i]));
    }
    dot.sub(&a.radial_derivative().mul(&b.radial_derivative()))
}

fn projector(n: usize) -> Vec<Vec<Poly>> {
    let mut p = vec![vec![Poly::zero(n); n]; n];
    for i in 0..n {
        for j in 0..n {
            let xx = Poly::var(n, i).mul(&Poly::var(n, j));
            p[i][j] = if i == j { Poly::constant(n, 1.0).sub(&xx) } else { xx.scale(-1.0) };
        }
    }
    p
}

fn mat_mul(a: &[Vec<Poly>], b: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let n = a.len();
    let mut out = vec![vec![Poly::zero(n); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Poly::zero(n);
            for l in 0..n {
                acc = acc.add(&a[i][l].mul(&b[l][j]));
            }
            acc.prune(0.0);
            out[i][j] = acc;
        }
    }
    out
}

fn mat_vec(a: &[Vec<Poly>], v: &[Poly]) -> Vec<Poly> {
    let n = a.len();
    (0..n)
        .map(|i| {
            let mut acc = Poly::zero(n);
            for l in 0..n {
                acc = acc.add(&a[i][l].mul(&v[l]));
            }
            acc
        })
        .collect()
}

fn vec_dot(a: &[Poly], b: &[Poly]) -> Poly {
    let n = a[0].nvars();
    let mut acc = Poly::zero(n);
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

/// Symbolic Q_k(phi^1..phi^k): symmetrized Hessian chain applied to two
/// gradients. Pure sphere functions only (no t-dependence).
pub fn q_trace_sym(phis: &[Poly]) -> Result<Poly> {
    let k = phis.len();
    if k < 2 {
        return Err(Error::Arity { min: 2, got: k });
    }
    let n = phis[0].nvars();
    let hess: Vec<Vec<Vec<Poly>>> = phis.iter().map(hessian_matrix_sym).collect();
    let grads: Vec<Vec<Poly>> = phis.iter().map(gradient_vec_sym).collect();
    let mut out = Poly::zero(n);
    for perm in permutations(k) {
        let term = if k == 2 {
            vec_dot(&grads[perm[0]], &grads[perm[1]])
        } else {
            let mut chain = hess[perm[0]].clone();
            for &p in &perm[1..k - 2] {
                chain = mat_mul(&chain, &hess[p]);
            }
            vec_dot(&mat_vec(&chain, &grads[perm[k - 1]]), &grads[perm[k - 2]])
        };
        out = out.add(&term);
    }
    Ok(out)
}

/// Residual of the Q_k reduction identity (valid for k >= 4):
///
///   (k-3) Q_k = sum_{pairs} Q_{k-1}(<grad phi^p, grad phi^q>, rest)
///             - sum_q <grad Q_{k-1}(phis minus q), grad phi^q>
///             - (k-3) sum_{pairs} <grad phi^p, grad phi^q> Q_{k-2}(rest)
///             + c_k sum_{perms} Q_2 * Q_{k-2},
///
/// with pair sums over unordered pairs (implemented as half of the ordered
/// sums) and the product-term constant pinned by the identity itself:
/// c_4 = 1/8, c_5 = 1/12. Both sides are evaluated independently from the
/// definitions; the return value is the max absolute mismatch over the
/// quadrature nodes. For k = 3 the relation degenerates to 0 = 0 and is
/// rejected here.
pub fn qk_recursion_residual(phis: &[Poly], quad: &SphereQuadrature) -> Result<f64> {
    let k = phis.len();
    if k < 4 {
        return Err(Error::Arity { min: 4, got: k });
    }
    if k > 5 {
        return Err(Error::InvalidParams(
            "Q_k reduction residual implemented for k in {4, 5}".into(),
        ));
    }
    let n = phis[0].nvars();
    let lhs = q_trace_sym(phis)?.scale((k - 3) as f64);

    let mut rhs = Poly::zero(n);
    // half the ordered-pair sums = unordered pairs
    for p in 0..k {
        for q in 0..k {
            if p == q {
                continue;
            }
            let inner = grad_inner_sym(&phis[p], &phis[q]);
            let rest: Vec<Poly> = phis
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != p && *r != q)
                .map(|(_, f)| f.clone())
                .collect();
            let mut args = vec![inner.clone()];
            args.extend(rest.iter().cloned());
            rhs = rhs.add(&q_trace_sym(&args)?.scale(0.5));
            rhs = rhs.sub(&inner.mul(&q_trace_sym(&rest)?).scale(0.5 * (k - 3) as f64));
        }
    }
    for q in 0..k {
        let args: Vec<Poly> =
            phis.iter().enumerate().filter(|(r, _)| *r != q).map(|(_, p)| p.clone()).collect();
        let qk1 = q_trace_sym(&args)?;
        rhs = rhs.sub(&grad_inner_sym(&qk1, &phis[q]));
    }
    let ck = if k == 4 { 1.0 / 8.0 } else { 1.0 / 12.0 };
    for perm in permutations(k) {
        let first = vec![phis[perm[0]].clone(), phis[perm[1]].clone()];
        let second: Vec<Poly> = perm[2..].iter().map(|&i| phis[i].clone()).collect();
        let prod = q_trace_sym(&first)?.mul(&q_trace_sym(&second)?);
        rhs = rhs.add(&prod.scale(ck));
    }

    let mut worst: f64 = 0.0;
    for x in &quad.nodes {
        worst = worst.max((lhs.eval(x) - rhs.eval(x)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::basis::HarmonicBasis;

    fn quad3() -> SphereQuadrature {
        SphereQuadrature::build(3, 14).unwrap()
    }

    #[test]
    fn h1_is_the_laplacian_and_q2_the_gradient_pairing() {
        let q = quad3();
        let b = HarmonicBasis::build(3, 2).unwrap();
        let e = &b.entries[4]; // a degree-2 harmonic
        let jet = SphereJet::from_poly(&e.poly, &q);
        let h1 = hessian_traces(&[&jet], TraceKind::H, 2).unwrap();
        for (v, x) in h1.iter().zip(&q.nodes) {
            assert!((v + e.eigenvalue * e.poly.eval(x)).abs() < 1e-9);
        }
        let q2 = hessian_traces(&[&jet, &jet], TraceKind::Q, 2).unwrap();
        for (v, g) in q2.iter().zip(&jet.grad) {
            assert!((v - 2.0 * g.dot(g)).abs() < 1e-10);
        }
    }

    #[test]
    fn symbolic_and_nodewise_routes_agree() {
        let q = quad3();
        let b = HarmonicBasis::build(3, 2).unwrap();
        let p1 = &b.entries[2].poly;
        let p2 = &b.entries[5].poly;
        let p3 = &b.entries[1].poly;
        let sym = q_trace_sym(&[p1.clone(), p2.clone(), p3.clone()]).unwrap();
        let jets = [
            SphereJet::from_poly(p1, &q),
            SphereJet::from_poly(p2, &q),
            SphereJet::from_poly(p3, &q),
        ];
        let refs: Vec<&SphereJet> = jets.iter().collect();
        let node = hessian_traces(&refs, TraceKind::Q, 2).unwrap();
        for (i, x) in q.nodes.iter().enumerate() {
            assert!(
                (sym.eval(x) - node[i]).abs() < 1e-9,
                "node {i}: {} vs {}",
                sym.eval(x),
                node[i]
            );
        }
    }

    #[test]
    fn permutation_invariance_of_traces() {
        let q = quad3();
        let b = HarmonicBasis::build(3, 2).unwrap();
        let jets = [
            SphereJet::from_poly(&b.entries[1].poly, &q),
            SphereJet::from_poly(&b.entries[4].poly, &q),
            SphereJet::from_poly(&b.entries[6].poly, &q),
        ];
        let order_a: Vec<&SphereJet> = vec![&jets[0], &jets[1], &jets[2]];
        let order_b: Vec<&SphereJet> = vec![&jets[2], &jets[0], &jets[1]];
        let ha = hessian_traces(&order_a, TraceKind::H, 2).unwrap();
        let hb = hessian_traces(&order_b, TraceKind::H, 2).unwrap();
        for (a, b) in ha.iter().zip(&hb) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_inputs_vanish() {
        let q = quad3();
        let c = Poly::constant(3, 2.5);
        let jet = SphereJet::from_poly(&c, &q);
        for kind in [TraceKind::H, TraceKind::Q] {
            let v = hessian_traces(&[&jet, &jet], kind, 2).unwrap();
            assert!(v.iter().all(|x| x.abs() < 1e-12));
        }
    }
}
