//! Hermitian matrices over `F_q` (`q` a square) and the polynomials they define,
//! `sum a_ij X_i^s X_j` with `s = sqrt(q)`.
//!
//! The sesquilinear form behind everything here is `h(x, y) = conj(x)^T A y`, so the
//! polynomial of `A` is `h(x, x)` and congruence `A -> conj(P)^T A P` matches the
//! substitution `F -> F o P`.

use std::sync::Arc;

use rand::RngCore;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::gf::{Elem, Field, GfError};
use crate::pg::{uniform_below, Matrix, PointSpace};
use crate::poly::{HomPoly, Monomial, MAX_VARS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HermitianError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("matrix is not square")]
    NotSquare,
    #[error("order {0} outside 1..=4")]
    Order(usize),
    #[error("entry ({i},{j}) is not the conjugate of entry ({j},{i})")]
    NotHermitian { i: usize, j: usize },
    #[error("Hermitian matrix is singular")]
    Singular,
    #[error("expected degree {expected}, got {got}")]
    Degree { expected: u32, got: u32 },
    #[error("integer overflow")]
    Overflow,
}

#[derive(Clone, PartialEq, Eq)]
pub struct HermitianMatrix {
    matrix: Matrix,
}

impl std::fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HermitianMatrix({:?})", self.matrix)
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.matrix.serialize(s)
    }
}

impl HermitianMatrix {
    pub fn new(matrix: Matrix) -> Result<HermitianMatrix, HermitianError> {
        if matrix.rows() != matrix.cols() {
            return Err(HermitianError::NotSquare);
        }
        if !(1..=MAX_VARS).contains(&matrix.rows()) {
            return Err(HermitianError::Order(matrix.rows()));
        }
        let f = matrix.field();
        for i in 0..matrix.rows() {
            for j in i..matrix.rows() {
                if matrix.get(j, i) != f.conj(matrix.get(i, j))? {
                    return Err(HermitianError::NotHermitian { i, j });
                }
            }
        }
        Ok(HermitianMatrix { matrix })
    }

    pub fn from_indices(field: &Arc<Field>, rows: &[Vec<u32>]) -> Result<HermitianMatrix, HermitianError> {
        HermitianMatrix::new(Matrix::from_indices(field, rows))
    }

    pub fn identity(field: &Arc<Field>, order: usize) -> Result<HermitianMatrix, HermitianError> {
        HermitianMatrix::new(Matrix::identity(field, order))
    }

    /// Uniform random Hermitian matrix: free upper triangle, diagonal in `F_sqrt(q)`.
    pub fn random(field: &Arc<Field>, order: usize, rng: &mut impl RngCore) -> Result<HermitianMatrix, HermitianError> {
        let s = field.sqrt_q().ok_or(GfError::NoSquareRoot { q: field.q() })?;
        let sub: Vec<Elem> = field.elements().filter(|&a| field.in_subfield(a).unwrap()).collect();
        debug_assert_eq!(sub.len() as u32, s);
        let mut m = Matrix::zeros(field, order, order);
        for i in 0..order {
            m.set(i, i, sub[uniform_below(rng, sub.len() as u64) as usize]);
            for j in i + 1..order {
                let a = Elem(uniform_below(rng, field.q() as u64) as u32);
                m.set(i, j, a);
                m.set(j, i, field.conj(a)?);
            }
        }
        HermitianMatrix::new(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn field(&self) -> &Arc<Field> {
        self.matrix.field()
    }

    pub fn order(&self) -> usize {
        self.matrix.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.matrix.get(i, j)
    }

    pub fn is_nonsingular(&self) -> bool {
        !self.matrix.det().is_zero()
    }

    /// `conj(P)^T A P`; the polynomial of the result is `to_polynomial(A) o P`.
    pub fn congruent(&self, p: &Matrix) -> HermitianMatrix {
        let f = self.field();
        let pbar_t = p.map(|a| f.conj(a).unwrap()).transpose();
        HermitianMatrix { matrix: pbar_t.mul(&self.matrix).mul(p) }
    }

    /// `h(x, y) = conj(x)^T A y`.
    pub fn form(&self, x: &[Elem], y: &[Elem]) -> Elem {
        let f = self.field();
        let ay = self.matrix.mul_vec(y);
        x.iter().zip(&ay).fold(Elem::ZERO, |acc, (&xi, &v)| f.add(acc, f.mul(f.conj(xi).unwrap(), v)))
    }

    pub fn to_polynomial(&self) -> HomPoly {
        let f = self.field();
        let s = f.sqrt_q().unwrap() as u8;
        let n = self.order();
        let mut p = HomPoly::zero(f, n, s as u32 + 1);
        for i in 0..n {
            for j in 0..n {
                let mut e = [0u8; MAX_VARS];
                e[i] += s;
                e[j] += 1;
                p.add_term(Monomial(e), self.get(i, j));
            }
        }
        p
    }

    /// `P` with `conj(P)^T A P = I`, by Gram-Schmidt for `h`. Candidate vectors are
    /// taken in point enumeration order; each is normalized with a norm preimage.
    pub fn standardize(&self) -> Result<Matrix, HermitianError> {
        if !self.is_nonsingular() {
            return Err(HermitianError::Singular);
        }
        let f = self.field();
        let n = self.order();
        let space = PointSpace::new(f, n - 1);
        let mut basis: Vec<Vec<Elem>> = Vec::with_capacity(n);
        while basis.len() < n {
            let (x, c) = space
                .iter()
                .map(|p| p.coords().to_vec())
                .filter(|x| basis.iter().all(|b| self.form(b, x).is_zero()))
                .find_map(|x| {
                    let c = self.form(&x, &x);
                    (!c.is_zero()).then_some((x, c))
                })
                .expect("nondegenerate form has an anisotropic vector in every complement");
            let lambda = f.norm_preimage(f.inv(c)?)?.expect("norm is onto F_sqrt(q)");
            basis.push(x.iter().map(|&a| f.mul(lambda, a)).collect());
        }
        Ok(Matrix::from_columns(f, &basis))
    }
}

/// Reads `F` as a Hermitian polynomial with `rho = 1`: shape check, then symmetry check.
pub fn as_hermitian(poly: &HomPoly) -> Option<HermitianMatrix> {
    let f = poly.field();
    let s = f.sqrt_q()?;
    if poly.degree() != s + 1 {
        return None;
    }
    let n = poly.nvars();
    let mut m = Matrix::zeros(f, n, n);
    for (mono, &c) in poly.terms() {
        let e = &mono.0[..n];
        let (i, j) = if let Some(i) = e.iter().position(|&x| x as u32 == s + 1) {
            (i, i)
        } else {
            let i = e.iter().position(|&x| x as u32 == s)?;
            let j = e.iter().position(|&x| x == 1)?;
            (i, j)
        };
        m.set(i, j, c);
    }
    HermitianMatrix::new(m).ok()
}

/// `(rho, A)` with `rho F = to_polynomial(A)` for the smallest-index `rho` that works.
pub fn detect_hermitian(poly: &HomPoly) -> Result<Option<(Elem, HermitianMatrix)>, HermitianError> {
    let f = poly.field();
    let s = f.sqrt_q().ok_or(GfError::NoSquareRoot { q: f.q() })?;
    if poly.degree() != s + 1 {
        return Err(HermitianError::Degree { expected: s + 1, got: poly.degree() });
    }
    let shapes_ok = poly.terms().all(|(m, _)| {
        let e = &m.0[..poly.nvars()];
        let big = e.iter().filter(|&&x| x as u32 == s).count();
        let one = e.iter().filter(|&&x| x == 1).count();
        e.iter().any(|&x| x as u32 == s + 1) || (big == 1 && one == 1)
    });
    if !shapes_ok || poly.is_zero() {
        return Ok(None);
    }
    for rho in f.nonzero() {
        if let Some(a) = as_hermitian(&poly.scale(rho)) {
            return Ok(Some((rho, a)));
        }
    }
    Ok(None)
}

pub fn is_hermitian_polynomial(poly: &HomPoly) -> bool {
    as_hermitian(poly).is_some()
}

/// `(s^{n+1} + (-1)^n)(s^n + (-1)^{n-1}) / (q - 1)` with `s = sqrt(q)`: points of a
/// nonsingular Hermitian variety in `P^n(F_q)`.
pub fn predicted_count(n: u32, q: u64) -> Result<u64, HermitianError> {
    let s = (q as f64).sqrt().round() as i128;
    if s * s != q as i128 {
        return Err(GfError::NoSquareRoot { q: q as u32 }.into());
    }
    let sign = |k: u32| if k % 2 == 0 { 1i128 } else { -1 };
    let a = s.checked_pow(n + 1).ok_or(HermitianError::Overflow)? + sign(n);
    let b = s.checked_pow(n).ok_or(HermitianError::Overflow)? + sign(n + 1);
    let num = a.checked_mul(b).ok_or(HermitianError::Overflow)?;
    let den = q as i128 - 1;
    debug_assert_eq!(num % den, 0);
    u64::try_from(num / den).map_err(|_| HermitianError::Overflow)
}

/// `H_{n-1}`: `sum X_i^{s+1}` in `n + 1` variables.
pub fn standard_form(field: &Arc<Field>, nvars: usize) -> Result<HomPoly, HermitianError> {
    Ok(HermitianMatrix::identity(field, nvars)?.to_polynomial())
}

/// Closure of Hermitian polynomials under `F_sqrt(q)`-linear combination, checked
/// exactly: every pair drawn from the samples and a spanning set of elementary
/// Hermitian polynomials, combined with every pair of `F_sqrt(q)` coefficients.
pub fn hermitian_space_check(field: &Arc<Field>, nvars: usize, samples: &[HomPoly]) -> Result<bool, HermitianError> {
    field.sqrt_q().ok_or(GfError::NoSquareRoot { q: field.q() })?;
    let sub: Vec<Elem> = field.elements().filter(|&a| field.in_subfield(a).unwrap()).collect();
    let mut gens: Vec<HomPoly> = samples.to_vec();
    for i in 0..nvars {
        for j in i..nvars {
            let coeffs: Vec<Elem> = if i == j { vec![Elem::ONE] } else { vec![Elem::ONE, field.primitive()] };
            for c in coeffs {
                let mut m = Matrix::zeros(field, nvars, nvars);
                m.set(i, j, c);
                m.set(j, i, field.conj(c)?);
                gens.push(HermitianMatrix::new(m)?.to_polynomial());
            }
        }
    }
    if !gens.iter().all(is_hermitian_polynomial) {
        return Ok(false);
    }
    for (k, p) in gens.iter().enumerate() {
        for q in &gens[k..] {
            for &a in &sub {
                for &b in &sub {
                    let combo = p.scale(a).add(&q.scale(b));
                    if !combo.is_zero() && !is_hermitian_polynomial(&combo) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pg::ProjTransform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(q: u64) -> Arc<Field> {
        Field::registry(q).unwrap()
    }

    fn congruence_holds(a: &HermitianMatrix, p: &Matrix) -> bool {
        a.congruent(p).matrix() == &Matrix::identity(a.field(), a.order())
    }

    #[test]
    fn to_polynomial_examples() {
        let f4 = f(4);
        let id = HermitianMatrix::identity(&f4, 3).unwrap();
        assert_eq!(id.to_polynomial(), HomPoly::parse(&f4, "X0^3+X1^3+X2^3", None).unwrap());
        let hyp = HermitianMatrix::from_indices(&f4, &[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(hyp.to_polynomial(), HomPoly::parse(&f4, "X0^2*X1+X0*X1^2+X2^3", None).unwrap());
        let zero = HermitianMatrix::new(Matrix::zeros(&f4, 3, 3)).unwrap();
        assert!(zero.to_polynomial().is_zero());
        assert!(!zero.is_nonsingular());
    }

    #[test]
    fn validation() {
        let f4 = f(4);
        // (0,1) = w, (1,0) must be w^2
        assert!(HermitianMatrix::from_indices(&f4, &[vec![0, 2], vec![3, 0]]).is_ok());
        assert_eq!(
            HermitianMatrix::from_indices(&f4, &[vec![0, 2], vec![2, 0]]),
            Err(HermitianError::NotHermitian { i: 0, j: 1 })
        );
        assert!(HermitianMatrix::from_indices(&f4, &[vec![2, 0], vec![0, 1]]).is_err());
        assert!(matches!(HermitianMatrix::identity(&f(2), 2), Err(HermitianError::Field(_))));
    }

    #[test]
    fn detect_examples() {
        let f4 = f(4);
        let h = standard_form(&f4, 3).unwrap();
        let (rho, a) = detect_hermitian(&h).unwrap().unwrap();
        assert_eq!(rho, Elem::ONE);
        assert_eq!(a, HermitianMatrix::identity(&f4, 3).unwrap());
        let (rho, a) = detect_hermitian(&h.scale(Elem(2))).unwrap().unwrap();
        assert_eq!(rho, Elem(3));
        assert_eq!(a.to_polynomial(), h);
        let bad = HomPoly::parse(&f4, "X0^3+X0*X1*X2", None).unwrap();
        assert_eq!(detect_hermitian(&bad).unwrap(), None);
        let quartic = HomPoly::parse(&f4, "X0^4", None).unwrap();
        assert!(matches!(detect_hermitian(&quartic), Err(HermitianError::Degree { .. })));
        // right shapes, wrong symmetry for every rho
        let skew = HomPoly::parse(&f4, "X0^2*X1", None).unwrap();
        assert_eq!(detect_hermitian(&skew).unwrap(), None);
    }

    #[test]
    fn detect_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in [4u64, 9, 16, 25] {
            let fq = f(q);
            for k in 0..1000 {
                let a = HermitianMatrix::random(&fq, 2 + k % 3, &mut rng).unwrap();
                let p = a.to_polynomial();
                if p.is_zero() {
                    continue;
                }
                let (rho, b) = detect_hermitian(&p).unwrap().unwrap();
                assert_eq!(p.scale(rho), b.to_polynomial());
                if rho == Elem::ONE {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn nonsingularity() {
        let f4 = f(4);
        assert!(HermitianMatrix::identity(&f4, 3).unwrap().is_nonsingular());
        let cone = HermitianMatrix::from_indices(&f4, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 0]]).unwrap();
        assert!(!cone.is_nonsingular());
        // the cone over a point set of H_0 has extra points
        assert_ne!(cone.to_polynomial().count_points(&f4).unwrap(), predicted_count(2, 4).unwrap());
    }

    #[test]
    fn predicted_count_examples() {
        assert_eq!(predicted_count(3, 4).unwrap(), 45);
        assert_eq!(predicted_count(2, 9).unwrap(), 28);
        assert_eq!(predicted_count(3, 9).unwrap(), 280);
        assert_eq!(predicted_count(2, 4).unwrap(), 9);
        assert_eq!(predicted_count(1, 4).unwrap(), 3);
        assert!(predicted_count(2, 8).is_err());
    }

    #[test]
    fn nonsingular_counts_match_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for q in [4u64, 9] {
            let fq = f(q);
            let mut seen = 0;
            while seen < 20 {
                let a = HermitianMatrix::random(&fq, 3, &mut rng).unwrap();
                if !a.is_nonsingular() {
                    continue;
                }
                seen += 1;
                assert_eq!(a.to_polynomial().count_points(&fq).unwrap(), predicted_count(2, q).unwrap());
            }
        }
    }

    #[test]
    fn standardize_examples() {
        let f4 = f(4);
        let id = HermitianMatrix::identity(&f4, 3).unwrap();
        assert_eq!(id.standardize().unwrap(), Matrix::identity(&f4, 3));
        let hyp = HermitianMatrix::from_indices(&f4, &[vec![0, 1], vec![1, 0]]).unwrap();
        let p = hyp.standardize().unwrap();
        assert!(congruence_holds(&hyp, &p));
        let cone = HermitianMatrix::from_indices(&f4, &[vec![1, 0], vec![0, 0]]).unwrap();
        assert_eq!(cone.standardize(), Err(HermitianError::Singular));
    }

    #[test]
    fn standardize_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for q in [4u64, 9, 16, 25] {
            let fq = f(q);
            let mut seen = 0;
            while seen < 25 {
                let a = HermitianMatrix::random(&fq, 2 + seen % 3, &mut rng).unwrap();
                if !a.is_nonsingular() {
                    continue;
                }
                seen += 1;
                let p = a.standardize().unwrap();
                assert!(congruence_holds(&a, &p));
                let g = a.to_polynomial().substitute(&p);
                assert_eq!(g, standard_form(&fq, a.order()).unwrap());
                if q <= 9 {
                    assert_eq!(a.to_polynomial().count_points(&fq).unwrap(), g.count_points(&fq).unwrap());
                }
            }
        }
    }

    #[test]
    fn congruence_is_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let f9 = f(9);
        for _ in 0..20 {
            let a = HermitianMatrix::random(&f9, 3, &mut rng).unwrap();
            let t = ProjTransform::random(&f9, 2, &mut rng);
            assert_eq!(a.congruent(t.matrix()).to_polynomial(), a.to_polynomial().linear_substitute(&t));
        }
    }

    #[test]
    fn space_check_examples() {
        let f4 = f(4);
        let h = standard_form(&f4, 3).unwrap();
        let hyp = HermitianMatrix::from_indices(&f4, &[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]).unwrap();
        let sum = h.add(&hyp.to_polynomial());
        assert!(is_hermitian_polynomial(&sum));
        let slanted = h.scale(Elem(2));
        assert!(!is_hermitian_polynomial(&slanted));
        assert!(is_hermitian_polynomial(&h.scale(Elem::ONE)));
        for nv in 2..=4 {
            assert!(hermitian_space_check(&f4, nv, &[h.clone()][..(nv == 3) as usize]).unwrap());
        }
        assert!(!hermitian_space_check(&f4, 3, &[slanted]).unwrap());
        assert!(hermitian_space_check(&f(9), 3, &[]).unwrap());
    }
}
