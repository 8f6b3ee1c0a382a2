//! Sparse homogeneous polynomials over `F_q` in at most four variables.
//!
//! Terms are kept in graded-lex order with `X0` the most significant variable, so
//! `X0^d` is the leading monomial whenever it is present. Substitution follows one
//! convention throughout: [`HomPoly::linear_substitute`] with `T` returns `F o T`,
//! i.e. `G(y) = F(T y)`, whose zero set is `T^{-1}` of the zero set of `F`.
//!
//! Text syntax: `+`/`-` separated terms, each a `*`-separated product of factors
//! `Xi`, `Xi^k`, `w`, `w^k` or an integer. `w` is the smallest-index primitive element
//! of `F_q`; integers map into the prime subfield.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::gf::{Elem, Field, GfError, TowerEmbedding};
use crate::pg::{Matrix, PgError, PointSpace, ProjLine, ProjPlane, ProjPoint, ProjTransform};

pub const MAX_VARS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Geometry(#[from] PgError),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("point is not on the line")]
    NotOnLine,
    #[error("point is singular; no tangent line")]
    SingularPoint,
    #[error("the line is a component of the curve")]
    LineInCurve,
    #[error("expected a polynomial in {expected} variables, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("expected a linear form, got degree {0}")]
    NotLinear(u32),
    #[error("polynomials live over different fields")]
    FieldMismatch,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("equivalence search over {0} candidate frames exceeds the cap")]
    SearchTooLarge(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Exponent vector; unused trailing slots are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial(pub [u8; MAX_VARS]);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of degree `d` in `nvars` variables, in term order.
pub fn monomials(nvars: usize, d: u32) -> Vec<Monomial> {
    fn rec(i: usize, nvars: usize, left: u32, cur: &mut [u8; MAX_VARS], out: &mut Vec<Monomial>) {
        if i + 1 == nvars {
            cur[i] = left as u8;
            out.push(Monomial(*cur));
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e as u8;
            rec(i + 1, nvars, left - e, cur, out);
        }
        cur[i] = 0;
    }
    assert!((1..=MAX_VARS).contains(&nvars));
    let mut out = Vec::new();
    rec(0, nvars, d, &mut [0; MAX_VARS], &mut out);
    out
}

#[derive(Clone, PartialEq, Eq)]
pub struct HomPoly {
    field: Arc<Field>,
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, Elem>,
}

impl fmt::Debug for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomPoly[F_{}, {} vars]({})", self.field.q(), self.nvars, self)
    }
}

impl Serialize for HomPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl HomPoly {
    pub fn zero(field: &Arc<Field>, nvars: usize, degree: u32) -> HomPoly {
        assert!((1..=MAX_VARS).contains(&nvars), "1..=4 variables supported");
        HomPoly { field: Arc::clone(field), nvars, degree, terms: BTreeMap::new() }
    }

    pub fn monomial(field: &Arc<Field>, nvars: usize, exps: &[u8], coeff: Elem) -> HomPoly {
        let mut m = [0u8; MAX_VARS];
        m[..exps.len()].copy_from_slice(exps);
        let mono = Monomial(m);
        let mut p = HomPoly::zero(field, nvars, mono.degree());
        p.add_term(mono, coeff);
        p
    }

    pub fn variable(field: &Arc<Field>, nvars: usize, i: usize) -> HomPoly {
        let mut e = [0u8; MAX_VARS];
        e[i] = 1;
        HomPoly::monomial(field, nvars, &e[..nvars], Elem::ONE)
    }

    /// `sum c_i X_i`.
    pub fn linear(field: &Arc<Field>, coeffs: &[Elem]) -> HomPoly {
        let mut p = HomPoly::zero(field, coeffs.len(), 1);
        for (i, &c) in coeffs.iter().enumerate() {
            let mut e = [0u8; MAX_VARS];
            e[i] = 1;
            p.add_term(Monomial(e), c);
        }
        p
    }

    /// Coefficients listed against [`monomials`]`(nvars, degree)`.
    pub fn from_dense(field: &Arc<Field>, nvars: usize, degree: u32, coeffs: &[Elem]) -> HomPoly {
        let monos = monomials(nvars, degree);
        assert_eq!(monos.len(), coeffs.len(), "dense coefficient count");
        let mut p = HomPoly::zero(field, nvars, degree);
        for (m, &c) in monos.into_iter().zip(coeffs) {
            p.add_term(m, c);
        }
        p
    }

    pub fn dense(&self) -> Vec<Elem> {
        monomials(self.nvars, self.degree).iter().map(|m| self.coeff(m)).collect()
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Elem {
        self.terms.get(m).copied().unwrap_or(Elem::ZERO)
    }

    pub fn add_term(&mut self, m: Monomial, c: Elem) {
        assert_eq!(m.degree(), self.degree, "inhomogeneous term");
        if c.is_zero() {
            return;
        }
        let f = &self.field;
        let entry = self.terms.entry(m).or_insert(Elem::ZERO);
        *entry = f.add(*entry, c);
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn check_same(&self, other: &HomPoly) {
        assert!(self.field == other.field, "polynomials over different fields");
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
    }

    pub fn add(&self, other: &HomPoly) -> HomPoly {
        self.check_same(other);
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn sub(&self, other: &HomPoly) -> HomPoly {
        self.add(&other.scale(self.field.neg(Elem::ONE)))
    }

    pub fn scale(&self, s: Elem) -> HomPoly {
        let mut out = HomPoly::zero(&self.field, self.nvars, self.degree);
        if s.is_zero() {
            return out;
        }
        for (&m, &c) in &self.terms {
            out.terms.insert(m, self.field.mul(c, s));
        }
        out
    }

    pub fn mul(&self, other: &HomPoly) -> HomPoly {
        self.check_same(other);
        let f = &self.field;
        let mut out = HomPoly::zero(f, self.nvars, self.degree + other.degree);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let mut e = [0u8; MAX_VARS];
                for i in 0..MAX_VARS {
                    e[i] = a.0[i] + b.0[i];
                }
                out.add_term(Monomial(e), f.mul(ca, cb));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> HomPoly {
        let mut out = HomPoly::monomial(&self.field, self.nvars, &[0; MAX_VARS][..self.nvars], Elem::ONE);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Leading coefficient made 1; zero stays zero.
    pub fn normalized(&self) -> HomPoly {
        match self.terms.values().next() {
            Some(&lead) => self.scale(self.field.inv(lead).unwrap()),
            None => self.clone(),
        }
    }

    /// Equal up to a nonzero scalar.
    pub fn scalar_equal(&self, other: &HomPoly) -> bool {
        self.field == other.field && self.nvars == other.nvars && self.normalized().terms == other.normalized().terms
    }

    pub fn evaluate(&self, x: &[Elem]) -> Elem {
        assert_eq!(x.len(), self.nvars);
        let f = &self.field;
        let order = f.q() - 1;
        let logs: Vec<Option<u32>> = x.iter().map(|&c| f.log(c)).collect();
        let mut acc = Elem::ZERO;
        'terms: for (m, &c) in &self.terms {
            let mut l = f.log(c).unwrap() as u64;
            for (i, &e) in m.0[..self.nvars].iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match logs[i] {
                    Some(li) => l += li as u64 * e as u64,
                    None => continue 'terms,
                }
            }
            acc = f.add(acc, f.exp((l % order as u64) as u32));
        }
        acc
    }

    pub fn evaluate_point(&self, p: &ProjPoint) -> Elem {
        self.evaluate(p.coords())
    }

    /// Zero indicator for every point of `space` (same field as `self`).
    pub fn zero_set(&self, space: &PointSpace) -> Vec<bool> {
        assert!(**space.field() == *self.field);
        assert_eq!(space.dim() + 1, self.nvars);
        let mut buf = Vec::with_capacity(self.nvars);
        (0..space.len())
            .map(|i| {
                space.coords_into(i, &mut buf);
                self.evaluate(&buf).is_zero()
            })
            .collect()
    }

    /// Points counted over the base field or over any registry extension of it.
    pub fn count_points(&self, over: &Arc<Field>) -> Result<u64, PolyError> {
        self.count_points_shard(over, 0, 1)
    }

    /// Count over the shard `start, start + stride, ...` of the point stream.
    pub fn count_points_shard(&self, over: &Arc<Field>, start: usize, stride: usize) -> Result<u64, PolyError> {
        let poly = self.over(over)?;
        let space = PointSpace::new(over, self.nvars - 1);
        let mut buf = Vec::with_capacity(self.nvars);
        let mut n = 0;
        for i in (start..space.len()).step_by(stride.max(1)) {
            space.coords_into(i, &mut buf);
            if poly.evaluate(&buf).is_zero() {
                n += 1;
            }
        }
        Ok(n)
    }

    /// The same polynomial with coefficients pushed into an extension field.
    pub fn over(&self, target: &Arc<Field>) -> Result<HomPoly, PolyError> {
        if *target == self.field {
            return Ok(self.clone());
        }
        let emb = TowerEmbedding::new(&self.field, target)?;
        Ok(self.extend(&emb))
    }

    pub fn extend(&self, emb: &TowerEmbedding) -> HomPoly {
        assert!(**emb.source() == *self.field);
        let mut out = HomPoly::zero(emb.target(), self.nvars, self.degree);
        for (&m, &c) in &self.terms {
            out.terms.insert(m, emb.embed(c));
        }
        out
    }

    /// `X_i = sum_j M[i][j] Y_j` for an `nvars x k` matrix; returns a polynomial in `Y`.
    pub fn substitute(&self, m: &Matrix) -> HomPoly {
        assert_eq!(m.rows(), self.nvars, "substitution rows");
        assert!(*m.field() == self.field);
        let k = m.cols();
        let f = &self.field;
        let images: Vec<HomPoly> = (0..self.nvars).map(|i| HomPoly::linear(f, m.row(i))).collect();
        let mut powers: Vec<Vec<HomPoly>> = Vec::with_capacity(self.nvars);
        for img in &images {
            let mut row = vec![HomPoly::monomial(f, k, &[0; MAX_VARS][..k], Elem::ONE)];
            for e in 1..=self.degree {
                let next = row[e as usize - 1].mul(img);
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = HomPoly::zero(f, k, self.degree);
        for (mono, &c) in &self.terms {
            let mut prod: Option<HomPoly> = None;
            for i in 0..self.nvars {
                let e = mono.0[i] as usize;
                if e == 0 {
                    continue;
                }
                prod = Some(match prod {
                    None => powers[i][e].clone(),
                    Some(p) => p.mul(&powers[i][e]),
                });
            }
            let prod = prod.unwrap_or_else(|| powers[0][0].clone());
            for (&mm, &cc) in &prod.terms {
                out.add_term(mm, f.mul(c, cc));
            }
        }
        out
    }

    pub fn linear_substitute(&self, t: &ProjTransform) -> HomPoly {
        self.substitute(t.matrix())
    }

    /// The curve cut on a plane of `P^3`, in the coordinates of the plane's frame.
    /// `None` when the plane lies inside the surface.
    pub fn restrict_to_plane(&self, h: &ProjPlane) -> Option<HomPoly> {
        assert_eq!(self.nvars, 4, "restriction to planes needs a surface");
        let frame = h.frame(&self.field);
        let r = self.substitute(&frame.matrix(&self.field));
        (!r.is_zero()).then_some(r)
    }

    /// The binary form `F(s A + t B)` on a line with RREF basis `(A, B)`.
    pub fn restrict_to_line(&self, l: &ProjLine) -> HomPoly {
        let m = Matrix::from_columns(&self.field, &[l.basis()[0].clone(), l.basis()[1].clone()]);
        self.substitute(&m)
    }

    pub fn contains_line(&self, l: &ProjLine) -> bool {
        self.restrict_to_line(l).is_zero()
    }

    /// Exact quotient by a linear form, or `None` if it does not divide.
    ///
    /// Coordinates are changed so that `L` becomes a variable `Y_k`; divisibility is
    /// "every term contains `Y_k`", and the quotient is read off and changed back.
    pub fn divide_by_linear(&self, l: &HomPoly) -> Result<Option<HomPoly>, PolyError> {
        if l.field != self.field {
            return Err(PolyError::FieldMismatch);
        }
        if l.nvars != self.nvars {
            return Err(PolyError::Arity { expected: self.nvars, got: l.nvars });
        }
        if l.degree != 1 || l.is_zero() {
            return Err(PolyError::NotLinear(l.degree));
        }
        let f = &self.field;
        let n = self.nvars;
        let a: Vec<Elem> = (0..n).map(|i| l.coeff(&unit(i))).collect();
        let k = a.iter().position(|c| !c.is_zero()).unwrap();
        let ak_inv = f.inv(a[k])?;
        // X = T Y with X_k = a_k^{-1} (Y_k - sum_{j != k} a_j Y_j)
        let mut t = Matrix::identity(f, n);
        for j in 0..n {
            if j == k {
                t.set(k, k, ak_inv);
            } else {
                t.set(k, j, f.neg(f.mul(a[j], ak_inv)));
            }
        }
        let g = self.substitute(&t);
        if self.degree == 0 || g.terms.keys().any(|m| m.0[k] == 0) {
            return Ok(if self.is_zero() { Some(HomPoly::zero(f, n, self.degree.saturating_sub(1))) } else { None });
        }
        let mut qg = HomPoly::zero(f, n, self.degree - 1);
        for (m, &c) in &g.terms {
            let mut e = m.0;
            e[k] -= 1;
            qg.terms.insert(Monomial(e), c);
        }
        // back: Y_k = sum a_j X_j, Y_j = X_j
        let mut back = Matrix::identity(f, n);
        for j in 0..n {
            back.set(k, j, a[j]);
        }
        Ok(Some(qg.substitute(&back)))
    }

    /// Multivariate division by one polynomial in the term order. The remainder is
    /// zero exactly when `divisor` divides `self`.
    pub fn div_rem(&self, divisor: &HomPoly) -> (HomPoly, HomPoly) {
        self.check_same(divisor);
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let f = &self.field;
        let qdeg = self.degree.saturating_sub(divisor.degree);
        let mut quot = HomPoly::zero(f, self.nvars, qdeg);
        let mut rem = HomPoly::zero(f, self.nvars, self.degree);
        let mut work = self.clone();
        let (lm, &lc) = divisor.terms.iter().next().unwrap();
        let lc_inv = f.inv(lc).unwrap();
        while let Some((&m, &c)) = work.terms.iter().next() {
            if self.degree >= divisor.degree && (0..MAX_VARS).all(|i| m.0[i] >= lm.0[i]) {
                let mut e = [0u8; MAX_VARS];
                for i in 0..MAX_VARS {
                    e[i] = m.0[i] - lm.0[i];
                }
                let factor = f.mul(c, lc_inv);
                quot.add_term(Monomial(e), factor);
                let mut step = HomPoly::zero(f, self.nvars, qdeg);
                step.add_term(Monomial(e), factor);
                work = work.sub(&step.mul(divisor));
            } else {
                work.terms.remove(&m);
                rem.add_term(m, c);
            }
        }
        (quot, rem)
    }

    /// Linear factors defined over `F_{q^m}` with multiplicities, in dual point order.
    /// Forms are returned over the extension field.
    pub fn linear_components(&self, m: u32) -> Result<Vec<(HomPoly, u32)>, PolyError> {
        let ext = if m == 1 { Arc::clone(&self.field) } else { self.field.extension(m)? };
        let poly = self.over(&ext)?;
        let n = self.nvars - 1;
        if self.is_zero() {
            return Ok(Vec::new());
        }
        let space = PointSpace::new(&ext, n);
        // A nonzero form of degree d <= Q cannot vanish on all of P^k(F_Q), k >= 1, so
        // vanishing on a hyperplane's rational points already means divisibility there.
        let point_test = n == 1 || poly.degree <= ext.q();
        let zeros = if point_test { poly.zero_set(&space) } else { Vec::new() };
        let mut out = Vec::new();
        for form in space.iter() {
            if point_test && !hyperplane_vanishes(&ext, &space, &zeros, form.coords()) {
                continue;
            }
            let lin = HomPoly::linear(&ext, form.coords());
            let mut mult = 0;
            let mut cur = poly.clone();
            while let Some(qt) = cur.divide_by_linear(&lin)? {
                mult += 1;
                cur = qt;
                if cur.degree == 0 {
                    break;
                }
            }
            if mult > 0 {
                out.push((lin, mult));
            }
        }
        Ok(out)
    }

    pub fn has_linear_component(&self) -> Result<bool, PolyError> {
        Ok(!self.linear_components(1)?.is_empty())
    }

    /// Formal partial derivative in `X_i`.
    pub fn partial(&self, i: usize) -> HomPoly {
        let f = &self.field;
        let mut out = HomPoly::zero(f, self.nvars, self.degree.saturating_sub(1));
        for (m, &c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let k = f.from_int(e as i64);
            if k.is_zero() {
                continue;
            }
            let mut mm = m.0;
            mm[i] -= 1;
            out.add_term(Monomial(mm), f.mul(c, k));
        }
        out
    }

    pub fn gradient(&self) -> Vec<HomPoly> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    /// Rational points where the polynomial and all its partials vanish.
    pub fn singular_points(&self) -> Vec<ProjPoint> {
        let grad = self.gradient();
        PointSpace::new(&self.field, self.nvars - 1)
            .iter()
            .filter(|p| self.evaluate_point(p).is_zero() && grad.iter().all(|g| g.evaluate_point(p).is_zero()))
            .collect()
    }

    pub fn tangent_line(&self, p: &ProjPoint) -> Result<ProjLine, PolyError> {
        if self.nvars != 3 {
            return Err(PolyError::Arity { expected: 3, got: self.nvars });
        }
        if !self.evaluate_point(p).is_zero() {
            return Err(PolyError::NotOnCurve);
        }
        let g: Vec<Elem> = self.gradient().iter().map(|d| d.evaluate_point(p)).collect();
        if g.iter().all(|c| c.is_zero()) {
            return Err(PolyError::SingularPoint);
        }
        Ok(ProjLine::from_form(&self.field, &g)?)
    }

    /// Order of vanishing at `P` of the curve restricted to a line through `P`.
    pub fn intersection_multiplicity(&self, l: &ProjLine, p: &ProjPoint) -> Result<u32, PolyError> {
        let f = &self.field;
        if !l.contains(f, p) {
            return Err(PolyError::NotOnLine);
        }
        if !self.evaluate_point(p).is_zero() {
            return Err(PolyError::NotOnCurve);
        }
        let b = l.points(f).into_iter().find(|x| x != p).unwrap();
        let m = Matrix::from_columns(f, &[p.coords().to_vec(), b.coords().to_vec()]);
        let g = self.substitute(&m);
        if g.is_zero() {
            return Err(PolyError::LineInCurve);
        }
        Ok(g.terms.keys().map(|m| m.0[1] as u32).min().unwrap())
    }

    pub fn parse(field: &Arc<Field>, text: &str, nvars: Option<usize>) -> Result<HomPoly, PolyError> {
        Ok(parse::parse(field, text, nvars)?)
    }
}

/// Largest candidate count [`projectively_equivalent`] will walk before giving up.
pub const EQUIVALENCE_SEARCH_CAP: u64 = 50_000_000;

/// A transform `T` with `b = c (a o T)` for some scalar `c`, so `T` carries the zero
/// set of `b` onto that of `a`. `Ok(None)` when the two are not equivalent.
///
/// A frame (n + 2 points in general position) is taken on the zero set of `b`, and
/// its images are tried among ordered frames on the zero set of `a`; a candidate must
/// map all zeros of `b` into zeros of `a` before polynomials are compared. Without a
/// frame on `b` the standard frame is used and images range over all points.
pub fn projectively_equivalent(a: &HomPoly, b: &HomPoly) -> Result<Option<ProjTransform>, PolyError> {
    if a.field != b.field {
        return Err(PolyError::FieldMismatch);
    }
    if a.nvars != b.nvars {
        return Err(PolyError::Arity { expected: a.nvars, got: b.nvars });
    }
    if a.degree != b.degree || a.is_zero() != b.is_zero() {
        return Ok(None);
    }
    let f = &a.field;
    let n = a.nvars - 1;
    let space = PointSpace::new(f, n);
    let za = a.zero_set(&space);
    let zb = b.zero_set(&space);
    if za.iter().filter(|&&z| z).count() != zb.iter().filter(|&&z| z).count() {
        return Ok(None);
    }
    let pts_a: Vec<ProjPoint> = (0..space.len()).filter(|&i| za[i]).map(|i| space.point(i)).collect();
    let pts_b: Vec<ProjPoint> = (0..space.len()).filter(|&i| zb[i]).map(|i| space.point(i)).collect();
    let (source, pool): (Vec<ProjPoint>, Vec<ProjPoint>) = match find_frame(f, &pts_b, n) {
        Some(fr) => (fr, pts_a.clone()),
        None => (standard_frame(f, n), space.iter().collect()),
    };
    let mut budget: u64 = 1;
    for k in 0..n as u64 + 2 {
        budget = budget.saturating_mul((pool.len() as u64).saturating_sub(k));
    }
    if budget > EQUIVALENCE_SEARCH_CAP {
        return Err(PolyError::SearchTooLarge(budget));
    }
    let src_inv = frame_matrix(f, &source).inverse().unwrap();
    let mut found = None;
    let mut chosen = Vec::with_capacity(n + 2);
    frames_from(f, &pool, n, &mut chosen, &mut |target| {
        let t = frame_matrix(f, target).mul(&src_inv);
        let mut buf = vec![Elem::ZERO; n + 1];
        for p in &pts_b {
            buf.copy_from_slice(&t.mul_vec(p.coords()));
            if !za[space.index_of_vector(&buf).unwrap()] {
                return false;
            }
        }
        let t = ProjTransform::new(t).unwrap();
        if a.linear_substitute(&t).scalar_equal(b) {
            found = Some(t);
            return true;
        }
        false
    });
    Ok(found)
}

fn standard_frame(f: &Arc<Field>, n: usize) -> Vec<ProjPoint> {
    let mut out: Vec<ProjPoint> = (0..=n)
        .map(|i| {
            let mut v = vec![Elem::ZERO; n + 1];
            v[i] = Elem::ONE;
            ProjPoint::normalize(f, &v).unwrap()
        })
        .collect();
    out.push(ProjPoint::normalize(f, &vec![Elem::ONE; n + 1]).unwrap());
    out
}

/// Columns `c_i P_i` with `sum c_i P_i = P_{n+1}`: the matrix sending the standard
/// frame to the given one.
fn frame_matrix(f: &Arc<Field>, frame: &[ProjPoint]) -> Matrix {
    let n = frame.len() - 2;
    let base = Matrix::from_columns(f, &frame[..=n].iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>());
    let c = base.inverse().expect("frame points independent").mul_vec(frame[n + 1].coords());
    let cols: Vec<Vec<Elem>> =
        frame[..=n].iter().zip(&c).map(|(p, &ci)| p.coords().iter().map(|&x| f.mul(ci, x)).collect()).collect();
    Matrix::from_columns(f, &cols)
}

fn independent(f: &Arc<Field>, pts: &[&ProjPoint]) -> bool {
    let rows: Vec<Vec<Elem>> = pts.iter().map(|p| p.coords().to_vec()).collect();
    Matrix::from_rows(f, &rows).rank() == pts.len()
}

/// Whether `chosen + [p]` can still be part of a frame of `P^n`.
fn extends_frame(f: &Arc<Field>, chosen: &[ProjPoint], p: &ProjPoint, n: usize) -> bool {
    let mut all: Vec<&ProjPoint> = chosen.iter().collect();
    all.push(p);
    if all.len() <= n + 1 {
        return independent(f, &all);
    }
    // last point: every n+1 subset that contains it must be independent
    (0..chosen.len()).all(|skip| {
        let sub: Vec<&ProjPoint> = all.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, p)| *p).collect();
        independent(f, &sub)
    })
}

fn find_frame(f: &Arc<Field>, pts: &[ProjPoint], n: usize) -> Option<Vec<ProjPoint>> {
    let mut chosen = Vec::new();
    let mut out = None;
    frames_from(f, pts, n, &mut chosen, &mut |fr| {
        out = Some(fr.to_vec());
        true
    });
    out
}

/// Visits ordered frames drawn from `pool` until `visit` returns true.
fn frames_from(
    f: &Arc<Field>,
    pool: &[ProjPoint],
    n: usize,
    chosen: &mut Vec<ProjPoint>,
    visit: &mut dyn FnMut(&[ProjPoint]) -> bool,
) -> bool {
    if chosen.len() == n + 2 {
        return visit(chosen);
    }
    for p in pool {
        if chosen.contains(p) || !extends_frame(f, chosen, p, n) {
            continue;
        }
        chosen.push(p.clone());
        let stop = frames_from(f, pool, n, chosen, visit);
        chosen.pop();
        if stop {
            return true;
        }
    }
    false
}

fn unit(i: usize) -> Monomial {
    let mut e = [0u8; MAX_VARS];
    e[i] = 1;
    Monomial(e)
}

fn hyperplane_vanishes(field: &Arc<Field>, space: &PointSpace, zeros: &[bool], form: &[Elem]) -> bool {
    let basis = Matrix::from_rows(field, &[form.to_vec()]).kernel();
    let sub = PointSpace::new(field, basis.len() - 1);
    let mut coords = Vec::new();
    let mut v = vec![Elem::ZERO; form.len()];
    for i in 0..sub.len() {
        sub.coords_into(i, &mut coords);
        v.iter_mut().for_each(|c| *c = Elem::ZERO);
        for (&c, b) in coords.iter().zip(&basis) {
            if c.is_zero() {
                continue;
            }
            for (slot, &bj) in v.iter_mut().zip(b) {
                *slot = field.add(*slot, field.mul(c, bj));
            }
        }
        if !zeros[space.index_of_vector(&v).unwrap()] {
            return false;
        }
    }
    true
}

fn fmt_coeff(field: &Field, c: Elem) -> String {
    if c.0 < field.p() {
        c.0.to_string()
    } else {
        match field.log(c).unwrap() {
            1 => "w".to_string(),
            k => format!("w^{k}"),
        }
    }
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, &c) in &self.terms {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            let mut parts = Vec::new();
            if c != Elem::ONE || m.degree() == 0 {
                parts.push(fmt_coeff(&self.field, c));
            }
            for (i, &e) in m.0[..self.nvars].iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(format!("X{i}")),
                    _ => parts.push(format!("X{i}^{e}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

mod parse {
    use super::*;

    struct Cursor<'a> {
        chars: Vec<char>,
        pos: usize,
        _src: &'a str,
    }

    impl Cursor<'_> {
        fn peek(&self) -> Option<char> {
            self.chars.get(self.pos).copied()
        }

        fn skip_ws(&mut self) {
            while self.peek().is_some_and(char::is_whitespace) {
                self.pos += 1;
            }
        }

        fn location(&self, pos: usize) -> (usize, usize) {
            let mut line = 1;
            let mut col = 1;
            for &c in &self.chars[..pos.min(self.chars.len())] {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            (line, col)
        }

        fn error(&self, pos: usize, message: impl Into<String>) -> ParseError {
            let (line, column) = self.location(pos);
            ParseError { line, column, message: message.into() }
        }

        fn number(&mut self) -> Option<u64> {
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if start == self.pos {
                return None;
            }
            self.chars[start..self.pos].iter().collect::<String>().parse().ok()
        }

        fn exponent(&mut self) -> Result<u64, ParseError> {
            self.skip_ws();
            if self.peek() != Some('^') {
                return Ok(1);
            }
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            self.number().ok_or_else(|| self.error(at, "expected an exponent after '^'"))
        }
    }

    struct Term {
        start: usize,
        coeff: Elem,
        exps: [u32; MAX_VARS],
        max_var: Option<usize>,
    }

    pub(super) fn parse(field: &Arc<Field>, text: &str, nvars: Option<usize>) -> Result<HomPoly, ParseError> {
        let mut cur = Cursor { chars: text.chars().collect(), pos: 0, _src: text };
        let mut terms = Vec::new();
        let mut sign = Elem::ONE;
        cur.skip_ws();
        if cur.peek() == Some('-') {
            sign = field.neg(Elem::ONE);
            cur.pos += 1;
        } else if cur.peek() == Some('+') {
            cur.pos += 1;
        }
        loop {
            cur.skip_ws();
            let start = cur.pos;
            let mut term = Term { start, coeff: sign, exps: [0; MAX_VARS], max_var: None };
            loop {
                cur.skip_ws();
                let at = cur.pos;
                match cur.peek() {
                    Some('X') | Some('x') => {
                        cur.pos += 1;
                        let idx =
                            cur.number().ok_or_else(|| cur.error(cur.pos, "expected a variable index after 'X'"))?;
                        if idx as usize >= MAX_VARS {
                            return Err(cur.error(at, format!("variable X{idx} out of range (X0..X3)")));
                        }
                        let e = cur.exponent()?;
                        term.exps[idx as usize] += e as u32;
                        term.max_var = term.max_var.max(Some(idx as usize));
                    }
                    Some('w') => {
                        cur.pos += 1;
                        let e = cur.exponent()?;
                        term.coeff = field.mul(term.coeff, field.pow(field.primitive(), e));
                    }
                    Some(c) if c.is_ascii_digit() => {
                        let n = cur.number().unwrap();
                        term.coeff = field.mul(term.coeff, field.from_int((n % field.p() as u64) as i64));
                    }
                    Some(c) => return Err(cur.error(at, format!("unexpected character '{c}'"))),
                    None => return Err(cur.error(at, "unexpected end of input")),
                }
                cur.skip_ws();
                if cur.peek() == Some('*') {
                    cur.pos += 1;
                } else {
                    break;
                }
            }
            terms.push(term);
            cur.skip_ws();
            match cur.peek() {
                None => break,
                Some('+') => {
                    sign = Elem::ONE;
                    cur.pos += 1;
                }
                Some('-') => {
                    sign = field.neg(Elem::ONE);
                    cur.pos += 1;
                }
                Some(c) => return Err(cur.error(cur.pos, format!("expected '+', '-' or '*', found '{c}'"))),
            }
        }

        let degree: u32 = terms[0].exps.iter().sum();
        for t in &terms {
            let d: u32 = t.exps.iter().sum();
            if d != degree {
                return Err(cur.error(t.start, format!("term has degree {d} but the polynomial has degree {degree}")));
            }
            if t.exps.iter().any(|&e| e > u8::MAX as u32) {
                return Err(cur.error(t.start, "exponent too large"));
            }
        }
        let inferred = terms.iter().filter_map(|t| t.max_var).max().map_or(1, |m| m + 1).max(2);
        let nv = match nvars {
            Some(n) => {
                if let Some(t) = terms.iter().find(|t| t.max_var.is_some_and(|m| m >= n)) {
                    return Err(cur.error(t.start, format!("variable out of range for {n} variables")));
                }
                n
            }
            None => inferred,
        };
        let mut p = HomPoly::zero(field, nv, degree);
        for t in terms {
            let mut e = [0u8; MAX_VARS];
            for i in 0..MAX_VARS {
                e[i] = t.exps[i] as u8;
            }
            p.add_term(Monomial(e), t.coeff);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pg::{enumerate_lines, enumerate_planes, line_through};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(q: u64) -> Arc<Field> {
        Field::registry(q).unwrap()
    }

    fn pt(field: &Field, c: &[u32]) -> ProjPoint {
        ProjPoint::from_indices(field, c).unwrap()
    }

    fn fermat(field: &Arc<Field>, nvars: usize, d: u32) -> HomPoly {
        let mut p = HomPoly::zero(field, nvars, d);
        for i in 0..nvars {
            let mut e = [0u8; MAX_VARS];
            e[i] = d as u8;
            p.add_term(Monomial(e), Elem::ONE);
        }
        p
    }

    fn random_poly(field: &Arc<Field>, nvars: usize, d: u32, rng: &mut ChaCha8Rng) -> HomPoly {
        let coeffs: Vec<Elem> = monomials(nvars, d).iter().map(|_| Elem(rng.random_range(0..field.q()))).collect();
        HomPoly::from_dense(field, nvars, d, &coeffs)
    }

    /// Direct count by looping over all points and evaluating term by term.
    fn brute_count(p: &HomPoly) -> u64 {
        let fq = p.field();
        let space = PointSpace::new(fq, p.nvars() - 1);
        space
            .iter()
            .filter(|x| {
                let mut acc = Elem::ZERO;
                for (m, &c) in p.terms() {
                    let mut v = c;
                    for i in 0..p.nvars() {
                        for _ in 0..m.0[i] {
                            v = fq.mul(v, x.coords()[i]);
                        }
                    }
                    acc = fq.add(acc, v);
                }
                acc.is_zero()
            })
            .count() as u64
    }

    #[test]
    fn monomial_order() {
        let m = monomials(3, 3);
        assert_eq!(m.len(), 10);
        assert_eq!(m[0].0, [3, 0, 0, 0]);
        assert_eq!(m[1].0, [2, 1, 0, 0]);
        assert_eq!(m[9].0, [0, 0, 3, 0]);
        assert_eq!(monomials(4, 4).len(), 35);
        let mut sorted = m.clone();
        sorted.sort();
        assert_eq!(sorted, m);
    }

    #[test]
    fn evaluation_examples() {
        let f4 = f(4);
        let c = fermat(&f4, 3, 3);
        assert_eq!(c.evaluate(&[Elem(1), Elem(1), Elem(1)]), Elem(1));
        assert_eq!(c.evaluate(&[Elem(0), Elem(1), Elem(1)]), Elem(0));
        let xy = HomPoly::parse(&f4, "X0*X1", Some(4)).unwrap();
        assert_eq!(xy.evaluate_point(&pt(&f4, &[1, 0, 0, 0])), Elem::ZERO);
    }

    #[test]
    fn count_examples() {
        let f4 = f(4);
        assert_eq!(fermat(&f4, 3, 3).count_points(&f4).unwrap(), 9);
        assert_eq!(fermat(&f4, 4, 3).count_points(&f4).unwrap(), 45);
        let f9 = f(9);
        let h0 = fermat(&f9, 2, 4);
        assert_eq!(h0.count_points(&f9).unwrap(), 4);
        assert_eq!(brute_count(&h0), 4);
        // over an extension: same as counting the embedded polynomial directly
        let f16 = f(16);
        let h1 = fermat(&f4, 3, 3);
        assert_eq!(h1.count_points(&f16).unwrap(), brute_count(&h1.over(&f16).unwrap()));
    }

    #[test]
    fn fast_count_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for q in [4u64, 9, 16] {
            let fq = f(q);
            for _ in 0..10 {
                let p = random_poly(&fq, 3, 3, &mut rng);
                assert_eq!(p.count_points(&fq).unwrap(), brute_count(&p));
            }
        }
    }

    #[test]
    fn sharded_count_sums() {
        let f9 = f(9);
        let p = fermat(&f9, 4, 4);
        let total: u64 = (0..4).map(|s| p.count_points_shard(&f9, s, 4).unwrap()).sum();
        assert_eq!(total, p.count_points(&f9).unwrap());
    }

    #[test]
    fn restriction_examples() {
        let f4 = f(4);
        let s = fermat(&f4, 4, 3);
        let h = ProjPlane::from_indices(&f4, &[1, 0, 0, 0]).unwrap();
        assert_eq!(s.restrict_to_plane(&h).unwrap(), fermat(&f4, 3, 3));
        let divisible = HomPoly::parse(&f4, "X0*X1^2", Some(4)).unwrap();
        assert!(divisible.restrict_to_plane(&h).is_none());
    }

    #[test]
    fn restriction_counts_match_incidence() {
        let f4 = f(4);
        let space = PointSpace::new(&f4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let s = random_poly(&f4, 4, 3, &mut rng);
            for h in enumerate_planes(&f4) {
                let direct =
                    space.iter().filter(|p| h.contains(&f4, p) && s.evaluate_point(p).is_zero()).count() as u64;
                match s.restrict_to_plane(&h) {
                    Some(c) => assert_eq!(c.count_points(&f4).unwrap(), direct),
                    None => assert_eq!(direct, 21),
                }
            }
        }
    }

    #[test]
    fn substitution_preserves_counts() {
        let f4 = f(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_poly(&f4, 4, 3, &mut rng);
        let n = s.count_points(&f4).unwrap();
        assert_eq!(s.linear_substitute(&ProjTransform::identity(&f4, 3)), s);
        for _ in 0..20 {
            let t = ProjTransform::random(&f4, 3, &mut rng);
            let g = s.linear_substitute(&t);
            assert_eq!(g.count_points(&f4).unwrap(), n);
            // zero set of F o T is T^{-1} of the zero set of F
            let space = PointSpace::new(&f4, 3);
            let tinv = t.inverse();
            for p in space.iter().filter(|p| s.evaluate_point(p).is_zero()) {
                assert!(g.evaluate_point(&tinv.apply_point(&p)).is_zero());
            }
            let u = ProjTransform::random(&f4, 3, &mut rng);
            assert!(s.linear_substitute(&t.compose(&u)).scalar_equal(&g.linear_substitute(&u)));
        }
    }

    #[test]
    fn shear_moves_plane() {
        let f4 = f(4);
        let a = Elem(2);
        // X1 -> X1 + a X0 : G(X) = F(X0, X1 + a X0, X2, X3)
        let mut m = Matrix::identity(&f4, 4);
        m.set(1, 0, a);
        let t = ProjTransform::new(m).unwrap();
        // F = X1 - a X0 vanishes on {X1 = a X0}; G = X1
        let lin = HomPoly::linear(&f4, &[f4.neg(a), Elem::ONE, Elem::ZERO, Elem::ZERO]);
        assert_eq!(lin.linear_substitute(&t), HomPoly::variable(&f4, 4, 1));
    }

    #[test]
    fn divide_examples() {
        let f4 = f(4);
        let p = HomPoly::parse(&f4, "X0*X1^2+X0*X1*X2", Some(3)).unwrap();
        let x0 = HomPoly::variable(&f4, 3, 0);
        let q = p.divide_by_linear(&x0).unwrap().unwrap();
        assert_eq!(q, HomPoly::parse(&f4, "X1^2+X1*X2", Some(3)).unwrap());
        assert_eq!(x0.mul(&q), p);

        let h1 = fermat(&f4, 3, 3);
        for form in PointSpace::new(&f4, 2).iter() {
            assert!(h1.divide_by_linear(&HomPoly::linear(&f4, form.coords())).unwrap().is_none());
        }

        let p = HomPoly::parse(&f4, "X0^2*X1", Some(3)).unwrap();
        let q1 = p.divide_by_linear(&x0).unwrap().unwrap();
        let q2 = q1.divide_by_linear(&x0).unwrap().unwrap();
        assert!(q2.divide_by_linear(&x0).unwrap().is_none());
        assert_eq!(q2, HomPoly::variable(&f4, 3, 1));
    }

    #[test]
    fn division_agrees_with_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for q in [4u64, 9] {
            let fq = f(q);
            for _ in 0..30 {
                let g = random_poly(&fq, 3, 2, &mut rng);
                let form = PointSpace::new(&fq, 2).point(rng.random_range(0..(q * q + q + 1) as usize));
                let l = HomPoly::linear(&fq, form.coords());
                let prod = l.mul(&g);
                let quot = prod.divide_by_linear(&l).unwrap().unwrap();
                assert_eq!(l.mul(&quot), prod);
                let (dq, dr) = prod.div_rem(&l);
                assert!(dr.is_zero());
                assert_eq!(dq, quot);
            }
        }
    }

    #[test]
    fn linear_component_examples() {
        let f4 = f(4);
        let pencil = HomPoly::parse(&f4, "X0^2*X1+X0*X1^2", Some(3)).unwrap();
        let comps = pencil.linear_components(1).unwrap();
        assert_eq!(comps.len(), 3);
        let vertex = pt(&f4, &[0, 0, 1]);
        for (l, m) in &comps {
            assert_eq!(*m, 1);
            assert!(l.evaluate_point(&vertex).is_zero());
        }
        let binary = HomPoly::parse(&f4, "X0^2+X0*X1+X1^2", Some(2)).unwrap();
        assert_eq!(binary.linear_components(1).unwrap().len(), 2);
        let h1 = fermat(&f4, 3, 3);
        assert!(h1.linear_components(1).unwrap().is_empty());
        assert!(h1.linear_components(2).unwrap().is_empty());
        assert!(h1.linear_components(3).unwrap().is_empty());
        // X0^2 + X0 X1 + X1^2 over F_2 viewed in F_4 picks up both roots
        let sq = HomPoly::parse(&f4, "X0^2*X1", Some(3)).unwrap();
        let comps = sq.linear_components(1).unwrap();
        assert_eq!(comps.iter().map(|c| c.1).collect::<Vec<_>>(), vec![2, 1]);
    }

    #[test]
    fn conjugate_lines_over_extension() {
        // X0^2 + X0 X1 + X1^2 over F_2 splits only over F_4
        let f2 = f(2);
        let c = HomPoly::parse(&f2, "X0^2+X0*X1+X1^2", Some(3)).unwrap();
        assert!(c.linear_components(1).unwrap().is_empty());
        assert_eq!(c.linear_components(2).unwrap().len(), 2);
    }

    #[test]
    fn singular_point_examples() {
        let f4 = f(4);
        assert!(fermat(&f4, 3, 3).singular_points().is_empty());
        let tri = HomPoly::parse(&f4, "X0*X1*X2", None).unwrap();
        let sing = tri.singular_points();
        assert_eq!(sing, vec![pt(&f4, &[1, 0, 0]), pt(&f4, &[0, 1, 0]), pt(&f4, &[0, 0, 1])]);
        let cusp = HomPoly::parse(&f4, "X0^3+X1^2*X2", None).unwrap();
        assert!(cusp.singular_points().contains(&pt(&f4, &[0, 0, 1])));
    }

    #[test]
    fn tangents_and_multiplicities() {
        let f4 = f(4);
        let h1 = fermat(&f4, 3, 3);
        let p = pt(&f4, &[0, 1, 1]);
        let t = h1.tangent_line(&p).unwrap();
        assert_eq!(t.form(&f4).unwrap(), pt(&f4, &[0, 1, 1]));
        assert!(t.contains(&f4, &p));
        for p in PointSpace::new(&f4, 2).iter().filter(|p| h1.evaluate_point(p).is_zero()) {
            let t = h1.tangent_line(&p).unwrap();
            assert_eq!(h1.intersection_multiplicity(&t, &p).unwrap(), 3);
        }
        let c = HomPoly::parse(&f4, "X0^3+X1*X2^2", None).unwrap();
        let l = ProjLine::from_form(&f4, &[Elem(0), Elem(1), Elem(0)]).unwrap();
        assert_eq!(c.intersection_multiplicity(&l, &pt(&f4, &[0, 0, 1])).unwrap(), 3);
        // X0 X1 + X2^2 against X0 = 0 at (0,1,0): X2^2 vanishes to order 2, tangent
        let conic = HomPoly::parse(&f4, "X0*X1+X2^2", None).unwrap();
        let l0 = ProjLine::from_form(&f4, &[Elem(1), Elem(0), Elem(0)]).unwrap();
        assert_eq!(conic.intersection_multiplicity(&l0, &pt(&f4, &[0, 1, 0])).unwrap(), 2);
        let l2 = line_through(&f4, &pt(&f4, &[0, 1, 0]), &pt(&f4, &[1, 0, 1])).unwrap();
        assert_eq!(conic.intersection_multiplicity(&l2, &pt(&f4, &[0, 1, 0])).unwrap(), 1);
        assert_eq!(tri_err(&f4), PolyError::SingularPoint);
        let comp = HomPoly::parse(&f4, "X0*X1*X2", None).unwrap();
        assert_eq!(comp.intersection_multiplicity(&l0, &pt(&f4, &[0, 1, 0])), Err(PolyError::LineInCurve));
    }

    fn tri_err(f4: &Arc<Field>) -> PolyError {
        let tri = HomPoly::parse(f4, "X0*X1*X2", None).unwrap();
        tri.tangent_line(&pt(f4, &[1, 0, 0])).unwrap_err()
    }

    #[test]
    fn tangent_contacts_are_at_least_two() {
        let f4 = f(4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let c = random_poly(&f4, 3, 3, &mut rng);
            for p in PointSpace::new(&f4, 2).iter().filter(|p| c.evaluate_point(p).is_zero()) {
                if let Ok(t) = c.tangent_line(&p) {
                    match c.intersection_multiplicity(&t, &p) {
                        Ok(m) => assert!(m >= 2),
                        Err(e) => assert_eq!(e, PolyError::LineInCurve),
                    }
                }
            }
        }
    }

    #[test]
    fn lines_on_hermitian_surface_via_restriction() {
        let f4 = f(4);
        let s = fermat(&f4, 4, 3);
        let n = enumerate_lines(&f4, 3).iter().filter(|l| s.contains_line(l)).count();
        assert_eq!(n, 27);
    }

    #[test]
    fn parser_round_trip_and_errors() {
        let f4 = f(4);
        let p = HomPoly::parse(&f4, "w^2*X0^2*X1 + X1^3 + w*X2^3", None).unwrap();
        assert_eq!(p.nvars(), 3);
        assert_eq!(p.coeff(&Monomial([2, 1, 0, 0])), Elem(3));
        assert_eq!(HomPoly::parse(&f4, &p.to_string(), None).unwrap(), p);
        let err = HomPoly::parse(&f4, "X0^3 + X1^2", None).unwrap_err();
        match err {
            PolyError::Parse(e) => assert_eq!((e.line, e.column), (1, 8)),
            other => panic!("{other:?}"),
        }
        assert!(HomPoly::parse(&f4, "X0^3 + ?", None).is_err());
        assert!(HomPoly::parse(&f4, "X7^3", None).is_err());
        assert!(HomPoly::parse(&f4, "X3^3", Some(3)).is_err());
        let f9 = f(9);
        let q = HomPoly::parse(&f9, "X0^4 - X1^4", None).unwrap();
        assert_eq!(q.coeff(&Monomial([0, 4, 0, 0])), Elem(2));
    }

    #[test]
    fn equivalence_recovers_transport() {
        let f4 = f(4);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h1 = fermat(&f4, 3, 3);
        for _ in 0..5 {
            let t = ProjTransform::random(&f4, 2, &mut rng);
            let g = h1.linear_substitute(&t).scale(Elem(2));
            let found = projectively_equivalent(&h1, &g).unwrap().unwrap();
            assert!(h1.linear_substitute(&found).scalar_equal(&g));
        }
        let nodal = HomPoly::parse(&f4, "X0*X1*X2+X1^3+X2^3", None).unwrap();
        assert_eq!(projectively_equivalent(&h1, &nodal).unwrap(), None);
        // no frame on the zero set: falls back to the standard frame
        let triple = HomPoly::parse(&f4, "X0^2*X1+X0*X1^2", Some(3)).unwrap().mul(&HomPoly::variable(&f4, 3, 2));
        let t = ProjTransform::random(&f4, 2, &mut rng);
        let moved = triple.linear_substitute(&t);
        let found = projectively_equivalent(&triple, &moved).unwrap().unwrap();
        assert!(triple.linear_substitute(&found).scalar_equal(&moved));
        let line = HomPoly::parse(&f4, "X0^3", Some(3)).unwrap();
        let moved = line.linear_substitute(&t);
        let found = projectively_equivalent(&line, &moved).unwrap().unwrap();
        assert!(line.linear_substitute(&found).scalar_equal(&moved));
    }

    proptest::proptest! {
        #[test]
        fn parse_display_round_trip(coeffs in proptest::collection::vec(0u32..9, 15)) {
            let f9 = f(9);
            let c: Vec<Elem> = coeffs.into_iter().map(Elem).collect();
            let p = HomPoly::from_dense(&f9, 3, 4, &c);
            if !p.is_zero() {
                let back = HomPoly::parse(&f9, &p.to_string(), Some(3)).unwrap();
                proptest::prop_assert_eq!(back, p);
            }
        }

        #[test]
        fn product_divides(a in proptest::collection::vec(0u32..4, 6), l in proptest::collection::vec(0u32..4, 3)) {
            let f4 = f(4);
            let g = HomPoly::from_dense(&f4, 3, 2, &a.into_iter().map(Elem).collect::<Vec<_>>());
            let lin = HomPoly::linear(&f4, &l.into_iter().map(Elem).collect::<Vec<_>>());
            proptest::prop_assume!(!lin.is_zero());
            let prod = lin.mul(&g);
            let q = prod.divide_by_linear(&lin).unwrap().unwrap();
            proptest::prop_assert_eq!(lin.mul(&q), prod);
        }
    }
}
