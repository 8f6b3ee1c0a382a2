//! Points, lines, planes and projectivities of `P^n(F_q)`, `n <= 3`, in canonical form.
//!
//! Points are scaled so the leading nonzero coordinate is 1; lines are stored as the
//! reduced row-echelon basis of their row space; planes as canonically scaled dual
//! vectors. Equality of these types is therefore equality of the geometric objects.
//!
//! Point enumeration order: points are grouped by the position of their leading 1
//! (position 0 first); within a group the trailing coordinates run through
//! `F_q^{n-k}` lexicographically by canonical index, first coordinate most
//! significant. [`PointSpace::index`] inverts this order.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::gf::{Elem, Field};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgError {
    #[error("points coincide; no unique line")]
    SamePoint,
    #[error("matrix is singular")]
    Singular,
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("rows do not span a line")]
    NotALine,
    #[error("unsupported projective dimension {0}")]
    UnsupportedDimension(usize),
}

/// A point of `P^n(F_q)` with leading nonzero coordinate 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ProjPoint {
    coords: Vec<Elem>,
}

impl ProjPoint {
    /// Scale a nonzero vector to canonical form.
    pub fn normalize(field: &Field, v: &[Elem]) -> Result<ProjPoint, PgError> {
        let lead = v.iter().find(|c| !c.is_zero()).ok_or(PgError::ZeroVector)?;
        let s = field.inv(*lead).expect("nonzero");
        Ok(ProjPoint { coords: v.iter().map(|&c| field.mul(c, s)).collect() })
    }

    pub fn from_indices(field: &Field, v: &[u32]) -> Result<ProjPoint, PgError> {
        let v: Vec<Elem> = v.iter().map(|&c| Elem(c)).collect();
        ProjPoint::normalize(field, &v)
    }

    pub fn coords(&self) -> &[Elem] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    fn lead(&self) -> usize {
        self.coords.iter().position(|c| !c.is_zero()).unwrap()
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.0.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Enumeration and ranking of the points of `P^n(F_q)`.
#[derive(Clone)]
pub struct PointSpace {
    field: Arc<Field>,
    n: usize,
    /// `offsets[k]` = index of the first point whose leading 1 sits at position `k`.
    offsets: Vec<usize>,
    len: usize,
}

impl PointSpace {
    pub fn new(field: &Arc<Field>, n: usize) -> PointSpace {
        let q = field.q() as usize;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        for k in 0..=n {
            offsets.push(acc);
            acc += q.pow((n - k) as u32);
        }
        PointSpace { field: Arc::clone(field), n, offsets, len: acc }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn point(&self, idx: usize) -> ProjPoint {
        let mut out = Vec::with_capacity(self.n + 1);
        self.coords_into(idx, &mut out);
        ProjPoint { coords: out }
    }

    /// Write the coordinates of point `idx` into `out` (cleared first).
    pub fn coords_into(&self, idx: usize, out: &mut Vec<Elem>) {
        assert!(idx < self.len);
        let q = self.field.q() as usize;
        let k = self.offsets.iter().rposition(|&o| o <= idx).unwrap();
        let mut rest = idx - self.offsets[k];
        out.clear();
        out.resize(self.n + 1, Elem::ZERO);
        out[k] = Elem::ONE;
        for pos in (k + 1..=self.n).rev() {
            out[pos] = Elem((rest % q) as u32);
            rest /= q;
        }
    }

    pub fn index(&self, p: &ProjPoint) -> usize {
        debug_assert_eq!(p.coords.len(), self.n + 1);
        let q = self.field.q() as usize;
        let k = p.lead();
        let mut rest = 0usize;
        for pos in k + 1..=self.n {
            rest = rest * q + p.coords[pos].0 as usize;
        }
        self.offsets[k] + rest
    }

    /// Index of the point spanned by a nonzero, not necessarily canonical, vector.
    pub fn index_of_vector(&self, v: &[Elem]) -> Option<usize> {
        let lead = v.iter().position(|c| !c.is_zero())?;
        let s = self.field.inv(v[lead]).unwrap();
        let q = self.field.q() as usize;
        let mut rest = 0usize;
        for &c in &v[lead + 1..] {
            rest = rest * q + self.field.mul(c, s).0 as usize;
        }
        Some(self.offsets[lead] + rest)
    }

    pub fn iter(&self) -> impl Iterator<Item = ProjPoint> + '_ {
        (0..self.len).map(move |i| self.point(i))
    }

    /// Points `start, start + stride, ...`; disjoint shards cover the space.
    pub fn iter_shard(&self, start: usize, stride: usize) -> impl Iterator<Item = ProjPoint> + '_ {
        (start..self.len).step_by(stride.max(1)).map(move |i| self.point(i))
    }
}

/// Dense matrix over `F_q`, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Arc<Field>,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<u32>> = (0..self.rows).map(|i| self.row(i).iter().map(|c| c.0).collect()).collect();
        write!(f, "Matrix{rows:?}")
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[Elem]> = (0..self.rows).map(|i| self.row(i)).collect();
        rows.serialize(s)
    }
}

impl Matrix {
    pub fn zeros(field: &Arc<Field>, rows: usize, cols: usize) -> Matrix {
        Matrix { field: Arc::clone(field), rows, cols, data: vec![Elem::ZERO; rows * cols] }
    }

    pub fn identity(field: &Arc<Field>, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Elem::ONE);
        }
        m
    }

    pub fn from_rows(field: &Arc<Field>, rows: &[Vec<Elem>]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Matrix { field: Arc::clone(field), rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn from_indices(field: &Arc<Field>, rows: &[Vec<u32>]) -> Matrix {
        let rows: Vec<Vec<Elem>> = rows.iter().map(|r| r.iter().map(|&c| Elem(c)).collect()).collect();
        Matrix::from_rows(field, &rows)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: &Arc<Field>, cols: &[Vec<Elem>]) -> Matrix {
        Matrix::from_rows(field, cols).transpose()
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Apply a map entrywise.
    pub fn map(&self, f: impl Fn(Elem) -> Elem) -> Matrix {
        Matrix {
            field: Arc::clone(&self.field),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn scale(&self, s: Elem) -> Matrix {
        self.map(|c| self.field.mul(c, s))
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix shapes");
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, f.add(cur, f.mul(a, other.get(k, j))));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Elem]) -> Vec<Elem> {
        assert_eq!(self.cols, v.len());
        let f = &self.field;
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Elem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Elem]) -> Vec<Elem> {
        self.transpose().mul_vec(v)
    }

    /// Reduced row-echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    let (a, b) = (m.get(r, j), m.get(pr, j));
                    m.set(r, j, b);
                    m.set(pr, j, a);
                }
            }
            let inv = f.inv(m.get(r, c)).unwrap();
            for j in 0..m.cols {
                let v = m.get(r, j);
                m.set(r, j, f.mul(v, inv));
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn det(&self) -> Elem {
        assert_eq!(self.rows, self.cols);
        let f = &self.field;
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Elem::ONE;
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Elem::ZERO;
            };
            if pr != c {
                for j in 0..n {
                    let (a, b) = (m.get(c, j), m.get(pr, j));
                    m.set(c, j, b);
                    m.set(pr, j, a);
                }
                det = f.neg(det);
            }
            let piv = m.get(c, c);
            det = f.mul(det, piv);
            let inv = f.inv(piv).unwrap();
            for i in c + 1..n {
                let factor = f.mul(m.get(i, c), inv);
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Matrix::zeros(&self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, Elem::ONE);
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(&self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j));
            }
        }
        Some(inv)
    }

    /// Basis of the right kernel, one vector per non-pivot column in increasing order.
    pub fn kernel(&self) -> Vec<Vec<Elem>> {
        let f = &self.field;
        let (r, pivots) = self.rref();
        (0..self.cols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![Elem::ZERO; self.cols];
                v[free] = Elem::ONE;
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(r.get(row, free));
                }
                v
            })
            .collect()
    }
}

/// An `F_q`-line of `P^n`, stored as its 2-row RREF basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ProjLine {
    basis: [Vec<Elem>; 2],
}

impl ProjLine {
    pub fn from_rows(field: &Arc<Field>, a: &[Elem], b: &[Elem]) -> Result<ProjLine, PgError> {
        if a.len() != b.len() {
            return Err(PgError::Dimension { expected: a.len(), got: b.len() });
        }
        let (r, pivots) = Matrix::from_rows(field, &[a.to_vec(), b.to_vec()]).rref();
        if pivots.len() != 2 {
            return Err(PgError::NotALine);
        }
        Ok(ProjLine { basis: [r.row(0).to_vec(), r.row(1).to_vec()] })
    }

    /// The line of `P^2` with equation `form . x = 0`.
    pub fn from_form(field: &Arc<Field>, form: &[Elem]) -> Result<ProjLine, PgError> {
        if form.len() != 3 {
            return Err(PgError::Dimension { expected: 3, got: form.len() });
        }
        let k = Matrix::from_rows(field, &[form.to_vec()]).kernel();
        if k.len() != 2 {
            return Err(PgError::ZeroVector);
        }
        ProjLine::from_rows(field, &k[0], &k[1])
    }

    pub fn basis(&self) -> &[Vec<Elem>; 2] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len() - 1
    }

    fn pivots(&self) -> (usize, usize) {
        let p0 = self.basis[0].iter().position(|c| !c.is_zero()).unwrap();
        let p1 = self.basis[1].iter().position(|c| !c.is_zero()).unwrap();
        (p0, p1)
    }

    /// The `q+1` points: `r0 + a r1` for `a` in index order, then `r1`.
    pub fn points(&self, field: &Field) -> Vec<ProjPoint> {
        let mut out: Vec<ProjPoint> = field
            .elements()
            .map(|a| ProjPoint {
                coords: self.basis[0]
                    .iter()
                    .zip(&self.basis[1])
                    .map(|(&x, &y)| field.add(x, field.mul(a, y)))
                    .collect(),
            })
            .collect();
        out.push(ProjPoint { coords: self.basis[1].clone() });
        out
    }

    pub fn contains(&self, field: &Field, p: &ProjPoint) -> bool {
        let (p0, p1) = self.pivots();
        let (x, y) = (p.coords[p0], p.coords[p1]);
        self.basis[0]
            .iter()
            .zip(&self.basis[1])
            .zip(&p.coords)
            .all(|((&a, &b), &c)| field.add(field.mul(x, a), field.mul(y, b)) == c)
    }

    /// The equation of a line of `P^2`, canonically scaled.
    pub fn form(&self, field: &Arc<Field>) -> Result<ProjPoint, PgError> {
        if self.dim() != 2 {
            return Err(PgError::UnsupportedDimension(self.dim()));
        }
        let k = Matrix::from_rows(field, &[self.basis[0].clone(), self.basis[1].clone()]).kernel();
        ProjPoint::normalize(field, &k[0])
    }
}

pub fn line_through(field: &Arc<Field>, p: &ProjPoint, q: &ProjPoint) -> Result<ProjLine, PgError> {
    if p == q {
        return Err(PgError::SamePoint);
    }
    ProjLine::from_rows(field, &p.coords, &q.coords)
}

/// All lines of `P^n(F_q)` by RREF shape: pivot pair `(i, j)`, then free entries.
pub fn enumerate_lines(field: &Arc<Field>, n: usize) -> Vec<ProjLine> {
    let q = field.q() as usize;
    let mut out = Vec::new();
    for i in 0..=n {
        for j in i + 1..=n {
            // free slots: row 0 at columns > i except j; row 1 at columns > j
            let free0: Vec<usize> = (i + 1..=n).filter(|&c| c != j).collect();
            let free1: Vec<usize> = (j + 1..=n).collect();
            let slots = free0.len() + free1.len();
            for code in 0..q.pow(slots as u32) {
                let mut r0 = vec![Elem::ZERO; n + 1];
                let mut r1 = vec![Elem::ZERO; n + 1];
                r0[i] = Elem::ONE;
                r1[j] = Elem::ONE;
                let mut c = code;
                for &col in free1.iter().rev() {
                    r1[col] = Elem((c % q) as u32);
                    c /= q;
                }
                for &col in free0.iter().rev() {
                    r0[col] = Elem((c % q) as u32);
                    c /= q;
                }
                out.push(ProjLine { basis: [r0, r1] });
            }
        }
    }
    out
}

/// A plane of `P^3` given by its canonically scaled dual vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ProjPlane {
    coeffs: Vec<Elem>,
}

impl ProjPlane {
    pub fn new(field: &Field, coeffs: &[Elem]) -> Result<ProjPlane, PgError> {
        if coeffs.len() != 4 {
            return Err(PgError::Dimension { expected: 4, got: coeffs.len() });
        }
        Ok(ProjPlane { coeffs: ProjPoint::normalize(field, coeffs)?.coords })
    }

    pub fn from_indices(field: &Field, coeffs: &[u32]) -> Result<ProjPlane, PgError> {
        let v: Vec<Elem> = coeffs.iter().map(|&c| Elem(c)).collect();
        ProjPlane::new(field, &v)
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn as_dual_point(&self) -> ProjPoint {
        ProjPoint { coords: self.coeffs.clone() }
    }

    pub fn contains(&self, field: &Field, p: &ProjPoint) -> bool {
        dot(field, &self.coeffs, &p.coords).is_zero()
    }

    pub fn contains_line(&self, field: &Field, l: &ProjLine) -> bool {
        l.basis.iter().all(|r| dot(field, &self.coeffs, r).is_zero())
    }

    pub fn frame(&self, field: &Arc<Field>) -> PlaneFrame {
        parametrize_plane(field, self)
    }

    pub fn points(&self, field: &Arc<Field>) -> Vec<ProjPoint> {
        let frame = self.frame(field);
        PointSpace::new(field, 2).iter().map(|x| frame.embed(field, x.coords())).collect()
    }
}

pub fn dot(field: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    a.iter().zip(b).fold(Elem::ZERO, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}

/// All `(q^4-1)/(q-1)` planes of `P^3`, in dual point order.
pub fn enumerate_planes(field: &Arc<Field>) -> Vec<ProjPlane> {
    PointSpace::new(field, 3).iter().map(|p| ProjPlane { coeffs: p.coords }).collect()
}

pub fn planes_through_line(field: &Arc<Field>, l: &ProjLine) -> Result<Vec<ProjPlane>, PgError> {
    if l.dim() != 3 {
        return Err(PgError::UnsupportedDimension(l.dim()));
    }
    let k = Matrix::from_rows(field, &[l.basis[0].clone(), l.basis[1].clone()]).kernel();
    let line = ProjLine::from_rows(field, &k[0], &k[1])?;
    Ok(line.points(field).into_iter().map(|p| ProjPlane { coeffs: p.coords }).collect())
}

/// Fixed basis of a plane `H`: the kernel vectors of `H`'s coefficient row, one per
/// non-pivot coordinate in increasing order. The vector for coordinate `j` has a 1 at
/// `j`, so a point of `H` has plane coordinates equal to its entries at those positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaneFrame {
    pub vectors: [Vec<Elem>; 3],
    pub free: [usize; 3],
}

impl PlaneFrame {
    /// `sum x_i v_i` as a point of `P^3`.
    pub fn embed(&self, field: &Field, x: &[Elem]) -> ProjPoint {
        let mut v = vec![Elem::ZERO; 4];
        for (xi, vec) in x.iter().zip(&self.vectors) {
            for (slot, &c) in v.iter_mut().zip(vec) {
                *slot = field.add(*slot, field.mul(*xi, c));
            }
        }
        ProjPoint::normalize(field, &v).expect("frame vectors are independent")
    }

    /// Plane coordinates of a point lying on the plane.
    pub fn coordinates(&self, field: &Field, p: &ProjPoint) -> ProjPoint {
        let x: Vec<Elem> = self.free.iter().map(|&j| p.coords[j]).collect();
        ProjPoint::normalize(field, &x).expect("point lies on the plane")
    }

    /// The 4x3 matrix with the frame vectors as columns.
    pub fn matrix(&self, field: &Arc<Field>) -> Matrix {
        Matrix::from_columns(field, &self.vectors)
    }

    pub fn points(&self, field: &Field) -> [ProjPoint; 3] {
        [0, 1, 2].map(|i| ProjPoint::normalize(field, &self.vectors[i]).unwrap())
    }
}

pub fn parametrize_plane(field: &Arc<Field>, h: &ProjPlane) -> PlaneFrame {
    let k = Matrix::from_rows(field, &[h.coeffs.clone()]).kernel();
    let pivot = h.coeffs.iter().position(|c| !c.is_zero()).unwrap();
    let free: Vec<usize> = (0..4).filter(|&j| j != pivot).collect();
    PlaneFrame { vectors: [k[0].clone(), k[1].clone(), k[2].clone()], free: [free[0], free[1], free[2]] }
}

/// An element of `PGL(n+1, F_q)`: invertible matrix scaled so its first nonzero entry is 1.
/// Acts on points by `x -> M x`.
#[derive(Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ProjTransform {
    matrix: Matrix,
}

impl fmt::Debug for ProjTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProjTransform({:?})", self.matrix)
    }
}

impl ProjTransform {
    pub fn new(matrix: Matrix) -> Result<ProjTransform, PgError> {
        if matrix.rows != matrix.cols {
            return Err(PgError::Dimension { expected: matrix.rows, got: matrix.cols });
        }
        if matrix.det().is_zero() {
            return Err(PgError::Singular);
        }
        let lead = *matrix.data.iter().find(|c| !c.is_zero()).unwrap();
        let s = matrix.field.inv(lead).unwrap();
        Ok(ProjTransform { matrix: matrix.scale(s) })
    }

    pub fn identity(field: &Arc<Field>, n: usize) -> ProjTransform {
        ProjTransform { matrix: Matrix::identity(field, n + 1) }
    }

    /// Uniform over `PGL(n+1, F_q)` by rejection.
    pub fn random(field: &Arc<Field>, n: usize, rng: &mut impl RngCore) -> ProjTransform {
        let q = field.q() as u64;
        loop {
            let mut m = Matrix::zeros(field, n + 1, n + 1);
            for i in 0..=n {
                for j in 0..=n {
                    m.set(i, j, Elem(uniform_below(rng, q) as u32));
                }
            }
            if let Ok(t) = ProjTransform::new(m) {
                return t;
            }
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows - 1
    }

    pub fn compose(&self, other: &ProjTransform) -> ProjTransform {
        ProjTransform::new(self.matrix.mul(&other.matrix)).expect("product of invertibles")
    }

    pub fn inverse(&self) -> ProjTransform {
        ProjTransform::new(self.matrix.inverse().expect("invertible")).unwrap()
    }

    pub fn apply_point(&self, p: &ProjPoint) -> ProjPoint {
        ProjPoint::normalize(&self.matrix.field, &self.matrix.mul_vec(&p.coords)).unwrap()
    }

    pub fn apply_line(&self, l: &ProjLine) -> ProjLine {
        let a = self.matrix.mul_vec(&l.basis[0]);
        let b = self.matrix.mul_vec(&l.basis[1]);
        ProjLine::from_rows(&self.matrix.field, &a, &b).unwrap()
    }

    /// `h -> h M^{-1}`, so that `P in H` iff `T P in T H`.
    pub fn apply_plane(&self, h: &ProjPlane) -> ProjPlane {
        let inv = self.matrix.inverse().unwrap();
        ProjPlane::new(&self.matrix.field, &inv.vec_mul(&h.coeffs)).unwrap()
    }
}

/// Unbiased integer in `[0, n)` from a 64-bit stream.
pub(crate) fn uniform_below(rng: &mut impl RngCore, n: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(q: u64) -> Arc<Field> {
        Field::registry(q).unwrap()
    }

    fn gaussian_lines(q: usize, n: usize) -> usize {
        let pts = |k: usize| (q.pow(k as u32 + 1) - 1) / (q - 1);
        pts(n) * pts(n - 1) / (q + 1)
    }

    #[test]
    fn point_counts() {
        assert_eq!(PointSpace::new(&f(4), 2).len(), 21);
        assert_eq!(PointSpace::new(&f(4), 3).len(), 85);
        assert_eq!(PointSpace::new(&f(9), 3).len(), 820);
        for q in [4u64, 9, 16, 25] {
            let fq = f(q);
            for n in 1..=3 {
                let space = PointSpace::new(&fq, n);
                let qn = q as usize;
                assert_eq!(space.len(), (qn.pow(n as u32 + 1) - 1) / (qn - 1));
            }
        }
    }

    #[test]
    fn ranking_is_a_bijection() {
        for q in [4u64, 9] {
            let space = PointSpace::new(&f(q), 3);
            let mut seen = std::collections::HashSet::new();
            for (i, p) in space.iter().enumerate() {
                assert_eq!(space.index(&p), i);
                assert!(seen.insert(p));
            }
        }
        let space = PointSpace::new(&f(4), 2);
        assert_eq!(space.point(0).coords(), &[Elem(1), Elem(0), Elem(0)]);
        let shards: usize = (0..3).map(|s| space.iter_shard(s, 3).count()).sum();
        assert_eq!(shards, 21);
    }

    #[test]
    fn line_enumeration() {
        assert_eq!(enumerate_lines(&f(4), 3).len(), 357);
        assert_eq!(enumerate_lines(&f(9), 3).len(), 7462);
        for q in [4u64, 9, 16] {
            let fq = f(q);
            for n in 2..=3 {
                let lines = enumerate_lines(&fq, n);
                assert_eq!(lines.len(), gaussian_lines(q as usize, n));
                for l in lines.iter().take(500) {
                    let re = ProjLine::from_rows(&fq, &l.basis[0], &l.basis[1]).unwrap();
                    assert_eq!(&re, l);
                }
            }
        }
    }

    #[test]
    fn incidence_counts_p3() {
        let fq = f(4);
        let space = PointSpace::new(&fq, 3);
        let lines = enumerate_lines(&fq, 3);
        let mut through = vec![0usize; space.len()];
        for l in &lines {
            let pts = l.points(&fq);
            assert_eq!(pts.len(), 5);
            for p in &pts {
                assert!(l.contains(&fq, p));
                through[space.index(p)] += 1;
            }
        }
        assert!(through.iter().all(|&c| c == 21));
        for h in enumerate_planes(&fq) {
            let pts = h.points(&fq);
            assert_eq!(pts.len(), 21);
            assert!(pts.iter().all(|p| h.contains(&fq, p)));
            let direct = space.iter().filter(|p| h.contains(&fq, p)).count();
            assert_eq!(direct, 21);
        }
    }

    #[test]
    fn line_through_examples() {
        let fq = f(4);
        let p = ProjPoint::from_indices(&fq, &[1, 0, 0]).unwrap();
        let q = ProjPoint::from_indices(&fq, &[0, 1, 0]).unwrap();
        let l = line_through(&fq, &p, &q).unwrap();
        assert_eq!(l.form(&fq).unwrap().coords(), &[Elem(0), Elem(0), Elem(1)]);
        assert_eq!(l, line_through(&fq, &q, &p).unwrap());
        let pts = l.points(&fq);
        assert_eq!(pts.len(), 5);
        assert!(pts.contains(&p) && pts.contains(&q));
        assert_eq!(line_through(&fq, &p, &p), Err(PgError::SamePoint));
    }

    #[test]
    fn planes_through_lines() {
        for q in [4u64, 9] {
            let fq = f(q);
            let space = PointSpace::new(&fq, 3);
            for l in enumerate_lines(&fq, 3).iter().step_by(37) {
                let planes = planes_through_line(&fq, l).unwrap();
                assert_eq!(planes.len(), q as usize + 1);
                assert!(planes.iter().all(|h| h.contains_line(&fq, l)));
                let mut covered = vec![false; space.len()];
                for h in &planes {
                    for p in h.points(&fq) {
                        covered[space.index(&p)] = true;
                    }
                }
                assert!(covered.iter().all(|&c| c));
            }
        }
    }

    #[test]
    fn frames() {
        let fq = f(4);
        let h = ProjPlane::from_indices(&fq, &[1, 0, 0, 0]).unwrap();
        let frame = parametrize_plane(&fq, &h);
        let expect = [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
        for (v, e) in frame.vectors.iter().zip(expect) {
            assert_eq!(v.iter().map(|c| c.0).collect::<Vec<_>>(), e);
        }
        assert_eq!(parametrize_plane(&fq, &h), frame);
        for h in enumerate_planes(&fq) {
            let fr = parametrize_plane(&fq, &h);
            assert_eq!(fr.matrix(&fq).rank(), 3);
            let mut pts = h.points(&fq);
            pts.sort();
            pts.dedup();
            assert_eq!(pts.len(), 21);
            for p in &pts {
                assert_eq!(&fr.embed(&fq, fr.coordinates(&fq, p).coords()), p);
            }
        }
    }

    #[test]
    fn transform_action() {
        let fq = f(4);
        let space = PointSpace::new(&fq, 3);
        let id = ProjTransform::identity(&fq, 3);
        assert!(space.iter().all(|p| id.apply_point(&p) == p));

        let swap = ProjTransform::new(Matrix::from_indices(
            &fq,
            &[vec![1, 0, 0, 0], vec![0, 0, 1, 0], vec![0, 1, 0, 0], vec![0, 0, 0, 1]],
        ))
        .unwrap();
        let x1 = ProjPlane::from_indices(&fq, &[0, 1, 0, 0]).unwrap();
        let x2 = ProjPlane::from_indices(&fq, &[0, 0, 1, 0]).unwrap();
        assert_eq!(swap.apply_plane(&x1), x2);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = ProjTransform::random(&fq, 3, &mut rng);
        for h in enumerate_planes(&fq) {
            let th = t.apply_plane(&h);
            for p in space.iter() {
                assert_eq!(h.contains(&fq, &p), th.contains(&fq, &t.apply_point(&p)));
            }
        }
        for l in enumerate_lines(&fq, 3).iter().take(40) {
            let tl = t.apply_line(l);
            for p in l.points(&fq) {
                assert!(tl.contains(&fq, &t.apply_point(&p)));
            }
        }
    }

    #[test]
    fn composition() {
        let fq = f(9);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let space = PointSpace::new(&fq, 3);
        for _ in 0..20 {
            let t = ProjTransform::random(&fq, 3, &mut rng);
            let u = ProjTransform::random(&fq, 3, &mut rng);
            let tu = t.compose(&u);
            for p in space.iter().step_by(41) {
                assert_eq!(tu.apply_point(&p), t.apply_point(&u.apply_point(&p)));
            }
            assert_eq!(t.compose(&t.inverse()), ProjTransform::identity(&fq, 3));
        }
        let singular = Matrix::from_indices(&fq, &[vec![1, 1], vec![1, 1]]);
        assert_eq!(ProjTransform::new(singular).err(), Some(PgError::Singular));
    }

    #[test]
    fn matrix_algebra() {
        let fq = f(9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t = ProjTransform::random(&fq, 3, &mut rng);
            let m = t.matrix();
            let inv = m.inverse().unwrap();
            assert_eq!(m.mul(&inv), Matrix::identity(&fq, 4));
            let u = ProjTransform::random(&fq, 3, &mut rng);
            assert_eq!(m.mul(u.matrix()).det(), fq.mul(m.det(), u.matrix().det()));
        }
    }
}
