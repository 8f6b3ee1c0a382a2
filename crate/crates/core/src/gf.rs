//! Exact arithmetic in small finite fields `F_{p^e}`.
//!
//! Elements are canonical indices: the element `c_0 + c_1 t + ... + c_{e-1} t^{e-1}`
//! of `F_p[t]/(modulus)` is stored as `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`, so index 0
//! is zero, index 1 is one and indices below `p` form the prime subfield.
//! Multiplication goes through exp/log tables built once per field.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order for which tables are built.
pub const MAX_ORDER: u32 = 1 << 16;

/// Add tables are materialised up to this order; above it addition is digit-wise.
const ADD_TABLE_MAX: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("modulus must be monic of degree {expected}, got {got:?}")]
    BadModulus { expected: u32, got: Vec<u32> },
    #[error("modulus {0:?} is reducible over F_p")]
    Reducible(Vec<u32>),
    #[error("field order {0} exceeds the table ceiling {MAX_ORDER}")]
    TooLarge(u64),
    #[error("unsupported field order {q}; supported: {supported:?}")]
    Unsupported { q: u64, supported: Vec<u32> },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("F_{q} has odd extension degree, sqrt(q) is not a prime power")]
    NoSquareRoot { q: u32 },
    #[error("no embedding of F_{src} into F_{dst}")]
    NoEmbedding { src: u32, dst: u32 },
}

/// Canonical index of a field element. Only meaningful together with its [`Field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The defining data of `F_{p^e}`: characteristic, degree and a monic modulus
/// (coefficients low degree first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub e: u32,
    pub modulus: Vec<u32>,
    pub q: u32,
}

impl FieldSpec {
    pub fn new(p: u32, modulus: Vec<u32>) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(GfError::BadModulus { expected: modulus.len().saturating_sub(1) as u32, got: modulus });
        }
        let e = (modulus.len() - 1) as u32;
        let q = (p as u64).pow(e);
        if q > MAX_ORDER as u64 {
            return Err(GfError::TooLarge(q));
        }
        if !fp_poly::is_irreducible(p, &modulus) {
            return Err(GfError::Reducible(modulus));
        }
        Ok(FieldSpec { p, e, modulus, q: q as u32 })
    }

    /// `sqrt(q)` when `e` is even.
    pub fn sqrt_q(&self) -> Option<u32> {
        (self.e % 2 == 0).then(|| self.p.pow(self.e / 2))
    }
}

/// Fixed moduli of the built-in registry, `(p, coefficients low degree first)`.
const REGISTRY: &[(u32, &[u32])] = &[
    (2, &[0, 1]),
    (3, &[0, 1]),
    (5, &[0, 1]),
    (2, &[1, 1, 1]),                   // F_4: t^2+t+1
    (3, &[1, 0, 1]),                   // F_9: t^2+1
    (2, &[1, 1, 0, 0, 1]),             // F_16: t^4+t+1
    (5, &[1, 1, 1]),                   // F_25: t^2+t+1
    (2, &[1, 1, 0, 0, 0, 0, 1]),       // F_64: t^6+t+1
    (3, &[2, 1, 0, 0, 1]),             // F_81: t^4+t+2 (t^4+t+1 has the root 1 over F_3)
    (2, &[1, 0, 1, 1, 1, 0, 0, 0, 1]), // F_256: t^8+t^4+t^3+t^2+1
];

/// Orders served by [`Field::registry`].
pub fn supported_orders() -> Vec<u32> {
    REGISTRY.iter().map(|(p, m)| p.pow(m.len() as u32 - 1)).collect()
}

/// `F_q` with precomputed tables. Immutable after construction.
pub struct Field {
    spec: FieldSpec,
    add: Option<Vec<u32>>,
    neg: Vec<u32>,
    /// `exp[i] = g^i` for `i < 2(q-1)`, `g` the primitive element.
    exp: Vec<u32>,
    log: Vec<u32>,
    conj: Option<Vec<u32>>,
    norm: Option<Vec<u32>>,
    /// Smallest `x` with `x^{sqrt q + 1} = c`, indexed by `c`.
    norm_root: Option<Vec<u32>>,
    primitive: u32,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}{:?}", self.spec.q, self.spec.modulus)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(spec: FieldSpec) -> Arc<Field> {
        let q = spec.q;
        let p = spec.p;
        let add = (q <= ADD_TABLE_MAX).then(|| {
            let mut t = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = digit_add(p, a, b);
                }
            }
            t
        });
        let neg = (0..q).map(|a| digit_neg(p, a)).collect();

        // Smallest primitive element: order exactly q-1.
        let order = q - 1;
        let mut primitive = 1;
        let mut exp = Vec::new();
        for cand in 1..q {
            let mut powers = Vec::with_capacity(order as usize);
            let mut x = 1u32;
            for _ in 0..order {
                powers.push(x);
                x = slow_mul(&spec, x, cand);
                if x == 1 && powers.len() < order as usize {
                    break;
                }
            }
            if powers.len() == order as usize && x == 1 {
                primitive = cand;
                exp = powers;
                break;
            }
        }
        let mut log = vec![0u32; q as usize];
        for (i, &v) in exp.iter().enumerate() {
            log[v as usize] = i as u32;
        }
        let doubled: Vec<u32> = exp.iter().chain(exp.iter()).copied().collect();

        let mut field = Field { spec, add, neg, exp: doubled, log, conj: None, norm: None, norm_root: None, primitive };
        if let Some(s) = field.spec.sqrt_q() {
            let conj: Vec<u32> = (0..q).map(|a| field.pow(Elem(a), s as u64).0).collect();
            let norm: Vec<u32> = (0..q).map(|a| field.pow(Elem(a), s as u64 + 1).0).collect();
            let mut root = vec![u32::MAX; q as usize];
            for a in 0..q {
                let c = norm[a as usize] as usize;
                if root[c] == u32::MAX {
                    root[c] = a;
                }
            }
            field.conj = Some(conj);
            field.norm = Some(norm);
            field.norm_root = Some(root);
        }
        Arc::new(field)
    }

    /// Build `F_q` from the fixed modulus registry.
    pub fn registry(q: u64) -> Result<Arc<Field>, GfError> {
        for &(p, m) in REGISTRY {
            if (p as u64).pow(m.len() as u32 - 1) == q {
                let spec = FieldSpec::new(p, m.to_vec()).expect("registry modulus is irreducible");
                return Ok(Field::new(spec));
            }
        }
        Err(GfError::Unsupported { q, supported: supported_orders() })
    }

    /// `F_{q^m}` over the same prime, from the registry.
    pub fn extension(&self, m: u32) -> Result<Arc<Field>, GfError> {
        Field::registry((self.spec.q as u64).pow(m))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn q(&self) -> u32 {
        self.spec.q
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn sqrt_q(&self) -> Option<u32> {
        self.spec.sqrt_q()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.spec.q).map(Elem)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Elem> {
        (1..self.spec.q).map(Elem)
    }

    /// Smallest-index primitive element; written `w` in polynomial text.
    pub fn primitive(&self) -> Elem {
        Elem(self.primitive)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.spec.p as i64) as u32)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.spec.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        match &self.add {
            Some(t) => Elem(t[(a.0 * self.spec.q + b.0) as usize]),
            None => Elem(digit_add(self.spec.p, a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        Elem(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        Elem(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, GfError> {
        if a.is_zero() {
            return Err(GfError::DivisionByZero);
        }
        let l = self.log[a.0 as usize];
        Ok(Elem(self.exp[((self.spec.q - 1 - l) % (self.spec.q - 1)) as usize]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, k: u64) -> Elem {
        if k == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        let order = (self.spec.q - 1) as u64;
        let l = (self.log[a.0 as usize] as u64 * (k % order)) % order;
        Elem(self.exp[l as usize])
    }

    /// Discrete log to the primitive element base.
    pub fn log(&self, a: Elem) -> Option<u32> {
        (!a.is_zero()).then(|| self.log[a.0 as usize])
    }

    pub fn exp(&self, k: u32) -> Elem {
        Elem(self.exp[(k % (self.spec.q - 1)) as usize])
    }

    /// `a^{sqrt q}`, the involution fixing `F_{sqrt q}`.
    pub fn conj(&self, a: Elem) -> Result<Elem, GfError> {
        match &self.conj {
            Some(t) => Ok(Elem(t[a.0 as usize])),
            None => Err(GfError::NoSquareRoot { q: self.spec.q }),
        }
    }

    /// `a^{sqrt q + 1}`, landing in `F_{sqrt q}`.
    pub fn norm(&self, a: Elem) -> Result<Elem, GfError> {
        match &self.norm {
            Some(t) => Ok(Elem(t[a.0 as usize])),
            None => Err(GfError::NoSquareRoot { q: self.spec.q }),
        }
    }

    /// Smallest-index `x` with `norm(x) = c`, if any.
    pub fn norm_preimage(&self, c: Elem) -> Result<Option<Elem>, GfError> {
        match &self.norm_root {
            Some(t) => {
                let r = t[c.0 as usize];
                Ok((r != u32::MAX).then_some(Elem(r)))
            }
            None => Err(GfError::NoSquareRoot { q: self.spec.q }),
        }
    }

    pub fn in_subfield(&self, a: Elem) -> Result<bool, GfError> {
        Ok(self.conj(a)? == a)
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: Elem) -> Option<u32> {
        let l = self.log(a)?;
        let n = self.spec.q - 1;
        Some(n / gcd(n, l))
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn digits(p: u32, mut a: u32, e: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(e as usize);
    for _ in 0..e {
        out.push(a % p);
        a /= p;
    }
    out
}

fn undigits(p: u32, d: &[u32]) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn digit_add(p: u32, mut a: u32, mut b: u32) -> u32 {
    let mut out = 0;
    let mut place = 1;
    while a > 0 || b > 0 {
        out += ((a % p + b % p) % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

fn digit_neg(p: u32, mut a: u32) -> u32 {
    let mut out = 0;
    let mut place = 1;
    while a > 0 {
        out += ((p - a % p) % p) * place;
        a /= p;
        place *= p;
    }
    out
}

/// Schoolbook product in `F_p[t]/(modulus)`, used only while building tables.
fn slow_mul(spec: &FieldSpec, a: u32, b: u32) -> u32 {
    let p = spec.p;
    let e = spec.e as usize;
    let da = digits(p, a, spec.e);
    let db = digits(p, b, spec.e);
    let mut prod = vec![0u32; 2 * e];
    for i in 0..e {
        for j in 0..e {
            prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
        }
    }
    let reduced = fp_poly::rem(p, &prod, &spec.modulus);
    let mut out = reduced;
    out.resize(e, 0);
    undigits(p, &out)
}

/// Dense polynomials over `F_p`, coefficients low degree first.
pub(crate) mod fp_poly {
    fn trim(mut v: Vec<u32>) -> Vec<u32> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    fn inv_mod(p: u32, a: u32) -> u32 {
        (1..p).find(|x| (x * a) % p == 1).expect("nonzero residue")
    }

    pub fn rem(p: u32, a: &[u32], m: &[u32]) -> Vec<u32> {
        let m = trim(m.to_vec());
        let mut r = trim(a.to_vec());
        let lead_inv = inv_mod(p, *m.last().unwrap());
        while r.len() >= m.len() {
            let shift = r.len() - m.len();
            let c = (r.last().unwrap() * lead_inv) % p;
            for (i, &mi) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - c * mi % p) % p;
            }
            r = trim(r);
        }
        r
    }

    /// Trial division by every monic polynomial of degree `1..=deg/2`.
    pub fn is_irreducible(p: u32, m: &[u32]) -> bool {
        let deg = m.len() - 1;
        for d in 1..=deg / 2 {
            let count = p.pow(d as u32);
            for low in 0..count {
                let mut cand: Vec<u32> = (0..d).map(|i| (low / p.pow(i as u32)) % p).collect();
                cand.push(1);
                if rem(p, m, &cand).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

/// A field element carrying its field, for checked arithmetic across API boundaries.
#[derive(Clone)]
pub struct FieldElement {
    pub field: Arc<Field>,
    pub rep: Elem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldElement {
    pub fn new(field: &Arc<Field>, rep: Elem) -> Self {
        assert!(rep.0 < field.q(), "index {} out of range for F_{}", rep.0, field.q());
        FieldElement { field: Arc::clone(field), rep }
    }

    pub fn arith(&self, other: &FieldElement, op: ArithOp) -> Result<FieldElement, GfError> {
        if self.field != other.field {
            return Err(GfError::FieldMismatch);
        }
        let f = &self.field;
        let rep = match op {
            ArithOp::Add => f.add(self.rep, other.rep),
            ArithOp::Sub => f.sub(self.rep, other.rep),
            ArithOp::Mul => f.mul(self.rep, other.rep),
            ArithOp::Div => f.div(self.rep, other.rep)?,
        };
        Ok(FieldElement { field: Arc::clone(f), rep })
    }

    pub fn conj_sqrt(&self) -> Result<FieldElement, GfError> {
        Ok(FieldElement { field: Arc::clone(&self.field), rep: self.field.conj(self.rep)? })
    }

    pub fn norm_to_sqrt(&self) -> Result<FieldElement, GfError> {
        Ok(FieldElement { field: Arc::clone(&self.field), rep: self.field.norm(self.rep)? })
    }

    pub fn in_sqrt_subfield(&self) -> Result<bool, GfError> {
        self.field.in_subfield(self.rep)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.rep == other.rep
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@F_{}", self.rep.0, self.field.q())
    }
}

/// Injective ring homomorphism `F_{p^a} -> F_{p^b}`, `a | b`, tabulated.
#[derive(Clone)]
pub struct TowerEmbedding {
    source: Arc<Field>,
    target: Arc<Field>,
    table: Vec<Elem>,
}

impl TowerEmbedding {
    /// Sends `t` to the smallest-index root of the source modulus in the target.
    pub fn new(source: &Arc<Field>, target: &Arc<Field>) -> Result<Self, GfError> {
        let (s, t) = (source.spec(), target.spec());
        if s.p != t.p || t.e % s.e != 0 {
            return Err(GfError::NoEmbedding { src: s.q, dst: t.q });
        }
        let eval = |x: Elem| s.modulus.iter().rev().fold(Elem::ZERO, |acc, &c| target.add(target.mul(acc, x), Elem(c)));
        let root = target.elements().find(|&x| eval(x).is_zero()).ok_or(GfError::NoEmbedding { src: s.q, dst: t.q })?;
        let table = source
            .elements()
            .map(|a| {
                digits(s.p, a.0, s.e)
                    .iter()
                    .rev()
                    .fold(Elem::ZERO, |acc, &c| target.add(target.mul(acc, root), Elem(c)))
            })
            .collect();
        Ok(TowerEmbedding { source: Arc::clone(source), target: Arc::clone(target), table })
    }

    pub fn source(&self) -> &Arc<Field> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Field> {
        &self.target
    }

    #[inline]
    pub fn embed(&self, a: Elem) -> Elem {
        self.table[a.0 as usize]
    }
}
