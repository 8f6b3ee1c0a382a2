//! Point-count upper bounds as exact integers, and a checker that evaluates every
//! applicable bound against an actual count.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::gf::Field;
use crate::hermitian::detect_hermitian;
use crate::poly::{projectively_equivalent, HomPoly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("{bound}: parameter out of range ({detail})")]
    Range { bound: &'static str, detail: String },
    #[error("sqrt(q)^{0} is not an integer for q = {1}")]
    Irrational(u32, u64),
    #[error("integer overflow")]
    Overflow,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn ck(x: Option<i128>) -> Result<i128, BoundError> {
    x.ok_or(BoundError::Overflow)
}

fn isqrt(q: u64) -> Option<i128> {
    let s = (q as f64).sqrt().round() as i128;
    (s * s == q as i128).then_some(s)
}

/// `(q^n - 1)/(q - 1) + ((d - 1)/d) ((d - 1)^n - (-1)^n) sqrt(q)^{n-1}` for nonsingular
/// hypersurfaces of degree `d` in `P^n`.
pub fn weil_deligne(n: u32, d: u32, q: u64) -> Result<u64, BoundError> {
    if n < 1 || d < 1 || q < 2 {
        return Err(BoundError::Range { bound: "weil_deligne", detail: format!("n={n}, d={d}, q={q}") });
    }
    let qi = q as i128;
    let root_pow = if (n - 1) % 2 == 0 {
        ck(qi.checked_pow((n - 1) / 2))?
    } else {
        let s = isqrt(q).ok_or(BoundError::Irrational(n - 1, q))?;
        ck(s.checked_pow(n - 1))?
    };
    let lines = (ck(qi.checked_pow(n))? - 1) / (qi - 1);
    let dm = d as i128 - 1;
    let sign = if n % 2 == 0 { 1 } else { -1 };
    let inner = ck(dm.checked_pow(n))? - sign;
    assert_eq!(inner % d as i128, 0, "d divides (d-1)^n - (-1)^n");
    let extra =
        ck(dm.checked_mul(inner / d as i128).and_then(|x| x.checked_mul(root_pow)).and_then(|x| x.checked_add(lines)))?;
    u64::try_from(extra).map_err(|_| BoundError::Overflow)
}

/// `(d - 1) q + 1` for plane curves without `F_q`-linear components, `2 <= d <= q + 2`.
/// The second value is the exceptional count allowed for curves equivalent to `K`.
pub fn sziklai(d: u32, q: u64) -> Result<(u64, Option<u64>), BoundError> {
    if d < 2 || d as u64 > q + 2 {
        return Err(BoundError::Range { bound: "sziklai", detail: format!("need 2 <= d <= q+2, got d={d}, q={q}") });
    }
    let b = (d as u64 - 1) * q + 1;
    Ok((b, (d == 4 && q == 4).then_some(14)))
}

/// `d q + 1` for any plane curve of degree `1 <= d <= q + 1`; equality exactly for a
/// pencil of `d` rational lines.
pub fn segre(d: u32, q: u64) -> Result<u64, BoundError> {
    if d < 1 || d as u64 > q + 1 {
        return Err(BoundError::Range { bound: "segre", detail: format!("need 1 <= d <= q+1, got d={d}, q={q}") });
    }
    Ok(d as u64 * q + 1)
}

/// `(d - 1) q^2 + d q + 1` for surfaces without `F_q`-plane components.
pub fn elementary(d: u32, q: u64) -> Result<u64, BoundError> {
    let (d, q) = (d as i128, q as i128);
    let v = ck(ck((d - 1).checked_mul(q * q))?.checked_add(d * q + 1))?;
    u64::try_from(v).map_err(|_| BoundError::Overflow)
}

/// `(delta - 1) q + 1 + floor((delta - 1)/(q + 1))`.
pub fn s_degree_bound(delta: u64, q: u64) -> Result<u64, BoundError> {
    if delta < 1 {
        return Err(BoundError::Range { bound: "s_degree_bound", detail: "delta must be >= 1".into() });
    }
    (delta - 1).checked_mul(q).and_then(|x| x.checked_add(1 + (delta - 1) / (q + 1))).ok_or(BoundError::Overflow)
}

/// The exceptional quartic `(X0+X1+X2)^4 + (X0X1+X1X2+X2X0)^2 + X0X1X2(X0+X1+X2)` over `F_4`.
pub fn k_curve() -> HomPoly {
    let f4 = Field::registry(4).unwrap();
    let x: Vec<HomPoly> = (0..3).map(|i| HomPoly::variable(&f4, 3, i)).collect();
    let s1 = x[0].add(&x[1]).add(&x[2]);
    let s2 = x[0].mul(&x[1]).add(&x[1].mul(&x[2])).add(&x[2].mul(&x[0]));
    let s3 = x[0].mul(&x[1]).mul(&x[2]);
    s1.pow(4).add(&s2.pow(2)).add(&s3.mul(&s1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    WeilDeligne,
    Sziklai,
    Segre,
    Elementary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Below,
    Equal,
    AboveException,
    Violation,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    Curve,
    Surface,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub bound: BoundKind,
    pub n: u32,
    pub d: u32,
    pub q: u64,
    pub value: Option<u64>,
    pub observed: u64,
    pub status: BoundStatus,
    pub note: Option<String>,
}

fn compare(observed: u64, value: u64) -> BoundStatus {
    match observed.cmp(&value) {
        std::cmp::Ordering::Less => BoundStatus::Below,
        std::cmp::Ordering::Equal => BoundStatus::Equal,
        std::cmp::Ordering::Greater => BoundStatus::Violation,
    }
}

/// Nonsingularity we can certify: a Hermitian polynomial (up to scalar) with
/// nonsingular matrix.
fn certified_nonsingular(poly: &HomPoly) -> bool {
    matches!(detect_hermitian(poly), Ok(Some((_, a))) if a.is_nonsingular())
}

/// Every bound relevant to `poly` as a curve in `P^2` or a surface in `P^3`.
pub fn check(poly: &HomPoly, ambient: Ambient) -> Result<Vec<BoundReport>, BoundError> {
    let (n, expected_vars) = match ambient {
        Ambient::Curve => (2u32, 3usize),
        Ambient::Surface => (3, 4),
    };
    if poly.nvars() != expected_vars {
        return Err(PolyError::Arity { expected: expected_vars, got: poly.nvars() }.into());
    }
    let field: &Arc<Field> = poly.field();
    let q = field.q() as u64;
    let d = poly.degree();
    let observed = poly.count_points(field)?;
    let components = poly.has_linear_component()?;
    let nonsingular = certified_nonsingular(poly);
    let report = |bound, value: Option<u64>, status, note: Option<String>| BoundReport {
        bound,
        n,
        d,
        q,
        value,
        observed,
        status,
        note,
    };
    let mut out = Vec::new();

    let wd = if (n - 1) % 2 == 0 || isqrt(q).is_some() { weil_deligne(n, d, q).ok() } else { None };
    out.push(match (wd, nonsingular) {
        (Some(v), true) => report(BoundKind::WeilDeligne, Some(v), compare(observed, v), None),
        (v, _) => report(
            BoundKind::WeilDeligne,
            v,
            BoundStatus::NotApplicable,
            Some("nonsingularity not certified (only nonsingular Hermitian forms are)".into()),
        ),
    });

    match ambient {
        Ambient::Curve => {
            match sziklai(d, q) {
                Ok(_) if components => out.push(report(
                    BoundKind::Sziklai,
                    None,
                    BoundStatus::NotApplicable,
                    Some("has an F_q-linear component".into()),
                )),
                Ok((v, exception)) => {
                    let mut status = compare(observed, v);
                    let mut note = None;
                    if status == BoundStatus::Violation && exception == Some(observed) {
                        if projectively_equivalent(&k_curve(), poly)?.is_some() {
                            status = BoundStatus::AboveException;
                            note = Some("projectively equivalent to the exceptional quartic K".into());
                        }
                    }
                    out.push(report(BoundKind::Sziklai, Some(v), status, note));
                }
                Err(_) => out.push(report(
                    BoundKind::Sziklai,
                    None,
                    BoundStatus::NotApplicable,
                    Some("degree outside 2..=q+2".into()),
                )),
            }
            match segre(d, q) {
                Ok(v) => {
                    let status = compare(observed, v);
                    let note = (status == BoundStatus::Equal).then(|| "equality: pencil of d F_q-lines".to_string());
                    out.push(report(BoundKind::Segre, Some(v), status, note));
                }
                Err(_) => out.push(report(
                    BoundKind::Segre,
                    None,
                    BoundStatus::NotApplicable,
                    Some("degree outside 1..=q+1".into()),
                )),
            }
        }
        Ambient::Surface => {
            let v = elementary(d, q)?;
            if components {
                out.push(report(
                    BoundKind::Elementary,
                    Some(v),
                    BoundStatus::NotApplicable,
                    Some("has an F_q-plane component".into()),
                ));
            } else {
                out.push(report(BoundKind::Elementary, Some(v), compare(observed, v), None));
            }
        }
    }
    Ok(out)
}
