//! Oracles that share no code path with the library's counting and search routines.
#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use hermitian_core::{Elem, Field, HomPoly, Matrix};

/// Projective zeros of `X0^k + ... + X_{n-1}^k` over `field`, by convolving the value
/// distribution of `x -> x^k` over the additive group.
pub fn diagonal_count(field: &Arc<Field>, nvars: usize, k: u64) -> u64 {
    let q = field.q() as usize;
    let mut single = vec![0u64; q];
    for x in field.elements() {
        single[field.pow(x, k).0 as usize] += 1;
    }
    let mut dist = vec![0u64; q];
    dist[0] = 1;
    for _ in 0..nvars {
        let mut next = vec![0u64; q];
        for (a, &ca) in dist.iter().enumerate().filter(|(_, c)| **c > 0) {
            for (b, &cb) in single.iter().enumerate().filter(|(_, c)| **c > 0) {
                next[field.add(Elem(a as u32), Elem(b as u32)).0 as usize] += ca * cb;
            }
        }
        dist = next;
    }
    (dist[0] - 1) / (q as u64 - 1)
}

/// `(sqrt(q)^n - (-1)^n)(sqrt(q)^(n+1) - (-1)^(n+1)) / (q - 1)` in plain integers.
pub fn hermitian_formula(n: u32, q: i64) -> i64 {
    let s = (q as f64).sqrt().round() as i64;
    let sign = |k: u32| if k.is_multiple_of(2) { 1 } else { -1 };
    (s.pow(n) - sign(n)) * (s.pow(n + 1) - sign(n + 1)) / (q - 1)
}

/// Every invertible 3x3 matrix over `field` with first nonzero entry 1.
pub fn pgl3(field: &Arc<Field>) -> Vec<Matrix> {
    let q = field.q() as u64;
    let mut out = Vec::new();
    for code in 0..q.pow(9) {
        let mut digits = [0u32; 9];
        let mut c = code;
        for d in digits.iter_mut().rev() {
            *d = (c % q) as u32;
            c /= q;
        }
        if digits.iter().find(|&&d| d != 0) != Some(&1) {
            continue;
        }
        let rows: Vec<Vec<u32>> = digits.chunks(3).map(|r| r.to_vec()).collect();
        let m = Matrix::from_indices(field, &rows);
        if !m.det().is_zero() {
            out.push(m);
        }
    }
    out
}

/// The `PGL(3)` orbit of a curve, as normalized dense coefficient vectors.
pub fn orbit(c: &HomPoly, group: &[Matrix]) -> HashSet<Vec<Elem>> {
    group.iter().map(|m| c.substitute(m).normalized().dense()).collect()
}
