//! Exhaustive and randomized checks: the census of plane cubics over `F_4`, the
//! exceptional quartic, random cubic and quartic surfaces, and reconstruction of a
//! Hermitian form from a surface with the extremal point count.
//!
//! The hot loops work on small lookup tables instead of [`HomPoly`]; curve `i` of the
//! census is point `i` of `P^9(F_4)` read as a coefficient vector against the ten cubic
//! monomials in term order, which is also its canonical (leading-1) representative.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{elementary, k_curve, sziklai};
use crate::gf::{Elem, Field, GfError, TowerEmbedding};
use crate::hermitian::{detect_hermitian, predicted_count, standard_form, HermitianError, HermitianMatrix};
use crate::pg::{enumerate_planes, uniform_below, Matrix, PgError, PointSpace, ProjLine, ProjPoint, ProjTransform};
use crate::poly::{monomials, projectively_equivalent as equivalence_search, HomPoly, PolyError};
use crate::sections::{classify_section, section_survey, SectionError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CensusError {
    #[error("counterexample ({kind}): {detail}")]
    Counterexample { kind: String, detail: serde_json::Value },
    #[error("structural failure: {0}")]
    Structural(String),
    #[error("unsupported: {0}")]
    Capability(String),
    #[error("invalid shard {0}")]
    Shard(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error(transparent)]
    Hermitian(#[from] HermitianError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Geometry(#[from] PgError),
}

impl CensusError {
    /// Failures that would point at a mathematical counterexample rather than bad input.
    pub fn is_structural(&self) -> bool {
        matches!(self, CensusError::Counterexample { .. } | CensusError::Structural(_))
            || matches!(self, CensusError::Section(SectionError::Structural(_)))
    }
}

fn counterexample(kind: &str, detail: impl Serialize) -> CensusError {
    CensusError::Counterexample { kind: kind.into(), detail: serde_json::to_value(detail).unwrap() }
}

/// Part `index` of `count` contiguous pieces of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Shard {
    pub index: u32,
    pub count: u32,
}

impl Shard {
    pub const ALL: Shard = Shard { index: 0, count: 1 };

    pub fn range(&self, len: u64) -> std::ops::Range<u64> {
        let (i, n) = (self.index as u64, self.count as u64);
        (i * len / n)..((i + 1) * len / n)
    }
}

impl std::str::FromStr for Shard {
    type Err = CensusError;

    /// `i/n` with `0 <= i < n`.
    fn from_str(s: &str) -> Result<Shard, CensusError> {
        let bad = || CensusError::Shard(format!("'{s}' (expected i/n with 0 <= i < n)"));
        let (a, b) = s.split_once('/').ok_or_else(bad)?;
        let index: u32 = a.trim().parse().map_err(|_| bad())?;
        let count: u32 = b.trim().parse().map_err(|_| bad())?;
        if count == 0 || index >= count {
            return Err(bad());
        }
        Ok(Shard { index, count })
    }
}

impl std::fmt::Display for Shard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.index, self.count)
    }
}

/// `C1 o T` scalar-equal to `C2`, searched over frames of `PGL(3, F_q)`.
pub fn projectively_equivalent(c1: &HomPoly, c2: &HomPoly) -> Result<Option<ProjTransform>, CensusError> {
    let q = c1.field().q();
    if !matches!(q, 4 | 9) {
        return Err(CensusError::Capability(format!("projective equivalence search needs q in {{4, 9}}, got {q}")));
    }
    if c1.nvars() != 3 || c2.nvars() != 3 {
        return Err(CensusError::Capability("projective equivalence search is for plane curves".into()));
    }
    if c1.degree() != c2.degree() {
        return Ok(None);
    }
    match equivalence_search(c1, c2) {
        Ok(t) => Ok(t),
        Err(PolyError::SearchTooLarge(n)) => {
            Err(CensusError::Capability(format!("{n} candidate frames; the target has too few points to prune")))
        }
        Err(e) => Err(e.into()),
    }
}

// ---------------------------------------------------------------------------
// Cubic census over F_4

const NPTS: usize = 21;
const NMON: usize = 10;

/// A linear-factor test for cubics over one extension of `F_4`.
struct ExtensionTables {
    values: Vec<[u8; NMON]>,
    scaled: [Vec<u8>; 4],
    lines: Vec<Vec<u32>>,
}

impl ExtensionTables {
    fn new(f4: &Arc<Field>, m: u32) -> ExtensionTables {
        let ext = f4.extension(m).unwrap();
        let emb = TowerEmbedding::new(f4, &ext).unwrap();
        let space = PointSpace::new(&ext, 2);
        let monos = monomials(3, 3);
        let values = space
            .iter()
            .map(|p| {
                let mut row = [0u8; NMON];
                for (k, mono) in monos.iter().enumerate() {
                    row[k] = HomPoly::monomial(&ext, 3, &mono.0[..3], Elem::ONE).evaluate_point(&p).0 as u8;
                }
                row
            })
            .collect();
        let scaled = [0u32, 1, 2, 3].map(|c| ext.elements().map(|v| ext.mul(emb.embed(Elem(c)), v).0 as u8).collect());
        let lines = space
            .iter()
            .map(|form| {
                let l = ProjLine::from_form(&ext, form.coords()).unwrap();
                l.points(&ext).iter().map(|p| space.index(p) as u32).collect()
            })
            .collect();
        ExtensionTables { values, scaled, lines }
    }

    fn eval(&self, c: &[u8; NMON], p: usize) -> u8 {
        let row = &self.values[p];
        (0..NMON).fold(0u8, |acc, k| acc ^ self.scaled[c[k] as usize][row[k] as usize])
    }

    /// Whether some line over the extension is a component. A line meeting a cubic in
    /// four points lies on it, so points are tested only until one fails.
    fn has_line(&self, c: &[u8; NMON]) -> bool {
        let mut memo = vec![2u8; self.values.len()];
        let mut zero = |p: u32| -> bool {
            let slot = &mut memo[p as usize];
            if *slot == 2 {
                *slot = (self.eval(c, p as usize) == 0) as u8;
            }
            *slot == 1
        };
        self.lines.iter().any(|l| l.iter().take(4).all(|&p| zero(p)))
    }
}

struct CubicTables {
    f4: Arc<Field>,
    points: PointSpace,
    mul: [[u8; 4]; 4],
    values: [[u8; NPTS]; NMON],
    partials: [[[u8; NPTS]; NMON]; 3],
    line_masks: [u32; NPTS],
    /// `expansion[p][l][m]`: coefficients in `t` of monomial `m` at `P + t B`, with `B`
    /// the first point of line `l` other than `P`.
    expansion: Vec<[[[u8; 4]; NMON]; NPTS]>,
    ext16: ExtensionTables,
    ext64: ExtensionTables,
    conic_products: HashSet<[u8; NMON]>,
    fermat: HomPoly,
}

impl CubicTables {
    fn new() -> CubicTables {
        let f4 = Field::registry(4).unwrap();
        let points = PointSpace::new(&f4, 2);
        let monos = monomials(3, 3);
        let mut mul = [[0u8; 4]; 4];
        for a in 0..4u32 {
            for b in 0..4u32 {
                mul[a as usize][b as usize] = f4.mul(Elem(a), Elem(b)).0 as u8;
            }
        }
        let mono_poly: Vec<HomPoly> = monos.iter().map(|m| HomPoly::monomial(&f4, 3, &m.0[..3], Elem::ONE)).collect();
        let mut values = [[0u8; NPTS]; NMON];
        let mut partials = [[[0u8; NPTS]; NMON]; 3];
        for (k, mp) in mono_poly.iter().enumerate() {
            for (i, p) in points.iter().enumerate() {
                values[k][i] = mp.evaluate_point(&p).0 as u8;
                for v in 0..3 {
                    partials[v][k][i] = mp.partial(v).evaluate_point(&p).0 as u8;
                }
            }
        }
        let mut line_masks = [0u32; NPTS];
        let mut expansion = vec![[[[0u8; 4]; NMON]; NPTS]; NPTS];
        for (li, form) in points.iter().enumerate() {
            let line = ProjLine::from_form(&f4, form.coords()).unwrap();
            let pts = line.points(&f4);
            for p in &pts {
                line_masks[li] |= 1 << points.index(p);
            }
            for p in &pts {
                let b = pts.iter().find(|x| *x != p).unwrap();
                let m = Matrix::from_columns(&f4, &[p.coords().to_vec(), b.coords().to_vec()]);
                for (k, mp) in mono_poly.iter().enumerate() {
                    let g = mp.substitute(&m);
                    for (mono, &c) in g.terms() {
                        expansion[points.index(p)][li][k][mono.0[1] as usize] = c.0 as u8;
                    }
                }
            }
        }
        let mut conic_products = HashSet::new();
        let conics = PointSpace::new(&f4, 5);
        for qc in conics.iter() {
            let conic = HomPoly::from_dense(&f4, 3, 2, qc.coords());
            for form in points.iter() {
                let prod = conic.mul(&HomPoly::linear(&f4, form.coords())).normalized();
                conic_products.insert(dense_u8(&prod));
            }
        }
        let fermat = standard_form(&f4, 3).unwrap();
        CubicTables {
            ext16: ExtensionTables::new(&f4, 2),
            ext64: ExtensionTables::new(&f4, 3),
            f4,
            points,
            mul,
            values,
            partials,
            line_masks,
            expansion,
            conic_products,
            fermat,
        }
    }

    fn eval(&self, c: &[u8; NMON], table: &[[u8; NPTS]; NMON], p: usize) -> u8 {
        (0..NMON).fold(0u8, |acc, k| acc ^ self.mul[c[k] as usize][table[k][p] as usize])
    }
}

fn dense_u8(p: &HomPoly) -> [u8; NMON] {
    let mut out = [0u8; NMON];
    for (slot, c) in out.iter_mut().zip(p.dense()) {
        *slot = c.0 as u8;
    }
    out
}

/// Contact order of the tangent line at each rational point; `None` when the point is
/// singular or the tangent line is a component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointContact {
    pub point: ProjPoint,
    pub singular: bool,
    pub contact: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveRecord {
    pub index: u64,
    /// Coefficients against the cubic monomials in term order, leading entry 1.
    pub id: [u8; NMON],
    pub n: u32,
    pub has_linear_component: bool,
    pub singular_points: Vec<ProjPoint>,
    pub contacts: Vec<PointContact>,
    pub all_flexes: bool,
    /// Only decided for line-free curves with at least seven points.
    pub absolutely_irreducible: Option<bool>,
    pub hermitian_equivalent: bool,
    /// `T` with `(X0^3 + X1^3 + X2^3) o T` scalar-equal to the curve.
    pub equivalence: Option<ProjTransform>,
}

impl CurveRecord {
    pub fn polynomial(&self) -> HomPoly {
        let f4 = Field::registry(4).unwrap();
        let coeffs: Vec<Elem> = self.id.iter().map(|&c| Elem(c as u32)).collect();
        HomPoly::from_dense(&f4, 3, 3, &coeffs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusSummary {
    pub shard: Shard,
    pub range: (u64, u64),
    pub curves: u64,
    pub histogram: BTreeMap<u32, u64>,
    pub with_linear_component: u64,
    pub line_free: u64,
    pub line_free_histogram: BTreeMap<u32, u64>,
    pub line_free_max_n: u32,
    pub sziklai_bound: u64,
    pub sziklai_violations: u64,
    pub irreducibility_threshold: u32,
    pub threshold_checked: u64,
    pub threshold_failures: u64,
    pub n9_line_free: u64,
    pub n9_singular: u64,
    pub n9_all_flex: u64,
    pub hermitian_equivalent: u64,
    pub equivalence_rechecked: u64,
}

impl CensusSummary {
    fn empty(shard: Shard, range: (u64, u64)) -> CensusSummary {
        CensusSummary {
            shard,
            range,
            curves: 0,
            histogram: BTreeMap::new(),
            with_linear_component: 0,
            line_free: 0,
            line_free_histogram: BTreeMap::new(),
            line_free_max_n: 0,
            sziklai_bound: sziklai(3, 4).unwrap().0,
            sziklai_violations: 0,
            irreducibility_threshold: IRREDUCIBILITY_THRESHOLD,
            threshold_checked: 0,
            threshold_failures: 0,
            n9_line_free: 0,
            n9_singular: 0,
            n9_all_flex: 0,
            hermitian_equivalent: 0,
            equivalence_rechecked: 0,
        }
    }

    /// Combines summaries of disjoint shards given in shard order.
    pub fn merge(parts: &[CensusSummary]) -> CensusSummary {
        let start = parts.first().map_or(0, |p| p.range.0);
        let end = parts.last().map_or(0, |p| p.range.1);
        let mut out = CensusSummary::empty(Shard::ALL, (start, end));
        for p in parts {
            out.curves += p.curves;
            for (&k, &v) in &p.histogram {
                *out.histogram.entry(k).or_insert(0) += v;
            }
            for (&k, &v) in &p.line_free_histogram {
                *out.line_free_histogram.entry(k).or_insert(0) += v;
            }
            out.with_linear_component += p.with_linear_component;
            out.line_free += p.line_free;
            out.line_free_max_n = out.line_free_max_n.max(p.line_free_max_n);
            out.sziklai_violations += p.sziklai_violations;
            out.threshold_checked += p.threshold_checked;
            out.threshold_failures += p.threshold_failures;
            out.n9_line_free += p.n9_line_free;
            out.n9_singular += p.n9_singular;
            out.n9_all_flex += p.n9_all_flex;
            out.hermitian_equivalent += p.hermitian_equivalent;
            out.equivalence_rechecked += p.equivalence_rechecked;
        }
        out
    }
}

/// `(d - 2) q + 3` at `d = 3`, `q = 4`.
pub const IRREDUCIBILITY_THRESHOLD: u32 = 7;

/// Number of cubics over `F_4` up to scalar.
pub const CUBIC_COUNT: u64 = 349_525;

/// Absolute irreducibility of a cubic over `F_q` through the generic polynomial code:
/// no linear factor over `F_{q^j}`, `j = 1, 2, 3`, and no conic factor over `F_q`.
pub fn cubic_absolutely_irreducible(c: &HomPoly) -> Result<bool, CensusError> {
    assert_eq!(c.degree(), 3);
    for m in 1..=3 {
        if !c.linear_components(m)?.is_empty() {
            return Ok(false);
        }
    }
    let f = c.field();
    for form in PointSpace::new(f, 2).iter() {
        let (_, r) = c.div_rem(&HomPoly::linear(f, form.coords()));
        if r.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Visits every cubic of the shard in index order, checking on the fly that line-free
/// curves obey the Sziklai bound, that 9-point line-free curves are nonsingular and
/// absolutely irreducible, that line-free curves with at least seven points are
/// absolutely irreducible, and that 9-point curves made of flexes are equivalent to
/// `X0^3 + X1^3 + X2^3`. The first failure aborts with its record.
pub fn cubic_census_f4(shard: Shard, mut visit: impl FnMut(&CurveRecord)) -> Result<CensusSummary, CensusError> {
    let t = CubicTables::new();
    let space = PointSpace::new(&t.f4, 9);
    let range = shard.range(space.len() as u64);
    let mut summary = CensusSummary::empty(shard, (range.start, range.end));
    let mut buf = Vec::new();
    for idx in range {
        space.coords_into(idx as usize, &mut buf);
        let mut c = [0u8; NMON];
        for (slot, e) in c.iter_mut().zip(&buf) {
            *slot = e.0 as u8;
        }
        let record = census_record(&t, idx, c)?;
        summary.curves += 1;
        *summary.histogram.entry(record.n).or_insert(0) += 1;
        if record.has_linear_component {
            summary.with_linear_component += 1;
        } else {
            summary.line_free += 1;
            *summary.line_free_histogram.entry(record.n).or_insert(0) += 1;
            summary.line_free_max_n = summary.line_free_max_n.max(record.n);
            if record.n as u64 > summary.sziklai_bound {
                summary.sziklai_violations += 1;
                return Err(counterexample("sziklai", &record));
            }
            if record.n >= IRREDUCIBILITY_THRESHOLD {
                summary.threshold_checked += 1;
                if record.absolutely_irreducible != Some(true) {
                    summary.threshold_failures += 1;
                    return Err(counterexample("irreducibility_threshold", &record));
                }
            }
            if record.n == 9 {
                summary.n9_line_free += 1;
                if !record.singular_points.is_empty() {
                    summary.n9_singular += 1;
                    return Err(counterexample("nine_points_singular", &record));
                }
                if record.all_flexes {
                    summary.n9_all_flex += 1;
                    if !record.hermitian_equivalent {
                        return Err(counterexample("all_flex_not_hermitian", &record));
                    }
                    summary.hermitian_equivalent += 1;
                    let tr = record.equivalence.as_ref().unwrap();
                    if !t.fermat.linear_substitute(tr).scalar_equal(&record.polynomial()) {
                        return Err(counterexample("equivalence_recheck", &record));
                    }
                    summary.equivalence_rechecked += 1;
                }
            }
        }
        visit(&record);
    }
    Ok(summary)
}

fn census_record(t: &CubicTables, index: u64, c: [u8; NMON]) -> Result<CurveRecord, CensusError> {
    let mut zeros = 0u32;
    for p in 0..NPTS {
        if t.eval(&c, &t.values, p) == 0 {
            zeros |= 1 << p;
        }
    }
    let n = zeros.count_ones();
    let has_linear_component = t.line_masks.iter().any(|&m| zeros & m == m);
    let mut singular_points = Vec::new();
    let mut contacts = Vec::with_capacity(n as usize);
    for p in (0..NPTS).filter(|&p| zeros >> p & 1 == 1) {
        let grad: Vec<Elem> = (0..3).map(|v| Elem(t.eval(&c, &t.partials[v], p) as u32)).collect();
        let point = t.points.point(p);
        if grad.iter().all(|g| g.is_zero()) {
            singular_points.push(point.clone());
            contacts.push(PointContact { point, singular: true, contact: None });
            continue;
        }
        let l = t.points.index_of_vector(&grad).unwrap();
        let e = &t.expansion[p][l];
        let order = (0..4).find(|&k| (0..NMON).fold(0u8, |acc, m| acc ^ t.mul[c[m] as usize][e[m][k] as usize]) != 0);
        contacts.push(PointContact { point, singular: false, contact: order.map(|k| k as u8) });
    }
    let all_flexes = n > 0 && contacts.iter().all(|x| x.contact == Some(3));
    let absolutely_irreducible = (!has_linear_component && n >= IRREDUCIBILITY_THRESHOLD)
        .then(|| !t.ext16.has_line(&c) && !t.ext64.has_line(&c) && !t.conic_products.contains(&c));
    let mut record = CurveRecord {
        index,
        id: c,
        n,
        has_linear_component,
        singular_points,
        contacts,
        all_flexes,
        absolutely_irreducible,
        hermitian_equivalent: false,
        equivalence: None,
    };
    if !has_linear_component && n == 9 && all_flexes {
        if let Some(tr) = projectively_equivalent(&t.fermat, &record.polynomial())? {
            record.hermitian_equivalent = true;
            record.equivalence = Some(tr);
        }
    }
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KCurveReport {
    pub n: u64,
    pub missing: Vec<ProjPoint>,
    pub complement_of_binary_plane: bool,
}

/// `N_4(K) = 14` and `K(F_4) = P^2(F_4) \ P^2(F_2)`.
pub fn k_curve_check() -> Result<KCurveReport, CensusError> {
    let k = k_curve();
    let f4 = k.field().clone();
    let n = k.count_points(&f4)?;
    let space = PointSpace::new(&f4, 2);
    let missing: Vec<ProjPoint> = space.iter().filter(|p| !k.evaluate_point(p).is_zero()).collect();
    let binary: Vec<ProjPoint> = space.iter().filter(|p| p.coords().iter().all(|c| c.0 < 2)).collect();
    let report = KCurveReport { n, complement_of_binary_plane: missing == binary, missing };
    if report.n != 14 || !report.complement_of_binary_plane {
        return Err(counterexample("k_curve", &report));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdReport {
    pub threshold: u32,
    pub checked: u64,
    pub failures: u64,
}

/// Line-free census cubics with `N >= (d - 2) q + 3` are absolutely irreducible. Reads
/// a finished census summary, whose run already aborts on the first failure.
pub fn irreducibility_threshold_check(summary: &CensusSummary) -> ThresholdReport {
    ThresholdReport {
        threshold: summary.irreducibility_threshold,
        checked: summary.threshold_checked,
        failures: summary.threshold_failures,
    }
}

// ---------------------------------------------------------------------------
// Reconstruction

/// `(sqrt(q)^3 + 1)(q + 1)`.
pub fn extremal_count(q: u64) -> Result<u64, CensusError> {
    Ok(predicted_count(3, q)?)
}

fn structural(msg: impl Into<String>) -> CensusError {
    CensusError::Structural(msg.into())
}

/// Coordinates in which an extremal surface is visibly Hermitian.
///
/// Returns `T` and `A` with `rho (S o T) = to_polynomial(A)`, `A` nonsingular, or
/// `None` when `S` is outside the hypotheses (wrong degree or count, or a plane
/// component). The steps: a Hermitian section is moved to `X0 = 0` and put in the
/// form `X1^s X2 + X1 X2^s + X3^{s+1}`; the tangent lines there at `(0,0,1,0)` and
/// `(0,1,0,0)` are `X0 = X1 = 0` and `X0 = X2 = 0`; the pencil plane through each is
/// sheared onto `X1 = 0` resp. `X2 = 0`; the result is run through detection.
pub fn reconstruct_hermitian(s: &HomPoly) -> Result<Option<(ProjTransform, HermitianMatrix)>, CensusError> {
    let f = s.field().clone();
    let Some(root) = f.sqrt_q() else {
        return Ok(None);
    };
    if s.nvars() != 4 || s.degree() != root + 1 {
        return Ok(None);
    }
    if s.count_points(&f)? != extremal_count(f.q() as u64)? || s.has_linear_component()? {
        return Ok(None);
    }

    // (1) first Hermitian section
    let mut h_inf = None;
    for h in enumerate_planes(&f) {
        if classify_section(s, &h)?.class.is_hermitian() {
            h_inf = Some(h);
            break;
        }
    }
    let h_inf = h_inf.ok_or_else(|| structural("extremal surface without a Hermitian plane section"))?;

    // (2) H_inf -> {X0 = 0}, section -> hyperbolic form
    let frame = h_inf.frame(&f);
    let pivot = h_inf.coeffs().iter().position(|c| !c.is_zero()).unwrap();
    let mut e_k = vec![Elem::ZERO; 4];
    e_k[pivot] = Elem::ONE;
    let t1 =
        Matrix::from_columns(&f, &[e_k, frame.vectors[0].clone(), frame.vectors[1].clone(), frame.vectors[2].clone()]);
    let section = s.restrict_to_plane(&h_inf).unwrap();
    let (_, a) = detect_hermitian(&section)?.ok_or_else(|| structural("Hermitian section lost on re-detection"))?;
    let p = a.standardize()?;
    let hyperbolic = HermitianMatrix::from_indices(&f, &[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]])?;
    let q_inv = hyperbolic.standardize()?.inverse().unwrap();
    let r = p.mul(&q_inv);
    let mut t2 = Matrix::identity(&f, 4);
    for i in 0..3 {
        for j in 0..3 {
            t2.set(i + 1, j + 1, r.get(i, j));
        }
    }
    let mut t = t1.mul(&t2);
    let s2 = s.substitute(&t);
    let x0 = crate::pg::ProjPlane::from_indices(&f, &[1, 0, 0, 0]).unwrap();
    let sec2 = s2.restrict_to_plane(&x0).ok_or_else(|| structural("X0 = 0 became a component"))?;
    if !sec2.scalar_equal(&hyperbolic.to_polynomial()) {
        return Err(structural(format!("section not in hyperbolic form: {sec2}")));
    }

    // (3) + (4) tangent lines and shears
    for alpha in [1usize, 2] {
        // (0,0,1,0) pairs with X1, (0,1,0,0) with X2
        let vertex_in_plane: [u32; 3] = if alpha == 1 { [0, 1, 0] } else { [1, 0, 0] };
        let v = ProjPoint::from_indices(&f, &vertex_in_plane).unwrap();
        let tangent = sec2.tangent_line(&v)?;
        let mut expect = vec![Elem::ZERO; 3];
        expect[alpha - 1] = Elem::ONE;
        if tangent.form(&f)?.coords() != expect.as_slice() {
            return Err(structural(format!("unexpected tangent line at {v}")));
        }
        // X0 = X_alpha = 0 is spanned by the two remaining unit vectors
        let others: Vec<usize> = (1..4).filter(|&i| i != alpha).collect();
        let mut b0 = vec![Elem::ZERO; 4];
        let mut b1 = vec![Elem::ZERO; 4];
        b0[others[0]] = Elem::ONE;
        b1[others[1]] = Elem::ONE;
        let line = ProjLine::from_rows(&f, &b0, &b1)?;
        let s_cur = s.substitute(&t);
        let mut pencils = Vec::new();
        for h in crate::pg::planes_through_line(&f, &line)? {
            if classify_section(&s_cur, &h)?.class.is_pencil() {
                pencils.push(h);
            }
        }
        let [h] = pencils.as_slice() else {
            return Err(structural(format!("{} pencil planes through X0 = X{alpha} = 0", pencils.len())));
        };
        // h = a X0 + b X_alpha, b != 0; Z_alpha = X_alpha + (a/b) X0
        let (ha, hb) = (h.coeffs()[0], h.coeffs()[alpha]);
        let c = f.div(ha, hb)?;
        let mut shear = Matrix::identity(&f, 4);
        shear.set(alpha, 0, f.neg(c));
        t = t.mul(&shear);
    }

    // (5) detection
    let s3 = s.substitute(&t);
    let (_, a) =
        detect_hermitian(&s3)?.ok_or_else(|| structural(format!("normalized surface is not Hermitian: {s3}")))?;
    if !a.is_nonsingular() {
        return Err(structural("normalized Hermitian matrix is singular"));
    }
    let tr = ProjTransform::new(t).map_err(|e| structural(e.to_string()))?;
    Ok(Some((tr, a)))
}

// ---------------------------------------------------------------------------
// Random surface probe

pub const RNG_DESCRIPTION: &str =
    "ChaCha8 (rand_chacha); ChaCha8Rng::seed_from_u64(seed), set_stream(trial); coefficients uniform in [0, q) by rejection on next_u64";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremalHit {
    pub trial: u64,
    pub surface: HomPoly,
    pub tallies: (u64, u64, u64),
    pub transform: ProjTransform,
    pub matrix: HermitianMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeSummary {
    pub q: u64,
    pub degree: u32,
    pub seed: u64,
    pub trials: u64,
    pub range: (u64, u64),
    pub rng: String,
    pub zero_or_plane_component: u64,
    pub histogram: BTreeMap<u64, u64>,
    pub max_n: u64,
    pub extremal_count: u64,
    pub elementary_bound: u64,
    pub above_elementary: u64,
    pub extremal_hits: Vec<ExtremalHit>,
}

/// Point and plane tables for fast counting of surfaces of one degree.
struct SurfaceTables {
    field: Arc<Field>,
    degree: u32,
    values: Vec<Vec<Elem>>,
    planes: Vec<Vec<u32>>,
}

impl SurfaceTables {
    fn new(field: &Arc<Field>, degree: u32) -> SurfaceTables {
        let space = PointSpace::new(field, 3);
        let monos = monomials(4, degree);
        let values = space
            .iter()
            .map(|p| monos.iter().map(|m| HomPoly::monomial(field, 4, &m.0, Elem::ONE).evaluate_point(&p)).collect())
            .collect();
        let planes = enumerate_planes(field)
            .iter()
            .map(|h| h.points(field).iter().map(|p| space.index(p) as u32).collect())
            .collect();
        SurfaceTables { field: field.clone(), degree, values, planes }
    }

    /// Zero mask and whether some plane lies in the zero set. With `degree <= q` the
    /// latter is exactly having a plane component.
    fn scan(&self, coeffs: &[Elem]) -> (Vec<bool>, bool) {
        let f = &self.field;
        let zeros: Vec<bool> = self
            .values
            .iter()
            .map(|row| row.iter().zip(coeffs).fold(Elem::ZERO, |acc, (&v, &c)| f.add(acc, f.mul(v, c))).is_zero())
            .collect();
        let plane = self.planes.iter().any(|h| h.iter().all(|&p| zeros[p as usize]));
        (zeros, plane)
    }
}

fn random_coefficients(q: u64, count: usize, seed: u64, trial: u64) -> Vec<Elem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (0..count).map(|_| Elem(uniform_below(&mut rng, q) as u32)).collect()
}

/// Seeded random surfaces of degree `sqrt(q) + 1`, trials of the shard only.
pub fn random_surface_probe(q: u64, trials: u64, seed: u64, shard: Shard) -> Result<ProbeSummary, CensusError> {
    if !matches!(q, 4 | 9) {
        return Err(CensusError::Capability(format!("surface probe needs q in {{4, 9}}, got {q}")));
    }
    let field = Field::registry(q)?;
    let degree = field.sqrt_q().unwrap() + 1;
    let nmon = monomials(4, degree).len();
    let range = shard.range(trials);
    let samples = range.clone().map(move |trial| (trial, random_coefficients(q, nmon, seed, trial)));
    let mut summary = probe_samples(&field, samples)?;
    summary.seed = seed;
    summary.trials = trials;
    summary.range = (range.start, range.end);
    Ok(summary)
}

/// The probe on an arbitrary stream of `(label, dense coefficients)`.
pub fn probe_samples(
    field: &Arc<Field>,
    samples: impl Iterator<Item = (u64, Vec<Elem>)>,
) -> Result<ProbeSummary, CensusError> {
    let q = field.q() as u64;
    let degree = field.sqrt_q().ok_or(GfError::NoSquareRoot { q: field.q() })? + 1;
    let tables = SurfaceTables::new(field, degree);
    let extremal = extremal_count(q)?;
    let bound = elementary(degree, q).map_err(|e| CensusError::Capability(e.to_string()))?;
    let mut summary = ProbeSummary {
        q,
        degree,
        seed: 0,
        trials: 0,
        range: (0, 0),
        rng: RNG_DESCRIPTION.into(),
        zero_or_plane_component: 0,
        histogram: BTreeMap::new(),
        max_n: 0,
        extremal_count: extremal,
        elementary_bound: bound,
        above_elementary: 0,
        extremal_hits: Vec::new(),
    };
    for (label, coeffs) in samples {
        let (zeros, plane) = tables.scan(&coeffs);
        if plane {
            summary.zero_or_plane_component += 1;
            continue;
        }
        let n = zeros.iter().filter(|&&z| z).count() as u64;
        *summary.histogram.entry(n).or_insert(0) += 1;
        summary.max_n = summary.max_n.max(n);
        let surface = HomPoly::from_dense(field, 4, tables.degree, &coeffs);
        if n > bound {
            summary.above_elementary += 1;
            return Err(counterexample("elementary_bound", (label, &surface, n)));
        }
        if n == extremal {
            let survey = section_survey(&surface)?;
            let s = field.sqrt_q().unwrap() as u64;
            let expected = (extremal, s * s * s * (q + 1) * (s - 1), 0);
            if survey.tallies() != expected {
                return Err(counterexample("extremal_sections", (label, &surface, survey.tallies())));
            }
            match reconstruct_hermitian(&surface) {
                Ok(Some((transform, matrix))) => summary.extremal_hits.push(ExtremalHit {
                    trial: label,
                    surface,
                    tallies: survey.tallies(),
                    transform,
                    matrix,
                }),
                Ok(None) => return Err(structural("extremal sample rejected by reconstruction preconditions")),
                Err(e) if e.is_structural() => {
                    return Err(counterexample("extremal_not_hermitian", (label, &surface, e.to_string())))
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(summary)
}
