//! Plane sections of surfaces in `P^3`: planar pencils, nonsingular Hermitian
//! curves and everything else, plus the line and vertex structure at the
//! extremal count.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::gf::Elem;
use crate::hermitian::{detect_hermitian, HermitianMatrix};
use crate::pg::{
    enumerate_lines, enumerate_planes, line_through, planes_through_line, Matrix, PgError, PointSpace, ProjLine,
    ProjPlane, ProjPoint,
};
use crate::poly::{HomPoly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SectionError {
    #[error("plane {0:?} is a component of the surface")]
    PlaneComponent(ProjPlane),
    #[error("structural failure: {0}")]
    Structural(String),
    #[error("expected a surface in P^3, got {0} variables")]
    NotASurface(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Geometry(#[from] PgError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanarPencil {
    pub plane: ProjPlane,
    pub vertex: ProjPoint,
    pub lines: Vec<ProjLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectionClass {
    Pencil(PlanarPencil),
    HermitianSection { rho: Elem, matrix: HermitianMatrix },
    Other { n: u64, reasons: Vec<String> },
}

impl SectionClass {
    pub fn is_pencil(&self) -> bool {
        matches!(self, SectionClass::Pencil(_))
    }

    pub fn is_hermitian(&self) -> bool {
        matches!(self, SectionClass::HermitianSection { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectionEntry {
    pub plane: ProjPlane,
    pub n: u64,
    pub class: SectionClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectionReport {
    pub entries: Vec<SectionEntry>,
    pub nu1: u64,
    pub nu2: u64,
    pub other: u64,
}

impl SectionReport {
    pub fn tallies(&self) -> (u64, u64, u64) {
        (self.nu1, self.nu2, self.other)
    }

    pub fn pencils(&self) -> impl Iterator<Item = &PlanarPencil> {
        self.entries.iter().filter_map(|e| match &e.class {
            SectionClass::Pencil(p) => Some(p),
            _ => None,
        })
    }
}

fn check_surface(s: &HomPoly) -> Result<(), SectionError> {
    if s.nvars() != 4 {
        return Err(SectionError::NotASurface(s.nvars()));
    }
    Ok(())
}

/// The point a set of distinct lines of `P^2` all pass through, if any.
fn common_point(forms: &[HomPoly]) -> Option<Vec<Elem>> {
    let f = forms[0].field();
    let rows: Vec<Vec<Elem>> = forms.iter().map(|l| l.dense()).collect();
    let k = Matrix::from_rows(f, &rows).kernel();
    (k.len() == 1).then(|| k.into_iter().next().unwrap())
}

pub fn classify_section(s: &HomPoly, h: &ProjPlane) -> Result<SectionEntry, SectionError> {
    check_surface(s)?;
    let f = s.field();
    let c = s.restrict_to_plane(h).ok_or_else(|| SectionError::PlaneComponent(h.clone()))?;
    let n = c.count_points(f)?;
    let d = c.degree();
    let comps = c.linear_components(1)?;
    let total: u32 = comps.iter().map(|(_, m)| m).sum();
    let mut reasons = Vec::new();

    if total == d && comps.iter().all(|(_, m)| *m == 1) && !comps.is_empty() {
        let forms: Vec<HomPoly> = comps.iter().map(|(l, _)| l.clone()).collect();
        if let Some(v) = common_point(&forms) {
            let frame = h.frame(f);
            let vertex = frame.embed(f, &v);
            let mut lines = Vec::with_capacity(forms.len());
            for form in &forms {
                let pl = ProjLine::from_form(f, &form.dense())?;
                let a = frame.embed(f, &pl.basis()[0]);
                let b = frame.embed(f, &pl.basis()[1]);
                lines.push(line_through(f, &a, &b)?);
            }
            let class = SectionClass::Pencil(PlanarPencil { plane: h.clone(), vertex, lines });
            return Ok(SectionEntry { plane: h.clone(), n, class });
        }
        reasons.push(format!("{d} distinct F_q-lines, not concurrent"));
    } else if !comps.is_empty() {
        let mults: Vec<String> = comps.iter().map(|(_, m)| m.to_string()).collect();
        reasons.push(format!("F_q-linear factors with multiplicities [{}] of degree {d}", mults.join(",")));
    }

    if f.sqrt_q().is_some_and(|r| r + 1 == d) {
        match detect_hermitian(&c).expect("degree checked") {
            Some((rho, a)) if a.is_nonsingular() => {
                let class = SectionClass::HermitianSection { rho, matrix: a };
                return Ok(SectionEntry { plane: h.clone(), n, class });
            }
            Some(_) => reasons.push("Hermitian but singular".into()),
            None => reasons.push("not Hermitian".into()),
        }
    }
    Ok(SectionEntry { plane: h.clone(), n, class: SectionClass::Other { n, reasons } })
}

pub fn section_survey(s: &HomPoly) -> Result<SectionReport, SectionError> {
    section_survey_shard(s, 0, 1)
}

/// Survey of the planes `start, start + stride, ...` in enumeration order. Reports of
/// disjoint shards combine with [`merge_reports`].
pub fn section_survey_shard(s: &HomPoly, start: usize, stride: usize) -> Result<SectionReport, SectionError> {
    check_surface(s)?;
    let mut report = SectionReport { entries: Vec::new(), nu1: 0, nu2: 0, other: 0 };
    for h in enumerate_planes(s.field()).into_iter().skip(start).step_by(stride.max(1)) {
        let e = classify_section(s, &h)?;
        match e.class {
            SectionClass::Pencil(_) => report.nu1 += 1,
            SectionClass::HermitianSection { .. } => report.nu2 += 1,
            SectionClass::Other { .. } => report.other += 1,
        }
        report.entries.push(e);
    }
    Ok(report)
}

pub fn merge_reports(parts: Vec<SectionReport>) -> SectionReport {
    let mut out = SectionReport { entries: Vec::new(), nu1: 0, nu2: 0, other: 0 };
    for p in parts {
        out.nu1 += p.nu1;
        out.nu2 += p.nu2;
        out.other += p.other;
        out.entries.extend(p.entries);
    }
    out
}

/// All `F_q`-lines on `S`. When `deg S <= q`, a line lies on `S` as soon as its `q + 1`
/// rational points do, so a point mask suffices; otherwise the restriction is tested.
pub fn lines_on_surface(s: &HomPoly) -> Result<Vec<ProjLine>, SectionError> {
    check_surface(s)?;
    let f = s.field();
    let lines = enumerate_lines(f, 3);
    if s.degree() > f.q() {
        return Ok(lines.into_iter().filter(|l| s.contains_line(l)).collect());
    }
    let space = PointSpace::new(f, 3);
    let zeros = s.zero_set(&space);
    Ok(lines.into_iter().filter(|l| l.points(f).iter().all(|p| zeros[space.index(p)])).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexMap {
    pub line: ProjLine,
    pub vertices: Vec<(ProjPlane, ProjPoint)>,
    pub bijective: bool,
}

/// `H -> vertex of S cap H` over the `q + 1` planes through a line of `S`.
pub fn vertex_map(s: &HomPoly, l: &ProjLine) -> Result<VertexMap, SectionError> {
    check_surface(s)?;
    let f = s.field();
    if !s.contains_line(l) {
        return Err(SectionError::Structural(format!("line {:?} is not on the surface", l.basis())));
    }
    let mut vertices = Vec::new();
    for h in planes_through_line(f, l)? {
        match classify_section(s, &h)?.class {
            SectionClass::Pencil(p) => vertices.push((h, p.vertex)),
            other => {
                return Err(SectionError::Structural(format!(
                    "plane {:?} through a line of the surface is not a pencil: {}",
                    h.coeffs(),
                    serde_json::to_string(&other).unwrap()
                )))
            }
        }
    }
    let mut points = l.points(f);
    points.sort_by_key(|p| p.coords().to_vec());
    let mut images: Vec<ProjPoint> = vertices.iter().map(|(_, v)| v.clone()).collect();
    images.sort_by_key(|p| p.coords().to_vec());
    let bijective = images == points;
    Ok(VertexMap { line: l.clone(), vertices, bijective })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexUniqueness {
    pub pairs: Vec<(ProjPoint, ProjPlane)>,
    pub bijective: bool,
}

/// For each rational point of `S`, the unique pencil plane with that vertex.
pub fn vertex_uniqueness(s: &HomPoly) -> Result<VertexUniqueness, SectionError> {
    let report = section_survey(s)?;
    let f = s.field();
    let mut by_vertex: BTreeMap<Vec<Elem>, Vec<ProjPlane>> = BTreeMap::new();
    for p in report.pencils() {
        by_vertex.entry(p.vertex.coords().to_vec()).or_default().push(p.plane.clone());
    }
    let mut pairs = Vec::new();
    for pt in PointSpace::new(f, 3).iter().filter(|p| s.evaluate_point(p).is_zero()) {
        match by_vertex.get(pt.coords()).map(Vec::as_slice) {
            Some([h]) => pairs.push((pt, h.clone())),
            found => {
                return Err(SectionError::Structural(format!(
                    "point {pt} is the vertex of {} pencil planes, expected exactly one",
                    found.map_or(0, <[ProjPlane]>::len)
                )))
            }
        }
    }
    let bijective = pairs.len() as u64 == report.nu1 && by_vertex.values().all(|v| v.len() == 1);
    Ok(VertexUniqueness { pairs, bijective })
}
