//! Executable finite geometry of Hermitian curves and surfaces over small fields.
//!
//! The modules build on each other bottom-up: [`gf`] (field arithmetic),
//! [`pg`] (projective objects), [`poly`] (homogeneous polynomials),
//! [`hermitian`], [`bounds`], [`sections`], [`census`], [`zeta`] and the
//! report-producing front end in [`cli`].

pub mod bounds;
pub mod census;
pub mod cli;
pub mod gf;
pub mod hermitian;
pub mod pg;
pub mod poly;
pub mod sections;
pub mod zeta;

pub use gf::{Elem, Field, FieldElement, FieldSpec, GfError, TowerEmbedding};
pub use hermitian::HermitianMatrix;
pub use pg::{Matrix, PointSpace, ProjLine, ProjPlane, ProjPoint, ProjTransform};
pub use poly::HomPoly;
