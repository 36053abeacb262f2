//! Construction, classification and verification of minimal ideal
//! triangulations of cusped hyperbolic 3-manifolds with geodesic boundary.
//!
//! The library is organized around a single combinatorial object — a
//! [`triangulation::Triangulation`] built from partially truncated tetrahedra
//! glued in face pairs — together with:
//!
//! * [`triangulation`] — chain complexes of tetrahedra, their closures, and
//!   the two-parameter family obtained by attaching chains to a central
//!   compact tetrahedron; edge-class computation and minimality validation.
//! * [`census`] — combinatorial isomorphism, canonical forms, automorphism
//!   groups with dihedral certificates, constructive enumeration, and an
//!   independent brute-force census.
//! * [`spine`] — dual special spines, big-face words, marked filling curves,
//!   Dehn-filling surgery on the spine, and re-dualization back to a
//!   triangulation.
//! * [`exactnum`] — exact cyclotomic arithmetic: integer polynomials,
//!   resultants, Gram matrices over number fields, trace-field degrees and
//!   integrality/quasi-arithmeticity verdicts.
//! * [`geometry`] — floating-point geometry: hyperbolic trigonometry of the
//!   truncated tetrahedron, dilogarithms, volume formulas and numeric Gram
//!   signatures.

pub mod census;
pub mod exactnum;
pub mod geometry;
pub mod spine;
pub mod triangulation;
