//! Combinatorial triangulations by truncated tetrahedra, each non-compact
//! tetrahedron carrying one marked ideal vertex. This module constructs the
//! two census families — closed chains of cusp pairs, and a pair of chains
//! attached to a central compact tetrahedron — and provides edge classes,
//! orientation certificates, validation, and a stable JSON form.
//!
//! Conventions: vertices of a tetrahedron are 0..4; face f is the face
//! opposite vertex f; a gluing map lists, for each position p in the vertex
//! list of face `a`, the image vertex in the target tetrahedron.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Vertices of face f (the face opposite vertex f), in ascending order.
pub const FACE_VERTICES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Vertex pairs of the six edges, in lexicographic order.
pub const EDGE_VERTICES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Index into `EDGE_VERTICES` of the edge joining two distinct vertices.
pub fn edge_index(u: usize, v: usize) -> usize {
    let (a, b) = (u.min(v), u.max(v));
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("not an edge: ({u}, {v})"),
    }
}

#[derive(Debug, Error)]
pub enum TriError {
    #[error("triangulation is not consistently orientable: {0}")]
    OrientationError(String),
    #[error("closing a chain requires an even number of cusp pairs, got {0}")]
    ChainParityError(usize),
    #[error("the identity twist does not close the chain to a census member")]
    IdentityTwistError,
    #[error("invalid partition (i, j) = ({i}, {j}): need 0 <= i <= j, i + j >= 1")]
    InvalidPartition { i: usize, j: usize },
    #[error("partition ({i}, {j}) with both parts even yields no census member")]
    ParityError { i: usize, j: usize },
    #[error("malformed triangulation: {0}")]
    MalformedTriangulation(String),
    #[error("expected {expected} cusps, found {got}")]
    CuspCountMismatch { expected: usize, got: usize },
    #[error("JSON: {0}")]
    Json(String),
    #[error("internal consistency check failed: {0}")]
    InternalCheck(String),
}

/// One tetrahedron: compact (all four vertices truncated) or non-compact
/// with a single marked ideal vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tet {
    NonCompact { ideal_vertex: usize },
    Compact,
}

impl Tet {
    pub fn nc(ideal_vertex: usize) -> Self {
        assert!(ideal_vertex < 4);
        Tet::NonCompact { ideal_vertex }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, Tet::Compact)
    }

    pub fn ideal_vertex(&self) -> Option<usize> {
        match self {
            Tet::NonCompact { ideal_vertex } => Some(*ideal_vertex),
            Tet::Compact => None,
        }
    }

    /// A cusp face is a face of a non-compact tetrahedron containing the
    /// ideal vertex.
    pub fn is_cusp_face(&self, face: usize) -> bool {
        match self {
            Tet::NonCompact { ideal_vertex } => FACE_VERTICES[face].contains(ideal_vertex),
            Tet::Compact => false,
        }
    }

    /// A cusp edge runs into the ideal vertex.
    pub fn is_cusp_edge(&self, edge: usize) -> bool {
        match self {
            Tet::NonCompact { ideal_vertex } => EDGE_VERTICES[edge].contains(ideal_vertex),
            Tet::Compact => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaceRef {
    pub tet: usize,
    pub face: usize,
}

impl FaceRef {
    pub fn new(tet: usize, face: usize) -> Self {
        FaceRef { tet, face }
    }
}

/// A face identification. `map[p]` is the vertex of `b.tet` to which position
/// p of `FACE_VERTICES[a.face]` is sent; the image set must be exactly the
/// vertex set of face `b.face`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub a: FaceRef,
    pub b: FaceRef,
    pub map: [usize; 3],
}

impl Gluing {
    pub fn new(a: FaceRef, b: FaceRef, map: [usize; 3]) -> Self {
        Gluing { a, b, map }
    }

    /// Vertex map a -> b on the three face vertices (None on the vertex
    /// opposite the glued face).
    pub fn vertex_map(&self) -> [Option<usize>; 4] {
        let mut m = [None; 4];
        for (p, &v) in FACE_VERTICES[self.a.face].iter().enumerate() {
            m[v] = Some(self.map[p]);
        }
        m
    }

    /// Vertex map b -> a.
    pub fn vertex_map_rev(&self) -> [Option<usize>; 4] {
        let mut m = [None; 4];
        for (p, &v) in FACE_VERTICES[self.a.face].iter().enumerate() {
            m[self.map[p]] = Some(v);
        }
        m
    }

    /// Parity of the induced position permutation, used by the orientation
    /// two-coloring: position p of face a goes to the position of map[p] in
    /// the vertex list of face b.
    pub fn position_parity(&self) -> i8 {
        let fb = FACE_VERTICES[self.b.face];
        let tau: Vec<usize> = self
            .map
            .iter()
            .map(|&v| fb.iter().position(|&w| w == v).unwrap())
            .collect();
        perm_sign(&tau)
    }
}

pub(crate) fn perm_sign(p: &[usize]) -> i8 {
    let mut s = 1i8;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    tetra: Vec<Tet>,
    gluings: Vec<Gluing>,
    pub meta: Meta,
    /// Orientation signs from the two-coloring, +1 on tetrahedron 0 of each
    /// component (components ordered by smallest member).
    signs: Vec<i8>,
    /// (tet, face) -> (gluing index, true if the face is the `a` side).
    pairing: HashMap<(usize, usize), (usize, bool)>,
}

impl Triangulation {
    /// Builds a triangulation, checking gluing well-formedness, ideal-vertex
    /// compatibility, single use of each face, and consistent orientability.
    pub fn new(tetra: Vec<Tet>, gluings: Vec<Gluing>, meta: Meta) -> Result<Self, TriError> {
        let n = tetra.len();
        if n == 0 {
            return Err(TriError::MalformedTriangulation(
                "no tetrahedra".to_string(),
            ));
        }
        let mut pairing: HashMap<(usize, usize), (usize, bool)> = HashMap::new();
        for (gi, g) in gluings.iter().enumerate() {
            for fr in [g.a, g.b] {
                if fr.tet >= n || fr.face >= 4 {
                    return Err(TriError::MalformedTriangulation(format!(
                        "gluing {gi} references face {fr:?}"
                    )));
                }
            }
            if g.a == g.b {
                return Err(TriError::MalformedTriangulation(format!(
                    "gluing {gi} identifies a face with itself"
                )));
            }
            let mut image = g.map;
            image.sort_unstable();
            let mut want = FACE_VERTICES[g.b.face];
            want.sort_unstable();
            if image != want {
                return Err(TriError::MalformedTriangulation(format!(
                    "gluing {gi}: image {:?} is not the vertex set of face {} ",
                    g.map, g.b.face
                )));
            }
            let ta = &tetra[g.a.tet];
            let tb = &tetra[g.b.tet];
            let cusp_a = ta.is_cusp_face(g.a.face);
            let cusp_b = tb.is_cusp_face(g.b.face);
            if cusp_a != cusp_b {
                return Err(TriError::MalformedTriangulation(format!(
                    "gluing {gi} matches a cusp face with a non-cusp face"
                )));
            }
            if cusp_a {
                let ia = ta.ideal_vertex().unwrap();
                let ib = tb.ideal_vertex().unwrap();
                let vm = g.vertex_map();
                if vm[ia] != Some(ib) {
                    return Err(TriError::MalformedTriangulation(format!(
                        "gluing {gi} does not send the ideal vertex to the ideal vertex"
                    )));
                }
            }
            for (key, side) in [((g.a.tet, g.a.face), true), ((g.b.tet, g.b.face), false)] {
                if pairing.insert(key, (gi, side)).is_some() {
                    return Err(TriError::MalformedTriangulation(format!(
                        "face {key:?} used by more than one gluing"
                    )));
                }
            }
        }

        let signs = orientation_signs(n, &gluings)?;

        Ok(Triangulation {
            tetra,
            gluings,
            meta,
            signs,
            pairing,
        })
    }

    pub fn tetra(&self) -> &[Tet] {
        &self.tetra
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn sign(&self, tet: usize) -> i8 {
        self.signs[tet]
    }

    /// The gluing using a given face, if any, with its side.
    pub fn pairing_of(&self, tet: usize, face: usize) -> Option<(usize, bool)> {
        self.pairing.get(&(tet, face)).copied()
    }

    /// Face paired with the given one, with the vertex map from this
    /// tetrahedron into the other.
    pub fn glued_to(&self, tet: usize, face: usize) -> Option<(FaceRef, [Option<usize>; 4])> {
        let (gi, is_a) = self.pairing_of(tet, face)?;
        let g = &self.gluings[gi];
        if is_a {
            Some((g.b, g.vertex_map()))
        } else {
            Some((g.a, g.vertex_map_rev()))
        }
    }

    pub fn is_closed(&self) -> bool {
        self.pairing.len() == 4 * self.tetra.len()
    }

    /// Unglued faces, sorted.
    pub fn boundary_faces(&self) -> Vec<FaceRef> {
        let mut out = vec![];
        for t in 0..self.tetra.len() {
            for f in 0..4 {
                if !self.pairing.contains_key(&(t, f)) {
                    out.push(FaceRef::new(t, f));
                }
            }
        }
        out
    }
}

/// Two-coloring of the tetrahedra certifying orientability: across each
/// gluing the signs must satisfy s_a * s_b * (-1)^{fa+fb} * parity = -1.
fn orientation_signs(n: usize, gluings: &[Gluing]) -> Result<Vec<i8>, TriError> {
    let mut uf = SignedUnionFind::new(n);
    for (gi, g) in gluings.iter().enumerate() {
        let fsum = (g.a.face + g.b.face) as i32;
        let rel = -sign_pow(fsum) * g.position_parity();
        if uf.union(g.a.tet, g.b.tet, rel).is_err() {
            return Err(TriError::OrientationError(format!(
                "gluing {gi} ({:?} -> {:?}) closes an orientation-reversing cycle",
                g.a, g.b
            )));
        }
    }
    // Normalize each component so its smallest tetrahedron has sign +1.
    let mut norm: HashMap<usize, i8> = HashMap::new();
    let mut signs = vec![0i8; n];
    for t in 0..n {
        let (root, s) = uf.find(t);
        let adjust = *norm.entry(root).or_insert(s);
        signs[t] = s * adjust;
    }
    Ok(signs)
}

fn sign_pow(e: i32) -> i8 {
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Union-find with a sign relation between each element and its parent.
struct SignedUnionFind {
    parent: Vec<usize>,
    rel: Vec<i8>,
    rank: Vec<u32>,
}

impl SignedUnionFind {
    fn new(n: usize) -> Self {
        SignedUnionFind {
            parent: (0..n).collect(),
            rel: vec![1; n],
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, i8) {
        if self.parent[x] == x {
            return (x, 1);
        }
        let (root, s) = self.find(self.parent[x]);
        self.parent[x] = root;
        self.rel[x] *= s;
        (root, self.rel[x])
    }

    /// Enforce sign(x) = rel * sign(y).
    fn union(&mut self, x: usize, y: usize, rel: i8) -> Result<(), ()> {
        let (rx, sx) = self.find(x);
        let (ry, sy) = self.find(y);
        if rx == ry {
            return if sx == rel * sy { Ok(()) } else { Err(()) };
        }
        // sign(rx) relative to sign(ry): sx*sign(rx) = rel * sy*sign(ry).
        let r = sx * rel * sy;
        if self.rank[rx] < self.rank[ry] {
            self.parent[rx] = ry;
            self.rel[rx] = r;
        } else if self.rank[rx] > self.rank[ry] {
            self.parent[ry] = rx;
            self.rel[ry] = r;
        } else {
            self.parent[ry] = rx;
            self.rel[ry] = r;
            self.rank[rx] += 1;
        }
        Ok(())
    }
}

/// Plain union-find used for edge classes and label propagation.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            self.parent[x] = self.find(self.parent[x]);
        }
        self.parent[x]
    }

    pub fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return;
        }
        if self.rank[rx] < self.rank[ry] {
            self.parent[rx] = ry;
        } else if self.rank[rx] > self.rank[ry] {
            self.parent[ry] = rx;
        } else {
            self.parent[ry] = rx;
            self.rank[rx] += 1;
        }
    }
}

/// Edge classes: orbits of the 6n edge slots (tet, edge index) under the face
/// identifications. Classes are sorted by smallest slot, slots within a class
/// in ascending order.
pub fn compute_edge_classes(t: &Triangulation) -> Vec<Vec<(usize, usize)>> {
    let n = t.tetra().len();
    let mut uf = UnionFind::new(6 * n);
    for g in t.gluings() {
        let fa = FACE_VERTICES[g.a.face];
        for p in 0..3 {
            for q in p + 1..3 {
                let ea = edge_index(fa[p], fa[q]);
                let eb = edge_index(g.map[p], g.map[q]);
                uf.union(g.a.tet * 6 + ea, g.b.tet * 6 + eb);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for tet in 0..n {
        for e in 0..6 {
            let root = uf.find(tet * 6 + e);
            groups.entry(root).or_default().push((tet, e));
        }
    }
    let mut classes: Vec<Vec<(usize, usize)>> = groups.into_values().collect();
    for c in &mut classes {
        c.sort_unstable();
    }
    classes.sort();
    classes
}

/// Cusps: classes of ideal vertices under the cusp-face identifications.
/// Returns, per cusp, the sorted list of member tetrahedra.
pub fn cusp_classes(t: &Triangulation) -> Vec<Vec<usize>> {
    let n = t.tetra().len();
    let mut uf = UnionFind::new(n);
    for g in t.gluings() {
        let ta = &t.tetra()[g.a.tet];
        if ta.is_cusp_face(g.a.face) {
            uf.union(g.a.tet, g.b.tet);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for tet in 0..n {
        if t.tetra()[tet].is_compact() {
            continue;
        }
        let root = uf.find(tet);
        groups.entry(root).or_default().push(tet);
    }
    let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
    for c in &mut classes {
        c.sort_unstable();
    }
    classes.sort();
    classes
}

/// Full validity check for a census candidate: closed, consistently oriented
/// (already certified at construction), edge classes homogeneous in type, and
/// the expected number of cusps.
pub fn validate_minimal(t: &Triangulation, expected_cusps: usize) -> Result<(), TriError> {
    if !t.is_closed() {
        return Err(TriError::MalformedTriangulation(format!(
            "{} unglued faces",
            t.boundary_faces().len()
        )));
    }
    for class in compute_edge_classes(t) {
        let kinds: Vec<bool> = class
            .iter()
            .map(|&(tet, e)| t.tetra()[tet].is_cusp_edge(e))
            .collect();
        if kinds.iter().any(|&x| x != kinds[0]) {
            return Err(TriError::MalformedTriangulation(format!(
                "edge class {class:?} mixes cusp and boundary edges"
            )));
        }
    }
    let got = cusp_classes(t).len();
    if got != expected_cusps {
        return Err(TriError::CuspCountMismatch {
            expected: expected_cusps,
            got,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Chains of cusp pairs
// ---------------------------------------------------------------------------

/// An open chain of cusp pairs. Tetrahedra 2p and 2p+1 form pair p; the two
/// free faces are face 3 of tetrahedron 0 and face 3 of the last tetrahedron.
#[derive(Debug, Clone)]
pub struct Chain {
    pub tri: Triangulation,
    pub pairs: usize,
}

impl Chain {
    pub fn start_face(&self) -> FaceRef {
        FaceRef::new(0, 3)
    }

    pub fn end_face(&self) -> FaceRef {
        FaceRef::new(2 * self.pairs - 1, 3)
    }
}

/// The three gluings identifying the cusp faces of a pair (a, b) = (first,
/// second tetrahedron of the pair).
pub(crate) fn pair_gluings(a: usize, b: usize, out: &mut Vec<Gluing>) {
    out.push(Gluing::new(FaceRef::new(a, 2), FaceRef::new(b, 0), [1, 2, 3]));
    out.push(Gluing::new(FaceRef::new(a, 0), FaceRef::new(b, 2), [0, 1, 3]));
    out.push(Gluing::new(FaceRef::new(a, 1), FaceRef::new(b, 1), [0, 2, 3]));
}

/// Gluings of a chain whose tetrahedra are start_tet .. start_tet + 2*pairs:
/// the pair identifications plus the identity connectors between consecutive
/// pairs.
pub(crate) fn chain_gluings(start_tet: usize, pairs: usize, out: &mut Vec<Gluing>) {
    for p in 0..pairs {
        let a = start_tet + 2 * p;
        pair_gluings(a, a + 1, out);
    }
    for p in 0..pairs.saturating_sub(1) {
        let b = start_tet + 2 * p + 1;
        out.push(Gluing::new(
            FaceRef::new(b, 3),
            FaceRef::new(b + 1, 3),
            [0, 1, 2],
        ));
    }
}

/// Builds the open chain with the given number of cusp pairs (>= 1):
/// 2*pairs tetrahedra and 4*pairs - 1 gluings.
pub fn build_chain(pairs: usize) -> Chain {
    assert!(pairs >= 1);
    let tetra = vec![Tet::nc(3); 2 * pairs];
    let mut gluings = vec![];
    chain_gluings(0, pairs, &mut gluings);
    let tri = Triangulation::new(tetra, gluings, Meta::default())
        .expect("chain construction is always well-formed");
    Chain { tri, pairs }
}

/// Labels of the three boundary (non-cusp) edges {0,1}, {1,2}, {0,2} of each
/// tetrahedron, by propagating A, B, C from tetrahedron 0 along the chain's
/// identifications. The open chain has exactly three boundary edge classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLabel {
    A,
    B,
    C,
}

pub fn chain_compact_labels(chain: &Chain) -> Result<Vec<[EdgeLabel; 3]>, TriError> {
    let t = &chain.tri;
    let classes = compute_edge_classes(t);
    let boundary: Vec<&Vec<(usize, usize)>> = classes
        .iter()
        .filter(|c| !t.tetra()[c[0].0].is_cusp_edge(c[0].1))
        .collect();
    if boundary.len() != 3 {
        return Err(TriError::InternalCheck(format!(
            "open chain has {} boundary edge classes, expected 3",
            boundary.len()
        )));
    }
    // A, B, C seed the classes containing edges {0,1}, {1,2}, {0,2} of
    // tetrahedron 0 respectively.
    let seeds = [
        ((0usize, edge_index(0, 1)), EdgeLabel::A),
        ((0, edge_index(1, 2)), EdgeLabel::B),
        ((0, edge_index(0, 2)), EdgeLabel::C),
    ];
    let mut label_of_class: Vec<Option<EdgeLabel>> = vec![None; 3];
    for (ci, class) in boundary.iter().enumerate() {
        for (slot, label) in seeds {
            if class.contains(&slot) {
                label_of_class[ci] = Some(label);
            }
        }
    }
    let mut out = vec![[EdgeLabel::A; 3]; t.tetra().len()];
    let slots = [edge_index(0, 1), edge_index(1, 2), edge_index(0, 2)];
    for (tet, labels) in out.iter_mut().enumerate() {
        for (si, &e) in slots.iter().enumerate() {
            let ci = boundary
                .iter()
                .position(|c| c.contains(&(tet, e)))
                .ok_or_else(|| {
                    TriError::InternalCheck(format!("slot ({tet}, {e}) in no boundary class"))
                })?;
            labels[si] = label_of_class[ci].ok_or_else(|| {
                TriError::InternalCheck("boundary edge class misses tetrahedron 0".to_string())
            })?;
        }
    }
    Ok(out)
}

/// Direction of the rotation closing a chain into a census member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainTwist {
    Left,
    Right,
}

impl ChainTwist {
    pub fn closing_map(self) -> [usize; 3] {
        match self {
            ChainTwist::Left => [1, 2, 0],
            ChainTwist::Right => [2, 0, 1],
        }
    }
}

/// Closes an even-length chain by gluing its two free faces with the given
/// rotation, producing a one-parameter census member with `pairs` cusps.
pub fn close_chain(chain: &Chain, twist: ChainTwist) -> Result<Triangulation, TriError> {
    close_chain_raw(chain, twist.closing_map())
}

/// Closure with an explicit map; rejects the identity (which never yields a
/// census member) and odd maps (which break orientability).
pub fn close_chain_raw(chain: &Chain, map: [usize; 3]) -> Result<Triangulation, TriError> {
    if chain.pairs % 2 == 1 {
        return Err(TriError::ChainParityError(chain.pairs));
    }
    if map == [0, 1, 2] {
        return Err(TriError::IdentityTwistError);
    }
    let mut gluings = chain.tri.gluings().to_vec();
    gluings.push(Gluing::new(chain.end_face(), chain.start_face(), map));
    let meta = Meta {
        g: Some(chain.pairs as u64),
        k: Some(chain.pairs as u64),
    };
    Triangulation::new(chain.tri.tetra().to_vec(), gluings, meta)
}

/// The closed-chain census member with k cusps (k even): a chain of k cusp
/// pairs closed by the given rotation.
pub fn build_chain_member(k: usize, twist: ChainTwist) -> Result<Triangulation, TriError> {
    if k % 2 == 1 || k < 2 {
        return Err(TriError::ChainParityError(k));
    }
    close_chain(&build_chain(k), twist)
}

// ---------------------------------------------------------------------------
// Central-tetrahedron members
// ---------------------------------------------------------------------------

/// Choice between the two admissible attaching rotations of a chain end onto
/// the central tetrahedron, ordered lexicographically by image triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttachTwist {
    A,
    B,
}

const K1_END_CANDIDATES: [[usize; 3]; 3] = [[0, 1, 3], [1, 3, 0], [3, 0, 1]];
const K2_END_CANDIDATES: [[usize; 3]; 3] = [[1, 2, 3], [2, 3, 1], [3, 1, 2]];

/// The two attachment sites on the central tetrahedron: the first chain runs
/// from face 3 to face 2 (sharing edge {0,1}), the second from face 1 to
/// face 0 (sharing edge {2,3}).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainSide {
    First,
    Second,
}

struct SideSpec {
    /// Free chain-end face to be glued (for First with 0 pairs, a face of
    /// the central tetrahedron itself).
    from: FaceRef,
    to_face: usize,
    candidates: &'static [[usize; 3]; 3],
    /// Central-tetrahedron edge shared by the two attachment faces.
    shared_edge: usize,
}

/// Pushes the chain gluings and the chain-start attachment for one side,
/// with the chain occupying tetrahedra start_tet .. start_tet + 2*pairs.
fn side_pieces(side: ChainSide, pairs: usize, start_tet: usize, base: &mut Vec<Gluing>) -> SideSpec {
    match side {
        ChainSide::First => {
            let from = if pairs >= 1 {
                chain_gluings(start_tet, pairs, base);
                base.push(Gluing::new(
                    FaceRef::new(start_tet, 3),
                    FaceRef::new(0, 3),
                    [0, 1, 2],
                ));
                FaceRef::new(start_tet + 2 * pairs - 1, 3)
            } else {
                FaceRef::new(0, 3)
            };
            SideSpec {
                from,
                to_face: 2,
                candidates: &K1_END_CANDIDATES,
                shared_edge: edge_index(0, 1),
            }
        }
        ChainSide::Second => {
            assert!(pairs >= 1);
            chain_gluings(start_tet, pairs, base);
            base.push(Gluing::new(
                FaceRef::new(start_tet, 3),
                FaceRef::new(0, 1),
                [0, 2, 3],
            ));
            SideSpec {
                from: FaceRef::new(start_tet + 2 * pairs - 1, 3),
                to_face: 0,
                candidates: &K2_END_CANDIDATES,
                shared_edge: edge_index(2, 3),
            }
        }
    }
}

/// The central tetrahedron with a single chain attached at one side, used to
/// analyse how an attachment identifies the central edges. `pairs` may be 0
/// only for the first side (the direct self-gluing).
pub fn attachment_subcomplex(
    side: ChainSide,
    pairs: usize,
    twist: AttachTwist,
) -> Result<Triangulation, TriError> {
    let mut tetra = vec![Tet::Compact];
    tetra.extend(std::iter::repeat(Tet::nc(3)).take(2 * pairs));
    let mut base = vec![];
    let spec = side_pieces(side, pairs, 1, &mut base);
    let adm = admissible_maps(
        &tetra,
        &base,
        spec.from,
        spec.to_face,
        spec.candidates,
        spec.shared_edge,
    )?;
    let map = match twist {
        AttachTwist::A => adm[0],
        AttachTwist::B => adm[1],
    };
    base.push(Gluing::new(spec.from, FaceRef::new(0, spec.to_face), map));
    Triangulation::new(tetra, base, Meta::default())
}

/// The two-chain census member for the partition (i, j): a central compact
/// tetrahedron with a chain of i cusp pairs glued across faces 3 and 2, and
/// a chain of j cusp pairs glued across faces 1 and 0. Requires 0 <= i <= j,
/// i + j >= 1, and i, j not both even; each chain end admits exactly two
/// attaching rotations, selected by the twist arguments (the i = 0 partition
/// ignores `twist1` up to the same two-element choice on the direct gluing).
pub fn build_two_chain_member(
    i: usize,
    j: usize,
    twist1: AttachTwist,
    twist2: AttachTwist,
) -> Result<Triangulation, TriError> {
    if i > j || i + j < 1 {
        return Err(TriError::InvalidPartition { i, j });
    }
    if i % 2 == 0 && j % 2 == 0 {
        return Err(TriError::ParityError { i, j });
    }
    let k = i + j;

    let mut tetra = vec![Tet::Compact];
    tetra.extend(std::iter::repeat(Tet::nc(3)).take(2 * k));

    let mut base = vec![];
    // First attachment: the end of chain 1 (or, for i = 0, face 3 of the
    // central tetrahedron directly) onto face 2; second attachment: the end
    // of chain 2 onto face 0.
    let spec1 = side_pieces(ChainSide::First, i, 1, &mut base);
    let spec2 = side_pieces(ChainSide::Second, j, 2 * i + 1, &mut base);
    let adm1 = admissible_maps(
        &tetra,
        &base,
        spec1.from,
        spec1.to_face,
        spec1.candidates,
        spec1.shared_edge,
    )?;
    let adm2 = admissible_maps(
        &tetra,
        &base,
        spec2.from,
        spec2.to_face,
        spec2.candidates,
        spec2.shared_edge,
    )?;

    let pick = |adm: &[[usize; 3]], t: AttachTwist| match t {
        AttachTwist::A => adm[0],
        AttachTwist::B => adm[1],
    };
    let mut gluings = base;
    gluings.push(Gluing::new(
        spec1.from,
        FaceRef::new(0, spec1.to_face),
        pick(&adm1, twist1),
    ));
    gluings.push(Gluing::new(
        spec2.from,
        FaceRef::new(0, spec2.to_face),
        pick(&adm2, twist2),
    ));

    // The boundary surface has genus k + 1 (one boundary edge class of
    // incidence 6(k + 1)), while the chain family member with the same
    // number of cusps has genus k.
    let meta = Meta {
        g: Some((k + 1) as u64),
        k: Some(k as u64),
    };
    Triangulation::new(tetra, gluings, meta)
}

/// Tests each candidate map for one chain-end attachment: on the subcomplex
/// built so far plus the candidate gluing, the central-tetrahedron edge
/// shared by the two attachment faces (`shared_edge`) must be identified
/// with another edge of the central tetrahedron. Exactly two of the three
/// rotations pass.
fn admissible_maps(
    tetra: &[Tet],
    base: &[Gluing],
    from: FaceRef,
    to_face: usize,
    candidates: &[[usize; 3]; 3],
    shared_edge: usize,
) -> Result<Vec<[usize; 3]>, TriError> {
    let mut admissible = vec![];
    for &cand in candidates {
        let mut gluings = base.to_vec();
        gluings.push(Gluing::new(from, FaceRef::new(0, to_face), cand));
        let t = Triangulation::new(tetra.to_vec(), gluings, Meta::default())?;
        let classes = compute_edge_classes(&t);
        let class = classes
            .iter()
            .find(|c| c.contains(&(0, shared_edge)))
            .unwrap();
        let central_edges = class.iter().filter(|&&(tet, _)| tet == 0).count();
        if central_edges >= 2 {
            admissible.push(cand);
        }
    }
    if admissible.len() != 2 {
        return Err(TriError::InternalCheck(format!(
            "{} admissible attachments at face {to_face}, expected 2",
            admissible.len()
        )));
    }
    admissible.sort_unstable();
    Ok(admissible)
}

/// Partitions (i, j) of k that label census members: i <= j, not both even.
pub fn census_partitions(k: usize) -> Vec<(usize, usize)> {
    (0..=k / 2)
        .map(|i| (i, k - i))
        .filter(|&(i, j)| i % 2 == 1 || j % 2 == 1)
        .collect()
}

// ---------------------------------------------------------------------------
// JSON form
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TetJson {
    id: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ideal_vertex: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct GluingJson {
    a: [usize; 2],
    b: [usize; 2],
    map: [usize; 3],
}

#[derive(Serialize, Deserialize)]
struct TriJson {
    tetra: Vec<TetJson>,
    gluings: Vec<GluingJson>,
    meta: Meta,
}

impl Triangulation {
    /// Stable JSON text: fixed field order, derived data (signs, pairings)
    /// omitted and recomputed on load.
    pub fn to_json(&self) -> String {
        let doc = TriJson {
            tetra: self
                .tetra
                .iter()
                .enumerate()
                .map(|(id, t)| TetJson {
                    id,
                    kind: if t.is_compact() { "c" } else { "nc" }.to_string(),
                    ideal_vertex: t.ideal_vertex(),
                })
                .collect(),
            gluings: self
                .gluings
                .iter()
                .map(|g| GluingJson {
                    a: [g.a.tet, g.a.face],
                    b: [g.b.tet, g.b.face],
                    map: g.map,
                })
                .collect(),
            meta: self.meta.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, TriError> {
        let doc: TriJson = serde_json::from_str(text).map_err(|e| TriError::Json(e.to_string()))?;
        let mut tetra = Vec::with_capacity(doc.tetra.len());
        for (i, t) in doc.tetra.iter().enumerate() {
            if t.id != i {
                return Err(TriError::Json(format!(
                    "tetrahedron ids must be dense and ascending; found {} at position {i}",
                    t.id
                )));
            }
            let tet = match (t.kind.as_str(), t.ideal_vertex) {
                ("c", None) => Tet::Compact,
                ("nc", Some(v)) if v < 4 => Tet::nc(v),
                _ => {
                    return Err(TriError::Json(format!(
                        "tetrahedron {i}: kind {:?} with ideal_vertex {:?}",
                        t.kind, t.ideal_vertex
                    )))
                }
            };
            tetra.push(tet);
        }
        let gluings = doc
            .gluings
            .iter()
            .map(|g| {
                Gluing::new(
                    FaceRef::new(g.a[0], g.a[1]),
                    FaceRef::new(g.b[0], g.b[1]),
                    g.map,
                )
            })
            .collect();
        Triangulation::new(tetra, gluings, doc.meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_counts() {
        for pairs in 1..=4 {
            let c = build_chain(pairs);
            assert_eq!(c.tri.tetra().len(), 2 * pairs);
            assert_eq!(c.tri.gluings().len(), 4 * pairs - 1);
            assert_eq!(c.tri.boundary_faces().len(), 2);
            assert_eq!(
                c.tri.boundary_faces(),
                vec![c.start_face(), c.end_face()]
            );
        }
    }

    #[test]
    fn chain_signs_alternate() {
        let c = build_chain(3);
        for t in 0..6 {
            assert_eq!(c.tri.sign(t), if t % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn pair_has_one_cusp_class_of_six_edges() {
        let c = build_chain(1);
        let classes = compute_edge_classes(&c.tri);
        let cusp: Vec<_> = classes
            .iter()
            .filter(|cl| c.tri.tetra()[cl[0].0].is_cusp_edge(cl[0].1))
            .collect();
        assert_eq!(cusp.len(), 1);
        assert_eq!(cusp[0].len(), 6);
        assert_eq!(cusp_classes(&c.tri).len(), 1);
    }

    #[test]
    fn chain_labels_follow_mod4_pattern() {
        for pairs in 1..=4 {
            let c = build_chain(pairs);
            let labels = chain_compact_labels(&c).unwrap();
            for (tet, l) in labels.iter().enumerate() {
                let expected = match tet % 4 {
                    0 | 3 => [EdgeLabel::A, EdgeLabel::B, EdgeLabel::C],
                    1 | 2 => [EdgeLabel::B, EdgeLabel::A, EdgeLabel::C],
                    _ => unreachable!(),
                };
                assert_eq!(*l, expected, "pairs={pairs}, tet={tet}");
            }
        }
    }

    /// The label permutation induced by a closing rotation: Left cycles
    /// A -> B -> C -> A, Right cycles A -> C -> B -> A.
    #[test]
    fn closing_rotations_act_as_three_cycles_on_labels() {
        let chain = build_chain(2);
        let labels = chain_compact_labels(&chain).unwrap();
        let end = chain.end_face().tet;
        // End tetrahedron has id 3 mod 4, so the A/B/C pattern on its edges
        // {0,1}, {1,2}, {0,2} matches tetrahedron 0.
        assert_eq!(labels[end], labels[0]);
        for (twist, expect) in [
            (ChainTwist::Left, [EdgeLabel::B, EdgeLabel::C, EdgeLabel::A]),
            (ChainTwist::Right, [EdgeLabel::C, EdgeLabel::A, EdgeLabel::B]),
        ] {
            let map = twist.closing_map();
            // Image of end-tet edge {0,1}, {1,2}, {0,2} under the closing map,
            // read off as the label of the image edge of tetrahedron 0.
            let img = |u: usize, v: usize| {
                let e = edge_index(map[u], map[v]);
                let slot = [edge_index(0, 1), edge_index(1, 2), edge_index(0, 2)]
                    .iter()
                    .position(|&x| x == e)
                    .unwrap();
                labels[0][slot]
            };
            assert_eq!([img(0, 1), img(1, 2), img(0, 2)], expect, "{twist:?}");
        }
    }

    #[test]
    fn close_chain_rejects_odd_length_and_identity() {
        let odd = build_chain(3);
        assert!(matches!(
            close_chain(&odd, ChainTwist::Left),
            Err(TriError::ChainParityError(3))
        ));
        let even = build_chain(2);
        assert!(matches!(
            close_chain_raw(&even, [0, 1, 2]),
            Err(TriError::IdentityTwistError)
        ));
        // Odd (transposition) closing maps break orientability.
        assert!(matches!(
            close_chain_raw(&even, [1, 0, 2]),
            Err(TriError::OrientationError(_))
        ));
    }

    #[test]
    fn closed_chain_member_structure() {
        for k in [2usize, 4] {
            let t = build_chain_member(k, ChainTwist::Left).unwrap();
            assert!(t.is_closed());
            validate_minimal(&t, k).unwrap();
            let classes = compute_edge_classes(&t);
            let (cusp, boundary): (Vec<_>, Vec<_>) = classes
                .iter()
                .partition(|cl| t.tetra()[cl[0].0].is_cusp_edge(cl[0].1));
            // One cusp class per pair, each with six slots; a single
            // boundary class carrying all 6k remaining slots.
            assert_eq!(cusp.len(), k);
            assert!(cusp.iter().all(|c| c.len() == 6));
            assert_eq!(boundary.len(), 1);
            assert_eq!(boundary[0].len(), 6 * k);
        }
    }

    #[test]
    fn census_partition_counts() {
        let expected = [1usize, 1, 2, 1, 3, 2, 4, 2];
        for (k, &want) in expected.iter().enumerate() {
            assert_eq!(census_partitions(k + 1).len(), want, "k={}", k + 1);
        }
    }

    #[test]
    fn two_chain_member_counts_and_cusps() {
        for (i, j) in [(1usize, 1usize), (0, 1), (1, 2), (0, 3), (2, 3)] {
            let k = i + j;
            let t = build_two_chain_member(i, j, AttachTwist::A, AttachTwist::A).unwrap();
            assert_eq!(t.tetra().len(), 2 * k + 1, "(i,j)=({i},{j})");
            assert!(t.is_closed());
            validate_minimal(&t, k).unwrap();
        }
    }

    #[test]
    fn two_chain_member_rejects_bad_partitions() {
        assert!(matches!(
            build_two_chain_member(2, 1, AttachTwist::A, AttachTwist::A),
            Err(TriError::InvalidPartition { .. })
        ));
        assert!(matches!(
            build_two_chain_member(0, 0, AttachTwist::A, AttachTwist::A),
            Err(TriError::InvalidPartition { .. })
        ));
        assert!(matches!(
            build_two_chain_member(2, 2, AttachTwist::A, AttachTwist::A),
            Err(TriError::ParityError { .. })
        ));
        assert!(matches!(
            build_two_chain_member(0, 2, AttachTwist::A, AttachTwist::A),
            Err(TriError::ParityError { .. })
        ));
    }

    #[test]
    fn direct_attachment_admits_two_rotations() {
        // For i = 0 the first attachment glues two faces of the central
        // tetrahedron to each other; the identity-like rotation [0,1,3] is
        // inadmissible, leaving exactly the two twisted maps.
        let t_a = build_two_chain_member(0, 1, AttachTwist::A, AttachTwist::A).unwrap();
        let t_b = build_two_chain_member(0, 1, AttachTwist::B, AttachTwist::A).unwrap();
        let self_maps = |t: &Triangulation| -> Vec<[usize; 3]> {
            t.gluings()
                .iter()
                .filter(|g| g.a.tet == 0 && g.b.tet == 0)
                .map(|g| g.map)
                .collect()
        };
        assert_eq!(self_maps(&t_a), vec![[1, 3, 0]]);
        assert_eq!(self_maps(&t_b), vec![[3, 0, 1]]);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let samples: Vec<Triangulation> = vec![
            build_chain_member(2, ChainTwist::Left).unwrap(),
            build_chain_member(4, ChainTwist::Right).unwrap(),
            build_two_chain_member(1, 2, AttachTwist::B, AttachTwist::A).unwrap(),
            build_two_chain_member(0, 1, AttachTwist::A, AttachTwist::B).unwrap(),
        ];
        for t in samples {
            let text = t.to_json();
            let back = Triangulation::from_json(&text).unwrap();
            assert_eq!(back, t);
            assert_eq!(back.to_json(), text);
            // Signs are recomputed, not stored; they must agree.
            for i in 0..t.tetra().len() {
                assert_eq!(back.sign(i), t.sign(i));
            }
        }
    }

    #[test]
    fn json_rejects_tampered_orientation() {
        let t = build_chain_member(2, ChainTwist::Left).unwrap();
        let text = t.to_json();
        // Swap two entries of the first gluing map: an odd permutation flips
        // the orientation class of that identification.
        let bad = text.replacen("[\n        1,\n        2,\n        3\n      ]", "[\n        2,\n        1,\n        3\n      ]", 1);
        assert_ne!(bad, text);
        match Triangulation::from_json(&bad) {
            Err(TriError::OrientationError(_)) | Err(TriError::MalformedTriangulation(_)) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn gluing_vertex_maps_are_mutually_inverse() {
        let t = build_chain_member(2, ChainTwist::Left).unwrap();
        for g in t.gluings() {
            let fwd = g.vertex_map();
            let rev = g.vertex_map_rev();
            for v in 0..4 {
                if let Some(w) = fwd[v] {
                    assert_eq!(rev[w], Some(v));
                }
            }
        }
    }

    #[test]
    fn glued_to_is_symmetric() {
        let t = build_two_chain_member(1, 1, AttachTwist::A, AttachTwist::B).unwrap();
        for tet in 0..t.tetra().len() {
            for face in 0..4 {
                let (other, vm) = t.glued_to(tet, face).expect("closed");
                let (back, vm2) = t.glued_to(other.tet, other.face).expect("closed");
                assert_eq!(back, FaceRef::new(tet, face));
                for v in 0..4 {
                    if let Some(w) = vm[v] {
                        assert_eq!(vm2[w], Some(v));
                    }
                }
            }
        }
    }
}
