//! The dual spine of a census triangulation and combinatorial Dehn filling.
//!
//! Dualizing a closed triangulation gives a 2-complex with one vertex per
//! tetrahedron, one edge per face gluing, and one 2-cell per edge class,
//! attached along the cyclic word of gluings crossed when walking around the
//! edge. For a census member the 2-cells split into one large face dual to
//! the boundary edge class and, per cusp, a hexagon whose opposite sides run
//! through the same dual edge in opposite directions.
//!
//! Filling a cusp is performed on the spine: a closed curve with one of six
//! admissible slopes is drawn across the cusp hexagon through marked points
//! on two of its three dual edges, the hexagon is cut along the curve's
//! chords, a filling disk is attached, and the complex is simplified by one
//! face removal, four face merges, and four valence-two vertex dissolutions.
//! The filled manifold is then recovered by searching the small family of
//! triangulations with one compact tetrahedron whose dual matches the
//! surgered spine cell-for-cell.

use serde_json::json;
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

use crate::census::{self, permutations, CensusError};
use crate::triangulation::{
    chain_gluings, compute_edge_classes, cusp_classes, edge_index, validate_minimal, FaceRef,
    Gluing, Meta, Tet, TriError, Triangulation, EDGE_VERTICES,
};

#[derive(Debug, Error)]
pub enum SpineError {
    #[error(transparent)]
    Tri(#[from] TriError),
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error("no cusp with index {0}")]
    NoSuchCusp(usize),
    #[error("slope {p}/{q} is not one of the six admissible filling slopes")]
    UnsupportedSlope { p: i64, q: i64 },
    #[error("filling is not supported here: {0}")]
    UnsupportedManifold(String),
    #[error("malformed cell complex: {0}")]
    Malformed(String),
    #[error("spine surgery failed: {0}")]
    Surgery(String),
    #[error("no candidate triangulation re-dualizes to the surgered spine")]
    RedualizationFailed,
    #[error("internal consistency check failed: {0}")]
    InternalCheck(String),
}

// ---------------------------------------------------------------------------
// Cell complexes
// ---------------------------------------------------------------------------

/// A finite 2-complex. Edges are oriented pairs (tail, head) of vertex
/// indices; a face is a cyclic word of signed edge letters, where the letter
/// `+(e+1)` traverses edge e from tail to head and `-(e+1)` the reverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellComplex {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub faces: Vec<Vec<i64>>,
}

fn letter_edge(l: i64) -> usize {
    l.unsigned_abs() as usize - 1
}

impl CellComplex {
    pub fn tail_of(&self, l: i64) -> usize {
        let (s, t) = self.edges[letter_edge(l)];
        if l > 0 {
            s
        } else {
            t
        }
    }

    pub fn head_of(&self, l: i64) -> usize {
        let (s, t) = self.edges[letter_edge(l)];
        if l > 0 {
            t
        } else {
            s
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Edge-end count per vertex; a loop contributes two ends.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_vertices];
        for &(s, t) in &self.edges {
            d[s] += 1;
            d[t] += 1;
        }
        d
    }

    /// Number of times each edge appears in a face word.
    pub fn edge_wings(&self) -> Vec<usize> {
        let mut w = vec![0; self.edges.len()];
        for f in &self.faces {
            for &l in f {
                w[letter_edge(l)] += 1;
            }
        }
        w
    }

    pub fn loop_count(&self) -> usize {
        self.edges.iter().filter(|(s, t)| s == t).count()
    }

    pub fn validate(&self) -> Result<(), SpineError> {
        for (i, &(s, t)) in self.edges.iter().enumerate() {
            if s >= self.num_vertices || t >= self.num_vertices {
                return Err(SpineError::Malformed(format!(
                    "edge {i} touches a vertex out of range"
                )));
            }
        }
        for (fi, w) in self.faces.iter().enumerate() {
            if w.is_empty() {
                return Err(SpineError::Malformed(format!("face {fi} has an empty word")));
            }
            for &l in w {
                if l == 0 || letter_edge(l) >= self.edges.len() {
                    return Err(SpineError::Malformed(format!(
                        "face {fi} uses an invalid letter {l}"
                    )));
                }
            }
            for i in 0..w.len() {
                let next = w[(i + 1) % w.len()];
                if self.head_of(w[i]) != self.tail_of(next) {
                    return Err(SpineError::Malformed(format!(
                        "face {fi} breaks at position {i}: {} ends at vertex {}, {} starts at {}",
                        w[i],
                        self.head_of(w[i]),
                        next,
                        self.tail_of(next)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Lexicographically smallest representative of a cyclic word up to rotation
/// and inversion (reversal with all letters negated).
fn canon_cyclic(w: &[i64]) -> Vec<i64> {
    let inverted: Vec<i64> = w.iter().rev().map(|&l| -l).collect();
    let mut best: Option<Vec<i64>> = None;
    for cand in [w.to_vec(), inverted] {
        for r in 0..cand.len() {
            let mut rot = cand.clone();
            rot.rotate_left(r);
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.unwrap_or_default()
}

fn count_between(adj: &HashMap<(usize, usize), Vec<usize>>, u: usize, v: usize) -> usize {
    adj.get(&(u.min(v), u.max(v))).map_or(0, Vec::len)
}

struct IsoSearch<'x> {
    a: &'x CellComplex,
    b: &'x CellComplex,
    order: Vec<usize>,
    da: Vec<usize>,
    db: Vec<usize>,
    la: Vec<usize>,
    lb: Vec<usize>,
    adj_a: HashMap<(usize, usize), Vec<usize>>,
    adj_b: HashMap<(usize, usize), Vec<usize>>,
    b_canon: Vec<Vec<i64>>,
}

impl IsoSearch<'_> {
    fn extend(&self, i: usize, phi: &mut Vec<Option<usize>>, used: &mut Vec<bool>) -> bool {
        if i == self.order.len() {
            return self.match_edges(phi);
        }
        let v = self.order[i];
        for u in 0..used.len() {
            if used[u] || self.da[v] != self.db[u] || self.la[v] != self.lb[u] {
                continue;
            }
            let compatible = (0..phi.len()).all(|w| match phi[w] {
                Some(wu) => count_between(&self.adj_a, v, w) == count_between(&self.adj_b, u, wu),
                None => true,
            });
            if !compatible {
                continue;
            }
            phi[v] = Some(u);
            used[u] = true;
            if self.extend(i + 1, phi, used) {
                return true;
            }
            phi[v] = None;
            used[u] = false;
        }
        false
    }

    fn match_edges(&self, phi: &[Option<usize>]) -> bool {
        let mut keys: Vec<(usize, usize)> = self.adj_a.keys().copied().collect();
        keys.sort_unstable();
        let mut groups: Vec<(Vec<usize>, Vec<usize>)> = vec![];
        for (s, t) in keys {
            let ea = &self.adj_a[&(s, t)];
            let (ps, pt) = (phi[s].unwrap(), phi[t].unwrap());
            let key_b = (ps.min(pt), ps.max(pt));
            match self.adj_b.get(&key_b) {
                Some(eb) if eb.len() == ea.len() => groups.push((ea.clone(), eb.clone())),
                _ => return false,
            }
        }
        let mut trans: Vec<Option<(usize, i64)>> = vec![None; self.a.edges.len()];
        self.assign(&groups, 0, phi, &mut trans)
    }

    fn assign(
        &self,
        groups: &[(Vec<usize>, Vec<usize>)],
        gi: usize,
        phi: &[Option<usize>],
        trans: &mut Vec<Option<(usize, i64)>>,
    ) -> bool {
        if gi == groups.len() {
            return self.match_faces(trans);
        }
        let (ea, eb) = &groups[gi];
        let idx: Vec<usize> = (0..ea.len()).collect();
        for perm in permutations(&idx) {
            if self.assign_group(ea, eb, &perm, 0, groups, gi, phi, trans) {
                return true;
            }
        }
        false
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_group(
        &self,
        ea: &[usize],
        eb: &[usize],
        perm: &[usize],
        j: usize,
        groups: &[(Vec<usize>, Vec<usize>)],
        gi: usize,
        phi: &[Option<usize>],
        trans: &mut Vec<Option<(usize, i64)>>,
    ) -> bool {
        if j == ea.len() {
            return self.assign(groups, gi + 1, phi, trans);
        }
        let e = ea[j];
        let e2 = eb[perm[j]];
        let (s, t) = self.a.edges[e];
        let (ps, pt) = (phi[s].unwrap(), phi[t].unwrap());
        let (s2, t2) = self.b.edges[e2];
        let signs: &[i64] = if s == t {
            &[1, -1]
        } else if (ps, pt) == (s2, t2) {
            &[1]
        } else if (ps, pt) == (t2, s2) {
            &[-1]
        } else {
            return false;
        };
        for &sg in signs {
            trans[e] = Some((e2, sg));
            if self.assign_group(ea, eb, perm, j + 1, groups, gi, phi, trans) {
                return true;
            }
            trans[e] = None;
        }
        false
    }

    fn match_faces(&self, trans: &[Option<(usize, i64)>]) -> bool {
        let mut translated: Vec<Vec<i64>> = vec![];
        for w in &self.a.faces {
            let mut nw = vec![];
            for &l in w {
                let (e2, sg) = trans[letter_edge(l)].unwrap();
                nw.push(l.signum() * sg * (e2 as i64 + 1));
            }
            translated.push(canon_cyclic(&nw));
        }
        translated.sort();
        translated == self.b_canon
    }
}

/// Isomorphism of cell complexes: a bijection of vertices and of edges that
/// matches every face word up to rotation and inversion. Intended for the
/// small complexes arising as spines; exhaustive with adjacency pruning.
pub fn complexes_isomorphic(a: &CellComplex, b: &CellComplex) -> bool {
    if a.num_vertices != b.num_vertices
        || a.edges.len() != b.edges.len()
        || a.faces.len() != b.faces.len()
    {
        return false;
    }
    let da = a.vertex_degrees();
    let db = b.vertex_degrees();
    {
        let mut sa = da.clone();
        let mut sb = db.clone();
        sa.sort_unstable();
        sb.sort_unstable();
        if sa != sb {
            return false;
        }
        let mut fa: Vec<usize> = a.faces.iter().map(Vec::len).collect();
        let mut fb: Vec<usize> = b.faces.iter().map(Vec::len).collect();
        fa.sort_unstable();
        fb.sort_unstable();
        if fa != fb {
            return false;
        }
    }
    let group = |c: &CellComplex| {
        let mut m: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, &(s, t)) in c.edges.iter().enumerate() {
            m.entry((s.min(t), s.max(t))).or_default().push(i);
        }
        m
    };
    let adj_a = group(a);
    let adj_b = group(b);
    let loops_of = |adj: &HashMap<(usize, usize), Vec<usize>>, n: usize| -> Vec<usize> {
        (0..n).map(|v| count_between(adj, v, v)).collect()
    };
    let la = loops_of(&adj_a, a.num_vertices);
    let lb = loops_of(&adj_b, b.num_vertices);

    // Breadth-first vertex order, so each newly placed vertex is constrained
    // by its edges to vertices placed before it.
    let order = {
        let mut nbrs: Vec<Vec<usize>> = vec![vec![]; a.num_vertices];
        for &(s, t) in &a.edges {
            nbrs[s].push(t);
            nbrs[t].push(s);
        }
        let mut seen = vec![false; a.num_vertices];
        let mut order = vec![];
        let mut queue = VecDeque::new();
        for start in 0..a.num_vertices {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &w in &nbrs[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        order
    };

    let b_canon = {
        let mut v: Vec<Vec<i64>> = b.faces.iter().map(|w| canon_cyclic(w)).collect();
        v.sort();
        v
    };

    let search = IsoSearch {
        a,
        b,
        order,
        da,
        db,
        la,
        lb,
        adj_a,
        adj_b,
        b_canon,
    };
    let mut phi = vec![None; a.num_vertices];
    let mut used = vec![false; b.num_vertices];
    search.extend(0, &mut phi, &mut used)
}

// ---------------------------------------------------------------------------
// Dualization
// ---------------------------------------------------------------------------

/// Kind of a dual 2-cell, by the edge class it is dual to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    /// Dual to the boundary edge class.
    Boundary,
    /// Dual to a cusp edge class; carries the cusp index.
    Cusp(usize),
}

/// The spine dual to a closed triangulation.
#[derive(Debug, Clone)]
pub struct DualComplex {
    pub complex: CellComplex,
    /// One kind per face of `complex`, in the same order.
    pub face_kinds: Vec<FaceKind>,
    /// Whether the tetrahedron dual to each vertex is compact.
    pub vertex_compact: Vec<bool>,
    /// The underlying edge classes, parallel to the faces.
    pub classes: Vec<Vec<(usize, usize)>>,
}

impl DualComplex {
    pub fn euler_characteristic(&self) -> i64 {
        self.complex.euler_characteristic()
    }

    /// Index of the hexagonal face dual to the given cusp.
    pub fn cusp_face(&self, cusp: usize) -> Option<usize> {
        self.face_kinds
            .iter()
            .position(|k| matches!(k, FaceKind::Cusp(c) if *c == cusp))
    }

    pub fn num_cusps(&self) -> usize {
        self.face_kinds
            .iter()
            .filter(|k| matches!(k, FaceKind::Cusp(_)))
            .count()
    }
}

/// The two faces of a tetrahedron containing a given edge, ascending.
fn faces_containing_edge(e: usize) -> [usize; 2] {
    let [u, v] = EDGE_VERTICES[e];
    let mut out = [0; 2];
    let mut i = 0;
    for f in 0..4 {
        if f != u && f != v {
            out[i] = f;
            i += 1;
        }
    }
    out
}

/// The cyclic word of signed gluing crossings around one edge class. The walk
/// starts at the smallest slot, leaves through the larger of the two faces
/// containing the edge, and crossing gluing g from its `a` side contributes
/// +(g+1), from its `b` side -(g+1).
fn edge_link_word(t: &Triangulation, class: &[(usize, usize)]) -> Result<Vec<i64>, SpineError> {
    let (t0, e0) = class[0];
    let exit0 = faces_containing_edge(e0)[1];
    let mut state = (t0, e0, exit0);
    let mut word = vec![];
    loop {
        let (cur_t, cur_e, exit) = state;
        let (gi, is_a) = t
            .pairing_of(cur_t, exit)
            .ok_or_else(|| SpineError::InternalCheck("edge-link walk hit an unglued face".into()))?;
        word.push(if is_a {
            gi as i64 + 1
        } else {
            -(gi as i64 + 1)
        });
        let (fr2, vm) = t.glued_to(cur_t, exit).unwrap();
        let [u, v] = EDGE_VERTICES[cur_e];
        let e2 = edge_index(vm[u].unwrap(), vm[v].unwrap());
        let both = faces_containing_edge(e2);
        let next_exit = if both[0] == fr2.face { both[1] } else { both[0] };
        state = (fr2.tet, e2, next_exit);
        if state == (t0, e0, exit0) {
            break;
        }
        if word.len() > class.len() {
            return Err(SpineError::InternalCheck(
                "edge-link walk overran its class".into(),
            ));
        }
    }
    if word.len() != class.len() {
        return Err(SpineError::InternalCheck(format!(
            "edge-link walk of length {} over a class of {} slots",
            word.len(),
            class.len()
        )));
    }
    Ok(word)
}

/// Spine dual to a closed triangulation: vertices are tetrahedra, edges are
/// face gluings, 2-cells are edge classes attached along their link words.
pub fn dualize(t: &Triangulation) -> Result<DualComplex, SpineError> {
    if !t.is_closed() {
        return Err(SpineError::Malformed(
            "the dual spine needs a closed triangulation".into(),
        ));
    }
    let edges: Vec<(usize, usize)> = t.gluings().iter().map(|g| (g.a.tet, g.b.tet)).collect();
    let classes = compute_edge_classes(t);
    let cusps = cusp_classes(t);
    let mut faces = vec![];
    let mut face_kinds = vec![];
    for class in &classes {
        let cusp_slots = class
            .iter()
            .filter(|&&(tet, e)| t.tetra()[tet].is_cusp_edge(e))
            .count();
        let kind = if cusp_slots == class.len() {
            let home = class[0].0;
            let ci = cusps
                .iter()
                .position(|c| c.binary_search(&home).is_ok())
                .ok_or_else(|| {
                    SpineError::InternalCheck("cusp edge outside every cusp".into())
                })?;
            FaceKind::Cusp(ci)
        } else if cusp_slots == 0 {
            FaceKind::Boundary
        } else {
            return Err(SpineError::Malformed(
                "an edge class mixes cusp and boundary edges".into(),
            ));
        };
        faces.push(edge_link_word(t, class)?);
        face_kinds.push(kind);
    }
    let complex = CellComplex {
        num_vertices: t.tetra().len(),
        edges,
        faces,
    };
    complex.validate()?;
    if complex.edge_wings().iter().any(|&w| w != 3) {
        return Err(SpineError::InternalCheck(
            "a dual edge is not crossed by exactly three face sides".into(),
        ));
    }
    Ok(DualComplex {
        complex,
        face_kinds,
        vertex_compact: t.tetra().iter().map(Tet::is_compact).collect(),
        classes,
    })
}

// ---------------------------------------------------------------------------
// Slopes and hexagon layouts
// ---------------------------------------------------------------------------

/// The six filling slopes p/q along which a cusp of a closed chain manifold
/// fills to the two-chain member with one direct attachment, ascending by
/// value: -2, -1/2, 1/3, 2/3, 3/2, 3.
pub const FILLING_SLOPES: [(i64, i64); 6] =
    [(-2, 1), (-1, 2), (1, 3), (2, 3), (3, 2), (3, 1)];

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Lowest terms with positive denominator (numerator positive if q = 0).
pub fn normalize_slope(p: i64, q: i64) -> Result<(i64, i64), SpineError> {
    if p == 0 && q == 0 {
        return Err(SpineError::UnsupportedSlope { p, q });
    }
    let g = gcd(p, q);
    let (mut p, mut q) = (p / g, q / g);
    if q < 0 || (q == 0 && p < 0) {
        p = -p;
        q = -q;
    }
    Ok((p, q))
}

/// How the model curve is laid onto a cusp hexagon: start reading the
/// hexagon word at side `rot`, backwards if `reversed`. The six layouts
/// realize exactly the six filling slopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    rot: usize,
    reversed: bool,
}

fn slope_layout(p: i64, q: i64) -> Option<Layout> {
    // Derived from the crossing calibration checked by the tests: the model
    // curve crosses the first marked dual edge once and the second twice,
    // and reading the hexagon from a rotated or reflected start maps the
    // model slope through the six admissible values.
    let layout = |rot, reversed| Some(Layout { rot, reversed });
    match (p, q) {
        (-1, 2) => layout(0, false),
        (2, 3) => layout(1, false),
        (3, 1) => layout(2, false),
        (3, 2) => layout(0, true),
        (-2, 1) => layout(1, true),
        (1, 3) => layout(2, true),
        _ => None,
    }
}

/// The hexagon word aligned for a layout: side s of the aligned reading is
/// `word[(rot + s) % 6]`, or the inverse of `word[(rot - s) % 6]` when
/// reversed.
fn aligned_word(word: &[i64], layout: Layout) -> [i64; 6] {
    std::array::from_fn(|s| {
        if layout.reversed {
            -word[(layout.rot + 6 - s) % 6]
        } else {
            word[(layout.rot + s) % 6]
        }
    })
}

/// Aligned hexagon data for the surgery: the three dual edges carried by the
/// sides, the side-0 and side-4 traversal letters (which receive the marked
/// points), and the two corner vertices.
struct HexData {
    e1: usize,
    e2: usize,
    e3: usize,
    side0: i64,
    side2: i64,
    side4: i64,
    v_odd: usize,
    v_even: usize,
}

fn hex_data(c: &CellComplex, word: &[i64], layout: Layout) -> Result<HexData, SpineError> {
    if word.len() != 6 {
        return Err(SpineError::Surgery(format!(
            "cusp face has {} sides, expected 6",
            word.len()
        )));
    }
    let aligned = aligned_word(word, layout);
    for s in 0..3 {
        if aligned[s + 3] != -aligned[s] {
            return Err(SpineError::Surgery(
                "cusp face does not traverse opposite sides oppositely".into(),
            ));
        }
    }
    let (e1, e2, e3) = (
        letter_edge(aligned[0]),
        letter_edge(aligned[1]),
        letter_edge(aligned[2]),
    );
    if e1 == e2 || e1 == e3 || e2 == e3 {
        return Err(SpineError::Surgery(
            "cusp face does not use three distinct dual edges".into(),
        ));
    }
    let v_odd = c.tail_of(aligned[0]);
    let v_even = c.head_of(aligned[0]);
    if v_odd == v_even {
        return Err(SpineError::Surgery(
            "cusp face corners do not alternate between two tetrahedra".into(),
        ));
    }
    for (s, &l) in aligned.iter().enumerate() {
        let (want_t, want_h) = if s % 2 == 0 {
            (v_odd, v_even)
        } else {
            (v_even, v_odd)
        };
        if c.tail_of(l) != want_t || c.head_of(l) != want_h {
            return Err(SpineError::Surgery(
                "cusp face corners do not alternate between two tetrahedra".into(),
            ));
        }
    }
    Ok(HexData {
        e1,
        e2,
        e3,
        side0: aligned[0],
        side2: aligned[2],
        side4: aligned[4],
        v_odd,
        v_even,
    })
}

// ---------------------------------------------------------------------------
// Surgery
// ---------------------------------------------------------------------------

/// Mutable cell complex with tombstones, supporting the three surgery moves.
struct Work {
    num_vertices: usize,
    edges: Vec<Option<(usize, usize)>>,
    faces: Vec<Option<Vec<i64>>>,
    dead_vertices: Vec<bool>,
}

impl Work {
    fn tail_of(&self, l: i64) -> usize {
        let (s, t) = self.edges[letter_edge(l)].unwrap();
        if l > 0 {
            s
        } else {
            t
        }
    }

    fn head_of(&self, l: i64) -> usize {
        let (s, t) = self.edges[letter_edge(l)].unwrap();
        if l > 0 {
            t
        } else {
            s
        }
    }

    fn check(&self) -> Result<(), SpineError> {
        for f in self.faces.iter().flatten() {
            if f.is_empty() {
                return Err(SpineError::InternalCheck("empty face word".into()));
            }
            for &l in f {
                if l == 0
                    || letter_edge(l) >= self.edges.len()
                    || self.edges[letter_edge(l)].is_none()
                {
                    return Err(SpineError::InternalCheck(format!(
                        "face uses dead or invalid letter {l}"
                    )));
                }
            }
            for i in 0..f.len() {
                if self.head_of(f[i]) != self.tail_of(f[(i + 1) % f.len()]) {
                    return Err(SpineError::InternalCheck(
                        "face word does not chain".into(),
                    ));
                }
            }
        }
        for e in self.edges.iter().flatten() {
            if self.dead_vertices[e.0] || self.dead_vertices[e.1] {
                return Err(SpineError::InternalCheck(
                    "live edge touches a dissolved vertex".into(),
                ));
            }
        }
        Ok(())
    }

    /// Merge the two faces on either side of an edge with exactly two wings,
    /// removing the edge.
    fn merge_across(&mut self, e: usize) -> Result<(), SpineError> {
        let mut occ: Vec<(usize, usize)> = vec![];
        for (fi, f) in self.faces.iter().enumerate() {
            if let Some(w) = f {
                for (pos, &l) in w.iter().enumerate() {
                    if letter_edge(l) == e {
                        occ.push((fi, pos));
                    }
                }
            }
        }
        if occ.len() != 2 {
            return Err(SpineError::Surgery(format!(
                "edge {e} has {} wings, need exactly 2 to merge",
                occ.len()
            )));
        }
        let ((fa, pa), (fb, pb)) = (occ[0], occ[1]);
        if fa == fb {
            return Err(SpineError::Surgery(format!(
                "both wings of edge {e} lie on one face"
            )));
        }
        let mut ra = self.faces[fa].take().unwrap();
        let mut rb = self.faces[fb].take().unwrap();
        let na = ra.len();
        let nb = rb.len();
        ra.rotate_left((pa + 1) % na);
        rb.rotate_left((pb + 1) % nb);
        if ra[na - 1].signum() == rb[nb - 1].signum() {
            rb.reverse();
            for l in rb.iter_mut() {
                *l = -*l;
            }
            rb.rotate_left(1);
        }
        ra.pop();
        rb.pop();
        ra.extend(rb);
        if ra.is_empty() {
            return Err(SpineError::Surgery(format!(
                "merging across edge {e} produced an empty face"
            )));
        }
        self.faces[fa] = Some(ra);
        self.edges[e] = None;
        Ok(())
    }

    /// Remove a vertex with exactly two edge ends on distinct edges, joining
    /// the two edges into one and rewriting every passage through it.
    fn dissolve_vertex(&mut self, v: usize) -> Result<(), SpineError> {
        let mut ends: Vec<usize> = vec![];
        for (ei, e) in self.edges.iter().enumerate() {
            if let Some((s, t)) = e {
                if *s == v {
                    ends.push(ei);
                }
                if *t == v {
                    ends.push(ei);
                }
            }
        }
        if ends.len() != 2 || ends[0] == ends[1] {
            return Err(SpineError::Surgery(format!(
                "vertex {v} is not dissolvable (incident edges {ends:?})"
            )));
        }
        let (e1, e2) = (ends[0], ends[1]);
        let (s1, t1) = self.edges[e1].unwrap();
        let (s2, t2) = self.edges[e2].unwrap();
        let a = if s1 == v { t1 } else { s1 };
        let b = if s2 == v { t2 } else { s2 };
        let into1: i64 = if t1 == v { e1 as i64 + 1 } else { -(e1 as i64 + 1) };
        let into2: i64 = if t2 == v { e2 as i64 + 1 } else { -(e2 as i64 + 1) };
        let (out1, out2) = (-into1, -into2);
        let joined: i64 = e1 as i64 + 1;
        for fi in 0..self.faces.len() {
            let Some(w) = self.faces[fi].clone() else {
                continue;
            };
            if !w.iter().any(|&l| {
                let e = letter_edge(l);
                e == e1 || e == e2
            }) {
                continue;
            }
            let pivot = w
                .iter()
                .position(|&l| {
                    let e = letter_edge(l);
                    e != e1 && e != e2
                })
                .ok_or_else(|| {
                    SpineError::Surgery(format!(
                        "face {fi} runs entirely through vertex {v}"
                    ))
                })?;
            let mut rot = w;
            rot.rotate_left(pivot);
            let mut out_w = vec![];
            let mut i = 0;
            while i < rot.len() {
                let l = rot[i];
                let e = letter_edge(l);
                if e != e1 && e != e2 {
                    out_w.push(l);
                    i += 1;
                    continue;
                }
                if i + 1 >= rot.len() {
                    return Err(SpineError::Surgery(format!(
                        "face {fi} has a dangling passage through vertex {v}"
                    )));
                }
                let l2 = rot[i + 1];
                if l == into1 && l2 == out2 {
                    out_w.push(joined);
                } else if l == into2 && l2 == out1 {
                    out_w.push(-joined);
                } else {
                    return Err(SpineError::Surgery(format!(
                        "face {fi} does not pass straight through vertex {v}"
                    )));
                }
                i += 2;
            }
            self.faces[fi] = Some(out_w);
        }
        self.edges[e1] = Some((a, b));
        self.edges[e2] = None;
        self.dead_vertices[v] = true;
        Ok(())
    }

    /// Renumber live cells into a clean complex; returns the vertex map.
    fn compact(self) -> Result<(CellComplex, Vec<Option<usize>>), SpineError> {
        let mut vmap = vec![None; self.num_vertices];
        let mut nv = 0;
        for v in 0..self.num_vertices {
            if !self.dead_vertices[v] {
                vmap[v] = Some(nv);
                nv += 1;
            }
        }
        let mut emap = vec![None; self.edges.len()];
        let mut edges = vec![];
        for (i, e) in self.edges.iter().enumerate() {
            if let Some((s, t)) = e {
                let (s, t) = (
                    vmap[*s].ok_or_else(|| {
                        SpineError::InternalCheck("live edge at a dissolved vertex".into())
                    })?,
                    vmap[*t].ok_or_else(|| {
                        SpineError::InternalCheck("live edge at a dissolved vertex".into())
                    })?,
                );
                emap[i] = Some(edges.len());
                edges.push((s, t));
            }
        }
        let mut faces = vec![];
        for f in self.faces.into_iter().flatten() {
            let mut w = vec![];
            for l in f {
                let ne = emap[letter_edge(l)].ok_or_else(|| {
                    SpineError::InternalCheck("face word references a dead edge".into())
                })?;
                w.push(l.signum() * (ne as i64 + 1));
            }
            faces.push(w);
        }
        Ok((
            CellComplex {
                num_vertices: nv,
                edges,
                faces,
            },
            vmap,
        ))
    }
}

/// The spine of a filled manifold, before re-dualization.
#[derive(Debug, Clone)]
pub struct SurgeredSpine {
    pub complex: CellComplex,
    /// Vertex of `complex` at the center of the filling (the marked point
    /// that survives the surgery).
    pub center: usize,
    /// For each vertex, the tetrahedron of the unfilled triangulation it is
    /// dual to; `None` exactly at the center.
    pub tet_of_vertex: Vec<Option<usize>>,
    pub cusp: usize,
    pub slope: (i64, i64),
}

/// Fill one cusp of a closed census triangulation along an admissible slope,
/// on the level of spines. The cusp hexagon is cut along the filling curve's
/// three chords, the filling disk is attached, and the complex is simplified.
/// The result has one vertex fewer, two edges fewer, and one face fewer than
/// the dual spine, with the same Euler characteristic.
pub fn fill_spine(
    t: &Triangulation,
    cusp: usize,
    slope: (i64, i64),
) -> Result<SurgeredSpine, SpineError> {
    let (p, q) = normalize_slope(slope.0, slope.1)?;
    let layout = slope_layout(p, q).ok_or(SpineError::UnsupportedSlope { p, q })?;
    let dual = dualize(t)?;
    let hex = dual.cusp_face(cusp).ok_or(SpineError::NoSuchCusp(cusp))?;
    let hd = hex_data(&dual.complex, &dual.complex.faces[hex], layout)?;

    let v0 = dual.complex.num_vertices;
    let (x, y, z) = (v0, v0 + 1, v0 + 2);
    let mut work = Work {
        num_vertices: v0 + 3,
        edges: dual.complex.edges.iter().map(|&e| Some(e)).collect(),
        faces: vec![],
        dead_vertices: vec![false; v0 + 3],
    };

    // Marked points subdivide the side-0 dual edge at x and the side-4 dual
    // edge at y and z; three chords cut across the hexagon between them.
    let base = work.edges.len();
    let (f1, f2, f3, f4, f5, d1, d2, d3) = (
        base,
        base + 1,
        base + 2,
        base + 3,
        base + 4,
        base + 5,
        base + 6,
        base + 7,
    );
    work.edges.push(Some((hd.v_odd, x))); // f1
    work.edges.push(Some((x, hd.v_even))); // f2
    work.edges.push(Some((hd.v_odd, y))); // f3
    work.edges.push(Some((y, z))); // f4
    work.edges.push(Some((z, hd.v_even))); // f5
    work.edges.push(Some((y, x))); // d1
    work.edges.push(Some((z, y))); // d2
    work.edges.push(Some((x, z))); // d3
    let lt = |e: usize| e as i64 + 1;

    for (fi, w) in dual.complex.faces.iter().enumerate() {
        if fi == hex {
            continue;
        }
        let mut nw = vec![];
        for &l in w {
            if l == hd.side0 {
                nw.extend([lt(f1), lt(f2)]);
            } else if l == -hd.side0 {
                nw.extend([-lt(f2), -lt(f1)]);
            } else if l == hd.side4 {
                nw.extend([lt(f3), lt(f4), lt(f5)]);
            } else if l == -hd.side4 {
                nw.extend([-lt(f5), -lt(f4), -lt(f3)]);
            } else {
                nw.push(l);
            }
        }
        work.faces.push(Some(nw));
    }

    // The four pieces of the cut hexagon, then the filling disk.
    let j1 = work.faces.len();
    work.faces
        .push(Some(vec![-lt(f3), hd.side2, -lt(f2), -lt(d1)]));
    work.faces
        .push(Some(vec![lt(f5), -hd.side2, lt(f1), lt(d3)]));
    work.faces
        .push(Some(vec![lt(f2), -lt(f5), lt(d2), lt(f4), -lt(d3)]));
    work.faces
        .push(Some(vec![-lt(f1), lt(f3), -lt(d2), -lt(f4), lt(d1)]));
    work.faces.push(Some(vec![lt(d3), lt(d2), lt(d1)]));

    work.edges[hd.e1] = None;
    work.edges[hd.e2] = None;
    work.check()?;

    // Opening the piece carrying the third dual edge frees a cascade of
    // merges, then the four marked or corner vertices of valence two go.
    work.faces[j1] = None;
    work.merge_across(d1)?;
    work.merge_across(f3)?;
    work.merge_across(f2)?;
    work.merge_across(hd.e3)?;
    work.dissolve_vertex(hd.v_odd)?;
    work.dissolve_vertex(hd.v_even)?;
    work.dissolve_vertex(x)?;
    work.dissolve_vertex(y)?;
    work.check()?;

    let (complex, vmap) = work.compact()?;
    complex.validate()?;

    let before = &dual.complex;
    if complex.num_vertices != before.num_vertices - 1
        || complex.edges.len() != before.edges.len() - 2
        || complex.faces.len() != before.faces.len() - 1
        || complex.euler_characteristic() != before.euler_characteristic()
    {
        return Err(SpineError::InternalCheck(
            "surgery changed the cell counts unexpectedly".into(),
        ));
    }
    if complex.edge_wings().iter().any(|&w| w != 3) {
        return Err(SpineError::InternalCheck(
            "surgered spine lost the three-wing property".into(),
        ));
    }
    let center = vmap[z]
        .ok_or_else(|| SpineError::InternalCheck("filling center was dissolved".into()))?;
    if complex.vertex_degrees()[center] != 4 {
        return Err(SpineError::InternalCheck(
            "filling center does not have four edge ends".into(),
        ));
    }
    let center_loops = complex
        .edges
        .iter()
        .filter(|&&(s, t)| s == t && s == center)
        .count();
    if center_loops == 0 || complex.loop_count() != before.loop_count() + 1 {
        return Err(SpineError::InternalCheck(
            "surgery did not close a loop at the filling center".into(),
        ));
    }
    let mut tet_of_vertex = vec![None; complex.num_vertices];
    for old in 0..v0 {
        if let Some(nv) = vmap[old] {
            tet_of_vertex[nv] = Some(old);
        }
    }
    Ok(SurgeredSpine {
        complex,
        center,
        tet_of_vertex,
        cusp,
        slope: (p, q),
    })
}

// ---------------------------------------------------------------------------
// Re-dualization
// ---------------------------------------------------------------------------

/// A Dehn filling realized as a triangulation, certified by its spine.
#[derive(Debug, Clone)]
pub struct FilledManifold {
    pub tri: Triangulation,
    /// The surgered spine the triangulation was matched against.
    pub spine: CellComplex,
    /// Candidates passing the orientability check.
    pub oriented_candidates: usize,
    /// Candidates whose dual matched the surgered spine.
    pub matched_candidates: usize,
    /// Chain-partition invariant of the filled manifold.
    pub partition: (usize, usize),
}

/// Fill one cusp of a closed chain manifold along an admissible slope and
/// recover the filled manifold as a triangulation: one compact tetrahedron
/// closing the surviving open chain, found by matching duals against the
/// surgered spine.
pub fn dehn_fill(
    t: &Triangulation,
    cusp: usize,
    slope: (i64, i64),
) -> Result<FilledManifold, SpineError> {
    if t.tetra().iter().any(Tet::is_compact) {
        return Err(SpineError::UnsupportedManifold(
            "filling expects a closed chain manifold with no compact tetrahedron".into(),
        ));
    }
    let profile = census::shape_profile(t)?;
    let k = profile.cusp_classes;
    if k < 2 {
        return Err(SpineError::UnsupportedManifold(format!(
            "filling needs at least two cusps, found {k}"
        )));
    }
    if cusp >= k {
        return Err(SpineError::NoSuchCusp(cusp));
    }
    let surgered = fill_spine(t, cusp, slope)?;

    let km1 = k - 1;
    let mut tets = vec![Tet::Compact];
    tets.extend(std::iter::repeat_n(Tet::nc(3), 2 * km1));
    let mut base = vec![];
    chain_gluings(1, km1, &mut base);
    let start = FaceRef::new(1, 3);
    let end = FaceRef::new(2 * km1, 3);
    let face_maps = |f: usize| -> Vec<[usize; 3]> {
        permutations(&crate::triangulation::FACE_VERTICES[f])
            .into_iter()
            .map(|p| [p[0], p[1], p[2]])
            .collect()
    };

    let mut oriented = 0usize;
    let mut matched: Vec<Triangulation> = vec![];
    for &(sa, sb) in &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let rest: Vec<usize> = (0..4).filter(|f| *f != sa && *f != sb).collect();
        for &(fs, fe) in &[(rest[0], rest[1]), (rest[1], rest[0])] {
            for ps in face_maps(fs) {
                for pe in face_maps(fe) {
                    for pf in face_maps(sb) {
                        let mut gl = base.clone();
                        gl.push(Gluing::new(start, FaceRef::new(0, fs), ps));
                        gl.push(Gluing::new(end, FaceRef::new(0, fe), pe));
                        gl.push(Gluing::new(
                            FaceRef::new(0, sa),
                            FaceRef::new(0, sb),
                            pf,
                        ));
                        let meta = Meta {
                            g: Some(k as u64),
                            k: Some(km1 as u64),
                        };
                        let Ok(cand) = Triangulation::new(tets.clone(), gl, meta) else {
                            continue;
                        };
                        oriented += 1;
                        if validate_minimal(&cand, km1).is_err() {
                            continue;
                        }
                        let cd = dualize(&cand)?;
                        if complexes_isomorphic(&cd.complex, &surgered.complex) {
                            matched.push(cand);
                        }
                    }
                }
            }
        }
    }
    if matched.is_empty() {
        return Err(SpineError::RedualizationFailed);
    }
    for other in &matched[1..] {
        if census::is_isomorphic(&matched[0], other).is_none() {
            return Err(SpineError::InternalCheck(
                "spine-matched fillings are not isomorphic to each other".into(),
            ));
        }
    }
    let matched_candidates = matched.len();
    let tri = matched.into_iter().next().unwrap();
    let partition = census::partition_invariant(&tri)?;
    Ok(FilledManifold {
        tri,
        spine: surgered.complex,
        oriented_candidates: oriented,
        matched_candidates,
        partition,
    })
}

// ---------------------------------------------------------------------------
// Output formats
// ---------------------------------------------------------------------------

fn word_display(w: &[i64]) -> String {
    w.iter()
        .map(|&l| {
            if l > 0 {
                format!("g{}", l - 1)
            } else {
                format!("-g{}", -l - 1)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn kind_display(k: &FaceKind) -> String {
    match k {
        FaceKind::Boundary => "boundary".to_string(),
        FaceKind::Cusp(c) => format!("cusp {c}"),
    }
}

/// JSON form of a dual spine: vertices, oriented edges, and faces with their
/// attaching words and kinds.
pub fn dual_to_json(d: &DualComplex) -> String {
    let faces: Vec<serde_json::Value> = d
        .complex
        .faces
        .iter()
        .zip(&d.face_kinds)
        .map(|(w, k)| {
            let mut obj = serde_json::Map::new();
            obj.insert(
                "kind".into(),
                json!(match k {
                    FaceKind::Boundary => "boundary",
                    FaceKind::Cusp(_) => "cusp",
                }),
            );
            if let FaceKind::Cusp(c) = k {
                obj.insert("cusp".into(), json!(c));
            }
            obj.insert("sides".into(), json!(w.len()));
            obj.insert("word".into(), json!(w));
            serde_json::Value::Object(obj)
        })
        .collect();
    let value = json!({
        "vertices": d.complex.num_vertices,
        "compact": d.vertex_compact,
        "edges": d.complex.edges.iter().map(|&(s, t)| json!([s, t])).collect::<Vec<_>>(),
        "faces": faces,
        "euler_characteristic": d.euler_characteristic(),
    });
    serde_json::to_string_pretty(&value).expect("spine JSON serialization")
}

/// Graphviz form of the dual 1-skeleton, with faces as trailing comments.
pub fn dual_to_dot(d: &DualComplex) -> String {
    let mut out = String::from("graph spine {\n  layout=neato;\n  node [shape=circle];\n");
    for v in 0..d.complex.num_vertices {
        let shape = if d.vertex_compact[v] {
            " shape=doublecircle"
        } else {
            ""
        };
        out.push_str(&format!("  v{v} [label=\"t{v}\"{shape}];\n"));
    }
    for (i, &(s, t)) in d.complex.edges.iter().enumerate() {
        out.push_str(&format!("  v{s} -- v{t} [label=\"g{i}\"];\n"));
    }
    for (i, (w, k)) in d.complex.faces.iter().zip(&d.face_kinds).enumerate() {
        out.push_str(&format!(
            "  // face {i} ({}, {} sides): {}\n",
            kind_display(k),
            w.len(),
            word_display(w)
        ));
    }
    out.push_str("}\n");
    out
}

/// Standalone SVG drawing of the large boundary-dual face as a regular
/// polygon: one triangular sector per side, each sector being the diamond
/// that crosses one dual edge, labeled with the signed gluing it traverses.
/// Corners are labeled with the tetrahedron they sit in.
pub fn big_face_svg(d: &DualComplex) -> Result<String, SpineError> {
    let big = d
        .face_kinds
        .iter()
        .position(|k| matches!(k, FaceKind::Boundary))
        .ok_or_else(|| SpineError::Malformed("no boundary-dual face".into()))?;
    let w = &d.complex.faces[big];
    let n = w.len();
    let (cx, cy, r) = (320.0, 320.0, 250.0);
    let corner = |i: usize| -> (f64, f64) {
        let ang = std::f64::consts::TAU * i as f64 / n as f64 - std::f64::consts::FRAC_PI_2;
        (cx + r * ang.cos(), cy + r * ang.sin())
    };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"680\" \
         viewBox=\"0 0 640 680\" font-family=\"monospace\" font-size=\"13\">\n"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"20\" y=\"28\" fill=\"black\">boundary-dual face: {n}-gon of diamonds</text>\n"
    ));
    let mut outline = String::new();
    for i in 0..n {
        let (px, py) = corner(i);
        outline.push_str(&format!("{}{px:.1} {py:.1}", if i == 0 { "M " } else { " L " }));
    }
    outline.push_str(" Z");
    for i in 0..n {
        let (px, py) = corner(i);
        out.push_str(&format!(
            "<line x1=\"{cx:.1}\" y1=\"{cy:.1}\" x2=\"{px:.1}\" y2=\"{py:.1}\" \
             stroke=\"lightgray\"/>\n"
        ));
    }
    out.push_str(&format!(
        "<path d=\"{outline}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n"
    ));
    for (i, &l) in w.iter().enumerate() {
        // Sector label at the centroid of the diamond's triangle.
        let (x1, y1) = corner(i);
        let (x2, y2) = corner((i + 1) % n);
        let (sx, sy) = ((cx + x1 + x2) / 3.0, (cy + y1 + y2) / 3.0);
        let label = if l > 0 {
            format!("g{}", l - 1)
        } else {
            format!("-g{}", -l - 1)
        };
        out.push_str(&format!(
            "<text x=\"{sx:.1}\" y=\"{sy:.1}\" fill=\"black\" text-anchor=\"middle\">{label}</text>\n"
        ));
        // Corner label just outside the polygon.
        let (ox, oy) = ((x1 - cx) / r, (y1 - cy) / r);
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"black\" text-anchor=\"middle\">t{}</text>\n",
            x1 + 16.0 * ox,
            y1 + 16.0 * oy + 4.0,
            d.complex.tail_of(l)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Standalone SVG drawing of the dual 1-skeleton on a circle, with parallel
/// edges fanned out, loops drawn beside their vertex, and a face legend.
pub fn dual_to_svg(d: &DualComplex) -> String {
    let n = d.complex.num_vertices;
    let (cx, cy, r) = (320.0, 280.0, 210.0);
    let pos = |v: usize| -> (f64, f64) {
        let ang = std::f64::consts::TAU * v as f64 / n.max(1) as f64 - std::f64::consts::FRAC_PI_2;
        (cx + r * ang.cos(), cy + r * ang.sin())
    };
    let legend_h = 24 * (d.complex.faces.len() + 1);
    let height = 600 + legend_h;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"{height}\" \
         viewBox=\"0 0 640 {height}\" font-family=\"monospace\" font-size=\"13\">\n"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let mut parallel: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, &(s, t)) in d.complex.edges.iter().enumerate() {
        parallel.entry((s.min(t), s.max(t))).or_default().push(i);
    }
    let mut keys: Vec<(usize, usize)> = parallel.keys().copied().collect();
    keys.sort_unstable();
    for (u, v) in keys {
        let group = &parallel[&(u, v)];
        if u == v {
            let (px, py) = pos(u);
            let (ox, oy) = ((px - cx) / r, (py - cy) / r);
            for (j, &e) in group.iter().enumerate() {
                let rr = 26.0 + 20.0 * j as f64;
                let (lx, ly) = (px + ox * rr, py + oy * rr);
                out.push_str(&format!(
                    "<circle cx=\"{lx:.1}\" cy=\"{ly:.1}\" r=\"16\" fill=\"none\" stroke=\"black\"/>\n"
                ));
                out.push_str(&format!(
                    "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"black\">g{e}</text>\n",
                    lx + 18.0,
                    ly + 4.0
                ));
            }
            continue;
        }
        let (x1, y1) = pos(u);
        let (x2, y2) = pos(v);
        let (mx, my) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0);
        let len = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt().max(1.0);
        let (nx, ny) = (-(y2 - y1) / len, (x2 - x1) / len);
        let m = group.len();
        for (j, &e) in group.iter().enumerate() {
            let off = (j as f64 - (m as f64 - 1.0) / 2.0) * 38.0;
            let (qx, qy) = (mx + nx * off, my + ny * off);
            out.push_str(&format!(
                "<path d=\"M {x1:.1} {y1:.1} Q {qx:.1} {qy:.1} {x2:.1} {y2:.1}\" \
                 fill=\"none\" stroke=\"black\"/>\n"
            ));
            let (tx, ty) = (
                0.25 * x1 + 0.5 * qx + 0.25 * x2,
                0.25 * y1 + 0.5 * qy + 0.25 * y2,
            );
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"black\">g{e}</text>\n",
                tx + 4.0,
                ty - 4.0
            ));
        }
    }
    for v in 0..n {
        let (px, py) = pos(v);
        let fill = if d.vertex_compact[v] { "black" } else { "white" };
        let text = if d.vertex_compact[v] { "white" } else { "black" };
        out.push_str(&format!(
            "<circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"15\" fill=\"{fill}\" stroke=\"black\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{:.1}\" fill=\"{text}\" text-anchor=\"middle\">{v}</text>\n",
            py + 4.0
        ));
    }
    let mut ly = 600;
    out.push_str(&format!(
        "<text x=\"20\" y=\"{ly}\" fill=\"black\">faces (vertex v = tetrahedron v, edge gI = gluing I):</text>\n"
    ));
    for (i, (w, k)) in d.complex.faces.iter().zip(&d.face_kinds).enumerate() {
        ly += 24;
        out.push_str(&format!(
            "<text x=\"20\" y=\"{ly}\" fill=\"black\">face {i} ({}, {} sides): {}</text>\n",
            kind_display(k),
            w.len(),
            word_display(w)
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{automorphism_group, enumerate_family, Family};
    use crate::triangulation::{build_chain, build_chain_member, ChainTwist};

    fn chain(k: usize) -> Triangulation {
        build_chain_member(k, ChainTwist::Left).unwrap()
    }

    fn boundary_genus(t: &Triangulation) -> i64 {
        t.meta.g.unwrap() as i64
    }

    #[test]
    fn dual_complexes_count_cells_and_euler() {
        let mut members: Vec<Triangulation> = vec![];
        for k in [2usize, 4, 6, 8] {
            members.push(chain(k));
        }
        for k in 1..=6 {
            for e in enumerate_family(Family::TwoChain, k).unwrap() {
                members.push(e.tri);
            }
        }
        for t in &members {
            let d = dualize(t).unwrap();
            d.complex.validate().unwrap();
            let n = t.tetra().len();
            assert_eq!(d.complex.num_vertices, n);
            assert_eq!(d.complex.edges.len(), 2 * n);
            let g = boundary_genus(t);
            let cusps = d.num_cusps();
            assert_eq!(d.complex.faces.len(), cusps + 1);
            assert_eq!(d.euler_characteristic(), 1 - g);
            assert!(d.complex.edge_wings().iter().all(|&w| w == 3));
            let big: Vec<usize> = d
                .face_kinds
                .iter()
                .enumerate()
                .filter(|(_, k)| matches!(k, FaceKind::Boundary))
                .map(|(i, _)| i)
                .collect();
            assert_eq!(big.len(), 1);
            assert_eq!(d.complex.faces[big[0]].len() as i64, 6 * g);
            let mut seen = vec![false; cusps];
            for (i, k) in d.face_kinds.iter().enumerate() {
                if let FaceKind::Cusp(c) = k {
                    assert_eq!(d.complex.faces[i].len(), 6);
                    assert!(!seen[*c]);
                    seen[*c] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn cusp_hexagons_pair_opposite_sides() {
        let mut members: Vec<Triangulation> = vec![chain(2), chain(4)];
        for k in 1..=5 {
            for e in enumerate_family(Family::TwoChain, k).unwrap() {
                members.push(e.tri);
            }
        }
        for t in &members {
            let d = dualize(t).unwrap();
            for (w, kind) in d.complex.faces.iter().zip(&d.face_kinds) {
                if !matches!(kind, FaceKind::Cusp(_)) {
                    continue;
                }
                assert_eq!(w.len(), 6);
                for s in 0..3 {
                    assert_eq!(w[s + 3], -w[s], "opposite sides must be inverse");
                }
                let edges: std::collections::HashSet<usize> =
                    w.iter().take(3).map(|&l| letter_edge(l)).collect();
                assert_eq!(edges.len(), 3);
                let a = d.complex.tail_of(w[0]);
                let b = d.complex.head_of(w[0]);
                assert_ne!(a, b);
                for (s, &l) in w.iter().enumerate() {
                    let (want_t, want_h) = if s % 2 == 0 { (a, b) } else { (b, a) };
                    assert_eq!(d.complex.tail_of(l), want_t);
                    assert_eq!(d.complex.head_of(l), want_h);
                }
            }
        }
    }

    #[test]
    fn six_slopes_match_hexagon_layouts() {
        // Crossing calibration: walking the filling curve, its three chords
        // leave the aligned hexagon through sides 3, 4, and 4. Crossing
        // reference side s contributes a fixed vector to the curve's (p, q)
        // class, and the slope is read off after negating q. Each of the six
        // layouts must land on the slope the table assigns to it.
        let side_vec = |s: usize| -> (i64, i64) {
            match s {
                0 => (-1, 0),
                1 => (0, -1),
                2 => (1, -1),
                3 => (1, 0),
                4 => (0, 1),
                5 => (-1, 1),
                _ => unreachable!(),
            }
        };
        let mut seen = vec![];
        for rot in 0..3 {
            for reversed in [false, true] {
                let reference = |s_aligned: usize| {
                    if reversed {
                        (rot + 6 - s_aligned) % 6
                    } else {
                        (rot + s_aligned) % 6
                    }
                };
                let mut tau = (0i64, 0i64);
                for s_aligned in [3usize, 4, 4] {
                    let v = side_vec(reference(s_aligned));
                    tau = (tau.0 + v.0, tau.1 + v.1);
                }
                let slope = normalize_slope(tau.0, -tau.1).unwrap();
                assert_eq!(
                    slope_layout(slope.0, slope.1),
                    Some(Layout { rot, reversed }),
                    "layout (rot {rot}, reversed {reversed}) should carry slope {slope:?}"
                );
                seen.push(slope);
            }
        }
        seen.sort_unstable();
        let mut expected = FILLING_SLOPES.to_vec();
        expected.sort_unstable();
        assert_eq!(seen, expected);
        for &(p, q) in &FILLING_SLOPES {
            assert_eq!(normalize_slope(p, q).unwrap(), (p, q));
        }
        // Values ascend: -2 < -1/2 < 1/3 < 2/3 < 3/2 < 3.
        for w in FILLING_SLOPES.windows(2) {
            assert!(w[0].0 * w[1].1 < w[1].0 * w[0].1);
        }
    }

    #[test]
    fn surgery_preserves_euler_and_shrinks_cells() {
        for k in [2usize, 4] {
            let t = chain(k);
            let mut spines = vec![];
            for &(p, q) in &FILLING_SLOPES {
                let s = fill_spine(&t, 0, (p, q)).unwrap();
                assert_eq!(s.complex.num_vertices, 2 * k - 1);
                assert_eq!(s.complex.edges.len(), 4 * k - 2);
                assert_eq!(s.complex.faces.len(), k);
                assert_eq!(s.complex.euler_characteristic(), 1 - k as i64);
                assert_eq!(s.complex.loop_count(), 1);
                let (ls, lt) = s.complex.edges[s
                    .complex
                    .edges
                    .iter()
                    .position(|(a, b)| a == b)
                    .unwrap()];
                assert_eq!(ls, s.center);
                assert_eq!(lt, s.center);
                assert_eq!(
                    s.tet_of_vertex.iter().filter(|v| v.is_none()).count(),
                    1
                );
                spines.push(s.complex);
            }
            for other in &spines[1..] {
                assert!(
                    complexes_isomorphic(&spines[0], other),
                    "all six slopes fill to one spine"
                );
            }
        }
        // The same surgery applies verbatim to a cusp of a two-chain member.
        let e = &enumerate_family(Family::TwoChain, 2).unwrap()[0];
        let d = dualize(&e.tri).unwrap();
        let s = fill_spine(&e.tri, 1, (-1, 2)).unwrap();
        assert_eq!(s.complex.num_vertices, d.complex.num_vertices - 1);
        assert_eq!(s.complex.edges.len(), d.complex.edges.len() - 2);
        assert_eq!(s.complex.faces.len(), d.complex.faces.len() - 1);
        assert_eq!(
            s.complex.euler_characteristic(),
            d.euler_characteristic()
        );
    }

    #[test]
    fn filling_yields_the_expected_smaller_member() {
        let t = chain(2);
        let expected = &enumerate_family(Family::TwoChain, 1).unwrap()[0];
        for cusp in 0..2 {
            for &(p, q) in &FILLING_SLOPES {
                let filled = dehn_fill(&t, cusp, (p, q)).unwrap();
                assert_eq!(filled.partition, (0, 1));
                assert!(filled.matched_candidates >= 1);
                assert_eq!(filled.spine.num_vertices, 3);
                assert_eq!(filled.spine.edges.len(), 6);
                assert_eq!(filled.spine.faces.len(), 2);
                assert!(
                    census::is_isomorphic(&filled.tri, &expected.tri).is_some(),
                    "cusp {cusp} slope {p}/{q} must fill to the two-chain member"
                );
            }
        }
    }

    #[test]
    fn filling_any_cusp_is_equivalent() {
        for k in [2usize, 4, 6] {
            let t = chain(k);
            let cusps = cusp_classes(&t);
            assert_eq!(cusps.len(), k);
            let mut orbit = std::collections::HashSet::new();
            for aut in automorphism_group(&t) {
                let mut image: Vec<usize> =
                    cusps[0].iter().map(|&tet| aut.tet_map[tet]).collect();
                image.sort_unstable();
                let idx = cusps.iter().position(|c| *c == image).unwrap();
                orbit.insert(idx);
            }
            assert_eq!(orbit.len(), k, "symmetries move cusp 0 to every cusp");
        }
    }

    #[test]
    fn cell_complex_isomorphism_distinguishes() {
        let entries = enumerate_family(Family::TwoChain, 3).unwrap();
        assert_eq!(entries.len(), 2);
        let d0 = dualize(&entries[0].tri).unwrap();
        let d1 = dualize(&entries[1].tri).unwrap();
        assert_eq!(d0.complex.num_vertices, d1.complex.num_vertices);
        assert_eq!(d0.complex.edges.len(), d1.complex.edges.len());
        assert_eq!(d0.complex.faces.len(), d1.complex.faces.len());
        assert!(!complexes_isomorphic(&d0.complex, &d1.complex));
        assert!(complexes_isomorphic(&d0.complex, &d0.complex));

        // Distinct twists of one member are isomorphic triangulations, so
        // their duals must match as complexes.
        use crate::triangulation::{build_two_chain_member, AttachTwist};
        let a = build_two_chain_member(1, 2, AttachTwist::A, AttachTwist::A).unwrap();
        let b = build_two_chain_member(1, 2, AttachTwist::B, AttachTwist::B).unwrap();
        assert!(complexes_isomorphic(
            &dualize(&a).unwrap().complex,
            &dualize(&b).unwrap().complex
        ));
    }

    #[test]
    fn invalid_fillings_are_rejected() {
        let t = chain(2);
        assert!(matches!(
            dehn_fill(&t, 0, (1, 1)),
            Err(SpineError::UnsupportedSlope { p: 1, q: 1 })
        ));
        assert!(matches!(
            dehn_fill(&t, 0, (1, 0)),
            Err(SpineError::UnsupportedSlope { p: 1, q: 0 })
        ));
        assert!(matches!(
            dehn_fill(&t, 0, (0, 0)),
            Err(SpineError::UnsupportedSlope { .. })
        ));
        assert!(matches!(
            dehn_fill(&t, 7, (-1, 2)),
            Err(SpineError::NoSuchCusp(7))
        ));
        // Slopes are reduced before the admissibility check.
        assert!(dehn_fill(&t, 0, (-2, 4)).is_ok());

        let two_chain = &enumerate_family(Family::TwoChain, 2).unwrap()[0];
        assert!(matches!(
            dehn_fill(&two_chain.tri, 0, (-1, 2)),
            Err(SpineError::UnsupportedManifold(_))
        ));

        let open = build_chain(1);
        assert!(dualize(&open.tri).is_err());
        assert!(fill_spine(&open.tri, 0, (-1, 2)).is_err());
    }

    #[test]
    fn emitters_are_well_formed_and_deterministic() {
        let t = chain(2);
        let d = dualize(&t).unwrap();

        let js = dual_to_json(&d);
        assert_eq!(js, dual_to_json(&d));
        let v: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(v["vertices"], 4);
        assert_eq!(v["edges"].as_array().unwrap().len(), 8);
        assert_eq!(v["faces"].as_array().unwrap().len(), 3);
        assert_eq!(v["euler_characteristic"], -1);

        let dot = dual_to_dot(&d);
        assert!(dot.starts_with("graph spine {"));
        assert_eq!(dot.matches(" -- ").count(), 8);
        assert_eq!(dot.matches("// face").count(), 3);

        let svg = dual_to_svg(&d);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path").count(), 8);

        // The boundary-face drawing is a 6g-gon: 12 sectors for g = 2.
        let bf = big_face_svg(&d).unwrap();
        assert_eq!(bf, big_face_svg(&d).unwrap());
        assert!(bf.starts_with("<svg"));
        assert_eq!(bf.matches("<line").count(), 12);
        assert_eq!(bf.matches("12-gon").count(), 1);
    }
}
