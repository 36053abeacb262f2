//! Classification of the one-vertex triangulations built in
//! [`crate::triangulation`]: combinatorial isomorphism, canonical forms and
//! hashes, symmetry groups with dihedral certificates, and an exhaustive
//! search that independently confirms the constructive enumeration.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::triangulation::{
    attachment_subcomplex, build_chain_member, build_two_chain_member, census_partitions,
    compute_edge_classes, edge_index, pair_gluings, perm_sign, validate_minimal,
    AttachTwist, ChainSide, ChainTwist, FaceRef, Gluing, Meta, Tet, TriError, Triangulation,
    FACE_VERTICES,
};

#[derive(Debug, Error)]
pub enum CensusError {
    #[error(transparent)]
    Tri(#[from] TriError),
    #[error("isomorphism check failed: {0}")]
    IsoCheck(String),
    #[error("search needs {needed} candidates, budget is {budget}")]
    SearchBudgetExceeded { needed: u128, budget: u64 },
    #[error("not a central-tetrahedron member: {0}")]
    NotTwoChain(String),
    #[error("shape check failed: {0}")]
    ShapeCheck(String),
    #[error("internal invariant violated: {0}")]
    InternalCheck(String),
}

/// A simplicial bijection between two triangulations: a bijection of the
/// tetrahedra together with a vertex bijection on each, commuting with every
/// face gluing and sending ideal vertices to ideal vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombIso {
    /// Image tetrahedron of each source tetrahedron.
    pub tet_map: Vec<usize>,
    /// Per source tetrahedron, the vertex bijection into its image.
    pub vertex_maps: Vec<[usize; 4]>,
    /// Whether the map preserves the orientation two-coloring.
    pub orientation_preserving: bool,
}

impl CombIso {
    pub fn identity(n: usize) -> Self {
        CombIso {
            tet_map: (0..n).collect(),
            vertex_maps: vec![[0, 1, 2, 3]; n],
            orientation_preserving: true,
        }
    }

    pub fn is_identity(&self) -> bool {
        self == &CombIso::identity(self.tet_map.len())
    }

    /// `self . other`: apply `other` first. Both must be self-maps of the
    /// same triangulation.
    pub fn compose(&self, other: &CombIso) -> CombIso {
        let n = other.tet_map.len();
        assert_eq!(self.tet_map.len(), n);
        let mut tet_map = vec![0; n];
        let mut vertex_maps = vec![[0; 4]; n];
        for t in 0..n {
            let mid = other.tet_map[t];
            tet_map[t] = self.tet_map[mid];
            for v in 0..4 {
                vertex_maps[t][v] = self.vertex_maps[mid][other.vertex_maps[t][v]];
            }
        }
        CombIso {
            tet_map,
            vertex_maps,
            orientation_preserving: self.orientation_preserving == other.orientation_preserving,
        }
    }

    pub fn inverse(&self) -> CombIso {
        let n = self.tet_map.len();
        let mut tet_map = vec![0; n];
        let mut vertex_maps = vec![[0; 4]; n];
        for t in 0..n {
            let it = self.tet_map[t];
            tet_map[it] = t;
            for v in 0..4 {
                vertex_maps[it][self.vertex_maps[t][v]] = v;
            }
        }
        CombIso {
            tet_map,
            vertex_maps,
            orientation_preserving: self.orientation_preserving,
        }
    }

    /// Order as an element of the symmetry group.
    pub fn order(&self) -> usize {
        let id = CombIso::identity(self.tet_map.len());
        let mut acc = self.clone();
        let mut ord = 1;
        while acc != id {
            acc = acc.compose(self);
            ord += 1;
            assert!(ord < 10_000, "runaway order computation");
        }
        ord
    }
}

/// All vertex bijections from `src` onto `dst` compatible with their kinds
/// (ideal vertex to ideal vertex), in lexicographic order.
fn seed_vertex_maps(src: &Tet, dst: &Tet) -> Vec<[usize; 4]> {
    match (src.ideal_vertex(), dst.ideal_vertex()) {
        (None, None) => permutations(&[0, 1, 2, 3])
            .into_iter()
            .map(|p| [p[0], p[1], p[2], p[3]])
            .collect(),
        (Some(i1), Some(i2)) => {
            let src_rest: Vec<usize> = (0..4).filter(|&v| v != i1).collect();
            let dst_rest: Vec<usize> = (0..4).filter(|&v| v != i2).collect();
            let mut out = vec![];
            for p in permutations(&dst_rest) {
                let mut vmap = [usize::MAX; 4];
                vmap[i1] = i2;
                for (s, d) in src_rest.iter().zip(p.iter()) {
                    vmap[*s] = *d;
                }
                out.push(vmap);
            }
            out
        }
        _ => vec![],
    }
}

/// Permutations of a sorted slice, in lexicographic order.
pub(crate) fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = vec![];
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Extends the assignment (tetrahedron 0 of `t1`) -> (`seed_tet`, `seed_vmap`)
/// across face gluings. Returns the full isomorphism or None if propagation
/// meets a contradiction. `t1` must be connected through its gluings.
fn propagate(
    t1: &Triangulation,
    t2: &Triangulation,
    seed_tet: usize,
    seed_vmap: [usize; 4],
) -> Option<CombIso> {
    let n = t1.tetra().len();
    let mut tet_map: Vec<Option<usize>> = vec![None; n];
    let mut vmaps = vec![[usize::MAX; 4]; n];
    let mut used = vec![false; n];

    if !kinds_compatible(&t1.tetra()[0], &t2.tetra()[seed_tet], &seed_vmap) {
        return None;
    }
    tet_map[0] = Some(seed_tet);
    vmaps[0] = seed_vmap;
    used[seed_tet] = true;

    let mut queue = vec![0usize];
    let mut head = 0;
    while head < queue.len() {
        let a = queue[head];
        head += 1;
        let ia = tet_map[a].unwrap();
        let va = vmaps[a];
        for f in 0..4 {
            // The face opposite vertex f must land on the face opposite the
            // image vertex.
            let f2 = va[f];
            match (t1.glued_to(a, f), t2.glued_to(ia, f2)) {
                (None, None) => {}
                (Some((fr1, m1)), Some((fr2, m2))) => {
                    let b = fr1.tet;
                    let ib = fr2.tet;
                    let mut vb = [usize::MAX; 4];
                    for v in 0..4 {
                        if v == f {
                            continue;
                        }
                        vb[m1[v].unwrap()] = m2[va[v]].unwrap();
                    }
                    vb[fr1.face] = fr2.face;
                    match tet_map[b] {
                        None => {
                            if used[ib]
                                || !kinds_compatible(&t1.tetra()[b], &t2.tetra()[ib], &vb)
                            {
                                return None;
                            }
                            tet_map[b] = Some(ib);
                            vmaps[b] = vb;
                            used[ib] = true;
                            queue.push(b);
                        }
                        Some(prev) => {
                            if prev != ib || vmaps[b] != vb {
                                return None;
                            }
                        }
                    }
                }
                _ => return None,
            }
        }
    }
    if queue.len() != n {
        return None;
    }

    // A gluing-commuting bijection flips or preserves the orientation
    // two-coloring globally, so this character is constant.
    let mut character = 0i8;
    for a in 0..n {
        let c = t1.sign(a) * t2.sign(tet_map[a].unwrap()) * perm_sign(&vmaps[a]);
        if character == 0 {
            character = c;
        } else {
            assert_eq!(character, c, "orientation character not constant");
        }
    }
    Some(CombIso {
        tet_map: tet_map.into_iter().map(|x| x.unwrap()).collect(),
        vertex_maps: vmaps,
        orientation_preserving: character == 1,
    })
}

fn kinds_compatible(src: &Tet, dst: &Tet, vmap: &[usize; 4]) -> bool {
    match (src.ideal_vertex(), dst.ideal_vertex()) {
        (None, None) => true,
        (Some(a), Some(b)) => vmap[a] == b,
        _ => false,
    }
}

/// All isomorphisms from `t1` onto `t2` (or just the first if `all` is
/// false), found by seeding every compatible image of tetrahedron 0 and
/// propagating across gluings. Orientation-reversing maps are included.
pub fn find_isomorphisms(t1: &Triangulation, t2: &Triangulation, all: bool) -> Vec<CombIso> {
    let mut out = vec![];
    if t1.tetra().len() != t2.tetra().len() || t1.tetra().is_empty() {
        return out;
    }
    let src0 = &t1.tetra()[0];
    for seed_tet in 0..t2.tetra().len() {
        for vmap in seed_vertex_maps(src0, &t2.tetra()[seed_tet]) {
            if let Some(iso) = propagate(t1, t2, seed_tet, vmap) {
                out.push(iso);
                if !all {
                    return out;
                }
            }
        }
    }
    out
}

pub fn is_isomorphic(t1: &Triangulation, t2: &Triangulation) -> Option<CombIso> {
    find_isomorphisms(t1, t2, false).into_iter().next()
}

/// The full simplicial symmetry group, identity included.
pub fn automorphism_group(t: &Triangulation) -> Vec<CombIso> {
    find_isomorphisms(t, t, true)
}

/// Certificate that a symmetry group of order 2m is dihedral: a rotation of
/// order m together with a reflection outside the rotation subgroup that
/// conjugates the rotation to its inverse.
#[derive(Debug, Clone, Copy)]
pub struct DihedralCertificate {
    /// Index into the group listing of an element of order m.
    pub rotation: usize,
    /// Index of an involution r with r t r = t^-1, not a power of t.
    pub reflection: usize,
    pub half_order: usize,
}

pub fn dihedral_certificate(
    auts: &[CombIso],
    half_order: usize,
) -> Result<DihedralCertificate, CensusError> {
    if auts.len() != 2 * half_order {
        return Err(CensusError::IsoCheck(format!(
            "group order {} is not 2 * {half_order}",
            auts.len()
        )));
    }
    let rotation = auts
        .iter()
        .position(|a| a.order() == half_order)
        .ok_or_else(|| {
            CensusError::IsoCheck(format!("no element of order {half_order}"))
        })?;
    let t = &auts[rotation];
    let mut cyclic = vec![CombIso::identity(t.tet_map.len())];
    for _ in 1..half_order {
        let next = t.compose(cyclic.last().unwrap());
        cyclic.push(next);
    }
    let t_inv = t.inverse();
    let reflection = auts
        .iter()
        .position(|r| {
            !cyclic.contains(r)
                && r.compose(r).is_identity()
                && r.compose(&t.compose(r)) == t_inv
        })
        .ok_or_else(|| {
            CensusError::IsoCheck("no inverting reflection outside the rotation subgroup".into())
        })?;
    Ok(DihedralCertificate {
        rotation,
        reflection,
        half_order,
    })
}

const ENC_BOUNDARY: u64 = u64::MAX;

/// Transcript of a breadth-first relabeling started at one seed. The
/// relabeling of every later tetrahedron is forced by the gluings, so the
/// transcript depends only on the isomorphism class and the seed.
fn encoding_from_seed(t: &Triangulation, seed_tet: usize, seed_vmap: [usize; 4]) -> Vec<u64> {
    let n = t.tetra().len();
    let mut new_id = vec![usize::MAX; n];
    let mut rho = vec![[usize::MAX; 4]; n];
    let mut order = vec![seed_tet];
    new_id[seed_tet] = 0;
    rho[seed_tet] = seed_vmap;

    let mut head = 0;
    while head < order.len() {
        let a = order[head];
        head += 1;
        let ra = rho[a];
        let mut inv = [usize::MAX; 4];
        for v in 0..4 {
            inv[ra[v]] = v;
        }
        for f_new in 0..4 {
            let f_old = inv[f_new];
            if let Some((fr, m)) = t.glued_to(a, f_old) {
                let b = fr.tet;
                if new_id[b] == usize::MAX {
                    let mut rb = [usize::MAX; 4];
                    for v in 0..4 {
                        if v == f_old {
                            continue;
                        }
                        rb[m[v].unwrap()] = ra[v];
                    }
                    rb[fr.face] = f_new;
                    new_id[b] = order.len();
                    rho[b] = rb;
                    order.push(b);
                }
            }
        }
    }
    assert_eq!(order.len(), n, "encoding requires a connected triangulation");

    let mut enc = Vec::with_capacity(n * 18);
    for &a in &order {
        enc.push(match t.tetra()[a].ideal_vertex() {
            None => 4u64,
            Some(iv) => rho[a][iv] as u64,
        });
    }
    for &a in &order {
        let ra = rho[a];
        let mut inv = [usize::MAX; 4];
        for v in 0..4 {
            inv[ra[v]] = v;
        }
        for f_new in 0..4 {
            let f_old = inv[f_new];
            match t.glued_to(a, f_old) {
                None => enc.push(ENC_BOUNDARY),
                Some((fr, m)) => {
                    enc.push(new_id[fr.tet] as u64);
                    enc.push(rho[fr.tet][fr.face] as u64);
                    let mut images = vec![];
                    for v in 0..4 {
                        if v == f_old {
                            continue;
                        }
                        images.push((ra[v], rho[fr.tet][m[v].unwrap()]));
                    }
                    images.sort_unstable();
                    for (_, img) in images {
                        enc.push(img as u64);
                    }
                }
            }
        }
    }
    enc
}

/// Seed relabelings tried for the canonical form: any tetrahedron first,
/// with an ideal vertex always relabeled to position 3.
fn canonical_seed_maps(tet: &Tet) -> Vec<[usize; 4]> {
    match tet.ideal_vertex() {
        None => seed_vertex_maps(&Tet::Compact, &Tet::Compact),
        Some(iv) => {
            let rest: Vec<usize> = (0..4).filter(|&v| v != iv).collect();
            let mut out = vec![];
            for p in permutations(&[0, 1, 2]) {
                let mut vmap = [usize::MAX; 4];
                vmap[iv] = 3;
                for (s, d) in rest.iter().zip(p.iter()) {
                    vmap[*s] = *d;
                }
                out.push(vmap);
            }
            out
        }
    }
}

/// Lexicographically smallest relabeling transcript over all seeds. Two
/// connected triangulations are isomorphic exactly when their canonical
/// encodings agree.
pub fn canonical_encoding(t: &Triangulation) -> Vec<u64> {
    let mut best: Option<Vec<u64>> = None;
    for seed in 0..t.tetra().len() {
        for vmap in canonical_seed_maps(&t.tetra()[seed]) {
            let enc = encoding_from_seed(t, seed, vmap);
            if best.as_ref().map_or(true, |b| enc < *b) {
                best = Some(enc);
            }
        }
    }
    best.unwrap_or_default()
}

/// FNV-1a hash of the canonical encoding, as a stable class fingerprint.
pub fn canonical_hash(t: &Triangulation) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for w in canonical_encoding(t) {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
    }
    h
}

/// The two families: closed chains of cusp pairs, and two chains attached to
/// a central compact tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Chain,
    TwoChain,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Chain => "chain",
            Family::TwoChain => "two-chain",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "chain" => Ok(Family::Chain),
            "two-chain" | "two_chain" | "twochain" => Ok(Family::TwoChain),
            other => Err(format!("unknown family '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CensusEntry {
    pub k: usize,
    pub family: Family,
    pub class_index: usize,
    /// Chain-length partition (i, j) for the two-chain family.
    pub partition: Option<(usize, usize)>,
    pub tri: Triangulation,
    pub aut_order: usize,
    pub aut_or_preserving: usize,
    pub canonical_hash: u64,
}

/// Constructs one representative per isomorphism class with k cusps in the
/// given family, asserting along the way that the different twist choices
/// collapse to a single class per chain-length partition and that distinct
/// partitions stay distinct.
pub fn enumerate_family(family: Family, k: usize) -> Result<Vec<CensusEntry>, CensusError> {
    match family {
        Family::Chain => {
            if k < 2 || k % 2 == 1 {
                return Ok(vec![]);
            }
            let left = build_chain_member(k, ChainTwist::Left)?;
            let right = build_chain_member(k, ChainTwist::Right)?;
            if is_isomorphic(&left, &right).is_none() {
                return Err(CensusError::IsoCheck(format!(
                    "the two closing twists of the {k}-cusp chain are not isomorphic"
                )));
            }
            let auts = automorphism_group(&left);
            let aut_or_preserving = auts.iter().filter(|a| a.orientation_preserving).count();
            let canonical_hash = canonical_hash(&left);
            Ok(vec![CensusEntry {
                k,
                family,
                class_index: 0,
                partition: None,
                tri: left,
                aut_order: auts.len(),
                aut_or_preserving,
                canonical_hash,
            }])
        }
        Family::TwoChain => {
            let mut entries = vec![];
            let mut seen: HashMap<Vec<u64>, (usize, usize)> = HashMap::new();
            for (class_index, &(i, j)) in census_partitions(k).iter().enumerate() {
                let twists = [
                    (AttachTwist::A, AttachTwist::A),
                    (AttachTwist::A, AttachTwist::B),
                    (AttachTwist::B, AttachTwist::A),
                    (AttachTwist::B, AttachTwist::B),
                ];
                let base = build_two_chain_member(i, j, twists[0].0, twists[0].1)?;
                for &(t1, t2) in &twists[1..] {
                    let other = build_two_chain_member(i, j, t1, t2)?;
                    if is_isomorphic(&base, &other).is_none() {
                        return Err(CensusError::IsoCheck(format!(
                            "twist variants of partition ({i}, {j}) are not isomorphic"
                        )));
                    }
                }
                let got = partition_invariant(&base)?;
                if got != (i, j) {
                    return Err(CensusError::InternalCheck(format!(
                        "partition invariant of ({i}, {j}) came out as {got:?}"
                    )));
                }
                let enc = canonical_encoding(&base);
                if let Some(prev) = seen.insert(enc, (i, j)) {
                    return Err(CensusError::IsoCheck(format!(
                        "partitions {prev:?} and ({i}, {j}) collapsed to one class"
                    )));
                }
                let auts = automorphism_group(&base);
                let aut_or_preserving = auts.iter().filter(|a| a.orientation_preserving).count();
                let canonical_hash = canonical_hash(&base);
                entries.push(CensusEntry {
                    k,
                    family,
                    class_index,
                    partition: Some((i, j)),
                    tri: base,
                    aut_order: auts.len(),
                    aut_or_preserving,
                    canonical_hash,
                });
            }
            Ok(entries)
        }
    }
}

/// Recovers the chain-length partition (i, j), i <= j, of a two-chain member
/// from its combinatorics alone: contract every cusp pair to a point and read
/// off the lengths of the two cycles through the central tetrahedron.
pub fn partition_invariant(t: &Triangulation) -> Result<(usize, usize), CensusError> {
    let n = t.tetra().len();
    let compact: Vec<usize> = (0..n).filter(|&i| t.tetra()[i].is_compact()).collect();
    if compact.len() != 1 {
        return Err(CensusError::NotTwoChain(format!(
            "{} compact tetrahedra",
            compact.len()
        )));
    }
    let x0 = compact[0];

    // Group the cusped tetrahedra into pairs joined along all three cusp
    // faces.
    let mut partner: Vec<Option<usize>> = vec![None; n];
    for tet in 0..n {
        if t.tetra()[tet].is_compact() {
            continue;
        }
        for f in 0..4 {
            if !t.tetra()[tet].is_cusp_face(f) {
                continue;
            }
            let (fr, _) = t
                .glued_to(tet, f)
                .ok_or_else(|| CensusError::NotTwoChain("unglued cusp face".into()))?;
            match partner[tet] {
                None => partner[tet] = Some(fr.tet),
                Some(p) if p == fr.tet => {}
                Some(p) => {
                    return Err(CensusError::NotTwoChain(format!(
                        "cusp faces of tetrahedron {tet} go to both {p} and {}",
                        fr.tet
                    )))
                }
            }
        }
    }
    let mut pair_id = vec![usize::MAX; n];
    let mut pairs = 0;
    for tet in 0..n {
        if t.tetra()[tet].is_compact() || pair_id[tet] != usize::MAX {
            continue;
        }
        let p = partner[tet].ok_or_else(|| CensusError::NotTwoChain("lone cusped tet".into()))?;
        if p == tet || partner[p] != Some(tet) {
            return Err(CensusError::NotTwoChain("cusp pairing is not an involution".into()));
        }
        pair_id[tet] = pairs;
        pair_id[p] = pairs;
        pairs += 1;
    }

    // Contracted graph: node 0 is the central tetrahedron, nodes 1.. are the
    // pairs; edges are the gluings along finite faces.
    let node = |tet: usize| if tet == x0 { 0 } else { 1 + pair_id[tet] };
    let mut adj: Vec<Vec<(usize, usize)>> = vec![vec![]; 1 + pairs];
    for (gi, g) in t.gluings().iter().enumerate() {
        let a_cusp = t.tetra()[g.a.tet].is_cusp_face(g.a.face);
        let b_cusp = t.tetra()[g.b.tet].is_cusp_face(g.b.face);
        if a_cusp != b_cusp {
            return Err(CensusError::NotTwoChain(
                "cusp face glued to a finite face".into(),
            ));
        }
        if a_cusp {
            continue;
        }
        let (va, vb) = (node(g.a.tet), node(g.b.tet));
        adj[va].push((vb, gi));
        adj[vb].push((va, gi));
    }
    if adj[0].len() != 4 {
        return Err(CensusError::NotTwoChain(format!(
            "central tetrahedron has contracted degree {}",
            adj[0].len()
        )));
    }
    for (p, nbrs) in adj.iter().enumerate().skip(1) {
        if nbrs.len() != 2 {
            return Err(CensusError::NotTwoChain(format!(
                "pair {p} has contracted degree {}",
                nbrs.len()
            )));
        }
    }

    // Walk the two cycles through node 0 and count interior pair nodes.
    let mut used = vec![false; t.gluings().len()];
    let mut cycles = vec![];
    for &(first, gi) in &adj[0] {
        if used[gi] {
            continue;
        }
        used[gi] = true;
        let mut cur = first;
        let mut prev_edge = gi;
        let mut inner = 0;
        while cur != 0 {
            inner += 1;
            let &(next, edge) = adj[cur]
                .iter()
                .find(|&&(_, e)| e != prev_edge && !used[e])
                .ok_or_else(|| CensusError::NotTwoChain("cycle walk got stuck".into()))?;
            used[edge] = true;
            cur = next;
            prev_edge = edge;
        }
        cycles.push(inner);
    }
    if cycles.len() != 2 {
        return Err(CensusError::NotTwoChain(format!(
            "{} cycles through the central tetrahedron",
            cycles.len()
        )));
    }
    let total: usize = cycles.iter().sum();
    if total != pairs {
        return Err(CensusError::NotTwoChain(format!(
            "cycles cover {total} of {pairs} pairs"
        )));
    }
    cycles.sort_unstable();
    Ok((cycles[0], cycles[1]))
}

/// Shape shared by every census member: closed, every cusp edge class made
/// of exactly six slots, and all boundary edge slots in one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeProfile {
    pub cusp_classes: usize,
    pub boundary_incidence: usize,
}

pub fn shape_profile(t: &Triangulation) -> Result<ShapeProfile, CensusError> {
    if !t.is_closed() {
        return Err(CensusError::ShapeCheck("unglued faces remain".into()));
    }
    let mut cusp = 0usize;
    let mut boundary = vec![];
    for class in compute_edge_classes(t) {
        let kinds: Vec<bool> = class
            .iter()
            .map(|&(tet, e)| t.tetra()[tet].is_cusp_edge(e))
            .collect();
        if kinds.iter().any(|&x| x != kinds[0]) {
            return Err(CensusError::ShapeCheck("mixed edge class".into()));
        }
        if kinds[0] {
            if class.len() != 6 {
                return Err(CensusError::ShapeCheck(format!(
                    "cusp edge class of {} slots",
                    class.len()
                )));
            }
            cusp += 1;
        } else {
            boundary.push(class.len());
        }
    }
    if boundary.len() != 1 {
        return Err(CensusError::ShapeCheck(format!(
            "{} boundary edge classes",
            boundary.len()
        )));
    }
    Ok(ShapeProfile {
        cusp_classes: cusp,
        boundary_incidence: boundary[0],
    })
}

#[derive(Debug)]
pub struct BruteForceResult {
    /// Completed candidate assemblies examined.
    pub candidates: u64,
    /// Candidates passing the minimality filter, before deduplication.
    pub accepted: u64,
    /// One representative per isomorphism class, in canonical-encoding order.
    pub classes: Vec<Triangulation>,
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 100_000_000;

/// Exhaustively enumerates every way to glue up the free faces of the fixed
/// normal-form skeleton (cusp pairs pre-glued, alternating orientation
/// coloring, central tetrahedron last in color -1), keeps the candidates
/// whose edge classes have the census shape, and deduplicates them by
/// canonical encoding. The normal form loses no classes: relabeling moves
/// any pair presentation onto the pre-glued one (see the tests) and flips
/// colors freely.
pub fn brute_force_census(
    family: Family,
    k: usize,
    budget: u64,
) -> Result<BruteForceResult, CensusError> {
    let (tetra, base, pool, signs): (Vec<Tet>, Vec<Gluing>, Vec<(usize, usize)>, Vec<i8>) =
        match family {
            Family::Chain => {
                if k < 1 {
                    return Err(CensusError::InternalCheck("empty chain search".into()));
                }
                let tetra = vec![Tet::nc(3); 2 * k];
                let mut base = vec![];
                for p in 0..k {
                    pair_gluings(2 * p, 2 * p + 1, &mut base);
                }
                let pool = (0..2 * k).map(|t| (t, 3)).collect();
                let signs = (0..2 * k).map(|t| if t % 2 == 0 { 1 } else { -1 }).collect();
                (tetra, base, pool, signs)
            }
            Family::TwoChain => {
                if k < 1 {
                    return Err(CensusError::InternalCheck("empty two-chain search".into()));
                }
                let mut tetra = vec![Tet::Compact];
                tetra.extend(std::iter::repeat(Tet::nc(3)).take(2 * k));
                let mut base = vec![];
                for p in 0..k {
                    pair_gluings(2 * p + 1, 2 * p + 2, &mut base);
                }
                let mut pool: Vec<(usize, usize)> = (0..4).map(|f| (0, f)).collect();
                pool.extend((1..=2 * k).map(|t| (t, 3)));
                let mut signs = vec![-1i8];
                signs.extend((0..2 * k).map(|t| if t % 2 == 0 { 1 } else { -1 }));
                (tetra, base, pool, signs)
            }
        };

    let needed = matching_count(pool.len());
    if needed > budget as u128 {
        return Err(CensusError::SearchBudgetExceeded { needed, budget });
    }

    // Edge-slot unions induced by the fixed skeleton.
    let n = tetra.len();
    let mut base_uf: Vec<u32> = (0..6 * n as u32).collect();
    for g in &base {
        union_gluing_edges(&mut base_uf, g);
    }

    // Cusp edges lie only on cusp faces, and every cusp face is glued in the
    // skeleton, so the cusp edge classes are already final: check once that
    // they form k classes of six slots. The candidate gluings run along
    // finite faces, whose edges are all boundary edges, so the per-candidate
    // filter only has to look at boundary slots.
    {
        let mut sizes: HashMap<usize, usize> = HashMap::new();
        for s in 0..6 * n {
            if tetra[s / 6].is_cusp_edge(s % 6) {
                *sizes.entry(uf_find(&mut base_uf, s)).or_insert(0) += 1;
            }
        }
        if sizes.len() != k || sizes.values().any(|&c| c != 6) {
            return Err(CensusError::InternalCheck(
                "skeleton cusp classes are not k classes of six slots".into(),
            ));
        }
    }
    let boundary_slots: Vec<usize> = (0..6 * n)
        .filter(|&s| !tetra[s / 6].is_cusp_edge(s % 6))
        .collect();

    // Precompute the orientation-legal vertex maps for every ordered face
    // pair in the pool.
    let mut legal: Vec<Vec<Vec<[usize; 3]>>> = vec![vec![vec![]; pool.len()]; pool.len()];
    for a in 0..pool.len() {
        for b in 0..pool.len() {
            if a == b {
                continue;
            }
            legal[a][b] = legal_maps(pool[a], pool[b], &signs);
        }
    }

    let mut search = Search {
        pool: &pool,
        legal: &legal,
        tetra: &tetra,
        base: &base,
        base_uf: &base_uf,
        boundary_slots: &boundary_slots,
        k,
        used: vec![false; pool.len()],
        chosen: Vec::with_capacity(pool.len() / 2),
        scratch: vec![0; 6 * n],
        candidates: 0,
        accepted: 0,
        class_reps: vec![],
    };
    search.run()?;

    let mut classes: Vec<(Vec<u64>, Triangulation)> = search
        .class_reps
        .into_iter()
        .map(|t| (canonical_encoding(&t), t))
        .collect();
    classes.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(BruteForceResult {
        candidates: search.candidates,
        accepted: search.accepted,
        classes: classes.into_iter().map(|(_, t)| t).collect(),
    })
}

/// Number of complete candidate assemblies for a pool of 2m faces:
/// (2m - 1)!! matchings times 3 legal maps per matched pair.
fn matching_count(pool: usize) -> u128 {
    let m = pool / 2;
    let mut count: u128 = 1;
    for odd in (1..pool as u128).step_by(2) {
        count = count.saturating_mul(odd);
    }
    count.saturating_mul(3u128.saturating_pow(m as u32))
}

/// The vertex maps gluing face `fa` of the first slot onto face `fb` of the
/// second that are consistent with the prescribed orientation coloring.
/// Exactly three of the six bijections qualify.
fn legal_maps(a: (usize, usize), b: (usize, usize), signs: &[i8]) -> Vec<[usize; 3]> {
    let verts_b = FACE_VERTICES[b.1];
    let mut out = vec![];
    for p in permutations(&[0, 1, 2]) {
        let map = [verts_b[p[0]], verts_b[p[1]], verts_b[p[2]]];
        let g = Gluing::new(FaceRef::new(a.0, a.1), FaceRef::new(b.0, b.1), map);
        let fsum = (a.1 + b.1) as u32;
        let rel = if fsum % 2 == 0 { -1 } else { 1 } * g.position_parity();
        if signs[a.0] * signs[b.0] == rel {
            out.push(map);
        }
    }
    out
}

struct Search<'a> {
    pool: &'a [(usize, usize)],
    legal: &'a [Vec<Vec<[usize; 3]>>],
    tetra: &'a [Tet],
    base: &'a [Gluing],
    base_uf: &'a [u32],
    boundary_slots: &'a [usize],
    k: usize,
    used: Vec<bool>,
    chosen: Vec<Gluing>,
    /// Reusable union-find buffer for the per-candidate filter.
    scratch: Vec<u32>,
    candidates: u64,
    accepted: u64,
    class_reps: Vec<Triangulation>,
}

impl Search<'_> {
    fn run(&mut self) -> Result<(), CensusError> {
        let first = match self.used.iter().position(|&u| !u) {
            None => return self.leaf(),
            Some(i) => i,
        };
        self.used[first] = true;
        for second in first + 1..self.pool.len() {
            if self.used[second] {
                continue;
            }
            self.used[second] = true;
            for mi in 0..self.legal[first][second].len() {
                let map = self.legal[first][second][mi];
                let (a, b) = (self.pool[first], self.pool[second]);
                self.chosen.push(Gluing::new(
                    FaceRef::new(a.0, a.1),
                    FaceRef::new(b.0, b.1),
                    map,
                ));
                self.run()?;
                self.chosen.pop();
            }
            self.used[second] = false;
        }
        self.used[first] = false;
        Ok(())
    }

    fn leaf(&mut self) -> Result<(), CensusError> {
        self.candidates += 1;
        self.scratch.copy_from_slice(self.base_uf);
        for gi in 0..self.chosen.len() {
            let g = self.chosen[gi];
            union_gluing_edges(&mut self.scratch, &g);
        }
        // Accept exactly the candidates whose boundary edges form one class.
        let root0 = uf_find(&mut self.scratch, self.boundary_slots[0]);
        for &s in &self.boundary_slots[1..] {
            if uf_find(&mut self.scratch, s) != root0 {
                return Ok(());
            }
        }
        self.accepted += 1;
        let mut gluings = self.base.to_vec();
        gluings.extend(self.chosen.iter().cloned());
        let t = Triangulation::new(self.tetra.to_vec(), gluings, Meta::default())
            .map_err(|e| CensusError::InternalCheck(format!("accepted candidate rejected: {e}")))?;
        if self.class_reps.iter().any(|r| is_isomorphic(&t, r).is_some()) {
            return Ok(());
        }
        // New class: the cheap filter must agree with the full validation.
        validate_minimal(&t, self.k)
            .map_err(|e| CensusError::InternalCheck(format!("shape filter disagrees: {e}")))?;
        self.class_reps.push(t);
        Ok(())
    }
}

fn union_gluing_edges(parent: &mut [u32], g: &Gluing) {
    let fa = FACE_VERTICES[g.a.face];
    for p in 0..3 {
        for q in p + 1..3 {
            let ea = edge_index(fa[p], fa[q]);
            let eb = edge_index(g.map[p], g.map[q]);
            uf_union(parent, g.a.tet * 6 + ea, g.b.tet * 6 + eb);
        }
    }
}

fn uf_find(parent: &mut [u32], x: usize) -> usize {
    let mut root = x;
    while parent[root] as usize != root {
        root = parent[root] as usize;
    }
    let mut cur = x;
    while cur != root {
        let next = parent[cur] as usize;
        parent[cur] = root as u32;
        cur = next;
    }
    root
}

fn uf_union(parent: &mut [u32], x: usize, y: usize) {
    let (rx, ry) = (uf_find(parent, x), uf_find(parent, y));
    if rx != ry {
        parent[rx] = ry as u32;
    }
}

/// How one chain attachment identifies the four central-tetrahedron edges
/// that are not shared between attachment faces: a perfect matching on the
/// edge indices {1, 2, 3, 4} of the central tetrahedron, depending only on
/// the side and the parity of the chain length.
pub fn side_edge_matching(
    side: ChainSide,
    pairs: usize,
) -> Result<[(usize, usize); 2], CensusError> {
    let mut found: Option<[(usize, usize); 2]> = None;
    for twist in [AttachTwist::A, AttachTwist::B] {
        let t = attachment_subcomplex(side, pairs, twist)?;
        let classes = compute_edge_classes(&t);
        let probe = [1usize, 2, 3, 4];
        let mut root_of = HashMap::new();
        for (ci, class) in classes.iter().enumerate() {
            for &(tet, e) in class {
                if tet == 0 && probe.contains(&e) {
                    root_of.insert(e, ci);
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for &e in &probe {
            groups.entry(root_of[&e]).or_default().push(e);
        }
        let mut pairs_found: Vec<(usize, usize)> = groups
            .values()
            .map(|g| {
                if g.len() != 2 {
                    return Err(CensusError::ShapeCheck(format!(
                        "central edges {g:?} identified together"
                    )));
                }
                Ok((g[0].min(g[1]), g[0].max(g[1])))
            })
            .collect::<Result<_, _>>()?;
        pairs_found.sort_unstable();
        let matching = [pairs_found[0], pairs_found[1]];
        match found {
            None => found = Some(matching),
            Some(prev) => {
                if prev != matching {
                    return Err(CensusError::InternalCheck(format!(
                        "attachment matching depends on the twist: {prev:?} vs {matching:?}"
                    )));
                }
            }
        }
    }
    Ok(found.unwrap())
}

/// Whether the two attachments of lengths i and j together identify all four
/// central-tetrahedron side edges into one chain: both matchings are drawn
/// on the vertex set {1, 2, 3, 4}, and their union is connected exactly when
/// at least one chain length is odd. This is the combinatorial reason the
/// census excludes partitions with both parts even.
pub fn edge_identification_check(i: usize, j: usize) -> Result<bool, CensusError> {
    let m1 = side_edge_matching(ChainSide::First, i)?;
    let m2 = side_edge_matching(ChainSide::Second, j)?;
    let mut parent: Vec<usize> = (0..5).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for (a, b) in m1.iter().chain(m2.iter()) {
        let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let root = find(&mut parent, 1);
    Ok((2..5).all(|e| find(&mut parent, e) == root))
}

/// CSV listing of census entries, one row per class.
pub fn census_csv(entries: &[CensusEntry]) -> String {
    let mut out =
        String::from("k,family,class_index,i,j,aut_order,aut_or_preserving,canonical_hash\n");
    for e in entries {
        let (i, j) = match e.partition {
            Some((i, j)) => (i.to_string(), j.to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:016x}\n",
            e.k,
            e.family.label(),
            e.class_index,
            i,
            j,
            e.aut_order,
            e.aut_or_preserving,
            e.canonical_hash
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::build_chain;

    fn pair_complex() -> Triangulation {
        let mut gluings = vec![];
        pair_gluings(0, 1, &mut gluings);
        Triangulation::new(vec![Tet::nc(3); 2], gluings, Meta::default()).unwrap()
    }

    #[test]
    fn chain_census_counts() {
        for k in 2..=8 {
            let entries = enumerate_family(Family::Chain, k).unwrap();
            let expected = if k % 2 == 0 { 1 } else { 0 };
            assert_eq!(entries.len(), expected, "k = {k}");
        }
    }

    #[test]
    fn two_chain_census_counts() {
        let expected = [1, 1, 2, 1, 3, 2, 4, 2];
        for k in 1..=8 {
            let entries = enumerate_family(Family::TwoChain, k).unwrap();
            assert_eq!(entries.len(), expected[k - 1], "k = {k}");
            for e in &entries {
                let (i, j) = e.partition.unwrap();
                assert_eq!(i + j, k);
            }
        }
    }

    #[test]
    fn census_members_have_minimal_shape() {
        for k in 1..=6 {
            for family in [Family::Chain, Family::TwoChain] {
                for e in enumerate_family(family, k).unwrap() {
                    let profile = shape_profile(&e.tri).unwrap();
                    assert_eq!(profile.cusp_classes, k);
                    let genus = match family {
                        Family::Chain => k,
                        Family::TwoChain => k + 1,
                    };
                    assert_eq!(profile.boundary_incidence, 6 * genus);
                }
            }
        }
    }

    #[test]
    fn chain_symmetry_group_is_dihedral() {
        for k in [2usize, 4, 6] {
            let entry = enumerate_family(Family::Chain, k).unwrap().pop().unwrap();
            assert_eq!(entry.aut_order, 6 * k, "k = {k}");
            assert_eq!(entry.aut_or_preserving, 3 * k, "k = {k}");
            let auts = automorphism_group(&entry.tri);
            let cert = dihedral_certificate(&auts, 3 * k).unwrap();
            assert_eq!(auts[cert.rotation].order(), 3 * k);
            assert_eq!(auts[cert.reflection].order(), 2);
        }
    }

    #[test]
    fn two_chain_symmetry_orders() {
        for k in 1..=6 {
            for e in enumerate_family(Family::TwoChain, k).unwrap() {
                let (i, j) = e.partition.unwrap();
                let expected = if i == j { 2 } else { 1 };
                assert_eq!(e.aut_order, expected, "partition ({i}, {j})");
            }
        }
    }

    #[test]
    fn canonical_encoding_separates_and_joins() {
        let a = build_chain_member(2, ChainTwist::Left).unwrap();
        let b = build_chain_member(2, ChainTwist::Right).unwrap();
        assert_eq!(canonical_encoding(&a), canonical_encoding(&b));
        let c = build_chain_member(4, ChainTwist::Left).unwrap();
        assert_ne!(canonical_encoding(&a), canonical_encoding(&c));
        let d = build_two_chain_member(1, 1, AttachTwist::A, AttachTwist::A).unwrap();
        let e = build_two_chain_member(1, 2, AttachTwist::A, AttachTwist::A).unwrap();
        assert_ne!(canonical_encoding(&d), canonical_encoding(&e));
    }

    #[test]
    fn isomorphism_respects_partition_invariant() {
        for k in 1..=5 {
            let entries = enumerate_family(Family::TwoChain, k).unwrap();
            for e in &entries {
                assert_eq!(partition_invariant(&e.tri).unwrap(), e.partition.unwrap());
            }
            for a in &entries {
                for b in &entries {
                    let iso = is_isomorphic(&a.tri, &b.tri).is_some();
                    assert_eq!(iso, a.partition == b.partition);
                }
            }
        }
    }

    #[test]
    fn open_pair_presentations_reduce_to_normal_form() {
        let reference = pair_complex();
        let auts = automorphism_group(&reference);
        assert!(
            auts.iter().any(|a| !a.orientation_preserving),
            "pair complex must admit an orientation-reversing relabeling"
        );

        // Every orientation-consistent way to join two cusped tetrahedra
        // along all three cusp faces: a bijection of the cusp faces and, per
        // face, one of the two vertex maps fixing the ideal vertex.
        let mut consistent = 0;
        let mut single_class = 0;
        for sigma in permutations(&[0, 1, 2]) {
            for bits in 0..8u32 {
                let mut gluings = vec![];
                for f in 0..3 {
                    let fa = FACE_VERTICES[f];
                    let fb = FACE_VERTICES[sigma[f]];
                    let mut others_b: Vec<usize> =
                        fb.iter().copied().filter(|&v| v != 3).collect();
                    if bits >> f & 1 == 1 {
                        others_b.swap(0, 1);
                    }
                    let mut map = [usize::MAX; 3];
                    let mut next = 0;
                    for (p, &v) in fa.iter().enumerate() {
                        if v == 3 {
                            map[p] = 3;
                        } else {
                            map[p] = others_b[next];
                            next += 1;
                        }
                    }
                    gluings.push(Gluing::new(FaceRef::new(0, f), FaceRef::new(1, sigma[f]), map));
                }
                let Ok(t) = Triangulation::new(vec![Tet::nc(3); 2], gluings, Meta::default())
                else {
                    continue;
                };
                consistent += 1;
                // Cusp edges lie on cusp faces only, so their classes are
                // settled inside the pair. A pair whose cusp edges split
                // into three classes of two can never sit in a member
                // (every cusp class there has six slots); every pair with
                // one class of six is the normal form up to relabeling.
                let mut sizes: Vec<usize> = compute_edge_classes(&t)
                    .into_iter()
                    .filter(|c| t.tetra()[c[0].0].is_cusp_edge(c[0].1))
                    .map(|c| c.len())
                    .collect();
                sizes.sort_unstable();
                let iso = is_isomorphic(&t, &reference).is_some();
                if sizes == [6] {
                    assert!(
                        iso,
                        "assembly sigma = {sigma:?}, bits = {bits} escapes the normal form"
                    );
                    single_class += 1;
                } else {
                    assert_eq!(sizes, [2, 2, 2]);
                    assert!(!iso);
                }
            }
        }
        assert_eq!(consistent, 12);
        assert_eq!(single_class, 6);
    }

    #[test]
    fn brute_force_matches_chain_enumeration() {
        for k in 2..=4 {
            let result = brute_force_census(Family::Chain, k, DEFAULT_SEARCH_BUDGET).unwrap();
            let entries = enumerate_family(Family::Chain, k).unwrap();
            assert_eq!(result.classes.len(), entries.len(), "k = {k}");
            for (class, entry) in result.classes.iter().zip(&entries) {
                assert!(is_isomorphic(class, &entry.tri).is_some());
            }
        }
        let odd = brute_force_census(Family::Chain, 3, DEFAULT_SEARCH_BUDGET).unwrap();
        assert_eq!(odd.classes.len(), 0);
        assert_eq!(odd.candidates, 405);
    }

    #[test]
    fn brute_force_matches_two_chain_enumeration() {
        for k in 1..=3 {
            let result = brute_force_census(Family::TwoChain, k, DEFAULT_SEARCH_BUDGET).unwrap();
            let entries = enumerate_family(Family::TwoChain, k).unwrap();
            assert_eq!(result.classes.len(), entries.len(), "k = {k}");
            for class in &result.classes {
                let partition = partition_invariant(class).unwrap();
                let entry = entries
                    .iter()
                    .find(|e| e.partition == Some(partition))
                    .expect("partition not in the constructive census");
                assert!(is_isomorphic(class, &entry.tri).is_some());
            }
        }
    }

    #[test]
    fn search_budget_is_enforced() {
        let err = brute_force_census(Family::TwoChain, 5, 1000).unwrap_err();
        match err {
            CensusError::SearchBudgetExceeded { needed, .. } => {
                assert_eq!(needed, 135_135 * 3u128.pow(7));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn attachment_matchings_depend_only_on_parity() {
        for pairs in 0..=3 {
            let m = side_edge_matching(ChainSide::First, pairs).unwrap();
            let expected = if pairs % 2 == 1 {
                [(1, 2), (3, 4)]
            } else {
                [(1, 4), (2, 3)]
            };
            assert_eq!(m, expected, "first side, {pairs} pairs");
        }
        for pairs in 1..=4 {
            let m = side_edge_matching(ChainSide::Second, pairs).unwrap();
            let expected = if pairs % 2 == 1 {
                [(1, 3), (2, 4)]
            } else {
                [(1, 4), (2, 3)]
            };
            assert_eq!(m, expected, "second side, {pairs} pairs");
        }
    }

    #[test]
    fn edge_identification_matches_partition_parity() {
        for i in 0..=3 {
            for j in 1..=3 {
                if i > j {
                    continue;
                }
                let connected = edge_identification_check(i, j).unwrap();
                assert_eq!(connected, i % 2 == 1 || j % 2 == 1, "({i}, {j})");
            }
        }
    }

    #[test]
    fn csv_has_one_row_per_class() {
        let mut entries = vec![];
        for k in 1..=4 {
            entries.extend(enumerate_family(Family::TwoChain, k).unwrap());
            entries.extend(enumerate_family(Family::Chain, k).unwrap());
        }
        let csv = census_csv(&entries);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 1 + entries.len());
        assert!(lines[0].starts_with("k,family,class_index"));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 8);
        }
    }

    #[test]
    fn chain_isomorphisms_preserve_structure() {
        let open = build_chain(2);
        let auts = automorphism_group(&open.tri);
        assert!(!auts.is_empty());
        for a in &auts {
            // Boundary faces must go to boundary faces, so the chain ends
            // are preserved or swapped.
            let ends = [open.start_face(), open.end_face()];
            for e in ends {
                let t2 = a.tet_map[e.tet];
                let f2 = a.vertex_maps[e.tet][e.face];
                assert!(open.tri.glued_to(t2, f2).is_none());
            }
        }
    }
}
