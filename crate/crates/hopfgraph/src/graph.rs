//! The multigraph data model: vertex-ordered multigraphs with labeled
//! external legs and species-tagged internal edges (self-loops allowed),
//! canonical forms, connectivity bookkeeping and the brute-force symmetry
//! factor.
//!
//! A graph mirrors a monomial in the v-fold tensor power of the field
//! operator algebra: tensor factor i is vertex i, a product of field
//! operators in factor i is the multiset of external legs at vertex i, and
//! each internal edge joins two factors (or one factor to itself).
//!
//! Vertices are indexed 1..=v.  Labels and species are small integers; the
//! whole graph is stored as a compact byte string so that graph sums with
//! tens of millions of terms stay in memory.

use std::cmp::Ordering;

use num::bigint::BigUint;
use num::One;
use smallvec::SmallVec;

use crate::{Error, Result};

/// Identifier of a field species, `1..=m` for a model with m species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Species(pub u8);

/// External-leg label with a total order.
///
/// User labels are `1..=253` (label k stands for the end point x_k).  The
/// two top values are reserved as virtual labels for internal gluing and
/// never appear in user-facing graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u8);

impl Label {
    pub const MAX_USER: u8 = 253;
    /// Reserved virtual label "u" used while gluing an extra edge.
    pub const VIRT_U: Label = Label(254);
    /// Reserved virtual label "w" used while gluing an extra edge.
    pub const VIRT_W: Label = Label(255);

    pub fn is_virtual(self) -> bool {
        self.0 > Self::MAX_USER
    }
}

/// An external leg: a labeled stub attached to a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Leg {
    pub vertex: u8,
    pub label: Label,
    pub species: Species,
}

impl Leg {
    pub fn new(vertex: u8, label: Label, species: Species) -> Leg {
        Leg { vertex, label, species }
    }
}

/// An internal edge: an unordered pair of vertex indices with `a <= b`
/// (`a == b` encodes a self-loop) and a species tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: u8,
    pub b: u8,
    pub species: Species,
}

impl Edge {
    /// Builds an edge, normalizing the endpoint order.
    pub fn new(i: u8, j: u8, species: Species) -> Edge {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        Edge { a, b, species }
    }

    pub fn is_loop(&self) -> bool {
        self.a == self.b
    }
}

const HDR: usize = 2; // buf[0] = v, buf[1] = leg count
const REC: usize = 3; // bytes per leg / edge record

/// A vertex-ordered multigraph in canonical ordered form.
///
/// Canonical ordered form means: the leg list is sorted by
/// (vertex, label, species) and the edge list by (a, b, species) with
/// a <= b.  Two raw descriptions of the same vertex-ordered graph always
/// produce identical `Graph` values, so equality and ordering on `Graph`
/// are equality and (an arbitrary but fixed) total order on vertex-ordered
/// graphs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    buf: SmallVec<[u8; 36]>,
}

impl Ord for Graph {
    fn cmp(&self, other: &Self) -> Ordering {
        self.buf[..].cmp(&other.buf[..])
    }
}

impl PartialOrd for Graph {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Graph {
    /// Canonicalizes raw graph data into the ordered normal form.
    ///
    /// Edges are normalized to (min, max, species) and sorted; the leg
    /// multiset is sorted.  Labels must be pairwise distinct.
    pub fn new(v: u32, mut legs: Vec<Leg>, edges: Vec<Edge>) -> Result<Graph> {
        if v == 0 || v > 255 {
            return Err(Error::BadVertexCount(v));
        }
        let v8 = v as u8;
        let mut seen = [false; 256];
        for leg in &legs {
            if leg.vertex == 0 || leg.vertex > v8 {
                return Err(Error::VertexOutOfRange { index: leg.vertex as u32, v });
            }
            if leg.label.0 == 0 {
                return Err(Error::BadLabel(0));
            }
            if seen[leg.label.0 as usize] {
                return Err(Error::DuplicateLabel(leg.label.0 as u32));
            }
            seen[leg.label.0 as usize] = true;
            if leg.species.0 == 0 {
                return Err(Error::BadSpecies(0));
            }
        }
        if legs.len() > 255 {
            return Err(Error::ResourceGuard(format!("{} legs (max 255)", legs.len())));
        }
        let mut norm: Vec<Edge> = Vec::with_capacity(edges.len());
        for e in edges {
            if e.a == 0 || e.a > v8 || e.b == 0 || e.b > v8 {
                let index = if e.a == 0 || e.a > v8 { e.a } else { e.b };
                return Err(Error::VertexOutOfRange { index: index as u32, v });
            }
            if e.species.0 == 0 {
                return Err(Error::BadSpecies(0));
            }
            norm.push(Edge::new(e.a, e.b, e.species));
        }
        legs.sort_unstable();
        norm.sort_unstable();
        let mut buf = SmallVec::with_capacity(HDR + REC * (legs.len() + norm.len()));
        buf.push(v8);
        buf.push(legs.len() as u8);
        for leg in &legs {
            buf.push(leg.vertex);
            buf.push(leg.label.0);
            buf.push(leg.species.0);
        }
        for e in &norm {
            buf.push(e.a);
            buf.push(e.b);
            buf.push(e.species.0);
        }
        Ok(Graph { buf })
    }

    /// Single vertex carrying the given legs, no edges.
    pub fn single_vertex(legs: Vec<(Label, Species)>) -> Result<Graph> {
        let legs = legs
            .into_iter()
            .map(|(l, s)| Leg::new(1, l, s))
            .collect();
        Graph::new(1, legs, Vec::new())
    }

    pub fn vertex_count(&self) -> u32 {
        self.buf[0] as u32
    }

    pub fn leg_count(&self) -> usize {
        self.buf[1] as usize
    }

    pub fn edge_count(&self) -> usize {
        (self.buf.len() - HDR - REC * self.leg_count()) / REC
    }

    pub fn legs(&self) -> impl Iterator<Item = Leg> + '_ {
        self.buf[HDR..HDR + REC * self.leg_count()]
            .chunks_exact(REC)
            .map(|c| Leg::new(c[0], Label(c[1]), Species(c[2])))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.buf[HDR + REC * self.leg_count()..]
            .chunks_exact(REC)
            .map(|c| Edge { a: c[0], b: c[1], species: Species(c[2]) })
    }

    /// Total degree of a vertex: legs plus edge end points, a self-loop
    /// contributing two.
    pub fn degree(&self, vertex: u8) -> u32 {
        let mut d = 0;
        for leg in self.legs() {
            if leg.vertex == vertex {
                d += 1;
            }
        }
        for e in self.edges() {
            if e.a == vertex {
                d += 1;
            }
            if e.b == vertex {
                d += 1;
            }
        }
        d
    }

    /// Smallest total degree over all vertices.
    pub fn min_valence(&self) -> u32 {
        (1..=self.buf[0]).map(|i| self.degree(i)).min().unwrap_or(0)
    }

    /// Vertex, edge and leg counts, connectivity, and the loop number
    /// l = e - v + 1 (defined only for connected graphs).  External legs do
    /// not connect vertices.
    pub fn stats(&self) -> GraphStats {
        let v = self.vertex_count();
        let e = self.edge_count() as u32;
        let n = self.leg_count() as u32;
        let mut uf = UnionFind::new(v as usize);
        for edge in self.edges() {
            uf.union(edge.a as usize - 1, edge.b as usize - 1);
        }
        let connected = uf.component_count() == 1;
        GraphStats {
            vertices: v,
            edges: e,
            legs: n,
            connected,
            loops: if connected { Some(e + 1 - v) } else { None },
        }
    }

    pub fn is_connected(&self) -> bool {
        self.stats().connected
    }

    /// Applies a vertex relabeling given as `new_of[old - 1] = new` and
    /// returns the resulting graph in canonical ordered form.  External
    /// labels are not permuted; they stay attached to their relocated
    /// vertex.
    pub fn relabel_vertices(&self, new_of: &[u8]) -> Graph {
        let legs = self
            .legs()
            .map(|l| Leg::new(new_of[l.vertex as usize - 1], l.label, l.species))
            .collect();
        let edges = self
            .edges()
            .map(|e| Edge::new(new_of[e.a as usize - 1], new_of[e.b as usize - 1], e.species))
            .collect();
        Graph::new(self.vertex_count(), legs, edges).expect("relabeling preserves validity")
    }

    /// Canonical representative of the orbit of this graph under all v!
    /// vertex relabelings ("forgetting" the vertex order).  External labels
    /// stay attached to their relocated vertices.  Deterministic: the result
    /// minimizes a fixed row-wise encoding of the relabeled graph, searched
    /// with pruning so that label-rich graphs canonicalize in near-linear
    /// time.
    pub fn canonical_unordered(&self) -> Graph {
        let v = self.buf[0] as usize;
        if v == 1 {
            return self.clone();
        }
        let mut search = CanonSearch::new(self);
        search.run();
        let mut new_of = vec![0u8; v];
        for (depth, &old) in search.best_perm.iter().enumerate() {
            new_of[old as usize] = depth as u8 + 1;
        }
        self.relabel_vertices(&new_of)
    }

    /// The order of the automorphism group of this connected graph:
    /// permutations of vertices together with permutations of internal
    /// half-edges that preserve incidence, the pairing of half-edges into
    /// edges and edge species, and fix every external leg pointwise.
    ///
    /// Brute force: every candidate vertex permutation is enumerated; each
    /// valid one contributes k! per class of k parallel edges and a factor 2
    /// per self-loop.
    pub fn symmetry_factor(&self) -> Result<BigUint> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let v = self.buf[0] as usize;
        // Per-vertex leg signatures; a permutation must map each vertex to
        // one with the identical labeled leg multiset, which (labels being
        // distinct) fixes every leg pointwise.
        let legs_by_vertex = legs_by_vertex(self);
        let edges: Vec<Edge> = self.edges().collect();
        let mut orig_keys: SmallVec<[u32; 16]> =
            edges.iter().map(|e| edge_key(e.a, e.b, e.species.0)).collect();
        orig_keys.sort_unstable();

        let mut valid = 0u64;
        let mut perm: Vec<u8> = (0..v as u8).collect();
        let mut scratch: SmallVec<[u32; 16]> = SmallVec::new();
        let mut check = |perm: &[u8]| {
            for i in 0..v {
                if legs_by_vertex[perm[i] as usize] != legs_by_vertex[i] {
                    return false;
                }
            }
            scratch.clear();
            for e in &edges {
                let a = perm[e.a as usize - 1] + 1;
                let b = perm[e.b as usize - 1] + 1;
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                scratch.push(edge_key(a, b, e.species.0));
            }
            scratch.sort_unstable();
            scratch[..] == orig_keys[..]
        };
        // Heap's algorithm over all v! permutations.
        let mut c = vec![0usize; v];
        if check(&perm) {
            valid += 1;
        }
        let mut i = 0;
        while i < v {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                if check(&perm) {
                    valid += 1;
                }
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }

        // Half-edge pairings per valid vertex permutation: k! per class of
        // parallel edges, 2 per self-loop.
        let mut factor = BigUint::one();
        let mut run = 1u64;
        for i in 0..orig_keys.len() {
            if i > 0 && orig_keys[i] == orig_keys[i - 1] {
                run += 1;
                factor *= BigUint::from(run);
            } else {
                run = 1;
            }
        }
        let loops = edges.iter().filter(|e| e.is_loop()).count();
        factor <<= loops;
        Ok(BigUint::from(valid) * factor)
    }

    pub(crate) fn into_parts(&self) -> (u32, Vec<Leg>, Vec<Edge>) {
        (self.vertex_count(), self.legs().collect(), self.edges().collect())
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(v={}", self.vertex_count())?;
        write!(f, ", legs=[")?;
        for (i, l) in self.legs().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:x{}s{}", l.vertex, l.label.0, l.species.0)?;
        }
        write!(f, "], edges=[")?;
        for (i, e) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({},{})s{}", e.a, e.b, e.species.0)?;
        }
        write!(f, "])")
    }
}

/// Derived quantities of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub vertices: u32,
    pub edges: u32,
    pub legs: u32,
    pub connected: bool,
    /// First Betti number e - v + 1; `None` when disconnected.
    pub loops: Option<u32>,
}

fn edge_key(a: u8, b: u8, s: u8) -> u32 {
    (a as u32) << 16 | (b as u32) << 8 | s as u32
}

fn legs_by_vertex(g: &Graph) -> Vec<SmallVec<[u16; 4]>> {
    let mut out = vec![SmallVec::new(); g.vertex_count() as usize];
    for leg in g.legs() {
        out[leg.vertex as usize - 1].push((leg.label.0 as u16) << 8 | leg.species.0 as u16);
    }
    for sig in &mut out {
        sig.sort_unstable();
    }
    out
}

type RowSeq = SmallVec<[u16; 8]>;

/// One row of the canonical encoding: the legs of the vertex placed at some
/// position, plus its edges back to already-placed positions.
#[derive(Clone, PartialEq, Eq)]
struct Row {
    legs: RowSeq,
    adj: RowSeq,
}

/// Sequence comparison where a longer sequence sorts before a shorter one
/// sharing its prefix.  This pulls loaded vertices to low indices, matching
/// the natural "least relabeling" on simple cases.
fn cmp_seq(a: &[u16], b: &[u16]) -> Ordering {
    let k = a.len().min(b.len());
    for i in 0..k {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    b.len().cmp(&a.len())
}

fn cmp_row(a: &Row, b: &Row) -> Ordering {
    cmp_seq(&a.legs, &b.legs).then_with(|| cmp_seq(&a.adj, &b.adj))
}

struct CanonSearch {
    v: usize,
    legs_by_old: Vec<RowSeq>,
    edges: Vec<(u8, u8, u8)>, // 0-based endpoints, species
    pos: Vec<u8>,             // old -> assigned position (1-based), 0 = unassigned
    order: Vec<u8>,           // positions filled so far, old indices
    rows: Vec<Row>,
    best_rows: Vec<Row>,
    best_perm: Vec<u8>,
    have_best: bool,
}

impl CanonSearch {
    fn new(g: &Graph) -> CanonSearch {
        let v = g.vertex_count() as usize;
        let legs_by_old = legs_by_vertex(g)
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect();
        let edges = g
            .edges()
            .map(|e| (e.a - 1, e.b - 1, e.species.0))
            .collect();
        CanonSearch {
            v,
            legs_by_old,
            edges,
            pos: vec![0; v],
            order: Vec::with_capacity(v),
            rows: Vec::with_capacity(v),
            best_rows: Vec::new(),
            best_perm: Vec::new(),
            have_best: false,
        }
    }

    fn make_row(&self, old: u8, position: u8) -> Row {
        let mut adj: RowSeq = SmallVec::new();
        for &(a, b, s) in &self.edges {
            if a == old && b == old {
                adj.push((position as u16) << 8 | s as u16);
            } else if a == old && self.pos[b as usize] != 0 {
                adj.push((self.pos[b as usize] as u16) << 8 | s as u16);
            } else if b == old && self.pos[a as usize] != 0 {
                adj.push((self.pos[a as usize] as u16) << 8 | s as u16);
            }
        }
        adj.sort_unstable();
        Row { legs: self.legs_by_old[old as usize].clone(), adj }
    }

    fn run(&mut self) {
        self.dfs(0);
    }

    /// Comparison of the current row prefix against the best encoding.  The
    /// best can change at any leaf below, so this is recomputed from the
    /// live `best_rows` instead of carried down the recursion.
    fn prefix_cmp(&self, depth: usize) -> Ordering {
        for d in 0..depth {
            match cmp_row(&self.rows[d], &self.best_rows[d]) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }

    fn dfs(&mut self, depth: usize) {
        if depth == self.v {
            if !self.have_best || self.prefix_cmp(depth) == Ordering::Less {
                self.best_rows = self.rows.clone();
                self.best_perm = self.order.clone();
                self.have_best = true;
            }
            return;
        }
        let mut cands: Vec<(Row, u8)> = (0..self.v as u8)
            .filter(|&u| self.pos[u as usize] == 0)
            .map(|u| (self.make_row(u, depth as u8 + 1), u))
            .collect();
        cands.sort_unstable_by(|x, y| cmp_row(&x.0, &y.0).then(x.1.cmp(&y.1)));
        for (row, u) in cands {
            if self.have_best {
                match self.prefix_cmp(depth) {
                    // a leaf below replaced the best; this prefix lost
                    Ordering::Greater => return,
                    Ordering::Equal => {
                        if cmp_row(&row, &self.best_rows[depth]) == Ordering::Greater {
                            // candidates ascend, the rest lose too
                            break;
                        }
                    }
                    Ordering::Less => {}
                }
            }
            self.pos[u as usize] = depth as u8 + 1;
            self.order.push(u);
            self.rows.push(row);
            self.dfs(depth + 1);
            self.rows.pop();
            self.order.pop();
            self.pos[u as usize] = 0;
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    fn component_count(&mut self) -> usize {
        let n = self.parent.len();
        (0..n).filter(|&x| self.find(x) == x).count()
    }
}

// ---------------------------------------------------------------------------
// JSON representation: {"v": int, "legs": [[vertex, label, species], ...],
// "edges": [[i, j, species], ...]} in canonical sort order.
// ---------------------------------------------------------------------------

impl Graph {
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let legs: Vec<serde_json::Value> = self
            .legs()
            .map(|l| json!([l.vertex, l.label.0, l.species.0]))
            .collect();
        let edges: Vec<serde_json::Value> = self
            .edges()
            .map(|e| json!([e.a, e.b, e.species.0]))
            .collect();
        json!({ "v": self.vertex_count(), "legs": legs, "edges": edges })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Graph> {
        let bad = |m: &str| Error::Parse(format!("graph JSON: {m}"));
        let obj = value.as_object().ok_or_else(|| bad("expected object"))?;
        let v = obj
            .get("v")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| bad("missing integer field `v`"))?;
        let triple = |x: &serde_json::Value, what: &str| -> Result<(u8, u8, u8)> {
            let arr = x.as_array().filter(|a| a.len() == 3).ok_or_else(|| {
                bad(&format!("{what} must be a [int, int, int] triple"))
            })?;
            let mut out = [0u8; 3];
            for (i, f) in arr.iter().enumerate() {
                let n = f
                    .as_u64()
                    .filter(|&n| n <= 255)
                    .ok_or_else(|| bad(&format!("{what} entry out of range")))?;
                out[i] = n as u8;
            }
            Ok((out[0], out[1], out[2]))
        };
        let mut legs = Vec::new();
        for x in obj.get("legs").and_then(|x| x.as_array()).into_iter().flatten() {
            let (vertex, label, species) = triple(x, "leg")?;
            legs.push(Leg::new(vertex, Label(label), Species(species)));
        }
        let mut edges = Vec::new();
        for x in obj.get("edges").and_then(|x| x.as_array()).into_iter().flatten() {
            let (a, b, species) = triple(x, "edge")?;
            edges.push(Edge::new(a, b, Species(species)));
        }
        Graph::new(v as u32, legs, edges)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Shorthand graph builder for tests: single-species unless stated.
    pub fn g(v: u32, legs: &[(u8, u8)], edges: &[(u8, u8)]) -> Graph {
        let legs = legs
            .iter()
            .map(|&(vx, l)| Leg::new(vx, Label(l), Species(1)))
            .collect();
        let edges = edges.iter().map(|&(a, b)| Edge::new(a, b, Species(1))).collect();
        Graph::new(v, legs, edges).unwrap()
    }

    /// Reference canonicalizer: exhaustive minimization over all v!
    /// relabelings under the same row encoding as the pruned search.
    pub fn canonical_unordered_naive(graph: &Graph) -> Graph {
        use itertools::Itertools;
        let v = graph.vertex_count() as usize;
        let mut best: Option<(Vec<Row>, Graph)> = None;
        for perm in (0..v as u8).permutations(v) {
            // perm[position] = old vertex index (0-based)
            let mut new_of = vec![0u8; v];
            for (depth, &old) in perm.iter().enumerate() {
                new_of[old as usize] = depth as u8 + 1;
            }
            let cand = graph.relabel_vertices(&new_of);
            let rows = encode_rows(&cand);
            let better = match &best {
                None => true,
                Some((brows, _)) => cmp_rows(&rows, brows) == Ordering::Less,
            };
            if better {
                best = Some((rows, cand));
            }
        }
        best.unwrap().1
    }

    fn encode_rows(g: &Graph) -> Vec<Row> {
        let legs = legs_by_vertex(g);
        let mut rows = Vec::new();
        for r in 1..=g.vertex_count() as u8 {
            let mut adj: RowSeq = SmallVec::new();
            for e in g.edges() {
                let hi = e.a.max(e.b);
                if hi == r {
                    let lo = e.a.min(e.b);
                    adj.push((lo as u16) << 8 | e.species.0 as u16);
                }
            }
            adj.sort_unstable();
            rows.push(Row {
                legs: legs[r as usize - 1].iter().copied().collect(),
                adj,
            });
        }
        rows
    }

    fn cmp_rows(a: &[Row], b: &[Row]) -> Ordering {
        for (x, y) in a.iter().zip(b) {
            match cmp_row(x, y) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }
}
