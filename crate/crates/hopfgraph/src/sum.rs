//! Finite linear combinations of graphs with exact rational weights.
//!
//! A [`GraphSum`] stores terms sorted by graph, with weights interned in a
//! small pool.  Intermediate sums produced by the generator share a handful
//! of distinct weight values (powers of 1/2 divided by small integers)
//! across tens of millions of terms, so interning keeps the per-term cost at
//! one graph plus a `u32`.

use std::collections::HashMap;

use num::Zero;

use crate::graph::Graph;
use crate::weight::{format_rat, parse_rat, Rat};
use crate::{Error, Result};

#[derive(Debug, Clone, Default)]
struct WeightPool {
    values: Vec<Rat>,
    index: HashMap<Rat, u32>,
}

impl WeightPool {
    fn intern(&mut self, w: Rat) -> u32 {
        if let Some(&id) = self.index.get(&w) {
            return id;
        }
        let id = self.values.len() as u32;
        self.values.push(w.clone());
        self.index.insert(w, id);
        id
    }
}

/// A linear combination of canonical graphs with nonzero rational weights,
/// sorted by graph.
#[derive(Debug, Clone, Default)]
pub struct GraphSum {
    terms: Vec<(Graph, u32)>,
    pool: WeightPool,
}

impl GraphSum {
    pub fn empty() -> GraphSum {
        GraphSum::default()
    }

    pub fn singleton(graph: Graph, weight: Rat) -> GraphSum {
        let mut b = GraphSumBuilder::new();
        b.push(graph, weight);
        b.finish()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Graph, &Rat)> + '_ {
        self.terms
            .iter()
            .map(|(g, id)| (g, &self.pool.values[*id as usize]))
    }

    /// Weight of a specific graph, if present.
    pub fn get(&self, graph: &Graph) -> Option<&Rat> {
        self.terms
            .binary_search_by(|(g, _)| g.cmp(graph))
            .ok()
            .map(|i| &self.pool.values[self.terms[i].1 as usize])
    }

    pub fn total_weight(&self) -> Rat {
        let mut acc = Rat::zero();
        for (_, w) in self.iter() {
            acc += w;
        }
        acc
    }

    pub fn add(&self, other: &GraphSum) -> GraphSum {
        let mut b = GraphSumBuilder::with_capacity(self.len() + other.len());
        for (g, w) in self.iter() {
            b.push(g.clone(), w.clone());
        }
        for (g, w) in other.iter() {
            b.push(g.clone(), w.clone());
        }
        b.finish()
    }

    pub fn scale(&self, factor: &Rat) -> GraphSum {
        if factor.is_zero() {
            return GraphSum::empty();
        }
        let mut out = self.clone();
        out.pool.index.clear();
        for (id, w) in out.pool.values.iter_mut().enumerate() {
            *w *= factor;
            out.pool.index.insert(w.clone(), id as u32);
        }
        out
    }

    /// Applies an injective label substitution `map[old] = new` to every
    /// external leg (0 entries mean "keep").  Species are untouched.
    pub fn substitute_labels(&self, map: &[u8; 256]) -> GraphSum {
        let mut b = GraphSumBuilder::with_capacity(self.len());
        for (g, w) in self.iter() {
            let (v, legs, edges) = g.into_parts();
            let legs = legs
                .into_iter()
                .map(|mut l| {
                    let m = map[l.label.0 as usize];
                    if m != 0 {
                        l.label.0 = m;
                    }
                    l
                })
                .collect();
            let g = Graph::new(v, legs, edges).expect("substitution preserves validity");
            b.push(g.clone(), w.clone());
        }
        b.finish()
    }

    /// Replaces every graph by its canonical unordered representative and
    /// merges the weights, passing from the vertex-ordered sum to the sum
    /// over plain graphs.
    pub fn forget_order(&self) -> GraphSum {
        self.forget_order_threaded(1)
    }

    /// `forget_order` with the canonicalization work split over `threads`
    /// worker threads.  The merge is a sort, so the result is identical to
    /// the serial one.
    pub fn forget_order_threaded(&self, threads: usize) -> GraphSum {
        let threads = threads.max(1).min(self.terms.len().max(1));
        let mut b = GraphSumBuilder::with_capacity(self.len());
        if threads == 1 {
            for (g, w) in self.iter() {
                b.push(g.canonical_unordered(), w.clone());
            }
            return b.finish();
        }
        let chunk = self.terms.len().div_ceil(threads);
        let results: Vec<Vec<(Graph, u32)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = self
                .terms
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|(g, id)| (g.canonical_unordered(), *id))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for part in results {
            for (g, id) in part {
                b.push(g, self.pool.values[id as usize].clone());
            }
        }
        b.finish()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .iter()
            .map(|(g, w)| {
                serde_json::json!({ "graph": g.to_json(), "weight": format_rat(w) })
            })
            .collect();
        serde_json::json!({ "terms": terms })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<GraphSum> {
        let terms = value
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Parse("graph sum JSON: missing `terms` array".into()))?;
        let mut b = GraphSumBuilder::with_capacity(terms.len());
        for t in terms {
            let g = Graph::from_json(
                t.get("graph")
                    .ok_or_else(|| Error::Parse("graph sum JSON: term without `graph`".into()))?,
            )?;
            let w = t
                .get("weight")
                .and_then(|w| w.as_str())
                .ok_or_else(|| Error::Parse("graph sum JSON: term without `weight`".into()))?;
            b.push(g, parse_rat(w)?);
        }
        Ok(b.finish())
    }
}

/// Semantic equality: same graphs with the same weights, regardless of pool
/// layout.
impl PartialEq for GraphSum {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .iter()
                .zip(other.iter())
                .all(|((g1, w1), (g2, w2))| g1 == g2 && w1 == w2)
    }
}

impl Eq for GraphSum {}

/// Accumulates (graph, weight) pairs, then sorts, merges duplicates and
/// drops zero totals in one pass.
#[derive(Debug, Default)]
pub struct GraphSumBuilder {
    raw: Vec<(Graph, u32)>,
    pool: WeightPool,
}

impl GraphSumBuilder {
    pub fn new() -> GraphSumBuilder {
        GraphSumBuilder::default()
    }

    pub fn with_capacity(n: usize) -> GraphSumBuilder {
        GraphSumBuilder { raw: Vec::with_capacity(n), pool: WeightPool::default() }
    }

    pub fn push(&mut self, graph: Graph, weight: Rat) {
        let id = self.pool.intern(weight);
        self.raw.push((graph, id));
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Sorts and merges duplicates in place, dropping zero totals.  Safe to
    /// call any number of times; streaming producers use it to keep the
    /// scratch vector bounded.
    pub fn compact(&mut self) {
        self.raw.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut write = 0;
        let mut read = 0;
        while read < self.raw.len() {
            let mut j = read + 1;
            let mut total = self.pool.values[self.raw[read].1 as usize].clone();
            while j < self.raw.len() && self.raw[j].0 == self.raw[read].0 {
                total += &self.pool.values[self.raw[j].1 as usize];
                j += 1;
            }
            if !total.is_zero() {
                let id = self.pool.intern(total);
                self.raw.swap(write, read);
                self.raw[write].1 = id;
                write += 1;
            }
            read = j;
        }
        self.raw.truncate(write);
    }

    pub fn finish(mut self) -> GraphSum {
        self.compact();
        let GraphSumBuilder { raw, pool } = self;
        let mut out = GraphSum::default();
        out.terms.reserve_exact(raw.len());
        for (g, id) in raw {
            let nid = out.pool.intern(pool.values[id as usize].clone());
            out.terms.push((g, nid));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::g;
    use crate::weight::{rat, rat_int};

    #[test]
    fn merges_and_prunes() {
        let mut b = GraphSumBuilder::new();
        b.push(g(2, &[], &[(1, 2)]), rat(1, 2));
        b.push(g(2, &[], &[(1, 2)]), rat(1, 3));
        b.push(g(1, &[], &[(1, 1)]), rat(1, 2));
        b.push(g(1, &[], &[(1, 1)]), rat(-1, 2));
        let s = b.finish();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(&g(2, &[], &[(1, 2)])), Some(&rat(5, 6)));
        assert_eq!(s.get(&g(1, &[], &[(1, 1)])), None);
        assert_eq!(s.total_weight(), rat(5, 6));
    }

    #[test]
    fn add_and_scale() {
        let a = GraphSum::singleton(g(1, &[], &[(1, 1)]), rat(1, 2));
        let b = GraphSum::singleton(g(2, &[], &[(1, 2)]), rat_int(1));
        let s = a.add(&b).scale(&rat_int(2));
        assert_eq!(s.get(&g(1, &[], &[(1, 1)])), Some(&rat_int(1)));
        assert_eq!(s.get(&g(2, &[], &[(1, 2)])), Some(&rat_int(2)));
        assert!(s.scale(&Rat::zero()).is_empty());
    }

    #[test]
    fn forget_order_merges_orbit() {
        // self-loop at vertex 1 or at vertex 2: same unordered graph
        let mut b = GraphSumBuilder::new();
        b.push(g(2, &[], &[(1, 1), (1, 2)]), rat(1, 4));
        b.push(g(2, &[], &[(2, 2), (1, 2)]), rat(1, 4));
        let s = b.finish();
        let f = s.forget_order();
        assert_eq!(f.len(), 1);
        assert_eq!(f.total_weight(), rat(1, 2));
        assert_eq!(f, s.forget_order_threaded(3));
    }

    #[test]
    fn substitute_labels_resorts() {
        let s = GraphSum::singleton(g(2, &[(1, 1), (2, 2)], &[(1, 2)]), rat_int(1));
        let mut map = [0u8; 256];
        map[1] = 5;
        map[2] = 3;
        let t = s.substitute_labels(&map);
        assert_eq!(t.get(&g(2, &[(1, 5), (2, 3)], &[(1, 2)])), Some(&rat_int(1)));
    }

    #[test]
    fn json_round_trip() {
        let mut b = GraphSumBuilder::new();
        b.push(g(2, &[(1, 1)], &[(1, 2), (1, 2)]), rat(1, 4));
        b.push(g(1, &[], &[(1, 1)]), rat(1, 2));
        let s = b.finish();
        assert_eq!(GraphSum::from_json(&s.to_json()).unwrap(), s);
    }
}
