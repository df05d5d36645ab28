//! The two elementary operators of the recursion: attaching a self-loop at
//! a vertex, and splitting a vertex in two with a connecting edge.
//!
//! Both act linearly on graph sums and carry an overall factor 1/2 that
//! compensates the two half-edge orientations of the new edge.

use crate::graph::{Edge, Graph, Leg};
use crate::sum::{GraphSum, GraphSumBuilder};
use crate::weight::{rat, Rat};
use crate::{Error, Result};

/// Attaches a self-loop of every species at vertex `i`, weight times 1/2.
///
/// One input term of weight w yields m terms of weight w/2, where m is the
/// species count.  Adds one edge and one loop, leaves vertices and legs
/// unchanged.
pub fn apply_t(sum: &GraphSum, i: u8, species_count: u8) -> Result<GraphSum> {
    let mut b = GraphSumBuilder::with_capacity(sum.len() * species_count as usize);
    for (g, w) in sum.iter() {
        apply_t_into(g, w, i, species_count, &mut |g, w| b.push(g, w))?;
    }
    Ok(b.finish())
}

pub fn apply_t_into(
    g: &Graph,
    w: &Rat,
    i: u8,
    species_count: u8,
    out: &mut impl FnMut(Graph, Rat),
) -> Result<()> {
    let v = g.vertex_count();
    if i == 0 || i as u32 > v {
        return Err(Error::VertexOutOfRange { index: i as u32, v });
    }
    let half = w * rat(1, 2);
    let (_, legs, edges) = g.into_parts();
    for a in 1..=species_count {
        let mut e = edges.clone();
        e.push(Edge::new(i, i, crate::graph::Species(a)));
        out(Graph::new(v, legs.clone(), e)?, half.clone());
    }
    Ok(())
}

/// Splits vertex `i` into vertices `i` and `i+1` joined by a new edge of
/// every species, distributing the legs and edge end points attached at `i`
/// over the two halves in all ways, weight times 1/2.
///
/// A vertex of total degree d yields 2^d * m terms per input term (before
/// merging), each of weight w/2.  Vertices above `i` shift up by one.  Adds
/// one vertex and one edge, preserves the loop number, the leg multiset and
/// connectivity.
pub fn apply_q(sum: &GraphSum, i: u8, species_count: u8) -> Result<GraphSum> {
    let mut b = GraphSumBuilder::new();
    for (g, w) in sum.iter() {
        apply_q_into(g, w, i, species_count, &mut |g, w| b.push(g, w))?;
    }
    Ok(b.finish())
}

pub fn apply_q_into(
    g: &Graph,
    w: &Rat,
    i: u8,
    species_count: u8,
    out: &mut impl FnMut(Graph, Rat),
) -> Result<()> {
    let v = g.vertex_count();
    if i == 0 || i as u32 > v {
        return Err(Error::VertexOutOfRange { index: i as u32, v });
    }
    let half = w * rat(1, 2);
    let (_, legs, edges) = g.into_parts();
    let shift = |j: u8| if j > i { j + 1 } else { j };

    // Attachment slots at vertex i, in a fixed order: legs first (already
    // sorted), then edge end points (edges already sorted; a self-loop at i
    // contributes two slots).  Slot k of a leg or end point is resolved by
    // bit k of the mask: 0 keeps it at i, 1 moves it to i + 1.
    let leg_slots: Vec<usize> = legs
        .iter()
        .enumerate()
        .filter(|(_, l)| l.vertex == i)
        .map(|(k, _)| k)
        .collect();
    // (edge index, end point selector: 0 = a, 1 = b)
    let mut end_slots: Vec<(usize, u8)> = Vec::new();
    for (k, e) in edges.iter().enumerate() {
        if e.a == i {
            end_slots.push((k, 0));
        }
        if e.b == i {
            end_slots.push((k, 1));
        }
    }
    let d = leg_slots.len() + end_slots.len();
    debug_assert!(d < 64);

    for mask in 0u64..(1 << d) {
        let target = |slot: usize| if mask >> slot & 1 == 1 { i + 1 } else { i };
        let mut new_legs: Vec<Leg> = legs
            .iter()
            .map(|l| Leg { vertex: shift(l.vertex), ..*l })
            .collect();
        for (slot, &k) in leg_slots.iter().enumerate() {
            new_legs[k].vertex = target(slot);
        }
        // keep raw end point pairs until all slots are resolved; normalizing
        // early would swap a/b and detach slots from their end points
        let mut ends: Vec<(u8, u8)> = edges
            .iter()
            .map(|e| (shift(e.a), shift(e.b)))
            .collect();
        for (slot, &(k, which)) in end_slots.iter().enumerate() {
            let t = target(slot + leg_slots.len());
            if which == 0 {
                ends[k].0 = t;
            } else {
                ends[k].1 = t;
            }
        }
        let new_edges: Vec<Edge> = ends
            .iter()
            .zip(&edges)
            .map(|(&(a, b), e)| Edge::new(a, b, e.species))
            .collect();
        for a in 1..=species_count {
            let mut e = new_edges.clone();
            e.push(Edge::new(i, i + 1, crate::graph::Species(a)));
            out(Graph::new(v + 1, new_legs.clone(), e)?, half.clone());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::g;
    use crate::graph::Species;
    use crate::weight::rat_int;

    fn one(graph: Graph) -> GraphSum {
        GraphSum::singleton(graph, rat_int(1))
    }

    #[test]
    fn t_attaches_self_loop() {
        let s = apply_t(&one(g(1, &[], &[])), 1, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(&g(1, &[], &[(1, 1)])), Some(&rat(1, 2)));
    }

    #[test]
    fn t_species_expansion() {
        let s = apply_t(&one(g(1, &[], &[])), 1, 3).unwrap();
        assert_eq!(s.len(), 3);
        for a in 1..=3u8 {
            let loop_a = Graph::new(
                1,
                vec![],
                vec![Edge::new(1, 1, Species(a))],
            )
            .unwrap();
            assert_eq!(s.get(&loop_a), Some(&rat(1, 2)));
        }
    }

    #[test]
    fn q_splits_bare_vertex() {
        let s = apply_q(&one(g(1, &[], &[])), 1, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(&g(2, &[], &[(1, 2)])), Some(&rat(1, 2)));
    }

    #[test]
    fn q_distributes_a_leg() {
        let s = apply_q(&one(g(1, &[(1, 1)], &[])), 1, 1).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(&g(2, &[(1, 1)], &[(1, 2)])), Some(&rat(1, 2)));
        assert_eq!(s.get(&g(2, &[(2, 1)], &[(1, 2)])), Some(&rat(1, 2)));
    }

    #[test]
    fn q_distributes_self_loop_ends() {
        // self-loop at the split vertex: 4 assignments, two of which give
        // the same double edge, so terms merge to weight 1
        let s = apply_q(&one(g(1, &[], &[(1, 1)])), 1, 1).unwrap();
        assert_eq!(s.get(&g(2, &[], &[(1, 1), (1, 2)])), Some(&rat(1, 2)));
        assert_eq!(s.get(&g(2, &[], &[(1, 2), (2, 2)])), Some(&rat(1, 2)));
        assert_eq!(s.get(&g(2, &[], &[(1, 2), (1, 2)])), Some(&rat_int(1)));
        assert_eq!(s.total_weight(), rat_int(2));
    }

    #[test]
    fn q_shifts_higher_vertices() {
        // split vertex 1 of an edge 1-2: vertex 2 becomes 3
        let s = apply_q(&one(g(2, &[], &[(1, 2)])), 1, 1).unwrap();
        assert_eq!(s.get(&g(3, &[], &[(1, 2), (1, 3)])), Some(&rat(1, 2)));
        assert_eq!(s.get(&g(3, &[], &[(1, 2), (2, 3)])), Some(&rat(1, 2)));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn bookkeeping_deltas() {
        let samples = vec![
            g(1, &[(1, 1), (1, 2)], &[(1, 1)]),
            g(3, &[(2, 1)], &[(1, 2), (2, 3), (1, 3)]),
            g(2, &[], &[(1, 2), (1, 2)]),
        ];
        for sample in samples {
            let before = sample.stats();
            let v = sample.vertex_count() as u8;
            for i in 1..=v {
                for (graph, _) in apply_t(&one(sample.clone()), i, 2).unwrap().iter() {
                    let s = graph.stats();
                    assert_eq!(s.vertices, before.vertices);
                    assert_eq!(s.edges, before.edges + 1);
                    assert_eq!(s.legs, before.legs);
                    assert_eq!(s.loops, before.loops.map(|l| l + 1));
                }
                for (graph, _) in apply_q(&one(sample.clone()), i, 2).unwrap().iter() {
                    let s = graph.stats();
                    assert_eq!(s.vertices, before.vertices + 1);
                    assert_eq!(s.edges, before.edges + 1);
                    assert_eq!(s.legs, before.legs);
                    assert_eq!(s.loops, before.loops);
                    assert!(s.connected);
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range_vertex() {
        let s = one(g(1, &[], &[]));
        assert!(apply_t(&s, 2, 1).is_err());
        assert!(apply_q(&s, 0, 1).is_err());
    }
}
