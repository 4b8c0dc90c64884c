//! Exhaustive checks on small genus-0 graphs: composition of contractions,
//! pullback squares, and the decorated variant.

use std::collections::{BTreeMap, BTreeSet};

use taut0::graphs::*;

/// Every forest on `n` labeled vertices, with marking `v + 1` on vertex `v`
/// for the vertices selected by `tail_mask`.
fn forests(n: u32, tail_mask: u32) -> Vec<ModularGraph> {
    let pairs: Vec<(u32, u32)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for subset in 0u32..(1 << pairs.len()) {
        let edges: Vec<(u32, u32)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| subset & (1 << k) != 0)
            .map(|(_, &p)| p)
            .collect();
        let tails = (0..n).filter(|v| tail_mask & (1 << v) != 0).map(|v| (v + 1, v));
        let g = ModularGraph::new((0..n).map(|v| (v, 0)), edges, tails).unwrap();
        if g.is_forest() {
            out.push(g);
        }
    }
    out
}

fn small_forests() -> Vec<ModularGraph> {
    (1..=4).flat_map(|n| forests(n, 0b0101)).collect()
}

fn edge_subsets(g: &ModularGraph) -> Vec<BTreeSet<usize>> {
    let m = g.edges().len();
    (0u32..(1 << m))
        .map(|s| (0..m).filter(|k| s & (1 << k) != 0).collect())
        .collect()
}

fn vertex_subsets(g: &ModularGraph) -> Vec<BTreeSet<VertexId>> {
    let ids: Vec<VertexId> = g.vertex_ids().collect();
    (1u32..(1 << ids.len()))
        .map(|s| ids.iter().enumerate().filter(|(k, _)| s & (1 << k) != 0).map(|(_, &v)| v).collect())
        .collect()
}

#[test]
fn forest_count_on_four_vertices() {
    // labeled forests on 1..4 vertices: 1, 2, 7, 38
    let counts: Vec<usize> = (1..=4).map(|n| forests(n, 0).len()).collect();
    assert_eq!(counts, [1, 2, 7, 38]);
}

#[test]
fn composition_of_contractions_is_valid() {
    for g in small_forests() {
        for first in edge_subsets(&g) {
            let c1 = Contraction::contract_edges(&g, &first).unwrap();
            assert_eq!(validate_contraction(&c1), Ok(()));
            assert!(c1.target.is_genus_zero());
            for second in edge_subsets(&c1.target) {
                let c2 = Contraction::contract_edges(&c1.target, &second).unwrap();
                let composite = c1.then(&c2).unwrap();
                assert_eq!(validate_contraction(&composite), Ok(()));
                assert_eq!(composite.target.total_genus(), g.total_genus());
            }
        }
    }
}

#[test]
fn decorations_commute_with_composition() {
    for g in small_forests() {
        let alpha: BTreeMap<VertexId, i64> = g.vertex_ids().map(|v| (v, i64::from(v) * 3 - 2)).collect();
        let d = Decoration::new(g.clone(), alpha).unwrap();
        for first in edge_subsets(&g) {
            let c1 = Contraction::contract_edges(&g, &first).unwrap();
            let d1 = contract_decoration(&c1, &d).unwrap();
            assert_eq!(d1.total_degree(), d.total_degree());
            for second in edge_subsets(&c1.target) {
                let c2 = Contraction::contract_edges(&c1.target, &second).unwrap();
                let stepwise = contract_decoration(&c2, &d1).unwrap();
                let direct = contract_decoration(&c1.then(&c2).unwrap(), &d).unwrap();
                assert_eq!(stepwise, direct);
            }
        }
        let zero = Decoration::new(g.clone(), g.vertex_ids().map(|v| (v, 0)).collect()).unwrap();
        let all: BTreeSet<usize> = (0..g.edges().len()).collect();
        let c = Contraction::contract_edges(&g, &all).unwrap();
        assert!(contract_decoration(&c, &zero).unwrap().values().iter().all(|&a| a == 0));
    }
}

fn check_square(phi: &Contraction, a: &GraphInclusion, p: &Pullback) {
    assert_eq!(validate_contraction(&p.contraction), Ok(()));
    assert_eq!(validate_inclusion(&p.inclusion), Ok(()));
    for v in p.graph.vertex_ids() {
        let via_s3 = a.vertex_map[&p.contraction.vertex_map[&v]];
        let via_s2 = phi.vertex_map[&p.inclusion.vertex_map[&v]];
        assert_eq!(via_s3, via_s2);
    }
}

#[test]
fn pullback_squares_commute() {
    for g in small_forests() {
        for edges in edge_subsets(&g) {
            let phi = Contraction::contract_edges(&g, &edges).unwrap();
            for vs in vertex_subsets(&phi.target) {
                let a = GraphInclusion::induced(&phi.target, &vs).unwrap();
                assert_eq!(validate_inclusion(&a), Ok(()));
                let p = pullback(&phi, &a).unwrap();
                check_square(&phi, &a, &p);
            }
        }
    }
}

#[test]
fn pullback_along_identities() {
    for g in small_forests() {
        for edges in edge_subsets(&g) {
            let phi = Contraction::contract_edges(&g, &edges).unwrap();
            let p = pullback(&phi, &GraphInclusion::identity(&phi.target)).unwrap();
            assert_eq!(p.graph, g);
            assert_eq!(p.contraction, phi);
            assert_eq!(p.inclusion, GraphInclusion::identity(&g));
        }
        for vs in vertex_subsets(&g) {
            let a = GraphInclusion::induced(&g, &vs).unwrap();
            let p = pullback(&Contraction::identity(&g), &a).unwrap();
            assert!(p.graph.is_isomorphic(&a.source));
            assert_eq!(p.graph, a.source);
            assert_eq!(p.inclusion, a);
        }
    }
}

#[test]
fn pullback_along_a_composite_inclusion() {
    for g in small_forests() {
        for edges in edge_subsets(&g) {
            let phi = Contraction::contract_edges(&g, &edges).unwrap();
            for outer in vertex_subsets(&phi.target) {
                let b = GraphInclusion::induced(&phi.target, &outer).unwrap();
                for inner in vertex_subsets(&b.source) {
                    let a = GraphInclusion::induced(&b.source, &inner).unwrap();
                    let once = pullback(&phi, &a.then(&b).unwrap()).unwrap();
                    let first = pullback(&phi, &b).unwrap();
                    let twice = pullback(&first.contraction, &a).unwrap();
                    assert_eq!(twice.graph.canonical_form(None), once.graph.canonical_form(None));
                    assert_eq!(twice.inclusion.then(&first.inclusion).unwrap(), once.inclusion);
                    assert_eq!(twice.contraction, once.contraction);
                }
            }
        }
    }
}

#[test]
fn pullback_is_unique_up_to_relabeling() {
    // s2 a two-vertex tree over a point; any relabeling of s2 gives an
    // isomorphic square
    let s2 = ModularGraph::new([(0, 0), (1, 0)], [(0, 1)], [(1, 0), (2, 1)]).unwrap();
    let phi = Contraction::contract_edges(&s2, &BTreeSet::from([0])).unwrap();
    let a = GraphInclusion::identity(&phi.target);
    let reference = pullback(&phi, &a).unwrap();
    let forms: BTreeSet<CanonicalForm> = [(0u32, 1u32), (1, 0), (7, 3), (3, 7)]
        .iter()
        .map(|&(x, y)| {
            let relabel = BTreeMap::from([(0, x), (1, y)]);
            let g = ModularGraph::new(
                [(x, 0), (y, 0)],
                [(x, y)],
                [(1, relabel[&0]), (2, relabel[&1])],
            )
            .unwrap();
            let target = ModularGraph::new([(0, 0)], [], [(1, 0), (2, 0)]).unwrap();
            let phi = Contraction {
                source: g,
                target: target.clone(),
                vertex_map: BTreeMap::from([(x, 0), (y, 0)]),
                edge_map: vec![EdgeImage::Contracted],
            };
            assert_eq!(validate_contraction(&phi), Ok(()));
            let p = pullback(&phi, &GraphInclusion::identity(&target)).unwrap();
            p.graph.canonical_form(None)
        })
        .collect();
    assert_eq!(forms.len(), 1);
    assert!(forms.contains(&reference.graph.canonical_form(None)));
}

#[test]
fn liftings_match_stars_and_bars() {
    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    for n in 1..=4u32 {
        let g = &forests(n, 0)[0];
        for total in 0..=5i64 {
            let bounds = vec![(0, total); n as usize];
            let all = enumerate_liftings(g, total, &bounds).unwrap();
            assert_eq!(all.len() as u64, binom(total as u64 + u64::from(n) - 1, u64::from(n) - 1));
            let values: Vec<Vec<i64>> = all.iter().map(Decoration::values).collect();
            let mut sorted = values.clone();
            sorted.sort();
            assert_eq!(values, sorted);
            assert!(all.iter().all(|d| d.total_degree() == total));
        }
    }
}
