//! Modular graphs (dual graphs of nodal curves), contractions and graph
//! inclusions between them, pullback squares, and integer decorations.
//!
//! Vertices carry stable integer ids; edges are identified by their position
//! in the edge list; tails carry globally distinct marking labels.
//!
//! Text format, one item per line (`#` starts a comment):
//!
//! ```text
//! v 0 g=0 a=2
//! v 1 g=0 a=3
//! e 0 1
//! t 0 m=1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub type VertexId = u32;

/// Malformed input: dangling references, duplicate labels, mismatched
/// domains, unparsable text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate vertex {0}")]
    DuplicateVertex(VertexId),

    #[error("duplicate marking {0}")]
    DuplicateMarking(u32),

    #[error("marking labels must be positive")]
    ZeroMarking,

    #[error("{0} refers to missing vertex {1}")]
    MissingVertex(String, VertexId),

    #[error("{0} refers to missing edge {1}")]
    MissingEdge(String, usize),

    #[error("map is not defined on {0}")]
    Undefined(String),

    #[error("domain mismatch: {0}")]
    Mismatch(String),

    #[error("bounds list has {found} entries for {expected} vertices")]
    BoundsLength { expected: usize, found: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type GraphResult<T> = std::result::Result<T, GraphError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularGraph {
    vertices: BTreeMap<VertexId, u32>,
    edges: Vec<(VertexId, VertexId)>,
    tails: BTreeMap<u32, VertexId>,
}

impl ModularGraph {
    /// `vertices` are `(id, genus)`; `tails` are `(marking, vertex)`.
    pub fn new(
        vertices: impl IntoIterator<Item = (VertexId, u32)>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        tails: impl IntoIterator<Item = (u32, VertexId)>,
    ) -> GraphResult<Self> {
        let mut vmap = BTreeMap::new();
        for (v, g) in vertices {
            if vmap.insert(v, g).is_some() {
                return Err(GraphError::DuplicateVertex(v));
            }
        }
        let edges: Vec<_> = edges.into_iter().collect();
        for (k, &(a, b)) in edges.iter().enumerate() {
            for v in [a, b] {
                if !vmap.contains_key(&v) {
                    return Err(GraphError::MissingVertex(format!("edge {k}"), v));
                }
            }
        }
        let mut tmap = BTreeMap::new();
        for (m, v) in tails {
            if m == 0 {
                return Err(GraphError::ZeroMarking);
            }
            if !vmap.contains_key(&v) {
                return Err(GraphError::MissingVertex(format!("tail {m}"), v));
            }
            if tmap.insert(m, v).is_some() {
                return Err(GraphError::DuplicateMarking(m));
            }
        }
        Ok(ModularGraph {
            vertices: vmap,
            edges,
            tails: tmap,
        })
    }

    /// A single genus-`g` vertex with id 0 and no edges or tails.
    pub fn point(g: u32) -> Self {
        ModularGraph {
            vertices: BTreeMap::from([(0, g)]),
            edges: Vec::new(),
            tails: BTreeMap::new(),
        }
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn genus(&self, v: VertexId) -> Option<u32> {
        self.vertices.get(&v).copied()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn tails(&self) -> &BTreeMap<u32, VertexId> {
        &self.tails
    }

    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.vertex_ids());
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        uf.count()
    }

    /// First Betti number `E - V + components`.
    pub fn betti_number(&self) -> usize {
        self.edges.len() + self.components() - self.vertices.len()
    }

    pub fn total_genus(&self) -> u64 {
        self.vertices.values().map(|&g| u64::from(g)).sum::<u64>() + self.betti_number() as u64
    }

    pub fn is_forest(&self) -> bool {
        self.betti_number() == 0
    }

    /// Admissible in genus 0: every vertex has genus 0 and there are no cycles.
    pub fn is_genus_zero(&self) -> bool {
        self.is_forest() && self.vertices.values().all(|&g| g == 0)
    }

    /// Isomorphism invariant of the graph (with an optional decoration).
    pub fn canonical_form(&self, alpha: Option<&BTreeMap<VertexId, i64>>) -> CanonicalForm {
        let ids: Vec<VertexId> = self.vertex_ids().collect();
        let mut best: Option<CanonicalForm> = None;
        permutations(ids.len(), &mut |perm| {
            let pos: BTreeMap<VertexId, usize> = ids.iter().zip(perm).map(|(&v, &p)| (v, p)).collect();
            let mut labels = vec![(0u32, None); ids.len()];
            for &v in &ids {
                labels[pos[&v]] = (self.vertices[&v], alpha.map(|a| a.get(&v).copied().unwrap_or(0)));
            }
            let mut edges: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (pos[&a], pos[&b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            edges.sort();
            let tails = self.tails.iter().map(|(&m, v)| (m, pos[v])).collect();
            let form = CanonicalForm { labels, edges, tails };
            if best.as_ref().is_none_or(|b| form < *b) {
                best = Some(form);
            }
        });
        best.unwrap_or_default()
    }

    pub fn is_isomorphic(&self, other: &ModularGraph) -> bool {
        self.vertex_count() == other.vertex_count()
            && self.edges.len() == other.edges.len()
            && self.canonical_form(None) == other.canonical_form(None)
    }

    /// Renders in the line format, with `a=` fields when `alpha` is given.
    pub fn to_text(&self, alpha: Option<&BTreeMap<VertexId, i64>>) -> String {
        let mut out = String::new();
        for (&v, &g) in &self.vertices {
            out.push_str(&format!("v {v} g={g}"));
            if let Some(a) = alpha {
                out.push_str(&format!(" a={}", a.get(&v).copied().unwrap_or(0)));
            }
            out.push('\n');
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("e {a} {b}\n"));
        }
        for (&m, &v) in &self.tails {
            out.push_str(&format!("t {v} m={m}\n"));
        }
        out
    }
}

impl fmt::Display for ModularGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(None))
    }
}

/// Vertex labels, sorted edges and tails under the lexicographically least
/// relabeling of the vertices by `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub labels: Vec<(u32, Option<i64>)>,
    pub edges: Vec<(usize, usize)>,
    pub tails: Vec<(u32, usize)>,
}

fn permutations(n: usize, visit: &mut dyn FnMut(&[usize])) {
    fn go(k: usize, perm: &mut Vec<usize>, used: &mut Vec<bool>, visit: &mut dyn FnMut(&[usize])) {
        if k == perm.len() {
            visit(perm);
            return;
        }
        for p in 0..perm.len() {
            if !used[p] {
                used[p] = true;
                perm[k] = p;
                go(k + 1, perm, used, visit);
                used[p] = false;
            }
        }
    }
    let mut perm = vec![0; n];
    let mut used = vec![false; n];
    go(0, &mut perm, &mut used, visit);
}

struct UnionFind {
    parent: BTreeMap<VertexId, VertexId>,
}

impl UnionFind {
    fn new(ids: impl Iterator<Item = VertexId>) -> Self {
        UnionFind {
            parent: ids.map(|v| (v, v)).collect(),
        }
    }

    fn find(&mut self, v: VertexId) -> VertexId {
        let p = self.parent[&v];
        if p == v {
            return v;
        }
        let root = self.find(p);
        self.parent.insert(v, root);
        root
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: VertexId, b: VertexId) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent.insert(hi, lo);
        true
    }

    fn count(&mut self) -> usize {
        let ids: Vec<VertexId> = self.parent.keys().copied().collect();
        ids.into_iter().filter(|&v| self.find(v) == v).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeImage {
    Contracted,
    Edge(usize),
}

/// A contraction `source -> target`; markings are preserved by label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub source: ModularGraph,
    pub target: ModularGraph,
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: Vec<EdgeImage>,
}

/// The first contraction clause that fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("surjectivity: target vertex {0} has no preimage")]
    NotSurjective(VertexId),

    #[error("incidence: contracted edge {0} joins vertices with different images")]
    ContractedAcross(usize),

    #[error("incidence: edge {0} does not map onto the endpoints of its image")]
    Incidence(usize),

    #[error("bijection: target edge {0} is hit {1} times")]
    EdgeBijection(usize, usize),

    #[error("tails: marking {0} is not carried to its target vertex")]
    Tail(u32),

    #[error("connectivity: the preimage of vertex {0} is disconnected")]
    DisconnectedFiber(VertexId),

    #[error("genus additivity at vertex {vertex}: expected {expected}, target has {found}")]
    Genus { vertex: VertexId, expected: u64, found: u32 },

    #[error("injectivity: {0}")]
    NotInjective(String),
}

/// Validation outcome: a malformed map or a violated invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Invalid {
    #[error("structural error: {0}")]
    Structural(#[from] GraphError),

    #[error("{0}")]
    Violation(#[from] Violation),
}

impl Invalid {
    pub fn is_structural(&self) -> bool {
        matches!(self, Invalid::Structural(_))
    }
}

/// Checks every contraction clause in order: surjectivity, incidence,
/// bijection on surviving edges, tails, connected fibers, genus.
pub fn validate_contraction(c: &Contraction) -> Result<(), Invalid> {
    let (s, t) = (&c.source, &c.target);
    for v in s.vertex_ids() {
        let image = *c
            .vertex_map
            .get(&v)
            .ok_or_else(|| GraphError::Undefined(format!("source vertex {v}")))?;
        if !t.has_vertex(image) {
            return Err(GraphError::MissingVertex(format!("image of vertex {v}"), image).into());
        }
    }
    if let Some(extra) = c.vertex_map.keys().find(|v| !s.has_vertex(**v)) {
        return Err(GraphError::MissingVertex("vertex map".to_string(), *extra).into());
    }
    if c.edge_map.len() != s.edges().len() {
        return Err(GraphError::Mismatch(format!(
            "edge map has {} entries for {} source edges",
            c.edge_map.len(),
            s.edges().len()
        ))
        .into());
    }
    for (k, img) in c.edge_map.iter().enumerate() {
        if let EdgeImage::Edge(j) = img {
            if *j >= t.edges().len() {
                return Err(GraphError::MissingEdge(format!("image of edge {k}"), *j).into());
            }
        }
    }

    let images: BTreeSet<VertexId> = c.vertex_map.values().copied().collect();
    if let Some(v) = t.vertex_ids().find(|v| !images.contains(v)) {
        return Err(Violation::NotSurjective(v).into());
    }
    for (k, (&(a, b), img)) in s.edges().iter().zip(&c.edge_map).enumerate() {
        let (fa, fb) = (c.vertex_map[&a], c.vertex_map[&b]);
        match img {
            EdgeImage::Contracted if fa != fb => return Err(Violation::ContractedAcross(k).into()),
            EdgeImage::Contracted => {}
            EdgeImage::Edge(j) => {
                let (x, y) = t.edges()[*j];
                if !((fa, fb) == (x, y) || (fa, fb) == (y, x)) {
                    return Err(Violation::Incidence(k).into());
                }
            }
        }
    }
    let mut hits = vec![0usize; t.edges().len()];
    for img in &c.edge_map {
        if let EdgeImage::Edge(j) = img {
            hits[*j] += 1;
        }
    }
    if let Some((j, &h)) = hits.iter().enumerate().find(|(_, &h)| h != 1) {
        return Err(Violation::EdgeBijection(j, h).into());
    }
    let markings: BTreeSet<u32> = s.tails().keys().chain(t.tails().keys()).copied().collect();
    for m in markings {
        let ok = match (s.tails().get(&m), t.tails().get(&m)) {
            (Some(v), Some(w)) => c.vertex_map[v] == *w,
            _ => false,
        };
        if !ok {
            return Err(Violation::Tail(m).into());
        }
    }

    let mut uf = UnionFind::new(s.vertex_ids());
    let mut cycles: BTreeMap<VertexId, u64> = BTreeMap::new();
    for (&(a, b), img) in s.edges().iter().zip(&c.edge_map) {
        if *img == EdgeImage::Contracted && !uf.union(a, b) {
            *cycles.entry(c.vertex_map[&a]).or_default() += 1;
        }
    }
    for v in t.vertex_ids() {
        let fiber: Vec<VertexId> = s.vertex_ids().filter(|w| c.vertex_map[w] == v).collect();
        let roots: BTreeSet<VertexId> = fiber.iter().map(|&w| uf.find(w)).collect();
        if roots.len() != 1 {
            return Err(Violation::DisconnectedFiber(v).into());
        }
        let expected = fiber.iter().map(|w| u64::from(s.genus(*w).unwrap_or(0))).sum::<u64>()
            + cycles.get(&v).copied().unwrap_or(0);
        let found = t.genus(v).unwrap_or(0);
        if expected != u64::from(found) {
            return Err(Violation::Genus { vertex: v, expected, found }.into());
        }
    }
    Ok(())
}

impl Contraction {
    pub fn identity(g: &ModularGraph) -> Self {
        Contraction {
            source: g.clone(),
            target: g.clone(),
            vertex_map: g.vertex_ids().map(|v| (v, v)).collect(),
            edge_map: (0..g.edges().len()).map(EdgeImage::Edge).collect(),
        }
    }

    /// Contracts the given edges. Each target vertex takes the least id of
    /// its fiber; surviving edges keep their relative order.
    pub fn contract_edges(g: &ModularGraph, edges: &BTreeSet<usize>) -> GraphResult<Self> {
        if let Some(&k) = edges.iter().find(|&&k| k >= g.edges().len()) {
            return Err(GraphError::MissingEdge("contraction".to_string(), k));
        }
        let mut uf = UnionFind::new(g.vertex_ids());
        let mut cycles: BTreeMap<VertexId, u32> = BTreeMap::new();
        let mut cyclic_edges = Vec::new();
        for &k in edges {
            let (a, b) = g.edges()[k];
            if !uf.union(a, b) {
                cyclic_edges.push(a);
            }
        }
        for a in cyclic_edges {
            *cycles.entry(uf.find(a)).or_default() += 1;
        }
        let vertex_map: BTreeMap<VertexId, VertexId> = g.vertex_ids().map(|v| (v, uf.find(v))).collect();
        let mut genus: BTreeMap<VertexId, u32> = BTreeMap::new();
        for (v, root) in &vertex_map {
            *genus.entry(*root).or_default() += g.genus(*v).unwrap_or(0);
        }
        for (root, n) in cycles {
            *genus.entry(root).or_default() += n;
        }
        let mut target_edges = Vec::new();
        let mut edge_map = Vec::new();
        for (k, &(a, b)) in g.edges().iter().enumerate() {
            if edges.contains(&k) {
                edge_map.push(EdgeImage::Contracted);
            } else {
                edge_map.push(EdgeImage::Edge(target_edges.len()));
                target_edges.push((vertex_map[&a], vertex_map[&b]));
            }
        }
        let tails: Vec<(u32, VertexId)> = g.tails().iter().map(|(&m, v)| (m, vertex_map[v])).collect();
        let target = ModularGraph::new(genus, target_edges, tails)?;
        Ok(Contraction {
            source: g.clone(),
            target,
            vertex_map,
            edge_map,
        })
    }

    /// `next . self`.
    pub fn then(&self, next: &Contraction) -> GraphResult<Contraction> {
        if self.target != next.source {
            return Err(GraphError::Mismatch("composed contractions do not meet".to_string()));
        }
        let vertex_map = self
            .vertex_map
            .iter()
            .map(|(&v, w)| {
                next.vertex_map
                    .get(w)
                    .map(|&x| (v, x))
                    .ok_or_else(|| GraphError::Undefined(format!("vertex {w}")))
            })
            .collect::<GraphResult<_>>()?;
        let edge_map = self
            .edge_map
            .iter()
            .map(|img| match img {
                EdgeImage::Contracted => Ok(EdgeImage::Contracted),
                EdgeImage::Edge(j) => next
                    .edge_map
                    .get(*j)
                    .copied()
                    .ok_or_else(|| GraphError::Undefined(format!("edge {j}"))),
            })
            .collect::<GraphResult<_>>()?;
        Ok(Contraction {
            source: self.source.clone(),
            target: next.target.clone(),
            vertex_map,
            edge_map,
        })
    }
}

/// `source` realized as a subgraph of `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphInclusion {
    pub source: ModularGraph,
    pub target: ModularGraph,
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: Vec<usize>,
}

pub fn validate_inclusion(a: &GraphInclusion) -> Result<(), Invalid> {
    let (s, t) = (&a.source, &a.target);
    for v in s.vertex_ids() {
        let image = *a
            .vertex_map
            .get(&v)
            .ok_or_else(|| GraphError::Undefined(format!("source vertex {v}")))?;
        if !t.has_vertex(image) {
            return Err(GraphError::MissingVertex(format!("image of vertex {v}"), image).into());
        }
    }
    if a.edge_map.len() != s.edges().len() {
        return Err(GraphError::Mismatch("edge map length differs from source edges".to_string()).into());
    }
    if let Some((k, &j)) = a.edge_map.iter().enumerate().find(|(_, &j)| j >= t.edges().len()) {
        return Err(GraphError::MissingEdge(format!("image of edge {k}"), j).into());
    }
    let vimages: BTreeSet<VertexId> = a.vertex_map.values().copied().collect();
    if vimages.len() != a.vertex_map.len() {
        return Err(Violation::NotInjective("vertices".to_string()).into());
    }
    let eimages: BTreeSet<usize> = a.edge_map.iter().copied().collect();
    if eimages.len() != a.edge_map.len() {
        return Err(Violation::NotInjective("edges".to_string()).into());
    }
    for v in s.vertex_ids() {
        let w = a.vertex_map[&v];
        if s.genus(v) != t.genus(w) {
            return Err(Violation::Genus {
                vertex: w,
                expected: u64::from(s.genus(v).unwrap_or(0)),
                found: t.genus(w).unwrap_or(0),
            }
            .into());
        }
    }
    for (k, (&(x, y), &j)) in s.edges().iter().zip(&a.edge_map).enumerate() {
        let (fx, fy) = (a.vertex_map[&x], a.vertex_map[&y]);
        let (p, q) = t.edges()[j];
        if !((fx, fy) == (p, q) || (fx, fy) == (q, p)) {
            return Err(Violation::Incidence(k).into());
        }
    }
    for (m, v) in s.tails() {
        if t.tails().get(m) != Some(&a.vertex_map[v]) {
            return Err(Violation::Tail(*m).into());
        }
    }
    Ok(())
}

impl GraphInclusion {
    pub fn identity(g: &ModularGraph) -> Self {
        GraphInclusion {
            source: g.clone(),
            target: g.clone(),
            vertex_map: g.vertex_ids().map(|v| (v, v)).collect(),
            edge_map: (0..g.edges().len()).collect(),
        }
    }

    /// The subgraph on the given vertices: every edge between them, every
    /// tail on them; ids are kept.
    pub fn induced(g: &ModularGraph, vertices: &BTreeSet<VertexId>) -> GraphResult<Self> {
        if let Some(v) = vertices.iter().find(|v| !g.has_vertex(**v)) {
            return Err(GraphError::MissingVertex("induced subgraph".to_string(), *v));
        }
        let mut edges = Vec::new();
        let mut edge_map = Vec::new();
        for (k, &(a, b)) in g.edges().iter().enumerate() {
            if vertices.contains(&a) && vertices.contains(&b) {
                edges.push((a, b));
                edge_map.push(k);
            }
        }
        let source = ModularGraph::new(
            vertices.iter().map(|&v| (v, g.genus(v).unwrap_or(0))),
            edges,
            g.tails().iter().filter(|(_, v)| vertices.contains(v)).map(|(&m, &v)| (m, v)),
        )?;
        Ok(GraphInclusion {
            source,
            target: g.clone(),
            vertex_map: vertices.iter().map(|&v| (v, v)).collect(),
            edge_map,
        })
    }

    /// `next . self`.
    pub fn then(&self, next: &GraphInclusion) -> GraphResult<GraphInclusion> {
        if self.target != next.source {
            return Err(GraphError::Mismatch("composed inclusions do not meet".to_string()));
        }
        let vertex_map = self
            .vertex_map
            .iter()
            .map(|(&v, w)| {
                next.vertex_map
                    .get(w)
                    .map(|&x| (v, x))
                    .ok_or_else(|| GraphError::Undefined(format!("vertex {w}")))
            })
            .collect::<GraphResult<_>>()?;
        let edge_map = self
            .edge_map
            .iter()
            .map(|j| next.edge_map.get(*j).copied().ok_or_else(|| GraphError::Undefined(format!("edge {j}"))))
            .collect::<GraphResult<_>>()?;
        Ok(GraphInclusion {
            source: self.source.clone(),
            target: next.target.clone(),
            vertex_map,
            edge_map,
        })
    }
}

/// The square over `phi: s2 -> s1` and `a: s3 -> s1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pullback {
    /// `s4`, the full preimage of `a(s3)` in `s2`, keeping `s2`'s ids.
    pub graph: ModularGraph,
    /// `a^* phi: s4 -> s3`.
    pub contraction: Contraction,
    /// `phi^* a: s4 -> s2`.
    pub inclusion: GraphInclusion,
}

pub fn pullback(phi: &Contraction, a: &GraphInclusion) -> GraphResult<Pullback> {
    if phi.target != a.target {
        return Err(GraphError::Mismatch("contraction and inclusion have different codomains".to_string()));
    }
    let inverse_v: BTreeMap<VertexId, VertexId> = a.vertex_map.iter().map(|(&u, &w)| (w, u)).collect();
    let inverse_e: BTreeMap<usize, usize> = a.edge_map.iter().enumerate().map(|(k, &j)| (j, k)).collect();
    let s2 = &phi.source;
    let image = |v: VertexId| {
        phi.vertex_map
            .get(&v)
            .copied()
            .ok_or_else(|| GraphError::Undefined(format!("vertex {v}")))
    };
    let mut vertices = BTreeSet::new();
    for v in s2.vertex_ids() {
        if inverse_v.contains_key(&image(v)?) {
            vertices.insert(v);
        }
    }
    let mut edges = Vec::new();
    let mut inc_edges = Vec::new();
    let mut con_edges = Vec::new();
    for (k, &(x, y)) in s2.edges().iter().enumerate() {
        if !(vertices.contains(&x) && vertices.contains(&y)) {
            continue;
        }
        let img = *phi
            .edge_map
            .get(k)
            .ok_or_else(|| GraphError::Undefined(format!("edge {k}")))?;
        let lifted = match img {
            EdgeImage::Contracted => EdgeImage::Contracted,
            EdgeImage::Edge(j) => match inverse_e.get(&j) {
                Some(&e3) => EdgeImage::Edge(e3),
                None => continue,
            },
        };
        edges.push((x, y));
        inc_edges.push(k);
        con_edges.push(lifted);
    }
    let tails: Vec<(u32, VertexId)> = s2
        .tails()
        .iter()
        .filter(|(m, v)| vertices.contains(v) && a.source.tails().contains_key(m))
        .map(|(&m, &v)| (m, v))
        .collect();
    let s4 = ModularGraph::new(
        vertices.iter().map(|&v| (v, s2.genus(v).unwrap_or(0))),
        edges,
        tails,
    )?;
    let mut down = BTreeMap::new();
    for &v in &vertices {
        down.insert(v, inverse_v[&image(v)?]);
    }
    Ok(Pullback {
        graph: s4.clone(),
        contraction: Contraction {
            source: s4.clone(),
            target: a.source.clone(),
            vertex_map: down,
            edge_map: con_edges,
        },
        inclusion: GraphInclusion {
            source: s4,
            target: s2.clone(),
            vertex_map: vertices.iter().map(|&v| (v, v)).collect(),
            edge_map: inc_edges,
        },
    })
}

/// An integer-valued vertex function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoration {
    pub graph: ModularGraph,
    pub alpha: BTreeMap<VertexId, i64>,
}

impl Decoration {
    pub fn new(graph: ModularGraph, alpha: BTreeMap<VertexId, i64>) -> GraphResult<Self> {
        let domain: BTreeSet<VertexId> = graph.vertex_ids().collect();
        let keys: BTreeSet<VertexId> = alpha.keys().copied().collect();
        if domain != keys {
            return Err(GraphError::Mismatch("decoration domain differs from the vertex set".to_string()));
        }
        Ok(Decoration { graph, alpha })
    }

    pub fn total_degree(&self) -> i64 {
        self.alpha.values().sum()
    }

    /// Values in vertex-id order.
    pub fn values(&self) -> Vec<i64> {
        self.alpha.values().copied().collect()
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        self.graph.canonical_form(Some(&self.alpha))
    }

    pub fn to_text(&self) -> String {
        self.graph.to_text(Some(&self.alpha))
    }
}

/// Pushes a decoration forward by preimage sums.
pub fn contract_decoration(c: &Contraction, d: &Decoration) -> GraphResult<Decoration> {
    if d.graph != c.source {
        return Err(GraphError::Mismatch("decoration lives on another graph".to_string()));
    }
    let mut alpha: BTreeMap<VertexId, i64> = c.target.vertex_ids().map(|v| (v, 0)).collect();
    for (v, a) in &d.alpha {
        let w = c
            .vertex_map
            .get(v)
            .ok_or_else(|| GraphError::Undefined(format!("vertex {v}")))?;
        *alpha
            .get_mut(w)
            .ok_or_else(|| GraphError::MissingVertex("vertex map".to_string(), *w))? += a;
    }
    Decoration::new(c.target.clone(), alpha)
}

/// All decorations with the given total and `lo <= alpha(v) <= hi`, bounds
/// listed in vertex-id order; lexicographic in that order.
pub fn enumerate_liftings(g: &ModularGraph, total: i64, bounds: &[(i64, i64)]) -> GraphResult<Vec<Decoration>> {
    let ids: Vec<VertexId> = g.vertex_ids().collect();
    if bounds.len() != ids.len() {
        return Err(GraphError::BoundsLength {
            expected: ids.len(),
            found: bounds.len(),
        });
    }
    // suffix sums of the bounds prune infeasible prefixes
    let mut min_rest = vec![0i64; ids.len() + 1];
    let mut max_rest = vec![0i64; ids.len() + 1];
    for k in (0..ids.len()).rev() {
        min_rest[k] = min_rest[k + 1] + bounds[k].0;
        max_rest[k] = max_rest[k + 1] + bounds[k].1;
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(ids.len());
    fill(0, total, bounds, &min_rest, &max_rest, &mut current, &mut |values| {
        let alpha = ids.iter().copied().zip(values.iter().copied()).collect();
        out.push(Decoration {
            graph: g.clone(),
            alpha,
        });
    });
    Ok(out)
}

fn fill(
    k: usize,
    remaining: i64,
    bounds: &[(i64, i64)],
    min_rest: &[i64],
    max_rest: &[i64],
    current: &mut Vec<i64>,
    emit: &mut dyn FnMut(&[i64]),
) {
    if k == bounds.len() {
        if remaining == 0 {
            emit(current);
        }
        return;
    }
    let (lo, hi) = bounds[k];
    let lo = lo.max(remaining - max_rest[k + 1]);
    let hi = hi.min(remaining - min_rest[k + 1]);
    for x in lo..=hi {
        current.push(x);
        fill(k + 1, remaining - x, bounds, min_rest, max_rest, current, emit);
        current.pop();
    }
}

/// Parses the line format. The decoration is returned when every vertex
/// line carries `a=`; a partial decoration is an error.
pub fn parse_graph(src: &str) -> GraphResult<(ModularGraph, Option<BTreeMap<VertexId, i64>>)> {
    let mut vertices = Vec::new();
    let mut alpha = BTreeMap::new();
    let mut edges = Vec::new();
    let mut tails = Vec::new();
    let mut seen = BTreeSet::new();
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let err = |message: String| GraphError::Parse { line, message };
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        let number = |s: &str| s.parse::<u32>().map_err(|_| err(format!("expected a nonnegative integer, got `{s}`")));
        let keyed = |s: &'_ str, key: &str| -> GraphResult<String> {
            s.strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| err(format!("expected `{key}=...`, got `{s}`")))
        };
        match fields.as_slice() {
            ["v", id, rest @ ..] if !rest.is_empty() && rest.len() <= 2 => {
                let id = number(id)?;
                let genus = number(&keyed(rest[0], "g")?)?;
                if rest.len() == 2 {
                    let a = keyed(rest[1], "a")?;
                    let a = a.as_str();
                    let a = a.parse::<i64>().map_err(|_| err(format!("bad decoration `{a}`")))?;
                    alpha.insert(id, a);
                }
                if !seen.insert(id) {
                    return Err(err(format!("duplicate vertex {id}")));
                }
                vertices.push((id, genus));
            }
            ["e", a, b] => edges.push((number(a)?, number(b)?)),
            ["t", v, m] => tails.push((number(&keyed(m, "m")?)?, number(v)?)),
            _ => return Err(err(format!("unrecognized line `{text}`"))),
        }
    }
    if !alpha.is_empty() && alpha.len() != vertices.len() {
        return Err(GraphError::Parse {
            line: 0,
            message: "either every vertex or no vertex carries `a=`".to_string(),
        });
    }
    let graph = ModularGraph::new(vertices, edges, tails)?;
    Ok((graph, (!alpha.is_empty()).then_some(alpha)))
}
