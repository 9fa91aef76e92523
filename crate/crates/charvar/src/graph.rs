//! Finite multigraphs with oriented edges, markings by a spanning tree plus
//! ordered generator edges, and the catalogue of spanned graphs of genus `g`
//! obtained by gluing paired leaves of trivalent trees.
//!
//! Orientation is source -> sink throughout.  Loops are allowed and count
//! twice towards valence.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

pub type VertexId = String;
pub type EdgeId = String;

/// A metric (edge length assignment); generic so lengths can be exact
/// rationals or floats.
pub type Metric<T> = BTreeMap<EdgeId, T>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub src: VertexId,
    pub dst: VertexId,
}

impl Edge {
    pub fn new(id: &str, src: &str, dst: &str) -> Self {
        Edge {
            id: id.to_string(),
            src: src.to_string(),
            dst: dst.to_string(),
        }
    }

    pub fn is_loop(&self) -> bool {
        self.src == self.dst
    }

    /// The endpoint other than `v`; for loops this is `v` again.
    pub fn other(&self, v: &str) -> &VertexId {
        if self.src == v {
            &self.dst
        } else {
            &self.src
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
}

/// Well-formedness and admissibility defects reported by [`validate`] and
/// [`admissibility_violations`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownEndpoint { edge: EdgeId, vertex: VertexId },
    DuplicateEdge(EdgeId),
    DuplicateVertex(VertexId),
    Disconnected,
    NoCycle,
    Leaf(VertexId),
    LowValence { vertex: VertexId, valence: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownEndpoint { edge, vertex } => {
                write!(f, "edge `{edge}` references unknown vertex `{vertex}`")
            }
            Violation::DuplicateEdge(id) => write!(f, "duplicate edge id `{id}`"),
            Violation::DuplicateVertex(id) => write!(f, "duplicate vertex id `{id}`"),
            Violation::Disconnected => write!(f, "graph is not connected"),
            Violation::NoCycle => write!(f, "graph has first Betti number zero"),
            Violation::Leaf(v) => write!(f, "vertex `{v}` is a leaf"),
            Violation::LowValence { vertex, valence } => {
                write!(f, "vertex `{vertex}` has valence {valence} < 3")
            }
        }
    }
}

impl Graph {
    pub fn new(vertices: &[&str], edges: Vec<Edge>) -> Self {
        Graph {
            vertices: vertices.iter().map(|v| v.to_string()).collect(),
            edges,
        }
    }

    pub fn edge(&self, id: &str) -> Result<&Edge> {
        self.edges
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn has_vertex(&self, v: &str) -> bool {
        self.vertices.iter().any(|u| u == v)
    }

    /// Half-edge count at `v`; loops contribute two.
    pub fn valence(&self, v: &str) -> usize {
        self.edges
            .iter()
            .map(|e| (e.src == v) as usize + (e.dst == v) as usize)
            .sum()
    }

    pub fn is_trivalent(&self) -> bool {
        self.vertices.iter().all(|v| self.valence(v) == 3)
    }

    /// Edge ids incident to `v` (loops listed once).
    pub fn incident(&self, v: &str) -> Vec<&Edge> {
        self.edges
            .iter()
            .filter(|e| e.src == v || e.dst == v)
            .collect()
    }

    pub fn component_count(&self) -> usize {
        if self.vertices.is_empty() {
            return 0;
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut count = 0;
        for start in &self.vertices {
            if seen.contains(start.as_str()) {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([start.as_str()]);
            seen.insert(start);
            while let Some(v) = queue.pop_front() {
                for e in self.incident(v) {
                    let w = e.other(v);
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// First Betti number |E| - |V| + #components.
    pub fn beta1(&self) -> usize {
        (self.edges.len() + self.component_count()).saturating_sub(self.vertices.len())
    }
}

/// Structural well-formedness: endpoint references and id uniqueness.
pub fn validate(graph: &Graph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen_v = BTreeSet::new();
    for v in &graph.vertices {
        if !seen_v.insert(v.clone()) {
            out.push(Violation::DuplicateVertex(v.clone()));
        }
    }
    let mut seen_e = BTreeSet::new();
    for e in &graph.edges {
        if !seen_e.insert(e.id.clone()) {
            out.push(Violation::DuplicateEdge(e.id.clone()));
        }
        for v in [&e.src, &e.dst] {
            if !graph.has_vertex(v) {
                out.push(Violation::UnknownEndpoint {
                    edge: e.id.clone(),
                    vertex: v.clone(),
                });
            }
        }
    }
    out
}

/// Conditions for a point of outer space: connected, no leaves, every vertex
/// of valence at least three, and at least one cycle.  The genus-one rose
/// fails the valence condition and is reported here; callers that admit it
/// as a special case filter the report themselves.
pub fn admissibility_violations(graph: &Graph) -> Vec<Violation> {
    let mut out = validate(graph);
    if !out.is_empty() {
        return out;
    }
    if !graph.is_connected() {
        out.push(Violation::Disconnected);
    }
    if graph.beta1() == 0 {
        out.push(Violation::NoCycle);
    }
    for v in &graph.vertices {
        match graph.valence(v) {
            0 | 1 => out.push(Violation::Leaf(v.clone())),
            2 => out.push(Violation::LowValence {
                vertex: v.clone(),
                valence: 2,
            }),
            _ => {}
        }
    }
    out
}

fn sorted_edge_ids(graph: &Graph) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = graph.edges.iter().map(|e| e.id.clone()).collect();
    ids.sort();
    ids
}

fn connects_all(graph: &Graph, edge_ids: &BTreeSet<EdgeId>) -> bool {
    if graph.vertices.is_empty() {
        return true;
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue = VecDeque::from([graph.vertices[0].as_str()]);
    seen.insert(&graph.vertices[0]);
    while let Some(v) = queue.pop_front() {
        for e in &graph.edges {
            if !edge_ids.contains(&e.id) {
                continue;
            }
            if e.src == v || e.dst == v {
                let w = e.other(v);
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
    }
    seen.len() == graph.vertices.len()
}

/// All spanning trees, as sets of edge ids, in a deterministic order.
pub fn spanning_trees(graph: &Graph) -> Vec<BTreeSet<EdgeId>> {
    let n = graph.vertices.len();
    if n == 0 || !graph.is_connected() {
        return Vec::new();
    }
    let candidates: Vec<EdgeId> = sorted_edge_ids(graph)
        .into_iter()
        .filter(|id| !graph.edge(id).unwrap().is_loop())
        .collect();
    let want = n - 1;
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    fn rec(
        graph: &Graph,
        candidates: &[EdgeId],
        want: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<BTreeSet<EdgeId>>,
    ) {
        if chosen.len() == want {
            let set: BTreeSet<EdgeId> = chosen.iter().map(|&i| candidates[i].clone()).collect();
            if connects_all(graph, &set) {
                out.push(set);
            }
            return;
        }
        for i in start..candidates.len() {
            if candidates.len() - i < want - chosen.len() {
                break;
            }
            chosen.push(i);
            rec(graph, candidates, want, i + 1, chosen, out);
            chosen.pop();
        }
    }
    rec(graph, &candidates, want, 0, &mut chosen, &mut out);
    out
}

/// Whether the subgraph induced by the edges *not* in `s` has a leaf.  The
/// induced subgraph keeps only endpoints of surviving edges, so the empty
/// complement is vacuously leafless.
pub fn complement_is_leafless(graph: &Graph, s: &BTreeSet<EdgeId>) -> bool {
    let mut valence: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &graph.edges {
        if s.contains(&e.id) {
            continue;
        }
        *valence.entry(e.src.as_str()).or_insert(0) += 1;
        *valence.entry(e.dst.as_str()).or_insert(0) += 1;
    }
    valence.values().all(|&v| v != 1)
}

/// All subsets `S` of the edge set whose complement-induced subgraph is
/// leafless.  These are exactly the candidate zero-length strata.
pub fn leafless_subgraph_sets(graph: &Graph) -> Vec<BTreeSet<EdgeId>> {
    let ids = sorted_edge_ids(graph);
    assert!(ids.len() <= 20, "subset enumeration capped at 20 edges");
    let mut out = Vec::new();
    for mask in 0u32..(1 << ids.len()) {
        let s: BTreeSet<EdgeId> = ids
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, id)| id.clone())
            .collect();
        if complement_is_leafless(graph, &s) {
            out.push(s);
        }
    }
    out.sort_by_key(|s| (s.len(), s.iter().cloned().collect::<Vec<_>>()));
    out
}

/// A marked graph: spanning tree, ordered oriented generator edges (the
/// off-tree edges), and a basepoint.  The marking identifies the fundamental
/// group with the free group on `genus()` letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marking {
    pub graph: Graph,
    pub tree: BTreeSet<EdgeId>,
    pub generators: Vec<EdgeId>,
    pub basepoint: VertexId,
}

impl Marking {
    pub fn genus(&self) -> usize {
        self.generators.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = validate(&self.graph);
        if let Some(v) = bad.first() {
            return Err(Error::InvalidMarking(v.to_string()));
        }
        if !self.graph.has_vertex(&self.basepoint) {
            return Err(Error::UnknownVertex(self.basepoint.clone()));
        }
        for id in self.tree.iter().chain(self.generators.iter()) {
            self.graph.edge(id)?;
        }
        if self.tree.len() + 1 != self.graph.vertices.len() || !connects_all(&self.graph, &self.tree)
        {
            return Err(Error::InvalidMarking(
                "spanning tree does not span".to_string(),
            ));
        }
        if self.tree.iter().any(|id| self.graph.edge(id).unwrap().is_loop()) {
            return Err(Error::InvalidMarking("tree contains a loop".to_string()));
        }
        let mut off_tree: Vec<EdgeId> = self
            .graph
            .edges
            .iter()
            .filter(|e| !self.tree.contains(&e.id))
            .map(|e| e.id.clone())
            .collect();
        off_tree.sort();
        let mut gens = self.generators.clone();
        gens.sort();
        if gens != off_tree {
            return Err(Error::InvalidMarking(
                "generator order must list exactly the off-tree edges".to_string(),
            ));
        }
        Ok(())
    }
}

/// Checks a metric assigns a value to every edge.
pub fn validate_metric<T>(graph: &Graph, metric: &Metric<T>) -> Result<()> {
    for e in &graph.edges {
        if !metric.contains_key(&e.id) {
            return Err(Error::InvalidMetric(format!("missing edge `{}`", e.id)));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Spanned graphs from trivalent trees with paired leaves.

/// Leaf-labeled trivalent tree topologies on `n >= 3` leaves.  Nodes `0..n`
/// are leaves; internal nodes are numbered from `n` upward.  Each topology is
/// an edge list; the enumeration inserts leaf `k` into every edge of every
/// tree on `k` leaves, which yields each topology exactly once.
fn tree_topologies(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n >= 3);
    let mut trees = vec![vec![(0, n), (1, n), (2, n)]];
    for k in 3..n {
        let mut next = Vec::new();
        for t in &trees {
            for (i, &(a, b)) in t.iter().enumerate() {
                let fresh = n + k - 2;
                let mut t2 = t.clone();
                t2.remove(i);
                t2.push((a, fresh));
                t2.push((fresh, b));
                t2.push((k, fresh));
                next.push(t2);
            }
        }
        trees = next;
    }
    trees
}

/// Glue the paired leaves `2i, 2i+1` (0-indexed) of a trivalent tree on `2g`
/// leaves into the oriented generator edge `x(i+1)`; the sink is the
/// attachment of the odd leaf.  Internal edges become the spanning tree.
fn glue_topology(g: usize, tree: &[(usize, usize)]) -> Marking {
    let n = 2 * g;
    let mut attach: BTreeMap<usize, usize> = BTreeMap::new();
    let mut internal_edges: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in tree {
        if a < n {
            attach.insert(a, b);
        } else if b < n {
            attach.insert(b, a);
        } else {
            internal_edges.push((a.min(b), a.max(b)));
        }
    }
    internal_edges.sort();
    let mut internals: Vec<usize> = tree
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|&x| x >= n)
        .collect();
    internals.sort();
    internals.dedup();
    let name = |node: usize| format!("v{}", internals.iter().position(|&x| x == node).unwrap());

    let mut edges = Vec::new();
    for i in 0..g {
        let src = name(attach[&(2 * i)]);
        let dst = name(attach[&(2 * i + 1)]);
        edges.push(Edge {
            id: format!("x{}", i + 1),
            src,
            dst,
        });
    }
    let mut tree_ids = BTreeSet::new();
    for (i, &(a, b)) in internal_edges.iter().enumerate() {
        let id = format!("t{}", i + 1);
        tree_ids.insert(id.clone());
        edges.push(Edge {
            id,
            src: name(a),
            dst: name(b),
        });
    }
    let graph = Graph {
        vertices: (0..internals.len()).map(|i| format!("v{i}")).collect(),
        edges,
    };
    Marking {
        graph,
        tree: tree_ids,
        generators: (1..=g).map(|i| format!("x{i}")).collect(),
        basepoint: "v0".to_string(),
    }
}

/// Isomorphism of marked graphs commuting with the markings: generator edges
/// must correspond index by index with matching orientation, tree edges as
/// unoriented sets.
pub fn spanned_equivalent(a: &Marking, b: &Marking) -> bool {
    if a.graph.vertices.len() != b.graph.vertices.len()
        || a.graph.edges.len() != b.graph.edges.len()
        || a.genus() != b.genus()
    {
        return false;
    }
    let va = &a.graph.vertices;
    let vb = &b.graph.vertices;
    let n = va.len();
    let mut perm: Vec<usize> = (0..n).collect();
    // Heap's algorithm over all vertex bijections; graphs here are tiny.
    fn heaps(perm: &mut Vec<usize>, k: usize, check: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if k <= 1 {
            return check(perm);
        }
        for i in 0..k {
            if heaps(perm, k - 1, check) {
                return true;
            }
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
        false
    }
    let mut check = |perm: &[usize]| -> bool {
        let map = |v: &str| -> &str {
            let i = va.iter().position(|x| x == v).unwrap();
            &vb[perm[i]]
        };
        for (ga, gb) in a.generators.iter().zip(&b.generators) {
            let ea = a.graph.edge(ga).unwrap();
            let eb = b.graph.edge(gb).unwrap();
            if map(&ea.src) != eb.src || map(&ea.dst) != eb.dst {
                return false;
            }
        }
        let mut ta: Vec<(String, String)> = a
            .tree
            .iter()
            .map(|id| {
                let e = a.graph.edge(id).unwrap();
                let (x, y) = (map(&e.src).to_string(), map(&e.dst).to_string());
                (x.clone().min(y.clone()), x.max(y))
            })
            .collect();
        let mut tb: Vec<(String, String)> = b
            .tree
            .iter()
            .map(|id| {
                let e = b.graph.edge(id).unwrap();
                let (x, y) = (e.src.clone(), e.dst.clone());
                (x.clone().min(y.clone()), x.max(y))
            })
            .collect();
        ta.sort();
        tb.sort();
        ta == tb
    };
    heaps(&mut perm, n, &mut check)
}

/// The spanned graphs of genus `g`: glue every leaf-labeled trivalent tree on
/// `2g` leaves and drop duplicates up to marked isomorphism.  Genus one is
/// the rose with a single loop.
pub fn enumerate_spanned_graphs(g: usize) -> Vec<Marking> {
    assert!(g >= 1, "genus must be at least 1");
    if g == 1 {
        let graph = Graph::new(&["v0"], vec![Edge::new("x1", "v0", "v0")]);
        return vec![Marking {
            graph,
            tree: BTreeSet::new(),
            generators: vec!["x1".to_string()],
            basepoint: "v0".to_string(),
        }];
    }
    let mut out: Vec<Marking> = Vec::new();
    for t in tree_topologies(2 * g) {
        let m = glue_topology(g, &t);
        debug_assert!(m.validate().is_ok());
        if !out.iter().any(|known| spanned_equivalent(known, &m)) {
            out.push(m);
        }
    }
    out
}

/// Suppress bivalent vertices: merge the two incident (distinct) edges and
/// add their lengths.  The merged edge keeps the lexicographically smaller id
/// and that edge's direction of travel.  Bivalent vertices carrying a loop
/// are left alone (the circle has nothing to merge into).
pub fn suppress_bivalent(graph: &Graph, metric: &Metric<f64>) -> (Graph, Metric<f64>) {
    let mut g = graph.clone();
    let mut m = metric.clone();
    loop {
        let target = g.vertices.iter().find(|v| {
            g.valence(v) == 2 && {
                let inc = g.incident(v);
                inc.len() == 2 && !inc[0].is_loop() && !inc[1].is_loop()
            }
        });
        let Some(v) = target.cloned() else {
            return (g, m);
        };
        let inc: Vec<Edge> = g.incident(&v).into_iter().cloned().collect();
        let (keep, drop) = if inc[0].id < inc[1].id {
            (inc[0].clone(), inc[1].clone())
        } else {
            (inc[1].clone(), inc[0].clone())
        };
        // Travel through `keep` in its own orientation, continuing along
        // `drop` out the far side.
        let (src, dst) = if keep.dst == v {
            (keep.src.clone(), drop.other(&v).clone())
        } else {
            (drop.other(&v).clone(), keep.dst.clone())
        };
        let length = m.get(&keep.id).copied().unwrap_or(0.0) + m.get(&drop.id).copied().unwrap_or(0.0);
        g.edges.retain(|e| e.id != keep.id && e.id != drop.id);
        g.edges.push(Edge {
            id: keep.id.clone(),
            src,
            dst,
        });
        g.vertices.retain(|u| *u != v);
        m.remove(&drop.id);
        m.insert(keep.id.clone(), length);
    }
}

// ---------------------------------------------------------------------------
// Unmarked graph catalogues (used by the flow/assignment test surfaces).

fn canonical_key(n_vertices: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n_vertices).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    loop {
        let mut relabeled: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        relabeled.sort();
        if best.as_ref().is_none_or(|b| relabeled < *b) {
            best = Some(relabeled);
        }
        // Next lexicographic permutation.
        let mut i = n_vertices.wrapping_sub(2);
        while i != usize::MAX && perm[i] >= perm[i + 1] {
            i = i.wrapping_sub(1);
        }
        if i == usize::MAX {
            break;
        }
        let mut j = n_vertices - 1;
        while perm[j] <= perm[i] {
            j -= 1;
        }
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    best.unwrap()
}

/// All connected leafless multigraphs (every valence >= 2) with between one
/// and `max_edges` edges, up to isomorphism, as concrete [`Graph`]s with
/// vertices `v0..` and edges `e1..`.
pub fn enumerate_leafless_graphs(max_edges: usize) -> Vec<Graph> {
    assert!(max_edges <= 7, "catalogue capped at 7 edges");
    let mut seen: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    let mut out = Vec::new();
    for nv in 1..=max_edges {
        let pairs: Vec<(usize, usize)> = (0..nv)
            .flat_map(|i| (i..nv).map(move |j| (i, j)))
            .collect();
        for ne in nv..=max_edges {
            // Multisets of `ne` pairs, nondecreasing in pair index.
            let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
            while let Some((chosen, start)) = stack.pop() {
                if chosen.len() == ne {
                    let edges: Vec<(usize, usize)> = chosen.iter().map(|&i| pairs[i]).collect();
                    let mut valence = vec![0usize; nv];
                    for &(a, b) in &edges {
                        valence[a] += 1;
                        valence[b] += 1;
                    }
                    if valence.iter().any(|&v| v < 2) {
                        continue;
                    }
                    let g = build_graph(nv, &edges);
                    if !g.is_connected() {
                        continue;
                    }
                    if seen.insert(canonical_key(nv, &edges)) {
                        out.push(g);
                    }
                    continue;
                }
                for i in (start..pairs.len()).rev() {
                    let mut c = chosen.clone();
                    c.push(i);
                    stack.push((c, i));
                }
            }
        }
    }
    out
}

fn build_graph(nv: usize, edges: &[(usize, usize)]) -> Graph {
    Graph {
        vertices: (0..nv).map(|i| format!("v{i}")).collect(),
        edges: edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| Edge {
                id: format!("e{}", i + 1),
                src: format!("v{a}"),
                dst: format!("v{b}"),
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// JSON interchange.

/// On-disk form: a graph plus optional marking and metric blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spanning_tree: Option<Vec<EdgeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_order: Option<Vec<EdgeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<VertexId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<BTreeMap<EdgeId, f64>>,
}

impl GraphFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization cannot fail")
    }

    pub fn graph(&self) -> Graph {
        Graph {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
        }
    }

    pub fn marking(&self) -> Result<Marking> {
        let (Some(tree), Some(gens), Some(base)) = (
            self.spanning_tree.as_ref(),
            self.generator_order.as_ref(),
            self.basepoint.as_ref(),
        ) else {
            return Err(Error::InvalidMarking(
                "file lacks spanning_tree/generator_order/basepoint".to_string(),
            ));
        };
        let m = Marking {
            graph: self.graph(),
            tree: tree.iter().cloned().collect(),
            generators: gens.clone(),
            basepoint: base.clone(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_marking(m: &Marking, metric: Option<&Metric<f64>>) -> Self {
        GraphFile {
            vertices: m.graph.vertices.clone(),
            edges: m.graph.edges.clone(),
            spanning_tree: Some(m.tree.iter().cloned().collect()),
            generator_order: Some(m.generators.clone()),
            basepoint: Some(m.basepoint.clone()),
            metric: metric.cloned(),
        }
    }
}

// ---------------------------------------------------------------------------

/// The rose with `g` petals x1..xg at the single vertex v0, empty tree.
pub fn rose(g: usize) -> Marking {
    let edges: Vec<Edge> = (1..=g)
        .map(|i| Edge::new(&format!("x{i}"), "v0", "v0"))
        .collect();
    Marking {
        graph: Graph {
            vertices: vec!["v0".to_string()],
            edges,
        },
        tree: BTreeSet::new(),
        generators: (1..=g).map(|i| format!("x{i}")).collect(),
        basepoint: "v0".to_string(),
    }
}

/// The theta graph: two vertices, three parallel edges p, q, r, marked with
/// tree {p} and generators (q, r).  A convenient fixture throughout.
pub fn theta() -> Marking {
    let graph = Graph::new(
        &["u", "v"],
        vec![
            Edge::new("p", "u", "v"),
            Edge::new("q", "u", "v"),
            Edge::new("r", "u", "v"),
        ],
    );
    Marking {
        graph,
        tree: BTreeSet::from(["p".to_string()]),
        generators: vec!["q".to_string(), "r".to_string()],
        basepoint: "u".to_string(),
    }
}

/// The dumbbell: loops e1 at u and e2 at v joined by the bridge b, marked
/// with tree {b} and generators (e1, e2).
pub fn dumbbell() -> Marking {
    let graph = Graph::new(
        &["u", "v"],
        vec![
            Edge::new("e1", "u", "u"),
            Edge::new("b", "u", "v"),
            Edge::new("e2", "v", "v"),
        ],
    );
    Marking {
        graph,
        tree: BTreeSet::from(["b".to_string()]),
        generators: vec!["e1".to_string(), "e2".to_string()],
        basepoint: "u".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_is_admissible() {
        let m = theta();
        assert!(validate(&m.graph).is_empty());
        assert!(admissibility_violations(&m.graph).is_empty());
        assert!(m.validate().is_ok());
        assert_eq!(m.graph.beta1(), 2);
    }

    #[test]
    fn single_loop_valid_but_not_admissible() {
        let g = Graph::new(&["v"], vec![Edge::new("e", "v", "v")]);
        assert!(validate(&g).is_empty());
        let viols = admissibility_violations(&g);
        assert_eq!(
            viols,
            vec![Violation::LowValence {
                vertex: "v".to_string(),
                valence: 2
            }]
        );
    }

    #[test]
    fn leaf_vertex_reported_by_name() {
        let g = Graph::new(
            &["u", "v", "w"],
            vec![
                Edge::new("a", "u", "v"),
                Edge::new("b", "u", "v"),
                Edge::new("c", "u", "w"),
            ],
        );
        let viols = admissibility_violations(&g);
        assert!(viols.contains(&Violation::Leaf("w".to_string())));
    }

    #[test]
    fn bad_endpoint_reported() {
        let g = Graph::new(&["u"], vec![Edge::new("a", "u", "zz")]);
        assert_eq!(
            validate(&g),
            vec![Violation::UnknownEndpoint {
                edge: "a".to_string(),
                vertex: "zz".to_string()
            }]
        );
    }

    #[test]
    fn theta_has_three_spanning_trees() {
        let trees = spanning_trees(&theta().graph);
        assert_eq!(trees.len(), 3);
        for t in &trees {
            assert_eq!(t.len(), 1);
        }
    }

    #[test]
    fn dumbbell_has_one_spanning_tree() {
        let trees = spanning_trees(&dumbbell().graph);
        assert_eq!(trees, vec![BTreeSet::from(["b".to_string()])]);
    }

    // Independent brute-force oracle: a set qualifies iff no endpoint of the
    // complement has exactly one incident half-edge, checked by counting
    // half-edges directly from the edge list.
    fn leafless_oracle(g: &Graph, s: &BTreeSet<EdgeId>) -> bool {
        g.vertices.iter().all(|v| {
            let mut half = 0;
            for e in &g.edges {
                if s.contains(&e.id) {
                    continue;
                }
                if e.src == *v {
                    half += 1;
                }
                if e.dst == *v {
                    half += 1;
                }
            }
            half != 1
        })
    }

    #[test]
    fn theta_leafless_sets() {
        let m = theta();
        let sets = leafless_subgraph_sets(&m.graph);
        assert_eq!(sets.len(), 5);
        assert!(sets.contains(&BTreeSet::new()));
        assert!(sets.contains(&BTreeSet::from(["p".into(), "q".into(), "r".into()])));
        for s in &sets {
            assert!(leafless_oracle(&m.graph, s));
        }
    }

    #[test]
    fn dumbbell_leafless_sets() {
        let m = dumbbell();
        let sets = leafless_subgraph_sets(&m.graph);
        let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(
            sets,
            vec![
                ids(&[]),
                ids(&["b"]),
                ids(&["b", "e1"]),
                ids(&["b", "e2"]),
                ids(&["b", "e1", "e2"]),
            ]
        );
        assert!(!sets.contains(&ids(&["e1"])));
    }

    #[test]
    fn exhaustive_leafless_matches_oracle() {
        for m in [theta(), dumbbell()] {
            let ids = sorted_edge_ids(&m.graph);
            let mut expected = Vec::new();
            for mask in 0u32..(1 << ids.len()) {
                let s: BTreeSet<EdgeId> = ids
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, id)| id.clone())
                    .collect();
                if leafless_oracle(&m.graph, &s) {
                    expected.push(s);
                }
            }
            expected.sort_by_key(|s| (s.len(), s.iter().cloned().collect::<Vec<_>>()));
            assert_eq!(leafless_subgraph_sets(&m.graph), expected);
        }
    }

    #[test]
    fn spanned_graph_counts() {
        assert_eq!(enumerate_spanned_graphs(1).len(), 1);
        // (2n-5)!! leaf-labeled trivalent topologies on n = 2g leaves, and
        // gluing is injective up to marked isomorphism.
        assert_eq!(enumerate_spanned_graphs(2).len(), 3);
        assert_eq!(enumerate_spanned_graphs(3).len(), 105);
    }

    #[test]
    fn genus_two_covers_theta_and_dumbbell() {
        let all = enumerate_spanned_graphs(2);
        let loops = |m: &Marking| m.graph.edges.iter().filter(|e| e.is_loop()).count();
        assert_eq!(all.iter().filter(|m| loops(m) == 2).count(), 1); // dumbbell
        assert_eq!(all.iter().filter(|m| loops(m) == 0).count(), 2); // theta, two gluings
        for m in &all {
            assert!(m.validate().is_ok());
            assert_eq!(m.graph.beta1(), 2);
            assert!(m.graph.is_trivalent());
        }
    }

    #[test]
    fn spanned_markings_are_valid_genus_3() {
        for m in enumerate_spanned_graphs(3) {
            assert!(m.validate().is_ok());
            assert_eq!(m.graph.beta1(), 3);
            assert!(m.graph.is_trivalent());
        }
    }

    #[test]
    fn suppression_merges_lengths() {
        // Theta with one side subdivided at the bivalent vertex m.
        let g = Graph::new(
            &["u", "m", "v"],
            vec![
                Edge::new("a", "u", "m"),
                Edge::new("b", "m", "v"),
                Edge::new("c", "v", "u"),
                Edge::new("d", "u", "v"),
            ],
        );
        let metric: Metric<f64> = [("a", 1.0), ("b", 2.0), ("c", 4.0), ("d", 8.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let (g2, m2) = suppress_bivalent(&g, &metric);
        assert_eq!(g2.vertices, vec!["u", "v"]);
        assert_eq!(g2.edges.len(), 3);
        let merged = g2.edge("a").unwrap();
        assert_eq!((merged.src.as_str(), merged.dst.as_str()), ("u", "v"));
        assert_eq!(m2["a"], 3.0);
        assert_eq!(m2["c"], 4.0);
        assert_eq!(m2["d"], 8.0);
    }

    #[test]
    fn suppression_collapses_circle_to_loop() {
        let g = Graph::new(
            &["u", "m", "v"],
            vec![
                Edge::new("a", "u", "m"),
                Edge::new("b", "m", "v"),
                Edge::new("c", "v", "u"),
            ],
        );
        let metric: Metric<f64> = [("a", 1.0), ("b", 2.0), ("c", 4.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let (g2, m2) = suppress_bivalent(&g, &metric);
        assert_eq!(g2.vertices.len(), 1);
        assert_eq!(g2.edges.len(), 1);
        assert!(g2.edges[0].is_loop());
        assert_eq!(m2.values().sum::<f64>(), 7.0);
    }

    #[test]
    fn leafless_catalogue_small_counts() {
        let cat = enumerate_leafless_graphs(3);
        // Cycles of length 1..3, theta, dumbbell, two-vertex double loop...
        for g in &cat {
            assert!(g.is_connected());
            assert!(g.vertices.iter().all(|v| g.valence(v) >= 2));
            assert!(g.edges.len() <= 3);
        }
        // 1 loop; 2-cycle, 2 loops at one vertex... check a few known members.
        assert!(cat.iter().any(|g| g.vertices.len() == 1 && g.edges.len() == 1));
        assert!(cat.iter().any(|g| g.vertices.len() == 2 && g.edges.len() == 3));
        let six = enumerate_leafless_graphs(6);
        assert!(six.len() > cat.len());
        assert!(six.iter().any(|g| {
            g.vertices.len() == 4
                && g.edges.len() == 6
                && g.vertices.iter().all(|v| g.valence(v) == 3)
                && g.edges.iter().all(|e| !e.is_loop())
        }));
    }

    #[test]
    fn graph_file_round_trip() {
        let m = theta();
        let metric: Metric<f64> = m
            .graph
            .edges
            .iter()
            .map(|e| (e.id.clone(), 1.5))
            .collect();
        let file = GraphFile::from_marking(&m, Some(&metric));
        let text = file.to_json();
        let back = GraphFile::from_json(&text).unwrap();
        assert_eq!(back.marking().unwrap(), m);
        assert_eq!(back.metric.unwrap(), metric);
    }
}
