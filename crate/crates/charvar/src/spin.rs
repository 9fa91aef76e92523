//! The spin weight semigroup of a trivalent graph: integer edge weightings
//! whose half-edge links satisfy the parity and triangle conditions at every
//! vertex, the real cone version, the unit-bound polytope and its faces.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};
use std::collections::{BTreeMap, HashMap};

/// Integer edge weighting; keys are exactly the edge set.
pub type Weighting = BTreeMap<EdgeId, usize>;

/// Real edge weighting for cone membership queries.
pub type RealWeighting = BTreeMap<EdgeId, f64>;

/// A face of the polytope: the edges pinned to weight 1.
#[derive(Debug, Clone, Default)]
pub struct FaceSpec {
    pub ones: Vec<EdgeId>,
}

fn require_trivalent(graph: &Graph) -> Result<()> {
    for v in &graph.vertices {
        let val = graph.valence(v);
        if val != 3 {
            return Err(Error::NotTrivalent(format!(
                "vertex `{v}` has valence {val}"
            )));
        }
    }
    Ok(())
}

fn require_keys<T>(graph: &Graph, w: &BTreeMap<EdgeId, T>) -> Result<()> {
    for e in &graph.edges {
        if !w.contains_key(&e.id) {
            return Err(Error::UnknownEdge(format!("weighting misses `{}`", e.id)));
        }
    }
    Ok(())
}

/// The three half-edge ids at each vertex; a loop appears twice.
fn links(graph: &Graph) -> Result<Vec<[EdgeId; 3]>> {
    require_trivalent(graph)?;
    let mut out = Vec::new();
    for v in &graph.vertices {
        let mut link = Vec::new();
        for e in &graph.edges {
            if e.src == *v {
                link.push(e.id.clone());
            }
            if e.dst == *v {
                link.push(e.id.clone());
            }
        }
        out.push([link[0].clone(), link[1].clone(), link[2].clone()]);
    }
    Ok(out)
}

fn triangle_ok(a: f64, b: f64, c: f64, tol: f64) -> bool {
    a <= b + c + tol && b <= a + c + tol && c <= a + b + tol
}

/// Membership in the real cone: triangle inequalities at every vertex,
/// entries non-negative.  Exact (tolerance zero).
pub fn in_cone(weights: &RealWeighting, graph: &Graph) -> Result<bool> {
    moment_cone_contains(weights, graph, 0.0)
}

/// Cone membership with slack `tol` on every inequality.
pub fn moment_cone_contains(weights: &RealWeighting, graph: &Graph, tol: f64) -> Result<bool> {
    require_keys(graph, weights)?;
    if weights.values().any(|&w| w < -tol) {
        return Ok(false);
    }
    for link in links(graph)? {
        let [a, b, c] = link.map(|id| weights[&id]);
        if !triangle_ok(a, b, c, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Parity condition: the half-edge weight sum at every vertex is even.
pub fn in_lattice(weights: &Weighting, graph: &Graph) -> Result<bool> {
    require_keys(graph, weights)?;
    for link in links(graph)? {
        let sum: usize = link.iter().map(|id| weights[id]).sum();
        if sum % 2 != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Integer semigroup membership: parity and triangle conditions together.
pub fn is_member(weights: &Weighting, graph: &Graph) -> Result<bool> {
    if !in_lattice(weights, graph)? {
        return Ok(false);
    }
    for link in links(graph)? {
        let [a, b, c] = link.map(|id| weights[&id] as f64);
        if !triangle_ok(a, b, c, 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn sorted_ids(graph: &Graph) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = graph.edges.iter().map(|e| e.id.clone()).collect();
    ids.sort();
    ids
}

fn to_vec(w: &Weighting, ids: &[EdgeId]) -> Vec<usize> {
    ids.iter().map(|id| w[id]).collect()
}

fn from_vec(v: &[usize], ids: &[EdgeId]) -> Weighting {
    ids.iter().cloned().zip(v.iter().copied()).collect()
}

/// All semigroup members with every entry at most `max`, in lexicographic
/// order of the weight vector over sorted edge ids.
pub fn members_up_to(graph: &Graph, max: usize) -> Result<Vec<Weighting>> {
    require_trivalent(graph)?;
    let ids = sorted_ids(graph);
    let mut out = Vec::new();
    let mut v = vec![0usize; ids.len()];
    loop {
        let w = from_vec(&v, &ids);
        if is_member(&w, graph)? {
            out.push(w);
        }
        // Odometer increment.
        let mut i = v.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if v[i] < max {
                v[i] += 1;
                break;
            }
            v[i] = 0;
        }
    }
}

/// The minimal generating set: nonzero members with entries at most 2 that
/// do not split as a sum of two nonzero members.
pub fn hilbert_basis(graph: &Graph) -> Result<Vec<Weighting>> {
    let ids = sorted_ids(graph);
    let members: Vec<Vec<usize>> = members_up_to(graph, 2)?
        .iter()
        .map(|w| to_vec(w, &ids))
        .filter(|v| v.iter().any(|&x| x > 0))
        .collect();
    let is_m = |v: &[usize]| -> bool {
        v.iter().all(|&x| x <= 2) && members.iter().any(|m| m == v)
    };
    let mut basis = Vec::new();
    'outer: for cand in &members {
        for part in &members {
            if part == cand || part.iter().zip(cand).any(|(p, c)| p > c) {
                continue;
            }
            let rest: Vec<usize> = cand.iter().zip(part).map(|(c, p)| c - p).collect();
            if rest.iter().any(|&x| x > 0) && is_m(&rest) {
                continue 'outer;
            }
        }
        basis.push(from_vec(cand, &ids));
    }
    Ok(basis)
}

/// Expresses a member as an N-combination of Hilbert basis elements, as a
/// multiset of generators.  `Ok(None)` would certify a counterexample to the
/// degree-two generation property and must never occur for true members.
pub fn decompose(weights: &Weighting, graph: &Graph) -> Result<Option<Vec<Weighting>>> {
    if !is_member(weights, graph)? {
        return Err(Error::NotInSemigroup);
    }
    let ids = sorted_ids(graph);
    let basis: Vec<Vec<usize>> = hilbert_basis(graph)?
        .iter()
        .map(|w| to_vec(w, &ids))
        .collect();
    let target = to_vec(weights, &ids);
    // Parts are chosen in nondecreasing basis index so each multiset is
    // visited once; memoize on (remaining, first admissible index).
    type Key = (Vec<usize>, usize);
    fn rec(
        remaining: Vec<usize>,
        start: usize,
        basis: &[Vec<usize>],
        memo: &mut HashMap<Key, Option<Vec<usize>>>,
    ) -> Option<Vec<usize>> {
        if remaining.iter().all(|&x| x == 0) {
            return Some(Vec::new());
        }
        let key = (remaining.clone(), start);
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
        let mut found = None;
        for (i, b) in basis.iter().enumerate().skip(start) {
            if b.iter().zip(&remaining).any(|(x, r)| x > r) {
                continue;
            }
            let rest: Vec<usize> = remaining.iter().zip(b).map(|(r, x)| r - x).collect();
            if let Some(mut tail) = rec(rest, i, basis, memo) {
                tail.push(i);
                found = Some(tail);
                break;
            }
        }
        memo.insert(key, found.clone());
        found
    }
    let mut memo = HashMap::new();
    Ok(rec(target, 0, &basis, &mut memo).map(|choice| {
        let mut parts: Vec<Weighting> =
            choice.iter().map(|&i| from_vec(&basis[i], &ids)).collect();
        parts.reverse();
        parts
    }))
}

/// Lattice points of the dilated polytope: members with entries at most `m`.
pub fn polytope_points(graph: &Graph, m: usize) -> Result<Vec<Weighting>> {
    members_up_to(graph, m)
}

/// Affine rank of a point set with integer coordinates (dimension of the
/// affine hull), by fraction-free Gaussian elimination on the differences.
fn affine_rank(points: &[Vec<i128>]) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let mut rows: Vec<Vec<i128>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    let cols = first.len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let prow = &head[rank];
        for row in tail {
            if row[c] != 0 {
                let (a, b) = (prow[c], row[c]);
                for j in 0..cols {
                    row[j] = row[j] * a - prow[j] * b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dimension and codimension of the face of the unit polytope with the
/// given edges pinned to 1.  Probes dilation levels 1..=4 and keeps the
/// largest affine hull seen, since a single level can be lattice-degenerate.
pub fn face_dimension(face: &FaceSpec, graph: &Graph) -> Result<(usize, usize)> {
    require_trivalent(graph)?;
    let ids = sorted_ids(graph);
    for id in &face.ones {
        graph.edge(id)?;
    }
    let mut best: Option<usize> = None;
    for m in 1..=4usize {
        let pts: Vec<Vec<i128>> = polytope_points(graph, m)?
            .iter()
            .filter(|w| face.ones.iter().all(|id| w[id] == m))
            .map(|w| ids.iter().map(|id| w[id] as i128).collect())
            .collect();
        if pts.is_empty() {
            continue;
        }
        let rank = affine_rank(&pts);
        best = Some(best.map_or(rank, |b| b.max(rank)));
    }
    let dim = best.ok_or(Error::EmptyFace)?;
    Ok((dim, ids.len() - dim))
}

pub fn add(a: &Weighting, b: &Weighting) -> Weighting {
    a.iter()
        .map(|(k, v)| (k.clone(), v + b.get(k).copied().unwrap_or(0)))
        .collect()
}

pub fn parse_weighting(text: &str) -> Result<Weighting> {
    let mut out = Weighting::new();
    for tok in text.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let (id, val) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad weight `{tok}`")))?;
        let v: usize = val
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad weight value `{val}`")))?;
        out.insert(id.trim().to_string(), v);
    }
    Ok(out)
}

pub fn format_weighting(w: &Weighting) -> String {
    w.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{dumbbell, rose, theta};
    use proptest::prelude::*;

    fn w(graph: &Graph, vals: &[(&str, usize)]) -> Weighting {
        let _ = graph;
        vals.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn wr(vals: &[(&str, f64)]) -> RealWeighting {
        vals.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn cone_examples() {
        let t = theta().graph;
        assert!(in_cone(&wr(&[("p", 1.0), ("q", 1.0), ("r", 2.0)]), &t).unwrap());
        assert!(!in_cone(&wr(&[("p", 1.0), ("q", 0.0), ("r", 0.0)]), &t).unwrap());
        let d = dumbbell().graph;
        assert!(in_cone(&wr(&[("e1", 1.0), ("b", 2.0), ("e2", 1.0)]), &d).unwrap());
    }

    #[test]
    fn lattice_examples() {
        let t = theta().graph;
        assert!(!in_lattice(&w(&t, &[("p", 1), ("q", 1), ("r", 1)]), &t).unwrap());
        assert!(in_lattice(&w(&t, &[("p", 0), ("q", 1), ("r", 1)]), &t).unwrap());
        let d = dumbbell().graph;
        assert!(!in_lattice(&w(&d, &[("e1", 1), ("b", 1), ("e2", 1)]), &d).unwrap());
    }

    #[test]
    fn non_trivalent_rejected() {
        let r = rose(2).graph;
        assert!(matches!(
            hilbert_basis(&r),
            Err(Error::NotTrivalent(_))
        ));
        assert!(in_lattice(&w(&r, &[("x1", 1), ("x2", 1)]), &r).is_err());
    }

    #[test]
    fn theta_hilbert_basis() {
        let t = theta().graph;
        let basis = hilbert_basis(&t).unwrap();
        let expect = vec![
            w(&t, &[("p", 0), ("q", 1), ("r", 1)]),
            w(&t, &[("p", 1), ("q", 0), ("r", 1)]),
            w(&t, &[("p", 1), ("q", 1), ("r", 0)]),
        ];
        assert_eq!(basis, expect);
    }

    #[test]
    fn dumbbell_hilbert_basis() {
        let d = dumbbell().graph;
        let basis = hilbert_basis(&d).unwrap();
        let expect = vec![
            w(&d, &[("b", 0), ("e1", 0), ("e2", 1)]),
            w(&d, &[("b", 0), ("e1", 1), ("e2", 0)]),
            w(&d, &[("b", 2), ("e1", 1), ("e2", 1)]),
        ];
        assert_eq!(basis, expect);
    }

    #[test]
    fn decompose_examples() {
        let t = theta().graph;
        let parts = decompose(&w(&t, &[("p", 1), ("q", 1), ("r", 2)]), &t)
            .unwrap()
            .unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(
            parts.iter().fold(w(&t, &[("p", 0), ("q", 0), ("r", 0)]), |acc, p| add(&acc, p)),
            w(&t, &[("p", 1), ("q", 1), ("r", 2)])
        );
        let gen = w(&t, &[("p", 0), ("q", 1), ("r", 1)]);
        assert_eq!(decompose(&gen, &t).unwrap().unwrap(), vec![gen.clone()]);
        let parts = decompose(&w(&t, &[("p", 2), ("q", 2), ("r", 2)]), &t)
            .unwrap()
            .unwrap();
        assert_eq!(parts.len(), 3);
        assert!(matches!(
            decompose(&w(&t, &[("p", 1), ("q", 0), ("r", 0)]), &t),
            Err(Error::NotInSemigroup)
        ));
    }

    #[test]
    fn theta_polytope_counts() {
        let t = theta().graph;
        let m1 = polytope_points(&t, 1).unwrap();
        assert_eq!(m1.len(), 4);
        assert!(m1.contains(&w(&t, &[("p", 0), ("q", 0), ("r", 0)])));
        assert!(m1.contains(&w(&t, &[("p", 0), ("q", 1), ("r", 1)])));
        assert!(m1.contains(&w(&t, &[("p", 1), ("q", 0), ("r", 1)])));
        assert!(m1.contains(&w(&t, &[("p", 1), ("q", 1), ("r", 0)])));
        assert_eq!(polytope_points(&t, 2).unwrap().len(), 11);
    }

    #[test]
    fn dumbbell_polytope_level_one() {
        let d = dumbbell().graph;
        let pts = polytope_points(&d, 1).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert_eq!(p["b"], 0);
        }
    }

    #[test]
    fn face_dimensions_theta() {
        let t = theta().graph;
        let dim = |ones: &[&str]| {
            face_dimension(
                &FaceSpec {
                    ones: ones.iter().map(|s| s.to_string()).collect(),
                },
                &t,
            )
            .unwrap()
        };
        assert_eq!(dim(&[]), (3, 0));
        assert_eq!(dim(&["p"]), (2, 1));
        assert_eq!(dim(&["p", "q"]), (1, 2));
        assert_eq!(dim(&["p", "q", "r"]), (0, 3));
    }

    #[test]
    fn face_dimension_dumbbell_bridge() {
        let d = dumbbell().graph;
        let (dim, codim) = face_dimension(
            &FaceSpec {
                ones: vec!["b".to_string()],
            },
            &d,
        )
        .unwrap();
        assert_eq!((dim, codim), (2, 1));
    }

    #[test]
    fn moment_cone_tolerance() {
        let t = theta().graph;
        assert!(moment_cone_contains(&wr(&[("p", 0.0), ("q", 0.0), ("r", 0.0)]), &t, 1e-9).unwrap());
        assert!(moment_cone_contains(&wr(&[("p", 1.0), ("q", 1.0), ("r", 1.9)]), &t, 1e-9).unwrap());
        assert!(!moment_cone_contains(&wr(&[("p", 1.0), ("q", 0.0), ("r", 0.1)]), &t, 1e-9).unwrap());
        // Slack rescues a hair-over violation.
        assert!(moment_cone_contains(&wr(&[("p", 1.0), ("q", 0.4999999999), ("r", 0.5)]), &t, 1e-9).unwrap());
    }

    #[test]
    fn ehrhart_degree_theta() {
        // The point counts form a degree-3 quasi-polynomial of period 2:
        // (1,1,1) is a vertex of the real polytope but has odd parity, so
        // even and odd dilations follow different cubics.
        let t = theta().graph;
        let counts: Vec<i64> = (0..=13)
            .map(|m| polytope_points(&t, m).unwrap().len() as i64)
            .collect();
        let diff = |v: &[i64]| v.windows(2).map(|p| p[1] - p[0]).collect::<Vec<i64>>();
        for parity in 0..2 {
            let class: Vec<i64> = counts
                .iter()
                .copied()
                .skip(parity)
                .step_by(2)
                .collect();
            let d3 = diff(&diff(&diff(&class)));
            let d4 = diff(&d3);
            assert!(d4.iter().all(|&x| x == 0), "class {parity} not cubic: {class:?}");
            assert!(d3[0] > 0);
        }
    }

    #[test]
    fn weighting_text_round_trip() {
        let t = theta().graph;
        let a = w(&t, &[("p", 1), ("q", 0), ("r", 3)]);
        assert_eq!(parse_weighting(&format_weighting(&a)).unwrap(), a);
    }

    proptest! {
        #[test]
        fn semigroup_closed_under_addition(
            i in 0usize..64,
            j in 0usize..64,
        ) {
            for g in [theta().graph, dumbbell().graph] {
                let members = members_up_to(&g, 3).unwrap();
                let a = &members[i % members.len()];
                let b = &members[j % members.len()];
                prop_assert!(is_member(&add(a, b), &g).unwrap());
            }
        }

        #[test]
        fn members_decompose(idx in 0usize..256) {
            for g in [theta().graph, dumbbell().graph] {
                let members = members_up_to(&g, 4).unwrap();
                let target = &members[idx % members.len()];
                let parts = decompose(target, &g).unwrap();
                prop_assert!(parts.is_some(), "no decomposition for {target:?}");
                let sum = parts
                    .unwrap()
                    .iter()
                    .fold(target.keys().map(|k| (k.clone(), 0)).collect::<Weighting>(), |acc, p| add(&acc, p));
                prop_assert_eq!(&sum, target);
            }
        }

        #[test]
        fn graded_containment(i in 0usize..32, j in 0usize..32) {
            let g = theta().graph;
            let m1 = polytope_points(&g, 1).unwrap();
            let m2 = polytope_points(&g, 2).unwrap();
            let m3 = polytope_points(&g, 3).unwrap();
            let a = &m1[i % m1.len()];
            let b = &m2[j % m2.len()];
            prop_assert!(m3.contains(&add(a, b)));
        }
    }
}
