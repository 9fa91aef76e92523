//! Moment-map geometry over a graph: su(2)* moment vectors of SL2 matrices,
//! vertex momentum sums, gradient descent to momentum zero, the momentum
//! image inside the edge cone, a constructive exact momentum-zero assignment
//! for leafless graphs, and the torus action on the dense stratum.
//!
//! Conventions: an edge matrix g decomposes as g = k p with k unitary and p
//! positive, both det 1; its moment vector v is the Pauli vector of
//! g*g - (tr/2)I, so reconstruct(k, v) inverts the pair.  The source
//! endpoint of an edge receives k.v (the rotated vector), the sink receives
//! -v; loops receive both.  Acting at a vertex multiplies source-side
//! matrices on the left, sink-side on the right by the inverse, which makes
//! the vertex momentum rotate equivariantly while all other momenta stay
//! put.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::mat2::{
    add3, c, conj_vector, cross3, diagonalizer, dot3, exp_hermitian, norm3, pauli, pauli_vector,
    polar, rotation_between, rotation_about, scale3, sqrt_pos_det1, sub3, Mat2,
};
use crate::spin::RealWeighting;
use crate::tensor::Representation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::{BTreeMap, BTreeSet};

/// Traceless Hermitian part of g*g in Pauli coordinates.
pub fn moment_vector(g: &Mat2) -> Result<[f64; 3]> {
    if (g.det() - c(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::InvalidMetric("matrix is not in SL2".to_string()));
    }
    Ok(moment_vector_unchecked(g))
}

fn moment_vector_unchecked(g: &Mat2) -> [f64; 3] {
    let m = g.dagger() * *g;
    let half_tr = m.trace() * 0.5;
    let h = Mat2::new(m.a - half_tr, m.b, m.c, m.d - half_tr);
    pauli_vector(&h)
}

/// Edge length function: the norm of the moment vector, zero exactly on
/// SU(2).
pub fn xi(g: &Mat2) -> f64 {
    norm3(moment_vector_unchecked(g))
}

/// Momentum contribution at the source endpoint: k.v, the Pauli vector of
/// the traceless part of g g*.
pub fn mu_left(g: &Mat2) -> [f64; 3] {
    let m = *g * g.dagger();
    let half_tr = m.trace() * 0.5;
    let h = Mat2::new(m.a - half_tr, m.b, m.c, m.d - half_tr);
    pauli_vector(&h)
}

/// Momentum contribution at the sink endpoint: -v.
pub fn mu_right(g: &Mat2) -> [f64; 3] {
    scale3(moment_vector_unchecked(g), -1.0)
}

fn rep_matrix<'a>(rep: &'a Representation, id: &EdgeId) -> Result<&'a Mat2> {
    rep.get(id)
        .ok_or_else(|| Error::UnknownEdge(format!("representation misses `{id}`")))
}

/// Sum of half-edge momentum contributions at one vertex.
pub fn vertex_momentum(rep: &Representation, graph: &Graph, vertex: &str) -> Result<[f64; 3]> {
    if !graph.has_vertex(vertex) {
        return Err(Error::UnknownVertex(vertex.to_string()));
    }
    let mut total = [0.0; 3];
    for e in &graph.edges {
        let g = if e.src == vertex || e.dst == vertex {
            rep_matrix(rep, &e.id)?
        } else {
            continue;
        };
        if e.src == vertex {
            total = add3(total, mu_left(g));
        }
        if e.dst == vertex {
            total = add3(total, mu_right(g));
        }
    }
    Ok(total)
}

pub fn all_momenta(rep: &Representation, graph: &Graph) -> Result<BTreeMap<VertexId, [f64; 3]>> {
    graph
        .vertices
        .iter()
        .map(|v| Ok((v.clone(), vertex_momentum(rep, graph, v)?)))
        .collect()
}

/// Largest vertex momentum norm.
pub fn momentum_residual(rep: &Representation, graph: &Graph) -> Result<f64> {
    Ok(all_momenta(rep, graph)?
        .values()
        .map(|v| norm3(*v))
        .fold(0.0, f64::max))
}

/// Acts at `vertex` by u: source-side matrices get u on the left, sink-side
/// the inverse on the right; loops get both.
pub fn gauge_at(rep: &mut Representation, graph: &Graph, vertex: &str, u: &Mat2) {
    let uinv = u.adjugate();
    for e in &graph.edges {
        let Some(g) = rep.get_mut(&e.id) else {
            continue;
        };
        let mut m = *g;
        if e.src == vertex {
            m = *u * m;
        }
        if e.dst == vertex {
            m = m * uinv;
        }
        *g = m;
    }
}

fn objective(rep: &Representation, graph: &Graph) -> Result<f64> {
    Ok(all_momenta(rep, graph)?
        .values()
        .map(|v| dot3(*v, *v))
        .sum())
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub rep: Representation,
    /// Accepted descent steps.
    pub iterations: usize,
    pub residual: f64,
    /// Objective value after each accepted step; must be non-increasing.
    pub trace: Vec<f64>,
}

/// Gradient descent to momentum zero: sweeps the vertices, moving each by
/// the Hermitian exponential of its momentum with Armijo backtracking on the
/// step size.  Unitary moves are useless here (they only rotate momenta), so
/// the exponent is the Hermitian matrix m.sigma itself.
pub fn kempf_ness_solve(
    rep: &Representation,
    graph: &Graph,
    tol: f64,
    max_iters: usize,
) -> std::result::Result<SolveOutcome, Error> {
    let mut current = rep.clone();
    let mut f = objective(&current, graph)?;
    let mut iterations = 0usize;
    let mut trace = Vec::new();
    let mut vertices = graph.vertices.clone();
    vertices.sort();
    loop {
        let residual = momentum_residual(&current, graph)?;
        if residual < tol {
            return Ok(SolveOutcome {
                rep: current,
                iterations,
                residual,
                trace,
            });
        }
        let mut moved = false;
        for w in &vertices {
            let m = vertex_momentum(&current, graph, w)?;
            let norm = norm3(m);
            if norm < tol * 0.5 {
                continue;
            }
            let mut eps = 0.1 / (1.0 + norm);
            let mut accepted = false;
            while eps > 1e-18 {
                let u = exp_hermitian(m, -eps);
                let mut candidate = current.clone();
                gauge_at(&mut candidate, graph, w, &u);
                let f_new = objective(&candidate, graph)?;
                if f_new <= f - 1e-4 * eps * norm * norm {
                    current = candidate;
                    f = f_new;
                    accepted = true;
                    break;
                }
                eps *= 0.5;
            }
            if accepted {
                iterations += 1;
                trace.push(f);
                moved = true;
                if iterations >= max_iters {
                    let residual = momentum_residual(&current, graph)?;
                    if residual < tol {
                        return Ok(SolveOutcome {
                            rep: current,
                            iterations,
                            residual,
                            trace,
                        });
                    }
                    return Err(Error::NotConverged {
                        residual,
                        iterations,
                    });
                }
            }
        }
        if !moved {
            // Armijo failed at every vertex: stalled short of tolerance.
            return Err(Error::NotConverged {
                residual: momentum_residual(&current, graph)?,
                iterations,
            });
        }
    }
}

/// Edge lengths of a momentum-zero representation: the point of the cone
/// under the torus momentum map.
pub fn momentum_image(rep: &Representation, graph: &Graph, tol: f64) -> Result<RealWeighting> {
    let residual = momentum_residual(rep, graph)?;
    if residual >= tol {
        return Err(Error::NotMomentumZero(residual));
    }
    graph
        .edges
        .iter()
        .map(|e| Ok((e.id.clone(), xi(rep_matrix(rep, &e.id)?))))
        .collect()
}

// ---------------------------------------------------------------------------
// Constructive momentum-zero assignment on leafless graphs.

/// Cotangent coordinates on one edge: unitary factor and moment vector.
#[derive(Debug, Clone)]
pub struct KV {
    pub k: Mat2,
    pub v: [f64; 3],
}

/// g = k sqrt(sI + v.sigma) with s = sqrt(1 + |v|^2); the inverse of the
/// (polar factor, moment vector) pair.
pub fn reconstruct(kv: &KV) -> Mat2 {
    let s = (1.0 + dot3(kv.v, kv.v)).sqrt();
    let p2 = pauli(kv.v) + Mat2::identity().scale(c(s, 0.0));
    kv.k * sqrt_pos_det1(&p2)
}

pub fn assignment_rep(kv: &BTreeMap<EdgeId, KV>) -> Representation {
    kv.iter().map(|(id, x)| (id.clone(), reconstruct(x))).collect()
}

pub fn random_unit_vector(rng: &mut ChaCha12Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let n = norm3(v);
        if n > 1e-3 {
            return scale3(v, 1.0 / n);
        }
    }
}

pub fn random_su2(rng: &mut ChaCha12Rng) -> Mat2 {
    let axis = random_unit_vector(rng);
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    rotation_about(axis, angle)
}

/// Momentum contributions of the already-assigned edges, summed over the
/// final vertices of one block.
fn block_momentum(
    kv: &BTreeMap<EdgeId, KV>,
    graph: &Graph,
    block: &BTreeSet<&str>,
) -> [f64; 3] {
    let mut total = [0.0; 3];
    for e in &graph.edges {
        let Some(x) = kv.get(&e.id) else { continue };
        if block.contains(e.src.as_str()) {
            total = add3(total, conj_vector(&x.k, x.v));
        }
        if block.contains(e.dst.as_str()) {
            total = sub3(total, x.v);
        }
    }
    total
}

/// Connected components of the vertex set under a set of (tree) edge ids.
fn components<'a>(graph: &'a Graph, edge_ids: &BTreeSet<EdgeId>) -> Vec<BTreeSet<&'a str>> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for start in &graph.vertices {
        if seen.contains(start.as_str()) {
            continue;
        }
        let mut block = BTreeSet::from([start.as_str()]);
        let mut stack = vec![start.as_str()];
        seen.insert(start);
        while let Some(v) = stack.pop() {
            for e in &graph.edges {
                if !edge_ids.contains(&e.id) {
                    continue;
                }
                if e.src == v || e.dst == v {
                    let w = e.other(v);
                    if seen.insert(w) {
                        block.insert(w);
                        stack.push(w);
                    }
                }
            }
        }
        out.push(block);
    }
    out
}

/// One-sided twist: rotate the contribution a set edge makes inside `block`
/// by `u`, leaving its contribution at the other endpoint fixed.  Returns
/// the change of the block момentum.
fn twist_edge(kv: &mut BTreeMap<EdgeId, KV>, graph: &Graph, id: &EdgeId, block: &BTreeSet<&str>, u: &Mat2) -> [f64; 3] {
    let e = graph.edge(id).unwrap();
    let x = kv.get_mut(id).unwrap();
    if block.contains(e.src.as_str()) {
        // Left contribution k.v -> (u k).v.
        let before = conj_vector(&x.k, x.v);
        x.k = *u * x.k;
        sub3(conj_vector(&x.k, x.v), before)
    } else {
        // Right contribution -v -> -(u.v); replace (k, v) by (k u*, u.v) so
        // the left side k.v is untouched.
        let before = scale3(x.v, -1.0);
        x.v = conj_vector(u, x.v);
        x.k = x.k * u.dagger();
        sub3(scale3(x.v, -1.0), before)
    }
}

/// A set edge with an endpoint in the block, preferring edges with a usable
/// nonzero contribution there.
fn incident_set_edge<'a>(
    kv: &BTreeMap<EdgeId, KV>,
    graph: &'a Graph,
    block: &BTreeSet<&str>,
) -> Option<(&'a EdgeId, [f64; 3])> {
    for e in &graph.edges {
        let Some(x) = kv.get(&e.id) else { continue };
        if block.contains(e.src.as_str()) {
            return Some((&e.id, conj_vector(&x.k, x.v)));
        }
        if block.contains(e.dst.as_str()) {
            return Some((&e.id, scale3(x.v, -1.0)));
        }
    }
    None
}

/// Rotation by the angle that moves a contribution of norm |c| by exactly
/// `rho`, about an axis perpendicular to c.
fn norm_matched_rotation(contribution: [f64; 3], rho: f64, rng: &mut ChaCha12Rng) -> Mat2 {
    let n = norm3(contribution);
    debug_assert!(rho <= 2.0 * n);
    let mut axis = cross3(contribution, random_unit_vector(rng));
    while norm3(axis) < 1e-9 * n {
        axis = cross3(contribution, random_unit_vector(rng));
    }
    let axis = scale3(axis, 1.0 / norm3(axis));
    let angle = 2.0 * (rho / (2.0 * n)).asin();
    rotation_about(axis, angle)
}

/// Exact momentum-zero cotangent data with every moment vector nonzero, by
/// contracting a spanning tree to a rose and re-expanding edge by edge.  On
/// the rose any vectors with unitary factor Id balance; each expansion of a
/// tree edge f splits a block with zero total momentum into sides with
/// momenta r and -r, and (k, v) = (Id, -r) on f rebalances both.  When r
/// vanishes (always the case when f bridges two internally balanced sides,
/// e.g. the dumbbell bridge) the construction first applies norm-matched
/// one-sided twists to a set edge on each side, making the two sides'
/// momenta nonzero with equal norms, then places v = (sink-side momentum)
/// on f with the unitary factor rotating it onto the source-side deficit.
pub fn leafless_assignment(graph: &Graph, seed: u64) -> Result<BTreeMap<EdgeId, KV>> {
    for v in &graph.vertices {
        if graph.valence(v) < 2 {
            return Err(Error::NotLeafless(format!("vertex `{v}` is a leaf")));
        }
    }
    if !graph.is_connected() {
        return Err(Error::NotLeafless("graph is not connected".to_string()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let tree = crate::graph::spanning_trees(graph)
        .into_iter()
        .next()
        .unwrap_or_default();

    let mut kv: BTreeMap<EdgeId, KV> = BTreeMap::new();
    for e in &graph.edges {
        if !tree.contains(&e.id) {
            kv.insert(
                e.id.clone(),
                KV {
                    k: Mat2::identity(),
                    v: random_unit_vector(&mut rng),
                },
            );
        }
    }

    // Expand tree edges in reverse lexicographic order; `unexpanded` always
    // holds the edges still contracted, defining the current blocks.
    let mut order: Vec<EdgeId> = tree.iter().cloned().collect();
    order.sort();
    let mut unexpanded: BTreeSet<EdgeId> = tree.clone();
    for f_id in order.into_iter().rev() {
        unexpanded.remove(&f_id);
        let f = graph.edge(&f_id)?;
        let blocks = components(graph, &unexpanded);
        let side_a = blocks
            .iter()
            .find(|b| b.contains(f.src.as_str()))
            .expect("src block")
            .clone();
        let side_b = blocks
            .iter()
            .find(|b| b.contains(f.dst.as_str()))
            .expect("dst block")
            .clone();
        let mut r_a = block_momentum(&kv, graph, &side_a);
        let mut r_b = block_momentum(&kv, graph, &side_b);

        let min_set_norm = kv
            .values()
            .map(|x| norm3(x.v))
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        if norm3(r_a) < 1e-8 * min_set_norm {
            // Balanced split: manufacture equal-norm deficits on the two
            // sides with one-sided twists, which leave every other block's
            // momentum untouched.
            let (ea, ca) = incident_set_edge(&kv, graph, &side_a).expect("leafless side has a set edge");
            let ea = ea.clone();
            let (eb, cb) = incident_set_edge(&kv, graph, &side_b).expect("leafless side has a set edge");
            let eb = eb.clone();
            let rho = 0.5 * norm3(ca).min(norm3(cb));
            let ua = norm_matched_rotation(ca, rho, &mut rng);
            let delta_a = twist_edge(&mut kv, graph, &ea, &side_a, &ua);
            // Recompute the B-side contribution in case ea == eb.
            let cb = incident_set_edge(&kv, graph, &side_b)
                .filter(|(id, _)| **id == eb)
                .map(|(_, c)| c)
                .unwrap_or(cb);
            let ub = norm_matched_rotation(cb, rho, &mut rng);
            let delta_b = twist_edge(&mut kv, graph, &eb, &side_b, &ub);
            r_a = add3(r_a, delta_a);
            r_b = add3(r_b, delta_b);
        }

        // Place f: sink side needs v = r_b, source side needs k.v = -r_a.
        let v = r_b;
        let k = rotation_between(v, scale3(r_a, -1.0));
        kv.insert(f_id, KV { k, v });
    }
    Ok(kv)
}

// ---------------------------------------------------------------------------
// Torus action on the dense stratum.

/// Acts by the edge circle angles: g = k p becomes k h* t(theta) h p where h
/// diagonalizes the moment vector and t = diag(e^{i theta}, e^{-i theta}).
/// Preserves every moment vector and every vertex momentum.
pub fn torus_action(
    rep: &Representation,
    graph: &Graph,
    angles: &BTreeMap<EdgeId, f64>,
    min_length: f64,
) -> Result<Representation> {
    let mut out = rep.clone();
    for (id, &theta) in angles {
        graph.edge(id)?;
        let g = rep_matrix(rep, id)?;
        let v = moment_vector(g)?;
        if norm3(v) <= min_length {
            return Err(Error::ZeroMomentumEdge(id.clone()));
        }
        let (k, p) = polar(g);
        let h = diagonalizer(v);
        let t = Mat2::new(
            c(theta.cos(), theta.sin()),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(theta.cos(), -theta.sin()),
        );
        out.insert(id.clone(), k * h.dagger() * t * h * p);
    }
    Ok(out)
}

/// Edges with near-zero length; the complement-induced subgraph must be
/// leafless for a genuinely momentum-zero representation.
pub fn fiber_stratum(
    rep: &Representation,
    graph: &Graph,
    momentum_tol: f64,
    length_tol: f64,
) -> Result<BTreeSet<EdgeId>> {
    let residual = momentum_residual(rep, graph)?;
    if residual >= momentum_tol {
        return Err(Error::NotMomentumZero(residual));
    }
    let s: BTreeSet<EdgeId> = graph
        .edges
        .iter()
        .filter(|e| xi(&rep[&e.id]) < length_tol)
        .map(|e| e.id.clone())
        .collect();
    if !crate::graph::complement_is_leafless(graph, &s) {
        return Err(Error::NotLeafless(format!(
            "zero stratum {s:?} leaves a leaf behind"
        )));
    }
    Ok(s)
}

/// A seeded random positive (unitary part Id) representation.
pub fn random_positive_rep(graph: &Graph, seed: u64) -> Representation {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut ids: Vec<EdgeId> = graph.edges.iter().map(|e| e.id.clone()).collect();
    ids.sort();
    ids.into_iter()
        .map(|id| {
            let v = scale3(random_unit_vector(&mut rng), rng.random_range(0.2..2.0));
            (id.clone(), reconstruct(&KV { k: Mat2::identity(), v }))
        })
        .collect()
}

/// A seeded random SU(2) representation (every edge length zero).
pub fn random_unitary_rep(graph: &Graph, seed: u64) -> Representation {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut ids: Vec<EdgeId> = graph.edges.iter().map(|e| e.id.clone()).collect();
    ids.sort();
    ids.into_iter().map(|id| (id, random_su2(&mut rng))).collect()
}
