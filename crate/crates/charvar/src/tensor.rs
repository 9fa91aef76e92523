//! Graph tensors: closed strands on a graph, their signed Plucker-coordinate
//! evaluation against an SL2 representation of the edge set, and the direct
//! trace-word evaluation they must agree with.
//!
//! Each edge carries one matrix; by convention the matrix sits at the source
//! end of the edge and the identity at the sink end.  A strand traversal
//! therefore departs through column `out` of the start-end matrix and
//! arrives in column `in` of the finish-end matrix, and each junction of
//! consecutive traversals contributes the determinant of the arriving and
//! departing columns.  The marking of a traversal picks (out, in) = (2, 1)
//! with sign +1 or (1, 2) with sign -1; summing the signed products over all
//! markings of all traversals yields the tensor value.  The convention is
//! pinned by the trace cross-check tests below, which it must satisfy
//! exactly (any of the three other sign tables fails them).

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Marking};
use crate::mat2::{c, det2, Mat2, C};
use crate::spin::Weighting;
use crate::words::{self, EdgeLoop, Step, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// SL2 matrices indexed by edge id.
pub type Representation = BTreeMap<EdgeId, Mat2>;

/// Closed reduced strands on a carrier graph.  A connected tensor has a
/// single strand; disconnected tensors evaluate to the product over strands.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTensor {
    pub graph: Graph,
    pub strands: Vec<EdgeLoop>,
}

impl GammaTensor {
    /// Closure and reducedness of every strand.
    pub fn validate(&self) -> Result<()> {
        for strand in &self.strands {
            if strand.is_empty() {
                return Err(Error::InvalidWord("empty strand".to_string()));
            }
            for i in 0..strand.len() {
                let next = &strand[(i + 1) % strand.len()];
                if strand[i].end(&self.graph)? != next.start(&self.graph)? {
                    return Err(Error::InvalidMarking(format!(
                        "strand breaks between `{}` and `{}`",
                        strand[i].edge, next.edge
                    )));
                }
                if strand.len() > 1 && strand[i].cancels(next) {
                    return Err(Error::InvalidMarking(format!(
                        "strand backtracks on `{}`",
                        strand[i].edge
                    )));
                }
            }
        }
        Ok(())
    }

    /// Traversal counts per edge, zeros included: the spin weighting of the
    /// tensor.
    pub fn weights(&self) -> Weighting {
        let mut w: Weighting = self
            .graph
            .edges
            .iter()
            .map(|e| (e.id.clone(), 0))
            .collect();
        for strand in &self.strands {
            for s in strand {
                *w.get_mut(&s.edge).unwrap() += 1;
            }
        }
        w
    }

    pub fn is_connected(&self) -> bool {
        self.strands.len() == 1
    }
}

/// The connected tensor of a word: its reduced loop under the marking.
pub fn word_to_tensor(word: &[i32], marking: &Marking) -> Result<GammaTensor> {
    let reduced = words::reduce(word);
    if reduced.is_empty() {
        return Err(Error::InvalidWord("empty word has no tensor".to_string()));
    }
    let strand = words::loop_reduce(&words::pushforward(&reduced, marking)?);
    let t = GammaTensor {
        graph: marking.graph.clone(),
        strands: vec![strand],
    };
    t.validate()?;
    Ok(t)
}

/// Reads each strand back to a canonical word through the marking.
pub fn tensor_readback(tensor: &GammaTensor, marking: &Marking) -> Vec<Word> {
    tensor
        .strands
        .iter()
        .map(|s| words::cyclic_canonical(&words::readback(s, marking)))
        .collect()
}

/// Plucker coordinate: determinant of column `a` of `m` against column `b`
/// of `n` (1-indexed).
pub fn plucker(m: &Mat2, a: usize, n: &Mat2, b: usize) -> C {
    det2(m.col(a), n.col(b))
}

fn validate_rep(tensor: &GammaTensor, rep: &Representation) -> Result<()> {
    for strand in &tensor.strands {
        for s in strand {
            let m = rep
                .get(&s.edge)
                .ok_or_else(|| Error::UnknownEdge(format!("representation misses `{}`", s.edge)))?;
            if (m.det() - c(1.0, 0.0)).norm() > 1e-9 {
                return Err(Error::InvalidMetric(format!(
                    "matrix on `{}` is not in SL2",
                    s.edge
                )));
            }
        }
    }
    Ok(())
}

/// Matrices at the two ends of a traversal: (start-end, finish-end).
fn end_matrices(step: &Step, rep: &Representation) -> (Mat2, Mat2) {
    let a = rep[&step.edge];
    if step.fwd {
        (a, Mat2::identity())
    } else {
        (Mat2::identity(), a)
    }
}

/// Column labels and sign of a traversal marking.
fn marking_of(m: usize) -> (usize, usize, f64) {
    if m == 0 {
        (2, 1, 1.0) // (out, in), sign
    } else {
        (1, 2, -1.0)
    }
}

fn strand_value(strand: &[Step], rep: &Representation) -> C {
    // The signed sum over all 2^L traversal markings factors through a
    // cyclic transfer-matrix contraction: entry (m_i, m_{i+1}) of T_i is the
    // junction determinant between traversals i and i+1 times the sign of
    // m_i, and the total is tr(T_0 ... T_{L-1}).
    let l = strand.len();
    let mut product = Mat2::identity();
    for i in 0..l {
        let (_, fin_i) = end_matrices(&strand[i], rep);
        let (start_next, _) = end_matrices(&strand[(i + 1) % l], rep);
        let mut t = Mat2::zero();
        for mi in 0..2 {
            let (_, inn, sign) = marking_of(mi);
            for mn in 0..2 {
                let (out, _, _) = marking_of(mn);
                let val = det2(fin_i.col(inn), start_next.col(out)) * sign;
                match (mi, mn) {
                    (0, 0) => t.a = val,
                    (0, 1) => t.b = val,
                    (1, 0) => t.c = val,
                    _ => t.d = val,
                }
            }
        }
        product = product * t;
    }
    product.trace()
}

/// Exhaustive signed sum over the 2^L markings of one strand; the oracle the
/// transfer-matrix contraction is tested against.
pub fn strand_value_enumerated(strand: &[Step], rep: &Representation) -> C {
    let l = strand.len();
    assert!(l <= 20, "enumeration oracle capped at 20 crossings");
    let mut total = c(0.0, 0.0);
    for mask in 0u32..(1 << l) {
        let mut term = c(1.0, 0.0);
        for i in 0..l {
            let (_, inn, sign) = marking_of((mask >> i & 1) as usize);
            let (out, _, _) = marking_of((mask >> ((i + 1) % l) & 1) as usize);
            let (_, fin_i) = end_matrices(&strand[i], rep);
            let (start_next, _) = end_matrices(&strand[(i + 1) % l], rep);
            term *= det2(fin_i.col(inn), start_next.col(out)) * sign;
        }
        total += term;
    }
    total
}

/// Signed Plucker evaluation of the tensor; disconnected tensors multiply.
pub fn evaluate_tensor(tensor: &GammaTensor, rep: &Representation) -> Result<C> {
    tensor.validate()?;
    validate_rep(tensor, rep)?;
    let mut value = c(1.0, 0.0);
    for strand in &tensor.strands {
        value *= strand_value(strand, rep);
    }
    Ok(value)
}

/// The matrix of one generator: the ordered product of edge matrices along
/// the marking's image of x_k (tree path, generator edge, tree path back).
/// Backward traversals contribute the adjugate, the SL2 inverse.
pub fn generator_matrices(marking: &Marking, rep: &Representation) -> Result<Vec<Mat2>> {
    let g = marking.genus();
    let mut out = Vec::with_capacity(g);
    for k in 1..=g {
        let path = words::pushforward(&[k as i32], marking)?;
        let mut m = Mat2::identity();
        for s in &path {
            let a = rep
                .get(&s.edge)
                .ok_or_else(|| Error::UnknownEdge(format!("representation misses `{}`", s.edge)))?;
            m = m * if s.fwd { *a } else { a.adjugate() };
        }
        out.push(m);
    }
    Ok(out)
}

/// tr(word(M_1, ..., M_g)) with the generator matrices of the marking.
pub fn trace_word_eval(word: &[i32], rep: &Representation, marking: &Marking) -> Result<C> {
    let reduced = words::reduce(word);
    words::check_rank(&reduced, marking.genus())?;
    let gens = generator_matrices(marking, rep)?;
    let mut m = Mat2::identity();
    for &k in &reduced {
        let base = gens[(k.unsigned_abs() - 1) as usize];
        m = m * if k > 0 { base } else { base.adjugate() };
    }
    Ok(m.trace())
}

/// Seeded random SL2 representation: Gaussian complex entries rescaled to
/// determinant one, resampled while the determinant is tiny.
pub fn random_rep(graph: &Graph, seed: u64) -> Representation {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rep = Representation::new();
    let mut ids: Vec<EdgeId> = graph.edges.iter().map(|e| e.id.clone()).collect();
    ids.sort();
    for id in ids {
        let m = loop {
            let mut draw = || {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                c(re, im)
            };
            let m = Mat2::new(draw(), draw(), draw(), draw());
            if m.det().norm() >= 1e-6 {
                break m.scale(m.det().sqrt().inv());
            }
        };
        rep.insert(id, m);
    }
    rep
}

// ---------------------------------------------------------------------------
// JSON interchange.

#[derive(Debug, Serialize, Deserialize)]
pub struct RepFile {
    pub edges: BTreeMap<EdgeId, [[f64; 2]; 4]>,
}

impl RepFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("representation serialization cannot fail")
    }

    pub fn representation(&self) -> Representation {
        self.edges
            .iter()
            .map(|(id, rows)| {
                let e = |i: usize| c(rows[i][0], rows[i][1]);
                (id.clone(), Mat2::new(e(0), e(1), e(2), e(3)))
            })
            .collect()
    }

    pub fn from_representation(rep: &Representation) -> Self {
        RepFile {
            edges: rep
                .iter()
                .map(|(id, m)| {
                    let f = |x: C| [x.re, x.im];
                    (id.clone(), [f(m.a), f(m.b), f(m.c), f(m.d)])
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{dumbbell, rose, theta};
    use crate::mat2::c;
    use proptest::prelude::*;

    fn rep_of(pairs: &[(&str, Mat2)]) -> Representation {
        pairs.iter().map(|(k, m)| (k.to_string(), *m)).collect()
    }

    fn diag(x: f64, y: f64) -> Mat2 {
        Mat2::new(c(x, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(y, 0.0))
    }

    #[test]
    fn rose_word_traces() {
        let m = rose(1);
        let rep = rep_of(&[("x1", diag(2.0, 0.5))]);
        let t = word_to_tensor(&[1], &m).unwrap();
        assert_eq!(t.weights()["x1"], 1);
        assert!((evaluate_tensor(&t, &rep).unwrap() - c(2.5, 0.0)).norm() < 1e-12);
        let t2 = word_to_tensor(&[1, 1], &m).unwrap();
        assert!((evaluate_tensor(&t2, &rep).unwrap() - c(4.25, 0.0)).norm() < 1e-12);
        let tinv = word_to_tensor(&[-1], &m).unwrap();
        assert!((evaluate_tensor(&tinv, &rep).unwrap() - c(2.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_rep_gives_two() {
        let m = theta();
        let rep = rep_of(&[
            ("p", Mat2::identity()),
            ("q", Mat2::identity()),
            ("r", Mat2::identity()),
        ]);
        for w in [vec![1], vec![1, -2], vec![1, 2], vec![2, 2]] {
            let t = word_to_tensor(&w, &m).unwrap();
            assert!((evaluate_tensor(&t, &rep).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn theta_single_letter_matches_hand_trace() {
        // Loop (q,+),(p,-) evaluates to tr(Q P^{-1}).
        let m = theta();
        let q = Mat2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        let p = Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        let rep = rep_of(&[("p", p), ("q", q), ("r", Mat2::identity())]);
        let t = word_to_tensor(&[1], &m).unwrap();
        let direct = (q * p.adjugate()).trace();
        assert!((direct - c(1.0, 0.0)).norm() < 1e-15);
        assert!((evaluate_tensor(&t, &rep).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn tensor_weights_match_word_weights() {
        let m = theta();
        let t = word_to_tensor(&[1, -2], &m).unwrap();
        assert_eq!(t.weights(), words::edge_weights(&[1, -2], &m).unwrap());
        assert!(t.is_connected());
    }

    #[test]
    fn empty_word_rejected() {
        assert!(word_to_tensor(&[], &rose(1)).is_err());
        assert!(word_to_tensor(&[1, -1], &rose(1)).is_err());
    }

    #[test]
    fn plucker_identities() {
        let m = Mat2::new(c(3.0, 1.0), c(2.0, -1.0), c(0.5, 0.0), c(1.0, 1.0));
        let d = m.det();
        let unit = m.scale(d.sqrt().inv());
        assert!((plucker(&unit, 1, &unit, 2) - c(1.0, 0.0)).norm() < 1e-12);
        let n = Mat2::new(c(1.0, 2.0), c(0.0, 1.0), c(2.0, 0.0), c(1.0, -1.0));
        assert!((plucker(&m, 1, &n, 2) + plucker(&n, 2, &m, 1)).norm() < 1e-15);
    }

    #[test]
    fn plucker_three_term_relation() {
        let cols = [
            [c(1.0, 0.5), c(2.0, 0.0)],
            [c(0.0, 1.0), c(1.0, 1.0)],
            [c(3.0, -1.0), c(0.5, 0.0)],
            [c(1.0, 0.0), c(-1.0, 2.0)],
        ];
        let p = |i: usize, j: usize| det2(cols[i - 1], cols[j - 1]);
        let lhs = p(1, 2) * p(3, 4) + p(1, 4) * p(2, 3);
        let rhs = p(1, 3) * p(2, 4);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn trace_word_eval_trivia() {
        let m = rose(2);
        let rep = random_rep(&m.graph, 7);
        assert!((trace_word_eval(&[], &rep, &m).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        assert!((trace_word_eval(&[1, -1], &rep, &m).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn random_rep_is_unimodular_and_seeded() {
        let g = theta().graph;
        let r1 = random_rep(&g, 42);
        let r2 = random_rep(&g, 42);
        let r3 = random_rep(&g, 43);
        for (id, m) in &r1 {
            assert!((m.det() - c(1.0, 0.0)).norm() < 1e-12);
            assert!(m.approx_eq(&r2[id], 0.0));
        }
        assert!(r1.iter().any(|(id, m)| !m.approx_eq(&r3[id], 1e-6)));
    }

    #[test]
    fn rep_file_round_trip() {
        let g = dumbbell().graph;
        let rep = random_rep(&g, 5);
        let text = RepFile::from_representation(&rep).to_json();
        let back = RepFile::from_json(&text).unwrap().representation();
        for (id, m) in &rep {
            assert!(m.approx_eq(&back[id], 1e-15));
        }
    }

    fn arb_word(g: i32, max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(
            (1..=g, prop::bool::ANY).prop_map(|(k, neg)| if neg { -k } else { k }),
            1..=max_len,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn transfer_matches_enumeration(w in arb_word(2, 5), seed in 0u64..32) {
            for m in [theta(), dumbbell(), rose(2)] {
                let red = words::reduce(&w);
                if words::cyclic_reduce(&red).is_empty() {
                    continue;
                }
                let t = word_to_tensor(&red, &m).unwrap();
                if t.strands[0].len() > 14 {
                    continue;
                }
                let rep = random_rep(&m.graph, seed);
                let fast = evaluate_tensor(&t, &rep).unwrap();
                let slow = strand_value_enumerated(&t.strands[0], &rep);
                prop_assert!((fast - slow).norm() < 1e-9 * (1.0 + slow.norm()));
            }
        }

        #[test]
        fn tensor_matches_trace(w in arb_word(3, 8), seed in 0u64..64) {
            for m in [theta(), dumbbell(), rose(3)] {
                let red = words::reduce(&w);
                let cyc = words::cyclic_reduce(&red);
                if cyc.is_empty() || words::check_rank(&red, m.genus()).is_err() {
                    continue;
                }
                let rep = random_rep(&m.graph, seed);
                let tr = trace_word_eval(&red, &rep, &m).unwrap();
                let tv = evaluate_tensor(&word_to_tensor(&red, &m).unwrap(), &rep).unwrap();
                prop_assert!(
                    (tv - tr).norm() < 1e-9 * (1.0 + tr.norm()),
                    "word {:?}: tensor {} vs trace {}", red, tv, tr
                );
            }
        }

        #[test]
        fn trace_symmetry(w in arb_word(2, 8), seed in 0u64..16) {
            let m = rose(2);
            let rep = random_rep(&m.graph, seed);
            let red = words::reduce(&w);
            let base = trace_word_eval(&red, &rep, &m).unwrap();
            let inv = trace_word_eval(&words::invert(&red), &rep, &m).unwrap();
            prop_assert!((base - inv).norm() < 1e-12 * (1.0 + base.norm()));
            if !red.is_empty() {
                let rot: Word = red[1..].iter().chain(&red[..1]).copied().collect();
                // Rotation of a reduced word need not be reduced; reduce first.
                let rot = words::reduce(&rot);
                let rotv = trace_word_eval(&rot, &rep, &m).unwrap();
                prop_assert!((base - rotv).norm() < 1e-12 * (1.0 + base.norm()));
            }
        }

        #[test]
        fn readback_recovers_word(w in arb_word(3, 8), which in 0usize..3) {
            let markings = [theta(), dumbbell(), rose(3)];
            let m = &markings[which];
            let red = words::reduce(&w);
            if words::cyclic_reduce(&red).is_empty()
                || words::check_rank(&red, m.genus()).is_err()
            {
                return Ok(());
            }
            let t = word_to_tensor(&red, m).unwrap();
            prop_assert_eq!(
                tensor_readback(&t, m),
                vec![words::cyclic_canonical(&red)]
            );
        }

        #[test]
        fn orientation_flip_invariance(w in arb_word(2, 6), seed in 0u64..16) {
            // Reverse one edge of the theta graph, transport the strands
            // (same geometric paths, so traversals of that edge swap
            // direction flags), and replace its matrix by the adjugate;
            // the evaluation must be unchanged.
            let m = theta();
            let red = words::reduce(&w);
            if words::cyclic_reduce(&red).is_empty() {
                return Ok(());
            }
            let rep = random_rep(&m.graph, seed);
            let t = word_to_tensor(&red, &m).unwrap();
            let base = evaluate_tensor(&t, &rep).unwrap();

            let mut graph2 = m.graph.clone();
            let e = graph2.edges.iter_mut().find(|e| e.id == "q").unwrap();
            std::mem::swap(&mut e.src, &mut e.dst);
            let strands2: Vec<EdgeLoop> = t
                .strands
                .iter()
                .map(|s| {
                    s.iter()
                        .map(|step| {
                            if step.edge == "q" {
                                step.reversed()
                            } else {
                                step.clone()
                            }
                        })
                        .collect()
                })
                .collect();
            let t2 = GammaTensor { graph: graph2, strands: strands2 };
            let mut rep2 = rep.clone();
            rep2.insert("q".to_string(), rep["q"].adjugate());
            let v2 = evaluate_tensor(&t2, &rep2).unwrap();
            prop_assert!((base - v2).norm() < 1e-9 * (1.0 + base.norm()));
        }

        #[test]
        fn sl2_trace_relation(seed in 0u64..64) {
            let m = rose(2);
            let rep = random_rep(&m.graph, seed);
            let ev = |w: &[i32]| {
                evaluate_tensor(&word_to_tensor(w, &m).unwrap(), &rep).unwrap()
            };
            let lhs = ev(&[1, 2]) + ev(&[1, -2]);
            let rhs = ev(&[1]) * ev(&[2]);
            prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
        }
    }
}
