//! Free-group words and their images on marked graphs: reduction, cyclic
//! canonical forms, pushforward along a marking, backtrack elimination,
//! edge weights and length functions.
//!
//! A word is a sequence of nonzero signed integers; `k` stands for the
//! generator x_k and `-k` for its inverse.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Marking, Metric, VertexId};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

pub type Word = Vec<i32>;

/// One traversal of an edge, forward (source to sink) or backward.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Step {
    pub edge: EdgeId,
    pub fwd: bool,
}

impl Step {
    pub fn new(edge: &str, fwd: bool) -> Self {
        Step {
            edge: edge.to_string(),
            fwd,
        }
    }

    pub fn reversed(&self) -> Self {
        Step {
            edge: self.edge.clone(),
            fwd: !self.fwd,
        }
    }

    /// Two steps cancel when one immediately undoes the other.
    pub fn cancels(&self, other: &Step) -> bool {
        self.edge == other.edge && self.fwd != other.fwd
    }

    /// Vertex this traversal departs from.
    pub fn start<'a>(&self, graph: &'a crate::graph::Graph) -> Result<&'a VertexId> {
        let e = graph.edge(&self.edge)?;
        Ok(if self.fwd { &e.src } else { &e.dst })
    }

    /// Vertex this traversal arrives at.
    pub fn end<'a>(&self, graph: &'a crate::graph::Graph) -> Result<&'a VertexId> {
        let e = graph.edge(&self.edge)?;
        Ok(if self.fwd { &e.dst } else { &e.src })
    }
}

/// A cyclic sequence of edge traversals.
pub type EdgeLoop = Vec<Step>;

pub fn parse_word(text: &str) -> Result<Word> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let k: i32 = tok
            .parse()
            .map_err(|_| Error::InvalidWord(format!("bad letter `{tok}`")))?;
        if k == 0 {
            return Err(Error::InvalidWord("letter 0 is not allowed".to_string()));
        }
        out.push(k);
    }
    Ok(out)
}

pub fn format_word(word: &[i32]) -> String {
    word.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn check_rank(word: &[i32], g: usize) -> Result<()> {
    for &k in word {
        if k == 0 || k.unsigned_abs() as usize > g {
            return Err(Error::InvalidWord(format!(
                "letter {k} outside rank {g}"
            )));
        }
    }
    Ok(())
}

pub fn parse_loop(text: &str) -> Result<EdgeLoop> {
    let mut out = Vec::new();
    for tok in text.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let (edge, dir) = tok
            .rsplit_once(':')
            .ok_or_else(|| Error::Parse(format!("bad traversal `{tok}`")))?;
        let fwd = match dir {
            "+" => true,
            "-" => false,
            _ => return Err(Error::Parse(format!("bad direction `{dir}`"))),
        };
        out.push(Step::new(edge, fwd));
    }
    Ok(out)
}

pub fn format_loop(steps: &[Step]) -> String {
    let mut s = String::new();
    for (i, step) in steps.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{}:{}", step.edge, if step.fwd { '+' } else { '-' });
    }
    s
}

pub fn invert(word: &[i32]) -> Word {
    word.iter().rev().map(|&k| -k).collect()
}

/// Cancel adjacent inverse pairs until none remain.
pub fn reduce(word: &[i32]) -> Word {
    let mut stack: Word = Vec::with_capacity(word.len());
    for &k in word {
        if stack.last() == Some(&-k) {
            stack.pop();
        } else {
            stack.push(k);
        }
    }
    stack
}

/// Reduce, then cancel first-against-last letters.
pub fn cyclic_reduce(word: &[i32]) -> Word {
    let mut w = reduce(word);
    while w.len() >= 2 && w[0] == -w[w.len() - 1] {
        w.pop();
        w.remove(0);
    }
    w
}

/// Letter order for canonical forms: 1 < -1 < 2 < -2 < ...
fn letter_rank(k: i32) -> (u32, bool) {
    (k.unsigned_abs(), k < 0)
}

fn rank_lex_less(a: &[i32], b: &[i32]) -> bool {
    let ra = a.iter().map(|&k| letter_rank(k));
    let rb = b.iter().map(|&k| letter_rank(k));
    ra.cmp(rb) == std::cmp::Ordering::Less
}

/// Least sequence among all rotations of the cyclic reduction and of its
/// inverse; the canonical representative of a trace-word function.
pub fn cyclic_canonical(word: &[i32]) -> Word {
    let w = cyclic_reduce(word);
    if w.is_empty() {
        return w;
    }
    let mut best = w.clone();
    for cand in [w.clone(), invert(&w)] {
        for r in 0..cand.len() {
            let rot: Word = cand[r..].iter().chain(&cand[..r]).copied().collect();
            if rank_lex_less(&rot, &best) {
                best = rot;
            }
        }
    }
    best
}

/// Comparator used for deterministic word listings: by length, then by the
/// canonical letter order.
pub fn word_order(a: &[i32], b: &[i32]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .map(|&k| letter_rank(k))
            .cmp(b.iter().map(|&k| letter_rank(k)))
    })
}

/// The nonempty trace-word classes in rank `g` in which every generator
/// index occurs at most twice, counting both signs.  Each class is listed by
/// its canonical form, in [`word_order`].
pub fn enumerate_s2g(g: usize) -> Vec<Word> {
    assert!(g >= 1 && g <= 4, "enumeration supported for rank 1..=4");
    let mut seen: BTreeSet<Word> = BTreeSet::new();
    let mut counts = vec![0usize; g + 1];
    let mut cur: Word = Vec::new();
    fn dfs(
        g: usize,
        cur: &mut Word,
        counts: &mut Vec<usize>,
        seen: &mut BTreeSet<Word>,
    ) {
        if !cur.is_empty() {
            let canon = cyclic_canonical(cur);
            if !canon.is_empty() {
                seen.insert(canon);
            }
        }
        if cur.len() == 2 * g {
            return;
        }
        for idx in 1..=g {
            if counts[idx] == 2 {
                continue;
            }
            for k in [idx as i32, -(idx as i32)] {
                if cur.last() == Some(&-k) {
                    continue;
                }
                cur.push(k);
                counts[idx] += 1;
                dfs(g, cur, counts, seen);
                counts[idx] -= 1;
                cur.pop();
            }
        }
    }
    dfs(g, &mut cur, &mut counts, &mut seen);
    let mut out: Vec<Word> = seen.into_iter().collect();
    out.sort_by(|a, b| word_order(a, b));
    out
}

/// Unique path from `a` to `b` through the spanning tree, as steps.
fn tree_path(m: &Marking, a: &str, b: &str) -> Vec<Step> {
    if a == b {
        return Vec::new();
    }
    let mut prev: BTreeMap<&str, Step> = BTreeMap::new();
    let mut queue = VecDeque::from([a]);
    let mut seen = BTreeSet::from([a]);
    while let Some(v) = queue.pop_front() {
        if v == b {
            break;
        }
        for id in &m.tree {
            let e = m.graph.edge(id).unwrap();
            for (from, to, fwd) in [(&e.src, &e.dst, true), (&e.dst, &e.src, false)] {
                if from == v && seen.insert(to) {
                    prev.insert(to, Step::new(id, fwd));
                    queue.push_back(to);
                }
            }
        }
    }
    let mut path = Vec::new();
    let mut v = b;
    while v != a {
        let step = prev.get(v).expect("tree spans the graph").clone();
        v = step.start(&m.graph).unwrap();
        path.push(step);
    }
    path.reverse();
    path
}

/// Replace each letter of the word by tree path, generator edge, tree path
/// back to the basepoint.  The result is a cellular loop at the basepoint,
/// not yet reduced.
pub fn pushforward(word: &[i32], m: &Marking) -> Result<EdgeLoop> {
    m.validate()?;
    check_rank(word, m.genus())?;
    let base = m.basepoint.as_str();
    let mut out = Vec::new();
    for &k in word {
        let gen = &m.generators[(k.unsigned_abs() - 1) as usize];
        let e = m.graph.edge(gen)?;
        let (enter, exit, fwd) = if k > 0 {
            (&e.src, &e.dst, true)
        } else {
            (&e.dst, &e.src, false)
        };
        out.extend(tree_path(m, base, enter));
        out.push(Step::new(gen, fwd));
        out.extend(tree_path(m, exit, base));
    }
    Ok(out)
}

/// Eliminate backtracks, including across the cyclic seam.  The normal form
/// is independent of elimination order.
pub fn loop_reduce(steps: &[Step]) -> EdgeLoop {
    let mut stack: Vec<Step> = Vec::with_capacity(steps.len());
    for s in steps {
        if stack.last().is_some_and(|t| t.cancels(s)) {
            stack.pop();
        } else {
            stack.push(s.clone());
        }
    }
    while stack.len() >= 2 && stack[0].cancels(stack.last().unwrap()) {
        stack.pop();
        stack.remove(0);
    }
    stack
}

/// Read a loop back to a word: generator edges contribute their signed
/// index, tree edges nothing.
pub fn readback(steps: &[Step], m: &Marking) -> Word {
    let mut out = Vec::new();
    for s in steps {
        if let Some(i) = m.generators.iter().position(|g| *g == s.edge) {
            let k = (i + 1) as i32;
            out.push(if s.fwd { k } else { -k });
        }
    }
    out
}

/// Traversal counts per edge of the reduced loop of `word`; zero entries are
/// present for untouched edges.
pub fn edge_weights(word: &[i32], m: &Marking) -> Result<BTreeMap<EdgeId, usize>> {
    let reduced = loop_reduce(&pushforward(&reduce(word), m)?);
    let mut weights: BTreeMap<EdgeId, usize> = m
        .graph
        .edges
        .iter()
        .map(|e| (e.id.clone(), 0))
        .collect();
    for s in &reduced {
        *weights.get_mut(&s.edge).unwrap() += 1;
    }
    Ok(weights)
}

/// Metric length of the reduced loop: d_omega = sum l(e) a(e).  Generic so
/// the same routine serves exact rational and floating metrics.
pub fn length<T>(word: &[i32], m: &Marking, metric: &Metric<T>) -> Result<T>
where
    T: Zero + Clone + std::ops::AddAssign,
{
    crate::graph::validate_metric(&m.graph, metric)?;
    let weights = edge_weights(word, m)?;
    let mut total = T::zero();
    for (edge, a) in &weights {
        for _ in 0..*a {
            total += metric[edge].clone();
        }
    }
    Ok(total)
}

/// Substitute each generator by its image and reduce.
pub fn apply_automorphism(word: &[i32], images: &[Word]) -> Result<Word> {
    check_rank(word, images.len())?;
    let mut out = Vec::new();
    for &k in word {
        let img = &images[(k.unsigned_abs() - 1) as usize];
        if k > 0 {
            out.extend_from_slice(img);
        } else {
            out.extend(invert(img));
        }
    }
    Ok(reduce(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{dumbbell, rose, theta};
    use proptest::prelude::*;

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&[1, 2, -2, 1]), vec![1, 1]);
        assert_eq!(reduce(&[1, -1]), Vec::<i32>::new());
        assert_eq!(reduce(&[2, -1, 1, -2, 3]), vec![3]);
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(cyclic_canonical(&[1, 2, -1]), cyclic_canonical(&[2]));
        assert_eq!(cyclic_canonical(&[2, 1]), cyclic_canonical(&[1, 2]));
        assert_eq!(cyclic_canonical(&[1, 2]), cyclic_canonical(&[-2, -1]));
        // Positive letters beat negative ones of the same index.
        assert_eq!(cyclic_canonical(&[-1]), vec![1]);
        assert_eq!(cyclic_canonical(&[1]), vec![1]);
    }

    #[test]
    fn s2g_rank_one() {
        assert_eq!(enumerate_s2g(1), vec![vec![1], vec![1, 1]]);
    }

    #[test]
    fn s2g_rank_two() {
        let words = enumerate_s2g(2);
        assert_eq!(words.len(), 17);
        assert!(words.contains(&cyclic_canonical(&[1, 2, -1, -2])));
        // Every class respects the multiplicity bound and is canonical.
        for w in &words {
            assert_eq!(*w, cyclic_canonical(w));
            for idx in 1..=2i32 {
                let n = w.iter().filter(|&&k| k.abs() == idx).count();
                assert!(n <= 2);
            }
        }
        let by_len = |n: usize| words.iter().filter(|w| w.len() == n).count();
        assert_eq!((by_len(1), by_len(2), by_len(3), by_len(4)), (2, 4, 4, 7));
    }

    #[test]
    fn pushforward_theta() {
        let m = theta();
        assert_eq!(
            pushforward(&[1], &m).unwrap(),
            vec![Step::new("q", true), Step::new("p", false)]
        );
        assert_eq!(pushforward(&[], &m).unwrap(), Vec::<Step>::new());
    }

    #[test]
    fn pushforward_rose_has_no_tree_paths() {
        let m = rose(2);
        assert_eq!(
            pushforward(&[1, -2], &m).unwrap(),
            vec![Step::new("x1", true), Step::new("x2", false)]
        );
    }

    #[test]
    fn loop_reduce_example() {
        let raw = vec![
            Step::new("q", true),
            Step::new("p", false),
            Step::new("p", true),
            Step::new("r", false),
        ];
        assert_eq!(
            loop_reduce(&raw),
            vec![Step::new("q", true), Step::new("r", false)]
        );
        let m = theta();
        assert_eq!(loop_reduce(&pushforward(&[1, -2], &m).unwrap()), loop_reduce(&raw));
    }

    #[test]
    fn loop_reduce_cyclic_seam() {
        let raw = vec![
            Step::new("p", false),
            Step::new("q", true),
            Step::new("q", false),
            Step::new("r", true),
            Step::new("p", true),
        ];
        let red = loop_reduce(&raw);
        assert_eq!(red, vec![Step::new("r", true)]);
    }

    fn weights_of(word: &[i32]) -> Vec<(String, usize)> {
        edge_weights(word, &theta()).unwrap().into_iter().collect()
    }

    #[test]
    fn edge_weight_examples() {
        let w = |v: &[(&str, usize)]| {
            v.iter()
                .map(|(k, n)| (k.to_string(), *n))
                .collect::<Vec<_>>()
        };
        assert_eq!(weights_of(&[1]), w(&[("p", 1), ("q", 1), ("r", 0)]));
        assert_eq!(weights_of(&[1, -2]), w(&[("p", 0), ("q", 1), ("r", 1)]));
        assert_eq!(weights_of(&[1, 2]), w(&[("p", 2), ("q", 1), ("r", 1)]));
    }

    #[test]
    fn length_examples() {
        let m = theta();
        let metric: Metric<f64> = [("p", 1.0), ("q", 1.0), ("r", 1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert_eq!(length(&[], &m, &metric).unwrap(), 0.0);
        assert_eq!(length(&[1, -2], &m, &metric).unwrap(), 2.0);
        assert_eq!(length(&[1, 2], &m, &metric).unwrap(), 4.0);
    }

    #[test]
    fn length_exact_rational() {
        use num_rational::Rational64;
        let m = dumbbell();
        let metric: Metric<Rational64> = [
            ("e1", Rational64::new(1, 3)),
            ("b", Rational64::new(1, 7)),
            ("e2", Rational64::new(2, 5)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        // [1, 2] travels e1, b, e2, b back: 1/3 + 1/7 + 2/5 + 1/7 = 107/105.
        assert_eq!(
            length(&[1, 2], &m, &metric).unwrap(),
            Rational64::new(107, 105)
        );
    }

    #[test]
    fn automorphism_examples() {
        let id: Vec<Word> = vec![vec![1], vec![2]];
        assert_eq!(apply_automorphism(&[1, -2], &id).unwrap(), vec![1, -2]);
        let dehn: Vec<Word> = vec![vec![1, 2], vec![2]];
        assert_eq!(apply_automorphism(&[1], &dehn).unwrap(), vec![1, 2]);
        let swap: Vec<Word> = vec![vec![2], vec![1]];
        assert_eq!(apply_automorphism(&[1, -2], &swap).unwrap(), vec![2, -1]);
    }

    #[test]
    fn loop_serialization_round_trip() {
        let l = vec![Step::new("q", true), Step::new("p", false)];
        assert_eq!(format_loop(&l), "q:+,p:-");
        assert_eq!(parse_loop("q:+,p:-").unwrap(), l);
        assert_eq!(parse_loop("").unwrap(), Vec::<Step>::new());
    }

    #[test]
    fn word_parse_rejects_zero() {
        assert!(parse_word("1 0 2").is_err());
        assert_eq!(parse_word("1 -2 1").unwrap(), vec![1, -2, 1]);
        assert_eq!(format_word(&[1, -2, 1]), "1 -2 1");
    }

    fn arb_word(g: i32, max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(
            (1..=g, prop::bool::ANY).prop_map(|(k, neg)| if neg { -k } else { k }),
            0..=max_len,
        )
    }

    proptest! {
        #[test]
        fn reduce_idempotent(w in arb_word(3, 12)) {
            let r = reduce(&w);
            prop_assert_eq!(reduce(&r), r.clone());
            // No adjacent inverse pair survives.
            prop_assert!(r.windows(2).all(|p| p[0] != -p[1]));
        }

        #[test]
        fn canonical_rotation_inversion_invariant(w in arb_word(3, 10), r in 0usize..10) {
            let c = cyclic_canonical(&w);
            let cr = cyclic_reduce(&w);
            if !cr.is_empty() {
                let rot: Word = {
                    let r = r % cr.len();
                    cr[r..].iter().chain(&cr[..r]).copied().collect()
                };
                prop_assert_eq!(cyclic_canonical(&rot), c.clone());
            }
            prop_assert_eq!(cyclic_canonical(&invert(&w)), c);
        }

        #[test]
        fn loop_reduce_idempotent_on_pushforwards(w in arb_word(2, 8)) {
            let m = theta();
            let l = loop_reduce(&pushforward(&reduce(&w), &m).unwrap());
            prop_assert_eq!(loop_reduce(&l), l.clone());
            for pair in l.windows(2) {
                prop_assert!(!pair[0].cancels(&pair[1]));
            }
            if l.len() >= 2 {
                prop_assert!(!l.last().unwrap().cancels(&l[0]));
            }
        }

        #[test]
        fn length_class_invariant(w in arb_word(2, 8), r in 0usize..8) {
            let m = theta();
            let metric: Metric<f64> = [("p", 0.5), ("q", 1.25), ("r", 2.0)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            let base = length(&reduce(&w), &m, &metric).unwrap();
            let red = cyclic_reduce(&w);
            prop_assert_eq!(length(&red, &m, &metric).unwrap(), base);
            prop_assert_eq!(length(&invert(&red), &m, &metric).unwrap(), base);
            if !red.is_empty() {
                let r = r % red.len();
                let rot: Word = red[r..].iter().chain(&red[..r]).copied().collect();
                prop_assert_eq!(length(&rot, &m, &metric).unwrap(), base);
            }
        }

        #[test]
        fn pushforward_readback_is_identity(w in arb_word(2, 8)) {
            for m in [theta(), dumbbell(), rose(2)] {
                let red = reduce(&w);
                let l = loop_reduce(&pushforward(&red, &m).unwrap());
                prop_assert_eq!(
                    cyclic_canonical(&readback(&l, &m)),
                    cyclic_canonical(&red)
                );
            }
        }
    }
}
