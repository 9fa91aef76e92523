//! Valuations attached to a marked metric graph: evaluation on spin labels
//! (weighted dot products), on formal spin combinations (max rule), on trace
//! words (length functions), the finite tropical evaluation vectors, the
//! injectivity check across cells, and the lexicographic edge-order
//! valuation.
//!
//! Everything is generic over the metric scalar so exact rational metrics
//! can be used where float collisions would be ambiguous.

use crate::error::{Error, Result};
use crate::graph::{validate_metric, EdgeId, Marking, Metric};
use crate::mat2::{c, C};
use crate::spin::{self, Weighting};
use crate::words::{self, Word};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeMap;
use std::ops::AddAssign;

/// A point of the valuation cone: a marking together with a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationPoint<T> {
    pub marking: Marking,
    pub metric: Metric<T>,
}

impl<T> ValuationPoint<T> {
    pub fn new(marking: Marking, metric: Metric<T>) -> Self {
        ValuationPoint { marking, metric }
    }

    pub fn validate(&self) -> Result<()> {
        self.marking.validate()?;
        validate_metric(&self.marking.graph, &self.metric)
    }
}

/// A formal combination sum C_a Phi_a, keyed by spin label.
pub type SpinCombination = BTreeMap<Weighting, C>;

fn dot<T>(metric: &Metric<T>, a: &Weighting) -> T
where
    T: Zero + Clone + AddAssign,
{
    let mut total = T::zero();
    for (edge, &w) in a {
        for _ in 0..w {
            total += metric[edge].clone();
        }
    }
    total
}

/// Value of the valuation on a single spin label: sum of l(e) a(e).
pub fn eval_spin<T>(point: &ValuationPoint<T>, a: &Weighting) -> Result<T>
where
    T: Zero + Clone + AddAssign,
{
    point.validate()?;
    if !spin::is_member(a, &point.marking.graph)? {
        return Err(Error::NotInSemigroup);
    }
    Ok(dot(&point.metric, a))
}

/// Max rule over the support; `None` is the bottom element, the value of the
/// zero combination.
pub fn eval_combo<T>(point: &ValuationPoint<T>, f: &SpinCombination) -> Result<Option<T>>
where
    T: Zero + Clone + AddAssign + PartialOrd,
{
    let mut best: Option<T> = None;
    for (a, coeff) in f {
        if coeff.norm() == 0.0 {
            continue;
        }
        let v = eval_spin(point, a)?;
        best = Some(match best {
            Some(b) if b >= v => b,
            _ => v,
        });
    }
    Ok(best)
}

/// Value on a trace word: the length function of the underlying loop.
pub fn eval_word<T>(point: &ValuationPoint<T>, word: &[i32]) -> Result<T>
where
    T: Zero + Clone + AddAssign,
{
    words::length(word, &point.marking, &point.metric)
}

/// Value on a monomial of trace words (a disjoint-union tensor): the sum.
pub fn eval_monomial<T>(point: &ValuationPoint<T>, words_: &[Word]) -> Result<T>
where
    T: Zero + Clone + AddAssign,
{
    let mut total = T::zero();
    for w in words_ {
        total += eval_word(point, w)?;
    }
    Ok(total)
}

/// The finite evaluation vector of the point over a word list.
pub fn tropical_embed<T>(point: &ValuationPoint<T>, words_: &[Word]) -> Result<Vec<T>>
where
    T: Zero + Clone + AddAssign,
{
    words_.iter().map(|w| eval_word(point, w)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub i: usize,
    pub j: usize,
    /// Equal vectors from the very same (marking, metric) are expected, not
    /// a violation.
    pub identical_points: bool,
}

#[derive(Debug, Clone)]
pub struct InjectivityReport<T> {
    pub words: Vec<Word>,
    pub vectors: Vec<Vec<T>>,
    pub collisions: Vec<Collision>,
}

impl<T> InjectivityReport<T> {
    pub fn violations(&self) -> impl Iterator<Item = &Collision> {
        self.collisions.iter().filter(|c| !c.identical_points)
    }
}

/// Embeds every point over the rank-`g` word list and reports coincident
/// vectors.  Distinct points with equal vectors falsify injectivity on the
/// sampled set.
pub fn check_injectivity<T>(points: &[ValuationPoint<T>], g: usize) -> Result<InjectivityReport<T>>
where
    T: Zero + Clone + AddAssign + PartialEq,
{
    let words_ = words::enumerate_s2g(g);
    let mut vectors = Vec::with_capacity(points.len());
    for p in points {
        vectors.push(tropical_embed(p, &words_)?);
    }
    let mut collisions = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if vectors[i] == vectors[j] {
                collisions.push(Collision {
                    i,
                    j,
                    identical_points: points[i] == points[j],
                });
            }
        }
    }
    Ok(InjectivityReport {
        words: words_,
        vectors,
        collisions,
    })
}

/// The lexicographic edge-order valuation of a trace word: its edge weights
/// listed in the given order.
pub fn nok_valuation(marking: &Marking, order: &[EdgeId], word: &[i32]) -> Result<Vec<usize>> {
    let mut sorted: Vec<&EdgeId> = order.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut ids: Vec<&EdgeId> = marking.graph.edges.iter().map(|e| &e.id).collect();
    ids.sort();
    if sorted != ids {
        return Err(Error::Parse(
            "order must be a permutation of the edge set".to_string(),
        ));
    }
    let weights = words::edge_weights(word, marking)?;
    Ok(order.iter().map(|id| weights[id]).collect())
}

/// Componentwise sum over a monomial of words.
pub fn nok_monomial(marking: &Marking, order: &[EdgeId], words_: &[Word]) -> Result<Vec<usize>> {
    let mut total = vec![0usize; order.len()];
    for w in words_ {
        for (t, v) in total.iter_mut().zip(nok_valuation(marking, order, w)?) {
            *t += v;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Default)]
pub struct AxiomReport {
    pub trials: usize,
    pub product_violations: usize,
    pub sum_violations: usize,
    pub scalar_violations: usize,
}

impl AxiomReport {
    pub fn clean(&self) -> bool {
        self.product_violations == 0 && self.sum_violations == 0 && self.scalar_violations == 0
    }
}

fn random_coeff(rng: &mut ChaCha12Rng) -> C {
    loop {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let z = c(re, im);
        if z.norm() > 1e-9 {
            return z;
        }
    }
}

fn random_combo(
    pool: &[Weighting],
    rng: &mut ChaCha12Rng,
    max_terms: usize,
) -> SpinCombination {
    use rand::Rng;
    let n = rng.random_range(1..=max_terms);
    let mut f = SpinCombination::new();
    for _ in 0..n {
        let key = pool[rng.random_range(0..pool.len())].clone();
        f.insert(key, random_coeff(rng));
    }
    f
}

/// Formal leading-term product: keys add, coefficients multiply; exact zero
/// coefficients are pruned.
fn combo_product(f: &SpinCombination, g: &SpinCombination) -> SpinCombination {
    let mut out = SpinCombination::new();
    for (a, ca) in f {
        for (b, cb) in g {
            *out.entry(spin::add(a, b)).or_insert_with(|| c(0.0, 0.0)) += ca * cb;
        }
    }
    out.retain(|_, v| v.norm() != 0.0);
    out
}

fn combo_sum(f: &SpinCombination, g: &SpinCombination) -> SpinCombination {
    let mut out = f.clone();
    for (b, cb) in g {
        *out.entry(b.clone()).or_insert_with(|| c(0.0, 0.0)) += cb;
    }
    out.retain(|_, v| v.norm() != 0.0);
    out
}

/// Randomized check of the valuation axioms on formal spin combinations:
/// additivity on products, subadditivity on sums (with equality when the
/// two values differ), and value zero on scalars.
pub fn valuation_axiom_suite<T>(
    point: &ValuationPoint<T>,
    seed: u64,
    trials: usize,
) -> Result<AxiomReport>
where
    T: Zero + Clone + AddAssign + PartialOrd,
{
    point.validate()?;
    let pool = spin::members_up_to(&point.marking.graph, 3)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut report = AxiomReport {
        trials,
        ..Default::default()
    };
    let zero_label: Weighting = point
        .marking
        .graph
        .edges
        .iter()
        .map(|e| (e.id.clone(), 0))
        .collect();
    for _ in 0..trials {
        let f = random_combo(&pool, &mut rng, 3);
        let g = random_combo(&pool, &mut rng, 3);
        let vf = eval_combo(point, &f)?.expect("nonempty");
        let vg = eval_combo(point, &g)?.expect("nonempty");

        let product = combo_product(&f, &g);
        let mut expected = vf.clone();
        expected += vg.clone();
        match eval_combo(point, &product)? {
            Some(vp) if vp == expected => {}
            _ => report.product_violations += 1,
        }

        let sum = combo_sum(&f, &g);
        let bound = if vf >= vg { vf.clone() } else { vg.clone() };
        match eval_combo(point, &sum)? {
            None => {
                // Complete cancellation: v(0) is bottom, below any bound.
            }
            Some(vs) => {
                if vs > bound {
                    report.sum_violations += 1;
                }
                if vf != vg && vs != bound {
                    report.sum_violations += 1;
                }
            }
        }

        let scalar: SpinCombination =
            [(zero_label.clone(), random_coeff(&mut rng))].into_iter().collect();
        if eval_combo(point, &scalar)? != Some(T::zero()) {
            report.scalar_violations += 1;
        }
    }
    Ok(report)
}
