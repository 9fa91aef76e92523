//! Browser-facing bindings.  Every function takes and returns JSON strings
//! so the page needs no extra glue; errors come back as `{"error": "..."}`
//! instead of thrown exceptions.

use charvar::graph::GraphFile;
use charvar::moment;
use charvar::spin;
use charvar::tensor;
use charvar::valuation::{self, ValuationPoint};
use charvar::words;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn fail(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn parse_graph(graph_json: &str) -> Result<GraphFile, String> {
    GraphFile::from_json(graph_json).map_err(|e| e.to_string())
}

/// Built-in example graph files for prefilling the page.
#[wasm_bindgen]
pub fn example_graph(name: &str) -> String {
    let marking = match name {
        "dumbbell" => charvar::graph::dumbbell(),
        "rose2" => charvar::graph::rose(2),
        _ => charvar::graph::theta(),
    };
    let metric = marking
        .graph
        .edges
        .iter()
        .map(|e| (e.id.clone(), 1.0))
        .collect();
    GraphFile::from_marking(&marking, Some(&metric)).to_json()
}

/// Lattice points of the m-th dilation of the compactification polytope.
#[wasm_bindgen]
pub fn polytope_info(graph_json: &str, level: usize) -> String {
    let gf = match parse_graph(graph_json) {
        Ok(gf) => gf,
        Err(e) => return fail(e),
    };
    let g = gf.graph();
    if level == 0 || level > 8 {
        return fail("level must be in 1..=8");
    }
    let points = match spin::polytope_points(&g, level) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let mut ids: Vec<String> = g.edges.iter().map(|e| e.id.clone()).collect();
    ids.sort();
    let rows: Vec<Vec<usize>> = points
        .iter()
        .take(2000)
        .map(|w| ids.iter().map(|id| w.get(id).copied().unwrap_or(0)).collect())
        .collect();
    json!({
        "level": level,
        "count": points.len(),
        "edges": ids,
        "points": rows,
        "truncated": points.len() > rows.len(),
    })
    .to_string()
}

/// Gradient descent from a seeded random representation to momentum zero,
/// with the objective trace downsampled for plotting.
#[wasm_bindgen]
pub fn descend_to_momentum_zero(graph_json: &str, seed: u32, tol: f64, max_iters: usize) -> String {
    let gf = match parse_graph(graph_json) {
        Ok(gf) => gf,
        Err(e) => return fail(e),
    };
    let g = gf.graph();
    if !(tol > 0.0) || max_iters == 0 || max_iters > 200_000 {
        return fail("need tol > 0 and 0 < max_iters <= 200000");
    }
    let start = tensor::random_rep(&g, seed as u64);
    let out = match moment::kempf_ness_solve(&start, &g, tol, max_iters) {
        Ok(out) => out,
        Err(e) => return fail(e),
    };
    let stride = (out.trace.len() / 500).max(1);
    let mut objective: Vec<f64> = out.trace.iter().copied().step_by(stride).collect();
    if let Some(last) = out.trace.last() {
        if objective.last() != Some(last) {
            objective.push(*last);
        }
    }
    let lengths: Vec<(String, f64)> = {
        let mut ids: Vec<String> = g.edges.iter().map(|e| e.id.clone()).collect();
        ids.sort();
        ids.iter()
            .map(|id| (id.clone(), moment::xi(&out.rep[id])))
            .collect()
    };
    let image: spin::RealWeighting = lengths.iter().cloned().collect();
    let in_cone = spin::moment_cone_contains(&image, &g, 1e-6).unwrap_or(false);
    json!({
        "seed": seed,
        "iterations": out.iterations,
        "residual": out.residual,
        "objective": objective,
        "lengths": lengths,
        "in_cone": in_cone,
    })
    .to_string()
}

/// Length-valuation coordinates of the marked metric graph over the small
/// trace-word basis.
#[wasm_bindgen]
pub fn tropical_coordinates(graph_json: &str) -> String {
    let gf = match parse_graph(graph_json) {
        Ok(gf) => gf,
        Err(e) => return fail(e),
    };
    let marking = match gf.marking() {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    if marking.genus() > 3 {
        return fail("demo supports genus <= 3");
    }
    let metric = gf.metric.clone().unwrap_or_else(|| {
        marking
            .graph
            .edges
            .iter()
            .map(|e| (e.id.clone(), 1.0))
            .collect()
    });
    let basis = words::enumerate_s2g(marking.genus());
    let point = ValuationPoint::new(marking, metric);
    let values = match valuation::tropical_embed(&point, &basis) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let rows: Vec<(String, f64)> = basis
        .iter()
        .zip(values)
        .map(|(w, v)| (words::format_word(w), v))
        .collect();
    json!({ "genus": point.marking.genus(), "rows": rows }).to_string()
}
