//! Canned experiments. Every scenario is a function of its configuration and
//! seed; rows are computed in parallel and sorted before they are written.

use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ball::extract_ball;
use crate::canon::canonicalize;
use crate::distances::distance_to_property;
use crate::error::{Error, Result};
use crate::generators::{
    binary_tree, cycle, grid, heap_layer, orbit_tree, path, perturbed_union, perturbed_union_path_part,
    random_lipschitz_weights, GeneratorSpec, WeightProfile,
};
use crate::graph::{build_graph, WeightedGraph};
use crate::local::{estimate_matching, local_independent_set};
use crate::matching::matching_number;
use crate::mis::exact_weighted_mis;
use crate::oracles::{OracleConfig, RnOracle};
use crate::partitions::find_weighted_partition;
use crate::properties::PropertySpec;
use crate::quotient::TreeQuotient;
use crate::stats::{exact_stats_by_radius, exact_stats_quotient, statistical_distance};
use crate::testers::{test_property, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    PhaseTransition,
    ConvergenceToOrbitTree,
    EstimatorErrorCurve,
    PerturbationSensitivity,
    TesterCalibration,
    EntropySweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::PhaseTransition => "phase_transition",
            Scenario::ConvergenceToOrbitTree => "convergence_to_orbit_tree",
            Scenario::EstimatorErrorCurve => "estimator_error_curve",
            Scenario::PerturbationSensitivity => "perturbation_sensitivity",
            Scenario::TesterCalibration => "tester_calibration",
            Scenario::EntropySweep => "entropy_sweep",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Scenario-specific overrides; missing fields take their defaults.
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        ExperimentConfig {
            scenario,
            params: Value::Null,
            seed,
            output_path: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseTransitionParams {
    pub betas: Vec<f64>,
    pub depth: usize,
    pub samples: usize,
}

impl Default for PhaseTransitionParams {
    fn default() -> Self {
        PhaseTransitionParams {
            betas: vec![0.0, 0.3, std::f64::consts::LN_2, 1.0, 2.0],
            depth: 20,
            samples: 100_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct OrbitParams {
    pub depths: Vec<usize>,
    pub radius: usize,
    pub t: u32,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            depths: vec![16, 24, 32],
            radius: 3,
            t: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorParams {
    pub rows: usize,
    pub cols: usize,
    pub epsilons: Vec<f64>,
    pub weightings: usize,
    #[serde(rename = "K")]
    pub k: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            rows: 12,
            cols: 12,
            epsilons: vec![0.05, 0.1, 0.2],
            weightings: 10,
            k: 4.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationParams {
    pub n: usize,
    pub r_max: usize,
    pub t: u32,
    pub epsilon: f64,
    pub k_target: usize,
}

impl Default for PerturbationParams {
    fn default() -> Self {
        PerturbationParams {
            n: 32,
            r_max: 3,
            t: 3,
            epsilon: 0.05,
            k_target: 16,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationParams {
    pub epsilon: f64,
    pub seeds: u64,
}

impl Default for CalibrationParams {
    fn default() -> Self {
        CalibrationParams {
            epsilon: 0.2,
            seeds: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EntropyParams {
    pub depths: Vec<usize>,
    pub beta: f64,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            depths: vec![25, 50, 100],
            beta: std::f64::consts::LN_2,
        }
    }
}

fn params<T: DeserializeOwned + Default>(v: &Value) -> Result<T> {
    if v.is_null() {
        return Ok(T::default());
    }
    Ok(serde_json::from_value(v.clone())?)
}

/// Runs the scenario and returns its rows in order.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<Vec<Value>> {
    let rows = match cfg.scenario {
        Scenario::PhaseTransition => phase_transition(&params(&cfg.params)?, cfg.seed),
        Scenario::ConvergenceToOrbitTree => convergence_to_orbit_tree(&params(&cfg.params)?),
        Scenario::EstimatorErrorCurve => estimator_error_curve(&params(&cfg.params)?, cfg.seed),
        Scenario::PerturbationSensitivity => perturbation_sensitivity(&params(&cfg.params)?, cfg.seed),
        Scenario::TesterCalibration => tester_calibration(&params(&cfg.params)?, cfg.seed),
        Scenario::EntropySweep => entropy_sweep(&params(&cfg.params)?),
    }
    .map_err(|e| Error::Scenario {
        scenario: cfg.scenario.name().into(),
        source: Box::new(e),
    })?;
    let mut keyed: Vec<(String, Value)> = rows
        .into_iter()
        .map(|mut r| {
            let obj = r.as_object_mut().expect("rows are objects");
            obj.insert("scenario".into(), json!(cfg.scenario.name()));
            obj.insert("seed".into(), json!(cfg.seed));
            let key = obj.get("row").map(|k| k.to_string()).unwrap_or_default();
            (key, r)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, r)| r).collect())
}

/// One JSON object per line.
pub fn render_jsonl(rows: &[Value]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

/// Runs the scenario and writes the JSON-lines report to `output_path`, or to
/// `fallback` when the config names none.
pub fn write_report(cfg: &ExperimentConfig, fallback: &Path) -> Result<std::path::PathBuf> {
    let rows = run_scenario(cfg)?;
    let target = cfg.output_path.as_ref().map(Into::into).unwrap_or_else(|| fallback.to_path_buf());
    std::fs::write(&target, render_jsonl(&rows))?;
    Ok(target)
}

/// Zero-padded row key so lexicographic order is numeric order.
fn row_key(parts: &[usize]) -> String {
    parts.iter().map(|p| format!("{p:06}")).collect::<Vec<_>>().join("/")
}

fn tv_to_uniform(masses: &[f64]) -> f64 {
    let u = 1.0 / masses.len() as f64;
    0.5 * masses.iter().map(|m| (m - u).abs()).sum::<f64>()
}

/// Closed-form layer masses of `T_n`: layer `k` carries `∝ (2 e^{-β})^k`.
pub fn exact_layer_masses(depth: usize, beta: f64) -> Vec<f64> {
    let logs: Vec<f64> = (0..depth).map(|k| k as f64 * (std::f64::consts::LN_2 - beta)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

/// Root-layer histogram and root-degree-1 fraction over `samples` radius-1
/// oracle queries.
pub fn sampled_layer_histogram(g: &WeightedGraph, depth: usize, samples: usize, seed: u64) -> Result<(Vec<f64>, f64)> {
    let queries = RnOracle::new(g).run(&OracleConfig::new(1, 3, samples, seed)?);
    let mut counts = vec![0u64; depth];
    let mut leaves = 0u64;
    for q in &queries {
        counts[heap_layer(q.root)] += 1;
        if q.ball.root_degree() == 1 {
            leaves += 1;
        }
    }
    let total = samples as f64;
    Ok((counts.iter().map(|&c| c as f64 / total).collect(), leaves as f64 / total))
}

fn phase_transition(p: &PhaseTransitionParams, seed: u64) -> Result<Vec<Value>> {
    p.betas
        .par_iter()
        .enumerate()
        .map(|(i, &beta)| {
            let g = binary_tree(p.depth, beta)?;
            let exact = exact_layer_masses(p.depth, beta);
            let (hist, leaf_fraction) = sampled_layer_histogram(&g, p.depth, p.samples, seed)?;
            let top6: f64 = hist.iter().take(6).sum();
            Ok(json!({
                "row": row_key(&[i]),
                "graph": GeneratorSpec::BinaryTree { depth: p.depth, beta },
                "beta": beta,
                "samples": p.samples,
                "layer_mass_exact": exact,
                "layer_mass_sampled": hist,
                "tv_to_uniform_exact": tv_to_uniform(&exact),
                "tv_to_uniform_sampled": tv_to_uniform(&hist),
                "degree_one_fraction": leaf_fraction,
                "top_six_layer_mass": top6,
            }))
        })
        .collect()
}

/// The radius-`r` ball at the root of the orbit tree, whose every vertex within
/// `r` has all three neighbours.
pub fn orbit_interior_key(r: usize, t: u32) -> Result<crate::canon::CanonicalBallKey> {
    Ok(canonicalize(&extract_ball(&orbit_tree(r.max(1))?, 0, r, t)))
}

/// `p`-mass of vertices of `T_n` (`β = ln 2`) whose radius-`r` ball equals
/// the orbit-tree interior ball, computed exactly on the layer quotient.
pub fn orbit_fraction(depth: usize, r: usize, t: u32) -> Result<f64> {
    let q = TreeQuotient::binary_tree(depth, std::f64::consts::LN_2)?;
    Ok(exact_stats_quotient(&q, r, t).weight(&orbit_interior_key(r, t)?))
}

fn convergence_to_orbit_tree(p: &OrbitParams) -> Result<Vec<Value>> {
    p.depths
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let fraction = orbit_fraction(n, p.radius, p.t)?;
            // The orbit statistics are a point mass, so TV_r = 1 − fraction_r.
            let mut d_s = 0.0;
            for r in 1..=p.radius {
                d_s += 0.5f64.powi(r as i32) * (1.0 - orbit_fraction(n, r, p.t)?);
            }
            Ok(json!({
                "row": row_key(&[i]),
                "graph": GeneratorSpec::BinaryTree { depth: n, beta: std::f64::consts::LN_2 },
                "radius": p.radius,
                "orbit_fraction": fraction,
                "lower_bound": 1.0 - 8.0 / n as f64,
                "d_s_to_orbit_tree": d_s,
            }))
        })
        .collect()
}

fn estimator_error_curve(p: &EstimatorParams, seed: u64) -> Result<Vec<Value>> {
    let base = grid(p.rows, p.cols)?;
    let mut jobs = Vec::new();
    for (ei, &eps) in p.epsilons.iter().enumerate() {
        for w in 0..p.weightings {
            jobs.push((ei, eps, Some(w)));
        }
        jobs.push((ei, eps, None));
    }
    jobs.par_iter()
        .map(|&(ei, eps, weighting)| match weighting {
            Some(w) => {
                let wseed = seed.wrapping_mul(1_000_003).wrapping_add(w as u64);
                let g = random_lipschitz_weights(&base, p.k, wseed)?;
                let (_, exact) = exact_weighted_mis(&g)?;
                let out = local_independent_set(&g, eps, seed)?;
                Ok(json!({
                    "row": row_key(&[ei, 0, w]),
                    "what": "independence",
                    "graph": GeneratorSpec::Grid { rows: p.rows, cols: p.cols },
                    "K": p.k,
                    "weighting_seed": wseed,
                    "epsilon": eps,
                    "exact": exact,
                    "approx": out.value,
                    "error": (exact - out.value).abs(),
                    "fallback": out.is_fallback(),
                }))
            }
            None => {
                let exact = matching_number(&base);
                let est = estimate_matching(&base, eps, seed)?;
                Ok(json!({
                    "row": row_key(&[ei, 1, 0]),
                    "what": "matching",
                    "graph": GeneratorSpec::Grid { rows: p.rows, cols: p.cols },
                    "epsilon": eps,
                    "exact": exact,
                    "approx": est.value,
                    "error": (exact - est.value).abs(),
                    "fallback": false,
                }))
            }
        })
        .collect()
}

/// `d_S` at `r_max` between `J_n` and its path part.
pub fn perturbation_distance(j: &WeightedGraph, n: usize, r_max: usize, t: u32) -> Result<f64> {
    let path_part = perturbed_union_path_part(n, j)?;
    statistical_distance(&exact_stats_by_radius(j, r_max, t), &exact_stats_by_radius(&path_part, r_max, t), r_max)
}

fn perturbation_sensitivity(p: &PerturbationParams, seed: u64) -> Result<Vec<Value>> {
    [WeightProfile::Uniform, WeightProfile::Adversarial]
        .par_iter()
        .enumerate()
        .map(|(i, &profile)| {
            let j = perturbed_union(p.n, seed, profile)?;
            let d_s = perturbation_distance(&j, p.n, p.r_max, p.t)?;
            let partition = find_weighted_partition(&j, p.epsilon, Some(p.k_target));
            let estimate = local_independent_set(&j, p.epsilon, seed)?;
            Ok(json!({
                "row": row_key(&[i]),
                "graph": GeneratorSpec::PerturbedUnion { n: p.n, seed, profile },
                "r_max": p.r_max,
                "d_s": d_s,
                "epsilon": p.epsilon,
                "k_target": p.k_target,
                "partition_feasible": partition.is_ok(),
                "removed_mass": partition.as_ref().ok().map(|c| j.mass(c.removed.iter().copied())),
                "estimator_warning": estimate.warning,
            }))
        })
        .collect()
}

/// A named graph with a property for tester calibration.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub graph: WeightedGraph,
    pub property: PropertySpec,
}

fn entry(name: impl Into<String>, graph: WeightedGraph, property: PropertySpec) -> CorpusEntry {
    CorpusEntry {
        name: name.into(),
        graph,
        property,
    }
}

/// Two vertices joined by internally disjoint paths of the given lengths.
pub fn theta_graph(lengths: &[usize]) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut next = 2;
    for &len in lengths {
        if len == 0 {
            return Err(Error::InvalidParameter("theta path needs length >= 1".into()));
        }
        let mut prev = 0;
        for _ in 1..len {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((prev, 1));
    }
    let d = lengths.len().max(2);
    build_graph(&edges, vec![0.0; next], d, crate::graph::MIN_RATIO_BOUND)
}

/// Graphs with properties they satisfy.
pub fn member_corpus() -> Result<Vec<CorpusEntry>> {
    let mut out = vec![
        entry("path_30", path(30)?, PropertySpec::Forest),
        entry("tree_6_b0.5", binary_tree(6, 0.5)?, PropertySpec::Forest),
        entry("tree_7_ln2", binary_tree(7, std::f64::consts::LN_2)?, PropertySpec::Forest),
        entry("cycle_8", cycle(8)?, PropertySpec::Bipartite),
        entry("grid_5x5", grid(5, 5)?, PropertySpec::Bipartite),
        entry("theta_2_2_4", theta_graph(&[2, 2, 4])?, PropertySpec::Bipartite),
        entry("cycle_12", cycle(12)?, PropertySpec::triangle_free()),
        entry("grid_4x6", grid(4, 6)?, PropertySpec::triangle_free()),
    ];
    for s in 0..2 {
        out.push(entry(format!("path_40_w{s}"), random_lipschitz_weights(&path(40)?, 4.0, s)?, PropertySpec::Forest));
        out.push(entry(format!("grid_6x6_w{s}"), random_lipschitz_weights(&grid(6, 6)?, 4.0, s)?, PropertySpec::Bipartite));
    }
    Ok(out)
}

/// Graphs far from a property, each certified by [`distance_to_property`].
/// Returns entries with their distance; only those with distance above
/// `epsilon` are kept.
pub fn far_corpus(epsilon: f64) -> Result<Vec<(CorpusEntry, f64)>> {
    let mut candidates = vec![
        entry("cycle_4", cycle(4)?, PropertySpec::Forest),
        entry("cycle_6", cycle(6)?, PropertySpec::Forest),
        entry("cycle_8", cycle(8)?, PropertySpec::Forest),
        entry("cycle_5", cycle(5)?, PropertySpec::Bipartite),
        entry("cycle_7", cycle(7)?, PropertySpec::Bipartite),
        entry("grid_3x3", grid(3, 3)?, PropertySpec::Forest),
        entry("grid_4x4", grid(4, 4)?, PropertySpec::Forest),
        entry("theta_2_2_2", theta_graph(&[2, 2, 2])?, PropertySpec::Forest),
        entry("theta_1_2_2", theta_graph(&[1, 2, 2])?, PropertySpec::Bipartite),
        entry("k4", build_graph(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], vec![0.0; 4], 3, crate::graph::MIN_RATIO_BOUND)?, PropertySpec::triangle_free()),
    ];
    for s in 0..3 {
        candidates.push(entry(format!("cycle_6_w{s}"), random_lipschitz_weights(&cycle(6)?, 2.0, s)?, PropertySpec::Forest));
        candidates.push(entry(format!("grid_3x4_w{s}"), random_lipschitz_weights(&grid(3, 4)?, 2.0, s)?, PropertySpec::Forest));
    }
    let mut out = Vec::new();
    for c in candidates {
        let d = distance_to_property(&c.graph, &c.property)?.distance;
        if d > epsilon {
            out.push((c, d));
        }
    }
    Ok(out)
}

fn tester_calibration(p: &CalibrationParams, seed: u64) -> Result<Vec<Value>> {
    let mut jobs: Vec<(CorpusEntry, Option<f64>)> = member_corpus()?.into_iter().map(|e| (e, None)).collect();
    jobs.extend(far_corpus(p.epsilon)?.into_iter().map(|(e, d)| (e, Some(d))));
    jobs.par_iter()
        .enumerate()
        .map(|(i, (e, distance))| {
            let mut rejections = 0u64;
            for s in 0..p.seeds {
                let v = test_property(&e.graph, &e.property, p.epsilon, e.graph.ratio_bound(), seed.wrapping_add(s))?;
                if v.verdict == Verdict::Reject {
                    rejections += 1;
                }
            }
            Ok(json!({
                "row": row_key(&[i]),
                "instance": e.name,
                "property": e.property,
                "member": distance.is_none(),
                "distance": distance,
                "epsilon": p.epsilon,
                "trials": p.seeds,
                "rejection_rate": rejections as f64 / p.seeds as f64,
            }))
        })
        .collect()
}

fn entropy_sweep(p: &EntropyParams) -> Result<Vec<Value>> {
    p.depths
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let q = TreeQuotient::binary_tree(n, p.beta)?;
            let k = q.ratio_bound();
            Ok(json!({
                "row": row_key(&[i]),
                "graph": GeneratorSpec::BinaryTree { depth: n, beta: p.beta },
                "beta": p.beta,
                "vertex_entropy": q.vertex_entropy(),
                "edge_entropy": q.edge_entropy(),
                "edge_entropy_bound": q.degree_bound() as f64 * k.ln(),
            }))
        })
        .collect()
}
