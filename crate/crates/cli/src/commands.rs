//! Command bodies. Each builds its artifacts fully in memory; nothing is
//! written until the whole run has succeeded.

use std::collections::BTreeMap;

use lrp_core::census::{
    census_growth_check, enumerate_classes_with_budget, expected_census_size_with_budget, sample_micro_edges,
    GrowthConfig,
};
use lrp_core::coupling::couple_models;
use lrp_core::metric::{diameter_continuous, diameter_discrete, distance_continuous, distance_discrete};
use lrp_core::model::{sample_continuous, sample_discrete};
use lrp_core::rng::derive_seed;
use lrp_core::scaling::{
    check_multiplicativity, detect_good_points, detect_supergood, fit_exponent, moment_ratio, run_scaling_experiment,
    ExponentFit, GoodPointCriteria, ModelKind, MomentRatio, MultiplicativityReport, ScalePoint, ScalingSeries,
    SupergoodReport,
};
use lrp_core::stats::{mean, std_dev};
use lrp_core::{DiscreteParams, MetricMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    continuous_params, scaling_config, CommandConfig, CoupleConfig, DistanceConfig, ExploreConfig, ModelConfig,
    RunConfig, SampleConfig, ScalingCliConfig,
};
use crate::error::{CliError, CliResult};

/// Named output files, in emission order.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable output");
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).expect("in-memory csv");
        }
        self.files.push((name.to_string(), w.into_inner().expect("in-memory csv")));
    }

    fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body.into_bytes()));
    }
}

pub fn execute(cfg: &RunConfig) -> CliResult<Artifacts> {
    match &cfg.command {
        CommandConfig::Sample(c) => sample(c, cfg.seed),
        CommandConfig::Distance(c) => distance(c, cfg.seed),
        CommandConfig::Scaling(c) => scaling(c, cfg.seed),
        CommandConfig::Couple(c) => couple(c, cfg.seed),
        CommandConfig::Explore(c) => explore(c, cfg.seed),
    }
}

/// Seed of replica `r` under the run seed.
pub fn instance_seed(seed: u64, r: u64) -> u64 {
    derive_seed(seed, &[r])
}

enum Instance {
    Discrete(lrp_core::DiscreteGraph),
    Continuous(lrp_core::ContinuousEdgeSet),
}

impl Instance {
    fn sample(m: &ModelConfig, seed: u64) -> CliResult<Self> {
        Ok(match m.model {
            ModelKind::Discrete => Instance::Discrete(sample_discrete(
                &DiscreteParams::new(m.n, m.beta, seed).with_exponent(m.s),
            )?),
            ModelKind::Continuous => Instance::Continuous(sample_continuous(&continuous_params(m, seed))?),
        })
    }

    fn edge_count(&self) -> usize {
        match self {
            Instance::Discrete(g) => g.long_edge_count(),
            Instance::Continuous(es) => es.len(),
        }
    }

    fn to_json(&self, pretty: bool) -> Vec<u8> {
        let r = match (self, pretty) {
            (Instance::Discrete(g), true) => serde_json::to_vec_pretty(g),
            (Instance::Discrete(g), false) => serde_json::to_vec(g),
            (Instance::Continuous(es), true) => serde_json::to_vec_pretty(es),
            (Instance::Continuous(es), false) => serde_json::to_vec(es),
        };
        r.expect("serializable instance")
    }
}

#[derive(Serialize)]
struct CountRow {
    replica: u64,
    seed: u64,
    edges: usize,
}

#[derive(Serialize)]
struct SampleStats {
    model: ModelKind,
    replicas: usize,
    mean_edges: f64,
    se_edges: f64,
    expected_edges: f64,
}

fn sample(c: &SampleConfig, seed: u64) -> CliResult<Artifacts> {
    let m = c.model_config();
    let draws: Vec<(CountRow, Option<Vec<u8>>)> = (0..c.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let s = instance_seed(seed, r);
            let inst = Instance::sample(&m, s)?;
            let json = c.write_instances.then(|| inst.to_json(c.replicas == 1));
            Ok((
                CountRow {
                    replica: r,
                    seed: s,
                    edges: inst.edge_count(),
                },
                json,
            ))
        })
        .collect::<CliResult<_>>()?;
    let counts: Vec<f64> = draws.iter().map(|(row, _)| row.edges as f64).collect();
    let expected_edges = match m.model {
        ModelKind::Discrete => DiscreteParams::new(m.n, m.beta, 0).with_exponent(m.s).expected_long_edges(),
        ModelKind::Continuous => continuous_params(&m, 0).mass().value,
    };
    let stats = SampleStats {
        model: m.model,
        replicas: c.replicas,
        mean_edges: mean(&counts),
        se_edges: if counts.len() > 1 { std_dev(&counts) / (counts.len() as f64).sqrt() } else { 0.0 },
        expected_edges,
    };

    let mut out = Artifacts::default();
    if c.write_instances {
        let mut body = Vec::new();
        for (_, json) in &draws {
            body.extend_from_slice(json.as_deref().expect("instances requested"));
            body.push(b'\n');
        }
        let name = if c.replicas == 1 { "instance.json" } else { "instances.jsonl" };
        out.files.push((name.to_string(), body));
    }
    out.csv("counts.csv", draws.into_iter().map(|(row, _)| row));
    out.json("stats.json", &stats);
    Ok(out)
}

fn mode_name(mode: MetricMode) -> &'static str {
    match mode {
        MetricMode::ConstrainedInterval => "constrained_interval",
        MetricMode::Unconstrained => "unconstrained",
    }
}

#[derive(Serialize)]
struct DistanceRow {
    x: f64,
    y: f64,
    mode: &'static str,
    distance: f64,
    hops: usize,
}

#[derive(Serialize)]
struct DiameterOut {
    a: f64,
    b: f64,
    value: f64,
    exact: bool,
}

fn discrete_vertex(v: f64, n: usize) -> CliResult<usize> {
    if v.fract() != 0.0 || v < 0.0 || v > n as f64 {
        return Err(CliError::Validation(format!("query point {v} is not a vertex of 0..={n}")));
    }
    Ok(v as usize)
}

fn distance(c: &DistanceConfig, seed: u64) -> CliResult<Artifacts> {
    let m = c.model_config();
    let inst = Instance::sample(&m, instance_seed(seed, 0))?;
    let end = match m.model {
        ModelKind::Discrete => m.n as f64,
        ModelKind::Continuous => m.length,
    };
    let queries = if c.queries.is_empty() { vec![(0.0, end)] } else { c.queries.clone() };
    let mut rows = Vec::new();
    for &(x, y) in &queries {
        for &mode in &c.modes {
            let (distance, hops) = match &inst {
                Instance::Discrete(g) => {
                    let geo = distance_discrete(g, discrete_vertex(x, m.n)?, discrete_vertex(y, m.n)?, mode)?;
                    (geo.distance as f64, geo.hops)
                }
                Instance::Continuous(es) => {
                    let geo = distance_continuous(es, x, y, mode)?;
                    (geo.distance, geo.hops)
                }
            };
            rows.push(DistanceRow {
                x,
                y,
                mode: mode_name(mode),
                distance,
                hops,
            });
        }
    }
    let mut out = Artifacts::default();
    out.files.push(("instance.json".to_string(), inst.to_json(true)));
    out.csv("distances.csv", rows);
    if c.diameter {
        let d = match &inst {
            Instance::Discrete(g) => {
                let d = diameter_discrete(g, 0, m.n)?;
                DiameterOut {
                    a: 0.0,
                    b: end,
                    value: d.value as f64,
                    exact: d.exact,
                }
            }
            Instance::Continuous(es) => DiameterOut {
                a: 0.0,
                b: end,
                value: diameter_continuous(es, 0.0, end)?,
                exact: true,
            },
        };
        out.json("diameter.json", &d);
    }
    Ok(out)
}

/// One row of the series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub beta: f64,
    pub model: ModelKind,
    pub scale: u64,
    pub replicas: usize,
    pub mean: f64,
    pub se: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

pub fn series_rows(series: &ScalingSeries) -> Vec<SeriesRow> {
    series
        .points
        .iter()
        .map(|p| SeriesRow {
            beta: series.beta,
            model: series.model,
            scale: p.scale,
            replicas: p.replicas,
            mean: p.mean,
            se: p.se,
            m2: p.m2,
            m3: p.m3,
            m4: p.m4,
        })
        .collect()
}

/// Reads a series CSV; the replica samples are not stored, so bootstraps
/// fall back to the recorded standard errors.
pub fn read_series(path: &std::path::Path, seed: u64) -> CliResult<ScalingSeries> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let rows: Vec<SeriesRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| csv_error(path, e))?;
    let first = rows
        .first()
        .ok_or_else(|| CliError::Validation(format!("{}: empty series", path.display())))?;
    let (beta, model) = (first.beta, first.model);
    if rows.iter().any(|r| r.beta.to_bits() != beta.to_bits() || r.model != model) {
        return Err(CliError::Validation("series mixes beta or model values".into()));
    }
    let points = rows
        .into_iter()
        .map(|r| ScalePoint {
            scale: r.scale,
            replicas: r.replicas,
            mean: r.mean,
            se: r.se,
            m2: r.m2,
            m3: r.m3,
            m4: r.m4,
            samples: Vec::new(),
        })
        .collect();
    Ok(ScalingSeries::new(beta, model, seed, points)?)
}

fn csv_error(path: &std::path::Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!("checked io kind"),
        }
    } else {
        CliError::Validation(format!("{}: {e}", path.display()))
    }
}

#[derive(Serialize)]
struct FitReport {
    fit: ExponentFit,
    truncated: bool,
    good_points: Vec<u64>,
    supergood: Vec<SupergoodReport>,
    second_moment_ratio: Option<Vec<MomentRatio>>,
    multiplicativity: Option<MultiplicativityReport>,
}

fn plot_script(fit: &ExponentFit, model: ModelKind, beta: f64) -> String {
    format!(
        "# gnuplot: log-log mean distance against scale with the fitted slope\n\
         set datafile separator \",\"\n\
         set logscale xy\n\
         set key top left\n\
         set xlabel \"scale M\"\n\
         set ylabel \"mean distance d(0,M)\"\n\
         set title \"{model} model, beta = {beta}\"\n\
         theta = {theta}\n\
         c = exp({intercept})\n\
         f(x) = c * x**theta\n\
         plot \"series.csv\" using 3:5:6 skip 1 with yerrorbars title \"mean +- se\", \\\n     \
         f(x) title sprintf(\"slope %.4f\", theta)\n",
        theta = fit.theta_hat,
        intercept = fit.intercept,
    )
}

fn scaling(c: &ScalingCliConfig, seed: u64) -> CliResult<Artifacts> {
    let series = match &c.replay {
        Some(path) => read_series(path, seed)?,
        None => run_scaling_experiment(&scaling_config(c, seed))?,
    };
    let fit = fit_exponent(&series)?;
    let criteria = GoodPointCriteria::new(c.gamma, c.theta_prime, c.r)?;
    let report = FitReport {
        truncated: series.truncated,
        good_points: detect_good_points(&series, &criteria),
        supergood: detect_supergood(&series, &criteria),
        second_moment_ratio: moment_ratio(&series, 2).ok(),
        multiplicativity: check_multiplicativity(&series, c.band_limit).ok(),
        fit,
    };
    let mut out = Artifacts::default();
    out.csv("series.csv", series_rows(&series));
    out.text("plot.gp", plot_script(&report.fit, series.model, series.beta));
    out.json("fit.json", &report);
    Ok(out)
}

#[derive(Serialize)]
struct MismatchRow {
    sample: u64,
    seed: u64,
    mismatches: usize,
    tv_sum: f64,
}

#[derive(Serialize)]
struct ClassRow {
    distance: usize,
    cells: usize,
    mismatches: usize,
    mismatch_rate: f64,
    tv: f64,
}

#[derive(Serialize)]
struct CoupleSummary {
    n: usize,
    beta: f64,
    samples: u64,
    mean_mismatches: f64,
    se_mismatches: f64,
    tv_sum: f64,
    /// `mean_mismatches <= tv_sum + 3 se`.
    within_bound: bool,
}

fn couple(c: &CoupleConfig, seed: u64) -> CliResult<Artifacts> {
    let runs: Vec<_> = (0..c.samples)
        .into_par_iter()
        .map(|i| {
            let s = instance_seed(seed, i);
            let coupled = couple_models(c.n, c.beta, s, c.placement)?;
            let classes = coupled.report.by_distance();
            let first = (i == 0).then_some(coupled.report.clone());
            Ok((
                MismatchRow {
                    sample: i,
                    seed: s,
                    mismatches: coupled.report.mismatches,
                    tv_sum: coupled.report.tv_sum,
                },
                classes,
                first,
            ))
        })
        .collect::<CliResult<_>>()?;

    let mut classes: BTreeMap<usize, ClassRow> = BTreeMap::new();
    for (_, per, _) in &runs {
        for s in per {
            let row = classes.entry(s.distance).or_insert(ClassRow {
                distance: s.distance,
                cells: 0,
                mismatches: 0,
                mismatch_rate: 0.0,
                tv: s.tv,
            });
            row.cells += s.cells;
            row.mismatches += s.mismatches;
        }
    }
    for row in classes.values_mut() {
        row.mismatch_rate = row.mismatches as f64 / row.cells as f64;
    }
    let counts: Vec<f64> = runs.iter().map(|(r, _, _)| r.mismatches as f64).collect();
    let tv_sum = runs[0].0.tv_sum;
    let mean_mismatches = mean(&counts);
    let se = if counts.len() > 1 { std_dev(&counts) / (counts.len() as f64).sqrt() } else { 0.0 };
    let summary = CoupleSummary {
        n: c.n,
        beta: c.beta,
        samples: c.samples,
        mean_mismatches,
        se_mismatches: se,
        tv_sum,
        within_bound: mean_mismatches <= tv_sum + 3.0 * se,
    };

    let mut out = Artifacts::default();
    let report = runs.iter().find_map(|(_, _, r)| r.clone()).expect("sample 0 present");
    out.json("report.json", &report);
    out.csv("mismatches.csv", runs.into_iter().map(|(r, _, _)| r));
    out.csv("by_distance.csv", classes.into_values());
    out.json("summary.json", &summary);
    Ok(out)
}

#[derive(Serialize)]
struct GrowthCsvRow {
    t: f64,
    #[serde(rename = "exact_E")]
    exact_e: f64,
    mc_mean: f64,
    mc_se: f64,
}

fn explore(c: &ExploreConfig, seed: u64) -> CliResult<Artifacts> {
    let domain = c.domain();
    let exact = expected_census_size_with_budget(domain, c.beta, c.t, c.state_budget)?;
    let edges = sample_micro_edges(domain, c.beta, seed, 0)?;
    let census = enumerate_classes_with_budget(&edges, c.t, c.epsilon, c.state_budget)?;
    let mut growth_cfg = GrowthConfig::new(domain, c.replicas, seed, c.epsilon);
    growth_cfg.state_budget = c.state_budget;
    let growth = census_growth_check(c.beta, &c.t_grid, growth_cfg)?;

    let mut out = Artifacts::default();
    out.json(
        "census.json",
        &serde_json::json!({
            "domain": domain,
            "beta": c.beta,
            "expected_size": exact,
            "edges": edges,
            "census": census,
        }),
    );
    out.csv(
        "growth.csv",
        growth.rows.iter().map(|r| GrowthCsvRow {
            t: r.t,
            exact_e: r.exact_e,
            mc_mean: r.mc_mean,
            mc_se: r.mc_se,
        }),
    );
    out.json("growth.json", &growth);
    Ok(out)
}
