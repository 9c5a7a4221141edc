//! Stage orchestration. Every stage renders its tables into memory; nothing
//! touches the output directory until the whole run has succeeded.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use log::warn;
use mobility_loci::features::{association_report, comparison_features, AssociationReport, FeatureTable, Response};
use mobility_loci::graph::{edge_weight_histogram, degree_features, strong_components, ComponentPartition, MobilityGraph};
use mobility_loci::ingest::{
    aggregate, parse_edge_list, parse_trajectories, reverse, Direction, TrajectorySet, EDGE_LIST_HEADER,
    TRAJECTORY_HEADER,
};
use mobility_loci::loci::{
    read_null, sample_null, select_loci, tail_probabilities, unadjusted_locus_flags, write_null, LociReport,
    NullConfig, NullDistribution, NullMode, TailEstimator, TailProbabilities,
};
use mobility_loci::markov::{
    check_aperiodic, row_normalize, stationary, PeriodicityReport, SolveMethod, StationaryDistribution,
    StationaryOptions,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{DirectionChoice, InputFormat, RunConfig, Stage};
use crate::table::{cell, opt_cell, Table};

/// One output file, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) -> Self {
        Artifact {
            path: path.into(),
            bytes: bytes.into(),
        }
    }

    pub fn text(&self) -> &str {
        std::str::from_utf8(&self.bytes).unwrap_or("")
    }
}

/// Runs `stage` and writes its artifacts under `cfg.out`, returning the
/// written paths.
pub fn run(stage: Stage, cfg: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let artifacts = execute(stage, cfg)?;
    write_artifacts(&cfg.out, &artifacts)
}

/// Runs `stage` without writing anything.
pub fn execute(stage: Stage, cfg: &RunConfig) -> anyhow::Result<Vec<Artifact>> {
    cfg.validate()?;
    let input = load_inputs(cfg)?;
    let mut artifacts = Vec::new();
    let mut summaries = Vec::new();
    let mut warnings = Vec::new();
    for view in views(&input.source, cfg.direction) {
        let prefix = match cfg.direction {
            DirectionChoice::Both => PathBuf::from(view.direction.to_string()),
            _ => PathBuf::new(),
        };
        let summary = analyse(stage, cfg, &view, &prefix, &mut artifacts, &mut warnings)
            .with_context(|| format!("{} analysis", view.direction))?;
        summaries.push(summary);
    }
    let mut digests = input.digests;
    if let Some(path) = &cfg.load_null {
        digests.push(InputDigest::of(path, &fs::read(path).with_context(|| format!("reading {}", path.display()))?));
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: stage,
        config: ManifestConfig::from(cfg),
        inputs: digests,
        results: summaries,
        warnings,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    artifacts.push(Artifact::new("manifest.json", json));
    Ok(artifacts)
}

/// Writes every artifact, removing whatever was written if any write fails.
pub fn write_artifacts(out: &Path, artifacts: &[Artifact]) -> anyhow::Result<Vec<PathBuf>> {
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> anyhow::Result<()> {
        for a in artifacts {
            let path = out.join(&a.path);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            let partial = partial_path(&path);
            fs::write(&partial, &a.bytes).with_context(|| format!("writing {}", path.display()))?;
            fs::rename(&partial, &path).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for path in &written {
                let _ = fs::remove_file(path);
            }
            for a in artifacts {
                let _ = fs::remove_file(partial_path(&out.join(&a.path)));
            }
            Err(e)
        }
    }
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

impl InputDigest {
    fn of(path: &Path, bytes: &[u8]) -> Self {
        InputDigest {
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(bytes)),
        }
    }
}

enum Source {
    Trajectories(TrajectorySet),
    Edges(MobilityGraph),
}

struct LoadedInput {
    source: Source,
    digests: Vec<InputDigest>,
}

fn detect_format(text: &str) -> Option<InputFormat> {
    let header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))?;
    match header {
        TRAJECTORY_HEADER => Some(InputFormat::Traj),
        EDGE_LIST_HEADER => Some(InputFormat::Edges),
        _ => None,
    }
}

fn load_inputs(cfg: &RunConfig) -> anyhow::Result<LoadedInput> {
    let mut digests = Vec::new();
    let mut trajectories = Vec::new();
    let mut edges = Vec::new();
    let mut format = None;
    for path in &cfg.inputs {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        digests.push(InputDigest::of(path, &bytes));
        let text = String::from_utf8_lossy(&bytes);
        let this = cfg.format.or_else(|| detect_format(&text)).ok_or_else(|| {
            anyhow!(
                "{}: cannot tell the format; expected header `{TRAJECTORY_HEADER}` or `{EDGE_LIST_HEADER}`",
                path.display()
            )
        })?;
        if *format.get_or_insert(this) != this {
            bail!("{}: inputs mix trajectory and edge-list files", path.display());
        }
        let context = || format!("parsing {}", path.display());
        match this {
            InputFormat::Traj => {
                let set = parse_trajectories(BufReader::new(&bytes[..]), Direction::Morning).with_context(context)?;
                trajectories.extend(set.trajectories);
            }
            InputFormat::Edges => {
                let g = parse_edge_list(BufReader::new(&bytes[..])).with_context(context)?;
                edges.extend(g.edge_triples().map(|(a, b, w)| (a.clone(), b.clone(), w)));
            }
        }
    }
    let source = match format {
        Some(InputFormat::Traj) => Source::Trajectories(TrajectorySet::new(trajectories, Direction::Morning)),
        Some(InputFormat::Edges) => Source::Edges(MobilityGraph::from_edges(std::iter::empty(), edges)?),
        None => bail!("no input files given"),
    };
    Ok(LoadedInput { source, digests })
}

/// The graph of one commute direction, with its trajectories when known.
struct View {
    direction: Direction,
    trajs: Option<TrajectorySet>,
    graph: MobilityGraph,
}

fn views(source: &Source, choice: DirectionChoice) -> Vec<View> {
    let directions: &[Direction] = match choice {
        DirectionChoice::Morning => &[Direction::Morning],
        DirectionChoice::Evening => &[Direction::Evening],
        DirectionChoice::Both => &[Direction::Morning, Direction::Evening],
    };
    directions
        .iter()
        .map(|&direction| match source {
            Source::Trajectories(t) => {
                let trajs = if direction == Direction::Evening { reverse(t) } else { t.clone() };
                View {
                    direction,
                    graph: aggregate(&trajs),
                    trajs: Some(trajs),
                }
            }
            Source::Edges(g) => View {
                direction,
                trajs: None,
                graph: if direction == Direction::Evening { g.transpose() } else { g.clone() },
            },
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: Stage,
    config: ManifestConfig,
    inputs: Vec<InputDigest>,
    results: Vec<DirectionSummary>,
    warnings: Vec<String>,
}

/// Every setting that can change an output. The worker count and output
/// directory are left out because they cannot.
#[derive(Debug, Serialize)]
struct ManifestConfig {
    format: Option<InputFormat>,
    direction: DirectionChoice,
    component: String,
    alpha: f64,
    permutations: usize,
    seed: Option<u64>,
    tol: f64,
    enumerate: bool,
    fdr: String,
    bins: usize,
    direct_threshold: usize,
    save_null: bool,
}

impl From<&RunConfig> for ManifestConfig {
    fn from(cfg: &RunConfig) -> Self {
        ManifestConfig {
            format: cfg.format,
            direction: cfg.direction,
            component: cfg.component.to_string(),
            alpha: cfg.alpha,
            permutations: cfg.permutations,
            seed: cfg.seed,
            tol: cfg.tol,
            enumerate: cfg.enumerate,
            fdr: cfg.fdr.to_string(),
            bins: cfg.bins,
            direct_threshold: cfg.direct_threshold,
            save_null: cfg.save_null,
        }
    }
}

#[derive(Debug, Serialize)]
struct DirectionSummary {
    direction: String,
    vertices: usize,
    edges: usize,
    components: usize,
    component: ComponentSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    stationary: Option<StationarySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loci: Option<LociSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<FeatureSummary>,
}

#[derive(Debug, Serialize)]
struct ComponentSummary {
    index: usize,
    vertices: usize,
    edges: usize,
}

#[derive(Debug, Serialize)]
struct StationarySummary {
    method: SolveMethod,
    residual: f64,
    tol: f64,
    period: usize,
    aperiodic: bool,
    max_pi: f64,
    max_pi_zone: String,
}

#[derive(Clone, Debug, Serialize)]
struct LociSummary {
    alpha: f64,
    fdr: String,
    replicates: usize,
    seed: Option<u64>,
    mode: NullMode,
    estimator: TailEstimator,
    k_star: usize,
    num_loci: usize,
    num_unadjusted: usize,
}

#[derive(Debug, Serialize)]
struct FeatureSummary {
    trajectory_features: bool,
}

fn analyse(
    stage: Stage,
    cfg: &RunConfig,
    view: &View,
    prefix: &Path,
    artifacts: &mut Vec<Artifact>,
    warnings: &mut Vec<String>,
) -> anyhow::Result<DirectionSummary> {
    let mut emit = |name: &str, bytes: Vec<u8>| artifacts.push(Artifact::new(prefix.join(name), bytes));
    let g = &view.graph;
    let partition = strong_components(g);
    let index = cfg.component.index();
    let members = partition.component(index).ok_or_else(|| {
        anyhow!("component {index} does not exist; the graph has {} strong components", partition.len())
    })?;
    let sub = g.induced_subgraph(members.iter())?;
    let mut summary = DirectionSummary {
        direction: view.direction.to_string(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        components: partition.len(),
        component: ComponentSummary {
            index,
            vertices: sub.vertex_count(),
            edges: sub.edge_count(),
        },
        stationary: None,
        loci: None,
        features: None,
    };

    if matches!(stage, Stage::Build | Stage::Report) {
        emit("graph.csv", graph_table(g).into_bytes());
        emit("components.csv", components_table(&partition).into_bytes());
        emit("degrees.csv", degrees_table(g).into_bytes());
        if sub.edge_count() == 0 {
            bail!("component {index} is the single zone {}; it has no edges to histogram", members[0]);
        }
        emit("histogram.csv", histogram_table(&sub, cfg.bins)?.into_bytes());
    }
    if stage == Stage::Build {
        return Ok(summary);
    }

    if sub.vertex_count() < 2 {
        bail!(
            "component {index} is the single zone {}; a stationary distribution needs a cycle",
            members[0]
        );
    }
    let opts = StationaryOptions {
        tol: cfg.tol,
        direct_threshold: cfg.direct_threshold,
        ..StationaryOptions::default()
    };
    let p = row_normalize(&sub)?;
    let period: PeriodicityReport = check_aperiodic(&p)?;
    if !period.aperiodic {
        let msg = format!(
            "{}: chain has period {}; the stationary vector exists but is not a limiting distribution",
            view.direction, period.period
        );
        warn!("{msg}");
        warnings.push(msg);
    }
    let pi = stationary(&p, &opts)?;
    let top = pi.descending_order()[0];
    summary.stationary = Some(StationarySummary {
        method: pi.method(),
        residual: pi.residual(),
        tol: cfg.tol,
        period: period.period,
        aperiodic: period.aperiodic,
        max_pi: pi.values()[top],
        max_pi_zone: pi.zones()[top].to_string(),
    });
    if matches!(stage, Stage::Stationary | Stage::Report) {
        emit("stationary.csv", stationary_table(&pi).into_bytes());
    }
    if stage == Stage::Stationary {
        return Ok(summary);
    }

    let wants_loci = matches!(stage, Stage::Loci | Stage::Report);
    let can_run_loci = cfg.seed.is_some() || cfg.enumerate || cfg.load_null.is_some();
    let loci = if wants_loci || can_run_loci {
        if !can_run_loci {
            bail!("the permutation test needs --seed");
        }
        let null = null_distribution(cfg, &sub, opts)?;
        let tails = tail_probabilities(&pi, &null)?;
        let report = select_loci(&pi, &tails, cfg.alpha, cfg.fdr)?;
        let unadjusted = unadjusted_locus_flags(&tails, cfg.alpha);
        let loci_summary = LociSummary {
            alpha: cfg.alpha,
            fdr: cfg.fdr.to_string(),
            replicates: null.replicates(),
            seed: cfg.seed,
            mode: null.mode(),
            estimator: tails.estimator,
            k_star: report.k_star,
            num_loci: report.num_loci,
            num_unadjusted: unadjusted.iter().filter(|&&f| f).count(),
        };
        if wants_loci {
            emit("pvalues.csv", pvalues_table(&sub, &report, &tails, &unadjusted, &null, cfg.alpha).into_bytes());
            emit("loci_report.json", loci_document(&loci_summary, &report)?);
            emit("sig_loci_by_k.csv", by_k_table(&report).into_bytes());
            emit("adjusted_p.csv", adjusted_table(&report).into_bytes());
            if cfg.save_null {
                let mut buf = Vec::new();
                write_null(&null, &mut buf)?;
                emit("null.bin", buf);
            }
        }
        summary.loci = Some(loci_summary);
        Some(report)
    } else {
        None
    };

    if matches!(stage, Stage::Features | Stage::Report) {
        let features = comparison_features(&sub, view.trajs.as_ref());
        if !features.has_trajectory_features() {
            let msg = format!(
                "{}: edge-list input carries no trajectories; total incoming and total traffic are unavailable",
                view.direction
            );
            warn!("{msg}");
            warnings.push(msg);
        }
        if loci.is_none() {
            let msg = "no --seed given; residuals.csv leaves the locus column empty".to_string();
            warn!("{msg}");
            warnings.push(msg);
        }
        let assoc = association_report(&features, &pi)?;
        emit("features.csv", features_table(&features).into_bytes());
        emit("association.csv", association_table(&assoc).into_bytes());
        emit("residuals.csv", residuals_table(&features, &assoc, &pi, loci.as_ref()).into_bytes());
        summary.features = Some(FeatureSummary {
            trajectory_features: features.has_trajectory_features(),
        });
    }
    Ok(summary)
}

fn null_distribution(cfg: &RunConfig, sub: &MobilityGraph, opts: StationaryOptions) -> anyhow::Result<NullDistribution> {
    let mode = if cfg.enumerate { NullMode::Enumerated } else { NullMode::Sampled };
    if let Some(path) = &cfg.load_null {
        let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let null = read_null(BufReader::new(file), mode).with_context(|| format!("reading {}", path.display()))?;
        if null.n() != sub.vertex_count() {
            bail!(
                "{} holds samples over {} zones but the component has {}",
                path.display(),
                null.n(),
                sub.vertex_count()
            );
        }
        return Ok(null);
    }
    let null_cfg = NullConfig {
        replicates: cfg.permutations,
        seed: cfg.seed.unwrap_or(0),
        mode,
        workers: cfg.workers,
        stationary: opts,
        ..NullConfig::default()
    };
    Ok(sample_null(sub, &null_cfg)?)
}

fn graph_table(g: &MobilityGraph) -> String {
    let mut t = Table::new(&["from", "to", "weight"]);
    for (from, to, w) in g.edge_triples() {
        t.row([cell(from), cell(to), cell(w)]);
    }
    t.finish()
}

fn components_table(partition: &ComponentPartition) -> String {
    let mut t = Table::new(&["zone", "component"]);
    for (zone, c) in partition.assignments() {
        t.row([cell(zone), cell(c)]);
    }
    t.finish()
}

fn degrees_table(g: &MobilityGraph) -> String {
    let mut t = Table::new(&["zone", "in_degree", "out_degree", "weighted_in", "weighted_out"]);
    for r in degree_features(g).rows {
        t.row([
            cell(&r.zone),
            cell(r.in_degree),
            cell(r.out_degree),
            cell(r.weighted_in),
            cell(r.weighted_out),
        ]);
    }
    t.finish()
}

fn histogram_table(g: &MobilityGraph, bins: usize) -> anyhow::Result<String> {
    let mut t = Table::new(&["bin_low", "bin_high", "count"]);
    for b in edge_weight_histogram(g, bins)? {
        t.row([cell(b.low), cell(b.high), cell(b.count)]);
    }
    Ok(t.finish())
}

fn stationary_table(pi: &StationaryDistribution) -> String {
    let mut t = Table::new(&["zone", "pi"]);
    for i in pi.descending_order() {
        t.row([cell(&pi.zones()[i]), cell(pi.values()[i])]);
    }
    t.finish()
}

fn pvalues_table(
    sub: &MobilityGraph,
    report: &LociReport,
    tails: &TailProbabilities,
    unadjusted: &[bool],
    null: &NullDistribution,
    alpha: f64,
) -> String {
    let mut t = Table::new(&["rank", "zone", "pi", "raw_p", "null_quantile", "below_alpha"]);
    for r in &report.records {
        let i = sub.index_of_zone(&r.zone).expect("record zones come from the component");
        t.row([
            cell(r.rank),
            cell(&r.zone),
            cell(r.pi),
            cell(tails.p[i]),
            cell(null.quantile(i, 1.0 - alpha)),
            cell(unadjusted[i]),
        ]);
    }
    t.finish()
}

#[derive(Serialize)]
struct LociDocument<'a> {
    summary: &'a LociSummary,
    records: &'a [mobility_loci::loci::LocusRecord],
}

fn loci_document(summary: &LociSummary, report: &LociReport) -> anyhow::Result<Vec<u8>> {
    let mut json = serde_json::to_string_pretty(&LociDocument {
        summary,
        records: &report.records,
    })?;
    json.push('\n');
    Ok(json.into_bytes())
}

fn by_k_table(report: &LociReport) -> String {
    let mut t = Table::new(&["k", "significant_loci"]);
    for (k, count) in report.significant_by_k.iter().enumerate() {
        t.row([cell(k + 1), cell(count)]);
    }
    t.finish()
}

fn adjusted_table(report: &LociReport) -> String {
    let mut t = Table::new(&["rank", "zone", "raw_p", "adjusted_p", "is_locus"]);
    for r in &report.records {
        t.row([cell(r.rank), cell(&r.zone), cell(r.raw_p), opt_cell(r.adjusted_p), cell(r.is_locus)]);
    }
    t.finish()
}

fn features_table(features: &FeatureTable) -> String {
    let mut t = Table::new(&["zone", "in_degree", "weighted_in_degree", "total_incoming", "total_traffic"]);
    for r in &features.rows {
        t.row([
            cell(&r.zone),
            cell(r.in_degree),
            cell(r.weighted_in_degree),
            opt_cell(r.total_incoming),
            opt_cell(r.total_traffic),
        ]);
    }
    t.finish()
}

fn association_table(assoc: &AssociationReport) -> String {
    let mut t = Table::new(&[
        "response",
        "feature",
        "n",
        "slope",
        "intercept",
        "slope_std_error",
        "slope_p_value",
        "r_squared",
        "adjusted_r_squared",
        "note",
    ]);
    for row in &assoc.rows {
        match &row.fit {
            Some(f) => t.row([
                cell(row.response.name()),
                cell(row.feature),
                cell(f.n),
                cell(f.slope),
                cell(f.intercept),
                cell(f.slope_std_error),
                cell(f.slope_p_value),
                cell(f.r_squared),
                cell(f.adjusted_r_squared),
                String::new(),
            ]),
            None => t.row([
                cell(row.response.name()),
                cell(row.feature),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                cell(row.error.as_deref().unwrap_or("undefined")),
            ]),
        }
    }
    if let Some(j) = &assoc.joint {
        t.row([
            cell(Response::SqrtPi.name()),
            cell("total_incoming+total_traffic"),
            cell(j.n),
            String::new(),
            cell(j.coefficients[0]),
            String::new(),
            String::new(),
            cell(j.r_squared),
            cell(j.adjusted_r_squared),
            cell(format!(
                "slopes {} and {}; p-values {} and {}",
                j.coefficients[1], j.coefficients[2], j.p_values[1], j.p_values[2]
            )),
        ]);
    }
    t.finish()
}

fn residuals_table(
    features: &FeatureTable,
    assoc: &AssociationReport,
    pi: &StationaryDistribution,
    loci: Option<&LociReport>,
) -> String {
    let mut t = Table::new(&["feature", "zone", "sqrt_pi", "fitted", "residual", "is_locus"]);
    for row in assoc.rows.iter().filter(|r| r.response == Response::SqrtPi) {
        let Some(fit) = &row.fit else { continue };
        let x = features.column(row.feature).expect("fitted features are available");
        for (i, zone) in pi.zones().iter().enumerate() {
            let y = pi.values()[i].sqrt();
            let fitted = fit.predict(x[i]);
            t.row([
                cell(row.feature),
                cell(zone),
                cell(y),
                cell(fitted),
                cell(y - fitted),
                loci.map(|l| cell(l.is_locus(zone.as_str()))).unwrap_or_default(),
            ]);
        }
    }
    t.finish()
}
