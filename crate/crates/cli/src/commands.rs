//! One function per subcommand. Each loads the strict config, runs the
//! experiment, writes its artifacts plus a manifest, and returns the
//! artifact list.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use num::ToPrimitive;
use serde::Deserialize;

use perclab_core::cayley::{make_oracle, quotient_map, GroupSpec};
use perclab_core::domination::{
    certify_k_dependent, dominates_exact, estimate_q_threshold, product_law, rat, three_quarters,
    AdversaryKind, BlockRule, Mass,
};
use perclab_core::graph::{
    ball_capped, cycle_graph, path_graph, star_graph, FiniteGraph, GraphOracle, Mode,
    DEFAULT_BALL_CAP,
};
use perclab_core::locality::locality_scan;
use perclab_core::monotonicity::{
    check_lift_property, coupled_exploration, marginal_law_check, LiftMap,
};
use perclab_core::nets::{fiber_net, verify_net, write_net_fixture, z2_lattice_net, Net};
use perclab_core::percolation::{
    check_gluing, estimate_event_prob, estimate_pc, independence_radius_report, renormalize,
    sample_indexed, write_eta_fixture,
};
use perclab_core::rng::CounterStream;

use crate::config::{params, require_graph, require_graph2, RawConfig, Validation};
use crate::emit::{emit_csv, render_plot, Cell, PlotKind};

pub struct RunContext {
    pub out: PathBuf,
    pub seed: u64,
}

fn write_artifact(out: &Path, name: &str, text: &str, artifacts: &mut Vec<PathBuf>) -> Result<()> {
    let path = out.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    artifacts.push(path);
    Ok(())
}

fn parse_mode(s: &Option<String>) -> Result<Mode> {
    match s.as_deref() {
        None | Some("site") => Ok(Mode::Site),
        Some("bond") => Ok(Mode::Bond),
        Some(other) => bail!(Validation(format!("params.mode \"{other}\" is not site|bond"))),
    }
}

fn parse_ratio(s: &str) -> Result<Mass> {
    let parts: Vec<&str> = s.split('/').collect();
    let err = || Validation(format!("bad rational \"{s}\" (want num/den)"));
    match parts.as_slice() {
        [n] => Ok(rat(n.trim().parse().map_err(|_| err())?, 1)),
        [n, d] => Ok(rat(
            n.trim().parse().map_err(|_| err())?,
            d.trim().parse().map_err(|_| err())?,
        )),
        _ => bail!(err()),
    }
}

// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallParams {
    radius: u32,
    cap: Option<usize>,
}

pub fn run_ball(raw: &RawConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let p: BallParams = params(raw)?;
    let spec = require_graph(raw)?;
    let oracle = make_oracle(&spec)?;
    let b = ball_capped(
        &oracle,
        &oracle.root(),
        p.radius,
        p.cap.unwrap_or(DEFAULT_BALL_CAP),
    )?;
    let mut artifacts = Vec::new();
    write_artifact(
        &ctx.out,
        "ball.txt",
        &perclab_core::graph::write_edge_list(&b),
        &mut artifacts,
    )?;
    println!(
        "ball: {} radius {} -> {} vertices, {} edges",
        spec.label(),
        p.radius,
        b.len(),
        b.edge_count()
    );
    Ok(artifacts)
}

// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalityParams {
    r_max: u32,
    cap: Option<usize>,
}

pub fn run_locality(raw: &RawConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let p: LocalityParams = params(raw)?;
    let g = require_graph(raw)?;
    let h = require_graph2(raw)?;
    let og = make_oracle(&g)?;
    let oh = make_oracle(&h)?;
    let rows = locality_scan(&og, &oh, p.r_max, p.cap.unwrap_or(DEFAULT_BALL_CAP))?;
    let csv_rows: Vec<Vec<Cell>> = rows
        .iter()
        .map(|&(k, sg, sh, iso)| {
            vec![
                Cell::UInt(k as u64),
                Cell::UInt(sg as u64),
                Cell::UInt(sh as u64),
                Cell::Bool(iso),
            ]
        })
        .collect();
    let mut artifacts = Vec::new();
    let path = ctx.out.join("locality-report.csv");
    emit_csv(&path, &["k", "ball_size_G", "ball_size_H", "isomorphic"], &csv_rows)?;
    artifacts.push(path);
    let last = rows.last().unwrap();
    let radius = if last.3 {
        format!(">= {}", last.0)
    } else {
        format!("{}", last.0.saturating_sub(1))
    };
    println!(
        "locality: R({}, {}) = {radius} (scanned to {})",
        g.label(),
        h.label(),
        p.r_max
    );
    Ok(artifacts)
}

// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetParams {
    kind: String,
    a: u32,
    window_radius: u32,
}

fn build_net(spec: &GroupSpec, kind: &str, a: u32, window_radius: u32) -> Result<Net> {
    let oracle = make_oracle(spec)?;
    let window = Arc::new(ball_capped(
        &oracle,
        &oracle.root(),
        window_radius,
        DEFAULT_BALL_CAP,
    )?);
    match kind {
        "z2-lattice" => Ok(z2_lattice_net(spec, a, window)?),
        "fiber" => Ok(fiber_net(spec, a, window)?),
        other => bail!(Validation(format!(
            "params.kind \"{other}\" is not z2-lattice|fiber"
        ))),
    }
}

fn net_report_row(net: &Net) -> Vec<Cell> {
    let report = verify_net(net);
    vec![
        Cell::UInt(net.a() as u64),
        Cell::UInt(net.b() as u64),
        Cell::UInt(net.points().len() as u64),
        Cell::UInt(report.max_degree as u64),
        Cell::Bool(report.separated),
        Cell::Bool(report.dense_on_interior),
        Cell::UInt(report.distance_bound_violations.len() as u64),
    ]
}

pub fn run_net(raw: &RawConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let p: NetParams = params(raw)?;
    let spec = require_graph(raw)?;
    let net = build_net(&spec, &p.kind, p.a, p.window_radius)?;
    let mut artifacts = Vec::new();
    write_artifact(&ctx.out, "net.txt", &write_net_fixture(&net), &mut artifacts)?;
    let path = ctx.out.join("net-report.csv");
    emit_csv(
        &path,
        &["a", "b", "n_points", "max_degree", "separated", "dense", "violations"],
        &[net_report_row(&net)],
    )?;
    artifacts.push(path);
    println!(
        "net: {} {} a={} -> {} points (b={})",
        p.kind,
        spec.label(),
        net.a(),
        net.points().len(),
        net.b()
    );
    Ok(artifacts)
}

// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnScanParams {
    p: Vec<f64>,
    n: Vec<u32>,
    samples: u32,
    mode: Option<String>,
    plot: Option<String>,
}

pub fn run_en_scan(raw: &RawConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let p: EnScanParams = params(raw)?;
    let spec = require_graph(raw)?;
    let mode = parse_mode(&p.mode)?;
    let oracle = make_oracle(&spec)?;
    let mut rows = Vec::new();
    for (i, &prob) in p.p.iter().enumerate() {
        for (j, &n) in p.n.iter().enumerate() {
            let seed = CounterStream::new(ctx.seed)
                .substream((i as u64) << 16 | j as u64)
                .seed();
            let est =
                estimate_event_prob(&oracle, mode, prob, n, p.samples, seed, DEFAULT_BALL_CAP)?;
            rows.push(vec![
                Cell::Str(spec.label().to_string()),
                Cell::Float(prob),
                Cell::UInt(n as u64),
                Cell::UInt(p.samples as u64),
                Cell::Float(est.p_hat),
                Cell::Float(est.ci_lo),
                Cell::Float(est.ci_hi),
                Cell::UInt(seed),
            ]);
        }
    }
    let mut artifacts = Vec::new();
    let path = ctx.out.join("en-scan.csv");
    let schema = ["graph", "p", "n", "samples", "p_hat", "ci_lo", "ci_hi", "seed"];
    emit_csv(&path, &schema, &rows)?;
    artifacts.push(path.clone());
    if let Some(kind) = &p.plot {
        let kind = match kind.as_str() {
            "line" => PlotKind::Line,
            "scatter" => PlotKind::Scatter,
            other => bail!(Validation(format!("params.plot \"{other}\" is not line|scatter"))),
        };
        let csv = std::fs::read_to_string(&path)?;
        let svg = render_plot(&csv, "n", "p_hat", Some("p"), kind, "block-event probability")?;
        write_artifact(&ctx.out, "en-scan.svg", &svg, &mut artifacts)?;
    }
    println!("en-scan: {} rows written", rows.len());
    Ok(artifacts)
}

// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RenormParams {
    net: String,
    a: u32,
    c: u32,
    n: u32,
    p: f64,
    window_radius: u32,
    mode: Option<String>,
}

pub fn run_renorm(raw: &RawConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let p: RenormParams = params(raw)?;
    let spec = require_graph(raw)?;
    let mode = parse_mode(&p.mode)?;
    let net = build_net(&spec, &p.net, p.a, p.window_radius)?;
    let cfg = sample_indexed(net.host().clone(), mode, p.p, ctx.seed, 0);
    let rp = renormalize(&cfg, &net, p.n, p.c)?;
    let open = rp.open_interior_positions().len();
    let interior = rp.eta.iter().filter(|e| e.is_some()).count();
    let mut artifacts = Vec::new();
    write_artifact(&ctx.out, "eta.txt", &write_eta_fixture(&rp), &mut artifacts)?;
    println!(
        "renorm: n={} a={} C={}: {} of {} interior blocks open (p={})",
        p.n,
        p.a,
        p.c,
        open,
        interior,
        p.p
    );
    Ok(artifacts)
}

// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DominateParams {
    k: u32,
    d_max: usize,
    adversaries: Vec<String>,
    graphs: Vec<String>,
    marginals: Vec<String>,
}

fn named_fixture_graph(name: &str) -> Result<FiniteGraph> {
    Ok(match name {
        "edge" => path_graph(2),
        "path3" => path_graph(3),
        "path4" => path_graph(4),
        "path5" => path_graph(5),
        "cycle4" => cycle_graph(4),
        "cycle6" => cycle_graph(6),
        "star3" => star_graph(3),
        other => bail!(Validation(format!("unknown fixture graph \"{other}\""))),
    })
}

fn named_adversary(name: &str) -> Result<AdversaryKind> {
    Ok(match name {
        "product" => AdversaryKind::Product,
        "fully-correlated" => AdversaryKind::FullyCorrelated,
        "antagonistic" => AdversaryKind::Antagonistic,
        "block-min" => AdversaryKind::BlockFactor {
            radius: 1,
            rule: BlockRule::Min,
        },
        "block-majority" => AdversaryKind::BlockFactor {
            radius: 1,
            rule: BlockRule::Majority,
        },
        other => bail!(Validation(format!("unknown adversary \"{other}\""))),
    })
}

pub fn run_dominate(raw: &RawConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let p: DominateParams = params(raw)?;
    let graphs: Result<Vec<(String, FiniteGraph)>> = p
        .graphs
        .iter()
        .map(|n| named_fixture_graph(n).map(|g| (n.clone(), g)))
        .collect();
    let graphs = graphs?;
    let kinds: Result<Vec<(String, AdversaryKind)>> = p
        .adversaries
        .iter()
        .map(|n| named_adversary(n).map(|k| (n.clone(), k)))
        .collect();
    let kinds = kinds?;

    let mut rows = Vec::new();
    for (gname, g) in &graphs {
        for (aname, kind) in &kinds {
            for m in &p.marginals {
                let marginal = parse_ratio(m)?;
                let law = kind.instantiate(&marginal, g)?;
                let cert = certify_k_dependent(&law, p.k);
                let target = product_law(g, three_quarters())?;
                let dominates = dominates_exact(&law, &target)?;
                rows.push(vec![
                    Cell::Str(gname.clone()),
                    Cell::Str(aname.clone()),
                    Cell::Bool(cert.verified),
                    Cell::Float(marginal.to_f64().unwrap()),
                    Cell::Bool(dominates),
                ]);
            }
        }
    }
    let mut artifacts = Vec::new();
    let path = ctx.out.join("dominate.csv");
    emit_csv(
        &path,
        &["graph", "spec", "k_cert", "marginal", "dominates_3_4"],
        &rows,
    )?;
    artifacts.push(path);

    let adversary_kinds: Vec<AdversaryKind> = kinds.iter().map(|(_, k)| *k).collect();
    let fixture_graphs: Vec<FiniteGraph> = graphs.iter().map(|(_, g)| g.clone()).collect();
    let q = estimate_q_threshold(p.k, p.d_max, &adversary_kinds, &fixture_graphs)?;
    println!(
        "dominate: {} rows; empirical q threshold = {} (~{:.4})",
        rows.len(),
        q,
        q.to_f64().unwrap()
    );
    Ok(artifacts)
}

// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoupleParams {
    lift: String,
    keep: Option<Vec<usize>>,
    moduli: Option<Vec<Option<u64>>>,
    p: f64,
    max_steps: u32,
    window: Option<u32>,
    horizon: Option<u32>,
}

pub fn run_couple(raw: &RawConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let p: CoupleParams = params(raw)?;
    let source_spec = require_graph(raw)?;
    let target_spec = require_graph2(raw)?;
    let source: Arc<dyn GraphOracle> = Arc::new(make_oracle(&source_spec)?);
    let target: Arc<dyn GraphOracle> = Arc::new(make_oracle(&target_spec)?);
    let label = format!("{}->{}", source_spec.label(), target_spec.label());
    let lift = match p.lift.as_str() {
        "coordinate-projection" => {
            let keep = p
                .keep
                .clone()
                .ok_or_else(|| Validation("params.keep required for coordinate-projection".into()))?;
            LiftMap::coordinate_projection(source, target, keep, label)
        }
        "mod-reduction" => {
            let moduli = p
                .moduli
                .clone()
                .ok_or_else(|| Validation("params.moduli required for mod-reduction".into()))?;
            LiftMap::mod_reduction(source, target, moduli, label)
        }
        other => bail!(Validation(format!(
            "params.lift \"{other}\" is not coordinate-projection|mod-reduction"
        ))),
    };

    let w = p.window.unwrap_or(4);
    let sw = ball_capped(lift.source.as_ref(), &lift.source.root(), w, DEFAULT_BALL_CAP)?;
    let tw = ball_capped(lift.target.as_ref(), &lift.target.root(), w, DEFAULT_BALL_CAP)?;
    let lr = check_lift_property(&lift, &sw, &tw);
    if !lr.lifting_ok {
        bail!(
            "lift property fails at {:?} -> {:?}",
            lr.lift_witness.as_ref().unwrap().0,
            lr.lift_witness.as_ref().unwrap().1
        );
    }

    let run = coupled_exploration(&lift, p.p, ctx.seed, p.max_steps)?;
    let rows: Vec<Vec<Cell>> = run
        .history
        .iter()
        .enumerate()
        .map(|(step, &(bo, bc, lo, lc))| {
            vec![
                Cell::UInt(step as u64),
                Cell::UInt(bo as u64),
                Cell::UInt(bc as u64),
                Cell::UInt(lo as u64),
                Cell::UInt(lc as u64),
                Cell::Bool(bo == lo && bc == lc),
            ]
        })
        .collect();
    let mut artifacts = Vec::new();
    let path = ctx.out.join("couple.csv");
    emit_csv(
        &path,
        &["step", "base_open", "base_closed", "lifted_open", "lifted_closed", "sizes_equal"],
        &rows,
    )?;
    artifacts.push(path);

    if let Some(h) = p.horizon {
        let frac = parse_ratio(&format!("{}", (p.p * 128.0).round() as i64))? / rat(128, 1);
        let report = marginal_law_check(&lift, &frac, h)?;
        println!(
            "couple: exact horizon-{h} marginals at p={}: base {} lifted {} sizes {} tails {}",
            frac,
            report.base_law_ok,
            report.lifted_law_ok,
            report.size_equality_ok,
            report.tail_domination_ok
        );
        if !report.all_ok() {
            bail!("exact marginal check failed");
        }
    }
    println!(
        "couple: {} steps, base cluster {}, lifted cluster {}, terminated {}",
        run.history.len(),
        run.base.open.len(),
        run.lifted.open.len(),
        run.terminated
    );
    Ok(artifacts)
}

// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PcParams {
    trials: u32,
    region_scale: u32,
    mode: Option<String>,
    plot: Option<String>,
}

pub fn run_pc_estimate(raw: &RawConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let p: PcParams = params(raw)?;
    let spec = require_graph(raw)?;
    let mode = parse_mode(&p.mode)?;
    let oracle = make_oracle(&spec)?;
    let est = estimate_pc(&oracle, mode, p.trials, p.region_scale, ctx.seed, DEFAULT_BALL_CAP)?;
    let mut artifacts = Vec::new();
    let path = ctx.out.join("pc-estimate.csv");
    emit_csv(
        &path,
        &["graph", "region_scale", "trials", "p_c_hat", "ci_lo", "ci_hi", "seed"],
        &[vec![
            Cell::Str(spec.label().to_string()),
            Cell::UInt(p.region_scale as u64),
            Cell::UInt(p.trials as u64),
            Cell::Float(est.p_c_hat),
            Cell::Float(est.ci_lo),
            Cell::Float(est.ci_hi),
            Cell::UInt(ctx.seed),
        ]],
    )?;
    artifacts.push(path);
    let curve_rows: Vec<Vec<Cell>> = est
        .curve
        .iter()
        .map(|c| {
            vec![
                Cell::Float(c.p),
                Cell::UInt(c.trials as u64),
                Cell::UInt(c.successes as u64),
                Cell::Float(c.successes as f64 / c.trials as f64),
            ]
        })
        .collect();
    let curve_path = ctx.out.join("pc-curve.csv");
    emit_csv(&curve_path, &["p", "trials", "successes", "spanning"], &curve_rows)?;
    artifacts.push(curve_path.clone());
    if let Some(kind) = &p.plot {
        let kind = match kind.as_str() {
            "line" => PlotKind::Line,
            "scatter" => PlotKind::Scatter,
            other => bail!(Validation(format!("params.plot \"{other}\" is not line|scatter"))),
        };
        let csv = std::fs::read_to_string(&curve_path)?;
        let svg = render_plot(&csv, "p", "spanning", None, kind, "spanning probability")?;
        write_artifact(&ctx.out, "pc-curve.svg", &svg, &mut artifacts)?;
    }
    println!(
        "pc-estimate: {} at scale {}: p_c_hat = {:.4} (CI [{:.4}, {:.4}])",
        spec.label(),
        p.region_scale,
        est.p_c_hat,
        est.ci_lo,
        est.ci_hi
    );
    Ok(artifacts)
}

// ---------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineParams {
    p: f64,
    q: Option<f64>,
    n_candidates: Vec<u32>,
    samples: u32,
    interior_radius: Option<u32>,
    mode: Option<String>,
}

/// The end-to-end renormalization pipeline: build a controlled net,
/// choose the block scale whose event probability clears the configured
/// threshold, renormalize, certify the independence radius, and report
/// whether the renormalized process percolates across the interior.
/// Refuses to draw conclusions when any structural certificate fails.
pub fn run_pipeline(raw: &RawConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let p: PipelineParams = params(raw)?;
    let spec = require_graph(raw)?;
    let mode = parse_mode(&p.mode)?;
    let q = p.q.unwrap_or(0.9375);
    let oracle = make_oracle(&spec)?;
    let mut artifacts = Vec::new();
    let mut stages: Vec<Vec<Cell>> = Vec::new();
    let stage = |name: &str, status: bool, detail: String, stages: &mut Vec<Vec<Cell>>| {
        println!("pipeline: {name}: {} ({detail})", if status { "ok" } else { "FAILED" });
        stages.push(vec![
            Cell::Str(name.to_string()),
            Cell::Bool(status),
            Cell::Str(detail),
        ]);
        status
    };

    // Stage 1: block scale selection by event probability.
    let mut chosen: Option<(u32, f64)> = None;
    for (i, &n) in p.n_candidates.iter().enumerate() {
        let seed = CounterStream::new(ctx.seed).substream(100 + i as u64).seed();
        let est = estimate_event_prob(&oracle, mode, p.p, n, p.samples, seed, DEFAULT_BALL_CAP)?;
        println!(
            "pipeline: scale n={n}: P(E_n) = {:.4} [{:.4}, {:.4}]",
            est.p_hat, est.ci_lo, est.ci_hi
        );
        if est.p_hat >= q {
            chosen = Some((n, est.p_hat));
            break;
        }
    }
    let (n, p_hat) = match chosen {
        Some(c) => c,
        None => {
            stage(
                "scale-selection",
                false,
                format!("no candidate scale reached q = {q}"),
                &mut stages,
            );
            let path = ctx.out.join("pipeline.csv");
            emit_csv(&path, &["stage", "status", "detail"], &stages)?;
            artifacts.push(path);
            bail!("pipeline aborted: no block scale reached the event-probability threshold");
        }
    };
    stage(
        "scale-selection",
        true,
        format!("n = {n}, P(E_n) = {p_hat:.4} >= q = {q}"),
        &mut stages,
    );

    // Stage 2: net construction with the C-controlled parameters. The
    // plane-lattice recipe carries C = 1, the fiber recipe C = 2.
    let (c_control, is_fiber) = if spec.is_plane() {
        (1u32, false)
    } else {
        quotient_map(&spec).map_err(|e| {
            anyhow::anyhow!("pipeline needs a plane or plane-quotient graph: {e}")
        })?;
        (2u32, true)
    };
    let a = n.div_ceil(4 * c_control);
    let interior_radius = p.interior_radius.unwrap_or(16);
    let window_radius = 10 * n + interior_radius;
    let window = Arc::new(ball_capped(&oracle, &oracle.root(), window_radius, DEFAULT_BALL_CAP)?);
    let net = if is_fiber {
        fiber_net(&spec, a, window.clone())?
    } else {
        z2_lattice_net(&spec, a, window.clone())?
    };
    let report = verify_net(&net);
    let net_ok = stage(
        "net-certificates",
        report.separated && report.dense_on_interior,
        format!(
            "a = {a}, b = {}, {} points, max degree {}",
            net.b(),
            net.points().len(),
            report.max_degree
        ),
        &mut stages,
    );
    let net_csv = ctx.out.join("net-report.csv");
    emit_csv(
        &net_csv,
        &["a", "b", "n_points", "max_degree", "separated", "dense", "violations"],
        &[net_report_row(&net)],
    )?;
    artifacts.push(net_csv);

    // Stage 3: renormalize.
    let cfg = sample_indexed(window.clone(), mode, p.p, ctx.seed, 0);
    let rp = renormalize(&cfg, &net, n, c_control)?;
    let interior: Vec<u32> = rp
        .eta
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|_| i as u32))
        .collect();
    let open = rp.open_interior_positions();
    stage(
        "renormalize",
        true,
        format!("{} of {} interior blocks open", open.len(), interior.len()),
        &mut stages,
    );
    write_artifact(&ctx.out, "eta.txt", &write_eta_fixture(&rp), &mut artifacts)?;

    // Stage 4: independence radius certificate.
    let ind = independence_radius_report(&net, n);
    let ind_ok = stage(
        "independence-radius",
        ind.certified,
        format!("{} interior pairs scanned", ind.pairs_checked),
        &mut stages,
    );

    // Stage 5: eta percolation across the interior, with constructive
    // gluing of every renormalized edge.
    let percolates = eta_spans_interior(&rp, interior_radius);
    let glue = check_gluing(&cfg, &rp);
    let glue_ok = stage(
        "gluing",
        glue.edge_failures == 0 && glue.component_failures == 0,
        format!(
            "{} eta-open edges, longest extracted host path {}",
            glue.edges_checked, glue.longest_host_path
        ),
        &mut stages,
    );

    let all_certified = net_ok && ind_ok && glue_ok;
    if all_certified {
        stage(
            "eta-percolation",
            true,
            format!(
                "renormalized process {} the interior window",
                if percolates { "spans" } else { "does not span" }
            ),
            &mut stages,
        );
    } else {
        stage(
            "eta-percolation",
            false,
            "withheld: a structural certificate failed".into(),
            &mut stages,
        );
    }

    let path = ctx.out.join("pipeline.csv");
    emit_csv(&path, &["stage", "status", "detail"], &stages)?;
    artifacts.push(path);
    if !all_certified {
        bail!("pipeline certificates failed; eta-percolation conclusion withheld");
    }
    Ok(artifacts)
}

/// Does some eta-open component reach from blocks near the root to blocks
/// near the interior boundary?
fn eta_spans_interior(rp: &perclab_core::percolation::RenormalizedProcess, interior_radius: u32) -> bool {
    let net = &rp.net;
    let dist = net.host().dist_from_root().unwrap();
    let open = rp.open_interior_positions();
    let open_flag: Vec<bool> = {
        let mut f = vec![false; net.points().len()];
        for &p in &open {
            f[p as usize] = true;
        }
        f
    };
    let b = net.b();
    let near_root = |pos: u32| dist[net.points()[pos as usize] as usize] <= 2 * b;
    let near_edge =
        |pos: u32| dist[net.points()[pos as usize] as usize] + 2 * b >= interior_radius;
    // BFS over eta-open net components from root-adjacent blocks.
    let mut seen = vec![false; net.points().len()];
    let mut queue = std::collections::VecDeque::new();
    for &p in &open {
        if near_root(p) {
            seen[p as usize] = true;
            queue.push_back(p);
        }
    }
    while let Some(u) = queue.pop_front() {
        if near_edge(u) {
            return true;
        }
        for &w in &net.net_adj()[u as usize] {
            if open_flag[w as usize] && !seen[w as usize] {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    false
}
