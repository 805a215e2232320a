use std::path::Path;

use lapcompress::compress::{dominant_basis_table, dominant_csv, energy_curve_with, CurveOptions};
use lapcompress::consensus::{simulate_consensus_with, ConsensusConfig, InputNode};
use lapcompress::ensemble_stats::{
    corollary_lower_bound, theorem1_sigma_with, variance_decay_profile, whitening_basis, MomentForm,
};
use lapcompress::graph::{
    build_laplacian, consensus_matrix, format_coords, format_edge_list, read_coords, read_edge_list, read_labels,
    GeometricParams, NetworkGraph, WeightScheme,
};
use lapcompress::ingest::{
    ensemble_csv, parse_field_dataset, parse_snapshot_table, synthesize_field_data, us_contiguous_coords,
    us_contiguous_graph, US_CONTIGUOUS_COORDS,
};
use lapcompress::report::{
    eigenvector_overlay, figure2_data, figure5_data, matrix_csv, CompressReport, DominantTable, OutputDir,
    Provenance, WhiteningReport,
};
use lapcompress::spectral::eigenbasis;
use lapcompress::voter::{simulate_voter_with, voter_mean_field, VoterConfig};
use lapcompress::{Error, Execution, Result};

use crate::cli::{CompressArgs, GenGraphArgs, Model, ReportArgs, SimulateArgs, StatsArgs, SynthFieldArgs, Weights};

fn graph_or_bundled(graph: Option<&Path>, labels: Option<&Path>) -> Result<NetworkGraph> {
    let g = match graph {
        Some(p) => read_edge_list(p)?,
        None => us_contiguous_graph(),
    };
    match labels {
        Some(l) => g.with_labels(read_labels(l)?),
        None => Ok(g),
    }
}

fn path_param(p: Option<&Path>) -> String {
    p.map_or_else(|| "bundled".to_string(), |p| p.display().to_string())
}

pub fn gen_graph(args: &GenGraphArgs) -> Result<()> {
    let weights = match args.weights {
        Weights::InDegree => WeightScheme::InDegree,
        Weights::Uniform => WeightScheme::Uniform,
    };
    let mut params = GeometricParams::new(args.n as usize, args.radius, args.row_sum, args.seed).weights(weights);
    params.max_attempts = args.max_attempts;
    let g = params.generate()?;
    let mut out = OutputDir::create(&args.out.out_dir)?;
    out.write("graph.edges", format_edge_list(&g.graph))?;
    out.write("coords.csv", format_coords(&g.coords))?;
    let weights = match args.weights {
        Weights::InDegree => "in-degree",
        Weights::Uniform => "uniform",
    };
    out.finish(
        Provenance::new("gen-graph")
            .seed(args.seed)
            .param("n", args.n)
            .param("radius", args.radius)
            .param("row-sum", args.row_sum)
            .param("weights", weights)
            .param("attempts", g.attempts),
    )?;
    Ok(())
}

fn parse_pins(specs: &[String]) -> Result<Vec<(usize, u8)>> {
    specs
        .iter()
        .map(|s| {
            let (node, status) = s
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("pin `{s}` is not NODE:STATUS")))?;
            let node = node
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("pin `{s}`: bad node index")))?;
            let status = status
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("pin `{s}`: bad status")))?;
            Ok((node, status))
        })
        .collect()
}

pub fn simulate(args: &SimulateArgs, exec: Execution) -> Result<()> {
    let g = read_edge_list(&args.graph)?;
    let a = consensus_matrix(&g)?;
    let times = if args.snapshot_times.is_empty() {
        vec![args.k_max]
    } else {
        args.snapshot_times.clone()
    };
    let times_param = times.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let mut prov = Provenance::new("simulate")
        .seed(args.seed)
        .param("graph", args.graph.display())
        .param("k-max", args.k_max)
        .param("snapshot-times", &times_param)
        .param("ensemble-size", args.ensemble_size);
    let mut out = OutputDir::create(&args.out.out_dir)?;
    match args.model {
        Model::Consensus => {
            let input = match args.input_node.as_str() {
                "random" => InputNode::Random,
                s => InputNode::Fixed(
                    s.parse()
                        .map_err(|_| Error::Config(format!("--input-node `{s}` is not an index or `random`")))?,
                ),
            };
            let cfg = ConsensusConfig::new(a, input, args.k_max, args.ensemble_size, args.seed).snapshot_times(times);
            let run = simulate_consensus_with(&cfg, exec)?;
            out.write("snapshots.csv", ensemble_csv(&run.snapshots))?;
            out.write("input_nodes.csv", run.input_nodes_csv())?;
            prov = prov.param("model", "consensus").param("input-node", &args.input_node);
        }
        Model::Voter => {
            let pins = if args.no_pins {
                Vec::new()
            } else if args.pins.is_empty() {
                VoterConfig::default_pins(g.n())
            } else {
                parse_pins(&args.pins)?
            };
            let pins_param = pins.iter().map(|(n, s)| format!("{n}:{s}")).collect::<Vec<_>>().join(",");
            let cfg = VoterConfig::new(a, args.k_max, args.ensemble_size, args.seed)
                .pinned(pins)
                .snapshot_times(times);
            let snaps = simulate_voter_with(&cfg, exec)?;
            out.write("snapshots.csv", ensemble_csv(&snaps))?;
            if !cfg.pinned.is_empty() {
                let mean = voter_mean_field(&cfg)?;
                let mut csv = String::from("node,mean_field\n");
                for (i, m) in mean.iter().enumerate() {
                    csv.push_str(&format!("{i},{m}\n"));
                }
                out.write("mean_field.csv", csv)?;
            }
            prov = prov.param("model", "voter").param("pins", pins_param);
        }
    }
    out.finish(prov)?;
    Ok(())
}

pub fn compress(args: &CompressArgs, exec: Execution) -> Result<()> {
    let graph = graph_or_bundled(args.graph.as_deref(), args.labels.as_deref())?;
    let path = args.snapshots.as_path();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let basis = eigenbasis(&build_laplacian(&graph))?;
    let label = args.label.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let field = text.lines().next().is_some_and(|h| !h.trim_start().starts_with("instance_id"));
    let mut out = OutputDir::create(&args.out.out_dir)?;

    let snapshots = if field {
        let ds = parse_field_dataset(graph, &text, path)?;
        let fig5 = figure5_data(&ds, &basis, &args.k, exec)?;
        out.write("per_day.csv", &fig5.csv)?;
        ds.snapshots
    } else {
        let table = parse_snapshot_table(&text, path, Some(&graph))?;
        let mut snaps = Vec::with_capacity(table.rows.len());
        for (inst, t, values) in table.rows {
            let values: Option<Vec<f64>> = values.into_iter().collect();
            let values = values.ok_or_else(|| {
                Error::Config(format!("{}: instance {inst} time {t} has a missing value", path.display()))
            })?;
            snaps.push(lapcompress::Snapshot::new(values, t, inst)?);
        }
        let fig2 = figure2_data(&snaps, &basis, &args.k, exec)?;
        out.write("per_instance.csv", &fig2.per_instance_csv)?;
        out.write("mean.csv", &fig2.mean_csv)?;
        snaps
    };

    let opts = CurveOptions {
        round: args.round,
        refit: args.refit,
    };
    let curve = energy_curve_with(&basis, &snapshots, &args.k, opts, exec)?;
    out.write("energy_curve.csv", curve.to_csv())?;

    let top = args.top.min(basis.n());
    let mut dominant = Vec::with_capacity(snapshots.len());
    let mut dom_csv = String::new();
    for s in &snapshots {
        let entries = dominant_basis_table(&basis, &s.values, top)?;
        let table = dominant_csv(&entries);
        if dom_csv.is_empty() {
            dom_csv.push_str("instance_id,time_index,");
            dom_csv.push_str(table.lines().next().unwrap_or(""));
            dom_csv.push('\n');
        }
        for line in table.lines().skip(1) {
            dom_csv.push_str(&format!("{},{},{line}\n", s.instance_id, s.time_index));
        }
        dominant.push(DominantTable {
            instance_id: s.instance_id,
            time_index: s.time_index,
            entries,
        });
    }
    out.write("dominant.csv", dom_csv)?;
    out.write("eigenvalues.csv", basis.eigenvalues_csv())?;

    let k_param = args.k.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let prov = Provenance::new("compress")
        .param("snapshots", path.display())
        .param("graph", path_param(args.graph.as_deref()))
        .param("k", k_param)
        .param("round", args.round)
        .param("refit", args.refit)
        .param("top", top)
        .param("layout", if field { "field" } else { "ensemble" });
    let mut report = CompressReport::new(&label, &basis, curve, prov.clone());
    report.dominant = dominant;
    out.write("report.json", report.to_json()?)?;
    out.finish(prov)?;
    Ok(())
}

pub fn stats(args: &StatsArgs) -> Result<()> {
    let g = read_edge_list(&args.graph)?;
    let basis = eigenbasis(&build_laplacian(&g))?;
    let form = if args.exact { MomentForm::Exact } else { MomentForm::Asymptotic };
    let st = theorem1_sigma_with(&basis, args.z, args.k, form)?;
    let mut out = OutputDir::create(&args.out.out_dir)?;
    out.write("sigma.csv", matrix_csv(&st.sigma, "row", "col"))?;
    out.write("c.csv", matrix_csv(&st.c, "row", "col"))?;
    out.write("eigenvalues.csv", basis.eigenvalues_csv())?;
    let mut prov = Provenance::new("stats")
        .param("graph", args.graph.display())
        .param("z", args.z)
        .param("k", args.k)
        .param("form", if args.exact { "exact" } else { "asymptotic" });
    if let Some(kk) = args.sparsity {
        let bound = corollary_lower_bound(&st, kk)?;
        out.write("lower_bound.csv", format!("K,lower_bound\n{kk},{bound}\n"))?;
        prov = prov.param("sparsity", kk);
    }
    if args.whiten {
        let wb = whitening_basis(&basis, &st)?;
        let profile = variance_decay_profile(&wb);
        out.write("phi.csv", matrix_csv(&wb.phi, "node", "phi"))?;
        let mut d_csv = String::from("index,variance\n");
        for (i, d) in wb.d.iter().enumerate() {
            d_csv.push_str(&format!("{i},{d}\n"));
        }
        out.write("variances.csv", d_csv)?;
        let report = WhiteningReport::new(&st, &wb.d, &profile, prov.clone());
        out.write("whitening.json", report.to_json()?)?;
        prov = prov.param("whiten", true);
    }
    out.finish(prov)?;
    Ok(())
}

pub fn synth_field(args: &SynthFieldArgs) -> Result<()> {
    let g = graph_or_bundled(args.graph.as_deref(), args.labels.as_deref())?;
    let mut out = OutputDir::create(&args.out.out_dir)?;
    out.write("field.csv", synthesize_field_data(&g, args.days as usize, args.seed))?;
    out.write("graph.edges", format_edge_list(&g))?;
    if let Some(labels) = g.labels() {
        out.write("graph.labels", labels.join("\n") + "\n")?;
    }
    if args.graph.is_none() {
        out.write("coords.csv", US_CONTIGUOUS_COORDS)?;
    }
    out.finish(
        Provenance::new("synth-field")
            .seed(args.seed)
            .param("graph", path_param(args.graph.as_deref()))
            .param("days", args.days),
    )?;
    Ok(())
}

pub fn report(args: &ReportArgs) -> Result<()> {
    let g = graph_or_bundled(args.graph.as_deref(), args.labels.as_deref())?;
    let coords = match (&args.coords, &args.graph) {
        (Some(c), _) => Some(read_coords(c)?),
        (None, None) => Some(us_contiguous_coords()),
        (None, Some(_)) => None,
    };
    let basis = eigenbasis(&build_laplacian(&g))?;
    let mut out = OutputDir::create(&args.out.out_dir)?;
    out.write("eigenvalues.csv", basis.eigenvalues_csv())?;
    out.write("vectors.csv", basis.vectors_csv())?;
    for &i in &args.index {
        out.write(&format!("overlay_{i}.csv"), eigenvector_overlay(&basis, i, &g, coords.as_deref())?)?;
    }
    let idx = args.index.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    out.finish(
        Provenance::new("report")
            .param("graph", path_param(args.graph.as_deref()))
            .param("index", idx),
    )?;
    Ok(())
}
