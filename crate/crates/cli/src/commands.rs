use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::Command;
use netdim_core::constructors::{
    cube_gap_volume, default_k, flip_noise, geometric_graph, knn_graph, sample, Distribution, NoiseSpec, SamplerSpec,
};
use netdim_core::graph::{similarity_to_dissimilarity, SimilarityToDissimilarity};
use netdim_core::io;
use netdim_core::pipeline::{sweep, SweepConfig};
use netdim_core::spectral::{build_laplacian, spectral_embed, spectrum, EigenOptions, Solver, DENSE_LIMIT};
use netdim_core::twonn::{
    estimate_dimension_with_window, neighbour_ratios_from_dissimilarity, neighbour_ratios_from_points,
    nn_distance_histogram, NeighbourRatios, Window,
};
use netdim_core::{UnweightedGraph, WeightedGraph};

use crate::manifest::Manifest;
use crate::{
    Cmd, Common, Convert, DataKind, Dist, GraphKind, ReplayArgs, SolverArg, SolverOpts, WindowOpts, CliError,
    NO_PLATEAU,
};

type CliResult<T> = Result<T, CliError>;

pub fn run(command: Cmd, mut manifest: Manifest) -> CliResult<u8> {
    match command {
        Cmd::Gen(a) => {
            let spec = SamplerSpec {
                distribution: match a.dist {
                    Dist::Cube => Distribution::UniformCube,
                    Dist::Gaussian => Distribution::StandardGaussian,
                },
                dim: a.d,
                n: a.n,
                seed: a.seed,
            };
            manifest.resolve("rng", "chacha20");
            let cloud = sample(&spec)?;
            write_with(&a.output, |w| io::write_points(&cloud, w))?;
            finish(&manifest, &a.common, Some(&a.output))?;
            println!("wrote {} points in R^{} to {}", cloud.n(), cloud.dim(), a.output.display());
            Ok(0)
        }
        Cmd::Knn(a) => {
            manifest.add_input("input", &a.input)?;
            let cloud = io::load_points(&a.input)?;
            let k = a.k.unwrap_or_else(|| default_k(cloud.n()));
            manifest.resolve("k", k);
            let g = knn_graph(&cloud, k)?;
            write_with(&a.output, |w| io::write_edge_list(&g, w))?;
            finish(&manifest, &a.common, Some(&a.output))?;
            println!("k={k} nodes={} edges={} components={}", g.n(), g.num_edges(), g.component_count());
            Ok(0)
        }
        Cmd::Geometric(a) => {
            manifest.add_input("input", &a.input)?;
            let cloud = io::load_points(&a.input)?;
            let g = geometric_graph(&cloud, a.r)?;
            write_with(&a.output, |w| io::write_edge_list(&g, w))?;
            finish(&manifest, &a.common, Some(&a.output))?;
            println!("r={} nodes={} edges={} components={}", a.r, g.n(), g.num_edges(), g.component_count());
            Ok(0)
        }
        Cmd::Perturb(a) => {
            manifest.add_input("input", &a.input)?;
            let g = io::load_edge_list(&a.input)?;
            let noisy = flip_noise(&g, &NoiseSpec::new(a.p, a.seed)?)?;
            manifest.resolve("rng", "chacha20");
            write_with(&a.output, |w| io::write_edge_list(&noisy, w))?;
            finish(&manifest, &a.common, Some(&a.output))?;
            println!("p={} nodes={} edges_before={} edges_after={}", a.p, g.n(), g.num_edges(), noisy.num_edges());
            Ok(0)
        }
        Cmd::Volume(a) => {
            let v = cube_gap_volume(a.d, a.r)?;
            finish(&manifest, &a.common, None)?;
            println!("{v}");
            Ok(0)
        }
        Cmd::Spectrum(a) => {
            manifest.add_input("input", &a.input)?;
            let (graph, kept) = load_graph(&a.input, a.kind, a.giant_component)?;
            let l = graph.laplacian();
            let m = a.m.unwrap_or(l.n().min(30));
            manifest.resolve("m", m);
            let opts = eigen_options(&a.solver, &mut manifest);
            let report = spectrum(&l, m, &opts)?;
            manifest.resolve("zero_threshold", report.zero_threshold);
            write_with(&a.output, |w| io::write_spectrum(&report, w))?;
            write_kept(&a.output, kept.as_deref())?;
            finish(&manifest, &a.common, Some(&a.output))?;
            println!(
                "m={m} nodes={} zero_multiplicity={} largest={}",
                l.n(),
                report.zero_multiplicity,
                report.eigenvalues.last().copied().unwrap_or(f64::NAN)
            );
            Ok(0)
        }
        Cmd::Embed(a) => {
            manifest.add_input("input", &a.input)?;
            let (graph, kept) = load_graph(&a.input, a.kind, a.giant_component)?;
            let opts = eigen_options(&a.solver, &mut manifest);
            let emb = match &graph {
                Graph::Unweighted(g) => spectral_embed(g, a.k, &opts)?,
                Graph::Weighted(w) => spectral_embed(w, a.k, &opts)?,
            };
            write_with(&a.output, |w| io::write_embedding(&emb, w))?;
            write_kept(&a.output, kept.as_deref())?;
            finish(&manifest, &a.common, Some(&a.output))?;
            println!(
                "nodes={} k={} lambda_1={} lambda_k={}",
                emb.n(),
                emb.k(),
                emb.eigenvalues[0],
                emb.eigenvalues[emb.k() - 1]
            );
            Ok(0)
        }
        Cmd::EstimateWeighted(a) => {
            manifest.add_input("input", &a.input)?;
            let window = window(&a.window)?;
            let (ratios, kind) = load_ratios(&a.input, a.kind, a.convert)?;
            manifest.resolve("kind", kind);
            let est = estimate_dimension_with_window(&ratios, window)?;
            manifest.resolve("window_lo_rank", est.window.0);
            manifest.resolve("window_hi_rank", est.window.1);
            write_with(&a.output, |w| io::write_d_curve(&est, w))?;
            write_with(&sidecar(&a.output, "summary"), |w| io::write_estimate_summary(&est, w))?;
            finish(&manifest, &a.common, Some(&a.output))?;
            println!("d_star={} d_min={} d_max={} n={}", est.d_star, est.d_min, est.d_max, est.n);
            Ok(0)
        }
        Cmd::EstimateUnweighted(a) => {
            manifest.add_input("input", &a.input)?;
            let window = window(&a.window)?;
            let mut g = io::load_edge_list(&a.input)?;
            let mut kept = None;
            if a.giant_component {
                let (giant, ids) = g.giant_component();
                g = giant;
                kept = Some(ids);
            }
            let cfg = SweepConfig {
                s_min: a.s_min,
                s_max: a.s_max,
                plateau_epsilon: a.plateau_eps,
                plateau_len: a.plateau_len,
                window,
                eigen: eigen_options(&a.solver, &mut manifest),
                warm_start: a.warm_start,
                stop_at_plateau: !a.full_sweep,
            };
            let result = sweep(&g, &cfg)?;
            write_with(&a.output, |w| io::write_sweep(&result, w))?;
            write_kept(&a.output, kept.as_deref())?;
            finish(&manifest, &a.common, Some(&a.output))?;
            match &result.plateau {
                Some(p) => {
                    println!(
                        "chosen_dimension={} mean_d_star={} plateau={}..{} nodes={}",
                        p.chosen_dimension,
                        p.mean_d_star,
                        p.s_first,
                        p.s_last,
                        g.n()
                    );
                    Ok(0)
                }
                None => {
                    println!("chosen_dimension=none s={}..{} nodes={}", a.s_min, a.s_max, g.n());
                    Ok(NO_PLATEAU)
                }
            }
        }
        Cmd::NnHist(a) => {
            manifest.add_input("input", &a.input)?;
            let (ratios, kind) = load_ratios(&a.input, a.kind, a.convert)?;
            manifest.resolve("kind", kind);
            let bins = nn_distance_histogram(&ratios, a.bins)?;
            write_with(&a.output, |w| io::write_histogram(&bins, w))?;
            finish(&manifest, &a.common, Some(&a.output))?;
            println!(
                "bins={} n={} r1_min={} r1_max={}",
                bins.len(),
                ratios.n(),
                bins[0].left,
                bins[bins.len() - 1].right
            );
            Ok(0)
        }
        Cmd::Replay(_) => unreachable!("replay is dispatched before manifests are built"),
    }
}

pub fn replay(cmd: &Command, args: &ReplayArgs) -> CliResult<u8> {
    let text = fs::read_to_string(&args.manifest)
        .map_err(|e| CliError::Domain(format!("reading {}: {e}", args.manifest.display())))?;
    let manifest = Manifest::parse(&text)?;
    if manifest.get("subcommand") == Some("replay") {
        return Err(CliError::Usage("cannot replay a replay".into()));
    }
    manifest.verify_inputs()?;
    crate::dispatch(manifest.to_argv(cmd)?)
}

enum Graph {
    Unweighted(UnweightedGraph),
    Weighted(WeightedGraph),
}

impl Graph {
    fn laplacian(&self) -> netdim_core::spectral::Laplacian {
        match self {
            Graph::Unweighted(g) => build_laplacian(g),
            Graph::Weighted(w) => build_laplacian(w),
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Sniffed {
    MatrixMarket,
    DenseMatrix,
    Other,
}

fn sniff(path: &Path) -> CliResult<Sniffed> {
    let mut head = [0u8; 64];
    let mut file = File::open(path).map_err(|e| CliError::Domain(format!("reading {}: {e}", path.display())))?;
    let n = file.read(&mut head).map_err(|e| CliError::Domain(format!("reading {}: {e}", path.display())))?;
    let head = String::from_utf8_lossy(&head[..n]);
    let head = head.trim_start();
    Ok(if head.to_ascii_lowercase().starts_with("%%matrixmarket") {
        Sniffed::MatrixMarket
    } else if head.starts_with("n=") {
        Sniffed::DenseMatrix
    } else {
        Sniffed::Other
    })
}

fn load_graph(path: &Path, kind: GraphKind, giant: bool) -> CliResult<(Graph, Option<Vec<usize>>)> {
    let weighted = match kind {
        GraphKind::Auto => sniff(path)? != Sniffed::Other,
        GraphKind::Edges => false,
        GraphKind::Weights => true,
    };
    if weighted {
        if giant {
            return Err(CliError::Usage("--giant-component applies to edge-list input".into()));
        }
        return Ok((Graph::Weighted(io::load_weighted(path)?), None));
    }
    let g = io::load_edge_list(path)?;
    if giant {
        let (giant, kept) = g.giant_component();
        return Ok((Graph::Unweighted(giant), Some(kept)));
    }
    Ok((Graph::Unweighted(g), None))
}

fn load_ratios(path: &Path, kind: DataKind, convert: Convert) -> CliResult<(NeighbourRatios, &'static str)> {
    let kind = match kind {
        DataKind::Auto if sniff(path)? == Sniffed::Other => DataKind::Points,
        DataKind::Auto => DataKind::Dissimilarity,
        k => k,
    };
    Ok(match kind {
        DataKind::Points => (neighbour_ratios_from_points(&io::load_points(path)?)?, "points"),
        DataKind::Dissimilarity => (neighbour_ratios_from_dissimilarity(&io::load_dissimilarity(path)?)?, "dissimilarity"),
        DataKind::Similarity => {
            let rule = match convert {
                Convert::Reciprocal => SimilarityToDissimilarity::Reciprocal,
                Convert::OneMinus => SimilarityToDissimilarity::OneMinus,
            };
            let m = similarity_to_dissimilarity(&io::load_weighted(path)?, rule)?;
            (neighbour_ratios_from_dissimilarity(&m)?, "similarity")
        }
        DataKind::Auto => unreachable!(),
    })
}

fn eigen_options(s: &SolverOpts, manifest: &mut Manifest) -> EigenOptions {
    manifest.resolve("dense_limit", DENSE_LIMIT);
    EigenOptions {
        solver: match s.solver {
            SolverArg::Auto => Solver::Auto,
            SolverArg::Dense => Solver::Dense,
            SolverArg::Lanczos => Solver::Lanczos,
        },
        seed: s.solver_seed,
        dense_limit: DENSE_LIMIT,
        tolerance: s.solver_tol,
    }
}

fn window(w: &WindowOpts) -> CliResult<Window> {
    Ok(Window::new(w.window_lo, w.window_hi)?)
}

fn sidecar(output: &Path, ext: &str) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> netdim_core::Result<()>,
{
    let file = File::create(path).map_err(|e| CliError::Domain(format!("writing {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| CliError::Domain(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

/// Original ids of the retained nodes, one per line, when a giant component
/// was extracted.
fn write_kept(output: &Path, kept: Option<&[usize]>) -> CliResult<()> {
    let Some(kept) = kept else { return Ok(()) };
    let path = sidecar(output, "nodes");
    let text: String = kept.iter().map(|i| format!("{i}\n")).collect();
    fs::write(&path, text).map_err(|e| CliError::Domain(format!("writing {}: {e}", path.display())))
}

fn finish(manifest: &Manifest, common: &Common, output: Option<&Path>) -> CliResult<()> {
    match (&common.manifest, output) {
        (Some(path), _) => manifest.write(path),
        (None, Some(out)) => manifest.write(&sidecar(out, "manifest")),
        (None, None) => {
            eprint!("{}", manifest.render());
            Ok(())
        }
    }
}
