use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use hypergadget::analysis::ProductFn;
use hypergadget::csp::{build_smooth_mlpcp, Dto1Game, LayeredPcp, Lin3Instance};
use hypergadget::dto1::{
    self, correlation_suite, dictator_indicator, support_safety_violation, DDeltaR, Dto1Gadget,
};
use hypergadget::gf2::{fourier_transform, RealTable};
use hypergadget::hadamard::{yes_coloring, HadamardGadget, Mode, DEFAULT_BLOCK_BUDGET};
use hypergadget::longcode::{self, yes_partition, LongCodeGadget};
use hypergadget::seed::stage_rng;
use hypergadget::ternary::TernaryFamily;
use hypergadget::verify::{
    almost_two_colorable, max_independent_set, min_vertex_cover_brute, two_colorable,
    AlmostColoring, GenericHypergraph, TwoColoring, DEFAULT_NODE_BUDGET,
};

const MAX_BRUTE_COVER_VERTICES: usize = 24;

#[derive(Parser, Serialize)]
#[command(
    name = "hypergadget",
    version,
    about = "Hypergraph gadget reductions and their certificates"
)]
struct Cli {
    /// Run seed; every stochastic stage derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory against which relative input and output paths resolve.
    #[arg(long, global = true, env = "HYPERGADGET_OUT", default_value = ".")]
    out_dir: PathBuf,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Random Max-3Lin instance.
    #[command(name = "gen-3lin")]
    #[serde(rename = "gen-3lin")]
    Gen3lin {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eqs: usize,
        /// Plant a satisfying assignment.
        #[arg(long)]
        planted: bool,
        #[arg(long, default_value = "instance.json")]
        out: PathBuf,
    },
    /// Random bi-regular d-to-1 game.
    GenGame {
        #[arg(long)]
        u: usize,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        deg_v: usize,
        #[arg(long)]
        planted: bool,
        #[arg(long, default_value = "game.json")]
        out: PathBuf,
    },
    /// Layered PCP: smooth build from a game, or a planted toy.
    BuildMlpcp {
        #[arg(long, conflicts_with = "toy")]
        game: Option<PathBuf>,
        #[arg(long, required_unless_present = "game")]
        toy: Option<Toy>,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,2")]
        sizes: Vec<usize>,
        /// Label sizes per layer (long-code toy).
        #[arg(long, value_delimiter = ',', default_value = "3,2")]
        labels: Vec<usize>,
        /// Label size of the last layer (d-to-1 toy).
        #[arg(long, default_value_t = 2)]
        top: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long, default_value = "pcp.json")]
        out: PathBuf,
    },
    /// Hadamard gadget from a Max-3Lin instance.
    BuildHadamard {
        #[arg(long, default_value = "instance.json")]
        instance: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        triples: usize,
        /// Sample edges per triple instead of enumerating them.
        #[arg(long)]
        stream: bool,
        #[arg(long, default_value_t = DEFAULT_BLOCK_BUDGET)]
        block_budget: usize,
        #[command(flatten)]
        outputs: GadgetOutputs,
    },
    /// Long-code gadget from a layered PCP.
    BuildLongcode {
        #[arg(long, default_value = "pcp.json")]
        pcp: PathBuf,
        /// Mass of the star symbol, as a fraction or decimal.
        #[arg(long, default_value = "1/10")]
        eps: String,
        #[command(flatten)]
        outputs: GadgetOutputs,
    },
    /// d-to-1 gadget from a smooth layered PCP.
    BuildDto1 {
        #[arg(long, default_value = "pcp.json")]
        pcp: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[command(flatten)]
        outputs: GadgetOutputs,
    },
    /// Exact oracles on a hypergraph (JSON or edge list).
    Verify {
        #[arg(long, default_value = "gadget.json")]
        hypergraph: PathBuf,
        #[arg(long, value_enum)]
        mode: VerifyMode,
        /// Removal budget as a fraction of total weight (almost mode).
        #[arg(long)]
        eps: Option<String>,
        /// Witness file written by a build command.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Correlations of D_{delta,r}, Fourier spectra, influences, ternary families.
    Analyze {
        #[arg(long)]
        correlations: bool,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// JSON array of 2^m reals; writes the spectrum CSV to --out.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        /// JSON array of 2^m reals on the uniform cube.
        #[arg(long)]
        influences: Option<PathBuf>,
        /// Ternary family text file.
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long, default_value_t = 0.8)]
        p: f64,
        /// CSV output for --spectrum, or the D_{delta,r} table for --correlations.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode labels from an independent set or dictator indicators.
    Decode {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value = "pcp.json")]
        pcp: PathBuf,
        /// Indicator JSON; defaults to the planted dictators.
        #[arg(long)]
        indicator: Option<PathBuf>,
        #[arg(long, default_value = "1/10")]
        eps: String,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        nu: f64,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 0.01)]
        tau: f64,
        #[arg(long, default_value_t = 2)]
        s: usize,
        #[arg(long, default_value_t = 4)]
        t: usize,
        /// Fail unless at least this fraction of constraints is satisfied.
        #[arg(long, default_value_t = 0.0)]
        min_fraction: f64,
    },
    /// Merge JSON reports into one summary.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "summary.json")]
        out: PathBuf,
    },
}

#[derive(clap::Args, Serialize)]
struct GadgetOutputs {
    #[arg(long, default_value = "gadget.json")]
    out: PathBuf,
    /// Also write the flat edge-list format.
    #[arg(long)]
    edge_list: Option<PathBuf>,
    /// Write the YES-case witness (planted inputs only).
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Toy {
    Longcode,
    Dto1,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VerifyMode {
    Yes,
    Almost,
    Mis,
    Cover,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Longcode,
    Dto1,
}

#[derive(Default)]
struct Run {
    artifacts: Vec<Value>,
    checks: Vec<Value>,
    result: Value,
}

impl Run {
    fn check(&mut self, name: &str, pass: bool, detail: impl Into<Value>) {
        self.checks
            .push(json!({ "name": name, "pass": pass, "detail": detail.into() }));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c["pass"] == true)
    }

    fn artifact(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.artifacts.push(json!({
            "path": path.display().to_string(),
            "sha256": hex(&Sha256::digest(bytes)),
        }));
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn resolve(out_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn read_hypergraph(path: &Path) -> Result<GenericHypergraph> {
    let text = read_text(path)?;
    let h = if path.extension().is_some_and(|e| e == "json") {
        GenericHypergraph::from_json(&text)
    } else {
        GenericHypergraph::from_edge_list(&text)
    };
    h.map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Accepts `a/b`, integers and plain decimals.
fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let text = match s.split_once('.') {
        Some((int, frac)) if !s.contains('/') => {
            let den = format!("1{}", "0".repeat(frac.len()));
            format!("{int}{frac}/{den}")
        }
        _ => s.to_string(),
    };
    text.parse()
        .map_err(|_| anyhow!("not a rational number: {s:?}"))
}

fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn write_gadget(run: &mut Run, dir: &Path, o: &GadgetOutputs, h: &GenericHypergraph) -> Result<()> {
    run.artifact(&resolve(dir, &o.out), h.to_json().as_bytes())?;
    if let Some(p) = &o.edge_list {
        run.artifact(&resolve(dir, p), h.to_edge_list().as_bytes())?;
    }
    Ok(())
}

fn write_witness(run: &mut Run, dir: &Path, o: &GadgetOutputs, witness: Value) -> Result<()> {
    if let Some(p) = &o.witness {
        run.artifact(&resolve(dir, p), &to_json_bytes(&witness)?)?;
    }
    Ok(())
}

fn bits(c: &[bool]) -> Vec<u8> {
    c.iter().map(|&b| b as u8).collect()
}

fn execute(cli: &Cli) -> Result<Run> {
    let dir = cli.out_dir.as_path();
    let mut run = Run::default();
    match &cli.command {
        Command::Gen3lin {
            n,
            eqs,
            planted,
            out,
        } => {
            let inst =
                Lin3Instance::random(*n, *eqs, *planted, &mut stage_rng(cli.seed, "gen-3lin"))?;
            run.artifact(&resolve(dir, out), &to_json_bytes(&inst)?)?;
            run.result =
                json!({ "n": inst.n(), "equations": inst.equations().len(), "planted": planted });
        }
        Command::GenGame {
            u,
            v,
            k,
            d,
            deg_v,
            planted,
            out,
        } => {
            let game = Dto1Game::random(
                *u,
                *v,
                *k,
                *d,
                *deg_v,
                *planted,
                &mut stage_rng(cli.seed, "gen-game"),
            )?;
            run.artifact(&resolve(dir, out), &to_json_bytes(&game)?)?;
            run.check("bi-regular", game.is_bi_regular(), json!(null));
            run.result = json!({ "constraints": game.constraints().len(), "planted": planted });
        }
        Command::BuildMlpcp {
            game,
            toy,
            layers,
            t,
            sizes,
            labels,
            top,
            d,
            degree,
            out,
        } => {
            let mut rng = stage_rng(cli.seed, "build-mlpcp");
            let pcp = match (game, toy) {
                (Some(path), _) => {
                    build_smooth_mlpcp(&read_json(&resolve(dir, path))?, *layers, *t)?
                }
                (None, Some(Toy::Longcode)) => {
                    LayeredPcp::planted_toy(sizes, labels, *degree, &mut rng)?
                }
                (None, Some(Toy::Dto1)) => {
                    LayeredPcp::planted_dto1_toy(sizes, *top, *d, *degree, *t, &mut rng)?
                }
                (None, None) => bail!("either --game or --toy is required"),
            };
            run.artifact(&resolve(dir, out), &to_json_bytes(&pcp)?)?;
            if game.is_some() {
                let rep = pcp.check_smoothness()?;
                run.check(
                    "smoothness",
                    !rep.exceeds,
                    json!({ "max": rep.max, "bound": 1.0 / *t as f64 }),
                );
            }
            run.result = json!({
                "layers": pcp.layers(),
                "constraints": pcp.constraints().len(),
                "planted": pcp.planted().is_some(),
            });
        }
        Command::BuildHadamard {
            instance,
            r,
            triples,
            stream,
            block_budget,
            outputs,
        } => {
            let inst: Lin3Instance = read_json(&resolve(dir, instance))?;
            let mode = if *stream {
                Mode::Stream
            } else {
                Mode::Enumerate
            };
            let g = HadamardGadget::build(
                &inst,
                *r,
                *triples,
                mode,
                *block_budget,
                &mut stage_rng(cli.seed, "build-hadamard"),
            )?;
            write_gadget(&mut run, dir, outputs, &g.to_hypergraph()?)?;
            if let Some(sigma) = inst.planted() {
                let (coloring, cert) = yes_coloring(&g, sigma)?;
                run.check(
                    "yes-coloring",
                    cert.all_bichromatic() && cert.removed.is_empty(),
                    serde_json::to_value(&cert)?,
                );
                write_witness(
                    &mut run,
                    dir,
                    outputs,
                    json!({ "coloring": bits(&coloring) }),
                )?;
            }
            run.result = json!({
                "vertices": g.num_vertices(),
                "edges": g.edges().len(),
                "blocks": g.blocks().len(),
                "dropped": g.dropped(),
            });
        }
        Command::BuildLongcode { pcp, eps, outputs } => {
            let pcp: LayeredPcp = read_json(&resolve(dir, pcp))?;
            let eps = parse_rational(eps)?;
            let g = LongCodeGadget::build(&pcp, &eps)?;
            write_gadget(&mut run, dir, outputs, &g.to_hypergraph()?)?;
            if let Some(sigma) = pcp.planted() {
                let part = yes_partition(&g, sigma, 0, &mut stage_rng(cli.seed, "yes-partition"))?;
                let pass = part.weight_star == eps && part.certificate.violations.is_empty();
                run.check(
                    "yes-partition",
                    pass,
                    serde_json::to_value(&part.certificate)?,
                );
                let removed: Vec<usize> = (0..g.num_vertices())
                    .filter(|&v| part.class[v] == 0)
                    .collect();
                let coloring: Vec<u8> = part.class.iter().map(|&c| (c == 2) as u8).collect();
                write_witness(
                    &mut run,
                    dir,
                    outputs,
                    json!({ "removed": removed, "coloring": coloring }),
                )?;
            }
            run.result =
                json!({ "vertices": g.num_vertices(), "mode": g.mode(), "eps": eps.to_string() });
        }
        Command::BuildDto1 {
            pcp,
            delta,
            outputs,
        } => {
            let pcp: LayeredPcp = read_json(&resolve(dir, pcp))?;
            let g = Dto1Gadget::build(&pcp, *delta)?;
            write_gadget(&mut run, dir, outputs, &g.to_hypergraph()?)?;
            if let Some(sigma) = pcp.planted() {
                let cert = dto1::yes_check(&g, sigma, 0, &mut stage_rng(cli.seed, "yes-check"))?;
                run.check(
                    "yes-coloring",
                    cert.proper(),
                    json!({
                        "checked_edges": cert.checked_edges,
                        "violations": cert.violations.len(),
                    }),
                );
                write_witness(
                    &mut run,
                    dir,
                    outputs,
                    json!({ "coloring": bits(&cert.coloring) }),
                )?;
            }
            run.result = json!({ "vertices": g.num_vertices(), "mode": g.mode(), "delta": delta });
        }
        Command::Verify {
            hypergraph,
            mode,
            eps,
            witness,
            budget,
        } => {
            let h = read_hypergraph(&resolve(dir, hypergraph))?;
            let witness: Option<Value> = witness
                .as_deref()
                .map(|w| read_json(&resolve(dir, w)))
                .transpose()?;
            let ids = |key: &str| -> Result<Option<Vec<usize>>> {
                witness
                    .as_ref()
                    .and_then(|w| w.get(key))
                    .map(|v| {
                        serde_json::from_value(v.clone())
                            .map_err(|e| anyhow!("witness field {key}: {e}"))
                    })
                    .transpose()
            };
            match mode {
                VerifyMode::Yes => match ids("coloring")? {
                    Some(c) => {
                        let c: Vec<bool> = c.iter().map(|&b| b != 0).collect();
                        if c.len() != h.num_vertices() {
                            bail!(
                                "witness coloring has {} entries for {} vertices",
                                c.len(),
                                h.num_vertices()
                            );
                        }
                        let bad = h.monochromatic_edges(&c);
                        run.check(
                            "witness-coloring",
                            bad.is_empty(),
                            json!({ "monochromatic_edges": bad.len() }),
                        );
                    }
                    None => {
                        let res = two_colorable(&h);
                        run.check(
                            "two-colorable",
                            matches!(res, TwoColoring::Colorable(_)),
                            json!(null),
                        );
                        run.result = serde_json::to_value(&res)?;
                    }
                },
                VerifyMode::Almost => {
                    let eps = parse_rational(
                        eps.as_deref()
                            .ok_or_else(|| anyhow!("--eps is required in almost mode"))?,
                    )?;
                    let removed = ids("removed")?;
                    let res = almost_two_colorable(&h, &eps, removed.as_deref())?;
                    run.check(
                        "almost-two-colorable",
                        matches!(res, AlmostColoring::Success { .. }),
                        json!({ "eps": eps.to_string() }),
                    );
                    run.result = serde_json::to_value(&res)?;
                }
                VerifyMode::Mis => {
                    let res = max_independent_set(&h, *budget)?;
                    run.check(
                        "search-complete",
                        res.optimal,
                        json!({ "nodes": res.nodes }),
                    );
                    run.result = serde_json::to_value(&res)?;
                }
                VerifyMode::Cover => {
                    if h.num_vertices() > MAX_BRUTE_COVER_VERTICES {
                        bail!("cover mode handles at most {MAX_BRUTE_COVER_VERTICES} vertices");
                    }
                    let (cover, weight) = min_vertex_cover_brute(&h);
                    let mis = max_independent_set(&h, *budget)?;
                    let pass =
                        mis.optimal && mis.weight.clone() + weight.clone() == h.total_weight();
                    run.check(
                        "cover-plus-independent-equals-total",
                        pass,
                        json!({
                            "cover": weight.to_string(),
                            "independent": mis.weight.to_string(),
                            "total": h.total_weight().to_string(),
                        }),
                    );
                    run.result = json!({ "cover": cover, "weight": weight.to_string() });
                }
            }
        }
        Command::Analyze {
            correlations,
            delta,
            r,
            spectrum,
            influences,
            family,
            p,
            out,
        } => {
            let mut result = serde_json::Map::new();
            if !*correlations && spectrum.is_none() && influences.is_none() && family.is_none() {
                bail!(
                    "nothing to analyze: pass --correlations, --spectrum, --influences or --family"
                );
            }
            if *correlations {
                let rep = correlation_suite(*delta, *r)?;
                if rep.regime {
                    run.check(
                        "min-atom-is-xi",
                        rep.min_atom_is_xi,
                        json!({ "min_atom": rep.min_atom, "xi": rep.xi }),
                    );
                }
                run.check(
                    "yz-marginals-identical",
                    rep.marginals_identical,
                    json!(null),
                );
                let d = DDeltaR::new(*delta, *r)?;
                run.check(
                    "support-safe",
                    support_safety_violation(&d).is_none(),
                    json!(null),
                );
                if let Some(o) = out {
                    run.artifact(&resolve(dir, o), d.to_csv().as_bytes())?;
                }
                result.insert("correlations".into(), serde_json::to_value(&rep)?);
            }
            if let Some(path) = spectrum {
                let table = read_table(&resolve(dir, path))?;
                let coeffs = fourier_transform(&table);
                if let Some(o) = out.as_ref().filter(|_| !*correlations) {
                    run.artifact(&resolve(dir, o), coeffs.to_csv().as_bytes())?;
                }
                let mean_sq =
                    table.values().iter().map(|x| x * x).sum::<f64>() / table.values().len() as f64;
                run.check(
                    "parseval",
                    (coeffs.energy() - mean_sq).abs() <= 1e-9 * mean_sq.max(1.0),
                    json!(null),
                );
                result.insert(
                    "spectrum".into(),
                    json!({ "energy": coeffs.energy(), "coefficients": coeffs.coeffs() }),
                );
            }
            if let Some(path) = influences {
                let table = read_table(&resolve(dir, path))?;
                let f = ProductFn::uniform_cube(table.width(), table.values().to_vec())?;
                let inf = f.influences();
                result.insert(
                    "influences".into(),
                    json!({ "per_coordinate": inf, "total": inf.iter().sum::<f64>() }),
                );
            }
            if let Some(path) = family {
                let (fam, file_p) = TernaryFamily::from_text(&read_text(&resolve(dir, path))?)
                    .map_err(|e| anyhow!("{}: {e}", path.display()))?;
                let russo = fam.russo_check(*p, 1e-4)?;
                run.check("russo-bracket", russo.holds, json!(null));
                let core = fam.find_core(0.1, *p);
                result.insert("family".into(), json!({
                    "m": fam.m(),
                    "file_p": file_p,
                    "measure": fam.measure(*p),
                    "monotone": fam.is_monotone(),
                    "russo": russo,
                    "core": { "core": core.core, "core_mass": core.core_mass, "error": core.error },
                }));
            }
            run.result = Value::Object(result);
        }
        Command::Decode {
            kind,
            pcp,
            indicator,
            eps,
            delta,
            nu,
            gamma,
            tau,
            s,
            t,
            min_fraction,
        } => {
            let pcp: LayeredPcp = read_json(&resolve(dir, pcp))?;
            let mut rng = stage_rng(cli.seed, "decode");
            let fraction = match kind {
                Kind::Longcode => {
                    let g = LongCodeGadget::build(&pcp, &parse_rational(eps)?)?;
                    let ind: Vec<bool> = match indicator {
                        Some(p) => read_json(&resolve(dir, p))?,
                        None => {
                            let sigma = pcp.planted().ok_or_else(|| {
                                anyhow!("no --indicator and the PCP has no planted labeling")
                            })?;
                            let part = yes_partition(
                                &g,
                                sigma,
                                0,
                                &mut stage_rng(cli.seed, "yes-partition"),
                            )?;
                            part.class.iter().map(|&c| c == 1).collect()
                        }
                    };
                    let out = longcode::decode(&g, &ind, *delta, &mut rng)?;
                    run.result = serde_json::to_value(&out)?;
                    out.satisfied_fraction
                }
                Kind::Dto1 => {
                    let ind: Vec<Vec<Vec<f64>>> = match indicator {
                        Some(p) => read_json(&resolve(dir, p))?,
                        None => {
                            let sigma = pcp.planted().ok_or_else(|| {
                                anyhow!("no --indicator and the PCP has no planted labeling")
                            })?;
                            pcp.layers()
                                .iter()
                                .enumerate()
                                .map(|(l, layer)| {
                                    (0..layer.num_vars)
                                        .map(|v| {
                                            dictator_indicator(
                                                layer.label_size,
                                                sigma[l][v] as usize,
                                            )
                                        })
                                        .collect()
                                })
                                .collect()
                        }
                    };
                    let eps = parse_rational(eps)?
                        .to_f64()
                        .ok_or_else(|| anyhow!("--eps out of range"))?;
                    let params = dto1::DecodeParams {
                        delta: *delta,
                        eps,
                        nu: *nu,
                        gamma: *gamma,
                        tau: *tau,
                        s: *s,
                        t: *t,
                    };
                    let out = dto1::decode(&pcp, &ind, &params, &mut rng)?;
                    run.result = serde_json::to_value(&out)?;
                    out.satisfied_fraction
                }
            };
            run.check(
                "satisfied-fraction",
                fraction >= *min_fraction,
                json!({ "fraction": fraction, "min": min_fraction }),
            );
        }
        Command::Report { inputs, out } => {
            let mut sources = Vec::new();
            for path in inputs {
                let rep: Value = read_json(&resolve(dir, path))?;
                let checks = rep["checks"]
                    .as_array()
                    .ok_or_else(|| anyhow!("{}: missing field `checks`", path.display()))?;
                for c in checks {
                    let name = format!("{}: {}", path.display(), c["name"].as_str().unwrap_or("?"));
                    run.check(&name, c["pass"] == true, c["detail"].clone());
                }
                sources.push(json!({ "path": path.display().to_string(), "command": rep["config"]["command"], "pass": rep["pass"] }));
            }
            run.result = json!({ "sources": sources });
            let summary = json!({ "checks": run.checks, "pass": run.passed(), "sources": run.result["sources"] });
            run.artifact(&resolve(dir, out), &to_json_bytes(&summary)?)?;
        }
    }
    Ok(run)
}

fn read_table(path: &Path) -> Result<RealTable> {
    let values: Vec<f64> = read_json(path)?;
    if !values.len().is_power_of_two() {
        bail!(
            "{}: table length {} is not a power of two",
            path.display(),
            values.len()
        );
    }
    let width = values.len().trailing_zeros() as usize;
    RealTable::new(width, values).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

/// Exit status: 0 when every check passes, 2 on a failed certificate, 1 on
/// usage, input or I/O errors.
fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let run = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    let pass = run.passed();
    let report = json!({
        "config": serde_json::to_value(&cli).unwrap_or(Value::Null),
        "artifacts": run.artifacts,
        "checks": run.checks,
        "result": run.result,
        "pass": pass,
    });
    let emitted = match &cli.report {
        Some(p) => to_json_bytes(&report).and_then(|b| write_atomic(&resolve(&cli.out_dir, p), &b)),
        None => to_json_bytes(&report).map(|b| print!("{}", String::from_utf8_lossy(&b))),
    };
    if let Err(e) = emitted {
        eprintln!("error: {e:#}");
        return 1;
    }
    if pass {
        0
    } else {
        2
    }
}
