//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the report
//! names the counterexample), 2 for usage, input and I/O errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cobounded::{check_witness, parity_decomposition, quotient_decomposition};
use crate::embeddings::{
    random_isometry, reconstruct_isometry, verify_spatial, EmbeddingTable, EMBEDDING_TOL,
};
use crate::error::{Error, Result};
use crate::io::{
    load_space, read_json, to_json, ActionFile, EmbeddingFile, IsometryFile, MapFile, OperatorFile,
    SpaceFile, SpaceRegistry,
};
use crate::maps::{
    cycle_fold, double_spacing, folding, halving, injective_quotient_m_bound, injectivize,
    n_to_1_witness_with, naturals_inclusion, orbit_space, projection, quotient_certificate,
    reflection, shift, CoverOptions, PointMap,
};
use crate::operators::{
    operator_norm_with, rank, truncate, BandOperator, ComplexQ, NormMethod, DENSE_NORM_LIMIT,
};
use crate::spaces::{
    build_graph_space_labeled, build_grid_window, line_window, naturals_window, Dist, FiniteSpace,
    PointId, POINT_CAP_ENV,
};

/// Operators up to this size also get an exact-rank report in `op-info`.
const RANK_LIMIT: usize = 512;

#[derive(Parser, Debug)]
#[command(
    name = "coarselab",
    version,
    about = "Finite-window coarse geometry and uniform Roe algebras"
)]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Override the point cap for this run.
    #[arg(long, global = true)]
    point_cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Inputs {
    /// Space file; repeat for each space not named by a standard label.
    #[arg(long = "space")]
    spaces: Vec<PathBuf>,
}

impl Inputs {
    fn registry(&self) -> Result<SpaceRegistry> {
        let mut reg = SpaceRegistry::default();
        for p in &self.spaces {
            reg.insert(Arc::new(load_space(p)?));
        }
        Ok(reg)
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SpaceKind {
    Line,
    Naturals,
    Grid,
    Path,
    Cycle,
    RandomGraph,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MapKind {
    Folding,
    Projection,
    DoubleSpacing,
    Shift,
    Reflection,
    Halving,
    Inclusion,
    CycleFold,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a space file.
    GenSpace {
        #[arg(long, value_enum)]
        kind: SpaceKind,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<i64>,
        /// Point count (naturals, path, cycle, random graph).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        side: Option<usize>,
        /// Extra random edges on top of a random spanning tree.
        #[arg(long, default_value_t = 0)]
        extra_edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a map file from the built-in catalog.
    GenMap {
        #[arg(long, value_enum)]
        kind: MapKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<i64>,
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
        #[arg(long)]
        side: Option<usize>,
    },
    /// Write the embedding table of a random isometry amplified by `fiber`.
    GenEmbedding {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        domain: String,
        #[arg(long)]
        codomain: String,
        #[arg(long, default_value_t = 1)]
        fiber: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the isometry itself.
        #[arg(long)]
        isometry_out: Option<PathBuf>,
    },
    /// Coarse quotient certificate of a map at fixed K over a list of scales.
    CheckQuotient {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        map: PathBuf,
        #[arg(long = "K")]
        k: Dist,
        #[arg(long, value_delimiter = ',', required = true)]
        scales: Vec<Dist>,
    },
    /// Search for a coarsely n-to-1 witness at scale s.
    #[command(name = "n-to-1")]
    NTo1 {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        s: Dist,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Largest cover scale r tried (default 2s).
        #[arg(long)]
        cover_cap: Option<Dist>,
    },
    /// Replace a finite-to-one map by an injective one into Y x {1..n}.
    Injectivize {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        map: PathBuf,
        /// With --scales, also bound the number of companions m at this K.
        #[arg(long = "K")]
        k: Option<Dist>,
        #[arg(long, value_delimiter = ',')]
        scales: Vec<Dist>,
    },
    /// Orbit space of a finite permutation group action.
    Orbit {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        action: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        scales: Vec<Dist>,
    },
    /// Propagation, norm and rank of an operator.
    OpInfo {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        op: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Cut an operator down to propagation r.
    Truncate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        r: Dist,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Exact decomposition of an operator over the codomain of an injective coarse quotient map.
    Decompose {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        map: PathBuf,
        #[arg(long = "K")]
        k: Dist,
        #[arg(long)]
        delta: Dist,
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        eps: Dist,
    },
    /// Parity witness for an operator on {1..n}, n even.
    Parity {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        op: PathBuf,
        #[arg(long, default_value_t = EMBEDDING_TOL)]
        tol: f64,
    },
    /// Rebuild a spatial isometry from an embedding table.
    Reconstruct {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long, default_value_t = 0)]
        x0: usize,
        #[arg(long, default_value_t = EMBEDDING_TOL)]
        tol: f64,
        #[arg(long)]
        isometry_out: Option<PathBuf>,
    },
    /// Check that an isometry implements an embedding table.
    VerifySpatial {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        isometry: PathBuf,
        #[arg(long, default_value_t = EMBEDDING_TOL)]
        tol: f64,
    },
}

/// What a subcommand produced: the report, whether its checks passed, and a one-line summary.
struct Outcome {
    report: Value,
    passed: bool,
    summary: String,
}

impl Outcome {
    fn pass(report: Value, summary: String) -> Self {
        Outcome {
            report,
            passed: true,
            summary,
        }
    }
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Format(format!("missing --{flag}")))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn load_map(path: &Path, reg: &mut SpaceRegistry) -> Result<PointMap> {
    read_json::<MapFile>(path)?.build(reg)
}

fn report<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn random_graph(n: usize, extra: usize, seed: u64) -> Result<FiniteSpace> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    for _ in 0..extra {
        if n > 1 {
            edges.push((rng.random_range(0..n), rng.random_range(0..n)));
        }
    }
    build_graph_space_labeled(format!("random{n}s{seed}"), n, &edges)
}

struct Shape {
    lo: Option<i64>,
    hi: Option<i64>,
    n: Option<usize>,
    dim: Option<usize>,
    side: Option<usize>,
}

fn gen_space(kind: SpaceKind, shape: Shape, extra: usize, seed: u64) -> Result<FiniteSpace> {
    let Shape {
        lo,
        hi,
        n,
        dim,
        side,
    } = shape;
    match kind {
        SpaceKind::Line => line_window(need(lo, "lo")?, need(hi, "hi")?),
        SpaceKind::Naturals => naturals_window(need(n, "n")?),
        SpaceKind::Grid => build_grid_window(need(dim, "dim")?, need(side, "side")?),
        SpaceKind::Path => {
            let n = need(n, "n")?;
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            build_graph_space_labeled(format!("P{n}"), n, &edges)
        }
        SpaceKind::Cycle => {
            let n = need(n, "n")?;
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            build_graph_space_labeled(format!("C{n}"), n, &edges)
        }
        SpaceKind::RandomGraph => random_graph(need(n, "n")?, extra, seed),
    }
}

fn certificate_summary(cert: &crate::maps::QuotientCertificate) -> String {
    match cert.first_failure() {
        None => {
            let deltas: Vec<String> = cert
                .scales
                .iter()
                .map(|s| {
                    format!(
                        "δ({})={}",
                        s.eps,
                        s.delta.map_or("-".into(), |d| d.to_string())
                    )
                })
                .collect();
            format!(
                "quotient certificate at K={}: pass, {}",
                cert.k,
                deltas.join(" ")
            )
        }
        Some(s) => format!(
            "quotient certificate at K={}: FAIL at eps={} ({:?})",
            cert.k, s.eps, s.verdict
        ),
    }
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::GenSpace {
            kind,
            lo,
            hi,
            n,
            dim,
            side,
            extra_edges,
            seed,
        } => {
            let space = gen_space(
                kind,
                Shape {
                    lo,
                    hi,
                    n,
                    dim,
                    side,
                },
                extra_edges,
                seed,
            )?;
            let summary = format!("space {} with {} points", space.label(), space.len());
            Ok(Outcome::pass(
                report(&SpaceFile::from_space(&space)),
                summary,
            ))
        }
        Command::GenMap {
            kind,
            n,
            lo,
            hi,
            t,
            from,
            to,
            side,
        } => {
            let f = match kind {
                MapKind::Folding => folding(need(n, "n")?),
                MapKind::Projection => {
                    projection(need(from, "from")?, need(to, "to")?, need(side, "side")?)
                }
                MapKind::DoubleSpacing => double_spacing(need(n, "n")?),
                MapKind::Shift => shift(need(lo, "lo")?, need(hi, "hi")?, need(t, "t")?),
                MapKind::Reflection => reflection(need(lo, "lo")?, need(hi, "hi")?),
                MapKind::Halving => halving(need(lo, "lo")?, need(hi, "hi")?),
                MapKind::Inclusion => {
                    naturals_inclusion(need(n, "n")?, need(lo, "lo")?, need(hi, "hi")?)
                }
                MapKind::CycleFold => cycle_fold(need(n, "n")?),
            }?;
            let summary = format!("map {} -> {}", f.domain().label(), f.codomain().label());
            Ok(Outcome::pass(report(&MapFile::from_map(&f)), summary))
        }
        Command::GenEmbedding {
            inputs,
            domain,
            codomain,
            fiber,
            seed,
            isometry_out,
        } => {
            let mut reg = inputs.registry()?;
            let base = reg.resolve(&domain)?;
            let cod = reg.resolve(&codomain)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_isometry(base, fiber, cod, &mut rng)?;
            if let Some(p) = isometry_out {
                write_file(&p, &to_json(&IsometryFile::from_isometry(&u)))?;
            }
            let phi = EmbeddingTable::from_isometry(&u)?;
            let summary = format!("embedding {domain} -> {codomain}, fiber {fiber}, seed {seed}");
            Ok(Outcome::pass(
                report(&EmbeddingFile::from_table(&phi)),
                summary,
            ))
        }
        Command::CheckQuotient {
            inputs,
            map,
            k,
            scales,
        } => {
            let mut reg = inputs.registry()?;
            let f = load_map(&map, &mut reg)?;
            let cert = quotient_certificate(&f, k, &scales)?;
            Ok(Outcome {
                passed: cert.passed(),
                summary: certificate_summary(&cert),
                report: report(&cert),
            })
        }
        Command::NTo1 {
            inputs,
            map,
            s,
            n_max,
            cover_cap,
        } => {
            let mut reg = inputs.registry()?;
            let f = load_map(&map, &mut reg)?;
            let options = CoverOptions {
                cover_cap,
                centers: None,
            };
            match n_to_1_witness_with(&f, s, n_max, &options) {
                Some(w) => {
                    w.validate(&f)?;
                    let summary = format!("coarsely {}-to-1 at s={} with r={}", w.n, w.s, w.r);
                    Ok(Outcome::pass(
                        json!({ "status": "pass", "witness": w }),
                        summary,
                    ))
                }
                None => Ok(Outcome {
                    report: json!({ "status": "fail", "s": s, "n_max": n_max, "cover_cap": options.cover_cap.unwrap_or(2 * s) }),
                    passed: false,
                    summary: format!("no n-to-1 witness with n <= {n_max} at s={s}"),
                }),
            }
        }
        Command::Injectivize {
            inputs,
            map,
            k,
            scales,
        } => {
            let mut reg = inputs.registry()?;
            let f = load_map(&map, &mut reg)?;
            let inj = injectivize(&f)?;
            let mut out = json!({
                "n": inj.n,
                "z": SpaceFile::from_space(&inj.z),
                "g": MapFile::from_map(&inj.g),
                "closeness": inj.closeness,
                "section_defect": inj.section_defect,
            });
            let mut summary = format!(
                "injective into {} (n={}), closeness {}",
                inj.z.label(),
                inj.n,
                inj.closeness
            );
            if let Some(k) = k {
                if scales.is_empty() {
                    return Err(Error::Format("--K needs --scales".into()));
                }
                let m = injective_quotient_m_bound(&f, k, &scales)?;
                summary.push_str(&format!(", m={}", m.m));
                out["m_bound"] = report(&m);
            }
            Ok(Outcome::pass(out, summary))
        }
        Command::Orbit {
            inputs,
            action,
            scales,
        } => {
            let mut reg = inputs.registry()?;
            let act: ActionFile = read_json(&action)?;
            let space = reg.resolve(&act.space)?;
            let orbit = orbit_space(&space, &act.permutations, &scales)?;
            let summary = format!(
                "{} orbits, displacement {}; {}",
                orbit.classes.len(),
                orbit.displacement,
                certificate_summary(&orbit.certificate)
            );
            Ok(Outcome {
                passed: orbit.certificate.passed(),
                report: json!({
                    "quotient": SpaceFile::from_space(&orbit.quotient),
                    "classes": orbit.classes,
                    "displacement": orbit.displacement,
                    "map": MapFile::from_map(&orbit.q),
                    "certificate": orbit.certificate,
                }),
                summary,
            })
        }
        Command::OpInfo { inputs, op, tol } => {
            let mut reg = inputs.registry()?;
            let a: BandOperator = read_json::<OperatorFile>(&op)?.build(&mut reg)?;
            let norm = operator_norm_with(&a, tol, NormMethod::Auto)?;
            let n = a.space().len();
            let rank = (n <= RANK_LIMIT).then(|| rank(&a, tol));
            let summary = format!(
                "propagation {}, nnz {}, norm {:.6}",
                a.propagation(),
                a.nnz(),
                norm.value
            );
            Ok(Outcome::pass(
                json!({
                    "space": a.space().label(),
                    "points": n,
                    "nnz": a.nnz(),
                    "propagation": a.propagation(),
                    "norm": norm,
                    "schur_bound": a.schur_bound(),
                    "rank": rank,
                    "dense_norm_limit": DENSE_NORM_LIMIT,
                }),
                summary,
            ))
        }
        Command::Truncate { inputs, op, r, tol } => {
            let mut reg = inputs.registry()?;
            let a: BandOperator = read_json::<OperatorFile>(&op)?.build(&mut reg)?;
            let (b, err) = truncate(&a, r, tol)?;
            let summary = format!(
                "truncated to propagation {} (from {}), error {:.3e}",
                b.propagation(),
                a.propagation(),
                err
            );
            Ok(Outcome::pass(
                json!({
                    "r": r,
                    "tol": tol,
                    "propagation_before": a.propagation(),
                    "propagation_after": b.propagation(),
                    "error": err,
                    "operator": OperatorFile::from_operator(&b),
                }),
                summary,
            ))
        }
        Command::Decompose {
            inputs,
            map,
            k,
            delta,
            op,
            eps,
        } => {
            let mut reg = inputs.registry()?;
            let f = load_map(&map, &mut reg)?;
            let file: OperatorFile = read_json(&op)?;
            let a: BandOperator<ComplexQ> = file.build_over(f.codomain().clone())?;
            if file.space != f.codomain().label() {
                return Err(Error::Domain(format!(
                    "operator over {} but the map lands in {}",
                    file.space,
                    f.codomain().label()
                )));
            }
            let dec = match quotient_decomposition(&f, k, delta, &a, eps) {
                Ok(d) => d,
                Err(e @ Error::Decomposition { .. }) => {
                    let summary = e.to_string();
                    return Ok(Outcome {
                        report: json!({ "status": "fail", "error": summary }),
                        passed: false,
                        summary,
                    });
                }
                Err(e) => return Err(e),
            };
            let check = check_witness(&dec.witness(&f, &a), EMBEDDING_TOL)?;
            let exact = dec.reassemble(&f)?.sub(&a)?.is_zero();
            let n = dec.partition.class_count();
            let blocks: Vec<Value> = dec
                .blocks
                .iter()
                .map(|b| {
                    json!({
                        "i": b.i,
                        "j": b.j,
                        "pairs": b.pairs,
                        "c": OperatorFile::from_operator(&b.c),
                        "d": OperatorFile::from_operator(&b.d),
                    })
                })
                .collect();
            let (cp, dp) = (dec.max_c_propagation(), dec.max_d_propagation());
            let passed =
                exact && check.passed && cp <= delta && dp <= k && dec.blocks.len() <= n * n;
            let summary = format!(
                "{} blocks over {} classes, residual {}, propagation c<={} d<={}",
                dec.blocks.len(),
                n,
                if exact {
                    "0 (exact)".to_string()
                } else {
                    format!("{:.3e}", check.residual)
                },
                cp,
                dp
            );
            Ok(Outcome {
                report: json!({
                    "status": if passed { "pass" } else { "fail" },
                    "K": dec.k,
                    "delta": dec.delta,
                    "eps_requested": dec.eps_requested,
                    "eps": dec.eps,
                    "note": dec.note,
                    "partition": dec.partition,
                    "blocks": blocks,
                    "exact": exact,
                    "residual": check.residual,
                    "max_c_propagation": cp,
                    "max_d_propagation": dp,
                    "check": check,
                }),
                passed,
                summary,
            })
        }
        Command::Parity { inputs, op, tol } => {
            let mut reg = inputs.registry()?;
            let a: BandOperator = read_json::<OperatorFile>(&op)?.build(&mut reg)?;
            let w = parity_decomposition(&a, tol)?;
            let check = check_witness(&w, tol)?;
            let summary = format!(
                "parity witness: {} terms, residual {:.3e}, {}",
                w.terms.len(),
                check.residual,
                if check.passed { "pass" } else { "FAIL" }
            );
            Ok(Outcome {
                passed: check.passed,
                report: json!({ "terms": w.terms.len(), "k": w.k, "ell": w.ell, "check": check }),
                summary,
            })
        }
        Command::Reconstruct {
            inputs,
            embedding,
            x0,
            tol,
            isometry_out,
        } => {
            let mut reg = inputs.registry()?;
            let phi = read_json::<EmbeddingFile>(&embedding)?.build(&mut reg)?;
            if let Err(e) = phi.validate(tol) {
                let summary = e.to_string();
                return Ok(Outcome {
                    report: json!({ "status": "fail", "error": summary }),
                    passed: false,
                    summary,
                });
            }
            let profile = phi.rank_profile()?;
            let u = match reconstruct_isometry(&phi, PointId(x0), None) {
                Ok(u) => u,
                Err(e @ Error::Precondition(_)) => {
                    let summary = e.to_string();
                    return Ok(Outcome {
                        report: json!({ "status": "fail", "profile": profile, "error": summary }),
                        passed: false,
                        summary,
                    });
                }
                Err(e) => return Err(e),
            };
            let verdict = verify_spatial(&phi, &u, tol)?;
            let file = IsometryFile::from_isometry(&u);
            if let Some(p) = isometry_out {
                write_file(&p, &to_json(&file))?;
            }
            let summary = format!(
                "rank profile {:?}, spatial residual {:.3e}, {}",
                profile,
                verdict.residual,
                if verdict.passed { "pass" } else { "FAIL" }
            );
            Ok(Outcome {
                passed: verdict.passed,
                report: json!({
                    "status": if verdict.passed { "pass" } else { "fail" },
                    "profile": profile,
                    "x0": x0,
                    "orthonormality_defect": u.orthonormality_defect(),
                    "spatial": verdict,
                    "isometry": file,
                }),
                summary,
            })
        }
        Command::VerifySpatial {
            inputs,
            embedding,
            isometry,
            tol,
        } => {
            let mut reg = inputs.registry()?;
            let phi = read_json::<EmbeddingFile>(&embedding)?.build(&mut reg)?;
            let u = read_json::<IsometryFile>(&isometry)?.build(&mut reg)?;
            let verdict = verify_spatial(&phi, &u, tol)?;
            let summary = format!(
                "spatial residual {:.3e}, {}",
                verdict.residual,
                if verdict.passed { "pass" } else { "FAIL" }
            );
            Ok(Outcome {
                passed: verdict.passed,
                report: report(&verdict),
                summary,
            })
        }
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) {
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: usize) {}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    set_threads(cli.threads);
    if let Some(cap) = cli.point_cap {
        std::env::set_var(POINT_CAP_ENV, cap.to_string());
    }
    let outcome = match execute(cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = to_json(&outcome.report);
    match &cli.out {
        Some(p) => {
            if let Err(e) = write_file(p, &text) {
                eprintln!("error: {e}");
                return 2;
            }
        }
        None => print!("{text}"),
    }
    eprintln!("{}", outcome.summary);
    if outcome.passed {
        0
    } else {
        1
    }
}
