//! `coxrep`: command line front end for graph classification, root
//! enumeration, the h/T/L tables, construction and decomposition of locally
//! scalar representations, reflection functors, orbits, unitarization,
//! projector families and the all-ones representation.
//!
//! Exit codes: 0 on success, 1 on a domain error (the error name goes to
//! stderr), 2 on a usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use coxrep_core::bridges::{self, BridgeError};
use coxrep_core::classifier::{self, BuildOptions, ClassifierError, DecomposeOptions, Triple};
use coxrep_core::functor::{self, FunctorError, FunctorInput, FunctorOptions};
use coxrep_core::graph::{GraphError, Parity, RootEnumeration};
use coxrep_core::io::{self, FormatError};
use coxrep_core::rep::{self, CharVector, RepError};

const DEFAULT_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "coxrep",
    version,
    about = "Coxeter reflection functors on locally scalar graph representations"
)]
struct Cli {
    /// Numerical tolerance; COXREP_TOL overrides the built-in default 1e-8.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for all randomized internals.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Human)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Human,
    Data,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Parity {
        match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a graph as Dynkin, extended Dynkin or wild.
    ClassifyGraph { graph: PathBuf },
    /// Enumerate the positive roots of a tree.
    Roots { graph: PathBuf },
    /// Compute the h/T/L tables of a Dynkin graph.
    Tables { graph: PathBuf },
    /// Build the indecomposable labelled by (vertex, steps).
    Build {
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        steps: usize,
        /// Off-vertex character values (defaults to 1.0 everywhere).
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate one indecomposable per positive root.
    Enumerate { graph: PathBuf },
    /// Decompose a locally scalar representation into classes.
    Decompose { rep: PathBuf },
    /// Check local scalarity; exits 1 when the verdict is negative.
    Verify { rep: PathBuf },
    /// Decide unitary equivalence of two representations.
    Equiv { rep1: PathBuf, rep2: PathBuf },
    /// Apply a reflection functor to a representation.
    Functor {
        rep: PathBuf,
        #[arg(long, value_enum)]
        parity: ParityArg,
        /// Boundary character values (defaults to 1.0).
        #[arg(long)]
        delta: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Walk the (dimension, character) orbit from a simplest object.
    Orbit {
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long, default_value_t = 20)]
        max: usize,
    },
    /// Build the locally scalar representation of a quiver in a root dimension.
    Unitarize {
        quiver: PathBuf,
        #[arg(long)]
        dims: PathBuf,
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert between projector families and star-graph representations.
    Projectors {
        #[command(subcommand)]
        direction: ProjectorsDirection,
    },
    /// The all-ones representation of a graph.
    Example1 {
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ProjectorsDirection {
    /// Projector family file to star representation.
    From {
        family: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Star representation file to projector family.
    To {
        rep: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum DomainError {
    Graph(GraphError),
    Rep(RepError),
    Functor(FunctorError),
    Classifier(ClassifierError),
    Bridge(BridgeError),
    Format(FormatError),
}

impl DomainError {
    /// "module.Variant" of the originating error.
    fn name(&self) -> String {
        let (module, debug) = match self {
            DomainError::Graph(e) => ("graph-core", format!("{e:?}")),
            DomainError::Rep(e) => ("rep-core", format!("{e:?}")),
            DomainError::Functor(e) => ("coxeter-functors", format!("{e:?}")),
            DomainError::Classifier(e) => ("classifier", format!("{e:?}")),
            DomainError::Bridge(e) => ("bridges", format!("{e:?}")),
            DomainError::Format(e) => ("io", format!("{e:?}")),
        };
        let variant: String = debug
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        format!("{module}.{variant}")
    }

    fn message(&self) -> String {
        match self {
            DomainError::Graph(e) => e.to_string(),
            DomainError::Rep(e) => e.to_string(),
            DomainError::Functor(e) => e.to_string(),
            DomainError::Classifier(e) => e.to_string(),
            DomainError::Bridge(e) => e.to_string(),
            DomainError::Format(e) => e.to_string(),
        }
    }
}

macro_rules! impl_from_error {
    ($variant:ident, $ty:ty) => {
        impl From<$ty> for DomainError {
            fn from(e: $ty) -> Self {
                DomainError::$variant(e)
            }
        }
    };
}

impl_from_error!(Graph, GraphError);
impl_from_error!(Rep, RepError);
impl_from_error!(Functor, FunctorError);
impl_from_error!(Classifier, ClassifierError);
impl_from_error!(Bridge, BridgeError);
impl_from_error!(Format, FormatError);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = cli
        .tol
        .or_else(|| {
            std::env::var("COXREP_TOL")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_TOL);
    if tol <= 0.0 {
        eprintln!("error[cli.BadTolerance]: tolerance must be positive");
        return ExitCode::from(2);
    }
    match run(&cli, tol) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {}", e.name(), e.message());
            ExitCode::from(1)
        }
    }
}

fn human_f(x: f64) -> String {
    // Twelve significant digits.
    format!("{x:.11e}")
}

fn load_graph(path: &Path) -> Result<coxrep_core::Graph, DomainError> {
    Ok(io::graph_from_str(&io::read_to_string(path)?)?)
}

fn load_rep(path: &Path) -> Result<coxrep_core::Representation, DomainError> {
    Ok(io::rep_from_str(&io::read_to_string(path)?)?)
}

fn load_char(path: Option<&PathBuf>) -> Result<CharVector, DomainError> {
    match path {
        Some(p) => Ok(io::char_map_from_str(&io::read_to_string(p)?)?),
        None => Ok(CharVector::new()),
    }
}

fn emit(format: OutputFormat, human: String, data: Value) {
    match format {
        OutputFormat::Human => println!("{human}"),
        OutputFormat::Data => print!("{}", io::to_text(&data)),
    }
}

fn char_to_value(f: &CharVector) -> Value {
    Value::Object(f.iter().map(|(v, &x)| (v.clone(), json!(x))).collect())
}

fn dims_to_value(d: &coxrep_core::DimVector) -> Value {
    Value::Object(d.iter().map(|(v, &n)| (v.clone(), json!(n))).collect())
}

fn write_rep_out(
    out: Option<&PathBuf>,
    rep: &coxrep_core::Representation,
) -> Result<(), DomainError> {
    if let Some(path) = out {
        io::write_string(path, &io::rep_to_string(rep))?;
    }
    Ok(())
}

fn run(cli: &Cli, tol: f64) -> Result<ExitCode, DomainError> {
    let format = cli.format;
    match &cli.command {
        Command::ClassifyGraph { graph } => {
            let g = load_graph(graph)?;
            let class = g.classify()?;
            emit(format, class.to_string(), json!({ "class": class.to_string() }));
        }
        Command::Roots { graph } => {
            let g = load_graph(graph)?;
            match g.enumerate_roots()? {
                RootEnumeration::Finite { positive, negative } => {
                    let coords: Vec<Vec<String>> = positive
                        .iter()
                        .map(|r| {
                            g.vertex_ids()
                                .iter()
                                .map(|v| r.get(v).to_string())
                                .collect()
                        })
                        .collect();
                    let mut human = format!(
                        "positive roots: {} (negative mirror: {})\nvertex order: {}\n",
                        positive.len(),
                        negative.len(),
                        g.vertex_ids().join(" ")
                    );
                    for row in &coords {
                        human.push_str(&format!("  {}\n", row.join(" ")));
                    }
                    human.pop();
                    emit(
                        format,
                        human,
                        json!({
                            "vertex_order": g.vertex_ids(),
                            "positive_count": positive.len(),
                            "positive": coords,
                        }),
                    );
                }
                RootEnumeration::Unbounded { certificate } => {
                    emit(
                        format,
                        format!("unbounded; certificate vector {certificate}"),
                        json!({
                            "unbounded": true,
                            "certificate": certificate.to_string(),
                        }),
                    );
                }
            }
        }
        Command::Tables { graph } => {
            let g = load_graph(graph)?;
            let tables = classifier::tables(&g)?;
            let mut human = String::from("vertex  h  faithful-steps\n");
            for (v, h) in &tables.h {
                let steps = tables
                    .l
                    .get(v)
                    .map(|set| {
                        set.iter()
                            .map(usize::to_string)
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .unwrap_or_else(|| "-".into());
                human.push_str(&format!("{v:>6}  {h}  {steps}\n"));
            }
            human.push_str(&format!(
                "T = {{{}}}; sum |L_i| = {}",
                tables.t.iter().cloned().collect::<Vec<_>>().join(","),
                tables.faithful_count()
            ));
            let l_json: Value = Value::Object(
                tables
                    .l
                    .iter()
                    .map(|(v, set)| (v.clone(), json!(set.iter().collect::<Vec<_>>())))
                    .collect(),
            );
            emit(
                format,
                human,
                json!({
                    "h": tables.h,
                    "t": tables.t.iter().collect::<Vec<_>>(),
                    "l": l_json,
                    "faithful_count": tables.faithful_count(),
                }),
            );
        }
        Command::Build {
            graph,
            vertex,
            steps,
            u,
            out,
        } => {
            let g = load_graph(graph)?;
            let off = match u {
                Some(p) => io::char_map_from_str(&io::read_to_string(p)?)?,
                None => CharVector::constant(&g, 1.0),
            };
            let triple = Triple::new(&g, vertex, *steps, off)?;
            let options = BuildOptions {
                tol,
                ..BuildOptions::default()
            };
            let (rep, character) = classifier::build_indecomposable(&g, &triple, &options)?;
            write_rep_out(out.as_ref(), &rep)?;
            let human = format!(
                "built indecomposable at vertex {vertex}, steps {steps}\ndims: {}\ncharacter: {}",
                rep.dims(),
                character
            );
            emit(
                format,
                human,
                json!({
                    "dims": dims_to_value(rep.dims()),
                    "character": char_to_value(&character),
                    "rep": io::rep_to_value(&rep),
                }),
            );
        }
        Command::Enumerate { graph } => {
            let g = load_graph(graph)?;
            let options = BuildOptions {
                tol,
                ..BuildOptions::default()
            };
            let list = classifier::enumerate_indecomposables(&g, 1.0, &options)?;
            let mut human = format!("{} indecomposable classes\n", list.len());
            let mut items = Vec::new();
            for (pair, _) in &list {
                human.push_str(&format!(
                    "  dims {}  character {}\n",
                    pair.dims, pair.character
                ));
                items.push(json!({
                    "dims": dims_to_value(&pair.dims),
                    "character": char_to_value(&pair.character),
                }));
            }
            human.pop();
            emit(
                format,
                human,
                json!({ "count": list.len(), "classes": items }),
            );
        }
        Command::Decompose { rep } => {
            let r = load_rep(rep)?;
            let report = r.scalarity(tol);
            let options = DecomposeOptions {
                tol,
                ..DecomposeOptions::default()
            };
            let decomposition = classifier::decompose(&r, &report.character, &options)?;
            let mut human = format!(
                "{} summands in {} classes\n",
                decomposition.summand_count(),
                decomposition.classes.len()
            );
            let mut items = Vec::new();
            for (key, mult) in &decomposition.classes {
                human.push_str(&format!("  x{mult}  {key}\n"));
                let entries: Vec<Value> = key
                    .entries()
                    .iter()
                    .map(|(v, d, f)| json!({ "vertex": v, "dim": d, "character": f }))
                    .collect();
                items.push(json!({ "multiplicity": mult, "class": entries }));
            }
            human.pop();
            emit(
                format,
                human,
                json!({
                    "summands": decomposition.summand_count(),
                    "classes": items,
                }),
            );
        }
        Command::Verify { rep } => {
            let r = load_rep(rep)?;
            let report = r.scalarity(tol);
            let mut human = format!(
                "locally scalar: {}\nvertex  character  residual\n",
                report.is_locally_scalar
            );
            let mut rows = Vec::new();
            for (v, alpha) in report.character.iter() {
                let residual = report.residuals[v];
                human.push_str(&format!(
                    "{v:>6}  {}  {}\n",
                    human_f(*alpha),
                    human_f(residual)
                ));
                rows.push(json!({ "vertex": v, "character": alpha, "residual": residual }));
            }
            human.pop();
            emit(
                format,
                human,
                json!({
                    "locally_scalar": report.is_locally_scalar,
                    "tolerance": tol,
                    "vertices": rows,
                }),
            );
            if !report.is_locally_scalar {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Equiv { rep1, rep2 } => {
            let r1 = load_rep(rep1)?;
            let r2 = load_rep(rep2)?;
            match rep::equivalent_seeded(&r1, &r2, tol, cli.seed)? {
                rep::Equivalence::Equivalent { residual, .. } => {
                    emit(
                        format,
                        format!("equivalent (witness residual {})", human_f(residual)),
                        json!({ "equivalent": true, "witness_residual": residual }),
                    );
                }
                rep::Equivalence::Inequivalent { reason } => {
                    emit(
                        format,
                        format!("inequivalent: {reason}"),
                        json!({ "equivalent": false, "reason": reason }),
                    );
                }
            }
        }
        Command::Functor {
            rep,
            parity,
            delta,
            out,
        } => {
            let r = load_rep(rep)?;
            let report = r.scalarity(tol);
            let delta = load_char(delta.as_ref())?;
            let output = functor::apply_functor(FunctorInput {
                rep: &r,
                character: &report.character,
                delta: &delta,
                parity: (*parity).into(),
                options: FunctorOptions {
                    tol,
                    ..FunctorOptions::default()
                },
            })?;
            write_rep_out(out.as_ref(), &output.rep)?;
            let human = format!(
                "new dims: {}\nnew character: {}\nmax certificate residual: {}",
                output.rep.dims(),
                output.character,
                human_f(output.max_certificate_residual())
            );
            emit(
                format,
                human,
                json!({
                    "dims": dims_to_value(output.rep.dims()),
                    "character": char_to_value(&output.character),
                    "max_certificate_residual": output.max_certificate_residual(),
                    "rep": io::rep_to_value(&output.rep),
                }),
            );
        }
        Command::Orbit { graph, vertex, max } => {
            let g = load_graph(graph)?;
            let report = classifier::coxeter_orbit_report(&g, vertex, *max)?;
            let mut human = String::new();
            let mut rows = Vec::new();
            for (k, (d, _)) in report.pairs.iter().enumerate() {
                human.push_str(&format!("step {k:>3}: total {:>4}  {}\n", d.total(), d));
                rows.push(json!({ "step": k, "total": d.total(), "dims": dims_to_value(d) }));
            }
            let verdict = match report.verdict {
                classifier::OrbitVerdict::Finite { steps_to_simple } => {
                    format!("finite: reaches a simple root in {steps_to_simple} steps")
                }
                classifier::OrbitVerdict::Unbounded => "unbounded".to_string(),
                classifier::OrbitVerdict::Inconclusive => "inconclusive".to_string(),
            };
            human.push_str(&format!("verdict: {verdict}"));
            emit(format, human, json!({ "steps": rows, "verdict": verdict }));
        }
        Command::Unitarize {
            quiver,
            dims,
            u,
            out,
        } => {
            let q = io::quiver_from_str(&io::read_to_string(quiver)?)?;
            let d = io::dim_map_from_str(&io::read_to_string(dims)?, q.graph())?;
            let u = match u {
                Some(p) => Some(io::char_map_from_str(&io::read_to_string(p)?)?),
                None => None,
            };
            let (rep, character) = bridges::unitarize(&q, &d, u.as_ref())?;
            write_rep_out(out.as_ref(), &rep)?;
            let mut arrows = Vec::new();
            for (i, (t, h)) in q.arrows().iter().enumerate() {
                let m = q.arrow_matrix(&rep, i);
                arrows.push(json!({
                    "tail": t,
                    "head": h,
                    "matrix": io::matrix_to_value(&m),
                }));
            }
            let human = format!("unitarized: dims {}\ncharacter: {}", rep.dims(), character);
            emit(
                format,
                human,
                json!({
                    "dims": dims_to_value(rep.dims()),
                    "character": char_to_value(&character),
                    "rep": io::rep_to_value(&rep),
                    "arrows": arrows,
                }),
            );
        }
        Command::Projectors { direction } => match direction {
            ProjectorsDirection::From { family, out } => {
                let fam = io::projectors_from_str(&io::read_to_string(family)?)?;
                let (rep, alpha) = bridges::from_projectors(&fam, tol)?;
                write_rep_out(out.as_ref(), &rep)?;
                let human = format!("alpha = {}\ndims: {}", human_f(alpha), rep.dims());
                emit(
                    format,
                    human,
                    json!({
                        "alpha": alpha,
                        "dims": dims_to_value(rep.dims()),
                        "rep": io::rep_to_value(&rep),
                    }),
                );
            }
            ProjectorsDirection::To { rep, out } => {
                let r = load_rep(rep)?;
                let fam = bridges::to_projectors(&r, tol)?;
                if let Some(path) = out {
                    io::write_string(path, &io::projectors_to_string(&fam))?;
                }
                let human = format!(
                    "{} projectors on ambient dimension {}",
                    fam.projectors.len(),
                    fam.ambient_dim
                );
                emit(format, human, io::projectors_to_value(&fam));
            }
        },
        Command::Example1 { graph, out } => {
            let g = load_graph(graph)?;
            let (rep, character) = bridges::all_ones_rep(&g);
            write_rep_out(out.as_ref(), &rep)?;
            let human = format!("dims: {}\ncharacter: {}", rep.dims(), character);
            emit(
                format,
                human,
                json!({
                    "dims": dims_to_value(rep.dims()),
                    "character": char_to_value(&character),
                    "rep": io::rep_to_value(&rep),
                }),
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
