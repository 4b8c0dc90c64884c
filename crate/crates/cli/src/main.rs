use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use taut0::graphs::{self, Contraction, Decoration, GraphError};
use taut0::mbar::{self, MbarVector, Verdict, Verifier};
use taut0::relations::{instantiate, RelationArgs, RelationId, RelationValue};
use taut0::text::{parse_base, parse_curve, parse_poly, render_base, render_curve};
use taut0::vcb::{self, TargetData};
use taut0::{selftest, BaseExpr, Context, CurveExpr, Effectivity, Error, StabilityMode, Q};

#[derive(Parser)]
#[command(name = "taut0", version, about = "Exact tautological divisor classes on genus-0 curve families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a base or total-space class; `--full` expands boundary sums.
    Expand(ExpandArgs),
    /// Print a relation instance as a zero-asserted expression.
    Relation(RelationCmd),
    /// Rank and first Chern class of the virtual canonical bundle.
    Vcb(VcbArgs),
    /// Check a no-map relation numerically on M_0,n.
    VerifyMbar(VerifyArgs),
    /// Inspect, contract or decorate a modular graph.
    Graph(GraphCmd),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args)]
struct ExpandArgs {
    /// The expression.
    #[arg(allow_hyphen_values = true)]
    expr: String,
    #[arg(long)]
    ctx: Option<PathBuf>,
    /// Parse as a total-space class instead of a base class.
    #[arg(long)]
    curve: bool,
    /// Expand boundary sums into individual boundary divisors.
    #[arg(long)]
    full: bool,
    /// Exit with 1 unless the class vanishes after symbolic expansion.
    #[arg(long)]
    check_zero: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct RelationCmd {
    /// Relation id: rel1 .. rel11, rel8_first, rel8_psi, rel8_sum.
    id: String,
    #[arg(long)]
    ctx: Option<PathBuf>,
    /// Divisor argument (a symbol name or any total-space expression).
    #[arg(long = "divisor", visible_alias = "symbol")]
    divisors: Vec<String>,
    /// Distinguished section.
    #[arg(short, long)]
    i: Option<usize>,
    /// Second section.
    #[arg(short, long)]
    j: Option<usize>,
    /// Exit with 1 unless the expression vanishes after symbolic expansion.
    #[arg(long)]
    check_zero: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct VcbArgs {
    #[arg(long)]
    ctx: Option<PathBuf>,
    /// Dimension of the target (integer or polynomial in parameters).
    #[arg(long, allow_hyphen_values = true)]
    dim_x: String,
    /// Relative degree of the pulled-back canonical class.
    #[arg(long, allow_hyphen_values = true)]
    deg_k: String,
    /// Number of markings (sections).
    #[arg(long)]
    markings: usize,
    /// Symbol tracking the pulled-back canonical class.
    #[arg(long, default_value = "K")]
    k_symbol: String,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Relation id, or `all` for every base-valued relation.
    #[arg(long, conflicts_with = "expr")]
    relation: Option<String>,
    /// A base expression in the sections-only context instead of a relation.
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(short, long)]
    i: Option<usize>,
    #[arg(short, long)]
    j: Option<usize>,
    /// Divisor argument; defaults to sections.
    #[arg(long = "divisor")]
    divisors: Vec<String>,
    #[arg(long, value_enum, default_value_t)]
    report: Format,
    /// Worker threads for `--relation all`.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct GraphCmd {
    #[command(subcommand)]
    action: GraphAction,
}

#[derive(Subcommand)]
enum GraphAction {
    /// Betti number, genus, forest predicate and canonical form.
    Info {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Contract the listed edges; a decoration is pushed forward.
    Contract {
        file: PathBuf,
        /// Edge indices (0-based, comma separated).
        #[arg(long, value_delimiter = ',')]
        edges: Vec<usize>,
    },
    /// Decorations with a given total degree within per-vertex bounds.
    Liftings {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        total: i64,
        /// `lo:hi` per vertex in id order; defaults to `0:total` for all.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bounds: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// Exit status: 0 ok or zero class, 1 nonzero, 2 bad input, 3 unsupported.
#[derive(Clone, Debug)]
enum Failure {
    Input(String),
    Unsupported(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unsupported(_) | Error::NotNoMap(_) => Failure::Unsupported(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Expand(a) => expand(a),
        Command::Relation(a) => relation(a),
        Command::Vcb(a) => vcb_cmd(a),
        Command::VerifyMbar(a) => verify(a),
        Command::Graph(a) => graph(a.action),
        Command::Selftest(a) => run_selftest(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Unsupported(msg)) => {
            eprintln!("unsupported: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_context(path: Option<&Path>) -> Result<Context, Failure> {
    match path {
        None => Ok(Context::default()),
        Some(p) => Context::from_toml_str(&read(p)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
    }
}

/// Rationals are written as `p/q` strings in JSON.
fn json_q(q: &Q) -> Value {
    Value::String(format!("{}/{}", q.numer(), q.denom()))
}

fn json_base(ctx: &Context, e: &BaseExpr) -> Value {
    let terms: Vec<Value> = e
        .terms()
        .map(|(a, c)| json!({ "atom": render_base(ctx, &BaseExpr::atom(a.clone())), "coefficient": c.to_string() }))
        .collect();
    json!({
        "text": render_base(ctx, e),
        "terms": terms,
        "unordered_sum": e.unordered_sum().to_string(),
        "ordered_sum": e.ordered_sum().to_string(),
    })
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap_or_default());
}

fn expand(a: ExpandArgs) -> Outcome {
    let ctx = load_context(a.ctx.as_deref())?;
    let (text, zero, json) = if a.curve {
        let e = parse_curve(&ctx, &a.expr)?;
        let e = if a.full { e.expand(&ctx)? } else { e.normalize(&ctx) };
        let zero = !a.check_zero || e.is_zero_class(&ctx)?;
        let text = render_curve(&ctx, &e);
        (text.clone(), zero, json!({ "text": text }))
    } else {
        let e = parse_base(&ctx, &a.expr)?;
        let e = if a.full { e.expand(&ctx)? } else { e.normalize(&ctx) };
        let zero = !a.check_zero || e.is_zero_class(&ctx)?;
        (render_base(&ctx, &e), zero, json_base(&ctx, &e))
    };
    match a.format {
        Format::Text => println!("{text}"),
        Format::Json => print_json(&json!({ "expression": json, "zero_class": a.check_zero.then_some(zero) })),
    }
    Ok(zero)
}

fn relation_args(ctx: &Context, divisors: &[String], i: Option<usize>, j: Option<usize>) -> Result<RelationArgs, Failure> {
    let divisors = divisors
        .iter()
        .map(|d| parse_curve(ctx, d))
        .collect::<taut0::Result<Vec<CurveExpr>>>()?;
    Ok(RelationArgs { divisors, i, j })
}

fn render_value(ctx: &Context, v: &RelationValue) -> String {
    match v {
        RelationValue::Base(e) => render_base(ctx, e),
        RelationValue::Curve(e) => render_curve(ctx, e),
    }
}

fn relation(a: RelationCmd) -> Outcome {
    let ctx = load_context(a.ctx.as_deref())?;
    let id: RelationId = a.id.parse()?;
    let args = relation_args(&ctx, &a.divisors, a.i, a.j)?;
    let value = instantiate(&ctx, id, &args)?;
    let zero = !a.check_zero || value.is_zero_class(&ctx)?;
    match a.format {
        Format::Text => println!("{}", render_value(&ctx, &value)),
        Format::Json => {
            let expr = match &value {
                RelationValue::Base(e) => json_base(&ctx, e),
                RelationValue::Curve(e) => json!({ "text": render_curve(&ctx, e) }),
            };
            print_json(&json!({
                "relation": id.name(),
                "level": if value.as_base().is_some() { "base" } else { "total space" },
                "expression": expr,
                "zero_class": a.check_zero.then_some(zero),
            }));
        }
    }
    Ok(zero)
}

fn vcb_cmd(a: VcbArgs) -> Outcome {
    let mut ctx = load_context(a.ctx.as_deref())?;
    let deg_k = parse_poly(&a.deg_k)?;
    let dim = parse_poly(&a.dim_x)?;
    let r = ctx.section_count();
    if r == 0 {
        ctx = ctx.with_sections(a.markings);
    } else if r != a.markings {
        return Err(Failure::Input(format!("context declares {r} sections but --markings is {}", a.markings)));
    }
    match ctx.symbol(&a.k_symbol) {
        Some(sym) if sym.degree != deg_k => {
            return Err(Failure::Input(format!(
                "context gives `{}` degree {}, --deg-k says {deg_k}",
                a.k_symbol, sym.degree
            )))
        }
        Some(_) => {}
        None => ctx.add_symbol(&a.k_symbol, deg_k, Effectivity::Unbounded)?,
    }
    let t = TargetData::new(dim, &a.k_symbol);
    let vc = vcb::virtual_canonical(&ctx, &t)?;
    let tx = vcb::tx_det(&ctx, &t)?;
    let sections = vcb::omega_sections_det(&ctx)?;
    let defect = vcb::assembly_defect(&ctx, &t)?;
    match a.format {
        Format::Text => {
            println!("rank: {}", vc.rank);
            println!("c1: {}", render_base(&ctx, &vc.c1));
            println!("tangent side: rank {}, c1 {}", tx.rank, render_base(&ctx, &tx.c1));
            println!("sections side: rank {}, c1 {}", sections.det.rank, render_base(&ctx, &sections.det.c1));
            if let Some(alt) = &sections.alternate {
                println!("sections side, boundary form: {}", render_base(&ctx, alt));
            }
            println!("assembly defect: {}", render_base(&ctx, &defect));
        }
        Format::Json => print_json(&json!({
            "rank": vc.rank.to_string(),
            "c1": json_base(&ctx, &vc.c1),
            "tangent_side": { "rank": tx.rank.to_string(), "c1": json_base(&ctx, &tx.c1) },
            "sections_side": {
                "rank": sections.det.rank.to_string(),
                "c1": json_base(&ctx, &sections.det.c1),
                "boundary_form": sections.alternate.as_ref().map(|e| json_base(&ctx, e)),
            },
            "assembly_defect": json_base(&ctx, &defect),
        })),
    }
    Ok(true)
}

/// Default divisor arguments for the sections-only context.
fn default_divisors(id: RelationId, i: usize, j: usize) -> Vec<String> {
    let s = taut0::context::section_name;
    match id.divisor_arity() {
        0 => vec![],
        1 if id == RelationId::Rel1 => vec![s(i)],
        1 => vec![s(j)],
        _ => vec![s(i), s(j)],
    }
}

struct Job {
    label: String,
    expression: String,
    verdict: Result<Verdict, Failure>,
}

fn verify_job(ctx: &Context, verifier: &Verifier, label: String, e: Result<BaseExpr, Failure>) -> Job {
    match e {
        Ok(e) => Job {
            label,
            expression: render_base(ctx, &e),
            verdict: mbar::specialize(ctx, &e)
                .and_then(|v| verifier.verify(&v))
                .map_err(Failure::from),
        },
        Err(f) => Job {
            label,
            expression: String::new(),
            verdict: Err(f),
        },
    }
}

fn relation_expr(ctx: &Context, id: RelationId, a: &VerifyArgs) -> Result<BaseExpr, Failure> {
    let (i, j) = (a.i.unwrap_or(1), a.j.unwrap_or(2));
    let divisors = if a.divisors.is_empty() { default_divisors(id, i, j) } else { a.divisors.clone() };
    let args = relation_args(ctx, &divisors, Some(i), Some(j))?;
    match instantiate(ctx, id, &args)? {
        RelationValue::Base(e) => Ok(e),
        RelationValue::Curve(_) => Err(Failure::Unsupported(format!(
            "{id} is a total-space class and has no image on M_0,n"
        ))),
    }
}

fn vector_json(v: &MbarVector) -> Value {
    let map: serde_json::Map<String, Value> = v
        .coefficients()
        .map(|(p, c)| (p.display(v.n()).to_string(), json_q(c)))
        .collect();
    Value::Object(map)
}

fn verify(a: VerifyArgs) -> Outcome {
    let ctx = Context::sections_only(a.n, StabilityMode::DeligneMumford);
    let verifier = Verifier::new(a.n)?;
    let mut items: Vec<(String, Result<BaseExpr, Failure>)> = Vec::new();
    match (&a.expr, a.relation.as_deref()) {
        (Some(src), _) => items.push(("expression".to_string(), parse_base(&ctx, src).map_err(Failure::from))),
        (None, Some("all")) => {
            for id in RelationId::ALL.into_iter().filter(|id| *id != RelationId::Rel5) {
                items.push((id.name().to_string(), relation_expr(&ctx, id, &a)));
            }
        }
        (None, Some(name)) => {
            let id: RelationId = name.parse()?;
            items.push((id.name().to_string(), relation_expr(&ctx, id, &a)));
        }
        (None, None) => return Err(Failure::Input("give --relation or --expr".to_string())),
    }
    let jobs = run_jobs(&ctx, &verifier, items, a.jobs.max(1));
    if jobs.len() == 1 {
        if let Err(f) = &jobs[0].verdict {
            return Err(f.clone());
        }
    }
    let all_zero = jobs.iter().all(|j| matches!(&j.verdict, Ok(v) if v.is_zero_class()));
    match a.report {
        Format::Text => {
            for (k, job) in jobs.iter().enumerate() {
                if k > 0 {
                    println!();
                }
                print_verdict_text(&job.label, &job.expression, &job.verdict, a.n);
            }
        }
        Format::Json => {
            let reports: Vec<Value> = jobs
                .iter()
                .map(|job| match &job.verdict {
                    Ok(v) => json!({
                        "relation": job.label,
                        "n": a.n,
                        "expression": job.expression,
                        "vector": vector_json(&v.vector),
                        "keel_remainder": vector_json(&v.remainder),
                        "fcurves_checked": v.fcurve_count,
                        "nonzero_pairings": v.nonzero_pairings.iter()
                            .map(|(f, d)| json!({ "fcurve": f.to_string(), "pairing": json_q(d) }))
                            .collect::<Vec<_>>(),
                        "keel_zero": v.keel_zero(),
                        "pairings_zero": v.pairings_zero(),
                        "zero_class": v.is_zero_class(),
                    }),
                    Err(f) => json!({ "relation": job.label, "n": a.n, "error": failure_text(f) }),
                })
                .collect();
            if reports.len() == 1 {
                print_json(&reports[0]);
            } else {
                print_json(&json!({ "n": a.n, "all_zero": all_zero, "reports": reports }));
            }
        }
    }
    Ok(all_zero)
}

fn failure_text(f: &Failure) -> String {
    match f {
        Failure::Input(m) => format!("error: {m}"),
        Failure::Unsupported(m) => format!("unsupported: {m}"),
    }
}

/// Verifies the items, spreading them over `jobs` threads; results keep the
/// input order.
fn run_jobs(ctx: &Context, verifier: &Verifier, items: Vec<(String, Result<BaseExpr, Failure>)>, jobs: usize) -> Vec<Job> {
    if jobs <= 1 || items.len() <= 1 {
        return items.into_iter().map(|(l, e)| verify_job(ctx, verifier, l, e)).collect();
    }
    let mut slots: Vec<Option<(String, Result<BaseExpr, Failure>)>> = items.into_iter().map(Some).collect();
    let chunk = slots.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = slots
            .chunks_mut(chunk)
            .map(|part| {
                let work: Vec<_> = part.iter_mut().filter_map(Option::take).collect();
                scope.spawn(move || {
                    work.into_iter().map(|(l, e)| verify_job(ctx, verifier, l, e)).collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("verification worker panicked"))
            .collect()
    })
}

fn print_verdict_text(label: &str, expression: &str, verdict: &Result<Verdict, Failure>, n: usize) {
    println!("{label} on M_0,{n}");
    match verdict {
        Err(f) => println!("  {}", failure_text(f)),
        Ok(v) => {
            println!("  expression: {expression}");
            println!("  boundary vector: {}", v.vector);
            println!("  keel remainder: {}", v.remainder);
            println!(
                "  F-curves: {} checked, {} with nonzero pairing",
                v.fcurve_count,
                v.nonzero_pairings.len()
            );
            for (f, d) in &v.nonzero_pairings {
                println!("    {f}: {}", taut0::poly::fmt_q(d));
            }
            println!("  verdict: {}", if v.is_zero_class() { "zero class" } else { "NOT zero" });
        }
    }
}

fn parse_bound(s: &str) -> Result<(i64, i64), Failure> {
    let bad = || Failure::Input(format!("bad bound `{s}` (expected lo:hi)"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn graph(action: GraphAction) -> Outcome {
    match action {
        GraphAction::Info { file, format } => {
            let (g, alpha) = graphs::parse_graph(&read(&file)?)?;
            let form = g.canonical_form(alpha.as_ref());
            let degree: Option<i64> = alpha.as_ref().map(|a| a.values().sum());
            match format {
                Format::Text => {
                    println!("vertices: {}", g.vertex_count());
                    println!("edges: {}", g.edges().len());
                    println!("tails: {}", g.tails().len());
                    println!("components: {}", g.components());
                    println!("betti number: {}", g.betti_number());
                    println!("total genus: {}", g.total_genus());
                    println!("forest: {}", g.is_forest());
                    if let Some(d) = degree {
                        println!("total degree: {d}");
                    }
                    println!("canonical form: {form:?}");
                }
                Format::Json => print_json(&json!({
                    "vertices": g.vertex_count(),
                    "edges": g.edges().len(),
                    "tails": g.tails().len(),
                    "components": g.components(),
                    "betti_number": g.betti_number(),
                    "total_genus": g.total_genus(),
                    "forest": g.is_forest(),
                    "total_degree": degree,
                    "canonical_form": {
                        "labels": form.labels,
                        "edges": form.edges,
                        "tails": form.tails,
                    },
                })),
            }
            Ok(true)
        }
        GraphAction::Contract { file, edges } => {
            let (g, alpha) = graphs::parse_graph(&read(&file)?)?;
            let edges: BTreeSet<usize> = edges.into_iter().collect();
            let c = Contraction::contract_edges(&g, &edges)?;
            if let Err(e) = graphs::validate_contraction(&c) {
                return Err(Failure::Input(e.to_string()));
            }
            match alpha {
                Some(a) => {
                    let d = graphs::contract_decoration(&c, &Decoration::new(g, a)?)?;
                    print!("{}", d.to_text());
                }
                None => print!("{}", c.target.to_text(None)),
            }
            Ok(true)
        }
        GraphAction::Liftings {
            file,
            total,
            bounds,
            format,
        } => {
            let (g, _) = graphs::parse_graph(&read(&file)?)?;
            let bounds = if bounds.is_empty() {
                vec![(0, total.max(0)); g.vertex_count()]
            } else {
                bounds.iter().map(|b| parse_bound(b)).collect::<Result<_, _>>()?
            };
            let all = graphs::enumerate_liftings(&g, total, &bounds)?;
            let ids: Vec<u32> = g.vertex_ids().collect();
            match format {
                Format::Text => {
                    println!("vertex order: {ids:?}");
                    for d in &all {
                        println!("{:?}", d.values());
                    }
                    println!("{} liftings", all.len());
                }
                Format::Json => print_json(&json!({
                    "vertex_order": ids,
                    "liftings": all.iter().map(Decoration::values).collect::<Vec<_>>(),
                    "count": all.len(),
                })),
            }
            Ok(true)
        }
    }
}

fn run_selftest(a: SelftestArgs) -> Outcome {
    let report = selftest::run(a.jobs.max(1));
    match a.format {
        Format::Text => println!("{report}"),
        Format::Json => print_json(&serde_json::to_value(&report).map_err(|e| Failure::Input(e.to_string()))?),
    }
    Ok(report.passed())
}
