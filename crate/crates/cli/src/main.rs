use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qflag_core::calculus::{self, TangentSpace, Verdict};
use qflag_core::freealg::MonomialOrder;
use qflag_core::oq::{self, OqWord};
use qflag_core::parse::{parse_scalar, Vars};
use qflag_core::uqsl::{AdjointSide, Uq};
use qflag_core::weyl::{self, Rank, WeylError};
use serde::Serialize;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "qflag", version, about = "Differential calculi on quantum flag manifolds")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Highest rank accepted.
    #[arg(long, env = "QFLAG_RANK_CAP", default_value_t = weyl::DEFAULT_RANK_CAP, global = true)]
    rank_cap: usize,

    /// Maximum number of reduced words enumerated for class computations.
    #[arg(long, env = "QFLAG_WORD_BUDGET", default_value_t = weyl::DEFAULT_WORD_BUDGET, global = true)]
    word_budget: u128,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Args, Debug)]
struct RankArg {
    #[arg(long)]
    rank: usize,
}

#[derive(Args, Debug)]
struct Source {
    #[arg(long)]
    rank: usize,

    /// Reduced word of the longest element: digits, comma list, `nice` or `nice-op`.
    #[arg(long, conflicts_with = "tangent")]
    word: Option<String>,

    /// Semicolon-separated positive-part expressions spanning the tangent space.
    #[arg(long)]
    tangent: Option<String>,

    /// Binds a parameter used in `--tangent`, e.g. `t=q^-1`.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Positive roots, or the root vectors of a reduced word in convex order.
    Roots {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        word: Option<String>,
    },
    /// Coproduct of an element.
    Coproduct {
        #[command(flatten)]
        rank: RankArg,
        #[arg(long)]
        expr: String,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
    },
    /// Pairing of an element with a word in the matrix coefficients `u[a,b]`.
    Pair {
        #[command(flatten)]
        rank: RankArg,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        oq: String,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
    },
    /// Left/right coideal verdict of a tangent space.
    Coideal {
        #[command(flatten)]
        source: Source,
        /// Exit with status 1 unless the verdict matches.
        #[arg(long, value_enum)]
        expect: Option<ExpectVerdict>,
        /// Also print the offending component for each failing side.
        #[arg(long)]
        witness: bool,
    },
    /// Degree-two relations of the exterior algebra, grouped by weight.
    Relations {
        #[command(flatten)]
        source: Source,
    },
    /// Graded dimensions of the exterior algebra.
    Exterior {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        kmax: Option<usize>,
        /// Letter precedence, lowest first, as comma-separated generator labels.
        #[arg(long)]
        order: Option<String>,
        /// Exit with status 1 unless the dimensions are (or are not) classical.
        #[arg(long, value_enum)]
        expect: Option<ExpectClassical>,
    },
    /// Frobenius pairing and Nakayama signs of the exterior algebra.
    Frobenius {
        #[command(flatten)]
        source: Source,
    },
    /// Weights of the degree-k line modules.
    Lines {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        k: usize,
    },
    /// Restriction to the Grassmannian with crossed node r.
    Grassmann {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = SideArg::Right)]
        side: SideArg,
    },
    /// Joint kernel of the tangent vectors acting on all words of one degree.
    DbarKernel {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1)]
        degree: usize,
    },
    /// Commutation classes of reduced words of the longest element.
    Classes {
        #[command(flatten)]
        rank: RankArg,
        /// Draw the opposite involution in DOT output.
        #[arg(long)]
        involution: bool,
    },
    /// Verdict and exterior dimensions for every commutation class.
    Survey {
        #[command(flatten)]
        rank: RankArg,
        #[arg(long)]
        kmax: Option<usize>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ExpectVerdict {
    TwoSided,
    LeftOnly,
    RightOnly,
    Neither,
    /// Any verdict other than `neither`.
    Calculus,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ExpectClassical {
    Classical,
    NonClassical,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

struct Output {
    body: String,
    code: u8,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.body);
            ExitCode::from(out.code)
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn rank(cli: &Cli, n: usize) -> Result<Rank, Failure> {
    Ok(Rank::with_cap(n, cli.rank_cap)?)
}

fn vars(set: &[String]) -> Result<Vars, Failure> {
    let mut v = Vars::new();
    for s in set {
        let (name, value) = s.split_once('=').ok_or_else(|| Failure(format!("expected NAME=VALUE, got `{s}`")))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Failure(format!("bad parameter name `{name}`")));
        }
        let value = parse_scalar(value, &v)?;
        v.insert(name.to_string(), value);
    }
    Ok(v)
}

fn tangent(cli: &Cli, src: &Source) -> Result<TangentSpace, Failure> {
    let r = rank(cli, src.rank)?;
    match (&src.word, &src.tangent) {
        (Some(w), None) => {
            if !src.set.is_empty() {
                return Err(Failure("--set applies to --tangent only".into()));
            }
            let w = weyl::parse_word(w, src.rank)?;
            Ok(TangentSpace::from_word(&w, r)?)
        }
        (None, Some(t)) => {
            let exprs: Vec<&str> = t.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
            if exprs.is_empty() {
                return Err(Failure("--tangent needs at least one expression".into()));
            }
            Ok(TangentSpace::from_exprs(r, &exprs, &vars(&src.set)?)?)
        }
        _ => Err(Failure("exactly one of --word or --tangent is required".into())),
    }
}

fn json(v: &impl Serialize) -> Result<String, Failure> {
    let value = serde_json::to_value(v)?;
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn no_dot(cli: &Cli, what: &str) -> Result<(), Failure> {
    if cli.format == Format::Dot {
        return Err(Failure(format!("dot output is not available for {what}")));
    }
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn classical_str(c: Option<bool>) -> &'static str {
    c.map_or("undetermined", yes_no)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn weight_str(w: &[i32]) -> String {
    format!("({})", w.iter().map(i32::to_string).collect::<Vec<_>>().join(","))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Roots { rank: n, word } => {
            no_dot(cli, "roots")?;
            let r = rank(cli, *n)?;
            match word {
                None => {
                    let roots = weyl::positive_roots(r.get());
                    match cli.format {
                        Format::Json => Ok(Output::ok(json(&json!({
                            "rank": r.get(),
                            "roots": roots.iter().map(|x| json!({"root": x.to_string(), "weight": x.weight(r.get())})).collect::<Vec<_>>(),
                        }))?)),
                        _ => {
                            let mut s = String::new();
                            for x in roots {
                                writeln!(s, "{x}  {}", weight_str(&x.weight(r.get()))).unwrap();
                            }
                            Ok(Output::ok(s))
                        }
                    }
                }
                Some(w) => {
                    let w = weyl::parse_word(w, r.get())?;
                    let t = TangentSpace::from_word(&w, r)?;
                    match cli.format {
                        Format::Json => Ok(Output::ok(json(&json!({
                            "rank": r.get(),
                            "word": w.render(),
                            "roots": t.basis.iter().map(|b| json!({
                                "root": b.root.map(|x| x.to_string()),
                                "label": format!("e{}", b.label),
                                "weight": b.weight,
                                "vector": b.elem.render(),
                            })).collect::<Vec<_>>(),
                        }))?)),
                        _ => {
                            let mut s = String::new();
                            for b in &t.basis {
                                writeln!(s, "{}  {}", b.root.map(|x| x.to_string()).unwrap_or_default(), b.elem).unwrap();
                            }
                            Ok(Output::ok(s))
                        }
                    }
                }
            }
        }
        Command::Coproduct { rank: n, expr, set } => {
            no_dot(cli, "coproduct")?;
            let r = rank(cli, n.rank)?;
            let u = Uq::get(r.get());
            let x = u.parse(expr, &vars(set)?)?;
            let d = u.coproduct(&x);
            match cli.format {
                Format::Json => Ok(Output::ok(json(&json!({"element": x.render(), "coproduct": d.render()}))?)),
                _ => Ok(Output::ok(format!("{}\n", d.render()))),
            }
        }
        Command::Pair { rank: n, expr, oq: word, set } => {
            no_dot(cli, "pair")?;
            let r = rank(cli, n.rank)?;
            let v = vars(set)?;
            let x = Uq::get(r.get()).parse(expr, &v)?;
            let a = oq::parse_oq(r.get(), word, &v)?;
            let value = oq::pair(&x, &a);
            match cli.format {
                Format::Json => Ok(Output::ok(json(&json!({
                    "element": x.render(),
                    "oq": a.render(),
                    "value": value.to_string(),
                }))?)),
                _ => Ok(Output::ok(format!("{value}\n"))),
            }
        }
        Command::Coideal { source, expect, witness } => {
            no_dot(cli, "coideal")?;
            let t = tangent(cli, source)?;
            let rep = calculus::coideal_check(&t);
            let body = match cli.format {
                Format::Json => json(&rep)?,
                _ => {
                    let mut s = format!("verdict: {}\n", rep.verdict);
                    for w in rep.witness.iter().filter(|_| *witness) {
                        let side = match w.side {
                            calculus::Side::Left => "left",
                            calculus::Side::Right => "right",
                        };
                        writeln!(s, "witness ({side}): {} with other leg {} leaves {}", w.element, w.other_leg, w.component)
                            .unwrap();
                    }
                    s
                }
            };
            let met = match expect {
                None => true,
                Some(ExpectVerdict::Calculus) => rep.verdict.admits_calculus(),
                Some(e) => {
                    let want = match e {
                        ExpectVerdict::TwoSided => Verdict::TwoSided,
                        ExpectVerdict::LeftOnly => Verdict::LeftOnly,
                        ExpectVerdict::RightOnly => Verdict::RightOnly,
                        _ => Verdict::Neither,
                    };
                    rep.verdict == want
                }
            };
            Ok(Output { body, code: if met { 0 } else { 1 } })
        }
        Command::Relations { source } => {
            no_dot(cli, "relations")?;
            let t = tangent(cli, source)?;
            let rel = calculus::quadratic_relations(&t);
            let groups: Vec<(Vec<i32>, Vec<String>)> = rel
                .by_weight
                .iter()
                .map(|(w, rs)| (w.clone(), rs.iter().map(|r| calculus::render_relation(r, &rel.alphabet)).collect()))
                .collect();
            match cli.format {
                Format::Json => Ok(Output::ok(json(&json!({
                    "dim": rel.dim(),
                    "weights": groups.iter().map(|(w, rs)| json!({"weight": w, "relations": rs})).collect::<Vec<_>>(),
                }))?)),
                _ => {
                    let mut s = format!("relations: {}\n", rel.dim());
                    for (w, rs) in &groups {
                        writeln!(s, "weight {}", weight_str(w)).unwrap();
                        for r in rs {
                            writeln!(s, "  {r}").unwrap();
                        }
                    }
                    Ok(Output::ok(s))
                }
            }
        }
        Command::Exterior { source, kmax, order, expect } => {
            no_dot(cli, "exterior")?;
            let t = tangent(cli, source)?;
            let order = match order {
                None => MonomialOrder::natural(t.dim()),
                Some(list) => {
                    let labels = t.alphabet().labels().to_vec();
                    let mut prec = Vec::new();
                    for part in list.split(',').map(str::trim) {
                        let l = labels
                            .iter()
                            .position(|x| x == part || x.strip_prefix('e') == Some(part))
                            .ok_or_else(|| Failure(format!("unknown generator `{part}`")))?;
                        prec.push(l as u8);
                    }
                    let mut check = prec.clone();
                    check.sort_unstable();
                    if check != (0..t.dim() as u8).collect::<Vec<_>>() {
                        return Err(Failure("--order must list every generator once".into()));
                    }
                    calculus::order_from_precedence(&prec)
                }
            };
            let table = calculus::exterior_dims_with_order(&t, *kmax, order)?;
            let body = match cli.format {
                Format::Json => json(&table)?,
                _ => format!("dims: {}  classical: {}\n", join(&table.dims), classical_str(table.classical)),
            };
            let met = match expect {
                None => true,
                Some(ExpectClassical::Classical) => table.classical == Some(true),
                Some(ExpectClassical::NonClassical) => table.classical == Some(false),
            };
            Ok(Output { body, code: if met { 0 } else { 1 } })
        }
        Command::Frobenius { source } => {
            no_dot(cli, "frobenius")?;
            let t = tangent(cli, source)?;
            let rep = calculus::frobenius_report(&t)?;
            match cli.format {
                Format::Json => Ok(Output::ok(json(&rep)?)),
                _ => {
                    let mut s = format!("top degree: {}  top dimension: {}\n", rep.top_degree, rep.top_dimension);
                    for (k, nd) in &rep.pairing_nondegenerate {
                        writeln!(s, "pairing {k} x {}: {}", rep.top_degree - k, if *nd { "nondegenerate" } else { "degenerate" })
                            .unwrap();
                    }
                    for e in &rep.nakayama_sign {
                        match e.sign {
                            Some(sg) => writeln!(s, "nakayama {}: {:+}", e.generator, sg).unwrap(),
                            None => writeln!(s, "nakayama {}: {}", e.generator, e.coefficient).unwrap(),
                        }
                    }
                    Ok(Output::ok(s))
                }
            }
        }
        Command::Lines { source, k } => {
            no_dot(cli, "lines")?;
            let t = tangent(cli, source)?;
            let ws = calculus::line_decomposition(&t, *k)?;
            match cli.format {
                Format::Json => Ok(Output::ok(json(&json!({"k": k, "weights": ws}))?)),
                _ => Ok(Output::ok(ws.iter().map(|w| weight_str(w) + "\n").collect())),
            }
        }
        Command::Grassmann { source, r, side } => {
            no_dot(cli, "grassmann")?;
            let t = tangent(cli, source)?;
            let side = match side {
                SideArg::Left => AdjointSide::Left,
                SideArg::Right => AdjointSide::Right,
            };
            let rep = calculus::grassmann_restriction(&t, *r, side)?;
            let labels: Vec<String> = rep.basis.iter().map(|b| format!("e{}", b.label)).collect();
            match cli.format {
                Format::Json => Ok(Output::ok(json(&json!({
                    "r": rep.r,
                    "basis": labels,
                    "ad_closed": rep.ad_closed,
                    "failures": rep.failures,
                }))?)),
                _ => {
                    let mut s = format!("basis: {}\nad-closed: {}\n", labels.join(" "), yes_no(rep.ad_closed));
                    for (g, x) in &rep.failures {
                        writeln!(s, "leaves span: ad({g}) {x}").unwrap();
                    }
                    Ok(Output::ok(s))
                }
            }
        }
        Command::DbarKernel { source, degree } => {
            no_dot(cli, "dbar-kernel")?;
            let t = tangent(cli, source)?;
            let words: Vec<OqWord> = oq::all_words(t.n, *degree);
            let rep = calculus::dbar_kernel(&words, &t)?;
            match cli.format {
                Format::Json => Ok(Output::ok(json(&rep)?)),
                _ => {
                    let mut s = format!("dimension: {}\n", rep.dimension);
                    for b in &rep.basis {
                        writeln!(s, "{}", b.render()).unwrap();
                    }
                    Ok(Output::ok(s))
                }
            }
        }
        Command::Classes { rank: n, involution } => {
            let r = rank(cli, n.rank)?;
            let g = weyl::commutation_classes_with_budget(r, cli.word_budget)?;
            match cli.format {
                Format::Dot => Ok(Output::ok(g.to_dot(*involution))),
                Format::Json => Ok(Output::ok(json(&json!({
                    "rank": r.get(),
                    "classes": g.nodes.iter().enumerate().map(|(k, c)| json!({
                        "representative": c.representative.render(),
                        "size": c.size,
                        "opposite": g.opposite[k],
                    })).collect::<Vec<_>>(),
                    "edges": g.edges,
                }))?)),
                Format::Text => {
                    let mut s = format!("classes: {}\n", g.nodes.len());
                    for (k, c) in g.nodes.iter().enumerate() {
                        let nb: Vec<String> = g.neighbours(k).iter().map(|x| g.nodes[*x].representative.render()).collect();
                        writeln!(s, "{}  size {}  braid-adjacent: {}", c.representative, c.size, nb.join(" ")).unwrap();
                    }
                    Ok(Output::ok(s))
                }
            }
        }
        Command::Survey { rank: n, kmax } => survey(cli, n.rank, *kmax),
    }
}

#[derive(Serialize)]
struct Row {
    representative: String,
    class_size: Option<usize>,
    verdict: Verdict,
    dims: Option<Vec<u128>>,
    classical: Option<bool>,
}

fn survey(cli: &Cli, n: usize, kmax: Option<usize>) -> Result<Output, Failure> {
    let r = rank(cli, n)?;
    let (rows, graph, truncated) = match weyl::commutation_classes_with_budget(r, cli.word_budget) {
        Ok(g) => {
            let rows = calculus::survey_classes(&g, r, kmax)?;
            (rows, Some(g), None)
        }
        Err(e @ WeylError::TooManyWords { .. }) => {
            let rows = calculus::nice_classes(n)
                .iter()
                .map(|w| calculus::survey_row(w, r, 0, kmax))
                .collect::<Result<Vec<_>, _>>()?;
            (rows, None, Some(format!("{e}; only the nice classes are listed")))
        }
        Err(e) => return Err(e.into()),
    };
    let rows: Vec<Row> = rows
        .into_iter()
        .map(|x| Row {
            representative: x.word.render(),
            class_size: graph.as_ref().map(|_| x.class_size),
            verdict: x.verdict,
            dims: x.dims,
            classical: x.classical,
        })
        .collect();
    let body = match cli.format {
        Format::Json => json(&json!({"rank": n, "rows": rows, "truncated": truncated}))?,
        Format::Dot => survey_dot(n, graph.as_ref(), &rows, truncated.as_deref()),
        Format::Text => {
            let mut s = String::new();
            for row in &rows {
                let dims = row.dims.as_ref().map_or("-".to_string(), |d| join(d));
                let classical = if row.dims.is_none() { "-" } else { classical_str(row.classical) };
                writeln!(s, "{}  {}  dims: {}  classical: {}", row.representative, row.verdict, dims, classical).unwrap();
            }
            if let Some(t) = &truncated {
                writeln!(s, "truncated: {t}").unwrap();
            }
            s
        }
    };
    Ok(Output::ok(body))
}

fn survey_dot(n: usize, g: Option<&weyl::ClassGraph>, rows: &[Row], truncated: Option<&str>) -> String {
    let mut s = format!("graph survey_a{n} {{\n  node [shape=box, style=filled, fontname=\"monospace\"];\n");
    if let Some(t) = truncated {
        writeln!(s, "  label=\"truncated: {}\";", t.replace('"', "'")).unwrap();
    }
    for (k, row) in rows.iter().enumerate() {
        let color = match row.verdict {
            Verdict::TwoSided => "palegreen",
            Verdict::LeftOnly => "lightblue",
            Verdict::RightOnly => "lightpink",
            Verdict::Neither => "lightgray",
        };
        writeln!(s, "  c{k} [label=\"{}\\n{}\", fillcolor={color}];", row.representative, row.verdict).unwrap();
    }
    for (a, b) in g.iter().flat_map(|g| &g.edges) {
        writeln!(s, "  c{a} -- c{b};").unwrap();
    }
    s.push_str("}\n");
    s
}
