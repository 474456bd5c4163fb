//! `dehn` — command-line front end for the HNN tower toolkit.
//!
//! Every subcommand writes its result to stdout. Failures print a JSON object
//! `{"error": {"kind": …, "message": …}}` to stderr and exit nonzero
//! (2 for usage errors, 1 for everything else).

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dehn_core::balls::{self, build_sphere, realize_explicit, sphere_table};
use dehn_core::complexes::{self, validate, CellComplex, DiagramSpec};
use dehn_core::config::OutputFormat;
use dehn_core::dehncalc::{dehn_table, derive_steps};
use dehn_core::distortion::{check_distortion_inequality, witness_samples};
use dehn_core::exec::Mode;
use dehn_core::growth::{length_rows, ln_biguint, GrowthTable};
use dehn_core::presentations::{build_group_with_depth, LevelTag};
use dehn_core::{Config, Error, Gen, Word, SCHEMA_VERSION};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "dehn", version, about = "Presentations, diagrams, spheres and Dehn-function bounds of the G_n/H_n tower")]
struct Cli {
    /// Run parameter sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generators, relators and edge groups of a level.
    Present {
        #[arg(long)]
        level: LevelTag,
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
    /// Table of N, L(N), Σ_{i≤N} L(i) and their ratio.
    Lengths {
        #[arg(long)]
        max_n: u64,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
    /// The tower value w_n(r).
    Growth {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u64,
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
    /// Build an explicit van Kampen diagram or slab and export it.
    Diagram {
        #[command(flatten)]
        target: DiagramArgs,
        #[arg(long, default_value = "json")]
        format: OutputFormat,
    },
    /// Inventory (or explicit complex) of the sphere S_{G_n}(r) / S_{H_n}(r).
    Sphere {
        #[arg(long)]
        group: LevelTag,
        #[arg(long)]
        r: u64,
        /// Build the labelled complex instead of the piece inventory (G0, H1 only).
        #[arg(long)]
        explicit: bool,
        #[arg(long, default_value = "json")]
        emit: OutputFormat,
    },
    /// Area and volume lower bound of the spheres for r = 1..=r-max.
    Table {
        #[arg(long)]
        group: LevelTag,
        #[arg(long)]
        r_max: u64,
        #[arg(long, default_value = "csv")]
        out: OutputFormat,
    },
    /// Area-distortion witnesses ∂Θ^n_1(N) for N = 1..=N-max and the fitted β.
    Distort {
        #[arg(long)]
        n: u32,
        #[arg(long = "N-max")]
        big_n_max: u64,
        #[arg(long, default_value = "csv")]
        out: OutputFormat,
    },
    /// Derivation audit and the Dehn-function column.
    DehnTable {
        #[arg(long, default_value_t = 4)]
        max_n: u32,
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
    /// Check a diagram or explicit sphere against a level presentation.
    Validate {
        #[command(flatten)]
        target: DiagramArgs,
        /// Presentation to check against (defaults to the smallest level containing the diagram).
        #[arg(long)]
        level: Option<LevelTag>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Delta,
    Theta,
    Slab,
    Strip,
    Cell,
    Sphere,
}

#[derive(Args, Debug)]
struct DiagramArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    i: u32,
    #[arg(long, default_value_t = 2)]
    j: u32,
    #[arg(long, default_value_t = 0)]
    k: u32,
    #[arg(long, default_value_t = 1)]
    r: u64,
    /// Strip length.
    #[arg(long, default_value_t = 1)]
    length: u64,
    /// Strip side letter, e.g. `a[0][1][1]`.
    #[arg(long)]
    side: Option<String>,
    /// Strip rung letter, e.g. `u[0][1]`.
    #[arg(long)]
    rung: Option<String>,
    /// Cell label, e.g. `"a[0][1][1] y[1] a[0][1][1]^-1 y[1]^-1"`.
    #[arg(long)]
    label: Option<String>,
    /// Sphere level (for `--kind sphere`).
    #[arg(long)]
    group: Option<LevelTag>,
}

/// Failure of a subcommand: a stable kind and a message.
#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { kind: "UsageError", message: message.into() }
    }
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Failure {
        let e = e.into();
        Failure { kind: e.kind(), message: e.to_string() }
    }
}

type Outcome = Result<String, Failure>;

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialise");
    s.push('\n');
    s
}

fn unsupported(format: OutputFormat, command: &str) -> Failure {
    Failure::usage(format!("{command} does not support --format {format}"))
}

fn parse_gen(s: Option<&str>, what: &str) -> Result<Gen, Failure> {
    let s = s.ok_or_else(|| Failure::usage(format!("--{what} is required")))?;
    let w: Word = s.parse()?;
    match w.letters() {
        [l] if !l.inv => Ok(l.gen),
        _ => Err(Failure::usage(format!("--{what} must be a single positive letter, got {s:?}"))),
    }
}

fn diagram_spec(t: &DiagramArgs) -> Result<DiagramSpec, Failure> {
    Ok(match t.kind {
        Kind::Delta => DiagramSpec::Delta { n: t.n, i: t.i, j: t.j, k: t.k, r: t.r },
        Kind::Theta => DiagramSpec::Theta { n: t.n, i: t.i, k: t.k, r: t.r },
        Kind::Slab => DiagramSpec::Slab { k: t.k, r: t.r },
        Kind::Strip => DiagramSpec::Strip {
            length: t.length,
            side: parse_gen(t.side.as_deref(), "side")?,
            rung: parse_gen(t.rung.as_deref(), "rung")?,
        },
        Kind::Cell => {
            let label = t.label.as_deref().ok_or_else(|| Failure::usage("--label is required"))?;
            DiagramSpec::SingleCell { label: label.parse()? }
        }
        Kind::Sphere => return Err(Failure::usage("spheres are built by `sphere --explicit`")),
    })
}

fn build_target(t: &DiagramArgs, cfg: &Config) -> Result<CellComplex, Failure> {
    if t.kind == Kind::Sphere {
        let group = t.group.ok_or_else(|| Failure::usage("--group is required for --kind sphere"))?;
        return Ok(realize_explicit(group, t.r, cfg)?);
    }
    Ok(complexes::build(&diagram_spec(t)?, cfg)?)
}

/// The smallest level whose presentation contains every generator of `c`.
fn default_level(t: &DiagramArgs, c: &CellComplex) -> LevelTag {
    if let (Kind::Sphere, Some(g)) = (t.kind, t.group) {
        return g;
    }
    let top = c
        .edges()
        .iter()
        .map(|e| match e.label {
            Gen::A { level, .. } => 2 * level + 1,
            Gen::U { level, .. } => 2 * level + 2,
            Gen::D { level, .. } => 2 * level + 1,
            Gen::Y { .. } | Gen::X { .. } => 0,
        })
        .max()
        .unwrap_or(0);
    // 0 ↦ H0, 1 ↦ H0 (a[0] lives in H0), 2 ↦ G0, 3 ↦ H1, …
    match top {
        0 | 1 => LevelTag::h(0),
        t if t % 2 == 0 => LevelTag::g(t / 2 - 1),
        t => LevelTag::h(t / 2),
    }
}

fn present(level: LevelTag, format: OutputFormat, cfg: &Config) -> Outcome {
    let p = build_group_with_depth(level, cfg.max_level_depth)?;
    let doc = p.to_document();
    match format {
        OutputFormat::Json => Ok(to_json(&doc)),
        OutputFormat::Text => {
            let mut s = String::new();
            writeln!(s, "{}: {} generators, {} relators", doc.level, doc.generators.len(), doc.relators.len()).unwrap();
            writeln!(s, "generators: {}", doc.generators.join(", ")).unwrap();
            writeln!(s, "relators:").unwrap();
            for r in &doc.relators {
                writeln!(s, "  {r}").unwrap();
            }
            if !doc.cell_generators.is_empty() {
                writeln!(s, "cell generators: {}", doc.cell_generators.join(", ")).unwrap();
                writeln!(s, "cell relators: {}", doc.cell_relators.len()).unwrap();
            }
            writeln!(s, "edge groups:").unwrap();
            for e in &p.edge_groups {
                writeln!(s, "  {}: {}", e.0, dehn_core::presentations::describe_edge_group(&e.1)).unwrap();
            }
            Ok(s)
        }
        f => Err(unsupported(f, "present")),
    }
}

fn lengths(max_n: u64, format: OutputFormat, cfg: &Config) -> Outcome {
    let bits = dehn_core::growth::phi_length_bits_estimate(max_n + 1);
    if bits > cfg.bit_budget as f64 {
        return Err(dehn_core::growth::GrowthError::BudgetExceeded {
            what: format!("L({})", max_n + 1),
            estimate: format!("{bits:.0} bits"),
            budget: cfg.bit_budget,
        }
        .into());
    }
    let rows = length_rows(max_n);
    match format {
        OutputFormat::Csv => {
            let mut s = String::from("N,L(N),sum(N),ratio\n");
            for r in rows {
                writeln!(s, "{},{},{},{:.12}", r.n, r.length, r.sum, r.ratio).unwrap();
            }
            Ok(s)
        }
        OutputFormat::Json => Ok(to_json(&json!({ "schema_version": SCHEMA_VERSION, "rows": rows }))),
        f => Err(unsupported(f, "lengths")),
    }
}

fn growth(n: u32, r: u64, format: OutputFormat, cfg: &Config) -> Outcome {
    let table = GrowthTable::new(cfg.bit_budget);
    let w = table.w(n, r)?;
    match format {
        OutputFormat::Text => Ok(format!("{w}\n")),
        OutputFormat::Json => Ok(to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "n": n,
            "r": r,
            "value": w.to_string(),
            "ln_value": ln_biguint(&w),
        }))),
        f => Err(unsupported(f, "growth")),
    }
}

fn diagram(t: &DiagramArgs, format: OutputFormat, cfg: &Config) -> Outcome {
    let c = build_target(t, cfg)?;
    match format {
        OutputFormat::Json => Ok(to_json(&c.to_document())),
        OutputFormat::Dot => Ok(c.to_dot()),
        OutputFormat::Svg => {
            c.to_svg().ok_or_else(|| Failure::usage("SVG export needs vertex positions; only disk diagrams carry them"))
        }
        OutputFormat::Text => {
            let mut s = format!(
                "{}: {} vertices, {} edges, {} faces, {} 3-cells, χ = {}\n",
                c.to_document().name,
                c.vertex_count(),
                c.edges().len(),
                c.area(),
                c.volume(),
                c.euler_characteristic()
            );
            if let Ok(w) = c.boundary_word() {
                writeln!(s, "boundary: {w}").unwrap();
            }
            Ok(s)
        }
        f => Err(unsupported(f, "diagram")),
    }
}

fn sphere(group: LevelTag, r: u64, explicit: bool, emit: OutputFormat, cfg: &Config) -> Outcome {
    if explicit {
        let c = realize_explicit(group, r, cfg)?;
        let report = validate(&c, &build_group_with_depth(group, cfg.max_level_depth)?);
        return match emit {
            OutputFormat::Json => {
                let mut doc = serde_json::to_value(c.to_document()).expect("documents serialise");
                doc["area"] = json!(c.area().to_string());
                doc["validation"] = serde_json::to_value(&report).expect("reports serialise");
                Ok(to_json(&doc))
            }
            OutputFormat::Dot => Ok(c.to_dot()),
            OutputFormat::Text => Ok(format!(
                "{group}, r = {r}: {} faces, χ = {}, valid = {}\n",
                c.area(),
                c.euler_characteristic(),
                report.passed
            )),
            f => Err(unsupported(f, "sphere")),
        };
    }
    let table = GrowthTable::new(cfg.bit_budget);
    let inv = build_sphere(group, r, cfg, &table)?;
    let doc = inv.to_document(&table);
    match emit {
        OutputFormat::Json => Ok(to_json(&doc)),
        OutputFormat::Text => {
            let mut s = format!("{group}, r = {r}\n");
            for p in &doc.pieces {
                writeln!(s, "  {} × {}", p.count, p.piece).unwrap();
            }
            writeln!(s, "area: {}", doc.area.as_deref().unwrap_or("(beyond exact range)")).unwrap();
            writeln!(s, "ln area: {:.6}", doc.ln_area).unwrap();
            writeln!(s, "volume lower bound: {}", doc.volume_lower.as_deref().unwrap_or("(beyond exact range)")).unwrap();
            writeln!(s, "ln volume lower bound: {:.6}", doc.ln_volume_lower).unwrap();
            Ok(s)
        }
        f => Err(unsupported(f, "sphere")),
    }
}

fn table(group: LevelTag, r_max: u64, out: OutputFormat, cfg: &Config, mode: Mode) -> Outcome {
    if r_max == 0 {
        return Err(Failure::usage("--r-max must be at least 1"));
    }
    let rs: Vec<u64> = (1..=r_max).collect();
    let rows = sphere_table(group, &rs, cfg, mode)?;
    match out {
        OutputFormat::Csv => {
            let mut s = String::from("r,area_exact,vol_lower_exact,log_area,log_vol\n");
            for row in rows {
                writeln!(
                    s,
                    "{},{},{},{:.9},{:.9}",
                    row.r,
                    row.area_exact.unwrap_or_default(),
                    row.vol_lower_exact.unwrap_or_default(),
                    row.log_area,
                    row.log_vol
                )
                .unwrap();
            }
            Ok(s)
        }
        OutputFormat::Json => Ok(to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "group": group.to_string(),
            "rows": rows,
        }))),
        f => Err(unsupported(f, "table")),
    }
}

fn distort(n: u32, big_n_max: u64, out: OutputFormat, cfg: &Config, mode: Mode) -> Outcome {
    if big_n_max == 0 {
        return Err(Failure::usage("--N-max must be at least 1"));
    }
    let ns: Vec<u64> = (1..=big_n_max).collect();
    let samples = witness_samples(n, &ns, cfg, mode)?;
    match out {
        OutputFormat::Csv => {
            let mut s = String::from("N,area_edge_exact,area_ambient_upper,log_edge,fitted_beta\n");
            for x in &samples {
                writeln!(
                    s,
                    "{},{},{},{:.9},{}",
                    x.big_n,
                    balls::decimal(&x.area_edge_exact).unwrap_or_default(),
                    balls::decimal(&x.area_ambient_upper).unwrap_or_default(),
                    x.ln_edge(),
                    x.fitted_beta.map(|b| b.to_string()).unwrap_or_default()
                )
                .unwrap();
            }
            Ok(s)
        }
        OutputFormat::Json => {
            let report = check_distortion_inequality(&samples)?;
            Ok(to_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "samples": samples,
                "report": report,
            })))
        }
        f => Err(unsupported(f, "distort")),
    }
}

fn dehn(max_n: u32, format: OutputFormat) -> Outcome {
    if max_n == 0 {
        return Err(Failure::usage("--max-n must be at least 1"));
    }
    let steps = derive_steps(max_n);
    let rows = dehn_table(max_n);
    let caveat = "coarse equivalence is not a congruence for composition in general; \
                  compositions are applied only to the pairs arising in the induction";
    match format {
        OutputFormat::Json => Ok(to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "steps": steps,
            "table": rows,
            "caveat": caveat,
        }))),
        OutputFormat::Text => {
            let mut s = String::from("derivation:\n");
            for st in &steps {
                writeln!(s, "  {:<4} {}: {} ≃ {}", st.level, st.rule, st.unnormalized, st.notation).unwrap();
            }
            s.push_str("\nDehn functions:\n");
            for row in &rows {
                let note = match row.verified_through {
                    Some(n) => format!("  (checked for n ≤ {n})"),
                    None if row.group.ends_with('n') => "  (schema not confirmed)".into(),
                    None => String::new(),
                };
                writeln!(s, "  {:<3} {}{note}", row.group, row.notation).unwrap();
            }
            writeln!(s, "\nnote: {caveat}").unwrap();
            Ok(s)
        }
        f => Err(unsupported(f, "dehn-table")),
    }
}

fn validate_cmd(t: &DiagramArgs, level: Option<LevelTag>, cfg: &Config) -> Result<(String, bool), Failure> {
    let c = build_target(t, cfg)?;
    let level = level.unwrap_or_else(|| default_level(t, &c));
    let p = build_group_with_depth(level, cfg.max_level_depth)?;
    let report = validate(&c, &p);
    let mut doc = serde_json::to_value(&report).expect("reports serialise");
    doc["schema_version"] = json!(SCHEMA_VERSION);
    doc["level"] = json!(level.to_string());
    Ok((to_json(&doc), report.passed))
}

fn fail(f: &Failure) -> Value {
    json!({ "error": { "kind": f.kind, "message": f.message } })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", fail(&Failure::usage(e.to_string().trim_end())));
            return ExitCode::from(2);
        }
    };
    let cfg = match Config::from_env() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{}", fail(&e.into()));
            return ExitCode::from(1);
        }
    };
    let mode = if cli.sequential { Mode::Sequential } else { Mode::Parallel };
    let result = match &cli.command {
        Command::Present { level, format } => present(*level, *format, &cfg),
        Command::Lengths { max_n, format } => lengths(*max_n, *format, &cfg),
        Command::Growth { n, r, format } => growth(*n, *r, *format, &cfg),
        Command::Diagram { target, format } => diagram(target, *format, &cfg),
        Command::Sphere { group, r, explicit, emit } => sphere(*group, *r, *explicit, *emit, &cfg),
        Command::Table { group, r_max, out } => table(*group, *r_max, *out, &cfg, mode),
        Command::Distort { n, big_n_max, out } => distort(*n, *big_n_max, *out, &cfg, mode),
        Command::DehnTable { max_n, format } => dehn(*max_n, *format),
        Command::Validate { target, level } => match validate_cmd(target, *level, &cfg) {
            Ok((doc, true)) => Ok(doc),
            Ok((doc, false)) => {
                print!("{doc}");
                return ExitCode::from(1);
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", fail(&f));
            if f.kind == "UsageError" {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
