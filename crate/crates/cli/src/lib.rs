//! The `hasa` command line: compile schemas, compute Post automata, check
//! conformance and run updates on concrete documents.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hasa_core::algebra::{enumerate, included_with, productive_states, Limits, DEFAULT_STATE_BUDGET};
use hasa_core::frontend::{
    compile_dtd, parse_dtd_with, parse_ha_with_warnings, parse_updates, print_ha, read_xml_with, write_xml, DtdOptions,
    XmlOptions,
};
use hasa_core::{apply_script, post_script_with, Error, HedgeAutomaton, InsIntoMode, Tree, UpdateScript};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_SEMANTIC: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "hasa", version, about = "Static checks for XML document adaptations")]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Only the exit code and requested outputs.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Reject text, attributes and mixed content instead of skipping them.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum IntoMode {
    #[default]
    Anywhere,
    First,
    Last,
}

impl From<IntoMode> for InsIntoMode {
    fn from(m: IntoMode) -> Self {
        match m {
            IntoMode::Anywhere => InsIntoMode::Anywhere,
            IntoMode::First => InsIntoMode::First,
            IntoMode::Last => InsIntoMode::Last,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a `.dtd` or `.ha` schema to a normalized `.ha` automaton.
    Compile {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the automaton of all documents obtainable by the updates.
    Post {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        types: PathBuf,
        #[arg(long)]
        updates: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = IntoMode::Anywhere)]
        ins_into_mode: IntoMode,
    },
    /// Check that every updated document conforms to the target schema.
    Check {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long)]
        types: PathBuf,
        #[arg(long)]
        updates: PathBuf,
        #[arg(long, value_enum, default_value_t = IntoMode::Anywhere)]
        ins_into_mode: IntoMode,
        #[arg(long, env = "HASA_STATE_BUDGET", default_value_t = DEFAULT_STATE_BUDGET)]
        state_budget: usize,
        /// Also write the counterexample document as XML.
        #[arg(long)]
        counterexample_out: Option<PathBuf>,
    },
    /// Test a document against an automaton.
    Member {
        #[arg(long)]
        automaton: PathBuf,
        document: PathBuf,
        /// Print the state of every node of an accepting computation.
        #[arg(long)]
        trace: bool,
    },
    /// Apply an update script to one document.
    Rewrite {
        #[arg(long)]
        types: PathBuf,
        #[arg(long)]
        updates: PathBuf,
        #[arg(long, default_value_t = 3)]
        pool_bound: usize,
        #[arg(long, default_value_t = 100)]
        max_results: usize,
        document: PathBuf,
    },
    /// List the accepted trees up to a size.
    Enumerate {
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long)]
        max_nodes: usize,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: Error },
    #[error("{0}")]
    Core(#[from] Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        let core = match self {
            CliError::Io { .. } => return EXIT_PARSE,
            CliError::Internal(_) => return EXIT_SEMANTIC,
            CliError::Input { source, .. } | CliError::Core(source) => source,
        };
        match core {
            Error::StateBudgetExceeded { .. } | Error::DeadlineExceeded => EXIT_RESOURCE,
            Error::EmptyPool(_) | Error::UnknownTypeState(_) | Error::AlphabetMismatch(_) => EXIT_SEMANTIC,
            _ => EXIT_PARSE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct Stats {
    pub states: usize,
    pub finals: usize,
    pub rules: usize,
    pub transitions: usize,
}

impl Stats {
    pub fn of(a: &HedgeAutomaton) -> Self {
        Stats {
            states: a.states().len(),
            finals: a.finals().len(),
            rules: a.num_rules(),
            transitions: a.num_transitions(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Conforms,
    Violates,
    ResourceLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub counterexample: Option<String>,
    /// Milliseconds per phase: parse, post, inclusion, total.
    pub timings: BTreeMap<String, f64>,
    /// Sizes of the source, Post and target automata.
    pub stats: BTreeMap<String, Stats>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
    quiet: bool,
    strict: bool,
}

impl Io<'_> {
    fn warn(&mut self, msg: &str) {
        if !self.quiet {
            let _ = writeln!(self.err, "warning: {msg}");
        }
    }

    // Long runs of warnings from one file are cut short.
    fn warn_all(&mut self, path: &Path, warnings: &[String]) {
        const SHOWN: usize = 3;
        for w in warnings.iter().take(SHOWN) {
            self.warn(&format!("{}: {w}", path.display()));
        }
        if warnings.len() > SHOWN {
            self.warn(&format!("{}: {} more warnings", path.display(), warnings.len() - SHOWN));
        }
    }

    fn say(&mut self, msg: &str) {
        if !self.quiet {
            let _ = writeln!(self.out, "{msg}");
        }
    }

    fn emit_json(&mut self, v: &impl Serialize) {
        let _ = writeln!(self.out, "{}", serde_json::to_string_pretty(v).expect("serializable"));
    }
}

/// Runs a parsed command line, writing to the given streams. Returns the
/// process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let mut io = Io {
        out,
        err,
        json: cli.json,
        quiet: cli.quiet,
        strict: cli.strict,
    };
    let result = match cli.command {
        Command::Compile { input, out } => cmd_compile(&mut io, &input, out.as_deref()),
        Command::Post {
            schema,
            types,
            updates,
            out,
            ins_into_mode,
        } => cmd_post(&mut io, &schema, &types, &updates, out.as_deref(), ins_into_mode.into()),
        Command::Check {
            from,
            to,
            types,
            updates,
            ins_into_mode,
            state_budget,
            counterexample_out,
        } => cmd_check(
            &mut io,
            CheckArgs {
                from: &from,
                to: &to,
                types: &types,
                updates: &updates,
                mode: ins_into_mode.into(),
                budget: state_budget,
                counterexample_out: counterexample_out.as_deref(),
            },
        ),
        Command::Member {
            automaton,
            document,
            trace,
        } => cmd_member(&mut io, &automaton, &document, trace),
        Command::Rewrite {
            types,
            updates,
            pool_bound,
            max_results,
            document,
        } => cmd_rewrite(&mut io, &types, &updates, pool_bound, max_results, &document),
        Command::Enumerate { automaton, max_nodes } => cmd_enumerate(&mut io, &automaton, max_nodes),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            if io.json {
                io.emit_json(&serde_json::json!({ "error": e.to_string(), "exit_code": code }));
            }
            let _ = writeln!(io.err, "error: {e}");
            code
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn input_error(path: &Path) -> impl FnOnce(Error) -> CliError + '_ {
    move |source| CliError::Input {
        path: path.to_path_buf(),
        source,
    }
}

/// Loads a schema: `.dtd` files are compiled, anything else is read in the
/// native format.
fn load_automaton(io: &mut Io, path: &Path) -> CliResult<HedgeAutomaton> {
    let text = read(path)?;
    let is_dtd = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("dtd"));
    let (a, warnings) = if is_dtd {
        let (schema, w) = parse_dtd_with(&text, DtdOptions { strict: io.strict }).map_err(input_error(path))?;
        (compile_dtd(&schema).map_err(input_error(path))?, w)
    } else {
        parse_ha_with_warnings(&text).map_err(input_error(path))?
    };
    io.warn_all(path, &warnings);
    Ok(a)
}

fn load_script(path: &Path, types: &HedgeAutomaton) -> CliResult<UpdateScript> {
    parse_updates(&read(path)?, types).map_err(input_error(path))
}

fn load_document(io: &mut Io, path: &Path) -> CliResult<Tree> {
    let text = read(path)?;
    let (t, warnings) = read_xml_with(&text, XmlOptions { strict: io.strict }).map_err(input_error(path))?;
    io.warn_all(path, &warnings);
    Ok(t)
}

fn cmd_compile(io: &mut Io, input: &Path, out: Option<&Path>) -> CliResult<u8> {
    let a = load_automaton(io, input)?;
    let text = print_ha(&a);
    match out {
        Some(p) => {
            write(p, &text)?;
            if io.json {
                io.emit_json(&serde_json::json!({ "out": p, "stats": Stats::of(&a) }));
            }
        }
        None => {
            let _ = io.out.write_all(text.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

// Rules that never fire at the root leave root occurrences in place.
fn root_warnings(from: &HedgeAutomaton, script: &UpdateScript) -> Vec<String> {
    let productive = productive_states(from);
    script
        .rules()
        .iter()
        .filter(|r| r.kind().excludes_root())
        .filter(|r| {
            from.rules_for(r.target())
                .any(|(q, _)| from.finals().contains(q) && productive.contains(q))
        })
        .map(|r| format!("`{r}` does not apply at the root, and documents rooted at `{}` exist", r.target()))
        .collect()
}

fn cmd_post(
    io: &mut Io,
    schema: &Path,
    types: &Path,
    updates: &Path,
    out: Option<&Path>,
    mode: InsIntoMode,
) -> CliResult<u8> {
    let doc = load_automaton(io, schema)?;
    let types = load_automaton(io, types)?;
    let script = load_script(updates, &types)?;
    for w in root_warnings(&doc, &script) {
        io.warn(&w);
    }
    let post = post_script_with(&doc, &script, mode)?;
    let text = print_ha(&post);
    match out {
        Some(p) => {
            write(p, &text)?;
            if io.json {
                io.emit_json(&serde_json::json!({ "out": p, "stats": Stats::of(&post) }));
            } else {
                let s = Stats::of(&post);
                io.say(&format!(
                    "wrote {}: {} states, {} rules, {} transitions",
                    p.display(),
                    s.states,
                    s.rules,
                    s.transitions
                ));
            }
        }
        None => {
            let _ = io.out.write_all(text.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

struct CheckArgs<'a> {
    from: &'a Path,
    to: &'a Path,
    types: &'a Path,
    updates: &'a Path,
    mode: InsIntoMode,
    budget: usize,
    counterexample_out: Option<&'a Path>,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// The conformance check without any output.
pub fn check_report(
    from: &HedgeAutomaton,
    to: &HedgeAutomaton,
    script: &UpdateScript,
    mode: InsIntoMode,
    limits: &Limits,
) -> CliResult<(CheckReport, Option<Tree>)> {
    let mut timings = BTreeMap::new();
    let mut stats = BTreeMap::new();
    stats.insert("from".to_string(), Stats::of(from));
    stats.insert("to".to_string(), Stats::of(to));
    let warnings = root_warnings(from, script);

    let start = Instant::now();
    let post = post_script_with(from, script, mode)?;
    timings.insert("post".to_string(), ms(start.elapsed()));
    stats.insert("post".to_string(), Stats::of(&post));

    let start = Instant::now();
    let verdict = included_with(&post, to, limits);
    timings.insert("inclusion".to_string(), ms(start.elapsed()));

    let mut report = CheckReport {
        verdict: Verdict::Conforms,
        counterexample: None,
        timings,
        stats,
        warnings,
        error: None,
    };
    match verdict {
        Ok(v) if v.holds => Ok((report, None)),
        Ok(v) => {
            let t = v
                .counterexample
                .ok_or_else(|| CliError::Internal("violation without a counterexample".into()))?;
            if !post.accepts(&t) || to.accepts(&t) {
                return Err(CliError::Internal(format!("counterexample {t} failed re-verification")));
            }
            report.verdict = Verdict::Violates;
            report.counterexample = Some(t.to_string());
            Ok((report, Some(t)))
        }
        Err(e @ (Error::StateBudgetExceeded { .. } | Error::DeadlineExceeded)) => {
            report.verdict = Verdict::ResourceLimit;
            report.error = Some(e.to_string());
            Ok((report, None))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_check(io: &mut Io, args: CheckArgs) -> CliResult<u8> {
    let total = Instant::now();
    let from = load_automaton(io, args.from)?;
    let to = load_automaton(io, args.to)?;
    let types = load_automaton(io, args.types)?;
    let script = load_script(args.updates, &types)?;
    let parse_time = ms(total.elapsed());

    let (mut report, counterexample) =
        check_report(&from, &to, &script, args.mode, &Limits::with_budget(args.budget))?;
    report.timings.insert("parse".to_string(), parse_time);
    report.timings.insert("total".to_string(), ms(total.elapsed()));
    if let (Some(path), Some(t)) = (args.counterexample_out, &counterexample) {
        write(path, &write_xml(t))?;
    }

    if io.json {
        io.emit_json(&report);
    } else {
        for w in report.warnings.clone() {
            io.warn(&w);
        }
        match report.verdict {
            Verdict::Conforms => io.say("conforms"),
            Verdict::Violates => {
                io.say("violates");
                io.say(&format!("counterexample: {}", report.counterexample.as_deref().unwrap_or_default()));
            }
            Verdict::ResourceLimit => {
                io.say(&format!("resource limit: {}", report.error.as_deref().unwrap_or_default()))
            }
        }
        if let Some(p) = report.stats.get("post") {
            io.say(&format!(
                "post automaton: {} states, {} rules, {} transitions; {:.1} ms total",
                p.states, p.rules, p.transitions, report.timings["total"]
            ));
        }
    }
    Ok(match report.verdict {
        Verdict::Conforms => EXIT_OK,
        Verdict::Violates => EXIT_REJECTED,
        Verdict::ResourceLimit => EXIT_RESOURCE,
    })
}

fn cmd_member(io: &mut Io, automaton: &Path, document: &Path, trace: bool) -> CliResult<u8> {
    let a = load_automaton(io, automaton)?;
    let t = load_document(io, document)?;
    let run = a.run(&t);
    let accepted = run.is_some();
    if io.json {
        let assignments: Option<Vec<(String, String)>> = run.as_ref().filter(|_| trace).map(|c| {
            c.assignments()
                .into_iter()
                .map(|(p, q)| (p.to_string(), q.to_string()))
                .collect()
        });
        io.emit_json(&serde_json::json!({
            "accepted": accepted,
            "root_state": run.as_ref().map(|c| c.state.to_string()),
            "trace": assignments,
        }));
    } else {
        match &run {
            Some(c) => {
                io.say(&format!("accepted: root state {}", c.state));
                if trace {
                    for (p, q) in c.assignments() {
                        let label = t.get(&p).map(|n| n.label().to_string()).unwrap_or_default();
                        io.say(&format!("{p}\t{label}\t{q}"));
                    }
                }
            }
            None => io.say("rejected"),
        }
    }
    Ok(if accepted { EXIT_OK } else { EXIT_REJECTED })
}

fn cmd_rewrite(
    io: &mut Io,
    types: &Path,
    updates: &Path,
    pool_bound: usize,
    max_results: usize,
    document: &Path,
) -> CliResult<u8> {
    let types = load_automaton(io, types)?;
    let script = load_script(updates, &types)?;
    let t = load_document(io, document)?;
    let results = apply_script(&t, &script, pool_bound)?;
    let mut terms: Vec<(String, Tree)> = results.into_iter().map(|r| (r.to_string(), r)).collect();
    terms.sort_by(|x, y| x.0.cmp(&y.0));
    let total = terms.len();
    terms.truncate(max_results);
    if io.json {
        let list: Vec<&str> = terms.iter().map(|(s, _)| s.as_str()).collect();
        io.emit_json(&serde_json::json!({ "total": total, "results": list }));
    } else {
        for (i, (_, r)) in terms.iter().enumerate() {
            if i > 0 {
                let _ = writeln!(io.out);
            }
            let _ = io.out.write_all(write_xml(r).as_bytes());
        }
        if total > terms.len() {
            io.warn(&format!("{} of {total} results shown", terms.len()));
        }
    }
    Ok(EXIT_OK)
}

fn cmd_enumerate(io: &mut Io, automaton: &Path, max_nodes: usize) -> CliResult<u8> {
    let a = load_automaton(io, automaton)?;
    let mut terms: Vec<String> = enumerate(&a, max_nodes).iter().map(|t| t.to_string()).collect();
    terms.sort();
    if io.json {
        io.emit_json(&terms);
    } else {
        for t in terms {
            let _ = writeln!(io.out, "{t}");
        }
    }
    Ok(EXIT_OK)
}
