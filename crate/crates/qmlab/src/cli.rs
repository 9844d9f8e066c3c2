//! Command-line parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::config::{ExperimentConfig, Format, Kind};
use crate::error::{CliError, CliResult, EXIT_CONFIG, EXIT_FAILURE, EXIT_OK};
use crate::experiments::{self, Experiment, Outcome};
use crate::table::write_table;

const COMMON: [&str; 6] = ["config", "set", "seed", "out", "format", "record-time"];

fn value_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Real => "REAL",
        Kind::Int => "INT",
        Kind::Count => "COUNT",
        Kind::Range => "MIN:MAX:STEP",
        Kind::Pair => "A B",
        Kind::Choice(_) => "CHOICE",
        Kind::Text => "TEXT",
    }
}

fn leaf(name: &'static str, e: &Experiment) -> Command {
    let mut cmd = Command::new(name).about(e.about);
    for p in e.schema {
        let mut help = format!("{} [default: {}]", p.help, p.default);
        if let Kind::Choice(opts) = p.kind {
            help.push_str(&format!(" [one of: {}]", opts.join(", ")));
        }
        let mut arg = Arg::new(p.key).long(p.key).value_name(value_name(p.kind)).help(help);
        arg = match p.kind {
            // Two values may follow the flag; only negative numbers (not
            // other flags) are taken as values.
            Kind::Pair => arg.num_args(1..=2).allow_negative_numbers(true),
            _ => arg.num_args(1).allow_hyphen_values(true),
        };
        cmd = cmd.arg(arg);
    }
    cmd.arg(Arg::new("config").long("config").value_name("FILE").help("key = value config file"))
        .arg(
            Arg::new("set")
                .long("set")
                .value_name("KEY=VALUE")
                .action(ArgAction::Append)
                .allow_hyphen_values(true)
                .help("override one config entry (repeatable)"),
        )
        .arg(Arg::new("seed").long("seed").value_name("U64").help("RNG seed [default: 0]"))
        .arg(Arg::new("out").long("out").value_name("PATH").help(
            "primary output file (secondary tables go next to it as <stem>_<name>.<ext>); standard output if absent",
        ))
        .arg(Arg::new("format").long("format").value_name("csv|json").help("output format [default: from --out extension]"))
        .arg(
            Arg::new("record-time")
                .long("record-time")
                .action(ArgAction::SetTrue)
                .help("store the wall time in the metadata (outputs then differ between runs)"),
        )
}

/// The full command tree.
pub fn command() -> Command {
    let mut root = Command::new("qmlab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Numerical quantum-mechanics experiments: spins, grids, condensates, path integrals")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help("Environment: QMLAB_THREADS caps the number of worker threads.");
    let mut groups: Vec<(&'static str, Command)> = Vec::new();
    for e in experiments::all() {
        match e.path {
            [name] => root = root.subcommand(leaf(name, e)),
            [group, name] => {
                let sub = leaf(name, e);
                match groups.iter_mut().find(|(g, _)| g == group) {
                    Some((_, cmd)) => *cmd = cmd.clone().subcommand(sub),
                    None => groups.push((group, Command::new(*group).subcommand_required(true).subcommand(sub))),
                }
            }
            _ => unreachable!("experiment paths have one or two parts"),
        }
    }
    for (group, cmd) in groups {
        let about = format!("{group} variants");
        root = root.subcommand(cmd.about(about));
    }
    root
}

/// Resolves the configuration of a leaf subcommand from its matches.
pub fn resolve(e: &Experiment, m: &ArgMatches) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults(&e.name(), e.schema)?;
    if let Some(path) = m.get_one::<String>("config") {
        let text = std::fs::read_to_string(path)
            .map_err(|err| CliError::config(format!("cannot read config file {path}: {err}")))?;
        cfg.apply_file_text(e.schema, &text)?;
    }
    if let Some(sets) = m.get_many::<String>("set") {
        for s in sets {
            cfg.apply_override(e.schema, s)?;
        }
    }
    for p in e.schema {
        if let Some(vals) = m.get_many::<String>(p.key) {
            let joined: Vec<&str> = vals.map(String::as_str).collect();
            cfg.set(e.schema, p.key, &joined.join(","))?;
        }
    }
    for key in ["seed", "out", "format"] {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(e.schema, key, v)?;
        }
    }
    cfg.record_time = m.get_flag("record-time");
    Ok(cfg)
}

/// Path of a secondary table next to the primary output.
pub fn secondary_path(primary: &Path, suffix: &str, format: Format) -> PathBuf {
    let stem = primary.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    primary.with_file_name(format!("{stem}_{suffix}.{}", format.extension()))
}

/// Runs an experiment and writes its tables; returns the summary line.
pub fn execute(e: &Experiment, cfg: &ExperimentConfig) -> CliResult<String> {
    let start = Instant::now();
    let Outcome { mut outputs, summary } = (e.run)(cfg)?;
    if cfg.record_time {
        let secs = start.elapsed().as_secs_f64();
        for o in &mut outputs {
            o.table.metadata.wall_time_s = Some(secs);
        }
    }
    match &cfg.output {
        Some(path) => {
            let primary_format = cfg.format.unwrap_or_else(|| Format::from_path(path));
            let mut written = Vec::new();
            for o in &outputs {
                let (p, fmt) = match o.suffix {
                    None => (path.clone(), primary_format),
                    Some(s) => {
                        let fmt = o.format.unwrap_or(primary_format);
                        (secondary_path(path, s, fmt), fmt)
                    }
                };
                write_table(&o.table, &p, fmt)?;
                written.push(p.display().to_string());
            }
            Ok(format!("{summary} -> {}", written.join(", ")))
        }
        None => {
            let text = outputs[0].table.render(cfg.format.unwrap_or(Format::Csv))?;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })?;
            Ok(summary)
        }
    }
}

fn leaf_matches<'a>(m: &'a ArgMatches) -> (Vec<&'a str>, &'a ArgMatches) {
    let mut path = Vec::new();
    let mut cur = m;
    while let Some((name, sub)) = cur.subcommand() {
        path.push(name);
        cur = sub;
    }
    (path, cur)
}

/// Parses `argv` (program name first), runs the experiment and returns the
/// process exit code: 0 on success, 2 on a configuration error, 3 when a
/// numerical method does not converge, 1 otherwise.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            // Printing only fails when the terminal is gone.
            let _ = err.print();
            return code;
        }
    };
    let (path, leaf) = leaf_matches(&matches);
    let Some(e) = experiments::find(&path.join(" ")) else {
        eprintln!("qmlab: unknown experiment '{}'", path.join(" "));
        return EXIT_CONFIG;
    };
    debug_assert!(COMMON.iter().all(|c| e.schema.iter().all(|p| p.key != *c)));
    let result = resolve(e, leaf).and_then(|cfg| {
        let to_stdout = cfg.output.is_none();
        execute(e, &cfg).map(|s| (s, to_stdout))
    });
    match result {
        Ok((summary, to_stdout)) => {
            if to_stdout {
                eprintln!("{summary}");
            } else {
                println!("{summary}");
            }
            EXIT_OK
        }
        Err(err) => {
            eprintln!("qmlab: {err}");
            let code = err.exit_code();
            if code == EXIT_FAILURE {
                eprintln!("qmlab: run failed");
            }
            code
        }
    }
}
