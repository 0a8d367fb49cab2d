//! Command-line driver: model document in, Pareto approximation out.
//!
//! Exit codes: 0 when the approximation converged, 2 when it stopped early
//! (the output is still written), 1 on usage, input or model errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use mopareto::{
    approximate_pareto, emit_csv, emit_json, emit_tikz, normalize_objectives, parse_model_document,
    EngineConfig, ExportBundle, SolverConfig, Status, TikzStyle,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tikz,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "mopareto", version, about = "Approximate the Pareto curve of a multi-objective MDP")]
pub struct Args {
    /// Model document (.momdp.json).
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Target distance between the under- and over-approximation.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Maximum number of scalarised queries.
    #[arg(long, default_value_t = 64)]
    pub max_queries: usize,
    /// Value iteration convergence threshold.
    #[arg(long, default_value_t = mopareto::solver::DEFAULT_DELTA)]
    pub vi_delta: f64,
    /// Value iteration sweep limit.
    #[arg(long, default_value_t = mopareto::solver::DEFAULT_MAX_ITERS)]
    pub vi_max_iters: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// JSON document overriding TikZ style fields.
    #[arg(long, value_name = "PATH")]
    pub tikz_style: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs. Normal output goes
/// to `stdout` unless `--out` is given; diagnostics go to `stderr`.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(&args, stdout, stderr) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn run(args: &Args, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, String> {
    let path = args.model.display();
    let text = fs::read_to_string(&args.model).map_err(|e| format!("cannot read {path}: {e}"))?;
    let doc = parse_model_document(&text).map_err(|e| format!("{path}: {e}"))?;
    if doc.objectives.len() > 3 {
        return Err(format!(
            "{path}: objectives: {} objectives given; at most 3 are supported",
            doc.objectives.len()
        ));
    }
    let norm = normalize_objectives(&doc.model, &doc.objectives).map_err(|e| format!("{path}: {e}"))?;
    let style = match &args.tikz_style {
        Some(p) => {
            let s = fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            serde_json::from_str::<TikzStyle>(&s).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => TikzStyle::default(),
    };
    let cfg = EngineConfig {
        epsilon: args.epsilon,
        max_queries: args.max_queries,
        solver: SolverConfig {
            delta: args.vi_delta,
            max_iters: args.vi_max_iters,
        },
        ..EngineConfig::default()
    };
    let approx = approximate_pareto(&norm, &cfg).map_err(|e| format!("{path}: {e}"))?;
    let status = approx.status;
    let gap = approx.gap;
    let bundle = ExportBundle::new(approx, &norm);
    let rendered = match args.format {
        Format::Tikz => emit_tikz(&bundle, &style),
        Format::Json => emit_json(&bundle),
        Format::Csv => emit_csv(&bundle),
    }
    .map_err(|e| e.to_string())?;

    match &args.out {
        Some(p) => fs::write(p, &rendered).map_err(|e| format!("cannot write {}: {e}", p.display()))?,
        None => stdout.write_all(rendered.as_bytes()).map_err(|e| format!("cannot write output: {e}"))?,
    }
    if status == Status::Converged {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(stderr, "warning: stopped with status {} (gap {gap})", status.as_str());
        Ok(EXIT_PARTIAL)
    }
}
