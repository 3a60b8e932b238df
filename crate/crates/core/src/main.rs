use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use traintrack::cli::{exit_code, format_json, format_text, parse_word, run, Format, RunConfig};
use traintrack::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

/// Decide whether a product of Dehn twists on a once-punctured surface is
/// pseudo-Anosov, reducible or of growth one.
#[derive(Debug, Parser)]
#[command(name = "traintrack", version)]
struct Args {
    /// Genus of the surface.
    #[arg(long)]
    genus: usize,
    /// Twist word, e.g. "a1 c0 d0 -d1" or "a1^-1 d0". The rightmost letter acts first.
    #[arg(long, allow_hyphen_values = true)]
    word: String,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Write a picture of the train track to this file (pseudo-Anosov classes only).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Tolerance for deciding growth > 1.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Cap on fold rounds.
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    /// Accept genus 1.
    #[arg(long)]
    allow_low_genus: bool,
    /// Print the move trace.
    #[arg(long)]
    trace: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match go(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn go(args: &Args) -> Result<(), Error> {
    let word = parse_word(&args.word)?;
    let config = RunConfig {
        genus: args.genus,
        word,
        svg: args.svg.is_some(),
        format: match args.format {
            OutputFormat::Text => Format::Text,
            OutputFormat::Json => Format::Json,
        },
        tol: args.tol,
        max_steps: args.max_steps,
        allow_low_genus: args.allow_low_genus,
    };
    let out = run(&config)?;
    match config.format {
        Format::Text => print!("{}", format_text(&out.report, args.trace)),
        Format::Json => println!("{}", format_json(&out.report)),
    }
    if let (Some(path), Some(svg)) = (&args.svg, &out.svg) {
        std::fs::write(path, svg)
            .map_err(|e| Error::Layout(format!("cannot write {}: {e}", path.display())))?;
    } else if args.svg.is_some() {
        eprintln!("note: no picture for a {} class", out.report.verdict);
    }
    Ok(())
}
