//! Word parsing and the end-to-end pipeline behind the command-line tool.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{full_report, HalfInteger, SingularityReport, Verdict};
use crate::bh::{bestvina_handel, BhConfig, MoveRecord};
use crate::error::{Error, Result};
use crate::graph::EmbeddedGraph;
use crate::twist::{compose_word, Family, TwistLetter, TwistWord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub genus: usize,
    pub word: TwistWord,
    pub svg: bool,
    pub format: Format,
    pub tol: f64,
    pub max_steps: usize,
    pub allow_low_genus: bool,
}

impl RunConfig {
    pub fn new(genus: usize, word: TwistWord) -> Self {
        Self {
            genus,
            word,
            svg: false,
            format: Format::Text,
            tol: 1e-9,
            max_steps: crate::bh::DEFAULT_MAX_ROUNDS,
            allow_low_genus: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.genus < 2 && !(self.allow_low_genus && self.genus == 1) {
            return Err(Error::Genus(format!(
                "genus {} is below 2 (use --allow-low-genus for the torus)",
                self.genus
            )));
        }
        if !(self.tol > 0.0 && self.tol < 1e-3) {
            return Err(Error::Parse(format!(
                "tolerance {} must lie in (0, 1e-3)",
                self.tol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Parse("max-steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonEntry {
    pub label: usize,
    pub k: usize,
    pub index: HalfInteger,
    pub orbit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub rho: String,
}

impl GraphSummary {
    fn of(g: &EmbeddedGraph) -> Self {
        let rho = g
            .rho()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        Self {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            rho,
        }
    }
}

/// Wall-clock milliseconds per pipeline stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub compose_ms: f64,
    pub train_track_ms: f64,
    pub analysis_ms: f64,
    pub layout_ms: f64,
}

/// Everything `run` reports. `growth` is rounded to six decimals and absent
/// for reducible classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub genus: usize,
    pub word: String,
    pub verdict: Verdict,
    pub growth: Option<f64>,
    pub polygons: Vec<PolygonEntry>,
    pub puncture_index: Option<HalfInteger>,
    pub orbit_permutation: Vec<usize>,
    pub moves: Vec<MoveRecord>,
    pub graph: GraphSummary,
    pub timings: Timings,
}

/// Report plus the optional picture.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub report: RunReport,
    pub singularities: SingularityReport,
    pub svg: Option<String>,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Twist word to train track, singularity data and, if asked, an SVG.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut timings = Timings::default();
    let t = Instant::now();
    let f = compose_word(config.genus, &config.word, config.allow_low_genus)?;
    timings.compose_ms = ms(t);

    let t = Instant::now();
    let bh = BhConfig {
        max_rounds: config.max_steps,
        ..BhConfig::default()
    };
    let bh_run = bestvina_handel(&f, bh)?;
    timings.train_track_ms = ms(t);

    let t = Instant::now();
    let singularities = full_report(&bh_run.outcome, config.genus as u32, config.tol)?;
    timings.analysis_ms = ms(t);

    let svg = if config.svg && singularities.verdict == Verdict::PseudoAnosov {
        let t = Instant::now();
        let svg = crate::hyplayout::render(bh_run.outcome.map(), &singularities)?;
        timings.layout_ms = ms(t);
        Some(svg)
    } else {
        None
    };

    let polygons = singularities
        .polygons
        .iter()
        .map(|p| PolygonEntry {
            label: p.label,
            k: p.k,
            index: p.index,
            orbit: p.orbit,
        })
        .collect();
    let report = RunReport {
        genus: config.genus,
        word: config.word.to_string(),
        verdict: singularities.verdict,
        growth: match singularities.verdict {
            Verdict::Reducible => None,
            _ => singularities.lambda.map(round6),
        },
        polygons,
        puncture_index: singularities.puncture_index,
        orbit_permutation: singularities.orbit_permutation.clone(),
        moves: bh_run.moves,
        graph: GraphSummary::of(bh_run.outcome.map().graph()),
        timings,
    };
    Ok(RunOutput {
        report,
        singularities,
        svg,
    })
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Human-readable summary; the move trace is included when `trace` is set.
pub fn format_text(r: &RunReport, trace: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "genus {}  word {}",
        r.genus,
        if r.word.is_empty() {
            "(identity)"
        } else {
            &r.word
        }
    );
    let _ = writeln!(s, "verdict: {}", r.verdict);
    if let Some(g) = r.growth {
        let _ = writeln!(s, "growth: {g:.6}");
    }
    if r.verdict == Verdict::PseudoAnosov {
        let _ = writeln!(
            s,
            "train track: {} vertices, {} edges, rho = {}",
            r.graph.vertices, r.graph.edges, r.graph.rho
        );
        if r.polygons.is_empty() {
            let _ = writeln!(s, "interior singularities: none");
        }
        for p in &r.polygons {
            let _ = writeln!(
                s,
                "polygon {}: k = {}, index {}, orbit of {}",
                p.label, p.k, p.index, p.orbit
            );
        }
        if let Some(i) = r.puncture_index {
            let _ = writeln!(s, "puncture index: {i}");
        }
    }
    if trace {
        let _ = writeln!(s, "moves:");
        for m in &r.moves {
            let _ = writeln!(s, "  {m}");
        }
    }
    s
}

pub fn format_json(r: &RunReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}

/// Process exit code for an error: 2 input, 3 iteration cap, 4 packing or
/// layout, 5 internal.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Genus(_) | Error::UnknownGenerator(_) => 2,
        Error::IterationCap { .. } => 3,
        Error::Packing(_) | Error::Layout(_) => 4,
        _ => 5,
    }
}

/// Parses whitespace-separated letters `a1`, `-a1` or `a1^-1`.
pub fn parse_word(s: &str) -> Result<TwistWord> {
    s.split_whitespace()
        .map(parse_letter)
        .collect::<Result<Vec<_>>>()
        .map(TwistWord::new)
}

fn parse_letter(token: &str) -> Result<TwistLetter> {
    let bad = |why: &str| Error::Parse(format!("`{token}`: {why}"));
    let (body, mut exponent) = match token.strip_prefix('-') {
        Some(rest) => (rest, -1i8),
        None => (token, 1i8),
    };
    let body = match body.split_once('^') {
        Some((name, exp)) => {
            match exp {
                "-1" => exponent = -exponent,
                "1" | "+1" => {}
                _ => return Err(bad("exponent must be 1 or -1")),
            }
            name
        }
        None => body,
    };
    let mut chars = body.chars();
    let family = match chars.next() {
        Some('a') => Family::A,
        Some('c') => Family::C,
        Some('d') => Family::D,
        _ => return Err(bad("generator must start with a, c or d")),
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad("missing generator index"));
    }
    let index = digits.parse().map_err(|_| bad("index out of range"))?;
    Ok(TwistLetter {
        family,
        index,
        exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letter(family: Family, index: usize, exponent: i8) -> TwistLetter {
        TwistLetter {
            family,
            index,
            exponent,
        }
    }

    #[test]
    fn parses_plain_and_inverse_letters() {
        let w = parse_word("-a1 d1 c0^-1 d0").unwrap();
        assert_eq!(
            w.letters,
            vec![
                letter(Family::A, 1, -1),
                letter(Family::D, 1, 1),
                letter(Family::C, 0, -1),
                letter(Family::D, 0, 1)
            ]
        );
        assert_eq!(w.to_string(), "-a1 d1 -c0 d0");
    }

    #[test]
    fn empty_word() {
        assert!(parse_word("  ").unwrap().letters.is_empty());
    }

    #[test]
    fn rejects_malformed_tokens() {
        for s in ["b1", "a", "a1^2", "a-1", "--a1x", "a1^"] {
            assert!(parse_word(s).is_err(), "{s}");
        }
    }
}
