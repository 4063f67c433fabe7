//! Game documents, random games and trace files.
//!
//! A game document is a JSON object:
//!
//! ```json
//! { "name": "matching pennies",
//!   "players": 2,
//!   "actions": [2, 2],
//!   "payoffs": [[1, -1, -1, 1], [-1, 1, 1, -1]] }
//! ```
//!
//! `payoffs[i]` is player `i`'s table, row-major over action profiles with
//! the last player's action varying fastest.
//!
//! Traces (constructed paths or simulated trajectories) are written either as
//! JSON mirroring [`SatisficingPath`] / [`Trajectory`], or as CSV with one row
//! per (step, player, action).

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, StrategyProfile};
use crate::sampling::rng_from_seed;
use crate::satisficing::{SatisficingPath, StepKind};

pub const CSV_HEADER: [&str; 7] = [
    "step",
    "step_kind",
    "player",
    "action",
    "probability",
    "gap",
    "satisfied",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub players: usize,
    pub actions: Vec<usize>,
    pub payoffs: Vec<Vec<f64>>,
}

impl GameDocument {
    pub fn from_game(game: &Game, name: Option<String>) -> Self {
        GameDocument {
            name,
            players: game.num_players(),
            actions: game.action_counts().to_vec(),
            payoffs: game.all_payoffs().to_vec(),
        }
    }

    pub fn into_game(self) -> Result<Game> {
        Game::new(self.actions, self.payoffs)
    }
}

fn as_count(v: &Value, key: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::parse(key, "expected a nonnegative integer"))
}

/// Parses and validates a game document, naming the offending key on error.
pub fn parse_game(text: &str) -> Result<Game> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::parse("<root>", e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::parse("<root>", "expected a JSON object"))?;
    if let Some(name) = obj.get("name") {
        if !name.is_string() {
            return Err(Error::parse("name", "expected a string"));
        }
    }
    let players = as_count(obj.get("players").ok_or_else(|| Error::parse("players", "missing"))?, "players")?;
    if players == 0 {
        return Err(Error::parse("players", "must be at least 1"));
    }
    let actions_v = obj
        .get("actions")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("actions", "expected an array"))?;
    if actions_v.len() != players {
        return Err(Error::parse(
            "actions",
            format!("has {} entries, expected {players}", actions_v.len()),
        ));
    }
    let mut actions = Vec::with_capacity(players);
    for (i, a) in actions_v.iter().enumerate() {
        let key = format!("actions[{i}]");
        let k = as_count(a, &key)?;
        if k == 0 {
            return Err(Error::parse(key, "must be at least 1"));
        }
        actions.push(k);
    }
    let size: usize = actions.iter().product();
    let payoffs_v = obj
        .get("payoffs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("payoffs", "expected an array"))?;
    if payoffs_v.len() != players {
        return Err(Error::parse(
            "payoffs",
            format!("has {} arrays, expected {players}", payoffs_v.len()),
        ));
    }
    let mut payoffs = Vec::with_capacity(players);
    for (i, p) in payoffs_v.iter().enumerate() {
        let key = format!("payoffs[{i}]");
        let arr = p.as_array().ok_or_else(|| Error::parse(&key, "expected an array"))?;
        if arr.len() != size {
            return Err(Error::parse(
                &key,
                format!("has length {}, expected {size}", arr.len()),
            ));
        }
        let mut row = Vec::with_capacity(size);
        for (j, v) in arr.iter().enumerate() {
            let x = v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(format!("{key}[{j}]"), "expected a finite number"))?;
            row.push(x);
        }
        payoffs.push(row);
    }
    Game::new(actions, payoffs).map_err(|e| Error::parse("<root>", e.to_string()))
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| Error::io(path, e))?;
    Ok(s)
}

pub fn load_game(path: &Path) -> Result<Game> {
    parse_game(&read_to_string(path)?)
}

pub fn game_to_json(game: &Game, name: Option<&str>) -> String {
    let doc = GameDocument::from_game(game, name.map(str::to_owned));
    let mut s = serde_json::to_string_pretty(&doc).expect("game documents serialize");
    s.push('\n');
    s
}

pub fn save_game(game: &Game, path: &Path) -> Result<()> {
    std::fs::write(path, game_to_json(game, None)).map_err(|e| Error::io(path, e))
}

/// Payoffs i.i.d. uniform on `[-1, 1]`, player by player in table order.
pub fn generate_random_game(n: usize, action_counts: &[usize], seed: u64) -> Result<Game> {
    if action_counts.len() != n {
        return Err(Error::invalid(format!(
            "{} action counts given for {n} players",
            action_counts.len()
        )));
    }
    // Validate limits before allocating.
    Game::new(
        action_counts.to_vec(),
        vec![vec![0.0; action_counts.iter().product()]; n],
    )?;
    let mut rng = rng_from_seed(seed);
    let size: usize = action_counts.iter().product();
    let payoffs = (0..n)
        .map(|_| (0..size).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    Game::new(action_counts.to_vec(), payoffs)
}

/// Parses a profile given as a JSON array of probability arrays.
pub fn parse_profile(game: &Game, text: &str) -> Result<StrategyProfile> {
    let raw: Vec<Vec<f64>> = serde_json::from_str(text).map_err(|e| Error::parse("profile", e.to_string()))?;
    let mut out = Vec::with_capacity(raw.len());
    for (i, s) in raw.into_iter().enumerate() {
        out.push(MixedStrategy::new(s).map_err(|e| Error::parse(format!("profile[{i}]"), e.to_string()))?);
    }
    let p = StrategyProfile::new(out);
    game.check_profile(&p)
        .map_err(|e| Error::parse("profile", e.to_string()))?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A constructed path or a simulated trajectory.
#[derive(Debug, Clone, Copy)]
pub enum Trace<'a> {
    Path(&'a SatisficingPath),
    Trajectory(&'a Trajectory),
}

/// JSON envelope for trace files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceDocument {
    SatisficingPath(SatisficingPath),
    Trajectory(Trajectory),
}

/// Profiles and per-step metadata recovered from a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrace {
    pub step_kinds: Vec<StepKind>,
    pub profiles: Vec<StrategyProfile>,
    pub gaps: Vec<Vec<f64>>,
    /// Present for JSON traces only.
    pub epsilon: Option<f64>,
}

impl ParsedTrace {
    pub fn is_trajectory(&self) -> bool {
        self.step_kinds.contains(&StepKind::Simulated)
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

type Row<'a> = (StepKind, &'a StrategyProfile, &'a [f64], &'a [usize]);

fn rows(trace: Trace<'_>) -> Result<Vec<Row<'_>>> {
    let out: Vec<_> = match trace {
        Trace::Path(p) => p
            .steps
            .iter()
            .map(|s| (s.step_kind, &s.profile, s.report.gaps.as_slice(), s.report.satisfied.as_slice()))
            .collect(),
        Trace::Trajectory(t) => t
            .profiles
            .iter()
            .zip(&t.reports)
            .enumerate()
            .map(|(k, (p, r))| {
                let kind = if k == 0 { StepKind::Initial } else { StepKind::Simulated };
                (kind, p, r.gaps.as_slice(), r.satisfied.as_slice())
            })
            .collect(),
    };
    if out.is_empty() {
        return Err(Error::invalid("cannot emit an empty trace"));
    }
    Ok(out)
}

/// Writes a trace to `out`. CSV floats use 17 significant digits; JSON uses
/// the shortest representation that round-trips exactly.
pub fn write_trace<W: Write>(trace: Trace<'_>, format: OutputFormat, out: W) -> Result<()> {
    let rows = rows(trace)?;
    let io_err = |e: std::io::Error| Error::io("<output>", e);
    match format {
        OutputFormat::Json => {
            let doc = match trace {
                Trace::Path(p) => TraceDocument::SatisficingPath(p.clone()),
                Trace::Trajectory(t) => TraceDocument::Trajectory(t.clone()),
            };
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| io_err(e.into()))?;
            out.write_all(b"\n").map_err(io_err)?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let csv_err = |e: csv::Error| io_err(e.into());
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for (t, (kind, profile, gaps, satisfied)) in rows.iter().enumerate() {
                for (i, s) in profile.iter().enumerate() {
                    let sat = satisfied.contains(&i);
                    for (a, p) in s.probs().iter().enumerate() {
                        w.write_record([
                            (t + 1).to_string(),
                            kind.as_str().to_string(),
                            i.to_string(),
                            a.to_string(),
                            fmt17(*p),
                            fmt17(gaps[i]),
                            sat.to_string(),
                        ])
                        .map_err(csv_err)?;
                    }
                }
            }
            w.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

/// Writes a trace to `destination`; `-` means stdout.
pub fn emit_path(trace: Trace<'_>, format: OutputFormat, destination: &Path) -> Result<()> {
    if destination == Path::new("-") {
        let stdout = std::io::stdout();
        return write_trace(trace, format, stdout.lock());
    }
    let file = File::create(destination).map_err(|e| Error::io(destination, e))?;
    let mut buf = BufWriter::new(file);
    write_trace(trace, format, &mut buf).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(destination, source),
        other => other,
    })?;
    buf.flush().map_err(|e| Error::io(destination, e))
}

fn parse_csv_trace(text: &str) -> Result<ParsedTrace> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::parse("header", e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::parse("header", "unexpected CSV columns"));
    }
    // (step, kind, player, action, probability, gap)
    let mut records: Vec<(usize, StepKind, usize, usize, f64, f64)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(format!("row {}", line + 1), e.to_string()))?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let bad = |col: &str| Error::parse(format!("row {} {col}", line + 1), "invalid value");
        let step: usize = field(0).parse().map_err(|_| bad("step"))?;
        let kind = StepKind::parse(field(1)).ok_or_else(|| bad("step_kind"))?;
        let player: usize = field(2).parse().map_err(|_| bad("player"))?;
        let action: usize = field(3).parse().map_err(|_| bad("action"))?;
        let prob: f64 = field(4).parse().map_err(|_| bad("probability"))?;
        let gap: f64 = field(5).parse().map_err(|_| bad("gap"))?;
        records.push((step, kind, player, action, prob, gap));
    }
    if records.is_empty() {
        return Err(Error::parse("rows", "trace has no rows"));
    }
    let mut trace = ParsedTrace {
        step_kinds: Vec::new(),
        profiles: Vec::new(),
        gaps: Vec::new(),
        epsilon: None,
    };
    let mut idx = 0;
    while idx < records.len() {
        let step = records[idx].0;
        if step != trace.profiles.len() + 1 {
            return Err(Error::parse(format!("row {}", idx + 1), "steps must be consecutive from 1"));
        }
        let kind = records[idx].1;
        let mut strategies: Vec<Vec<f64>> = Vec::new();
        let mut gaps: Vec<f64> = Vec::new();
        while idx < records.len() && records[idx].0 == step {
            let (_, _, player, action, prob, gap) = records[idx];
            if player == strategies.len() && action == 0 {
                strategies.push(Vec::new());
                gaps.push(gap);
            }
            if player + 1 != strategies.len() || action != strategies[player].len() {
                return Err(Error::parse(format!("row {}", idx + 1), "rows out of order"));
            }
            strategies[player].push(prob);
            idx += 1;
        }
        let mut profile = Vec::with_capacity(strategies.len());
        for (i, s) in strategies.into_iter().enumerate() {
            profile.push(
                MixedStrategy::new(s)
                    .map_err(|e| Error::parse(format!("step {step} player {i}"), e.to_string()))?,
            );
        }
        trace.step_kinds.push(kind);
        trace.profiles.push(StrategyProfile::new(profile));
        trace.gaps.push(gaps);
    }
    Ok(trace)
}

/// Reads a trace written by [`emit_path`] in either format.
pub fn parse_trace(text: &str) -> Result<ParsedTrace> {
    if text.trim_start().starts_with('{') {
        let doc: TraceDocument = serde_json::from_str(text).map_err(|e| Error::parse("trace", e.to_string()))?;
        Ok(match doc {
            TraceDocument::SatisficingPath(p) => ParsedTrace {
                step_kinds: p.steps.iter().map(|s| s.step_kind).collect(),
                gaps: p.steps.iter().map(|s| s.report.gaps.clone()).collect(),
                profiles: p.profiles(),
                epsilon: Some(p.epsilon),
            },
            TraceDocument::Trajectory(t) => {
                if t.profiles.is_empty() {
                    return Err(Error::parse("profiles", "trajectory is empty"));
                }
                ParsedTrace {
                    step_kinds: (0..t.profiles.len())
                        .map(|k| if k == 0 { StepKind::Initial } else { StepKind::Simulated })
                        .collect(),
                    gaps: t.reports.iter().map(|r| r.gaps.clone()).collect(),
                    profiles: t.profiles,
                    epsilon: Some(t.epsilon),
                }
            }
        })
    } else {
        parse_csv_trace(text)
    }
}

pub fn load_trace(path: &Path) -> Result<ParsedTrace> {
    parse_trace(&read_to_string(path)?)
}
