use std::io::{Read, Write};

use super::{EpisodeSummary, WindowRecord};
use crate::error::{Error, Result};

fn header(players: usize, reservoirs: usize) -> Vec<String> {
    let mut h: Vec<String> = ["episode", "eval", "window", "time"].map(String::from).to_vec();
    h.extend((1..=players).map(|i| format!("action_{i}")));
    h.extend((1..=reservoirs).map(|i| format!("fill_{i}")));
    h.extend((1..=players).map(|i| format!("power_{i}")));
    h.extend((1..=players).map(|i| format!("utility_{i}")));
    h.extend(["potential", "requested", "delivered", "spilled"].map(String::from));
    h
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Trace { line, reason: e.to_string() }
}

/// Writes window records as CSV. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_trace_csv<W: Write>(out: W, records: &[WindowRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let (players, reservoirs) = records.first().map_or((0, 0), |r| (r.actions.len(), r.fills.len()));
    w.write_record(header(players, reservoirs)).map_err(csv_err)?;
    for r in records {
        if r.actions.len() != players || r.fills.len() != reservoirs {
            return Err(Error::Trace { line: 0, reason: "records disagree on column counts".into() });
        }
        let mut row = vec![r.episode.to_string(), r.eval.to_string(), r.window.to_string(), r.time.to_string()];
        for v in r.actions.iter().chain(&r.fills).chain(&r.power).chain(&r.utilities) {
            row.push(v.to_string());
        }
        for v in [r.potential, r.requested, r.delivered, r.spilled] {
            row.push(v.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<WindowRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let head = rd.headers().map_err(csv_err)?.clone();
    let count = |prefix: &str| head.iter().filter(|h| h.starts_with(prefix)).count();
    let (players, reservoirs) = (count("action_"), count("fill_"));
    let expected = header(players, reservoirs);
    if head.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Trace { line: 1, reason: "unexpected header".into() });
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |col: usize, what: &str| Error::Trace {
            line,
            reason: format!("column {} ({}): cannot parse {what:?}", col + 1, expected[col]),
        };
        let f = |col: usize| -> Result<f64> {
            let s = &rec[col];
            s.parse::<f64>().map_err(|_| bad(col, s))
        };
        let u = |col: usize| -> Result<usize> {
            let s = &rec[col];
            s.parse::<usize>().map_err(|_| bad(col, s))
        };
        let span = |start: usize, n: usize| -> Result<Vec<f64>> { (start..start + n).map(f).collect() };
        let eval = match &rec[1] {
            "true" => true,
            "false" => false,
            s => return Err(bad(1, s)),
        };
        let mut c = 4;
        let actions = span(c, players)?;
        c += players;
        let fills = span(c, reservoirs)?;
        c += reservoirs;
        let power = span(c, players)?;
        c += players;
        let utilities = span(c, players)?;
        c += players;
        out.push(WindowRecord {
            episode: u(0)?,
            eval,
            window: u(2)?,
            time: f(3)?,
            actions,
            fills,
            power,
            utilities,
            potential: f(c)?,
            requested: f(c + 1)?,
            delivered: f(c + 2)?,
            spilled: f(c + 3)?,
        });
    }
    Ok(out)
}

pub fn write_summaries_jsonl<W: Write>(mut out: W, summaries: &[EpisodeSummary]) -> Result<()> {
    for s in summaries {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
