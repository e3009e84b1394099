//! Reader for the subset of the MATPOWER `.m` case format used here:
//! `mpc.baseMVA`, `mpc.bus`, `mpc.gen` and `mpc.branch`. Other matrices and
//! cell arrays are skipped. AC-only columns are read past and ignored.

use thiserror::Error;

use super::{Bus, BusId, Generator, Line, LineId, Load, Network, DEFAULT_ANGLE_DIFF_MAX};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, field {field}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError {
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}

struct Row {
    line: usize,
    values: Vec<f64>,
}

#[derive(Default)]
struct RawCase {
    base_mva: Option<(usize, f64)>,
    bus: Option<Vec<Row>>,
    gen: Option<Vec<Row>>,
    branch: Option<Vec<Row>>,
}

fn strip_comment(s: &str) -> &str {
    match s.find('%') {
        Some(i) => &s[..i],
        None => s,
    }
}

fn parse_row(text: &str, line: usize, table: &str) -> Result<Option<Row>, ParseError> {
    let mut values = Vec::new();
    for (col, tok) in text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .enumerate()
    {
        let v = tok.parse::<f64>().map_err(|_| {
            ParseError::new(
                line,
                format!("{table}[{}]", col + 1),
                format!("not a number: {tok:?}"),
            )
        })?;
        values.push(v);
    }
    Ok((!values.is_empty()).then_some(Row { line, values }))
}

fn scan(text: &str) -> Result<RawCase, ParseError> {
    let mut raw = RawCase::default();
    // (table name, rows, line where the matrix opened)
    let mut open: Option<(String, Vec<Row>, usize)> = None;
    let mut in_cell = false;

    for (idx, full) in text.lines().enumerate() {
        let lineno = idx + 1;
        let mut rest = strip_comment(full).trim();
        if in_cell {
            if rest.contains('}') {
                in_cell = false;
            }
            continue;
        }
        if open.is_none() {
            if rest.is_empty() || rest.starts_with("function") {
                continue;
            }
            let Some((lhs, rhs)) = rest.split_once('=') else {
                continue;
            };
            let name = lhs.trim();
            let rhs = rhs.trim();
            let Some(field) = name.strip_prefix("mpc.") else {
                continue;
            };
            if let Some(body) = rhs.strip_prefix('[') {
                open = Some((field.to_string(), Vec::new(), lineno));
                rest = body;
            } else if rhs.starts_with('{') {
                in_cell = !rhs.contains('}');
                continue;
            } else {
                if field == "baseMVA" {
                    let v = rhs.trim_end_matches(';').trim();
                    let base = v.parse::<f64>().map_err(|_| {
                        ParseError::new(lineno, "baseMVA", format!("not a number: {v:?}"))
                    })?;
                    raw.base_mva = Some((lineno, base));
                }
                continue;
            }
        }

        let (name, rows, _) = open.as_mut().expect("matrix open");
        let (body, closes) = match rest.find(']') {
            Some(i) => (&rest[..i], true),
            None => (rest, false),
        };
        for chunk in body.split(';') {
            if let Some(row) = parse_row(chunk, lineno, name)? {
                rows.push(row);
            }
        }
        if closes {
            let (name, rows, _) = open.take().expect("matrix open");
            match name.as_str() {
                "bus" => raw.bus = Some(rows),
                "gen" => raw.gen = Some(rows),
                "branch" => raw.branch = Some(rows),
                _ => {}
            }
        }
    }
    if let Some((name, _, start)) = open {
        return Err(ParseError::new(
            start,
            name,
            "matrix is never closed with ']'",
        ));
    }
    Ok(raw)
}

fn need(row: &Row, table: &str, min_cols: usize) -> Result<(), ParseError> {
    if row.values.len() < min_cols {
        return Err(ParseError::new(
            row.line,
            table,
            format!(
                "expected at least {min_cols} columns, found {}",
                row.values.len()
            ),
        ));
    }
    Ok(())
}

fn as_id(row: &Row, col: usize, table: &str, field: &str) -> Result<u32, ParseError> {
    let v = row.values[col];
    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
        return Err(ParseError::new(
            row.line,
            format!("{table}.{field}"),
            format!("not a valid bus number: {v}"),
        ));
    }
    Ok(v as u32)
}

/// Angle-difference limit from MATPOWER `angmin`/`angmax` (degrees). Missing,
/// zero or ±360 values mean "unconstrained" and map to the 30° default.
fn angle_limit(angmin: Option<f64>, angmax: Option<f64>) -> f64 {
    match (angmin, angmax) {
        (Some(lo), Some(hi)) if lo < 0.0 && lo > -360.0 && hi > 0.0 && hi < 360.0 => {
            (-lo).min(hi).to_radians()
        }
        _ => DEFAULT_ANGLE_DIFF_MAX,
    }
}

/// Parses MATPOWER case text into a per-unit [`Network`].
///
/// Branch and generator ids are their 1-based row numbers in the file, so ids
/// stay stable when out-of-service rows (status 0) are dropped. One load is
/// created per bus with positive `Pd`; a negative `Pd` becomes a generator
/// with that capacity.
pub fn parse_case(text: &str) -> Result<Network, ParseError> {
    let raw = scan(text)?;
    let (_, base_mva) = raw
        .base_mva
        .ok_or_else(|| ParseError::new(0, "baseMVA", "missing mpc.baseMVA"))?;
    if !(base_mva > 0.0) {
        return Err(ParseError::new(
            raw.base_mva.map_or(0, |(l, _)| l),
            "baseMVA",
            "must be positive",
        ));
    }
    let bus_rows = raw
        .bus
        .ok_or_else(|| ParseError::new(0, "bus", "missing mpc.bus"))?;
    let gen_rows = raw
        .gen
        .ok_or_else(|| ParseError::new(0, "gen", "missing mpc.gen"))?;
    let branch_rows = raw
        .branch
        .ok_or_else(|| ParseError::new(0, "branch", "missing mpc.branch"))?;

    let mut buses = Vec::with_capacity(bus_rows.len());
    let mut loads = Vec::new();
    let mut injections = Vec::new();
    for row in &bus_rows {
        need(row, "bus", 3)?;
        let id = as_id(row, 0, "bus", "bus_i")?;
        if buses.iter().any(|b: &Bus| b.id.0 == id) {
            return Err(ParseError::new(row.line, "bus.bus_i", format!("duplicate bus {id}")));
        }
        buses.push(Bus {
            id: BusId(id),
            name: id.to_string(),
        });
        let pd = row.values[2] / base_mva;
        if pd > 0.0 {
            loads.push(Load {
                id: loads.len() as u32 + 1,
                bus: BusId(id),
                p_demand: pd,
            });
        } else if pd < 0.0 {
            injections.push((BusId(id), -pd));
        }
    }
    let known = |row: &Row, col: usize, table: &str, field: &str| -> Result<BusId, ParseError> {
        let id = as_id(row, col, table, field)?;
        if buses.iter().any(|b| b.id.0 == id) {
            Ok(BusId(id))
        } else {
            Err(ParseError::new(
                row.line,
                format!("{table}.{field}"),
                format!("unknown bus {id}"),
            ))
        }
    };

    let mut generators = Vec::new();
    for (i, row) in gen_rows.iter().enumerate() {
        need(row, "gen", 9)?;
        let bus = known(row, 0, "gen", "bus")?;
        if row.values[7] <= 0.0 {
            continue;
        }
        let pmax = row.values[8];
        if !(pmax >= 0.0) {
            return Err(ParseError::new(row.line, "gen.Pmax", "must be non-negative"));
        }
        generators.push(Generator {
            id: i as u32 + 1,
            bus,
            p_max: pmax / base_mva,
        });
    }
    for (k, (bus, p)) in injections.into_iter().enumerate() {
        generators.push(Generator {
            id: (gen_rows.len() + k) as u32 + 1,
            bus,
            p_max: p,
        });
    }

    let mut lines = Vec::new();
    for (i, row) in branch_rows.iter().enumerate() {
        need(row, "branch", 4)?;
        let from_bus = known(row, 0, "branch", "fbus")?;
        let to_bus = known(row, 1, "branch", "tbus")?;
        let status = row.values.get(10).copied().unwrap_or(1.0);
        if status <= 0.0 {
            continue;
        }
        let x = row.values[3];
        if x == 0.0 {
            return Err(ParseError::new(row.line, "branch.x", "zero reactance"));
        }
        if from_bus == to_bus {
            return Err(ParseError::new(
                row.line,
                "branch.tbus",
                "branch connects a bus to itself",
            ));
        }
        let b = -1.0 / x;
        let angle_diff_max = angle_limit(row.values.get(11).copied(), row.values.get(12).copied());
        let rate_a = row.values.get(5).copied().unwrap_or(0.0);
        if rate_a < 0.0 {
            return Err(ParseError::new(row.line, "branch.rateA", "must be non-negative"));
        }
        // rateA = 0 means unrated; the angle limit is then the only flow bound.
        let thermal_limit = if rate_a == 0.0 {
            b.abs() * angle_diff_max
        } else {
            rate_a / base_mva
        };
        lines.push(Line {
            id: LineId(i as u32 + 1),
            from_bus,
            to_bus,
            susceptance_b: b,
            thermal_limit,
            angle_diff_max,
        });
    }

    Network::new(base_mva, buses, lines, generators, loads)
        .map_err(|e| ParseError::new(0, "network", e.to_string()))
}
