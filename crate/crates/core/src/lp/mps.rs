//! Fixed-format MPS output.
//!
//! Fixed format limits names to eight characters, so columns are written as
//! `X0000001..` and rows as `R0000001..` (1-based positions). A comment block
//! after `NAME` maps the codes back to the program's own names. Binary
//! columns are wrapped in `INTORG`/`INTEND` markers.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{LinearProgram, Relation, Sense};

/// MPS code for the column at position `j`.
pub fn column_code(j: usize) -> String {
    format!("X{:07}", j + 1)
}

/// MPS code for the row at position `i`.
pub fn row_code(i: usize) -> String {
    format!("R{:07}", i + 1)
}

/// Parses a column code back into a position.
pub fn parse_column_code(code: &str) -> Option<usize> {
    code.strip_prefix('X')?
        .parse::<usize>()
        .ok()
        .filter(|&k| k >= 1)
        .map(|k| k - 1)
}

/// Shortest representation of `v` that fits the 12-character numeric field.
fn number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    let exp = format!("{v:e}");
    if exp.len() <= 12 {
        return exp;
    }
    (0..=11)
        .rev()
        .map(|p| format!("{v:.p$e}"))
        .find(|s| s.len() <= 12)
        .expect("a 0-digit mantissa always fits")
}

fn record(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str, f5: &str, f6: &str) {
    let line = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}   {f5:<8}  {f6:>12}");
    out.push_str(line.trim_end());
    out.push('\n');
}

/// Writes `lp` as fixed-format MPS; columns in `binaries` are emitted as
/// integer columns with bounds `[0, 1]` (or tighter, if the program fixes them).
pub fn write_mps(lp: &LinearProgram, binaries: &BTreeSet<usize>) -> String {
    let mut out = String::new();
    out.push_str("NAME          GRIDRESTORE\n");
    for (j, v) in lp.variables.iter().enumerate() {
        let _ = writeln!(out, "* {} {}", column_code(j), v.name);
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let _ = writeln!(out, "* {} {}", row_code(i), c.name);
    }
    if lp.sense == Sense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }

    out.push_str("ROWS\n");
    record(&mut out, "N", "OBJ", "", "", "", "");
    for (i, c) in lp.constraints.iter().enumerate() {
        let kind = match c.relation {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        record(&mut out, kind, &row_code(i), "", "", "", "");
    }

    let n = lp.variables.len();
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in lp.constraints.iter().enumerate() {
        for &(j, a) in &c.terms {
            entries[j].push((i, a));
        }
    }
    let mut obj = vec![0.0; n];
    for &(j, c) in &lp.objective {
        obj[j] += c;
    }

    out.push_str("COLUMNS\n");
    let mut in_marker = false;
    let mut markers = 0;
    for j in 0..n {
        let is_bin = binaries.contains(&j);
        if is_bin != in_marker {
            markers += 1;
            let tag = if is_bin { "'INTORG'" } else { "'INTEND'" };
            record(&mut out, "", &format!("M{markers:07}"), "'MARKER'", "", tag, "");
            in_marker = is_bin;
        }
        let code = column_code(j);
        // Merge duplicate row entries so each (column, row) pair appears once.
        let mut col = entries[j].clone();
        col.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
        for (i, a) in col {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => merged.push((i, a)),
            }
        }
        let mut wrote = false;
        if obj[j] != 0.0 {
            record(&mut out, "", &code, "OBJ", &number(obj[j]), "", "");
            wrote = true;
        }
        for (i, a) in merged {
            if a != 0.0 {
                record(&mut out, "", &code, &row_code(i), &number(a), "", "");
                wrote = true;
            }
        }
        if !wrote {
            record(&mut out, "", &code, "OBJ", "0", "", "");
        }
    }
    if in_marker {
        markers += 1;
        record(&mut out, "", &format!("M{markers:07}"), "'MARKER'", "", "'INTEND'", "");
    }

    out.push_str("RHS\n");
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.rhs != 0.0 {
            record(&mut out, "", "RHS", &row_code(i), &number(c.rhs), "", "");
        }
    }
    out.push_str("RANGES\n");

    out.push_str("BOUNDS\n");
    for (j, v) in lp.variables.iter().enumerate() {
        let code = column_code(j);
        let (lo, hi) = if binaries.contains(&j) {
            (v.lower.max(0.0), v.upper.min(1.0))
        } else {
            (v.lower, v.upper)
        };
        if lo == hi {
            record(&mut out, "FX", "BND", &code, &number(lo), "", "");
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => record(&mut out, "FR", "BND", &code, "", "", ""),
            (false, true) => {
                record(&mut out, "MI", "BND", &code, "", "", "");
                record(&mut out, "UP", "BND", &code, &number(hi), "", "");
            }
            (true, _) => {
                if lo != 0.0 || binaries.contains(&j) {
                    record(&mut out, "LO", "BND", &code, &number(lo), "", "");
                }
                if hi.is_finite() {
                    record(&mut out, "UP", "BND", &code, &number(hi), "", "");
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}
