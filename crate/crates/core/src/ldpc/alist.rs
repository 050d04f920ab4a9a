//! Reader and writer for the alist sparse-matrix text format.
//!
//! Layout (all indices 1-based, whitespace separated):
//!
//! ```text
//! N M                      columns, rows
//! max_col_w max_row_w
//! w(col 1) .. w(col N)
//! w(row 1) .. w(row M)
//! N lines: the rows of each column, zero-padded to max_col_w
//! M lines: the columns of each row, zero-padded to max_row_w
//! ```
//!
//! Zero padding is optional on input.

use std::fmt::Write as _;

use super::{LdpcError, ParityCheckMatrix};

pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let n = h.num_cols();
    let m = h.num_rows();
    let max_cw = (0..n).map(|c| h.col_weight(c)).max().unwrap_or(0);
    let max_rw = (0..m).map(|r| h.row_weight(r)).max().unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "{n} {m}");
    let _ = writeln!(s, "{max_cw} {max_rw}");
    let join = |it: &mut dyn Iterator<Item = usize>| it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "{}", join(&mut (0..n).map(|c| h.col_weight(c))));
    let _ = writeln!(s, "{}", join(&mut (0..m).map(|r| h.row_weight(r))));
    for c in 0..n {
        let mut entries: Vec<usize> = h.col(c).iter().map(|&r| r as usize + 1).collect();
        entries.resize(max_cw, 0);
        let _ = writeln!(s, "{}", join(&mut entries.into_iter()));
    }
    for r in 0..m {
        let mut entries: Vec<usize> = h.row(r).iter().map(|&c| c as usize + 1).collect();
        entries.resize(max_rw, 0);
        let _ = writeln!(s, "{}", join(&mut entries.into_iter()));
    }
    s
}

pub fn read_alist(text: &str) -> Result<ParityCheckMatrix, LdpcError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut next_nums = |what: &str| -> Result<Vec<usize>, LdpcError> {
        let line = lines
            .next()
            .ok_or_else(|| LdpcError::Format(format!("alist truncated before {what}")))?;
        line.split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| LdpcError::Format(format!("bad integer {t:?} in {what}")))
            })
            .collect()
    };
    let dims = next_nums("dimensions")?;
    let [n, m] = dims[..] else {
        return Err(LdpcError::Format("expected 'N M' header".into()));
    };
    let maxes = next_nums("max weights")?;
    if maxes.len() != 2 {
        return Err(LdpcError::Format("expected max weight line".into()));
    }
    let col_w = next_nums("column weights")?;
    let row_w = next_nums("row weights")?;
    if col_w.len() != n || row_w.len() != m {
        return Err(LdpcError::Format("weight list length mismatch".into()));
    }
    let mut entries = Vec::with_capacity(col_w.iter().sum());
    for (c, &w) in col_w.iter().enumerate() {
        let rows: Vec<usize> = next_nums("column list")?.into_iter().filter(|&v| v != 0).collect();
        if rows.len() != w {
            return Err(LdpcError::Format(format!(
                "column {} lists {} rows, weight says {w}",
                c + 1,
                rows.len()
            )));
        }
        entries.extend(rows.into_iter().map(|r| (r - 1, c)));
    }
    let h = ParityCheckMatrix::from_entries(m, n, entries)?;
    for (r, &w) in row_w.iter().enumerate() {
        let cols: Vec<u32> = next_nums("row list")?
            .into_iter()
            .filter(|&v| v != 0)
            .map(|v| v as u32 - 1)
            .collect();
        if cols.len() != w || h.row(r) != sorted(cols).as_slice() {
            return Err(LdpcError::Format(format!(
                "row {} inconsistent with column lists",
                r + 1
            )));
        }
    }
    Ok(h)
}

fn sorted(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v
}
