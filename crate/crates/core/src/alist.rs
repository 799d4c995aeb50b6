//! Reader and writer for the alist sparse-matrix format.
//!
//! ```text
//! n m
//! max_var_degree max_check_degree
//! <n variable degrees>
//! <m check degrees>
//! <n lines: 1-based check indices of each variable, zero-padded>
//! <m lines: 1-based variable indices of each check, zero-padded>
//! ```

use std::fmt::Write as _;

use crate::code::TannerGraph;
use crate::error::{Error, Result};

/// Serializes a Tanner graph as alist text.
pub fn export_alist(graph: &TannerGraph) -> String {
    let n = graph.n_vars();
    let m = graph.n_checks();
    let max_v = (0..n).map(|v| graph.var_neighbors(v).len()).max().unwrap_or(0);
    let max_c = (0..m).map(|c| graph.check_neighbors(c).len()).max().unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "{n} {m}").unwrap();
    writeln!(out, "{max_v} {max_c}").unwrap();
    let join = |it: &mut dyn Iterator<Item = usize>| it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(out, "{}", join(&mut (0..n).map(|v| graph.var_neighbors(v).len()))).unwrap();
    writeln!(out, "{}", join(&mut (0..m).map(|c| graph.check_neighbors(c).len()))).unwrap();
    for v in 0..n {
        let list = graph.var_neighbors(v);
        let padded = list.iter().map(|&c| c + 1).chain(std::iter::repeat_n(0, max_v - list.len()));
        writeln!(out, "{}", join(&mut padded.into_iter())).unwrap();
    }
    for c in 0..m {
        let list = graph.check_neighbors(c);
        let padded = list.iter().map(|&v| v + 1).chain(std::iter::repeat_n(0, max_c - list.len()));
        writeln!(out, "{}", join(&mut padded.into_iter())).unwrap();
    }
    out
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Alist { line, msg: msg.into() })
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-empty line as parsed integers, with its 1-based line number.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (idx, raw) in self.inner.by_ref() {
            self.last = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let nums = trimmed
                .split_whitespace()
                .map(|tok| tok.parse::<usize>().or_else(|_| err(idx + 1, format!("invalid integer {tok:?}"))))
                .collect::<Result<Vec<_>>>()?;
            return Ok((idx + 1, nums));
        }
        err(self.last + 1, format!("unexpected end of file, expected {what}"))
    }
}

/// Parses alist text, checking that the variable and check lists describe the
/// same bipartite graph.
pub fn import_alist(text: &str) -> Result<TannerGraph> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (ln, dims) = lines.next_numbers("dimensions")?;
    if dims.len() != 2 {
        return err(ln, "expected \"n m\"");
    }
    let (n, m) = (dims[0], dims[1]);
    let (ln, maxes) = lines.next_numbers("maximum degrees")?;
    if maxes.len() != 2 {
        return err(ln, "expected \"max_var_degree max_check_degree\"");
    }
    let (max_v, max_c) = (maxes[0], maxes[1]);
    let (ln, var_deg) = lines.next_numbers("variable degrees")?;
    if var_deg.len() != n {
        return err(ln, format!("expected {n} variable degrees, got {}", var_deg.len()));
    }
    if var_deg.iter().any(|&d| d > max_v) {
        return err(ln, "variable degree exceeds declared maximum");
    }
    let (ln, chk_deg) = lines.next_numbers("check degrees")?;
    if chk_deg.len() != m {
        return err(ln, format!("expected {m} check degrees, got {}", chk_deg.len()));
    }
    if chk_deg.iter().any(|&d| d > max_c) {
        return err(ln, "check degree exceeds declared maximum");
    }

    let read_list = |lines: &mut Lines, deg: usize, bound: usize, what: &str| -> Result<Vec<usize>> {
        let (ln, nums) = lines.next_numbers(what)?;
        let entries: Vec<usize> = nums.iter().copied().filter(|&x| x != 0).collect();
        if entries.len() != deg {
            return err(ln, format!("{what}: expected {deg} entries, got {}", entries.len()));
        }
        if nums[..deg].contains(&0) {
            return err(ln, format!("{what}: zero padding before the end of the list"));
        }
        if let Some(&bad) = entries.iter().find(|&&x| x > bound) {
            return err(ln, format!("{what}: index {bad} out of range 1..={bound}"));
        }
        Ok(entries.into_iter().map(|x| x - 1).collect())
    };

    let mut var_lists = Vec::with_capacity(n);
    for (v, &deg) in var_deg.iter().enumerate() {
        var_lists.push(read_list(&mut lines, deg, m, &format!("variable {}", v + 1))?);
    }
    let mut check_lists = Vec::with_capacity(m);
    let mut check_lines = Vec::with_capacity(m);
    for (c, &deg) in chk_deg.iter().enumerate() {
        check_lists.push(read_list(&mut lines, deg, n, &format!("check {}", c + 1))?);
        check_lines.push(lines.last);
    }

    let graph =
        TannerGraph::from_checks(n, check_lists).map_err(|e| Error::Alist { line: lines.last, msg: e.to_string() })?;
    for (v, list) in var_lists.iter_mut().enumerate() {
        list.sort_unstable();
        if list.as_slice() != graph.var_neighbors(v) {
            return err(
                check_lines.last().copied().unwrap_or(lines.last),
                format!("variable {} and check lists disagree", v + 1),
            );
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::terminate;
    use crate::ensemble::{sample_ensemble, EnsembleParams};

    #[test]
    fn header_of_small_code() {
        let code = terminate(&sample_ensemble(EnsembleParams::new(3, 8, 4).unwrap(), 1).unwrap()).unwrap();
        let text = export_alist(&code.graph);
        let mut it = text.lines();
        assert_eq!(it.next(), Some("112 72"));
        assert_eq!(it.next(), Some("3 6"));
        assert_eq!(import_alist(&text).unwrap(), code.graph);
    }

    #[test]
    fn truncated_file_reports_line() {
        let code = terminate(&sample_ensemble(EnsembleParams::new(3, 2, 1).unwrap(), 0).unwrap()).unwrap();
        let text = export_alist(&code.graph);
        let cut: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        match import_alist(&cut) {
            Err(Error::Alist { line, .. }) => assert_eq!(line, 11),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_lists_are_rejected() {
        let text = "2 1\n1 2\n1 1\n2\n1\n1\n1 2\n";
        assert!(import_alist(text).is_ok());
        let bad = "2 1\n1 2\n1 1\n2\n1\n0\n1 2\n";
        assert!(import_alist(bad).is_err());
        let out_of_range = "2 1\n1 2\n1 1\n2\n1\n1\n1 3\n";
        assert!(matches!(import_alist(out_of_range), Err(Error::Alist { line: 7, .. })));
        let garbage = "2 x\n";
        assert!(matches!(import_alist(garbage), Err(Error::Alist { line: 1, .. })));
    }
}
