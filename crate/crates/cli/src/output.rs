//! Output formats and number rendering.

use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use horizonlab::Interval;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Where results go: stdout, or the `--out` file.
pub struct Sink {
    pub out: Option<PathBuf>,
}

impl Sink {
    pub fn emit(&self, text: &str) -> Result<(), CliError> {
        let mut text = text.to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

/// Shortest round-trip form, so output is exact and deterministic.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Rounded for human-readable tables.
pub fn short(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        format!("{x}")
    } else if (1e-4..1e7).contains(&x.abs()) {
        let s = format!("{x:.9}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.6e}")
    }
}

pub fn interval(x: Interval) -> String {
    if x.is_point() {
        short(x.lo())
    } else {
        format!("[{}, {}]", short(x.lo()), short(x.hi()))
    }
}

pub fn pair(x: Interval) -> serde_json::Value {
    serde_json::json!([x.lo(), x.hi()])
}

pub fn json(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Left-aligned columns separated by two spaces.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = vec![line(header.to_vec())];
    out.push(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for r in rows {
        out.push(line(r.iter().map(String::as_str).collect()));
    }
    out.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering() {
        assert_eq!(short(0.25), "0.25");
        assert_eq!(short(1e-9), "1.000000e-9");
        assert_eq!(interval(Interval::point(2.0)), "2");
        let t = text_table(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\n---  --\nxyz  1");
        assert_eq!(csv(&["a"], &[vec!["1".into()]]).unwrap(), "a\n1\n");
    }
}
