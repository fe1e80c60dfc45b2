//! Serializable reports for the command-line tool: classification tables,
//! per-matrix invariant summaries, and a small on-disk cache keyed by tool
//! version and dimension.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::Classification;
use crate::matrix::BottMatrix;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One classification run in a stable, serializable shape.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClassReport {
    pub dim: usize,
    pub total_matrices: usize,
    pub classes: Vec<ClassEntry>,
    pub tool_version: String,
    /// Wall-clock time of the run that computed the data; preserved
    /// unchanged when served from the cache.
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClassEntry {
    /// Smallest member, rows top to bottom joined by `/`.
    pub rep: String,
    #[serde(rename = "type")]
    pub type_signature: Vec<usize>,
    pub orientable: bool,
    pub member_count: usize,
    pub orbit_sizes: Vec<usize>,
}

/// Rows of a matrix joined by `/`, e.g. `0110/0010/0001/0000` minus the
/// lower triangle; the inverse of the row order used by parsing.
pub fn matrix_line(m: &BottMatrix) -> String {
    (0..m.n())
        .map(|i| {
            (0..m.n())
                .map(|j| if m.entry(i, j) { '1' } else { '0' })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("/")
}

pub fn build_report(c: &Classification, elapsed_ms: u64) -> ClassReport {
    ClassReport {
        dim: c.dim,
        total_matrices: c.total,
        classes: c
            .classes
            .iter()
            .map(|cl| ClassEntry {
                rep: matrix_line(&cl.rep),
                type_signature: cl.type_signature.parts().to_vec(),
                orientable: cl.orientable,
                member_count: cl.members.len(),
                orbit_sizes: cl.orbit_sizes.clone(),
            })
            .collect(),
        tool_version: TOOL_VERSION.to_string(),
        elapsed_ms,
    }
}

pub fn render_json(report: &ClassReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn type_string(parts: &[usize]) -> String {
    let inner: Vec<String> = parts.iter().map(ToString::to_string).collect();
    format!("({})", inner.join(","))
}

pub fn render_table(report: &ClassReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dimension {}: {} matrices, {} classes",
        report.dim,
        report.total_matrices,
        report.classes.len()
    );
    let rep_width = report
        .classes
        .iter()
        .map(|c| c.rep.len())
        .max()
        .unwrap_or(3)
        .max(3);
    let _ = writeln!(
        out,
        "{:<6}{:<14}{:<3}{:<rep_width$}  {:>7}  orbits",
        "class",
        "type",
        "",
        "rep",
        "members",
        rep_width = rep_width
    );
    for (i, c) in report.classes.iter().enumerate() {
        let orbits: Vec<String> = c.orbit_sizes.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "{:<6}{:<14}{:<3}{:<rep_width$}  {:>7}  {}",
            i + 1,
            type_string(&c.type_signature),
            if c.orientable { "*" } else { "" },
            c.rep,
            c.member_count,
            orbits.join("+"),
            rep_width = rep_width
        );
    }
    out
}

/// Invariants of a single matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InvariantReport {
    pub dim: usize,
    pub matrix: String,
    pub key: String,
    pub orientable: bool,
    #[serde(rename = "type")]
    pub type_signature: Vec<usize>,
    pub is_normal_form: bool,
    pub normal_form: String,
    pub permutation_orbit_size: usize,
    pub normal_form_orbit_size: usize,
}

pub fn invariant_report(m: &BottMatrix) -> InvariantReport {
    let (nf, _) = m.normal_form();
    InvariantReport {
        dim: m.n(),
        matrix: matrix_line(m),
        key: m.key_string(),
        orientable: m.is_orientable(),
        type_signature: m.type_signature().parts().to_vec(),
        is_normal_form: m.is_normal_form(),
        normal_form: matrix_line(&nf),
        permutation_orbit_size: m.permutation_orbit().len(),
        normal_form_orbit_size: nf.normal_form_orbit().len(),
    }
}

pub fn render_invariants_json(r: &InvariantReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_invariants_table(r: &InvariantReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dimension:              {}", r.dim);
    let _ = writeln!(out, "matrix:                 {}", r.matrix);
    let _ = writeln!(out, "key:                    {}", r.key);
    let _ = writeln!(out, "orientable:             {}", r.orientable);
    let _ = writeln!(
        out,
        "type:                   {}",
        type_string(&r.type_signature)
    );
    let _ = writeln!(out, "normal form:            {}", r.normal_form);
    let _ = writeln!(out, "is normal form:         {}", r.is_normal_form);
    let _ = writeln!(out, "permutation orbit size: {}", r.permutation_orbit_size);
    let _ = writeln!(out, "normal form orbit size: {}", r.normal_form_orbit_size);
    out
}

pub fn cache_path(dir: &Path, dim: usize) -> PathBuf {
    dir.join(format!("classify-dim{dim}-v{TOOL_VERSION}.json"))
}

/// Loads a cached report if one exists for this tool version and
/// dimension; any mismatch or parse failure falls back to recomputing.
pub fn load_cached(dir: &Path, dim: usize) -> Option<ClassReport> {
    let text = fs::read_to_string(cache_path(dir, dim)).ok()?;
    let report: ClassReport = serde_json::from_str(&text).ok()?;
    (report.dim == dim && report.tool_version == TOOL_VERSION).then_some(report)
}

pub fn store_cached(dir: &Path, dim: usize, report: &ClassReport) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, dim);
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, render_json(report))?;
    fs::rename(&tmp, &path)
}
