//! Report, field, CSV and heatmap writers.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use kwsolve::io::write_field;
use kwsolve::ScalarField;

use crate::error::{CliError, Result};

/// Ordered `key = value` lines written to `report.kv`.
#[derive(Clone, Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn put(&mut self, key: &str, value: impl Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    #[cfg(test)]
    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.lines
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

pub struct Sink {
    dir: PathBuf,
    heatmaps: bool,
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

impl Sink {
    pub fn new(dir: PathBuf, heatmaps: bool) -> Result<Self> {
        fs::create_dir_all(&dir).map_err(|source| CliError::Write {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self { dir, heatmaps })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `<name>.kwf` (and `<name>.pgm` for rank-2 fields) and records
    /// the field's range in the report.
    pub fn field(&self, report: &mut Report, name: &str, field: &ScalarField) -> Result<()> {
        let path = self.path(&format!("{name}.kwf"));
        write_field(field, &path).map_err(|e| match e {
            kwsolve::KwError::Io(source) => CliError::Write {
                path: path.display().to_string(),
                source,
            },
            other => other.into(),
        })?;
        report.put(&format!("{name}.file"), path.display());
        report.put(&format!("{name}.min"), field.min());
        report.put(&format!("{name}.max"), field.max());
        if self.heatmaps && field.spec().rank() == 2 {
            let pgm = self.path(&format!("{name}.pgm"));
            write(&pgm, &heatmap(field))?;
            report.put(&format!("{name}.heatmap"), pgm.display());
        }
        Ok(())
    }

    pub fn csv<T: Display>(
        &self,
        report: &mut Report,
        name: &str,
        header: &[&str],
        rows: &[Vec<T>],
    ) -> Result<()> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let path = self.path(&format!("{name}.csv"));
        write(&path, text.as_bytes())?;
        report.put(&format!("{name}.file"), path.display());
        Ok(())
    }

    pub fn report(&self, report: &Report) -> Result<()> {
        write(&self.path("report.kv"), report.render().as_bytes())
    }
}

/// 8-bit binary PGM, rows along the first axis, linear min-max grayscale.
pub fn heatmap(field: &ScalarField) -> Vec<u8> {
    let dims = field.spec().dims();
    let (rows, cols) = (dims[0], dims[1]);
    let (lo, hi) = (field.min(), field.max());
    let mut out = format!("P5\n# min={lo} max={hi}\n{cols} {rows}\n255\n").into_bytes();
    let span = hi - lo;
    out.extend(field.values().iter().map(|&v| {
        if span > 0.0 {
            ((v - lo) / span * 255.0).round() as u8
        } else {
            0
        }
    }));
    out
}
