//! JSON and CSV encoding shared by the commands.

use std::io::Write;
use std::path::{Path, PathBuf};

use modegate::counts::McSummary;
use modegate::C64;
use nalgebra::{Dim, Matrix, RawStorage};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Complex number as `[re, im]`.
pub type Complex = [f64; 2];

pub fn complex(z: C64) -> Complex {
    [z.re, z.im]
}

/// Row-major nested arrays of `[re, im]`.
pub fn complex_matrix<R: Dim, C: Dim, S: RawStorage<C64, R, C>>(m: &Matrix<C64, R, C, S>) -> Vec<Vec<Complex>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex(m[(i, j)])).collect())
        .collect()
}

/// A value computed from the data with its Monte Carlo spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub std: f64,
}

impl Measured {
    pub fn exact(value: f64) -> Self {
        Self { value, std: 0.0 }
    }

    pub fn with(value: f64, mc: Option<McSummary>) -> Self {
        Self {
            value,
            std: mc.map_or(0.0, |m| m.std),
        }
    }

    /// Mean of independent estimates, errors added in quadrature.
    pub fn mean(items: &[Measured]) -> Self {
        let n = items.len() as f64;
        Self {
            value: items.iter().map(|m| m.value).sum::<f64>() / n,
            std: items.iter().map(|m| m.std * m.std).sum::<f64>().sqrt() / n,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub seed: u64,
    pub exact: bool,
    pub config: &'a ExperimentConfig,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, config: &'a ExperimentConfig, result: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            seed: config.seed,
            exact: config.exact,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("cannot encode output: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

/// Where a command's artifacts go.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    Directory(PathBuf),
}

impl Sink {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        config
            .output
            .clone()
            .map_or(Sink::Stdout, Sink::Directory)
    }

    /// Writes `contents` to `<dir>/<name>`, or to stdout when `echo` is set
    /// and there is no output directory.
    pub fn emit(&self, name: &str, contents: &str, echo: bool) -> Result<Option<PathBuf>, CliError> {
        match self {
            Sink::Stdout => {
                if echo {
                    let mut out = std::io::stdout().lock();
                    out.write_all(contents.as_bytes()).map_err(io_error("stdout"))?;
                }
                Ok(None)
            }
            Sink::Directory(dir) => {
                std::fs::create_dir_all(dir).map_err(io_error(dir))?;
                let path = dir.join(name);
                std::fs::write(&path, contents).map_err(io_error(&path))?;
                Ok(Some(path))
            }
        }
    }
}

fn io_error(path: impl AsRef<Path>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.as_ref().display().to_string();
    move |e| CliError::Runtime(format!("cannot write {path}: {e}"))
}

/// CSV text from a header and rows of already-formatted fields.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Runtime(format!("cannot encode CSV: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Runtime(format!("cannot encode CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;

    #[test]
    fn complex_matrix_is_row_major() {
        let m = Matrix2::new(C64::new(1.0, 2.0), C64::new(3.0, 0.0), C64::new(0.0, -1.0), C64::new(4.0, 5.0));
        let v = complex_matrix(&m);
        assert_eq!(v[0][1], [3.0, 0.0]);
        assert_eq!(v[1][0], [0.0, -1.0]);
    }

    #[test]
    fn mean_adds_errors_in_quadrature() {
        let m = Measured::mean(&[Measured { value: 1.0, std: 3.0 }, Measured { value: 2.0, std: 4.0 }]);
        assert_eq!(m.value, 1.5);
        assert_eq!(m.std, 2.5);
    }

    #[test]
    fn csv_has_header() {
        let s = csv_text(&["a", "b"], &[vec!["1".into(), "x".into()]]).unwrap();
        assert_eq!(s, "a,b\n1,x\n");
    }
}
