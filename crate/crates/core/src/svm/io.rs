//! Line-oriented model files.
//!
//! ```text
//! cslbp-svm 1
//! kind hik_exact
//! feature_length 2720
//! bias -1.2345678901234567e-1
//! c 1.0000000000000000e1
//! kernel_params none
//! support_vectors 2
//! <coef> <v1> ... <vn>
//! <coef> <v1> ... <vn>
//! ```
//!
//! Linear models replace the support-vector section with `weights` followed
//! by one line of weights. Fast models carry `kernel_params
//! samples_per_dim=<n> mode=<exact|grid>` and rebuild their tables on load.
//! Reals are written with 17 significant digits so they round-trip exactly.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::svm::{FastHik, FastHikMode, ModelBody, SvmModel};

const MAGIC: &str = "cslbp-svm 1";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_row<W: Write>(out: &mut W, lead: Option<f64>, values: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for v in lead.iter().chain(values) {
        if !first {
            out.write_all(b" ")?;
        }
        out.write_all(real(*v).as_bytes())?;
        first = false;
    }
    out.write_all(b"\n")
}

pub fn write_model<W: Write>(mut out: W, model: &SvmModel) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "kind {}", model.kind().name())?;
    writeln!(out, "feature_length {}", model.feature_length)?;
    writeln!(out, "bias {}", real(model.bias))?;
    writeln!(out, "c {}", real(model.c))?;
    match &model.body {
        ModelBody::Linear { weights } => {
            writeln!(out, "kernel_params none")?;
            writeln!(out, "weights")?;
            write_row(&mut out, None, weights)?;
        }
        ModelBody::HikExact {
            support_vectors,
            coefficients,
        } => {
            writeln!(out, "kernel_params none")?;
            writeln!(out, "support_vectors {}", support_vectors.len())?;
            for (sv, c) in support_vectors.iter().zip(coefficients) {
                write_row(&mut out, Some(*c), sv)?;
            }
        }
        ModelBody::HikFast(f) => {
            let mode = match f.mode {
                FastHikMode::Exact => "exact",
                FastHikMode::Grid => "grid",
            };
            writeln!(
                out,
                "kernel_params samples_per_dim={} mode={mode}",
                f.samples_per_dim
            )?;
            writeln!(out, "support_vectors {}", f.support_vectors.len())?;
            for (sv, c) in f.support_vectors.iter().zip(&f.coefficients) {
                write_row(&mut out, Some(*c), sv)?;
            }
        }
    }
    Ok(())
}

pub fn save_model(path: impl AsRef<Path>, model: &SvmModel) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_model(&mut w, model).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SvmModel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file), path)
}

struct Lines<'a, R> {
    inner: std::io::Lines<R>,
    path: &'a Path,
    line: usize,
}

impl<R: BufRead> Lines<'_, R> {
    fn next_line(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(Error::io(self.path, e)),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.path, self.line, msg)
    }

    fn keyed(&mut self, key: &str) -> Result<String> {
        let l = self.next_line()?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim().to_string()),
            _ if l.trim() == key => Ok(String::new()),
            _ => Err(self.err(format!("expected '{key}'"))),
        }
    }

    fn reals(&mut self, expected: usize) -> Result<Vec<f64>> {
        let l = self.next_line()?;
        let vals = l
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| self.err(e.to_string()))?;
        if vals.len() != expected {
            return Err(self.err(format!("expected {expected} values, found {}", vals.len())));
        }
        Ok(vals)
    }
}

/// Parses a model; `path` is only used in error messages.
pub fn read_model<R: BufRead>(reader: R, path: &Path) -> Result<SvmModel> {
    let mut lines = Lines {
        inner: reader.lines(),
        path,
        line: 0,
    };
    if lines.next_line()?.trim() != MAGIC {
        return Err(lines.err("not a cslbp model file"));
    }
    let kind = lines.keyed("kind")?;
    let feature_length: usize = lines
        .keyed("feature_length")?
        .parse()
        .map_err(|_| lines.err("bad feature_length"))?;
    let bias: f64 = lines
        .keyed("bias")?
        .parse()
        .map_err(|_| lines.err("bad bias"))?;
    let c: f64 = lines.keyed("c")?.parse().map_err(|_| lines.err("bad c"))?;
    let params = lines.keyed("kernel_params")?;

    let body = match kind.as_str() {
        "linear" => {
            lines.keyed("weights")?;
            ModelBody::Linear {
                weights: lines.reals(feature_length)?,
            }
        }
        "hik_exact" | "hik_fast" => {
            let count: usize = lines
                .keyed("support_vectors")?
                .parse()
                .map_err(|_| lines.err("bad support vector count"))?;
            let mut support_vectors = Vec::with_capacity(count);
            let mut coefficients = Vec::with_capacity(count);
            for _ in 0..count {
                let mut row = lines.reals(feature_length + 1)?;
                coefficients.push(row.remove(0));
                support_vectors.push(row);
            }
            if kind == "hik_exact" {
                ModelBody::HikExact {
                    support_vectors,
                    coefficients,
                }
            } else {
                let mut samples = None;
                let mut mode = FastHikMode::Exact;
                for kv in params.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("samples_per_dim", v)) => {
                            samples = Some(
                                v.parse::<usize>()
                                    .map_err(|_| lines.err("bad samples_per_dim"))?,
                            )
                        }
                        Some(("mode", "exact")) => mode = FastHikMode::Exact,
                        Some(("mode", "grid")) => mode = FastHikMode::Grid,
                        _ => return Err(lines.err(format!("unknown kernel parameter '{kv}'"))),
                    }
                }
                let samples = samples
                    .filter(|&s| s >= 2)
                    .ok_or_else(|| lines.err("fast model needs samples_per_dim >= 2"))?;
                ModelBody::HikFast(FastHik::build(
                    &support_vectors,
                    &coefficients,
                    samples,
                    mode,
                ))
            }
        }
        other => return Err(lines.err(format!("unknown model kind '{other}'"))),
    };
    Ok(SvmModel {
        feature_length,
        bias,
        c,
        body,
    })
}
