//! Learning curves and their CSV form (`n,inst_cost,smoothed_db`).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

pub const CURVE_HEADER: &str = "n,inst_cost,smoothed_db";

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub n: usize,
    pub inst_cost: f64,
    pub smoothed_db: f64,
}

/// Instantaneous cost trajectory plus a windowed normalized-error track.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LearningCurve {
    pub rows: Vec<CurveRow>,
    /// Free-form `key: value` metadata (config echo, seed, input hash).
    pub meta: Vec<(String, String)>,
}

impl LearningCurve {
    /// `smoothed_db[t] = 10·log10(Σ cost / Σ reference)` over the trailing
    /// window of `window` samples ending at `t` (shorter at the start).
    pub fn from_costs(index: Vec<usize>, cost: Vec<f64>, reference: &[f64], window: usize) -> Self {
        assert_eq!(index.len(), cost.len());
        assert_eq!(cost.len(), reference.len());
        let smoothed = windowed_ratio_db(&cost, reference, window.max(1));
        let rows = index
            .into_iter()
            .zip(cost)
            .zip(smoothed)
            .map(|((n, inst_cost), smoothed_db)| CurveRow {
                n,
                inst_cost,
                smoothed_db,
            })
            .collect();
        Self {
            rows,
            meta: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn last_smoothed_db(&self) -> Option<f64> {
        self.rows.last().map(|r| r.smoothed_db)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CurveError> {
        let io_err = |source| CurveError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = BufWriter::new(fs::File::create(path).map_err(io_err)?);
        (|| -> io::Result<()> {
            writeln!(out, "{CURVE_HEADER}")?;
            for r in &self.rows {
                writeln!(out, "{},{},{}", r.n, r.inst_cost, r.smoothed_db)?;
            }
            out.flush()
        })()
        .map_err(io_err)
    }

    /// Reads rows back; metadata is not part of the CSV.
    pub fn read_csv(path: &Path) -> Result<Self, CurveError> {
        let text = fs::read_to_string(path).map_err(|source| CurveError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end_matches('\r') == CURVE_HEADER => {}
            _ => {
                return Err(CurveError::Malformed {
                    line: 1,
                    reason: format!("expected header `{CURVE_HEADER}`"),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| CurveError::Malformed {
                line: line_no,
                reason,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", fields.len())));
            }
            let n = fields[0].parse().map_err(|e| bad(format!("{e}")))?;
            let inst_cost = fields[1].parse().map_err(|e| bad(format!("{e}")))?;
            let smoothed_db = fields[2].parse().map_err(|e| bad(format!("{e}")))?;
            rows.push(CurveRow {
                n,
                inst_cost,
                smoothed_db,
            });
        }
        Ok(Self {
            rows,
            meta: Vec::new(),
        })
    }
}

/// Power ratio in dB with `0/0 = 0 dB`.
pub fn ratio_db(num: f64, den: f64) -> f64 {
    if num == 0.0 && den == 0.0 {
        0.0
    } else {
        10.0 * (num / den).log10()
    }
}

fn prefix_sums(v: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    std::iter::once(0.0)
        .chain(v.iter().map(|x| {
            acc += x;
            acc
        }))
        .collect()
}

pub(crate) fn windowed_ratio_db(num: &[f64], den: &[f64], window: usize) -> Vec<f64> {
    let pn = prefix_sums(num);
    let pd = prefix_sums(den);
    (0..num.len())
        .map(|t| {
            let lo = (t + 1).saturating_sub(window);
            // Clamp tiny negative round-off from the prefix difference.
            let a = (pn[t + 1] - pn[lo]).max(0.0);
            let b = (pd[t + 1] - pd[lo]).max(0.0);
            ratio_db(a, b)
        })
        .collect()
}
