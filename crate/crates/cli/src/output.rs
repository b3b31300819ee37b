//! CSV emission with fixed float formatting.
//!
//! Floats are written with six significant digits in `%g` style: fixed
//! notation for decimal exponents in `[-4, 6)`, scientific otherwise, trailing
//! zeros dropped. Rows end in `\n` and every file starts with its header.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use dealerfield_core::engine::StepTrace;
use dealerfield_core::{DealerStats, QuotePair};

use crate::CliError;

/// `%g`-style rendering with six significant digits.
pub fn sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::csv(path, e))
}

pub fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const STATS_HEADER: [&str; 6] = ["agent", "average_spread", "profit_mean", "profit_std", "qT_mean", "qT_std"];

/// Table rows, one per dealer, labelled `1 .. N`.
pub fn write_stats(path: &Path, rows: &[DealerStats]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(STATS_HEADER).map_err(|e| CliError::csv(path, e))?;
    for (i, r) in rows.iter().enumerate() {
        let record = [
            (i + 1).to_string(),
            sig6(r.average_spread),
            sig6(r.mean_profit),
            sig6(r.std_profit),
            sig6(r.mean_q_t),
            sig6(r.std_q_t),
        ];
        w.write_record(&record).map_err(|e| CliError::csv(path, e))?;
    }
    finish(w, path)
}

pub fn write_quotes(path: &Path, rows: &[(f64, QuotePair)]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(["t", "delta_b", "delta_a"]).map_err(|e| CliError::csv(path, e))?;
    for (t, q) in rows {
        w.write_record([sig6(*t), sig6(q.delta_b), sig6(q.delta_a)])
            .map_err(|e| CliError::csv(path, e))?;
    }
    finish(w, path)
}

/// Streams per-step rows as a run progresses.
pub struct TraceWriter {
    path: PathBuf,
    inner: csv::Writer<File>,
    error: Option<csv::Error>,
}

impl TraceWriter {
    pub fn create(path: &Path, n_dealers: usize) -> Result<Self, CliError> {
        let mut inner = writer(path)?;
        let mut header = vec!["t".to_string(), "s".to_string()];
        for i in 1..=n_dealers {
            for col in ["delta_b", "delta_a", "bid_price", "ask_price", "q", "x", "fill_a", "fill_b"] {
                header.push(format!("{col}_{i}"));
            }
        }
        inner.write_record(&header).map_err(|e| CliError::csv(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            inner,
            error: None,
        })
    }

    pub fn record(&mut self, step: &StepTrace<'_>) {
        if self.error.is_some() {
            return;
        }
        let mut row = vec![sig6(step.t), sig6(step.mid)];
        for ((q, st), f) in step.quotes.iter().zip(step.states).zip(step.fills) {
            row.extend([
                sig6(q.delta_b),
                sig6(q.delta_a),
                sig6(q.bid_price(step.mid)),
                sig6(q.ask_price(step.mid)),
                st.q.to_string(),
                sig6(st.x),
                u8::from(f.ask).to_string(),
                u8::from(f.bid).to_string(),
            ]);
        }
        if let Err(e) = self.inner.write_record(&row) {
            self.error = Some(e);
        }
    }

    pub fn finish(self) -> Result<(), CliError> {
        if let Some(e) = self.error {
            return Err(CliError::csv(&self.path, e));
        }
        finish(self.inner, &self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        let cases = [
            (64.26, "64.26"),
            (0.845385211375712, "0.845385"),
            (1.490770422751423, "1.49077"),
            (-391.98, "-391.98"),
            (100.0, "100"),
            (123456.7, "123457"),
            (999999.6, "1e+06"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234567, "1.23457e-05"),
            (-0.0, "0"),
            (2.0, "2"),
            (0.5, "0.5"),
        ];
        for (v, want) in cases {
            assert_eq!(sig6(v), want, "{v}");
        }
    }

    #[test]
    fn stats_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stats.csv");
        let row = DealerStats {
            average_spread: 1.4907704,
            mean_profit: 64.3,
            std_profit: 6.0,
            mean_q_t: -0.25,
            std_q_t: 3.5,
        };
        write_stats(&path, &[row]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "agent,average_spread,profit_mean,profit_std,qT_mean,qT_std\n1,1.49077,64.3,6,-0.25,3.5\n"
        );
    }
}
