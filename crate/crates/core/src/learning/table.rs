use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::normal;

/// Per-symbol, per-component likelihoods p_{k,i}^{(+1)}.
///
/// Alongside the probabilities the table keeps ln p^{(+1)} and ln p^{(-1)}
/// computed in the log domain at construction time, so tables whose
/// probabilities round to 0 or 1 in `f64` still score correctly. A naive
/// table with an empirical zero carries `-inf` there on purpose.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTable {
    num_symbols: usize,
    components: usize,
    p_plus: Vec<f64>,
    ln_plus: Vec<f64>,
    ln_minus: Vec<f64>,
    raw_frequency: Option<Vec<f64>>,
    train: Option<TrainConfig>,
}

impl LikelihoodTable {
    pub(crate) fn from_parts(
        num_symbols: usize,
        components: usize,
        p_plus: Vec<f64>,
        ln_plus: Vec<f64>,
        ln_minus: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(p_plus.len(), num_symbols * components);
        debug_assert_eq!(ln_plus.len(), p_plus.len());
        debug_assert_eq!(ln_minus.len(), p_plus.len());
        Self {
            num_symbols,
            components,
            p_plus,
            ln_plus,
            ln_minus,
            raw_frequency: None,
            train: None,
        }
    }

    /// Table from plain probabilities; logs are taken directly.
    pub fn from_probabilities(
        num_symbols: usize,
        components: usize,
        p_plus: Vec<f64>,
    ) -> Result<Self> {
        if p_plus.len() != num_symbols * components {
            return Err(Error::contract(format!(
                "expected {} probabilities, got {}",
                num_symbols * components,
                p_plus.len()
            )));
        }
        if let Some(p) = p_plus.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::contract(format!("probability {p} outside [0, 1]")));
        }
        let ln_plus = p_plus.iter().map(|p| p.ln()).collect();
        let ln_minus = p_plus.iter().map(|p| (-p).ln_1p()).collect();
        Ok(Self::from_parts(
            num_symbols,
            components,
            p_plus,
            ln_plus,
            ln_minus,
        ))
    }

    /// The exact table p = Φ(ψ) for given effective channels ψ_{k,i}.
    pub fn from_effective_channels(num_symbols: usize, components: usize, psi: &[f64]) -> Self {
        assert_eq!(psi.len(), num_symbols * components);
        Self::from_parts(
            num_symbols,
            components,
            psi.iter().map(|&x| normal::cdf(x)).collect(),
            psi.iter().map(|&x| normal::ln_cdf(x)).collect(),
            psi.iter().map(|&x| normal::ln_cdf(-x)).collect(),
        )
    }

    pub(crate) fn with_raw_frequency(mut self, raw: Vec<f64>) -> Self {
        debug_assert_eq!(raw.len(), self.p_plus.len());
        self.raw_frequency = Some(raw);
        self
    }

    pub(crate) fn with_train(mut self, train: TrainConfig) -> Self {
        self.train = Some(train);
        self
    }

    /// K.
    pub fn num_symbols(&self) -> usize {
        self.num_symbols
    }

    /// 2N_r.
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn p_plus(&self, k: usize, i: usize) -> f64 {
        self.p_plus[k * self.components + i]
    }

    pub fn p_minus(&self, k: usize, i: usize) -> f64 {
        1.0 - self.p_plus(k, i)
    }

    pub fn p_plus_row(&self, k: usize) -> &[f64] {
        &self.p_plus[k * self.components..(k + 1) * self.components]
    }

    pub fn ln_plus_row(&self, k: usize) -> &[f64] {
        &self.ln_plus[k * self.components..(k + 1) * self.components]
    }

    pub fn ln_minus_row(&self, k: usize) -> &[f64] {
        &self.ln_minus[k * self.components..(k + 1) * self.components]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p_plus
    }

    /// Pre-clamp empirical +1 frequencies over the whole training block,
    /// present for learned tables.
    pub fn raw_frequency(&self) -> Option<&[f64]> {
        self.raw_frequency.as_deref()
    }

    pub fn train_config(&self) -> Option<&TrainConfig> {
        self.train.as_ref()
    }

    /// Both log-likelihoods are finite for every entry.
    pub fn is_fully_trained(&self) -> bool {
        self.ln_plus
            .iter()
            .chain(&self.ln_minus)
            .all(|v| v.is_finite())
    }

    /// Writes the table as CSV: a header `k,p0,…,p{2N_r-1}` followed by one
    /// row per symbol index holding p^{(+1)} in shortest round-trip decimal
    /// form.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        write!(out, "k")?;
        for i in 0..self.components {
            write!(out, ",p{i}")?;
        }
        writeln!(out)?;
        for k in 0..self.num_symbols {
            write!(out, "{k}")?;
            for p in self.p_plus_row(k) {
                write!(out, ",{p:e}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a table written by [`LikelihoodTable::write_csv`]. Logs are
    /// recomputed from the stored probabilities.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            msg,
        };
        let mut reader = csv::Reader::from_path(path)?;
        let components = reader.headers()?.len().saturating_sub(1);
        let mut p = Vec::new();
        let mut rows = 0;
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let k: usize = record[0]
                .parse()
                .map_err(|e| parse_err(format!("row {line}: bad index: {e}")))?;
            if k != line {
                return Err(parse_err(format!("row {line} has index {k}")));
            }
            for field in record.iter().skip(1) {
                p.push(
                    field
                        .parse::<f64>()
                        .map_err(|e| parse_err(format!("row {line}: {e}")))?,
                );
            }
            rows += 1;
        }
        Self::from_probabilities(rows, components, p)
    }
}
