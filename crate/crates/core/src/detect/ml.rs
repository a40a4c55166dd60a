use super::DetectionResult;
use crate::error::{Error, Result};
use crate::learning::LikelihoodTable;
use crate::model::{ChannelMatrix, QuantizedObservation, ResponseTable, SymbolBook, SystemConfig};
use crate::normal;

/// Scores observations against a likelihood table in the log domain.
///
/// The score of candidate `k` is Σ_i ln p_{k,i}^{(y_i)}. The argmax keeps
/// the lowest index on ties, and a table entry of probability zero that
/// matches an observed sign makes the score `-inf`.
#[derive(Debug, Clone, Copy)]
pub struct LogLikelihoodScorer<'a> {
    table: &'a LikelihoodTable,
}

impl<'a> LogLikelihoodScorer<'a> {
    pub fn new(table: &'a LikelihoodTable) -> Self {
        Self { table }
    }

    pub fn score(&self, y: &[i8], k: usize) -> f64 {
        let lp = self.table.ln_plus_row(k);
        let lm = self.table.ln_minus_row(k);
        y.iter()
            .zip(lp.iter().zip(lm))
            .map(|(&yi, (&p, &m))| if yi > 0 { p } else { m })
            .sum()
    }

    /// `(index, score, degenerate)`.
    pub fn best(&self, y: &[i8]) -> (usize, f64, bool) {
        let mut best = (0, self.score(y, 0));
        for k in 1..self.table.num_symbols() {
            let s = self.score(y, k);
            if s > best.1 {
                best = (k, s);
            }
        }
        (best.0, best.1, best.1 == f64::NEG_INFINITY)
    }
}

fn result(book: &SymbolBook, k: usize, score: f64, degenerate: bool) -> DetectionResult {
    DetectionResult {
        symbol_index: k,
        log_likelihood: score,
        per_user_symbols: book.complex_row(k).to_vec(),
        degenerate,
    }
}

/// ML detection over a learned likelihood table.
pub fn ml_detect_learned(
    y: &QuantizedObservation,
    table: &LikelihoodTable,
    book: &SymbolBook,
) -> Result<DetectionResult> {
    if table.num_symbols() != book.len() || table.components() != y.len() {
        return Err(Error::contract(format!(
            "table is {}x{}, book has {} rows and observation {} entries",
            table.num_symbols(),
            table.components(),
            book.len(),
            y.len()
        )));
    }
    let (k, score, degenerate) = LogLikelihoodScorer::new(table).best(y.values());
    Ok(result(book, k, score, degenerate))
}

/// Optimal one-bit ML with perfect CSI: argmax_k Σ_i ln Φ(y_i ψ_{k,i}) with
/// ψ_{k,i} = √(2ρ/N₀) h_iᵀ s_k.
pub fn ml_detect_csi(
    y: &QuantizedObservation,
    h: &ChannelMatrix,
    book: &SymbolBook,
    config: &SystemConfig,
) -> Result<DetectionResult> {
    if y.len() != config.num_components() {
        return Err(Error::contract(format!(
            "observation has {} entries, expected {}",
            y.len(),
            config.num_components()
        )));
    }
    let responses = ResponseTable::new(h, book, config)?;
    // √ρ is already inside the responses.
    let scale = (2.0 / config.noise_power()).sqrt();
    let mut best = (0, f64::NEG_INFINITY);
    for k in 0..book.len() {
        let s: f64 = y
            .values()
            .iter()
            .zip(responses.row(k))
            .map(|(&yi, &m)| {
                let psi = scale * m;
                normal::ln_cdf(if yi > 0 { psi } else { -psi })
            })
            .sum();
        if k == 0 || s > best.1 {
            best = (k, s);
        }
    }
    Ok(result(book, best.0, best.1, best.1 == f64::NEG_INFINITY))
}

/// The exact likelihood table Φ(ψ_{k,i}) for a known channel.
pub fn csi_table(responses: &ResponseTable, config: &SystemConfig) -> LikelihoodTable {
    let scale = (2.0 / config.noise_power()).sqrt();
    let psi: Vec<f64> = (0..responses.num_symbols())
        .flat_map(|k| responses.row(k).iter().map(move |m| scale * m))
        .collect();
    LikelihoodTable::from_effective_channels(responses.num_symbols(), responses.components(), &psi)
}
