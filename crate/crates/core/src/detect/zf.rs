use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::DetectionResult;
use crate::error::{Error, Result};
use crate::model::{ChannelMatrix, Constellation, QuantizedObservation, SymbolBook};

/// Relative pivot size below which the channel Gram matrix counts as singular.
const RANK_TOLERANCE: f64 = 1e-10;

/// One-bit zero-forcing: x̂ = (H̄ᴴH̄)⁻¹H̄ᴴȳ on the raw ±1 vector, then
/// per-user nearest-point slicing.
///
/// Computed on the real expansion, where ω(H̄ᴴ) = ω(H̄)ᵀ makes the real
/// pseudo-inverse equal to the expansion of the complex one.
#[derive(Debug, Clone)]
pub struct ZfEqualizer {
    pinv: DMatrix<f64>,
    num_users: usize,
}

impl ZfEqualizer {
    pub fn new(h: &ChannelMatrix) -> Result<Self> {
        let hr = h.real();
        let gram = hr.transpose() * hr;
        let chol = gram.clone().cholesky().ok_or_else(|| {
            Error::RankDeficient("channel Gram matrix is not positive definite".into())
        })?;
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| {
            (lo.min(d), hi.max(d))
        });
        if lo <= RANK_TOLERANCE * hi {
            return Err(Error::RankDeficient(format!(
                "Cholesky pivot ratio {:.3e} below tolerance",
                lo / hi
            )));
        }
        Ok(Self {
            pinv: chol.solve(&hr.transpose()),
            num_users: h.num_users(),
        })
    }

    /// Equalized per-user estimates for a real-expanded receive vector.
    pub fn equalize(&self, r: &[f64]) -> Result<Vec<Complex64>> {
        if r.len() != self.pinv.ncols() {
            return Err(Error::contract(format!(
                "receive vector has length {}, expected {}",
                r.len(),
                self.pinv.ncols()
            )));
        }
        let x = &self.pinv * DVector::from_column_slice(r);
        let nu = self.num_users;
        Ok((0..nu).map(|u| Complex64::new(x[u], x[nu + u])).collect())
    }

    /// Equalize a real-valued vector and slice it onto the symbol book.
    pub fn detect_real(&self, r: &[f64], book: &SymbolBook) -> Result<DetectionResult> {
        let x = self.equalize(r)?;
        let constellation: &Constellation = book.constellation();
        let indices: Vec<usize> = x.iter().map(|&v| constellation.nearest(v)).collect();
        let k = book.index_of(&indices);
        let distance: f64 = x
            .iter()
            .zip(book.complex_row(k))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok(DetectionResult {
            symbol_index: k,
            log_likelihood: -distance,
            per_user_symbols: book.complex_row(k).to_vec(),
            degenerate: false,
        })
    }

    pub fn detect(&self, y: &QuantizedObservation, book: &SymbolBook) -> Result<DetectionResult> {
        let r: Vec<f64> = y.values().iter().map(|&v| f64::from(v)).collect();
        self.detect_real(&r, book)
    }
}

/// ZF detection for a single observation; see [`ZfEqualizer`].
pub fn zf_detect(
    y: &QuantizedObservation,
    h: &ChannelMatrix,
    book: &SymbolBook,
    constellation: &Constellation,
) -> Result<DetectionResult> {
    if constellation != book.constellation() {
        return Err(Error::contract(
            "constellation does not match the symbol book",
        ));
    }
    ZfEqualizer::new(h)?.detect(y, book)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::model::{one_bit_quantize, SystemConfig};

    #[test]
    fn noiseless_unquantized_is_exact() {
        for (nr, nu, m) in [(8, 4, 4), (6, 2, 16), (4, 4, 4)] {
            let config = SystemConfig::new(nr, nu, m, 1.0, 1.0).unwrap();
            let book = SymbolBook::enumerate(&config).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(nr as u64);
            let h = ChannelMatrix::rayleigh(&config, &mut rng);
            let zf = ZfEqualizer::new(&h).unwrap();
            for k in (0..book.len()).step_by(7) {
                let r = h.noiseless_received(book.real_row(k), &config).unwrap();
                let x = zf.equalize(&r).unwrap();
                for (a, b) in x.iter().zip(book.complex_row(k)) {
                    assert!((a - b).norm() < 1e-9);
                }
                assert_eq!(zf.detect_real(&r, &book).unwrap().symbol_index, k);
            }
        }
    }

    #[test]
    fn single_user_slices_matched_filter() {
        let config = SystemConfig::new(4, 1, 4, 1.0, 1.0).unwrap();
        let book = SymbolBook::enumerate(&config).unwrap();
        let h = ChannelMatrix::rayleigh(&config, &mut ChaCha8Rng::seed_from_u64(3));
        let y = one_bit_quantize(&[0.2, -0.4, 1.0, 0.3, -0.1, 0.5, -2.0, 0.7]).unwrap();
        let got = zf_detect(&y, &h, &book, book.constellation()).unwrap();
        // With one user x̂ ∝ h̄ᴴȳ; the positive scale does not move the quadrant.
        let hc = h.complex();
        let ybar: Vec<Complex64> = (0..4)
            .map(|i| Complex64::new(y.values()[i] as f64, y.values()[4 + i] as f64))
            .collect();
        let mf: Complex64 = (0..4).map(|i| hc[(i, 0)].conj() * ybar[i]).sum();
        assert_eq!(got.symbol_index, book.constellation().nearest(mf));
    }

    #[test]
    fn rank_deficient_channel_rejected() {
        let col = [
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.3, 0.2),
            Complex64::new(0.7, -1.0),
        ];
        let h = DMatrix::from_fn(3, 2, |i, _| col[i]);
        let err = ZfEqualizer::new(&ChannelMatrix::from_complex(h)).unwrap_err();
        assert!(matches!(err, Error::RankDeficient(_)));
    }
}
