use num_complex::Complex64;

use super::{expand::real_expand_vector, Constellation, SystemConfig};
use crate::error::{Error, Result};

/// Default upper bound on K = M^{N_u}.
pub const DEFAULT_MAX_SYMBOLS: usize = 1 << 20;

/// All K = M^{N_u} candidate symbol vectors.
///
/// Row `k` is the k-th combination of per-user constellation indices in
/// lexicographic order with user 0 as the most significant digit, so
/// `k = Σ_u idx_u · M^{N_u-1-u}`. Indices are zero-based.
#[derive(Debug, Clone)]
pub struct SymbolBook {
    config: SystemConfig,
    constellation: Constellation,
    complex: Vec<Complex64>,
    real: Vec<f64>,
    count: usize,
}

impl SymbolBook {
    pub fn enumerate(config: &SystemConfig) -> Result<Self> {
        Self::enumerate_with_cap(config, DEFAULT_MAX_SYMBOLS)
    }

    pub fn enumerate_with_cap(config: &SystemConfig, cap: usize) -> Result<Self> {
        let m = config.modulation_order();
        let nu = config.num_users();
        let count = (m as u128).checked_pow(nu as u32).unwrap_or(u128::MAX);
        if count > cap as u128 {
            return Err(Error::Size { count, cap });
        }
        let count = count as usize;
        let constellation = Constellation::qam(m)?;

        let mut complex = Vec::with_capacity(count * nu);
        let mut real = Vec::with_capacity(count * 2 * nu);
        let mut digits = vec![0usize; nu];
        for k in 0..count {
            decompose_into(k, m, &mut digits);
            let row: Vec<Complex64> = digits.iter().map(|&d| constellation.point(d)).collect();
            real.extend(real_expand_vector(&row));
            complex.extend(row);
        }
        Ok(Self {
            config: *config,
            constellation,
            complex,
            real,
            count,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    /// K.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn num_users(&self) -> usize {
        self.config.num_users()
    }

    pub fn complex_row(&self, k: usize) -> &[Complex64] {
        let nu = self.num_users();
        &self.complex[k * nu..(k + 1) * nu]
    }

    /// ω(s_k), length 2N_u.
    pub fn real_row(&self, k: usize) -> &[f64] {
        let w = 2 * self.num_users();
        &self.real[k * w..(k + 1) * w]
    }

    /// Per-user constellation indices of row `k`.
    pub fn user_indices(&self, k: usize) -> Vec<usize> {
        let mut digits = vec![0; self.num_users()];
        decompose_into(k, self.constellation.order(), &mut digits);
        digits
    }

    /// Inverse of [`SymbolBook::user_indices`].
    pub fn index_of(&self, user_indices: &[usize]) -> usize {
        let m = self.constellation.order();
        user_indices.iter().fold(0, |acc, &d| acc * m + d)
    }
}

fn decompose_into(mut k: usize, m: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = k % m;
        k /= m;
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn cfg(nu: usize, m: usize) -> SystemConfig {
        SystemConfig::new(8, nu, m, 1.0, 1.0).unwrap()
    }

    #[test]
    fn sizes() {
        assert_eq!(SymbolBook::enumerate(&cfg(4, 4)).unwrap().len(), 256);
        assert_eq!(SymbolBook::enumerate(&cfg(2, 16)).unwrap().len(), 256);
    }

    #[test]
    fn single_user_equals_constellation() {
        let book = SymbolBook::enumerate(&cfg(1, 4)).unwrap();
        for k in 0..4 {
            assert_eq!(book.complex_row(k)[0], book.constellation().point(k));
        }
    }

    #[test]
    fn two_users_are_distinct_and_ordered() {
        let book = SymbolBook::enumerate(&cfg(2, 4)).unwrap();
        assert_eq!(book.len(), 16);
        let rows: HashSet<Vec<(u64, u64)>> = (0..16)
            .map(|k| {
                book.complex_row(k)
                    .iter()
                    .map(|c| (c.re.to_bits(), c.im.to_bits()))
                    .collect()
            })
            .collect();
        assert_eq!(rows.len(), 16);
        assert_eq!(book.user_indices(6), vec![1, 2]);
        assert_eq!(book.index_of(&[1, 2]), 6);
    }

    #[test]
    fn real_rows_are_expansions() {
        let book = SymbolBook::enumerate(&cfg(3, 4)).unwrap();
        for k in 0..book.len() {
            assert_eq!(
                book.real_row(k),
                real_expand_vector(book.complex_row(k)).as_slice()
            );
        }
    }

    #[test]
    fn cap_enforced() {
        let err = SymbolBook::enumerate_with_cap(&cfg(4, 4), 255).unwrap_err();
        assert!(matches!(err, Error::Size { count: 256, .. }));
        let c = SystemConfig::new(16, 16, 64, 1.0, 1.0).unwrap();
        assert!(matches!(SymbolBook::enumerate(&c), Err(Error::Size { .. })));
    }
}
