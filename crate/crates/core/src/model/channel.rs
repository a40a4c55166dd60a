use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{expand::real_expand_matrix, SymbolBook, SystemConfig};
use crate::error::{Error, Result};

/// Channel in both complex (N_r × N_u) and real-expanded (2N_r × 2N_u) form.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    complex: DMatrix<Complex64>,
    real: DMatrix<f64>,
}

impl ChannelMatrix {
    pub fn from_complex(complex: DMatrix<Complex64>) -> Self {
        let real = real_expand_matrix(&complex);
        Self { complex, real }
    }

    /// i.i.d. CN(0, 1) entries, drawn row by row (real part, then imaginary).
    pub fn rayleigh<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Self {
        let (nr, nu) = (config.num_rx_antennas(), config.num_users());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut entries = Vec::with_capacity(nr * nu);
        for _ in 0..nr * nu {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            entries.push(Complex64::new(h * re, h * im));
        }
        Self::from_complex(DMatrix::from_row_slice(nr, nu, &entries))
    }

    pub fn complex(&self) -> &DMatrix<Complex64> {
        &self.complex
    }

    pub fn real(&self) -> &DMatrix<f64> {
        &self.real
    }

    pub fn num_rx_antennas(&self) -> usize {
        self.complex.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.complex.ncols()
    }

    /// √ρ · H · s for a real-expanded symbol vector.
    pub fn noiseless_received(&self, s_real: &[f64], config: &SystemConfig) -> Result<Vec<f64>> {
        self.check_dims(config)?;
        if s_real.len() != self.real.ncols() {
            return Err(Error::contract(format!(
                "symbol vector has length {}, channel expects {}",
                s_real.len(),
                self.real.ncols()
            )));
        }
        let gain = config.transmit_power().sqrt();
        Ok((0..self.real.nrows())
            .map(|i| {
                gain * self
                    .real
                    .row(i)
                    .iter()
                    .zip(s_real)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect())
    }

    fn check_dims(&self, config: &SystemConfig) -> Result<()> {
        if self.num_rx_antennas() != config.num_rx_antennas()
            || self.num_users() != config.num_users()
        {
            return Err(Error::contract(format!(
                "channel is {}x{}, config expects {}x{}",
                self.num_rx_antennas(),
                self.num_users(),
                config.num_rx_antennas(),
                config.num_users()
            )));
        }
        Ok(())
    }
}

/// Noise-free responses √ρ·H·s_k for every row of a symbol book, stored
/// row-major as K × 2N_r.
#[derive(Debug, Clone)]
pub struct ResponseTable {
    values: Vec<f64>,
    components: usize,
}

impl ResponseTable {
    pub fn new(h: &ChannelMatrix, book: &SymbolBook, config: &SystemConfig) -> Result<Self> {
        let mut values = Vec::with_capacity(book.len() * config.num_components());
        for k in 0..book.len() {
            values.extend(h.noiseless_received(book.real_row(k), config)?);
        }
        Ok(Self {
            values,
            components: config.num_components(),
        })
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.components..(k + 1) * self.components]
    }

    pub fn num_symbols(&self) -> usize {
        self.values.len() / self.components
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

/// r = √ρ·H·s + z + d.
///
/// `z` has per-component variance N₀/2 and `d_i` variance `dither_vars[i]`.
/// The two Gaussians are independent, so each component is drawn once with
/// the combined variance; passing `None` consumes the stream exactly like an
/// all-zero dither vector.
pub fn synthesize_received<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    s_real: &[f64],
    config: &SystemConfig,
    dither_vars: Option<&[f64]>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut r = h.noiseless_received(s_real, config)?;
    if let Some(d) = dither_vars {
        if d.len() != r.len() {
            return Err(Error::contract(format!(
                "dither vector has length {}, expected {}",
                d.len(),
                r.len()
            )));
        }
        if d.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::contract("dither variances must be nonnegative"));
        }
    }
    let half_n0 = 0.5 * config.noise_power();
    for (i, ri) in r.iter_mut().enumerate() {
        let var = half_n0 + dither_vars.map_or(0.0, |d| d[i]);
        let n: f64 = rng.sample(StandardNormal);
        *ri += var.sqrt() * n;
    }
    Ok(r)
}
