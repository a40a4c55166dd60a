use crate::error::{Error, Result};

/// Physical-layer parameters of the uplink.
///
/// Powers are linear. The SNR is always derived as `ρ / N₀`; use
/// [`SystemConfig::with_snr_db`] to move along an SNR grid at fixed ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    num_rx_antennas: usize,
    num_users: usize,
    modulation_order: usize,
    transmit_power: f64,
    noise_power: f64,
}

impl SystemConfig {
    pub fn new(
        num_rx_antennas: usize,
        num_users: usize,
        modulation_order: usize,
        transmit_power: f64,
        noise_power: f64,
    ) -> Result<Self> {
        if num_users == 0 || num_rx_antennas == 0 {
            return Err(Error::config("antenna and user counts must be positive"));
        }
        if num_rx_antennas < num_users {
            return Err(Error::config(format!(
                "need N_r >= N_u, got N_r = {num_rx_antennas}, N_u = {num_users}"
            )));
        }
        if !matches!(modulation_order, 4 | 16 | 64) {
            return Err(Error::config(format!(
                "unsupported modulation order {modulation_order}; expected 4, 16 or 64"
            )));
        }
        for (name, v) in [
            ("transmit power", transmit_power),
            ("noise power", noise_power),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            num_rx_antennas,
            num_users,
            modulation_order,
            transmit_power,
            noise_power,
        })
    }

    /// ρ = 1 and N₀ chosen so that γ = `snr_db`.
    pub fn from_snr_db(
        num_rx_antennas: usize,
        num_users: usize,
        modulation_order: usize,
        snr_db: f64,
    ) -> Result<Self> {
        Self::new(
            num_rx_antennas,
            num_users,
            modulation_order,
            1.0,
            db_to_linear(-snr_db),
        )
    }

    /// Same system with N₀ reset so that ρ / N₀ equals `snr_db`.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        Self {
            noise_power: self.transmit_power / db_to_linear(snr_db),
            ..*self
        }
    }

    pub fn with_noise_power(&self, noise_power: f64) -> Result<Self> {
        Self::new(
            self.num_rx_antennas,
            self.num_users,
            self.modulation_order,
            self.transmit_power,
            noise_power,
        )
    }

    pub fn num_rx_antennas(&self) -> usize {
        self.num_rx_antennas
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn modulation_order(&self) -> usize {
        self.modulation_order
    }

    pub fn transmit_power(&self) -> f64 {
        self.transmit_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// Length of real-expanded receive vectors, 2N_r.
    pub fn num_components(&self) -> usize {
        2 * self.num_rx_antennas
    }

    /// γ = ρ / N₀ (linear).
    pub fn snr(&self) -> f64 {
        self.transmit_power / self.noise_power
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
