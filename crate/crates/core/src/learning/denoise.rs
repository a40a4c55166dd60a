use crate::normal;

/// Output of [`denoise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Denoised {
    /// Estimated effective channel ψ̂ = √(1 + σ²/N₀) · Φ⁻¹(p̂).
    pub psi: f64,
    /// Φ(ψ̂), the de-dithered probability of a +1.
    pub refined: f64,
}

impl Denoised {
    pub fn ln_plus(&self) -> f64 {
        normal::ln_cdf(self.psi)
    }

    pub fn ln_minus(&self) -> f64 {
        normal::ln_cdf(-self.psi)
    }
}

/// Removes a known dither variance from an empirical +1 frequency.
///
/// `dither_var` is on the scale of `noise_power`: a complex power, twice the
/// per-real-component variance.
///
/// `p_hat` is first clamped into `[eps, 1 - eps]` so the quantile is finite.
pub fn denoise(p_hat: f64, dither_var: f64, noise_power: f64, clamp_epsilon: f64) -> Denoised {
    debug_assert!((0.0..=1.0).contains(&p_hat), "p_hat = {p_hat}");
    debug_assert!(dither_var >= 0.0 && noise_power > 0.0);
    debug_assert!(clamp_epsilon > 0.0 && clamp_epsilon < 0.5);
    let clamped = p_hat.clamp(clamp_epsilon, 1.0 - clamp_epsilon);
    let q = normal::quantile(clamped).expect("clamped probability lies inside (0, 1)");
    let psi = (1.0 + dither_var / noise_power).sqrt() * q;
    Denoised {
        psi,
        refined: normal::cdf(psi),
    }
}
