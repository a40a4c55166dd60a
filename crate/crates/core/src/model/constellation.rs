use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unit-energy square QAM alphabet.
///
/// Points are ordered row-major over the I/Q grid, most negative first:
/// index `a * L + b` has real level `a` and imaginary level `b`, where
/// `L = √M` and levels run `-(L-1), -(L-3), …, L-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    side: usize,
    scale: f64,
}

impl Constellation {
    pub fn qam(order: usize) -> Result<Self> {
        let side = match order {
            4 => 2,
            16 => 4,
            64 => 8,
            _ => {
                return Err(Error::config(format!(
                    "unsupported modulation order {order}; expected 4, 16 or 64"
                )))
            }
        };
        // Mean energy of the unnormalised {±1, ±3, …} grid is 2(M-1)/3.
        let scale = (1.5 / (order as f64 - 1.0)).sqrt();
        let level = |a: usize| (2.0 * a as f64 - (side as f64 - 1.0)) * scale;
        let points = (0..side)
            .flat_map(|a| (0..side).map(move |b| Complex64::new(level(a), level(b))))
            .collect();
        Ok(Self {
            points,
            side,
            scale,
        })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// Index of the point closest to `x` in Euclidean distance.
    ///
    /// On a square grid this separates into two per-axis roundings; ties
    /// resolve toward the lower level.
    pub fn nearest(&self, x: Complex64) -> usize {
        let axis = |v: f64| {
            let u = (v / self.scale + (self.side as f64 - 1.0)) / 2.0;
            // Round half down so the result matches a first-minimum scan.
            let r = (u - 0.5).ceil();
            r.clamp(0.0, (self.side - 1) as f64) as usize
        };
        axis(x.re) * self.side + axis(x.im)
    }
}
