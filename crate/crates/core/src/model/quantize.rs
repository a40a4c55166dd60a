use crate::error::{Error, Result};

/// One-bit quantized real-expanded observation; every entry is +1 or -1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedObservation {
    values: Vec<i8>,
    time_index: usize,
}

impl QuantizedObservation {
    /// Entries other than ±1 are rejected.
    pub fn from_signs(values: Vec<i8>, time_index: usize) -> Result<Self> {
        if values.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::contract("quantized entries must be +1 or -1"));
        }
        Ok(Self { values, time_index })
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn with_time_index(mut self, t: usize) -> Self {
        self.time_index = t;
        self
    }
}

/// Q(x) = +1 if x >= 0 else -1.
#[inline]
pub fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

pub fn one_bit_quantize(r: &[f64]) -> Result<QuantizedObservation> {
    if let Some(bad) = r.iter().find(|x| !x.is_finite()) {
        return Err(Error::contract(format!(
            "cannot quantize non-finite value {bad}"
        )));
    }
    Ok(QuantizedObservation {
        values: r.iter().map(|&x| sign(x)).collect(),
        time_index: 0,
    })
}
