//! Physical-layer types and primitives for the one-bit uplink.

mod channel;
mod config;
mod constellation;
pub mod expand;
mod quantize;
pub mod stream;
mod symbols;

pub use channel::{synthesize_received, ChannelMatrix, ResponseTable};
pub use config::{db_to_linear, linear_to_db, SystemConfig};
pub use constellation::Constellation;
pub use expand::{real_expand_matrix, real_expand_vector};
pub use quantize::{one_bit_quantize, sign, QuantizedObservation};
pub use symbols::{SymbolBook, DEFAULT_MAX_SYMBOLS};
