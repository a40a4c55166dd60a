//! Learn likelihood tables from one-bit pilots on a single channel and
//! detect a batch of data symbols with every detector.
//!
//! ```text
//! cargo run --release --example quickstart -- 5
//! ```
//!
//! The optional argument is the SNR in dB (default 0).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use onebit::detect::{ml_detect_csi, ml_detect_learned, ZfEqualizer};
use onebit::learning::{
    count_undertrained, learn_dl, learn_idl, learn_naive, LikelihoodTable, TrainConfig,
};
use onebit::model::{
    one_bit_quantize, synthesize_received, ChannelMatrix, SymbolBook, SystemConfig,
};

fn main() -> onebit::Result<()> {
    let snr_db: f64 = std::env::args()
        .nth(1)
        .map_or(0.0, |s| s.parse().expect("SNR in dB"));
    let config = SystemConfig::from_snr_db(32, 4, 4, snr_db)?;
    let book = SymbolBook::enumerate(&config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = ChannelMatrix::rayleigh(&config, &mut rng);
    let n0 = config.noise_power();

    let naive = learn_naive(
        &book,
        &h,
        &config,
        &TrainConfig::single_block(30, n0),
        &mut rng,
    )?;
    let dl = learn_dl(
        &book,
        &h,
        &config,
        &TrainConfig::single_block(30, n0),
        0.5,
        &mut rng,
    )?;
    let (idl, states) = learn_idl(
        &book,
        &h,
        &config,
        &TrainConfig::idl(30, 3, 0.5, n0),
        &mut rng,
    )?;
    let dithered = states
        .iter()
        .flat_map(|s| &s.variances)
        .filter(|&&v| v > 0.0)
        .count();
    println!(
        "{} symbols x {} components, {} (symbol, component) pairs ended with dither",
        book.len(),
        config.num_components(),
        dithered
    );
    let undertrained = |t: &LikelihoodTable| {
        t.raw_frequency()
            .map_or(0.0, |f| count_undertrained(f, t.components()))
    };
    println!(
        "undertrained components per symbol: naive {:.2}, dl {:.2}, idl3 {:.2}",
        undertrained(&naive),
        undertrained(&dl),
        undertrained(&idl)
    );

    let zf = ZfEqualizer::new(&h)?;
    let symbols = 2000;
    let mut errors = [0usize; 5];
    for _ in 0..symbols {
        let k = rng.gen_range(0..book.len());
        let r = synthesize_received(&h, book.real_row(k), &config, None, &mut rng)?;
        let y = one_bit_quantize(&r)?;
        let sent = book.user_indices(k);
        let decisions = [
            ml_detect_learned(&y, &naive, &book)?,
            ml_detect_learned(&y, &dl, &book)?,
            ml_detect_learned(&y, &idl, &book)?,
            zf.detect(&y, &book)?,
            ml_detect_csi(&y, &h, &book, &config)?,
        ];
        for (e, d) in errors.iter_mut().zip(&decisions) {
            let got = book.user_indices(d.symbol_index);
            *e += got.iter().zip(&sent).filter(|(a, b)| a != b).count();
        }
    }
    let users = symbols * config.num_users();
    println!("SER over {users} user symbols at {snr_db} dB:");
    for (name, e) in ["naive", "dl", "idl3", "zf", "csi-ml"].iter().zip(errors) {
        println!("  {name:>7}: {:.4}", e as f64 / users as f64);
    }
    Ok(())
}
