//! Generate a random unitary decoding codebook, store it, reload it and use
//! nested prefixes of it to select decoders for one channel.

use cascade_coop::precoding::GramInverse;
use cascade_coop::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let users = 4;
    let codebook = generate_codebook(users, 10, &mut ChaCha20Rng::seed_from_u64(1))?;
    println!("{} codewords of size {users}x{users}", codebook.len());

    let dir = std::env::temp_dir().join("cascade-coop-codebook-example");
    std::fs::create_dir_all(&dir)?;
    let binary = dir.join("codebook.bin");
    codebook.save(&binary)?;
    let reloaded = DecodingCodebook::load(&binary)?;
    assert_eq!(reloaded, codebook);
    println!(
        "binary round trip: {} bytes",
        std::fs::metadata(&binary)?.len()
    );

    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let env = draw_environment(64, 20, 0.0, std::f64::consts::PI, &mut rng)?;
    let w = inner_precoder(&analytic_covariance(&env), 6)?;
    let h_e = effective_channel(&w, &sample_channel(&env, users, &mut rng)?)?;
    let n0 = 10f64.powf(0.5);

    let scores = CodewordScores::new(&reloaded, &GramInverse::new(&h_e)?)?;
    let ideal = ideal_cooperation_snr(&eigen_spectrum(&h_e)?, n0)?;
    println!("ideal average SNR {ideal:.4}");
    for bits in [0u32, 2, 4, 6, 8, 10] {
        let (index, score) = scores.best_in_prefix(1 << bits);
        println!(
            "b={bits:2}: codeword {index:4}, average SNR {:.4} ({:.1}% of ideal)",
            score / n0,
            100.0 * score / n0 / ideal
        );
    }
    Ok(())
}
