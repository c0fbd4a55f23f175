//! Runs a built-in figure preset and prints the aggregate curve.
//!
//! `cargo run --release --example capacity_vs_snr -- [preset] [trials]`

use cascade_coop::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let preset: Preset = args
        .next()
        .as_deref()
        .unwrap_or("fig-capacity-vs-snr")
        .parse()?;
    let mut config = preset.config();
    if let Some(trials) = args.next() {
        config.num_trials = trials
            .parse()
            .map_err(|_| Error::Config(format!("bad trial count {trials}")))?;
    }
    let output = run_experiment(config, None)?;
    println!("{preset}");
    println!(" P   b  SNR dB  gamma  W_c/W   coop   +/-    ZF    ideal  normalized");
    for row in &output.aggregates {
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "{:2} {:3} {:7.1} {:>6} {:>6} {:>6} {:>5} {:>6} {:>6} {:>8}",
            row.users,
            row.b,
            row.snr_db,
            row.gamma_db.map_or("-".into(), |g| format!("{g}")),
            row.bw_ratio.map_or("-".into(), |w| format!("{w}")),
            show(row.mean_coop),
            show(row.sem_coop),
            show(row.mean_zf),
            show(row.mean_ideal),
            show(row.norm_capacity),
        );
    }
    Ok(())
}
