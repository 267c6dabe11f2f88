//! Fits the chirp pair (alpha_h, kappa) of the preset VCSEL to a 23 GHz
//! power-fading null after 1 km, then reports the null each core of the
//! measured end-to-end response shows with that pair.
//!
//! Usage: `cargo run --release -p mcfpam-bench --example fit_chirp [depth_db [ripple_db]]`

use mcfpam_bench::{characterize_link, Scenario};
use mcfpam_core::vcsel::fit_chirp;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let depth: f64 = std::env::args().nth(1).map_or(Ok(-19.0), |a| a.parse())?;
    let mut s = Scenario::preset("mcf1km_50g")?;
    if let Some(r) = std::env::args().nth(2) {
        s.mcf.core_variation.max_db = r.parse()?;
    }
    let (alpha, kappa) = fit_chirp(&s.vcsel, 23e9, depth, s.mcf.total_dispersion())?;
    println!("alpha_h = {alpha}\nkappa = {kappa}");
    s.vcsel.alpha_h = alpha;
    s.vcsel.kappa = kappa;
    for (k, h) in characterize_link(&s)?.iter().enumerate() {
        match h.first_null(10.0) {
            Some(n) => println!("core {k}: {:.2} GHz {:.1} dB", n.freq / 1e9, n.depth_db),
            None => println!("core {k}: no null"),
        }
    }
    let mut ten = Scenario::preset("mcf10km_dcm_50g")?;
    ten.vcsel = s.vcsel.clone();
    if let Some(n) = characterize_link(&ten)?[0].first_null(10.0) {
        println!(
            "10 km + DCM core 0: {:.2} GHz {:.1} dB",
            n.freq / 1e9,
            n.depth_db
        );
    }
    Ok(())
}
