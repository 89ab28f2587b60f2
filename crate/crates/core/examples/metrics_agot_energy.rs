//! The analytic cost model: training time from skip fractions, normalized
//! time, accuracy gain over time (AGOT), and the energy / CO2e estimate.

use lossgate::metrics::{energy_co2, Energy};
use lossgate::{agot, t_norm, total_time, AgotParams, EnergyParams, SkipFractions, TimingModel};

fn main() -> lossgate::Result<()> {
    let timing = TimingModel::new(1.0, 2.0)?;
    let batches = 1_000;
    let t_all = total_time(SkipFractions::new(0.0, 0.0)?, timing, batches)?;

    println!(
        "{:>8} {:>8} {:>10} {:>8} {:>8}",
        "alpha_b", "alpha_fb", "T", "T_norm", "AGOT"
    );
    let params = AgotParams::new(0.50, 0.90);
    for (alpha_b, alpha_fb, accuracy) in [(0.0, 0.0, 0.90), (0.2, 0.0, 0.90), (0.1, 0.6, 0.88), (0.05, 0.85, 0.85)] {
        let t = total_time(SkipFractions::new(alpha_b, alpha_fb)?, timing, batches)?;
        let tn = t_norm(t, t_all)?;
        println!(
            "{alpha_b:>8.2} {alpha_fb:>8.2} {t:>10.1} {tn:>8.3} {:>8.4}",
            agot(accuracy, tn, params)?
        );
    }

    // Ignoring time entirely leaves the normalized accuracy gain.
    println!("eps = 1: {:.3}", agot(0.88, 0.25, params.with_epsilon(1.0))?);

    let Energy { kwh, co2e_lbs } = energy_co2(EnergyParams::new(100.0, 50.0, 250.0, 1.0, 10.0));
    println!("10 h at 100 W CPU + 50 W DRAM + 1 x 250 W GPU: {kwh:.2} kWh, {co2e_lbs:.3} lbs CO2e");
    Ok(())
}
