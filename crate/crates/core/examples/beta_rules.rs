//! Prints a Markdown table comparing the two `cos β` rules against the
//! numerical CHSH maximum.

use chsh_core::chsh::{chsh_value, gisin_angles, BetaRule};
use chsh_core::optimizer::{maximize_chsh, OptimizerConfig};

fn value(c1: f64, c2: f64, rule: BetaRule) -> f64 {
    let settings = gisin_angles(c1, c2, rule).unwrap().settings();
    chsh_value(c1, c2, &settings).unwrap().s_value
}

fn main() {
    println!("| c1 | c1 c2 | stationary | linear product | optimizer | stationary - linear |");
    println!("|---:|---:|---:|---:|---:|---:|");
    for c1 in [
        0.05,
        0.1,
        0.2,
        0.3,
        0.4,
        0.5,
        0.6,
        0.7,
        std::f64::consts::FRAC_1_SQRT_2,
        0.8,
        0.9,
        0.95,
        0.99,
    ] {
        let c2 = (1.0f64 - c1 * c1).sqrt();
        let stationary = value(c1, c2, BetaRule::Stationary);
        let linear = value(c1, c2, BetaRule::LinearProduct);
        let best = maximize_chsh(c1, c2, &OptimizerConfig::default())
            .unwrap()
            .best_s;
        println!(
            "| {c1:.4} | {:.4} | {stationary:.9} | {linear:.9} | {best:.9} | {:.3e} |",
            c1 * c2,
            stationary - linear
        );
    }
}
