//! Exact Skellam law of the net count next to its Gaussian approximation.
//!
//! cargo run --release --example skellam_vs_gaussian

use molcomp::stats::{gaussian_loglik, skellam_pmf, IntensityPair};

fn main() -> molcomp::Result<()> {
    for (a, b) in [(2.0, 1.0), (10.0, 4.0), (60.0, 40.0), (500.0, 300.0)] {
        let pair = IntensityPair::new(a, b)?;
        let (mu, sd) = (pair.mean(), pair.variance().sqrt());
        let lo = (mu - 8.0 * sd).floor() as i64;
        let hi = (mu + 8.0 * sd).ceil() as i64;
        let mut tv = 0.0;
        for n in lo..=hi {
            tv += (skellam_pmf(&pair, n)? - gaussian_loglik(n as f64, &pair)?.exp()).abs();
        }
        println!(
            "lambda_A={a:>6} lambda_B={b:>6}  P(0): skellam {:.5} gauss {:.5}  TV ~ {:.4}",
            skellam_pmf(&pair, 0)?,
            gaussian_loglik(0.0, &pair)?.exp(),
            tv / 2.0
        );
    }
    Ok(())
}
