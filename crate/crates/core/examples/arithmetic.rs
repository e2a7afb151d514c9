//! Addition, subtraction, multiplication and division carried out by the
//! channel itself.
//!
//! cargo run --release --example arithmetic

use molcomp::encoder::{
    decode_division, decode_result, plan_operation, DecodeContext, Operation, ValueEncoding,
};
use molcomp::harness::{run_arithmetic_demo, ExperimentConfig};

fn main() -> molcomp::Result<()> {
    // ideal channel: every released molecule is counted
    let enc = ValueEncoding::with_combinations(100, 8)?;
    let ctx = DecodeContext::new(100.0)?;
    for (op, a, b) in [
        (Operation::Add, 3, -5),
        (Operation::Sub, 3, -5),
        (Operation::Mul, -4, 3),
        (Operation::Div, 7, 2),
    ] {
        let plan = plan_operation(op, &[a, b], &enc)?;
        let counts = plan.expected_counts(1.0, 1.0);
        let got = decode_result(&counts, &plan, &ctx)?;
        let extra = match op {
            Operation::Div => {
                let d = decode_division(&counts, &plan, &ctx, enc.scale())?;
                format!(" remainder {}", d.remainder)
            }
            _ => String::new(),
        };
        println!("{a} {} {b} = {got}{extra} ({} intervals)", op.symbol(), plan.intervals);
    }

    let cfg = ExperimentConfig {
        trials: 200,
        ..ExperimentConfig::default()
    };
    println!("\nover the diffusion channel at {} dB:", cfg.arithmetic.snr_db);
    for r in run_arithmetic_demo(&cfg)? {
        println!(
            "  {:>2} {} {:>2} = {:>3}  noiseless {:>3}  accuracy {:.3}",
            r.a,
            r.op.symbol(),
            r.b,
            r.expected,
            r.noiseless,
            r.accuracy()
        );
    }
    Ok(())
}
