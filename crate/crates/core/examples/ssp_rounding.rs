//! Srinivasan's randomized rounding: integer-valued, sum-preserving and
//! unbiased. Averages over many roundings converge to the input.
//!
//!     cargo run --example ssp_rounding

use resample_lab::resample::ssp_round;
use resample_lab::UniformStream;

fn main() -> resample_lab::Result<()> {
    let xi = [0.3, 1.7, 0.0, 2.25, 0.75];
    let mut stream = UniformStream::new(1, 0);
    println!("input  {xi:?}");
    for _ in 0..5 {
        println!("round  {:?}", ssp_round(&xi, &mut stream)?);
    }

    let reps = 200_000;
    let mut mean = vec![0.0; xi.len()];
    for _ in 0..reps {
        for (m, c) in mean.iter_mut().zip(ssp_round(&xi, &mut stream)?) {
            *m += c as f64 / reps as f64;
        }
    }
    println!("mean of {reps} roundings  {mean:.3?}");
    Ok(())
}
