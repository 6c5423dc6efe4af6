//! Every scheme on the same five-particle system, with the offspring counts
//! and deviations `#^n - N W^n` of one draw.
//!
//!     cargo run --example schemes

use resample_lab::{Resampler, UniformStream, WeightedParticleSystem};

fn main() -> resample_lab::Result<()> {
    let states = vec![-1.3, 0.2, 0.9, -0.4, 2.1];
    let system = WeightedParticleSystem::univariate(states, &[0.13, 0.27, 0.05, 0.31, 0.24])?;
    println!("N W^n = {:?}\n", system.weights().scaled());

    for name in [
        "multinomial",
        "stratified",
        "systematic",
        "residual-multinomial",
        "residual-stratified",
        "ssp",
        "ordered-stratified",
        "ordered-systematic",
        "ordered-alpha:0.5",
    ] {
        let scheme: Resampler = name.parse()?;
        let mut stream = UniformStream::new(2024, 0);
        let r = scheme.resample(&system, &mut stream)?;
        let dev: Vec<String> = r.deviations.iter().map(|d| format!("{d:+.2}")).collect();
        println!(
            "{name:>22}  ancestors {:?}  counts {:?}  deviations [{}]  uniforms {}",
            r.ancestors,
            r.counts,
            dev.join(", "),
            stream.counter()
        );
    }
    Ok(())
}
