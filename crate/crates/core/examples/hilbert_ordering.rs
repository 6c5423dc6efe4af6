//! The Hilbert codec and the ordering it induces on particles in R^2.
//!
//!     cargo run --example hilbert_ordering

use resample_lab::hilbert::{hilbert_sort, psi_tilde, CubifyingMap, HilbertCodec};
use resample_lab::{UniformStream, WeightedParticleSystem};

fn main() -> resample_lab::Result<()> {
    // The order-2 curve on the 4 x 4 grid.
    let codec = HilbertCodec::new(2, 2)?;
    let mut grid = [[0u64; 4]; 4];
    for key in 0..codec.key_count() {
        let c = codec.decode_cell(key)?;
        grid[c[1] as usize][c[0] as usize] = key;
    }
    println!("keys on the 4x4 grid (row = x2, top row is x2 = 3):");
    for row in grid.iter().rev() {
        println!("  {row:>2?}");
    }

    // psi~ squeezes R into (0, 1) before encoding.
    for x in [-10.0, -1.0, 0.0, 1.0, 10.0] {
        println!("psi~({x:>5}) = {:.6}", psi_tilde(x)?);
    }

    let mut s = UniformStream::new(3, 0);
    let states: Vec<f64> = (0..16).map(|_| s.next_normal()).collect();
    let system = WeightedParticleSystem::new(states, 2, &[1.0; 8])?;
    let perm = hilbert_sort(&system, &CubifyingMap::real_line(2), &HilbertCodec::for_dim(2)?)?;
    println!("\nparticles in Hilbert order:");
    for &i in &perm {
        let x = system.state(i);
        println!("  #{i}  ({:+.3}, {:+.3})", x[0], x[1]);
    }
    Ok(())
}
