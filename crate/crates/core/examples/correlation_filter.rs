//! Trains a kernelized correlation filter on random features and recovers
//! a known circular shift.

use dfst::cft::{detect, gaussian_label, train, Fft2};
use dfst::FeatureMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dfst::Result<()> {
    let (h, w, c) = (48, 48, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let planes = (0..c).map(|_| (0..h * w).map(|_| rng.random_range(-0.5..0.5)).collect()).collect();
    let x = FeatureMap::from_planes(h, w, planes)?;

    let fft = Fft2::new(h, w);
    let label = fft.forward_real(&gaussian_label(h, w, 24.0, 24.0, 0.1));
    let alpha = train(&fft, &x, &label, 0.2, 1e-2)?;

    for (dy, dx) in [(0, 0), (3, -5), (-7, 2)] {
        let resp = detect(&fft, &alpha, &x, &x.circular_shift(dy, dx), 0.2)?;
        println!("shift ({dy:+}, {dx:+}) -> peak {:?}, value {:.3}", resp.displacement(), resp.max());
    }
    Ok(())
}
