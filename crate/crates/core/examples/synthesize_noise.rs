//! Synthesize a band-limited Johnson noise record and check its spectrum.

use kljn::noise::{periodogram, BandLimitedSynth, NoiseSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kljn::Result<()> {
    let (psd, bandwidth, fs) = (2.0, 1.0, 8.0);
    let spec = NoiseSpec::new(psd, bandwidth, fs, 1 << 18)?;
    let synth = BandLimitedSynth::new(&spec);
    let w = synth.generate(psd, &mut ChaCha8Rng::seed_from_u64(42));

    let ms = w.samples().iter().map(|x| x * x).sum::<f64>() / w.len() as f64;
    println!("samples        {}", w.len());
    println!("mean square    {ms:.5} (expected {:.5})", spec.mean_square());
    println!("realized band  {:.6} Hz", synth.realized_bandwidth());

    let s = periodogram(&w, 33)?;
    println!("\n{:>8} {:>10}", "f [Hz]", "S(f)");
    for (f, d) in s.frequencies.iter().zip(&s.density) {
        println!("{f:>8.3} {d:>10.4}");
    }
    Ok(())
}
