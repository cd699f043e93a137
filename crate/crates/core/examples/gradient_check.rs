//! Verify backpropagation through the default layer stack against central
//! finite differences, at a reduced width so it runs in about a second.
//!
//! ```text
//! cargo run --release --example gradient_check -- [seeds]
//! ```

use neurorehab::classifier::{build_model, ConvSpec, ModelConfig};
use neurorehab::nn::{gradient_check, shape_trace, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> neurorehab::Result<()> {
    let seeds: u64 = std::env::args().nth(1).map_or(20, |s| s.parse().expect("seed count"));
    let c = |channels, kernel, stride| ConvSpec { channels, kernel, stride };
    let cfg = ModelConfig {
        input_len: 64,
        convs: [c(4, 8, 1), c(6, 4, 1), c(6, 4, 1), c(6, 4, 1)],
        lstm_hidden: 5,
        ..ModelConfig::default()
    };
    let spec = cfg.layers();
    for (layer, shape) in spec.iter().zip(shape_trace(&spec, &[3, 64])?.into_iter().skip(1)) {
        println!("{layer:?} -> {shape:?}");
    }
    for seed in 0..seeds {
        let model = build_model(&cfg, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x = Tensor::new(vec![3, 64], (0..192).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let err = gradient_check(&model.params, &model.spec, &x, (seed % 4) as usize)?;
        println!("seed {seed:>2}: max relative error {err:.3e}");
    }
    Ok(())
}
