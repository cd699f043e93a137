//! Train the default classifier on a synthetic cohort and report accuracy.
//!
//! ```text
//! cargo run --release --example train_classifier -- [n_per_class] [training_epochs]
//! ```

use neurorehab::classifier::{build_model, train_with, ModelConfig, TrainConfig};
use neurorehab::dataset::{extract_epochs, split_train_test, SplitConfig};
use neurorehab::synth::gen_dataset;

fn main() -> neurorehab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_per_class: usize = args.next().map_or(200, |s| s.parse().expect("n_per_class"));
    let epochs: usize = args.next().map_or(200, |s| s.parse().expect("training epochs"));

    let model_cfg = ModelConfig::default();
    let recordings = gen_dataset(n_per_class, 0.5, 7)?;
    let mut data = Vec::new();
    for r in &recordings {
        data.extend(extract_epochs(r, model_cfg.input_len)?.epochs);
    }
    let (train_set, test_set) = split_train_test(&data, &SplitConfig::default())?;
    println!("{} training epochs of data, {} held out", train_set.len(), test_set.len());

    let mut model = build_model(&model_cfg, 0)?;
    let cfg = TrainConfig { epochs, ..TrainConfig::default() };
    let start = std::time::Instant::now();
    let log = train_with(&mut model, &train_set, &test_set, &cfg, &mut |e| {
        println!(
            "training epoch {:>3}: loss {:.4}  train {:.3}  test {:.3}  ({:.1?})",
            e.epoch + 1,
            e.train_loss,
            e.train_acc,
            e.test_acc,
            start.elapsed()
        );
    })?;
    println!("final test accuracy {:.4}", log.final_test_accuracy());
    print!("{}", log.confusion.to_csv());
    Ok(())
}
