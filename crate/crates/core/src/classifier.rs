//! The movement classifier: four 1-D convolutions (max-pool and dropout after
//! the first and the last), a unidirectional LSTM followed by dropout, and a
//! dense head over the four key movements.
//!
//! "Epoch" always means a signal window here; passes over the training set
//! are called training epochs.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{augment_shift, LabeledEpoch, MovementLabel, DEFAULT_SHIFT_FRACTION, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::nn::{
    self, adam_step, backward, forward, softmax, softmax_cross_entropy, AdamConfig, AdamState, Checkpoint,
    GradientBundle, LayerSpec, Mode, ModelParams, Tensor,
};
use crate::signal::Epoch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolSpec {
    pub kernel: usize,
    pub stride: usize,
}

/// Architecture hyperparameters. Every default lives here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_len: usize,
    pub input_channels: usize,
    pub convs: [ConvSpec; 4],
    /// Pooling after the first convolution.
    pub first_pool: PoolSpec,
    /// Pooling after the fourth convolution.
    pub last_pool: PoolSpec,
    /// Dropout rate following each of the two pooling layers.
    pub conv_dropout: f64,
    pub lstm_hidden: usize,
    pub lstm_dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let c = |channels, kernel, stride| ConvSpec { channels, kernel, stride };
        Self {
            input_len: 128,
            input_channels: 3,
            convs: [c(32, 8, 2), c(64, 4, 1), c(64, 4, 1), c(64, 4, 1)],
            first_pool: PoolSpec { kernel: 4, stride: 4 },
            last_pool: PoolSpec { kernel: 2, stride: 2 },
            conv_dropout: 0.5,
            lstm_hidden: 64,
            lstm_dropout: 0.5,
        }
    }
}

impl ModelConfig {
    /// Layer sequence for this configuration.
    pub fn layers(&self) -> Vec<LayerSpec> {
        let mut spec = Vec::with_capacity(15);
        let mut in_ch = self.input_channels;
        for (i, conv) in self.convs.iter().enumerate() {
            spec.push(LayerSpec::Conv1D {
                in_channels: in_ch,
                out_channels: conv.channels,
                kernel: conv.kernel,
                stride: conv.stride,
            });
            spec.push(LayerSpec::ReLU);
            let pool = match i {
                0 => Some(self.first_pool),
                3 => Some(self.last_pool),
                _ => None,
            };
            if let Some(p) = pool {
                spec.push(LayerSpec::MaxPool1D { kernel: p.kernel, stride: p.stride });
                spec.push(LayerSpec::Dropout { p: self.conv_dropout });
            }
            in_ch = conv.channels;
        }
        spec.push(LayerSpec::Lstm { input_size: in_ch, hidden_size: self.lstm_hidden });
        spec.push(LayerSpec::Dropout { p: self.lstm_dropout });
        spec.push(LayerSpec::Dense { input: self.lstm_hidden, output: NUM_CLASSES });
        spec
    }

    /// LSTM sequence length produced by the convolutional stack for `len`
    /// input samples, `None` if some layer runs out of samples.
    pub fn feature_len(&self, len: usize) -> Option<usize> {
        let mut l = len;
        for (i, conv) in self.convs.iter().enumerate() {
            l = nn::sliding_len(l, conv.kernel, conv.stride)?;
            let pool = match i {
                0 => Some(self.first_pool),
                3 => Some(self.last_pool),
                _ => None,
            };
            if let Some(p) = pool {
                l = nn::sliding_len(l, p.kernel, p.stride)?;
            }
        }
        Some(l)
    }

    /// Smallest input length the stack accepts.
    pub fn min_input_len(&self) -> Option<usize> {
        (1..=1 << 20).find(|&l| self.feature_len(l).is_some())
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_channels == 0 || self.lstm_hidden == 0 {
            return Err(Error::Config("channel and hidden sizes must be >= 1".into()));
        }
        for l in self.layers() {
            l.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.feature_len(self.input_len).is_none() {
            return Err(Error::Config(match self.min_input_len() {
                Some(min) => format!(
                    "input length {} is too short for the convolutional stack; minimum is {min}",
                    self.input_len
                ),
                None => "the convolutional stack accepts no input length".into(),
            }));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Training epochs (passes over the training set).
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub augment_max_frac: f64,
    pub seed: u64,
    pub class_weights: Vec<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 16,
            lr: 1e-3,
            augment_max_frac: DEFAULT_SHIFT_FRACTION,
            seed: 0,
            class_weights: vec![1.0; NUM_CLASSES],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(Error::Config(format!("learning rate must be >= 0, got {}", self.lr)));
        }
        if !(0.0..=0.5).contains(&self.augment_max_frac) {
            return Err(Error::Config(format!(
                "augmentation fraction must be in [0, 0.5], got {}",
                self.augment_max_frac
            )));
        }
        if self.class_weights.len() != NUM_CLASSES
            || self.class_weights.iter().any(|w| !(*w > 0.0 && w.is_finite()))
        {
            return Err(Error::Config(format!(
                "need {NUM_CLASSES} positive class weights, got {:?}",
                self.class_weights
            )));
        }
        Ok(())
    }
}

/// A network ready for inference or further training.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub input_len: usize,
    pub input_channels: usize,
    pub spec: Vec<LayerSpec>,
    pub params: ModelParams,
    pub seed: u64,
}

/// Assemble and initialise the network for `cfg`.
pub fn build_model(cfg: &ModelConfig, seed: u64) -> Result<Model> {
    cfg.validate()?;
    let spec = cfg.layers();
    nn::shape_trace(&spec, &[cfg.input_channels, cfg.input_len]).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Model {
        input_len: cfg.input_len,
        input_channels: cfg.input_channels,
        params: ModelParams::init(&spec, &mut rng),
        spec,
        seed,
    })
}

impl Model {
    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            seed: self.seed,
            input_shape: [self.input_channels, self.input_len],
            spec: self.spec.clone(),
            params: self.params.clone(),
        }
    }

    pub fn from_checkpoint(ck: Checkpoint) -> Result<Self> {
        nn::shape_trace(&ck.spec, &ck.input_shape).map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(Self {
            input_channels: ck.input_shape[0],
            input_len: ck.input_shape[1],
            spec: ck.spec,
            params: ck.params,
            seed: ck.seed,
        })
    }

    fn input(&self, epoch: &Epoch) -> Result<Tensor> {
        if epoch.len() != self.input_len {
            return Err(Error::Contract(format!(
                "epoch has {} samples, model expects {}",
                epoch.len(),
                self.input_len
            )));
        }
        Ok(Tensor::from_samples(&epoch.samples))
    }

    /// Class scores in eval mode.
    pub fn scores(&self, epoch: &Epoch) -> Result<Tensor> {
        Ok(forward(&self.params, &self.spec, &self.input(epoch)?, Mode::Eval)?.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub probabilities: [f64; NUM_CLASSES],
    pub label: MovementLabel,
}

/// Class probabilities (eval mode, deterministic) and the argmax label.
/// Ties go to the lower class index.
pub fn predict(model: &Model, epoch: &Epoch) -> Result<Prediction> {
    let scores = model.scores(epoch)?;
    let p = softmax(scores.data());
    let probabilities: [f64; NUM_CLASSES] =
        p.try_into().map_err(|_| Error::Contract("model does not emit four class scores".into()))?;
    let best = argmax(&probabilities);
    Ok(Prediction { probabilities, label: MovementLabel::from_class_index(best).expect("class index < 4") })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Anything that assigns a class index to an epoch.
pub trait Classifier: Sync {
    fn classify(&self, epoch: &Epoch) -> Result<usize>;
}

impl Classifier for Model {
    fn classify(&self, epoch: &Epoch) -> Result<usize> {
        Ok(argmax(self.scores(epoch)?.data()))
    }
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    pub fn row_sums(&self) -> [usize; NUM_CLASSES] {
        self.counts.map(|r| r.iter().sum())
    }

    /// Per-class recall; `None` for classes absent from the test set.
    pub fn recall(&self) -> [Option<f64>; NUM_CLASSES] {
        std::array::from_fn(|i| {
            let n: usize = self.counts[i].iter().sum();
            (n > 0).then(|| self.counts[i][i] as f64 / n as f64)
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,M1,M2,M3,M4\n");
        for (i, row) in self.counts.iter().enumerate() {
            let label = MovementLabel::from_class_index(i).unwrap();
            writeln!(s, "{label},{},{},{},{}", row[0], row[1], row[2], row[3]).unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

/// Accuracy and confusion matrix over `test_set`. Predictions fan out over
/// threads; the reduction is in input order.
pub fn evaluate<C: Classifier + ?Sized>(classifier: &C, test_set: &[LabeledEpoch]) -> Result<Evaluation> {
    if test_set.is_empty() {
        return Err(Error::Contract("evaluation needs a non-empty test set".into()));
    }
    let predicted: Vec<usize> =
        test_set.par_iter().map(|e| classifier.classify(&e.epoch)).collect::<Result<_>>()?;
    let mut confusion = ConfusionMatrix::default();
    for (e, p) in test_set.iter().zip(predicted) {
        if p >= NUM_CLASSES {
            return Err(Error::Contract(format!("classifier returned class {p}")));
        }
        confusion.counts[e.class()][p] += 1;
    }
    Ok(Evaluation { accuracy: confusion.accuracy(), confusion })
}

/// Mean eval-mode cross-entropy over `set`.
pub fn mean_loss(model: &Model, set: &[LabeledEpoch], class_weights: &[f64]) -> Result<f64> {
    let losses: Vec<f64> = set
        .par_iter()
        .map(|e| Ok(softmax_cross_entropy(&model.scores(&e.epoch)?, e.class(), class_weights)?.0))
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / set.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean training loss over the augmented views seen this training epoch.
    pub train_loss: f64,
    /// Train-mode accuracy over the same views.
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    pub confusion: ConfusionMatrix,
}

impl TrainLog {
    pub fn final_test_accuracy(&self) -> f64 {
        self.confusion.accuracy()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,train_acc,test_acc\n");
        for e in &self.epochs {
            writeln!(s, "{},{},{},{}", e.epoch, e.train_loss, e.train_acc, e.test_acc).unwrap();
        }
        s
    }
}

/// Mini-batch Adam training with a fresh circular-shift view of every
/// training example each training epoch. The stored examples are never
/// modified. Deterministic in `(cfg.seed, data, config)`.
pub fn train(
    model: &mut Model,
    train_set: &[LabeledEpoch],
    test_set: &[LabeledEpoch],
    cfg: &TrainConfig,
) -> Result<TrainLog> {
    train_with(model, train_set, test_set, cfg, &mut |_| {})
}

/// [`train`] with a callback after every training epoch.
pub fn train_with(
    model: &mut Model,
    train_set: &[LabeledEpoch],
    test_set: &[LabeledEpoch],
    cfg: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochLog),
) -> Result<TrainLog> {
    cfg.validate()?;
    if train_set.is_empty() || test_set.is_empty() {
        return Err(Error::Contract("training and test sets must be non-empty".into()));
    }
    for e in train_set.iter().chain(test_set) {
        if !e.label.is_key() {
            return Err(Error::Contract(format!("epoch labeled {} is not a key movement", e.label)));
        }
        model.input(&e.epoch)?;
    }
    let mut adam = AdamState::new(&model.params, AdamConfig { lr: cfg.lr, ..AdamConfig::default() });
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64 + 1);
        let views: Vec<(Tensor, usize)> = train_set
            .iter()
            .map(|e| {
                let v = augment_shift(e, cfg.augment_max_frac, &mut rng)?;
                Ok((Tensor::from_samples(&v.epoch.samples), e.class()))
            })
            .collect::<Result<_>>()?;
        let mut order: Vec<usize> = (0..views.len()).collect();
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut grads = GradientBundle::zeros_like(&model.params);
            for &i in batch {
                let (x, class) = &views[i];
                let (scores, cache) = forward(&model.params, &model.spec, x, Mode::Train(&mut rng))?;
                let (loss, dscores) = softmax_cross_entropy(&scores, *class, &cfg.class_weights)?;
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch, batch: b, message: format!("loss {loss}") });
                }
                loss_sum += loss;
                if argmax(scores.data()) == *class {
                    correct += 1;
                }
                let g = backward(&model.params, &cache, &dscores)?;
                grads.add_assign(&g);
            }
            grads.scale(1.0 / batch.len() as f64);
            adam_step(&mut model.params, &grads, &mut adam)?;
            if !model.params.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: b,
                    message: "non-finite parameters after the update".into(),
                });
            }
        }
        let test_acc = evaluate(model, test_set)?.accuracy;
        let entry = EpochLog {
            epoch,
            train_loss: loss_sum / views.len() as f64,
            train_acc: correct as f64 / views.len() as f64,
            test_acc,
        };
        on_epoch(&entry);
        log.push(entry);
    }
    let confusion = evaluate(model, test_set)?.confusion;
    Ok(TrainLog { epochs: log, confusion })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::EpochSource;
    use rand::Rng;

    fn random_epochs(n_per_class: usize, w: usize, seed: u64) -> Vec<LabeledEpoch> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = Vec::new();
        for c in 0..NUM_CLASSES {
            for i in 0..n_per_class {
                v.push(LabeledEpoch {
                    epoch: Epoch {
                        samples: (0..w)
                            .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
                            .collect(),
                        source: EpochSource { recording_id: format!("c{c}"), offset: i },
                    },
                    label: MovementLabel::from_class_index(c).unwrap(),
                });
            }
        }
        v
    }

    fn small_config() -> ModelConfig {
        let c = |channels, kernel, stride| ConvSpec { channels, kernel, stride };
        ModelConfig {
            input_len: 64,
            convs: [c(4, 8, 1), c(6, 4, 1), c(6, 4, 1), c(6, 4, 1)],
            lstm_hidden: 6,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn default_layer_sequence() {
        let spec = ModelConfig::default().layers();
        let convs: Vec<usize> = spec
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, LayerSpec::Conv1D { .. }))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(convs.len(), 4);
        assert!(matches!(spec[convs[0] + 2], LayerSpec::MaxPool1D { kernel: 4, stride: 4 }));
        assert!(matches!(spec[convs[0] + 3], LayerSpec::Dropout { .. }));
        assert!(matches!(spec[convs[3] + 2], LayerSpec::MaxPool1D { kernel: 2, stride: 2 }));
        assert!(matches!(spec[convs[3] + 3], LayerSpec::Dropout { .. }));
        let pools = spec.iter().filter(|l| matches!(l, LayerSpec::MaxPool1D { .. })).count();
        assert_eq!(pools, 2);
        assert!(matches!(spec[spec.len() - 3], LayerSpec::Lstm { input_size: 64, hidden_size: 64 }));
        assert!(matches!(spec[spec.len() - 2], LayerSpec::Dropout { .. }));
        assert!(matches!(spec[spec.len() - 1], LayerSpec::Dense { input: 64, output: 4 }));
    }

    #[test]
    fn default_model_emits_four_scores() {
        let m = build_model(&ModelConfig::default(), 1).unwrap();
        let e = &random_epochs(1, 128, 0)[0].epoch;
        assert_eq!(m.scores(e).unwrap().shape(), &[4]);
        assert_eq!(ModelConfig::default().feature_len(128), Some(3));
    }

    #[test]
    fn too_short_input_reports_the_minimum() {
        // 8 -> conv(8,2) 1 -> pool(4,4) fails. Working backwards through the
        // recurrence floor((L - k) / s) + 1 >= 1:
        //   pool2 in >= 2, conv4 in >= 5, conv3 in >= 8, conv2 in >= 11,
        //   pool1 in >= 44, conv1 in >= 2 * 43 + 8 = 94.
        let cfg = ModelConfig { input_len: 8, ..ModelConfig::default() };
        let err = build_model(&cfg, 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("minimum is 94"), "{err}");
        assert!(build_model(&ModelConfig { input_len: 94, ..ModelConfig::default() }, 0).is_ok());
        assert!(build_model(&ModelConfig { input_len: 93, ..ModelConfig::default() }, 0).is_err());
    }

    #[test]
    fn same_seed_same_params() {
        let a = build_model(&ModelConfig::default(), 3).unwrap();
        let b = build_model(&ModelConfig::default(), 3).unwrap();
        let c = build_model(&ModelConfig::default(), 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn zeroed_head_predicts_uniform() {
        let mut m = build_model(&ModelConfig::default(), 2).unwrap();
        let last = m.spec.len() - 1;
        m.params.get_mut(last, "weight").unwrap().fill(0.0);
        m.params.get_mut(last, "bias").unwrap().fill(0.0);
        let p = predict(&m, &random_epochs(1, 128, 5)[0].epoch).unwrap();
        assert_eq!(p.probabilities, [0.25; 4]);
    }

    #[test]
    fn probabilities_sum_to_one_and_length_is_checked() {
        let m = build_model(&ModelConfig::default(), 2).unwrap();
        for e in random_epochs(2, 128, 6) {
            let p = predict(&m, &e.epoch).unwrap();
            assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let short = &random_epochs(1, 100, 0)[0].epoch;
        assert!(matches!(predict(&m, short), Err(Error::Contract(_))));
    }

    struct Oracle;
    impl Classifier for Oracle {
        fn classify(&self, e: &Epoch) -> Result<usize> {
            Ok(e.source.recording_id[1..].parse().unwrap())
        }
    }

    struct AlwaysM1;
    impl Classifier for AlwaysM1 {
        fn classify(&self, _: &Epoch) -> Result<usize> {
            Ok(0)
        }
    }

    #[test]
    fn evaluate_stub_classifiers() {
        let set = random_epochs(5, 8, 1);
        let ev = evaluate(&Oracle, &set).unwrap();
        assert_eq!(ev.accuracy, 1.0);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(ev.confusion.counts[i][j], if i == j { 5 } else { 0 });
            }
        }
        let ev = evaluate(&AlwaysM1, &set).unwrap();
        assert_eq!(ev.accuracy, 0.25);
        assert_eq!(ev.confusion.row_sums(), [5; 4]);
        assert!(evaluate(&Oracle, &[]).is_err());
    }

    #[test]
    fn accuracy_matches_a_counting_loop() {
        let m = build_model(&small_config(), 9).unwrap();
        let set = random_epochs(6, 64, 2);
        let ev = evaluate(&m, &set).unwrap();
        let mut hits = 0;
        for e in &set {
            if predict(&m, &e.epoch).unwrap().label == e.label {
                hits += 1;
            }
        }
        assert_eq!(ev.accuracy, hits as f64 / set.len() as f64);
    }

    #[test]
    fn zero_lr_leaves_params_untouched() {
        let mut m = build_model(&small_config(), 4).unwrap();
        let before = m.clone();
        let data = random_epochs(4, 64, 3);
        let snapshot = data.clone();
        let cfg = TrainConfig { epochs: 1, lr: 0.0, batch_size: 4, ..TrainConfig::default() };
        let log = train(&mut m, &data, &data, &cfg).unwrap();
        assert_eq!(m, before);
        assert_eq!(data, snapshot);
        assert_eq!(log.epochs.len(), 1);
        let ln4 = 4f64.ln();
        assert!((log.epochs[0].train_loss - ln4).abs() < 0.25 * ln4, "{}", log.epochs[0].train_loss);
    }

    #[test]
    fn training_is_bit_reproducible() {
        let data = random_epochs(4, 64, 7);
        let cfg = TrainConfig { epochs: 3, batch_size: 5, seed: 11, ..TrainConfig::default() };
        let run = || {
            let mut m = build_model(&small_config(), 1).unwrap();
            let log = train(&mut m, &data, &data, &cfg).unwrap();
            (m, log)
        };
        let (m1, l1) = run();
        let (m2, l2) = run();
        assert_eq!(l1, l2);
        assert_eq!(m1.params, m2.params);
        assert_eq!(l1.to_csv(), l2.to_csv());
    }

    #[test]
    fn confusion_rows_sum_to_class_counts() {
        let m = build_model(&small_config(), 5).unwrap();
        let mut set = random_epochs(3, 64, 4);
        set.truncate(10);
        let ev = evaluate(&m, &set).unwrap();
        let mut want = [0usize; 4];
        for e in &set {
            want[e.class()] += 1;
        }
        assert_eq!(ev.confusion.row_sums(), want);
        assert_eq!(ev.confusion.to_csv().lines().count(), 5);
    }

    #[test]
    fn invalid_train_configs() {
        let mut m = build_model(&small_config(), 4).unwrap();
        let data = random_epochs(1, 64, 3);
        for cfg in [
            TrainConfig { batch_size: 0, ..TrainConfig::default() },
            TrainConfig { class_weights: vec![1.0, 0.0, 1.0, 1.0], ..TrainConfig::default() },
            TrainConfig { augment_max_frac: 0.7, ..TrainConfig::default() },
        ] {
            assert!(train(&mut m, &data, &data, &cfg).is_err());
        }
        assert!(train(&mut m, &[], &data, &TrainConfig::default()).is_err());
    }
}
