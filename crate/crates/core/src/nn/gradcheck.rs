//! Central finite-difference verification of the analytic gradients.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{backward, forward_with, DropoutMasks, LayerSpec, MaskSource};
use super::loss::softmax_cross_entropy;
use super::params::{GradientBundle, ModelParams};
use super::tensor::Tensor;
use crate::error::Result;

/// Finite-difference step.
pub const STEP: f64 = 1e-5;

/// Maximum relative error `|a - n| / max(|a|, |n|, 1e-8)` over every entry.
pub fn max_relative_error(analytic: &GradientBundle, numeric: &GradientBundle) -> f64 {
    analytic
        .iter()
        .zip(numeric.iter())
        .flat_map(|((_, _, a), (_, _, n))| a.data().iter().zip(n.data()))
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-8))
        .fold(0.0, f64::max)
}

/// Analytic and central-difference gradients of `loss(forward(input))`.
///
/// Dropout masks are drawn once from a fixed seed and replayed for every
/// perturbed evaluation, so the function being differentiated is fixed.
pub fn gradients_with_loss<L>(
    params: &ModelParams,
    spec: &[LayerSpec],
    input: &Tensor,
    loss: L,
) -> Result<(GradientBundle, GradientBundle)>
where
    L: Fn(&Tensor) -> Result<(f64, Tensor)>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6164);
    let (out, cache) = forward_with(params, spec, input, MaskSource::Sample(&mut rng))?;
    let masks: DropoutMasks = cache.dropout_masks();
    let (_, dout) = loss(&out)?;
    let analytic = backward(params, &cache, &dout)?;

    let eval = |p: &ModelParams| -> Result<f64> {
        let (o, _) = forward_with(p, spec, input, MaskSource::Replay(&masks))?;
        Ok(loss(&o)?.0)
    };
    let mut probe = params.clone();
    let mut numeric = GradientBundle::zeros_like(params);
    let slots: Vec<(usize, usize, usize)> = params
        .layers()
        .iter()
        .enumerate()
        .flat_map(|(l, ps)| ps.iter().enumerate().map(move |(s, p)| (l, s, p.tensor.len())))
        .collect();
    for (layer, slot, n) in slots {
        for i in 0..n {
            let orig = probe.tensor(layer, slot).data()[i];
            probe.tensor_mut(layer, slot).data_mut()[i] = orig + STEP;
            let up = eval(&probe)?;
            probe.tensor_mut(layer, slot).data_mut()[i] = orig - STEP;
            let down = eval(&probe)?;
            probe.tensor_mut(layer, slot).data_mut()[i] = orig;
            numeric.tensor_mut(layer, slot).data_mut()[i] = (up - down) / (2.0 * STEP);
        }
    }
    Ok((analytic, numeric))
}

/// Gradient check under unit-weight softmax cross-entropy against `target`.
pub fn gradient_check(
    params: &ModelParams,
    spec: &[LayerSpec],
    input: &Tensor,
    target: usize,
) -> Result<f64> {
    let weights = vec![1.0; spec_outputs(spec)];
    let (a, n) = gradients_with_loss(params, spec, input, |s| softmax_cross_entropy(s, target, &weights))?;
    Ok(max_relative_error(&a, &n))
}

fn spec_outputs(spec: &[LayerSpec]) -> usize {
    spec.iter()
        .rev()
        .find_map(|l| match l {
            LayerSpec::Dense { output, .. } => Some(*output),
            LayerSpec::Lstm { hidden_size, .. } => Some(*hidden_size),
            LayerSpec::Conv1D { out_channels, .. } => Some(*out_channels),
            _ => None,
        })
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn toy() -> Vec<LayerSpec> {
        vec![
            LayerSpec::Conv1D { in_channels: 3, out_channels: 4, kernel: 3, stride: 1 },
            LayerSpec::ReLU,
            LayerSpec::Lstm { input_size: 4, hidden_size: 5 },
            LayerSpec::Dense { input: 5, output: 4 },
        ]
    }

    fn random_input(rng: &mut ChaCha8Rng, shape: [usize; 2]) -> Tensor {
        let n = shape[0] * shape[1];
        Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn toy_model_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let spec = toy();
        let params = ModelParams::init(&spec, &mut rng);
        let x = random_input(&mut rng, [3, 12]);
        let err = gradient_check(&params, &spec, &x, 1).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn linear_quadratic_is_near_exact() {
        let spec = [LayerSpec::Dense { input: 6, output: 3 }];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = ModelParams::init(&spec, &mut rng);
        let x = Tensor::vector((0..6).map(|_| rng.random_range(-1.0..1.0)).collect());
        let target = [0.3, -0.2, 1.0];
        let (a, n) = gradients_with_loss(&params, &spec, &x, |y| {
            let d: Vec<f64> = y.data().iter().zip(&target).map(|(v, t)| v - t).collect();
            let l = 0.5 * d.iter().map(|v| v * v).sum::<f64>();
            Ok((l, Tensor::vector(d)))
        })
        .unwrap();
        let err = max_relative_error(&a, &n);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn detects_a_one_percent_corruption() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = toy();
        let params = ModelParams::init(&spec, &mut rng);
        let x = random_input(&mut rng, [3, 10]);
        let weights = [1.0; 4];
        let (mut a, n) =
            gradients_with_loss(&params, &spec, &x, |s| softmax_cross_entropy(s, 0, &weights)).unwrap();
        // Corrupt the largest dense-weight gradient entry.
        let w = a.get_mut(3, "weight").unwrap().data_mut();
        let (i, _) = w.iter().enumerate().max_by(|x, y| x.1.abs().total_cmp(&y.1.abs())).unwrap();
        w[i] *= 1.01;
        let err = max_relative_error(&a, &n);
        assert!(err >= 0.009, "{err}");
    }

    #[test]
    fn dropout_and_pooling_gradients_check_out() {
        let spec = vec![
            LayerSpec::Conv1D { in_channels: 3, out_channels: 4, kernel: 3, stride: 2 },
            LayerSpec::ReLU,
            LayerSpec::MaxPool1D { kernel: 2, stride: 2 },
            LayerSpec::Dropout { p: 0.3 },
            LayerSpec::Lstm { input_size: 4, hidden_size: 3 },
            LayerSpec::Dropout { p: 0.3 },
            LayerSpec::Dense { input: 3, output: 4 },
        ];
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params = ModelParams::init(&spec, &mut rng);
            let x = random_input(&mut rng, [3, 21]);
            let err = gradient_check(&params, &spec, &x, (seed % 4) as usize).unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }
}
