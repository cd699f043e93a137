use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Numerically stable softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Weighted cross-entropy `-w[target] * log softmax(scores)[target]` and its
/// gradient `w[target] * (p - onehot(target))`.
pub fn softmax_cross_entropy(scores: &Tensor, target: usize, class_weights: &[f64]) -> Result<(f64, Tensor)> {
    let s = scores.data();
    if class_weights.len() != s.len() {
        return Err(Error::Contract(format!("{} class weights for {} scores", class_weights.len(), s.len())));
    }
    if target >= s.len() {
        return Err(Error::Contract(format!("target class {target} out of range for {} classes", s.len())));
    }
    if let Some(w) = class_weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::Contract(format!("class weights must be positive, got {w}")));
    }
    let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + s.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    let w = class_weights[target];
    let loss = -w * (s[target] - lse);
    let mut grad: Vec<f64> = s.iter().map(|v| w * (v - lse).exp()).collect();
    grad[target] -= w;
    Ok((loss, Tensor::new(scores.shape().to_vec(), grad)?))
}
