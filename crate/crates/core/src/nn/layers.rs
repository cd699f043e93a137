use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::params::{GradientBundle, ModelParams, ParamSet};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// One layer of a sequential network.
///
/// Convolution, pooling and LSTM layers consume `(channels, length)` tensors;
/// the LSTM reads the length axis as time and emits its final hidden state.
/// Dense layers flatten whatever they receive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    Conv1D { in_channels: usize, out_channels: usize, kernel: usize, stride: usize },
    MaxPool1D { kernel: usize, stride: usize },
    Dropout { p: f64 },
    Lstm { input_size: usize, hidden_size: usize },
    Dense { input: usize, output: usize },
    ReLU,
}

/// Output length of a sliding window, `None` when the input is too short.
pub fn sliding_len(len: usize, kernel: usize, stride: usize) -> Option<usize> {
    (len >= kernel).then(|| (len - kernel) / stride + 1)
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LayerSpec::Conv1D { in_channels, out_channels, kernel, stride } => {
                in_channels >= 1 && out_channels >= 1 && kernel >= 1 && stride >= 1
            }
            LayerSpec::MaxPool1D { kernel, stride } => kernel >= 1 && stride >= 1,
            LayerSpec::Dropout { p } => (0.0..1.0).contains(&p),
            LayerSpec::Lstm { input_size, hidden_size } => input_size >= 1 && hidden_size >= 1,
            LayerSpec::Dense { input, output } => input >= 1 && output >= 1,
            LayerSpec::ReLU => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("invalid layer {self}")))
        }
    }

    /// Parameter names and shapes, in storage order.
    pub fn param_shapes(&self) -> Vec<(&'static str, Vec<usize>)> {
        match *self {
            LayerSpec::Conv1D { in_channels, out_channels, kernel, .. } => {
                vec![("weight", vec![out_channels, in_channels, kernel]), ("bias", vec![out_channels])]
            }
            LayerSpec::Lstm { input_size, hidden_size } => vec![
                ("w_input", vec![4 * hidden_size, input_size]),
                ("w_hidden", vec![4 * hidden_size, hidden_size]),
                ("bias", vec![4 * hidden_size]),
            ],
            LayerSpec::Dense { input, output } => {
                vec![("weight", vec![output, input]), ("bias", vec![output])]
            }
            _ => Vec::new(),
        }
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let bad = |why: String| Err(Error::Contract(format!("{self}: input {input:?}: {why}")));
        match *self {
            LayerSpec::Conv1D { in_channels, out_channels, kernel, stride } => match input {
                [c, l] if *c == in_channels => match sliding_len(*l, kernel, stride) {
                    Some(out) => Ok(vec![out_channels, out]),
                    None => bad(format!("length {l} shorter than kernel {kernel}")),
                },
                _ => bad(format!("expected ({in_channels}, length)")),
            },
            LayerSpec::MaxPool1D { kernel, stride } => match input {
                [c, l] => match sliding_len(*l, kernel, stride) {
                    Some(out) => Ok(vec![*c, out]),
                    None => bad(format!("length {l} shorter than kernel {kernel}")),
                },
                _ => bad("expected (channels, length)".into()),
            },
            LayerSpec::Lstm { input_size, hidden_size } => match input {
                [c, t] if *c == input_size && *t >= 1 => Ok(vec![hidden_size]),
                _ => bad(format!("expected ({input_size}, steps)")),
            },
            LayerSpec::Dense { input: n, output } => {
                if input.iter().product::<usize>() == n {
                    Ok(vec![output])
                } else {
                    bad(format!("expected {n} values"))
                }
            }
            LayerSpec::Dropout { .. } | LayerSpec::ReLU => Ok(input.to_vec()),
        }
    }
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LayerSpec::Conv1D { in_channels, out_channels, kernel, stride } => {
                write!(f, "conv1d {in_channels} {out_channels} {kernel} {stride}")
            }
            LayerSpec::MaxPool1D { kernel, stride } => write!(f, "maxpool1d {kernel} {stride}"),
            LayerSpec::Dropout { p } => write!(f, "dropout {p}"),
            LayerSpec::Lstm { input_size, hidden_size } => {
                write!(f, "lstm {input_size} {hidden_size}")
            }
            LayerSpec::Dense { input, output } => write!(f, "dense {input} {output}"),
            LayerSpec::ReLU => f.write_str("relu"),
        }
    }
}

impl FromStr for LayerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Contract(format!("unparseable layer `{s}`"));
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(bad)?;
        let rest: Vec<&str> = parts.collect();
        let ints = |n: usize| -> Result<Vec<usize>> {
            if rest.len() != n {
                return Err(bad());
            }
            rest.iter().map(|v| v.parse().map_err(|_| bad())).collect()
        };
        let layer = match kind {
            "conv1d" => {
                let v = ints(4)?;
                LayerSpec::Conv1D { in_channels: v[0], out_channels: v[1], kernel: v[2], stride: v[3] }
            }
            "maxpool1d" => {
                let v = ints(2)?;
                LayerSpec::MaxPool1D { kernel: v[0], stride: v[1] }
            }
            "dropout" => match rest.as_slice() {
                [p] => LayerSpec::Dropout { p: p.parse().map_err(|_| bad())? },
                _ => return Err(bad()),
            },
            "lstm" => {
                let v = ints(2)?;
                LayerSpec::Lstm { input_size: v[0], hidden_size: v[1] }
            }
            "dense" => {
                let v = ints(2)?;
                LayerSpec::Dense { input: v[0], output: v[1] }
            }
            "relu" if rest.is_empty() => LayerSpec::ReLU,
            _ => return Err(bad()),
        };
        layer.validate()?;
        Ok(layer)
    }
}

/// Shape after every layer of `spec`, starting from `input`.
pub fn shape_trace(spec: &[LayerSpec], input: &[usize]) -> Result<Vec<Vec<usize>>> {
    let mut shapes = vec![input.to_vec()];
    for (i, layer) in spec.iter().enumerate() {
        layer.validate()?;
        let next = layer
            .output_shape(shapes.last().unwrap())
            .map_err(|e| Error::Contract(format!("layer {i}: {e}")))?;
        shapes.push(next);
    }
    Ok(shapes)
}

pub enum Mode<'a> {
    /// Dropout active, masks drawn from the given generator.
    Train(&'a mut dyn RngCore),
    /// Dropout is the identity.
    Eval,
}

/// Dropout masks recorded by a forward pass, one slot per layer.
pub type DropoutMasks = Vec<Option<Vec<f64>>>;

pub(crate) enum MaskSource<'a> {
    Sample(&'a mut dyn RngCore),
    Replay(&'a [Option<Vec<f64>>]),
    Off,
}

#[derive(Debug, Clone)]
enum LayerCache {
    Conv { input: Tensor },
    Pool { input_shape: Vec<usize>, argmax: Vec<usize> },
    Dropout { mask: Option<Vec<f64>> },
    Lstm(LstmCache),
    Dense { input: Vec<f64>, input_shape: Vec<usize> },
    Relu { input: Tensor },
}

#[derive(Debug, Clone)]
struct LstmCache {
    /// `xs[t]` is the input at step t.
    xs: Vec<Vec<f64>>,
    /// Activated gates `[i, f, g, o]` concatenated, per step.
    gates: Vec<Vec<f64>>,
    /// `cs[0]`/`hs[0]` are the zero initial state.
    cs: Vec<Vec<f64>>,
    hs: Vec<Vec<f64>>,
}

/// Everything backward needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    spec: Vec<LayerSpec>,
    layers: Vec<LayerCache>,
}

impl ForwardCache {
    pub fn dropout_masks(&self) -> DropoutMasks {
        self.layers
            .iter()
            .map(|l| match l {
                LayerCache::Dropout { mask } => mask.clone(),
                _ => None,
            })
            .collect()
    }
}

/// Run `input` through the network.
pub fn forward(
    params: &ModelParams,
    spec: &[LayerSpec],
    input: &Tensor,
    mode: Mode<'_>,
) -> Result<(Tensor, ForwardCache)> {
    let masks = match mode {
        Mode::Train(rng) => MaskSource::Sample(rng),
        Mode::Eval => MaskSource::Off,
    };
    forward_with(params, spec, input, masks)
}

pub(crate) fn forward_with(
    params: &ModelParams,
    spec: &[LayerSpec],
    input: &Tensor,
    mut masks: MaskSource<'_>,
) -> Result<(Tensor, ForwardCache)> {
    if !params.matches_spec(spec) {
        return Err(Error::Contract("parameters do not match the layer specification".into()));
    }
    let mut x = input.clone();
    let mut caches = Vec::with_capacity(spec.len());
    for (i, layer) in spec.iter().enumerate() {
        let out_shape =
            layer.output_shape(x.shape()).map_err(|e| Error::Contract(format!("layer {i}: {e}")))?;
        let p = params.layer(i);
        let (y, cache) = match *layer {
            LayerSpec::Conv1D { stride, .. } => {
                let y = conv_forward(&x, &p[0].tensor, &p[1].tensor, stride, &out_shape);
                (y, LayerCache::Conv { input: x })
            }
            LayerSpec::MaxPool1D { kernel, stride } => {
                let (y, argmax) = pool_forward(&x, kernel, stride, &out_shape);
                (y, LayerCache::Pool { input_shape: x.shape().to_vec(), argmax })
            }
            LayerSpec::Dropout { p: rate } => {
                let mask = match &mut masks {
                    MaskSource::Sample(rng) => {
                        let keep = 1.0 / (1.0 - rate);
                        Some(
                            (0..x.len())
                                .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
                                .collect::<Vec<f64>>(),
                        )
                    }
                    MaskSource::Replay(all) => all.get(i).cloned().flatten(),
                    MaskSource::Off => None,
                };
                let mut y = x;
                if let Some(m) = &mask {
                    if m.len() != y.len() {
                        return Err(Error::Contract(format!("layer {i}: dropout mask length")));
                    }
                    for (v, k) in y.data_mut().iter_mut().zip(m) {
                        *v *= k;
                    }
                }
                (y, LayerCache::Dropout { mask })
            }
            LayerSpec::Lstm { hidden_size, .. } => {
                let (y, c) = lstm_forward(&x, &p[0].tensor, &p[1].tensor, &p[2].tensor, hidden_size);
                (y, LayerCache::Lstm(c))
            }
            LayerSpec::Dense { input, output } => {
                let w = p[0].tensor.data();
                let b = p[1].tensor.data();
                let xv = x.data();
                let y: Vec<f64> =
                    (0..output).map(|o| b[o] + dot(&w[o * input..(o + 1) * input], xv)).collect();
                (Tensor::vector(y), LayerCache::Dense { input: xv.to_vec(), input_shape: x.shape().to_vec() })
            }
            LayerSpec::ReLU => {
                let mut y = x.clone();
                y.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
                (y, LayerCache::Relu { input: x })
            }
        };
        caches.push(cache);
        x = y;
    }
    Ok((x, ForwardCache { spec: spec.to_vec(), layers: caches }))
}

/// Exact gradients of the loss with respect to every parameter, given the
/// loss gradient `dscores` at the network output.
pub fn backward(params: &ModelParams, cache: &ForwardCache, dscores: &Tensor) -> Result<GradientBundle> {
    if !params.matches_spec(&cache.spec) || cache.layers.len() != cache.spec.len() {
        return Err(Error::Contract("forward cache does not belong to these parameters".into()));
    }
    let mut grads = GradientBundle(ParamSet::zeros_for(&cache.spec));
    let mut dy = dscores.clone();
    for i in (0..cache.spec.len()).rev() {
        let p = params.layer(i);
        dy = match (&cache.spec[i], &cache.layers[i]) {
            (LayerSpec::Conv1D { stride, .. }, LayerCache::Conv { input }) => {
                let (dx, dw, db) = conv_backward(input, &p[0].tensor, &dy, *stride);
                *grads.tensor_mut(i, 0) = dw;
                *grads.tensor_mut(i, 1) = db;
                dx
            }
            (LayerSpec::MaxPool1D { .. }, LayerCache::Pool { input_shape, argmax }) => {
                let mut dx = Tensor::zeros(input_shape);
                let d = dx.data_mut();
                for (g, &a) in dy.data().iter().zip(argmax) {
                    d[a] += g;
                }
                dx
            }
            (LayerSpec::Dropout { .. }, LayerCache::Dropout { mask }) => {
                let mut dx = dy;
                if let Some(m) = mask {
                    for (v, k) in dx.data_mut().iter_mut().zip(m) {
                        *v *= k;
                    }
                }
                dx
            }
            (LayerSpec::Lstm { hidden_size, input_size }, LayerCache::Lstm(c)) => {
                let (dx, dwx, dwh, db) =
                    lstm_backward(c, &p[0].tensor, &p[1].tensor, &dy, *input_size, *hidden_size);
                *grads.tensor_mut(i, 0) = dwx;
                *grads.tensor_mut(i, 1) = dwh;
                *grads.tensor_mut(i, 2) = db;
                dx
            }
            (LayerSpec::Dense { input: n, output }, LayerCache::Dense { input, input_shape }) => {
                let w = p[0].tensor.data();
                let g = dy.data();
                let mut dx = vec![0.0; *n];
                {
                    let dw = grads.tensor_mut(i, 0).data_mut();
                    for o in 0..*output {
                        let row = &mut dw[o * n..(o + 1) * n];
                        for k in 0..*n {
                            row[k] = g[o] * input[k];
                            dx[k] += w[o * n + k] * g[o];
                        }
                    }
                }
                grads.tensor_mut(i, 1).data_mut().copy_from_slice(g);
                Tensor::new(input_shape.clone(), dx)?
            }
            (LayerSpec::ReLU, LayerCache::Relu { input }) => {
                let mut dx = dy;
                for (v, x) in dx.data_mut().iter_mut().zip(input.data()) {
                    if *x <= 0.0 {
                        *v = 0.0;
                    }
                }
                dx
            }
            _ => return Err(Error::Contract(format!("layer {i}: cache kind mismatch"))),
        };
    }
    grads.ensure_congruent(params, "backward")?;
    Ok(grads)
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
#[inline]
fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Patch matrix: row `t` holds the `cin * k` inputs seen by output `t`, in
/// the weight tensor's `(in, k)` order.
fn im2col(x: &Tensor, k: usize, stride: usize, lout: usize) -> Vec<f64> {
    let (cin, len) = (x.shape()[0], x.shape()[1]);
    let xd = x.data();
    let kk = cin * k;
    let mut col = vec![0.0; lout * kk];
    for t in 0..lout {
        let row = &mut col[t * kk..(t + 1) * kk];
        for c in 0..cin {
            let src = c * len + t * stride;
            row[c * k..(c + 1) * k].copy_from_slice(&xd[src..src + k]);
        }
    }
    col
}

fn conv_forward(x: &Tensor, w: &Tensor, b: &Tensor, stride: usize, out_shape: &[usize]) -> Tensor {
    let (cout, lout) = (out_shape[0], out_shape[1]);
    let k = w.shape()[2];
    let kk = x.shape()[0] * k;
    let col = im2col(x, k, stride, lout);
    let (wd, bd) = (w.data(), b.data());
    let mut y = vec![0.0; cout * lout];
    for o in 0..cout {
        let wrow = &wd[o * kk..(o + 1) * kk];
        for t in 0..lout {
            y[o * lout + t] = bd[o] + dot(wrow, &col[t * kk..(t + 1) * kk]);
        }
    }
    Tensor::new(vec![cout, lout], y).expect("conv output shape")
}

fn conv_backward(x: &Tensor, w: &Tensor, dy: &Tensor, stride: usize) -> (Tensor, Tensor, Tensor) {
    let (cin, len) = (x.shape()[0], x.shape()[1]);
    let (cout, lout) = (dy.shape()[0], dy.shape()[1]);
    let k = w.shape()[2];
    let kk = cin * k;
    let col = im2col(x, k, stride, lout);
    let (wd, g) = (w.data(), dy.data());
    let mut dcol = vec![0.0; lout * kk];
    let mut dw = vec![0.0; cout * kk];
    let mut db = vec![0.0; cout];
    for o in 0..cout {
        let go = &g[o * lout..(o + 1) * lout];
        db[o] = go.iter().sum();
        let wrow = &wd[o * kk..(o + 1) * kk];
        let dwrow = &mut dw[o * kk..(o + 1) * kk];
        for (t, &gv) in go.iter().enumerate() {
            if gv == 0.0 {
                continue;
            }
            axpy(dwrow, gv, &col[t * kk..(t + 1) * kk]);
            axpy(&mut dcol[t * kk..(t + 1) * kk], gv, wrow);
        }
    }
    let mut dx = vec![0.0; cin * len];
    for t in 0..lout {
        for c in 0..cin {
            let dst = c * len + t * stride;
            for (d, s) in dx[dst..dst + k].iter_mut().zip(&dcol[t * kk + c * k..t * kk + (c + 1) * k]) {
                *d += s;
            }
        }
    }
    (
        Tensor::new(vec![cin, len], dx).unwrap(),
        Tensor::new(w.shape().to_vec(), dw).unwrap(),
        Tensor::vector(db),
    )
}

/// Max over each window; ties go to the earliest index.
fn pool_forward(x: &Tensor, kernel: usize, stride: usize, out_shape: &[usize]) -> (Tensor, Vec<usize>) {
    let (ch, len) = (x.shape()[0], x.shape()[1]);
    let lout = out_shape[1];
    let xd = x.data();
    let mut y = Vec::with_capacity(ch * lout);
    let mut argmax = Vec::with_capacity(ch * lout);
    for c in 0..ch {
        for t in 0..lout {
            let start = c * len + t * stride;
            let mut best = start;
            for j in start + 1..start + kernel {
                if xd[j] > xd[best] {
                    best = j;
                }
            }
            y.push(xd[best]);
            argmax.push(best);
        }
    }
    (Tensor::new(vec![ch, lout], y).unwrap(), argmax)
}

fn lstm_forward(x: &Tensor, wx: &Tensor, wh: &Tensor, b: &Tensor, h: usize) -> (Tensor, LstmCache) {
    let (input, steps) = (x.shape()[0], x.shape()[1]);
    let (wxd, whd, bd) = (wx.data(), wh.data(), b.data());
    let mut cache = LstmCache {
        xs: Vec::with_capacity(steps),
        gates: Vec::with_capacity(steps),
        cs: vec![vec![0.0; h]],
        hs: vec![vec![0.0; h]],
    };
    for t in 0..steps {
        let xt: Vec<f64> = (0..input).map(|c| x.data()[c * steps + t]).collect();
        let hp = cache.hs.last().unwrap();
        let cp = cache.cs.last().unwrap();
        let mut gates = vec![0.0; 4 * h];
        for (r, z) in gates.iter_mut().enumerate() {
            let pre = bd[r] + dot(&wxd[r * input..(r + 1) * input], &xt) + dot(&whd[r * h..(r + 1) * h], hp);
            *z = if (2 * h..3 * h).contains(&r) { pre.tanh() } else { sigmoid(pre) };
        }
        let mut c = vec![0.0; h];
        let mut hn = vec![0.0; h];
        for u in 0..h {
            let (ig, fg, gg, og) = (gates[u], gates[h + u], gates[2 * h + u], gates[3 * h + u]);
            c[u] = fg * cp[u] + ig * gg;
            hn[u] = og * c[u].tanh();
        }
        cache.xs.push(xt);
        cache.gates.push(gates);
        cache.cs.push(c);
        cache.hs.push(hn);
    }
    (Tensor::vector(cache.hs.last().unwrap().clone()), cache)
}

fn lstm_backward(
    cache: &LstmCache,
    wx: &Tensor,
    wh: &Tensor,
    dout: &Tensor,
    input: usize,
    h: usize,
) -> (Tensor, Tensor, Tensor, Tensor) {
    let steps = cache.xs.len();
    let (wxd, whd) = (wx.data(), wh.data());
    let mut dwx = vec![0.0; 4 * h * input];
    let mut dwh = vec![0.0; 4 * h * h];
    let mut db = vec![0.0; 4 * h];
    let mut dx = vec![0.0; input * steps];
    let mut dh = dout.data().to_vec();
    let mut dc = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    let mut dxt = vec![0.0; input];
    for t in (0..steps).rev() {
        let g = &cache.gates[t];
        let c = &cache.cs[t + 1];
        let cp = &cache.cs[t];
        let hp = &cache.hs[t];
        for u in 0..h {
            let (ig, fg, gg, og) = (g[u], g[h + u], g[2 * h + u], g[3 * h + u]);
            let tc = c[u].tanh();
            let d_o = dh[u] * tc;
            let dcu = dc[u] + dh[u] * og * (1.0 - tc * tc);
            dz[u] = dcu * gg * ig * (1.0 - ig);
            dz[h + u] = dcu * cp[u] * fg * (1.0 - fg);
            dz[2 * h + u] = dcu * ig * (1.0 - gg * gg);
            dz[3 * h + u] = d_o * og * (1.0 - og);
            dc[u] = dcu * fg;
        }
        let xt = &cache.xs[t];
        dh.fill(0.0);
        dxt.fill(0.0);
        for (r, &z) in dz.iter().enumerate() {
            db[r] += z;
            if z == 0.0 {
                continue;
            }
            axpy(&mut dwx[r * input..(r + 1) * input], z, xt);
            axpy(&mut dxt, z, &wxd[r * input..(r + 1) * input]);
            axpy(&mut dwh[r * h..(r + 1) * h], z, hp);
            axpy(&mut dh, z, &whd[r * h..(r + 1) * h]);
        }
        for (c, v) in dxt.iter().enumerate() {
            dx[c * steps + t] = *v;
        }
    }
    (
        Tensor::new(vec![input, steps], dx).unwrap(),
        Tensor::new(vec![4 * h, input], dwx).unwrap(),
        Tensor::new(vec![4 * h, h], dwh).unwrap(),
        Tensor::vector(db),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
        let n = shape.iter().product();
        Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn identity_conv_passes_input_through() {
        let spec = [LayerSpec::Conv1D { in_channels: 3, out_channels: 3, kernel: 1, stride: 1 }];
        let mut params = ModelParams::zeros(&spec);
        let w = params.get_mut(0, "weight").unwrap().data_mut();
        for c in 0..3 {
            w[c * 3 + c] = 1.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = rand_tensor(&[3, 10], &mut rng);
        let (y, _) = forward(&params, &spec, &x, Mode::Eval).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn conv_matches_direct_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (cin, cout, k, s, len) = (3, 4, 5, 2, 23);
        let spec = [LayerSpec::Conv1D { in_channels: cin, out_channels: cout, kernel: k, stride: s }];
        let params = ModelParams::init(&spec, &mut rng);
        let x = rand_tensor(&[cin, len], &mut rng);
        let (y, _) = forward(&params, &spec, &x, Mode::Eval).unwrap();
        let w = params.get(0, "weight").unwrap().data();
        let b = params.get(0, "bias").unwrap().data();
        let lout = (len - k) / s + 1;
        assert_eq!(y.shape(), &[cout, lout]);
        for o in 0..cout {
            for t in 0..lout {
                let mut acc = b[o];
                for c in 0..cin {
                    for j in 0..k {
                        acc += w[o * cin * k + c * k + j] * x.data()[c * len + t * s + j];
                    }
                }
                assert!((y.data()[o * lout + t] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_lstm_outputs_zero() {
        let spec = [LayerSpec::Lstm { input_size: 3, hidden_size: 4 }];
        let params = ModelParams::zeros(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = rand_tensor(&[3, 6], &mut rng);
        let (y, _) = forward(&params, &spec, &x, Mode::Eval).unwrap();
        assert_eq!(y.data(), &[0.0; 4]);
    }

    #[test]
    fn shape_mismatch_names_the_layer() {
        let spec = [
            LayerSpec::Conv1D { in_channels: 3, out_channels: 2, kernel: 3, stride: 1 },
            LayerSpec::Dense { input: 5, output: 2 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = ModelParams::init(&spec, &mut rng);
        let err = forward(&params, &spec, &Tensor::zeros(&[3, 8]), Mode::Eval).unwrap_err();
        assert!(err.to_string().contains("layer 1"), "{err}");
        let err = forward(&params, &spec, &Tensor::zeros(&[2, 8]), Mode::Eval).unwrap_err();
        assert!(err.to_string().contains("layer 0"), "{err}");
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let spec = [
            LayerSpec::Conv1D { in_channels: 3, out_channels: 4, kernel: 3, stride: 1 },
            LayerSpec::ReLU,
            LayerSpec::Lstm { input_size: 4, hidden_size: 5 },
            LayerSpec::Dense { input: 5, output: 4 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = ModelParams::init(&spec, &mut rng);
        let x = rand_tensor(&[3, 12], &mut rng);
        let (_, cache) = forward(&params, &spec, &x, Mode::Train(&mut rng)).unwrap();
        let g = backward(&params, &cache, &Tensor::zeros(&[4])).unwrap();
        assert!(g.iter().all(|(_, _, t)| t.data().iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn dense_gradients_closed_form() {
        // y = W x + b, L = g . y  =>  dW = g x^T, db = g.
        let spec = [LayerSpec::Dense { input: 2, output: 2 }];
        let mut params = ModelParams::zeros(&spec);
        params.get_mut(0, "weight").unwrap().data_mut().copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
        params.get_mut(0, "bias").unwrap().data_mut().copy_from_slice(&[0.5, -0.5]);
        let x = Tensor::vector(vec![1.0, -1.0]);
        let (y, cache) = forward(&params, &spec, &x, Mode::Eval).unwrap();
        assert_eq!(y.data(), &[-0.5, -1.5]);
        let g = backward(&params, &cache, &Tensor::vector(vec![2.0, 3.0])).unwrap();
        assert_eq!(g.get(0, "weight").unwrap().data(), &[2.0, -2.0, 3.0, -3.0]);
        assert_eq!(g.get(0, "bias").unwrap().data(), &[2.0, 3.0]);
    }

    #[test]
    fn maxpool_ties_go_to_earliest() {
        let x = Tensor::new(vec![1, 4], vec![1.0, 1.0, 0.0, 2.0]).unwrap();
        let (y, arg) = pool_forward(&x, 2, 2, &[1, 2]);
        assert_eq!(y.data(), &[1.0, 2.0]);
        assert_eq!(arg, vec![0, 3]);
    }

    #[test]
    fn eval_forward_is_bit_deterministic() {
        let spec = [
            LayerSpec::Conv1D { in_channels: 3, out_channels: 4, kernel: 3, stride: 1 },
            LayerSpec::Dropout { p: 0.5 },
            LayerSpec::Lstm { input_size: 4, hidden_size: 3 },
            LayerSpec::Dense { input: 3, output: 4 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let params = ModelParams::init(&spec, &mut rng);
        let x = rand_tensor(&[3, 10], &mut rng);
        let a = forward(&params, &spec, &x, Mode::Eval).unwrap().0;
        let b = forward(&params, &spec, &x, Mode::Eval).unwrap().0;
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn inverted_dropout_preserves_expectation() {
        let spec = [LayerSpec::Dropout { p: 0.5 }];
        let params = ModelParams::zeros(&spec);
        let x = Tensor::vector(vec![1.0, -2.0, 0.5, 3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 20_000;
        let mut acc = [0.0; 4];
        for _ in 0..trials {
            let (y, _) = forward(&params, &spec, &x, Mode::Train(&mut rng)).unwrap();
            for (a, v) in acc.iter_mut().zip(y.data()) {
                *a += v;
            }
        }
        for (a, v) in acc.iter().zip(x.data()) {
            let mean = a / trials as f64;
            assert!((mean - v).abs() <= 0.02 * v.abs(), "{mean} vs {v}");
        }
    }

    #[test]
    fn layer_text_round_trips() {
        for l in [
            LayerSpec::Conv1D { in_channels: 3, out_channels: 32, kernel: 8, stride: 2 },
            LayerSpec::MaxPool1D { kernel: 4, stride: 4 },
            LayerSpec::Dropout { p: 0.5 },
            LayerSpec::Lstm { input_size: 64, hidden_size: 64 },
            LayerSpec::Dense { input: 64, output: 4 },
            LayerSpec::ReLU,
        ] {
            assert_eq!(l.to_string().parse::<LayerSpec>().unwrap(), l);
        }
        assert!("dropout 1".parse::<LayerSpec>().is_err());
        assert!("conv1d 3 0 2 1".parse::<LayerSpec>().is_err());
    }
}
