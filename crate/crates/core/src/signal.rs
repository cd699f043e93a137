//! Uniformly sampled tri-axial signals and the operations the smoothness and
//! classification stages are built on: finite-difference differentiation,
//! squared jerk, per-axis summary statistics, windowing and resampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sampling rate for synthetic data, in Hz.
pub const DEFAULT_FS_HZ: f64 = 50.0;

/// One tri-axial sample `(x, y, z)`.
pub type Sample = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Contract(format!("unknown axis `{other}`"))),
        }
    }
}

/// Time-derivative order of a series relative to position.
///
/// Acceleration is order 2, jerk 3, snap 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DerivativeOrder(pub u8);

impl DerivativeOrder {
    pub const POSITION: Self = Self(0);
    pub const VELOCITY: Self = Self(1);
    pub const ACCELERATION: Self = Self(2);
    pub const JERK: Self = Self(3);
    pub const SNAP: Self = Self(4);

    pub fn next(self) -> Self {
        Self(self.0 + 1)
    }

    /// SI unit of a series of this order, assuming positions in metres.
    pub fn unit(self) -> String {
        match self.0 {
            0 => "m".to_owned(),
            1 => "m/s".to_owned(),
            n => format!("m/s^{n}"),
        }
    }
}

/// Uniformly sampled tri-axial signal.
///
/// The same container holds position, velocity, acceleration, jerk or snap;
/// [`DerivativeOrder`] records which. Samples are guaranteed finite and the
/// sampling rate positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries3D {
    fs: f64,
    samples: Vec<Sample>,
    order: DerivativeOrder,
}

impl TimeSeries3D {
    pub fn new(fs: f64, samples: Vec<Sample>, order: DerivativeOrder) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidData(format!("sampling rate must be positive and finite, got {fs}")));
        }
        if let Some((n, s)) = samples.iter().enumerate().find(|(_, s)| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidData(format!("non-finite sample {s:?} at index {n}")));
        }
        Ok(Self { fs, samples, order })
    }

    /// Acceleration series, the usual sensor output.
    pub fn acceleration(fs: f64, samples: Vec<Sample>) -> Result<Self> {
        Self::new(fs, samples, DerivativeOrder::ACCELERATION)
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    pub fn order(&self) -> DerivativeOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration spanned from the first to the last sample, in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len().saturating_sub(1) as f64 / self.fs
    }

    pub fn axis(&self, axis: Axis) -> impl Iterator<Item = f64> + '_ {
        let i = axis.index();
        self.samples.iter().map(move |s| s[i])
    }

    /// Samples `[start, end)` as a new series with the same rate and order.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.samples.len() {
            return Err(Error::Contract(format!(
                "slice [{start}, {end}) outside series of length {}",
                self.samples.len()
            )));
        }
        Ok(Self { fs: self.fs, samples: self.samples[start..end].to_vec(), order: self.order })
    }
}

/// Time derivative by finite differences.
///
/// Interior samples use the central difference `(s[n+1] - s[n-1]) * fs / 2`;
/// the two endpoints use one-sided first-order differences. Length and rate
/// are preserved and the derivative order is incremented, so an acceleration
/// input yields jerk and a second application yields snap.
pub fn differentiate(series: &TimeSeries3D) -> Result<TimeSeries3D> {
    let s = &series.samples;
    let n = s.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("differentiation needs at least 3 samples, got {n}")));
    }
    let fs = series.fs;
    let half = 0.5 * fs;
    let mut out = Vec::with_capacity(n);
    out.push(std::array::from_fn(|a| (s[1][a] - s[0][a]) * fs));
    for i in 1..n - 1 {
        out.push(std::array::from_fn(|a| (s[i + 1][a] - s[i - 1][a]) * half));
    }
    out.push(std::array::from_fn(|a| (s[n - 1][a] - s[n - 2][a]) * fs));
    TimeSeries3D::new(fs, out, series.order.next())
}

/// Element-wise square of a jerk series. `j^2 == |j|^2`, so no absolute-value
/// series is materialised.
pub fn squared_jerk(jerk: &TimeSeries3D) -> Result<TimeSeries3D> {
    if jerk.order != DerivativeOrder::JERK {
        return Err(Error::Contract(format!(
            "squared jerk expects a jerk series (order 3), got order {}",
            jerk.order.0
        )));
    }
    let samples = jerk.samples.iter().map(|s| [s[0] * s[0], s[1] * s[1], s[2] * s[2]]).collect();
    Ok(TimeSeries3D { fs: jerk.fs, samples, order: jerk.order })
}

/// Mean, maximum and minimum of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
}

impl Summary {
    pub fn get(&self, stat: Statistic) -> f64 {
        match stat {
            Statistic::Mean => self.mean,
            Statistic::Max => self.max,
            Statistic::Min => self.min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Mean,
    Max,
    Min,
}

impl Statistic {
    /// Column order used by every report table.
    pub const ALL: [Statistic; 3] = [Statistic::Mean, Statistic::Max, Statistic::Min];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Max => "max",
            Statistic::Min => "min",
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(Statistic::Mean),
            "max" => Ok(Statistic::Max),
            "min" => Ok(Statistic::Min),
            other => Err(Error::Contract(format!("unknown statistic `{other}`"))),
        }
    }
}

/// Per-axis [`Summary`] of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub x: Summary,
    pub y: Summary,
    pub z: Summary,
}

impl AxisStats {
    pub fn axis(&self, axis: Axis) -> &Summary {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }
}

/// Exact per-axis arithmetic mean, maximum and minimum.
pub fn segment_stats(series: &TimeSeries3D) -> Result<AxisStats> {
    if series.is_empty() {
        return Err(Error::Degenerate("statistics of an empty series".into()));
    }
    let n = series.len() as f64;
    let mut sum = [0.0; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    let mut min = [f64::INFINITY; 3];
    for s in &series.samples {
        for a in 0..3 {
            sum[a] += s[a];
            max[a] = max[a].max(s[a]);
            min[a] = min[a].min(s[a]);
        }
    }
    let summary = |a: usize| Summary {
        // Rounding can push the mean of a near-constant axis a few ulps past
        // its extremes.
        mean: (sum[a] / n).clamp(min[a], max[a]),
        max: max[a],
        min: min[a],
    };
    Ok(AxisStats { x: summary(0), y: summary(1), z: summary(2) })
}

/// Where an epoch was cut from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EpochSource {
    pub recording_id: String,
    pub offset: usize,
}

/// Fixed-length window of tri-axial samples: the classifier's input unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub samples: Vec<Sample>,
    pub source: EpochSource,
}

impl Epoch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Cut `series` into windows of `w` samples taken every `s` samples.
///
/// Produces `floor((N - w) / s) + 1` epochs, the k-th covering
/// `[k*s, k*s + w)`; a series shorter than `w` yields none.
pub fn window(series: &TimeSeries3D, w: usize, s: usize, recording_id: &str) -> Result<Vec<Epoch>> {
    if w == 0 || s == 0 {
        return Err(Error::Contract(format!("window length and stride must be >= 1 (w={w}, s={s})")));
    }
    let n = series.len();
    if n < w {
        return Ok(Vec::new());
    }
    Ok((0..=(n - w) / s)
        .map(|k| {
            let offset = k * s;
            Epoch {
                samples: series.samples[offset..offset + w].to_vec(),
                source: EpochSource { recording_id: recording_id.to_owned(), offset },
            }
        })
        .collect())
}

/// Linear interpolation onto `target_len` uniformly spaced points spanning the
/// original duration. First and last samples are kept exactly; the sampling
/// rate is rescaled so the duration is unchanged.
pub fn resample(series: &TimeSeries3D, target_len: usize) -> Result<TimeSeries3D> {
    let n = series.len();
    if n < 2 || target_len < 2 {
        return Err(Error::Contract(format!(
            "resampling needs source and target lengths >= 2 (source {n}, target {target_len})"
        )));
    }
    if n == target_len {
        return Ok(series.clone());
    }
    let src = &series.samples;
    let step = (n - 1) as f64 / (target_len - 1) as f64;
    let mut out = Vec::with_capacity(target_len);
    for k in 0..target_len {
        if k == target_len - 1 {
            out.push(src[n - 1]);
            continue;
        }
        let u = k as f64 * step;
        let i = (u.floor() as usize).min(n - 2);
        let frac = u - i as f64;
        out.push(std::array::from_fn(|a| src[i][a] + (src[i + 1][a] - src[i][a]) * frac));
    }
    let fs = series.fs * (target_len - 1) as f64 / (n - 1) as f64;
    TimeSeries3D::new(fs, out, series.order)
}
