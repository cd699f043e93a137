//! Deterministic synthetic accelerometry.
//!
//! Every movement is a chain of point-to-point *legs* (out, back, out, ...)
//! along a class-specific direction. A leg is realised as one minimum-jerk
//! stroke `x(τ) = A (10τ³ − 15τ⁴ + 6τ⁵)` for healthy-style movement, or as
//! `n_submovements` overlapping, staggered sub-strokes that share the leg's
//! displacement for patient-style movement. Acceleration is obtained by
//! differentiating the quintic twice analytically; white sensor noise is added
//! on top.
//!
//! Class signatures differ in which axes carry the stroke energy and in the
//! number of direction reversals.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{self, Annotation, Group, Hand, MovementLabel, Recording, Scenario};
use crate::error::{Error, Result};
use crate::signal::{Sample, TimeSeries3D, DEFAULT_FS_HZ};

/// Minimum number of samples in a generated movement.
pub const MIN_SAMPLES: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthProfile {
    pub movement: MovementLabel,
    /// Nominal duration at `speed_factor == 1`, seconds.
    pub duration_s: f64,
    /// Displacement per leg, metres.
    pub amplitude: f64,
    pub fs: f64,
    /// Sub-strokes per leg; 1 is a single smooth stroke.
    pub n_submovements: usize,
    pub noise_sigma: f64,
    /// Values below 1 slow the movement down (longer duration).
    pub speed_factor: f64,
    pub seed: u64,
}

impl SynthProfile {
    /// Smooth, noise-free profile.
    pub fn healthy(movement: MovementLabel, duration_s: f64, amplitude: f64, seed: u64) -> Self {
        Self {
            movement,
            duration_s,
            amplitude,
            fs: DEFAULT_FS_HZ,
            n_submovements: 1,
            noise_sigma: 0.0,
            speed_factor: 1.0,
            seed,
        }
    }

    /// The single-stroke, noise-free profile of the same movement, duration,
    /// amplitude and speed.
    pub fn healthy_counterpart(&self) -> Self {
        Self { n_submovements: 1, noise_sigma: 0.0, ..*self }
    }

    pub fn effective_duration(&self) -> f64 {
        self.duration_s / self.speed_factor
    }

    pub fn num_samples(&self) -> usize {
        (self.effective_duration() * self.fs).round() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Contract(format!("synthetic profile: {m}")));
        if !self.movement.is_key() {
            return bad(format!("movement {} is not one of M1..M4", self.movement));
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return bad(format!("fs must be positive, got {}", self.fs));
        }
        if !(self.speed_factor.is_finite() && self.speed_factor > 0.0) {
            return bad(format!("speed factor must be positive, got {}", self.speed_factor));
        }
        if !(self.duration_s.is_finite() && self.effective_duration() * self.fs >= MIN_SAMPLES) {
            return bad(format!(
                "duration {} s at {} Hz gives fewer than {MIN_SAMPLES} samples",
                self.effective_duration(),
                self.fs
            ));
        }
        if !self.amplitude.is_finite() {
            return bad("amplitude must be finite".into());
        }
        if self.n_submovements == 0 {
            return bad("at least one submovement is required".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise sigma must be >= 0, got {}", self.noise_sigma));
        }
        Ok(())
    }
}

/// Axis direction and reversal count of a movement class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassSignature {
    pub mixing: [f64; 3],
    pub legs: usize,
}

pub fn signature(movement: MovementLabel) -> ClassSignature {
    match movement {
        // Shoulder flexion/extension: forward and back along x.
        MovementLabel::M1 => ClassSignature { mixing: [1.0, 0.2, 0.3], legs: 2 },
        // Abduction: sideways along y.
        MovementLabel::M2 => ClassSignature { mixing: [0.2, 1.0, 0.3], legs: 2 },
        // Rotation: repeated in/out oscillation, mostly z.
        MovementLabel::M3 => ClassSignature { mixing: [0.3, 0.2, 1.0], legs: 4 },
        // Elbow flexion/extension: diagonal x/z, three legs.
        MovementLabel::M4 | MovementLabel::Other(_) => ClassSignature { mixing: [0.7, 0.1, -0.7], legs: 3 },
    }
}

/// One minimum-jerk stroke of displacement `amplitude` (per axis) starting at
/// `start` and lasting `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stroke {
    pub start: f64,
    pub duration: f64,
    pub amplitude: [f64; 3],
}

impl Stroke {
    /// Scalar `(position, velocity, acceleration, jerk)` of a unit stroke of
    /// length `d` at normalised time `tau`. Before the stroke everything is zero;
    /// after it the position holds at 1.
    pub fn unit_kinematics(tau: f64, d: f64) -> [f64; 4] {
        if tau < 0.0 {
            return [0.0; 4];
        }
        if tau > 1.0 {
            return [1.0, 0.0, 0.0, 0.0];
        }
        let t2 = tau * tau;
        let t3 = t2 * tau;
        [
            10.0 * t3 - 15.0 * t2 * t2 + 6.0 * t3 * t2,
            (30.0 * t2 - 60.0 * t3 + 30.0 * t2 * t2) / d,
            (60.0 * tau - 180.0 * t2 + 120.0 * t3) / (d * d),
            (60.0 - 360.0 * tau + 360.0 * t2) / (d * d * d),
        ]
    }

    fn kinematics(&self, t: f64) -> [f64; 4] {
        Self::unit_kinematics((t - self.start) / self.duration, self.duration)
    }
}

/// Analytic trajectory built from strokes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub strokes: Vec<Stroke>,
    pub duration: f64,
}

impl Trajectory {
    /// Derivative `order` (0 position .. 3 jerk) at time `t`.
    pub fn eval(&self, order: usize, t: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for s in &self.strokes {
            let k = s.kinematics(t)[order];
            if k != 0.0 {
                for (o, a) in out.iter_mut().zip(s.amplitude) {
                    *o += a * k;
                }
            }
        }
        out
    }

    pub fn position(&self, t: f64) -> [f64; 3] {
        self.eval(0, t)
    }

    pub fn velocity(&self, t: f64) -> [f64; 3] {
        self.eval(1, t)
    }

    pub fn acceleration(&self, t: f64) -> [f64; 3] {
        self.eval(2, t)
    }

    pub fn jerk(&self, t: f64) -> [f64; 3] {
        self.eval(3, t)
    }
}

/// Stroke layout of a profile. Consumes sub-stroke amplitude jitter from `rng`
/// only when `n_submovements > 1`.
pub fn trajectory<R: Rng + ?Sized>(profile: &SynthProfile, rng: &mut R) -> Trajectory {
    let sig = signature(profile.movement);
    let total = (profile.num_samples() - 1) as f64 / profile.fs;
    let leg_len = total / sig.legs as f64;
    let n = profile.n_submovements;
    // n sub-strokes overlapping by half their length exactly tile the leg.
    let sub_len = 2.0 * leg_len / (n + 1) as f64;
    let mut strokes = Vec::with_capacity(sig.legs * n);
    for leg in 0..sig.legs {
        let direction = if leg % 2 == 0 { 1.0 } else { -1.0 };
        let weights: Vec<f64> = if n == 1 {
            vec![1.0]
        } else {
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / sum).collect()
        };
        for (k, w) in weights.iter().enumerate() {
            let amp = direction * profile.amplitude * w;
            strokes.push(Stroke {
                start: leg as f64 * leg_len + k as f64 * sub_len / 2.0,
                duration: if n == 1 { leg_len } else { sub_len },
                amplitude: sig.mixing.map(|m| m * amp),
            });
        }
    }
    Trajectory { strokes, duration: total }
}

/// Acceleration series of `profile`: strokes sampled analytically at
/// `n / fs`, plus white noise of standard deviation `noise_sigma`.
pub fn gen_movement(profile: &SynthProfile) -> Result<TimeSeries3D> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let traj = trajectory(profile, &mut rng);
    let mut samples: Vec<Sample> =
        (0..profile.num_samples()).map(|n| traj.acceleration(n as f64 / profile.fs)).collect();
    add_noise(&mut samples, profile.noise_sigma, &mut rng);
    TimeSeries3D::acceleration(profile.fs, samples)
}

/// Patient-style movement: the healthy displacement split into
/// `n_submovements` staggered strokes per leg, plus noise. Identical to
/// [`gen_movement`]; the separate entry point documents intent and the
/// regime (`n_submovements >= 3`, `noise_sigma > 0`) in which the result is
/// guaranteed jerkier than [`SynthProfile::healthy_counterpart`].
pub fn gen_patient_variant(profile: &SynthProfile) -> Result<TimeSeries3D> {
    gen_movement(profile)
}

fn add_noise<R: Rng + ?Sized>(samples: &mut [Sample], sigma: f64, rng: &mut R) {
    if sigma <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    for s in samples {
        for v in s.iter_mut() {
            *v += normal.sample(rng);
        }
    }
}

/// Repetitions per synthetic recording.
pub const REPS_PER_RECORDING: usize = 5;

/// Balanced synthetic L1 dataset: `n_per_class` annotated repetitions of each
/// of M1..M4, grouped into recordings of up to [`REPS_PER_RECORDING`]
/// repetitions separated by one-second rests. A fraction `healthy_fraction`
/// of recordings (in expectation) comes from healthy-style subjects.
pub fn gen_dataset(n_per_class: usize, healthy_fraction: f64, seed: u64) -> Result<Vec<Recording>> {
    if n_per_class == 0 {
        return Err(Error::Contract("n_per_class must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&healthy_fraction) {
        return Err(Error::Contract(format!("healthy fraction must be in [0, 1], got {healthy_fraction}")));
    }
    let fs = DEFAULT_FS_HZ;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recordings = Vec::new();
    let mut healthy_count = 0usize;
    let mut patient_count = 0usize;
    for movement in MovementLabel::KEY {
        let mut remaining = n_per_class;
        while remaining > 0 {
            let reps = remaining.min(REPS_PER_RECORDING);
            remaining -= reps;
            let healthy = rng.random::<f64>() < healthy_fraction;
            let (group, subject_id, session) = if healthy {
                healthy_count += 1;
                (Group::Healthy, format!("H{:03}", healthy_count), 1)
            } else {
                patient_count += 1;
                let subject = 100 + (patient_count - 1) / 4;
                (Group::Patient, format!("P{subject}"), ((patient_count - 1) % 4) as u32 + 1)
            };
            let sigma = if healthy { 0.02 } else { 0.05 };
            let rest = fs as usize;
            let mut samples: Vec<Sample> = Vec::new();
            let mut annotations = Vec::with_capacity(reps);
            let push_rest = |samples: &mut Vec<Sample>, rng: &mut ChaCha8Rng| {
                let mut gap = vec![[0.0; 3]; rest];
                add_noise(&mut gap, sigma, rng);
                samples.extend(gap);
            };
            push_rest(&mut samples, &mut rng);
            for _ in 0..reps {
                let mut profile = SynthProfile::healthy(
                    movement,
                    rng.random_range(1.5..3.0),
                    rng.random_range(0.15..0.4),
                    rng.random(),
                );
                profile.noise_sigma = sigma;
                if !healthy {
                    profile.n_submovements = rng.random_range(3..=6);
                    profile.speed_factor = rng.random_range(0.7..1.0);
                }
                let seg = gen_movement(&profile)?;
                let start = samples.len();
                samples.extend_from_slice(seg.samples());
                annotations.push(Annotation { start, end: samples.len(), label: movement });
                push_rest(&mut samples, &mut rng);
            }
            let index = recordings.len();
            recordings.push(Recording {
                id: format!("{}_{index:04}", movement.to_string().to_lowercase()),
                subject_id,
                group,
                session,
                hand: if index % 2 == 0 { Hand::Dominant } else { Hand::NonDominant },
                scenario: Scenario::L1,
                t0: 0.0,
                series: TimeSeries3D::acceleration(fs, samples)?,
                annotations,
            });
        }
    }
    Ok(recordings)
}

/// Write every recording into `dir` in the dataset file formats.
pub fn write_dataset(recordings: &[Recording], dir: &Path) -> Result<()> {
    for r in recordings {
        dataset::write_recording(r, dir)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{differentiate, segment_stats, squared_jerk, Axis};

    fn mean_sq_jerk_x(series: &TimeSeries3D) -> f64 {
        let j = differentiate(series).unwrap();
        segment_stats(&squared_jerk(&j).unwrap()).unwrap().x.mean
    }

    #[test]
    fn stroke_boundary_conditions() {
        let start = Stroke::unit_kinematics(0.0, 1.0);
        let end = Stroke::unit_kinematics(1.0 - 1e-15, 1.0);
        assert_eq!(start[0], 0.0);
        assert!((end[0] - 1.0).abs() < 1e-12);
        assert!(end[1].abs() < 1e-12 && end[2].abs() < 1e-12);
        // Velocity 30τ²(1−τ)² vanishes at both ends.
        for tau in [1e-9, 1.0 - 1e-9] {
            assert!(Stroke::unit_kinematics(tau, 2.0)[1].abs() < 1e-15);
        }
        let mid = Stroke::unit_kinematics(0.5, 1.0);
        assert!((mid[0] - 0.5).abs() < 1e-15);
        assert!((mid[1] - 1.875).abs() < 1e-12);
    }

    #[test]
    fn single_leg_stroke_reaches_amplitude() {
        let p = SynthProfile::healthy(MovementLabel::M1, 2.0, 0.3, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let traj = trajectory(&p, &mut rng);
        let first = traj.strokes[0];
        let mix = signature(MovementLabel::M1).mixing;
        assert_eq!(traj.position(0.0), [0.0; 3]);
        let top = traj.position(first.duration);
        for a in 0..3 {
            assert!((top[a] - 0.3 * mix[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn net_velocity_change_is_zero() {
        for m in MovementLabel::KEY {
            let s = gen_movement(&SynthProfile::healthy(m, 2.0, 0.3, 1)).unwrap();
            let dt = 1.0 / s.fs();
            let mut v = [0.0; 3];
            for w in s.samples().windows(2) {
                for a in 0..3 {
                    v[a] += 0.5 * (w[0][a] + w[1][a]) * dt;
                }
            }
            assert!(v.iter().all(|x| x.abs() < 1e-9), "{m}: {v:?}");
        }
    }

    #[test]
    fn peak_jerk_matches_quintic_third_derivative() {
        let p = SynthProfile { fs: 400.0, ..SynthProfile::healthy(MovementLabel::M2, 2.0, 0.25, 0) };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let traj = trajectory(&p, &mut rng);
        let sig = signature(MovementLabel::M2);
        let leg = traj.duration / sig.legs as f64;
        let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * traj.duration / 4000.0).collect();
        let series = gen_movement(&p).unwrap();
        let numeric = differentiate(&series).unwrap();
        for axis in Axis::ALL {
            let want = 60.0 * 0.25 * sig.mixing[axis.index()].abs() / leg.powi(3);
            let peak = grid.iter().map(|&t| traj.jerk(t)[axis.index()].abs()).fold(0.0, f64::max);
            assert!((peak - want).abs() <= 1e-9 * want, "{axis:?}: {peak} vs {want}");
            let npeak = numeric.axis(axis).map(f64::abs).fold(0.0, f64::max);
            assert!((npeak - want).abs() <= 0.1 * want, "{axis:?}: numeric {npeak} vs {want}");
        }
    }

    #[test]
    fn determinism_per_seed() {
        let mut p = SynthProfile::healthy(MovementLabel::M3, 2.0, 0.3, 5);
        p.noise_sigma = 0.05;
        p.n_submovements = 4;
        assert_eq!(gen_movement(&p).unwrap(), gen_movement(&p).unwrap());
        let q = SynthProfile { seed: 6, ..p };
        assert_ne!(gen_movement(&p).unwrap(), gen_movement(&q).unwrap());
    }

    #[test]
    fn degenerate_patient_is_healthy() {
        let p = SynthProfile::healthy(MovementLabel::M4, 2.0, 0.3, 9);
        assert_eq!(gen_patient_variant(&p).unwrap(), gen_movement(&p).unwrap());
    }

    #[test]
    fn patient_variant_is_jerkier() {
        let mut p = SynthProfile::healthy(MovementLabel::M1, 2.0, 0.3, 3);
        p.n_submovements = 5;
        p.noise_sigma = 0.05;
        let patient = mean_sq_jerk_x(&gen_patient_variant(&p).unwrap());
        let healthy = mean_sq_jerk_x(&gen_movement(&p.healthy_counterpart()).unwrap());
        assert!(patient >= 2.0 * healthy, "{patient} vs {healthy}");
        assert_eq!(gen_movement(&p).unwrap().len(), gen_movement(&p.healthy_counterpart()).unwrap().len());
    }

    #[test]
    fn more_noise_more_jerk_on_average() {
        let mut last = 0.0;
        for sigma in [0.0, 0.02, 0.05, 0.1] {
            let mean: f64 = (0..50)
                .map(|seed| {
                    let mut p = SynthProfile::healthy(MovementLabel::M2, 2.0, 0.3, seed);
                    p.n_submovements = 4;
                    p.noise_sigma = sigma;
                    mean_sq_jerk_x(&gen_movement(&p).unwrap())
                })
                .sum::<f64>()
                / 50.0;
            assert!(mean > last, "sigma {sigma}: {mean} <= {last}");
            last = mean;
        }
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        let ok = SynthProfile::healthy(MovementLabel::M1, 2.0, 0.3, 0);
        for bad in [
            SynthProfile { duration_s: 0.2, ..ok },
            SynthProfile { n_submovements: 0, ..ok },
            SynthProfile { noise_sigma: -1.0, ..ok },
            SynthProfile { speed_factor: 0.0, ..ok },
            SynthProfile { movement: MovementLabel::Other(3), ..ok },
        ] {
            assert!(gen_movement(&bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn dataset_is_balanced() {
        let recs = gen_dataset(12, 0.5, 1).unwrap();
        for m in MovementLabel::KEY {
            let n: usize = recs.iter().flat_map(|r| &r.annotations).filter(|a| a.label == m).count();
            assert_eq!(n, 12);
        }
        for r in &recs {
            r.validate().unwrap();
        }
    }
}
