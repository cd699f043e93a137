//! Differentiate a sampled acceleration into jerk and snap, then summarise the
//! squared jerk per axis.
//!
//! ```text
//! cargo run --release --example derivative_chain
//! ```

use std::f64::consts::PI;

use neurorehab::signal::{differentiate, segment_stats, squared_jerk, Axis, TimeSeries3D};

fn main() -> neurorehab::Result<()> {
    let fs = 100.0;
    let samples = (0..=100)
        .map(|n| {
            let t = n as f64 / fs;
            [(2.0 * PI * t).sin(), 0.5 * (4.0 * PI * t).cos(), 9.81]
        })
        .collect();
    let accel = TimeSeries3D::acceleration(fs, samples)?;
    let jerk = differentiate(&accel)?;
    let snap = differentiate(&jerk)?;
    for s in [&accel, &jerk, &snap] {
        println!("order {} ({}), {} samples", s.order().0, s.order().unit(), s.len());
    }

    // Accuracy of the x-axis jerk against 2*pi*cos(2*pi*t).
    let (mut err, mut norm) = (0.0, 0.0);
    for (n, v) in jerk.axis(Axis::X).enumerate() {
        let truth = 2.0 * PI * (2.0 * PI * n as f64 / fs).cos();
        err += (v - truth).powi(2);
        norm += truth * truth;
    }
    println!("x jerk relative RMS error: {:.3e}", (err / norm).sqrt());

    let stats = segment_stats(&squared_jerk(&jerk)?)?;
    for axis in Axis::ALL {
        let s = stats.axis(axis);
        println!("squared jerk {}: mean {:.4} max {:.4} min {:.3e}", axis.name(), s.mean, s.max, s.min);
    }
    Ok(())
}
