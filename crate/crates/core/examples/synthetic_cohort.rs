//! Generate a synthetic healthy/patient cohort, assess every annotated
//! segment and compare the cohorts on mean squared jerk.
//!
//! ```text
//! cargo run --release --example synthetic_cohort -- [n_per_class] [out_dir]
//! ```

use neurorehab::dataset::{Group, MovementLabel};
use neurorehab::signal::{Axis, Statistic};
use neurorehab::smoothness::{assess_recording, cohort_compare, cohort_stats, render_comparison, Measure};
use neurorehab::synth::{gen_dataset, gen_movement, gen_patient_variant, write_dataset, SynthProfile};

fn main() -> neurorehab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_per_class: usize = args.next().map_or(40, |s| s.parse().expect("n_per_class"));
    let out = args.next();

    // One healthy stroke against its jerky, noisy counterpart.
    let patient = SynthProfile {
        n_submovements: 5,
        noise_sigma: 0.05,
        ..SynthProfile::healthy(MovementLabel::M2, 2.0, 0.3, 11)
    };
    let h = gen_movement(&patient.healthy_counterpart())?;
    let p = gen_patient_variant(&patient)?;
    let mean_sq_x =
        |s| -> neurorehab::Result<f64> { Ok(neurorehab::smoothness::movement_smoothness(s)?.1.x.mean) };
    println!(
        "single M2 stroke, {} samples: healthy {:.4}, patient {:.4} mean squared jerk (x)",
        h.len(),
        mean_sq_x(&h)?,
        mean_sq_x(&p)?
    );

    let recordings = gen_dataset(n_per_class, 0.5, 1)?;
    if let Some(dir) = out {
        write_dataset(&recordings, std::path::Path::new(&dir))?;
        println!("wrote {} recordings to {dir}", recordings.len());
    }
    let mut records = Vec::new();
    for r in &recordings {
        records.extend(assess_recording(r)?);
    }
    let healthy = cohort_stats(&records, Group::Healthy, Measure::SquaredJerk);
    let patients = cohort_stats(&records, Group::Patient, Measure::SquaredJerk);
    let cmp = cohort_compare(&healthy, &patients)?;
    for m in MovementLabel::KEY {
        let c = cmp.get(m, Axis::X, Statistic::Mean).expect("every movement is present");
        println!(
            "{m}: healthy {:.4} patient {:.4} ratio {} ({})",
            c.healthy,
            c.patient,
            c.ratio.map_or("-".into(), |r| format!("{r:.2}")),
            c.direction.name()
        );
    }
    print!("\n{}", render_comparison(&cmp).csv);
    Ok(())
}
