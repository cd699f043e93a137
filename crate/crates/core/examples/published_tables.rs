//! Load the published cohort and session tables and regenerate the reports:
//! cohort contrasts for jerk and squared jerk, and per-patient session
//! evolution against the first session.
//!
//! ```text
//! cargo run --release --example published_tables
//! ```

use std::path::Path;

use neurorehab::signal::{Axis, Statistic};
use neurorehab::smoothness::{
    cohort_compare, improvement_flags, load_fixture, render_comparison, render_sessions,
};

fn main() -> neurorehab::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/tables");
    for n in 1..=6 {
        let fx = load_fixture(&dir.join(format!("table{n}.csv")))?;
        if fx.is_cohort_table() {
            let (h, p) = fx.cohort_stats()?;
            let cmp = cohort_compare(&h, &p)?;
            let measure = fx.measure.map_or("unknown measure", |m| m.name());
            println!("== table {n}: {measure} by cohort");
            for &m in cmp.cells.keys() {
                let mean = cmp.get(m, Axis::X, Statistic::Mean).expect("mean cell");
                let max = cmp.get(m, Axis::X, Statistic::Max).expect("max cell");
                println!(
                    "  {m}: |patient|/|healthy| mean {:.3}, mean {}, max {}",
                    mean.ratio.unwrap_or(f64::NAN),
                    mean.direction.name(),
                    max.direction.name()
                );
            }
            print!("{}", render_comparison(&cmp).csv);
        } else {
            let table = fx.session_table()?;
            let flags = improvement_flags(&table)?;
            println!(
                "== table {n}: patient {} improves in {} movements",
                table.patient_id.as_deref().unwrap_or("?"),
                flags.improved_movements()
            );
            print!("{}", render_sessions(&table, &flags).csv);
        }
        println!();
    }
    Ok(())
}
