//! Run the representational-capacity study on generated fixtures.

use mp_polar::dataset::{gen_fixtures, run_study, StudyOptions, Suite};

fn main() -> mp_polar::Result<()> {
    let set = gen_fixtures(Suite::Mixed, 8, 3)?;
    let report = run_study(&set, &StudyOptions::default())?;
    for row in &report.aggregates {
        println!("{:>6} {:<12} {:.4}", row.mode.to_string(), row.stat.name(), row.iou);
    }
    print!("{}", report.to_csv_string()?);
    Ok(())
}
