//! One-sided Mann-Whitney U test on two score columns.
//!
//!     cargo run --example significance_report [CSV COL_A COL_B]
//!
//! Without arguments it compares two made-up F1 samples.

use uq_curate::experiments::{read_columns, significance};

fn main() -> uq_curate::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let report = if let [csv, a, b] = args.as_slice() {
        let cols = read_columns(&[csv], &[a.as_str(), b.as_str()])?;
        significance(a, &cols[0], b, &cols[1])?
    } else {
        let ehal = [0.71, 0.74, 0.69, 0.73, 0.75, 0.72, 0.70, 0.74, 0.73, 0.71];
        let elah = [0.66, 0.70, 0.64, 0.69, 0.67, 0.65, 0.68, 0.66, 0.70, 0.63];
        significance("ehal", &ehal, "elah", &elah)?
    };
    println!(
        "{} (mean {:.4}) vs {} (mean {:.4}): U = {}, z = {:.3}, one-sided p = {:.5}",
        report.a, report.mean_a, report.b, report.mean_b, report.u, report.z, report.p_value
    );
    Ok(())
}
