//! EHAL selection, the ELAH and random baselines, and the pool-based curation loop.

mod pool_loop;
mod select;

pub use pool_loop::{curation_loop, CurationResult, CurveRow, LoopConfig};
pub use select::{
    curate, ehal_select_one, elah_select_one, top_n_by_aleatoric, top_one_by_epistemic, CurationConfig, NAle,
    Selector, UncertaintyRecord,
};

pub const CURVE_CSV_HEADER: &str = "round,fraction_added,f1,mean_epi,mean_ale,seed";

/// Learning-curve rows of one or more runs as CSV.
pub fn curves_to_csv<'a>(results: impl IntoIterator<Item = &'a CurationResult>) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for res in results {
        for r in &res.rows {
            out.push_str(&format!(
                "{},{:?},{:?},{:?},{:?},{}\n",
                r.round, r.fraction_added, r.f1, r.mean_epi, r.mean_ale, res.seed
            ));
        }
    }
    out
}
