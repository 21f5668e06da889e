//! EHAL, ELAH and random selection on a hand-made pool.
//!
//!     cargo run --example ehal_selection

use uq_curate::curation::{curate, ehal_select_one, CurationConfig, NAle, Selector, UncertaintyRecord};

fn main() -> uq_curate::Result<()> {
    // (id, epistemic, aleatoric)
    let pool: Vec<UncertaintyRecord> = [
        ("informative-noisy", 0.90, 0.85),
        ("informative-clean", 0.80, 0.10),
        ("boundary", 0.60, 0.60),
        ("redundant-clean", 0.05, 0.05),
        ("redundant-noisy", 0.10, 0.70),
        ("middling", 0.40, 0.30),
    ]
    .into_iter()
    .map(|(id, e, a)| UncertaintyRecord::new(id, e, a))
    .collect();

    println!("single EHAL pick with n_ale = 1: {}", ehal_select_one(&pool, 1)?);
    for selector in Selector::ALL {
        let picked = curate(
            &pool,
            &CurationConfig {
                n_to_select: 3,
                n_ale: NAle::Count(1),
                selector,
                seed: 11,
            },
        )?;
        println!("{selector:>6}: {}", picked.join(", "));
    }
    Ok(())
}
