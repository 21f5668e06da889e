//! Rank statistics: one-sided Mann-Whitney U and Spearman correlation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// 1-based ranks with ties replaced by their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// Pairs (a_i, b_j) with a_i > b_j, ties counted as one half.
    pub u_a: f64,
    pub u_b: f64,
    /// The smaller of the two.
    pub u: f64,
    pub z: f64,
    /// One-sided p-value for "a tends to exceed b".
    pub p_greater: f64,
}

/// Mann-Whitney U test with the tie-corrected normal approximation
/// (no continuity correction).
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Argument(format!(
            "Mann-Whitney needs at least 2 samples per group (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Domain("Mann-Whitney samples must be finite".into()));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let r_a: f64 = ranks[..a.len()].iter().sum();
    let u_a = r_a - n1 * (n1 + 1.0) / 2.0;
    let u_b = n1 * n2 - u_a;

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let mean = n1 * n2 / 2.0;
    let (z, p_greater) = if var > 0.0 {
        let z = (u_a - mean) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (z, normal.sf(z))
    } else {
        (0.0, 0.5)
    };
    Ok(MannWhitney {
        u_a,
        u_b,
        u: u_a.min(u_b),
        z,
        p_greater,
    })
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dim("spearman", x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::Argument("spearman needs at least 2 pairs".into()));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Domain("spearman is undefined for a constant input".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Sample mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// U_a by direct pair counting.
    fn pair_count(a: &[f64], b: &[f64]) -> f64 {
        let mut u = 0.0;
        for x in a {
            for y in b {
                if x > y {
                    u += 1.0;
                } else if x == y {
                    u += 0.5;
                }
            }
        }
        u
    }

    #[test]
    fn separated_groups_give_zero_u() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.u_a, 0.0);
        assert_eq!(r.u_b, 9.0);
        assert!(r.p_greater > 0.95);
        let flipped = mann_whitney_u(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(flipped.p_greater < 0.05);
    }

    #[test]
    fn u_matches_pair_counting_with_ties() {
        let a = [1.0, 2.0, 2.0, 5.0, 7.0];
        let b = [2.0, 3.0, 5.0, 5.0];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_relative_eq!(r.u_a, pair_count(&a, &b), epsilon = 1e-12);
        assert_relative_eq!(r.u_b, pair_count(&b, &a), epsilon = 1e-12);
    }

    #[test]
    fn identical_groups_are_symmetric() {
        let g = [0.3, 0.5, 0.7, 0.9];
        let r = mann_whitney_u(&g, &g).unwrap();
        assert_relative_eq!(r.p_greater, 0.5, epsilon = 1e-12);
        let all_tied = mann_whitney_u(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(all_tied.p_greater, 0.5);
    }

    #[test]
    fn tiny_groups_are_rejected() {
        assert!(matches!(mann_whitney_u(&[1.0], &[2.0, 3.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn spearman_monotone_and_ties() {
        assert_relative_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 90.0]).unwrap(), 1.0);
        assert_relative_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(average_ranks(&[5.0, 1.0, 5.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
