use std::collections::BTreeMap;

use crate::{Error, Result};

/// Cohen's kappa between two annotators' labels over the same items.
///
/// Returns 1.0 when both annotators use a single identical label throughout
/// (chance agreement of one), by convention.
pub fn cohens_kappa<L: Ord>(a: &[L], b: &[L]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Metric(format!(
            "annotations differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Metric("kappa needs at least one item".into()));
    }
    let n = a.len() as u128;
    let mut marginals: BTreeMap<&L, (u128, u128)> = BTreeMap::new();
    let mut agree = 0u128;
    for (x, y) in a.iter().zip(b) {
        marginals.entry(x).or_default().0 += 1;
        marginals.entry(y).or_default().1 += 1;
        if x == y {
            agree += 1;
        }
    }
    // Integer products keep the result exactly symmetric in its arguments.
    let chance: u128 = marginals.values().map(|&(ca, cb)| ca * cb).sum();
    let nn = n * n;
    if chance == nn {
        return Ok(if agree == n { 1.0 } else { 0.0 });
    }
    let po = agree as f64 / n as f64;
    let pe = chance as f64 / nn as f64;
    Ok((po - pe) / (1.0 - pe))
}
