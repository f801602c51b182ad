use serde::{Deserialize, Serialize};

use crate::corpus::Distribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub code: String,
    pub pct_a: f64,
    pub pct_b: f64,
    /// `pct_b - pct_a`, in percentage points.
    pub delta: f64,
}

/// Per-category difference between two percentage distributions, sorted by
/// absolute change (largest first, code order on ties). Categories missing
/// from one side count as 0%.
pub fn distribution_shift(a: &Distribution, b: &Distribution) -> Vec<ShiftRow> {
    let mut rows: Vec<ShiftRow> = a
        .keys()
        .chain(b.keys())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .map(|code| {
            let pa = a.get(code).copied().unwrap_or(0.0);
            let pb = b.get(code).copied().unwrap_or(0.0);
            ShiftRow {
                code: code.clone(),
                pct_a: pa,
                pct_b: pb,
                delta: pb - pa,
            }
        })
        .collect();
    rows.sort_by(|x, y| y.delta.abs().total_cmp(&x.delta.abs()).then_with(|| x.code.cmp(&y.code)));
    rows
}
