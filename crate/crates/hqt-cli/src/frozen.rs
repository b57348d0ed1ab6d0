//! Thresholds for the validation checks, measured once against the
//! brute-force oracles and then pinned (see `data/frozen.json` for the
//! measurement provenance). Checks compare fresh measurements against these
//! bounds; they are ceilings with headroom, not expected values.

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
pub struct Frozen {
    /// Provenance note: seed and settings of the audited measurement run.
    pub provenance: String,
    /// Lower bound on min over cells of fatness * sqrt(d).
    pub fatness_min_sqrt_d: f64,
    /// Upper bound on covering_ratio / (d * sqrt(d)) over in-band pairs.
    pub covering_max_over_d_sqrt_d: f64,
    /// Upper bound on nearest-neighbour distance ratio vs brute force.
    pub ann_ratio_max: f64,
    /// Upper bound on closest-pair distance ratio vs brute force.
    pub closest_pair_ratio_max: f64,
}

pub fn load() -> Frozen {
    serde_json::from_str(include_str!("../data/frozen.json")).expect("frozen.json parses")
}
