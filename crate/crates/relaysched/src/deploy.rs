//! Random sensor placement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relaysched_core::model::Sensor;

use crate::error::{Error, Result};
use crate::tdrive::BBox;

/// `n_sensors` sensors `s0, s1, ...` drawn uniformly and independently in
/// latitude and longitude inside `bbox`.
pub fn generate_deployment(bbox: &BBox, n_sensors: usize, seed: u64) -> Result<Vec<Sensor>> {
    if bbox.is_degenerate() {
        return Err(Error::Invalid(format!("degenerate bounding box {bbox:?}")));
    }
    if n_sensors == 0 {
        return Err(Error::Invalid("at least one sensor is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_sensors)
        .map(|j| {
            let lat = rng.random_range(bbox.min_lat..bbox.max_lat);
            let lon = rng.random_range(bbox.min_lon..bbox.max_lon);
            Sensor::new(format!("s{j}"), lat, lon)
        })
        .collect())
}
