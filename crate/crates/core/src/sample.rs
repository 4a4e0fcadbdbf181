//! Bundled demo inputs: an essential-oil name list and a seeded generator
//! for sensory-profile-shaped rating matrices.

use ndarray::Array2;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::data::{ItemSet, ProfileMatrix};

const ESSENTIAL_OILS: &str = include_str!("../data/essential_oils.txt");

/// 75 common essential-oil names, including the floral, citrus and woody
/// members of [`crate::render::GroupSpec::scent_families`].
pub fn essential_oils() -> ItemSet {
    ItemSet::new(ESSENTIAL_OILS.lines().filter(|l| !l.trim().is_empty()))
        .expect("bundled list is valid")
}

/// Seeded low-rank rating matrix on the 0–5 applicability scale.
///
/// Each item and attribute gets `factors` Gaussian loadings; a rating is
/// the clamped sum of their product, a per-attribute offset and noise.
/// Item labels are `item000…`, attribute labels `attr000…`.
pub fn latent_profile(n_items: usize, n_attributes: usize, factors: usize, seed: u64) -> ProfileMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("valid");
    let offset = Uniform::new(0.3, 1.5);
    let item_load = Array2::from_shape_simple_fn((n_items, factors), || normal.sample(&mut rng));
    let attr_load = Array2::from_shape_simple_fn((factors, n_attributes), || normal.sample(&mut rng));
    let offsets: Vec<f64> = (0..n_attributes).map(|_| offset.sample(&mut rng)).collect();
    let scale = 1.0 / (factors.max(1) as f64).sqrt();
    let mut values = item_load.dot(&attr_load) * scale;
    for ((_, j), v) in values.indexed_iter_mut() {
        *v = (*v + offsets[j] + 0.3 * normal.sample(&mut rng)).clamp(0.0, 5.0);
    }
    let items = ItemSet::new((0..n_items).map(|i| format!("item{i:03}"))).expect("unique");
    let attributes = ItemSet::new((0..n_attributes).map(|i| format!("attr{i:03}"))).expect("unique");
    ProfileMatrix::new(items, attributes, values).expect("finite")
}

/// A 160 × 146 profile with the shape of the Dravnieks odor-character table.
pub fn dravnieks_shaped_profile(seed: u64) -> ProfileMatrix {
    latent_profile(160, 146, 8, seed)
}
