#![allow(dead_code)]

use omnigaze::kernels::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn values(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn tensor(rng: &mut impl Rng, shape: &[usize], scale: f64) -> Tensor {
    Tensor::new(shape.to_vec(), values(rng, shape.iter().product(), scale)).unwrap()
}

pub fn t(shape: &[usize], data: &[f64]) -> Tensor {
    Tensor::new(shape.to_vec(), data.to_vec()).unwrap()
}
