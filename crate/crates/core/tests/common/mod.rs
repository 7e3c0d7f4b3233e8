#![allow(dead_code)]

use ground_energy::rng::StreamRng;
use num_complex::Complex64;
use rand::Rng;

/// Unit vector with magnitudes in `[0.5, 1.5)` before normalization and
/// uniform phases.
pub fn random_unit_vector(n: usize, rng: &mut StreamRng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| {
            let mag: f64 = rng.random_range(0.5..1.5);
            Complex64::from_polar(mag, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Vector with independent standard-ish complex entries (not normalized).
pub fn random_vector(n: usize, rng: &mut StreamRng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Mean, standard error of the mean (of the complex distance) and second
/// moment `E|X|²` of a sample.
pub fn moments(xs: &[Complex64]) -> (Complex64, f64, f64) {
    let n = xs.len() as f64;
    let mean: Complex64 = xs.iter().sum::<Complex64>() / n;
    let var = xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    let second = xs.iter().map(|x| x.norm_sqr()).sum::<f64>() / n;
    (mean, (var / n).sqrt(), second)
}
