#![allow(dead_code)]

use connectedness::ClusterSpec;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

/// Positive definite `B Bᵀ + 0.1 I` with `B` uniform on [-1, 1].
pub fn random_sigma<R: Rng>(rng: &mut R, n: usize) -> Array2<f64> {
    let b = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
    b.dot(&b.t()) + Array2::<f64>::eye(n) * 0.1
}

/// Lag matrices whose absolute row sums total below 0.9, which keeps the VAR stable.
pub fn random_stable_phi<R: Rng>(rng: &mut R, n: usize, p: usize) -> Vec<Array2<f64>> {
    let raw: Vec<Array2<f64>> = (0..p)
        .map(|_| Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0)))
        .collect();
    let norm: f64 = raw
        .iter()
        .map(|m| {
            m.rows()
                .into_iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max)
        })
        .sum();
    let scale = rng.random_range(0.1..0.9) / norm;
    raw.into_iter().map(|m| m * scale).collect()
}

/// Random partition of `n` series into `c` non-empty clusters with a random causal order.
pub fn random_spec<R: Rng>(rng: &mut R, n: usize, c: usize) -> ClusterSpec {
    let mut assignment: Vec<usize> = (0..n).map(|i| if i < c { i } else { rng.random_range(0..c) }).collect();
    assignment.shuffle(rng);
    let mut order: Vec<usize> = (0..c).collect();
    order.shuffle(rng);
    ClusterSpec::new((0..c).map(|k| format!("k{k}")).collect(), assignment, Some(order)).unwrap()
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn to_nalgebra(a: &Array2<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}
