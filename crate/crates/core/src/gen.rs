//! Seeded random instances for property batteries.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fitzpatrick::MaxAffineFn;
use crate::space::{PointSet, SsdSpace};
use crate::{Matrix, Vector};

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

/// A generator seeded from `seed` and a label, so that batteries sharing a
/// seed draw independent streams.
pub fn rng_for(seed: u64, label: &str) -> Rng8 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

pub fn uniform_vec(rng: &mut Rng8, n: usize, half: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-half..half))
}

pub fn uniform_mat(rng: &mut Rng8, r: usize, c: usize, half: f64) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.gen_range(-half..half))
}

pub fn probes(rng: &mut Rng8, n: usize, half: f64, count: usize) -> Vec<Vector> {
    (0..count).map(|_| uniform_vec(rng, n, half)).collect()
}

/// `T = BᵀB + (C − Cᵀ)`: `⟨x, T x⟩ ≥ 0`, so `x ↦ T x + c` is monotone.
pub fn monotone_matrix(rng: &mut Rng8, k: usize) -> Matrix {
    let b = uniform_mat(rng, k, k, 1.0);
    let c = uniform_mat(rng, k, k, 1.0);
    b.transpose() * b + (&c - c.transpose())
}

/// `m` points `(x, T x + c)` on the graph of a random affine monotone map in
/// the monotone model on `R^k × R^k`.
pub fn monotone_set(rng: &mut Rng8, k: usize, m: usize) -> Result<PointSet> {
    let sp = Arc::new(SsdSpace::monotone(k)?);
    let t = monotone_matrix(rng, k);
    let c = uniform_vec(rng, k, 1.0);
    let pts = (0..m)
        .map(|_| {
            let x = uniform_vec(rng, k, 2.0);
            let y = &t * &x + &c;
            Vector::from_iterator(2 * k, x.iter().chain(y.iter()).copied())
        })
        .collect();
    PointSet::new(sp, pts)
}

/// Lattice points `(x, φ(x))` of a nondecreasing scalar map, at `pitch`
/// spacing on `[-half, half]`, with slopes drawn from `{0, 1, 2}` so the
/// values stay on the same lattice.
pub fn lattice_monotone_graph(rng: &mut Rng8, half: f64, pitch: f64) -> Result<PointSet> {
    let sp = Arc::new(SsdSpace::monotone(1)?);
    let n = (2.0 * half / pitch).round() as usize;
    let mut y = -(rng.gen_range(0..=n) as f64) * pitch;
    let mut pts = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = -half + i as f64 * pitch;
        pts.push(Vector::from_column_slice(&[x, y]));
        y += rng.gen_range(0..=2) as f64 * pitch;
    }
    PointSet::new(sp, pts)
}

/// Max-affine function with `pieces` random pieces on `space`.
pub fn max_affine(rng: &mut Rng8, space: Arc<SsdSpace>, pieces: usize) -> Result<MaxAffineFn> {
    let n = space.dim();
    let p = (0..pieces).map(|_| (uniform_vec(rng, n, 2.0), rng.gen_range(-2.0..2.0))).collect();
    MaxAffineFn::new(space, p)
}

/// `S = −N` with `N` symmetric positive definite.
pub fn negative_definite_space(rng: &mut Rng8, n: usize) -> Result<SsdSpace> {
    let b = uniform_mat(rng, n, n, 1.0);
    let mut nmat = b.transpose() * b + Matrix::identity(n, n) * 0.5;
    nmat = (&nmat + nmat.transpose()) * 0.5;
    SsdSpace::new(-nmat)
}

/// Max-affine `f ≥ q` on a space with negative definite `S = −N`: each piece
/// satisfies `o ≤ −½ sᵀN⁻¹s`, the minimum of `sᵀx + ½xᵀNx`.
pub fn certified_above_q(rng: &mut Rng8, space: Arc<SsdSpace>, pieces: usize) -> Result<MaxAffineFn> {
    let n = space.dim();
    let ninv = (-space.matrix()).try_inverse().expect("negative definite");
    let p = (0..pieces)
        .map(|_| {
            let s = uniform_vec(rng, n, 2.0);
            let bound = -0.5 * s.dot(&(&ninv * &s));
            (s, bound - rng.gen_range(0.0..1.0))
        })
        .collect();
    MaxAffineFn::new(space, p)
}
