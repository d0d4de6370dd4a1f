//! Seeded random elements, unitaries, projections and algebras.
//!
//! Everything draws from a `ChaCha8Rng`, so a seed fixes the output on every
//! platform.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraSpec, Block, Element};
use crate::linalg::{self, c, Mat, C64};
use crate::lp::AmplifiedElement;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-seed for instance `index` of a run seeded with `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn normal(rng: &mut SeededRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian entry (real and imaginary parts of variance 1/2).
pub fn complex_normal(rng: &mut SeededRng) -> C64 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    C64::new(normal(rng) * s, normal(rng) * s)
}

pub fn gaussian_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for r in 0..rows {
        for k in 0..cols {
            m[(r, k)] = complex_normal(rng);
        }
    }
    m
}

/// Haar-distributed unitary from the QR decomposition of a Gaussian matrix.
pub fn unitary_matrix(rng: &mut SeededRng, n: usize) -> Mat {
    let g = gaussian_matrix(rng, n, n);
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for k in 0..n {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / c(d.norm()) } else { c(1.0) };
        let mut col = q.column_mut(k);
        col *= ph;
    }
    q
}

pub fn element(rng: &mut SeededRng, spec: &Arc<AlgebraSpec>) -> Element {
    Element::from_fn(spec, |_, s| gaussian_matrix(rng, s.size, s.size))
}

pub fn self_adjoint(rng: &mut SeededRng, spec: &Arc<AlgebraSpec>) -> Element {
    let x = element(rng, spec);
    (&x + &x.adjoint()).scale_re(0.5)
}

/// Positive element with eigenvalues drawn uniformly from `[lo, hi]`.
pub fn positive(rng: &mut SeededRng, spec: &Arc<AlgebraSpec>, lo: f64, hi: f64) -> Element {
    Element::from_fn(spec, |_, s| {
        let u = unitary_matrix(rng, s.size);
        let d = Mat::from_fn(s.size, s.size, |r, k| if r == k { c(rng.random_range(lo..=hi)) } else { c(0.0) });
        &u * d * u.adjoint()
    })
}

pub fn unitary(rng: &mut SeededRng, spec: &Arc<AlgebraSpec>) -> Element {
    Element::from_fn(spec, |_, s| unitary_matrix(rng, s.size))
}

/// Orthogonal projection of random rank (possibly 0 or full) in every slot.
pub fn projection(rng: &mut SeededRng, spec: &Arc<AlgebraSpec>) -> Element {
    Element::from_fn(spec, |_, s| {
        let rank = rng.random_range(0..=s.size);
        projection_matrix(rng, s.size, rank)
    })
}

pub fn projection_matrix(rng: &mut SeededRng, n: usize, rank: usize) -> Mat {
    let u = unitary_matrix(rng, n);
    let cols = u.columns(0, rank);
    &cols * cols.adjoint()
}

/// Pair of orthogonal projections `(p, q)` with `pq = 0` drawn from one unitary.
pub fn orthogonal_pair(rng: &mut SeededRng, spec: &Arc<AlgebraSpec>) -> (Element, Element) {
    let mut ps = Vec::new();
    let mut qs = Vec::new();
    for s in spec.slots() {
        let u = unitary_matrix(rng, s.size);
        let a = rng.random_range(0..=s.size);
        let b = rng.random_range(0..=s.size - a);
        let pc = u.columns(0, a);
        let qc = u.columns(a, b);
        ps.push(&pc * pc.adjoint());
        qs.push(&qc * qc.adjoint());
    }
    (
        Element::from_slots(spec.clone(), ps).expect("slot shapes"),
        Element::from_slots(spec.clone(), qs).expect("slot shapes"),
    )
}

pub fn amplified(rng: &mut SeededRng, base: &Arc<AlgebraSpec>, m: usize) -> AmplifiedElement {
    AmplifiedElement::from_fn(base, m, |_, _| element(rng, base)).expect("m >= 1")
}

/// Amplified element whose assembled matrix has rank at most `rank` in every slot.
pub fn low_rank_amplified(rng: &mut SeededRng, base: &Arc<AlgebraSpec>, m: usize, rank: usize) -> AmplifiedElement {
    let big = Element::from_fn(&Arc::new(base.tensor_matrix(m).expect("m >= 1")), |_, s| {
        let k = rank.min(s.size);
        gaussian_matrix(rng, s.size, k) * gaussian_matrix(rng, k, s.size)
    });
    AmplifiedElement::disassemble(base, m, &big).expect("tensor spec")
}

/// Random algebra with at most `max_blocks` blocks, sizes up to `max_size`,
/// up to `max_points` points per block, and total dimension at most `max_dim`.
pub fn spec(rng: &mut SeededRng, max_blocks: usize, max_size: usize, max_points: usize, max_dim: usize) -> AlgebraSpec {
    loop {
        let nb = rng.random_range(1..=max_blocks.max(1));
        let mut blocks = Vec::with_capacity(nb);
        for _ in 0..nb {
            let n = rng.random_range(1..=max_size.max(1));
            let k = rng.random_range(1..=max_points.max(1));
            let w = (0..k).map(|_| rng.random_range(0.25..=2.0)).collect();
            blocks.push(Block::new(n, w));
        }
        let s = AlgebraSpec::new(blocks).expect("valid random spec");
        if s.dim() <= max_dim {
            return s;
        }
    }
}

/// Random permutation of `0..n`.
pub fn permutation(rng: &mut SeededRng, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
    v
}

/// Unit vector (coordinates) used for random directions.
pub fn unit_direction(rng: &mut SeededRng, dim: usize) -> linalg::Vector {
    let v = linalg::Vector::from_fn(dim, |_, _| complex_normal(rng));
    let n = v.norm();
    v / c(n)
}
