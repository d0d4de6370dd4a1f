//! Finite-dimensional tracial von Neumann algebras `⊕_j L^∞(Ω_j; M_{n_j})`.
//!
//! An [`AlgebraSpec`] is an ordered list of blocks; block `j` carries a matrix
//! size `n_j` and one strictly positive trace weight per point of the finite set
//! `Ω_j`. Every (block, point) pair is a *slot*: a full matrix algebra `M_{n_j}`
//! whose matrix trace is scaled by the point weight. Elements store one complex
//! matrix per slot, in slot order (block-major, then point-major).

use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use crate::linalg::{c, Mat, Vector, C64, ONE, ZERO};
use crate::map::LinearMap;
use crate::lp::Exponent;
use crate::{tol, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub size: usize,
    pub weights: Vec<f64>,
}

impl Block {
    pub fn new(size: usize, weights: Vec<f64>) -> Self {
        Self { size, weights }
    }
}

/// A single `M_n` summand at one point of one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub block: usize,
    pub point: usize,
    pub size: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraSpec {
    blocks: Vec<Block>,
}

impl AlgebraSpec {
    /// Validates and builds a spec. Block order is preserved as given.
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptyAlgebra);
        }
        for (j, b) in blocks.iter().enumerate() {
            if b.size == 0 {
                return Err(Error::ZeroBlockSize { block: j });
            }
            if b.weights.is_empty() {
                return Err(Error::NoPoints { block: j });
            }
            for (k, &w) in b.weights.iter().enumerate() {
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::BadWeight { block: j, point: k, weight: w });
                }
            }
        }
        Ok(Self { blocks })
    }

    /// `M_n` with unit trace weight.
    pub fn full_matrix(n: usize) -> Result<Self> {
        Self::new(vec![Block::new(n, vec![1.0])])
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::new();
        for (j, b) in self.blocks.iter().enumerate() {
            for (k, &w) in b.weights.iter().enumerate() {
                out.push(Slot { block: j, point: k, size: b.size, weight: w });
            }
        }
        out
    }

    pub fn slot_count(&self) -> usize {
        self.blocks.iter().map(|b| b.weights.len()).sum()
    }

    /// Complex dimension `Σ |Ω_j| n_j²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.weights.len() * b.size * b.size).sum()
    }

    /// Offset of each slot inside the coordinate vector.
    pub fn slot_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.slots()
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.size * s.size;
                o
            })
            .collect()
    }

    /// Largest block size: the algebra is subhomogeneous of exactly this degree.
    pub fn subhomogeneous_degree(&self) -> usize {
        self.blocks.iter().map(|b| b.size).max().unwrap_or(1)
    }

    pub fn is_abelian(&self) -> bool {
        self.subhomogeneous_degree() == 1
    }

    /// The opposite algebra, realized through blockwise transposition. As a
    /// weighted block structure it coincides with `self`; see [`Element::op_iso`].
    pub fn opposite(&self) -> Self {
        self.clone()
    }

    /// `self ⊕ other`, blocks of `self` first.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().cloned());
        Self { blocks }
    }

    /// `self ⊗ M_m`: every block size multiplied by `m`, weights unchanged.
    pub fn tensor_matrix(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadAmplification);
        }
        Ok(Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| Block::new(b.size * m, b.weights.clone()))
                .collect(),
        })
    }

    /// The summand spanned by the given slots (indices into [`Self::slots`]).
    /// Consecutive slots of the same block are regrouped into one block.
    pub fn sub_spec(&self, slot_ids: &[usize]) -> Result<Self> {
        let slots = self.slots();
        let mut ids = slot_ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut blocks: Vec<Block> = Vec::new();
        let mut last_block = usize::MAX;
        for id in ids {
            let s = slots
                .get(id)
                .ok_or_else(|| Error::Shape(format!("slot {id} out of range")))?;
            if s.block == last_block {
                blocks.last_mut().expect("open block").weights.push(s.weight);
            } else {
                blocks.push(Block::new(s.size, vec![s.weight]));
                last_block = s.block;
            }
        }
        Self::new(blocks)
    }
}

/// A finite family of projections, e.g. the minimal central projections.
#[derive(Debug, Clone)]
pub struct ProjectionList {
    pub projections: Vec<Element>,
}

impl ProjectionList {
    /// Largest deviation from `p² = p = p*` over the list.
    pub fn max_defect(&self) -> f64 {
        self.projections
            .iter()
            .map(|p| {
                let sq = (&(p * p) - p).max_abs();
                let sa = (&p.adjoint() - p).max_abs();
                sq.max(sa)
            })
            .fold(0.0, f64::max)
    }

    pub fn is_valid(&self) -> bool {
        self.max_defect() <= tol::ALG
    }

    pub fn sum(&self) -> Option<Element> {
        let mut it = self.projections.iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, p| &acc + p))
    }
}

/// An element of an [`AlgebraSpec`] (and of every `L^p` over it).
///
/// Arithmetic operators panic on operands from different algebras; the
/// `checked_*` methods report [`Error::SpecMismatch`] instead.
#[derive(Debug, Clone)]
pub struct Element {
    spec: Arc<AlgebraSpec>,
    mats: Vec<Mat>,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.same_spec(other) && self.mats == other.mats
    }
}

impl Element {
    /// Builds an element from one matrix per slot.
    pub fn from_slots(spec: Arc<AlgebraSpec>, mats: Vec<Mat>) -> Result<Self> {
        let slots = spec.slots();
        if mats.len() != slots.len() {
            return Err(Error::Shape(format!(
                "expected {} slot matrices, got {}",
                slots.len(),
                mats.len()
            )));
        }
        for (i, (m, s)) in mats.iter().zip(&slots).enumerate() {
            if m.shape() != (s.size, s.size) {
                return Err(Error::Shape(format!(
                    "slot {i}: expected {n}x{n}, got {}x{}",
                    m.nrows(),
                    m.ncols(),
                    n = s.size
                )));
            }
        }
        Ok(Self { spec, mats })
    }

    pub fn from_fn(spec: &Arc<AlgebraSpec>, mut f: impl FnMut(usize, &Slot) -> Mat) -> Self {
        let mats = spec.slots().iter().enumerate().map(|(i, s)| f(i, s)).collect();
        Self::from_slots(spec.clone(), mats).expect("from_fn produced wrong shapes")
    }

    pub fn zero(spec: &Arc<AlgebraSpec>) -> Self {
        Self::from_fn(spec, |_, s| Mat::zeros(s.size, s.size))
    }

    pub fn identity(spec: &Arc<AlgebraSpec>) -> Self {
        Self::from_fn(spec, |_, s| Mat::identity(s.size, s.size))
    }

    /// Identity on one slot, zero elsewhere.
    pub fn slot_identity(spec: &Arc<AlgebraSpec>, slot: usize) -> Self {
        Self::from_fn(spec, |i, s| {
            if i == slot {
                Mat::identity(s.size, s.size)
            } else {
                Mat::zeros(s.size, s.size)
            }
        })
    }

    /// The matrix unit `e_{ab}` in the given slot.
    pub fn matrix_unit(spec: &Arc<AlgebraSpec>, slot: usize, a: usize, b: usize) -> Self {
        let mut x = Self::zero(spec);
        x.mats[slot][(a, b)] = ONE;
        x
    }

    /// All matrix units, in coordinate order.
    pub fn basis(spec: &Arc<AlgebraSpec>) -> Vec<Element> {
        let mut out = Vec::with_capacity(spec.dim());
        for (i, s) in spec.slots().iter().enumerate() {
            for a in 0..s.size {
                for b in 0..s.size {
                    out.push(Self::matrix_unit(spec, i, a, b));
                }
            }
        }
        out
    }

    pub fn spec(&self) -> &Arc<AlgebraSpec> {
        &self.spec
    }

    pub fn slot(&self, i: usize) -> &Mat {
        &self.mats[i]
    }

    pub fn slot_mut(&mut self, i: usize) -> &mut Mat {
        &mut self.mats[i]
    }

    pub fn slot_mats(&self) -> &[Mat] {
        &self.mats
    }

    pub fn same_spec(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.spec, &other.spec) || *self.spec == *other.spec
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.same_spec(other) {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    /// Coordinate vector: slot-major, then row-major inside each slot.
    pub fn to_coords(&self) -> Vector {
        let mut v = Vec::with_capacity(self.spec.dim());
        for m in &self.mats {
            for r in 0..m.nrows() {
                for k in 0..m.ncols() {
                    v.push(m[(r, k)]);
                }
            }
        }
        Vector::from_vec(v)
    }

    pub fn from_coords(spec: &Arc<AlgebraSpec>, v: &Vector) -> Result<Self> {
        if v.len() != spec.dim() {
            return Err(Error::Shape(format!("expected {} coordinates, got {}", spec.dim(), v.len())));
        }
        let mut off = 0;
        Ok(Self::from_fn(spec, |_, s| {
            let m = Mat::from_fn(s.size, s.size, |r, k| v[off + r * s.size + k]);
            off += s.size * s.size;
            m
        }))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Mat, &Mat) -> Mat) -> Self {
        assert!(self.same_spec(other), "operands live in different algebras");
        Self {
            spec: self.spec.clone(),
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn map_slots(&self, f: impl Fn(&Mat) -> Mat) -> Self {
        Self { spec: self.spec.clone(), mats: self.mats.iter().map(f).collect() }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, z: C64) -> Self {
        self.map_slots(|m| m * z)
    }

    pub fn scale_re(&self, t: f64) -> Self {
        self.scale(c(t))
    }

    pub fn adjoint(&self) -> Self {
        self.map_slots(|m| m.adjoint())
    }

    /// The concrete isomorphism `M^op → M`, blockwise transposition.
    /// It reverses products and preserves the trace.
    pub fn op_iso(&self) -> Self {
        self.map_slots(|m| m.transpose())
    }

    /// Weighted trace `τ(x) = Σ μ(ω) Tr(x_ω)`.
    pub fn trace(&self) -> C64 {
        self.spec
            .slots()
            .iter()
            .zip(&self.mats)
            .map(|(s, m)| m.trace() * s.weight)
            .fold(ZERO, |a, b| a + b)
    }

    /// Unweighted Hilbert–Schmidt norm of the coordinate vector.
    pub fn coord_norm(&self) -> f64 {
        self.mats.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.mats
            .iter()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Operator norm `max_ω ‖x_ω‖_∞`.
    pub fn operator_norm(&self) -> f64 {
        self.mats.iter().map(crate::linalg::spectral_norm).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    /// Entrywise comparison relative to `1 + max(|x|, |y|)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if !self.same_spec(other) {
            return false;
        }
        let scale = 1.0 + self.max_abs().max(other.max_abs());
        (self - other).max_abs() <= tol * scale
    }

    pub fn self_adjoint_defect(&self) -> f64 {
        (self - &self.adjoint()).max_abs()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Restriction to the given slots, as an element of `spec.sub_spec(slots)`.
    pub fn restrict(&self, sub: &Arc<AlgebraSpec>, slot_ids: &[usize]) -> Result<Self> {
        let mut ids = slot_ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        Self::from_slots(sub.clone(), ids.iter().map(|&i| self.mats[i].clone()).collect())
    }

    /// Inverse of [`Self::restrict`]: pads with zeros outside the given slots.
    pub fn extend(&self, full: &Arc<AlgebraSpec>, slot_ids: &[usize]) -> Result<Self> {
        let mut ids = slot_ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut out = Self::zero(full);
        if ids.len() != self.mats.len() {
            return Err(Error::Shape(format!("{} slots for {} matrices", ids.len(), self.mats.len())));
        }
        for (m, &i) in self.mats.iter().zip(&ids) {
            if out.mats[i].shape() != m.shape() {
                return Err(Error::Shape(format!("slot {i} has the wrong size")));
            }
            out.mats[i] = m.clone();
        }
        Ok(out)
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.map_slots(|m| -m)
    }
}

/// Make a validated spec from `(size, weights)` pairs.
pub fn make_algebra(blocks: &[(usize, &[f64])]) -> Result<AlgebraSpec> {
    AlgebraSpec::new(blocks.iter().map(|(n, w)| Block::new(*n, w.to_vec())).collect())
}

/// One identity projection per slot: mutually orthogonal, central, summing to 1.
pub fn minimal_central_projections(spec: &Arc<AlgebraSpec>) -> ProjectionList {
    ProjectionList {
        projections: (0..spec.slot_count()).map(|i| Element::slot_identity(spec, i)).collect(),
    }
}

pub fn subhomogeneous_degree(spec: &AlgebraSpec) -> usize {
    spec.subhomogeneous_degree()
}

/// The normalized corner embedding `a ↦ ‖ε‖_p^{-1} (a ⊗ ε)` of `S^p_{N+1}` into
/// `L^p(spec)`, where `a ⊗ ε` places `a` in the top-left `(N+1)×(N+1)` corner of
/// the first slot whose block has size at least `N+1`.
pub fn embed_matrix_block(spec: &Arc<AlgebraSpec>, degree: usize, p: Exponent) -> Result<LinearMap> {
    let needed = degree + 1;
    let (slot_id, slot) = spec
        .slots()
        .into_iter()
        .enumerate()
        .find(|(_, s)| s.size >= needed)
        .ok_or(Error::NoLargeBlock { needed, degree: spec.subhomogeneous_degree() })?;
    let source = Arc::new(AlgebraSpec::full_matrix(needed)?);
    // ‖ε‖_p for a rank-one ε at a point of weight μ
    let norm_eps = slot.weight.powf(1.0 / p.value());
    let scale = c(1.0 / norm_eps);
    LinearMap::from_fn(source, spec.clone(), p, |a| {
        let mut out = Element::zero(spec);
        let corner = a.slot(0) * scale;
        out.slot_mut(slot_id).view_mut((0, 0), (needed, needed)).copy_from(&corner);
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(s: AlgebraSpec) -> Arc<AlgebraSpec> {
        Arc::new(s)
    }

    #[test]
    fn make_algebra_examples() {
        let m2 = make_algebra(&[(2, &[1.0])]).unwrap();
        assert_eq!(m2.dim(), 4);
        let l3 = make_algebra(&[(1, &[1.0, 1.0, 1.0])]).unwrap();
        assert!(l3.is_abelian());
        assert_eq!(l3.slot_count(), 3);
        let mix = make_algebra(&[(2, &[1.0]), (3, &[0.5, 0.5])]).unwrap();
        assert_eq!(mix.dim(), 4 + 9 + 9);
        assert_eq!(mix.subhomogeneous_degree(), 3);
    }

    #[test]
    fn make_algebra_rejects_bad_input() {
        assert_eq!(make_algebra(&[]), Err(Error::EmptyAlgebra));
        assert_eq!(make_algebra(&[(0, &[1.0])]), Err(Error::ZeroBlockSize { block: 0 }));
        assert!(matches!(make_algebra(&[(2, &[0.0])]), Err(Error::BadWeight { .. })));
        assert!(matches!(make_algebra(&[(2, &[-1.0])]), Err(Error::BadWeight { .. })));
        assert_eq!(make_algebra(&[(2, &[])]), Err(Error::NoPoints { block: 0 }));
    }

    #[test]
    fn trace_examples() {
        let m2 = arc(make_algebra(&[(2, &[1.0])]).unwrap());
        assert_eq!(Element::identity(&m2).trace(), c(2.0));
        let mix = arc(make_algebra(&[(2, &[1.0]), (3, &[0.5, 0.5])]).unwrap());
        assert!((Element::identity(&mix).trace() - c(5.0)).norm() < 1e-14);
        assert_eq!(Element::matrix_unit(&m2, 0, 0, 1).trace(), ZERO);
    }

    #[test]
    fn matrix_unit_calculus() {
        let m2 = arc(AlgebraSpec::full_matrix(2).unwrap());
        let e = |a, b| Element::matrix_unit(&m2, 0, a, b);
        assert!((&e(0, 0) * &e(1, 1)).is_zero(0.0));
        assert_eq!(&e(0, 1) * &e(1, 0), e(0, 0));
        assert_eq!(e(0, 1).adjoint(), e(1, 0));
    }

    #[test]
    fn checked_ops_reject_mismatch() {
        let a = arc(AlgebraSpec::full_matrix(2).unwrap());
        let b = arc(AlgebraSpec::full_matrix(3).unwrap());
        let x = Element::identity(&a);
        let y = Element::identity(&b);
        assert_eq!(x.checked_mul(&y), Err(Error::SpecMismatch));
        assert_eq!(x.checked_add(&y), Err(Error::SpecMismatch));
    }

    #[test]
    fn central_projections_partition_unity() {
        let spec = arc(make_algebra(&[(2, &[1.0]), (3, &[1.0])]).unwrap());
        let z = minimal_central_projections(&spec);
        assert_eq!(z.projections.len(), 2);
        assert!(z.is_valid());
        assert_eq!(z.sum().unwrap(), Element::identity(&spec));
        assert!((&z.projections[0] * &z.projections[1]).is_zero(0.0));

        let m2 = arc(AlgebraSpec::full_matrix(2).unwrap());
        let z = minimal_central_projections(&m2);
        assert_eq!(z.projections, vec![Element::identity(&m2)]);

        let ab = arc(make_algebra(&[(1, &[1.0, 1.0])]).unwrap());
        assert_eq!(minimal_central_projections(&ab).projections.len(), 2);
    }

    #[test]
    fn op_iso_transposes_matrix_units() {
        let m2 = arc(AlgebraSpec::full_matrix(2).unwrap());
        let e12 = Element::matrix_unit(&m2, 0, 0, 1);
        assert_eq!(e12.op_iso(), Element::matrix_unit(&m2, 0, 1, 0));
        assert_eq!(e12.op_iso().op_iso(), e12);
    }

    #[test]
    fn coords_round_trip() {
        let spec = arc(make_algebra(&[(2, &[1.0]), (1, &[2.0, 3.0])]).unwrap());
        let x = Element::from_fn(&spec, |i, s| {
            Mat::from_fn(s.size, s.size, |r, k| C64::new((i + r) as f64, k as f64))
        });
        let v = x.to_coords();
        assert_eq!(v.len(), spec.dim());
        assert_eq!(Element::from_coords(&spec, &v).unwrap(), x);
    }

    #[test]
    fn sub_spec_groups_points() {
        let spec = make_algebra(&[(2, &[1.0]), (3, &[0.5, 0.25])]).unwrap();
        let sub = spec.sub_spec(&[1, 2]).unwrap();
        assert_eq!(sub.blocks(), &[Block::new(3, vec![0.5, 0.25])]);
        let sub = spec.sub_spec(&[0, 2]).unwrap();
        assert_eq!(sub.blocks().len(), 2);
        assert!(spec.sub_spec(&[]).is_err());
    }

    #[test]
    fn embed_exact_size_is_identity() {
        let spec = arc(AlgebraSpec::full_matrix(3).unwrap());
        let g = embed_matrix_block(&spec, 2, Exponent::new(1.5).unwrap()).unwrap();
        let a = Element::from_fn(g.source(), |_, s| Mat::from_fn(s.size, s.size, |r, k| c((r * 3 + k) as f64)));
        let img = g.apply(&a);
        assert_eq!(img.slot(0), a.slot(0));
    }

    #[test]
    fn embed_fails_without_large_block() {
        let spec = arc(AlgebraSpec::full_matrix(2).unwrap());
        let err = embed_matrix_block(&spec, 2, Exponent::new(1.0).unwrap()).unwrap_err();
        assert_eq!(err, Error::NoLargeBlock { needed: 3, degree: 2 });
    }
}
