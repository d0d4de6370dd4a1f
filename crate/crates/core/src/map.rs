//! Linear maps `L^p(M) → L^p(N)` stored as complex matrices on coordinate
//! vectors (slot-major, then row-major inside every slot matrix).

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::algebra::{AlgebraSpec, Element};
use crate::linalg::{self, c, Mat, C64};
use crate::lp::Exponent;
use crate::{tol, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    source: Arc<AlgebraSpec>,
    target: Arc<AlgebraSpec>,
    p: Exponent,
    matrix: Mat,
}

impl LinearMap {
    pub fn new(source: Arc<AlgebraSpec>, target: Arc<AlgebraSpec>, p: Exponent, matrix: Mat) -> Result<Self> {
        if matrix.nrows() != target.dim() || matrix.ncols() != source.dim() {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                target.dim(),
                source.dim()
            )));
        }
        Ok(Self { source, target, p, matrix })
    }

    /// Tabulates `f` on the matrix-unit basis of the source.
    pub fn from_fn(
        source: Arc<AlgebraSpec>,
        target: Arc<AlgebraSpec>,
        p: Exponent,
        mut f: impl FnMut(&Element) -> Element,
    ) -> Result<Self> {
        let basis = Element::basis(&source);
        let mut matrix = Mat::zeros(target.dim(), source.dim());
        for (k, e) in basis.iter().enumerate() {
            let img = f(e);
            if **img.spec() != *target {
                return Err(Error::SpecMismatch);
            }
            matrix.set_column(k, &img.to_coords());
        }
        Ok(Self { source, target, p, matrix })
    }

    pub fn identity(spec: &Arc<AlgebraSpec>, p: Exponent) -> Self {
        let d = spec.dim();
        Self { source: spec.clone(), target: spec.clone(), p, matrix: Mat::identity(d, d) }
    }

    pub fn zero(source: &Arc<AlgebraSpec>, target: &Arc<AlgebraSpec>, p: Exponent) -> Self {
        Self {
            source: source.clone(),
            target: target.clone(),
            p,
            matrix: Mat::zeros(target.dim(), source.dim()),
        }
    }

    /// Blockwise transposition `x ↦ x^T` of an algebra onto itself.
    pub fn transposition(spec: &Arc<AlgebraSpec>, p: Exponent) -> Self {
        Self::from_fn(spec.clone(), spec.clone(), p, Element::op_iso).expect("same spec")
    }

    pub fn source(&self) -> &Arc<AlgebraSpec> {
        &self.source
    }

    pub fn target(&self) -> &Arc<AlgebraSpec> {
        &self.target
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn with_p(&self, p: Exponent) -> Self {
        Self { p, ..self.clone() }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// Panics when `x` does not live in the source algebra.
    pub fn apply(&self, x: &Element) -> Element {
        self.try_apply(x).expect("element outside the source algebra")
    }

    pub fn try_apply(&self, x: &Element) -> Result<Element> {
        if **x.spec() != *self.source {
            return Err(Error::SpecMismatch);
        }
        Element::from_coords(&self.target, &(&self.matrix * x.to_coords()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<Self> {
        if *inner.target != *self.source {
            return Err(Error::SpecMismatch);
        }
        Ok(Self {
            source: inner.source.clone(),
            target: self.target.clone(),
            p: self.p,
            matrix: &self.matrix * &inner.matrix,
        })
    }

    pub fn checked_add(&self, other: &LinearMap) -> Result<Self> {
        if *self.source != *other.source || *self.target != *other.target {
            return Err(Error::SpecMismatch);
        }
        Ok(Self { matrix: &self.matrix + &other.matrix, ..self.clone() })
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { matrix: &self.matrix * z, ..self.clone() }
    }

    /// `x ↦ a·T(x)`.
    pub fn left_multiply(&self, a: &Element) -> Result<Self> {
        if **a.spec() != *self.target {
            return Err(Error::SpecMismatch);
        }
        Self::from_fn(self.source.clone(), self.target.clone(), self.p, |x| a * &self.apply(x))
    }

    /// `x ↦ T(x)·a`.
    pub fn right_multiply(&self, a: &Element) -> Result<Self> {
        if **a.spec() != *self.target {
            return Err(Error::SpecMismatch);
        }
        Self::from_fn(self.source.clone(), self.target.clone(), self.p, |x| &self.apply(x) * a)
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.matrix, tol::ALG)
    }

    pub fn is_invertible(&self) -> bool {
        self.source.dim() == self.target.dim() && self.rank() == self.source.dim()
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_invertible() {
            return Err(Error::Singular);
        }
        let inv = self.matrix.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(Self { source: self.target.clone(), target: self.source.clone(), p: self.p, matrix: inv })
    }

    /// Orthonormal (in coordinates) basis of `ker T`.
    pub fn kernel(&self) -> Vec<Element> {
        linalg::null_space(&self.matrix, tol::ALG)
            .iter()
            .map(|v| Element::from_coords(&self.source, v).expect("source dimension"))
            .collect()
    }

    /// `x ↦ restrict(T(extend(x)))` between the summands spanned by the given slots.
    pub fn restrict(&self, source_slots: &[usize], target_slots: &[usize]) -> Result<Self> {
        let s = Arc::new(self.source.sub_spec(source_slots)?);
        let t = Arc::new(self.target.sub_spec(target_slots)?);
        let mut err = None;
        let out = Self::from_fn(s.clone(), t.clone(), self.p, |x| {
            let full = x.extend(&self.source, source_slots).and_then(|e| self.apply(&e).restrict(&t, target_slots));
            full.unwrap_or_else(|e| {
                err = Some(e);
                Element::zero(&t)
            })
        });
        match err {
            Some(e) => Err(e),
            None => out,
        }
    }

    /// `T1 ⊕ T2 : M1 ⊕ M2 → N1 ⊕ N2`.
    pub fn direct_sum(&self, other: &LinearMap) -> Self {
        let source = Arc::new(self.source.direct_sum(&other.source));
        let target = Arc::new(self.target.direct_sum(&other.target));
        let (r1, c1) = self.matrix.shape();
        let (r2, c2) = other.matrix.shape();
        let mut matrix = Mat::zeros(r1 + r2, c1 + c2);
        matrix.view_mut((0, 0), (r1, c1)).copy_from(&self.matrix);
        matrix.view_mut((r1, c1), (r2, c2)).copy_from(&other.matrix);
        Self { source, target, p: self.p, matrix }
    }

    /// Entrywise comparison relative to `1 + max |entry|`.
    pub fn approx_eq(&self, other: &LinearMap, tol: f64) -> bool {
        if *self.source != *other.source || *self.target != *other.target {
            return false;
        }
        let scale = 1.0 + self.max_abs().max(other.max_abs());
        (&self.matrix - &other.matrix).iter().all(|z| z.norm() <= tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest coordinate singular value; equals `‖T‖_{2→2}` when every weight is 1.
    pub fn coordinate_norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }

    /// `T(1)`.
    pub fn image_of_identity(&self) -> Element {
        self.apply(&Element::identity(&self.source))
    }

    /// Same matrix scaled by the real factor `t`.
    pub fn scale_re(&self, t: f64) -> Self {
        self.scale(c(t))
    }
}
