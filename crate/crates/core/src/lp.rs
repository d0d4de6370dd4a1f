//! `L^p` norms over a weighted block algebra, polar decompositions, spectral
//! projections and the matrix amplification `L^p(M ⊗ M_m)`.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use crate::algebra::{AlgebraSpec, Element};
use crate::linalg::{self, c, hermitian_eigen, svd, Mat, Svd};
use crate::{tol, Error, Result};

/// An exponent `1 ≤ p < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::BadExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `p' = p/(p-1)`, infinite at `p = 1`.
    pub fn conjugate(self) -> f64 {
        if self.0 == 1.0 {
            f64::INFINITY
        } else {
            self.0 / (self.0 - 1.0)
        }
    }

    /// `2|1/2 − 1/p|`, the exponent of the transposition constant.
    pub fn transposition_exponent(self) -> f64 {
        2.0 * (0.5 - 1.0 / self.0).abs()
    }
}

/// `‖x‖_p^p = Σ_ω μ(ω) Σ_i σ_i(x_ω)^p`.
pub fn lp_norm_pow(x: &Element, p: Exponent) -> f64 {
    let pv = p.value();
    x.spec()
        .slots()
        .iter()
        .zip(x.slot_mats())
        .map(|(s, m)| s.weight * linalg::singular_values(m).iter().map(|v| v.powf(pv)).sum::<f64>())
        .sum()
}

/// `‖x‖_p = τ(|x|^p)^{1/p}`.
pub fn lp_norm(x: &Element, p: Exponent) -> f64 {
    lp_norm_pow(x, p).powf(1.0 / p.value())
}

/// The norm together with its gradient with respect to the real inner product
/// `Re Σ conj(x_k) y_k` on coordinates. At `p = 1` the gradient is the
/// subgradient `U V*` restricted to the nonzero singular values.
pub fn lp_norm_with_gradient(x: &Element, p: Exponent) -> (f64, Element) {
    let pv = p.value();
    let slots = x.spec().slots();
    let decs: Vec<Svd> = x.slot_mats().iter().map(svd).collect();
    let total: f64 = slots
        .iter()
        .zip(&decs)
        .map(|(s, d)| s.weight * d.s.iter().map(|v| v.powf(pv)).sum::<f64>())
        .sum();
    let norm = total.powf(1.0 / pv);
    if norm == 0.0 {
        return (0.0, Element::zero(x.spec()));
    }
    let top = decs.iter().flat_map(|d| d.s.first().copied()).fold(0.0, f64::max);
    let pre = norm.powf(1.0 - pv);
    let grad = Element::from_fn(x.spec(), |i, s| {
        let d = &decs[i];
        let mut g = Mat::zeros(s.size, s.size);
        for (k, &sk) in d.s.iter().enumerate() {
            if sk <= tol::SUPPORT_CUT * top {
                continue;
            }
            g += (d.u.column(k) * d.v.column(k).adjoint()) * c(sk.powf(pv - 1.0));
        }
        g * c(s.weight * pre)
    });
    (norm, grad)
}

/// Unit vector of `L^p` maximizing `Re⟨g, z⟩` (coordinate inner product).
///
/// With `h = g/μ` slotwise this is `|h|^{q-1}` with the phase of `h`, where `q`
/// is the conjugate exponent; at `p = 1` it is a rank-one matrix at the top
/// singular pair of the slot carrying the largest `‖h‖_∞`.
pub fn dual_maximizer(g: &Element, p: Exponent) -> Element {
    let slots = g.spec().slots();
    let h: Vec<Svd> = g
        .slot_mats()
        .iter()
        .zip(&slots)
        .map(|(m, s)| svd(&(m * c(1.0 / s.weight))))
        .collect();
    let top = h.iter().flat_map(|d| d.s.first().copied()).fold(0.0, f64::max);
    if top == 0.0 {
        return Element::zero(g.spec());
    }
    if p.value() == 1.0 {
        let (best, _) = h
            .iter()
            .enumerate()
            .map(|(i, d)| (i, d.s[0]))
            .fold((0, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        return Element::from_fn(g.spec(), |i, s| {
            if i == best {
                (h[i].u.column(0) * h[i].v.column(0).adjoint()) * c(1.0 / s.weight)
            } else {
                Mat::zeros(s.size, s.size)
            }
        });
    }
    let q = p.conjugate();
    let z = Element::from_fn(g.spec(), |i, s| {
        let d = &h[i];
        let mut m = Mat::zeros(s.size, s.size);
        for (k, &sk) in d.s.iter().enumerate() {
            if sk <= tol::SUPPORT_CUT * top {
                continue;
            }
            m += (d.u.column(k) * d.v.column(k).adjoint()) * c((sk / top).powf(q - 1.0));
        }
        m
    });
    let n = lp_norm(&z, p);
    z.scale_re(1.0 / n)
}

/// `x = w·B` with `B = |x|` and `w` a partial isometry, `w*w = s(B)`.
#[derive(Debug, Clone)]
pub struct Polar {
    pub w: Element,
    pub b: Element,
}

/// Polar decomposition from the singular value decomposition of every slot.
/// Singular values below `SUPPORT_CUT·max σ` are treated as zero.
pub fn polar(x: &Element) -> Polar {
    let decs: Vec<Svd> = x.slot_mats().iter().map(svd).collect();
    let top = decs.iter().flat_map(|d| d.s.first().copied()).fold(0.0, f64::max);
    let mut ws = Vec::with_capacity(decs.len());
    let mut bs = Vec::with_capacity(decs.len());
    for d in &decs {
        let n = d.u.nrows();
        let mut w = Mat::zeros(n, n);
        let mut b = Mat::zeros(n, n);
        for (k, &sk) in d.s.iter().enumerate() {
            if top == 0.0 || sk <= tol::SUPPORT_CUT * top {
                continue;
            }
            let vk = d.v.column(k);
            w += d.u.column(k) * vk.adjoint();
            b += (vk * vk.adjoint()) * c(sk);
        }
        ws.push(w);
        bs.push(b);
    }
    let spec = x.spec().clone();
    Polar {
        w: Element::from_slots(spec.clone(), ws).expect("slot shapes"),
        b: Element::from_slots(spec, bs).expect("slot shapes"),
    }
}

/// `|x| = (x*x)^{1/2}`.
pub fn abs(x: &Element) -> Element {
    polar(x).b
}

/// Support projection of a positive element, cutting eigenvalues below
/// `SUPPORT_CUT·‖b‖_∞`.
pub fn support(b: &Element) -> Element {
    let top = b.operator_norm();
    b.map_slots(|m| {
        if top == 0.0 {
            return Mat::zeros(m.nrows(), m.ncols());
        }
        linalg::hermitian_function(m, tol::SUPPORT_CUT * top, |_| 1.0)
    })
}

/// Functional calculus `f(x)` for self-adjoint `x`.
pub fn hermitian_calculus(x: &Element, f: impl Fn(f64) -> f64) -> Result<Element> {
    let scale = 1.0 + x.max_abs();
    let defect = x.self_adjoint_defect();
    if defect > tol::ALG * scale {
        return Err(Error::NotSelfAdjoint(defect));
    }
    Ok(x.map_slots(|m| linalg::hermitian_function(m, f64::NEG_INFINITY, &f)))
}

/// Spectral projection `χ_[lo,hi](x)` of a self-adjoint element.
///
/// Eigenvalues closer than `EIG_GAP` (relative) are clustered, and a cluster is
/// kept when its mean lies in the closed interval widened by the same gap.
pub fn spectral_projection(x: &Element, lo: f64, hi: f64) -> Result<Element> {
    let scale = 1.0 + x.max_abs();
    let defect = x.self_adjoint_defect();
    if defect > tol::ALG * scale {
        return Err(Error::NotSelfAdjoint(defect));
    }
    let gap = tol::EIG_GAP * scale;
    Ok(x.map_slots(|m| {
        let (vals, vecs) = hermitian_eigen(m);
        let n = m.nrows();
        let mut out = Mat::zeros(n, n);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && vals[end] - vals[end - 1] <= gap {
                end += 1;
            }
            let mean = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
            if mean >= lo - gap && mean <= hi + gap {
                for k in start..end {
                    let col = vecs.column(k);
                    out += &col * col.adjoint();
                }
            }
            start = end;
        }
        out
    }))
}

/// Distinct spectral projections of a self-adjoint element, clustered with the
/// same gap rule as [`spectral_projection`]. Returns `(eigenvalue, projection)` pairs.
pub fn spectral_decomposition(x: &Element) -> Result<Vec<(f64, Element)>> {
    let scale = 1.0 + x.max_abs();
    let defect = x.self_adjoint_defect();
    if defect > tol::ALG * scale {
        return Err(Error::NotSelfAdjoint(defect));
    }
    let gap = tol::EIG_GAP * scale;
    let mut all: Vec<(f64, usize, Mat)> = Vec::new();
    for (i, m) in x.slot_mats().iter().enumerate() {
        let (vals, vecs) = hermitian_eigen(m);
        for (k, &v) in vals.iter().enumerate() {
            let col = vecs.column(k);
            all.push((v, i, &col * col.adjoint()));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, Element)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (v, slot, proj) in all {
        if out.is_empty() || v - last > gap {
            out.push((v, Element::zero(x.spec())));
        }
        last = v;
        let entry = out.last_mut().expect("cluster");
        *entry.1.slot_mut(slot) += proj;
    }
    Ok(out)
}

/// A matrix `[x_ij]` with entries in `L^p(M)`, i.e. an element of `L^p(M ⊗ M_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifiedElement {
    base: Arc<AlgebraSpec>,
    m: usize,
    entries: Vec<Element>,
}

impl AmplifiedElement {
    /// `entries` in row-major order, `m²` of them, all over `base`.
    pub fn new(base: Arc<AlgebraSpec>, m: usize, entries: Vec<Element>) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadAmplification);
        }
        if entries.len() != m * m {
            return Err(Error::Shape(alloc::format!("expected {} entries, got {}", m * m, entries.len())));
        }
        if entries.iter().any(|e| !(Arc::ptr_eq(e.spec(), &base) || **e.spec() == *base)) {
            return Err(Error::SpecMismatch);
        }
        Ok(Self { base, m, entries })
    }

    pub fn from_fn(base: &Arc<AlgebraSpec>, m: usize, mut f: impl FnMut(usize, usize) -> Element) -> Result<Self> {
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                entries.push(f(i, j));
            }
        }
        Self::new(base.clone(), m, entries)
    }

    pub fn zero(base: &Arc<AlgebraSpec>, m: usize) -> Result<Self> {
        Self::from_fn(base, m, |_, _| Element::zero(base))
    }

    pub fn base(&self) -> &Arc<AlgebraSpec> {
        &self.base
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &Element {
        &self.entries[i * self.m + j]
    }

    pub fn entries(&self) -> &[Element] {
        &self.entries
    }

    /// The big element of `M ⊗ M_m`: slot matrices of size `m·n` whose
    /// `(i·n + α, j·n + β)` entry is `x_ij[α, β]`.
    pub fn assemble(&self) -> Element {
        let spec = Arc::new(self.base.tensor_matrix(self.m).expect("m >= 1"));
        let m = self.m;
        Element::from_fn(&spec, |slot, s| {
            let n = s.size / m;
            Mat::from_fn(s.size, s.size, |r, k| self.entry(r / n, k / n).slot(slot)[(r % n, k % n)])
        })
    }

    /// Inverse of [`Self::assemble`].
    pub fn disassemble(base: &Arc<AlgebraSpec>, m: usize, big: &Element) -> Result<Self> {
        let expect = base.tensor_matrix(m)?;
        if **big.spec() != expect {
            return Err(Error::SpecMismatch);
        }
        Self::from_fn(base, m, |i, j| {
            Element::from_fn(base, |slot, s| {
                let n = s.size;
                big.slot(slot).view((i * n, j * n), (n, n)).into_owned()
            })
        })
    }

    pub fn map_entries(&self, f: impl Fn(&Element) -> Element) -> Self {
        Self { base: self.base.clone(), m: self.m, entries: self.entries.iter().map(f).collect() }
    }

    /// `[x_ij] ↦ [x_ji]`.
    pub fn transpose_outer(&self) -> Self {
        let m = self.m;
        let entries = (0..m * m).map(|k| self.entries[(k % m) * m + k / m].clone()).collect();
        Self { base: self.base.clone(), m, entries }
    }

    /// `[x_ij] ↦ [t(x_ij)]`, transposing inside every entry.
    pub fn transpose_inner(&self) -> Self {
        self.map_entries(Element::op_iso)
    }

    pub fn scale_re(&self, t: f64) -> Self {
        self.map_entries(|e| e.scale_re(t))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::Shape(alloc::format!("m = {} vs {}", self.m, other.m)));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { base: self.base.clone(), m: self.m, entries })
    }

    /// Zero-pads to a larger matrix size, keeping `[x_ij]` in the top-left corner.
    pub fn pad(&self, m_new: usize) -> Result<Self> {
        if m_new < self.m {
            return Err(Error::Shape(alloc::format!("cannot pad {} down to {}", self.m, m_new)));
        }
        Self::from_fn(&self.base, m_new, |i, j| {
            if i < self.m && j < self.m {
                self.entry(i, j).clone()
            } else {
                Element::zero(&self.base)
            }
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(Element::max_abs).fold(0.0, f64::max)
    }
}

/// `‖[x_ij]‖_{L^p(M ⊗ M_m)}`.
pub fn amplified_norm(x: &AmplifiedElement, p: Exponent) -> f64 {
    lp_norm(&x.assemble(), p)
}

/// Both sides of `‖[x_ij]‖_{L^p(M^op ⊗ M_m)} = ‖[x_ji]‖_{L^p(M ⊗ M_m)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranspositionCheck {
    pub opposite_side: f64,
    pub transposed_side: f64,
    pub holds: bool,
}

/// The left side is evaluated by carrying `[x_ij]` into `M ⊗ M_m` through the
/// trace-preserving *-isomorphism `op_iso ⊗ id`, which turns it into `[t(x_ij)]`.
pub fn check_optr_cb(x: &AmplifiedElement, p: Exponent) -> TranspositionCheck {
    let left = amplified_norm(&x.transpose_inner(), p);
    let right = amplified_norm(&x.transpose_outer(), p);
    let scale = left.abs().max(right.abs()).max(f64::MIN_POSITIVE);
    TranspositionCheck {
        opposite_side: left,
        transposed_side: right,
        holds: (left - right).abs() <= tol::NORM * scale || (left == 0.0 && right == 0.0),
    }
}

/// `‖x‖_2` computed directly from the entries (a cheap cross-check).
pub fn hilbert_schmidt_norm(x: &Element) -> f64 {
    x.spec()
        .slots()
        .iter()
        .zip(x.slot_mats())
        .map(|(s, m)| s.weight * m.norm_squared())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_algebra;
    use crate::linalg::{C64, ONE, ZERO};

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    fn m(n: usize) -> Arc<AlgebraSpec> {
        Arc::new(AlgebraSpec::full_matrix(n).unwrap())
    }

    fn diag(spec: &Arc<AlgebraSpec>, d: &[f64]) -> Element {
        Element::from_fn(spec, |_, s| Mat::from_fn(s.size, s.size, |r, k| if r == k { c(d[r]) } else { ZERO }))
    }

    #[test]
    fn exponent_validation() {
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::INFINITY).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert_eq!(p(2.0).conjugate(), 2.0);
        assert!(p(1.0).conjugate().is_infinite());
    }

    #[test]
    fn norm_examples() {
        let s = m(2);
        assert!((lp_norm(&diag(&s, &[3.0, 4.0]), p(2.0)) - 5.0).abs() < 1e-14);
        let s3 = m(3);
        assert!((lp_norm(&Element::identity(&s3), p(1.0)) - 3.0).abs() < 1e-14);
        let e12 = Element::matrix_unit(&s, 0, 0, 1);
        for pv in [1.0, 1.5, 2.0, 3.0, 7.0] {
            assert!((lp_norm(&e12, p(pv)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn weighted_norm() {
        let spec = Arc::new(make_algebra(&[(1, &[2.0, 0.5])]).unwrap());
        let x = Element::identity(&spec);
        assert!((lp_norm(&x, p(1.0)) - 2.5).abs() < 1e-14);
        assert!((lp_norm(&x, p(2.0)) - 2.5f64.sqrt()).abs() < 1e-14);
        assert!((hilbert_schmidt_norm(&x) - 2.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn polar_of_positive_diagonal() {
        let s = m(2);
        let x = diag(&s, &[2.0, 0.0]);
        let Polar { w, b } = polar(&x);
        assert!(w.approx_eq(&Element::matrix_unit(&s, 0, 0, 0), 1e-12));
        assert!(b.approx_eq(&x, 1e-12));
    }

    #[test]
    fn polar_of_unitary() {
        let s = m(2);
        let mut u = Element::zero(&s);
        u.slot_mut(0)[(0, 1)] = ONE;
        u.slot_mut(0)[(1, 0)] = C64::new(0.0, 1.0);
        let Polar { w, b } = polar(&u);
        assert!(w.approx_eq(&u, 1e-12));
        assert!(b.approx_eq(&Element::identity(&s), 1e-12));
    }

    #[test]
    fn spectral_projection_examples() {
        let s = m(2);
        let x = diag(&s, &[1.0, 3.0]);
        let e = spectral_projection(&x, 0.0, 2.0).unwrap();
        assert!(e.approx_eq(&Element::matrix_unit(&s, 0, 0, 0), 1e-12));
        let full = spectral_projection(&x, 0.0, 10.0).unwrap();
        assert!(full.approx_eq(&Element::identity(&s), 1e-12));
        // closed endpoints
        let at = spectral_projection(&x, 3.0, 3.0).unwrap();
        assert!(at.approx_eq(&Element::matrix_unit(&s, 0, 1, 1), 1e-12));
    }

    #[test]
    fn spectral_projection_rejects_non_self_adjoint() {
        let s = m(2);
        let x = Element::matrix_unit(&s, 0, 0, 1);
        assert!(matches!(spectral_projection(&x, 0.0, 1.0), Err(Error::NotSelfAdjoint(_))));
    }

    fn omega(n: usize) -> AmplifiedElement {
        let s = m(n);
        AmplifiedElement::from_fn(&s, n, |i, j| Element::matrix_unit(&s, 0, i, j)).unwrap()
    }

    #[test]
    fn amplified_examples() {
        let w = omega(2);
        assert!((amplified_norm(&w, p(1.0)) - 2.0).abs() < 1e-12);
        let swap = w.transpose_outer();
        assert!((amplified_norm(&swap, p(1.0)) - 4.0).abs() < 1e-12);
        assert_eq!(swap.transpose_outer(), w);
        // m = 1 agrees with the plain norm
        let s = m(2);
        let y = diag(&s, &[1.0, -2.0]);
        let one = AmplifiedElement::new(s.clone(), 1, alloc::vec![y.clone()]).unwrap();
        assert!((amplified_norm(&one, p(3.0)) - lp_norm(&y, p(3.0))).abs() < 1e-13);
    }

    #[test]
    fn assemble_round_trip() {
        let w = omega(3);
        let back = AmplifiedElement::disassemble(w.base(), 3, &w.assemble()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn optr_cb_on_diagonal_family() {
        let s = m(2);
        let x = AmplifiedElement::from_fn(&s, 2, |i, j| if i == j { diag(&s, &[1.0, 2.0 + i as f64]) } else { Element::zero(&s) }).unwrap();
        for pv in [1.0, 2.0, 3.0] {
            assert!(check_optr_cb(&x, p(pv)).holds);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let s = Arc::new(make_algebra(&[(2, &[1.0]), (1, &[0.7])]).unwrap());
        let x = Element::from_fn(&s, |i, sl| {
            Mat::from_fn(sl.size, sl.size, |r, k| C64::new(0.3 + r as f64 - 0.7 * k as f64 + i as f64, 0.2 * (r + k) as f64))
        });
        for pv in [1.5, 2.0, 3.0] {
            let (n0, g) = lp_norm_with_gradient(&x, p(pv));
            let dir = Element::basis(&s)[1].scale(C64::new(0.3, -0.4));
            let h = 1e-6;
            let plus = lp_norm(&(&x + &dir.scale_re(h)), p(pv));
            let minus = lp_norm(&(&x - &dir.scale_re(h)), p(pv));
            let fd = (plus - minus) / (2.0 * h);
            let an: f64 = g.to_coords().iter().zip(dir.to_coords().iter()).map(|(a, b)| (a.conj() * b).re).sum();
            assert!((fd - an).abs() < 1e-6 * (1.0 + n0), "p={pv}: fd {fd} vs {an}");
        }
    }

    #[test]
    fn dual_maximizer_attains_dual_norm() {
        let s = m(3);
        let g = Element::from_fn(&s, |_, sl| Mat::from_fn(sl.size, sl.size, |r, k| C64::new((r * 2 + k) as f64 - 3.0, 0.1)));
        for pv in [1.0, 1.5, 3.0] {
            let z = dual_maximizer(&g, p(pv));
            assert!((lp_norm(&z, p(pv)) - 1.0).abs() < 1e-12);
            let val: f64 = g.to_coords().iter().zip(z.to_coords().iter()).map(|(a, b)| (a.conj() * b).re).sum();
            let sv = linalg::singular_values(g.slot(0));
            let dual = if pv == 1.0 {
                sv.iter().copied().fold(0.0, f64::max)
            } else {
                let q = p(pv).conjugate();
                sv.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
            };
            assert!((val - dual).abs() < 1e-10 * dual, "p={pv}");
        }
    }
}
