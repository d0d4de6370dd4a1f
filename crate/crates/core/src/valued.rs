//! The `S¹_m`-valued norm of a family `[x_ij]`,
//!
//! `‖[x_ij]‖ = inf ‖Σ_{i,k} a_ik a_ik*‖_p^{1/2} ‖Σ_{k,j} b_kj* b_kj‖_p^{1/2}` over
//! factorizations `x_ij = Σ_k a_ik b_kj`, together with amplified maps `T ⊗ id`
//! and estimators of `‖T‖_cb` and `‖T‖_{S¹}`.
//!
//! The norm is bracketed. For positive `W, V` with `‖W‖_{p'} = ‖V‖_{p'} = 1`,
//! `Σ_ω μ(ω) ‖(1⊗W^{1/2}) X (1⊗V^{1/2})‖_1` is a lower bound (Cauchy–Schwarz
//! and Hölder), and the singular value decomposition of the weighted matrix
//! produces a factorization whose objective is an upper bound. Reweighting
//! `W ∝ P^{p-1}`, `V ∝ Q^{p-1}` closes the gap.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use crate::algebra::{AlgebraSpec, Element};
use crate::linalg::{self, c, hermitian_eigen, kron, svd, Mat, Vector};
use crate::lp::{amplified_norm, dual_maximizer, lp_norm, lp_norm_with_gradient, AmplifiedElement, Exponent};
use crate::map::LinearMap;
use crate::random;
use crate::separating;
use crate::{tol, Error, Result};

/// Lower bounds are shrunk by this relative amount to absorb rounding.
pub const LOWER_GUARD: f64 = 1e-12;

/// `x_ij = Σ_k a_ik b_kj` with `a` stored as an `m × k` and `b` as a `k × m`
/// row-major array of elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub m: usize,
    pub k: usize,
    pub a: Vec<Element>,
    pub b: Vec<Element>,
}

impl Factorization {
    pub fn a(&self, i: usize, k: usize) -> &Element {
        &self.a[i * self.k + k]
    }

    pub fn b(&self, k: usize, j: usize) -> &Element {
        &self.b[k * self.m + j]
    }

    pub fn product(&self) -> AmplifiedElement {
        let base = self.a[0].spec().clone();
        AmplifiedElement::from_fn(&base, self.m, |i, j| {
            let mut acc = Element::zero(&base);
            for k in 0..self.k {
                acc = &acc + &(self.a(i, k) * self.b(k, j));
            }
            acc
        })
        .expect("m >= 1")
    }

    /// `(Σ a a*, Σ b* b)`.
    pub fn grams(&self) -> (Element, Element) {
        let base = self.a[0].spec().clone();
        let mut left = Element::zero(&base);
        for a in &self.a {
            left = &left + &(a * &a.adjoint());
        }
        let mut right = Element::zero(&base);
        for b in &self.b {
            right = &right + &(&b.adjoint() * b);
        }
        (left, right)
    }

    pub fn objective(&self, p: Exponent) -> f64 {
        let (l, r) = self.grams();
        (lp_norm(&l, p) * lp_norm(&r, p)).sqrt()
    }

    /// Largest entry of `Σ a b − x` relative to `max(1, max |x|)`.
    pub fn residual(&self, x: &AmplifiedElement) -> f64 {
        let prod = self.product();
        let scale = x.max_abs().max(1.0);
        prod.entries()
            .iter()
            .zip(x.entries())
            .map(|(a, b)| (a - b).max_abs())
            .fold(0.0, f64::max)
            / scale
    }
}

/// The weights `W, V` (one positive matrix per slot) of the dual bound.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub w: Vec<Mat>,
    pub v: Vec<Mat>,
}

#[derive(Debug, Clone)]
pub struct S1Bracket {
    pub lower: f64,
    pub upper: f64,
    pub factorization: Option<Factorization>,
    pub dual: DualCertificate,
    pub iterations: usize,
    pub converged: bool,
}

impl S1Bracket {
    pub fn gap(&self) -> f64 {
        if self.upper == 0.0 {
            0.0
        } else {
            (self.upper - self.lower) / self.upper
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct S1Options {
    pub max_iter: usize,
    /// Stop once `(upper − lower)/upper` falls below this.
    pub gap: f64,
}

impl Default for S1Options {
    fn default() -> Self {
        Self { max_iter: 2000, gap: 1e-12 }
    }
}

struct SlotProblem {
    mu: f64,
    n: usize,
    x: Mat,
}

fn slot_problems(x: &AmplifiedElement) -> Vec<SlotProblem> {
    let big = x.assemble();
    x.base()
        .slots()
        .iter()
        .zip(big.slot_mats())
        .map(|(s, b)| SlotProblem { mu: s.weight, n: s.size, x: b.clone() })
        .collect()
}

/// `(Σ μ Tr h^r)^{1/r}` for positive `h`, using eigenvalues.
fn weighted_schatten(mats: &[Mat], mus: &[f64], r: f64) -> f64 {
    let mut acc = 0.0;
    for (h, &mu) in mats.iter().zip(mus) {
        let (vals, _) = hermitian_eigen(h);
        acc += mu * vals.iter().map(|&l| l.max(0.0).powf(r)).sum::<f64>();
    }
    acc.powf(1.0 / r)
}

/// `Σ_i A_i A_i*` over the `m` row blocks of height `n`.
fn left_partial(a: &Mat, m: usize, n: usize) -> Mat {
    let mut out = Mat::zeros(n, n);
    for i in 0..m {
        let r = a.rows(i * n, n);
        out += &r * r.adjoint();
    }
    out
}

/// `Σ_j B_j* B_j` over the `m` column blocks of width `n`.
fn right_partial(b: &Mat, m: usize, n: usize) -> Mat {
    let mut out = Mat::zeros(n, n);
    for j in 0..m {
        let col = b.columns(j * n, n);
        out += col.adjoint() * &col;
    }
    out
}

fn sqrt_and_inv_sqrt(h: &Mat) -> (Mat, Mat) {
    let (vals, vecs) = hermitian_eigen(h);
    let n = h.nrows();
    let mut s = Mat::zeros(n, n);
    let mut si = Mat::zeros(n, n);
    for (k, &l) in vals.iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        let col = vecs.column(k);
        let proj = &col * col.adjoint();
        s += &proj * c(l.sqrt());
        si += proj * c(1.0 / l.sqrt());
    }
    (s, si)
}

/// Adds `δ·max λ` to the spectrum and rescales to unit `L^q` norm.
fn regularize(mats: &mut [Mat], mus: &[f64], q: f64) {
    let top = mats
        .iter()
        .map(|h| hermitian_eigen(h).0.last().copied().unwrap_or(0.0))
        .fold(0.0, f64::max);
    let floor = if top > 0.0 { 1e-13 * top } else { 1.0 };
    for h in mats.iter_mut() {
        let n = h.nrows();
        *h = (&*h + h.adjoint()) * c(0.5) + Mat::identity(n, n) * c(floor);
    }
    let norm = weighted_schatten(mats, mus, q);
    for h in mats.iter_mut() {
        *h *= c(1.0 / norm);
    }
}

fn unit_weights(problems: &[SlotProblem], q: f64) -> Vec<Mat> {
    let mus: Vec<f64> = problems.iter().map(|s| s.mu).collect();
    let mut mats: Vec<Mat> = problems.iter().map(|s| Mat::identity(s.n, s.n)).collect();
    let norm = if q.is_infinite() { 1.0 } else { weighted_schatten(&mats, &mus, q) };
    for h in mats.iter_mut() {
        *h *= c(1.0 / norm);
    }
    mats
}

struct Step {
    lower: f64,
    upper: f64,
    a: Vec<Mat>,
    b: Vec<Mat>,
    p_mats: Vec<Mat>,
    q_mats: Vec<Mat>,
    norm_p: f64,
    norm_q: f64,
}

fn step(problems: &[SlotProblem], m: usize, w: &[Mat], v: &[Mat], p: f64, q: f64) -> Step {
    let mus: Vec<f64> = problems.iter().map(|s| s.mu).collect();
    let (wn, vn) = if q.is_infinite() {
        (1.0, 1.0)
    } else {
        (weighted_schatten(w, &mus, q), weighted_schatten(v, &mus, q))
    };
    let id_m = Mat::identity(m, m);
    let mut lower = 0.0;
    let mut a_all = Vec::with_capacity(problems.len());
    let mut b_all = Vec::with_capacity(problems.len());
    let mut p_all = Vec::with_capacity(problems.len());
    let mut q_all = Vec::with_capacity(problems.len());
    let mut resid: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (sp, (ws, vs)) in problems.iter().zip(w.iter().zip(v)) {
        let (wh, wih) = sqrt_and_inv_sqrt(ws);
        let (vh, vih) = sqrt_and_inv_sqrt(vs);
        let lw = kron(&id_m, &wh);
        let rv = kron(&id_m, &vh);
        let y = &lw * &sp.x * &rv;
        let d = svd(&y);
        lower += sp.mu * d.s.iter().sum::<f64>();
        let k = d.s.len();
        let root = Mat::from_fn(k, k, |r, col| if r == col { c(d.s[r].sqrt()) } else { c(0.0) });
        let a = kron(&id_m, &wih) * &d.u * &root;
        let b = &root * d.v.adjoint() * kron(&id_m, &vih);
        resid = resid.max((&a * &b - &sp.x).norm());
        scale = scale.max(sp.x.norm());
        p_all.push(left_partial(&a, m, sp.n));
        q_all.push(right_partial(&b, m, sp.n));
        a_all.push(a);
        b_all.push(b);
    }
    let lower = lower / (wn * vn).sqrt();
    let norm_p = weighted_schatten(&p_all, &mus, p);
    let norm_q = weighted_schatten(&q_all, &mus, p);
    let upper = if resid <= tol::FACT * scale.max(f64::MIN_POSITIVE) {
        (norm_p * norm_q).sqrt()
    } else {
        f64::INFINITY
    };
    Step { lower, upper, a: a_all, b: b_all, p_mats: p_all, q_mats: q_all, norm_p, norm_q }
}

fn factorization_from(base: &Arc<AlgebraSpec>, m: usize, a: &[Mat], b: &[Mat], lambda: f64) -> Factorization {
    let slots = base.slots();
    let mut fa = Vec::with_capacity(m * m);
    let mut fb = Vec::with_capacity(m * m);
    for i in 0..m {
        for k in 0..m {
            fa.push(Element::from_fn(base, |s, sl| {
                let n = sl.size;
                pad_view(&a[s], i * n, k * n, n) * c(lambda)
            }));
        }
    }
    for k in 0..m {
        for j in 0..m {
            fb.push(Element::from_fn(base, |s, sl| {
                let n = sl.size;
                pad_view(&b[s], k * n, j * n, n) * c(1.0 / lambda)
            }));
        }
    }
    debug_assert_eq!(slots.len(), a.len());
    Factorization { m, k: m, a: fa, b: fb }
}

fn pad_view(x: &Mat, r0: usize, c0: usize, n: usize) -> Mat {
    Mat::from_fn(n, n, |r, col| {
        let (rr, cc) = (r0 + r, c0 + col);
        if rr < x.nrows() && cc < x.ncols() {
            x[(rr, cc)]
        } else {
            c(0.0)
        }
    })
}

fn max_compression(x: &AmplifiedElement, p: Exponent) -> f64 {
    x.entries().iter().map(|e| lp_norm(e, p)).fold(0.0, f64::max)
}

/// Brackets the `S¹_m`-valued norm. `warm` restarts the reweighting from a
/// previous certificate (slot shapes must match, otherwise it is ignored).
pub fn s1_bracket(x: &AmplifiedElement, p: Exponent, opts: &S1Options, warm: Option<&DualCertificate>) -> S1Bracket {
    let m = x.m();
    let base = x.base().clone();
    let problems = slot_problems(x);
    let mus: Vec<f64> = problems.iter().map(|s| s.mu).collect();
    let pv = p.value();
    let q = p.conjugate();
    let compression = max_compression(x, p);
    if x.max_abs() == 0.0 {
        let w = unit_weights(&problems, q);
        return S1Bracket {
            lower: 0.0,
            upper: 0.0,
            factorization: Some(factorization_from(&base, m, &zero_mats(&problems, m), &zero_mats(&problems, m), 1.0)),
            dual: DualCertificate { w: w.clone(), v: w },
            iterations: 0,
            converged: true,
        };
    }
    let shapes_ok = |d: &DualCertificate| {
        d.w.len() == problems.len()
            && d.v.len() == problems.len()
            && d.w.iter().zip(&problems).all(|(h, s)| h.nrows() == s.n)
            && d.v.iter().zip(&problems).all(|(h, s)| h.nrows() == s.n)
    };
    let (mut w, mut v) = match warm {
        Some(d) if pv > 1.0 && shapes_ok(d) => (d.w.clone(), d.v.clone()),
        _ => {
            let u = unit_weights(&problems, q);
            (u.clone(), u)
        }
    };
    if pv > 1.0 {
        regularize(&mut w, &mus, q);
        regularize(&mut v, &mus, q);
    }

    let mut damp = if pv <= 2.0 { 0.3 } else { (1.0 - 1.0 / (pv - 1.0)).max(0.5) };
    let mut best_lower = compression;
    let mut best_upper = f64::INFINITY;
    let mut best: Option<(Vec<Mat>, Vec<Mat>, f64, f64)> = None;
    let mut best_dual = DualCertificate { w: w.clone(), v: v.clone() };
    let mut best_dual_value = -1.0;
    let mut stall = 0usize;
    let mut iterations = 0;
    let mut converged = false;
    let max_iter = if pv == 1.0 { 1 } else { opts.max_iter.max(1) };

    for _ in 0..max_iter {
        iterations += 1;
        let st = step(&problems, m, &w, &v, pv, q);
        if st.lower > best_dual_value {
            best_dual_value = st.lower;
            best_dual = DualCertificate { w: w.clone(), v: v.clone() };
        }
        best_lower = best_lower.max(st.lower);
        if st.upper < best_upper * (1.0 - 1e-15) {
            best_upper = st.upper;
            best = Some((st.a.clone(), st.b.clone(), st.norm_p, st.norm_q));
            stall = 0;
        } else {
            stall += 1;
            if stall >= 20 {
                damp = (1.0 + damp) / 2.0;
                stall = 0;
            }
        }
        if best_upper.is_finite() && best_upper - best_lower <= opts.gap * best_upper {
            converged = true;
            break;
        }
        if pv == 1.0 {
            converged = true;
            break;
        }
        if st.norm_p == 0.0 || st.norm_q == 0.0 {
            break;
        }
        let target_w: Vec<Mat> = st
            .p_mats
            .iter()
            .map(|h| linalg::hermitian_function(h, 0.0, |l| l.powf(pv - 1.0)) * c(1.0 / st.norm_p.powf(pv - 1.0)))
            .collect();
        let target_v: Vec<Mat> = st
            .q_mats
            .iter()
            .map(|h| linalg::hermitian_function(h, 0.0, |l| l.powf(pv - 1.0)) * c(1.0 / st.norm_q.powf(pv - 1.0)))
            .collect();
        for (wi, ti) in w.iter_mut().zip(&target_w) {
            *wi = &*wi * c(damp) + ti * c(1.0 - damp);
        }
        for (vi, ti) in v.iter_mut().zip(&target_v) {
            *vi = &*vi * c(damp) + ti * c(1.0 - damp);
        }
        regularize(&mut w, &mus, q);
        regularize(&mut v, &mus, q);
    }

    let factorization = best.map(|(a, b, np, nq)| {
        let lambda = if np > 0.0 && nq > 0.0 { (nq / np).powf(0.25) } else { 1.0 };
        factorization_from(&base, m, &a, &b, lambda)
    });
    let lower = (best_lower * (1.0 - LOWER_GUARD)).min(best_upper);
    S1Bracket { lower, upper: best_upper, factorization, dual: best_dual, iterations, converged }
}

fn zero_mats(problems: &[SlotProblem], m: usize) -> Vec<Mat> {
    problems.iter().map(|s| Mat::zeros(m * s.n, m * s.n)).collect()
}

/// Upper bound on the `S¹_m`-valued norm together with a factorization that
/// attains it. Restarts beyond the first begin from random weights.
pub fn s1_norm_upper(x: &AmplifiedElement, p: Exponent, restarts: usize, max_iter: usize) -> (f64, Factorization) {
    let opts = S1Options { max_iter, ..S1Options::default() };
    let mut best = s1_bracket(x, p, &opts, None);
    if p.value() > 1.0 {
        let problems = slot_problems(x);
        let mut rng = random::rng(0x51_5eed);
        for _ in 1..restarts {
            let w: Vec<Mat> = problems.iter().map(|s| random_psd(&mut rng, s.n)).collect();
            let v: Vec<Mat> = problems.iter().map(|s| random_psd(&mut rng, s.n)).collect();
            let b = s1_bracket(x, p, &opts, Some(&DualCertificate { w, v }));
            if b.upper < best.upper {
                best = b;
            }
        }
    }
    let f = best.factorization.expect("a factorization is recorded whenever the upper bound is finite");
    (best.upper, f)
}

fn random_psd(rng: &mut random::SeededRng, n: usize) -> Mat {
    let g = random::gaussian_matrix(rng, n, n);
    &g * g.adjoint()
}

/// Sound lower bound: the largest of `max ‖x_ij‖_p`, the trace norm of the
/// assembled matrix at `p = 1`, and the reweighted dual bound.
pub fn s1_norm_lower(x: &AmplifiedElement, p: Exponent) -> f64 {
    s1_bracket(x, p, &S1Options::default(), None).lower
}

/// Gradient (coordinate inner product, on the assembled matrix) of the dual
/// bound at the certificate `dual`, together with the bound itself.
pub fn s1_dual_gradient(x: &AmplifiedElement, p: Exponent, dual: &DualCertificate) -> (f64, Element) {
    let m = x.m();
    let problems = slot_problems(x);
    let mus: Vec<f64> = problems.iter().map(|s| s.mu).collect();
    let q = p.conjugate();
    let (wn, vn) = if q.is_infinite() {
        (1.0, 1.0)
    } else {
        (weighted_schatten(&dual.w, &mus, q), weighted_schatten(&dual.v, &mus, q))
    };
    let norm = (wn * vn).sqrt();
    let id_m = Mat::identity(m, m);
    let spec = Arc::new(x.base().tensor_matrix(m).expect("m >= 1"));
    let mut value = 0.0;
    let mut grads = Vec::with_capacity(problems.len());
    for (sp, (ws, vs)) in problems.iter().zip(dual.w.iter().zip(&dual.v)) {
        let lw = kron(&id_m, &sqrt_and_inv_sqrt(ws).0);
        let rv = kron(&id_m, &sqrt_and_inv_sqrt(vs).0);
        let y = &lw * &sp.x * &rv;
        let d = svd(&y);
        value += sp.mu * d.s.iter().sum::<f64>();
        let top = d.s.first().copied().unwrap_or(0.0);
        let mut uv = Mat::zeros(y.nrows(), y.ncols());
        for (k, &sk) in d.s.iter().enumerate() {
            if sk > tol::SUPPORT_CUT * top {
                uv += d.u.column(k) * d.v.column(k).adjoint();
            }
        }
        grads.push(lw * uv * rv * c(sp.mu / norm));
    }
    (value / norm, Element::from_slots(spec, grads).expect("tensor shapes"))
}

/// Which amplified norm an [`AmplifiedMap`] is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplificationKind {
    /// `L^p(M ⊗ M_m) → L^p(N ⊗ M_m)`.
    Sp,
    /// `L^p(M; S¹_m) → L^p(N; S¹_m)`.
    S1,
}

/// `T ⊗ id_{M_m}`, acting entrywise on `[x_ij]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifiedMap {
    pub map: LinearMap,
    pub m: usize,
    pub kind: AmplificationKind,
}

pub fn amplify_map(t: &LinearMap, m: usize, kind: AmplificationKind) -> Result<AmplifiedMap> {
    if m == 0 {
        return Err(Error::BadAmplification);
    }
    Ok(AmplifiedMap { map: t.clone(), m, kind })
}

impl AmplifiedMap {
    pub fn apply(&self, x: &AmplifiedElement) -> Result<AmplifiedElement> {
        if x.m() != self.m {
            return Err(Error::Shape(alloc::format!("amplification {} vs {}", x.m(), self.m)));
        }
        let entries = x.entries().iter().map(|e| self.map.try_apply(e)).collect::<Result<Vec<_>>>()?;
        AmplifiedElement::new(self.map.target().clone(), self.m, entries)
    }

    /// `(T ⊗ id)^*` for the coordinate inner product.
    pub fn apply_adjoint(&self, y: &AmplifiedElement) -> Result<AmplifiedElement> {
        let adj = self.map.matrix().adjoint();
        let entries = y
            .entries()
            .iter()
            .map(|e| {
                if **e.spec() != **self.map.target() {
                    return Err(Error::SpecMismatch);
                }
                Element::from_coords(self.map.source(), &(&adj * e.to_coords()))
            })
            .collect::<Result<Vec<_>>>()?;
        AmplifiedElement::new(self.map.source().clone(), self.m, entries)
    }

    /// `‖(T⊗id)X‖ / ‖X‖` in the norm selected by `kind`. For `S1` this is the
    /// sound ratio lower(numerator)/upper(denominator).
    pub fn ratio(&self, x: &AmplifiedElement, p: Exponent) -> Result<f64> {
        let y = self.apply(x)?;
        Ok(match self.kind {
            AmplificationKind::Sp => {
                let d = amplified_norm(x, p);
                if d == 0.0 {
                    0.0
                } else {
                    amplified_norm(&y, p) / d
                }
            }
            AmplificationKind::S1 => {
                let opts = S1Options::default();
                let d = s1_bracket(x, p, &opts, None).upper;
                if d == 0.0 {
                    0.0
                } else {
                    s1_bracket(&y, p, &opts, None).lower / d
                }
            }
        })
    }
}

/// Result of a norm estimator. `upper` is `None` when no certified bound is known.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: Option<f64>,
    pub witness: Option<AmplifiedElement>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    pub m_max: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Iteration cap of a single ascent run.
    pub max_iter: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { m_max: 2, restarts: 8, seed: 0, max_iter: 200 }
    }
}

impl EstimateOptions {
    /// Defaults with `m_max = 2·(largest block size)` of `spec`.
    pub fn for_source(spec: &AlgebraSpec) -> Self {
        Self { m_max: 2 * spec.subhomogeneous_degree(), ..Self::default() }
    }
}

/// Structured starting points: `1 ⊗ 1`, and per slot the matrix-unit families
/// `x_ij = e_ij` and `x_ij = e_ji` (truncated to `min(m, n)`).
pub fn structured_seeds(base: &Arc<AlgebraSpec>, m: usize) -> Vec<AmplifiedElement> {
    let mut out = Vec::new();
    let id = Element::identity(base);
    out.push(
        AmplifiedElement::from_fn(base, m, |i, j| if i == j { id.clone() } else { Element::zero(base) })
            .expect("m >= 1"),
    );
    for (s, slot) in base.slots().iter().enumerate() {
        let r = m.min(slot.size);
        if r < 2 {
            continue;
        }
        let unit = |i: usize, j: usize| {
            if i < r && j < r {
                Element::matrix_unit(base, s, i, j)
            } else {
                Element::zero(base)
            }
        };
        out.push(AmplifiedElement::from_fn(base, m, unit).expect("m >= 1"));
        out.push(AmplifiedElement::from_fn(base, m, |i, j| unit(j, i)).expect("m >= 1"));
    }
    out
}

fn to_amplified(base: &Arc<AlgebraSpec>, m: usize, big: &Element) -> AmplifiedElement {
    AmplifiedElement::disassemble(base, m, big).expect("tensor spec")
}

fn coord_inner(a: &AmplifiedElement, b: &AmplifiedElement) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x.to_coords().dotc(&y.to_coords()).re)
        .sum()
}

fn coord_norm(a: &AmplifiedElement) -> f64 {
    a.entries().iter().map(|e| e.to_coords().norm_squared()).sum::<f64>().sqrt()
}

struct Ascent {
    ratio: f64,
    x: AmplifiedElement,
    iterations: usize,
    converged: bool,
}

/// Nonlinear power method for `max ‖(T⊗id)X‖_p` on the unit sphere of
/// `L^p(M ⊗ M_m)`. Each step maximizes the linearization over the unit ball,
/// so the objective never decreases.
fn sp_ascent(tm: &AmplifiedMap, x0: &AmplifiedElement, p: Exponent, max_iter: usize) -> Option<Ascent> {
    let base = tm.map.source().clone();
    let n0 = amplified_norm(x0, p);
    if n0 == 0.0 {
        return None;
    }
    let mut x = x0.scale_re(1.0 / n0);
    let mut val = amplified_norm(&tm.apply(&x).ok()?, p);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let y = tm.apply(&x).ok()?;
        let (_, g) = lp_norm_with_gradient(&y.assemble(), p);
        let h = tm.apply_adjoint(&to_amplified(tm.map.target(), tm.m, &g)).ok()?;
        let xn_big = dual_maximizer(&h.assemble(), p);
        let xn = to_amplified(&base, tm.m, &xn_big);
        let nn = amplified_norm(&xn, p);
        if nn == 0.0 {
            converged = true;
            break;
        }
        let xn = xn.scale_re(1.0 / nn);
        let new = amplified_norm(&tm.apply(&xn).ok()?, p);
        if new <= val * (1.0 + 1e-13) {
            if new > val {
                val = new;
                x = xn;
            }
            converged = true;
            break;
        }
        val = new;
        x = xn;
    }
    Some(Ascent { ratio: val, x, iterations, converged })
}

struct S1Eval {
    ratio: f64,
    num: S1Bracket,
    den: S1Bracket,
}

fn s1_eval(
    tm: &AmplifiedMap,
    x: &AmplifiedElement,
    p: Exponent,
    warm: Option<(&DualCertificate, &DualCertificate)>,
) -> Option<S1Eval> {
    let opts = S1Options { max_iter: 400, gap: 1e-11 };
    let y = tm.apply(x).ok()?;
    let den = s1_bracket(x, p, &opts, warm.map(|w| w.1));
    if !(den.upper.is_finite() && den.upper > 0.0) {
        return None;
    }
    let num = s1_bracket(&y, p, &opts, warm.map(|w| w.0));
    Some(S1Eval { ratio: num.lower / den.upper, num, den })
}

/// Gradient ascent with step halving on `lower(TX)/upper(X)`, using the dual
/// certificates of both brackets as gradients.
fn s1_ascent(tm: &AmplifiedMap, x0: &AmplifiedElement, p: Exponent, max_iter: usize) -> Option<Ascent> {
    let n0 = coord_norm(x0);
    if n0 == 0.0 {
        return None;
    }
    let mut x = x0.scale_re(1.0 / n0);
    let mut cur = s1_eval(tm, &x, p, None)?;
    let mut iterations = 0;
    let mut converged = false;
    let mut t = 0.25;
    while iterations < max_iter {
        iterations += 1;
        let y = tm.apply(&x).ok()?;
        let (vn, gn) = s1_dual_gradient(&y, p, &cur.num.dual);
        let (vd, gd) = s1_dual_gradient(&x, p, &cur.den.dual);
        if vn <= 0.0 || vd <= 0.0 {
            converged = true;
            break;
        }
        let gn = tm.apply_adjoint(&to_amplified(tm.map.target(), tm.m, &gn)).ok()?;
        let gd = to_amplified(tm.map.source(), tm.m, &gd);
        let g = gn.scale_re(1.0 / vn).add(&gd.scale_re(-1.0 / vd)).ok()?;
        // tangent part: the ratio is scale invariant
        let radial = coord_inner(&g, &x);
        let g = g.add(&x.scale_re(-radial)).ok()?;
        let gnorm = coord_norm(&g);
        if gnorm <= 1e-12 {
            converged = true;
            break;
        }
        let g = g.scale_re(1.0 / gnorm);
        let mut accepted = false;
        while t > 1e-9 {
            let trial = x.add(&g.scale_re(t)).ok()?;
            let tn = coord_norm(&trial);
            let trial = trial.scale_re(1.0 / tn);
            if let Some(ev) = s1_eval(tm, &trial, p, Some((&cur.num.dual, &cur.den.dual))) {
                if ev.ratio > cur.ratio * (1.0 + 1e-12) {
                    let gain = ev.ratio / cur.ratio - 1.0;
                    x = trial;
                    cur = ev;
                    accepted = true;
                    t = (t * 1.5).min(1.0);
                    if gain < 1e-10 {
                        converged = true;
                    }
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    Some(Ascent { ratio: cur.ratio, x, iterations, converged })
}

fn estimate(
    t: &LinearMap,
    p: Exponent,
    opts: &EstimateOptions,
    kind: AmplificationKind,
    upper: Option<f64>,
) -> NormEstimate {
    let t = t.with_p(p);
    let base = t.source().clone();
    let mut rng = random::rng(opts.seed);
    let mut best: Option<(f64, AmplifiedElement)> = None;
    let mut iterations = 0;
    let mut converged = true;
    for m in 1..=opts.m_max.max(1) {
        let tm = amplify_map(&t, m, kind).expect("m >= 1");
        let mut seeds = structured_seeds(&base, m);
        if let Some((_, w)) = &best {
            seeds.insert(0, w.pad(m).expect("growing m"));
        }
        for _ in 0..opts.restarts {
            seeds.push(random::amplified(&mut rng, &base, m));
        }
        for s in &seeds {
            let run = match kind {
                AmplificationKind::Sp => sp_ascent(&tm, s, p, opts.max_iter),
                AmplificationKind::S1 => s1_ascent(&tm, s, p, opts.max_iter.min(60)),
            };
            if let Some(r) = run {
                iterations += r.iterations;
                converged &= r.converged;
                if best.as_ref().map_or(true, |(v, _)| r.ratio > *v) {
                    best = Some((r.ratio, r.x));
                }
            }
        }
    }
    let (lower, witness) = match best {
        Some((v, w)) => (v * (1.0 - LOWER_GUARD), Some(w)),
        None => (0.0, None),
    };
    let upper = upper.map(|u| u.max(lower));
    NormEstimate { lower, upper, witness, iterations, converged }
}

/// Estimates `‖T‖_cb = sup_m ‖T ⊗ id : L^p(M ⊗ M_m) → L^p(N ⊗ M_m)‖` from below
/// by ascent over `m ≤ m_max`; `upper` comes from [`recognized_cb_upper`].
pub fn cb_norm_estimate(t: &LinearMap, p: Exponent, opts: &EstimateOptions) -> NormEstimate {
    let t = t.with_p(p);
    estimate(&t, p, opts, AmplificationKind::Sp, recognized_cb_upper(&t))
}

/// Plain operator norm `‖T : L^p(M) → L^p(N)‖`, estimated from below.
pub fn operator_norm_estimate(t: &LinearMap, p: Exponent, opts: &EstimateOptions) -> NormEstimate {
    let t = t.with_p(p);
    let o = EstimateOptions { m_max: 1, ..*opts };
    estimate(&t, p, &o, AmplificationKind::Sp, recognized_plain_upper(&t))
}

/// Estimates `‖T‖_{S¹} = sup_m ‖T ⊗ id_{S¹_m}‖` from below through the sound
/// ratio `lower(TX)/upper(X)`; `upper` comes from [`recognized_s1_upper`].
pub fn s1_bounded_norm_estimate(t: &LinearMap, p: Exponent, opts: &EstimateOptions) -> NormEstimate {
    let t = t.with_p(p);
    estimate(&t, p, opts, AmplificationKind::S1, recognized_s1_upper(&t))
}

/// `Some(λ)` when `T = λ·t_n` on a single full matrix algebra `M_n` (`n ≥ 2`).
fn scaled_transposition(t: &LinearMap) -> Option<f64> {
    let s = t.source();
    if **s != **t.target() || s.blocks().len() != 1 || s.blocks()[0].weights.len() != 1 || s.blocks()[0].size < 2 {
        return None;
    }
    let tr = LinearMap::transposition(s, t.p());
    let lambda = t.matrix()[(1, s.blocks()[0].size)];
    let scaled = tr.scale(lambda);
    if lambda.norm() > 0.0 && t.approx_eq(&scaled, tol::ALG) {
        Some(lambda.norm())
    } else {
        None
    }
}

/// `‖T‖` for maps whose Yeadon factorization is known exactly.
fn recognized_plain_upper(t: &LinearMap) -> Option<f64> {
    if t.max_abs() == 0.0 {
        return Some(0.0);
    }
    separating::extract_yeadon(t).ok().map(|y| separating::yeadon_norm(&y, t.p()))
}

/// Exact `‖T‖_cb` for recognized maps: zero, `λ·t_n` (`|λ| n^{2|1/p−1/2|}`),
/// and direct Yeadon maps (`‖T‖`, through the density of `x ↦ τ(B^p J(x))`).
pub fn recognized_cb_upper(t: &LinearMap) -> Option<f64> {
    recognized_upper(t, |n, p| n.powf(p.transposition_exponent()))
}

/// Exact `‖T‖_{S¹}` for recognized maps: zero, `λ·t_n` (`|λ| n`), and direct
/// Yeadon maps (`‖T‖`).
pub fn recognized_s1_upper(t: &LinearMap) -> Option<f64> {
    recognized_upper(t, |n, _| n)
}

fn recognized_upper(t: &LinearMap, transposition: impl Fn(f64, Exponent) -> f64) -> Option<f64> {
    if t.max_abs() == 0.0 {
        return Some(0.0);
    }
    if let Some(l) = scaled_transposition(t) {
        return Some(l * transposition(t.source().blocks()[0].size as f64, t.p()));
    }
    let y = separating::extract_yeadon(t).ok()?;
    let split = separating::jordan_split(&y.j).ok()?;
    if split.f.max_abs() > tol::ALG {
        return None;
    }
    Some(separating::yeadon_norm(&y, t.p()))
}

/// Pass/fail summary of the transposition identities on random samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub samples: usize,
    /// Largest relative gap between `‖[t_n(x_ij)]‖_p` and `‖[x_ji]‖_p`.
    pub sp_deviation: f64,
    /// Largest relative gap between the `S¹`-valued norms of the same pair.
    pub s1_deviation: f64,
    pub sp_pass: bool,
    pub s1_pass: bool,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.sp_pass && self.s1_pass
    }
}

/// Checks on random `[x_ij]` over `M_n` that inner transposition and outer
/// transposition give the same norm, both in `L^p(M_n ⊗ M_m)` (to `tol::NORM`)
/// and in `L^p(M_n; S¹_m)` (brackets agree to `1e-3`).
pub fn check_special_identities(n: usize, m: usize, p: Exponent, samples: usize, seed: u64) -> Result<IdentityReport> {
    let base = Arc::new(AlgebraSpec::full_matrix(n)?);
    if m == 0 {
        return Err(Error::BadAmplification);
    }
    let mut rng = random::rng(seed);
    let opts = S1Options::default();
    let mut sp_dev: f64 = 0.0;
    let mut s1_dev: f64 = 0.0;
    let mut s1_pass = true;
    for _ in 0..samples {
        let x = random::amplified(&mut rng, &base, m);
        let inner = x.transpose_inner();
        let outer = x.transpose_outer();
        let (a, b) = (amplified_norm(&inner, p), amplified_norm(&outer, p));
        sp_dev = sp_dev.max((a - b).abs() / a.max(b));
        let bi = s1_bracket(&inner, p, &opts, None);
        let bo = s1_bracket(&outer, p, &opts, None);
        let scale = bi.upper.max(bo.upper);
        s1_dev = s1_dev.max((bi.upper - bo.upper).abs() / scale);
        // brackets of the two sides must overlap up to the slack
        if bi.lower > bo.upper * (1.0 + 1e-3) || bo.lower > bi.upper * (1.0 + 1e-3) {
            s1_pass = false;
        }
    }
    Ok(IdentityReport {
        samples,
        sp_deviation: sp_dev,
        s1_deviation: s1_dev,
        sp_pass: sp_dev <= tol::NORM,
        s1_pass: s1_pass && s1_dev <= 1e-3,
    })
}

/// Coordinates of an amplified element, entries in row-major order.
pub fn amplified_coords(x: &AmplifiedElement) -> Vector {
    let parts: Vec<Vector> = x.entries().iter().map(Element::to_coords).collect();
    let len = parts.iter().map(|v| v.len()).sum();
    let mut out = Vector::zeros(len);
    let mut off = 0;
    for v in parts {
        out.rows_mut(off, v.len()).copy_from(&v);
        off += v.len();
    }
    out
}
