//! Separating maps and their Yeadon factorization `T(x) = w B J(x)`.
//!
//! `J` is recovered as `B^+ w* T(x)` from the polar decomposition of `T(1)`,
//! then split into a multiplicative part `x ↦ J(x)e` and an anti-multiplicative
//! part `x ↦ J(x)f` through the center of the algebra generated by `J(M)`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use crate::algebra::{AlgebraSpec, Block, Element};
use crate::linalg::{self, c, Mat, SpanBasis, Vector, C64};
use crate::lp::{polar, spectral_decomposition, Exponent};
use crate::map::LinearMap;
use crate::random::{self, SeededRng};
use crate::{tol, Error, Result};

/// `(w, B, J)` with `w*w = J(1) = s(B)`, `B` commuting with `J(M)` and `T = wBJ`.
#[derive(Debug, Clone, PartialEq)]
pub struct YeadonTriple {
    pub w: Element,
    pub b: Element,
    pub j: LinearMap,
}

/// Size of every violated condition, relative to the natural scale of the input.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TripleDefects {
    /// `‖w*w − J(1)‖`.
    pub isometry: f64,
    /// `‖J(1) − s(B)‖`.
    pub support: f64,
    /// Largest `‖[E, J(x)]‖` over spectral projections `E` of `B` and basis elements `x`.
    pub commutation: f64,
    /// Largest `‖T(x) − wBJ(x)‖` over basis elements, when `T` is given.
    pub factorization: f64,
    /// Largest `‖J(xy+yx) − J(x)J(y) − J(y)J(x)‖` over matrix-unit pairs.
    pub jordan: f64,
    /// Largest `‖J(x*) − J(x)*‖` over matrix units.
    pub star: f64,
}

impl TripleDefects {
    pub fn worst(&self) -> f64 {
        [self.isometry, self.support, self.commutation, self.factorization, self.jordan, self.star]
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// The first violated condition at tolerance `tol`, if any.
    pub fn violation(&self, tol: f64) -> Option<String> {
        let named = [
            ("(a) w*w = J(1)", self.isometry),
            ("(a) J(1) = s(B)", self.support),
            ("(b) spectral projections of B commute with J(M)", self.commutation),
            ("(c) T = wBJ", self.factorization),
            ("J is not a Jordan map", self.jordan),
            ("J is not *-preserving", self.star),
        ];
        named
            .iter()
            .find(|(_, v)| !(*v <= tol))
            .map(|(name, v)| format!("{name} violated by {v:e}"))
    }
}

fn jordan_scale(j: &LinearMap) -> f64 {
    let s = 1.0 + j.max_abs();
    s * s
}

/// Jordan and *-defects of `j` on all pairs of matrix units of its source.
pub fn jordan_defects(j: &LinearMap) -> (f64, f64) {
    let basis = Element::basis(j.source());
    let imgs: Vec<Element> = basis.iter().map(|x| j.apply(x)).collect();
    let index = basis_index(j.source());
    let mut jordan: f64 = 0.0;
    let mut star: f64 = 0.0;
    for (k, x) in basis.iter().enumerate() {
        let adj = index.adjoint_of(k);
        star = star.max((&imgs[adj] - &imgs[k].adjoint()).max_abs());
        for l in k..basis.len() {
            let y = &basis[l];
            let sym = &(x * y) + &(y * x);
            let lhs = j.apply(&sym);
            let rhs = &(&imgs[k] * &imgs[l]) + &(&imgs[l] * &imgs[k]);
            jordan = jordan.max((&lhs - &rhs).max_abs());
        }
    }
    let s = jordan_scale(j);
    (jordan / s, star / (1.0 + j.max_abs()))
}

struct BasisIndex {
    /// (slot, a, b) for every basis element.
    units: Vec<(usize, usize, usize)>,
    offsets: Vec<usize>,
    sizes: Vec<usize>,
}

impl BasisIndex {
    fn adjoint_of(&self, k: usize) -> usize {
        let (s, a, b) = self.units[k];
        self.offsets[s] + b * self.sizes[s] + a
    }
}

fn basis_index(spec: &AlgebraSpec) -> BasisIndex {
    let mut units = Vec::new();
    let slots = spec.slots();
    for (s, sl) in slots.iter().enumerate() {
        for a in 0..sl.size {
            for b in 0..sl.size {
                units.push((s, a, b));
            }
        }
    }
    BasisIndex { units, offsets: spec.slot_offsets(), sizes: slots.iter().map(|s| s.size).collect() }
}

/// Measures every condition of a Yeadon triple; `t` adds the factorization check.
pub fn triple_defects(y: &YeadonTriple, t: Option<&LinearMap>) -> TripleDefects {
    let j1 = y.j.image_of_identity();
    let wsw = &y.w.adjoint() * &y.w;
    let top = y.b.operator_norm();
    let sb = crate::lp::support(&y.b);
    let isometry = (&wsw - &j1).max_abs();
    let support = (&j1 - &sb).max_abs();
    let basis = Element::basis(y.j.source());
    let mut commutation: f64 = 0.0;
    if top > 0.0 {
        if let Ok(parts) = spectral_decomposition(&y.b) {
            let jscale = 1.0 + y.j.max_abs();
            for x in &basis {
                let jx = y.j.apply(x);
                for (_, e) in &parts {
                    commutation = commutation.max(e.commutator(&jx).max_abs() / jscale);
                }
            }
        } else {
            commutation = f64::INFINITY;
        }
    }
    let mut factorization: f64 = 0.0;
    if let Some(t) = t {
        let wb = &y.w * &y.b;
        let scale = 1.0 + t.max_abs();
        for x in &basis {
            let d = &t.apply(x) - &(&wb * &y.j.apply(x));
            factorization = factorization.max(d.max_abs() / scale);
        }
    }
    let (jordan, star) = jordan_defects(&y.j);
    TripleDefects { isometry, support, commutation, factorization, jordan, star }
}

/// `h = T(1) = wB` by polar decomposition and `J(x) = B^+ w* T(x)`, then every
/// condition is validated at `tol::ALG`. A violation means `T` is not separating.
pub fn extract_yeadon(t: &LinearMap) -> Result<YeadonTriple> {
    let y = extract_unchecked(t);
    let d = triple_defects(&y, Some(t));
    match d.violation(tol::ALG) {
        None => Ok(y),
        Some(msg) => Err(Error::NotSeparating(msg)),
    }
}

fn extract_unchecked(t: &LinearMap) -> YeadonTriple {
    let h = t.image_of_identity();
    let pd = polar(&h);
    let top = pd.b.operator_norm();
    let binv = pd.b.map_slots(|m| {
        if top == 0.0 {
            Mat::zeros(m.nrows(), m.ncols())
        } else {
            linalg::hermitian_function(m, tol::SUPPORT_CUT * top, |l| 1.0 / l)
        }
    });
    let left = &binv * &pd.w.adjoint();
    let j = t.left_multiply(&left).expect("target element");
    YeadonTriple { w: pd.w, b: pd.b, j }
}

/// `x ↦ wBJ(x)` after validating the triple.
pub fn build_yeadon_map(w: &Element, b: &Element, j: &LinearMap, p: Exponent) -> Result<LinearMap> {
    if **w.spec() != **j.target() || **b.spec() != **j.target() {
        return Err(Error::SpecMismatch);
    }
    let y = YeadonTriple { w: w.clone(), b: b.clone(), j: j.clone() };
    if let Some(msg) = triple_defects(&y, None).violation(tol::ALG) {
        return Err(Error::InvalidTriple(msg));
    }
    let wb = w * b;
    Ok(j.left_multiply(&wb)?.with_p(p))
}

/// Density `D ≥ 0` of the functional `x ↦ τ_N(B^p J(x))` on the source, so that
/// `‖T(x)‖_p^p = τ_M(D |x|^p)`.
pub fn yeadon_density(y: &YeadonTriple, p: Exponent) -> Element {
    let bp = y.b.map_slots(|m| linalg::hermitian_function(m, 0.0, |l| l.powf(p.value())));
    let source = y.j.source().clone();
    Element::from_fn(&source, |s, sl| {
        let mut d = Mat::zeros(sl.size, sl.size);
        for a in 0..sl.size {
            for b in 0..sl.size {
                let e = Element::matrix_unit(&source, s, a, b);
                let phi = (&bp * &y.j.apply(&e)).trace();
                d[(b, a)] = phi / c(sl.weight);
            }
        }
        d
    })
}

/// `‖wBJ‖_{p→p} = ‖D‖_∞^{1/p}` with `D` from [`yeadon_density`].
pub fn yeadon_norm(y: &YeadonTriple, p: Exponent) -> f64 {
    yeadon_density(y, p).operator_norm().powf(1.0 / p.value())
}

/// Outcome of [`is_separating`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatingVerdict {
    pub separating: bool,
    /// A disjoint pair `(x, y)` whose images are not disjoint.
    pub counterexample: Option<(Element, Element)>,
    pub reason: Option<String>,
    pub triple: Option<YeadonTriple>,
}

fn disjointness_defect(t: &LinearMap, x: &Element, y: &Element) -> (f64, f64) {
    let tx = t.apply(x);
    let ty = t.apply(y);
    let a = (&tx.adjoint() * &ty).max_abs();
    let b = (&tx * &ty.adjoint()).max_abs();
    let nt = t.coordinate_norm();
    let scale = tol::SEP * nt * nt * x.coord_norm() * y.coord_norm();
    (a.max(b), scale)
}

/// Tests `x*y = xy* = 0 ⇒ T(x)*T(y) = T(x)T(y)* = 0` on all disjoint pairs of
/// matrix units, then on `trials` random pairs `x = p a r`, `y = q b s` with
/// `p ⊥ q`, `r ⊥ s`, and finally validates the extracted Yeadon triple.
pub fn is_separating(t: &LinearMap, trials: usize, seed: u64) -> SeparatingVerdict {
    let fail = |x: Element, y: Element, reason: String| SeparatingVerdict {
        separating: false,
        counterexample: Some((x, y)),
        reason: Some(reason),
        triple: None,
    };
    let src = t.source().clone();
    let basis = Element::basis(&src);
    let index = basis_index(&src);
    for k in 0..basis.len() {
        let (s1, a1, b1) = index.units[k];
        for l in (k + 1)..basis.len() {
            let (s2, a2, b2) = index.units[l];
            let disjoint = s1 != s2 || (a1 != a2 && b1 != b2);
            if !disjoint {
                continue;
            }
            let (d, scale) = disjointness_defect(t, &basis[k], &basis[l]);
            if d > scale {
                return fail(basis[k].clone(), basis[l].clone(), format!("matrix units: image overlap {d:e}"));
            }
        }
    }
    let mut rng = random::rng(seed);
    for _ in 0..trials {
        let (p, q) = random::orthogonal_pair(&mut rng, &src);
        let (r, s) = random::orthogonal_pair(&mut rng, &src);
        let x = &(&p * &random::element(&mut rng, &src)) * &r;
        let y = &(&q * &random::element(&mut rng, &src)) * &s;
        let (d, scale) = disjointness_defect(t, &x, &y);
        if d > scale {
            return fail(x, y, format!("random disjoint pair: image overlap {d:e}"));
        }
    }
    let y = extract_unchecked(t);
    let defects = triple_defects(&y, Some(t));
    match defects.violation(tol::ALG) {
        None => SeparatingVerdict { separating: true, counterexample: None, reason: None, triple: Some(y) },
        Some(msg) => SeparatingVerdict { separating: false, counterexample: None, reason: Some(msg), triple: None },
    }
}

/// `J = π + σ` with `π(x) = J(x)e` multiplicative and `σ(x) = J(x)f`
/// anti-multiplicative; `e + f = J(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanSplit {
    pub e: Element,
    pub f: Element,
    pub pi: LinearMap,
    pub sigma: LinearMap,
}

/// Orthonormal basis (coordinates) of the algebra generated by `J(M)`.
pub fn generated_algebra(j: &LinearMap) -> Vec<Element> {
    let target = j.target().clone();
    let gens: Vec<Element> = Element::basis(j.source())
        .iter()
        .map(|x| j.apply(x))
        .filter(|g| g.max_abs() > 0.0)
        .collect();
    let mut span = SpanBasis::new(target.dim(), 1e-9);
    let mut queue: Vec<Element> = Vec::new();
    for g in &gens {
        if span.insert(&g.to_coords()) {
            queue.push(g.clone());
        }
    }
    let mut head = 0;
    while head < queue.len() && !span.is_full() {
        let d = queue[head].clone();
        head += 1;
        for g in &gens {
            let prod = &d * g;
            if prod.max_abs() <= tol::ALG * (1.0 + d.max_abs() * g.max_abs()) {
                continue;
            }
            if span.insert(&prod.to_coords()) {
                queue.push(prod);
            }
        }
    }
    span.vectors()
        .iter()
        .map(|v| Element::from_coords(&target, v).expect("target dimension"))
        .collect()
}

/// Self-adjoint basis of the center of the algebra spanned by `basis`.
fn center_of(basis: &[Element]) -> Vec<Element> {
    let k = basis.len();
    if k == 0 {
        return Vec::new();
    }
    let dim = basis[0].spec().dim();
    let mut rows = Mat::zeros(dim * k, k);
    for (col, a) in basis.iter().enumerate() {
        for (l, b) in basis.iter().enumerate() {
            let v = a.commutator(b).to_coords();
            rows.view_mut((l * dim, col), (dim, 1)).copy_from(&v);
        }
    }
    // the basis is orthonormal, so commutators are of unit scale and may all be noise
    let null = linalg::null_space_absolute(&rows, 1e-8);
    let spec = basis[0].spec().clone();
    let mut out = Vec::new();
    let mut span = SpanBasis::new(dim, 1e-8);
    for coef in null {
        let mut z = Element::zero(&spec);
        for (ck, b) in coef.iter().zip(basis) {
            z = &z + &b.scale(*ck);
        }
        let re = (&z + &z.adjoint()).scale_re(0.5);
        let im = (&z - &z.adjoint()).scale(C64::new(0.0, -0.5));
        let zs = z.max_abs();
        for h in [re, im] {
            if h.max_abs() > 1e-8 * zs && span.insert(&h.to_coords()) {
                out.push(h);
            }
        }
    }
    out
}

fn multiplicative_defect(j: &LinearMap, z: &Element, anti: bool) -> f64 {
    let basis = Element::basis(j.source());
    let imgs: Vec<Element> = basis.iter().map(|x| &j.apply(x) * z).collect();
    let mut worst: f64 = 0.0;
    for (k, x) in basis.iter().enumerate() {
        for (l, y) in basis.iter().enumerate() {
            let lhs = &j.apply(&(x * y)) * z;
            let rhs = if anti { &imgs[l] * &imgs[k] } else { &imgs[k] * &imgs[l] };
            worst = worst.max((&lhs - &rhs).max_abs());
        }
    }
    worst / jordan_scale(j)
}

/// Splits a Jordan map through the minimal central projections `z_k` of the
/// algebra generated by its image. A corner on which `J` is both
/// multiplicative and anti-multiplicative goes to `e`.
pub fn jordan_split(j: &LinearMap) -> Result<JordanSplit> {
    let target = j.target().clone();
    let j1 = j.image_of_identity();
    let zero = Element::zero(&target);
    if j1.max_abs() <= tol::ALG {
        let z = LinearMap::zero(j.source(), &target, j.p());
        return Ok(JordanSplit { e: zero.clone(), f: zero, pi: z.clone(), sigma: z });
    }
    let d = generated_algebra(j);
    let center = center_of(&d);
    let mut rng = random::rng(0x6a_0d);
    let mut projections: Option<Vec<Element>> = None;
    for _ in 0..20 {
        let mut h = Element::zero(&target);
        for z in &center {
            h = &h + &z.scale_re(random::normal(&mut rng));
        }
        let parts = spectral_decomposition(&h)?;
        let mut found = Vec::new();
        for (_, pr) in parts {
            let q = &pr * &j1;
            if q.max_abs() > 1e-6 {
                found.push(q);
            }
        }
        if found.len() == center.len() {
            projections = Some(found);
            break;
        }
    }
    let projections = projections.ok_or_else(|| {
        Error::NotJordan(format!("could not resolve {} minimal central projections", center.len()))
    })?;
    let mut e = zero.clone();
    let mut f = zero;
    for z in &projections {
        let mult = multiplicative_defect(j, z, false);
        if mult <= tol::ALG {
            e = &e + z;
            continue;
        }
        let anti = multiplicative_defect(j, z, true);
        if anti <= tol::ALG {
            f = &f + z;
        } else {
            return Err(Error::NotJordan(format!(
                "central corner is neither multiplicative ({mult:e}) nor anti-multiplicative ({anti:e})"
            )));
        }
    }
    let pi = j.right_multiply(&e)?;
    let sigma = j.right_multiply(&f)?;
    Ok(JordanSplit { e, f, pi, sigma })
}

/// Decomposition `M = M_1 ⊕ M_2`, `T = T_1 ⊕ T_2` of a bijective separating map
/// with `T_1` direct and `T_2` anti-direct.
#[derive(Debug, Clone, PartialEq)]
pub struct BijectiveSplit {
    pub alpha: Element,
    pub beta: Element,
    pub alpha_slots: Vec<usize>,
    pub beta_slots: Vec<usize>,
    pub n1_slots: Vec<usize>,
    pub n2_slots: Vec<usize>,
    pub m1: Option<AlgebraSpec>,
    pub m2: Option<AlgebraSpec>,
    pub n1: Option<AlgebraSpec>,
    pub n2: Option<AlgebraSpec>,
    pub t1: Option<LinearMap>,
    pub t2: Option<LinearMap>,
    pub triple: YeadonTriple,
    pub split: JordanSplit,
}

fn slot_sum(spec: &Arc<AlgebraSpec>, slots: &[usize]) -> Element {
    let mut acc = Element::zero(spec);
    for &s in slots {
        acc = &acc + &Element::slot_identity(spec, s);
    }
    acc
}

/// Target slots on which the central projection `z` is the identity; errors if
/// `z` is not a sum of slot identities.
fn slots_of(z: &Element) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (s, m) in z.slot_mats().iter().enumerate() {
        let n = m.nrows();
        if (m - Mat::identity(n, n)).iter().all(|v| v.norm() <= 1e-8) {
            out.push(s);
        } else if m.iter().any(|v| v.norm() > 1e-8) {
            return Err(Error::Inconsistent(format!("projection is not central in the target (slot {s})")));
        }
    }
    Ok(out)
}

pub fn decompose_bijective(t: &LinearMap) -> Result<BijectiveSplit> {
    if !t.is_invertible() {
        return Err(Error::Singular);
    }
    let y = extract_yeadon(t)?;
    let target = t.target().clone();
    let one = Element::identity(&target);
    let unitary_defect = (&(&y.w.adjoint() * &y.w) - &one)
        .max_abs()
        .max((&(&y.w * &y.w.adjoint()) - &one).max_abs());
    if unitary_defect > 1e-8 {
        return Err(Error::Inconsistent(format!("w is not unitary for a surjective map ({unitary_defect:e})")));
    }
    let split = jordan_split(&y.j)?;
    let source = t.source().clone();
    let jscale = 1.0 + y.j.max_abs();
    let mut alpha_slots = Vec::new();
    let mut beta_slots = Vec::new();
    for s in 0..source.slot_count() {
        let u = Element::slot_identity(&source, s);
        let sig = split.sigma.apply(&u).max_abs() / jscale;
        let pi = split.pi.apply(&u).max_abs() / jscale;
        match (sig <= 1e-8, pi <= 1e-8) {
            (true, false) => alpha_slots.push(s),
            (false, true) => beta_slots.push(s),
            (true, true) => return Err(Error::Inconsistent(format!("J vanishes on source slot {s}"))),
            (false, false) => {
                return Err(Error::Inconsistent(format!("source slot {s} lies in neither ker σ nor ker π")))
            }
        }
    }
    let alpha = slot_sum(&source, &alpha_slots);
    let beta = slot_sum(&source, &beta_slots);
    let n1_slots = slots_of(&split.e)?;
    let n2_slots = slots_of(&split.f)?;
    // T must not mix the two summands
    let in_slots = |x: &Element, allowed: &[usize]| {
        x.slot_mats()
            .iter()
            .enumerate()
            .filter(|(s, _)| !allowed.contains(s))
            .map(|(_, m)| m.iter().map(|v| v.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    };
    let tscale = 1.0 + t.max_abs();
    for x in Element::basis(&source) {
        let tx = t.apply(&x);
        let from_alpha = (&x * &alpha).max_abs() > 0.0;
        let allowed = if from_alpha { &n1_slots } else { &n2_slots };
        if in_slots(&tx, allowed) > 1e-8 * tscale {
            return Err(Error::Inconsistent("T mixes the direct and anti-direct summands".into()));
        }
    }
    let sub = |slots: &[usize], spec: &AlgebraSpec| {
        if slots.is_empty() {
            Ok(None)
        } else {
            spec.sub_spec(slots).map(Some)
        }
    };
    let restrict = |a: &[usize], b: &[usize]| {
        if a.is_empty() {
            Ok(None)
        } else {
            t.restrict(a, b).map(Some)
        }
    };
    Ok(BijectiveSplit {
        m1: sub(&alpha_slots, &source)?,
        m2: sub(&beta_slots, &source)?,
        n1: sub(&n1_slots, &target)?,
        n2: sub(&n2_slots, &target)?,
        t1: restrict(&alpha_slots, &n1_slots)?,
        t2: restrict(&beta_slots, &n2_slots)?,
        alpha,
        beta,
        alpha_slots,
        beta_slots,
        n1_slots,
        n2_slots,
        triple: y,
        split,
    })
}

/// Outcome of [`inverse_analysis`].
#[derive(Debug, Clone, PartialEq)]
pub struct InverseAnalysis {
    pub inverse: LinearMap,
    pub separating: bool,
    pub j_inverse_matches: bool,
    /// `max(‖J'∘J − id‖, ‖J∘J' − id‖)`, entrywise.
    pub j_defect: f64,
    /// Entrywise defect of `J'(y) = J⁻¹(y)` on the direct target summand and
    /// `J'(y) = w'* J⁻¹(y) w'` on the anti-direct one, `w'` from the triple of
    /// `T⁻¹`. `None` when `T` does not decompose.
    pub split_relation_defect: Option<f64>,
}

pub fn inverse_analysis(t: &LinearMap, trials: usize, seed: u64) -> Result<InverseAnalysis> {
    let inverse = t.inverse()?;
    let verdict = is_separating(&inverse, trials, seed);
    let y = extract_yeadon(t)?;
    let (j_defect, matches) = match &verdict.triple {
        Some(yi) => {
            let a = yi.j.compose(&y.j)?;
            let b = y.j.compose(&yi.j)?;
            let da = (a.matrix() - LinearMap::identity(t.source(), t.p()).matrix())
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max);
            let db = (b.matrix() - LinearMap::identity(t.target(), t.p()).matrix())
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max);
            let d = da.max(db);
            (d, d <= 1e-8)
        }
        None => (f64::INFINITY, false),
    };
    let split_relation_defect = match (&verdict.triple, decompose_bijective(t)) {
        (Some(yi), Ok(d)) => {
            let jinv = y.j.inverse()?;
            let target = t.target().clone();
            let mut worst: f64 = 0.0;
            for e in Element::basis(&target) {
                let anti = d.n2_slots.iter().any(|&s| e.slot(s).iter().any(|v| v.norm() > 0.0));
                let base = jinv.apply(&e);
                let want = if anti { &(&yi.w.adjoint() * &base) * &yi.w } else { base };
                worst = worst.max((&yi.j.apply(&e) - &want).max_abs());
            }
            Some(worst)
        }
        _ => None,
    };
    Ok(InverseAnalysis { inverse, separating: verdict.separating, j_inverse_matches: matches, j_defect, split_relation_defect })
}

/// `ker T = L^p(M_0)` for a central projection `M_0` of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSummand {
    pub m0: Element,
    pub complement: Element,
    pub m0_slots: Vec<usize>,
    /// `T` restricted to the complement is injective.
    pub complement_injective: bool,
}

pub fn kernel_summand(t: &LinearMap) -> Result<KernelSummand> {
    let y = extract_yeadon(t)?;
    let source = t.source().clone();
    let jscale = 1.0 + y.j.max_abs();
    let m0_slots: Vec<usize> = (0..source.slot_count())
        .filter(|&s| y.j.apply(&Element::slot_identity(&source, s)).max_abs() <= tol::ALG * jscale)
        .collect();
    let m0 = slot_sum(&source, &m0_slots);
    let complement = &Element::identity(&source) - &m0;
    let kernel_dim = t.kernel().len();
    let m0_dim: usize = source
        .slots()
        .iter()
        .enumerate()
        .filter(|(s, _)| m0_slots.contains(s))
        .map(|(_, sl)| sl.size * sl.size)
        .sum();
    if kernel_dim != m0_dim {
        return Err(Error::NotSeparating(format!(
            "ker T has dimension {kernel_dim} but the killed summand has dimension {m0_dim}"
        )));
    }
    let tscale = 1.0 + t.max_abs();
    for (k, x) in Element::basis(&source).iter().enumerate() {
        let _ = k;
        if (x * &m0).max_abs() > 0.0 && t.apply(x).max_abs() > tol::ALG * tscale {
            return Err(Error::NotSeparating("T does not vanish on the killed summand".into()));
        }
    }
    let rest: Vec<usize> = (0..source.slot_count()).filter(|s| !m0_slots.contains(s)).collect();
    let complement_injective = if rest.is_empty() {
        true
    } else {
        let all: Vec<usize> = (0..t.target().slot_count()).collect();
        let r = t.restrict(&rest, &all)?;
        r.rank() == r.source().dim()
    };
    Ok(KernelSummand { m0, complement, m0_slots, complement_injective })
}

/// `T(z*) = w T(z)* w`.
pub fn star_identity_defect(t: &LinearMap, y: &YeadonTriple, z: &Element) -> f64 {
    let lhs = t.apply(&z.adjoint());
    let rhs = &(&y.w * &t.apply(z).adjoint()) * &y.w;
    (&lhs - &rhs).max_abs()
}

/// `T(zm) = T(z)J(m)` when `direct`, `T(mz) = T(z)J(m)` otherwise.
pub fn module_identity_defect(t: &LinearMap, y: &YeadonTriple, z: &Element, m: &Element, direct: bool) -> f64 {
    let lhs = if direct { t.apply(&(z * m)) } else { t.apply(&(m * z)) };
    let rhs = &t.apply(z) * &y.j.apply(m);
    (&lhs - &rhs).max_abs()
}

/// How the copies inside a sampled Jordan map are oriented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Direct,
    AntiDirect,
}

/// A random valid triple over `source`: every target slot carries one or two
/// copies of source slots (transposed for `AntiDirect`), conjugated by a random
/// unitary and padded by `pad` zero rows; `B` is a positive scalar on each copy
/// and `w = V·J(1)` for a random unitary `V`.
pub fn sample_triple(rng: &mut SeededRng, source: &Arc<AlgebraSpec>, orientation: Orientation, pad: usize) -> YeadonTriple {
    let slots = source.slots();
    let order = random::permutation(rng, slots.len());
    // group the permuted source slots into target slots of one or two copies
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let take = if i + 1 < order.len() && rng.random_bool(0.3) { 2 } else { 1 };
        groups.push(order[i..i + take].to_vec());
        i += take;
    }
    let blocks: Vec<Block> = groups
        .iter()
        .map(|g| {
            let size: usize = g.iter().map(|&s| slots[s].size).sum::<usize>() + pad;
            Block::new(size, alloc::vec![rng.random_range(0.5..=2.0)])
        })
        .collect();
    let target = Arc::new(AlgebraSpec::new(blocks).expect("positive sizes and weights"));
    let unitaries: Vec<Mat> = target.slots().iter().map(|s| random::unitary_matrix(rng, s.size)).collect();
    let scalars: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|_| rng.random_range(0.5..=2.0)).collect()).collect();
    let anti = orientation == Orientation::AntiDirect;
    let place = |x: &Element, t: usize, weights: Option<&Vec<f64>>| {
        let size = target.slots()[t].size;
        let mut m = Mat::zeros(size, size);
        let mut off = 0;
        for (k, &s) in groups[t].iter().enumerate() {
            let n = slots[s].size;
            let blk = if anti { x.slot(s).transpose() } else { x.slot(s).clone() };
            let blk = match weights {
                Some(w) => blk * c(w[k]),
                None => blk,
            };
            m.view_mut((off, off), (n, n)).copy_from(&blk);
            off += n;
        }
        &unitaries[t] * m * unitaries[t].adjoint()
    };
    let j = LinearMap::from_fn(source.clone(), target.clone(), Exponent::new(1.0).expect("p = 1"), |x| {
        Element::from_fn(&target, |t, _| place(x, t, None))
    })
    .expect("target spec");
    let one = Element::identity(source);
    let b = Element::from_fn(&target, |t, _| place(&one, t, Some(&scalars[t])));
    let j1 = j.image_of_identity();
    let v = random::unitary(rng, &target);
    let w = &v * &j1;
    YeadonTriple { w, b, j }
}

/// A random bijective separating map `T = T_1 ⊕ T_2 : M_1 ⊕ M_2 → N_1 ⊕ N_2`
/// with `T_1` direct and `T_2` anti-direct. Returns the map and the planted
/// source slots of `M_1`.
pub fn sample_bijective(
    rng: &mut SeededRng,
    direct_part: &Arc<AlgebraSpec>,
    anti_part: Option<&Arc<AlgebraSpec>>,
    p: Exponent,
) -> (LinearMap, Vec<usize>) {
    let iso = |rng: &mut SeededRng, spec: &Arc<AlgebraSpec>, anti: bool| {
        let target = Arc::new(
            AlgebraSpec::new(
                spec.blocks()
                    .iter()
                    .map(|b| Block::new(b.size, b.weights.iter().map(|_| rng.random_range(0.5..=2.0)).collect()))
                    .collect(),
            )
            .expect("valid"),
        );
        let us: Vec<Mat> = target.slots().iter().map(|s| random::unitary_matrix(rng, s.size)).collect();
        let scal: Vec<f64> = target.slots().iter().map(|_| rng.random_range(0.5..=2.0)).collect();
        let v = random::unitary(rng, &target);
        let w = v;
        let b = Element::from_fn(&target, |s, sl| Mat::identity(sl.size, sl.size) * c(scal[s]));
        let j = LinearMap::from_fn(spec.clone(), target.clone(), p, |x| {
            Element::from_fn(&target, |s, _| {
                let blk = if anti { x.slot(s).transpose() } else { x.slot(s).clone() };
                &us[s] * blk * us[s].adjoint()
            })
        })
        .expect("same shapes");
        build_yeadon_map(&w, &b, &j, p).expect("valid bijective triple")
    };
    let t1 = iso(rng, direct_part, false);
    let planted: Vec<usize> = (0..direct_part.slot_count()).collect();
    match anti_part {
        Some(a) => {
            let t2 = iso(rng, a, true);
            (t1.direct_sum(&t2), planted)
        }
        None => (t1, planted),
    }
}

/// Coordinates of `J(x)` for every basis element, as columns.
pub fn jordan_matrix(j: &LinearMap) -> &Mat {
    j.matrix()
}

/// Compares two triples entrywise: `w·s(B)`, `B`, and `J` compressed to `s(B)`.
pub fn triple_distance(a: &YeadonTriple, b: &YeadonTriple) -> f64 {
    let sa = crate::lp::support(&a.b);
    let sb = crate::lp::support(&b.b);
    let dw = (&(&a.w * &sa) - &(&b.w * &sb)).max_abs();
    let db = (&a.b - &b.b).max_abs();
    let mut dj: f64 = 0.0;
    for x in Element::basis(a.j.source()) {
        let ja = &(&sa * &a.j.apply(&x)) * &sa;
        let jb = &(&sb * &b.j.apply(&x)) * &sb;
        dj = dj.max((&ja - &jb).max_abs());
    }
    dw.max(db).max(dj)
}

/// `true` when the coordinates of `v` are (numerically) zero.
pub fn is_null(v: &Vector) -> bool {
    v.iter().all(|z| z.norm() <= tol::ALG)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_algebra;

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    fn m2() -> Arc<AlgebraSpec> {
        Arc::new(AlgebraSpec::full_matrix(2).unwrap())
    }

    #[test]
    fn scaled_identity_and_transpose_are_separating() {
        let s = m2();
        let t = LinearMap::identity(&s, p(2.0)).scale_re(2.0);
        assert!(is_separating(&t, 10, 0).separating);
        let tr = LinearMap::transposition(&s, p(2.0));
        let v = is_separating(&tr, 10, 0);
        assert!(v.separating);
        let y = v.triple.unwrap();
        assert!(y.w.approx_eq(&Element::identity(&s), 1e-12));
        assert!(y.j.approx_eq(&tr, 1e-12));
    }

    #[test]
    fn trace_functional_is_not_separating() {
        let s = m2();
        let e11 = Element::matrix_unit(&s, 0, 0, 0);
        let t = LinearMap::from_fn(s.clone(), s.clone(), p(1.0), |x| e11.scale(x.trace())).unwrap();
        let v = is_separating(&t, 10, 0);
        assert!(!v.separating);
        let (x, y) = v.counterexample.unwrap();
        assert_eq!(x, e11);
        assert_eq!(y, Element::matrix_unit(&s, 0, 1, 1));
    }

    #[test]
    fn non_central_scaling_fails_condition_b() {
        let s = m2();
        let mut b0 = Element::identity(&s);
        b0.slot_mut(0)[(1, 1)] = c(2.0);
        let t = LinearMap::identity(&s, p(1.0)).left_multiply(&b0).unwrap();
        match extract_yeadon(&t) {
            Err(Error::NotSeparating(msg)) => assert!(msg.contains("(b)"), "{msg}"),
            other => panic!("expected (b) violation, got {other:?}"),
        }
        assert!(!is_separating(&t, 10, 0).separating);
    }

    #[test]
    fn unitary_multiple() {
        let s = m2();
        let u = random::unitary(&mut random::rng(2), &s);
        let t = LinearMap::identity(&s, p(1.0)).left_multiply(&u).unwrap();
        let y = extract_yeadon(&t).unwrap();
        assert!(y.w.approx_eq(&u, 1e-10));
        assert!(y.b.approx_eq(&Element::identity(&s), 1e-10));
        assert!(y.j.approx_eq(&LinearMap::identity(&s, p(1.0)), 1e-10));
    }

    #[test]
    fn split_of_direct_plus_transpose() {
        let s = m2();
        let target = Arc::new(make_algebra(&[(2, &[1.0]), (2, &[1.0])]).unwrap());
        let j = LinearMap::from_fn(s.clone(), target.clone(), p(1.0), |x| {
            Element::from_slots(target.clone(), alloc::vec![x.slot(0).clone(), x.slot(0).transpose()]).unwrap()
        })
        .unwrap();
        let sp = jordan_split(&j).unwrap();
        assert!(sp.e.approx_eq(&Element::slot_identity(&target, 0), 1e-9));
        assert!(sp.f.approx_eq(&Element::slot_identity(&target, 1), 1e-9));
    }

    #[test]
    fn split_into_abelian_target_is_direct() {
        let s = Arc::new(make_algebra(&[(1, &[1.0, 1.0])]).unwrap());
        let j = LinearMap::identity(&s, p(1.0));
        let sp = jordan_split(&j).unwrap();
        assert!(sp.f.max_abs() < 1e-12);
        assert!(sp.e.approx_eq(&Element::identity(&s), 1e-9));
    }

    #[test]
    fn decompose_identity_plus_transpose() {
        let s = Arc::new(make_algebra(&[(2, &[1.0]), (3, &[1.0])]).unwrap());
        let t = LinearMap::from_fn(s.clone(), s.clone(), p(1.0), |x| {
            Element::from_slots(s.clone(), alloc::vec![x.slot(0).clone(), x.slot(1).transpose()]).unwrap()
        })
        .unwrap();
        let d = decompose_bijective(&t).unwrap();
        assert_eq!(d.alpha_slots, alloc::vec![0]);
        assert_eq!(d.beta_slots, alloc::vec![1]);
        let pure = LinearMap::transposition(&m2(), p(1.0));
        let d = decompose_bijective(&pure).unwrap();
        assert!(d.alpha_slots.is_empty() && d.m1.is_none());
    }

    #[test]
    fn inverse_of_scaled_transpose() {
        let t = LinearMap::transposition(&m2(), p(2.0)).scale_re(2.0);
        let a = inverse_analysis(&t, 5, 1).unwrap();
        assert!(a.separating && a.j_inverse_matches);
        assert!(a.inverse.approx_eq(&LinearMap::transposition(&m2(), p(2.0)).scale_re(0.5), 1e-12));
        assert!(a.split_relation_defect.unwrap() < 1e-12);
    }

    #[test]
    fn inverse_of_unitary_times_transpose_conjugates_j() {
        // T(x) = w x^T with non-scalar unitary w: J' = w'* J⁻¹(·) w' rather than J⁻¹
        let s = m2();
        let w = Element::from_slots(s.clone(), alloc::vec![Mat::from_fn(2, 2, |r, k| c(if r != k { 1.0 } else { 0.0 }))]).unwrap();
        let t = LinearMap::transposition(&s, p(2.0)).left_multiply(&w).unwrap();
        let a = inverse_analysis(&t, 5, 1).unwrap();
        assert!(a.separating);
        assert!(!a.j_inverse_matches && a.j_defect > 0.5);
        assert!(a.split_relation_defect.unwrap() < 1e-12);
    }

    #[test]
    fn kernel_of_projection_onto_first_summand() {
        let s = Arc::new(make_algebra(&[(2, &[1.0]), (3, &[1.0])]).unwrap());
        let t = LinearMap::identity(&s, p(1.0)).left_multiply(&Element::slot_identity(&s, 0)).unwrap();
        let k = kernel_summand(&t).unwrap();
        assert_eq!(k.m0_slots, alloc::vec![1]);
        assert!(k.complement_injective);
    }

    #[test]
    fn round_trip_random_triples() {
        let mut rng = random::rng(17);
        for k in 0..10 {
            let s = Arc::new(random::spec(&mut rng, 3, 3, 2, 16));
            let o = if k % 2 == 0 { Orientation::Direct } else { Orientation::AntiDirect };
            let y = sample_triple(&mut rng, &s, o, k % 2);
            let t = build_yeadon_map(&y.w, &y.b, &y.j, p(2.0)).unwrap();
            let back = extract_yeadon(&t).unwrap();
            assert!(triple_distance(&y, &back) < 1e-8, "{}", triple_distance(&y, &back));
            let z = random::element(&mut rng, &s);
            let m = random::element(&mut rng, &s);
            assert!(star_identity_defect(&t, &back, &z) < 1e-8);
            assert!(module_identity_defect(&t, &back, &z, &m, o == Orientation::Direct) < 1e-8);
        }
    }

    #[test]
    fn yeadon_norm_of_weighted_isomorphism() {
        let a = Arc::new(make_algebra(&[(2, &[1.0])]).unwrap());
        let b = Arc::new(make_algebra(&[(2, &[2.0])]).unwrap());
        let t = LinearMap::from_fn(a.clone(), b.clone(), p(3.0), |x| Element::from_slots(b.clone(), alloc::vec![x.slot(0).clone()]).unwrap()).unwrap();
        let y = extract_yeadon(&t).unwrap();
        assert!((yeadon_norm(&y, p(3.0)) - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }
}
