//! Finite-dimensional verification suites: transposition bounds on
//! subhomogeneous algebras, degree detection from a transposition constant,
//! direct Yeadon maps, the direct/anti-direct decomposition of bijective maps,
//! and a truncated non-surjective isometry that is `S¹`-bounded yet admits no
//! direct/anti-direct splitting.
//!
//! Every failure here is a failure of the finite-dimensional computation, not
//! of any infinite-dimensional statement.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use crate::algebra::{AlgebraSpec, Block, Element};
use crate::lp::{amplified_norm, lp_norm, AmplifiedElement, Exponent};
use crate::map::LinearMap;
use crate::random;
use crate::separating::{self, Orientation};
use crate::valued::{self, EstimateOptions, S1Options};
use crate::{Error, Result};

/// Margin for checks whose oracle is exact.
pub const EXACT_MARGIN: f64 = 1e-3;
/// Margin for checks relying on `S¹`-valued brackets at `p ∉ {1, 2}`.
pub const BRACKET_MARGIN: f64 = 5e-2;

/// How `measured` is compared with `bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    /// `measured ≤ bound`.
    AtMost,
    /// `measured ≥ bound`.
    AtLeast,
    /// `|measured − bound| ≤ tolerance`.
    Within(f64),
}

impl Relation {
    pub fn holds(self, measured: f64, bound: f64) -> bool {
        match self {
            Relation::AtMost => measured <= bound,
            Relation::AtLeast => measured >= bound,
            Relation::Within(t) => (measured - bound).abs() <= t,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Within(_) => "~=",
        }
    }
}

/// The input that produced a check.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Element(Element),
    Amplified(AmplifiedElement),
    Map(LinearMap),
    Pair(Element, Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub instance: String,
    pub check: String,
    pub measured: f64,
    pub bound: f64,
    pub relation: Relation,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    /// Parameters as `(name, value)` pairs, in a fixed order.
    pub params: Vec<(String, String)>,
    pub checks: Vec<Check>,
    /// Named numeric series, e.g. the `β_n` of the Example.
    pub data: Vec<(String, Vec<f64>)>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        Self {
            suite: suite.into(),
            seed,
            params: Vec::new(),
            checks: Vec::new(),
            data: Vec::new(),
            notes: vec!["checks concern finite-dimensional instances only".into()],
        }
    }

    pub fn param(&mut self, name: &str, value: impl ToString) {
        self.params.push((name.into(), value.to_string()));
    }

    /// Records a check; the witness is kept only when the check fails.
    pub fn check(
        &mut self,
        instance: impl Into<String>,
        check: &str,
        measured: f64,
        bound: f64,
        relation: Relation,
        witness: impl FnOnce() -> Witness,
    ) -> bool {
        let passed = relation.holds(measured, bound);
        self.checks.push(Check {
            instance: instance.into(),
            check: check.into(),
            measured,
            bound,
            relation,
            passed,
            witness: if passed { None } else { Some(witness()) },
        });
        passed
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn merge(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
        self.data.extend(other.data);
    }
}

fn exponent(p: f64) -> Result<Exponent> {
    Exponent::new(p)
}

/// `E(v)`, the integer part, guarded against rounding just below an integer.
pub fn integer_part(v: f64) -> usize {
    let g = (v * (1.0 + 1e-9)).floor();
    if g < 1.0 {
        1
    } else {
        g as usize
    }
}

/// Which transposition constant a degree is inferred from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeBranch {
    /// `K` bounds `[x_ij] ↦ [x_ji]` on `L^p(M ⊗ M_m)`: `N = E(K^{1/(2|1/2−1/p|)})`.
    Cb,
    /// `K` bounds it on `L^p(M; S¹_m)`: `N = E(K)`.
    S1,
}

/// Degree `N` such that an algebra with transposition constant at most `K` is
/// subhomogeneous of degree at most `N`.
pub fn suite_degree_detection(k: f64, p: f64, branch: DegreeBranch) -> Result<usize> {
    let p = exponent(p)?;
    if !(k.is_finite() && k >= 1.0 - 1e-12) {
        return Err(Error::InvalidParams(format!("transposition constant K = {k} must be at least 1")));
    }
    match branch {
        DegreeBranch::S1 => Ok(integer_part(k)),
        DegreeBranch::Cb => {
            let e = p.transposition_exponent();
            if e == 0.0 {
                return Err(Error::InvalidParams("the cb branch needs p != 2".into()));
            }
            Ok(integer_part(k.powf(1.0 / e)))
        }
    }
}

/// Algebras of degree exactly `n` used by the transposition suite.
fn degree_specs(n: usize) -> Vec<AlgebraSpec> {
    let mk = |b: Vec<(usize, Vec<f64>)>| AlgebraSpec::new(b.into_iter().map(|(s, w)| Block::new(s, w)).collect()).expect("valid");
    let mut out = vec![mk(vec![(n, vec![1.0])]), mk(vec![(1, vec![0.5, 1.5]), (n, vec![0.75])])];
    if n >= 2 {
        out.push(mk(vec![(n - 1, vec![2.0]), (n, vec![1.0, 0.5])]));
    } else {
        out.push(mk(vec![(1, vec![1.0, 2.0, 0.25])]));
    }
    out
}

fn omega(base: &Arc<AlgebraSpec>, slot: usize, n: usize) -> AmplifiedElement {
    AmplifiedElement::from_fn(base, n, |i, j| Element::matrix_unit(base, slot, i, j)).expect("n >= 1")
}

/// Checks `‖[x_ji]‖ ≤ N^{2|1/2−1/p|} ‖[x_ij]‖` in `L^p(M ⊗ M_m)` and
/// `‖[x_ji]‖ ≤ N ‖[x_ij]‖` in `L^p(M; S¹_m)` on random families over algebras of
/// degree `N`, plus sharpness on the matrix-unit family.
pub fn suite_subhomogeneous_bounds(n: usize, p: f64, samples: usize, seed: u64) -> Result<SuiteReport> {
    if n == 0 || n > 4 {
        return Err(Error::InvalidParams(format!("degree N = {n} must lie in 1..=4")));
    }
    let pe = exponent(p)?;
    let mut rep = SuiteReport::new("subhomogeneous", seed);
    rep.param("N", n);
    rep.param("p", p);
    rep.param("samples", samples);
    let e = pe.transposition_exponent();
    let sp_bound = (n as f64).powf(e);
    let s1_bound = n as f64;
    let margin = if p == 1.0 || p == 2.0 { EXACT_MARGIN } else { BRACKET_MARGIN };
    let specs: Vec<Arc<AlgebraSpec>> = degree_specs(n).into_iter().map(Arc::new).collect();
    let opts = S1Options::default();
    let mut rng = random::rng(seed);
    let mut worst_sp: f64 = 0.0;
    let mut worst_s1: f64 = 0.0;
    for k in 0..samples {
        let spec = &specs[k % specs.len()];
        let m = rng.random_range(1..=4usize);
        let x = if k % 3 == 2 {
            random::low_rank_amplified(&mut rng, spec, m, 1)
        } else {
            random::amplified(&mut rng, spec, m)
        };
        let xt = x.transpose_outer();
        let inst = format!("sample {k}, m = {m}, blocks = {}", spec.blocks().len());
        let sp = amplified_norm(&xt, pe) / amplified_norm(&x, pe);
        worst_sp = worst_sp.max(sp);
        rep.check(inst.clone(), "S^p transposition ratio", sp, sp_bound * (1.0 + crate::tol::NORM), Relation::AtMost, || {
            Witness::Amplified(x.clone())
        });
        let num = valued::s1_bracket(&xt, pe, &opts, None);
        let den = valued::s1_bracket(&x, pe, &opts, None);
        let s1 = num.lower / den.upper;
        worst_s1 = worst_s1.max(s1);
        rep.check(inst, "S1 transposition ratio", s1, s1_bound * (1.0 + margin), Relation::AtMost, || {
            Witness::Amplified(x.clone())
        });
    }
    rep.data.push(("largest S^p ratio".into(), vec![worst_sp]));
    rep.data.push(("largest S1 ratio".into(), vec![worst_s1]));

    // sharpness on M_N with m = N
    let mn = Arc::new(AlgebraSpec::full_matrix(n)?);
    let w = omega(&mn, 0, n);
    let sw = w.transpose_outer();
    let sp_sharp = (amplified_norm(&sw, pe) / amplified_norm(&w, pe)).max(amplified_norm(&w, pe) / amplified_norm(&sw, pe));
    rep.check(format!("matrix units, m = {n}"), "S^p sharpness", sp_sharp, sp_bound, Relation::Within(1e-8 * sp_bound), || {
        Witness::Amplified(w.clone())
    });
    let (up_sw, _) = valued::s1_norm_upper(&sw, pe, 1, opts.max_iter);
    let (up_w, _) = valued::s1_norm_upper(&w, pe, 1, opts.max_iter);
    let s1_sharp = up_sw / up_w;
    let tol = if p == 1.0 { 1e-4 } else { BRACKET_MARGIN * s1_bound };
    rep.check(format!("matrix units, m = {n}"), "S1 sharpness", s1_sharp, s1_bound, Relation::Within(tol), || {
        Witness::Amplified(w.clone())
    });
    rep.data.push(("S1 sharpness ratio".into(), vec![s1_sharp]));
    Ok(rep)
}

/// Options shared by the map suites.
#[derive(Debug, Clone, Copy)]
pub struct MapSuiteOptions {
    pub trials: usize,
    pub seed: u64,
    pub m_max: usize,
    pub restarts: usize,
}

impl Default for MapSuiteOptions {
    fn default() -> Self {
        Self { trials: 4, seed: 0, m_max: 2, restarts: 2 }
    }
}

fn estimate_options(o: &MapSuiteOptions, sub: u64) -> EstimateOptions {
    EstimateOptions { m_max: o.m_max, restarts: o.restarts, seed: random::sub_seed(o.seed, sub), max_iter: 200 }
}

/// Random direct Yeadon maps: the cb and `S¹` estimates never exceed `‖T‖`,
/// and the `m = 1` ascent reaches `‖T‖`. Transposition on `M_2` at `p = 1` is
/// the anti-direct contrast case.
pub fn suite_direct_maps(p: f64, o: &MapSuiteOptions) -> Result<SuiteReport> {
    let pe = exponent(p)?;
    let mut rep = SuiteReport::new("direct", o.seed);
    rep.param("p", p);
    rep.param("trials", o.trials);
    rep.param("m_max", o.m_max);
    rep.param("restarts", o.restarts);
    let margin = if p == 1.0 || p == 2.0 { EXACT_MARGIN } else { BRACKET_MARGIN };
    let mut rng = random::rng(o.seed);
    for k in 0..o.trials {
        let source = Arc::new(random::spec(&mut rng, 3, 3, 2, 12));
        let y = separating::sample_triple(&mut rng, &source, Orientation::Direct, k % 2);
        let t = separating::build_yeadon_map(&y.w, &y.b, &y.j, pe)?;
        let norm = separating::yeadon_norm(&y, pe);
        let inst = format!("trial {k}, source dim {}", source.dim());
        let eo = estimate_options(o, k as u64);
        let plain = valued::operator_norm_estimate(&t, pe, &eo);
        rep.check(inst.clone(), "m = 1 ascent attains ||T||", plain.lower, norm * (1.0 - EXACT_MARGIN), Relation::AtLeast, || {
            Witness::Map(t.clone())
        });
        let cb = valued::cb_norm_estimate(&t, pe, &eo);
        rep.check(inst.clone(), "cb estimate <= ||T||", cb.lower, norm * (1.0 + EXACT_MARGIN), Relation::AtMost, || {
            Witness::Map(t.clone())
        });
        rep.check(inst.clone(), "cb estimate flat in m", cb.lower, plain.lower, Relation::Within(EXACT_MARGIN * norm), || {
            Witness::Map(t.clone())
        });
        let s1 = valued::s1_bounded_norm_estimate(&t, pe, &EstimateOptions { restarts: 0, ..eo });
        rep.check(inst, "S1 estimate <= ||T||", s1.lower, norm * (1.0 + margin), Relation::AtMost, || Witness::Map(t.clone()))
            ;
    }
    if p == 1.0 {
        let m2 = Arc::new(AlgebraSpec::full_matrix(2)?);
        let t = LinearMap::transposition(&m2, pe);
        let cb = valued::cb_norm_estimate(&t, pe, &EstimateOptions { m_max: 2, ..estimate_options(o, 1000) });
        rep.check("transposition on M_2", "anti-direct cb estimate exceeds ||T|| = 1", cb.lower, 2.0 - EXACT_MARGIN, Relation::AtLeast, || {
            Witness::Map(t.clone())
        });
    }
    Ok(rep)
}

/// One surjective separating map with a planted splitting.
struct PlantedMap {
    name: String,
    t: LinearMap,
    alpha_slots: Vec<usize>,
    /// Degree of the anti-direct summand (0 when there is none).
    anti_degree: usize,
}

fn planted_instances(pe: Exponent, o: &MapSuiteOptions) -> Result<Vec<PlantedMap>> {
    let mut out = Vec::new();
    let m3 = Arc::new(AlgebraSpec::full_matrix(3)?);
    let m2 = Arc::new(AlgebraSpec::full_matrix(2)?);
    out.push(PlantedMap {
        name: "id + t_2 on M_3 + M_2".into(),
        t: LinearMap::identity(&m3, pe).direct_sum(&LinearMap::transposition(&m2, pe)),
        alpha_slots: vec![0],
        anti_degree: 2,
    });
    out.push(PlantedMap { name: "t_3 on M_3".into(), t: LinearMap::transposition(&m3, pe), alpha_slots: vec![], anti_degree: 3 });
    let mut rng = random::rng(o.seed);
    let direct = Arc::new(random::spec(&mut rng, 2, 3, 2, 10));
    let (t, planted) = separating::sample_bijective(&mut rng, &direct, None, pe);
    out.push(PlantedMap { name: "random fully direct".into(), t, alpha_slots: planted, anti_degree: 0 });
    for k in 0..o.trials {
        let direct = Arc::new(random::spec(&mut rng, 2, 3, 2, 10));
        let deg = 2 + k % 2;
        let anti = Arc::new(AlgebraSpec::new(vec![Block::new(deg, vec![rng.random_range(0.5..=2.0)])])?);
        let (t, planted) = separating::sample_bijective(&mut rng, &direct, Some(&anti), pe);
        out.push(PlantedMap { name: format!("random direct + anti-direct {k}"), t, alpha_slots: planted, anti_degree: deg });
    }
    Ok(out)
}

/// Surjective separating maps `T = T_1 ⊕ T_2`: measured cb and `S¹` estimates
/// stay below `max(‖T_1‖, ‖T_2‖·N^{2|1/p−1/2|})` and `max(‖T_1‖, ‖T_2‖·N)`,
/// the decomposition recovers the planted summands, and the degree of the
/// anti-direct summand is recovered from its measured transposition constant.
pub fn suite_main_theorems(p: f64, o: &MapSuiteOptions) -> Result<SuiteReport> {
    let pe = exponent(p)?;
    let mut rep = SuiteReport::new("main", o.seed);
    rep.param("p", p);
    rep.param("trials", o.trials);
    rep.param("m_max", o.m_max);
    rep.param("restarts", o.restarts);
    let cb_direction = p != 2.0;
    let margin = if p == 1.0 || p == 2.0 { EXACT_MARGIN } else { BRACKET_MARGIN };
    for (idx, inst) in planted_instances(pe, o)?.into_iter().enumerate() {
        let t = &inst.t;
        let name = inst.name.clone();
        let split = match separating::decompose_bijective(t) {
            Ok(s) => s,
            Err(e) => {
                rep.check(name, &format!("decomposition ({e})"), 1.0, 0.0, Relation::AtMost, || Witness::Map(t.clone()));
                continue;
            }
        };
        let recovered = split.alpha_slots == inst.alpha_slots;
        rep.check(name.clone(), "planted direct summand recovered", if recovered { 0.0 } else { 1.0 }, 0.0, Relation::AtMost, || {
            Witness::Map(t.clone())
        });
        let norm_of = |m: &Option<LinearMap>| -> Result<f64> {
            match m {
                Some(m) => Ok(separating::yeadon_norm(&separating::extract_yeadon(m)?, pe)),
                None => Ok(0.0),
            }
        };
        let n1 = norm_of(&split.t1)?;
        let n2 = norm_of(&split.t2)?;
        let degree = split.m2.as_ref().map_or(0, |s| s.subhomogeneous_degree());
        rep.check(name.clone(), "anti-direct summand degree", degree as f64, inst.anti_degree as f64, Relation::Within(0.0), || {
            Witness::Map(t.clone())
        });
        let eo = EstimateOptions { m_max: o.m_max.max(degree), ..estimate_options(o, idx as u64) };
        if cb_direction {
            let bound = n1.max(n2 * (degree.max(1) as f64).powf(pe.transposition_exponent()));
            let cb = valued::cb_norm_estimate(t, pe, &eo);
            rep.check(name.clone(), "cb estimate <= decomposition bound", cb.lower, bound * (1.0 + EXACT_MARGIN), Relation::AtMost, || {
                Witness::Map(t.clone())
            });
        }
        let bound = n1.max(n2 * degree.max(1) as f64);
        let s1 = valued::s1_bounded_norm_estimate(t, pe, &EstimateOptions { restarts: 0, m_max: o.m_max.min(2), ..eo });
        rep.check(name.clone(), "S1 estimate <= decomposition bound", s1.lower, bound * (1.0 + margin), Relation::AtMost, || {
            Witness::Map(t.clone())
        });
        if let Some(m2) = &split.m2 {
            let spec = Arc::new(m2.clone());
            let tr = LinearMap::transposition(&spec, pe);
            let to = EstimateOptions { m_max: degree, restarts: 1, ..eo };
            let (k, branch) = if cb_direction {
                (valued::cb_norm_estimate(&tr, pe, &to).lower, DegreeBranch::Cb)
            } else {
                (valued::s1_bounded_norm_estimate(&tr, pe, &EstimateOptions { restarts: 0, ..to }).lower, DegreeBranch::S1)
            };
            let detected = suite_degree_detection(k, p, branch)?;
            rep.data.push((format!("{name}: transposition constant"), vec![k]));
            rep.check(name, "degree detected from transposition constant", detected as f64, degree as f64, Relation::Within(0.0), || {
                Witness::Map(tr.clone())
            });
        }
    }
    Ok(rep)
}

/// Parameters of the truncated Example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleParams {
    pub p: f64,
    pub epsilon: f64,
    pub n_max: usize,
    pub m_max: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl ExampleParams {
    pub fn new(p: f64, epsilon: f64, n_max: usize, m_max: usize) -> Self {
        Self { p, epsilon, n_max, m_max, restarts: 2, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::InvalidParams(format!("p = {} must satisfy 1 < p < inf", self.p)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParams(format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        if self.n_max < 2 {
            return Err(Error::InvalidParams(format!("n_max = {} must be at least 2", self.n_max)));
        }
        if self.m_max < 1 {
            return Err(Error::InvalidParams("m_max must be at least 1".into()));
        }
        Ok(())
    }

    /// `β_n = ((1+ε)^p − 1)/(n^p − 1)` for `n = 2..=n_max`.
    pub fn betas(&self) -> Vec<f64> {
        (2..=self.n_max)
            .map(|n| ((1.0 + self.epsilon).powf(self.p) - 1.0) / ((n as f64).powf(self.p) - 1.0))
            .collect()
    }
}

/// `M = ⊕_{n=2}^{n_max} M_n`, `N = M ⊕ M` and
/// `T(x) = ((1−β_n)^{1/p} x_n, β_n^{1/p} t_n(x_n))`.
pub fn example_map(params: &ExampleParams) -> Result<LinearMap> {
    params.validate()?;
    let pe = exponent(params.p)?;
    let betas = params.betas();
    let m = Arc::new(AlgebraSpec::new((2..=params.n_max).map(|n| Block::new(n, vec![1.0])).collect())?);
    let target = Arc::new(m.direct_sum(&m));
    let k = betas.len();
    LinearMap::from_fn(m.clone(), target.clone(), pe, |x| {
        Element::from_fn(&target, |s, _| {
            if s < k {
                x.slot(s) * crate::linalg::c((1.0 - betas[s]).powf(1.0 / params.p))
            } else {
                x.slot(s - k).transpose() * crate::linalg::c(betas[s - k].powf(1.0 / params.p))
            }
        })
    })
}

/// Runs the Example: isometry, `S¹`-boundedness by `1+ε`, and absence of any
/// nonzero central corner on which `J` is multiplicative or anti-multiplicative.
pub fn run_example(params: &ExampleParams) -> Result<SuiteReport> {
    params.validate()?;
    let pe = exponent(params.p)?;
    let mut rep = SuiteReport::new("example", params.seed);
    rep.param("p", params.p);
    rep.param("epsilon", params.epsilon);
    rep.param("n_max", params.n_max);
    rep.param("m_max", params.m_max);
    rep.param("restarts", params.restarts);
    rep.data.push(("beta".into(), params.betas()));
    let t = example_map(params)?;
    let source = t.source().clone();

    let mut rng = random::rng(params.seed);
    let mut worst: f64 = 0.0;
    let mut worst_x = None;
    for _ in 0..20 {
        let x = random::element(&mut rng, &source);
        let nx = lp_norm(&x, pe);
        let d = (lp_norm(&t.apply(&x), pe) - nx).abs() / nx;
        if d >= worst {
            worst = d;
            worst_x = Some(x);
        }
    }
    rep.check("random elements", "isometry deviation", worst, 1e-9, Relation::AtMost, || {
        Witness::Element(worst_x.clone().expect("sampled"))
    });

    let bound = 1.0 + params.epsilon;
    let eo = EstimateOptions { m_max: params.m_max, restarts: params.restarts, seed: params.seed, max_iter: 200 };
    let s1 = valued::s1_bounded_norm_estimate(&t, pe, &eo);
    rep.data.push(("S1 lower estimate".into(), vec![s1.lower]));
    let wit = s1.witness.clone();
    rep.check(format!("m <= {}", params.m_max), "S1 lower estimate <= 1+eps", s1.lower, bound * (1.0 + BRACKET_MARGIN), Relation::AtMost, || {
        wit.map_or(Witness::Text("no witness".into()), Witness::Amplified)
    });

    let y = separating::extract_yeadon(&t);
    let y = match y {
        Ok(y) => y,
        Err(e) => {
            rep.check("T", &format!("Yeadon factorization ({e})"), 1.0, 0.0, Relation::AtMost, || Witness::Map(t.clone()));
            return Ok(rep);
        }
    };
    let blocks = source.slot_count();
    for mask in 1u32..(1u32 << blocks) {
        let slots: Vec<usize> = (0..blocks).filter(|b| mask & (1 << b) != 0).collect();
        let (mult, anti, pair) = corner_defects(&y.j, &slots);
        let label = format!("corner {:?}", slots.iter().map(|s| s + 2).collect::<Vec<_>>());
        rep.check(label, "J neither multiplicative nor anti-multiplicative", mult.min(anti), 1e-6, Relation::AtLeast, || {
            Witness::Pair(pair.0.clone(), pair.1.clone())
        });
    }
    Ok(rep)
}

/// Largest multiplicative and anti-multiplicative defects of `x ↦ J(zx)` over
/// matrix-unit pairs in the given slots, with the pair `e_12, e_21` of the first slot.
fn corner_defects(j: &LinearMap, slots: &[usize]) -> (f64, f64, (Element, Element)) {
    let source = j.source().clone();
    let mut mult: f64 = 0.0;
    let mut anti: f64 = 0.0;
    let mut units = Vec::new();
    for &s in slots {
        let n = source.slots()[s].size;
        for a in 0..n {
            for b in 0..n {
                units.push(Element::matrix_unit(&source, s, a, b));
            }
        }
    }
    let imgs: Vec<Element> = units.iter().map(|u| j.apply(u)).collect();
    for (k, x) in units.iter().enumerate() {
        for (l, y) in units.iter().enumerate() {
            let jxy = j.apply(&(x * y));
            mult = mult.max((&jxy - &(&imgs[k] * &imgs[l])).max_abs());
            anti = anti.max((&jxy - &(&imgs[l] * &imgs[k])).max_abs());
        }
    }
    let s0 = slots[0];
    let pair = (Element::matrix_unit(&source, s0, 0, 1), Element::matrix_unit(&source, s0, 1, 0));
    (mult, anti, pair)
}
