//! Acceptance criteria, run sequentially with one PASS/FAIL line each.
//! `harness = false`: this is a plain binary that exits non-zero on failure.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nclp_core::algebra::{AlgebraSpec, Element};
use nclp_core::lp::{lp_norm, AmplifiedElement, Exponent};
use nclp_core::map::LinearMap;
use nclp_core::random;
use nclp_core::separating::{self, Orientation};
use nclp_core::suite::{self, DegreeBranch, ExampleParams};
use nclp_core::valued::{self, EstimateOptions};

fn p(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn transposition(n: usize, e: Exponent) -> LinearMap {
    LinearMap::transposition(&Arc::new(AlgebraSpec::full_matrix(n).unwrap()), e)
}

fn c1_transposition_cb() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    let cases: [(f64, usize, f64, f64); 5] = [
        (1.0, 2, 2.0 - 1e-3, 2.0),
        (1.0, 3, 3.0 - 1e-3, 3.0),
        (2.0, 2, 1.0 - 1e-6, 1.0 + 1e-6),
        (2.0, 3, 1.0 - 1e-6, 1.0 + 1e-6),
        (3.0, 2, 2f64.powf(1.0 / 3.0) - 5e-3, 2f64.powf(1.0 / 3.0)),
    ];
    for (pv, n, lo, hi) in cases {
        let start = Instant::now();
        let est = valued::cb_norm_estimate(&transposition(n, p(pv)), p(pv), &EstimateOptions { m_max: n, ..Default::default() });
        let dt = start.elapsed();
        let good = est.lower >= lo && est.lower <= hi && dt < Duration::from_secs(30);
        ok &= good;
        detail.push(format!("p={pv} n={n}: {:.9} in [{lo:.6}, {hi:.6}] ({:.1?})", est.lower, dt));
    }
    outcome(ok, detail.join("; "))
}

fn c2_s1_transposition() -> Outcome {
    let base = Arc::new(AlgebraSpec::full_matrix(2).unwrap());
    let omega = AmplifiedElement::from_fn(&base, 2, |i, j| Element::matrix_unit(&base, 0, i, j)).unwrap();
    let swap = omega.transpose_outer();
    let (a, _) = valued::s1_norm_upper(&swap, p(1.0), 2, 2000);
    let (b, _) = valued::s1_norm_upper(&omega, p(1.0), 2, 2000);
    let ok = ((a - 4.0) / 4.0).abs() <= 1e-5 && ((b - 2.0) / 2.0).abs() <= 1e-5 && ((a / b - 2.0) / 2.0).abs() <= 1e-5;
    outcome(ok, format!("SWAP {a:.9}, Omega {b:.9}, ratio {:.9}", a / b))
}

fn c3_trace_norm_oracle() -> Outcome {
    let mut rng = random::rng(3);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 120 {
        let spec = Arc::new(random::spec(&mut rng, 3, 3, 2, 14));
        let m = 1 + count % 3;
        if spec.dim() * m * m > 36 {
            continue;
        }
        let x = if count % 4 == 3 { random::low_rank_amplified(&mut rng, &spec, m, 1) } else { random::amplified(&mut rng, &spec, m) };
        let exact = lp_norm(&x.assemble(), p(1.0));
        let (up, _) = valued::s1_norm_upper(&x, p(1.0), 1, 2000);
        worst = worst.max((up - exact).abs() / exact);
        count += 1;
    }
    outcome(worst <= 1e-5, format!("{count} elements, worst relative deviation {worst:.3e}"))
}

fn c4_yeadon_round_trip() -> Outcome {
    let mut rng = random::rng(4);
    let mut worst: f64 = 0.0;
    let mut worst_id: f64 = 0.0;
    for k in 0..200 {
        let pv = [1.0, 2.0, 3.0][k % 3];
        let s = Arc::new(random::spec(&mut rng, 3, 3, 2, 12));
        let o = if k % 2 == 0 { Orientation::Direct } else { Orientation::AntiDirect };
        let y = separating::sample_triple(&mut rng, &s, o, (k / 2) % 2);
        if y.j.target().dim() > 25 {
            continue;
        }
        let t = separating::build_yeadon_map(&y.w, &y.b, &y.j, p(pv)).unwrap();
        let back = match separating::extract_yeadon(&t) {
            Ok(b) => b,
            Err(e) => return outcome(false, format!("triple {k}: extraction failed: {e}")),
        };
        worst = worst.max(separating::triple_distance(&y, &back));
        if k < 20 {
            for _ in 0..20 {
                let z = random::element(&mut rng, &s);
                let m = random::element(&mut rng, &s);
                let scale = 1.0 + t.apply(&z).max_abs() * (1.0 + m.max_abs());
                worst_id = worst_id
                    .max(separating::star_identity_defect(&t, &back, &z) / scale)
                    .max(separating::module_identity_defect(&t, &back, &z, &m, o == Orientation::Direct) / scale);
            }
        }
    }
    outcome(worst <= 1e-8 && worst_id <= 1e-8, format!("triple distance {worst:.3e}, identity defect {worst_id:.3e}"))
}

fn c5_bijective_pipeline() -> Outcome {
    let mut rng = random::rng(5);
    let mut worst_proj: f64 = 0.0;
    let mut worst_j: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut all_separating = true;
    for k in 0..50 {
        let e = p([1.0, 1.5, 2.0, 3.0][k % 4]);
        let direct = Arc::new(random::spec(&mut rng, 2, 3, 2, 10));
        let anti = if k % 5 == 4 {
            None
        } else {
            Some(Arc::new(nclp_core::algebra::make_algebra(&[(2 + k % 2, &[1.0])]).unwrap()))
        };
        let (t, planted) = separating::sample_bijective(&mut rng, &direct, anti.as_ref(), e);
        let d = match separating::decompose_bijective(&t) {
            Ok(d) => d,
            Err(err) => return outcome(false, format!("map {k}: {err}")),
        };
        let src = t.source();
        let planted_alpha = (0..src.slot_count())
            .filter(|s| planted.contains(s))
            .fold(Element::zero(src), |acc, s| &acc + &Element::slot_identity(src, s));
        let planted_beta = &Element::identity(src) - &planted_alpha;
        worst_proj = worst_proj.max((&d.alpha - &planted_alpha).max_abs()).max((&d.beta - &planted_beta).max_abs());
        if d.alpha_slots != planted {
            return outcome(false, format!("map {k}: alpha slots {:?}, planted {:?}", d.alpha_slots, planted));
        }
        let inv = match separating::inverse_analysis(&t, 10, k as u64) {
            Ok(a) => a,
            Err(err) => return outcome(false, format!("map {k}: inverse analysis failed: {err}")),
        };
        all_separating &= inv.separating;
        worst_j = worst_j.max(inv.j_defect);
        worst_rel = worst_rel.max(inv.split_relation_defect.unwrap_or(f64::INFINITY));
    }
    outcome(
        worst_proj <= 1e-8 && all_separating && worst_j <= 1e-8,
        format!(
            "projection distance {worst_proj:.3e}, inverse separating {all_separating}, J' = J^-1 defect {worst_j:.3e} \
             (J' = w'* J^-1 w' on anti-direct summands: {worst_rel:.3e})"
        ),
    )
}

fn c6_subhomogeneous() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 1..=3 {
        for pv in [1.0, 1.5, 2.0, 3.0] {
            let r = suite::suite_subhomogeneous_bounds(n, pv, 50, 6).unwrap();
            if !r.passed() {
                ok = false;
                for f in r.failures() {
                    detail.push(format!("N={n} p={pv} {}: {} {} {}", f.check, f.measured, f.relation.symbol(), f.bound));
                }
            }
            if pv == 1.0 {
                let sharp = r.checks.iter().find(|c| c.check == "S1 sharpness").unwrap();
                detail.push(format!("N={n} sharpness {:.7}", sharp.measured));
            }
        }
    }
    outcome(ok, detail.join("; "))
}

fn c7_example() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for pv in [1.5, 2.0, 3.0] {
        for eps in [0.25, 0.5] {
            let r = suite::run_example(&ExampleParams::new(pv, eps, 4, 2)).unwrap();
            ok &= r.passed();
            let est = r.data.iter().find(|d| d.0 == "S1 lower estimate").unwrap().1[0];
            let corners = r.checks.iter().filter(|c| c.check.starts_with("J neither")).count();
            detail.push(format!("p={pv} eps={eps}: S1 {est:.5} / {:.5}, corners {corners}{}", 1.0 + eps, if r.passed() { "" } else { " FAILED" }));
        }
    }
    outcome(ok, detail.join("; "))
}

fn c8_degree_detection() -> Outcome {
    let a = suite::suite_degree_detection(2.0, 1.0, DegreeBranch::Cb).unwrap();
    let b = suite::suite_degree_detection(2.5, 1.0, DegreeBranch::S1).unwrap();
    outcome(a == 2 && b == 2, format!("cb(K=2, p=1) = {a}, S1(K=2.5) = {b}"))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 8] = [
        ("1 transposition cb constants", 5 * 30, c1_transposition_cb),
        ("2 S1 transposition constant at p=1", 10, c2_s1_transposition),
        ("3 p=1 trace-norm oracle", 120, c3_trace_norm_oracle),
        ("4 Yeadon round trip", 60, c4_yeadon_round_trip),
        ("5 bijective decomposition pipeline", 60, c5_bijective_pipeline),
        ("6 subhomogeneous transposition bounds", 120, c6_subhomogeneous),
        ("7 Example reproduction", 180, c7_example),
        ("8 degree detection", 1, c8_degree_detection),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let dt = start.elapsed();
        let in_time = dt <= Duration::from_secs(budget);
        let ok = o.ok && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.2?}{}]",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            dt,
            if in_time { String::new() } else { format!(" exceeds {budget} s") }
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
