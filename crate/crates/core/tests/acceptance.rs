//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criterion 7 is a known failure, analysed in the project notes: the
//! coordinate functions kink across the gluing sphere, so pairs straddling
//! it carry a derivative jump larger than half the immersion constant. It is
//! reported as FAIL but does not fail the process; any other failure does,
//! as does an unexpected pass of criterion 7 (so the note gets revisited).

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use cmpgeom::config::{ExperimentConfig, Resolved};
use cmpgeom::embedding::{equicontinuity_scan, gradient, immersion_scan, injectivity_scan, Embedding, ScanConfig};
use cmpgeom::experiments::{self, strain_setup};
use cmpgeom::modelspace::{
    involution_a, rng_for, sample_points, ModelKind, ModelParams, ModelPoint, SampleMode, Sheet,
};
use cmpgeom::spaceform::{
    comparison_angle, distance, exp_map, log_map, Curvature, SpaceFormPoint, TangentVector,
};
use cmpgeom::strainer::{is_strained, StrainerSpec};
use cmpgeom::volcomp::{radius_estimate, swiss_cheese_kappa};
use rand::Rng;

const KNOWN_FAILURES: &[usize] = &[7];
const PINNED_MIN_SEPARATION: f64 = 0.10006279681264417;
const PINNED_LAMBDA: f64 = 0.6288762313455543;
const PINNED_CHART_DISTORTION: f64 = 0.04285065467670157;

type Outcome = (bool, String);

fn resolved(toml: &str) -> Resolved {
    ExperimentConfig::from_toml(toml).expect("config parses").resolve().expect("config resolves")
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn random_space_form_point(k: Curvature, n: usize, rng: &mut impl Rng) -> SpaceFormPoint {
    let pole = SpaceFormPoint::pole(k, n, 1.0);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
    let mut comps = vec![0.0];
    comps.extend(v);
    let reach = if k == Curvature::Positive { PI * 0.999 } else { 2.0 };
    let t = reach * rng.random::<f64>();
    exp_map(&pole, &TangentVector::new(pole.clone(), comps).unwrap(), t).unwrap()
}

fn c1_space_forms() -> Outcome {
    let mut rng = rng_for(2024, 1);
    let (mut round_trip, mut triangle) = (0.0f64, 0.0f64);
    for k in Curvature::ALL {
        for _ in 0..10_000 {
            let x = random_space_form_point(k, 3, &mut rng);
            let y = random_space_form_point(k, 3, &mut rng);
            let d = distance(&x, &y).unwrap();
            if d < 1e-6 || (k == Curvature::Positive && d > PI - 1e-3) {
                continue;
            }
            let back = exp_map(&x, &log_map(&x, &y).unwrap(), d).unwrap();
            let err = back.coords().iter().zip(y.coords()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            round_trip = round_trip.max(err / y.coords()[0].abs().max(1.0));
        }
        for _ in 0..100_000 {
            let p: Vec<_> = (0..3).map(|_| random_space_form_point(k, 3, &mut rng)).collect();
            let (a, b, c) = (distance(&p[0], &p[1]).unwrap(), distance(&p[1], &p[2]).unwrap(), distance(&p[0], &p[2]).unwrap());
            triangle = triangle.max(c - a - b).max((a - distance(&p[1], &p[0]).unwrap()).abs());
        }
    }
    let e = |v: Vec<f64>| SpaceFormPoint::new(Curvature::Positive, v).unwrap();
    let pos = distance(&e(vec![1.0, 0.0, 0.0]), &e(vec![0.0, 1.0, 0.0])).unwrap();
    let flat = |v: Vec<f64>| SpaceFormPoint::new(Curvature::Zero, v).unwrap();
    let zero = distance(&flat(vec![1.0, 0.0, 0.0]), &flat(vec![1.0, 3.0, 4.0])).unwrap();
    let hyp = |v: Vec<f64>| SpaceFormPoint::new(Curvature::Negative, v).unwrap();
    let neg = distance(&hyp(vec![1.0, 0.0, 0.0]), &hyp(vec![1f64.cosh(), 1f64.sinh(), 0.0])).unwrap();
    let closed = (pos - PI / 2.0).abs().max((zero - 5.0).abs()).max((neg - 1.0).abs());
    let mut hinge = 0.0f64;
    for k in Curvature::ALL {
        for (a, b) in [(0.3, 0.5), (1.0, 1.2), (0.01, 0.7)] {
            hinge = hinge.max((comparison_angle(k, a, b, a + b).unwrap() - PI).abs());
        }
    }
    let ok = round_trip <= 1e-9 && triangle <= 1e-10 && closed <= 1e-12 && hinge <= 1e-9;
    (ok, format!("round trip {round_trip:.2e}, triangle excess {triangle:.2e}, closed forms {closed:.2e}, flat hinge {hinge:.2e}"))
}

fn c2_coordinate_identity() -> Outcome {
    let mut worst = 0.0f64;
    for k in Curvature::ALL {
        let p = ModelParams::new(3, k, 1.0).unwrap();
        let emb = Embedding::new(p, ModelKind::DoubleDisk).unwrap();
        for x in sample_points(p, ModelKind::DoubleDisk, 1000, SampleMode::Uniform, 3) {
            let x = ModelPoint::new(p, ModelKind::DoubleDisk, x.t(), x.u().to_vec(), Sheet::Plus).unwrap();
            let amb = x.ambient();
            for i in 1..=3 {
                worst = worst.max((emb.f_index(i, &x).unwrap() - amb.coords()[i]).abs());
            }
        }
    }
    (worst <= 1e-9, format!("max |f_i(x) - x_i| = {worst:.3e}"))
}

fn c3_equivariance() -> Outcome {
    let mut worst = 0.0f64;
    for k in Curvature::ALL {
        let p = ModelParams::new(2, k, 1.0).unwrap();
        let emb = Embedding::new(p, ModelKind::DoubleDisk).unwrap();
        for x in sample_points(p, ModelKind::DoubleDisk, 1000, SampleMode::Uniform, 4) {
            let (a, b) = (emb.phi(&x).unwrap(), emb.phi(&involution_a(&x).unwrap()).unwrap());
            worst = worst.max(a.iter().zip(&b).map(|(s, t)| (s + t).abs()).fold(0.0, f64::max));
        }
    }
    (worst <= 1e-9, format!("max |Φ(Ax) + Φ(x)|∞ = {worst:.3e}"))
}

fn c4_gradient_bound() -> Outcome {
    let mut worst = (0.0f64, String::new());
    for k in Curvature::ALL {
        let p = ModelParams::new(2, k, 1.0).unwrap();
        let emb = Embedding::new(p, ModelKind::DoubleDisk).unwrap();
        let cfg = ScanConfig::defaults(p);
        let fields = emb.fields(&cfg).unwrap();
        for x in sample_points(p, ModelKind::DoubleDisk, 1000, SampleMode::Uniform, 5) {
            for f in &fields {
                let g = gradient(|y| f.eval(y), &x, cfg.fd_step).unwrap();
                let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm > worst.0 {
                    worst = (norm, format!("k={k}, index {}", f.index()));
                }
            }
        }
    }
    (worst.0 <= 2.0 + 1e-3, format!("max |∇f_(i,d)| = {:.6} ({})", worst.0, worst.1))
}

fn baseline() -> (Embedding, ScanConfig) {
    let p = ModelParams::new(2, Curvature::Positive, 1.0).unwrap();
    (Embedding::new(p, ModelKind::DoubleDisk).unwrap(), ScanConfig::defaults(p))
}

fn c5_injectivity() -> Outcome {
    let (emb, cfg) = baseline();
    let rep = injectivity_scan(&emb, &ScanConfig { mc_samples: 0, nu: 0.1, ..cfg }, 10_000).unwrap();
    let v = rep.scalar("min_separation").unwrap();
    let ok = v > 0.0 && close(v, PINNED_MIN_SEPARATION, 1e-12);
    (ok, format!("min |Φ(x)-Φ(y)| = {v} (pinned {PINNED_MIN_SEPARATION})"))
}

fn c6_c7_immersion_equicontinuity() -> (Outcome, Outcome) {
    let (emb, cfg) = baseline();
    let rep = immersion_scan(&emb, &cfg, 1000, 16).unwrap();
    let lambda = rep.scalar("lambda_est").unwrap();
    let pole = rep.scalar("pole_exclusion_min").unwrap();
    let ok6 = rep.passed() && close(lambda, PINNED_LAMBDA, 1e-12);
    let six = (ok6, format!("λ_est = {lambda} (pinned {PINNED_LAMBDA}), pole exclusion min {pole:.4}"));
    let eq = equicontinuity_scan(&emb, &ScanConfig { rho: emb.params().r() / 100.0, ..cfg }, 400, lambda).unwrap();
    let worst = eq.scalar("max_defect").unwrap();
    let interior = eq.scalar("max_defect_interior").unwrap();
    let seven = (
        eq.passed(),
        format!("max defect {worst:.4} vs λ/2 = {:.4}; away from the gluing locus {interior:.4}", lambda / 2.0),
    );
    (six, seven)
}

fn run_experiment(toml: &str) -> cmpgeom::report::ScanReport {
    experiments::run(&resolved(toml)).expect("experiment runs")
}

fn c8_metric_oracle() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for k in [-1, 0, 1] {
        let rep = run_experiment(&format!("experiment = \"dist-oracle\"\n[model]\nn = 2\nk = {k}\nr = 1.0\n"));
        ok &= rep.passed();
        parts.push(format!(
            "k={k}: rel {:.4}, C {:.2}, closed {:.1e}",
            rep.scalar("max_relative_error").unwrap(),
            rep.scalar("empirical_c").unwrap(),
            rep.scalar("closed_form_error").unwrap()
        ));
    }
    (ok, parts.join("; "))
}

fn c9_strainers() -> Outcome {
    let rep = run_experiment("experiment = \"strain\"\n[model]\nn = 2\nk = 0\n");
    let chart = rep.scalar("chart_distortion").unwrap_or(f64::INFINITY);
    let sphere = rep.scalar("sphere_map_distortion").unwrap();
    let cfg = resolved("[model]\nn = 2\nk = 0\n");
    let setup = strain_setup(&cfg).unwrap();
    let mut rng = rng_for(9, 9);
    let size = setup.space.len();
    let (mut violations, mut strained) = (0, 0);
    for _ in 0..1000 {
        let x = rng.random_range(0..size);
        let pairs = (0..2).map(|_| (rng.random_range(0..size), rng.random_range(0..size))).collect();
        let spec = StrainerSpec { x, pairs, delta: rng.random_range(0.0..PI), r: rng.random_range(0.0..0.3) };
        let wider = StrainerSpec { delta: spec.delta + rng.random_range(0.0..1.0), ..spec.clone() };
        if is_strained(&setup.space, &spec).strained {
            strained += 1;
            if !is_strained(&setup.space, &wider).strained {
                violations += 1;
            }
        }
    }
    let ok = rep.passed() && close(chart, PINNED_CHART_DISTORTION, 1e-9) && violations == 0;
    (ok, format!("sphere map {sphere:.1e}, chart distortion {chart:.4} (pinned {PINNED_CHART_DISTORTION:.4}), δ-monotonicity violations {violations} ({strained} of 1000 specs strained)"))
}

fn c10_volumes() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let flat = swiss_cheese_kappa(2, Curvature::Zero, 0.37).unwrap();
    ok &= (flat - 0.75).abs() <= 1e-12;
    for k in [-1, 0, 1] {
        let rep = run_experiment(&format!("experiment = \"volcomp\"\n[model]\nn = 2\nk = {k}\n"));
        ok &= rep.passed();
        parts.push(format!(
            "k={k}: |z| ≤ {:.2}, κ ≤ {:.4}",
            rep.scalar("max_abs_z").unwrap(),
            rep.scalar("kappa_max").unwrap()
        ));
    }
    (ok, format!("κ flat = {flat}; {}", parts.join("; ")))
}

fn c11_purse() -> Outcome {
    let rep = run_experiment("experiment = \"fiber\"\n[model]\nn = 3\nk = 0\nr = 1.0\n");
    let detail = format!(
        "{} fibers, max components {}, length error {:.4}, max |Ψ| {:.6}, λ E0 {:.4}, λ E1 {:.4}",
        rep.scalar("targets").unwrap(),
        rep.scalar("max_components").unwrap(),
        rep.scalar("max_length_error").unwrap(),
        rep.scalar("max_psi_norm").unwrap(),
        rep.scalar("submersion-E0.lambda_est").unwrap(),
        rep.scalar("submersion-E1.lambda_est").unwrap()
    );
    (rep.passed() && rep.scalar("targets") == Some(25.0), detail)
}

fn c12_gh() -> Outcome {
    let rep = run_experiment("experiment = \"gh\"\n[model]\nn = 2\nk = 0\n");
    let ratio = rep.scalar("angle_slack_change_per_amplitude@1.0000000000000000e-2").unwrap_or(f64::NAN);
    let ok = rep.passed() && ratio.is_finite() && rep.scalar("max_lower_minus_exact").unwrap() <= 0.0;
    (ok, format!("margin change per unit amplitude at 1%: {ratio:.4}; lower-exact gap {:.2e}", rep.scalar("max_lower_minus_exact").unwrap()))
}

fn c13_crosscap_radius() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in Curvature::ALL {
        let p = ModelParams::new(2, k, 1.0).unwrap();
        let e = radius_estimate(p, ModelKind::Crosscap, 400, 0).unwrap();
        ok &= e.lower <= 1.0 && 1.0 <= e.upper;
        parts.push(format!("k={k}: {:.4} ± {:.4}", e.value, e.resolution));
    }
    (ok, parts.join("; "))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut timed = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let out = f();
        results.push((id, name, out, t.elapsed().as_secs_f64()));
    };
    timed(1, "space-form suite", &c1_space_forms);
    timed(2, "coordinate identity", &c2_coordinate_identity);
    timed(3, "equivariance", &c3_equivariance);
    timed(4, "gradient bound", &c4_gradient_bound);
    timed(5, "injectivity scan", &c5_injectivity);
    let t = Instant::now();
    let (six, seven) = c6_c7_immersion_equicontinuity();
    let both = t.elapsed().as_secs_f64();
    results.push((6, "immersion scan", six, both));
    results.push((7, "equicontinuity", seven, both));
    let mut timed = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let out = f();
        results.push((id, name, out, t.elapsed().as_secs_f64()));
    };
    timed(8, "model metric vs oracle", &c8_metric_oracle);
    timed(9, "strainer suite", &c9_strainers);
    timed(10, "volume suite", &c10_volumes);
    timed(11, "purse suite", &c11_purse);
    timed(12, "GH suite", &c12_gh);
    timed(13, "crosscap radius", &c13_crosscap_radius);

    let mut unexpected = 0;
    for (id, name, (passed, detail), secs) in &results {
        let known = KNOWN_FAILURES.contains(id);
        let tag = if *passed { "PASS" } else { "FAIL" };
        let note = if known { if *passed { " [known failure now passes]" } else { " [known failure]" } } else { "" };
        println!("{tag} criterion {id:>2} {name}: {detail} ({secs:.1} s){note}");
        if *passed == known {
            unexpected += 1;
        }
    }
    let passed = results.iter().filter(|r| r.2 .0).count();
    println!("{passed}/{} criteria pass; {unexpected} unexpected outcome(s)", results.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
