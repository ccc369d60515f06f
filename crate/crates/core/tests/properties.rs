use cmpgeom::embedding::Embedding;
use cmpgeom::ghlab::{gh_exact_small, gh_lower, perturb_metric, NetGraph};
use cmpgeom::modelspace::{
    involution_a, model_distance, reflect_r, sample_points, ModelKind, ModelParams, ModelPoint, SampleMode, Sheet,
    SolverOpts,
};
use cmpgeom::pursemap::{classify_region, image_radius, psi_purse, RegionClass};
use cmpgeom::spaceform::{ball_volume, comparison_angle, distance, exp_map, log_map, Curvature, SpaceFormPoint};
use cmpgeom::strainer::{find_strainer, is_strained, FiniteMetricSpace, StrainerSpec};
use cmpgeom::volcomp::BallSampler;
use proptest::prelude::*;

fn curvature() -> impl Strategy<Value = Curvature> {
    prop_oneof![Just(Curvature::Negative), Just(Curvature::Zero), Just(Curvature::Positive)]
}

fn kind() -> impl Strategy<Value = ModelKind> {
    prop_oneof![
        Just(ModelKind::Disk),
        Just(ModelKind::DoubleDisk),
        Just(ModelKind::Crosscap),
        Just(ModelKind::Purse)
    ]
}

fn form_point(k: Curvature, raw: &[f64]) -> SpaceFormPoint {
    let v = &raw[..2];
    match k {
        Curvature::Zero => SpaceFormPoint::new(k, vec![1.0, v[0], v[1]]).unwrap(),
        Curvature::Positive => {
            let mut c = raw.to_vec();
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
            c.iter_mut().for_each(|x| *x /= norm);
            SpaceFormPoint::new(k, c).unwrap()
        }
        Curvature::Negative => {
            let s = v.iter().map(|x| x * x).sum::<f64>();
            let mut c = vec![(1.0 + s).sqrt()];
            c.extend_from_slice(v);
            SpaceFormPoint::new(k, c).unwrap()
        }
    }
}

fn model_triple(k: Curvature, kind: ModelKind, seed: u64) -> Vec<ModelPoint> {
    let params = ModelParams::new(2, k, 1.0).unwrap();
    sample_points(params, kind, 3, SampleMode::Uniform, seed)
}

/// Image of a double-disk point in a quotient: the `-` sheet folds onto the
/// `+` sheet through `-u` (crosscap) or `R(u)` (purse).
fn project(x: &ModelPoint, kind: ModelKind) -> ModelPoint {
    let mut u = x.u().to_vec();
    if x.sheet() == Sheet::Minus {
        match kind {
            ModelKind::Purse => *u.last_mut().unwrap() *= -1.0,
            _ => u.iter_mut().for_each(|c| *c = -*c),
        }
    }
    ModelPoint::new(x.params(), kind, x.t(), u, Sheet::Plus).unwrap()
}

fn random_space(n: usize, seed: u64) -> FiniteMetricSpace {
    use rand::Rng;
    let mut rng = cmpgeom::modelspace::rng_for(seed, 0);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    FiniteMetricSpace::from_fn(n, Curvature::Zero, |i, j| {
        ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn space_form_distance_is_a_metric(
        k in curvature(),
        a in prop::collection::vec(-1.5f64..1.5, 3),
        b in prop::collection::vec(-1.5f64..1.5, 3),
        c in prop::collection::vec(-1.5f64..1.5, 3),
    ) {
        let (x, y, z) = (form_point(k, &a), form_point(k, &b), form_point(k, &c));
        let (xy, yx) = (distance(&x, &y).unwrap(), distance(&y, &x).unwrap());
        prop_assert!((xy - yx).abs() <= 1e-10);
        let (xz, zy) = (distance(&x, &z).unwrap(), distance(&z, &y).unwrap());
        prop_assert!(xy <= xz + zy + 1e-10);
    }

    #[test]
    fn exp_inverts_log(
        k in curvature(),
        a in prop::collection::vec(-1.0f64..1.0, 3),
        b in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let (x, y) = (form_point(k, &a), form_point(k, &b));
        let d = distance(&x, &y).unwrap();
        prop_assume!(d > 1e-6 && (k != Curvature::Positive || d < std::f64::consts::PI - 1e-3));
        let v = log_map(&x, &y).unwrap();
        let back = exp_map(&x, &v, d).unwrap();
        prop_assert!(distance(&back, &y).unwrap() <= 1e-9);
    }

    #[test]
    fn comparison_angle_monotone_in_opposite_side(
        k in curvature(),
        a in 0.05f64..0.7,
        b in 0.05f64..0.7,
        s in 0.0f64..1.0,
        t in 0.0f64..1.0,
    ) {
        let lo = (a - b).abs();
        let hi = a + b;
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let c1 = comparison_angle(k, a, b, lo + s * (hi - lo)).unwrap();
        let c2 = comparison_angle(k, a, b, lo + t * (hi - lo)).unwrap();
        prop_assert!(c1 <= c2 + 1e-12);
        let flat = comparison_angle(k, a, b, a + b).unwrap();
        prop_assert!((flat - std::f64::consts::PI).abs() <= 1e-9);
    }

    #[test]
    fn ball_volume_increases(k in curvature(), n in 2usize..5, r in 0.01f64..1.4, dr in 1e-3f64..0.1) {
        prop_assert!(ball_volume(n, k, r).unwrap() < ball_volume(n, k, r + dr).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_distance_is_a_metric(k in curvature(), kind in kind(), seed in any::<u64>()) {
        let opts = SolverOpts::default();
        let p = model_triple(k, kind, seed);
        let d = |i: usize, j: usize| model_distance(&p[i], &p[j], &opts).unwrap();
        prop_assert!((d(0, 1) - d(1, 0)).abs() <= 1e-7);
        prop_assert!(d(0, 1) <= d(0, 2) + d(2, 1) + 1e-7);
    }

    #[test]
    fn quotient_distance_is_bounded_by_lifts(k in curvature(), seed in any::<u64>()) {
        let opts = SolverOpts::default();
        let p = model_triple(k, ModelKind::DoubleDisk, seed);
        let lift = model_distance(&p[0], &p[1], &opts).unwrap();
        for quotient in [ModelKind::Crosscap, ModelKind::Purse] {
            let x = project(&p[0], quotient);
            let y = project(&p[1], quotient);
            prop_assert!(model_distance(&x, &y, &opts).unwrap() <= lift + 1e-7);
        }
    }

    #[test]
    fn involution_and_reflection_are_isometries(k in curvature(), seed in any::<u64>()) {
        let opts = SolverOpts::default();
        let p = model_triple(k, ModelKind::DoubleDisk, seed);
        let d = model_distance(&p[0], &p[1], &opts).unwrap();
        let (ax, ay) = (involution_a(&p[0]).unwrap(), involution_a(&p[1]).unwrap());
        prop_assert!((model_distance(&ax, &ay, &opts).unwrap() - d).abs() <= 1e-7);
        let back = involution_a(&ax).unwrap();
        prop_assert!(model_distance(&back, &p[0], &opts).unwrap() <= 1e-9);

        let q = model_triple(k, ModelKind::Purse, seed);
        let dq = model_distance(&q[0], &q[1], &opts).unwrap();
        let (rx, ry) = (reflect_r(&q[0]), reflect_r(&q[1]));
        prop_assert!((model_distance(&rx, &ry, &opts).unwrap() - dq).abs() <= 1e-7);
    }

    #[test]
    fn phi_is_odd_under_the_involution(k in curvature(), seed in any::<u64>()) {
        let params = ModelParams::new(2, k, 1.0).unwrap();
        let emb = Embedding::new(params, ModelKind::DoubleDisk).unwrap();
        let x = &sample_points(params, ModelKind::DoubleDisk, 1, SampleMode::Uniform, seed)[0];
        let a = emb.phi(x).unwrap();
        let b = emb.phi(&involution_a(x).unwrap()).unwrap();
        let worst = a.iter().zip(&b).map(|(p, q)| (p + q).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-9);
    }

    #[test]
    fn purse_image_and_regions(k in curvature(), seed in any::<u64>(), eps in 0.01f64..0.5) {
        let params = ModelParams::new(2, k, 1.0).unwrap();
        let radius = image_radius(params);
        for x in sample_points(params, ModelKind::Purse, 20, SampleMode::Uniform, seed) {
            let psi = psi_purse(&x).unwrap();
            let norm = psi.iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!(norm <= radius + 1e-6);
            let class = classify_region(&x, eps).unwrap();
            if class == RegionClass::Both {
                prop_assert!((norm - (radius - eps)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn strained_is_monotone_in_delta(seed in any::<u64>(), delta in 0.0f64..1.0, extra in 0.0f64..1.0) {
        let s = random_space(8, seed);
        let spec = StrainerSpec { x: 0, pairs: vec![(1, 2), (3, 4)], delta, r: 0.0 };
        if is_strained(&s, &spec).strained {
            let looser = StrainerSpec { delta: delta + extra, ..spec };
            prop_assert!(is_strained(&s, &looser).strained);
        }
    }

    #[test]
    fn found_strainers_pass_the_check(seed in any::<u64>(), delta in 0.05f64..1.0) {
        let s = random_space(12, seed);
        if let Some(spec) = find_strainer(&s, 0, 2, delta, 0.05) {
            prop_assert!(is_strained(&s, &spec).strained);
        }
    }

    #[test]
    fn perturbation_stays_in_band(seed in any::<u64>(), amplitude in 0.0f64..0.2) {
        let s = random_space(7, seed);
        let p = perturb_metric(&s, amplitude, seed).unwrap();
        for i in 0..s.len() {
            for j in 0..s.len() {
                prop_assert!(p.space.d(i, j) <= s.d(i, j) * (1.0 + amplitude) + 1e-12);
            }
        }
        prop_assert!(p.space.triangle_violation().is_none_or(|v| v.3 <= 1e-12));
    }

    #[test]
    fn gh_lower_bounds_exact(seed in any::<u64>(), nx in 1usize..5, ny in 1usize..5) {
        let x = random_space(nx, seed);
        let y = random_space(ny, seed.wrapping_add(1));
        let exact = gh_exact_small(&x, &y).unwrap();
        prop_assert!(gh_lower(&x, &y) <= exact + 1e-12);
        prop_assert_eq!(gh_exact_small(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn mc_volume_monotone_in_radius(k in curvature(), seed in any::<u64>(), a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let params = ModelParams::new(2, k, 1.0).unwrap();
        let centre = ModelPoint::center(params, ModelKind::DoubleDisk, Sheet::Plus).unwrap();
        let sampler = BallSampler::new(&centre, 200, seed).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(sampler.ball(lo).unwrap().value <= sampler.ball(hi).unwrap().value);
        let sum = sampler.ball(lo).unwrap().value + sampler.complement(lo).unwrap().value;
        prop_assert!((sum - sampler.total()).abs() <= 1e-9 * sampler.total());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn net_refinement_never_lengthens(k in curvature(), seed in any::<u64>()) {
        let params = ModelParams::new(2, k, 1.0).unwrap();
        let pts = sample_points(params, ModelKind::DoubleDisk, 4, SampleMode::Uniform, seed);
        let coarse = NetGraph::build(params, ModelKind::DoubleDisk, 1.0 / 20.0, &pts).unwrap();
        let fine = NetGraph::build(params, ModelKind::DoubleDisk, 1.0 / 40.0, &pts).unwrap();
        let opts = SolverOpts::default();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (c, f) = (coarse.query_distance(i, j), fine.query_distance(i, j));
                prop_assert!(f <= c + 1e-9, "fine {f} coarse {c} pair {i} {j}");
                prop_assert!(f >= model_distance(&pts[i], &pts[j], &opts).unwrap() - 1e-9);
            }
        }
    }
}
