//! Named experiments behind a common trait, selected by name at run time.

use std::time::Instant;

use rand::Rng;

use crate::config::Resolved;
use crate::embedding::{equicontinuity_scan, immersion_scan, injectivity_scan, Embedding, ScanConfig};
use crate::error::{domain, Result};
use crate::ghlab::{gh_exact_small, gh_lower, graph_oracle, perturb_metric};
use crate::modelspace::{
    combine, geodesic_step, grid_directions, involution_a, model_distance, rng_for, sample_points, tangent_basis,
    ModelKind, ModelParams, ModelPoint, SampleMode, Sheet, SolverOpts,
};
use crate::pursemap::{fiber_length, image_radius, submersion_scan, PsiGrid, PurseMap, PurseRegion, PurseRegionSpec};
use crate::report::{fmt_f64, ScanReport, Table};
use crate::spaceform::{ball_volume, Curvature};
use crate::strainer::{
    bgp_chart, find_strainer, is_strained, sphere_map_psi, FiniteMetricSpace, GlobalStrainerSpec, StrainerSpec,
};
use crate::volcomp::{bg_ratio_check, radius_estimate, swiss_cheese_kappa, BallSampler};

pub trait Experiment: Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, cfg: &Resolved) -> Result<ScanReport>;
}

static REGISTRY: [&dyn Experiment; 6] = [&EmbedScan, &Strain, &Fiber, &Volcomp, &Gh, &DistOracle];

/// All experiments, in a fixed order.
pub fn registry() -> &'static [&'static dyn Experiment] {
    &REGISTRY
}

pub fn find(name: &str) -> Option<&'static dyn Experiment> {
    REGISTRY.iter().copied().find(|e| e.name() == name)
}

pub fn list_experiments() -> String {
    REGISTRY.iter().map(|e| format!("{:<12} {}\n", e.name(), e.description())).collect()
}

/// Runs the configured experiment and stamps the wall time.
pub fn run(cfg: &Resolved) -> Result<ScanReport> {
    let name = &cfg.config.experiment;
    let Some(exp) = find(name) else {
        return Err(crate::GeomError::Parse(format!("unknown experiment '{name}'")));
    };
    let start = Instant::now();
    let mut rep = exp.run(cfg)?;
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

fn new_report(cfg: &Resolved, name: &str) -> ScanReport {
    let mut rep = ScanReport::new(name, cfg.config.seed);
    rep.echo("n", cfg.params.n());
    rep.echo("k", cfg.params.k());
    rep.echo("r", fmt_f64(cfg.params.r()));
    rep.echo("kind", cfg.kind);
    rep
}

struct EmbedScan;

impl Experiment for EmbedScan {
    fn name(&self) -> &'static str {
        "embed-scan"
    }

    fn description(&self) -> &'static str {
        "injectivity and immersion scans of the distance-function embedding (optionally equicontinuity)"
    }

    fn run(&self, cfg: &Resolved) -> Result<ScanReport> {
        let o = &cfg.config.embed_scan;
        let emb = Embedding::new(cfg.params, cfg.kind)?;
        let mut rep = new_report(cfg, self.name());
        let inj_cfg = if o.injectivity_smoothed { cfg.scan } else { ScanConfig { mc_samples: 0, ..cfg.scan } };
        rep.absorb("injectivity", injectivity_scan(&emb, &inj_cfg, o.pairs)?);
        let imm = immersion_scan(&emb, &cfg.scan, o.points, o.dirs_per_point)?;
        let lambda = imm.scalar("lambda_est").unwrap_or(0.0);
        rep.absorb("immersion", imm);
        if o.equicontinuity {
            rep.absorb("equicontinuity", equicontinuity_scan(&emb, &cfg.scan, o.equicontinuity_points, lambda)?);
        }
        Ok(rep)
    }
}

/// A centre, anchors at distance in `[R, 2R]` along a spread of directions,
/// and probes within `ρ`. Index 0 is the centre; anchors follow, then probes.
pub struct StrainSetup {
    pub space: FiniteMetricSpace,
    pub anchors: std::ops::Range<usize>,
    pub probes: std::ops::Range<usize>,
    pub anchor_radius: f64,
    pub spec: Option<StrainerSpec>,
}

pub fn strain_setup(cfg: &Resolved) -> Result<StrainSetup> {
    let o = &cfg.config.strain;
    let (params, r) = (cfg.params, cfg.params.r());
    let big = o.anchor_radius.unwrap_or(r / 4.0);
    let small = o.probe_radius.unwrap_or(r / 40.0);
    if !(big > 0.0 && small > 0.0 && 2.0 * big < r) {
        return domain("need 0 < probe radius and 0 < anchor radius < r/2");
    }
    let x = ModelPoint::center(params, cfg.kind, Sheet::Plus)?;
    let basis = tangent_basis(&x);
    let mut rng = rng_for(cfg.config.seed, 31);
    let mut pts = vec![x.clone()];
    for dir in grid_directions(params.n(), o.anchors) {
        let s = big * (1.0 + rng.random::<f64>());
        pts.push(geodesic_step(&x, &combine(&basis, &dir), s)?);
    }
    let n_anchor = pts.len() - 1;
    for _ in 0..o.probes {
        let v = crate::modelspace::random_tangent(&x, &mut rng);
        pts.push(geodesic_step(&x, &v, small * rng.random::<f64>())?);
    }
    let space = FiniteMetricSpace::from_points(&pts, &SolverOpts::default(), params.k())?;
    let spec = find_strainer(&space, 0, params.n(), o.delta, big * (1.0 - 1e-6));
    Ok(StrainSetup { space, anchors: 1..1 + n_anchor, probes: 1 + n_anchor..pts.len(), anchor_radius: big, spec })
}

/// Round `S^{m-1}` sampled with `±e_i` first; distances are great-circle angles.
pub fn round_sphere(m: usize, count: usize) -> Result<FiniteMetricSpace> {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; m];
            e[i] = s;
            pts.push(e);
        }
    }
    for d in grid_directions(m, count) {
        if pts.iter().all(|p| p.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() < 1.0 - 1e-9) {
            pts.push(d);
        }
    }
    FiniteMetricSpace::from_fn(pts.len(), Curvature::Positive, |i, j| {
        let (p, q) = (&pts[i], &pts[j]);
        let minus = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let plus = p.iter().zip(q).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
        2.0 * minus.atan2(plus)
    })
}

/// Axis strainer `A_i = {e_i}`, `B_i = {-e_i}` on [`round_sphere`].
pub fn axis_global_strainer(m: usize, delta: f64) -> GlobalStrainerSpec {
    GlobalStrainerSpec {
        a_sets: (0..m).map(|i| vec![2 * i]).collect(),
        b_sets: (0..m).map(|i| vec![2 * i + 1]).collect(),
        delta,
    }
}

struct Strain;

impl Experiment for Strain {
    fn name(&self) -> &'static str {
        "strain"
    }

    fn description(&self) -> &'static str {
        "strainer search and distance-chart distortion at the model centre; round-sphere map check"
    }

    fn run(&self, cfg: &Resolved) -> Result<ScanReport> {
        let o = &cfg.config.strain;
        let mut rep = new_report(cfg, self.name());
        rep.echo("delta", fmt_f64(o.delta));
        let setup = strain_setup(cfg)?;
        rep.echo("anchor_radius", fmt_f64(setup.anchor_radius));
        rep.set("anchors", setup.anchors.len() as f64);
        match &setup.spec {
            Some(spec) => {
                let margin = is_strained(&setup.space, spec);
                let mut pts: Vec<usize> = setup.probes.clone().collect();
                pts.push(0);
                let distortion = bgp_chart(spec).distortion_estimate(&setup.space, &pts);
                rep.set("angle_slack", margin.angle_slack);
                rep.set("distance_slack", margin.distance_slack);
                rep.set("chart_distortion", distortion);
                let labels = setup.space.labels();
                rep.witness("strainer", spec.pairs.iter().map(|&(a, b)| format!("{} {}", labels[a], labels[b])).collect());
                rep.check("strainer_found", margin.strained, format!("tightest: {}", margin.tightest));
                rep.check(
                    "chart_distortion",
                    distortion <= o.max_distortion,
                    format!("distortion {distortion} vs {}", o.max_distortion),
                );
            }
            None => rep.check("strainer_found", false, format!("no strainer with δ = {}", o.delta)),
        }
        let m = cfg.params.n();
        let sphere = round_sphere(m, o.sphere_points)?;
        let gspec = axis_global_strainer(m, o.delta);
        let map = sphere_map_psi(&sphere, &gspec)?;
        let all: Vec<usize> = (0..sphere.len()).collect();
        let sd = map.distortion(&sphere, &all)?;
        rep.set("sphere_map_distortion", sd);
        rep.check("global_strainer_valid", gspec.is_valid(&sphere), "axis strainer on the round sphere");
        rep.check("sphere_map_identity", sd <= 1e-9, format!("distortion {sd}"));
        Ok(rep)
    }
}

struct Fiber;

impl Experiment for Fiber {
    fn name(&self) -> &'static str {
        "fiber"
    }

    fn description(&self) -> &'static str {
        "purse fibers over a target grid (components, length) and submersion scans in both regions"
    }

    fn run(&self, cfg: &Resolved) -> Result<ScanReport> {
        let o = &cfg.config.fiber;
        let params = cfg.params;
        let map = PurseMap::new(params)?;
        let mut rep = new_report(cfg, self.name());
        rep.echo("kind", ModelKind::Purse);
        let big_r = image_radius(params);
        let grid = PsiGrid::new(&map, o.grid_resolution)?;
        let max_norm = grid
            .psi_values()
            .iter()
            .map(|p| p.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        rep.set("max_psi_norm", max_norm);
        rep.set("image_radius", big_r);
        rep.check("psi_in_image_disk", max_norm <= big_r + 1e-6, format!("max |Ψ| = {max_norm}"));

        let m = params.n() - 1;
        let axes = m.min(2);
        let steps = o.targets_per_axis.max(1);
        let coord = |j: usize| {
            if steps == 1 {
                0.0
            } else {
                big_r * o.extent * (2.0 * j as f64 / (steps - 1) as f64 - 1.0)
            }
        };
        let mut table = Table::new("fibers", &["target", "points", "components", "length", "expected", "relative_error"]);
        let (mut worst_err, mut worst_comp, mut min_comp) = (0.0f64, 0usize, usize::MAX);
        for idx in 0..steps.pow(axes as u32) {
            let mut w = vec![0.0; m];
            w[0] = coord(idx % steps);
            if axes == 2 {
                w[1] = coord(idx / steps);
            }
            let f = map.fiber_on_grid(&grid, &w, o.tol * big_r, o.link_radius)?;
            let expected = fiber_length(params, &w)?;
            let err = (f.length / expected - 1.0).abs();
            worst_err = worst_err.max(err);
            worst_comp = worst_comp.max(f.components);
            min_comp = min_comp.min(f.components);
            let label = w.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(" ");
            table.push(vec![
                label,
                f.points.len().to_string(),
                f.components.to_string(),
                fmt_f64(f.length),
                fmt_f64(expected),
                fmt_f64(err),
            ]);
        }
        rep.set("targets", steps.pow(axes as u32) as f64);
        rep.set("max_length_error", worst_err);
        rep.set("max_components", worst_comp as f64);
        rep.check(
            "single_component",
            worst_comp == 1 && min_comp == 1,
            format!("components per fiber in [{min_comp}, {worst_comp}]"),
        );
        rep.check(
            "fiber_length",
            worst_err <= o.length_tolerance,
            format!("worst relative error {worst_err} vs {}", o.length_tolerance),
        );
        rep.tables.push(table);

        let mut regions = vec![PurseRegion::E0];
        if params.n() >= 3 {
            regions.push(PurseRegion::E1);
        }
        for region in regions {
            let spec = PurseRegionSpec::new(params, o.epsilon, region)?;
            let sub = submersion_scan(&map, &cfg.scan, spec, o.submersion_points, o.dirs_per_point)?;
            rep.absorb(&format!("submersion-{region}"), sub);
        }
        Ok(rep)
    }
}

/// Exact `vol B(centre, ρ)` where a closed form exists.
fn centred_ball_volume(params: ModelParams, kind: ModelKind, rho: f64) -> Result<Option<f64>> {
    let (n, k, r) = (params.n(), params.k(), params.r());
    Ok(match kind {
        ModelKind::Disk => Some(ball_volume(n, k, rho.min(r))?),
        ModelKind::DoubleDisk if rho <= r => Some(ball_volume(n, k, rho)?),
        ModelKind::DoubleDisk => {
            let far = if rho < 2.0 * r { ball_volume(n, k, 2.0 * r - rho)? } else { 0.0 };
            Some(2.0 * ball_volume(n, k, r)? - far)
        }
        _ => None,
    })
}

struct Volcomp;

impl Experiment for Volcomp {
    fn name(&self) -> &'static str {
        "volcomp"
    }

    fn description(&self) -> &'static str {
        "Monte Carlo ball volumes, volume-ratio monotonicity, Swiss-cheese constant and radius estimate"
    }

    fn run(&self, cfg: &Resolved) -> Result<ScanReport> {
        let o = &cfg.config.volcomp;
        let (params, r) = (cfg.params, cfg.params.r());
        let mut rep = new_report(cfg, self.name());
        rep.echo("samples", o.samples);
        let centre = ModelPoint::center(params, cfg.kind, Sheet::Plus)?;
        let reach = match cfg.kind {
            ModelKind::DoubleDisk | ModelKind::Purse => 2.0 * r,
            _ => r,
        };
        let grid = o.rho_grid.clone().unwrap_or_else(|| (1..=8).map(|j| reach * j as f64 / 8.0).collect());
        let sampler = BallSampler::new(&centre, o.samples, cfg.config.seed)?;
        let mut table = Table::new("balls", &["rho", "estimate", "SE", "exact", "z"]);
        let mut worst_z = 0.0f64;
        for &rho in &grid {
            let est = sampler.ball(rho)?;
            let Some(exact) = centred_ball_volume(params, cfg.kind, rho)? else { continue };
            let z = if est.standard_error > 0.0 {
                (est.value - exact) / est.standard_error
            } else if (est.value - exact).abs() <= 1e-9 * exact {
                0.0
            } else {
                f64::INFINITY
            };
            worst_z = worst_z.max(z.abs());
            table.push(vec![fmt_f64(rho), fmt_f64(est.value), fmt_f64(est.standard_error), fmt_f64(exact), fmt_f64(z)]);
        }
        if !table.rows.is_empty() {
            rep.set("max_abs_z", worst_z);
            rep.check("mc_matches_closed_form", worst_z <= 3.0, format!("worst |z| = {worst_z}"));
            rep.tables.push(table);
        }
        rep.absorb("bg", bg_ratio_check(&centre, &grid, o.samples, cfg.config.seed)?);

        let (n, k) = (params.n(), params.k());
        let top = r / 2.0;
        let lo = 1e-3f64.min(top);
        let count = o.kappa_points.max(2);
        let mut kappa_max = 0.0f64;
        let mut kappa_table = Table::new("kappa", &["d", "kappa"]);
        for j in 0..count {
            let d = lo * (top / lo).powf(j as f64 / (count - 1) as f64);
            let kappa = swiss_cheese_kappa(n, k, d)?;
            kappa_max = kappa_max.max(kappa);
            kappa_table.push(vec![fmt_f64(d), fmt_f64(kappa)]);
        }
        rep.set("kappa_max", kappa_max);
        rep.check("kappa_below_one", kappa_max < 1.0, format!("max κ = {kappa_max}"));
        rep.tables.push(kappa_table);

        let kind: ModelKind = o.radius_kind.parse()?;
        let est = radius_estimate(params, kind, o.radius_samples, cfg.config.seed)?;
        rep.echo("radius_kind", kind);
        rep.set("radius", est.value);
        rep.set("radius_resolution", est.resolution);
        if matches!(kind, ModelKind::Crosscap | ModelKind::Disk) {
            rep.check(
                "radius_is_r",
                est.lower <= r && r <= est.upper,
                format!("r = {r} vs [{}, {}]", est.lower, est.upper),
            );
        }
        Ok(rep)
    }
}

/// Random planar metric on `size` points of the unit square.
pub fn random_tiny_space(size: usize, rng: &mut impl Rng) -> Result<FiniteMetricSpace> {
    let pts: Vec<[f64; 2]> = (0..size).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    FiniteMetricSpace::from_fn(size, Curvature::Zero, |i, j| {
        ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt()
    })
}

struct Gh;

impl Experiment for Gh {
    fn name(&self) -> &'static str {
        "gh"
    }

    fn description(&self) -> &'static str {
        "exact and lower Gromov-Hausdorff distances on tiny spaces; strainer margins under perturbation"
    }

    fn run(&self, cfg: &Resolved) -> Result<ScanReport> {
        let o = &cfg.config.gh;
        let mut rep = new_report(cfg, self.name());
        let mut rng = rng_for(cfg.config.seed, 41);
        let two = FiniteMetricSpace::from_fn(2, Curvature::Zero, |i, j| if i == j { 0.0 } else { 1.0 })?;
        let one = FiniteMetricSpace::from_fn(1, Curvature::Zero, |_, _| 0.0)?;
        let gh21 = gh_exact_small(&two, &one)?;
        rep.set("gh_two_points_vs_point", gh21);
        rep.check("two_points_vs_point", gh21 == 0.5, format!("{gh21}"));

        let (mut worst_gap, mut worst_self) = (f64::NEG_INFINITY, 0.0f64);
        let max_pts = o.max_points.clamp(1, 6);
        for _ in 0..o.random_pairs {
            let x = random_tiny_space(rng.random_range(1..=max_pts), &mut rng)?;
            let y = random_tiny_space(rng.random_range(1..=max_pts), &mut rng)?;
            let exact = gh_exact_small(&x, &y)?;
            worst_gap = worst_gap.max(gh_lower(&x, &y) - exact);
            worst_self = worst_self.max(gh_exact_small(&x, &x)?);
        }
        rep.set("max_lower_minus_exact", worst_gap);
        rep.set("max_self_distance", worst_self);
        rep.check("self_distance_zero", worst_self == 0.0, format!("max gh(X, X) = {worst_self}"));
        rep.check("lower_below_exact", worst_gap <= 1e-12, format!("max gh_lower - gh = {worst_gap}"));

        let setup = strain_setup(cfg)?;
        let same = perturb_metric(&setup.space, 0.0, cfg.config.seed)?;
        rep.check("zero_amplitude_identity", same.space == setup.space, "perturb_metric(0) returns the input");
        if let Some(spec) = &setup.spec {
            let base = is_strained(&setup.space, spec);
            let mut table = Table::new("margins", &["amplitude", "angle_slack", "distance_slack", "gh_lower", "bound"]);
            for a in [0.0, o.amplitude, 2.0 * o.amplitude] {
                let p = perturb_metric(&setup.space, a, cfg.config.seed)?;
                let m = is_strained(&p.space, spec);
                table.push(vec![
                    fmt_f64(a),
                    fmt_f64(m.angle_slack),
                    fmt_f64(m.distance_slack),
                    fmt_f64(p.gh_lower),
                    fmt_f64(p.bound),
                ]);
                if a > 0.0 {
                    let ratio = (m.angle_slack - base.angle_slack).abs() / a;
                    rep.set(&format!("angle_slack_change_per_amplitude@{}", fmt_f64(a)), ratio);
                    rep.check(
                        &format!("gh_lower_within_bound@{}", fmt_f64(a)),
                        p.gh_lower <= p.bound + 1e-12,
                        format!("{} vs {}", p.gh_lower, p.bound),
                    );
                }
            }
            rep.tables.push(table);
        }
        Ok(rep)
    }
}

struct DistOracle;

impl Experiment for DistOracle {
    fn name(&self) -> &'static str {
        "dist-oracle"
    }

    fn description(&self) -> &'static str {
        "model distance solver against the epsilon-net shortest-path oracle and closed forms"
    }

    fn run(&self, cfg: &Resolved) -> Result<ScanReport> {
        let o = &cfg.config.dist_oracle;
        let (params, r, kind) = (cfg.params, cfg.params.r(), cfg.kind);
        let eps = r / o.net_fraction;
        let mut rep = new_report(cfg, self.name());
        rep.echo("net_epsilon", fmt_f64(eps));
        let opts = SolverOpts::default();
        let cross = o.cross_sheet && kind == ModelKind::DoubleDisk;
        let pool = sample_points(params, kind, 8 * o.pairs.max(1), SampleMode::Uniform, cfg.config.seed);
        let pairs: Vec<(ModelPoint, ModelPoint)> = pool
            .chunks(2)
            .filter(|c| !cross || c[0].sheet() != c[1].sheet())
            .take(o.pairs)
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect();
        if pairs.len() < o.pairs {
            return domain("could not draw enough pairs");
        }
        let graph = graph_oracle(kind, eps, &pairs)?;
        let mut table = Table::new("pairs", &["x", "y", "solver", "graph", "relative_error"]);
        let (mut worst_rel, mut undercut, mut c_emp) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for ((x, y), g) in pairs.iter().zip(&graph) {
            let d = model_distance(x, y, &opts)?;
            let rel = (g - d).abs() / d;
            worst_rel = worst_rel.max(rel);
            undercut = undercut.max(d - g);
            c_emp = c_emp.max((g - d) / eps);
            table.push(vec![x.to_record(), y.to_record(), fmt_f64(d), fmt_f64(*g), fmt_f64(rel)]);
        }
        rep.set("max_relative_error", worst_rel);
        rep.set("max_undercut", undercut);
        rep.set("empirical_c", c_emp);
        rep.check("oracle_agreement", worst_rel <= o.tolerance, format!("worst relative error {worst_rel}"));
        rep.check("oracle_no_undercut", undercut <= 1e-9, format!("largest d - graph = {undercut}"));
        rep.tables.push(table);

        let tol = 1e-6 + opts.tol;
        let mut closed = 0.0f64;
        match kind {
            ModelKind::DoubleDisk => {
                let p0 = ModelPoint::center(params, kind, Sheet::Plus)?;
                closed = closed.max((model_distance(&p0, &involution_a(&p0)?, &opts)? - 2.0 * r).abs());
                let mut rng = rng_for(cfg.config.seed, 43);
                for _ in 0..20 {
                    let x = sample_points(params, kind, 1, SampleMode::Uniform, rng.random())[0].clone();
                    let plus = ModelPoint::new(params, kind, x.t(), x.u().to_vec(), Sheet::Plus)?;
                    let minus = ModelPoint::new(params, kind, x.t(), x.u().to_vec(), Sheet::Minus)?;
                    closed = closed.max((model_distance(&plus, &minus, &opts)? - 2.0 * (r - x.t())).abs());
                }
            }
            ModelKind::Crosscap | ModelKind::Disk => {
                let p0 = ModelPoint::center(params, kind, Sheet::Plus)?;
                for x in sample_points(params, kind, 20, SampleMode::Uniform, cfg.config.seed ^ 1) {
                    closed = closed.max((model_distance(&p0, &x, &opts)? - x.t()).abs());
                }
            }
            ModelKind::Purse => {}
        }
        rep.set("closed_form_error", closed);
        rep.check("closed_forms", closed <= tol, format!("max error {closed} vs {tol}"));
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use std::f64::consts::PI;

    #[test]
    fn listing_is_stable() {
        let a = list_experiments();
        assert_eq!(a, list_experiments());
        let names: Vec<&str> = registry().iter().map(|e| e.name()).collect();
        assert_eq!(names, ["embed-scan", "strain", "fiber", "volcomp", "gh", "dist-oracle"]);
        assert!(a.contains("embed-scan") && a.contains("fiber"));
    }

    #[test]
    fn unknown_experiment() {
        let cfg = ExperimentConfig { experiment: "nope".into(), ..Default::default() }.resolve().unwrap();
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn round_sphere_has_axes_first() {
        let s = round_sphere(3, 50).unwrap();
        assert!((s.d(0, 1) - PI).abs() < 1e-12);
        assert!((s.d(0, 2) - PI / 2.0).abs() < 1e-12);
        assert!(axis_global_strainer(3, 0.05).is_valid(&s));
    }
}
