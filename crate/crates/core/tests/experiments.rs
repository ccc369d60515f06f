use cmpgeom::config::ExperimentConfig;
use cmpgeom::experiments::{self, registry};

fn run(doc: &str) -> cmpgeom::report::ScanReport {
    let cfg = ExperimentConfig::from_toml(doc).unwrap().resolve().unwrap();
    experiments::run(&cfg).unwrap()
}

fn check(doc: &str, keys: &[&str]) {
    let rep = run(doc);
    for key in keys {
        let v = rep.scalar(key).unwrap_or_else(|| panic!("missing scalar {key}: {:?}", rep.scalars().keys()));
        assert!(v.is_finite(), "{key} = {v}");
    }
    let failed: Vec<_> = rep.failures().into_iter().map(|a| a.name.clone()).collect();
    assert!(failed.is_empty(), "failed assertions {failed:?}");
}

#[test]
fn registry_names_are_unique_and_described() {
    let names: Vec<_> = registry().iter().map(|e| e.name()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len());
    assert!(registry().iter().all(|e| !e.description().is_empty()));
}

#[test]
fn embed_scan_small() {
    check(
        "[embed_scan]\npairs = 300\npoints = 30\ndirs_per_point = 4\n",
        &["injectivity.min_separation", "immersion.lambda_est"],
    );
}

#[test]
fn strain_small() {
    check("experiment = \"strain\"\n[strain]\nsphere_points = 40\n", &["chart_distortion", "sphere_map_distortion"]);
}

#[test]
fn fiber_small() {
    check(
        "experiment = \"fiber\"\n[model]\nkind = \"purse\"\n[fiber]\ntargets_per_axis = 3\nsubmersion_points = 20\n",
        &["max_length_error", "max_components", "max_psi_norm"],
    );
}

#[test]
fn volcomp_small() {
    check(
        "experiment = \"volcomp\"\n[volcomp]\nsamples = 4000\nkappa_points = 5\nradius_samples = 50\n",
        &["kappa_max", "radius"],
    );
}

#[test]
fn gh_small() {
    check("experiment = \"gh\"\n[gh]\nrandom_pairs = 20\nmax_points = 4\n", &["max_lower_minus_exact"]);
}

#[test]
fn dist_oracle_small() {
    for k in [-1, 0, 1] {
        check(
            &format!("experiment = \"dist-oracle\"\n[model]\nk = {k}\n[dist_oracle]\npairs = 10\nnet_fraction = 40.0\ntolerance = 0.1\n"),
            &["max_relative_error", "max_undercut", "empirical_c"],
        );
    }
}

#[test]
fn runs_are_reproducible() {
    let doc = "seed = 3\n[embed_scan]\npairs = 200\npoints = 10\ndirs_per_point = 4\n";
    assert_eq!(run(doc).scalar_json(), run(doc).scalar_json());
}

/// Dense-net baseline. Refining the net never lengthens a graph path, so on
/// the same pairs the worst relative error cannot grow; it stays near 1%
/// because the bounded link radius leaves a fixed directional stretch.
#[test]
#[ignore = "dense net, over a minute"]
fn dense_net_baseline() {
    for k in [-1, 0, 1] {
        let doc = |fraction: f64| {
            format!("experiment = \"dist-oracle\"\n[model]\nk = {k}\n[dist_oracle]\npairs = 40\nnet_fraction = {fraction:?}\n")
        };
        let coarse = run(&doc(200.0));
        let fine = run(&doc(400.0));
        let (c, f) = (coarse.scalar("max_relative_error").unwrap(), fine.scalar("max_relative_error").unwrap());
        assert!(f <= c + 1e-12, "k = {k}: {f} after refinement, {c} before");
        assert!(fine.failures().is_empty(), "k = {k}");
    }
}
