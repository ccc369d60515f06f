//! Monte Carlo ball volumes on the model spaces, Bishop–Gromov ratio checks,
//! the Swiss-cheese constant and radius estimates.

use std::time::Instant;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::modelspace::{
    model_distance, rng_for, sample_points, total_volume, ModelKind, ModelParams, ModelPoint, SampleMode,
    SolverOpts,
};
use crate::report::{fmt_f64, ScanReport, Table};
use crate::spaceform::{ball_volume, Curvature};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl VolumeEstimate {
    fn from_fraction(hits: usize, samples: usize, total: f64, seed: u64) -> Self {
        let p = hits as f64 / samples as f64;
        VolumeEstimate {
            value: p * total,
            standard_error: (p * (1.0 - p) / samples as f64).sqrt() * total,
            samples,
            seed,
        }
    }
}

/// Distances from `center` to a seeded uniform sample of its model. Reusing
/// one sample for several radii gives common random numbers.
pub struct BallSampler {
    params: ModelParams,
    kind: ModelKind,
    seed: u64,
    dists: Vec<f64>,
}

impl BallSampler {
    pub fn new(center: &ModelPoint, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return domain("need at least one sample");
        }
        let opts = SolverOpts::default();
        let pts = sample_points(center.params(), center.kind(), samples, SampleMode::Uniform, seed);
        let dists = pts.iter().map(|x| model_distance(center, x, &opts)).collect::<Result<_>>()?;
        Ok(BallSampler { params: center.params(), kind: center.kind(), seed, dists })
    }

    pub fn total(&self) -> f64 {
        total_volume(self.params, self.kind)
    }

    fn hits(&self, rho: f64) -> usize {
        self.dists.iter().filter(|&&d| d <= rho).count()
    }

    pub fn ball(&self, rho: f64) -> Result<VolumeEstimate> {
        if !(rho > 0.0) {
            return domain(format!("ball radius must be positive, got {rho}"));
        }
        Ok(VolumeEstimate::from_fraction(self.hits(rho), self.dists.len(), self.total(), self.seed))
    }

    /// Volume of the complement of the ball, from the same sample.
    pub fn complement(&self, rho: f64) -> Result<VolumeEstimate> {
        let b = self.ball(rho)?;
        Ok(VolumeEstimate { value: self.total() - b.value, ..b })
    }
}

/// `vol B(center, ρ)` as the sampled fraction of the model volume.
pub fn mc_ball_volume(center: &ModelPoint, rho: f64, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    if !(rho > 0.0) {
        return domain(format!("ball radius must be positive, got {rho}"));
    }
    BallSampler::new(center, samples, seed)?.ball(rho)
}

/// Ratios `vol B(center, ρ) / vol D_k^n(ρ)` along an increasing grid, asserted
/// nonincreasing up to three combined standard errors.
pub fn bg_ratio_check(center: &ModelPoint, rho_grid: &[f64], samples: usize, seed: u64) -> Result<ScanReport> {
    let start = Instant::now();
    if rho_grid.is_empty() || rho_grid.windows(2).any(|w| w[1] <= w[0]) || rho_grid[0] <= 0.0 {
        return domain("rho grid must be positive and strictly increasing");
    }
    let params = center.params();
    let mut rep = ScanReport::new("bg-ratio", seed);
    rep.echo("kind", center.kind());
    rep.echo("n", params.n());
    rep.echo("k", params.k());
    rep.echo("r", fmt_f64(params.r()));
    rep.echo("center", center.to_record());
    rep.echo("samples", samples);
    let sampler = BallSampler::new(center, samples, seed)?;
    let mut table = Table::new("bg", &["rho", "estimate", "SE", "model_reference", "ratio"]);
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for &rho in rho_grid {
        let est = sampler.ball(rho)?;
        let reference = ball_volume(params.n(), params.k(), rho)?;
        let (ratio, se) = (est.value / reference, est.standard_error / reference);
        table.push(vec![fmt_f64(rho), fmt_f64(est.value), fmt_f64(est.standard_error), fmt_f64(reference), fmt_f64(ratio)]);
        rows.push((ratio, se));
    }
    let mut worst = f64::NEG_INFINITY;
    for w in rows.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        worst = worst.max((b - a) - 3.0 * (sa * sa + sb * sb).sqrt());
    }
    rep.set("first_ratio", rows[0].0);
    rep.set("last_ratio", rows[rows.len() - 1].0);
    rep.set("max_excess_increase", if rows.len() > 1 { worst } else { 0.0 });
    rep.check(
        "ratio_nonincreasing",
        rows.len() < 2 || worst <= 0.0,
        format!("largest increase beyond 3 combined SE: {worst}"),
    );
    rep.tables.push(table);
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

/// `κ(d) = (vol D(2d) - vol D(d)) / vol D(2d)`.
pub fn swiss_cheese_kappa(n: usize, k: Curvature, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return domain(format!("d must be positive, got {d}"));
    }
    let big = ball_volume(n, k, 2.0 * d)?;
    Ok((big - ball_volume(n, k, d)?) / big)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadiusEstimate {
    /// `min_p max_x d(p, x)` over the sample.
    pub value: f64,
    /// Covering radius of the sample, estimated against random probes.
    pub resolution: f64,
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
}

/// `rad M = min_p max_x d(p, x)` over a deterministic grid of about `samples`
/// points. The grid's covering radius `ε` is estimated with seeded probes, so
/// the true radius lies in `[value - ε, value + ε]` up to that estimate.
pub fn radius_estimate(params: ModelParams, kind: ModelKind, samples: usize, seed: u64) -> Result<RadiusEstimate> {
    if samples < 2 {
        return domain("radius estimate needs at least two samples");
    }
    let opts = SolverOpts::default();
    let pts = sample_points(params, kind, samples, SampleMode::Grid, seed);
    let m = pts.len();
    let mut dist = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let d = model_distance(&pts[i], &pts[j], &opts)?;
            dist[i * m + j] = d;
            dist[j * m + i] = d;
        }
    }
    let value = (0..m)
        .map(|i| dist[i * m..(i + 1) * m].iter().cloned().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    let probes = sample_points(params, kind, 4 * m, SampleMode::Uniform, rng_seed(seed));
    let mut resolution = 0.0f64;
    for q in &probes {
        let mut near = f64::INFINITY;
        for p in &pts {
            near = near.min(model_distance(q, p, &opts)?);
        }
        resolution = resolution.max(near);
    }
    Ok(RadiusEstimate { value, resolution, lower: value - resolution, upper: value + resolution, samples: m })
}

fn rng_seed(seed: u64) -> u64 {
    use rand::RngCore;
    rng_for(seed, 77).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspace::Sheet;
    use std::f64::consts::PI;

    fn centre(kind: ModelKind, k: Curvature) -> ModelPoint {
        ModelPoint::center(ModelParams::new(2, k, 1.0).unwrap(), kind, Sheet::Plus).unwrap()
    }

    #[test]
    fn kappa_closed_forms() {
        for d in [1e-3, 0.1, 0.4] {
            assert!((swiss_cheese_kappa(2, Curvature::Zero, d).unwrap() - 0.75).abs() < 1e-12);
            assert!((swiss_cheese_kappa(1, Curvature::Negative, d).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_disk_small_ball() {
        let c = centre(ModelKind::Disk, Curvature::Zero);
        let v = mc_ball_volume(&c, 0.5, 20_000, 1).unwrap();
        assert!((v.value - PI * 0.25).abs() <= 3.0 * v.standard_error, "{v:?}");
        let again = mc_ball_volume(&c, 0.5, 20_000, 1).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn whole_model_and_sum_rule() {
        let c = centre(ModelKind::DoubleDisk, Curvature::Zero);
        let s = BallSampler::new(&c, 5_000, 2).unwrap();
        let all = s.ball(10.0).unwrap();
        assert!((all.value - 2.0 * PI).abs() < 1e-12);
        let (b, rest) = (s.ball(1.3).unwrap(), s.complement(1.3).unwrap());
        assert!((b.value + rest.value - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let c = centre(ModelKind::Disk, Curvature::Zero);
        assert!(mc_ball_volume(&c, 0.0, 10, 0).is_err());
        assert!(bg_ratio_check(&c, &[0.5, 0.4], 10, 0).is_err());
        assert!(swiss_cheese_kappa(2, Curvature::Zero, -1.0).is_err());
    }

    #[test]
    fn disk_radius_is_r() {
        let p = ModelParams::new(2, Curvature::Zero, 1.0).unwrap();
        let e = radius_estimate(p, ModelKind::Disk, 200, 0).unwrap();
        assert!(e.lower <= 1.0 && 1.0 <= e.upper, "{e:?}");
    }
}
