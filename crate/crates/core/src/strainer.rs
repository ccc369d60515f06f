//! Strainers on finite metric spaces: comparison angles, strainer checks and
//! greedy search, distance charts, smoothed charts, the sphere map of a
//! globally strained space, and the hinge-angle defect diagnostic.

use std::fmt::Write as _;

use crate::error::{domain, GeomError, Result};
use crate::modelspace::{model_distance, sample_ball, ModelPoint, SolverOpts};
use crate::report::fmt_f64;
use crate::spaceform::{comparison_angle, Curvature};
use std::f64::consts::PI;

const TRIANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    size: usize,
    dist: Vec<f64>,
    curv_lb: Curvature,
}

impl FiniteMetricSpace {
    /// Validates symmetry, zero diagonal, nonnegativity and the triangle
    /// inequality (within 1e-9 relative to the diameter).
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>, curv_lb: Curvature) -> Result<Self> {
        let size = dist.len();
        if labels.len() != size {
            return domain("label count does not match the matrix size");
        }
        let mut flat = Vec::with_capacity(size * size);
        for (i, row) in dist.iter().enumerate() {
            if row.len() != size {
                return domain(format!("row {i} has {} entries, expected {size}", row.len()));
            }
            flat.extend_from_slice(row);
        }
        let s = FiniteMetricSpace { labels, size, dist: flat, curv_lb };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn from_flat_unchecked(labels: Vec<String>, dist: Vec<f64>, curv_lb: Curvature) -> Self {
        let size = labels.len();
        FiniteMetricSpace { labels, size, dist, curv_lb }
    }

    fn validate(&self) -> Result<()> {
        let n = self.size;
        let scale = self.dist.iter().cloned().fold(1.0, f64::max);
        for i in 0..n {
            if self.d(i, i) != 0.0 {
                return domain(format!("nonzero diagonal entry at {i}"));
            }
            for j in 0..n {
                let v = self.d(i, j);
                if !v.is_finite() || v < 0.0 {
                    return domain(format!("invalid distance {v} at ({i}, {j})"));
                }
                if (v - self.d(j, i)).abs() > 1e-12 * scale {
                    return domain(format!("asymmetric entries at ({i}, {j})"));
                }
            }
        }
        if let Some((i, j, k, excess)) = self.triangle_violation() {
            if excess > TRIANGLE_TOL * scale {
                return domain(format!("triangle inequality fails at ({i}, {j}, {k}) by {excess}"));
            }
        }
        Ok(())
    }

    /// The worst violation `d(i,k) - d(i,j) - d(j,k)`, if any is positive.
    pub fn triangle_violation(&self) -> Option<(usize, usize, usize, f64)> {
        let n = self.size;
        let mut worst: Option<(usize, usize, usize, f64)> = None;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let excess = self.d(i, k) - self.d(i, j) - self.d(j, k);
                    if excess > 0.0 && worst.is_none_or(|w| excess > w.3) {
                        worst = Some((i, j, k, excess));
                    }
                }
            }
        }
        worst
    }

    /// The metric on model points, with labels taken from their records.
    pub fn from_points(points: &[ModelPoint], opts: &SolverOpts, curv_lb: Curvature) -> Result<Self> {
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = model_distance(&points[i], &points[j], opts)?;
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let labels = (0..n).map(|i| i.to_string()).collect();
        Ok(FiniteMetricSpace::from_flat_unchecked(labels, dist, curv_lb))
    }

    /// Builds a space from a distance function on indices `0..n`.
    pub fn from_fn<F: Fn(usize, usize) -> f64>(n: usize, curv_lb: Curvature, f: F) -> Result<Self> {
        let dist = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i.min(j), i.max(j)) }).collect()).collect();
        FiniteMetricSpace::new((0..n).map(|i| i.to_string()).collect(), dist, curv_lb)
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.size + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn curv_lb(&self) -> Curvature {
        self.curv_lb
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.size.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    pub fn subspace(&self, idx: &[usize]) -> FiniteMetricSpace {
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let dist = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| self.d(i, j)).collect();
        FiniteMetricSpace::from_flat_unchecked(labels, dist, self.curv_lb)
    }

    /// Text format: a header `n curv_lb`, then the strict upper triangle row
    /// by row as whitespace-separated decimals. `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.size, self.curv_lb);
        for i in 0..self.size {
            let row: Vec<String> = (i + 1..self.size).map(|j| fmt_f64(self.d(i, j))).collect();
            if !row.is_empty() {
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split_whitespace())
            .map(str::to_string);
        let bad = |m: &str| GeomError::Parse(format!("metric space text: {m}"));
        let n: usize = tokens.next().ok_or_else(|| bad("missing header"))?.parse().map_err(|_| bad("bad size"))?;
        let k: i32 = tokens.next().ok_or_else(|| bad("missing curvature"))?.parse().map_err(|_| bad("bad curvature"))?;
        let k = Curvature::from_value(k).map_err(|_| bad("curvature must be -1, 0 or 1"))?;
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v: f64 = tokens
                    .next()
                    .ok_or_else(|| bad("too few entries"))?
                    .parse()
                    .map_err(|_| bad("bad entry"))?;
                dist[i][j] = v;
                dist[j][i] = v;
            }
        }
        if tokens.next().is_some() {
            return Err(bad("too many entries"));
        }
        FiniteMetricSpace::new((0..n).map(|i| i.to_string()).collect(), dist, k).map_err(|e| match e {
            GeomError::Domain(m) => GeomError::Parse(m),
            other => other,
        })
    }
}

/// Comparison angle at `x` of the triangle `a, x, b` at curvature `curv_lb`.
pub fn cmp_angle_metric(s: &FiniteMetricSpace, a: usize, x: usize, b: usize) -> Result<f64> {
    if a == x || b == x {
        return Err(GeomError::Degenerate("strainer point coincides with the vertex".into()));
    }
    let (dxa, dxb, dab) = (s.d(x, a), s.d(x, b), s.d(a, b));
    // Round-off in computed metrics may break the triangle inequality slightly.
    let dab = dab.min(dxa + dxb).max((dxa - dxb).abs());
    comparison_angle(s.curv_lb, dxa, dxb, dab)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrainerSpec {
    pub x: usize,
    pub pairs: Vec<(usize, usize)>,
    pub delta: f64,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrainMargin {
    pub strained: bool,
    /// Smallest angle slack over the four angle families.
    pub angle_slack: f64,
    /// `min dist({a_i, b_i}, x) - r`.
    pub distance_slack: f64,
    /// Which inequality is tightest.
    pub tightest: String,
}

/// Angle slacks `∠̃ - threshold` for every inequality of the strainer definition.
fn angle_slacks(s: &FiniteMetricSpace, spec: &StrainerSpec) -> Vec<(f64, String)> {
    let x = spec.x;
    let ang = |a: usize, b: usize| cmp_angle_metric(s, a, x, b).unwrap_or(0.0);
    let right = PI / 2.0 - spec.delta;
    let straight = PI - spec.delta;
    let mut out = Vec::new();
    for (i, &(ai, bi)) in spec.pairs.iter().enumerate() {
        out.push((ang(ai, bi) - straight, format!("angle(a{i}, x, b{i})")));
        for (j, &(aj, bj)) in spec.pairs.iter().enumerate() {
            if i == j {
                continue;
            }
            out.push((ang(ai, bj) - right, format!("angle(a{i}, x, b{j})")));
            if i < j {
                out.push((ang(ai, aj) - right, format!("angle(a{i}, x, a{j})")));
                out.push((ang(bi, bj) - right, format!("angle(b{i}, x, b{j})")));
            }
        }
    }
    out
}

pub fn is_strained(s: &FiniteMetricSpace, spec: &StrainerSpec) -> StrainMargin {
    let mut tightest = (f64::INFINITY, String::from("none"));
    for (slack, name) in angle_slacks(s, spec) {
        if slack < tightest.0 {
            tightest = (slack, name);
        }
    }
    let distance_slack = spec
        .pairs
        .iter()
        .map(|&(a, b)| s.d(a, spec.x).min(s.d(b, spec.x)) - spec.r)
        .fold(f64::INFINITY, f64::min);
    let name = if distance_slack < tightest.0 { "distance to x".to_string() } else { tightest.1 };
    StrainMargin {
        strained: tightest.0 > 0.0 && distance_slack > 0.0 && !spec.pairs.is_empty(),
        angle_slack: tightest.0,
        distance_slack,
        tightest: name,
    }
}

/// Greedy strainer search at `x`: pair by pair, the unordered candidate pair
/// maximising the smallest angle slack together with the pairs already chosen.
/// Only points farther than `r` from `x` are candidates; ties go to the
/// lexicographically smallest pair. Returns `None` when some step cannot reach
/// positive slack.
pub fn find_strainer(s: &FiniteMetricSpace, x: usize, n: usize, delta: f64, r: f64) -> Option<StrainerSpec> {
    let cands: Vec<usize> = (0..s.len()).filter(|&i| i != x && s.d(i, x) > r).collect();
    let m = cands.len();
    if m < 2 * n {
        return None;
    }
    let mut ang = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let a = cmp_angle_metric(s, cands[i], x, cands[j]).unwrap_or(0.0);
            ang[i * m + j] = a;
            ang[j * m + i] = a;
        }
    }
    let right = PI / 2.0 - delta;
    let straight = PI - delta;
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; m];
    for _ in 0..n {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..m {
            if used[a] {
                continue;
            }
            for b in a + 1..m {
                if used[b] {
                    continue;
                }
                let mut slack = ang[a * m + b] - straight;
                for &(p, q) in &chosen {
                    for c in [p, q] {
                        slack = slack.min(ang[a * m + c] - right).min(ang[b * m + c] - right);
                    }
                }
                if best.is_none_or(|(bs, _, _)| slack > bs) {
                    best = Some((slack, a, b));
                }
            }
        }
        let (slack, a, b) = best?;
        if slack <= 0.0 {
            return None;
        }
        used[a] = true;
        used[b] = true;
        chosen.push((a, b));
    }
    let spec = StrainerSpec {
        x,
        pairs: chosen.iter().map(|&(a, b)| (cands[a], cands[b])).collect(),
        delta,
        r,
    };
    is_strained(s, &spec).strained.then_some(spec)
}

/// The distance chart `y ↦ (d(a_1, y), ..., d(a_n, y))`.
#[derive(Clone, Debug)]
pub struct BgpChart {
    anchors: Vec<usize>,
}

pub fn bgp_chart(spec: &StrainerSpec) -> BgpChart {
    BgpChart { anchors: spec.pairs.iter().map(|p| p.0).collect() }
}

impl BgpChart {
    pub fn eval(&self, s: &FiniteMetricSpace, y: usize) -> Vec<f64> {
        self.anchors.iter().map(|&a| s.d(a, y)).collect()
    }

    /// `max |‖chart(p) - chart(q)‖ / d(p, q) - 1|` over distinct pairs of `points`.
    pub fn distortion_estimate(&self, s: &FiniteMetricSpace, points: &[usize]) -> f64 {
        let imgs: Vec<Vec<f64>> = points.iter().map(|&p| self.eval(s, p)).collect();
        let mut worst: f64 = 0.0;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = s.d(points[i], points[j]);
                if d <= 0.0 {
                    continue;
                }
                let e = imgs[i].iter().zip(&imgs[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                worst = worst.max((e / d - 1.0).abs());
            }
        }
        worst
    }
}

/// Smoothed chart `y ↦ (mean_{z ∈ B(a_i, η)} d(y, z))_i` on a model space,
/// with a fixed seeded sample of each ball.
#[derive(Clone, Debug)]
pub struct OtsuShioyaChart {
    balls: Vec<Vec<ModelPoint>>,
    opts: SolverOpts,
}

impl OtsuShioyaChart {
    pub fn new(anchors: &[ModelPoint], eta: f64, mc_samples: usize, seed: u64, opts: &SolverOpts) -> Result<Self> {
        let balls = anchors
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let s = seed ^ (i as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03);
                sample_ball(a, eta, mc_samples, s, opts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OtsuShioyaChart { balls, opts: *opts })
    }

    pub fn dim(&self) -> usize {
        self.balls.len()
    }

    pub fn eval(&self, y: &ModelPoint) -> Result<Vec<f64>> {
        Ok(self.eval_with_error(y)?.into_iter().map(|p| p.0).collect())
    }

    /// Chart values with Monte Carlo standard errors.
    pub fn eval_with_error(&self, y: &ModelPoint) -> Result<Vec<(f64, f64)>> {
        self.balls
            .iter()
            .map(|ball| {
                let vals = ball.iter().map(|z| model_distance(y, z, &self.opts)).collect::<Result<Vec<f64>>>()?;
                let m = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / m;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
                Ok((mean, (var / m).sqrt()))
            })
            .collect()
    }
}

/// The smoothed chart built from the `a_i` of a strainer on model points.
pub fn otsu_shioya_chart(
    points: &[ModelPoint],
    spec: &StrainerSpec,
    eta: f64,
    mc_samples: usize,
    seed: u64,
    opts: &SolverOpts,
) -> Result<OtsuShioyaChart> {
    let anchors: Vec<ModelPoint> = spec.pairs.iter().map(|&(a, _)| points[a].clone()).collect();
    OtsuShioyaChart::new(&anchors, eta, mc_samples, seed, opts)
}

/// Pairs of subsets `(A_i, B_i)` of a space with curvature ≥ 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalStrainerSpec {
    pub a_sets: Vec<Vec<usize>>,
    pub b_sets: Vec<Vec<usize>>,
    pub delta: f64,
}

impl GlobalStrainerSpec {
    /// Checks `|d(a_i, b_j) - π/2| < δ`, `|d(a_i, a_j) - π/2| < δ`,
    /// `|d(b_i, b_j) - π/2| < δ` for `i ≠ j` and `d(a_i, b_i) > π - δ`.
    pub fn is_valid(&self, s: &FiniteMetricSpace) -> bool {
        let m = self.a_sets.len();
        if self.b_sets.len() != m {
            return false;
        }
        let near_right = |p: &[usize], q: &[usize]| {
            p.iter().all(|&x| q.iter().all(|&y| (s.d(x, y) - PI / 2.0).abs() < self.delta))
        };
        for i in 0..m {
            let (ai, bi) = (&self.a_sets[i], &self.b_sets[i]);
            if !ai.iter().all(|&a| bi.iter().all(|&b| s.d(a, b) > PI - self.delta)) {
                return false;
            }
            for j in 0..m {
                if i != j
                    && !(near_right(ai, &self.b_sets[j]) && near_right(ai, &self.a_sets[j]) && near_right(bi, &self.b_sets[j]))
                {
                    return false;
                }
            }
        }
        true
    }
}

/// `Ψ(x) = (Σ cos² d(A_i, x))^{-1/2} (cos d(A_1, x), ..., cos d(A_n, x))`.
#[derive(Clone, Debug)]
pub struct SphereMap {
    a_sets: Vec<Vec<usize>>,
}

pub fn sphere_map_psi(s: &FiniteMetricSpace, gspec: &GlobalStrainerSpec) -> Result<SphereMap> {
    if s.curv_lb() != Curvature::Positive {
        return domain("the sphere map needs curvature bounded below by 1");
    }
    if gspec.a_sets.iter().any(|a| a.is_empty()) {
        return domain("empty strainer subset");
    }
    Ok(SphereMap { a_sets: gspec.a_sets.clone() })
}

impl SphereMap {
    pub fn eval(&self, s: &FiniteMetricSpace, x: usize) -> Result<Vec<f64>> {
        let c: Vec<f64> = self
            .a_sets
            .iter()
            .map(|a| a.iter().map(|&p| s.d(p, x)).fold(f64::INFINITY, f64::min).cos())
            .collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-9 {
            return domain(format!("normalisation vanishes at point {x}"));
        }
        Ok(c.into_iter().map(|v| v / norm).collect())
    }

    /// `max |d_S(Ψ(p), Ψ(q)) / d(p, q) - 1|` over distinct pairs, with the round
    /// metric on the image sphere.
    pub fn distortion(&self, s: &FiniteMetricSpace, points: &[usize]) -> Result<f64> {
        let imgs = points.iter().map(|&p| self.eval(s, p)).collect::<Result<Vec<_>>>()?;
        let mut worst: f64 = 0.0;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = s.d(points[i], points[j]);
                if d <= 0.0 {
                    continue;
                }
                let (p, q) = (&imgs[i], &imgs[j]);
                let minus = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let plus = p.iter().zip(q).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
                let e = 2.0 * minus.atan2(plus);
                worst = worst.max((e / d - 1.0).abs());
            }
        }
        Ok(worst)
    }
}

/// `|∠̃(y1, x, z) + ∠̃(y2, x, z) - π|`.
pub fn angle_transfer_defect(s: &FiniteMetricSpace, y1: usize, y2: usize, x: usize, z: usize) -> Result<f64> {
    Ok((cmp_angle_metric(s, y1, x, z)? + cmp_angle_metric(s, y2, x, z)? - PI).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(points: &[[f64; 2]]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(points.len(), Curvature::Zero, |i, j| {
            ((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt()
        })
        .unwrap()
    }

    #[test]
    fn angles() {
        let s = plane(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert!((cmp_angle_metric(&s, 0, 1, 2).unwrap() - PI).abs() < 1e-6);
        let e = plane(&[[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]]);
        assert!((cmp_angle_metric(&e, 1, 0, 2).unwrap() - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn axis_strainer() {
        let s = plane(&[[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]);
        let spec = StrainerSpec { x: 0, pairs: vec![(1, 2), (3, 4)], delta: 0.05, r: 0.5 };
        let m = is_strained(&s, &spec);
        assert!(m.strained);
        assert!((m.angle_slack - 0.05).abs() < 1e-9);
        let bad = StrainerSpec { pairs: vec![(1, 1), (3, 4)], ..spec.clone() };
        assert!(!is_strained(&s, &bad).strained);
        let tight = StrainerSpec { delta: 0.0, ..spec };
        assert!(!is_strained(&s, &tight).strained);
    }

    #[test]
    fn strainer_search() {
        let mut pts = vec![[0.0, 0.0]];
        for j in 0..24 {
            let a = 2.0 * PI * j as f64 / 24.0;
            pts.push([a.cos(), a.sin()]);
        }
        let s = plane(&pts);
        let spec = find_strainer(&s, 0, 2, 0.1, 0.5).unwrap();
        assert!(is_strained(&s, &spec).strained);
        assert_eq!(find_strainer(&s, 0, 2, 0.1, 0.5), Some(spec));
        let tiny = plane(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(find_strainer(&tiny, 0, 2, 0.1, 0.5).is_none());
    }

    #[test]
    fn text_round_trip() {
        let s = plane(&[[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]]);
        let back = FiniteMetricSpace::from_text(&s.to_text()).unwrap();
        assert_eq!(back.matrix(), s.matrix());
        assert!(FiniteMetricSpace::from_text("3 0\n1 1 5\n").is_err());
        assert!(FiniteMetricSpace::from_text("2 7\n1\n").is_err());
    }

    #[test]
    fn round_sphere_identity() {
        let mut pts: Vec<[f64; 3]> = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        pts.extend([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
        pts.push([0.48, 0.6, 0.64]);
        pts.push([0.0, 0.6, -0.8]);
        let s = FiniteMetricSpace::from_fn(pts.len(), Curvature::Positive, |i, j| {
            let c: f64 = (0..3).map(|m| (pts[i][m] - pts[j][m]).powi(2)).sum::<f64>().sqrt();
            2.0 * (c / 2.0).asin()
        })
        .unwrap();
        let g = GlobalStrainerSpec { a_sets: vec![vec![0], vec![1], vec![2]], b_sets: vec![vec![3], vec![4], vec![5]], delta: 1e-6 };
        assert!(g.is_valid(&s));
        let psi = sphere_map_psi(&s, &g).unwrap();
        let img = psi.eval(&s, 6).unwrap();
        assert!((img[0] - 0.48).abs() < 1e-12);
        let all: Vec<usize> = (0..pts.len()).collect();
        assert!(psi.distortion(&s, &all).unwrap() < 1e-9);
    }

    #[test]
    fn transfer_defect_collinear() {
        let s = plane(&[[-1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.3, 0.2]]);
        assert!(angle_transfer_defect(&s, 0, 1, 2, 3).unwrap() < 1e-9);
        let a = angle_transfer_defect(&s, 0, 1, 2, 3).unwrap();
        let b = angle_transfer_defect(&s, 1, 0, 2, 3).unwrap();
        assert_eq!(a, b);
    }
}
