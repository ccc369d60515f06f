//! The purse map `Ψ = (f_1, ..., f_{n-1})`, the auxiliary function `f_n`, the
//! radial projection `g = Ψ/|Ψ|`, the regions `E_0(ε)` and `E_1(ε)`, fiber
//! extraction on a grid and the submersion scans.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::embedding::{directional_derivative, gradient, Embedding, Field, ScanConfig};
use crate::error::{domain, GeomError, Result};
use crate::modelspace::{
    self, combine, geodesic_step, rng_for, sample_points, tangent_basis, ModelKind, ModelParams, ModelPoint,
    SampleMode, Sheet,
};
use crate::quad::adaptive_simpson;
use crate::report::{fmt_f64, ScanReport, Table};
use crate::spaceform::{unit_sphere_area, Curvature};
use crate::strainer::{find_strainer, FiniteMetricSpace};

/// Points within this much of `|Ψ| = R - ε` belong to both regions.
pub const REGION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PurseRegion {
    E0,
    E1,
}

impl fmt::Display for PurseRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PurseRegion::E0 => "E0",
            PurseRegion::E1 => "E1",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionClass {
    E0,
    E1,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PurseRegionSpec {
    epsilon: f64,
    region: PurseRegion,
}

impl PurseRegionSpec {
    pub fn new(params: ModelParams, epsilon: f64, region: PurseRegion) -> Result<Self> {
        let big_r = image_radius(params);
        if !(epsilon > 0.0 && epsilon < params.r()) || big_r - epsilon <= 0.0 {
            return domain(format!("epsilon must lie in (0, r) with R - ε > 0, got {epsilon}"));
        }
        Ok(PurseRegionSpec { epsilon, region })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn region(&self) -> PurseRegion {
        self.region
    }
}

/// Radius of the image disk `Ψ(P)`: `sn_k(r)`, the value of `|Ψ|` on `S`.
pub fn image_radius(params: ModelParams) -> f64 {
    params.k().sn(params.r())
}

/// Length of the fiber `Ψ⁻¹(w)`: the segment of one disk on which the first
/// `n - 1` ambient coordinates equal `w`. Its ambient plane meets the space
/// form in a circle (k = 1), line (k = 0) or hyperbola (k = -1).
pub fn fiber_length(params: ModelParams, w: &[f64]) -> Result<f64> {
    let (k, r) = (params.k(), params.r());
    let w2: f64 = w.iter().map(|c| c * c).sum();
    if w.len() + 1 != params.n() || w2.sqrt() >= image_radius(params) {
        return domain("fiber target must lie inside the image disk");
    }
    Ok(match k {
        Curvature::Zero => 2.0 * (r * r - w2).sqrt(),
        Curvature::Positive => {
            let rho = (1.0 - w2).sqrt();
            2.0 * rho * (r.cos() / rho).acos()
        }
        Curvature::Negative => {
            let rho = (1.0 + w2).sqrt();
            2.0 * rho * (r.cosh() / rho).acosh()
        }
    })
}

/// `Ψ`, `f_n` and `g` on a purse.
pub struct PurseMap {
    emb: Embedding,
}

impl PurseMap {
    pub fn new(params: ModelParams) -> Result<Self> {
        Ok(PurseMap { emb: Embedding::new(params, ModelKind::Purse)? })
    }

    pub fn embedding(&self) -> &Embedding {
        &self.emb
    }

    pub fn params(&self) -> ModelParams {
        self.emb.params()
    }

    pub fn image_radius(&self) -> f64 {
        image_radius(self.params())
    }

    fn check(&self, x: &ModelPoint) -> Result<()> {
        if x.kind() != ModelKind::Purse || x.params() != self.params() {
            return domain("point does not belong to this purse");
        }
        Ok(())
    }

    pub fn psi(&self, x: &ModelPoint) -> Result<Vec<f64>> {
        self.check(x)?;
        (1..self.params().n()).map(|i| self.emb.f_index(i, x)).collect()
    }

    /// `h(d(p_n, x)) - h(d(p_0, x))`.
    pub fn f_n(&self, x: &ModelPoint) -> Result<f64> {
        self.check(x)?;
        let bp = self.emb.base_points();
        let h = self.emb.profile();
        Ok(h.eval(self.emb.dist(bp.get(self.params().n()), x)?) - h.eval(self.emb.dist(bp.get(0), x)?))
    }

    pub fn g_radial(&self, x: &ModelPoint) -> Result<Vec<f64>> {
        radial_unit(&self.psi(x)?)
    }

    pub fn classify_region(&self, x: &ModelPoint, epsilon: f64) -> Result<RegionClass> {
        Ok(classify_norm(norm(&self.psi(x)?), self.image_radius() - epsilon))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn radial_unit(v: &[f64]) -> Result<Vec<f64>> {
    let m = norm(v);
    if m < 1e-9 {
        return domain("radial projection undefined at Ψ = 0");
    }
    Ok(v.iter().map(|c| c / m).collect())
}

fn classify_norm(m: f64, threshold: f64) -> RegionClass {
    if (m - threshold).abs() <= REGION_TOL {
        RegionClass::Both
    } else if m < threshold {
        RegionClass::E0
    } else {
        RegionClass::E1
    }
}

pub fn psi_purse(x: &ModelPoint) -> Result<Vec<f64>> {
    PurseMap::new(x.params())?.psi(x)
}

pub fn f_n_purse(x: &ModelPoint) -> Result<f64> {
    PurseMap::new(x.params())?.f_n(x)
}

/// `Ψ(x)/|Ψ(x)|`. Only meaningful in `E_1(ε)`, which is not enforced beyond
/// `|Ψ| ≥ 1e-9`.
pub fn g_radial(x: &ModelPoint, _epsilon: f64) -> Result<Vec<f64>> {
    PurseMap::new(x.params())?.g_radial(x)
}

pub fn classify_region(x: &ModelPoint, epsilon: f64) -> Result<RegionClass> {
    PurseMap::new(x.params())?.classify_region(x, epsilon)
}

/// Points of a grid in normal coordinates at `p_0` with their `Ψ` values.
pub struct PsiGrid {
    spacing: f64,
    points: Vec<ModelPoint>,
    weights: Vec<f64>,
    psi: Vec<Vec<f64>>,
}

impl PsiGrid {
    /// Cubic grid of spacing `r / resolution` restricted to the closed `r`-ball.
    pub fn new(map: &PurseMap, resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return domain("grid resolution must be positive");
        }
        let params = map.params();
        let (n, r, k) = (params.n(), params.r(), params.k());
        let h = r / resolution as f64;
        let side = 2 * resolution + 1;
        let (mut points, mut weights, mut psi) = (Vec::new(), Vec::new(), Vec::new());
        let mut idx = vec![0usize; n];
        'outer: loop {
            let v: Vec<f64> = idx.iter().map(|&i| (i as f64 - resolution as f64) * h).collect();
            let t = norm(&v);
            if t <= r * (1.0 + 1e-12) {
                let t = t.min(r);
                let (u, density) = if t == 0.0 {
                    let mut u = vec![0.0; n];
                    u[0] = 1.0;
                    (u, 1.0)
                } else {
                    (v.iter().map(|c| c / t).collect(), (k.sn(t) / t).powi(n as i32 - 1))
                };
                let x = ModelPoint::new(params, ModelKind::Purse, t, u, Sheet::Plus)?;
                psi.push(map.psi(&x)?);
                weights.push(h.powi(n as i32) * density);
                points.push(x);
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < side {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
        Ok(PsiGrid { spacing: h, points, weights, psi })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn psi_values(&self) -> &[Vec<f64>] {
        &self.psi
    }

    pub fn points(&self) -> &[ModelPoint] {
        &self.points
    }
}

/// Grid points over one target value of `Ψ`, with their link-graph components.
#[derive(Clone, Debug)]
pub struct FiberSample {
    pub target: Vec<f64>,
    pub tol: f64,
    pub points: Vec<ModelPoint>,
    pub component_of: Vec<usize>,
    pub link_radius: f64,
    pub components: usize,
    /// Coarea estimate of the fiber length (triweight kernel of radius `tol`).
    pub length: f64,
}

impl FiberSample {
    pub fn to_table(&self, name: &str) -> Table {
        let mut t = Table::new(name, &["t", "u", "sheet", "component"]);
        for (p, c) in self.points.iter().zip(&self.component_of) {
            let u = p.u().iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(" ");
            t.push(vec![fmt_f64(p.t()), u, p.sheet().sign().to_string(), c.to_string()]);
        }
        t
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// `∫_{R^m} (1 - |y|²)³₊ dy`.
fn triweight_mass(m: usize) -> f64 {
    unit_sphere_area(m - 1) * adaptive_simpson(|s| (1.0 - s * s).powi(3) * s.powi(m as i32 - 1), 0.0, 1.0, 1e-13)
}

impl PurseMap {
    /// Fiber over `target` sampled on a fresh grid.
    pub fn fiber_extract(
        &self,
        target: &[f64],
        tol: f64,
        grid_resolution: usize,
        link_radius: Option<f64>,
    ) -> Result<FiberSample> {
        let grid = PsiGrid::new(self, grid_resolution)?;
        self.fiber_on_grid(&grid, target, tol, link_radius)
    }

    /// Grid points with `|Ψ(x) - target| ≤ tol`, linked when their purse
    /// distance is at most `link_radius` (default three grid spacings).
    pub fn fiber_on_grid(
        &self,
        grid: &PsiGrid,
        target: &[f64],
        tol: f64,
        link_radius: Option<f64>,
    ) -> Result<FiberSample> {
        let params = self.params();
        let m = params.n() - 1;
        if target.len() != m {
            return domain(format!("target must have {m} components"));
        }
        if norm(target) >= self.image_radius() {
            return domain("fiber target must lie inside the image disk");
        }
        if !(tol > 0.0) {
            return domain("tolerance must be positive");
        }
        let link = link_radius.unwrap_or(3.0 * grid.spacing);
        let r = params.r();
        let mass = triweight_mass(m) * tol.powi(m as i32);
        let mut chosen = Vec::new();
        let mut length = 0.0;
        for (i, p) in grid.psi.iter().enumerate() {
            let off = p.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if off <= tol {
                let x = &grid.points[i];
                let jac = self.normal_jacobian(x, grid.spacing * 1e-3)?;
                length += grid.weights[i] * (1.0 - (off / tol).powi(2)).powi(3) * jac / mass;
                chosen.push(i);
            }
        }
        if chosen.is_empty() {
            return Err(GeomError::Resolution(format!("empty fiber over {target:?} at tol {tol}")));
        }
        let pts: Vec<ModelPoint> = chosen.iter().map(|&i| grid.points[i].clone()).collect();
        let mut sets = DisjointSets::new(pts.len());
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                if sets.find(a) == sets.find(b) {
                    continue;
                }
                // Glued routes are at least as long as the two boundary legs.
                let (x, y) = (&pts[a], &pts[b]);
                let direct = modelspace::disk_distance(params.k(), x.t(), x.u(), y.t(), y.u());
                let linked = direct <= link
                    || ((r - x.t()) + (r - y.t()) <= link && self.emb.dist(x, y)? <= link);
                if linked {
                    sets.union(a, b);
                }
            }
        }
        let mut labels = std::collections::BTreeMap::new();
        let component_of: Vec<usize> = (0..pts.len())
            .map(|a| {
                let root = sets.find(a);
                let next = labels.len();
                *labels.entry(root).or_insert(next)
            })
            .collect();
        Ok(FiberSample {
            target: target.to_vec(),
            tol,
            points: pts,
            component_of,
            link_radius: link,
            components: labels.len(),
            length,
        })
    }

    /// `sqrt(det(DΨ DΨᵀ))` by finite differences.
    pub fn normal_jacobian(&self, x: &ModelPoint, h: f64) -> Result<f64> {
        let n = self.params().n();
        let mut rows = Vec::with_capacity(n - 1);
        for i in 1..n {
            rows.push(gradient(|y| self.emb.f_index(i, y), x, h)?);
        }
        let d = nalgebra::DMatrix::from_fn(n - 1, n, |a, b| rows[a][b]);
        Ok((&d * d.transpose()).determinant().max(0.0).sqrt())
    }
}

/// Orthonormal basis of the orthogonal complement of `constraints` in `R^n`.
fn complement(n: usize, constraints: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let reduce = |v: &mut Vec<f64>, basis: &[Vec<f64>]| {
        for b in basis {
            let c: f64 = v.iter().zip(b).map(|(p, q)| p * q).sum();
            v.iter_mut().zip(b).for_each(|(p, q)| *p -= c * q);
        }
        let m = norm(v);
        if m > 1e-6 {
            v.iter_mut().for_each(|p| *p /= m);
            true
        } else {
            false
        }
    };
    for c in constraints {
        let mut v = c.clone();
        if reduce(&mut v, &basis) {
            basis.push(v);
        }
    }
    let fixed = basis.len();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        if reduce(&mut v, &basis) {
            basis.push(v);
        }
    }
    basis.split_off(fixed)
}

/// Almost-horizontal space at `x`: the span of the directions to a strainer
/// of `want` pairs found among points `1.5 R` away along the level set of the
/// constraint functions. Coefficients are in [`tangent_basis`] at `x`.
fn horizontal_space(
    map: &PurseMap,
    x: &ModelPoint,
    constraints: &[Vec<f64>],
    want: usize,
    radius: f64,
    cfg: &ScanConfig,
    stream: u64,
) -> Result<Vec<Vec<f64>>> {
    let params = map.params();
    let n = params.n();
    let level = complement(n, constraints);
    if level.len() < want {
        return Err(GeomError::Setup(format!("level set at {} has too few directions", x.to_record())));
    }
    let basis = tangent_basis(x);
    let mut rng = rng_for(cfg.seed, 7000 + stream);
    let mut dirs: Vec<Vec<f64>> = level.iter().flat_map(|e| [e.clone(), e.iter().map(|c| -c).collect()]).collect();
    for _ in 0..8 {
        let c = modelspace::random_unit(&mut rng, level.len());
        let mut v = vec![0.0; n];
        for (ci, e) in c.iter().zip(&level) {
            v.iter_mut().zip(e).for_each(|(a, b)| *a += ci * b);
        }
        dirs.push(v);
    }
    let s = 1.5 * radius;
    let mut pool = vec![x.clone()];
    let mut pool_dirs = vec![Vec::new()];
    for c in dirs {
        let Ok(y) = geodesic_step(x, &combine(&basis, &c), s) else { continue };
        // Geodesics crossing the gluing locus stop minimizing soon; keep only
        // nearly minimizing ones, so that `c` is close to the direction to `y`.
        if map.emb.dist(x, &y)? >= s * (1.0 - 1e-3) {
            pool.push(y);
            pool_dirs.push(c);
        }
    }
    let space = FiniteMetricSpace::from_points(&pool, map.emb.solver(), params.k())?;
    let spec = find_strainer(&space, 0, want, cfg.strain_delta, radius)
        .ok_or_else(|| GeomError::Setup(format!("no horizontal strainer at {}", x.to_record())))?;
    let spans: Vec<Vec<f64>> = spec.pairs.iter().map(|&(a, _)| pool_dirs[a].clone()).collect();
    let orth = complement(n, &complement(n, &spans));
    if orth.len() != want {
        return Err(GeomError::Degenerate("strainer directions are dependent".into()));
    }
    Ok(orth)
}

/// `λ_est = min_{x, v} max_j |D_v F_j(x)|` over sampled `x` in the region and
/// unit `v` in the almost-horizontal space. In `E_0` (`|Ψ| < R - ε/2`) the
/// space has dimension `n - 1` inside the level set of `f_n` and `F = Ψ`; near
/// `S` (`|Ψ| ≥ R - ε/2`) it has dimension `n - 2`, is also tangent to the
/// level set of `|Ψ|`, and `F = g`.
pub fn submersion_scan(
    map: &PurseMap,
    cfg: &ScanConfig,
    region: PurseRegionSpec,
    points: usize,
    dirs_per_point: usize,
) -> Result<ScanReport> {
    let start = Instant::now();
    let params = map.params();
    cfg.validate(params)?;
    let n = params.n();
    if n < 3 && region.region == PurseRegion::E1 {
        return domain("the near-S scan needs n ≥ 3");
    }
    let mut rep = ScanReport::new("submersion", cfg.seed);
    rep.echo("kind", ModelKind::Purse);
    rep.echo("n", n);
    rep.echo("k", params.k());
    rep.echo("r", fmt_f64(params.r()));
    rep.echo("region", region.region);
    rep.echo("epsilon", fmt_f64(region.epsilon));
    rep.echo("points", points);
    rep.echo("dirs_per_point", dirs_per_point);
    rep.echo("mc_samples", cfg.mc_samples);
    rep.echo("seed", cfg.seed);
    let emb = map.embedding();
    let fields: Vec<Field<'_>> = (1..n).map(|i| emb.field(i, cfg)).collect::<Result<_>>()?;
    let split = map.image_radius() - region.epsilon / 2.0;
    // Strainer points stay closer to `x` than `S` is for points of `E_0`.
    let radius = cfg.strain_radius.min(region.epsilon / 4.0);
    let h = cfg.fd_step;

    let eval_psi = |y: &ModelPoint| -> Result<Vec<f64>> { fields.iter().map(|f| f.eval(y)).collect() };
    let mut xs = Vec::new();
    let mut batch = 0u64;
    while xs.len() < points && batch < 200 {
        for x in sample_points(params, ModelKind::Purse, 4 * points.max(1), SampleMode::Uniform, cfg.seed ^ (0x5B + batch)) {
            if xs.len() == points {
                break;
            }
            let m = norm(&map.psi(&x)?);
            let inside = match region.region {
                PurseRegion::E0 => m < split,
                PurseRegion::E1 => m >= split,
            };
            if inside && x.t() < params.r() - h {
                xs.push(x);
            }
        }
        batch += 1;
    }
    if xs.is_empty() {
        return Err(GeomError::Setup("no sample points in the region".into()));
    }

    let mut rng = rng_for(cfg.seed, 3);
    let mut worst = (f64::INFINITY, String::new());
    let mut table = Table::new("submersion", &["point", "direction", "max_abs_derivative"]);
    for (pi, x) in xs.iter().enumerate() {
        let fnx = gradient(|y| map.f_n(y), x, h)?;
        let (constraints, want) = match region.region {
            PurseRegion::E0 => (vec![fnx], n - 1),
            PurseRegion::E1 => {
                let rad = gradient(|y| Ok(norm(&map.psi(y)?)), x, h)?;
                (vec![fnx, rad], n - 2)
            }
        };
        let horiz = horizontal_space(map, x, &constraints, want, radius, cfg, pi as u64)?;
        let basis = tangent_basis(x);
        for di in 0..dirs_per_point {
            let c = modelspace::random_unit(&mut rng, want);
            let mut coeffs = vec![0.0; n];
            for (ci, e) in c.iter().zip(&horiz) {
                coeffs.iter_mut().zip(e).for_each(|(a, b)| *a += ci * b);
            }
            let v = combine(&basis, &coeffs);
            let mut best = 0.0f64;
            for j in 0..n - 1 {
                let dj = match region.region {
                    PurseRegion::E0 => directional_derivative(|y| fields[j].eval(y), x, &v, h)?,
                    PurseRegion::E1 => directional_derivative(|y| Ok(radial_unit(&eval_psi(y)?)?[j]), x, &v, h)?,
                };
                best = best.max(dj.abs());
            }
            table.push(vec![pi.to_string(), di.to_string(), fmt_f64(best)]);
            if best < worst.0 {
                worst = (best, x.to_record());
            }
        }
    }
    rep.set("lambda_est", worst.0);
    rep.set("points_scanned", xs.len() as f64);
    rep.witness("lambda_witness", vec![worst.1]);
    rep.check("lambda_positive", worst.0 > 0.0, format!("λ_est = {}", worst.0));
    rep.tables.push(table);
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}
