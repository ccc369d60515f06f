//! Distance-difference functions on the double disk and the purse, the map
//! `Φ = (f_0, ..., f_n)`, their ball-smoothed versions, finite-difference
//! derivatives and the injectivity, immersion and equicontinuity scans.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, GeomError, Result};
use crate::modelspace::{
    self, geodesic_step, involution_a, model_distance, rng_for, sample_ball, sample_points, tangent_basis,
    BasePoints, ModelKind, ModelParams, ModelPoint, SampleMode, SolverOpts,
};
use crate::report::{fmt_f64, ScanReport, Table};
use crate::spaceform::{Curvature, TangentVector};
use crate::strainer::{find_strainer, FiniteMetricSpace, OtsuShioyaChart};

/// The profile `h_k` composed with distances in `f_z = h∘d(Az, ·) - h∘d(z, ·)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileH {
    k: Curvature,
    r: f64,
}

impl ProfileH {
    pub fn new(k: Curvature, r: f64) -> Self {
        ProfileH { k, r }
    }

    /// `cosh(s)/(2 sinh r)`, `s²/(4r)` or `cos(s)/(2 sin r)`.
    pub fn eval(&self, s: f64) -> f64 {
        match self.k {
            Curvature::Negative => s.cosh() / (2.0 * self.r.sinh()),
            Curvature::Zero => s * s / (4.0 * self.r),
            Curvature::Positive => s.cos() / (2.0 * self.r.sin()),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self.k {
            Curvature::Negative => s.sinh() / (2.0 * self.r.sinh()),
            Curvature::Zero => s / (2.0 * self.r),
            Curvature::Positive => -s.sin() / (2.0 * self.r.sin()),
        }
    }
}

pub fn profile_h(p: &ProfileH, s: f64) -> f64 {
    p.eval(s)
}

/// Small parameters of the scans.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Smoothing radius of `f_{i,d}`.
    pub d: f64,
    /// Smoothing radius of the chart coordinates.
    pub eta: f64,
    /// Ball samples per smoothed function; 0 evaluates the unsmoothed functions.
    pub mc_samples: usize,
    pub fd_step: f64,
    /// Pairs closer than this are skipped by the injectivity scan.
    pub nu: f64,
    /// Locality radius of the equicontinuity scan.
    pub rho: f64,
    pub seed: u64,
    /// Strainer quality used when charts or horizontal spaces are needed.
    pub strain_delta: f64,
    /// Minimal distance from strainer points to the strained point.
    pub strain_radius: f64,
}

impl ScanConfig {
    pub fn defaults(params: ModelParams) -> Self {
        let r = params.r();
        ScanConfig {
            d: r / 500.0,
            eta: r / 100.0,
            mc_samples: 32,
            fd_step: 1e-5 * r,
            nu: 0.1,
            rho: r / 100.0,
            seed: 0,
            strain_delta: 0.3,
            strain_radius: r / 8.0,
        }
    }

    pub fn validate(&self, params: ModelParams) -> Result<()> {
        let r = params.r();
        if !(self.d > 0.0 && self.d < r / 100.0) {
            return domain(format!("smoothing radius d must lie in (0, r/100), got {}", self.d));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= 1e-3 * r) {
            return domain(format!("fd_step must lie in (0, 1e-3 r], got {}", self.fd_step));
        }
        if !(self.eta > 0.0) || !(self.rho > 0.0) || !(self.nu >= 0.0) {
            return domain("eta and rho must be positive and nu nonnegative");
        }
        if !(self.strain_delta > 0.0) || !(self.strain_radius > 0.0) {
            return domain("strain_delta and strain_radius must be positive");
        }
        Ok(())
    }
}

/// The functions `f_i = f_{p_i}` on a double disk or purse.
#[derive(Clone, Debug)]
pub struct Embedding {
    params: ModelParams,
    kind: ModelKind,
    base: BasePoints,
    images: Vec<ModelPoint>,
    h: ProfileH,
    opts: SolverOpts,
}

impl Embedding {
    pub fn new(params: ModelParams, kind: ModelKind) -> Result<Self> {
        if !matches!(kind, ModelKind::DoubleDisk | ModelKind::Purse) {
            return Err(GeomError::UnsupportedKind(kind));
        }
        let base = BasePoints::new(params, kind)?;
        let images = base.iter().map(involution_a).collect::<Result<Vec<_>>>()?;
        Ok(Embedding {
            params,
            kind,
            base,
            images,
            h: ProfileH::new(params.k(), params.r()),
            opts: SolverOpts::default(),
        })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn base_points(&self) -> &BasePoints {
        &self.base
    }

    /// `A(p_i)`.
    pub fn image(&self, i: usize) -> &ModelPoint {
        &self.images[i]
    }

    pub fn profile(&self) -> ProfileH {
        self.h
    }

    pub fn solver(&self) -> &SolverOpts {
        &self.opts
    }

    pub fn dist(&self, x: &ModelPoint, y: &ModelPoint) -> Result<f64> {
        model_distance(x, y, &self.opts)
    }

    /// `h(d(Az, x)) - h(d(z, x))` given `z` and `A(z)`.
    fn f_pair(&self, z: &ModelPoint, az: &ModelPoint, x: &ModelPoint) -> Result<f64> {
        Ok(self.h.eval(self.dist(az, x)?) - self.h.eval(self.dist(z, x)?))
    }

    pub fn f_point(&self, z: &ModelPoint, x: &ModelPoint) -> Result<f64> {
        self.f_pair(z, &involution_a(z)?, x)
    }

    /// `f_i(x) = f_{p_i}(x)`.
    pub fn f_index(&self, i: usize, x: &ModelPoint) -> Result<f64> {
        self.f_pair(self.base.get(i), &self.images[i], x)
    }

    pub fn phi(&self, x: &ModelPoint) -> Result<Vec<f64>> {
        (0..self.base.len()).map(|i| self.f_index(i, x)).collect()
    }

    /// The function used for index `i` under `cfg`: the point function when
    /// `cfg.mc_samples == 0`, else the average of `f_q` over a fixed sample of
    /// `q ∈ B(p_i, d)`, drawn once per `(seed, i)`.
    pub fn field(&self, i: usize, cfg: &ScanConfig) -> Result<Field<'_>> {
        if i >= self.base.len() {
            return domain(format!("index {i} out of range"));
        }
        let samples = if cfg.mc_samples == 0 {
            None
        } else {
            let seed = cfg.seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let qs = sample_ball(self.base.get(i), cfg.d, cfg.mc_samples, seed, &self.opts)?;
            Some(
                qs.into_iter()
                    .map(|q| {
                        let aq = involution_a(&q)?;
                        Ok((q, aq))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        Ok(Field { emb: self, i, samples })
    }

    pub fn fields(&self, cfg: &ScanConfig) -> Result<Vec<Field<'_>>> {
        (0..self.base.len()).map(|i| self.field(i, cfg)).collect()
    }
}

/// A (possibly smoothed) distance-difference function `f_i` or `f_{i,d}`.
pub struct Field<'a> {
    emb: &'a Embedding,
    i: usize,
    samples: Option<Vec<(ModelPoint, ModelPoint)>>,
}

impl Field<'_> {
    pub fn index(&self) -> usize {
        self.i
    }

    pub fn eval(&self, x: &ModelPoint) -> Result<f64> {
        Ok(self.eval_with_error(x)?.0)
    }

    /// Value and Monte Carlo standard error (0 for point functions).
    pub fn eval_with_error(&self, x: &ModelPoint) -> Result<(f64, f64)> {
        match &self.samples {
            None => Ok((self.emb.f_index(self.i, x)?, 0.0)),
            Some(s) => {
                let vals = s
                    .iter()
                    .map(|(q, aq)| self.emb.f_pair(q, aq, x))
                    .collect::<Result<Vec<f64>>>()?;
                let m = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / m;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
                Ok((mean, (var / m).sqrt()))
            }
        }
    }
}

pub fn f_point(z: &ModelPoint, x: &ModelPoint) -> Result<f64> {
    Embedding::new(z.params(), z.kind())?.f_point(z, x)
}

pub fn phi(x: &ModelPoint) -> Result<Vec<f64>> {
    Embedding::new(x.params(), x.kind())?.phi(x)
}

pub fn f_smoothed(i: usize, x: &ModelPoint, cfg: &ScanConfig) -> Result<f64> {
    Embedding::new(x.params(), x.kind())?.field(i, cfg)?.eval(x)
}

/// Finite-difference derivative of `f` at `x` along the unit tangent `v`.
///
/// Central differences with step `h`; within `h` of the gluing locus a forward
/// difference along the model geodesic. On the plain disk a step leaving the
/// disk is retried with halved steps before failing.
pub fn directional_derivative<F>(f: F, x: &ModelPoint, v: &TangentVector, h: f64) -> Result<f64>
where
    F: Fn(&ModelPoint) -> Result<f64>,
{
    let r = x.params().r();
    if x.kind() == ModelKind::Disk {
        let mut step = h;
        for _ in 0..5 {
            if let (Ok(a), Ok(b)) = (geodesic_step(x, v, step), geodesic_step(x, v, -step)) {
                return Ok((f(&a)? - f(&b)?) / (2.0 * step));
            }
            if let Ok(a) = geodesic_step(x, v, step) {
                return Ok((f(&a)? - f(x)?) / step);
            }
            step *= 0.5;
        }
        return domain("finite-difference step leaves the disk");
    }
    if x.t() >= r - h {
        let a = geodesic_step(x, v, h)?;
        return Ok((f(&a)? - f(x)?) / h);
    }
    let a = geodesic_step(x, v, h)?;
    let b = geodesic_step(x, v, -h)?;
    Ok((f(&a)? - f(&b)?) / (2.0 * h))
}

/// Finite-difference gradient in the orthonormal basis [`tangent_basis`] at `x`.
pub fn gradient<F>(f: F, x: &ModelPoint, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&ModelPoint) -> Result<f64>,
{
    tangent_basis(x).iter().map(|e| directional_derivative(&f, x, e, h)).collect()
}

fn unit_directions_2d(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|j| {
            let a = std::f64::consts::PI * 2.0 * j as f64 / count as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Coefficient vectors of unit directions in a tangent basis: evenly spaced
/// for `n = 2`, seeded random otherwise.
fn direction_coeffs<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    if n == 2 {
        unit_directions_2d(count)
    } else {
        (0..count).map(|_| modelspace::random_unit(rng, n)).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn echo_cfg(rep: &mut ScanReport, emb: &Embedding, cfg: &ScanConfig) {
    let p = emb.params();
    rep.echo("kind", emb.kind());
    rep.echo("n", p.n());
    rep.echo("k", p.k());
    rep.echo("r", fmt_f64(p.r()));
    rep.echo("d", fmt_f64(cfg.d));
    rep.echo("eta", fmt_f64(cfg.eta));
    rep.echo("mc_samples", cfg.mc_samples);
    rep.echo("fd_step", fmt_f64(cfg.fd_step));
    rep.echo("nu", fmt_f64(cfg.nu));
    rep.echo("rho", fmt_f64(cfg.rho));
    rep.echo("seed", cfg.seed);
}

/// `min |Φ(x) - Φ(y)|` over seeded random pairs with `d(x, y) > ν`.
pub fn injectivity_scan(emb: &Embedding, cfg: &ScanConfig, pairs: usize) -> Result<ScanReport> {
    let start = Instant::now();
    cfg.validate(emb.params())?;
    let mut rep = ScanReport::new("injectivity", cfg.seed);
    echo_cfg(&mut rep, emb, cfg);
    rep.echo("pairs", pairs);
    let fields = emb.fields(cfg)?;
    let phi = |x: &ModelPoint| fields.iter().map(|f| f.eval(x)).collect::<Result<Vec<f64>>>();
    let pts = sample_points(emb.params(), emb.kind(), 2 * pairs, SampleMode::Uniform, cfg.seed);
    let mut best = (f64::INFINITY, 0usize);
    let mut used = 0usize;
    for (j, pair) in pts.chunks(2).enumerate() {
        let (x, y) = (&pair[0], &pair[1]);
        if emb.dist(x, y)? <= cfg.nu {
            continue;
        }
        used += 1;
        let (px, py) = (phi(x)?, phi(y)?);
        let sep = px.iter().zip(&py).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if sep < best.0 {
            best = (sep, j);
        }
    }
    rep.set("min_separation", best.0);
    rep.set("pairs_used", used as f64);
    if used > 0 {
        let w = &pts[2 * best.1..2 * best.1 + 2];
        rep.witness("closest_pair", w.iter().map(|p| p.to_record()).collect());
    }
    rep.check("separation_positive", used > 0 && best.0 > 0.0, format!("min |Φ(x)-Φ(y)| = {}", best.0));
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

/// Directional derivatives `D_v F_j` of every field for each direction.
/// Interior points use a finite-difference gradient; points within `h` of the
/// gluing locus are differenced per direction (one-sided).
fn derivative_table(fields: &[Field<'_>], x: &ModelPoint, coeffs: &[Vec<f64>], h: f64) -> Result<Vec<Vec<f64>>> {
    let basis = tangent_basis(x);
    let near_glue = x.t() >= x.params().r() - h;
    if near_glue {
        coeffs
            .iter()
            .map(|c| {
                let v = modelspace::combine(&basis, c);
                fields.iter().map(|f| directional_derivative(|y| f.eval(y), x, &v, h)).collect()
            })
            .collect()
    } else {
        let grads = fields
            .iter()
            .map(|f| basis.iter().map(|e| directional_derivative(|y| f.eval(y), x, e, h)).collect())
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(coeffs.iter().map(|c| grads.iter().map(|g| dot(g, c)).collect()).collect())
    }
}

/// `λ_est = min_{x, v} max_j |D_v f_j(x)|` over a grid of points and unit
/// directions, plus the index-exclusion check near every `p_k` and `A(p_k)`:
/// there `max_{j≠k} |D_v f_j|` must stay positive.
pub fn immersion_scan(emb: &Embedding, cfg: &ScanConfig, points: usize, dirs_per_point: usize) -> Result<ScanReport> {
    let start = Instant::now();
    cfg.validate(emb.params())?;
    let params = emb.params();
    let n = params.n();
    let mut rep = ScanReport::new("immersion", cfg.seed);
    echo_cfg(&mut rep, emb, cfg);
    rep.echo("points", points);
    rep.echo("dirs_per_point", dirs_per_point);
    let fields = emb.fields(cfg)?;
    let mut rng = rng_for(cfg.seed, 2);
    let mut table = Table::new("directions", &["point", "direction", "best_index", "max_abs_derivative"]);

    let grid = sample_points(params, emb.kind(), points, SampleMode::Grid, cfg.seed);
    let mut lambda = (f64::INFINITY, String::new(), Vec::new());
    for (pi, x) in grid.iter().enumerate() {
        let coeffs = direction_coeffs(n, dirs_per_point, &mut rng);
        let table_d = derivative_table(&fields, x, &coeffs, cfg.fd_step)?;
        for (vi, ders) in table_d.iter().enumerate() {
            let (j, m) = argmax_abs(ders, None);
            table.push(vec![pi.to_string(), vi.to_string(), j.to_string(), fmt_f64(m)]);
            if m < lambda.0 {
                lambda = (m, x.to_record(), coeffs[vi].clone());
            }
        }
    }
    rep.set("lambda_est", lambda.0);
    rep.set("points_scanned", grid.len() as f64);
    rep.witness(
        "lambda_witness",
        vec![lambda.1.clone(), lambda.2.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(" ")],
    );
    rep.check("lambda_positive", lambda.0 > 0.0, format!("λ_est = {}", lambda.0));

    // Probe points within ε = r/20 of each pole p_k and A(p_k).
    let eps = params.r() / 20.0;
    let mut pole_min = (f64::INFINITY, String::new());
    let mut probes = 0usize;
    for kk in 0..=n {
        for centre in [emb.base_points().get(kk), emb.image(kk)] {
            for m in 0..6 {
                let dist = eps * (m as f64 + 1.0) / 6.0;
                let v = modelspace::random_tangent(centre, &mut rng);
                let x = geodesic_step(centre, &v, dist)?;
                let coeffs = direction_coeffs(n, dirs_per_point, &mut rng);
                for ders in derivative_table(&fields, &x, &coeffs, cfg.fd_step)? {
                    probes += 1;
                    let (_, m_excl) = argmax_abs(&ders, Some(kk));
                    if m_excl < pole_min.0 {
                        pole_min = (m_excl, x.to_record());
                    }
                }
            }
        }
    }
    rep.set("pole_exclusion_min", pole_min.0);
    rep.set("pole_probes", probes as f64);
    rep.witness("pole_exclusion_witness", vec![pole_min.1]);
    rep.check(
        "pole_index_exclusion",
        pole_min.0 > 0.0,
        format!("min over probes of max_(j≠k) |D_v f_j| = {}", pole_min.0),
    );
    rep.tables.push(table);
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

fn argmax_abs(values: &[f64], skip: Option<usize>) -> (usize, f64) {
    let mut best = (usize::MAX, -1.0);
    for (j, v) in values.iter().enumerate() {
        if Some(j) != skip && v.abs() > best.1 {
            best = (j, v.abs());
        }
    }
    best
}

/// Strainer at `x` picked from seeded candidates at distance in `[R, 2R]`.
pub fn local_strainer(emb: &Embedding, x: &ModelPoint, cfg: &ScanConfig, stream: u64) -> Result<Vec<ModelPoint>> {
    let params = emb.params();
    let radius = cfg.strain_radius;
    let mut rng = rng_for(cfg.seed, 1000 + stream);
    let mut pool = vec![x.clone()];
    let basis = tangent_basis(x);
    let mut dirs: Vec<TangentVector> = basis.iter().flat_map(|e| [e.clone(), e.scaled(-1.0)]).collect();
    dirs.extend((0..32).map(|_| modelspace::random_tangent(x, &mut rng)));
    for (i, v) in dirs.iter().enumerate() {
        let s = if i < 2 * basis.len() { 1.5 * radius } else { radius * (1.0 + rng.random::<f64>()) };
        let y = match geodesic_step(x, v, s) {
            Ok(y) => y,
            Err(_) => continue,
        };
        let d = emb.dist(x, &y)?;
        if d > radius && d < 2.0 * radius {
            pool.push(y);
        }
    }
    let space = FiniteMetricSpace::from_points(&pool, emb.solver(), params.k())?;
    let spec = find_strainer(&space, 0, params.n(), cfg.strain_delta, radius)
        .ok_or_else(|| GeomError::Setup(format!("no strainer found at {}", x.to_record())))?;
    Ok(spec.pairs.iter().map(|&(a, _)| pool[a].clone()).collect())
}

/// Jacobian of the chart at `x` in the orthonormal basis at `x`.
fn chart_jacobian(chart: &OtsuShioyaChart, x: &ModelPoint, h: f64) -> Result<DMatrix<f64>> {
    let basis = tangent_basis(x);
    let n = basis.len();
    let mut j = DMatrix::zeros(n, n);
    for (m, e) in basis.iter().enumerate() {
        let a = geodesic_step(x, e, h)?;
        let b = geodesic_step(x, e, -h)?;
        let (ca, cb) = (chart.eval(&a)?, chart.eval(&b)?);
        for i in 0..n {
            j[(i, m)] = (ca[i] - cb[i]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Derivative data at a base point `x` for comparing differentials at nearby
/// points through the smoothed strainer chart at `x`.
pub struct LocalFrame<'a> {
    fields: &'a [Field<'a>],
    x: ModelPoint,
    chart: OtsuShioyaChart,
    jx: DMatrix<f64>,
    active: Vec<usize>,
    grads_x: Vec<DVector<f64>>,
    h: f64,
}

impl<'a> LocalFrame<'a> {
    /// Indices `j` with `x` within `100 d` of `p_j` or `A(p_j)` are left out,
    /// since `f_j` is not C¹ there.
    pub fn new(emb: &Embedding, fields: &'a [Field<'a>], x: &ModelPoint, cfg: &ScanConfig, stream: u64) -> Result<Self> {
        let h = cfg.fd_step;
        let mut active = Vec::new();
        for j in 0..fields.len() {
            let near = emb.dist(x, emb.base_points().get(j))?.min(emb.dist(x, emb.image(j))?);
            if near > 100.0 * cfg.d {
                active.push(j);
            }
        }
        let anchors = local_strainer(emb, x, cfg, stream)?;
        let chart = OtsuShioyaChart::new(&anchors, cfg.eta, cfg.mc_samples.max(1), cfg.seed ^ stream, emb.solver())?;
        let jx = chart_jacobian(&chart, x, h)?;
        let grads_x = active
            .iter()
            .map(|&j| Ok(DVector::from_vec(gradient(|y| fields[j].eval(y), x, h)?)))
            .collect::<Result<_>>()?;
        Ok(LocalFrame { fields, x: x.clone(), chart, jx, active, grads_x, h })
    }

    pub fn base(&self) -> &ModelPoint {
        &self.x
    }

    /// `(j, sup_{|v|=1} |D_v f_j(x) - D_{P v} f_j(y)|)` for every active index,
    /// or `None` when the chart differential at `y` is singular.
    pub fn defects(&self, y: &ModelPoint) -> Result<Option<Vec<(usize, f64)>>> {
        let jy = chart_jacobian(&self.chart, y, self.h)?;
        let Some(inv) = jy.try_inverse() else {
            return Ok(None);
        };
        let pt = (inv * &self.jx).transpose();
        let mut out = Vec::with_capacity(self.active.len());
        for (gx, &j) in self.grads_x.iter().zip(&self.active) {
            let gy = DVector::from_vec(gradient(|z| self.fields[j].eval(z), y, self.h)?);
            // sup over unit v of |g_x·v - g_y·(P v)| = |g_x - Pᵀ g_y|.
            out.push((j, (gx - &pt * gy).norm()));
        }
        Ok(Some(out))
    }
}

/// Largest transport defect `|D_v f_j(x) - D_{P v} f_j(y)|` over unit `v`,
/// pairs `d(x, y) ≤ ρ` and non-excluded indices, with `P = J_y⁻¹ J_x` from
/// the smoothed strainer chart at `x`; compared against `λ/2`.
///
/// Base points are uniform samples; the `y` are taken at geodesic distances
/// `j·r/400 ≤ ρ` from `x` along two seeded directions, so scans at nested radii
/// use nested pair sets.
pub fn equicontinuity_scan(emb: &Embedding, cfg: &ScanConfig, points: usize, lambda: f64) -> Result<ScanReport> {
    let start = Instant::now();
    cfg.validate(emb.params())?;
    let params = emb.params();
    let r = params.r();
    let h = cfg.fd_step;
    let mut rep = ScanReport::new("equicontinuity", cfg.seed);
    echo_cfg(&mut rep, emb, cfg);
    rep.echo("points", points);
    rep.echo("lambda", fmt_f64(lambda));
    let fields = emb.fields(cfg)?;
    let xs = sample_points(params, emb.kind(), points, SampleMode::Uniform, cfg.seed ^ 0xE0);
    let lengths: Vec<f64> = (1..).map(|j| j as f64 * r / 400.0).take_while(|&s| s <= cfg.rho * (1.0 + 1e-12)).collect();
    let mut worst = (0.0f64, Vec::new());
    let mut worst_interior = 0.0f64;
    let mut table = Table::new("pairs", &["x", "y", "index", "defect"]);
    let mut skipped = 0usize;
    let mut pairs = 0usize;
    for (pi, x) in xs.iter().enumerate() {
        if x.t() >= r - h {
            skipped += 1;
            continue;
        }
        let frame = LocalFrame::new(emb, &fields, x, cfg, pi as u64)?;
        let mut rng = rng_for(cfg.seed, 5000 + pi as u64);
        let dirs: Vec<TangentVector> = (0..2).map(|_| modelspace::random_tangent(x, &mut rng)).collect();
        for v in &dirs {
            for &s in &lengths {
                let y = geodesic_step(x, v, s)?;
                if y.t() >= r - h {
                    skipped += 1;
                    continue;
                }
                let Some(defects) = frame.defects(&y)? else {
                    skipped += 1;
                    continue;
                };
                pairs += 1;
                let interior = r - x.t() >= cfg.rho && r - y.t() >= cfg.rho && x.sheet() == y.sheet();
                for (j, defect) in defects {
                    if interior {
                        worst_interior = worst_interior.max(defect);
                    }
                    table.push(vec![pi.to_string(), fmt_f64(s), j.to_string(), fmt_f64(defect)]);
                    if defect > worst.0 {
                        worst = (defect, vec![x.to_record(), y.to_record(), format!("index {j}")]);
                    }
                }
            }
        }
    }
    rep.set("max_defect", worst.0);
    // Pairs with both points at least ρ away from the gluing locus.
    rep.set("max_defect_interior", worst_interior);
    rep.set("lambda", lambda);
    rep.set("pairs_tested", pairs as f64);
    rep.set("pairs_skipped", skipped as f64);
    rep.witness("worst_pair", worst.1);
    rep.check(
        "defect_below_half_lambda",
        pairs > 0 && worst.0 < lambda / 2.0,
        format!("max defect {} vs λ/2 = {}", worst.0, lambda / 2.0),
    );
    rep.tables.push(table);
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}
