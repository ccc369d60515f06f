//! The model spaces: the disk, the double disk, the crosscap and the purse.
//!
//! Every model is built from copies of the metric disk `D = D_k^n(r)` centred
//! at `e_0`. A point is stored in normal polar coordinates `(t, u, sheet)`
//! about the centre of its sheet, where `t ∈ [0, r]` and `u ∈ S^{n-1}`.
//!
//! * `Disk`: a single disk.
//! * `DoubleDisk`: two disks with `(r, u, +) ~ (r, u, -)`; the free involution
//!   is `A(t, u, σ) = (t, -u, -σ)`, which on the sphere model is `x ↦ -x`.
//! * `Crosscap`: one disk with `(r, u) ~ (r, -u)`, i.e. the double disk modulo `A`.
//! * `Purse`: one disk with `v ~ R(v)` on the boundary, `R` the reflection
//!   negating the last coordinate.
//!
//! Distances through a gluing are found by minimising over the crossing point.
//! For two points with directions at angle `θ`, any crossing direction `b` can
//! be replaced by one on the great arc joining the two directions without
//! increasing either leg, so the search is one-dimensional over that arc.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, GeomError, Result};
use crate::spaceform::{self, ball_volume, Curvature, SpaceFormPoint, TangentVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n: usize,
    k: Curvature,
    r: f64,
}

impl ModelParams {
    pub fn new(n: usize, k: Curvature, r: f64) -> Result<Self> {
        if n < 2 {
            return domain(format!("model dimension must be at least 2, got {n}"));
        }
        if !(r > 0.0) || !r.is_finite() {
            return domain(format!("radius must be positive, got {r}"));
        }
        if k == Curvature::Positive && r >= PI / 2.0 {
            return domain(format!("spherical models need r < π/2, got {r}"));
        }
        Ok(ModelParams { n, k, r })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> Curvature {
        self.k
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Radius of the image of the disk under the coordinate functions: `sn_k(r)`.
    pub fn coordinate_radius(&self) -> f64 {
        self.k.sn(self.r)
    }

    fn snap(&self, t: f64) -> f64 {
        if (t - self.r).abs() <= 1e-12 * self.r.max(1.0) {
            self.r
        } else if t.abs() <= 1e-14 {
            0.0
        } else {
            t
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Disk,
    DoubleDisk,
    Crosscap,
    Purse,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Disk,
        ModelKind::DoubleDisk,
        ModelKind::Crosscap,
        ModelKind::Purse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Disk => "disk",
            ModelKind::DoubleDisk => "double-disk",
            ModelKind::Crosscap => "crosscap",
            ModelKind::Purse => "purse",
        }
    }

    fn sheets(self) -> usize {
        match self {
            ModelKind::DoubleDisk => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GeomError::Parse(format!("unknown model kind '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sheet {
        match self {
            Sheet::Plus => Sheet::Minus,
            Sheet::Minus => Sheet::Plus,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Sheet::Plus => "+",
            Sheet::Minus => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    params: ModelParams,
    kind: ModelKind,
    t: f64,
    u: Vec<f64>,
    sheet: Sheet,
}

fn lex_greater(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x > y;
        }
    }
    false
}

fn unit_e1(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    e
}

impl ModelPoint {
    /// Builds a point in canonical form.
    ///
    /// `t = 0` forces `u = e_1`; at `t = r` the representative lives on the `+`
    /// sheet, and for the crosscap (purse) `u` is chosen over `-u` (`R(u)`) by
    /// lexicographic order. On the crosscap a `-` sheet point is read as a point
    /// of the double disk and mapped down by `A`.
    pub fn new(params: ModelParams, kind: ModelKind, t: f64, u: Vec<f64>, sheet: Sheet) -> Result<Self> {
        if u.len() != params.n {
            return domain(format!("direction has {} components, expected {}", u.len(), params.n));
        }
        if !t.is_finite() || t < -1e-14 || t > params.r * (1.0 + 1e-12) + 1e-14 {
            return domain(format!("radial coordinate {t} outside [0, {}]", params.r));
        }
        let norm = u.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return domain(format!("direction is not a unit vector (|u| = {norm})"));
        }
        let mut u: Vec<f64> = u.iter().map(|c| c / norm).collect();
        let mut sheet = sheet;
        match (kind, sheet) {
            (ModelKind::Disk | ModelKind::Purse, Sheet::Minus) => {
                return domain(format!("{kind} points have a single sheet"));
            }
            (ModelKind::Crosscap, Sheet::Minus) => {
                u.iter_mut().for_each(|c| *c = -*c);
                sheet = Sheet::Plus;
            }
            _ => {}
        }
        let t = params.snap(t.max(0.0));
        if t == 0.0 {
            u = unit_e1(params.n);
        } else if t == params.r {
            sheet = Sheet::Plus;
            match kind {
                ModelKind::Crosscap => {
                    let neg: Vec<f64> = u.iter().map(|c| -c).collect();
                    if lex_greater(&neg, &u) {
                        u = neg;
                    }
                }
                ModelKind::Purse => {
                    let last = u.len() - 1;
                    if u[last] < 0.0 {
                        u[last] = -u[last];
                    }
                }
                _ => {}
            }
        }
        Ok(ModelPoint { params, kind, t, u, sheet })
    }

    pub fn center(params: ModelParams, kind: ModelKind, sheet: Sheet) -> Result<Self> {
        ModelPoint::new(params, kind, 0.0, unit_e1(params.n), sheet)
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn sheet(&self) -> Sheet {
        self.sheet
    }

    pub fn on_gluing_locus(&self) -> bool {
        self.t == self.params.r
    }

    /// Spatial ambient coordinates `x_1..x_n = sn_k(t) u`.
    pub fn coords(&self) -> Vec<f64> {
        let s = self.params.k.sn(self.t);
        self.u.iter().map(|c| s * c).collect()
    }

    /// Ambient realisation: `exp_k(±e_0, u, t)` in the space form.
    pub fn ambient(&self) -> SpaceFormPoint {
        let k = self.params.k;
        let mut coords = Vec::with_capacity(self.params.n + 1);
        coords.push(self.sheet.sign() * k.cs(self.t));
        let s = k.sn(self.t);
        coords.extend(self.u.iter().map(|c| s * c));
        SpaceFormPoint::from_raw(k, coords)
    }

    /// Inverse of [`ModelPoint::ambient`] for a point of the given sheet.
    pub fn from_ambient(params: ModelParams, kind: ModelKind, sheet: Sheet, x: &SpaceFormPoint) -> Result<Self> {
        if x.curvature() != params.k || x.dim() != params.n {
            return domain("ambient point does not belong to this model");
        }
        let centre = SpaceFormPoint::pole(params.k, params.n, sheet.sign());
        let t = spaceform::distance(&centre, x)?;
        let spatial = &x.coords()[1..];
        let norm = spatial.iter().map(|c| c * c).sum::<f64>().sqrt();
        let u = if norm > 0.0 {
            spatial.iter().map(|c| c / norm).collect()
        } else {
            unit_e1(params.n)
        };
        let t = if t > params.r && t <= params.r * (1.0 + 1e-9) { params.r } else { t };
        ModelPoint::new(params, kind, t, u, sheet)
    }

    /// The same coordinates read as a point of another model kind.
    pub fn with_kind(&self, kind: ModelKind) -> Result<Self> {
        ModelPoint::new(self.params, kind, self.t, self.u.clone(), self.sheet)
    }

    /// Plain-text record `kind k n r t u... sheet` with 17 significant digits.
    pub fn to_record(&self) -> String {
        let mut s = format!(
            "{} {} {} {:.16e} {:.16e}",
            self.kind, self.params.k, self.params.n, self.params.r, self.t
        );
        for c in &self.u {
            s.push_str(&format!(" {c:.16e}"));
        }
        s.push(' ');
        s.push_str(self.sheet.symbol());
        s
    }

    pub fn from_record(line: &str) -> Result<Self> {
        let tok: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| GeomError::Parse(format!("bad model point record ({what}): '{line}'"));
        if tok.len() < 6 {
            return Err(bad("too few fields"));
        }
        let kind: ModelKind = tok[0].parse()?;
        let k = Curvature::from_value(tok[1].parse().map_err(|_| bad("k"))?)?;
        let n: usize = tok[2].parse().map_err(|_| bad("n"))?;
        if tok.len() != 5 + n + 1 {
            return Err(bad("field count"));
        }
        let r: f64 = tok[3].parse().map_err(|_| bad("r"))?;
        let t: f64 = tok[4].parse().map_err(|_| bad("t"))?;
        let u = tok[5..5 + n]
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad("u")))
            .collect::<Result<Vec<_>>>()?;
        let sheet = match tok[5 + n] {
            "+" => Sheet::Plus,
            "-" => Sheet::Minus,
            _ => return Err(bad("sheet")),
        };
        ModelPoint::new(ModelParams::new(n, k, r)?, kind, t, u, sheet)
    }
}

/// `p_0` (the centre) and the reference points `p_1..p_n` on the boundary sphere.
#[derive(Clone, Debug)]
pub struct BasePoints {
    points: Vec<ModelPoint>,
}

impl BasePoints {
    /// `p_i = cosh(r)e_0 + sinh(r)e_i`, `e_0 + r e_i`, `cos(r)e_0 - sin(r)e_i` for `k = -1, 0, 1`.
    pub fn new(params: ModelParams, kind: ModelKind) -> Result<Self> {
        let n = params.n;
        let mut points = vec![ModelPoint::center(params, kind, Sheet::Plus)?];
        let sign = if params.k == Curvature::Positive { -1.0 } else { 1.0 };
        for i in 0..n {
            let mut u = vec![0.0; n];
            u[i] = sign;
            points.push(ModelPoint::new(params, kind, params.r, u, Sheet::Plus)?);
        }
        Ok(BasePoints { points })
    }

    pub fn get(&self, i: usize) -> &ModelPoint {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModelPoint> {
        self.points.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOpts {
    /// Convergence tolerance of the crossing-point search.
    pub tol: f64,
    pub max_restarts: usize,
    /// Size of the coarse grid on the crossing arc before local refinement.
    pub coarse_samples: usize,
}

impl Default for SolverOpts {
    fn default() -> Self {
        SolverOpts { tol: 1e-10, max_restarts: 3, coarse_samples: 64 }
    }
}

/// The involution `A`.
///
/// On the double disk `(t, u, σ) ↦ (t, -u, -σ)`; on the purse the induced map
/// `(t, u) ↦ (t, -u)`; on the crosscap (the quotient by `A`) the identity.
pub fn involution_a(x: &ModelPoint) -> Result<ModelPoint> {
    let neg: Vec<f64> = x.u.iter().map(|c| -c).collect();
    match x.kind {
        ModelKind::Disk => Err(GeomError::UnsupportedKind(ModelKind::Disk)),
        ModelKind::DoubleDisk => ModelPoint::new(x.params, x.kind, x.t, neg, x.sheet.flip()),
        ModelKind::Crosscap => Ok(x.clone()),
        ModelKind::Purse => ModelPoint::new(x.params, x.kind, x.t, neg, Sheet::Plus),
    }
}

/// Reflection `R` in the hyperplane spanned by `e_0, ..., e_{n-1}`.
pub fn reflect_r(x: &ModelPoint) -> ModelPoint {
    let mut u = x.u.clone();
    let last = u.len() - 1;
    u[last] = -u[last];
    ModelPoint::new(x.params, x.kind, x.t, u, x.sheet).expect("reflection preserves validity")
}

fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let (mut d, mut s) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        d += (x - y) * (x - y);
        s += (x + y) * (x + y);
    }
    2.0 * d.sqrt().atan2(s.sqrt())
}

/// Distance inside one disk between `(t1, u1)` and `(t2, u2)`.
pub(crate) fn disk_distance(k: Curvature, t1: f64, u1: &[f64], t2: f64, u2: &[f64]) -> f64 {
    let (s1, s2) = (k.sn(t1), k.sn(t2));
    let d0 = k.cs(t1) - k.cs(t2);
    let spatial: f64 = u1.iter().zip(u2).map(|(a, b)| (s1 * a - s2 * b).powi(2)).sum();
    let c2 = match k {
        Curvature::Positive => spatial + d0 * d0,
        Curvature::Zero => spatial,
        Curvature::Negative => spatial - d0 * d0,
    };
    k.distance_from_chord2(c2)
}

/// Disk distance between radii `ta`, `tb` whose directions make angle `alpha`.
fn planar_distance(k: Curvature, ta: f64, tb: f64, alpha: f64) -> f64 {
    let (sa, sb) = (k.sn(ta), k.sn(tb));
    let d0 = k.cs(ta) - k.cs(tb);
    let (sin_a, cos_a) = alpha.sin_cos();
    let spatial = (sa - sb * cos_a).powi(2) + (sb * sin_a).powi(2);
    let c2 = match k {
        Curvature::Positive => spatial + d0 * d0,
        Curvature::Zero => spatial,
        Curvature::Negative => spatial - d0 * d0,
    };
    k.distance_from_chord2(c2)
}

/// Shortest path from `(t1, u1)` to `(t2, u2)` read on the other side of a gluing,
/// i.e. `min_b d(x, b) + d(b, y)` over boundary points `b`, where the directions
/// of `x` and `y` make angle `theta`.
pub(crate) fn crossing_distance(
    k: Curvature,
    r: f64,
    t1: f64,
    t2: f64,
    theta: f64,
    opts: &SolverOpts,
) -> Result<f64> {
    if t1 >= r || t2 >= r {
        return Ok(planar_distance(k, t1, t2, theta));
    }
    if t1 == 0.0 {
        return Ok(2.0 * r - t2);
    }
    if t2 == 0.0 {
        return Ok(2.0 * r - t1);
    }
    if theta <= 0.0 {
        return Ok(2.0 * r - t1 - t2);
    }
    let (s1, c1) = (k.sn(t1), k.cs(t1));
    let (s2, c2) = (k.sn(t2), k.cs(t2));
    let (sr, cr) = (k.sn(r), k.cs(r));
    let leg = |s: f64, c: f64, alpha: f64| {
        let d0 = c - cr;
        let spatial = s * s + sr * sr - 2.0 * s * sr * alpha.cos();
        let c2 = match k {
            Curvature::Positive => spatial + d0 * d0,
            Curvature::Zero => spatial,
            Curvature::Negative => spatial - d0 * d0,
        };
        k.distance_from_chord2(c2)
    };
    let phi = |s: f64| leg(s1, c1, s) + leg(s2, c2, theta - s);
    minimise_on_interval(phi, 0.0, theta, opts)
}

fn minimise_on_interval<F: Fn(f64) -> f64>(phi: F, lo: f64, hi: f64, opts: &SolverOpts) -> Result<f64> {
    let m = opts.coarse_samples.max(3);
    let h = (hi - lo) / (m - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..m)
        .map(|j| {
            let s = if j == m - 1 { hi } else { lo + h * j as f64 };
            (s, phi(s))
        })
        .collect();
    let mut seeds: Vec<usize> = (0..m)
        .filter(|&j| {
            let v = grid[j].1;
            (j == 0 || v <= grid[j - 1].1) && (j == m - 1 || v <= grid[j + 1].1)
        })
        .collect();
    seeds.sort_by(|&a, &b| grid[a].1.total_cmp(&grid[b].1).then(a.cmp(&b)));
    seeds.truncate(3);

    let mut best = grid.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let mut all_converged = true;
    for &j in &seeds {
        let a = grid[j.saturating_sub(1)].0;
        let b = grid[(j + 1).min(m - 1)].0;
        let mut done = None;
        for attempt in 0..=opts.max_restarts {
            let (x, fx, ok) = brent(&phi, a, b, grid[j].0, opts.tol, 100 * (attempt + 1));
            if fx < best {
                best = fx;
            }
            if ok {
                done = Some(x);
                break;
            }
        }
        all_converged &= done.is_some();
    }
    if !all_converged {
        return Err(GeomError::Numerical {
            msg: "crossing-point search did not converge".into(),
            best,
        });
    }
    Ok(best)
}

/// Brent's minimiser on `[a, b]` starting from `x0`. Returns `(x, f(x), converged)`.
fn brent<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, x0: f64, tol: f64, max_iter: usize) -> (f64, f64, bool) {
    const CGOLD: f64 = 0.381_966_011_250_105;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            return (x, fx, true);
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx, false)
}

fn check_same_model(x: &ModelPoint, y: &ModelPoint) -> Result<()> {
    if x.kind != y.kind || x.params != y.params {
        return domain("points belong to different models");
    }
    Ok(())
}

/// Intrinsic distance on the model the two points belong to.
pub fn model_distance(x: &ModelPoint, y: &ModelPoint, opts: &SolverOpts) -> Result<f64> {
    check_same_model(x, y)?;
    let ModelParams { k, r, .. } = x.params;
    match x.kind {
        ModelKind::Disk => Ok(disk_distance(k, x.t, &x.u, y.t, &y.u)),
        ModelKind::DoubleDisk => {
            if x.sheet == y.sheet || x.t >= r || y.t >= r {
                Ok(disk_distance(k, x.t, &x.u, y.t, &y.u))
            } else {
                crossing_distance(k, r, x.t, y.t, angle_between(&x.u, &y.u), opts)
            }
        }
        ModelKind::Crosscap | ModelKind::Purse => {
            let direct = disk_distance(k, x.t, &x.u, y.t, &y.u);
            let mut image = y.u.clone();
            if x.kind == ModelKind::Crosscap {
                image.iter_mut().for_each(|c| *c = -*c);
            } else {
                let last = image.len() - 1;
                image[last] = -image[last];
            }
            // The glued route is never shorter than the disk distance to the image.
            if disk_distance(k, x.t, &x.u, y.t, &image) >= direct {
                return Ok(direct);
            }
            let glued = crossing_distance(k, r, x.t, y.t, angle_between(&x.u, &image), opts)?;
            Ok(direct.min(glued))
        }
    }
}

/// Radial foot of `x` on the boundary sphere and the distance to it.
pub fn nearest_boundary(x: &ModelPoint) -> (ModelPoint, f64) {
    let r = x.params.r;
    let b = ModelPoint::new(x.params, x.kind, r, x.u.clone(), x.sheet).expect("boundary point is valid");
    (b, r - x.t)
}

/// Total volume of the model.
pub fn total_volume(params: ModelParams, kind: ModelKind) -> f64 {
    let disk = ball_volume(params.n, params.k, params.r).expect("model parameters are valid");
    disk * kind.sheets() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleMode {
    Uniform,
    Grid,
}

impl FromStr for SampleMode {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SampleMode::Uniform),
            "grid" => Ok(SampleMode::Grid),
            _ => Err(GeomError::Parse(format!("unknown sample mode '{s}'"))),
        }
    }
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mixed = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ChaCha8Rng::seed_from_u64(mixed)
}

pub(crate) fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// Radius in `[0, radius]` with density proportional to `sn_k(t)^{n-1}`.
pub(crate) fn random_radius<R: Rng>(rng: &mut R, k: Curvature, n: usize, radius: f64) -> f64 {
    let m = (n - 1) as i32;
    let ratio = |t: f64| if t == 0.0 { 1.0 } else { k.sn(t) / t };
    let ceiling = match k {
        Curvature::Negative => ratio(radius).powi(m),
        _ => 1.0,
    };
    loop {
        let t = radius * rng.random::<f64>().powf(1.0 / n as f64);
        if k == Curvature::Zero || rng.random::<f64>() * ceiling <= ratio(t).powi(m) {
            return t;
        }
    }
}

/// Seeded sample of model points.
///
/// `Uniform` draws from the Riemannian volume measure. `Grid` is a product grid
/// in `(t, u, sheet)` of at most `count` points; `count = 1` gives the centre.
pub fn sample_points(params: ModelParams, kind: ModelKind, count: usize, mode: SampleMode, seed: u64) -> Vec<ModelPoint> {
    match mode {
        SampleMode::Uniform => {
            let mut rng = rng_for(seed, 0);
            (0..count)
                .map(|_| {
                    let t = random_radius(&mut rng, params.k, params.n, params.r);
                    let u = random_unit(&mut rng, params.n);
                    let sheet = if kind == ModelKind::DoubleDisk && rng.random::<bool>() {
                        Sheet::Minus
                    } else {
                        Sheet::Plus
                    };
                    ModelPoint::new(params, kind, t, u, sheet).expect("sampled point is valid")
                })
                .collect()
        }
        SampleMode::Grid => grid_points(params, kind, count),
    }
}

/// Roughly uniform deterministic directions on `S^{n-1}`, at most `max_count` of them.
pub fn grid_directions(n: usize, max_count: usize) -> Vec<Vec<f64>> {
    let max_count = max_count.max(1);
    if n == 2 {
        return (0..max_count)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / max_count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    // Normalised lattice points on the surface of the cube [-m, m]^n.
    let surface = |m: usize| (2 * m + 1).pow(n as u32) - (2 * m - 1).pow(n as u32);
    let mut m = 1;
    while surface(m + 1) <= max_count {
        m += 1;
    }
    if surface(m) > max_count {
        return (0..max_count.min(2 * n))
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j / 2] = if j % 2 == 0 { 1.0 } else { -1.0 };
                e
            })
            .collect();
    }
    let side = 2 * m + 1;
    let mut dirs = Vec::new();
    for idx in 0..side.pow(n as u32) {
        let mut rest = idx;
        let v: Vec<f64> = (0..n)
            .map(|_| {
                let c = (rest % side) as f64 - m as f64;
                rest /= side;
                c
            })
            .collect();
        if v.iter().any(|c| c.abs() == m as f64) {
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            dirs.push(v.into_iter().map(|c| c / norm).collect());
        }
    }
    dirs
}

fn grid_points(params: ModelParams, kind: ModelKind, count: usize) -> Vec<ModelPoint> {
    let sheets = kind.sheets();
    let per_sheet = (count / sheets).max(1);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |p: ModelPoint, out: &mut Vec<ModelPoint>| {
        if out.len() < count && seen.insert(p.to_record()) {
            out.push(p);
        }
    };
    let sheet_list: Vec<Sheet> = if sheets == 2 { vec![Sheet::Plus, Sheet::Minus] } else { vec![Sheet::Plus] };
    if per_sheet <= 1 || count <= sheets {
        for &s in &sheet_list {
            push(ModelPoint::center(params, kind, s).expect("centre"), &mut out);
        }
        return out;
    }
    let rest = per_sheet - 1;
    let rings = ((rest as f64).powf(1.0 / params.n as f64).round() as usize).max(1);
    let dirs = grid_directions(params.n, (rest / rings).max(1));
    for &s in &sheet_list {
        push(ModelPoint::center(params, kind, s).expect("centre"), &mut out);
        for j in 1..=rings {
            let t = params.r * j as f64 / rings as f64;
            for u in &dirs {
                push(ModelPoint::new(params, kind, t, u.clone(), s).expect("grid point"), &mut out);
            }
        }
    }
    out
}

/// Uniform sample of the metric ball `B(center, radius)` of the model.
///
/// Candidates are drawn uniformly from the union of disk balls that contain
/// the model ball (`B`, plus its image under the gluing map for the crosscap
/// and the purse, on either sheet for the double disk), thinned by
/// multiplicity, and kept when their model distance is at most `radius`.
pub fn sample_ball(center: &ModelPoint, radius: f64, count: usize, seed: u64, opts: &SolverOpts) -> Result<Vec<ModelPoint>> {
    let params = center.params;
    let k = params.k;
    if !(radius > 0.0) {
        return domain("ball radius must be positive");
    }
    if k == Curvature::Positive && radius >= PI {
        return domain("spherical balls need radius < π");
    }
    let mut rng = rng_for(seed, 1);
    let c_amb = ModelPoint::new(params, ModelKind::Disk, center.t, center.u.clone(), Sheet::Plus)?.ambient();
    let image = |u: &[f64]| -> Vec<f64> {
        let mut w = u.to_vec();
        match center.kind {
            ModelKind::Crosscap => w.iter_mut().for_each(|c| *c = -*c),
            ModelKind::Purse => {
                let last = w.len() - 1;
                w[last] = -w[last];
            }
            _ => {}
        }
        w
    };
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) + 10_000 {
            return Err(GeomError::Resolution("ball sampling acceptance rate too low".into()));
        }
        let rho = random_radius(&mut rng, k, params.n, radius);
        let raw: Vec<f64> = std::iter::once(0.0).chain(random_unit(&mut rng, params.n)).collect();
        let dir = TangentVector::project(&c_amb, &raw).normalized()?;
        let y = spaceform::exp_unchecked(&c_amb, dir.comps(), rho);
        let centre = SpaceFormPoint::pole(k, params.n, 1.0);
        let t = spaceform::distance(&centre, &y)?;
        if t > params.r {
            continue;
        }
        let w = ModelPoint::from_ambient(params, ModelKind::Disk, Sheet::Plus, &y)?;
        let (mut t_z, mut u_z) = (w.t, w.u);
        let mut sheet = Sheet::Plus;
        let glued = matches!(center.kind, ModelKind::Crosscap | ModelKind::Purse);
        if glued {
            if rng.random::<bool>() {
                u_z = image(&u_z);
            }
            let in_b = disk_distance(k, center.t, &center.u, t_z, &u_z) <= radius;
            let in_image = disk_distance(k, center.t, &center.u, t_z, &image(&u_z)) <= radius;
            if in_b && in_image && rng.random::<bool>() {
                continue;
            }
        } else if center.kind == ModelKind::DoubleDisk && rng.random::<bool>() {
            sheet = Sheet::Minus;
        }
        t_z = t_z.min(params.r);
        let z = ModelPoint::new(params, center.kind, t_z, u_z, sheet)?;
        if model_distance(center, &z, opts)? <= radius {
            out.push(z);
        }
    }
    Ok(out)
}

/// Orthonormal basis of the tangent space at `x`, in ambient coordinates.
pub fn tangent_basis(x: &ModelPoint) -> Vec<TangentVector> {
    let base = x.ambient();
    let k = x.params.k;
    let n = x.params.n;
    let mut basis: Vec<TangentVector> = Vec::with_capacity(n);
    for i in 1..=n {
        let mut raw = vec![0.0; n + 1];
        raw[i] = 1.0;
        let mut v = TangentVector::project(&base, &raw);
        for b in &basis {
            let c = v.dot(b);
            let comps: Vec<f64> = v.comps().iter().zip(b.comps()).map(|(p, q)| p - c * q).collect();
            v = TangentVector::from_raw(base.clone(), comps);
        }
        let norm = k.form(v.comps(), v.comps()).sqrt();
        basis.push(v.scaled(1.0 / norm));
    }
    basis
}

/// A uniformly random unit tangent vector at `x`.
pub fn random_tangent<R: Rng>(x: &ModelPoint, rng: &mut R) -> TangentVector {
    let basis = tangent_basis(x);
    let c = random_unit(rng, basis.len());
    combine(&basis, &c)
}

/// `Σ c_i b_i` for tangent vectors sharing a base point.
pub fn combine(basis: &[TangentVector], c: &[f64]) -> TangentVector {
    let base = basis[0].base().clone();
    let mut comps = vec![0.0; basis[0].comps().len()];
    for (b, ci) in basis.iter().zip(c) {
        for (o, bc) in comps.iter_mut().zip(b.comps()) {
            *o += ci * bc;
        }
    }
    TangentVector::from_raw(base, comps)
}

/// Outward radial unit vector `∂_t` at the ambient point of `(t, u)` on sheet `σ`.
fn radial_field(k: Curvature, t: f64, u: &[f64], sigma: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(u.len() + 1);
    v.push(sigma * -(k.value() as f64) * k.sn(t));
    let c = k.cs(t);
    v.extend(u.iter().map(|x| c * x));
    v
}

/// The point at arc length `s` along the model geodesic leaving `x` with unit
/// velocity `v` (ambient tangent at `x`). A geodesic reaching the gluing locus
/// continues on the glued side: the normal component of the velocity flips and
/// the tangential part is carried by the gluing map.
pub fn geodesic_step(x: &ModelPoint, v: &TangentVector, s: f64) -> Result<ModelPoint> {
    let params = x.params;
    let k = params.k;
    let r = params.r;
    let (mut pos, mut vel, mut sheet) = (x.ambient(), v.comps().to_vec(), x.sheet);
    let norm = k.form(&vel, &vel).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return domain("geodesic_step needs a unit velocity");
    }
    let mut remaining = s.abs();
    if s < 0.0 {
        vel.iter_mut().for_each(|c| *c = -*c);
    }
    for _ in 0..64 {
        let centre = SpaceFormPoint::pole(k, params.n, sheet.sign());
        let radius_at = |sigma: f64| {
            let p = spaceform::exp_unchecked(&pos, &vel, sigma);
            spaceform::distance(&centre, &p).unwrap_or(f64::INFINITY)
        };
        let end = spaceform::exp_unchecked(&pos, &vel, remaining);
        if radius_at(remaining) <= r {
            return ModelPoint::from_ambient(params, x.kind, sheet, &end);
        }
        if x.kind == ModelKind::Disk {
            return domain("step leaves the disk");
        }
        // Bisection for the crossing parameter.
        let (mut lo, mut hi) = (0.0, remaining);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if radius_at(mid) <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sc = lo;
        let at = spaceform::exp_unchecked(&pos, &vel, sc);
        let vc = spaceform::geodesic_velocity(&pos, &vel, sc);
        let spatial = &at.coords()[1..];
        let sn_norm = spatial.iter().map(|c| c * c).sum::<f64>().sqrt();
        let u: Vec<f64> = spatial.iter().map(|c| c / sn_norm).collect();
        let radial = radial_field(k, r, &u, sheet.sign());
        let rho = k.form(&vc, &radial);
        let cr = k.cs(r);
        let mut w: Vec<f64> = vc[1..].iter().zip(&u).map(|(vi, ui)| vi - rho * cr * ui).collect();
        if rho.abs() < 1e-7 {
            // Tangent to the gluing sphere: the limit of geodesics that keep
            // recrossing is the great circle of the boundary sphere.
            let wn = w.iter().map(|c| c * c).sum::<f64>().sqrt();
            let phi = (remaining - sc) * wn / k.sn(r);
            let u_end: Vec<f64> = u.iter().zip(&w).map(|(ui, wi)| phi.cos() * ui + phi.sin() * wi / wn).collect();
            return ModelPoint::new(params, x.kind, r, u_end, Sheet::Plus);
        }
        let mut u_new = u.clone();
        match x.kind {
            ModelKind::DoubleDisk => sheet = sheet.flip(),
            ModelKind::Crosscap => {
                u_new.iter_mut().for_each(|c| *c = -*c);
                w.iter_mut().for_each(|c| *c = -*c);
            }
            ModelKind::Purse => {
                let last = u_new.len() - 1;
                u_new[last] = -u_new[last];
                w[last] = -w[last];
            }
            ModelKind::Disk => unreachable!(),
        }
        let new_pos = {
            let mut c = vec![sheet.sign() * cr];
            let sr = k.sn(r);
            c.extend(u_new.iter().map(|ui| sr * ui));
            SpaceFormPoint::from_raw(k, c)
        };
        let radial_new = radial_field(k, r, &u_new, sheet.sign());
        let mut new_vel: Vec<f64> = radial_new.iter().map(|c| -rho * c).collect();
        for (o, wi) in new_vel[1..].iter_mut().zip(&w) {
            *o += wi;
        }
        pos = new_pos;
        vel = new_vel;
        remaining -= sc;
        if remaining <= 0.0 {
            return ModelPoint::from_ambient(params, x.kind, sheet, &pos);
        }
    }
    Err(GeomError::Numerical {
        msg: "geodesic crossed the gluing locus too many times".into(),
        best: f64::NAN,
    })
}
