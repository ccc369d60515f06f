//! The three simply connected constant-curvature space forms.
//!
//! Points live in ambient coordinates `(x_0, x_1, ..., x_n)`:
//!
//! * `k = +1`: the unit sphere `S^n` in Euclidean `R^{n+1}`;
//! * `k =  0`: the affine slices `{±e_0} × R^n`;
//! * `k = -1`: the two sheets `H^n_±` of the hyperboloid `-x_0² + Σ x_i² = -1`
//!   in Minkowski space.
//!
//! Distances are computed from chord lengths (`2 asin(c/2)`, `2 asinh(c/2)`)
//! rather than `acos`/`acosh` of an inner product; the two are equal but the
//! chord form keeps full relative precision for nearby points.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, GeomError, Result};

const UNIT_TOL: f64 = 1e-12;
const TANGENT_TOL: f64 = 1e-9;
const TRIANGLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curvature {
    Negative,
    Zero,
    Positive,
}

impl Curvature {
    pub const ALL: [Curvature; 3] = [Curvature::Negative, Curvature::Zero, Curvature::Positive];

    pub fn from_value(k: i32) -> Result<Self> {
        match k {
            -1 => Ok(Curvature::Negative),
            0 => Ok(Curvature::Zero),
            1 => Ok(Curvature::Positive),
            other => domain(format!("curvature must be -1, 0 or 1, got {other}")),
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Curvature::Negative => -1,
            Curvature::Zero => 0,
            Curvature::Positive => 1,
        }
    }

    /// `sn_k`: sin, identity or sinh.
    pub fn sn(self, t: f64) -> f64 {
        match self {
            Curvature::Negative => t.sinh(),
            Curvature::Zero => t,
            Curvature::Positive => t.sin(),
        }
    }

    /// `cs_k`: cos, 1 or cosh. Satisfies `sn' = cs`.
    pub fn cs(self, t: f64) -> f64 {
        match self {
            Curvature::Negative => t.cosh(),
            Curvature::Zero => 1.0,
            Curvature::Positive => t.cos(),
        }
    }

    /// Ambient bilinear form: Minkowski for `k = -1`, Euclidean otherwise.
    pub fn form(self, a: &[f64], b: &[f64]) -> f64 {
        let spatial: f64 = a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum();
        match self {
            Curvature::Negative => spatial - a[0] * b[0],
            _ => spatial + a[0] * b[0],
        }
    }

    /// Distance realised by an ambient chord of squared form-length `c2`.
    pub(crate) fn distance_from_chord2(self, c2: f64) -> f64 {
        let c = c2.max(0.0).sqrt();
        match self {
            Curvature::Positive => 2.0 * (c / 2.0).min(1.0).asin(),
            Curvature::Zero => c,
            Curvature::Negative => 2.0 * (c / 2.0).asinh(),
        }
    }
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl TryFrom<i32> for Curvature {
    type Error = GeomError;
    fn try_from(k: i32) -> Result<Self> {
        Curvature::from_value(k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormPoint {
    k: Curvature,
    coords: Vec<f64>,
}

impl SpaceFormPoint {
    pub fn new(k: Curvature, coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return domain("space-form points need at least two ambient coordinates");
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return domain("non-finite coordinate");
        }
        match k {
            Curvature::Positive => {
                let norm2: f64 = coords.iter().map(|c| c * c).sum();
                if (norm2.sqrt() - 1.0).abs() > UNIT_TOL {
                    return domain(format!("|x| = {} is not 1", norm2.sqrt()));
                }
            }
            Curvature::Zero => {
                if coords[0] != 1.0 && coords[0] != -1.0 {
                    return domain(format!("x_0 = {} is not ±1", coords[0]));
                }
            }
            Curvature::Negative => {
                let m = k.form(&coords, &coords);
                if (m + 1.0).abs() > UNIT_TOL * coords[0].abs().max(1.0).powi(2) {
                    return domain(format!("Minkowski norm {m} is not -1"));
                }
                if coords[0] == 0.0 {
                    return domain("x_0 must be nonzero on the hyperboloid");
                }
            }
        }
        Ok(SpaceFormPoint { k, coords })
    }

    /// `±e_0` in dimension `n` (the centre of the `±` model disk).
    pub fn pole(k: Curvature, n: usize, sign: f64) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[0] = sign.signum();
        SpaceFormPoint { k, coords }
    }

    pub(crate) fn from_raw(k: Curvature, coords: Vec<f64>) -> Self {
        SpaceFormPoint { k, coords }
    }

    pub fn curvature(&self) -> Curvature {
        self.k
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Sign of `x_0` for the two-component models; always `+1` on the sphere.
    pub fn component(&self) -> f64 {
        match self.k {
            Curvature::Positive => 1.0,
            _ => self.coords[0].signum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    base: SpaceFormPoint,
    comps: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: SpaceFormPoint, comps: Vec<f64>) -> Result<Self> {
        if comps.len() != base.coords.len() {
            return domain("tangent vector has wrong length");
        }
        let scale = 1.0 + comps.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let normal = match base.k {
            Curvature::Zero => comps[0],
            k => k.form(&base.coords, &comps),
        };
        if normal.abs() > TANGENT_TOL * scale * base.coords[0].abs().max(1.0) {
            return domain(format!("vector is not tangent (normal component {normal})"));
        }
        Ok(TangentVector { base, comps })
    }

    /// Orthogonal projection of an arbitrary ambient vector onto `T_base`.
    pub fn project(base: &SpaceFormPoint, raw: &[f64]) -> Self {
        let k = base.k;
        let x = &base.coords;
        let comps = match k {
            Curvature::Zero => {
                let mut c = raw.to_vec();
                c[0] = 0.0;
                c
            }
            // For both the sphere and the hyperboloid, <x,x> = k and the
            // projection is raw - <raw,x>/<x,x> x.
            _ => {
                let s = k.form(raw, x) / k.form(x, x);
                raw.iter().zip(x).map(|(r, xi)| r - s * xi).collect()
            }
        };
        TangentVector { base: base.clone(), comps }
    }

    pub(crate) fn from_raw(base: SpaceFormPoint, comps: Vec<f64>) -> Self {
        TangentVector { base, comps }
    }

    pub fn base(&self) -> &SpaceFormPoint {
        &self.base
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    pub fn norm(&self) -> f64 {
        self.base.k.form(&self.comps, &self.comps).max(0.0).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= f64::EPSILON {
            return Err(GeomError::Degenerate("zero tangent vector".into()));
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector {
            base: self.base.clone(),
            comps: self.comps.iter().map(|c| c * s).collect(),
        }
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        self.base.k.form(&self.comps, &other.comps)
    }
}

fn check_pair(x: &SpaceFormPoint, y: &SpaceFormPoint) -> Result<()> {
    if x.k != y.k {
        return domain("points lie in different space forms");
    }
    if x.coords.len() != y.coords.len() {
        return domain("points have different dimensions");
    }
    if x.component() != y.component() {
        return domain("points lie on different components");
    }
    Ok(())
}

fn chord2(k: Curvature, a: &[f64], b: &[f64]) -> f64 {
    let spatial: f64 = a[1..].iter().zip(&b[1..]).map(|(p, q)| (p - q) * (p - q)).sum();
    let d0 = a[0] - b[0];
    match k {
        Curvature::Positive => spatial + d0 * d0,
        Curvature::Zero => spatial,
        Curvature::Negative => spatial - d0 * d0,
    }
}

pub fn distance(x: &SpaceFormPoint, y: &SpaceFormPoint) -> Result<f64> {
    check_pair(x, y)?;
    let c2 = chord2(x.k, &x.coords, &y.coords);
    if c2 < 0.0 {
        // Only possible on the hyperboloid; -<x,y> = 1 + c2/2 must stay >= 1.
        let scale = x.coords[0].abs() * y.coords[0].abs();
        if -c2 > 2.0 * UNIT_TOL * scale.max(1.0) {
            return Err(GeomError::Numerical {
                msg: format!("arccosh argument {} below 1", 1.0 + c2 / 2.0),
                best: 0.0,
            });
        }
        return Ok(0.0);
    }
    Ok(x.k.distance_from_chord2(c2))
}

pub fn exp_map(x: &SpaceFormPoint, v: &TangentVector, t: f64) -> Result<SpaceFormPoint> {
    check_pair(x, &v.base)?;
    let same_base = x
        .coords
        .iter()
        .zip(&v.base.coords)
        .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same_base {
        return domain("tangent vector is not based at x");
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return domain(format!("exp_map needs a unit vector, |v| = {norm}"));
    }
    Ok(exp_unchecked(x, &v.comps, t))
}

pub(crate) fn exp_unchecked(x: &SpaceFormPoint, v: &[f64], t: f64) -> SpaceFormPoint {
    let k = x.k;
    let (a, b) = (k.cs(t), k.sn(t));
    let coords = x.coords.iter().zip(v).map(|(xi, vi)| a * xi + b * vi).collect();
    SpaceFormPoint { k, coords }
}

/// Velocity at arc length `t` of the unit-speed geodesic `exp(x, t v)`.
pub(crate) fn geodesic_velocity(x: &SpaceFormPoint, v: &[f64], t: f64) -> Vec<f64> {
    let k = x.k;
    // d/dt (cs(t) x + sn(t) v) = -k sn(t) x + cs(t) v
    let a = -(k.value() as f64) * k.sn(t);
    let b = k.cs(t);
    x.coords.iter().zip(v).map(|(xi, vi)| a * xi + b * vi).collect()
}

pub fn log_map(x: &SpaceFormPoint, y: &SpaceFormPoint) -> Result<TangentVector> {
    let d = distance(x, y)?;
    if d <= 1e-15 {
        return Err(GeomError::Degenerate("log_map of coincident points".into()));
    }
    let k = x.k;
    if k == Curvature::Positive && d > PI - 1e-6 {
        return Err(GeomError::Ambiguous(format!(
            "points at distance {d} are (nearly) antipodal"
        )));
    }
    let raw: Vec<f64> = match k {
        Curvature::Zero => x.coords.iter().zip(&y.coords).map(|(a, b)| b - a).collect(),
        // y minus its component along x.
        _ => {
            let s = k.form(&y.coords, &x.coords) / k.form(&x.coords, &x.coords);
            y.coords.iter().zip(&x.coords).map(|(b, a)| b - s * a).collect()
        }
    };
    let v = TangentVector::project(x, &raw);
    v.normalized()
}

/// Comparison angle at the vertex `x` of a triangle with sides
/// `d_xy`, `d_xz` adjacent to `x` and `d_yz` opposite, in the model plane of curvature `k`.
pub fn comparison_angle(k: Curvature, d_xy: f64, d_xz: f64, d_yz: f64) -> Result<f64> {
    let (a, b, c) = (d_xy, d_xz, d_yz);
    if [a, b, c].iter().any(|s| !s.is_finite() || *s < 0.0) {
        return domain("side lengths must be finite and nonnegative");
    }
    let scale = a.max(b).max(c).max(1.0);
    let tol = TRIANGLE_TOL * scale;
    if a > b + c + tol || b > a + c + tol || c > a + b + tol {
        return domain(format!("({a}, {b}, {c}) violates the triangle inequality"));
    }
    if k == Curvature::Positive && a + b + c > 2.0 * PI + tol {
        return domain("perimeter exceeds 2π on the sphere");
    }
    if a == 0.0 || b == 0.0 {
        return Err(GeomError::Degenerate("zero-length side at the vertex".into()));
    }
    // Half-angle form: tan²(γ/2) = sn(s-a) sn(s-b) / (sn(s) sn(s-c)).
    // It is exact at both degenerate ends (γ = 0 and γ = π).
    let s = 0.5 * (a + b + c);
    let f = |v: f64| k.sn(v.max(0.0));
    let num = f(s - a) * f(s - b);
    let den = f(s) * f(s - c);
    if num <= 0.0 && den <= 0.0 {
        return Err(GeomError::Degenerate("all sides collapse".into()));
    }
    let angle = 2.0 * num.max(0.0).sqrt().atan2(den.max(0.0).sqrt());
    Ok(angle.clamp(0.0, PI))
}

/// Area of the unit sphere `S^{m}` embedded in `R^{m+1}`.
pub fn unit_sphere_area(m: usize) -> f64 {
    // ω_0 = 2, ω_1 = 2π, ω_m = 2π/(m-1) ω_{m-2}
    let mut w = if m % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut j = if m % 2 == 0 { 0 } else { 1 };
    while j < m {
        j += 2;
        w *= 2.0 * PI / (j as f64 - 1.0);
    }
    w
}

/// Volume of the metric `r`-ball in the `n`-dimensional space form of curvature `k`.
pub fn ball_volume(n: usize, k: Curvature, r: f64) -> Result<f64> {
    if n == 0 {
        return domain("dimension must be at least 1");
    }
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("radius must be positive, got {r}"));
    }
    if k == Curvature::Positive && r >= PI {
        return domain("spherical balls need r < π");
    }
    let area = unit_sphere_area(n - 1);
    let radial = match (n, k) {
        (1, _) => r,
        (_, Curvature::Zero) => r.powi(n as i32) / n as f64,
        (2, Curvature::Positive) => 2.0 * (r / 2.0).sin().powi(2),
        (2, Curvature::Negative) => 2.0 * (r / 2.0).sinh().powi(2),
        _ => crate::quad::adaptive_simpson(|t| k.sn(t).powi(n as i32 - 1), 0.0, r, 1e-13),
    };
    Ok(area * radial)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_pt(c: &[f64]) -> SpaceFormPoint {
        SpaceFormPoint::new(Curvature::Positive, c.to_vec()).unwrap()
    }

    #[test]
    fn curvature_only_three_values() {
        assert!(Curvature::from_value(2).is_err());
        assert_eq!(Curvature::from_value(-1).unwrap().value(), -1);
    }

    #[test]
    fn closed_form_distances() {
        let d = distance(&sphere_pt(&[1.0, 0.0, 0.0]), &sphere_pt(&[0.0, 1.0, 0.0])).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-15);

        let a = SpaceFormPoint::new(Curvature::Zero, vec![1.0, 0.0, 0.0]).unwrap();
        let b = SpaceFormPoint::new(Curvature::Zero, vec![1.0, 3.0, 4.0]).unwrap();
        assert_eq!(distance(&a, &b).unwrap(), 5.0);

        let o = SpaceFormPoint::pole(Curvature::Negative, 2, 1.0);
        let p = SpaceFormPoint::new(Curvature::Negative, vec![1f64.cosh(), 1f64.sinh(), 0.0]).unwrap();
        assert!((distance(&o, &p).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mismatched_components_rejected() {
        let a = SpaceFormPoint::pole(Curvature::Zero, 2, 1.0);
        let b = SpaceFormPoint::pole(Curvature::Zero, 2, -1.0);
        assert!(matches!(distance(&a, &b), Err(GeomError::Domain(_))));
        let c = SpaceFormPoint::pole(Curvature::Positive, 2, 1.0);
        assert!(distance(&a, &c).is_err());
    }

    #[test]
    fn invalid_points_rejected() {
        assert!(SpaceFormPoint::new(Curvature::Positive, vec![1.0, 1.0]).is_err());
        assert!(SpaceFormPoint::new(Curvature::Zero, vec![0.5, 1.0]).is_err());
        assert!(SpaceFormPoint::new(Curvature::Negative, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn exp_examples() {
        let x = SpaceFormPoint::pole(Curvature::Positive, 2, 1.0);
        let v = TangentVector::new(x.clone(), vec![0.0, 1.0, 0.0]).unwrap();
        let y = exp_map(&x, &v, 0.7).unwrap();
        assert!((y.coords()[0] - 0.7f64.cos()).abs() < 1e-15);
        assert!((y.coords()[1] - 0.7f64.sin()).abs() < 1e-15);

        let x0 = SpaceFormPoint::new(Curvature::Zero, vec![1.0, 0.3, -0.2]).unwrap();
        let v0 = TangentVector::new(x0.clone(), vec![0.0, 0.6, 0.8]).unwrap();
        assert_eq!(exp_map(&x0, &v0, 0.0).unwrap(), x0);

        let h = SpaceFormPoint::pole(Curvature::Negative, 2, 1.0);
        let vh = TangentVector::new(h.clone(), vec![0.0, 1.0, 0.0]).unwrap();
        let yh = exp_map(&h, &vh, 1.0).unwrap();
        assert!((yh.coords()[0] - 1f64.cosh()).abs() < 1e-14);
        assert!((yh.coords()[1] - 1f64.sinh()).abs() < 1e-14);

        let long = TangentVector::new(x.clone(), vec![0.0, 2.0, 0.0]).unwrap();
        assert!(exp_map(&x, &long, 1.0).is_err());
    }

    #[test]
    fn log_examples() {
        let x = SpaceFormPoint::new(Curvature::Zero, vec![1.0, 0.0, 0.0]).unwrap();
        let y = SpaceFormPoint::new(Curvature::Zero, vec![1.0, 2.0, 0.0]).unwrap();
        let v = log_map(&x, &y).unwrap();
        assert!((v.comps()[1] - 1.0).abs() < 1e-15 && v.comps()[2].abs() < 1e-15);

        let s = SpaceFormPoint::pole(Curvature::Positive, 2, 1.0);
        let t: f64 = 2.0;
        let q = sphere_pt(&[t.cos(), t.sin(), 0.0]);
        let w = log_map(&s, &q).unwrap();
        assert!((w.comps()[1] - 1.0).abs() < 1e-12);

        let anti = SpaceFormPoint::pole(Curvature::Positive, 2, -1.0);
        assert!(matches!(log_map(&s, &anti), Err(GeomError::Ambiguous(_))));
        assert!(matches!(log_map(&s, &s), Err(GeomError::Degenerate(_))));
    }

    #[test]
    fn comparison_angle_examples() {
        let a = comparison_angle(Curvature::Zero, 3.0, 4.0, 5.0).unwrap();
        assert!((a - PI / 2.0).abs() < 1e-15);
        let h = PI / 2.0;
        let b = comparison_angle(Curvature::Positive, h, h, h).unwrap();
        assert!((b - PI / 2.0).abs() < 1e-15);
        assert!(matches!(
            comparison_angle(Curvature::Zero, 1.0, 1.0, 3.0),
            Err(GeomError::Domain(_))
        ));
        assert!(matches!(
            comparison_angle(Curvature::Zero, 0.0, 1.0, 1.0),
            Err(GeomError::Degenerate(_))
        ));
    }

    #[test]
    fn ball_volume_closed_forms() {
        for k in Curvature::ALL {
            assert!((ball_volume(1, k, 0.8).unwrap() - 1.6).abs() < 1e-15);
        }
        assert!((ball_volume(2, Curvature::Zero, 1.5).unwrap() - PI * 2.25).abs() < 1e-14);
        assert!((ball_volume(3, Curvature::Zero, 1.0).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!(ball_volume(2, Curvature::Zero, 0.0).is_err());
        assert!(ball_volume(2, Curvature::Positive, 3.2).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(0) - 2.0).abs() < 1e-15);
        assert!((unit_sphere_area(1) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
    }
}
