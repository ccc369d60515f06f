//! Finite Gromov–Hausdorff tools: Hausdorff distance, exact GH on tiny
//! spaces, lower bounds, metric perturbation with shortest-path repair, and
//! an ε-net graph approximation of model distances.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;

use crate::error::{domain, GeomError, Result};
use crate::modelspace::{rng_for, ModelKind, ModelParams, ModelPoint, Sheet};
use crate::spaceform::Curvature;
use crate::strainer::FiniteMetricSpace;

/// Largest total size accepted by [`gh_exact_small`].
pub const EXACT_GH_LIMIT: usize = 12;

/// A relation between two finite spaces covering both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn covers(&self, nx: usize, ny: usize) -> bool {
        let (mut cx, mut cy) = (vec![false; nx], vec![false; ny]);
        for &(x, y) in &self.pairs {
            if x >= nx || y >= ny {
                return false;
            }
            cx[x] = true;
            cy[y] = true;
        }
        cx.iter().all(|&c| c) && cy.iter().all(|&c| c)
    }

    pub fn distortion(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
        let mut worst = 0.0f64;
        for &(a, b) in &self.pairs {
            for &(c, d) in &self.pairs {
                worst = worst.max((x.d(a, c) - y.d(b, d)).abs());
            }
        }
        worst
    }
}

/// `max(sup_{a∈A} d(a, B), sup_{b∈B} d(b, A))`.
pub fn hausdorff(s: &FiniteMetricSpace, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return domain("Hausdorff distance needs nonempty sets");
    }
    if a.iter().chain(b).any(|&i| i >= s.len()) {
        return domain("index out of range");
    }
    Ok(directed(s, a, b).max(directed(s, b, a)))
}

/// `sup_{a∈A} inf_{b∈B} d(a, b)`.
pub fn directed(s: &FiniteMetricSpace, a: &[usize], b: &[usize]) -> f64 {
    a.iter()
        .map(|&i| b.iter().map(|&j| s.d(i, j)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

struct Search<'a> {
    x: &'a FiniteMetricSpace,
    y: &'a FiniteMetricSpace,
    tau: f64,
    pairs: Vec<(usize, usize)>,
}

impl Search<'_> {
    fn compatible(&self, a: usize, b: usize) -> bool {
        self.pairs.iter().all(|&(c, d)| (self.x.d(a, c) - self.y.d(b, d)).abs() <= self.tau)
    }

    /// Assigns `f(x)` for every `x`, then some preimage for every `y` not yet hit.
    fn extend(&mut self, next_x: usize, covered: &mut Vec<bool>) -> bool {
        if next_x < self.x.len() {
            for b in 0..self.y.len() {
                if self.compatible(next_x, b) {
                    self.pairs.push((next_x, b));
                    let was = covered[b];
                    covered[b] = true;
                    if self.extend(next_x + 1, covered) {
                        return true;
                    }
                    covered[b] = was;
                    self.pairs.pop();
                }
            }
            return false;
        }
        let Some(b) = covered.iter().position(|&c| !c) else {
            return true;
        };
        for a in 0..self.x.len() {
            if self.compatible(a, b) {
                self.pairs.push((a, b));
                covered[b] = true;
                if self.extend(next_x, covered) {
                    return true;
                }
                covered[b] = false;
                self.pairs.pop();
            }
        }
        false
    }
}

fn feasible(x: &FiniteMetricSpace, y: &FiniteMetricSpace, tau: f64) -> Option<Correspondence> {
    let mut s = Search { x, y, tau, pairs: Vec::new() };
    let mut covered = vec![false; y.len()];
    s.extend(0, &mut covered).then(|| Correspondence { pairs: s.pairs })
}

/// Exact GH distance with an optimal correspondence, by bisection over the
/// finitely many candidate distortions and backtracking feasibility checks.
pub fn gh_exact_with_witness(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<(f64, Correspondence)> {
    if x.is_empty() || y.is_empty() {
        return domain("GH distance needs nonempty spaces");
    }
    if x.len() + y.len() > EXACT_GH_LIMIT {
        return domain(format!("exact GH supports at most {EXACT_GH_LIMIT} points in total"));
    }
    let mut cands = vec![0.0];
    for a in 0..x.len() {
        for c in a..x.len() {
            for b in 0..y.len() {
                for d in b..y.len() {
                    cands.push((x.d(a, c) - y.d(b, d)).abs());
                }
            }
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    let mut best = feasible(x, y, cands[hi]).expect("the largest distortion is always feasible");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match feasible(x, y, cands[mid]) {
            Some(c) => {
                best = c;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Ok((0.5 * best.distortion(x, y), best))
}

pub fn gh_exact_small(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<f64> {
    Ok(gh_exact_with_witness(x, y)?.0)
}

fn profile(s: &FiniteMetricSpace, i: usize) -> Vec<f64> {
    (0..s.len()).map(|j| s.d(i, j)).collect()
}

fn set_hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let dir = |p: &[f64], q: &[f64]| {
        p.iter().map(|u| q.iter().map(|v| (u - v).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    dir(a, b).max(dir(b, a))
}

/// Lower bound `max(|diam X - diam Y| / 2, LB)`, where `LB` is half the
/// Hausdorff-type matching cost between distance profiles: for `(x, y)` in a
/// correspondence of distortion `D`, the sets `{d(x, ·)}` and `{d(y, ·)}` are
/// within Hausdorff distance `D` on the line.
pub fn gh_lower(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    let diam = 0.5 * (x.diameter() - y.diameter()).abs();
    let px: Vec<Vec<f64>> = (0..x.len()).map(|i| profile(x, i)).collect();
    let py: Vec<Vec<f64>> = (0..y.len()).map(|j| profile(y, j)).collect();
    let cost: Vec<Vec<f64>> = px.iter().map(|a| py.iter().map(|b| set_hausdorff(a, b)).collect()).collect();
    let rows = cost.iter().map(|r| r.iter().cloned().fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    let cols = (0..y.len())
        .map(|j| cost.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    diam.max(0.5 * rows.max(cols))
}

/// Result of [`perturb_metric`].
#[derive(Clone, Debug)]
pub struct Perturbed {
    pub space: FiniteMetricSpace,
    /// `gh_lower(original, perturbed)`.
    pub gh_lower: f64,
    /// `amplitude · diam(original)`.
    pub bound: f64,
}

/// Multiplies each distance by an independent factor in `[1 - a, 1 + a]` and
/// repairs the triangle inequality by shortest-path closure.
pub fn perturb_metric(s: &FiniteMetricSpace, amplitude: f64, seed: u64) -> Result<Perturbed> {
    if !(0.0..=0.2).contains(&amplitude) {
        return domain(format!("amplitude must lie in [0, 0.2], got {amplitude}"));
    }
    let bound = amplitude * s.diameter();
    if amplitude == 0.0 {
        return Ok(Perturbed { space: s.clone(), gh_lower: 0.0, bound });
    }
    let n = s.len();
    let mut rng = rng_for(seed, 11);
    let mut m = s.matrix();
    for i in 0..n {
        for j in i + 1..n {
            let f = 1.0 + amplitude * (2.0 * rng.random::<f64>() - 1.0);
            m[i][j] = s.d(i, j) * f;
            m[j][i] = m[i][j];
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = m[i][k] + m[k][j];
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
    let space = FiniteMetricSpace::new(s.labels().to_vec(), m, s.curv_lb())?;
    let gh = gh_lower(s, &space);
    Ok(Perturbed { space, gh_lower: gh, bound })
}

/// An ε-net of a model with edges between nodes closer than `3ε`, weighted
/// by disk distances on a common sheet.
///
/// The net is multiscale: nodes of the dyadic sub-net at resolution `2^j ε`
/// (up to `r/16`) are also linked within `3·2^j ε`. For `ε ≤ r/16` the net at
/// `ε/2` contains every node and edge of the net at `ε` (boundary nodes nest
/// for `n = 2`), so refining never lengthens a path.
pub struct NetGraph {
    eps: f64,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    queries: Vec<usize>,
    /// Node positions with every sheet folded onto one disk. Folding is
    /// 1-Lipschitz and edges carry folded distances, so the folded distance
    /// to the target is a consistent A* heuristic.
    fold: Option<Ambient>,
}

/// Ambient coordinates `(cs t, sn t · u)` of disk points, for fast disk
/// distances.
struct Ambient {
    k: Curvature,
    dim: usize,
    coords: Vec<f64>,
}

impl Ambient {
    fn new(k: Curvature, n: usize, count: usize) -> Self {
        Ambient { k, dim: n + 1, coords: vec![0.0; (n + 1) * count] }
    }

    fn set(&mut self, i: usize, t: f64, u: &[f64]) {
        let (s, row) = (self.k.sn(t), &mut self.coords[i * self.dim..(i + 1) * self.dim]);
        row[0] = self.k.cs(t);
        for (dst, c) in row[1..].iter_mut().zip(u) {
            *dst = s * c;
        }
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (&self.coords[a * self.dim..(a + 1) * self.dim], &self.coords[b * self.dim..(b + 1) * self.dim]);
        let spatial: f64 = x[1..].iter().zip(&y[1..]).map(|(p, q)| (p - q).powi(2)).sum();
        let d0 = x[0] - y[0];
        let c2 = match self.k {
            Curvature::Positive => spatial + d0 * d0,
            Curvature::Zero => spatial,
            Curvature::Negative => spatial - d0 * d0,
        };
        self.k.distance_from_chord2(c2)
    }
}

struct Placement {
    node: usize,
    level: u32,
    sheet: bool,
    t: f64,
    u: Vec<f64>,
}

fn glue_image(kind: ModelKind, u: &[f64]) -> Vec<f64> {
    let mut v = u.to_vec();
    match kind {
        ModelKind::Crosscap => v.iter_mut().for_each(|c| *c = -*c),
        ModelKind::Purse => {
            let last = v.len() - 1;
            v[last] = -v[last];
        }
        _ => {}
    }
    v
}

fn dyadic_level(c: i64, top: u32) -> u32 {
    if c == 0 {
        top
    } else {
        c.trailing_zeros().min(top)
    }
}

/// Unit boundary directions with their dyadic levels.
fn boundary_directions(n: usize, sn_r: f64, eps: f64, top: u32) -> Vec<(Vec<f64>, u32)> {
    if n == 2 {
        // Power-of-two angular lattice: nested under halving ε and closed
        // under u ↦ -u and reflection in either axis.
        let want = (2.0 * std::f64::consts::PI * sn_r / eps).ceil().max(4.0) as usize;
        let m = want.next_power_of_two();
        return (0..m)
            .map(|j| {
                let a = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                (vec![a.cos(), a.sin()], dyadic_level(j as i64, top))
            })
            .collect();
    }
    // Radial projections of the cubic lattice of spacing ε·sn(r)/r near the sphere.
    let h = eps / sn_r;
    let reach = (1.0 / h).ceil() as i64 + 1;
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut z = vec![-reach; n];
    loop {
        let len = z.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt() * h;
        if len >= 1.0 - h && len < 1.0 + h {
            let u: Vec<f64> = z.iter().map(|&c| c as f64 * h / len).collect();
            let key: Vec<i64> = u.iter().map(|c| (c * 1e9).round() as i64).collect();
            if seen.insert(key) {
                out.push((u, 0));
            }
        }
        let mut i = 0;
        while i < n {
            z[i] += 1;
            if z[i] <= reach {
                break;
            }
            z[i] = -reach;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    out
}

/// Adds edges between placements on a common sheet at disk distance at most
/// `link`, using a spatial hash in normal coordinates with cells of width
/// `cell`. With `skip_short`, pairs within `link / 2` are left to the finer level.
#[allow(clippy::too_many_arguments)]
fn link_within(
    places: &[Placement],
    amb: &Ambient,
    members: &[usize],
    n: usize,
    link: f64,
    cell: f64,
    skip_short: bool,
    edges: &mut Vec<(u32, u32, f64)>,
) {
    let mut grid: HashMap<(bool, Vec<i64>), Vec<usize>> = HashMap::new();
    for &i in members {
        let p = &places[i];
        let c: Vec<i64> = p.u.iter().map(|x| (x * p.t / cell).floor() as i64).collect();
        grid.entry((p.sheet, c)).or_default().push(i);
    }
    let mut offsets_nd: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..n {
        offsets_nd = offsets_nd.into_iter().flat_map(|o| (-1..=1).map(move |d| [o.clone(), vec![d]].concat())).collect();
    }
    for ((sheet, c), here) in &grid {
        for off in &offsets_nd {
            let nc: Vec<i64> = c.iter().zip(off).map(|(a, b)| a + b).collect();
            let Some(others) = grid.get(&(*sheet, nc)) else { continue };
            for &i in here {
                for &j in others {
                    let (a, b) = (&places[i], &places[j]);
                    if j <= i || a.node == b.node {
                        continue;
                    }
                    let d = amb.distance(i, j);
                    if d <= link && !(skip_short && d <= link / 2.0) {
                        edges.push((a.node as u32, b.node as u32, d));
                    }
                }
            }
        }
    }
}

impl NetGraph {
    /// Builds the net for `params`/`kind` at resolution `eps` with the given
    /// extra points as additional nodes (in order).
    pub fn build(params: ModelParams, kind: ModelKind, eps: f64, extra: &[ModelPoint]) -> Result<Self> {
        if !(eps > 0.0) {
            return domain(format!("net resolution must be positive, got {eps}"));
        }
        if extra.iter().any(|p| p.kind() != kind || p.params() != params) {
            return domain("query points belong to a different model");
        }
        let (n, k, r) = (params.n(), params.k(), params.r());
        let sheets: Vec<bool> = if kind == ModelKind::DoubleDisk { vec![true, false] } else { vec![true] };
        let mut places: Vec<Placement> = Vec::new();
        let mut count = 0usize;

        // Interior lattice in normal coordinates at the centre. Its true spacing
        // stays below 0.94ε, so the 3ε links reach the (3, 1) lattice neighbours
        // and path directions are quantized to within about 9°.
        let stretch = if k == Curvature::Negative { k.sn(r) / r } else { 1.0 };
        let spacing = 0.94 * eps / stretch;
        let reach = (r / spacing).ceil() as i64;
        let mut top = 0u32;
        while eps * f64::from(1u32 << (top + 1)) <= r / 16.0 {
            top += 1;
        }
        let mut interior: Vec<(f64, Vec<f64>, u32)> = Vec::new();
        let mut z = vec![-reach; n];
        loop {
            let v: Vec<f64> = z.iter().map(|&c| c as f64 * spacing).collect();
            let t = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if t < r * (1.0 - 1e-12) {
                let u = if t == 0.0 {
                    let mut e = vec![0.0; n];
                    e[0] = 1.0;
                    e
                } else {
                    v.iter().map(|c| c / t).collect()
                };
                let level = z.iter().map(|&c| dyadic_level(c, top)).min().unwrap_or(top);
                interior.push((t, u, level));
            }
            let mut i = 0;
            while i < n {
                z[i] += 1;
                if z[i] <= reach {
                    break;
                }
                z[i] = -reach;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        for &s in &sheets {
            for (t, u, level) in &interior {
                places.push(Placement { node: count, level: *level, sheet: s, t: *t, u: u.clone() });
                count += 1;
            }
        }

        // Boundary nodes, one per gluing class, placed at every representative on every sheet.
        let mut classes: HashMap<Vec<i64>, usize> = HashMap::new();
        let key = |u: &[f64]| -> Vec<i64> { u.iter().map(|c| (c * 1e9).round() as i64).collect() };
        for (u, level) in boundary_directions(n, k.sn(r), spacing, top) {
            let g = glue_image(kind, &u);
            let (ku, kg) = (key(&u), key(&g));
            let class_key = if ku <= kg { ku } else { kg };
            let node = *classes.entry(class_key).or_insert_with(|| {
                count += 1;
                count - 1
            });
            for &s in &sheets {
                places.push(Placement { node, level, sheet: s, t: r, u: u.clone() });
            }
        }

        let mut queries = Vec::with_capacity(extra.len());
        for p in extra {
            let node = count;
            count += 1;
            queries.push(node);
            let on_boundary = p.t() >= r;
            let reps: Vec<Vec<f64>> = if on_boundary && kind != ModelKind::DoubleDisk {
                vec![p.u().to_vec(), glue_image(kind, p.u())]
            } else {
                vec![p.u().to_vec()]
            };
            let its_sheets: Vec<bool> =
                if on_boundary { sheets.clone() } else { vec![p.sheet() == Sheet::Plus || kind != ModelKind::DoubleDisk] };
            for s in its_sheets {
                for u in &reps {
                    places.push(Placement { node, level: top, sheet: s, t: p.t(), u: u.clone() });
                }
            }
        }

        let shrink = if k == Curvature::Positive { r / k.sn(r) } else { 1.0 };
        let mut amb = Ambient::new(k, n, places.len());
        for (i, p) in places.iter().enumerate() {
            amb.set(i, p.t, &p.u);
        }
        let mut edges: Vec<(u32, u32, f64)> = Vec::new();
        for level in 0..=top {
            let scale = eps * f64::from(1u32 << level);
            let members: Vec<usize> = (0..places.len()).filter(|&i| places[i].level >= level).collect();
            link_within(&places, &amb, &members, n, 3.0 * scale, 3.0 * scale * shrink, level > 0, &mut edges);
        }
        let mut degree = vec![0usize; count + 1];
        for &(a, b, _) in &edges {
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for i in 0..count {
            degree[i + 1] += degree[i];
        }
        let offsets = degree.clone();
        let mut fill = degree;
        let mut targets = vec![0u32; 2 * edges.len()];
        let mut weights = vec![0.0; 2 * edges.len()];
        for &(a, b, d) in &edges {
            for (from, to) in [(a, b), (b, a)] {
                let slot = fill[from as usize];
                targets[slot] = to;
                weights[slot] = d;
                fill[from as usize] += 1;
            }
        }
        let fold = matches!(kind, ModelKind::Disk | ModelKind::DoubleDisk).then(|| {
            let mut fold = Ambient::new(k, n, count);
            for p in &places {
                fold.set(p.node, p.t, &p.u);
            }
            fold
        });
        let g = NetGraph { eps, offsets, targets, weights, queries, fold };
        if !g.connected() {
            return Err(GeomError::Resolution(format!("the ε-net at ε = {eps} is disconnected")));
        }
        Ok(g)
    }

    pub fn nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    fn connected(&self) -> bool {
        let n = self.nodes();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(a) = stack.pop() {
            for &b in &self.targets[self.offsets[a]..self.offsets[a + 1]] {
                if !seen[b as usize] {
                    seen[b as usize] = true;
                    reached += 1;
                    stack.push(b as usize);
                }
            }
        }
        reached == n
    }

    /// Shortest-path distance between the `i`-th and `j`-th extra points.
    pub fn query_distance(&self, i: usize, j: usize) -> f64 {
        self.shortest(self.queries[i], self.queries[j])
    }

    fn shortest(&self, from: usize, to: usize) -> f64 {
        let guess = |a: usize| self.fold.as_ref().map_or(0.0, |f| f.distance(a, to));
        let mut dist = vec![f64::INFINITY; self.nodes()];
        let mut heap = BinaryHeap::new();
        dist[from] = 0.0;
        heap.push(Reverse((OrdF64(guess(from)), from)));
        while let Some(Reverse((OrdF64(key), a))) = heap.pop() {
            if a == to {
                return dist[a];
            }
            let d = dist[a];
            if key > d + guess(a) {
                continue;
            }
            for e in self.offsets[a]..self.offsets[a + 1] {
                let b = self.targets[e] as usize;
                let nd = d + self.weights[e];
                if nd < dist[b] {
                    dist[b] = nd;
                    heap.push(Reverse((OrdF64(nd + guess(b)), b)));
                }
            }
        }
        dist[to]
    }
}

#[derive(Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Graph distances for each pair, on an ε-net containing all pair endpoints.
pub fn graph_oracle(kind: ModelKind, net_epsilon: f64, pairs: &[(ModelPoint, ModelPoint)]) -> Result<Vec<f64>> {
    let Some((first, _)) = pairs.first() else {
        return Ok(Vec::new());
    };
    let pts: Vec<ModelPoint> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    let g = NetGraph::build(first.params(), kind, net_epsilon, &pts)?;
    let workers = std::thread::available_parallelism().map_or(1, |w| w.get()).min(pairs.len());
    let mut out = vec![0.0; pairs.len()];
    let chunk = pairs.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (c, slot) in out.chunks_mut(chunk).enumerate() {
            let g = &g;
            scope.spawn(move || {
                for (o, v) in slot.iter_mut().enumerate() {
                    let i = c * chunk + o;
                    *v = g.query_distance(2 * i, 2 * i + 1);
                }
            });
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspace::{model_distance, SolverOpts};

    fn space(m: Vec<Vec<f64>>) -> FiniteMetricSpace {
        let labels = (0..m.len()).map(|i| format!("p{i}")).collect();
        FiniteMetricSpace::new(labels, m, Curvature::Zero).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let s = space(vec![vec![0.0, 2.0, 3.0], vec![2.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]]);
        assert_eq!(hausdorff(&s, &[0, 1], &[0, 1]).unwrap(), 0.0);
        assert_eq!(directed(&s, &[1], &[0, 1, 2]), 0.0);
        assert_eq!(hausdorff(&s, &[0], &[2]).unwrap(), 3.0);
        assert!(hausdorff(&s, &[], &[2]).is_err());
    }

    #[test]
    fn gh_two_points_vs_one() {
        let x = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let y = space(vec![vec![0.0]]);
        assert_eq!(gh_exact_small(&x, &y).unwrap(), 0.5);
        assert_eq!(gh_exact_small(&y, &x).unwrap(), 0.5);
        assert_eq!(gh_exact_small(&x, &x).unwrap(), 0.0);
        assert!(gh_lower(&x, &y) >= 0.5);
    }

    #[test]
    fn gh_size_limit() {
        let big = FiniteMetricSpace::from_fn(7, Curvature::Zero, |i, j| (j - i) as f64).unwrap();
        assert!(matches!(gh_exact_small(&big, &big), Err(GeomError::Domain(_))));
    }

    #[test]
    fn perturbation_bounds() {
        let s = FiniteMetricSpace::from_fn(6, Curvature::Zero, |i, j| 1.0 + ((i * 7 + j * 3) % 5) as f64 * 0.1).unwrap();
        let same = perturb_metric(&s, 0.0, 3).unwrap();
        assert_eq!(same.space.matrix(), s.matrix());
        let p = perturb_metric(&s, 0.05, 3).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!(p.space.d(i, j) <= s.d(i, j) * 1.05 + 1e-15);
            }
        }
        assert!(p.space.triangle_violation().is_none());
        assert!(perturb_metric(&s, 0.3, 0).is_err());
    }

    #[test]
    fn net_cross_sheet_centres() {
        let p = ModelParams::new(2, Curvature::Zero, 1.0).unwrap();
        let a = ModelPoint::center(p, ModelKind::DoubleDisk, Sheet::Plus).unwrap();
        let b = ModelPoint::center(p, ModelKind::DoubleDisk, Sheet::Minus).unwrap();
        let d = graph_oracle(ModelKind::DoubleDisk, 0.05, &[(a.clone(), b.clone())]).unwrap()[0];
        let exact = model_distance(&a, &b, &SolverOpts::default()).unwrap();
        assert!(d >= exact - 1e-9 && d <= exact * 1.02, "{d} vs {exact}");
    }
}
