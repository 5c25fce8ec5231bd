//! ε-nets of spheres, balls and their products, with probe-based coverage checks.

use std::collections::HashSet;

use kdtree::distance::squared_euclidean;
use kdtree::KdTree;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::NetError;
use crate::rng::{self, Rng};

/// Hard cap on net size.
pub const DEFAULT_POINT_CAP: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSpaceSpec {
    /// Unit sphere `S^{d−1} ⊂ ℝ^d` with chord distance.
    Sphere { d: usize },
    /// Closed Euclidean ball of radius `radius` in `ℝ^d`.
    Ball { d: usize, radius: f64 },
    /// Product with the Euclidean product metric.
    Product(Vec<MetricSpaceSpec>),
}

impl MetricSpaceSpec {
    pub fn validate(&self) -> Result<(), NetError> {
        match self {
            MetricSpaceSpec::Sphere { d } | MetricSpaceSpec::Ball { d, .. } if *d == 0 => {
                Err(NetError::BadSpace("dimension must be at least 1".into()))
            }
            MetricSpaceSpec::Sphere { d } | MetricSpaceSpec::Ball { d, .. } if *d > 50 => {
                Err(NetError::BadSpace(format!("dimension {d} above 50")))
            }
            MetricSpaceSpec::Ball { radius, .. } if !(*radius > 0.0) => {
                Err(NetError::BadSpace(format!("radius must be positive, got {radius}")))
            }
            MetricSpaceSpec::Product(parts) if parts.is_empty() => {
                Err(NetError::BadSpace("empty product".into()))
            }
            MetricSpaceSpec::Product(parts) => parts.iter().try_for_each(|p| p.validate()),
            _ => Ok(()),
        }
    }

    /// Ambient coordinate dimension.
    pub fn dim(&self) -> usize {
        match self {
            MetricSpaceSpec::Sphere { d } | MetricSpaceSpec::Ball { d, .. } => *d,
            MetricSpaceSpec::Product(parts) => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            MetricSpaceSpec::Sphere { .. } => 2.0,
            MetricSpaceSpec::Ball { radius, .. } => 2.0 * radius,
            MetricSpaceSpec::Product(parts) => parts.iter().map(|p| p.diameter().powi(2)).sum::<f64>().sqrt(),
        }
    }

    /// Volumetric bound on a maximal ε-separated set: `(1 + 2R/ε)^d`.
    pub fn cardinality_bound(&self, eps: f64) -> Option<f64> {
        match self {
            MetricSpaceSpec::Sphere { d } => Some((1.0 + 2.0 / eps).powi(*d as i32)),
            MetricSpaceSpec::Ball { d, radius } => Some((1.0 + 2.0 * radius / eps).powi(*d as i32)),
            MetricSpaceSpec::Product(_) => None,
        }
    }

    /// Uniform draw from the space.
    pub fn sample_point(&self, rng: &mut Rng) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        self.sample_into(rng, &mut out);
        out
    }

    fn sample_into(&self, rng: &mut Rng, out: &mut Vec<f64>) {
        match self {
            MetricSpaceSpec::Sphere { d } => {
                let start = out.len();
                loop {
                    out.truncate(start);
                    out.extend((0..*d).map(|_| rng.sample::<f64, _>(StandardNormal)));
                    let norm = out[start..].iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-300 {
                        out[start..].iter_mut().for_each(|x| *x /= norm);
                        return;
                    }
                }
            }
            MetricSpaceSpec::Ball { d, radius } => {
                let start = out.len();
                MetricSpaceSpec::Sphere { d: *d }.sample_into(rng, out);
                let u: f64 = rng.gen();
                let r = radius * u.powf(1.0 / *d as f64);
                out[start..].iter_mut().for_each(|x| *x *= r);
            }
            MetricSpaceSpec::Product(parts) => parts.iter().for_each(|p| p.sample_into(rng, out)),
        }
    }

    /// Whether `x` lies in the space up to `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            MetricSpaceSpec::Sphere { .. } => (norm(x) - 1.0).abs() <= tol,
            MetricSpaceSpec::Ball { radius, .. } => norm(x) <= radius + tol,
            MetricSpaceSpec::Product(parts) => {
                let mut off = 0;
                parts.iter().all(|p| {
                    let k = p.dim();
                    let ok = p.contains(&x[off..off + k], tol);
                    off += k;
                    ok
                })
            }
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetStrategy {
    /// Maximal ε-separated set by rejection sampling.
    GreedyPacking {
        /// Stop after `streak_factor·|net|` consecutive rejections.
        streak_factor: u64,
        point_cap: usize,
    },
    /// Explicit circle and latitude-ring constructions (`d ≤ 3`), cubic grids for balls.
    AngularLattice,
    /// Normalized lattice points from a spherical shell (`Z^d`, or `E8` when `d = 8`);
    /// cubic grids for balls.
    ShellLattice,
    /// Cartesian product of component nets.
    Product,
}

impl NetStrategy {
    pub fn greedy() -> Self {
        NetStrategy::GreedyPacking { streak_factor: 10_000, point_cap: DEFAULT_POINT_CAP }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NetStrategy::GreedyPacking { .. } => "greedy_packing",
            NetStrategy::AngularLattice => "angular_lattice",
            NetStrategy::ShellLattice => "shell_lattice",
            NetStrategy::Product => "product",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub probe_count: usize,
    pub max_probe_distance: f64,
    pub probe_seed: u64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A finite point set with its target radius. Coordinates are stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub space: MetricSpaceSpec,
    pub epsilon: f64,
    pub strategy: NetStrategy,
    pub seed: u64,
    pub dim: usize,
    pub coords: Vec<f64>,
    pub verification: Option<CoverageReport>,
}

impl Net {
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn cardinality_bound(&self) -> Option<f64> {
        self.space.cardinality_bound(self.epsilon)
    }

    /// Drop point `i` (for adversarial checks).
    pub fn remove_point(&mut self, i: usize) {
        self.coords.drain(i * self.dim..(i + 1) * self.dim);
        self.verification = None;
    }

    /// Hex SHA-256 over header fields and coordinate bits.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let header = serde_json::to_string(&(&self.space, self.epsilon, &self.strategy, self.seed, self.dim))
            .expect("net header serializes");
        h.update(header.as_bytes());
        for x in &self.coords {
            h.update(x.to_bits().to_le_bytes());
        }
        format!("{:x}", h.finalize())
    }

    /// Smallest pairwise distance (quadratic in the net size).
    pub fn min_separation(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let p = self.point(i);
                ((i + 1)..n)
                    .map(|j| squared_euclidean(p, self.point(j)))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Flat table: a `#`-prefixed JSON header line, then one comma-separated row per point.
    pub fn to_table(&self) -> String {
        let header = serde_json::json!({
            "space": self.space,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "strategy": self.strategy,
            "dim": self.dim,
            "count": self.len(),
            "digest": self.digest(),
            "verification": self.verification,
        });
        let mut out = format!("# {header}\n");
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Net, NetError> {
        let mut lines = text.lines();
        let first = lines.next().and_then(|l| l.strip_prefix("# ")).ok_or_else(|| NetError::BadSpace("missing header".into()))?;
        let header: serde_json::Value =
            serde_json::from_str(first).map_err(|e| NetError::BadSpace(format!("header: {e}")))?;
        let field = |k: &str| header.get(k).cloned().ok_or_else(|| NetError::BadSpace(format!("header lacks {k}")));
        let parse = |v: serde_json::Value| v;
        let space: MetricSpaceSpec = serde_json::from_value(parse(field("space")?)).map_err(|e| NetError::BadSpace(e.to_string()))?;
        let strategy: NetStrategy = serde_json::from_value(field("strategy")?).map_err(|e| NetError::BadSpace(e.to_string()))?;
        let verification: Option<CoverageReport> =
            serde_json::from_value(field("verification")?).map_err(|e| NetError::BadSpace(e.to_string()))?;
        let epsilon = field("epsilon")?.as_f64().ok_or_else(|| NetError::BadSpace("epsilon".into()))?;
        let seed = field("seed")?.as_u64().ok_or_else(|| NetError::BadSpace("seed".into()))?;
        let dim = field("dim")?.as_u64().ok_or_else(|| NetError::BadSpace("dim".into()))? as usize;
        let mut coords = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let row: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| NetError::BadSpace(format!("row: {e}")))?;
            if row.len() != dim {
                return Err(NetError::BadSpace(format!("row has {} columns, expected {dim}", row.len())));
            }
            coords.extend(row);
        }
        let net = Net { space, epsilon, strategy, seed, dim, coords, verification };
        if let Some(d) = header.get("digest").and_then(|d| d.as_str()) {
            if d != net.digest() {
                return Err(NetError::BadSpace("digest mismatch".into()));
            }
        }
        Ok(net)
    }
}

/// Build an ε-net of `space`.
pub fn build_net(
    space: &MetricSpaceSpec,
    epsilon: f64,
    seed: u64,
    strategy: &NetStrategy,
) -> Result<Net, NetError> {
    space.validate()?;
    let diameter = space.diameter();
    if !(epsilon > 0.0 && epsilon < diameter) {
        return Err(NetError::EpsilonOutOfRange { eps: epsilon, diameter });
    }
    if let MetricSpaceSpec::Product(parts) = space {
        // split ε evenly in squares so the product radius is ε
        let each = epsilon / (parts.len() as f64).sqrt();
        let nets = parts
            .iter()
            .enumerate()
            .map(|(i, p)| build_net(p, each, rng::derive_seed(seed, i as u64), strategy))
            .collect::<Result<Vec<_>, _>>()?;
        let mut net = product_net(&nets)?;
        net.seed = seed;
        return Ok(net);
    }
    let coords = match strategy {
        NetStrategy::GreedyPacking { streak_factor, point_cap } => {
            greedy(space, epsilon, seed, *streak_factor, *point_cap)?
        }
        NetStrategy::AngularLattice => angular(space, epsilon)?,
        NetStrategy::ShellLattice => match space {
            MetricSpaceSpec::Sphere { d } => shell_lattice(*d, epsilon, DEFAULT_POINT_CAP)?,
            MetricSpaceSpec::Ball { d, radius } => ball_grid(*d, *radius, epsilon, DEFAULT_POINT_CAP)?,
            MetricSpaceSpec::Product(_) => unreachable!(),
        },
        NetStrategy::Product => return Err(NetError::UnsupportedStrategy("product".into())),
    };
    let net = Net {
        space: space.clone(),
        epsilon,
        strategy: strategy.clone(),
        seed,
        dim: space.dim(),
        coords,
        verification: None,
    };
    if let Some(bound) = net.cardinality_bound() {
        if net.len() as f64 > bound {
            return Err(NetError::BudgetExceeded(net.len()));
        }
    }
    Ok(net)
}

fn greedy(
    space: &MetricSpaceSpec,
    eps: f64,
    seed: u64,
    streak_factor: u64,
    point_cap: usize,
) -> Result<Vec<f64>, NetError> {
    let dim = space.dim();
    let eps2 = eps * eps;
    let mut tree: KdTree<f64, usize, Vec<f64>> = KdTree::new(dim);
    let mut coords = Vec::new();
    let mut count = 0usize;
    let mut streak = 0u64;
    let mut rng = rng::substream(seed, rng::tag("greedy"), 0);
    loop {
        let p = space.sample_point(&mut rng);
        let accept = match tree.nearest(&p, 1, &squared_euclidean) {
            Ok(v) if !v.is_empty() => v[0].0 >= eps2,
            _ => true,
        };
        if accept {
            if count >= point_cap {
                return Err(NetError::BudgetExceeded(point_cap));
            }
            coords.extend_from_slice(&p);
            tree.add(p, count).map_err(|e| NetError::BadSpace(format!("kd-tree: {e:?}")))?;
            count += 1;
            streak = 0;
        } else {
            streak += 1;
            if streak >= streak_factor * count as u64 {
                return Ok(coords);
            }
        }
    }
}

fn angular(space: &MetricSpaceSpec, eps: f64) -> Result<Vec<f64>, NetError> {
    match space {
        MetricSpaceSpec::Sphere { d: 1 } => Ok(vec![-1.0, 1.0]),
        MetricSpaceSpec::Sphere { d: 2 } => {
            let k = (std::f64::consts::PI / (2.0 * (eps / 2.0).asin())).ceil().max(2.0) as usize;
            Ok((0..k)
                .flat_map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                    [a.cos(), a.sin()]
                })
                .collect())
        }
        MetricSpaceSpec::Sphere { d: 3 } => {
            // rings of latitude: polar gap ≤ θ and azimuthal arc ≤ θ/2 where θ is
            // the angle with chord ε, so every point is within angle θ of a node
            let theta = 2.0 * (eps / 2.0).min(1.0).asin();
            let rings = (std::f64::consts::PI / theta).ceil() as usize;
            let mut out = Vec::new();
            for j in 0..=rings {
                let phi = std::f64::consts::PI * j as f64 / rings as f64;
                let s = phi.sin();
                let k = ((2.0 * std::f64::consts::PI * s) / theta).ceil().max(1.0) as usize;
                let k = if j == 0 || j == rings { 1 } else { k };
                for i in 0..k {
                    let lam = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                    out.extend_from_slice(&[s * lam.cos(), s * lam.sin(), phi.cos()]);
                }
            }
            Ok(out)
        }
        MetricSpaceSpec::Ball { d, radius } if *d <= 3 => ball_grid(*d, *radius, eps, DEFAULT_POINT_CAP),
        _ => Err(NetError::UnsupportedStrategy(format!("angular lattice needs d <= 3, got {:?}", space))),
    }
}

/// Enumerate integer vectors `z` with `‖scale·(z + offset)‖ ≤ r_max` and call `visit`.
fn enumerate_ball(d: usize, scale: f64, offset: f64, r_max: f64, visit: &mut dyn FnMut(&[i64])) {
    fn rec(
        i: usize,
        d: usize,
        scale: f64,
        offset: f64,
        budget: f64,
        z: &mut Vec<i64>,
        visit: &mut dyn FnMut(&[i64]),
    ) {
        if i == d {
            visit(z);
            return;
        }
        let lim = budget.max(0.0).sqrt() / scale;
        let lo = (-lim - offset).ceil() as i64;
        let hi = (lim - offset).floor() as i64;
        for k in lo..=hi {
            let c = scale * (k as f64 + offset);
            let rest = budget - c * c;
            if rest < -1e-12 {
                continue;
            }
            z.push(k);
            rec(i + 1, d, scale, offset, rest, z, visit);
            z.pop();
        }
    }
    let mut z = Vec::with_capacity(d);
    rec(0, d, scale, offset, r_max * r_max, &mut z, visit);
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Lattice points of covering radius `μ = ε√(1 − ε²/4)` lying within `μ` of the
/// unit sphere, normalized. Any unit `u` has a lattice point `x` with `‖x − u‖ ≤ μ`,
/// so the angle between `u` and `x` is at most `arcsin μ` and the chord to
/// `x/‖x‖` is at most `ε`.
fn shell_lattice(d: usize, eps: f64, cap: usize) -> Result<Vec<f64>, NetError> {
    if d == 1 {
        return Ok(vec![-1.0, 1.0]);
    }
    let mu = (eps * (1.0 - eps * eps / 4.0).max(0.0).sqrt()).min(0.99);
    let (lo, hi) = (1.0 - mu, 1.0 + mu);
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out = Vec::new();
    let mut overflow = false;
    let mut push = |y: &[i64], scale: f64, out: &mut Vec<f64>| {
        // y is an integer representative of the lattice point x = scale·y
        let g = y.iter().fold(0i64, |g, &v| gcd(g, v));
        let key: Vec<i64> = y.iter().map(|v| v / g).collect();
        if seen.insert(key) {
            if seen.len() > cap {
                overflow = true;
            }
            let n = scale * y.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            out.extend(y.iter().map(|&v| scale * v as f64 / n));
        }
    };
    if d == 8 {
        // E8 = D8 ∪ (D8 + ½·1), covering radius 1 at minimal norm √2
        let s = mu;
        for offset in [0.0, 0.5] {
            let mut hits = Vec::new();
            enumerate_ball(8, s, offset, hi, &mut |z| {
                let y: Vec<i64> = z.iter().map(|&k| 2 * k + (2.0 * offset) as i64).collect();
                if y.iter().sum::<i64>().rem_euclid(4) != 0 {
                    return;
                }
                let r = 0.5 * s * y.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                if r >= lo && r <= hi && r > 0.0 {
                    hits.push(y);
                }
            });
            for y in hits {
                push(&y, 0.5 * s, &mut out);
            }
        }
    } else {
        let s = 2.0 * mu / (d as f64).sqrt();
        let mut hits = Vec::new();
        enumerate_ball(d, s, 0.0, hi, &mut |z| {
            let r = s * z.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            if r >= lo && r <= hi && r > 0.0 {
                hits.push(z.to_vec());
            }
        });
        for z in hits {
            push(&z, s, &mut out);
        }
    }
    if overflow {
        return Err(NetError::BudgetExceeded(cap));
    }
    Ok(out)
}

/// Cubic grid with covering radius `ε`, clipped radially into the ball.
/// Radial clipping is the metric projection onto a convex set, so it does not
/// increase distances.
fn ball_grid(d: usize, radius: f64, eps: f64, cap: usize) -> Result<Vec<f64>, NetError> {
    let s = 2.0 * eps / (d as f64).sqrt();
    let mut out = Vec::new();
    let mut count = 0usize;
    enumerate_ball(d, s, 0.0, radius + eps, &mut |z| {
        count += 1;
        if count > cap {
            return;
        }
        let x: Vec<f64> = z.iter().map(|&k| s * k as f64).collect();
        let n = norm(&x);
        let f = if n > radius { radius / n } else { 1.0 };
        out.extend(x.iter().map(|v| v * f));
    });
    if count > cap {
        return Err(NetError::BudgetExceeded(cap));
    }
    // clipping can merge points; drop exact duplicates
    let mut seen = HashSet::new();
    let mut dedup = Vec::with_capacity(out.len());
    for p in out.chunks_exact(d) {
        let key: Vec<u64> = p.iter().map(|v| v.to_bits()).collect();
        if seen.insert(key) {
            dedup.extend_from_slice(p);
        }
    }
    Ok(dedup)
}

/// Cartesian product of nets; covering radius `√(Σ εᵢ²)`.
pub fn product_net(nets: &[Net]) -> Result<Net, NetError> {
    match nets {
        [] => Err(NetError::BadSpace("empty product".into())),
        [single] => Ok(single.clone()),
        _ => {
            let dim: usize = nets.iter().map(|n| n.dim).sum();
            let total: usize = nets.iter().map(|n| n.len()).product();
            if total > DEFAULT_POINT_CAP {
                return Err(NetError::BudgetExceeded(DEFAULT_POINT_CAP));
            }
            let mut coords = Vec::with_capacity(total * dim);
            let mut idx = vec![0usize; nets.len()];
            for _ in 0..total {
                for (k, net) in nets.iter().enumerate() {
                    coords.extend_from_slice(net.point(idx[k]));
                }
                for k in (0..nets.len()).rev() {
                    idx[k] += 1;
                    if idx[k] < nets[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            Ok(Net {
                space: MetricSpaceSpec::Product(nets.iter().map(|n| n.space.clone()).collect()),
                epsilon: nets.iter().map(|n| n.epsilon * n.epsilon).sum::<f64>().sqrt(),
                strategy: NetStrategy::Product,
                seed: nets[0].seed,
                dim,
                coords,
                verification: None,
            })
        }
    }
}

/// Nearest-point index over a net.
pub struct NetIndex<'a> {
    tree: KdTree<f64, usize, &'a [f64]>,
}

impl<'a> NetIndex<'a> {
    pub fn new(net: &'a Net) -> Self {
        let mut tree = KdTree::with_capacity(net.dim, 64);
        for (i, p) in net.points().enumerate() {
            tree.add(p, i).expect("finite coordinates");
        }
        NetIndex { tree }
    }

    /// `(distance, index)` of the nearest net point.
    pub fn nearest(&self, x: &[f64]) -> (f64, usize) {
        let v = self.tree.nearest(x, 1, &squared_euclidean).expect("query dimension matches");
        (v[0].0.sqrt(), *v[0].1)
    }
}

/// Max distance from `probe_count` uniform probes to the net.
pub fn verify_covering(net: &Net, probe_count: usize, seed: u64, tolerance: f64) -> CoverageReport {
    let probe_count = probe_count.max(1);
    let index = NetIndex::new(net);
    let t = rng::tag("probe");
    let max = (0..probe_count)
        .into_par_iter()
        .map(|i| {
            let x = net.space.sample_point(&mut rng::substream(seed, t, i as u64));
            index.nearest(&x).0
        })
        .reduce(|| 0.0, f64::max);
    CoverageReport {
        probe_count,
        max_probe_distance: max,
        probe_seed: seed,
        tolerance,
        pass: max <= net.epsilon * (1.0 + tolerance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(eps: f64, strategy: NetStrategy) -> Net {
        build_net(&MetricSpaceSpec::Sphere { d: 2 }, eps, 1, &strategy).unwrap()
    }

    #[test]
    fn zero_dimensional_sphere() {
        let s = MetricSpaceSpec::Sphere { d: 1 };
        for strat in [NetStrategy::greedy(), NetStrategy::AngularLattice, NetStrategy::ShellLattice] {
            let net = build_net(&s, 1.5, 3, &strat).unwrap();
            assert_eq!(net.len(), 2);
            assert_eq!(verify_covering(&net, 1000, 1, 0.0).max_probe_distance, 0.0);
        }
    }

    #[test]
    fn circle_greedy_sizes() {
        // covering needs ⌈π/(2 asin(ε/2))⌉ = 7 points; ε-separation allows at most ⌊π/asin(ε/2)⌋ = 12
        let net = circle(0.5, NetStrategy::greedy());
        assert!(net.len() >= 7 && net.len() <= 12, "{}", net.len());
        assert!(net.min_separation() >= 0.5);
    }

    #[test]
    fn circle_lattice_exact() {
        let net = circle(0.5, NetStrategy::AngularLattice);
        assert_eq!(net.len(), 7);
        let rep = verify_covering(&net, 100_000, 2, 0.0);
        assert!(rep.pass);
        assert!(rep.max_probe_distance <= 2.0 * (std::f64::consts::PI / 14.0).sin() + 1e-12);
        let thirteen = regular_polygon(13, 0.5);
        let rep = verify_covering(&thirteen, 100_000, 2, 0.0);
        assert!(rep.pass && rep.max_probe_distance <= 2.0 * (std::f64::consts::PI / 26.0).sin() + 1e-12);
    }

    fn regular_polygon(k: usize, eps: f64) -> Net {
        let coords = (0..k)
            .flat_map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        Net {
            space: MetricSpaceSpec::Sphere { d: 2 },
            epsilon: eps,
            strategy: NetStrategy::AngularLattice,
            seed: 0,
            dim: 2,
            coords,
            verification: None,
        }
    }

    #[test]
    fn removing_points_breaks_coverage() {
        let mut net = regular_polygon(13, 0.5);
        for i in (0..13).step_by(2).rev() {
            net.remove_point(i);
        }
        assert_eq!(net.len(), 6);
        assert!(!verify_covering(&net, 100_000, 2, 0.0).pass);
        // nodes 11 and 1 are now adjacent; probe the middle of that gap
        let a = -std::f64::consts::PI / 13.0;
        let (d, _) = NetIndex::new(&net).nearest(&[a.cos(), a.sin()]);
        assert!(d > 0.5);
    }

    #[test]
    fn ball_cardinality() {
        let s = MetricSpaceSpec::Ball { d: 3, radius: 1.0 };
        for strat in [NetStrategy::greedy(), NetStrategy::AngularLattice] {
            let net = build_net(&s, 0.5, 4, &strat).unwrap();
            assert!(net.len() <= 125);
            assert!(net.points().all(|p| s.contains(p, 1e-12)));
            assert!(verify_covering(&net, 20_000, 5, 0.05).pass);
        }
    }

    #[test]
    fn sphere3_lattices_cover() {
        let s = MetricSpaceSpec::Sphere { d: 3 };
        for strat in [NetStrategy::AngularLattice, NetStrategy::ShellLattice] {
            let net = build_net(&s, 0.3, 4, &strat).unwrap();
            assert!(net.points().all(|p| s.contains(p, 1e-12)));
            assert!(net.len() as f64 <= net.cardinality_bound().unwrap());
            assert!(verify_covering(&net, 20_000, 5, 0.0).pass);
        }
    }

    #[test]
    fn product_radius() {
        let a = build_net(&MetricSpaceSpec::Ball { d: 2, radius: 1.0 }, 0.4, 1, &NetStrategy::AngularLattice).unwrap();
        let b = circle(0.4, NetStrategy::AngularLattice);
        assert_eq!(product_net(&[a.clone()]).unwrap(), a);
        let p = product_net(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(p.len(), a.len() * b.len());
        assert!((p.epsilon - 0.4 * 2f64.sqrt()).abs() < 1e-12);
        assert!(verify_covering(&p, 20_000, 9, 0.0).pass);
    }

    #[test]
    fn epsilon_range_and_determinism() {
        let s = MetricSpaceSpec::Sphere { d: 2 };
        assert!(matches!(build_net(&s, 2.5, 0, &NetStrategy::greedy()), Err(NetError::EpsilonOutOfRange { .. })));
        let a = build_net(&s, 0.3, 5, &NetStrategy::greedy()).unwrap();
        let b = build_net(&s, 0.3, 5, &NetStrategy::greedy()).unwrap();
        assert_eq!(a.coords, b.coords);
        assert!(matches!(
            build_net(&MetricSpaceSpec::Sphere { d: 4 }, 0.5, 0, &NetStrategy::AngularLattice),
            Err(NetError::UnsupportedStrategy(_))
        ));
    }

    #[test]
    fn table_round_trip() {
        let mut net = circle(0.5, NetStrategy::AngularLattice);
        net.verification = Some(verify_covering(&net, 100, 1, 0.0));
        let back = Net::from_table(&net.to_table()).unwrap();
        assert_eq!(back, net);
        let tampered = net.to_table().replacen("\n1.0", "\n0.9", 1);
        assert!(Net::from_table(&tampered).is_err());
    }
}
