//! Independent oracles shared by the integration suites. The oracles never
//! call into the code paths they are used to check.
#![allow(dead_code)]

pub mod strategies;

use egonet::graph::Graph;
use egonet::layout::LayoutParams;
use egonet::math::Vec3;

/// Least-squares slope of `ln P(k)` against `ln k` for degrees in `[lo, hi]`,
/// using the empirical degree frequencies (zero-count degrees are skipped).
/// Returns the fitted exponent, i.e. the negated slope.
pub fn fitted_degree_exponent(g: &Graph, lo: usize, hi: usize) -> f64 {
    let n = g.node_count() as f64;
    let mut counts = vec![0usize; hi + 1];
    for v in g.nodes() {
        let k = g.neighbors(v).unwrap().len();
        if (lo..=hi).contains(&k) {
            counts[k] += 1;
        }
    }
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter(|&k| counts[k] > 0)
        .map(|k| ((k as f64).ln(), (counts[k] as f64 / n).ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -(sxy / sxx)
}

/// Same fit over logarithmic bins `[a, a * ratio)` starting at `lo`, with
/// each bin's count divided by its width and placed at the geometric mean
/// of its integer end points. Damps the sparse tail, where single counts
/// flatten the raw fit.
pub fn binned_degree_exponent(g: &Graph, lo: usize, hi: usize, ratio: f64) -> f64 {
    let n = g.node_count() as f64;
    let degrees: Vec<usize> = g.nodes().map(|v| g.neighbors(v).unwrap().len()).collect();
    let mut pts = Vec::new();
    let mut a = lo as f64;
    let end = hi as f64 + 1.0;
    while a < end {
        let b = (a * ratio).min(end);
        let (ka, kb) = (a.ceil() as usize, b.ceil() as usize);
        if kb > ka {
            let c = degrees.iter().filter(|&&k| k >= ka && k < kb).count();
            if c > 0 {
                let width = (kb - ka) as f64;
                let center = (ka as f64 * (kb - 1) as f64).sqrt();
                pts.push((center.ln(), (c as f64 / (n * width)).ln()));
            }
        }
        a = b;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -(sxy / sxx)
}

/// All-pairs hop distances by Floyd–Warshall; `usize::MAX` marks unreachable.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let inf = usize::MAX;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in g.edges() {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == inf {
                continue;
            }
            for j in 0..n {
                if d[k][j] == inf {
                    continue;
                }
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Common neighbors by scanning every node against both edge lists.
pub fn brute_common_neighbors(g: &Graph, u: usize, v: usize) -> Vec<usize> {
    let adjacent = |a: usize, b: usize| g.edges().iter().any(|&e| e == (a.min(b), a.max(b)));
    g.nodes()
        .filter(|&w| w != u && w != v && adjacent(w, u) && adjacent(w, v))
        .collect()
}

/// Exact O(N^2) many-body velocity increments, using the same softening
/// rule as the layout (squared distances below `distance_min^2` are
/// replaced by `sqrt(distance_min^2 * l2)`).
pub fn exact_many_body(positions: &[Vec3], params: &LayoutParams, alpha: f64) -> Vec<Vec3> {
    let dmin2 = params.distance_min * params.distance_min;
    positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut f = Vec3::zeros();
            for (j, q) in positions.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = q - p;
                let mut l2 = d.norm_squared();
                if l2 < dmin2 {
                    l2 = (dmin2 * l2).sqrt();
                }
                f += d * (params.repulsion_strength * alpha / l2);
            }
            f
        })
        .collect()
}

/// Small deterministic generator for test inputs (SplitMix64).
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn vec3(&mut self, half: f64) -> Vec3 {
        Vec3::new(self.range(-half, half), self.range(-half, half), self.range(-half, half))
    }
}

/// Erdős–Rényi-style random graph made connected by a random spanning chain.
pub fn random_connected_graph(n: usize, extra_edges: usize, rng: &mut TestRng) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.below(i + 1));
    }
    let mut edges = std::collections::BTreeSet::new();
    for w in order.windows(2) {
        edges.insert((w[0].min(w[1]), w[0].max(w[1])));
    }
    while edges.len() < n - 1 + extra_edges {
        let a = rng.below(n);
        let b = rng.below(n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Minimum-cost perfect assignment (Hungarian method, O(n^3)).
/// Returns the optimal total cost.
pub fn hungarian_min_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

/// Smallest angle between any two of `points` as seen from `center`,
/// by checking every pair.
pub fn min_pairwise_angle(points: &[Vec3], center: &Vec3) -> f64 {
    let mut best = std::f64::consts::PI;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let a = (points[i] - center).normalize();
            let b = (points[j] - center).normalize();
            best = best.min(a.dot(&b).clamp(-1.0, 1.0).acos());
        }
    }
    best
}

/// Asymptotic spacing of `k` evenly spread points on the unit sphere
/// (hexagonal packing estimate).
pub fn ideal_spacing(k: usize) -> f64 {
    (8.0 * std::f64::consts::PI / (3f64.sqrt() * k as f64)).sqrt()
}

/// Samples `samples` evenly spaced points on `p0..p1` and counts those whose
/// inside/outside status disagrees with coverage by `pieces`. Points within
/// `eps` of the surface are ignored.
pub fn clip_disagreements(p0: &Vec3, p1: &Vec3, center: &Vec3, r: f64, pieces: &[(Vec3, Vec3)], samples: usize, eps: f64) -> usize {
    let d = p1 - p0;
    let len2 = d.norm_squared();
    let param = |x: &Vec3| if len2 == 0.0 { 0.0 } else { (x - p0).dot(&d) / len2 };
    let spans: Vec<(f64, f64)> = pieces
        .iter()
        .map(|(a, b)| {
            let (ta, tb) = (param(a), param(b));
            (ta.min(tb), ta.max(tb))
        })
        .collect();
    let tol = if len2 == 0.0 { 0.0 } else { eps / len2.sqrt() };
    (0..samples)
        .filter(|&i| {
            let t = if samples == 1 { 0.0 } else { i as f64 / (samples - 1) as f64 };
            let x = p0 + d * t;
            let dist = (x - center).norm();
            if (dist - r).abs() <= eps {
                return false;
            }
            let outside = dist > r;
            let covered = spans.iter().any(|&(a, b)| t >= a - tol && t <= b + tol);
            outside != covered
        })
        .count()
}
