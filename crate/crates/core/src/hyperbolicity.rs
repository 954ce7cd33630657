//! Empirical hyperbolicity and bounded-coset-penetration constants.
//!
//! `δ` is the four-point constant: for every quadruple the two largest of the
//! three pair sums differ by at most `2δ`. It is computed exactly by taking the
//! maximum over biconnected components (the four-point constant of a graph is
//! attained inside one of its blocks) and scanning pairs of vertex pairs in
//! decreasing distance order inside each block.
//!
//! All constants measured on a ball are lower bounds for the constants of the
//! infinite graph; reports call them "empirical at radius R".

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::cayley::bfs_distances;
use crate::coned::{quasi_pair_ok, ConedBall, Rational, RelativePath, DEFAULT_PATH_CAP};
use crate::error::{CoreError, Result};

/// A non-negative half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInteger(pub u32);

impl HalfInteger {
    pub fn from_twice(twice: u32) -> Self {
        HalfInteger(twice)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

impl Serialize for HalfInteger {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

/// Which quadruples are examined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Sample {
    All,
    Random { count: usize, seed: u64 },
}

/// Vertex count above which callers are expected to switch to sampling.
pub const SAMPLING_THRESHOLD: usize = 2_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaEstimate {
    pub delta: HalfInteger,
    pub method: &'static str,
    pub vertex_sample: Sample,
    pub boundary_margin: usize,
    pub exact: bool,
    pub vertices: usize,
}

fn check_connected(adj: &[Vec<usize>]) -> Result<()> {
    if adj.is_empty() {
        return Ok(());
    }
    let d = bfs_distances(adj.len(), 0, usize::MAX, |x| adj[x].iter().copied());
    if d.contains(&u32::MAX) {
        Err(CoreError::Disconnected)
    } else {
        Ok(())
    }
}

/// Four-point `δ` of a connected graph given by adjacency lists.
pub fn delta_four_point(adj: &[Vec<usize>], sample: Sample) -> Result<DeltaEstimate> {
    check_connected(adj)?;
    let twice = match sample {
        Sample::All => biconnected_components(adj)
            .iter()
            .filter(|b| b.len() >= 4)
            .map(|b| block_delta(adj, b))
            .max()
            .unwrap_or(0),
        Sample::Random { count, seed } => {
            let all: Vec<usize> = (0..adj.len()).collect();
            sampled_delta(adj, &all, count, seed)
        }
    };
    Ok(DeltaEstimate {
        delta: HalfInteger(twice),
        method: "four-point",
        vertex_sample: sample,
        boundary_margin: 0,
        exact: matches!(sample, Sample::All),
        vertices: adj.len(),
    })
}

/// Four-point `δ` over the quadruples drawn from `vertices` only, with
/// distances measured in the whole graph.
pub fn delta_four_point_on(
    adj: &[Vec<usize>],
    vertices: &[usize],
    sample: Sample,
) -> Result<DeltaEstimate> {
    check_connected(adj)?;
    let twice = match sample {
        Sample::All => {
            // δ over a vertex subset never exceeds δ of the whole graph,
            // which is the largest δ of a block.
            let ceiling = biconnected_components(adj)
                .iter()
                .filter(|b| b.len() >= 4)
                .map(|b| block_delta(adj, b))
                .max()
                .unwrap_or(0);
            if ceiling == 0 {
                0
            } else {
                let dist: Vec<Vec<u32>> = vertices
                    .iter()
                    .map(|&v| {
                        let d = bfs_distances(adj.len(), v, usize::MAX, |x| adj[x].iter().copied());
                        vertices.iter().map(|&w| d[w]).collect()
                    })
                    .collect();
                pair_scan(&dist, ceiling)
            }
        }
        Sample::Random { count, seed } => sampled_delta(adj, vertices, count, seed),
    };
    Ok(DeltaEstimate {
        delta: HalfInteger(twice),
        method: "four-point",
        vertex_sample: sample,
        boundary_margin: 0,
        exact: matches!(sample, Sample::All),
        vertices: vertices.len(),
    })
}

/// `δ` of a ball graph restricted to vertices at depth `<= radius - margin`.
pub fn delta_of_ball(
    adj: &[Vec<usize>],
    depth: impl Fn(usize) -> usize,
    radius: usize,
    margin: usize,
    sample: Sample,
) -> Result<DeltaEstimate> {
    let mut est = if margin == 0 {
        delta_four_point(adj, sample)?
    } else {
        let keep: Vec<usize> = (0..adj.len())
            .filter(|&v| depth(v) + margin <= radius)
            .collect();
        delta_four_point_on(adj, &keep, sample)?
    };
    est.boundary_margin = margin;
    Ok(est)
}

fn block_delta(adj: &[Vec<usize>], block: &[usize]) -> u32 {
    let pos: HashMap<usize, usize> = block.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let local: Vec<Vec<usize>> = block
        .iter()
        .map(|&v| adj[v].iter().filter_map(|w| pos.get(w).copied()).collect())
        .collect();
    let dist: Vec<Vec<u32>> = (0..block.len())
        .map(|i| bfs_distances(block.len(), i, usize::MAX, |x| local[x].iter().copied()))
        .collect();
    pair_scan(&dist, u32::MAX)
}

/// Exact `2δ` over a distance matrix.
///
/// Pairs `{x, y}` are visited in decreasing distance; each is combined with
/// every earlier (longer or equal) pair `{z, w}`. When `d(x, y) + d(z, w)` is
/// the largest sum, the defect is at most `2 d(x, y)`, so the scan stops once
/// that bound cannot beat the current maximum, or once `ceiling` (a known
/// upper bound) is reached.
fn pair_scan(dist: &[Vec<u32>], ceiling: u32) -> u32 {
    let n = dist.len();
    let mut pairs: Vec<(u32, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for (x, row) in dist.iter().enumerate() {
        for (y, &dxy) in row.iter().enumerate().skip(x + 1) {
            pairs.push((dxy, x, y));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut best = 0u32;
    for i in 0..pairs.len() {
        let (dxy, x, y) = pairs[i];
        if 2 * dxy <= best || best >= ceiling {
            break;
        }
        for &(dzw, z, w) in &pairs[..i] {
            if z == x || z == y || w == x || w == y {
                continue;
            }
            let s1 = dxy + dzw;
            let s2 = dist[x][z] + dist[y][w];
            let s3 = dist[x][w] + dist[y][z];
            if s1 >= s2 && s1 >= s3 {
                best = best.max(s1 - s2.max(s3));
            }
        }
    }
    best
}

fn defect(d: [[u32; 4]; 4]) -> u32 {
    let mut sums = [d[0][1] + d[2][3], d[0][2] + d[1][3], d[0][3] + d[1][2]];
    sums.sort_unstable();
    sums[2] - sums[1]
}

fn sampled_delta(adj: &[Vec<usize>], vertices: &[usize], count: usize, seed: u64) -> u32 {
    if vertices.len() < 4 {
        return 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: HashMap<usize, Vec<u32>> = HashMap::new();
    let mut best = 0;
    for _ in 0..count {
        let mut q = [0usize; 4];
        let mut k = 0;
        while k < 4 {
            let v = vertices[rng.gen_range(0..vertices.len())];
            if !q[..k].contains(&v) {
                q[k] = v;
                k += 1;
            }
        }
        let mut d = [[0u32; 4]; 4];
        for i in 0..4 {
            let row = cache.entry(q[i]).or_insert_with(|| {
                bfs_distances(adj.len(), q[i], usize::MAX, |x| adj[x].iter().copied())
            });
            for j in 0..4 {
                d[i][j] = row[q[j]];
            }
        }
        best = best.max(defect(d));
    }
    best
}

/// Vertex sets of the biconnected components (blocks), each sorted; blocks
/// are listed in order of their smallest vertex.
pub fn biconnected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        if adj[root].is_empty() {
            blocks.push(vec![root]);
            continue;
        }
        // (vertex, parent, next neighbour position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, parent, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if w == parent || w == v {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push((v, w));
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, v, 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push((v, w));
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] >= disc[u] {
                        let mut block = Vec::new();
                        while let Some((a, b)) = edge_stack.pop() {
                            block.push(a);
                            block.push(b);
                            if (a, b) == (u, v) {
                                break;
                            }
                        }
                        block.sort_unstable();
                        block.dedup();
                        blocks.push(block);
                    }
                }
            }
        }
    }
    blocks.sort();
    blocks
}

/// Configuration of the BCP estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BcpConfig {
    #[serde(serialize_with = "ser_rational")]
    pub t: Rational,
    pub d_max: usize,
    /// Endpoints must lie at depth `<= R - boundary_margin`.
    pub boundary_margin: usize,
    pub path_cap: usize,
}

fn ser_rational<S: Serializer>(t: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_string())
}

impl BcpConfig {
    pub fn new(t: Rational, d_max: usize) -> Self {
        BcpConfig {
            t,
            d_max,
            boundary_margin: 1,
            path_cap: DEFAULT_PATH_CAP * 100,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BcpWitness {
    pub first: RelativePath,
    pub second: RelativePath,
    pub coset: usize,
    pub clause: u8,
    pub requirement: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BcpEstimate {
    #[serde(serialize_with = "ser_rational")]
    pub t: Rational,
    pub r_hat: usize,
    pub witnesses: Vec<BcpWitness>,
    pub radius: usize,
    pub d_max: usize,
    pub boundary_margin: usize,
    pub endpoint_pairs: usize,
    pub paths_examined: usize,
}

/// How a path meets one coset: first vertex there, last vertex there.
#[derive(Clone, Copy, Debug)]
struct Passage {
    coset: usize,
    entry: usize,
    exit: usize,
}

/// A projected path together with its coset passages.
type PathWithPassages = (Vec<usize>, Vec<Passage>);

fn passages(cb: &ConedBall, path: &[usize]) -> Vec<Passage> {
    let mut out: Vec<Passage> = Vec::new();
    for &v in path {
        let c = cb.cosets.coset_of(v);
        match out.iter_mut().find(|p| p.coset == c) {
            Some(p) => p.exit = v,
            None => out.push(Passage {
                coset: c,
                entry: v,
                exit: v,
            }),
        }
    }
    out.sort_by_key(|p| p.coset);
    out
}

/// Least `r` making both BCP clauses hold for `c1` against `c2`, with the
/// coset and clause attaining it.
fn pair_requirement(cb: &ConedBall, c1: &[Passage], c2: &[Passage]) -> (usize, usize, u8) {
    let mut best = (0, usize::MAX, 0);
    for p in c1 {
        let travel = cb.peripheral_distance(p.entry, p.exit).unwrap();
        match c2.binary_search_by_key(&p.coset, |q| q.coset) {
            Err(_) => {
                if travel > best.0 {
                    best = (travel, p.coset, 1);
                }
            }
            Ok(i) => {
                let q = &c2[i];
                let gap = cb
                    .peripheral_distance(p.entry, q.entry)
                    .unwrap()
                    .max(cb.peripheral_distance(p.exit, q.exit).unwrap());
                if gap > best.0 {
                    best = (gap, p.coset, 2);
                }
            }
        }
    }
    best
}

/// Reduced loop-free `Γ̂` paths out of `source` with at most `d_max` edges:
/// no vertex repeats and no three consecutive vertices share a coset.
fn reduced_paths_from(
    cb: &ConedBall,
    source: usize,
    d_max: usize,
    cap: usize,
    out: &mut Vec<Vec<usize>>,
) -> Result<()> {
    fn go(
        cb: &ConedBall,
        d_max: usize,
        cap: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        if path.len() > 1 {
            if out.len() >= cap {
                return Err(CoreError::CapExceeded {
                    what: "quasi-geodesic paths",
                    limit: cap,
                });
            }
            out.push(path.clone());
        }
        if path.len() > d_max {
            return Ok(());
        }
        let x = *path.last().unwrap();
        let prev = (path.len() >= 2).then(|| path[path.len() - 2]);
        for &w in cb.neighbors(x) {
            let w = w as usize;
            if path.contains(&w) {
                continue;
            }
            if let Some(p) = prev {
                if cb.same_coset(p, x) && cb.same_coset(x, w) {
                    continue;
                }
            }
            path.push(w);
            go(cb, d_max, cap, path, out)?;
            path.pop();
        }
        Ok(())
    }
    let mut path = vec![source];
    go(cb, d_max, cap, &mut path, out)
}

/// Empirical `r_BCP(T)`: the least `r` for which both clauses hold for every
/// examined pair of `T`-relative quasi-geodesics with common endpoints.
pub fn estimate_rbcp(cb: &ConedBall, cfg: &BcpConfig) -> Result<BcpEstimate> {
    estimate_rbcp_filtered(cb, cfg, |_, _| true)
}

/// As [`estimate_rbcp`], restricted to endpoint pairs accepted by `keep`.
pub fn estimate_rbcp_filtered(
    cb: &ConedBall,
    cfg: &BcpConfig,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<BcpEstimate> {
    let radius = cb.radius();
    let interior: Vec<usize> = (0..cb.len())
        .filter(|&v| cb.base.depth(v) + cfg.boundary_margin <= radius)
        .collect();
    if interior.len() < 2 {
        return Err(CoreError::NoInteriorPairs {
            radius,
            margin: cfg.boundary_margin,
        });
    }
    let is_interior = {
        let mut m = vec![false; cb.len()];
        for &v in &interior {
            m[v] = true;
        }
        m
    };
    let apsp = cb.all_pairs()?;
    let n = cb.len();
    let quasi = |p: &[usize]| -> bool {
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                let d = apsp[p[i] * n + p[j]];
                if d == u16::MAX || !quasi_pair_ok((j - i) as u64, d as u64, cfg.t) {
                    return false;
                }
            }
        }
        true
    };

    let mut r_hat = 0usize;
    let mut witness: Option<(Vec<usize>, Vec<usize>, usize, u8)> = None;
    let mut endpoint_pairs = 0usize;
    let mut paths_examined = 0usize;
    let mut buffer = Vec::new();
    for &x in &interior {
        buffer.clear();
        reduced_paths_from(cb, x, cfg.d_max, cfg.path_cap, &mut buffer)?;
        let mut by_target: std::collections::BTreeMap<usize, Vec<PathWithPassages>> =
            Default::default();
        for p in buffer.drain(..) {
            let y = *p.last().unwrap();
            if y <= x || !is_interior[y] || !keep(x, y) || !quasi(&p) {
                continue;
            }
            let pass = passages(cb, &p);
            by_target.entry(y).or_default().push((p, pass));
        }
        for group in by_target.values() {
            endpoint_pairs += 1;
            paths_examined += group.len();
            for (i, (p1, c1)) in group.iter().enumerate() {
                for (j, (p2, c2)) in group.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let (req, coset, clause) = pair_requirement(cb, c1, c2);
                    if req > r_hat || (witness.is_none() && req == r_hat && req > 0) {
                        r_hat = req;
                        witness = Some((p1.clone(), p2.clone(), coset, clause));
                    }
                }
            }
        }
    }
    if endpoint_pairs == 0 {
        return Err(CoreError::NoInteriorPairs {
            radius,
            margin: cfg.boundary_margin,
        });
    }
    let witnesses = witness
        .into_iter()
        .map(|(a, b, coset, clause)| BcpWitness {
            first: cb.relative_path_from_projection(a),
            second: cb.relative_path_from_projection(b),
            coset,
            clause,
            requirement: r_hat,
        })
        .collect();
    Ok(BcpEstimate {
        t: cfg.t,
        r_hat,
        witnesses,
        radius,
        d_max: cfg.d_max,
        boundary_margin: cfg.boundary_margin,
        endpoint_pairs,
        paths_examined,
    })
}

/// Parameters in the regime `d > 4δ + 2`, `r > r_BCP(4d)`, `s > 4r`.
#[derive(Clone, Debug, Serialize)]
pub struct ParamTriple {
    pub r: usize,
    pub d: usize,
    pub s: usize,
    pub delta: DeltaEstimate,
    pub bcp: BcpEstimate,
}

impl ParamTriple {
    /// Checks the three strict inequalities against the recorded estimates.
    pub fn satisfies_regime(&self) -> bool {
        // d > 4δ + 2  <=>  d > 2·(2δ) + 2
        self.d > 2 * self.delta.delta.twice() as usize + 2
            && self.r > self.bcp.r_hat
            && self.s > 4 * self.r
    }
}

/// Derives the least integer triple in the regime from the observed `δ` and
/// `r̂(4d)`; paths for the BCP estimate have relative length `<= min(d, d_max_cap)`.
pub fn derive_params(
    delta: &DeltaEstimate,
    cb: &ConedBall,
    d_max_cap: usize,
) -> Result<ParamTriple> {
    let d = 2 * delta.delta.twice() as usize + 3;
    let cfg = BcpConfig::new(Rational::from_integer(4 * d as u64), d.min(d_max_cap));
    derive_params_with(delta, cb, &cfg)
}

/// As [`derive_params`], with an explicit estimator configuration; its `t` is
/// overridden by `4d`.
pub fn derive_params_with(
    delta: &DeltaEstimate,
    cb: &ConedBall,
    cfg: &BcpConfig,
) -> Result<ParamTriple> {
    let d = 2 * delta.delta.twice() as usize + 3;
    let mut cfg = *cfg;
    cfg.t = Rational::from_integer(4 * d as u64);
    let bcp = estimate_rbcp(cb, &cfg)?;
    let r = bcp.r_hat + 1;
    Ok(ParamTriple {
        r,
        d,
        s: 4 * r + 1,
        delta: delta.clone(),
        bcp,
    })
}
