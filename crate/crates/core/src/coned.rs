//! The coned-off Cayley graph `Γ̂` on a finite ball.
//!
//! `Γ̂` adds an edge between any two distinct vertices of the same peripheral
//! coset; cone vertices are not materialized. A Cayley-graph path is projected
//! to `Γ̂` by erasing loops and replacing each maximal same-coset run by the
//! single coset edge joining its entry and exit vertices. How far a path
//! "travels" in a coset is `d_K(entry, exit)` for that run.

use std::sync::OnceLock;

use num_rational::Ratio;
use serde::Serialize;

use crate::cayley::{bfs_distances, coset_table, BallDistance, CayleyBall, CosetTable};
use crate::error::{CoreError, Result};
use crate::presentation::{GroupPresentation, PeripheralSpec};

/// Default cap on the number of enumerated paths per query.
pub const DEFAULT_PATH_CAP: usize = 100_000;

/// Largest ball for which the all-pairs distance table is materialized.
pub const APSP_VERTEX_LIMIT: usize = 6_000;

/// Rational quasi-geodesic constant.
pub type Rational = Ratio<u64>;

/// A Cayley ball together with its peripheral cosets and the coned-off edges.
#[derive(Debug)]
pub struct ConedBall {
    pub base: CayleyBall,
    pub cosets: CosetTable,
    pub group: GroupPresentation,
    pub peripheral: PeripheralSpec,
    hat_adj: Vec<Vec<u32>>,
    coset_edges: usize,
    position_in_coset: Vec<u32>,
    // per coset id: row-major d_K matrix over its members
    dk: std::collections::HashMap<usize, Vec<u32>>,
    apsp: OnceLock<Vec<u16>>,
}

/// Adds the same-coset cliques to `ball`.
pub fn build_coned_ball(ball: CayleyBall, p: &GroupPresentation, k: &PeripheralSpec) -> ConedBall {
    let cosets = coset_table(&ball, p, k);
    let n = ball.len();
    let mut position_in_coset = vec![0u32; n];
    let mut dk = std::collections::HashMap::new();
    for &id in cosets.ids() {
        let members = cosets.members(id).unwrap();
        for (i, &v) in members.iter().enumerate() {
            position_in_coset[v] = i as u32;
        }
        let c = members.len();
        let mut m = vec![0u32; c * c];
        for i in 0..c {
            for j in (i + 1)..c {
                let d = p
                    .quotient(ball.vertex(members[i]), ball.vertex(members[j]))
                    .len() as u32;
                m[i * c + j] = d;
                m[j * c + i] = d;
            }
        }
        dk.insert(id, m);
    }
    let mut hat_adj = Vec::with_capacity(n);
    let mut coset_edges = 0;
    for v in 0..n {
        let mut nbrs: Vec<u32> = ball.neighbors(v).iter().map(|&(_, w)| w as u32).collect();
        for &w in cosets.members(cosets.coset_of(v)).unwrap() {
            if w != v {
                if !ball.is_adjacent(v, w) && v < w {
                    coset_edges += 1;
                }
                nbrs.push(w as u32);
            }
        }
        nbrs.sort_unstable();
        nbrs.dedup();
        hat_adj.push(nbrs);
    }
    ConedBall {
        base: ball,
        cosets,
        group: p.clone(),
        peripheral: k.clone(),
        hat_adj,
        coset_edges,
        position_in_coset,
        dk,
        apsp: OnceLock::new(),
    }
}

impl ConedBall {
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn radius(&self) -> usize {
        self.base.radius
    }

    /// Neighbours in `Γ̂`, sorted and without repetition.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.hat_adj[v]
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        self.hat_adj
            .iter()
            .map(|n| n.iter().map(|&w| w as usize).collect())
            .collect()
    }

    /// Number of coned-off edges that are not already Cayley-graph edges.
    pub fn coset_edge_count(&self) -> usize {
        self.coset_edges
    }

    pub fn same_coset(&self, u: usize, v: usize) -> bool {
        self.cosets.same_coset(u, v)
    }

    /// `d_K(u, v)` for ball vertices, `None` across cosets.
    pub fn peripheral_distance(&self, u: usize, v: usize) -> Option<usize> {
        if !self.cosets.same_coset(u, v) {
            return None;
        }
        let id = self.cosets.coset_of(u);
        let c = self.cosets.members(id).unwrap().len();
        let (i, j) = (
            self.position_in_coset[u] as usize,
            self.position_in_coset[v] as usize,
        );
        Some(self.dk[&id][i * c + j] as usize)
    }

    /// BFS distances in `Γ̂` from `source`, explored up to `max_depth`.
    pub fn distances_from(&self, source: usize, max_depth: usize) -> Vec<u32> {
        bfs_distances(self.len(), source, max_depth, |x| {
            self.hat_adj[x].iter().map(|&w| w as usize)
        })
    }

    /// All-pairs `Γ̂` distances (`u16::MAX` for disconnected pairs).
    pub fn all_pairs(&self) -> Result<&[u16]> {
        let n = self.len();
        if n > APSP_VERTEX_LIMIT {
            return Err(CoreError::CapExceeded {
                what: "all-pairs distance table",
                limit: APSP_VERTEX_LIMIT,
            });
        }
        Ok(self.apsp.get_or_init(|| {
            let mut table = vec![u16::MAX; n * n];
            for u in 0..n {
                let d = self.distances_from(u, usize::MAX);
                for (v, &x) in d.iter().enumerate() {
                    if x != u32::MAX {
                        table[u * n + v] = x as u16;
                    }
                }
            }
            table
        }))
    }

    /// Relative distance between two ball vertices; uses the all-pairs table
    /// when it fits, BFS otherwise.
    pub fn hat_distance(&self, u: usize, v: usize) -> Option<usize> {
        let n = self.len();
        match self.all_pairs() {
            Ok(t) => {
                let d = t[u * n + v];
                (d != u16::MAX).then_some(d as usize)
            }
            Err(_) => {
                let d = self.distances_from(u, usize::MAX)[v];
                (d != u32::MAX).then_some(d as usize)
            }
        }
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.len() {
            Err(CoreError::UnknownVertex(v))
        } else {
            Ok(())
        }
    }

    /// Loop erasure followed by collapsing maximal same-coset runs to their
    /// first and last vertices. Idempotent.
    pub fn reduce_hat_path(&self, vertices: &[usize]) -> Vec<usize> {
        let mut erased: Vec<usize> = Vec::with_capacity(vertices.len());
        for &x in vertices {
            if let Some(i) = erased.iter().position(|&y| y == x) {
                erased.truncate(i + 1);
            } else {
                erased.push(x);
            }
        }
        let mut out: Vec<usize> = Vec::with_capacity(erased.len());
        let mut i = 0;
        while i < erased.len() {
            let mut j = i;
            while j + 1 < erased.len() && self.same_coset(erased[j + 1], erased[i]) {
                j += 1;
            }
            out.push(erased[i]);
            if j > i {
                out.push(erased[j]);
            }
            i = j + 1;
        }
        out
    }

    /// Coset runs of a reduced `Γ̂` path, in traversal order.
    pub fn ledger(&self, projected: &[usize]) -> Vec<CosetVisit> {
        let mut ledger = Vec::new();
        let mut i = 0;
        while i < projected.len() {
            let mut j = i;
            while j + 1 < projected.len() && self.same_coset(projected[j + 1], projected[i]) {
                j += 1;
            }
            if j > i {
                let (entry, exit) = (projected[i], projected[j]);
                ledger.push(CosetVisit {
                    coset: self.cosets.coset_of(entry),
                    entry,
                    exit,
                    travel: self.peripheral_distance(entry, exit).unwrap(),
                });
            }
            i = j + 1;
        }
        ledger
    }

    /// Builds the [`RelativePath`] of an already reduced `Γ̂` path, lifting
    /// each coset edge along the normal form of `entry⁻¹·exit` when that walk
    /// stays inside the ball.
    pub fn relative_path_from_projection(&self, projected: Vec<usize>) -> RelativePath {
        let coset_ledger = self.ledger(&projected);
        let (steps, lifted) = self.lift(&projected);
        RelativePath {
            steps,
            lifted,
            relative_length: projected.len().saturating_sub(1),
            projected,
            coset_ledger,
        }
    }

    fn lift(&self, projected: &[usize]) -> (Vec<usize>, bool) {
        let Some(&first) = projected.first() else {
            return (Vec::new(), true);
        };
        let mut steps = vec![first];
        for pair in projected.windows(2) {
            let (u, v) = (pair[0], pair[1]);
            if self.base.is_adjacent(u, v) {
                steps.push(v);
                continue;
            }
            let q = self
                .group
                .quotient(self.base.vertex(u), self.base.vertex(v));
            let mut x = u;
            for &g in q.letters() {
                match self.base.neighbors(x).iter().find(|&&(h, _)| h == g) {
                    Some(&(_, y)) => {
                        x = y;
                        steps.push(y);
                    }
                    None => return (projected.to_vec(), false),
                }
            }
            debug_assert_eq!(x, v);
        }
        (steps, true)
    }

    /// Trustworthy interior check: both endpoints at depth `<= R - length`.
    fn interior(&self, path: &RelativePath) -> bool {
        let (Some(&a), Some(&b)) = (path.projected.first(), path.projected.last()) else {
            return true;
        };
        let budget = self.radius().saturating_sub(path.relative_length);
        self.base.depth(a) <= budget && self.base.depth(b) <= budget
    }
}

/// One maximal stay of a path inside a single coset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetVisit {
    pub coset: usize,
    pub entry: usize,
    pub exit: usize,
    /// `d_K(entry, exit)`; zero would mean a reduced visit.
    pub travel: usize,
}

/// A Cayley-graph path with its coned-off projection and coset ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelativePath {
    /// Vertices of the underlying `Γ` path.
    pub steps: Vec<usize>,
    /// False when a coset edge could not be lifted inside the ball; `steps`
    /// then repeats `projected`.
    pub lifted: bool,
    /// Loop-free reduced path in `Γ̂`.
    pub projected: Vec<usize>,
    pub relative_length: usize,
    pub coset_ledger: Vec<CosetVisit>,
}

impl RelativePath {
    pub fn start(&self) -> usize {
        self.projected[0]
    }

    pub fn end(&self) -> usize {
        *self.projected.last().unwrap()
    }

    /// Least `r` for which this path satisfies the Rips travel bounds:
    /// travel `< 3r` in the first and last coset and `< 2r` in every other.
    pub fn required_r(&self) -> usize {
        required_r(&self.coset_ledger, self.start(), self.end())
    }
}

pub(crate) fn required_r(ledger: &[CosetVisit], start: usize, end: usize) -> usize {
    ledger
        .iter()
        .map(|v| {
            if v.entry == start || v.exit == end {
                v.travel / 3 + 1
            } else {
                v.travel / 2 + 1
            }
        })
        .max()
        .unwrap_or(0)
}

/// A yes/no answer with a truncation caveat.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub truncation_unreliable: bool,
}

/// Distance in `Γ̂` restricted to the ball.
pub fn relative_distance(cb: &ConedBall, u: usize, v: usize) -> Result<BallDistance> {
    cb.check_vertex(u)?;
    cb.check_vertex(v)?;
    Ok(BallDistance {
        distance: cb.hat_distance(u, v),
        boundary_warning: cb.base.on_boundary(u) || cb.base.on_boundary(v),
    })
}

/// Projects a Cayley-graph path to `Γ̂`.
pub fn project_path(cb: &ConedBall, steps: &[usize]) -> Result<RelativePath> {
    for &v in steps {
        cb.check_vertex(v)?;
    }
    for pair in steps.windows(2) {
        if !cb.base.is_adjacent(pair[0], pair[1]) {
            return Err(CoreError::NotAdjacent(pair[0], pair[1]));
        }
    }
    let projected = cb.reduce_hat_path(steps);
    let coset_ledger = cb.ledger(&projected);
    Ok(RelativePath {
        steps: steps.to_vec(),
        lifted: true,
        relative_length: projected.len().saturating_sub(1),
        projected,
        coset_ledger,
    })
}

pub fn is_relative_geodesic(cb: &ConedBall, path: &RelativePath) -> Verdict {
    let holds = match path.projected.as_slice() {
        [] => true,
        p => cb.hat_distance(p[0], *p.last().unwrap()) == Some(path.relative_length),
    };
    Verdict {
        holds,
        truncation_unreliable: !cb.interior(path),
    }
}

/// Checks `T⁻¹|t−t′| ≤ d̂(c(t), c(t′)) ≤ T|t−t′|` at all integer parameters.
pub fn is_t_relative_quasigeodesic(
    cb: &ConedBall,
    path: &RelativePath,
    t: Rational,
) -> Result<Verdict> {
    if t < Rational::from_integer(1) {
        return Err(CoreError::InvalidParameter(
            "quasi-geodesic constant must be >= 1".into(),
        ));
    }
    let p = &path.projected;
    let mut holds = true;
    'outer: for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            let Some(d) = cb.hat_distance(p[i], p[j]) else {
                holds = false;
                break 'outer;
            };
            if !quasi_pair_ok((j - i) as u64, d as u64, t) {
                holds = false;
                break 'outer;
            }
        }
    }
    Ok(Verdict {
        holds,
        truncation_unreliable: !cb.interior(path),
    })
}

pub(crate) fn quasi_pair_ok(param_gap: u64, dist: u64, t: Rational) -> bool {
    let (num, den) = (*t.numer(), *t.denom());
    // gap / T <= dist  and  dist <= T * gap
    param_gap * den <= num * dist && dist * den <= num * param_gap
}

/// All relative geodesics from `u` to `v` of relative length at most `d_max`,
/// one per reduced `Γ̂` path, in lexicographic order of vertex indices.
pub fn enumerate_relative_geodesics(
    cb: &ConedBall,
    u: usize,
    v: usize,
    d_max: usize,
) -> Result<Vec<RelativePath>> {
    enumerate_relative_geodesics_capped(cb, u, v, d_max, DEFAULT_PATH_CAP)
}

pub fn enumerate_relative_geodesics_capped(
    cb: &ConedBall,
    u: usize,
    v: usize,
    d_max: usize,
    cap: usize,
) -> Result<Vec<RelativePath>> {
    cb.check_vertex(u)?;
    cb.check_vertex(v)?;
    let to_v = cb.distances_from(v, d_max);
    if to_v[u] == u32::MAX || to_v[u] as usize > d_max {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut path = vec![u];
    descend(cb, &to_v, &mut path, &mut out, cap)?;
    Ok(out
        .into_iter()
        .map(|p| cb.relative_path_from_projection(p))
        .collect())
}

fn descend(
    cb: &ConedBall,
    to_v: &[u32],
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) -> Result<()> {
    let x = *path.last().unwrap();
    if to_v[x] == 0 {
        if out.len() >= cap {
            return Err(CoreError::CapExceeded {
                what: "relative geodesics",
                limit: cap,
            });
        }
        out.push(path.clone());
        return Ok(());
    }
    for &w in cb.neighbors(x) {
        let w = w as usize;
        if to_v[w] != u32::MAX && to_v[w] + 1 == to_v[x] {
            path.push(w);
            descend(cb, to_v, path, out, cap)?;
            path.pop();
        }
    }
    Ok(())
}

/// For one source vertex: every target within relative distance `d_max`, its
/// relative distance, and the least `r` over all relative geodesics to it
/// together with a witness projection attaining it.
#[derive(Clone, Debug)]
pub struct GeodesicProfile {
    pub target: usize,
    pub distance: usize,
    pub required_r: usize,
    pub witness: Vec<usize>,
}

/// Walks all relative geodesics out of `source` (every prefix of a geodesic
/// is a geodesic to its own endpoint) and keeps, per target, the minimum of
/// [`RelativePath::required_r`].
pub fn geodesic_profiles_from(cb: &ConedBall, source: usize, d_max: usize) -> Vec<GeodesicProfile> {
    let from = cb.distances_from(source, d_max);
    let mut best: Vec<Option<(usize, Vec<usize>)>> = vec![None; cb.len()];
    let mut path = vec![source];
    let mut ledger: Vec<CosetVisit> = Vec::new();
    walk_forward(cb, &from, d_max, &mut path, &mut ledger, &mut best);
    let mut out: Vec<GeodesicProfile> = best
        .into_iter()
        .enumerate()
        .filter_map(|(target, b)| {
            b.map(|(required_r, witness)| GeodesicProfile {
                target,
                distance: from[target] as usize,
                required_r,
                witness,
            })
        })
        .collect();
    out.sort_by_key(|p| p.target);
    out
}

fn walk_forward(
    cb: &ConedBall,
    from: &[u32],
    d_max: usize,
    path: &mut Vec<usize>,
    ledger: &mut Vec<CosetVisit>,
    best: &mut [Option<(usize, Vec<usize>)>],
) {
    let x = *path.last().unwrap();
    if path.len() > 1 {
        let need = required_r(ledger, path[0], x);
        let slot = &mut best[x];
        if slot.as_ref().is_none_or(|(r, _)| need < *r) {
            *slot = Some((need, path.clone()));
        }
    }
    if path.len() > d_max {
        return;
    }
    let depth = from[x];
    for &w in cb.neighbors(x) {
        let w = w as usize;
        if from[w] != depth + 1 {
            continue;
        }
        let pushed = if cb.same_coset(x, w) {
            ledger.push(CosetVisit {
                coset: cb.cosets.coset_of(x),
                entry: x,
                exit: w,
                travel: cb.peripheral_distance(x, w).unwrap(),
            });
            true
        } else {
            false
        };
        path.push(w);
        walk_forward(cb, from, d_max, path, ledger, best);
        path.pop();
        if pushed {
            ledger.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::build_ball;
    use crate::fixtures;

    fn coned(f: &crate::presentation::Fixture, r: usize) -> ConedBall {
        build_coned_ball(build_ball(&f.group, r).unwrap(), &f.group, &f.peripheral)
    }

    fn idx(cb: &ConedBall, w: &str) -> usize {
        cb.base.index_of(&cb.group.word(w).unwrap()).unwrap()
    }

    #[test]
    fn coset_edges_added() {
        let f = fixtures::f2_rel_a();
        let cb = coned(&f, 2);
        // identity coset {e, a, aa, A, AA}: 10 pairs, 4 already Cayley edges
        let members = cb.cosets.members(cb.cosets.coset_of(0)).unwrap();
        assert_eq!(members.len(), 5);
        let new_in_identity_coset = members
            .iter()
            .flat_map(|&u| members.iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| u < v && !cb.base.is_adjacent(u, v))
            .count();
        assert_eq!(new_in_identity_coset, 6);

        let cb0 = coned(&f, 0);
        assert_eq!(cb0.coset_edge_count(), 0);

        let z = fixtures::z2_rel_a();
        let cb = coned(&z, 1);
        assert_eq!(cb.coset_edge_count(), 1);
        let (a, big_a) = (idx(&cb, "a"), idx(&cb, "A"));
        assert!(cb.neighbors(a).contains(&(big_a as u32)));
    }

    #[test]
    fn relative_distances() {
        let f = fixtures::f2_rel_a();
        let cb = coned(&f, 3);
        let e = cb.base.center;
        assert_eq!(
            relative_distance(&cb, e, idx(&cb, "aa")).unwrap().distance,
            Some(1)
        );
        assert_eq!(
            relative_distance(&cb, e, idx(&cb, "b")).unwrap().distance,
            Some(1)
        );
        let cb = coned(&f, 4);
        assert_eq!(
            relative_distance(&cb, e, idx(&cb, "baab"))
                .unwrap()
                .distance,
            Some(3)
        );
    }

    #[test]
    fn projection_examples() {
        let f = fixtures::f2_rel_a();
        let cb = coned(&f, 3);
        let (e, a, aa, b) = (cb.base.center, idx(&cb, "a"), idx(&cb, "aa"), idx(&cb, "b"));
        let p = project_path(&cb, &[e, a, aa]).unwrap();
        assert_eq!(p.projected, vec![e, aa]);
        assert_eq!(p.coset_ledger.len(), 1);
        assert_eq!(p.coset_ledger[0].travel, 2);

        let p = project_path(&cb, &[e, b]).unwrap();
        assert_eq!(p.projected, vec![e, b]);
        assert!(p.coset_ledger.is_empty());

        let p = project_path(&cb, &[e, a, e, b]).unwrap();
        assert_eq!(p.projected, vec![e, b]);

        assert!(matches!(
            project_path(&cb, &[e, aa]),
            Err(CoreError::NotAdjacent(_, _))
        ));
    }

    #[test]
    fn geodesic_and_quasigeodesic_checks() {
        let f = fixtures::f2_rel_a();
        let cb = coned(&f, 4);
        let (e, a, aa, b) = (cb.base.center, idx(&cb, "a"), idx(&cb, "aa"), idx(&cb, "b"));
        let single = project_path(&cb, &[e, b]).unwrap();
        assert!(is_relative_geodesic(&cb, &single).holds);
        let coset = project_path(&cb, &[e, a, aa]).unwrap();
        assert!(is_relative_geodesic(&cb, &coset).holds);
        let back_and_forth = project_path(&cb, &[e, b, e, b]).unwrap();
        assert_eq!(back_and_forth.projected, vec![e, b]);
        let v =
            is_t_relative_quasigeodesic(&cb, &back_and_forth, Rational::from_integer(1)).unwrap();
        assert!(v.holds && !v.truncation_unreliable);
        assert!(is_t_relative_quasigeodesic(&cb, &single, Rational::new(1, 2)).is_err());
    }

    #[test]
    fn geodesic_enumeration_examples() {
        let f = fixtures::f2_rel_a();
        let cb = coned(&f, 5);
        let (e, b) = (cb.base.center, idx(&cb, "b"));
        let g = enumerate_relative_geodesics(&cb, e, b, 3).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].projected, vec![e, b]);

        let a5 = idx(&cb, "aaaaa");
        let g = enumerate_relative_geodesics(&cb, e, a5, 3).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].relative_length, 1);
        assert_eq!(g[0].coset_ledger[0].travel, 5);
        assert_eq!(g[0].steps.len(), 6);

        let bab = idx(&cb, "bab");
        let g = enumerate_relative_geodesics(&cb, e, bab, 3).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].projected, vec![e, b, idx(&cb, "ba"), bab]);
        assert_eq!(g[0].coset_ledger.len(), 1);
        assert_eq!(g[0].coset_ledger[0].travel, 1);
    }

    #[test]
    fn profiles_agree_with_enumeration() {
        let f = fixtures::z2_rel_a();
        let cb = coned(&f, 3);
        for source in 0..cb.len() {
            for prof in geodesic_profiles_from(&cb, source, 3) {
                let all = enumerate_relative_geodesics(&cb, source, prof.target, 3).unwrap();
                assert!(!all.is_empty());
                assert_eq!(all[0].relative_length, prof.distance);
                let min = all.iter().map(|p| p.required_r()).min().unwrap();
                assert_eq!(min, prof.required_r);
            }
        }
    }
}
