//! Relative Rips complexes `Rips_{r,d,s}(G, K)` and plain Rips complexes of `K`.
//!
//! Vertices are the vertices of a Cayley ball. Two vertices `x`, `x′` span an
//! edge when they lie in one coset with `d_K(x, x′) <= s`, or when some
//! relative geodesic between them has relative length `<= d` and travels
//! `< 3r` in the first and last coset and `< 2r` in every other coset.
//! Higher simplices come from flag completion up to dimension `k_max`.

use std::fmt;

use serde::Serialize;

use crate::cayley::{CayleyBall, CosetTable};
use crate::coned::{geodesic_profiles_from, ConedBall};
use crate::error::{CoreError, Result};
use crate::presentation::{GroupPresentation, Word};

/// Default cap on the total number of simplices in one complex.
pub const DEFAULT_CLIQUE_CAP: usize = 5_000_000;

/// Index `(r, d, s)` of a stage of the relative Rips filtration, compared in
/// dictionary order (`r` first, then `d`, then `s`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FiltrationIndex {
    pub r: usize,
    pub d: usize,
    pub s: usize,
}

impl FiltrationIndex {
    pub fn new(r: usize, d: usize, s: usize) -> Self {
        FiltrationIndex { r, d, s }
    }

    /// Coordinatewise comparison; this is what guarantees `X_self ⊆ X_other`.
    pub fn dominated_by(&self, other: &FiltrationIndex) -> bool {
        self.r <= other.r && self.d <= other.d && self.s <= other.s
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.r, self.d, self.s]
    }
}

impl fmt::Display for FiltrationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.r, self.d, self.s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RipsParams {
    pub r: usize,
    pub d: usize,
    pub s: usize,
    pub k_max: usize,
    pub radius: usize,
}

impl RipsParams {
    pub fn index(&self) -> FiltrationIndex {
        FiltrationIndex::new(self.r, self.d, self.s)
    }
}

/// Why an edge is present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeProvenance {
    SameCoset { dk: usize },
    RelativeGeodesic { path: Vec<usize>, required_r: usize },
}

/// A finite flag complex with simplices through dimension `k_max`.
///
/// Simplices are stored per dimension as sorted vertex-index tuples in
/// lexicographic order, flattened with stride `dim + 1`.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    pub vertices: Vec<Word>,
    pub k_max: usize,
    simplices: Vec<Vec<u32>>,
    pub provenance: Vec<EdgeProvenance>,
    pub params: Option<RipsParams>,
    /// Coset id (in the underlying ball's table) of each vertex, if any.
    pub coset_of: Option<Vec<usize>>,
    pub caveats: Vec<String>,
}

impl SimplicialComplex {
    /// Flag completion of an edge list on `vertices`.
    pub fn flag(
        vertices: Vec<Word>,
        edges: &[(usize, usize)],
        k_max: usize,
        clique_cap: usize,
    ) -> Result<SimplicialComplex> {
        let n = vertices.len();
        let mut up: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a == b {
                return Err(CoreError::InvalidParameter(format!(
                    "loop edge at vertex {a}"
                )));
            }
            let (lo, hi) = (a.min(b), a.max(b));
            up[lo].push(hi as u32);
        }
        for list in &mut up {
            list.sort_unstable();
            list.dedup();
        }
        let mut simplices: Vec<Vec<u32>> = vec![Vec::new(); k_max + 1];
        simplices[0] = (0..n as u32).collect();
        let mut total = n;
        if total > clique_cap {
            return Err(CoreError::CapExceeded {
                what: "simplices",
                limit: clique_cap,
            });
        }
        let mut current: Vec<u32> = Vec::with_capacity(k_max + 1);
        for v in 0..n {
            if k_max == 0 {
                break;
            }
            current.clear();
            current.push(v as u32);
            extend_cliques(
                &up,
                &mut current,
                &up[v],
                k_max,
                &mut simplices,
                &mut total,
                clique_cap,
            )?;
        }
        Ok(SimplicialComplex {
            vertices,
            k_max,
            simplices,
            provenance: Vec::new(),
            params: None,
            coset_of: None,
            caveats: Vec::new(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of `k`-simplices (zero above `k_max`).
    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, |s| s.len() / (k + 1))
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..=self.k_max).map(|k| self.count(k)).collect()
    }

    pub fn simplex(&self, k: usize, i: usize) -> &[u32] {
        &self.simplices[k][i * (k + 1)..(i + 1) * (k + 1)]
    }

    pub fn simplices(&self, k: usize) -> impl Iterator<Item = &[u32]> {
        let stride = k + 1;
        self.simplices
            .get(k)
            .map(|s| s.as_slice())
            .unwrap_or(&[])
            .chunks_exact(stride)
    }

    /// Position of the sorted tuple `s` among the `(len-1)`-simplices.
    pub fn index_of(&self, s: &[u32]) -> Option<usize> {
        let k = s.len().checked_sub(1)?;
        let count = self.count(k);
        let (mut lo, mut hi) = (0, count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.simplex(k, mid).cmp(s) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.simplices(1)
            .map(|e| (e[0] as usize, e[1] as usize))
            .collect()
    }

    pub fn vertex_index(&self, w: &Word) -> Option<usize> {
        self.vertices.iter().position(|v| v == w)
    }

    /// Simplices written with vertex labels, sorted within and across
    /// simplices by the label strings.
    pub fn labeled_simplices(&self, p: &GroupPresentation) -> Vec<Vec<String>> {
        let labels: Vec<String> = self.vertices.iter().map(|w| p.format(w)).collect();
        let mut out = Vec::new();
        for k in 0..=self.k_max {
            for s in self.simplices(k) {
                let mut l: Vec<String> = s.iter().map(|&v| labels[v as usize].clone()).collect();
                l.sort();
                out.push(l);
            }
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// Text export: JSON header (with the vertex labels), then one simplex per
    /// line as vertex indices, grouped by dimension.
    pub fn export(&self, p: &GroupPresentation) -> String {
        let same = self
            .provenance
            .iter()
            .filter(|e| matches!(e, EdgeProvenance::SameCoset { .. }))
            .count();
        let header = serde_json::json!({
            "group": p.name,
            "params": self.params,
            "k_max": self.k_max,
            "counts": self.counts(),
            "provenance": {
                "same_coset": same,
                "relative_geodesic": self.provenance.len() - same,
            },
            "caveats": self.caveats,
            "vertices": self.vertices.iter().map(|w| p.format(w)).collect::<Vec<_>>(),
        });
        let mut out = header.to_string();
        out.push('\n');
        for k in 0..=self.k_max {
            for s in self.simplices(k) {
                let line: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

fn extend_cliques(
    up: &[Vec<u32>],
    current: &mut Vec<u32>,
    candidates: &[u32],
    k_max: usize,
    simplices: &mut [Vec<u32>],
    total: &mut usize,
    cap: usize,
) -> Result<()> {
    for (i, &w) in candidates.iter().enumerate() {
        current.push(w);
        let dim = current.len() - 1;
        simplices[dim].extend_from_slice(current);
        *total += 1;
        if *total > cap {
            return Err(CoreError::CapExceeded {
                what: "simplices",
                limit: cap,
            });
        }
        if dim < k_max {
            let next: Vec<u32> = intersect(&candidates[i + 1..], &up[w as usize]);
            if !next.is_empty() {
                extend_cliques(up, current, &next, k_max, simplices, total, cap)?;
            }
        }
        current.pop();
    }
    Ok(())
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Per-pair data from which every stage `(r, d, s)` with `d <= d_max` is read off.
#[derive(Clone, Debug)]
pub struct RelativeEdgeTable {
    pub d_max: usize,
    pub radius: usize,
    entries: Vec<PairEntry>,
}

#[derive(Clone, Debug)]
struct PairEntry {
    u: u32,
    v: u32,
    dk: Option<u32>,
    geodesic: Option<(u32, u32)>,
    witness: Vec<u32>,
}

impl RelativeEdgeTable {
    pub fn new(cb: &ConedBall, d_max: usize) -> RelativeEdgeTable {
        let n = cb.len();
        let mut entries = Vec::new();
        for u in 0..n {
            let coset = cb.cosets.members(cb.cosets.coset_of(u)).unwrap();
            let profiles = if d_max > 0 {
                geodesic_profiles_from(cb, u, d_max)
            } else {
                Vec::new()
            };
            let mut pi = profiles.iter().filter(|p| p.target > u).peekable();
            let mut ci = coset.iter().copied().filter(|&v| v > u).peekable();
            loop {
                let next_p = pi.peek().map(|p| p.target);
                let next_c = ci.peek().copied();
                let v = match (next_p, next_c) {
                    (None, None) => break,
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (Some(a), Some(b)) => a.min(b),
                };
                let dk = if next_c == Some(v) {
                    ci.next();
                    cb.peripheral_distance(u, v).map(|d| d as u32)
                } else {
                    None
                };
                let (geodesic, witness) = if next_p == Some(v) {
                    let p = pi.next().unwrap();
                    (
                        Some((p.distance as u32, p.required_r as u32)),
                        p.witness.iter().map(|&x| x as u32).collect(),
                    )
                } else {
                    (None, Vec::new())
                };
                entries.push(PairEntry {
                    u: u as u32,
                    v: v as u32,
                    dk,
                    geodesic,
                    witness,
                });
            }
        }
        RelativeEdgeTable {
            d_max,
            radius: cb.radius(),
            entries,
        }
    }

    /// Edges of the stage `(r, d, s)` with their provenance, sorted.
    pub fn edges(
        &self,
        r: usize,
        d: usize,
        s: usize,
    ) -> Result<Vec<(usize, usize, EdgeProvenance)>> {
        if d > self.d_max {
            return Err(CoreError::InvalidParameter(format!(
                "d = {d} exceeds the table's d_max = {}",
                self.d_max
            )));
        }
        let mut out = Vec::new();
        for e in &self.entries {
            if let Some(dk) = e.dk {
                if dk as usize <= s {
                    out.push((
                        e.u as usize,
                        e.v as usize,
                        EdgeProvenance::SameCoset { dk: dk as usize },
                    ));
                    continue;
                }
            }
            if let Some((dist, need)) = e.geodesic {
                if dist as usize <= d && need as usize <= r {
                    out.push((
                        e.u as usize,
                        e.v as usize,
                        EdgeProvenance::RelativeGeodesic {
                            path: e.witness.iter().map(|&x| x as usize).collect(),
                            required_r: need as usize,
                        },
                    ));
                }
            }
        }
        Ok(out)
    }

    /// The complex of stage `params` (which must satisfy `params.d <= d_max`).
    pub fn complex(
        &self,
        cb: &ConedBall,
        params: RipsParams,
        clique_cap: usize,
    ) -> Result<SimplicialComplex> {
        if params.radius != cb.radius() {
            return Err(CoreError::InvalidParameter(format!(
                "params radius {} does not match ball radius {}",
                params.radius,
                cb.radius()
            )));
        }
        let edges = self.edges(params.r, params.d, params.s)?;
        let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.0, e.1)).collect();
        let mut x = SimplicialComplex::flag(
            cb.base.vertices().to_vec(),
            &pairs,
            params.k_max,
            clique_cap,
        )?;
        x.provenance = edges.into_iter().map(|e| e.2).collect();
        x.params = Some(params);
        x.coset_of = Some(cb.cosets.coset_id.clone());
        x.caveats.push(format!(
            "computed on the Cayley ball of radius {}; distances near the boundary sphere may be overestimated",
            cb.radius()
        ));
        if params.d >= cb.radius() {
            x.caveats.push(format!(
                "truncation-unreliable: d = {} is not below the ball radius {}",
                params.d,
                cb.radius()
            ));
        }
        Ok(x)
    }
}

/// `Rips_{r,d,s}(G, K)` on the ball underlying `cb`.
pub fn build_relative_rips(cb: &ConedBall, params: RipsParams) -> Result<SimplicialComplex> {
    build_relative_rips_capped(cb, params, DEFAULT_CLIQUE_CAP)
}

pub fn build_relative_rips_capped(
    cb: &ConedBall,
    params: RipsParams,
    clique_cap: usize,
) -> Result<SimplicialComplex> {
    RelativeEdgeTable::new(cb, params.d).complex(cb, params, clique_cap)
}

/// `Rips_s(K)` on a ball of `K` in its own word metric (see
/// [`crate::cayley::build_ball_with`]): edge iff `d_K <= s`.
pub fn build_plain_rips(
    k_ball: &CayleyBall,
    p: &GroupPresentation,
    s: usize,
    k_max: usize,
) -> Result<SimplicialComplex> {
    build_plain_rips_capped(k_ball, p, s, k_max, DEFAULT_CLIQUE_CAP)
}

pub fn build_plain_rips_capped(
    k_ball: &CayleyBall,
    p: &GroupPresentation,
    s: usize,
    k_max: usize,
    clique_cap: usize,
) -> Result<SimplicialComplex> {
    let n = k_ball.len();
    let mut edges = Vec::new();
    let mut provenance = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let dk = p.quotient(k_ball.vertex(u), k_ball.vertex(v)).len();
            if dk <= s {
                edges.push((u, v));
                provenance.push(EdgeProvenance::SameCoset { dk });
            }
        }
    }
    let mut x = SimplicialComplex::flag(k_ball.vertices().to_vec(), &edges, k_max, clique_cap)?;
    x.provenance = provenance;
    x.params = Some(RipsParams {
        r: 0,
        d: 0,
        s,
        k_max,
        radius: k_ball.radius,
    });
    x.coset_of = Some(vec![0; n]);
    Ok(x)
}

/// Induced subcomplex on the vertices of one coset; vertex labels are kept.
pub fn coset_subcomplex(x: &SimplicialComplex, coset: usize) -> Result<SimplicialComplex> {
    let Some(coset_of) = &x.coset_of else {
        return Err(CoreError::InvalidParameter(
            "complex carries no coset table".into(),
        ));
    };
    let keep: Vec<usize> = (0..x.vertex_count())
        .filter(|&v| coset_of[v] == coset)
        .collect();
    if keep.is_empty() {
        return Err(CoreError::UnknownCoset(coset));
    }
    let mut local = vec![u32::MAX; x.vertex_count()];
    for (i, &v) in keep.iter().enumerate() {
        local[v] = i as u32;
    }
    let mut simplices = vec![Vec::new(); x.k_max + 1];
    for (k, out) in simplices.iter_mut().enumerate() {
        for s in x.simplices(k) {
            if s.iter().all(|&v| local[v as usize] != u32::MAX) {
                out.extend(s.iter().map(|&v| local[v as usize]));
            }
        }
    }
    let mut provenance = Vec::new();
    for (e, prov) in x.simplices(1).zip(&x.provenance) {
        if local[e[0] as usize] != u32::MAX && local[e[1] as usize] != u32::MAX {
            provenance.push(prov.clone());
        }
    }
    Ok(SimplicialComplex {
        vertices: keep.iter().map(|&v| x.vertices[v].clone()).collect(),
        k_max: x.k_max,
        simplices,
        provenance,
        params: x.params,
        coset_of: Some(vec![coset; keep.len()]),
        caveats: x.caveats.clone(),
    })
}

/// Relabels every vertex `w` as the normal form of `g·w`.
pub fn translate(x: &SimplicialComplex, p: &GroupPresentation, g: &Word) -> SimplicialComplex {
    let mut y = x.clone();
    y.vertices = x
        .vertices
        .iter()
        .map(|w| p.rws.reduce(&g.concat(w).0))
        .collect();
    y
}

/// Coset ids that occur in `table` with at least `min_size` members.
pub fn cosets_with_min_size(table: &CosetTable, min_size: usize) -> Vec<usize> {
    table
        .ids()
        .iter()
        .copied()
        .filter(|&id| table.members(id).is_some_and(|m| m.len() >= min_size))
        .collect()
}

/// Simplicial inclusion `X_α → X_β`, identity on vertex labels.
#[derive(Clone, Debug)]
pub struct InclusionMap<'a> {
    pub source: &'a SimplicialComplex,
    pub target: &'a SimplicialComplex,
    pub vertex_map: Vec<u32>,
    /// `simplex_map[k][i]` is the target index of source `k`-simplex `i`.
    pub simplex_map: Vec<Vec<usize>>,
}

/// Builds and verifies the inclusion of `xa` into `xb`.
pub fn inclusion<'a>(
    xa: &'a SimplicialComplex,
    xb: &'a SimplicialComplex,
) -> Result<InclusionMap<'a>> {
    if let (Some(pa), Some(pb)) = (xa.params, xb.params) {
        if pa.index() > pb.index() {
            return Err(CoreError::InvalidParameter(format!(
                "source stage {} is above target stage {} in dictionary order",
                pa.index(),
                pb.index()
            )));
        }
    }
    let same_vertices = xa.vertices == xb.vertices;
    let lookup: std::collections::HashMap<&Word, usize> = if same_vertices {
        Default::default()
    } else {
        xb.vertices
            .iter()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect()
    };
    let mut vertex_map = Vec::with_capacity(xa.vertex_count());
    for (i, w) in xa.vertices.iter().enumerate() {
        let j = if same_vertices {
            i
        } else {
            *lookup
                .get(w)
                .ok_or_else(|| CoreError::NotIncluded(vec![i]))?
        };
        vertex_map.push(j as u32);
    }
    let mut simplex_map = Vec::with_capacity(xa.k_max + 1);
    let mut image: Vec<u32> = Vec::new();
    for k in 0..=xa.k_max {
        let mut m = Vec::with_capacity(xa.count(k));
        for s in xa.simplices(k) {
            image.clear();
            image.extend(s.iter().map(|&v| vertex_map[v as usize]));
            image.sort_unstable();
            let j = xb
                .index_of(&image)
                .ok_or_else(|| CoreError::NotIncluded(s.iter().map(|&v| v as usize).collect()))?;
            m.push(j);
        }
        simplex_map.push(m);
    }
    Ok(InclusionMap {
        source: xa,
        target: xb,
        vertex_map,
        simplex_map,
    })
}
