//! Finite balls of the Cayley graph and their partition into peripheral cosets.

use std::collections::HashMap;
use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::presentation::{GroupPresentation, Letter, PeripheralSpec, Word};

/// Default cap on the number of ball vertices.
pub const DEFAULT_VERTEX_CAP: usize = 2_000_000;

/// The radius-`R` ball of `Γ(G, S)` around the identity.
///
/// Vertices are normal forms numbered in BFS discovery order; each BFS layer is
/// sorted in shortlex order, so numbering is deterministic.
#[derive(Clone, Debug)]
pub struct CayleyBall {
    pub radius: usize,
    vertices: Vec<Word>,
    depth: Vec<usize>,
    index: HashMap<Word, usize>,
    adjacency: Vec<Vec<(Letter, usize)>>,
    pub center: usize,
}

impl CayleyBall {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, v: usize) -> &Word {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Distance of `v` from the identity, i.e. the length of its normal form.
    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn on_boundary(&self, v: usize) -> bool {
        self.depth[v] == self.radius
    }

    /// `(generator, neighbour)` pairs in generator order, only those inside the ball.
    pub fn neighbors(&self, v: usize) -> &[(Letter, usize)] {
        &self.adjacency[v]
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].iter().any(|&(_, w)| w == v)
    }

    /// Plain adjacency lists (deduplicated, sorted).
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        self.adjacency
            .iter()
            .map(|nbrs| {
                let mut v: Vec<usize> = nbrs.iter().map(|&(_, w)| w).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Undirected edges `(u, v, g)` with `u < v` and `v = u·g`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, Letter)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &(g, v) in nbrs {
                if u < v {
                    out.push((u, v, g));
                }
            }
        }
        out.sort();
        out.dedup_by_key(|e| (e.0, e.1));
        out
    }
}

/// BFS from the identity out to radius `radius`, using all generators of `p`.
pub fn build_ball(p: &GroupPresentation, radius: usize) -> Result<CayleyBall> {
    let gens: Vec<Letter> = p.gens.letters().collect();
    build_ball_with(p, &gens, radius, DEFAULT_VERTEX_CAP)
}

/// BFS ball using only the generators `gens`; with the peripheral generators
/// this is the ball of `K` in its own word metric.
pub fn build_ball_with(
    p: &GroupPresentation,
    gens: &[Letter],
    radius: usize,
    cap: usize,
) -> Result<CayleyBall> {
    let mut vertices = vec![Word::identity()];
    let mut depth = vec![0];
    let mut index = HashMap::new();
    index.insert(Word::identity(), 0);
    let mut frontier = vec![0usize];
    for layer in 1..=radius {
        let mut fresh: Vec<Word> = Vec::new();
        for &v in &frontier {
            for &g in gens {
                let w = p.rws.reduce(&vertices[v].push(g).0);
                if !index.contains_key(&w) {
                    index.insert(w.clone(), usize::MAX);
                    fresh.push(w);
                }
            }
        }
        fresh.sort();
        for w in fresh {
            if vertices.len() >= cap {
                return Err(CoreError::CapExceeded {
                    what: "ball vertices",
                    limit: cap,
                });
            }
            index.insert(w.clone(), vertices.len());
            vertices.push(w);
            depth.push(layer);
        }
        frontier = (vertices.len() - frontier_len(&depth, layer)..vertices.len()).collect();
        if frontier.is_empty() {
            break;
        }
    }
    let mut adjacency = Vec::with_capacity(vertices.len());
    for w in &vertices {
        let mut nbrs = Vec::new();
        for &g in gens {
            let x = p.rws.reduce(&w.push(g).0);
            if let Some(&j) = index.get(&x) {
                nbrs.push((g, j));
            }
        }
        adjacency.push(nbrs);
    }
    Ok(CayleyBall {
        radius,
        vertices,
        depth,
        index,
        adjacency,
        center: 0,
    })
}

fn frontier_len(depth: &[usize], layer: usize) -> usize {
    depth.iter().rev().take_while(|&&d| d == layer).count()
}

/// Result of a distance query inside a truncated ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BallDistance {
    /// `None` when the vertices are disconnected inside the ball.
    pub distance: Option<usize>,
    /// Set when an endpoint lies on the boundary sphere; the in-ball distance
    /// may then overestimate the distance in the whole group.
    pub boundary_warning: bool,
}

/// Breadth-first distances from `source` over the given adjacency function.
pub fn bfs_distances<F, I>(n: usize, source: usize, max_depth: usize, mut neighbors: F) -> Vec<u32>
where
    F: FnMut(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    let mut dist = vec![u32::MAX; n];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        if du as usize >= max_depth {
            continue;
        }
        for w in neighbors(u) {
            if dist[w] == u32::MAX {
                dist[w] = du + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Shortest path length inside the ball.
pub fn graph_distance(ball: &CayleyBall, u: usize, v: usize) -> Result<BallDistance> {
    if u >= ball.len() {
        return Err(CoreError::UnknownVertex(u));
    }
    if v >= ball.len() {
        return Err(CoreError::UnknownVertex(v));
    }
    let dist = bfs_distances(ball.len(), u, usize::MAX, |x| {
        ball.adjacency[x].iter().map(|&(_, w)| w)
    });
    Ok(BallDistance {
        distance: (dist[v] != u32::MAX).then_some(dist[v] as usize),
        boundary_warning: ball.on_boundary(u) || ball.on_boundary(v),
    })
}

/// Partition of the ball vertices into left cosets `gK`.
#[derive(Clone, Debug)]
pub struct CosetTable {
    /// For each vertex, the canonical coset id: the index of the shortlex-least
    /// ball vertex of its coset.
    pub coset_id: Vec<usize>,
    members: HashMap<usize, Vec<usize>>,
    ids: Vec<usize>,
}

impl CosetTable {
    pub fn coset_of(&self, v: usize) -> usize {
        self.coset_id[v]
    }

    pub fn same_coset(&self, u: usize, v: usize) -> bool {
        self.coset_id[u] == self.coset_id[v]
    }

    /// Vertices of the coset with the given id, in increasing index order.
    pub fn members(&self, id: usize) -> Option<&[usize]> {
        self.members.get(&id).map(|v| v.as_slice())
    }

    /// All coset ids, increasing.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Partitions the ball into `K`-cosets.
///
/// Vertices joined by a `K`-generator edge are merged first; the remaining
/// components are merged by exact membership tests between their
/// representatives, so cosets that are disconnected inside the ball are still
/// identified correctly.
pub fn coset_table(ball: &CayleyBall, p: &GroupPresentation, k: &PeripheralSpec) -> CosetTable {
    let n = ball.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for u in 0..n {
        for &(g, v) in ball.neighbors(u) {
            if k.contains_letter(g) {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut reps: Vec<usize> = (0..n).filter(|&v| find(&mut parent, v) == v).collect();
    reps.sort_unstable();
    if !k.sub_gens.is_empty() {
        for i in 0..reps.len() {
            for j in (i + 1)..reps.len() {
                let (a, b) = (find(&mut parent, reps[i]), find(&mut parent, reps[j]));
                if a == b {
                    continue;
                }
                let q = p.quotient(ball.vertex(reps[i]), ball.vertex(reps[j]));
                if k.is_k_word(&q.0) {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    // vertex numbering follows shortlex order across layers, so the minimum
    // index in each class is its shortlex-least element
    let mut coset_id = vec![0; n];
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, slot) in coset_id.iter_mut().enumerate() {
        let root = find(&mut parent, v);
        *slot = root;
        members.entry(root).or_default().push(v);
    }
    let mut ids: Vec<usize> = members.keys().copied().collect();
    ids.sort_unstable();
    CosetTable {
        coset_id,
        members,
        ids,
    }
}

/// Edge-list export: a JSON header line followed by `u v g` lines.
pub fn export_edge_list(ball: &CayleyBall, p: &GroupPresentation) -> String {
    let header = serde_json::json!({
        "group": p.name,
        "radius": ball.radius,
        "vertices": ball.len(),
    });
    let mut out = header.to_string();
    out.push('\n');
    for (u, v, g) in ball.edges() {
        out.push_str(&format!("{u} {v} {}\n", p.gens.symbol(g)));
    }
    out
}
