//! Integer simplicial homology: boundary matrices, reduced homology with
//! cycle representatives, and the zero test for maps induced by inclusions.
//!
//! Ranks and boundary solving use sparse elimination on `±1` pivots with an
//! exact Smith normal form on the residual block; cycle representatives come
//! from dense Smith forms of the boundary maps.

pub mod snf;
pub mod sparse;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

pub use snf::{smith_normal_form, smith_normal_form_with, IntMatrix, SnfResult, Track};
pub use sparse::{rank_profile, Elimination, RankProfile, SparseMatrix};

use crate::error::{CoreError, Result};
use crate::presentation::GroupPresentation;
use crate::rips::{InclusionMap, SimplicialComplex};

/// Largest cell count of `C_k` handled by the dense representative computation.
pub const DENSE_CELL_LIMIT: usize = 2_000;
/// Largest number of entries of a dense block built during homology.
pub const DENSE_ENTRY_LIMIT: usize = 6_000_000;

/// Chain groups `C_0 … C_top` with boundary maps; `∂_0` is the augmentation.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub counts: Vec<usize>,
    /// `boundaries[k]` is `∂_k : C_k → C_{k-1}` for `k >= 1`; index 0 is unused.
    boundaries: Vec<SparseMatrix>,
}

impl ChainComplex {
    pub fn from_boundaries(counts: Vec<usize>, boundaries: Vec<SparseMatrix>) -> Self {
        ChainComplex { counts, boundaries }
    }

    pub fn top(&self) -> usize {
        self.counts.len() - 1
    }

    /// `∂_k`; for `k = 0` this is the augmentation `C_0 → Z` and for
    /// `k > top` the zero map out of the zero group.
    pub fn boundary(&self, k: usize) -> std::borrow::Cow<'_, SparseMatrix> {
        use std::borrow::Cow;
        if k == 0 {
            Cow::Owned(SparseMatrix::new(1, vec![vec![(0, 1)]; self.counts[0]]))
        } else if k <= self.top() {
            Cow::Borrowed(&self.boundaries[k])
        } else {
            Cow::Owned(SparseMatrix::new(self.counts[self.top()], Vec::new()))
        }
    }

    pub fn count(&self, k: usize) -> usize {
        self.counts.get(k).copied().unwrap_or(0)
    }
}

/// Boundary matrices `∂_1 … ∂_{k_top}` of a simplicial complex with the
/// alternating-sign rule `∂[v_0 … v_k] = Σ (-1)^i [v_0 … v̂_i … v_k]`.
pub fn boundary_matrices(x: &SimplicialComplex, k_top: usize) -> Result<ChainComplex> {
    if k_top > x.k_max {
        return Err(CoreError::DimensionExceeded {
            requested: k_top,
            cap: x.k_max,
        });
    }
    let mut boundaries = vec![SparseMatrix::default()];
    let mut face: Vec<u32> = Vec::new();
    for k in 1..=k_top {
        let mut columns = Vec::with_capacity(x.count(k));
        for s in x.simplices(k) {
            let mut col = Vec::with_capacity(k + 1);
            for i in 0..=k {
                face.clear();
                face.extend(
                    s.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, &v)| v),
                );
                let f = x.index_of(&face).ok_or_else(|| {
                    CoreError::NotIncluded(face.iter().map(|&v| v as usize).collect())
                })?;
                col.push((f as u32, if i % 2 == 0 { 1 } else { -1 }));
            }
            col.sort_unstable();
            columns.push(col);
        }
        boundaries.push(SparseMatrix::new(x.count(k - 1), columns));
    }
    let mut counts = x.counts();
    counts.truncate(k_top + 1);
    Ok(ChainComplex::from_boundaries(counts, boundaries))
}

/// An integer `k`-chain as a sparse map from simplex index to coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub dim: usize,
    pub terms: BTreeMap<usize, i64>,
}

impl Chain {
    pub fn new(dim: usize, terms: impl IntoIterator<Item = (usize, i64)>) -> Chain {
        let mut c = Chain {
            dim,
            terms: BTreeMap::new(),
        };
        for (i, x) in terms {
            *c.terms.entry(i).or_insert(0) += x;
        }
        c.terms.retain(|_, x| *x != 0);
        c
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `∂` of this chain (the augmentation for 0-chains).
    pub fn boundary(&self, cc: &ChainComplex) -> Result<Chain> {
        let b = cc.boundary(self.dim);
        let mut out: BTreeMap<usize, i64> = BTreeMap::new();
        for (&i, &c) in &self.terms {
            for &(r, x) in &b.columns[i] {
                let t = c.checked_mul(x).ok_or(CoreError::Overflow)?;
                let e = out.entry(r as usize).or_insert(0);
                *e = e.checked_add(t).ok_or(CoreError::Overflow)?;
            }
        }
        out.retain(|_, x| *x != 0);
        Ok(Chain {
            dim: self.dim.saturating_sub(1),
            terms: out,
        })
    }

    pub fn is_cycle(&self, cc: &ChainComplex) -> Result<bool> {
        Ok(self.boundary(cc)?.is_zero())
    }

    /// Human-readable form such as `+1[e, a] -1[a, ab]`.
    pub fn display(&self, x: &SimplicialComplex, p: &GroupPresentation) -> String {
        let mut out = String::new();
        for (&i, &c) in &self.terms {
            let labels: Vec<String> = x
                .simplex(self.dim, i)
                .iter()
                .map(|&v| p.format(&x.vertices[v as usize]))
                .collect();
            if !out.is_empty() {
                out.push(' ');
            }
            let _ = write!(out, "{c:+}[{}]", labels.join(", "));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Coefficients paired with explicit vertex tuples.
    pub fn with_simplices(&self, x: &SimplicialComplex) -> Vec<(Vec<u32>, i64)> {
        self.terms
            .iter()
            .map(|(&i, &c)| (x.simplex(self.dim, i).to_vec(), c))
            .collect()
    }
}

/// A generator of `H̃_k` with its order (`None` for infinite order).
#[derive(Clone, Debug, Serialize)]
pub struct Generator {
    #[serde(serialize_with = "ser_opt_bigint")]
    pub order: Option<BigInt>,
    pub cycle: Chain,
}

/// `H̃_k ≅ Z^betti ⊕ ⨁ Z/t_i`.
#[derive(Clone, Debug, Serialize)]
pub struct HomologyGroup {
    pub dim: usize,
    pub betti: usize,
    #[serde(serialize_with = "ser_bigints")]
    pub torsion: Vec<BigInt>,
    /// Cycle representatives: torsion generators first, then free ones.
    /// Empty when the group is trivial.
    pub generators: Vec<Generator>,
    /// Cell counts `(n_{k-1}, n_k, n_{k+1})`; `n_{-1} = 1` for the augmentation.
    pub cells: [usize; 3],
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

fn ser_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn ser_opt_bigint<S: serde::Serializer>(
    v: &Option<BigInt>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_str(&x.to_string()),
        None => s.serialize_none(),
    }
}

/// Reduced integer homology `H̃_k` of `cc`, with cycle representatives.
///
/// Betti number and torsion come from sparse elimination of `∂_k` and
/// `∂_{k+1}`. Representatives are computed only for a nontrivial group, by
/// the dense two-step Smith form (kernel basis of `∂_k`, then `∂_{k+1}`
/// written in that basis), which is limited to [`DENSE_CELL_LIMIT`] cells.
pub fn reduced_homology(cc: &ChainComplex, k: usize) -> Result<HomologyGroup> {
    if k > cc.top() {
        return Err(CoreError::DimensionExceeded {
            requested: k,
            cap: cc.top(),
        });
    }
    let n_below = if k == 0 { 1 } else { cc.count(k - 1) };
    let n_k = cc.count(k);
    let n_above = cc.count(k + 1);
    let down = Elimination::new(&cc.boundary(k), false)?;
    let up = Elimination::new(&cc.boundary(k + 1), false)?;
    let betti = n_k - down.rank() - up.rank();
    let torsion = up.torsion();
    let mut h = HomologyGroup {
        dim: k,
        betti,
        torsion,
        generators: Vec::new(),
        cells: [n_below, n_k, n_above],
    };
    if h.is_trivial() {
        return Ok(h);
    }
    let z = n_k - down.rank();
    if n_k > DENSE_CELL_LIMIT
        || n_below * n_k > DENSE_ENTRY_LIMIT
        || z * n_above > DENSE_ENTRY_LIMIT
    {
        return Err(CoreError::CapExceeded {
            what: "cells for dense cycle representatives",
            limit: DENSE_CELL_LIMIT,
        });
    }
    h.generators = dense_generators(cc, k)?;
    debug_assert_eq!(
        h.generators.iter().filter(|g| g.order.is_none()).count(),
        h.betti
    );
    Ok(h)
}

fn dense_generators(cc: &ChainComplex, k: usize) -> Result<Vec<Generator>> {
    let n_k = cc.count(k);
    let a = cc.boundary(k).to_dense();
    let snf_a = smith_normal_form_with(
        &a,
        Track {
            rows: false,
            cols: true,
        },
    );
    let r_a = snf_a.rank;
    let z = n_k - r_a;
    // ∂_{k+1} = Z · M, where Z is columns r_a.. of V and M is rows r_a.. of V⁻¹ ∂_{k+1}.
    let b = cc.boundary(k + 1);
    let mut m = IntMatrix::zeros(z, b.cols);
    for (j, col) in b.columns.iter().enumerate() {
        for &(row, x) in col {
            let x = BigInt::from(x);
            for i in 0..z {
                let v = snf_a.v_inv.get(r_a + i, row as usize);
                if !v.is_zero() {
                    let cur = m.get(i, j).clone();
                    m.set(i, j, cur + v * &x);
                }
            }
        }
    }
    let snf_m = smith_normal_form_with(&m, Track::ROWS);
    let r_m = snf_m.rank;
    let mut generators = Vec::new();
    for g in 0..z {
        let order = if g < r_m {
            let d = &snf_m.diagonal[g];
            if d.is_one() {
                continue;
            }
            Some(d.clone())
        } else {
            None
        };
        // column g of Z · U_M⁻¹
        let mut terms = Vec::new();
        for cell in 0..n_k {
            let mut acc = BigInt::zero();
            for i in 0..z {
                let zi = snf_a.v.get(cell, r_a + i);
                let ui = snf_m.u_inv.get(i, g);
                if !zi.is_zero() && !ui.is_zero() {
                    acc += zi * ui;
                }
            }
            if !acc.is_zero() {
                terms.push((cell, acc.to_i64().ok_or(CoreError::Overflow)?));
            }
        }
        generators.push(Generator {
            order,
            cycle: Chain::new(k, terms),
        });
    }
    Ok(generators)
}

/// Decides membership in `B_k` and produces bounding chains.
#[derive(Clone, Debug)]
pub struct BoundarySolver<'a> {
    cc: &'a ChainComplex,
    k: usize,
    elimination: Elimination,
}

impl<'a> BoundarySolver<'a> {
    pub fn new(cc: &'a ChainComplex, k: usize) -> Result<BoundarySolver<'a>> {
        let elimination = Elimination::new(&cc.boundary(k + 1), true)?;
        Ok(BoundarySolver { cc, k, elimination })
    }

    /// `Some(c)` with `∂c = z` if `z` is a boundary, else `None`.
    pub fn bounding_chain(&self, z: &Chain) -> Result<Option<Chain>> {
        if z.dim != self.k {
            return Err(CoreError::InvalidParameter(format!(
                "chain has dimension {}, solver expects {}",
                z.dim, self.k
            )));
        }
        if !z.is_cycle(self.cc)? {
            return Err(CoreError::NotACycle);
        }
        let mut y = vec![0i64; self.cc.count(self.k)];
        for (&i, &c) in &z.terms {
            y[i] = c;
        }
        let Some(x) = self.elimination.solve(&y)? else {
            return Ok(None);
        };
        let c = Chain::new(self.k + 1, x.into_iter().enumerate().filter(|e| e.1 != 0));
        if c.boundary(self.cc)? != *z {
            return Err(CoreError::InvalidParameter(
                "bounding chain failed re-verification".into(),
            ));
        }
        Ok(Some(c))
    }
}

/// Image of a `k`-chain of the source under a simplicial inclusion, with
/// orientation signs for simplices whose vertex order changes.
pub fn push_forward(inc: &InclusionMap<'_>, c: &Chain) -> Chain {
    let mut terms = Vec::with_capacity(c.terms.len());
    let mut image: Vec<u32> = Vec::new();
    for (&i, &x) in &c.terms {
        image.clear();
        image.extend(
            inc.source
                .simplex(c.dim, i)
                .iter()
                .map(|&v| inc.vertex_map[v as usize]),
        );
        let sign = permutation_sign(&image);
        terms.push((inc.simplex_map[c.dim][i], x * sign));
    }
    Chain::new(c.dim, terms)
}

fn permutation_sign(v: &[u32]) -> i64 {
    let mut inversions = 0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Outcome of testing whether `H̃_k(X_α) → H̃_k(X_β)` vanishes.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ZeroTest {
    /// Every generator maps to a boundary; `(source cycle, image, bounding chain)`.
    Zero {
        source_generators: usize,
        certificates: Vec<(Chain, Chain, Chain)>,
    },
    /// A generator whose image is not a boundary.
    NonZero { witness: Chain, image: Chain },
}

impl ZeroTest {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroTest::Zero { .. })
    }
}

/// Tests whether the map on `H̃_k` induced by `inc` is zero.
pub fn induced_map_zero_test(inc: &InclusionMap<'_>, k: usize) -> Result<ZeroTest> {
    let cc_a = boundary_matrices(inc.source, k + 1)?;
    let cc_b = boundary_matrices(inc.target, k + 1)?;
    let h = reduced_homology(&cc_a, k)?;
    zero_test_with(inc, &h, &cc_b, k)
}

/// Zero test with precomputed source homology and target chain complex.
pub fn zero_test_with(
    inc: &InclusionMap<'_>,
    h: &HomologyGroup,
    cc_b: &ChainComplex,
    k: usize,
) -> Result<ZeroTest> {
    if h.generators.is_empty() {
        return Ok(ZeroTest::Zero {
            source_generators: 0,
            certificates: Vec::new(),
        });
    }
    let solver = BoundarySolver::new(cc_b, k)?;
    let mut certificates = Vec::new();
    for g in &h.generators {
        let image = push_forward(inc, &g.cycle);
        match solver.bounding_chain(&image)? {
            Some(c) => certificates.push((g.cycle.clone(), image, c)),
            None => {
                return Ok(ZeroTest::NonZero {
                    witness: g.cycle.clone(),
                    image,
                })
            }
        }
    }
    Ok(ZeroTest::Zero {
        source_generators: h.generators.len(),
        certificates,
    })
}
