//! Essential triviality along the `(r, d, s)` filtration.
//!
//! A stage `α` is trivialized in degree `k` by a later stage `β` when the
//! inclusion `X_α ⊆ X_β` induces the zero map on `H̃_k`. The search walks the
//! stages `β >= α` (coordinatewise, so that the inclusion exists) in
//! dictionary order inside a finite budget box and records bounding chains
//! that anyone can re-check with one boundary computation.

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cayley::{build_ball, build_ball_with, CayleyBall};
use crate::coned::{build_coned_ball, ConedBall};
use crate::error::{CoreError, Result};
use crate::homology::{
    boundary_matrices, reduced_homology, snf, zero_test_with, Chain, ChainComplex, HomologyGroup,
    IntMatrix, ZeroTest,
};
use crate::hyperbolicity::{
    delta_of_ball, derive_params_with, estimate_rbcp, BcpConfig, BcpEstimate, DeltaEstimate,
    ParamTriple, Sample,
};
use crate::presentation::{Fixture, GroupPresentation};
use crate::rips::{
    build_plain_rips_capped, inclusion, RelativeEdgeTable, RipsParams, SimplicialComplex,
    DEFAULT_CLIQUE_CAP,
};

pub use crate::rips::FiltrationIndex;

/// Maximum number of increments per coordinate when searching for `β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub r: usize,
    pub d: usize,
    pub s: usize,
}

impl Budget {
    pub const DEFAULT_STEPS: usize = 4;

    pub fn uniform(steps: usize) -> Budget {
        Budget {
            r: steps,
            d: steps,
            s: steps,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::uniform(Self::DEFAULT_STEPS)
    }
}

/// Candidate stages `β >= α` inside the budget box, in dictionary order
/// (`s` varies fastest), excluding `α` itself.
pub fn successors(alpha: FiltrationIndex, budget: Budget) -> Vec<FiltrationIndex> {
    let mut out = Vec::new();
    for r in alpha.r..=alpha.r + budget.r {
        for d in alpha.d..=alpha.d + budget.d {
            for s in alpha.s..=alpha.s + budget.s {
                let b = FiltrationIndex::new(r, d, s);
                if b != alpha {
                    out.push(b);
                }
            }
        }
    }
    out
}

/// A directed system of complexes indexed by `(r, d, s)`.
pub trait Filtration {
    /// `"plain"` or `"relative"`.
    fn kind(&self) -> &'static str;
    fn radius(&self) -> usize;
    fn stage(&self, index: FiltrationIndex) -> Result<SimplicialComplex>;
    /// Restricts a budget to the coordinates this filtration depends on.
    fn effective_budget(&self, budget: Budget) -> Budget {
        budget
    }
    fn presentation(&self) -> &GroupPresentation;
}

/// `Rips_s(K)` on a ball of `K`; only the `s` coordinate matters.
pub struct PlainFiltration {
    pub k_ball: CayleyBall,
    pub group: GroupPresentation,
    pub k_max: usize,
    pub clique_cap: usize,
}

impl PlainFiltration {
    pub fn new(
        fixture: &Fixture,
        radius: usize,
        k_max: usize,
        vertex_cap: usize,
        clique_cap: usize,
    ) -> Result<Self> {
        let k_ball = build_ball_with(
            &fixture.group,
            &fixture.peripheral.sub_gens,
            radius,
            vertex_cap,
        )?;
        Ok(PlainFiltration {
            k_ball,
            group: fixture.group.clone(),
            k_max,
            clique_cap,
        })
    }
}

impl Filtration for PlainFiltration {
    fn kind(&self) -> &'static str {
        "plain"
    }

    fn radius(&self) -> usize {
        self.k_ball.radius
    }

    fn stage(&self, index: FiltrationIndex) -> Result<SimplicialComplex> {
        build_plain_rips_capped(
            &self.k_ball,
            &self.group,
            index.s,
            self.k_max,
            self.clique_cap,
        )
    }

    fn effective_budget(&self, budget: Budget) -> Budget {
        Budget {
            r: 0,
            d: 0,
            s: budget.s,
        }
    }

    fn presentation(&self) -> &GroupPresentation {
        &self.group
    }
}

/// `Rips_{r,d,s}(G, K)` on a ball of `G`, backed by one edge table that is
/// rebuilt only when a stage asks for a larger `d`.
pub struct RelativeFiltration {
    pub cb: ConedBall,
    table: RefCell<RelativeEdgeTable>,
    pub k_max: usize,
    pub clique_cap: usize,
}

impl RelativeFiltration {
    pub fn new(
        fixture: &Fixture,
        radius: usize,
        k_max: usize,
        vertex_cap: usize,
        clique_cap: usize,
    ) -> Result<Self> {
        let ball = build_ball_with(
            &fixture.group,
            &fixture.group.gens.letters().collect::<Vec<_>>(),
            radius,
            vertex_cap,
        )?;
        let cb = build_coned_ball(ball, &fixture.group, &fixture.peripheral);
        Ok(Self::from_coned(cb, k_max, clique_cap))
    }

    pub fn from_coned(cb: ConedBall, k_max: usize, clique_cap: usize) -> Self {
        let table = RefCell::new(RelativeEdgeTable::new(&cb, 0));
        RelativeFiltration {
            cb,
            table,
            k_max,
            clique_cap,
        }
    }
}

impl Filtration for RelativeFiltration {
    fn kind(&self) -> &'static str {
        "relative"
    }

    fn radius(&self) -> usize {
        self.cb.radius()
    }

    fn stage(&self, index: FiltrationIndex) -> Result<SimplicialComplex> {
        let params = RipsParams {
            r: index.r,
            d: index.d,
            s: index.s,
            k_max: self.k_max,
            radius: self.cb.radius(),
        };
        if self.table.borrow().d_max < index.d {
            *self.table.borrow_mut() = RelativeEdgeTable::new(&self.cb, index.d);
        }
        self.table
            .borrow()
            .complex(&self.cb, params, self.clique_cap)
    }

    fn presentation(&self) -> &GroupPresentation {
        &self.cb.group
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateStatus {
    Trivialized,
    NotFoundWithinBudget,
}

/// A signed simplex written as vertex labels in the target's vertex order.
pub type LabeledTerm = (Vec<String>, i64);

/// One source generator, its image in `X_β` and a chain bounding the image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    #[serde(serialize_with = "ser_opt_string")]
    pub order: Option<String>,
    pub cycle: Vec<LabeledTerm>,
    pub bounding_chain: Vec<LabeledTerm>,
}

fn ser_opt_string<S: serde::Serializer>(
    v: &Option<String>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_str(x),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrivializationCertificate {
    pub fixture: String,
    pub filtration: &'static str,
    pub k: usize,
    pub alpha: FiltrationIndex,
    pub beta: Option<FiltrationIndex>,
    #[serde(rename = "R")]
    pub radius: usize,
    pub status: CertificateStatus,
    /// `H̃_k(X_α)` as computed.
    pub source_betti: usize,
    pub source_torsion: Vec<String>,
    /// Stages tried, in order.
    pub examined: Vec<FiltrationIndex>,
    pub evidence: Vec<Evidence>,
    pub caveats: Vec<String>,
}

impl TrivializationCertificate {
    /// SHA-256 of the canonical JSON encoding of the evidence.
    pub fn evidence_digest(&self) -> String {
        let json = serde_json::to_vec(&self.evidence).expect("evidence serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// The compact record with the evidence replaced by its digest.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "fixture": self.fixture,
            "filtration": self.filtration,
            "k": self.k,
            "alpha": self.alpha.as_array(),
            "beta": self.beta.map(|b| b.as_array()),
            "R": self.radius,
            "status": self.status,
            "source_betti": self.source_betti,
            "source_torsion": self.source_torsion,
            "examined": self.examined.iter().map(|b| b.as_array()).collect::<Vec<_>>(),
            "evidence_digest": self.evidence_digest(),
            "caveats": self.caveats,
        })
    }
}

/// Formal boundary of a labeled chain, with the alternating-sign rule on the
/// recorded vertex order.
pub fn labeled_boundary(chain: &[LabeledTerm]) -> BTreeMap<Vec<String>, i64> {
    let mut out: BTreeMap<Vec<String>, i64> = BTreeMap::new();
    for (simplex, c) in chain {
        for i in 0..simplex.len() {
            let face: Vec<String> = simplex
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.clone())
                .collect();
            let sign = if i % 2 == 0 { 1 } else { -1 };
            *out.entry(face).or_insert(0) += sign * c;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Re-checks every piece of evidence: `∂(bounding chain) = cycle`.
pub fn verify_certificate(cert: &TrivializationCertificate) -> bool {
    if cert.status != CertificateStatus::Trivialized {
        return false;
    }
    if cert.source_betti + cert.source_torsion.len() > 0 && cert.evidence.is_empty() {
        return false;
    }
    cert.evidence.iter().all(|e| {
        let mut cycle: BTreeMap<Vec<String>, i64> = BTreeMap::new();
        for (s, c) in &e.cycle {
            *cycle.entry(s.clone()).or_insert(0) += c;
        }
        cycle.retain(|_, c| *c != 0);
        labeled_boundary(&e.bounding_chain) == cycle
    })
}

fn labeled(x: &SimplicialComplex, p: &GroupPresentation, c: &Chain) -> Vec<LabeledTerm> {
    c.terms
        .iter()
        .map(|(&i, &coef)| {
            let labels = x
                .simplex(c.dim, i)
                .iter()
                .map(|&v| p.format(&x.vertices[v as usize]))
                .collect();
            (labels, coef)
        })
        .collect()
}

/// Searches the budget box above `alpha` for a stage killing `H̃_k(X_α)`.
pub fn check_essential_triviality(
    filtration: &dyn Filtration,
    fixture_name: &str,
    k: usize,
    alpha: FiltrationIndex,
    budget: Budget,
) -> Result<TrivializationCertificate> {
    let x_alpha = filtration.stage(alpha)?;
    if k + 1 > x_alpha.k_max {
        return Err(CoreError::DimensionExceeded {
            requested: k + 1,
            cap: x_alpha.k_max,
        });
    }
    let cc_alpha = boundary_matrices(&x_alpha, k + 1)?;
    let h = reduced_homology(&cc_alpha, k)?;
    let mut cert = TrivializationCertificate {
        fixture: fixture_name.to_string(),
        filtration: filtration.kind(),
        k,
        alpha,
        beta: None,
        radius: filtration.radius(),
        status: CertificateStatus::NotFoundWithinBudget,
        source_betti: h.betti,
        source_torsion: h.torsion.iter().map(|t| t.to_string()).collect(),
        examined: Vec::new(),
        evidence: Vec::new(),
        caveats: x_alpha.caveats.clone(),
    };
    if h.is_trivial() {
        cert.status = CertificateStatus::Trivialized;
        cert.beta = Some(alpha);
        return Ok(cert);
    }
    let p = filtration.presentation();
    for beta in successors(alpha, filtration.effective_budget(budget)) {
        cert.examined.push(beta);
        let x_beta = filtration.stage(beta)?;
        let inc = inclusion(&x_alpha, &x_beta)?;
        let cc_beta = boundary_matrices(&x_beta, k + 1)?;
        let outcome = zero_test_with(&inc, &h, &cc_beta, k)?;
        if let ZeroTest::Zero { certificates, .. } = outcome {
            cert.status = CertificateStatus::Trivialized;
            cert.beta = Some(beta);
            cert.evidence = h
                .generators
                .iter()
                .zip(&certificates)
                .map(|(g, (_, image, bounding))| Evidence {
                    order: g.order.as_ref().map(|o| o.to_string()),
                    cycle: labeled(&x_beta, p, image),
                    bounding_chain: labeled(&x_beta, p, bounding),
                })
                .collect();
            for c in &x_beta.caveats {
                if !cert.caveats.contains(c) {
                    cert.caveats.push(c.clone());
                }
            }
            return Ok(cert);
        }
    }
    Ok(cert)
}

/// Splitting of a cycle into cycles on single coset subcomplexes.
#[derive(Clone, Debug, Serialize)]
pub struct CosetLocalization {
    pub input: Chain,
    /// `false` when no split exists inside this (truncated) complex.
    pub split: bool,
    pub parts: Vec<(usize, Chain)>,
    pub remainder: Chain,
}

impl CosetLocalization {
    /// `input − Σ parts = ∂ remainder`, checked exactly.
    pub fn identity_holds(&self, cc: &ChainComplex) -> Result<bool> {
        if !self.split {
            return Ok(false);
        }
        let mut lhs = self.input.terms.clone();
        for (_, part) in &self.parts {
            for (&i, &c) in &part.terms {
                *lhs.entry(i).or_insert(0) -= c;
            }
        }
        lhs.retain(|_, c| *c != 0);
        Ok(self.remainder.boundary(cc)?.terms == lhs)
    }
}

/// Finds per-coset cycles `α_i` and a `(k+1)`-chain `ρ` with
/// `z − Σ α_i = ∂ρ`, by one integer solve over the `(k+1)`-simplices that
/// touch a simplex spanning more than one coset.
pub fn coset_localize(x: &SimplicialComplex, z: &Chain) -> Result<CosetLocalization> {
    let coset_of = x
        .coset_of
        .as_ref()
        .ok_or_else(|| CoreError::InvalidParameter("complex carries no coset table".into()))?;
    let k = z.dim;
    if k == 0 {
        return Err(CoreError::InvalidParameter(
            "coset localization needs k >= 1".into(),
        ));
    }
    if k >= x.k_max {
        return Err(CoreError::DimensionExceeded {
            requested: k + 1,
            cap: x.k_max,
        });
    }
    let cc = boundary_matrices(x, k + 1)?;
    if !z.is_cycle(&cc)? {
        return Err(CoreError::NotACycle);
    }
    let single_coset = |dim: usize, i: usize| {
        let s = x.simplex(dim, i);
        s.iter()
            .all(|&v| coset_of[v as usize] == coset_of[s[0] as usize])
    };
    // Rows: k-simplices spanning several cosets. Unknowns: (k+1)-simplices with such a face.
    let mut row_of: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..x.count(k) {
        if !single_coset(k, i) {
            let n = row_of.len();
            row_of.insert(i, n);
        }
    }
    let up = cc.boundary(k + 1);
    let unknowns: Vec<usize> = (0..x.count(k + 1))
        .filter(|&t| {
            up.columns[t]
                .iter()
                .any(|&(f, _)| row_of.contains_key(&(f as usize)))
        })
        .collect();
    let mut remainder = Chain::new(k + 1, []);
    let rhs_nonzero = z.terms.keys().any(|i| row_of.contains_key(i));
    if rhs_nonzero {
        let rows = row_of.len();
        if rows * unknowns.len() > crate::homology::DENSE_ENTRY_LIMIT {
            return Err(CoreError::CapExceeded {
                what: "dense localization system entries",
                limit: crate::homology::DENSE_ENTRY_LIMIT,
            });
        }
        let mut a = IntMatrix::zeros(rows, unknowns.len());
        for (j, &t) in unknowns.iter().enumerate() {
            for &(f, c) in &up.columns[t] {
                if let Some(&r) = row_of.get(&(f as usize)) {
                    a.set(r, j, c.into());
                }
            }
        }
        let mut y = vec![num_bigint::BigInt::from(0); rows];
        for (&i, &c) in &z.terms {
            if let Some(&r) = row_of.get(&i) {
                y[r] = c.into();
            }
        }
        match snf::solve(&a, &y) {
            Some(sol) => {
                let mut terms = Vec::new();
                for (j, v) in sol.iter().enumerate() {
                    let v = i64::try_from(v).map_err(|_| CoreError::Overflow)?;
                    if v != 0 {
                        terms.push((unknowns[j], v));
                    }
                }
                remainder = Chain::new(k + 1, terms);
            }
            None => {
                return Ok(CosetLocalization {
                    input: z.clone(),
                    split: false,
                    parts: Vec::new(),
                    remainder,
                })
            }
        }
    }
    let db = remainder.boundary(&cc)?;
    let mut rest = z.terms.clone();
    for (&i, &c) in &db.terms {
        *rest.entry(i).or_insert(0) -= c;
    }
    rest.retain(|_, c| *c != 0);
    let mut by_coset: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
    for (&i, &c) in &rest {
        debug_assert!(single_coset(k, i));
        let coset = coset_of[x.simplex(k, i)[0] as usize];
        by_coset.entry(coset).or_default().push((i, c));
    }
    let parts = by_coset
        .into_iter()
        .map(|(coset, terms)| (coset, Chain::new(k, terms)))
        .collect();
    Ok(CosetLocalization {
        input: z.clone(),
        split: true,
        parts,
        remainder,
    })
}

/// Knobs for [`run_theorem_pipeline`].
#[derive(Clone, Debug, Serialize)]
pub struct PipelineConfig {
    #[serde(rename = "R")]
    pub radius: usize,
    pub k_max: usize,
    pub budget: Budget,
    /// Cap on the relative length of paths used for the BCP estimate.
    pub d_max_cap: usize,
    pub boundary_margin: usize,
    pub seed: u64,
    pub vertex_cap: usize,
    pub clique_cap: usize,
    /// Overrides the derived `α` for the relative column.
    pub alpha: Option<FiltrationIndex>,
    /// Overrides the derived `s` for the plain column.
    pub plain_s: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            radius: 4,
            k_max: 3,
            budget: Budget::default(),
            d_max_cap: 3,
            boundary_margin: 1,
            seed: 0,
            vertex_cap: crate::cayley::DEFAULT_VERTEX_CAP,
            clique_cap: DEFAULT_CLIQUE_CAP,
            alpha: None,
            plain_s: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendPoint {
    #[serde(rename = "R")]
    pub radius: usize,
    pub r_hat: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeRow {
    pub k: usize,
    pub plain: serde_json::Value,
    pub relative: serde_json::Value,
    pub plain_trivialized: bool,
    pub relative_trivialized: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub fixture: String,
    pub n: usize,
    pub config: PipelineConfig,
    pub delta: Option<DeltaEstimate>,
    pub params: Option<ParamSummary>,
    pub bcp_trend: Vec<TrendPoint>,
    pub degrees: Vec<DegreeRow>,
    pub red_flags: Vec<String>,
    /// Full certificates, for the evidence sidecar.
    #[serde(skip)]
    pub certificates: Vec<TrivializationCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamSummary {
    pub r: usize,
    pub d: usize,
    pub s: usize,
    pub r_hat: usize,
    pub t: String,
    pub bcp_d_max: usize,
    pub satisfies_regime: bool,
}

impl ParamSummary {
    fn of(p: &ParamTriple) -> Self {
        ParamSummary {
            r: p.r,
            d: p.d,
            s: p.s,
            r_hat: p.bcp.r_hat,
            t: p.bcp.t.to_string(),
            bcp_d_max: p.bcp.d_max,
            satisfies_regime: p.satisfies_regime(),
        }
    }
}

/// Attached to relative certificates produced from derived parameters.
pub const FINITE_BALL_CONSTANTS: &str = "delta and r_hat were observed on a finite ball; they do not certify hyperbolicity or a BCP constant of the infinite coned-off graph";

/// Runs the plain filtration of `K` and the relative filtration of `(G, K)`
/// side by side for every degree `k < n`.
pub fn run_theorem_pipeline(
    name: &str,
    fixture: &Fixture,
    n: usize,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    let mut report = PipelineReport {
        fixture: name.to_string(),
        n,
        config: cfg.clone(),
        delta: None,
        params: None,
        bcp_trend: Vec::new(),
        degrees: Vec::new(),
        red_flags: Vec::new(),
        certificates: Vec::new(),
    };
    if n == 0 {
        return Ok(report);
    }
    if cfg.k_max < n {
        return Err(CoreError::DimensionExceeded {
            requested: n,
            cap: cfg.k_max,
        });
    }
    let g = &fixture.group;
    let ball = build_ball_with(
        g,
        &g.gens.letters().collect::<Vec<_>>(),
        cfg.radius,
        cfg.vertex_cap,
    )?;
    let cb = build_coned_ball(ball, g, &fixture.peripheral);
    let sample = if cb.len() > crate::hyperbolicity::SAMPLING_THRESHOLD {
        Sample::Random {
            count: 200_000,
            seed: cfg.seed,
        }
    } else {
        Sample::All
    };
    let delta = delta_of_ball(
        &cb.adjacency_lists(),
        |v| cb.base.depth(v),
        cb.radius(),
        cfg.boundary_margin,
        sample,
    )?;
    let d = 2 * delta.delta.twice() as usize + 3;
    let mut bcp_cfg = BcpConfig::new(
        num_rational::Ratio::from_integer(4 * d as u64),
        d.min(cfg.d_max_cap),
    );
    bcp_cfg.boundary_margin = cfg.boundary_margin;
    let params = derive_params_with(&delta, &cb, &bcp_cfg)?;
    report.bcp_trend = bcp_trend(g, fixture, cfg, &bcp_cfg, &params.bcp)?;
    if report.bcp_trend.windows(2).any(|w| w[1].r_hat > w[0].r_hat) {
        report.red_flags.push(format!(
            "r_hat grows with the radius ({}); no stable BCP constant is visible at this scale",
            report
                .bcp_trend
                .iter()
                .map(|p| format!("R={}: {}", p.radius, p.r_hat))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    if !delta.exact {
        report
            .red_flags
            .push("delta was estimated from sampled quadruples".into());
    }
    report.delta = Some(delta);
    report.params = Some(ParamSummary::of(&params));

    let alpha = cfg
        .alpha
        .unwrap_or(FiltrationIndex::new(params.r, params.d, params.s));
    let plain_alpha = FiltrationIndex::new(0, 0, cfg.plain_s.unwrap_or(alpha.s));
    let plain = PlainFiltration::new(
        fixture,
        cfg.radius,
        cfg.k_max,
        cfg.vertex_cap,
        cfg.clique_cap,
    )?;
    let relative = RelativeFiltration::from_coned(cb, cfg.k_max, cfg.clique_cap);
    for k in 0..n {
        let pc = check_essential_triviality(&plain, name, k, plain_alpha, cfg.budget)?;
        let mut rc = check_essential_triviality(&relative, name, k, alpha, cfg.budget)?;
        rc.caveats.push(FINITE_BALL_CONSTANTS.into());
        report.degrees.push(DegreeRow {
            k,
            plain_trivialized: pc.status == CertificateStatus::Trivialized,
            relative_trivialized: rc.status == CertificateStatus::Trivialized,
            plain: pc.summary_json(),
            relative: rc.summary_json(),
        });
        report.certificates.push(pc);
        report.certificates.push(rc);
    }
    Ok(report)
}

/// `r̂` at the same `T` and path length on the balls of radius `R-2 ..= R`.
fn bcp_trend(
    g: &GroupPresentation,
    fixture: &Fixture,
    cfg: &PipelineConfig,
    bcp_cfg: &BcpConfig,
    at_radius: &BcpEstimate,
) -> Result<Vec<TrendPoint>> {
    let mut out = Vec::new();
    for radius in cfg.radius.saturating_sub(2).max(1)..cfg.radius {
        let ball = build_ball(g, radius)?;
        let cb = build_coned_ball(ball, g, &fixture.peripheral);
        let r_hat = match estimate_rbcp(&cb, bcp_cfg) {
            Ok(e) => e.r_hat,
            Err(CoreError::NoInteriorPairs { .. }) => 0,
            Err(e) => return Err(e),
        };
        out.push(TrendPoint { radius, r_hat });
    }
    out.push(TrendPoint {
        radius: cfg.radius,
        r_hat: at_radius.r_hat,
    });
    Ok(out)
}

/// Homology of one stage, for reporting.
pub fn stage_homology(x: &SimplicialComplex, k: usize) -> Result<HomologyGroup> {
    reduced_homology(&boundary_matrices(x, (k + 1).min(x.k_max))?, k)
}
