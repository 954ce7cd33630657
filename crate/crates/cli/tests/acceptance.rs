//! Acceptance suite: one line per criterion with its tolerance and time
//! limit. Each criterion also writes a summary that must match
//! `tests/golden/acceptance/` (regenerate with `RELRIPS_BLESS=1`).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relrips_core::brown::{
    check_essential_triviality, coset_localize, verify_certificate, Budget, CertificateStatus,
    FiltrationIndex, PlainFiltration,
};
use relrips_core::cayley::{build_ball, build_ball_with, DEFAULT_VERTEX_CAP};
use relrips_core::homology::{
    boundary_matrices, reduced_homology, smith_normal_form, Chain, ChainComplex, IntMatrix,
    SparseMatrix,
};
use relrips_core::hyperbolicity::{
    delta_four_point, delta_of_ball, derive_params_with, BcpConfig, Sample,
};
use relrips_core::rips::{
    build_plain_rips, build_relative_rips_capped, coset_subcomplex, RelativeEdgeTable,
    DEFAULT_CLIQUE_CAP,
};
use relrips_core::{
    build_coned_ball, fixtures, normal_form, Fixture, Letter, RipsParams, SimplicialComplex, Word,
};
use serde_json::{json, Value};

type Outcome = Result<Value, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Criterion {
    id: u8,
    name: &'static str,
    tolerance: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "rewriting correctness",
            tolerance: "exact",
            limit: secs(10),
            run: c01_rewriting,
        },
        Criterion {
            id: 2,
            name: "ball counts",
            tolerance: "exact",
            limit: secs(1),
            run: c02_ball_counts,
        },
        Criterion {
            id: 3,
            name: "delta exactness",
            tolerance: "exact",
            limit: secs(5),
            run: c03_delta,
        },
        Criterion {
            id: 4,
            name: "relative Rips edge oracle",
            tolerance: "exact",
            limit: secs(120),
            run: c04_edges,
        },
        Criterion {
            id: 5,
            name: "homology golden values",
            tolerance: "exact",
            limit: secs(5),
            run: c05_homology,
        },
        Criterion {
            id: 6,
            name: "SNF property suite",
            tolerance: "exact",
            limit: secs(30),
            run: c06_snf,
        },
        Criterion {
            id: 7,
            name: "essential-triviality certificate",
            tolerance: "exact",
            limit: secs(5),
            run: c07_certificate,
        },
        Criterion {
            id: 8,
            name: "parameter regime",
            tolerance: "exact (strict integer inequalities)",
            limit: secs(120),
            run: c08_params,
        },
        Criterion {
            id: 9,
            name: "coset copy of Rips_s(K)",
            tolerance: "exact",
            limit: secs(30),
            run: c09_coset_copy,
        },
        Criterion {
            id: 10,
            name: "Mayer-Vietoris localization",
            tolerance: "exact",
            limit: secs(5),
            run: c10_localization,
        },
        Criterion {
            id: 11,
            name: "negative control r_hat trend",
            tolerance: "exact (strict increase)",
            limit: secs(120),
            run: c11_negative_control,
        },
        Criterion {
            id: 12,
            name: "end-to-end determinism",
            tolerance: "byte-identical",
            limit: secs(120),
            run: c12_determinism,
        },
    ];
    let only: Option<u8> = std::env::var("RELRIPS_CRITERION")
        .ok()
        .and_then(|v| v.parse().ok());
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_none_or(|o| o == c.id)) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|_| Err("panicked".into()))
            .and_then(|summary| golden(c.id, &summary));
        let elapsed = start.elapsed();
        let verdict = match outcome {
            Ok(()) if elapsed <= c.limit => Ok(()),
            Ok(()) => Err(format!("took {:.2} s", elapsed.as_secs_f64())),
            Err(e) => Err(e),
        };
        let line = format!(
            "criterion {:>2} {} {} (tolerance: {}; {:.2} s of {} s)",
            c.id,
            if verdict.is_ok() { "PASS" } else { "FAIL" },
            c.name,
            c.tolerance,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
        match verdict {
            Ok(()) => println!("{line}"),
            Err(e) => {
                failed += 1;
                println!("{line}: {e}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/acceptance")
}

fn golden(id: u8, summary: &Value) -> Result<(), String> {
    let path = golden_dir().join(format!("c{id:02}.json"));
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| e.to_string())?;
    text.push('\n');
    if std::env::var_os("RELRIPS_BLESS").is_some() {
        std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        std::fs::write(&path, &text).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path)
        .map_err(|e| format!("golden file {}: {e}", path.display()))?;
    ensure!(expected == text, "summary differs from {}", path.display());
    Ok(())
}

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/{name}.grp"))
}

// ---------------------------------------------------------------------------
// Concrete models of the fixture groups, independent of the rewriting code.

/// Elements of F2 as freely reduced strings over `a A b B`.
fn free_reduce(w: &str) -> String {
    let mut out: Vec<char> = Vec::new();
    for c in w.chars() {
        if out
            .last()
            .is_some_and(|&l| l != c && l.eq_ignore_ascii_case(&c))
        {
            out.pop();
        } else {
            out.push(c);
        }
    }
    out.into_iter().collect()
}

fn exponent(w: &str, g: char) -> i64 {
    let up = g.to_ascii_uppercase();
    w.chars()
        .map(|c| {
            if c == g {
                1
            } else if c == up {
                -1
            } else {
                0
            }
        })
        .sum()
}

/// A canonical key for the element a word represents.
fn element(group: &str, w: &str) -> String {
    match group {
        "F2" | "F2_rel_a" => free_reduce(w),
        "Z2_rel_a" => format!("{},{}", exponent(w, 'a'), exponent(w, 'b')),
        "C6" => exponent(w, 'a').rem_euclid(6).to_string(),
        other => panic!("no model for {other}"),
    }
}

fn all_words(symbols: &[char], max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for i in 0..symbols.len() {
                let mut v: Vec<usize> = w.clone();
                v.push(i);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn spell(symbols: &[char], w: &[usize]) -> String {
    w.iter().map(|&i| symbols[i]).collect()
}

fn c01_rewriting() -> Outcome {
    let mut summary = BTreeMap::new();
    for f in [
        fixtures::f2(),
        fixtures::z2_rel_a(),
        fixtures::c6(),
        fixtures::f2_rel_a(),
    ] {
        let p = &f.group;
        let symbols = p.gens.symbols().to_vec();
        // Words come in shortlex order, so the first word reaching an element
        // is its shortlex-least representative.
        let words = all_words(&symbols, 6);
        let mut least: HashMap<String, Vec<usize>> = HashMap::new();
        let mut new_per_length = vec![0usize; 7];
        for w in &words {
            let e = element(&p.name, &spell(&symbols, w));
            if let std::collections::hash_map::Entry::Vacant(slot) = least.entry(e) {
                new_per_length[w.len()] += 1;
                slot.insert(w.clone());
            }
        }
        for w in &words {
            let word = Word(w.iter().map(|&i| Letter(i as u8)).collect());
            let nf = normal_form(&word, p);
            let want = &least[&element(&p.name, &spell(&symbols, w))];
            let got: Vec<usize> = nf.letters().iter().map(|l| l.index()).collect();
            ensure!(
                &got == want,
                "{}: normal form of {} is {} but the least representative is {}",
                p.name,
                spell(&symbols, w),
                spell(&symbols, &got),
                spell(&symbols, want)
            );
        }
        summary.insert(
            p.name.clone(),
            json!({ "words": words.len(), "new_elements_by_length": new_per_length }),
        );
    }
    Ok(json!(summary))
}

fn c02_ball_counts() -> Outcome {
    let f = fixtures::f2();
    let mut sizes = Vec::new();
    for r in 0..=3u32 {
        let n = build_ball(&f.group, r as usize)
            .map_err(|e| e.to_string())?
            .len();
        let formula = if r == 0 { 1 } else { 2 * 3usize.pow(r) - 1 };
        // counting oracle: freely reduced words of length <= r
        let counted = all_words(&['a', 'A', 'b', 'B'], r as usize)
            .iter()
            .filter(|w| {
                let s = spell(&['a', 'A', 'b', 'B'], w);
                free_reduce(&s) == s
            })
            .count();
        ensure!(
            n == formula && n == counted,
            "R = {r}: ball {n}, formula {formula}, oracle {counted}"
        );
        sizes.push(n);
    }
    ensure!(sizes == [1, 5, 17, 53], "sizes {sizes:?}");
    Ok(json!({ "F2_ball_sizes": sizes }))
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<u32> {
    let mut d = vec![u32::MAX; adj.len()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(x) = q.pop_front() {
        for &y in &adj[x] {
            if d[y] == u32::MAX {
                d[y] = d[x] + 1;
                q.push_back(y);
            }
        }
    }
    d
}

/// Twice the four-point constant by exhausting all quadruples.
fn brute_twice_delta(adj: &[Vec<usize>]) -> u32 {
    let n = adj.len();
    let d: Vec<Vec<u32>> = (0..n).map(|s| bfs(adj, s)).collect();
    let mut best = 0;
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                for w in z + 1..n {
                    let mut s = [d[x][y] + d[z][w], d[x][z] + d[y][w], d[x][w] + d[y][z]];
                    s.sort_unstable();
                    best = best.max(s[2] - s[1]);
                }
            }
        }
    }
    best
}

fn c03_delta() -> Outcome {
    let f = fixtures::f2();
    let mut rows = Vec::new();
    for r in 0..=5 {
        let ball = build_ball(&f.group, r).map_err(|e| e.to_string())?;
        let adj = ball.adjacency_lists();
        let est = delta_four_point(&adj, Sample::All).map_err(|e| e.to_string())?;
        ensure!(est.exact, "R = {r}: estimate not exact");
        ensure!(est.delta.twice() == 0, "R = {r}: delta = {}", est.delta);
        if r <= 4 {
            let brute = brute_twice_delta(&adj);
            ensure!(
                brute == 0,
                "R = {r}: exhaustive delta = {}",
                brute as f64 / 2.0
            );
        }
        rows.push(json!({ "R": r, "vertices": adj.len(), "delta": est.delta }));
    }
    let c6 = fixtures::c6();
    let ball = build_ball(&c6.group, 3).map_err(|e| e.to_string())?;
    let adj = ball.adjacency_lists();
    ensure!(adj.len() == 6, "C6 ball has {} vertices", adj.len());
    let est = delta_four_point(&adj, Sample::All).map_err(|e| e.to_string())?;
    let brute = brute_twice_delta(&adj);
    ensure!(
        est.delta.twice() == 2 && brute == 2,
        "C6: delta {}, exhaustive {}",
        est.delta,
        brute as f64 / 2.0
    );
    Ok(json!({ "F2": rows, "C6": est.delta }))
}

// ---------------------------------------------------------------------------
// Criterion 4: an independent evaluator of the relative Rips edge rule for
// F2 relative to <a>, built on the free-group model above.

struct F2RelA {
    words: Vec<String>,
    hat: Vec<Vec<usize>>,
}

/// Coset `g<a>` of a reduced word: strip the trailing powers of `a`.
fn coset_key(w: &str) -> (&str, i64) {
    let head = w.trim_end_matches(['a', 'A']);
    (head, exponent(&w[head.len()..], 'a'))
}

impl F2RelA {
    fn new(radius: usize) -> F2RelA {
        let symbols = ['a', 'A', 'b', 'B'];
        let mut words: Vec<String> = all_words(&symbols, radius)
            .iter()
            .map(|w| spell(&symbols, w))
            .filter(|s| &free_reduce(s) == s)
            .collect();
        words.sort();
        let index: HashMap<String, usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let mut by_coset: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, w) in words.iter().enumerate() {
            by_coset.entry(coset_key(w).0).or_default().push(i);
        }
        let hat = words
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let mut n: BTreeSet<usize> = symbols
                    .iter()
                    .filter_map(|&g| index.get(&free_reduce(&format!("{w}{g}"))).copied())
                    .collect();
                n.extend(by_coset[coset_key(w).0].iter().copied().filter(|&j| j != i));
                n.into_iter().collect()
            })
            .collect();
        F2RelA { words, hat }
    }

    fn same_coset(&self, u: usize, v: usize) -> bool {
        coset_key(&self.words[u]).0 == coset_key(&self.words[v]).0
    }

    fn dk(&self, u: usize, v: usize) -> i64 {
        (coset_key(&self.words[u]).1 - coset_key(&self.words[v]).1).abs()
    }

    /// Least `r` meeting the travel bounds along `path`, read straight from
    /// the definition: every maximal run inside one coset travels `< 3r` if it
    /// touches an endpoint of the path and `< 2r` otherwise.
    fn least_r(&self, path: &[usize]) -> usize {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < path.len() {
            let mut j = i;
            while j + 1 < path.len() && self.same_coset(path[i], path[j + 1]) {
                j += 1;
            }
            if j > i {
                let end = i == 0 || j == path.len() - 1;
                runs.push((self.dk(path[i], path[j]) as usize, end));
            }
            i = j + 1;
        }
        (0..)
            .find(|&r| {
                runs.iter()
                    .all(|&(t, end)| if end { t < 3 * r } else { t < 2 * r })
            })
            .unwrap()
    }

    /// For every ordered pair within relative distance `d_max`: distance and
    /// the least `r` over all relative geodesics.
    fn profiles(&self, d_max: usize) -> HashMap<(usize, usize), (usize, usize)> {
        let mut out = HashMap::new();
        for u in 0..self.words.len() {
            let dist = bfs(&self.hat, u);
            let mut path = vec![u];
            self.walk(&dist, d_max, &mut path, &mut out);
        }
        out
    }

    fn walk(
        &self,
        dist: &[u32],
        d_max: usize,
        path: &mut Vec<usize>,
        out: &mut HashMap<(usize, usize), (usize, usize)>,
    ) {
        let x = *path.last().unwrap();
        if path.len() > 1 {
            let need = self.least_r(path);
            let e = out
                .entry((path[0], x))
                .or_insert((path.len() - 1, usize::MAX));
            e.1 = e.1.min(need);
        }
        if path.len() > d_max {
            return;
        }
        for &w in &self.hat[x] {
            if dist[w] == dist[x] + 1 {
                path.push(w);
                self.walk(dist, d_max, path, out);
                path.pop();
            }
        }
    }
}

fn c04_edges() -> Outcome {
    const R: usize = 6;
    let f = fixtures::f2_rel_a();
    let p = &f.group;
    let oracle = F2RelA::new(R);
    let profiles = oracle.profiles(4);
    let cb = build_coned_ball(
        build_ball(p, R).map_err(|e| e.to_string())?,
        p,
        &f.peripheral,
    );
    ensure!(
        cb.len() == oracle.words.len(),
        "ball sizes {} vs {}",
        cb.len(),
        oracle.words.len()
    );
    let identity = p.format(&Word::identity());
    let label = |w: &str| {
        if w.is_empty() {
            identity.clone()
        } else {
            w.to_string()
        }
    };
    let table = RelativeEdgeTable::new(&cb, 4);
    let mut counts = BTreeMap::new();
    for r in 0..=3 {
        for d in 0..=4 {
            for s in 0..=6 {
                let mut built: Vec<(String, String)> = table
                    .edges(r, d, s)
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .map(|(u, v, _)| {
                        sorted_pair(p.format(cb.base.vertex(u)), p.format(cb.base.vertex(v)))
                    })
                    .collect();
                built.sort();
                let mut expected: Vec<(String, String)> = Vec::new();
                for u in 0..oracle.words.len() {
                    for v in u + 1..oracle.words.len() {
                        let coset = oracle.same_coset(u, v) && oracle.dk(u, v) as usize <= s;
                        let geodesic = profiles
                            .get(&(u, v))
                            .is_some_and(|&(dist, need)| dist <= d && need <= r);
                        if coset || geodesic {
                            expected.push(sorted_pair(
                                label(&oracle.words[u]),
                                label(&oracle.words[v]),
                            ));
                        }
                    }
                }
                expected.sort();
                ensure!(
                    built == expected,
                    "(r, d, s) = ({r}, {d}, {s}): builder has {} edges, oracle {}",
                    built.len(),
                    expected.len()
                );
                counts.insert(format!("{r},{d},{s}"), built.len());
            }
        }
    }
    // the complex itself carries the same edges
    let x = build_relative_rips_capped(
        &cb,
        RipsParams {
            r: 2,
            d: 3,
            s: 5,
            k_max: 1,
            radius: R,
        },
        DEFAULT_CLIQUE_CAP,
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        x.count(1) == counts["2,3,5"],
        "complex edge count {} vs table {}",
        x.count(1),
        counts["2,3,5"]
    );
    Ok(json!({ "R": R, "vertices": cb.len(), "edge_counts": counts }))
}

fn sorted_pair(a: String, b: String) -> (String, String) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

// ---------------------------------------------------------------------------

fn point_labels(n: usize) -> Vec<Word> {
    // distinct placeholder labels: powers of the first generator
    (0..n).map(|i| Word(vec![Letter(0); i])).collect()
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

fn homology_of(cc: &ChainComplex, k: usize) -> Result<(usize, Vec<String>), String> {
    let h = reduced_homology(cc, k).map_err(|e| e.to_string())?;
    Ok((h.betti, h.torsion.iter().map(|t| t.to_string()).collect()))
}

/// The six-vertex projective plane: every edge of K6 lies in two of these.
const RP2: [[usize; 3]; 10] = [
    [0, 1, 2],
    [0, 2, 3],
    [0, 3, 4],
    [0, 4, 5],
    [0, 1, 5],
    [1, 2, 4],
    [2, 3, 5],
    [1, 3, 4],
    [2, 4, 5],
    [1, 3, 5],
];

fn rp2_chain_complex() -> ChainComplex {
    let edges = all_pairs(6);
    let edge_index: HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let d1 = edges
        .iter()
        .map(|&(a, b)| vec![(a as u32, -1), (b as u32, 1)])
        .collect();
    let d2 = RP2
        .iter()
        .map(|&[a, b, c]| {
            let mut col = vec![
                (edge_index[&(b, c)] as u32, 1),
                (edge_index[&(a, c)] as u32, -1),
                (edge_index[&(a, b)] as u32, 1),
            ];
            col.sort_unstable();
            col
        })
        .collect();
    ChainComplex::from_boundaries(
        vec![6, 15, 10],
        vec![
            SparseMatrix::default(),
            SparseMatrix::new(6, d1),
            SparseMatrix::new(15, d2),
        ],
    )
}

fn c05_homology() -> Outcome {
    let triangle = SimplicialComplex::flag(point_labels(3), &all_pairs(3), 1, 100)
        .map_err(|e| e.to_string())?;
    let tri = homology_of(
        &boundary_matrices(&triangle, 1).map_err(|e| e.to_string())?,
        1,
    )?;
    ensure!(tri == (1, vec![]), "hollow triangle H1 = {tri:?}");

    let tetra = SimplicialComplex::flag(point_labels(4), &all_pairs(4), 2, 100)
        .map_err(|e| e.to_string())?;
    let cc = boundary_matrices(&tetra, 2).map_err(|e| e.to_string())?;
    let t2 = homology_of(&cc, 2)?;
    let t1 = homology_of(&cc, 1)?;
    ensure!(
        t2 == (1, vec![]) && t1 == (0, vec![]),
        "tetrahedron boundary H2 = {t2:?}, H1 = {t1:?}"
    );

    let rp2 = rp2_chain_complex();
    let (p0, p1, p2) = (
        homology_of(&rp2, 0)?,
        homology_of(&rp2, 1)?,
        homology_of(&rp2, 2)?,
    );
    ensure!(p1 == (0, vec!["2".to_string()]), "RP2 H1 = {p1:?}");
    ensure!(
        p0 == (0, vec![]) && p2 == (0, vec![]),
        "RP2 H0 = {p0:?}, H2 = {p2:?}"
    );

    let c6 = fixtures::c6();
    let k_ball = build_ball_with(&c6.group, &c6.peripheral.sub_gens, 3, DEFAULT_VERTEX_CAP)
        .map_err(|e| e.to_string())?;
    let x = build_plain_rips(&k_ball, &c6.group, 2, 3).map_err(|e| e.to_string())?;
    ensure!(
        x.counts() == [6, 12, 8, 0],
        "C6 s = 2 counts {:?}, octahedron has [6, 12, 8, 0]",
        x.counts()
    );
    let cc = boundary_matrices(&x, 3).map_err(|e| e.to_string())?;
    let (o1, o2) = (homology_of(&cc, 1)?, homology_of(&cc, 2)?);
    ensure!(
        o2 == (1, vec![]) && o1 == (0, vec![]),
        "C6 s = 2: H2 = {o2:?}, H1 = {o1:?}"
    );
    Ok(json!({
        "hollow_triangle_H1": tri,
        "tetrahedron_boundary_H2": t2,
        "projective_plane_H1": p1,
        "c6_s2": { "counts": x.counts(), "H1": o1, "H2": o2 },
    }))
}

fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[rank][c];
                let pivot_row = m[rank].clone();
                for (mij, pj) in m[i][c..cols].iter_mut().zip(&pivot_row[c..cols]) {
                    *mij -= &f * pj;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn c06_snf() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut rank_histogram = [0usize; 9];
    let mut torsion_cases = 0;
    for case in 0..500 {
        let m = rng.gen_range(1..=8);
        let n = rng.gen_range(1..=8);
        let rows: Vec<Vec<i64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(-9..=9)).collect())
            .collect();
        let a = IntMatrix::from_rows(&rows);
        let r = smith_normal_form(&a);
        let d = r.u.mul(&a).mul(&r.v);
        for i in 0..m {
            for j in 0..n {
                let want = if i == j {
                    r.diagonal[i].clone()
                } else {
                    BigInt::zero()
                };
                ensure!(
                    *d.get(i, j) == want,
                    "case {case}: U A V differs from D at ({i}, {j})"
                );
            }
        }
        ensure!(
            r.u.mul(&r.u_inv) == IntMatrix::identity(m),
            "case {case}: U is not invertible"
        );
        ensure!(
            r.v.mul(&r.v_inv) == IntMatrix::identity(n),
            "case {case}: V is not invertible"
        );
        let f = r.invariant_factors();
        ensure!(
            f.iter().all(|x| x.is_positive()),
            "case {case}: nonpositive invariant factor"
        );
        ensure!(
            f.windows(2).all(|w| (&w[1] % &w[0]).is_zero()),
            "case {case}: divisibility fails {f:?}"
        );
        ensure!(
            r.diagonal[r.rank..].iter().all(|x| x.is_zero()),
            "case {case}: zeros do not trail"
        );
        let q = rational_rank(&rows);
        ensure!(
            r.rank == q,
            "case {case}: rank {} but rational rank {q}",
            r.rank
        );
        // the first invariant factor is the gcd of all entries
        let g = rows.iter().flatten().fold(BigInt::zero(), |g, &x| {
            num_integer::Integer::gcd(&g, &BigInt::from(x))
        });
        if !g.is_zero() {
            ensure!(
                f[0] == g,
                "case {case}: d_1 = {} but gcd of entries = {g}",
                f[0]
            );
        }
        rank_histogram[r.rank] += 1;
        if f.iter().any(|x| !x.is_one()) {
            torsion_cases += 1;
        }
    }
    Ok(
        json!({ "matrices": 500, "rank_histogram": rank_histogram, "with_nonunit_factor": torsion_cases }),
    )
}

fn c07_certificate() -> Outcome {
    let f = fixtures::c6();
    let plain = PlainFiltration::new(&f, 4, 3, DEFAULT_VERTEX_CAP, DEFAULT_CLIQUE_CAP)
        .map_err(|e| e.to_string())?;
    let alpha = FiltrationIndex::new(0, 0, 1);
    let cert = check_essential_triviality(&plain, "C6", 1, alpha, Budget::default())
        .map_err(|e| e.to_string())?;
    ensure!(
        cert.status == CertificateStatus::Trivialized,
        "status {:?}",
        cert.status
    );
    ensure!(cert.beta.map(|b| b.s) == Some(2), "beta = {:?}", cert.beta);
    ensure!(cert.source_betti == 1, "source betti {}", cert.source_betti);
    ensure!(
        cert.evidence.len() == 1,
        "{} pieces of evidence",
        cert.evidence.len()
    );
    ensure!(verify_certificate(&cert), "certificate does not verify");
    let ev = &cert.evidence[0];

    // the cycle is the hexagon: six generator edges, every vertex on two
    let p = &f.group;
    ensure!(ev.cycle.len() == 6, "cycle has {} edges", ev.cycle.len());
    let mut degree: HashMap<&str, usize> = HashMap::new();
    for (edge, c) in &ev.cycle {
        ensure!(
            c.abs() == 1 && edge.len() == 2,
            "bad cycle term {edge:?} {c}"
        );
        let (u, v) = (parse_label(&f, &edge[0])?, parse_label(&f, &edge[1])?);
        ensure!(
            p.quotient(&u, &v).len() == 1,
            "{edge:?} is not a generator edge"
        );
        for x in edge {
            *degree.entry(x.as_str()).or_default() += 1;
        }
    }
    ensure!(
        degree.len() == 6 && degree.values().all(|&d| d == 2),
        "cycle is not a hexagon: {degree:?}"
    );

    // one matrix multiplication: boundary matrix of the chain's triangles
    // times its coefficient vector equals the cycle vector
    let mut edges: Vec<Vec<String>> = Vec::new();
    let edge_of =
        |e: Vec<String>, edges: &mut Vec<Vec<String>>| match edges.iter().position(|x| *x == e) {
            Some(i) => i,
            None => {
                edges.push(e);
                edges.len() - 1
            }
        };
    let mut columns = Vec::new();
    for (tri, _) in &ev.bounding_chain {
        let mut col = Vec::new();
        for i in 0..3 {
            let face: Vec<String> = tri
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.clone())
                .collect();
            col.push((
                edge_of(face, &mut edges),
                if i % 2 == 0 { 1i64 } else { -1 },
            ));
        }
        columns.push(col);
    }
    let cycle_idx: Vec<(usize, i64)> = ev
        .cycle
        .iter()
        .map(|(e, c)| (edge_of(e.clone(), &mut edges), *c))
        .collect();
    let mut dense = vec![vec![0i64; columns.len()]; edges.len()];
    for (j, col) in columns.iter().enumerate() {
        for &(i, c) in col {
            dense[i][j] += c;
        }
    }
    let coeffs: Vec<i64> = ev.bounding_chain.iter().map(|(_, c)| *c).collect();
    let product = IntMatrix::from_rows(&dense)
        .mul_vec(&coeffs.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>());
    let mut target = vec![BigInt::zero(); edges.len()];
    for (i, c) in cycle_idx {
        target[i] += c;
    }
    ensure!(
        product == target,
        "boundary of the bounding chain differs from the cycle"
    );
    Ok(json!({
        "alpha": cert.alpha.as_array(),
        "beta": cert.beta.map(|b| b.as_array()),
        "examined": cert.examined.len(),
        "bounding_triangles": ev.bounding_chain.len(),
        "evidence_digest": cert.evidence_digest(),
    }))
}

fn parse_label(f: &Fixture, label: &str) -> Result<Word, String> {
    if label == f.group.format(&Word::identity()) {
        Ok(Word::identity())
    } else {
        f.group.word(label).map_err(|e| e.to_string())
    }
}

fn c08_params() -> Outcome {
    let f = fixtures::f2_rel_a();
    let cb = build_coned_ball(
        build_ball(&f.group, 6).map_err(|e| e.to_string())?,
        &f.group,
        &f.peripheral,
    );
    let delta = delta_of_ball(
        &cb.adjacency_lists(),
        |v| cb.base.depth(v),
        6,
        1,
        Sample::All,
    )
    .map_err(|e| e.to_string())?;
    let d = 2 * delta.delta.twice() as u64 + 3;
    let mut cfg = BcpConfig::new(
        relrips_core::coned::Rational::from_integer(4 * d),
        (d as usize).min(3),
    );
    cfg.boundary_margin = 1;
    let p = derive_params_with(&delta, &cb, &cfg).map_err(|e| e.to_string())?;
    // 4δ + 2 = 2·(2δ) + 2 keeps the comparison in integers
    let four_delta_plus_two = 2 * p.delta.delta.twice() as usize + 2;
    ensure!(
        p.d > four_delta_plus_two,
        "d = {} is not above 4 delta + 2 = {four_delta_plus_two}",
        p.d
    );
    ensure!(
        p.r > p.bcp.r_hat,
        "r = {} is not above r_hat = {}",
        p.r,
        p.bcp.r_hat
    );
    ensure!(p.s > 4 * p.r, "s = {} is not above 4r = {}", p.s, 4 * p.r);
    ensure!(p.satisfies_regime(), "satisfies_regime disagrees");
    Ok(json!({
        "delta": p.delta.delta,
        "delta_exact": p.delta.exact,
        "T": p.bcp.t.to_string(),
        "r_hat": p.bcp.r_hat,
        "r": p.r,
        "d": p.d,
        "s": p.s,
    }))
}

fn labeled(x: &SimplicialComplex, f: &Fixture) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = x
        .labeled_simplices(&f.group)
        .into_iter()
        .map(|mut s| {
            s.sort();
            s
        })
        .collect();
    out.sort();
    out
}

fn c09_coset_copy() -> Outcome {
    const R: usize = 4;
    let mut summary = BTreeMap::new();
    for f in [fixtures::f2_rel_a(), fixtures::z2_rel_a()] {
        let p = &f.group;
        let cb = build_coned_ball(
            build_ball(p, R).map_err(|e| e.to_string())?,
            p,
            &f.peripheral,
        );
        let k_ball = build_ball_with(p, &f.peripheral.sub_gens, R, DEFAULT_VERTEX_CAP)
            .map_err(|e| e.to_string())?;
        let identity = cb
            .base
            .index_of(&Word::identity())
            .ok_or("identity missing")?;
        let coset = cb.cosets.coset_of(identity);
        let mut rows = Vec::new();
        for s in 0..=4 {
            for (r, d) in [(0, 1), (0, 3), (1, 2), (1, 3)] {
                if r > 0 && s + 1 < 3 * r {
                    continue;
                }
                let x = build_relative_rips_capped(
                    &cb,
                    RipsParams {
                        r,
                        d,
                        s,
                        k_max: 3,
                        radius: R,
                    },
                    DEFAULT_CLIQUE_CAP,
                )
                .map_err(|e| e.to_string())?;
                let sub = coset_subcomplex(&x, coset).map_err(|e| e.to_string())?;
                let plain = build_plain_rips(&k_ball, p, s, 3).map_err(|e| e.to_string())?;
                ensure!(
                    labeled(&sub, &f) == labeled(&plain, &f),
                    "{}: (r, d, s) = ({r}, {d}, {s}) coset copy differs from Rips_s(K)",
                    p.name
                );
                rows.push(json!({ "r": r, "d": d, "s": s, "counts": plain.counts() }));
            }
        }
        summary.insert(p.name.clone(), rows);
    }
    Ok(json!(summary))
}

fn c10_localization() -> Outcome {
    // cosets {0, 1, 2} and {3, 4, 5} joined through the triangle 123
    let edges = [
        (0, 1),
        (0, 2),
        (1, 2),
        (1, 3),
        (2, 3),
        (3, 4),
        (3, 5),
        (4, 5),
    ];
    let mut x =
        SimplicialComplex::flag(point_labels(6), &edges, 2, 100).map_err(|e| e.to_string())?;
    x.coset_of = Some(vec![0, 0, 0, 3, 3, 3]);
    let e = |a: u32, b: u32| x.index_of(&[a, b]).unwrap();
    let chain =
        |terms: &[((u32, u32), i64)]| Chain::new(1, terms.iter().map(|&((a, b), c)| (e(a, b), c)));
    let z = chain(&[
        ((0, 1), 1),
        ((1, 3), 1),
        ((2, 3), -1),
        ((0, 2), -1),
        ((3, 4), 1),
        ((4, 5), 1),
        ((3, 5), -1),
    ]);
    let loc = coset_localize(&x, &z).map_err(|e| e.to_string())?;
    ensure!(loc.split, "no split found");
    let cc = boundary_matrices(&x, 2).map_err(|e| e.to_string())?;
    ensure!(
        loc.identity_holds(&cc).map_err(|e| e.to_string())?,
        "library identity check fails"
    );

    // z - sum(parts) = boundary(remainder), checked term by term
    let mut diff: BTreeMap<usize, i64> = z.terms.clone();
    for (_, part) in &loc.parts {
        ensure!(
            part.is_cycle(&cc).map_err(|e| e.to_string())?,
            "a part is not a cycle"
        );
        for (&i, &c) in &part.terms {
            *diff.entry(i).or_insert(0) -= c;
        }
    }
    let db = loc.remainder.boundary(&cc).map_err(|e| e.to_string())?;
    for (&i, &c) in &db.terms {
        *diff.entry(i).or_insert(0) -= c;
    }
    ensure!(
        diff.values().all(|&c| c == 0),
        "z - parts - boundary(remainder) = {diff:?}"
    );

    let expected_a = chain(&[((0, 1), 1), ((1, 2), 1), ((0, 2), -1)]);
    let expected_b = chain(&[((3, 4), 1), ((4, 5), 1), ((3, 5), -1)]);
    let t = x.index_of(&[1, 2, 3]).unwrap();
    ensure!(
        loc.parts == vec![(0, expected_a), (3, expected_b)],
        "parts {:?}",
        loc.parts
    );
    ensure!(
        loc.remainder == Chain::new(2, [(t, -1)]),
        "remainder {:?}",
        loc.remainder
    );
    Ok(json!({
        "parts": loc.parts.iter().map(|(c, ch)| json!({ "coset": c, "cycle": ch.with_simplices(&x) })).collect::<Vec<_>>(),
        "remainder": loc.remainder.with_simplices(&x),
    }))
}

fn relrips(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_relrips"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "relrips {} failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(out.stdout)
}

fn c11_negative_control() -> Outcome {
    let fixture = fixture_path("z2_rel_a");
    let fixture = fixture.to_str().unwrap();
    // T = 4d with d = 4·delta + 3 and delta = 1 on these balls
    for r in ["3", "4", "5"] {
        let out = relrips(&[
            "delta", fixture, "--R", r, "--margin", "1", "--format", "csv",
        ])?;
        let text = String::from_utf8_lossy(&out);
        let delta = text
            .lines()
            .nth(1)
            .and_then(|l| l.split(',').nth(3))
            .unwrap_or("");
        ensure!(delta == "1", "delta at R = {r} is {delta}, expected 1");
    }
    let csv = String::from_utf8(relrips(&[
        "bcp", fixture, "--R", "3..=5", "--T", "28", "--d-max", "3", "--margin", "1", "--format",
        "csv",
    ])?)
    .map_err(|e| e.to_string())?;
    let r_hat: Vec<usize> = csv
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .nth(4)
                .and_then(|x| x.parse().ok())
                .unwrap_or(0)
        })
        .collect();
    ensure!(r_hat.len() == 3, "expected three rows, got {}", r_hat.len());
    ensure!(
        r_hat.windows(2).all(|w| w[0] < w[1]),
        "r_hat {r_hat:?} is not strictly increasing"
    );
    let trend = golden_dir().join("c11_trend.csv");
    if std::env::var_os("RELRIPS_BLESS").is_some() {
        std::fs::write(&trend, &csv).map_err(|e| e.to_string())?;
    }
    let expected =
        std::fs::read_to_string(&trend).map_err(|e| format!("{}: {e}", trend.display()))?;
    ensure!(expected == csv, "trend differs from {}", trend.display());
    Ok(json!({ "T": 28, "R": [3, 4, 5], "r_hat": r_hat }))
}

fn c12_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("relrips-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut digests = BTreeMap::new();
    for name in ["f2_rel_a", "z2_rel_a"] {
        let fixture = fixture_path(name);
        let mut runs = Vec::new();
        for run in 0..2 {
            let out = dir.join(format!("{name}-{run}.json"));
            let evidence = dir.join(format!("{name}-{run}.evidence.json"));
            relrips(&[
                "pipeline",
                fixture.to_str().unwrap(),
                "--R",
                "4",
                "--n",
                "2",
                "--out",
                out.to_str().unwrap(),
                "--evidence",
                evidence.to_str().unwrap(),
            ])?;
            let report = std::fs::read(&out).map_err(|e| e.to_string())?;
            let ev = std::fs::read(&evidence).map_err(|e| e.to_string())?;
            runs.push((report, ev));
        }
        ensure!(
            runs[0].0 == runs[1].0,
            "{name}: reports differ between runs"
        );
        ensure!(
            runs[0].1 == runs[1].1,
            "{name}: evidence files differ between runs"
        );
        let report: Value = serde_json::from_slice(&runs[0].0).map_err(|e| e.to_string())?;
        digests.insert(
            name,
            json!({ "params": report["params"], "degrees": report["degrees"] }),
        );
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(json!(digests))
}
