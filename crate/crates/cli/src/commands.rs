use std::path::{Path, PathBuf};

use anyhow::Context;
use relrips_core::brown::{
    check_essential_triviality, run_theorem_pipeline, stage_homology, verify_certificate, Budget,
    Filtration, FiltrationIndex, PipelineConfig, PlainFiltration, RelativeFiltration,
    TrivializationCertificate,
};
use relrips_core::cayley::{build_ball_with, export_edge_list, DEFAULT_VERTEX_CAP};
use relrips_core::coned::{enumerate_relative_geodesics, relative_distance, Rational};
use relrips_core::homology::HomologyGroup;
use relrips_core::hyperbolicity::{
    delta_of_ball, derive_params_with, estimate_rbcp, BcpConfig, DeltaEstimate, Sample,
    SAMPLING_THRESHOLD,
};
use relrips_core::presentation::bounded_confluence_check;
use relrips_core::rips::{
    build_plain_rips_capped, build_relative_rips_capped, EdgeProvenance, DEFAULT_CLIQUE_CAP,
};
use relrips_core::{
    build_coned_ball, fixtures, parse_presentation, ConedBall, Fixture, RelativePath, RipsParams,
    SimplicialComplex,
};
use serde_json::{json, Value};

use crate::args::{
    BallArgs, BcpArgs, BrownArgs, Cli, Command, Common, ConeArgs, DeltaArgs, HomologyArgs,
    ParamsArgs, PipelineArgs, RipsArgs, StageArgs,
};
use crate::output::{emit, usage, write_atomic, Report};

/// Quadruples drawn when a coned ball is too large for the exact scan.
const DEFAULT_QUADRUPLE_SAMPLE: usize = 200_000;

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Parse(a) => parse(&a),
        Command::Ball(a) => ball(&a),
        Command::Cone(a) => cone(&a),
        Command::Delta(a) => delta(&a),
        Command::Bcp(a) => bcp(&a),
        Command::Params(a) => params(&a),
        Command::Rips(a) => rips(&a),
        Command::Homology(a) => homology(&a),
        Command::Brown(a) => brown(&a),
        Command::Pipeline(a) => pipeline(&a),
    }
}

struct Caps {
    vertices: usize,
    cliques: usize,
}

impl Caps {
    fn from_env() -> anyhow::Result<Caps> {
        Ok(Caps {
            vertices: env_cap("RELRIPS_CAP_VERTICES", DEFAULT_VERTEX_CAP)?,
            cliques: env_cap("RELRIPS_CAP_CLIQUES", DEFAULT_CLIQUE_CAP)?,
        })
    }

    fn json(&self) -> Value {
        json!({ "vertices": self.vertices, "cliques": self.cliques })
    }
}

fn env_cap(var: &str, default: usize) -> anyhow::Result<usize> {
    match std::env::var(var) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{var} must be a nonnegative integer, got '{v}'"))),
        Err(std::env::VarError::NotPresent) => Ok(default),
        Err(e) => Err(usage(format!("{var}: {e}"))),
    }
}

/// A loaded presentation and the name it was requested by.
struct Loaded {
    requested: String,
    fixture: Fixture,
}

/// Resolves a fixture argument: an existing path, then `fixtures/<arg>`, then
/// a bundled fixture of that name (with or without `.grp`).
fn load_fixture(arg: &Path) -> anyhow::Result<Loaded> {
    let requested = arg
        .to_str()
        .ok_or_else(|| usage("fixture path is not valid UTF-8"))?
        .to_string();
    let text = read_fixture_text(arg)?;
    let fixture = parse_presentation(&text)?;
    Ok(Loaded { requested, fixture })
}

fn read_fixture_text(arg: &Path) -> anyhow::Result<String> {
    if arg.is_file() {
        return std::fs::read_to_string(arg).with_context(|| format!("reading {}", arg.display()));
    }
    let in_dir = Path::new("fixtures").join(arg);
    if in_dir.is_file() {
        return std::fs::read_to_string(&in_dir)
            .with_context(|| format!("reading {}", in_dir.display()));
    }
    let stem = arg.to_string_lossy();
    let stem = stem.strip_suffix(".grp").unwrap_or(&stem);
    let stem = stem.rsplit('/').next().unwrap_or(stem);
    let bundled = match stem {
        "f2" => fixtures::F2,
        "f2_rel_a" => fixtures::F2_REL_A,
        "z2_rel_a" => fixtures::Z2_REL_A,
        "c6" => fixtures::C6,
        _ => return Err(usage(format!("fixture not found: {}", arg.display()))),
    };
    Ok(bundled.to_string())
}

fn coned_ball(f: &Fixture, radius: usize, caps: &Caps) -> anyhow::Result<ConedBall> {
    let g = &f.group;
    let ball = build_ball_with(
        g,
        &g.gens.letters().collect::<Vec<_>>(),
        radius,
        caps.vertices,
    )?;
    Ok(build_coned_ball(ball, g, &f.peripheral))
}

/// Parses `3`, `2,4,6`, `2..5` (exclusive) or `2..=5` (inclusive).
fn parse_radii(text: &str) -> anyhow::Result<Vec<usize>> {
    let bad = || usage(format!("invalid radius list '{text}'"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let out: Vec<usize> = if let Some((a, b)) = text.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = text.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        text.split(',').map(num).collect::<anyhow::Result<_>>()?
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn parse_rational(text: &str) -> anyhow::Result<Rational> {
    let t: Rational = text
        .trim()
        .parse()
        .map_err(|_| usage(format!("invalid rational '{text}'")))?;
    Ok(t)
}

fn base_config(command: &str, loaded: &Loaded, common: &Common, caps: &Caps) -> Value {
    json!({
        "command": command,
        "fixture": loaded.requested,
        "group": loaded.fixture.group.name,
        "format": format!("{:?}", common.format).to_lowercase(),
        "caps": caps.json(),
    })
}

fn with_fields(mut config: Value, extra: Value) -> Value {
    if let (Value::Object(base), Value::Object(more)) = (&mut config, extra) {
        base.extend(more);
    }
    config
}

fn finish(common: &Common, report: Report) -> anyhow::Result<()> {
    emit(&report, common.format, common.out.as_deref())
}

fn text_lines(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
}

fn words(cb: &ConedBall, vs: &[usize]) -> Vec<String> {
    vs.iter()
        .map(|&v| cb.group.format(cb.base.vertex(v)))
        .collect()
}

fn path_json(cb: &ConedBall, p: &RelativePath) -> Value {
    json!({
        "steps": words(cb, &p.steps),
        "projected": words(cb, &p.projected),
        "lifted": p.lifted,
        "relative_length": p.relative_length,
        "required_r": p.required_r(),
        "coset_ledger": p.coset_ledger.iter().map(|v| json!({
            "coset": cb.group.format(cb.base.vertex(v.coset)),
            "entry": cb.group.format(cb.base.vertex(v.entry)),
            "exit": cb.group.format(cb.base.vertex(v.exit)),
            "travel": v.travel,
        })).collect::<Vec<_>>(),
    })
}

fn parse(common: &Common) -> anyhow::Result<()> {
    let caps = Caps::from_env()?;
    let loaded = load_fixture(common.fixture())?;
    let f = &loaded.fixture;
    let g = &f.group;
    let confluence = bounded_confluence_check(g, f.confluence_check_length);
    let words_checked = match confluence {
        relrips_core::presentation::ConfluenceReport::Pass { words_checked } => words_checked,
        relrips_core::presentation::ConfluenceReport::Fail { .. } => 0,
    };
    let generators: Vec<String> = g.gens.symbols().iter().map(|c| c.to_string()).collect();
    let peripheral: Vec<String> = f
        .peripheral
        .sub_gens
        .iter()
        .map(|&l| g.gens.symbol(l).to_string())
        .collect();
    let rules: Vec<String> = g
        .rws
        .rules()
        .iter()
        .map(|r| format!("{}->{}", g.format(&r.lhs), g.format(&r.rhs)))
        .collect();
    let json = json!({
        "config": base_config("parse", &loaded, common, &caps),
        "valid": true,
        "name": g.name,
        "generators": generators,
        "rules": rules,
        "peripheral_generators": peripheral,
        "confluence_check_length": f.confluence_check_length,
        "confluence_words_checked": words_checked,
        "normal_form_closed": f.peripheral.normal_form_closed,
    });
    let text = text_lines(&[
        ("valid", "true".into()),
        ("name", g.name.clone()),
        ("generators", generators.join(" ")),
        ("rules", rules.len().to_string()),
        ("peripheral", peripheral.join(" ")),
        (
            "confluence",
            format!(
                "pass ({words_checked} words up to length {})",
                f.confluence_check_length
            ),
        ),
    ]);
    finish(
        common,
        Report {
            json,
            csv: None,
            text,
        },
    )
}

fn ball(a: &BallArgs) -> anyhow::Result<()> {
    let caps = Caps::from_env()?;
    let loaded = load_fixture(a.common.fixture())?;
    let g = &loaded.fixture.group;
    let ball = build_ball_with(
        g,
        &g.gens.letters().collect::<Vec<_>>(),
        a.radius,
        caps.vertices,
    )?;
    let mut spheres = vec![0usize; a.radius + 1];
    for v in 0..ball.len() {
        spheres[ball.depth(v)] += 1;
    }
    if let Some(path) = &a.export {
        write_atomic(path, &export_edge_list(&ball, g))?;
    }
    let json = json!({
        "config": with_fields(
            base_config("ball", &loaded, &a.common, &caps),
            json!({ "R": a.radius }),
        ),
        "vertices": ball.len(),
        "edges": ball.edge_count(),
        "sphere_sizes": spheres,
    });
    let text = text_lines(&[
        ("R", a.radius.to_string()),
        ("vertices", ball.len().to_string()),
        ("edges", ball.edge_count().to_string()),
        (
            "sphere sizes",
            spheres
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        ),
    ]);
    finish(
        &a.common,
        Report {
            json,
            csv: None,
            text,
        },
    )
}

fn vertex_of(cb: &ConedBall, text: &str) -> anyhow::Result<usize> {
    let w = cb
        .group
        .word(text)
        .map_err(|e| usage(format!("word '{text}': {e}")))?;
    let nf = cb.group.rws.reduce(w.letters());
    cb.base
        .index_of(&nf)
        .ok_or_else(|| usage(format!("word '{text}' lies outside the ball")))
}

fn cone(a: &ConeArgs) -> anyhow::Result<()> {
    let caps = Caps::from_env()?;
    let loaded = load_fixture(a.common.fixture())?;
    let cb = coned_ball(&loaded.fixture, a.radius, &caps)?;
    let nontrivial = cb
        .cosets
        .ids()
        .iter()
        .filter(|&&id| cb.cosets.members(id).is_some_and(|m| m.len() > 1))
        .count();
    let mut json = json!({
        "config": with_fields(
            base_config("cone", &loaded, &a.common, &caps),
            json!({ "R": a.radius, "from": a.from, "to": a.to, "d_max": a.d_max }),
        ),
        "vertices": cb.len(),
        "cayley_edges": cb.base.edge_count(),
        "coset_edges": cb.coset_edge_count(),
        "cosets": cb.cosets.len(),
        "cosets_with_several_vertices": nontrivial,
    });
    let mut text = text_lines(&[
        ("R", a.radius.to_string()),
        ("vertices", cb.len().to_string()),
        ("cayley edges", cb.base.edge_count().to_string()),
        ("coset edges", cb.coset_edge_count().to_string()),
        ("cosets", cb.cosets.len().to_string()),
    ]);
    if let (Some(from), Some(to)) = (&a.from, &a.to) {
        let u = vertex_of(&cb, from)?;
        let v = vertex_of(&cb, to)?;
        let dist = relative_distance(&cb, u, v)?;
        let geodesics = match dist.distance {
            Some(d) if d <= a.d_max => enumerate_relative_geodesics(&cb, u, v, a.d_max)?,
            _ => Vec::new(),
        };
        json["relative_distance"] = json!(dist.distance);
        json["boundary_warning"] = json!(dist.boundary_warning);
        json["geodesics"] = Value::Array(geodesics.iter().map(|p| path_json(&cb, p)).collect());
        text.push_str(&text_lines(&[
            (
                "relative distance",
                dist.distance
                    .map_or("disconnected in the ball".into(), |d| d.to_string()),
            ),
            ("relative geodesics", geodesics.len().to_string()),
        ]));
        for p in &geodesics {
            text.push_str(&format!(
                "  {} (required r = {})\n",
                words(&cb, &p.projected).join(" "),
                p.required_r()
            ));
        }
    }
    finish(
        &a.common,
        Report {
            json,
            csv: None,
            text,
        },
    )
}

fn delta_estimate(
    f: &Fixture,
    radius: usize,
    margin: usize,
    sample: Option<Sample>,
    cayley: bool,
    caps: &Caps,
) -> anyhow::Result<DeltaEstimate> {
    let cb = coned_ball(f, radius, caps)?;
    let adj = if cayley {
        cb.base.adjacency_lists()
    } else {
        cb.adjacency_lists()
    };
    let sample = sample.unwrap_or(Sample::All);
    Ok(delta_of_ball(
        &adj,
        |v| cb.base.depth(v),
        radius,
        margin,
        sample,
    )?)
}

fn delta(a: &DeltaArgs) -> anyhow::Result<()> {
    let caps = Caps::from_env()?;
    let loaded = load_fixture(a.common.fixture())?;
    let radii = parse_radii(&a.radius)?;
    let sample = a.n.map(|count| Sample::Random {
        count,
        seed: a.seed,
    });
    let mut rows = Vec::new();
    for &r in &radii {
        let est = delta_estimate(&loaded.fixture, r, a.margin, sample, a.cayley, &caps)?;
        rows.push((r, est));
    }
    let graph = if a.cayley { "cayley" } else { "coned" };
    let json = json!({
        "config": with_fields(
            base_config("delta", &loaded, &a.common, &caps),
            json!({
                "R": radii,
                "graph": graph,
                "margin": a.margin,
                "sample": sample.unwrap_or(Sample::All),
            }),
        ),
        "estimates": rows.iter().map(|(r, e)| json!({ "R": r, "estimate": e })).collect::<Vec<_>>(),
    });
    let header = ["R", "graph", "vertices", "delta", "exact", "margin"]
        .map(String::from)
        .to_vec();
    let csv_rows = rows
        .iter()
        .map(|(r, e)| {
            vec![
                r.to_string(),
                graph.to_string(),
                e.vertices.to_string(),
                e.delta.to_string(),
                e.exact.to_string(),
                e.boundary_margin.to_string(),
            ]
        })
        .collect();
    let text = rows
        .iter()
        .map(|(r, e)| {
            format!(
                "R = {r}: delta = {} over {} vertices ({})\n",
                e.delta,
                e.vertices,
                if e.exact { "exact" } else { "sampled" }
            )
        })
        .collect();
    finish(
        &a.common,
        Report {
            json,
            csv: Some((header, csv_rows)),
            text,
        },
    )
}

fn bcp(a: &BcpArgs) -> anyhow::Result<()> {
    let caps = Caps::from_env()?;
    let loaded = load_fixture(a.common.fixture())?;
    let radii = parse_radii(&a.radius)?;
    let t = parse_rational(&a.t)?;
    let mut cfg = BcpConfig::new(t, a.d_max);
    cfg.boundary_margin = a.margin;
    let mut rows = Vec::new();
    for &r in &radii {
        let cb = coned_ball(&loaded.fixture, r, &caps)?;
        let est = estimate_rbcp(&cb, &cfg)?;
        let witness = est.witnesses.first().map(|w| {
            json!({
                "coset": cb.group.format(cb.base.vertex(w.coset)),
                "clause": w.clause,
                "requirement": w.requirement,
                "first": path_json(&cb, &w.first),
                "second": path_json(&cb, &w.second),
            })
        });
        rows.push((r, est, witness));
    }
    let json = json!({
        "config": with_fields(
            base_config("bcp", &loaded, &a.common, &caps),
            json!({ "R": radii, "T": t.to_string(), "d_max": a.d_max, "margin": a.margin }),
        ),
        "estimates": rows.iter().map(|(r, e, w)| json!({
            "R": r,
            "r_hat": e.r_hat,
            "endpoint_pairs": e.endpoint_pairs,
            "paths_examined": e.paths_examined,
            "witnesses": e.witnesses.len(),
            "witness": w,
        })).collect::<Vec<_>>(),
    });
    let header = [
        "R",
        "T",
        "d_max",
        "margin",
        "r_hat",
        "endpoint_pairs",
        "paths_examined",
    ]
    .map(String::from)
    .to_vec();
    let csv_rows = rows
        .iter()
        .map(|(r, e, _)| {
            vec![
                r.to_string(),
                t.to_string(),
                a.d_max.to_string(),
                a.margin.to_string(),
                e.r_hat.to_string(),
                e.endpoint_pairs.to_string(),
                e.paths_examined.to_string(),
            ]
        })
        .collect();
    let text = rows
        .iter()
        .map(|(r, e, _)| {
            format!(
                "R = {r}: r_hat = {} ({} endpoint pairs, {} paths)\n",
                e.r_hat, e.endpoint_pairs, e.paths_examined
            )
        })
        .collect();
    finish(
        &a.common,
        Report {
            json,
            csv: Some((header, csv_rows)),
            text,
        },
    )
}

fn params(a: &ParamsArgs) -> anyhow::Result<()> {
    let caps = Caps::from_env()?;
    let loaded = load_fixture(a.common.fixture())?;
    let cb = coned_ball(&loaded.fixture, a.radius, &caps)?;
    let sample = if cb.len() > SAMPLING_THRESHOLD {
        Sample::Random {
            count: DEFAULT_QUADRUPLE_SAMPLE,
            seed: a.seed,
        }
    } else {
        Sample::All
    };
    let delta = delta_of_ball(
        &cb.adjacency_lists(),
        |v| cb.base.depth(v),
        a.radius,
        a.margin,
        sample,
    )?;
    let d = 2 * delta.delta.twice() as u64 + 3;
    let mut cfg = BcpConfig::new(Rational::from_integer(4 * d), (d as usize).min(a.d_max));
    cfg.boundary_margin = a.margin;
    let p = derive_params_with(&delta, &cb, &cfg)?;
    let ok = p.satisfies_regime();
    let json = json!({
        "config": with_fields(
            base_config("params", &loaded, &a.common, &caps),
            json!({ "R": a.radius, "d_max": a.d_max, "margin": a.margin, "seed": a.seed }),
        ),
        "r": p.r,
        "d": p.d,
        "s": p.s,
        "delta": p.delta,
        "r_hat": p.bcp.r_hat,
        "T": p.bcp.t.to_string(),
        "bcp_d_max": p.bcp.d_max,
        "endpoint_pairs": p.bcp.endpoint_pairs,
        "satisfies_regime": ok,
        "regime": {
            "d > 4 delta + 2": p.d > 2 * p.delta.delta.twice() as usize + 2,
            "r > r_hat(4d)": p.r > p.bcp.r_hat,
            "s > 4r": p.s > 4 * p.r,
        },
    });
    let text = text_lines(&[
        ("delta", p.delta.delta.to_string()),
        ("r_hat", format!("{} at T = {}", p.bcp.r_hat, p.bcp.t)),
        ("(r, d, s)", format!("({}, {}, {})", p.r, p.d, p.s)),
        ("satisfies regime", ok.to_string()),
    ]);
    finish(
        &a.common,
        Report {
            json,
            csv: None,
            text,
        },
    )
}

/// The stage described by `--R --r --d --s --k-max [--plain]`.
fn build_stage(
    f: &Fixture,
    st: &StageArgs,
    caps: &Caps,
) -> anyhow::Result<(SimplicialComplex, Value)> {
    if st.plain {
        let s = st.s.ok_or_else(|| usage("--plain needs --s"))?;
        if st.r.is_some() || st.d.is_some() {
            return Err(usage("--r and --d do not apply to --plain"));
        }
        let k_ball = build_ball_with(&f.group, &f.peripheral.sub_gens, st.radius, caps.vertices)?;
        let x = build_plain_rips_capped(&k_ball, &f.group, s, st.k_max, caps.cliques)?;
        let cfg = json!({ "filtration": "plain", "R": st.radius, "s": s, "k_max": st.k_max });
        Ok((x, cfg))
    } else {
        let (Some(r), Some(d), Some(s)) = (st.r, st.d, st.s) else {
            return Err(usage("a relative stage needs --r, --d and --s"));
        };
        let cb = coned_ball(f, st.radius, caps)?;
        let params = RipsParams {
            r,
            d,
            s,
            k_max: st.k_max,
            radius: st.radius,
        };
        let x = build_relative_rips_capped(&cb, params, caps.cliques)?;
        let cfg = json!({
            "filtration": "relative",
            "R": st.radius,
            "r": r,
            "d": d,
            "s": s,
            "k_max": st.k_max,
        });
        Ok((x, cfg))
    }
}

fn rips(a: &RipsArgs) -> anyhow::Result<()> {
    let caps = Caps::from_env()?;
    let loaded = load_fixture(a.common.fixture())?;
    let (x, stage) = build_stage(&loaded.fixture, &a.stage, &caps)?;
    if let Some(path) = &a.export {
        write_atomic(path, &x.export(&loaded.fixture.group))?;
    }
    let same_coset = x
        .provenance
        .iter()
        .filter(|p| matches!(p, EdgeProvenance::SameCoset { .. }))
        .count();
    let geodesic = x.provenance.len() - same_coset;
    let counts = x.counts();
    let json = json!({
        "config": with_fields(base_config("rips", &loaded, &a.common, &caps), stage),
        "simplex_counts": counts,
        "euler_characteristic": euler(&counts),
        "edge_provenance": { "same_coset": same_coset, "relative_geodesic": geodesic },
        "caveats": x.caveats,
    });
    let text = text_lines(&[
        (
            "simplices by dimension",
            counts
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        ),
        ("euler characteristic", euler(&counts).to_string()),
        ("caveats", x.caveats.len().to_string()),
    ]);
    finish(
        &a.common,
        Report {
            json,
            csv: None,
            text,
        },
    )
}

fn euler(counts: &[usize]) -> i64 {
    counts
        .iter()
        .enumerate()
        .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
        .sum()
}

fn check_k_max(k: usize, k_max: usize) -> anyhow::Result<()> {
    if k_max < k + 1 {
        return Err(usage(format!(
            "--k-max {k_max} is too small for degree {k}; homology in degree k needs k-max >= k + 1"
        )));
    }
    Ok(())
}

fn homology_json(h: &HomologyGroup, x: &SimplicialComplex, f: &Fixture) -> Value {
    let generators: Vec<Value> = h
        .generators
        .iter()
        .map(|g| {
            let terms: Vec<Value> = g
                .cycle
                .with_simplices(x)
                .into_iter()
                .map(|(s, c)| {
                    let labels: Vec<String> = s
                        .iter()
                        .map(|&v| f.group.format(&x.vertices[v as usize]))
                        .collect();
                    json!([labels, c])
                })
                .collect();
            json!({ "order": g.order.as_ref().map(|o| o.to_string()), "cycle": terms })
        })
        .collect();
    json!({
        "dim": h.dim,
        "betti": h.betti,
        "torsion": h.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "n_simplices": h.cells,
        "generators": generators,
    })
}

fn group_text(h: &HomologyGroup) -> String {
    let mut parts = Vec::new();
    if h.betti > 0 {
        parts.push(if h.betti == 1 {
            "Z".to_string()
        } else {
            format!("Z^{}", h.betti)
        });
    }
    parts.extend(h.torsion.iter().map(|t| format!("Z/{t}")));
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn homology(a: &HomologyArgs) -> anyhow::Result<()> {
    check_k_max(a.k, a.stage.k_max)?;
    let caps = Caps::from_env()?;
    let loaded = load_fixture(a.common.fixture())?;
    let (x, stage) = build_stage(&loaded.fixture, &a.stage, &caps)?;
    let h = stage_homology(&x, a.k)?;
    let mut json = homology_json(&h, &x, &loaded.fixture);
    json["config"] = with_fields(
        base_config("homology", &loaded, &a.common, &caps),
        with_fields(stage, json!({ "k": a.k })),
    );
    json["caveats"] = json!(x.caveats);
    let text = format!(
        "reduced H_{} = {}\ncells (k-1, k, k+1): {:?}\n",
        a.k,
        group_text(&h),
        h.cells
    );
    finish(
        &a.common,
        Report {
            json,
            csv: None,
            text,
        },
    )
}

/// Where the evidence sidecar goes: `--evidence`, else next to `--out`.
fn evidence_path(explicit: Option<&PathBuf>, out: Option<&PathBuf>) -> Option<PathBuf> {
    explicit.cloned().or_else(|| {
        out.map(|o| {
            let mut name = o.file_stem().unwrap_or_default().to_os_string();
            name.push(".evidence.json");
            o.with_file_name(name)
        })
    })
}

fn evidence_json(certs: &[TrivializationCertificate]) -> anyhow::Result<String> {
    let all: Vec<Value> = certs
        .iter()
        .map(|c| {
            json!({
                "filtration": c.filtration,
                "k": c.k,
                "evidence_digest": c.evidence_digest(),
                "evidence": c.evidence,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&all)?;
    s.push('\n');
    Ok(s)
}

fn certificate_text(c: &TrivializationCertificate) -> String {
    let beta = c.beta.map_or("none".to_string(), |b| b.to_string());
    let status = serde_json::to_value(c.status)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    format!(
        "{} k = {}: alpha = {} -> beta = {} ({status}, {} stages examined)\n",
        c.filtration,
        c.k,
        c.alpha,
        beta,
        c.examined.len()
    )
}

fn brown(a: &BrownArgs) -> anyhow::Result<()> {
    check_k_max(a.k, a.k_max)?;
    let caps = Caps::from_env()?;
    let loaded = load_fixture(a.common.fixture())?;
    let f = &loaded.fixture;
    let alpha = FiltrationIndex::new(a.alpha_r, a.alpha_d, a.alpha_s);
    let budget = Budget::uniform(a.budget);
    let filtration: Box<dyn Filtration> = if a.plain {
        if a.alpha_r != 0 || a.alpha_d != 0 {
            return Err(usage("--alpha-r and --alpha-d do not apply to --plain"));
        }
        Box::new(PlainFiltration::new(
            f,
            a.radius,
            a.k_max,
            caps.vertices,
            caps.cliques,
        )?)
    } else {
        Box::new(RelativeFiltration::new(
            f,
            a.radius,
            a.k_max,
            caps.vertices,
            caps.cliques,
        )?)
    };
    let cert = check_essential_triviality(filtration.as_ref(), &f.group.name, a.k, alpha, budget)?;
    let verified = verify_certificate(&cert);
    let mut json = cert.summary_json();
    json["verified"] = json!(verified);
    json["config"] = with_fields(
        base_config("brown", &loaded, &a.common, &caps),
        json!({
            "filtration": filtration.kind(),
            "R": a.radius,
            "k": a.k,
            "k_max": a.k_max,
            "alpha": alpha.as_array(),
            "budget": budget,
        }),
    );
    if let Some(path) = evidence_path(a.evidence.as_ref(), a.common.out.as_ref()) {
        write_atomic(&path, &evidence_json(std::slice::from_ref(&cert))?)?;
    }
    let text = certificate_text(&cert);
    finish(
        &a.common,
        Report {
            json,
            csv: None,
            text,
        },
    )
}

fn pipeline(a: &PipelineArgs) -> anyhow::Result<()> {
    let k_max = a.k_max.unwrap_or(a.n.max(1));
    if a.n > 0 {
        check_k_max(a.n - 1, k_max)?;
    }
    let caps = Caps::from_env()?;
    let loaded = load_fixture(a.common.fixture())?;
    let alpha = match (a.alpha_r, a.alpha_d, a.alpha_s) {
        (Some(r), Some(d), Some(s)) => Some(FiltrationIndex::new(r, d, s)),
        _ => None,
    };
    let cfg = PipelineConfig {
        radius: a.radius,
        k_max,
        budget: Budget::uniform(a.budget),
        d_max_cap: a.d_max,
        boundary_margin: a.margin,
        seed: a.seed,
        vertex_cap: caps.vertices,
        clique_cap: caps.cliques,
        alpha,
        plain_s: None,
    };
    let name = loaded.fixture.group.name.clone();
    let report = run_theorem_pipeline(&name, &loaded.fixture, a.n, &cfg)?;
    let mut json = serde_json::to_value(&report)?;
    json["config"] = with_fields(
        base_config("pipeline", &loaded, &a.common, &caps),
        serde_json::to_value(&cfg)?,
    );
    json["config"]["n"] = json!(a.n);
    if let Some(path) = evidence_path(a.evidence.as_ref(), a.common.out.as_ref()) {
        write_atomic(&path, &evidence_json(&report.certificates)?)?;
    }
    let mut text = String::new();
    if let Some(p) = &report.params {
        text.push_str(&format!(
            "(r, d, s) = ({}, {}, {}), r_hat = {}, regime {}\n",
            p.r,
            p.d,
            p.s,
            p.r_hat,
            if p.satisfies_regime { "holds" } else { "fails" }
        ));
    }
    for c in &report.certificates {
        text.push_str(&certificate_text(c));
    }
    for flag in &report.red_flags {
        text.push_str(&format!("red flag: {flag}\n"));
    }
    finish(
        &a.common,
        Report {
            json,
            csv: None,
            text,
        },
    )
}
