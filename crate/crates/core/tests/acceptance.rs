//! The acceptance suite: one PASS/FAIL line per criterion, with timings.
//! Exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use flowcalc::cli::{run_args, Body, Document, Status};
use flowcalc::dihomotopy::resultat1_check;
use flowcalc::flow::{find_morphisms, is_isomorphic, CombFlow, FlowMorphism};
use flowcalc::homology::{homology_profile, smith_normal_form, HomologyGroup, IntMatrix};
use flowcalc::presentation::{
    level_profile, pushout, sequential_colimit, tensor, FlowPresentation, Saturated, Word, DEFAULT_BUDGET,
};
use flowcalc::random::{bounded_posets_up_to_iso, chain_links, invariance_suite, random_bounded_poset, random_inclusion_chain, rng};
use flowcalc::simpset::{CellComplex, FinSimplicialSet};
use rand::Rng;

const CAP: usize = 3;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn json_doc(args: &[&str]) -> (i32, Document, String) {
    let mut v = vec!["flowcalc", "--format", "json"];
    v.extend_from_slice(args);
    let out = run_args(v);
    let doc = serde_json::from_str(&out.stdout).expect("json document");
    (out.code, doc, out.stdout)
}

fn figure_one() -> Verdict {
    let (code, doc, _) = json_doc(&["poset-report", &data("fig1.poset")]);
    let Some(Body::PosetReport(b)) = doc.result else {
        return verdict(false, "no poset report");
    };
    let objects: BTreeSet<&str> = b.objects.iter().map(|o| o.chain.as_str()).collect();
    let want_objects: BTreeSet<&str> = ["(0,A,B,1)", "(0,A,1)", "(0,B,1)", "(0,C,1)", "(0,1)"].into();
    let arrows: BTreeSet<(String, String)> = b.arrows.iter().map(|a| (a.source.clone(), a.target.clone())).collect();
    let want_arrows: BTreeSet<(String, String)> = [
        ("(0,A,B,1)", "(0,A,1)"),
        ("(0,A,B,1)", "(0,B,1)"),
        ("(0,A,1)", "(0,1)"),
        ("(0,B,1)", "(0,1)"),
        ("(0,C,1)", "(0,1)"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    let pass = code == 0
        && objects == want_objects
        && b.objects.len() == 5
        && arrows == want_arrows
        && b.arrows.len() == 5
        && b.terminal.as_deref() == Some("(0,1)");
    verdict(pass, format!("{} objects, {} generating arrows, terminal {}", b.objects.len(), b.arrows.len(), b.terminal.unwrap_or_default()))
}

fn reedy() -> Verdict {
    let mut r = rng(2);
    let mut violations = 0;
    let mut arrows = 0;
    let mut triangles = 0;
    for i in 0..200 {
        let p = random_bounded_poset(&mut r, 8, [0.2, 0.4, 0.6][i % 3]);
        let rep = p.reedy_report().expect("bounded");
        arrows += rep.arrows_checked;
        triangles += rep.triangles_checked;
        violations += rep.degree_violations.len() + rep.triangle_violations.len();
        let cat = p.ext_category().unwrap();
        if !cat.simplicial_relations_hold() {
            violations += 1;
        }
    }
    verdict(violations == 0, format!("200 posets, {arrows} arrows, {triangles} triangles, {violations} violations"))
}

fn resultat1() -> Verdict {
    let posets = bounded_posets_up_to_iso(6);
    let mut failures = Vec::new();
    for p in &posets {
        let f = CombFlow::from_poset(p, CAP);
        match resultat1_check(&f) {
            Ok(r) if r.single_class && r.contractible => {}
            Ok(r) => failures.push(format!("{:?}: {} classes", p.covers(), r.poset_flow_classes)),
            Err(e) => failures.push(format!("{:?}: {e}", p.covers())),
        }
    }
    verdict(failures.is_empty(), format!("{} posets up to isomorphism, {} failures {:?}", posets.len(), failures.len(), failures.first()))
}

fn invariance() -> Verdict {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("counterexamples");
    let out = invariance_suite(20_261_019, 500, CAP, DEFAULT_BUDGET, Some(&dir));
    let failed: Vec<&str> = out.cases.iter().filter(|c| !c.passed()).map(|c| c.label.as_str()).collect();
    let mut detail = format!("{} triples, {} failures", out.cases.len(), failed.len());
    if !out.counterexamples.is_empty() {
        detail.push_str(&format!(", written to {}", dir.display()));
    }
    verdict(failed.is_empty() && out.cases.len() == 500, detail)
}

/// Every semi-simplicial set with at most three cells, one per isomorphism
/// class, as the free simplicial sets they generate.
fn small_spaces(cap: usize) -> Vec<FinSimplicialSet> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for c0 in 0..=3usize {
        for c1 in 0..=3 - c0 {
            for c2 in 0..=3 - c0 - c1 {
                if (c1 > 0 && c0 == 0) || (c2 > 0 && c1 == 0) {
                    continue;
                }
                let edge_faces: Vec<Vec<usize>> = (0..c0 * c0).map(|k| vec![k / c0, k % c0]).collect();
                let tri_faces: Vec<Vec<usize>> =
                    (0..c1.pow(3)).map(|k| vec![k / (c1 * c1), k / c1 % c1, k % c1]).collect();
                for edges in product(&edge_faces, c1) {
                    for tris in product(&tri_faces, c2) {
                        let mut c = CellComplex::new();
                        for v in 0..c0 {
                            c.add(0, format!("v{v}"), vec![]).unwrap();
                        }
                        for (i, e) in edges.iter().enumerate() {
                            c.add(1, format!("e{i}"), e.clone()).unwrap();
                        }
                        if tris.iter().enumerate().any(|(i, t)| c.add(2, format!("t{i}"), t.clone()).is_err()) {
                            continue;
                        }
                        if seen.insert(canonical(c0, &edges, &tris)) {
                            out.push(FinSimplicialSet::from_cells(&c, cap));
                        }
                    }
                }
            }
        }
    }
    out
}

fn product<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out.into_iter().flat_map(|p| items.iter().map(move |x| [p.clone(), vec![x.clone()]].concat())).collect();
    }
    out
}

fn perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    perms(n - 1)
        .into_iter()
        .flat_map(|p| (0..n).map(move |i| {
            let mut q = p.clone();
            q.insert(i, n - 1);
            q
        }))
        .collect()
}

fn canonical(c0: usize, edges: &[Vec<usize>], tris: &[Vec<usize>]) -> (usize, Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut best = None;
    for pv in perms(c0) {
        for pe in perms(edges.len()) {
            let mut e: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
            for (i, f) in edges.iter().enumerate() {
                e[pe[i]] = f.iter().map(|&v| pv[v]).collect();
            }
            let mut t: Vec<Vec<usize>> = tris.iter().map(|f| f.iter().map(|&x| pe[x]).collect()).collect();
            t.sort();
            let key = (c0, e, t);
            if best.as_ref().is_none_or(|b| &key < b) {
                best = Some(key);
            }
        }
    }
    best.unwrap()
}

/// Flows on at most three states with point generators, free or with the
/// composite through the middle state identified with the direct generator.
fn small_flows(cap: usize) -> Vec<CombFlow> {
    let mut out: Vec<CombFlow> = Vec::new();
    let push = |f: CombFlow, out: &mut Vec<CombFlow>| {
        if !out.iter().any(|g| is_isomorphic(g, &f)) {
            out.push(f);
        }
    };
    for n in 1..=3usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for mask in 0..(1u32 << pairs.len()) {
            for relate in [false, true] {
                let mut p = FlowPresentation::new(cap, (0..n).map(|i| format!("x{i}")).collect());
                let mut gens = Vec::new();
                for (i, &(a, b)) in pairs.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        let g = p.add_generator(format!("g{a}{b}"), a, b, FinSimplicialSet::discrete(&[&format!("g{a}{b}")], cap)).unwrap();
                        gens.push(((a, b), g));
                    }
                }
                let find = |pair| gens.iter().find(|(p, _)| *p == pair).map(|&(_, g)| g);
                if relate {
                    let (Some(u), Some(v), Some(w)) = (find((0, 1)), find((1, 2)), find((0, 2))) else { continue };
                    p.add_relation(Word::new(0, vec![(u, 0), (v, 0)]), Word::letter(0, w, 0)).unwrap();
                }
                push(p.saturate(DEFAULT_BUDGET).unwrap().flow, &mut out);
            }
        }
    }
    out
}

fn tensor_identities() -> Verdict {
    let cap = CAP;
    let spaces = small_spaces(cap);
    let mut flows = small_flows(cap);
    flows.extend(spaces.iter().map(|z| CombFlow::glob(z.clone())));
    let empty = FinSimplicialSet::empty(cap);
    let mut checked = 0;
    let mut failures = Vec::new();
    for x in &flows {
        checked += 1;
        let t = tensor(&empty, x, DEFAULT_BUDGET).unwrap().flow;
        if !is_isomorphic(&t, &x.skeleton()) {
            failures.push("empty tensor".to_string());
        }
    }
    for u in &spaces {
        for z in &spaces {
            checked += 1;
            let lhs = tensor(u, &CombFlow::glob(z.clone()), DEFAULT_BUDGET).unwrap().flow;
            if !is_isomorphic(&lhs, &CombFlow::glob(u.product(z).unwrap())) {
                failures.push(format!("glob: {:?} {:?}", sizes(u), sizes(z)));
            }
        }
    }
    for u in &spaces {
        for v in &spaces {
            let uv = u.product(v).unwrap();
            for x in flows.iter().filter(|x| x.state_count() <= 3) {
                checked += 1;
                let lhs = tensor(&uv, x, DEFAULT_BUDGET).unwrap().flow;
                let inner = tensor(v, x, DEFAULT_BUDGET).unwrap().flow;
                let rhs = tensor(u, &inner, DEFAULT_BUDGET).unwrap().flow;
                if !is_isomorphic(&lhs, &rhs) {
                    failures.push(format!("associativity: {:?} {:?} {:?}", sizes(u), sizes(v), level_profile(x)));
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!("{} spaces, {} flows, {checked} identities, {} failures {:?}", spaces.len(), flows.len(), failures.len(), failures.first()),
    )
}

fn sizes(s: &FinSimplicialSet) -> Vec<usize> {
    (0..=s.cap()).map(|n| s.len(n)).collect()
}

fn sequential() -> Verdict {
    let mut r = rng(6);
    let mut failures = 0;
    for _ in 0..100 {
        let pres = random_inclusion_chain(&mut r, 4, CAP);
        let sats: Vec<Saturated> = pres.iter().map(|p| p.saturate(DEFAULT_BUDGET).unwrap()).collect();
        let links = chain_links(&sats).unwrap();
        let flows: Vec<CombFlow> = sats.iter().map(|s| s.flow.clone()).collect();
        let col = sequential_colimit(&flows, &links).unwrap();
        let whole = &sats.last().unwrap().flow;
        if level_profile(&col) != level_profile(whole) || !is_isomorphic(&col, whole) {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("100 chains, {failures} mismatches"))
}

/// Flows on at most three states with at most three path vertices in
/// total, generated by point generators of multiplicity up to two.
fn tiny_flows(cap: usize) -> Vec<CombFlow> {
    let mut out: Vec<CombFlow> = Vec::new();
    for n in 1..=3usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for code in 0..3usize.pow(pairs.len() as u32) {
            let mut p = FlowPresentation::new(cap, (0..n).map(|i| format!("x{i}")).collect());
            let mut c = code;
            for &(a, b) in &pairs {
                let k = c % 3;
                c /= 3;
                let names: Vec<String> = (0..k).map(|i| format!("p{a}{b}{i}")).collect();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                if k > 0 {
                    p.add_generator(format!("g{a}{b}"), a, b, FinSimplicialSet::discrete(&refs, cap)).unwrap();
                }
            }
            let f = p.saturate(DEFAULT_BUDGET).unwrap().flow;
            if (0..=cap).all(|l| f.path_simplices(l) <= 3) && !out.iter().any(|g| is_isomorphic(g, &f)) {
                out.push(f);
            }
        }
    }
    out
}

fn pushout_universal() -> Verdict {
    let flows = tiny_flows(CAP);
    let hom: Vec<Vec<Vec<FlowMorphism>>> =
        flows.iter().map(|x| flows.iter().map(|y| find_morphisms(x, y, false, usize::MAX)).collect()).collect();
    let mut cones = 0usize;
    let mut spans = 0usize;
    let mut failures = Vec::new();
    for (ai, a) in flows.iter().enumerate().filter(|(_, f)| f.state_count() <= 2) {
        for (bi, b) in flows.iter().enumerate() {
            for (ci, c) in flows.iter().enumerate().skip(bi) {
                for f in &hom[ai][bi] {
                    for g in &hom[ai][ci] {
                        let Ok((p, ib, ic)) = pushout(a, b, c, f, g, DEFAULT_BUDGET) else { continue };
                        spans += 1;
                        for (ti, t) in flows.iter().enumerate() {
                            let mediating = find_morphisms(&p, t, false, usize::MAX);
                            for hb in &hom[bi][ti] {
                                for hc in hom[ci][ti].iter().filter(|hc| f.then(hb) == g.then(hc)) {
                                    cones += 1;
                                    let count = mediating.iter().filter(|m| ib.then(m) == *hb && ic.then(m) == *hc).count();
                                    if count != 1 {
                                        failures.push(format!("{count} mediating maps into {:?}", level_profile(t)));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    verdict(
        failures.is_empty() && cones > 0,
        format!("{} flows, {spans} spans, {cones} cones, {} failures {:?}", flows.len(), failures.len(), failures.first()),
    )
}

fn homology_engine() -> Verdict {
    let mut r = rng(8);
    let mut bad = 0;
    for _ in 0..1000 {
        let (m, n) = (r.gen_range(1..=8), r.gen_range(1..=8));
        let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| r.gen_range(-9..=9)).collect()).collect();
        let mat = IntMatrix::from_rows(&rows);
        if !smith_normal_form(&mat, true).verify(&mat) {
            bad += 1;
        }
    }
    let circle = homology_profile(&FinSimplicialSet::circle(CAP));
    let rp2 = homology_profile(&FinSimplicialSet::projective_plane(CAP));
    let circle_ok = circle[0] == HomologyGroup::free(1) && circle[1] == HomologyGroup::free(1);
    let rp2_ok = rp2[1] == HomologyGroup { betti: 0, torsion: vec!["2".into()] };
    verdict(
        bad == 0 && circle_ok && rp2_ok,
        format!("1000 certificates, {bad} failed; circle H0={} H1={}; projective plane H1={}", circle[0], circle[1], rp2[1]),
    )
}

fn lemma_probe() -> Verdict {
    let (code, doc, text) = json_doc(&["lemma-probe", &data("fig1.poset")]);
    let round_trip = doc.to_json() == text;
    let Some(Body::LemmaProbe(r)) = &doc.result else {
        return verdict(false, "no probe report");
    };
    let witnesses = r.joins.iter().all(|j| j.isomorphic == j.witness.is_some())
        && r.joins_isomorphic == r.joins.iter().filter(|j| j.isomorphic).count()
        && r.latching.isomorphic == r.latching.differences.is_empty();
    let pass = code == 0 && doc.status == Status::Pass && r.consistent && witnesses && round_trip && r.joins.len() == 5;
    verdict(
        pass,
        format!(
            "{} of {} joins isomorphic, latching isomorphic: {}, consistent: {}",
            r.joins_isomorphic,
            r.joins.len(),
            r.latching.isomorphic,
            r.consistent
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict, Duration);
    let criteria: [Criterion; 9] = [
        ("1 figure-1 exterior category", figure_one, Duration::from_secs(1)),
        ("2 direct-category degrees", reedy, Duration::from_secs(30)),
        ("3 branching class at the bottom", resultat1, Duration::from_secs(60)),
        ("4 subdivision invariance", invariance, Duration::from_secs(300)),
        ("5 interval tensor identities", tensor_identities, Duration::from_secs(60)),
        ("6 sequential colimits", sequential, Duration::from_secs(30)),
        ("7 pushout universal property", pushout_universal, Duration::from_secs(30)),
        ("8 homology engine", homology_engine, Duration::from_secs(30)),
        ("9 lemma probe report", lemma_probe, Duration::from_secs(60)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
