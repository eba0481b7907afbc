//! Seeded generators for posets, presentations and subdivision triples,
//! exhaustive enumeration of small bounded posets, and counterexample files.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dihomotopy::{check_invariance, t_subdivide, InvarianceReport};
use crate::error::Result;
use crate::flow::CombFlow;
use crate::poset::FinPoset;
use crate::presentation::{FlowPresentation, Saturated, Word};
use crate::simpset::FinSimplicialSet;

pub use rand::SeedableRng;
pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn interior_names(m: usize) -> Vec<String> {
    (0..m).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

/// Bounded poset from strict relations among `m` interior elements.
fn bounded(m: usize, less: &[(usize, usize)]) -> FinPoset {
    let mut names = vec!["0".to_string()];
    names.extend(interior_names(m));
    names.push("1".into());
    let top = m + 1;
    let mut rel: Vec<(usize, usize)> = less.iter().map(|&(a, b)| (a + 1, b + 1)).collect();
    for i in 1..=m {
        rel.push((0, i));
        rel.push((i, top));
    }
    rel.push((0, top));
    FinPoset::new(names, &rel).expect("relations follow index order")
}

/// A random bounded poset with between 2 and `max_elements` elements. Each
/// pair of interior elements is related with probability `density`, always
/// in index order, so the relation is acyclic.
pub fn random_bounded_poset(rng: &mut impl Rng, max_elements: usize, density: f64) -> FinPoset {
    let m = rng.gen_range(0..=max_elements.saturating_sub(2));
    let mut less = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            if rng.gen_bool(density) {
                less.push((a, b));
            }
        }
    }
    let p = bounded(m, &less);
    let mut perm: Vec<usize> = (1..=m).collect();
    perm.shuffle(rng);
    let mut full = vec![0];
    full.extend(perm);
    full.push(m + 1);
    p.permuted(&full)
}

/// All bounded posets with at most `max_elements` elements, one per
/// isomorphism class.
pub fn bounded_posets_up_to_iso(max_elements: usize) -> Vec<FinPoset> {
    let mut out = Vec::new();
    for m in 0..=max_elements.saturating_sub(2) {
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
        let perms = permutations(m);
        let mut seen = BTreeSet::new();
        for mask in 0u32..(1 << pairs.len()) {
            let less: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
            let mut leq = vec![vec![false; m]; m];
            for &(a, b) in &less {
                leq[a][b] = true;
            }
            for k in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        if leq[a][k] && leq[k][b] {
                            leq[a][b] = true;
                        }
                    }
                }
            }
            if less.iter().any(|&(a, b)| less.iter().any(|&(c, d)| c == a && leq[d][b] && d != b)) {
                // not the set of covering relations of its closure
                continue;
            }
            let canon = perms
                .iter()
                .map(|p| {
                    (0..m)
                        .flat_map(|a| (0..m).map(move |b| (a, b)))
                        .map(|(a, b)| leq[p[a]][p[b]])
                        .collect::<Vec<bool>>()
                })
                .min()
                .unwrap_or_default();
            if seen.insert(canon) {
                out.push(bounded(m, &less));
            }
        }
    }
    out
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    heap(m, &mut cur, &mut out);
    out
}

fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k - 1 {
        heap(k - 1, a, out);
        if k.is_multiple_of(2) {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
    heap(k - 1, a, out);
}

/// A small path space for a random generator: usually a point, sometimes
/// two points or an interval.
fn random_space(rng: &mut impl Rng, name: &str, cap: usize) -> FinSimplicialSet {
    match rng.gen_range(0..10) {
        0 => FinSimplicialSet::discrete(&[&format!("{name}p"), &format!("{name}q")], cap),
        1 => FinSimplicialSet::standard_simplex(1, cap),
        _ => FinSimplicialSet::discrete(&[name], cap),
    }
}

/// A random loopless presentation on `2..=max_states` states. Generators go
/// from lower to higher index; at most `max_generators` of them.
pub fn random_presentation(rng: &mut impl Rng, max_states: usize, max_generators: usize, cap: usize) -> FlowPresentation {
    let n = rng.gen_range(2..=max_states.max(2));
    let states = (0..n).map(|i| format!("s{i}")).collect();
    let mut p = FlowPresentation::new(cap, states);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let count = rng.gen_range(1..=max_generators.max(1).min(pairs.len()));
    let mut chosen: Vec<(usize, usize)> = pairs[..count].to_vec();
    chosen.sort();
    for (i, &(a, b)) in chosen.iter().enumerate() {
        let name = format!("e{i}");
        let space = random_space(rng, &name, cap);
        p.add_generator(name, a, b, space).expect("states exist");
    }
    // occasionally identify a composite with a parallel generator
    if rng.gen_bool(0.3) {
        let comps: Vec<(usize, usize, usize)> = (0..p.generators.len())
            .flat_map(|g| (0..p.generators.len()).map(move |h| (g, h)))
            .filter(|&(g, h)| p.generators[g].target == p.generators[h].source)
            .flat_map(|(g, h)| (0..p.generators.len()).map(move |k| (g, h, k)))
            .filter(|&(g, h, k)| p.generators[k].source == p.generators[g].source && p.generators[k].target == p.generators[h].target)
            .collect();
        if let Some(&(g, h, k)) = comps.choose(rng) {
            p.add_relation(Word::new(0, vec![(g, 0), (h, 0)]), Word::letter(0, k, 0)).expect("composable");
        }
    }
    p
}

/// An `(X, edge, D)` instance for the subdivision check.
#[derive(Debug, Clone)]
pub struct Triple {
    pub presentation: FlowPresentation,
    pub flow: CombFlow,
    /// `(source, target, vertex)` in `flow`.
    pub edge: (usize, usize, usize),
    pub ball_poset: FinPoset,
    pub ball: CombFlow,
}

pub fn random_triple(rng: &mut impl Rng, max_states: usize, max_ball: usize, cap: usize, budget: usize) -> Result<Triple> {
    loop {
        let presentation = random_presentation(rng, max_states, max_states + 2, cap);
        let flow = presentation.saturate(budget)?.flow;
        let pairs: Vec<(usize, usize)> = flow.pairs().collect();
        let Some(&(a, b)) = pairs.choose(rng) else { continue };
        let v = rng.gen_range(0..flow.path(a, b).unwrap().len(0));
        let ball_poset = random_bounded_poset(rng, max_ball, 0.5);
        let ball = CombFlow::from_poset(&ball_poset, cap);
        return Ok(Triple { presentation, flow, edge: (a, b, v), ball_poset, ball });
    }
}

/// A chain of presentations, each extending the previous by states,
/// generators and relations that mention at least one new generator on each
/// side, so the induced maps are inclusions.
pub fn random_inclusion_chain(rng: &mut impl Rng, max_len: usize, cap: usize) -> Vec<FlowPresentation> {
    let len = rng.gen_range(1..=max_len.max(1));
    let total = rng.gen_range(2..=6);
    let states: Vec<String> = (0..total).map(|i| format!("s{i}")).collect();
    let mut visible = rng.gen_range(2..=total);
    let mut cur = FlowPresentation::new(cap, states[..visible].to_vec());
    let mut out = Vec::new();
    for step in 0..len {
        if step > 0 && visible < total && rng.gen_bool(0.5) {
            visible += 1;
            cur.states.push(states[visible - 1].clone());
        }
        let before = cur.generators.len();
        for _ in 0..rng.gen_range(0..=2) {
            let a = rng.gen_range(0..visible - 1);
            let b = rng.gen_range(a + 1..visible);
            let name = format!("g{}", cur.generators.len());
            let space = random_space(rng, &name, cap);
            cur.add_generator(name, a, b, space).expect("states exist");
        }
        let new: Vec<usize> = (before..cur.generators.len()).collect();
        if new.len() == 2 {
            let (g, h) = (&cur.generators[new[0]], &cur.generators[new[1]]);
            if g.source == h.source && g.target == h.target && rng.gen_bool(0.5) {
                cur.add_relation(Word::letter(0, new[0], 0), Word::letter(0, new[1], 0)).expect("parallel");
            }
        }
        out.push(cur.clone());
    }
    out
}

/// The maps between consecutive saturations of an extending chain.
pub fn chain_links(sats: &[Saturated]) -> Result<Vec<crate::flow::FlowMorphism>> {
    sats.windows(2)
        .map(|w| {
            let states: Vec<usize> = (0..w[0].flow.state_count()).collect();
            w[0].induced(&w[1].flow, &states, |g, n, k| w[1].embedding[g].levels[n][k] as usize)
        })
        .collect()
}

/// Writes a failing instance as input files that the command line accepts.
pub fn persist_counterexample(dir: &Path, label: &str, t: &Triple, detail: &str) -> std::io::Result<PathBuf> {
    let base = dir.join(label);
    fs::create_dir_all(&base)?;
    let flow_text = t.presentation.to_text("x").unwrap_or_else(|e| format!("# not expressible: {e}\n"));
    fs::write(base.join("x.flow"), flow_text)?;
    fs::write(base.join("ball.poset"), t.ball_poset.to_text("ball"))?;
    let (a, b, v) = t.edge;
    let edge = format!(
        "edge {} {} vertex {}\n{}\n",
        t.flow.state_name(a),
        t.flow.state_name(b),
        t.flow.path(a, b).map_or("?", |s| s.name(0, v)),
        detail
    );
    fs::write(base.join("edge.txt"), edge)?;
    Ok(base)
}

/// One case of the randomized subdivision suite.
#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub label: String,
    /// `Err` carries the message of a computation error.
    pub outcome: std::result::Result<InvarianceReport, String>,
}

impl SuiteCase {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.pass)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOutcome {
    pub cases: Vec<SuiteCase>,
    pub counterexamples: Vec<PathBuf>,
}

/// Subdivides `count` random triples and checks invariance of both
/// profiles. Failing instances are written under `dir` when given.
pub fn invariance_suite(seed: u64, count: usize, cap: usize, budget: usize, dir: Option<&Path>) -> SuiteOutcome {
    let mut r = rng(seed);
    let mut out = SuiteOutcome::default();
    for i in 0..count {
        let label = format!("seed{seed}-case{i}");
        let triple = match random_triple(&mut r, 8, 6, cap, budget) {
            Ok(t) => t,
            Err(e) => {
                out.cases.push(SuiteCase { label, outcome: Err(e.to_string()) });
                continue;
            }
        };
        let outcome = t_subdivide(&triple.flow, triple.edge, &triple.ball, budget)
            .and_then(|s| check_invariance(&triple.flow, &s.flow, &s.map))
            .map_err(|e| e.to_string());
        let case = SuiteCase { label, outcome };
        if !case.passed() {
            if let Some(d) = dir {
                let detail = match &case.outcome {
                    Ok(rep) => rep.failures.join("\n"),
                    Err(e) => e.clone(),
                };
                if let Ok(p) = persist_counterexample(d, &case.label, &triple, &detail) {
                    out.counterexamples.push(p);
                }
            }
        }
        out.cases.push(case);
    }
    out
}
