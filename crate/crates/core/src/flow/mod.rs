//! Finite flows: a state set, a simplicial path space for each ordered pair
//! of states, and an associative levelwise composition.

mod ball;
mod iso;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::is_homology_contractible;
use crate::poset::FinPoset;
use crate::simpset::{FinSimplicialSet, SimplicialMap};

pub use ball::{ball_diagram, join, join_chain, BallDiagram};
pub use iso::{find_isomorphism, find_morphisms, is_isomorphic};

/// Ordered pair of state indices `(source, target)`.
pub type Pair = (usize, usize);

/// Composition tables per level; entry `i * len(right) + j` is `x_i * y_j`.
pub type ComposeTable = Vec<Vec<u32>>;

/// A finite flow. Only nonempty path spaces are stored.
#[derive(Debug, Clone)]
pub struct CombFlow {
    cap: usize,
    states: Vec<String>,
    paths: BTreeMap<Pair, FinSimplicialSet>,
    compose: HashMap<(usize, usize, usize), ComposeTable>,
}

impl CombFlow {
    /// Builds a flow and checks that every composition is simplicial and
    /// associative.
    pub fn new(
        cap: usize,
        states: Vec<String>,
        paths: BTreeMap<Pair, FinSimplicialSet>,
        compose: HashMap<(usize, usize, usize), ComposeTable>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::MalformedFlow(format!("state {s} is declared twice")));
            }
        }
        let paths: BTreeMap<Pair, FinSimplicialSet> =
            paths.into_iter().filter(|(_, s)| !s.is_empty()).collect();
        for (&(a, b), s) in &paths {
            if a >= states.len() || b >= states.len() {
                return Err(Error::MalformedFlow(format!("path space ({a},{b}) has no states")));
            }
            if s.cap() != cap {
                return Err(Error::CapMismatch(cap, s.cap()));
            }
        }
        let flow = CombFlow { cap, states, paths, compose };
        for (a, b, c) in flow.triples() {
            let Some(t) = flow.compose.get(&(a, b, c)) else {
                return Err(Error::MalformedFlow(format!(
                    "missing composition {} -> {} -> {}",
                    flow.states[a], flow.states[b], flow.states[c]
                )));
            };
            if !flow.paths.contains_key(&(a, c)) {
                return Err(Error::MalformedFlow(format!(
                    "composites {} -> {} have no path space",
                    flow.states[a], flow.states[c]
                )));
            }
            let (l, r, o) = (&flow.paths[&(a, b)], &flow.paths[&(b, c)], &flow.paths[&(a, c)]);
            for n in 0..=cap {
                if t.get(n).map(Vec::len) != Some(l.len(n) * r.len(n))
                    || t[n].iter().any(|&z| z as usize >= o.len(n))
                {
                    return Err(Error::MalformedFlow(format!("composition table {a},{b},{c} is malformed")));
                }
            }
        }
        flow.check()?;
        Ok(flow)
    }

    pub(crate) fn from_parts(
        cap: usize,
        states: Vec<String>,
        paths: BTreeMap<Pair, FinSimplicialSet>,
        compose: HashMap<(usize, usize, usize), ComposeTable>,
    ) -> Self {
        CombFlow { cap, states, paths, compose }
    }

    /// Checks that compositions commute with faces and degeneracies and are
    /// associative.
    pub fn check(&self) -> Result<()> {
        let cap = self.cap;
        for (a, b, c) in self.triples() {
            let (l, r, o) = (&self.paths[&(a, b)], &self.paths[&(b, c)], &self.paths[&(a, c)]);
            for n in 0..=cap {
                for x in 0..l.len(n) {
                    for y in 0..r.len(n) {
                        let z = self.compose(a, b, c, n, x, y);
                        for i in 0..=n {
                            if n > 0 {
                                let fz = self.compose(a, b, c, n - 1, l.face(n, i, x), r.face(n, i, y));
                                if o.face(n, i, z) != fz {
                                    return Err(self.malformed(a, b, c, n, &format!("d{i}")));
                                }
                            }
                            if n < cap {
                                let sz = self.compose(a, b, c, n + 1, l.degen(n, i, x), r.degen(n, i, y));
                                if o.degen(n, i, z) != sz {
                                    return Err(self.malformed(a, b, c, n, &format!("s{i}")));
                                }
                            }
                        }
                    }
                }
            }
        }
        for (a, b, c) in self.triples() {
            for d in self.successors(c).collect::<Vec<_>>() {
                let (p, q, r) = (&self.paths[&(a, b)], &self.paths[&(b, c)], &self.paths[&(c, d)]);
                for n in 0..=cap {
                    for x in 0..p.len(n) {
                        for y in 0..q.len(n) {
                            let xy = self.compose(a, b, c, n, x, y);
                            for z in 0..r.len(n) {
                                let left = self.compose(a, c, d, n, xy, z);
                                let right = self.compose(a, b, d, n, x, self.compose(b, c, d, n, y, z));
                                if left != right {
                                    return Err(Error::MalformedFlow(format!(
                                        "composition is not associative on {} -> {} -> {} -> {} at level {n}",
                                        self.states[a], self.states[b], self.states[c], self.states[d]
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn malformed(&self, a: usize, b: usize, c: usize, n: usize, op: &str) -> Error {
        Error::MalformedFlow(format!(
            "composition {} -> {} -> {} does not commute with {op} at level {n}",
            self.states[a], self.states[b], self.states[c]
        ))
    }

    /// `Glob(Z)`: states `0` and `1`, path space `Z` from `0` to `1`.
    pub fn glob(z: FinSimplicialSet) -> Self {
        let mut paths = BTreeMap::new();
        let cap = z.cap();
        if !z.is_empty() {
            paths.insert((0, 1), z);
        }
        CombFlow::from_parts(cap, vec!["0".into(), "1".into()], paths, HashMap::new())
    }

    /// The directed segment `Glob(pt)`.
    pub fn segment(cap: usize) -> Self {
        CombFlow::glob(FinSimplicialSet::point(cap))
    }

    /// A flow with the given states and no paths.
    pub fn discrete(states: &[&str], cap: usize) -> Self {
        CombFlow::from_parts(cap, states.iter().map(|s| s.to_string()).collect(), BTreeMap::new(), HashMap::new())
    }

    /// The state set of `self` as a flow without paths.
    pub fn skeleton(&self) -> Self {
        CombFlow::from_parts(self.cap, self.states.clone(), BTreeMap::new(), HashMap::new())
    }

    /// The terminal flow: one state with a single looping path.
    pub fn terminal(cap: usize) -> Self {
        let mut paths = BTreeMap::new();
        paths.insert((0, 0), FinSimplicialSet::point(cap));
        let mut compose = HashMap::new();
        compose.insert((0, 0, 0), vec![vec![0]; cap + 1]);
        CombFlow::from_parts(cap, vec!["*".into()], paths, compose)
    }

    /// `F(P)`: one path `u(a,b)` for each `a < b`.
    pub fn from_poset(p: &FinPoset, cap: usize) -> Self {
        let n = p.len();
        let mut paths = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                if p.lt(a, b) {
                    let name = format!("u({},{})", p.name(a), p.name(b));
                    paths.insert((a, b), FinSimplicialSet::discrete(&[&name], cap));
                }
            }
        }
        let mut compose = HashMap::new();
        for &(a, b) in paths.keys() {
            for c in 0..n {
                if p.lt(b, c) {
                    compose.insert((a, b, c), vec![vec![0]; cap + 1]);
                }
            }
        }
        CombFlow::from_parts(cap, p.names().to_vec(), paths, compose)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, i: usize) -> &str {
        &self.states[i]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn require_state(&self, name: &str) -> Result<usize> {
        self.state_index(name).ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn path(&self, a: usize, b: usize) -> Option<&FinSimplicialSet> {
        self.paths.get(&(a, b))
    }

    pub fn paths(&self) -> impl Iterator<Item = (Pair, &FinSimplicialSet)> + '_ {
        self.paths.iter().map(|(&p, s)| (p, s))
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.paths.keys().copied()
    }

    pub fn successors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.paths.range((a, 0)..(a + 1, 0)).map(|(&(_, b), _)| b)
    }

    pub fn predecessors(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        self.paths.keys().filter(move |&&(_, t)| t == b).map(|&(a, _)| a)
    }

    /// All `(a, b, c)` with nonempty `P(a,b)` and `P(b,c)`.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (a, b) in self.pairs() {
            for c in self.successors(b) {
                out.push((a, b, c));
            }
        }
        out
    }

    /// `x * y` for `x ∈ P(a,b)`, `y ∈ P(b,c)` at level `n`.
    pub fn compose(&self, a: usize, b: usize, c: usize, n: usize, x: usize, y: usize) -> usize {
        let width = self.paths[&(b, c)].len(n);
        self.compose[&(a, b, c)][n][x * width + y] as usize
    }

    /// Total number of path simplices at level `n`.
    pub fn path_simplices(&self, n: usize) -> usize {
        self.paths.values().map(|s| s.len(n)).sum()
    }

    pub fn is_loopless(&self) -> bool {
        self.paths.keys().all(|&(a, b)| a != b)
    }

    /// States with no incoming path.
    pub fn initial_states(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&s| self.predecessors(s).next().is_none()).collect()
    }

    /// States with no outgoing path.
    pub fn final_states(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&s| self.successors(s).next().is_none()).collect()
    }

    /// The order on states induced by the existence of paths.
    pub fn state_poset(&self) -> Result<FinPoset> {
        let loops: Vec<String> =
            self.paths.keys().filter(|(a, b)| a == b).map(|&(a, _)| self.states[a].clone()).collect();
        if !loops.is_empty() {
            return Err(Error::NotLoopless(loops));
        }
        let less: Vec<Pair> = self.pairs().collect();
        FinPoset::new(self.states.clone(), &less)
            .map_err(|e| match e {
                Error::PartialOrderViolation(c) => Error::NotLoopless(c),
                e => e,
            })
    }

    pub fn validate(&self) -> Result<FlowReport> {
        self.check()?;
        let names = |v: Vec<usize>| v.into_iter().map(|s| self.states[s].clone()).collect();
        Ok(FlowReport {
            states: self.states.clone(),
            loopless: self.is_loopless(),
            loops: self.paths.keys().filter(|(a, b)| a == b).map(|&(a, _)| self.states[a].clone()).collect(),
            state_order: self
                .pairs()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (self.states[a].clone(), self.states[b].clone()))
                .collect(),
            initial_states: names(self.initial_states()),
            final_states: names(self.final_states()),
        })
    }

    /// Checks the conditions of a full directed ball, with weak
    /// contractibility of path spaces replaced by homology contractibility.
    pub fn ball_report(&self) -> BallReport {
        let initial = self.initial_states();
        let fin = self.final_states();
        let unique_endpoints = initial.len() == 1 && fin.len() == 1 && initial[0] != fin[0];
        let outside: Vec<String> = if unique_endpoints {
            let (lo, hi) = (initial[0], fin[0]);
            (0..self.states.len())
                .filter(|&s| {
                    let above = s == lo || self.paths.contains_key(&(lo, s));
                    let below = s == hi || self.paths.contains_key(&(s, hi));
                    !(above && below)
                })
                .map(|s| self.states[s].clone())
                .collect()
        } else {
            Vec::new()
        };
        let non_contractible: Vec<(String, String)> = self
            .paths
            .iter()
            .filter(|(_, s)| !is_homology_contractible(s).unwrap_or(true))
            .map(|(&(a, b), _)| (self.states[a].clone(), self.states[b].clone()))
            .collect();
        let loopless = self.is_loopless();
        let names = |v: &[usize]| v.iter().map(|&s| self.states[s].clone()).collect();
        BallReport {
            finite: true,
            initial_states: names(&initial),
            final_states: names(&fin),
            unique_endpoints,
            all_between: unique_endpoints && outside.is_empty(),
            is_ball: unique_endpoints && loopless && outside.is_empty() && non_contractible.is_empty(),
            outside,
            loopless,
            non_contractible,
            contractibility: CONTRACTIBILITY_NOTE.to_string(),
        }
    }

    /// Bottom and top states if `self` is a full directed ball.
    pub fn require_ball(&self) -> Result<(usize, usize)> {
        let r = self.ball_report();
        if !r.is_ball {
            return Err(Error::NotABall(r.failure()));
        }
        Ok((self.initial_states()[0], self.final_states()[0]))
    }

    /// `X↾A`: the full subflow on the named states, with its inclusion.
    pub fn restriction(&self, names: &[&str]) -> Result<(CombFlow, FlowMorphism)> {
        let mut keep = Vec::with_capacity(names.len());
        for n in names {
            keep.push(self.require_state(n)?);
        }
        Ok(self.restrict_to(&keep))
    }

    /// Restriction to a set of state indices; states keep their order in `self`.
    pub fn restrict_to(&self, keep: &[usize]) -> (CombFlow, FlowMorphism) {
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut paths = BTreeMap::new();
        let mut maps = BTreeMap::new();
        for (&(a, b), s) in &self.paths {
            if let (Some(&i), Some(&j)) = (pos.get(&a), pos.get(&b)) {
                paths.insert((i, j), s.clone());
                maps.insert((i, j), SimplicialMap::identity(s));
            }
        }
        let mut compose = HashMap::new();
        for (&(a, b, c), t) in &self.compose {
            if let (Some(&i), Some(&j), Some(&k)) = (pos.get(&a), pos.get(&b), pos.get(&c)) {
                compose.insert((i, j, k), t.clone());
            }
        }
        let states = keep.iter().map(|&s| self.states[s].clone()).collect();
        let flow = CombFlow::from_parts(self.cap, states, paths, compose);
        (flow, FlowMorphism { states: keep, paths: maps })
    }

    /// Restriction to the closed interval `[a, b]` of the state order.
    pub fn interval(&self, a: usize, b: usize) -> CombFlow {
        let inside: Vec<usize> = (0..self.states.len())
            .filter(|&s| {
                (s == a || self.paths.contains_key(&(a, s))) && (s == b || self.paths.contains_key(&(s, b)))
            })
            .collect();
        self.restrict_to(&inside).0
    }

    /// Coproduct: states and path spaces side by side. State names are
    /// made unique with primes.
    pub fn coproduct(parts: &[&CombFlow]) -> Result<CombFlow> {
        let cap = parts.first().map_or(crate::simpset::DEFAULT_CAP, |p| p.cap);
        if let Some(p) = parts.iter().find(|p| p.cap != cap) {
            return Err(Error::CapMismatch(cap, p.cap));
        }
        let mut states = Vec::new();
        let mut paths = BTreeMap::new();
        let mut compose = HashMap::new();
        for p in parts {
            let off = states.len();
            states.extend(p.states.iter().cloned());
            for (&(a, b), s) in &p.paths {
                paths.insert((a + off, b + off), s.clone());
            }
            for (&(a, b, c), t) in &p.compose {
                compose.insert((a + off, b + off, c + off), t.clone());
            }
        }
        Ok(CombFlow::from_parts(cap, unique_names(states), paths, compose))
    }

    /// Renames states: state `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> CombFlow {
        let mut states = vec![String::new(); self.states.len()];
        for (i, s) in self.states.iter().enumerate() {
            states[perm[i]] = s.clone();
        }
        let paths = self.paths.iter().map(|(&(a, b), s)| ((perm[a], perm[b]), s.clone())).collect();
        let compose =
            self.compose.iter().map(|(&(a, b, c), t)| ((perm[a], perm[b], perm[c]), t.clone())).collect();
        CombFlow::from_parts(self.cap, states, paths, compose)
    }

    /// Vertices of `P(a,b)` as names, for reports.
    pub fn vertex_names(&self, a: usize, b: usize) -> Vec<String> {
        self.path(a, b)
            .map(|s| (0..s.len(0)).map(|k| s.name(0, k).to_string()).collect())
            .unwrap_or_default()
    }
}

/// Appends primes to repeated names so that all names are distinct.
pub(crate) fn unique_names(names: Vec<String>) -> Vec<String> {
    let mut used: BTreeSet<String> = BTreeSet::new();
    names
        .into_iter()
        .map(|mut n| {
            while used.contains(&n) {
                n.push('\'');
            }
            used.insert(n.clone());
            n
        })
        .collect()
}

pub const CONTRACTIBILITY_NOTE: &str =
    "contractibility is tested on integer homology below the truncation cap, which is weaker than weak contractibility";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowReport {
    pub states: Vec<String>,
    pub loopless: bool,
    pub loops: Vec<String>,
    pub state_order: Vec<(String, String)>,
    pub initial_states: Vec<String>,
    pub final_states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallReport {
    pub finite: bool,
    pub initial_states: Vec<String>,
    pub final_states: Vec<String>,
    pub unique_endpoints: bool,
    pub all_between: bool,
    pub outside: Vec<String>,
    pub loopless: bool,
    pub non_contractible: Vec<(String, String)>,
    pub is_ball: bool,
    pub contractibility: String,
}

impl BallReport {
    /// One line naming the first failed condition.
    pub fn failure(&self) -> String {
        if !self.unique_endpoints {
            format!(
                "needs exactly one initial and one distinct final state (initial {:?}, final {:?})",
                self.initial_states, self.final_states
            )
        } else if !self.loopless {
            "flow has loops".into()
        } else if !self.outside.is_empty() {
            format!("states {:?} are not between the initial and final state", self.outside)
        } else if !self.non_contractible.is_empty() {
            format!("path spaces {:?} are not homology contractible", self.non_contractible)
        } else {
            "ok".into()
        }
    }
}

/// A morphism of flows: a state map and, for each source pair, a simplicial
/// map into the path space of the image pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowMorphism {
    pub states: Vec<usize>,
    pub paths: BTreeMap<Pair, SimplicialMap>,
}

impl FlowMorphism {
    pub fn identity(x: &CombFlow) -> Self {
        FlowMorphism {
            states: (0..x.state_count()).collect(),
            paths: x.paths.iter().map(|(&p, s)| (p, SimplicialMap::identity(s))).collect(),
        }
    }

    /// The unique morphism into the terminal flow.
    pub fn to_terminal(x: &CombFlow) -> Self {
        FlowMorphism {
            states: vec![0; x.state_count()],
            paths: x
                .paths
                .iter()
                .map(|(&p, s)| (p, SimplicialMap { levels: (0..=s.cap()).map(|n| vec![0; s.len(n)]).collect() }))
                .collect(),
        }
    }

    pub fn apply(&self, pair: Pair, n: usize, k: usize) -> usize {
        self.paths[&pair].apply(n, k)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &FlowMorphism) -> FlowMorphism {
        FlowMorphism {
            states: self.states.iter().map(|&s| other.states[s]).collect(),
            paths: self
                .paths
                .iter()
                .map(|(&(a, b), m)| ((a, b), m.then(&other.paths[&(self.states[a], self.states[b])])))
                .collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.states.iter().all(|s| seen.insert(*s)) && self.paths.values().all(SimplicialMap::is_injective)
    }

    pub fn check(&self, src: &CombFlow, dst: &CombFlow) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedMorphism(m));
        if self.states.len() != src.state_count() || self.states.iter().any(|&s| s >= dst.state_count()) {
            return bad("state map has the wrong shape".into());
        }
        if self.paths.len() != src.paths.len() {
            return bad("one path map per nonempty path space is required".into());
        }
        for (&(a, b), s) in &src.paths {
            let (fa, fb) = (self.states[a], self.states[b]);
            let Some(m) = self.paths.get(&(a, b)) else {
                return bad(format!("no map on P({},{})", src.states[a], src.states[b]));
            };
            let Some(t) = dst.path(fa, fb) else {
                return bad(format!(
                    "P({},{}) is nonempty but P({},{}) is empty",
                    src.states[a], src.states[b], dst.states[fa], dst.states[fb]
                ));
            };
            m.check(s, t).map_err(|e| {
                Error::MalformedMorphism(format!("on P({},{}): {e}", src.states[a], src.states[b]))
            })?;
        }
        for (a, b, c) in src.triples() {
            let (l, r) = (&src.paths[&(a, b)], &src.paths[&(b, c)]);
            let (fa, fb, fc) = (self.states[a], self.states[b], self.states[c]);
            for n in 0..=src.cap {
                for x in 0..l.len(n) {
                    for y in 0..r.len(n) {
                        let lhs = self.apply((a, c), n, src.compose(a, b, c, n, x, y));
                        let rhs = dst.compose(fa, fb, fc, n, self.apply((a, b), n, x), self.apply((b, c), n, y));
                        if lhs != rhs {
                            return bad(format!(
                                "composition {} -> {} -> {} is not preserved at level {n}",
                                src.states[a], src.states[b], src.states[c]
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A pullback square `X ×_W Z` with its projections.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub flow: CombFlow,
    pub left: FlowMorphism,
    pub right: FlowMorphism,
}

/// Pullback of `f: X → W` and `g: Z → W`, computed levelwise.
pub fn pullback(x: &CombFlow, f: &FlowMorphism, z: &CombFlow, g: &FlowMorphism, w: &CombFlow) -> Result<Pullback> {
    f.check(x, w)?;
    g.check(z, w)?;
    if x.cap != z.cap {
        return Err(Error::CapMismatch(x.cap, z.cap));
    }
    let cap = x.cap;
    let mut pairs_of_states = Vec::new();
    for a in 0..x.state_count() {
        for b in 0..z.state_count() {
            if f.states[a] == g.states[b] {
                pairs_of_states.push((a, b));
            }
        }
    }
    let states: Vec<String> =
        pairs_of_states.iter().map(|&(a, b)| format!("({},{})", x.states[a], z.states[b])).collect();
    let mut paths = BTreeMap::new();
    let mut left_maps = BTreeMap::new();
    let mut right_maps = BTreeMap::new();
    // level-n simplex index -> (x simplex, z simplex), per new pair
    let mut members: HashMap<Pair, Vec<Vec<(usize, usize)>>> = HashMap::new();
    for (i, &(a, b)) in pairs_of_states.iter().enumerate() {
        for (j, &(a2, b2)) in pairs_of_states.iter().enumerate() {
            let (Some(sx), Some(sz)) = (x.path(a, a2), z.path(b, b2)) else {
                continue;
            };
            let (fm, gm) = (&f.paths[&(a, a2)], &g.paths[&(b, b2)]);
            let lists: Vec<Vec<(usize, usize)>> = (0..=cap)
                .map(|n| {
                    let mut v = Vec::new();
                    for p in 0..sx.len(n) {
                        for q in 0..sz.len(n) {
                            if fm.apply(n, p) == gm.apply(n, q) {
                                v.push((p, q));
                            }
                        }
                    }
                    v
                })
                .collect();
            if lists[0].is_empty() {
                continue;
            }
            let index: Vec<HashMap<(usize, usize), u32>> = lists
                .iter()
                .map(|l| l.iter().enumerate().map(|(k, &pq)| (pq, k as u32)).collect())
                .collect();
            let mut raw = Vec::with_capacity(cap + 1);
            for n in 0..=cap {
                let mut faces = Vec::new();
                let mut degens = Vec::new();
                let mut names = Vec::new();
                for &(p, q) in &lists[n] {
                    names.push(format!("({},{})", sx.name(n, p), sz.name(n, q)));
                    if n > 0 {
                        for d in 0..=n {
                            faces.push(index[n - 1][&(sx.face(n, d, p), sz.face(n, d, q))]);
                        }
                    }
                    if n < cap {
                        for d in 0..=n {
                            degens.push(index[n + 1][&(sx.degen(n, d, p), sz.degen(n, d, q))]);
                        }
                    }
                }
                raw.push((faces, degens, names));
            }
            paths.insert((i, j), FinSimplicialSet::from_raw(cap, raw));
            let proj = |pick: fn(&(usize, usize)) -> usize| SimplicialMap {
                levels: lists.iter().map(|l| l.iter().map(|pq| pick(pq) as u32).collect()).collect(),
            };
            left_maps.insert((i, j), proj(|pq| pq.0));
            right_maps.insert((i, j), proj(|pq| pq.1));
            members.insert((i, j), lists);
        }
    }
    let mut compose = HashMap::new();
    let keys: Vec<Pair> = paths.keys().copied().collect();
    for &(i, j) in &keys {
        for &(j2, k) in &keys {
            if j2 != j {
                continue;
            }
            let (a, b) = pairs_of_states[i];
            let (a2, b2) = pairs_of_states[j];
            let (a3, b3) = pairs_of_states[k];
            let target = &members[&(i, k)];
            let table: ComposeTable = (0..=cap)
                .map(|n| {
                    let lookup: HashMap<(usize, usize), u32> =
                        target[n].iter().enumerate().map(|(t, &pq)| (pq, t as u32)).collect();
                    let mut row = Vec::new();
                    for &(p, q) in &members[&(i, j)][n] {
                        for &(p2, q2) in &members[&(j, k)][n] {
                            let xp = x.compose(a, a2, a3, n, p, p2);
                            let zq = z.compose(b, b2, b3, n, q, q2);
                            row.push(lookup[&(xp, zq)]);
                        }
                    }
                    row
                })
                .collect();
            compose.insert((i, j, k), table);
        }
    }
    let flow = CombFlow::from_parts(cap, unique_names(states), paths, compose);
    let left = FlowMorphism { states: pairs_of_states.iter().map(|p| p.0).collect(), paths: left_maps };
    let right = FlowMorphism { states: pairs_of_states.iter().map(|p| p.1).collect(), paths: right_maps };
    Ok(Pullback { flow, left, right })
}

/// Binary product, as the pullback over the terminal flow.
pub fn product(x: &CombFlow, z: &CombFlow) -> Result<Pullback> {
    let t = CombFlow::terminal(x.cap);
    pullback(x, &FlowMorphism::to_terminal(x), z, &FlowMorphism::to_terminal(z), &t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> CombFlow {
        CombFlow::from_poset(&FinPoset::figure_one(), 3)
    }

    #[test]
    fn glob_examples() {
        let seg = CombFlow::segment(3);
        let r = seg.validate().unwrap();
        assert!(r.loopless);
        assert_eq!(r.initial_states, vec!["0"]);
        assert_eq!(r.final_states, vec!["1"]);
        let two = CombFlow::glob(FinSimplicialSet::discrete(&["p", "q"], 3));
        assert_eq!(two.path(0, 1).unwrap().len(0), 2);
        let none = CombFlow::glob(FinSimplicialSet::empty(3));
        assert_eq!(none.pairs().count(), 0);
        assert_eq!(none.state_count(), 2);
    }

    #[test]
    fn poset_flow_of_figure_one() {
        let f = fig1();
        f.check().unwrap();
        let r = f.validate().unwrap();
        assert!(r.loopless);
        assert_eq!(r.initial_states, vec!["0"]);
        assert_eq!(r.final_states, vec!["1"]);
        let i = |s| f.state_index(s).unwrap();
        let via_a = f.compose(i("0"), i("A"), i("1"), 0, 0, 0);
        let via_c = f.compose(i("0"), i("C"), i("1"), 0, 0, 0);
        assert_eq!(via_a, via_c);
        assert!(f.state_poset().unwrap().leq(i("A"), i("B")));
        assert!(f.ball_report().is_ball);
    }

    #[test]
    fn ball_failures() {
        let circle = CombFlow::glob(FinSimplicialSet::circle(3));
        let r = circle.ball_report();
        assert!(!r.is_ball);
        assert_eq!(r.non_contractible, vec![("0".to_string(), "1".to_string())]);

        let seg = CombFlow::segment(3);
        let iso = CombFlow::discrete(&["z"], 3);
        let both = CombFlow::coproduct(&[&seg, &iso]).unwrap();
        let r = both.ball_report();
        assert!(!r.is_ball && !r.unique_endpoints);
    }

    #[test]
    fn restriction_examples() {
        let f = fig1();
        let (all, inc) = f.restriction(&["0", "A", "B", "C", "1"]).unwrap();
        assert_eq!(all.pairs().count(), f.pairs().count());
        inc.check(&all, &f).unwrap();
        let (seg, inc) = f.restriction(&["0", "A"]).unwrap();
        inc.check(&seg, &f).unwrap();
        assert!(is_isomorphic(&seg, &CombFlow::segment(3)));
        let (empty, _) = f.restriction(&[]).unwrap();
        assert_eq!(empty.state_count(), 0);
        assert!(matches!(f.restriction(&["Q"]), Err(Error::UnknownState(_))));
    }

    #[test]
    fn loops_are_detected() {
        let t = CombFlow::terminal(2);
        t.check().unwrap();
        let r = t.validate().unwrap();
        assert!(!r.loopless);
        assert!(matches!(t.state_poset(), Err(Error::NotLoopless(_))));
    }

    #[test]
    fn associativity_violation_is_malformed() {
        // a -> b -> c -> d with two paths a->c and a->d, composites chosen inconsistently
        let cap = 1;
        let pt = |name: &str| FinSimplicialSet::discrete(&[name], cap);
        let two = FinSimplicialSet::discrete(&["p", "q"], cap);
        let mut paths = BTreeMap::new();
        paths.insert((0, 1), pt("x"));
        paths.insert((1, 2), pt("y"));
        paths.insert((2, 3), pt("z"));
        paths.insert((0, 2), two.clone());
        paths.insert((1, 3), pt("yz"));
        paths.insert((0, 3), two);
        let mut compose = HashMap::new();
        compose.insert((0, 1, 2), vec![vec![0], vec![0]]);
        compose.insert((1, 2, 3), vec![vec![0], vec![0]]);
        compose.insert((0, 1, 3), vec![vec![0], vec![0]]);
        // (x*y)*z = p*z -> q, x*(y*z) = x*yz -> p
        compose.insert((0, 2, 3), vec![vec![1, 1], vec![1, 1]]);
        let states = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let err = CombFlow::new(cap, states, paths, compose).unwrap_err();
        assert!(matches!(err, Error::MalformedFlow(m) if m.contains("associative")));
    }

    #[test]
    fn product_of_segments() {
        let seg = CombFlow::segment(3);
        let p = product(&seg, &seg).unwrap();
        assert_eq!(p.flow.state_count(), 4);
        assert_eq!(p.flow.pairs().count(), 1);
        p.left.check(&p.flow, &seg).unwrap();
        p.right.check(&p.flow, &seg).unwrap();
    }

    #[test]
    fn pullback_of_identities_and_inclusions() {
        let f = fig1();
        let id = FlowMorphism::identity(&f);
        let pb = pullback(&f, &id, &f, &id, &f).unwrap();
        assert!(is_isomorphic(&pb.flow, &f));

        let (sub, inc) = f.restriction(&["0", "C", "1"]).unwrap();
        let pb = pullback(&f, &id, &sub, &inc, &f).unwrap();
        assert!(is_isomorphic(&pb.flow, &sub));
        // every pullback simplex projects into the image of the inclusion
        for ((i, j), s) in pb.flow.paths() {
            let (a, b) = (pb.left.states[i], pb.left.states[j]);
            assert!(["0", "C", "1"].contains(&f.state_name(a)) && ["0", "C", "1"].contains(&f.state_name(b)));
            assert_eq!(s.len(0), 1);
        }
    }
}
