//! Flows presented by generators and relations, and the colimit
//! constructions built on them.
//!
//! A generator is a simplicial set of paths between two states. At level
//! `n` a word is a composable sequence of level-`n` generator simplices.
//! Saturation computes the smallest congruence on words containing the
//! relations and closed under letterwise faces and degeneracies and under
//! concatenation; path spaces are its classes and composition is
//! concatenation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{unique_names, CombFlow, ComposeTable, FlowMorphism, Pair};
use crate::simpset::{FinSimplicialSet, SimplicialMap, UnionFind};

/// Default ceiling on the number of words per level.
pub const DEFAULT_BUDGET: usize = 1_000_000;

type Letter = (u32, u32);

#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub space: FinSimplicialSet,
}

/// A composable sequence of `(generator, simplex)` letters at one level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    pub level: usize,
    pub letters: Vec<(usize, usize)>,
}

impl Word {
    pub fn new(level: usize, letters: Vec<(usize, usize)>) -> Self {
        Word { level, letters }
    }

    pub fn letter(level: usize, generator: usize, simplex: usize) -> Self {
        Word { level, letters: vec![(generator, simplex)] }
    }
}

#[derive(Debug, Clone)]
pub struct FlowPresentation {
    cap: usize,
    pub states: Vec<String>,
    pub generators: Vec<Generator>,
    pub relations: Vec<(Word, Word)>,
}

impl FlowPresentation {
    pub fn new(cap: usize, states: Vec<String>) -> Self {
        FlowPresentation { cap, states, generators: Vec::new(), relations: Vec::new() }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn add_generator(&mut self, name: impl Into<String>, source: usize, target: usize, space: FinSimplicialSet) -> Result<usize> {
        if source >= self.states.len() || target >= self.states.len() {
            return Err(Error::UnknownState(format!("#{}", source.max(target))));
        }
        if space.cap() != self.cap {
            return Err(Error::CapMismatch(self.cap, space.cap()));
        }
        self.generators.push(Generator { name: name.into(), source, target, space });
        Ok(self.generators.len() - 1)
    }

    /// Endpoints of a word, or `None` if it is empty, not composable or
    /// refers to missing simplices.
    pub fn endpoints(&self, w: &Word) -> Option<Pair> {
        let first = w.letters.first()?;
        let mut cur = self.generators.get(first.0)?.source;
        let start = cur;
        for &(g, k) in &w.letters {
            let gen = self.generators.get(g)?;
            if gen.source != cur || w.level > self.cap || k >= gen.space.len(w.level) {
                return None;
            }
            cur = gen.target;
        }
        Some((start, cur))
    }

    pub fn add_relation(&mut self, lhs: Word, rhs: Word) -> Result<()> {
        let (Some(a), Some(b)) = (self.endpoints(&lhs), self.endpoints(&rhs)) else {
            return Err(Error::MalformedFlow("relation word is not a composable sequence of generator simplices".into()));
        };
        if a != b || lhs.level != rhs.level {
            return Err(Error::MalformedFlow("relation words differ in endpoints or level".into()));
        }
        self.relations.push((lhs, rhs));
        Ok(())
    }

    /// Fails with the states of a cycle if the generators do not induce a
    /// strict order on states.
    pub fn check_loopless(&self) -> Result<()> {
        let n = self.states.len();
        let mut succ = vec![BTreeSet::new(); n];
        for g in self.generators.iter().filter(|g| !g.space.is_empty()) {
            if g.source == g.target {
                return Err(Error::NotLoopless(vec![self.states[g.source].clone()]));
            }
            succ[g.source].insert(g.target);
        }
        // 0 unvisited, 1 on stack, 2 done
        let mut mark = vec![0u8; n];
        let mut stack: Vec<usize> = Vec::new();
        fn visit(v: usize, succ: &[BTreeSet<usize>], mark: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
            mark[v] = 1;
            stack.push(v);
            for &w in &succ[v] {
                if mark[w] == 1 {
                    let pos = stack.iter().position(|&s| s == w).unwrap();
                    return Some(stack[pos..].to_vec());
                }
                if mark[w] == 0 {
                    if let Some(c) = visit(w, succ, mark, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            mark[v] = 2;
            None
        }
        for v in 0..n {
            if mark[v] == 0 {
                if let Some(cycle) = visit(v, &succ, &mut mark, &mut stack) {
                    return Err(Error::NotLoopless(cycle.into_iter().map(|s| self.states[s].clone()).collect()));
                }
            }
        }
        Ok(())
    }

    /// Computes the presented flow.
    pub fn saturate(&self, budget: usize) -> Result<Saturated> {
        self.check_loopless()?;
        let cap = self.cap;
        let nstates = self.states.len();
        let mut levels: Vec<WordLevel> = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            levels.push(self.enumerate(n, nstates, budget)?);
        }
        let offsets: Vec<usize> = levels
            .iter()
            .scan(0, |acc, l| {
                let o = *acc;
                *acc += l.words.len();
                Some(o)
            })
            .collect();
        let total = levels.iter().map(|l| l.words.len()).sum();
        let mut uf = UnionFind::new(total);
        let mut work: Vec<(usize, u32, u32)> = Vec::new();
        for (lhs, rhs) in &self.relations {
            let n = lhs.level;
            let key = |w: &Word| -> Vec<Letter> { w.letters.iter().map(|&(g, k)| (g as u32, k as u32)).collect() };
            let a = levels[n].index[&key(lhs)];
            let b = levels[n].index[&key(rhs)];
            work.push((n, a, b));
        }
        // letters by source and target state, per level
        let letters_from: Vec<Vec<Vec<Letter>>> = (0..=cap).map(|n| self.letters_by(n, nstates, true)).collect();
        let letters_to: Vec<Vec<Vec<Letter>>> = (0..=cap).map(|n| self.letters_by(n, nstates, false)).collect();
        let mut buf: Vec<Letter> = Vec::new();
        while let Some((n, a, b)) = work.pop() {
            if !uf.union(offsets[n] + a as usize, offsets[n] + b as usize) {
                continue;
            }
            let (wa, wb) = (&levels[n].words[a as usize], &levels[n].words[b as usize]);
            if n > 0 {
                for i in 0..=n {
                    let fa = self.map_letters(&levels[n - 1], wa, &mut buf, |sp, k| sp.face(n, i, k));
                    let fb = self.map_letters(&levels[n - 1], wb, &mut buf, |sp, k| sp.face(n, i, k));
                    work.push((n - 1, fa, fb));
                }
            }
            if n < cap {
                for i in 0..=n {
                    let sa = self.map_letters(&levels[n + 1], wa, &mut buf, |sp, k| sp.degen(n, i, k));
                    let sb = self.map_letters(&levels[n + 1], wb, &mut buf, |sp, k| sp.degen(n, i, k));
                    work.push((n + 1, sa, sb));
                }
            }
            let (src, tgt) = (self.word_source(wa), self.word_target(wa));
            for &c in &letters_to[n][src] {
                let ca = concat_lookup(&levels[n], &[c], wa, &mut buf);
                let cb = concat_lookup(&levels[n], &[c], wb, &mut buf);
                work.push((n, ca, cb));
            }
            for &c in &letters_from[n][tgt] {
                let ac = concat_lookup(&levels[n], wa, &[c], &mut buf);
                let bc = concat_lookup(&levels[n], wb, &[c], &mut buf);
                work.push((n, ac, bc));
            }
        }
        Ok(self.assemble(levels, offsets, uf))
    }

    fn word_source(&self, w: &[Letter]) -> usize {
        self.generators[w[0].0 as usize].source
    }

    fn word_target(&self, w: &[Letter]) -> usize {
        self.generators[w[w.len() - 1].0 as usize].target
    }

    fn letters_by(&self, n: usize, nstates: usize, by_source: bool) -> Vec<Vec<Letter>> {
        let mut out = vec![Vec::new(); nstates];
        for (g, gen) in self.generators.iter().enumerate() {
            let s = if by_source { gen.source } else { gen.target };
            for k in 0..gen.space.len(n) {
                out[s].push((g as u32, k as u32));
            }
        }
        out
    }

    fn map_letters(
        &self,
        level: &WordLevel,
        w: &[Letter],
        buf: &mut Vec<Letter>,
        op: impl Fn(&FinSimplicialSet, usize) -> usize,
    ) -> u32 {
        buf.clear();
        buf.extend(w.iter().map(|&(g, k)| (g, op(&self.generators[g as usize].space, k as usize) as u32)));
        level.index[buf.as_slice()]
    }

    /// All words at level `n`, shortest first.
    fn enumerate(&self, n: usize, nstates: usize, budget: usize) -> Result<WordLevel> {
        let from = self.letters_by(n, nstates, true);
        let mut words: Vec<Vec<Letter>> = Vec::new();
        let mut index: HashMap<Vec<Letter>, u32> = HashMap::new();
        let mut push = |w: Vec<Letter>, words: &mut Vec<Vec<Letter>>| -> Result<()> {
            if words.len() >= budget {
                return Err(Error::BudgetExceeded {
                    budget,
                    level: n,
                    source_state: self.states[self.word_source(&w)].clone(),
                    target_state: self.states[self.word_target(&w)].clone(),
                });
            }
            index.insert(w.clone(), words.len() as u32);
            words.push(w);
            Ok(())
        };
        for list in &from {
            for &l in list {
                push(vec![l], &mut words)?;
            }
        }
        let mut start = 0;
        while start < words.len() {
            let end = words.len();
            for i in start..end {
                let tgt = self.word_target(&words[i]);
                for &l in &from[tgt] {
                    let mut w = words[i].clone();
                    w.push(l);
                    push(w, &mut words)?;
                }
            }
            start = end;
        }
        Ok(WordLevel { words, index })
    }

    fn assemble(&self, levels: Vec<WordLevel>, offsets: Vec<usize>, mut uf: UnionFind) -> Saturated {
        let cap = self.cap;
        // class ids per level, local to each endpoint pair, in order of first word
        let mut class_of: Vec<Vec<u32>> = Vec::with_capacity(cap + 1);
        let mut reps: BTreeMap<Pair, Vec<Vec<Vec<Letter>>>> = BTreeMap::new();
        for (n, level) in levels.iter().enumerate() {
            let mut root_class: HashMap<usize, u32> = HashMap::new();
            let mut classes = Vec::with_capacity(level.words.len());
            for (i, w) in level.words.iter().enumerate() {
                let root = uf.find(offsets[n] + i);
                let pair = (self.word_source(w), self.word_target(w));
                let slot = reps.entry(pair).or_insert_with(|| vec![Vec::new(); cap + 1]);
                let c = *root_class.entry(root).or_insert_with(|| {
                    slot[n].push(w.clone());
                    (slot[n].len() - 1) as u32
                });
                classes.push(c);
            }
            class_of.push(classes);
        }
        let class = |n: usize, w: &[Letter]| -> u32 { class_of[n][levels[n].index[w] as usize] };
        let mut paths = BTreeMap::new();
        for (&pair, per_level) in &reps {
            let mut raw = Vec::with_capacity(cap + 1);
            for n in 0..=cap {
                let mut faces = Vec::new();
                let mut degens = Vec::new();
                let mut names = Vec::new();
                for w in &per_level[n] {
                    names.push(self.word_name(n, w));
                    if n > 0 {
                        for i in 0..=n {
                            let f: Vec<Letter> = w
                                .iter()
                                .map(|&(g, k)| (g, self.generators[g as usize].space.face(n, i, k as usize) as u32))
                                .collect();
                            faces.push(class(n - 1, &f));
                        }
                    }
                    if n < cap {
                        for i in 0..=n {
                            let s: Vec<Letter> = w
                                .iter()
                                .map(|&(g, k)| (g, self.generators[g as usize].space.degen(n, i, k as usize) as u32))
                                .collect();
                            degens.push(class(n + 1, &s));
                        }
                    }
                }
                raw.push((faces, degens, names));
            }
            paths.insert(pair, FinSimplicialSet::from_raw(cap, raw));
        }
        let mut compose: HashMap<(usize, usize, usize), ComposeTable> = HashMap::new();
        let keys: Vec<Pair> = reps.keys().copied().collect();
        for &(a, b) in &keys {
            for &(b2, c) in &keys {
                if b2 != b {
                    continue;
                }
                let table = (0..=cap)
                    .map(|n| {
                        let mut row = Vec::with_capacity(reps[&(a, b)][n].len() * reps[&(b, c)][n].len());
                        let mut buf = Vec::new();
                        for x in &reps[&(a, b)][n] {
                            for y in &reps[&(b, c)][n] {
                                buf.clear();
                                buf.extend_from_slice(x);
                                buf.extend_from_slice(y);
                                row.push(class(n, &buf));
                            }
                        }
                        row
                    })
                    .collect();
                compose.insert((a, b, c), table);
            }
        }
        let embedding = self
            .generators
            .iter()
            .enumerate()
            .map(|(g, gen)| SimplicialMap {
                levels: (0..=cap)
                    .map(|n| (0..gen.space.len(n)).map(|k| class(n, &[(g as u32, k as u32)])).collect())
                    .collect(),
            })
            .collect();
        let flow = CombFlow::from_parts(cap, self.states.clone(), paths, compose);
        Saturated {
            flow,
            embedding,
            endpoints: self.generators.iter().map(|g| (g.source, g.target)).collect(),
            reps,
        }
    }

    fn word_name(&self, n: usize, w: &[Letter]) -> String {
        w.iter()
            .map(|&(g, k)| self.generators[g as usize].space.name(n, k as usize))
            .collect::<Vec<_>>()
            .join(".")
    }

    /// Text form in the flow file grammar. Fails if a generator has a
    /// nondegenerate simplex with a degenerate face, or a relation uses a
    /// degenerate letter, since neither can be written as cells.
    pub fn to_text(&self, name: &str) -> Result<String> {
        let mut out = format!("flow {name}\n");
        for s in &self.states {
            out.push_str(&format!("state {s}\n"));
        }
        let cell_name = |g: usize, n: usize, k: usize| format!("g{g}_{}", self.generators[g].space.name(n, k));
        for (g, gen) in self.generators.iter().enumerate() {
            let sp = &gen.space;
            for n in 0..=self.cap {
                for k in sp.nondegenerate(n) {
                    let mut line = format!(
                        "cell {} : {} -> {} dim {n}",
                        cell_name(g, n, k),
                        self.states[gen.source],
                        self.states[gen.target]
                    );
                    if n > 0 {
                        line.push_str(" faces");
                        for i in 0..=n {
                            let f = sp.face(n, i, k);
                            if sp.is_degenerate(n - 1, f) {
                                return Err(Error::InvalidSimplicial(format!(
                                    "simplex {} has a degenerate face",
                                    sp.name(n, k)
                                )));
                            }
                            line.push_str(&format!(" d{i}={}", cell_name(g, n - 1, f)));
                        }
                    }
                    out.push_str(&line);
                    out.push('\n');
                }
            }
        }
        for (lhs, rhs) in &self.relations {
            let word = |w: &Word| -> Result<String> {
                let mut parts = Vec::new();
                for &(g, k) in &w.letters {
                    if self.generators[g].space.is_degenerate(w.level, k) {
                        return Err(Error::InvalidSimplicial("relation uses a degenerate letter".into()));
                    }
                    parts.push(cell_name(g, w.level, k));
                }
                Ok(parts.join("."))
            };
            out.push_str(&format!("relation {} = {}\n", word(lhs)?, word(rhs)?));
        }
        Ok(out)
    }
}

struct WordLevel {
    words: Vec<Vec<Letter>>,
    index: HashMap<Vec<Letter>, u32>,
}

fn concat_lookup(level: &WordLevel, a: &[Letter], b: &[Letter], buf: &mut Vec<Letter>) -> u32 {
    buf.clear();
    buf.extend_from_slice(a);
    buf.extend_from_slice(b);
    level.index[buf.as_slice()]
}

/// The presented flow with the images of generator simplices.
#[derive(Debug, Clone)]
pub struct Saturated {
    pub flow: CombFlow,
    /// Per generator, the map of its space into the path space of its
    /// endpoints.
    pub embedding: Vec<SimplicialMap>,
    endpoints: Vec<Pair>,
    /// Shortest representative word of each class, per pair and level.
    reps: BTreeMap<Pair, Vec<Vec<Vec<Letter>>>>,
}

impl Saturated {
    /// The morphism out of the presented flow determined by a state map and
    /// the images of generator simplices, `letter(generator, level, simplex)`.
    /// The result is checked; it fails if the assignment does not respect
    /// the relations.
    pub fn induced(
        &self,
        target: &CombFlow,
        states: &[usize],
        letter: impl Fn(usize, usize, usize) -> usize,
    ) -> Result<FlowMorphism> {
        let mut paths = BTreeMap::new();
        for (&pair, per_level) in &self.reps {
            let levels = per_level
                .iter()
                .enumerate()
                .map(|(n, classes)| {
                    classes
                        .iter()
                        .map(|w| {
                            let (g0, k0) = w[0];
                            let (s0, mut t) = self.endpoints[g0 as usize];
                            let mut cur = letter(g0 as usize, n, k0 as usize);
                            for &(g, k) in &w[1..] {
                                let next_t = self.endpoints[g as usize].1;
                                let v = letter(g as usize, n, k as usize);
                                cur = target.compose(states[s0], states[t], states[next_t], n, cur, v);
                                t = next_t;
                            }
                            cur as u32
                        })
                        .collect()
                })
                .collect();
            paths.insert(pair, SimplicialMap { levels });
        }
        let f = FlowMorphism { states: states.to_vec(), paths };
        f.check(&self.flow, target)?;
        Ok(f)
    }
}

/// A colimit with its cocone.
#[derive(Debug, Clone)]
pub struct Colimit {
    pub flow: CombFlow,
    pub injections: Vec<FlowMorphism>,
    pub saturated: Saturated,
    /// For each generator: the object and the pair it came from.
    pub origin: Vec<(usize, Pair)>,
}

/// Colimit of a finite diagram of flows. Arrows are `(source, target,
/// morphism)`. State names come from the first object containing the state.
pub fn colimit(objects: &[&CombFlow], arrows: &[(usize, usize, &FlowMorphism)], budget: usize) -> Result<Colimit> {
    let cap = objects.first().map_or(crate::simpset::DEFAULT_CAP, |o| o.cap());
    if let Some(o) = objects.iter().find(|o| o.cap() != cap) {
        return Err(Error::CapMismatch(cap, o.cap()));
    }
    for &(s, t, f) in arrows {
        f.check(objects[s], objects[t])?;
    }
    let offsets: Vec<usize> = objects
        .iter()
        .scan(0, |acc, o| {
            let v = *acc;
            *acc += o.state_count();
            Some(v)
        })
        .collect();
    let total: usize = objects.iter().map(|o| o.state_count()).sum();
    let mut uf = UnionFind::new(total);
    for &(s, t, f) in arrows {
        for (a, &fa) in f.states.iter().enumerate() {
            uf.union(offsets[s] + a, offsets[t] + fa);
        }
    }
    let mut class_of_root: HashMap<usize, usize> = HashMap::new();
    let mut names = Vec::new();
    let mut state_class = vec![0usize; total];
    for (o, obj) in objects.iter().enumerate() {
        for a in 0..obj.state_count() {
            let root = uf.find(offsets[o] + a);
            let c = *class_of_root.entry(root).or_insert_with(|| {
                names.push(obj.state_name(a).to_string());
                names.len() - 1
            });
            state_class[offsets[o] + a] = c;
        }
    }
    let mut pres = FlowPresentation::new(cap, unique_names(names));
    let mut block: Vec<BTreeMap<Pair, usize>> = vec![BTreeMap::new(); objects.len()];
    let mut origin = Vec::new();
    for (o, obj) in objects.iter().enumerate() {
        for ((a, b), sp) in obj.paths() {
            let g = pres.add_generator(
                format!("{o}:{}->{}", obj.state_name(a), obj.state_name(b)),
                state_class[offsets[o] + a],
                state_class[offsets[o] + b],
                sp.clone(),
            )?;
            block[o].insert((a, b), g);
            origin.push((o, (a, b)));
        }
    }
    // internal composites collapse
    for (o, obj) in objects.iter().enumerate() {
        for (a, b, c) in obj.triples() {
            let (l, r) = (obj.path(a, b).unwrap(), obj.path(b, c).unwrap());
            let (gl, gr, go) = (block[o][&(a, b)], block[o][&(b, c)], block[o][&(a, c)]);
            for n in 0..=cap {
                for x in 0..l.len(n) {
                    for y in 0..r.len(n) {
                        if jointly_degenerate(l, r, n, x, y) {
                            continue;
                        }
                        let z = obj.compose(a, b, c, n, x, y);
                        pres.relations.push((Word::new(n, vec![(gl, x), (gr, y)]), Word::letter(n, go, z)));
                    }
                }
            }
        }
    }
    // cocone identifications
    for &(s, t, f) in arrows {
        for ((a, b), sp) in objects[s].paths() {
            let g1 = block[s][&(a, b)];
            let g2 = block[t][&(f.states[a], f.states[b])];
            for n in 0..=cap {
                for x in sp.nondegenerate(n) {
                    pres.relations.push((Word::letter(n, g1, x), Word::letter(n, g2, f.apply((a, b), n, x))));
                }
            }
        }
    }
    let saturated = pres.saturate(budget)?;
    let injections = objects
        .iter()
        .enumerate()
        .map(|(o, obj)| FlowMorphism {
            states: (0..obj.state_count()).map(|a| state_class[offsets[o] + a]).collect(),
            paths: block[o].iter().map(|(&p, &g)| (p, saturated.embedding[g].clone())).collect(),
        })
        .collect();
    Ok(Colimit { flow: saturated.flow.clone(), injections, saturated, origin })
}

/// Whether `(x, y)` is `(s_i x', s_i y')` for some `i`; such pairs add no
/// relation beyond their lower-level counterparts.
fn jointly_degenerate(l: &FinSimplicialSet, r: &FinSimplicialSet, n: usize, x: usize, y: usize) -> bool {
    n > 0
        && (0..n).any(|i| l.degen(n - 1, i, l.face(n, i, x)) == x && r.degen(n - 1, i, r.face(n, i, y)) == y)
}

/// Pushout of `f: A → B` and `g: A → C`, with the maps from `B` and `C`.
pub fn pushout(
    a: &CombFlow,
    b: &CombFlow,
    c: &CombFlow,
    f: &FlowMorphism,
    g: &FlowMorphism,
    budget: usize,
) -> Result<(CombFlow, FlowMorphism, FlowMorphism)> {
    let col = colimit(&[b, c, a], &[(2, 0, f), (2, 1, g)], budget)?;
    let mut inj = col.injections.into_iter();
    let (ib, ic) = (inj.next().unwrap(), inj.next().unwrap());
    Ok((col.flow, ib, ic))
}

/// `U ⊠ X` with the generator data needed for the vertex inclusions.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub flow: CombFlow,
    /// Generator embedding of each pair of `X`.
    blocks: BTreeMap<Pair, SimplicialMap>,
}

impl Tensor {
    /// `x ↦ (v, x)` for a vertex `v` of `U`: a morphism `X → U ⊠ X`.
    pub fn vertex_inclusion(&self, u: &FinSimplicialSet, x: &CombFlow, v: usize) -> FlowMorphism {
        let paths = x
            .paths()
            .map(|(pair, sp)| {
                let levels = (0..=sp.cap())
                    .map(|n| {
                        let uv = u.constant(v, n);
                        (0..sp.len(n))
                            .map(|k| self.blocks[&pair].levels[n][uv * sp.len(n) + k])
                            .collect()
                    })
                    .collect();
                (pair, SimplicialMap { levels })
            })
            .collect();
        FlowMorphism { states: (0..x.state_count()).collect(), paths }
    }
}

/// The interval tensor `U ⊠ X`: generators `U × P(a,b)X`, with
/// `(u,x)·(u,y) ~ (u, x*y)`.
pub fn tensor(u: &FinSimplicialSet, x: &CombFlow, budget: usize) -> Result<Tensor> {
    let cap = x.cap();
    if u.cap() != cap {
        return Err(Error::CapMismatch(cap, u.cap()));
    }
    let mut pres = FlowPresentation::new(cap, x.states().to_vec());
    let mut gens = BTreeMap::new();
    for ((a, b), sp) in x.paths() {
        let g = pres.add_generator(format!("{}->{}", x.state_name(a), x.state_name(b)), a, b, u.product(sp)?)?;
        gens.insert((a, b), g);
    }
    for (a, b, c) in x.triples() {
        let (l, r) = (x.path(a, b).unwrap(), x.path(b, c).unwrap());
        let (gl, gr, go) = (gens[&(a, b)], gens[&(b, c)], gens[&(a, c)]);
        for n in 0..=cap {
            for uu in 0..u.len(n) {
                for p in 0..l.len(n) {
                    for q in 0..r.len(n) {
                        let z = x.compose(a, b, c, n, p, q);
                        pres.relations.push((
                            Word::new(n, vec![(gl, uu * l.len(n) + p), (gr, uu * r.len(n) + q)]),
                            Word::letter(n, go, uu * x.path(a, c).unwrap().len(n) + z),
                        ));
                    }
                }
            }
        }
    }
    let sat = pres.saturate(budget)?;
    let blocks = gens.iter().map(|(&p, &g)| (p, sat.embedding[g].clone())).collect();
    Ok(Tensor { flow: sat.flow, blocks })
}

/// Mapping cylinder of `i: A → X` with its canonical maps.
#[derive(Debug, Clone)]
pub struct MappingCylinder {
    pub flow: CombFlow,
    /// `X → Mi`
    pub from_target: FlowMorphism,
    /// `Δ¹ ⊠ A → Mi`
    pub from_cylinder: FlowMorphism,
    /// The far end `i_1: A → Mi`, `a ↦ 1 ⊠ a`.
    pub end: FlowMorphism,
}

/// Pushout of `Δ¹ ⊠ A ← A → X` with `a ↦ 0 ⊠ a` on the left.
pub fn mapping_cylinder(a: &CombFlow, x: &CombFlow, i: &FlowMorphism, budget: usize) -> Result<MappingCylinder> {
    let interval = FinSimplicialSet::standard_simplex(1, a.cap());
    let cyl = tensor(&interval, a, budget)?;
    let j0 = cyl.vertex_inclusion(&interval, a, 0);
    let j1 = cyl.vertex_inclusion(&interval, a, 1);
    let (flow, from_cylinder, from_target) = pushout(a, &cyl.flow, x, &j0, i, budget)?;
    let end = j1.then(&from_cylinder);
    Ok(MappingCylinder { flow, from_target, from_cylinder, end })
}

/// Colimit of a finite chain of levelwise injective morphisms, glued
/// levelwise without going through words.
pub fn sequential_colimit(chain: &[CombFlow], links: &[FlowMorphism]) -> Result<CombFlow> {
    if chain.is_empty() || links.len() + 1 != chain.len() {
        return Err(Error::MalformedMorphism("a chain of k+1 flows needs k links".into()));
    }
    for (i, f) in links.iter().enumerate() {
        f.check(&chain[i], &chain[i + 1])?;
        if !f.is_injective() {
            return Err(Error::NotAnInclusion(i));
        }
    }
    let cap = chain[0].cap();
    // states
    let offsets: Vec<usize> = chain
        .iter()
        .scan(0, |acc, z| {
            let v = *acc;
            *acc += z.state_count();
            Some(v)
        })
        .collect();
    let total: usize = chain.iter().map(|z| z.state_count()).sum();
    let mut uf = UnionFind::new(total);
    for (i, f) in links.iter().enumerate() {
        for (a, &fa) in f.states.iter().enumerate() {
            uf.union(offsets[i] + a, offsets[i + 1] + fa);
        }
    }
    let mut state_class = vec![0usize; total];
    let mut names = Vec::new();
    let mut root_class: HashMap<usize, usize> = HashMap::new();
    for (i, z) in chain.iter().enumerate() {
        for a in 0..z.state_count() {
            let r = uf.find(offsets[i] + a);
            state_class[offsets[i] + a] = *root_class.entry(r).or_insert_with(|| {
                names.push(z.state_name(a).to_string());
                names.len() - 1
            });
        }
    }
    // path simplices: (chain index, pair, level, simplex), glued per level
    let mut elements: Vec<Vec<(usize, Pair, usize)>> = vec![Vec::new(); cap + 1];
    let mut elem_index: Vec<HashMap<(usize, Pair, usize), usize>> = vec![HashMap::new(); cap + 1];
    for (i, z) in chain.iter().enumerate() {
        for (pair, sp) in z.paths() {
            for n in 0..=cap {
                for k in 0..sp.len(n) {
                    elem_index[n].insert((i, pair, k), elements[n].len());
                    elements[n].push((i, pair, k));
                }
            }
        }
    }
    let mut ufs: Vec<UnionFind> = elements.iter().map(|e| UnionFind::new(e.len())).collect();
    for (i, f) in links.iter().enumerate() {
        for (pair, m) in &f.paths {
            let image = (f.states[pair.0], f.states[pair.1]);
            for n in 0..=cap {
                for (k, &v) in m.levels[n].iter().enumerate() {
                    ufs[n].union(elem_index[n][&(i, *pair, k)], elem_index[n][&(i + 1, image, v as usize)]);
                }
            }
        }
    }
    // classes per glued pair
    let mut class_id: Vec<Vec<u32>> = vec![Vec::new(); cap + 1];
    let mut members: BTreeMap<Pair, Vec<Vec<usize>>> = BTreeMap::new();
    for n in 0..=cap {
        let mut root_class: HashMap<usize, u32> = HashMap::new();
        let mut ids = vec![0u32; elements[n].len()];
        for (e, &(i, (a, b), _)) in elements[n].iter().enumerate() {
            let pair = (state_class[offsets[i] + a], state_class[offsets[i] + b]);
            let r = ufs[n].find(e);
            let slot = members.entry(pair).or_insert_with(|| vec![Vec::new(); cap + 1]);
            ids[e] = *root_class.entry(r).or_insert_with(|| {
                slot[n].push(e);
                (slot[n].len() - 1) as u32
            });
        }
        class_id[n] = ids;
    }
    let cls = |n: usize, i: usize, pair: Pair, k: usize| class_id[n][elem_index[n][&(i, pair, k)]];
    let mut paths = BTreeMap::new();
    for (&pair, per_level) in &members {
        let mut raw = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let mut faces = Vec::new();
            let mut degens = Vec::new();
            let mut names = Vec::new();
            for &e in &per_level[n] {
                let (i, p, k) = elements[n][e];
                let sp = chain[i].path(p.0, p.1).unwrap();
                names.push(sp.name(n, k).to_string());
                if n > 0 {
                    for d in 0..=n {
                        faces.push(cls(n - 1, i, p, sp.face(n, d, k)));
                    }
                }
                if n < cap {
                    for d in 0..=n {
                        degens.push(cls(n + 1, i, p, sp.degen(n, d, k)));
                    }
                }
            }
            raw.push((faces, degens, names));
        }
        paths.insert(pair, FinSimplicialSet::from_raw(cap, raw));
    }
    // composition through the last flow of the chain, where every element
    // has a representative
    let last = chain.len() - 1;
    let mut to_last: Vec<FlowMorphism> = Vec::with_capacity(chain.len());
    to_last.resize(chain.len(), FlowMorphism::identity(&chain[last]));
    for i in (0..last).rev() {
        to_last[i] = links[i].then(&to_last[i + 1]);
    }
    let zl = &chain[last];
    let mut last_state = vec![0usize; names.len()];
    for a in 0..zl.state_count() {
        last_state[state_class[offsets[last] + a]] = a;
    }
    let mut compose = HashMap::new();
    let keys: Vec<Pair> = members.keys().copied().collect();
    for &(a, b) in &keys {
        for &(b2, c) in &keys {
            if b2 != b {
                continue;
            }
            let (la, lb, lc) = (last_state[a], last_state[b], last_state[c]);
            let table = (0..=cap)
                .map(|n| {
                    let mut row = Vec::new();
                    for &e in &members[&(a, b)][n] {
                        for &e2 in &members[&(b, c)][n] {
                            let (i, p, k) = elements[n][e];
                            let (j, q, k2) = elements[n][e2];
                            let x = to_last[i].apply(p, n, k);
                            let y = to_last[j].apply(q, n, k2);
                            let z = zl.compose(la, lb, lc, n, x, y);
                            row.push(cls(n, last, (la, lc), z));
                        }
                    }
                    row
                })
                .collect();
            compose.insert((a, b, c), table);
        }
    }
    CombFlow::new(cap, unique_names(names), paths, compose)
}

/// Per-pair level sizes, for levelwise comparisons.
pub fn level_profile(x: &CombFlow) -> BTreeMap<(String, String), Vec<usize>> {
    x.paths()
        .map(|((a, b), sp)| {
            ((x.state_name(a).to_string(), x.state_name(b).to_string()), (0..=sp.cap()).map(|n| sp.len(n)).collect())
        })
        .collect()
}

/// A breadth-first listing of states reachable from `start`.
pub fn reachable(x: &CombFlow, start: usize) -> Vec<usize> {
    let mut seen = vec![false; x.state_count()];
    let mut out = Vec::new();
    let mut q = VecDeque::from([start]);
    seen[start] = true;
    while let Some(s) = q.pop_front() {
        out.push(s);
        for t in x.successors(s) {
            if !seen[t] {
                seen[t] = true;
                q.push_back(t);
            }
        }
    }
    out
}

/// Summary of a colimit comparison, used by reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub states: Vec<String>,
    pub paths: Vec<PathSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSummary {
    pub source: String,
    pub target: String,
    pub sizes: Vec<usize>,
    pub vertices: Vec<String>,
}

impl FlowSummary {
    pub fn of(x: &CombFlow) -> Self {
        FlowSummary {
            states: x.states().to_vec(),
            paths: x
                .paths()
                .map(|((a, b), sp)| PathSummary {
                    source: x.state_name(a).to_string(),
                    target: x.state_name(b).to_string(),
                    sizes: (0..=sp.cap()).map(|n| sp.len(n)).collect(),
                    vertices: x.vertex_names(a, b),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{find_morphisms, is_isomorphic};
    use crate::poset::FinPoset;

    fn free_chain() -> FlowPresentation {
        let mut p = FlowPresentation::new(2, vec!["a".into(), "b".into(), "c".into()]);
        p.add_generator("u", 0, 1, FinSimplicialSet::discrete(&["u"], 2)).unwrap();
        p.add_generator("v", 1, 2, FinSimplicialSet::discrete(&["v"], 2)).unwrap();
        p
    }

    #[test]
    fn free_composition() {
        let s = free_chain().saturate(DEFAULT_BUDGET).unwrap();
        let f = &s.flow;
        f.check().unwrap();
        assert_eq!(f.pairs().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(f.vertex_names(0, 2), vec!["u.v"]);
    }

    #[test]
    fn relation_merges_parallel_generators() {
        let mut p = FlowPresentation::new(2, vec!["a".into(), "b".into()]);
        p.add_generator("u", 0, 1, FinSimplicialSet::discrete(&["u"], 2)).unwrap();
        p.add_generator("w", 0, 1, FinSimplicialSet::discrete(&["w"], 2)).unwrap();
        p.add_relation(Word::letter(0, 0, 0), Word::letter(0, 1, 0)).unwrap();
        let s = p.saturate(DEFAULT_BUDGET).unwrap();
        assert_eq!(s.flow.path(0, 1).unwrap().len(0), 1);
        // degeneracies are identified as well
        assert_eq!(s.flow.path(0, 1).unwrap().len(2), 1);
    }

    #[test]
    fn figure_one_from_covering_edges() {
        let poset = FinPoset::figure_one();
        let mut p = FlowPresentation::new(3, poset.names().to_vec());
        let mut gen = HashMap::new();
        for (a, b) in poset.covers() {
            let name = format!("{}{}", poset.name(a), poset.name(b));
            let g = p.add_generator(name.clone(), a, b, FinSimplicialSet::discrete(&[&name], 3)).unwrap();
            gen.insert((poset.name(a).to_string(), poset.name(b).to_string()), g);
        }
        let g = |a: &str, b: &str| gen[&(a.to_string(), b.to_string())];
        p.add_relation(
            Word::new(0, vec![(g("0", "A"), 0), (g("A", "B"), 0), (g("B", "1"), 0)]),
            Word::new(0, vec![(g("0", "C"), 0), (g("C", "1"), 0)]),
        )
        .unwrap();
        let s = p.saturate(DEFAULT_BUDGET).unwrap();
        s.flow.check().unwrap();
        assert!(is_isomorphic(&s.flow, &CombFlow::from_poset(&poset, 3)));
    }

    #[test]
    fn cycle_is_not_loopless() {
        let mut p = FlowPresentation::new(1, vec!["a".into(), "b".into()]);
        p.add_generator("u", 0, 1, FinSimplicialSet::point(1)).unwrap();
        p.add_generator("v", 1, 0, FinSimplicialSet::point(1)).unwrap();
        assert!(matches!(p.saturate(DEFAULT_BUDGET), Err(Error::NotLoopless(c)) if c.len() == 2));
    }

    #[test]
    fn budget_is_enforced() {
        let err = free_chain().saturate(2).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 2, level: 0, .. }));
    }

    #[test]
    fn pushout_examples() {
        let seg = CombFlow::segment(2);
        let empty = CombFlow::discrete(&[], 2);
        let none = FlowMorphism { states: vec![], paths: BTreeMap::new() };
        let (sum, _, _) = pushout(&empty, &seg, &seg, &none, &none, DEFAULT_BUDGET).unwrap();
        assert_eq!(sum.state_count(), 4);
        assert_eq!(sum.pairs().count(), 2);

        let ends = CombFlow::discrete(&["0", "1"], 2);
        let inc = FlowMorphism { states: vec![0, 1], paths: BTreeMap::new() };
        let (two, ib, ic) = pushout(&ends, &seg, &seg, &inc, &inc, DEFAULT_BUDGET).unwrap();
        assert_eq!(two.state_count(), 2);
        assert_eq!(two.path(0, 1).unwrap().len(0), 2);
        ib.check(&seg, &two).unwrap();
        ic.check(&seg, &two).unwrap();
    }

    #[test]
    fn tensor_identities_on_small_cases() {
        let f = CombFlow::from_poset(&FinPoset::figure_one(), 2);
        let empty = tensor(&FinSimplicialSet::empty(2), &f, DEFAULT_BUDGET).unwrap();
        assert_eq!(empty.flow.state_count(), 5);
        assert_eq!(empty.flow.pairs().count(), 0);
        let pt = tensor(&FinSimplicialSet::point(2), &f, DEFAULT_BUDGET).unwrap();
        assert!(is_isomorphic(&pt.flow, &f));
        let z = FinSimplicialSet::circle(2);
        let u = FinSimplicialSet::standard_simplex(1, 2);
        let lhs = tensor(&u, &CombFlow::glob(z.clone()), DEFAULT_BUDGET).unwrap();
        assert!(is_isomorphic(&lhs.flow, &CombFlow::glob(u.product(&z).unwrap())));
    }

    #[test]
    fn tensor_of_interval_with_chain_has_free_crossings() {
        // Δ¹ ⊠ (a -> b -> c): the composite from a to c is (u,x)*(u,y) when
        // the interval coordinates agree and a new path otherwise
        let chain = CombFlow::from_poset(&FinPoset::chain(&["a", "b", "c"]), 1);
        let u = FinSimplicialSet::standard_simplex(1, 1);
        let t = tensor(&u, &chain, DEFAULT_BUDGET).unwrap();
        // vertices of P(a,c): (0,ac),(1,ac) plus crossed composites (0,ab)(1,bc),(1,ab)(0,bc)
        assert_eq!(t.flow.path(0, 2).unwrap().len(0), 4);
        let j0 = t.vertex_inclusion(&u, &chain, 0);
        j0.check(&chain, &t.flow).unwrap();
    }

    #[test]
    fn mapping_cylinder_keeps_states() {
        let seg = CombFlow::segment(2);
        let ends = CombFlow::glob(FinSimplicialSet::empty(2));
        let i = FlowMorphism { states: vec![0, 1], paths: BTreeMap::new() };
        let mc = mapping_cylinder(&ends, &seg, &i, DEFAULT_BUDGET).unwrap();
        assert_eq!(mc.flow.state_count(), 2);
        assert!(is_isomorphic(&mc.flow, &seg));
        mc.end.check(&ends, &mc.flow).unwrap();

        let id = FlowMorphism::identity(&seg);
        let mc = mapping_cylinder(&seg, &seg, &id, DEFAULT_BUDGET).unwrap();
        assert_eq!(mc.flow.state_count(), 2);
        mc.end.check(&seg, &mc.flow).unwrap();
        mc.from_target.check(&seg, &mc.flow).unwrap();
    }

    #[test]
    fn sequential_colimit_of_restrictions() {
        let p = FinPoset::figure_one();
        let f = CombFlow::from_poset(&p, 2);
        let (z0, i0) = f.restriction(&["0", "A"]).unwrap();
        let (z1, i1) = f.restriction(&["0", "A", "B", "1"]).unwrap();
        let z2 = f.clone();
        // links z0 -> z1 -> z2
        let l0 = find_morphisms(&z0, &z1, true, 1).pop().unwrap();
        let l1 = i1.clone();
        let _ = i0;
        let col = sequential_colimit(&[z0.clone(), z1.clone(), z2.clone()], &[l0.clone(), l1.clone()]).unwrap();
        assert!(is_isomorphic(&col, &f));
        let via_words = colimit(&[&z0, &z1, &z2], &[(0, 1, &l0), (1, 2, &l1)], DEFAULT_BUDGET).unwrap();
        assert!(is_isomorphic(&col, &via_words.flow));

        let collapse = FlowMorphism::to_terminal(&z1);
        let err = sequential_colimit(&[z1.clone(), CombFlow::terminal(2)], &[collapse]).unwrap_err();
        assert_eq!(err, Error::NotAnInclusion(0));
    }

    #[test]
    fn induced_morphism_respects_relations() {
        let s = free_chain().saturate(DEFAULT_BUDGET).unwrap();
        let target = CombFlow::from_poset(&FinPoset::chain(&["a", "b", "c"]), 2);
        let f = s.induced(&target, &[0, 1, 2], |_, _, _| 0).unwrap();
        f.check(&s.flow, &target).unwrap();
    }

    #[test]
    fn text_round_trip_of_presentation() {
        let text = free_chain().to_text("chain").unwrap();
        assert!(text.contains("cell g0_u : a -> b dim 0"));
        assert!(text.starts_with("flow chain\n"));
    }
}
