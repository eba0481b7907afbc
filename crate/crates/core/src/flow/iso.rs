//! Backtracking search for flow morphisms.
//!
//! State maps are enumerated first. For a fixed state map, simplices are
//! assigned level by level: degenerate simplices are forced by the
//! degeneracies, nondegenerate ones are tried against every target simplex
//! with matching faces, and composition constraints force composites as soon
//! as both factors are assigned.

use std::collections::BTreeMap;

use super::{CombFlow, FlowMorphism, Pair};
use crate::simpset::SimplicialMap;

const UNSET: u32 = u32::MAX;

/// Up to `limit` morphisms `x → y`; with `injective`, only injective ones.
pub fn find_morphisms(x: &CombFlow, y: &CombFlow, injective: bool, limit: usize) -> Vec<FlowMorphism> {
    let mut out = Vec::new();
    if x.cap() != y.cap() || limit == 0 {
        return out;
    }
    if injective && x.state_count() > y.state_count() {
        return out;
    }
    let mut state_map = vec![usize::MAX; x.state_count()];
    let mut used = vec![false; y.state_count()];
    states_dfs(x, y, injective, false, 0, &mut state_map, &mut used, &mut out, limit);
    out
}

/// An isomorphism `x → y`, if one exists.
pub fn find_isomorphism(x: &CombFlow, y: &CombFlow) -> Option<FlowMorphism> {
    if x.cap() != y.cap() || x.state_count() != y.state_count() || signature(x) != signature(y) {
        return None;
    }
    let mut out = Vec::new();
    let mut state_map = vec![usize::MAX; x.state_count()];
    let mut used = vec![false; y.state_count()];
    states_dfs(x, y, true, true, 0, &mut state_map, &mut used, &mut out, 1);
    out.pop()
}

pub fn is_isomorphic(x: &CombFlow, y: &CombFlow) -> bool {
    find_isomorphism(x, y).is_some()
}

/// Sorted per-pair level sizes, an isomorphism invariant.
fn signature(x: &CombFlow) -> Vec<Vec<usize>> {
    let mut sig: Vec<Vec<usize>> =
        x.paths().map(|(_, s)| (0..=s.cap()).map(|n| s.len(n)).collect()).collect();
    sig.sort();
    sig
}

fn level_sizes(x: &CombFlow, p: Pair) -> Option<Vec<usize>> {
    x.path(p.0, p.1).map(|s| (0..=s.cap()).map(|n| s.len(n)).collect())
}

#[allow(clippy::too_many_arguments)]
fn states_dfs(
    x: &CombFlow,
    y: &CombFlow,
    injective: bool,
    iso: bool,
    next: usize,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<FlowMorphism>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if next == x.state_count() {
        paths_search(x, y, map, injective, out, limit);
        return;
    }
    for t in 0..y.state_count() {
        if injective && used[t] {
            continue;
        }
        map[next] = t;
        let ok = (0..=next).all(|s| {
            [(s, next), (next, s)].iter().all(|&(a, b)| {
                let image = (map[a], map[b]);
                match (x.path(a, b).is_some(), y.path(image.0, image.1).is_some()) {
                    (true, false) => false,
                    (false, true) => !iso,
                    (true, true) => !iso || level_sizes(x, (a, b)) == level_sizes(y, image),
                    (false, false) => true,
                }
            })
        });
        if ok {
            used[t] = true;
            states_dfs(x, y, injective, iso, next + 1, map, used, out, limit);
            used[t] = false;
        }
        map[next] = usize::MAX;
        if out.len() >= limit {
            return;
        }
    }
}

#[derive(Clone)]
struct Assignment {
    /// `img[pair][level][simplex]`
    img: Vec<Vec<Vec<u32>>>,
    /// `taken[pair][level][target simplex]`, maintained for injective searches
    taken: Vec<Vec<Vec<bool>>>,
}

struct Search<'a> {
    x: &'a CombFlow,
    y: &'a CombFlow,
    map: &'a [usize],
    pairs: Vec<Pair>,
    pair_index: BTreeMap<Pair, usize>,
    injective: bool,
    limit: usize,
}

fn paths_search(
    x: &CombFlow,
    y: &CombFlow,
    map: &[usize],
    injective: bool,
    out: &mut Vec<FlowMorphism>,
    limit: usize,
) {
    // factors before composites: a pair has strictly more intermediate states
    // than any of its factors
    let mut pairs: Vec<Pair> = x.pairs().collect();
    pairs.sort_by_key(|&(a, b)| (x.successors(a).filter(|&c| x.path(c, b).is_some()).count(), a, b));
    let pair_index = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let cap = x.cap();
    let search = Search { x, y, map, pairs, pair_index, injective, limit };
    let img = search
        .pairs
        .iter()
        .map(|&(a, b)| {
            let s = x.path(a, b).unwrap();
            (0..=cap).map(|n| vec![UNSET; s.len(n)]).collect()
        })
        .collect();
    let taken = search
        .pairs
        .iter()
        .map(|&p| {
            let t = search.target(p);
            (0..=cap).map(|n| vec![false; t.len(n)]).collect()
        })
        .collect();
    search.level(0, Assignment { img, taken }, out);
}

impl Search<'_> {
    fn target(&self, (a, b): Pair) -> &crate::simpset::FinSimplicialSet {
        self.y.path(self.map[a], self.map[b]).expect("state map checked")
    }

    /// Enters level `n`: forces degenerate simplices, then searches.
    fn level(&self, n: usize, mut asg: Assignment, out: &mut Vec<FlowMorphism>) {
        if out.len() >= self.limit {
            return;
        }
        if n > self.x.cap() {
            self.finish(&asg, out);
            return;
        }
        let mut queue = Vec::new();
        if n > 0 {
            for (pi, &(a, b)) in self.pairs.iter().enumerate() {
                let s = self.x.path(a, b).unwrap();
                let t = self.target((a, b));
                for k in 0..s.len(n) {
                    if !s.is_degenerate(n, k) || asg.img[pi][n][k] != UNSET {
                        continue;
                    }
                    let i = (0..n).find(|&i| s.degen(n - 1, i, s.face(n, i, k)) == k).unwrap();
                    let below = asg.img[pi][n - 1][s.face(n, i, k)] as usize;
                    let v = t.degen(n - 1, i, below);
                    if !self.assign(&mut asg, pi, n, k, v, &mut queue) {
                        return;
                    }
                }
            }
        }
        if !self.propagate(&mut asg, n, queue) {
            return;
        }
        self.fill(n, asg, out);
    }

    /// Assigns the next unassigned nondegenerate simplex at level `n`.
    fn fill(&self, n: usize, asg: Assignment, out: &mut Vec<FlowMorphism>) {
        let mut next = None;
        'outer: for (pi, &(a, b)) in self.pairs.iter().enumerate() {
            let s = self.x.path(a, b).unwrap();
            for k in 0..s.len(n) {
                if asg.img[pi][n][k] == UNSET {
                    next = Some((pi, k));
                    break 'outer;
                }
            }
        }
        let Some((pi, k)) = next else {
            self.level(n + 1, asg, out);
            return;
        };
        let (a, b) = self.pairs[pi];
        let t = self.target((a, b));
        for v in 0..t.len(n) {
            let mut trial = asg.clone();
            let mut queue = Vec::new();
            if self.assign(&mut trial, pi, n, k, v, &mut queue) && self.propagate(&mut trial, n, queue) {
                self.fill(n, trial, out);
            }
            if out.len() >= self.limit {
                return;
            }
        }
    }

    /// Records `img(k) = v` after checking faces and injectivity.
    fn assign(&self, asg: &mut Assignment, pi: usize, n: usize, k: usize, v: usize, queue: &mut Vec<(usize, usize)>) -> bool {
        let cur = asg.img[pi][n][k];
        if cur != UNSET {
            return cur as usize == v;
        }
        let (a, b) = self.pairs[pi];
        let s = self.x.path(a, b).unwrap();
        let t = self.target((a, b));
        if n > 0 && (0..=n).any(|i| t.face(n, i, v) != asg.img[pi][n - 1][s.face(n, i, k)] as usize) {
            return false;
        }
        if self.injective {
            if asg.taken[pi][n][v] {
                return false;
            }
            asg.taken[pi][n][v] = true;
        }
        asg.img[pi][n][k] = v as u32;
        queue.push((pi, k));
        true
    }

    /// Forces composites of assigned factors at level `n`.
    fn propagate(&self, asg: &mut Assignment, n: usize, mut queue: Vec<(usize, usize)>) -> bool {
        let (x, y, m) = (self.x, self.y, self.map);
        while let Some((pi, k)) = queue.pop() {
            let (a, b) = self.pairs[pi];
            let v = asg.img[pi][n][k] as usize;
            // k on the left
            for c in x.successors(b).collect::<Vec<_>>() {
                let qi = self.pair_index[&(b, c)];
                let ri = self.pair_index[&(a, c)];
                for j in 0..asg.img[qi][n].len() {
                    let w = asg.img[qi][n][j];
                    if w == UNSET {
                        continue;
                    }
                    let z = x.compose(a, b, c, n, k, j);
                    let fz = y.compose(m[a], m[b], m[c], n, v, w as usize);
                    if !self.assign(asg, ri, n, z, fz, &mut queue) {
                        return false;
                    }
                }
            }
            // k on the right
            for c in x.predecessors(a).collect::<Vec<_>>() {
                let qi = self.pair_index[&(c, a)];
                let ri = self.pair_index[&(c, b)];
                for j in 0..asg.img[qi][n].len() {
                    let w = asg.img[qi][n][j];
                    if w == UNSET {
                        continue;
                    }
                    let z = x.compose(c, a, b, n, j, k);
                    let fz = y.compose(m[c], m[a], m[b], n, w as usize, v);
                    if !self.assign(asg, ri, n, z, fz, &mut queue) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn finish(&self, asg: &Assignment, out: &mut Vec<FlowMorphism>) {
        let paths = self
            .pairs
            .iter()
            .enumerate()
            .map(|(pi, &p)| (p, SimplicialMap { levels: asg.img[pi].clone() }))
            .collect();
        let f = FlowMorphism { states: self.map.to_vec(), paths };
        debug_assert!(f.check(self.x, self.y).is_ok(), "search produced an invalid morphism");
        if f.check(self.x, self.y).is_ok() {
            out.push(f);
        }
    }
}
