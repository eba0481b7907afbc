//! Finite posets, chain lengths, order complexes and the exterior simplex
//! category with its direct-category degree.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simpset::{CellComplex, FinSimplicialSet};

/// A finite partially ordered set. The order is stored closed under
/// reflexivity and transitivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinPoset {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
}

impl FinPoset {
    /// Builds a poset from generating strict relations `a < b` (usually the
    /// covering relations). The reflexive-transitive closure is taken here.
    pub fn new<S: Into<String>>(names: Vec<S>, less: &[(usize, usize)]) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let n = names.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in less {
            if a >= n || b >= n {
                return Err(Error::UnknownState(format!("#{}", a.max(b))));
            }
            if a == b {
                return Err(Error::PartialOrderViolation(vec![names[a].clone()]));
            }
            leq[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i][j] && leq[j][i] {
                    return Err(Error::PartialOrderViolation(vec![
                        names[i].clone(),
                        names[j].clone(),
                    ]));
                }
            }
        }
        Ok(FinPoset { names, leq })
    }

    /// Builds a poset from element names and `a < b` name pairs.
    pub fn from_names(names: &[&str], less: &[(&str, &str)]) -> Result<Self> {
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut rel = Vec::with_capacity(less.len());
        for (a, b) in less {
            let ia = *index.get(a).ok_or_else(|| Error::UnknownState(a.to_string()))?;
            let ib = *index.get(b).ok_or_else(|| Error::UnknownState(b.to_string()))?;
            rel.push((ia, ib));
        }
        FinPoset::new(names.to_vec(), &rel)
    }

    /// The bounded poset `0 < A < B < 1`, `0 < C < 1` used throughout the
    /// examples and tests.
    pub fn figure_one() -> Self {
        FinPoset::from_names(
            &["0", "A", "B", "C", "1"],
            &[("0", "A"), ("A", "B"), ("B", "1"), ("0", "C"), ("C", "1")],
        )
        .expect("static poset")
    }

    /// The chain `0 < 1 < ... < k-1` with the given names.
    pub fn chain(names: &[&str]) -> Self {
        let rel: Vec<(usize, usize)> = (1..names.len()).map(|i| (i - 1, i)).collect();
        FinPoset::new(names.to_vec(), &rel).expect("chain is a partial order")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq[a][b]
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq[a][b] || self.leq[b][a]
    }

    /// Covering pairs `a ⋖ b`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.lt(a, b) && !(0..n).any(|c| self.lt(a, c) && self.lt(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Closed interval `[a, b]`, in element order.
    pub fn interval(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.len()).filter(|&z| self.leq[a][z] && self.leq[z][b]).collect()
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.len()).find(|&b| (0..self.len()).all(|x| self.leq[b][x]))
    }

    pub fn top(&self) -> Option<usize> {
        (0..self.len()).find(|&t| (0..self.len()).all(|x| self.leq[x][t]))
    }

    /// Bottom and top, if the poset is bounded with distinct extremes.
    pub fn bounds(&self) -> Option<(usize, usize)> {
        match (self.bottom(), self.top()) {
            (Some(b), Some(t)) if b != t => Some((b, t)),
            _ => None,
        }
    }

    pub fn validate(&self) -> PosetReport {
        let bounds = self.bounds();
        PosetReport {
            elements: self.len(),
            bounded: bounds.is_some(),
            locally_finite: true,
            bottom: bounds.map(|(b, _)| self.names[b].clone()),
            top: bounds.map(|(_, t)| self.names[t].clone()),
        }
    }

    /// Longest chain length between `a < b`.
    pub fn chain_length(&self, a: usize, b: usize) -> Result<usize> {
        if !self.lt(a, b) {
            return Err(Error::NotComparable(self.names[a].clone(), self.names[b].clone()));
        }
        Ok(self.length_table().get(a, b).expect("a < b"))
    }

    /// Longest-chain lengths for every strictly comparable pair, by dynamic
    /// programming over the Hasse diagram.
    pub fn length_table(&self) -> LengthTable {
        let n = self.len();
        let covers = self.covers();
        let mut up: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &covers {
            up[a].push(b);
        }
        // process sources in reverse linear extension: fewer elements above first
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| (0..n).filter(|&y| self.leq[x][y]).count());
        let mut table = vec![vec![None; n]; n];
        for &a in &order {
            table[a][a] = Some(0usize);
            for b in 0..n {
                if !self.lt(a, b) {
                    continue;
                }
                let best = up[a]
                    .iter()
                    .filter(|&&c| self.leq[c][b])
                    .map(|&c| table[c][b].expect("computed above") + 1)
                    .max();
                table[a][b] = best;
            }
        }
        for (a, row) in table.iter_mut().enumerate() {
            row[a] = None;
        }
        LengthTable { table }
    }

    /// The order complex: `n`-simplices are chains `x_0 < ... < x_n`.
    pub fn order_complex(&self, cap: usize) -> FinSimplicialSet {
        let mut cells = CellComplex::new();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut layer: Vec<Vec<usize>> = (0..self.len()).map(|x| vec![x]).collect();
        let mut dim = 0;
        while !layer.is_empty() {
            let mut next = Vec::new();
            for chain in &layer {
                let faces: Vec<usize> = if dim == 0 {
                    Vec::new()
                } else {
                    (0..chain.len())
                        .map(|i| {
                            let mut f = chain.clone();
                            f.remove(i);
                            index[&f]
                        })
                        .collect()
                };
                let name = format!(
                    "({})",
                    chain.iter().map(|&x| self.names[x].as_str()).collect::<Vec<_>>().join(",")
                );
                let id = cells.add(dim, name, faces).expect("chain faces are valid");
                index.insert(chain.clone(), id);
                let last = *chain.last().expect("nonempty chain");
                for y in 0..self.len() {
                    if self.lt(last, y) {
                        let mut c = chain.clone();
                        c.push(y);
                        next.push(c);
                    }
                }
            }
            layer = next;
            dim += 1;
        }
        FinSimplicialSet::from_cells(&cells, cap)
    }

    /// The exterior simplex category `Δ^ext(P)^op`.
    pub fn ext_category(&self) -> Result<ExtCategory> {
        let (bot, top) = self.bounds().ok_or(Error::NotBounded)?;
        let lengths = self.length_table();
        let mut objects: Vec<Vec<usize>> = Vec::new();
        let mut stack = vec![vec![bot]];
        while let Some(chain) = stack.pop() {
            let last = *chain.last().expect("nonempty");
            if last == top {
                objects.push(chain);
                continue;
            }
            for y in 0..self.len() {
                if self.lt(last, y) && self.leq[y][top] {
                    let mut c = chain.clone();
                    c.push(y);
                    stack.push(c);
                }
            }
        }
        objects.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let lookup: HashMap<Vec<usize>, usize> =
            objects.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
        let degree = objects
            .iter()
            .map(|o| {
                o.windows(2)
                    .map(|w| {
                        let l = lengths.get(w[0], w[1]).expect("chain") as u64;
                        l * l
                    })
                    .sum()
            })
            .collect();
        let mut arrows = Vec::new();
        for (src, o) in objects.iter().enumerate() {
            for i in 1..o.len().saturating_sub(1) {
                let mut t = o.clone();
                t.remove(i);
                arrows.push(ExtArrow { source: src, target: lookup[&t], index: i });
            }
        }
        let terminal = lookup[&vec![bot, top]];
        Ok(ExtCategory {
            names: self.names.clone(),
            objects,
            degree,
            arrows,
            terminal,
        })
    }

    /// Checks that generators raise the degree and that chain lengths are
    /// superadditive along every 2-simplex of the order complex.
    pub fn reedy_report(&self) -> Result<ReedyReport> {
        let cat = self.ext_category()?;
        let lengths = self.length_table();
        let mut degree_violations = Vec::new();
        for a in &cat.arrows {
            let (ds, dt) = (cat.degree[a.source], cat.degree[a.target]);
            if dt <= ds {
                degree_violations.push(DegreeViolation {
                    source: cat.object_label(a.source),
                    target: cat.object_label(a.target),
                    index: a.index,
                    source_degree: ds,
                    target_degree: dt,
                });
            }
        }
        let n = self.len();
        let mut triangles = 0;
        let mut triangle_violations = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if !self.lt(a, b) {
                    continue;
                }
                for c in 0..n {
                    if !self.lt(b, c) {
                        continue;
                    }
                    triangles += 1;
                    let (lab, lbc, lac) = (
                        lengths.get(a, b).unwrap(),
                        lengths.get(b, c).unwrap(),
                        lengths.get(a, c).unwrap(),
                    );
                    if lab + lbc > lac {
                        triangle_violations.push(TriangleViolation {
                            simplex: [a, b, c].map(|x| self.names[x].clone()),
                            lengths: [lab, lbc, lac],
                        });
                    }
                }
            }
        }
        Ok(ReedyReport {
            arrows_checked: cat.arrows.len(),
            triangles_checked: triangles,
            direct: degree_violations.is_empty() && triangle_violations.is_empty(),
            degree_violations,
            triangle_violations,
        })
    }

    /// Line-oriented text form accepted by the parser.
    pub fn to_text(&self, name: &str) -> String {
        let mut s = format!("poset {name}\nelem {}\n", self.names.join(" "));
        for (a, b) in self.covers() {
            let _ = writeln!(s, "rel {} < {}", self.names[a], self.names[b]);
        }
        s
    }

    /// Relabels so that element `i` of the result is element `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> FinPoset {
        let names = perm.iter().map(|&p| self.names[p].clone()).collect();
        let leq = perm
            .iter()
            .map(|&a| perm.iter().map(|&b| self.leq[a][b]).collect())
            .collect();
        FinPoset { names, leq }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetReport {
    pub elements: usize,
    pub bounded: bool,
    pub locally_finite: bool,
    pub bottom: Option<String>,
    pub top: Option<String>,
}

/// Table of longest-chain lengths `ℓ(a, b)` for `a < b`.
#[derive(Debug, Clone)]
pub struct LengthTable {
    table: Vec<Vec<Option<usize>>>,
}

impl LengthTable {
    pub fn get(&self, a: usize, b: usize) -> Option<usize> {
        self.table[a][b]
    }
}

/// Generating arrow `∂_index : source → target` of `Δ^ext(P)^op`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtArrow {
    pub source: usize,
    pub target: usize,
    pub index: usize,
}

/// The category of chains from bottom to top, with interior deletions as
/// generators and degree `Σ ℓ(α_i, α_{i+1})²`.
#[derive(Debug, Clone)]
pub struct ExtCategory {
    names: Vec<String>,
    pub objects: Vec<Vec<usize>>,
    pub degree: Vec<u64>,
    pub arrows: Vec<ExtArrow>,
    pub terminal: usize,
}

impl ExtCategory {
    pub fn object_label(&self, obj: usize) -> String {
        format!(
            "({})",
            self.objects[obj].iter().map(|&x| self.names[x].as_str()).collect::<Vec<_>>().join(",")
        )
    }

    pub fn object_index(&self, chain: &[usize]) -> Option<usize> {
        self.objects.iter().position(|o| o == chain)
    }

    /// The generator `∂_i` leaving `obj`, if `i` is interior.
    pub fn arrow(&self, obj: usize, i: usize) -> Option<usize> {
        self.arrows.iter().position(|a| a.source == obj && a.index == i)
    }

    /// Checks `∂_i ∂_j = ∂_{j-1} ∂_i` on objects for all `i < j`.
    pub fn simplicial_relations_hold(&self) -> bool {
        for (obj, o) in self.objects.iter().enumerate() {
            let p = o.len() - 1;
            for j in 2..p {
                for i in 1..j {
                    let lhs = self
                        .arrow(obj, j)
                        .and_then(|a| self.arrow(self.arrows[a].target, i))
                        .map(|a| self.arrows[a].target);
                    let rhs = self
                        .arrow(obj, i)
                        .and_then(|a| self.arrow(self.arrows[a].target, j - 1))
                        .map(|a| self.arrows[a].target);
                    if lhs.is_none() || lhs != rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether every object has an arrow path to the terminal object.
    pub fn terminal_reachable(&self) -> bool {
        (0..self.objects.len()).all(|mut o| {
            while o != self.terminal {
                match self.arrows.iter().find(|a| a.source == o) {
                    Some(a) => o = a.target,
                    None => return false,
                }
            }
            true
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeViolation {
    pub source: String,
    pub target: String,
    pub index: usize,
    pub source_degree: u64,
    pub target_degree: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleViolation {
    pub simplex: [String; 3],
    pub lengths: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReedyReport {
    pub arrows_checked: usize,
    pub triangles_checked: usize,
    pub direct: bool,
    pub degree_violations: Vec<DegreeViolation>,
    pub triangle_violations: Vec<TriangleViolation>,
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive longest chain by enumerating every chain from `a` to `b`.
    fn brute_length(p: &FinPoset, a: usize, b: usize) -> usize {
        fn go(p: &FinPoset, cur: usize, b: usize) -> Option<usize> {
            if cur == b {
                return Some(0);
            }
            (0..p.len())
                .filter(|&c| p.lt(cur, c) && p.leq(c, b))
                .filter_map(|c| go(p, c, b).map(|l| l + 1))
                .max()
        }
        go(p, a, b).unwrap()
    }

    fn brute_chains(p: &FinPoset) -> Vec<Vec<usize>> {
        let n = p.len();
        let mut out = Vec::new();
        for mask in 1u32..(1 << n) {
            let elems: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let mut sorted = elems.clone();
            sorted.sort_by_key(|&x| elems.iter().filter(|&&y| p.lt(y, x)).count());
            if sorted.windows(2).all(|w| p.lt(w[0], w[1])) {
                out.push(sorted);
            }
        }
        out
    }

    #[test]
    fn figure_one_is_bounded() {
        let p = FinPoset::figure_one();
        let r = p.validate();
        assert!(r.bounded && r.locally_finite);
        assert_eq!(r.bottom.as_deref(), Some("0"));
        assert_eq!(r.top.as_deref(), Some("1"));
    }

    #[test]
    fn singleton_and_antichain_are_unbounded() {
        let p = FinPoset::from_names(&["x"], &[]).unwrap();
        assert!(!p.validate().bounded);
        let q = FinPoset::from_names(&["a", "b"], &[]).unwrap();
        assert!(!q.validate().bounded);
    }

    #[test]
    fn cycle_is_rejected() {
        let err = FinPoset::from_names(&["a", "b"], &[("a", "b"), ("b", "a")]).unwrap_err();
        assert!(matches!(err, Error::PartialOrderViolation(_)));
    }

    #[test]
    fn chain_lengths_on_figure_one() {
        let p = FinPoset::figure_one();
        let i = |s| p.index_of(s).unwrap();
        assert_eq!(p.chain_length(i("0"), i("1")).unwrap(), 3);
        assert_eq!(p.chain_length(i("0"), i("A")).unwrap(), 1);
        assert_eq!(p.chain_length(i("A"), i("1")).unwrap(), 2);
        assert!(matches!(p.chain_length(i("A"), i("C")), Err(Error::NotComparable(..))));
        assert!(matches!(p.chain_length(i("A"), i("A")), Err(Error::NotComparable(..))));
        for a in 0..p.len() {
            for b in 0..p.len() {
                if p.lt(a, b) {
                    assert_eq!(p.chain_length(a, b).unwrap(), brute_length(&p, a, b));
                }
            }
        }
    }

    #[test]
    fn order_complex_matches_chain_enumeration() {
        let p = FinPoset::figure_one();
        let chains = brute_chains(&p);
        let k = p.order_complex(4);
        for n in 0..=3 {
            let expected = chains.iter().filter(|c| c.len() == n + 1).count();
            assert_eq!(k.nondegenerate(n).count(), expected, "level {n}");
        }
        // 5 vertices, 8 comparable pairs, 5 triangles, 1 tetrahedron
        assert_eq!(
            (0..=3).map(|n| k.nondegenerate(n).count()).collect::<Vec<_>>(),
            vec![5, 8, 5, 1]
        );
        let two = FinPoset::chain(&["0", "1"]).order_complex(2);
        assert_eq!(two.nondegenerate(0).count(), 2);
        assert_eq!(two.nondegenerate(1).count(), 1);
        let anti = FinPoset::from_names(&["a", "b"], &[]).unwrap().order_complex(2);
        assert_eq!(anti.nondegenerate(0).count(), 2);
        assert_eq!(anti.nondegenerate(1).count(), 0);
        assert!(k.check_identities().is_ok());
    }

    #[test]
    fn ext_category_of_figure_one() {
        let p = FinPoset::figure_one();
        let cat = p.ext_category().unwrap();
        let labels: Vec<String> = (0..cat.objects.len()).map(|o| cat.object_label(o)).collect();
        assert_eq!(labels, vec!["(0,A,B,1)", "(0,A,1)", "(0,B,1)", "(0,C,1)", "(0,1)"]);
        assert_eq!(cat.degree, vec![3, 5, 5, 2, 9]);
        let mut arrows: Vec<(String, String)> = cat
            .arrows
            .iter()
            .map(|a| (cat.object_label(a.source), cat.object_label(a.target)))
            .collect();
        arrows.sort();
        assert_eq!(
            arrows,
            vec![
                ("(0,A,1)".into(), "(0,1)".into()),
                ("(0,A,B,1)".into(), "(0,A,1)".into()),
                ("(0,A,B,1)".into(), "(0,B,1)".into()),
                ("(0,B,1)".into(), "(0,1)".into()),
                ("(0,C,1)".into(), "(0,1)".into()),
            ]
        );
        assert_eq!(cat.object_label(cat.terminal), "(0,1)");
        assert!(cat.simplicial_relations_hold());
        assert!(cat.terminal_reachable());
    }

    #[test]
    fn ext_category_of_two_chain_and_unbounded() {
        let cat = FinPoset::chain(&["0", "1"]).ext_category().unwrap();
        assert_eq!(cat.objects.len(), 1);
        assert!(cat.arrows.is_empty());
        let r = FinPoset::chain(&["0", "1"]).reedy_report().unwrap();
        assert!(r.direct && r.arrows_checked == 0);
        let anti = FinPoset::from_names(&["a", "b"], &[]).unwrap();
        assert!(matches!(anti.ext_category(), Err(Error::NotBounded)));
    }

    #[test]
    fn reedy_report_on_figure_one() {
        let p = FinPoset::figure_one();
        let r = p.reedy_report().unwrap();
        assert!(r.direct);
        assert_eq!(r.arrows_checked, 5);
        // 2-simplices of the order complex
        assert_eq!(r.triangles_checked, 5);
        let lt = p.length_table();
        let i = |s| p.index_of(s).unwrap();
        assert_eq!(lt.get(i("0"), i("A")).unwrap() + lt.get(i("A"), i("1")).unwrap(), 3);
        assert_eq!(lt.get(i("0"), i("1")), Some(3));
    }

    #[test]
    fn text_form_lists_covers() {
        let text = FinPoset::figure_one().to_text("fig1");
        assert_eq!(text.lines().filter(|l| l.starts_with("rel")).count(), 5);
    }
}
