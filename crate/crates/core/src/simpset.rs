//! Finite simplicial sets truncated at a dimension cap, stored as explicit
//! face and degeneracy tables (degenerate simplices included).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::homology::{ChainComplex, IntMatrix};

/// Default truncation dimension.
pub const DEFAULT_CAP: usize = 3;

#[derive(Debug, Clone)]
struct Cell {
    name: String,
    faces: Vec<usize>,
}

/// Nondegenerate cells with face assignments (a semi-simplicial set). The
/// free simplicial set on it is built by [`FinSimplicialSet::from_cells`].
#[derive(Debug, Clone, Default)]
pub struct CellComplex {
    cells: Vec<Vec<Cell>>,
}

impl CellComplex {
    pub fn new() -> Self {
        CellComplex::default()
    }

    /// Adds a cell of dimension `dim` whose `i`-th face is cell `faces[i]`
    /// of dimension `dim - 1`. Returns its index within its dimension.
    pub fn add(&mut self, dim: usize, name: impl Into<String>, faces: Vec<usize>) -> Result<usize> {
        let name = name.into();
        let expected = if dim == 0 { 0 } else { dim + 1 };
        if faces.len() != expected {
            return Err(Error::InvalidSimplicial(format!(
                "cell {name} of dimension {dim} needs {expected} faces, got {}",
                faces.len()
            )));
        }
        if dim > 0 {
            let below = self.cells.get(dim - 1).map_or(0, Vec::len);
            if let Some(&f) = faces.iter().find(|&&f| f >= below) {
                return Err(Error::InvalidSimplicial(format!(
                    "cell {name}: face {f} does not exist in dimension {}",
                    dim - 1
                )));
            }
        }
        if dim >= 2 {
            let lower = &self.cells[dim - 1];
            for j in 1..=dim {
                for i in 0..j {
                    let a = lower[faces[j]].faces[i];
                    let b = lower[faces[i]].faces[j - 1];
                    if a != b {
                        return Err(Error::InvalidSimplicial(format!(
                            "cell {name}: d{i}d{j} != d{}d{i}",
                            j - 1
                        )));
                    }
                }
            }
        }
        while self.cells.len() <= dim {
            self.cells.push(Vec::new());
        }
        self.cells[dim].push(Cell { name, faces });
        Ok(self.cells[dim].len() - 1)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.cells.get(dim).map_or(0, Vec::len)
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.cells.iter().rposition(|c| !c.is_empty())
    }

    pub fn name(&self, dim: usize, idx: usize) -> &str {
        &self.cells[dim][idx].name
    }

    pub fn faces(&self, dim: usize, idx: usize) -> &[usize] {
        &self.cells[dim][idx].faces
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Level {
    len: usize,
    /// `faces[k * (n + 1) + i] = d_i(k)`, empty at level 0.
    faces: Vec<u32>,
    /// `degens[k * (n + 1) + i] = s_i(k)`, empty at the cap.
    degens: Vec<u32>,
    degenerate: Vec<bool>,
    names: Vec<String>,
}

/// A finite simplicial set truncated at dimension `cap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinSimplicialSet {
    cap: usize,
    levels: Vec<Level>,
}

/// Raw level tables: `(faces, degeneracies, names)` per level, flattened as
/// in the stored representation.
pub type RawLevel = (Vec<u32>, Vec<u32>, Vec<String>);

impl FinSimplicialSet {
    /// Assembles a simplicial set from raw tables. Degeneracy flags are
    /// derived; identities are not checked (see [`Self::check_identities`]).
    pub fn from_raw(cap: usize, raw: Vec<RawLevel>) -> Self {
        assert_eq!(raw.len(), cap + 1, "one table per level");
        let mut levels: Vec<Level> = raw
            .into_iter()
            .enumerate()
            .map(|(n, (faces, degens, names))| {
                let len = names.len();
                debug_assert!(n == 0 || faces.len() == len * (n + 1));
                Level { len, faces, degens, degenerate: vec![false; len], names }
            })
            .collect();
        for n in 1..=cap {
            let flags: Vec<bool> = (0..levels[n].len)
                .map(|k| {
                    (0..n).any(|i| {
                        let f = levels[n].faces[k * (n + 1) + i] as usize;
                        levels[n - 1].degens[f * n + i] as usize == k
                    })
                })
                .collect();
            levels[n].degenerate = flags;
        }
        FinSimplicialSet { cap, levels }
    }

    /// The free simplicial set generated by `cells`, truncated at `cap`.
    pub fn from_cells(cells: &CellComplex, cap: usize) -> Self {
        // simplices at level n are pairs (surjection [n] -> [m], m-cell)
        let mut keys: Vec<Vec<(Vec<u8>, usize)>> = Vec::with_capacity(cap + 1);
        let mut index: Vec<HashMap<(Vec<u8>, usize), u32>> = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let mut ks = Vec::new();
            for m in 0..=n {
                let count = cells.count(m);
                if count == 0 {
                    continue;
                }
                for sigma in surjections(n, m) {
                    for y in 0..count {
                        ks.push((sigma.clone(), y));
                    }
                }
            }
            let ix = ks.iter().enumerate().map(|(i, k)| (k.clone(), i as u32)).collect();
            keys.push(ks);
            index.push(ix);
        }
        let mut raw = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let ks = &keys[n];
            let mut faces = Vec::new();
            let mut degens = Vec::new();
            let mut names = Vec::with_capacity(ks.len());
            for (sigma, y) in ks {
                let m = *sigma.last().unwrap() as usize;
                let base = cells.name(m, *y);
                if n == m {
                    names.push(base.to_string());
                } else {
                    let digits: String = sigma.iter().map(|d| char::from(b'0' + d)).collect();
                    names.push(format!("{base}[{digits}]"));
                }
                if n > 0 {
                    for i in 0..=n {
                        let mut tau = sigma.clone();
                        let j = tau.remove(i);
                        let key = if tau.contains(&j) {
                            (tau, *y)
                        } else {
                            for t in tau.iter_mut() {
                                if *t > j {
                                    *t -= 1;
                                }
                            }
                            (tau, cells.faces(m, *y)[j as usize])
                        };
                        faces.push(index[n - 1][&key]);
                    }
                }
                if n < cap {
                    for i in 0..=n {
                        let mut tau = sigma.clone();
                        tau.insert(i, sigma[i]);
                        degens.push(index[n + 1][&(tau, *y)]);
                    }
                }
            }
            raw.push((faces, degens, names));
        }
        FinSimplicialSet::from_raw(cap, raw)
    }

    pub fn empty(cap: usize) -> Self {
        FinSimplicialSet::from_cells(&CellComplex::new(), cap)
    }

    pub fn point(cap: usize) -> Self {
        FinSimplicialSet::discrete(&["pt"], cap)
    }

    pub fn discrete(names: &[&str], cap: usize) -> Self {
        let mut c = CellComplex::new();
        for n in names {
            c.add(0, *n, vec![]).expect("vertex");
        }
        FinSimplicialSet::from_cells(&c, cap)
    }

    /// The standard simplex `Δ^k`: nondegenerate simplices are the nonempty
    /// subsets of `{0..k}`.
    pub fn standard_simplex(k: usize, cap: usize) -> Self {
        let mut c = CellComplex::new();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        for dim in 0..=k {
            for subset in subsets_of_size(k + 1, dim + 1) {
                let faces = if dim == 0 {
                    vec![]
                } else {
                    (0..=dim)
                        .map(|i| {
                            let mut f = subset.clone();
                            f.remove(i);
                            index[&f]
                        })
                        .collect()
                };
                let name = subset.iter().map(|v| v.to_string()).collect::<String>();
                let id = c.add(dim, name, faces).expect("simplex faces");
                index.insert(subset, id);
            }
        }
        FinSimplicialSet::from_cells(&c, cap)
    }

    /// One vertex and one loop edge.
    pub fn circle(cap: usize) -> Self {
        let mut c = CellComplex::new();
        c.add(0, "v", vec![]).unwrap();
        c.add(1, "e", vec![0, 0]).unwrap();
        FinSimplicialSet::from_cells(&c, cap)
    }

    /// Two vertices, three edges, two triangles; first homology is `ℤ/2`.
    pub fn projective_plane(cap: usize) -> Self {
        let mut c = CellComplex::new();
        c.add(0, "v", vec![]).unwrap();
        c.add(0, "w", vec![]).unwrap();
        c.add(1, "a", vec![1, 1]).unwrap();
        c.add(1, "b", vec![1, 0]).unwrap();
        c.add(1, "c", vec![1, 0]).unwrap();
        c.add(2, "t", vec![0, 1, 2]).unwrap();
        c.add(2, "u", vec![0, 2, 1]).unwrap();
        FinSimplicialSet::from_cells(&c, cap)
    }

    /// `Δ²` with its boundary collapsed to a point.
    pub fn sphere2(cap: usize) -> Self {
        let d2 = FinSimplicialSet::standard_simplex(2, cap);
        let s0v = d2.degen(0, 0, 0);
        let mut seeds = vec![(0, 0, 1), (0, 0, 2)];
        seeds.extend(d2.nondegenerate(1).map(|e| (1, e, s0v)));
        d2.quotient(&seeds).0
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of simplices (degenerate included) at level `n`.
    pub fn len(&self, n: usize) -> usize {
        self.levels[n].len
    }

    pub fn is_empty(&self) -> bool {
        self.levels[0].len == 0
    }

    pub fn total(&self) -> usize {
        self.levels.iter().map(|l| l.len).sum()
    }

    /// `d_i` of simplex `k` at level `n >= 1`.
    pub fn face(&self, n: usize, i: usize, k: usize) -> usize {
        self.levels[n].faces[k * (n + 1) + i] as usize
    }

    /// `s_i` of simplex `k` at level `n < cap`.
    pub fn degen(&self, n: usize, i: usize, k: usize) -> usize {
        self.levels[n].degens[k * (n + 1) + i] as usize
    }

    pub fn is_degenerate(&self, n: usize, k: usize) -> bool {
        self.levels[n].degenerate[k]
    }

    pub fn name(&self, n: usize, k: usize) -> &str {
        &self.levels[n].names[k]
    }

    pub fn nondegenerate(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        let l = &self.levels[n];
        (0..l.len).filter(move |&k| !l.degenerate[k])
    }

    /// `s_0` iterated `n` times on vertex `v`.
    pub fn constant(&self, v: usize, n: usize) -> usize {
        (0..n).fold(v, |k, lvl| self.degen(lvl, 0, k))
    }

    /// Checks all simplicial identities within the cap.
    pub fn check_identities(&self) -> std::result::Result<(), String> {
        let cap = self.cap;
        for n in 2..=cap {
            for k in 0..self.len(n) {
                for j in 1..=n {
                    for i in 0..j {
                        let a = self.face(n - 1, i, self.face(n, j, k));
                        let b = self.face(n - 1, j - 1, self.face(n, i, k));
                        if a != b {
                            return Err(format!("level {n} simplex {k}: d{i}d{j} != d{}d{i}", j - 1));
                        }
                    }
                }
            }
        }
        for n in 0..cap {
            for k in 0..self.len(n) {
                for j in 0..=n {
                    let sj = self.degen(n, j, k);
                    for i in 0..=(n + 1) {
                        let lhs = self.face(n + 1, i, sj);
                        let ok = if i == j || i == j + 1 {
                            lhs == k
                        } else if i < j {
                            lhs == self.degen(n - 1, j - 1, self.face(n, i, k))
                        } else {
                            lhs == self.degen(n - 1, j, self.face(n, i - 1, k))
                        };
                        if !ok {
                            return Err(format!("level {n} simplex {k}: d{i}s{j} identity fails"));
                        }
                    }
                    if n + 1 < cap {
                        for i in 0..=j {
                            let a = self.degen(n + 1, i, sj);
                            let b = self.degen(n + 1, j + 1, self.degen(n, i, k));
                            if a != b {
                                return Err(format!("level {n} simplex {k}: s{i}s{j} != s{}s{i}", j + 1));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn product(&self, other: &FinSimplicialSet) -> Result<FinSimplicialSet> {
        if self.cap != other.cap {
            return Err(Error::CapMismatch(self.cap, other.cap));
        }
        let cap = self.cap;
        let mut raw = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let (la, lb) = (self.len(n), other.len(n));
            let mut faces = Vec::new();
            let mut degens = Vec::new();
            let mut names = Vec::with_capacity(la * lb);
            for a in 0..la {
                for b in 0..lb {
                    names.push(format!("({},{})", self.name(n, a), other.name(n, b)));
                    if n > 0 {
                        let lb1 = other.len(n - 1);
                        for i in 0..=n {
                            faces.push((self.face(n, i, a) * lb1 + other.face(n, i, b)) as u32);
                        }
                    }
                    if n < cap {
                        let lb1 = other.len(n + 1);
                        for i in 0..=n {
                            degens.push((self.degen(n, i, a) * lb1 + other.degen(n, i, b)) as u32);
                        }
                    }
                }
            }
            raw.push((faces, degens, names));
        }
        Ok(FinSimplicialSet::from_raw(cap, raw))
    }

    pub fn disjoint_union(parts: &[&FinSimplicialSet]) -> Result<FinSimplicialSet> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidSimplicial("disjoint union of no parts needs a cap".into()));
        };
        let cap = first.cap;
        if let Some(p) = parts.iter().find(|p| p.cap != cap) {
            return Err(Error::CapMismatch(cap, p.cap));
        }
        let mut raw = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let mut faces = Vec::new();
            let mut degens = Vec::new();
            let mut names = Vec::new();
            let (mut off_below, mut off_above) = (0u32, 0u32);
            for p in parts {
                for k in 0..p.len(n) {
                    names.push(p.name(n, k).to_string());
                    if n > 0 {
                        for i in 0..=n {
                            faces.push(off_below + p.face(n, i, k) as u32);
                        }
                    }
                    if n < cap {
                        for i in 0..=n {
                            degens.push(off_above + p.degen(n, i, k) as u32);
                        }
                    }
                }
                if n > 0 {
                    off_below += p.len(n - 1) as u32;
                }
                if n < cap {
                    off_above += p.len(n + 1) as u32;
                }
            }
            raw.push((faces, degens, names));
        }
        Ok(FinSimplicialSet::from_raw(cap, raw))
    }

    /// Quotient by the smallest equivalence relation containing the seed
    /// pairs `(level, a, b)` and closed under all faces and degeneracies.
    pub fn quotient(&self, seeds: &[(usize, usize, usize)]) -> (FinSimplicialSet, SimplicialMap) {
        let cap = self.cap;
        let offsets: Vec<usize> = self
            .levels
            .iter()
            .scan(0, |acc, l| {
                let o = *acc;
                *acc += l.len;
                Some(o)
            })
            .collect();
        let mut uf = UnionFind::new(self.total());
        let mut work: Vec<(usize, usize, usize)> = seeds.to_vec();
        while let Some((n, a, b)) = work.pop() {
            if !uf.union(offsets[n] + a, offsets[n] + b) {
                continue;
            }
            if n > 0 {
                for i in 0..=n {
                    work.push((n - 1, self.face(n, i, a), self.face(n, i, b)));
                }
            }
            if n < cap {
                for i in 0..=n {
                    work.push((n + 1, self.degen(n, i, a), self.degen(n, i, b)));
                }
            }
        }
        let mut proj: Vec<Vec<u32>> = Vec::with_capacity(cap + 1);
        let mut reps: Vec<Vec<usize>> = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let mut class_of_root: HashMap<usize, u32> = HashMap::new();
            let mut map = Vec::with_capacity(self.len(n));
            let mut rep = Vec::new();
            for k in 0..self.len(n) {
                let root = uf.find(offsets[n] + k);
                let next = class_of_root.len() as u32;
                let c = *class_of_root.entry(root).or_insert_with(|| {
                    rep.push(k);
                    next
                });
                map.push(c);
            }
            proj.push(map);
            reps.push(rep);
        }
        let mut raw = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let mut faces = Vec::new();
            let mut degens = Vec::new();
            let mut names = Vec::new();
            for &k in &reps[n] {
                names.push(self.name(n, k).to_string());
                if n > 0 {
                    for i in 0..=n {
                        faces.push(proj[n - 1][self.face(n, i, k)]);
                    }
                }
                if n < cap {
                    for i in 0..=n {
                        degens.push(proj[n + 1][self.degen(n, i, k)]);
                    }
                }
            }
            raw.push((faces, degens, names));
        }
        (FinSimplicialSet::from_raw(cap, raw), SimplicialMap { levels: proj })
    }

    /// Connected components of the vertex set under "shares a 1-simplex".
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.len(0));
        if self.cap >= 1 {
            for k in 0..self.len(1) {
                uf.union(self.face(1, 0, k), self.face(1, 1, k));
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for v in 0..self.len(0) {
            let r = uf.find(v);
            let g = *slot.entry(r).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(v);
        }
        groups
    }

    /// Normalized chains: free on nondegenerate simplices, degenerate faces
    /// sent to zero.
    pub fn normalized_chains(&self) -> ChainComplex {
        let cap = self.cap;
        let basis: Vec<Vec<usize>> = (0..=cap).map(|n| self.nondegenerate(n).collect()).collect();
        let position: Vec<HashMap<usize, usize>> = basis
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, &k)| (k, i)).collect())
            .collect();
        let mut boundaries = Vec::with_capacity(cap);
        for n in 1..=cap {
            let mut m = IntMatrix::zeros(basis[n - 1].len(), basis[n].len());
            for (col, &k) in basis[n].iter().enumerate() {
                for i in 0..=n {
                    let f = self.face(n, i, k);
                    if let Some(&row) = position[n - 1].get(&f) {
                        let sign = if i % 2 == 0 { 1 } else { -1 };
                        m.add_to(row, col, sign);
                    }
                }
            }
            boundaries.push(m);
        }
        ChainComplex::new(basis.iter().map(Vec::len).collect(), boundaries)
            .expect("normalized boundary squares to zero")
    }

    /// Applies per-level permutations: simplex `k` of level `n` becomes
    /// `perm[n][k]`.
    pub fn relabeled(&self, perm: &[Vec<usize>]) -> FinSimplicialSet {
        let cap = self.cap;
        let mut raw = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let len = self.len(n);
            let mut inv = vec![0; len];
            for (k, &p) in perm[n].iter().enumerate() {
                inv[p] = k;
            }
            let mut faces = Vec::new();
            let mut degens = Vec::new();
            let mut names = Vec::with_capacity(len);
            for &k in &inv {
                names.push(self.name(n, k).to_string());
                if n > 0 {
                    for i in 0..=n {
                        faces.push(perm[n - 1][self.face(n, i, k)] as u32);
                    }
                }
                if n < cap {
                    for i in 0..=n {
                        degens.push(perm[n + 1][self.degen(n, i, k)] as u32);
                    }
                }
            }
            raw.push((faces, degens, names));
        }
        FinSimplicialSet::from_raw(cap, raw)
    }
}

/// Per-level simplex functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialMap {
    pub levels: Vec<Vec<u32>>,
}

impl SimplicialMap {
    pub fn identity(s: &FinSimplicialSet) -> Self {
        SimplicialMap {
            levels: (0..=s.cap).map(|n| (0..s.len(n) as u32).collect()).collect(),
        }
    }

    pub fn apply(&self, n: usize, k: usize) -> usize {
        self.levels[n][k] as usize
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SimplicialMap) -> SimplicialMap {
        SimplicialMap {
            levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(n, l)| l.iter().map(|&k| other.levels[n][k as usize]).collect())
                .collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        self.levels.iter().all(|l| {
            let mut seen = std::collections::HashSet::new();
            l.iter().all(|k| seen.insert(*k))
        })
    }

    /// Checks that the map commutes with faces and degeneracies.
    pub fn check(&self, src: &FinSimplicialSet, dst: &FinSimplicialSet) -> std::result::Result<(), String> {
        if src.cap != dst.cap {
            return Err("cap mismatch".into());
        }
        for n in 0..=src.cap {
            if self.levels[n].len() != src.len(n) {
                return Err(format!("level {n} has the wrong size"));
            }
            for k in 0..src.len(n) {
                let fk = self.apply(n, k);
                if fk >= dst.len(n) {
                    return Err(format!("level {n}: image out of range"));
                }
                if n > 0 {
                    for i in 0..=n {
                        if self.apply(n - 1, src.face(n, i, k)) != dst.face(n, i, fk) {
                            return Err(format!("level {n} simplex {k}: d{i} not preserved"));
                        }
                    }
                }
                if n < src.cap {
                    for i in 0..=n {
                        if self.apply(n + 1, src.degen(n, i, k)) != dst.degen(n, i, fk) {
                            return Err(format!("level {n} simplex {k}: s{i} not preserved"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Monotone surjections `[n] -> [m]` as value sequences.
fn surjections(n: usize, m: usize) -> Vec<Vec<u8>> {
    // choose which m of the n steps increment
    subsets_of_size(n, m)
        .into_iter()
        .map(|steps| {
            let mut seq = vec![0u8];
            let mut v = 0u8;
            for s in 0..n {
                if steps.contains(&s) {
                    v += 1;
                }
                seq.push(v);
            }
            seq
        })
        .collect()
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if two distinct classes were merged.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}
