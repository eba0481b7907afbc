//! Integer homology through Smith normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simpset::FinSimplicialSet;

/// Dense integer matrix, row-major, arbitrary precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = IntMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m.data[i * c + j] = BigInt::from(v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += q * row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * q;
            if !v.is_zero() {
                self.data[dst * self.cols + j] += v;
            }
        }
    }

    /// col[dst] += q * col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * q;
            if !v.is_zero() {
                self.data[i * self.cols + dst] += v;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = &mut self.data[r * self.cols + j];
            *v = -std::mem::take(v);
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Smith normal form with unimodular certificates `U · M · V = D`.
#[derive(Debug, Clone)]
pub struct SnfResult {
    /// Nonzero diagonal entries, positive, each dividing the next.
    pub diagonal: Vec<BigInt>,
    /// The full diagonalized matrix `D`.
    pub d: IntMatrix,
    pub u: Option<IntMatrix>,
    pub v: Option<IntMatrix>,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    /// Checks `U · M · V = D` exactly.
    pub fn verify(&self, m: &IntMatrix) -> bool {
        match (&self.u, &self.v) {
            (Some(u), Some(v)) => u.mul(m).mul(v) == self.d,
            _ => false,
        }
    }
}

/// Computes the Smith normal form. Pivots are chosen as the entry of least
/// absolute value to keep intermediate coefficients small.
pub fn smith_normal_form(m: &IntMatrix, certificates: bool) -> SnfResult {
    let mut a = m.clone();
    let mut u = certificates.then(|| IntMatrix::identity(m.rows));
    let mut v = certificates.then(|| IntMatrix::identity(m.cols));
    let (rows, cols) = (a.rows, a.cols);
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = min_entry(&a, t..rows, t..cols) else {
            break;
        };
        a.swap_rows(t, pi);
        if let Some(u) = u.as_mut() {
            u.swap_rows(t, pi);
        }
        a.swap_cols(t, pj);
        if let Some(v) = v.as_mut() {
            v.swap_cols(t, pj);
        }
        loop {
            let pivot = a.get(t, t).clone();
            let mut clean = true;
            for i in (t + 1)..rows {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = -(a.get(i, t).div_floor(&pivot));
                a.add_row(i, t, &q);
                if let Some(u) = u.as_mut() {
                    u.add_row(i, t, &q);
                }
                if !a.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in (t + 1)..cols {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = -(a.get(t, j).div_floor(&pivot));
                a.add_col(j, t, &q);
                if let Some(v) = v.as_mut() {
                    v.add_col(j, t, &q);
                }
                if !a.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // a remainder smaller than the pivot is left in row or column t
                let best_row = ((t + 1)..rows)
                    .filter(|&i| !a.get(i, t).is_zero())
                    .min_by_key(|&i| a.get(i, t).abs());
                let best_col = ((t + 1)..cols)
                    .filter(|&j| !a.get(t, j).is_zero())
                    .min_by_key(|&j| a.get(t, j).abs());
                let row_val = best_row.map(|i| a.get(i, t).abs());
                let col_val = best_col.map(|j| a.get(t, j).abs());
                let use_row = match (&row_val, &col_val) {
                    (Some(r), Some(c)) => r <= c,
                    (Some(_), None) => true,
                    _ => false,
                };
                if use_row {
                    let i = best_row.unwrap();
                    a.swap_rows(t, i);
                    if let Some(u) = u.as_mut() {
                        u.swap_rows(t, i);
                    }
                } else {
                    let j = best_col.unwrap();
                    a.swap_cols(t, j);
                    if let Some(v) = v.as_mut() {
                        v.swap_cols(t, j);
                    }
                }
                continue;
            }
            // row and column are clear; enforce divisibility of the rest
            let bad = ((t + 1)..rows).find(|&i| {
                ((t + 1)..cols).any(|j| !a.get(i, j).is_multiple_of(&pivot))
            });
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row(t, i, &one);
                    if let Some(u) = u.as_mut() {
                        u.add_row(t, i, &one);
                    }
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            if let Some(u) = u.as_mut() {
                u.negate_row(t);
            }
        }
        t += 1;
    }
    let diagonal = (0..rows.min(cols))
        .map(|i| a.get(i, i).clone())
        .take_while(|d| !d.is_zero())
        .collect();
    SnfResult { diagonal, d: a, u, v }
}

fn min_entry(
    a: &IntMatrix,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for i in rows {
        for j in cols.clone() {
            let v = a.get(i, j);
            if v.is_zero() {
                continue;
            }
            let av = v.abs();
            if best.as_ref().is_none_or(|b| av < b.2) {
                let done = av.is_one();
                best = Some((i, j, av));
                if done {
                    return best.map(|b| (b.0, b.1));
                }
            }
        }
    }
    best.map(|b| (b.0, b.1))
}

/// A bounded chain complex of free abelian groups, `∂_n : C_n → C_{n-1}`.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    ranks: Vec<usize>,
    /// `boundaries[n - 1]` is `∂_n`, of shape `ranks[n-1] × ranks[n]`.
    boundaries: Vec<IntMatrix>,
}

impl ChainComplex {
    pub fn new(ranks: Vec<usize>, boundaries: Vec<IntMatrix>) -> Result<Self> {
        if boundaries.len() + 1 != ranks.len() {
            return Err(Error::InvalidSimplicial("one boundary per positive degree".into()));
        }
        for (n, b) in boundaries.iter().enumerate() {
            if b.rows != ranks[n] || b.cols != ranks[n + 1] {
                return Err(Error::InvalidSimplicial(format!("boundary {} has the wrong shape", n + 1)));
            }
        }
        for w in boundaries.windows(2) {
            if !w[0].mul(&w[1]).is_zero() {
                return Err(Error::InvalidSimplicial("boundary does not square to zero".into()));
            }
        }
        Ok(ChainComplex { ranks, boundaries })
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn top_degree(&self) -> usize {
        self.ranks.len() - 1
    }

    /// `∂_n`, or `None` for `n = 0`.
    pub fn boundary(&self, n: usize) -> Option<&IntMatrix> {
        n.checked_sub(1).map(|k| &self.boundaries[k])
    }

    /// `H_n`; needs `∂_{n+1}`, so `n` must be below the top degree.
    pub fn homology(&self, n: usize) -> Result<HomologyGroup> {
        let top = self.top_degree();
        if n >= top {
            return Err(Error::DegreeOutOfRange { degree: n, max: top });
        }
        let rank_out = self.boundary(n).map_or(0, |b| smith_normal_form(b, false).rank());
        let incoming = smith_normal_form(&self.boundaries[n], false);
        let betti = self.ranks[n] - rank_out - incoming.rank();
        let torsion = incoming
            .diagonal
            .iter()
            .filter(|d| !d.is_one())
            .map(ToString::to_string)
            .collect();
        Ok(HomologyGroup { betti, torsion })
    }
}

/// `ℤ^betti ⊕ ⊕ ℤ/t`. Torsion coefficients are decimal strings so that
/// arbitrarily large divisors survive serialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub betti: usize,
    pub torsion: Vec<String>,
}

impl HomologyGroup {
    pub fn free(betti: usize) -> Self {
        HomologyGroup { betti, torsion: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Homology in every computable degree `0..cap`.
pub fn homology_profile(s: &FinSimplicialSet) -> Vec<HomologyGroup> {
    let c = s.normalized_chains();
    (0..c.top_degree()).map(|n| c.homology(n).expect("degree in range")).collect()
}

/// Connected with vanishing reduced homology in degrees `1..cap`. This is
/// the computable stand-in for weak contractibility.
pub fn is_homology_contractible(s: &FinSimplicialSet) -> Result<bool> {
    if s.is_empty() {
        return Err(Error::EmptyComplex);
    }
    let profile = homology_profile(s);
    Ok(profile.first().is_none_or(|h0| *h0 == HomologyGroup::free(1))
        && s.components().len() == 1
        && profile.iter().skip(1).all(HomologyGroup::is_trivial))
}
