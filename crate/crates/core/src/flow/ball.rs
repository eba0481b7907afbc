//! Joins of flows and the diagram of iterated joins over the chains of a
//! full directed ball.

use std::collections::{BTreeMap, HashMap};

use super::{CombFlow, FlowMorphism};
use crate::error::{Error, Result};
use crate::poset::{ExtCategory, FinPoset};
use crate::presentation::{colimit, Colimit};

fn unique_final(x: &CombFlow) -> Result<usize> {
    match x.final_states()[..] {
        [s] => Ok(s),
        _ => Err(Error::NotJoinable(format!("flow has final states {:?}", names(x, &x.final_states())))),
    }
}

fn unique_initial(x: &CombFlow) -> Result<usize> {
    match x.initial_states()[..] {
        [s] => Ok(s),
        _ => Err(Error::NotJoinable(format!("flow has initial states {:?}", names(x, &x.initial_states())))),
    }
}

fn names(x: &CombFlow, v: &[usize]) -> Vec<String> {
    v.iter().map(|&s| x.state_name(s).to_string()).collect()
}

/// `D * D'`: the final state of `D` glued to the initial state of `D'`.
pub fn join(d: &CombFlow, e: &CombFlow, budget: usize) -> Result<CombFlow> {
    Ok(join_chain(&[d, e], budget)?.flow)
}

/// `D_0 * D_1 * … * D_k` as one colimit, with the injections of the pieces
/// first in the cocone.
pub fn join_chain(pieces: &[&CombFlow], budget: usize) -> Result<Colimit> {
    let Some(first) = pieces.first() else {
        return Err(Error::NotJoinable("nothing to join".into()));
    };
    let cap = first.cap();
    let pt = CombFlow::discrete(&["*"], cap);
    let mut links = Vec::new();
    for i in 0..pieces.len() - 1 {
        let f = unique_final(pieces[i])?;
        let s = unique_initial(pieces[i + 1])?;
        links.push((i, FlowMorphism { states: vec![f], paths: BTreeMap::new() }));
        links.push((i + 1, FlowMorphism { states: vec![s], paths: BTreeMap::new() }));
    }
    let mut objects: Vec<&CombFlow> = pieces.to_vec();
    let glue = pieces.len();
    objects.extend(std::iter::repeat_n(&pt, pieces.len() - 1));
    let arrows: Vec<(usize, usize, &FlowMorphism)> =
        links.iter().enumerate().map(|(j, (t, f))| (glue + j / 2, *t, f)).collect();
    colimit(&objects, &arrows, budget)
}

/// The diagram `G_D` over `Δ^ext(D⁰)^op`: each chain `(α_0, …, α_p)` goes to
/// `D↾[α_0,α_1] * … * D↾[α_{p-1},α_p]`, each deletion `∂_i` to the map
/// induced by composing across `α_i`.
#[derive(Debug, Clone)]
pub struct BallDiagram {
    pub poset: FinPoset,
    pub category: ExtCategory,
    pub objects: Vec<CombFlow>,
    /// Parallel to `category.arrows`.
    pub arrows: Vec<FlowMorphism>,
    colimits: Vec<Colimit>,
    /// Per object, per piece, the states of `D` in that piece.
    pieces: Vec<Vec<Vec<usize>>>,
}

pub fn ball_diagram(d: &CombFlow, budget: usize) -> Result<BallDiagram> {
    d.require_ball()?;
    let poset = d.state_poset()?;
    let category = poset.ext_category()?;
    let mut objects = Vec::with_capacity(category.objects.len());
    let mut colimits = Vec::with_capacity(category.objects.len());
    let mut pieces = Vec::with_capacity(category.objects.len());
    for chain in &category.objects {
        let parts: Vec<(CombFlow, FlowMorphism)> = chain
            .windows(2)
            .map(|w| {
                let inside: Vec<usize> = (0..d.state_count()).filter(|&s| poset.leq(w[0], s) && poset.leq(s, w[1])).collect();
                d.restrict_to(&inside)
            })
            .collect();
        let refs: Vec<&CombFlow> = parts.iter().map(|p| &p.0).collect();
        let col = join_chain(&refs, budget)?;
        objects.push(col.flow.clone());
        colimits.push(col);
        pieces.push(parts.into_iter().map(|p| p.1.states).collect());
    }
    let mut diagram = BallDiagram { poset, category, objects, arrows: Vec::new(), colimits, pieces };
    let arrows = (0..diagram.category.arrows.len())
        .map(|a| diagram.induced_arrow(a))
        .collect::<Result<Vec<_>>>()?;
    diagram.arrows = arrows;
    Ok(diagram)
}

impl BallDiagram {
    /// Builds the morphism for generator `a` from piece data.
    fn induced_arrow(&self, a: usize) -> Result<FlowMorphism> {
        let arrow = self.category.arrows[a];
        let (src, tgt, i) = (arrow.source, arrow.target, arrow.index);
        // piece j of the source lands in piece j' of the target
        let piece_image = |j: usize| if j < i { j } else { j - 1 };
        let d_to_target: HashMap<usize, usize> = self.pieces[tgt]
            .iter()
            .enumerate()
            .flat_map(|(j, states)| {
                let inj = &self.colimits[tgt].injections[j];
                states.iter().enumerate().map(move |(s, &ds)| (ds, inj.states[s]))
            })
            .collect();
        let src_col = &self.colimits[src];
        let mut state_map = vec![usize::MAX; self.objects[src].state_count()];
        for (j, states) in self.pieces[src].iter().enumerate() {
            for (s, &ds) in states.iter().enumerate() {
                state_map[src_col.injections[j].states[s]] = d_to_target[&ds];
            }
        }
        let local = |piece: &Vec<usize>, ds: usize| piece.iter().position(|&x| x == ds).unwrap();
        src_col.saturated.induced(&self.objects[tgt], &state_map, |g, n, k| {
            let (j, (s, t)) = src_col.origin[g];
            let jt = piece_image(j);
            let (ds, dt) = (self.pieces[src][j][s], self.pieces[src][j][t]);
            let target_piece = &self.pieces[tgt][jt];
            let pair = (local(target_piece, ds), local(target_piece, dt));
            self.colimits[tgt].injections[jt].apply(pair, n, k)
        })
    }

    pub fn terminal(&self) -> &CombFlow {
        &self.objects[self.category.terminal]
    }

    /// Checks `∂_i ∂_j = ∂_{j-1} ∂_i` (as morphisms) for all `i < j`.
    pub fn is_functorial(&self) -> bool {
        for (obj, chain) in self.category.objects.iter().enumerate() {
            let p = chain.len() - 1;
            for j in 2..p {
                for i in 1..j {
                    let step = |o: usize, k: usize| self.category.arrow(o, k);
                    let (Some(aj), Some(ai)) = (step(obj, j), step(obj, i)) else {
                        return false;
                    };
                    let (Some(bi), Some(bj)) =
                        (step(self.category.arrows[aj].target, i), step(self.category.arrows[ai].target, j - 1))
                    else {
                        return false;
                    };
                    if self.arrows[aj].then(&self.arrows[bi]) != self.arrows[ai].then(&self.arrows[bj]) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::is_isomorphic;
    use crate::presentation::DEFAULT_BUDGET;

    #[test]
    fn segment_join_segment_is_a_chain() {
        let seg = CombFlow::segment(2);
        let j = join(&seg, &seg, DEFAULT_BUDGET).unwrap();
        let chain = CombFlow::from_poset(&FinPoset::chain(&["0", "m", "1"]), 2);
        assert!(is_isomorphic(&j, &chain));
    }

    #[test]
    fn join_needs_unique_endpoints() {
        let seg = CombFlow::segment(2);
        let two = CombFlow::coproduct(&[&seg, &seg]).unwrap();
        assert!(matches!(join(&two, &seg, DEFAULT_BUDGET), Err(Error::NotJoinable(_))));
    }

    #[test]
    fn join_of_figure_one_halves() {
        let f = CombFlow::from_poset(&FinPoset::figure_one(), 2);
        let (l, _) = f.restriction(&["0", "C"]).unwrap();
        let (r, _) = f.restriction(&["C", "1"]).unwrap();
        let j = join(&l, &r, DEFAULT_BUDGET).unwrap();
        assert_eq!(j.state_count(), 3);
        assert!(j.paths().all(|(_, s)| s.len(0) == 1));
    }

    #[test]
    fn diagram_of_figure_one() {
        let f = CombFlow::from_poset(&FinPoset::figure_one(), 2);
        let g = ball_diagram(&f, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.objects.len(), 5);
        assert!(is_isomorphic(g.terminal(), &f));
        let c = g.category.object_index(&[0, 3, 4]).unwrap();
        assert_eq!(g.objects[c].state_count(), 3);
        for (k, a) in g.category.arrows.iter().enumerate() {
            g.arrows[k].check(&g.objects[a.source], &g.objects[a.target]).unwrap();
        }
        assert!(g.is_functorial());
    }

    #[test]
    fn diagram_of_two_chain() {
        let seg = CombFlow::segment(2);
        let g = ball_diagram(&seg, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.objects.len(), 1);
        assert!(g.arrows.is_empty());
    }

    #[test]
    fn diagram_requires_a_ball() {
        let circle = CombFlow::glob(crate::simpset::FinSimplicialSet::circle(2));
        assert!(matches!(ball_diagram(&circle, DEFAULT_BUDGET), Err(Error::NotABall(_))));
    }
}
