//! Line-oriented input formats for posets and flow presentations.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, ParseErrorKind, Result};
use crate::flow::CombFlow;
use crate::poset::FinPoset;
use crate::presentation::{FlowPresentation, Word};
use crate::simpset::{CellComplex, FinSimplicialSet};

#[derive(Debug, Clone)]
pub enum Input {
    Poset { name: String, poset: FinPoset },
    Flow { name: String, presentation: FlowPresentation },
}

impl Input {
    pub fn name(&self) -> &str {
        match self {
            Input::Poset { name, .. } | Input::Flow { name, .. } => name,
        }
    }

    /// The flow described by the input; a poset gives its poset flow.
    pub fn to_flow(&self, budget: usize) -> Result<CombFlow> {
        match self {
            Input::Poset { poset, .. } => Ok(CombFlow::from_poset(poset, self.cap())),
            Input::Flow { presentation, .. } => Ok(presentation.saturate(budget)?.flow),
        }
    }

    fn cap(&self) -> usize {
        match self {
            Input::Poset { .. } => crate::simpset::DEFAULT_CAP,
            Input::Flow { presentation, .. } => presentation.cap(),
        }
    }
}

struct Tok<'a> {
    line: usize,
    col: usize,
    text: &'a str,
}

fn err(t: &Tok<'_>, kind: ParseErrorKind, message: impl Into<String>) -> Error {
    Error::Parse { line: t.line, column: t.col, kind, message: message.into() }
}

fn err_at(line: usize, col: usize, kind: ParseErrorKind, message: impl Into<String>) -> Error {
    Error::Parse { line, column: col, kind, message: message.into() }
}

/// Non-empty lines as tokens with 1-based positions; `#` starts a comment.
fn lines(text: &str) -> Vec<Vec<Tok<'_>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut start = None;
        for (j, (pos, ch)) in body.char_indices().enumerate() {
            if ch.is_whitespace() {
                if let Some((s, c)) = start.take() {
                    toks.push(Tok { line: i + 1, col: c, text: &body[s..pos] });
                }
            } else if start.is_none() {
                start = Some((pos, j + 1));
            }
        }
        if let Some((s, c)) = start {
            toks.push(Tok { line: i + 1, col: c, text: &body[s..] });
        }
        if !toks.is_empty() {
            out.push(toks);
        }
    }
    out
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || "_'^-+".contains(c)) && s != "->"
}

fn ident<'a>(t: &Tok<'a>) -> Result<&'a str> {
    if is_ident(t.text) {
        Ok(t.text)
    } else {
        Err(err(t, ParseErrorKind::Syntax, format!("expected an identifier, found `{}`", t.text)))
    }
}

fn expect(line: &[Tok<'_>], i: usize, what: &str) -> Result<()> {
    match line.get(i) {
        Some(t) if t.text == what => Ok(()),
        Some(t) => Err(err(t, ParseErrorKind::Syntax, format!("expected `{what}`, found `{}`", t.text))),
        None => Err(end_of_line(line, what)),
    }
}

fn end_of_line(line: &[Tok<'_>], what: &str) -> Error {
    let last = line.last().unwrap();
    err_at(last.line, last.col + last.text.chars().count(), ParseErrorKind::Syntax, format!("expected {what} before end of line"))
}

fn no_trailing(line: &[Tok<'_>], n: usize) -> Result<()> {
    match line.get(n) {
        Some(t) => Err(err(t, ParseErrorKind::Syntax, format!("unexpected `{}`", t.text))),
        None => Ok(()),
    }
}

/// Parses a poset or flow file; `cap` is the truncation for flow files.
pub fn parse_input(text: &str, cap: usize) -> Result<Input> {
    let ls = lines(text);
    let Some(first) = ls.first() else {
        return Err(err_at(1, 1, ParseErrorKind::Syntax, "empty input: expected a `poset` or `flow` header"));
    };
    match first[0].text {
        "poset" => parse_poset(&ls),
        "flow" => parse_flow(&ls, cap),
        _ => Err(err(&first[0], ParseErrorKind::Syntax, format!("expected `poset` or `flow`, found `{}`", first[0].text))),
    }
}

fn header(line: &[Tok<'_>], what: &str) -> Result<String> {
    let name = line.get(1).ok_or_else(|| end_of_line(line, &format!("a {what} name")))?;
    no_trailing(line, 2)?;
    Ok(ident(name)?.to_string())
}

fn parse_poset(ls: &[Vec<Tok<'_>>]) -> Result<Input> {
    let name = header(&ls[0], "poset")?;
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut rels = Vec::new();
    for line in &ls[1..] {
        match line[0].text {
            "elem" => {
                if line.len() < 2 {
                    return Err(end_of_line(line, "an element"));
                }
                for t in &line[1..] {
                    let id = ident(t)?;
                    if index.insert(id.to_string(), names.len()).is_some() {
                        return Err(err(t, ParseErrorKind::DuplicateIdentifier, format!("element `{id}` declared twice")));
                    }
                    names.push(id.to_string());
                }
            }
            "rel" => {
                let a = line.get(1).ok_or_else(|| end_of_line(line, "an element"))?;
                expect(line, 2, "<")?;
                let b = line.get(3).ok_or_else(|| end_of_line(line, "an element"))?;
                no_trailing(line, 4)?;
                let lookup = |t: &Tok<'_>| -> Result<usize> {
                    let id = ident(t)?;
                    index
                        .get(id)
                        .copied()
                        .ok_or_else(|| err(t, ParseErrorKind::DanglingReference, format!("undeclared element `{id}`")))
                };
                let (ia, ib) = (lookup(a)?, lookup(b)?);
                if ia == ib {
                    return Err(err(a, ParseErrorKind::Syntax, format!("`{}` < `{}` is reflexive", a.text, b.text)));
                }
                rels.push((ia, ib));
            }
            other => {
                return Err(err(&line[0], ParseErrorKind::Syntax, format!("expected `elem` or `rel`, found `{other}`")));
            }
        }
    }
    if names.is_empty() {
        return Err(err_at(ls[0][0].line, 1, ParseErrorKind::Syntax, "poset declares no elements"));
    }
    let poset = FinPoset::new(names, &rels)?;
    Ok(Input::Poset { name, poset })
}

struct CellInfo {
    pair: (usize, usize),
    dim: usize,
    index: usize,
}

fn parse_flow(ls: &[Vec<Tok<'_>>], cap: usize) -> Result<Input> {
    let name = header(&ls[0], "flow")?;
    let mut states: Vec<String> = Vec::new();
    let mut state_index: HashMap<String, usize> = HashMap::new();
    let mut complexes: BTreeMap<(usize, usize), CellComplex> = BTreeMap::new();
    let mut cells: HashMap<String, CellInfo> = HashMap::new();
    let mut relations: Vec<(&[Tok<'_>], usize)> = Vec::new();
    for line in &ls[1..] {
        match line[0].text {
            "state" => {
                if line.len() < 2 {
                    return Err(end_of_line(line, "a state"));
                }
                for t in &line[1..] {
                    let id = ident(t)?;
                    if state_index.insert(id.to_string(), states.len()).is_some() {
                        return Err(err(t, ParseErrorKind::DuplicateIdentifier, format!("state `{id}` declared twice")));
                    }
                    states.push(id.to_string());
                }
            }
            "cell" => {
                let id_tok = line.get(1).ok_or_else(|| end_of_line(line, "a cell name"))?;
                let id = ident(id_tok)?;
                if cells.contains_key(id) {
                    return Err(err(id_tok, ParseErrorKind::DuplicateIdentifier, format!("cell `{id}` declared twice")));
                }
                expect(line, 2, ":")?;
                let state = |i: usize| -> Result<usize> {
                    let t = line.get(i).ok_or_else(|| end_of_line(line, "a state"))?;
                    let s = ident(t)?;
                    state_index
                        .get(s)
                        .copied()
                        .ok_or_else(|| err(t, ParseErrorKind::DanglingReference, format!("undeclared state `{s}`")))
                };
                let a = state(3)?;
                expect(line, 4, "->")?;
                let b = state(5)?;
                expect(line, 6, "dim")?;
                let dim_tok = line.get(7).ok_or_else(|| end_of_line(line, "a dimension"))?;
                let dim: usize = dim_tok
                    .text
                    .parse()
                    .map_err(|_| err(dim_tok, ParseErrorKind::Syntax, format!("expected a dimension, found `{}`", dim_tok.text)))?;
                if dim > cap {
                    return Err(err(dim_tok, ParseErrorKind::ArityMismatch, format!("dimension {dim} exceeds the cap {cap}")));
                }
                let mut faces = Vec::new();
                if dim > 0 {
                    expect(line, 8, "faces")?;
                    for i in 0..=dim {
                        let t = line.get(9 + i).ok_or_else(|| {
                            err_at(line[0].line, line.last().unwrap().col, ParseErrorKind::ArityMismatch, format!("cell `{id}` of dimension {dim} needs {} faces", dim + 1))
                        })?;
                        let Some((key, target)) = t.text.split_once('=') else {
                            return Err(err(t, ParseErrorKind::Syntax, format!("expected `d{i}=<cell>`, found `{}`", t.text)));
                        };
                        if key != format!("d{i}") {
                            return Err(err(t, ParseErrorKind::Syntax, format!("expected face `d{i}`, found `{key}`")));
                        }
                        let Some(info) = cells.get(target) else {
                            return Err(err_at(t.line, t.col + key.len() + 1, ParseErrorKind::DanglingReference, format!("undeclared cell `{target}`")));
                        };
                        if info.pair != (a, b) || info.dim + 1 != dim {
                            return Err(err(
                                t,
                                ParseErrorKind::ArityMismatch,
                                format!("face `{target}` is not a cell of dimension {} from {} to {}", dim - 1, states[a], states[b]),
                            ));
                        }
                        faces.push(info.index);
                    }
                    no_trailing(line, 10 + dim)?;
                } else {
                    no_trailing(line, 8)?;
                }
                let complex = complexes.entry((a, b)).or_default();
                let index = complex
                    .add(dim, id, faces)
                    .map_err(|e| err(id_tok, ParseErrorKind::ArityMismatch, e.to_string()))?;
                cells.insert(id.to_string(), CellInfo { pair: (a, b), dim, index });
            }
            "relation" => relations.push((line, 0)),
            other => {
                return Err(err(
                    &line[0],
                    ParseErrorKind::Syntax,
                    format!("expected `state`, `cell` or `relation`, found `{other}`"),
                ));
            }
        }
    }
    let mut presentation = FlowPresentation::new(cap, states.clone());
    let mut generator_of: HashMap<(usize, usize), (usize, FinSimplicialSet)> = HashMap::new();
    for (&(a, b), complex) in &complexes {
        let space = FinSimplicialSet::from_cells(complex, cap);
        let g = presentation.add_generator(format!("{}->{}", states[a], states[b]), a, b, space.clone())?;
        generator_of.insert((a, b), (g, space));
    }
    let mut seen_relations = HashSet::new();
    for (line, _) in relations {
        let eq = line.iter().position(|t| t.text == "=").ok_or_else(|| end_of_line(line, "`=`"))?;
        if eq != 2 {
            let t = line.get(if eq < 2 { eq } else { 2 }).unwrap();
            return Err(err(t, ParseErrorKind::Syntax, "a relation is `relation <word> = <word>`"));
        }
        let rhs_tok = line.get(3).ok_or_else(|| end_of_line(line, "a word"))?;
        no_trailing(line, 4)?;
        let word = |t: &Tok<'_>| -> Result<Word> {
            let mut letters = Vec::new();
            let mut level = None;
            let mut at = None;
            let mut col = t.col;
            for part in t.text.split('.') {
                let lt = Tok { line: t.line, col, text: part };
                col += part.chars().count() + 1;
                let Some(info) = cells.get(part) else {
                    return Err(err(&lt, ParseErrorKind::DanglingReference, format!("undeclared cell `{part}`")));
                };
                if *level.get_or_insert(info.dim) != info.dim {
                    return Err(err(&lt, ParseErrorKind::ArityMismatch, "letters of a word must have one dimension"));
                }
                if let Some(prev) = at {
                    if prev != info.pair.0 {
                        return Err(err(&lt, ParseErrorKind::ArityMismatch, format!("`{part}` does not start where the previous letter ends")));
                    }
                }
                at = Some(info.pair.1);
                let (g, space) = &generator_of[&info.pair];
                let k = (0..space.len(info.dim)).find(|&k| space.name(info.dim, k) == part).expect("cell is a simplex");
                letters.push((*g, k));
            }
            Ok(Word::new(level.unwrap_or(0), letters))
        };
        let (lhs, rhs) = (word(&line[1])?, word(rhs_tok)?);
        if lhs.level != rhs.level || presentation.endpoints(&lhs) != presentation.endpoints(&rhs) {
            return Err(err(&line[2], ParseErrorKind::ArityMismatch, "the two words differ in dimension or endpoints"));
        }
        if seen_relations.insert((lhs.clone(), rhs.clone())) {
            presentation.add_relation(lhs, rhs)?;
        }
    }
    Ok(Input::Flow { name, presentation })
}
