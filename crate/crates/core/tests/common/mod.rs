//! Reference implementations used to cross-check the library. They share no
//! code with it beyond reading model structure.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use deldyn::{PointedModel, Signature};

/// Plain model data: `succ[agent][state]`, `val[state][atom]`, point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Raw {
    pub succ: Vec<Vec<Vec<usize>>>,
    pub val: Vec<Vec<bool>>,
    pub point: usize,
}

impl Raw {
    pub fn of(x: &PointedModel) -> Raw {
        Raw {
            succ: x.relations().to_vec(),
            val: x.valuation().to_vec(),
            point: x.point(),
        }
    }

    pub fn states(&self) -> usize {
        self.val.len()
    }

    pub fn to_model(&self, sig: &Arc<Signature>) -> PointedModel {
        let names = (0..self.states()).map(|s| format!("s{s}")).collect();
        PointedModel::from_parts(sig.clone(), names, self.succ.clone(), self.val.clone(), self.point).unwrap()
    }
}

/// Disjoint union; the second model's states are shifted. Returns the two
/// points in the union.
pub fn union(x: &Raw, y: &Raw) -> (Raw, usize, usize) {
    let off = x.states();
    let succ = x
        .succ
        .iter()
        .zip(&y.succ)
        .map(|(rx, ry)| {
            rx.iter()
                .cloned()
                .chain(ry.iter().map(|ts| ts.iter().map(|t| t + off).collect()))
                .collect()
        })
        .collect();
    let val = x.val.iter().chain(&y.val).cloned().collect();
    (Raw { succ, val, point: x.point }, x.point, y.point + off)
}

/// The blocks of the Boolean algebra generated by `generators` over `n`
/// states: states are in the same block iff no generator separates them.
fn blocks(generators: &[u64], n: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut signature_of: HashMap<Vec<bool>, usize> = HashMap::new();
    for s in 0..n {
        let key: Vec<bool> = generators.iter().map(|g| g >> s & 1 == 1).collect();
        let next = out.len();
        let k = *signature_of.entry(key).or_insert(next);
        if k == next {
            out.push(0);
        }
        out[k] |= 1 << s;
    }
    out
}

/// Every state set definable by a formula of modal depth at most `depth`,
/// computed semantically: depth-0 sets are the Boolean combinations of atom
/// extensions, and the depth-(k+1) sets are the Boolean combinations of atom
/// extensions and `[i]S` for every depth-k set `S`. A Boolean algebra of sets
/// is kept as its blocks; its members are all unions of blocks.
pub fn definable_sets(m: &Raw, depth: usize) -> Vec<u64> {
    let n = m.states();
    assert!(n <= 64);
    let atoms = m.val.first().map_or(0, Vec::len);
    let atom_sets: Vec<u64> = (0..atoms)
        .map(|p| (0..n).filter(|&s| m.val[s][p]).fold(0, |acc, s| acc | 1 << s))
        .collect();
    let mut current = blocks(&atom_sets, n);
    for _ in 0..depth {
        let mut gens = atom_sets.clone();
        for rel in &m.succ {
            for s in unions(&current) {
                let boxed = (0..n)
                    .filter(|&u| rel[u].iter().all(|&t| s >> t & 1 == 1))
                    .fold(0, |acc, u| acc | 1 << u);
                gens.push(boxed);
            }
        }
        current = blocks(&gens, n);
    }
    unions(&current)
}

fn unions(blocks: &[u64]) -> Vec<u64> {
    (0u64..1 << blocks.len())
        .map(|pick| {
            blocks
                .iter()
                .enumerate()
                .filter(|(k, _)| pick >> k & 1 == 1)
                .fold(0, |acc, (_, b)| acc | b)
        })
        .collect()
}

/// Do states `a` and `b` satisfy the same formulas of depth at most `depth`?
pub fn formula_agreement(m: &Raw, a: usize, b: usize, depth: usize) -> bool {
    definable_sets(m, depth)
        .iter()
        .all(|s| (s >> a & 1) == (s >> b & 1))
}

pub fn agree_on_formulas(x: &Raw, y: &Raw, depth: usize) -> bool {
    let (u, a, b) = union(x, y);
    formula_agreement(&u, a, b, depth)
}

/// The `depth`-round back-and-forth game between `(x, s)` and `(y, t)`.
pub struct Game<'a> {
    x: &'a Raw,
    y: &'a Raw,
    memo: HashMap<(usize, usize, usize), bool>,
}

impl<'a> Game<'a> {
    pub fn new(x: &'a Raw, y: &'a Raw) -> Self {
        Game {
            x,
            y,
            memo: HashMap::new(),
        }
    }

    pub fn duplicator_wins(&mut self, s: usize, t: usize, depth: usize) -> bool {
        if let Some(&w) = self.memo.get(&(s, t, depth)) {
            return w;
        }
        let mut win = self.x.val[s] == self.y.val[t];
        if win && depth > 0 {
            for agent in 0..self.x.succ.len() {
                let xs = self.x.succ[agent][s].clone();
                let ys = self.y.succ[agent][t].clone();
                let forth = xs.iter().all(|&s2| ys.iter().any(|&t2| self.duplicator_wins(s2, t2, depth - 1)));
                let back = forth && ys.iter().all(|&t2| xs.iter().any(|&s2| self.duplicator_wins(s2, t2, depth - 1)));
                if !back {
                    win = false;
                    break;
                }
            }
        }
        self.memo.insert((s, t, depth), win);
        win
    }
}

pub fn game_bisimilar(x: &Raw, y: &Raw, depth: usize) -> bool {
    Game::new(x, y).duplicator_wins(x.point, y.point, depth)
}

/// Isomorphism-invariant key: the least encoding over all permutations that
/// keep the point at index 0.
pub fn iso_key(m: &Raw) -> Vec<u8> {
    let n = m.states();
    let others: Vec<usize> = (0..n).filter(|&s| s != m.point).collect();
    let mut best: Option<Vec<u8>> = None;
    for perm in permutations(&others) {
        let order: Vec<usize> = std::iter::once(m.point).chain(perm).collect();
        let mut pos = vec![0; n];
        for (i, &s) in order.iter().enumerate() {
            pos[s] = i;
        }
        let mut key = Vec::new();
        for &s in &order {
            key.extend(m.val[s].iter().map(|&b| b as u8));
        }
        for rel in &m.succ {
            for &s in &order {
                let mut row = vec![0u8; n];
                for &t in &rel[s] {
                    row[pos[t]] = 1;
                }
                key.extend(row);
            }
        }
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn reachable_from(m: &Raw, start: usize) -> usize {
    let mut seen = vec![false; m.states()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(s) = stack.pop() {
        for rel in &m.succ {
            for &t in &rel[s] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
    }
    seen.iter().filter(|&&b| b).count()
}

/// All point-generated models with one agent and `atoms` atoms on at most
/// `max_states` states, one per isomorphism class, pointed at state 0.
pub fn all_small_models(max_states: usize, atoms: usize) -> Vec<Raw> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for n in 1..=max_states {
        for edges in 0u64..1 << (n * n) {
            let rel: Vec<Vec<usize>> = (0..n)
                .map(|s| (0..n).filter(|&t| edges >> (s * n + t) & 1 == 1).collect())
                .collect();
            for bits in 0u64..1 << (n * atoms) {
                let val = (0..n)
                    .map(|s| (0..atoms).map(|p| bits >> (s * atoms + p) & 1 == 1).collect())
                    .collect();
                let m = Raw {
                    succ: vec![rel.clone()],
                    val,
                    point: 0,
                };
                if reachable_from(&m, 0) != n {
                    continue;
                }
                if seen.insert(iso_key(&m)) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Brute-force bisimilarity: the greatest fixpoint of the game relation over
/// the union, by iterating the game to depth `|union|`.
pub fn oracle_bisimilar(x: &Raw, y: &Raw) -> bool {
    game_bisimilar(x, y, x.states() + y.states())
}
