//! Seeded random generators for models, formulas, action models and
//! machines. Used by tests, benches and the acceptance checks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::ActionModel;
use crate::formula::{Formula, Signature};
use crate::kripke::PointedModel;
use crate::turing::{Move, Symbol, TapeConfig, Transition, TuringMachine};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A model on `states` states where each edge is present with probability
/// `edge_prob`, pointed at state 0. Not necessarily point-generated.
pub fn random_model<R: Rng>(rng: &mut R, sig: &Arc<Signature>, states: usize, edge_prob: f64) -> PointedModel {
    let agents = sig.agents().len();
    let atoms = sig.atoms().len();
    let succ = (0..agents)
        .map(|_| {
            (0..states)
                .map(|_| (0..states).filter(|_| rng.gen_bool(edge_prob)).collect())
                .collect()
        })
        .collect();
    let val = (0..states).map(|_| (0..atoms).map(|_| rng.gen_bool(0.5)).collect()).collect();
    let names = (0..states).map(|s| format!("s{s}")).collect();
    PointedModel::from_parts(sig.clone(), names, succ, val, 0).expect("generated model is valid")
}

/// A random formula of modal depth at most `depth` with roughly `size`
/// connectives.
pub fn random_formula<R: Rng>(rng: &mut R, sig: &Signature, size: usize, depth: usize) -> Formula {
    if size == 0 {
        return match rng.gen_range(0..6) {
            0 => Formula::Top,
            1 => Formula::bot(),
            _ => Formula::atom(sig.atoms().choose(rng).map_or("p", String::as_str)),
        };
    }
    let choices = if depth > 0 { 4 } else { 3 };
    match rng.gen_range(0..choices) {
        0 => Formula::negate(random_formula(rng, sig, size - 1, depth)),
        1 => {
            let left = rng.gen_range(0..size);
            Formula::and(
                random_formula(rng, sig, left, depth),
                random_formula(rng, sig, size - 1 - left, depth),
            )
        }
        2 => {
            let left = rng.gen_range(0..size);
            Formula::or(
                random_formula(rng, sig, left, depth),
                random_formula(rng, sig, size - 1 - left, depth),
            )
        }
        _ => {
            let agent = sig.agents().choose(rng).expect("signature has an agent");
            let inner = random_formula(rng, sig, size - 1, depth - 1);
            if rng.gen_bool(0.5) {
                Formula::boxed(agent, inner)
            } else {
                Formula::diamond(agent, inner)
            }
        }
    }
}

/// `T` or a random consistent conjunction of literals.
pub fn random_clause<R: Rng>(rng: &mut R, sig: &Signature) -> Formula {
    let lits = sig.atoms().iter().filter_map(|p| match rng.gen_range(0..3) {
        0 => Some(Formula::atom(p)),
        1 => Some(Formula::negate(Formula::atom(p))),
        _ => None,
    });
    Formula::conj(lits)
}

/// The conjunction describing one valuation of all atoms.
fn valuation_formula(sig: &Signature, bits: u64) -> Formula {
    Formula::conj(sig.atoms().iter().enumerate().map(|(k, p)| {
        if bits >> k & 1 == 1 {
            Formula::atom(p)
        } else {
            Formula::negate(Formula::atom(p))
        }
    }))
}

/// Designated preconditions that partition the valuations of all atoms, so
/// that exactly one designated action applies anywhere.
fn partition_preconditions<R: Rng>(rng: &mut R, sig: &Signature, parts: usize) -> Vec<Formula> {
    let mut cells: Vec<Vec<Formula>> = vec![Vec::new(); parts];
    for bits in 0..1u64 << sig.atoms().len() {
        cells[rng.gen_range(0..parts)].push(valuation_formula(sig, bits));
    }
    cells.into_iter().map(Formula::disj).collect()
}

fn random_relations<R: Rng>(rng: &mut R, agents: usize, actions: usize) -> Vec<Vec<Vec<usize>>> {
    (0..agents)
        .map(|_| {
            (0..actions)
                .map(|_| (0..actions).filter(|_| rng.gen_bool(0.5)).collect())
                .collect()
        })
        .collect()
}

/// A clean action model with Boolean preconditions and no postconditions.
/// Designated preconditions partition the valuations, so the map is
/// certified exhaustive and deterministic.
pub fn random_boolean_static_action<R: Rng>(rng: &mut R, sig: &Arc<Signature>, max_actions: usize) -> ActionModel {
    random_action(rng, sig, max_actions, false, false)
}

/// A clean action model whose designated preconditions partition the
/// valuations. Non-designated actions may carry modal preconditions and
/// every action may carry a postcondition clause.
pub fn random_clean_action<R: Rng>(rng: &mut R, sig: &Arc<Signature>, max_actions: usize) -> ActionModel {
    random_action(rng, sig, max_actions, true, true)
}

fn random_action<R: Rng>(
    rng: &mut R,
    sig: &Arc<Signature>,
    max_actions: usize,
    modal: bool,
    posts: bool,
) -> ActionModel {
    let n = rng.gen_range(1..=max_actions.max(1));
    let d = rng.gen_range(1..=n);
    let mut pre = partition_preconditions(rng, sig, d);
    for _ in d..n {
        let depth = if modal { rng.gen_range(0..=2) } else { 0 };
        pre.push(random_formula(rng, sig, 3, depth));
    }
    let post = (0..n)
        .map(|_| if posts { random_clause(rng, sig) } else { Formula::Top })
        .collect();
    let names = (0..n).map(|i| format!("e{i}")).collect();
    let rel = random_relations(rng, sig.agents().len(), n);
    ActionModel::new(sig.clone(), names, rel, pre, post, (0..d).collect()).expect("generated action model is valid")
}

/// A model bisimilar to `x` but usually not isomorphic to it: a state is
/// split in two with its incoming edges shared out, an unreachable state is
/// added and the states are shuffled and renamed.
pub fn bisimilar_variant<R: Rng>(rng: &mut R, x: &PointedModel) -> PointedModel {
    let n = x.num_states();
    let atoms = x.sig().atoms().len();
    let split = rng.gen_range(0..n);
    let copy = n;
    let mut succ: Vec<Vec<Vec<usize>>> = x.relations().to_vec();
    for rel in &mut succ {
        let out = rel[split].clone();
        for targets in rel.iter_mut() {
            if targets.contains(&split) && rng.gen_bool(0.5) {
                targets.push(copy);
                if rng.gen_bool(0.5) {
                    targets.retain(|&t| t != split);
                }
            }
        }
        rel.push(out);
        rel.push((0..=n).filter(|_| rng.gen_bool(0.3)).collect());
    }
    let mut val = x.valuation().to_vec();
    val.push(val[split].clone());
    val.push((0..atoms).map(|_| rng.gen_bool(0.5)).collect());

    let mut order: Vec<usize> = (0..n + 2).collect();
    order.shuffle(rng);
    // order[new] = old
    let mut new_of = vec![0; n + 2];
    for (new, &old) in order.iter().enumerate() {
        new_of[old] = new;
    }
    let succ = succ
        .iter()
        .map(|rel| {
            order
                .iter()
                .map(|&old| rel[old].iter().map(|&t| new_of[t]).collect())
                .collect()
        })
        .collect();
    let val = order.iter().map(|&old| val[old].clone()).collect();
    let names = (0..n + 2).map(|s| format!("v{s}")).collect();
    PointedModel::from_parts(x.sig().clone(), names, succ, val, new_of[x.point()]).expect("variant is valid")
}

/// One or two small edits: flip an atom, add or remove an edge, or attach a
/// fresh state.
pub fn perturb<R: Rng>(rng: &mut R, x: &PointedModel) -> PointedModel {
    let mut succ: Vec<Vec<Vec<usize>>> = x.relations().to_vec();
    let mut val = x.valuation().to_vec();
    let agents = succ.len();
    let atoms = x.sig().atoms().len();
    for _ in 0..rng.gen_range(1..=2) {
        let n = val.len();
        let s = rng.gen_range(0..n);
        match rng.gen_range(0..4) {
            0 if atoms > 0 => {
                let p = rng.gen_range(0..atoms);
                val[s][p] = !val[s][p];
            }
            1 => {
                let a = rng.gen_range(0..agents);
                succ[a][s].push(rng.gen_range(0..n));
            }
            2 => {
                let a = rng.gen_range(0..agents);
                if !succ[a][s].is_empty() {
                    let k = rng.gen_range(0..succ[a][s].len());
                    succ[a][s].remove(k);
                }
            }
            _ => {
                let a = rng.gen_range(0..agents);
                succ[a][s].push(n);
                for rel in succ.iter_mut() {
                    rel.push((0..=n).filter(|_| rng.gen_bool(0.3)).collect());
                }
                val.push((0..atoms).map(|_| rng.gen_bool(0.5)).collect());
            }
        }
    }
    let names = (0..val.len()).map(|s| format!("s{s}")).collect();
    PointedModel::from_parts(x.sig().clone(), names, succ, val, x.point())
        .expect("perturbed model is valid")
        .generated_submodel()
}

/// A total machine with `states` states, none halting unless `halting`, that
/// never moves left of the start cell.
pub fn random_machine<R: Rng>(rng: &mut R, states: usize, halting: bool) -> TuringMachine {
    let moves = [Move::L, Move::R, Move::S];
    let writable = [Symbol::Zero, Symbol::One, Symbol::Blank];
    let halt = if halting && states > 1 { Some(states - 1) } else { None };
    let table = (0..states)
        .map(|q| {
            let mut row = [None; 4];
            if Some(q) == halt {
                return row;
            }
            for (k, sym) in Symbol::ALL.iter().enumerate() {
                let next = rng.gen_range(0..states);
                row[k] = Some(if *sym == Symbol::Start {
                    let shift = if rng.gen_bool(0.5) { Move::R } else { Move::S };
                    Transition { next, write: Symbol::Start, shift }
                } else {
                    Transition {
                        next,
                        write: *writable.choose(rng).expect("non-empty"),
                        shift: *moves.choose(rng).expect("non-empty"),
                    }
                });
            }
            row
        })
        .collect();
    TuringMachine::new((0..states).map(|q| format!("q{q}")).collect(), 0, table).expect("generated machine is valid")
}

/// A configuration of `tm` with up to `max_len` cells after the start cell.
pub fn random_config<R: Rng>(rng: &mut R, tm: &TuringMachine, max_len: usize) -> TapeConfig {
    let len = rng.gen_range(0..=max_len);
    let mut tape = vec![Symbol::Start];
    tape.extend((0..len).map(|_| *[Symbol::Zero, Symbol::One, Symbol::Blank].choose(rng).expect("non-empty")));
    let head = rng.gen_range(0..=len);
    let state = rng.gen_range(0..tm.states().len());
    TapeConfig::new(tape, head, state).expect("generated configuration is valid")
}
