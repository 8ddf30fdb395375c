//! Turing machines on a one-sided tape, their encoding as chains of cell
//! states, and compilation into action models that perform one machine step
//! per product update.
//!
//! A configuration of width `w` becomes the states `c0 .. c{w-1}`. Agent `a`
//! links `c{2k}` with `c{2k+1}` and agent `b` links `c{2k+1}` with
//! `c{2k+2}`; both relations are reflexive and symmetric. Even cells carry
//! `e` and odd cells `u`, so the point `c0` can address cell `k` with a
//! depth-`k` chain of diamonds, e.g. `<a>(u & <b>(e & p_1))` says that cell
//! 2 holds a `1`. Each cell has exactly one content atom (`p_start`, `p_0`,
//! `p_1`, `p_blank`), the head cell carries `h` and the atom `q_i` of the
//! control state.
//!
//! The compiled action model has one action per local situation: the head
//! cell, a cell receiving the head from its left or right neighbour, and an
//! idle cell of either parity. All preconditions have modal depth at most 1.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::action::{make_clean_map, product_update, ActionModel, CleanMap};
use crate::bisim::canonical_model;
use crate::error::{Error, Result};
use crate::formula::{Formula, Signature};
use crate::kripke::PointedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Start,
    Zero,
    One,
    Blank,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::Start, Symbol::Zero, Symbol::One, Symbol::Blank];

    pub fn to_char(self) -> char {
        match self {
            Symbol::Start => '>',
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Blank => '_',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            '>' => Some(Symbol::Start),
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            '_' => Some(Symbol::Blank),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn atom(self) -> &'static str {
        match self {
            Symbol::Start => "p_start",
            Symbol::Zero => "p_0",
            Symbol::One => "p_1",
            Symbol::Blank => "p_blank",
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Symbol::Start => "start",
            Symbol::Zero => "0",
            Symbol::One => "1",
            Symbol::Blank => "blank",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    pub next: usize,
    pub write: Symbol,
    pub shift: Move,
}

/// A machine over `{>, 0, 1, _}`. Non-halting states have a transition for
/// every symbol; halting states have none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuringMachine {
    states: Vec<String>,
    initial: usize,
    table: Vec<[Option<Transition>; 4]>,
}

impl TuringMachine {
    pub fn new(states: Vec<String>, initial: usize, table: Vec<[Option<Transition>; 4]>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidMachine(msg));
        if states.is_empty() || initial >= states.len() || table.len() != states.len() {
            return bad("states, initial state and table do not line up".into());
        }
        for (q, row) in table.iter().enumerate() {
            let defined = row.iter().filter(|t| t.is_some()).count();
            if defined != 0 && defined != 4 {
                return bad(format!("state `{}` is neither total nor halting", states[q]));
            }
            for (sym, t) in Symbol::ALL.iter().zip(row) {
                let Some(t) = t else { continue };
                if t.next >= states.len() {
                    return bad(format!("state `{}` jumps to an undeclared state", states[q]));
                }
                if *sym == Symbol::Start && (t.write != Symbol::Start || t.shift == Move::L) {
                    return bad(format!(
                        "state `{}` must keep the start marker and not move left of it",
                        states[q]
                    ));
                }
                if *sym != Symbol::Start && t.write == Symbol::Start {
                    return bad(format!("state `{}` writes a start marker", states[q]));
                }
            }
        }
        Ok(TuringMachine {
            states,
            initial,
            table,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn transition(&self, state: usize, symbol: Symbol) -> Option<Transition> {
        self.table[state][symbol.index()]
    }

    pub fn is_halting(&self, state: usize) -> bool {
        self.table[state].iter().all(Option::is_none)
    }

    /// Atoms `u, e, h`, the content atoms, then `q_0 ..` for the states.
    pub fn signature(&self) -> Arc<Signature> {
        let mut atoms: Vec<String> = ["u", "e", "h"].iter().map(|s| s.to_string()).collect();
        atoms.extend(Symbol::ALL.iter().map(|s| s.atom().to_string()));
        atoms.extend((0..self.states.len()).map(state_atom));
        Arc::new(Signature::new(atoms, ["a", "b"]).expect("machine signature is valid"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MachineJson = serde_json::from_str(text)?;
        let lookup = |name: &str| {
            raw.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::InvalidMachine(format!("undeclared state `{name}`")))
        };
        let symbol = |s: &str| {
            let mut chars = s.chars();
            match (chars.next().and_then(Symbol::from_char), chars.next()) {
                (Some(sym), None) => Ok(sym),
                _ => Err(Error::InvalidMachine(format!("`{s}` is not a tape symbol"))),
            }
        };
        if let Some(alphabet) = &raw.alphabet {
            for s in alphabet {
                symbol(s)?;
            }
        }
        let mut table = vec![[None; 4]; raw.states.len()];
        for t in &raw.transitions {
            let q = lookup(&t.state)?;
            let read = symbol(&t.read)?;
            if table[q][read.index()].is_some() {
                return Err(Error::InvalidMachine(format!(
                    "duplicate transition for ({}, {})",
                    t.state, t.read
                )));
            }
            table[q][read.index()] = Some(Transition {
                next: lookup(&t.next)?,
                write: symbol(&t.write)?,
                shift: t.shift,
            });
        }
        TuringMachine::new(raw.states.clone(), lookup(&raw.initial)?, table)
    }

    pub fn to_json(&self) -> String {
        let mut transitions = Vec::new();
        for (q, row) in self.table.iter().enumerate() {
            for (sym, t) in Symbol::ALL.iter().zip(row) {
                if let Some(t) = t {
                    transitions.push(TransitionJson {
                        state: self.states[q].clone(),
                        read: sym.to_char().to_string(),
                        next: self.states[t.next].clone(),
                        write: t.write.to_char().to_string(),
                        shift: t.shift,
                    });
                }
            }
        }
        let raw = MachineJson {
            states: self.states.clone(),
            alphabet: Some(Symbol::ALL.iter().map(|s| s.to_char().to_string()).collect()),
            initial: self.states[self.initial].clone(),
            transitions,
        };
        serde_json::to_string_pretty(&raw).expect("machine JSON serializes")
    }
}

fn state_atom(q: usize) -> String {
    format!("q_{q}")
}

#[derive(Serialize, Deserialize)]
struct MachineJson {
    states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
    initial: String,
    transitions: Vec<TransitionJson>,
}

#[derive(Serialize, Deserialize)]
struct TransitionJson {
    state: String,
    read: String,
    next: String,
    write: String,
    #[serde(rename = "move")]
    shift: Move,
}

/// A machine configuration. Trailing blanks are dropped, so two
/// configurations compare equal iff they describe the same tape.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TapeConfig {
    tape: Vec<Symbol>,
    head: usize,
    state: usize,
}

impl TapeConfig {
    pub fn new(mut tape: Vec<Symbol>, head: usize, state: usize) -> Result<Self> {
        if tape.first() != Some(&Symbol::Start) {
            return Err(Error::InvalidMachine("cell 0 must hold the start marker".into()));
        }
        if tape[1..].contains(&Symbol::Start) {
            return Err(Error::InvalidMachine("start marker outside cell 0".into()));
        }
        while tape.len() > 1 && tape.last() == Some(&Symbol::Blank) {
            tape.pop();
        }
        Ok(TapeConfig { tape, head, state })
    }

    /// Parse a tape such as `>0101`.
    pub fn parse(tape: &str, head: usize, state: usize) -> Result<Self> {
        let symbols = tape
            .chars()
            .map(|c| Symbol::from_char(c).ok_or_else(|| Error::InvalidMachine(format!("bad tape symbol `{c}`"))))
            .collect::<Result<Vec<_>>>()?;
        TapeConfig::new(symbols, head, state)
    }

    pub fn tape(&self) -> &[Symbol] {
        &self.tape
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn read(&self, cell: usize) -> Symbol {
        self.tape.get(cell).copied().unwrap_or(Symbol::Blank)
    }

    /// Cells needed to hold the tape and the head.
    pub fn extent(&self) -> usize {
        self.tape.len().max(self.head + 1)
    }

    pub fn tape_string(&self) -> String {
        self.tape.iter().map(|s| s.to_char()).collect()
    }
}

impl fmt::Display for TapeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} head={} state={}", self.tape_string(), self.head, self.state)
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next().and_then(Symbol::from_char), chars.next()) {
            (Some(sym), None) => Ok(sym),
            _ => Err(Error::InvalidMachine(format!("`{s}` is not a tape symbol"))),
        }
    }
}

/// One machine step. Halting configurations map to themselves.
pub fn step(tm: &TuringMachine, c: &TapeConfig) -> Result<TapeConfig> {
    let Some(t) = tm.transition(c.state, c.read(c.head)) else {
        return Ok(c.clone());
    };
    let mut tape = c.tape.clone();
    if tape.len() <= c.head {
        tape.resize(c.head + 1, Symbol::Blank);
    }
    tape[c.head] = t.write;
    let head = match t.shift {
        Move::L => c.head.checked_sub(1).ok_or(Error::HeadUnderflow { step: 0 })?,
        Move::R => c.head + 1,
        Move::S => c.head,
    };
    TapeConfig::new(tape, head, t.next)
}

/// Direct simulation: `steps + 1` configurations starting with `c`.
pub fn run_tm(tm: &TuringMachine, c: &TapeConfig, steps: usize) -> Result<Vec<TapeConfig>> {
    let mut trace = Vec::with_capacity(steps + 1);
    trace.push(c.clone());
    for k in 0..steps {
        let next = step(tm, &trace[k]).map_err(|e| match e {
            Error::HeadUnderflow { .. } => Error::HeadUnderflow { step: k + 1 },
            other => other,
        })?;
        trace.push(next);
    }
    Ok(trace)
}

/// The agent linking cell `k` to cell `k + 1`.
fn right_agent(k: usize) -> usize {
    k % 2
}

/// Encode `c` as a chain of `width` cells pointed at the start cell.
pub fn encode_config(tm: &TuringMachine, c: &TapeConfig, width: usize) -> Result<PointedModel> {
    if width < c.extent() {
        return Err(Error::WindowTooSmall {
            width,
            needed: c.extent(),
        });
    }
    if c.state >= tm.states.len() {
        return Err(Error::InvalidMachine(format!("unknown state index {}", c.state)));
    }
    let sig = tm.signature();
    let atom = |name: &str| sig.atom_index(name).expect("machine atom");
    let (u, e, h) = (atom("u"), atom("e"), atom("h"));
    let mut val = vec![vec![false; sig.atoms().len()]; width];
    for (k, cell) in val.iter_mut().enumerate() {
        cell[if k % 2 == 0 { e } else { u }] = true;
        cell[atom(c.read(k).atom())] = true;
    }
    val[c.head][h] = true;
    val[c.head][atom(&state_atom(c.state))] = true;

    let mut succ = vec![(0..width).map(|k| vec![k]).collect::<Vec<_>>(); 2];
    for k in 0..width.saturating_sub(1) {
        let agent = right_agent(k);
        succ[agent][k].push(k + 1);
        succ[agent][k + 1].push(k);
    }
    let states = (0..width).map(|k| format!("c{k}")).collect();
    PointedModel::from_parts(sig, states, succ, val, 0)
}

/// Recover the configuration from a chain encoding.
pub fn decode_config(tm: &TuringMachine, x: &PointedModel) -> Result<TapeConfig> {
    let bad = |msg: String| Err(Error::MalformedEncoding(msg));
    let sig = tm.signature();
    let x = x.aligned_to(&sig)?;
    let x = x.generated_submodel();
    let atom = |name: &str| sig.atom_index(name).expect("machine atom");
    let (u, e, h) = (atom("u"), atom("e"), atom("h"));

    // Walk the chain from the point.
    let mut cells = vec![x.point()];
    loop {
        let k = cells.len() - 1;
        let here = cells[k];
        let parity = if k % 2 == 0 { u } else { e };
        let next: Vec<usize> = x
            .successors(right_agent(k), here)
            .iter()
            .copied()
            .filter(|&t| t != here && x.label(t)[parity])
            .collect();
        match next.as_slice() {
            [] => break,
            [t] if !cells.contains(t) => cells.push(*t),
            _ => return bad(format!("cell {k} has no unique right neighbour")),
        }
    }
    if cells.len() != x.num_states() {
        return bad(format!(
            "{} states reachable but only {} form the chain",
            x.num_states(),
            cells.len()
        ));
    }

    let width = cells.len();
    let mut tape = Vec::with_capacity(width);
    let mut head = None;
    let mut state = None;
    for (k, &s) in cells.iter().enumerate() {
        for agent in 0..2 {
            let mut expected = vec![s];
            if k > 0 && right_agent(k - 1) == agent {
                expected.push(cells[k - 1]);
            }
            if k + 1 < width && right_agent(k) == agent {
                expected.push(cells[k + 1]);
            }
            expected.sort_unstable();
            if x.successors(agent, s) != expected.as_slice() {
                return bad(format!("cell {k} has the wrong {} relation", sig.agents()[agent]));
            }
        }
        let label = x.label(s);
        if label[e] != (k % 2 == 0) || label[u] != (k % 2 == 1) {
            return bad(format!("cell {k} has the wrong parity atoms"));
        }
        let contents: Vec<Symbol> = Symbol::ALL
            .iter()
            .copied()
            .filter(|sym| label[atom(sym.atom())])
            .collect();
        let &[symbol] = contents.as_slice() else {
            return bad(format!("cell {k} has {} content atoms", contents.len()));
        };
        if (symbol == Symbol::Start) != (k == 0) {
            return bad(format!("start marker misplaced at cell {k}"));
        }
        tape.push(symbol);
        let states: Vec<usize> = (0..tm.states.len())
            .filter(|&q| label[atom(&state_atom(q))])
            .collect();
        if label[h] {
            if head.replace(k).is_some() {
                return bad("more than one head cell".into());
            }
            let &[q] = states.as_slice() else {
                return bad(format!("head cell carries {} state atoms", states.len()));
            };
            state = Some(q);
        } else if !states.is_empty() {
            return bad(format!("state atom away from the head at cell {k}"));
        }
    }
    match (head, state) {
        (Some(head), Some(state)) => TapeConfig::new(tape, head, state),
        _ => bad("no head cell".into()),
    }
}

/// A machine compiled into an action model, with a fixed tape window.
#[derive(Debug, Clone)]
pub struct CompiledMachine {
    tm: TuringMachine,
    width: usize,
    model: ActionModel,
}

/// Compile `tm` into an action model. The action model itself does not depend
/// on `width`; the window only bounds the encodings this machine works on.
pub fn compile_tm(tm: &TuringMachine, width: usize) -> Result<CompiledMachine> {
    if width == 0 {
        return Err(Error::WindowTooSmall { width, needed: 1 });
    }
    let sig = tm.signature();
    let atom = |name: &str| Formula::atom(name);
    let not = Formula::negate;
    let content = |w: Symbol| {
        Formula::conj(Symbol::ALL.iter().map(|&s| if s == w { atom(s.atom()) } else { not(atom(s.atom())) }))
    };
    let reads = |q: usize, sym: Symbol| Formula::conj([atom("h"), atom(&state_atom(q)), atom(sym.atom())]);

    let mut names = Vec::new();
    let mut pre = Vec::new();
    let mut post = Vec::new();

    for q in 0..tm.states.len() {
        for sym in Symbol::ALL {
            names.push(format!("head_q{q}_{}", sym.tag()));
            pre.push(reads(q, sym));
            post.push(match tm.transition(q, sym) {
                None => Formula::Top,
                Some(t) => {
                    let mut lits = vec![content(t.write)];
                    match t.shift {
                        Move::S if t.next != q => {
                            lits.push(atom(&state_atom(t.next)));
                            lits.push(not(atom(&state_atom(q))));
                        }
                        Move::S => {}
                        Move::L | Move::R => {
                            lits.push(not(atom("h")));
                            lits.push(not(atom(&state_atom(q))));
                        }
                    }
                    Formula::conj(lits)
                }
            });
        }
    }

    // For a cell of parity `mine`, the agent reaching its left or right
    // neighbour, and the parity atom of that neighbour.
    let parities = [("e", "u", "b", "a"), ("u", "e", "a", "b")];
    for (mine, theirs, left, right) in parities {
        let mut from_left = Vec::new();
        let mut from_right = Vec::new();
        for q in 0..tm.states.len() {
            for sym in Symbol::ALL {
                let Some(t) = tm.transition(q, sym) else { continue };
                let (agent, side, bucket) = match t.shift {
                    Move::R => (left, "left", &mut from_left),
                    Move::L => (right, "right", &mut from_right),
                    Move::S => continue,
                };
                bucket.push(reads(q, sym));
                names.push(format!("recv_{side}_{mine}_q{q}_{}", sym.tag()));
                pre.push(Formula::conj([
                    atom(mine),
                    not(atom("h")),
                    Formula::diamond(agent, Formula::and(atom(theirs), reads(q, sym))),
                ]));
                post.push(Formula::and(atom("h"), atom(&state_atom(t.next))));
            }
        }
        let mut idle = vec![atom(mine), not(atom("h"))];
        for (agent, moving) in [(left, from_left), (right, from_right)] {
            if !moving.is_empty() {
                idle.push(not(Formula::diamond(
                    agent,
                    Formula::and(atom(theirs), Formula::disj(moving)),
                )));
            }
        }
        names.push(format!("idle_{mine}"));
        pre.push(Formula::conj(idle));
        post.push(Formula::Top);
    }

    let n = names.len();
    let total: Vec<Vec<usize>> = vec![(0..n).collect(); n];
    let model = ActionModel::new(sig, names, vec![total.clone(), total], pre, post, (0..n).collect())?;
    Ok(CompiledMachine {
        tm: tm.clone(),
        width,
        model,
    })
}

impl CompiledMachine {
    pub fn machine(&self) -> &TuringMachine {
        &self.tm
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn action_model(&self) -> &ActionModel {
        &self.model
    }

    pub fn encode(&self, c: &TapeConfig) -> Result<PointedModel> {
        encode_config(&self.tm, c, self.width)
    }

    pub fn decode(&self, x: &PointedModel) -> Result<TapeConfig> {
        decode_config(&self.tm, x)
    }

    /// The clean map of the compiled action model, with its checks run on
    /// `sample`. The preconditions are modal, so the checks are sample-based.
    pub fn clean_map(&self, sample: &[PointedModel]) -> Result<CleanMap> {
        make_clean_map(self.model.clone(), sample, false)
    }

    /// One product update, contracted, with the tape-window guard: a head
    /// moving right off the last cell disappears from the encoding.
    pub fn step(&self, x: &PointedModel) -> Result<PointedModel> {
        let next = canonical_model(&product_update(x, &self.model)?);
        let h = next.sig().atom_index("h").expect("machine atom");
        if !(0..next.num_states()).any(|s| next.label(s)[h]) {
            return Err(Error::WindowOverflow { width: self.width });
        }
        Ok(next)
    }

    /// Run `steps` product updates from the encoding of `c` and decode each
    /// iterate.
    pub fn emulate(&self, c: &TapeConfig, steps: usize) -> Result<Vec<TapeConfig>> {
        let mut x = self.encode(c)?;
        let mut out = vec![c.clone()];
        for k in 0..steps {
            x = self.step(&x).map_err(|e| e.at_step(k + 1))?;
            out.push(self.decode(&x)?);
        }
        Ok(out)
    }
}

fn machine(names: &[&str], initial: usize, rows: Vec<[Option<Transition>; 4]>) -> TuringMachine {
    TuringMachine::new(names.iter().map(|s| s.to_string()).collect(), initial, rows)
        .expect("built-in machine is valid")
}

fn t(next: usize, write: Symbol, shift: Move) -> Option<Transition> {
    Some(Transition { next, write, shift })
}

/// Increments a mirrored base-2 number (lowest digit leftmost) forever.
/// Each phase starts and ends in state `start` with the head on the start
/// cell. Begin on `>0`.
pub fn successor_machine() -> TuringMachine {
    use Move::*;
    use Symbol::*;
    let (start, carry, back) = (0, 1, 2);
    machine(
        &["start", "carry", "back"],
        start,
        vec![
            // [>, 0, 1, _]
            [t(carry, Start, R), t(carry, Zero, R), t(carry, One, R), t(carry, Blank, R)],
            [t(carry, Start, R), t(back, One, L), t(carry, Zero, R), t(back, One, L)],
            [t(start, Start, S), t(back, Zero, L), t(back, One, L), t(back, Blank, L)],
        ],
    )
}

/// Initial configuration of [`successor_machine`]: the number 0.
pub fn successor_start() -> TapeConfig {
    TapeConfig::parse(">0", 0, 0).expect("valid tape")
}

/// A machine that, from [`period_start`], revisits its configuration every
/// `n` steps and no sooner: it walks `n / 2` cells right, walks back, and
/// spends one idle step on the start cell when `n` is odd. States `s0 ..`
/// are all distinct along the cycle.
pub fn period_machine(n: usize) -> Result<TuringMachine> {
    if n == 0 {
        return Err(Error::InvalidMachine("period must be positive".into()));
    }
    let k = n / 2;
    let rows = (0..n)
        .map(|i| {
            let next = (i + 1) % n;
            let shift = if i < k {
                Move::R
            } else if i < 2 * k {
                Move::L
            } else {
                Move::S
            };
            let mut row = [None; 4];
            for sym in Symbol::ALL {
                let shift = if sym == Symbol::Start && shift == Move::L { Move::S } else { shift };
                row[sym.index()] = t(next, sym, shift);
            }
            row
        })
        .collect();
    TuringMachine::new((0..n).map(|i| format!("s{i}")).collect(), 0, rows)
}

/// Start configuration of [`period_machine`]: `>` followed by `n / 2` zeros.
pub fn period_start(n: usize) -> TapeConfig {
    let tape = format!(">{}", "0".repeat(n / 2));
    TapeConfig::parse(&tape, 0, 0).expect("valid tape")
}

/// Indices of a configuration trace where a phase of the successor machine
/// has just completed (including index 0).
pub fn phase_starts(tm: &TuringMachine, trace: &[TapeConfig]) -> Vec<usize> {
    trace
        .iter()
        .enumerate()
        .filter(|(_, c)| c.state() == tm.initial() && c.head() == 0)
        .map(|(i, _)| i)
        .collect()
}

/// Decoded tapes after each of the first `phases` completed phases of the
/// compiled successor machine (index 0 is the initial tape).
pub fn successor_phases(phases: usize, width: usize) -> Result<Vec<TapeConfig>> {
    let tm = successor_machine();
    let compiled = compile_tm(&tm, width)?;
    let mut x = compiled.encode(&successor_start())?;
    let mut out = vec![successor_start()];
    let mut steps = 0;
    while out.len() <= phases {
        steps += 1;
        x = compiled.step(&x).map_err(|e| e.at_step(steps))?;
        let c = compiled.decode(&x)?;
        if c.state() == tm.initial() && c.head() == 0 {
            out.push(c);
        }
    }
    Ok(out)
}
