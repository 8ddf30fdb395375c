//! Multi-pointed action models, product update and clean maps.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bisim::canonical_model;
use crate::error::{Error, Result};
use crate::formula::{parse_formula, Formula, Signature};
use crate::kripke::PointedModel;

/// Valuations are enumerated only up to this many distinct atoms.
const MAX_PROPOSITIONAL_ATOMS: usize = 20;

/// An action model with preconditions, clause postconditions and a non-empty
/// set of designated actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionModel {
    sig: Arc<Signature>,
    actions: Vec<String>,
    /// `rel[agent][action]`, sorted.
    rel: Vec<Vec<Vec<usize>>>,
    pre: Vec<Formula>,
    post: Vec<Formula>,
    /// Sorted action indices.
    designated: Vec<usize>,
    /// `effects[action][atom]`: forced truth value, if any.
    effects: Vec<Vec<Option<bool>>>,
}

impl ActionModel {
    pub fn new(
        sig: Arc<Signature>,
        actions: Vec<String>,
        mut rel: Vec<Vec<Vec<usize>>>,
        pre: Vec<Formula>,
        post: Vec<Formula>,
        mut designated: Vec<usize>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidActionModel(msg));
        let n = actions.len();
        if n == 0 {
            return bad("at least one action is required".into());
        }
        let mut seen = HashMap::new();
        for (i, a) in actions.iter().enumerate() {
            if seen.insert(a.as_str(), i).is_some() {
                return bad(format!("duplicate action `{a}`"));
            }
        }
        if pre.len() != n || post.len() != n {
            return bad("one precondition and one postcondition per action".into());
        }
        if rel.len() != sig.agents().len() || rel.iter().any(|r| r.len() != n) {
            return bad("one relation per agent over all actions".into());
        }
        for r in &mut rel {
            for targets in r.iter_mut() {
                targets.sort_unstable();
                targets.dedup();
                if targets.last().is_some_and(|&t| t >= n) {
                    return bad("edge to an undeclared action".into());
                }
            }
        }
        designated.sort_unstable();
        designated.dedup();
        if designated.is_empty() {
            return bad("the designated set must not be empty".into());
        }
        if designated.last().is_some_and(|&d| d >= n) {
            return bad("designated action out of range".into());
        }
        for f in pre.iter().chain(&post) {
            f.check(&sig)?;
        }
        let mut effects = Vec::with_capacity(n);
        for (a, p) in actions.iter().zip(&post) {
            let Some(lits) = p.literals() else {
                return bad(format!("postcondition of `{a}` is not T or a conjunctive clause"));
            };
            effects.push(clause_effects(&sig, &lits));
        }
        Ok(ActionModel {
            sig,
            actions,
            rel,
            pre,
            post,
            designated,
            effects,
        })
    }

    /// One designated action with precondition and postcondition `T` and a
    /// reflexive loop for every agent.
    pub fn skip(sig: Arc<Signature>) -> Self {
        let agents = sig.agents().len();
        ActionModel::new(
            sig,
            vec!["skip".into()],
            vec![vec![vec![0]]; agents],
            vec![Formula::Top],
            vec![Formula::Top],
            vec![0],
        )
        .expect("skip is well-formed")
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn pre(&self, action: usize) -> &Formula {
        &self.pre[action]
    }

    pub fn post(&self, action: usize) -> &Formula {
        &self.post[action]
    }

    pub fn designated(&self) -> &[usize] {
        &self.designated
    }

    pub fn successors(&self, agent: usize, action: usize) -> &[usize] {
        &self.rel[agent][action]
    }

    /// Every precondition is Boolean.
    pub fn is_boolean(&self) -> bool {
        self.pre.iter().all(Formula::is_boolean)
    }

    /// Every postcondition is `T`.
    pub fn is_static(&self) -> bool {
        self.post.iter().all(|p| *p == Formula::Top)
    }

    pub fn max_precondition_depth(&self) -> usize {
        self.pre.iter().map(Formula::modal_depth).max().unwrap_or(0)
    }

    /// Parse the JSON form against the vocabulary of `sig`. Omitted pre- and
    /// postconditions default to `T`.
    pub fn from_json(text: &str, sig: &Arc<Signature>) -> Result<Self> {
        let raw: ActionJson = serde_json::from_str(text)?;
        let declared = Signature::new(sig.atoms().to_vec(), raw.agents.clone())?;
        if !declared.same_vocabulary(sig) {
            return Err(Error::SignatureMismatch(format!(
                "action model agents {:?} vs model agents {:?}",
                raw.agents,
                sig.agents()
            )));
        }
        let index: HashMap<&str, usize> = raw
            .actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();
        let lookup = |a: &str| {
            index
                .get(a)
                .copied()
                .ok_or_else(|| Error::InvalidActionModel(format!("undeclared action `{a}`")))
        };
        let n = raw.actions.len();
        let mut rel = vec![vec![Vec::new(); n]; sig.agents().len()];
        for (agent, pairs) in &raw.relations {
            let i = sig
                .agent_index(agent)
                .ok_or_else(|| Error::UnknownAgent(agent.clone()))?;
            for (s, t) in pairs {
                rel[i][lookup(s)?].push(lookup(t)?);
            }
        }
        let condition = |table: &BTreeMap<String, String>| -> Result<Vec<Formula>> {
            for key in table.keys() {
                lookup(key)?;
            }
            raw.actions
                .iter()
                .map(|a| match table.get(a) {
                    Some(text) => {
                        let f = parse_formula(text)?;
                        f.check(sig)?;
                        Ok(f)
                    }
                    None => Ok(Formula::Top),
                })
                .collect()
        };
        let pre = condition(&raw.pre)?;
        let post = condition(&raw.post)?;
        let designated = raw
            .designated
            .iter()
            .map(|a| lookup(a))
            .collect::<Result<Vec<_>>>()?;
        ActionModel::new(sig.clone(), raw.actions, rel, pre, post, designated)
    }

    pub fn to_json(&self) -> String {
        let relations = self
            .sig
            .agents()
            .iter()
            .enumerate()
            .map(|(i, agent)| {
                let pairs = self.rel[i]
                    .iter()
                    .enumerate()
                    .flat_map(|(s, ts)| {
                        ts.iter()
                            .map(move |&t| (self.actions[s].clone(), self.actions[t].clone()))
                    })
                    .collect();
                (agent.clone(), pairs)
            })
            .collect();
        let table = |fs: &[Formula]| {
            self.actions
                .iter()
                .cloned()
                .zip(fs.iter().map(Formula::render))
                .collect()
        };
        let raw = ActionJson {
            actions: self.actions.clone(),
            agents: self.sig.agents().to_vec(),
            relations,
            pre: table(&self.pre),
            post: table(&self.post),
            designated: self.designated.iter().map(|&d| self.actions[d].clone()).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("action JSON serializes")
    }
}

/// Forced atom values of a clause. An inconsistent clause entails every atom.
fn clause_effects(sig: &Signature, lits: &[(&str, bool)]) -> Vec<Option<bool>> {
    let mut effects = vec![None; sig.atoms().len()];
    let mut inconsistent = false;
    for &(atom, polarity) in lits {
        let p = sig.atom_index(atom).expect("checked atom");
        match effects[p] {
            Some(v) if v != polarity => inconsistent = true,
            _ => effects[p] = Some(polarity),
        }
    }
    if inconsistent {
        return vec![Some(true); sig.atoms().len()];
    }
    effects
}

#[derive(Serialize, Deserialize)]
struct ActionJson {
    actions: Vec<String>,
    agents: Vec<String>,
    #[serde(default)]
    relations: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default)]
    pre: BTreeMap<String, String>,
    #[serde(default)]
    post: BTreeMap<String, String>,
    designated: Vec<String>,
}

/// Designated actions whose precondition holds at the point of `x`.
fn applicable_designated(x: &PointedModel, model: &ActionModel) -> Vec<usize> {
    model
        .designated
        .iter()
        .copied()
        .filter(|&d| x.extension_checked(&model.pre[d])[x.point()])
        .collect()
}

/// The product update `x ⊗ model`, restricted to its point-generated part.
///
/// Fails unless exactly one designated action is applicable at the point.
pub fn product_update(x: &PointedModel, model: &ActionModel) -> Result<PointedModel> {
    let x = x.aligned_to(&model.sig)?;
    let applicable = applicable_designated(&x, model);
    let chosen = match applicable.as_slice() {
        [one] => *one,
        [] => {
            return Err(Error::NoApplicableDesignatedAction {
                point: x.point_name().to_string(),
                actions: model.designated.iter().map(|&a| model.actions[a].clone()).collect(),
            })
        }
        many => {
            return Err(Error::MultipleApplicableDesignatedActions {
                point: x.point_name().to_string(),
                actions: many.iter().map(|&d| model.actions[d].clone()).collect(),
            })
        }
    };

    let extensions: Vec<Vec<bool>> = model.pre.iter().map(|f| x.extension_checked(f)).collect();
    let n_actions = model.actions.len();
    let mut index = vec![usize::MAX; x.num_states() * n_actions];
    let mut pairs = Vec::new();
    for s in 0..x.num_states() {
        for (a, ext) in extensions.iter().enumerate() {
            if ext[s] {
                index[s * n_actions + a] = pairs.len();
                pairs.push((s, a));
            }
        }
    }

    let states = pairs
        .iter()
        .map(|&(s, a)| format!("({},{})", x.states()[s], model.actions[a]))
        .collect();
    let succ = (0..model.sig.agents().len())
        .map(|i| {
            pairs
                .iter()
                .map(|&(s, a)| {
                    let mut out = Vec::new();
                    for &t in x.successors(i, s) {
                        for &b in model.successors(i, a) {
                            let j = index[t * n_actions + b];
                            if j != usize::MAX {
                                out.push(j);
                            }
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();
    let val = pairs
        .iter()
        .map(|&(s, a)| {
            x.label(s)
                .iter()
                .zip(&model.effects[a])
                .map(|(&old, effect)| effect.unwrap_or(old))
                .collect()
        })
        .collect();
    let point = index[x.point() * n_actions + chosen];
    let product = PointedModel::from_parts(model.sig.clone(), states, succ, val, point)?;
    Ok(product.generated_submodel())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Exhaustive,
    Deterministic,
}

/// How a property of the designated preconditions was established.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certification {
    /// Holds under every valuation of the atoms, hence on every model.
    Proved,
    /// Fails under this valuation (listed by its true atoms). Sample models
    /// may still all pass if none realizes it.
    Disproved { witness: Vec<String> },
    /// Some designated precondition is modal; only the sample was checked.
    SampleOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Index into the sample.
    pub model: usize,
    /// Applicable designated actions at its point.
    pub actions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub property: Property,
    pub certification: Certification,
    pub sample_size: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl CheckReport {
    pub fn certified(&self) -> bool {
        self.certification == Certification::Proved
    }

    /// No sample model violates the property.
    pub fn sample_passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    /// Known to fail: a counterexample model or a propositional witness.
    pub fn refuted(&self) -> bool {
        !self.sample_passed() || matches!(self.certification, Certification::Disproved { .. })
    }
}

/// Is some designated action applicable to every model?
pub fn check_exhaustive(model: &ActionModel, sample: &[PointedModel]) -> Result<CheckReport> {
    check(model, sample, Property::Exhaustive)
}

/// Is at most one designated action applicable to every model?
pub fn check_deterministic(model: &ActionModel, sample: &[PointedModel]) -> Result<CheckReport> {
    check(model, sample, Property::Deterministic)
}

fn check(model: &ActionModel, sample: &[PointedModel], property: Property) -> Result<CheckReport> {
    let ok = |count: usize| match property {
        Property::Exhaustive => count >= 1,
        Property::Deterministic => count <= 1,
    };
    let pres: Vec<&Formula> = model.designated.iter().map(|&d| &model.pre[d]).collect();
    let certification = propositional(&model.sig, &pres, ok);

    let mut counterexamples = Vec::new();
    for (i, x) in sample.iter().enumerate() {
        let x = x.aligned_to(&model.sig)?;
        let applicable = applicable_designated(&x, model);
        if !ok(applicable.len()) {
            counterexamples.push(Counterexample {
                model: i,
                actions: applicable.iter().map(|&d| model.actions[d].clone()).collect(),
            });
        }
    }
    Ok(CheckReport {
        property,
        certification,
        sample_size: sample.len(),
        counterexamples,
    })
}

/// Decide `ok(number of true formulas)` under every valuation of the atoms
/// occurring in the Boolean formulas `pres`.
fn propositional(sig: &Signature, pres: &[&Formula], ok: impl Fn(usize) -> bool) -> Certification {
    if pres.iter().any(|f| !f.is_boolean()) {
        return Certification::SampleOnly;
    }
    let mut atoms: Vec<usize> = Vec::new();
    for f in pres {
        collect_atoms(sig, f, &mut atoms);
    }
    atoms.sort_unstable();
    atoms.dedup();
    if atoms.len() > MAX_PROPOSITIONAL_ATOMS {
        return Certification::SampleOnly;
    }
    let mut valuation = vec![false; sig.atoms().len()];
    for bits in 0u64..(1u64 << atoms.len()) {
        for (k, &p) in atoms.iter().enumerate() {
            valuation[p] = bits >> k & 1 == 1;
        }
        let count = pres.iter().filter(|f| eval_boolean(sig, f, &valuation)).count();
        if !ok(count) {
            let witness = atoms
                .iter()
                .filter(|&&p| valuation[p])
                .map(|&p| sig.atoms()[p].clone())
                .collect();
            return Certification::Disproved { witness };
        }
    }
    Certification::Proved
}

fn collect_atoms(sig: &Signature, f: &Formula, out: &mut Vec<usize>) {
    match f {
        Formula::Top => {}
        Formula::Atom(p) => out.extend(sig.atom_index(p)),
        Formula::Not(inner) | Formula::Box(_, inner) => collect_atoms(sig, inner, out),
        Formula::And(l, r) => {
            collect_atoms(sig, l, out);
            collect_atoms(sig, r, out);
        }
    }
}

fn eval_boolean(sig: &Signature, f: &Formula, valuation: &[bool]) -> bool {
    match f {
        Formula::Top => true,
        Formula::Atom(p) => valuation[sig.atom_index(p).expect("checked atom")],
        Formula::Not(inner) => !eval_boolean(sig, inner, valuation),
        Formula::And(l, r) => eval_boolean(sig, l, valuation) && eval_boolean(sig, r, valuation),
        Formula::Box(..) => unreachable!("Boolean formulas have no boxes"),
    }
}

/// An action model together with the evidence that it induces a total,
/// well-defined map on the modal space.
#[derive(Debug, Clone)]
pub struct CleanMap {
    model: ActionModel,
    exhaustive: CheckReport,
    deterministic: CheckReport,
}

impl CleanMap {
    pub fn model(&self) -> &ActionModel {
        &self.model
    }

    pub fn exhaustive(&self) -> &CheckReport {
        &self.exhaustive
    }

    pub fn deterministic(&self) -> &CheckReport {
        &self.deterministic
    }

    pub fn certified(&self) -> bool {
        self.exhaustive.certified() && self.deterministic.certified()
    }

    /// Product update followed by contraction to the canonical representative.
    /// The product-update guards run on every call.
    pub fn apply(&self, x: &PointedModel) -> Result<PointedModel> {
        Ok(canonical_model(&product_update(x, &self.model)?))
    }
}

/// Check `model` against the sample and wrap it. In strict mode a model that
/// is known to violate exhaustiveness or determinism is rejected.
pub fn make_clean_map(model: ActionModel, sample: &[PointedModel], strict: bool) -> Result<CleanMap> {
    let exhaustive = check_exhaustive(&model, sample)?;
    let deterministic = check_deterministic(&model, sample)?;
    if strict {
        for report in [&exhaustive, &deterministic] {
            if report.refuted() {
                return Err(Error::StrictRejected(format!(
                    "{:?} fails ({:?}, {} counterexamples)",
                    report.property,
                    report.certification,
                    report.counterexamples.len()
                )));
            }
        }
    }
    Ok(CleanMap {
        model,
        exhaustive,
        deterministic,
    })
}
