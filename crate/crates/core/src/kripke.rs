//! Finite pointed Kripke models, satisfaction, JSON and DOT.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Formula, Signature};

/// A finite Kripke model with a designated state.
///
/// States are kept in declaration order. That order only matters for
/// serialization; every semantic operation is invariant under renaming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedModel {
    sig: Arc<Signature>,
    states: Vec<String>,
    /// `succ[agent][state]`, sorted and deduplicated.
    succ: Vec<Vec<Vec<usize>>>,
    /// `val[state][atom]`
    val: Vec<Vec<bool>>,
    point: usize,
}

impl PointedModel {
    /// Build from index-based parts. Successor lists are sorted and deduplicated.
    pub fn from_parts(
        sig: Arc<Signature>,
        states: Vec<String>,
        mut succ: Vec<Vec<Vec<usize>>>,
        val: Vec<Vec<bool>>,
        point: usize,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidModel("a model needs at least one state".into()));
        }
        if point >= n {
            return Err(Error::InvalidModel(format!("point index {point} out of range")));
        }
        if succ.len() != sig.agents().len() {
            return Err(Error::InvalidModel("one relation per agent is required".into()));
        }
        if val.len() != n || val.iter().any(|v| v.len() != sig.atoms().len()) {
            return Err(Error::InvalidModel("valuation does not match states and atoms".into()));
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, s) in states.iter().enumerate() {
            if seen.insert(s.as_str(), i).is_some() {
                return Err(Error::InvalidModel(format!("duplicate state `{s}`")));
            }
        }
        for rel in &mut succ {
            if rel.len() != n {
                return Err(Error::InvalidModel("relation does not cover every state".into()));
            }
            for targets in rel.iter_mut() {
                targets.sort_unstable();
                targets.dedup();
                if targets.last().is_some_and(|&t| t >= n) {
                    return Err(Error::InvalidModel("edge to an undeclared state".into()));
                }
            }
        }
        Ok(PointedModel {
            sig,
            states,
            succ,
            val,
            point,
        })
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn point_name(&self) -> &str {
        &self.states[self.point]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn successors(&self, agent: usize, state: usize) -> &[usize] {
        &self.succ[agent][state]
    }

    pub fn relations(&self) -> &[Vec<Vec<usize>>] {
        &self.succ
    }

    /// Truth values of all atoms at `state`, in signature order.
    pub fn label(&self, state: usize) -> &[bool] {
        &self.val[state]
    }

    pub fn valuation(&self) -> &[Vec<bool>] {
        &self.val
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().flatten().map(Vec::len).sum()
    }

    /// Same model with a different designated state.
    pub fn with_point(&self, point: usize) -> Result<PointedModel> {
        if point >= self.states.len() {
            return Err(Error::InvalidModel(format!("point index {point} out of range")));
        }
        Ok(PointedModel { point, ..self.clone() })
    }

    pub fn with_state_names(&self, names: Vec<String>) -> Result<PointedModel> {
        PointedModel::from_parts(self.sig.clone(), names, self.succ.clone(), self.val.clone(), self.point)
    }

    /// Satisfaction at the point.
    pub fn eval(&self, formula: &Formula) -> Result<bool> {
        Ok(self.extension(formula)?[self.point])
    }

    /// Satisfaction at every state.
    pub fn extension(&self, formula: &Formula) -> Result<Vec<bool>> {
        formula.check(&self.sig)?;
        Ok(self.extension_checked(formula))
    }

    pub(crate) fn extension_checked(&self, formula: &Formula) -> Vec<bool> {
        let n = self.states.len();
        match formula {
            Formula::Top => vec![true; n],
            Formula::Atom(p) => {
                let a = self.sig.atom_index(p).expect("checked atom");
                self.val.iter().map(|v| v[a]).collect()
            }
            Formula::Not(inner) => self.extension_checked(inner).into_iter().map(|b| !b).collect(),
            Formula::And(l, r) => {
                let l = self.extension_checked(l);
                let r = self.extension_checked(r);
                l.into_iter().zip(r).map(|(a, b)| a && b).collect()
            }
            Formula::Box(i, inner) => {
                let agent = self.sig.agent_index(i).expect("checked agent");
                let inner = self.extension_checked(inner);
                self.succ[agent]
                    .iter()
                    .map(|targets| targets.iter().all(|&t| inner[t]))
                    .collect()
            }
        }
    }

    /// States reachable from the point along any agent's relation.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.point]);
        seen[self.point] = true;
        while let Some(s) = queue.pop_front() {
            for rel in &self.succ {
                for &t in &rel[s] {
                    if !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        seen
    }

    /// Restriction to the states reachable from the point.
    pub fn generated_submodel(&self) -> PointedModel {
        let keep = self.reachable();
        if keep.iter().all(|&k| k) {
            return self.clone();
        }
        self.restrict(&keep)
    }

    /// Restriction to the states flagged in `keep`, which must include the point.
    pub(crate) fn restrict(&self, keep: &[bool]) -> PointedModel {
        let mut map = vec![usize::MAX; self.states.len()];
        let mut states = Vec::new();
        for (i, name) in self.states.iter().enumerate() {
            if keep[i] {
                map[i] = states.len();
                states.push(name.clone());
            }
        }
        let succ = self
            .succ
            .iter()
            .map(|rel| {
                rel.iter()
                    .enumerate()
                    .filter(|(s, _)| keep[*s])
                    .map(|(_, targets)| {
                        targets.iter().filter(|&&t| keep[t]).map(|&t| map[t]).collect()
                    })
                    .collect()
            })
            .collect();
        let val = self
            .val
            .iter()
            .enumerate()
            .filter(|(s, _)| keep[*s])
            .map(|(_, v)| v.clone())
            .collect();
        PointedModel {
            sig: self.sig.clone(),
            states,
            succ,
            val,
            point: map[self.point],
        }
    }

    /// This model expressed over `sig`, reordering atoms and agents if the
    /// vocabularies agree.
    pub fn aligned_to(&self, sig: &Arc<Signature>) -> Result<Cow<'_, PointedModel>> {
        if Arc::ptr_eq(&self.sig, sig) || *self.sig == **sig {
            return Ok(Cow::Borrowed(self));
        }
        if !self.sig.same_vocabulary(sig) {
            return Err(Error::SignatureMismatch(format!(
                "{:?} vs {:?}",
                self.sig, sig
            )));
        }
        let succ = sig
            .agents()
            .iter()
            .map(|a| self.succ[self.sig.agent_index(a).unwrap()].clone())
            .collect();
        let atom_map: Vec<usize> = sig
            .atoms()
            .iter()
            .map(|p| self.sig.atom_index(p).unwrap())
            .collect();
        let val = self
            .val
            .iter()
            .map(|v| atom_map.iter().map(|&a| v[a]).collect())
            .collect();
        Ok(Cow::Owned(PointedModel {
            sig: sig.clone(),
            states: self.states.clone(),
            succ,
            val,
            point: self.point,
        }))
    }

    pub fn from_json(text: &str) -> Result<PointedModel> {
        let raw: ModelJson = serde_json::from_str(text)?;
        raw.into_model()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("model JSON serializes")
    }

    pub fn to_json_value(&self) -> ModelJson {
        let relations = self
            .sig
            .agents()
            .iter()
            .enumerate()
            .map(|(a, name)| {
                let pairs = self.succ[a]
                    .iter()
                    .enumerate()
                    .flat_map(|(s, targets)| {
                        targets
                            .iter()
                            .map(move |&t| (self.states[s].clone(), self.states[t].clone()))
                    })
                    .collect();
                (name.clone(), pairs)
            })
            .collect();
        let valuation = self
            .sig
            .atoms()
            .iter()
            .enumerate()
            .map(|(p, name)| {
                let holders = (0..self.states.len())
                    .filter(|&s| self.val[s][p])
                    .map(|s| self.states[s].clone())
                    .collect();
                (name.clone(), holders)
            })
            .collect();
        ModelJson {
            states: self.states.clone(),
            agents: self.sig.agents().to_vec(),
            atoms: Some(self.sig.atoms().to_vec()),
            relations,
            valuation,
            point: self.point_name().to_string(),
        }
    }

    /// Graphviz rendering. Edge labels are agents; the point is double-circled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph model {\n");
        for (s, name) in self.states.iter().enumerate() {
            let mut label = escape(name);
            let atoms: Vec<&str> = self
                .sig
                .atoms()
                .iter()
                .enumerate()
                .filter(|(p, _)| self.val[s][*p])
                .map(|(_, a)| a.as_str())
                .collect();
            if !atoms.is_empty() {
                label.push_str("\\n");
                label.push_str(&atoms.join(","));
            }
            let shape = if s == self.point { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  \"{}\" [label=\"{label}\", shape={shape}];", escape(name));
        }
        for (a, agent) in self.sig.agents().iter().enumerate() {
            for (s, targets) in self.succ[a].iter().enumerate() {
                for &t in targets {
                    let _ = writeln!(
                        out,
                        "  \"{}\" -> \"{}\" [label=\"{agent}\"];",
                        escape(&self.states[s]),
                        escape(&self.states[t])
                    );
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// On-disk model format. `atoms` is optional on input; when absent the atoms
/// are the keys of `valuation` in sorted order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub states: Vec<String>,
    pub agents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<String>>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
    pub point: String,
}

impl ModelJson {
    pub fn into_model(self) -> Result<PointedModel> {
        let atoms = self
            .atoms
            .clone()
            .unwrap_or_else(|| self.valuation.keys().cloned().collect());
        let sig = Arc::new(Signature::new(atoms, self.agents.clone())?);
        let mut builder = ModelBuilder::new(sig);
        for s in &self.states {
            builder = builder.state(s);
        }
        for (agent, pairs) in &self.relations {
            for (s, t) in pairs {
                builder = builder.edge(agent, s, t);
            }
        }
        for (atom, holders) in &self.valuation {
            for s in holders {
                builder = builder.set(atom, s);
            }
        }
        builder.point(&self.point).build()
    }
}

/// Name-based construction, mostly for tests and examples.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    sig: Arc<Signature>,
    states: Vec<String>,
    edges: Vec<(String, String, String)>,
    truths: Vec<(String, String)>,
    point: Option<String>,
}

impl ModelBuilder {
    pub fn new(sig: Arc<Signature>) -> Self {
        ModelBuilder {
            sig,
            states: Vec::new(),
            edges: Vec::new(),
            truths: Vec::new(),
            point: None,
        }
    }

    pub fn state(mut self, name: &str) -> Self {
        self.states.push(name.to_string());
        self
    }

    pub fn states<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.states.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn edge(mut self, agent: &str, from: &str, to: &str) -> Self {
        self.edges.push((agent.into(), from.into(), to.into()));
        self
    }

    /// Make `atom` true at `state`.
    pub fn set(mut self, atom: &str, state: &str) -> Self {
        self.truths.push((atom.into(), state.into()));
        self
    }

    pub fn point(mut self, state: &str) -> Self {
        self.point = Some(state.into());
        self
    }

    pub fn build(self) -> Result<PointedModel> {
        let index: HashMap<&str, usize> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::InvalidModel(format!("undeclared state `{s}`")))
        };
        let n = self.states.len();
        let mut succ = vec![vec![Vec::new(); n]; self.sig.agents().len()];
        for (agent, from, to) in &self.edges {
            let a = self
                .sig
                .agent_index(agent)
                .ok_or_else(|| Error::UnknownAgent(agent.clone()))?;
            succ[a][lookup(from)?].push(lookup(to)?);
        }
        let mut val = vec![vec![false; self.sig.atoms().len()]; n];
        for (atom, state) in &self.truths {
            let p = self
                .sig
                .atom_index(atom)
                .ok_or_else(|| Error::UnknownAtom(atom.clone()))?;
            val[lookup(state)?][p] = true;
        }
        let point = match &self.point {
            Some(p) => lookup(p)?,
            None => return Err(Error::InvalidModel("no point designated".into())),
        };
        PointedModel::from_parts(self.sig, self.states, succ, val, point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Arc<Signature> {
        Arc::new(Signature::new(["p", "q"], ["a", "b"]).unwrap())
    }

    fn f(text: &str) -> Formula {
        Formula::parse(text, &sig()).unwrap()
    }

    #[test]
    fn vacuous_box_at_dead_end() {
        let x = ModelBuilder::new(sig()).state("s").point("s").build().unwrap();
        assert!(x.eval(&f("[a]F")).unwrap());
        assert!(!x.eval(&f("<a>T")).unwrap());
    }

    #[test]
    fn atoms_and_boxes() {
        let x = ModelBuilder::new(sig())
            .states(["s", "t", "u"])
            .set("p", "s")
            .set("q", "t")
            .edge("a", "s", "t")
            .edge("a", "s", "u")
            .edge("b", "s", "t")
            .set("q", "u")
            .point("s")
            .build()
            .unwrap();
        assert!(x.eval(&f("p")).unwrap());
        assert!(x.eval(&f("[a]q")).unwrap());
        assert!(x.eval(&f("<b>(q & ~p)")).unwrap());
        assert!(!x.eval(&f("[a]p")).unwrap());
        assert_eq!(x.eval(&Formula::atom("r")).unwrap_err(), Error::UnknownAtom("r".into()));
    }

    #[test]
    fn generated_submodel_drops_unreachable_states() {
        let chain = ModelBuilder::new(sig())
            .states(["c0", "c1", "c2"])
            .edge("a", "c0", "c1")
            .edge("a", "c1", "c2")
            .point("c1")
            .build()
            .unwrap();
        let sub = chain.generated_submodel();
        assert_eq!(sub.states(), ["c1", "c2"]);
        assert_eq!(sub.point_name(), "c1");
        assert_eq!(sub.successors(0, 0), [1]);

        let full = chain.with_point(0).unwrap();
        assert_eq!(full.generated_submodel(), full);
    }

    #[test]
    fn builder_rejects_bad_references() {
        assert!(ModelBuilder::new(sig()).state("s").build().is_err());
        assert!(ModelBuilder::new(sig()).state("s").point("t").build().is_err());
        assert!(ModelBuilder::new(sig()).state("s").edge("c", "s", "s").point("s").build().is_err());
        assert!(ModelBuilder::new(sig()).state("s").set("r", "s").point("s").build().is_err());
        assert!(ModelBuilder::new(sig()).states(["s", "s"]).point("s").build().is_err());
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let text = r#"{"states":["s","t"],"agents":["a"],
            "relations":{"a":[["s","t"],["t","t"]]},
            "valuation":{"p":["t"],"q":[]},"point":"s"}"#;
        let x = PointedModel::from_json(text).unwrap();
        assert_eq!(x.sig().atoms(), ["p", "q"]);
        assert!(x.eval(&Formula::parse("[a]p", x.sig()).unwrap()).unwrap());
        let back = PointedModel::from_json(&x.to_json()).unwrap();
        assert_eq!(back, x);
        assert!(PointedModel::from_json("{").is_err());
        assert!(PointedModel::from_json(r#"{"states":["s"],"agents":["a"],"point":"x"}"#).is_err());
    }

    #[test]
    fn alignment_reorders_vocabulary() {
        let x = ModelBuilder::new(sig()).state("s").set("p", "s").point("s").build().unwrap();
        let other = Arc::new(Signature::new(["q", "p"], ["b", "a"]).unwrap());
        let y = x.aligned_to(&other).unwrap();
        assert_eq!(y.label(0), [false, true]);
        let wrong = Arc::new(Signature::new(["p"], ["a", "b"]).unwrap());
        assert!(matches!(x.aligned_to(&wrong), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn dot_marks_point_and_labels() {
        let x = ModelBuilder::new(sig())
            .states(["s", "t"])
            .set("p", "s")
            .edge("b", "s", "t")
            .point("s")
            .build()
            .unwrap();
        let dot = x.to_dot();
        assert!(dot.contains("\"s\" [label=\"s\\np\", shape=doublecircle];"));
        assert!(dot.contains("\"t\" [label=\"t\", shape=circle];"));
        assert!(dot.contains("\"s\" -> \"t\" [label=\"b\"];"));
    }
}
