//! Bounded and full bisimulation by partition refinement, bisimulation
//! contraction, canonical forms and characteristic formulas.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{Formula, Signature};
use crate::kripke::PointedModel;

/// Level-by-level partitions of the disjoint union of one or more models.
///
/// Level 0 groups states by valuation. Level `n + 1` splits a level-`n`
/// class by the set of level-`n` classes each agent can reach. Class ids
/// are ranks of the sorted splitting keys, so they do not depend on state
/// names or declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTrace {
    offsets: Vec<usize>,
    points: Vec<usize>,
    levels: Vec<Vec<u32>>,
    stabilization: Option<usize>,
}

impl PartitionTrace {
    /// Least `n` with partition `n` equal to partition `n + 1`, if reached.
    pub fn stabilization(&self) -> Option<usize> {
        self.stabilization
    }

    /// Number of stored levels.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// The stored level that represents level `n`: past stabilization all
    /// levels coincide.
    fn clamp(&self, n: usize) -> usize {
        let last = self.levels.len() - 1;
        assert!(
            n <= last || self.stabilization.is_some(),
            "level {n} was not computed"
        );
        n.min(last)
    }

    /// Class of `state` of the `model`-th input at level `n`.
    pub fn class(&self, n: usize, model: usize, state: usize) -> u32 {
        self.levels[self.clamp(n)][self.offsets[model] + state]
    }

    /// Class of the point of the `model`-th input at level `n`.
    pub fn point_class(&self, n: usize, model: usize) -> u32 {
        self.class(n, model, self.points[model])
    }

    /// Level `n` as a state-to-class map over the whole union.
    pub fn level(&self, n: usize) -> &[u32] {
        &self.levels[self.clamp(n)]
    }

    pub fn num_classes(&self, n: usize) -> usize {
        self.level(n).iter().copied().max().map_or(0, |m| m as usize + 1)
    }

    /// Least level at which the points of two inputs fall apart.
    pub fn split_level(&self, a: usize, b: usize) -> Option<usize> {
        (0..self.levels.len()).find(|&n| self.point_class(n, a) != self.point_class(n, b))
    }
}

/// Partition refinement on `x`, or on the disjoint union of `x` and `y`.
pub fn refine(x: &PointedModel, y: Option<&PointedModel>) -> Result<PartitionTrace> {
    match y {
        Some(y) => {
            let y = y.aligned_to(x.sig())?;
            refine_many(&[x, &y], None)
        }
        None => refine_many(&[x], None),
    }
}

/// Partition refinement over the disjoint union of `models`, stopping at
/// stabilization or after `max_level`, whichever comes first.
pub fn refine_many(models: &[&PointedModel], max_level: Option<usize>) -> Result<PartitionTrace> {
    let first = models.first().expect("at least one model");
    let sig = first.sig();
    for m in &models[1..] {
        if m.sig() != sig {
            return Err(Error::SignatureMismatch(format!("{:?} vs {:?}", m.sig(), sig)));
        }
    }
    let mut offsets = Vec::with_capacity(models.len());
    let mut total = 0;
    for m in models {
        offsets.push(total);
        total += m.num_states();
    }
    let points = models.iter().map(|m| m.point()).collect();

    let labels: Vec<&[bool]> = models
        .iter()
        .flat_map(|m| (0..m.num_states()).map(move |s| m.label(s)))
        .collect();
    let mut levels = vec![rank(&labels)];
    let mut stabilization = None;

    let agents = sig.agents().len();
    while max_level.is_none_or(|max| levels.len() <= max) {
        let prev = levels.last().unwrap();
        let keys: Vec<(u32, Vec<Vec<u32>>)> = models
            .iter()
            .zip(&offsets)
            .flat_map(|(m, &off)| {
                (0..m.num_states()).map(move |s| {
                    let reach = (0..agents)
                        .map(|a| {
                            let set: BTreeSet<u32> =
                                m.successors(a, s).iter().map(|&t| prev[off + t]).collect();
                            set.into_iter().collect()
                        })
                        .collect();
                    (prev[off + s], reach)
                })
            })
            .collect();
        let next = rank(&keys);
        let before = prev.iter().max().copied();
        if next.iter().max().copied() == before {
            stabilization = Some(levels.len() - 1);
            break;
        }
        levels.push(next);
    }

    Ok(PartitionTrace {
        offsets,
        points,
        levels,
        stabilization,
    })
}

fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let distinct: BTreeSet<&K> = keys.iter().collect();
    let ids: BTreeMap<&K, u32> = distinct.into_iter().zip(0u32..).collect();
    keys.iter().map(|k| ids[k]).collect()
}

/// Whether the points of `x` and `y` are `n`-bisimilar.
pub fn n_bisimilar(x: &PointedModel, y: &PointedModel, n: usize) -> Result<bool> {
    let y = y.aligned_to(x.sig())?;
    let trace = refine_many(&[x, &y], Some(n))?;
    Ok(trace.point_class(n, 0) == trace.point_class(n, 1))
}

pub fn bisimilar(x: &PointedModel, y: &PointedModel) -> Result<bool> {
    let trace = refine(x, Some(y))?;
    Ok(trace.split_level(0, 1).is_none())
}

/// Quotient of the point-generated submodel by bisimilarity.
///
/// Each class is named after its first member in declaration order.
pub fn contract(x: &PointedModel) -> PointedModel {
    let sub = x.generated_submodel();
    let trace = refine_many(&[&sub], None).expect("single model");
    let classes = trace.level(usize::MAX);
    quotient(&sub, classes)
}

fn quotient(x: &PointedModel, classes: &[u32]) -> PointedModel {
    let mut order: HashMap<u32, usize> = HashMap::new();
    let mut names = Vec::new();
    let mut val = Vec::new();
    for (s, &c) in classes.iter().enumerate() {
        if let std::collections::hash_map::Entry::Vacant(e) = order.entry(c) {
            e.insert(names.len());
            names.push(x.states()[s].clone());
            val.push(x.label(s).to_vec());
        }
    }
    let n = names.len();
    let succ = (0..x.sig().agents().len())
        .map(|a| {
            let mut rel = vec![Vec::new(); n];
            for (s, &c) in classes.iter().enumerate() {
                let from = order[&c];
                rel[from].extend(x.successors(a, s).iter().map(|&t| order[&classes[t]]));
            }
            rel
        })
        .collect();
    let point = order[&classes[x.point()]];
    PointedModel::from_parts(x.sig().clone(), names, succ, val, point).expect("quotient is well-formed")
}

/// The contraction of `x` with states ordered by their refinement colors and
/// renamed `w0, w1, ...`. Bisimilar inputs give identical outputs.
pub fn canonical_model(x: &PointedModel) -> PointedModel {
    let min = contract(x);
    let trace = refine_many(&[&min], None).expect("single model");
    let colors = trace.level(usize::MAX);
    debug_assert_eq!(trace.num_classes(usize::MAX), min.num_states());
    let mut order: Vec<usize> = (0..min.num_states()).collect();
    order.sort_by_key(|&s| colors[s]);
    let mut position = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }
    let names = (0..order.len()).map(|i| format!("w{i}")).collect();
    let val = order.iter().map(|&s| min.label(s).to_vec()).collect();
    let succ = (0..min.sig().agents().len())
        .map(|a| {
            order
                .iter()
                .map(|&s| min.successors(a, s).iter().map(|&t| position[t]).collect())
                .collect()
        })
        .collect();
    PointedModel::from_parts(min.sig().clone(), names, succ, val, position[min.point()])
        .expect("reordering is well-formed")
}

/// Canonical bytes: equal exactly for bisimilar models over the same signature.
pub fn canonical_form(x: &PointedModel) -> Vec<u8> {
    serialize_canonical(&canonical_model(x))
}

pub(crate) fn serialize_canonical(c: &PointedModel) -> Vec<u8> {
    let sig: &Arc<Signature> = c.sig();
    let mut out = String::new();
    let _ = write!(
        out,
        "v1;atoms={};agents={};n={};point={};val=",
        sig.atoms().join(","),
        sig.agents().join(","),
        c.num_states(),
        c.point()
    );
    for s in 0..c.num_states() {
        if s > 0 {
            out.push(',');
        }
        out.extend(c.label(s).iter().map(|&b| if b { '1' } else { '0' }));
    }
    for a in 0..sig.agents().len() {
        let _ = write!(out, ";r{a}=");
        let mut first = true;
        for s in 0..c.num_states() {
            for &t in c.successors(a, s) {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{s}>{t}");
            }
        }
    }
    out.into_bytes()
}

/// A formula of modal depth at most `n` true exactly at the models that are
/// `n`-bisimilar to `x`.
pub fn char_formula(x: &PointedModel, n: usize) -> Formula {
    let mut memo = HashMap::new();
    characteristic(x, x.point(), n, &mut memo)
}

fn characteristic(
    x: &PointedModel,
    s: usize,
    n: usize,
    memo: &mut HashMap<(usize, usize), Formula>,
) -> Formula {
    if let Some(f) = memo.get(&(s, n)) {
        return f.clone();
    }
    let sig = x.sig();
    let mut parts: Vec<Formula> = sig
        .atoms()
        .iter()
        .zip(x.label(s))
        .map(|(p, &holds)| {
            if holds {
                Formula::atom(p.clone())
            } else {
                Formula::negate(Formula::atom(p.clone()))
            }
        })
        .collect();
    if n > 0 {
        for (a, agent) in sig.agents().iter().enumerate() {
            let succ: BTreeSet<Formula> = x
                .successors(a, s)
                .iter()
                .map(|&t| characteristic(x, t, n - 1, memo))
                .collect();
            for f in &succ {
                parts.push(Formula::diamond(agent.clone(), f.clone()));
            }
            parts.push(Formula::boxed(agent.clone(), Formula::disj(succ)));
        }
    }
    let f = Formula::conj(parts);
    memo.insert((s, n), f.clone());
    f
}
