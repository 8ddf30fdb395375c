//! Orbits of clean maps: iteration, period detection, recurrence at a fixed
//! depth and distance traces.

use std::collections::HashMap;
use std::io::{self, Write};

use serde::Serialize;

use crate::action::{product_update, CleanMap};
use crate::bisim::{bisimilar, canonical_form, canonical_model, n_bisimilar, refine_many};
use crate::error::Result;
use crate::kripke::PointedModel;
use crate::metrics::{d_b, d_w, Distance, MetricSpec};

/// Why iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stop {
    /// The last iterate repeats an earlier one.
    Repeat,
    /// The step budget ran out.
    StepBudget,
    /// The last iterate exceeds the state budget.
    StateBudget,
}

/// `x_0, x_1, ..` with every iterate in canonical form.
#[derive(Debug, Clone)]
pub struct Orbit {
    initial: PointedModel,
    iterates: Vec<PointedModel>,
    canon: Vec<Vec<u8>>,
    stop: Stop,
}

impl Orbit {
    /// The model iteration started from, before contraction.
    pub fn initial(&self) -> &PointedModel {
        &self.initial
    }

    pub fn iterates(&self) -> &[PointedModel] {
        &self.iterates
    }

    pub fn canonical_forms(&self) -> &[Vec<u8>] {
        &self.canon
    }

    /// Number of map applications performed.
    pub fn step_count(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn stop(&self) -> Stop {
        self.stop
    }

    /// True when iteration hit a budget rather than a repeated iterate.
    pub fn truncated(&self) -> bool {
        self.stop != Stop::Repeat
    }
}

/// Iterate `map` from `x0` for at most `max_steps` steps. Stops early once an
/// iterate repeats an earlier one up to bisimulation, since the orbit is
/// periodic from there on. Guard failures are reported with their step.
pub fn iterate(map: &CleanMap, x0: &PointedModel, max_steps: usize) -> Result<Orbit> {
    iterate_with(|x| product_update(x, map.model()), x0, max_steps, None)
}

/// Like [`iterate`], but also stop after the first contracted iterate with
/// more than `max_states` states. Orbits that never repeat can grow without
/// bound.
pub fn iterate_capped(map: &CleanMap, x0: &PointedModel, max_steps: usize, max_states: usize) -> Result<Orbit> {
    iterate_with(|x| product_update(x, map.model()), x0, max_steps, Some(max_states))
}

/// Iterate an arbitrary step function. Its results are contracted before
/// they are stored.
pub fn iterate_with<F>(mut f: F, x0: &PointedModel, max_steps: usize, max_states: Option<usize>) -> Result<Orbit>
where
    F: FnMut(&PointedModel) -> Result<PointedModel>,
{
    let first = canonical_model(x0);
    let mut seen = HashMap::new();
    let mut canon = vec![canonical_form(&first)];
    seen.insert(canon[0].clone(), 0);
    let mut iterates = vec![first];
    let mut stop = Stop::StepBudget;
    for step in 1..=max_steps {
        let next = f(&iterates[step - 1]).map_err(|e| e.at_step(step))?;
        let next = canonical_model(&next);
        let form = canonical_form(&next);
        let repeat = seen.insert(form.clone(), step).is_some();
        let size = next.num_states();
        iterates.push(next);
        canon.push(form);
        if repeat {
            stop = Stop::Repeat;
            break;
        }
        if max_states.is_some_and(|cap| size > cap) {
            stop = Stop::StateBudget;
            break;
        }
    }
    Ok(Orbit {
        initial: x0.clone(),
        iterates,
        canon,
        stop,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodReport {
    pub found: bool,
    pub preperiod: Option<usize>,
    pub period: Option<usize>,
    /// Indices `(i, j)`, `i < j`, of the first repeat.
    pub witness: Option<(usize, usize)>,
}

/// Find the first `j` with `x_j` bisimilar to some earlier `x_i`. Canonical
/// forms are compared by hash and every hit is confirmed by refinement.
pub fn detect_period(orbit: &Orbit) -> Result<PeriodReport> {
    let mut first_seen: HashMap<&[u8], usize> = HashMap::new();
    for (j, form) in orbit.canon.iter().enumerate() {
        if let Some(&i) = first_seen.get(form.as_slice()) {
            if bisimilar(&orbit.iterates[i], &orbit.iterates[j])? {
                return Ok(PeriodReport {
                    found: true,
                    preperiod: Some(i),
                    period: Some(j - i),
                    witness: Some((i, j)),
                });
            }
        }
        first_seen.entry(form).or_insert(j);
    }
    Ok(PeriodReport {
        found: false,
        preperiod: None,
        period: None,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecurrenceReport {
    pub depth: usize,
    /// All pairs `i < j` with `x_i` and `x_j` `depth`-bisimilar.
    pub pairs: Vec<(usize, usize)>,
    /// `recurrent[i]`: some later iterate is `depth`-bisimilar to `x_i`.
    pub recurrent: Vec<bool>,
}

impl RecurrenceReport {
    /// Pairs with both indices in `indices`.
    pub fn pairs_among(&self, indices: &[usize]) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .copied()
            .filter(|(i, j)| indices.contains(i) && indices.contains(j))
            .collect()
    }
}

/// Which iterates agree on all formulas of modal depth at most `depth`, using
/// one joint refinement of the whole orbit.
pub fn recurrence_at_depth(orbit: &Orbit, depth: usize) -> Result<RecurrenceReport> {
    let models: Vec<&PointedModel> = orbit.iterates.iter().collect();
    let trace = refine_many(&models, Some(depth))?;
    let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
    for i in 0..models.len() {
        groups.entry(trace.point_class(depth, i)).or_default().push(i);
    }
    let mut pairs = Vec::new();
    let mut recurrent = vec![false; models.len()];
    for members in groups.values() {
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                pairs.push((i, j));
            }
            recurrent[i] = k + 1 < members.len();
        }
    }
    pairs.sort_unstable();
    Ok(RecurrenceReport {
        depth,
        pairs,
        recurrent,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum Metric<'a> {
    Bisimulation,
    Weighted { spec: &'a MetricSpec, eps: f64 },
}

impl Metric<'_> {
    pub fn distance(&self, x: &PointedModel, y: &PointedModel) -> Result<Distance> {
        match self {
            Metric::Bisimulation => d_b(x, y),
            Metric::Weighted { spec, eps } => d_w(x, y, spec, *eps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// `d(x_t, x_{t+1})`.
    Successive,
    /// `d(x_t, x_k)` for a fixed index `k`.
    Fixed(usize),
}

/// Distances along the orbit. Successive traces have one entry per step,
/// fixed-reference traces one per iterate.
pub fn distance_trace(orbit: &Orbit, metric: Metric<'_>, reference: Reference) -> Result<Vec<Distance>> {
    let xs = &orbit.iterates;
    match reference {
        Reference::Successive => xs.windows(2).map(|w| metric.distance(&w[0], &w[1])).collect(),
        Reference::Fixed(k) => {
            let target = xs.get(k).ok_or_else(|| {
                crate::Error::InvalidModel(format!("orbit has no iterate {k}"))
            })?;
            xs.iter().map(|x| metric.distance(x, target)).collect()
        }
    }
}

/// Write `step,distance,error_bound` rows.
pub fn write_trace_csv<W: Write>(trace: &[Distance], mut out: W) -> io::Result<()> {
    writeln!(out, "step,distance,error_bound")?;
    for (t, d) in trace.iter().enumerate() {
        writeln!(out, "{t},{},{}", d.value, d.error_bound)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    /// First `t` with `x_t` bisimilar to `x_{t+1}`.
    pub fixed_point: Option<usize>,
    /// The successive bisimulation distances never increase.
    pub monotone: bool,
    /// Last successive bisimulation distance, if the orbit has a step.
    pub final_distance: Option<f64>,
}

/// Summarize the successive `d_B` trace of an orbit.
pub fn convergence(orbit: &Orbit) -> Result<Convergence> {
    let trace = distance_trace(orbit, Metric::Bisimulation, Reference::Successive)?;
    Ok(Convergence {
        fixed_point: trace.iter().position(|d| d.value == 0.0),
        monotone: trace.windows(2).all(|w| w[1].value <= w[0].value),
        final_distance: trace.last().map(|d| d.value),
    })
}

/// Outcome of searching for a modulus of continuity at `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    /// Every sample model that is `m`-bisimilar to `x` has an image that is
    /// `n`-bisimilar to the image of `x`.
    Found { m: usize },
    /// Sample model `index` is bisimilar to `x` but the images differ at
    /// depth `n`: a genuine failure of the map.
    Counterexample { index: usize },
    /// No `m` up to the search bound worked on this sample.
    Inconclusive { max_m: usize },
}

/// Search `m = 0 ..= max_m` for the least `m` that works on `sample`.
/// Sample models on which `map` fails its guards are skipped; their indices
/// are returned alongside the outcome.
pub fn continuity_modulus(
    map: &CleanMap,
    x: &PointedModel,
    sample: &[PointedModel],
    n: usize,
    max_m: usize,
) -> Result<(Modulus, Vec<usize>)> {
    let fx = map.apply(x)?;
    let mut skipped = Vec::new();
    let mut far = Vec::new();
    for (i, y) in sample.iter().enumerate() {
        match map.apply(y) {
            Ok(fy) => {
                if !n_bisimilar(&fx, &fy, n)? {
                    far.push(i);
                }
            }
            Err(e) if e.is_guard_violation() => skipped.push(i),
            Err(e) => return Err(e),
        }
    }
    for &i in &far {
        if bisimilar(x, &sample[i])? {
            return Ok((Modulus::Counterexample { index: i }, skipped));
        }
    }
    for m in 0..=max_m {
        let mut ok = true;
        for &i in &far {
            if n_bisimilar(x, &sample[i], m)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok((Modulus::Found { m }, skipped));
        }
    }
    Ok((Modulus::Inconclusive { max_m }, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{make_clean_map, ActionModel};
    use crate::formula::{Formula, Signature};
    use crate::kripke::ModelBuilder;
    use std::sync::Arc;

    fn sig() -> Arc<Signature> {
        Arc::new(Signature::new(["p"], ["a"]).unwrap())
    }

    fn single(p: bool) -> PointedModel {
        let b = ModelBuilder::new(sig()).state("s").edge("a", "s", "s").point("s");
        if p { b.set("p", "s") } else { b }.build().unwrap()
    }

    /// Designated actions toggling `p`.
    fn toggle() -> CleanMap {
        let s = sig();
        let p = Formula::atom("p");
        let model = ActionModel::new(
            s,
            vec!["on".into(), "off".into()],
            vec![vec![vec![0, 1], vec![0, 1]]],
            vec![Formula::negate(p.clone()), p.clone()],
            vec![p.clone(), Formula::negate(p)],
            vec![0, 1],
        )
        .unwrap();
        make_clean_map(model, &[], true).unwrap()
    }

    #[test]
    fn skip_orbit_stops_after_one_step() {
        let map = make_clean_map(ActionModel::skip(sig()), &[], true).unwrap();
        let orbit = iterate(&map, &single(true), 50).unwrap();
        assert_eq!(orbit.step_count(), 1);
        assert!(!orbit.truncated());
        let period = detect_period(&orbit).unwrap();
        assert_eq!((period.preperiod, period.period), (Some(0), Some(1)));
        assert_eq!(convergence(&orbit).unwrap().fixed_point, Some(0));
    }

    #[test]
    fn toggle_has_period_two() {
        let orbit = iterate(&toggle(), &single(false), 10).unwrap();
        assert_eq!(orbit.step_count(), 2);
        let period = detect_period(&orbit).unwrap();
        assert_eq!(period.witness, Some((0, 2)));
        let rec = recurrence_at_depth(&orbit, 0).unwrap();
        assert_eq!(rec.pairs, vec![(0, 2)]);
        assert_eq!(rec.recurrent, vec![true, false, false]);
        let trace = distance_trace(&orbit, Metric::Bisimulation, Reference::Successive).unwrap();
        assert_eq!(trace.iter().map(|d| d.value).collect::<Vec<_>>(), [1.0, 1.0]);
    }

    #[test]
    fn zero_steps_is_truncated() {
        let orbit = iterate(&toggle(), &single(false), 0).unwrap();
        assert_eq!(orbit.step_count(), 0);
        assert!(orbit.truncated());
        assert!(!detect_period(&orbit).unwrap().found);
    }

    #[test]
    fn state_budget_stops_iteration() {
        let orbit = iterate_capped(&toggle(), &single(false), 10, 0).unwrap();
        assert_eq!(orbit.stop(), Stop::StateBudget);
        assert_eq!(orbit.step_count(), 1);
        let orbit = iterate_capped(&toggle(), &single(false), 10, 1).unwrap();
        assert_eq!(orbit.stop(), Stop::Repeat);
    }

    #[test]
    fn csv_format() {
        let mut out = Vec::new();
        write_trace_csv(&[Distance::exact(0.5), Distance::exact(0.0)], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "step,distance,error_bound\n0,0.5,0\n1,0,0\n");
    }

    #[test]
    fn guard_failures_carry_the_step() {
        let s = sig();
        let p = Formula::atom("p");
        let only_p = ActionModel::new(
            s,
            vec!["x".into()],
            vec![vec![vec![0]]],
            vec![p.clone()],
            vec![Formula::negate(p)],
            vec![0],
        )
        .unwrap();
        let map = make_clean_map(only_p, &[], false).unwrap();
        let err = iterate(&map, &single(true), 5).unwrap_err();
        assert!(matches!(err, crate::Error::Step { step: 2, .. }), "{err}");
        assert!(err.is_guard_violation());
    }

    #[test]
    fn toggle_is_continuous_with_modulus_zero() {
        let sample = vec![single(true), single(false)];
        let (m, skipped) = continuity_modulus(&toggle(), &single(true), &sample, 3, 4).unwrap();
        assert_eq!(m, Modulus::Found { m: 0 });
        assert!(skipped.is_empty());
    }
}
