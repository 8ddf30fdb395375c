//! Distances between pointed models.
//!
//! [`d_b`] is the n-bisimulation metric: `2^-n` for the least depth `n` at
//! which two models can be told apart, `0` for bisimilar models.
//!
//! [`d_w`] is a weighted sum over an enumerated family of formulas `D`,
//! grouped into levels with a geometric bound on the weight each level may
//! carry. Two models contribute the weight of every formula in `D` on which
//! they disagree.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bisim::{char_formula, refine, refine_many};
use crate::error::{Error, Result};
use crate::formula::{parse_formula, Formula, Signature};
use crate::kripke::{ModelJson, PointedModel};

pub type Weight = Ratio<u64>;

/// A distance value together with a bound on its truncation error. The true
/// distance lies in `[value, value + error_bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub value: f64,
    pub error_bound: f64,
}

impl Distance {
    pub fn exact(value: f64) -> Self {
        Distance {
            value,
            error_bound: 0.0,
        }
    }
}

/// The n-bisimulation metric. Exact: stabilization of the refinement decides
/// full bisimilarity on finite models.
pub fn d_b(x: &PointedModel, y: &PointedModel) -> Result<Distance> {
    let trace = refine(x, Some(y))?;
    Ok(match trace.split_level(0, 1) {
        None => Distance::exact(0.0),
        Some(n) => Distance::exact(0.5f64.powi(n as i32)),
    })
}

/// One batch `D_n` of the formula family with its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub formulas: Vec<Formula>,
    pub weights: Vec<Weight>,
}

/// What lies beyond the listed levels.
#[derive(Debug, Clone, PartialEq)]
pub enum Tail {
    /// Nothing: the family is exactly the listed levels.
    Empty,
    /// Unlisted levels whose masses keep shrinking by `mass_ratio`. Only
    /// their total mass is known, which becomes the error bound.
    Geometric,
    /// Characteristic formulas of these models at every depth past the listed
    /// levels, weighted `1/|D_n| * 2^-(n+1)`.
    Characteristic(Vec<PointedModel>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    sig: Arc<Signature>,
    levels: Vec<Level>,
    level_mass: Vec<Weight>,
    mass_ratio: Weight,
    tail: Tail,
}

impl MetricSpec {
    pub fn new(
        sig: Arc<Signature>,
        levels: Vec<Level>,
        level_mass: Vec<Weight>,
        mass_ratio: Weight,
        tail: Tail,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidMetricSpec(msg));
        if levels.len() != level_mass.len() {
            return bad("one level mass per level is required".into());
        }
        if mass_ratio >= Weight::from_integer(1) {
            return bad(format!("mass ratio {mass_ratio} must be below 1"));
        }
        for (n, level) in levels.iter().enumerate() {
            if level.formulas.len() != level.weights.len() {
                return bad(format!("level {n}: one weight per formula is required"));
            }
            for f in &level.formulas {
                f.check(&sig)?;
            }
            if level.weights.iter().any(|w| *w.numer() == 0) {
                return bad(format!("level {n}: weights must be strictly positive"));
            }
            let total: Weight = level.weights.iter().copied().sum();
            if total > level_mass[n] {
                return bad(format!("level {n}: weights sum to {total}, above the level mass"));
            }
            if n > 0 && level_mass[n] > mass_ratio * level_mass[n - 1] {
                return bad(format!("level {n}: mass exceeds ratio times the previous mass"));
            }
        }
        match &tail {
            Tail::Geometric if levels.is_empty() => {
                return bad("a geometric tail needs at least one listed level".into())
            }
            Tail::Characteristic(sample) => {
                if sample.is_empty() {
                    return Err(Error::EmptySample);
                }
                if sample.iter().any(|m| m.sig() != &sig) {
                    return Err(Error::SignatureMismatch("sample model signature".into()));
                }
                if mass_ratio != Weight::new(1, 2) {
                    return bad("characteristic tails use mass ratio 1/2".into());
                }
            }
            _ => {}
        }
        Ok(MetricSpec {
            sig,
            levels,
            level_mass,
            mass_ratio,
            tail,
        })
    }

    /// One atom per level in signature order, level `k` weighted `2^-(k+1)`.
    pub fn atom_enumeration(sig: Arc<Signature>) -> Result<Self> {
        let mut levels = Vec::new();
        let mut masses = Vec::new();
        for (k, atom) in sig.atoms().iter().enumerate() {
            let w = Weight::new(1, 1u64 << (k + 1));
            levels.push(Level {
                formulas: vec![Formula::atom(atom.clone())],
                weights: vec![w],
            });
            masses.push(w);
        }
        MetricSpec::new(sig, levels, masses, Weight::new(1, 2), Tail::Empty)
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level_mass(&self) -> &[Weight] {
        &self.level_mass
    }

    pub fn mass_ratio(&self) -> Weight {
        self.mass_ratio
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// Upper bound on the mass of all levels from `n` on.
    fn remaining_mass(&self, n: usize) -> f64 {
        let listed: f64 = self.level_mass[n.min(self.level_mass.len())..]
            .iter()
            .map(to_f64)
            .sum();
        listed + self.unlisted_mass()
    }

    fn unlisted_mass(&self) -> f64 {
        match (&self.tail, self.level_mass.last()) {
            (Tail::Empty, _) => 0.0,
            (Tail::Geometric, Some(last)) => {
                let r = to_f64(&self.mass_ratio);
                to_f64(last) * r / (1.0 - r)
            }
            (Tail::Geometric, None) => f64::INFINITY,
            (Tail::Characteristic(_), _) => 0.5f64.powi(self.levels.len() as i32),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SpecJson = serde_json::from_str(text)?;
        let sig = Arc::new(Signature::new(raw.atoms, raw.agents)?);
        let levels = raw
            .levels
            .into_iter()
            .map(|l| {
                let formulas = l
                    .formulas
                    .iter()
                    .map(|t| parse_formula(t))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Level {
                    formulas,
                    weights: l.weights,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let tail = match raw.tail {
            TailJson::Empty => Tail::Empty,
            TailJson::Geometric => Tail::Geometric,
            TailJson::Characteristic { sample } => Tail::Characteristic(
                sample
                    .into_iter()
                    .map(|m| Ok(m.into_model()?.aligned_to(&sig)?.into_owned()))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        MetricSpec::new(sig, levels, raw.level_mass, raw.mass_ratio, tail)
    }

    pub fn to_json(&self) -> String {
        let raw = SpecJson {
            atoms: self.sig.atoms().to_vec(),
            agents: self.sig.agents().to_vec(),
            levels: self
                .levels
                .iter()
                .map(|l| LevelJson {
                    formulas: l.formulas.iter().map(Formula::render).collect(),
                    weights: l.weights.clone(),
                })
                .collect(),
            level_mass: self.level_mass.clone(),
            mass_ratio: self.mass_ratio,
            tail: match &self.tail {
                Tail::Empty => TailJson::Empty,
                Tail::Geometric => TailJson::Geometric,
                Tail::Characteristic(sample) => TailJson::Characteristic {
                    sample: sample.iter().map(PointedModel::to_json_value).collect(),
                },
            },
        };
        serde_json::to_string_pretty(&raw).expect("spec JSON serializes")
    }
}

fn to_f64(w: &Weight) -> f64 {
    *w.numer() as f64 / *w.denom() as f64
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    atoms: Vec<String>,
    agents: Vec<String>,
    levels: Vec<LevelJson>,
    level_mass: Vec<Weight>,
    mass_ratio: Weight,
    tail: TailJson,
}

#[derive(Serialize, Deserialize)]
struct LevelJson {
    formulas: Vec<String>,
    weights: Vec<Weight>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum TailJson {
    Empty,
    Geometric,
    Characteristic { sample: Vec<ModelJson> },
}

/// The metric spec whose level `n` holds the distinct depth-`n` characteristic
/// formulas of the sample, each weighted `1/|D_n| * 2^-(n+1)`. Levels up to
/// `max_depth` are materialized; deeper ones are implied by the sample.
pub fn build_prop6_spec(sample: &[PointedModel], max_depth: usize) -> Result<MetricSpec> {
    let first = sample.first().ok_or(Error::EmptySample)?;
    let sig = first.sig().clone();
    let sample: Vec<PointedModel> = sample
        .iter()
        .map(|m| m.aligned_to(&sig).map(|m| m.into_owned()))
        .collect::<Result<_>>()?;
    let mut levels = Vec::new();
    let mut masses = Vec::new();
    for n in 0..=max_depth {
        let distinct: BTreeSet<Formula> = sample.iter().map(|m| char_formula(m, n)).collect();
        let mass = Weight::new(1, 1u64 << (n + 1));
        let w = mass / Weight::from_integer(distinct.len() as u64);
        levels.push(Level {
            weights: vec![w; distinct.len()],
            formulas: distinct.into_iter().collect(),
        });
        masses.push(mass);
    }
    MetricSpec::new(sig, levels, masses, Weight::new(1, 2), Tail::Characteristic(sample))
}

/// The weighted formula-family distance, within `eps` of the infinite sum.
pub fn d_w(x: &PointedModel, y: &PointedModel, spec: &MetricSpec, eps: f64) -> Result<Distance> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::NonPositiveEpsilon(eps));
    }
    let x = x.aligned_to(&spec.sig)?;
    let y = y.aligned_to(&spec.sig)?;
    let exact_tail = matches!(spec.tail, Tail::Characteristic(_));
    let mut value = 0.0;
    for (n, level) in spec.levels.iter().enumerate() {
        let remaining = spec.remaining_mass(n);
        if !exact_tail && remaining < eps {
            return Ok(Distance {
                value,
                error_bound: remaining,
            });
        }
        for (f, w) in level.formulas.iter().zip(&level.weights) {
            if x.eval(f)? != y.eval(f)? {
                value += to_f64(w);
            }
        }
    }
    match &spec.tail {
        Tail::Empty => Ok(Distance::exact(value)),
        Tail::Geometric => {
            let tail = spec.unlisted_mass();
            if tail >= eps {
                return Err(Error::ToleranceUnreachable { eps, tail });
            }
            Ok(Distance {
                value,
                error_bound: tail,
            })
        }
        Tail::Characteristic(sample) => {
            value += characteristic_tail(&x, &y, sample, spec.levels.len());
            Ok(Distance::exact(value))
        }
    }
}

/// Sum over all levels from `start` on of a characteristic family. The
/// depth-`m` characteristic formula of `z` holds at `x` iff `x` and `z` are
/// `m`-bisimilar, so each level reduces to comparing refinement classes, and
/// past the joint stabilization depth every level looks the same.
fn characteristic_tail(x: &PointedModel, y: &PointedModel, sample: &[PointedModel], start: usize) -> f64 {
    let mut all: Vec<&PointedModel> = vec![x, y];
    all.extend(sample.iter());
    let trace = refine_many(&all, None).expect("aligned models");
    let stable = trace.depth() - 1;
    let mut sum = 0.0;
    let mut m = start;
    loop {
        let classes: BTreeSet<u32> = (0..sample.len()).map(|i| trace.point_class(m, 2 + i)).collect();
        let (cx, cy) = (trace.point_class(m, 0), trace.point_class(m, 1));
        let disagree = classes.iter().filter(|&&c| (c == cx) != (c == cy)).count();
        let fraction = disagree as f64 / classes.len() as f64;
        if m >= stable {
            // sum_{j >= m} 2^-(j+1) = 2^-m
            return sum + fraction * 0.5f64.powi(m as i32);
        }
        sum += fraction * 0.5f64.powi(m as i32 + 1);
        m += 1;
    }
}
