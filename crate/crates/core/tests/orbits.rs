use std::sync::Arc;

use deldyn::action::make_clean_map;
use deldyn::bisim::n_bisimilar;
use deldyn::dynamics::{
    convergence, detect_period, distance_trace, iterate, iterate_with, recurrence_at_depth, Metric, Reference,
};
use deldyn::gen::{random_boolean_static_action, random_model, rng};
use deldyn::turing::{compile_tm, period_machine, period_start, phase_starts, run_tm, successor_machine, successor_start};
use deldyn::{ActionModel, Formula, MetricSpec, ModelBuilder, Signature};

fn sig() -> Arc<Signature> {
    Arc::new(Signature::new(["p", "q"], ["a"]).unwrap())
}

#[test]
fn announcement_on_a_p_model_is_fixed_at_once() {
    let x = ModelBuilder::new(sig())
        .states(["s", "t"])
        .edge("a", "s", "t")
        .edge("a", "t", "t")
        .set("p", "s")
        .set("p", "t")
        .point("s")
        .build()
        .unwrap();
    let p = Formula::atom("p");
    let announce = ActionModel::new(
        sig(),
        vec!["!p".into(), "!~p".into()],
        vec![vec![vec![0], vec![1]]],
        vec![p.clone(), Formula::negate(p)],
        vec![Formula::Top; 2],
        vec![0, 1],
    )
    .unwrap();
    let map = make_clean_map(announce, &[], true).unwrap();
    let orbit = iterate(&map, &x, 10).unwrap();
    assert!(orbit.step_count() <= 1);
    let period = detect_period(&orbit).unwrap();
    assert_eq!(period.period, Some(1));
    let rec = recurrence_at_depth(&orbit, 3).unwrap();
    assert!(rec.recurrent[..orbit.step_count()].iter().all(|&r| r));
    let trace = distance_trace(&orbit, Metric::Bisimulation, Reference::Successive).unwrap();
    assert!(trace.iter().all(|d| d.value == 0.0));
}

#[test]
fn successor_orbit_has_no_early_repeat() {
    let tm = successor_machine();
    let compiled = compile_tm(&tm, 8).unwrap();
    let x0 = compiled.encode(&successor_start()).unwrap();
    let orbit = iterate_with(|x| compiled.step(x), &x0, 20, None).unwrap();
    assert_eq!(orbit.iterates().len(), 21);
    assert!(orbit.truncated());
    assert!(!detect_period(&orbit).unwrap().found);
}

#[test]
fn single_iterate_has_no_pairs() {
    let x = random_model(&mut rng(2), &sig(), 3, 0.5);
    let map = make_clean_map(ActionModel::skip(sig()), &[], true).unwrap();
    let orbit = iterate(&map, &x, 0).unwrap();
    assert!(recurrence_at_depth(&orbit, 2).unwrap().pairs.is_empty());
}

#[test]
fn boolean_static_maps_settle() {
    let mut r = rng(99);
    for _ in 0..60 {
        let x = random_model(&mut r, &sig(), 5, 0.4);
        let a = random_boolean_static_action(&mut r, &sig(), 4);
        let map = make_clean_map(a, &[], true).unwrap();
        let orbit = iterate(&map, &x, 100).unwrap();
        let period = detect_period(&orbit).unwrap();
        assert!(period.found);
        assert_eq!(period.period, Some(1));
        assert!(convergence(&orbit).unwrap().fixed_point.is_some());
    }
}

#[test]
fn compiled_period_machines() {
    for n in 1..=6 {
        let tm = period_machine(n).unwrap();
        let start = period_start(n);
        let compiled = compile_tm(&tm, start.extent() + 1).unwrap();
        let x0 = compiled.encode(&start).unwrap();
        let orbit = iterate_with(|x| compiled.step(x), &x0, 4 * n, None).unwrap();
        let period = detect_period(&orbit).unwrap();
        assert_eq!((period.preperiod, period.period), (Some(0), Some(n)), "n = {n}");
        let direct = run_tm(&tm, &start, n).unwrap();
        assert_eq!(direct[n], start);
    }
}

#[test]
fn successor_phase_starts_approach_each_other() {
    let tm = successor_machine();
    let compiled = compile_tm(&tm, 10).unwrap();
    let x0 = compiled.encode(&successor_start()).unwrap();
    let orbit = iterate_with(|x| compiled.step(x), &x0, 300, None).unwrap();
    let configs: Vec<_> = orbit.iterates().iter().map(|x| compiled.decode(x).unwrap()).collect();
    assert_eq!(configs, run_tm(&tm, &successor_start(), 300).unwrap());
    let starts = phase_starts(&tm, &configs);
    // Phase 2^k - 1 has tape `>` followed by k ones; consecutive ones first
    // differ at cell k + 1.
    let ones: Vec<usize> = (1..=5).map(|k| starts[(1 << k) - 1]).collect();
    for (k, w) in (1..).zip(ones.windows(2)) {
        let trace = distance_trace(&orbit, Metric::Bisimulation, Reference::Fixed(w[1])).unwrap();
        assert_eq!(trace[w[0]].value, 0.5f64.powi(k + 1), "k = {k}");
        assert!(n_bisimilar(&orbit.iterates()[w[0]], &orbit.iterates()[w[1]], k as usize).unwrap());
    }
}

#[test]
fn weighted_trace_on_an_orbit() {
    let tm = period_machine(2).unwrap();
    let compiled = compile_tm(&tm, 3).unwrap();
    let orbit = iterate_with(|x| compiled.step(x), &compiled.encode(&period_start(2)).unwrap(), 10, None).unwrap();
    let spec = MetricSpec::atom_enumeration(tm.signature()).unwrap();
    let trace = distance_trace(&orbit, Metric::Weighted { spec: &spec, eps: 1e-6 }, Reference::Fixed(0)).unwrap();
    assert_eq!(trace.len(), 3);
    assert_eq!(trace[0].value, 0.0);
    assert!(trace[1].value > 0.0);
    assert_eq!(trace[2].value, 0.0);
}
