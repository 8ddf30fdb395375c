use deldyn::action::check_deterministic;
use deldyn::gen::{random_config, random_machine, rng};
use deldyn::turing::{
    compile_tm, decode_config, encode_config, run_tm, step, successor_machine, successor_phases, TapeConfig, TuringMachine,
};
use deldyn::{Error, PointedModel};
use proptest::prelude::*;
use rand::Rng;

const WIDTH: usize = 12;

/// Step the compiled machine and the direct simulator side by side until
/// `steps` or until the head leaves the window, which both must agree on.
fn agree(tm: &TuringMachine, c: &TapeConfig, steps: usize) {
    let compiled = compile_tm(tm, WIDTH).unwrap();
    let mut x = compiled.encode(c).unwrap();
    let mut expected = c.clone();
    for k in 1..=steps {
        let next = match step(tm, &expected) {
            Ok(next) => next,
            Err(Error::HeadUnderflow { .. }) => unreachable!("machines never move left of the start"),
            Err(e) => panic!("{e}"),
        };
        match compiled.step(&x) {
            Ok(y) => {
                assert!(next.head() < WIDTH, "step {k}: head at {} survived", next.head());
                assert_eq!(compiled.decode(&y).unwrap(), next, "step {k}");
                x = y;
            }
            Err(e) => {
                assert!(matches!(e, Error::WindowOverflow { .. }), "step {k}: {e}");
                assert_eq!(next.head(), WIDTH, "step {k}");
                return;
            }
        }
        expected = next;
    }
}

#[test]
fn random_machines_match_direct_simulation() {
    let mut r = rng(2024);
    for _ in 0..40 {
        let states = r.gen_range(1..=4);
        let halting = r.gen_bool(0.3);
        let tm = random_machine(&mut r, states, halting);
        let c = random_config(&mut r, &tm, 6);
        agree(&tm, &c, 200);
    }
}

#[test]
fn compiled_machine_is_deterministic_and_exhaustive_on_encodings() {
    let mut r = rng(5);
    for _ in 0..10 {
        let tm = random_machine(&mut r, 3, true);
        let compiled = compile_tm(&tm, WIDTH).unwrap();
        let sample: Vec<PointedModel> = (0..30).map(|_| compiled.encode(&random_config(&mut r, &tm, 8)).unwrap()).collect();
        assert!(check_deterministic(compiled.action_model(), &sample).unwrap().sample_passed());
        let map = compiled.clean_map(&sample).unwrap();
        assert!(map.exhaustive().sample_passed());
    }
}

#[test]
fn phase_eight_snapshot() {
    let phases = successor_phases(9, 8).unwrap();
    assert_eq!(phases[8].tape_string(), ">0001");
    assert_eq!(phases[8].head(), 0);
}

#[test]
fn decoded_phases_match_direct_simulation_to_sixty_four() {
    let tm = successor_machine();
    let phases = successor_phases(64, 10).unwrap();
    let mut c = phases[0].clone();
    for (k, expected) in phases.iter().enumerate().skip(1) {
        loop {
            c = step(&tm, &c).unwrap();
            if c.state() == tm.initial() && c.head() == 0 {
                break;
            }
        }
        assert_eq!(&c, expected, "phase {k}");
        let mirrored: String = format!("{k:b}").chars().rev().collect();
        assert_eq!(c.tape_string(), format!(">{mirrored}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn decode_inverts_encode(seed in any::<u64>(), extra in 0usize..4) {
        let mut r = rng(seed);
        let tm = random_machine(&mut r, 3, false);
        let c = random_config(&mut r, &tm, 7);
        let x = encode_config(&tm, &c, c.extent() + extra).unwrap();
        prop_assert_eq!(decode_config(&tm, &x).unwrap(), c);
    }

    #[test]
    fn short_runs_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tm = random_machine(&mut r, 2, false);
        let c = random_config(&mut r, &tm, 5);
        let compiled = compile_tm(&tm, 40).unwrap();
        let direct = run_tm(&tm, &c, 15).unwrap();
        prop_assert_eq!(compiled.emulate(&c, 15).unwrap(), direct);
    }
}
