use affect_explore::env::{optimal_score, Action, CellKey, Endless, EnvConfig, ObjectKind, SpawnSchedule, CELL_KEY_SPACE};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

mod common;

fn actions_strategy(max: usize) -> impl Strategy<Value = Vec<Action>> {
    prop::collection::vec((0u8..6).prop_map(|c| Action::from_code(c).unwrap()), 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn snapshot_restore_is_transparent(seed in 0u64..10_000, prefix in actions_strategy(240), suffix in actions_strategy(240)) {
        let env = Endless::seeded(EnvConfig::default(), seed).unwrap();
        let mut state = env.play(&prefix).unwrap();
        let snapshot = env.snapshot(&state);
        let mut resumed = env.restore(&snapshot);
        prop_assert_eq!(&resumed, &state);
        for &action in &suffix {
            let a = env.step(&mut state, action).unwrap();
            let b = env.step(&mut resumed, action).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(&state, &resumed);
            prop_assert_eq!(env.featurize(&state), env.featurize(&resumed));
        }
    }

    #[test]
    fn score_is_fully_accounted(seed in 0u64..10_000, actions in actions_strategy(480)) {
        let config = EnvConfig::default();
        let env = Endless::seeded(config.clone(), seed).unwrap();
        let mut state = env.new_game();
        for &action in &actions {
            let before = state.speed;
            let outcome = env.step(&mut state, action).unwrap();
            prop_assert!(state.speed >= config.min_speed);
            if outcome.collision {
                let bumped = state.tick.is_multiple_of(config.speed_ticks());
                let expected = config.base_speed + if bumped { config.speed_increment } else { 0.0 };
                prop_assert_eq!(state.speed, expected);
                prop_assert!(state.objects.iter().all(|o| o.distance >= config.spawn_lead_time * config.base_speed - 1e-9));
            } else if outcome.potions == 0 {
                let bumped = state.tick.is_multiple_of(config.speed_ticks());
                prop_assert_eq!(state.speed, before + if bumped { config.speed_increment } else { 0.0 });
            }
        }
        let expected = state.passive_points as i64 + config.coin_value * state.coins_collected as i64
            - config.obstacle_penalty * state.collisions as i64;
        prop_assert_eq!(state.score, expected);
        prop_assert_eq!(state.passive_points as u64, state.tick / config.passive_ticks());
        prop_assert!(state.score <= env.optimal_score());
    }

    #[test]
    fn hamming_matches_parameter_count(a in 0usize..CELL_KEY_SPACE, b in 0usize..CELL_KEY_SPACE) {
        let (a, b) = (CellKey::from_index(a).unwrap(), CellKey::from_index(b).unwrap());
        prop_assert_eq!(a.hamming(&b), common::hamming_by_params(&a, &b));
        prop_assert_eq!(a.hamming(&b), b.hamming(&a));
        // A lane switch flips both one-hot parameters.
        prop_assert!(a.hamming(&b) <= 8);
    }
}

#[test]
fn key_index_round_trips_over_the_whole_space() {
    let keys: Vec<CellKey> = CellKey::all().collect();
    assert_eq!(keys.len(), CELL_KEY_SPACE);
    for (i, key) in keys.iter().enumerate() {
        assert_eq!(key.index(), i);
        assert_eq!(CellKey::from_index(i), Some(*key));
        let params = key.params();
        assert_eq!(params[0] + params[1], 1, "lane is one-hot");
        assert!(params[2..].iter().all(|&p| p <= 2));
    }
    assert_eq!(CellKey::from_index(CELL_KEY_SPACE), None);
}

#[test]
fn random_play_visits_a_bounded_key_set() {
    let env = Endless::seeded(EnvConfig::default(), 21).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut seen = HashSet::new();
    for _ in 0..200 {
        let mut state = env.new_game();
        seen.insert(env.featurize(&state));
        while !env.is_finished(&state) {
            env.step(&mut state, Action::ALL[rng.gen_range(0..6)]).unwrap();
            seen.insert(env.featurize(&state));
        }
    }
    assert!(seen.len() > 50 && seen.len() <= CELL_KEY_SPACE, "{} keys", seen.len());
}

#[test]
fn schedules_depend_only_on_their_seed() {
    let config = EnvConfig::default();
    assert_eq!(SpawnSchedule::build(&config, 7), SpawnSchedule::build(&config, 7));
    assert_ne!(SpawnSchedule::build(&config, 7), SpawnSchedule::build(&config, 8));
    let schedule = SpawnSchedule::build(&config, 7);
    assert!(schedule.events.windows(2).all(|w| w[0].time < w[1].time));
    assert!(schedule.events.iter().all(|e| e.time > 0.0 && e.time <= config.session_length));
}

#[test]
fn optimal_score_counts_passive_points_and_coins() {
    let config = EnvConfig::default();
    for seed in 0..20 {
        let schedule = SpawnSchedule::build(&config, seed);
        let coins = schedule.events.iter().filter(|e| e.kind == ObjectKind::Coin).count() as i64;
        assert_eq!(optimal_score(&config, &schedule), 40 + coins);
    }
    let twelve = SpawnSchedule::new(
        SpawnSchedule::build(&config, 3).events.into_iter().filter(|e| e.kind == ObjectKind::Coin).take(12).collect(),
    );
    assert_eq!(twelve.coin_count(), 12);
    assert_eq!(optimal_score(&config, &twelve), 52);
    let empty = EnvConfig { session_length: 0.0, ..config };
    assert_eq!(optimal_score(&empty, &SpawnSchedule::new(Vec::new())), 0);
}

#[test]
fn idle_play_on_an_empty_track_earns_only_passive_points() {
    let config = EnvConfig::default();
    let env = Endless::new(config.clone(), SpawnSchedule::new(Vec::new())).unwrap();
    let state = env.play(&vec![Action::NoOp; 480]).unwrap();
    assert_eq!(state.score, 40);
    assert!(env.is_finished(&state));
    assert!(env.step(&mut state.clone(), Action::NoOp).is_err());
    // Twelve speed-ups over the session.
    assert!((state.speed - (config.base_speed + 12.0 * config.speed_increment)).abs() < 1e-9);
}

#[test]
fn brute_force_never_exceeds_the_optimal_score() {
    let config = common::tiny_config();
    for seed in 0..20 {
        let env = Endless::seeded(config.clone(), seed).unwrap();
        assert!(common::brute_force_best_score(&env) <= env.optimal_score());
    }
}
