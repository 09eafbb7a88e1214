use std::fs;
use std::path::Path;
use std::process::Command;

use ctxstack::geometry::MenuOptions;
use ctxstack::reduction::{run_episode, EnvironmentTrace, MenuCache, Mode};
use ctxstack::{Context, GameSpec};
use ctxstack_harness::baselines::ExploreThenCommit;
use ctxstack_harness::generate::generate_game;
use ctxstack_harness::output::{read_rows, regret_from_logs, write_outputs};
use ctxstack_harness::regret::game_regret;
use ctxstack_harness::{run_experiment, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two follower types with mirrored preferences in a 2x2 tabular game.
fn g0_two_types() -> GameSpec {
    GameSpec::tabular(
        &[vec![1.0, -1.0], vec![-1.0, 0.0]],
        &[
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        ],
    )
    .unwrap()
}

fn ones(t: usize) -> Vec<Context> {
    vec![Context::new(vec![1.0]).unwrap(); t]
}

#[test]
fn hindsight_comparator_matches_exhaustive_menu_search() {
    let game = g0_two_types();
    let t = 30;
    let followers: Vec<usize> = (0..t).map(|i| i % 2).collect();
    let trace = EnvironmentTrace::new(ones(t), followers.clone(), None).unwrap();
    let mut cache = MenuCache::new(1.0 / t as f64, MenuOptions::default()).unwrap();
    let mut etc = ExploreThenCommit::new(t, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let log = run_episode(&game, &trace, &mut etc, Mode::Known, &mut cache, false, &mut rng).unwrap();
    let report = game_regret(&game, &trace, &log, &mut cache).unwrap();

    let z = Context::new(vec![1.0]).unwrap();
    let menu = ctxstack::geometry::approximate_extreme_points(&game, &z, 1.0 / t as f64).unwrap();
    // four segment endpoints plus the tie point where both types answer action 0
    assert_eq!(menu.len(), 5);
    let best = menu
        .strategies()
        .map(|x| {
            followers
                .iter()
                .map(|&k| {
                    let b = game.follower_best_response(&z, x, k).unwrap();
                    game.leader_expected_utility(&z, x, b).unwrap()
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((report.cumulative_comparator[t - 1] - best).abs() < 1e-12);
    // the comparator is a fixed menu point, so menu play never beats it
    assert!(report.cumulative_regret[t - 1] >= -1e-12);
}

#[test]
fn one_context_one_type_comparator_is_t_times_the_optimum() {
    let game = g0_two_types();
    let t = 25;
    let trace = EnvironmentTrace::new(ones(t), vec![0; t], None).unwrap();
    let mut cache = MenuCache::new(1e-2, MenuOptions::default()).unwrap();
    let mut etc = ExploreThenCommit::new(5, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let log = run_episode(&game, &trace, &mut etc, Mode::Known, &mut cache, false, &mut rng).unwrap();
    let report = game_regret(&game, &trace, &log, &mut cache).unwrap();
    let optimum = log.records[0].menu_best_utility;
    assert!((report.cumulative_comparator[t - 1] - t as f64 * optimum).abs() < 1e-12);
    // the lone type is identified, so play after exploration is optimal
    for r in &log.records[5..] {
        assert!((r.expected_utility - optimum).abs() < 1e-12);
    }
}

#[test]
fn etc_recovers_a_split_between_identical_types() {
    let base = GameSpec::tabular(
        &[vec![1.0, -1.0], vec![-1.0, 0.0]],
        &[vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
    )
    .unwrap();
    let t = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let followers = (0..t).map(|_| rng.random_range(0..2)).collect();
    let trace = EnvironmentTrace::new(ones(t), followers, Some(vec![0.5, 0.5])).unwrap();
    let mut cache = MenuCache::new(1.0 / t as f64, MenuOptions::default()).unwrap();
    let mut etc = ExploreThenCommit::new(t, 2);
    run_episode(&base, &trace, &mut etc, Mode::Known, &mut cache, false, &mut rng).unwrap();
    let p = etc.estimate();
    assert!((p[0] - 0.5).abs() < 0.1 && (p[1] - 0.5).abs() < 0.1, "{p:?}");
}

#[test]
fn etc_pure_exploration_cycles_the_menu() {
    let game = g0_two_types();
    let t = 40;
    let trace = EnvironmentTrace::new(ones(t), vec![1; t], None).unwrap();
    let mut cache = MenuCache::new(1e-2, MenuOptions::default()).unwrap();
    let mut etc = ExploreThenCommit::new(t, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let log = run_episode(&game, &trace, &mut etc, Mode::Known, &mut cache, false, &mut rng).unwrap();
    let n = log.records[0].menu_size;
    for r in &log.records {
        assert_eq!(r.chosen_index, Some((r.t - 1) % n));
    }
}

#[test]
fn game_generator_is_seeded_and_respects_the_follower_regime() {
    let a = generate_game(7, 3, 5, 3, 3, false).unwrap();
    let b = generate_game(7, 3, 5, 3, 3, false).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let reference = a.at(&Context::new(vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
    for _ in 0..100 {
        let z = Context::new(vec![1.0, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).unwrap();
        assert_eq!(a.at(&z).unwrap().follower_matrices(), reference.follower_matrices());
    }
}

fn small_config(dir: &Path) -> ExperimentConfig {
    let text = format!(
        r#"{{
            "name": "small",
            "T": 120,
            "algorithms": ["alg1-oful", "etc", "random"],
            "setting": {{"kind": "game", "d": 2, "K": 3, "A_l": 3, "A_f": 2, "context_dependent_followers": false}},
            "etc": {{"sweep": [10, 30]}},
            "seeds": [0, 1, 2],
            "out": "{}"
        }}"#,
        dir.join("out").display()
    );
    ExperimentConfig::from_json(&text).unwrap()
}

#[test]
fn summary_statistics_match_per_seed_series() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_experiment(&small_config(dir.path())).unwrap();
    for (alg, runs) in &result.runs {
        let s = &result.summary.algorithms[alg.name()];
        for t in 0..120 {
            let mean = runs.iter().map(|r| r.report.cumulative_utility[t]).sum::<f64>() / runs.len() as f64;
            assert!((s.mean_cum_utility[t] - mean).abs() <= 1e-12);
            let mean = runs.iter().map(|r| r.report.cumulative_regret[t]).sum::<f64>() / runs.len() as f64;
            assert!((s.mean_cum_regret[t] - mean).abs() <= 1e-12);
        }
        for r in runs {
            // per-round regret increments stay within the utility range
            let reg = &r.report.cumulative_regret;
            assert!(reg.windows(2).all(|w| (w[1] - w[0]).abs() <= 2.0 + 1e-12));
            if alg.name() != "random" {
                assert!(reg[119] >= -1e-9, "{alg} seed {}", r.seed);
            }
        }
    }
    assert_eq!(result.summary.algorithms["etc"].sweep.len(), 2);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_logs_reproduce_regret() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let files = write_outputs(&run_experiment(&cfg).unwrap(), &a).unwrap();
    write_outputs(&run_experiment(&cfg).unwrap(), &b).unwrap();
    for f in &files {
        let name = f.file_name().unwrap();
        assert_eq!(fs::read(f).unwrap(), fs::read(b.join(name)).unwrap(), "{name:?}");
    }
    let rows = read_rows(&a.join("alg1-oful_seed0.csv")).unwrap();
    assert_eq!(rows.len(), 120);
    assert_eq!(rows[0].t, 1);

    // iid contexts never repeat, so log-based regret equals the in-memory one
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    for lr in regret_from_logs(&a).unwrap() {
        let mean = summary["algorithms"][&lr.algorithm]["mean_cum_regret"].as_array().unwrap();
        for (x, y) in lr.mean_cum_regret.iter().zip(mean) {
            assert!((x - y.as_f64().unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn cli_run_and_regret() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let cfg = small_config(dir.path());
    fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let bin = env!("CARGO_BIN_EXE_ctxstack");
    let out = Command::new(bin)
        .args(["run", "--config"])
        .arg(&cfg_path)
        .args(["--seeds", "0..2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out_dir = dir.path().join("out");
    assert!(out_dir.join("summary.json").exists());
    assert!(out_dir.join("random_seed1.csv").exists());
    assert!(!out_dir.join("random_seed2.csv").exists());

    let out = Command::new(bin).args(["regret", "--log"]).arg(&out_dir).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("alg1-oful"));

    let bad = Command::new(bin).args(["run", "--config"]).arg(dir.path().join("missing.json")).output().unwrap();
    assert!(!bad.status.success());
}

#[test]
fn dump_menu_lists_the_menu() {
    let dir = tempfile::tempdir().unwrap();
    let game_path = dir.path().join("g.json");
    fs::write(&game_path, g0_two_types().to_json().unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ctxstack"))
        .args(["dump-menu", "--game"])
        .arg(&game_path)
        .args(["--context", "1", "--delta", "0.01"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stdout.is_empty());
}
