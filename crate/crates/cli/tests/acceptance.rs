//! Acceptance suite: runs every criterion and prints one PASS/FAIL line each.
//!
//! Criteria 5 to 8 and 11 share one pipeline: teacher, five-tier Hex-5
//! dataset, strength estimator and candidate profile. It takes several
//! minutes on one core. The process exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strength_core::datagen::{
    generate_dataset, train_teacher, GeneratedDataset, SplitSizes, TeacherConfig, TierSpec,
};
use strength_core::features::encode_features;
use strength_core::game::{initial_state, GameSpec, GameState};
use strength_core::gradcheck::{check_bt_gradient, check_scorer_gradient};
use strength_core::harness::{
    calibrate_sa_z, elo_expected, fit_elo, limited_rank_experiment, move_prediction_accuracy, sa_config,
    se_config, spearman, strength_sweep, EloMethod, MatchSettings, WinTable,
};
use strength_core::inference::{accuracy_curve, build_profile, PredictionConfig, StrengthProfile};
use strength_core::oracle::Solver;
use strength_core::scorer::{init_params, zero_params, ScorerParams, ScorerSpec};
use strength_core::search::{decide, mcts_search, sa_decide, SearchConfig, SearchMode, Target};
use strength_core::training::{
    bt_listwise_loss, composite_score, default_scorer_spec, perturb_to_infinity, train, RankDataset, TrainConfig,
};

const SEED: u64 = 8;
const TRAIN_SEED: u64 = 1;
const GAME_COUNTS: [usize; 7] = [1, 2, 3, 5, 8, 12, 20];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_position(spec: GameSpec, plies: usize, rng: &mut ChaCha8Rng) -> GameState {
    loop {
        let mut s = initial_state(spec).unwrap();
        for _ in 0..plies {
            if s.is_terminal() {
                break;
            }
            let legal = s.legal_actions().unwrap();
            s = s.apply(legal[rng.gen_range(0..legal.len())]).unwrap();
        }
        if !s.is_terminal() {
            return s;
        }
    }
}

fn fmt_secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn gradients() -> Outcome {
    let t0 = Instant::now();
    let bt = check_bt_gradient(200, 11).unwrap();
    let small = ScorerSpec::new(14, 5, 2, 4).with_rank_head(3).with_move_readout(8);
    let a = check_scorer_gradient(small, 200, usize::MAX, 12).unwrap();
    let hex = default_scorer_spec(GameSpec::hex(5).unwrap(), 16).with_rank_head(5);
    let b = check_scorer_gradient(hex, 100, 40, 13).unwrap();
    let worst = a.max_rel_error.max(b.max_rel_error);
    let elapsed = t0.elapsed();
    outcome(
        bt.max_rel_error < 1e-4 && worst < 1e-4 && elapsed < Duration::from_secs(60),
        format!(
            "bt {} instances max rel err {:.2e}; scorer {} instances max rel err {:.2e}",
            bt.instances,
            bt.max_rel_error,
            a.instances + b.instances,
            worst,
        ),
    )
}

fn closed_forms() -> Outcome {
    let two = bt_listwise_loss(&[0.7, 0.7]).unwrap();
    let three = bt_listwise_loss(&[0.0, 0.0, 0.0]).unwrap();
    let gap = bt_listwise_loss(&[1.0, 0.0]).unwrap();
    let pass = (two - 2f64.ln()).abs() < 1e-9 && (three - 6f64.ln()).abs() < 1e-9 && (gap - 0.313262).abs() < 1e-6;
    outcome(pass, format!("[b,b]={two:.9} [0,0,0]={three:.9} [1,0]={gap:.7}"))
}

fn reduction_identity() -> Outcome {
    let game = GameSpec::hex(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let vanilla = SearchConfig {
        simulations: 200,
        mode: SearchMode::Vanilla,
        ..Default::default()
    };
    let mut same = 0;
    for i in 0..100 {
        let params = init_params(default_scorer_spec(game, 32), i).unwrap();
        let state = random_position(game, rng.gen_range(0..15), &mut rng);
        let se = SearchConfig {
            mode: SearchMode::Se,
            c1: 0.0,
            target: Target::Fixed(rng.gen_range(-3.0..3.0)),
            ..vanilla.clone()
        };
        let a = mcts_search(&params, &state, &vanilla).unwrap();
        let b = mcts_search(&params, &state, &se).unwrap();
        let (mut r1, mut r2) = (ChaCha8Rng::seed_from_u64(i), ChaCha8Rng::seed_from_u64(i));
        let da = decide(&a, &vanilla, &mut r1).unwrap();
        let db = decide(&b, &se, &mut r2).unwrap();
        if a.visits == b.visits && da == db {
            same += 1;
        }
    }
    outcome(same == 100, format!("{same}/100 searches identical"))
}

fn oracle_soundness() -> Outcome {
    let t0 = Instant::now();
    let game = GameSpec::tictactoe();
    // A zero network gives uniform priors and a neutral value, so only tree
    // mechanics and exact terminal values drive the search.
    let params = zero_params(default_scorer_spec(game, 8)).unwrap();
    let config = SearchConfig {
        simulations: 4000,
        mode: SearchMode::Vanilla,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut solver = Solver::new();
    let (mut checked, mut losing) = (0, 0);
    while checked < 200 {
        let state = random_position(game, rng.gen_range(0..8), &mut rng);
        if solver.value(&state).unwrap() < 0 {
            continue;
        }
        let chosen = mcts_search(&params, &state, &config).unwrap().chosen;
        if solver.action_value(&state, chosen).unwrap() < 0 {
            losing += 1;
        }
        checked += 1;
    }
    let elapsed = t0.elapsed();
    outcome(
        losing == 0 && elapsed < Duration::from_secs(300),
        format!("{losing} losing moves in {checked} positions"),
    )
}

fn sa_mechanics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let draws = 100_000;
    let first = (0..draws)
        .filter(|_| sa_decide(&[8, 2], 1.0, 0.0, &mut rng).unwrap() == 0)
        .count() as f64
        / draws as f64;
    let filtered = (0..draws).all(|_| sa_decide(&[8, 2], 1.0, 0.5, &mut rng).unwrap() == 0);
    outcome(
        (first - 0.8).abs() < 0.02 && (1.0 - first - 0.2).abs() < 0.02 && filtered,
        format!("freq ({first:.4}, {:.4}); R=0.5 always majority: {filtered}", 1.0 - first),
    )
}

fn elo_fitting() -> Outcome {
    let truth = [1000.0, 1100.0, 1200.0, 1300.0];
    let g = 1000;
    let mut expected = WinTable::new((0..4).map(|i| format!("a{i}")).collect(), g);
    let mut sampled = expected.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..4 {
        for j in i + 1..4 {
            let p = elo_expected(truth[i], truth[j]);
            expected.wins[i][j] = p * g as f64;
            expected.wins[j][i] = g as f64 - expected.wins[i][j];
            let wins = (0..g).filter(|_| rng.gen::<f64>() < p).count() as f64;
            sampled.wins[i][j] = wins;
            sampled.wins[j][i] = g as f64 - wins;
        }
    }
    let mut worst: f64 = 0.0;
    for m in [EloMethod::SquaredError, EloMethod::MaxLikelihood] {
        let fit = fit_elo(&expected, m).unwrap();
        for i in 1..4 {
            let gap = fit.ratings[i] - fit.ratings[0];
            worst = worst.max((gap - (truth[i] - truth[0])).abs());
        }
    }
    let fit = fit_elo(&sampled, EloMethod::MaxLikelihood).unwrap();
    let sampled_err = (1..4)
        .map(|i| (fit.ratings[i] - fit.ratings[0] - (truth[i] - truth[0])).abs())
        .fold(0.0, f64::max);
    let mut two = WinTable::new(vec!["a".into(), "b".into()], 100);
    two.wins[0][1] = 75.0;
    two.wins[1][0] = 25.0;
    let r = fit_elo(&two, EloMethod::SquaredError).unwrap();
    let gap = r.ratings[0] - r.ratings[1];
    outcome(
        worst <= 10.0 && (gap - 190.85).abs() < 0.5,
        format!(
            "max gap error {worst:.3} (one sampled tournament: {sampled_err:.2}); 75/25 gap {gap:.3}"
        ),
    )
}

struct Pipeline {
    game: GameSpec,
    train: RankDataset,
    candidate: RankDataset,
    query: RankDataset,
    params: ScorerParams,
    profile: StrengthProfile,
}

fn train_config() -> TrainConfig {
    TrainConfig {
        steps: 30_000,
        lr: 0.02,
        lr_halve_at: 22_500,
        log_interval: 1_000,
        seed: TRAIN_SEED,
        ..Default::default()
    }
}

fn pipeline() -> Pipeline {
    let t0 = Instant::now();
    let game = GameSpec::hex(5).unwrap();
    let teacher = train_teacher(
        game,
        &TeacherConfig {
            seed: SEED,
            ..Default::default()
        },
    )
    .unwrap();
    let sizes = SplitSizes {
        train: 300,
        candidate: 20,
        query: 60,
    };
    let data: GeneratedDataset =
        generate_dataset(&TierSpec::default_ladder(), Some(&teacher), game, sizes, SEED).unwrap();
    eprintln!("  pipeline: data ready after {}", fmt_secs(t0.elapsed()));
    let train_set = RankDataset::from_records(data.train).unwrap();
    let candidate = RankDataset::from_records(data.candidate).unwrap();
    let query = RankDataset::from_records(data.query).unwrap();
    let (params, _) = train(&train_set, default_scorer_spec(game, 64), &train_config()).unwrap();
    let profile = build_profile(&params, &candidate).unwrap();
    eprintln!("  pipeline: model trained after {}", fmt_secs(t0.elapsed()));
    Pipeline {
        game,
        train: train_set,
        candidate,
        query,
        params,
        profile,
    }
}

fn rank_recovery(p: &Pipeline) -> Outcome {
    let config = PredictionConfig {
        repeats: 500,
        tolerance: 1,
        seed: SEED,
        ..Default::default()
    };
    let curve = accuracy_curve(&p.params, &p.profile, &p.query, &GAME_COUNTS, &config).unwrap();
    let ns: Vec<f64> = GAME_COUNTS.iter().map(|&n| n as f64).collect();
    let acc: Vec<f64> = GAME_COUNTS.iter().map(|&n| curve.mean_accuracy(n).unwrap()).collect();
    let rho = spearman(&ns, &acc);
    let at20 = *acc.last().unwrap();
    let listed: Vec<String> = GAME_COUNTS.iter().zip(&acc).map(|(n, a)| format!("{n}:{a:.3}")).collect();
    outcome(
        at20 >= 0.9 && rho > 0.8,
        format!("accuracy(+-1) {}; rho {rho:.3}", listed.join(" ")),
    )
}

/// Composite score of random legal moves in the candidate positions.
fn infinity_mean(p: &Pipeline) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut betas = Vec::new();
    for r in 1..=p.candidate.num_ranks() as u32 {
        for pair in p.candidate.pairs(r) {
            let q = perturb_to_infinity(pair, &mut rng).unwrap();
            betas.push(p.params.forward(&encode_features(p.game, &q)).unwrap().beta);
        }
    }
    composite_score(&betas).unwrap()
}

fn ordering(p: &Pipeline) -> Outcome {
    let mut means = p.profile.means();
    means.push(infinity_mean(p));
    let strict = means.windows(2).all(|w| w[0] > w[1]);
    let listed: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
    outcome(strict, format!("r1..r5,inf = {}", listed.join(" > ")))
}

fn base_search() -> SearchConfig {
    SearchConfig {
        simulations: 400,
        c1: 1.0,
        ..Default::default()
    }
}

fn settings(game: GameSpec) -> MatchSettings {
    MatchSettings {
        game,
        opening_plies: 2,
        seed: SEED,
    }
}

fn adjustment(p: &Pipeline) -> Outcome {
    let sweep = strength_sweep(
        &p.params,
        &p.profile,
        &base_search(),
        &[1, 2, 3, 4, 5],
        3,
        200,
        &settings(p.game),
    )
    .unwrap();
    let rates: Vec<String> = sweep.rows.iter().map(|r| format!("{:.3}", r.win_rate)).collect();
    let own = sweep.rows[2].win_rate;
    outcome(
        sweep.spearman <= -0.9 && (0.4..=0.6).contains(&own),
        format!("win rates vs se-r3 [{}]; rho {:.3}", rates.join(" "), sweep.spearman),
    )
}

fn style(p: &Pipeline) -> Outcome {
    let base = base_search();
    let settings = settings(p.game);
    let sweep = strength_sweep(&p.params, &p.profile, &base, &[1, 2, 3, 4, 5], 3, 100, &settings).unwrap();
    let baseline = se_config(&base, &p.profile, 3);
    let mut better = 0;
    let mut cells = Vec::new();
    for r in 1..=5u32 {
        let target = sweep.rows[r as usize - 1].win_rate;
        let cal = calibrate_sa_z(&p.params, &base, &baseline, target, (0.05, 8.0), 6, 100, &settings).unwrap();
        let held: Vec<_> = p.query.games(r).to_vec();
        let se = move_prediction_accuracy(&p.params, &se_config(&base, &p.profile, r), &held, r, SEED).unwrap();
        let sa = move_prediction_accuracy(&p.params, &sa_config(&base, cal.z), &held, r, SEED).unwrap();
        if se.accuracy > sa.accuracy {
            better += 1;
        }
        cells.push(format!("r{r} se {:.3} sa(z={:.2}) {:.3}", se.accuracy, cal.z, sa.accuracy));
    }
    outcome(better >= 4, format!("SE better on {better}/5: {}", cells.join("; ")))
}

fn limited_rank(p: &Pipeline) -> Outcome {
    let config = PredictionConfig {
        tolerance: 1,
        seed: SEED,
        ..Default::default()
    };
    let result = limited_rank_experiment(
        &p.train,
        &[1, 5],
        &p.candidate,
        &p.query,
        default_scorer_spec(p.game, 64),
        &train_config(),
        &[20],
        &config,
    )
    .unwrap();
    let means = result.profile.means();
    let strict = means.windows(2).all(|w| w[0] > w[1]);
    let listed: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
    outcome(strict, format!("trained on {{1,5}}: r1..r5 = {}", listed.join(" > ")))
}

const CLI_CONFIG: &str = "\
game = hex4
seed = 3
tiers.budgets = 32,8,2
split.train = 20
split.candidate = 4
split.query = 6
teacher.games = 10
teacher.budget = 32
teacher.hidden = 8
teacher.steps = 200
train.hidden = 8
train.steps = 300
train.log_interval = 100
curve.games = 1,2
curve.repeats = 50
search.simulations = 16
match.games = 4
calib.games = 4
calib.steps = 2
moveacc.games = 2
limited.ranks = 1,3
play.a = tier:1
play.b = se:2
rr.agents = vanilla,se:1,sa:1,tier:2
";

const CLI_COMMANDS: [&str; 11] = [
    "gen-data",
    "train",
    "profile",
    "accuracy-curve",
    "predict",
    "play",
    "sweep",
    "round-robin",
    "elo",
    "move-acc",
    "limited-rank",
];

/// Runs every command once into `out` and returns the report files.
fn run_cli(config: &Path, out: &Path) -> Vec<(String, Vec<u8>)> {
    let _ = fs::remove_dir_all(out);
    let input = out.join("data").join("query").join("tier_1.jsonl");
    for cmd in CLI_COMMANDS {
        let status = Command::new(env!("CARGO_BIN_EXE_sest"))
            .arg(cmd)
            .arg("--config")
            .arg(config)
            .arg("--set")
            .arg(format!("out={}", out.display()))
            .arg("--set")
            .arg(format!("predict.input={}", input.display()))
            .output()
            .unwrap();
        assert!(status.status.success(), "{cmd}: {}", String::from_utf8_lossy(&status.stderr));
    }
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(out.join("reports"))
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.conf");
    fs::write(&config, CLI_CONFIG).unwrap();
    let out = dir.path().join("run");
    let first = run_cli(&config, &out);
    let second = run_cli(&config, &out);
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.as_str())
        .collect();
    let pass = first.len() == 2 * CLI_COMMANDS.len() && first.len() == second.len() && differing.is_empty();
    outcome(
        pass,
        format!("{} report files over {} commands; differing: {:?}", first.len(), CLI_COMMANDS.len(), differing),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        let line = format!(
            "[{}] criterion {id:>2} {name}: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            fmt_secs(t0.elapsed())
        );
        println!("{line}");
        results.push((id, name, o));
    };
    run(1, "gradient correctness", &gradients);
    run(2, "loss closed forms", &closed_forms);
    run(3, "reduction identity", &reduction_identity);
    run(4, "oracle soundness", &oracle_soundness);
    run(9, "sa mechanics", &sa_mechanics);
    run(10, "elo fitting", &elo_fitting);
    run(12, "cli reproducibility", &reproducibility);
    let p = pipeline();
    run(5, "synthetic rank recovery", &|| rank_recovery(&p));
    run(6, "strength ordering", &|| ordering(&p));
    run(7, "strength adjustment", &|| adjustment(&p));
    run(8, "se vs sa style", &|| style(&p));
    run(11, "limited-rank generalization", &|| limited_rank(&p));

    results.sort_by_key(|r| r.0);
    println!("\nsummary:");
    for (id, name, o) in &results {
        println!("  {:>2} {:<28} {}", id, name, if o.pass { "PASS" } else { "FAIL" });
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all {} criteria passed", results.len());
}
