//! Config-driven experiment commands. Each returns the report to write.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use strength_core::config::Config;
use strength_core::datagen::{
    generate_dataset, train_teacher, validate_tiers, Agent, GeneratedDataset, SearchAgent, SplitSizes, Teacher,
    TeacherConfig, TierAgent, TierSpec,
};
use strength_core::game::GameSpec;
use strength_core::harness::{
    calibrate_sa_z, elo_gap, fit_elo, limited_rank_experiment, move_prediction_accuracy, play_match,
    round_robin as run_round_robin, sa_config, se_config, strength_sweep, two_proportion_p_value, EloMethod,
    MatchSettings, WinTable,
};
use strength_core::inference::{
    accuracy_curve as run_curve, build_profile, predict_rank, score_all_moves, AccuracyCurve, MoveFilter,
    PredictionConfig, Predictor, StrengthProfile,
};
use strength_core::record::read_records;
use strength_core::report::{fmt_f, ExperimentReport, Table};
use strength_core::scorer::{load_checkpoint, save_checkpoint, ScorerParams};
use strength_core::search::{SearchConfig, SearchMode};
use strength_core::training::{
    default_scorer_spec, train as run_train, RankDataset, StrengthObjective, TrainConfig,
};

/// Config view that remembers every value it resolved, defaults included, so
/// reports list the effective settings.
struct Params<'a> {
    config: &'a Config,
    used: RefCell<BTreeMap<String, String>>,
}

impl<'a> Params<'a> {
    fn new(config: &'a Config) -> Self {
        Params {
            config,
            used: RefCell::new(BTreeMap::new()),
        }
    }

    fn record(&self, key: &str, value: String) {
        self.used.borrow_mut().insert(key.to_string(), value);
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let v = self.config.get(key)?;
        self.record(key, self.config.raw(key).unwrap_or_default());
        Ok(v)
    }

    fn get_or<T: FromStr + Display>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        let v = self.config.get_or(key, default)?;
        self.record(key, v.to_string());
        Ok(v)
    }

    fn list_or<T: FromStr + Display + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        let v = match self.config.raw(key) {
            Some(_) => self.config.get_list(key)?,
            None => default.to_vec(),
        };
        let text: Vec<String> = v.iter().map(ToString::to_string).collect();
        self.record(key, text.join(","));
        Ok(v)
    }

    fn path_or(&self, key: &str, default: PathBuf) -> Result<PathBuf> {
        let v = match self.config.raw(key) {
            Some(p) => PathBuf::from(p),
            None => default,
        };
        self.record(key, v.display().to_string());
        Ok(v)
    }

    fn snapshot(&self) -> String {
        self.used
            .borrow()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    fn report(&self, name: &str) -> Result<ExperimentReport> {
        let tag: String = self.config.get_or("report.tag", String::new())?;
        let name = if tag.is_empty() {
            name.to_string()
        } else {
            format!("{name}-{tag}")
        };
        Ok(ExperimentReport::new(&name, &self.snapshot()))
    }
}

/// Output locations. Only `out` is required; the others default to files
/// inside it.
pub struct Paths {
    pub out: PathBuf,
    pub reports: PathBuf,
    pub data: PathBuf,
    pub teacher: PathBuf,
    pub model: PathBuf,
    pub profile: PathBuf,
}

impl Paths {
    pub fn new(config: &Config) -> Result<Paths> {
        Paths::resolve(&Params::new(config))
    }

    fn resolve(p: &Params) -> Result<Paths> {
        let out: PathBuf = p.get::<String>("out")?.into();
        Ok(Paths {
            reports: out.join("reports"),
            data: p.path_or("data", out.join("data"))?,
            teacher: p.path_or("teacher", out.join("teacher.ckpt"))?,
            model: p.path_or("model", out.join("model.ckpt"))?,
            profile: p.path_or("profile", out.join("profile.txt"))?,
            out,
        })
    }
}

fn game(p: &Params) -> Result<GameSpec> {
    p.get_or("game", GameSpec::hex(5)?)
}

fn tiers(p: &Params) -> Result<Vec<TierSpec>> {
    let budgets = p.list_or("tiers.budgets", &[512usize, 128, 32, 8, 2])?;
    let temperature = p.get_or("tiers.temperature", 0.3)?;
    let tiers: Vec<TierSpec> = budgets
        .into_iter()
        .enumerate()
        .map(|(i, budget)| TierSpec {
            tier: i as u32 + 1,
            budget,
            temperature,
        })
        .collect();
    validate_tiers(&tiers)?;
    Ok(tiers)
}

fn teacher_config(p: &Params) -> Result<TeacherConfig> {
    let d = TeacherConfig::default();
    Ok(TeacherConfig {
        games: p.get_or("teacher.games", d.games)?,
        budget: p.get_or("teacher.budget", d.budget)?,
        temperature: p.get_or("teacher.temperature", d.temperature)?,
        hidden: p.get_or("teacher.hidden", d.hidden)?,
        steps: p.get_or("teacher.steps", d.steps)?,
        lr: p.get_or("teacher.lr", d.lr)?,
        prior_temperature: p.get_or("teacher.prior_temperature", d.prior_temperature)?,
        seed: p.get_or("seed", 0)?,
    })
}

fn load_teacher(p: &Params, paths: &Paths) -> Result<Teacher> {
    let params = load_checkpoint(&paths.teacher)
        .with_context(|| format!("loading teacher {}", paths.teacher.display()))?;
    Ok(Teacher {
        params,
        prior_temperature: p.get_or("teacher.prior_temperature", TeacherConfig::default().prior_temperature)?,
    })
}

fn load_split(dir: &Path, split: &str) -> Result<RankDataset> {
    let data = GeneratedDataset::read(dir).with_context(|| format!("reading {}", dir.display()))?;
    let records = data.split(split).expect("known split").to_vec();
    if records.is_empty() {
        bail!("no {split} games under {}", dir.display());
    }
    Ok(RankDataset::from_records(records)?)
}

fn load_model(paths: &Paths) -> Result<ScorerParams> {
    load_checkpoint(&paths.model).with_context(|| format!("loading model {}", paths.model.display()))
}

fn load_profile(paths: &Paths) -> Result<StrengthProfile> {
    StrengthProfile::load(&paths.profile).with_context(|| format!("loading profile {}", paths.profile.display()))
}

fn parse_objective(s: &str) -> Result<StrengthObjective> {
    match s {
        "bt" => Ok(StrengthObjective::BradleyTerry),
        "sl" => Ok(StrengthObjective::Classification),
        _ => bail!("unknown objective '{s}' (expected bt or sl)"),
    }
}

fn train_config(p: &Params, paths: &Paths) -> Result<TrainConfig> {
    let steps = p.get_or("train.steps", 30_000usize)?;
    Ok(TrainConfig {
        m: p.get_or("train.m", 7)?,
        lr: p.get_or("train.lr", 0.02)?,
        lr_halve_at: p.get_or("train.lr_halve_at", steps * 3 / 4)?,
        steps,
        include_infinity: p.get_or("train.include_infinity", true)?,
        w_policy: p.get_or("train.w_policy", 1.0)?,
        w_value: p.get_or("train.w_value", 1.0)?,
        w_strength: p.get_or("train.w_strength", 1.0)?,
        seed: p.get_or("train.seed", 1)?,
        log_interval: p.get_or("train.log_interval", 1000)?,
        objective: parse_objective(&p.get_or("train.objective", "bt".to_string())?)?,
        checkpoint_interval: p.get_or("train.checkpoint_interval", 0)?,
        checkpoint_path: Some(paths.model.clone()),
        log_path: Some(paths.out.join("train.log")),
    })
}

fn prediction_config(p: &Params) -> Result<PredictionConfig> {
    Ok(PredictionConfig {
        repeats: p.get_or("curve.repeats", 500)?,
        tolerance: p.get_or("curve.tolerance", 0)?,
        filter: p.get_or("curve.filter", MoveFilter::All)?,
        predictor: p.get_or("curve.predictor", "se".to_string())?.parse::<Predictor>()?,
        seed: p.get_or("seed", 0)?,
        ..Default::default()
    })
}

fn search_base(p: &Params) -> Result<SearchConfig> {
    let d = SearchConfig::default();
    Ok(SearchConfig {
        simulations: p.get_or("search.simulations", 400)?,
        c: p.get_or("search.c", d.c)?,
        c1: p.get_or("search.c1", d.c1)?,
        r: p.get_or("search.r", d.r)?,
        ..d
    })
}

fn match_settings(p: &Params) -> Result<MatchSettings> {
    Ok(MatchSettings {
        game: game(p)?,
        opening_plies: p.get_or("match.opening_plies", 2)?,
        seed: p.get_or("seed", 0)?,
    })
}

fn profile_table(profile: &StrengthProfile) -> Table {
    let mut t = Table::new("profile", &["rank", "moves", "mean_beta"]);
    for r in 1..=profile.num_ranks() as u32 {
        t.push(vec![r.to_string(), profile.count(r).to_string(), fmt_f(profile.mean(r))]);
    }
    t
}

/// Confidence bounds are normal approximations around the observed accuracy.
fn curve_tables(curve: &AccuracyCurve) -> [Table; 2] {
    let mut rows = Table::new("accuracy", &["games", "rank", "accuracy", "ci_low", "ci_high"]);
    for r in &curve.rows {
        rows.push(vec![
            r.games.to_string(),
            r.rank.to_string(),
            fmt_f(r.accuracy),
            fmt_f(r.ci_low),
            fmt_f(r.ci_high),
        ]);
    }
    let mut mean = Table::new("mean_accuracy", &["games", "accuracy"]);
    for n in curve.game_counts() {
        mean.push(vec![n.to_string(), fmt_f(curve.mean_accuracy(n).unwrap_or(0.0))]);
    }
    [rows, mean]
}

pub fn gen_data(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let game = game(&p)?;
    let tiers = tiers(&p)?;
    let sizes = SplitSizes {
        train: p.get_or("split.train", 300)?,
        candidate: p.get_or("split.candidate", 20)?,
        query: p.get_or("split.query", 60)?,
    };
    let seed = p.get_or("seed", 0)?;
    let teacher = if p.get_or("teacher.enabled", true)? {
        eprintln!("training teacher");
        let t = train_teacher(game, &teacher_config(&p)?)?;
        std::fs::create_dir_all(&paths.out)?;
        save_checkpoint(&t.params, &paths.teacher)?;
        Some(t)
    } else {
        None
    };
    eprintln!("generating {} games per tier", sizes.total());
    let data = generate_dataset(&tiers, teacher.as_ref(), game, sizes, seed)?;
    data.write(&paths.data)?;

    let mut report = p.report("gen-data")?;
    let mut t = Table::new(
        "tiers",
        &["tier", "budget", "temperature", "split", "games", "mean_length", "first_player_wins"],
    );
    for tier in &tiers {
        for split in GeneratedDataset::SPLITS {
            let games: Vec<_> = data
                .split(split)
                .expect("known split")
                .iter()
                .filter(|r| r.side_labels[0] == tier.tier)
                .collect();
            let n = games.len();
            let len = games.iter().map(|r| r.moves.len()).sum::<usize>() as f64 / n.max(1) as f64;
            let wins = games.iter().filter(|r| r.outcome > 0).count();
            t.push(vec![
                tier.tier.to_string(),
                tier.budget.to_string(),
                fmt_f(tier.temperature),
                split.to_string(),
                n.to_string(),
                fmt_f(len),
                wins.to_string(),
            ]);
        }
    }
    report.tables.push(t);
    Ok(report)
}

pub fn train(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let game = game(&p)?;
    let mut train_set = load_split(&paths.data, "train")?;
    if config.raw("train.ranks").is_some() {
        let kept: Vec<u32> = p.list_or("train.ranks", &[])?;
        train_set = train_set.subset(&kept)?;
    }
    let tc = train_config(&p, &paths)?;
    let mut spec = default_scorer_spec(game, p.get_or("train.hidden", 64)?);
    if tc.objective == StrengthObjective::Classification {
        spec = spec.with_rank_head(train_set.num_ranks());
    }
    std::fs::create_dir_all(&paths.out)?;
    eprintln!("training {} steps", tc.steps);
    let (params, log) = run_train(&train_set, spec, &tc)?;
    save_checkpoint(&params, &paths.model)?;

    let mut report = p.report("train")?;
    let mut columns = vec!["step", "lr", "loss_strength", "loss_policy", "loss_value"];
    let names: Vec<String> = (1..=train_set.num_ranks())
        .map(|r| format!("mean_r{r}"))
        .chain(tc.include_infinity.then(|| "mean_inf".to_string()))
        .collect();
    columns.extend(names.iter().map(String::as_str));
    let mut t = Table::new("log", &columns);
    for row in &log.rows {
        let mut cells = vec![
            row.step.to_string(),
            fmt_f(row.lr),
            fmt_f(row.report.strength),
            fmt_f(row.report.policy),
            fmt_f(row.report.value),
        ];
        cells.extend(row.report.means.iter().map(|m| fmt_f(*m)));
        cells.resize(columns.len(), String::new());
        t.push(cells);
    }
    report.tables.push(t);
    Ok(report)
}

pub fn profile(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let params = load_model(&paths)?;
    let candidate = load_split(&paths.data, "candidate")?;
    let profile = build_profile(&params, &candidate)?;
    profile.save(&paths.profile)?;
    let mut report = p.report("profile")?;
    report.tables.push(profile_table(&profile));
    Ok(report)
}

pub fn predict(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let input: PathBuf = p.get::<String>("predict.input")?.into();
    let params = load_model(&paths)?;
    let profile = load_profile(&paths)?;
    let records = read_records(&input).with_context(|| format!("reading {}", input.display()))?;
    if records.is_empty() {
        bail!("no games in {}", input.display());
    }
    // Every move of every game counts towards one prediction.
    let mut betas = Vec::new();
    let mut t = Table::new("games", &["id", "moves", "mean_beta", "predicted_rank"]);
    for record in &records {
        let scores: Vec<f64> = score_all_moves(&params, record)?.into_iter().map(|s| s.1).collect();
        let mean = scores.iter().sum::<f64>() / scores.len().max(1) as f64;
        t.push(vec![
            record.id.clone(),
            scores.len().to_string(),
            fmt_f(mean),
            predict_rank(&profile, mean).to_string(),
        ]);
        betas.extend(scores);
    }
    let mean = betas.iter().sum::<f64>() / betas.len().max(1) as f64;
    let predicted = predict_rank(&profile, mean);
    let mut d = Table::new("distances", &["rank", "mean_beta", "distance"]);
    for r in 1..=profile.num_ranks() as u32 {
        d.push(vec![r.to_string(), fmt_f(profile.mean(r)), fmt_f((mean - profile.mean(r)).abs())]);
    }
    let mut report = p.report("predict")?;
    report.notes.push(format!("games={} mean_beta={} predicted_rank={predicted}", records.len(), fmt_f(mean)));
    report.tables.push(t);
    report.tables.push(d);
    Ok(report)
}

pub fn accuracy_curve(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let params = load_model(&paths)?;
    let profile = load_profile(&paths)?;
    let query = load_split(&paths.data, "query")?;
    let counts = p.list_or("curve.games", &[1usize, 2, 3, 5, 8, 12, 20])?;
    let pc = prediction_config(&p)?;
    let curve = run_curve(&params, &profile, &query, &counts, &pc)?;
    let mut report = p.report("accuracy-curve")?;
    let ns: Vec<f64> = curve.game_counts().iter().map(|&n| n as f64).collect();
    let acc: Vec<f64> = curve
        .game_counts()
        .iter()
        .map(|&n| curve.mean_accuracy(n).unwrap_or(0.0))
        .collect();
    report
        .notes
        .push(format!("spearman(games, accuracy)={}", fmt_f(strength_core::harness::spearman(&ns, &acc))));
    report.notes.push("ci: normal approximation, 95%".into());
    report.tables.extend(curve_tables(&curve));
    Ok(report)
}

/// Player description: `vanilla`, `se:<rank>`, `sa:<z>` or `tier:<index>`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum AgentSpec {
    Vanilla,
    Se(u32),
    Sa(f64),
    Tier(u32),
}

impl FromStr for AgentSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        Ok(match kind {
            "vanilla" => AgentSpec::Vanilla,
            "se" => AgentSpec::Se(arg.parse().with_context(|| format!("agent '{s}'"))?),
            "sa" => AgentSpec::Sa(arg.parse().with_context(|| format!("agent '{s}'"))?),
            "tier" => AgentSpec::Tier(arg.parse().with_context(|| format!("agent '{s}'"))?),
            _ => bail!("unknown agent '{s}' (expected vanilla, se:R, sa:Z or tier:T)"),
        })
    }
}

impl Display for AgentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AgentSpec::Vanilla => write!(f, "vanilla"),
            AgentSpec::Se(r) => write!(f, "se:{r}"),
            AgentSpec::Sa(z) => write!(f, "sa:{z}"),
            AgentSpec::Tier(t) => write!(f, "tier:{t}"),
        }
    }
}

/// Everything agents may borrow from.
struct Arena {
    params: Option<ScorerParams>,
    profile: Option<StrengthProfile>,
    teacher: Option<Teacher>,
    tiers: Vec<TierSpec>,
    base: SearchConfig,
}

impl Arena {
    fn load(p: &Params, paths: &Paths, specs: &[AgentSpec]) -> Result<Arena> {
        let needs_net = specs.iter().any(|s| !matches!(s, AgentSpec::Tier(_)));
        let needs_profile = specs.iter().any(|s| matches!(s, AgentSpec::Se(_)));
        let needs_tiers = specs.iter().any(|s| matches!(s, AgentSpec::Tier(_)));
        Ok(Arena {
            params: needs_net.then(|| load_model(paths)).transpose()?,
            profile: needs_profile.then(|| load_profile(paths)).transpose()?,
            teacher: (needs_tiers && p.get_or("teacher.enabled", true)?)
                .then(|| load_teacher(p, paths))
                .transpose()?,
            tiers: if needs_tiers { tiers(p)? } else { Vec::new() },
            base: search_base(p)?,
        })
    }

    fn agent(&self, spec: AgentSpec) -> Result<Box<dyn Agent + '_>> {
        let params = || self.params.as_ref().expect("model loaded");
        Ok(match spec {
            AgentSpec::Vanilla => Box::new(SearchAgent::new(
                params(),
                SearchConfig {
                    mode: SearchMode::Vanilla,
                    ..self.base.clone()
                },
                0,
            )),
            AgentSpec::Se(r) => {
                let profile = self.profile.as_ref().expect("profile loaded");
                if r == 0 || r as usize > profile.num_ranks() {
                    bail!("se:{r}: profile has ranks 1..={}", profile.num_ranks());
                }
                Box::new(SearchAgent::new(params(), se_config(&self.base, profile, r), 0))
            }
            AgentSpec::Sa(z) => Box::new(SearchAgent::new(params(), sa_config(&self.base, z), 0)),
            AgentSpec::Tier(t) => {
                let spec = self
                    .tiers
                    .get((t as usize).wrapping_sub(1))
                    .with_context(|| format!("tier:{t}: ladder has {} tiers", self.tiers.len()))?;
                Box::new(TierAgent::new(*spec, self.teacher.as_ref(), 0))
            }
        })
    }
}

pub fn play(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let a: AgentSpec = p.get::<String>("play.a")?.parse()?;
    let b: AgentSpec = p.get::<String>("play.b")?.parse()?;
    let games = p.get_or("match.games", 200)?;
    let settings = match_settings(&p)?;
    let arena = Arena::load(&p, &paths, &[a, b])?;
    let (mut x, mut y) = (arena.agent(a)?, arena.agent(b)?);
    let score = play_match(x.as_mut(), y.as_mut(), games, &settings)?;
    let rate = score / games as f64;
    let (lo, hi) = strength_core::inference::normal_ci(rate, games);
    let mut report = p.report("play")?;
    let mut t = Table::new("match", &["a", "b", "games", "score_a", "win_rate_a", "ci_low", "ci_high", "elo_gap"]);
    let gap = if rate > 0.0 && rate < 1.0 { fmt_f(elo_gap(rate)) } else { "inf".into() };
    t.push(vec![
        a.to_string(),
        b.to_string(),
        games.to_string(),
        fmt_f(score),
        fmt_f(rate),
        fmt_f(lo),
        fmt_f(hi),
        gap,
    ]);
    report.tables.push(t);
    Ok(report)
}

pub fn sweep(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let params = load_model(&paths)?;
    let profile = load_profile(&paths)?;
    let all: Vec<u32> = (1..=profile.num_ranks() as u32).collect();
    let targets = p.list_or("sweep.targets", &all)?;
    let baseline = p.get_or("sweep.baseline", 3u32)?;
    let games = p.get_or("match.games", 200)?;
    let result = strength_sweep(
        &params,
        &profile,
        &search_base(&p)?,
        &targets,
        baseline,
        games,
        &match_settings(&p)?,
    )?;
    let mut report = p.report("sweep")?;
    report.notes.push(format!("spearman(target, win_rate)={}", fmt_f(result.spearman)));
    let mut t = Table::new("sweep", &["agent", "baseline", "games", "score", "win_rate", "ci_low", "ci_high"]);
    for r in &result.rows {
        t.push(vec![
            r.label.clone(),
            format!("se-r{baseline}"),
            r.games.to_string(),
            fmt_f(r.score),
            fmt_f(r.win_rate),
            fmt_f(r.ci_low),
            fmt_f(r.ci_high),
        ]);
    }
    report.tables.push(t);
    Ok(report)
}

pub fn round_robin(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let specs: Vec<AgentSpec> = p
        .get::<String>("rr.agents")?
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_>>()?;
    let games = p.get_or("match.games", 200)?;
    let settings = match_settings(&p)?;
    let arena = Arena::load(&p, &paths, &specs)?;
    let mut agents = specs.iter().map(|&s| arena.agent(s)).collect::<Result<Vec<_>>>()?;
    let names = specs.iter().map(ToString::to_string).collect();
    let table = run_round_robin(&mut agents, names, games, &settings)?;
    let table_path = p.path_or("elo.table", paths.out.join("wintable.txt"))?;
    std::fs::create_dir_all(&paths.out)?;
    std::fs::write(&table_path, table.to_text())?;
    let mut report = p.report("round-robin")?;
    report.tables.push(win_table(&table));
    Ok(report)
}

fn win_table(table: &WinTable) -> Table {
    let mut columns = vec!["agent".to_string()];
    columns.extend(table.names.iter().cloned());
    let refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new("win_rate", &refs);
    for i in 0..table.len() {
        let mut row = vec![table.names[i].clone()];
        row.extend((0..table.len()).map(|j| if i == j { "-".into() } else { fmt_f(table.rate(i, j)) }));
        t.push(row);
    }
    t
}

pub fn elo(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let table_path = p.path_or("elo.table", paths.out.join("wintable.txt"))?;
    let text = std::fs::read_to_string(&table_path).with_context(|| format!("reading {}", table_path.display()))?;
    let table = WinTable::from_text(&text)?;
    let method = match p.get_or("elo.method", "lsq".to_string())?.as_str() {
        "lsq" => EloMethod::SquaredError,
        "ml" => EloMethod::MaxLikelihood,
        m => bail!("unknown elo.method '{m}' (expected lsq or ml)"),
    };
    let fit = fit_elo(&table, method)?;
    let mut report = p.report("elo")?;
    report.notes.push(format!(
        "fit: {method:?}, coordinate-wise Newton from 1500 until no rating moves more than 1e-6, \
         re-centred on mean 1500, clipped to +-1000; converged after {} sweeps",
        fit.iterations
    ));
    let mut t = Table::new("elo", &["agent", "rating", "clipped"]);
    for (i, name) in table.names.iter().enumerate() {
        t.push(vec![name.clone(), fmt_f(fit.ratings[i]), fit.clipped[i].to_string()]);
    }
    report.tables.push(win_table(&table));
    report.tables.push(t);
    Ok(report)
}

pub fn move_acc(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let params = load_model(&paths)?;
    let profile = load_profile(&paths)?;
    let query = load_split(&paths.data, "query")?;
    let base = search_base(&p)?;
    let settings = match_settings(&p)?;
    let per_tier = p.get_or("moveacc.games", 60usize)?;
    let baseline_rank = p.get_or("sweep.baseline", 3u32)?;
    let games = p.get_or("calib.games", 100usize)?;
    let range = (p.get_or("calib.lo", 0.05)?, p.get_or("calib.hi", 8.0)?);
    let steps = p.get_or("calib.steps", 6usize)?;
    let seed = p.get_or("seed", 0)?;

    // SA is matched to SE's strength at each rank: both are measured against
    // the same SE baseline.
    let ranks: Vec<u32> = (1..=profile.num_ranks() as u32).collect();
    let sweep = strength_sweep(&params, &profile, &base, &ranks, baseline_rank, games, &settings)?;
    let baseline = se_config(&base, &profile, baseline_rank);
    let mut t = Table::new(
        "move_accuracy",
        &["rank", "positions", "se_win_rate", "sa_z", "sa_win_rate", "se_accuracy", "sa_accuracy", "p_value"],
    );
    let mut se_better = 0;
    for (i, &r) in ranks.iter().enumerate() {
        eprintln!("rank {r}");
        let target = sweep.rows[i].win_rate;
        let cal = calibrate_sa_z(&params, &base, &baseline, target, range, steps, games, &settings)?;
        let held: Vec<_> = query.games(r).iter().take(per_tier).cloned().collect();
        let se = move_prediction_accuracy(&params, &se_config(&base, &profile, r), &held, r, seed)?;
        let sa = move_prediction_accuracy(&params, &sa_config(&base, cal.z), &held, r, seed)?;
        if se.accuracy > sa.accuracy {
            se_better += 1;
        }
        let pv = two_proportion_p_value(se.correct as f64, se.positions, sa.correct as f64, sa.positions);
        t.push(vec![
            r.to_string(),
            se.positions.to_string(),
            fmt_f(target),
            fmt_f(cal.z),
            fmt_f(cal.win_rate),
            fmt_f(se.accuracy),
            fmt_f(sa.accuracy),
            fmt_f(pv),
        ]);
    }
    let mut report = p.report("move-acc")?;
    report.notes.push(format!("se_better_ranks={se_better}/{}", ranks.len()));
    report.tables.push(t);
    Ok(report)
}

pub fn limited_rank(config: &Config) -> Result<ExperimentReport> {
    let p = Params::new(config);
    let paths = Paths::resolve(&p)?;
    let game = game(&p)?;
    let kept = p.list_or("limited.ranks", &[1u32, 5])?;
    let train_set = load_split(&paths.data, "train")?;
    let candidate = load_split(&paths.data, "candidate")?;
    let query = load_split(&paths.data, "query")?;
    let mut tc = train_config(&p, &paths)?;
    // Keep the full model untouched.
    tc.checkpoint_path = None;
    tc.log_path = None;
    let counts = p.list_or("curve.games", &[1usize, 2, 3, 5, 8, 12, 20])?;
    let pc = prediction_config(&p)?;
    let spec = default_scorer_spec(game, p.get_or("train.hidden", 64)?);
    let result = limited_rank_experiment(&train_set, &kept, &candidate, &query, spec, &tc, &counts, &pc)?;
    let means = result.profile.means();
    let ordered = means.windows(2).all(|w| w[0] > w[1]);
    let mut report = p.report("limited-rank")?;
    report.notes.push(format!("strictly_ordered={ordered}"));
    report.tables.push(profile_table(&result.profile));
    report.tables.extend(curve_tables(&result.curve));
    Ok(report)
}
