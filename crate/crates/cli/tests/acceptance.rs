//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use roboviz_core::engine::{decide, MatchLog, Verdict};
use roboviz_core::matchgen::save_match;
use roboviz_core::simbot::{run_headless, Bot};
use roboviz_core::{generate_match, replay, GameState, Guess, MatchConfig, MatchData, Reason, RobotStatus};
use roboviz_server::{router, AppState, ServerConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roboviz"))
}

fn data(seed: u64) -> MatchData {
    generate_match(&MatchConfig::with_seed(seed)).unwrap()
}

// ---------------------------------------------------------------- constants

async fn call(app: &axum::Router, method: &str, uri: &str, token: Option<&str>, body: Value) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let resp = app
        .clone()
        .oneshot(req.body(Body::from(body.to_string())).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

/// Runs a live match and returns the elapsed clock time until the
/// snapshot reports it finished.
async fn live_match(match_dir: &Path, tick_seconds: f64, quiet: Duration, poll: Duration) -> Result<Duration, String> {
    let app = router(AppState::new(ServerConfig {
        admin_secret: "admin".into(),
        ..Default::default()
    }));
    let (_, created) = call(&app, "POST", "/matches", Some("admin"), json!({ "match_dir": match_dir, "mode": "live", "tick_seconds": tick_seconds })).await;
    let id = created["match_id"].as_str().ok_or("create failed")?.to_string();
    for team in ["north", "south"] {
        call(&app, "POST", &format!("/matches/{id}/join"), None, json!({ "team": team })).await;
    }
    let start = tokio::time::Instant::now();
    call(&app, "POST", &format!("/matches/{id}/start"), Some("admin"), json!({})).await;
    tokio::time::sleep(quiet).await;
    let (_, v) = call(&app, "GET", &format!("/matches/{id}/public"), None, Value::Null).await;
    check(v["status"] == "running", format!("finished before {quiet:?}"))?;
    loop {
        tokio::time::sleep(poll).await;
        let (_, v) = call(&app, "GET", &format!("/matches/{id}/public"), None, Value::Null).await;
        if v["status"] == "finished" {
            check(v["snapshot"]["tick"] == 100, "match ended before tick 100")?;
            return Ok(start.elapsed());
        }
    }
}

fn game_constants() -> Outcome {
    let c = MatchConfig::default();
    check(c.num_robots == 100, "num_robots")?;
    check(c.num_ticks == 100, "num_ticks")?;
    check(c.tick_seconds == 6.0, "tick_seconds")?;
    check(c.drops_per_tick_series == 5 && c.drops_per_tick_parts == 5, "5/5 split")?;
    check(c.proximity_threshold == 10, "threshold")?;

    let d = Arc::new(data(0));
    let mut state = GameState::new(d.clone(), "a", "b", 0).unwrap();
    for _ in 0..10 {
        let events = state.step().unwrap();
        for drop in &events.drops {
            check(drop.series_items.len() == 5 && drop.part_items.len() == 5, "drop is not 5+5")?;
        }
        check(events.drops.len() == 2, "one drop per team per tick")?;
    }

    let dir = tempfile::tempdir().unwrap();
    save_match(&d, dir.path()).unwrap();
    let paused = tokio::runtime::Builder::new_current_thread()
        .enable_time()
        .start_paused(true)
        .build()
        .unwrap();
    let clock = paused.block_on(live_match(dir.path(), 6.0, Duration::from_secs(599), Duration::from_millis(100)))?;
    check((clock.as_secs_f64() - 600.0).abs() <= 1.0, format!("live run took {clock:?} on the clock"))?;

    let real = tokio::runtime::Runtime::new().unwrap();
    let wall = real.block_on(live_match(dir.path(), 0.01, Duration::ZERO, Duration::from_millis(2)))?;
    check((wall.as_secs_f64() - 1.0).abs() <= 1.0 && wall < Duration::from_secs(5), format!("0.01 s ticks took {wall:?}"))?;
    Ok(format!(
        "100 robots, 100 ticks, 6 s/tick, 5+5 items; live run {:.3} s (paused clock), 0.01 s ticks {:.3} s wall",
        clock.as_secs_f64(),
        wall.as_secs_f64()
    ))
}

// --------------------------------------------------------------- resolution

/// Direct reading of the rules, written without the engine's decision table.
#[derive(Debug, PartialEq)]
enum Expected {
    Down,
    Wins(usize, Reason),
    Network,
}

fn oracle(truth: i64, a: i64, b: i64) -> Expected {
    let bids: Vec<(usize, i64)> = [(0, a), (1, b)].into_iter().filter(|&(_, g)| g != -1).collect();
    match bids.as_slice() {
        [] => Expected::Down,
        [(slot, _)] => Expected::Wins(*slot, Reason::SoleBidder),
        _ => {
            let da = (a - truth).abs();
            let db = (b - truth).abs();
            if da == db || (da <= 10 && db <= 10) {
                Expected::Network
            } else if da < db {
                Expected::Wins(0, Reason::ClosestOutsideThreshold)
            } else {
                Expected::Wins(1, Reason::ClosestOutsideThreshold)
            }
        }
    }
}

fn resolution_oracle() -> Outcome {
    let mut total = 0;
    let mut slowest = Duration::ZERO;
    for truth in [92u8, 0, 50, 100, 7] {
        let start = Instant::now();
        let mut cases = 0;
        for a in -1..=100i64 {
            for b in -1..=100i64 {
                let got = decide(truth, [Guess::from_wire(a).unwrap(), Guess::from_wire(b).unwrap()], 10);
                let got = match got {
                    Verdict::PowerDown => Expected::Down,
                    Verdict::Award(slot, reason) => Expected::Wins(slot, reason),
                    Verdict::Network => Expected::Network,
                };
                let want = oracle(truth as i64, a, b);
                check(got == want, format!("truth {truth}, A {a}, B {b}: engine {got:?}, oracle {want:?}"))?;
                cases += 1;
            }
        }
        slowest = slowest.max(start.elapsed());
        check(cases == 10_404, format!("{cases} cases"))?;
        total += cases;
    }
    check(slowest < Duration::from_secs(1), format!("enumeration took {slowest:?}"))?;
    Ok(format!("{total} cases over 5 truths agree; slowest sweep {slowest:?}"))
}

// ------------------------------------------------------------ worked example

fn worked_example() -> Outcome {
    let mut d = data(42);
    d.robots[87].expiration_tick = 60;
    d.series.values[87][60] = 92;
    let d = Arc::new(d);
    let mut reasons = Vec::new();
    for (a, b, expect_reason, expect_winner) in [
        (91, -1, Some(Reason::SoleBidder), Some("alpha")),
        (91, 85, None, None),
        (91, 60, Some(Reason::ClosestOutsideThreshold), Some("alpha")),
        (-1, -1, Some(Reason::BothDeclined), None),
    ] {
        let mut state = GameState::new(d.clone(), "alpha", "beta", 1).unwrap();
        for _ in 0..59 {
            state.step().unwrap();
        }
        state.submit_bid("alpha", 87, a).unwrap();
        state.submit_bid("beta", 87, b).unwrap();
        state.step().unwrap();
        let outcome = state.outcomes().iter().find(|o| o.robot_id == 87).ok_or("robot 87 unresolved")?;
        check(outcome.tick == 60 && outcome.truth == 92, "wrong tick or truth")?;
        match expect_reason {
            Some(r) => {
                check(outcome.reason == r, format!("A={a} B={b}: {:?}", outcome.reason))?;
                check(outcome.winner.as_deref() == expect_winner, format!("A={a} B={b}: winner {:?}", outcome.winner))?;
            }
            None => check(
                matches!(outcome.reason, Reason::NetworkDecision | Reason::CoinFlip) && outcome.network_totals.is_some(),
                format!("A={a} B={b}: {:?}", outcome.reason),
            )?,
        }
        if a == -1 && b == -1 {
            check(state.status(87) == Some(&RobotStatus::PoweredDown), "not powered down")?;
            check(state.scores().values().all(|&s| s == 0.0), "powered-down robot scored")?;
        }
        reasons.push(format!("{a}/{b}->{:?}", outcome.reason));
    }
    Ok(reasons.join(", "))
}

// ---------------------------------------------------------------- generator

fn pearson(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().map(|&v| v as f64).sum::<f64>() / n;
    let mb = b.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x as f64 - ma, y as f64 - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

fn generator_invariants(seed: u64, d: &MatchData) -> Result<bool, String> {
    let ctx = |m: &str| format!("seed {seed}: {m}");
    let prod: Vec<f64> = d.robots.iter().map(|r| r.productivity).collect();
    check(prod.iter().all(|p| (-100.0..=100.0).contains(p)), ctx("productivity out of range"))?;
    check(prod.iter().sum::<f64>() / prod.len() as f64 > 0.0, ctx("mean productivity not positive"))?;
    check(prod.iter().any(|&p| p < 0.0), ctx("no negative robot"))?;

    // Tree: walk from the root; every robot reached exactly once as a leaf.
    let mut leaves = BTreeSet::new();
    let mut visited = 0;
    let mut stack = vec![d.tree.root()];
    check(d.tree.parent(d.tree.root()).is_none(), ctx("root has a parent"))?;
    while let Some(node) = stack.pop() {
        visited += 1;
        check(visited < 1000, ctx("tree has a cycle"))?;
        let kids = d.tree.children(node);
        if d.tree.is_robot(node) {
            check(kids.is_empty(), ctx("robot with children"))?;
            check(leaves.insert(node), ctx("robot reached twice"))?;
        } else {
            check((2..=5).contains(&kids.len()), ctx(&format!("node {node} has {} children", kids.len())))?;
            stack.extend_from_slice(kids);
        }
    }
    check(leaves == (0..100).collect(), ctx("leaves are not exactly the robots"))?;

    let edges: Vec<[u32; 2]> = d.network.edges().collect();
    check(edges.len() == 196, ctx(&format!("{} edges", edges.len())))?;
    let unique: HashSet<(u32, u32)> = edges.iter().map(|&[a, b]| (a.min(b), a.max(b))).collect();
    check(unique.len() == 196 && edges.iter().all(|[a, b]| a != b), ctx("duplicate edge or self-loop"))?;
    let mut adj = vec![Vec::new(); 100];
    for [a, b] in edges {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    let mut seen = vec![false; 100];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    check(seen.iter().all(|&s| s), ctx("network disconnected"))?;

    check(
        d.series.values.len() == 100 && d.series.values.iter().all(|r| r.len() == 100 && r.iter().all(|&v| v <= 100)),
        ctx("series shape or range"),
    )?;

    let (mut sib, mut ns, mut other, mut no) = (0.0, 0, 0.0, 0);
    for a in 0..100u32 {
        for b in a + 1..100 {
            let r = pearson(&d.series.values[a as usize], &d.series.values[b as usize]);
            if d.tree.parent(a) == d.tree.parent(b) {
                sib += r;
                ns += 1;
            } else {
                other += r;
                no += 1;
            }
        }
    }
    Ok(sib / ns as f64 > other / no as f64)
}

fn generator_suite() -> Outcome {
    let start = Instant::now();
    let mut sibling_wins = 0;
    for seed in 0..100 {
        let d = data(seed);
        if generator_invariants(seed, &d)? {
            sibling_wins += 1;
        }
    }
    let took = start.elapsed();
    check(sibling_wins >= 95, format!("sibling correlation higher in only {sibling_wins}/100 seeds"))?;
    check(took < Duration::from_secs(30), format!("took {took:?}"))?;
    Ok(format!("100 seeds; siblings more correlated in {sibling_wins}/100; {took:.2?}"))
}

// ------------------------------------------------------------- determinism

fn dir_hash(dir: &Path) -> String {
    let mut names: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let mut all = Vec::new();
    for name in names {
        all.extend_from_slice(name.to_string_lossy().as_bytes());
        all.push(0);
        all.extend(std::fs::read(dir.join(&name)).unwrap());
        all.push(0);
    }
    roboviz_core::canonical::sha256_hex(&all)
}

fn run_cli(args: &[&str]) -> Result<(i32, String), String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn field<'a>(out: &'a str, prefix: &str) -> Option<&'a str> {
    out.lines().find_map(|l| l.strip_prefix(prefix))
}

fn determinism_and_replay() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let p = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();

    for out in ["g1", "g2"] {
        let (code, _) = run_cli(&["gen", "--seed", "7", "--out", &p(out)])?;
        check(code == 0, format!("gen exited {code}"))?;
    }
    let (h1, h2) = (dir_hash(&tmp.path().join("g1")), dir_hash(&tmp.path().join("g2")));
    check(h1 == h2, "gen --seed 7 twice gave different directories")?;

    let mut log_hashes = Vec::new();
    for run in ["r1", "r2"] {
        let (code, out) = run_cli(&[
            "headless", "--match", &p("g1"), "--bot-a", "omniscient:3", "--bot-b", "omniscient:15", "--seed", "11", "--log", &p(run),
        ])?;
        check(code == 0, format!("headless exited {code}"))?;
        log_hashes.push(field(&out, "log_hash ").ok_or("no log_hash line")?.to_string());
    }
    check(log_hashes[0] == log_hashes[1], "same match and seed gave different log hashes")?;

    // In-process scripted trace: same commands, same hash.
    let d = Arc::new(data(7));
    let trace = || {
        let mut state = GameState::new(d.clone(), "x", "y", 5).unwrap();
        for tick in 0..100u32 {
            let _ = state.submit_bid("x", (tick * 13) % 100, (tick % 101) as i64);
            let _ = state.submit_bid("y", (tick * 29) % 100, 100 - (tick % 101) as i64);
            if tick % 17 == 0 {
                state.submit_interests("y", vec![tick % 100], vec!["Sonoreceptors".into()]).unwrap();
            }
            state.step().unwrap();
        }
        state.log().hash()
    };
    check(trace() == trace(), "scripted trace hash differs between runs")?;

    let mut replayed = Vec::new();
    for run in ["r1", "r2"] {
        let (code, out) = run_cli(&["replay", "--log", &p(run), "--match", &p("g2")])?;
        check(code == 0, format!("replay exited {code}"))?;
        check(field(&out, "log_hash ") == Some(log_hashes[0].as_str()), "replay hash differs")?;
        replayed.push(out.lines().filter(|l| l.starts_with("score")).map(str::to_string).collect::<Vec<_>>());
        let (code, _) = run_cli(&["replay", "--log", &p(run)])?;
        check(code == 0, "replay from regenerated match failed")?;
    }
    check(replayed[0] == replayed[1] && replayed[0].len() == 2, "replayed scores differ")?;
    let recorded = MatchLog::from_ndjson(&std::fs::read_to_string(p("r1")).unwrap()).unwrap();
    let summary = replay::verify(d.clone(), &recorded).map_err(|e| e.to_string())?;
    check(Some(&summary.scores) == recorded.final_scores(), "re-simulated scores differ from the recording")?;

    // A tampered log is refused.
    let text = std::fs::read_to_string(p("r1")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let i = lines.iter().position(|l| l.contains("bid_submitted")).ok_or("no bid in log")?;
    let mut bid: Value = serde_json::from_str(&lines[i]).unwrap();
    bid["guess"] = json!((bid["guess"].as_i64().unwrap() + 1) % 101);
    lines[i] = bid.to_string();
    std::fs::write(p("bad"), lines.join("\n") + "\n").unwrap();
    let out = bin().args(["replay", "--log", &p("bad")]).output().map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    check(code == 2, format!("tampered replay exited {code}"))?;
    check(String::from_utf8_lossy(&out.stderr).contains("hash"), "tampered replay did not report a hash mismatch")?;
    Ok(format!("match dir {}…, log {}…, replay reproduced twice", &h1[..12], &log_hashes[0][..12]))
}

// ------------------------------------------------------------------ hacker

fn hacker_bias(conservation: &mut Conservation) -> Outcome {
    let mut shares = Vec::new();
    for seed in 0..100u64 {
        let d = Arc::new(data(1000 + seed));
        let target = (seed * 37 % 100) as u32;
        let mut state = GameState::new(d.clone(), "a", "b", seed).unwrap();
        state.submit_interests("a", vec![target], vec![]).unwrap();
        let (mut hits, mut total) = (0usize, 0usize);
        while !state.is_finished() {
            let open = state.series_pool_remaining("a", target).unwrap() >= 5;
            let events = state.step().unwrap();
            if open {
                let drop = events.drops.iter().find(|d| d.team == "a").unwrap();
                total += drop.series_items.len();
                hits += drop.series_items.iter().filter(|i| i.robot_id == target).count();
            }
        }
        for team in ["a", "b"] {
            let mut seen = HashSet::new();
            let mut parts = HashSet::new();
            for drop in state.drops(team).unwrap() {
                for item in &drop.series_items {
                    check(item.t != d.robots[item.robot_id as usize].expiration_tick, format!("seed {seed}: truth delivered"))?;
                    check(seen.insert((item.robot_id, item.t)), format!("seed {seed}: duplicate series item"))?;
                }
                for item in &drop.part_items {
                    check(parts.insert((item.robot_id, item.part.clone())), format!("seed {seed}: duplicate part item"))?;
                }
            }
        }
        conservation.record(&d, &state);
        shares.push(hits as f64 / total as f64);
    }
    let mean = shares.iter().sum::<f64>() / shares.len() as f64;
    check((mean - 0.8).abs() <= 0.1, format!("interested share {mean:.4}"))?;
    Ok(format!("interested share {mean:.4} over 100 matches; no duplicates; truth never delivered"))
}

// -------------------------------------------------------------------- bots

fn bot_dominance(conservation: &mut Conservation) -> Outcome {
    let (mut claims_won, mut score_won) = (0, 0);
    let mut slowest = Duration::ZERO;
    for seed in 0..100u64 {
        let d = Arc::new(data(2000 + seed));
        let start = Instant::now();
        let mut sharp = Bot::omniscient(d.clone(), 0, seed);
        let mut sloppy = Bot::omniscient(d.clone(), 20, seed ^ 0xFFFF);
        let state = run_headless(d.clone(), [("sharp", &mut sharp), ("sloppy", &mut sloppy)], seed).unwrap();
        slowest = slowest.max(start.elapsed());
        let claimed = |t: &str| state.statuses().iter().filter(|s| s.claimed_by() == Some(t)).count();
        if claimed("sharp") > claimed("sloppy") {
            claims_won += 1;
        }
        if state.score("sharp").unwrap() >= state.score("sloppy").unwrap() {
            score_won += 1;
        }
        conservation.record(&d, &state);
    }
    check(claims_won >= 90, format!("E=0 claimed more robots in only {claims_won}/100"))?;
    check(score_won >= 90, format!("E=0 scored at least as much in only {score_won}/100"))?;
    check(slowest < Duration::from_secs(5), format!("slowest headless match {slowest:?}"))?;
    Ok(format!(
        "E=0 claims more in {claims_won}/100, scores ≥ in {score_won}/100; slowest match {slowest:.2?}"
    ))
}

// ----------------------------------------------------------- conservation

#[derive(Default)]
struct Conservation {
    matches: usize,
    failures: Vec<String>,
}

impl Conservation {
    fn record(&mut self, d: &MatchData, state: &GameState) {
        self.matches += 1;
        if let Err(why) = Self::check_match(d, state) {
            self.failures.push(format!("match {}: {why}", self.matches));
        }
    }

    fn check_match(d: &MatchData, state: &GameState) -> Result<(), String> {
        let mut claimed: BTreeMap<&str, usize> = BTreeMap::new();
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        let mut down = 0;
        for (id, status) in state.statuses().iter().enumerate() {
            match status {
                RobotStatus::Claimed { team } => {
                    *claimed.entry(team).or_default() += 1;
                    *scores.entry(team).or_default() += d.robots[id].productivity;
                }
                RobotStatus::PoweredDown => down += 1,
                RobotStatus::Pending => return Err(format!("robot {id} still pending at the end")),
            }
        }
        check(claimed.values().sum::<usize>() + down == 100, "robots do not add up to 100")?;
        for team in state.teams() {
            let expected = scores.get(team.as_str()).copied().unwrap_or(0.0);
            check(state.score(team).unwrap() == expected, format!("team {team} score differs from recomputation"))?;
        }
        let logged = state.log().final_scores().ok_or("no final scores logged")?;
        check(*logged == state.scores(), "logged final scores differ")
    }
}

fn main() {
    let mut conservation = Conservation::default();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("game constants", game_constants()),
        ("resolution oracle", resolution_oracle()),
        ("worked example", worked_example()),
        ("generator invariants", generator_suite()),
        ("determinism and replay", determinism_and_replay()),
        ("hacker bias", hacker_bias(&mut conservation)),
        ("bot dominance", bot_dominance(&mut conservation)),
    ];
    let n = conservation.matches;
    let verdict = match conservation.failures.first() {
        Some(first) => Err(format!("{} of {n} matches failed, first: {first}", conservation.failures.len())),
        None => check(n == 200, format!("only {n} matches checked"))
            .map(|_| format!("{n} simulated matches: claims + powered down = 100, scores exact")),
    };
    results.push(("conservation", verdict));
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
