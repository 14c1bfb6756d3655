//! Acceptance suite: one line per criterion, then a single assertion.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::process::Command;

use bellkit::harness::{
    analyze_chsh, maximize_chsh, run_trials, tabulate, wigner_scan, ChshMapping, SettingsPolicy,
    SettingsSchedule, TrialSource,
};
use bellkit::inequalities::{
    bell_d1, chsh_d3, chsh_d4, chsh_s, enumerate_quartets, quartet_mixture_s, wigner_check,
    wigner_check_mixture, ChshAngles, CorrelationSource, LhvMethod,
};
use bellkit::lhv::builtin_models;
use bellkit::qstate::{make_state, CorrelationSign, StateKind};
use bellkit::rng;
use rand::Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn weights<const N: usize>(r: &mut impl Rng) -> [f64; N] {
    let w: [f64; N] = std::array::from_fn(|_| -r.random::<f64>().max(1e-300).ln());
    let t: f64 = w.iter().sum();
    w.map(|x| x / t)
}

fn bell_counterexample() -> Outcome {
    let src = CorrelationSource::QuantumClosedForm(StateKind::SpinAnticorrelated);
    let r = bell_d1(&src, 0.0, FRAC_PI_2, 3.0 * FRAC_PI_4, CorrelationSign::Anticorrelated).map_err(|e| e.to_string())?;
    check((r.lhs - SQRT_2).abs() < 1e-12 && r.violated, || format!("lhs = {}, violated = {}", r.lhs, r.violated))?;
    Ok(format!("D1 lhs = {:.12}, bound {}", r.lhs, r.bound))
}

fn table_fidelity() -> Outcome {
    const ROWS: [[i32; 16]; 4] = [
        [1, 1, 1, 1, 1, 1, 1, 1, -1, -1, -1, -1, -1, -1, -1, -1],
        [1, 1, 1, 1, -1, -1, -1, -1, 1, 1, 1, 1, -1, -1, -1, -1],
        [1, 1, -1, -1, 1, 1, -1, -1, 1, 1, -1, -1, 1, 1, -1, -1],
        [1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1],
    ];
    const S: [i32; 16] = [2, 2, 2, -2, -2, -2, 2, -2, -2, 2, -2, -2, -2, 2, 2, 2];
    let qs = enumerate_quartets();
    check(qs.len() == 16, || format!("{} quartets", qs.len()))?;
    for (col, q) in qs.iter().enumerate() {
        let o = q.outcomes();
        for row in 0..4 {
            check(o[row].value() == ROWS[row][col], || format!("column {} row {}", col + 1, row + 1))?;
        }
        check(q.s_value == S[col], || format!("column {} S = {}", col + 1, q.s_value))?;
    }
    Ok("64 outcomes and 16 S values match".into())
}

fn quartet_bound() -> Outcome {
    let mut r = rng::substream(1, 0);
    let mut worst: f64 = 0.0;
    let vertices = (0..16).map(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }));
    for w in vertices.chain((0..10_000).map(|_| weights::<16>(&mut r))) {
        let s = quartet_mixture_s(&w).map_err(|e| e.to_string())?;
        worst = worst.max(s.abs());
    }
    check(worst <= 2.0 + 1e-12, || format!("max |S| = {worst}"))?;
    Ok(format!("max |<S>| over 16 vertices and 10^4 mixtures = {worst:.6}"))
}

fn quantum_maximum() -> Outcome {
    let kind = StateKind::SpinAnticorrelated;
    let opt = maximize_chsh(kind, 15.0, 200).map_err(|e| e.to_string())?;
    let target = 2.0 * SQRT_2;
    check((opt.s_star - target).abs() < 1e-6, || format!("s_star = {}", opt.s_star))?;
    let schedule = SettingsSchedule::chsh(opt.angles, SettingsPolicy::UniformRandom).map_err(|e| e.to_string())?;
    let log = run_trials(&TrialSource::Quantum(make_state(kind)), &schedule, 1_000_000, 4).map_err(|e| e.to_string())?;
    let a = analyze_chsh(&tabulate(&log), ChshMapping::default()).map_err(|e| e.to_string())?;
    check((a.s_mean.abs() - target).abs() < 5.0 * a.s_std_error && a.violated_5sigma, || {
        format!("s_mean = {} ± {}", a.s_mean, a.s_std_error)
    })?;
    Ok(format!("s_star = {:.9}, simulated S = {:.4} ± {:.4}", opt.s_star, a.s_mean, a.s_std_error))
}

fn wigner_curve() -> Outcome {
    let steps = 19;
    let pts = wigner_scan(0.0, FRAC_PI_2, steps).map_err(|e| e.to_string())?;
    for p in &pts[1..steps - 1] {
        check(p.margin > 0.0, || format!("margin {} at {}°", p.margin, p.theta2.to_degrees()))?;
    }
    let best = pts.iter().max_by(|a, b| a.margin.total_cmp(&b.margin)).unwrap();
    let grid = 90.0 / (steps - 1) as f64;
    check((best.theta2.to_degrees() - 45.0).abs() <= grid, || format!("argmax {}°", best.theta2.to_degrees()))?;
    let src = CorrelationSource::QuantumBorn(make_state(StateKind::SpinAnticorrelated));
    let at45 = wigner_check(&src, CorrelationSign::Anticorrelated, 0.0, FRAC_PI_4, FRAC_PI_2).map_err(|e| e.to_string())?;
    check((at45.margin - 0.103553).abs() < 1e-6, || format!("margin at 45° = {}", at45.margin))?;
    Ok(format!("argmax {:.1}°, margin at 45° = {:.6}", best.theta2.to_degrees(), at45.margin))
}

fn sextet_soundness() -> Outcome {
    let mut r = rng::substream(6, 0);
    let mut worst = f64::NEG_INFINITY;
    let vertices = (0..8).map(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }));
    for w in vertices.chain((0..10_000).map(|_| weights::<8>(&mut r))) {
        for sign in [CorrelationSign::Anticorrelated, CorrelationSign::Correlated] {
            let m = wigner_check_mixture(&w, sign).map_err(|e| e.to_string())?.margin;
            worst = worst.max(m);
        }
    }
    check(worst <= 1e-12, || format!("max margin = {worst}"))?;
    Ok(format!("max margin over 8 vertices and 10^4 mixtures = {worst:.3e}"))
}

fn lhv_ceiling() -> Outcome {
    let canonical = ChshAngles::new(0.0, -FRAC_PI_2, 3.0 * FRAC_PI_4, -3.0 * FRAC_PI_4);
    let mut r = rng::substream(7, 0);
    let mut sweep: Vec<ChshAngles> = vec![canonical];
    sweep.extend((0..1000).map(|_| ChshAngles::from_array(std::array::from_fn(|_| r.random_range(-PI..PI)))));
    let mut worst_s: f64 = 0.0;
    for model in builtin_models() {
        let src = CorrelationSource::Lhv { model: model.clone(), method: LhvMethod::Quadrature { nodes: 2000 } };
        for a in &sweep {
            let s = chsh_s(&src, *a).map_err(|e| e.to_string())?;
            worst_s = worst_s.max(s.abs());
            check(s.abs() <= 2.0 + 1e-6, || format!("{}: |S| = {}", model.name(), s.abs()))?;
            let d3 = chsh_d3(&src, *a).map_err(|e| e.to_string())?;
            check(d3.margin <= 1e-6, || format!("{}: D3 margin {}", model.name(), d3.margin))?;
            let d4 = chsh_d4(&src, *a).map_err(|e| e.to_string())?;
            check(d4.margin <= 1e-6, || format!("{}: D4 margin {}", model.name(), d4.margin))?;
            let [d, _, g, gp] = a.to_array();
            let d1 = bell_d1(&src, d, g, gp, CorrelationSign::Anticorrelated).map_err(|e| e.to_string())?;
            check(d1.margin <= 1e-6, || format!("{}: D1 margin {}", model.name(), d1.margin))?;
        }
    }
    Ok(format!("max |S| = {worst_s:.9} over {} settings per model", sweep.len()))
}

fn strict_correlation() -> Outcome {
    let mut r = rng::substream(8, 0);
    for kind in StateKind::ALL {
        let theta = r.random_range(0.0..2.0 * PI);
        let schedule = SettingsSchedule::new(vec![(theta, theta)], SettingsPolicy::RoundRobin).map_err(|e| e.to_string())?;
        let log = run_trials(&TrialSource::Quantum(make_state(kind)), &schedule, 10_000, 8).map_err(|e| e.to_string())?;
        let want = kind.sign().factor();
        let bad = log.records.iter().filter(|t| t.outcome_d.value() * t.outcome_g.value() != want).count();
        check(bad == 0, || format!("{kind}: {bad} wrong-sign pairs"))?;
    }
    Ok("0 wrong-sign pairs in 4 x 10^4 equal-angle trials".into())
}

fn round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_bellkit");
    let sim = |threads: &str, file: &str| -> Result<(Value, Vec<u8>), String> {
        let path = dir.path().join(file);
        let o = Command::new(bin)
            .args(["chsh-sim", "--state", "spin-anticorrelated", "--trials", "200000", "--seed", "9", "--json"])
            .args(["--threads", threads, "--emit-trials"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        check(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        let v: Value = serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())?;
        Ok((v, std::fs::read(&path).map_err(|e| e.to_string())?))
    };
    let (v1, log1) = sim("1", "t1.csv")?;
    let (v4, log4) = sim("4", "t4.csv")?;
    check(log1 == log4, || "trial logs differ between 1 and 4 workers".into())?;
    let o = Command::new(bin)
        .arg("analyze")
        .arg(dir.path().join("t1.csv"))
        .arg("--json")
        .output()
        .map_err(|e| e.to_string())?;
    check(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
    let va: Value = serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())?;
    let bits = |v: &Value| v["s_mean"].as_f64().map(f64::to_bits);
    check(bits(&v1).is_some() && bits(&v1) == bits(&va) && bits(&v1) == bits(&v4), || {
        format!("s_mean {} / {} / {}", v1["s_mean"], v4["s_mean"], va["s_mean"])
    })?;
    Ok(format!("s_mean {} reproduced; {} byte trial log identical", v1["s_mean"], log1.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Bell counterexample", bell_counterexample),
        ("quartet table fidelity", table_fidelity),
        ("quartet-mixture bound", quartet_bound),
        ("quantum CHSH maximum", quantum_maximum),
        ("Wigner violation curve", wigner_curve),
        ("sextet soundness", sextet_soundness),
        ("LHV ceiling", lhv_ceiling),
        ("strict (anti)correlation", strict_correlation),
        ("round-trip determinism", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
