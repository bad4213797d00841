//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use klanon::approx::{strong_greedy_kl, weak_expander, weak_expander_detailed};
use klanon::check::{residual, sharer_count, strong_residual};
use klanon::exact21::{
    anonymize_strong_21, anonymize_weak_21, assign_deficits_strong_with_order, assign_deficits_weak_with_order,
    StrongMode,
};
use klanon::greedy::{strong_any, strong_feasible, strong_greedy, weak_any, weak_greedy};
use klanon::hardgen::{
    clique_with_edge, nonisomorphic_graphs, random_graph, random_normalized_instance, reduction_graph,
};
use klanon::io::format_graph;
use klanon::matching::max_matching;
use klanon::oracle::{oracle_strong, oracle_weak, OracleOptions};
use klanon::{AnonParams, Edge, Error, Graph, Vertex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Oracle minima seen along the way: (graph tag, k, weak, strong).
type Minima = Mutex<Vec<(String, usize, Option<usize>, Option<usize>)>>;

fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = thread::available_parallelism().map_or(4, |n| n.get());
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().unwrap()).collect()
}

fn log2_ceil(n: usize) -> usize {
    (n as f64).log2().ceil() as usize
}

fn corpus_21() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 1..=7 {
        for (i, g) in nonisomorphic_graphs(n).into_iter().enumerate() {
            out.push((format!("iso{n}.{i}"), g));
        }
    }
    for seed in 0..1000u64 {
        let n = 6 + (seed % 7) as usize;
        let p = [0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5][(seed / 5 % 7) as usize];
        out.push((format!("seed{seed}"), random_graph(n, p, seed)));
    }
    out
}

fn criteria_1_2(minima: &Minima) -> (Outcome, Outcome) {
    let corpus = corpus_21();
    let rows = par_map(&corpus, |(tag, g)| {
        let mut weak_bad = Vec::new();
        let mut strong_bad = Vec::new();
        let w = oracle_weak(g, 2, 1, OracleOptions::default()).unwrap().value();
        match (anonymize_weak_21(g, 1), w) {
            (Ok(p), Some(m)) if p.edge_count() == m && p.residual_after == 0 => {}
            (Err(_), None) => {}
            (got, m) => weak_bad.push(format!("{tag}: got {:?} min {m:?}", got.map(|p| p.edge_count()))),
        }
        let isolated = g.vertices().any(|v| g.degree(v) == 0);
        let mut s = None;
        let mut strong_checked = false;
        if !isolated && g.vertex_count() > 0 {
            strong_checked = true;
            s = oracle_strong(g, 2, 1, OracleOptions::default()).unwrap().value();
            for mode in [StrongMode::Exact, StrongMode::Linear] {
                let ok = match (anonymize_strong_21(g, mode, 1), s) {
                    (Ok(p), Some(m)) => {
                        p.residual_after == 0
                            && match mode {
                                StrongMode::Exact => p.edge_count() == m,
                                StrongMode::Linear => p.edge_count() <= m + 2,
                            }
                    }
                    (Err(_), None) => true,
                    _ => false,
                };
                if !ok {
                    strong_bad.push(format!("{tag} {mode}"));
                }
            }
        }
        minima.lock().unwrap().push((tag.clone(), 2, w, s));
        (weak_bad, strong_bad, strong_checked)
    });
    let weak_bad: Vec<String> = rows.iter().flat_map(|r| r.0.clone()).collect();
    let strong_bad: Vec<String> = rows.iter().flat_map(|r| r.1.clone()).collect();
    let strong_n = rows.iter().filter(|r| r.2).count();
    (
        outcome(
            weak_bad.is_empty(),
            format!(
                "{} graphs, {} mismatches {:?}",
                corpus.len(),
                weak_bad.len(),
                first(&weak_bad)
            ),
        ),
        outcome(
            strong_bad.is_empty(),
            format!(
                "{strong_n} isolated-free graphs, {} failures {:?}",
                strong_bad.len(),
                first(&strong_bad)
            ),
        ),
    )
}

fn first(v: &[String]) -> Vec<&String> {
    v.iter().take(3).collect()
}

/// Checks all four (k,1) algorithms against their bounds given oracle minima.
fn bound_failures(g: &Graph, k: usize, seed: u64, t_weak: Option<usize>, t_strong: Option<usize>) -> Vec<String> {
    let mut bad = Vec::new();
    let n = g.vertex_count();
    let lg = log2_ceil(n);
    let p = AnonParams::new(k, 1).unwrap();
    if let Some(t) = t_weak {
        match weak_any(g, k, seed) {
            Ok(plan) if plan.residual_after == 0 && plan.edge_count() <= 4 * k * t + k * k => {}
            other => bad.push(format!("weak_any k={k} t={t}: {:?}", other.map(|p| p.edge_count()))),
        }
        match weak_greedy(g, k, seed) {
            Ok(plan) if plan.residual_after == 0 && plan.edge_count() <= k * k + 6 * t * lg => {}
            other => bad.push(format!("weak_greedy k={k} t={t}: {:?}", other.map(|p| p.edge_count()))),
        }
    }
    if strong_feasible(g, p).is_ok() {
        let Some(t) = t_strong else {
            bad.push(format!("strong k={k}: feasible but oracle found none"));
            return bad;
        };
        match strong_any(g, k, seed) {
            Ok(plan) if plan.residual_after == 0 && plan.edge_count() <= 2 * k * t => {}
            other => bad.push(format!("strong_any k={k} t={t}: {:?}", other.map(|p| p.edge_count()))),
        }
        match strong_greedy(g, k) {
            Ok(plan) if plan.residual_after == 0 && plan.edge_count() <= 2 * t * lg => {}
            other => bad.push(format!(
                "strong_greedy k={k} t={t}: {:?}",
                other.map(|p| p.edge_count())
            )),
        }
    }
    bad
}

fn criterion_3() -> Outcome {
    let mut bad = Vec::new();
    for size in 4..=8usize {
        let g = clique_with_edge(size);
        let k = size - 1;
        let w = oracle_weak(&g, k, 1, OracleOptions::default()).unwrap().value();
        let s = oracle_strong(&g, k, 1, OracleOptions::default()).unwrap().value();
        if w != Some(2) || s != Some(2 * k) {
            bad.push(format!("size {size}: weak {w:?} strong {s:?}"));
        }
        for msg in bound_failures(&g, k, 0, w, s) {
            bad.push(format!("size {size}: {msg}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("sizes 4..=8, {} failures {:?}", bad.len(), first(&bad)),
    )
}

fn criterion_4(minima: &Minima) -> Outcome {
    let cases: Vec<(u64, usize)> = (0..200u64).flat_map(|s| (2..=4).map(move |k| (s, k))).collect();
    let rows = par_map(&cases, |&(seed, k)| {
        let n = 6 + (seed % 7) as usize;
        let p = [0.1, 0.2, 0.3, 0.4][(seed / 7 % 4) as usize];
        let g = random_graph(n, p, seed);
        let w = oracle_weak(&g, k, 1, OracleOptions::default()).unwrap().value();
        let s = oracle_strong(&g, k, 1, OracleOptions::default()).unwrap().value();
        minima.lock().unwrap().push((format!("bounds{seed}"), k, w, s));
        // Unrounded log bounds, recorded only.
        let mut slack = 0;
        let lg = (n as f64).log2();
        if let Some(t) = w.filter(|_| n > k) {
            if weak_greedy(&g, k, seed).unwrap().edge_count() as f64 > (k * k) as f64 + 6.0 * t as f64 * lg {
                slack += 1;
            }
        }
        if let (Some(t), true) = (s, strong_feasible(&g, AnonParams::new(k, 1).unwrap()).is_ok()) {
            if strong_greedy(&g, k).unwrap().edge_count() as f64 > 2.0 * t as f64 * lg {
                slack += 1;
            }
        }
        let w = w.filter(|_| n >= (k + 1).max(3));
        let bad: Vec<String> = bound_failures(&g, k, seed, w, s)
            .into_iter()
            .map(|m| format!("seed {seed}: {m}"))
            .collect();
        (bad, slack)
    });
    let bad: Vec<String> = rows.iter().flat_map(|r| r.0.clone()).collect();
    let slack: usize = rows.iter().map(|r| r.1).sum();
    outcome(
        bad.is_empty(),
        format!(
            "{} instances, {} violations {:?}, {slack} exceed the unrounded log bound",
            cases.len(),
            bad.len(),
            first(&bad)
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut bad = Vec::new();
    let mut summary = Vec::new();
    for (n, ell, k) in [(500usize, 2usize, 8usize), (300, 3, 9)] {
        for sparse in [false, true] {
            let seeds: Vec<u64> = (0..20).collect();
            let rows = par_map(&seeds, |&seed| {
                let g = if sparse {
                    random_graph(n, 2.0 / n as f64, seed)
                } else {
                    Graph::new(n)
                };
                let o = weak_expander_detailed(&g, k, ell, seed, None).unwrap();
                let anonymous = o.plan.residual_after == 0;
                let max_deg = o.plan.added_degrees().into_iter().max().unwrap_or(0) as f64;
                let bound = 4.0 * ((k.saturating_sub(o.k_prime) * ell) as f64).sqrt();
                (anonymous, o.repair_edges == 0, max_deg <= bound)
            });
            let tag = format!("n={n} l={ell} k={k} {}", if sparse { "sparse" } else { "empty" });
            let free = rows.iter().filter(|r| r.1).count();
            if rows.iter().any(|r| !r.0) {
                bad.push(format!("{tag}: non-anonymous output"));
            }
            if free * 5 < rows.len() * 4 {
                bad.push(format!("{tag}: repair-free {free}/20"));
            }
            if rows.iter().any(|r| !r.2) {
                bad.push(format!("{tag}: degree bound exceeded"));
            }
            summary.push(format!("{tag} repair-free {free}/20"));
        }
    }
    outcome(bad.is_empty(), format!("{}; failures {:?}", summary.join(", "), bad))
}

fn criterion_6() -> Outcome {
    let mut bad = Vec::new();
    let (mut sat, mut unsat) = (None, None);
    for seed in 0..200 {
        let inst = random_normalized_instance(2, seed).unwrap();
        let slot = if inst.is_satisfiable() { &mut sat } else { &mut unsat };
        slot.get_or_insert(inst);
        if sat.is_some() && unsat.is_some() {
            break;
        }
    }
    for inst in [&sat, &unsat].into_iter().flatten() {
        for k in [6, 7, 8] {
            let red = reduction_graph(inst, k).unwrap();
            let g = &red.graph;
            for v in g.vertices() {
                let c = sharer_count(g, v, 1);
                let ok = if red.u_vertices.contains(&v) { c == k } else { c > k };
                if !ok {
                    bad.push(format!("k={k} vertex {v} has {c} sharers"));
                    break;
                }
            }
        }
    }
    let mut minima = Vec::new();
    for (inst, satisfiable) in [(&sat, true), (&unsat, false)] {
        let Some(inst) = inst else {
            bad.push(format!(
                "no {} instance found",
                if satisfiable { "satisfiable" } else { "unsatisfiable" }
            ));
            continue;
        };
        let red = reduction_graph(inst, 6).unwrap();
        let m = red.m;
        let r = oracle_weak(&red.graph, 7, 1, OracleOptions::with_budget(m));
        let ok = match (&r, satisfiable) {
            (Ok(res), true) => res.value() == Some(m),
            (Err(Error::BudgetExceeded { .. }), false) => true,
            _ => false,
        };
        minima.push(match &r {
            Ok(res) => format!("{:?}", res.value()),
            Err(_) => format!("> {m}"),
        });
        if !ok {
            bad.push(format!("satisfiable={satisfiable}: oracle {:?}", r.map(|x| x.value())));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "m=2, oracle minimum sat {} unsat {}; failures {:?}",
            minima[0], minima[1], bad
        ),
    )
}

fn naive_counts(g: &Graph, h: &Graph, ell: usize) -> Vec<usize> {
    let n = g.vertex_count();
    (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| u != v)
                .filter(|&u| (0..n).filter(|&w| g.has_edge(v, w) && h.has_edge(u, w)).count() >= ell)
                .count()
        })
        .collect()
}

fn exhaustive_matching(edges: &[Edge], used: &mut Vec<bool>) -> usize {
    let Some((i, &(a, b))) = edges.iter().enumerate().find(|(_, &(a, b))| !used[a] && !used[b]) else {
        return 0;
    };
    let without = exhaustive_matching(&edges[i + 1..], used);
    used[a] = true;
    used[b] = true;
    let with = 1 + exhaustive_matching(&edges[i + 1..], used);
    used[a] = false;
    used[b] = false;
    with.max(without)
}

fn criterion_7(minima: &Minima) -> Outcome {
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let seeds: Vec<u64> = (0..200).collect();
    let checker_bad: usize = par_map(&seeds, |&seed| {
        let n = 1 + (seed % 50) as usize;
        let g = random_graph(n, [0.05, 0.1, 0.2, 0.4][(seed % 4) as usize], seed);
        let mut h = g.clone();
        let extra = random_graph(n, 0.1, seed + 1000);
        for (u, v) in extra.edges() {
            if !h.has_edge(u, v) {
                h.add_edge(u, v).unwrap();
            }
        }
        let mut mismatches = 0;
        for ell in 1..=3 {
            for k in 1..=4 {
                let p = AnonParams::new(k, ell).unwrap();
                if residual(&g, p).sharer_count != naive_counts(&g, &g, ell) {
                    mismatches += 1;
                }
                if strong_residual(&g, &h, p).unwrap().sharer_count != naive_counts(&g, &h, ell) {
                    mismatches += 1;
                }
            }
        }
        mismatches
    })
    .into_iter()
    .sum();
    if checker_bad > 0 {
        bad.push(format!("checker disagreed with naive count {checker_bad} times"));
    }

    let mut order_bad = 0;
    for seed in 0..60u64 {
        let n = 4 + (seed % 9) as usize;
        let g = random_graph(n, 0.25, seed);
        let mut order: Vec<Vertex> = g.vertices().collect();
        let weak_total = assign_deficits_weak_with_order(&g, &order).total;
        let strong_total = assign_deficits_strong_with_order(&g, &order).ok().map(|d| d.total);
        for _ in 0..50 {
            order.shuffle(&mut rng);
            if assign_deficits_weak_with_order(&g, &order).total != weak_total
                || assign_deficits_strong_with_order(&g, &order).ok().map(|d| d.total) != strong_total
            {
                order_bad += 1;
            }
        }
    }
    if order_bad > 0 {
        bad.push(format!("deficit total changed under {order_bad} scan orders"));
    }

    let minima = minima.lock().unwrap();
    let mut prop_checked = 0;
    for (tag, k, w, s) in minima.iter() {
        if let (Some(w), Some(s)) = (w, s) {
            prop_checked += 1;
            if s < w {
                bad.push(format!("{tag} k={k}: strong {s} < weak {w}"));
            }
        }
    }

    let mut matching_bad = 0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=10);
        let vertices: Vec<Vertex> = (0..n).collect();
        let prob: f64 = rng.gen_range(0.1..0.8);
        let allowed: Vec<Edge> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(prob))
            .collect();
        if max_matching(&vertices, &allowed).len() != exhaustive_matching(&allowed, &mut vec![false; n]) {
            matching_bad += 1;
        }
    }
    if matching_bad > 0 {
        bad.push(format!("max_matching wrong on {matching_bad} structures"));
    }

    outcome(
        bad.is_empty(),
        format!(
            "200 checker graphs, 60x50 scan orders, {prop_checked} strong>=weak pairs, 500 matchings; failures {:?}",
            first(&bad)
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut bad = Vec::new();
    let g = random_graph(24, 0.15, 3);
    let mut connected = g.clone();
    for v in connected.vertices() {
        if connected.degree(v) == 0 {
            connected.add_edge(v, (v + 1) % 24).unwrap();
        }
    }
    type Run<'a> = Box<dyn Fn() -> String + 'a>;
    let runs: Vec<(&str, Run)> = vec![
        ("weak21", Box::new(|| format!("{:?}", anonymize_weak_21(&g, 4)))),
        (
            "strong21 exact",
            Box::new(|| format!("{:?}", anonymize_strong_21(&connected, StrongMode::Exact, 4))),
        ),
        (
            "strong21 linear",
            Box::new(|| format!("{:?}", anonymize_strong_21(&connected, StrongMode::Linear, 4))),
        ),
        ("weak_any", Box::new(|| format!("{:?}", weak_any(&g, 3, 4)))),
        ("strong_any", Box::new(|| format!("{:?}", strong_any(&connected, 3, 4)))),
        ("weak_greedy", Box::new(|| format!("{:?}", weak_greedy(&g, 3, 4)))),
        (
            "strong_greedy",
            Box::new(|| format!("{:?}", strong_greedy(&connected, 3))),
        ),
        (
            "weak_expander",
            Box::new(|| format!("{:?}", weak_expander(&g, 4, 2, 4))),
        ),
        (
            "strong_greedy_kl",
            Box::new(|| format!("{:?}", strong_greedy_kl(&connected, 2, 2))),
        ),
        (
            "oracle",
            Box::new(|| {
                format!(
                    "{:?}",
                    oracle_weak(&random_graph(9, 0.3, 1), 3, 1, OracleOptions::default())
                )
            }),
        ),
    ];
    for (name, run) in &runs {
        if run() != run() {
            bad.push(name.to_string());
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("g.txt");
    fs::write(&input, format_graph(&connected)).unwrap();
    let cli = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_klanon")).args(args).output().unwrap();
        // The report's wall-clock line is the one expected difference.
        let report: Vec<String> = String::from_utf8_lossy(&out.stderr)
            .lines()
            .filter(|l| !l.starts_with("wall"))
            .map(str::to_owned)
            .collect();
        (out.status.code(), out.stdout, report)
    };
    let path = input.to_str().unwrap();
    let cli_cases: Vec<Vec<&str>> = vec![
        vec!["anonymize", path, "--k", "2", "--seed", "3"],
        vec![
            "anonymize",
            path,
            "--k",
            "2",
            "--mode",
            "strong",
            "--linear",
            "--seed",
            "3",
        ],
        vec!["anonymize", path, "--k", "3", "--algo", "any", "--seed", "3"],
        vec!["anonymize", path, "--k", "3", "--algo", "greedy", "--mode", "strong"],
        vec!["anonymize", path, "--k", "4", "--l", "2", "--seed", "3"],
        vec!["check", path, "--k", "3", "--machine"],
        vec!["gen", "random", "--n", "20", "--p", "0.2", "--seed", "3"],
    ];
    for args in &cli_cases {
        if cli(args) != cli(args) {
            bad.push(args.join(" "));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} library runs, {} CLI runs; differing {:?}",
            runs.len(),
            cli_cases.len(),
            bad
        ),
    )
}

fn main() {
    let start = Instant::now();
    let minima: Minima = Mutex::new(Vec::new());
    let (c1, c2) = criteria_1_2(&minima);
    let c3 = criterion_3();
    let c4 = criterion_4(&minima);
    let c5 = criterion_5();
    let c6 = criterion_6();
    let c7 = criterion_7(&minima);
    let c8 = criterion_8();
    let names = [
        "weak (2,1) optimality",
        "strong (2,1) exact and linear",
        "clique plus edge family",
        "approximation bounds",
        "expander construction",
        "hardness instance profile",
        "invariant suites",
        "determinism",
    ];
    let all = [c1, c2, c3, c4, c5, c6, c7, c8];
    for (i, (name, c)) in names.iter().zip(&all).enumerate() {
        println!(
            "criterion {} {name}: {} ({})",
            i + 1,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    println!("acceptance finished in {:.1?}", start.elapsed());
    if all.iter().any(|c| !c.pass) {
        std::process::exit(1);
    }
}
