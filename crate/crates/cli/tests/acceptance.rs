//! End-to-end acceptance checks. Runs without the libtest harness so that
//! each criterion prints exactly one PASS/FAIL line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use netid::circular::{
    circular_identifiable, detect_circle, recover_circle_modules, CircularCase, CircularWitness,
};
use netid::combinatorics::{max_matching, max_vertex_disjoint_paths};
use netid::conditions::{
    check_corollary3, check_naive_count, check_theorem1, AnalysisOptions, ConditionId, Status,
    Verdict,
};
use netid::numeric::{generic_rank, instantiate};
use netid::sample::{random_model, random_recoverable_ring};
use netid::structure::{bipartite_graph, function_set, structural_pattern, BipartiteGraph};
use netid::{analyze, NetworkModel, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn load(name: &str) -> NetworkModel {
    NetworkModel::parse(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    if elapsed <= Duration::from_secs(limit_secs) {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit_secs} s"))
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn status(report: &netid::AnalysisReport, id: ConditionId) -> Status {
    report
        .conditions
        .iter()
        .find(|c| c.id == id)
        .expect("condition present")
        .status
}

fn diamond_counts() -> Result<String, String> {
    let start = Instant::now();
    let m = load("fig1.json");
    let report = analyze(&m, &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    let xi = function_set(&m).len();
    ensure!(
        xi == 3 && m.edge_count() == 4,
        "xi = {xi}, |E| = {}",
        m.edge_count()
    );
    ensure!(
        report.verdict == Verdict::NotIdentifiable,
        "verdict {:?}",
        report.verdict
    );
    ensure!(
        status(&report, ConditionId::NaiveCount) == Status::Violated,
        "naive count not violated"
    );
    ensure!(
        status(&report, ConditionId::Cover) == Status::Satisfied,
        "cover"
    );
    ensure!(
        status(&report, ConditionId::NeighbourRank) == Status::SatisfiedGenerically,
        "neighbour rank"
    );
    within(start.elapsed(), 1)?;
    Ok(format!(
        "xi = 3 < 4, not identifiable ({:.0?})",
        start.elapsed()
    ))
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

fn ladder_elimination() -> Result<String, String> {
    let start = Instant::now();
    let m = load("fig2.json");
    let report = analyze(&m, &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    ensure!(
        function_set(&m).len() == 10 && m.edge_count() == 10,
        "xi != |E| = 10"
    );
    ensure!(
        report.algorithm1_log.len() == 1,
        "removals: {:?}",
        report.algorithm1_log
    );
    let step = &report.algorithm1_log[0];
    let rows = VertexSet::from([6, 7, 8]);
    let cols = VertexSet::from([1, 2, 3]);
    ensure!(
        rows.contains(step.row) && cols.contains(step.col),
        "removed T[{}][{}] outside the dependency family",
        step.row,
        step.col
    );
    ensure!(report.verdict == Verdict::NotIdentifiable, "verdict");
    ensure!(
        status(&report, ConditionId::ReducedFunctionCount) == Status::Violated,
        "reduced count not violated"
    );
    let mut worst_gap = f64::INFINITY;
    for seed in 0..5 {
        let inst = instantiate(&m, seed).map_err(|e| e.to_string())?;
        let block = inst.submatrix(&rows, &cols);
        let s = singular_values(&block);
        let gap = s[1] / s[2];
        // |det| / (s1 s2) is the size of the dropped direction
        let residual = block.determinant().abs() / (s[0] * s[1]);
        ensure!(
            residual < 1e-8 * s[0],
            "seed {seed}: det residual {residual:e}"
        );
        worst_gap = worst_gap.min(gap);
    }
    ensure!(worst_gap >= 1e4, "singular value gap {worst_gap:e}");
    within(start.elapsed(), 2)?;
    Ok(format!(
        "|F^| = 9 < 10 after removing T[{}][{}]; min gap {worst_gap:.1e}",
        step.row, step.col
    ))
}

fn six_ring_removals() -> Result<String, String> {
    let opts = AnalysisOptions::default();
    for name in ["fig3.json", "fig5.json"] {
        let m = load(name);
        let (r1, e1) = check_theorem1(&m, &opts).map_err(|e| e.to_string())?;
        let e1 = e1.ok_or("no elimination ran")?;
        let log: Vec<(usize, usize)> = e1.log.iter().map(|r| (r.row, r.col)).collect();
        ensure!(
            log == [(4, 1), (4, 2), (5, 1), (5, 2)],
            "{name}: log {log:?}"
        );
        ensure!(
            e1.reduced.len() == 5 && r1.status == Status::Violated,
            "{name}: |F^|"
        );
        let (r2, e2) = check_corollary3(&m, &opts).map_err(|e| e.to_string())?;
        let e2 = e2.ok_or("no edge removal ran")?;
        ensure!(e2.log.len() == 4, "{name}: {} edge removals", e2.log.len());
        ensure!(
            e2.remaining.len() == 5 && r2.status == Status::Violated,
            "{name}: |E_b^|"
        );
        let report = analyze(&m, &opts).map_err(|e| e.to_string())?;
        ensure!(
            report.verdict == Verdict::NotIdentifiable,
            "{name}: verdict"
        );
    }
    Ok("|F^| = 5 via T41 T42 T51 T52, |E_b^| = 5 via 4 removals".into())
}

fn four_vertex_structure() -> Result<String, String> {
    let m = load("fig4.json");
    let s = structural_pattern(&m).rows_as_strings();
    ensure!(s == ["*000", "**00", "****", "****"], "S = {s:?}");
    let b = bipartite_graph(&m);
    ensure!(b.edge_count() == 8, "|E_b| = {}", b.edge_count());
    let full = max_matching(&b, m.measured(), m.excited()).len();
    ensure!(full == 3, "full matching {full}");
    let (rb, cb) = (VertexSet::from([1, 2]), VertexSet::from([3, 4]));
    let matching = max_matching(&b, &cb, &rb).len();
    let paths = max_vertex_disjoint_paths(&m, &rb, &cb);
    ensure!(
        matching == 2 && paths == 1,
        "matching {matching}, paths {paths}"
    );
    Ok("S matches, matching 3, b = 1 < |M| = 2".into())
}

fn ring(len: usize, excited: &[usize], measured: &[usize]) -> NetworkModel {
    NetworkModel::new(
        len,
        (1..=len).map(|v| (v, v % len + 1)),
        excited.iter().copied(),
        measured.iter().copied(),
    )
    .unwrap()
}

/// Two vertex-disjoint excited-to-measured paths on the ring `1 -> 2 -> ...`,
/// found by trying every pair of arcs.
fn ring_has_two_disjoint_paths(len: usize, excited: &[usize], measured: &[usize]) -> bool {
    let arc = |a: usize, m: usize| -> Vec<usize> {
        let mut v = vec![a];
        let mut cur = a;
        while cur != m {
            cur = cur % len + 1;
            v.push(cur);
        }
        v
    };
    let arcs: Vec<Vec<usize>> = excited
        .iter()
        .flat_map(|&a| measured.iter().map(move |&m| (a, m)))
        .map(|(a, m)| arc(a, m))
        .collect();
    arcs.iter().enumerate().any(|(i, p)| {
        arcs[i + 1..]
            .iter()
            .any(|q| p.iter().all(|v| !q.contains(v)))
    })
}

fn cycle_characterisation() -> Result<String, String> {
    let start = Instant::now();
    let d6 = detect_circle(&load("fig6.json")).map_err(|e| e.to_string())?;
    let v6 = circular_identifiable(&d6);
    ensure!(
        v6.identifiable && v6.condition == CircularCase::TwoDisjointPaths,
        "fig6: {v6:?}"
    );
    ensure!(
        v6.witness
            == CircularWitness::DisjointPaths {
                paths: [vec![1, 2], vec![4, 5]]
            },
        "fig6 witness {:?}",
        v6.witness
    );
    let v3 = circular_identifiable(&detect_circle(&load("fig3.json")).map_err(|e| e.to_string())?);
    ensure!(
        !v3.identifiable && v3.condition == CircularCase::CaseFailed,
        "fig3: {v3:?}"
    );

    let mut checked = 0;
    for len in 2..=6usize {
        // each vertex is excited only, measured only, or both
        for code in 0..3usize.pow(len as u32) {
            let (mut excited, mut measured) = (Vec::new(), Vec::new());
            let mut c = code;
            for v in 1..=len {
                match c % 3 {
                    0 => excited.push(v),
                    1 => measured.push(v),
                    _ => {
                        excited.push(v);
                        measured.push(v);
                    }
                }
                c /= 3;
            }
            let single_r = excited.len() == 1 && measured.contains(&excited[0]);
            let single_c = measured.len() == 1 && excited.contains(&measured[0]);
            let expected =
                single_r || single_c || ring_has_two_disjoint_paths(len, &excited, &measured);
            let d = detect_circle(&ring(len, &excited, &measured)).map_err(|e| e.to_string())?;
            let got = circular_identifiable(&d).identifiable;
            ensure!(
                got == expected,
                "L = {len}, R = {excited:?}, C = {measured:?}: got {got}"
            );
            if got && len <= 3 {
                ensure!(
                    excited.len() + measured.len() > len,
                    "L = {len}: identifiable with |R| + |C| = L"
                );
            }
            checked += 1;
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!(
        "fig6 identifiable, fig3 not; {checked} ring allocations agree"
    ))
}

/// Numeric rank of `T[rows][cols]` from an independent instantiation with
/// `||G||_inf <= 1/2`, best of `trials`.
fn oracle_rank(
    m: &NetworkModel,
    rows: &VertexSet,
    cols: &VertexSet,
    rng: &mut ChaCha8Rng,
    trials: usize,
) -> usize {
    let n = m.vertex_count();
    let mut best = 0;
    for _ in 0..trials {
        let mut g = DMatrix::<f64>::zeros(n, n);
        for &(from, to) in m.edges() {
            g[(to - 1, from - 1)] = rng.random_range(0.25..=1.75);
        }
        let row_sum = (0..n).map(|r| g.row(r).abs().sum()).fold(0.0, f64::max);
        if row_sum > 0.5 {
            g *= 0.5 / row_sum;
        }
        let t = (DMatrix::<f64>::identity(n, n) - g).try_inverse().unwrap();
        let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            t[(rows.as_slice()[i] - 1, cols.as_slice()[j] - 1)]
        });
        if sub.is_empty() {
            continue;
        }
        let s = singular_values(&sub);
        best = best.max(s.iter().filter(|&&x| x > 1e-8 * s[0]).count());
    }
    best
}

fn random_subset(rng: &mut ChaCha8Rng, set: &VertexSet) -> VertexSet {
    set.iter().filter(|_| rng.random_bool(0.5)).collect()
}

fn generic_rank_identity() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pairs = 0;
    for k in 0..200u64 {
        let m = random_model(&mut rng, 1..=8, 0.15..=0.5);
        let all = m.vertices();
        let mut checks = vec![(m.measured().clone(), m.excited().clone())];
        for _ in 0..20 {
            checks.push((random_subset(&mut rng, &all), random_subset(&mut rng, &all)));
        }
        for (rows, cols) in checks {
            let paths = max_vertex_disjoint_paths(&m, &cols, &rows);
            let lib =
                generic_rank(&m, &rows, &cols, 5, k).map_err(|e| format!("model {k}: {e}"))?;
            let independent = oracle_rank(&m, &rows, &cols, &mut rng, 5);
            ensure!(
                lib.rank == paths && independent == paths,
                "model {k} rows {rows} cols {cols}: library {} oracle {independent} paths {paths}",
                lib.rank
            );
            pairs += 1;
        }
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "{pairs} subset pairs, 0 mismatches ({:.1?})",
        start.elapsed()
    ))
}

/// Structural rank by exhaustive search over partial row-to-column
/// assignments.
fn brute_structural_rank(mask: &[Vec<bool>], rows: &[usize], cols: &[usize]) -> usize {
    fn go(mask: &[Vec<bool>], rows: &[usize], cols: &[usize], used: &mut Vec<bool>) -> usize {
        let Some((&r, rest)) = rows.split_first() else {
            return 0;
        };
        let mut best = go(mask, rest, cols, used);
        for (k, &c) in cols.iter().enumerate() {
            if !used[k] && mask[r][c] {
                used[k] = true;
                best = best.max(1 + go(mask, rest, cols, used));
                used[k] = false;
            }
        }
        best
    }
    go(mask, rows, cols, &mut vec![false; cols.len()])
}

fn structural_rank_identity() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut submatrices = 0;
    for p in 0..100 {
        let (nr, nc) = (rng.random_range(1..=6usize), rng.random_range(1..=6usize));
        let density = rng.random_range(0.1..=0.9);
        let mask: Vec<Vec<bool>> = (0..nr)
            .map(|_| (0..nc).map(|_| rng.random_bool(density)).collect())
            .collect();
        // rows are measured vertices 1..=nr, columns excited vertices 1..=nc
        let edges = (0..nr)
            .flat_map(|r| (0..nc).map(move |c| (r, c)))
            .filter(|&(r, c)| mask[r][c])
            .map(|(r, c)| (c + 1, r + 1))
            .collect();
        let b = BipartiteGraph::from_parts((1..=nc).collect(), (1..=nr).collect(), edges);
        for row_bits in 1..(1u32 << nr) {
            for col_bits in 1..(1u32 << nc) {
                let rows: Vec<usize> = (0..nr).filter(|i| row_bits >> i & 1 == 1).collect();
                let cols: Vec<usize> = (0..nc).filter(|j| col_bits >> j & 1 == 1).collect();
                let expected = brute_structural_rank(&mask, &rows, &cols);
                let got = max_matching(
                    &b,
                    &rows.iter().map(|r| r + 1).collect(),
                    &cols.iter().map(|c| c + 1).collect(),
                )
                .len();
                ensure!(
                    got == expected,
                    "pattern {p} rows {rows:?} cols {cols:?}: {got} vs {expected}"
                );
                submatrices += 1;
            }
        }
    }
    Ok(format!(
        "{submatrices} submatrices over 100 patterns, 0 mismatches"
    ))
}

fn circular_recovery() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut worst_phi) = (0.0f64, 0.0f64);
    for k in 0..100u64 {
        let d = random_recoverable_ring(&mut rng, 3..=12);
        let model = d.to_model();
        let inst = instantiate(&model, 1000 + k).map_err(|e| e.to_string())?;
        let t_cr = inst.submatrix(d.measured(), d.excited());
        let rec = recover_circle_modules(&d, &t_cr).map_err(|e| format!("ring {k}: {e}"))?;
        let phi: f64 = model
            .edges()
            .iter()
            .map(|&(a, b)| inst.g[(b - 1, a - 1)])
            .product();
        worst_phi = worst_phi.max(((rec.phi - phi) / phi).abs());
        ensure!(
            rec.modules.len() == model.edge_count(),
            "ring {k}: module count"
        );
        for r in &rec.modules {
            let truth = inst.g[(r.to - 1, r.from - 1)];
            worst = worst.max(((r.value - truth) / truth).abs());
        }
    }
    ensure!(worst <= 1e-6, "max module error {worst:e}");
    ensure!(worst_phi <= 1e-9, "max loop gain error {worst_phi:e}");
    within(start.elapsed(), 30)?;
    Ok(format!(
        "max module error {worst:.1e}, loop gain error {worst_phi:.1e}"
    ))
}

fn naive_implies_reduced() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let opts = AnalysisOptions::default();
    let mut naive_violations = 0;
    for k in 0..300 {
        let m = random_model(&mut rng, 2..=7, 0.15..=0.5);
        let opts = AnalysisOptions { seed: k, ..opts };
        if check_naive_count(&m).status == Status::Violated {
            naive_violations += 1;
            let (r, _) = check_theorem1(&m, &opts).map_err(|e| e.to_string())?;
            ensure!(r.status == Status::Violated, "model {k}: {}", m.to_json());
        }
    }
    Ok(format!(
        "{naive_violations} naive violations, 0 counterexamples"
    ))
}

fn determinism() -> Result<String, String> {
    let run = |name: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_netid"))
            .args(["analyze", "--json", "--seed", "42"])
            .arg(fixture(name))
            .output()
            .expect("binary runs");
        out.stdout
    };
    for i in 1..=6 {
        let name = format!("fig{i}.json");
        let (a, b) = (run(&name), run(&name));
        ensure!(!a.is_empty(), "{name}: empty output");
        ensure!(a == b, "{name}: outputs differ");
    }
    Ok("6 fixtures byte-identical across runs".into())
}

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("diamond counts", diamond_counts),
        ("ladder elimination", ladder_elimination),
        ("six-ring removals", six_ring_removals),
        ("four-vertex structure", four_vertex_structure),
        ("cycle characterisation", cycle_characterisation),
        ("generic rank identity", generic_rank_identity),
        ("structural rank identity", structural_rank_identity),
        ("cycle recovery round trip", circular_recovery),
        ("naive count implication", naive_implies_reduced),
        ("report determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
