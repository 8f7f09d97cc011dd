//! Acceptance gate. One test per criterion; the harness result line is the
//! pass/fail verdict for that criterion. Criteria 1, 2, and 4 share a single
//! corpus sweep; 3 and 6 share the audited sweep.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use maxflow::counters::Counters;
use maxflow::dimacs::write_instance;
use maxflow::enhanced::{self, derive_params, EnhancedOptions};
use maxflow::gen::{layered_instance, random_instance, two_path_instance};
use maxflow::network::{Instance, Network};
use maxflow::oracle::{cut_capacity, min_cut, oracle_max_flow, verify_flow};
use maxflow::{generic, lmes};

struct Record {
    label: String,
    algo: &'static str,
    k: u64,
    n: u64,
    max_cap: i128,
    value: i128,
    want: i128,
    verified: Option<i128>,
    cut_cap: i128,
    counters: Counters,
}

struct CorpusRun {
    records: Vec<Record>,
    instances: usize,
    elapsed_secs: f64,
}

/// 500 random instances (n <= 40, m <= 160, U <= 1024) and 50 layered ones.
fn corpus_instances() -> Vec<(String, Instance)> {
    let mut out = Vec::new();
    for i in 0..500u64 {
        let n = 2 + (i as usize % 39);
        let m = (1 + (i as usize * 13) % (4 * n)).min(160);
        let u = 1 + (i as u128 * 37) % 1024;
        out.push((format!("random-{i}"), random_instance(n, m, u, i)));
    }
    for i in 0..50u64 {
        let width = 1 + (i as usize % 5);
        let depth = 1 + (i as usize % 7);
        let u = 1 + (i as u128 * 53) % 1024;
        out.push((
            format!("layered-{i}"),
            layered_instance(width, depth, u, 1000 + i),
        ));
    }
    out
}

fn record(
    net: &Network,
    label: &str,
    algo: &'static str,
    k: u64,
    want: i128,
    value: i128,
    flow: Vec<i128>,
    cut_side: Option<Vec<bool>>,
    counters: Counters,
) -> Record {
    let verified = verify_flow(net, &flow).ok();
    let side = cut_side.unwrap_or_else(|| min_cut(net, &flow));
    Record {
        label: label.to_string(),
        algo,
        k,
        n: counters.n,
        max_cap: net.max_input_cap,
        value,
        want,
        verified,
        cut_cap: cut_capacity(net, &side),
        counters,
    }
}

static CORPUS: OnceLock<CorpusRun> = OnceLock::new();

/// Every solver on every corpus instance: generic, LMES k in {2,4,8},
/// Enhanced k in {4,8,16} where k < 4n.
fn corpus() -> &'static CorpusRun {
    CORPUS.get_or_init(|| {
        let start = Instant::now();
        let insts = corpus_instances();
        let instances = insts.len();
        let mut records = Vec::new();
        for (label, inst) in &insts {
            let net = inst.build().unwrap();
            let (want, _) = oracle_max_flow(&net);
            let g = generic::solve(&net, false);
            records.push(record(
                &net, label, "generic", 0, want, g.value, g.flow, None, g.counters,
            ));
            for k in [2u64, 4, 8] {
                let s = lmes::solve(&net, k, false);
                records.push(record(
                    &net, label, "lmes", k, want, s.value, s.flow, None, s.counters,
                ));
            }
            for k in [4u64, 8, 16] {
                if k as usize >= 4 * net.n {
                    continue;
                }
                let s = enhanced::solve(&net, k, &EnhancedOptions::default()).unwrap();
                records.push(record(
                    &net,
                    label,
                    "enhanced",
                    k,
                    want,
                    s.value,
                    s.flow,
                    Some(s.cut_side),
                    s.counters,
                ));
            }
        }
        CorpusRun {
            records,
            instances,
            elapsed_secs: start.elapsed().as_secs_f64(),
        }
    })
}

static AUDITED: OnceLock<Vec<Counters>> = OnceLock::new();

/// All three solvers in audit mode on the first 50 random instances; every
/// internal invariant check panics on violation. Returns the enhanced
/// counter sets.
fn audited_runs() -> &'static Vec<Counters> {
    AUDITED.get_or_init(|| {
        let mut enhanced_counters = Vec::new();
        for (label, inst) in corpus_instances().into_iter().take(50) {
            let net = inst.build().unwrap();
            let (want, _) = oracle_max_flow(&net);
            let g = generic::solve(&net, true);
            assert_eq!(g.value, want, "{label} generic audited");
            let l = lmes::solve(&net, 4, true);
            assert_eq!(l.value, want, "{label} lmes audited");
            let opts = EnhancedOptions {
                audit: true,
                ..Default::default()
            };
            let e = enhanced::solve(&net, 4, &opts).unwrap();
            assert_eq!(e.value, want, "{label} enhanced audited");
            enhanced_counters.push(e.counters);
        }
        enhanced_counters
    })
}

#[test]
fn criterion_1_oracle_equivalence() {
    let run = corpus();
    for r in &run.records {
        assert_eq!(
            r.value, r.want,
            "{} {} k={} returned {} but the oracle says {}",
            r.label, r.algo, r.k, r.value, r.want
        );
        assert_eq!(
            r.verified,
            Some(r.want),
            "{} {} k={}: returned flow failed verification",
            r.label,
            r.algo,
            r.k
        );
    }
    assert!(
        run.elapsed_secs < 120.0,
        "corpus sweep took {:.1}s, budget is 120s",
        run.elapsed_secs
    );
    println!(
        "criterion 1 PASS: {} solver runs over {} instances match the oracle \
         and verify, in {:.1}s",
        run.records.len(),
        run.instances,
        run.elapsed_secs
    );
}

#[test]
fn criterion_2_max_flow_min_cut() {
    let run = corpus();
    for r in &run.records {
        assert_eq!(
            r.cut_cap, r.value,
            "{} {} k={}: cut capacity {} != flow value {}",
            r.label, r.algo, r.k, r.cut_cap, r.value
        );
    }
    println!(
        "criterion 2 PASS: extracted cut capacity equals the flow value on \
         {} runs",
        run.records.len()
    );
}

#[test]
fn criterion_3_invariant_suites_in_audit_mode() {
    let counters = audited_runs();
    let checks: u64 = counters.iter().map(|c| c.audit_checks).sum();
    assert_eq!(counters.len(), 50);
    assert!(checks > 0, "audit mode ran no checks");
    println!(
        "criterion 3 PASS: 50 audited instances, {checks} enhanced invariant \
         sweeps, zero violations"
    );
}

#[test]
fn criterion_4_quantitative_lemma_counters() {
    let run = corpus();
    for r in &run.records {
        let c = &r.counters;
        let n = r.n;
        assert!(
            c.max_relabels_single_node <= n + 1,
            "{} {} k={}: a node relabeled {} times, budget n+1 = {}",
            r.label,
            r.algo,
            r.k,
            c.max_relabels_single_node,
            n + 1
        );
        let n2 = (n * n) as f64;
        match r.algo {
            "lmes" => {
                assert!(
                    c.max_phase_flow_over_delta < 2.0 * n2,
                    "{} lmes k={}: phase moved {} deltas, bound 2n^2 = {}",
                    r.label,
                    r.k,
                    c.max_phase_flow_over_delta,
                    2.0 * n2
                );
                let kappa = r.k.trailing_zeros();
                let bound = lmes::ceil_log2(2 * r.max_cap).div_ceil(kappa) as u64 + 1;
                assert!(
                    c.phases <= bound,
                    "{} lmes k={}: {} phases, bound ceil(log_k 2U)+1 = {bound}",
                    r.label,
                    r.k,
                    c.phases
                );
            }
            "enhanced" => {
                assert!(
                    c.max_phase_flow_over_delta <= 5.0 * n2,
                    "{} enhanced k={}: phase moved {} deltas, bound 5n^2 = {}",
                    r.label,
                    r.k,
                    c.max_phase_flow_over_delta,
                    5.0 * n2
                );
                assert!(
                    c.max_large_pushes_in_phase <= 4 * n * n,
                    "{} enhanced k={}: {} large pushes in a phase, bound 4n^2",
                    r.label,
                    r.k,
                    c.max_large_pushes_in_phase
                );
                assert!(
                    c.contractions <= n - 1,
                    "{} enhanced k={}: {} contractions on {n} nodes",
                    r.label,
                    r.k,
                    c.contractions
                );
                let q = derive_params(r.k, n as usize).unwrap().q as u64;
                assert!(
                    c.max_violating_duration <= 2 * q + 1,
                    "{} enhanced k={}: violating for {} phases, bound 2Q+1 = {}",
                    r.label,
                    r.k,
                    c.max_violating_duration,
                    2 * q + 1
                );
                assert_eq!(
                    c.imbalance_deadline_misses, 0,
                    "{} enhanced k={}: imbalance outlived the 7Q contraction \
                     deadline",
                    r.label, r.k
                );
            }
            _ => {}
        }
    }
    println!(
        "criterion 4 PASS: per-phase flow, large-push, relabel, contraction, \
         duration, and deadline budgets hold on {} runs",
        run.records.len()
    );
}

#[test]
fn criterion_5_pathological_family() {
    let mut jump = Vec::new();
    let mut nojump = Vec::new();
    for alpha in [10u32, 20, 40] {
        let net = two_path_instance(4, alpha).build().unwrap();
        let want = 4i128.pow(alpha) + 1;
        let s = enhanced::solve(&net, 4, &EnhancedOptions::default()).unwrap();
        assert_eq!(s.value, want, "alpha={alpha} with jumps");
        jump.push(s.counters.phases);
        let opts = EnhancedOptions {
            disable_jump: true,
            ..Default::default()
        };
        let s = enhanced::solve(&net, 4, &opts).unwrap();
        assert_eq!(s.value, want, "alpha={alpha} without jumps");
        nojump.push(s.counters.phases);
    }
    assert!(
        jump[0] == jump[1] && jump[1] == jump[2] && jump[0] <= 8,
        "jumping phase count should be a small constant: {jump:?}"
    );
    let d1 = nojump[1] as i64 - nojump[0] as i64;
    let d2 = nojump[2] as i64 - nojump[1] as i64;
    assert!(d1 >= 8, "no-jump phases barely grew: {nojump:?}");
    assert!(
        (d2 - 2 * d1).abs() <= 2,
        "no-jump growth not linear in alpha: {nojump:?}"
    );
    println!(
        "criterion 5 PASS: value 4^a+1 exact; phases with jumps {jump:?}, \
         without {nojump:?}"
    );
}

#[test]
fn criterion_6_abundance_monotonicity() {
    // audit_abundant asserts directions never leave the abundant set and
    // that abundant residuals stay positive, on every audited sweep.
    let counters = audited_runs();
    for (i, c) in counters.iter().enumerate() {
        assert!(c.audit_checks > 0, "instance {i}: no abundance sweeps ran");
    }
    println!(
        "criterion 6 PASS: abundance stayed monotone with positive residuals \
         across {} audited runs",
        counters.len()
    );
}

#[test]
fn criterion_7_determinism() {
    let exe = env!("CARGO_BIN_EXE_maxflow");
    let dir = std::env::temp_dir().join(format!("maxflow-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst_path = dir.join("det.max");
    std::fs::write(
        &inst_path,
        write_instance(&random_instance(24, 90, 700, 11)),
    )
    .unwrap();
    let variants: &[&[&str]] = &[
        &["--algo", "generic"],
        &["--algo", "lmes", "--k", "4"],
        &["--algo", "enhanced", "--k", "8"],
        &["--algo", "enhanced", "--k", "8", "--audit", "--no-jump"],
    ];
    for (vi, flags) in variants.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let cpath = dir.join(format!("c{vi}-{run}.txt"));
            let out = Command::new(exe)
                .arg("solve")
                .args(*flags)
                .arg("--counters")
                .arg(&cpath)
                .arg(&inst_path)
                .output()
                .unwrap();
            assert!(out.status.success(), "solve {flags:?} failed: {out:?}");
            outputs.push((out.stdout, std::fs::read(&cpath).unwrap()));
        }
        assert_eq!(
            outputs[0].0, outputs[1].0,
            "solution bytes differ across runs for {flags:?}"
        );
        assert_eq!(
            outputs[0].1, outputs[1].1,
            "counter report bytes differ across runs for {flags:?}"
        );
    }
    std::fs::remove_dir_all(&dir).ok();
    println!(
        "criterion 7 PASS: byte-identical solutions and counter reports on \
         {} flag variants",
        variants.len()
    );
}
