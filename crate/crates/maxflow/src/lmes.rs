//! Excess-scaling preflow solver with two-tier node selection.
//!
//! Works in phases with a scale parameter delta halving by a factor `k` per
//! phase. Within a phase, excesses stay in `[0, delta]`; nodes with excess at
//! least `delta/2` are served lowest label first, nodes with excess in
//! `[delta/k, delta/2)` highest label first. A push moves
//! `min(e(i), r, delta - e(j))`, so no node ever exceeds delta. The phase ends
//! when every excess is below `delta/k`; with integer capacities the run ends
//! after the `delta = 1` phase with all excesses zero.

use crate::counters::{Counters, PushClass};
use crate::network::Network;
use crate::selection::{ExcessClass, Selection};
use crate::state::{cancel_terminal_circulation, check_validity, SolverState};

pub struct Solution {
    pub value: i128,
    pub flow: Vec<i128>,
    pub counters: Counters,
}

pub fn ceil_log2(x: i128) -> u32 {
    assert!(x >= 1);
    (x as u128).next_power_of_two().trailing_zeros()
}

/// Least power of two at or above `2 + log U / log log U`.
pub fn default_k(max_cap: i128) -> u64 {
    let lg_u = (max_cap.max(1) as f64).log2();
    let denom = lg_u.log2().max(1.0);
    let target = (2.0 + lg_u / denom).ceil() as u64;
    target.max(2).next_power_of_two()
}

fn excess_class(e: i128, delta: i128, k: i128) -> ExcessClass {
    if 2 * e >= delta {
        ExcessClass::Large
    } else if k * e >= delta {
        ExcessClass::Medium
    } else {
        ExcessClass::Inactive
    }
}

pub fn solve(net: &Network, k: u64, audit: bool) -> Solution {
    assert!(k >= 2 && k.is_power_of_two(), "k must be a power of two >= 2");
    let w = net.solver_copy(0);
    let n = w.n;
    let mut st: SolverState<i128> = SolverState::new(&w);
    let mut counters = Counters {
        n: n as u64,
        m: (w.arc_count() / 2) as u64,
        k,
        ..Default::default()
    };
    let mut relabel_count = vec![0u64; n];
    let mut sel = Selection::new(n, n + 2);
    let ki = k as i128;

    st.saturate_source(&w);
    let lambda = ceil_log2(net.max_input_cap.max(1));
    let mut delta: i128 = 1 << lambda;
    let phase_budget = (lambda + 1).div_ceil(k.trailing_zeros()) as u64 + 1;

    let mut events = 0u64;
    loop {
        sel.clear();
        for v in 0..n {
            if v != w.s && v != w.t {
                sel.update(v, st.dist[v], excess_class(st.excess[v], delta, ki));
            }
        }
        let mut phase_flow: i128 = 0;
        let mut large_pushes = 0u64;
        let mut phase_pushes = 0u64;

        while let Some(v) = sel.select() {
            let selected_large = sel.class_of(v) == ExcessClass::Large;
            if let Some(a) = st.find_admissible(&w, v) {
                let j = w.head[a] as usize;
                let r = st.residual(&w, a);
                let mut delta_push = st.excess[v].min(r);
                if j != w.s && j != w.t {
                    delta_push = delta_push.min(delta - st.excess[j]);
                }
                assert!(delta_push > 0, "selection order guarantees positive pushes");
                st.apply_push(&w, a, delta_push, v, j);
                phase_flow += delta_push;
                phase_pushes += 1;
                let class = if delta_push == r {
                    PushClass::Saturating
                } else if selected_large {
                    large_pushes += 1;
                    PushClass::Large
                } else {
                    PushClass::Medium
                };
                counters.record_push(class);
                sel.update(v, st.dist[v], excess_class(st.excess[v], delta, ki));
                if j != w.s && j != w.t {
                    sel.update(j, st.dist[j], excess_class(st.excess[j], delta, ki));
                }
            } else {
                st.relabel(v);
                relabel_count[v] += 1;
                counters.record_relabel(relabel_count[v]);
                assert!(
                    st.dist[v] <= n + 1,
                    "label of node {v} exceeded n+1: return arcs keep every node absorbable"
                );
                sel.update(v, st.dist[v], excess_class(st.excess[v], delta, ki));
            }
            events += 1;
            if audit {
                counters.audit_checks += 1;
                check_validity(&w, &st, "scaling step");
                for u in 0..n {
                    if u != w.s && u != w.t {
                        assert!(
                            st.excess[u] >= 0 && st.excess[u] <= delta,
                            "excess {} at node {u} outside [0, delta={delta}]",
                            st.excess[u]
                        );
                    }
                }
                assert!(
                    phase_flow < 2 * (n as i128) * (n as i128) * delta,
                    "phase moved {phase_flow}, budget is 2 n^2 delta"
                );
                assert!(
                    large_pushes <= 4 * (n as u64) * (n as u64),
                    "more than 4 n^2 large pushes in one phase"
                );
                if events.is_multiple_of(1000) {
                    sel.verify_against(|v| {
                        if v == w.s || v == w.t {
                            (0, ExcessClass::Inactive)
                        } else {
                            (st.dist[v], excess_class(st.excess[v], delta, ki))
                        }
                    });
                }
            }
        }

        counters.end_phase(
            phase_pushes > 0,
            phase_flow as f64 / delta as f64,
            large_pushes,
            phase_pushes,
        );
        if audit {
            assert!(
                counters.phases <= phase_budget,
                "{} phases exceeds budget {phase_budget}",
                counters.phases
            );
        }
        if delta == 1 {
            break;
        }
        delta = (delta / ki).max(1);
    }

    for v in 0..n {
        if v != w.s && v != w.t {
            assert_eq!(st.excess[v], 0, "leftover excess after final phase");
        }
    }
    cancel_terminal_circulation(&w, &mut st);
    let value = st.flow_value(&w);
    Solution {
        value,
        flow: st.flow,
        counters,
    }
}

#[cfg(test)]
mod test {
    use super::*;
    use crate::gen::{layered_instance, random_instance, two_path_instance};
    use crate::network::build_network;
    use crate::oracle::{cut_capacity, min_cut, oracle_max_flow, verify_flow};

    #[test]
    fn diamond() {
        let net = build_network(
            4,
            0,
            3,
            &[(0, 1, 3), (0, 2, 2), (1, 3, 2), (2, 3, 3), (1, 2, 1)],
        )
        .unwrap();
        for k in [2, 4, 8] {
            let sol = solve(&net, k, true);
            assert_eq!(sol.value, 5);
            assert_eq!(verify_flow(&net, &sol.flow).unwrap(), 5);
        }
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        for seed in 0..40 {
            let n = 2 + (seed as usize % 11);
            let inst = random_instance(n, 3 * n, 1 + 23 * seed as u128, seed);
            let net = inst.build().unwrap();
            let (want, _) = oracle_max_flow(&net);
            for k in [2, 4, 16] {
                let sol = solve(&net, k, seed % 4 == 0);
                assert_eq!(sol.value, want, "seed {seed} k {k}");
                verify_flow(&net, &sol.flow).unwrap();
            }
            let sol = solve(&net, 4, false);
            let side = min_cut(&net, &sol.flow);
            assert_eq!(cut_capacity(&net, &side), want, "cut seed {seed}");
        }
    }

    #[test]
    fn matches_oracle_on_layered_instances() {
        for seed in 0..10 {
            let inst = layered_instance(3, 4, 200, seed);
            let net = inst.build().unwrap();
            let (want, _) = oracle_max_flow(&net);
            let sol = solve(&net, 4, seed % 5 == 0);
            assert_eq!(sol.value, want, "seed {seed}");
        }
    }

    #[test]
    fn two_path_deep_scaling() {
        for alpha in [6, 10, 20] {
            let net = two_path_instance(4, alpha).build().unwrap();
            let sol = solve(&net, 4, true);
            assert_eq!(sol.value, 4i128.pow(alpha) + 1);
        }
    }

    #[test]
    fn phase_count_tracks_capacity_log() {
        let net10 = two_path_instance(4, 10).build().unwrap();
        let net20 = two_path_instance(4, 20).build().unwrap();
        let p10 = solve(&net10, 4, false).counters.phases;
        let p20 = solve(&net20, 4, false).counters.phases;
        assert!(p20 > p10, "deeper capacities need more phases");
        assert!(p20 <= 2 * p10 + 4);
    }

    #[test]
    fn default_k_reasonable() {
        assert_eq!(default_k(1), 2);
        assert!(default_k(1 << 20).is_power_of_two());
        assert!(default_k(1 << 20) >= 4);
        assert!(default_k(i128::MAX / 2) <= 64);
    }
}
