//! Baseline preflow-push solver: FIFO active-node order, current-arc
//! scanning, relabel by one.

use crate::counters::{Counters, PushClass};
use crate::network::Network;
use crate::state::{cancel_terminal_circulation, check_validity, SolverState};
use std::collections::VecDeque;

pub struct Solution {
    pub value: i128,
    pub flow: Vec<i128>,
    pub counters: Counters,
}

pub fn solve(net: &Network, audit: bool) -> Solution {
    let w = net.solver_copy(0);
    let mut st: SolverState<i128> = SolverState::new(&w);
    let mut counters = Counters {
        n: w.n as u64,
        m: (w.arc_count() / 2) as u64,
        ..Default::default()
    };
    let mut relabel_count = vec![0u64; w.n];

    st.saturate_source(&w);

    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut queued = vec![false; w.n];
    for v in 0..w.n {
        if v != w.s && v != w.t && st.excess[v] > 0 {
            queue.push_back(v);
            queued[v] = true;
        }
    }

    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        while st.excess[v] > 0 {
            if let Some(a) = st.find_admissible(&w, v) {
                let j = w.head[a] as usize;
                let r = st.residual(&w, a);
                let delta = st.excess[v].min(r);
                st.apply_push(&w, a, delta, v, j);
                counters.record_push(if delta == r {
                    PushClass::Saturating
                } else {
                    PushClass::Other
                });
                if j != w.s && j != w.t && !queued[j] && st.excess[j] > 0 {
                    queue.push_back(j);
                    queued[j] = true;
                }
            } else {
                st.relabel(v);
                relabel_count[v] += 1;
                counters.record_relabel(relabel_count[v]);
                assert!(
                    st.dist[v] <= w.n + 1,
                    "label of node {v} exceeded n+1: return arcs keep every node absorbable"
                );
            }
            if audit {
                check_validity(&w, &st, "preflow step");
                counters.audit_checks += 1;
                for u in 0..w.n {
                    if u != w.s {
                        assert!(st.excess[u] >= 0, "negative excess at node {u}");
                    }
                }
            }
        }
    }

    for v in 0..w.n {
        if v != w.s && v != w.t {
            debug_assert_eq!(st.excess[v], 0);
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
