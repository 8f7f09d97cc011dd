//! Reference max-flow (shortest augmenting paths), flow verification, and
//! min-cut extraction. Everything here is independent of the scaling solvers
//! so it can arbitrate their answers.

use crate::network::{ArcKind, Network};
use std::collections::VecDeque;
use std::fmt;

/// Max flow by BFS augmenting paths. Paths never enter `s` or leave `t`, so
/// the transformation's return and lending arcs stay at zero flow and the
/// result is feasible for the input arcs alone.
pub fn oracle_max_flow(net: &Network) -> (i128, Vec<i128>) {
    let mut flow = vec![0i128; net.arc_count()];
    let residual = |flow: &[i128], a: usize| net.cap[a] - flow[a] + flow[a ^ 1];
    let mut value = 0i128;
    loop {
        let mut pred: Vec<Option<usize>> = vec![None; net.n];
        let mut seen = vec![false; net.n];
        seen[net.s] = true;
        let mut queue = VecDeque::new();
        queue.push_back(net.s);
        'bfs: while let Some(i) = queue.pop_front() {
            if i == net.t {
                break;
            }
            for &a in &net.adj[i] {
                let j = net.head[a] as usize;
                if !seen[j] && residual(&flow, a) > 0 {
                    seen[j] = true;
                    pred[j] = Some(a);
                    queue.push_back(j);
                    if j == net.t {
                        break 'bfs;
                    }
                }
            }
        }
        if !seen[net.t] {
            return (value, flow);
        }
        let mut theta = i128::MAX;
        let mut v = net.t;
        while v != net.s {
            let a = pred[v].unwrap();
            theta = theta.min(residual(&flow, a));
            v = net.tail[a] as usize;
        }
        let mut v = net.t;
        while v != net.s {
            let a = pred[v].unwrap();
            let back = flow[a ^ 1];
            if theta <= back {
                flow[a ^ 1] = back - theta;
            } else {
                flow[a] += theta - back;
                flow[a ^ 1] = 0;
            }
            v = net.tail[a] as usize;
        }
        value += theta;
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub violations: Vec<String>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks capacity bounds and conservation; returns the flow value.
pub fn verify_flow(net: &Network, flow: &[i128]) -> Result<i128, VerifyReport> {
    let mut violations = Vec::new();
    if flow.len() != net.arc_count() {
        violations.push(format!(
            "flow vector has {} entries, network has {} arc slots",
            flow.len(),
            net.arc_count()
        ));
        return Err(VerifyReport { violations });
    }
    let mut div = vec![0i128; net.n];
    for a in 0..net.arc_count() {
        if flow[a] < 0 {
            violations.push(format!("arc {a}: negative flow {}", flow[a]));
        }
        if flow[a] > net.cap[a] {
            violations.push(format!(
                "arc {a} ({} -> {}): flow {} exceeds capacity {}",
                net.tail[a], net.head[a], flow[a], net.cap[a]
            ));
        }
        div[net.tail[a] as usize] += flow[a];
        div[net.head[a] as usize] -= flow[a];
    }
    for v in 0..net.n {
        if v != net.s && v != net.t && div[v] != 0 {
            violations.push(format!("node {v}: net outflow {} (want 0)", div[v]));
        }
    }
    if violations.is_empty() {
        Ok(div[net.s])
    } else {
        Err(VerifyReport { violations })
    }
}

/// Source side of a minimum cut: residual reachability from `s` under `flow`.
pub fn min_cut(net: &Network, flow: &[i128]) -> Vec<bool> {
    let mut side = vec![false; net.n];
    side[net.s] = true;
    let mut queue = VecDeque::new();
    queue.push_back(net.s);
    while let Some(i) = queue.pop_front() {
        for &a in &net.adj[i] {
            let j = net.head[a] as usize;
            if !side[j] && net.cap[a] - flow[a] + flow[a ^ 1] > 0 {
                side[j] = true;
                queue.push_back(j);
            }
        }
    }
    side
}

/// Total capacity of input arcs crossing from the source side to the sink
/// side. Return and lending arcs point into the source side or out of the
/// sink side, so they never cross forward and are skipped by kind.
pub fn cut_capacity(net: &Network, side: &[bool]) -> i128 {
    let mut total = 0i128;
    for a in 0..net.arc_count() {
        if net.kind[a] != ArcKind::Helper
            && side[net.tail[a] as usize]
            && !side[net.head[a] as usize]
        {
            total += net.cap[a];
        }
    }
    total
}

#[cfg(test)]
mod test {
    use super::*;
    use crate::network::build_network;

    fn diamond() -> Network {
        build_network(
            4,
            0,
            3,
            &[(0, 1, 3), (0, 2, 2), (1, 3, 2), (2, 3, 3), (1, 2, 1)],
        )
        .unwrap()
    }

    #[test]
    fn diamond_value_is_five() {
        // s->a 3, s->b 2, a->t 2, b->t 3, a->b 1: only the cut {s} has
        // capacity 5, every other cut is larger, and the flow (3,2,2,3,1)
        // achieves it.
        let net = diamond();
        let (value, flow) = oracle_max_flow(&net);
        assert_eq!(value, 5);
        assert_eq!(verify_flow(&net, &flow).unwrap(), 5);
        let side = min_cut(&net, &flow);
        assert_eq!(cut_capacity(&net, &side), 5);
        assert!(side[0] && !side[3]);
    }

    #[test]
    fn single_path() {
        let net = build_network(3, 0, 2, &[(0, 1, 4), (1, 2, 7)]).unwrap();
        let (value, flow) = oracle_max_flow(&net);
        assert_eq!(value, 4);
        assert_eq!(verify_flow(&net, &flow).unwrap(), 4);
    }

    #[test]
    fn disconnected_sink() {
        let net = build_network(4, 0, 3, &[(0, 1, 4), (2, 3, 4)]).unwrap();
        // The lending arc (t,1) exists but nothing leads into t forward.
        let (value, _) = oracle_max_flow(&net);
        assert_eq!(value, 0);
    }

    #[test]
    fn verify_catches_violations() {
        let net = build_network(3, 0, 2, &[(0, 1, 4), (1, 2, 7)]).unwrap();
        let mut flow = vec![0i128; net.arc_count()];
        let a = (0..net.arc_count())
            .find(|&a| net.tail[a] == 0 && net.head[a] == 1)
            .unwrap();
        flow[a] = 5; // exceeds capacity and breaks conservation at node 1
        let report = verify_flow(&net, &flow).unwrap_err();
        assert_eq!(report.violations.len(), 2);
    }

    #[test]
    fn helper_arcs_never_cross_cut() {
        let net = diamond();
        let (_, flow) = oracle_max_flow(&net);
        let side = min_cut(&net, &flow);
        for a in 0..net.arc_count() {
            if net.kind[a] == ArcKind::Helper {
                assert!(!(side[net.tail[a] as usize] && !side[net.head[a] as usize]));
            }
        }
    }
}
