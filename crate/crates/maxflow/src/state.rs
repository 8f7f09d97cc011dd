//! Mutable solver state: flows, excesses, labels, current-arc cursors.
//!
//! Generic over the flow number type so the integer solvers run on `i128`
//! and the scaling solver on exact dyadic quantities.

use crate::network::Network;
use crate::quantity::Quantity;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

pub trait FlowNum:
    Copy
    + Ord
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const ZERO: Self;
    fn from_i128(v: i128) -> Self;
}

impl FlowNum for i128 {
    const ZERO: i128 = 0;
    fn from_i128(v: i128) -> i128 {
        v
    }
}

impl FlowNum for Quantity {
    const ZERO: Quantity = Quantity::ZERO;
    fn from_i128(v: i128) -> Quantity {
        Quantity::from_int(v)
    }
}

pub struct SolverState<T> {
    pub flow: Vec<T>,
    pub excess: Vec<T>,
    pub dist: Vec<usize>,
    pub cursor: Vec<usize>,
}

impl<T: FlowNum> SolverState<T> {
    pub fn new(net: &Network) -> Self {
        SolverState {
            flow: vec![T::ZERO; net.arc_count()],
            excess: vec![T::ZERO; net.n],
            dist: vec![0; net.n],
            cursor: vec![0; net.n],
        }
    }

    pub fn residual(&self, net: &Network, a: usize) -> T {
        T::from_i128(net.cap[a]) - self.flow[a] + self.flow[a ^ 1]
    }

    /// Moves `delta` along arc `a`, cancelling reverse flow before adding
    /// forward flow so at most one direction of a pair carries flow. Excess is
    /// adjusted at the given indices (node ids, or merged-node ids when the
    /// caller runs on a contracted network).
    pub fn apply_push(&mut self, net: &Network, a: usize, delta: T, tail_idx: usize, head_idx: usize) {
        debug_assert!(delta > T::ZERO, "push of nonpositive amount");
        debug_assert!(delta <= self.residual(net, a), "push exceeds residual");
        let back = self.flow[a ^ 1];
        if delta <= back {
            self.flow[a ^ 1] = back - delta;
        } else {
            self.flow[a] += delta - back;
            self.flow[a ^ 1] = T::ZERO;
        }
        self.excess[tail_idx] -= delta;
        self.excess[head_idx] += delta;
    }

    /// Preflow initialization: saturate every arc out of `s`, set `d(s) = n`.
    pub fn saturate_source(&mut self, net: &Network) {
        for &a in &net.adj[net.s] {
            let r = self.residual(net, a);
            if r > T::ZERO {
                let head = net.head[a] as usize;
                self.apply_push(net, a, r, net.s, head);
            }
        }
        self.dist[net.s] = net.n;
    }

    /// Net flow into the sink.
    pub fn flow_value(&self, net: &Network) -> T {
        let mut v = T::ZERO;
        for a in 0..net.arc_count() {
            if net.head[a] as usize == net.t {
                v += self.flow[a];
            }
            if net.tail[a] as usize == net.t {
                v -= self.flow[a];
            }
        }
        v
    }

    /// Scans `adj[i]` from the cursor for a residual arc to a lower-labeled
    /// neighbor; leaves the cursor on the arc found. Returns the arc or None
    /// when the list is exhausted (caller relabels).
    pub fn find_admissible(&mut self, net: &Network, i: usize) -> Option<usize> {
        while self.cursor[i] < net.adj[i].len() {
            let a = net.adj[i][self.cursor[i]];
            let j = net.head[a] as usize;
            if self.dist[i] == self.dist[j] + 1 && self.residual(net, a) > T::ZERO {
                return Some(a);
            }
            self.cursor[i] += 1;
        }
        None
    }

    pub fn relabel(&mut self, i: usize) {
        self.dist[i] += 1;
        self.cursor[i] = 0;
    }

    /// Recomputes every excess from the flow arrays; audit helper.
    pub fn excess_from_scratch(&self, net: &Network) -> Vec<T> {
        let mut e = vec![T::ZERO; net.n];
        for a in 0..net.arc_count() {
            let x = self.flow[a];
            if x > T::ZERO {
                e[net.tail[a] as usize] -= x;
                e[net.head[a] as usize] += x;
            }
        }
        e
    }
}

/// Panics unless the labeling is valid for the current preflow: `d(t) = 0`,
/// `d(s) = n`, and every residual arc rises by at most one level.
pub fn check_validity<T: FlowNum>(net: &Network, state: &SolverState<T>, context: &str) {
    assert_eq!(state.dist[net.t], 0, "{context}: sink label moved");
    assert_eq!(state.dist[net.s], net.n, "{context}: source label moved");
    for a in 0..net.arc_count() {
        if state.residual(net, a) > T::ZERO {
            let (i, j) = (net.tail[a] as usize, net.head[a] as usize);
            assert!(
                state.dist[i] <= state.dist[j] + 1,
                "{context}: residual arc {i}(d={}) -> {j}(d={}) breaks validity",
                state.dist[i],
                state.dist[j]
            );
        }
    }
}

/// Removes all flow entering `s` or leaving `t` by cancelling it against its
/// support: a cycle through the terminal, or a chain from the sink back to
/// the source when lent flow was later returned. Neither contributes to the
/// value, and zeroing them makes the widened return and lending arcs carry
/// nothing, so the flow restricted to input arcs is feasible as-is.
pub fn cancel_terminal_circulation<T: FlowNum>(net: &Network, state: &mut SolverState<T>) {
    loop {
        let mut target = None;
        for a in 0..net.arc_count() {
            if state.flow[a] > T::ZERO
                && (net.head[a] as usize == net.s || net.tail[a] as usize == net.t)
            {
                target = Some(a);
                break;
            }
        }
        let Some(a) = target else { return };
        // Flow into s is fed from one of the terminals; flow out of t drains
        // into one of them. Trace the chain over positive-flow arcs and
        // cancel the minimum along it.
        let path = if net.head[a] as usize == net.s {
            support_chain(net, state, net.tail[a] as usize, false)
        } else {
            support_chain(net, state, net.head[a] as usize, true)
        }
        .expect("terminal flow must be supported by a terminal");
        let mut theta = state.flow[a];
        for &p in &path {
            theta = theta.min(state.flow[p]);
        }
        state.flow[a] -= theta;
        for &p in &path {
            state.flow[p] -= theta;
        }
    }
}

/// BFS from `start` over positive-flow arcs, forward or backward, until a
/// terminal is reached; returns the arcs of the traversed chain. Conservation
/// at non-terminals guarantees a terminal is found.
fn support_chain<T: FlowNum>(
    net: &Network,
    state: &SolverState<T>,
    start: usize,
    forward: bool,
) -> Option<Vec<usize>> {
    if start == net.s || start == net.t {
        return Some(Vec::new());
    }
    let mut pred: Vec<Option<usize>> = vec![None; net.n];
    let mut seen = vec![false; net.n];
    seen[start] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(start);
    while let Some(i) = queue.pop_front() {
        for &c in &net.adj[i] {
            let (arc, next) = if forward {
                (c, net.head[c] as usize)
            } else {
                (c ^ 1, net.head[c] as usize)
            };
            if state.flow[arc] <= T::ZERO || seen[next] {
                continue;
            }
            seen[next] = true;
            pred[next] = Some(arc);
            if next == net.s || next == net.t {
                let mut path = Vec::new();
                let mut v = next;
                while v != start {
                    let b = pred[v].unwrap();
                    path.push(b);
                    v = if forward {
                        net.tail[b] as usize
                    } else {
                        net.head[b] as usize
                    };
                }
                return Some(path);
            }
            queue.push_back(next);
        }
    }
    None
}

#[cfg(test)]
mod test {
    use super::*;
    use crate::network::build_network;

    #[test]
    fn push_cancels_before_adding() {
        let net = build_network(3, 0, 2, &[(0, 1, 5), (1, 0, 3), (1, 2, 9)]).unwrap();
        let mut st: SolverState<i128> = SolverState::new(&net);
        let a = (0..net.arc_count())
            .find(|&a| net.tail[a] == 0 && net.head[a] == 1)
            .unwrap();
        st.apply_push(&net, a, 4, 0, 1);
        assert_eq!((st.flow[a], st.flow[a ^ 1]), (4, 0));
        st.apply_push(&net, a ^ 1, 3, 1, 0);
        assert_eq!((st.flow[a], st.flow[a ^ 1]), (1, 0));
        st.apply_push(&net, a ^ 1, 4, 1, 0);
        assert_eq!((st.flow[a], st.flow[a ^ 1]), (0, 3));
        assert_eq!(st.excess[0], 3);
        assert_eq!(st.excess[1], -3);
        assert_eq!(st.residual(&net, a), 5 + 3);
    }

    #[test]
    fn saturate_source_sets_excesses() {
        let net = build_network(3, 0, 2, &[(0, 1, 4), (1, 2, 4)]).unwrap();
        let wide = net.solver_copy(0);
        let mut st: SolverState<i128> = SolverState::new(&wide);
        st.saturate_source(&wide);
        assert_eq!(st.excess[1], 4);
        assert_eq!(st.dist[0], 3);
        assert_eq!(st.excess[0], -4);
        let scratch = st.excess_from_scratch(&wide);
        assert_eq!(scratch, st.excess);
    }

    #[test]
    fn circulation_through_terminal_cancelled() {
        let net = build_network(3, 0, 2, &[(0, 1, 4), (1, 2, 4)]).unwrap();
        let mut st: SolverState<i128> = SolverState::new(&net);
        let sa = (0..net.arc_count())
            .find(|&a| net.tail[a] == 0 && net.head[a] == 1)
            .unwrap();
        let ab = (0..net.arc_count())
            .find(|&a| net.tail[a] == 1 && net.head[a] == 2)
            .unwrap();
        let back = (0..net.arc_count())
            .find(|&a| net.tail[a] == 1 && net.head[a] == 0)
            .unwrap();
        // 4 units s->1->t plus a 2-unit cycle s->1->s.
        st.apply_push(&net, sa, 4, 0, 1);
        st.apply_push(&net, ab, 4, 1, 2);
        st.flow[sa] += 2;
        st.flow[back] += 2;
        cancel_terminal_circulation(&net, &mut st);
        assert_eq!(st.flow[back], 0);
        assert_eq!(st.flow[sa], 4);
        assert_eq!(st.flow_value(&net), 4);
    }
}
