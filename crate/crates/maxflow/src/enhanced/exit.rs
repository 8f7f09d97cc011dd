//! Exit pipeline. Order matters:
//!
//! 1. drain sub-resolution residue through the widened return and lending
//!    arcs, restoring conservation in the contracted graph;
//! 2. read a cut from residual reachability among supers;
//! 3. expand the contraction records newest-first, correcting flow around
//!    each frozen cycle so every original node conserves;
//! 4. cancel opposite flow within pairs, return to input units, remove
//!    terminal circulation, finish with augmenting paths, and round the
//!    remaining dyadic cycle flow to integers.
//!
//! Every step is exact; the result is an integral maximum flow.

use super::*;
use crate::network::ArcKind;
use crate::oracle::{cut_capacity, min_cut};
use crate::state::{cancel_terminal_circulation, SolverState};

impl Solver {
    pub(super) fn finish(mut self, public: &Network) -> EnhancedSolution {
        self.drain_residue();
        let cut_super = self.contracted_cut();
        let mut side: Vec<bool> = (0..self.n0)
            .map(|v| cut_super[self.super_of[v]])
            .collect();
        let cut_usable = !cut_super[self.tt];
        self.expand_all();
        if self.audit {
            self.audit_expanded_conservation();
        }
        self.canonicalize_pairs();

        let sigma = self.p.sigma as i32;
        let mut state: SolverState<Quantity> = SolverState::new(public);
        for a in 0..public.arc_count() {
            state.flow[a] = self.flow[a].mul_pow2(-sigma);
        }
        cancel_terminal_circulation(public, &mut state);
        ek_finish(public, &mut state);
        integralize(public, &mut state.flow);

        let mut flow = Vec::with_capacity(public.arc_count());
        for a in 0..public.arc_count() {
            let f = state.flow[a];
            assert!(!f.is_negative(), "negative flow on arc {a} at exit");
            let v = f.as_int().expect("flow still fractional after rounding");
            assert!(v <= public.cap[a], "arc {a} over capacity at exit");
            if public.kind[a] == ArcKind::Helper {
                assert_eq!(v, 0, "helper arc {a} still carries flow at exit");
            }
            flow.push(v);
        }
        let mut value = 0i128;
        for a in 0..public.arc_count() {
            if public.tail[a] as usize == public.s {
                value += flow[a];
            }
            if public.head[a] as usize == public.s {
                value -= flow[a];
            }
        }
        // The mapped contracted cut certifies the value on clean exits; if
        // the finishing steps moved flow it can be stale, so fall back to a
        // cut read off the final residual graph.
        if !(cut_usable && cut_capacity(public, &side) == value) {
            side = min_cut(public, &flow);
        }
        EnhancedSolution {
            value,
            flow,
            cut_side: side,
            counters: self.counters,
        }
    }

    /// Push leftover positive excess to the source and cover deficits from
    /// the sink, using each member's widened return and lending arcs. The
    /// amounts are below the resolution that could change the value.
    fn drain_residue(&mut self) {
        let mut to_s = vec![usize::MAX; self.n0];
        let mut from_t = vec![usize::MAX; self.n0];
        for a in 0..self.w.arc_count() {
            if self.w.head[a] as usize == self.w.s {
                to_s[self.w.tail[a] as usize] = a;
            }
            if self.w.tail[a] as usize == self.w.t {
                from_t[self.w.head[a] as usize] = a;
            }
        }
        for v in 0..self.next_super {
            if !self.alive[v] || self.is_terminal(v) {
                continue;
            }
            for mi in 0..self.members[v].len() {
                if !self.excess[v].is_positive() {
                    break;
                }
                let a = to_s[self.members[v][mi]];
                if a == usize::MAX {
                    continue;
                }
                let amt = self.residual(a).min(self.excess[v]);
                if amt.is_positive() {
                    self.raw_push(a, amt);
                }
            }
            for mi in 0..self.members[v].len() {
                if !self.excess[v].is_negative() {
                    break;
                }
                let a = from_t[self.members[v][mi]];
                if a == usize::MAX {
                    continue;
                }
                let amt = self.residual(a).min(-self.excess[v]);
                if amt.is_positive() {
                    self.raw_push(a, amt);
                }
            }
            assert!(
                self.excess[v].is_zero(),
                "could not drain residue at super {v}: {:?}",
                self.excess[v]
            );
        }
    }

    /// Source side of the residual graph over live supers.
    fn contracted_cut(&self) -> Vec<bool> {
        let mut side = vec![false; self.next_super];
        side[self.ss] = true;
        let mut queue = std::collections::VecDeque::from([self.ss]);
        while let Some(x) = queue.pop_front() {
            for &a in &self.sadj[x] {
                if self.residual(a) > Quantity::ZERO {
                    let y = self.cur_head(a);
                    if !side[y] {
                        side[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        side
    }

    fn expand_all(&mut self) {
        while let Some(rec) = self.records.pop() {
            self.expand_one(rec);
        }
    }

    /// Restore conservation inside one contracted cycle by adding a
    /// nonnegative correction around its frozen arcs.
    fn expand_one(&mut self, rec: Contraction) {
        let l = rec.cycle_arcs.len();
        // surplus (inflow - outflow) of each cycle position under the
        // current flow, taken over the original nodes it held at merge time
        let mut surplus = vec![Quantity::ZERO; l];
        for &(orig, pos) in &rec.member_positions {
            for &a in &self.w.adj[orig] {
                surplus[pos] -= self.flow[a];
                surplus[pos] += self.flow[a ^ 1];
            }
        }
        let carries_terminal = (0..l).any(|i| rec.has_s[i] || rec.has_t[i]);
        let f = if !carries_terminal {
            // f_i = f_0 + prefix_i with prefix_i = surplus(1..=i); pick the
            // least f_0 keeping every correction nonnegative
            let mut prefix = Vec::with_capacity(l);
            let mut run = Quantity::ZERO;
            prefix.push(Quantity::ZERO);
            for i in 1..l {
                run += surplus[i];
                prefix.push(run);
            }
            let lowest = prefix.iter().copied().min().unwrap();
            let f0 = if lowest.is_negative() {
                -lowest
            } else {
                Quantity::ZERO
            };
            let total: Quantity = surplus.iter().copied().fold(Quantity::ZERO, |x, y| x + y);
            assert!(total.is_zero(), "contracted cycle leaks flow");
            prefix.iter().map(|&p| f0 + p).collect::<Vec<_>>()
        } else {
            // a terminal absorbs imbalance, so only the other node of the
            // pair is repaired
            assert_eq!(l, 2, "terminal cycle with more than two positions");
            let term = if rec.has_s[0] || rec.has_t[0] { 0 } else { 1 };
            assert!(rec.has_s[term] || rec.has_t[term]);
            let other = 1 - term;
            assert!(
                !rec.has_s[other] && !rec.has_t[other],
                "both positions carry terminals"
            );
            // conservation at `other`: surplus + f_in - f_out = 0 with
            // f_in = f[term], f_out = f[other]
            let mut f = vec![Quantity::ZERO; 2];
            if surplus[other].is_negative() {
                f[term] = -surplus[other];
            } else {
                f[other] = surplus[other];
            }
            f
        };
        for i in 0..l {
            if f[i].is_positive() {
                let a = rec.cycle_arcs[i];
                self.flow[a] += f[i];
            }
        }
    }

    fn audit_expanded_conservation(&mut self) {
        self.counters.audit_checks += 1;
        let mut surplus = vec![Quantity::ZERO; self.n0];
        for a in 0..self.w.arc_count() {
            surplus[self.w.tail[a] as usize] -= self.flow[a];
            surplus[self.w.head[a] as usize] += self.flow[a];
        }
        for v in 0..self.n0 {
            if v == self.w.s || v == self.w.t {
                continue;
            }
            assert!(
                surplus[v].is_zero(),
                "original node {v} not conserved after expansion: {:?}",
                surplus[v]
            );
        }
    }

    /// Remove opposite flow within each pair, then check feasibility in
    /// scaled units.
    fn canonicalize_pairs(&mut self) {
        for pair in 0..self.w.arc_count() / 2 {
            let a = pair * 2;
            let (fa, fb) = (self.flow[a], self.flow[a ^ 1]);
            if fa.is_positive() && fb.is_positive() {
                let m = fa.min(fb);
                self.flow[a] = fa - m;
                self.flow[a ^ 1] = fb - m;
            }
        }
        for a in 0..self.w.arc_count() {
            assert!(!self.flow[a].is_negative());
            assert!(
                self.flow[a] <= Quantity::from_int(self.w.cap[a]),
                "scaled flow over capacity on arc {a} after expansion"
            );
        }
    }
}

/// Augment along shortest residual paths until none remain. Helper arcs
/// cannot appear on any path: arcs into the source and out of the sink are
/// never explored.
fn ek_finish(net: &Network, state: &mut SolverState<Quantity>) -> u64 {
    let mut augmentations = 0;
    loop {
        let mut pred: Vec<Option<usize>> = vec![None; net.n];
        let mut seen = vec![false; net.n];
        seen[net.s] = true;
        let mut queue = std::collections::VecDeque::from([net.s]);
        'bfs: while let Some(x) = queue.pop_front() {
            for &a in &net.adj[x] {
                if state.residual(net, a) > Quantity::ZERO {
                    let y = net.head[a] as usize;
                    if !seen[y] {
                        seen[y] = true;
                        pred[y] = Some(a);
                        if y == net.t {
                            break 'bfs;
                        }
                        queue.push_back(y);
                    }
                }
            }
        }
        if pred[net.t].is_none() {
            return augmentations;
        }
        let mut theta: Option<Quantity> = None;
        let mut x = net.t;
        while x != net.s {
            let a = pred[x].unwrap();
            let r = state.residual(net, a);
            theta = Some(theta.map_or(r, |t| t.min(r)));
            x = net.tail[a] as usize;
        }
        let theta = theta.unwrap();
        let mut x = net.t;
        while x != net.s {
            let a = pred[x].unwrap();
            state.apply_push(net, a, theta, net.tail[a] as usize, net.head[a] as usize);
            x = net.tail[a] as usize;
        }
        augmentations += 1;
    }
}

/// Round a conserved dyadic flow to an integral one without changing the
/// value. Fractional arcs form cycles (all divergences are integral), and
/// rotating the cycle by the smallest distance to an integer clears at
/// least one arc per round.
fn integralize(net: &Network, flow: &mut [Quantity]) {
    let fractional = |f: Quantity| !f.mod_pow2(0).is_zero();
    loop {
        let Some(start) = (0..net.arc_count()).find(|&a| fractional(flow[a])) else {
            return;
        };
        // Walk fractional edges (at most one per pair survives
        // canonicalization) until a node repeats, never immediately
        // reversing the pair just taken.
        let mut pos_of = vec![usize::MAX; net.n];
        let mut nodes = vec![net.tail[start] as usize];
        // (slot, walked along the slot's direction)
        let mut edges: Vec<(usize, bool)> = vec![(start, true)];
        let mut current = net.head[start] as usize;
        pos_of[nodes[0]] = 0;
        let cycle_at = loop {
            if pos_of[current] != usize::MAX {
                break pos_of[current];
            }
            pos_of[current] = nodes.len();
            nodes.push(current);
            let last_pair = edges.last().unwrap().0 / 2;
            let mut step = None;
            for &b in &net.adj[current] {
                if b / 2 == last_pair {
                    continue;
                }
                if fractional(flow[b]) {
                    step = Some((b, true, net.head[b] as usize));
                    break;
                }
                if fractional(flow[b ^ 1]) {
                    step = Some((b ^ 1, false, net.head[b] as usize));
                    break;
                }
            }
            let (slot, forward, next) =
                step.expect("fractional flow must close into a cycle");
            edges.push((slot, forward));
            current = next;
        };
        // the cycle is edges[cycle_at..], oriented by the walk
        let cycle = &edges[cycle_at..];
        let mut theta: Option<Quantity> = None;
        for &(slot, forward) in cycle {
            let frac = flow[slot].mod_pow2(0);
            let room = if forward { Quantity::ONE - frac } else { frac };
            theta = Some(theta.map_or(room, |t| t.min(room)));
        }
        let theta = theta.unwrap();
        debug_assert!(theta.is_positive());
        for &(slot, forward) in cycle {
            if forward {
                flow[slot] += theta;
                debug_assert!(flow[slot] <= Quantity::from_int(net.cap[slot]));
            } else {
                flow[slot] -= theta;
                debug_assert!(!flow[slot].is_negative());
            }
        }
    }
}
