//! Scaling solver with flow-return forests and abundant-arc contraction.
//!
//! Extends the excess-scaling scheme with three mechanisms that together
//! remove the capacity-log factor from the phase count:
//!
//! * every node keeps its reduced excess nonnegative, with special
//!   low-imbalance nodes allowed to dip slightly below zero;
//! * nodes that fall below the violation threshold `eps * delta` are wired
//!   into a forest rooted at well-funded nodes (or a terminal) along
//!   abundant arcs, and receive scheduled `delta/k` deliveries;
//! * arcs whose both residuals stay huge relative to `delta` are contracted,
//!   with enough bookkeeping to expand the flow afterwards.
//!
//! All arithmetic is exact: quantities are dyadic rationals, capacities are
//! pre-scaled by an exact power of two, and the scale parameter only moves
//! between powers of two.

mod audit;
mod classify;
mod contract;
mod exit;
mod frf;
mod params;

pub use params::{default_k, derive_params, Params};

use crate::counters::{Counters, PushClass};
use crate::network::Network;
use crate::quantity::Quantity;
use crate::selection::{ExcessClass, Selection};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeClass {
    Special,
    Violating,
    Normal,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gamma2Mode {
    /// Gamma_2 = max over negative excesses of -eps^3 * e(v).
    Scaled,
    /// Gamma_2 = max over negative excesses of -e(v) / eps^3.
    Inverse,
}

#[derive(Clone, Copy, Debug)]
pub struct EnhancedOptions {
    pub audit: bool,
    pub disable_jump: bool,
    pub gamma2: Gamma2Mode,
}

impl Default for EnhancedOptions {
    fn default() -> Self {
        EnhancedOptions {
            audit: false,
            disable_jump: false,
            gamma2: Gamma2Mode::Scaled,
        }
    }
}

pub struct EnhancedSolution {
    pub value: i128,
    pub flow: Vec<i128>,
    /// Source side of a minimum cut, per original node.
    pub cut_side: Vec<bool>,
    pub counters: Counters,
}

/// Record of one contraction, enough to undo it on the flow at exit.
struct Contraction {
    /// Arc slots around the cycle; arc `i` leads from cycle node `i` to
    /// cycle node `i+1 mod len`.
    cycle_arcs: Vec<usize>,
    /// Original nodes of the merged super, with the cycle position each
    /// belonged to at merge time.
    member_positions: Vec<(usize, usize)>,
    /// Cycle positions that carried the source / sink at merge time.
    has_s: Vec<bool>,
    has_t: Vec<bool>,
}

pub(crate) struct Solver {
    // network working copy: widened terminals, capacities scaled by 2^sigma
    w: Network,
    n0: usize,
    p: Params,
    audit: bool,
    disable_jump: bool,
    gamma2: Gamma2Mode,

    delta_exp: i32,
    delta0_exp: i32,
    floor_exp: i32,
    phase: u64,

    // flow state; node arrays are indexed by super id (0..2*n0)
    flow: Vec<Quantity>,
    excess: Vec<Quantity>,
    dist: Vec<usize>,
    cursor: Vec<usize>,
    relabel_ops: Vec<u64>,

    // contraction
    super_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    alive: Vec<bool>,
    sadj: Vec<Vec<usize>>,
    next_super: usize,
    n_alive: usize,
    ss: usize,
    tt: usize,
    frozen: Vec<bool>,
    records: Vec<Contraction>,

    // arc classes and abundance
    large_end: Vec<usize>,
    medium_end: Vec<usize>,
    pair_seen_large: Vec<bool>,
    abundant: Vec<bool>,
    merge_queue: std::collections::VecDeque<usize>,
    pair_queued: Vec<bool>,

    // abundance prediction ring: bucket j is examined after j more shrinks
    buckets: Vec<Vec<usize>>,
    bucket_head: usize,
    bucket_of: Vec<i32>,
    buckets_dirty: bool,
    /// Residual floor recorded when a direction was marked abundant.
    abundant_floor: Vec<Quantity>,

    // imbalance and node classes
    imb: Vec<Quantity>,
    nclass: Vec<NodeClass>,
    violating_prev: Vec<bool>,
    violating_since: Vec<u64>,
    imbalance_since: Vec<i64>,

    // flow-return forest
    in_f: Vec<bool>,
    parent: Vec<i64>,
    children: Vec<Vec<usize>>,
    needed: Vec<Quantity>,
    reserve: Vec<Quantity>,
    viol_leaves: Vec<u32>,

    sel: Selection,
    counters: Counters,
    events: u64,
    phase_flow: Quantity,
    phase_large: u64,
    phase_pushes: u64,
    specials_at_start: Vec<usize>,
}

pub fn solve(
    net: &Network,
    k: u64,
    opts: &EnhancedOptions,
) -> Result<EnhancedSolution, String> {
    let mut solver = Solver::new(net, k, opts)?;
    solver.init_flows();
    solver.run();
    Ok(solver.finish(net))
}

impl Solver {
    fn new(net: &Network, k: u64, opts: &EnhancedOptions) -> Result<Solver, String> {
        let p = derive_params(k, net.n)?;
        let total: i128 = net.cap.iter().sum();
        let widened = total + 8 * (net.n as i128) * (net.n as i128) * net.max_input_cap.max(1);
        if widened.checked_shl(p.sigma).is_none() || widened << p.sigma > (1i128 << 126) {
            return Err("capacities too large for exact scaled arithmetic".into());
        }
        let w = net.solver_copy(p.sigma);
        let n0 = w.n;
        let cap_supers = 2 * n0;
        let slots = w.arc_count();
        let mut counters = Counters {
            n: n0 as u64,
            m: (slots / 2) as u64,
            k,
            ..Default::default()
        };
        counters.phases = 0;
        let mut dist = vec![0usize; cap_supers];
        dist[w.s] = n0;
        Ok(Solver {
            sadj: w.adj.clone().into_iter().chain((n0..cap_supers).map(|_| Vec::new())).collect(),
            n0,
            p,
            audit: opts.audit,
            disable_jump: opts.disable_jump,
            gamma2: opts.gamma2,
            delta_exp: 0,
            delta0_exp: 0,
            floor_exp: 0,
            phase: 0,
            flow: vec![Quantity::ZERO; slots],
            excess: vec![Quantity::ZERO; cap_supers],
            dist,
            cursor: vec![0; cap_supers],
            relabel_ops: vec![0; cap_supers],
            super_of: (0..n0).collect(),
            members: (0..cap_supers)
                .map(|v| if v < n0 { vec![v] } else { Vec::new() })
                .collect(),
            alive: (0..cap_supers).map(|v| v < n0).collect(),
            next_super: n0,
            n_alive: n0,
            ss: w.s,
            tt: w.t,
            frozen: vec![false; slots],
            records: Vec::new(),
            large_end: vec![0; cap_supers],
            medium_end: vec![0; cap_supers],
            pair_seen_large: vec![false; slots / 2],
            abundant: vec![false; slots],
            merge_queue: std::collections::VecDeque::new(),
            pair_queued: vec![false; slots / 2],
            buckets: vec![Vec::new(); (2 * p.q + 2) as usize],
            bucket_head: 0,
            bucket_of: vec![-1; slots],
            buckets_dirty: false,
            abundant_floor: vec![Quantity::ZERO; slots],
            imb: vec![Quantity::ZERO; cap_supers],
            nclass: vec![NodeClass::Normal; cap_supers],
            violating_prev: vec![false; cap_supers],
            violating_since: vec![0; cap_supers],
            imbalance_since: vec![-1; cap_supers],
            in_f: vec![false; cap_supers],
            parent: vec![-1; cap_supers],
            children: vec![Vec::new(); cap_supers],
            needed: vec![Quantity::ZERO; cap_supers],
            reserve: vec![Quantity::ZERO; cap_supers],
            viol_leaves: vec![0; cap_supers],
            sel: Selection::new(cap_supers, n0 + 2),
            counters,
            events: 0,
            phase_flow: Quantity::ZERO,
            phase_large: 0,
            phase_pushes: 0,
            specials_at_start: Vec::new(),
            w,
        })
    }

    // --- quantities -------------------------------------------------------

    fn delta(&self) -> Quantity {
        Quantity::pow2(self.delta_exp)
    }

    fn half_delta(&self) -> Quantity {
        Quantity::pow2(self.delta_exp - 1)
    }

    fn quantum_exp(&self) -> i32 {
        self.delta_exp - self.p.kappa as i32
    }

    /// delta / k, the push and pull granularity.
    fn quantum(&self) -> Quantity {
        Quantity::pow2(self.quantum_exp())
    }

    /// eps * delta, the violation threshold.
    fn eps_delta(&self) -> Quantity {
        Quantity::pow2(self.delta_exp + self.p.eps_exp)
    }

    /// eps^4 * delta, the special-node imbalance tolerance.
    fn eps4_delta(&self) -> Quantity {
        Quantity::pow2(self.delta_exp + 4 * self.p.eps_exp)
    }

    /// 1.5 eps^4 delta, the special-node excess slack.
    fn special_slack(&self) -> Quantity {
        Quantity::pow2(self.delta_exp + 4 * self.p.eps_exp - 1).mul_int(3)
    }

    /// M * delta, the abundance threshold.
    fn m_delta(&self) -> Quantity {
        Quantity::pow2(self.delta_exp + self.p.m_exp)
    }

    /// eps^2 delta / k, the delivery promised to a violating node.
    fn promise(&self) -> Quantity {
        Quantity::pow2(self.delta_exp + 2 * self.p.eps_exp - self.p.kappa as i32)
    }

    fn residual(&self, a: usize) -> Quantity {
        Quantity::from_int(self.w.cap[a]) - self.flow[a] + self.flow[a ^ 1]
    }

    fn cur_tail(&self, a: usize) -> usize {
        self.super_of[self.w.tail[a] as usize]
    }

    fn cur_head(&self, a: usize) -> usize {
        self.super_of[self.w.head[a] as usize]
    }

    fn is_terminal(&self, v: usize) -> bool {
        v == self.ss || v == self.tt
    }

    /// Reduced excess driving selection and push sizes.
    fn ehat(&self, v: usize) -> Quantity {
        if self.in_f[v] && self.parent[v] < 0 {
            return self.excess[v] - self.reserve[v] - self.eps_delta();
        }
        match self.nclass[v] {
            NodeClass::Special => self.excess[v] + self.special_slack(),
            _ => self.excess[v] - self.eps_delta(),
        }
    }

    fn sel_class(&self, v: usize) -> ExcessClass {
        if !self.alive[v] || self.is_terminal(v) {
            return ExcessClass::Inactive;
        }
        // Forest members only act as couriers; with no violating node below
        // them they have nothing to deliver and sit out.
        if self.in_f[v] && self.viol_leaves[v] == 0 {
            return ExcessClass::Inactive;
        }
        let ehat = self.ehat(v);
        if ehat >= self.half_delta() {
            ExcessClass::Large
        } else if ehat >= self.quantum() {
            ExcessClass::Medium
        } else {
            ExcessClass::Inactive
        }
    }

    fn update_sel(&mut self, v: usize) {
        if v < self.alive.len() && self.alive[v] && !self.is_terminal(v) {
            self.sel.update(v, self.dist[v], self.sel_class(v));
        } else if v < self.alive.len() {
            self.sel.update(v, 0, ExcessClass::Inactive);
        }
    }

    fn rebuild_selection(&mut self) {
        self.sel.clear();
        for v in 0..self.next_super {
            if self.alive[v] && !self.is_terminal(v) {
                self.sel.update(v, self.dist[v], self.sel_class(v));
            }
        }
    }

    // --- initialization ---------------------------------------------------

    /// Start state: saturate the source, fix the scale from the largest
    /// excess, align the smaller residual of every pair to the granularity,
    /// then lend from the sink until every node clears the violation
    /// threshold.
    fn init_flows(&mut self) {
        let s = self.w.s;
        for i in 0..self.w.adj[s].len() {
            let a = self.w.adj[s][i];
            let r = self.residual(a);
            if r > Quantity::ZERO {
                self.raw_push(a, r);
            }
        }
        let max_e = (0..self.n0)
            .filter(|&v| v != s)
            .map(|v| self.excess[v])
            .max()
            .unwrap_or(Quantity::ZERO);
        self.delta0_exp = if max_e > Quantity::ZERO {
            max_e.ceil_pow2_exp()
        } else {
            0
        };
        self.delta_exp = self.delta0_exp;
        self.floor_exp =
            self.p.sigma as i32 - 3 - (self.n0 as u128).next_power_of_two().trailing_zeros() as i32;

        // Align each pair: the side with the smaller residual sheds its
        // remainder modulo delta/k, so smaller residuals are multiples of the
        // granularity from the start.
        let qe = self.quantum_exp();
        for pair in 0..self.w.arc_count() / 2 {
            let a = 2 * pair;
            let (ra, rb) = (self.residual(a), self.residual(a ^ 1));
            let (low, r) = if ra < rb {
                (a, ra)
            } else if rb < ra {
                (a ^ 1, rb)
            } else {
                continue;
            };
            let rem = r.mod_pow2(qe);
            if rem > Quantity::ZERO {
                self.raw_push(low, rem);
            }
        }

        // Lend delta/k at a time from the sink until nothing is violating.
        let eps_delta = self.eps_delta();
        let quantum = self.quantum();
        let mut lend_slot = vec![usize::MAX; self.n0];
        for a in 0..self.w.arc_count() {
            if self.w.tail[a] as usize == self.w.t {
                lend_slot[self.w.head[a] as usize] = a;
            }
        }
        for v in 0..self.n0 {
            if v == self.w.s || v == self.w.t {
                continue;
            }
            while self.excess[v] < eps_delta {
                let a = lend_slot[v];
                assert!(a != usize::MAX, "missing lending arc for node {v}");
                assert!(self.residual(a) >= quantum, "lending arc exhausted at init");
                self.raw_push(a, quantum);
            }
        }
    }

    /// Push without class bookkeeping; only valid before the first phase.
    fn raw_push(&mut self, a: usize, delta: Quantity) {
        debug_assert!(delta > Quantity::ZERO && delta <= self.residual(a));
        let back = self.flow[a ^ 1];
        if delta <= back {
            self.flow[a ^ 1] = back - delta;
        } else {
            self.flow[a] += delta - back;
            self.flow[a ^ 1] = Quantity::ZERO;
        }
        let (i, j) = (self.cur_tail(a), self.cur_head(a));
        self.excess[i] -= delta;
        self.excess[j] += delta;
        self.imb[i] -= delta;
        self.imb[j] += delta;
    }

    // --- main loop --------------------------------------------------------

    fn run(&mut self) {
        let span = (self.delta0_exp - self.floor_exp).max(0) as u64;
        let phase_cap = span / self.p.kappa as u64 + 8;
        loop {
            self.phase += 1;
            assert!(
                self.phase <= phase_cap,
                "phase {} exceeds the structural cap {phase_cap} (delta did not shrink?)",
                self.phase
            );
            self.phase_start();
            self.push_loop();
            let useful = self.phase_pushes > 0
                || (0..self.next_super).any(|v| self.alive[v] && self.in_f[v]);
            let flow_ratio = self.phase_flow.ratio_to_pow2(self.delta_exp);
            self.counters.end_phase(
                useful,
                flow_ratio,
                self.phase_large,
                self.phase_pushes,
            );
            if self.audit {
                self.audit_phase_end();
            }
            match self.next_scale() {
                Some(exp) => self.delta_exp = exp,
                None => break,
            }
        }
    }

    fn push_loop(&mut self) {
        while let Some(v) = self.sel.select() {
            if self.in_f[v] {
                self.frf_push(v);
            } else {
                self.push_or_relabel(v);
            }
            self.delete_and_merge();
            self.events += 1;
            if self.audit {
                self.audit_after_op(v);
            }
        }
    }

    fn find_admissible(&mut self, v: usize) -> Option<usize> {
        while self.cursor[v] < self.sadj[v].len() {
            let a = self.sadj[v][self.cursor[v]];
            debug_assert!(!self.frozen[a]);
            let j = self.cur_head(a);
            debug_assert!(j != v, "internal arc survived adjacency rebuild");
            if self.dist[v] == self.dist[j] + 1 && self.residual(a) > Quantity::ZERO {
                return Some(a);
            }
            self.cursor[v] += 1;
        }
        None
    }

    fn push_or_relabel(&mut self, v: usize) {
        if let Some(a) = self.find_admissible(v) {
            self.ladder_push(v, a);
        } else {
            self.dist[v] += 1;
            self.cursor[v] = 0;
            self.relabel_ops[v] += 1;
            self.counters.record_relabel(self.relabel_ops[v]);
            assert!(
                self.dist[v] <= self.n_alive + 1,
                "label of super {v} exceeded n+1"
            );
            assert!(
                self.relabel_ops[v] <= (self.n0 + 1) as u64,
                "super {v} relabeled more than n+1 times"
            );
            self.update_sel(v);
        }
    }

    /// Push-size ladder. `D` is half the scale for large reduced excess,
    /// otherwise the reduced excess rounded down to the granularity; the
    /// residual pattern of the pair then picks the amount that keeps the
    /// smaller residual aligned.
    fn ladder_push(&mut self, v: usize, a: usize) {
        let ehat = self.ehat(v);
        let half = self.half_delta();
        let quantum = self.quantum();
        let qe = self.quantum_exp();
        let d_amt = if ehat >= half {
            half
        } else {
            ehat - ehat.mod_pow2(qe)
        };
        debug_assert!(d_amt >= quantum, "selected node has less than delta/k to give");
        let r = self.residual(a);
        let rr = self.residual(a ^ 1);
        let large_sel = d_amt == half;
        let (amount, class) = if r < d_amt {
            (r, PushClass::Saturating)
        } else if r < rr {
            (
                d_amt,
                if large_sel {
                    PushClass::Large
                } else {
                    PushClass::Medium
                },
            )
        } else if r == rr {
            let rem = r.mod_pow2(qe);
            let amt = if rem.is_zero() {
                d_amt
            } else {
                d_amt - quantum + rem
            };
            (amt, PushClass::Other)
        } else if r - rr >= d_amt.mul_pow2(1) {
            (
                d_amt,
                if large_sel {
                    PushClass::Large
                } else {
                    PushClass::Medium
                },
            )
        } else {
            ((r - rr).half(), PushClass::Other)
        };
        debug_assert!(amount > Quantity::ZERO);
        if class == PushClass::Large {
            self.phase_large += 1;
        }
        self.counters.record_push(class);
        self.push_flow(a, amount);
        debug_assert_eq!(self.cur_tail(a), v);
    }

    /// The one true push: moves flow, maintains excesses, imbalances,
    /// abundance flags, buckets, and selection.
    fn push_flow(&mut self, a: usize, delta: Quantity) {
        debug_assert!(delta > Quantity::ZERO && delta <= self.residual(a));
        debug_assert!(!self.frozen[a]);
        let (i, j) = (self.cur_tail(a), self.cur_head(a));
        debug_assert!(i != j);
        let back = self.flow[a ^ 1];
        if delta <= back {
            self.flow[a ^ 1] = back - delta;
        } else {
            self.flow[a] += delta - back;
            self.flow[a ^ 1] = Quantity::ZERO;
        }
        self.excess[i] -= delta;
        self.excess[j] += delta;
        // Imbalance: excess term, plus residual terms for whichever direction
        // of this pair is currently anti-abundant (reverse abundant, itself
        // not). A push along the pair shifts both residuals by delta, and the
        // anti-abundant terms cancel the excess terms exactly.
        let anti_a = self.abundant[a ^ 1] && !self.abundant[a];
        let anti_rev = self.abundant[a] && !self.abundant[a ^ 1];
        if !anti_a && !anti_rev {
            self.imb[i] -= delta;
            self.imb[j] += delta;
        }
        self.phase_flow += delta;
        self.phase_pushes += 1;
        // Residuals moved: the pair may cross the abundance threshold, and
        // its predicted crossing bucket shifts.
        self.refresh_pair_tracking(a);
        self.update_sel(i);
        self.update_sel(j);
        if self.audit {
            self.audit_pair_alignment(a);
        }
    }
}
