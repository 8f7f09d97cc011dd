//! Per-phase classification: arc size classes with monotone pointers,
//! abundance detection backed by a prediction ring, node classes, and the
//! scale schedule including jumps.

use super::*;

impl Solver {
    // --- arc size classes ---------------------------------------------

    /// bicap >= 2^exp; the exponent can leave the i128 range on either side.
    fn bicap_at_least(&self, a: usize, exp: i32) -> bool {
        let b = self.w.bicap(a);
        if b <= 0 {
            return false;
        }
        if exp <= 0 {
            return true;
        }
        if exp >= 127 {
            return false;
        }
        b >= 1i128 << exp
    }

    /// Large pair: bicap >= 2 M delta.
    fn pair_is_large(&self, a: usize) -> bool {
        self.bicap_at_least(a, self.delta_exp + self.p.m_exp + 1)
    }

    /// Medium or large pair: bicap >= eps^5 delta.
    fn pair_is_medium_up(&self, a: usize) -> bool {
        self.bicap_at_least(a, self.delta_exp + 5 * self.p.eps_exp)
    }

    pub(super) fn has_medium_pair(&self, v: usize) -> bool {
        self.medium_end[v] > self.large_end[v]
    }

    /// Thresholds fall with delta, so arcs migrate small -> medium -> large
    /// and the sorted-adjacency pointers only advance.
    pub(super) fn advance_class_pointers(&mut self) {
        for v in 0..self.next_super {
            if !self.alive[v] {
                continue;
            }
            while self.large_end[v] < self.sadj[v].len()
                && self.pair_is_large(self.sadj[v][self.large_end[v]])
            {
                let a = self.sadj[v][self.large_end[v]];
                self.large_end[v] += 1;
                self.on_pair_large(a);
            }
            if self.medium_end[v] < self.large_end[v] {
                self.medium_end[v] = self.large_end[v];
            }
            while self.medium_end[v] < self.sadj[v].len()
                && self.pair_is_medium_up(self.sadj[v][self.medium_end[v]])
            {
                self.medium_end[v] += 1;
            }
        }
    }

    /// Recompute a merged node's pointers against the current thresholds.
    pub(super) fn init_pointers(&mut self, v: usize) {
        let mut le = 0;
        while le < self.sadj[v].len() && self.pair_is_large(self.sadj[v][le]) {
            le += 1;
        }
        let mut me = le;
        while me < self.sadj[v].len() && self.pair_is_medium_up(self.sadj[v][me]) {
            me += 1;
        }
        self.large_end[v] = le;
        self.medium_end[v] = me;
    }

    // --- abundance ----------------------------------------------------

    fn on_pair_large(&mut self, a: usize) {
        let pair = a / 2;
        if self.pair_seen_large[pair] {
            return;
        }
        self.pair_seen_large[pair] = true;
        for d in [pair * 2, pair * 2 + 1] {
            if !self.abundant[d] && !self.frozen[d] {
                if self.residual(d) >= self.m_delta() {
                    self.mark_abundant(d);
                } else {
                    self.insert_bucket(d);
                }
            }
        }
    }

    /// Re-check both directions of a pair whose residuals just moved.
    pub(super) fn refresh_pair_tracking(&mut self, a: usize) {
        let pair = a / 2;
        if !self.pair_seen_large[pair] {
            return;
        }
        for d in [pair * 2, pair * 2 + 1] {
            if !self.abundant[d] && !self.frozen[d] {
                if self.residual(d) >= self.m_delta() {
                    self.mark_abundant(d);
                } else {
                    self.insert_bucket(d);
                }
            }
        }
    }

    /// The abundance flag is monotone. Flipping it moves the reverse
    /// direction in or out of anti-abundant status, which transfers its
    /// residual terms in the endpoint imbalances.
    pub(super) fn mark_abundant(&mut self, d: usize) {
        debug_assert!(!self.abundant[d] && !self.frozen[d]);
        let (i, j) = (self.cur_tail(d), self.cur_head(d));
        let rev = d ^ 1;
        if self.abundant[rev] {
            // d itself was anti-abundant; its residual leaves both sums.
            let r = self.residual(d);
            self.imb[j] -= r;
            self.imb[i] += r;
        } else {
            // rev becomes anti-abundant; its residual enters both sums.
            let rr = self.residual(rev);
            self.imb[i] += rr;
            self.imb[j] -= rr;
        }
        self.abundant[d] = true;
        // Lifetime residual floor: (3/8) M delta at marking time.
        self.abundant_floor[d] = Quantity::pow2(self.delta_exp + self.p.m_exp - 3).mul_int(3);
        self.bucket_of[d] = -1;
        let pair = d / 2;
        if self.abundant[rev] && !self.pair_queued[pair] {
            self.pair_queued[pair] = true;
            self.merge_queue.push_back(pair);
        }
    }

    /// Park the direction in the ring slot for the phase where its residual
    /// could first reach the abundance threshold. The estimate errs early,
    /// never late; examination re-checks exactly.
    pub(super) fn insert_bucket(&mut self, d: usize) {
        let r = self.residual(d);
        let horizon = self.buckets.len() as u32 - 1;
        let j = if r.is_zero() {
            horizon
        } else {
            let gap = self.delta_exp + self.p.m_exp - r.ceil_pow2_exp();
            if gap <= 0 {
                1
            } else {
                (gap as u32).div_ceil(self.p.kappa).clamp(1, horizon)
            }
        };
        let idx = (self.bucket_head + j as usize) % self.buckets.len();
        self.bucket_of[d] = idx as i32;
        self.buckets[idx].push(d);
    }

    /// Advance the ring by one shrink and examine the due slot. After a jump
    /// the per-phase cadence is broken, so everything is re-binned instead.
    pub(super) fn bucket_step(&mut self) {
        if self.buckets_dirty {
            self.buckets_dirty = false;
            for b in &mut self.buckets {
                b.clear();
            }
            self.bucket_of.iter_mut().for_each(|x| *x = -1);
            for pair in 0..self.pair_seen_large.len() {
                if !self.pair_seen_large[pair] {
                    continue;
                }
                for d in [pair * 2, pair * 2 + 1] {
                    if !self.abundant[d] && !self.frozen[d] {
                        if self.residual(d) >= self.m_delta() {
                            self.mark_abundant(d);
                        } else {
                            self.insert_bucket(d);
                        }
                    }
                }
            }
            return;
        }
        self.bucket_head = (self.bucket_head + 1) % self.buckets.len();
        let due = std::mem::take(&mut self.buckets[self.bucket_head]);
        for d in due {
            if self.bucket_of[d] != self.bucket_head as i32 {
                continue;
            }
            self.bucket_of[d] = -1;
            if self.abundant[d] || self.frozen[d] {
                continue;
            }
            if self.residual(d) >= self.m_delta() {
                self.mark_abundant(d);
            } else {
                self.insert_bucket(d);
            }
        }
    }

    // --- node classes ---------------------------------------------------

    /// Fresh class for a node, used mid-phase for merged supers.
    pub(super) fn classify_one(&mut self, v: usize) {
        let no_medium = !self.has_medium_pair(v);
        self.nclass[v] = if no_medium && self.imb[v].abs() <= self.eps4_delta() {
            NodeClass::Special
        } else if self.excess[v] < self.eps_delta() {
            NodeClass::Violating
        } else {
            NodeClass::Normal
        };
    }

    /// Classify everyone, collect the newly violating, and run the phase
    /// stopwatches (violation duration, contraction deadline).
    fn classify_nodes(&mut self) -> Vec<usize> {
        self.specials_at_start.clear();
        let eps_d = self.eps_delta();
        let eps4_d = self.eps4_delta();
        let mut newly = Vec::new();
        for v in 0..self.next_super {
            if !self.alive[v] || self.is_terminal(v) {
                continue;
            }
            let no_medium = !self.has_medium_pair(v);
            let big_imb = self.imb[v].abs() > eps4_d;
            let cls = if no_medium && !big_imb {
                NodeClass::Special
            } else if self.excess[v] < eps_d {
                NodeClass::Violating
            } else {
                NodeClass::Normal
            };
            self.nclass[v] = cls;
            if cls == NodeClass::Special {
                self.specials_at_start.push(v);
            }
            let viol = cls == NodeClass::Violating;
            if viol {
                if self.audit {
                    assert!(
                        self.excess[v] > -eps_d,
                        "phase {}: violating node {v} fell below -eps*delta: {:?}",
                        self.phase,
                        self.excess[v]
                    );
                }
                if !self.violating_prev[v] {
                    self.violating_since[v] = self.phase;
                    self.counters.newly_violating += 1;
                    newly.push(v);
                } else {
                    let dur = self.phase - self.violating_since[v];
                    self.counters.max_violating_duration =
                        self.counters.max_violating_duration.max(dur);
                    if self.audit {
                        assert!(
                            dur <= (2 * self.p.q + 1) as u64,
                            "node {v} stayed violating beyond 2Q+1 phases"
                        );
                    }
                }
            }
            self.violating_prev[v] = viol;
            // A node stuck without medium pairs but with a large imbalance
            // must gain an incident bi-abundant pair within 7Q phases.
            if no_medium && big_imb {
                if self.imbalance_since[v] < 0 {
                    self.imbalance_since[v] = self.phase as i64;
                } else if self.phase as i64 - self.imbalance_since[v] > (7 * self.p.q) as i64 {
                    let has_bi = self.sadj[v]
                        .iter()
                        .any(|&a| self.abundant[a] && self.abundant[a ^ 1]);
                    if !has_bi {
                        self.counters.imbalance_deadline_misses += 1;
                    }
                    if self.audit {
                        assert!(
                            has_bi,
                            "node {v} held a large imbalance for over 7Q phases \
                             without gaining a bi-abundant pair"
                        );
                    }
                }
            } else {
                self.imbalance_since[v] = -1;
            }
            if !no_medium {
                self.counters.medium_arc_node_phases += 1;
            }
        }
        newly
    }

    // --- phase start ------------------------------------------------------

    pub(super) fn phase_start(&mut self) {
        self.phase_flow = Quantity::ZERO;
        self.phase_large = 0;
        self.phase_pushes = 0;
        self.advance_class_pointers();
        self.bucket_step();
        let newly = self.classify_nodes();
        for v in newly {
            if !self.alive[v] {
                continue;
            }
            if self.in_f[v] {
                // Re-violated inside the forest: keep its place, schedule a
                // delivery, and surface it to the courier counts.
                self.schedule_promise(v);
                self.bump_viol_counts(v, 1);
            } else {
                self.frf_add(v);
            }
        }
        self.frf_pull_round();
        self.delete_and_merge();
        self.rebuild_selection();
        if self.audit {
            self.audit_phase_start();
        }
    }

    // --- scale schedule -----------------------------------------------

    /// Pick the next scale: divide by k, or jump straight to the rounded
    /// excess ceiling when it is far below delta/(kM). Returns None once the
    /// run is over: excess exhausted (jumping), or the scale floor reached.
    pub(super) fn next_scale(&mut self) -> Option<i32> {
        let mut max_pos: Option<Quantity> = None;
        let mut max_neg: Option<Quantity> = None;
        for v in 0..self.next_super {
            if !self.alive[v] || self.is_terminal(v) {
                continue;
            }
            let e = self.excess[v];
            if e.is_positive() && max_pos.is_none_or(|m| e > m) {
                max_pos = Some(e);
            } else if e.is_negative() {
                let ne = -e;
                if max_neg.is_none_or(|m| ne > m) {
                    max_neg = Some(ne);
                }
            }
        }
        if max_pos.is_none() && max_neg.is_none() {
            if self.disable_jump {
                // Stopping on empty excess is the degenerate jump (straight to
                // the floor). With jumps disabled the schedule still walks
                // every scale; the remaining phases are empty but counted.
                let new_exp = self.delta_exp - self.p.kappa as i32;
                if new_exp < self.floor_exp {
                    return None;
                }
                return Some(new_exp);
            }
            return None;
        }
        let g1 = max_pos.unwrap_or(Quantity::ZERO);
        let g2 = match max_neg {
            None => Quantity::ZERO,
            Some(ne) => match self.gamma2 {
                Gamma2Mode::Scaled => ne.mul_pow2(3 * self.p.eps_exp),
                Gamma2Mode::Inverse => ne.mul_pow2(-3 * self.p.eps_exp),
            },
        };
        let gamma = g1.max(g2);
        debug_assert!(gamma > Quantity::ZERO);
        let rounded_exp = gamma.ceil_pow2_exp();
        let jump_gate = self.delta_exp - self.p.kappa as i32 - self.p.m_exp;
        let new_exp = if !self.disable_jump && rounded_exp < jump_gate {
            // Every excess must survive the new, much finer violation
            // threshold, or the scaled gamma underestimated the deficit.
            let bound = Quantity::pow2(rounded_exp + self.p.eps_exp);
            for v in 0..self.next_super {
                if self.alive[v] && !self.is_terminal(v) {
                    assert!(
                        self.excess[v] > -bound,
                        "jump guard: node {v} holds {:?}, below -eps*delta at the \
                         jump target; the scaled gamma2 rule underestimates \
                         deficits here, rerun with the inverse gamma2 rule",
                        self.excess[v]
                    );
                }
            }
            self.buckets_dirty = true;
            rounded_exp
        } else {
            self.delta_exp - self.p.kappa as i32
        };
        if new_exp < self.floor_exp {
            // Remaining excesses are below the resolution that can matter;
            // the exit pipeline drains them and finishes exactly.
            return None;
        }
        Some(new_exp)
    }
}
