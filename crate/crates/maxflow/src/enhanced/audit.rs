//! Audit-mode checks: every incrementally maintained structure is recomputed
//! from scratch and compared exactly. Any mismatch panics with context.

use super::*;

impl Solver {
    pub(super) fn audit_invariant1(&mut self, context: &str) {
        self.counters.audit_checks += 1;
        assert_eq!(self.dist[self.tt], 0, "{context}: sink label moved");
        assert_eq!(
            self.dist[self.ss],
            self.n_alive,
            "{context}: source label off the live node count"
        );
        for a in 0..self.w.arc_count() {
            if self.frozen[a] {
                continue;
            }
            let (i, j) = (self.cur_tail(a), self.cur_head(a));
            if i == self.ss {
                // the source never pushes after initialization, so residual
                // arcs out of it carry no admissibility meaning
                continue;
            }
            if self.residual(a) > Quantity::ZERO {
                assert!(
                    self.dist[i] <= self.dist[j] + 1,
                    "{context}: residual arc {a} rises by more than one: \
                     d({i})={} d({j})={}",
                    self.dist[i],
                    self.dist[j]
                );
            }
        }
    }

    /// The smaller residual of every live pair is a multiple of delta/k.
    pub(super) fn audit_invariant2(&mut self, context: &str) {
        self.counters.audit_checks += 1;
        for pair in 0..self.w.arc_count() / 2 {
            let a = pair * 2;
            if self.frozen[a] {
                continue;
            }
            let (ra, rb) = (self.residual(a), self.residual(a ^ 1));
            let lesser = if ra < rb {
                ra
            } else if rb < ra {
                rb
            } else {
                continue;
            };
            assert!(
                lesser.is_multiple_of_pow2(self.quantum_exp()),
                "{context}: pair {pair} lost residual alignment: {lesser:?}"
            );
        }
    }

    /// Same check for a single pair, run after each push.
    pub(super) fn audit_pair_alignment(&mut self, a: usize) {
        let (ra, rb) = (self.residual(a), self.residual(a ^ 1));
        let lesser = if ra < rb {
            ra
        } else if rb < ra {
            rb
        } else {
            return;
        };
        assert!(
            lesser.is_multiple_of_pow2(self.quantum_exp()),
            "pair {} lost residual alignment after push: {lesser:?}",
            a / 2
        );
    }

    pub(super) fn audit_excesses(&mut self) {
        self.counters.audit_checks += 1;
        let mut scratch = vec![Quantity::ZERO; self.next_super];
        for a in 0..self.w.arc_count() {
            let f = self.flow[a];
            if f.is_zero() {
                continue;
            }
            scratch[self.cur_tail(a)] -= f;
            scratch[self.cur_head(a)] += f;
        }
        for v in 0..self.next_super {
            if self.alive[v] {
                assert_eq!(
                    scratch[v], self.excess[v],
                    "stored excess of super {v} drifted"
                );
            }
        }
    }

    pub(super) fn audit_imbalances(&mut self) {
        self.counters.audit_checks += 1;
        for v in 0..self.next_super {
            if !self.alive[v] {
                continue;
            }
            let mut want = self.excess[v];
            for &a in &self.sadj[v] {
                if self.abundant[a ^ 1] && !self.abundant[a] {
                    want -= self.residual(a);
                }
                if self.abundant[a] && !self.abundant[a ^ 1] {
                    want += self.residual(a ^ 1);
                }
            }
            assert_eq!(want, self.imb[v], "stored imbalance of super {v} drifted");
        }
    }

    /// Detection completeness: every large-pair direction is either marked
    /// abundant or parked in a bucket, and nothing parked is already over
    /// the threshold.
    pub(super) fn audit_buckets(&mut self) {
        self.counters.audit_checks += 1;
        for pair in 0..self.pair_seen_large.len() {
            if !self.pair_seen_large[pair] {
                continue;
            }
            for d in [pair * 2, pair * 2 + 1] {
                if self.abundant[d] || self.frozen[d] {
                    continue;
                }
                assert!(
                    self.bucket_of[d] >= 0,
                    "large direction {d} escaped bucket tracking"
                );
                assert!(
                    self.residual(d) < self.m_delta(),
                    "direction {d} crossed the abundance threshold undetected"
                );
            }
        }
    }

    /// Abundance is monotone and abundant residuals stay above their
    /// recorded lifetime floor (and in particular positive).
    pub(super) fn audit_abundant(&mut self) {
        self.counters.audit_checks += 1;
        for d in 0..self.w.arc_count() {
            if !self.abundant[d] || self.frozen[d] {
                continue;
            }
            let r = self.residual(d);
            assert!(r > Quantity::ZERO, "abundant direction {d} drained to zero");
            assert!(
                r >= self.abundant_floor[d],
                "abundant direction {d} fell below its lifetime floor: \
                 {r:?} < {:?}",
                self.abundant_floor[d]
            );
        }
    }

    pub(super) fn audit_frf(&mut self) {
        self.counters.audit_checks += 1;
        for v in 0..self.next_super {
            if !self.alive[v] {
                continue;
            }
            if !self.in_f[v] {
                assert!(self.needed[v].is_zero(), "promise outside the forest at {v}");
                assert!(self.reserve[v].is_zero(), "reserve outside the forest at {v}");
                assert_eq!(self.viol_leaves[v], 0);
                assert!(self.parent[v] < 0 && self.children[v].is_empty());
                continue;
            }
            if self.parent[v] >= 0 {
                let a = self.parent[v] as usize;
                assert!(self.tree_eligible(a), "forest edge into {v} went stale");
                let p = self.cur_tail(a);
                assert!(self.in_f[p], "parent of {v} left the forest");
                assert!(self.children[p].contains(&a));
            } else {
                if !self.is_terminal(v) {
                    assert!(
                        self.nclass[v] != NodeClass::Violating,
                        "forest root {v} is violating"
                    );
                }
                assert!(self.needed[v].is_zero(), "root {v} holds a promise");
            }
            for &c in &self.children[v] {
                assert_eq!(self.cur_tail(c), v);
                assert!(self.in_f[self.cur_head(c)]);
                assert!(!self.frozen[c]);
            }
            let _ = self.root_of(v);
            let mut want = (self.nclass[v] == NodeClass::Violating) as u32;
            for &c in &self.children[v] {
                want += self.viol_leaves[self.cur_head(c)];
            }
            assert_eq!(
                want, self.viol_leaves[v],
                "violating-descendant count of {v} drifted"
            );
        }
        // reserve at each root equals the outstanding promises below it
        for v in 0..self.next_super {
            if !self.alive[v] || !self.in_f[v] || self.parent[v] >= 0 {
                continue;
            }
            let mut promised = Quantity::ZERO;
            let mut stack = vec![v];
            while let Some(x) = stack.pop() {
                promised += self.needed[x];
                for &c in &self.children[x] {
                    stack.push(self.cur_head(c));
                }
            }
            assert_eq!(promised, self.reserve[v], "root {v} reserve out of sync");
        }
    }

    fn audit_selection(&mut self) {
        self.counters.audit_checks += 1;
        let expected: Vec<(usize, ExcessClass)> = (0..self.sel_len())
            .map(|v| {
                if v < self.next_super && self.alive[v] && !self.is_terminal(v) {
                    (self.dist[v], self.sel_class(v))
                } else {
                    (0, ExcessClass::Inactive)
                }
            })
            .collect();
        self.sel.verify_against(|v| expected[v]);
    }

    fn sel_len(&self) -> usize {
        2 * self.n0
    }

    pub(super) fn audit_phase_start(&mut self) {
        self.audit_invariant1("phase start");
        self.audit_invariant2("phase start");
        self.audit_excesses();
        self.audit_imbalances();
        self.audit_buckets();
        self.audit_abundant();
        self.audit_frf();
    }

    pub(super) fn audit_after_op(&mut self, _v: usize) {
        self.audit_invariant1("after operation");
        self.audit_frf();
        // the special floor holds at every moment, not just phase ends
        for i in 0..self.specials_at_start.len() {
            let v = self.specials_at_start[i];
            if self.alive[v] && self.nclass[v] == NodeClass::Special {
                assert!(
                    self.excess[v] >= -self.special_slack(),
                    "special node {v} overdrew its slack: {:?}",
                    self.excess[v]
                );
            }
        }
        if self.events % 1000 == 999 {
            self.audit_selection();
            self.audit_excesses();
            self.audit_imbalances();
        }
    }

    pub(super) fn audit_phase_end(&mut self) {
        self.counters.audit_checks += 1;
        let n2 = (self.n0 as i128) * (self.n0 as i128);
        let budget = self.delta().mul_int(5 * n2);
        assert!(
            self.phase_flow <= budget,
            "phase {} moved {:?}, over the 5 n^2 delta budget",
            self.phase,
            self.phase_flow
        );
        assert!(
            self.phase_large <= 4 * (n2 as u64),
            "phase {}: {} large pushes exceed 4 n^2",
            self.phase,
            self.phase_large
        );
        // nodes special for the whole phase obey the quantized shape of
        // their reduced excess
        let slack3 = self.eps4_delta().mul_int(3);
        for i in 0..self.specials_at_start.len() {
            let v = self.specials_at_start[i];
            if !self.alive[v] || self.nclass[v] != NodeClass::Special {
                continue;
            }
            assert!(
                self.excess[v] >= -self.special_slack(),
                "special node {v} overdrew its slack: {:?}",
                self.excess[v]
            );
            let ehat = self.ehat(v);
            let rem = ehat.mod_pow2(self.quantum_exp());
            assert!(
                rem <= slack3,
                "special node {v}: reduced excess strays from the grid by {rem:?}"
            );
        }
        self.audit_invariant2("phase end");
    }
}
