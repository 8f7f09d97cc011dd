//! Cycle contraction. Supers connected by a cycle of abundant arcs merge
//! into a fresh super id; the cycle arcs freeze with their current flow and
//! a record is kept so the exit pass can restore a conserved flow on the
//! original nodes. Labels are recomputed exactly afterwards, and forest
//! edges that lost label compatibility are dismantled.

use super::*;

impl Solver {
    /// Contract at most one queued bi-abundant pair. Pairs whose endpoints
    /// are both forest members wait; a source-sink pair is dropped outright.
    pub(super) fn try_merge_once(&mut self) -> bool {
        let mut deferred = Vec::new();
        let mut done = false;
        while let Some(pair) = self.merge_queue.pop_front() {
            let a = pair * 2;
            if self.frozen[a] {
                self.pair_queued[pair] = false;
                continue;
            }
            let (u, w) = (self.cur_tail(a), self.cur_head(a));
            debug_assert!(u != w, "internal pair left unfrozen");
            debug_assert!(self.abundant[a] && self.abundant[a ^ 1]);
            if self.is_terminal(u) && self.is_terminal(w) {
                self.pair_queued[pair] = false;
                continue;
            }
            if self.in_f[u] && self.in_f[w] {
                deferred.push(pair);
                continue;
            }
            self.contract(&[u, w], &[a, a ^ 1]);
            done = true;
            break;
        }
        for p in deferred {
            self.merge_queue.push_back(p);
        }
        done
    }

    /// Merge the cycle into a fresh super. `cycle_arcs[i]` runs from
    /// `cycle_nodes[i]` to `cycle_nodes[i+1 mod len]`.
    pub(super) fn contract(&mut self, cycle_nodes: &[usize], cycle_arcs: &[usize]) {
        let l = cycle_nodes.len();
        debug_assert!(l >= 2 && cycle_arcs.len() == l);
        for i in 0..l {
            debug_assert_eq!(self.cur_tail(cycle_arcs[i]), cycle_nodes[i]);
            debug_assert_eq!(self.cur_head(cycle_arcs[i]), cycle_nodes[(i + 1) % l]);
        }
        let nw = self.next_super;
        self.next_super += 1;
        assert!(nw < 2 * self.n0, "contraction produced too many supers");
        self.counters.contractions += 1;
        assert!(
            self.counters.contractions < self.n0 as u64,
            "more contractions than nodes"
        );

        // capture the record before any rerouting
        let mut member_positions = Vec::new();
        let mut has_s = vec![false; l];
        let mut has_t = vec![false; l];
        for (pos, &cn) in cycle_nodes.iter().enumerate() {
            for &orig in &self.members[cn] {
                member_positions.push((orig, pos));
            }
            has_s[pos] = cn == self.ss;
            has_t[pos] = cn == self.tt;
        }
        let carries_s = has_s.iter().any(|&b| b);
        let carries_t = has_t.iter().any(|&b| b);
        assert!(
            !(carries_s && carries_t),
            "cycle may not contain both terminals"
        );
        if carries_s || carries_t {
            assert_eq!(l, 2, "terminal merges only arise from single pairs");
        }
        self.records.push(Contraction {
            cycle_arcs: cycle_arcs.to_vec(),
            member_positions,
            has_s,
            has_t,
        });

        // membership and liveness
        let mut merged_members = Vec::new();
        for &cn in cycle_nodes {
            merged_members.append(&mut self.members[cn]);
        }
        for &orig in &merged_members {
            self.super_of[orig] = nw;
        }
        self.members[nw] = merged_members;
        for &cn in cycle_nodes {
            self.alive[cn] = false;
        }
        self.alive[nw] = true;
        self.n_alive -= l - 1;
        if carries_s {
            self.ss = nw;
        }
        if carries_t {
            self.tt = nw;
        }

        let mut total = Quantity::ZERO;
        for &cn in cycle_nodes {
            total += self.excess[cn];
        }
        self.excess[nw] = total;

        // forest role: at most one cycle node may be a member
        let f_members: Vec<usize> = cycle_nodes
            .iter()
            .copied()
            .filter(|&cn| self.in_f[cn])
            .collect();
        assert!(
            f_members.len() <= 1,
            "contracted cycle touched two forest nodes"
        );
        let mut was_viol_f = false;
        if let Some(&fm) = f_members.first() {
            self.in_f[nw] = true;
            self.parent[nw] = self.parent[fm];
            self.children[nw] = std::mem::take(&mut self.children[fm]);
            self.needed[nw] = self.needed[fm];
            self.reserve[nw] = self.reserve[fm];
            self.viol_leaves[nw] = self.viol_leaves[fm];
            self.violating_since[nw] = self.violating_since[fm];
            was_viol_f = self.nclass[fm] == NodeClass::Violating;
        } else {
            self.in_f[nw] = false;
            self.parent[nw] = -1;
            self.children[nw].clear();
            self.needed[nw] = Quantity::ZERO;
            self.reserve[nw] = Quantity::ZERO;
            self.viol_leaves[nw] = 0;
        }
        for &cn in cycle_nodes {
            self.in_f[cn] = false;
            self.parent[cn] = -1;
            self.children[cn].clear();
            self.needed[cn] = Quantity::ZERO;
            self.reserve[cn] = Quantity::ZERO;
            self.viol_leaves[cn] = 0;
        }

        // adjacency: arcs between members freeze with their flow; the rest
        // merge sorted by (bicap desc, slot asc), matching build order
        let mut merged_adj = Vec::new();
        for ci in 0..l {
            let cn = cycle_nodes[ci];
            let list = std::mem::take(&mut self.sadj[cn]);
            for a in list {
                if self.cur_head(a) == nw {
                    if !self.frozen[a] {
                        self.frozen[a] = true;
                        self.frozen[a ^ 1] = true;
                        self.bucket_of[a] = -1;
                        self.bucket_of[a ^ 1] = -1;
                    }
                } else {
                    merged_adj.push(a);
                }
            }
        }
        let net = &self.w;
        merged_adj.sort_by(|&x, &y| net.bicap(y).cmp(&net.bicap(x)).then(x.cmp(&y)));
        self.sadj[nw] = merged_adj;
        self.init_pointers(nw);
        self.relabel_ops[nw] = 0;

        self.recompute_labels();
        for v in 0..self.next_super {
            if self.alive[v] {
                self.cursor[v] = 0;
            }
        }

        // imbalance of the merged node from scratch
        let mut imb = self.excess[nw];
        for i in 0..self.sadj[nw].len() {
            let a = self.sadj[nw][i];
            if self.abundant[a ^ 1] && !self.abundant[a] {
                imb -= self.residual(a);
            }
            if self.abundant[a] && !self.abundant[a ^ 1] {
                imb += self.residual(a ^ 1);
            }
        }
        self.imb[nw] = imb;

        self.classify_one(nw);
        self.violating_prev[nw] = false;
        self.imbalance_since[nw] = -1;
        if self.in_f[nw] {
            let now_viol = self.nclass[nw] == NodeClass::Violating;
            if now_viol != was_viol_f {
                self.bump_viol_counts(nw, if now_viol { 1 } else { -1 });
            }
        }

        self.eligibility_sweep();
        self.rebuild_selection();
        if self.audit {
            self.audit_invariant1("after contraction");
        }
    }

    /// Exact distances to the sink over the live residual graph. Nodes that
    /// cannot reach the sink sit one above the source, where the helper arc
    /// back to the source is admissible and drains them. The source label is
    /// pinned to the live node count so the per-node relabel budget holds
    /// across contractions.
    fn recompute_labels(&mut self) {
        let unreachable = self.n_alive + 1;
        for v in 0..self.next_super {
            if self.alive[v] {
                self.dist[v] = unreachable;
            }
        }
        let mut queue = std::collections::VecDeque::new();
        self.dist[self.tt] = 0;
        queue.push_back(self.tt);
        while let Some(x) = queue.pop_front() {
            for i in 0..self.sadj[x].len() {
                let b = self.sadj[x][i];
                let y = self.cur_head(b);
                if self.dist[y] == unreachable && self.residual(b ^ 1) > Quantity::ZERO {
                    self.dist[y] = self.dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        self.dist[self.ss] = self.n_alive;
    }

    /// Global label changes can break the compatibility of forest edges.
    /// Dismantle every subtree hanging from a stale edge and re-wire its
    /// violating members, keeping their original promised amounts.
    fn eligibility_sweep(&mut self) {
        loop {
            let mut broken = None;
            for v in 0..self.next_super {
                if !self.alive[v] || !self.in_f[v] || self.parent[v] < 0 {
                    continue;
                }
                let a = self.parent[v] as usize;
                debug_assert!(!self.frozen[a], "forest arc frozen by contraction");
                if self.dist[self.cur_head(a)] > self.dist[self.cur_tail(a)] + 1 {
                    broken = Some(v);
                    break;
                }
            }
            let Some(v) = broken else { break };
            let displaced = self.dismantle_subtree(v);
            for (rep, saved) in displaced {
                let cur = self.super_of[rep];
                if self.nclass[cur] != NodeClass::Violating {
                    continue;
                }
                if !self.in_f[cur] {
                    self.frf_add(cur);
                }
                let cur = self.super_of[rep];
                if self.in_f[cur] && !saved.is_zero() && self.parent[cur] >= 0 {
                    // restore the original promise terms
                    assert!(saved >= self.needed[cur]);
                    let root = self.root_of(cur);
                    self.reserve[root] += saved - self.needed[cur];
                    self.needed[cur] = saved;
                    self.update_sel(root);
                }
            }
        }
    }
}
