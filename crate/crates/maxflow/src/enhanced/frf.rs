//! Flow-return forest: violating nodes are wired to well-funded roots along
//! abundant, label-compatible arcs, receive scheduled `delta/k` deliveries,
//! and leave the forest once healthy again.
//!
//! Tree edges are stored as arc slots; their endpoints are resolved through
//! the contraction map, so merges reroute the forest for free.

use super::*;

enum Search {
    /// Chain from the attachment child down to the violating node, as
    /// (node, parent arc) pairs.
    Graft(Vec<(usize, usize)>),
    /// Directed cycle disjoint from the forest: arcs[i] runs from nodes[i]
    /// to nodes[i+1 mod len].
    Cycle(Vec<usize>, Vec<usize>),
}

impl Solver {
    pub(super) fn root_of(&self, v: usize) -> usize {
        let mut x = v;
        let mut hops = 0;
        while self.parent[x] >= 0 {
            x = self.cur_tail(self.parent[x] as usize);
            hops += 1;
            assert!(hops <= self.next_super, "forest parent chain loops");
        }
        x
    }

    /// Adjust the violating-descendant counts on v and all its ancestors.
    pub(super) fn bump_viol_counts(&mut self, v: usize, by: i32) {
        let mut x = v;
        loop {
            let cur = self.viol_leaves[x] as i64 + by as i64;
            assert!(cur >= 0, "violating-descendant count underflow at {x}");
            self.viol_leaves[x] = cur as u32;
            self.update_sel(x);
            if self.parent[x] < 0 {
                break;
            }
            x = self.cur_tail(self.parent[x] as usize);
        }
    }

    /// Record a delivery promise for a violating forest node, backed by the
    /// root's reserve. Roots and nodes with an outstanding promise keep
    /// their current terms.
    pub(super) fn schedule_promise(&mut self, v: usize) {
        if self.parent[v] < 0 || !self.needed[v].is_zero() {
            return;
        }
        let amt = self.promise();
        self.needed[v] = amt;
        let root = self.root_of(v);
        self.reserve[root] += amt;
        self.update_sel(root);
    }

    /// Wire a violating node into the forest. The reverse search walks
    /// eligible arcs backward until it reaches the forest, a terminal, or a
    /// normal node; revisiting the active path closes an abundant cycle,
    /// which is contracted and the search restarted on the merged node.
    pub(super) fn frf_add(&mut self, v0: usize) {
        let rep = self.members[v0][0];
        let mut rounds = 0;
        loop {
            rounds += 1;
            assert!(rounds <= self.n0 + 2, "forest add failed to settle");
            let v = self.super_of[rep];
            if self.in_f[v] {
                self.schedule_promise(v);
                return;
            }
            if self.nclass[v] != NodeClass::Violating {
                return;
            }
            match self.search_attachment(v) {
                Search::Graft(chain) => {
                    self.graft(chain);
                    self.counters.frf_adds += 1;
                    return;
                }
                Search::Cycle(nodes, arcs) => {
                    self.contract(&nodes, &arcs);
                }
            }
        }
    }

    /// Arc usable as a forest edge: abundant, and pushing along it keeps
    /// the label invariant because the reverse residual it creates rises by
    /// at most one.
    pub(super) fn tree_eligible(&self, a: usize) -> bool {
        self.abundant[a]
            && !self.frozen[a]
            && self.dist[self.cur_head(a)] <= self.dist[self.cur_tail(a)] + 1
    }

    fn search_attachment(&self, v: usize) -> Search {
        struct Frame {
            node: usize,
            scan: usize,
            /// Arc from this node to the previous frame's node.
            arc_to_prev: usize,
        }
        let mut on_path = vec![false; self.next_super];
        let mut visited = vec![false; self.next_super];
        let mut frames = vec![Frame {
            node: v,
            scan: 0,
            arc_to_prev: usize::MAX,
        }];
        on_path[v] = true;
        loop {
            let top = frames.len() - 1;
            let node = frames[top].node;
            let mut advanced = false;
            while frames[top].scan < self.sadj[node].len() {
                let out = self.sadj[node][frames[top].scan];
                frames[top].scan += 1;
                let in_arc = out ^ 1;
                let p = self.cur_head(out);
                if !self.tree_eligible(in_arc) || visited[p] {
                    continue;
                }
                if on_path[p] {
                    // cycle p -> node -> ... -> p: the found arc, then the
                    // stored arcs back up the path
                    let j = frames.iter().position(|f| f.node == p).unwrap();
                    let mut nodes = vec![p];
                    let mut arcs = vec![in_arc];
                    for i in (j + 1..frames.len()).rev() {
                        nodes.push(frames[i].node);
                        arcs.push(frames[i].arc_to_prev);
                    }
                    return Search::Cycle(nodes, arcs);
                }
                let settles = self.in_f[p]
                    || self.is_terminal(p)
                    || self.nclass[p] == NodeClass::Normal;
                if settles {
                    let mut chain = vec![(node, in_arc)];
                    for i in (1..frames.len()).rev() {
                        chain.push((frames[i - 1].node, frames[i].arc_to_prev));
                    }
                    return Search::Graft(chain);
                }
                frames.push(Frame {
                    node: p,
                    scan: 0,
                    arc_to_prev: in_arc,
                });
                on_path[p] = true;
                advanced = true;
                break;
            }
            if advanced {
                continue;
            }
            let done = frames.pop().unwrap();
            on_path[done.node] = false;
            visited[done.node] = true;
            assert!(
                !frames.is_empty(),
                "violating node {v} has no abundant route to the forest, a terminal, \
                 or a normal node"
            );
        }
    }

    /// Install a discovered chain. The chain runs from the attachment
    /// point's new child down to the violating node; the attachment point
    /// becomes a root if it was outside the forest.
    fn graft(&mut self, chain: Vec<(usize, usize)>) {
        let top_arc = chain[0].1;
        let anchor = self.cur_tail(top_arc);
        if !self.in_f[anchor] {
            self.in_f[anchor] = true;
            self.parent[anchor] = -1;
            debug_assert!(self.reserve[anchor].is_zero() && self.needed[anchor].is_zero());
            self.viol_leaves[anchor] = 0;
        }
        for &(node, arc) in &chain {
            debug_assert!(!self.in_f[node]);
            debug_assert_eq!(self.cur_head(arc), node);
            self.in_f[node] = true;
            self.parent[node] = arc as i64;
            self.viol_leaves[node] = 0;
            let p = self.cur_tail(arc);
            self.children[p].push(arc);
        }
        // violating counts bottom-up along the chain, then into the old tree
        let mut carried = 0u32;
        for &(node, _) in chain.iter().rev() {
            carried += (self.nclass[node] == NodeClass::Violating) as u32;
            self.viol_leaves[node] = carried;
            self.update_sel(node);
        }
        if carried > 0 {
            self.bump_viol_counts(anchor, carried as i32);
        } else {
            self.update_sel(anchor);
        }
        for &(node, _) in &chain {
            if self.nclass[node] == NodeClass::Violating {
                self.schedule_promise(node);
            }
        }
    }

    /// Phase-start deliveries: every violating forest node whose promise has
    /// caught up with the granularity gets delta/k along its root path.
    pub(super) fn frf_pull_round(&mut self) {
        let quantum = self.quantum();
        let due: Vec<usize> = (0..self.next_super)
            .filter(|&v| {
                self.alive[v]
                    && self.in_f[v]
                    && self.parent[v] >= 0
                    && self.nclass[v] == NodeClass::Violating
                    && self.needed[v] >= quantum
            })
            .collect();
        for v in due {
            if self.alive[v] && self.in_f[v] && self.nclass[v] == NodeClass::Violating {
                self.frf_pull(v);
            }
        }
    }

    fn frf_pull(&mut self, v: usize) {
        let mut arcs = Vec::new();
        let mut x = v;
        while self.parent[x] >= 0 {
            let a = self.parent[x] as usize;
            arcs.push(a);
            x = self.cur_tail(a);
        }
        let root = x;
        let q = self.quantum();
        for &a in arcs.iter().rev() {
            assert!(self.residual(a) >= q, "pull path lost its abundant capacity");
            self.push_flow(a, q);
        }
        self.counters.frf_pulls += 1;
        self.reserve[root] -= self.needed[v];
        assert!(
            !self.reserve[root].is_negative(),
            "root reserve went negative on delivery"
        );
        self.needed[v] = Quantity::ZERO;
        if self.audit {
            assert!(
                self.excess[v] >= self.eps_delta(),
                "delivery failed to clear the violation threshold at node {v}"
            );
        }
        self.nclass[v] = NodeClass::Normal;
        self.bump_viol_counts(v, -1);
        self.update_sel(root);
    }

    /// A selected forest node couriers delta/k down to some violating
    /// descendant instead of doing ordinary pushes.
    pub(super) fn frf_push(&mut self, v: usize) {
        debug_assert!(self.in_f[v] && self.viol_leaves[v] >= 1);
        let q = self.quantum();
        let mut cur = v;
        let mut path = Vec::new();
        loop {
            let mut next = None;
            for &c in &self.children[cur] {
                if self.viol_leaves[self.cur_head(c)] >= 1 {
                    next = Some(c);
                    break;
                }
            }
            match next {
                Some(c) => {
                    path.push(c);
                    cur = self.cur_head(c);
                }
                None => break,
            }
        }
        assert_eq!(
            self.nclass[cur],
            NodeClass::Violating,
            "courier descent must end at a violating node"
        );
        debug_assert!(cur != v, "selected couriers are never violating themselves");
        for &a in &path {
            assert!(self.residual(a) >= q, "courier path lost its abundant capacity");
            self.push_flow(a, q);
        }
        self.counters.frf_pushes += 1;
        if self.audit {
            assert!(
                self.excess[cur] >= self.eps_delta(),
                "courier delivery failed to clear the violation threshold"
            );
        }
        self.nclass[cur] = NodeClass::Normal;
        self.bump_viol_counts(cur, -1);
    }

    pub(super) fn delete_and_merge(&mut self) {
        loop {
            self.frf_delete_pass();
            if !self.try_merge_once() {
                break;
            }
        }
    }

    /// Prune healthy leaves (cancelling their promises) and retire childless
    /// roots until the forest is stable.
    fn frf_delete_pass(&mut self) {
        loop {
            let mut any = false;
            for v in 0..self.next_super {
                if !self.alive[v] || !self.in_f[v] || !self.children[v].is_empty() {
                    continue;
                }
                if self.parent[v] < 0 {
                    assert!(
                        self.reserve[v].is_zero(),
                        "retiring root {v} still holds reserve"
                    );
                    debug_assert!(self.needed[v].is_zero());
                    self.in_f[v] = false;
                    self.viol_leaves[v] = 0;
                    self.counters.frf_deletes += 1;
                    self.update_sel(v);
                    any = true;
                } else if self.nclass[v] != NodeClass::Violating {
                    let root = self.root_of(v);
                    let a = self.parent[v] as usize;
                    let p = self.cur_tail(a);
                    if !self.needed[v].is_zero() {
                        self.reserve[root] -= self.needed[v];
                        assert!(!self.reserve[root].is_negative());
                        self.needed[v] = Quantity::ZERO;
                    }
                    self.children[p].retain(|&c| c != a);
                    self.parent[v] = -1;
                    self.in_f[v] = false;
                    debug_assert_eq!(self.viol_leaves[v], 0);
                    self.counters.frf_deletes += 1;
                    self.update_sel(v);
                    self.update_sel(root);
                    any = true;
                }
            }
            if !any {
                break;
            }
        }
    }

    /// Tear down the subtree hanging at `v` (whose parent arc went stale),
    /// cancelling promises. Returns the violating members as original-node
    /// representatives with their promised amounts, so the caller can
    /// re-wire them without restarting their delivery deadlines.
    pub(super) fn dismantle_subtree(&mut self, v: usize) -> Vec<(usize, Quantity)> {
        let root = self.root_of(v);
        let a = self.parent[v] as usize;
        let p = self.cur_tail(a);
        let cnt = self.viol_leaves[v];
        self.children[p].retain(|&c| c != a);
        self.parent[v] = -1;
        if cnt > 0 {
            self.bump_viol_counts(p, -(cnt as i32));
        }
        let mut stack = vec![v];
        let mut displaced = Vec::new();
        while let Some(x) = stack.pop() {
            for &c in &self.children[x] {
                stack.push(self.cur_head(c));
            }
            self.children[x].clear();
            self.parent[x] = -1;
            self.in_f[x] = false;
            self.viol_leaves[x] = 0;
            let saved = self.needed[x];
            if !saved.is_zero() {
                self.reserve[root] -= saved;
                assert!(!self.reserve[root].is_negative());
                self.needed[x] = Quantity::ZERO;
            }
            if self.nclass[x] == NodeClass::Violating {
                displaced.push((self.members[x][0], saved));
            }
            self.counters.frf_deletes += 1;
            self.update_sel(x);
        }
        self.update_sel(root);
        displaced
    }
}
