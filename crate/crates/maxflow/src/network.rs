//! Network representation shared by all solvers.
//!
//! Arcs are stored in paired slots: slot `2p` and `2p+1` are the two
//! directions of one node pair, so the partner of arc `a` is `a ^ 1` and
//! `r(a) + r(a^1)` always equals the pair's bi-capacity. Parallel input arcs
//! are merged at build time, and the standard transformation adds a return
//! arc `(j,s)` and a lending arc `(t,j)` of capacity `U` for every other node
//! `j`, where `U` is the largest finite input capacity.

use std::fmt;

/// Sentinel for an infinite input capacity; replaced by `n * U` at build time.
pub const INFINITE_CAP: u128 = u128::MAX;

/// An instance as given: node count, terminals, and the raw arc list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub n: usize,
    pub s: usize,
    pub t: usize,
    pub arcs: Vec<(usize, usize, u128)>,
}

impl Instance {
    pub fn build(&self) -> Result<Network, BuildError> {
        build_network(self.n, self.s, self.t, &self.arcs)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ArcKind {
    /// Came from the input (possibly a merge of parallel input arcs).
    Input,
    /// Zero-capacity reverse slot created to complete a pair.
    PairFill,
    /// `(j,s)` or `(t,j)` arc added by the transformation.
    Helper,
}

#[derive(Clone)]
pub struct Network {
    pub n: usize,
    pub s: usize,
    pub t: usize,
    pub cap: Vec<i128>,
    pub tail: Vec<u32>,
    pub head: Vec<u32>,
    pub kind: Vec<ArcKind>,
    /// Outgoing arc slots per node, bi-capacity non-increasing, slot id as tie-break.
    pub adj: Vec<Vec<usize>>,
    /// Largest finite capacity among merged input arcs.
    pub max_input_cap: i128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildError {
    TooFewNodes(usize),
    SourceIsSink,
    NodeOutOfRange { node: usize, n: usize },
    SelfLoop { node: usize },
    CapacityOverflow,
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::TooFewNodes(n) => write!(f, "network needs at least 2 nodes, got {n}"),
            BuildError::SourceIsSink => write!(f, "source and sink must be distinct"),
            BuildError::NodeOutOfRange { node, n } => {
                write!(f, "node id {node} out of range for {n} nodes")
            }
            BuildError::SelfLoop { node } => write!(f, "self-loop arc at node {node} rejected"),
            BuildError::CapacityOverflow => write!(f, "capacities too large to represent exactly"),
        }
    }
}

impl std::error::Error for BuildError {}

/// Caps the exactly representable capacity range; sums and scaled copies must
/// stay well inside i128.
const MAX_TOTAL_CAP: i128 = 1 << 110;

/// Builds the paired-arc network from an arc list.
///
/// Parallel arcs are merged by summing capacities, `INFINITE_CAP` becomes
/// `n * U`, every arc gains a zero-capacity reverse slot if the input lacks
/// one, and missing `(j,s)` / `(t,j)` arcs are added with capacity `U`.
pub fn build_network(
    n: usize,
    s: usize,
    t: usize,
    arcs: &[(usize, usize, u128)],
) -> Result<Network, BuildError> {
    if n < 2 {
        return Err(BuildError::TooFewNodes(n));
    }
    if s >= n {
        return Err(BuildError::NodeOutOfRange { node: s, n });
    }
    if t >= n {
        return Err(BuildError::NodeOutOfRange { node: t, n });
    }
    if s == t {
        return Err(BuildError::SourceIsSink);
    }

    // Merge parallel arcs, keeping first-occurrence order of node pairs so the
    // slot layout is deterministic.
    #[derive(Clone)]
    struct PairSlot {
        cap: i128,
        kind: ArcKind,
        infinite: bool,
    }
    struct Pairs {
        index: std::collections::HashMap<(usize, usize), usize>,
        nodes: Vec<(usize, usize)>,
        slots: Vec<[PairSlot; 2]>, // [forward, backward] for nodes (i,j) with i < j
    }
    impl Pairs {
        fn slot(&mut self, i: usize, j: usize) -> &mut PairSlot {
            let key = if i < j { (i, j) } else { (j, i) };
            let p = *self.index.entry(key).or_insert_with(|| {
                self.nodes.push(key);
                let empty = PairSlot {
                    cap: 0,
                    kind: ArcKind::PairFill,
                    infinite: false,
                };
                self.slots.push([empty.clone(), empty]);
                self.nodes.len() - 1
            });
            &mut self.slots[p][if i < j { 0 } else { 1 }]
        }
    }
    let mut pairs = Pairs {
        index: std::collections::HashMap::new(),
        nodes: Vec::new(),
        slots: Vec::new(),
    };

    for &(i, j, c) in arcs {
        if i >= n {
            return Err(BuildError::NodeOutOfRange { node: i, n });
        }
        if j >= n {
            return Err(BuildError::NodeOutOfRange { node: j, n });
        }
        if i == j {
            return Err(BuildError::SelfLoop { node: i });
        }
        let slot = pairs.slot(i, j);
        slot.kind = ArcKind::Input;
        if c == INFINITE_CAP {
            slot.infinite = true;
        } else {
            if c > MAX_TOTAL_CAP as u128 || slot.cap > MAX_TOTAL_CAP - c as i128 {
                return Err(BuildError::CapacityOverflow);
            }
            slot.cap += c as i128;
        }
    }

    let max_input_cap = pairs
        .slots
        .iter()
        .flat_map(|s| s.iter().map(|x| x.cap))
        .max()
        .unwrap_or(0);
    let inf_replacement = (n as i128) * max_input_cap.max(1);
    for s in pairs.slots.iter_mut().flat_map(|s| s.iter_mut()) {
        if s.infinite {
            s.cap = inf_replacement;
        }
    }

    // Transformation arcs: (j,s) and (t,j) with capacity U where absent.
    for j in 0..n {
        if j == s || j == t {
            continue;
        }
        for (from, to) in [(j, s), (t, j)] {
            let slot = pairs.slot(from, to);
            if slot.kind == ArcKind::PairFill {
                slot.kind = ArcKind::Helper;
                slot.cap = max_input_cap;
            }
        }
    }

    let mut net = Network {
        n,
        s,
        t,
        cap: Vec::with_capacity(pairs.nodes.len() * 2),
        tail: Vec::with_capacity(pairs.nodes.len() * 2),
        head: Vec::with_capacity(pairs.nodes.len() * 2),
        kind: Vec::with_capacity(pairs.nodes.len() * 2),
        adj: vec![Vec::new(); n],
        max_input_cap,
    };
    let mut total: i128 = 0;
    for p in 0..pairs.nodes.len() {
        let (i, j) = pairs.nodes[p];
        for (end, (from, to)) in [(i, j), (j, i)].into_iter().enumerate() {
            let slot = &pairs.slots[p][end];
            net.cap.push(slot.cap);
            net.tail.push(from as u32);
            net.head.push(to as u32);
            net.kind.push(slot.kind);
            total += slot.cap;
        }
        if total > MAX_TOTAL_CAP {
            return Err(BuildError::CapacityOverflow);
        }
    }

    net.rebuild_adjacency();
    Ok(net)
}

impl Network {
    pub fn arc_count(&self) -> usize {
        self.cap.len()
    }

    /// Directional arc slots the input actually mentioned (after merging).
    pub fn input_arc_count(&self) -> usize {
        self.kind.iter().filter(|&&k| k == ArcKind::Input).count()
    }

    pub fn rev(&self, a: usize) -> usize {
        a ^ 1
    }

    pub fn bicap(&self, a: usize) -> i128 {
        self.cap[a] + self.cap[a ^ 1]
    }

    fn rebuild_adjacency(&mut self) {
        for l in &mut self.adj {
            l.clear();
        }
        for a in 0..self.cap.len() {
            self.adj[self.tail[a] as usize].push(a);
        }
        for i in 0..self.n {
            let caps = &self.cap;
            self.adj[i].sort_by(|&a, &b| {
                let ba = caps[a] + caps[a ^ 1];
                let bb = caps[b] + caps[b ^ 1];
                bb.cmp(&ba).then(a.cmp(&b))
            });
        }
    }

    /// Copy used inside solvers: return and lending channels widened so a node
    /// can always park excess at `s` (or borrow from `t`) without saturating
    /// them, and all capacities scaled by `2^scale_shift` for solvers that
    /// work in scaled units. One pair slot serves each unordered node pair, so
    /// when an input arc already occupies a terminal-side direction that slot
    /// *is* the return or lending channel and must be widened too. Widening
    /// never changes the max-flow value because arcs into `s` and out of `t`
    /// cannot appear on an augmenting path or in a minimum cut.
    pub fn solver_copy(&self, scale_shift: u32) -> Network {
        let mut net = self.clone();
        let bonus = 4 * (self.n as i128) * self.max_input_cap.max(1);
        for a in 0..net.cap.len() {
            if net.head[a] as usize == self.s || net.tail[a] as usize == self.t {
                net.cap[a] += bonus;
            }
            net.cap[a] <<= scale_shift;
        }
        net.rebuild_adjacency();
        net
    }
}

#[cfg(test)]
mod test {
    use super::*;

    #[test]
    fn helper_arcs_added_with_u() {
        // (n=3, [(s,1,4),(1,t,4)]): helper arcs (1,s) and (t,1) appear with capacity 4.
        let net = build_network(3, 0, 2, &[(0, 1, 4), (1, 2, 4)]).unwrap();
        assert_eq!(net.max_input_cap, 4);
        let mut helper_caps = Vec::new();
        for a in 0..net.arc_count() {
            if net.kind[a] == ArcKind::Helper {
                helper_caps.push((net.tail[a] as usize, net.head[a] as usize, net.cap[a]));
            }
        }
        helper_caps.sort();
        assert_eq!(helper_caps, vec![(1, 0, 4), (2, 1, 4)]);
    }

    #[test]
    fn parallel_arcs_merge() {
        let net = build_network(3, 0, 2, &[(0, 1, 2), (0, 1, 3), (1, 2, 9)]).unwrap();
        let a = (0..net.arc_count())
            .find(|&a| net.tail[a] == 0 && net.head[a] == 1)
            .unwrap();
        assert_eq!(net.cap[a], 5);
        assert_eq!(net.kind[a], ArcKind::Input);
    }

    #[test]
    fn antiparallel_arcs_share_a_pair() {
        let net = build_network(3, 0, 2, &[(0, 1, 2), (1, 0, 7), (1, 2, 9)]).unwrap();
        let a = (0..net.arc_count())
            .find(|&a| net.tail[a] == 0 && net.head[a] == 1)
            .unwrap();
        assert_eq!(net.cap[a ^ 1], 7);
        assert_eq!(net.bicap(a), 9);
    }

    #[test]
    fn infinite_cap_becomes_n_times_u() {
        let net = build_network(4, 0, 3, &[(0, 1, INFINITE_CAP), (1, 3, 6)]).unwrap();
        let a = (0..net.arc_count())
            .find(|&a| net.tail[a] == 0 && net.head[a] == 1)
            .unwrap();
        assert_eq!(net.cap[a], 24); // n * U = 4 * 6
    }

    #[test]
    fn adjacency_sorted_by_bicap() {
        let net = build_network(4, 0, 3, &[(0, 1, 1), (0, 2, 50), (1, 3, 1), (2, 3, 50)]).unwrap();
        let adj = &net.adj[0];
        for w in adj.windows(2) {
            assert!(net.bicap(w[0]) >= net.bicap(w[1]));
        }
        assert_eq!(net.head[adj[0]], 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            build_network(1, 0, 0, &[]).err(),
            Some(BuildError::TooFewNodes(1))
        );
        assert_eq!(
            build_network(3, 1, 1, &[]).err(),
            Some(BuildError::SourceIsSink)
        );
        assert_eq!(
            build_network(3, 0, 2, &[(0, 5, 1)]).err(),
            Some(BuildError::NodeOutOfRange { node: 5, n: 3 })
        );
        assert_eq!(
            build_network(3, 0, 2, &[(1, 1, 1)]).err(),
            Some(BuildError::SelfLoop { node: 1 })
        );
    }

    #[test]
    fn solver_copy_widens_only_terminal_sides() {
        let net = build_network(3, 0, 2, &[(0, 1, 4), (1, 2, 4)]).unwrap();
        let wide = net.solver_copy(0);
        for a in 0..net.arc_count() {
            let into_s = net.head[a] as usize == 0;
            let out_t = net.tail[a] as usize == 2;
            if into_s || out_t {
                assert!(wide.cap[a] > net.cap[a]);
            } else {
                assert_eq!(wide.cap[a], net.cap[a]);
            }
        }
        let scaled = net.solver_copy(3);
        for a in 0..net.arc_count() {
            assert_eq!(scaled.cap[a] % 8, 0);
        }
    }
}
