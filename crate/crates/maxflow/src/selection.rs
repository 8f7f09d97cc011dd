//! Node selection structure for the scaling solvers: per-label lists of
//! large-excess and medium-excess nodes.
//!
//! Selection order: lowest-labeled large-excess node first; otherwise
//! highest-labeled medium-excess node. Within a label, nodes are served in
//! insertion order. Lists are intrusive doubly-linked lists over node ids, so
//! class changes are O(1); the lowest/highest nonempty levels are tracked
//! lazily by scanning, which is plenty fast at the sizes this crate targets.

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExcessClass {
    Inactive,
    Medium,
    Large,
}

const NIL: i64 = -1;

#[derive(Clone)]
struct LevelList {
    head: Vec<i64>,
    tail: Vec<i64>,
}

impl LevelList {
    fn new(levels: usize) -> Self {
        LevelList {
            head: vec![NIL; levels],
            tail: vec![NIL; levels],
        }
    }
}

pub struct Selection {
    levels: usize,
    large: LevelList,
    medium: LevelList,
    next: Vec<i64>,
    prev: Vec<i64>,
    class: Vec<ExcessClass>,
    level_of: Vec<usize>,
    min_large: usize,  // candidate lower bound; advanced on demand
    max_medium: usize, // candidate upper bound; lowered on demand
}

impl Selection {
    pub fn new(nodes: usize, levels: usize) -> Self {
        Selection {
            levels,
            large: LevelList::new(levels),
            medium: LevelList::new(levels),
            next: vec![NIL; nodes],
            prev: vec![NIL; nodes],
            class: vec![ExcessClass::Inactive; nodes],
            level_of: vec![0; nodes],
            min_large: levels,
            max_medium: 0,
        }
    }

    pub fn clear(&mut self) {
        for l in 0..self.levels {
            self.large.head[l] = NIL;
            self.large.tail[l] = NIL;
            self.medium.head[l] = NIL;
            self.medium.tail[l] = NIL;
        }
        for v in 0..self.class.len() {
            self.class[v] = ExcessClass::Inactive;
            self.next[v] = NIL;
            self.prev[v] = NIL;
        }
        self.min_large = self.levels;
        self.max_medium = 0;
    }

    pub fn class_of(&self, v: usize) -> ExcessClass {
        self.class[v]
    }

    /// Places `v` at `level` with `class`, detaching it from wherever it was.
    /// No-op when nothing changes, so a node keeps its queue position while
    /// it is being worked on.
    pub fn update(&mut self, v: usize, level: usize, class: ExcessClass) {
        if self.class[v] == class && (class == ExcessClass::Inactive || self.level_of[v] == level) {
            return;
        }
        self.detach(v);
        self.level_of[v] = level;
        self.class[v] = class;
        match class {
            ExcessClass::Inactive => {}
            ExcessClass::Large => {
                self.append(v, level, true);
                self.min_large = self.min_large.min(level);
            }
            ExcessClass::Medium => {
                self.append(v, level, false);
                self.max_medium = self.max_medium.max(level);
            }
        }
    }

    fn list(&mut self, large: bool) -> &mut LevelList {
        if large {
            &mut self.large
        } else {
            &mut self.medium
        }
    }

    fn append(&mut self, v: usize, level: usize, large: bool) {
        let old_tail = self.list(large).tail[level];
        self.prev[v] = old_tail;
        self.next[v] = NIL;
        if old_tail == NIL {
            self.list(large).head[level] = v as i64;
        } else {
            self.next[old_tail as usize] = v as i64;
        }
        self.list(large).tail[level] = v as i64;
    }

    fn detach(&mut self, v: usize) {
        if self.class[v] == ExcessClass::Inactive {
            return;
        }
        let large = self.class[v] == ExcessClass::Large;
        let level = self.level_of[v];
        let (p, n) = (self.prev[v], self.next[v]);
        if p == NIL {
            self.list(large).head[level] = n;
        } else {
            self.next[p as usize] = n;
        }
        if n == NIL {
            self.list(large).tail[level] = p;
        } else {
            self.prev[n as usize] = p;
        }
        self.prev[v] = NIL;
        self.next[v] = NIL;
        self.class[v] = ExcessClass::Inactive;
    }

    /// Front node in selection order, or None when both sets are empty.
    pub fn select(&mut self) -> Option<usize> {
        while self.min_large < self.levels {
            let h = self.large.head[self.min_large];
            if h != NIL {
                return Some(h as usize);
            }
            self.min_large += 1;
        }
        loop {
            let h = self.medium.head[self.max_medium];
            if h != NIL {
                return Some(h as usize);
            }
            if self.max_medium == 0 {
                return None;
            }
            self.max_medium -= 1;
        }
    }

    /// Compares stored membership against independently recomputed classes.
    pub fn verify_against(&self, expect: impl Fn(usize) -> (usize, ExcessClass)) {
        for v in 0..self.class.len() {
            let (level, class) = expect(v);
            assert_eq!(
                self.class[v], class,
                "selection class drift at node {v}: stored {:?}, recomputed {:?}",
                self.class[v], class
            );
            if class != ExcessClass::Inactive {
                assert_eq!(
                    self.level_of[v], level,
                    "selection level drift at node {v}"
                );
            }
        }
        // Every listed node must carry the matching class and level.
        for l in 0..self.levels {
            let mut cur = self.large.head[l];
            while cur != NIL {
                let v = cur as usize;
                assert_eq!(self.class[v], ExcessClass::Large);
                assert_eq!(self.level_of[v], l);
                cur = self.next[v];
            }
            let mut cur = self.medium.head[l];
            while cur != NIL {
                let v = cur as usize;
                assert_eq!(self.class[v], ExcessClass::Medium);
                assert_eq!(self.level_of[v], l);
                cur = self.next[v];
            }
        }
    }
}
