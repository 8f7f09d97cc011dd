//! Operation counters collected by every solver. The report is a flat
//! `key value` listing in a fixed order so runs can be diffed byte for byte.

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PushClass {
    Saturating,
    Large,
    Medium,
    Other,
}

#[derive(Clone, Debug, Default)]
pub struct Counters {
    pub n: u64,
    pub m: u64,
    pub k: u64,
    pub pushes_saturating: u64,
    pub pushes_large: u64,
    pub pushes_medium: u64,
    pub pushes_other: u64,
    pub frf_pushes: u64,
    pub frf_pulls: u64,
    pub relabels: u64,
    pub max_relabels_single_node: u64,
    pub phases: u64,
    pub useful_phases: u64,
    pub contractions: u64,
    pub frf_adds: u64,
    pub frf_deletes: u64,
    pub newly_violating: u64,
    pub medium_arc_node_phases: u64,
    /// Longest stretch of phases any node spent violating.
    pub max_violating_duration: u64,
    /// Nodes past the contraction deadline with no bi-abundant pair yet.
    pub imbalance_deadline_misses: u64,
    /// Max over phases of (flow moved in the phase) / delta.
    pub max_phase_flow_over_delta: f64,
    pub max_large_pushes_in_phase: u64,
    pub max_total_pushes_in_phase: u64,
    pub audit_checks: u64,
}

impl Counters {
    pub fn record_push(&mut self, class: PushClass) {
        match class {
            PushClass::Saturating => self.pushes_saturating += 1,
            PushClass::Large => self.pushes_large += 1,
            PushClass::Medium => self.pushes_medium += 1,
            PushClass::Other => self.pushes_other += 1,
        }
    }

    pub fn total_pushes(&self) -> u64 {
        self.pushes_saturating + self.pushes_large + self.pushes_medium + self.pushes_other
            + self.frf_pushes
    }

    pub fn record_relabel(&mut self, node_total: u64) {
        self.relabels += 1;
        self.max_relabels_single_node = self.max_relabels_single_node.max(node_total);
    }

    pub fn end_phase(
        &mut self,
        useful: bool,
        flow_over_delta: f64,
        large_pushes: u64,
        total_pushes: u64,
    ) {
        self.phases += 1;
        if useful {
            self.useful_phases += 1;
        }
        if flow_over_delta > self.max_phase_flow_over_delta {
            self.max_phase_flow_over_delta = flow_over_delta;
        }
        self.max_large_pushes_in_phase = self.max_large_pushes_in_phase.max(large_pushes);
        self.max_total_pushes_in_phase = self.max_total_pushes_in_phase.max(total_pushes);
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push(' ');
            out.push_str(&v);
            out.push('\n');
        };
        line("n", self.n.to_string());
        line("m", self.m.to_string());
        line("k", self.k.to_string());
        line("pushes_saturating", self.pushes_saturating.to_string());
        line("pushes_large", self.pushes_large.to_string());
        line("pushes_medium", self.pushes_medium.to_string());
        line("pushes_other", self.pushes_other.to_string());
        line("pushes_total", self.total_pushes().to_string());
        line("frf_pushes", self.frf_pushes.to_string());
        line("frf_pulls", self.frf_pulls.to_string());
        line("relabels", self.relabels.to_string());
        line(
            "max_relabels_single_node",
            self.max_relabels_single_node.to_string(),
        );
        line("phases", self.phases.to_string());
        line("useful_phases", self.useful_phases.to_string());
        line(
            "useless_phases",
            (self.phases - self.useful_phases).to_string(),
        );
        line("contractions", self.contractions.to_string());
        line("frf_adds", self.frf_adds.to_string());
        line("frf_deletes", self.frf_deletes.to_string());
        line("newly_violating", self.newly_violating.to_string());
        line(
            "medium_arc_node_phases",
            self.medium_arc_node_phases.to_string(),
        );
        line(
            "max_violating_duration",
            self.max_violating_duration.to_string(),
        );
        line(
            "imbalance_deadline_misses",
            self.imbalance_deadline_misses.to_string(),
        );
        line(
            "max_phase_flow_over_delta",
            format!("{:.6}", self.max_phase_flow_over_delta),
        );
        line(
            "max_large_pushes_in_phase",
            self.max_large_pushes_in_phase.to_string(),
        );
        line(
            "max_total_pushes_in_phase",
            self.max_total_pushes_in_phase.to_string(),
        );
        line("audit_checks", self.audit_checks.to_string());
        // Derived ratios against the proof-side budgets; guard empty runs.
        let n2 = (self.n * self.n).max(1) as f64;
        let phases = self.phases.max(1) as f64;
        line(
            "ratio_large_pushes_per_n2_phase",
            format!("{:.6}", self.max_large_pushes_in_phase as f64 / n2),
        );
        line(
            "ratio_max_phase_flow_per_n2_delta",
            format!("{:.6}", self.max_phase_flow_over_delta / n2),
        );
        line(
            "ratio_relabels_per_node",
            format!("{:.6}", self.relabels as f64 / self.n.max(1) as f64),
        );
        line("ratio_pushes_per_phase", {
            format!("{:.6}", self.total_pushes() as f64 / phases)
        });
        out
    }
}

#[cfg(test)]
mod test {
    use super::*;

    #[test]
    fn report_is_stable() {
        let mut c = Counters {
            n: 4,
            m: 10,
            k: 4,
            ..Default::default()
        };
        c.record_push(PushClass::Saturating);
        c.record_push(PushClass::Large);
        c.record_relabel(3);
        c.end_phase(true, 1.5, 1, 2);
        let r1 = c.report();
        let r2 = c.report();
        assert_eq!(r1, r2);
        assert!(r1.contains("pushes_total 2\n"));
        assert!(r1.contains("max_relabels_single_node 3\n"));
        assert!(r1.contains("useless_phases 0\n"));
        assert!(r1.contains("max_phase_flow_over_delta 1.500000\n"));
    }
}
