//! Human-readable and machine-readable analysis reports.
//!
//! The machine report is deterministic for a fixed configuration:
//! timing figures appear only in the human-readable rendering.

use crate::consistency::AnalysisReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MachineReport {
    pub schema_version: u32,
    pub consistent: bool,
    pub inconsistent_subsets: Vec<SubsetDoc>,
    pub stats: StatsDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetDoc {
    pub members: Vec<String>,
    pub innermost: String,
    pub witness_file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsDoc {
    pub worst_case_cases: u64,
    pub cases_enumerated: u64,
    pub cases_solved: u64,
    pub solver_fraction_percent: f64,
    pub skipped_minimality: u64,
    pub skipped_bc1_memo: u64,
    pub unknown_cases: u64,
    pub max_subset_cap: usize,
}

pub fn machine_report(report: &AnalysisReport, witness_files: &[Option<String>]) -> MachineReport {
    let s = &report.stats;
    let fraction = if s.worst_case_cases > 0 {
        (s.cases_solved as f64) * 100.0 / (s.worst_case_cases as f64)
    } else {
        0.0
    };
    MachineReport {
        schema_version: 1,
        consistent: report.is_consistent(),
        inconsistent_subsets: report
            .subsets
            .iter()
            .zip(witness_files.iter().cloned().chain(std::iter::repeat(None)))
            .map(|(sub, wf)| SubsetDoc {
                members: sub.members.clone(),
                innermost: sub.innermost.clone(),
                witness_file: wf,
            })
            .collect(),
        stats: StatsDoc {
            worst_case_cases: s.worst_case_cases,
            cases_enumerated: s.cases_enumerated,
            cases_solved: s.cases_solved,
            solver_fraction_percent: (fraction * 100.0).round() / 100.0,
            skipped_minimality: s.skipped_minimality,
            skipped_bc1_memo: s.skipped_bc1_memo,
            unknown_cases: s.unknown_cases,
            max_subset_cap: s.max_subset_cap,
        },
    }
}

pub fn human_report(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let s = &report.stats;
    if report.is_consistent() {
        out.push_str("no inconsistency found\n");
    } else {
        out.push_str(&format!(
            "{} minimal inconsistent subset(s):\n",
            report.subsets.len()
        ));
        for sub in &report.subsets {
            out.push_str(&format!(
                "  {{ {} }}  (innermost: {}{})\n",
                sub.members.join(", "),
                sub.innermost,
                if sub.witness.is_some() {
                    ", witness available"
                } else {
                    ""
                }
            ));
        }
    }
    let fraction = if s.worst_case_cases > 0 {
        (s.cases_solved as f64) * 100.0 / (s.worst_case_cases as f64)
    } else {
        0.0
    };
    out.push_str("statistics:\n");
    out.push_str(&format!("  worst-case cases:     {}\n", s.worst_case_cases));
    out.push_str(&format!(
        "  enumerated (cap {}):  {}\n",
        s.max_subset_cap, s.cases_enumerated
    ));
    out.push_str(&format!(
        "  handed to solver:     {} ({:.1}% of worst case)\n",
        s.cases_solved, fraction
    ));
    out.push_str(&format!(
        "  skipped (minimality): {}\n",
        s.skipped_minimality
    ));
    out.push_str(&format!("  skipped (BC1 memo):   {}\n", s.skipped_bc1_memo));
    out.push_str(&format!("  unknown cases:        {}\n", s.unknown_cases));
    out.push_str(&format!(
        "  wall time:            {:.1} s\n",
        s.wall_millis as f64 / 1000.0
    ));
    out
}
