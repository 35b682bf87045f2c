use std::fmt;

use serde::Serialize;

use super::{AnalysisOptions, ConditionResult, EdgeRemovalStep, NeighbourSide, Status, Witness};
use crate::circular::{CircularCase, CircularVerdict, CircularWitness, RecoveryCheck};
use crate::model::NetworkModel;
use crate::numeric::EntryRemoval;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NotIdentifiable,
    /// All necessary conditions hold; identifiability is not proven.
    NoNecessaryConditionViolated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircularSection {
    pub verdict: CircularVerdict,
    /// Round-trip check of the recovery formulas; only for identifiable
    /// cycles with two or more excited and measured vertices.
    pub recovery: Option<RecoveryCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub model: NetworkModel,
    pub options: AnalysisOptions,
    pub conditions: Vec<ConditionResult>,
    pub algorithm1_log: Vec<EntryRemoval>,
    pub algorithm2_log: Vec<EdgeRemovalStep>,
    pub verdict: Verdict,
    pub circular: Option<CircularSection>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn is_identifiable_candidate(&self) -> bool {
        self.verdict == Verdict::NoNecessaryConditionViolated
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Violated => "VIOLATED",
            Status::Satisfied => "satisfied",
            Status::SatisfiedGenerically => "satisfied (generic)",
            Status::Inconclusive => "inconclusive",
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::NotIdentifiable => "not identifiable",
            Verdict::NoNecessaryConditionViolated => "no necessary condition violated",
        })
    }
}

fn pairs(list: &[(usize, usize)]) -> String {
    list.iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::None => Ok(()),
            Witness::Uncovered { vertices } => write!(f, "uncovered vertices {vertices:?}"),
            Witness::NeighbourRank {
                vertex,
                side,
                required,
                path_bound,
                numeric_rank,
            } => {
                let block = match side {
                    NeighbourSide::In => format!("T[N-({vertex})][R]"),
                    NeighbourSide::Out => format!("T[C][N+({vertex})]"),
                };
                write!(
                    f,
                    "{block}: need rank {required}, path bound {path_bound}, sampled rank {numeric_rank}"
                )
            }
            Witness::Count { available, edges } => {
                write!(f, "{available} available vs {edges} edges")
            }
            Witness::Elimination {
                reduced,
                edges,
                removed,
            } => {
                write!(f, "{reduced} remaining vs {edges} edges")?;
                if !removed.is_empty() {
                    write!(f, "; removed {}", pairs(removed))?;
                }
                Ok(())
            }
            Witness::EdgeRemoval {
                remaining,
                edges,
                removed,
            } => {
                write!(f, "{remaining} remaining vs {edges} edges")?;
                if !removed.is_empty() {
                    write!(f, "; removed {}", pairs(removed))?;
                }
                Ok(())
            }
        }
    }
}

pub fn describe_circular(v: &CircularVerdict) -> String {
    let case = match v.condition {
        CircularCase::SingleExcitedMeasured => "single excited vertex that is also measured",
        CircularCase::SingleMeasuredExcited => "single measured vertex that is also excited",
        CircularCase::TwoDisjointPaths => "two vertex-disjoint excited-to-measured paths",
        CircularCase::CoverFailed => "some vertex neither excited nor measured",
        CircularCase::CaseFailed => "no identifying configuration",
    };
    let witness = match &v.witness {
        CircularWitness::Uncovered { vertices } => format!("uncovered {vertices:?}"),
        CircularWitness::Vertex { vertex } => format!("vertex {vertex}"),
        CircularWitness::DisjointPaths { paths } => {
            format!("paths {:?} and {:?}", paths[0], paths[1])
        }
        CircularWitness::PathCount { count } => format!("at most {count} disjoint path(s)"),
    };
    let head = if v.identifiable {
        "identifiable"
    } else {
        "not identifiable"
    };
    format!("{head}: {case} ({witness})")
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.model;
        writeln!(
            f,
            "network: {} vertices, {} edges, R = {}, C = {}",
            m.vertex_count(),
            m.edge_count(),
            m.excited(),
            m.measured()
        )?;
        for c in &self.conditions {
            let line = format!(
                "  {:<16} {:<20} {}",
                c.id.name(),
                c.status.to_string(),
                c.witness
            );
            writeln!(f, "{}", line.trim_end())?;
            if !c.notes.is_empty() {
                writeln!(f, "  {:<16} {}", "", c.notes)?;
            }
        }
        if !self.algorithm1_log.is_empty() {
            writeln!(f, "entry eliminations:")?;
            for r in &self.algorithm1_log {
                writeln!(
                    f,
                    "  T[{}][{}] via rows {} cols {}",
                    r.row, r.col, r.rows, r.cols
                )?;
            }
        }
        if !self.algorithm2_log.is_empty() {
            writeln!(f, "bipartite edge removals:")?;
            for s in &self.algorithm2_log {
                writeln!(
                    f,
                    "  ({},{}) via R' {} C' {} ({} disjoint path(s))",
                    s.removed.0, s.removed.1, s.excited, s.measured, s.path_count
                )?;
            }
        }
        if let Some(circ) = &self.circular {
            writeln!(f, "cycle: {}", describe_circular(&circ.verdict))?;
            if let Some(check) = &circ.recovery {
                writeln!(
                    f,
                    "  recovery round trip: max relative error {:.2e}",
                    check.max_relative_error
                )?;
            }
        }
        write!(f, "verdict: {}", self.verdict)
    }
}
