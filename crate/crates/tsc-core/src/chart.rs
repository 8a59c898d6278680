//! Basic charts and requirement TSCs.
//!
//! A basic chart composes invariant nodes with sequence, choice and
//! concurrency, optionally annotated with time pins and hourglasses.

use crate::view::CmpOp;
use num_rational::BigRational;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
pub enum BasicChart {
    /// Invariant node referencing a spatial view by name.
    Invariant(String),
    /// Empty invariant node (`true`); requires positive duration only.
    Empty,
    Seq {
        left: Box<BasicChart>,
        right: Box<BasicChart>,
        /// Time pin synchronizing the split point.
        pin: Option<String>,
    },
    Choice(Box<BasicChart>, Box<BasicChart>),
    Concurrency(Vec<BasicChart>),
    Hourglass {
        body: Box<BasicChart>,
        /// Name of the duration variable, e.g. `d`.
        var: String,
        /// Conjunction of comparisons on the duration, e.g. `d < 10`.
        constraint: Vec<(CmpOp, BigRational)>,
    },
    /// Pin-sequence annotation: b <= t_p1 <= ... <= t_pn <= e on the body.
    PinSeq {
        body: Box<BasicChart>,
        pins: Vec<String>,
    },
}

impl BasicChart {
    pub fn seq(left: BasicChart, right: BasicChart) -> BasicChart {
        BasicChart::Seq {
            left: Box::new(left),
            right: Box::new(right),
            pin: None,
        }
    }

    pub fn seq_pinned(left: BasicChart, right: BasicChart, pin: &str) -> BasicChart {
        BasicChart::Seq {
            left: Box::new(left),
            right: Box::new(right),
            pin: Some(pin.to_string()),
        }
    }

    pub fn inv(view: &str) -> BasicChart {
        BasicChart::Invariant(view.to_string())
    }

    /// Number of sequence operators at all nesting levels.
    pub fn count_sequence_operators(&self) -> usize {
        match self {
            BasicChart::Invariant(_) | BasicChart::Empty => 0,
            BasicChart::Seq { left, right, .. } => {
                1 + left.count_sequence_operators() + right.count_sequence_operators()
            }
            BasicChart::Choice(a, b) => a.count_sequence_operators() + b.count_sequence_operators(),
            BasicChart::Concurrency(rows) => {
                rows.iter().map(|r| r.count_sequence_operators()).sum()
            }
            BasicChart::Hourglass { body, .. } | BasicChart::PinSeq { body, .. } => {
                body.count_sequence_operators()
            }
        }
    }

    /// All view names referenced by invariant nodes.
    pub fn referenced_views(&self, out: &mut BTreeSet<String>) {
        match self {
            BasicChart::Invariant(v) => {
                out.insert(v.clone());
            }
            BasicChart::Empty => {}
            BasicChart::Seq { left, right, .. } => {
                left.referenced_views(out);
                right.referenced_views(out);
            }
            BasicChart::Choice(a, b) => {
                a.referenced_views(out);
                b.referenced_views(out);
            }
            BasicChart::Concurrency(rows) => {
                for r in rows {
                    r.referenced_views(out);
                }
            }
            BasicChart::Hourglass { body, .. } | BasicChart::PinSeq { body, .. } => {
                body.referenced_views(out)
            }
        }
    }

    /// All pin labels used by sequence pins and pin-sequence annotations.
    pub fn pins(&self, out: &mut BTreeSet<String>) {
        match self {
            BasicChart::Invariant(_) | BasicChart::Empty => {}
            BasicChart::Seq { left, right, pin } => {
                if let Some(p) = pin {
                    out.insert(p.clone());
                }
                left.pins(out);
                right.pins(out);
            }
            BasicChart::Choice(a, b) => {
                a.pins(out);
                b.pins(out);
            }
            BasicChart::Concurrency(rows) => {
                for r in rows {
                    r.pins(out);
                }
            }
            BasicChart::Hourglass { body, .. } => body.pins(out),
            BasicChart::PinSeq { body, pins } => {
                for p in pins {
                    out.insert(p.clone());
                }
                body.pins(out);
            }
        }
    }
}

/// Requirement TSC ⟨H, F, C⟩ with its bulletin board.
#[derive(Debug, Clone, PartialEq)]
pub struct RequirementTsc {
    pub name: String,
    /// Symbols with global scope in this TSC: (symbol, object type).
    pub bulletin: Vec<(String, String)>,
    pub history: BasicChart,
    pub future: BasicChart,
    pub consequence: BasicChart,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_count_table_chart() {
        // true ; A ; true
        let chart = BasicChart::seq(
            BasicChart::seq(BasicChart::Empty, BasicChart::inv("A")),
            BasicChart::Empty,
        );
        assert_eq!(chart.count_sequence_operators(), 2);
    }

    #[test]
    fn sequence_count_leaf() {
        assert_eq!(BasicChart::inv("A").count_sequence_operators(), 0);
    }

    #[test]
    fn sequence_count_concurrent_rows() {
        // (A;B;C) & (D;E;F) as drawn with timing annotations
        let row1 = BasicChart::seq(
            BasicChart::seq(BasicChart::inv("A"), BasicChart::inv("B")),
            BasicChart::inv("C"),
        );
        let row2 = BasicChart::seq(
            BasicChart::seq(BasicChart::inv("D"), BasicChart::inv("E")),
            BasicChart::inv("F"),
        );
        let chart = BasicChart::Concurrency(vec![row1, row2]);
        assert_eq!(chart.count_sequence_operators(), 4);
    }

    #[test]
    fn sequence_count_invariant_under_reordering() {
        let a = BasicChart::seq(BasicChart::inv("A"), BasicChart::inv("B"));
        let b = BasicChart::inv("C");
        let c1 = BasicChart::Choice(Box::new(a.clone()), Box::new(b.clone()));
        let c2 = BasicChart::Choice(Box::new(b), Box::new(a));
        assert_eq!(c1.count_sequence_operators(), c2.count_sequence_operators());
    }
}
