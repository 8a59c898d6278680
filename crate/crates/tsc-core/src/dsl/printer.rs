//! Canonical serializer for specifications. Output parses back to a
//! structurally equal specification and is byte-stable across runs.

use crate::chart::BasicChart;
use crate::spec::Specification;
use crate::view::{Axis, Frame, FrameKind, VAtom};
use num_rational::BigRational;
use num_traits::One;
use std::fmt::Write;

pub fn serialize_spec(spec: &Specification) -> String {
    let mut out = String::new();
    world_block(&mut out, spec);
    if !spec.objects.is_empty() {
        out.push_str("objects {\n");
        for o in &spec.objects {
            match (&o.fixed_lane, &o.car_params) {
                (Some(l), _) => {
                    let _ = writeln!(
                        out,
                        "  {}: {}(start {} m, length {} m, width {} m, offset {} m);",
                        o.name, o.type_name, l.start, l.length, l.width, l.offset
                    );
                }
                (None, Some(p)) => {
                    let _ = writeln!(
                        out,
                        "  {}: {}(G {} m, L {} m, F {} m, W {} m, delta_max {} rad, a_lat_max {} m/s2);",
                        o.name,
                        o.type_name,
                        p.rear_overhang,
                        p.wheel_base,
                        p.front_overhang,
                        p.width,
                        p.delta_max,
                        p.a_lat_max
                    );
                }
                (None, None) => {
                    let _ = writeln!(out, "  {}: {};", o.name, o.type_name);
                }
            }
        }
        out.push_str("}\n");
    }
    for v in &spec.views {
        let _ = writeln!(out, "view {} {{", v.name);
        frame_items(&mut out, &v.root, 1);
        out.push_str("}\n");
    }
    for (name, chart) in &spec.charts {
        let _ = writeln!(out, "chart {} = {};", name, chart_str(chart, 0));
    }
    for t in &spec.tscs {
        let _ = writeln!(out, "tsc {} {{", t.name);
        if !t.bulletin.is_empty() {
            let names: Vec<&str> = t.bulletin.iter().map(|(s, _)| s.as_str()).collect();
            let _ = writeln!(out, "  use {};", names.join(", "));
        }
        let _ = writeln!(out, "  history = {};", chart_str(&t.history, 0));
        let _ = writeln!(out, "  future = {};", chart_str(&t.future, 0));
        let _ = writeln!(out, "  consequence = {};", chart_str(&t.consequence, 0));
        out.push_str("}\n");
    }
    analysis_block(&mut out, spec);
    out
}

fn world_block(out: &mut String, spec: &Specification) {
    let w = &spec.world;
    let p = &w.car_params;
    let _ = writeln!(out, "world {{");
    let _ = writeln!(out, "  gravity {} m/s2;", w.gravity);
    let _ = writeln!(
        out,
        "  car_params {{ G {} m; L {} m; F {} m; W {} m; delta_max {} rad; a_lat_max {} m/s2; }}",
        p.rear_overhang, p.wheel_base, p.front_overhang, p.width, p.delta_max, p.a_lat_max
    );
    let _ = writeln!(out, "}}");
}

fn analysis_block(out: &mut String, spec: &Specification) {
    let a = &spec.analysis;
    if a == &Default::default() {
        return;
    }
    out.push_str("analysis {");
    if let Some(s) = &a.step {
        let _ = write!(out, " step {} s;", rat_str(s));
    }
    if let Some(d) = a.depth {
        let _ = write!(out, " depth {};", d);
    }
    if let Some(i) = a.intervals {
        let _ = write!(out, " intervals {};", i);
    }
    if let Some(t) = &a.timeout {
        let _ = write!(out, " timeout {} s;", rat_str(t));
    }
    if let Some(m) = a.max_subset {
        let _ = write!(out, " max_subset {};", m);
    }
    out.push_str(" }\n");
}

/// Exact rational literal: integer, or `p/q`.
pub fn rat_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn frame_items(out: &mut String, frame: &Frame, depth: usize) {
    for chain in &frame.orders {
        indent(out, depth);
        let axis = match chain.axis {
            Axis::X => "order_x",
            Axis::Y => "order_y",
        };
        let mut s = chain.anchors[0].to_string();
        for (i, rel) in chain.relations.iter().enumerate() {
            s.push_str(&format!(" {} {}", rel.symbol(), chain.anchors[i + 1]));
        }
        let _ = writeln!(out, "{} {};", axis, s);
    }
    for d in &frame.dists {
        indent(out, depth);
        let axis = match d.axis {
            Axis::X => "dist_x",
            Axis::Y => "dist_y",
        };
        let _ = writeln!(
            out,
            "{} {} -> {} {} {} m;",
            axis,
            d.from,
            d.to,
            d.cmp.symbol(),
            rat_str(&d.bound)
        );
    }
    for c in &frame.constraints {
        indent(out, depth);
        let _ = writeln!(out, "constraint {};", atom_str(c));
    }
    for child in &frame.children {
        indent(out, depth);
        let kw = match child.kind {
            FrameKind::Somewhere if child.binders.is_empty() => "somewhere".to_string(),
            FrameKind::Nowhere if child.binders.is_empty() => "nowhere".to_string(),
            FrameKind::Somewhere => {
                format!("exists {}: {}", child.binders[0].0, child.binders[0].1)
            }
            FrameKind::Nowhere => {
                format!("forbid {}: {}", child.binders[0].0, child.binders[0].1)
            }
            FrameKind::Top => unreachable!("nested top frame"),
        };
        let flags = match (child.constrain_x, child.constrain_y) {
            (true, true) => "",
            (true, false) => " [x]",
            (false, true) => " [y]",
            (false, false) => " [x]",
        };
        let _ = writeln!(out, "{}{} {{", kw, flags);
        frame_items(out, child, depth + 1);
        indent(out, depth);
        out.push_str("}\n");
    }
}

fn atom_str(a: &VAtom) -> String {
    let mut s = String::new();
    let one = BigRational::one();
    for (i, (coef, term)) in a.terms.iter().enumerate() {
        let negative = coef < &BigRational::from_integer(0.into());
        let mag = if negative {
            -coef.clone()
        } else {
            coef.clone()
        };
        if i == 0 {
            if negative {
                s.push_str("- ");
            }
        } else if negative {
            s.push_str(" - ");
        } else {
            s.push_str(" + ");
        }
        if mag != one {
            s.push_str(&format!("{} * {}", rat_str(&mag), term));
        } else {
            s.push_str(&term.to_string());
        }
    }
    s.push_str(&format!(" {} {}", a.cmp.symbol(), rat_str(&a.rhs)));
    s
}

/// Operator precedence: choice 0, concurrency 1, sequence 2, primary 3.
fn chart_str(chart: &BasicChart, min_prec: u8) -> String {
    let (text, prec) = match chart {
        BasicChart::Empty => ("true".to_string(), 3),
        BasicChart::Invariant(v) => (format!("inv({})", v), 3),
        BasicChart::Seq { left, right, pin } => {
            let op = match pin {
                Some(p) => format!(" ;[{}] ", p),
                None => " ; ".to_string(),
            };
            (
                format!("{}{}{}", chart_str(left, 2), op, chart_str(right, 3)),
                2,
            )
        }
        BasicChart::Choice(a, b) => (format!("{} | {}", chart_str(a, 0), chart_str(b, 1)), 0),
        BasicChart::Concurrency(rows) => {
            let parts: Vec<String> = rows.iter().map(|r| chart_str(r, 2)).collect();
            (parts.join(" & "), 1)
        }
        BasicChart::Hourglass {
            body,
            var,
            constraint,
        } => {
            let atoms: Vec<String> = constraint
                .iter()
                .map(|(cmp, b)| format!("{} {} {} s", var, cmp.symbol(), rat_str(b)))
                .collect();
            (
                format!(
                    "{} within {}: {}",
                    chart_str(body, 3),
                    var,
                    atoms.join(" && ")
                ),
                2,
            )
        }
        BasicChart::PinSeq { body, pins } => (
            format!("sync[{}]({})", pins.join(", "), chart_str(body, 0)),
            3,
        ),
    };
    if prec < min_prec {
        format!("({})", text)
    } else {
        text
    }
}
