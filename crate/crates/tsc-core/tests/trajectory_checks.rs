//! Trajectory validation and export tests: curvature/lateral-acceleration
//! arithmetic on hand-built splines, continuity detection, and the
//! machine/tabular/vector export formats.

use num_rational::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use tsc_core::dsl::parse_spec;
use tsc_core::spec::Specification;
use tsc_core::svg::render_svg;
use tsc_core::trajectory::{
    idle_trajectory, validate_trajectory, CarTrace, SplineSegment, Trajectory,
};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn ratf(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn spec() -> Specification {
    parse_spec("objects { carI: Car; }\n", "t.tsc").unwrap()
}

fn traj_from_segments(segments: Vec<SplineSegment>, delta: i64) -> Trajectory {
    let n = segments.len();
    Trajectory {
        delta: rat(delta),
        cars: vec![CarTrace {
            name: "carI".into(),
            segments,
            headings: vec![rat(0); n],
        }],
        statics: BTreeMap::new(),
        annotations: Vec::new(),
    }
}

#[test]
fn straight_constant_speed_is_valid() {
    // collinear control points: zero curvature everywhere
    let segs = vec![
        SplineSegment {
            p0: (rat(0), rat(0)),
            p1: (rat(15), rat(0)),
            p2: (rat(30), rat(0)),
        },
        SplineSegment {
            p0: (rat(30), rat(0)),
            p1: (rat(45), rat(0)),
            p2: (rat(60), rat(0)),
        },
    ];
    let t = traj_from_segments(segs, 3);
    let report = validate_trajectory(&t, &spec(), &BTreeSet::new(), 500, 1e-6).unwrap();
    assert!(report.valid, "{:?}", report);
    assert!(report.kappa_max < 1e-12);
}

#[test]
fn tangent_kink_is_detected() {
    // second segment starts with a different tangent direction
    let segs = vec![
        SplineSegment {
            p0: (rat(0), rat(0)),
            p1: (rat(10), rat(0)),
            p2: (rat(20), rat(0)),
        },
        SplineSegment {
            p0: (rat(20), rat(0)),
            p1: (rat(30), rat(5)),
            p2: (rat(40), rat(10)),
        },
    ];
    let t = traj_from_segments(segs, 3);
    let report = validate_trajectory(&t, &spec(), &BTreeSet::new(), 100, 1e-6).unwrap();
    assert!(!report.valid);
    assert!(report.c1_gap_max > 1.0, "gap = {}", report.c1_gap_max);
}

#[test]
fn circular_arc_at_limit_lateral_acceleration() {
    // Control points chosen so kappa(0) = 1/100 and |p'(0)| = 20 m/s:
    // |v^2 kappa| = 4.0 exceeds the 0.4 g budget.
    // legs: a = (30, 0), b = (24, 18): |a x b| = 540, kappa(0) = 540/(2*27000).
    let p0 = (rat(0), rat(0));
    let p1 = (rat(30), rat(0));
    let p2 = (ratf(54.0), ratf(18.0));
    let segs = vec![SplineSegment { p0, p1, p2 }];
    let t = traj_from_segments(segs, 3);
    let report = validate_trajectory(&t, &spec(), &BTreeSet::new(), 1000, 1e-6).unwrap();
    assert!(!report.valid, "{:?}", report);
    assert!(
        report.lat_acc_max >= 4.0 - 1e-9,
        "lat acc max = {}",
        report.lat_acc_max
    );
    assert!(report.lat_acc_bound < 4.0);
}

#[test]
fn empty_trajectory_is_a_domain_error() {
    let t = Trajectory {
        delta: rat(3),
        cars: vec![],
        statics: BTreeMap::new(),
        annotations: Vec::new(),
    };
    assert!(validate_trajectory(&t, &spec(), &BTreeSet::new(), 10, 1e-6).is_err());
}

#[test]
fn idle_csv_has_one_row_per_sample() {
    // 1 Hz for 3 seconds: samples at t = 0, 1, 2, 3.
    let t = idle_trajectory("carI", 5.0, 1.0, 3, rat(1));
    let csv = t.to_csv(1.0, 1e-6);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 1 + 4, "{:?}", rows);
    assert!(rows[0].starts_with("t,carI.x"));
    assert!(rows[1].starts_with("0.000,5"));
}

#[test]
fn machine_format_roundtrip_is_exact() {
    let segs = vec![SplineSegment {
        p0: (BigRational::new(1.into(), 3.into()), rat(0)),
        p1: (rat(2), BigRational::new((-7).into(), 2.into())),
        p2: (rat(4), rat(1)),
    }];
    let t = traj_from_segments(segs, 3);
    let json = t.to_json();
    let back = Trajectory::from_json(&json).unwrap();
    assert_eq!(t, back);
}

#[test]
fn truncated_machine_file_is_an_error() {
    let t = idle_trajectory("carI", 0.0, 0.0, 2, rat(3));
    let json = t.to_json();
    let truncated = &json[..json.len() / 2];
    assert!(Trajectory::from_json(truncated).is_err());
}

#[test]
fn svg_contains_paths_and_lane_bands() {
    let spec = parse_spec(
        "objects {\n\
           carI: Car;\n\
           carJ: Car;\n\
           rLane: Lane(start 0 m, length 100 m, width 3.5 m, offset 0 m);\n\
           lLane: Lane(start 0 m, length 100 m, width 3.5 m, offset 3.5 m);\n\
         }\n",
        "svg.tsc",
    )
    .unwrap();
    let seg = |y: i64| {
        vec![SplineSegment {
            p0: (rat(0), rat(y)),
            p1: (rat(10), rat(y)),
            p2: (rat(20), rat(y)),
        }]
    };
    let mut statics = BTreeMap::new();
    for (name, offset) in [("rLane", 0.0), ("lLane", 3.5)] {
        let mut attrs = BTreeMap::new();
        attrs.insert("start".to_string(), rat(0));
        attrs.insert("length".to_string(), rat(100));
        attrs.insert("width".to_string(), ratf(3.5));
        attrs.insert("offset".to_string(), ratf(offset));
        statics.insert(name.to_string(), attrs);
    }
    let t = Trajectory {
        delta: rat(3),
        cars: vec![
            CarTrace {
                name: "carI".into(),
                segments: seg(2),
                headings: vec![rat(0)],
            },
            CarTrace {
                name: "carJ".into(),
                segments: seg(5),
                headings: vec![rat(0)],
            },
        ],
        statics,
        annotations: Vec::new(),
    };
    let svg = render_svg(&t, &spec);
    assert_eq!(svg.matches("class=\"car-path\"").count(), 2);
    assert_eq!(svg.matches("class=\"lane\"").count(), 2);
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
}
