//! Spatial-view translation tests mirroring the worked examples:
//! lane-crossing order chains, the somewhere-box distance view, the
//! quantified no-car-between view, and the relaxation/evaluation
//! properties of the translation.

use num_rational::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use tsc_core::dsl::parse_spec;
use tsc_core::model::Attr;
use tsc_core::oracle::{eval_view, OracleCtx, Valuation};
use tsc_core::spec::Specification;
use tsc_core::translate::{translate_view, Strictness, VFormula};
use tsc_core::view::{AnchorTerm, CmpOp, VAtom};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// The running example: two lanes, two cars, the four spatial views.
fn example_spec() -> Specification {
    parse_spec(
        "objects {\n\
           carI: Car;\n\
           carJ: Car;\n\
           lLane: Lane;\n\
           rLane: Lane;\n\
         }\n\
         # carI crosses the border between the lanes\n\
         view CrossesBorder {\n\
           order_x rLane.xmin = lLane.xmin < carI.xmin < carI.xmax < rLane.xmax = lLane.xmax;\n\
           order_y rLane.ymin < carI.ymin < rLane.ymax = lLane.ymin < carI.ymax < lLane.ymax;\n\
         }\n\
         # carI is more than 5 m behind carJ (x direction only)\n\
         view FarBehind {\n\
           somewhere [x] {\n\
             dist_x carI.xmax -> carJ.xmin > 5 m;\n\
           }\n\
         }\n\
         # speed limit annotation\n\
         view SpeedCap { constraint carI.v < 120 kmh; }\n\
         # no other car between carI and carJ on some lane\n\
         view NoCarBetween {\n\
           exists l: Lane {\n\
             order_x l.xmin < carI.xmin < carI.xmax < carJ.xmin < carJ.xmax < l.xmax;\n\
             order_y l.ymin < carI.ymin < carI.ymax < l.ymax;\n\
             order_y l.ymin < carJ.ymin < carJ.ymax < l.ymax;\n\
             forbid c: Car {\n\
               order_x carI.xmax < c.xmin < c.xmax < carJ.xmin;\n\
               order_y l.ymin < c.ymin < c.ymax < l.ymax;\n\
             }\n\
           }\n\
         }\n",
        "example.tsc",
    )
    .expect("example spec parses")
}

fn atoms_of(f: &VFormula, out: &mut Vec<VAtom>) {
    match f {
        VFormula::Atom(a) => out.push(a.clone()),
        VFormula::And(kids) | VFormula::Or(kids) => {
            for k in kids {
                atoms_of(k, out);
            }
        }
        _ => {}
    }
}

fn bulletin(spec: &Specification) -> BTreeMap<String, String> {
    spec.pool().into_iter().collect()
}

#[test]
fn crossing_view_is_the_six_relation_conjunction() {
    let spec = example_spec();
    let view = spec.view("CrossesBorder").unwrap();
    let f = translate_view(
        view,
        &bulletin(&spec),
        &spec.pool(),
        &spec.world,
        Strictness::Strict,
    )
    .unwrap();
    // five x-axis links + five y-axis links, all binary atoms
    let mut atoms = Vec::new();
    atoms_of(&f, &mut atoms);
    assert_eq!(atoms.len(), 10);
    assert!(matches!(f, VFormula::And(_)));
    // spot-check the equality and one strict link
    let eq = atoms
        .iter()
        .find(|a| a.cmp == CmpOp::Eq && a.terms.len() == 2)
        .expect("equality link present");
    assert_eq!(eq.rhs, rat(0));
}

#[test]
fn far_behind_is_a_single_atom() {
    let spec = example_spec();
    let view = spec.view("FarBehind").unwrap();
    let f = translate_view(
        view,
        &bulletin(&spec),
        &spec.pool(),
        &spec.world,
        Strictness::Strict,
    )
    .unwrap();
    match f {
        VFormula::Atom(a) => {
            // carJ.xmin - carI.xmax > 5
            assert_eq!(a.cmp, CmpOp::Gt);
            assert_eq!(a.rhs, rat(5));
            assert_eq!(a.terms.len(), 2);
            let names: BTreeSet<String> = a.terms.iter().map(|(_, t)| t.to_string()).collect();
            assert!(names.contains("carJ.xmin") && names.contains("carI.xmax"));
        }
        other => panic!("expected a single atom, got {:?}", other),
    }
}

#[test]
fn speed_cap_normalizes_units() {
    let spec = example_spec();
    let view = spec.view("SpeedCap").unwrap();
    let f = translate_view(
        view,
        &bulletin(&spec),
        &spec.pool(),
        &spec.world,
        Strictness::Strict,
    )
    .unwrap();
    match f {
        VFormula::Atom(a) => {
            // 120 km/h = 100/3 m/s exactly
            assert_eq!(a.rhs, BigRational::new(100.into(), 3.into()));
            let approx = 100.0 / 3.0;
            assert!((approx - 33.33f64).abs() < 1e-2);
        }
        other => panic!("expected a single atom, got {:?}", other),
    }
}

#[test]
fn quantified_view_expands_over_the_pool() {
    let spec = example_spec();
    let view = spec.view("NoCarBetween").unwrap();
    let f = translate_view(
        view,
        &bulletin(&spec),
        &spec.pool(),
        &spec.world,
        Strictness::Strict,
    )
    .unwrap();
    // Two lanes: the existential becomes a two-way disjunction. All cars
    // are bulletin-bound, so the forbid body expands over zero candidates
    // and each disjunct is the pure containment conjunction (11 atoms).
    match &f {
        VFormula::Or(disjuncts) => {
            assert_eq!(disjuncts.len(), 2);
            for d in disjuncts {
                let mut atoms = Vec::new();
                atoms_of(d, &mut atoms);
                assert_eq!(atoms.len(), 11);
            }
        }
        other => panic!("expected a disjunction, got {:?}", other),
    }
}

#[test]
fn exists_over_empty_pool_is_false() {
    let spec = parse_spec(
        "objects { carI: Car; }\n\
         view NeedsLane {\n\
           exists l: Lane { order_x l.xmin < carI.xmin; }\n\
         }\n",
        "nolane.tsc",
    )
    .unwrap();
    let f = translate_view(
        spec.view("NeedsLane").unwrap(),
        &bulletin(&spec),
        &spec.pool(),
        &spec.world,
        Strictness::Strict,
    )
    .unwrap();
    assert_eq!(f, VFormula::False);
}

/// Random valuations over the terms a view mentions.
fn random_valuation(seed: &mut u64, terms: &BTreeSet<AnchorTerm>) -> Valuation {
    let mut val = Valuation::new();
    for t in terms {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let v = ((*seed >> 16) % 41) as i64 - 20;
        val.insert(t.clone(), rat(v));
    }
    val
}

/// All terms the frame tree mentions, for every binding combination.
fn all_ground_terms(spec: &Specification, view_name: &str) -> BTreeSet<AnchorTerm> {
    // ground terms = bulletin objects x the attributes used anywhere
    let view = spec.view(view_name).unwrap();
    let mut attrs = BTreeSet::new();
    let mut stack = vec![&view.root];
    while let Some(f) = stack.pop() {
        for chain in &f.orders {
            for a in &chain.anchors {
                attrs.insert(a.attr);
            }
        }
        for d in &f.dists {
            attrs.insert(d.from.attr);
            attrs.insert(d.to.attr);
        }
        for c in &f.constraints {
            for (_, t) in &c.terms {
                attrs.insert(t.attr);
            }
        }
        for ch in &f.children {
            stack.push(ch);
        }
    }
    let mut out = BTreeSet::new();
    for (obj, _) in spec.pool() {
        for a in &attrs {
            out.insert(AnchorTerm::new(&obj, *a));
        }
    }
    out
}

#[test]
fn translation_agrees_with_frame_semantics() {
    let spec = example_spec();
    let mut seed = 0xA5A5A5A5u64;
    for view_name in ["CrossesBorder", "FarBehind", "SpeedCap", "NoCarBetween"] {
        let view = spec.view(view_name).unwrap();
        let strict = translate_view(
            view,
            &bulletin(&spec),
            &spec.pool(),
            &spec.world,
            Strictness::Strict,
        )
        .unwrap();
        let terms = all_ground_terms(&spec, view_name);
        let excluded: BTreeSet<String> = bulletin(&spec).keys().cloned().collect();
        let ctx = OracleCtx::new(&spec, excluded);
        for _ in 0..250 {
            let val = random_valuation(&mut seed, &terms);
            let direct = eval_view(&ctx, view, &val).unwrap();
            let translated = strict.eval(&val).unwrap();
            assert_eq!(
                direct, translated,
                "view {} disagrees on {:?}",
                view_name, val
            );
        }
    }
}

#[test]
fn relaxation_is_monotone() {
    let spec = example_spec();
    let mut seed = 0x5A5A5A5Au64;
    for view_name in ["CrossesBorder", "FarBehind", "SpeedCap", "NoCarBetween"] {
        let view = spec.view(view_name).unwrap();
        let strict = translate_view(
            view,
            &bulletin(&spec),
            &spec.pool(),
            &spec.world,
            Strictness::Strict,
        )
        .unwrap();
        let relaxed = translate_view(
            view,
            &bulletin(&spec),
            &spec.pool(),
            &spec.world,
            Strictness::RelaxedEnd,
        )
        .unwrap();
        let terms = all_ground_terms(&spec, view_name);
        for _ in 0..250 {
            let val = random_valuation(&mut seed, &terms);
            if strict.eval(&val).unwrap() {
                assert!(
                    relaxed.eval(&val).unwrap(),
                    "strict satisfied but relaxed not, view {}",
                    view_name
                );
            }
        }
    }
}

#[test]
fn translation_is_quantifier_free_and_linear() {
    let spec = example_spec();
    for view_name in ["CrossesBorder", "FarBehind", "SpeedCap", "NoCarBetween"] {
        let f = translate_view(
            spec.view(view_name).unwrap(),
            &bulletin(&spec),
            &spec.pool(),
            &spec.world,
            Strictness::Strict,
        )
        .unwrap();
        let mut atoms = Vec::new();
        atoms_of(&f, &mut atoms);
        for a in &atoms {
            assert!(!a.terms.is_empty());
            for (_, t) in &a.terms {
                // every term is a ground object attribute
                assert!(spec.object(&t.symbol).is_some(), "unbound {}", t);
                let _ = Attr::parse(t.attr.name()).unwrap();
            }
        }
    }
}
