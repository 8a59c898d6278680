//! Witness trajectories: extraction from sufficient-mode models,
//! numerical validation against the single-track model, and export.

use crate::bmc::BmcProblem;
use crate::checksat::{rat_to_f64, spline_vars};
use crate::diag::DomainError;
use crate::formula::{instanced, Model, Rat};
use crate::model::Attr;
use crate::oracle::{eval_view, OracleCtx, Valuation};
use crate::spec::Specification;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// One quadratic Bézier segment (control points in meters).
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSegment {
    pub p0: (Rat, Rat),
    pub p1: (Rat, Rat),
    pub p2: (Rat, Rat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarTrace {
    pub name: String,
    pub segments: Vec<SplineSegment>,
    /// Per-segment heading from the model (used at zero speed).
    pub headings: Vec<Rat>,
}

/// An interval of steps on which a view's activation literal held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSpan {
    pub view: String,
    pub from_step: usize,
    pub to_step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Step duration in seconds.
    pub delta: Rat,
    pub cars: Vec<CarTrace>,
    /// Static object attribute values (name -> attribute -> value).
    pub statics: BTreeMap<String, BTreeMap<String, Rat>>,
    pub annotations: Vec<ActiveSpan>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.cars.first().map(|c| c.segments.len()).unwrap_or(0)
    }

    pub fn total_duration(&self) -> f64 {
        rat_to_f64(&self.delta) * self.steps() as f64
    }
}

/// Read control points, headings, static attributes and active chart
/// intervals from a satisfying model by their deterministic names.
pub fn extract_witness(model: &Model, problem: &BmcProblem) -> Result<Trajectory, DomainError> {
    let n = problem.meta.depth;
    let delta = problem
        .meta
        .delta
        .clone()
        .ok_or_else(|| DomainError::new("not a fixed-step problem"))?;
    let real = |name: &str| -> Result<Rat, DomainError> {
        model
            .get_real(name)
            .cloned()
            .map_err(|e| DomainError::new(format!("extraction: {}", e)))
    };
    let mut cars = Vec::new();
    for sym in &problem.meta.cars {
        let var = |field: &str, step: usize| instanced(&format!("{}.{}", sym, field), step);
        let mut segments = Vec::new();
        let mut headings = Vec::new();
        for i in 0..n {
            let p0 = (
                real(&var(spline_vars::P0X, i))?,
                real(&var(spline_vars::P0Y, i))?,
            );
            let p1 = (
                real(&var(spline_vars::P1X, i))?,
                real(&var(spline_vars::P1Y, i))?,
            );
            let p2 = (
                real(&var(spline_vars::P0X, i + 1))?,
                real(&var(spline_vars::P0Y, i + 1))?,
            );
            segments.push(SplineSegment { p0, p1, p2 });
            headings.push(real(&var(spline_vars::HDG, i))?);
        }
        cars.push(CarTrace {
            name: sym.clone(),
            segments,
            headings,
        });
    }
    let mut statics = BTreeMap::new();
    for sym in &problem.meta.statics {
        let mut attrs = BTreeMap::new();
        for attr in [Attr::Start, Attr::Length, Attr::Width, Attr::Offset] {
            let name = format!("{}.{}", sym, attr.name());
            if let Ok(v) = model.get_real(&name) {
                attrs.insert(attr.name().to_string(), v.clone());
            }
        }
        if !attrs.is_empty() {
            statics.insert(sym.clone(), attrs);
        }
    }
    let mut annotations = Vec::new();
    for (view, lit) in &problem.meta.view_lits {
        let mut run_start: Option<usize> = None;
        for i in 0..=n {
            let active = i < n && model.get_bool(&instanced(lit, i)).unwrap_or(false);
            match (active, run_start) {
                (true, None) => run_start = Some(i),
                (false, Some(s)) => {
                    annotations.push(ActiveSpan {
                        view: view.clone(),
                        from_step: s,
                        to_step: i,
                    });
                    run_start = None;
                }
                _ => {}
            }
        }
    }
    Ok(Trajectory {
        delta,
        cars,
        statics,
        annotations,
    })
}

// ---- closed-form spline evaluation --------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct SegF {
    pub p0: (f64, f64),
    pub p1: (f64, f64),
    pub p2: (f64, f64),
    pub delta: f64,
}

impl SegF {
    pub fn from_segment(seg: &SplineSegment, delta: &Rat) -> SegF {
        SegF {
            p0: (rat_to_f64(&seg.p0.0), rat_to_f64(&seg.p0.1)),
            p1: (rat_to_f64(&seg.p1.0), rat_to_f64(&seg.p1.1)),
            p2: (rat_to_f64(&seg.p2.0), rat_to_f64(&seg.p2.1)),
            delta: rat_to_f64(delta),
        }
    }

    /// p(t) for t in [0, delta].
    pub fn pos(&self, t: f64) -> (f64, f64) {
        let s = t / self.delta;
        let u = 1.0 - s;
        (
            self.p0.0 * u * u + 2.0 * self.p1.0 * u * s + self.p2.0 * s * s,
            self.p0.1 * u * u + 2.0 * self.p1.1 * u * s + self.p2.1 * s * s,
        )
    }

    /// First derivative in time.
    pub fn vel(&self, t: f64) -> (f64, f64) {
        let s = t / self.delta;
        let u = 1.0 - s;
        (
            2.0 / self.delta * (u * (self.p1.0 - self.p0.0) + s * (self.p2.0 - self.p1.0)),
            2.0 / self.delta * (u * (self.p1.1 - self.p0.1) + s * (self.p2.1 - self.p1.1)),
        )
    }

    /// Second derivative in time (constant over the segment).
    pub fn acc(&self) -> (f64, f64) {
        (
            2.0 / (self.delta * self.delta) * (self.p2.0 - 2.0 * self.p1.0 + self.p0.0),
            2.0 / (self.delta * self.delta) * (self.p2.1 - 2.0 * self.p1.1 + self.p0.1),
        )
    }

    /// Signed curvature at t; caller must guard near-zero speed.
    pub fn curvature(&self, t: f64) -> f64 {
        let (vx, vy) = self.vel(t);
        let (ax, ay) = self.acc();
        let speed2 = vx * vx + vy * vy;
        (vx * ay - vy * ax) / speed2.powf(1.5)
    }
}

/// Worst-case margins of a trajectory against the single-track limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub samples_per_segment: usize,
    pub c1_gap_max: f64,
    pub kappa_max: f64,
    pub kappa_bound: f64,
    pub lat_acc_max: f64,
    pub lat_acc_bound: f64,
    pub view_violations: usize,
    pub view_samples: usize,
}

/// Evaluate the spline in closed form and check C1 continuity, curvature,
/// lateral acceleration, and every active view at sampled time points.
pub fn validate_trajectory(
    traj: &Trajectory,
    spec: &Specification,
    excluded: &BTreeSet<String>,
    samples_per_segment: usize,
    epsilon: f64,
) -> Result<ValidationReport, DomainError> {
    if traj.cars.is_empty() || traj.steps() == 0 {
        return Err(DomainError::new("empty trajectory"));
    }
    let samples = samples_per_segment.max(2);
    let mut c1_gap_max: f64 = 0.0;
    let mut kappa_max: f64 = 0.0;
    let mut lat_max: f64 = 0.0;
    let mut kappa_bound: f64 = f64::INFINITY;
    let mut lat_bound: f64 = f64::INFINITY;

    for car in &traj.cars {
        let params = spec.params_for(&car.name);
        kappa_bound = kappa_bound.min(params.curvature_max());
        lat_bound = lat_bound.min(params.a_lat_max);
        let segs: Vec<SegF> = car
            .segments
            .iter()
            .map(|s| SegF::from_segment(s, &traj.delta))
            .collect();
        for w in segs.windows(2) {
            let (ax, ay) = w[0].vel(w[0].delta);
            let (bx, by) = w[1].vel(0.0);
            let gap = ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt();
            c1_gap_max = c1_gap_max.max(gap);
        }
        for seg in &segs {
            for k in 0..samples {
                let t = seg.delta * (k as f64) / (samples as f64);
                let (vx, vy) = seg.vel(t);
                let speed = (vx * vx + vy * vy).sqrt();
                if speed > epsilon {
                    let kappa = seg.curvature(t).abs();
                    kappa_max = kappa_max.max(kappa);
                    lat_max = lat_max.max(speed * speed * kappa);
                }
            }
        }
    }

    // Every active view at every sample in its closed-open interval.
    let ctx = OracleCtx::new(spec, excluded.clone());
    let mut view_violations = 0usize;
    let mut view_samples = 0usize;
    for span in &traj.annotations {
        let view = spec
            .view(&span.view)
            .ok_or_else(|| DomainError::new(format!("unknown view {}", span.view)))?;
        for step in span.from_step..span.to_step {
            for k in 0..samples {
                let delta_f = rat_to_f64(&traj.delta);
                let t = delta_f * (k as f64) / (samples as f64);
                let val = sample_valuation(traj, spec, step, t, epsilon)?;
                view_samples += 1;
                if !eval_view(&ctx, view, &val)? {
                    view_violations += 1;
                }
            }
        }
    }

    let valid = c1_gap_max <= epsilon
        && kappa_max <= kappa_bound + epsilon
        && lat_max <= lat_bound + epsilon
        && view_violations == 0;
    Ok(ValidationReport {
        valid,
        samples_per_segment: samples,
        c1_gap_max,
        kappa_max,
        kappa_bound,
        lat_acc_max: lat_max,
        lat_acc_bound: lat_bound,
        view_violations,
        view_samples,
    })
}

/// Valuation of all object attributes at time offset `t` within `step`.
pub fn sample_valuation(
    traj: &Trajectory,
    spec: &Specification,
    step: usize,
    t: f64,
    epsilon: f64,
) -> Result<Valuation, DomainError> {
    use crate::model::{CarState, LaneState, ObjectState};
    let mut states: Vec<(String, ObjectState)> = Vec::new();
    for car in &traj.cars {
        let seg = SegF::from_segment(&car.segments[step], &traj.delta);
        let (x, y) = seg.pos(t);
        let (vx, vy) = seg.vel(t);
        let speed = (vx * vx + vy * vy).sqrt();
        let theta = if speed > epsilon {
            vy.atan2(vx)
        } else {
            rat_to_f64(&car.headings[step])
        };
        let params = spec.params_for(&car.name);
        let (ax, ay) = seg.acc();
        // longitudinal acceleration = d|p'|/dt
        let a = if speed > epsilon {
            (vx * ax + vy * ay) / speed
        } else {
            (ax * ax + ay * ay).sqrt()
        };
        let kappa = if speed > epsilon {
            seg.curvature(t)
        } else {
            0.0
        };
        let delta_steer = (kappa * params.wheel_base).atan();
        states.push((
            car.name.clone(),
            ObjectState::Car(CarState {
                x,
                y,
                v: speed,
                theta,
                a,
                delta: delta_steer,
            }),
        ));
    }
    for (name, attrs) in &traj.statics {
        let get = |k: &str| attrs.get(k).map(rat_to_f64).unwrap_or(0.0);
        states.push((
            name.clone(),
            ObjectState::Lane(LaneState {
                start: get("start"),
                length: get("length"),
                width: get("width"),
                offset: get("offset"),
            }),
        ));
    }
    crate::oracle::valuation_from_states(spec, &states)
}

// ---- export --------------------------------------------------------------

/// Machine format: exact rationals for control points, schema versioned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryDoc {
    pub schema_version: u32,
    /// Step duration as an exact rational string `p/q`.
    pub delta: String,
    pub cars: Vec<CarDoc>,
    pub statics: BTreeMap<String, BTreeMap<String, String>>,
    pub annotations: Vec<ActiveSpan>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CarDoc {
    pub name: String,
    /// Segments as [p0x, p0y, p1x, p1y, p2x, p2y] rational strings.
    pub segments: Vec<[String; 6]>,
    pub headings: Vec<String>,
}

fn rat_string(r: &Rat) -> String {
    crate::dsl::rat_str(r)
}

fn parse_rat(s: &str) -> Result<Rat, DomainError> {
    if let Some((n, d)) = s.split_once('/') {
        let num =
            crate::dsl::parse_decimal(n.trim()).ok_or_else(|| DomainError::new("bad rational"))?;
        let den =
            crate::dsl::parse_decimal(d.trim()).ok_or_else(|| DomainError::new("bad rational"))?;
        Ok(num / den)
    } else {
        crate::dsl::parse_decimal(s.trim()).ok_or_else(|| DomainError::new("bad rational"))
    }
}

impl Trajectory {
    pub fn to_doc(&self) -> TrajectoryDoc {
        TrajectoryDoc {
            schema_version: 1,
            delta: rat_string(&self.delta),
            cars: self
                .cars
                .iter()
                .map(|c| CarDoc {
                    name: c.name.clone(),
                    segments: c
                        .segments
                        .iter()
                        .map(|s| {
                            [
                                rat_string(&s.p0.0),
                                rat_string(&s.p0.1),
                                rat_string(&s.p1.0),
                                rat_string(&s.p1.1),
                                rat_string(&s.p2.0),
                                rat_string(&s.p2.1),
                            ]
                        })
                        .collect(),
                    headings: c.headings.iter().map(rat_string).collect(),
                })
                .collect(),
            statics: self
                .statics
                .iter()
                .map(|(k, attrs)| {
                    (
                        k.clone(),
                        attrs
                            .iter()
                            .map(|(a, v)| (a.clone(), rat_string(v)))
                            .collect(),
                    )
                })
                .collect(),
            annotations: self.annotations.clone(),
        }
    }

    pub fn from_doc(doc: &TrajectoryDoc) -> Result<Trajectory, DomainError> {
        let mut cars = Vec::new();
        for c in &doc.cars {
            let mut segments = Vec::new();
            for s in &c.segments {
                segments.push(SplineSegment {
                    p0: (parse_rat(&s[0])?, parse_rat(&s[1])?),
                    p1: (parse_rat(&s[2])?, parse_rat(&s[3])?),
                    p2: (parse_rat(&s[4])?, parse_rat(&s[5])?),
                });
            }
            cars.push(CarTrace {
                name: c.name.clone(),
                segments,
                headings: c
                    .headings
                    .iter()
                    .map(|h| parse_rat(h))
                    .collect::<Result<_, _>>()?,
            });
        }
        let mut statics = BTreeMap::new();
        for (k, attrs) in &doc.statics {
            let mut out = BTreeMap::new();
            for (a, v) in attrs {
                out.insert(a.clone(), parse_rat(v)?);
            }
            statics.insert(k.clone(), out);
        }
        Ok(Trajectory {
            delta: parse_rat(&doc.delta)?,
            cars,
            statics,
            annotations: doc.annotations.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Trajectory, DomainError> {
        let doc: TrajectoryDoc = serde_json::from_str(text)
            .map_err(|e| DomainError::new(format!("malformed trajectory: {}", e)))?;
        Trajectory::from_doc(&doc)
    }

    /// Time-sampled table: t, then per car x, y, v, theta.
    pub fn to_csv(&self, sample_hz: f64, epsilon: f64) -> String {
        let mut out = String::from("t");
        for car in &self.cars {
            out.push_str(&format!(",{0}.x,{0}.y,{0}.v,{0}.theta", car.name));
        }
        out.push('\n');
        let delta_f = rat_to_f64(&self.delta);
        let total = delta_f * self.steps() as f64;
        let dt = 1.0 / sample_hz;
        let mut t = 0.0;
        while t <= total + 1e-9 {
            out.push_str(&format!("{:.3}", t));
            for car in &self.cars {
                let step = ((t / delta_f) as usize).min(self.steps() - 1);
                let local = t - step as f64 * delta_f;
                let seg = SegF::from_segment(&car.segments[step], &self.delta);
                let (x, y) = seg.pos(local);
                let (vx, vy) = seg.vel(local);
                let speed = (vx * vx + vy * vy).sqrt();
                let theta = if speed > epsilon {
                    vy.atan2(vx)
                } else {
                    rat_to_f64(&car.headings[step])
                };
                out.push_str(&format!(",{:.6},{:.6},{:.6},{:.6}", x, y, speed, theta));
            }
            out.push('\n');
            t += dt;
        }
        out
    }
}

/// A zero-length idle trajectory for one parked car (testing aid).
pub fn idle_trajectory(name: &str, x: f64, y: f64, steps: usize, delta: Rat) -> Trajectory {
    let p = (
        BigRational::from_float(x).unwrap(),
        BigRational::from_float(y).unwrap(),
    );
    let seg = SplineSegment {
        p0: p.clone(),
        p1: p.clone(),
        p2: p.clone(),
    };
    Trajectory {
        delta,
        cars: vec![CarTrace {
            name: name.to_string(),
            segments: vec![seg; steps],
            headings: vec![Rat::zero(); steps],
        }],
        statics: BTreeMap::new(),
        annotations: Vec::new(),
    }
}

use num_traits::Zero;

/// Steps on which a given view was active.
pub fn active_view_steps(traj: &Trajectory, view: &str) -> Vec<(usize, usize)> {
    traj.annotations
        .iter()
        .filter(|a| a.view == view)
        .map(|a| (a.from_step, a.to_step))
        .collect()
}
