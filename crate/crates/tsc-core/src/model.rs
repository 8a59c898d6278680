//! World model: object types, vehicle geometry, object states, and the
//! derived bounding-box attributes of the road coordinate system.
//!
//! The coordinate system is road-aligned: the x axis is the reference line
//! of the rightmost lane. A car state is the rear-axle reference point
//! (x, y) plus speed, heading, acceleration and steering angle; its
//! axis-aligned bounding box is derived from the vehicle dimensions
//! G (rear overhang), L (wheel base), F (front overhang) and W (width)
//! rotated by the heading.

use crate::diag::DomainError;
use std::collections::BTreeMap;
use std::fmt;

pub const DEFAULT_GRAVITY: f64 = 9.81;

/// Vehicle geometry class and single-track-model limits.
#[derive(Debug, Clone, PartialEq)]
pub struct CarParams {
    /// Rear overhang G in meters.
    pub rear_overhang: f64,
    /// Wheel base L in meters.
    pub wheel_base: f64,
    /// Front overhang F in meters.
    pub front_overhang: f64,
    /// Width W in meters.
    pub width: f64,
    /// Maximum steering angle in radians.
    pub delta_max: f64,
    /// Maximum lateral acceleration in m/s²; default 0.4·g.
    pub a_lat_max: f64,
}

impl Default for CarParams {
    fn default() -> Self {
        CarParams {
            rear_overhang: 1.0,
            wheel_base: 2.7,
            front_overhang: 0.9,
            width: 1.8,
            delta_max: 0.55,
            a_lat_max: 0.4 * DEFAULT_GRAVITY,
        }
    }
}

impl CarParams {
    pub fn validate(&self) -> Result<(), DomainError> {
        let ok = self.rear_overhang > 0.0
            && self.wheel_base > 0.0
            && self.front_overhang > 0.0
            && self.width > 0.0
            && self.delta_max > 0.0
            && self.delta_max < std::f64::consts::FRAC_PI_2
            && self.a_lat_max > 0.0;
        if ok {
            Ok(())
        } else {
            Err(DomainError::new("invalid vehicle parameters"))
        }
    }

    /// Curvature bound tan(delta_max)/L of the single track model.
    pub fn curvature_max(&self) -> f64 {
        self.delta_max.tan() / self.wheel_base
    }

    /// The four bounding-rectangle corners relative to the reference point.
    pub fn corners(&self) -> [(f64, f64); 4] {
        let g = self.rear_overhang;
        let lf = self.wheel_base + self.front_overhang;
        let hw = self.width / 2.0;
        [(-g, -hw), (-g, hw), (lf, -hw), (lf, hw)]
    }
}

/// Built-in object type hierarchy (MovingObject <- Car; StationaryObject; Lane).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectTypeDef {
    pub name: String,
    pub parent: Option<String>,
    pub attributes: Vec<Attr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldModel {
    pub object_types: Vec<ObjectTypeDef>,
    pub car_params: CarParams,
    pub gravity: f64,
}

impl Default for WorldModel {
    fn default() -> Self {
        WorldModel::standard()
    }
}

impl WorldModel {
    pub fn standard() -> Self {
        let moving = ObjectTypeDef {
            name: "MovingObject".into(),
            parent: None,
            attributes: vec![
                Attr::X,
                Attr::Y,
                Attr::V,
                Attr::Theta,
                Attr::A,
                Attr::XMin,
                Attr::XMax,
                Attr::YMin,
                Attr::YMax,
            ],
        };
        let car = ObjectTypeDef {
            name: "Car".into(),
            parent: Some("MovingObject".into()),
            attributes: vec![
                Attr::Delta,
                Attr::BbXMin,
                Attr::BbXMax,
                Attr::BbYMin,
                Attr::BbYMax,
            ],
        };
        let stationary = ObjectTypeDef {
            name: "StationaryObject".into(),
            parent: None,
            attributes: vec![Attr::XMin, Attr::XMax, Attr::YMin, Attr::YMax],
        };
        let lane = ObjectTypeDef {
            name: "Lane".into(),
            parent: Some("StationaryObject".into()),
            attributes: vec![Attr::Start, Attr::Length, Attr::Width, Attr::Offset],
        };
        WorldModel {
            object_types: vec![moving, car, stationary, lane],
            car_params: CarParams::default(),
            gravity: DEFAULT_GRAVITY,
        }
    }

    pub fn type_def(&self, name: &str) -> Option<&ObjectTypeDef> {
        self.object_types.iter().find(|t| t.name == name)
    }

    /// Is `sub` equal to or derived from `sup`?
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sub == sup {
            return true;
        }
        let mut cur = sub;
        while let Some(def) = self.type_def(cur) {
            match &def.parent {
                Some(p) if p == sup => return true,
                Some(p) => cur = p,
                None => return false,
            }
        }
        false
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let mut names = BTreeMap::new();
        for t in &self.object_types {
            if names.insert(t.name.clone(), ()).is_some() {
                return Err(DomainError::new(format!("duplicate type {}", t.name)));
            }
        }
        for required in ["MovingObject", "Car", "StationaryObject", "Lane"] {
            if !names.contains_key(required) {
                return Err(DomainError::new(format!(
                    "missing built-in type {}",
                    required
                )));
            }
        }
        self.car_params.validate()
    }
}

/// Object attributes of the use-case world model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attr {
    X,
    Y,
    V,
    Theta,
    A,
    Delta,
    XMin,
    XMax,
    YMin,
    YMax,
    BbXMin,
    BbXMax,
    BbYMin,
    BbYMax,
    Start,
    Length,
    Width,
    Offset,
}

/// Physical dimension of an attribute, used for unit checking in the DSL.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Speed,
    Accel,
    Angle,
    Time,
    None,
}

impl Attr {
    pub fn parse(s: &str) -> Option<Attr> {
        Some(match s {
            "x" => Attr::X,
            "y" => Attr::Y,
            "v" => Attr::V,
            "theta" => Attr::Theta,
            "a" => Attr::A,
            "delta" => Attr::Delta,
            "xmin" => Attr::XMin,
            "xmax" => Attr::XMax,
            "ymin" => Attr::YMin,
            "ymax" => Attr::YMax,
            "bbxmin" => Attr::BbXMin,
            "bbxmax" => Attr::BbXMax,
            "bbymin" => Attr::BbYMin,
            "bbymax" => Attr::BbYMax,
            "start" => Attr::Start,
            "length" => Attr::Length,
            "width" => Attr::Width,
            "offset" => Attr::Offset,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Attr::X => "x",
            Attr::Y => "y",
            Attr::V => "v",
            Attr::Theta => "theta",
            Attr::A => "a",
            Attr::Delta => "delta",
            Attr::XMin => "xmin",
            Attr::XMax => "xmax",
            Attr::YMin => "ymin",
            Attr::YMax => "ymax",
            Attr::BbXMin => "bbxmin",
            Attr::BbXMax => "bbxmax",
            Attr::BbYMin => "bbymin",
            Attr::BbYMax => "bbymax",
            Attr::Start => "start",
            Attr::Length => "length",
            Attr::Width => "width",
            Attr::Offset => "offset",
        }
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            Attr::V => Dimension::Speed,
            Attr::A => Dimension::Accel,
            Attr::Theta | Attr::Delta => Dimension::Angle,
            _ => Dimension::Length,
        }
    }

    /// Bounding-box offsets and box coordinates are functions of the state.
    pub fn is_derived(&self) -> bool {
        matches!(
            self,
            Attr::XMin
                | Attr::XMax
                | Attr::YMin
                | Attr::YMax
                | Attr::BbXMin
                | Attr::BbXMax
                | Attr::BbYMin
                | Attr::BbYMax
        )
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Concrete state of one object at one time point.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectState {
    Car(CarState),
    Lane(LaneState),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CarState {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
    pub a: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LaneState {
    pub start: f64,
    pub length: f64,
    pub width: f64,
    /// y coordinate of the lane's lower boundary.
    pub offset: f64,
}

/// Bounding-box offset of the vehicle rectangle rotated by `theta`
/// about the rear-axle reference point.
pub fn bb_offset(params: &CarParams, attr: Attr, theta: f64) -> Result<f64, DomainError> {
    let (sin, cos) = theta.sin_cos();
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (cx, cy) in params.corners() {
        let x = cx * cos - cy * sin;
        let y = cx * sin + cy * cos;
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    Ok(match attr {
        Attr::BbXMax => xmax,
        Attr::BbXMin => xmin,
        Attr::BbYMax => ymax,
        Attr::BbYMin => ymin,
        other => {
            return Err(DomainError::new(format!(
                "{} is not a bounding-box offset",
                other
            )))
        }
    })
}

/// Derived attribute of an object state (bounding-box coordinates and offsets).
pub fn derived_attribute(
    state: &ObjectState,
    attr: Attr,
    params: &CarParams,
) -> Result<f64, DomainError> {
    match state {
        ObjectState::Car(c) => match attr {
            Attr::BbXMin | Attr::BbXMax | Attr::BbYMin | Attr::BbYMax => {
                bb_offset(params, attr, c.theta)
            }
            Attr::XMin => Ok(c.x + bb_offset(params, Attr::BbXMin, c.theta)?),
            Attr::XMax => Ok(c.x + bb_offset(params, Attr::BbXMax, c.theta)?),
            Attr::YMin => Ok(c.y + bb_offset(params, Attr::BbYMin, c.theta)?),
            Attr::YMax => Ok(c.y + bb_offset(params, Attr::BbYMax, c.theta)?),
            other => Err(DomainError::new(format!(
                "{} is not a derived attribute",
                other
            ))),
        },
        ObjectState::Lane(l) => match attr {
            Attr::XMin => Ok(l.start),
            Attr::XMax => Ok(l.start + l.length),
            Attr::YMin => Ok(l.offset),
            Attr::YMax => Ok(l.offset + l.width),
            other => Err(DomainError::new(format!(
                "{} is not a derived lane attribute",
                other
            ))),
        },
    }
}

/// Base (stored) attribute of an object state.
pub fn base_attribute(state: &ObjectState, attr: Attr) -> Option<f64> {
    match state {
        ObjectState::Car(c) => Some(match attr {
            Attr::X => c.x,
            Attr::Y => c.y,
            Attr::V => c.v,
            Attr::Theta => c.theta,
            Attr::A => c.a,
            Attr::Delta => c.delta,
            _ => return None,
        }),
        ObjectState::Lane(l) => Some(match attr {
            Attr::Start => l.start,
            Attr::Length => l.length,
            Attr::Width => l.width,
            Attr::Offset => l.offset,
            _ => return None,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_params() -> CarParams {
        CarParams {
            rear_overhang: 1.0,
            wheel_base: 3.0,
            front_overhang: 1.0,
            width: 2.0,
            ..CarParams::default()
        }
    }

    /// Independent oracle: rotate corners, take componentwise extrema.
    fn corner_oracle(p: &CarParams, theta: f64) -> (f64, f64, f64, f64) {
        let mut xmin = f64::INFINITY;
        let mut xmax = f64::NEG_INFINITY;
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for (cx, cy) in p.corners() {
            let x = cx * theta.cos() - cy * theta.sin();
            let y = cx * theta.sin() + cy * theta.cos();
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        (xmin, xmax, ymin, ymax)
    }

    #[test]
    fn axis_aligned_offsets() {
        let p = square_params();
        assert_eq!(bb_offset(&p, Attr::BbXMax, 0.0).unwrap(), 4.0);
        assert_eq!(bb_offset(&p, Attr::BbXMin, 0.0).unwrap(), -1.0);
        assert_eq!(bb_offset(&p, Attr::BbYMax, 0.0).unwrap(), 1.0);
        assert_eq!(bb_offset(&p, Attr::BbYMin, 0.0).unwrap(), -1.0);
    }

    #[test]
    fn quarter_turn_offsets() {
        let p = square_params();
        let th = std::f64::consts::FRAC_PI_2;
        assert!((bb_offset(&p, Attr::BbXMax, th).unwrap() - 1.0).abs() < 1e-12);
        assert!((bb_offset(&p, Attr::BbYMax, th).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn extent_at_zero_heading() {
        let p = CarParams::default();
        let state = ObjectState::Car(CarState {
            x: 10.0,
            y: -2.0,
            ..CarState::default()
        });
        let xmin = derived_attribute(&state, Attr::XMin, &p).unwrap();
        let xmax = derived_attribute(&state, Attr::XMax, &p).unwrap();
        let ymin = derived_attribute(&state, Attr::YMin, &p).unwrap();
        let ymax = derived_attribute(&state, Attr::YMax, &p).unwrap();
        let len = p.rear_overhang + p.wheel_base + p.front_overhang;
        assert!((xmax - xmin - len).abs() < 1e-12);
        assert!((ymax - ymin - p.width).abs() < 1e-12);
    }

    #[test]
    fn dense_sampling_matches_corner_oracle() {
        let p = CarParams::default();
        for k in 0..2000 {
            let theta = -std::f64::consts::PI + k as f64 * (2.0 * std::f64::consts::PI / 2000.0);
            let (xmin, xmax, ymin, ymax) = corner_oracle(&p, theta);
            assert!((bb_offset(&p, Attr::BbXMin, theta).unwrap() - xmin).abs() < 1e-9);
            assert!((bb_offset(&p, Attr::BbXMax, theta).unwrap() - xmax).abs() < 1e-9);
            assert!((bb_offset(&p, Attr::BbYMin, theta).unwrap() - ymin).abs() < 1e-9);
            assert!((bb_offset(&p, Attr::BbYMax, theta).unwrap() - ymax).abs() < 1e-9);
            // Periodicity and well-formedness.
            let wrapped = theta + 2.0 * std::f64::consts::PI;
            assert!(
                (bb_offset(&p, Attr::BbXMax, wrapped).unwrap() - xmax).abs() < 1e-9,
                "2pi periodicity"
            );
            assert!(xmin < xmax && ymin < ymax);
        }
    }

    #[test]
    fn unknown_attribute_is_domain_error() {
        let p = CarParams::default();
        let state = ObjectState::Car(CarState::default());
        assert!(derived_attribute(&state, Attr::V, &p).is_err());
    }

    #[test]
    fn subtype_relation() {
        let wm = WorldModel::standard();
        assert!(wm.is_subtype("Car", "MovingObject"));
        assert!(wm.is_subtype("Lane", "StationaryObject"));
        assert!(!wm.is_subtype("Lane", "MovingObject"));
        assert!(wm.is_subtype("Car", "Car"));
    }
}
