//! SVG rendering of witness trajectories: lanes as bands, car bounding
//! boxes at step boundaries, spline paths as native quadratic curves.

use crate::checksat::rat_to_f64;
use crate::model::{bb_offset, Attr};
use crate::spec::Specification;
use crate::trajectory::{SegF, Trajectory};
use std::fmt::Write;

const CAR_COLORS: [&str; 6] = [
    "#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085",
];

pub fn render_svg(traj: &Trajectory, spec: &Specification) -> String {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for attrs in traj.statics.values() {
        let get = |k: &str| attrs.get(k).map(rat_to_f64).unwrap_or(0.0);
        points.push((get("start"), get("offset")));
        points.push((get("start") + get("length"), get("offset") + get("width")));
    }
    for car in &traj.cars {
        for seg in &car.segments {
            for p in [&seg.p0, &seg.p1, &seg.p2] {
                points.push((rat_to_f64(&p.0), rat_to_f64(&p.1)));
            }
        }
    }
    if points.is_empty() {
        points.push((0.0, 0.0));
        points.push((10.0, 10.0));
    }
    let min_x = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max_x = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let min_y = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max_y = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let pad = 5.0;
    let (x0, y0) = (min_x - pad, min_y - pad);
    let (w, h) = (max_x - min_x + 2.0 * pad, max_y - min_y + 2.0 * pad);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{:.2} {:.2} {:.2} {:.2}" width="900">"#,
        x0,
        -(y0 + h),
        w,
        h
    );
    // Flip y so the road coordinate frame reads bottom-up.
    let _ = writeln!(out, r#"<g transform="scale(1,-1)">"#);

    for (name, attrs) in &traj.statics {
        let get = |k: &str| attrs.get(k).map(rat_to_f64).unwrap_or(0.0);
        let _ = writeln!(
            out,
            r##"<rect class="lane" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#d5d8dc" stroke="#7f8c8d" stroke-width="0.1"><title>{}</title></rect>"##,
            get("start"),
            get("offset"),
            get("length"),
            get("width"),
            name
        );
    }

    for (ci, car) in traj.cars.iter().enumerate() {
        let color = CAR_COLORS[ci % CAR_COLORS.len()];
        if car.segments.is_empty() {
            continue;
        }
        let mut d = String::new();
        let s0 = &car.segments[0];
        let _ = write!(
            d,
            "M {:.3} {:.3}",
            rat_to_f64(&s0.p0.0),
            rat_to_f64(&s0.p0.1)
        );
        for seg in &car.segments {
            let _ = write!(
                d,
                " Q {:.3} {:.3} {:.3} {:.3}",
                rat_to_f64(&seg.p1.0),
                rat_to_f64(&seg.p1.1),
                rat_to_f64(&seg.p2.0),
                rat_to_f64(&seg.p2.1)
            );
        }
        let _ = writeln!(
            out,
            r#"<path class="car-path" d="{}" fill="none" stroke="{}" stroke-width="0.25"><title>{}</title></path>"#,
            d, color, car.name
        );
        // Bounding boxes at step boundaries.
        let params = spec.params_for(&car.name);
        for (i, seg) in car.segments.iter().enumerate() {
            let f = SegF::from_segment(seg, &traj.delta);
            let (x, y) = f.pos(0.0);
            let (vx, vy) = f.vel(0.0);
            let theta = if (vx * vx + vy * vy).sqrt() > 1e-9 {
                vy.atan2(vx)
            } else {
                rat_to_f64(&car.headings[i])
            };
            let bbx_min = bb_offset(params, Attr::BbXMin, theta).unwrap_or(0.0);
            let bbx_max = bb_offset(params, Attr::BbXMax, theta).unwrap_or(0.0);
            let bby_min = bb_offset(params, Attr::BbYMin, theta).unwrap_or(0.0);
            let bby_max = bb_offset(params, Attr::BbYMax, theta).unwrap_or(0.0);
            let _ = writeln!(
                out,
                r#"<rect class="car-box" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{}" stroke-width="0.08" opacity="0.6"/>"#,
                x + bbx_min,
                y + bby_min,
                bbx_max - bbx_min,
                bby_max - bby_min,
                color
            );
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}
