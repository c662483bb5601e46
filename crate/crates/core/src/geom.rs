//! Planar primitives: line segments and circular arcs in the complex plane,
//! with closed-form lengths, exact point distances and winding (argument
//! increment) contributions.

use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// One piece of a curve: a straight segment or a circular arc.
///
/// Arcs are parameterized by angle from `from` to `to`; `to > from` traverses
/// counterclockwise. `|to − from|` may be up to 2π (a full circle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Line {
        #[serde(with = "complex_pair")]
        start: C64,
        #[serde(with = "complex_pair")]
        end: C64,
    },
    Arc {
        #[serde(with = "complex_pair")]
        center: C64,
        radius: f64,
        from: f64,
        to: f64,
    },
}

pub(crate) mod complex_pair {
    use crate::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &C64, s: S) -> Result<S::Ok, S::Error> {
        [v.re, v.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

impl Segment {
    pub fn line(start: C64, end: C64) -> Self {
        Segment::Line { start, end }
    }

    pub fn arc(center: C64, radius: f64, from: f64, to: f64) -> Self {
        Segment::Arc {
            center,
            radius,
            from,
            to,
        }
    }

    /// Full positively-oriented circle.
    pub fn circle(center: C64, radius: f64) -> Self {
        Segment::arc(center, radius, 0.0, TAU)
    }

    pub fn start(&self) -> C64 {
        match self {
            Segment::Line { start, .. } => *start,
            Segment::Arc {
                center,
                radius,
                from,
                ..
            } => center + cx(radius * from.cos(), radius * from.sin()),
        }
    }

    pub fn end(&self) -> C64 {
        match self {
            Segment::Line { end, .. } => *end,
            Segment::Arc {
                center, radius, to, ..
            } => center + cx(radius * to.cos(), radius * to.sin()),
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Segment::Line { start, end } => (end - start).norm(),
            Segment::Arc {
                radius, from, to, ..
            } => radius * (to - from).abs(),
        }
    }

    /// Point at parameter `t ∈ [0, 1]`.
    pub fn point_at(&self, t: f64) -> C64 {
        match self {
            Segment::Line { start, end } => start + (end - start) * cx(t, 0.0),
            Segment::Arc {
                center,
                radius,
                from,
                to,
            } => {
                let th = from + t * (to - from);
                center + cx(radius * th.cos(), radius * th.sin())
            }
        }
    }

    /// Derivative dz/dt at parameter `t ∈ [0, 1]`.
    pub fn derivative_at(&self, t: f64) -> C64 {
        match self {
            Segment::Line { start, end } => end - start,
            Segment::Arc {
                radius, from, to, ..
            } => {
                let th = from + t * (to - from);
                let span = to - from;
                cx(-radius * span * th.sin(), radius * span * th.cos())
            }
        }
    }

    /// Swaps the traversal direction.
    pub fn reversed(&self) -> Segment {
        match self {
            Segment::Line { start, end } => Segment::line(*end, *start),
            Segment::Arc {
                center,
                radius,
                from,
                to,
            } => Segment::arc(*center, *radius, *to, *from),
        }
    }

    /// Distance from `p` to this segment.
    pub fn distance_to_point(&self, p: C64) -> f64 {
        match self {
            Segment::Line { start, end } => dist_point_line_segment(p, *start, *end),
            Segment::Arc {
                center,
                radius,
                from,
                to,
            } => dist_point_arc(p, *center, *radius, *from, *to),
        }
    }

    /// Parameter of the point on the segment closest to `p`.
    pub fn closest_param(&self, p: C64) -> f64 {
        match self {
            Segment::Line { start, end } => {
                let d = end - start;
                let den = d.norm_sqr();
                if den == 0.0 {
                    return 0.0;
                }
                let t = ((p - start).re * d.re + (p - start).im * d.im) / den;
                t.clamp(0.0, 1.0)
            }
            Segment::Arc {
                center, from, to, ..
            } => {
                let ang = (p - center).arg();
                if let Some(t) = param_of_angle(ang, *from, *to) {
                    t
                } else {
                    let ds = (p - self.start()).norm();
                    let de = (p - self.end()).norm();
                    if ds <= de {
                        0.0
                    } else {
                        1.0
                    }
                }
            }
        }
    }

    /// Continuous change of `arg(z − p)` along the segment, assuming `p` is
    /// not on the segment. Exact (up to rounding) for lines; arcs split
    /// adaptively until each piece subtends less than π.
    pub fn winding_contribution(&self, p: C64) -> f64 {
        match self {
            Segment::Line { start, end } => delta_arg(start - p, end - p),
            Segment::Arc {
                center,
                radius,
                from,
                to,
            } => arc_winding(*center, *radius, *from, *to, p),
        }
    }

    /// Contribution of this segment to the signed area enclosed by a closed
    /// curve (Green's theorem, `∮ (x dy − y dx) / 2`).
    pub fn signed_area_contribution(&self) -> f64 {
        match self {
            Segment::Line { start, end } => (start.re * end.im - end.re * start.im) / 2.0,
            Segment::Arc {
                center,
                radius,
                from,
                to,
            } => {
                let r = *radius;
                let span = to - from;
                // r² Δθ + r (c_x (sin θ₁ − sin θ₀) − c_y (cos θ₁ − cos θ₀)), halved
                (r * r * span
                    + r * (center.re * (to.sin() - from.sin())
                        - center.im * (to.cos() - from.cos())))
                    / 2.0
            }
        }
    }

    /// Axis-aligned bounding box `(min_re, max_re, min_im, max_im)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match self {
            Segment::Line { start, end } => (
                start.re.min(end.re),
                start.re.max(end.re),
                start.im.min(end.im),
                start.im.max(end.im),
            ),
            Segment::Arc {
                center,
                radius,
                from,
                to,
            } => {
                let s = self.start();
                let e = self.end();
                let mut lo_re = s.re.min(e.re);
                let mut hi_re = s.re.max(e.re);
                let mut lo_im = s.im.min(e.im);
                let mut hi_im = s.im.max(e.im);
                // include axis extremes crossed by the angular span
                for (k, cand) in [
                    (0.0, cx(center.re + radius, center.im)),
                    (PI / 2.0, cx(center.re, center.im + radius)),
                    (PI, cx(center.re - radius, center.im)),
                    (3.0 * PI / 2.0, cx(center.re, center.im - radius)),
                ] {
                    if param_of_angle(k, *from, *to).is_some() {
                        lo_re = lo_re.min(cand.re);
                        hi_re = hi_re.max(cand.re);
                        lo_im = lo_im.min(cand.im);
                        hi_im = hi_im.max(cand.im);
                    }
                }
                (lo_re, hi_re, lo_im, hi_im)
            }
        }
    }
}

/// Angle increment from `u` to `v` in (−π, π], computed as `arg(v·conj(u))`.
pub fn delta_arg(u: C64, v: C64) -> f64 {
    let w = v * u.conj();
    w.im.atan2(w.re)
}

fn arc_winding(center: C64, radius: f64, from: f64, to: f64, p: C64) -> f64 {
    let span = to - from;
    let u = center + cx(radius * from.cos(), radius * from.sin()) - p;
    let v = center + cx(radius * to.cos(), radius * to.sin()) - p;
    let chord = (v - u).norm();
    let mid_angle = from + span / 2.0;
    let mid = center + cx(radius * mid_angle.cos(), radius * mid_angle.sin());
    // a piece spanning ≤ π/2 whose chord is short relative to the distance
    // from p subtends < π, so the principal value is the true increment
    if span.abs() <= PI / 2.0 && (mid - p).norm() > 2.0 * chord {
        return delta_arg(u, v);
    }
    arc_winding(center, radius, from, mid_angle, p) + arc_winding(center, radius, mid_angle, to, p)
}

/// Maps angle `ang` into the arc parameter if it lies within the span,
/// handling both traversal directions and wraparound.
pub fn param_of_angle(ang: f64, from: f64, to: f64) -> Option<f64> {
    let span = to - from;
    if span.abs() >= TAU - 1e-15 {
        let t = normalize_angle(ang - from) / span.signum() / TAU;
        let t = if t < 0.0 { t + 1.0 } else { t };
        return Some(t.clamp(0.0, 1.0));
    }
    if span >= 0.0 {
        let d = normalize_angle_positive(ang - from);
        if d <= span {
            Some(d / span.max(1e-300))
        } else {
            None
        }
    } else {
        let d = normalize_angle_positive(from - ang);
        if d <= -span {
            Some(d / (-span).max(1e-300))
        } else {
            None
        }
    }
}

/// Wraps into (−π, π].
pub fn normalize_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    x
}

/// Wraps into [0, 2π).
pub fn normalize_angle_positive(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

pub fn dist_point_line_segment(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let den = d.norm_sqr();
    if den == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a).re * d.re + (p - a).im * d.im) / den).clamp(0.0, 1.0);
    (p - (a + d * cx(t, 0.0))).norm()
}

pub fn dist_point_arc(p: C64, center: C64, radius: f64, from: f64, to: f64) -> f64 {
    let u = p - center;
    let ang = u.im.atan2(u.re);
    let radial = (u.norm() - radius).abs();
    if param_of_angle(ang, from, to).is_some() {
        radial
    } else {
        let s = center + cx(radius * from.cos(), radius * from.sin());
        let e = center + cx(radius * to.cos(), radius * to.sin());
        (p - s).norm().min((p - e).norm())
    }
}

fn orient(a: C64, b: C64, c: C64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_intersect(a: C64, b: C64, c: C64, d: C64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: C64, q: C64, r: C64| -> bool {
        orient(p, q, r) == 0.0
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

pub fn dist_segment_segment(a: C64, b: C64, c: C64, d: C64) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    dist_point_line_segment(a, c, d)
        .min(dist_point_line_segment(b, c, d))
        .min(dist_point_line_segment(c, a, b))
        .min(dist_point_line_segment(d, a, b))
}

/// Intersection parameters of the line through (a, b) with the circle
/// (center, radius); returns t values where |a + t(b−a) − center| = radius.
fn line_circle_roots(a: C64, b: C64, center: C64, radius: f64) -> Vec<f64> {
    let d = b - a;
    let f = a - center;
    let qa = d.norm_sqr();
    if qa == 0.0 {
        return Vec::new();
    }
    let qb = 2.0 * (f.re * d.re + f.im * d.im);
    let qc = f.norm_sqr() - radius * radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    vec![(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)]
}

pub fn dist_segment_arc(a: C64, b: C64, center: C64, radius: f64, from: f64, to: f64) -> f64 {
    // crossing: line-circle root inside both the segment and the angular span
    for t in line_circle_roots(a, b, center, radius) {
        if (0.0..=1.0).contains(&t) {
            let q = a + (b - a) * cx(t, 0.0);
            let ang = (q - center).arg();
            if param_of_angle(ang, from, to).is_some() {
                return 0.0;
            }
        }
    }
    let s = center + cx(radius * from.cos(), radius * from.sin());
    let e = center + cx(radius * to.cos(), radius * to.sin());
    let mut best = dist_point_arc(a, center, radius, from, to)
        .min(dist_point_arc(b, center, radius, from, to))
        .min(dist_point_line_segment(s, a, b))
        .min(dist_point_line_segment(e, a, b));
    // interior critical pair: radial foot of the segment point closest to the center
    let d = b - a;
    let den = d.norm_sqr();
    if den > 0.0 {
        let t = (((center - a).re * d.re + (center - a).im * d.im) / den).clamp(0.0, 1.0);
        let q = a + d * cx(t, 0.0);
        let ang = (q - center).arg();
        if param_of_angle(ang, from, to).is_some() {
            best = best.min(((q - center).norm() - radius).abs());
        }
    }
    best
}

pub fn dist_arc_arc(
    c1: C64,
    r1: f64,
    f1: f64,
    t1: f64,
    c2: C64,
    r2: f64,
    f2: f64,
    t2: f64,
) -> f64 {
    let dc = c2 - c1;
    let dd = dc.norm();
    // circle-circle intersections
    if dd > 0.0 && dd <= r1 + r2 && dd >= (r1 - r2).abs() {
        let a = (r1 * r1 - r2 * r2 + dd * dd) / (2.0 * dd);
        let h2 = r1 * r1 - a * a;
        if h2 >= 0.0 {
            let h = h2.max(0.0).sqrt();
            let base = c1 + dc * cx(a / dd, 0.0);
            let off = cx(-dc.im / dd, dc.re / dd) * cx(h, 0.0);
            for q in [base + off, base - off] {
                let a1 = (q - c1).arg();
                let a2 = (q - c2).arg();
                if param_of_angle(a1, f1, t1).is_some() && param_of_angle(a2, f2, t2).is_some() {
                    return 0.0;
                }
            }
        }
    }
    let ends1 = [
        c1 + cx(r1 * f1.cos(), r1 * f1.sin()),
        c1 + cx(r1 * t1.cos(), r1 * t1.sin()),
    ];
    let ends2 = [
        c2 + cx(r2 * f2.cos(), r2 * f2.sin()),
        c2 + cx(r2 * t2.cos(), r2 * t2.sin()),
    ];
    let mut best = f64::INFINITY;
    for p in ends1 {
        best = best.min(dist_point_arc(p, c2, r2, f2, t2));
    }
    for p in ends2 {
        best = best.min(dist_point_arc(p, c1, r1, f1, t1));
    }
    if dd > 0.0 {
        // critical pairs lie along the center line
        let u = dc / cx(dd, 0.0);
        for p1 in [c1 + u * cx(r1, 0.0), c1 - u * cx(r1, 0.0)] {
            if param_of_angle((p1 - c1).arg(), f1, t1).is_some() {
                for p2 in [c2 + u * cx(r2, 0.0), c2 - u * cx(r2, 0.0)] {
                    if param_of_angle((p2 - c2).arg(), f2, t2).is_some() {
                        best = best.min((p1 - p2).norm());
                    }
                }
            }
        }
    } else if (r1 - r2).abs() > 0.0 {
        // concentric circles with different radii: check angular overlap
        for probe in [f1, t1, (f1 + t1) / 2.0] {
            if param_of_angle(probe, f2, t2).is_some() {
                best = best.min((r1 - r2).abs());
            }
        }
    }
    best
}

/// Distance between two segments of any kind.
pub fn dist_segments(s1: &Segment, s2: &Segment) -> f64 {
    match (s1, s2) {
        (Segment::Line { start: a, end: b }, Segment::Line { start: c, end: d }) => {
            dist_segment_segment(*a, *b, *c, *d)
        }
        (
            Segment::Line { start: a, end: b },
            Segment::Arc {
                center,
                radius,
                from,
                to,
            },
        )
        | (
            Segment::Arc {
                center,
                radius,
                from,
                to,
            },
            Segment::Line { start: a, end: b },
        ) => dist_segment_arc(*a, *b, *center, *radius, *from, *to),
        (
            Segment::Arc {
                center: c1,
                radius: r1,
                from: f1,
                to: t1,
            },
            Segment::Arc {
                center: c2,
                radius: r2,
                from: f2,
                to: t2,
            },
        ) => dist_arc_arc(*c1, *r1, *f1, *t1, *c2, *r2, *f2, *t2),
    }
}
