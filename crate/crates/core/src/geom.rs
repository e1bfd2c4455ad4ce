//! Small vector helpers. Points are `(x, y, z, t)`; three-dimensional models keep `z = 0`.

pub type Point = [f64; 4];
pub type Vec3 = [f64; 3];

pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

pub fn lerp(a: &Point, b: &Point, s: f64) -> Point {
    [
        a[0] + s * (b[0] - a[0]),
        a[1] + s * (b[1] - a[1]),
        a[2] + s * (b[2] - a[2]),
        a[3] + s * (b[3] - a[3]),
    ]
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_dist(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let s = (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0);
    dist(p, &lerp(a, b, s))
}

/// Distance from `p` to a polyline; `closed` adds the wrap-around segment.
pub fn point_polyline_dist(p: &Point, pts: &[Point], closed: bool) -> f64 {
    match pts.len() {
        0 => f64::INFINITY,
        1 => dist(p, &pts[0]),
        _ => {
            let mut best = pts
                .windows(2)
                .map(|w| point_segment_dist(p, &w[0], &w[1]))
                .fold(f64::INFINITY, f64::min);
            if closed {
                best = best.min(point_segment_dist(p, &pts[pts.len() - 1], &pts[0]));
            }
            best
        }
    }
}

pub fn polyline_length(pts: &[Point], closed: bool) -> f64 {
    let mut len: f64 = pts.windows(2).map(|w| dist(&w[0], &w[1])).sum();
    if closed && pts.len() > 1 {
        len += dist(&pts[pts.len() - 1], &pts[0]);
    }
    len
}

/// Point at fraction `s ∈ [0, 1]` of the arclength of a polyline.
pub fn point_at_fraction(pts: &[Point], closed: bool, s: f64) -> Point {
    let total = polyline_length(pts, closed);
    if pts.len() < 2 || total == 0.0 {
        return pts[0];
    }
    let mut target = s.clamp(0.0, 1.0) * total;
    let n = pts.len();
    let segs = if closed { n } else { n - 1 };
    for i in 0..segs {
        let a = &pts[i];
        let b = &pts[(i + 1) % n];
        let l = dist(a, b);
        if target <= l || i + 1 == segs {
            let f = if l > 0.0 { (target / l).min(1.0) } else { 0.0 };
            return lerp(a, b, f);
        }
        target -= l;
    }
    pts[n - 1]
}

/// Arclength fraction of the point on the polyline closest to `p`.
pub fn fraction_of_nearest(pts: &[Point], closed: bool, p: &Point) -> f64 {
    let total = polyline_length(pts, closed);
    if pts.len() < 2 || total == 0.0 {
        return 0.0;
    }
    let n = pts.len();
    let segs = if closed { n } else { n - 1 };
    let mut best = (f64::INFINITY, 0.0);
    let mut acc = 0.0;
    for i in 0..segs {
        let a = &pts[i];
        let b = &pts[(i + 1) % n];
        let ab = sub(b, a);
        let len2 = dot(&ab, &ab);
        let l = len2.sqrt();
        let s = if len2 > 0.0 { (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let d = dist(p, &lerp(a, b, s));
        if d < best.0 {
            best = (d, (acc + s * l) / total);
        }
        acc += l;
    }
    best.1
}

pub fn spatial(p: &Point) -> Vec3 {
    [p[0], p[1], p[2]]
}

pub fn v3_sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn v3_dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn v3_cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn v3_norm(a: &Vec3) -> f64 {
    v3_dot(a, a).sqrt()
}

pub fn v3_scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn v3_add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn v3_lerp(a: &Vec3, b: &Vec3, s: f64) -> Vec3 {
    v3_add(a, &v3_scale(&v3_sub(b, a), s))
}

/// Minimum distance between 3D segments `[p0, p1]` and `[q0, q1]`.
pub fn segment_segment_dist(p0: &Vec3, p1: &Vec3, q0: &Vec3, q1: &Vec3) -> f64 {
    let d1 = v3_sub(p1, p0);
    let d2 = v3_sub(q1, q0);
    let r = v3_sub(p0, q0);
    let a = v3_dot(&d1, &d1);
    let e = v3_dot(&d2, &d2);
    let f = v3_dot(&d2, &r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return v3_norm(&r);
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = v3_dot(&d1, &r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = v3_dot(&d1, &d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let cp = v3_add(p0, &v3_scale(&d1, s));
    let cq = v3_add(q0, &v3_scale(&d2, t));
    v3_norm(&v3_sub(&cp, &cq))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_cases() {
        let d = segment_segment_dist(&[0., 0., 0.], &[1., 0., 0.], &[0.5, -1., 1.], &[0.5, 1., 1.]);
        assert!((d - 1.0).abs() < 1e-12);
        let d = segment_segment_dist(&[0., 0., 0.], &[1., 0., 0.], &[2., 0., 0.], &[3., 0., 0.]);
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fraction_roundtrip() {
        let pts = [[0., 0., 0., 1.], [1., 0., 0., 1.], [1., 1., 0., 1.]];
        for &s in &[0.0, 0.25, 0.5, 0.9, 1.0] {
            let p = point_at_fraction(&pts, false, s);
            assert!((fraction_of_nearest(&pts, false, &p) - s).abs() < 1e-12);
        }
    }
}
