//! Exact point/triangle distance and tolerance-guarded triangle/triangle
//! intersection.

use crate::Vec3;

/// Closest point to `p` on triangle `(a, b, c)`, by Voronoi-region
/// classification (vertex, edge or interior). Works for degenerate triangles.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    let denom = va + vb + vc;
    if denom.abs() < f64::MIN_POSITIVE || !denom.is_finite() {
        // Degenerate triangle that slipped through the region tests: fall back
        // to the closest of its three edges.
        let candidates = [
            closest_point_on_segment(p, a, b),
            closest_point_on_segment(p, b, c),
            closest_point_on_segment(p, c, a),
        ];
        return candidates
            .into_iter()
            .min_by(|x, y| (x - p).norm_squared().total_cmp(&(y - p).norm_squared()))
            .unwrap();
    }
    let inv = 1.0 / denom;
    let v = vb * inv;
    let w = vc * inv;
    a + ab * v + ac * w
}

pub fn closest_point_on_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> Vec3 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

fn segment_segment_distance_squared(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> f64 {
    // Ericson 5.1.9
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::MIN_POSITIVE && e <= f64::MIN_POSITIVE {
        return r.norm_squared();
    }
    if a <= f64::MIN_POSITIVE {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::MIN_POSITIVE {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
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
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1 - c2).norm_squared()
}

/// Whether two triangles intersect or come within `eps` of touching.
///
/// Non-coplanar pairs use the interval-overlap test on the line where the two
/// supporting planes meet; signed plane distances below `eps` are snapped to
/// zero, which reports borderline contacts as intersecting. Coplanar pairs are
/// tested in 2D.
pub fn triangles_intersect(t1: &[Vec3; 3], t2: &[Vec3; 3], eps: f64) -> bool {
    let n1 = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    let n2 = (t2[1] - t2[0]).cross(&(t2[2] - t2[0]));
    let l1 = n1.norm();
    let l2 = n2.norm();
    if l1 == 0.0 || l2 == 0.0 {
        return degenerate_pair_intersects(t1, t2, eps);
    }
    let n1 = n1 / l1;
    let n2 = n2 / l2;

    let snap = |d: f64| if d.abs() < eps { 0.0 } else { d };
    // signed distances of t1's vertices to t2's plane
    let d1: [f64; 3] = std::array::from_fn(|i| snap(n2.dot(&(t1[i] - t2[0]))));
    if same_strict_side(&d1) {
        return false;
    }
    let d2: [f64; 3] = std::array::from_fn(|i| snap(n1.dot(&(t2[i] - t1[0]))));
    if same_strict_side(&d2) {
        return false;
    }
    if d1.iter().all(|&d| d == 0.0) || d2.iter().all(|&d| d == 0.0) {
        return coplanar_intersect(t1, t2, &n1, eps);
    }

    let dir = n1.cross(&n2);
    if dir.norm() < eps {
        // planes nearly parallel yet not within eps of each other
        return coplanar_intersect(t1, t2, &n1, eps);
    }
    let proj1: [f64; 3] = std::array::from_fn(|i| dir.dot(&t1[i]));
    let proj2: [f64; 3] = std::array::from_fn(|i| dir.dot(&t2[i]));
    let (lo1, hi1) = plane_crossing_interval(&proj1, &d1);
    let (lo2, hi2) = plane_crossing_interval(&proj2, &d2);
    let slack = eps * dir.norm();
    hi1 + slack >= lo2 && hi2 + slack >= lo1
}

fn same_strict_side(d: &[f64; 3]) -> bool {
    (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0)
}

/// Interval of the projection of the triangle's intersection with the other
/// plane, given vertex projections and signed plane distances.
fn plane_crossing_interval(proj: &[f64; 3], dist: &[f64; 3]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut push = |x: f64| {
        lo = lo.min(x);
        hi = hi.max(x);
    };
    for i in 0..3 {
        if dist[i] == 0.0 {
            push(proj[i]);
        }
        let j = (i + 1) % 3;
        if (dist[i] > 0.0 && dist[j] < 0.0) || (dist[i] < 0.0 && dist[j] > 0.0) {
            let t = dist[i] / (dist[i] - dist[j]);
            push(proj[i] + (proj[j] - proj[i]) * t);
        }
    }
    (lo, hi)
}

fn coplanar_intersect(t1: &[Vec3; 3], t2: &[Vec3; 3], normal: &Vec3, eps: f64) -> bool {
    // drop the dominant normal axis
    let axis = normal.iamax();
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let p1: [[f64; 2]; 3] = std::array::from_fn(|i| [t1[i][u], t1[i][v]]);
    let p2: [[f64; 2]; 3] = std::array::from_fn(|i| [t2[i][u], t2[i][v]]);
    for i in 0..3 {
        for j in 0..3 {
            let a0 = Vec3::new(p1[i][0], p1[i][1], 0.0);
            let a1 = Vec3::new(p1[(i + 1) % 3][0], p1[(i + 1) % 3][1], 0.0);
            let b0 = Vec3::new(p2[j][0], p2[j][1], 0.0);
            let b1 = Vec3::new(p2[(j + 1) % 3][0], p2[(j + 1) % 3][1], 0.0);
            if segment_segment_distance_squared(&a0, &a1, &b0, &b1) <= eps * eps {
                return true;
            }
        }
    }
    point_in_triangle_2d(&p1[0], &p2) || point_in_triangle_2d(&p2[0], &p1)
}

fn point_in_triangle_2d(p: &[f64; 2], t: &[[f64; 2]; 3]) -> bool {
    let cross = |a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let s0 = cross(&t[0], &t[1], p);
    let s1 = cross(&t[1], &t[2], p);
    let s2 = cross(&t[2], &t[0], p);
    (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) || (s0 <= 0.0 && s1 <= 0.0 && s2 <= 0.0)
}

fn degenerate_pair_intersects(t1: &[Vec3; 3], t2: &[Vec3; 3], eps: f64) -> bool {
    // Treat a zero-area triangle as its three edges.
    for i in 0..3 {
        for j in 0..3 {
            let d = segment_segment_distance_squared(
                &t1[i],
                &t1[(i + 1) % 3],
                &t2[j],
                &t2[(j + 1) % 3],
            );
            if d <= eps * eps {
                return true;
            }
        }
    }
    // A segment may also pierce the interior of a proper triangle.
    let pierces = |seg: &[Vec3; 3], tri: &[Vec3; 3]| {
        (0..3).any(|i| {
            let a = seg[i];
            let b = seg[(i + 1) % 3];
            let mid = (a + b) * 0.5;
            (closest_point_on_triangle(&a, &tri[0], &tri[1], &tri[2]) - a).norm() <= eps
                || (closest_point_on_triangle(&mid, &tri[0], &tri[1], &tri[2]) - mid).norm() <= eps
                || segment_crosses_triangle(&a, &b, tri)
        })
    };
    pierces(t1, t2) || pierces(t2, t1)
}

fn segment_crosses_triangle(a: &Vec3, b: &Vec3, tri: &[Vec3; 3]) -> bool {
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
    if n.norm() == 0.0 {
        return false;
    }
    let da = n.dot(&(a - tri[0]));
    let db = n.dot(&(b - tri[0]));
    if da * db > 0.0 || da == db {
        return false;
    }
    let p = a + (b - a) * (da / (da - db));
    (closest_point_on_triangle(&p, &tri[0], &tri[1], &tri[2]) - p).norm() <= 1e-12 * (1.0 + p.norm())
}
