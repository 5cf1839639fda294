//! Self-intersection detection and Douglas-Peucker based repair.

use super::{Contour, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn orient<F: Scalar>(a: Point<F>, b: Point<F>, c: Point<F>) -> F {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn sign<F: Scalar>(v: F) -> i8 {
    if v > F::zero() {
        1
    } else if v < F::zero() {
        -1
    } else {
        0
    }
}

/// Whether segments `ab` and `cd` cross at a single interior point of both.
/// Touching and collinear overlap do not count.
pub fn segments_cross<F: Scalar>(a: Point<F>, b: Point<F>, c: Point<F>, d: Point<F>) -> bool {
    if a.x.max(b.x) < c.x.min(d.x)
        || c.x.max(d.x) < a.x.min(b.x)
        || a.y.max(b.y) < c.y.min(d.y)
        || c.y.max(d.y) < a.y.min(b.y)
    {
        return false;
    }
    let (o1, o2) = (sign(orient(a, b, c)), sign(orient(a, b, d)));
    let (o3, o4) = (sign(orient(c, d, a)), sign(orient(c, d, b)));
    o1 * o2 < 0 && o3 * o4 < 0
}

fn edge<F: Scalar>(pts: &[Point<F>], i: usize) -> (Point<F>, Point<F>) {
    (pts[i], pts[(i + 1) % pts.len()])
}

/// First pair of non-adjacent edges `(i, j)`, `i < j`, that cross. Edge `k`
/// joins point `k` to point `k + 1` (wrapping).
pub fn find_crossing<F: Scalar>(pts: &[Point<F>]) -> Option<(usize, usize)> {
    let n = pts.len();
    if n < 4 {
        return None;
    }
    for i in 0..n {
        let (a, b) = edge(pts, i);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = edge(pts, j);
            if segments_cross(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

pub fn has_self_intersection<F: Scalar>(c: &Contour<F>) -> bool {
    find_crossing(c.points()).is_some()
}

fn point_segment_distance<F: Scalar>(p: Point<F>, a: Point<F>, b: Point<F>) -> F {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    if len2 == F::zero() {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * vx + (p.y - a.y) * vy) / len2).max(F::zero()).min(F::one());
    p.distance(Point::new(a.x + t * vx, a.y + t * vy))
}

/// Indices of the points kept by Douglas-Peucker simplification of an open
/// polyline with tolerance `eta`. Both endpoints are always kept, and every
/// dropped point lies within `eta` of the simplified path.
pub fn douglas_peucker<F: Scalar>(pts: &[Point<F>], eta: F) -> Vec<usize> {
    let n = pts.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0, n - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (mut far, mut far_d) = (lo, F::neg_infinity());
        for k in lo + 1..hi {
            let d = point_segment_distance(pts[k], pts[lo], pts[hi]);
            if d > far_d {
                far = k;
                far_d = d;
            }
        }
        if far_d > eta {
            keep[far] = true;
            stack.push((lo, far));
            stack.push((far, hi));
        }
    }
    (0..n).filter(|&k| keep[k]).collect()
}

/// Removes self-intersections by simplifying only the stretch of the
/// contour around each crossing.
///
/// For the first crossing found, the shorter arc containing both crossing
/// edges is simplified with tolerance `eta0`, growing by `growth` until the
/// simplified arc crosses nothing and at least one point is gone. If the
/// tolerance passes `max_eta` the arc is widened by one vertex on each side
/// and the tolerance restarts. The first surviving vertex of the input stays
/// first in the output.
pub fn repair_self_intersections<F: Scalar>(c: &Contour<F>, eta0: F, growth: F, max_eta: F) -> Result<Contour<F>> {
    if !(eta0 > F::zero()) || !(growth > F::one()) {
        return Err(Error::domain("repair needs eta0 > 0 and growth > 1"));
    }
    let mut pts: Vec<Point<F>> = c.points().to_vec();
    let mut ids: Vec<usize> = (0..pts.len()).collect();
    while let Some((i, j)) = find_crossing(&pts) {
        let n = pts.len();
        // arc i..=j+1 going forward, or j..=i+1 wrapping around
        let fwd = j + 2 - i;
        let back = n - j + i + 2;
        let (start, count) = if fwd <= back { (i, fwd) } else { (j, back) };
        let mut widen = 0;
        let (new_pts, new_ids) = 'search: loop {
            let len = count + 2 * widen;
            if len > n {
                return Err(Error::RepairFailed { eta: max_eta.as_f64() });
            }
            let s = (start + n - widen) % n;
            // the whole arc, then the arc without its first or last point
            for (vs, vlen) in [(s, len), ((s + 1) % n, len - 1), (s, len - 1)] {
                if vlen < 3 {
                    continue;
                }
                if let Some(found) = simplify_arc(&pts, &ids, vs, vlen, eta0, growth, max_eta) {
                    break 'search found;
                }
            }
            widen += 1;
        };
        pts = new_pts;
        ids = new_ids;
    }
    let first = (0..ids.len()).min_by_key(|&k| ids[k]).unwrap_or(0);
    pts.rotate_left(first);
    Contour::new(pts)
}

/// Simplifies the `len` points starting at `s` (wrapping), returning the new
/// polygon if some tolerance up to `max_eta` removes points without the new
/// edges crossing anything.
fn simplify_arc<F: Scalar>(
    pts: &[Point<F>],
    ids: &[usize],
    s: usize,
    len: usize,
    eta0: F,
    growth: F,
    max_eta: F,
) -> Option<(Vec<Point<F>>, Vec<usize>)> {
    let n = pts.len();
    let arc: Vec<usize> = (0..len).map(|k| (s + k) % n).collect();
    let arc_pts: Vec<Point<F>> = arc.iter().map(|&k| pts[k]).collect();
    let mut eta = eta0;
    while eta <= max_eta {
        let kept = douglas_peucker(&arc_pts, eta);
        if kept.len() < len {
            // the new polygon: kept arc points followed by the rest in order
            let mut order: Vec<usize> = kept.iter().map(|&k| arc[k]).collect();
            order.extend((len..n).map(|k| (s + k) % n));
            if order.len() >= 3 {
                let cand: Vec<Point<F>> = order.iter().map(|&k| pts[k]).collect();
                let m = cand.len();
                let clean = (0..kept.len() - 1).all(|e| {
                    let (a, b) = edge(&cand, e);
                    (0..m).all(|f| {
                        let adjacent = f == e || (f + 1) % m == e || (e + 1) % m == f;
                        if adjacent {
                            return true;
                        }
                        let (c, d) = edge(&cand, f);
                        !segments_cross(a, b, c, d)
                    })
                });
                if clean {
                    return Some((cand, order.iter().map(|&k| ids[k]).collect()));
                }
            }
        }
        eta *= growth;
    }
    None
}
