//! Incremental 3D convex hull returning the indices of hull vertices.
//!
//! Degenerate inputs are handled by dimension: collinear sets return the two
//! extremes, coplanar sets return the 2D hull vertices in that plane.

use std::collections::HashMap;

use crate::cloud::Vector3;

#[derive(Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: Vector3,
    offset: f64,
    alive: bool,
}

fn oriented_face(points: &[Vector3], v: [usize; 3]) -> Face {
    let [a, b, c] = v;
    let mut n = (points[b] - points[a]).cross(&(points[c] - points[a]));
    let norm = n.norm();
    if norm > 0.0 {
        n /= norm;
    }
    Face {
        v,
        normal: n,
        offset: n.dot(&points[a]),
        alive: true,
    }
}

fn make_face(points: &[Vector3], v: [usize; 3], interior: &Vector3) -> Face {
    let [a, b, c] = v;
    let mut face = oriented_face(points, v);
    if face.normal.dot(interior) - face.offset > 0.0 {
        face.v = [a, c, b];
        face.normal = -face.normal;
        face.offset = -face.offset;
    }
    face
}

/// Sorted indices of the points that are vertices of the convex hull.
pub(crate) fn hull_vertices(points: &[Vector3]) -> Vec<usize> {
    let n = points.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let scale = points
        .iter()
        .map(|p| p.amax())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let eps = 1e-11 * scale;

    // Initial simplex: extreme pair, then farthest from line, then from plane.
    let spread_axis = {
        let lo = points.iter().fold(Vector3::repeat(f64::INFINITY), |a, p| a.inf(p));
        let hi = points.iter().fold(Vector3::repeat(f64::NEG_INFINITY), |a, p| a.sup(p));
        (hi - lo).imax()
    };
    let i0 = (0..n)
        .min_by(|&a, &b| points[a][spread_axis].total_cmp(&points[b][spread_axis]))
        .unwrap();
    let i1 = (0..n)
        .max_by(|&a, &b| {
            (points[a] - points[i0]).norm_squared().total_cmp(&(points[b] - points[i0]).norm_squared())
        })
        .unwrap();
    let dir = (points[i1] - points[i0]).normalize();
    let line_dist = |i: usize| {
        let d = points[i] - points[i0];
        (d - dir * d.dot(&dir)).norm()
    };
    let i2 = (0..n).max_by(|&a, &b| line_dist(a).total_cmp(&line_dist(b))).unwrap();
    if line_dist(i2) <= eps {
        let mut v = vec![i0, i1];
        v.sort_unstable();
        return v;
    }
    let plane_n = (points[i1] - points[i0]).cross(&(points[i2] - points[i0])).normalize();
    let plane_dist = |i: usize| (points[i] - points[i0]).dot(&plane_n);
    let i3 = (0..n)
        .max_by(|&a, &b| plane_dist(a).abs().total_cmp(&plane_dist(b).abs()))
        .unwrap();
    if plane_dist(i3).abs() <= eps {
        return planar_hull(points, points[i0], dir, plane_n.cross(&dir), eps);
    }

    let interior = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
    let mut faces: Vec<Face> = Vec::with_capacity(2 * n);
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let add_face = |faces: &mut Vec<Face>, edges: &mut HashMap<(usize, usize), usize>, v: [usize; 3]| {
        let f = make_face(points, v, &interior);
        let id = faces.len();
        for k in 0..3 {
            edges.insert((f.v[k], f.v[(k + 1) % 3]), id);
        }
        faces.push(f);
    };
    for v in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        add_face(&mut faces, &mut edges, v);
    }

    let seed = [i0, i1, i2, i3];
    let mut visible = Vec::new();
    for p in 0..n {
        if seed.contains(&p) {
            continue;
        }
        let q = points[p];
        visible.clear();
        visible.extend(
            faces
                .iter()
                .enumerate()
                .filter(|(_, f)| f.alive && f.normal.dot(&q) - f.offset > eps)
                .map(|(i, _)| i),
        );
        if visible.is_empty() {
            continue;
        }
        let mut horizon = Vec::new();
        for &fi in &visible {
            let v = faces[fi].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let twin = edges.get(&(b, a)).copied();
                let twin_visible = twin.is_some_and(|t| visible.contains(&t));
                if !twin_visible {
                    horizon.push((a, b));
                }
            }
        }
        for &fi in &visible {
            faces[fi].alive = false;
            let v = faces[fi].v;
            for k in 0..3 {
                let key = (v[k], v[(k + 1) % 3]);
                if edges.get(&key) == Some(&fi) {
                    edges.remove(&key);
                }
            }
        }
        for (a, b) in horizon {
            // The horizon edge keeps the winding of the removed face, so the
            // new fan is outward-oriented without an interior test.
            let id = faces.len();
            let f = oriented_face(points, [a, b, p]);
            for k in 0..3 {
                edges.insert((f.v[k], f.v[(k + 1) % 3]), id);
            }
            faces.push(f);
        }
    }

    let mut used = vec![false; n];
    for f in faces.iter().filter(|f| f.alive) {
        for &v in &f.v {
            used[v] = true;
        }
    }
    (0..n).filter(|&i| used[i]).collect()
}

/// Monotone-chain hull of coplanar points expressed in the basis `(u, w)`.
fn planar_hull(points: &[Vector3], origin: Vector3, u: Vector3, w: Vector3, eps: f64) -> Vec<usize> {
    let mut pts: Vec<(f64, f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = p - origin;
            (d.dot(&u), d.dot(&w), i)
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    let cross = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let span = pts.iter().map(|p| p.0.abs().max(p.1.abs())).fold(0.0f64, f64::max);
    let area_eps = eps * span;
    let mut chain: Vec<(f64, f64, usize)> = Vec::new();
    for pass in 0..2 {
        let start = chain.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64, usize)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while chain.len() >= start + 2
                && cross(&chain[chain.len() - 2], &chain[chain.len() - 1], p) <= area_eps
            {
                chain.pop();
            }
            chain.push(*p);
        }
        chain.pop();
    }
    let mut v: Vec<usize> = chain.into_iter().map(|p| p.2).collect();
    v.sort_unstable();
    v.dedup();
    v
}
