// SPDX-License-Identifier: Apache-2.0

//! Rectilinear Steiner tree length estimation: rectilinear MST refined by
//! iterated 1-Steiner insertion on the Hanan grid.

use crate::geom::{hpwl, Point};

/// Nets above this size keep the plain RMST length.
pub const MAX_STEINER_PINS: usize = 32;

fn dedup(points: &[Point]) -> Vec<Point> {
    let mut v = points.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Prim MST over `points`; returns `(length, edges)`.
fn prim(points: &[Point]) -> (i64, Vec<(usize, usize)>) {
    let n = points.len();
    if n < 2 {
        return (0, Vec::new());
    }
    let mut in_tree = vec![false; n];
    let mut best: Vec<(i64, usize)> = points.iter().map(|p| (points[0].manhattan(*p), 0)).collect();
    in_tree[0] = true;
    let mut total = 0;
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (pick == usize::MAX || best[j].0 < best[pick].0) {
                pick = j;
            }
        }
        in_tree[pick] = true;
        total += best[pick].0;
        edges.push((best[pick].1, pick));
        for j in 0..n {
            if !in_tree[j] {
                let d = points[pick].manhattan(points[j]);
                if d < best[j].0 {
                    best[j] = (d, pick);
                }
            }
        }
    }
    (total, edges)
}

/// Rectilinear minimum spanning tree length.
pub fn rmst_length(points: &[Point]) -> i64 {
    prim(&dedup(points)).0
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// MST length after adding `c` to a point set whose MST edges are `sorted`
/// (ascending by length). The new MST uses only old edges and edges at `c`.
fn mst_with_point(points: &[Point], sorted: &[(i64, usize, usize)], c: Point, scratch: &mut Vec<(i64, usize, usize)>) -> i64 {
    let n = points.len();
    scratch.clear();
    scratch.extend(points.iter().enumerate().map(|(i, p)| (c.manhattan(*p), i, n)));
    scratch.sort_unstable();
    let mut parent: Vec<usize> = (0..=n).collect();
    let (mut i, mut j, mut total, mut joined) = (0, 0, 0, 0);
    while joined < n {
        let e = if j >= scratch.len() || (i < sorted.len() && sorted[i].0 <= scratch[j].0) {
            i += 1;
            sorted[i - 1]
        } else {
            j += 1;
            scratch[j - 1]
        };
        let (ra, rb) = (find(&mut parent, e.1), find(&mut parent, e.2));
        if ra != rb {
            parent[ra] = rb;
            total += e.0;
            joined += 1;
        }
    }
    total
}

/// Estimated rectilinear Steiner minimum tree length.
///
/// One pin gives 0, two the Manhattan distance, three the HPWL (exact).
/// Larger nets start from the RMST and greedily insert the Hanan point with
/// the largest gain, at most `2 * pins` times, dropping Steiner points of
/// degree two or less after each insertion. The result lies between HPWL
/// and RMST.
pub fn estimate_rsmt(pins: &[Point]) -> i64 {
    let pts = dedup(pins);
    let n = pts.len();
    match n {
        0 | 1 => return 0,
        2 => return pts[0].manhattan(pts[1]),
        3 => return hpwl(&pts).expect("non-empty"),
        _ => {}
    }
    let (rmst, _) = prim(&pts);
    if n > MAX_STEINER_PINS {
        return rmst;
    }
    let mut xs: Vec<i64> = pts.iter().map(|p| p.x).collect();
    let mut ys: Vec<i64> = pts.iter().map(|p| p.y).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut candidates: Vec<Point> = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            let p = Point::new(x, y);
            if pts.binary_search(&p).is_err() {
                candidates.push(p);
            }
        }
    }
    let mut all = pts.clone();
    let mut current = rmst;
    let mut scratch = Vec::new();
    for _ in 0..2 * n {
        let (_, edges) = prim(&all);
        let mut sorted: Vec<(i64, usize, usize)> =
            edges.iter().map(|&(a, b)| (all[a].manhattan(all[b]), a, b)).collect();
        sorted.sort_unstable();
        let mut best: Option<(i64, Point)> = None;
        for &c in &candidates {
            if all.contains(&c) {
                continue;
            }
            let len = mst_with_point(&all, &sorted, c, &mut scratch);
            if len < current && best.is_none_or(|(b, _)| len < b) {
                best = Some((len, c));
            }
        }
        let Some((_, c)) = best else { break };
        all.push(c);
        // drop Steiner points that no longer branch
        loop {
            let (_, edges) = prim(&all);
            let mut degree = vec![0usize; all.len()];
            for (a, b) in edges {
                degree[a] += 1;
                degree[b] += 1;
            }
            let before = all.len();
            let keep: Vec<bool> = (0..all.len()).map(|i| i < n || degree[i] > 2).collect();
            let mut idx = 0;
            all.retain(|_| {
                idx += 1;
                keep[idx - 1]
            });
            if all.len() == before {
                break;
            }
        }
        current = prim(&all).0;
    }
    current.min(rmst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[(i64, i64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn small_cases() {
        assert_eq!(estimate_rsmt(&p(&[(4, 4)])), 0);
        assert_eq!(estimate_rsmt(&p(&[(0, 0), (3, 4)])), 7);
        assert_eq!(estimate_rsmt(&p(&[(0, 0), (4, 0), (2, 3)])), 7);
        assert_eq!(estimate_rsmt(&p(&[(0, 0), (0, 10), (10, 0), (10, 10)])), 30);
    }

    #[test]
    fn cross_uses_center_steiner_point() {
        let pts = p(&[(0, 5), (10, 5), (5, 0), (5, 10)]);
        assert_eq!(rmst_length(&pts), 30);
        assert_eq!(estimate_rsmt(&pts), 20);
    }

    #[test]
    fn duplicates_ignored() {
        assert_eq!(estimate_rsmt(&p(&[(0, 0), (0, 0), (3, 4)])), 7);
    }
}
