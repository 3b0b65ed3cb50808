// SPDX-License-Identifier: Apache-2.0

//! Dominance ranks, crowding distance and 2-D hypervolume. All functions
//! take minimization objectives.

use std::cmp::Ordering;

use crate::DseError;

/// `a` is no worse everywhere and better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        better |= x < y;
    }
    better
}

fn check(points: &[Vec<f64>]) -> Result<usize, DseError> {
    let m = points.first().map_or(0, Vec::len);
    for (i, p) in points.iter().enumerate() {
        if p.len() != m {
            return Err(DseError::InvalidObjective(format!("point {i} has {} objectives, expected {m}", p.len())));
        }
        if let Some(j) = p.iter().position(|v| v.is_nan()) {
            return Err(DseError::InvalidObjective(format!("point {i} objective {j} is NaN")));
        }
    }
    Ok(m)
}

/// Rank 0 is the non-dominated set; rank k is non-dominated once ranks
/// below k are removed.
pub fn nondominated_sort(points: &[Vec<f64>]) -> Result<Vec<usize>, DseError> {
    check(points)?;
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut beats: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                beats[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                beats[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut r = 0;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            rank[i] = r;
            for &j in &beats[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        front = next;
        r += 1;
    }
    Ok(rank)
}

/// Crowding distance of each point within `points`; boundary points of any
/// objective are infinite. Objectives with zero spread add nothing.
pub fn crowding_distance(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = points[0].len();
    for k in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| points[a][k].total_cmp(&points[b][k]).then(a.cmp(&b)));
        let lo = points[order[0]][k];
        let hi = points[order[n - 1]][k];
        d[order[0]] = f64::INFINITY;
        d[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..n - 1 {
                d[order[w]] += (points[order[w + 1]][k] - points[order[w - 1]][k]) / (hi - lo);
            }
        }
    }
    d
}

/// Exact area dominated by `front` inside the box up to `reference`.
/// Dominated members of `front` are allowed and add nothing.
pub fn hypervolume_2d(front: &[[f64; 2]], reference: [f64; 2]) -> Result<f64, DseError> {
    for p in front {
        if p.iter().any(|v| v.is_nan()) || p[0] > reference[0] || p[1] > reference[1] {
            return Err(DseError::RefError(format!("({}, {}) beyond ({}, {})", p[0], p[1], reference[0], reference[1])));
        }
    }
    let mut pts = front.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut floor = reference[1];
    for p in pts {
        if p[1] < floor {
            area += (reference[0] - p[0]) * (floor - p[1]);
            floor = p[1];
        }
    }
    Ok(area)
}

/// Members of `points` strictly inside the reference box.
pub fn within_reference(points: &[[f64; 2]], reference: [f64; 2]) -> Vec<[f64; 2]> {
    points.iter().copied().filter(|p| p[0] < reference[0] && p[1] < reference[1]).collect()
}

/// Order for cutting a set: rank ascending, then crowding distance
/// descending, then index.
pub fn selection_order(points: &[Vec<f64>]) -> Result<Vec<usize>, DseError> {
    let rank = nondominated_sort(points)?;
    let mut crowd = vec![0.0; points.len()];
    let top = rank.iter().copied().max().map_or(0, |r| r + 1);
    for r in 0..top {
        let members: Vec<usize> = (0..points.len()).filter(|&i| rank[i] == r).collect();
        let sub: Vec<Vec<f64>> = members.iter().map(|&i| points[i].clone()).collect();
        for (&i, c) in members.iter().zip(crowding_distance(&sub)) {
            crowd[i] = c;
        }
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        rank[a].cmp(&rank[b]).then(crowd[b].partial_cmp(&crowd[a]).unwrap_or(Ordering::Equal)).then(a.cmp(&b))
    });
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_by_definition() {
        let p = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert_eq!(nondominated_sort(&p).unwrap(), vec![0, 0, 1, 2]);
        assert_eq!(nondominated_sort(&[vec![5.0]]).unwrap(), vec![0]);
        assert!(nondominated_sort(&[vec![f64::NAN, 1.0]]).is_err());
        assert!(nondominated_sort(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn equal_points_share_a_rank() {
        assert_eq!(nondominated_sort(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap(), vec![0, 0]);
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume_2d(&[[0.0, 0.0]], [1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(hypervolume_2d(&[[0.0, 0.5], [0.5, 0.0]], [1.0, 1.0]).unwrap(), 0.75);
        assert_eq!(hypervolume_2d(&[], [1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(hypervolume_2d(&[[1.5, 0.0]], [1.0, 1.0]), Err(DseError::RefError(_))));
    }

    #[test]
    fn crowding_boundaries_are_infinite() {
        let p = vec![vec![0.0, 3.0], vec![1.0, 2.0], vec![3.0, 0.0]];
        let d = crowding_distance(&p);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert_eq!(d[1], 3.0 / 3.0 + 3.0 / 3.0);
    }
}
