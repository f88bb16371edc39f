use std::collections::{HashMap, VecDeque};

use crate::Vec3;

/// Label of points that belong to no cluster.
pub const NOISE: i32 = -1;

type Cell = (i64, i64, i64);

struct Grid<'a> {
    points: &'a [Vec3],
    eps: f64,
    cells: HashMap<Cell, Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [Vec3], eps: f64) -> Self {
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::cell(p, eps)).or_default().push(i);
        }
        Self { points, eps, cells }
    }

    fn cell(p: &Vec3, eps: f64) -> Cell {
        (
            (p.x / eps).floor() as i64,
            (p.y / eps).floor() as i64,
            (p.z / eps).floor() as i64,
        )
    }

    /// Indices within `eps` of point `i`, itself included, in ascending order.
    fn neighbours(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        let p = &self.points[i];
        let (cx, cy, cz) = Self::cell(p, self.eps);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(members) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        out.extend(
                            members
                                .iter()
                                .filter(|&&j| (self.points[j] - p).norm() <= self.eps),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

/// Density-based clustering. A point is core when at least `min_pts` points
/// (itself included) lie within `eps`. Clusters are numbered from 0 in order
/// of their first core point; everything unreachable is [`NOISE`].
pub fn dbscan(points: &[Vec3], eps: f64, min_pts: usize) -> Vec<i32> {
    let n = points.len();
    let mut labels = vec![NOISE; n];
    if n == 0 || !(eps > 0.0) {
        return labels;
    }
    let finite: Vec<bool> = points.iter().map(|p| p.iter().all(|v| v.is_finite())).collect();
    let grid = Grid::new(points, eps);
    let mut visited = vec![false; n];
    let mut nb = Vec::new();
    let mut queue = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        if visited[i] || !finite[i] {
            continue;
        }
        visited[i] = true;
        grid.neighbours(i, &mut nb);
        if nb.len() < min_pts.max(1) {
            continue;
        }
        let cluster = next;
        next += 1;
        labels[i] = cluster;
        queue.extend(nb.iter().copied().filter(|&j| j != i));
        while let Some(j) = queue.pop_front() {
            if labels[j] == NOISE {
                labels[j] = cluster;
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            grid.neighbours(j, &mut nb);
            if nb.len() >= min_pts.max(1) {
                queue.extend(nb.iter().copied().filter(|&k| !visited[k] || labels[k] == NOISE));
            }
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(center: Vec3, n: usize, spacing: f64) -> Vec<Vec3> {
        (0..n)
            .map(|i| center + Vec3::new((i % 4) as f64, ((i / 4) % 4) as f64, (i / 16) as f64) * spacing)
            .collect()
    }

    #[test]
    fn two_separated_clusters() {
        let eps = 0.1;
        let mut pts = blob(Vec3::zeros(), 30, 0.05);
        pts.extend(blob(Vec3::new(10.0 * eps + 0.2, 0.0, 0.0), 30, 0.05));
        let labels = dbscan(&pts, eps, 4);
        assert!(labels[..30].iter().all(|&l| l == 0));
        assert!(labels[30..].iter().all(|&l| l == 1));
    }

    #[test]
    fn sparse_points_are_noise() {
        let pts: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(dbscan(&pts, 0.5, 2).iter().all(|&l| l == NOISE));
    }

    #[test]
    fn single_point_min_pts_one() {
        assert_eq!(dbscan(&[Vec3::new(1.0, 1.0, 1.0)], 0.1, 1), vec![0]);
    }

    #[test]
    fn border_point_joins_cluster() {
        // Four points packed at the origin and one at distance eps from them.
        let mut pts = vec![Vec3::zeros(); 4];
        pts.push(Vec3::new(0.1, 0.0, 0.0));
        let labels = dbscan(&pts, 0.1, 5);
        assert_eq!(labels, vec![0; 5]);
    }

    #[test]
    fn non_finite_points_are_noise() {
        let mut pts = vec![Vec3::zeros(); 3];
        pts.push(Vec3::new(f64::NAN, 0.0, 0.0));
        assert_eq!(dbscan(&pts, 0.1, 2), vec![0, 0, 0, NOISE]);
    }
}
