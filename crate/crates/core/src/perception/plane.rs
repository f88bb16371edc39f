use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PerceptionError;
use crate::Vec3;

/// Plane `normal·p + offset = 0` with a unit normal, plus its inliers.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFit {
    pub normal: Vec3,
    pub offset: f64,
    pub inliers: Vec<usize>,
}

impl PlaneFit {
    pub fn coefficients(&self) -> [f64; 4] {
        [self.normal.x, self.normal.y, self.normal.z, self.offset]
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        (self.normal.dot(p) + self.offset).abs()
    }
}

fn plane_through(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<(Vec3, f64)> {
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if !(len > 1e-12) {
        return None;
    }
    let n = n / len;
    Some((n, -n.dot(a)))
}

/// RANSAC plane fit. Candidate triples depend only on the point count and
/// `seed`, never on `dist_threshold`, so for a fixed seed the inlier count
/// can only grow with the threshold. Small clouds enumerate every triple.
pub fn segment_plane(
    points: &[Vec3],
    dist_threshold: f64,
    iterations: usize,
    seed: u64,
) -> Result<PlaneFit, PerceptionError> {
    let n = points.len();
    if n < 3 {
        return Err(PerceptionError::TooFewPoints { needed: 3, got: n });
    }
    if !(dist_threshold >= 0.0) {
        return Err(PerceptionError::InvalidParameter(format!(
            "plane threshold {dist_threshold}"
        )));
    }

    let triples: Vec<[usize; 3]> = if n * (n - 1) * (n - 2) / 6 <= iterations {
        let mut all = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    all.push([i, j, k]);
                }
            }
        }
        all
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..iterations)
            .map(|_| {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let mut k = rng.random_range(0..n);
                while k == i || k == j {
                    k = rng.random_range(0..n);
                }
                [i, j, k]
            })
            .collect()
    };

    let mut best: Option<(usize, Vec3, f64)> = None;
    for [i, j, k] in triples {
        let Some((normal, offset)) = plane_through(&points[i], &points[j], &points[k]) else {
            continue;
        };
        let count = points
            .iter()
            .filter(|p| (normal.dot(p) + offset).abs() <= dist_threshold)
            .count();
        if best.as_ref().is_none_or(|b| count > b.0) {
            best = Some((count, normal, offset));
        }
    }
    let (_, normal, offset) = best.ok_or_else(|| {
        PerceptionError::InvalidParameter("all sampled point triples are collinear".into())
    })?;
    let inliers = (0..n)
        .filter(|&i| (normal.dot(&points[i]) + offset).abs() <= dist_threshold)
        .collect();
    Ok(PlaneFit {
        normal,
        offset,
        inliers,
    })
}
