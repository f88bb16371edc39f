use crate::lidar_frames::PointCloud;

/// Statistical outlier removal: drop points whose mean distance to their `k`
/// nearest neighbours exceeds the cloud-wide mean of that quantity plus
/// `std_ratio` standard deviations. Clouds with at most `k` points are
/// returned unchanged.
pub fn reject_outliers(cloud: &PointCloud, k: usize, std_ratio: f64) -> PointCloud {
    let n = cloud.len();
    if k == 0 || n <= k {
        return cloud.clone();
    }
    let pos = cloud.positions();
    let mut dists = vec![0.0; n - 1];
    let mean_knn: Vec<f64> = (0..n)
        .map(|i| {
            let mut m = 0;
            for (j, p) in pos.iter().enumerate() {
                if j != i {
                    dists[m] = (p - pos[i]).norm();
                    m += 1;
                }
            }
            dists.select_nth_unstable_by(k - 1, f64::total_cmp);
            dists[..k].iter().sum::<f64>() / k as f64
        })
        .collect();
    let mean = mean_knn.iter().sum::<f64>() / n as f64;
    let var = mean_knn.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
    let threshold = mean + std_ratio * var.sqrt();
    let keep: Vec<usize> = (0..n).filter(|&i| mean_knn[i] <= threshold).collect();
    cloud.select(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lidar_frames::CloudPoint;
    use crate::Vec3;

    fn cloud(points: &[Vec3]) -> PointCloud {
        PointCloud {
            points: points
                .iter()
                .enumerate()
                .map(|(i, p)| CloudPoint {
                    position: *p,
                    range_m: p.norm(),
                    row: 0,
                    col: i,
                })
                .collect(),
            frame_id: "world".into(),
            grid: (points.len(), 1),
        }
    }

    #[test]
    fn far_point_is_removed() {
        let mut pts: Vec<Vec3> = (0..27)
            .map(|i| Vec3::new((i % 3) as f64, ((i / 3) % 3) as f64, (i / 9) as f64) * 0.05)
            .collect();
        pts.push(Vec3::new(10.0, 0.0, 0.0));
        let out = reject_outliers(&cloud(&pts), 5, 1.0);
        assert!(out.points.iter().all(|p| p.position.x < 1.0));
        assert!(out.len() < pts.len());
    }

    #[test]
    fn coincident_points_unchanged() {
        let pts = vec![Vec3::new(1.0, 2.0, 3.0); 20];
        assert_eq!(reject_outliers(&cloud(&pts), 5, 1.0).len(), 20);
    }

    #[test]
    fn small_cloud_unchanged() {
        let pts = vec![Vec3::zeros(), Vec3::new(100.0, 0.0, 0.0)];
        assert_eq!(reject_outliers(&cloud(&pts), 2, 1.0).len(), 2);
    }
}
