use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::HarnessError;
use crate::Vec3;

/// Root-mean-square difference of two equally long series.
pub fn rmse(measured: &[f64], truth: &[f64]) -> Result<f64, HarnessError> {
    if measured.is_empty() || truth.is_empty() {
        return Err(HarnessError::EmptySeries);
    }
    if measured.len() != truth.len() {
        return Err(HarnessError::LengthMismatch {
            measured: measured.len(),
            truth: truth.len(),
        });
    }
    let sum: f64 = measured.iter().zip(truth).map(|(m, t)| (m - t).powi(2)).sum();
    Ok((sum / measured.len() as f64).sqrt())
}

/// `series` plus independent zero-mean Gaussian noise of standard deviation
/// `sigma`, reproducible from `seed`.
pub fn inject_noise(series: &[f64], sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma.abs()).expect("finite sigma");
    series.iter().map(|v| v + normal.sample(&mut rng)).collect()
}

/// Closest points between segments `p0p1` and `q0q1`.
pub fn segment_closest_points(p0: &Vec3, p1: &Vec3, q0: &Vec3, q1: &Vec3) -> (Vec3, Vec3) {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let eps = 1e-18;
    let (s, t) = if a <= eps && e <= eps {
        (0.0, 0.0)
    } else if a <= eps {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(&r);
        if e <= eps {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s = if denom > eps { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    (p0 + d1 * s, q0 + d2 * t)
}

/// Distance between two capsules given by axis segments and radii.
pub fn capsule_distance(a: (&Vec3, &Vec3, f64), b: (&Vec3, &Vec3, f64)) -> f64 {
    let (pa, pb) = segment_closest_points(a.0, a.1, b.0, b.1);
    ((pa - pb).norm() - a.2 - b.2).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_cases() {
        let t = [1.0, 2.0, 3.0];
        assert_eq!(rmse(&t, &t).unwrap(), 0.0);
        let biased: Vec<f64> = t.iter().map(|v| v + 0.25).collect();
        assert!((rmse(&biased, &t).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(rmse(&[], &[]), Err(HarnessError::EmptySeries)));
        assert!(rmse(&[1.0], &t).is_err());
    }

    #[test]
    fn injected_noise_statistics() {
        let truth = vec![1.0; 10_000];
        let noisy = inject_noise(&truth, 0.06, 9);
        let e = rmse(&noisy, &truth).unwrap();
        assert!((0.055..=0.065).contains(&e), "{e}");
        assert_eq!(noisy, inject_noise(&truth, 0.06, 9));
    }

    #[test]
    fn segment_cases() {
        let o = Vec3::zeros();
        let (a, b) = segment_closest_points(&o, &Vec3::x(), &Vec3::new(0.5, 1.0, -1.0), &Vec3::new(0.5, 1.0, 1.0));
        assert!((a - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-15);
        assert!((b - Vec3::new(0.5, 1.0, 0.0)).norm() < 1e-15);
        // Parallel, overlapping.
        let (a, b) = segment_closest_points(&o, &Vec3::x(), &Vec3::new(0.5, 2.0, 0.0), &Vec3::new(1.5, 2.0, 0.0));
        assert!(((a - b).norm() - 2.0).abs() < 1e-15);
        // Degenerate point against segment.
        let d = capsule_distance((&Vec3::new(3.0, 0.0, 0.0), &Vec3::new(3.0, 0.0, 0.0), 0.5), (&o, &Vec3::x(), 0.5));
        assert!((d - 1.0).abs() < 1e-15);
    }
}
