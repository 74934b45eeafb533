//! Surface normal estimation by local plane fitting.

use super::{MetricsError, SpatialIndex};
use crate::types::PointCloud;
use nalgebra::{Matrix3, SymmetricEigen};

/// Per-point unit normals from PCA over the k nearest neighbors
/// (the query point itself counts as one of the k).
///
/// Sign convention: each normal points toward the coordinate origin,
/// i.e. n . p <= 0. When n . p == 0 the sign is canonicalized so the
/// first nonzero component is positive.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<Vec<[f64; 3]>, MetricsError> {
    if cloud.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    if k < 3 || k > cloud.len() {
        return Err(MetricsError::TooFewPoints {
            needed: k.max(3),
            got: cloud.len().min(k),
        });
    }
    let pts = cloud.points();
    let index = SpatialIndex::build(pts)?;
    let mut normals = Vec::with_capacity(pts.len());
    for p in pts {
        let nb = index.k_nearest(p, k);
        let inv = 1.0 / k as f64;
        let mut c = [0.0f64; 3];
        for &(j, _) in &nb {
            let q = pts[j];
            c[0] += q.x;
            c[1] += q.y;
            c[2] += q.z;
        }
        for v in &mut c {
            *v *= inv;
        }
        let mut m = [0.0f64; 6]; // xx xy xz yy yz zz
        for &(j, _) in &nb {
            let q = pts[j];
            let d = [q.x - c[0], q.y - c[1], q.z - c[2]];
            m[0] += d[0] * d[0];
            m[1] += d[0] * d[1];
            m[2] += d[0] * d[2];
            m[3] += d[1] * d[1];
            m[4] += d[1] * d[2];
            m[5] += d[2] * d[2];
        }
        let cov = Matrix3::new(
            m[0] * inv,
            m[1] * inv,
            m[2] * inv,
            m[1] * inv,
            m[3] * inv,
            m[4] * inv,
            m[2] * inv,
            m[4] * inv,
            m[5] * inv,
        );
        let eig = SymmetricEigen::new(cov);
        let mut min_i = 0;
        for i in 1..3 {
            if eig.eigenvalues[i] < eig.eigenvalues[min_i] {
                min_i = i;
            }
        }
        let v = eig.eigenvectors.column(min_i);
        let mut n = [v[0], v[1], v[2]];
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len > 0.0 {
            for c in &mut n {
                *c /= len;
            }
        } else {
            n = [0.0, 0.0, 1.0];
        }
        let dot = n[0] * p.x + n[1] * p.y + n[2] * p.z;
        if dot > 0.0 {
            for c in &mut n {
                *c = -*c;
            }
        } else if dot == 0.0 {
            let lead = n.iter().copied().find(|&c| c != 0.0).unwrap_or(1.0);
            if lead < 0.0 {
                for c in &mut n {
                    *c = -*c;
                }
            }
        }
        normals.push(n);
    }
    Ok(normals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenegen::SplitMix64;
    use crate::types::Point3;

    #[test]
    fn planar_cloud_yields_z_normals() {
        let mut pts = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                pts.push(Point3::new(i as f64 * 0.1, j as f64 * 0.1, 0.0));
            }
        }
        let cloud = PointCloud::new(pts, None).unwrap();
        let normals = estimate_normals(&cloud, 8).unwrap();
        for n in normals {
            assert!(n[0].abs() < 1e-6 && n[1].abs() < 1e-6);
            assert!((n[2] - 1.0).abs() < 1e-6, "canonical sign expected: {n:?}");
        }
    }

    #[test]
    fn sphere_normals_point_inward() {
        // Fibonacci lattice on a radius-5 sphere; inward radial is -p/|p|
        let n = 500;
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        let pts: Vec<Point3> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                Point3::new(5.0 * r * phi.cos(), 5.0 * r * phi.sin(), 5.0 * z)
            })
            .collect();
        let cloud = PointCloud::new(pts.clone(), None).unwrap();
        let normals = estimate_normals(&cloud, 8).unwrap();
        let max_angle_deg = 5.0f64;
        let cos_min = max_angle_deg.to_radians().cos();
        for (p, n) in pts.iter().zip(&normals) {
            let r = (p.x * p.x + p.y * p.y + p.z * p.z).sqrt();
            let inward = [-p.x / r, -p.y / r, -p.z / r];
            let dot = n[0] * inward[0] + n[1] * inward[1] + n[2] * inward[2];
            assert!(dot >= cos_min, "normal {n:?} deviates from inward radial");
        }
    }

    #[test]
    fn orientation_dot_is_nonpositive() {
        let mut rng = SplitMix64::new(99);
        let pts: Vec<Point3> = (0..200)
            .map(|_| {
                Point3::new(
                    rng.uniform(1.0, 9.0),
                    rng.uniform(1.0, 9.0),
                    rng.uniform(1.0, 9.0),
                )
            })
            .collect();
        let cloud = PointCloud::new(pts.clone(), None).unwrap();
        let normals = estimate_normals(&cloud, 6).unwrap();
        for (p, n) in pts.iter().zip(&normals) {
            assert!(n[0] * p.x + n[1] * p.y + n[2] * p.z <= 0.0);
        }
    }

    #[test]
    fn unit_length() {
        let mut rng = SplitMix64::new(13);
        let pts: Vec<Point3> = (0..100)
            .map(|_| {
                Point3::new(
                    rng.uniform(-4.0, 4.0),
                    rng.uniform(-4.0, 4.0),
                    rng.uniform(-4.0, 4.0),
                )
            })
            .collect();
        let cloud = PointCloud::new(pts, None).unwrap();
        for n in estimate_normals(&cloud, 16).unwrap() {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            assert!((len - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn k_larger_than_cloud_errors() {
        let cloud = PointCloud::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            None,
        )
        .unwrap();
        assert!(matches!(
            estimate_normals(&cloud, 4),
            Err(MetricsError::TooFewPoints { .. })
        ));
        assert!(estimate_normals(&cloud, 3).is_ok());
    }
}
