use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{hermitian_eigenvalues, AlgebraError, CMatrix, Element, ToleranceConfig, C64};

/// A closed disk in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: C64,
    pub radius: f64,
}

impl Disk {
    fn contains(&self, p: C64) -> bool {
        (p - self.center).norm() <= self.radius * (1.0 + 1e-12) + 1e-14
    }

    fn from_pair(a: C64, b: C64) -> Self {
        Disk { center: (a + b) * 0.5, radius: (a - b).norm() * 0.5 }
    }

    fn from_triple(a: C64, b: C64, c: C64) -> Self {
        let (bx, by) = (b.re - a.re, b.im - a.im);
        let (cx, cy) = (c.re - a.re, c.im - a.im);
        let det = 2.0 * (bx * cy - by * cx);
        let scale = (bx.abs() + by.abs() + cx.abs() + cy.abs()).powi(2);
        if det.abs() <= 1e-14 * scale {
            // Collinear: the widest pair spans the other point.
            let cands = [Self::from_pair(a, b), Self::from_pair(a, c), Self::from_pair(b, c)];
            return cands.into_iter().max_by(|x, y| x.radius.total_cmp(&y.radius)).unwrap();
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / det;
        let uy = (bx * c2 - cx * b2) / det;
        let center = C64::new(a.re + ux, a.im + uy);
        let radius = [a, b, c].iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
        Disk { center, radius }
    }
}

/// Smallest disk containing every point, by the incremental algorithm with
/// boundary-point recursion unrolled to three levels.
pub fn min_enclosing_disk(points: &[C64]) -> Disk {
    assert!(!points.is_empty(), "enclosing disk of an empty set");
    let mut d = Disk { center: points[0], radius: 0.0 };
    for i in 1..points.len() {
        if d.contains(points[i]) {
            continue;
        }
        d = Disk { center: points[i], radius: 0.0 };
        for j in 0..i {
            if d.contains(points[j]) {
                continue;
            }
            d = Disk::from_pair(points[i], points[j]);
            for k in 0..j {
                if !d.contains(points[k]) {
                    d = Disk::from_triple(points[i], points[j], points[k]);
                }
            }
        }
    }
    d
}

// Generic mixing weight so that H + tK has simple spectrum whenever the
// commuting pair (H, K) separates the eigenvalues of X.
const MIX: f64 = 0.754_877_666_246_692_7;

/// Eigenvalues of a normal block. H and K (Hermitian and skew parts) commute,
/// so the eigenvectors of the Hermitian matrix H + tK diagonalize X.
fn normal_block_eigenvalues(m: &CMatrix) -> Vec<C64> {
    let d = m.nrows();
    if d == 1 {
        return vec![m[(0, 0)]];
    }
    let half = C64::new(0.5, 0.0);
    let h = (m + m.adjoint()) * half;
    let k = (m - m.adjoint()) * C64::new(0.0, -0.5);
    let eig = SymmetricEigen::new(&h + &k * C64::new(MIX, 0.0));
    (0..d)
        .map(|c| {
            let u = eig.eigenvectors.column(c);
            (u.adjoint() * m * u)[(0, 0)]
        })
        .collect()
}

/// Joint spectrum of a normal element, the union over blocks.
pub fn normal_spectrum(x: &Element, tol: &ToleranceConfig) -> Result<Vec<C64>, AlgebraError> {
    let scale = 1.0 + x.norm();
    let deviation = x.blocks().iter().map(|b| super::spectral_norm(&(b * b.adjoint() - b.adjoint() * b))).fold(0.0, f64::max);
    if deviation > tol.herm_tol * scale * scale {
        return Err(AlgebraError::NonNormal { deviation });
    }
    let hermitian = x.hermitian_deviation() <= tol.herm_tol * scale;
    Ok(x
        .blocks()
        .iter()
        .flat_map(|b| {
            if hermitian {
                hermitian_eigenvalues(b).into_iter().map(|v| C64::new(v, 0.0)).collect()
            } else {
                normal_block_eigenvalues(b)
            }
        })
        .collect())
}

/// Minimizer of `α ↦ ‖X − αI‖` for normal X: the smallest disk containing
/// the spectrum.
pub fn smallest_disk(x: &Element, tol: &ToleranceConfig) -> Result<Disk, AlgebraError> {
    Ok(min_enclosing_disk(&normal_spectrum(x, tol)?))
}

pub fn smallest_disk_radius(x: &Element, tol: &ToleranceConfig) -> Result<f64, AlgebraError> {
    Ok(smallest_disk(x, tol)?.radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_zero_one_has_half_radius() {
        let x = Element::from_matrix(CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])).unwrap();
        let d = smallest_disk(&x, &ToleranceConfig::default()).unwrap();
        assert_eq!(d.radius, 0.5);
        assert_eq!(d.center, c(0.5, 0.0));
    }

    #[test]
    fn identity_has_zero_radius() {
        let x = Element::identity(&AlgebraShape::new(vec![2, 1]).unwrap());
        assert_eq!(smallest_disk_radius(&x, &ToleranceConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn equilateral_triangle_circumcircle() {
        let pts: Vec<C64> = (0..3)
            .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0))
            .collect();
        let d = min_enclosing_disk(&pts);
        assert!((d.radius - 1.0).abs() < 1e-12);
        assert!(d.center.norm() < 1e-12);
    }

    #[test]
    fn interior_points_do_not_move_the_disk() {
        let pts = [c(-1., 0.), c(1., 0.), c(0., 0.5), c(0.2, -0.3)];
        let d = min_enclosing_disk(&pts);
        assert!((d.radius - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_rotation_spectrum() {
        // Rotation by 90 degrees: eigenvalues ±i.
        let x = Element::from_matrix(CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(-1., 0.), c(1., 0.), c(0., 0.)])).unwrap();
        let d = smallest_disk(&x, &ToleranceConfig::default()).unwrap();
        assert!((d.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_normal_is_rejected() {
        let x = Element::from_matrix(CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)])).unwrap();
        assert!(matches!(smallest_disk(&x, &ToleranceConfig::default()), Err(AlgebraError::NonNormal { .. })));
    }
}
