//! Orthogonal group elements and the elementary constructions on them.
//!
//! The skew map follows the convention
//!
//! ```text
//!        ( 0    x3  -x2 )
//! j(x) = (-x3   0    x1 )
//!        ( x2  -x1   0  )
//! ```
//!
//! so `j(x) v = v × x`. Consequently `rodrigues(n, a)` turns vectors by `-a`
//! about `n` in the right-handed sense, and `[j(a), j(b)] = -j(a × b)`.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Tolerance for elements produced by this crate.
pub const CONSTRUCTED_TOL: f64 = 1e-12;
/// Tolerance for matrices, axes and quaternions supplied from outside.
pub const INPUT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupTag {
    So2,
    O2,
    So3,
    O3,
}

impl GroupTag {
    pub fn dim(self) -> usize {
        match self {
            GroupTag::So2 | GroupTag::O2 => 2,
            GroupTag::So3 | GroupTag::O3 => 3,
        }
    }

    /// The rotation subgroup integrated over when applying the coset split.
    pub fn proper(self) -> GroupTag {
        match self {
            GroupTag::So2 | GroupTag::O2 => GroupTag::So2,
            GroupTag::So3 | GroupTag::O3 => GroupTag::So3,
        }
    }

    pub fn is_full_orthogonal(self) -> bool {
        matches!(self, GroupTag::O2 | GroupTag::O3)
    }

    /// Representative of the non-identity coset: `diag(-1, 1)` in 2D, `-I` in 3D.
    pub fn coset_representative(self) -> GroupElement {
        match self {
            GroupTag::So2 | GroupTag::O2 => {
                GroupElement::from_trusted(Matrix::from_diagonal(&nalgebra::dvector![-1.0, 1.0]))
            }
            GroupTag::So3 | GroupTag::O3 => GroupElement::from_trusted(-Matrix::identity(3, 3)),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GroupTag::So2 => "so2",
            GroupTag::O2 => "o2",
            GroupTag::So3 => "so3",
            GroupTag::O3 => "o3",
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['(', ')'], "").as_str() {
            "so2" => Ok(GroupTag::So2),
            "o2" => Ok(GroupTag::O2),
            "so3" => Ok(GroupTag::So3),
            "o3" => Ok(GroupTag::O3),
            _ => Err(Error::UnknownTag(s.to_string())),
        }
    }
}

/// A real orthogonal `D×D` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    matrix: Matrix,
}

impl GroupElement {
    /// Validates orthogonality and `det = ±1` within `tol`.
    pub fn new(matrix: Matrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let residual = orthogonality_residual(&matrix);
        if residual > tol {
            return Err(Error::NotOrthogonal { residual });
        }
        let det = matrix.determinant();
        if (det.abs() - 1.0).abs() > tol {
            return Err(Error::NotOrthogonal {
                residual: (det.abs() - 1.0).abs(),
            });
        }
        Ok(Self { matrix })
    }

    /// Skips validation; for matrices built from closed-form orthogonal expressions.
    pub(crate) fn from_trusted(matrix: Matrix) -> Self {
        debug_assert!(orthogonality_residual(&matrix) < 1e-8);
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: Matrix::identity(dim, dim),
        }
    }

    pub fn from_matrix3(m: &Matrix3<f64>) -> Self {
        Self::from_trusted(Matrix::from_column_slice(3, 3, m.as_slice()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }

    /// Elements of the rotation subgroup.
    pub fn is_proper(&self) -> bool {
        self.det() > 0.0
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Rotation angle in `[0, π]` of a 3D rotation.
    pub fn rotation_angle(&self) -> f64 {
        ((self.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        &self * &rhs
    }
}

/// `max |QQᵀ - I|` entry-wise.
pub fn orthogonality_residual(m: &Matrix) -> f64 {
    let n = m.nrows();
    let qqt = m * m.transpose();
    (qqt - Matrix::identity(n, n)).amax()
}

/// Coordinates of an element of so(3) under the skew map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraVector3(pub [f64; 3]);

impl AlgebraVector3 {
    pub fn hat(&self) -> Matrix3<f64> {
        hat(self.0)
    }

    pub fn vee(m: &Matrix3<f64>) -> Self {
        Self(vee(m))
    }
}

pub fn hat(x: [f64; 3]) -> Matrix3<f64> {
    Matrix3::new(
        0.0, x[2], -x[1], //
        -x[2], 0.0, x[0], //
        x[1], -x[0], 0.0,
    )
}

/// Inverse of [`hat`] on skew matrices; reads the upper triangle.
pub fn vee(m: &Matrix3<f64>) -> [f64; 3] {
    [m[(1, 2)], -m[(0, 2)], m[(0, 1)]]
}

fn check_unit(n: [f64; 3]) -> Result<Vector3<f64>> {
    let v = Vector3::from(n);
    let norm = v.norm();
    if (norm - 1.0).abs() > INPUT_TOL {
        return Err(Error::NonUnitAxis { norm });
    }
    Ok(v)
}

/// `I + sin(α) j(n) + (1 - cos α) j(n)²`.
pub fn rodrigues(n: [f64; 3], alpha: f64) -> Result<GroupElement> {
    check_unit(n)?;
    Ok(GroupElement::from_matrix3(&rodrigues_matrix(n, alpha)))
}

pub(crate) fn rodrigues_matrix(n: [f64; 3], alpha: f64) -> Matrix3<f64> {
    let k = hat(n);
    Matrix3::identity() + k * alpha.sin() + k * k * (1.0 - alpha.cos())
}

/// Reflection through the plane normal to `n`: `x ↦ x - 2⟨x,n⟩n`.
pub fn reflection(n: [f64; 3]) -> Result<GroupElement> {
    let v = check_unit(n)?;
    Ok(GroupElement::from_matrix3(
        &(Matrix3::identity() - v * v.transpose() * 2.0),
    ))
}

/// `½ Tr(A Bᵀ)`.
pub fn frobenius(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows() * a.ncols(),
            found: b.nrows() * b.ncols(),
        });
    }
    Ok(0.5 * a.component_mul(b).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn pure(v: [f64; 3]) -> Self {
        Self::new(0.0, v[0], v[1], v[2])
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn imag(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn conjugate(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// Real 4×4 matrix of `p ↦ q p` in the basis `(1, i, j, k)`.
    pub fn left_matrix(self) -> Matrix {
        let Quaternion { w, x, y, z } = self;
        Matrix::from_row_slice(
            4,
            4,
            &[
                w, -x, -y, -z, //
                x, w, -z, y, //
                y, z, w, -x, //
                z, -y, x, w,
            ],
        )
    }

    /// Rotation matrix of `v ↦ q v q̄`, without a norm check.
    pub(crate) fn rotation_matrix(self) -> Matrix3<f64> {
        let Quaternion { w, x, y, z } = self;
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        let l = self;
        Quaternion::new(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
    }
}

impl std::ops::Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// The rotation acting as `v ↦ q v q̄` on pure quaternions; `q` and `-q` agree.
pub fn quat_to_rotation(q: Quaternion) -> Result<GroupElement> {
    if !q.is_unit(INPUT_TOL) {
        return Err(Error::NonUnitQuaternion { norm: q.norm() });
    }
    Ok(GroupElement::from_matrix3(&q.rotation_matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn max_diff(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
        (a - b).amax()
    }

    fn m3(g: &GroupElement) -> Matrix3<f64> {
        Matrix3::from_iterator(g.matrix().iter().copied())
    }

    #[test]
    fn hat_places_first_component_at_row_two() {
        let expected = Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0);
        assert_eq!(hat([1.0, 0.0, 0.0]), expected);
        assert_eq!(hat([0.0; 3]), Matrix3::zeros());
    }

    #[test]
    fn hat_commutator_carries_a_minus_sign() {
        let (a, b) = (hat([1.0, 0.0, 0.0]), hat([0.0, 1.0, 0.0]));
        assert_eq!(a * b - b * a, -hat([0.0, 0.0, 1.0]));
    }

    #[test]
    fn hat_acts_as_right_cross_product() {
        let x = [0.3, -1.2, 2.0];
        let v = Vector3::new(1.0, 0.5, -0.7);
        let cross = v.cross(&Vector3::from(x));
        assert!((hat(x) * v - cross).amax() < 1e-15);
    }

    #[test]
    fn rodrigues_examples() {
        let e3 = [0.0, 0.0, 1.0];
        assert!(max_diff(&m3(&rodrigues(e3, 0.0).unwrap()), &Matrix3::identity()) < 1e-15);
        // I + j(e3) + j(e3)² expanded by hand
        let expected = Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!(max_diff(&m3(&rodrigues(e3, FRAC_PI_2).unwrap()), &expected) < 1e-15);
        let n = [0.6, 0.0, 0.8];
        assert!(max_diff(&m3(&rodrigues(n, 2.0 * PI).unwrap()), &Matrix3::identity()) < 1e-14);
    }

    #[test]
    fn rodrigues_rejects_non_unit_axis() {
        assert!(matches!(
            rodrigues([1.0, 1.0, 0.0], 0.3),
            Err(Error::NonUnitAxis { .. })
        ));
    }

    #[test]
    fn reflection_examples() {
        let r = reflection([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(m3(&r), Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0)));
        assert_eq!(r.apply(&[0.0, 1.0, 0.0]), vec![0.0, 1.0, 0.0]);
        let s = reflection([0.0, 0.6, 0.8]).unwrap();
        assert!(((&s * &s).matrix() - Matrix::identity(3, 3)).amax() < 1e-15);
        assert!((s.det() + 1.0).abs() < 1e-12);
        assert!(reflection([0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn quaternion_examples() {
        let id = quat_to_rotation(Quaternion::IDENTITY).unwrap();
        assert_eq!(id, GroupElement::identity(3));
        let q = Quaternion::new(FRAC_PI_4.cos(), FRAC_PI_4.sin(), 0.0, 0.0);
        let r = quat_to_rotation(q).unwrap();
        // q e2 q̄ = e3 and q e3 q̄ = -e2, read off by quaternion products
        for (v, img) in [([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]), ([0.0, 0.0, 1.0], [0.0, -1.0, 0.0])] {
            let rotated = (q * Quaternion::pure(v) * q.conjugate()).imag();
            let by_matrix = r.apply(&v);
            for k in 0..3 {
                assert!((rotated[k] - img[k]).abs() < 1e-15);
                assert!((by_matrix[k] - img[k]).abs() < 1e-15);
            }
        }
        assert_eq!(quat_to_rotation(-q).unwrap(), r);
        assert!(quat_to_rotation(Quaternion::new(1.0, 1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn frobenius_examples() {
        let e1 = Matrix::from_column_slice(3, 3, hat([1.0, 0.0, 0.0]).as_slice());
        assert_eq!(frobenius(&e1, &e1).unwrap(), 1.0);
        let i2 = Matrix::identity(2, 2);
        assert_eq!(frobenius(&i2, &i2).unwrap(), 1.0);
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = Matrix::from_row_slice(2, 2, &[-1.0, 0.5, 2.0, 7.0]);
        assert_eq!(frobenius(&a, &b).unwrap(), frobenius(&b, &a).unwrap());
        assert!(frobenius(&i2, &e1).is_err());
    }

    #[test]
    fn group_element_validation() {
        assert!(GroupElement::new(Matrix::identity(3, 3) * 1.1, INPUT_TOL).is_err());
        assert!(GroupElement::new(-Matrix::identity(3, 3), INPUT_TOL).is_ok());
        assert!(!GroupTag::O3.coset_representative().is_proper());
        assert_eq!("SO(3)".parse::<GroupTag>().unwrap(), GroupTag::So3);
    }

    #[test]
    fn left_matrix_is_quaternion_product() {
        let p = Quaternion::new(0.1, -0.4, 0.7, 0.2);
        let q = Quaternion::new(-0.3, 0.5, 0.25, 0.9);
        let lhs = p.left_matrix() * nalgebra::DVector::from_column_slice(&q.to_array());
        let rhs = (p * q).to_array();
        for k in 0..4 {
            assert!((lhs[k] - rhs[k]).abs() < 1e-15);
        }
    }
}
