//! Reynolds projectors and dimensions of invariant tensor spaces.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};

use crate::engine::{GroupQuadrature, HaarDensity};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupTag, Matrix, INPUT_TOL};
use crate::quadrature::{AxisRule, QuadratureRule};
use crate::tensor::{act, Tensor};

/// GL nodes of the reduced one-dimensional trace integral.
pub const REDUCED_NODES: usize = 256;

/// Largest admissible distance from an integer for a quadrature dimension.
pub const INTEGER_TOL: f64 = 1e-3;

/// A finite matrix group, checked for identity, closure and inverses.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    elements: Vec<GroupElement>,
}

impl FiniteGroup {
    pub fn new(elements: Vec<GroupElement>) -> Result<Self> {
        let first = elements.first().ok_or(Error::EmptyGroup)?;
        let d = first.dim();
        if let Some(g) = elements.iter().find(|g| g.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: g.dim(),
            });
        }
        let find = |m: &Matrix| elements.iter().position(|h| (h.matrix() - m).amax() < INPUT_TOL);
        if find(&Matrix::identity(d, d)).is_none() {
            return Err(Error::NotAGroup("identity is missing".into()));
        }
        for (a, g) in elements.iter().enumerate() {
            if find(&g.matrix().transpose()).is_none() {
                return Err(Error::NotAGroup(format!("inverse of element {a} is missing")));
            }
            for (b, h) in elements.iter().enumerate() {
                if find(&(g.matrix() * h.matrix())).is_none() {
                    return Err(Error::NotAGroup(format!("product of elements {a} and {b} is missing")));
                }
            }
        }
        Ok(Self { elements })
    }

    /// Rotations by multiples of `2π/order` about a unit axis.
    pub fn cyclic(axis: [f64; 3], order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::EmptyGroup);
        }
        let elements = (0..order)
            .map(|k| crate::group::rodrigues(axis, 2.0 * PI * k as f64 / order as f64))
            .collect::<Result<_>>()?;
        Self::new(elements)
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// `(1/|G|) Σ_g g⋆T`.
pub fn reynolds_finite(group: &FiniteGroup, t: &Tensor) -> Result<Tensor> {
    let mut acc = Tensor::zeros(t.dim(), t.order())?;
    for g in &group.elements {
        acc.add_scaled(1.0, &act(g, t)?)?;
    }
    Ok(acc.scaled(1.0 / group.order() as f64))
}

/// `∫ g⋆T dμ(g)` over a discretized group.
pub fn reynolds(quadrature: &GroupQuadrature, t: &Tensor) -> Result<Tensor> {
    if t.order() > 0 && t.dim() != quadrature.group().dim() {
        return Err(Error::DimensionMismatch {
            expected: quadrature.group().dim(),
            found: t.dim(),
        });
    }
    quadrature.integrate_tensor(|g| act(g, t))
}

/// [`reynolds`] with the quadrature built from a density and a rule.
pub fn reynolds_continuous(
    group: GroupTag,
    density: &HaarDensity,
    rule: &QuadratureRule,
    t: &Tensor,
) -> Result<Tensor> {
    reynolds(&GroupQuadrature::new(group, density, rule)?, t)
}

/// The Reynolds operator on `(ℝ^D)^⊗n` as a `Dⁿ×Dⁿ` matrix, `∫ g^⊗n dμ`.
/// Column `k` is the projection of the `k`-th canonical basis tensor.
pub fn reynolds_matrix(quadrature: &GroupQuadrature, n: usize) -> Result<Matrix> {
    let d = quadrature.group().dim();
    let size = Tensor::zeros(d, n)?.len();
    let integral = quadrature.integrate_tensor(|g| {
        Tensor::from_matrix(g.matrix())?
            .tensor_power(n)
            .map(|t| interleave_kron(&t, d, n))
    })?;
    Ok(Matrix::from_row_slice(size, size, integral.entries()))
}

/// Reorders `g_{i₁j₁}⋯g_{iₙjₙ}` from `(i₁,j₁,…,iₙ,jₙ)` to `(i₁…iₙ, j₁…jₙ)`.
fn interleave_kron(t: &Tensor, d: usize, n: usize) -> Tensor {
    let mut out = t.clone();
    let entries = out.entries_mut();
    let size = d.pow(n as u32);
    for row in 0..size {
        for col in 0..size {
            let mut src = 0;
            for k in 0..n {
                let shift = d.pow((n - 1 - k) as u32);
                let i = (row / shift) % d;
                let j = (col / shift) % d;
                src = (src * d + i) * d + j;
            }
            entries[row * size + col] = t.entries()[src];
        }
    }
    out
}

/// Number of singular values above `threshold`.
pub fn numerical_rank(m: &Matrix, threshold: f64) -> usize {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}

fn check_integral(value: f64) -> Result<f64> {
    let distance = (value - value.round()).abs();
    if distance > INTEGER_TOL || !value.is_finite() {
        return Err(Error::UnderResolved { value, distance });
    }
    Ok(value)
}

/// `dim V^G = ∫ Tr(g)ⁿ dμ` on the full tensor space, by group quadrature.
pub fn dim_invariants_quadrature(quadrature: &GroupQuadrature, n: u32) -> Result<f64> {
    check_integral(quadrature.integrate_scalar(|g| g.trace().powi(n as i32)))
}

/// The same integral reduced to the rotation angle: the trace only depends
/// on it, with density `1/2π` on SO(2) and `(2/π) sin²(α/2)` on SO(3).
/// Reflections have trace 0 in 2D; `−g` has trace `−Tr g` in 3D.
pub fn dim_invariants_reduced(group: GroupTag, n: u32, nodes: usize) -> Result<f64> {
    let n = n as i32;
    let proper = match group.proper() {
        GroupTag::So2 => AxisRule::new(nodes, 0.0, 2.0 * PI).integrate(|a| (2.0 * a.cos()).powi(n) / (2.0 * PI)),
        _ => AxisRule::new(nodes, 0.0, PI)
            .integrate(|a| (1.0 + 2.0 * a.cos()).powi(n) * (2.0 / PI) * (a / 2.0).sin().powi(2)),
    };
    let value = match group {
        GroupTag::So2 | GroupTag::So3 => proper,
        GroupTag::O2 => 0.5 * (proper + if n == 0 { 1.0 } else { 0.0 }),
        GroupTag::O3 => 0.5 * (proper + if n % 2 == 0 { proper } else { -proper }),
    };
    check_integral(value)
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    BigInt::from(acc)
}

/// Exact dimension of the invariant subspace of `(ℝ^D)^⊗n`.
pub fn dim_invariants_closed(group: GroupTag, n: u32) -> BigUint {
    let n = n as u64;
    let value = match group {
        GroupTag::So3 => so3_dimension(n),
        GroupTag::O3 if n % 2 == 0 => so3_dimension(n),
        GroupTag::O3 => BigInt::from(0),
        // ∫ (2 cos α)ⁿ dα/2π = C(n, n/2) for even n
        GroupTag::So2 if n % 2 == 0 => binomial(n, n / 2),
        GroupTag::So2 => BigInt::from(0),
        GroupTag::O2 if n == 0 => BigInt::from(1),
        GroupTag::O2 if n % 2 == 0 => binomial(n, n / 2) / 2,
        GroupTag::O2 => BigInt::from(0),
    };
    value.to_biguint().expect("dimensions are nonnegative")
}

fn so3_dimension(n: u64) -> BigInt {
    let m = n / 2;
    let sum: BigInt = (0..=m)
        .map(|k| binomial(2 * k, k) * (binomial(n, 2 * k) * 3 - binomial(n + 1, 2 * k)))
        .sum();
    let total = if n % 2 == 0 { sum } else { sum - binomial(2 * m + 2, m + 1) };
    total / 2
}

/// Orthonormal basis of symmetric 3×3 matrices under `Tr(A Bᵀ)`.
pub fn sym2_basis() -> Vec<Matrix> {
    let mut basis = Vec::with_capacity(6);
    for i in 0..3 {
        let mut e = Matrix::zeros(3, 3);
        e[(i, i)] = 1.0;
        basis.push(e);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let mut e = Matrix::zeros(3, 3);
        e[(i, j)] = s;
        e[(j, i)] = s;
        basis.push(e);
    }
    basis
}

/// Trace of `v ↦ g v gᵀ` restricted to Sym₂(ℝ³), via the basis projection.
pub fn sym2_character(g: &GroupElement, basis: &[Matrix]) -> f64 {
    let q = g.matrix();
    basis
        .iter()
        .map(|e| (q * e * q.transpose()).component_mul(e).sum())
        .sum()
}

/// `dim (Sym₂(ℝ³)^⊗n)^G = ∫ χ_Sym₂(g)ⁿ dμ`.
pub fn dim_invariants_sym2(quadrature: &GroupQuadrature, n: u32) -> Result<f64> {
    if quadrature.group().dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: quadrature.group().dim(),
        });
    }
    let basis = sym2_basis();
    check_integral(quadrature.integrate_scalar(|g| sym2_character(g, &basis).powi(n as i32)))
}

/// Matrix of the projector in a given basis, `P_ab = ⟨E_a, R(E_b)⟩`.
pub fn projector_in_basis(quadrature: &GroupQuadrature, basis: &[Matrix]) -> Result<DMatrix<f64>> {
    let k = basis.len();
    let mut p = DMatrix::zeros(k, k);
    for (b, eb) in basis.iter().enumerate() {
        let r = reynolds(quadrature, &Tensor::from_matrix(eb)?)?.to_matrix()?;
        for (a, ea) in basis.iter().enumerate() {
            p[(a, b)] = r.component_mul(ea).sum();
        }
    }
    Ok(p)
}
