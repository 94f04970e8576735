//! Moments of the orbit variable `X(g) = ρ(g)v` under Haar-uniform `g`.

use nalgebra::{DMatrix, DVector};

use crate::engine::GroupQuadrature;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupTag, CONSTRUCTED_TOL};
use crate::sampling::{Sampler, SamplerConfig};
use crate::tensor::{act, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// `g v` on vectors.
    Natural,
    /// `g⋆T` on order-`n` tensors.
    Tensor(usize),
    /// `g v gᵀ` on symmetric matrices.
    Sym2,
}

impl Representation {
    pub fn order(self) -> usize {
        match self {
            Representation::Natural => 1,
            Representation::Tensor(n) => n,
            Representation::Sym2 => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSpec {
    group: GroupTag,
    representation: Representation,
    seed: Tensor,
}

impl OrbitSpec {
    pub fn new(group: GroupTag, representation: Representation, seed: Tensor) -> Result<Self> {
        if seed.order() != representation.order() || (seed.order() > 0 && seed.dim() != group.dim()) {
            return Err(Error::InvalidTensor(format!(
                "seed of dim {} and order {} does not fit {representation:?} over {group}",
                seed.dim(),
                seed.order()
            )));
        }
        if representation == Representation::Sym2 {
            let m = seed.to_matrix()?;
            if (&m - m.transpose()).amax() > CONSTRUCTED_TOL {
                return Err(Error::InvalidTensor("sym2 seed must be symmetric".into()));
            }
        }
        Ok(Self {
            group,
            representation,
            seed,
        })
    }

    pub fn group(&self) -> GroupTag {
        self.group
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn seed(&self) -> &Tensor {
        &self.seed
    }

    /// `ρ(g)v`.
    pub fn image(&self, g: &GroupElement) -> Result<Tensor> {
        act(g, &self.seed)
    }

    fn check_group(&self, group: GroupTag) -> Result<()> {
        if group != self.group {
            return Err(Error::IncompatibleChart {
                chart: format!("quadrature over {group}"),
                group: self.group.to_string(),
            });
        }
        Ok(())
    }
}

/// `m_r(X) = ∫ ⊗^r (ρ(g)v) dμ`.
pub fn moment(spec: &OrbitSpec, r: usize, quadrature: &GroupQuadrature) -> Result<Tensor> {
    spec.check_group(quadrature.group())?;
    if r == 0 {
        return Err(Error::Invalid("moment order must be positive".into()));
    }
    Tensor::zeros(spec.seed.dim(), spec.seed.order() * r)?;
    quadrature.integrate_tensor(|g| spec.image(g)?.tensor_power(r))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Covariance {
    pub m1: Tensor,
    pub m2: Tensor,
    /// `m₂ − m₁⊗m₁`.
    pub standard: Tensor,
    /// `m₁⊗m₁ − m₂`, the opposite sign convention.
    pub displayed: Tensor,
}

pub fn covariance(spec: &OrbitSpec, quadrature: &GroupQuadrature) -> Result<Covariance> {
    let m1 = moment(spec, 1, quadrature)?;
    let m2 = moment(spec, 2, quadrature)?;
    let outer = m1.outer(&m1)?;
    let standard = m2.sub(&outer)?;
    let displayed = standard.scaled(-1.0);
    Ok(Covariance {
        m1,
        m2,
        standard,
        displayed,
    })
}

/// Empirical moment with entry-wise standard errors (absent for one sample).
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: Tensor,
    pub stderr: Option<Tensor>,
    pub count: usize,
}

impl McEstimate {
    /// Largest `|mean − reference| / stderr` over entries; infinite when an
    /// entry differs with zero standard error.
    pub fn max_z_score(&self, reference: &Tensor) -> Result<f64> {
        let diff = self.mean.sub(reference)?;
        let se = self
            .stderr
            .as_ref()
            .ok_or(Error::Invalid("standard errors need at least two samples".into()))?;
        Ok(diff
            .entries()
            .iter()
            .zip(se.entries())
            .map(|(d, s)| match (d.abs(), *s) {
                (d, s) if s > 0.0 => d / s,
                (d, _) if d < 1e-12 => 0.0,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max))
    }
}

/// Mean of `⊗^r ρ(gᵢ)v` over `config.count` sampled `gᵢ`.
pub fn mc_moments(spec: &OrbitSpec, r: usize, config: &SamplerConfig) -> Result<McEstimate> {
    spec.check_group(config.group)?;
    if r == 0 {
        return Err(Error::Invalid("moment order must be positive".into()));
    }
    let mut sampler = Sampler::new(*config)?;
    let mut mean = Tensor::zeros(spec.seed.dim(), spec.seed.order() * r)?;
    let mut m2 = vec![0.0; mean.len()];
    for k in 0..config.count {
        let x = spec.image(&sampler.next_element()?)?.tensor_power(r)?;
        let w = 1.0 / (k + 1) as f64;
        for ((m, s), v) in mean.entries_mut().iter_mut().zip(m2.iter_mut()).zip(x.entries()) {
            let delta = v - *m;
            *m += delta * w;
            *s += delta * (v - *m);
        }
    }
    let n = config.count as f64;
    let stderr = (config.count > 1).then(|| {
        let entries = m2.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect();
        Tensor::new(mean.dim(), mean.order(), entries).expect("same shape as mean")
    });
    Ok(McEstimate {
        mean,
        stderr,
        count: config.count,
    })
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

fn order4(dim: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Tensor {
    let mut t = Tensor::zeros(dim, 4).expect("small order-4 tensor");
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    t.set(&[i, j, k, l], f(i, j, k, l));
                }
            }
        }
    }
    t
}

/// `δ_ijkl`: 1 when all four indices agree.
pub fn j1(dim: usize) -> Tensor {
    order4(dim, |i, j, k, l| delta(i, j) * delta(j, k) * delta(k, l))
}

/// `δ_ij δ_kl`.
pub fn j2(dim: usize) -> Tensor {
    order4(dim, |i, j, k, l| delta(i, j) * delta(k, l))
}

/// `½(δ_ik δ_jl + δ_il δ_jk)`, the identity on symmetric matrices.
pub fn sym_identity(dim: usize) -> Tensor {
    order4(dim, |i, j, k, l| 0.5 * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k)))
}

/// Least-squares coefficients of `t` on `basis` and the sup-norm residual.
pub fn decompose(t: &Tensor, basis: &[Tensor]) -> Result<(Vec<f64>, f64)> {
    let mut a = DMatrix::zeros(t.len(), basis.len());
    for (c, b) in basis.iter().enumerate() {
        if b.len() != t.len() {
            return Err(Error::DimensionMismatch {
                expected: t.len(),
                found: b.len(),
            });
        }
        a.set_column(c, &DVector::from_column_slice(b.entries()));
    }
    let rhs = DVector::from_column_slice(t.entries());
    let coeffs = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let residual = (&a * &coeffs - rhs).amax();
    Ok((coeffs.iter().copied().collect(), residual))
}

/// Second moment of the Sym₂(ℝ³) orbit of `v` over SO(3) or O(3):
/// `a δ_ij δ_kl + b (δ_ik δ_jl + δ_il δ_jk)` with `t = Tr v`, `s = Tr v²`,
/// `a = (2t² − s)/15`, `b = (3s − t²)/30`.
pub fn sym2_second_moment(v: &Tensor) -> Result<Tensor> {
    let m = v.to_matrix()?;
    if m.nrows() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: m.nrows(),
        });
    }
    let t = m.trace();
    let s = (&m * &m).trace();
    let a = (2.0 * t * t - s) / 15.0;
    let b = (3.0 * s - t * t) / 30.0;
    let mut out = j2(3).scaled(a);
    out.add_scaled(2.0 * b, &sym_identity(3))?;
    Ok(out)
}
