//! Dense tensors over ℝ^D with the index-wise action of matrix groups.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, Matrix};

/// Memory guard on the number of entries: 3^10.
pub const MAX_ENTRIES: usize = 59_049;

/// Order-`n` tensor over ℝ^`dim`, stored row-major by index tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct Tensor {
    dim: usize,
    order: usize,
    entries: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    dim: usize,
    order: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawTensor> for Tensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        Tensor::new(raw.dim, raw.order, raw.entries)
    }
}

fn checked_len(dim: usize, order: usize) -> Result<usize> {
    if dim == 0 {
        return Err(Error::InvalidTensor("dimension must be positive".into()));
    }
    let len = u32::try_from(order)
        .ok()
        .and_then(|n| dim.checked_pow(n))
        .unwrap_or(usize::MAX);
    if len > MAX_ENTRIES {
        return Err(Error::TensorTooLarge {
            entries: len,
            cap: MAX_ENTRIES,
        });
    }
    Ok(len)
}

impl Tensor {
    pub fn new(dim: usize, order: usize, entries: Vec<f64>) -> Result<Self> {
        let len = checked_len(dim, order)?;
        if entries.len() != len {
            return Err(Error::InvalidTensor(format!(
                "expected {len} entries for dim {dim}, order {order}, got {}",
                entries.len()
            )));
        }
        Ok(Self {
            dim,
            order,
            entries,
        })
    }

    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        let len = checked_len(dim, order)?;
        Ok(Self {
            dim,
            order,
            entries: vec![0.0; len],
        })
    }

    pub fn scalar(x: f64) -> Self {
        Self {
            dim: 1,
            order: 0,
            entries: vec![x],
        }
    }

    pub fn vector(v: &[f64]) -> Result<Self> {
        Self::new(v.len(), 1, v.to_vec())
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidTensor("matrix must be square".into()));
        }
        let d = m.nrows();
        Self::new(d, 2, (0..d * d).map(|k| m[(k / d, k % d)]).collect())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(&Matrix::identity(dim, dim)).expect("identity fits")
    }

    /// The `k`-th canonical basis tensor.
    pub fn basis(dim: usize, order: usize, k: usize) -> Result<Self> {
        let mut t = Self::zeros(dim, order)?;
        if k >= t.len() {
            return Err(Error::InvalidTensor(format!("basis index {k} out of range")));
        }
        t.entries[k] = 1.0;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let k = self.flat_index(idx);
        self.entries[k] = value;
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.order != 2 {
            return Err(Error::InvalidTensor(format!(
                "expected an order-2 tensor, got order {}",
                self.order
            )));
        }
        Ok(Matrix::from_row_slice(self.dim, self.dim, &self.entries))
    }

    fn same_shape(&self, other: &Tensor) -> Result<()> {
        if self.dim != other.dim || self.order != other.order {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    pub fn outer(&self, other: &Tensor) -> Result<Tensor> {
        if self.dim != other.dim && self.order > 0 && other.order > 0 {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let dim = if self.order == 0 { other.dim } else { self.dim };
        let order = self.order + other.order;
        checked_len(dim, order)?;
        let entries = self
            .entries
            .iter()
            .flat_map(|&a| other.entries.iter().map(move |&b| a * b))
            .collect();
        Ok(Tensor {
            dim,
            order,
            entries,
        })
    }

    /// `⊗^r self`; `r = 0` gives the scalar 1.
    pub fn tensor_power(&self, r: usize) -> Result<Tensor> {
        checked_len(self.dim, self.order * r)?;
        let mut out = Tensor {
            dim: self.dim,
            order: 0,
            entries: vec![1.0],
        };
        for _ in 0..r {
            out = out.outer(self)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Tensor {
        Tensor {
            dim: self.dim,
            order: self.order,
            entries: self.entries.iter().map(|x| x * s).collect(),
        }
    }

    /// `self += s · other`.
    pub fn add_scaled(&mut self, s: f64, other: &Tensor) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        let mut out = self.clone();
        out.add_scaled(-1.0, other)?;
        Ok(out)
    }

    /// Sum of entry-wise products.
    pub fn dot(&self, other: &Tensor) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).sum())
    }

    pub fn norm_inf(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f64> {
        Ok(self.sub(other)?.norm_inf())
    }
}

/// `(g⋆T)_{i₁…iₙ} = g_{i₁j₁}⋯g_{iₙjₙ} T_{j₁…jₙ}`, as `n` mode contractions.
pub fn act(g: &GroupElement, t: &Tensor) -> Result<Tensor> {
    act_matrix(g.matrix(), t)
}

pub(crate) fn act_matrix(g: &Matrix, t: &Tensor) -> Result<Tensor> {
    let d = t.dim;
    if t.order > 0 && g.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: g.nrows(),
        });
    }
    let mut cur = t.entries.clone();
    let mut out = vec![0.0; cur.len()];
    for mode in 0..t.order {
        let stride = d.pow((t.order - 1 - mode) as u32);
        let block = stride * d;
        out.iter_mut().for_each(|x| *x = 0.0);
        for base in (0..cur.len()).step_by(block) {
            for i in 0..d {
                let dst = base + i * stride;
                for j in 0..d {
                    let gij = g[(i, j)];
                    if gij == 0.0 {
                        continue;
                    }
                    let src = base + j * stride;
                    for s in 0..stride {
                        out[dst + s] += gij * cur[src + s];
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut out);
    }
    Ok(Tensor {
        dim: t.dim,
        order: t.order,
        entries: cur,
    })
}
