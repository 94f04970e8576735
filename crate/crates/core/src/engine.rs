//! Haar densities in arbitrary charts and integration over SO/O(2), SO/O(3).
//!
//! For a chart `p` and a basis `(ξᵢ)` of the Lie algebra, the unnormalized
//! density is `|det M(u)|` with `M(u)ᵢⱼ` the `ξᵢ`-coordinate of
//! `p(u)⁻¹ ∂p/∂uʲ`. With the `½ Tr(A Bᵀ)` product and an orthonormal basis
//! this coordinate is the product itself. Quaternion charts are handled in
//! the quaternion algebra with basis `(i, j, k)`, realised through the 4×4
//! left-multiplication matrices.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dsl::{BuiltinChart, Chart, ChartGroup, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::group::{frobenius, hat, GroupElement, GroupTag, Matrix, Quaternion};
use crate::quadrature::{sum_compensated, QuadratureRule};
use crate::tensor::Tensor;

/// Smallest admissible normalization constant.
const MIN_NORMALIZATION: f64 = 1e-12;

/// Nodes per chunk when accumulating tensors in parallel. Fixed so the
/// summation order never depends on the thread pool.
const CHUNK: usize = 512;

/// Lie algebra basis matched to the chart's matrix representation.
pub fn algebra_basis(chart: &Chart) -> Result<Vec<Matrix>> {
    let m3 = |x: [f64; 3]| Matrix::from_column_slice(3, 3, hat(x).as_slice());
    let basis = match (chart.group(), chart.matrix_dim()) {
        (ChartGroup::Su2, _) => [
            Quaternion::new(0.0, 1.0, 0.0, 0.0),
            Quaternion::new(0.0, 0.0, 1.0, 0.0),
            Quaternion::new(0.0, 0.0, 0.0, 1.0),
        ]
        .iter()
        .map(|q| q.left_matrix())
        .collect(),
        (_, 2) => vec![Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])],
        (_, 3) => vec![m3([1.0, 0.0, 0.0]), m3([0.0, 1.0, 0.0]), m3([0.0, 0.0, 1.0])],
        (g, d) => {
            return Err(Error::IncompatibleChart {
                chart: chart.name().to_string(),
                group: format!("{g} with {d}×{d} matrices (no default algebra basis)"),
            })
        }
    };
    Ok(basis)
}

/// Unnormalized `|k̃(u)|` with an explicit basis and difference step.
pub fn density_numeric_with(chart: &Chart, basis: &[Matrix], u: &[f64], step: f64) -> Result<f64> {
    if basis.len() != chart.param_count() {
        return Err(Error::DimensionMismatch {
            expected: chart.param_count(),
            found: basis.len(),
        });
    }
    let p = chart.evaluate(u)?;
    let inv = if chart.group().is_orthogonal() {
        p.transpose()
    } else {
        p.clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularChart { point: u.to_vec() })?
    };
    let partials = chart.jacobian_map(u, step)?;
    let d = basis.len();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for (j, dp) in partials.iter().enumerate() {
        let tau = &inv * dp;
        for (i, xi) in basis.iter().enumerate() {
            m[(i, j)] = frobenius(&tau, xi)? / frobenius(xi, xi)?;
        }
    }
    let k = m.determinant().abs();
    if !k.is_finite() {
        return Err(Error::NonFiniteDensity { point: u.to_vec() });
    }
    Ok(k)
}

/// Unnormalized `|k̃(u)|` in the chart's default basis.
pub fn density_numeric(chart: &Chart, u: &[f64]) -> Result<f64> {
    density_numeric_with(chart, &algebra_basis(chart)?, u, DEFAULT_STEP)
}

/// Normalized closed-form densities of the built-in charts.
pub fn closed_form_density(chart: BuiltinChart, u: &[f64]) -> Result<f64> {
    let want = match chart {
        BuiltinChart::So2Angle | BuiltinChart::So2Shifted => 1,
        _ => 3,
    };
    if u.len() != want {
        return Err(Error::DimensionMismatch {
            expected: want,
            found: u.len(),
        });
    }
    Ok(match chart {
        BuiltinChart::So2Angle | BuiltinChart::So2Shifted => 1.0 / (2.0 * PI),
        // (phi, psi, alpha)
        BuiltinChart::So3Polar => u[1].cos() * (u[2] / 2.0).sin().powi(2) / (2.0 * PI * PI),
        // (alpha, beta, gamma)
        BuiltinChart::So3Euler => u[1].sin() / (8.0 * PI * PI),
        // (theta, psi, phi)
        BuiltinChart::So3Quat => u[0].sin().powi(2) * u[1].sin() / (2.0 * PI * PI),
    })
}

/// String-tag variant of [`closed_form_density`].
pub fn closed_form_density_tag(tag: &str, u: &[f64]) -> Result<f64> {
    closed_form_density(tag.parse()?, u)
}

/// Exact `C = ∫ |k̃|` of each built-in chart in its default algebra basis.
/// The polar chart gives `|k̃| = 4 sin²(α/2) cos ψ` in the `hat(eᵢ)` basis.
pub fn closed_form_constant(chart: BuiltinChart) -> f64 {
    match chart {
        BuiltinChart::So2Angle | BuiltinChart::So2Shifted => 2.0 * PI,
        BuiltinChart::So3Euler | BuiltinChart::So3Polar => 8.0 * PI * PI,
        BuiltinChart::So3Quat => 2.0 * PI * PI,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityMode {
    Numeric,
    ClosedForm,
}

/// A chart with its normalized Haar density `k(u) = |k̃(u)| / C`.
#[derive(Clone, Debug)]
pub struct HaarDensity {
    chart: Chart,
    basis: Vec<Matrix>,
    normalization: f64,
    mode: DensityMode,
    step: f64,
}

impl HaarDensity {
    /// `C = ∫_U |k̃(u)| du` by the given product rule.
    pub fn normalize(chart: Chart, basis: Vec<Matrix>, rule: &QuadratureRule) -> Result<Self> {
        Self::normalize_with_step(chart, basis, rule, DEFAULT_STEP)
    }

    pub fn normalize_with_step(
        chart: Chart,
        basis: Vec<Matrix>,
        rule: &QuadratureRule,
        step: f64,
    ) -> Result<Self> {
        let values: Vec<f64> = (0..rule.len())
            .into_par_iter()
            .map(|k| {
                let (u, w) = rule.point(k);
                density_numeric_with(&chart, &basis, &u, step).map(|v| w * v)
            })
            .collect::<Result<_>>()?;
        let c = sum_compensated(values);
        if !(c >= MIN_NORMALIZATION) {
            return Err(Error::DegenerateChart(c));
        }
        Ok(Self {
            chart,
            basis,
            normalization: c,
            mode: DensityMode::Numeric,
            step,
        })
    }

    /// Numeric density in the default basis with `nodes` Gauss–Legendre points per axis.
    pub fn numeric(chart: Chart, nodes: usize) -> Result<Self> {
        let basis = algebra_basis(&chart)?;
        let rule = QuadratureRule::uniform(nodes, chart.domain());
        Self::normalize(chart, basis, &rule)
    }

    /// Closed-form density of a built-in chart.
    pub fn closed_form(which: BuiltinChart) -> Self {
        let chart = Chart::builtin(which);
        let basis = algebra_basis(&chart).expect("built-in charts have a basis");
        Self {
            chart,
            basis,
            normalization: closed_form_constant(which),
            mode: DensityMode::ClosedForm,
            step: DEFAULT_STEP,
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    /// The constant `C`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn mode(&self) -> DensityMode {
        self.mode
    }

    /// Normalized `k(u)`.
    pub fn value(&self, u: &[f64]) -> Result<f64> {
        match (self.mode, self.chart.builtin_tag()) {
            (DensityMode::ClosedForm, Some(b)) => {
                if !self.chart.contains(u) {
                    return Err(Error::OutsideDomain { point: u.to_vec() });
                }
                closed_form_density(b, u)
            }
            _ => Ok(density_numeric_with(&self.chart, &self.basis, u, self.step)? / self.normalization),
        }
    }
}

/// Outcome of comparing two charts through a change of coordinates `φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartChange {
    pub point: Vec<f64>,
    pub mapped: Vec<f64>,
    pub k1: f64,
    pub k2: f64,
    pub jacobian: f64,
    /// `|s₁ k₁(u) − |J_φ(u)| s₂ k₂(φ(u))|`, `sᵢ` the sheet count of each chart.
    pub residual: f64,
    /// `max |p₁(u) − p₂(φ(u))|` on group elements; diagnostic only.
    pub element_mismatch: f64,
}

/// Checks `k₁(u) = J_φ(u) k₂(φ(u))`, with `J_φ` by central differences.
pub fn chart_change_check(
    d1: &HaarDensity,
    d2: &HaarDensity,
    phi: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    u: &[f64],
    step: f64,
) -> Result<ChartChange> {
    let (c1, c2) = (d1.chart(), d2.chart());
    let mapped = phi(u)?;
    if mapped.len() != c2.param_count() || !c2.contains(&mapped) {
        return Err(Error::OutsideDomain { point: mapped });
    }
    let d = u.len();
    let mut jac = DMatrix::<f64>::zeros(mapped.len(), d);
    let mut shifted = u.to_vec();
    for j in 0..d {
        let (hi, lo) = (u[j] + step, u[j] - step);
        shifted[j] = hi;
        let plus = phi(&shifted)?;
        shifted[j] = lo;
        let minus = phi(&shifted)?;
        shifted[j] = u[j];
        if plus.len() != mapped.len() || minus.len() != mapped.len() {
            return Err(Error::DimensionMismatch {
                expected: mapped.len(),
                found: plus.len().min(minus.len()),
            });
        }
        for i in 0..mapped.len() {
            jac[(i, j)] = (plus[i] - minus[i]) / (hi - lo);
        }
    }
    if jac.nrows() != jac.ncols() {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: mapped.len(),
        });
    }
    let jacobian = jac.determinant();
    let k1 = d1.value(u)?;
    let k2 = d2.value(&mapped)?;
    let s1 = c1.sheets() as f64;
    let s2 = c2.sheets() as f64;
    let residual = (s1 * k1 - jacobian.abs() * s2 * k2).abs();
    let element_mismatch = match (c1.element(u), c2.element(&mapped)) {
        (Ok(a), Ok(b)) if a.dim() == b.dim() => (a.matrix() - b.matrix()).amax(),
        _ => f64::NAN,
    };
    Ok(ChartChange {
        point: u.to_vec(),
        mapped,
        k1,
        k2,
        jacobian,
        residual,
        element_mismatch,
    })
}

/// Finds `w` with `p(w)` equal to `target` as group elements: coarse grid
/// search followed by damped Gauss–Newton on `vec(p(w) − target)`.
pub fn match_chart_point(chart: &Chart, target: &GroupElement) -> Result<Vec<f64>> {
    const GRID: usize = 9;
    const H: f64 = 1e-7;
    let domain = chart.domain().to_vec();
    let d = domain.len();
    let residual = |w: &[f64]| -> Result<Vec<f64>> {
        let g = chart.element(w)?;
        if g.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                found: g.dim(),
            });
        }
        Ok((g.matrix() - target.matrix()).iter().copied().collect())
    };
    let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..GRID.pow(d as u32) {
        let mut idx = k;
        let w: Vec<f64> = domain
            .iter()
            .map(|&(a, b)| {
                let i = idx % GRID;
                idx /= GRID;
                a + (b - a) * (i as f64 + 0.5) / GRID as f64
            })
            .collect();
        let r = norm(&residual(&w)?);
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, w));
        }
    }
    let (mut err, mut w) = best.ok_or(Error::NoConvergence(0))?;

    for _ in 0..100 {
        if err < 1e-14 {
            return Ok(w);
        }
        let r = residual(&w)?;
        let mut jac = DMatrix::<f64>::zeros(r.len(), d);
        for j in 0..d {
            let (a, b) = domain[j];
            let (lo, hi) = ((w[j] - H).max(a), (w[j] + H).min(b));
            let mut wp = w.clone();
            wp[j] = hi;
            let rp = residual(&wp)?;
            wp[j] = lo;
            let rm = residual(&wp)?;
            for i in 0..r.len() {
                jac[(i, j)] = (rp[i] - rm[i]) / (hi - lo);
            }
        }
        let rv = nalgebra::DVector::from_vec(r);
        let jt = jac.transpose();
        let mut lambda = 1e-12;
        let mut improved = false;
        for _ in 0..30 {
            let normal = &jt * &jac + DMatrix::<f64>::identity(d, d) * lambda;
            let Some(delta) = normal.lu().solve(&(&jt * &rv)) else {
                lambda *= 10.0;
                continue;
            };
            let cand: Vec<f64> = w
                .iter()
                .zip(delta.iter())
                .zip(&domain)
                .map(|((x, dx), &(a, b))| (x - dx).clamp(a, b))
                .collect();
            let e = norm(&residual(&cand)?);
            if e < err {
                w = cand;
                err = e;
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if err < 1e-11 {
        Ok(w)
    } else {
        Err(Error::NoConvergence(100))
    }
}

/// Haar measure discretized on a product rule: weights `w·k(u)` and the
/// group elements `p(u)` of the rotation component.
#[derive(Clone, Debug)]
pub struct GroupQuadrature {
    group: GroupTag,
    weights: Vec<f64>,
    elements: Vec<GroupElement>,
    nodes_per_axis: Vec<usize>,
}

impl GroupQuadrature {
    pub fn new(group: GroupTag, density: &HaarDensity, rule: &QuadratureRule) -> Result<Self> {
        let chart = density.chart();
        let expected_dim = group.dim();
        let compatible = chart.element_dim() == expected_dim
            && match chart.group() {
                ChartGroup::So2 | ChartGroup::O2 => expected_dim == 2,
                ChartGroup::So3 | ChartGroup::O3 | ChartGroup::Su2 => expected_dim == 3,
                ChartGroup::None => true,
            };
        if !compatible {
            return Err(Error::IncompatibleChart {
                chart: chart.label(),
                group: group.to_string(),
            });
        }
        let nodes: Vec<(f64, GroupElement)> = (0..rule.len())
            .into_par_iter()
            .map(|k| {
                let (u, w) = rule.point(k);
                Ok((w * density.value(&u)?, chart.element(&u)?))
            })
            .collect::<Result<_>>()?;
        if !group.is_full_orthogonal() && nodes.iter().any(|(_, g)| !g.is_proper()) {
            return Err(Error::IncompatibleChart {
                chart: chart.label(),
                group: format!("{group} (chart reaches det = -1)"),
            });
        }
        let (weights, elements) = nodes.into_iter().unzip();
        Ok(Self {
            group,
            weights,
            elements,
            nodes_per_axis: rule.nodes_per_axis(),
        })
    }

    /// Numeric Maurer–Cartan density of a built-in chart, `nodes` per axis.
    pub fn builtin(group: GroupTag, chart: BuiltinChart, nodes: usize) -> Result<Self> {
        let density = HaarDensity::numeric(Chart::builtin(chart), nodes)?;
        let rule = QuadratureRule::uniform(nodes, density.chart().domain());
        Self::new(group, &density, &rule)
    }

    pub fn group(&self) -> GroupTag {
        self.group
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes_per_axis
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// `∫ f dμ`; for O-groups `½[∫ f(g) + ∫ f(σg)]` over the rotation part.
    pub fn integrate_scalar<F>(&self, f: F) -> f64
    where
        F: Fn(&GroupElement) -> f64 + Sync,
    {
        let sigma = self
            .group
            .is_full_orthogonal()
            .then(|| self.group.coset_representative());
        let terms: Vec<f64> = self
            .weights
            .par_iter()
            .zip(self.elements.par_iter())
            .map(|(w, g)| match &sigma {
                None => w * f(g),
                Some(s) => 0.5 * w * (f(g) + f(&(s * g))),
            })
            .collect();
        sum_compensated(terms)
    }

    /// Entry-wise `∫ F dμ`.
    pub fn integrate_tensor<F>(&self, f: F) -> Result<Tensor>
    where
        F: Fn(&GroupElement) -> Result<Tensor> + Sync,
    {
        let sigma = self
            .group
            .is_full_orthogonal()
            .then(|| self.group.coset_representative());
        let partials: Vec<Tensor> = self
            .weights
            .par_chunks(CHUNK)
            .zip(self.elements.par_chunks(CHUNK))
            .map(|(ws, gs)| {
                let mut acc: Option<Tensor> = None;
                for (w, g) in ws.iter().zip(gs) {
                    let mut add = |t: Tensor, s: f64| -> Result<()> {
                        match acc.as_mut() {
                            Some(a) => a.add_scaled(s, &t),
                            None => {
                                acc = Some(t.scaled(s));
                                Ok(())
                            }
                        }
                    };
                    match &sigma {
                        None => add(f(g)?, *w)?,
                        Some(s) => {
                            add(f(g)?, 0.5 * w)?;
                            add(f(&(s * g))?, 0.5 * w)?;
                        }
                    }
                }
                acc.ok_or(Error::Invalid("empty quadrature chunk".into()))
            })
            .collect::<Result<_>>()?;
        let mut iter = partials.into_iter();
        let mut total = iter.next().ok_or(Error::Invalid("empty quadrature".into()))?;
        for t in iter {
            total.add_scaled(1.0, &t)?;
        }
        Ok(total)
    }
}

/// `∫ f dμ_G` in one call.
pub fn integrate_scalar<F>(f: F, group: GroupTag, density: &HaarDensity, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&GroupElement) -> f64 + Sync,
{
    Ok(GroupQuadrature::new(group, density, rule)?.integrate_scalar(f))
}

/// `∫ F dμ_G` entry-wise in one call.
pub fn integrate_tensor<F>(f: F, group: GroupTag, density: &HaarDensity, rule: &QuadratureRule) -> Result<Tensor>
where
    F: Fn(&GroupElement) -> Result<Tensor> + Sync,
{
    GroupQuadrature::new(group, density, rule)?.integrate_tensor(f)
}

/// Worst deviation of `∫ f(hg)`, `∫ f(gh)` and `∫ f(g⁻¹)` from `∫ f(g)` over
/// every monomial of degree at most 2 in the matrix entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceReport {
    pub left: f64,
    pub right: f64,
    pub inversion: f64,
}

impl InvarianceReport {
    pub fn max(&self) -> f64 {
        self.left.max(self.right).max(self.inversion)
    }
}

/// `(∫ g, ∫ g⊗g)` after transforming the integration variable.
fn entry_moments<T>(q: &GroupQuadrature, transform: T) -> Result<(Tensor, Tensor)>
where
    T: Fn(&GroupElement) -> GroupElement + Sync,
{
    let first = q.integrate_tensor(|g| Tensor::from_matrix(transform(g).matrix()))?;
    let second = q.integrate_tensor(|g| {
        let t = Tensor::from_matrix(transform(g).matrix())?;
        t.outer(&t)
    })?;
    Ok((first, second))
}

pub fn invariance_residuals(q: &GroupQuadrature, shifts: &[GroupElement]) -> Result<InvarianceReport> {
    let (m1, m2) = entry_moments(q, |g| g.clone())?;
    let deviation = |(a, b): (Tensor, Tensor)| -> Result<f64> {
        Ok(a.max_abs_diff(&m1)?.max(b.max_abs_diff(&m2)?))
    };
    let mut report = InvarianceReport {
        left: 0.0,
        right: 0.0,
        inversion: deviation(entry_moments(q, GroupElement::inverse)?)?,
    };
    for h in shifts {
        if h.dim() != q.group().dim() {
            return Err(Error::DimensionMismatch {
                expected: q.group().dim(),
                found: h.dim(),
            });
        }
        report.left = report.left.max(deviation(entry_moments(q, |g| h * g)?)?);
        report.right = report.right.max(deviation(entry_moments(q, |g| g * h)?)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::AxisRule;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn so2_density_is_constant() {
        let chart = Chart::builtin(BuiltinChart::So2Angle);
        for a in [0.1, 1.0, 3.0, 6.0] {
            assert!((density_numeric(&chart, &[a]).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn so2_normalization_is_two_pi() {
        let d = HaarDensity::numeric(Chart::builtin(BuiltinChart::So2Angle), 64).unwrap();
        assert!((d.normalization() - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn euler_density_is_sin_beta() {
        let chart = Chart::builtin(BuiltinChart::So3Euler);
        for u in [[0.2, 0.7, -1.0], [-2.5, 2.9, 3.0], [1.0, FRAC_PI_2, 0.0]] {
            let k = density_numeric(&chart, &u).unwrap();
            assert!((k - u[1].sin()).abs() < 1e-9, "{u:?}: {k}");
        }
    }

    #[test]
    fn polar_density_follows_half_angle_sine() {
        // 4 sin²(α/2) cos ψ before normalization; C = 8π² in this basis
        let chart = Chart::builtin(BuiltinChart::So3Polar);
        let u = [1.0, 0.0, PI - 1e-4];
        let k = density_numeric(&chart, &u).unwrap();
        assert!((k - 4.0 * (u[2] / 2.0).sin().powi(2)).abs() < 1e-8);
        let u = [2.0, 0.5, 0.3];
        let k = density_numeric(&chart, &u).unwrap();
        assert!((k - 4.0 * (0.15f64).sin().powi(2) * 0.5f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn closed_form_examples() {
        let k = closed_form_density_tag("so3-euler", &[0.0, FRAC_PI_2, 0.0]).unwrap();
        assert!((k - 0.012_665_147_955_292_22).abs() < 1e-15);
        assert_eq!(closed_form_density_tag("so3-euler", &[1.0, 0.0, 2.0]).unwrap(), 0.0);
        let k = closed_form_density_tag("so3-quat", &[FRAC_PI_2, FRAC_PI_2, 0.3]).unwrap();
        assert!((k - 0.050_660_591_821_168_89).abs() < 1e-15);
        assert!(matches!(
            closed_form_density_tag("so4-euler", &[0.0]),
            Err(Error::UnknownTag(_))
        ));
    }

    #[test]
    fn degenerate_chart_is_rejected() {
        let chart = Chart::parse("matrix: [[1,0],[0,1]]; params: t in [0,1]").unwrap();
        let basis = algebra_basis(&chart).unwrap();
        let rule = QuadratureRule::uniform(8, chart.domain());
        assert!(matches!(
            HaarDensity::normalize(chart, basis, &rule),
            Err(Error::DegenerateChart(_))
        ));
    }

    #[test]
    fn trace_integrates_to_zero_on_so3() {
        // 1D oracle: ∫₀^π (1 + 2cos α)(2/π) sin²(α/2) dα
        let oracle = AxisRule::new(64, 0.0, PI)
            .integrate(|a| (1.0 + 2.0 * a.cos()) * (2.0 / PI) * (a / 2.0).sin().powi(2));
        assert!(oracle.abs() < 1e-14);
        let q = GroupQuadrature::builtin(GroupTag::So3, BuiltinChart::So3Euler, 16).unwrap();
        assert!((q.integrate_scalar(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!(q.integrate_scalar(GroupElement::trace).abs() < 1e-8);
        let q = GroupQuadrature::builtin(GroupTag::O3, BuiltinChart::So3Euler, 16).unwrap();
        assert!(q.integrate_scalar(GroupElement::trace).abs() < 1e-8);
    }

    #[test]
    fn first_moment_of_rotation_vanishes() {
        let q = GroupQuadrature::builtin(GroupTag::So3, BuiltinChart::So3Polar, 24).unwrap();
        let m = q
            .integrate_tensor(|g| Tensor::from_matrix(g.matrix()))
            .unwrap();
        assert!(m.norm_inf() < 1e-8);
        let id = q.integrate_tensor(|_| Ok(Tensor::identity(3))).unwrap();
        assert!(id.max_abs_diff(&Tensor::identity(3)).unwrap() < 1e-12);
        let ggt = q
            .integrate_tensor(|g| Tensor::from_matrix(&(g.matrix() * g.matrix().transpose())))
            .unwrap();
        assert!(ggt.max_abs_diff(&Tensor::identity(3)).unwrap() < 1e-12);
    }

    #[test]
    fn shifted_so2_chart_change() {
        let d1 = HaarDensity::numeric(Chart::builtin(BuiltinChart::So2Angle), 64).unwrap();
        let d2 = HaarDensity::numeric(Chart::builtin(BuiltinChart::So2Shifted), 64).unwrap();
        let shift = |u: &[f64]| Ok(vec![u[0] - PI]);
        for a in [0.3, 2.0, 5.5] {
            let r = chart_change_check(&d1, &d2, &shift, &[a], 1e-5).unwrap();
            assert!(r.residual < 1e-9);
            assert!((r.jacobian - 1.0).abs() < 1e-9);
        }
        let identity = |u: &[f64]| Ok(u.to_vec());
        let r = chart_change_check(&d1, &d1, &identity, &[1.0], 1e-5).unwrap();
        assert!(r.residual < 1e-12);
        assert!(r.element_mismatch < 1e-15);
    }

    #[test]
    fn chart_change_rejects_points_outside_target() {
        let d1 = HaarDensity::closed_form(BuiltinChart::So2Angle);
        let d2 = HaarDensity::closed_form(BuiltinChart::So2Shifted);
        let bad = |u: &[f64]| Ok(vec![u[0] + 10.0]);
        assert!(matches!(
            chart_change_check(&d1, &d2, &bad, &[1.0], 1e-5),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn incompatible_chart_for_group() {
        let d = HaarDensity::closed_form(BuiltinChart::So2Angle);
        let rule = QuadratureRule::uniform(8, d.chart().domain());
        assert!(GroupQuadrature::new(GroupTag::So3, &d, &rule).is_err());
    }

    #[test]
    fn invariance_on_so3_and_o3() {
        let shifts: Vec<GroupElement> = [([0.6, 0.0, 0.8], 1.1), ([0.0, 1.0, 0.0], -2.3)]
            .iter()
            .map(|&(n, a)| crate::group::rodrigues(n, a).unwrap())
            .collect();
        for group in [GroupTag::So3, GroupTag::O3] {
            let q = GroupQuadrature::builtin(group, BuiltinChart::So3Euler, 12).unwrap();
            let r = invariance_residuals(&q, &shifts).unwrap();
            assert!(r.max() < 1e-10, "{group}: {r:?}");
        }
    }
}
