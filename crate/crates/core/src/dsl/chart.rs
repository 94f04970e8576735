use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ast::{ChartAst, ChartGroup};
use super::parser::parse_chart;
use crate::error::{Error, Result};
use crate::group::{orthogonality_residual, GroupElement, Matrix, Quaternion, INPUT_TOL};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

const LOAD_CHECK_POINTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinChart {
    So2Angle,
    So2Shifted,
    So3Polar,
    So3Euler,
    So3Quat,
}

impl BuiltinChart {
    pub const ALL: [BuiltinChart; 5] = [
        BuiltinChart::So2Angle,
        BuiltinChart::So2Shifted,
        BuiltinChart::So3Polar,
        BuiltinChart::So3Euler,
        BuiltinChart::So3Quat,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            BuiltinChart::So2Angle => "so2-angle",
            BuiltinChart::So2Shifted => "so2-shifted",
            BuiltinChart::So3Polar => "so3-polar",
            BuiltinChart::So3Euler => "so3-euler",
            BuiltinChart::So3Quat => "so3-quat",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            BuiltinChart::So2Angle => include_str!("../../charts/so2-angle.chart"),
            BuiltinChart::So2Shifted => include_str!("../../charts/so2-shifted.chart"),
            BuiltinChart::So3Polar => include_str!("../../charts/so3-polar.chart"),
            BuiltinChart::So3Euler => include_str!("../../charts/so3-euler.chart"),
            BuiltinChart::So3Quat => include_str!("../../charts/so3-quat.chart"),
        }
    }

    pub fn is_so3(self) -> bool {
        matches!(
            self,
            BuiltinChart::So3Polar | BuiltinChart::So3Euler | BuiltinChart::So3Quat
        )
    }
}

impl fmt::Display for BuiltinChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BuiltinChart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.strip_prefix("builtin:").unwrap_or(s);
        Ok(match s {
            "so2-angle" | "angle" => BuiltinChart::So2Angle,
            "so2-shifted" | "shifted" => BuiltinChart::So2Shifted,
            "so3-polar" | "polar" => BuiltinChart::So3Polar,
            "so3-euler" | "euler" => BuiltinChart::So3Euler,
            "so3-quat" | "quat" | "quaternion" => BuiltinChart::So3Quat,
            _ => return Err(Error::UnknownTag(s.to_string())),
        })
    }
}

/// A parametrisation `p: U → M_D(ℝ)` over a closed box `U`.
#[derive(Clone, Debug)]
pub struct Chart {
    ast: ChartAst,
    domain: Vec<(f64, f64)>,
    builtin: Option<BuiltinChart>,
}

impl Chart {
    /// Builds a chart and, for charts tagged with a group, checks that the
    /// matrix is orthogonal at 100 pseudo-random points of the domain.
    pub fn from_ast(ast: ChartAst) -> Result<Self> {
        let chart = Self {
            domain: ast.bounds(),
            ast,
            builtin: None,
        };
        chart.check_group()?;
        Ok(chart)
    }

    pub fn parse(source: &str) -> Result<Self> {
        Self::from_ast(parse_chart(source)?)
    }

    pub fn builtin(which: BuiltinChart) -> Self {
        let mut chart = Self::parse(which.source()).expect("built-in chart source is valid");
        chart.builtin = Some(which);
        chart
    }

    /// Resolves `builtin:<tag>` (or a bare built-in tag) or reads a chart file.
    pub fn load(spec: &str) -> Result<Self> {
        if let Ok(b) = spec.parse::<BuiltinChart>() {
            return Ok(Self::builtin(b));
        }
        if spec.starts_with("builtin:") {
            return Err(Error::UnknownTag(spec.to_string()));
        }
        Self::load_file(spec)
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&src)
    }

    fn check_group(&self) -> Result<()> {
        let Some(group) = self.ast.group.filter(|g| g.is_orthogonal()) else {
            return Ok(());
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c4a7);
        let mut first_sign = None;
        for _ in 0..LOAD_CHECK_POINTS {
            let u: Vec<f64> = self.domain.iter().map(|&(a, b)| rng.gen_range(a..=b)).collect();
            let m = self.evaluate(&u)?;
            let residual = orthogonality_residual(&m);
            if !(residual <= INPUT_TOL) {
                return Err(Error::NotOrthogonal { residual });
            }
            let det = m.determinant();
            let sign = det.signum();
            let proper = matches!(group, ChartGroup::So2 | ChartGroup::So3 | ChartGroup::Su2);
            if (proper && sign < 0.0) || *first_sign.get_or_insert(sign) != sign {
                return Err(Error::IncompatibleChart {
                    chart: self.ast.name.clone(),
                    group: format!("{group} (determinant {det} at {u:?})"),
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.ast.name
    }

    /// Built-in tag, or the declared chart name.
    pub fn label(&self) -> String {
        match self.builtin {
            Some(b) => format!("builtin:{b}"),
            None => self.ast.name.clone(),
        }
    }

    pub fn ast(&self) -> &ChartAst {
        &self.ast
    }

    pub fn builtin_tag(&self) -> Option<BuiltinChart> {
        self.builtin
    }

    pub fn group(&self) -> ChartGroup {
        self.ast.group.unwrap_or(ChartGroup::None)
    }

    pub fn param_count(&self) -> usize {
        self.domain.len()
    }

    pub fn param_names(&self) -> Vec<&str> {
        self.ast.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn matrix_dim(&self) -> usize {
        self.ast.matrix_dim()
    }

    /// Size of the group elements the chart produces (3 for quaternion charts).
    pub fn element_dim(&self) -> usize {
        match self.group() {
            ChartGroup::Su2 => 3,
            _ => self.matrix_dim(),
        }
    }

    /// Number of chart points over each group element: 2 for quaternion charts.
    pub fn sheets(&self) -> usize {
        match self.group() {
            ChartGroup::Su2 => 2,
            _ => 1,
        }
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.domain.len()
            && u.iter().zip(&self.domain).all(|(&x, &(a, b))| a <= x && x <= b)
    }

    fn eval_unchecked(&self, u: &[f64]) -> Matrix {
        let d = self.matrix_dim();
        Matrix::from_fn(d, d, |i, j| self.ast.matrix[i][j].eval(u))
    }

    /// `p(u)` for `u` in the closed domain.
    pub fn evaluate(&self, u: &[f64]) -> Result<Matrix> {
        if u.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                found: u.len(),
            });
        }
        if !self.contains(u) {
            return Err(Error::OutsideDomain { point: u.to_vec() });
        }
        Ok(self.eval_unchecked(u))
    }

    /// The group element at `u`; quaternion charts are pushed to SO(3) by `v ↦ q v q̄`.
    pub fn element(&self, u: &[f64]) -> Result<GroupElement> {
        let m = self.evaluate(u)?;
        match self.group() {
            ChartGroup::Su2 => Ok(GroupElement::from_matrix3(
                &quaternion_of(&m).rotation_matrix(),
            )),
            ChartGroup::None => GroupElement::new(m, INPUT_TOL),
            _ => Ok(GroupElement::from_trusted(m)),
        }
    }

    /// Partial derivatives `∂p/∂u^j`, one matrix per parameter: central
    /// differences at `step` and `step/2` combined by Richardson extrapolation.
    pub fn jacobian_map(&self, u: &[f64], step: f64) -> Result<Vec<Matrix>> {
        self.evaluate(u)?;
        let interior = u
            .iter()
            .zip(&self.domain)
            .all(|(&x, &(a, b))| x - step >= a && x + step <= b);
        if !interior {
            return Err(Error::StencilOutOfDomain {
                point: u.to_vec(),
                step,
            });
        }
        let mut shifted = u.to_vec();
        Ok((0..u.len())
            .map(|j| {
                let mut central = |h: f64| {
                    let (hi, lo) = (u[j] + h, u[j] - h);
                    shifted[j] = hi;
                    let plus = self.eval_unchecked(&shifted);
                    shifted[j] = lo;
                    let minus = self.eval_unchecked(&shifted);
                    shifted[j] = u[j];
                    (plus - minus) / (hi - lo)
                };
                let coarse = central(step);
                let fine = central(step / 2.0);
                (fine * 4.0 - coarse) / 3.0
            })
            .collect())
    }
}

/// First column of a left-multiplication matrix, i.e. `L(q)·1 = q`.
pub(crate) fn quaternion_of(m: &Matrix) -> Quaternion {
    Quaternion::new(m[(0, 0)], m[(1, 0)], m[(2, 0)], m[(3, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::hat;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn builtins_load_and_match_tags() {
        for b in BuiltinChart::ALL {
            let c = Chart::builtin(b);
            assert_eq!(c.builtin_tag(), Some(b));
            assert_eq!(Chart::load(&format!("builtin:{b}")).unwrap().builtin_tag(), Some(b));
        }
        assert!(Chart::load("builtin:so4").is_err());
    }

    #[test]
    fn euler_examples() {
        let c = Chart::builtin(BuiltinChart::So3Euler);
        let m = c.evaluate(&[0.0, 0.0, 0.0]).unwrap();
        assert!((m - Matrix::identity(3, 3)).amax() < 1e-15);

        let (a, b, g) = (0.3f64, 1.1f64, -2.0f64);
        let (sa, cb, sb, cg) = (a.sin(), b.cos(), b.sin(), g.cos());
        // Rz(a) Rx(b) Rz(g)
        let rz = |t: f64| nalgebra::Matrix3::new(t.cos(), -t.sin(), 0.0, t.sin(), t.cos(), 0.0, 0.0, 0.0, 1.0);
        let rx = nalgebra::Matrix3::new(1.0, 0.0, 0.0, 0.0, cb, -sb, 0.0, sb, cb);
        let product = rz(a) * rx * rz(g);
        let m = c.evaluate(&[a, b, g]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[(i, j)] - product[(i, j)]).abs() < 1e-15);
            }
        }
        assert!((m[(0, 2)] - sa * sb).abs() < 1e-15);
        assert!((m[(2, 1)] - cg * sb).abs() < 1e-15);
    }

    #[test]
    fn quaternion_chart_at_zero_theta_is_one() {
        let c = Chart::builtin(BuiltinChart::So3Quat);
        let m = c.evaluate(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(quaternion_of(&m), Quaternion::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(c.element(&[0.0, 1.0, 2.0]).unwrap(), GroupElement::identity(3));
    }

    #[test]
    fn polar_chart_is_rodrigues() {
        let c = Chart::builtin(BuiltinChart::So3Polar);
        let (phi, psi, alpha) = (1.2f64, -0.4f64, 2.5f64);
        let n = [psi.cos() * phi.cos(), psi.cos() * phi.sin(), psi.sin()];
        let r = crate::group::rodrigues(n, alpha).unwrap();
        let m = c.evaluate(&[phi, psi, alpha]).unwrap();
        assert!((m - r.matrix()).amax() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        let c = Chart::builtin(BuiltinChart::So2Angle);
        assert!(matches!(c.evaluate(&[-0.1]), Err(Error::OutsideDomain { .. })));
        assert!(matches!(c.evaluate(&[0.1, 0.2]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            c.jacobian_map(&[1e-6], DEFAULT_STEP),
            Err(Error::StencilOutOfDomain { .. })
        ));
    }

    #[test]
    fn jacobian_examples() {
        let so2 = Chart::builtin(BuiltinChart::So2Shifted);
        let d = so2.jacobian_map(&[0.0], DEFAULT_STEP).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((&d[0] - expected).amax() < 1e-8);

        let constant = Chart::parse("matrix: [[1,0],[0,1]]; params: t in [0,1]").unwrap();
        let d = constant.jacobian_map(&[0.5], DEFAULT_STEP).unwrap();
        assert_eq!(d[0], Matrix::zeros(2, 2));

        // d/dgamma of Rz(alpha) Rx(beta) Rz(gamma) at 0 is the generator of Rz
        let euler = Chart::builtin(BuiltinChart::So3Euler);
        assert!(euler.jacobian_map(&[0.0, FRAC_PI_2, 0.0], DEFAULT_STEP).is_ok());
        assert!(euler.jacobian_map(&[0.0, 0.0, 0.0], DEFAULT_STEP).is_err());
        let euler_open = Chart::parse(&BuiltinChart::So3Euler.source().replace("beta in [0, pi]", "beta in [-pi, pi]")).unwrap();
        let d = euler_open.jacobian_map(&[0.0, 0.0, 0.0], DEFAULT_STEP).unwrap();
        let gen = -hat([0.0, 0.0, 1.0]);
        for i in 0..3 {
            for j in 0..3 {
                assert!((d[2][(i, j)] - gen[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn load_check_rejects_non_orthogonal_group_chart() {
        let err = Chart::parse(
            "chart bad { params: a in [0, pi]; group: so(2); matrix: [[cos(a), sin(a)], [sin(a), cos(a)]]; }",
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal { .. }));
        let err = Chart::parse(
            "chart refl { params: a in [0, pi]; group: so(2); matrix: [[-cos(a), sin(a)], [sin(a), cos(a)]]; }",
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompatibleChart { .. }));
    }
}
