use std::f64::consts::PI;

use haar::dsl::{BinOp, Expr, Func};
use haar::engine::invariance_residuals;
use haar::group::{hat, quat_to_rotation, rodrigues, vee};
use haar::orbit::{decompose, j1, j2, moment, OrbitSpec, Representation};
use haar::reynolds::reynolds;
use haar::sampling::{sample, Sampler, SamplerConfig};
use haar::tensor::act;
use haar::{BuiltinChart, Chart, GroupElement, GroupQuadrature, GroupTag, Quaternion, Tensor};
use nalgebra::Matrix3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn unit_axis() -> impl Strategy<Value = [f64; 3]> {
    (0.0..2.0 * PI, -1.0f64..1.0).prop_map(|(phi, z)| {
        let r = (1.0 - z * z).sqrt();
        [r * phi.cos(), r * phi.sin(), z]
    })
}

fn random_unit_quaternion(rng: &mut ChaCha20Rng) -> Quaternion {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n < 1.0 {
            return Quaternion::from_array(v.map(|x| x / n));
        }
    }
}

proptest! {
    #[test]
    fn rodrigues_is_proper(n in unit_axis(), alpha in -10.0f64..10.0) {
        let r = rodrigues(n, alpha).unwrap();
        prop_assert!((r.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hat_and_vee_are_inverse(x in prop::array::uniform3(-1e6f64..1e6)) {
        prop_assert_eq!(vee(&hat(x)), x);
        let m = hat(x);
        let antisymmetric = Matrix3::from_fn(|i, j| if i == j { 0.0 } else { m[(i, j)] });
        prop_assert_eq!(hat(vee(&antisymmetric)), antisymmetric);
    }

    #[test]
    fn rodrigues_agrees_with_conjugate_quaternion(n in unit_axis(), alpha in -PI..PI) {
        let (s, c) = (alpha / 2.0).sin_cos();
        let q = Quaternion::from_array([c, s * n[0], s * n[1], s * n[2]]);
        let a = rodrigues(n, alpha).unwrap();
        let b = quat_to_rotation(q.conjugate()).unwrap();
        prop_assert!((a.matrix() - b.matrix()).amax() < 1e-12);
    }
}

#[test]
fn quaternion_action_matches_sandwich_product() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let q = random_unit_quaternion(&mut rng);
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let by_matrix = quat_to_rotation(q).unwrap().apply(&v);
        let by_product = (q * Quaternion::pure(v) * q.conjugate()).imag();
        for (a, b) in by_matrix.iter().zip(by_product) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

/// Value and derivative along `index`, by forward-mode dual numbers.
fn dual(e: &Expr, u: &[f64], index: usize) -> (f64, f64) {
    match e {
        Expr::Num(x) => (*x, 0.0),
        Expr::Pi => (PI, 0.0),
        Expr::Var { index: i, .. } => (u[*i], if *i == index { 1.0 } else { 0.0 }),
        Expr::Neg(a) => {
            let (v, d) = dual(a, u, index);
            (-v, -d)
        }
        Expr::Binary { op, lhs, rhs } => {
            let (a, da) = dual(lhs, u, index);
            let (b, db) = dual(rhs, u, index);
            match op {
                BinOp::Add => (a + b, da + db),
                BinOp::Sub => (a - b, da - db),
                BinOp::Mul => (a * b, da * b + a * db),
                BinOp::Div => (a / b, (da * b - a * db) / (b * b)),
            }
        }
        Expr::Pow { base, exp } => {
            let (a, da) = dual(base, u, index);
            let n = *exp;
            (a.powi(n), if n == 0 { 0.0 } else { n as f64 * a.powi(n - 1) * da })
        }
        Expr::Call { func, arg } => {
            let (a, da) = dual(arg, u, index);
            match func {
                Func::Sin => (a.sin(), a.cos() * da),
                Func::Cos => (a.cos(), -a.sin() * da),
                Func::Tan => (a.tan(), da / a.cos().powi(2)),
                Func::Sqrt => (a.sqrt(), da / (2.0 * a.sqrt())),
                Func::Arccos => (a.acos(), -da / (1.0 - a * a).sqrt()),
                Func::Arcsin => (a.asin(), da / (1.0 - a * a).sqrt()),
            }
        }
    }
}

#[test]
fn jacobian_map_matches_analytic_derivatives() {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    for which in BuiltinChart::ALL {
        let chart = Chart::builtin(which);
        let domain = chart.domain().to_vec();
        for _ in 0..1000 {
            let u: Vec<f64> = domain.iter().map(|&(a, b)| rng.gen_range(a + 1e-3..b - 1e-3)).collect();
            let numeric = chart.jacobian_map(&u, 1e-5).unwrap();
            for (j, m) in numeric.iter().enumerate() {
                for (r, row) in chart.ast().matrix.iter().enumerate() {
                    for (c, e) in row.iter().enumerate() {
                        let exact = dual(e, &u, j).1;
                        let got = m[(r, c)];
                        assert!((got - exact).abs() < 1e-6, "{} at {u:?}, d/du{j} [{r},{c}]: {got} vs {exact}", which.tag());
                    }
                }
            }
        }
    }
}

/// `(∫ g, ∫ g⊗g)` for one quadrature.
fn entry_moments(q: &GroupQuadrature) -> (Tensor, Tensor) {
    let first = q.integrate_tensor(|g| Tensor::from_matrix(g.matrix())).unwrap();
    let second = q
        .integrate_tensor(|g| {
            let t = Tensor::from_matrix(g.matrix())?;
            t.outer(&t)
        })
        .unwrap();
    (first, second)
}

#[test]
fn integrals_do_not_depend_on_the_chart() {
    for group in [GroupTag::So3, GroupTag::O3] {
        let reference = entry_moments(&GroupQuadrature::builtin(group, BuiltinChart::So3Euler, 32).unwrap());
        for which in [BuiltinChart::So3Polar, BuiltinChart::So3Quat] {
            let other = entry_moments(&GroupQuadrature::builtin(group, which, 32).unwrap());
            assert!(other.0.max_abs_diff(&reference.0).unwrap() < 1e-6, "{group} {}", which.tag());
            assert!(other.1.max_abs_diff(&reference.1).unwrap() < 1e-6, "{group} {}", which.tag());
        }
    }
}

#[test]
fn invariance_holds_for_ten_shifts() {
    let q = GroupQuadrature::builtin(GroupTag::So3, BuiltinChart::So3Euler, 32).unwrap();
    let shifts = sample(&SamplerConfig::new(GroupTag::So3, BuiltinChart::So3Euler, 10, 10).unwrap()).unwrap();
    let report = invariance_residuals(&q, &shifts).unwrap();
    assert!(report.max() < 1e-7, "{report:?}");
}

/// Entries and pairwise entry products of a 3×3 matrix.
fn monomials(g: &GroupElement) -> Vec<f64> {
    let m = g.matrix();
    let mut out: Vec<f64> = m.iter().copied().collect();
    for a in 0..9 {
        for b in a..9 {
            out.push(m[a] * m[b]);
        }
    }
    out
}

/// Per-statistic means and squared standard errors.
fn mean_and_var(draws: impl Iterator<Item = Vec<f64>>) -> (Vec<f64>, Vec<f64>) {
    let mut n = 0.0;
    let mut sum: Vec<f64> = Vec::new();
    let mut sumsq: Vec<f64> = Vec::new();
    for x in draws {
        if sum.is_empty() {
            sum = vec![0.0; x.len()];
            sumsq = vec![0.0; x.len()];
        }
        for (k, v) in x.iter().enumerate() {
            sum[k] += v;
            sumsq[k] += v * v;
        }
        n += 1.0;
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let var = sumsq
        .iter()
        .zip(&mean)
        .map(|(s, m)| (s / n - m * m) * n / (n - 1.0) / n)
        .collect();
    (mean, var)
}

fn max_two_sample_z(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> f64 {
    (0..a.0.len())
        .map(|k| {
            let se = (a.1[k] + b.1[k]).sqrt();
            if se > 0.0 {
                (a.0[k] - b.0[k]).abs() / se
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

fn draws(chart: BuiltinChart, seed: u64) -> impl Iterator<Item = GroupElement> {
    let mut s = Sampler::new(SamplerConfig::new(GroupTag::So3, chart, seed, 100_000).unwrap()).unwrap();
    (0..100_000).map(move |_| s.next_element().unwrap())
}

#[test]
fn sampled_distribution_is_left_invariant() {
    let h = quat_to_rotation(random_unit_quaternion(&mut ChaCha20Rng::seed_from_u64(31))).unwrap();
    let plain = mean_and_var(draws(BuiltinChart::So3Quat, 1).map(|g| monomials(&g)));
    let shifted = mean_and_var(draws(BuiltinChart::So3Quat, 2).map(|g| monomials(&(&h * &g))));
    let z = max_two_sample_z(&plain, &shifted);
    assert!(z < 5.0, "max z {z}");
}

#[test]
fn euler_and_quaternion_samplers_agree() {
    let stats = |g: GroupElement| {
        let mut v: Vec<f64> = g.matrix().iter().copied().collect();
        let tr = g.trace();
        v.extend([tr, tr * tr]);
        v
    };
    let euler = mean_and_var(draws(BuiltinChart::So3Euler, 3).map(stats));
    let quat = mean_and_var(draws(BuiltinChart::So3Quat, 4).map(stats));
    let z = max_two_sample_z(&euler, &quat);
    assert!(z < 5.0, "max z {z}");
}

#[test]
fn projection_is_fixed_by_twenty_rotations() {
    let q = GroupQuadrature::builtin(GroupTag::So3, BuiltinChart::So3Euler, 32).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(41);
    let t = Tensor::new(3, 3, (0..27).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let p = reynolds(&q, &t).unwrap();
    for _ in 0..20 {
        let g = quat_to_rotation(random_unit_quaternion(&mut rng)).unwrap();
        assert!(act(&g, &p).unwrap().max_abs_diff(&p).unwrap() < 1e-7);
    }
}

fn sym2_spec() -> OrbitSpec {
    let v0 = Tensor::new(3, 2, vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]).unwrap();
    OrbitSpec::new(GroupTag::So3, Representation::Sym2, v0).unwrap()
}

#[test]
fn orbit_moments_are_invariant() {
    let q = GroupQuadrature::builtin(GroupTag::So3, BuiltinChart::So3Euler, 32).unwrap();
    let spec = sym2_spec();
    let moments = [moment(&spec, 1, &q).unwrap(), moment(&spec, 2, &q).unwrap()];
    let mut rng = ChaCha20Rng::seed_from_u64(51);
    for _ in 0..20 {
        let g = quat_to_rotation(random_unit_quaternion(&mut rng)).unwrap();
        for m in &moments {
            assert!(act(&g, m).unwrap().max_abs_diff(m).unwrap() < 1e-7);
        }
    }
}

#[test]
fn sym2_second_moment_lies_in_span_of_j1_and_j2() {
    let q = GroupQuadrature::builtin(GroupTag::So3, BuiltinChart::So3Euler, 32).unwrap();
    let m2 = moment(&sym2_spec(), 2, &q).unwrap();
    let (_, residual) = decompose(&m2, &[j1(3), j2(3)]).unwrap();
    assert!(residual < 1e-7, "residual {residual:e}");
}
