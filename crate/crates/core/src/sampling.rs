//! Haar-uniform sampling by inverse CDF on each coordinate of a built-in chart.
//!
//! Every chart coordinate draws from its own ChaCha20 stream (stream index =
//! axis), and the O-group coin uses the next stream, so changing one axis
//! never perturbs another.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::dsl::quaternion_of;
use crate::dsl::{BuiltinChart, Chart};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupTag, Quaternion};

/// Maximum Newton/bisection iterations in [`invert_cdf`].
pub const MAX_ITERATIONS: usize = 64;

const CDF_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub group: GroupTag,
    pub chart: BuiltinChart,
    pub seed: u64,
    pub count: usize,
}

impl SamplerConfig {
    pub fn new(group: GroupTag, chart: BuiltinChart, seed: u64, count: usize) -> Result<Self> {
        let config = Self {
            group,
            chart,
            seed,
            count,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chart.is_so3() != (self.group.dim() == 3) {
            return Err(Error::IncompatibleChart {
                chart: self.chart.tag().to_string(),
                group: self.group.to_string(),
            });
        }
        if self.count == 0 {
            return Err(Error::Invalid("sample count must be positive".into()));
        }
        Ok(())
    }
}

/// One sample: chart coordinates, the unit quaternion for the quaternion
/// chart, whether the coset coin fired, and the resulting group element.
#[derive(Clone, Debug, PartialEq)]
pub struct Draw {
    pub coordinates: Vec<f64>,
    pub quaternion: Option<Quaternion>,
    pub reflected: bool,
    pub element: GroupElement,
}

#[derive(Clone, Debug)]
pub struct Sampler {
    config: SamplerConfig,
    chart: Chart,
    axes: Vec<ChaCha20Rng>,
    coin: ChaCha20Rng,
}

impl Sampler {
    pub fn new(config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        let chart = Chart::builtin(config.chart);
        let stream = |k: usize| {
            let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            rng
        };
        let d = chart.param_count();
        Ok(Self {
            config,
            axes: (0..d).map(stream).collect(),
            coin: stream(d),
            chart,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Chart coordinates distributed according to the normalized Haar density.
    pub fn next_coordinates(&mut self) -> Result<Vec<f64>> {
        let mut u = [0.0; 3];
        for (x, rng) in u.iter_mut().zip(self.axes.iter_mut()) {
            *x = rng.gen::<f64>();
        }
        Ok(match self.config.chart {
            BuiltinChart::So2Angle => vec![2.0 * PI * u[0]],
            BuiltinChart::So2Shifted => vec![-PI + 2.0 * PI * u[0]],
            BuiltinChart::So3Euler => vec![
                -PI + 2.0 * PI * u[0],
                (1.0 - 2.0 * u[1]).clamp(-1.0, 1.0).acos(),
                -PI + 2.0 * PI * u[2],
            ],
            BuiltinChart::So3Polar => vec![
                2.0 * PI * u[0],
                (2.0 * u[1] - 1.0).clamp(-1.0, 1.0).asin(),
                invert_cdf_with_density(
                    |a| (a - a.sin()) / PI,
                    |a| (1.0 - a.cos()) / PI,
                    u[2],
                    (0.0, PI),
                )?,
            ],
            BuiltinChart::So3Quat => vec![
                invert_cdf_with_density(
                    |t| (2.0 * t - (2.0 * t).sin()) / (2.0 * PI),
                    |t| 2.0 * t.sin().powi(2) / PI,
                    u[0],
                    (0.0, PI),
                )?,
                (1.0 - 2.0 * u[1]).clamp(-1.0, 1.0).acos(),
                2.0 * PI * u[2],
            ],
        })
    }

    pub fn next_draw(&mut self) -> Result<Draw> {
        let coordinates = self.next_coordinates()?;
        let reflected = self.config.group.is_full_orthogonal() && self.coin.gen::<bool>();
        let mut element = self.chart.element(&coordinates)?;
        let quaternion = (self.config.chart == BuiltinChart::So3Quat)
            .then(|| self.chart.evaluate(&coordinates).map(|m| quaternion_of(&m)))
            .transpose()?;
        if reflected {
            element = &self.config.group.coset_representative() * &element;
        }
        Ok(Draw {
            coordinates,
            quaternion,
            reflected,
            element,
        })
    }

    pub fn next_element(&mut self) -> Result<GroupElement> {
        Ok(self.next_draw()?.element)
    }
}

/// `config.count` Haar-uniform group elements.
pub fn sample(config: &SamplerConfig) -> Result<Vec<GroupElement>> {
    let mut sampler = Sampler::new(*config)?;
    (0..config.count).map(|_| sampler.next_element()).collect()
}

/// `config.count` full draws, keeping coordinates and quaternions.
pub fn sample_draws(config: &SamplerConfig) -> Result<Vec<Draw>> {
    let mut sampler = Sampler::new(*config)?;
    (0..config.count).map(|_| sampler.next_draw()).collect()
}

/// Uniform unit quaternions from the hyperpolar chart.
pub fn sample_quaternions(seed: u64, count: usize) -> Result<Vec<Quaternion>> {
    let config = SamplerConfig::new(GroupTag::So3, BuiltinChart::So3Quat, seed, count)?;
    sample_draws(&config)?
        .into_iter()
        .map(|d| d.quaternion.ok_or(Error::Invalid("missing quaternion".into())))
        .collect()
}

/// Solves `F(x) = target` on `bracket` for a continuous nondecreasing `F`,
/// using a central-difference slope for Newton steps.
pub fn invert_cdf<F>(f: F, target: f64, bracket: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let h = 1e-7 * (bracket.1 - bracket.0).abs().max(f64::MIN_POSITIVE);
    let slope = |x: f64| {
        let (a, b) = ((x - h).max(bracket.0), (x + h).min(bracket.1));
        (f(b) - f(a)) / (b - a)
    };
    invert_cdf_with_density(&f, slope, target, bracket)
}

/// Newton iteration on `F(x) − target` with a bisection safeguard; `pdf` is `F′`.
pub fn invert_cdf_with_density<F, P>(f: F, pdf: P, target: f64, bracket: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
{
    let (mut a, mut b) = bracket;
    let (fa, fb) = (f(a), f(b));
    if !(a < b) || !(fa <= target && target <= fb) {
        return Err(Error::BracketViolation {
            target,
            lo: fa,
            hi: fb,
        });
    }
    if target == fa {
        return Ok(a);
    }
    if target == fb {
        return Ok(b);
    }
    let mut x = a + (b - a) * (target - fa) / (fb - fa);
    for _ in 0..MAX_ITERATIONS {
        let r = f(x) - target;
        if r.abs() < CDF_TOL {
            return Ok(x);
        }
        if r < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let slope = pdf(x);
        let newton = x - r / slope;
        x = if slope > 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if b - a <= f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    if (f(x) - target).abs() < CDF_TOL {
        Ok(x)
    } else {
        Err(Error::NoConvergence(MAX_ITERATIONS))
    }
}
