//! Command-line front end. Exit codes: 0 success, 1 usage or input error,
//! 2 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dsl::{BuiltinChart, Chart, ChartGroup, DEFAULT_STEP};
use crate::engine::{
    chart_change_check, closed_form_constant, invariance_residuals, match_chart_point, GroupQuadrature, HaarDensity,
};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupTag, Matrix};
use crate::json::{sig17, sig9, to_line};
use crate::orbit::{covariance, mc_moments, OrbitSpec, Representation};
use crate::quadrature::{QuadratureRule, DEFAULT_NODES};
use crate::reynolds::{dim_invariants_closed, dim_invariants_quadrature, dim_invariants_reduced, reynolds, REDUCED_NODES};
use crate::sampling::{sample_draws, SamplerConfig};
use crate::tensor::Tensor;

/// Largest invariance residual `check-chart` accepts.
const INVARIANCE_TOL: f64 = 1e-7;

/// Seed of the fixed shifts used by the invariance battery.
const SHIFT_SEED: u64 = 2024;

#[derive(Debug, Parser)]
#[command(name = "haar", version, about = "Haar measures on SO(2), O(2), SO(3) and O(3)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the normalized Haar density of a chart at a point
    Density(DensityArgs),
    /// Report the normalization constant C of a chart
    Normalize(NormalizeArgs),
    /// Draw Haar-uniform group elements
    Sample(SampleArgs),
    /// Parse a chart, then check orthogonality, normalization and invariance
    CheckChart(CheckChartArgs),
    /// Dimension of the invariant subspace of the n-th tensor power of R^D
    Dim(DimArgs),
    /// Average a tensor over a group (Reynolds projector)
    Reynolds(ReynoldsArgs),
    /// First and second moments and covariance of a group orbit
    OrbitMoments(OrbitArgs),
    /// Compare the densities of two charts through a change of coordinates
    ChartChange(ChartChangeArgs),
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Write the result to PATH instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Chart file, or builtin:<tag> (so2-angle, so2-shifted, so3-euler, so3-polar, so3-quat)
    #[arg(long)]
    pub chart: String,
    /// Comma-separated chart coordinates in radians
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub point: Vec<f64>,
    /// Evaluate the closed-form density of a built-in chart
    #[arg(long)]
    pub closed_form: bool,
    /// Evaluate the numeric density (default unless --closed-form is given)
    #[arg(long)]
    pub numeric: bool,
    /// Gauss-Legendre nodes per axis for the normalization constant
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Finite-difference step
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// Chart file or builtin:<tag>
    #[arg(long)]
    pub chart: String,
    /// Gauss-Legendre nodes per axis
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Group: so2, o2, so3 or o3
    #[arg(long, value_parser = parse_group)]
    pub group: GroupTag,
    /// Built-in chart whose coordinates are sampled (default: angle in 2D, euler in 3D)
    #[arg(long, value_parser = parse_builtin)]
    pub chart: Option<BuiltinChart>,
    /// Number of samples
    #[arg(short = 'n', long = "count")]
    pub count: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output format: JSON lines or CSV rows of matrix entries
    #[arg(long, value_enum, default_value_t = SampleFormat::Json)]
    pub format: SampleFormat,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct CheckChartArgs {
    /// Chart file or builtin:<tag>
    pub chart: String,
    /// Gauss-Legendre nodes per axis
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Print a JSON record instead of a table
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DimMethod {
    /// Exact binomial sums
    Closed,
    /// Trace formula by quadrature
    Quadrature,
    /// Both, as a JSON record
    Both,
}

#[derive(Debug, Args)]
pub struct DimArgs {
    /// Group: so2, o2, so3 or o3
    #[arg(long, value_parser = parse_group)]
    pub group: GroupTag,
    /// Tensor order n
    #[arg(long)]
    pub order: u32,
    #[arg(long, value_enum, default_value_t = DimMethod::Closed)]
    pub method: DimMethod,
    /// Integrate over this chart instead of the reduced one-dimensional rule
    #[arg(long)]
    pub chart: Option<String>,
    /// Quadrature nodes (default 256 for the reduced rule, 32 per axis for a chart)
    #[arg(long)]
    pub nodes: Option<usize>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ReynoldsArgs {
    /// Group: so2, o2, so3 or o3
    #[arg(long, value_parser = parse_group)]
    pub group: GroupTag,
    /// Tensor JSON file {"dim", "order", "entries"}, or - for stdin
    #[arg(long)]
    pub tensor: String,
    /// Chart used for the quadrature (default: builtin so2-angle or so3-euler)
    #[arg(long)]
    pub chart: Option<String>,
    /// Gauss-Legendre nodes per axis
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RepresentationArg {
    Natural,
    Tensor,
    Sym2,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    /// Group: so2, o2, so3 or o3
    #[arg(long, value_parser = parse_group)]
    pub group: GroupTag,
    #[arg(long, value_enum, default_value_t = RepresentationArg::Sym2)]
    pub representation: RepresentationArg,
    /// Seed tensor JSON file, or - for stdin
    #[arg(long, conflicts_with = "diag")]
    pub tensor: Option<String>,
    /// Diagonal seed matrix, comma-separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub diag: Option<Vec<f64>>,
    /// Chart used for the quadrature (default: builtin so2-angle or so3-euler)
    #[arg(long)]
    pub chart: Option<String>,
    /// Gauss-Legendre nodes per axis
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Monte Carlo samples for the cross-check (0 disables it)
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    /// RNG seed for the Monte Carlo cross-check
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ChartChangeArgs {
    /// Source chart (file or builtin:<tag>)
    #[arg(long)]
    pub from: String,
    /// Target chart (file or builtin:<tag>)
    #[arg(long)]
    pub to: String,
    /// Comma-separated point in the source chart
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub point: Vec<f64>,
    /// Coordinate change: identity, match (solve p2(w) = p1(u)), or shift:c1,c2,... (w = u + c)
    #[arg(long, default_value = "match", allow_hyphen_values = true)]
    pub map: String,
    /// Gauss-Legendre nodes per axis for both normalizations
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Finite-difference step for the Jacobian of the map
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    #[command(flatten)]
    pub out: OutArg,
}

fn parse_group(s: &str) -> std::result::Result<GroupTag, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_builtin(s: &str) -> std::result::Result<BuiltinChart, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                1
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<i32> {
    let (text, out, code) = match command {
        Command::Density(a) => (density(a)?, &a.out, 0),
        Command::Normalize(a) => (normalize(a)?, &a.out, 0),
        Command::Sample(a) => (sample(a)?, &a.out, 0),
        Command::CheckChart(a) => {
            let (text, ok) = check_chart(a)?;
            (text, &a.out, if ok { 0 } else { 2 })
        }
        Command::Dim(a) => (dim(a)?, &a.out, 0),
        Command::Reynolds(a) => (reynolds_cmd(a)?, &a.out, 0),
        Command::OrbitMoments(a) => (orbit_moments(a)?, &a.out, 0),
        Command::ChartChange(a) => (chart_change(a)?, &a.out, 0),
    };
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })?,
    }
    Ok(code)
}

/// Loads a chart, prefixing parse diagnostics with the file name.
fn load_chart(spec: &str) -> Result<Chart> {
    match Chart::load(spec) {
        Err(Error::Parse(p)) => Err(Error::Invalid(format!("{spec}:{p}"))),
        other => other,
    }
}

fn read_input(path: &str) -> Result<String> {
    let io_err = |source| Error::Io {
        path: path.to_string(),
        source,
    };
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(io_err)
    }
}

fn read_tensor(path: &str) -> Result<Tensor> {
    serde_json::from_str(&read_input(path)?).map_err(|e| Error::InvalidTensor(format!("{path}: {e}")))
}

fn line(value: &Value) -> Result<String> {
    let mut s = to_line(value).map_err(|e| Error::Invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn tensor_json(t: &Tensor) -> Value {
    json!({ "dim": t.dim(), "order": t.order(), "entries": t.entries() })
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn default_chart(group: GroupTag) -> Chart {
    Chart::builtin(if group.dim() == 2 {
        BuiltinChart::So2Angle
    } else {
        BuiltinChart::So3Euler
    })
}

fn group_quadrature(group: GroupTag, chart: Option<&str>, nodes: usize) -> Result<GroupQuadrature> {
    let chart = match chart {
        Some(spec) => load_chart(spec)?,
        None => default_chart(group),
    };
    let density = HaarDensity::numeric(chart, nodes)?;
    let rule = QuadratureRule::uniform(nodes, density.chart().domain());
    GroupQuadrature::new(group, &density, &rule)
}

fn density(a: &DensityArgs) -> Result<String> {
    let chart = load_chart(&a.chart)?;
    let label = chart.label();
    let mut out = String::new();
    if a.numeric || !a.closed_form {
        let basis = crate::engine::algebra_basis(&chart)?;
        let rule = QuadratureRule::uniform(a.nodes, chart.domain());
        let d = HaarDensity::normalize_with_step(chart.clone(), basis, &rule, a.step)?;
        out += &line(&json!({
            "chart": label, "point": a.point, "density": d.value(&a.point)?, "mode": "numeric",
        }))?;
    }
    if a.closed_form {
        let which = chart.builtin_tag().ok_or_else(|| {
            Error::Invalid(format!("no closed-form density for `{label}`; only built-in charts have one"))
        })?;
        out += &line(&json!({
            "chart": label, "point": a.point,
            "density": HaarDensity::closed_form(which).value(&a.point)?, "mode": "closed-form",
        }))?;
    }
    Ok(out)
}

fn normalize(a: &NormalizeArgs) -> Result<String> {
    let chart = load_chart(&a.chart)?;
    let label = chart.label();
    let reference = chart.builtin_tag().map(closed_form_constant);
    let d = HaarDensity::numeric(chart, a.nodes)?;
    line(&json!({
        "chart": label,
        "normalization": d.normalization(),
        "reference": reference,
        "nodes_per_axis": vec![a.nodes; d.chart().param_count()],
    }))
}

fn sample(a: &SampleArgs) -> Result<String> {
    let chart = a.chart.unwrap_or(if a.group.dim() == 2 {
        BuiltinChart::So2Angle
    } else {
        BuiltinChart::So3Euler
    });
    let config = SamplerConfig::new(a.group, chart, a.seed, a.count)?;
    let mut out = String::new();
    for draw in sample_draws(&config)? {
        match a.format {
            SampleFormat::Json => {
                let record = match draw.quaternion {
                    Some(q) if a.group == GroupTag::So3 => json!({ "q": q.to_array() }),
                    _ => json!({ "R": matrix_rows(draw.element.matrix()) }),
                };
                out += &line(&record)?;
            }
            SampleFormat::Csv => {
                let m = draw.element.matrix();
                let cells: Vec<String> = m.transpose().iter().map(|&x| sig17(x)).collect();
                out += &cells.join(",");
                out.push('\n');
            }
        }
    }
    Ok(out)
}

fn check_chart(a: &CheckChartArgs) -> Result<(String, bool)> {
    let chart = load_chart(&a.chart)?;
    let label = chart.label();
    let density = HaarDensity::numeric(chart.clone(), a.nodes)?;
    let rule = QuadratureRule::uniform(a.nodes, chart.domain());
    let group = match (chart.group(), chart.element_dim()) {
        (ChartGroup::So2, _) => Some(GroupTag::So2),
        (ChartGroup::So3 | ChartGroup::Su2, _) => Some(GroupTag::So3),
        (_, 2) => Some(GroupTag::O2),
        (_, 3) => Some(GroupTag::O3),
        _ => None,
    };
    let report = match group {
        Some(g) => {
            let q = GroupQuadrature::new(g, &density, &rule)?;
            let shift_chart = if g.dim() == 2 {
                BuiltinChart::So2Angle
            } else {
                BuiltinChart::So3Euler
            };
            let shifts: Vec<GroupElement> = crate::sampling::sample(&SamplerConfig::new(g, shift_chart, SHIFT_SEED, 3)?)?;
            Some(invariance_residuals(&q, &shifts)?)
        }
        None => None,
    };
    let ok = report.is_none_or(|r| r.max() < INVARIANCE_TOL);
    let text = if a.json {
        line(&json!({
            "chart": label,
            "group": chart.group().as_str(),
            "params": chart.param_names(),
            "matrix_dim": chart.matrix_dim(),
            "normalization": density.normalization(),
            "nodes_per_axis": vec![a.nodes; chart.param_count()],
            "invariance": report.map(|r| json!({ "left": r.left, "right": r.right, "inversion": r.inversion })),
            "ok": ok,
        }))?
    } else {
        let mut s = format!(
            "chart          {label}\ngroup          {}\nparams         {}\nmatrix         {n}x{n}\nnormalization  {}\n",
            chart.group(),
            chart.param_names().join(", "),
            sig9(density.normalization()),
            n = chart.matrix_dim(),
        );
        match report {
            Some(r) => {
                s += &format!(
                    "left           {}\nright          {}\ninversion      {}\n",
                    sig9(r.left),
                    sig9(r.right),
                    sig9(r.inversion)
                );
            }
            None => s += "invariance     skipped (no group structure)\n",
        }
        s += if ok { "status         ok\n" } else { "status         FAILED\n" };
        s
    };
    Ok((text, ok))
}

fn dim(a: &DimArgs) -> Result<String> {
    let closed = || dim_invariants_closed(a.group, a.order);
    let quadrature = || -> Result<f64> {
        match &a.chart {
            Some(spec) => {
                let q = group_quadrature(a.group, Some(spec), a.nodes.unwrap_or(DEFAULT_NODES))?;
                dim_invariants_quadrature(&q, a.order)
            }
            None => dim_invariants_reduced(a.group, a.order, a.nodes.unwrap_or(REDUCED_NODES)),
        }
    };
    Ok(match a.method {
        DimMethod::Closed => format!("{}\n", closed()),
        DimMethod::Quadrature => format!("{}\n", sig17(quadrature()?)),
        DimMethod::Both => {
            let c = closed();
            let c = u64::try_from(&c).map(Value::from).unwrap_or_else(|_| Value::from(c.to_string()));
            line(&json!({ "group": a.group.as_str(), "order": a.order, "closed": c, "quadrature": quadrature()? }))?
        }
    })
}

fn reynolds_cmd(a: &ReynoldsArgs) -> Result<String> {
    let t = read_tensor(&a.tensor)?;
    let q = group_quadrature(a.group, a.chart.as_deref(), a.nodes)?;
    line(&tensor_json(&reynolds(&q, &t)?))
}

fn orbit_moments(a: &OrbitArgs) -> Result<String> {
    let seed = match (&a.tensor, &a.diag) {
        (Some(path), _) => read_tensor(path)?,
        (None, Some(d)) => Tensor::from_matrix(&Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))?,
        (None, None) => return Err(Error::Invalid("one of --tensor or --diag is required".into())),
    };
    let representation = match a.representation {
        RepresentationArg::Natural => Representation::Natural,
        RepresentationArg::Tensor => Representation::Tensor(seed.order()),
        RepresentationArg::Sym2 => Representation::Sym2,
    };
    let spec = OrbitSpec::new(a.group, representation, seed)?;
    let q = group_quadrature(a.group, a.chart.as_deref(), a.nodes)?;
    let cov = covariance(&spec, &q)?;
    let (mc_m1, mc_m2, mc_stderr) = if a.samples > 0 {
        let chart = if a.group.dim() == 2 {
            BuiltinChart::So2Angle
        } else {
            BuiltinChart::So3Euler
        };
        let config = SamplerConfig::new(a.group, chart, a.seed, a.samples)?;
        let e1 = mc_moments(&spec, 1, &config)?;
        let e2 = mc_moments(&spec, 2, &config)?;
        let se = json!({
            "m1": e1.stderr.as_ref().map(tensor_json),
            "m2": e2.stderr.as_ref().map(tensor_json),
        });
        (tensor_json(&e1.mean), tensor_json(&e2.mean), se)
    } else {
        (Value::Null, Value::Null, Value::Null)
    };
    line(&json!({
        "m1": tensor_json(&cov.m1),
        "m2": tensor_json(&cov.m2),
        "cov": tensor_json(&cov.standard),
        "cov_displayed": tensor_json(&cov.displayed),
        "mc_m1": mc_m1,
        "mc_m2": mc_m2,
        "mc_stderr": mc_stderr,
        "nodes_per_axis": vec![a.nodes; q.nodes_per_axis().len()],
    }))
}

fn chart_change(a: &ChartChangeArgs) -> Result<String> {
    let c1 = load_chart(&a.from)?;
    let c2 = load_chart(&a.to)?;
    let d1 = HaarDensity::numeric(c1.clone(), a.nodes)?;
    let d2 = HaarDensity::numeric(c2.clone(), a.nodes)?;
    let report = match a.map.as_str() {
        "identity" => chart_change_check(&d1, &d2, &|u: &[f64]| Ok(u.to_vec()), &a.point, a.step)?,
        "match" => {
            let phi = |u: &[f64]| match_chart_point(&c2, &c1.element(u)?);
            chart_change_check(&d1, &d2, &phi, &a.point, a.step)?
        }
        other => {
            let offsets = other
                .strip_prefix("shift:")
                .ok_or_else(|| Error::Invalid(format!("unknown map `{other}`; use identity, match or shift:c1,...")))?
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|e| Error::Invalid(format!("bad shift `{c}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if offsets.len() != a.point.len() {
                return Err(Error::DimensionMismatch {
                    expected: a.point.len(),
                    found: offsets.len(),
                });
            }
            let phi = |u: &[f64]| Ok(u.iter().zip(&offsets).map(|(x, c)| x + c).collect());
            chart_change_check(&d1, &d2, &phi, &a.point, a.step)?
        }
    };
    line(&json!({
        "from": c1.label(),
        "to": c2.label(),
        "point": report.point,
        "mapped": report.mapped,
        "k1": report.k1,
        "k2": report.k2,
        "jacobian": report.jacobian,
        "residual": report.residual,
        "element_mismatch": report.element_mismatch,
    }))
}
