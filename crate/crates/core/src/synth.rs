//! Seeded synthetic generators: four additive-noise stress tests with truth
//! `X→Y` and two latent-confounding models with no causal direction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{mix_all, normal_vec, rng_from_seed};
use crate::sample::PairSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    CubicAnm,
    NearLinearAnm,
    HeteroCubicAnm,
    SineAnm,
    ConfoundLinear,
    ConfoundNonlinear,
}

/// Ground truth attached to a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Truth {
    XtoY,
    YtoX,
    NoDirection,
    Unknown,
}

impl Truth {
    /// Whether a directional verdict can be scored right or wrong.
    pub fn is_directional(&self) -> bool {
        matches!(self, Truth::XtoY | Truth::YtoX)
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::XtoY => "X->Y",
            Truth::YtoX => "Y->X",
            Truth::NoDirection => "none",
            Truth::Unknown => "unknown",
        })
    }
}

impl FromStr for Truth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X->Y" => Ok(Truth::XtoY),
            "Y->X" => Ok(Truth::YtoX),
            "none" => Ok(Truth::NoDirection),
            "unknown" => Ok(Truth::Unknown),
            other => Err(Error::InvalidInput(format!("unknown truth {other:?}"))),
        }
    }
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::CubicAnm,
        ScenarioKind::NearLinearAnm,
        ScenarioKind::HeteroCubicAnm,
        ScenarioKind::SineAnm,
        ScenarioKind::ConfoundLinear,
        ScenarioKind::ConfoundNonlinear,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::CubicAnm => "cubic",
            ScenarioKind::NearLinearAnm => "near_linear",
            ScenarioKind::HeteroCubicAnm => "hetero_cubic",
            ScenarioKind::SineAnm => "sine",
            ScenarioKind::ConfoundLinear => "confound_linear",
            ScenarioKind::ConfoundNonlinear => "confound_nonlinear",
        }
    }

    fn id(&self) -> u64 {
        Self::ALL.iter().position(|k| k == self).unwrap() as u64
    }

    pub fn truth(&self) -> Truth {
        match self {
            ScenarioKind::ConfoundLinear | ScenarioKind::ConfoundNonlinear => Truth::NoDirection,
            _ => Truth::XtoY,
        }
    }

    /// Name of the swept stress parameter.
    pub fn stress_param(&self) -> &'static str {
        match self {
            ScenarioKind::CubicAnm | ScenarioKind::SineAnm => "sigma_eps",
            ScenarioKind::NearLinearAnm => "c",
            ScenarioKind::HeteroCubicAnm => "lambda",
            ScenarioKind::ConfoundLinear => "gamma",
            ScenarioKind::ConfoundNonlinear => "a",
        }
    }

    /// Every parameter the generator reads, with its default value.
    pub fn default_params(&self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            ScenarioKind::CubicAnm => &[("sigma_eps", 0.1)],
            ScenarioKind::NearLinearAnm => &[("c", 0.2), ("sigma_eps", 0.3)],
            ScenarioKind::HeteroCubicAnm => &[("lambda", 1.0), ("sigma0", 0.3)],
            ScenarioKind::SineAnm => &[("sigma_eps", 0.1)],
            ScenarioKind::ConfoundLinear => &[("gamma", 1.0), ("sigma_x", 0.5), ("sigma_y", 0.5)],
            ScenarioKind::ConfoundNonlinear => {
                &[("a", 0.3), ("b", 1.0), ("sigma_x", 0.5), ("sigma_y", 0.5)]
            }
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    /// Default sweep values of the stress parameter.
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            ScenarioKind::CubicAnm | ScenarioKind::SineAnm => vec![0.02, 0.1, 0.3, 1.0],
            ScenarioKind::NearLinearAnm => vec![0.0, 0.05, 0.2, 1.0],
            ScenarioKind::HeteroCubicAnm => vec![0.0, 0.5, 1.0, 2.0],
            ScenarioKind::ConfoundLinear => vec![0.25, 0.5, 1.0, 2.0],
            ScenarioKind::ConfoundNonlinear => vec![0.0, 0.1, 0.3, 1.0],
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown scenario kind {s:?}")))
    }
}

/// Standard sample-size sweep.
pub const N_GRID: [usize; 8] = [50, 100, 150, 250, 500, 1000, 1500, 2000];

/// One synthetic dataset specification.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: BTreeMap<String, f64>,
    pub n: usize,
    pub seed: u64,
    /// Position in the stress grid (0 when not part of a sweep).
    pub param_index: usize,
    pub rep: usize,
}

impl Scenario {
    /// A scenario with default parameters, optionally overriding the stress value.
    pub fn new(kind: ScenarioKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            params: kind.default_params(),
            n,
            seed,
            param_index: 0,
            rep: 0,
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn truth(&self) -> Truth {
        self.kind.truth()
    }

    /// Value of the stress parameter.
    pub fn stress(&self) -> f64 {
        self.params[self.kind.stress_param()]
    }

    /// Stable identifier, e.g. `cubic-n250-p0-r3`.
    pub fn label(&self) -> String {
        format!(
            "{}-n{}-p{}-r{}",
            self.kind, self.n, self.param_index, self.rep
        )
    }

    fn param(&self, name: &str) -> Result<f64> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidScenario(format!("{} needs parameter {name}", self.kind)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidScenario(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        for name in self.kind.default_params().keys() {
            let v = self.param(name)?;
            if !v.is_finite() {
                return Err(Error::InvalidScenario(format!("{name} is not finite")));
            }
            let is_scale = name.starts_with("sigma") || name == "lambda";
            if is_scale && v < 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        if let Some(extra) = self
            .params
            .keys()
            .find(|k| !self.kind.default_params().contains_key(*k))
        {
            return Err(Error::InvalidScenario(format!(
                "{} does not take parameter {extra}",
                self.kind
            )));
        }
        Ok(())
    }

    /// Flat `key=value` record.
    pub fn to_record(&self) -> String {
        let mut s = format!(
            "kind={} n={} seed={} param_index={} rep={}",
            self.kind, self.n, self.seed, self.param_index, self.rep
        );
        for (k, v) in &self.params {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }

    pub fn from_record(line: &str) -> Result<Self> {
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for tok in line.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::InvalidScenario(format!("malformed field {tok:?}")))?;
            fields.insert(k, v);
        }
        let take = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::InvalidScenario(format!("missing field {k}")))
        };
        let num = |k: &str| -> Result<u64> {
            take(k)?
                .parse()
                .map_err(|_| Error::InvalidScenario(format!("field {k} is not an integer")))
        };
        let kind: ScenarioKind = take("kind")?.parse()?;
        let mut params = BTreeMap::new();
        for (k, v) in &fields {
            if matches!(*k, "kind" | "n" | "seed" | "param_index" | "rep") {
                continue;
            }
            let v: f64 = v
                .parse()
                .map_err(|_| Error::InvalidScenario(format!("field {k} is not a number")))?;
            params.insert(k.to_string(), v);
        }
        let s = Scenario {
            kind,
            params,
            n: num("n")? as usize,
            seed: num("seed")?,
            param_index: num("param_index")? as usize,
            rep: num("rep")? as usize,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Draw the dataset described by `scenario`.
pub fn generate(scenario: &Scenario) -> Result<PairSample> {
    scenario.validate()?;
    let n = scenario.n;
    let p = |k: &str| scenario.param(k);
    let mut rng = rng_from_seed(scenario.seed);
    let (x, y): (Vec<f64>, Vec<f64>) = match scenario.kind {
        ScenarioKind::CubicAnm => {
            let s = p("sigma_eps")?;
            let x = normal_vec(&mut rng, n);
            let e = normal_vec(&mut rng, n);
            let y = x.iter().zip(&e).map(|(x, e)| x.powi(3) + s * e).collect();
            (x, y)
        }
        ScenarioKind::NearLinearAnm => {
            let (c, s) = (p("c")?, p("sigma_eps")?);
            let x = normal_vec(&mut rng, n);
            let e = normal_vec(&mut rng, n);
            let y = x
                .iter()
                .zip(&e)
                .map(|(x, e)| x + c * x.powi(3) + s * e)
                .collect();
            (x, y)
        }
        ScenarioKind::HeteroCubicAnm => {
            let (lambda, s0) = (p("lambda")?, p("sigma0")?);
            let x = normal_vec(&mut rng, n);
            let xi = normal_vec(&mut rng, n);
            let y = x
                .iter()
                .zip(&xi)
                .map(|(x, xi)| x.powi(3) + (s0 + lambda * x.abs()) * xi)
                .collect();
            (x, y)
        }
        ScenarioKind::SineAnm => {
            let s = p("sigma_eps")?;
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let e = normal_vec(&mut rng, n);
            let y = x.iter().zip(&e).map(|(x, e)| x.sin() + s * e).collect();
            (x, y)
        }
        ScenarioKind::ConfoundLinear => {
            let (g, sx, sy) = (p("gamma")?, p("sigma_x")?, p("sigma_y")?);
            let z = normal_vec(&mut rng, n);
            let ex = normal_vec(&mut rng, n);
            let ey = normal_vec(&mut rng, n);
            let x = z.iter().zip(&ex).map(|(z, e)| z + sx * e).collect();
            let y = z.iter().zip(&ey).map(|(z, e)| g * z + sy * e).collect();
            (x, y)
        }
        ScenarioKind::ConfoundNonlinear => {
            let (a, b, sx, sy) = (p("a")?, p("b")?, p("sigma_x")?, p("sigma_y")?);
            let z = normal_vec(&mut rng, n);
            let ex = normal_vec(&mut rng, n);
            let ey = normal_vec(&mut rng, n);
            let x = z
                .iter()
                .zip(&ex)
                .map(|(z, e)| z + a * z.powi(3) + sx * e)
                .collect();
            let y = z
                .iter()
                .zip(&ey)
                .map(|(z, e)| b * z + a * z.powi(3) + sy * e)
                .collect();
            (x, y)
        }
    };
    PairSample::with_source(x, y, scenario.to_record())
}

/// Cartesian product `n × stress value × replicate`, ordered by n, then
/// stress index, then replicate.
pub fn sweep_grid(
    kind: ScenarioKind,
    n_grid: &[usize],
    param_grid: &[f64],
    n_rep: usize,
    base_seed: u64,
) -> Result<Vec<Scenario>> {
    if n_grid.is_empty() || param_grid.is_empty() || n_rep == 0 {
        return Err(Error::InvalidScenario(
            "sweep grids must be nonempty".into(),
        ));
    }
    let mut out = Vec::with_capacity(n_grid.len() * param_grid.len() * n_rep);
    for &n in n_grid {
        for (pi, &value) in param_grid.iter().enumerate() {
            for rep in 0..n_rep {
                let seed = mix_all(base_seed, &[kind.id(), n as u64, pi as u64, rep as u64]);
                let mut s = Scenario::new(kind, n, seed).with_param(kind.stress_param(), value);
                s.param_index = pi;
                s.rep = rep;
                out.push(s);
            }
        }
    }
    Ok(out)
}
