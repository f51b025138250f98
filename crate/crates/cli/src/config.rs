use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use szego_core::oracle::PrecisionMode;
use szego_core::potential::{make_elliptic_ginibre, make_ginibre, make_radial, radial_profile, Potential, PotentialKind};
use szego_core::validate::DEFAULT_SEED;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    Ginibre,
    Radial { profile: String },
    Elliptic { a: f64, b: f64 },
}

/// Resolved settings shared by every subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub nodes: usize,
    pub n_ladder: Vec<usize>,
    pub z: Vec<[f64; 2]>,
    pub w: Vec<[f64; 2]>,
    pub k_terms: usize,
    pub tol: f64,
    pub step: f64,
    pub precision: String,
    pub output_dir: Option<PathBuf>,
    pub m_const: f64,
    pub eta: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PotentialSpec::Ginibre,
            nodes: szego_core::potential::DEFAULT_NODES,
            n_ladder: vec![100, 200, 400],
            z: vec![[1.5, 0.0]],
            w: vec![[1.2, 0.0]],
            k_terms: 2,
            tol: szego_core::geometry::DEFAULT_TOL,
            step: szego_core::geometry::DEFAULT_STEP,
            precision: "native".into(),
            output_dir: None,
            m_const: 1.0,
            eta: szego_core::expansion::DEFAULT_ETA,
            seed: DEFAULT_SEED,
        }
    }
}

/// Flag values as given on the command line; `None` leaves the config value alone.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub potential: Option<String>,
    pub profile: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub n: Option<usize>,
    pub nlist: Option<String>,
    pub z: Vec<String>,
    pub w: Vec<String>,
    pub k: Option<usize>,
    pub eta: Option<f64>,
    pub m_const: Option<f64>,
    pub nodes: Option<usize>,
    pub precision: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub step: Option<f64>,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| cfg_err(format!("invalid value for {key}: '{v}'")))
}

/// Accepts `1.5`, `2+i`, `-0.3-1.2i`, `i`, `1.5,0.2` and `(1.5,0.2)`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let t = t.trim_start_matches('(').trim_end_matches(')');
    let bad = || cfg_err(format!("cannot parse complex number '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((re, im)) = t.split_once(',') {
        return Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im))
}

fn parse_points(key: &str, values: &[String]) -> Result<Vec<[f64; 2]>, CliError> {
    let mut out = Vec::new();
    for v in values {
        for part in v.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let c = parse_complex(part).map_err(|e| cfg_err(format!("{key}: {e}")))?;
            out.push([c.re, c.im]);
        }
    }
    Ok(out)
}

fn parse_ladder(v: &str) -> Result<Vec<usize>, CliError> {
    v.split(|c| c == ',' || c == ';').map(str::trim).filter(|p| !p.is_empty()).map(|p| parse_num("nlist", p)).collect()
}

impl RunConfig {
    /// Defaults, then the config file, then command-line flags.
    pub fn resolve(config_file: Option<&Path>, flags: &Overrides) -> Result<Self, CliError> {
        let mut merged = Overrides::default();
        if let Some(path) = config_file {
            let text = fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read config {}: {e}", path.display())))?;
            merged = parse_config_text(&text)?;
        }
        merged.merge(flags.clone());
        let mut cfg = RunConfig::default();
        cfg.apply(&merged)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        let kind = o.potential.as_deref().unwrap_or(match self.potential {
            PotentialSpec::Ginibre => "ginibre",
            PotentialSpec::Radial { .. } => "radial",
            PotentialSpec::Elliptic { .. } => "elliptic",
        });
        self.potential = match kind {
            "ginibre" => PotentialSpec::Ginibre,
            "radial" => PotentialSpec::Radial { profile: o.profile.clone().unwrap_or_else(|| "r4".into()) },
            "elliptic" => PotentialSpec::Elliptic { a: o.a.unwrap_or(1.0), b: o.b.unwrap_or(3.0) },
            other => return Err(cfg_err(format!("unknown potential '{other}' (ginibre|radial|elliptic)"))),
        };
        if let Some(n) = o.n {
            self.n_ladder = vec![n];
        }
        if let Some(l) = &o.nlist {
            self.n_ladder = parse_ladder(l)?;
        }
        if !o.z.is_empty() {
            self.z = parse_points("z", &o.z)?;
        }
        if !o.w.is_empty() {
            self.w = parse_points("w", &o.w)?;
        }
        if let Some(k) = o.k {
            self.k_terms = k;
        }
        if let Some(v) = o.eta {
            self.eta = v;
        }
        if let Some(v) = o.m_const {
            self.m_const = v;
        }
        if let Some(v) = o.nodes {
            self.nodes = v;
        }
        if let Some(v) = &o.precision {
            self.precision = v.clone();
        }
        if let Some(v) = &o.out {
            self.output_dir = Some(v.clone());
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.tol {
            self.tol = v;
        }
        if let Some(v) = o.step {
            self.step = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_ladder.is_empty() || self.n_ladder.iter().any(|&n| n == 0) {
            return Err(cfg_err("n ladder must be a nonempty list of positive counts"));
        }
        if self.n_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg_err(format!("n ladder must be strictly increasing, got {:?}", self.n_ladder)));
        }
        if !(self.eta > 0.0) {
            return Err(cfg_err(format!("η must be positive, got {}", self.eta)));
        }
        if !(self.m_const > 0.0) {
            return Err(cfg_err(format!("M must be positive, got {}", self.m_const)));
        }
        if !(self.tol > 0.0) || !(self.step > 0.0) {
            return Err(cfg_err("tol and step must be positive"));
        }
        if self.nodes < 16 {
            return Err(cfg_err(format!("nodes must be at least 16, got {}", self.nodes)));
        }
        self.precision_mode()?;
        if let PotentialSpec::Radial { profile } = &self.potential {
            radial_profile(profile)?;
        }
        Ok(())
    }

    pub fn precision_mode(&self) -> Result<PrecisionMode, CliError> {
        Ok(self.precision.parse::<PrecisionMode>()?)
    }

    pub fn build_potential(&self) -> Result<Potential, CliError> {
        let base = match &self.potential {
            PotentialSpec::Ginibre => make_ginibre(),
            PotentialSpec::Radial { profile } => make_radial(&radial_profile(profile)?)?,
            PotentialSpec::Elliptic { a, b } => make_elliptic_ginibre(*a, *b)?,
        };
        if self.nodes == szego_core::potential::DEFAULT_NODES {
            Ok(base)
        } else {
            Ok(base.with_nodes(self.nodes)?)
        }
    }

    pub fn z_points(&self) -> Vec<Complex64> {
        self.z.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    }

    pub fn w_points(&self) -> Vec<Complex64> {
        self.w.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    }

    /// The single (z, w) pair used by pointwise subcommands.
    pub fn pair(&self) -> Result<(Complex64, Complex64), CliError> {
        match (self.z_points().as_slice(), self.w_points().as_slice()) {
            ([z], [w]) => Ok((*z, *w)),
            _ => Err(cfg_err("this subcommand takes exactly one z and one w")),
        }
    }
}

impl PotentialSpec {
    pub fn from_kind(kind: &PotentialKind) -> Result<Self, CliError> {
        match kind {
            PotentialKind::Ginibre => Ok(PotentialSpec::Ginibre),
            PotentialKind::Elliptic { a, b } => Ok(PotentialSpec::Elliptic { a: *a, b: *b }),
            PotentialKind::Radial { coeffs } => ["r2", "r4", "r2+r4"]
                .into_iter()
                .find(|p| radial_profile(p).map(|c| &c == coeffs).unwrap_or(false))
                .map(|p| PotentialSpec::Radial { profile: p.into() })
                .ok_or_else(|| cfg_err(format!("radial coefficients {coeffs:?} match no named profile"))),
        }
    }
}

impl Overrides {
    fn merge(&mut self, o: Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f; } )* };
        }
        take!(potential, profile, a, b, n, nlist, k, eta, m_const, nodes, precision, out, seed, tol, step);
        if o.n.is_some() {
            self.nlist = None;
        }
        if !o.z.is_empty() {
            self.z = o.z;
        }
        if !o.w.is_empty() {
            self.w = o.w;
        }
    }
}

/// Line-oriented `key = value` with `#` comments.
pub fn parse_config_text(text: &str) -> Result<Overrides, CliError> {
    let mut o = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("config line {}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "potential" => o.potential = Some(value.into()),
            "profile" => o.profile = Some(value.into()),
            "a" => o.a = Some(parse_num(key, value)?),
            "b" => o.b = Some(parse_num(key, value)?),
            "n" => o.n = Some(parse_num(key, value)?),
            "nlist" => o.nlist = Some(value.into()),
            "z" => o.z = vec![value.into()],
            "w" => o.w = vec![value.into()],
            "k" => o.k = Some(parse_num(key, value)?),
            "eta" => o.eta = Some(parse_num(key, value)?),
            "M" => o.m_const = Some(parse_num(key, value)?),
            "nodes" => o.nodes = Some(parse_num(key, value)?),
            "precision" => o.precision = Some(value.into()),
            "out" => o.out = Some(PathBuf::from(value)),
            "seed" => o.seed = Some(parse_num(key, value)?),
            "tol" => o.tol = Some(parse_num(key, value)?),
            "step" => o.step = Some(parse_num(key, value)?),
            other => return Err(cfg_err(format!("config line {}: unknown key '{other}'", lineno + 1))),
        }
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let c = |s| parse_complex(s).unwrap();
        assert_eq!(c("1.5"), Complex64::new(1.5, 0.0));
        assert_eq!(c("2+i"), Complex64::new(2.0, 1.0));
        assert_eq!(c("-0.3-1.2i"), Complex64::new(-0.3, -1.2));
        assert_eq!(c("i"), Complex64::new(0.0, 1.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("1e-3+2e+1i"), Complex64::new(1e-3, 20.0));
        assert_eq!(c("(1.5, 0.2)"), Complex64::new(1.5, 0.2));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_text("# comment\npotential = elliptic\na = 2 # inline\nnlist = 50, 100\n").unwrap();
        let flags = Overrides { n: Some(30), ..Default::default() };
        let mut merged = file;
        merged.merge(flags);
        let mut cfg = RunConfig::default();
        cfg.apply(&merged).unwrap();
        assert_eq!(cfg.potential, PotentialSpec::Elliptic { a: 2.0, b: 3.0 });
        assert_eq!(cfg.n_ladder, vec![30]);
    }

    #[test]
    fn invariants_rejected() {
        let mut cfg = RunConfig { n_ladder: vec![200, 100], ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.n_ladder = vec![100];
        cfg.eta = 0.0;
        assert!(cfg.validate().is_err());
        cfg.eta = 0.05;
        cfg.m_const = -1.0;
        assert!(cfg.validate().is_err());
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("no equals sign").is_err());
    }
}
