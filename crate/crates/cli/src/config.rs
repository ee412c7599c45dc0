//! Flat `key = value` configuration merged from a file and command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use kwsolve::fieldexpr::field_from_expr;
use kwsolve::io::{field_from_csv, read_field};
use kwsolve::kw::Strategy;
use kwsolve::{GridSpec, KwConfig, LinearConfig, OneForm, ScalarField};

use crate::error::{CliError, Result};

/// Every recognised key with its help text. Each one is also a `--flag`
/// (underscores become hyphens).
pub const KEYS: &[(&str, &str)] = &[
    ("dims", "grid points per axis, comma separated (e.g. 16,16)"),
    ("rank", "grid rank; with a single dims entry builds a cube"),
    ("n", "complex dimension n >= 1"),
    ("t", "Gauduchon parameter t"),
    ("s", "expression for s(t)"),
    ("s_file", "field file for s(t)"),
    ("s_hat", "expression for the prescribed curvature"),
    ("s_hat_file", "field file for the prescribed curvature"),
    ("s2", "expression for s2(t)"),
    ("s2_file", "field file for s2(t)"),
    (
        "u",
        "expression for the log-conformal factor u (metric e^u h)",
    ),
    ("u_file", "field file for u"),
    ("f", "expression for the forcing f of the asymptotic suite"),
    ("f_file", "field file for f"),
    ("phi", "expression for phi"),
    ("phi_file", "field file for phi"),
    ("psi", "expression for psi (construct-unsolvable)"),
    ("psi_file", "field file for psi"),
    (
        "alpha",
        "Lee form components, comma separated expressions, or 0",
    ),
    (
        "alpha_files",
        "Lee form components, comma separated field files",
    ),
    ("c", "constant c"),
    ("c_list", "comma separated negative constants"),
    (
        "alpha_const",
        "positive shift keeping psi + alpha_const sign-changing",
    ),
    ("search_floor", "most negative c probed by critical-c"),
    ("p", "Lebesgue exponent for the sufficient test (> rank)"),
    ("samples", "probe count for the heuristic gamma estimate"),
    ("seed", "random seed for the gamma probes"),
    ("gamma", "use this gamma instead of estimating it"),
    (
        "strategy",
        "newton | fixed-point | continuation (used when c >= 0)",
    ),
    ("steps", "continuation steps"),
    ("lin_tol", "Krylov relative tolerance"),
    ("lin_maxiter", "Krylov iteration cap"),
    ("lin_restart", "Krylov restart length"),
    (
        "lin_precondition",
        "use the FFT preconditioner (true/false)",
    ),
    ("gauduchon_tol", "divergence tolerance for the Lee form"),
    ("kw_tol", "nonlinear tolerance"),
    ("kw_maxiter", "monotone / fixed-point iteration cap"),
    ("newton_maxiter", "Newton iteration cap"),
    ("kw_lambda_override", "monotone shift lambda"),
    (
        "heatmap",
        "write PGM heatmaps for rank-2 fields (true/false)",
    ),
    ("out", "output directory (default: $KW_OUTPUT_DIR or .)"),
];

pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_file_text(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected key = value",
                    i + 1
                )));
            };
            let key = key.trim();
            if !known(key) {
                return Err(CliError::Config(format!(
                    "line {}: unknown key '{key}'",
                    i + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_file_text(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(known(key), "{key}");
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("missing key '{key}'")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, raw: &str) -> Result<T> {
        raw.trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad value for '{key}': '{raw}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v: f64 = self.parse(key, self.require(key)?)?;
        if !v.is_finite() {
            return Err(CliError::Config(format!("'{key}' must be finite")));
        }
        Ok(v)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            Some(_) => self.f64(key),
            None => Ok(default),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            Some(raw) => self.parse(key, raw),
            None => Ok(default),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            Some(raw) => self.parse(key, raw),
            None => Ok(default),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.require(key)?
            .split(',')
            .map(|item| self.parse(key, item))
            .collect()
    }

    pub fn kw_config(&self) -> Result<KwConfig> {
        let d = KwConfig::default();
        let l = LinearConfig::default();
        let lambda_override = match self.get("kw_lambda_override") {
            Some(_) => Some(self.f64("kw_lambda_override")?),
            None => None,
        };
        Ok(KwConfig {
            tol: self.f64_or("kw_tol", d.tol)?,
            max_iter: self.usize_or("kw_maxiter", d.max_iter)?,
            newton_max_iter: self.usize_or("newton_maxiter", d.newton_max_iter)?,
            lambda_override,
            linear: LinearConfig {
                tol: self.f64_or("lin_tol", l.tol)?,
                max_iter: self.usize_or("lin_maxiter", l.max_iter)?,
                restart: self.usize_or("lin_restart", l.restart)?,
                precondition: self.bool_or("lin_precondition", l.precondition)?,
                gauduchon_tol: self.f64_or("gauduchon_tol", l.gauduchon_tol)?,
            },
        })
    }

    pub fn strategy(&self) -> Result<Strategy> {
        match self.get("strategy").unwrap_or("newton") {
            "newton" => Ok(Strategy::Newton),
            "fixed-point" => Ok(Strategy::FixedPoint),
            "continuation" => Ok(Strategy::Continuation {
                steps: self.usize_or("steps", 10)?,
            }),
            other => Err(CliError::Config(format!("unknown strategy '{other}'"))),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        match self.get("out") {
            Some(dir) => PathBuf::from(dir),
            None => std::env::var_os("KW_OUTPUT_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(".")),
        }
    }

    /// The grid from `dims` (and `rank`), else from the first field file.
    pub fn grid(&self) -> Result<GridSpec> {
        if let Some(raw) = self.get("dims") {
            let mut dims: Vec<usize> = raw
                .split(',')
                .map(|d| self.parse("dims", d))
                .collect::<Result<_>>()?;
            if let Some(rank) = self.get("rank") {
                let rank: usize = self.parse("rank", rank)?;
                if dims.len() == 1 {
                    dims = vec![dims[0]; rank];
                } else if dims.len() != rank {
                    return Err(CliError::Config(format!(
                        "rank {rank} does not match {} dims",
                        dims.len()
                    )));
                }
            }
            return Ok(GridSpec::new(&dims)?);
        }
        for (key, _) in KEYS.iter().filter(|(k, _)| k.ends_with("_file")) {
            if let Some(path) = self.get(key) {
                return Ok(load_field(Path::new(path))?.spec().clone());
            }
        }
        if let Some(paths) = self.get("alpha_files") {
            if let Some(first) = paths.split(',').next() {
                return Ok(load_field(Path::new(first.trim()))?.spec().clone());
            }
        }
        Err(CliError::Config(
            "no grid: set 'dims' or give a field file".into(),
        ))
    }

    /// The field `name` from exactly one of `name` (expression) or
    /// `name_file`; `None` when neither is set.
    pub fn field(&self, name: &str, spec: &GridSpec) -> Result<Option<ScalarField>> {
        let file_key = format!("{name}_file");
        match (self.get(name), self.get(&file_key)) {
            (Some(_), Some(_)) => Err(CliError::Config(format!(
                "both '{name}' and '{file_key}' are set"
            ))),
            (Some(text), None) => Ok(Some(field_from_expr(text, spec)?)),
            (None, Some(path)) => {
                let field = load_field(Path::new(path))?;
                if field.spec() != spec {
                    return Err(CliError::Config(format!(
                        "{path}: grid {:?} differs from {:?}",
                        field.spec().dims(),
                        spec.dims()
                    )));
                }
                Ok(Some(field))
            }
            (None, None) => Ok(None),
        }
    }

    pub fn required_field(&self, name: &str, spec: &GridSpec) -> Result<ScalarField> {
        self.field(name, spec)?
            .ok_or_else(|| CliError::Config(format!("missing field '{name}' (or '{name}_file')")))
    }

    /// Lee form from `alpha` / `alpha_files`; zero when neither is set.
    pub fn alpha(&self, spec: &GridSpec) -> Result<OneForm> {
        let components = match (self.get("alpha"), self.get("alpha_files")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "both 'alpha' and 'alpha_files' are set".into(),
                ))
            }
            (None, None) => return Ok(OneForm::zero(spec)),
            (Some(text), None) => {
                let parts: Vec<&str> = text.split(',').map(str::trim).collect();
                if parts == ["0"] {
                    return Ok(OneForm::zero(spec));
                }
                parts
                    .iter()
                    .map(|p| field_from_expr(p, spec).map_err(CliError::from))
                    .collect::<Result<Vec<_>>>()?
            }
            (None, Some(paths)) => paths
                .split(',')
                .map(|p| {
                    let field = load_field(Path::new(p.trim()))?;
                    if field.spec() != spec {
                        return Err(CliError::Config(format!("{p}: grid differs")));
                    }
                    Ok(field)
                })
                .collect::<Result<Vec<_>>>()?,
        };
        if components.len() != spec.rank() {
            return Err(CliError::Config(format!(
                "Lee form needs {} components, got {}",
                spec.rank(),
                components.len()
            )));
        }
        Ok(OneForm::new(components)?)
    }
}

/// Reads `.csv` as CSV and anything else as KWF1.
pub fn load_field(path: &Path) -> Result<ScalarField> {
    let field = if path.extension().is_some_and(|e| e == "csv") {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        field_from_csv(&text)?
    } else {
        read_field(path).map_err(|e| match e {
            kwsolve::KwError::Io(io) => {
                CliError::Config(format!("cannot read {}: {io}", path.display()))
            }
            other => other.into(),
        })?
    };
    Ok(field)
}
