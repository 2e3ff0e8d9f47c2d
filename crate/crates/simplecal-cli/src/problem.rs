//! Problem-spec files: flat `key = value` lines with `#` comments.
//!
//! Matrix-valued keys (`g`, `y`, `sigma_x`, `sigma_ed`, `sigma_ep`, `c`,
//! `f`) take either a path (relative to the spec file) or an inline block
//! `rows,cols: v v v ...` in row-major order. The dataset `d` takes inline
//! numbers or a path to a one-column matrix file. Remaining keys: `scheme`,
//! `tol`, `seed`, `mc_samples`, `tsvd_k`.

use std::collections::BTreeMap;
use std::path::Path;

use simplecal::model::HighFidelityModel;
use simplecal::{Matrix64, Vector64};

use crate::matfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeChoice {
    Optimal,
    Naive,
    Compensated,
    #[value(name = "data-driven")]
    DataDriven,
}

impl std::fmt::Display for SchemeChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SchemeChoice::Optimal => "optimal",
            SchemeChoice::Naive => "naive",
            SchemeChoice::Compensated => "compensated",
            SchemeChoice::DataDriven => "data-driven",
        };
        f.write_str(name)
    }
}

#[derive(Debug)]
pub struct ProblemSpec {
    pub g: Matrix64,
    pub y: Matrix64,
    pub sigma_x: Matrix64,
    pub sigma_ed: Matrix64,
    pub sigma_ep: Matrix64,
    pub c: Option<Matrix64>,
    pub f: Option<Matrix64>,
    pub d: Option<Vector64>,
    pub scheme: Option<SchemeChoice>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub mc_samples: Option<usize>,
    pub tsvd_k: Option<usize>,
}

#[derive(Debug)]
pub struct SpecError(pub String);

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SpecError {}

struct RawEntry {
    line: usize,
    value: String,
}

fn parse_inline_matrix(field: &str, value: &str, ctx: &str) -> Result<Matrix64, SpecError> {
    let (dims, body) = value
        .split_once(':')
        .ok_or_else(|| SpecError(format!("{ctx}: {field}: malformed inline matrix `{value}`")))?;
    let (r, c) = dims
        .split_once(',')
        .ok_or_else(|| SpecError(format!("{ctx}: {field}: inline header must be `rows,cols:`")))?;
    let rows: usize = r
        .trim()
        .parse()
        .map_err(|_| SpecError(format!("{ctx}: {field}: bad row count `{r}`")))?;
    let cols: usize = c
        .trim()
        .parse()
        .map_err(|_| SpecError(format!("{ctx}: {field}: bad column count `{c}`")))?;
    let values: Result<Vec<f64>, _> = body
        .split([',', ' ', '\t'])
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect();
    let values =
        values.map_err(|e| SpecError(format!("{ctx}: {field}: bad inline number: {e}")))?;
    if values.len() != rows * cols {
        return Err(SpecError(format!(
            "{ctx}: {field}: inline matrix needs {} values, found {}",
            rows * cols,
            values.len()
        )));
    }
    Ok(Matrix64::from_row_slice(rows, cols, &values))
}

fn load_matrix_value(
    field: &str,
    entry: &RawEntry,
    base: &Path,
    spec_path: &Path,
) -> Result<Matrix64, SpecError> {
    let ctx = format!("{}:{}", spec_path.display(), entry.line);
    if entry.value.contains(':') {
        parse_inline_matrix(field, &entry.value, &ctx)
    } else {
        let path = base.join(&entry.value);
        matfile::read_matrix(&path).map_err(|e| SpecError(format!("{ctx}: {field}: {e}")))
    }
}

fn load_dataset(entry: &RawEntry, base: &Path, spec_path: &Path) -> Result<Vector64, SpecError> {
    let ctx = format!("{}:{}", spec_path.display(), entry.line);
    let tokens: Vec<&str> = entry
        .value
        .split([',', ' ', '\t'])
        .filter(|t| !t.is_empty())
        .collect();
    let all_numeric = !tokens.is_empty() && tokens.iter().all(|t| t.parse::<f64>().is_ok());
    if all_numeric {
        let values: Vec<f64> = tokens.iter().map(|t| t.parse().unwrap()).collect();
        return Ok(Vector64::from_vec(values));
    }
    let path = base.join(&entry.value);
    let m = matfile::read_matrix(&path).map_err(|e| SpecError(format!("{ctx}: d: {e}")))?;
    if m.ncols() != 1 {
        return Err(SpecError(format!(
            "{ctx}: d: dataset file must be a single column, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(Vector64::from_fn(m.nrows(), |i, _| m[(i, 0)]))
}

pub fn load(spec_path: &Path) -> Result<ProblemSpec, SpecError> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| SpecError(format!("{}: cannot read: {e}", spec_path.display())))?;
    let base = spec_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut entries: BTreeMap<String, RawEntry> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw_line.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            SpecError(format!(
                "{}:{line_no}: expected `key = value`, got `{line}`",
                spec_path.display()
            ))
        })?;
        let key = key.trim().to_lowercase();
        entries.insert(
            key,
            RawEntry {
                line: line_no,
                value: value.trim().to_string(),
            },
        );
    }

    let known = [
        "g", "y", "sigma_x", "sigma_ed", "sigma_ep", "c", "f", "d", "scheme", "tol", "seed",
        "mc_samples", "tsvd_k",
    ];
    for key in entries.keys() {
        if !known.contains(&key.as_str()) {
            return Err(SpecError(format!(
                "{}:{}: unknown key `{key}`",
                spec_path.display(),
                entries[key].line
            )));
        }
    }

    let require = |field: &str| -> Result<&RawEntry, SpecError> {
        entries.get(field).ok_or_else(|| {
            SpecError(format!(
                "{}: missing required field `{field}`",
                spec_path.display()
            ))
        })
    };
    let load_required =
        |field: &str| -> Result<Matrix64, SpecError> {
            load_matrix_value(field, require(field)?, &base, spec_path)
        };
    let load_optional = |field: &str| -> Result<Option<Matrix64>, SpecError> {
        entries
            .get(field)
            .map(|e| load_matrix_value(field, e, &base, spec_path))
            .transpose()
    };

    let scheme = entries
        .get("scheme")
        .map(|e| {
            let ctx = format!("{}:{}", spec_path.display(), e.line);
            match e.value.to_lowercase().as_str() {
                "optimal" => Ok(SchemeChoice::Optimal),
                "naive" => Ok(SchemeChoice::Naive),
                "compensated" => Ok(SchemeChoice::Compensated),
                "data-driven" | "data_driven" => Ok(SchemeChoice::DataDriven),
                other => Err(SpecError(format!("{ctx}: unknown scheme `{other}`"))),
            }
        })
        .transpose()?;
    let parse_scalar = |field: &str| -> Result<Option<f64>, SpecError> {
        entries
            .get(field)
            .map(|e| {
                e.value.parse::<f64>().map_err(|_| {
                    SpecError(format!(
                        "{}:{}: {field}: bad number `{}`",
                        spec_path.display(),
                        e.line,
                        e.value
                    ))
                })
            })
            .transpose()
    };
    let parse_count = |field: &str| -> Result<Option<usize>, SpecError> {
        entries
            .get(field)
            .map(|e| {
                e.value.parse::<usize>().map_err(|_| {
                    SpecError(format!(
                        "{}:{}: {field}: bad count `{}`",
                        spec_path.display(),
                        e.line,
                        e.value
                    ))
                })
            })
            .transpose()
    };

    Ok(ProblemSpec {
        g: load_required("g")?,
        y: load_required("y")?,
        sigma_x: load_required("sigma_x")?,
        sigma_ed: load_required("sigma_ed")?,
        sigma_ep: load_required("sigma_ep")?,
        c: load_optional("c")?,
        f: load_optional("f")?,
        d: entries
            .get("d")
            .map(|e| load_dataset(e, &base, spec_path))
            .transpose()?,
        scheme,
        tol: parse_scalar("tol")?,
        seed: parse_count("seed")?.map(|s| s as u64),
        mc_samples: parse_count("mc_samples")?,
        tsvd_k: parse_count("tsvd_k")?,
    })
}

impl ProblemSpec {
    pub fn build_model(&self) -> Result<HighFidelityModel<f64>, simplecal::Error> {
        HighFidelityModel::new(
            self.g.clone(),
            self.y.clone(),
            self.sigma_x.clone(),
            self.sigma_ed.clone(),
            self.sigma_ep.clone(),
        )
    }
}
