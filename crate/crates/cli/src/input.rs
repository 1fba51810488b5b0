//! Parsing of command-line descriptors, CSV grid files and JSON inputs.

use std::fs;
use std::path::Path;

use ggconvex::extreal::parse_ln_token;
use ggconvex::gridfn::{FunctionSpec, GridFunction, LogGrid, Tails};
use ggconvex::orders::{DiscreteDistribution, Probability};
use ggconvex::riskmeasures::{
    FiniteProbSpace, MonetaryRisk, OrliczSpec, OrliczTable, PositiveRandomVariable, RiskMeasureSpec,
};
use serde::Deserialize;

use crate::CliError;

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::input(format!("{what}: `{s}` is not a number")))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// `lo:hi:n`.
pub fn parse_grid(s: &str) -> Result<LogGrid, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::input(format!("grid `{s}`: expected lo:hi:n")));
    }
    let lo = number(parts[0], "grid lower bound")?;
    let hi = number(parts[1], "grid upper bound")?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("grid point count: `{}` is not an integer", parts[2])))?;
    Ok(LogGrid::new(lo, hi, n)?)
}

/// Built-in function descriptors:
/// `exp`, `identity`, `power:A:B`, `indicator:lo:hi[:B]`, `poly:c0,c1,...`,
/// `posy:c@b,...`, `logquad:A:B:c`.
pub fn parse_descriptor(s: &str) -> Result<FunctionSpec, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let ctx = |i: usize| format!("descriptor `{s}`, field {i}");
    let want = |n: usize| -> Result<(), CliError> {
        if parts.len() == n + 1 {
            Ok(())
        } else {
            Err(CliError::input(format!(
                "descriptor `{s}`: `{}` takes {n} field(s), got {}",
                parts[0],
                parts.len() - 1
            )))
        }
    };
    let list = |field: &str, i: usize| -> Result<Vec<f64>, CliError> {
        field.split(',').map(|c| number(c, &ctx(i))).collect()
    };
    Ok(match parts[0] {
        "exp" => {
            want(0)?;
            FunctionSpec::Exp
        }
        "identity" => {
            want(0)?;
            FunctionSpec::GgAffine {
                scale: 1.0,
                exponent: 1.0,
            }
        }
        "power" => {
            want(2)?;
            FunctionSpec::GgAffine {
                scale: number(parts[1], &ctx(1))?,
                exponent: number(parts[2], &ctx(2))?,
            }
        }
        "indicator" => {
            if parts.len() != 3 {
                want(3)?;
            }
            FunctionSpec::Indicator {
                lo: number(parts[1], &ctx(1))?,
                hi: number(parts[2], &ctx(2))?,
                offset: parts.get(3).map_or(Ok(0.0), |b| number(b, &ctx(3)))?,
            }
        }
        "poly" => {
            want(1)?;
            FunctionSpec::Polynomial {
                coefficients: list(parts[1], 1)?,
            }
        }
        "posy" => {
            want(1)?;
            let terms = parts[1]
                .split(',')
                .map(|t| match t.split_once('@') {
                    Some((c, b)) => Ok((number(c, &ctx(1))?, number(b, &ctx(1))?)),
                    None => Err(CliError::input(format!("{}: term `{t}` is not c@b", ctx(1)))),
                })
                .collect::<Result<_, _>>()?;
            FunctionSpec::Posynomial { terms }
        }
        "logquad" => {
            want(3)?;
            FunctionSpec::LogQuadratic {
                scale: number(parts[1], &ctx(1))?,
                exponent: number(parts[2], &ctx(2))?,
                curvature: number(parts[3], &ctx(3))?,
            }
        }
        other => {
            return Err(CliError::input(format!(
                "descriptor `{s}`: unknown function `{other}` \
                 (expected exp, identity, power, indicator, poly, posy or logquad)"
            )))
        }
    })
}

/// Relative tolerance on `ln x` when matching CSV rows to a log-uniform grid.
const GRID_MATCH_TOL: f64 = 1e-9;

/// Reads an `x,f` CSV file. Rows must lie on a log-uniform grid; `#` lines
/// are comments. Missing samples outside the table are `+inf`.
pub fn read_grid_csv(path: &Path) -> Result<GridFunction, CliError> {
    let at = |line: u64, msg: String| CliError::input(format!("{}:{line}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        .clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "f" {
        let line = reader.position().line();
        return Err(at(
            line,
            format!(
                "expected header `x,f`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut rows: Vec<(u64, f64, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            at(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let x: f64 = record[0]
            .parse()
            .map_err(|_| at(line, format!("field x: `{}` is not a number", &record[0])))?;
        if !(x > 0.0) || !x.is_finite() {
            return Err(at(
                line,
                format!("field x: abscissa must be positive and finite, got {x}"),
            ));
        }
        let lf = parse_ln_token(&record[1]).map_err(|e| at(line, format!("field f: {e}")))?;
        rows.push((line, x, lf));
    }
    if rows.len() < 2 {
        return Err(CliError::input(format!("{}: need at least two rows", path.display())));
    }
    let grid = LogGrid::new(rows[0].1, rows[rows.len() - 1].1, rows.len())
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    for (i, (line, x, _)) in rows.iter().enumerate() {
        let t = grid.t(i);
        if (x.ln() - t).abs() > GRID_MATCH_TOL * t.abs().max(1.0) {
            return Err(at(
                *line,
                format!(
                    "field x: {x} is off the log-uniform grid through the first and last rows (expected {})",
                    grid.x(i)
                ),
            ));
        }
    }
    let logs = rows.into_iter().map(|r| r.2).collect();
    GridFunction::from_log_values(grid, logs, Tails::TRUNCATE)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// A probability given in JSON either as a number or as a decimal or
/// rational string.
#[derive(Deserialize)]
#[serde(untagged)]
enum ProbToken {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LawFile {
    atoms: Option<Vec<f64>>,
    values: Option<Vec<f64>>,
    probs: Option<Vec<ProbToken>>,
}

/// A finite law read from either JSON format: `{"atoms", "probs"}` or
/// `{"probs", "values"}`. Missing `probs` means equiprobable.
pub struct Law {
    pub values: Vec<f64>,
    pub probs: Vec<Probability>,
}

impl Law {
    pub fn distribution(&self) -> Result<DiscreteDistribution, CliError> {
        Ok(DiscreteDistribution::from_probabilities(
            self.values.clone(),
            &self.probs,
        )?)
    }

    pub fn space(&self) -> Result<(FiniteProbSpace, PositiveRandomVariable), CliError> {
        let p = FiniteProbSpace::new(self.probs.iter().map(|q| q.to_f64()).collect())?;
        Ok((p, PositiveRandomVariable::new(self.values.clone())?))
    }
}

fn json_error(origin: &str, e: serde_json::Error) -> CliError {
    CliError::input(format!("{origin}: {e}"))
}

pub fn read_law(path: &Path) -> Result<Law, CliError> {
    let origin = path.display().to_string();
    let raw: LawFile = serde_json::from_str(&read_text(path)?).map_err(|e| json_error(&origin, e))?;
    let values = match (raw.atoms, raw.values) {
        (Some(a), None) => a,
        (None, Some(v)) => v,
        _ => {
            return Err(CliError::input(format!(
                "{origin}: give exactly one of the fields `atoms` and `values`"
            )))
        }
    };
    let probs = match raw.probs {
        None => {
            let n = values.len() as u64;
            if n == 0 {
                return Err(CliError::input(format!("{origin}: field atoms: empty")));
            }
            vec![Probability::Exact(ggconvex::orders::Rational::new(1, n)); values.len()]
        }
        Some(tokens) => tokens
            .into_iter()
            .enumerate()
            .map(|(i, t)| match t {
                // shortest round-trip decimal, so a literal 0.25 stays exactly 1/4
                ProbToken::Number(v) => Ok(format!("{v}").parse().unwrap_or(Probability::Float(v))),
                ProbToken::Text(s) => s
                    .parse::<Probability>()
                    .map_err(|e| CliError::input(format!("{origin}: field probs[{i}]: {e}"))),
            })
            .collect::<Result<_, _>>()?,
    };
    if probs.len() != values.len() {
        return Err(CliError::input(format!(
            "{origin}: field probs has {} entries but there are {} values",
            probs.len(),
            values.len()
        )));
    }
    Ok(Law { values, probs })
}

/// `power:P`, `log-affine`, `exponential`, `table:x=v,x=v,...`.
pub fn parse_phi(s: &str) -> Result<OrliczSpec, CliError> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let no_args = |spec: OrliczSpec| {
        if rest.is_empty() {
            Ok(spec)
        } else {
            Err(CliError::input(format!("phi `{s}`: `{name}` takes no parameters")))
        }
    };
    match name {
        "power" => Ok(OrliczSpec::power(number(rest, &format!("phi `{s}`, exponent"))?)?),
        "log-affine" => no_args(OrliczSpec::LogAffine),
        "exponential" | "exp" => no_args(OrliczSpec::Exponential),
        "table" => {
            let knots = rest
                .split(',')
                .map(|kv| match kv.split_once('=') {
                    Some((x, v)) => Ok((number(x, "phi table")?, number(v, "phi table")?)),
                    None => Err(CliError::input(format!("phi `{s}`: knot `{kv}` is not x=value"))),
                })
                .collect::<Result<_, _>>()?;
            Ok(OrliczSpec::Table(OrliczTable::new(knots)?))
        }
        _ => Err(CliError::input(format!(
            "phi `{s}`: expected power:P, log-affine, exponential or table:x=v,..."
        ))),
    }
}

#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
enum OrliczJson {
    Power { p: f64 },
    LogAffine,
    Exponential,
    Table { knots: Vec<(f64, f64)> },
}

#[derive(Deserialize)]
#[serde(tag = "monetary", rename_all = "kebab-case", deny_unknown_fields)]
enum MonetaryJson {
    Expectation,
    Entropic { gamma: f64 },
    Avar { lambda: f64 },
    EssSup,
}

/// Law-invariant risk measures in the JSON spec format,
/// e.g. `{"kind":"orlicz","family":"power","p":2.0}`.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum SpecJson {
    GeometricMean,
    PNorm { p: f64 },
    Orlicz(OrliczJson),
    ExpAvarLog { lambda: f64 },
    ExpMonetaryLog(MonetaryJson),
}

/// Inline JSON (starting with `{`) or a path to a JSON file.
pub fn parse_spec(arg: &str) -> Result<RiskMeasureSpec, CliError> {
    let (origin, text) = if arg.trim_start().starts_with('{') {
        ("--spec".to_string(), arg.to_string())
    } else {
        (arg.to_string(), read_text(Path::new(arg))?)
    };
    let raw: SpecJson = serde_json::from_str(&text).map_err(|e| json_error(&origin, e))?;
    Ok(match raw {
        SpecJson::GeometricMean => RiskMeasureSpec::GeometricMean,
        SpecJson::PNorm { p } => RiskMeasureSpec::PNorm { p },
        SpecJson::Orlicz(o) => RiskMeasureSpec::Orlicz(match o {
            OrliczJson::Power { p } => OrliczSpec::power(p)?,
            OrliczJson::LogAffine => OrliczSpec::LogAffine,
            OrliczJson::Exponential => OrliczSpec::Exponential,
            OrliczJson::Table { knots } => OrliczSpec::Table(OrliczTable::new(knots)?),
        }),
        SpecJson::ExpAvarLog { lambda } => RiskMeasureSpec::ExpAvarLog { lambda },
        SpecJson::ExpMonetaryLog(m) => RiskMeasureSpec::ExpMonetaryLog(match m {
            MonetaryJson::Expectation => MonetaryRisk::Expectation,
            MonetaryJson::Entropic { gamma } => MonetaryRisk::Entropic { gamma },
            MonetaryJson::Avar { lambda } => MonetaryRisk::Avar { lambda },
            MonetaryJson::EssSup => MonetaryRisk::EssSup,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors() {
        assert_eq!(parse_descriptor("exp").unwrap(), FunctionSpec::Exp);
        assert_eq!(
            parse_descriptor("indicator:2:2:3").unwrap(),
            FunctionSpec::Indicator {
                lo: 2.0,
                hi: 2.0,
                offset: 3.0
            }
        );
        assert_eq!(
            parse_descriptor("posy:1@2,0.5@-1").unwrap(),
            FunctionSpec::Posynomial {
                terms: vec![(1.0, 2.0), (0.5, -1.0)]
            }
        );
        assert!(parse_descriptor("power:1").is_err());
        assert!(parse_descriptor("sin").is_err());
    }

    #[test]
    fn grids_and_phis() {
        let g = parse_grid("1e-4:1e4:2048").unwrap();
        assert_eq!(g.len(), 2048);
        assert!(parse_grid("1:2").is_err());
        assert_eq!(parse_phi("power:2").unwrap(), OrliczSpec::Power { p: 2.0 });
        assert!(parse_phi("log-affine:3").is_err());
        assert!(matches!(
            parse_phi("table:0.5=0,1=1,2=4").unwrap(),
            OrliczSpec::Table(_)
        ));
    }

    #[test]
    fn spec_json() {
        let s = parse_spec(r#"{"kind":"orlicz","family":"power","p":2.0}"#).unwrap();
        assert_eq!(s, RiskMeasureSpec::Orlicz(OrliczSpec::Power { p: 2.0 }));
        let s = parse_spec(r#"{"kind":"exp-monetary-log","monetary":"entropic","gamma":1.5}"#).unwrap();
        assert_eq!(
            s,
            RiskMeasureSpec::ExpMonetaryLog(MonetaryRisk::Entropic { gamma: 1.5 })
        );
        let e = parse_spec(r#"{"kind":"p-norm"}"#).unwrap_err();
        assert!(e.to_string().contains("missing field `p`"), "{e}");
    }
}
