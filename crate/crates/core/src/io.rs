//! File formats: game JSON, model JSON, polynomial JSON, background CSV,
//! instance vectors, attribution CSV and the JSONL axiom report.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::axioms::AxiomReport;
use crate::error::{Error, Result};
use crate::game::{Attribution, VectorGame};
use crate::gaussian::{GaussianInput, LinearPredictor};
use crate::predictor::{BackgroundSample, PolynomialPredictor, Predictor, Term};

/// `{"n": .., "m": .., "values": {"<mask>": [m floats], ..}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub values: BTreeMap<String, Vec<f64>>,
}

impl GameFile {
    pub fn into_game(self) -> Result<VectorGame> {
        let mut entries = Vec::with_capacity(self.values.len());
        for (key, value) in self.values {
            let mask: u32 = key
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("coalition key {key:?} is not a decimal mask")))?;
            entries.push((mask, value));
        }
        VectorGame::from_entries(self.n, self.m, &entries)
    }

    /// Lists every coalition whose value is not the zero vector.
    pub fn from_game(v: &VectorGame) -> Self {
        let mut values = BTreeMap::new();
        for mask in 1..v.num_coalitions() as u32 {
            let x = v.value(mask);
            if x.iter().any(|&c| c != 0.0) {
                values.insert(mask.to_string(), x.to_vec());
            }
        }
        Self { n: v.n(), m: v.m(), values }
    }
}

pub fn parse_game(text: &str) -> Result<VectorGame> {
    serde_json::from_str::<GameFile>(text)?.into_game()
}

pub fn read_game(path: impl AsRef<Path>) -> Result<VectorGame> {
    parse_game(&fs::read_to_string(path)?)
}

pub fn game_to_json(v: &VectorGame) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GameFile::from_game(v))?)
}

/// `{"b0": [m], "B": [[m] × n], "mu": [n], "sigma": [[n] × n]}`; `mu` and
/// `sigma` are only needed for the Gaussian paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub b0: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
}

impl ModelFile {
    pub fn predictor(&self) -> Result<LinearPredictor> {
        LinearPredictor::from_rows(self.b0.clone(), &self.b)
    }

    pub fn gaussian(&self) -> Result<GaussianInput> {
        match (&self.mu, &self.sigma) {
            (Some(mu), Some(sigma)) => GaussianInput::from_rows(mu.clone(), sigma),
            _ => Err(Error::Format("model file needs \"mu\" and \"sigma\" for the Gaussian path".into())),
        }
    }

    pub fn from_parts(p: &LinearPredictor, g: Option<&GaussianInput>) -> Self {
        let rows = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        };
        Self {
            b0: p.intercept().as_slice().to_vec(),
            b: rows(p.coefficients()),
            mu: g.map(|g| g.mu().as_slice().to_vec()),
            sigma: g.map(|g| rows(g.sigma())),
        }
    }
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Polynomial JSON: one list of `{coeff, exponents}` terms per output.
pub fn parse_polynomial(text: &str) -> Result<PolynomialPredictor> {
    PolynomialPredictor::from_terms(serde_json::from_str::<Vec<Vec<Term>>>(text)?)
}

pub fn polynomial_to_json(p: &PolynomialPredictor) -> Result<String> {
    Ok(serde_json::to_string_pretty(p.outputs())?)
}

/// A predictor loaded from disk: a linear model object or a polynomial list.
pub enum PredictorFile {
    Linear(LinearPredictor),
    Polynomial(PolynomialPredictor),
}

impl PredictorFile {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value {
            serde_json::Value::Array(_) => {
                let terms: Vec<Vec<Term>> = serde_json::from_value(value)?;
                Ok(Self::Polynomial(PolynomialPredictor::from_terms(terms)?))
            }
            serde_json::Value::Object(_) => {
                let model: ModelFile = serde_json::from_value(value)?;
                Ok(Self::Linear(model.predictor()?))
            }
            _ => Err(Error::Format("predictor file must be a model object or a polynomial term list".into())),
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn as_predictor(&self) -> &dyn Predictor {
        match self {
            Self::Linear(p) => p,
            Self::Polynomial(p) => p,
        }
    }
}

fn parse_float(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: {field:?} is not a number")))
}

/// Background CSV: a header row of column names, then one observation per line.
pub fn parse_background<R: Read>(reader: R) -> Result<BackgroundSample> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let columns: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();
    let mut values = Vec::new();
    for (idx, record) in csv.records().enumerate() {
        let record = record?;
        if record.len() != columns.len() {
            return Err(Error::Format(format!("row {} has {} fields, header has {}", idx + 2, record.len(), columns.len())));
        }
        for field in record.iter() {
            values.push(parse_float(field, idx + 2)?);
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyBackground);
    }
    BackgroundSample::new(columns.len(), values, Some(columns))
}

pub fn read_background(path: impl AsRef<Path>) -> Result<BackgroundSample> {
    parse_background(fs::File::open(path)?)
}

/// An instance as a JSON array or a single CSV row (optionally under a header).
pub fn parse_instance(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    let rows: Vec<&str> = trimmed.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    let parse_row = |line: &str, idx: usize| -> Result<Vec<f64>> { line.split(',').map(|f| parse_float(f, idx)).collect() };
    match rows.as_slice() {
        [row] => parse_row(row, 1),
        [header, row] if parse_row(header, 1).is_err() => {
            let x = parse_row(row, 2)?;
            if header.split(',').count() != x.len() {
                return Err(Error::Format("instance header and row differ in length".into()));
            }
            Ok(x)
        }
        _ => Err(Error::Format("instance CSV must contain exactly one data row".into())),
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_instance(&fs::read_to_string(path)?)
}

/// Metadata carried by an attribution CSV besides the numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributionMeta {
    pub features: Vec<String>,
    /// `key: value` comment lines, in file order.
    pub comments: Vec<(String, String)>,
}

impl AttributionMeta {
    pub fn comment(&self, key: &str) -> Option<&str> {
        self.comments.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn sum_check(&self) -> Option<f64> {
        self.comment("sum_check")?.parse().ok()
    }
}

/// Writes `feature,out_0,..,out_{m-1}` rows with leading `# key: value`
/// comments and a trailing `# sum_check: <residual>` line.
pub fn write_attribution_csv<W: Write>(
    mut w: W,
    a: &Attribution,
    features: Option<&[String]>,
    header_comments: &[(&str, String)],
    sum_check: f64,
) -> Result<()> {
    for (key, value) in header_comments {
        writeln!(w, "# {key}: {value}")?;
    }
    let outputs: Vec<String> = (0..a.m()).map(|k| format!("out_{k}")).collect();
    writeln!(w, "feature,{}", outputs.join(","))?;
    for (i, row) in a.rows().enumerate() {
        let name = features.and_then(|f| f.get(i)).cloned().unwrap_or_else(|| i.to_string());
        if name.contains([',', '\n', '#']) {
            return Err(Error::Format(format!("feature name {name:?} cannot be written to CSV")));
        }
        let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        writeln!(w, "{name},{}", cells.join(","))?;
    }
    writeln!(w, "# sum_check: {sum_check:?}")?;
    Ok(())
}

pub fn attribution_csv_string(
    a: &Attribution,
    features: Option<&[String]>,
    header_comments: &[(&str, String)],
    sum_check: f64,
) -> String {
    let mut buf = Vec::new();
    write_attribution_csv(&mut buf, a, features, header_comments, sum_check).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn parse_attribution_csv<R: Read>(reader: R) -> Result<(Attribution, AttributionMeta)> {
    let mut meta = AttributionMeta::default();
    let mut m = None;
    let mut payoff = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once(':') {
                meta.comments.push((k.trim().to_owned(), v.trim().to_owned()));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match m {
            None => {
                let ok = fields[0] == "feature"
                    && fields.len() >= 2
                    && fields[1..].iter().enumerate().all(|(k, f)| *f == format!("out_{k}"));
                if !ok {
                    return Err(Error::Format(format!("line {}: expected header feature,out_0,..", idx + 1)));
                }
                m = Some(fields.len() - 1);
            }
            Some(m) => {
                if fields.len() != m + 1 {
                    return Err(Error::Format(format!("line {}: expected {} fields", idx + 1, m + 1)));
                }
                meta.features.push(fields[0].to_owned());
                for f in &fields[1..] {
                    payoff.push(parse_float(f, idx + 1)?);
                }
            }
        }
    }
    let m = m.ok_or_else(|| Error::Format("attribution CSV has no header".into()))?;
    let a = Attribution::from_flat(meta.features.len(), m, payoff)?;
    Ok((a, meta))
}

pub fn read_attribution_csv(path: impl AsRef<Path>) -> Result<(Attribution, AttributionMeta)> {
    parse_attribution_csv(fs::File::open(path)?)
}

/// One JSON object per (trial, axiom) record.
pub fn write_report_jsonl<W: Write>(mut w: W, reports: &[AxiomReport]) -> Result<()> {
    for report in reports {
        for line in report.lines() {
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}
