//! Delimited rating files in, predictions and recommendation lists out.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::RatingTriple;

/// Describes how to read a delimited rating file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFileSpec {
    pub delimiter: char,
    pub has_header: bool,
    pub user_col: usize,
    pub item_col: usize,
    pub rating_col: usize,
}

impl Default for DataFileSpec {
    /// MovieLens `u.data` layout: tab separated, no header, columns 0/1/2.
    fn default() -> Self {
        DataFileSpec {
            delimiter: '\t',
            has_header: false,
            user_col: 0,
            item_col: 1,
            rating_col: 2,
        }
    }
}

impl DataFileSpec {
    pub fn csv() -> Self {
        DataFileSpec {
            delimiter: ',',
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (u, i, r) = (self.user_col, self.item_col, self.rating_col);
        if u == i || u == r || i == r {
            return Err(Error::InvalidSpec(format!(
                "user, item and rating columns must differ (got {u}, {i}, {r})"
            )));
        }
        if !self.delimiter.is_ascii() || self.delimiter == '\n' || self.delimiter == '\r' {
            return Err(Error::InvalidSpec(format!(
                "delimiter {:?} must be a single ASCII character other than a line break",
                self.delimiter
            )));
        }
        Ok(())
    }

    fn width(&self) -> usize {
        self.user_col.max(self.item_col).max(self.rating_col) + 1
    }
}

/// Output encoding for predictions and recommendation lists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Txt,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "txt" => Ok(OutputFormat::Txt),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown output format {other:?} (expected txt or json)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRecord {
    pub user: String,
    pub item: String,
    pub predicted: f64,
    pub actual: Option<f64>,
}

/// Ranked items for one user, best first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationList {
    pub user: String,
    pub items: Vec<String>,
}

/// Reads rating triples from a delimited text file.
pub fn parse_ratings(path: impl AsRef<Path>, spec: &DataFileSpec) -> Result<Vec<RatingTriple>> {
    let path = path.as_ref();
    let file =
        File::open(path).map_err(|e| Error::io(format!("cannot open {}", path.display()), e))?;
    parse_reader(file, path, spec)
}

/// Same as [`parse_ratings`] over any reader; `origin` labels error messages.
pub fn parse_reader<R: std::io::Read>(
    reader: R,
    origin: &Path,
    spec: &DataFileSpec,
) -> Result<Vec<RatingTriple>> {
    spec.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter as u8)
        .has_headers(spec.has_header)
        .flexible(true)
        .quoting(false)
        .from_reader(reader);
    let width = spec.width();
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                return Err(match e.into_kind() {
                    csv::ErrorKind::Io(io) => {
                        Error::io(format!("reading {}", origin.display()), io)
                    }
                    other => Error::io(
                        format!("reading {}", origin.display()),
                        std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
                    ),
                })
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() < width {
            return Err(Error::MalformedLine {
                path: origin.to_owned(),
                line,
                expected: width,
                found: record.len(),
            });
        }
        let text = record[spec.rating_col].trim();
        let rating = text
            .parse::<f64>()
            .ok()
            .filter(|r| r.is_finite())
            .ok_or_else(|| Error::RatingParse {
                path: origin.to_owned(),
                line,
                text: text.to_owned(),
            })?;
        let triple = RatingTriple::new(
            record[spec.user_col].trim(),
            record[spec.item_col].trim(),
            rating,
        );
        triple
            .validate()
            .map_err(|e| Error::InvalidTriple(format!("{}:{line}: {e}", origin.display())))?;
        out.push(triple);
    }
    Ok(out)
}

/// Writes triples in the column layout described by `spec` (other columns left empty).
pub fn write_ratings(
    triples: &[RatingTriple],
    path: impl AsRef<Path>,
    spec: &DataFileSpec,
) -> Result<()> {
    spec.validate()?;
    let mut out = create(path.as_ref())?;
    let delim = spec.delimiter.to_string();
    let wrap = |e| Error::io(format!("writing {}", path.as_ref().display()), e);
    if spec.has_header {
        let mut header = vec![String::new(); spec.width()];
        header[spec.user_col] = "user".into();
        header[spec.item_col] = "item".into();
        header[spec.rating_col] = "rating".into();
        writeln!(out, "{}", header.join(&delim)).map_err(wrap)?;
    }
    let mut fields = vec![String::new(); spec.width()];
    for t in triples {
        fields[spec.user_col].clone_from(&t.user);
        fields[spec.item_col].clone_from(&t.item);
        fields[spec.rating_col] = t.rating.to_string();
        writeln!(out, "{}", fields.join(&delim)).map_err(wrap)?;
    }
    out.flush().map_err(wrap)
}

pub fn write_predictions(
    records: &[PredictionRecord],
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let wrap = |e| Error::io(format!("writing {}", path.display()), e);
    match format {
        OutputFormat::Txt => {
            for r in records {
                writeln!(out, "{}\t{}\t{:.6}", r.user, r.item, r.predicted).map_err(wrap)?;
            }
        }
        OutputFormat::Json => out
            .write_all(predictions_json(records).as_bytes())
            .map_err(wrap)?,
    }
    out.flush().map_err(wrap)
}

pub fn write_recommendations(
    lists: &[RecommendationList],
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let wrap = |e| Error::io(format!("writing {}", path.display()), e);
    out.write_all(render_recommendations(lists, format).as_bytes())
        .map_err(wrap)?;
    out.flush().map_err(wrap)
}

/// Predictions as a compact json array; numbers carry six decimals.
pub fn predictions_json(records: &[PredictionRecord]) -> String {
    let mut s = String::from("[");
    for (n, r) in records.iter().enumerate() {
        if n > 0 {
            s.push(',');
        }
        s.push_str(&format!(
            "{{\"user\":{},\"item\":{},\"prediction\":{:.6}}}",
            json_string(&r.user),
            json_string(&r.item),
            r.predicted
        ));
    }
    s.push(']');
    s
}

pub fn render_recommendations(lists: &[RecommendationList], format: OutputFormat) -> String {
    match format {
        OutputFormat::Txt => lists
            .iter()
            .map(|l| format!("{}\t{}\n", l.user, l.items.join(",")))
            .collect(),
        // Field order is fixed by the struct, so this is stable.
        OutputFormat::Json => serde_json::to_string(lists).expect("string lists always serialize"),
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("cannot create {}", path.display()), e))
}
