//! CSV interchange format.
//!
//! A file has a header row. The last column is the `Class` label (0 or 1),
//! an optional leading `row_id` column carries row identities between
//! pipeline stages, and every other column is a numeric feature. A file whose
//! first feature is `Time` must carry exactly the 30 feature columns of the
//! public card-transaction dataset.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use fraudlab_core::dataset::{transaction_feature_names, LABEL_COLUMN};
use fraudlab_core::{Dataset, RowId, ScalerParams, TrainedModel};
use serde::{Deserialize, Serialize};

use crate::error::{Context, Error, Result};

pub const ROW_ID_COLUMN: &str = "row_id";

type CoreError = fraudlab_core::Error;

struct Header {
    has_row_id: bool,
    features: Vec<String>,
}

fn parse_header(record: &csv::StringRecord) -> Result<Header, CoreError> {
    let cols: Vec<String> = record.iter().map(|c| c.trim().to_string()).collect();
    let has_row_id = cols.first().is_some_and(|c| c == ROW_ID_COLUMN);
    let body = &cols[usize::from(has_row_id)..];
    match body.last() {
        Some(last) if last == LABEL_COLUMN => {}
        Some(last) => {
            return Err(CoreError::Schema(format!(
                "the last column must be `{LABEL_COLUMN}`, found `{last}`"
            )))
        }
        None => return Err(CoreError::Schema("header has no columns".into())),
    }
    let features = body[..body.len() - 1].to_vec();
    if features.is_empty() {
        return Err(CoreError::Schema("no feature columns".into()));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = features.iter().find(|c| !seen.insert(c.as_str())) {
        return Err(CoreError::Schema(format!("duplicate column `{dup}`")));
    }
    if features
        .iter()
        .any(|c| c == ROW_ID_COLUMN || c == LABEL_COLUMN)
    {
        return Err(CoreError::Schema(format!(
            "`{ROW_ID_COLUMN}` and `{LABEL_COLUMN}` may each appear only once, in their fixed positions"
        )));
    }
    if features[0] == "Time" {
        let expected = transaction_feature_names();
        if features != expected {
            let at = features
                .iter()
                .zip(&expected)
                .position(|(a, b)| a != b)
                .unwrap_or(features.len().min(expected.len()));
            return Err(CoreError::Schema(format!(
                "transaction file must have columns Time, V1..V28, Amount, Class; mismatch at feature {} (expected `{}`, found `{}`)",
                at + 1,
                expected.get(at).map_or("<end>", String::as_str),
                features.get(at).map_or("<end>", String::as_str),
            )));
        }
    }
    Ok(Header {
        has_row_id,
        features,
    })
}

fn parse_label(field: &str, row: usize) -> Result<u8, CoreError> {
    match field.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(CoreError::Validation {
            row,
            message: format!("label `{other}` is not 0 or 1"),
        }),
    }
}

fn parse_value(field: &str, column: &str, row: usize) -> Result<f64, CoreError> {
    let v: f64 = field.trim().parse().map_err(|_| CoreError::Parse {
        row,
        message: format!("`{field}` in column `{column}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(CoreError::Validation {
            row,
            message: format!("non-finite value `{field}` in column `{column}`"),
        });
    }
    Ok(v)
}

/// Parses a dataset from CSV text. Row numbers in errors count data rows
/// from 1.
pub fn read_csv<R: Read>(reader: R) -> Result<Dataset, CoreError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header_record = rdr
        .headers()
        .map_err(|e| CoreError::Schema(format!("unreadable header: {e}")))?
        .clone();
    if header_record.is_empty() || (header_record.len() == 1 && header_record[0].trim().is_empty())
    {
        return Err(CoreError::EmptyDataset);
    }
    let header = parse_header(&header_record)?;
    let d = header.features.len();
    let offset = usize::from(header.has_row_id);

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CoreError::Parse {
            row,
            message: match e.kind() {
                csv::ErrorKind::UnequalLengths {
                    expected_len, len, ..
                } => {
                    format!("expected {expected_len} fields, found {len}")
                }
                _ => e.to_string(),
            },
        })?;
        if header.has_row_id {
            ids.push(
                record[0]
                    .trim()
                    .parse::<RowId>()
                    .map_err(|_| CoreError::Parse {
                        row,
                        message: format!("`{}` is not a row id", &record[0]),
                    })?,
            );
        } else {
            ids.push(RowId(i as u64));
        }
        for (j, name) in header.features.iter().enumerate() {
            features.push(parse_value(&record[offset + j], name, row)?);
        }
        labels.push(parse_label(&record[offset + d], row)?);
    }
    if labels.is_empty() {
        return Err(CoreError::EmptyDataset);
    }
    Dataset::new(header.features, features, labels, ids)
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::new(file)).context(|| format!("reading {}", path.display()))
}

/// Writes `ds` with a leading `row_id` column. Values use Rust's
/// shortest round-trip formatting, so reading the file back yields the same
/// dataset fingerprint.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = Vec::with_capacity(ds.n_features() + 2);
    header.push(ROW_ID_COLUMN.to_string());
    header.extend(ds.feature_names().iter().cloned());
    header.push(LABEL_COLUMN.to_string());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..ds.len() {
        record.clear();
        record.push(ds.row_id(i).to_string());
        record.extend(ds.row(i).iter().map(|v| format!("{v:?}")));
        record.push(ds.label(i).to_string());
        w.write_record(&record)?;
    }
    w.flush()
}

pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(ds, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub const MODEL_FORMAT: &str = "fraudlab-model";
pub const MODEL_VERSION: u32 = 1;

/// A trained model as written by `fraudlab train`: the model, plus the
/// scaler that must be applied to any data it scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub model: TrainedModel,
    pub scaler: Option<ScalerParams>,
}

impl ModelDocument {
    pub fn new(model: TrainedModel, scaler: Option<ScalerParams>) -> Self {
        ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model,
            scaler,
        }
    }
}

pub fn save_model(doc: &ModelDocument, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| Error::Internal(format!("cannot encode model: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: ModelDocument = serde_json::from_str(&text).map_err(|e| Error::Data {
        path: path.to_path_buf(),
        message: format!("not a model file: {e}"),
    })?;
    if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
        return Err(Error::Data {
            path: path.to_path_buf(),
            message: format!("unsupported model format {} v{}", doc.format, doc.version),
        });
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset, CoreError> {
        read_csv(text.as_bytes())
    }

    #[test]
    fn generic_file() {
        let ds = parse("a,b,Class\n1,2,0\n3.5,-4e2,1\n").unwrap();
        assert_eq!(ds.feature_names(), ["a", "b"]);
        assert_eq!(ds.row(1), [3.5, -400.0]);
        assert_eq!(ds.labels(), [0, 1]);
        assert_eq!(ds.row_ids(), [RowId(0), RowId(1)]);
    }

    #[test]
    fn quoted_labels_are_accepted() {
        let ds = parse("a,Class\n1,\"0\"\n2,\"1\"\n").unwrap();
        assert_eq!(ds.labels(), [0, 1]);
    }

    #[test]
    fn round_trip_keeps_fingerprint() {
        let ds = parse("row_id,a,b,Class\n7,0.1,1e-300,0\ns2,0.30000000000000004,5,1\n").unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.fingerprint(), ds.fingerprint());
        assert!(back.row_id(1).is_synthetic());
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let cases = [
            ("", "empty"),
            ("a,Class\n", "empty"),
            ("a,b\n1,0\n", "schema"),
            ("Class\n1\n", "schema"),
            ("a,a,Class\n1,2,0\n", "schema"),
            ("Time,V1,Class\n1,2,0\n", "schema"),
            ("a,Class\n1,0\n2\n", "parse"),
            ("a,Class\n1,0,9\n", "parse"),
            ("a,Class\nx,0\n", "parse"),
            ("a,Class\nNaN,0\n", "validation"),
            ("a,Class\ninf,0\n", "validation"),
            ("a,Class\n1,2\n", "validation"),
            ("a,Class\n1,yes\n", "validation"),
            ("row_id,a,Class\n1,1,0\n1,2,1\n", "precondition"),
            ("row_id,a,Class\nq,1,0\n", "parse"),
        ];
        for (text, kind) in cases {
            let err = parse(text).unwrap_err();
            let matches = match kind {
                "empty" => matches!(err, CoreError::EmptyDataset),
                "schema" => matches!(err, CoreError::Schema(_)),
                "parse" => matches!(err, CoreError::Parse { .. }),
                "validation" => matches!(err, CoreError::Validation { .. }),
                _ => matches!(err, CoreError::Precondition(_)),
            };
            assert!(matches, "{text:?}: {err}");
        }
    }

    #[test]
    fn error_rows_count_from_one() {
        let err = parse("a,Class\n1,0\n2,0\nbad,1\n").unwrap_err();
        assert!(matches!(err, CoreError::Parse { row: 3, .. }));
    }

    #[test]
    fn transaction_header() {
        let mut header: Vec<String> = transaction_feature_names();
        header.push("Class".into());
        let row: Vec<String> = (0..30)
            .map(|i| i.to_string())
            .chain(["1".to_string()])
            .collect();
        let text = format!("{}\n{}\n", header.join(","), row.join(","));
        let ds = parse(&text).unwrap();
        assert_eq!(ds.n_features(), 30);
        assert_eq!(ds.column_index("Amount"), Some(29));
    }
}
