use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::{Dataset, LabeledExample};
use crate::error::{Error, Result};

/// A CSV column addressed by header name or by 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl ColumnRef {
    fn resolve(&self, header: &csv::StringRecord) -> Result<usize> {
        match self {
            ColumnRef::Name(name) => header
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.clone())),
            ColumnRef::Index(i) if *i < header.len() => Ok(*i),
            ColumnRef::Index(i) => Err(Error::MissingColumn(format!("#{i}"))),
        }
    }
}

/// All-digit strings are positions, everything else is a header name.
impl FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Name(n) => f.write_str(n),
            ColumnRef::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Which columns hold the label and the optional recording id. Every other
/// column is a feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub label: ColumnRef,
    pub recording: Option<ColumnRef>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            label: ColumnRef::Name("label".into()),
            recording: None,
        }
    }
}

/// Raw parsed CSV contents before label remapping.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Raw integer labels, present when the label column exists.
    pub labels: Option<Vec<i64>>,
    pub recording_ids: Option<Vec<String>>,
}

/// Parses a headed CSV. When `require_label` is false a missing label
/// column is tolerated and `labels` is `None`.
pub fn read_table<R: Read>(
    reader: R,
    schema: &CsvSchema,
    require_label: bool,
) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();

    let label_col = match schema.label.resolve(&header) {
        Ok(i) => Some(i),
        Err(e) if require_label => return Err(e),
        Err(_) => None,
    };
    let recording_col = schema
        .recording
        .as_ref()
        .map(|c| c.resolve(&header))
        .transpose()?;
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|i| Some(*i) != label_col && Some(*i) != recording_col)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::param("CSV has no feature columns"));
    }
    let feature_names = feature_cols
        .iter()
        .map(|&i| header[i].trim().to_string())
        .collect();

    let mut rows = Vec::new();
    let mut labels = label_col.map(|_| Vec::new());
    let mut recording_ids = recording_col.map(|_| Vec::new());
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: line,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut features = Vec::with_capacity(feature_cols.len());
        for &i in &feature_cols {
            let cell = record[i].trim();
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumericCell {
                    row: line,
                    column: header[i].trim().to_string(),
                    value: cell.to_string(),
                })?;
            features.push(value);
        }
        rows.push(features);
        if let (Some(col), Some(labels)) = (label_col, labels.as_mut()) {
            let cell = record[col].trim();
            let label = cell.parse::<i64>().map_err(|_| Error::InvalidLabel {
                row: line,
                value: cell.to_string(),
            })?;
            labels.push(label);
        }
        if let (Some(col), Some(ids)) = (recording_col, recording_ids.as_mut()) {
            ids.push(record[col].trim().to_string());
        }
    }
    Ok(FeatureTable {
        feature_names,
        rows,
        labels,
        recording_ids,
    })
}

/// Reads a labeled dataset. Distinct labels are remapped in ascending order
/// onto `1..=r`; the original values are kept in [`Dataset::class_labels`].
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let table = read_table(reader, schema, true)?;
    let raw_labels = table.labels.expect("label column required");
    let distinct: Vec<i64> = raw_labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if distinct.len() < 2 {
        return Err(Error::TooFewClasses(distinct.len()));
    }
    let m = table.feature_names.len();
    let mut ids = table.recording_ids.map(Vec::into_iter);
    let examples = table
        .rows
        .into_iter()
        .zip(&raw_labels)
        .map(|(features, raw)| LabeledExample {
            features,
            label: distinct.binary_search(raw).expect("label collected above") + 1,
            recording_id: ids.as_mut().and_then(Iterator::next),
        })
        .collect();
    Dataset::new(examples, m, distinct.len())?
        .with_feature_names(table.feature_names)?
        .with_class_labels(distinct)
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), schema)
}

/// Writes the canonical schema: feature columns, `label` (original label
/// values), then `recording` when any example carries an id. Values use the
/// shortest decimal form that parses back to the identical `f64`.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let with_recordings = ds.has_recordings();
    let mut header = ds.feature_names_or_default();
    header.push("label".into());
    if with_recordings {
        header.push("recording".into());
    }
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for ex in ds.examples() {
        record.clear();
        record.extend(ex.features.iter().map(|v| v.to_string()));
        record.push(ds.class_labels()[ex.label - 1].to_string());
        if with_recordings {
            record.push(ex.recording_id.clone().unwrap_or_default());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(ds, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SynthSpec};
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), &CsvSchema::default())
    }

    #[test]
    fn small_csv() {
        let ds = parse("a,b,c,label\n1,2,3,1\n4,5,6,1\n7,8,9,2\n1,1,1,2\n").unwrap();
        assert_eq!((ds.n_features(), ds.n_classes(), ds.len()), (3, 2, 4));
        assert_eq!(ds.feature_names().unwrap(), ["a", "b", "c"]);
        assert_eq!(ds.examples()[2].features, vec![7.0, 8.0, 9.0]);
    }

    #[test]
    fn labels_remapped() {
        let ds = parse("x,label\n0.5,7\n1.5,3\n2.5,7\n").unwrap();
        assert_eq!(ds.class_labels(), [3, 7]);
        let labels: Vec<usize> = ds.examples().iter().map(|e| e.label).collect();
        assert_eq!(labels, [2, 1, 2]);
    }

    #[test]
    fn label_column_by_index_and_recording() {
        let schema = CsvSchema {
            label: ColumnRef::Index(0),
            recording: Some(ColumnRef::Name("rec".into())),
        };
        let ds = read_csv("y,rec,f\n1,a,0.1\n2,b,0.2\n".as_bytes(), &schema).unwrap();
        assert_eq!(ds.n_features(), 1);
        assert_eq!(ds.examples()[1].recording_id.as_deref(), Some("b"));
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            parse("x,label\nabc,1\n1,2\n"),
            Err(Error::NonNumericCell { row: 2, .. })
        ));
        assert!(matches!(
            parse("x,label\n1,1\n2\n"),
            Err(Error::RaggedRow { .. })
        ));
        assert!(matches!(
            parse("x,label\n1,1\n2,1\n"),
            Err(Error::TooFewClasses(1))
        ));
        assert!(matches!(
            parse("x,label\n1,one\n"),
            Err(Error::InvalidLabel { .. })
        ));
        assert!(matches!(parse("x,y\n1,1\n"), Err(Error::MissingColumn(_))));
        assert!(matches!(
            load_csv("/nonexistent/file.csv", &CsvSchema::default()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn unlabeled_table() {
        let t = read_table("a,b\n1,2\n".as_bytes(), &CsvSchema::default(), false).unwrap();
        assert!(t.labels.is_none());
        assert_eq!(t.rows, vec![vec![1.0, 2.0]]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn write_then_read_is_identity(seed in any::<u64>(), r in 2usize..5, m in 1usize..6, rec in any::<bool>()) {
            let spec = SynthSpec {
                classes: r,
                features: m,
                per_class: 7,
                overlap: 1.5,
                noise_features: 0,
                seed,
                segments_per_recording: rec.then_some(3),
            };
            let ds = generate_synthetic(&spec).unwrap();
            let mut buf = Vec::new();
            write_csv(&ds, &mut buf).unwrap();
            let schema = CsvSchema {
                label: ColumnRef::Name("label".into()),
                recording: rec.then(|| ColumnRef::Name("recording".into())),
            };
            let back = read_csv(buf.as_slice(), &schema).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
