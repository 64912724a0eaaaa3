use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};
use crate::linalg::Matrix;

use super::discretize::{discretize_column, Binning};
use super::{Dataset, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub target: String,
    pub sensitive: String,
    /// `None` uses every other column.
    #[serde(default)]
    pub features: Option<Vec<String>>,
    /// Equal-frequency bins for a continuous sensitive column.
    #[serde(default)]
    pub sensitive_bins: Option<usize>,
}

impl CsvSchema {
    pub fn new(target: &str, sensitive: &str) -> Self {
        CsvSchema { target: target.into(), sensitive: sensitive.into(), features: None, sensitive_bins: None }
    }
}

/// Index → original string label, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelMap {
    pub labels: Vec<String>,
}

impl LabelMap {
    pub fn fit(values: &[String]) -> Self {
        LabelMap { labels: values.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect() }
    }

    pub fn encode(&self, values: &[String]) -> Vec<u32> {
        values.iter().map(|v| self.labels.binary_search(v).expect("value seen while fitting") as u32).collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub(crate) struct RawTable {
    pub headers: Vec<String>,
    pub records: Vec<csv::StringRecord>,
}

pub(crate) fn read_table(path: &Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(FateError::EmptyFile);
    }
    let records = reader.records().collect::<std::result::Result<Vec<_>, _>>()?;
    if records.is_empty() {
        return Err(FateError::EmptyFile);
    }
    Ok(RawTable { headers, records })
}

impl RawTable {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| FateError::MissingColumn(name.into()))
    }

    pub fn strings(&self, col: usize) -> Vec<String> {
        self.records.iter().map(|r| r.get(col).unwrap_or("").trim().to_string()).collect()
    }

    pub fn reals(&self, col: usize) -> Result<Vec<f64>> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r.get(col).unwrap_or("").trim();
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    Ok(_) => Err(self.parse_error(i, col, format!("non-finite value `{cell}`"))),
                    Err(e) => Err(self.parse_error(i, col, format!("`{cell}`: {e}"))),
                }
            })
            .collect()
    }

    fn parse_error(&self, record: usize, col: usize, message: String) -> FateError {
        FateError::Parse { row: record + 1, column: self.headers[col].clone(), message }
    }
}

/// Reads a comma-separated file with a header row. Data rows are numbered
/// from 1 in parse errors.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let table = read_table(path)?;
    let target_col = table.column_index(&schema.target)?;
    let sensitive_col = table.column_index(&schema.sensitive)?;
    let feature_cols: Vec<usize> = match &schema.features {
        Some(names) => names.iter().map(|n| table.column_index(n)).collect::<Result<_>>()?,
        None => (0..table.headers.len()).filter(|&j| j != target_col && j != sensitive_col).collect(),
    };
    if feature_cols.is_empty() {
        return Err(FateError::MissingColumn("no feature columns".into()));
    }
    let n = table.records.len();
    let mut x = Matrix::zeros(n, feature_cols.len());
    for (j, &col) in feature_cols.iter().enumerate() {
        x.set_column(j, &table.reals(col)?);
    }
    let target_raw = table.strings(target_col);
    let target_map = LabelMap::fit(&target_raw);
    let y = target_map.encode(&target_raw);

    let (s, sensitive_map, sensitive_edges) = match schema.sensitive_bins {
        Some(bins) => {
            let d = discretize_column(&table.reals(sensitive_col)?, &Binning::Count(bins))?;
            let labels = (0..=d.edges.len()).map(|k| k.to_string()).collect();
            (d.codes, LabelMap { labels }, Some(d.edges))
        }
        None => {
            let raw = table.strings(sensitive_col);
            let map = LabelMap::fit(&raw);
            (map.encode(&raw), map, None)
        }
    };
    let names = feature_cols.iter().map(|&j| table.headers[j].clone()).collect();
    let (c_y, c_s) = (target_map.len(), sensitive_map.len());
    Dataset::with_classes(
        x,
        y,
        s,
        c_y,
        c_s,
        names,
        Provenance::Csv { path: path.display().to_string(), target_map, sensitive_map, sensitive_edges },
    )
}

/// Writes features followed by `y` and `s` code columns.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    let mut header = dataset.feature_names.join(",");
    header.push_str(",y,s\n");
    out.write_all(header.as_bytes())?;
    for i in 0..dataset.len() {
        let mut line = String::new();
        for v in dataset.x.row(i) {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&format!("{},{}\n", dataset.y[i], dataset.s[i]));
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_three_rows() {
        let f = file("x0,x1,y,s\n1.5,2,1,0\n-3,4e-1,0,1\n0,0,1,1\n");
        let d = load_csv(f.path(), &CsvSchema::new("y", "s")).unwrap();
        assert_eq!((d.len(), d.dim()), (3, 2));
        assert_eq!(d.x.row(1), &[-3.0, 0.4]);
        assert_eq!(d.y, vec![1, 0, 1]);
        assert_eq!(d.feature_names, vec!["x0", "x1"]);
    }

    #[test]
    fn string_labels_are_mapped_lexicographically() {
        let f = file("f,label,group\n1,b,m\n2,a,f\n3,b,f\n");
        let d = load_csv(f.path(), &CsvSchema::new("label", "group")).unwrap();
        assert_eq!(d.y, vec![1, 0, 1]);
        assert_eq!(d.s, vec![1, 0, 0]);
        match &d.provenance {
            Provenance::Csv { target_map, .. } => assert_eq!(target_map.labels, vec!["a", "b"]),
            other => panic!("unexpected provenance {other:?}"),
        }
    }

    #[test]
    fn error_paths() {
        let f = file("x0,y\n1,0\n");
        assert!(matches!(load_csv(f.path(), &CsvSchema::new("y", "s")), Err(FateError::MissingColumn(c)) if c == "s"));
        let f = file("x0,y,s\n1,0,0\nabc,1,1\n");
        match load_csv(f.path(), &CsvSchema::new("y", "s")) {
            Err(FateError::Parse { row, column, .. }) => assert_eq!((row, column.as_str()), (2, "x0")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(load_csv(file("").path(), &CsvSchema::new("y", "s")), Err(FateError::EmptyFile)));
        assert!(matches!(load_csv(file("x0,y,s\n").path(), &CsvSchema::new("y", "s")), Err(FateError::EmptyFile)));
        assert_eq!(load_csv("/nonexistent/file.csv", &CsvSchema::new("y", "s")).unwrap_err().kind(), "IoError");
    }

    #[test]
    fn binned_sensitive_column_and_round_trip() {
        let mut text = String::from("x,y,age\n");
        for i in 0..8 {
            text.push_str(&format!("{},{},{}\n", i as f64 * 0.1, i % 2, 20 + i));
        }
        let f = file(&text);
        let schema = CsvSchema { sensitive_bins: Some(2), ..CsvSchema::new("y", "age") };
        let d = load_csv(f.path(), &schema).unwrap();
        assert_eq!(d.s, vec![0, 0, 0, 0, 1, 1, 1, 1]);

        let out = tempfile::NamedTempFile::new().unwrap();
        write_csv(&d, out.path()).unwrap();
        let back = load_csv(out.path(), &CsvSchema::new("y", "s")).unwrap();
        assert_eq!(back.x, d.x);
        assert_eq!((back.y, back.s), (d.y, d.s));
    }
}
