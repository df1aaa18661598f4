//! Tabular ingestion: CSV → [`RawTable`] → [`EncodedDataset`].
//!
//! Rows containing a missing-value marker (`?` or an empty cell) are dropped
//! at load time. Lines starting with `|` are comments (the UCI files use one
//! as a banner). After encoding, [`normalize`] scales every column to [0, 1]
//! and divides by √d so that each row satisfies `‖x_i‖₂ ≤ 1` with
//! nonnegative entries, which is the domain every sensitivity bound assumes.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Cells treated as missing.
pub const MISSING_MARKERS: [&str; 2] = ["?", ""];

/// Slack allowed on the row-norm bound after normalization.
pub const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Rows removed because they contained a missing-value marker.
    pub dropped_rows: usize,
}

impl RawTable {
    pub fn new(column_names: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("table has no rows".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != column_names.len() {
                return Err(Error::Parse {
                    line: i as u64 + 1,
                    msg: format!("expected {} cells, found {}", column_names.len(), r.len()),
                });
            }
        }
        Ok(Self {
            column_names,
            rows,
            dropped_rows: 0,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Replace positional column names (headerless files) with real ones.
    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.column_names.len() {
            return Err(Error::Schema(format!(
                "schema names {} columns but the file has {}",
                names.len(),
                self.column_names.len()
            )));
        }
        self.column_names = names;
        Ok(self)
    }

    /// Append another table with identical columns (e.g. a train/test file pair).
    pub fn concat(mut self, other: RawTable) -> Result<Self> {
        if other.column_names != self.column_names {
            return Err(Error::Schema("cannot concatenate tables with different columns".into()));
        }
        self.rows.extend(other.rows);
        self.dropped_rows += other.dropped_rows;
        Ok(self)
    }
}

/// Load a comma-delimited file. Cells are trimmed; rows with missing
/// markers are dropped and counted in [`RawTable::dropped_rows`].
pub fn load_csv(path: &Path, has_header: bool) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, has_header)
}

/// [`load_csv`] over any reader.
pub fn parse_csv<R: Read>(reader: R, has_header: bool) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'|'))
        .from_reader(reader);

    let mut column_names: Option<Vec<String>> = if has_header {
        let h = rdr.headers().map_err(csv_err)?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut dropped = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        // A lone empty cell is a blank line the reader did not swallow.
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let width = column_names
            .get_or_insert_with(|| (0..rec.len()).map(|i| format!("c{i}")).collect())
            .len();
        if rec.len() != width {
            return Err(Error::Parse {
                line,
                msg: format!("expected {width} cells, found {}", rec.len()),
            });
        }
        if rec.iter().any(|c| MISSING_MARKERS.contains(&c)) {
            dropped += 1;
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }

    let column_names = column_names.ok_or_else(|| Error::Empty("file has no records".into()))?;
    if rows.is_empty() {
        return Err(Error::Empty("no complete rows after dropping missing values".into()));
    }
    Ok(RawTable {
        column_names,
        rows,
        dropped_rows: dropped,
    })
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

/// Maps a text column onto {0, 1}.
///
/// Values in `positive` map to 1. When `negative` is given, anything outside
/// both lists is an error; otherwise the column may hold at most two
/// distinct values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryColumn {
    pub column: String,
    pub positive: Vec<String>,
    #[serde(default)]
    pub negative: Option<Vec<String>>,
}

/// Column roles for [`encode`]. Parsed from TOML, e.g.
///
/// ```toml
/// columns = ["age", "sex", "income"]   # only for headerless files
/// has_header = false
/// label = { column = "income", positive = [">50K"] }
/// protected = { column = "sex", positive = ["Male"] }
/// features = [{ name = "age", kind = "numeric" }]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    #[serde(default)]
    pub columns: Option<Vec<String>>,
    #[serde(default)]
    pub has_header: bool,
    pub label: BinaryColumn,
    pub protected: BinaryColumn,
    pub features: Vec<FeatureSpec>,
    #[serde(default)]
    pub include_protected_in_features: bool,
    /// Append an all-ones column. It skips min-max scaling (which would zero
    /// it) but still takes part in the ÷√d step.
    #[serde(default)]
    pub add_constant: bool,
}

impl Schema {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let schema: Schema = toml::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() && !self.include_protected_in_features && !self.add_constant {
            return Err(Error::Schema("no feature columns".into()));
        }
        if self.label.column == self.protected.column {
            return Err(Error::Schema("label and protected column must differ".into()));
        }
        for f in &self.features {
            if f.name == self.label.column {
                return Err(Error::Schema(format!("label column {:?} listed as a feature", f.name)));
            }
            if f.name == self.protected.column {
                return Err(Error::Schema(format!(
                    "protected column {:?} listed as a feature; set include_protected_in_features instead",
                    f.name
                )));
            }
        }
        Ok(())
    }

    /// Load one or more files sharing this schema and concatenate them.
    pub fn load(&self, paths: &[impl AsRef<Path>]) -> Result<RawTable> {
        let mut out: Option<RawTable> = None;
        for p in paths {
            let mut t = load_csv(p.as_ref(), self.has_header)?;
            if let Some(names) = &self.columns {
                if !self.has_header {
                    t = t.with_column_names(names.clone())?;
                }
            }
            out = Some(match out {
                None => t,
                Some(acc) => acc.concat(t)?,
            });
        }
        out.ok_or_else(|| Error::Empty("no input files".into()))
    }
}

/// Encoded, binary-labelled data. `x` is row-major n×d.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub x: DMatrix<f64>,
    pub y: Vec<u8>,
    pub z: Vec<u8>,
    pub z_bar: f64,
    pub feature_names: Vec<String>,
    /// Source attribute of each encoded column (one-hot columns share one).
    pub feature_sources: Vec<String>,
}

impl EncodedDataset {
    /// Build and check label/group invariants. `feature_sources` defaults to
    /// `feature_names` when `None`.
    pub fn new(
        x: DMatrix<f64>,
        y: Vec<u8>,
        z: Vec<u8>,
        feature_names: Vec<String>,
        feature_sources: Option<Vec<String>>,
    ) -> Result<Self> {
        let (n, d) = x.shape();
        if n == 0 || d == 0 {
            return Err(Error::Empty(format!("dataset shape {n}x{d}")));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        if z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: z.len() });
        }
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: feature_names.len(),
            });
        }
        if y.iter().chain(z.iter()).any(|&v| v > 1) {
            return Err(Error::invalid("labels", "y and z must be 0/1"));
        }
        let feature_sources = feature_sources.unwrap_or_else(|| feature_names.clone());
        if feature_sources.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: feature_sources.len(),
            });
        }
        let z_bar = mean_u8(&z);
        Ok(Self {
            x,
            y,
            z,
            z_bar,
            feature_names,
            feature_sources,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    /// Rows `idx` (in that order) as a new dataset with its own `z̄`.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let x = self.x.select_rows(idx.iter());
        let y = idx.iter().map(|&i| self.y[i]).collect();
        let z = idx.iter().map(|&i| self.z[i]).collect();
        Self::new(
            x,
            y,
            z,
            self.feature_names.clone(),
            Some(self.feature_sources.clone()),
        )
    }

    /// Encoded column for `name`: an exact feature name (`race=White`) or a
    /// source attribute (`race`), which resolves to its first column.
    pub fn resolve_feature(&self, name: &str) -> Option<usize> {
        self.feature_names
            .iter()
            .position(|f| f == name)
            .or_else(|| self.feature_sources.iter().position(|f| f == name))
    }

    /// Check the normalized-domain invariant: nonnegative rows with norm ≤ 1.
    pub fn check_normalized(&self) -> Result<()> {
        for i in 0..self.n() {
            let row = self.x.row(i);
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::invalid("features", format!("row {i} has a negative or non-finite entry")));
            }
            let norm = row.norm();
            if norm > 1.0 + NORM_SLACK {
                return Err(Error::invalid("features", format!("row {i} has norm {norm} > 1")));
            }
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let mut h = Sha256::new();
        h.update((self.n() as u64).to_le_bytes());
        h.update((self.d() as u64).to_le_bytes());
        for i in 0..self.n() {
            for v in self.x.row(i).iter() {
                h.update(v.to_le_bytes());
            }
        }
        h.update(&self.y);
        h.update(&self.z);
        Fingerprint {
            n_rows: self.n(),
            d: self.d(),
            checksum: hex::encode(h.finalize()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let view = DatasetJson {
            feature_names: &self.feature_names,
            x: (0..self.n()).map(|i| self.row(i)).collect(),
            y: &self.y,
            z: &self.z,
            z_bar: self.z_bar,
        };
        Ok(serde_json::to_string_pretty(&view)?)
    }
}

#[derive(Serialize)]
struct DatasetJson<'a> {
    feature_names: &'a [String],
    x: Vec<Vec<f64>>,
    y: &'a [u8],
    z: &'a [u8],
    z_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub n_rows: usize,
    pub d: usize,
    pub checksum: String,
}

fn mean_u8(v: &[u8]) -> f64 {
    let s: u64 = v.iter().map(|&b| u64::from(b)).sum();
    s as f64 / v.len() as f64
}

fn binarize(raw: &RawTable, spec: &BinaryColumn) -> Result<Vec<u8>> {
    let j = raw
        .column_index(&spec.column)
        .ok_or_else(|| Error::Schema(format!("column {:?} not found", spec.column)))?;
    match &spec.negative {
        Some(neg) => raw
            .rows
            .iter()
            .map(|r| {
                let v = &r[j];
                if spec.positive.contains(v) {
                    Ok(1)
                } else if neg.contains(v) {
                    Ok(0)
                } else {
                    Err(Error::UnseenValue {
                        column: spec.column.clone(),
                        value: v.clone(),
                    })
                }
            })
            .collect(),
        None => {
            let mut seen: Vec<&str> = Vec::new();
            for r in &raw.rows {
                if !seen.contains(&r[j].as_str()) {
                    seen.push(&r[j]);
                    if seen.len() > 2 {
                        return Err(Error::Schema(format!(
                            "column {:?} has more than two values ({}) and no explicit negative list",
                            spec.column,
                            seen.join(", ")
                        )));
                    }
                }
            }
            Ok(raw
                .rows
                .iter()
                .map(|r| u8::from(spec.positive.contains(&r[j])))
                .collect())
        }
    }
}

/// Encode a table under `schema`. The returned `x` is NOT normalized; see
/// [`prepare`] for the full pipeline.
///
/// Categorical columns become one indicator per category in first-seen
/// order, named `column=value`.
pub fn encode(raw: &RawTable, schema: &Schema) -> Result<EncodedDataset> {
    schema.validate()?;
    let y = binarize(raw, &schema.label)?;
    let z = binarize(raw, &schema.protected)?;
    let n = raw.n_rows();

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    let mut sources = Vec::new();
    for f in &schema.features {
        let j = raw
            .column_index(&f.name)
            .ok_or_else(|| Error::Schema(format!("feature column {:?} not found", f.name)))?;
        match f.kind {
            FeatureKind::Numeric => {
                let col = raw
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        r[j].parse::<f64>().map_err(|_| Error::Parse {
                            line: i as u64 + 1,
                            msg: format!("column {:?}: {:?} is not a number", f.name, r[j]),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                columns.push(col);
                names.push(f.name.clone());
                sources.push(f.name.clone());
            }
            FeatureKind::Categorical => {
                let mut order: Vec<&str> = Vec::new();
                let mut index: HashMap<&str, usize> = HashMap::new();
                for r in &raw.rows {
                    let v = r[j].as_str();
                    if !index.contains_key(v) {
                        index.insert(v, order.len());
                        order.push(v);
                    }
                }
                let base = columns.len();
                for v in &order {
                    columns.push(vec![0.0; n]);
                    names.push(format!("{}={}", f.name, v));
                    sources.push(f.name.clone());
                }
                for (i, r) in raw.rows.iter().enumerate() {
                    columns[base + index[r[j].as_str()]][i] = 1.0;
                }
            }
        }
    }
    if schema.include_protected_in_features {
        columns.push(z.iter().map(|&v| f64::from(v)).collect());
        names.push(format!("{}={}", schema.protected.column, schema.protected.positive.join("|")));
        sources.push(schema.protected.column.clone());
    }
    if schema.add_constant {
        columns.push(vec![1.0; n]);
        names.push(CONSTANT_FEATURE.to_string());
        sources.push(CONSTANT_FEATURE.to_string());
    }

    let d = columns.len();
    let x = DMatrix::from_fn(n, d, |i, k| columns[k][i]);
    EncodedDataset::new(x, y, z, names, Some(sources))
}

/// Name given to the optional all-ones column.
pub const CONSTANT_FEATURE: &str = "(constant)";

/// Min-max scale every column to [0, 1] (constant columns become 0), then
/// divide every entry by √d.
pub fn normalize(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    normalize_except(x, &[])
}

fn normalize_except(x: &DMatrix<f64>, keep: &[usize]) -> Result<DMatrix<f64>> {
    let (_, d) = x.shape();
    if d == 0 {
        return Err(Error::Empty("matrix has no columns".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature matrix".into()));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut out = x.clone();
    for (k, mut col) in out.column_iter_mut().enumerate() {
        if keep.contains(&k) {
            col.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0) * scale);
            continue;
        }
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        if range > 0.0 {
            col.iter_mut().for_each(|v| *v = ((*v - lo) / range) * scale);
        } else {
            col.fill(0.0);
        }
    }
    Ok(out)
}

/// Replace `ds.x` with its normalized version.
pub fn normalize_dataset(mut ds: EncodedDataset) -> Result<EncodedDataset> {
    let keep: Vec<usize> = ds
        .feature_names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.as_str() == CONSTANT_FEATURE)
        .map(|(k, _)| k)
        .collect();
    ds.x = normalize_except(&ds.x, &keep)?;
    Ok(ds)
}

/// `encode` followed by `normalize`.
pub fn prepare(raw: &RawTable, schema: &Schema) -> Result<EncodedDataset> {
    normalize_dataset(encode(raw, schema)?)
}

/// Seeded shuffle split. The train part holds `⌈n·(1−f)⌉` rows.
pub fn split(ds: &EncodedDataset, test_fraction: f64, seed: u64) -> Result<(EncodedDataset, EncodedDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid("test_fraction", format!("{test_fraction} is outside (0, 1)")));
    }
    let n = ds.n();
    if n < 2 {
        return Err(Error::invalid("dataset", "need at least two rows to split"));
    }
    // Guard against 10 * 0.8 = 8.000000000000002 rounding up.
    let n_train = ((n as f64) * (1.0 - test_fraction) - 1e-9).ceil() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::invalid(
            "test_fraction",
            format!("{test_fraction} leaves an empty partition for n = {n}"),
        ));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    SeededRng::new(seed).shuffle(&mut idx);
    let train = ds.subset(&idx[..n_train])?;
    let test = ds.subset(&idx[n_train..])?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str, header: bool) -> Result<RawTable> {
        parse_csv(text.as_bytes(), header)
    }

    #[test]
    fn header_file_two_rows() {
        let t = table("a,b\n1,2\n3,4\n", true).unwrap();
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.column_names, vec!["a", "b"]);
        assert_eq!(t.dropped_rows, 0);
    }

    #[test]
    fn ragged_row_names_line() {
        let err = table("a,b\n1,2\n3,4\n5,6\n7\n", true).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn missing_markers_drop_rows() {
        let t = table("a,b\n1, ?\n2,\n3,4\n", true).unwrap();
        assert_eq!(t.n_rows(), 1);
        assert_eq!(t.dropped_rows, 2);
        assert_eq!(t.rows[0], vec!["3", "4"]);
    }

    #[test]
    fn comment_and_blank_lines_are_skipped() {
        let t = table("|banner line\n1, x\n\n2, y\n", false).unwrap();
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.column_names, vec!["c0", "c1"]);
    }

    fn schema(extra: &str) -> Schema {
        Schema::from_toml_str(&format!(
            r#"
has_header = true
label = {{ column = "y", positive = ["yes"] }}
protected = {{ column = "sex", positive = ["Female"] }}
features = [{{ name = "num", kind = "numeric" }}, {{ name = "cat", kind = "categorical" }}]
{extra}
"#
        ))
        .unwrap()
    }

    const SMALL: &str = "num,cat,sex,y\n1,a,Male,yes\n2,b,Female,no\n3,c,Female,no\n4,a,Male,yes\n";

    #[test]
    fn binary_protected_mapping() {
        let ds = encode(&table(SMALL, true).unwrap(), &schema("")).unwrap();
        assert_eq!(ds.z, vec![0, 1, 1, 0]);
        assert_eq!(ds.y, vec![1, 0, 0, 1]);
        assert_eq!(ds.z_bar, 0.5);
    }

    #[test]
    fn one_hot_three_categories() {
        let ds = encode(&table(SMALL, true).unwrap(), &schema("")).unwrap();
        assert_eq!(ds.feature_names, vec!["num", "cat=a", "cat=b", "cat=c"]);
        for i in 0..4 {
            let s: f64 = (1..4).map(|k| ds.x[(i, k)]).sum();
            assert_eq!(s, 1.0);
        }
        assert_eq!(ds.resolve_feature("cat"), Some(1));
        assert_eq!(ds.resolve_feature("cat=c"), Some(3));
        assert_eq!(ds.resolve_feature("nope"), None);
    }

    #[test]
    fn adult_style_label() {
        let text = "age,sex,income\n30,Male,>50K\n40,Female,<=50K\n50,Male,>50K.\n";
        let s = Schema::from_toml_str(
            r#"
has_header = true
label = { column = "income", positive = [">50K", ">50K."], negative = ["<=50K", "<=50K."] }
protected = { column = "sex", positive = ["Male"] }
features = [{ name = "age", kind = "numeric" }]
"#,
        )
        .unwrap();
        let ds = encode(&table(text, true).unwrap(), &s).unwrap();
        assert_eq!(ds.y, vec![1, 0, 1]);
    }

    #[test]
    fn unseen_label_value() {
        let text = "age,sex,income\n30,Male,>50K\n40,Female,maybe\n";
        let s = Schema::from_toml_str(
            r#"
has_header = true
label = { column = "income", positive = [">50K"], negative = ["<=50K"] }
protected = { column = "sex", positive = ["Male"] }
features = [{ name = "age", kind = "numeric" }]
"#,
        )
        .unwrap();
        assert!(matches!(
            encode(&table(text, true).unwrap(), &s),
            Err(Error::UnseenValue { .. })
        ));
    }

    #[test]
    fn protected_with_three_values_needs_mapping() {
        let text = "age,sex,y\n1,M,yes\n2,F,no\n3,X,no\n";
        let s = Schema::from_toml_str(
            r#"
has_header = true
label = { column = "y", positive = ["yes"] }
protected = { column = "sex", positive = ["F"] }
features = [{ name = "age", kind = "numeric" }]
"#,
        )
        .unwrap();
        assert!(matches!(encode(&table(text, true).unwrap(), &s), Err(Error::Schema(_))));
    }

    #[test]
    fn protected_excluded_unless_requested() {
        let ds = encode(&table(SMALL, true).unwrap(), &schema("include_protected_in_features = true")).unwrap();
        assert_eq!(ds.d(), 5);
        assert_eq!(ds.feature_names[4], "sex=Female");
        let col: Vec<f64> = ds.x.column(4).iter().copied().collect();
        assert_eq!(col, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn protected_listed_as_feature_is_rejected() {
        let r = Schema::from_toml_str(
            r#"
label = { column = "y", positive = ["yes"] }
protected = { column = "sex", positive = ["F"] }
features = [{ name = "sex", kind = "categorical" }]
"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn normalize_single_column() {
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 5.0, 10.0]);
        let n = normalize(&x).unwrap();
        assert_eq!(n.as_slice(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_constant_columns_collapse() {
        let x = DMatrix::from_element(2, 4, 1.0);
        assert!(normalize(&x).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_rejects_nan() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, f64::NAN]);
        assert!(matches!(normalize(&x), Err(Error::NonFinite(_))));
    }

    #[test]
    fn constant_feature_survives_normalization() {
        let ds = prepare(&table(SMALL, true).unwrap(), &schema("add_constant = true")).unwrap();
        let k = ds.d() - 1;
        let expect = 1.0 / (ds.d() as f64).sqrt();
        assert!(ds.x.column(k).iter().all(|&v| v == expect));
        ds.check_normalized().unwrap();
    }

    fn toy(n: usize) -> EncodedDataset {
        let x = DMatrix::from_fn(n, 2, |i, k| (i * 2 + k) as f64 / (4 * n) as f64);
        let y = (0..n).map(|i| (i % 2) as u8).collect();
        let z = (0..n).map(|i| u8::from(i >= n / 2)).collect();
        EncodedDataset::new(x, y, z, vec!["a".into(), "b".into()], None).unwrap()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = toy(10);
        let (tr, te) = split(&ds, 0.2, 9).unwrap();
        assert_eq!((tr.n(), te.n()), (8, 2));
        let (tr2, te2) = split(&ds, 0.2, 9).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
    }

    #[test]
    fn split_seeds_change_membership() {
        let ds = toy(10);
        let (a, _) = split(&ds, 0.2, 1).unwrap();
        let (b, _) = split(&ds, 0.2, 2).unwrap();
        assert_ne!(a.x, b.x);
    }

    #[test]
    fn split_recomputes_group_mean() {
        let x = DMatrix::from_fn(10, 1, |i, _| i as f64 / 10.0);
        let ds = EncodedDataset::new(x, vec![0; 10], vec![1; 10], vec!["a".into()], None).unwrap();
        let (tr, te) = split(&ds, 0.2, 4).unwrap();
        assert_eq!(te.z_bar, 1.0);
        assert_eq!(tr.z_bar, 1.0);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let ds = toy(10);
        for f in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(split(&ds, f, 0).is_err());
        }
    }
}
