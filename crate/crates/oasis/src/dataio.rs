//! Dataset input/output: the sparse `label index:value` text format
//! (1-based indices, optionally gzip-compressed), dataset splitting, and a
//! synthetic binary-classification generator.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{OasisError, Result};
use crate::linalg::{CsrMatrix, Rng};

/// Binary label conventions accepted on input. Whatever the file uses, the
/// labels handed back are always `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelScheme {
    /// `{-1, +1}` — kept as is.
    PlusMinus,
    /// `{0, 1}` — `0` becomes `-1`.
    ZeroOne,
    /// `{1, 2}` — `1` becomes `-1`, `2` becomes `+1`.
    OneTwo,
}

impl LabelScheme {
    fn admits(self, label: f64) -> bool {
        match self {
            LabelScheme::PlusMinus => label == -1.0 || label == 1.0,
            LabelScheme::ZeroOne => label == 0.0 || label == 1.0,
            LabelScheme::OneTwo => label == 1.0 || label == 2.0,
        }
    }

    fn to_pm(self, label: f64) -> f64 {
        match self {
            LabelScheme::PlusMinus => label,
            LabelScheme::ZeroOne => {
                if label == 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            LabelScheme::OneTwo => {
                if label == 1.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Ambiguous label sets resolve in this order (so an all-`1` file reads as
/// all-positive rather than all-negative).
const SCHEME_PRECEDENCE: [LabelScheme; 3] = [
    LabelScheme::PlusMinus,
    LabelScheme::ZeroOne,
    LabelScheme::OneTwo,
];

fn parse_err(line: usize, message: impl Into<String>) -> OasisError {
    OasisError::Parse {
        line,
        message: message.into(),
    }
}

/// Parse the sparse text format from any reader. Each non-blank line is
/// `label index:value index:value …` with 1-based, strictly increasing
/// indices. The feature count is the largest index seen, or `expected_dim`
/// if that is larger (useful when a test split doesn't touch the last
/// columns of its training set).
pub fn parse_libsvm<R: BufRead>(
    reader: R,
    expected_dim: Option<usize>,
) -> Result<(CsrMatrix, Vec<f64>)> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut raw_labels: Vec<f64> = Vec::new();
    let mut distinct_labels: Vec<f64> = Vec::new();
    // Schemes still compatible with every label seen so far.
    let mut candidates: Vec<LabelScheme> = SCHEME_PRECEDENCE.to_vec();
    let mut max_col = 0usize; // 1-based; 0 = none seen

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue; // blank line
        };
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("cannot parse label `{label_tok}`")))?;
        let survivors: Vec<LabelScheme> = candidates
            .iter()
            .copied()
            .filter(|s| s.admits(label))
            .collect();
        if survivors.is_empty() {
            if !distinct_labels.contains(&label) {
                distinct_labels.push(label);
            }
            let mut seen = distinct_labels.clone();
            seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let listed: Vec<String> = seen.iter().map(|l| format!("{l}")).collect();
            return Err(parse_err(
                lineno,
                format!(
                    "label {} makes the label set {{{}}} fit none of the supported schemes \
                     ({{-1,+1}}, {{0,1}}, {{1,2}})",
                    label,
                    listed.join(", ")
                ),
            ));
        }
        candidates = survivors;
        if !distinct_labels.contains(&label) {
            distinct_labels.push(label);
        }

        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut prev_idx = 0usize; // 1-based; entries must strictly increase
        for tok in tokens {
            let Some((idx_s, val_s)) = tok.split_once(':') else {
                return Err(parse_err(
                    lineno,
                    format!("expected `index:value`, found `{tok}`"),
                ));
            };
            let idx: usize = idx_s
                .parse()
                .map_err(|_| parse_err(lineno, format!("cannot parse index `{idx_s}`")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based; found 0"));
            }
            if idx <= prev_idx {
                return Err(parse_err(
                    lineno,
                    format!(
                        "feature indices must be strictly increasing within a line \
                         (index {idx} after {prev_idx})"
                    ),
                ));
            }
            let val: f64 = val_s
                .parse()
                .map_err(|_| parse_err(lineno, format!("cannot parse value `{val_s}`")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value {val}")));
            }
            prev_idx = idx;
            max_col = max_col.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
        raw_labels.push(label);
    }

    if rows.is_empty() {
        return Err(parse_err(0, "no samples in input"));
    }
    let scheme = SCHEME_PRECEDENCE
        .into_iter()
        .find(|s| candidates.contains(s))
        .expect("at least one candidate scheme survives");
    let labels: Vec<f64> = raw_labels.into_iter().map(|l| scheme.to_pm(l)).collect();
    let n_cols = max_col.max(expected_dim.unwrap_or(0));
    if n_cols == 0 {
        return Err(parse_err(
            0,
            "no features in input and no expected dimension",
        ));
    }
    let x = CsrMatrix::from_rows(n_cols, &rows)?;
    Ok((x, labels))
}

fn is_gz(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()) == Some("gz")
}

/// Read a dataset file in the sparse text format, transparently
/// decompressing when the file name ends in `.gz`.
pub fn load_libsvm<P: AsRef<Path>>(
    path: P,
    expected_dim: Option<usize>,
) -> Result<(CsrMatrix, Vec<f64>)> {
    let path = path.as_ref();
    let file = File::open(path)?;
    if is_gz(path) {
        parse_libsvm(BufReader::new(GzDecoder::new(file)), expected_dim)
    } else {
        parse_libsvm(BufReader::new(file), expected_dim)
    }
}

/// Serialize to the sparse text format. Labels must be `±1`; values are
/// written in shortest round-trip decimal form, so loading the file back
/// reproduces the matrix bit for bit.
pub fn write_libsvm<W: Write>(out: &mut W, x: &CsrMatrix, y: &[f64]) -> Result<()> {
    if y.len() != x.n_rows() {
        return Err(OasisError::Dimension(format!(
            "{} labels for {} rows",
            y.len(),
            x.n_rows()
        )));
    }
    for (i, &label) in y.iter().enumerate() {
        if label != 1.0 && label != -1.0 {
            return Err(OasisError::Config(format!(
                "labels must be ±1 when saving; row {} has {}",
                i + 1,
                label
            )));
        }
        write!(out, "{label}")?;
        let (cols, vals) = x.row(i);
        for (c, v) in cols.iter().zip(vals) {
            write!(out, " {}:{}", c + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Write a dataset file in the sparse text format, gzip-compressing when the
/// file name ends in `.gz`.
pub fn save_libsvm<P: AsRef<Path>>(path: P, x: &CsrMatrix, y: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path)?;
    if is_gz(path) {
        let mut enc = GzEncoder::new(BufWriter::new(file), Compression::default());
        write_libsvm(&mut enc, x, y)?;
        enc.finish()?.flush()?;
    } else {
        let mut out = BufWriter::new(file);
        write_libsvm(&mut out, x, y)?;
        out.flush()?;
    }
    Ok(())
}

/// Copy the given rows (in order) into a new matrix with the same width.
fn take_rows(x: &CsrMatrix, y: &[f64], rows: &[usize]) -> (CsrMatrix, Vec<f64>) {
    let picked: Vec<Vec<(usize, f64)>> = rows
        .iter()
        .map(|&i| {
            let (cols, vals) = x.row(i);
            cols.iter().copied().zip(vals.iter().copied()).collect()
        })
        .collect();
    let labels = rows.iter().map(|&i| y[i]).collect();
    let m = CsrMatrix::from_rows(x.n_cols(), &picked)
        .expect("rows of a valid matrix form a valid matrix");
    (m, labels)
}

/// Randomly partition a dataset into train and test parts. The test part
/// gets `ceil(test_fraction·n)` samples; both parts must end up non-empty.
pub fn train_test_split(
    x: &CsrMatrix,
    y: &[f64],
    test_fraction: f64,
    rng: &mut Rng,
) -> Result<(CsrMatrix, Vec<f64>, CsrMatrix, Vec<f64>)> {
    if y.len() != x.n_rows() {
        return Err(OasisError::Dimension(format!(
            "{} labels for {} rows",
            y.len(),
            x.n_rows()
        )));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(OasisError::Config(format!(
            "test fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let n = x.n_rows();
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let n_test = (test_fraction * n as f64).ceil() as usize;
    if n_test == 0 || n_test >= n {
        return Err(OasisError::Config(format!(
            "splitting {n} samples with test fraction {test_fraction} leaves an empty side"
        )));
    }
    let (test_idx, train_idx) = order.split_at(n_test);
    let (test_x, test_y) = take_rows(x, y, test_idx);
    let (train_x, train_y) = take_rows(x, y, train_idx);
    Ok((train_x, train_y, test_x, test_y))
}

/// Generate a linearly separable-ish binary classification problem: a random
/// unit direction `u`, labels `±1` with equal probability, and samples
/// `x = label·separation·u + standard normal noise`. With `keep_prob < 1`
/// each coordinate is then kept independently with that probability,
/// producing a sparse matrix.
pub fn synth_classification(
    n: usize,
    d: usize,
    separation: f64,
    keep_prob: f64,
    rng: &mut Rng,
) -> Result<(CsrMatrix, Vec<f64>)> {
    if n == 0 || d == 0 {
        return Err(OasisError::Config(format!(
            "need at least one sample and one feature, got n = {n}, d = {d}"
        )));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(OasisError::Config(format!(
            "separation must be nonnegative and finite, got {separation}"
        )));
    }
    if !(keep_prob > 0.0 && keep_prob <= 1.0) {
        return Err(OasisError::Config(format!(
            "keep probability must lie in (0,1], got {keep_prob}"
        )));
    }
    let mut u: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
    let norm = crate::linalg::norm(&u);
    for ui in u.iter_mut() {
        *ui /= norm;
    }
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut labels: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..n {
        let label = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (j, uj) in u.iter().enumerate() {
            let value = label * separation * uj + rng.standard_normal();
            let keep = keep_prob >= 1.0 || rng.next_f64() < keep_prob;
            if keep {
                row.push((j, value));
            }
        }
        rows.push(row);
        labels.push(label);
    }
    let x = CsrMatrix::from_rows(d, &rows)?;
    Ok((x, labels))
}
