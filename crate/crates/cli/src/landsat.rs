//! Statlog (Landsat Satellite) files: 36 integer attributes in 0..=255 and
//! a class label in {1, 2, 3, 4, 5, 7}, whitespace separated.

use std::path::Path;

use sgmcmc::mlp::Dataset;

use crate::error::{CliError, Result};

pub const N_FEATURES: usize = 36;
pub const N_CLASSES: usize = 6;
pub const EXPECTED_TRAIN: usize = 4435;
pub const EXPECTED_TEST: usize = 2000;

/// Raw label to contiguous class index; label 6 does not occur.
pub fn remap_label(raw: u32) -> Option<usize> {
    match raw {
        1..=5 => Some(raw as usize - 1),
        7 => Some(5),
        _ => None,
    }
}

/// Parses one file. Features are divided by 255. Files ending in `.csv` are
/// read in the ingested format written by [`write_ingested`].
pub fn parse(text: &str, path: &Path) -> Result<Dataset> {
    if path.extension().is_some_and(|e| e == "csv") {
        return parse_ingested(text, path);
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != N_FEATURES + 1 {
            return Err(err(format!("expected {} fields, found {}", N_FEATURES + 1, fields.len())));
        }
        for f in &fields[..N_FEATURES] {
            let v: u32 = f.parse().map_err(|_| err(format!("attribute `{f}` is not an integer")))?;
            if v > 255 {
                return Err(err(format!("attribute {v} outside 0..=255")));
            }
            features.push(v as f64 / 255.0);
        }
        let raw: u32 = fields[N_FEATURES]
            .parse()
            .map_err(|_| err(format!("label `{}` is not an integer", fields[N_FEATURES])))?;
        labels.push(remap_label(raw).ok_or_else(|| err(format!("unknown class label {raw}")))?);
    }
    Ok(Dataset::new(features, labels, N_FEATURES, N_CLASSES)?)
}

fn parse_ingested(text: &str, path: &Path) -> Result<Dataset> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line: k + 1,
            message,
        };
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != N_FEATURES + 1 {
            return Err(err(format!("expected {} fields, found {}", N_FEATURES + 1, fields.len())));
        }
        for f in &fields[..N_FEATURES] {
            features.push(f.trim().parse::<f64>().map_err(|_| err(format!("bad feature `{f}`")))?);
        }
        let l: usize = fields[N_FEATURES]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad label `{}`", fields[N_FEATURES])))?;
        if l >= N_CLASSES {
            return Err(err(format!("label {l} outside 0..{N_CLASSES}")));
        }
        labels.push(l);
    }
    Ok(Dataset::new(features, labels, N_FEATURES, N_CLASSES)?)
}

pub fn load_file(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, path)
}

/// Loads the train and test files, warning when the row counts differ from
/// the standard 4435/2000 split.
pub fn load_landsat(train: &Path, test: &Path) -> Result<(Dataset, Dataset)> {
    let tr = load_file(train)?;
    let te = load_file(test)?;
    if tr.len() != EXPECTED_TRAIN {
        log::warn!("{}: {} training rows, expected {EXPECTED_TRAIN}", train.display(), tr.len());
    }
    if te.len() != EXPECTED_TEST {
        log::warn!("{}: {} test rows, expected {EXPECTED_TEST}", test.display(), te.len());
    }
    Ok((tr, te))
}

pub fn class_counts(data: &Dataset) -> Vec<usize> {
    let mut counts = vec![0; data.n_classes];
    for &l in &data.labels {
        counts[l] += 1;
    }
    counts
}

/// Scaled features and remapped labels as CSV with a header row.
pub fn write_ingested(data: &Dataset) -> String {
    let mut s = (0..N_FEATURES).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
    s.push_str(",label\n");
    for i in 0..data.len() {
        for v in data.row(i) {
            s.push_str(&format!("{v:?},"));
        }
        s.push_str(&format!("{}\n", data.labels[i]));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(label: u32) -> String {
        let mut v: Vec<String> = (0..36).map(|i| (i * 7 % 256).to_string()).collect();
        v.push(label.to_string());
        v.join(" ")
    }

    #[test]
    fn parses_and_remaps() {
        let text = format!("{}\n{}\n\n{}\n", row(1), row(7), row(4));
        let d = parse(&text, Path::new("sat.trn")).unwrap();
        assert_eq!(d.labels, vec![0, 5, 3]);
        assert_eq!(d.row(0)[1], 7.0 / 255.0);
        assert!(d.features.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn short_row_names_line() {
        let mut bad: Vec<&str> = Vec::new();
        let r = row(2);
        bad.extend(r.split(' ').skip(1));
        let text = format!("{}\n{}\n", row(1), bad.join(" "));
        match parse(&text, Path::new("sat.trn")).unwrap_err() {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("found 36"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_label_rejected() {
        assert!(parse(&row(6), Path::new("x")).is_err());
        assert!(parse(&row(0), Path::new("x")).is_err());
    }

    #[test]
    fn ingested_round_trip() {
        let text = format!("{}\n{}\n", row(3), row(7));
        let d = parse(&text, Path::new("sat.trn")).unwrap();
        let again = parse(&write_ingested(&d), Path::new("train.csv")).unwrap();
        assert_eq!(d, again);
    }
}
