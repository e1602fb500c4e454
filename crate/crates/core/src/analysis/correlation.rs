use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Sample Pearson correlation, `(n-1)`-normalized and computed from
/// centered values. The result is clamped to `[-1, 1]`.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(AnalysisError::TooFewPoints(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(AnalysisError::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(AnalysisError::ZeroVariance("y"));
    }
    let cov = sxy / (n - 1.0);
    let r = cov / ((sxx / (n - 1.0)).sqrt() * (syy / (n - 1.0)).sqrt());
    Ok(r.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub pearson_r: f64,
    pub n_pairs: usize,
    pub pairs: Vec<LabeledPair>,
}

impl CorrelationReport {
    /// `label,x,y` header followed by one row per pair.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "x", "y"]).unwrap();
        for p in &self.pairs {
            w.serialize((&p.label, p.x, p.y)).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

pub fn correlation_report(pairs: Vec<LabeledPair>) -> Result<CorrelationReport, AnalysisError> {
    let xs: Vec<f64> = pairs.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.y).collect();
    let r = pearson(&xs, &ys)?;
    Ok(CorrelationReport {
        pearson_r: r,
        n_pairs: pairs.len(),
        pairs,
    })
}

/// Matches source and target ranks by label (source order is kept) and
/// correlates them.
pub fn rank_transfer_report(
    source: &[(String, f64)],
    target: &[(String, f64)],
) -> Result<CorrelationReport, AnalysisError> {
    let mut by_label: HashMap<&str, f64> = HashMap::with_capacity(target.len());
    for (label, rank) in target {
        if by_label.insert(label.as_str(), *rank).is_some() {
            return Err(AnalysisError::LabelMismatch(format!(
                "duplicate target label {label:?}"
            )));
        }
    }
    if source.len() != target.len() {
        return Err(AnalysisError::LabelMismatch(format!(
            "{} source labels vs {} target labels",
            source.len(),
            target.len()
        )));
    }
    let mut pairs = Vec::with_capacity(source.len());
    for (label, x) in source {
        let y = by_label.remove(label.as_str()).ok_or_else(|| {
            AnalysisError::LabelMismatch(format!("source label {label:?} missing from target"))
        })?;
        pairs.push(LabeledPair {
            label: label.clone(),
            x: *x,
            y,
        });
    }
    correlation_report(pairs)
}

/// Reads `label,x,y` rows (header required).
pub fn parse_pairs_csv<R: Read>(reader: R) -> Result<Vec<LabeledPair>, AnalysisError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| AnalysisError::Parse(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["label", "x", "y"] {
        return Err(AnalysisError::Parse(format!(
            "expected header label,x,y, found {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut pairs = Vec::new();
    for (row, record) in rdr.deserialize::<LabeledPair>().enumerate() {
        let pair = record.map_err(|e| AnalysisError::Parse(format!("row {row}: {e}")))?;
        if !(pair.x.is_finite() && pair.y.is_finite()) {
            return Err(AnalysisError::Parse(format!("row {row}: non-finite value")));
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_and_negated() {
        let xs = [1.0, 2.0, 5.0, 7.5, 11.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_half() {
        // Means 2 and 2; deviations (-1,0,1) and (-1,1,0): cov 1/2, variances 1.
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0]).unwrap_err(),
            AnalysisError::LengthMismatch { left: 2, right: 1 }
        );
        assert_eq!(pearson(&[1.0], &[1.0]).unwrap_err(), AnalysisError::TooFewPoints(1));
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            AnalysisError::ZeroVariance("x")
        );
    }

    fn labeled(values: &[(&str, f64)]) -> Vec<(String, f64)> {
        values.iter().map(|(l, v)| (l.to_string(), *v)).collect()
    }

    #[test]
    fn transfer_matches_by_label() {
        let src = labeled(&[("a", 1.0), ("b", 2.0), ("c", 4.0)]);
        let tgt = labeled(&[("c", 8.0), ("a", 2.0), ("b", 4.0)]);
        let rep = rank_transfer_report(&src, &tgt).unwrap();
        assert!((rep.pearson_r - 1.0).abs() < 1e-12);
        assert_eq!(rep.pairs[2], LabeledPair { label: "c".into(), x: 4.0, y: 8.0 });
        let same = rank_transfer_report(&src, &src).unwrap();
        assert!((same.pearson_r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transfer_label_mismatch() {
        let src = labeled(&[("a", 1.0), ("b", 2.0)]);
        for tgt in [
            labeled(&[("a", 1.0), ("z", 2.0)]),
            labeled(&[("a", 1.0)]),
            labeled(&[("a", 1.0), ("a", 2.0)]),
        ] {
            assert!(matches!(
                rank_transfer_report(&src, &tgt),
                Err(AnalysisError::LabelMismatch(_))
            ));
        }
    }

    #[test]
    fn pairs_csv_round_trip() {
        let pairs = parse_pairs_csv("label,x,y\nrun 0,1.5,2\nrun1,3,4.25\n".as_bytes()).unwrap();
        let rep = correlation_report(pairs).unwrap();
        assert_eq!(rep.to_csv(), "label,x,y\nrun 0,1.5,2.0\nrun1,3.0,4.25\n");
        assert!(parse_pairs_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
        assert!(parse_pairs_csv("label,x,y\nr,abc,1\n".as_bytes()).is_err());
    }
}
