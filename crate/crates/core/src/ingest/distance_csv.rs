//! Square distance-matrix CSVs with matching header row and label column.

use std::io::Read;
use std::path::Path;

use super::{nfc, open, IngestError};
use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;

/// Off-diagonal pairs differing by at most this much are averaged; larger
/// asymmetry is rejected. Diagonal entries within it are set to zero.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

pub fn parse_distance_csv<T: Scalar>(path: &Path) -> Result<DistanceMatrix<T>, IngestError> {
    read_distance_csv(open(path)?).map_err(|e| e.in_file(path))
}

pub fn read_distance_csv<T: Scalar, R: Read>(reader: R) -> Result<DistanceMatrix<T>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| IngestError::Format(e.to_string()))?,
        None => return Err(IngestError::line(1, "empty file")),
    };
    let labels: Vec<String> = header.iter().skip(1).map(|s| nfc(s.trim())).collect();
    let n = labels.len();
    if n == 0 {
        return Err(IngestError::line(1, "header has no language columns"));
    }
    let mut values = vec![T::zero(); n * n];
    let mut rows = 0;
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| IngestError::line(line, e.to_string()))?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if rows >= n {
            return Err(IngestError::line(line, format!("non-square: more than {n} data rows")));
        }
        if rec.len() != n + 1 {
            return Err(IngestError::line(line, format!("non-square: {} fields, expected {}", rec.len(), n + 1)));
        }
        let label = nfc(rec[0].trim());
        if label != labels[rows] {
            return Err(IngestError::line(
                line,
                format!("row label {label:?} does not match column label {:?}", labels[rows]),
            ));
        }
        for (j, field) in rec.iter().skip(1).enumerate() {
            let f = field.trim();
            let v: T = f.parse().map_err(|_| IngestError::line(line, format!("invalid number {f:?}")))?;
            if !v.is_finite() {
                return Err(IngestError::line(line, format!("non-finite value {f:?}")));
            }
            if v < T::zero() {
                return Err(IngestError::line(line, format!("negative entry {f:?}")));
            }
            values[rows * n + j] = v;
        }
        rows += 1;
    }
    if rows != n {
        return Err(IngestError::Format(format!("non-square: {rows} data rows for {n} columns")));
    }
    let tol = T::lit(SYMMETRY_TOLERANCE);
    let two = T::lit(2.0);
    for i in 0..n {
        let d = values[i * n + i];
        if d > tol {
            return Err(IngestError::Format(format!("non-zero diagonal for {:?}", labels[i])));
        }
        values[i * n + i] = T::zero();
        for j in (i + 1)..n {
            let (a, b) = (values[i * n + j], values[j * n + i]);
            if (a - b).abs() > tol {
                return Err(IngestError::Format(format!(
                    "asymmetric entries for ({:?}, {:?}): {a} vs {b}",
                    labels[i], labels[j]
                )));
            }
            let m = if a == b { a } else { (a + b) / two };
            values[i * n + j] = m;
            values[j * n + i] = m;
        }
    }
    DistanceMatrix::new(labels, values).map_err(|e| IngestError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(s: &str) -> Result<DistanceMatrix<f64>, IngestError> {
        read_distance_csv(s.as_bytes())
    }

    #[test]
    fn two_by_two() {
        let m = read(",en,de\nen,0,0.3\nde,0.3,0\n").unwrap();
        assert_eq!(m.get_by_label("en", "de"), Some(0.3));
    }

    #[test]
    fn tiny_asymmetry_is_averaged() {
        let m = read(",en,de\nen,0,0.3\nde,0.3000000001,0\n").unwrap();
        let v = m.get(0, 1);
        assert!((v - 0.30000000005).abs() < 1e-15, "{v}");
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn large_asymmetry_is_an_error() {
        assert!(read(",en,de\nen,0,0.3\nde,0.5,0\n").unwrap_err().to_string().contains("asymmetric"));
    }

    #[test]
    fn shape_and_label_errors() {
        assert!(read(",en,de\nen,0,0.3\n").unwrap_err().to_string().contains("non-square"));
        assert!(read(",en,de\nen,0,0.3,1\nde,0.3,0\n").unwrap_err().to_string().contains("non-square"));
        assert!(read(",en,de\nen,0,0.3\nfr,0.3,0\n").unwrap_err().to_string().contains("does not match"));
        assert!(read(",en,de\nen,0,-0.3\nde,-0.3,0\n").unwrap_err().to_string().contains("negative"));
        assert!(read(",en,de\nen,0,x\nde,0.3,0\n").is_err());
    }

    proptest! {
        #[test]
        fn output_always_satisfies_invariants(
            n in 1usize..6,
            cells in prop::collection::vec(prop_oneof![
                (-1.0f64..2.0).prop_map(|v| v.to_string()),
                Just("0".to_string()),
                Just("nan".to_string()),
                Just("".to_string()),
                Just("abc".to_string()),
            ], 36),
            symmetric in any::<bool>(),
        ) {
            let labels: Vec<String> = (0..n).map(|i| format!("L{i}")).collect();
            let mut text = format!(",{}\n", labels.join(","));
            for i in 0..n {
                text.push_str(&labels[i]);
                for j in 0..n {
                    let k = if symmetric { i.min(j) * 6 + i.max(j) } else { i * 6 + j };
                    let cell = if i == j && symmetric { "0".to_string() } else { cells[k].clone() };
                    text.push(',');
                    text.push_str(&cell);
                }
                text.push('\n');
            }
            if let Ok(m) = read(&text) {
                prop_assert_eq!(m.len(), n);
                for i in 0..n {
                    prop_assert_eq!(m.get(i, i), 0.0);
                    for j in 0..n {
                        let v = m.get(i, j);
                        prop_assert!(v.is_finite() && v >= 0.0);
                        prop_assert_eq!(v, m.get(j, i));
                    }
                }
            }
        }
    }
}
