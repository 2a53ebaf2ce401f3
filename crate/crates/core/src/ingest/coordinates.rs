//! Language coordinates CSV: `languageID,lat,lon` with a header row.

use std::io::Read;
use std::path::Path;

use indexmap::IndexMap;

use super::{nfc, open, IngestError};
use crate::scalar::Scalar;

/// Latitude/longitude in degrees per language ID.
pub type Coordinates<T> = IndexMap<String, (T, T)>;

pub fn parse_coordinates<T: Scalar>(path: &Path) -> Result<Coordinates<T>, IngestError> {
    read_coordinates(open(path)?).map_err(|e| e.in_file(path))
}

pub fn read_coordinates<T: Scalar, R: Read>(reader: R) -> Result<Coordinates<T>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut out = IndexMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| IngestError::line(line, e.to_string()))?;
        if rec.len() != 3 {
            return Err(IngestError::line(line, "expected languageID,lat,lon"));
        }
        let num = |s: &str| -> Result<T, IngestError> {
            s.parse().map_err(|_| IngestError::line(line, format!("invalid number {s:?}")))
        };
        let (lat, lon) = (num(&rec[1])?, num(&rec[2])?);
        if !(lat.abs() <= T::lit(90.0)) || !(lon.abs() <= T::lit(180.0)) {
            return Err(IngestError::line(line, format!("coordinates out of range: {lat}, {lon}")));
        }
        let id = nfc(&rec[0]);
        if out.insert(id.clone(), (lat, lon)).is_some() {
            return Err(IngestError::line(line, format!("duplicate language {id:?}")));
        }
    }
    Ok(out)
}
