//! CSV ingestion of right-censored observations.
//!
//! The expected format is two headed columns `time,status` with
//! `status` in `{0, 1}` (1 = event, 0 = censored). Parse failures name the
//! offending line.

use crate::error::{Error, Result};
use std::fs::File;
use std::io::Read;
use std::path::Path;

/// Parse `time,status` records from a reader.
pub fn read_censored_csv<R: Read>(reader: R) -> Result<Vec<(f64, bool)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| csv_error(1, e.to_string()))?
        .clone();
    if headers.len() != 2
        || !headers[0].eq_ignore_ascii_case("time")
        || !headers[1].eq_ignore_ascii_case("status")
    {
        return Err(csv_error(
            1,
            format!(
                "expected header \"time,status\", got {:?}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let record = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            csv_error(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(csv_error(
                line,
                format!("expected 2 fields, got {}", record.len()),
            ));
        }
        let time: f64 = record[0]
            .parse()
            .map_err(|_| csv_error(line, format!("invalid time {:?}", &record[0])))?;
        let status = match &record[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(csv_error(
                    line,
                    format!("invalid status {other:?} (expected 0 or 1)"),
                ))
            }
        };
        records.push((time, status));
    }
    Ok(records)
}

/// Parse `time,status` records from a file.
pub fn read_censored_csv_path<P: AsRef<Path>>(path: P) -> Result<Vec<(f64, bool)>> {
    read_censored_csv(File::open(path)?)
}

fn csv_error(line: u64, message: String) -> Error {
    Error::Csv { line, message }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_valid_records() {
        let data = "time,status\n1.5,1\n2.0,0\n-0.25,1\n";
        let records = read_censored_csv(data.as_bytes()).unwrap();
        assert_eq!(records, vec![(1.5, true), (2.0, false), (-0.25, true)]);
    }

    #[test]
    fn header_is_case_insensitive_and_trimmed() {
        let data = "Time, Status\n1.0,1\n";
        assert_eq!(read_censored_csv(data.as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn bad_status_names_the_line() {
        let data = "time,status\n1.0,1\n2.0,2\n";
        match read_censored_csv(data.as_bytes()) {
            Err(Error::Csv { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("status"), "{message}");
            }
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn bad_time_names_the_line() {
        let data = "time,status\nnot-a-number,1\n";
        match read_censored_csv(data.as_bytes()) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        let data = "t,event\n1.0,1\n";
        assert!(matches!(
            read_censored_csv(data.as_bytes()),
            Err(Error::Csv { line: 1, .. })
        ));
    }

    #[test]
    fn empty_body_yields_no_records() {
        let data = "time,status\n";
        assert!(read_censored_csv(data.as_bytes()).unwrap().is_empty());
    }
}
