//! CSV persistence of trial records.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every record bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::channel::TrialRecord;
use crate::{Error, Result};

pub const DATASET_HEADER: [&str; 7] = ["mod", "ebn0_db", "ci_db", "dop_phi_rad", "n_bits", "n_errors", "ber"];

pub fn write_dataset_to<W: Write>(records: &[TrialRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DATASET_HEADER).map_err(csv_io)?;
    for r in records {
        w.write_record([
            r.modulation.name().to_string(),
            format!("{:?}", r.ebn0_db),
            format!("{:?}", r.ci_db),
            format!("{:?}", r.dop_phi_rad),
            r.n_bits.to_string(),
            r.n_errors.to_string(),
            format!("{:?}", r.ber),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(records: &[TrialRecord], path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_dataset_to(records, BufWriter::new(file))
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("{other:?}")),
    }
}

pub fn read_dataset_from<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();

    let parse_err = |line: u64, message: String| Error::Parse { line, message };
    let header = match rows.next() {
        None => return Err(parse_err(1, "missing header".into())),
        Some(h) => h.map_err(|e| parse_err(line_of(&e), e.to_string()))?,
    };
    if header.iter().ne(DATASET_HEADER) {
        return Err(parse_err(1, format!("expected header {:?}", DATASET_HEADER.join(","))));
    }

    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(|e| parse_err(line_of(&e), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != DATASET_HEADER.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", DATASET_HEADER.len(), row.len()),
            ));
        }
        let field = |i: usize| &row[i];
        let float = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("{}: {e}", DATASET_HEADER[i])))
        };
        let int = |i: usize| {
            field(i)
                .parse::<u64>()
                .map_err(|e| parse_err(line, format!("{}: {e}", DATASET_HEADER[i])))
        };
        let record = TrialRecord {
            modulation: field(0).parse().map_err(|e: Error| parse_err(line, e.to_string()))?,
            ebn0_db: float(1)?,
            ci_db: float(2)?,
            dop_phi_rad: float(3)?,
            n_bits: int(4)?,
            n_errors: int(5)?,
            ber: float(6)?,
        };
        if record.n_bits == 0 || record.n_errors > record.n_bits {
            return Err(parse_err(
                line,
                "n_errors must lie in [0, n_bits] with n_bits > 0".into(),
            ));
        }
        if record.ber != record.n_errors as f64 / record.n_bits as f64 {
            return Err(parse_err(line, format!("ber {} is not n_errors / n_bits", record.ber)));
        }
        out.push(record);
    }
    Ok(out)
}

fn line_of(e: &csv::Error) -> u64 {
    e.position().map_or(0, |p| p.line())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    read_dataset_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::DISABLED;
    use crate::modem::Modulation;

    fn sample() -> Vec<TrialRecord> {
        vec![
            TrialRecord {
                modulation: Modulation::Dbpsk,
                ebn0_db: 25.123456789012345,
                ci_db: 55.0,
                dop_phi_rad: 0.01,
                n_bits: 10_000,
                n_errors: 0,
                ber: 0.0,
            },
            TrialRecord {
                modulation: Modulation::D8psk,
                ebn0_db: -10.0,
                ci_db: DISABLED,
                dop_phi_rad: 0.1299999,
                n_bits: 9_999,
                n_errors: 3,
                ber: 3.0 / 9_999.0,
            },
        ]
    }

    fn to_string(records: &[TrialRecord]) -> String {
        let mut buf = Vec::new();
        write_dataset_to(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn round_trip() {
        let text = to_string(&sample());
        assert!(text.starts_with("mod,ebn0_db,ci_db,dop_phi_rad,n_bits,n_errors,ber\n"));
        assert_eq!(read_dataset_from(text.as_bytes()).unwrap(), sample());
    }

    #[test]
    fn header_only_is_empty() {
        let text = to_string(&[]);
        assert!(read_dataset_from(text.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn truncated_file_reports_line() {
        let text = to_string(&sample());
        let cut = &text[..text.len() - 12];
        match read_dataset_from(cut.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            read_dataset_from("".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_dataset_from("a,b\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad_mod = "mod,ebn0_db,ci_db,dop_phi_rad,n_bits,n_errors,ber\nQAM,1,1,0,10,0,0\n";
        assert!(matches!(
            read_dataset_from(bad_mod.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad_ber = "mod,ebn0_db,ci_db,dop_phi_rad,n_bits,n_errors,ber\nDBPSK,1,1,0,10,1,0.2\n";
        assert!(matches!(
            read_dataset_from(bad_ber.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        let too_many = "mod,ebn0_db,ci_db,dop_phi_rad,n_bits,n_errors,ber\nDBPSK,1,1,0,10,11,1.1\n";
        assert!(read_dataset_from(too_many.as_bytes()).is_err());
    }
}
