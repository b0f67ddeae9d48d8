//! Serial-style text export of polled records and its exact inverse.
//!
//! One line per record, `t_us,left_counts,right_counts,trunk_angle_cdeg,
//! trunk_vel_ddps,flags`, all integers, newline-terminated, no header. Each
//! line must fit the 500,000 baud link at the 500 Hz record rate assuming
//! 10 baud intervals per byte (8N1 framing).

use super::{Error, PolledRecord};

pub const BAUD_LIMIT: u64 = 500_000;
const LINE_RATE_HZ: u64 = 500;
const BITS_PER_BYTE: u64 = 10;

pub fn format_record(rec: &PolledRecord) -> String {
    format!(
        "{},{},{},{},{},{}",
        rec.timestamp_us,
        rec.left_counts,
        rec.right_counts,
        rec.trunk_angle_cdeg,
        rec.trunk_vel_ddps,
        rec.flags
    )
}

pub fn export_serial_log(records: &[PolledRecord]) -> Result<String, Error> {
    let mut out = String::with_capacity(records.len() * 32);
    for (i, rec) in records.iter().enumerate() {
        let line = format_record(rec);
        let bits = (line.len() as u64 + 1) * BITS_PER_BYTE * LINE_RATE_HZ;
        if bits > BAUD_LIMIT {
            return Err(Error::BudgetExceeded {
                line: i + 1,
                bits,
                limit: BAUD_LIMIT,
            });
        }
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_serial_log(text: &str) -> Result<Vec<PolledRecord>, Error> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", fields.len())));
        }
        fn field<T: std::str::FromStr>(s: &str, name: &str) -> Result<T, String> {
            s.parse()
                .map_err(|_| format!("bad {name} field {s:?}"))
        }
        records.push(PolledRecord {
            timestamp_us: field(fields[0], "t_us").map_err(&err)?,
            left_counts: field(fields[1], "left_counts").map_err(&err)?,
            right_counts: field(fields[2], "right_counts").map_err(&err)?,
            trunk_angle_cdeg: field(fields[3], "trunk_angle_cdeg").map_err(&err)?,
            trunk_vel_ddps: field(fields[4], "trunk_vel_ddps").map_err(&err)?,
            flags: field(fields[5], "flags").map_err(&err)?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn example_record_formats_directly() {
        let rec = PolledRecord {
            timestamp_us: 0,
            left_counts: 1000,
            right_counts: 1000,
            trunk_angle_cdeg: 1234,
            trunk_vel_ddps: -56,
            flags: 0,
        };
        assert_eq!(format_record(&rec), "0,1000,1000,1234,-56,0");
    }

    #[test]
    fn empty_stream_exports_empty_text() {
        assert_eq!(export_serial_log(&[]).unwrap(), "");
    }

    #[test]
    fn widest_realistic_line_fits_the_baud_budget() {
        // 300 s session: last timestamp 299,998,000 us; every other field at
        // its widest printable value.
        let rec = PolledRecord {
            timestamp_us: 299_998_000,
            left_counts: 16_383,
            right_counts: 16_383,
            trunk_angle_cdeg: i16::MIN,
            trunk_vel_ddps: i16::MIN,
            flags: 255,
        };
        let line = format_record(&rec);
        assert!(line.len() <= 42, "{} chars: {line}", line.len());
        let bits = (line.len() as u64 + 1) * 10 * 500;
        assert!(bits < BAUD_LIMIT);
        assert!(export_serial_log(&[rec]).is_ok());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "0,1,2,3,4,0\nnot-a-line\n";
        match parse_serial_log(text) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_serial_log("0,1,2,3,4,0,9\n") {
            Err(Error::Parse { line: 1, msg }) => assert!(msg.contains("7")),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn export_then_parse_is_identity(
            recs in proptest::collection::vec(
                (any::<u32>(), any::<u16>(), any::<u16>(), any::<i16>(), any::<i16>(), any::<u8>()),
                0..50,
            )
        ) {
            let records: Vec<PolledRecord> = recs
                .into_iter()
                .map(|(t, l, r, a, v, f)| PolledRecord {
                    timestamp_us: t as u64,
                    left_counts: l,
                    right_counts: r,
                    trunk_angle_cdeg: a,
                    trunk_vel_ddps: v,
                    flags: f,
                })
                .collect();
            let text = export_serial_log(&records).unwrap();
            prop_assert_eq!(parse_serial_log(&text).unwrap(), records);
        }
    }
}
