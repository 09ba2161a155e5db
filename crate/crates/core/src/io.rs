//! CSV for dyadic paths: header `t,value`, one row per grid node, numbers
//! with 17 significant digits so that reading back restores every `f64`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::processes::{level_for_len, DyadicPath};

/// Relative tolerance for the uniform-spacing check on the `t` column.
pub const GRID_TOL: f64 = 1e-12;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_path_csv<W: Write>(path: &DyadicPath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["t", "value"]).map_err(io)?;
    for (t, v) in path.times().zip(path.values()) {
        w.write_record([fmt_f64(t), fmt_f64(*v)]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Valid row counts `2^L + 1` around an invalid `len`: the nearest below and
/// the two nearest above.
pub fn nearest_valid_counts(len: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut below = None;
    let mut l = 0u32;
    while l < 40 {
        let c = (1usize << l) + 1;
        if c < len {
            below = Some(c);
        } else if c > len {
            out.push(c);
            if out.len() == 2 {
                break;
            }
        }
        l += 1;
    }
    below.into_iter().chain(out).collect()
}

pub fn read_path_csv<R: Read>(input: R, origin: &str) -> Result<DyadicPath> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "value" {
        return Err(Error::Format(format!(
            "expected header 't,value', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut ts = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(format!("row {}: {e}", i + 1)))?;
        if rec.len() != 2 {
            return Err(Error::Format(format!("row {}: expected 2 fields, found {}", i + 1, rec.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format(format!("row {}: '{s}' is not a finite number", i + 1)))
        };
        ts.push(parse(&rec[0])?);
        values.push(parse(&rec[1])?);
    }

    let level = level_for_len(values.len()).ok_or_else(|| {
        let near: Vec<String> = nearest_valid_counts(values.len()).iter().map(|c| c.to_string()).collect();
        Error::Format(format!("{} rows is not 2^L + 1 (nearest valid counts: {})", values.len(), near.join(", ")))
    })?;

    if let Some(i) = ts.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Format(format!("t column is not strictly increasing at row {}", i + 2)));
    }
    let h = ((1u64 << level) as f64).recip();
    for (k, &t) in ts.iter().enumerate() {
        let want = k as f64 * h;
        if (t - want).abs() > GRID_TOL * want.max(h) {
            return Err(Error::Format(format!(
                "row {}: t = {t} is off the uniform grid of level {level} (expected {want})",
                k + 1
            )));
        }
    }
    DyadicPath::new(level, values, origin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nearest_counts() {
        assert_eq!(nearest_valid_counts(1000), vec![513, 1025, 2049]);
        assert_eq!(nearest_valid_counts(1), vec![2, 3]);
    }

    #[test]
    fn rejects_bad_row_count() {
        let mut text = String::from("t,value\n");
        for k in 0..1000 {
            text.push_str(&format!("{},{}\n", k as f64 / 999.0, k));
        }
        let err = read_path_csv(text.as_bytes(), "x").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("513, 1025, 2049"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_non_monotone_t() {
        let text = "t,value\n0,0\n0.5,1\n0.25,2\n1,3\n0.75,4\n";
        let msg = read_path_csv(text.as_bytes(), "x").unwrap_err().to_string();
        assert!(msg.contains("strictly increasing"), "{msg}");
    }

    #[test]
    fn rejects_off_grid_and_bad_header() {
        let text = "t,value\n0,0\n0.4,1\n1,3\n";
        assert!(read_path_csv(text.as_bytes(), "x").is_err());
        let text = "time,value\n0,0\n0.5,1\n1,3\n";
        assert!(read_path_csv(text.as_bytes(), "x").unwrap_err().to_string().contains("header"));
        let text = "t,value\n0,0\n0.5,abc\n1,3\n";
        assert!(read_path_csv(text.as_bytes(), "x").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(level in 1u32..7, seed in any::<u64>()) {
            let mut state = seed;
            let values: Vec<f64> = (0..=(1usize << level)).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f64::from_bits((state >> 12) | 0x3ff0_0000_0000_0000) * if state & 1 == 0 { -1e-7 } else { 3e5 }
            }).collect();
            let p = DyadicPath::new(level, values, "p").unwrap();
            let mut buf = Vec::new();
            write_path_csv(&p, &mut buf).unwrap();
            let back = read_path_csv(buf.as_slice(), "p").unwrap();
            prop_assert_eq!(back.values(), p.values());
        }
    }
}
