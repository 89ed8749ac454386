use std::fs;
use std::path::Path;

use crate::CliError;

/// Shortest decimal that round-trips to the same `f64`.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `# config: {header}` followed by the CSV table.
pub(crate) fn write_csv(path: &Path, header: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", path.display()));
    let mut buf = format!("# config: {header}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(columns).map_err(|e| io(&e))?;
        for row in rows {
            w.write_record(row).map_err(|e| io(&e))?;
        }
        w.flush().map_err(|e| io(&e))?;
    }
    fs::write(path, buf).map_err(|e| io(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1e-5, 1.0 / 3.0, 2.5e300, -0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(num(0.02), "0.02");
    }

    #[test]
    fn header_line_precedes_table() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, "{\"a\":1}", &["x", "y"], &[vec!["1".into(), "a,b".into()]]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "# config: {\"a\":1}\nx,y\n1,\"a,b\"\n");
    }
}
