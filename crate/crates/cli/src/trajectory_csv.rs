//! Trajectory CSV: header `t,x1..xn,y1..yn`, one row per sample, values in
//! scientific notation with 17 significant digits, LF line endings.

use std::io::{Read, Write};

use signet_core::dynamics::{State, Trajectory};

use crate::error::{CliError, CliResult};

fn csv_error(e: csv::Error) -> CliError {
    CliError::Input(format!("trajectory csv: {e}"))
}

pub fn header(n: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("x{i}")))
        .chain((1..=n).map(|i| format!("y{i}")))
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> CliResult<()> {
    let n = traj.final_state().n();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header(n)).map_err(csv_error)?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let row = std::iter::once(fmt(*t)).chain(s.x.iter().chain(&s.y).map(|&v| fmt(v)));
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads samples back. `k` and `h` are not stored in the file and are
/// taken from the caller.
pub fn read_trajectory<R: Read>(input: R, k: f64, h: f64) -> CliResult<Trajectory> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let cols = r.headers().map_err(csv_error)?.len();
    if cols < 3 || cols % 2 == 0 {
        return Err(CliError::Input(format!(
            "trajectory csv: unexpected column count {cols}"
        )));
    }
    let n = (cols - 1) / 2;
    if r.headers()
        .map_err(csv_error)?
        .iter()
        .ne(header(n).iter().map(String::as_str))
    {
        return Err(CliError::Input("trajectory csv: unexpected header".into()));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let vals = rec
            .iter()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Input(format!("trajectory csv row {}: {e}", line + 2)))?;
        times.push(vals[0]);
        states.push(State::new(vals[1..=n].to_vec(), vals[n + 1..].to_vec()));
    }
    if times.is_empty() {
        return Err(CliError::Input("trajectory csv: no samples".into()));
    }
    Ok(Trajectory {
        times,
        states,
        k,
        h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let traj = Trajectory {
            times: vec![0.0, 0.1],
            states: vec![
                State::new(vec![0.1, -1.0 / 3.0], vec![2.5e-300, 7.0]),
                State::new(vec![f64::MIN_POSITIVE, 1e300], vec![-0.0, 0.3]),
            ],
            k: 1.0,
            h: 1e-3,
        };
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x1,x2,y1,y2\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_trajectory(buf.as_slice(), 1.0, 1e-3).unwrap(), traj);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_trajectory("t,a,b\n0,0,0\n".as_bytes(), 1.0, 1e-3).is_err());
    }
}
