//! CSV serialization of traces, event logs, and the analytic ground truth.
//!
//! Values are written with Rust's shortest round-trip formatting, so parsing
//! a column back with `str::parse::<f64>` reproduces the in-memory value
//! bit for bit. That is what makes byte-comparison of trace files a valid
//! determinism check.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Error;
use crate::scenario::{theta_for_slope, RampSegment};
use crate::sim::{EventLog, TraceRecord};
use crate::Result;

/// Column layout of `trace.csv`.
pub const TRACE_HEADER: &str = "t,x_v1,x_v2,x_p1,x_p2,xtau_v1,xtau_v2,xtau_p1,xtau_p2,\
ystar_v1,ystar_v2,ystar_p1,ystar_p2,y_v1,y_v2,y_p1,y_p2,\
alpha_1,alpha_2,theta_1,theta_2,u_1,u_2,V,b_V,event";

/// Column layout of `events.csv`.
pub const EVENTS_HEADER: &str = "t,b_value,V,mu,sigma";

/// Column layout of `ground_truth.csv`.
pub const GROUND_TRUTH_HEADER: &str = "t,segment,theta_1,theta_2";

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write the full trace: header row, then one row per step, 26 columns.
pub fn write_trace(trace: &[TraceRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for r in trace {
            write!(w, "{}", r.t)?;
            for v in
                r.x.iter()
                    .chain(r.x_tau.iter())
                    .chain(r.y_star.iter())
                    .chain(r.y.iter())
            {
                write!(w, ",{v}")?;
            }
            writeln!(
                w,
                ",{},{},{},{},{},{},{},{},{}",
                r.alpha[0],
                r.alpha[1],
                r.theta_true[0],
                r.theta_true[1],
                r.u[0],
                r.u[1],
                r.v,
                r.b_v,
                u8::from(r.event)
            )?;
        }
        w.flush()
    })();
    res.map_err(io_err(path))
}

/// Write the detected boundaries.
pub fn write_events(events: &EventLog, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "{EVENTS_HEADER}")?;
        for ev in events.iter() {
            writeln!(
                w,
                "{},{},{},{},{}",
                ev.time, ev.b_value, ev.v_value, ev.mu, ev.sigma
            )?;
        }
        w.flush()
    })();
    res.map_err(io_err(path))
}

/// Write the analytic slope-change times with the parameters of the segment
/// entered at each crossing.
pub fn write_ground_truth(
    times: &[f64],
    segments: &[RampSegment],
    g: f64,
    path: &Path,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "{GROUND_TRUTH_HEADER}")?;
        for (i, t) in times.iter().enumerate() {
            let theta = theta_for_slope(segments[i + 1].beta, g);
            writeln!(w, "{},{},{},{}", t, i + 1, theta[0], theta[1])?;
        }
        w.flush()
    })();
    res.map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use crate::scenario::slope_change_times;
    use crate::sim::run_simulation;

    fn tiny_run(steps: usize) -> Vec<TraceRecord> {
        let cfg = SimConfig {
            duration: steps as f64 * 0.01,
            ..SimConfig::default()
        };
        run_simulation(cfg).unwrap().trace
    }

    #[test]
    fn header_has_26_columns() {
        assert_eq!(TRACE_HEADER.split(',').count(), 26);
    }

    #[test]
    fn three_step_run_writes_four_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace(&tiny_run(3), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], TRACE_HEADER);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 26);
        }
    }

    #[test]
    fn csv_round_trips_exactly() {
        let trace = tiny_run(120);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace(&trace, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for (line, rec) in text.lines().skip(1).zip(&trace) {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse::<f64>().unwrap()).collect();
            assert_eq!(cols[0], rec.t);
            assert_eq!(&cols[1..5], rec.x.as_slice());
            assert_eq!(&cols[5..9], rec.x_tau.as_slice());
            assert_eq!(&cols[9..13], rec.y_star.as_slice());
            assert_eq!(&cols[13..17], rec.y.as_slice());
            assert_eq!(&cols[17..19], rec.alpha.as_slice());
            assert_eq!(&cols[19..21], rec.theta_true.as_slice());
            assert_eq!(&cols[21..23], &rec.u);
            assert_eq!(cols[23], rec.v);
            assert_eq!(cols[24], rec.b_v);
            assert_eq!(cols[25], f64::from(u8::from(rec.event)));
        }
    }

    #[test]
    fn events_file_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.csv");
        write_events(&EventLog::default(), &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap().trim(),
            EVENTS_HEADER
        );
    }

    #[test]
    fn ground_truth_lists_each_crossing() {
        let cfg = SimConfig::default();
        let times = slope_change_times(&cfg.segments, cfg.g);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ground_truth.csv");
        write_ground_truth(&times, &cfg.segments, cfg.g, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        // Second crossing enters the final inclined segment.
        assert!(lines[2].starts_with("30.289"));
        assert!(lines[2].contains(",2,"));
    }
}
