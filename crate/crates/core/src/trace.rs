//! Evaluation traces: one row per control step, with CSV round-trip.
//!
//! Numbers serialize with 17 significant digits so a parsed trace is
//! bit-identical to the one written.

use std::io::{BufRead, Write};

use crate::error::Error;
use crate::util::fmt_f64;
use crate::Result;

/// Fixed column layout of a trace CSV.
pub const TRACE_COLUMNS: [&str; 28] = [
    "time",
    "v_cmd",
    "v_x",
    "v_y",
    "v_z",
    "omega_yaw",
    "phi_lh",
    "phi_lf",
    "phi_rf",
    "phi_rh",
    "contact_lh",
    "contact_lf",
    "contact_rf",
    "contact_rh",
    "grf_lh",
    "grf_lf",
    "grf_rf",
    "grf_rh",
    "foot_speed_lh",
    "foot_speed_lf",
    "foot_speed_rf",
    "foot_speed_rh",
    "r_cmd",
    "r_smooth",
    "r_tem",
    "r_mor",
    "total",
    "dir",
];

/// One control step of an evaluation rollout. Per-leg arrays follow the
/// canonical leg order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub v_cmd: f64,
    /// Torso velocity in the body frame (v_x, v_y, v_z), m/s.
    pub lin_vel: [f64; 3],
    pub yaw_rate: f64,
    pub phases: [f64; 4],
    pub contact: [bool; 4],
    pub grf: [f64; 4],
    pub foot_speed: [f64; 4],
    pub r_cmd: f64,
    pub r_smooth: f64,
    pub r_tem: f64,
    pub r_mor: f64,
    pub total: f64,
    /// Clock direction this step: +1 forward, -1 reversed.
    pub dir: i8,
}

/// A full rollout trace plus episode-level flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    /// Set when the episode ended on a physics fault instead of running to
    /// its scheduled duration.
    pub faulted: bool,
}

impl Trace {
    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Write the trace as CSV with the fixed column layout.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
        for row in &self.rows {
            let mut fields = Vec::with_capacity(TRACE_COLUMNS.len());
            fields.push(fmt_f64(row.time));
            fields.push(fmt_f64(row.v_cmd));
            fields.extend(row.lin_vel.iter().map(|v| fmt_f64(*v)));
            fields.push(fmt_f64(row.yaw_rate));
            fields.extend(row.phases.iter().map(|v| fmt_f64(*v)));
            fields.extend(row.contact.iter().map(|c| (*c as u8).to_string()));
            fields.extend(row.grf.iter().map(|v| fmt_f64(*v)));
            fields.extend(row.foot_speed.iter().map(|v| fmt_f64(*v)));
            for v in [row.r_cmd, row.r_smooth, row.r_tem, row.r_mor, row.total] {
                fields.push(fmt_f64(v));
            }
            fields.push(row.dir.to_string());
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Parse a trace written by [`Trace::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Trace("empty trace file".into()))??;
        let expect = TRACE_COLUMNS.join(",");
        if header.trim() != expect {
            return Err(Error::Trace(format!(
                "unexpected trace header: {}",
                header.trim()
            )));
        }
        let mut trace = Trace::default();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != TRACE_COLUMNS.len() {
                return Err(Error::Trace(format!(
                    "line {}: expected {} fields, found {}",
                    lineno + 2,
                    TRACE_COLUMNS.len(),
                    fields.len()
                )));
            }
            let num = |i: usize| -> Result<f64> {
                fields[i].parse::<f64>().map_err(|_| {
                    Error::Trace(format!("line {}: bad number {:?}", lineno + 2, fields[i]))
                })
            };
            let flag = |i: usize| -> Result<bool> {
                match fields[i] {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::Trace(format!(
                        "line {}: bad contact flag {other:?}",
                        lineno + 2
                    ))),
                }
            };
            trace.push(TraceRow {
                time: num(0)?,
                v_cmd: num(1)?,
                lin_vel: [num(2)?, num(3)?, num(4)?],
                yaw_rate: num(5)?,
                phases: [num(6)?, num(7)?, num(8)?, num(9)?],
                contact: [flag(10)?, flag(11)?, flag(12)?, flag(13)?],
                grf: [num(14)?, num(15)?, num(16)?, num(17)?],
                foot_speed: [num(18)?, num(19)?, num(20)?, num(21)?],
                r_cmd: num(22)?,
                r_smooth: num(23)?,
                r_tem: num(24)?,
                r_mor: num(25)?,
                total: num(26)?,
                dir: match fields[27] {
                    "1" => 1,
                    "-1" => -1,
                    other => {
                        return Err(Error::Trace(format!(
                            "line {}: bad direction flag {other:?}",
                            lineno + 2
                        )))
                    }
                },
            });
        }
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row(t: f64) -> TraceRow {
        TraceRow {
            time: t,
            v_cmd: 0.2,
            lin_vel: [0.19, -0.003, 0.01],
            yaw_rate: 0.02,
            phases: [0.1, 0.6, 0.1, 0.6],
            contact: [false, true, false, true],
            grf: [0.0, 1.7, 0.0, 1.6],
            foot_speed: [0.3, 0.01, 0.29, 0.02],
            r_cmd: -0.03,
            r_smooth: -0.01,
            r_tem: -0.05,
            r_mor: -0.002,
            total: 0.908,
            dir: 1,
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mut trace = Trace::default();
        for i in 0..5 {
            let mut row = sample_row(i as f64 * 0.01);
            // Exercise values with no short decimal representation.
            row.lin_vel[0] = 0.1 + i as f64 * 1e-17 + std::f64::consts::PI * 1e-3;
            trace.push(row);
        }
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let parsed = Trace::read_csv(&buf[..]).unwrap();
        assert_eq!(parsed, trace);
    }

    #[test]
    fn header_checked_on_read() {
        let err = Trace::read_csv("nope,header\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("header"));
        assert!(Trace::read_csv("".as_bytes()).is_err());
    }

    #[test]
    fn malformed_rows_reported_with_line_numbers() {
        let mut buf = Vec::new();
        let mut trace = Trace::default();
        trace.push(sample_row(0.0));
        trace.write_csv(&mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("1,2,3\n");
        let err = Trace::read_csv(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn column_count_matches_row_serialization() {
        let mut trace = Trace::default();
        trace.push(sample_row(0.0));
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header_fields = lines.next().unwrap().split(',').count();
        let row_fields = lines.next().unwrap().split(',').count();
        assert_eq!(header_fields, TRACE_COLUMNS.len());
        assert_eq!(row_fields, TRACE_COLUMNS.len());
    }
}
