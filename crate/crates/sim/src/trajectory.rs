//! CSV trajectories.
//!
//! Every number is written in scientific notation with 17 significant
//! digits, which reads back to the identical double.

use std::io::{Read, Write};

use dat_core::{MetricsRecord, SystemState, TrajectoryLog};

/// Column names for `n` agents in dimension `dim`. Agent and component
/// numbers are 1-based.
pub fn header(n: usize, dim: usize) -> Vec<String> {
    let mut cols = vec![String::from("t")];
    for i in 1..=n {
        for name in ["e_x", "e_v", "e_p", "e_q"] {
            cols.push(format!("{name}_{i}"));
        }
    }
    cols.push(String::from("V1"));
    cols.push(String::from("V2"));
    for name in ["S1", "S2", "sumz"] {
        for c in 1..=dim {
            cols.push(format!("{name}_{c}"));
        }
    }
    cols
}

/// One CSV row for `rec`, in [`header`] order.
pub fn record_row(rec: &MetricsRecord) -> Vec<f64> {
    let mut row = vec![rec.t];
    for i in 0..rec.position_errors.len() {
        row.push(rec.position_errors[i]);
        row.push(rec.velocity_errors[i]);
        row.push(rec.filter_position_errors[i]);
        row.push(rec.filter_velocity_errors[i]);
    }
    row.push(rec.v1);
    row.push(rec.v2);
    row.extend_from_slice(&rec.s1);
    row.extend_from_slice(&rec.s2);
    row.extend_from_slice(&rec.sum_z);
    row
}

/// A header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_log(log: &TrajectoryLog) -> Self {
        Self {
            header: header(log.n, log.dim),
            rows: log.records.iter().map(record_row).collect(),
        }
    }

    /// Full-state dump: `t` followed by `x, v, z, zdot, r, vr`, each agent-major.
    pub fn from_states(states: &[SystemState], n: usize, dim: usize) -> Self {
        let mut header = vec![String::from("t")];
        for field in ["x", "v", "z", "zdot", "r", "vr"] {
            for i in 1..=n {
                for c in 1..=dim {
                    header.push(format!("{field}_{i}_{c}"));
                }
            }
        }
        let rows = states
            .iter()
            .map(|s| std::iter::once(s.t).chain(s.flatten()).collect())
            .collect();
        Self { header, rows }
    }

    pub fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_number(x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(input: R) -> csv::Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|e| {
                        csv::Error::from(std::io::Error::new(
                            std::io::ErrorKind::InvalidData,
                            format!("bad number `{field}`: {e}"),
                        ))
                    })
                })
                .collect::<csv::Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        buf
    }
}

/// Scientific notation with 17 significant digits; `NaN` for undefined
/// entries.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        String::from("NaN")
    } else {
        format!("{x:.16e}")
    }
}
