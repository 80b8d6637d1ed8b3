//! Run logs and their CSV forms.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::grid::WorldPoint;
use crate::kinematics::{Axis, Direction};
use crate::planner::Mode;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Granularity {
    Substep,
    Fullstep,
}

/// One sample of a run. `ref_*` is the point of the reference path closest
/// to the actual position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t: u64,
    pub ref_x: f64,
    pub ref_y: f64,
    pub ref_z: f64,
    pub act_x: f64,
    pub act_y: f64,
    pub act_z: f64,
    pub mode: Mode,
    pub granularity: Granularity,
}

impl LogRecord {
    pub fn new(t: u64, reference: WorldPoint, actual: WorldPoint, mode: Mode, granularity: Granularity) -> Self {
        Self {
            t,
            ref_x: reference.x,
            ref_y: reference.y,
            ref_z: reference.z,
            act_x: actual.x,
            act_y: actual.y,
            act_z: actual.z,
            mode,
            granularity,
        }
    }

    pub fn reference(&self) -> WorldPoint {
        WorldPoint::new(self.ref_x, self.ref_y, self.ref_z)
    }

    pub fn actual(&self) -> WorldPoint {
        WorldPoint::new(self.act_x, self.act_y, self.act_z)
    }

    pub fn error(&self) -> f64 {
        self.actual().distance(self.reference())
    }
}

/// Time-ordered records. Each granularity forms its own strictly
/// increasing sequence of time indices; sub-step and full-step records may
/// share an index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub records: Vec<LogRecord>,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: LogRecord) {
        debug_assert!(
            self.last_of(record.granularity).is_none_or(|r| r.t < record.t),
            "time index must increase"
        );
        self.records.push(record);
    }

    pub fn last_of(&self, granularity: Granularity) -> Option<&LogRecord> {
        self.records.iter().rev().find(|r| r.granularity == granularity)
    }

    pub fn last(&self) -> Option<&LogRecord> {
        self.records.last()
    }

    pub fn iter(&self, granularity: Granularity) -> impl Iterator<Item = &LogRecord> + '_ {
        self.records.iter().filter(move |r| r.granularity == granularity)
    }

    /// Modes visited, consecutive repeats collapsed.
    pub fn phases(&self) -> Vec<Mode> {
        let mut out: Vec<Mode> = Vec::new();
        for r in &self.records {
            if out.last() != Some(&r.mode) {
                out.push(r.mode);
            }
        }
        out
    }

    pub fn check_time_order(&self) -> Result<(), SimError> {
        for g in [Granularity::Substep, Granularity::Fullstep] {
            let ts: Vec<u64> = self.iter(g).map(|r| r.t).collect();
            if let Some(w) = ts.windows(2).find(|w| w[1] <= w[0]) {
                return Err(SimError::TimeOrder { previous: w[0], next: w[1] });
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        if self.records.is_empty() {
            w.write_record(["t", "ref_x", "ref_y", "ref_z", "act_x", "act_y", "act_z", "mode", "granularity"])?;
        }
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, SimError> {
        let mut r = csv::Reader::from_reader(input);
        let records = r.deserialize().collect::<Result<Vec<LogRecord>, _>>()?;
        let log = Self { records };
        log.check_time_order()?;
        Ok(log)
    }
}

/// One controller solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcTraceRow {
    pub step_index: u64,
    pub axis: Axis,
    pub direction: Direction,
    pub u: Vec<f64>,
    pub cost: f64,
    pub x: f64,
    pub y: f64,
    pub ref_x: f64,
    pub ref_y: f64,
}

pub fn write_trace_csv<W: Write>(rows: &[MpcTraceRow], horizon: usize, out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step_index".to_string(), "axis".into(), "sign".into()];
    header.extend((0..horizon).map(|k| format!("u{k}")));
    header.extend(["cost", "x", "y", "ref_x", "ref_y"].map(String::from));
    w.write_record(&header)?;
    for row in rows {
        let mut fields = vec![
            row.step_index.to_string(),
            row.axis.to_string(),
            if row.direction == Direction::Forward { "1" } else { "-1" }.to_string(),
        ];
        fields.extend(row.u.iter().map(f64::to_string));
        fields.extend([row.cost, row.x, row.y, row.ref_x, row.ref_y].map(|v| v.to_string()));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<MpcTraceRow>, SimError> {
    let mut r = csv::Reader::from_reader(input);
    let horizon = r.headers()?.iter().filter(|h| h.starts_with('u')).count();
    let bad = |msg: String| SimError::Format(msg);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != horizon + 8 {
            return Err(bad(format!("trace row has {} fields", rec.len())));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("field {i}: {e}")));
        let axis = match &rec[1] {
            "x" => Axis::X,
            "y" => Axis::Y,
            other => return Err(bad(format!("unknown axis `{other}`"))),
        };
        let direction = match &rec[2] {
            "1" => Direction::Forward,
            "-1" => Direction::Reverse,
            other => return Err(bad(format!("unknown sign `{other}`"))),
        };
        let u = (0..horizon).map(|k| num(3 + k)).collect::<Result<Vec<_>, _>>()?;
        let tail = 3 + horizon;
        rows.push(MpcTraceRow {
            step_index: rec[0].parse().map_err(|e| bad(format!("step_index: {e}")))?,
            axis,
            direction,
            u,
            cost: num(tail)?,
            x: num(tail + 1)?,
            y: num(tail + 2)?,
            ref_x: num(tail + 3)?,
            ref_y: num(tail + 4)?,
        });
    }
    Ok(rows)
}

/// Touchdown joint angles of one stepping limb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRow {
    pub step_index: u64,
    pub substep: u8,
    pub limb_id: String,
    pub theta0_rad: f64,
    pub theta1_rad: f64,
    pub theta2_rad: f64,
}

pub fn write_joint_csv<W: Write>(rows: &[JointRow], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["step_index", "substep", "limb_id", "theta0_rad", "theta1_rad", "theta2_rad"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_joint_csv<R: Read>(input: R) -> Result<Vec<JointRow>, SimError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<JointRow>, _>>()?)
}
