//! Chronological CSI database and its JSON-lines file format.
//!
//! One record per line:
//! `{"idx": int, "t": float|null, "pos": [x,y,z]|null, "re": [M floats], "im": [M floats]}`

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::environment::Environment;
use super::geometry::Vec3;
use super::ChannelError;
use crate::numerics::CVector;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CsiRecord<T> {
    pub index: usize,
    pub timestamp: Option<f64>,
    pub h: CVector<T>,
    /// Ground-truth UE position; used for evaluation only.
    pub position: Option<Vec3<T>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    idx: usize,
    t: Option<f64>,
    pos: Option<[f64; 3]>,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Records with 0-based contiguous indices and a common channel dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiDatabase<T> {
    records: Vec<CsiRecord<T>>,
}

impl<T: Scalar> CsiDatabase<T> {
    pub fn new(records: Vec<CsiRecord<T>>) -> Result<Self, ChannelError> {
        let first = records.first().ok_or(ChannelError::EmptyDatabase)?;
        let dim = first.h.dim();
        for (i, r) in records.iter().enumerate() {
            if r.index != i {
                return Err(ChannelError::Database(format!(
                    "record {i} carries index {}; indices must be 0-based and contiguous",
                    r.index
                )));
            }
            if r.h.dim() != dim {
                return Err(ChannelError::Database(format!(
                    "record {i} has dimension {}, expected {dim}",
                    r.h.dim()
                )));
            }
        }
        Ok(Self { records })
    }

    /// Wraps bare channel vectors, indexing them in the given order.
    pub fn from_channels(channels: Vec<CVector<T>>) -> Result<Self, ChannelError> {
        Self::new(
            channels
                .into_iter()
                .enumerate()
                .map(|(index, h)| CsiRecord {
                    index,
                    timestamp: None,
                    h,
                    position: None,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Channel dimension `M`.
    pub fn dim(&self) -> usize {
        self.records[0].h.dim()
    }

    pub fn records(&self) -> &[CsiRecord<T>] {
        &self.records
    }

    pub fn get(&self, index: usize) -> Option<&CsiRecord<T>> {
        self.records.get(index)
    }

    pub fn channel(&self, index: usize) -> &CVector<T> {
        &self.records[index].h
    }

    /// The most recent record.
    pub fn latest(&self) -> &CsiRecord<T> {
        self.records.last().expect("database is non-empty")
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), ChannelError> {
        for r in &self.records {
            let line = RecordLine {
                idx: r.index,
                t: r.timestamp,
                pos: r
                    .position
                    .map(|p| [p.x.as_f64(), p.y.as_f64(), p.z.as_f64()]),
                re: r.h.iter().map(|z| z.re.as_f64()).collect(),
                im: r.h.iter().map(|z| z.im.as_f64()).collect(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, ChannelError> {
        let mut records = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: RecordLine = serde_json::from_str(&line)
                .map_err(|e| ChannelError::Database(format!("line {}: {e}", lineno + 1)))?;
            let re: Vec<T> = rec.re.iter().map(|&v| T::lit(v)).collect();
            let im: Vec<T> = rec.im.iter().map(|&v| T::lit(v)).collect();
            let h = CVector::from_parts(&re, &im)
                .map_err(|e| ChannelError::Database(format!("line {}: {e}", lineno + 1)))?;
            records.push(CsiRecord {
                index: rec.idx,
                timestamp: rec.t,
                h,
                position: rec.pos.map(|p| Vec3::from(p.map(T::lit))),
            });
        }
        Self::new(records)
    }
}

/// Record `i` holds the channel at `trajectory[i]`; timestamps are
/// `i · sample_period` when a period is given.
pub fn generate_database<T: Scalar>(
    trajectory: &[Vec3<T>],
    env: &Environment<T>,
    sample_period: Option<f64>,
) -> Result<CsiDatabase<T>, ChannelError> {
    if trajectory.is_empty() {
        return Err(ChannelError::EmptyDatabase);
    }
    let records = trajectory
        .iter()
        .enumerate()
        .map(|(index, p)| {
            Ok(CsiRecord {
                index,
                timestamp: sample_period.map(|dt| dt * index as f64),
                h: env.channel_at(p)?,
                position: Some(*p),
            })
        })
        .collect::<Result<Vec<_>, ChannelError>>()?;
    CsiDatabase::new(records)
}
