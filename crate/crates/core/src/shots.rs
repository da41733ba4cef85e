//! Measurement records: one bitstring per shot, `b_i = 1` when site `i` was
//! found Rydberg-excited (`n_i = 1`, `σᶻ_i = +1`).
//!
//! File format: the first line is a JSON metadata object, every following
//! line is one shot written as `L` characters `0`/`1`, site 0 first.

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::quench::InitialState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotMetadata {
    pub device_id: String,
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_um: Option<f64>,
    pub g: f64,
    #[serde(rename = "J")]
    pub coupling: f64,
    pub initial_state: InitialState,
    pub t_us: f64,
    pub n_shots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecordSet {
    pub metadata: ShotMetadata,
    /// `n_shots × L` bits, row-major.
    bits: Vec<u8>,
}

impl ShotRecordSet {
    /// Builds a record set; `metadata.n_shots` is overwritten with the row count.
    pub fn new(mut metadata: ShotMetadata, rows: Vec<Vec<u8>>) -> Result<Self> {
        let l = metadata.sites;
        if l == 0 {
            return Err(Error::Format("shot records need L >= 1".into()));
        }
        if rows.is_empty() {
            return Err(Error::Format("shot record set is empty".into()));
        }
        let mut bits = Vec::with_capacity(rows.len() * l);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != l {
                return Err(Error::Format(format!(
                    "shot {i} has {} bits, expected L = {l}",
                    row.len()
                )));
            }
            if let Some(b) = row.iter().find(|&&b| b > 1) {
                return Err(Error::Format(format!(
                    "shot {i} contains non-binary value {b}"
                )));
            }
            bits.extend_from_slice(row);
        }
        metadata.n_shots = rows.len();
        Ok(ShotRecordSet { metadata, bits })
    }

    pub fn sites(&self) -> usize {
        self.metadata.sites
    }

    pub fn n_shots(&self) -> usize {
        self.bits.len() / self.metadata.sites
    }

    pub fn shot(&self, i: usize) -> &[u8] {
        let l = self.metadata.sites;
        &self.bits[i * l..(i + 1) * l]
    }

    pub fn shots(&self) -> impl Iterator<Item = &[u8]> {
        self.bits.chunks(self.metadata.sites)
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = serde_json::to_string(&self.metadata)?;
        out.push('\n');
        for shot in self.shots() {
            out.extend(shot.iter().map(|&b| if b == 1 { '1' } else { '0' }));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty shot file".into()))??;
        let metadata: ShotMetadata = serde_json::from_str(&header)
            .map_err(|e| Error::Format(format!("bad metadata line: {e}")))?;
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    other => Err(Error::Format(format!(
                        "line {}: unexpected character '{other}'",
                        n + 2
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        let declared = metadata.n_shots;
        let set = ShotRecordSet::new(metadata, rows)?;
        if declared != set.n_shots() {
            return Err(Error::Format(format!(
                "metadata declares {declared} shots but the file holds {}",
                set.n_shots()
            )));
        }
        Ok(set)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(fs::File::open(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text()?.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(sites: usize) -> ShotMetadata {
        ShotMetadata {
            device_id: "test".into(),
            sites,
            a_um: Some(7.5),
            g: 1.0,
            coupling: 1.2,
            initial_state: InitialState::Down,
            t_us: 0.5,
            n_shots: 0,
            seed: Some(3),
        }
    }

    #[test]
    fn round_trip() {
        let set = ShotRecordSet::new(meta(3), vec![vec![0, 1, 1], vec![1, 0, 0]]).unwrap();
        let text = set.to_text().unwrap();
        assert!(text.ends_with("011\n100\n"));
        let back = ShotRecordSet::parse(text.as_bytes()).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.shot(1), &[1, 0, 0]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(ShotRecordSet::new(meta(3), vec![vec![0, 1]]).is_err());
        assert!(ShotRecordSet::new(meta(3), vec![]).is_err());
        let mut m = meta(2);
        m.n_shots = 1;
        let header = serde_json::to_string(&m).unwrap();
        assert!(ShotRecordSet::parse(format!("{header}\n01\n1x\n").as_bytes()).is_err());
        assert!(ShotRecordSet::parse(format!("{header}\n01\n10\n").as_bytes()).is_err());
        assert!(ShotRecordSet::parse(format!("{header}\n01\n").as_bytes()).is_ok());
    }
}
