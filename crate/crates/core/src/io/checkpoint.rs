//! Binary checkpoints: magic, format version, a JSON header, then the
//! parameter vector and the Adam moments as little-endian f64.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::net::{NetworkSpec, ScalingRules};
use crate::train::AdamState;

pub const MAGIC: &[u8; 8] = b"SGPPINN\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub model: String,
    pub spec: NetworkSpec,
    pub scaling: ScalingRules,
    pub transform: String,
    pub epoch: usize,
    pub config_hash: String,
    pub adam_step: u64,
    /// Full run configuration as TOML, so `predict` can rebuild the problem.
    pub config: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub theta: Vec<f64>,
    pub adam_m: Vec<f64>,
    pub adam_v: Vec<f64>,
}

impl Checkpoint {
    pub fn adam_state(&self) -> AdamState {
        AdamState {
            m: self.adam_m.clone(),
            v: self.adam_v.clone(),
            step: self.header.adam_step,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("header serializes");
        let mut out = Vec::with_capacity(32 + header.len() + 24 * self.theta.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for block in [&self.theta, &self.adam_m, &self.adam_v] {
            out.extend_from_slice(&(block.len() as u64).to_le_bytes());
            for v in block.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IoError> {
        let mut r = bytes;
        let bad = |m: &str| IoError::Format(format!("checkpoint: {m}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| bad("truncated magic"))?;
        if &magic != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let version = u32::from_le_bytes(take::<4>(&mut r).ok_or_else(|| bad("truncated version"))?);
        if version != FORMAT_VERSION {
            return Err(bad(&format!("format version {version} is not supported (expected {FORMAT_VERSION})")));
        }
        let hlen = u64::from_le_bytes(take::<8>(&mut r).ok_or_else(|| bad("truncated header length"))?) as usize;
        if hlen > r.len() {
            return Err(bad("truncated header"));
        }
        let header: CheckpointHeader = serde_json::from_slice(&r[..hlen]).map_err(|e| bad(&format!("header: {e}")))?;
        r = &r[hlen..];
        let mut blocks = Vec::with_capacity(3);
        for name in ["parameters", "adam m", "adam v"] {
            let n = u64::from_le_bytes(take::<8>(&mut r).ok_or_else(|| bad(&format!("truncated {name} length")))?) as usize;
            if n.checked_mul(8).map_or(true, |b| b > r.len()) {
                return Err(bad(&format!("truncated {name}")));
            }
            let v: Vec<f64> = r[..8 * n]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            r = &r[8 * n..];
            blocks.push(v);
        }
        if !r.is_empty() {
            return Err(bad("trailing bytes"));
        }
        let adam_v = blocks.pop().expect("3 blocks");
        let adam_m = blocks.pop().expect("3 blocks");
        let theta = blocks.pop().expect("3 blocks");
        let n = header.spec.param_count();
        if theta.len() != n {
            return Err(bad(&format!("{} parameters stored, spec needs {n}", theta.len())));
        }
        if adam_m.len() != n || adam_v.len() != n {
            return Err(bad("optimizer moments do not match the parameter count"));
        }
        Ok(Checkpoint {
            header,
            theta,
            adam_m,
            adam_v,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        let mut f = std::fs::File::create(path).map_err(|e| IoError::file(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| IoError::file(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let bytes = std::fs::read(path).map_err(|e| IoError::file(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            IoError::Format(m) => IoError::file(path, m),
            other => other,
        })
    }
}

fn take<const N: usize>(r: &mut &[u8]) -> Option<[u8; N]> {
    if r.len() < N {
        return None;
    }
    let (a, b) = r.split_at(N);
    *r = b;
    Some(a.try_into().expect("N bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{InputScale, OutputScale};

    fn sample() -> Checkpoint {
        let spec = NetworkSpec::new(["y", "t"], &[3], ["u", "gamma_p"]).unwrap();
        let n = spec.param_count();
        Checkpoint {
            header: CheckpointHeader {
                model: "1d".into(),
                spec,
                scaling: ScalingRules {
                    inputs: vec![InputScale { name: "y".into(), lo: 0.0, hi: 1e-6 }],
                    outputs: vec![OutputScale { name: "u".into(), divisor: 0.1 / 3.0 }],
                },
                transform: "t".into(),
                epoch: 7,
                config_hash: "ab".into(),
                adam_step: 7,
                config: "x = 1\n".into(),
            },
            theta: (0..n).map(|i| (i as f64).sin() / 7.0).collect(),
            adam_m: vec![1e-300; n],
            adam_v: vec![f64::MIN_POSITIVE; n],
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let c = sample();
        let b = c.to_bytes();
        let back = Checkpoint::from_bytes(&b).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_bytes(), b);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let mut b = sample().to_bytes();
        b[8] = 9;
        let e = Checkpoint::from_bytes(&b).unwrap_err().to_string();
        assert!(e.contains("version 9"), "{e}");
    }

    #[test]
    fn truncation_is_rejected() {
        let b = sample().to_bytes();
        for cut in [3, 12, 30, b.len() - 1] {
            assert!(Checkpoint::from_bytes(&b[..cut]).is_err());
        }
    }
}
