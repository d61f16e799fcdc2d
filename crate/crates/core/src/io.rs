//! File formats: JSON patterns, down-sets and certificates, CSV ladders and
//! plain-text blow-up edge lists. Everything on disk is 1-based.

use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Serialize, Serializer};

use crate::chain::step_rows;
use crate::chain::ChainLadder;
use crate::dominance::{Composition, DownSet};
use crate::error::{Error, Result};
use crate::ladder::LadderEntry;
use crate::pattern::Pattern;
use crate::scalar::Real;
use crate::simplex::OptResult;

pub(crate) fn ser_rational<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub(crate) fn ser_rational_pairs<S: Serializer>(
    items: &[(i64, BigRational)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(items.len()))?;
    for (j2, q) in items {
        seq.serialize_element(&(j2, q.to_string()))?;
    }
    seq.end()
}

/// `{"r": 3, "m": 3, "multisets": [[1,1,2],[1,2,3]]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternFile {
    pub r: u32,
    pub m: usize,
    pub multisets: Vec<Vec<usize>>,
}

impl PatternFile {
    pub fn from_pattern(p: &Pattern) -> Self {
        Self {
            r: p.r(),
            m: p.m(),
            multisets: p.multisets().iter().map(|d| d.elements().into_iter().map(|e| e + 1).collect()).collect(),
        }
    }

    pub fn to_pattern(&self) -> Result<Pattern> {
        if self.r < 2 {
            return Err(Error::UniformityTooSmall { min: 2, got: self.r });
        }
        let lists = self
            .multisets
            .iter()
            .map(|l| {
                l.iter()
                    .map(|&e| {
                        if e == 0 || e > self.m {
                            Err(Error::ElementOutOfRange { element: e, m: self.m })
                        } else {
                            Ok(e - 1)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Pattern::from_element_lists(self.r, self.m, &lists)
    }
}

pub fn parse_pattern(json: &str) -> Result<Pattern> {
    let file: PatternFile = serde_json::from_str(json).map_err(|e| Error::Format(e.to_string()))?;
    file.to_pattern()
}

pub fn pattern_json(p: &Pattern) -> String {
    serde_json::to_string(&PatternFile::from_pattern(p)).expect("plain data")
}

/// `{"r": 3, "s": 3, "members": [[1,1,1],[2,1,0]]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownSetFile {
    pub r: u32,
    pub s: usize,
    pub members: Vec<Vec<u32>>,
}

impl DownSetFile {
    pub fn from_down_set(a: &DownSet) -> Self {
        Self { r: a.r(), s: a.s(), members: a.members().iter().map(|c| c.parts().to_vec()).collect() }
    }

    pub fn to_down_set(&self) -> Result<DownSet> {
        let members = self.members.iter().map(|m| Composition::new(m.clone())).collect::<Result<_>>()?;
        DownSet::new(self.r, self.s, members)
    }
}

pub fn parse_down_set(json: &str) -> Result<DownSet> {
    let file: DownSetFile = serde_json::from_str(json).map_err(|e| Error::Format(e.to_string()))?;
    file.to_down_set()
}

/// Lower-bound certificate for a Lagrangian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub pattern: PatternFile,
    pub value: f64,
    pub point: Vec<f64>,
    pub kkt_residual: f64,
    pub starts: usize,
    pub seed: u64,
}

impl Certificate {
    pub fn new<T: Real>(pattern: &Pattern, res: &OptResult<T>) -> Self {
        Self {
            pattern: PatternFile::from_pattern(pattern),
            value: res.value.to_f64_lossy(),
            point: res.point.coords().iter().map(|c| c.to_f64_lossy()).collect(),
            kkt_residual: res.kkt_residual.to_f64_lossy(),
            starts: res.starts_used,
            seed: res.seed,
        }
    }
}

/// One line per edge, `r` space-separated 1-based vertex ids.
pub fn edge_list(edges: &[Vec<usize>]) -> String {
    let mut out = String::new();
    for e in edges {
        let ids: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
        out.push_str(&ids.join(" "));
        out.push('\n');
    }
    out
}

pub fn chain_csv<T: Real>(ladder: &ChainLadder<T>) -> String {
    let mut out = String::from("index,num_edges,value,step,kkt_residual\n");
    for row in step_rows(ladder) {
        let _ = writeln!(out, "{},{},{},{},{}", row.index, row.num_edges, row.value, row.step, row.kkt_residual);
    }
    out
}

pub fn ladder_csv(entries: &[LadderEntry]) -> String {
    let mut out = String::from("index,composition,value_num,value_den,step_num,step_den\n");
    for e in entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.index,
            e.composition,
            e.value.numer(),
            e.value.denom(),
            e.step.numer(),
            e.step.denom()
        );
    }
    out
}
