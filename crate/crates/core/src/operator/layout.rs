use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered tensor-factor dimensions `[d1, ..., dm]` of a multipartite system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SystemLayout {
    dims: Vec<usize>,
}

impl SystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidLayout("layout needs at least one factor".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidLayout(format!("zero-dimensional factor in {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn bipartite(a: usize, b: usize) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Layout of the factors listed in `keep`, in ascending index order.
    pub fn subsystem(&self, keep: &[usize]) -> Result<Self> {
        let keep = normalize_indices(keep, self.parties())?;
        Self::new(keep.iter().map(|&i| self.dims[i]).collect())
    }

    /// Concatenation `self ⊗ other`.
    pub fn join(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::LayoutMismatch { expected: self.total(), found: dim });
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for SystemLayout {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<SystemLayout> for Vec<usize> {
    fn from(l: SystemLayout) -> Self {
        l.dims
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

impl FromStr for SystemLayout {
    type Err = Error;
    /// Parses `2x2x3`.
    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(['x', 'X'])
            .map(|p| p.trim().parse::<usize>().map_err(|_| Error::InvalidLayout(format!("cannot parse `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }
}

/// Sorted, deduplicated, range-checked copy of a subsystem index set.
pub(crate) fn normalize_indices(idx: &[usize], parties: usize) -> Result<Vec<usize>> {
    let mut v = idx.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&bad) = v.iter().find(|&&i| i >= parties) {
        return Err(Error::IndexOutOfRange { index: bad, parties });
    }
    Ok(v)
}

/// Disjoint blocks of factor indices (0-based) covering `{0, ..., m-1}`.
///
/// Displayed and parsed 1-based, e.g. `{{1,2},{3}}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    parties: usize,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, parties: usize) -> Result<Self> {
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        if blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        blocks.sort();
        let mut seen = vec![false; parties];
        for &i in blocks.iter().flatten() {
            if i >= parties {
                return Err(Error::InvalidPartition(format!("index {} exceeds {parties} parties", i + 1)));
            }
            if seen[i] {
                return Err(Error::InvalidPartition(format!("index {} repeated", i + 1)));
            }
            seen[i] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("index {} not covered", missing + 1)));
        }
        Ok(Self { blocks, parties })
    }

    /// `{{1}, {2}, ..., {m}}`.
    pub fn finest(parties: usize) -> Self {
        Self { blocks: (0..parties).map(|i| vec![i]).collect(), parties }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn is_finest(&self) -> bool {
        self.blocks.len() == self.parties
    }

    /// Every block of `self` lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.parties == coarser.parties
            && self.blocks.iter().all(|b| coarser.blocks.iter().any(|c| b.iter().all(|i| c.contains(i))))
    }

    /// Parses `{{1,2},{3}}` against a known number of parties.
    pub fn parse(s: &str, parties: usize) -> Result<Self> {
        let bad = || Error::InvalidPartition(format!("cannot parse `{s}`"));
        let t = s.trim();
        let inner = t.strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(bad)?;
        let mut blocks = Vec::new();
        let mut rest = inner.trim();
        while !rest.is_empty() {
            let open = rest.strip_prefix('{').ok_or_else(bad)?;
            let close = open.find('}').ok_or_else(bad)?;
            let block = open[..close]
                .split(',')
                .map(|p| match p.trim().parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(i - 1),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
            rest = open[close + 1..].trim_start();
            rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
        }
        Self::new(blocks, parties)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let items: Vec<String> = b.iter().map(|i| (i + 1).to_string()).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        write!(f, "{{{}}}", blocks.join(","))
    }
}

/// Non-empty set of partitions of the same parties.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartitionSet {
    partitions: Vec<Partition>,
}

impl PartitionSet {
    pub fn new(partitions: Vec<Partition>) -> Result<Self> {
        let first = partitions.first().ok_or_else(|| Error::InvalidPartition("partition set is empty".into()))?;
        if partitions.iter().any(|p| p.parties != first.parties) {
            return Err(Error::InvalidPartition("partitions disagree on party count".into()));
        }
        Ok(Self { partitions })
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn parties(&self) -> usize {
        self.partitions[0].parties
    }

    /// Parses `{{1,2},{3}}|{{1},{2,3}}`.
    pub fn parse(s: &str, parties: usize) -> Result<Self> {
        let parts = s.split('|').map(|p| Partition::parse(p, parties)).collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

impl fmt::Display for PartitionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.partitions.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join("|"))
    }
}
