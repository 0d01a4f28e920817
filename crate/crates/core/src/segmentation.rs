use crate::error::{Error, Result};

/// Per-vertex label map. Label 0 is background; labels `1..=basin_count`
/// are all non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    labels: Vec<u32>,
    basin_sizes: Vec<u64>,
}

impl Segmentation {
    /// Accepts labels that use every value in `1..=max` at least once.
    pub fn from_labels(labels: Vec<u32>) -> Result<Self> {
        let count = labels.iter().copied().max().unwrap_or(0) as usize;
        let mut basin_sizes = vec![0u64; count];
        for &l in &labels {
            if l > 0 {
                basin_sizes[l as usize - 1] += 1;
            }
        }
        if let Some(empty) = basin_sizes.iter().position(|&s| s == 0) {
            return Err(Error::Format(format!(
                "label {} is unused; labels must be dense",
                empty + 1
            )));
        }
        Ok(Segmentation {
            labels,
            basin_sizes,
        })
    }

    /// Renumbers arbitrary labels to `1..=k` in order of first occurrence,
    /// which is the same as ordering by smallest member vertex. 0 stays 0.
    pub fn from_sparse_labels(labels: &[u32]) -> Self {
        let labels = canonical_labels(labels);
        Segmentation::from_labels(labels).expect("canonical labels are dense")
    }

    pub(crate) fn from_parts(labels: Vec<u32>, basin_sizes: Vec<u64>) -> Self {
        debug_assert_eq!(
            basin_sizes.iter().sum::<u64>(),
            labels.iter().filter(|&&l| l > 0).count() as u64
        );
        Segmentation {
            labels,
            basin_sizes,
        }
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<u32> {
        self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn basin_count(&self) -> u32 {
        self.basin_sizes.len() as u32
    }

    /// Sizes indexed by `label - 1`.
    pub fn basin_sizes(&self) -> &[u64] {
        &self.basin_sizes
    }

    pub fn foreground_count(&self) -> u64 {
        self.basin_sizes.iter().sum()
    }

    /// Replaces each basin label `b` with `cluster_of[b - 1]`. The result is
    /// renumbered by smallest member vertex.
    pub fn merge_basins(&self, cluster_of: &[u32]) -> Result<Segmentation> {
        if cluster_of.len() != self.basin_sizes.len() {
            return Err(Error::DomainMismatch {
                left: cluster_of.len(),
                right: self.basin_sizes.len(),
            });
        }
        let merged: Vec<u32> = self
            .labels
            .iter()
            .map(|&l| {
                if l == 0 {
                    0
                } else {
                    cluster_of[l as usize - 1]
                }
            })
            .collect();
        Ok(Segmentation::from_sparse_labels(&merged))
    }
}

/// Renumbers labels by first occurrence, keeping 0 as background. Two label
/// arrays describe the same partition iff their canonical forms are equal.
pub fn canonical_labels(labels: &[u32]) -> Vec<u32> {
    let mut map = std::collections::HashMap::new();
    let mut next = 0u32;
    labels
        .iter()
        .map(|&l| {
            if l == 0 {
                0
            } else {
                *map.entry(l).or_insert_with(|| {
                    next += 1;
                    next
                })
            }
        })
        .collect()
}
