//! Split and merge scores over a foreground-restricted contingency table.
//!
//! With `p_ij` the joint label frequencies and `s_i`, `t_j` the marginals of
//! the proposed and ground-truth segmentations:
//!
//! ```text
//! V_split = Σ p_ij² / Σ t_j²      V_merge = Σ p_ij² / Σ s_i²
//! ```
//!
//! Both lie in (0, 1]; higher means fewer errors of that kind.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How proposed-background voxels inside ground-truth foreground are
/// scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Unlabeled {
    /// Each voxel is its own proposed segment.
    #[default]
    Singleton,
    /// The voxels are left out of the table.
    Drop,
}

impl FromStr for Unlabeled {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singleton" => Ok(Unlabeled::Singleton),
            "drop" => Ok(Unlabeled::Drop),
            _ => Err(Error::Format(format!("`{s}`: expected drop or singleton"))),
        }
    }
}

/// Row key for a proposed segment. Singleton rows are keyed by voxel index
/// above the label range.
type RowKey = u64;

const SINGLETON_BASE: RowKey = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `(proposed row, ground-truth label, count)`, sorted.
    cells: Vec<(RowKey, u32, u64)>,
    row_sums: Vec<(RowKey, u64)>,
    col_sums: Vec<(u32, u64)>,
    total: u64,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn cells(&self) -> impl Iterator<Item = (u64, u32, u64)> + '_ {
        self.cells.iter().copied()
    }

    pub fn row_sums(&self) -> impl Iterator<Item = u64> + '_ {
        self.row_sums.iter().map(|&(_, n)| n)
    }

    pub fn col_sums(&self) -> impl Iterator<Item = u64> + '_ {
        self.col_sums.iter().map(|&(_, n)| n)
    }

    /// `proposed,ground_truth,count` rows. Singleton rows print as
    /// `unlabeled:<voxel>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("proposed,ground_truth,count\n");
        for &(row, col, n) in &self.cells {
            if row >= SINGLETON_BASE {
                let _ = writeln!(out, "unlabeled:{},{col},{n}", row - SINGLETON_BASE);
            } else {
                let _ = writeln!(out, "{row},{col},{n}");
            }
        }
        out
    }

    /// Builds a table from raw counts, mainly for testing. Zero counts are
    /// ignored.
    pub fn from_counts(counts: &[Vec<u64>]) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, row) in counts.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                if n > 0 {
                    map.insert((i as RowKey + 1, j as u32 + 1), n);
                }
            }
        }
        Self::from_map(map)
    }

    fn from_map(map: HashMap<(RowKey, u32), u64>) -> Result<Self> {
        let mut cells: Vec<_> = map.into_iter().map(|((r, c), n)| (r, c, n)).collect();
        if cells.is_empty() {
            return Err(Error::EmptyContingency);
        }
        cells.sort_unstable();
        let mut rows: HashMap<RowKey, u64> = HashMap::new();
        let mut cols: HashMap<u32, u64> = HashMap::new();
        let mut total = 0u64;
        for &(r, c, n) in &cells {
            *rows.entry(r).or_default() += n;
            *cols.entry(c).or_default() += n;
            total += n;
        }
        let mut row_sums: Vec<_> = rows.into_iter().collect();
        row_sums.sort_unstable();
        let mut col_sums: Vec<_> = cols.into_iter().collect();
        col_sums.sort_unstable();
        Ok(ContingencyTable {
            cells,
            row_sums,
            col_sums,
            total,
        })
    }
}

/// Counts label co-occurrences over voxels with non-zero ground truth.
pub fn contingency(
    proposed: &[u32],
    ground_truth: &[u32],
    unlabeled: Unlabeled,
) -> Result<ContingencyTable> {
    if proposed.len() != ground_truth.len() {
        return Err(Error::DomainMismatch {
            left: proposed.len(),
            right: ground_truth.len(),
        });
    }
    let mut map: HashMap<(RowKey, u32), u64> = HashMap::new();
    for (idx, (&p, &g)) in proposed.iter().zip(ground_truth).enumerate() {
        if g == 0 {
            continue;
        }
        let row = match (p, unlabeled) {
            (0, Unlabeled::Drop) => continue,
            (0, Unlabeled::Singleton) => SINGLETON_BASE + idx as RowKey,
            (p, _) => p as RowKey,
        };
        *map.entry((row, g)).or_default() += 1;
    }
    ContingencyTable::from_map(map)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorePair {
    pub v_split: f64,
    pub v_merge: f64,
}

fn sum_squares(values: impl Iterator<Item = u64>) -> u128 {
    values.map(|n| (n as u128) * (n as u128)).sum()
}

pub fn split_merge_scores(table: &ContingencyTable) -> ScorePair {
    let joint = sum_squares(table.cells.iter().map(|c| c.2)) as f64;
    let rows = sum_squares(table.row_sums()) as f64;
    let cols = sum_squares(table.col_sums()) as f64;
    // The N² normalisations of the probabilities cancel.
    ScorePair {
        v_split: joint / cols,
        v_merge: joint / rows,
    }
}

/// [`contingency`] followed by [`split_merge_scores`].
pub fn score(
    proposed: &[u32],
    ground_truth: &[u32],
    unlabeled: Unlabeled,
) -> Result<(ScorePair, u64)> {
    let table = contingency(proposed, ground_truth, unlabeled)?;
    Ok((split_merge_scores(&table), table.total()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_perfect() {
        let a = [1, 1, 2, 2, 2];
        let t = contingency(&a, &a, Unlabeled::Singleton).unwrap();
        assert_eq!(t.cells().collect::<Vec<_>>(), vec![(1, 1, 2), (2, 2, 3)]);
        let s = split_merge_scores(&t);
        assert_eq!((s.v_split, s.v_merge), (1.0, 1.0));
    }

    #[test]
    fn split_only() {
        let t = contingency(&[1, 1, 2, 2], &[1, 1, 1, 1], Unlabeled::Singleton).unwrap();
        assert_eq!(t.total(), 4);
        assert_eq!(t.cells().collect::<Vec<_>>(), vec![(1, 1, 2), (2, 1, 2)]);
        let s = split_merge_scores(&t);
        assert!((s.v_split - 0.5).abs() < 1e-12);
        assert!((s.v_merge - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merge_only() {
        let s = split_merge_scores(&contingency(&[3; 4], &[1, 1, 2, 2], Unlabeled::Drop).unwrap());
        assert!((s.v_split - 1.0).abs() < 1e-12);
        assert!((s.v_merge - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ground_truth_background_excluded() {
        assert!(matches!(
            contingency(&[1, 2], &[0, 0], Unlabeled::Singleton),
            Err(Error::EmptyContingency)
        ));
        let t = contingency(&[1, 2, 2], &[0, 1, 1], Unlabeled::Singleton).unwrap();
        assert_eq!(t.total(), 2);
    }

    #[test]
    fn unlabeled_policies() {
        let proposed = [0, 0, 1, 1];
        let gt = [1, 1, 1, 1];
        let single = contingency(&proposed, &gt, Unlabeled::Singleton).unwrap();
        assert_eq!(single.total(), 4);
        // Rows 1+1+2: Σs² = 6, Σp² = 6, Σt² = 16.
        let s = split_merge_scores(&single);
        assert!((s.v_split - 6.0 / 16.0).abs() < 1e-12);
        assert_eq!(s.v_merge, 1.0);
        assert!(single.to_csv().contains("unlabeled:0,1,1"));

        let dropped = contingency(&proposed, &gt, Unlabeled::Drop).unwrap();
        assert_eq!(dropped.total(), 2);
        assert_eq!(split_merge_scores(&dropped).v_split, 1.0);
        assert!(matches!(
            contingency(&[0, 0], &[1, 1], Unlabeled::Drop),
            Err(Error::EmptyContingency)
        ));
    }

    #[test]
    fn mismatched_domains() {
        assert!(matches!(
            contingency(&[1], &[1, 1], Unlabeled::Drop),
            Err(Error::DomainMismatch { .. })
        ));
    }

    #[test]
    fn csv_output() {
        let t = ContingencyTable::from_counts(&[vec![2, 0], vec![1, 3]]).unwrap();
        assert_eq!(
            t.to_csv(),
            "proposed,ground_truth,count\n1,1,2\n2,1,1\n2,2,3\n"
        );
    }
}
