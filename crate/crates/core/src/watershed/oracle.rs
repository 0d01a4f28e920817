//! Brute-force basins of attraction, for validating the watershed on small
//! graphs.
//!
//! Works directly from the walk semantics: a step from `v` may use any
//! incident edge of minimal weight. Reachability over those steps is
//! computed per vertex as a bitmask. A regional minimum is a vertex set that
//! is mutually reachable and that no walk can leave. Nothing here shares
//! code with the plateau and saddle handling of the main transform.

use crate::error::{Error, Result};
use crate::graph::DisaffinityGraph;

pub const ORACLE_MAX_VERTICES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBasins {
    /// Regional minima as sorted vertex lists, ordered by smallest member.
    pub minima: Vec<Vec<u32>>,
    /// For each vertex, indices into `minima` reachable by some steepest
    /// descent walk. Empty for background vertices.
    pub reachable_minima: Vec<Vec<usize>>,
}

impl OracleBasins {
    /// Vertices of the basin of attraction of `minima[m]`.
    pub fn basin(&self, m: usize) -> Vec<u32> {
        self.reachable_minima
            .iter()
            .enumerate()
            .filter(|(_, ms)| ms.contains(&m))
            .map(|(v, _)| v as u32)
            .collect()
    }

    pub fn is_border(&self, v: u32) -> bool {
        self.reachable_minima[v as usize].len() > 1
    }

    /// Index of the minimum containing `v`, if `v` lies in one.
    pub fn minimum_of(&self, v: u32) -> Option<usize> {
        self.minima.iter().position(|m| m.contains(&v))
    }
}

pub fn oracle_basins(g: &DisaffinityGraph) -> Result<OracleBasins> {
    let n = g.vertex_count();
    if n > ORACLE_MAX_VERTICES {
        return Err(Error::GraphTooLarge {
            max: ORACLE_MAX_VERTICES,
            got: n,
        });
    }

    // Steepest-descent successor masks.
    let mut step = vec![0u32; n];
    for v in 0..n {
        let incident: Vec<_> = g
            .edges()
            .iter()
            .filter(|e| e.u as usize == v || e.v as usize == v)
            .collect();
        let Some(low) = incident.iter().map(|e| e.w).reduce(f32::min) else {
            continue;
        };
        for e in incident.iter().filter(|e| e.w == low) {
            step[v] |= 1 << e.other(v as u32);
        }
    }

    // Vertices reachable by walks (including the empty walk).
    let reach: Vec<u32> = (0..n)
        .map(|start| {
            let mut seen = 1u32 << start;
            let mut frontier = seen;
            while frontier != 0 {
                let mut next = 0u32;
                for v in 0..n {
                    if frontier & (1 << v) != 0 {
                        next |= step[v];
                    }
                }
                frontier = next & !seen;
                seen |= next;
            }
            seen
        })
        .collect();

    let mut minima: Vec<u32> = Vec::new();
    for v in 0..n {
        if g.is_background(v as u32) {
            continue;
        }
        let closed = (0..n)
            .filter(|&x| reach[v] & (1 << x) != 0)
            .all(|x| reach[x] & (1 << v) != 0);
        if closed && !minima.contains(&reach[v]) {
            minima.push(reach[v]);
        }
    }
    // Minima are discovered in order of their smallest member.

    let reachable_minima = (0..n)
        .map(|v| {
            if g.is_background(v as u32) {
                return Vec::new();
            }
            minima
                .iter()
                .enumerate()
                .filter(|(_, &m)| reach[v] & m != 0)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let minima = minima
        .into_iter()
        .map(|m| (0..n as u32).filter(|&v| m & (1 << v) != 0).collect())
        .collect();

    Ok(OracleBasins {
        minima,
        reachable_minima,
    })
}
