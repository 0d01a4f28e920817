//! File formats.
//!
//! * Volumes: raw little-endian `f32`, C order, shape `(3, Z, Y, X)`, with a
//!   JSON sidecar at `<path>.json`.
//! * Label volumes: raw little-endian `u32`, shape `(Z, Y, X)`, same sidecar
//!   scheme. Labels of non-volume graphs are text lines `vertex label`.
//! * Edge lists: text lines `u v w`.
//! * Basin graphs: text lines `Bi Bj saliency` plus `# size <basin> <count>`
//!   records. Basin ids are segmentation labels (from 1).
//! * Dendrograms: a `# basins <count>` record, then `a b saliency size` lines
//!   in merge order, basin ids from 1.
//!
//! Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agglomeration::{Dendrogram, Merge};
use crate::basin_graph::BasinGraph;
use crate::error::{Error, Result};
use crate::graph::{AffinityVolume, DisaffinityGraph, Edge};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawHeader {
    pub shape: Vec<usize>,
    pub dtype: String,
    pub order: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn has_sidecar(path: &Path) -> bool {
    sidecar_path(path).is_file()
}

fn write_header(path: &Path, shape: &[usize], dtype: &str) -> Result<()> {
    let header = RawHeader {
        shape: shape.to_vec(),
        dtype: dtype.to_string(),
        order: "C".to_string(),
    };
    let json = serde_json::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

fn read_header(path: &Path, dtype: &str, rank: usize) -> Result<RawHeader> {
    let text = fs::read_to_string(sidecar_path(path))?;
    let header: RawHeader =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("sidecar header: {e}")))?;
    if header.dtype != dtype || header.order != "C" || header.shape.len() != rank {
        return Err(Error::Format(format!(
            "expected a C-order {dtype} array of rank {rank}, header says {} {} {:?}",
            header.order, header.dtype, header.shape
        )));
    }
    Ok(header)
}

fn read_words(path: &Path, count: usize) -> Result<Vec<[u8; 4]>> {
    let bytes = fs::read(path)?;
    if bytes.len() != 4 * count {
        return Err(Error::Format(format!(
            "{}: {} bytes, header implies {}",
            path.display(),
            bytes.len(),
            4 * count
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| [c[0], c[1], c[2], c[3]])
        .collect())
}

pub fn write_volume(path: &Path, vol: &AffinityVolume) -> Result<()> {
    let [z, y, x] = vol.shape();
    let bytes: Vec<u8> = vol.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes)?;
    write_header(path, &[3, z, y, x], "float32")
}

pub fn read_volume(path: &Path) -> Result<AffinityVolume> {
    let header = read_header(path, "float32", 4)?;
    if header.shape[0] != 3 {
        return Err(Error::Format(format!(
            "volume must have 3 channels, header says {}",
            header.shape[0]
        )));
    }
    let shape = [header.shape[1], header.shape[2], header.shape[3]];
    let data = read_words(path, header.shape.iter().product())?
        .into_iter()
        .map(f32::from_le_bytes)
        .collect();
    AffinityVolume::new(shape, data)
}

pub fn write_label_volume(path: &Path, labels: &[u32], shape: [usize; 3]) -> Result<()> {
    if labels.len() != shape.iter().product::<usize>() {
        return Err(Error::DomainMismatch {
            left: labels.len(),
            right: shape.iter().product(),
        });
    }
    let bytes: Vec<u8> = labels.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes)?;
    write_header(path, &shape, "uint32")
}

pub fn read_label_volume(path: &Path) -> Result<(Vec<u32>, [usize; 3])> {
    let header = read_header(path, "uint32", 3)?;
    let shape = [header.shape[0], header.shape[1], header.shape[2]];
    let labels = read_words(path, shape.iter().product())?
        .into_iter()
        .map(u32::from_le_bytes)
        .collect();
    Ok((labels, shape))
}

pub fn format_label_lines(labels: &[u32]) -> String {
    let mut out = String::with_capacity(labels.len() * 8);
    for (v, l) in labels.iter().enumerate() {
        let _ = writeln!(out, "{v} {l}");
    }
    out
}

/// Parses `vertex label` lines. Every vertex `0..n` must appear once.
pub fn parse_label_lines(text: &str) -> Result<Vec<u32>> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let parse = |f: Option<&str>| -> Result<u32> {
            f.and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
                line,
                msg: "expected `vertex label`".into(),
            })
        };
        let v = parse(fields.next())?;
        let l = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line,
                msg: "expected `vertex label`".into(),
            });
        }
        pairs.push((v, l));
    }
    let mut labels = vec![None; pairs.len()];
    for (v, l) in pairs {
        match labels.get_mut(v as usize) {
            Some(slot @ None) => *slot = Some(l),
            _ => {
                return Err(Error::Format(format!(
                    "vertex {v} missing, repeated or out of range"
                )))
            }
        }
    }
    Ok(labels
        .into_iter()
        .map(|l| l.expect("all slots filled"))
        .collect())
}

/// Labels from either a raw label volume (if it has a sidecar) or a text
/// label file. The shape is returned for volumes.
pub fn read_labels(path: &Path) -> Result<(Vec<u32>, Option<[usize; 3]>)> {
    if has_sidecar(path) {
        let (labels, shape) = read_label_volume(path)?;
        Ok((labels, Some(shape)))
    } else {
        Ok((parse_label_lines(&fs::read_to_string(path)?)?, None))
    }
}

/// Writes a raw label volume when `shape` is known, text lines otherwise.
pub fn write_labels(path: &Path, labels: &[u32], shape: Option<[usize; 3]>) -> Result<()> {
    match shape {
        Some(shape) => write_label_volume(path, labels, shape),
        None => Ok(fs::write(path, format_label_lines(labels))?),
    }
}

pub fn read_edge_list(path: &Path) -> Result<DisaffinityGraph> {
    DisaffinityGraph::parse_edge_list(&fs::read_to_string(path)?)
}

pub fn format_basin_graph(bg: &BasinGraph) -> String {
    let mut out = String::new();
    for (b, size) in bg.sizes().iter().enumerate() {
        let _ = writeln!(out, "# size {} {size}", b + 1);
    }
    for e in bg.edges() {
        let _ = writeln!(out, "{} {} {}", e.u + 1, e.v + 1, e.w);
    }
    out
}

pub fn parse_basin_graph(text: &str) -> Result<BasinGraph> {
    let mut sizes: Vec<Option<u64>> = Vec::new();
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix('#') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.first() != Some(&"size") {
                continue;
            }
            let (Some(b), Some(n), 3) = (
                fields.get(1).and_then(|s| s.parse::<u32>().ok()),
                fields.get(2).and_then(|s| s.parse::<u64>().ok()),
                fields.len(),
            ) else {
                return Err(err("expected `# size <basin> <count>`"));
            };
            if b == 0 {
                return Err(err("basin ids start at 1"));
            }
            let slot = b as usize - 1;
            if sizes.len() <= slot {
                sizes.resize(slot + 1, None);
            }
            if sizes[slot].replace(n).is_some() {
                return Err(err("repeated size record"));
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err("expected `Bi Bj saliency`"));
        }
        let id = |s: &str| match s.parse::<u32>() {
            Ok(b) if b > 0 => Ok(b - 1),
            _ => Err(err("invalid basin id")),
        };
        let w: f32 = fields[2].parse().map_err(|_| err("invalid saliency"))?;
        edges.push(Edge::new(id(fields[0])?, id(fields[1])?, w));
    }
    let sizes = sizes
        .into_iter()
        .enumerate()
        .map(|(b, s)| s.ok_or_else(|| Error::Format(format!("no size record for basin {}", b + 1))))
        .collect::<Result<Vec<_>>>()?;
    BasinGraph::new(sizes, edges)
}

pub fn format_dendrogram(d: &Dendrogram) -> String {
    let mut out = format!("# basins {}\n", d.basin_count());
    for m in d.merges() {
        let _ = writeln!(out, "{} {} {} {}", m.a + 1, m.b + 1, m.saliency, m.size);
    }
    out
}

pub fn parse_dendrogram(text: &str) -> Result<Dendrogram> {
    let mut basins = None;
    let mut merges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix('#') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.first() == Some(&"basins") {
                let n = fields
                    .get(1)
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| err("expected `# basins <count>`"))?;
                basins = Some(n);
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err("expected `a b saliency size`"));
        }
        let id = |s: &str| match s.parse::<u32>() {
            Ok(b) if b > 0 => Ok(b - 1),
            _ => Err(err("invalid cluster id")),
        };
        merges.push(Merge {
            a: id(fields[0])?,
            b: id(fields[1])?,
            saliency: fields[2].parse().map_err(|_| err("invalid saliency"))?,
            size: fields[3].parse().map_err(|_| err("invalid size"))?,
        });
    }
    let basins = basins.ok_or_else(|| Error::Format("missing `# basins <count>` record".into()))?;
    Dendrogram::new(basins, merges)
}
