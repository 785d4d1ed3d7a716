use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CellGrid;
use crate::network::ConstrainedNet;
use crate::{Error, Result};

/// Region of a cell: `N_k` (`Label(k)`) or the uncertain region `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Uncertain,
    Label(usize),
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Uncertain => write!(f, "U"),
            Tag::Label(k) => write!(f, "N{k}"),
        }
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "U" {
            return Ok(Tag::Uncertain);
        }
        s.strip_prefix('N')
            .and_then(|k| k.parse().ok())
            .map(Tag::Label)
            .ok_or_else(|| Error::Parse(format!("bad region tag `{s}`")))
    }
}

impl Serialize for Tag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellTag {
    pub index: Vec<usize>,
    pub tag: Tag,
}

/// Tagged cells of a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionAssignment {
    pub directions: Vec<Vec<f64>>,
    pub cuts: Vec<Vec<f64>>,
    pub cells: Vec<CellTag>,
    pub epsilon: f64,
    pub num_labels: usize,
}

impl RegionAssignment {
    /// Cell indices carrying `tag`.
    pub fn region(&self, tag: Tag) -> Vec<Vec<usize>> {
        self.cells
            .iter()
            .filter(|c| c.tag == tag)
            .map(|c| c.index.clone())
            .collect()
    }

    pub fn count(&self, tag: Tag) -> usize {
        self.cells.iter().filter(|c| c.tag == tag).count()
    }

    /// `U` followed by `N_0 .. N_{L-1}`.
    pub fn tags(&self) -> Vec<Tag> {
        std::iter::once(Tag::Uncertain)
            .chain((0..self.num_labels).map(Tag::Label))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Tags a cell `N_k` when the network is within `eps` of `k` at every vertex.
///
/// The network is affine on each cell, so the vertex values bound it on the
/// whole cell.
pub fn classify_cells(net: &ConstrainedNet, grid: &CellGrid, eps: f64) -> Result<RegionAssignment> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameters(format!("epsilon {eps} outside (0, 0.5)")));
    }
    if grid.dim() != net.d {
        return Err(Error::DimensionMismatch {
            expected: net.d,
            got: grid.dim(),
        });
    }
    let mut corners: Vec<Vec<usize>> = grid.cells.iter().flat_map(|c| grid.corners(c)).collect();
    corners.sort_unstable();
    corners.dedup();
    let values: HashMap<Vec<usize>, f64> = corners
        .into_par_iter()
        .map(|c| {
            let v = net.forward(&grid.vertex(&c));
            (c, v)
        })
        .collect();

    let cells = grid
        .cells
        .iter()
        .map(|cell| {
            let vals: Vec<f64> = grid.corners(cell).iter().map(|c| values[c]).collect();
            let k = vals[0].round();
            let tag = if k >= 0.0
                && (k as usize) < net.num_labels
                && vals.iter().all(|v| (v - k).abs() <= eps)
            {
                Tag::Label(k as usize)
            } else {
                Tag::Uncertain
            };
            CellTag {
                index: cell.clone(),
                tag,
            }
        })
        .collect();
    Ok(RegionAssignment {
        directions: grid.arrangement.directions.clone(),
        cuts: grid.arrangement.cuts.clone(),
        cells,
        epsilon: eps,
        num_labels: net.num_labels,
    })
}

/// Writes `cell,tag,corner,x1,x2` rows: the four corners of every cell of a
/// planar decomposition in polygon order.
pub fn write_plot_csv<W: Write>(grid: &CellGrid, regions: &RegionAssignment, writer: W) -> Result<()> {
    if grid.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: grid.dim(),
        });
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cell", "tag", "corner", "x1", "x2"])?;
    for (n, c) in regions.cells.iter().enumerate() {
        let (a, b) = (c.index[0], c.index[1]);
        for (k, corner) in [[a, b], [a + 1, b], [a + 1, b + 1], [a, b + 1]].iter().enumerate() {
            let x = grid.vertex(corner);
            w.write_record([
                n.to_string(),
                c.tag.to_string(),
                k.to_string(),
                x[0].to_string(),
                x[1].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{enumerate_cells, extract_arrangement};
    use crate::dynamics::HyperRectangle;

    #[test]
    fn tag_text_round_trip() {
        for t in [Tag::Uncertain, Tag::Label(0), Tag::Label(12)] {
            assert_eq!(t.to_string().parse::<Tag>().unwrap(), t);
        }
        assert!("X3".parse::<Tag>().is_err());
    }

    #[test]
    fn clamp_net_in_one_dimension() {
        let net = ConstrainedNet::new(vec![vec![1.0]], vec![vec![0.0]], vec![1.0], 2).unwrap();
        let dom = HyperRectangle::cube(1, -2.0, 2.0).unwrap();
        let grid = enumerate_cells(&extract_arrangement(&net, &dom).unwrap(), &dom).unwrap();
        let r = classify_cells(&net, &grid, 0.1).unwrap();
        let tags: Vec<Tag> = r.cells.iter().map(|c| c.tag).collect();
        assert_eq!(tags, vec![Tag::Label(0), Tag::Uncertain, Tag::Label(1)]);
    }

    #[test]
    fn zero_net_is_all_label_zero() {
        let net = ConstrainedNet::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0], vec![0.5]],
            vec![0.0, 0.0],
            2,
        )
        .unwrap();
        let dom = HyperRectangle::cube(2, -2.0, 2.0).unwrap();
        let grid = enumerate_cells(&extract_arrangement(&net, &dom).unwrap(), &dom).unwrap();
        let r = classify_cells(&net, &grid, 0.1).unwrap();
        assert_eq!(r.count(Tag::Label(0)), grid.len());
        assert_eq!(r.count(Tag::Uncertain), 0);
        let back = RegionAssignment::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let mut buf = Vec::new();
        write_plot_csv(&grid, &r, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 4 * grid.len());
    }

    #[test]
    fn epsilon_must_be_below_half() {
        let net = ConstrainedNet::new(vec![vec![1.0]], vec![vec![0.0]], vec![1.0], 2).unwrap();
        let dom = HyperRectangle::cube(1, -2.0, 2.0).unwrap();
        let grid = enumerate_cells(&extract_arrangement(&net, &dom).unwrap(), &dom).unwrap();
        assert!(classify_cells(&net, &grid, 0.5).is_err());
        assert!(classify_cells(&net, &grid, 0.0).is_err());
    }
}
