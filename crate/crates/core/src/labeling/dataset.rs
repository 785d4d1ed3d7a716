use std::io::{Read, Write};

use super::PersistenceDiagram0;
use crate::{Error, Point, Result};

/// Initial conditions labeled by the attractor their orbit reaches.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub points: Vec<Point>,
    pub labels: Vec<usize>,
    pub num_labels: usize,
    /// Terminal points of each cluster, indexed by label. May be empty when
    /// the dataset is read back from CSV.
    pub attractor_samples: Vec<Vec<Point>>,
}

impl LabeledDataset {
    pub fn new(points: Vec<Point>, labels: Vec<usize>, num_labels: usize) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: labels.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::EmptyInput("dataset has no points"));
        }
        let d = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= num_labels) {
            return Err(Error::InvalidParameters(format!(
                "label {l} out of range for {num_labels} labels"
            )));
        }
        Ok(Self {
            points,
            labels,
            num_labels,
            attractor_samples: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_labels];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Writes `x1..xd,label` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for (p, l) in self.points.iter().zip(&self.labels) {
            let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            row.push(l.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `x1..xd,label` rows; the label count is one more than the
    /// largest label present.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let n = rec.len();
            if n < 2 {
                return Err(Error::Parse("dataset row needs coordinates and a label".into()));
            }
            let p = rec
                .iter()
                .take(n - 1)
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Point>>()?;
            let l = rec[n - 1]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(e.to_string()))?;
            points.push(p);
            labels.push(l);
        }
        let num_labels = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(points, labels, num_labels)
    }
}

/// Writes a persistence diagram as a single `death` column.
pub fn write_diagram_csv<W: Write>(diag: &PersistenceDiagram0, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["death"])?;
    for d in &diag.deaths {
        w.write_record([d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagram_csv<R: Read>(reader: R) -> Result<PersistenceDiagram0> {
    let mut r = csv::Reader::from_reader(reader);
    let mut deaths = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v = rec
            .get(0)
            .ok_or_else(|| Error::Parse("empty diagram row".into()))?
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        deaths.push(v);
    }
    Ok(PersistenceDiagram0 { deaths })
}
