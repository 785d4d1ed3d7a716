use std::collections::BTreeMap;

use rand::seq::index::sample;

use super::persistence::distance;
use super::{minimum_spanning_tree, persistence0, DisjointSet, PersistenceDiagram0};
use crate::rng::{derive_seed, seeded};
use crate::{Error, Point, Result};

/// Minimum multiplicative gap between consecutive deaths that counts as a
/// cluster boundary.
pub const GAP_RATIO_MIN: f64 = 3.0;

const DEATH_FLOOR: f64 = 1e-12;

/// How cluster indices are assigned once the partition is fixed.
#[derive(Clone, Debug, PartialEq)]
pub enum LabelOrder {
    /// Ascending lexicographic order of cluster centroids.
    CentroidLex,
    /// Descending mean distance from `center` (outermost cluster gets label 0),
    /// ties broken by centroid order.
    RadialDescending { center: Point },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringOptions {
    /// Fixed number of clusters; chosen from the diagram when `None`.
    pub num_labels: Option<usize>,
    pub max_clusters: usize,
    pub gap_ratio_min: f64,
    /// Clustering runs on at most this many terminal points.
    pub subsample: usize,
    pub order: LabelOrder,
}

impl Default for ClusteringOptions {
    fn default() -> Self {
        Self {
            num_labels: None,
            max_clusters: 10,
            gap_ratio_min: GAP_RATIO_MIN,
            subsample: 2000,
            order: LabelOrder::CentroidLex,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    /// Points of each cluster, indexed by label.
    pub samples: Vec<Vec<Point>>,
}

/// Number of clusters from the largest multiplicative gap in the sorted deaths.
pub fn choose_num_clusters(diag: &PersistenceDiagram0, max_clusters: usize) -> usize {
    choose_num_clusters_with(diag, max_clusters, GAP_RATIO_MIN)
}

pub fn choose_num_clusters_with(
    diag: &PersistenceDiagram0,
    max_clusters: usize,
    gap_ratio_min: f64,
) -> usize {
    let deaths = &diag.deaths;
    let upper = max_clusters.min(deaths.len());
    let mut best: Option<(usize, f64)> = None;
    for m in 1..upper {
        let ratio = deaths[m - 1].max(DEATH_FLOOR) / deaths[m].max(DEATH_FLOOR);
        if best.map_or(true, |(_, r)| ratio > r) {
            best = Some((m, ratio));
        }
    }
    match best {
        Some((m, ratio)) if ratio >= gap_ratio_min => m + 1,
        _ => 1,
    }
}

fn distinct_count(points: &[Point]) -> usize {
    let mut keys: Vec<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

fn centroid(points: &[Point]) -> Point {
    let d = points[0].len();
    let mut c = vec![0.0; d];
    for p in points {
        for (ci, v) in c.iter_mut().zip(p) {
            *ci += v;
        }
    }
    c.iter_mut().for_each(|v| *v /= points.len() as f64);
    c
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Single-linkage cut into exactly `num_labels` components.
pub fn cluster_labels(
    points: &[Point],
    num_labels: usize,
    order: &LabelOrder,
) -> Result<ClusterAssignment> {
    if points.is_empty() {
        return Err(Error::EmptyInput("cannot cluster an empty point set"));
    }
    if num_labels == 0 {
        return Err(Error::InvalidParameters("need at least one cluster".into()));
    }
    let available = distinct_count(points);
    if num_labels > available {
        return Err(Error::TooManyClusters {
            requested: num_labels,
            available,
        });
    }
    let n = points.len();
    let mut ds = DisjointSet::new(n);
    for e in minimum_spanning_tree(points) {
        if ds.components() == num_labels {
            break;
        }
        ds.union(e.a, e.b);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        groups.entry(ds.find(i)).or_default().push(i);
    }
    let mut clusters: Vec<(Vec<usize>, Point, f64)> = groups
        .into_values()
        .map(|members| {
            let pts: Vec<Point> = members.iter().map(|&i| points[i].clone()).collect();
            let c = centroid(&pts);
            let spread = match order {
                LabelOrder::CentroidLex => 0.0,
                LabelOrder::RadialDescending { center } => {
                    pts.iter().map(|p| distance(p, center)).sum::<f64>() / pts.len() as f64
                }
            };
            (members, c, spread)
        })
        .collect();
    clusters.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| lex_cmp(&a.1, &b.1)));

    let mut labels = vec![0; n];
    let mut samples = Vec::with_capacity(clusters.len());
    for (label, (members, _, _)) in clusters.into_iter().enumerate() {
        for &i in &members {
            labels[i] = label;
        }
        samples.push(members.iter().map(|&i| points[i].clone()).collect());
    }
    Ok(ClusterAssignment { labels, samples })
}

/// Result of clustering the terminal points of an orbit ensemble.
#[derive(Clone, Debug)]
pub struct TerminalLabels {
    /// Label per orbit; `None` for escaped orbits.
    pub labels: Vec<Option<usize>>,
    pub num_labels: usize,
    pub samples: Vec<Vec<Point>>,
    pub diagram: PersistenceDiagram0,
}

/// Clusters a seeded subsample of the non-escaped terminal points and extends
/// the labels to all of them by nearest subsample point.
pub fn label_terminal_points(
    terminal: &[Point],
    escaped: &[bool],
    opts: &ClusteringOptions,
    seed: u64,
) -> Result<TerminalLabels> {
    let active: Vec<usize> = (0..terminal.len()).filter(|&i| !escaped[i]).collect();
    if active.len() < 2 {
        return Err(Error::EmptyInput("fewer than two non-escaped orbits"));
    }
    let chosen: Vec<usize> = if active.len() > opts.subsample {
        let mut rng = seeded(seed);
        let mut idx: Vec<usize> = sample(&mut rng, active.len(), opts.subsample)
            .into_iter()
            .map(|k| active[k])
            .collect();
        idx.sort_unstable();
        idx
    } else {
        active.clone()
    };
    let sub: Vec<Point> = chosen.iter().map(|&i| terminal[i].clone()).collect();
    let diagram = persistence0(&sub)?;
    let num_labels = opts
        .num_labels
        .unwrap_or_else(|| choose_num_clusters_with(&diagram, opts.max_clusters, opts.gap_ratio_min));
    let assignment = cluster_labels(&sub, num_labels, &opts.order)?;

    let labels: Vec<Option<usize>> = terminal
        .iter()
        .zip(escaped)
        .map(|(p, &esc)| {
            (!esc).then(|| {
                let nearest = sub
                    .iter()
                    .enumerate()
                    .map(|(k, q)| (k, distance(p, q)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(k, _)| k)
                    .expect("nonempty subsample");
                assignment.labels[nearest]
            })
        })
        .collect();

    // Attractor samples come from every labeled orbit, capped per label, so a
    // small basin still gets a dense sample of its attractor.
    let mut rng = seeded(derive_seed(seed, 1));
    let samples = (0..num_labels)
        .map(|k| {
            let members: Vec<usize> = (0..terminal.len()).filter(|&i| labels[i] == Some(k)).collect();
            let picked: Vec<usize> = if members.len() > opts.subsample {
                let mut idx: Vec<usize> = sample(&mut rng, members.len(), opts.subsample)
                    .into_iter()
                    .map(|j| members[j])
                    .collect();
                idx.sort_unstable();
                idx
            } else {
                members
            };
            picked.into_iter().map(|i| terminal[i].clone()).collect()
        })
        .collect();
    Ok(TerminalLabels {
        labels,
        num_labels,
        samples,
        diagram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(deaths: &[f64]) -> PersistenceDiagram0 {
        PersistenceDiagram0 {
            deaths: deaths.to_vec(),
        }
    }

    #[test]
    fn gap_selection() {
        assert_eq!(choose_num_clusters(&diag(&[5.0, 0.1, 0.08, 0.05]), 10), 2);
        assert_eq!(choose_num_clusters(&diag(&[4.0, 3.9, 0.1, 0.09]), 10), 3);
        assert_eq!(choose_num_clusters(&diag(&[1.0, 0.9, 0.8]), 10), 1);
        assert_eq!(choose_num_clusters(&diag(&[]), 10), 1);
        // the cap excludes the m = 2 gap
        assert_eq!(choose_num_clusters(&diag(&[4.0, 3.9, 0.1, 0.09]), 2), 1);
    }

    #[test]
    fn two_groups_on_a_line() {
        let pts = vec![vec![0.0], vec![0.1], vec![5.0], vec![5.2]];
        let a = cluster_labels(&pts, 2, &LabelOrder::CentroidLex).unwrap();
        assert_eq!(a.labels, vec![0, 0, 1, 1]);
        assert_eq!(a.samples[1], vec![vec![5.0], vec![5.2]]);
    }

    #[test]
    fn one_cluster_labels_everything_zero() {
        let pts = vec![vec![0.0, 1.0], vec![7.0, 2.0], vec![-3.0, 0.5]];
        let a = cluster_labels(&pts, 1, &LabelOrder::CentroidLex).unwrap();
        assert!(a.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn too_many_clusters() {
        let pts = vec![vec![1.0], vec![1.0], vec![2.0]];
        assert!(matches!(
            cluster_labels(&pts, 3, &LabelOrder::CentroidLex),
            Err(Error::TooManyClusters { .. })
        ));
    }

    #[test]
    fn radial_order_puts_outer_ring_first() {
        let mut pts = Vec::new();
        for k in 0..60 {
            let t = k as f64 * std::f64::consts::TAU / 60.0;
            pts.push(vec![t.cos(), t.sin()]);
            pts.push(vec![3.0 * t.cos(), 3.0 * t.sin()]);
        }
        let order = LabelOrder::RadialDescending {
            center: vec![0.0, 0.0],
        };
        let a = cluster_labels(&pts, 2, &order).unwrap();
        for (p, l) in pts.iter().zip(&a.labels) {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert_eq!(*l, if r > 2.0 { 0 } else { 1 });
        }
    }
}
