use std::io::{Read, Write};

use rayon::prelude::*;

use super::{DormandPrince, Flow, SystemSpec};
use crate::{Error, Point, Result};

/// Orbits leaving the domain scaled by this factor about its center are frozen.
pub const ESCAPE_INFLATION: f64 = 2.0;

/// Time-1 map iterates of a set of initial conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitEnsemble {
    /// `snapshots[i][j]` is the `i`-th iterate of initial condition `j`.
    pub snapshots: Vec<Vec<Point>>,
    /// Orbits frozen after leaving the inflated domain.
    pub escaped: Vec<bool>,
}

impl OrbitEnsemble {
    pub fn initial(&self) -> &[Point] {
        &self.snapshots[0]
    }

    pub fn terminal(&self) -> &[Point] {
        self.snapshots.last().expect("ensemble has at least one snapshot")
    }

    pub fn horizon(&self) -> usize {
        self.snapshots.len() - 1
    }

    pub fn len(&self) -> usize {
        self.snapshots[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_inputs(sys: &SystemSpec, points: &[Point]) -> Result<()> {
    for p in points {
        if p.len() != sys.dim {
            return Err(Error::DimensionMismatch {
                expected: sys.dim,
                got: p.len(),
            });
        }
        if !sys.domain.contains(p) {
            return Err(Error::InvalidParameters(format!(
                "initial condition {p:?} lies outside the domain"
            )));
        }
    }
    Ok(())
}

/// One orbit of `horizon` time-1 steps; the bool flags an escape.
fn orbit(
    sys: &SystemSpec,
    integrator: &DormandPrince,
    x0: &[f64],
    horizon: usize,
    keep_all: bool,
) -> Result<(Vec<Point>, bool)> {
    let guard = sys.domain.inflated(ESCAPE_INFLATION);
    let mut states = Vec::with_capacity(if keep_all { horizon + 1 } else { 1 });
    let mut current = x0.to_vec();
    let mut escaped = false;
    if keep_all {
        states.push(current.clone());
    }
    for _ in 0..horizon {
        if !escaped {
            match integrator.integrate(sys, &current, 0.0, 1.0, Some(&guard))? {
                Flow::Completed(y) => current = y,
                Flow::Escaped(_) => escaped = true,
            }
        }
        if keep_all {
            states.push(current.clone());
        }
    }
    if !keep_all {
        states.push(current);
    }
    Ok((states, escaped))
}

/// Iterates the numerical time-1 map `horizon` times from every point.
pub fn iterate_time1(sys: &SystemSpec, points: &[Point], horizon: usize) -> Result<OrbitEnsemble> {
    iterate_time1_with(&DormandPrince::default(), sys, points, horizon)
}

pub fn iterate_time1_with(
    integrator: &DormandPrince,
    sys: &SystemSpec,
    points: &[Point],
    horizon: usize,
) -> Result<OrbitEnsemble> {
    if horizon == 0 {
        return Err(Error::InvalidParameters("horizon must be at least 1".into()));
    }
    check_inputs(sys, points)?;
    let orbits: Vec<(Vec<Point>, bool)> = points
        .par_iter()
        .map(|p| orbit(sys, integrator, p, horizon, true))
        .collect::<Result<_>>()?;
    let mut snapshots = vec![Vec::with_capacity(points.len()); horizon + 1];
    let mut escaped = Vec::with_capacity(points.len());
    for (states, esc) in orbits {
        for (snap, s) in snapshots.iter_mut().zip(states) {
            snap.push(s);
        }
        escaped.push(esc);
    }
    Ok(OrbitEnsemble { snapshots, escaped })
}

/// Final iterates only, without storing intermediate snapshots.
pub fn flow_terminal(
    sys: &SystemSpec,
    points: &[Point],
    horizon: usize,
) -> Result<(Vec<Point>, Vec<bool>)> {
    check_inputs(sys, points)?;
    let integrator = DormandPrince::default();
    let results: Vec<(Vec<Point>, bool)> = points
        .par_iter()
        .map(|p| orbit(sys, &integrator, p, horizon, false))
        .collect::<Result<_>>()?;
    Ok(results
        .into_iter()
        .map(|(mut s, e)| (s.pop().expect("terminal state"), e))
        .unzip())
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `sup_{a∈A} dist(a, B)` by exhaustive search.
fn directed(a: &[Point], b: &[Point]) -> f64 {
    a.par_iter()
        .map(|p| {
            b.iter()
                .map(|q| dist2(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

/// Euclidean Hausdorff distance between finite point sets.
pub fn hausdorff(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("hausdorff distance of an empty set"));
    }
    let d = a[0].len();
    if let Some(p) = a.iter().chain(b).find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.len(),
        });
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// First iterate after which consecutive snapshots stay within `tol` in
/// Hausdorff distance; `None` if the last pair already exceeds it.
pub fn stabilization_index(ens: &OrbitEnsemble, tol: f64) -> Result<Option<usize>> {
    let mut first = None;
    for i in (0..ens.horizon()).rev() {
        let dist = hausdorff(&ens.snapshots[i], &ens.snapshots[i + 1])?;
        if dist > tol {
            break;
        }
        first = Some(i);
    }
    Ok(first)
}

/// Writes `iter,id,x1..xd` rows.
pub fn write_ensemble_csv<W: Write>(ens: &OrbitEnsemble, writer: W) -> Result<()> {
    let d = ens.initial().first().map_or(0, |p| p.len());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["iter".to_string(), "id".to_string()];
    header.extend((1..=d).map(|k| format!("x{k}")));
    w.write_record(&header)?;
    for (i, snap) in ens.snapshots.iter().enumerate() {
        for (j, p) in snap.iter().enumerate() {
            let mut row = vec![i.to_string(), j.to_string()];
            row.extend(p.iter().map(|v| format!("{v:e}")));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_ensemble_csv<R: Read>(reader: R) -> Result<OrbitEnsemble> {
    let mut r = csv::Reader::from_reader(reader);
    let d = r.headers()?.len().saturating_sub(2);
    if d == 0 {
        return Err(Error::Parse("ensemble CSV needs iter, id and coordinates".into()));
    }
    let mut rows: Vec<(usize, usize, Point)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::Parse("short row".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(e.to_string()))
        };
        let iter = num(0)? as usize;
        let id = num(1)? as usize;
        let p = (0..d).map(|k| num(k + 2)).collect::<Result<Point>>()?;
        rows.push((iter, id, p));
    }
    let iters = rows.iter().map(|r| r.0).max().map_or(0, |m| m + 1);
    let ids = rows.iter().map(|r| r.1).max().map_or(0, |m| m + 1);
    if iters == 0 {
        return Err(Error::EmptyInput("ensemble CSV has no rows"));
    }
    let mut snapshots: Vec<Vec<Option<Point>>> = vec![vec![None; ids]; iters];
    for (i, j, p) in rows {
        snapshots[i][j] = Some(p);
    }
    let snapshots = snapshots
        .into_iter()
        .map(|snap| {
            snap.into_iter()
                .collect::<Option<Vec<Point>>>()
                .ok_or_else(|| Error::Parse("ensemble CSV has missing (iter, id) rows".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitEnsemble {
        escaped: vec![false; ids],
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::latin_hypercube;

    #[test]
    fn hausdorff_small_cases() {
        let a = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let b = vec![vec![0.0, 1.0]];
        assert!((hausdorff(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff(&[vec![0.0]], &[vec![3.0]]).unwrap(), 3.0);
        assert!(hausdorff(&[], &b).is_err());
    }

    #[test]
    fn fixed_points_stay_put() {
        let sys = SystemSpec::by_name("linear_separatrix").unwrap();
        let s3 = 3f64.sqrt();
        let fixed = vec![
            vec![0.0, 0.0],
            vec![0.5 - 0.5 * s3, 0.5 * s3 + 0.5],
            vec![-0.5 - 0.5 * s3, 0.5 - 0.5 * s3],
        ];
        let ens = iterate_time1(&sys, &fixed, 3).unwrap();
        for (p, q) in fixed.iter().zip(ens.terminal()) {
            assert!(dist2(p, q).sqrt() < 1e-9);
        }
        assert_eq!(stabilization_index(&ens, 1e-6).unwrap(), Some(0));
    }

    #[test]
    fn synthetic_shrinking_sets() {
        // set i is {0, 2^-i}; consecutive distances 1/2, 1/4, 1/8, ...
        let snapshots: Vec<Vec<Point>> = (0..8)
            .map(|i| vec![vec![0.0], vec![0.5f64.powi(i)]])
            .collect();
        let ens = OrbitEnsemble {
            escaped: vec![false; 2],
            snapshots,
        };
        // d_i = 2^-(i+1); first i with d_i <= 0.07 is i = 3 (0.0625)
        assert_eq!(stabilization_index(&ens, 0.07).unwrap(), Some(3));
        assert_eq!(stabilization_index(&ens, 1e-6).unwrap(), None);
    }

    #[test]
    fn csv_round_trip() {
        let sys = SystemSpec::by_name("radial_bistable").unwrap();
        let pts = latin_hypercube(&sys.domain, 5, 1).unwrap();
        let ens = iterate_time1(&sys, &pts, 2).unwrap();
        let mut buf = Vec::new();
        write_ensemble_csv(&ens, &mut buf).unwrap();
        let back = read_ensemble_csv(buf.as_slice()).unwrap();
        assert_eq!(back.snapshots, ens.snapshots);
    }

    #[test]
    fn rejects_points_outside_domain() {
        let sys = SystemSpec::by_name("radial_bistable").unwrap();
        assert!(iterate_time1(&sys, &[vec![9.0, 0.0]], 1).is_err());
        assert!(iterate_time1(&sys, &[vec![0.0, 0.0]], 0).is_err());
    }
}
