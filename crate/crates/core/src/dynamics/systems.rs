use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use serde::Deserialize;

use super::{HillParams, HyperRectangle};
use crate::{Error, Point, Result};

const HILL_PERIODIC_3D: &str = include_str!("../../fixtures/hill_periodic_3d.json");
const EMT_HILL_6D: &str = include_str!("../../fixtures/emt_hill_6d.json");

/// Names accepted by [`SystemSpec::by_name`].
pub const CATALOG: &[&str] = &[
    "linear_separatrix",
    "radial_bistable",
    "radial_tristable",
    "nonlinear_separatrix",
    "hill_periodic_3d",
    "emt_hill_6d",
    "ellipsoidal_2d",
    "ellipsoidal_3d",
    "ellipsoidal_4d",
    "ellipsoidal_5d",
    "decay",
];

pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    /// Writes `g(x)` into `out`. Both slices have length `dim()`.
    fn field_into(&self, x: &[f64], out: &mut [f64]);
}

#[derive(Clone, Debug, PartialEq)]
pub enum SystemKind {
    /// `ẋ = −x` in every coordinate.
    Decay,
    /// `u̇ = u(1 − u²)`, `v̇ = u²(3 − 2u²) − v` in coordinates rotated by 60°:
    /// two stable nodes separated by the line `u = 0`, the stable manifold of
    /// the saddle at the origin.
    LinearSeparatrix,
    /// Planar `θ̇ = 1`, `ṙ = −r ∏ (r − ρ)` over the listed radii.
    Radial { radii: Vec<f64> },
    /// `ẋ₂ = (x₂ − x₁²)(9 − x₂²)`, all other coordinates decay.
    NonlinearSeparatrix,
    Hill(HillParams),
    /// Radial dynamics in `y = T⁻¹x`, rotating in the `(y₁, y₂)` plane.
    Ellipsoidal {
        radii: Vec<f64>,
        transform: Vec<Vec<f64>>,
        inverse: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub dim: usize,
    pub domain: HyperRectangle,
    pub kind: SystemKind,
}

#[derive(Deserialize)]
struct HillFile {
    name: String,
    domain: HyperRectangle,
    #[serde(flatten)]
    params: serde_json::Value,
}

impl SystemSpec {
    pub fn by_name(name: &str) -> Result<Self> {
        let cube = |d: usize, lo: f64, hi: f64| HyperRectangle::cube(d, lo, hi);
        match name {
            "decay" => Ok(Self {
                name: name.into(),
                dim: 1,
                domain: cube(1, -2.0, 2.0)?,
                kind: SystemKind::Decay,
            }),
            "linear_separatrix" => Ok(Self {
                name: name.into(),
                dim: 2,
                domain: HyperRectangle::new(vec![-2.0, -3.5], vec![2.0, 3.5])?,
                kind: SystemKind::LinearSeparatrix,
            }),
            "radial_bistable" => Ok(Self {
                name: name.into(),
                dim: 2,
                domain: cube(2, -4.0, 4.0)?,
                kind: SystemKind::Radial {
                    radii: vec![1.0, 2.0, 3.0],
                },
            }),
            "radial_tristable" => Ok(Self {
                name: name.into(),
                dim: 2,
                domain: cube(2, -5.0, 5.0)?,
                kind: SystemKind::Radial {
                    radii: vec![1.0, 2.0, 3.0, 4.0],
                },
            }),
            "nonlinear_separatrix" => Ok(Self {
                name: name.into(),
                dim: 4,
                domain: HyperRectangle::new(
                    vec![-2.0, -3.5, -2.0, -2.0],
                    vec![2.0, 3.5, 2.0, 2.0],
                )?,
                kind: SystemKind::NonlinearSeparatrix,
            }),
            "hill_periodic_3d" => Self::hill_from_json(HILL_PERIODIC_3D),
            "emt_hill_6d" => Self::hill_from_json(EMT_HILL_6D),
            _ => {
                if let Some(d) = name
                    .strip_prefix("ellipsoidal_")
                    .and_then(|s| s.strip_suffix('d'))
                    .and_then(|s| s.parse::<usize>().ok())
                {
                    if d >= 2 {
                        return Self::ellipsoidal(d);
                    }
                }
                Err(Error::UnknownSystem(name.to_string()))
            }
        }
    }

    /// Loads a Hill system (domain and parameters) from a JSON document.
    pub fn hill_from_json(text: &str) -> Result<Self> {
        let file: HillFile = serde_json::from_str(text)?;
        let params = HillParams::from_json(&file.params.to_string())?;
        if params.dim() != file.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: params.dim(),
                got: file.domain.dim(),
            });
        }
        Ok(Self {
            name: file.name,
            dim: params.dim(),
            domain: file.domain,
            kind: SystemKind::Hill(params),
        })
    }

    /// The bistable radial system in `y = T⁻¹x` with
    /// `T = R₄₅ ∘ diag(1, 0.25)` on the first two coordinates.
    pub fn ellipsoidal(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameters(
                "ellipsoidal systems need at least two dimensions".into(),
            ));
        }
        let mut t = vec![vec![0.0; dim]; dim];
        for (i, row) in t.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let (c, s) = (FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        t[0][0] = c;
        t[0][1] = -s * 0.25;
        t[1][0] = s;
        t[1][1] = c * 0.25;
        Self::transformed(&format!("ellipsoidal_{dim}d"), vec![1.0, 2.0, 3.0], t, 4.0)
    }

    /// Radial system pushed forward by an invertible `transform`; the domain is
    /// the bounding box of `transform([−half_width, half_width]^d)`.
    pub fn transformed(
        name: &str,
        radii: Vec<f64>,
        transform: Vec<Vec<f64>>,
        half_width: f64,
    ) -> Result<Self> {
        let d = transform.len();
        if d < 2 || transform.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidParameters(
                "transform must be a square matrix of size >= 2".into(),
            ));
        }
        let m = DMatrix::from_fn(d, d, |i, j| transform[i][j]);
        if m.determinant().abs() <= 1e-12 {
            return Err(Error::InvalidParameters("transform is not invertible".into()));
        }
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameters("transform is not invertible".into()))?;
        let inverse = (0..d)
            .map(|i| (0..d).map(|j| inv[(i, j)]).collect())
            .collect();
        let extent: Vec<f64> = transform
            .iter()
            .map(|row| half_width * row.iter().map(|v| v.abs()).sum::<f64>())
            .collect();
        let domain = HyperRectangle::new(
            extent.iter().map(|e| -e).collect(),
            extent.clone(),
        )?;
        Ok(Self {
            name: name.to_string(),
            dim: d,
            domain,
            kind: SystemKind::Ellipsoidal {
                radii,
                transform,
                inverse,
            },
        })
    }
}

/// Evaluates `g(x)` with dimension checking.
pub fn eval_field(sys: &SystemSpec, x: &[f64]) -> Result<Point> {
    if x.len() != sys.dim {
        return Err(Error::DimensionMismatch {
            expected: sys.dim,
            got: x.len(),
        });
    }
    let mut out = vec![0.0; sys.dim];
    sys.field_into(x, &mut out);
    Ok(out)
}

/// `ṙ / r = −∏ (r − ρ)`, polynomial in `r` so the origin needs no special case.
#[inline]
fn radial_rate(r: f64, radii: &[f64]) -> f64 {
    -radii.iter().map(|rho| r - rho).product::<f64>()
}

fn radial_into(y: &[f64], radii: &[f64], out: &mut [f64]) {
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rate = radial_rate(r, radii);
    for (o, v) in out.iter_mut().zip(y) {
        *o = rate * v;
    }
    out[0] -= y[1];
    out[1] += y[0];
}

fn mat_vec(m: &[Vec<f64>], v: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

impl VectorField for SystemSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn field_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            SystemKind::Decay => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = -v;
                }
            }
            SystemKind::LinearSeparatrix => {
                let s3 = 3f64.sqrt();
                // dynamics live in the rotated coordinates (u, v) and are
                // pushed back to (x, y) by the inverse rotation
                let u = 0.5 * x[0] + 0.5 * s3 * x[1];
                let v = 0.5 * x[1] - 0.5 * s3 * x[0];
                let du = u * (1.0 - u * u);
                let dv = u * u * (3.0 - 2.0 * u * u) - v;
                out[0] = 0.5 * du - 0.5 * s3 * dv;
                out[1] = 0.5 * s3 * du + 0.5 * dv;
            }
            SystemKind::Radial { radii } => radial_into(x, radii, out),
            SystemKind::NonlinearSeparatrix => {
                out[0] = -x[0];
                out[1] = (x[1] - x[0] * x[0]) * (9.0 - x[1] * x[1]);
                for k in 2..x.len() {
                    out[k] = -x[k];
                }
            }
            SystemKind::Hill(params) => params.field_into(x, out),
            SystemKind::Ellipsoidal {
                radii,
                transform,
                inverse,
            } => {
                let d = x.len();
                let mut y = vec![0.0; d];
                let mut dy = vec![0.0; d];
                mat_vec(inverse, x, &mut y);
                radial_into(&y, radii, &mut dy);
                mat_vec(transform, &dy, out);
            }
        }
    }
}
