use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{directed_hausdorff, principal_set, wasserstein_distance};
use crate::corpus::IterativeMap;
use crate::error::{Error, Result};
use crate::par::{map_ordered, Execution};
use crate::spectral::{decompose_trajectory, DecompositionSettings};
use crate::trajectory::{iterate, RunConfig};

/// Rectangular lattice of two-coordinate initial states.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Grid {
    /// `n` points per axis at `lo + i * (hi - lo) / n`, `i = 0..n`.
    pub fn half_open(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("grid resolution must be positive"));
        }
        if !(hi > lo) {
            return Err(Error::config(format!("grid range [{lo}, {hi}] is empty")));
        }
        let axis: Vec<f64> = (0..n).map(|i| lo + i as f64 * (hi - lo) / n as f64).collect();
        Ok(Grid {
            xs: axis.clone(),
            ys: axis,
        })
    }

    pub fn from_axes(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || ys.is_empty() {
            return Err(Error::config("grid axes must be non-empty"));
        }
        Ok(Grid { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell `(i, j)` in row-major order; `i` indexes `xs`.
    pub fn points(&self) -> Vec<(usize, usize, [f64; 2])> {
        let mut out = Vec::with_capacity(self.len());
        for (i, x) in self.xs.iter().enumerate() {
            for (j, y) in self.ys.iter().enumerate() {
                out.push((i, j, [*x, *y]));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellFlag {
    Wasserstein,
    /// Principal sets differed in size; value is the symmetric Hausdorff distance.
    Hausdorff,
    Failed,
}

#[derive(Clone, Debug)]
pub struct SweepSettings {
    pub run: RunConfig,
    pub decomposition_a: DecompositionSettings,
    pub decomposition_b: DecompositionSettings,
    pub execution: Execution,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            run: RunConfig::with_max_iters(40),
            decomposition_a: DecompositionSettings::dmd(),
            decomposition_b: DecompositionSettings::dmd(),
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub grid: Grid,
    /// Row-major distances, NaN for failed cells.
    pub values: Vec<f64>,
    pub flags: Vec<CellFlag>,
    pub principal_a: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub cells: usize,
    pub failed: usize,
    pub hausdorff_cells: usize,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub max_over_min: f64,
    pub above_10x_median: usize,
    /// Largest 4-connected group of cells above 100 times the minimum.
    pub largest_region_above_100x_min: usize,
}

impl DistanceField {
    pub fn nx(&self) -> usize {
        self.grid.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.grid.ys.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny() + j]
    }

    /// Size of the largest 4-connected set of finite cells above `threshold`.
    pub fn largest_region_above(&self, threshold: f64) -> usize {
        let (nx, ny) = (self.nx(), self.ny());
        let hot: Vec<bool> = self.values.iter().map(|v| v.is_finite() && *v > threshold).collect();
        let mut seen = vec![false; hot.len()];
        let mut best = 0;
        for start in 0..hot.len() {
            if !hot[start] || seen[start] {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut size = 0;
            while let Some(c) = stack.pop() {
                size += 1;
                let (i, j) = (c / ny, c % ny);
                let mut nbrs = Vec::with_capacity(4);
                if i > 0 {
                    nbrs.push(c - ny);
                }
                if i + 1 < nx {
                    nbrs.push(c + ny);
                }
                if j > 0 {
                    nbrs.push(c - 1);
                }
                if j + 1 < ny {
                    nbrs.push(c + 1);
                }
                for nb in nbrs {
                    if hot[nb] && !seen[nb] {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
            best = best.max(size);
        }
        best
    }

    pub fn stats(&self) -> FieldStats {
        let mut finite: Vec<f64> = self.values.iter().copied().filter(|v| v.is_finite()).collect();
        finite.sort_by(f64::total_cmp);
        let (min, max, median) = if finite.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            let k = finite.len();
            let median = if k % 2 == 1 {
                finite[k / 2]
            } else {
                0.5 * (finite[k / 2 - 1] + finite[k / 2])
            };
            (finite[0], finite[k - 1], median)
        };
        FieldStats {
            cells: self.values.len(),
            failed: self.flags.iter().filter(|f| **f == CellFlag::Failed).count(),
            hausdorff_cells: self.flags.iter().filter(|f| **f == CellFlag::Hausdorff).count(),
            min,
            max,
            median,
            max_over_min: max / min,
            above_10x_median: finite.iter().filter(|v| **v > 10.0 * median).count(),
            largest_region_above_100x_min: self.largest_region_above(100.0 * min),
        }
    }
}

fn cell_distance(pa: &[Complex64], pb: &[Complex64]) -> Result<(f64, CellFlag)> {
    if pa.len() == pb.len() {
        return Ok((wasserstein_distance(pa, pb)?, CellFlag::Wasserstein));
    }
    let d = directed_hausdorff(pa, pb)?.max(directed_hausdorff(pb, pa)?);
    Ok((d, CellFlag::Hausdorff))
}

/// Distance between the principal set of `map_a` run from `x0_a` and that of
/// `map_b` run from every grid point. Cell failures become NaN.
pub fn sweep(
    map_a: &IterativeMap,
    x0_a: &[f64],
    map_b: &IterativeMap,
    grid: &Grid,
    settings: &SweepSettings,
) -> Result<DistanceField> {
    settings.run.validate()?;
    if map_b.dim() != 2 {
        return Err(Error::config(format!(
            "sweep grids are two-dimensional but {} has dimension {}",
            map_b.name(),
            map_b.dim()
        )));
    }
    let traj_a = iterate(map_a, x0_a, &settings.run)?;
    let spec_a = decompose_trajectory(&traj_a, &settings.decomposition_a)?;
    let pa = principal_set(&spec_a, false);
    if pa.is_empty() {
        return Err(Error::DegenerateData("reference spectrum has no eigenvalues".into()));
    }
    let points = grid.points();
    let cells = map_ordered(&points, settings.execution, |(i, j, p)| {
        let result = iterate(map_b, p, &settings.run)
            .and_then(|t| decompose_trajectory(&t, &settings.decomposition_b))
            .and_then(|s| cell_distance(&pa, &principal_set(&s, false)));
        match result {
            Ok(v) => v,
            Err(e) => {
                log::debug!("sweep cell ({i}, {j}) at {p:?} failed: {e}");
                (f64::NAN, CellFlag::Failed)
            }
        }
    });
    let (values, flags) = cells.into_iter().unzip();
    Ok(DistanceField {
        grid: grid.clone(),
        values,
        flags,
        principal_a: pa,
    })
}
