//! Running a map to convergence (or divergence) and pairing up snapshots.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::corpus::IterativeMap;
use crate::error::{Error, Result};
use crate::oracles::norm2;
use crate::par::{map_ordered, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Iteration budget `N_max`.
    pub max_iters: usize,
    /// Fixed-point tolerance on the distance between successive iterates.
    pub eps: f64,
    /// Runs stop as diverged once the state norm reaches this.
    pub overflow_cap: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_iters: 200,
            eps: 1e-12,
            overflow_cap: 1e8,
        }
    }
}

impl RunConfig {
    pub fn with_max_iters(max_iters: usize) -> Self {
        RunConfig {
            max_iters,
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_iters < 2 {
            return Err(Error::config(format!(
                "max_iters must be at least 2, got {}",
                self.max_iters
            )));
        }
        if !(self.overflow_cap > self.eps) {
            return Err(Error::config("overflow_cap must exceed eps"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Converged,
    BudgetExhausted,
    Diverged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub status: RunStatus,
    pub fixed_point_estimate: Option<Vec<f64>>,
}

impl Trajectory {
    /// Wraps externally produced states. Convergence is unknown unless the
    /// last two states coincide within `eps`.
    pub fn from_states(states: Vec<Vec<f64>>, eps: f64) -> Result<Self> {
        let dim = states
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
        if let Some(bad) = states.iter().position(|s| s.len() != dim) {
            return Err(Error::invalid(format!(
                "state {bad} has length {} (expected {dim})",
                states[bad].len()
            )));
        }
        let converged = states.len() >= 2 && {
            let n = states.len();
            distance(&states[n - 1], &states[n - 2]) <= eps
        };
        let (status, fixed_point_estimate) = if converged {
            (RunStatus::Converged, states.last().cloned())
        } else {
            (RunStatus::BudgetExhausted, None)
        };
        Ok(Trajectory {
            states,
            status,
            fixed_point_estimate,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn iterate(map: &IterativeMap, x0: &[f64], cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if x0.len() != map.dim() {
        return Err(Error::config(format!(
            "initial state has length {} but {} has dim {}",
            x0.len(),
            map.name(),
            map.dim()
        )));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("initial state is not finite"));
    }
    let mut states = vec![x0.to_vec()];
    let failure = |states: Vec<Vec<f64>>, message: String, cause: Option<Error>| Error::NumericFailure {
        message,
        cause: cause.map(Box::new),
        partial: Box::new(Trajectory {
            states,
            status: RunStatus::BudgetExhausted,
            fixed_point_estimate: None,
        }),
    };
    for k in 0..cfg.max_iters {
        let last = states.last().expect("trajectory starts non-empty");
        let next = match map.step(last) {
            Ok(next) => next,
            Err(e) => return Err(failure(states, format!("step {k} failed: {e}"), Some(e))),
        };
        if next.iter().any(|v| v.is_nan()) {
            return Err(failure(states, format!("NaN produced at step {k}"), None));
        }
        if norm2(&next) >= cfg.overflow_cap {
            states.push(next);
            return Ok(Trajectory {
                states,
                status: RunStatus::Diverged,
                fixed_point_estimate: None,
            });
        }
        let step_len = distance(&next, last);
        states.push(next);
        if step_len <= cfg.eps {
            let fixed = states.last().cloned();
            return Ok(Trajectory {
                states,
                status: RunStatus::Converged,
                fixed_point_estimate: fixed,
            });
        }
    }
    Ok(Trajectory {
        states,
        status: RunStatus::BudgetExhausted,
        fixed_point_estimate: None,
    })
}

/// Runs independent initial conditions; results are in input order.
pub fn iterate_batch(
    map: &IterativeMap,
    initial_states: &[Vec<f64>],
    cfg: &RunConfig,
    exec: Execution,
) -> Vec<Result<Trajectory>> {
    map_ordered(initial_states, exec, |x0| iterate(map, x0, cfg))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    None,
    /// Subtract the fixed-point estimate, or the final state without one.
    FixedPoint,
}

impl Centering {
    /// Center only runs that actually reached a fixed point.
    pub fn auto(status: RunStatus) -> Self {
        match status {
            RunStatus::Converged => Centering::FixedPoint,
            RunStatus::BudgetExhausted | RunStatus::Diverged => Centering::None,
        }
    }
}

/// Column-paired snapshot matrices: column `j` of `y` is one step after
/// column `j` of `x`.
#[derive(Clone, Debug)]
pub struct SnapshotPair {
    pub x: Mat<f64>,
    pub y: Mat<f64>,
    pub observable_tag: String,
}

impl SnapshotPair {
    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_pairs(&self) -> usize {
        self.x.ncols()
    }
}

fn centering_tag(centering: Centering, traj: &Trajectory) -> &'static str {
    match (centering, traj.fixed_point_estimate.is_some()) {
        (Centering::None, _) => "identity",
        (Centering::FixedPoint, true) => "identity, centered at fixed point",
        (Centering::FixedPoint, false) => "identity, centered at final state",
    }
}

fn center_of(traj: &Trajectory, centering: Centering) -> Vec<f64> {
    match centering {
        Centering::None => vec![0.0; traj.dim()],
        Centering::FixedPoint => traj
            .fixed_point_estimate
            .clone()
            .or_else(|| traj.states.last().cloned())
            .unwrap_or_default(),
    }
}

pub fn snapshots(traj: &Trajectory, centering: Centering) -> Result<SnapshotPair> {
    if traj.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 states, got {}",
            traj.len()
        )));
    }
    let c = center_of(traj, centering);
    let m = traj.len() - 1;
    let d = traj.dim();
    let value = |k: usize, i: usize| traj.states[k][i] - c[i];
    Ok(SnapshotPair {
        x: Mat::from_fn(d, m, |i, j| value(j, i)),
        y: Mat::from_fn(d, m, |i, j| value(j + 1, i)),
        observable_tag: centering_tag(centering, traj).to_string(),
    })
}

/// Stacks the pairs of several trajectories side by side. Pairs never
/// straddle two trajectories.
pub fn multi_snapshots(trajs: &[Trajectory], centering: Centering) -> Result<SnapshotPair> {
    let first = trajs
        .first()
        .ok_or_else(|| Error::InsufficientData("no trajectories".into()))?;
    let d = first.dim();
    if let Some(bad) = trajs.iter().find(|t| t.dim() != d) {
        return Err(Error::config(format!(
            "trajectory dimensions differ ({d} vs {})",
            bad.dim()
        )));
    }
    let parts = trajs
        .iter()
        .map(|t| snapshots(t, centering))
        .collect::<Result<Vec<_>>>()?;
    let total: usize = parts.iter().map(SnapshotPair::n_pairs).sum();
    let mut x = Mat::zeros(d, total);
    let mut y = Mat::zeros(d, total);
    let mut col = 0;
    for p in &parts {
        for j in 0..p.n_pairs() {
            for i in 0..d {
                x[(i, col)] = p.x[(i, j)];
                y[(i, col)] = p.y[(i, j)];
            }
            col += 1;
        }
    }
    let tag = if trajs.len() == 1 {
        parts[0].observable_tag.clone()
    } else {
        format!("{} ({} trajectories)", parts[0].observable_tag, trajs.len())
    };
    Ok(SnapshotPair {
        x,
        y,
        observable_tag: tag,
    })
}
