//! The benchmark algorithms as black-box state maps, and the exact maps that
//! relate them.
//!
//! Downstream code only ever calls [`IterativeMap::step`]; nothing outside
//! this module looks at the update formulas.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{norm2, Oracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmId {
    Algo1,
    Algo2,
    Algo3,
    Algo4,
    Algo5,
    Algo6,
    Algo7,
    Custom,
}

impl AlgorithmId {
    pub fn from_number(n: u8) -> Result<Self> {
        Ok(match n {
            1 => AlgorithmId::Algo1,
            2 => AlgorithmId::Algo2,
            3 => AlgorithmId::Algo3,
            4 => AlgorithmId::Algo4,
            5 => AlgorithmId::Algo5,
            6 => AlgorithmId::Algo6,
            7 => AlgorithmId::Algo7,
            _ => return Err(Error::config(format!("no corpus algorithm {n}"))),
        })
    }

    pub fn number(self) -> Option<u8> {
        match self {
            AlgorithmId::Algo1 => Some(1),
            AlgorithmId::Algo2 => Some(2),
            AlgorithmId::Algo3 => Some(3),
            AlgorithmId::Algo4 => Some(4),
            AlgorithmId::Algo5 => Some(5),
            AlgorithmId::Algo6 => Some(6),
            AlgorithmId::Algo7 => Some(7),
            AlgorithmId::Custom => None,
        }
    }

    fn uses_proximal(self) -> bool {
        matches!(self, AlgorithmId::Algo6 | AlgorithmId::Algo7)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number() {
            Some(n) => write!(f, "algo{n}"),
            None => f.write_str("custom"),
        }
    }
}

type StepFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;

#[derive(Clone)]
enum Update {
    Corpus { f: Oracle, g: Option<Oracle> },
    Custom { name: String, step: Arc<StepFn> },
}

/// A state update `A: R^d → R^d`.
#[derive(Clone)]
pub struct IterativeMap {
    id: AlgorithmId,
    dim: usize,
    update: Update,
}

impl fmt::Debug for IterativeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("IterativeMap");
        d.field("id", &self.id).field("dim", &self.dim);
        match &self.update {
            Update::Corpus { f: of, g } => d.field("oracle_f", of).field("oracle_g", g),
            Update::Custom { name, .. } => d.field("name", name),
        };
        d.finish()
    }
}

impl IterativeMap {
    pub fn id(&self) -> AlgorithmId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn oracle_f(&self) -> Option<&Oracle> {
        match &self.update {
            Update::Corpus { f, .. } => Some(f),
            Update::Custom { .. } => None,
        }
    }

    pub fn oracle_g(&self) -> Option<&Oracle> {
        match &self.update {
            Update::Corpus { g, .. } => g.as_ref(),
            Update::Custom { .. } => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.update {
            Update::Corpus { .. } => self.id.to_string(),
            Update::Custom { name, .. } => name.clone(),
        }
    }

    /// Wraps a user-supplied step function. The closure must preserve `dim`.
    pub fn custom<F>(name: impl Into<String>, dim: usize, step: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::config("map dimension must be positive"));
        }
        Ok(IterativeMap {
            id: AlgorithmId::Custom,
            dim,
            update: Update::Custom {
                name: name.into(),
                step: Arc::new(step),
            },
        })
    }

    pub fn step(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "{} expects a state of length {}, got {}",
                self.name(),
                self.dim,
                x.len()
            )));
        }
        let next = match &self.update {
            Update::Corpus { f, g } => {
                let mut call_f = |v: &[f64]| f.apply(v);
                match g {
                    Some(g) => {
                        let mut call_g = |v: &[f64]| g.apply(v);
                        corpus_step(self.id, x, &mut call_f, &mut call_g)?
                    }
                    None => corpus_step(self.id, x, &mut call_f, &mut |_| {
                        Err(Error::config("algorithm needs a second oracle"))
                    })?,
                }
            }
            Update::Custom { step, .. } => step(x)?,
        };
        if next.len() != self.dim {
            return Err(Error::Step(format!(
                "{} returned a state of length {} (expected {})",
                self.name(),
                next.len(),
                self.dim
            )));
        }
        Ok(next)
    }
}

/// Builds one of the seven benchmark algorithms.
///
/// Algorithms 1–5 take a scalar gradient oracle; 6 and 7 take two proximal
/// oracles of equal state length `m` and have dimensions `3m` and `2m`.
pub fn make_algorithm(id: AlgorithmId, oracle_f: Oracle, oracle_g: Option<Oracle>) -> Result<IterativeMap> {
    let dim = match id {
        AlgorithmId::Custom => {
            return Err(Error::config("custom maps are built with IterativeMap::custom"))
        }
        AlgorithmId::Algo6 | AlgorithmId::Algo7 => {
            let g = oracle_g
                .ok_or_else(|| Error::config(format!("{id} needs both prox_f and prox_g")))?;
            if !oracle_f.kind.is_proximal() || !g.kind.is_proximal() {
                return Err(Error::config(format!("{id} needs proximal oracles")));
            }
            let m = oracle_f.state_len();
            if g.state_len() != m {
                return Err(Error::config(format!(
                    "prox_f and prox_g act on different lengths ({m} vs {})",
                    g.state_len()
                )));
            }
            if id == AlgorithmId::Algo6 {
                3 * m
            } else {
                2 * m
            }
        }
        _ => {
            if !oracle_f.kind.is_gradient() {
                return Err(Error::config(format!("{id} needs a gradient oracle")));
            }
            if oracle_f.state_len() != 1 {
                return Err(Error::config(format!("{id} needs a scalar gradient oracle")));
            }
            if oracle_g.is_some() {
                return Err(Error::config(format!("{id} takes a single oracle")));
            }
            if matches!(id, AlgorithmId::Algo4 | AlgorithmId::Algo5) {
                1
            } else {
                2
            }
        }
    };
    debug_assert_eq!(id.uses_proximal(), oracle_g.is_some());
    Ok(IterativeMap {
        id,
        dim,
        update: Update::Corpus {
            f: oracle_f,
            g: oracle_g,
        },
    })
}

type OracleCall<'a> = &'a mut dyn FnMut(&[f64]) -> Result<Vec<f64>>;

fn scalar(call: OracleCall<'_>, v: f64) -> Result<f64> {
    Ok(call(&[v])?[0])
}

/// One iteration of a corpus algorithm, line by line. `f` and `g` are
/// invoked exactly as often as the pseudocode invokes them.
pub(crate) fn corpus_step(id: AlgorithmId, x: &[f64], f: OracleCall<'_>, g: OracleCall<'_>) -> Result<Vec<f64>> {
    match id {
        AlgorithmId::Algo1 => {
            let (x1, x2) = (x[0], x[1]);
            let df = scalar(f, 2.0 * x1 - x2)?;
            Ok(vec![2.0 * x1 - x2 - 0.1 * df, x1])
        }
        AlgorithmId::Algo2 => {
            let (xi1, xi2) = (x[0], x[1]);
            let next1 = xi1 - xi2 - 0.2 * scalar(f, xi1)?;
            let next2 = xi2 + 0.1 * scalar(f, xi1)?;
            Ok(vec![next1, next2])
        }
        AlgorithmId::Algo3 => {
            let (x1, x2) = (x[0], x[1]);
            let df = scalar(f, -x1 + 2.0 * x2)?;
            Ok(vec![3.0 * x1 - 2.0 * x2 + 0.2 * df, x1])
        }
        AlgorithmId::Algo4 => {
            let xi = x[0];
            Ok(vec![xi - 0.2 * scalar(f, xi)?])
        }
        AlgorithmId::Algo5 => {
            let v = x[0];
            if !(v > 0.0) {
                return Err(Error::invalid(format!("algo5 needs a positive state, got {v}")));
            }
            Ok(vec![v * (-0.2 * scalar(f, v.ln())?).exp()])
        }
        AlgorithmId::Algo6 => {
            let m = x.len() / 3;
            let x3 = &x[2 * m..];
            let x1n = f(x3)?;
            let arg: Vec<f64> = x1n.iter().zip(x3).map(|(a, b)| 2.0 * a - b).collect();
            let x2n = g(&arg)?;
            let x3n: Vec<f64> = (0..m).map(|i| x3[i] + x2n[i] - x1n[i]).collect();
            Ok([x1n, x2n, x3n].concat())
        }
        AlgorithmId::Algo7 => {
            let m = x.len() / 2;
            let (xi1, xi2) = x.split_at(m);
            let arg: Vec<f64> = (0..m).map(|i| -xi1[i] + 2.0 * xi2[i]).collect();
            let pg = g(&arg)?;
            let next1: Vec<f64> = (0..m).map(|i| pg[i] + xi1[i] - xi2[i]).collect();
            let next2 = f(&next1)?;
            Ok([next1, next2].concat())
        }
        AlgorithmId::Custom => Err(Error::config("custom maps have no corpus update")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConjugacyKind {
    LinearInvertible,
    LinearEmbedded,
    NonlinearInvertible,
    Shift,
}

type StateFn = fn(&[f64]) -> Result<Vec<f64>>;

/// The exact relation between two corpus algorithms.
///
/// State-space kinds carry `h` (and `h⁻¹` when it exists). The shift kind
/// relates iterates at different indices, so it acts on whole trajectories
/// through [`ConjugacyMap::shift_states`].
#[derive(Clone, Copy, Debug)]
pub struct ConjugacyMap {
    pub source: AlgorithmId,
    pub target: AlgorithmId,
    pub kind: ConjugacyKind,
    forward: Option<StateFn>,
    inverse: Option<StateFn>,
}

fn h12(x: &[f64]) -> Result<Vec<f64>> {
    Ok(vec![2.0 * x[0] - x[1], -x[0] + x[1]])
}

fn h21(xi: &[f64]) -> Result<Vec<f64>> {
    Ok(vec![xi[0] + xi[1], xi[0] + 2.0 * xi[1]])
}

fn h34(x: &[f64]) -> Result<Vec<f64>> {
    Ok(vec![-x[0] + 2.0 * x[1]])
}

fn h45(xi: &[f64]) -> Result<Vec<f64>> {
    Ok(vec![xi[0].exp()])
}

fn h54(x: &[f64]) -> Result<Vec<f64>> {
    if !(x[0] > 0.0) {
        return Err(Error::invalid(format!("log of nonpositive state {}", x[0])));
    }
    Ok(vec![x[0].ln()])
}

pub fn conjugacy_map(source: AlgorithmId, target: AlgorithmId) -> Result<ConjugacyMap> {
    use AlgorithmId::*;
    let (kind, forward, inverse): (_, Option<StateFn>, Option<StateFn>) = match (source, target) {
        (Algo1, Algo2) => (ConjugacyKind::LinearInvertible, Some(h12), Some(h21)),
        (Algo2, Algo1) => (ConjugacyKind::LinearInvertible, Some(h21), Some(h12)),
        (Algo3, Algo4) => (ConjugacyKind::LinearEmbedded, Some(h34), None),
        (Algo4, Algo5) => (ConjugacyKind::NonlinearInvertible, Some(h45), Some(h54)),
        (Algo5, Algo4) => (ConjugacyKind::NonlinearInvertible, Some(h54), Some(h45)),
        (Algo6, Algo7) => (ConjugacyKind::Shift, None, None),
        _ => {
            return Err(Error::UnsupportedPair {
                from: source.to_string(),
                to: target.to_string(),
            })
        }
    };
    Ok(ConjugacyMap {
        source,
        target,
        kind,
        forward,
        inverse,
    })
}

impl ConjugacyMap {
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.forward.ok_or_else(|| {
            Error::config("shift maps act on trajectories, not single states")
        })?;
        h(x)
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        let h = self
            .inverse
            .ok_or_else(|| Error::config(format!("{} -> {} has no inverse", self.source, self.target)))?;
        h(y)
    }

    /// Re-indexes a source trajectory into target coordinates:
    /// `ξ^k = (x₃^k, x₁^{k+1})`. The result is one state shorter, and
    /// `x₁^0`, `x₂^0` never appear in it.
    pub fn shift_states(&self, states: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if self.kind != ConjugacyKind::Shift {
            return Err(Error::config("not a shift map"));
        }
        let Some(first) = states.first() else {
            return Ok(Vec::new());
        };
        if first.len() % 3 != 0 {
            return Err(Error::config("shift source states must have length 3m"));
        }
        let m = first.len() / 3;
        Ok(states
            .windows(2)
            .map(|w| {
                let mut xi = w[0][2 * m..].to_vec();
                xi.extend_from_slice(&w[1][..m]);
                xi
            })
            .collect())
    }

    /// Initial state of the target algorithm that the shift pairs with the
    /// source initial state `x⁰`: `(x₃⁰, x₁¹)`, where `x₁¹` comes from one
    /// source step.
    pub fn shift_initial(&self, source_map: &IterativeMap, x0: &[f64]) -> Result<Vec<f64>> {
        let x1 = source_map.step(x0)?;
        let shifted = self.shift_states(&[x0.to_vec(), x1])?;
        Ok(shifted.into_iter().next().expect("two states give one shifted state"))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CommutationCheck {
    pub tol: f64,
    /// Number of iterates compared for shift maps.
    pub horizon: usize,
}

impl Default for CommutationCheck {
    fn default() -> Self {
        CommutationCheck {
            tol: 1e-12,
            horizon: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutationReport {
    pub max_deviation: f64,
    pub samples: usize,
    pub passed: bool,
    /// Every compared value was bit-for-bit identical.
    pub bitwise: bool,
}

/// Measures `max ‖h(T(x)) − S(h(x))‖` over the samples. For shift maps the
/// iterate identity `ξ₁^k = x₃^k`, `ξ₂^k = x₁^{k+1}` is checked up to
/// `check.horizon` instead.
pub fn verify_commutation(
    map: &ConjugacyMap,
    t: &IterativeMap,
    s: &IterativeMap,
    samples: &[Vec<f64>],
    check: &CommutationCheck,
) -> Result<CommutationReport> {
    let mut max_dev = 0.0f64;
    let mut bitwise = true;
    for x in samples {
        if x.len() != t.dim() {
            return Err(Error::config(format!(
                "sample of length {} for {} (dim {})",
                x.len(),
                t.name(),
                t.dim()
            )));
        }
        if map.kind == ConjugacyKind::Shift {
            let (dev, exact) = shift_deviation(map, t, s, x, check.horizon)?;
            max_dev = max_dev.max(dev);
            bitwise &= exact;
            continue;
        }
        let hx = map.apply(x)?;
        if hx.len() != s.dim() {
            return Err(Error::config(format!(
                "h maps into length {} but {} has dim {}",
                hx.len(),
                s.name(),
                s.dim()
            )));
        }
        let lhs = map.apply(&t.step(x)?)?;
        let rhs = s.step(&hx)?;
        bitwise &= lhs == rhs;
        let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        max_dev = max_dev.max(norm2(&diff));
    }
    Ok(CommutationReport {
        max_deviation: max_dev,
        samples: samples.len(),
        passed: max_dev <= check.tol,
        bitwise,
    })
}

fn shift_deviation(
    map: &ConjugacyMap,
    t: &IterativeMap,
    s: &IterativeMap,
    x0: &[f64],
    horizon: usize,
) -> Result<(f64, bool)> {
    let mut source = vec![x0.to_vec()];
    for _ in 0..=horizon {
        let next = t.step(source.last().expect("non-empty"))?;
        source.push(next);
    }
    let expected = map.shift_states(&source)?;
    if expected[0].len() != s.dim() {
        return Err(Error::config(format!(
            "shifted states have length {} but {} has dim {}",
            expected[0].len(),
            s.name(),
            s.dim()
        )));
    }
    let mut xi = expected[0].clone();
    let mut dev = 0.0f64;
    let mut exact = true;
    for want in expected.iter().take(horizon + 1) {
        exact &= &xi == want;
        for (a, b) in xi.iter().zip(want) {
            dev = dev.max((a - b).abs());
        }
        xi = s.step(&xi)?;
    }
    Ok((dev, exact))
}
