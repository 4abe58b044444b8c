use std::fmt;
use std::str::FromStr;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named scalar function of the state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observable {
    Constant,
    Coord(usize),
    Power(usize, u32),
    Log(usize),
    Exp(usize),
    Sin(usize),
    Cos(usize),
    /// Product of powers `∏ x_i^{e_i}` over the listed exponents.
    Monomial(Vec<u32>),
}

impl Observable {
    fn max_index(&self) -> Option<usize> {
        match self {
            Observable::Constant => None,
            Observable::Coord(i)
            | Observable::Power(i, _)
            | Observable::Log(i)
            | Observable::Exp(i)
            | Observable::Sin(i)
            | Observable::Cos(i) => Some(*i),
            Observable::Monomial(e) => e.len().checked_sub(1),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if let Some(i) = self.max_index() {
            if i >= x.len() {
                return Err(Error::InvalidObservable(format!(
                    "{self} needs a state of length > {i}"
                )));
            }
        }
        let v = match self {
            Observable::Constant => 1.0,
            Observable::Coord(i) => x[*i],
            Observable::Power(i, p) => x[*i].powi(*p as i32),
            Observable::Log(i) => {
                if !(x[*i] > 0.0) {
                    return Err(Error::InvalidObservable(format!(
                        "log of nonpositive value {}",
                        x[*i]
                    )));
                }
                x[*i].ln()
            }
            Observable::Exp(i) => x[*i].exp(),
            Observable::Sin(i) => x[*i].sin(),
            Observable::Cos(i) => x[*i].cos(),
            Observable::Monomial(e) => e
                .iter()
                .zip(x)
                .map(|(p, v)| v.powi(*p as i32))
                .product(),
        };
        if !v.is_finite() {
            return Err(Error::InvalidObservable(format!("{self} is not finite at {x:?}")));
        }
        Ok(v)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Constant => f.write_str("1"),
            Observable::Coord(i) => write!(f, "x{i}"),
            Observable::Power(i, p) => write!(f, "x{i}^{p}"),
            Observable::Log(i) => write!(f, "log(x{i})"),
            Observable::Exp(i) => write!(f, "exp(x{i})"),
            Observable::Sin(i) => write!(f, "sin(x{i})"),
            Observable::Cos(i) => write!(f, "cos(x{i})"),
            Observable::Monomial(e) => {
                let terms: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0)
                    .map(|(i, p)| if *p == 1 { format!("x{i}") } else { format!("x{i}^{p}") })
                    .collect();
                if terms.is_empty() {
                    f.write_str("1")
                } else {
                    f.write_str(&terms.join("*"))
                }
            }
        }
    }
}

fn parse_coord(s: &str) -> Result<usize> {
    s.strip_prefix('x')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| Error::InvalidObservable(format!("expected a coordinate like x0, got `{s}`")))
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Observable::Constant);
        }
        for (name, ctor) in [
            ("log", Observable::Log as fn(usize) -> Observable),
            ("exp", Observable::Exp),
            ("sin", Observable::Sin),
            ("cos", Observable::Cos),
        ] {
            if let Some(inner) = s.strip_prefix(name).and_then(|r| r.strip_prefix('(')) {
                let inner = inner
                    .strip_suffix(')')
                    .ok_or_else(|| Error::InvalidObservable(format!("unbalanced `{s}`")))?;
                return Ok(ctor(parse_coord(inner.trim())?));
            }
        }
        if let Some((base, p)) = s.split_once('^') {
            let p: u32 = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidObservable(format!("bad exponent in `{s}`")))?;
            return Ok(Observable::Power(parse_coord(base.trim())?, p));
        }
        Ok(Observable::Coord(parse_coord(s)?))
    }
}

/// Lifting basis for extended DMD.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Dictionary {
    /// The state itself; decomposing with it is plain DMD.
    #[default]
    Identity,
    /// All monomials of total degree `≤ max_degree`, constant included.
    Monomials { max_degree: usize },
    Custom(Vec<Observable>),
}

/// Exponent vectors of total degree `≤ max_degree` in `d` variables, graded
/// by degree and lexicographically descending within a degree.
pub fn monomial_exponents(d: usize, max_degree: usize) -> Vec<Vec<u32>> {
    fn fill(d: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == d {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for p in (0..=left).rev() {
            prefix.push(p);
            fill(d, left - p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=max_degree as u32 {
        fill(d, deg, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

impl Dictionary {
    pub fn max_degree(&self) -> Option<usize> {
        match self {
            Dictionary::Monomials { max_degree } => Some(*max_degree),
            _ => None,
        }
    }

    pub fn functions(&self, d: usize) -> Vec<Observable> {
        match self {
            Dictionary::Identity => (0..d).map(Observable::Coord).collect(),
            Dictionary::Monomials { max_degree } => monomial_exponents(d, *max_degree)
                .into_iter()
                .map(Observable::Monomial)
                .collect(),
            Dictionary::Custom(fs) => fs.clone(),
        }
    }

    pub fn output_dim(&self, d: usize) -> usize {
        match self {
            Dictionary::Identity => d,
            Dictionary::Monomials { max_degree } => binomial(d + max_degree, d),
            Dictionary::Custom(fs) => fs.len(),
        }
    }

    pub fn lift(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Dictionary::Identity => Ok(x.to_vec()),
            _ => self.functions(x.len()).iter().map(|o| o.eval(x)).collect(),
        }
    }

    /// Lifts every column of a `d × m` snapshot matrix.
    pub fn lift_columns(&self, m: &Mat<f64>) -> Result<Mat<f64>> {
        let d = m.nrows();
        let fs = self.functions(d);
        let mut out = Mat::zeros(fs.len(), m.ncols());
        let mut col = vec![0.0; d];
        for j in 0..m.ncols() {
            for (i, c) in col.iter_mut().enumerate() {
                *c = m[(i, j)];
            }
            for (r, o) in fs.iter().enumerate() {
                out[(r, j)] = o.eval(&col)?;
            }
        }
        Ok(out)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl fmt::Display for Dictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dictionary::Identity => f.write_str("identity"),
            Dictionary::Monomials { max_degree } => write!(f, "monomials:{max_degree}"),
            Dictionary::Custom(fs) => {
                let names: Vec<String> = fs.iter().map(ToString::to_string).collect();
                write!(f, "custom:{}", names.join(","))
            }
        }
    }
}

impl FromStr for Dictionary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" {
            return Ok(Dictionary::Identity);
        }
        if let Some(deg) = s.strip_prefix("monomials:") {
            let max_degree: usize = deg
                .parse()
                .map_err(|_| Error::config(format!("bad monomial degree `{deg}`")))?;
            if max_degree == 0 {
                return Err(Error::config("monomial degree must be positive"));
            }
            return Ok(Dictionary::Monomials { max_degree });
        }
        if let Some(list) = s.strip_prefix("custom:") {
            let fs = list
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(str::parse)
                .collect::<Result<Vec<Observable>>>()?;
            if fs.is_empty() {
                return Err(Error::config("custom dictionary needs at least one function"));
            }
            return Ok(Dictionary::Custom(fs));
        }
        Err(Error::config(format!("unknown dictionary `{s}`")))
    }
}

impl Serialize for Dictionary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dictionary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
