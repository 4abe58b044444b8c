//! File formats: spectrum and comparison JSON, trajectory CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compare::SpectrumComparison;
use crate::error::{Error, Result};
use crate::spectral::{principal_eigenvalues, Dictionary, KoopmanSpectrum, KoopmanTriplet, Method, PrincipalSettings};
use crate::trajectory::Trajectory;

type Pair = [f64; 2];

fn to_pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

fn from_pair(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Serde adapter storing complex lists as `[[re, im], ...]`.
pub mod complex_list {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<Pair> = v.iter().map(to_pair).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<Pair>::deserialize(d)?;
        Ok(pairs.iter().map(from_pair).collect())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumFile {
    method: Method,
    dictionary: Dictionary,
    rank: usize,
    reconstruction_error: f64,
    eigenvalues: Vec<Pair>,
    modes: Vec<Vec<Pair>>,
    principal: Vec<Pair>,
    #[serde(default)]
    observable: String,
    #[serde(default)]
    eigenfunctions: Vec<Vec<Pair>>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        message: e.to_string(),
    }
}

pub fn spectrum_to_json(spec: &KoopmanSpectrum) -> Result<String> {
    let principal = principal_eigenvalues(spec, PrincipalSettings::for_spectrum(spec));
    let file = SpectrumFile {
        method: spec.method,
        dictionary: spec.dictionary.clone(),
        rank: spec.rank,
        reconstruction_error: spec.reconstruction_error,
        eigenvalues: spec.triplets.iter().map(|t| to_pair(&t.lambda)).collect(),
        modes: spec.triplets.iter().map(|t| t.mode.iter().map(to_pair).collect()).collect(),
        principal: principal.iter().map(to_pair).collect(),
        observable: spec.observable_tag.clone(),
        eigenfunctions: spec
            .triplets
            .iter()
            .map(|t| t.eigfn_coeffs.iter().map(to_pair).collect())
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn spectrum_from_json(text: &str) -> Result<KoopmanSpectrum> {
    let file: SpectrumFile = serde_json::from_str(text).map_err(parse_error)?;
    let n = file.eigenvalues.len();
    let schema = |message: String| Error::Parse { line: 0, message };
    if file.modes.len() != n {
        return Err(schema(format!("{} eigenvalues but {} modes", n, file.modes.len())));
    }
    if !file.eigenfunctions.is_empty() && file.eigenfunctions.len() != n {
        return Err(schema(format!(
            "{} eigenvalues but {} eigenfunctions",
            n,
            file.eigenfunctions.len()
        )));
    }
    if !(file.reconstruction_error >= 0.0) {
        return Err(schema("reconstruction_error must be nonnegative".into()));
    }
    let triplets = (0..n)
        .map(|r| KoopmanTriplet {
            lambda: from_pair(&file.eigenvalues[r]),
            mode: file.modes[r].iter().map(from_pair).collect(),
            eigfn_coeffs: file
                .eigenfunctions
                .get(r)
                .map(|c| c.iter().map(from_pair).collect())
                .unwrap_or_default(),
        })
        .collect();
    Ok(KoopmanSpectrum {
        triplets,
        method: file.method,
        rank: file.rank,
        dictionary: file.dictionary,
        observable_tag: file.observable,
        reconstruction_error: file.reconstruction_error,
    })
}

pub fn write_spectrum(path: &Path, spec: &KoopmanSpectrum) -> Result<()> {
    fs::write(path, spectrum_to_json(spec)?)?;
    Ok(())
}

pub fn read_spectrum(path: &Path) -> Result<KoopmanSpectrum> {
    spectrum_from_json(&fs::read_to_string(path)?)
}

pub fn comparison_to_json(cmp: &SpectrumComparison) -> Result<String> {
    let mut s = serde_json::to_string_pretty(cmp)?;
    s.push('\n');
    Ok(s)
}

/// CSV with header `k,x0,x1,...`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("k");
    for i in 0..traj.dim() {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    for (k, s) in traj.states.iter().enumerate() {
        let _ = write!(out, "{k}");
        for v in s {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Several named trajectories side by side; shorter runs leave empty cells.
pub fn trajectories_csv(named: &[(&str, &Trajectory)]) -> String {
    let mut out = String::from("k");
    for (name, t) in named {
        for i in 0..t.dim() {
            let _ = write!(out, ",{name}_x{i}");
        }
    }
    out.push('\n');
    let rows = named.iter().map(|(_, t)| t.len()).max().unwrap_or(0);
    for k in 0..rows {
        let _ = write!(out, "{k}");
        for (_, t) in named {
            match t.states.get(k) {
                Some(s) => s.iter().for_each(|v| {
                    let _ = write!(out, ",{v}");
                }),
                None => (0..t.dim()).for_each(|_| out.push(',')),
            }
        }
        out.push('\n');
    }
    out
}

/// Parses a `k,x0,x1,...` CSV. Lines are numbered from 1, header included.
pub fn parse_trajectory_csv(text: &str, eps: f64) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let bad_header = cols.len() < 2
        || cols[0] != "k"
        || cols[1..].iter().enumerate().any(|(i, c)| *c != format!("x{i}"));
    if bad_header {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `k,x0,x1,...`, got `{header}`"),
        });
    }
    let d = cols.len() - 1;
    let mut states = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fail = |message: String| Error::Parse { line: lineno, message };
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != d + 1 {
            return Err(fail(format!("expected {} fields, found {}", d + 1, cells.len())));
        }
        let k: usize = cells[0]
            .parse()
            .map_err(|_| fail(format!("iteration index `{}` is not a nonnegative integer", cells[0])))?;
        let expected = states.len();
        if k < expected {
            return Err(fail(format!("duplicate or decreasing k = {k}")));
        }
        if k > expected {
            return Err(fail(format!("gap in k: expected {expected}, found {k}")));
        }
        let row = cells[1..]
            .iter()
            .map(|c| {
                c.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| fail(format!("non-numeric cell `{c}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        states.push(row);
    }
    if states.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Trajectory::from_states(states, eps)
}

pub fn ingest_external_trajectory(path: &Path, eps: f64) -> Result<Trajectory> {
    parse_trajectory_csv(&fs::read_to_string(path)?, eps)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::RunStatus;

    #[test]
    fn csv_examples() {
        let t = parse_trajectory_csv("k,x0\n0,1\n1,0.5\n2,0.25\n", 1e-12).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.status, RunStatus::BudgetExhausted);
        let t = parse_trajectory_csv("k,x0\n0,1\n1,0.5\n2,0.5\n", 1e-12).unwrap();
        assert_eq!(t.status, RunStatus::Converged);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let cases = [
            ("k,x0\n0,1\n2,0.5\n", 3),
            ("k,x0\n0,1\n0,0.5\n", 3),
            ("k,x0,x1\n0,1,2\n1,0.5\n", 3),
            ("k,x0\n0,1\n1,abc\n", 3),
            ("t,x0\n0,1\n", 1),
        ];
        for (text, want) in cases {
            match parse_trajectory_csv(text, 1e-12) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = Trajectory::from_states(vec![vec![0.1, 1.0 / 3.0], vec![-2.5e-17, 7.0]], 1e-12).unwrap();
        let back = parse_trajectory_csv(&trajectory_csv(&t), 1e-12).unwrap();
        assert_eq!(back.states, t.states);
    }

    #[test]
    fn digest_of_empty() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
