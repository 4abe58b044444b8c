//! Distances between Koopman spectra and the conjugacy verdict built on them.

mod assignment;
mod sweep;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use assignment::min_cost_assignment;
pub use sweep::{sweep, CellFlag, DistanceField, FieldStats, Grid, SweepSettings};

use crate::error::{Error, Result};
use crate::spectral::{principal_of, KoopmanSpectrum, Method, PrincipalSettings};

/// Optimal matching between two equal-size sets and its mean cost.
pub fn optimal_matching(a: &[Complex64], b: &[Complex64]) -> Result<(f64, Vec<(usize, usize)>)> {
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::invalid("wasserstein distance of empty sets"));
    }
    let n = a.len();
    let cost: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| (x - y).norm())).collect();
    let assign = min_cost_assignment(&cost, n, n);
    let sum: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok((sum / n as f64, assign.into_iter().enumerate().collect()))
}

/// First Wasserstein distance between two uniform point sets of equal size.
pub fn wasserstein_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    optimal_matching(a, b).map(|(w, _)| w)
}

/// `max_{x in a} min_{y in b} |x - y|`.
pub fn directed_hausdorff(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("directed hausdorff distance needs non-empty sets"));
    }
    Ok(a.iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Conjugate,
    SemiConjugateAintoB,
    SemiConjugateBintoA,
    Distinct,
}

impl Verdict {
    /// Stable process exit status for scripted use.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Conjugate => 0,
            Verdict::SemiConjugateAintoB | Verdict::SemiConjugateBintoA => 10,
            Verdict::Distinct => 20,
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            Verdict::SemiConjugateAintoB => Verdict::SemiConjugateBintoA,
            Verdict::SemiConjugateBintoA => Verdict::SemiConjugateAintoB,
            v => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonSettings {
    pub eps_conj: f64,
    pub eps_semi: f64,
    pub ignore_unit_constant: bool,
}

impl Default for ComparisonSettings {
    fn default() -> Self {
        ComparisonSettings {
            eps_conj: 1e-3,
            eps_semi: 1e-3,
            ignore_unit_constant: true,
        }
    }
}

impl ComparisonSettings {
    /// Defaults for a pair of spectra: loosened when either side is EDMD.
    pub fn for_pair(a: &KoopmanSpectrum, b: &KoopmanSpectrum) -> Self {
        if a.method == Method::Edmd || b.method == Method::Edmd {
            ComparisonSettings {
                eps_conj: 5e-2,
                eps_semi: 5e-2,
                ..ComparisonSettings::default()
            }
        } else {
            ComparisonSettings::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub wasserstein: Option<f64>,
    pub directed_hausdorff_ab: Option<f64>,
    pub directed_hausdorff_ba: Option<f64>,
    pub matching: Vec<(usize, usize)>,
    pub verdict: Verdict,
    pub tolerances_used: ComparisonSettings,
    #[serde(with = "crate::io::complex_list")]
    pub principal_a: Vec<Complex64>,
    #[serde(with = "crate::io::complex_list")]
    pub principal_b: Vec<Complex64>,
    pub diagnostics: Vec<String>,
}

/// Principal set of a spectrum under its default lattice settings,
/// optionally without the constant-mode eigenvalue 1.
pub fn principal_set(spec: &KoopmanSpectrum, ignore_unit_constant: bool) -> Vec<Complex64> {
    let settings = PrincipalSettings::for_spectrum(spec);
    let mut values = spec.eigenvalues();
    if ignore_unit_constant {
        values.retain(|l| (l - Complex64::new(1.0, 0.0)).norm() > settings.lattice_tol);
    }
    principal_of(&values, settings)
}

pub fn classify(a: &KoopmanSpectrum, b: &KoopmanSpectrum, settings: ComparisonSettings) -> SpectrumComparison {
    let pa = principal_set(a, settings.ignore_unit_constant);
    let pb = principal_set(b, settings.ignore_unit_constant);
    classify_sets(pa, pb, settings, &[a, b])
}

/// Verdict on two principal sets directly.
pub fn classify_principal(pa: Vec<Complex64>, pb: Vec<Complex64>, settings: ComparisonSettings) -> SpectrumComparison {
    classify_sets(pa, pb, settings, &[])
}

fn classify_sets(
    pa: Vec<Complex64>,
    pb: Vec<Complex64>,
    settings: ComparisonSettings,
    specs: &[&KoopmanSpectrum],
) -> SpectrumComparison {
    let mut diagnostics = Vec::new();
    for (name, s) in ["A", "B"].iter().zip(specs) {
        if !s.reconstruction_error.is_finite() {
            diagnostics.push(format!("spectrum {name} has non-finite reconstruction error"));
        }
    }
    let mut out = SpectrumComparison {
        wasserstein: None,
        directed_hausdorff_ab: None,
        directed_hausdorff_ba: None,
        matching: Vec::new(),
        verdict: Verdict::Distinct,
        tolerances_used: settings,
        principal_a: pa,
        principal_b: pb,
        diagnostics,
    };
    let (pa, pb) = (&out.principal_a, &out.principal_b);
    if pa.is_empty() || pb.is_empty() {
        out.diagnostics.push(format!(
            "empty principal set (A: {}, B: {})",
            pa.len(),
            pb.len()
        ));
        return out;
    }
    out.directed_hausdorff_ab = directed_hausdorff(pa, pb).ok();
    out.directed_hausdorff_ba = directed_hausdorff(pb, pa).ok();
    if pa.len() == pb.len() {
        let (w, matching) = optimal_matching(pa, pb).expect("equal non-empty sets");
        out.wasserstein = Some(w);
        out.matching = matching;
        if w <= settings.eps_conj {
            out.verdict = Verdict::Conjugate;
        }
    } else if pa.len() < pb.len() {
        if out.directed_hausdorff_ab.is_some_and(|d| d <= settings.eps_semi) {
            out.verdict = Verdict::SemiConjugateAintoB;
        }
    } else if out.directed_hausdorff_ba.is_some_and(|d| d <= settings.eps_semi) {
        out.verdict = Verdict::SemiConjugateBintoA;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein_distance(&r(&[0.3, 0.7]), &r(&[0.3, 0.7])).unwrap(), 0.0);
        assert!((wasserstein_distance(&r(&[0.6]), &r(&[0.5])).unwrap() - 0.1).abs() < 1e-15);
        assert!((wasserstein_distance(&r(&[0.0, 1.0]), &r(&[0.1, 0.9])).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(
            wasserstein_distance(&r(&[0.0]), &r(&[0.1, 0.9])),
            Err(Error::CardinalityMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(directed_hausdorff(&r(&[0.6]), &r(&[2.0, 0.6])).unwrap(), 0.0);
        assert!((directed_hausdorff(&r(&[0.7]), &r(&[0.6, 2.0])).unwrap() - 0.1).abs() < 1e-15);
        assert!(directed_hausdorff(&[], &r(&[1.0])).is_err());
    }

    #[test]
    fn distinct_singletons() {
        let s = ComparisonSettings {
            eps_conj: 1e-6,
            eps_semi: 1e-6,
            ignore_unit_constant: true,
        };
        let c = classify_principal(r(&[0.5]), r(&[0.9]), s);
        assert_eq!(c.verdict, Verdict::Distinct);
        let c = classify_principal(r(&[0.6]), r(&[2.0, 0.6]), s);
        assert_eq!(c.verdict, Verdict::SemiConjugateAintoB);
        let c = classify_principal(r(&[2.0, 0.6]), r(&[0.6]), s);
        assert_eq!(c.verdict, Verdict::SemiConjugateBintoA);
        let c = classify_principal(vec![], r(&[0.6]), s);
        assert_eq!(c.verdict, Verdict::Distinct);
        assert!(!c.diagnostics.is_empty());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Verdict::Conjugate.exit_code(), 0);
        assert_eq!(Verdict::SemiConjugateBintoA.exit_code(), 10);
        assert_eq!(Verdict::Distinct.exit_code(), 20);
    }
}
