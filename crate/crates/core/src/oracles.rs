//! Closed-form gradient and proximal oracles.
//!
//! The benchmark algorithms only ever touch their objective through these
//! calls, so every oracle is a pure function of its argument.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// Gradient of f(x) = x², i.e. 2x.
    GradQuadratic,
    /// Gradient of f(x) = -cos x, i.e. sin x.
    GradNegCos,
    /// Proximal map of the Euclidean norm (block soft threshold).
    ProxL2,
    /// Proximal map of -log det on symmetric positive-definite matrices.
    ProxNegLogDet,
}

impl OracleKind {
    pub fn is_gradient(self) -> bool {
        matches!(self, OracleKind::GradQuadratic | OracleKind::GradNegCos)
    }

    pub fn is_proximal(self) -> bool {
        !self.is_gradient()
    }

    pub fn name(self) -> &'static str {
        match self {
            OracleKind::GradQuadratic => "quad",
            OracleKind::GradNegCos => "negcos",
            OracleKind::ProxL2 => "l2",
            OracleKind::ProxNegLogDet => "logdet",
        }
    }
}

impl std::str::FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quad" | "grad-quadratic" => Ok(OracleKind::GradQuadratic),
            "negcos" | "grad-negcos" => Ok(OracleKind::GradNegCos),
            "l2" | "prox-l2" => Ok(OracleKind::ProxL2),
            "logdet" | "prox-neglogdet" => Ok(OracleKind::ProxNegLogDet),
            other => Err(Error::config(format!("unknown oracle `{other}`"))),
        }
    }
}

/// A gradient or proximal oracle together with its step and domain size.
///
/// `domain_dim` is the vector length for the vector-valued kinds and the
/// side length `n` of the `n × n` argument for [`OracleKind::ProxNegLogDet`],
/// whose states are the packed upper triangle (length `n(n+1)/2`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oracle {
    pub kind: OracleKind,
    pub gamma: f64,
    pub domain_dim: usize,
}

impl Oracle {
    pub fn new(kind: OracleKind, gamma: f64, domain_dim: usize) -> Result<Self> {
        if domain_dim == 0 {
            return Err(Error::config("oracle domain dimension must be positive"));
        }
        if kind.is_proximal() && !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::config(format!(
                "proximal step must be positive, got {gamma}"
            )));
        }
        Ok(Oracle {
            kind,
            gamma,
            domain_dim,
        })
    }

    pub fn grad_quadratic() -> Self {
        Oracle {
            kind: OracleKind::GradQuadratic,
            gamma: 1.0,
            domain_dim: 1,
        }
    }

    pub fn grad_negcos() -> Self {
        Oracle {
            kind: OracleKind::GradNegCos,
            gamma: 1.0,
            domain_dim: 1,
        }
    }

    pub fn prox_l2(gamma: f64, dim: usize) -> Result<Self> {
        Oracle::new(OracleKind::ProxL2, gamma, dim)
    }

    pub fn prox_neglogdet(gamma: f64, side: usize) -> Result<Self> {
        Oracle::new(OracleKind::ProxNegLogDet, gamma, side)
    }

    /// Length of the flat state vector this oracle consumes and returns.
    pub fn state_len(&self) -> usize {
        match self.kind {
            OracleKind::ProxNegLogDet => self.domain_dim * (self.domain_dim + 1) / 2,
            _ => self.domain_dim,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.state_len() {
            return Err(Error::invalid(format!(
                "{} oracle expects length {}, got {}",
                self.kind.name(),
                self.state_len(),
                x.len()
            )));
        }
        match self.kind {
            OracleKind::GradQuadratic => grad_quadratic(x),
            OracleKind::GradNegCos => grad_negcos(x),
            OracleKind::ProxL2 => prox_l2(x, self.gamma),
            OracleKind::ProxNegLogDet => {
                let n = self.domain_dim;
                let full = unpack_upper(x, n);
                let out = prox_neglogdet(&full, n, self.gamma)?;
                Ok(pack_upper(&out, n))
            }
        }
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("non-finite oracle argument"))
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn grad_quadratic(x: &[f64]) -> Result<Vec<f64>> {
    check_finite(x)?;
    Ok(x.iter().map(|v| 2.0 * v).collect())
}

pub fn grad_negcos(x: &[f64]) -> Result<Vec<f64>> {
    check_finite(x)?;
    Ok(x.iter().map(|v| v.sin()).collect())
}

/// `argmin_u ‖u‖₂ + ‖u − v‖² / (2γ)`, i.e. `max(0, 1 − γ/‖v‖) · v`.
pub fn prox_l2(v: &[f64], gamma: f64) -> Result<Vec<f64>> {
    check_finite(v)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("proximal step must be positive, got {gamma}")));
    }
    let n = norm2(v);
    if n <= gamma {
        return Ok(vec![0.0; v.len()]);
    }
    let scale = 1.0 - gamma / n;
    Ok(v.iter().map(|x| scale * x).collect())
}

/// Proximal map of `X ↦ −log det X` for a symmetric positive-definite
/// `n × n` matrix given row-major. Each eigenvalue λ is sent to
/// `(λ + √(λ² + 4γ)) / 2` while the eigenvectors are kept.
pub fn prox_neglogdet(v: &[f64], n: usize, gamma: f64) -> Result<Vec<f64>> {
    check_finite(v)?;
    if v.len() != n * n {
        return Err(Error::invalid(format!(
            "expected a {n}x{n} matrix, got {} entries",
            v.len()
        )));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("proximal step must be positive, got {gamma}")));
    }
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (v[i * n + j] - v[j * n + i]).abs() > 1e-12 * scale {
                return Err(Error::invalid("matrix is not symmetric"));
            }
        }
    }
    let a = Mat::from_fn(n, n, |i, j| v[i * n + j]);
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::invalid(format!("eigendecomposition failed: {e:?}")))?;
    let q = evd.U();
    let s = evd.S().column_vector();
    let mut mapped = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = s[k];
        if lambda <= 0.0 {
            return Err(Error::invalid(format!(
                "matrix is not positive definite (eigenvalue {lambda})"
            )));
        }
        mapped.push((lambda + (lambda * lambda + 4.0 * gamma).sqrt()) / 2.0);
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = 0.0;
            for (k, m) in mapped.iter().enumerate() {
                acc += q[(i, k)] * m * q[(j, k)];
            }
            out[i * n + j] = acc;
            out[j * n + i] = acc;
        }
    }
    Ok(out)
}

/// Packs the upper triangle of a row-major `n × n` matrix row by row.
pub fn pack_upper(full: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(full[i * n + j]);
        }
    }
    out
}

pub fn unpack_upper(packed: &[f64], n: usize) -> Vec<f64> {
    let mut full = vec![0.0; n * n];
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            full[i * n + j] = packed[idx];
            full[j * n + i] = packed[idx];
            idx += 1;
        }
    }
    full
}

#[cfg(test)]
mod tests {
    use super::*;

    // Brute-force minimiser of ‖u‖ + ‖u − v‖²/(2γ) over a square grid.
    fn grid_prox_l2(v: [f64; 2], gamma: f64, half_width: f64, steps: usize) -> [f64; 2] {
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..=steps {
            for j in 0..=steps {
                let u = [
                    v[0] - half_width + 2.0 * half_width * i as f64 / steps as f64,
                    v[1] - half_width + 2.0 * half_width * j as f64 / steps as f64,
                ];
                let obj = norm2(&u)
                    + ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2)) / (2.0 * gamma);
                if obj < best.0 {
                    best = (obj, u);
                }
            }
        }
        best.1
    }

    // Scan of −log x + (x − v)²/(2γ) on (0, hi].
    fn scan_prox_neglogdet(v: f64, gamma: f64, hi: f64, steps: usize) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..=steps {
            let x = hi * i as f64 / steps as f64;
            let obj = -x.ln() + (x - v).powi(2) / (2.0 * gamma);
            if obj < best.0 {
                best = (obj, x);
            }
        }
        best.1
    }

    #[test]
    fn gradients_match_closed_forms() {
        assert_eq!(grad_quadratic(&[0.0]).unwrap(), vec![0.0]);
        assert_eq!(grad_quadratic(&[3.0]).unwrap(), vec![6.0]);
        assert_eq!(grad_quadratic(&[-1.5, 0.5]).unwrap(), vec![-3.0, 1.0]);
        assert_eq!(grad_negcos(&[0.0]).unwrap(), vec![0.0]);
        assert_eq!(grad_negcos(&[std::f64::consts::FRAC_PI_2]).unwrap(), vec![1.0]);
        assert!(grad_negcos(&[std::f64::consts::PI]).unwrap()[0].abs() < 1e-15);
    }

    #[test]
    fn non_finite_arguments_are_rejected() {
        assert!(matches!(grad_quadratic(&[f64::NAN]), Err(Error::InvalidInput(_))));
        assert!(matches!(grad_negcos(&[f64::INFINITY]), Err(Error::InvalidInput(_))));
        assert!(prox_l2(&[f64::NAN, 1.0], 1.0).is_err());
    }

    #[test]
    fn prox_l2_examples_agree_with_grid_search() {
        let p = prox_l2(&[3.0, 4.0], 1.0).unwrap();
        assert!((p[0] - 2.4).abs() < 1e-15 && (p[1] - 3.2).abs() < 1e-15);
        let g = grid_prox_l2([3.0, 4.0], 1.0, 1.5, 600);
        assert!((g[0] - 2.4).abs() < 6e-3 && (g[1] - 3.2).abs() < 6e-3);

        assert_eq!(prox_l2(&[0.0, 0.0], 1.0).unwrap(), vec![0.0, 0.0]);

        assert_eq!(prox_l2(&[1.0, 0.0], 2.0).unwrap(), vec![0.0, 0.0]);
        let g = grid_prox_l2([1.0, 0.0], 2.0, 1.5, 600);
        assert!(g[0].abs() < 6e-3 && g[1].abs() < 6e-3);
    }

    #[test]
    fn prox_neglogdet_scalar_examples_agree_with_scan() {
        let p = prox_neglogdet(&[2.0], 1, 1.0).unwrap()[0];
        assert!((p - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!((p - scan_prox_neglogdet(2.0, 1.0, 5.0, 500_000)).abs() < 2e-5);

        let p = prox_neglogdet(&[1.0], 1, 2.0).unwrap()[0];
        assert!((p - 2.0).abs() < 1e-14);
        assert!((p - scan_prox_neglogdet(1.0, 2.0, 5.0, 500_000)).abs() < 2e-5);
    }

    #[test]
    fn prox_neglogdet_tends_to_identity_for_small_step() {
        let v = [2.0, 0.3, 0.3, 1.5];
        let p = prox_neglogdet(&v, 2, 1e-12).unwrap();
        for (a, b) in p.iter().zip(v.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn prox_neglogdet_rejects_bad_matrices() {
        assert!(matches!(
            prox_neglogdet(&[1.0, 0.5, 0.0, 1.0], 2, 1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            prox_neglogdet(&[1.0, 0.0, 0.0, -1.0], 2, 1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn oracle_config_validation() {
        assert!(Oracle::prox_l2(0.0, 1).is_err());
        assert!(Oracle::prox_l2(-1.0, 1).is_err());
        assert!(Oracle::new(OracleKind::GradQuadratic, 0.0, 1).is_ok());
        let o = Oracle::prox_neglogdet(1.0, 2).unwrap();
        assert_eq!(o.state_len(), 3);
        assert!(o.apply(&[1.0, 0.0]).is_err());
        let out = o.apply(&[2.0, 0.0, 3.0]).unwrap();
        assert!((out[0] - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!(out[1].abs() < 1e-15);
    }

    #[test]
    fn pack_roundtrip() {
        let full = vec![1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0];
        let packed = pack_upper(&full, 3);
        assert_eq!(packed, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(unpack_upper(&packed, 3), full);
    }
}
