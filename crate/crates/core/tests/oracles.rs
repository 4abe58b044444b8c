use faer::{Mat, Side};
use koopman_equiv::oracles::{grad_negcos, grad_quadratic, pack_upper, prox_l2, prox_neglogdet, unpack_upper, Oracle};
use proptest::prelude::*;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, dim)
}

/// Symmetric positive-definite `A Aᵀ + 0.1 I`, row-major.
fn spd(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n * n).prop_map(move |a| {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum();
                out[i * n + j] = dot + if i == j { 0.1 } else { 0.0 };
            }
        }
        for i in 0..n {
            for j in 0..i {
                out[i * n + j] = out[j * n + i];
            }
        }
        out
    })
}

fn min_eigenvalue(m: &[f64], n: usize) -> f64 {
    let mat = Mat::from_fn(n, n, |i, j| m[i * n + j]);
    let evd = mat.self_adjoint_eigen(Side::Lower).unwrap();
    let s = evd.S().column_vector();
    (0..n).map(|k| s[k]).fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn prox_l2_is_nonexpansive(u in vector(3), v in vector(3), gamma in 0.05..3.0f64) {
        let pu = prox_l2(&u, gamma).unwrap();
        let pv = prox_l2(&v, gamma).unwrap();
        prop_assert!(norm(&diff(&pu, &pv)) <= norm(&diff(&u, &v)) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn prox_l2_satisfies_subgradient_condition(v in vector(4), gamma in 0.05..3.0f64) {
        let p = prox_l2(&v, gamma).unwrap();
        let np = norm(&p);
        if np == 0.0 {
            prop_assert!(norm(&v) <= gamma);
        } else {
            // (v − p)/γ must equal p/‖p‖
            for (vi, pi) in v.iter().zip(&p) {
                prop_assert!(((vi - pi) / gamma - pi / np).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn prox_logdet_eigenvalues_exceed_sqrt_gamma(x in spd(3), gamma in 0.05..3.0f64) {
        let y = prox_neglogdet(&x, 3, gamma).unwrap();
        prop_assert!(min_eigenvalue(&y, 3) > gamma.sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn prox_logdet_satisfies_optimality(x in spd(3), gamma in 0.05..3.0f64) {
        // Y − γ Y⁻¹ = X, equivalently Y² − X Y = γ I
        let y = prox_neglogdet(&x, 3, gamma).unwrap();
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())).powi(2);
        for i in 0..3 {
            for j in 0..3 {
                let yy: f64 = (0..3).map(|k| y[i * 3 + k] * y[k * 3 + j]).sum();
                let xy: f64 = (0..3).map(|k| x[i * 3 + k] * y[k * 3 + j]).sum();
                let want = if i == j { gamma } else { 0.0 };
                prop_assert!((yy - xy - want).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn prox_logdet_output_is_symmetric(x in spd(2), gamma in 0.05..3.0f64) {
        let y = prox_neglogdet(&x, 2, gamma).unwrap();
        prop_assert_eq!(y[1], y[2]);
    }

    #[test]
    fn packing_round_trips(x in spd(3)) {
        prop_assert_eq!(unpack_upper(&pack_upper(&x, 3), 3), x);
    }

    #[test]
    fn gradients_match_closed_form(x in -10.0..10.0f64) {
        prop_assert_eq!(grad_quadratic(&[x]).unwrap(), vec![2.0 * x]);
        prop_assert_eq!(grad_negcos(&[x]).unwrap(), vec![x.sin()]);
    }
}

#[test]
fn prox_l2_known_values() {
    let p = prox_l2(&[3.0, 4.0], 1.0).unwrap();
    assert!((p[0] - 2.4).abs() < 1e-15 && (p[1] - 3.2).abs() < 1e-15);
    assert_eq!(prox_l2(&[0.3, 0.4], 1.0).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn prox_logdet_scalar_case() {
    // λ = 1, γ = 2: (1 + √9)/2 = 2
    assert_eq!(prox_neglogdet(&[1.0], 1, 2.0).unwrap(), vec![2.0]);
}

#[test]
fn prox_logdet_rejects_bad_input() {
    assert!(prox_neglogdet(&[1.0, 2.0, 0.0, 1.0], 2, 1.0).is_err());
    assert!(prox_neglogdet(&[-1.0, 0.0, 0.0, 1.0], 2, 1.0).is_err());
    assert!(prox_neglogdet(&[1.0, 0.0, 0.0], 2, 1.0).is_err());
    assert!(prox_neglogdet(&[1.0], 1, 0.0).is_err());
}

#[test]
fn oracles_reject_nonfinite_input() {
    assert!(grad_quadratic(&[f64::NAN]).is_err());
    assert!(prox_l2(&[f64::INFINITY, 0.0], 1.0).is_err());
    assert!(Oracle::grad_negcos().apply(&[f64::NAN]).is_err());
}
