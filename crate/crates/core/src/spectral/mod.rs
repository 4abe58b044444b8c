//! Finite Koopman mode decompositions (DMD and extended DMD) and principal
//! eigenvalue extraction.

mod dictionary;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use dictionary::{monomial_exponents, Dictionary, Observable};

use crate::error::{Error, Result};
use crate::trajectory::{snapshots, Centering, SnapshotPair, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dmd,
    Edmd,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dmd => "dmd",
            Method::Edmd => "edmd",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dmd" => Ok(Method::Dmd),
            "edmd" => Ok(Method::Edmd),
            other => Err(Error::config(format!("unknown method `{other}`"))),
        }
    }
}

/// How many singular directions of the snapshot matrix to keep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankPolicy {
    Fixed(usize),
    /// Keep singular values above `tau * sigma_max`.
    Relative(f64),
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy::Relative(1e-10)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KoopmanTriplet {
    pub lambda: Complex64,
    /// Koopman mode in state coordinates.
    pub mode: Vec<Complex64>,
    /// Eigenfunction as coefficients over the dictionary basis.
    pub eigfn_coeffs: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KoopmanSpectrum {
    pub triplets: Vec<KoopmanTriplet>,
    pub method: Method,
    pub rank: usize,
    pub dictionary: Dictionary,
    /// Describes the state observable, including any centering.
    pub observable_tag: String,
    pub reconstruction_error: f64,
}

impl KoopmanSpectrum {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.triplets.iter().map(|t| t.lambda).collect()
    }

    pub fn dictionary_tag(&self) -> String {
        self.dictionary.to_string()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    /// Dimension of the space the eigenfunctions live in.
    pub fn lifted_dim(&self) -> usize {
        self.triplets.first().map_or(0, |t| t.eigfn_coeffs.len())
    }

    pub fn state_dim(&self) -> usize {
        self.triplets.first().map_or(0, |t| t.mode.len())
    }
}

/// Canonical order: descending modulus, then descending real part, then
/// descending imaginary part.
pub fn canonical_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

pub fn sort_canonical(values: &mut [Complex64]) {
    values.sort_by(canonical_cmp);
}

fn frobenius(m: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)] * m[(i, j)];
        }
    }
    s.sqrt()
}

fn rows_constant(m: &Mat<f64>) -> bool {
    (0..m.nrows()).all(|i| {
        let first = m[(i, 0)];
        (1..m.ncols()).all(|j| m[(i, j)] == first)
    })
}

fn select_rank(sigma: &[f64], policy: RankPolicy) -> Result<usize> {
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let r = match policy {
        RankPolicy::Fixed(r) => {
            if r == 0 {
                return Err(Error::config("fixed rank must be positive"));
            }
            let above = sigma.iter().filter(|s| **s > 0.0).count();
            r.min(above)
        }
        RankPolicy::Relative(tau) => {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::config(format!("relative threshold must be in (0, 1), got {tau}")));
            }
            sigma.iter().filter(|s| **s > tau * smax).count()
        }
    };
    if r == 0 || !(smax > 0.0) {
        return Err(Error::DegenerateData(
            "no singular value of the snapshot matrix above threshold".into(),
        ));
    }
    Ok(r)
}

/// Pairs each eigenvalue with positive imaginary part to its closest
/// counterpart below the axis and makes the pair exactly conjugate.
fn enforce_conjugate_pairs(triplets: &mut [KoopmanTriplet]) {
    let scale = triplets.iter().map(|t| t.lambda.norm()).fold(1.0, f64::max);
    let real_tol = 1e-13 * scale;
    for t in triplets.iter_mut() {
        if t.lambda.im.abs() <= real_tol {
            t.lambda.im = 0.0;
        }
    }
    let n = triplets.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || triplets[i].lambda.im <= 0.0 {
            continue;
        }
        let target = triplets[i].lambda.conj();
        let partner = (0..n)
            .filter(|&j| !used[j] && j != i && triplets[j].lambda.im < 0.0)
            .min_by(|&a, &b| {
                (triplets[a].lambda - target)
                    .norm()
                    .total_cmp(&(triplets[b].lambda - target).norm())
            });
        if let Some(j) = partner {
            used[i] = true;
            used[j] = true;
            let conj = KoopmanTriplet {
                lambda: target,
                mode: triplets[i].mode.iter().map(|z| z.conj()).collect(),
                eigfn_coeffs: triplets[i].eigfn_coeffs.iter().map(|z| z.conj()).collect(),
            };
            triplets[j] = conj;
        }
    }
}

/// Shared core: `psi_x`, `psi_y` are lifted snapshots, `x_state`, `y_state`
/// the state snapshots used for modes and the reconstruction error.
fn decompose_lifted(
    psi_x: &Mat<f64>,
    psi_y: &Mat<f64>,
    x_state: &Mat<f64>,
    y_state: &Mat<f64>,
    rank: RankPolicy,
) -> Result<(Vec<KoopmanTriplet>, usize, f64)> {
    let n = psi_x.nrows();
    let m = psi_x.ncols();
    let d = x_state.nrows();
    if m == 0 || n == 0 {
        return Err(Error::InsufficientData("empty snapshot matrix".into()));
    }
    let svd = psi_x
        .thin_svd()
        .map_err(|e| Error::DegenerateData(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let sigma: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
    let r = select_rank(&sigma, rank)?;

    // B = V_r Σ_r⁻¹ (m × r)
    let b = Mat::from_fn(m, r, |i, j| v[(i, j)] / sigma[j]);
    // Ψ_Y B (n × r), then Ã = U_rᵀ Ψ_Y B
    let yb = mat_mul(psi_y, &b);
    let a_red: Mat<f64> = Mat::from_fn(r, r, |i, j| (0..n).map(|k| u[(k, i)] * yb[(k, j)]).sum());
    let evd = a_red
        .eigen()
        .map_err(|e| Error::DegenerateData(format!("eigendecomposition failed: {e:?}")))?;
    let w = evd.U();
    let lam = evd.S().column_vector();

    let w_own = Mat::from_fn(r, r, |i, j| w[(i, j)]);
    let w_inv = w_own.partial_piv_lu().inverse();
    if (0..r).any(|i| (0..r).any(|j| !w_inv[(i, j)].re.is_finite() || !w_inv[(i, j)].im.is_finite())) {
        return Err(Error::DegenerateData("defective reduced operator".into()));
    }
    // coefficients: rows of W⁻¹ U_rᵀ (r × n)
    let coeffs = Mat::from_fn(r, n, |i, k| {
        (0..r).map(|j| w_inv[(i, j)] * u[(k, j)]).sum::<Complex64>()
    });
    // modes: X_state B W (d × r)
    let xb = mat_mul(x_state, &b);
    let modes = Mat::from_fn(d, r, |i, j| {
        (0..r).map(|k| w_own[(k, j)] * xb[(i, k)]).sum::<Complex64>()
    });

    let mut triplets: Vec<KoopmanTriplet> = (0..r)
        .map(|j| KoopmanTriplet {
            lambda: lam[j],
            mode: (0..d).map(|i| modes[(i, j)]).collect(),
            eigfn_coeffs: (0..n).map(|k| coeffs[(j, k)]).collect(),
        })
        .collect();
    enforce_conjugate_pairs(&mut triplets);
    triplets.sort_by(|a, b| canonical_cmp(&a.lambda, &b.lambda));

    let err = one_step_error(&triplets, psi_x, x_state, y_state);
    Ok((triplets, r, err))
}

fn mat_mul(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), b.ncols(), |i, j| {
        (0..a.ncols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
    })
}

fn one_step_error(triplets: &[KoopmanTriplet], psi_x: &Mat<f64>, x_state: &Mat<f64>, y_state: &Mat<f64>) -> f64 {
    let d = x_state.nrows();
    let mut num = 0.0;
    for col in 0..psi_x.ncols() {
        let psi: Vec<f64> = (0..psi_x.nrows()).map(|k| psi_x[(k, col)]).collect();
        let pred = expand(triplets, &psi, 1);
        for i in 0..d {
            let e = pred[i].re - y_state[(i, col)];
            num += e * e + pred[i].im * pred[i].im;
        }
    }
    let den = frobenius(y_state);
    if den > 0.0 {
        num.sqrt() / den
    } else {
        num.sqrt()
    }
}

fn expand(triplets: &[KoopmanTriplet], psi: &[f64], k: u32) -> Vec<Complex64> {
    let d = triplets.first().map_or(0, |t| t.mode.len());
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for t in triplets {
        let phi: Complex64 = t.eigfn_coeffs.iter().zip(psi).map(|(c, p)| c * p).sum();
        let scale = t.lambda.powu(k) * phi;
        for (o, v) in out.iter_mut().zip(&t.mode) {
            *o += scale * v;
        }
    }
    out
}

/// Plain DMD on identity observables.
pub fn dmd(snap: &SnapshotPair, rank: RankPolicy) -> Result<KoopmanSpectrum> {
    if snap.n_pairs() == 0 {
        return Err(Error::InsufficientData("no snapshot pairs".into()));
    }
    let (triplets, r, err) = decompose_lifted(&snap.x, &snap.y, &snap.x, &snap.y, rank)?;
    Ok(KoopmanSpectrum {
        triplets,
        method: Method::Dmd,
        rank: r,
        dictionary: Dictionary::Identity,
        observable_tag: snap.observable_tag.clone(),
        reconstruction_error: err,
    })
}

/// Extended DMD: DMD on snapshots lifted through `dict`.
pub fn edmd(snap: &SnapshotPair, dict: &Dictionary, rank: RankPolicy) -> Result<KoopmanSpectrum> {
    if snap.n_pairs() == 0 {
        return Err(Error::InsufficientData("no snapshot pairs".into()));
    }
    let out_dim = dict.output_dim(snap.dim());
    if snap.n_pairs() < out_dim {
        log::warn!(
            "edmd: {} snapshot pairs for a {}-function dictionary; the fit is underdetermined",
            snap.n_pairs(),
            out_dim
        );
    }
    let psi_x = dict.lift_columns(&snap.x)?;
    let psi_y = dict.lift_columns(&snap.y)?;
    if rows_constant(&psi_x) {
        return Err(Error::DegenerateData(
            "every dictionary function is constant on the data".into(),
        ));
    }
    let (triplets, r, err) = decompose_lifted(&psi_x, &psi_y, &snap.x, &snap.y, rank)?;
    Ok(KoopmanSpectrum {
        triplets,
        method: Method::Edmd,
        rank: r,
        dictionary: dict.clone(),
        observable_tag: snap.observable_tag.clone(),
        reconstruction_error: err,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalSettings {
    pub lattice_tol: f64,
    pub max_power: usize,
}

impl Default for PrincipalSettings {
    fn default() -> Self {
        PrincipalSettings {
            lattice_tol: 1e-6,
            max_power: 4,
        }
    }
}

impl PrincipalSettings {
    /// Defaults for a spectrum of the given kind. Dictionary lattices carry
    /// larger errors and reach higher powers.
    pub fn for_spectrum(spec: &KoopmanSpectrum) -> Self {
        match spec.method {
            Method::Dmd => PrincipalSettings::default(),
            Method::Edmd => PrincipalSettings {
                lattice_tol: 5e-2,
                max_power: spec.dictionary.max_degree().unwrap_or(4).max(4),
            },
        }
    }
}

fn near_lattice(c: Complex64, retained: &[Complex64], tol: f64, max_power: usize) -> bool {
    fn rec(c: Complex64, retained: &[Complex64], start: usize, acc: Complex64, used: usize, tol: f64, max_power: usize) -> bool {
        if used >= 2 && (acc - c).norm() <= tol {
            return true;
        }
        if used == max_power {
            return false;
        }
        (start..retained.len()).any(|i| rec(c, retained, i, acc * retained[i], used + 1, tol, max_power))
    }
    rec(c, retained, 0, Complex64::new(1.0, 0.0), 0, tol, max_power)
}

/// Greedy principal set of a list of eigenvalues, in canonical order.
pub fn principal_of(values: &[Complex64], settings: PrincipalSettings) -> Vec<Complex64> {
    let mut sorted = values.to_vec();
    sort_canonical(&mut sorted);
    let mut retained: Vec<Complex64> = Vec::new();
    let mut last_kept: Option<(Complex64, bool)> = None;
    for c in sorted {
        let keep = match last_kept {
            Some((prev, decision)) if c.im < 0.0 && prev == c.conj() => decision,
            _ => !near_lattice(c, &retained, settings.lattice_tol, settings.max_power),
        };
        last_kept = Some((c, keep));
        if keep {
            retained.push(c);
        }
    }
    retained
}

pub fn principal_eigenvalues(spec: &KoopmanSpectrum, settings: PrincipalSettings) -> Vec<Complex64> {
    principal_of(&spec.eigenvalues(), settings)
}

/// `Σ_r λ_r^k φ_r(x0) v_r` over all triplets, with `x0_lifted` given in the
/// dictionary basis.
pub fn reconstruct(spec: &KoopmanSpectrum, x0_lifted: &[f64], k: u32) -> Result<Vec<Complex64>> {
    if x0_lifted.len() != spec.lifted_dim() {
        return Err(Error::invalid(format!(
            "lifted state has length {}, decomposition space has {}",
            x0_lifted.len(),
            spec.lifted_dim()
        )));
    }
    Ok(expand(&spec.triplets, x0_lifted, k))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenteringPolicy {
    /// Center converged identity-observable runs; never center lifted runs.
    #[default]
    Auto,
    None,
    FixedPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionSettings {
    pub method: Method,
    pub dictionary: Dictionary,
    pub rank: RankPolicy,
    pub centering: CenteringPolicy,
}

impl Default for DecompositionSettings {
    fn default() -> Self {
        DecompositionSettings::dmd()
    }
}

impl DecompositionSettings {
    pub fn dmd() -> Self {
        DecompositionSettings {
            method: Method::Dmd,
            dictionary: Dictionary::Identity,
            rank: RankPolicy::default(),
            centering: CenteringPolicy::Auto,
        }
    }

    pub fn edmd(dictionary: Dictionary) -> Self {
        DecompositionSettings {
            method: Method::Edmd,
            dictionary,
            rank: RankPolicy::default(),
            centering: CenteringPolicy::Auto,
        }
    }

    pub fn centering_for(&self, traj: &Trajectory) -> Centering {
        match self.centering {
            CenteringPolicy::None => Centering::None,
            CenteringPolicy::FixedPoint => Centering::FixedPoint,
            CenteringPolicy::Auto => match self.method {
                Method::Dmd => Centering::auto(traj.status),
                Method::Edmd => Centering::None,
            },
        }
    }

    pub fn decompose(&self, snap: &SnapshotPair) -> Result<KoopmanSpectrum> {
        match self.method {
            Method::Dmd => dmd(snap, self.rank),
            Method::Edmd => edmd(snap, &self.dictionary, self.rank),
        }
    }
}

pub fn decompose_trajectory(traj: &Trajectory, settings: &DecompositionSettings) -> Result<KoopmanSpectrum> {
    let snap = snapshots(traj, settings.centering_for(traj))?;
    settings.decompose(&snap)
}
