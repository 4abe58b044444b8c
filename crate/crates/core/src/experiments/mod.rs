//! End-to-end presets that regenerate the five reference figures: data
//! series, spectra, comparison records, plots, and a digest manifest.

pub mod plot;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::compare::{
    classify, sweep, ComparisonSettings, DistanceField, FieldStats, Grid, SpectrumComparison, SweepSettings, Verdict,
};
use crate::corpus::{conjugacy_map, make_algorithm, AlgorithmId, IterativeMap};
use crate::error::{Error, Result};
use crate::io::{comparison_to_json, sha256_hex, spectrum_to_json, trajectories_csv};
use crate::oracles::{Oracle, OracleKind};
use crate::par::Execution;
use crate::spectral::{decompose_trajectory, DecompositionSettings, Dictionary, KoopmanSpectrum};
use crate::trajectory::{iterate, RunConfig, Trajectory};
use plot::{distance_heatmap, spectrum_scatter, Marker, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::Fig1,
        PresetName::Fig2,
        PresetName::Fig3,
        PresetName::Fig4,
        PresetName::Fig5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Fig1 => "fig1",
            PresetName::Fig2 => "fig2",
            PresetName::Fig3 => "fig3",
            PresetName::Fig4 => "fig4",
            PresetName::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::config(format!("unknown preset `{s}` (expected fig1..fig5)")))
    }
}

#[derive(Clone, Debug)]
pub struct PresetOptions {
    /// Grid points per axis for the sweep preset.
    pub resolution: usize,
    /// Restricts presets with several gradient variants to one oracle.
    pub oracle: Option<OracleKind>,
    pub execution: Execution,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions {
            resolution: 41,
            oracle: None,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub role: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantOutcome {
    pub variant: String,
    pub verdict: Option<Verdict>,
    pub expected: Option<Verdict>,
    pub summary: Value,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub preset: PresetName,
    pub settings: Value,
    pub outcomes: Vec<VariantOutcome>,
    pub files: Vec<ManifestEntry>,
}

#[derive(Clone, Debug)]
pub struct PresetReport {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub comparisons: Vec<(String, SpectrumComparison)>,
    pub spectra: Vec<(String, KoopmanSpectrum)>,
    pub fields: Vec<(String, DistanceField)>,
}

impl PresetReport {
    /// Every outcome with an expectation met it.
    pub fn all_expected(&self) -> bool {
        self.manifest
            .outcomes
            .iter()
            .all(|o| o.expected.is_none() || o.expected == o.verdict)
    }
}

struct Outputs {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(Outputs {
            dir,
            entries: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, role: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            role: role.to_string(),
            bytes: contents.len(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    fn written(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.path.clone()).collect()
    }

    fn stage<T>(&self, stage: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| Error::Preset {
            stage: stage.to_string(),
            written: self.written(),
            cause: Box::new(e),
        })
    }
}

fn gradient_variants(opts: &PresetOptions) -> Result<Vec<(&'static str, Oracle)>> {
    let all = [("quad", Oracle::grad_quadratic()), ("negcos", Oracle::grad_negcos())];
    match opts.oracle {
        None => Ok(all.to_vec()),
        Some(k) if k.is_gradient() => Ok(all.into_iter().filter(|(_, o)| o.kind == k).collect()),
        Some(k) => Err(Error::config(format!("preset needs a gradient oracle, got {}", k.name()))),
    }
}

fn run_and_decompose(
    map: &IterativeMap,
    x0: &[f64],
    cfg: &RunConfig,
    settings: &DecompositionSettings,
) -> Result<(Trajectory, KoopmanSpectrum)> {
    let traj = iterate(map, x0, cfg)?;
    let spec = decompose_trajectory(&traj, settings)?;
    Ok((traj, spec))
}

fn extra_eigenvalues(cmp: &SpectrumComparison) -> Vec<Complex64> {
    let tol = cmp.tolerances_used.eps_semi;
    cmp.principal_b
        .iter()
        .filter(|b| cmp.principal_a.iter().all(|a| (*a - **b).norm() > tol))
        .copied()
        .collect()
}

fn pairs(v: &[Complex64]) -> Value {
    json!(v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

fn comparison_summary(cmp: &SpectrumComparison) -> Value {
    json!({
        "wasserstein": cmp.wasserstein,
        "directed_hausdorff_ab": cmp.directed_hausdorff_ab,
        "directed_hausdorff_ba": cmp.directed_hausdorff_ba,
        "principal_a": pairs(&cmp.principal_a),
        "principal_b": pairs(&cmp.principal_b),
    })
}

fn scatter(title: &str, a: (&str, &KoopmanSpectrum), b: (&str, &KoopmanSpectrum)) -> String {
    let ea = a.1.eigenvalues();
    let eb = b.1.eigenvalues();
    spectrum_scatter(
        title,
        &[
            Series { label: a.0, points: &ea, marker: Marker::Circle },
            Series { label: b.0, points: &eb, marker: Marker::Cross },
        ],
    )
}

/// Shared body of the two-algorithm presets.
struct PairRun<'a> {
    prefix: String,
    title: String,
    a: (&'a str, &'a IterativeMap, Vec<f64>, DecompositionSettings),
    b: (&'a str, &'a IterativeMap, Vec<f64>, DecompositionSettings),
    cfg: RunConfig,
    expected: Verdict,
}

fn name_file(prefix: &str, rest: &str) -> String {
    if prefix.is_empty() {
        rest.to_string()
    } else {
        format!("{prefix}_{rest}")
    }
}

fn run_pair(out: &mut Outputs, run: PairRun<'_>, report: &mut PresetReport) -> Result<VariantOutcome> {
    let (na, ma, x0a, da) = &run.a;
    let (nb, mb, x0b, db) = &run.b;
    let (ta, sa) = out.stage(&format!("{} {na}", run.title), run_and_decompose(ma, x0a, &run.cfg, da))?;
    let (tb, sb) = out.stage(&format!("{} {nb}", run.title), run_and_decompose(mb, x0b, &run.cfg, db))?;
    out.write(
        &name_file(&run.prefix, "trajectories.csv"),
        "trajectory",
        &trajectories_csv(&[(na, &ta), (nb, &tb)]),
    )?;
    out.write(&name_file(&run.prefix, &format!("{na}_spectrum.json")), "spectrum", &spectrum_to_json(&sa)?)?;
    out.write(&name_file(&run.prefix, &format!("{nb}_spectrum.json")), "spectrum", &spectrum_to_json(&sb)?)?;
    let cmp = classify(&sa, &sb, ComparisonSettings::for_pair(&sa, &sb));
    out.write(&name_file(&run.prefix, "comparison.json"), "comparison", &comparison_to_json(&cmp)?)?;
    out.write(
        &name_file(&run.prefix, "spectra.svg"),
        "plot",
        &scatter(&run.title, (na, &sa), (nb, &sb)),
    )?;
    let mut notes = vec![
        format!("{na}: {:?} after {} states, observable {}", ta.status, ta.len(), sa.observable_tag),
        format!("{nb}: {:?} after {} states, observable {}", tb.status, tb.len(), sb.observable_tag),
    ];
    let extra = extra_eigenvalues(&cmp);
    if !extra.is_empty() {
        notes.push(format!("principal eigenvalues only in {nb}: {extra:?}"));
    }
    let mut summary = comparison_summary(&cmp);
    summary["only_in_b"] = pairs(&extra);
    let variant = if run.prefix.is_empty() { "default".to_string() } else { run.prefix.clone() };
    report.spectra.push((format!("{variant}/{na}"), sa));
    report.spectra.push((format!("{variant}/{nb}"), sb));
    let outcome = VariantOutcome {
        variant: variant.clone(),
        verdict: Some(cmp.verdict),
        expected: Some(run.expected),
        summary,
        notes,
    };
    report.comparisons.push((variant, cmp));
    Ok(outcome)
}

fn empty_report(name: PresetName, dir: &Path) -> PresetReport {
    PresetReport {
        manifest: Manifest {
            preset: name,
            settings: Value::Null,
            outcomes: Vec::new(),
            files: Vec::new(),
        },
        manifest_path: dir.join("manifest.json"),
        comparisons: Vec::new(),
        spectra: Vec::new(),
        fields: Vec::new(),
    }
}

fn fig1(out: &mut Outputs, opts: &PresetOptions, report: &mut PresetReport) -> Result<Value> {
    let x0 = vec![0.1, 0.1];
    let xi0 = conjugacy_map(AlgorithmId::Algo1, AlgorithmId::Algo2)?.apply(&x0)?;
    let cfg = RunConfig::with_max_iters(60);
    for (variant, f) in gradient_variants(opts)? {
        let a1 = make_algorithm(AlgorithmId::Algo1, f, None)?;
        let a2 = make_algorithm(AlgorithmId::Algo2, f, None)?;
        let outcome = run_pair(
            out,
            PairRun {
                prefix: variant.to_string(),
                title: format!("algo1 vs algo2, f = {variant}"),
                a: ("algo1", &a1, x0.clone(), DecompositionSettings::dmd()),
                b: ("algo2", &a2, xi0.clone(), DecompositionSettings::dmd()),
                cfg,
                expected: Verdict::Conjugate,
            },
            report,
        )?;
        report.manifest.outcomes.push(outcome);
    }
    Ok(json!({
        "algorithms": ["algo1", "algo2"],
        "x0_algo1": x0,
        "x0_algo2": xi0,
        "run": cfg,
        "method": "dmd",
    }))
}

fn fig3(out: &mut Outputs, report: &mut PresetReport) -> Result<Value> {
    let x0 = vec![1.0, 1.0];
    let xi0 = conjugacy_map(AlgorithmId::Algo3, AlgorithmId::Algo4)?.apply(&x0)?;
    let cfg = RunConfig::with_max_iters(25);
    let f = Oracle::grad_quadratic();
    let a3 = make_algorithm(AlgorithmId::Algo3, f, None)?;
    let a4 = make_algorithm(AlgorithmId::Algo4, f, None)?;
    let outcome = run_pair(
        out,
        PairRun {
            prefix: String::new(),
            title: "algo4 vs algo3, f = quad".into(),
            a: ("algo4", &a4, xi0.clone(), DecompositionSettings::dmd()),
            b: ("algo3", &a3, x0.clone(), DecompositionSettings::dmd()),
            cfg,
            expected: Verdict::SemiConjugateAintoB,
        },
        report,
    )?;
    report.manifest.outcomes.push(outcome);
    Ok(json!({
        "algorithms": ["algo4", "algo3"],
        "x0_algo3": x0,
        "x0_algo4": xi0,
        "run": cfg,
        "method": "dmd",
    }))
}

fn fig4(out: &mut Outputs, report: &mut PresetReport) -> Result<Value> {
    let x0 = vec![1.2];
    let xi0 = conjugacy_map(AlgorithmId::Algo5, AlgorithmId::Algo4)?.apply(&x0)?;
    let cfg = RunConfig::with_max_iters(60);
    let f = Oracle::grad_quadratic();
    let a4 = make_algorithm(AlgorithmId::Algo4, f, None)?;
    let a5 = make_algorithm(AlgorithmId::Algo5, f, None)?;
    let dict = Dictionary::Monomials { max_degree: 5 };
    let outcome = run_pair(
        out,
        PairRun {
            prefix: String::new(),
            title: "algo4 (dmd) vs algo5 (edmd), f = quad".into(),
            a: ("algo4", &a4, xi0.clone(), DecompositionSettings::dmd()),
            b: ("algo5", &a5, x0.clone(), DecompositionSettings::edmd(dict.clone())),
            cfg,
            expected: Verdict::Conjugate,
        },
        report,
    )?;
    report.manifest.outcomes.push(outcome);
    Ok(json!({
        "algorithms": ["algo4", "algo5"],
        "x0_algo4": xi0,
        "x0_algo5": x0,
        "run": cfg,
        "method_algo4": "dmd",
        "method_algo5": "edmd",
        "dictionary_algo5": dict.to_string(),
    }))
}

/// Outcome of Algorithm 6 against Algorithm 7 after re-indexing.
#[derive(Clone, Debug)]
pub struct ShiftRun {
    pub native: Trajectory,
    pub shifted: Trajectory,
    pub target: Trajectory,
    pub bitwise_equal: bool,
}

/// Runs Algorithm 6 from `x0`, re-indexes it into Algorithm 7 coordinates,
/// and runs Algorithm 7 from the matching start. Both shifted sequences are
/// cut to their common length.
pub fn shift_run(a6: &IterativeMap, a7: &IterativeMap, x0: &[f64], cfg: &RunConfig) -> Result<ShiftRun> {
    let h = conjugacy_map(AlgorithmId::Algo6, AlgorithmId::Algo7)?;
    let native = iterate(a6, x0, cfg)?;
    let shifted_states = h.shift_states(&native.states)?;
    if shifted_states.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "shifted run has only {} states",
            shifted_states.len()
        )));
    }
    let cfg7 = RunConfig {
        max_iters: shifted_states.len() - 1,
        ..*cfg
    };
    let run7 = iterate(a7, &shifted_states[0], &cfg7)?;
    let len = run7.len().min(shifted_states.len());
    let shifted = Trajectory::from_states(shifted_states[..len].to_vec(), cfg.eps)?;
    let target = Trajectory::from_states(run7.states[..len].to_vec(), cfg.eps)?;
    let bitwise_equal = shifted
        .states
        .iter()
        .flatten()
        .zip(target.states.iter().flatten())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    Ok(ShiftRun {
        native,
        shifted,
        target,
        bitwise_equal,
    })
}

pub struct ShiftVariant {
    pub name: &'static str,
    pub prox_f: Oracle,
    pub prox_g: Oracle,
    pub x0: Vec<f64>,
}

pub fn shift_variants() -> Result<Vec<ShiftVariant>> {
    Ok(vec![
        ShiftVariant {
            name: "l2",
            prox_f: Oracle::prox_l2(1.0, 1)?,
            prox_g: Oracle::prox_l2(1.0, 1)?,
            x0: vec![0.0, 0.0, 10.0],
        },
        ShiftVariant {
            name: "logdet",
            prox_f: Oracle::prox_neglogdet(1.0, 2)?,
            prox_g: Oracle::prox_l2(1.0, 3)?,
            // x1, x2 = 0; x3 = diag(2, 3) as (a11, a12, a22)
            x0: vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 3.0],
        },
    ])
}

fn fig5(out: &mut Outputs, report: &mut PresetReport) -> Result<Value> {
    let cfg = RunConfig::with_max_iters(60);
    let dmd = DecompositionSettings::dmd();
    let mut variants = Vec::new();
    for v in shift_variants()? {
        let a6 = make_algorithm(AlgorithmId::Algo6, v.prox_f, Some(v.prox_g))?;
        let a7 = make_algorithm(AlgorithmId::Algo7, v.prox_f, Some(v.prox_g))?;
        let run = out.stage(&format!("fig5 {} runs", v.name), shift_run(&a6, &a7, &v.x0, &cfg))?;
        let decompose = |t: &Trajectory| decompose_trajectory(t, &dmd);
        let s_native = out.stage(&format!("fig5 {} algo6 native", v.name), decompose(&run.native))?;
        let s_shift = out.stage(&format!("fig5 {} algo6 shifted", v.name), decompose(&run.shifted))?;
        let s7 = out.stage(&format!("fig5 {} algo7", v.name), decompose(&run.target))?;

        out.write(
            &format!("{}_trajectories.csv", v.name),
            "trajectory",
            &trajectories_csv(&[
                ("algo6", &run.native),
                ("algo6_shifted", &run.shifted),
                ("algo7", &run.target),
            ]),
        )?;
        out.write(&format!("{}_algo6_shifted_spectrum.json", v.name), "spectrum", &spectrum_to_json(&s_shift)?)?;
        out.write(&format!("{}_algo7_spectrum.json", v.name), "spectrum", &spectrum_to_json(&s7)?)?;
        out.write(
            &format!("{}_algo6_native_spectrum.json", v.name),
            "diagnostic-spectrum",
            &spectrum_to_json(&s_native)?,
        )?;
        let cmp = classify(&s_shift, &s7, ComparisonSettings::for_pair(&s_shift, &s7));
        let native_cmp = classify(&s_native, &s7, ComparisonSettings::for_pair(&s_native, &s7));
        out.write(&format!("{}_comparison.json", v.name), "comparison", &comparison_to_json(&cmp)?)?;
        out.write(
            &format!("{}_native_comparison.json", v.name),
            "diagnostic-comparison",
            &comparison_to_json(&native_cmp)?,
        )?;
        out.write(
            &format!("{}_spectra.svg", v.name),
            "plot",
            &scatter(
                &format!("algo6 (shifted) vs algo7, {}", v.name),
                ("algo6 shifted", &s_shift),
                ("algo7", &s7),
            ),
        )?;
        let mut summary = comparison_summary(&cmp);
        summary["bitwise_equal_after_shift"] = json!(run.bitwise_equal);
        summary["native_verdict"] = json!(native_cmp.verdict);
        summary["native_eigenvalue_counts"] = json!([s_native.triplets.len(), s7.triplets.len()]);
        let notes = vec![
            "x1^0 and x2^0 of algo6 are excluded by the shift (xi^k = (x3^k, x1^(k+1)))".to_string(),
            format!(
                "algo6 native run: {:?} after {} states; shifted sequences compared over {} states",
                run.native.status,
                run.native.len(),
                run.shifted.len()
            ),
        ];
        report.spectra.push((format!("{}/algo6_shifted", v.name), s_shift));
        report.spectra.push((format!("{}/algo7", v.name), s7));
        report.spectra.push((format!("{}/algo6_native", v.name), s_native));
        report.manifest.outcomes.push(VariantOutcome {
            variant: v.name.to_string(),
            verdict: Some(cmp.verdict),
            expected: Some(Verdict::Conjugate),
            summary,
            notes,
        });
        report.comparisons.push((v.name.to_string(), cmp));
        variants.push(json!({
            "name": v.name,
            "prox_f": v.prox_f.kind.name(),
            "prox_g": v.prox_g.kind.name(),
            "gamma": v.prox_f.gamma,
            "x0_algo6": v.x0,
        }));
    }
    Ok(json!({
        "algorithms": ["algo6", "algo7"],
        "variants": variants,
        "run": cfg,
        "method": "dmd",
    }))
}

/// Sweep outcome for one oracle.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub oracle: OracleKind,
    pub field: DistanceField,
    pub stats: FieldStats,
}

pub const SWEEP_X0: [f64; 2] = [0.1, 0.1];
pub const SWEEP_RANGE: (f64, f64) = (-2.0, 2.0);

/// Distance field between Algorithm 1 from a fixed start and Algorithm 2
/// over a square grid of starts.
pub fn sweep_field(resolution: usize, oracle: OracleKind, execution: Execution) -> Result<SweepReport> {
    if resolution < 2 {
        return Err(Error::config(format!("resolution must be at least 2, got {resolution}")));
    }
    let f = Oracle::new(oracle, 1.0, 1)?;
    if !f.kind.is_gradient() {
        return Err(Error::config(format!("sweep needs a gradient oracle, got {}", oracle.name())));
    }
    let a1 = make_algorithm(AlgorithmId::Algo1, f, None)?;
    let a2 = make_algorithm(AlgorithmId::Algo2, f, None)?;
    let grid = Grid::half_open(SWEEP_RANGE.0, SWEEP_RANGE.1, resolution)?;
    let settings = SweepSettings {
        execution,
        ..SweepSettings::default()
    };
    let field = sweep(&a1, &SWEEP_X0, &a2, &grid, &settings)?;
    let stats = field.stats();
    Ok(SweepReport {
        oracle,
        field,
        stats,
    })
}

fn grid_csv(field: &DistanceField) -> String {
    use std::fmt::Write as _;
    let mut s = String::from("i,j,xi1,xi2,distance,flag\n");
    for (idx, (i, j, p)) in field.grid.points().into_iter().enumerate() {
        let flag = serde_json::to_value(field.flags[idx]).ok();
        let flag = flag.as_ref().and_then(Value::as_str).unwrap_or("");
        let _ = writeln!(s, "{i},{j},{},{},{},{flag}", p[0], p[1], field.values[idx]);
    }
    s
}

fn write_sweep(out: &mut Outputs, rep: &SweepReport, resolution: usize) -> Result<VariantOutcome> {
    let v = rep.oracle.name();
    out.write(&format!("{v}_grid.csv"), "distance-field", &grid_csv(&rep.field))?;
    let summary = json!({
        "oracle": v,
        "resolution": resolution,
        "stats": rep.stats,
        "reference_principal": pairs(&rep.field.principal_a),
    });
    out.write(
        &format!("{v}_summary.json"),
        "summary",
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    out.write(
        &format!("{v}_heatmap.svg"),
        "plot",
        &distance_heatmap(&format!("algo1 vs algo2 over initial states, f = {v}"), &rep.field),
    )?;
    Ok(VariantOutcome {
        variant: v.to_string(),
        verdict: None,
        expected: None,
        summary: json!(rep.stats),
        notes: vec![format!(
            "{} of {} cells compared by symmetric Hausdorff distance, {} failed",
            rep.stats.hausdorff_cells, rep.stats.cells, rep.stats.failed
        )],
    })
}

/// Runs one sweep and writes its grid, summary and heatmap into `outdir`.
pub fn run_sweep_preset(resolution: usize, oracle: OracleKind, outdir: &Path, execution: Execution) -> Result<SweepReport> {
    let mut out = Outputs::new(outdir.to_path_buf())?;
    let rep = sweep_field(resolution, oracle, execution)?;
    write_sweep(&mut out, &rep, resolution)?;
    Ok(rep)
}

fn fig2(out: &mut Outputs, opts: &PresetOptions, report: &mut PresetReport) -> Result<Value> {
    let variants = gradient_variants(opts)?;
    for (name, f) in &variants {
        let rep = out.stage(&format!("fig2 {name} sweep"), sweep_field(opts.resolution, f.kind, opts.execution))?;
        let outcome = write_sweep(out, &rep, opts.resolution)?;
        report.manifest.outcomes.push(outcome);
        report.fields.push((name.to_string(), rep.field));
    }
    Ok(json!({
        "algorithms": ["algo1", "algo2"],
        "x0_algo1": SWEEP_X0,
        "grid": {
            "range": [SWEEP_RANGE.0, SWEEP_RANGE.1],
            "resolution": opts.resolution,
            "points": "lo + i * (hi - lo) / resolution",
        },
        "run": SweepSettings::default().run,
        "method": "dmd",
        "oracles": variants.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
    }))
}

/// Runs a preset into `outdir/<name>/` and writes its manifest there.
pub fn run_preset(name: PresetName, outdir: &Path, opts: &PresetOptions) -> Result<PresetReport> {
    let dir = outdir.join(name.as_str());
    let mut out = Outputs::new(dir.clone())?;
    let mut report = empty_report(name, &dir);
    let settings = match name {
        PresetName::Fig1 => fig1(&mut out, opts, &mut report),
        PresetName::Fig2 => fig2(&mut out, opts, &mut report),
        PresetName::Fig3 => fig3(&mut out, &mut report),
        PresetName::Fig4 => fig4(&mut out, &mut report),
        PresetName::Fig5 => fig5(&mut out, &mut report),
    };
    let settings = match settings {
        Err(e @ Error::Preset { .. }) => return Err(e),
        r => out.stage(name.as_str(), r)?,
    };
    report.manifest.settings = settings;
    report.manifest.files = out.entries;
    let text = serde_json::to_string_pretty(&report.manifest)? + "\n";
    fs::write(&report.manifest_path, text)?;
    Ok(report)
}

pub fn run_all(outdir: &Path, opts: &PresetOptions) -> Result<Vec<PresetReport>> {
    PresetName::ALL.iter().map(|p| run_preset(*p, outdir, opts)).collect()
}
