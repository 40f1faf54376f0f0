//! Study harness: circuit rankings, the expressibility/accuracy correlation
//! with outlier exclusion, multi-device sweeps and their CSV output.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::ParameterizedCircuit;
use crate::expressibility::{ExpressibilityResult, FidelityHistogram};
use crate::noise::NoiseModel;
use crate::pauli::PauliHamiltonian;
use crate::spsa::{SpsaConfig, TracePoint};
use crate::vqe::{run_vqe, VqeError, VqeResult};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("inputs have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("circuit {label} has no {metric} value")]
    MissingMetric { label: String, metric: &'static str },
    #[error("circuit labels differ between inputs: {0:?}")]
    LabelMismatch(Vec<String>),
    #[error("nothing to run: {0}")]
    Empty(&'static str),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Vqe(#[from] VqeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, BenchError> {
    if xs.len() != ys.len() {
        return Err(BenchError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(BenchError::TooFewPoints(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(BenchError::ZeroVariance("xs"));
    }
    if syy == 0.0 {
        return Err(BenchError::ZeroVariance("ys"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Per-circuit results that can be ranked.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitMetrics {
    pub id: u32,
    pub label: String,
    /// Entangler kinds in circuit order, e.g. `CX,CZ,CX,CZ`.
    pub gates: String,
    pub expressibility: Option<f64>,
    pub ground_energy: Option<f64>,
    pub energy_difference: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankKey {
    Expressibility,
    EnergyDifference,
}

impl RankKey {
    fn name(self) -> &'static str {
        match self {
            RankKey::Expressibility => "expressibility",
            RankKey::EnergyDifference => "energy difference",
        }
    }

    fn value(self, m: &CircuitMetrics) -> Option<f64> {
        match self {
            RankKey::Expressibility => m.expressibility,
            RankKey::EnergyDifference => m.energy_difference,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingTable {
    pub key: RankKey,
    pub rows: Vec<CircuitMetrics>,
}

/// Ascending by `key`; equal values keep circuit id order.
pub fn rank_circuits(records: &[CircuitMetrics], key: RankKey) -> Result<RankingTable, BenchError> {
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        if key.value(r).is_none() {
            return Err(BenchError::MissingMetric {
                label: r.label.clone(),
                metric: key.name(),
            });
        }
        rows.push(r.clone());
    }
    rows.sort_by(|a, b| {
        key.value(a)
            .unwrap()
            .total_cmp(&key.value(b).unwrap())
            .then(a.id.cmp(&b.id))
    });
    Ok(RankingTable { key, rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutlierPolicy {
    None,
    /// Exclude energy differences above `median + k * IQR`.
    IqrFence { k: f64 },
}

impl Default for OutlierPolicy {
    fn default() -> Self {
        OutlierPolicy::IqrFence { k: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub label: String,
    pub expressibility: f64,
    pub energy_difference: f64,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub r: f64,
    pub points: Vec<ScatterPoint>,
    /// `(label, reason)` for each excluded point.
    pub excluded: Vec<(String, String)>,
}

/// Median of each label's values, labels in first-appearance order.
fn medians_by_label<'a>(items: impl Iterator<Item = (&'a str, f64)>) -> Vec<(String, f64)> {
    let mut order: Vec<String> = Vec::new();
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (label, v) in items {
        if !values.contains_key(label) {
            order.push(label.to_string());
        }
        values.entry(label.to_string()).or_default().push(v);
    }
    order
        .into_iter()
        .map(|l| {
            let m = median(&values[&l]);
            (l, m)
        })
        .collect()
}

/// Joins expressibility and VQE results on circuit label (several VQE runs
/// per label are reduced to their median energy difference), applies the
/// outlier policy and correlates the remaining points.
pub fn correlation_study(
    expr: &[ExpressibilityResult],
    vqe: &[VqeResult],
    policy: OutlierPolicy,
) -> Result<CorrelationReport, BenchError> {
    let e = medians_by_label(expr.iter().map(|r| (r.label.as_str(), r.value)));
    let d = medians_by_label(vqe.iter().map(|r| (r.label.as_str(), r.energy_difference)));
    correlate_points(&e, &d, policy)
}

/// As [`correlation_study`] on precomputed `(label, value)` lists.
pub fn correlate_points(
    expressibility: &[(String, f64)],
    energy_difference: &[(String, f64)],
    policy: OutlierPolicy,
) -> Result<CorrelationReport, BenchError> {
    let diffs: BTreeMap<&str, f64> = energy_difference
        .iter()
        .map(|(l, v)| (l.as_str(), *v))
        .collect();
    let exprs: BTreeMap<&str, f64> = expressibility.iter().map(|(l, v)| (l.as_str(), *v)).collect();
    let mut mismatched: Vec<String> = exprs
        .keys()
        .filter(|l| !diffs.contains_key(*l))
        .chain(diffs.keys().filter(|l| !exprs.contains_key(*l)))
        .map(|l| l.to_string())
        .collect();
    if !mismatched.is_empty() {
        mismatched.sort();
        return Err(BenchError::LabelMismatch(mismatched));
    }

    let mut points: Vec<ScatterPoint> = expressibility
        .iter()
        .map(|(label, x)| ScatterPoint {
            label: label.clone(),
            expressibility: *x,
            energy_difference: diffs[label.as_str()],
            excluded: false,
        })
        .collect();
    let mut excluded = Vec::new();
    if let OutlierPolicy::IqrFence { k } = policy {
        let mut sorted: Vec<f64> = points.iter().map(|p| p.energy_difference).collect();
        sorted.sort_by(f64::total_cmp);
        if !sorted.is_empty() {
            let med = quantile_sorted(&sorted, 0.5);
            let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
            let fence = med + k * iqr;
            for p in &mut points {
                if p.energy_difference > fence {
                    p.excluded = true;
                    excluded.push((
                        p.label.clone(),
                        format!(
                            "energy difference {:.4} above median + {k} IQR = {fence:.4}",
                            p.energy_difference
                        ),
                    ));
                }
            }
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| !p.excluded)
        .map(|p| (p.expressibility, p.energy_difference))
        .unzip();
    let r = pearson(&xs, &ys)?;
    Ok(CorrelationReport {
        r,
        points,
        excluded,
    })
}

/// Settings shared by every VQE run of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct VqeSettings {
    pub spsa: SpsaConfig,
    pub shots: usize,
    pub seeds: Vec<u64>,
    pub reference_energy: f64,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, BenchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))
}

/// Runs every `(circuit, noise model, seed)` cell in a bounded worker pool.
/// The result keeps the input order: `out[i][j]` is circuit `i`, seed `j`,
/// for each model in `models` order (outermost).
pub fn vqe_grid(
    circuits: &[ParameterizedCircuit],
    models: &[Option<&NoiseModel>],
    h: &PauliHamiltonian,
    settings: &VqeSettings,
) -> Result<Vec<Vec<Vec<VqeResult>>>, BenchError> {
    if settings.seeds.is_empty() {
        return Err(BenchError::Empty("seed list"));
    }
    let cells: Vec<(usize, usize, usize)> = (0..models.len())
        .flat_map(|m| {
            (0..circuits.len()).flat_map(move |c| (0..settings.seeds.len()).map(move |s| (m, c, s)))
        })
        .collect();
    let results: Vec<Result<VqeResult, VqeError>> = pool(settings.jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(m, c, s)| {
                let config = settings.spsa.clone().with_seed(settings.seeds[s]);
                run_vqe(
                    &circuits[c],
                    h,
                    &config,
                    settings.shots,
                    models[m],
                    settings.reference_energy,
                )
            })
            .collect()
    });
    let mut flat = results.into_iter();
    let mut out = Vec::with_capacity(models.len());
    for _ in models {
        let mut per_circuit = Vec::with_capacity(circuits.len());
        for _ in circuits {
            let mut per_seed = Vec::with_capacity(settings.seeds.len());
            for _ in &settings.seeds {
                per_seed.push(flat.next().expect("one result per cell")?);
            }
            per_circuit.push(per_seed);
        }
        out.push(per_circuit);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub model: String,
    pub circuit: String,
    pub energy_diff: f64,
    pub seed: u64,
}

/// Cross product of circuits and noise models over the seed list, rows in
/// `(model, circuit, seed)` input order.
pub fn noise_model_sweep(
    circuits: &[ParameterizedCircuit],
    models: &[NoiseModel],
    h: &PauliHamiltonian,
    settings: &VqeSettings,
) -> Result<Vec<SweepRow>, BenchError> {
    if models.is_empty() {
        return Err(BenchError::Empty("noise model list"));
    }
    if circuits.is_empty() {
        return Err(BenchError::Empty("circuit list"));
    }
    let refs: Vec<Option<&NoiseModel>> = models.iter().map(Some).collect();
    let grid = vqe_grid(circuits, &refs, h, settings)?;
    let mut rows = Vec::new();
    for (model, per_circuit) in models.iter().zip(grid) {
        for (circuit, per_seed) in circuits.iter().zip(per_circuit) {
            for (seed, result) in settings.seeds.iter().zip(per_seed) {
                rows.push(SweepRow {
                    model: model.name().to_string(),
                    circuit: circuit.label().to_string(),
                    energy_diff: result.energy_difference,
                    seed: *seed,
                });
            }
        }
    }
    Ok(rows)
}

/// Median energy difference per `(model, circuit)`, models and circuits in
/// first-appearance order.
pub fn sweep_medians(rows: &[SweepRow]) -> Vec<(String, Vec<(String, f64)>)> {
    let mut models: Vec<String> = Vec::new();
    for r in rows {
        if !models.contains(&r.model) {
            models.push(r.model.clone());
        }
    }
    models
        .into_iter()
        .map(|m| {
            let per = medians_by_label(
                rows.iter()
                    .filter(|r| r.model == m)
                    .map(|r| (r.circuit.as_str(), r.energy_diff)),
            );
            (m, per)
        })
        .collect()
}

/// Circuit labels of each model sorted by median energy difference (ties by
/// first appearance).
pub fn sweep_orderings(rows: &[SweepRow]) -> Vec<(String, Vec<String>)> {
    sweep_medians(rows)
        .into_iter()
        .map(|(model, mut per)| {
            per.sort_by(|a, b| a.1.total_cmp(&b.1));
            (model, per.into_iter().map(|(l, _)| l).collect())
        })
        .collect()
}

#[derive(Serialize)]
struct RankingRecord<'a> {
    circuit: &'a str,
    gates: &'a str,
    expressibility: Option<f64>,
    ground_energy: Option<f64>,
    energy_diff: Option<f64>,
}

pub fn write_ranking_csv<W: Write>(w: W, table: &RankingTable) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    for r in &table.rows {
        out.serialize(RankingRecord {
            circuit: &r.label,
            gates: &r.gates,
            expressibility: r.expressibility,
            ground_energy: r.ground_energy,
            energy_diff: r.energy_difference,
        })?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ScatterRecord<'a> {
    circuit: &'a str,
    expressibility: f64,
    energy_diff: f64,
    excluded: bool,
}

pub fn write_scatter_csv<W: Write>(w: W, report: &CorrelationReport) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    for p in &report.points {
        out.serialize(ScatterRecord {
            circuit: &p.label,
            expressibility: p.expressibility,
            energy_diff: p.energy_difference,
            excluded: p.excluded,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(w: W, hist: &FidelityHistogram) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bin_low", "bin_high", "count"])?;
    let edges = hist.edges();
    for (i, count) in hist.counts().iter().enumerate() {
        out.write_record([
            edges[i].to_string(),
            edges[i + 1].to_string(),
            count.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(w: W, trace: &[TracePoint]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iter", "energy", "std_err"])?;
    for p in trace {
        out.write_record([
            p.iteration.to_string(),
            p.estimate.value.to_string(),
            p.estimate.standard_error.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct VqeRecord<'a> {
    circuit: &'a str,
    model: &'a str,
    seed: u64,
    best_energy: f64,
    std_err: f64,
    energy_diff: f64,
    evaluations: usize,
}

/// One row per run: `circuit,model,seed,best_energy,std_err,energy_diff,evaluations`.
/// `std_err` belongs to the final re-estimate at the best parameters.
pub fn write_vqe_csv<W: Write>(
    w: W,
    runs: &[(&str, u64, &VqeResult)],
) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    for (model, seed, r) in runs {
        out.serialize(VqeRecord {
            circuit: &r.label,
            model,
            seed: *seed,
            best_energy: r.best_energy,
            std_err: r.best_standard_error,
            energy_diff: r.energy_difference,
            evaluations: r.evaluations_used,
        })?;
    }
    out.flush()?;
    Ok(())
}

/// `label,mode,sampler,samples,bins,value` lines with a header.
pub fn write_expressibility_csv<W: Write>(
    mut w: W,
    results: &[ExpressibilityResult],
) -> Result<(), BenchError> {
    writeln!(w, "label,mode,sampler,samples,bins,value")?;
    for r in results {
        writeln!(w, "{}", r.summary_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn metrics(id: u32, diff: f64) -> CircuitMetrics {
        CircuitMetrics {
            id,
            label: id.to_string(),
            gates: "CX".into(),
            expressibility: Some(1.0 / id as f64),
            ground_energy: Some(-1.0 + diff),
            energy_difference: Some(diff),
        }
    }

    #[test]
    fn pearson_examples() {
        assert_abs_diff_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0, 2.0]), Err(BenchError::TooFewPoints(2))));
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(BenchError::ZeroVariance("xs"))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[1.0]),
            Err(BenchError::LengthMismatch(3, 1))
        ));
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30),
            scale_x in 0.1f64..10.0, shift_x in -5.0f64..5.0,
            scale_y in 0.1f64..10.0, shift_y in -5.0f64..5.0,
        ) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assume!(xs.iter().any(|x| (x - xs[0]).abs() > 1e-3));
            prop_assume!(ys.iter().any(|y| (y - ys[0]).abs() > 1e-3));
            let r = pearson(&xs, &ys).unwrap();
            let tx: Vec<f64> = xs.iter().map(|x| scale_x * x + shift_x).collect();
            let ty: Vec<f64> = ys.iter().map(|y| scale_y * y + shift_y).collect();
            prop_assert!((pearson(&tx, &ty).unwrap() - r).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&r));
        }

        #[test]
        fn ranking_is_a_permutation(diffs in prop::collection::vec(0.0f64..1.0, 1..15)) {
            let records: Vec<CircuitMetrics> = diffs
                .iter()
                .enumerate()
                .map(|(i, d)| metrics(i as u32 + 1, (d * 10.0).round() / 10.0))
                .collect();
            let table = rank_circuits(&records, RankKey::EnergyDifference).unwrap();
            let mut ids: Vec<u32> = table.rows.iter().map(|r| r.id).collect();
            for w in table.rows.windows(2) {
                let (a, b) = (w[0].energy_difference.unwrap(), w[1].energy_difference.unwrap());
                prop_assert!(a < b || (a == b && w[0].id < w[1].id));
            }
            ids.sort_unstable();
            prop_assert_eq!(ids, (1..=records.len() as u32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn ranking_examples() {
        let t = rank_circuits(&[metrics(1, 0.2), metrics(2, 0.1)], RankKey::EnergyDifference)
            .unwrap();
        assert_eq!(t.rows.iter().map(|r| r.id).collect::<Vec<_>>(), vec![2, 1]);
        let t = rank_circuits(&[metrics(3, 0.1), metrics(1, 0.1)], RankKey::EnergyDifference)
            .unwrap();
        assert_eq!(t.rows.iter().map(|r| r.id).collect::<Vec<_>>(), vec![1, 3]);
        let mut missing = metrics(4, 0.1);
        missing.expressibility = None;
        assert!(matches!(
            rank_circuits(&[missing], RankKey::Expressibility),
            Err(BenchError::MissingMetric { .. })
        ));
    }

    fn pts(values: &[(f64, f64)]) -> (Vec<(String, f64)>, Vec<(String, f64)>) {
        values
            .iter()
            .enumerate()
            .map(|(i, (x, y))| ((i.to_string(), *x), (i.to_string(), *y)))
            .unzip()
    }

    #[test]
    fn iqr_fence_catches_a_tenfold_outlier() {
        let (e, d) = pts(&[(0.2, 0.02), (0.3, 0.025), (0.1, 0.021), (0.7, 0.6), (0.05, 0.03)]);
        let report = correlate_points(&e, &d, OutlierPolicy::default()).unwrap();
        assert_eq!(report.excluded.len(), 1);
        assert_eq!(report.excluded[0].0, "3");
        assert!(report.points[3].excluded);
    }

    #[test]
    fn no_policy_matches_plain_pearson() {
        let data = [(0.2, 0.02), (0.3, 0.025), (0.1, 0.021), (0.7, 0.6), (0.05, 0.03)];
        let (e, d) = pts(&data);
        let report = correlate_points(&e, &d, OutlierPolicy::None).unwrap();
        let (xs, ys): (Vec<f64>, Vec<f64>) = data.iter().copied().unzip();
        assert_eq!(report.r, pearson(&xs, &ys).unwrap());
        assert!(report.excluded.is_empty());
        // a tight cluster has no outliers under the fence either
        let (e, d) = pts(&[(0.1, 0.020), (0.2, 0.022), (0.3, 0.021), (0.4, 0.023)]);
        let report = correlate_points(&e, &d, OutlierPolicy::default()).unwrap();
        assert!(report.excluded.is_empty());
    }

    #[test]
    fn label_mismatch_is_reported() {
        let e = vec![("1".to_string(), 0.1), ("2".to_string(), 0.2), ("3".to_string(), 0.3)];
        let d = vec![("1".to_string(), 0.1), ("2".to_string(), 0.2), ("4".to_string(), 0.3)];
        assert!(matches!(
            correlate_points(&e, &d, OutlierPolicy::None),
            Err(BenchError::LabelMismatch(l)) if l == vec!["3".to_string(), "4".to_string()]
        ));
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 0.25), 1.75);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn sweep_rows_follow_input_order() {
        let h = PauliHamiltonian::parse("1 ZIII\n0.5 IZII").unwrap();
        let circuits = vec![
            crate::zoo::zoo_circuit(1).unwrap(),
            crate::zoo::zoo_circuit(2).unwrap(),
        ];
        let a = crate::noise::build_noise_model(
            &crate::data::calibration("armonk-like").unwrap().unwrap(),
        )
        .unwrap();
        let b = crate::noise::NoiseModel::ideal(4);
        let settings = VqeSettings {
            spsa: SpsaConfig {
                max_iterations: 5,
                ..SpsaConfig::default()
            },
            shots: 64,
            seeds: vec![7, 3],
            reference_energy: -1.5,
            jobs: 2,
        };
        let rows = noise_model_sweep(&circuits, &[a, b], &h, &settings).unwrap();
        assert_eq!(rows.len(), 8);
        let keys: Vec<(String, String, u64)> = rows
            .iter()
            .map(|r| (r.model.clone(), r.circuit.clone(), r.seed))
            .collect();
        assert_eq!(keys[0], ("armonk-like".into(), "1".into(), 7));
        assert_eq!(keys[1], ("armonk-like".into(), "1".into(), 3));
        assert_eq!(keys[2], ("armonk-like".into(), "2".into(), 7));
        assert_eq!(keys[4], ("ideal".into(), "1".into(), 7));

        let mut first = Vec::new();
        write_sweep_csv(&mut first, &rows).unwrap();
        let again = noise_model_sweep(&circuits, &[
            crate::noise::build_noise_model(&crate::data::calibration("armonk-like").unwrap().unwrap()).unwrap(),
            crate::noise::NoiseModel::ideal(4),
        ], &h, &VqeSettings { jobs: 1, ..settings.clone() })
        .unwrap();
        let mut second = Vec::new();
        write_sweep_csv(&mut second, &again).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with("model,circuit,energy_diff,seed\n"));

        assert!(matches!(
            noise_model_sweep(&circuits, &[], &h, &settings),
            Err(BenchError::Empty(_))
        ));
    }

    #[test]
    fn csv_headers() {
        let table = rank_circuits(&[metrics(1, 0.2)], RankKey::EnergyDifference).unwrap();
        let mut buf = Vec::new();
        write_ranking_csv(&mut buf, &table).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("circuit,gates,expressibility,ground_energy,energy_diff\n"));

        let hist = FidelityHistogram::from_fidelities(&[0.1, 0.9], 2).unwrap();
        let mut buf = Vec::new();
        write_histogram_csv(&mut buf, &hist).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bin_low,bin_high,count\n0,0.5,1\n0.5,1,1\n");

        let (e, d) = pts(&[(0.2, 0.02), (0.3, 0.025), (0.1, 0.021)]);
        let report = correlate_points(&e, &d, OutlierPolicy::None).unwrap();
        let mut buf = Vec::new();
        write_scatter_csv(&mut buf, &report).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("circuit,expressibility,energy_diff,excluded\n0,0.2,0.02,false\n"));
    }
}
