//! One runner per experiment kind. Every runner returns the files to write
//! and a JSON value for the report; nothing here touches the filesystem.

use crate::config::{ConfigFile, EmulationVariant, Experiment};
use qclab::adversaries::{
    emulate_general, emulate_iid, CapAdversary, EpsBall, MassAccounting, Whitebox,
};
use qclab::classifiers::{
    implant_classifier, sample_cap_error, CapVariant, CountedOracle, IidDirections, LearnerSpec,
    OneNNClassifier, Trained,
};
use qclab::defense::{crossing_union_bound, defense_wrap, flip_probability};
use qclab::geometry::{cap_fraction, cap_threshold_with, gaussian_vector, norm, CapModel};
use qclab::metrics::{
    estimate_ar_opt, estimate_risk, estimate_trained_ar, line_quadrature, run_qc_experiment,
    two_intervals_ar_exact, two_intervals_ar_grid, with_workers,
};
use qclab::tasks::{
    sample_two_intervals_poisson, ConcentricSpheresTask, GroundTruth, Task, TwoIntervalsTask,
};
use qclab::{Error, Result, RngStream};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

/// Files produced by a run, in write order, plus the report payload and a
/// count of hard-budget violations.
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub results: Value,
    pub summary: String,
    pub budget_violations: u64,
}

fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("non-finite value in {what}")))
    }
}

fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn run(cfg: &ConfigFile, workers: Option<usize>) -> Result<RunOutput> {
    match &cfg.experiment {
        Experiment::Tau { delta, d, model } => tau_table(*delta, d, *model),
        Experiment::CapAttack { .. } | Experiment::QcCurve { .. } => {
            let qc = cfg.qc_config().expect("harness experiment");
            qc.validate()?;
            let res = with_workers(workers, || run_qc_experiment(&qc))??;
            let mut csv = Vec::new();
            res.write_csv(&mut csv)?;
            let summary = res.summary_json()?;
            let mut table = String::from("budget  rate    ci_lo   ci_hi   violations\n");
            for s in &res.summaries {
                table += &format!(
                    "{:<7} {:.3}   {:.3}   {:.3}   {}\n",
                    s.budget, s.rate, s.ci_lo, s.ci_hi, s.violations
                );
            }
            table += &format!(
                "empirical QC: {}\n",
                res.empirical_qc
                    .map_or("not reached".to_string(), |q| q.to_string())
            );
            Ok(RunOutput {
                files: vec![
                    ("results.csv".into(), csv),
                    ("summary.json".into(), summary.into_bytes()),
                ],
                results: json!({ "summaries": res.summaries, "empirical_qc": res.empirical_qc }),
                summary: table,
                budget_violations: res.budget_violations(),
            })
        }
        Experiment::Emulate {
            variant,
            d,
            delta,
            k,
            inner_s,
            trials,
            accounting,
            mc_samples,
        } => with_workers(workers, || {
            emulate(
                cfg.seed,
                *variant,
                *d,
                *delta,
                *k,
                *inner_s,
                *trials,
                *accounting,
                *mc_samples,
            )
        })?,
        Experiment::TwoIntervals {
            m,
            z,
            datasets,
            grid_step,
        } => with_workers(workers, || {
            two_intervals(cfg.seed, *m, *z, *datasets, *grid_step)
        })?,
        Experiment::DefenseEval {
            d,
            delta,
            side,
            displacements,
            points,
            shifts,
            mc_samples,
        } => with_workers(workers, || {
            defense_eval(
                cfg.seed,
                *d,
                *delta,
                *side,
                displacements,
                *points,
                *shifts,
                *mc_samples,
            )
        })?,
        Experiment::BoundaryDump { m, z, resolution } => {
            let csv = boundary_dump(*m, *z, cfg.seed, *resolution)?;
            let rows = resolution * resolution;
            Ok(RunOutput {
                files: vec![("boundary.csv".into(), csv)],
                results: json!({ "rows": rows }),
                summary: format!("{rows} grid points written\n"),
                budget_violations: 0,
            })
        }
    }
}

#[derive(Serialize)]
struct TauRow {
    d: usize,
    delta: f64,
    tau: f64,
    sqrt_d_tau: f64,
    residual: f64,
}

pub fn tau_rows(
    delta: f64,
    dims: &[usize],
    model: CapModel,
) -> Result<Vec<(usize, f64, f64, f64)>> {
    dims.iter()
        .map(|&d| {
            let tau = cap_threshold_with(delta, d, model)?;
            let residual = cap_fraction(tau, d)? - delta;
            check_finite("cap threshold", &[tau, residual])?;
            Ok((d, tau, (d as f64).sqrt() * tau, residual))
        })
        .collect()
}

fn tau_table(delta: f64, dims: &[usize], model: CapModel) -> Result<RunOutput> {
    if dims.is_empty() {
        return Err(Error::Config("tau needs at least one dimension".into()));
    }
    let rows: Vec<TauRow> = tau_rows(delta, dims, model)?
        .into_iter()
        .map(|(d, tau, sqrt_d_tau, residual)| TauRow {
            d,
            delta,
            tau,
            sqrt_d_tau,
            residual,
        })
        .collect();
    let mut table = String::from("d       tau         sqrt(d)*tau  residual\n");
    for r in &rows {
        table += &format!(
            "{:<7} {:<11.6} {:<12.6} {:.2e}\n",
            r.d, r.tau, r.sqrt_d_tau, r.residual
        );
    }
    Ok(RunOutput {
        files: vec![("tau.csv".into(), csv_bytes(&rows)?)],
        results: serde_json::to_value(&rows)?,
        summary: table,
        budget_violations: 0,
    })
}

#[derive(Serialize)]
struct EmulateRow {
    trial: usize,
    queries_used: u64,
    free_queries: u64,
    ar_p: f64,
    ar_opt: f64,
    ratio: f64,
    success: bool,
}

/// Emulation against a hidden `Cap(delta / k)` classifier; a trial succeeds
/// when the attack reaches `AR_opt / (2k)`.
#[allow(clippy::too_many_arguments)]
fn emulate(
    seed: u64,
    variant: EmulationVariant,
    d: usize,
    delta: f64,
    k: usize,
    inner_s: usize,
    trials: usize,
    accounting: MassAccounting,
    n: usize,
) -> Result<RunOutput> {
    if k == 0 || trials == 0 || inner_s == 0 || n == 0 {
        return Err(Error::Config(
            "k, inner_s, trials and mc_samples must be positive".into(),
        ));
    }
    let tau = cap_threshold_with(delta / k as f64, d, CapModel::Exact)?;
    let eps = EpsBall::norm_scaled(tau);
    let task = Task::ConcentricSpheres(ConcentricSpheresTask::new(d)?);
    let rows: Vec<EmulateRow> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<EmulateRow> {
            let base = RngStream::for_trial(seed, t as u64);
            let hidden = sample_cap_error(
                d,
                delta / k as f64,
                1,
                CapVariant::Iid,
                None,
                CapModel::Exact,
                &mut base.child(0),
            )?;
            let trained = Trained::Implanted {
                classifier: implant_classifier(GroundTruth::Spheres, hidden),
                task,
            };
            let inner = CapAdversary { d, s: inner_s, eps };
            let mut oracle = CountedOracle::new(trained.classifier());
            let mut rng = base.child(1);
            let rep = match variant {
                EmulationVariant::Iid => {
                    emulate_iid(&mut oracle, &inner, d, delta, k, CapModel::Exact, &mut rng)?
                }
                EmulationVariant::General => {
                    emulate_general(&mut oracle, &inner, &IidDirections, d, k, &mut rng)?
                }
            };
            let ar_p = estimate_trained_ar(
                &trained,
                &rep.perturbation,
                n,
                accounting,
                &mut base.child(2),
            )?
            .value;
            let ar_opt = estimate_ar_opt(
                &Whitebox::from_trained(&trained),
                &task,
                eps,
                n,
                &mut base.child(3),
            )?
            .value;
            check_finite("emulation trial", &[ar_p, ar_opt])?;
            let ratio = if ar_opt > 0.0 { ar_p / ar_opt } else { 1.0 };
            Ok(EmulateRow {
                trial: t,
                queries_used: rep.queries_used,
                free_queries: rep.free_queries,
                ar_p,
                ar_opt,
                ratio,
                success: ratio >= 1.0 / (2 * k) as f64,
            })
        })
        .collect::<Result<_>>()?;
    let wins = rows.iter().filter(|r| r.success).count();
    let rate = wins as f64 / trials as f64;
    let mean_ratio = rows.iter().map(|r| r.ratio).sum::<f64>() / trials as f64;
    Ok(RunOutput {
        files: vec![("emulate.csv".into(), csv_bytes(&rows)?)],
        results: json!({ "success_rate": rate, "mean_ratio": mean_ratio, "threshold": 1.0 / (2 * k) as f64 }),
        summary: format!(
            "ratio >= 1/(2k) in {wins}/{trials} trials ({rate:.3}); mean ratio {mean_ratio:.3}\n"
        ),
        budget_violations: 0,
    })
}

#[derive(Serialize)]
struct IntervalsRow {
    dataset: usize,
    n_neg: usize,
    n_pos: usize,
    exact: f64,
    grid: f64,
    one_nn: f64,
    rel_diff: f64,
}

/// Reachable error length at `eps = z/10` from the closed form, the
/// parabola grid, and exact 1-NN reachability on the same grid.
fn two_intervals(
    seed: u64,
    m: f64,
    z: f64,
    datasets: usize,
    step: Option<f64>,
) -> Result<RunOutput> {
    if datasets == 0 {
        return Err(Error::Config("datasets must be positive".into()));
    }
    let task = TwoIntervalsTask::new(m, z)?;
    let step = step.unwrap_or(z / 2000.0);
    let eps = z / 10.0;
    let ball = EpsBall::uniform(eps);
    let truth = GroundTruth::Midline { z };
    let rows: Vec<IntervalsRow> = (0..datasets)
        .into_par_iter()
        .map(|i| -> Result<IntervalsRow> {
            let s = sample_two_intervals_poisson(m, z, &mut RngStream::for_trial(seed, i as u64))?;
            let exact = two_intervals_ar_exact(&s, eps)?.length;
            let grid = two_intervals_ar_grid(&s, eps, step)?.length;
            let wb = Whitebox::OneNn(std::sync::Arc::new(OneNNClassifier::from_dataset(&s)?));
            let one_nn = line_quadrature(&task, step, |x, _| wb.reachable(x, &truth, ball))?;
            check_finite("two-intervals dataset", &[exact, grid, one_nn])?;
            Ok(IntervalsRow {
                dataset: i,
                n_neg: s.line_coordinates(qclab::Label::Neg).len(),
                n_pos: s.line_coordinates(qclab::Label::Pos).len(),
                exact,
                grid,
                one_nn,
                rel_diff: if exact > 0.0 {
                    (grid - exact).abs() / exact
                } else {
                    grid.abs()
                },
            })
        })
        .collect::<Result<_>>()?;
    let worst = rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max);
    let mean_fraction = rows.iter().map(|r| r.exact).sum::<f64>() / (rows.len() as f64 * 2.0 * m);
    Ok(RunOutput {
        files: vec![("two_intervals.csv".into(), csv_bytes(&rows)?)],
        results: json!({ "max_rel_diff": worst, "mean_ar_fraction": mean_fraction, "eps": eps, "grid_step": step }),
        summary: format!("mean AR fraction {mean_fraction:.5}; closed form vs grid max relative gap {worst:.2e}\n"),
        budget_violations: 0,
    })
}

#[derive(Serialize)]
struct FlipRow {
    displacement: f64,
    flip_prob: f64,
    ci_lo: f64,
    ci_hi: f64,
    union_bound: f64,
}

/// Flip probability of the shifted-grid defense around an implanted
/// `Cap(delta)` classifier, and the risk inflation over fresh shifts.
#[allow(clippy::too_many_arguments)]
fn defense_eval(
    seed: u64,
    d: usize,
    delta: f64,
    side: f64,
    displacements: &[f64],
    points: usize,
    shifts: usize,
    n: usize,
) -> Result<RunOutput> {
    if points == 0 || shifts == 0 || n == 0 {
        return Err(Error::Config(
            "points, shifts and mc_samples must be positive".into(),
        ));
    }
    if displacements.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Config(
            "displacements must be finite and non-negative".into(),
        ));
    }
    let task = Task::ConcentricSpheres(ConcentricSpheresTask::new(d)?);
    let setup = RngStream::new(seed, 0);
    let error = sample_cap_error(
        d,
        delta,
        1,
        CapVariant::Iid,
        None,
        CapModel::Exact,
        &mut setup.child(0),
    )?;
    let base = implant_classifier(GroundTruth::Spheres, error);

    let flips: Vec<FlipRow> = displacements
        .par_iter()
        .enumerate()
        .map(|(i, &r)| -> Result<FlipRow> {
            let mut rng = RngStream::for_trial(seed, i as u64).child(1);
            let (mut hits, mut bound) = (0.0, 0.0);
            for _ in 0..points {
                let x = task.sample_point(&mut rng);
                let v = gaussian_vector(d, &mut rng);
                let dx: Vec<f64> = v.iter().map(|c| c * r / norm(&v)).collect();
                let x2: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
                hits += flip_probability(&base, side, &x, &x2, shifts, &mut rng)?.value;
                bound += crossing_union_bound(&dx, side).min(1.0);
            }
            let total = (points * shifts) as u64;
            let (ci_lo, ci_hi) = qclab::estimate::wilson_interval(
                (hits * shifts as f64).round() as u64,
                total,
                1.96,
            );
            Ok(FlipRow {
                displacement: r,
                flip_prob: hits / points as f64,
                ci_lo,
                ci_hi,
                union_bound: bound / points as f64,
            })
        })
        .collect::<Result<_>>()?;

    let ratios: Vec<f64> = (0..shifts)
        .into_par_iter()
        .map(|j| -> Result<f64> {
            let stream = RngStream::for_trial(seed, j as u64).child(2);
            let smoothed = defense_wrap(base.clone(), d, side, &mut stream.child(0))?;
            let eval = stream.child(1);
            let r_base = estimate_risk(&base, &task, n, &mut eval.clone())?.value;
            let r_def = estimate_risk(&smoothed, &task, n, &mut eval.clone())?.value;
            check_finite("risk estimate", &[r_base, r_def])?;
            Ok(if r_base > 0.0 {
                r_def / r_base
            } else {
                f64::INFINITY
            })
        })
        .collect::<Result<_>>()?;
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let mut table = String::from("displacement  flip_prob  union_bound\n");
    for f in &flips {
        table += &format!(
            "{:<13} {:<10.4} {:.4}\n",
            f.displacement, f.flip_prob, f.union_bound
        );
    }
    table += &format!("median risk inflation over {shifts} shifts: {median:.3}\n");
    Ok(RunOutput {
        files: vec![("defense.csv".into(), csv_bytes(&flips)?)],
        results: json!({ "median_risk_inflation": median, "risk_inflation": ratios }),
        summary: table,
        budget_violations: 0,
    })
}

#[derive(Serialize)]
struct BoundaryRow {
    x: f64,
    y: f64,
    label: i8,
    in_error_set: bool,
}

/// 1-NN labels on a `resolution x resolution` grid over `[0,m] x [0,z]`
/// (endpoints included), with the mask `f != h`.
pub fn boundary_dump(m: f64, z: f64, seed: u64, resolution: usize) -> Result<Vec<u8>> {
    if resolution < 10 {
        return Err(Error::Domain(format!(
            "resolution must be at least 10, got {resolution}"
        )));
    }
    let trained = LearnerSpec::OneNn { m, z }.train(&mut RngStream::new(seed, 0))?;
    let f = trained.classifier();
    let h = GroundTruth::Midline { z };
    let step = |hi: f64, i: usize| hi * i as f64 / (resolution - 1) as f64;
    let mut rows = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            let p = [step(m, i), step(z, j)];
            let label = f.classify(&p);
            rows.push(BoundaryRow {
                x: p[0],
                y: p[1],
                label: label.as_i8(),
                in_error_set: label != h.label(&p),
            });
        }
    }
    csv_bytes(&rows)
}
