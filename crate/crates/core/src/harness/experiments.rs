//! Experiment drivers. Every sweep cell is independent and runs on the
//! rayon pool; tables are sorted afterwards so output does not depend on
//! completion order.

use std::time::Instant;

use rayon::prelude::*;

use crate::coeffs::{build_coefficients, coefficient_oracle, CoefficientName};
use crate::ei::solve_ei_observed;
use crate::error::{KgzError, Result};
use crate::harness::config::{Experiment, RunConfig, Solver, DEFAULT_TAU_REF};
use crate::harness::output::{DataFile, ErrorRecord, ExperimentOutput, RowMeta, Table};
use crate::limits::{eta_metrics, kgz_energy, limit_reconstruct, solve_nls_observed, NlsVariant};
use crate::mti::{reconstruct, reconstruct_with_rates, solve_mti_observed};
use crate::problems::{make_problem_with, Problem};
use crate::spectral::{Field, SpectralGrid};
use crate::stepping::{snapshot_steps, step_count};

/// Number of evenly spaced sample times used when none are configured.
pub const DEFAULT_SAMPLES: usize = 20;

type Rows = Vec<(ErrorRecord, RowMeta)>;

/// Runs the configured experiment.
pub fn run(cfg: &RunConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::AccuracyTime => Ok(one_table(accuracy_time(&build_problems(cfg)?, cfg)?)),
        Experiment::AccuracySpace => Ok(one_table(accuracy_space(cfg)?)),
        Experiment::LimitRates => Ok(one_table(limit_rates(&build_problems(cfg)?, cfg)?)),
        Experiment::Energy => Ok(one_table(energy(&build_problems(cfg)?, cfg)?)),
        Experiment::SuperResolution => super_resolution(&build_problems(cfg)?, cfg),
        Experiment::Solve => solve(&build_problems(cfg)?, cfg),
        Experiment::CoeffsDump => coeffs_dump(&build_problems(cfg)?, cfg),
    }
}

fn one_table(t: Table) -> ExperimentOutput {
    ExperimentOutput {
        tables: vec![t],
        files: vec![],
    }
}

/// One problem per `(m0, N)` of the sweep, in configuration order.
pub fn build_problems(cfg: &RunConfig) -> Result<Vec<Problem>> {
    let ns: Vec<Option<usize>> = if cfg.n.is_empty() {
        vec![None]
    } else {
        cfg.n.iter().map(|&n| Some(n)).collect()
    };
    let mut out = Vec::new();
    for &m0 in &cfg.m0 {
        for &n in &ns {
            out.push(problem_on(cfg, m0, n)?);
        }
    }
    Ok(out)
}

fn problem_on(cfg: &RunConfig, m0: u32, n: Option<usize>) -> Result<Problem> {
    let mut p = make_problem_with(cfg.problem, m0, cfg.gamma_rule(), n)?;
    p.grid = p.grid.clone().with_dealias(cfg.dealias);
    Ok(p)
}

/// `(psi, phi)` at `t_end` from the chosen integrator.
pub fn final_fields(solver: Solver, p: &Problem, tau: f64, t_end: f64) -> Result<(Field, Field)> {
    match solver {
        Solver::Mti => {
            let st = solve_mti_observed(&p.data, &p.params, tau, t_end, &p.grid, |_, _| {})?;
            Ok(reconstruct(&st))
        }
        Solver::Ei => {
            let st = solve_ei_observed(&p.data, &p.params, tau, t_end, &p.grid, |_, _| {})?;
            Ok((st.psi, st.phi))
        }
    }
}

/// Nodal max-norm errors `(psi, phi)`.
pub fn max_errors(got: &(Field, Field), reference: &(Field, Field)) -> (f64, f64) {
    (got.0.max_abs_diff(&reference.0), got.1.max_abs_diff(&reference.1))
}

/// A fine-step solution together with its own error estimate.
#[derive(Debug, Clone)]
pub struct Reference {
    pub fields: (Field, Field),
    pub tau_ref: f64,
    /// Max-norm distance `psi + phi` between runs at `tau_ref` and `tau_ref/2`.
    pub self_check: f64,
}

/// Reference step: the requested value (default `1e-6`) capped at
/// `eps^2/20` and shrunk to divide `t_end`. Fails if it is not at least a
/// hundred times finer than every step being measured.
pub fn reference_tau(requested: Option<f64>, eps: f64, taus: &[f64], t_end: f64) -> Result<f64> {
    let mut tau_ref = requested.unwrap_or(DEFAULT_TAU_REF).min(eps * eps / 20.0);
    if t_end > 0.0 {
        tau_ref = t_end / (t_end / tau_ref).ceil();
    }
    let limit = taus.iter().cloned().fold(f64::INFINITY, f64::min) / 100.0;
    if tau_ref > limit * (1.0 + 1e-12) {
        return Err(KgzError::ReferenceTooCoarse { tau_ref, limit });
    }
    Ok(tau_ref)
}

/// Exponential-integrator solution at `tau_ref/2`, checked against `tau_ref`.
pub fn ei_reference(p: &Problem, t_end: f64, tau_ref: f64) -> Result<Reference> {
    let (coarse, fine) = rayon::join(
        || final_fields(Solver::Ei, p, tau_ref, t_end),
        || final_fields(Solver::Ei, p, tau_ref / 2.0, t_end),
    );
    let (coarse, fine) = (coarse?, fine?);
    let (a, b) = max_errors(&coarse, &fine);
    Ok(Reference {
        fields: fine,
        tau_ref: tau_ref / 2.0,
        self_check: a + b,
    })
}

fn base_record(p: &Problem, tau: f64, t: f64) -> ErrorRecord {
    ErrorRecord {
        epsilon: p.params.epsilon,
        gamma: p.params.gamma,
        tau,
        n: p.grid.n(),
        t,
        ..Default::default()
    }
}

/// Rows of `solver` at every configured step against one EI reference per problem.
fn error_sweep(problems: &[Problem], cfg: &RunConfig, solver: Solver, name: &str) -> Result<Table> {
    let per_problem: Vec<Result<Rows>> = problems
        .par_iter()
        .map(|p| {
            let tau_ref = reference_tau(cfg.ref_tau, p.params.epsilon, &cfg.tau, cfg.t_end)?;
            let reference = ei_reference(p, cfg.t_end, tau_ref)?;
            log::info!(
                "{name}: eps = {:e}, reference tau = {:e}, self-check = {:e}",
                p.params.epsilon,
                reference.tau_ref,
                reference.self_check
            );
            cfg.tau
                .par_iter()
                .map(|&tau| {
                    let start = Instant::now();
                    let got = final_fields(solver, p, tau, cfg.t_end)?;
                    let wall = start.elapsed().as_secs_f64();
                    let (ep, eh) = max_errors(&got, &reference.fields);
                    let rec = ErrorRecord {
                        err_psi_linf: Some(ep),
                        err_phi_linf: Some(eh),
                        err_total: Some(ep + eh),
                        ..base_record(p, tau, cfg.t_end)
                    };
                    Ok((rec, RowMeta::checked(reference.self_check, ep + eh, wall)))
                })
                .collect()
        })
        .collect();
    let mut table = Table::new(name);
    for rows in per_problem {
        table.rows.extend(rows?);
    }
    table.sort();
    if table.any_unreliable() {
        table
            .notes
            .push("some rows have a reference self-check above 1% of the measured error".into());
    }
    Ok(table)
}

/// Temporal error of the configured solver against a fine EI reference.
pub fn accuracy_time(problems: &[Problem], cfg: &RunConfig) -> Result<Table> {
    error_sweep(problems, cfg, cfg.solver, Experiment::AccuracyTime.as_str())
}

/// Spatial error at a fixed small step. The reference uses the same solver
/// and step on `2 max(N)` modes, checked against `4 max(N)`; errors are taken
/// on the coarse nodes, which the nested grids share.
pub fn accuracy_space(cfg: &RunConfig) -> Result<Table> {
    let n_max = *cfg.n.iter().max().ok_or_else(|| KgzError::Config("accuracy-space needs N values".into()))?;
    let n_ref = 2 * n_max;
    let cells: Vec<(u32, f64)> = cfg
        .m0
        .iter()
        .flat_map(|&m| cfg.tau.iter().map(move |&t| (m, t)))
        .collect();
    let per_cell: Vec<Result<Rows>> = cells
        .par_iter()
        .map(|&(m0, tau)| {
            let p_ref = problem_on(cfg, m0, Some(n_ref))?;
            let p_chk = problem_on(cfg, m0, Some(2 * n_ref))?;
            let (r, c) = rayon::join(
                || final_fields(cfg.solver, &p_ref, tau, cfg.t_end),
                || final_fields(cfg.solver, &p_chk, tau, cfg.t_end),
            );
            let (r, c) = (r?, c?);
            let self_check = {
                let c = (subsample(&c.0, 2), subsample(&c.1, 2));
                let (a, b) = max_errors(&c, &r);
                a + b
            };
            cfg.n
                .par_iter()
                .map(|&n| {
                    let p = problem_on(cfg, m0, Some(n))?;
                    let start = Instant::now();
                    let got = final_fields(cfg.solver, &p, tau, cfg.t_end)?;
                    let wall = start.elapsed().as_secs_f64();
                    let stride = n_ref / n;
                    let reference = (subsample(&r.0, stride), subsample(&r.1, stride));
                    let (ep, eh) = max_errors(&got, &reference);
                    let rec = ErrorRecord {
                        err_psi_linf: Some(ep),
                        err_phi_linf: Some(eh),
                        err_total: Some(ep + eh),
                        ..base_record(&p, tau, cfg.t_end)
                    };
                    Ok((rec, RowMeta::checked(self_check, ep + eh, wall)))
                })
                .collect()
        })
        .collect();
    let mut table = Table::new(Experiment::AccuracySpace.as_str());
    for rows in per_cell {
        table.rows.extend(rows?);
    }
    table.sort();
    table.notes.push(format!(
        "reference: {} on N = {n_ref}, self-check against N = {}",
        cfg.solver,
        2 * n_ref
    ));
    Ok(table)
}

/// Every `stride`-th node value.
pub fn subsample(f: &Field, stride: usize) -> Field {
    Field::new(f.iter().step_by(stride).cloned().collect())
}

/// Step indices at which time series are sampled: the configured times,
/// else [`DEFAULT_SAMPLES`] evenly spaced steps including both ends.
pub fn sample_steps(cfg: &RunConfig, tau: f64) -> Result<(usize, f64, Vec<usize>)> {
    let (n, tau) = step_count(cfg.t_end, tau)?;
    let mut steps = if cfg.snapshots.is_empty() {
        (0..=DEFAULT_SAMPLES).map(|k| k * n / DEFAULT_SAMPLES).collect()
    } else {
        snapshot_steps(&cfg.snapshots, tau, n)?
    };
    steps.sort_unstable();
    steps.dedup();
    Ok((n, tau, steps))
}

/// `(psi, phi)` of the configured KGZ solver at the sampled steps.
fn kgz_samples(solver: Solver, p: &Problem, tau: f64, t_end: f64, steps: &[usize]) -> Result<Vec<(Field, Field)>> {
    let mut out = Vec::with_capacity(steps.len());
    match solver {
        Solver::Mti => {
            solve_mti_observed(&p.data, &p.params, tau, t_end, &p.grid, |k, st| {
                if steps.binary_search(&k).is_ok() {
                    out.push(reconstruct(st));
                }
            })?;
        }
        Solver::Ei => {
            solve_ei_observed(&p.data, &p.params, tau, t_end, &p.grid, |k, s| {
                if steps.binary_search(&k).is_ok() {
                    out.push(s.fields());
                }
            })?;
        }
    }
    Ok(out)
}

fn limit_samples(p: &Problem, variant: NlsVariant, tau: f64, t_end: f64, steps: &[usize]) -> Result<Vec<(Field, Field)>> {
    let mut out = Vec::with_capacity(steps.len());
    solve_nls_observed(&p.data, &p.params, variant, tau, t_end, &p.grid, |k, st| {
        if steps.binary_search(&k).is_ok() {
            out.push(limit_reconstruct(st));
        }
    })?;
    Ok(out)
}

/// Discrete `L^2` distances between the KGZ solution and its two limit
/// models over time. Columns hold the raw distances.
pub fn limit_rates(problems: &[Problem], cfg: &RunConfig) -> Result<Table> {
    let cells: Vec<(&Problem, f64)> = problems
        .iter()
        .flat_map(|p| cfg.tau.iter().map(move |&t| (p, t)))
        .collect();
    let per_cell: Vec<Result<Rows>> = cells
        .par_iter()
        .map(|&(p, tau)| {
            let start = Instant::now();
            let (_, tau, steps) = sample_steps(cfg, tau)?;
            let (kgz, (nls, op)) = rayon::join(
                || kgz_samples(cfg.solver, p, tau, cfg.t_end, &steps),
                || {
                    rayon::join(
                        || limit_samples(p, NlsVariant::Nls, tau, cfg.t_end, &steps),
                        || limit_samples(p, NlsVariant::Op, tau, cfg.t_end, &steps),
                    )
                },
            );
            let (kgz, nls, op) = (kgz?, nls?, op?);
            let wall = start.elapsed().as_secs_f64();
            steps
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    let (a, b) = (&kgz[i].0, &kgz[i].1);
                    let (np, nh) = eta_metrics((a, b), (&nls[i].0, &nls[i].1), &p.grid)?;
                    let (op_, oh) = eta_metrics((a, b), (&op[i].0, &op[i].1), &p.grid)?;
                    let rec = ErrorRecord {
                        eta_nls_psi: Some(np),
                        eta_nls_phi: Some(nh),
                        eta_op_psi: Some(op_),
                        eta_op_phi: Some(oh),
                        ..base_record(p, tau, k as f64 * tau)
                    };
                    Ok((rec, RowMeta::timed(wall)))
                })
                .collect()
        })
        .collect();
    let mut table = Table::new(Experiment::LimitRates.as_str());
    for rows in per_cell {
        table.rows.extend(rows?);
    }
    table.sort();
    table
        .notes
        .push("eta columns are unscaled L2 distances; divide by eps or eps^2 for the rate plots".into());
    Ok(table)
}

/// Energies at the sampled steps.
pub fn energy_series(solver: Solver, p: &Problem, tau: f64, t_end: f64, steps: &[usize]) -> Result<Vec<f64>> {
    let mut out: Vec<Result<f64>> = Vec::with_capacity(steps.len());
    match solver {
        Solver::Mti => {
            solve_mti_observed(&p.data, &p.params, tau, t_end, &p.grid, |k, st| {
                if steps.binary_search(&k).is_ok() {
                    let r = reconstruct_with_rates(st);
                    out.push(kgz_energy(&r.psi, &r.psidot, &r.phi, &r.phidot, &p.params, &p.grid));
                }
            })?;
        }
        Solver::Ei => {
            solve_ei_observed(&p.data, &p.params, tau, t_end, &p.grid, |k, s| {
                if steps.binary_search(&k).is_ok() {
                    let st = s.state();
                    out.push(kgz_energy(&st.psi, &st.psidot, &st.phi, &st.phidot, &p.params, &p.grid));
                }
            })?;
        }
    }
    out.into_iter().collect()
}

/// Relative energy drift `|E(t) - E(0)| / |E(0)|` at the sampled steps.
pub fn energy(problems: &[Problem], cfg: &RunConfig) -> Result<Table> {
    let cells: Vec<(&Problem, f64)> = problems
        .iter()
        .flat_map(|p| cfg.tau.iter().map(move |&t| (p, t)))
        .collect();
    let per_cell: Vec<Result<(Rows, Option<String>)>> = cells
        .par_iter()
        .map(|&(p, tau)| {
            let start = Instant::now();
            let (_, tau, steps) = sample_steps(cfg, tau)?;
            let e = energy_series(cfg.solver, p, tau, cfg.t_end, &steps)?;
            let wall = start.elapsed().as_secs_f64();
            let e0 = e[0];
            let (scale, note) = if e0 == 0.0 {
                (1.0, Some(format!("eps = {:e}: zero initial energy, drift is absolute", p.params.epsilon)))
            } else {
                (e0.abs(), None)
            };
            let rows = steps
                .iter()
                .zip(&e)
                .map(|(&k, &ek)| {
                    let rec = ErrorRecord {
                        energy_rel_err: Some((ek - e0).abs() / scale),
                        ..base_record(p, tau, k as f64 * tau)
                    };
                    (rec, RowMeta::timed(wall))
                })
                .collect();
            Ok((rows, note))
        })
        .collect();
    let mut table = Table::new(Experiment::Energy.as_str());
    for cell in per_cell {
        let (rows, note) = cell?;
        table.rows.extend(rows);
        table.notes.extend(note);
    }
    table.sort();
    Ok(table)
}

/// Both integrators at large steps against the same fine reference.
pub fn super_resolution(problems: &[Problem], cfg: &RunConfig) -> Result<ExperimentOutput> {
    let (mti, ei) = rayon::join(
        || error_sweep(problems, cfg, Solver::Mti, "super-resolution-mti"),
        || error_sweep(problems, cfg, Solver::Ei, "super-resolution-ei"),
    );
    Ok(ExperimentOutput {
        tables: vec![mti?, ei?],
        files: vec![],
    })
}

fn nearest_node(grid: &SpectralGrid, x: f64) -> usize {
    (0..grid.n())
        .min_by(|&a, &b| (grid.node(a) - x).abs().total_cmp(&(grid.node(b) - x).abs()))
        .unwrap_or(0)
}

/// Largest number of probe rows written per run.
pub const MAX_PROBE_ROWS: usize = 10_000;

/// Field profiles at the snapshot times and a probe time series at the
/// node nearest `probe_x`.
pub fn solve(problems: &[Problem], cfg: &RunConfig) -> Result<ExperimentOutput> {
    let cells: Vec<(&Problem, f64)> = problems
        .iter()
        .flat_map(|p| cfg.tau.iter().map(move |&t| (p, t)))
        .collect();
    let many_tau = cfg.tau.len() > 1;
    let per_cell: Vec<Result<Vec<DataFile>>> = cells
        .par_iter()
        .map(|&(p, tau)| {
            let (n, tau) = step_count(cfg.t_end, tau)?;
            let mut snaps = snapshot_steps(&cfg.snapshots, tau, n)?;
            snaps.push(n);
            snaps.sort_unstable();
            snaps.dedup();
            let stem = if many_tau {
                format!("solve_m0-{}_N-{}_tau-{tau}", p.m0, p.grid.n())
            } else {
                format!("solve_m0-{}_N-{}", p.m0, p.grid.n())
            };
            let probe = nearest_node(&p.grid, cfg.probe_x);
            let stride = n.div_ceil(MAX_PROBE_ROWS).max(1);
            let nodes = p.grid.nodes();
            let mut files = Vec::new();
            let mut probe_file = DataFile::new(format!("{stem}_probe"), &["t", "x", "psi", "phi"]);
            let mut push_probe = |k: usize, psi: &Field, phi: &Field| {
                if k.is_multiple_of(stride) || k == n {
                    probe_file.push_numbers(&[k as f64 * tau, nodes[probe], psi[probe].re, phi[probe].re]);
                }
            };
            match cfg.solver {
                Solver::Mti => {
                    solve_mti_observed(&p.data, &p.params, tau, cfg.t_end, &p.grid, |k, st| {
                        let (psi, phi) = reconstruct(st);
                        push_probe(k, &psi, &phi);
                        if snaps.binary_search(&k).is_ok() {
                            let i = st.fw.at(st.t);
                            let mut f = DataFile::new(
                                format!("{stem}_t-{}", st.t),
                                &["x", "psi", "phi", "z_re", "z_im", "r", "q", "free_wave"],
                            );
                            for j in 0..nodes.len() {
                                f.push_numbers(&[
                                    nodes[j], psi[j].re, phi[j].re, st.z[j].re, st.z[j].im, st.r[j].re, st.q[j].re, i[j].re,
                                ]);
                            }
                            files.push(f);
                        }
                    })?;
                }
                Solver::Ei => {
                    solve_ei_observed(&p.data, &p.params, tau, cfg.t_end, &p.grid, |k, s| {
                        let (psi, phi) = s.fields();
                        push_probe(k, &psi, &phi);
                        if snaps.binary_search(&k).is_ok() {
                            let mut f = DataFile::new(format!("{stem}_t-{}", k as f64 * tau), &["x", "psi", "phi"]);
                            for j in 0..nodes.len() {
                                f.push_numbers(&[nodes[j], psi[j].re, phi[j].re]);
                            }
                            files.push(f);
                        }
                    })?;
                }
            }
            files.push(probe_file);
            Ok(files)
        })
        .collect();
    let mut out = ExperimentOutput::default();
    for files in per_cell {
        out.files.extend(files?);
    }
    Ok(out)
}

/// Closed-form weights next to their quadrature oracles for every mode.
pub fn coeffs_dump(problems: &[Problem], cfg: &RunConfig) -> Result<ExperimentOutput> {
    let cells: Vec<(&Problem, f64)> = problems
        .iter()
        .flat_map(|p| cfg.tau.iter().map(move |&t| (p, t)))
        .collect();
    let per_cell: Vec<Result<DataFile>> = cells
        .par_iter()
        .map(|&(p, tau)| {
            let c = build_coefficients(&p.grid, &p.params, tau)?;
            let n = p.grid.n() as isize;
            let mut f = DataFile::new(
                format!("coeffs-dump_m0-{}_N-{}_tau-{tau}", p.m0, p.grid.n()),
                &["l", "name", "closed_form_re", "closed_form_im", "oracle_re", "oracle_im", "rel_err"],
            );
            for l in -n / 2..n / 2 {
                let m = c.mode(l);
                for name in CoefficientName::ALL {
                    let cf = m.get(name);
                    let or = coefficient_oracle(name, l, &p.params, tau, &p.grid)?;
                    let rel = if or.norm() > 0.0 { (cf - or).norm() / or.norm() } else { cf.norm() };
                    f.rows.push(vec![
                        l.to_string(),
                        name.to_string(),
                        cf.re.to_string(),
                        cf.im.to_string(),
                        or.re.to_string(),
                        or.im.to_string(),
                        rel.to_string(),
                    ]);
                }
            }
            Ok(f)
        })
        .collect();
    let mut out = ExperimentOutput::default();
    for f in per_cell {
        out.files.push(f?);
    }
    Ok(out)
}
