//! Subcommand bodies. Each returns a [`Table`]; `evolve` may also return the
//! error that cut a run short, alongside the rows computed before it.

use dirac_core::dynamics::Multiplier;
use dirac_core::models::{KlauderModel, LatticeMaxwell};
use dirac_core::quantum::{
    evolve_static, evolve_time_dependent, expect_cartesian, expect_phi, expect_phi_quadrature, expect_reduced,
    CircleState, Quadrature, SpectrumTable, PHI_QUADRATURE_INTERVALS,
};
use dirac_core::sampling::SampleRng;
use dirac_core::{
    ChartSpec, DiracStructure, Error, FlowSpec, IntegratorConfig, PhaseSpacePoint, ScalarField,
    Trajectory,
};
use num_complex::Complex64;
use std::sync::Arc;

use crate::config::{self, FlowConfig, FlowKindConfig, InitialState, ModelConfig, ScenarioConfig};
use crate::table::{Cell, Table};
use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SAMPLES: usize = 100;

/// Adaptive tolerance for the phase integrals of a ramped `k(t)`.
const PHASE_TOL: f64 = 1e-13;

pub struct Run {
    pub table: Table,
    pub failure: Option<CliError>,
}

fn canonical(chart: &ChartSpec, a: usize, b: usize) -> f64 {
    let n = chart.n_pairs();
    if a < n && b == a + n {
        1.0
    } else if b < n && a == b + n {
        -1.0
    } else {
        0.0
    }
}

fn pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |a| (a + 1..dim).map(move |b| (a, b)))
}

fn point_columns(chart: &ChartSpec) -> Vec<String> {
    let mut cols = vec!["pair".to_string()];
    cols.extend(chart.labels().iter().cloned());
    cols.extend(["poisson", "dirac", "oracle", "abs_diff"].map(String::from));
    cols
}

fn point_row(chart: &ChartSpec, a: usize, b: usize, z: &[f64], poisson: f64, dirac: f64, oracle: Option<f64>) -> Vec<Cell> {
    let labels = chart.labels();
    let mut row: Vec<Cell> = vec![format!("{}|{}", labels[a], labels[b]).into()];
    row.extend(z.iter().map(|&v| Cell::Num(v)));
    row.push(poisson.into());
    row.push(dirac.into());
    match oracle {
        Some(o) => {
            row.push(o.into());
            row.push((dirac - o).abs().into());
        }
        None => {
            row.push(Cell::Empty);
            row.push(Cell::Empty);
        }
    }
    row
}

/// Coordinate Poisson and Dirac brackets over sampled points, against the
/// model's closed form where one exists.
pub fn brackets(cfg: &ScenarioConfig, seed: u64) -> Result<Table, CliError> {
    let mut rng = SampleRng::new(seed);
    let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let mut worst: f64 = 0.0;
    let mut table;
    match &cfg.model {
        ModelConfig::Klauder { alpha, k, hbar, potential } => {
            let model = config::klauder(*alpha, k, *hbar, potential)?;
            let chart = model.polar_chart();
            let cs = model.constraint_set(&chart).at_time(0.0);
            table = Table::new(point_columns(&chart));
            for _ in 0..samples {
                let x = model.sample_point(&chart, &mut rng);
                let pi = DiracStructure::at(&cs, &x)?.coordinate_matrix();
                for (a, b) in pairs(4) {
                    let labels = chart.labels();
                    let oracle = model.dirac_oracle(&labels[a], &labels[b], x.coords())?;
                    worst = worst.max((pi[(a, b)] - oracle).abs());
                    table.push(point_row(&chart, a, b, x.coords(), canonical(&chart, a, b), pi[(a, b)], Some(oracle)));
                }
            }
        }
        ModelConfig::Particle { mass, spatial_dim } => {
            let model = config::particle(*mass, *spatial_dim)?;
            let chart = model.chart();
            table = Table::new(point_columns(&chart));
            for _ in 0..samples {
                let (x, tau) = model.sample_on_shell(&chart, &mut rng);
                let cs = model.constraint_set(&chart).at_time(tau);
                let pi = DiracStructure::at(&cs, &x)?.coordinate_matrix();
                for (a, b) in pairs(chart.dim()) {
                    let oracle = model.dirac_oracle(a, b, x.coords())?;
                    worst = worst.max((pi[(a, b)] - oracle).abs());
                    table.push(point_row(&chart, a, b, x.coords(), canonical(&chart, a, b), pi[(a, b)], Some(oracle)));
                }
            }
        }
        ModelConfig::Maxwell { side, spacing } => {
            let lattice = config::maxwell(*side, *spacing)?;
            let chart = lattice.chart();
            let blocks = lattice.dirac_blocks()?;
            let p = lattice.projector()?;
            let h = lattice.field_len();
            let labels = chart.labels();
            table = Table::new(["pair", "poisson", "dirac", "oracle", "abs_diff"]);
            for i in 0..h {
                for j in 0..h {
                    let (d, o) = (blocks.ae[(i, j)], p[(i, j)]);
                    worst = worst.max((d - o).abs());
                    table.push(vec![
                        format!("{}|{}", labels[i], labels[h + j]).into(),
                        (if i == j { 1.0 } else { 0.0 }).into(),
                        d.into(),
                        o.into(),
                        (d - o).abs().into(),
                    ]);
                }
            }
            table.note("max_abs_aa", blocks.aa.amax());
            table.note("max_abs_ee", blocks.ee.amax());
        }
        ModelConfig::Custom { positions, momenta, hamiltonian, constraints, range } => {
            let sys = config::custom(positions, momenta, hamiltonian, constraints)?;
            let chart = &sys.chart;
            table = Table::new(point_columns(chart));
            for _ in 0..samples {
                let x = PhaseSpacePoint::new(chart, rng.vector(chart.dim(), -range, *range))?;
                let pi = if sys.constraints.is_empty() {
                    None
                } else {
                    Some(DiracStructure::at(&sys.constraints, &x)?.coordinate_matrix())
                };
                for (a, b) in pairs(chart.dim()) {
                    let poisson = canonical(chart, a, b);
                    let dirac = pi.as_ref().map_or(poisson, |m| m[(a, b)]);
                    table.push(point_row(chart, a, b, x.coords(), poisson, dirac, None));
                }
            }
        }
    }
    table.note("seed", seed.to_string());
    table.note("max_abs_diff", worst);
    Ok(table)
}

fn flow_config(cfg: &ScenarioConfig) -> Result<&FlowConfig, CliError> {
    cfg.flow
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario has no `flow` block".into()))
}

fn coords_for(chart: &Arc<ChartSpec>, init: &InitialState) -> Result<PhaseSpacePoint, CliError> {
    match init {
        InitialState::Coords { values } => Ok(PhaseSpacePoint::new(chart, values.clone())?),
        other => Err(CliError::Config(format!("initial state {other:?} does not apply to this model and flow"))),
    }
}

/// Integrates the configured flow and tabulates `t`, the coordinates, the
/// tracked constraint residuals and `H` when the flow has one.
pub fn evolve(cfg: &ScenarioConfig, seed: u64) -> Result<Run, CliError> {
    let flow_cfg = flow_config(cfg)?;
    let integ = cfg.integrator()?;
    let (x0, flow, energy): (PhaseSpacePoint, FlowSpec, Option<ScalarField>) = match &cfg.model {
        ModelConfig::Klauder { alpha, k, hbar, potential } => {
            let model = config::klauder(*alpha, k, *hbar, potential)?;
            klauder_flow(&model, flow_cfg, &integ)?
        }
        ModelConfig::Particle { mass, spatial_dim } => {
            let model = config::particle(*mass, *spatial_dim)?;
            if flow_cfg.kind != FlowKindConfig::Dirac {
                return Err(CliError::Config("the particle model only supports the dirac flow".into()));
            }
            let chart = model.chart();
            let x0 = match &flow_cfg.initial {
                InitialState::Particle { x, p } => model.on_shell_point(&chart, x, p, integ.t0)?,
                other => coords_for(&chart, other)?,
            };
            (x0, model.dirac_flow(&chart), None)
        }
        ModelConfig::Maxwell { side, spacing } => {
            let lattice = config::maxwell(*side, *spacing)?;
            if flow_cfg.kind != FlowKindConfig::Poisson {
                return Err(CliError::Config("the maxwell model evolves by the poisson flow in Coulomb gauge".into()));
            }
            let (a0, e0) = maxwell_initial(&lattice, &flow_cfg.initial, seed)?;
            let run = lattice.evolve(&a0, &e0, &integ);
            let chart = lattice.chart();
            let h = lattice.hamiltonian(&chart);
            return Ok(finish(run, Some(&h)));
        }
        ModelConfig::Custom { positions, momenta, hamiltonian, constraints, .. } => {
            let sys = config::custom(positions, momenta, hamiltonian, constraints)?;
            let x0 = coords_for(&sys.chart, &flow_cfg.initial)?;
            let flow = match flow_cfg.kind {
                FlowKindConfig::Poisson => {
                    let f = FlowSpec::poisson(sys.hamiltonian.clone());
                    if sys.constraints.is_empty() {
                        f
                    } else {
                        f.with_monitor(sys.constraints.clone())
                    }
                }
                FlowKindConfig::Dirac => FlowSpec::dirac(sys.constraints.clone(), sys.hamiltonian.clone()),
                FlowKindConfig::Gauge => {
                    let first = sys.constraints.entries().first().ok_or_else(|| {
                        CliError::Config("gauge flow needs at least one constraint as generator".into())
                    })?;
                    FlowSpec::gauge(first.field.clone().renamed(first.name.clone()), Multiplier::Constant(flow_cfg.multiplier))
                }
            };
            (x0, flow, sys.hamiltonian)
        }
    };
    let run = dirac_core::evolve(&x0, &flow, &integ);
    Ok(finish(run, energy.as_ref()))
}

fn klauder_flow(
    model: &KlauderModel,
    flow_cfg: &FlowConfig,
    integ: &IntegratorConfig,
) -> Result<(PhaseSpacePoint, FlowSpec, Option<ScalarField>), CliError> {
    match flow_cfg.kind {
        FlowKindConfig::Dirac | FlowKindConfig::Poisson => {
            let chart = model.polar_chart();
            let x0 = match &flow_cfg.initial {
                InitialState::Reduced { phi, p_phi } => model.surface_point(&chart, *phi, *p_phi, integ.t0)?,
                other => coords_for(&chart, other)?,
            };
            let h = model.hamiltonian(&chart);
            let flow = if flow_cfg.kind == FlowKindConfig::Dirac {
                model.dirac_flow(&chart)
            } else {
                FlowSpec::poisson(Some(h.clone())).with_monitor(model.constraint_set(&chart))
            };
            Ok((x0, flow, Some(h)))
        }
        FlowKindConfig::Gauge => {
            let chart = model.cartesian_chart();
            let x0 = match &flow_cfg.initial {
                InitialState::Reduced { phi, p_phi } => {
                    let polar = model.surface_point(&model.polar_chart(), *phi, *p_phi, integ.t0)?;
                    PhaseSpacePoint::new(&chart, KlauderModel::polar_to_cartesian(polar.coords()).to_vec())?
                }
                other => coords_for(&chart, other)?,
            };
            let flow = model.gauge_flow(&chart, Multiplier::Constant(flow_cfg.multiplier));
            Ok((x0, flow, None))
        }
    }
}

fn maxwell_initial(lattice: &LatticeMaxwell, init: &InitialState, seed: u64) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    match init {
        InitialState::Mode { n, eta } => {
            let (a, _) = lattice.transverse_mode(*n, *eta)?;
            Ok((a, vec![0.0; lattice.field_len()]))
        }
        InitialState::Random => {
            let mut rng = SampleRng::new(seed);
            let a = lattice.random_transverse(&mut rng)?;
            let e = lattice.random_transverse(&mut rng)?;
            Ok((a, e))
        }
        InitialState::Coords { values } => {
            let h = lattice.field_len();
            if values.len() != 2 * h {
                return Err(CliError::Config(format!("expected {} coordinates, got {}", 2 * h, values.len())));
            }
            Ok((values[..h].to_vec(), values[h..].to_vec()))
        }
        other => Err(CliError::Config(format!("initial state {other:?} does not apply to the maxwell model"))),
    }
}

fn finish(run: dirac_core::Result<Trajectory>, energy: Option<&ScalarField>) -> Run {
    match run {
        Ok(traj) => Run {
            table: trajectory_table(&traj, energy),
            failure: None,
        },
        Err(Error::FlowInterrupted { step, cause, partial }) => {
            let mut table = trajectory_table(&partial, energy);
            table.note("interrupted_at_step", step.to_string());
            table.note("cause", cause.to_string());
            Run {
                table,
                failure: Some(CliError::from(Error::FlowInterrupted { step, cause, partial })),
            }
        }
        Err(e) => Run {
            table: Table::default(),
            failure: Some(e.into()),
        },
    }
}

pub fn trajectory_table(traj: &Trajectory, energy: Option<&ScalarField>) -> Table {
    let mut cols = vec!["t".to_string()];
    cols.extend(traj.chart().labels().iter().cloned());
    cols.extend(traj.residual_names().iter().map(|n| format!("residual_{n}")));
    if energy.is_some() {
        cols.push("H".into());
    }
    let mut table = Table::new(cols);
    let names = traj.residual_names();
    let mut max_res = vec![0.0f64; names.len()];
    let h0 = energy.and_then(|h| traj.states().first().map(|z| h.value_at(z)));
    let mut drift: f64 = 0.0;
    for ((t, z), res) in traj.times().iter().zip(traj.states()).zip(traj.residuals()) {
        let mut row: Vec<Cell> = vec![Cell::Num(*t)];
        row.extend(z.iter().map(|&v| Cell::Num(v)));
        row.extend(res.iter().map(|&v| Cell::Num(v)));
        for (m, r) in max_res.iter_mut().zip(res) {
            *m = m.max(*r);
        }
        if let (Some(h), Some(h0)) = (energy, h0) {
            let e = h.value_at(z);
            drift = drift.max((e - h0).abs());
            row.push(e.into());
        }
        table.push(row);
    }
    table.note("steps", traj.len().saturating_sub(1).to_string());
    for (n, m) in names.iter().zip(&max_res) {
        table.note(format!("max_residual_{n}"), *m);
    }
    if let Some(last) = traj.residuals().last() {
        for (n, r) in names.iter().zip(last) {
            table.note(format!("final_residual_{n}"), *r);
        }
    }
    if h0.is_some() {
        table.note("max_abs_H_drift", drift);
    }
    table
}

/// Expectation values of a Klauder circle state on a time grid.
pub fn quantum(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let q = cfg
        .quantum
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario has no `quantum` block".into()))?;
    let model = match &cfg.model {
        ModelConfig::Klauder { alpha, k, hbar, potential } => config::klauder(*alpha, k, *hbar, potential)?,
        _ => return Err(CliError::Config("the quantum command needs the klauder model".into())),
    };
    let modes: Vec<(i64, Complex64)> = q.coeffs.iter().map(|&(m, re, im)| (m, Complex64::new(re, im))).collect();
    let s0 = CircleState::from_modes(q.m_max, model.hbar, &modes)
        .and_then(|s| s.normalize())
        .map_err(|e| CliError::Config(format!("bad coefficients: {e}")))?;
    let intervals = q.quadrature_intervals.unwrap_or(PHI_QUADRATURE_INTERVALS);
    let static_table = SpectrumTable::new(&model, q.m_max)?;

    let mut table = Table::new([
        "t",
        "r_mean",
        "pr_mean",
        "pphi_mean",
        "phi_mean_analytic",
        "phi_mean_quadrature",
        "re_xy",
        "im_xy",
        "re_pxy",
        "im_pxy",
        "norm",
    ]);
    let mut phi_diff: f64 = 0.0;
    let mut norm_dev: f64 = 0.0;
    for t in q.times.points()? {
        // The state is carried to `t` first; expectations then use the spectrum at `t`.
        let (st, spec) = if model.is_time_dependent() {
            let st = evolve_time_dependent(&s0, &model, 0.0, t, Quadrature::Adaptive { tol: PHASE_TOL })?;
            (st, SpectrumTable::at_time(&model, q.m_max, t)?)
        } else {
            (evolve_static(&s0, &static_table, t)?, static_table.clone())
        };
        let (r, pr, pphi) = expect_reduced(&st, &spec)?;
        let phi = expect_phi(&st, &spec, 0.0)?;
        let phi_q = expect_phi_quadrature(&st, &spec, 0.0, intervals)?;
        let (xy, pxy) = expect_cartesian(&st, &spec, 0.0)?;
        let norm = st.norm_sqr();
        phi_diff = phi_diff.max((phi.mean - phi_q).abs());
        norm_dev = norm_dev.max((norm - 1.0).abs());
        table.push(
            [t, r, pr, pphi, phi.mean, phi_q, xy.re, xy.im, pxy.re, pxy.im, norm]
                .into_iter()
                .map(Cell::Num)
                .collect(),
        );
    }
    table.note("max_phi_analytic_vs_quadrature", phi_diff);
    table.note("max_norm_deviation", norm_dev);
    Ok(table)
}

/// Lattice summary: projector identities of the Dirac brackets and, when an
/// integrator is configured, energy and constraint residuals along the flow.
pub fn maxwell(cfg: &ScenarioConfig, seed: u64) -> Result<Run, CliError> {
    let lattice = match &cfg.model {
        ModelConfig::Maxwell { side, spacing } => config::maxwell(*side, *spacing)?,
        _ => return Err(CliError::Config("the maxwell command needs the maxwell model".into())),
    };
    let blocks = lattice.dirac_blocks()?;
    let p = lattice.projector()?;
    let proj_diff = (&blocks.ae - &p).amax();
    let idem = (&p * &p - &p).amax();
    let sym = (&p - p.transpose()).amax();

    let mut table = Table::new(["t", "energy", "energy_rel_drift", "max_gauss", "max_coulomb"]);
    let mut failure = None;
    if let Some(spec) = &cfg.integrator {
        let init = cfg.flow.as_ref().map(|f| f.initial.clone()).unwrap_or(InitialState::Random);
        let (a0, e0) = maxwell_initial(&lattice, &init, seed)?;
        let traj = match lattice.evolve(&a0, &e0, &spec.build()) {
            Ok(t) => Some(t),
            Err(Error::FlowInterrupted { step, cause, partial }) => {
                let t = (*partial).clone();
                failure = Some(CliError::from(Error::FlowInterrupted { step, cause, partial }));
                Some(t)
            }
            Err(e) => return Err(e.into()),
        };
        if let Some(traj) = traj {
            let n_constraints = lattice.n_sites() - 1;
            let e0 = traj.states().first().map(|z| lattice.energy(z)).unwrap_or(0.0);
            let (mut drift, mut gauss, mut coulomb): (f64, f64, f64) = (0.0, 0.0, 0.0);
            for ((t, z), res) in traj.times().iter().zip(traj.states()).zip(traj.residuals()) {
                let e = lattice.energy(z);
                let rel = (e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE);
                let (chi, g) = res.split_at(n_constraints);
                let c_max = chi.iter().copied().fold(0.0, f64::max);
                let g_max = g.iter().copied().fold(0.0, f64::max);
                drift = drift.max(rel);
                gauss = gauss.max(g_max);
                coulomb = coulomb.max(c_max);
                table.push(vec![(*t).into(), e.into(), rel.into(), g_max.into(), c_max.into()]);
            }
            table.note("max_energy_rel_drift", drift);
            table.note("max_gauss_residual", gauss);
            table.note("max_coulomb_residual", coulomb);
        }
    }
    table.note("side", lattice.side().to_string());
    table.note("max_abs_dirac_minus_projector", proj_diff);
    table.note("max_abs_projector_idempotency", idem);
    table.note("max_abs_projector_asymmetry", sym);
    table.note("max_abs_aa", blocks.aa.amax());
    table.note("max_abs_ee", blocks.ee.amax());
    table.note("projector_trace", p.trace());
    Ok(Run { table, failure })
}
