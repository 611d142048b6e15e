//! Hamiltonian, Dirac-constrained and gauge flows integrated with RK4.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bracket::{checked_gradient, hamiltonian_vector};
use crate::chart::{ChartSpec, PhaseSpacePoint};
use crate::constraint::{ConstraintSet, DiracStructure, ON_SURFACE_TOL};
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Coordinates beyond this magnitude abort an integration.
pub const BLOW_UP_LIMIT: f64 = 1e12;

/// Lagrange multiplier `λ(t)` of a gauge flow.
#[derive(Clone)]
pub enum Multiplier {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Multiplier {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Multiplier::Constant(c) => *c,
            Multiplier::Function(f) => f(t),
        }
    }
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplier::Constant(c) => write!(f, "Constant({c})"),
            Multiplier::Function(_) => f.write_str("Function"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum FlowKind {
    /// `ż = {z, H}`.
    HamiltonianPoisson,
    /// `ż = {z, H}_D` tangent to the (possibly time-dependent) surface of a second-class set.
    HamiltonianDirac(ConstraintSet),
    /// `ż = λ(t)·{z, G}` with a first-class generator `G`.
    Gauge {
        generator: ScalarField,
        multiplier: Multiplier,
    },
}

#[derive(Clone, Debug)]
pub struct FlowSpec {
    kind: FlowKind,
    hamiltonian: Option<ScalarField>,
    monitor: Option<ConstraintSet>,
}

impl FlowSpec {
    pub fn poisson(hamiltonian: Option<ScalarField>) -> Self {
        FlowSpec {
            kind: FlowKind::HamiltonianPoisson,
            hamiltonian,
            monitor: None,
        }
    }

    /// A Dirac flow may have no Hamiltonian: time-dependent constraints alone
    /// then drive the motion along the moving surface.
    pub fn dirac(cs: ConstraintSet, hamiltonian: Option<ScalarField>) -> Self {
        FlowSpec {
            kind: FlowKind::HamiltonianDirac(cs),
            hamiltonian,
            monitor: None,
        }
    }

    pub fn gauge(generator: ScalarField, multiplier: Multiplier) -> Self {
        FlowSpec {
            kind: FlowKind::Gauge {
                generator,
                multiplier,
            },
            hamiltonian: None,
            monitor: None,
        }
    }

    /// Extra constraints whose residuals are recorded along the trajectory.
    pub fn with_monitor(mut self, cs: ConstraintSet) -> Self {
        self.monitor = Some(cs);
        self
    }

    pub fn kind(&self) -> &FlowKind {
        &self.kind
    }

    pub fn hamiltonian(&self) -> Option<&ScalarField> {
        self.hamiltonian.as_ref()
    }

    /// Constraints tracked in the trajectory residuals: the Dirac set, the
    /// gauge generator, then any monitor set.
    fn residual_set(&self, chart: &Arc<ChartSpec>) -> Result<ConstraintSet> {
        let mut fields: Vec<ScalarField> = Vec::new();
        let mut drives = Vec::new();
        match &self.kind {
            FlowKind::HamiltonianDirac(cs) => {
                for c in cs.entries() {
                    fields.push(c.field.clone().renamed(c.name.clone()));
                    drives.push((c.name.clone(), c.drive.clone()));
                }
            }
            FlowKind::Gauge { generator, .. } => fields.push(generator.clone()),
            FlowKind::HamiltonianPoisson => {}
        }
        if let Some(m) = &self.monitor {
            for c in m.entries() {
                if fields.iter().any(|f| f.name() == c.name) {
                    continue;
                }
                fields.push(c.field.clone().renamed(c.name.clone()));
                drives.push((c.name.clone(), c.drive.clone()));
            }
        }
        let mut set = ConstraintSet::new_unchecked(chart, fields);
        for (name, drive) in drives {
            if let Some(d) = drive {
                set = set.with_drive(&name, d)?;
            }
        }
        Ok(set)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projection {
    None,
    /// Minimal-norm Newton correction `z ← z − Jᵀ(JJᵀ)⁻¹Φ(z)` after each step.
    PostStepNewton { tol: f64, max_iter: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub projection: Projection,
    pub t0: f64,
}

impl IntegratorConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        IntegratorConfig {
            dt,
            steps,
            scheme: Scheme::Rk4,
            projection: Projection::None,
            t0: 0.0,
        }
    }

    pub fn with_projection(mut self, projection: Projection) -> Self {
        self.projection = projection;
        self
    }

    pub fn starting_at(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.dt * self.steps as f64).is_finite() || !self.t0.is_finite() {
            return Err(Error::usage(format!(
                "invalid integrator settings: dt = {}, steps = {}",
                self.dt, self.steps
            )));
        }
        if let Projection::PostStepNewton { tol, .. } = self.projection {
            if !(tol > 0.0) {
                return Err(Error::usage("projection tolerance must be positive"));
            }
        }
        Ok(())
    }
}

/// Time-stamped states with per-step constraint residuals `|Φ_I|`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    chart: Arc<ChartSpec>,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    residual_names: Vec<String>,
    residuals: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(chart: &Arc<ChartSpec>, residual_names: Vec<String>) -> Self {
        Trajectory {
            chart: Arc::clone(chart),
            times: Vec::new(),
            states: Vec::new(),
            residual_names,
            residuals: Vec::new(),
        }
    }

    /// Appends a step; times must increase strictly.
    pub fn push(&mut self, t: f64, state: Vec<f64>, residuals: Vec<f64>) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::usage(format!("time {t} does not follow {last}")));
            }
        }
        if state.len() != self.chart.dim() || residuals.len() != self.residual_names.len() {
            return Err(Error::usage("trajectory row has the wrong width"));
        }
        self.times.push(t);
        self.states.push(state);
        self.residuals.push(residuals);
        Ok(())
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        &self.chart
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn residual_names(&self) -> &[String] {
        &self.residual_names
    }

    /// Row `i` holds `|Φ_I|` for every residual name at step `i`.
    pub fn residuals(&self) -> &[Vec<f64>] {
        &self.residuals
    }

    pub fn point(&self, i: usize) -> Result<PhaseSpacePoint> {
        PhaseSpacePoint::new(&self.chart, self.states[i].clone())
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    /// Series of one coordinate.
    pub fn coordinate(&self, label: &str) -> Result<Vec<f64>> {
        let i = self.chart.index_of(label)?;
        Ok(self.states.iter().map(|s| s[i]).collect())
    }
}

/// One classical RK4 step of `ż = f(t, z)`.
pub fn rk4_step<F>(f: &mut F, t: f64, z: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: f64, x: &[f64], y: &[f64]| -> Vec<f64> {
        y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
    };
    let k1 = f(t, z)?;
    let k2 = f(t + 0.5 * dt, &axpy(0.5 * dt, &k1, z))?;
    let k3 = f(t + 0.5 * dt, &axpy(0.5 * dt, &k2, z))?;
    let k4 = f(t + dt, &axpy(dt, &k3, z))?;
    Ok(z
        .iter()
        .enumerate()
        .map(|(i, zi)| zi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn check_blow_up(z: &[f64], t: f64) -> Result<()> {
    match z
        .iter()
        .position(|v| !v.is_finite() || v.abs() > BLOW_UP_LIMIT)
    {
        Some(index) => Err(Error::BlowUp {
            index,
            value: z[index],
            time: t,
        }),
        None => Ok(()),
    }
}

fn vector_field(flow: &FlowSpec, chart: &ChartSpec, t: f64, z: &[f64]) -> Result<Vec<f64>> {
    let grad_h = flow
        .hamiltonian
        .as_ref()
        .map(|h| checked_gradient(h, z, chart))
        .transpose()?;
    match &flow.kind {
        FlowKind::HamiltonianPoisson => Ok(match grad_h {
            Some(g) => hamiltonian_vector(&g),
            None => vec![0.0; z.len()],
        }),
        FlowKind::HamiltonianDirac(cs) => {
            let ds = DiracStructure::at_coords(cs, z)?;
            Ok(ds.vector_field(grad_h.as_deref(), &cs.time_rates(t)))
        }
        FlowKind::Gauge {
            generator,
            multiplier,
        } => {
            let lambda = multiplier.at(t);
            let g = checked_gradient(generator, z, chart)?;
            Ok(hamiltonian_vector(&g).into_iter().map(|v| lambda * v).collect())
        }
    }
}

/// Newton projection onto `Φ(z, t) = 0` along the constraint normals.
pub fn project_to_surface(
    cs: &ConstraintSet,
    z: &[f64],
    t: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let mut z = z.to_vec();
    for _ in 0..max_iter {
        let r = cs.residuals_at(&z, t);
        if r.iter().all(|v| v.abs() < tol) {
            break;
        }
        let grads = cs.gradients_at(&z)?;
        let m = grads.len();
        let jac = DMatrix::from_fn(m, z.len(), |i, a| grads[i][a]);
        let gram = &jac * jac.transpose();
        let y = gram
            .lu()
            .solve(&DVector::from_vec(r))
            .ok_or_else(|| Error::Degenerate {
                det: 0.0,
                threshold: 0.0,
                point: z.clone(),
            })?;
        let dz = jac.transpose() * y;
        for (zi, d) in z.iter_mut().zip(dz.iter()) {
            *zi -= d;
        }
    }
    Ok(z)
}

/// Integrates `flow` from `x0` with RK4, recording `|Φ_I|` after every step.
///
/// Numerical failures mid-run come back as [`Error::FlowInterrupted`] carrying
/// every completed step.
pub fn evolve(x0: &PhaseSpacePoint, flow: &FlowSpec, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let chart = Arc::clone(x0.chart());
    if let Some(h) = &flow.hamiltonian {
        h.ensure_chart(&chart)?;
    }
    match &flow.kind {
        FlowKind::HamiltonianDirac(cs) => {
            cs.check_chart(&chart)?;
            for (c, r) in cs.entries().iter().zip(cs.residuals_at(x0.coords(), cfg.t0)) {
                if !(r.abs() < 1e-8) {
                    return Err(Error::usage(format!(
                        "initial point is off the constraint surface: |{}| = {:e}",
                        c.name,
                        r.abs()
                    )));
                }
            }
            // Second-class at the start or fail now.
            DiracStructure::at_coords(cs, x0.coords())?;
        }
        FlowKind::Gauge { generator, .. } => generator.ensure_chart(&chart)?,
        FlowKind::HamiltonianPoisson => {}
    }
    let tracked = flow.residual_set(&chart)?;
    let names: Vec<String> = tracked.names().into_iter().map(String::from).collect();
    let residual_row = |z: &[f64], t: f64| -> Vec<f64> {
        tracked.residuals_at(z, t).into_iter().map(f64::abs).collect()
    };

    let mut traj = Trajectory::new(&chart, names);
    let mut z = x0.coords().to_vec();
    let mut t = cfg.t0;
    traj.push(t, z.clone(), residual_row(&z, t))?;

    let mut field = |t: f64, z: &[f64]| vector_field(flow, &chart, t, z);
    for step in 1..=cfg.steps {
        let t_next = cfg.t0 + step as f64 * cfg.dt;
        let advanced = rk4_step(&mut field, t, &z, cfg.dt)
            .and_then(|next| {
                check_blow_up(&next, t_next)?;
                match (cfg.projection, &flow.kind) {
                    (Projection::PostStepNewton { tol, max_iter }, FlowKind::HamiltonianDirac(cs)) => {
                        project_to_surface(cs, &next, t_next, tol, max_iter)
                    }
                    _ => Ok(next),
                }
            });
        match advanced {
            Ok(next) => {
                z = next;
                t = t_next;
                traj.push(t, z.clone(), residual_row(&z, t))?;
            }
            Err(cause) => {
                return Err(Error::FlowInterrupted {
                    step,
                    cause: Box::new(cause),
                    partial: Box::new(traj),
                })
            }
        }
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub names: Vec<String>,
    pub max_residual: Vec<f64>,
    /// Least-squares slope of `|Φ_I|` against time.
    pub growth_rate: Vec<f64>,
}

/// Residual statistics of `cs` re-evaluated along `traj`.
pub fn constraint_drift(traj: &Trajectory, cs: &ConstraintSet) -> DriftReport {
    let m = cs.len();
    let mut max_residual = vec![0.0f64; m];
    let series: Vec<Vec<f64>> = traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(&t, z)| cs.residuals_at(z, t).into_iter().map(f64::abs).collect())
        .collect();
    for row in &series {
        for (mx, r) in max_residual.iter_mut().zip(row) {
            *mx = mx.max(*r);
        }
    }
    let times = traj.times();
    let growth_rate = (0..m)
        .map(|i| linear_slope(times, series.iter().map(|row| row[i])))
        .collect();
    DriftReport {
        names: cs.names().into_iter().map(String::from).collect(),
        max_residual,
        growth_rate,
    }
}

fn linear_slope(t: &[f64], y: impl Iterator<Item = f64>) -> f64 {
    let y: Vec<f64> = y.collect();
    let n = t.len() as f64;
    if t.len() < 2 {
        return 0.0;
    }
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (num, den) = t.iter().zip(&y).fold((0.0, 0.0), |(num, den), (ti, yi)| {
        (num + (ti - tm) * (yi - ym), den + (ti - tm) * (ti - tm))
    });
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Closed-form gauge orbit of `½(p·p − α²q·q)` after accumulated multiplier `T`:
/// `q(T) = q cosh(αT) + (p/α) sinh(αT)`, `p(T) = p cosh(αT) + α q sinh(αT)`.
pub fn gauge_closed_form_klauder(
    q0: &[f64],
    p0: &[f64],
    alpha: f64,
    big_t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::usage("closed-form gauge orbit needs a non-zero finite alpha"));
    }
    if q0.len() != p0.len() {
        return Err(Error::usage("q and p must have the same length"));
    }
    let (c, s) = ((alpha * big_t).cosh(), (alpha * big_t).sinh());
    let q = q0.iter().zip(p0).map(|(q, p)| q * c + p / alpha * s).collect();
    let p = q0.iter().zip(p0).map(|(q, p)| p * c + alpha * q * s).collect();
    Ok((q, p))
}

/// Multiplier that keeps `q·p − k(t)` fixed under the gauge flow:
/// `λ = k̇ / (|p|² + α²|q|²)` on a Cartesian chart `(q.., p..)`.
pub fn multiplier_from_gauge(x: &PhaseSpacePoint, kdot: f64, alpha: f64) -> Result<f64> {
    let z = x.coords();
    let n = z.len() / 2;
    let denom: f64 = (0..n).map(|i| z[n + i] * z[n + i] + alpha * alpha * z[i] * z[i]).sum();
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "gauge multiplier undefined at {z:?}: |p|² + α²|q|² = 0"
        )));
    }
    Ok(kdot / denom)
}

/// Largest recorded residual over the whole trajectory.
pub fn max_residual(traj: &Trajectory) -> f64 {
    traj.residuals()
        .iter()
        .flat_map(|r| r.iter().copied())
        .fold(0.0, f64::max)
}

/// True when `z` is within [`ON_SURFACE_TOL`] of the surface of `cs` at time `t`.
pub fn is_on_surface(cs: &ConstraintSet, z: &[f64], t: f64) -> bool {
    cs.residuals_at(z, t).iter().all(|r| r.abs() < ON_SURFACE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    fn chart1() -> Arc<ChartSpec> {
        Arc::new(ChartSpec::new(&["q"], &["p"]).unwrap())
    }

    #[test]
    fn closed_form_identities() {
        let (q, p) = gauge_closed_form_klauder(&[0.3, -1.0], &[2.0, 0.5], 1.7, 0.0).unwrap();
        assert_eq!((q, p), (vec![0.3, -1.0], vec![2.0, 0.5]));

        let e = std::f64::consts::E;
        let (q, p) = gauge_closed_form_klauder(&[1.0, 0.0], &[1.0, 0.0], 1.0, 1.0).unwrap();
        assert!((q[0] - e).abs() < 1e-15 && (p[0] - e).abs() < 1e-15);
        assert_eq!((q[1], p[1]), (0.0, 0.0));

        let (q, p) = gauge_closed_form_klauder(&[1.0, 0.0], &[-1.0, 0.0], 1.0, 1.0).unwrap();
        assert!((q[0] - 1.0 / e).abs() < 1e-15 && (p[0] + 1.0 / e).abs() < 1e-15);

        assert!(gauge_closed_form_klauder(&[1.0], &[1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let c = Arc::new(ChartSpec::new(&["q1", "q2"], &["p1", "p2"]).unwrap());
        let x = PhaseSpacePoint::new(&c, vec![1.0, 0.0, 2.0, 0.0]).unwrap();
        assert_eq!(multiplier_from_gauge(&x, 5.0, 1.0).unwrap(), 1.0);
        assert_eq!(multiplier_from_gauge(&x, 0.0, 1.0).unwrap(), 0.0);
        // On C = 0 with r = 1: |p| = α r, denominator 2α²r².
        let on = PhaseSpacePoint::new(&c, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(multiplier_from_gauge(&on, 2.0, 1.0).unwrap(), 1.0);
        let origin = PhaseSpacePoint::new(&c, vec![0.0; 4]).unwrap();
        assert!(matches!(multiplier_from_gauge(&origin, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_hamiltonian_is_the_identity_flow() {
        let c = chart1();
        let x0 = PhaseSpacePoint::new(&c, vec![0.4, -0.9]).unwrap();
        let traj = evolve(&x0, &FlowSpec::poisson(None), &IntegratorConfig::new(0.1, 20)).unwrap();
        assert_eq!(traj.len(), 21);
        assert!(traj.states().iter().all(|s| s == &vec![0.4, -0.9]));
    }

    #[test]
    fn harmonic_oscillator_matches_cosine() {
        let c = chart1();
        let h = ScalarField::from_dual(&c, "H", |z| 0.5 * (z[0] * z[0] + z[1] * z[1]));
        let x0 = PhaseSpacePoint::new(&c, vec![1.0, 0.0]).unwrap();
        let traj = evolve(&x0, &FlowSpec::poisson(Some(h)), &IntegratorConfig::new(1e-3, 2000)).unwrap();
        let last = traj.last_state().unwrap();
        assert!((last[0] - 2.0f64.cos()).abs() < 1e-11);
        assert!((last[1] + 2.0f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn blow_up_is_reported_with_partial_trajectory() {
        let c = chart1();
        // q̇ = q², finite-time singularity at t = 1 for q0 = 1.
        let h = ScalarField::from_dual(&c, "H", |z| z[0] * z[0] * z[1]);
        let x0 = PhaseSpacePoint::new(&c, vec![1.0, 1.0]).unwrap();
        match evolve(&x0, &FlowSpec::poisson(Some(h)), &IntegratorConfig::new(1e-2, 500)) {
            Err(Error::FlowInterrupted { cause, partial, .. }) => {
                assert!(matches!(*cause, Error::BlowUp { .. }));
                assert!(!partial.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn steps_zero_gives_single_row() {
        let c = chart1();
        let x0 = PhaseSpacePoint::new(&c, vec![1.0, 2.0]).unwrap();
        let traj = evolve(&x0, &FlowSpec::poisson(None), &IntegratorConfig::new(0.1, 0)).unwrap();
        assert_eq!(traj.len(), 1);
    }

    #[test]
    fn newton_projection_returns_to_surface() {
        let c = Arc::new(ChartSpec::new(&["q1", "q2"], &["p1", "p2"]).unwrap());
        let circle = ScalarField::from_dual(&c, "circle", |z| z[0] * z[0] + z[1] * z[1] - Dual::constant(1.0));
        let cs = ConstraintSet::new(&c, vec![circle]).unwrap();
        let z = project_to_surface(&cs, &[1.1, 0.2, 0.0, 0.0], 0.0, 1e-12, 10).unwrap();
        assert!(cs.residuals_at(&z, 0.0)[0].abs() < 1e-12);
    }

    #[test]
    fn drift_of_constant_trajectory_is_flat() {
        let c = chart1();
        let phi = ScalarField::from_dual(&c, "phi", |z| z[0] - Dual::constant(0.1));
        let cs = ConstraintSet::new(&c, vec![phi]).unwrap();
        let x0 = PhaseSpacePoint::new(&c, vec![0.3, 0.0]).unwrap();
        let traj = evolve(&x0, &FlowSpec::poisson(None), &IntegratorConfig::new(0.1, 10)).unwrap();
        let rep = constraint_drift(&traj, &cs);
        assert!((rep.max_residual[0] - 0.2).abs() < 1e-15);
        assert_eq!(rep.growth_rate[0], 0.0);
    }
}
