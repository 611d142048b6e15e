//! Constraint sets, First/Second Class classification and Dirac brackets.
//!
//! For constraints `Φ_1..Φ_M` with `M_IJ = {Φ_I, Φ_J}` invertible,
//!
//! ```text
//! {A, B}_D = {A, B} − {A, Φ_I} (M⁻¹)^{IJ} {Φ_J, B}
//! ```
//!
//! [`DiracStructure`] factorizes `M` once at a point and then serves pairwise
//! brackets, the full coordinate bracket matrix and constrained vector fields.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bracket::{checked_gradient, hamiltonian_vector, symplectic_product};
use crate::chart::{ChartSpec, PhaseSpacePoint};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linalg::{rank_full_pivot, row_norm_scale};

/// `|det M| ≤ DEGENERACY_TOL · max(1, Π‖row‖)` counts as singular.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Largest `|Φ_I|` accepted for a point said to lie on the constraint surface.
pub const ON_SURFACE_TOL: f64 = 1e-9;

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Explicit time dependence of a constraint: `Φ(x, t) = f(x) − g(t)`.
#[derive(Clone)]
pub struct TimeDrive {
    value: TimeFn,
    rate: TimeFn,
}

impl TimeDrive {
    /// `value` is `g(t)`, `rate` is `g'(t)`.
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        rate: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TimeDrive {
            value: Arc::new(value),
            rate: Arc::new(rate),
        }
    }

    /// `g(t) = c0 + c1·t`.
    pub fn affine(c0: f64, c1: f64) -> Self {
        TimeDrive::new(move |t| c0 + c1 * t, move |_| c1)
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn rate(&self, t: f64) -> f64 {
        (self.rate)(t)
    }
}

impl fmt::Debug for TimeDrive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TimeDrive")
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub name: String,
    pub field: ScalarField,
    pub drive: Option<TimeDrive>,
}

/// Ordered constraints and auxiliary conditions `Φ_1..Φ_M`, evaluated at a
/// fixed time for any explicitly time-dependent members.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    chart: Arc<ChartSpec>,
    entries: Vec<Constraint>,
    time: f64,
}

impl ConstraintSet {
    /// Names are taken from the fields. `M ≤ 2N` is enforced.
    pub fn new(chart: &Arc<ChartSpec>, fields: Vec<ScalarField>) -> Result<Self> {
        if fields.len() > chart.dim() {
            return Err(Error::usage(format!(
                "{} constraints exceed phase-space dimension {}",
                fields.len(),
                chart.dim()
            )));
        }
        for f in &fields {
            f.ensure_chart(chart)?;
        }
        Ok(ConstraintSet {
            chart: Arc::clone(chart),
            entries: fields
                .into_iter()
                .map(|f| Constraint {
                    name: f.name().to_string(),
                    field: f,
                    drive: None,
                })
                .collect(),
            time: 0.0,
        })
    }

    /// Residual bookkeeping only: skips the `M ≤ 2N` check.
    pub(crate) fn new_unchecked(chart: &Arc<ChartSpec>, fields: Vec<ScalarField>) -> Self {
        ConstraintSet {
            chart: Arc::clone(chart),
            entries: fields
                .into_iter()
                .map(|f| Constraint {
                    name: f.name().to_string(),
                    field: f,
                    drive: None,
                })
                .collect(),
            time: 0.0,
        }
    }

    /// No constraints: Dirac brackets reduce to Poisson brackets.
    pub fn empty(chart: &Arc<ChartSpec>) -> Self {
        ConstraintSet {
            chart: Arc::clone(chart),
            entries: Vec::new(),
            time: 0.0,
        }
    }

    pub fn with_drive(mut self, name: &str, drive: TimeDrive) -> Result<Self> {
        let entry = self
            .entries
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::usage(format!("no constraint named `{name}`")))?;
        entry.drive = Some(drive);
        Ok(self)
    }

    /// The same set with explicit time dependence frozen at `t`.
    pub fn at_time(&self, t: f64) -> Self {
        ConstraintSet {
            time: t,
            ..self.clone()
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        &self.chart
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Second-class sets must have an even number of members.
    pub fn has_even_count(&self) -> bool {
        self.entries.len() % 2 == 0
    }

    pub fn entries(&self) -> &[Constraint] {
        &self.entries
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.entries.iter().any(|c| c.drive.is_some())
    }

    pub fn residuals(&self, x: &PhaseSpacePoint) -> Result<Vec<f64>> {
        self.check_chart(x.chart())?;
        Ok(self.residuals_at(x.coords(), self.time))
    }

    pub fn residuals_at(&self, z: &[f64], t: f64) -> Vec<f64> {
        self.entries
            .iter()
            .map(|c| c.field.value_at(z) - c.drive.as_ref().map_or(0.0, |d| d.value(t)))
            .collect()
    }

    /// Explicit partial time derivatives `∂Φ_I/∂t`.
    pub fn time_rates(&self, t: f64) -> Vec<f64> {
        self.entries
            .iter()
            .map(|c| c.drive.as_ref().map_or(0.0, |d| -d.rate(t)))
            .collect()
    }

    pub(crate) fn gradients_at(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.entries
            .iter()
            .map(|c| checked_gradient(&c.field, z, &self.chart))
            .collect()
    }

    pub(crate) fn check_chart(&self, chart: &ChartSpec) -> Result<()> {
        if self.chart.same_as(chart) {
            Ok(())
        } else {
            Err(Error::usage("constraint set and point use different charts"))
        }
    }

    fn check_on_surface(&self, z: &[f64]) -> Result<()> {
        for (c, r) in self.entries.iter().zip(self.residuals_at(z, self.time)) {
            if !(r.abs() < ON_SURFACE_TOL) {
                return Err(Error::usage(format!(
                    "sample {z:?} is off the constraint surface: |{}| = {:e}",
                    c.name,
                    r.abs()
                )));
            }
        }
        Ok(())
    }
}

/// `M_IJ = {Φ_I, Φ_J}` at `x`.
pub fn constraint_matrix(cs: &ConstraintSet, x: &PhaseSpacePoint) -> Result<DMatrix<f64>> {
    cs.check_chart(x.chart())?;
    let grads = cs.gradients_at(x.coords())?;
    Ok(matrix_from_gradients(&grads))
}

fn matrix_from_gradients(grads: &[Vec<f64>]) -> DMatrix<f64> {
    let m = grads.len();
    DMatrix::from_fn(m, m, |i, j| symplectic_product(&grads[i], &grads[j]))
}

/// How singularity of `M` is decided.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DegeneracyTest {
    /// `|det M| ≤ tol · max(1, Π‖row‖)`.
    Determinant(f64),
    /// Numerical rank below `M` with complete pivoting at relative cutoff `tol`.
    /// The Hadamard-normalized determinant shrinks geometrically with `M`, so
    /// large well-conditioned sets (lattice constraints) need this test.
    Rank(f64),
}

impl Default for DegeneracyTest {
    fn default() -> Self {
        DegeneracyTest::Determinant(DEGENERACY_TOL)
    }
}

enum Solver {
    Empty,
    /// `[[a, b], [c, d]]⁻¹` in closed form.
    TwoByTwo { inv: [[f64; 2]; 2] },
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// The constraint matrix factorized at one point.
pub struct DiracStructure {
    point: Vec<f64>,
    /// Column `I` is `Ω∇Φ_I`, i.e. the coordinate brackets `{z_a, Φ_I}`.
    flows: Vec<Vec<f64>>,
    grads: Vec<Vec<f64>>,
    matrix: DMatrix<f64>,
    det: f64,
    threshold: f64,
    solver: Solver,
}

impl fmt::Debug for DiracStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiracStructure")
            .field("det", &self.det)
            .field("threshold", &self.threshold)
            .finish()
    }
}

impl DiracStructure {
    pub fn at(cs: &ConstraintSet, x: &PhaseSpacePoint) -> Result<Self> {
        cs.check_chart(x.chart())?;
        Self::at_coords(cs, x.coords())
    }

    /// Fails with [`Error::Degenerate`] when `M` is singular at `z`.
    pub fn at_coords(cs: &ConstraintSet, z: &[f64]) -> Result<Self> {
        Self::at_coords_with(cs, z, DegeneracyTest::default())
    }

    pub fn at_coords_with(cs: &ConstraintSet, z: &[f64], test: DegeneracyTest) -> Result<Self> {
        let grads = cs.gradients_at(z)?;
        let matrix = matrix_from_gradients(&grads);
        let flows = grads.iter().map(|g| hamiltonian_vector(g)).collect();
        let threshold = match test {
            DegeneracyTest::Determinant(tol) => tol * row_norm_scale(&matrix),
            DegeneracyTest::Rank(_) => 0.0,
        };
        let (det, solver) = match matrix.nrows() {
            0 => (1.0, Solver::Empty),
            2 => {
                let (a, b, c, d) = (matrix[(0, 0)], matrix[(0, 1)], matrix[(1, 0)], matrix[(1, 1)]);
                let det = a * d - b * c;
                let inv = [[d / det, -b / det], [-c / det, a / det]];
                (det, Solver::TwoByTwo { inv })
            }
            _ => {
                let lu = matrix.clone().lu();
                (lu.determinant(), Solver::Lu(lu))
            }
        };
        let singular = match test {
            DegeneracyTest::Determinant(_) => !(det.abs() > threshold),
            DegeneracyTest::Rank(tol) => !det.is_finite() || rank_full_pivot(&matrix, tol) < matrix.nrows(),
        };
        if singular {
            return Err(Error::Degenerate {
                det,
                threshold,
                point: z.to_vec(),
            });
        }
        Ok(DiracStructure {
            point: z.to_vec(),
            flows,
            grads,
            matrix,
            det,
            threshold,
            solver,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    /// `M⁻¹ r`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.solver {
            Solver::Empty => Vec::new(),
            Solver::TwoByTwo { inv } => vec![
                inv[0][0] * rhs[0] + inv[0][1] * rhs[1],
                inv[1][0] * rhs[0] + inv[1][1] * rhs[1],
            ],
            Solver::Lu(lu) => {
                let b = DVector::from_column_slice(rhs);
                // LU is non-singular: the determinant check above passed.
                lu.solve(&b).expect("factorization checked non-singular").as_slice().to_vec()
            }
        }
    }

    /// Dirac bracket of two functions given their gradients at this point.
    pub fn bracket_of_gradients(&self, ga: &[f64], gb: &[f64]) -> f64 {
        let pb = symplectic_product(ga, gb);
        if self.grads.is_empty() {
            return pb;
        }
        let a_phi: Vec<f64> = self.grads.iter().map(|g| symplectic_product(ga, g)).collect();
        let phi_b: Vec<f64> = self.grads.iter().map(|g| symplectic_product(g, gb)).collect();
        let y = self.solve(&phi_b);
        pb - a_phi.iter().zip(&y).map(|(u, v)| u * v).sum::<f64>()
    }

    /// `Π_ab = {z_a, z_b}_D = Ω + V M⁻¹ Vᵀ` over all coordinate functions.
    pub fn coordinate_matrix(&self) -> DMatrix<f64> {
        let dim = self.point.len();
        let n = dim / 2;
        let mut pi = DMatrix::zeros(dim, dim);
        for i in 0..n {
            pi[(i, n + i)] = 1.0;
            pi[(n + i, i)] = -1.0;
        }
        let m = self.flows.len();
        if m == 0 {
            return pi;
        }
        let v = DMatrix::from_fn(dim, m, |a, i| self.flows[i][a]);
        // M⁻¹ Vᵀ, one solve per coordinate.
        let mut minv_vt = DMatrix::zeros(m, dim);
        for b in 0..dim {
            let col: Vec<f64> = (0..m).map(|i| v[(b, i)]).collect();
            let y = self.solve(&col);
            for i in 0..m {
                minv_vt[(i, b)] = y[i];
            }
        }
        pi + v * minv_vt
    }

    /// `ż = Ω∇H − V M⁻¹ ({Φ, H} + ∂Φ/∂t)`: the Dirac-bracket flow of `H`
    /// that also tracks explicitly time-dependent constraints.
    pub fn vector_field(&self, grad_h: Option<&[f64]>, time_rates: &[f64]) -> Vec<f64> {
        let dim = self.point.len();
        let mut zdot = match grad_h {
            Some(g) => hamiltonian_vector(g),
            None => vec![0.0; dim],
        };
        if self.grads.is_empty() {
            return zdot;
        }
        let rhs: Vec<f64> = self
            .grads
            .iter()
            .zip(time_rates)
            .map(|(g, rate)| grad_h.map_or(0.0, |gh| symplectic_product(g, gh)) + rate)
            .collect();
        let y = self.solve(&rhs);
        for (flow, yi) in self.flows.iter().zip(&y) {
            for (z, f) in zdot.iter_mut().zip(flow) {
                *z -= f * yi;
            }
        }
        zdot
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintClass {
    SecondClass,
    FirstClass,
    MixedOrDegenerate,
}

#[derive(Clone, Debug)]
pub struct ClassificationResult {
    pub kind: ConstraintClass,
    /// Determinant at the sample closest to degeneracy (smallest `|det|/threshold`).
    pub det_m: f64,
    /// Smallest numerical rank of `M` over the samples.
    pub rank: usize,
    pub tolerance_used: f64,
    pub even_count: bool,
    pub sample_points: Vec<PhaseSpacePoint>,
    pub sample_dets: Vec<f64>,
}

/// Second class when `|det M| > tol·max(1, Π‖row‖)` on every sample; first
/// class when `M` vanishes below `tol` entrywise on every sample.
pub fn classify(cs: &ConstraintSet, samples: &[PhaseSpacePoint], tol: f64) -> Result<ClassificationResult> {
    if !(tol > 0.0) {
        return Err(Error::usage("classification tolerance must be positive"));
    }
    if samples.is_empty() {
        return Err(Error::usage("classification needs at least one sample"));
    }
    let mut all_second = cs.has_even_count() && !cs.is_empty();
    let mut all_vanish = true;
    let mut min_rank = cs.len();
    let mut worst = (f64::INFINITY, 0.0);
    let mut dets = Vec::with_capacity(samples.len());
    for x in samples {
        cs.check_chart(x.chart())?;
        cs.check_on_surface(x.coords())?;
        let m = constraint_matrix(cs, x)?;
        let det = if m.nrows() == 0 { 1.0 } else { m.clone().lu().determinant() };
        let threshold = tol * row_norm_scale(&m);
        let ratio = det.abs() / threshold;
        if ratio < worst.0 {
            worst = (ratio, det);
        }
        all_second &= det.abs() > threshold;
        all_vanish &= m.amax() < tol;
        min_rank = min_rank.min(rank_full_pivot(&m, tol));
        dets.push(det);
    }
    let kind = if all_second {
        ConstraintClass::SecondClass
    } else if all_vanish {
        min_rank = 0;
        ConstraintClass::FirstClass
    } else {
        ConstraintClass::MixedOrDegenerate
    };
    Ok(ClassificationResult {
        kind,
        det_m: worst.1,
        rank: min_rank,
        tolerance_used: tol,
        even_count: cs.has_even_count(),
        sample_points: samples.to_vec(),
        sample_dets: dets,
    })
}

pub fn dirac_bracket(
    a: &ScalarField,
    b: &ScalarField,
    cs: &ConstraintSet,
    x: &PhaseSpacePoint,
) -> Result<f64> {
    a.ensure_chart(x.chart())?;
    b.ensure_chart(x.chart())?;
    let ds = DiracStructure::at(cs, x)?;
    let ga = checked_gradient(a, x.coords(), x.chart())?;
    let gb = checked_gradient(b, x.coords(), x.chart())?;
    Ok(ds.bracket_of_gradients(&ga, &gb))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableReport {
    pub max_abs: f64,
    pub worst_constraint: String,
}

/// Largest `|{a, Φ_I}_D|` over samples and constraints.
pub fn observable_check(
    a: &ScalarField,
    cs: &ConstraintSet,
    samples: &[PhaseSpacePoint],
) -> Result<ObservableReport> {
    let mut report = ObservableReport {
        max_abs: 0.0,
        worst_constraint: String::new(),
    };
    for x in samples {
        a.ensure_chart(x.chart())?;
        let ds = DiracStructure::at(cs, x)?;
        let ga = checked_gradient(a, x.coords(), x.chart())?;
        for (c, g) in cs.entries().iter().zip(&ds.grads) {
            let v = ds.bracket_of_gradients(&ga, g).abs();
            if v >= report.max_abs {
                report.max_abs = v;
                report.worst_constraint = c.name.clone();
            }
        }
    }
    Ok(report)
}

pub type EmbedFn = Arc<dyn Fn(&[Dual]) -> Vec<Dual> + Send + Sync>;

/// Coordinates `(q_r, p_r)` on the constraint surface and its embedding into
/// the full chart.
#[derive(Clone)]
pub struct SurfaceParametrization {
    reduced: Arc<ChartSpec>,
    full: Arc<ChartSpec>,
    embed: EmbedFn,
}

impl fmt::Debug for SurfaceParametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceParametrization")
            .field("reduced", &self.reduced.labels())
            .field("full", &self.full.labels())
            .finish()
    }
}

impl SurfaceParametrization {
    pub fn new(
        reduced: &Arc<ChartSpec>,
        full: &Arc<ChartSpec>,
        embed: impl Fn(&[Dual]) -> Vec<Dual> + Send + Sync + 'static,
    ) -> Self {
        SurfaceParametrization {
            reduced: Arc::clone(reduced),
            full: Arc::clone(full),
            embed: Arc::new(embed),
        }
    }

    pub fn reduced_chart(&self) -> &Arc<ChartSpec> {
        &self.reduced
    }

    pub fn full_chart(&self) -> &Arc<ChartSpec> {
        &self.full
    }

    pub fn embed_coords(&self, y: &[f64]) -> Vec<f64> {
        let yd: Vec<Dual> = y.iter().map(|&v| Dual::constant(v)).collect();
        (self.embed)(&yd).into_iter().map(|d| d.re).collect()
    }

    pub fn embed(&self, y: &PhaseSpacePoint) -> Result<PhaseSpacePoint> {
        if !self.reduced.same_as(y.chart()) {
            return Err(Error::usage("reduced point is not on the reduced chart"));
        }
        PhaseSpacePoint::new(&self.full, self.embed_coords(y.coords()))
    }

    /// `∂z_a/∂y_b`, shape `2N × 2R`.
    pub fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        let dim = self.full.dim();
        let mut jac = DMatrix::zeros(dim, y.len());
        let mut yd: Vec<Dual> = y.iter().map(|&v| Dual::constant(v)).collect();
        for b in 0..y.len() {
            yd[b].eps = 1.0;
            for (a, z) in (self.embed)(&yd).into_iter().enumerate() {
                jac[(a, b)] = z.eps;
            }
            yd[b].eps = 0.0;
        }
        jac
    }

    /// Largest constraint residual over the embedded samples.
    pub fn max_residual(&self, cs: &ConstraintSet, samples: &[PhaseSpacePoint]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for y in samples {
            let z = self.embed(y)?;
            for r in cs.residuals(&z)? {
                worst = worst.max(r.abs());
            }
        }
        Ok(worst)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBracketReport {
    pub dirac_value: f64,
    pub reduced_pb_value: f64,
    pub abs_diff: f64,
}

/// Dirac bracket at `embed(y)` versus the Poisson bracket of the pullbacks
/// `a∘embed`, `b∘embed` in the reduced chart.
pub fn maskawa_nakajima_check(
    a: &ScalarField,
    b: &ScalarField,
    cs: &ConstraintSet,
    param: &SurfaceParametrization,
    reduced_point: &PhaseSpacePoint,
) -> Result<ReducedBracketReport> {
    let x = param.embed(reduced_point)?;
    cs.check_on_surface(x.coords())?;
    let dirac_value = dirac_bracket(a, b, cs, &x)?;

    let jac = param.jacobian(reduced_point.coords());
    let pull = |f: &ScalarField| -> Result<Vec<f64>> {
        let g = DVector::from_vec(checked_gradient(f, x.coords(), x.chart())?);
        Ok((jac.transpose() * g).as_slice().to_vec())
    };
    let reduced_pb_value = symplectic_product(&pull(a)?, &pull(b)?);
    Ok(ReducedBracketReport {
        dirac_value,
        reduced_pb_value,
        abs_diff: (dirac_value - reduced_pb_value).abs(),
    })
}

/// `det({χ_i, C_j})`, the Faddeev–Popov weight.
pub fn fp_determinant(
    gauges: &[ScalarField],
    constraints: &[ScalarField],
    x: &PhaseSpacePoint,
) -> Result<f64> {
    if gauges.len() != constraints.len() || gauges.is_empty() {
        return Err(Error::usage(format!(
            "need equal, non-zero numbers of gauge conditions and constraints (got {} and {})",
            gauges.len(),
            constraints.len()
        )));
    }
    let gg = gauges
        .iter()
        .map(|f| {
            f.ensure_chart(x.chart())?;
            checked_gradient(f, x.coords(), x.chart())
        })
        .collect::<Result<Vec<_>>>()?;
    let gc = constraints
        .iter()
        .map(|f| {
            f.ensure_chart(x.chart())?;
            checked_gradient(f, x.coords(), x.chart())
        })
        .collect::<Result<Vec<_>>>()?;
    let k = gg.len();
    let m = DMatrix::from_fn(k, k, |i, j| symplectic_product(&gg[i], &gc[j]));
    Ok(m.lu().determinant())
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobianReport {
    pub jacobian_det: f64,
    pub bracket_value: f64,
    pub abs_diff: f64,
}

/// Compares `det ∂(χ, C)/∂(z_i, z_j)` over the coordinate pair `columns`
/// (a position and its conjugate momentum) with `{χ, C}` at `x`.
pub fn fp_jacobian_check(
    chi: &ScalarField,
    c: &ScalarField,
    x: &PhaseSpacePoint,
    columns: (usize, usize),
) -> Result<JacobianReport> {
    let (i, j) = columns;
    if i >= x.coords().len() || j >= x.coords().len() {
        return Err(Error::usage("Jacobian columns out of range"));
    }
    let gchi = chi.gradient(x)?;
    let gc = c.gradient(x)?;
    let jacobian_det = gchi[i] * gc[j] - gchi[j] * gc[i];
    let bracket_value = crate::bracket::poisson_bracket(chi, c, x)?;
    Ok(JacobianReport {
        jacobian_det,
        bracket_value,
        abs_diff: (jacobian_det - bracket_value).abs(),
    })
}
