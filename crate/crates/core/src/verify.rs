//! Invariant suite: every property the library promises, checked against
//! independent oracles on seeded samples.
//!
//! Each check reports an observed error and the tolerance it must stay under.
//! A non-zero `perturbation` is added to every oracle value before comparison,
//! which must make oracle checks fail; it exists to prove the suite can fail.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bracket::{gradient_consistency_check, poisson_bracket};
use crate::chart::{ChartSpec, PhaseSpacePoint};
use crate::constraint::{
    classify, constraint_matrix, dirac_bracket, fp_determinant, fp_jacobian_check, maskawa_nakajima_check,
    observable_check, ConstraintClass, ConstraintSet, DEGENERACY_TOL,
};
use crate::dual::Dual;
use crate::dynamics::{constraint_drift, evolve, gauge_closed_form_klauder, FlowSpec, IntegratorConfig, Multiplier};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::models::klauder::KlauderModel;
use crate::models::maxwell::LatticeMaxwell;
use crate::models::particle::RelativisticParticle;
use crate::models::potential::Potential;
use crate::quantum::{
    evolve_static, evolve_time_dependent, expect_cartesian, expect_cartesian_matrix_oracle, expect_phi,
    expect_phi_quadrature, expect_reduced, CircleState, Quadrature, SpectrumTable, PHI_QUADRATURE_INTERVALS,
};
use crate::sampling::SampleRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Brackets,
    Constraints,
    Klauder,
    Dynamics,
    Particle,
    Maxwell,
    Quantum,
}

impl Suite {
    pub const NAMES: [&'static str; 8] = [
        "all",
        "brackets",
        "constraints",
        "klauder",
        "dynamics",
        "particle",
        "maxwell",
        "quantum",
    ];

    fn includes(self, part: Suite) -> bool {
        self == Suite::All || self == part
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "brackets" => Suite::Brackets,
            "constraints" => Suite::Constraints,
            "klauder" => Suite::Klauder,
            "dynamics" => Suite::Dynamics,
            "particle" => Suite::Particle,
            "maxwell" => Suite::Maxwell,
            "quantum" => Suite::Quantum,
            other => {
                return Err(Error::usage(format!(
                    "unknown suite `{other}`; expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: String,
    pub observed: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    /// Passes when `observed < tolerance` (NaN fails).
    pub fn below(suite: &'static str, name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        CheckOutcome {
            suite,
            name: name.into(),
            observed,
            tolerance,
            passed: observed < tolerance,
        }
    }

    fn failed(suite: &'static str, name: impl Into<String>, err: &Error) -> Self {
        CheckOutcome {
            suite,
            name: format!("{} ({err})", name.into()),
            observed: f64::NAN,
            tolerance: 0.0,
            passed: false,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: observed {:.3e} (tol {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.observed,
            self.tolerance
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub perturbation: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20240601,
            perturbation: 0.0,
        }
    }
}

/// Random polynomial with `terms` monomials in every chart coordinate.
/// Draws per term: coefficient in `[−1, 1)`, then one exponent in `0..=max_power`
/// per coordinate.
pub fn random_polynomial(chart: &Arc<ChartSpec>, rng: &mut SampleRng, terms: usize, max_power: i64) -> ScalarField {
    let dim = chart.dim();
    let monomials: Vec<(f64, Vec<i32>)> = (0..terms)
        .map(|_| {
            let c = rng.uniform(-1.0, 1.0);
            let e = (0..dim).map(|_| rng.integer(0, max_power) as i32).collect();
            (c, e)
        })
        .collect();
    ScalarField::from_dual(chart, "poly", move |z| {
        monomials
            .iter()
            .map(|(c, e)| {
                e.iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .fold(Dual::constant(*c), |acc, (i, &k)| acc * z[i].powi(k))
            })
            .sum()
    })
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    type Part = fn(&VerifyOptions, &mut Vec<CheckOutcome>) -> Result<()>;
    let parts: [(Suite, &'static str, Part); 7] = [
        (Suite::Brackets, "brackets", brackets),
        (Suite::Constraints, "constraints", constraints),
        (Suite::Klauder, "klauder", klauder),
        (Suite::Dynamics, "dynamics", dynamics),
        (Suite::Particle, "particle", particle),
        (Suite::Maxwell, "maxwell", maxwell),
        (Suite::Quantum, "quantum", quantum),
    ];
    for (part, name, f) in parts {
        if suite.includes(part) {
            if let Err(e) = f(opts, &mut out) {
                out.push(CheckOutcome::failed(name, "suite aborted", &e));
            }
        }
    }
    out
}

fn brackets(o: &VerifyOptions, out: &mut Vec<CheckOutcome>) -> Result<()> {
    const S: &str = "brackets";
    let chart = Arc::new(ChartSpec::new(&["q1", "q2"], &["p1", "p2"])?);
    let mut rng = SampleRng::new(o.seed);

    let mut canon: f64 = 0.0;
    let x = PhaseSpacePoint::new(&chart, rng.vector(4, -2.0, 2.0))?;
    for (i, a) in chart.labels().iter().enumerate() {
        for (j, b) in chart.labels().iter().enumerate() {
            let v = poisson_bracket(&ScalarField::coordinate(&chart, a)?, &ScalarField::coordinate(&chart, b)?, &x)?;
            let expected = match (i, j) {
                (0, 2) | (1, 3) => 1.0,
                (2, 0) | (3, 1) => -1.0,
                _ => 0.0,
            } + o.perturbation;
            canon = canon.max((v - expected).abs());
        }
    }
    out.push(CheckOutcome::below(S, "canonical relations", canon, 1e-15));

    let (mut anti, mut leibniz, mut jacobi): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let a = random_polynomial(&chart, &mut rng, 4, 2);
        let b = random_polynomial(&chart, &mut rng, 4, 2);
        let c = random_polynomial(&chart, &mut rng, 4, 2);
        let x = PhaseSpacePoint::new(&chart, rng.vector(4, -1.0, 1.0))?;
        anti = anti.max((poisson_bracket(&a, &b, &x)? + poisson_bracket(&b, &a, &x)?).abs());

        let (fa, fb) = (a.dual_fn().cloned().expect("dual"), b.dual_fn().cloned().expect("dual"));
        let ab = ScalarField::from_dual(&chart, "ab", move |z| fa(z) * fb(z));
        let lhs = poisson_bracket(&ab, &c, &x)?;
        let rhs = a.value(&x)? * poisson_bracket(&b, &c, &x)? + b.value(&x)? * poisson_bracket(&a, &c, &x)?;
        leibniz = leibniz.max((lhs - rhs).abs() / lhs.abs().max(1.0));

        jacobi = jacobi.max(jacobi_residual(&chart, &a, &b, &c, &x)?.abs());
    }
    out.push(CheckOutcome::below(S, "antisymmetry (100 points)", anti, 1e-12));
    out.push(CheckOutcome::below(S, "Leibniz rule (100 points)", leibniz, 1e-10));
    out.push(CheckOutcome::below(S, "Jacobi identity (100 points)", jacobi, 1e-8));

    let model = KlauderModel::new(1.3, 0.7)?;
    let pc = model.polar_chart();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = model.sample_point(&pc, &mut rng);
        worst = worst.max(gradient_consistency_check(&model.constraint(&pc), &x).max_rel_err);
    }
    out.push(CheckOutcome::below(S, "exact gradient of C vs central differences", worst, 1e-6));
    Ok(())
}

/// `{a,{b,c}} + {b,{c,a}} + {c,{a,b}}` with the inner brackets differentiated
/// by central differences.
pub fn jacobi_residual(
    chart: &Arc<ChartSpec>,
    a: &ScalarField,
    b: &ScalarField,
    c: &ScalarField,
    x: &PhaseSpacePoint,
) -> Result<f64> {
    let inner = |f: &ScalarField, g: &ScalarField| -> Result<ScalarField> {
        let (f, g) = (f.clone(), g.clone());
        ScalarField::numerical(
            chart,
            "inner",
            move |z| crate::bracket::symplectic_product(&f.gradient_at(z), &g.gradient_at(z)),
            1e-5,
        )
    };
    Ok(poisson_bracket(a, &inner(b, c)?, x)?
        + poisson_bracket(b, &inner(c, a)?, x)?
        + poisson_bracket(c, &inner(a, b)?, x)?)
}

fn constraints(o: &VerifyOptions, out: &mut Vec<CheckOutcome>) -> Result<()> {
    const S: &str = "constraints";
    let mut rng = SampleRng::new(o.seed ^ 0x11);
    let model = KlauderModel::new(1.0, 1.0)?;
    let chart = model.polar_chart();
    let cs = model.constraint_set(&chart);

    let x = PhaseSpacePoint::new(&chart, vec![1.0, 0.0, 1.0, 0.0])?;
    let m = constraint_matrix(&cs, &x)?;
    let err = (m[(0, 1)] - (2.0 + o.perturbation)).abs()
        .max((m[(1, 0)] + 2.0 + o.perturbation).abs())
        .max(m[(0, 0)].abs())
        .max(m[(1, 1)].abs());
    out.push(CheckOutcome::below(S, "{chi, C} matrix at (1, 0, 1, 0)", err, 1e-14));

    let samples: Vec<PhaseSpacePoint> = (0..50).map(|_| model.sample_surface_point(&chart, &mut rng, 0.0)).collect();
    let res = classify(&cs, &samples, DEGENERACY_TOL)?;
    let mut det_err: f64 = 0.0;
    for (x, det) in samples.iter().zip(&res.sample_dets) {
        let r = x.coords()[0];
        let expected = (2.0 * model.alpha * model.alpha * r * r).powi(2) + o.perturbation;
        det_err = det_err.max((det - expected).abs() / expected);
    }
    let second = if res.kind == ConstraintClass::SecondClass { 0.0 } else { 1.0 };
    out.push(CheckOutcome::below(S, "(chi, C) classifies second class", second, 0.5));
    out.push(CheckOutcome::below(S, "det M = (2 alpha^2 r*^2)^2 on surface", det_err, 1e-12));
    let first = classify(&model.first_class_set(&chart), &samples, DEGENERACY_TOL)?;
    let first_ok = if first.kind == ConstraintClass::FirstClass { 0.0 } else { 1.0 };
    out.push(CheckOutcome::below(S, "C alone classifies first class", first_ok, 0.5));

    let (mut anti, mut reduce): (f64, f64) = (0.0, 0.0);
    let empty = ConstraintSet::empty(&chart);
    for _ in 0..50 {
        let a = random_polynomial(&chart, &mut rng, 4, 2);
        let b = random_polynomial(&chart, &mut rng, 4, 2);
        let x = model.sample_point(&chart, &mut rng);
        let ab = dirac_bracket(&a, &b, &cs, &x)?;
        anti = anti.max((ab + dirac_bracket(&b, &a, &cs, &x)?).abs() / ab.abs().max(1.0));
        reduce = reduce.max((dirac_bracket(&a, &b, &empty, &x)? - poisson_bracket(&a, &b, &x)? - o.perturbation).abs());
    }
    out.push(CheckOutcome::below(S, "Dirac bracket antisymmetry (relative)", anti, 1e-12));
    out.push(CheckOutcome::below(S, "empty set reduces to Poisson bracket", reduce, 1e-12));

    let mut obs: f64 = 0.0;
    let points: Vec<PhaseSpacePoint> = (0..100).map(|_| model.sample_point(&chart, &mut rng)).collect();
    for _ in 0..20 {
        let a = random_polynomial(&chart, &mut rng, 5, 2);
        obs = obs.max(observable_check(&a, &cs, &points)?.max_abs);
    }
    out.push(CheckOutcome::below(S, "{A, Phi_I}_D = 0 for 20 polynomials", obs + o.perturbation, 1e-9));

    let param = model.surface_parametrization(&chart);
    let mut mn: f64 = 0.0;
    for _ in 0..10 {
        let a = random_polynomial(&chart, &mut rng, 4, 2);
        let b = random_polynomial(&chart, &mut rng, 4, 2);
        let y = PhaseSpacePoint::new(param.reduced_chart(), vec![rng.uniform(-PI, PI), rng.uniform(0.5, 3.0)])?;
        mn = mn.max(maskawa_nakajima_check(&a, &b, &cs, &param, &y)?.abs_diff);
    }
    out.push(CheckOutcome::below(S, "Dirac bracket = reduced Poisson bracket", mn + o.perturbation, 1e-8));

    let (mut fp, mut jac): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let x = model.sample_point(&chart, &mut rng);
        let z = x.coords();
        let (r, pr, pphi) = (z[0], z[2], z[3]);
        let oracle = pr * pr + pphi * pphi / (r * r) + model.alpha * model.alpha * r * r + o.perturbation;
        let det = fp_determinant(&[model.chi(&chart)], &[model.constraint(&chart)], &x)?;
        fp = fp.max((det - oracle).abs() / oracle.abs().max(1.0));
        jac = jac.max(fp_jacobian_check(&model.chi(&chart), &model.constraint(&chart), &x, (0, 2))?.abs_diff);
    }
    out.push(CheckOutcome::below(S, "det{chi, C} = p_r^2 + p_phi^2/r^2 + alpha^2 r^2", fp, 1e-12));
    out.push(CheckOutcome::below(S, "Jacobian d(chi, C)/d(r, p_r) = {chi, C}", jac, 1e-9));
    Ok(())
}

const PAIRS: [(&str, &str); 6] = [
    ("r", "p_r"),
    ("r", "p_phi"),
    ("r", "phi"),
    ("phi", "p_r"),
    ("phi", "p_phi"),
    ("p_r", "p_phi"),
];

fn klauder(o: &VerifyOptions, out: &mut Vec<CheckOutcome>) -> Result<()> {
    const S: &str = "klauder";
    let mut rng = SampleRng::new(o.seed ^ 0x22);
    let model = KlauderModel::new(1.0, 1.0)?;
    let chart = model.polar_chart();
    let cs = model.constraint_set(&chart);
    let coords: Vec<ScalarField> = ["r", "phi", "p_r", "p_phi"]
        .iter()
        .map(|l| ScalarField::coordinate(&chart, l))
        .collect::<Result<_>>()?;
    let idx = |l: &str| ["r", "phi", "p_r", "p_phi"].iter().position(|x| *x == l).expect("label");

    let mut table: f64 = 0.0;
    for _ in 0..1000 {
        let x = model.sample_point(&chart, &mut rng);
        for (a, b) in PAIRS {
            let db = dirac_bracket(&coords[idx(a)], &coords[idx(b)], &cs, &x)?;
            let oracle = model.dirac_oracle(a, b, x.coords())? + o.perturbation;
            table = table.max((db - oracle).abs());
        }
    }
    out.push(CheckOutcome::below(S, "six Dirac brackets vs closed-form table (1000 points)", table, 1e-9));

    let (mut denom, mut rphi): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let x = model.sample_surface_point(&chart, &mut rng, 0.0);
        let z = x.coords();
        let (r, pphi, k) = (z[0], z[3], model.k0);
        let target = 2.0 * (k * k + pphi * pphi) + o.perturbation;
        denom = denom.max((model.denominator(z) - target).abs() / target.max(1.0));
        let db = dirac_bracket(&coords[0], &coords[1], &cs, &x)?;
        rphi = rphi.max((db + r * pphi / (2.0 * (pphi * pphi + k * k)) - o.perturbation).abs());
    }
    out.push(CheckOutcome::below(S, "on-surface denominator = 2(k^2 + p_phi^2)", denom, 1e-10));
    out.push(CheckOutcome::below(S, "on-surface {r, phi}_D = -r p_phi/(2(p_phi^2 + k^2))", rphi, 1e-9));

    let radial = ScalarField::from_dual(&chart, "f(r, p_r, p_phi)", |z| {
        z[0] * z[0] * z[2] + Dual::sin(z[3]) * z[0] - z[2] * z[3] * z[3]
    });
    let mut rot: f64 = 0.0;
    for _ in 0..100 {
        let x = model.sample_point(&chart, &mut rng);
        rot = rot.max(dirac_bracket(&radial, &coords[3], &cs, &x)?.abs());
    }
    out.push(CheckOutcome::below(S, "{f(r, p_r, p_phi), p_phi}_D = 0", rot + o.perturbation, 1e-9));

    let mut reduced: f64 = 0.0;
    for p_phi in [-4.0, -1.0, 0.0, 0.5, 3.0] {
        let x = model.surface_point(&chart, 0.3, p_phi, 0.0)?;
        for r in cs.residuals(&x)? {
            reduced = reduced.max(r.abs());
        }
    }
    out.push(CheckOutcome::below(S, "reduced point satisfies chi = C = 0", reduced + o.perturbation, 1e-12));

    let model0 = KlauderModel::new(1.0, 0.0)?.with_potential(Potential::harmonic())?;
    let rate_err = (model0.phi_rate(2.0)? - (0.5 + o.perturbation)).abs();
    out.push(CheckOutcome::below(S, "phi rate at k = 0, p_phi = 2", rate_err, 1e-15));
    Ok(())
}

fn dynamics(o: &VerifyOptions, out: &mut Vec<CheckOutcome>) -> Result<()> {
    const S: &str = "dynamics";
    let model = KlauderModel::new(1.0, 1.0)?;
    let cart = model.cartesian_chart();

    let x0 = PhaseSpacePoint::new(&cart, vec![1.0, 0.0, 1.0, 0.0])?;
    let traj = evolve(&x0, &model.gauge_flow(&cart, Multiplier::Constant(1.0)), &IntegratorConfig::new(1e-3, 1000))?;
    let (q, p) = gauge_closed_form_klauder(&[1.0, 0.0], &[1.0, 0.0], 1.0, 1.0)?;
    let last = traj.last_state().expect("non-empty");
    let closed = q.iter().chain(&p).zip(last).map(|(a, b)| (a + o.perturbation - b).abs()).fold(0.0, f64::max);
    out.push(CheckOutcome::below(S, "gauge flow vs cosh/sinh orbit at T = 1", closed, 1e-8));

    let generic = PhaseSpacePoint::new(&cart, vec![1.0, 0.0, 0.0, 1.0])?;
    let c_set = ConstraintSet::new(&cart, vec![model.cartesian_constraint(&cart)])?;
    let traj = evolve(&generic, &model.gauge_flow(&cart, Multiplier::Constant(1.0)), &IntegratorConfig::new(1e-3, 1000))?;
    let (q, p) = gauge_closed_form_klauder(&[1.0, 0.0], &[0.0, 1.0], 1.0, 1.0)?;
    let last = traj.last_state().expect("non-empty");
    let closed = q.iter().chain(&p).zip(last).map(|(a, b)| (a + o.perturbation - b).abs()).fold(0.0, f64::max);
    out.push(CheckOutcome::below(S, "gauge flow vs closed form, generic on-surface start", closed, 1e-8));
    let drift = constraint_drift(&traj, &c_set);
    out.push(CheckOutcome::below(S, "C residual along gauge flow", drift.max_residual[0] + o.perturbation, 1e-10));

    let off = PhaseSpacePoint::new(&cart, vec![1.0, 0.3, 0.5, 0.2])?;
    let c0 = c_set.residuals(&off)?[0];
    let coarse = |dt: f64| -> Result<f64> {
        let steps = (1.0 / dt).round() as usize;
        let t = evolve(&off, &model.gauge_flow(&cart, Multiplier::Constant(1.0)), &IntegratorConfig::new(dt, steps))?;
        let mut worst: f64 = 0.0;
        for z in t.states() {
            worst = worst.max((c_set.residuals_at(z, 0.0)[0] - c0).abs());
        }
        Ok(worst)
    };
    let ratio = coarse(0.1)? / coarse(0.05)?;
    out.push(CheckOutcome::below(S, "C drift reduction on halving dt (>= 15)", 15.0 / ratio + o.perturbation, 1.0));

    let m0 = KlauderModel::new(1.0, 0.0)?.with_potential(Potential::harmonic())?;
    let pc = m0.polar_chart();
    let x0 = m0.surface_point(&pc, 0.2, 2.0, 0.0)?;
    let traj = evolve(&x0, &m0.dirac_flow(&pc), &IntegratorConfig::new(1e-3, 10_000))?;
    let rate = m0.phi_rate(2.0)? + o.perturbation;
    let (mut radial, mut angle): (f64, f64) = (0.0, 0.0);
    for (t, z) in traj.times().iter().zip(traj.states()) {
        for i in [0, 2, 3] {
            radial = radial.max((z[i] - x0.coords()[i]).abs());
        }
        angle = angle.max((z[1] - (0.2 + rate * t)).abs());
    }
    out.push(CheckOutcome::below(S, "Dirac flow keeps (r, p_r, p_phi) fixed over t in [0, 10]", radial, 1e-8));
    out.push(CheckOutcome::below(S, "Dirac flow phi(t) = phi(0) + rate t", angle, 1e-8));
    let drift = constraint_drift(&traj, &m0.constraint_set(&pc));
    let worst = drift.max_residual.iter().copied().fold(0.0, f64::max);
    out.push(CheckOutcome::below(S, "chi and C residuals along Dirac flow", worst, 1e-8));

    let osc = Arc::new(ChartSpec::new(&["q"], &["p"])?);
    let h = ScalarField::from_dual(&osc, "H", |z| 0.5 * (z[0] * z[0] + z[1] * z[1]) + 0.1 * z[0].powi(4));
    let x0 = PhaseSpacePoint::new(&osc, vec![0.8, -0.3])?;
    let traj = evolve(&x0, &FlowSpec::poisson(Some(h.clone())), &IntegratorConfig::new(1e-3, 10_000))?;
    let h0 = h.value_at(x0.coords());
    let energy = traj
        .states()
        .iter()
        .map(|z| (h.value_at(z) - h0 - o.perturbation).abs() / h0.abs().max(1.0))
        .fold(0.0, f64::max);
    out.push(CheckOutcome::below(S, "energy conservation over 1e4 steps", energy, 1e-8));
    Ok(())
}

fn particle(o: &VerifyOptions, out: &mut Vec<CheckOutcome>) -> Result<()> {
    const S: &str = "particle";
    let mut rng = SampleRng::new(o.seed ^ 0x33);
    let model = RelativisticParticle::new(1.5, 3)?;
    let chart = model.chart();
    let samples: Vec<(PhaseSpacePoint, f64)> = (0..100).map(|_| model.sample_on_shell(&chart, &mut rng)).collect();
    let rep = model.bracket_suite(&samples)?;
    out.push(CheckOutcome::below(S, "{chi, C} = p_0 (100 samples)", rep.chi_c_err + o.perturbation, 1e-10));
    out.push(CheckOutcome::below(
        S,
        "{x^i, p_j}_D = delta, {x, x}_D = {p, p}_D = 0",
        rep.xp_err.max(rep.xx_max).max(rep.pp_max) + o.perturbation,
        1e-9,
    ));

    let mut traj_err: f64 = 0.0;
    for (x, tau0) in samples.iter().take(5) {
        let traj = evolve(
            x,
            &model.dirac_flow(&chart),
            &IntegratorConfig::new(1e-2, 500).starting_at(*tau0),
        )?;
        let z0 = x.coords();
        let p_up: Vec<f64> = z0[5..8].iter().map(|v| -v).collect();
        for (t, z) in traj.times().iter().zip(traj.states()) {
            let expected = model.trajectory(&z0[1..4], &p_up, t - tau0)?;
            for i in 0..3 {
                traj_err = traj_err.max((z[1 + i] - expected[i] - o.perturbation).abs());
            }
        }
    }
    out.push(CheckOutcome::below(S, "constrained flow vs x(tau) = x(0) + p tau/p_0", traj_err, 1e-8));
    Ok(())
}

fn maxwell(o: &VerifyOptions, out: &mut Vec<CheckOutcome>) -> Result<()> {
    const S: &str = "maxwell";
    let mut rng = SampleRng::new(o.seed ^ 0x44);
    for side in [2usize, 4] {
        let m = LatticeMaxwell::new(side, 1.0)?;
        let p = m.projector()?;
        let blocks = m.dirac_blocks()?;
        let diff = (&blocks.ae - &p).amax() + o.perturbation;
        out.push(CheckOutcome::below(S, format!("L={side} Dirac {{A, E}} block = transverse projector"), diff, 1e-8));
        let zero = blocks.aa.amax().max(blocks.ee.amax());
        out.push(CheckOutcome::below(S, format!("L={side} {{A, A}}_D = {{E, E}}_D = 0"), zero, 1e-8));
        out.push(CheckOutcome::below(S, format!("L={side} P^2 = P"), (&p * &p - &p).amax(), 1e-10));
        out.push(CheckOutcome::below(S, format!("L={side} P symmetric"), (&p - p.transpose()).amax(), 1e-10));
        let n = m.n_sites() as f64;
        let trace_err = (p.trace() - (2.0 * n + 1.0) - o.perturbation).abs();
        out.push(CheckOutcome::below(S, format!("L={side} trace P = 2L^3 + 1"), trace_err, 1e-9));
        let g = m.gradient(&m.random_mean_zero(&mut rng));
        let pg = m.apply_projector(&g)?;
        out.push(CheckOutcome::below(
            S,
            format!("L={side} P annihilates gradients"),
            pg.iter().map(|v| v.abs()).fold(0.0, f64::max),
            1e-10,
        ));
    }

    let m = LatticeMaxwell::new(4, 1.0)?;
    let a0 = m.random_transverse(&mut rng)?;
    let e0 = m.random_transverse(&mut rng)?;
    let traj = m.evolve(&a0, &e0, &IntegratorConfig::new(1e-3, 10_000))?;
    let h0 = m.energy(traj.states()[0].as_slice());
    let energy = traj
        .states()
        .iter()
        .map(|z| (m.energy(z) - h0).abs() / h0)
        .fold(0.0, f64::max);
    out.push(CheckOutcome::below(S, "L=4 energy conservation over 1e4 steps", energy + o.perturbation, 1e-8));
    let n = m.n_sites() - 1;
    let gauss = traj
        .residuals()
        .iter()
        .flat_map(|row| row[n..].iter().copied())
        .fold(0.0, f64::max);
    out.push(CheckOutcome::below(S, "L=4 Gauss residual along evolution", gauss + o.perturbation, 1e-9));

    let (mode, omega) = m.transverse_mode([1, 0, 0], [0.0, 1.0, 0.0])?;
    let zeros = vec![0.0; mode.len()];
    let traj = m.evolve(&mode, &zeros, &IntegratorConfig::new(1e-3, 2000))?;
    let mut osc: f64 = 0.0;
    for (t, z) in traj.times().iter().zip(traj.states()) {
        let c = (omega * t).cos() + o.perturbation;
        for (a, a0) in z.iter().zip(&mode) {
            osc = osc.max((a - a0 * c).abs());
        }
    }
    out.push(CheckOutcome::below(S, "eigenmode A(t) = A(0) cos(omega t)", osc, 1e-9));
    Ok(())
}

fn quantum(o: &VerifyOptions, out: &mut Vec<CheckOutcome>) -> Result<()> {
    const S: &str = "quantum";
    let mut rng = SampleRng::new(o.seed ^ 0x55);
    let model = KlauderModel::new(1.0, 0.5)?.with_potential(Potential::Poly {
        coeffs: vec![0.0, 0.3, 0.5],
    })?;
    let m_max = 16;
    let table = SpectrumTable::new(&model, m_max)?;

    let mut s = CircleState::random(m_max, 1.0, 9, &mut rng)?;
    for _ in 0..1_000_000 {
        s = evolve_static(&s, &table, 0.37)?;
    }
    out.push(CheckOutcome::below(S, "norm after 1e6 static steps", (s.norm_sqr() - 1.0).abs() + o.perturbation, 1e-14));

    let (mut phi, mut residue): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let s = CircleState::random(m_max, 1.0, 5, &mut rng)?;
        let t = rng.uniform(0.0, 10.0);
        let e = expect_phi(&s, &table, t)?;
        let q = expect_phi_quadrature(&s, &table, t, PHI_QUADRATURE_INTERVALS)? + o.perturbation;
        phi = phi.max((e.mean - q).abs());
        residue = residue.max(e.imag_residue.abs());
    }
    out.push(CheckOutcome::below(S, "<phi> analytic sum vs quadrature (100 states)", phi, 1e-6));
    out.push(CheckOutcome::below(S, "<phi> imaginary residue", residue, 1e-12));

    let single = CircleState::basis(m_max, 1.0, 3)?;
    let pi_err = (expect_phi(&single, &table, 2.5)?.mean - PI - o.perturbation).abs();
    out.push(CheckOutcome::below(S, "single mode <phi> = pi", pi_err, 1e-15));

    let m0 = KlauderModel::new(1.0, 0.0)?;
    let t0 = SpectrumTable::new(&m0, m_max)?;
    let (r, pr, pphi) = expect_reduced(&CircleState::basis(m_max, 1.0, 1)?, &t0)?;
    let red = (r - 1.0 - o.perturbation).abs().max(pr.abs()).max((pphi - 1.0).abs());
    out.push(CheckOutcome::below(S, "reduced expectations of |1> at k = 0", red, 1e-12));

    let mut stationary: f64 = 0.0;
    let s = CircleState::random(m_max, 1.0, 7, &mut rng)?;
    let before = expect_reduced(&s, &table)?;
    for t in [0.5, 3.0, 40.0] {
        let after = expect_reduced(&evolve_static(&s, &table, t)?, &table)?;
        stationary = stationary
            .max((after.0 - before.0).abs())
            .max((after.1 - before.1).abs())
            .max((after.2 - before.2).abs());
    }
    out.push(CheckOutcome::below(S, "reduced expectations are stationary", stationary + o.perturbation, 1e-14));

    let mut cart: f64 = 0.0;
    for _ in 0..20 {
        let s = CircleState::random(m_max, 1.0, 6, &mut rng)?;
        let t = rng.uniform(0.0, 5.0);
        let (xy, pxy) = expect_cartesian(&s, &table, t)?;
        let (oxy, opxy) = expect_cartesian_matrix_oracle(&s, &table, t)?;
        cart = cart.max((xy - oxy).norm()).max((pxy - opxy - Complex64::new(o.perturbation, 0.0)).norm());
    }
    out.push(CheckOutcome::below(S, "Cartesian expectations vs mode-space matrices", cart, 1e-10));

    let s = CircleState::random(m_max, 1.0, 7, &mut rng)?;
    let a = evolve_static(&s, &table, 2.0)?;
    let b = evolve_time_dependent(&s, &model, 0.0, 2.0, Quadrature::Simpson { intervals: 64 })?;
    let diff = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    out.push(CheckOutcome::below(S, "time-dependent evolution with constant k = static", diff + o.perturbation, 1e-12));

    let ramp = KlauderModel::new(1.0, 0.0)?
        .with_ramp(1.0)?
        .with_potential(Potential::Poly { coeffs: vec![0.0, 1.0] })?;
    let s = CircleState::basis(m_max, 1.0, 0)?;
    let evolved = evolve_time_dependent(&s, &ramp, 0.0, 1.0, Quadrature::Adaptive { tol: 1e-13 })?;
    let phase = -evolved.coeff(0).arg();
    out.push(CheckOutcome::below(S, "ramp k = t, U = r, m = 0 phase = 2/3", (phase - 2.0 / 3.0 - o.perturbation).abs(), 1e-10));
    out.push(CheckOutcome::below(S, "norm after time-dependent evolution", (evolved.norm_sqr() - 1.0).abs(), 1e-14));
    Ok(())
}
