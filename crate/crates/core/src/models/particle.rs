//! Free relativistic point particle in `1 + d` dimensions.
//!
//! The chart holds `(x^0..x^d, p_0..p_d)` with covariant momenta and metric
//! `(+, −, …, −)`, so the contravariant spatial momentum is `p^i = −p_i`.
//! Mass shell `C = ½(p_0² − Σp_i² − m²)`, time gauge `χ = x^0 − τ`.

use std::sync::Arc;

use crate::chart::{ChartSpec, PhaseSpacePoint};
use crate::constraint::{dirac_bracket, ConstraintSet, DiracStructure, TimeDrive};
use crate::bracket::poisson_bracket;
use crate::dual::Dual;
use crate::dynamics::FlowSpec;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::sampling::SampleRng;

#[derive(Clone, Debug, PartialEq)]
pub struct RelativisticParticle {
    pub mass: f64,
    pub spatial_dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleBracketReport {
    pub samples: usize,
    /// `max |{χ, C} − p_0|`.
    pub chi_c_err: f64,
    /// `max |{x^i, p_j}_D − δ^i_j|`.
    pub xp_err: f64,
    pub xx_max: f64,
    pub pp_max: f64,
}

impl ParticleBracketReport {
    pub fn max_err(&self) -> f64 {
        self.chi_c_err.max(self.xp_err).max(self.xx_max).max(self.pp_max)
    }
}

impl RelativisticParticle {
    pub fn new(mass: f64, spatial_dim: usize) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::usage(format!("mass must be positive and finite, got {mass}")));
        }
        if spatial_dim == 0 {
            return Err(Error::usage("spatial dimension must be at least 1"));
        }
        Ok(RelativisticParticle { mass, spatial_dim })
    }

    pub fn chart(&self) -> Arc<ChartSpec> {
        let d = self.spatial_dim;
        let xs: Vec<String> = (0..=d).map(|mu| format!("x{mu}")).collect();
        let ps: Vec<String> = (0..=d).map(|mu| format!("p{mu}")).collect();
        Arc::new(ChartSpec::new(&xs, &ps).expect("distinct labels"))
    }

    /// `H_Phys = p_0 = √(p·p + m²)`.
    pub fn energy(&self, p: &[f64]) -> f64 {
        (p.iter().map(|v| v * v).sum::<f64>() + self.mass * self.mass).sqrt()
    }

    /// `x^i(τ) = x^i(0) + p^i τ / √(p·p + m²)`.
    pub fn trajectory(&self, x0: &[f64], p: &[f64], tau: f64) -> Result<Vec<f64>> {
        if x0.len() != self.spatial_dim || p.len() != self.spatial_dim {
            return Err(Error::usage(format!(
                "expected {}-vectors, got {} and {}",
                self.spatial_dim,
                x0.len(),
                p.len()
            )));
        }
        let e = self.energy(p);
        Ok(x0.iter().zip(p).map(|(x, pi)| x + pi * tau / e).collect())
    }

    pub fn mass_shell(&self, chart: &Arc<ChartSpec>) -> ScalarField {
        let (n, m2) = (self.spatial_dim + 1, self.mass * self.mass);
        ScalarField::from_dual(chart, "C", move |z| {
            let p0 = z[n];
            let spatial: Dual = (1..n).map(|i| z[n + i] * z[n + i]).sum();
            0.5 * (p0 * p0 - spatial - m2)
        })
    }

    /// `x^0`; the `−τ` part is the time drive of [`constraint_set`](Self::constraint_set).
    pub fn time_gauge(&self, chart: &Arc<ChartSpec>) -> ScalarField {
        ScalarField::from_dual(chart, "chi", |z| z[0])
    }

    /// `(χ, C)` with `χ = x^0 − τ` evaluated at time `τ`.
    pub fn constraint_set(&self, chart: &Arc<ChartSpec>) -> ConstraintSet {
        ConstraintSet::new(chart, vec![self.time_gauge(chart), self.mass_shell(chart)])
            .expect("two constraints")
            .with_drive("chi", TimeDrive::affine(0.0, 1.0))
            .expect("chi is a member")
    }

    /// Constrained flow with no Hamiltonian: the moving gauge `x^0 = τ`
    /// alone drives the motion.
    pub fn dirac_flow(&self, chart: &Arc<ChartSpec>) -> FlowSpec {
        FlowSpec::dirac(self.constraint_set(chart), None)
    }

    /// Positive-energy on-shell point with `x^0 = τ` and contravariant `p^i`.
    pub fn on_shell_point(&self, chart: &Arc<ChartSpec>, x: &[f64], p: &[f64], tau: f64) -> Result<PhaseSpacePoint> {
        if x.len() != self.spatial_dim || p.len() != self.spatial_dim {
            return Err(Error::usage("spatial vectors have the wrong length"));
        }
        let mut z = Vec::with_capacity(2 * (self.spatial_dim + 1));
        z.push(tau);
        z.extend_from_slice(x);
        z.push(self.energy(p));
        z.extend(p.iter().map(|v| -v));
        PhaseSpacePoint::new(chart, z)
    }

    /// Draws `τ ∈ [−5, 5)`, then `x ∈ [−5, 5)^d`, then `p ∈ [−5, 5)^d`.
    pub fn sample_on_shell(&self, chart: &Arc<ChartSpec>, rng: &mut SampleRng) -> (PhaseSpacePoint, f64) {
        let tau = rng.uniform(-5.0, 5.0);
        let x = rng.vector(self.spatial_dim, -5.0, 5.0);
        let p = rng.vector(self.spatial_dim, -5.0, 5.0);
        (self.on_shell_point(chart, &x, &p, tau).expect("finite sample"), tau)
    }

    /// Closed-form `{z_a, z_b}_D` between chart coordinates `a`, `b` at `z`:
    /// `x^0` commutes with everything, `{x^i, p_j}_D = δ^i_j`,
    /// `{x^i, p_0}_D = p_i / p_0`, all other pairs vanish.
    pub fn dirac_oracle(&self, a: usize, b: usize, z: &[f64]) -> Result<f64> {
        let n = self.spatial_dim + 1;
        if a >= 2 * n || b >= 2 * n || z.len() != 2 * n {
            return Err(Error::usage(format!(
                "coordinate index out of range for a {}-dimensional chart",
                2 * n
            )));
        }
        let entry = |a: usize, b: usize| -> f64 {
            match (a, b) {
                (i, j) if i >= 1 && i < n && j > n => {
                    if j - n == i {
                        1.0
                    } else {
                        0.0
                    }
                }
                (i, j) if i >= 1 && i < n && j == n => z[n + i] / z[n],
                _ => 0.0,
            }
        };
        Ok(entry(a, b) - entry(b, a))
    }

    /// `{χ, C} = p_0` and the canonical Dirac brackets of the spatial pairs,
    /// all by the general matrix formula. Each sample comes with its `τ`.
    pub fn bracket_suite(&self, samples: &[(PhaseSpacePoint, f64)]) -> Result<ParticleBracketReport> {
        let n = self.spatial_dim + 1;
        let mut rep = ParticleBracketReport {
            samples: samples.len(),
            chi_c_err: 0.0,
            xp_err: 0.0,
            xx_max: 0.0,
            pp_max: 0.0,
        };
        for (x, tau) in samples {
            let chart = x.chart();
            let cs = self.constraint_set(chart).at_time(*tau);
            for (name, r) in cs.names().into_iter().zip(cs.residuals(x)?) {
                if !(r.abs() < 1e-9) {
                    return Err(Error::usage(format!("sample is off shell: |{name}| = {:e}", r.abs())));
                }
            }
            let p0 = x.coords()[n];
            if !(p0 > 0.0) {
                return Err(Error::usage("sample is on the negative-energy branch"));
            }
            let chi_c = poisson_bracket(&self.time_gauge(chart), &self.mass_shell(chart), x)?;
            rep.chi_c_err = rep.chi_c_err.max((chi_c - p0).abs());

            let ds = DiracStructure::at(&cs, x)?;
            let pi = ds.coordinate_matrix();
            for i in 1..n {
                for j in 1..n {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    rep.xp_err = rep.xp_err.max((pi[(i, n + j)] - delta).abs());
                    rep.xx_max = rep.xx_max.max(pi[(i, j)].abs());
                    rep.pp_max = rep.pp_max.max(pi[(n + i, n + j)].abs());
                }
            }
            // One pair through the field-level entry point as well.
            let x1 = ScalarField::coordinate(chart, "x1")?;
            let p1 = ScalarField::coordinate(chart, "p1")?;
            rep.xp_err = rep.xp_err.max((dirac_bracket(&x1, &p1, &cs, x)? - 1.0).abs());
        }
        Ok(rep)
    }
}
