//! Two-dimensional toy model with constraint `C = ½(p_r² + p_φ²/r² − α²r²)`
//! and auxiliary condition `χ = r·p_r − k(t)`.
//!
//! The polar chart is `(r, φ, p_r, p_φ)` with `r > 1e-12`. On the surface
//! `χ = C = 0` the radial pair is fixed by `p_φ`:
//! `r* = ((k² + p_φ²)/α²)^{1/4}`, `p_r* = k/r*`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::chart::{ChartSpec, DomainExclusion, PhaseSpacePoint};
use crate::constraint::{ConstraintSet, SurfaceParametrization, TimeDrive};
use crate::dual::Dual;
use crate::dynamics::{FlowSpec, Multiplier};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::models::potential::Potential;
use crate::sampling::SampleRng;

/// Smallest admissible radius of the polar chart.
pub const R_MIN: f64 = 1e-12;

/// Radius floor used by the random samplers.
pub const SAMPLE_R_FLOOR: f64 = 0.05;

pub const POLAR_LABELS: [&str; 4] = ["r", "phi", "p_r", "p_phi"];
pub const CARTESIAN_LABELS: [&str; 4] = ["q1", "q2", "p1", "p2"];

#[derive(Clone, Debug, PartialEq)]
pub struct KlauderModel {
    pub alpha: f64,
    /// `k(t) = k0 + k1·t`.
    pub k0: f64,
    pub k1: f64,
    pub hbar: f64,
    pub potential: Potential,
}

impl KlauderModel {
    pub fn new(alpha: f64, k: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::usage(format!("alpha must be positive and finite, got {alpha}")));
        }
        if !k.is_finite() {
            return Err(Error::usage(format!("k must be finite, got {k}")));
        }
        Ok(KlauderModel {
            alpha,
            k0: k,
            k1: 0.0,
            hbar: 1.0,
            potential: Potential::default(),
        })
    }

    pub fn with_ramp(mut self, k1: f64) -> Result<Self> {
        if !k1.is_finite() {
            return Err(Error::usage(format!("k ramp rate must be finite, got {k1}")));
        }
        self.k1 = k1;
        Ok(self)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::usage(format!("hbar must be positive and finite, got {hbar}")));
        }
        self.hbar = hbar;
        Ok(self)
    }

    pub fn with_potential(mut self, potential: Potential) -> Result<Self> {
        if !potential.is_finite() {
            return Err(Error::usage("potential coefficients must be finite"));
        }
        self.potential = potential;
        Ok(self)
    }

    pub fn k(&self, t: f64) -> f64 {
        self.k0 + self.k1 * t
    }

    pub fn kdot(&self) -> f64 {
        self.k1
    }

    pub fn is_time_dependent(&self) -> bool {
        self.k1 != 0.0
    }

    pub fn polar_chart(&self) -> Arc<ChartSpec> {
        Arc::new(
            ChartSpec::new(&["r", "phi"], &["p_r", "p_phi"])
                .expect("static labels")
                .with_exclusion(DomainExclusion::new("r > 1e-12", |z| z[0] > R_MIN)),
        )
    }

    pub fn cartesian_chart(&self) -> Arc<ChartSpec> {
        Arc::new(ChartSpec::new(&["q1", "q2"], &["p1", "p2"]).expect("static labels"))
    }

    /// `χ = r·p_r − k0`; a ramp `k1·t` is attached as a time drive in
    /// [`constraint_set`](Self::constraint_set).
    pub fn chi(&self, chart: &Arc<ChartSpec>) -> ScalarField {
        let k0 = self.k0;
        ScalarField::from_dual(chart, "chi", move |z| z[0] * z[2] - k0)
    }

    pub fn constraint(&self, chart: &Arc<ChartSpec>) -> ScalarField {
        let a2 = self.alpha * self.alpha;
        ScalarField::from_dual(chart, "C", move |z| {
            let r = z[0];
            0.5 * (z[2] * z[2] + z[3] * z[3] / (r * r) - a2 * r * r)
        })
    }

    /// `H_Phys = C + U(r)`.
    pub fn hamiltonian(&self, chart: &Arc<ChartSpec>) -> ScalarField {
        let a2 = self.alpha * self.alpha;
        let u = self.potential.clone();
        ScalarField::from_dual(chart, "H", move |z| {
            let r = z[0];
            0.5 * (z[2] * z[2] + z[3] * z[3] / (r * r) - a2 * r * r) + u.dual(r)
        })
    }

    /// `(χ, C)` on the polar chart; second class away from the origin.
    pub fn constraint_set(&self, chart: &Arc<ChartSpec>) -> ConstraintSet {
        let cs = ConstraintSet::new(chart, vec![self.chi(chart), self.constraint(chart)])
            .expect("two constraints on a four-dimensional chart");
        if self.is_time_dependent() {
            cs.with_drive("chi", TimeDrive::affine(0.0, self.k1))
                .expect("chi is a member")
        } else {
            cs
        }
    }

    /// `C` alone: first class.
    pub fn first_class_set(&self, chart: &Arc<ChartSpec>) -> ConstraintSet {
        ConstraintSet::new(chart, vec![self.constraint(chart)]).expect("one constraint")
    }

    pub fn reduced_point(&self, p_phi: f64) -> Result<(f64, f64)> {
        self.reduced_point_at(p_phi, 0.0)
    }

    /// `(r*, p_r*)` for the instantaneous `k(t)`.
    pub fn reduced_point_at(&self, p_phi: f64, t: f64) -> Result<(f64, f64)> {
        let k = self.k(t);
        let s = k * k + p_phi * p_phi;
        if !(s > 0.0) {
            return Err(Error::Domain(format!(
                "k = {k} and p_phi = {p_phi} put the reduced point at the excluded origin"
            )));
        }
        let r = (s / (self.alpha * self.alpha)).powf(0.25);
        Ok((r, k / r))
    }

    /// Surface point `(r*, φ, p_r*, p_φ)` at time `t`.
    pub fn surface_point(&self, chart: &Arc<ChartSpec>, phi: f64, p_phi: f64, t: f64) -> Result<PhaseSpacePoint> {
        let (r, pr) = self.reduced_point_at(p_phi, t)?;
        PhaseSpacePoint::new(chart, vec![r, phi, pr, p_phi])
    }

    /// Reduced chart `(φ, p_φ)` embedded at `t = 0`.
    pub fn surface_parametrization(&self, chart: &Arc<ChartSpec>) -> SurfaceParametrization {
        let reduced = Arc::new(ChartSpec::new(&["phi"], &["p_phi"]).expect("static labels"));
        let (k, a2) = (self.k0, self.alpha * self.alpha);
        SurfaceParametrization::new(&reduced, chart, move |y: &[Dual]| {
            let (phi, p_phi) = (y[0], y[1]);
            let r = ((p_phi * p_phi + k * k) / a2).powf(0.25);
            vec![r, phi, k / r, p_phi]
        })
    }

    /// `p_φ² + r²p_r² + α²r⁴`.
    pub fn denominator(&self, z: &[f64]) -> f64 {
        let (r, pr, pphi) = (z[0], z[2], z[3]);
        pphi * pphi + r * r * pr * pr + self.alpha * self.alpha * r.powi(4)
    }

    /// Closed-form Dirac bracket of two polar coordinates at `z`.
    pub fn dirac_oracle(&self, a: &str, b: &str, z: &[f64]) -> Result<f64> {
        let index = |l: &str| {
            POLAR_LABELS
                .iter()
                .position(|x| *x == l)
                .ok_or_else(|| Error::usage(format!("unknown Klauder coordinate `{l}`")))
        };
        let (i, j) = (index(a)?, index(b)?);
        if !(z[0] > R_MIN) {
            return Err(Error::Domain(format!("r = {} is outside the polar chart", z[0])));
        }
        let (r, pr, pphi) = (z[0], z[2], z[3]);
        let d = self.denominator(z);
        let entry = |i: usize, j: usize| -> Option<f64> {
            match (i, j) {
                (0, 1) => Some(-r * pphi / d),
                (1, 2) => Some(-pr * pphi / d),
                (1, 3) => Some(1.0),
                (0, 2) | (0, 3) | (2, 3) => Some(0.0),
                _ => None,
            }
        };
        Ok(if i == j {
            0.0
        } else {
            entry(i, j).or_else(|| entry(j, i).map(|v| -v)).unwrap_or(0.0)
        })
    }

    /// `φ̇ = {φ, U}_D = {φ, r}_D U'(r*) = p_φ U'(r*) / (2α² r*³)` on the
    /// reduced phase space, using `D = 2α² r*⁴` on the surface.
    pub fn phi_rate(&self, p_phi: f64) -> Result<f64> {
        let (r, _) = self.reduced_point(p_phi)?;
        Ok(p_phi * self.potential.derivative(r) / (2.0 * self.alpha * self.alpha * r.powi(3)))
    }

    /// Physical flow `ż = {z, H_Phys}_D` on the `(χ, C)` surface.
    pub fn dirac_flow(&self, chart: &Arc<ChartSpec>) -> FlowSpec {
        FlowSpec::dirac(self.constraint_set(chart), Some(self.hamiltonian(chart)))
    }

    /// `C = ½(p·p − α²q·q)` on the Cartesian chart.
    pub fn cartesian_constraint(&self, chart: &Arc<ChartSpec>) -> ScalarField {
        let a2 = self.alpha * self.alpha;
        ScalarField::from_dual(chart, "C", move |z| {
            0.5 * (z[2] * z[2] + z[3] * z[3] - a2 * (z[0] * z[0] + z[1] * z[1]))
        })
    }

    /// `χ = q·p − k0` on the Cartesian chart.
    pub fn cartesian_chi(&self, chart: &Arc<ChartSpec>) -> ScalarField {
        let k0 = self.k0;
        ScalarField::from_dual(chart, "chi", move |z| z[0] * z[2] + z[1] * z[3] - k0)
    }

    /// Gauge flow `ż = λ(t){z, C}` on the Cartesian chart.
    pub fn gauge_flow(&self, chart: &Arc<ChartSpec>, multiplier: Multiplier) -> FlowSpec {
        FlowSpec::gauge(self.cartesian_constraint(chart), multiplier)
    }

    /// `(r, φ, p_r, p_φ) ↦ (q1, q2, p1, p2)`.
    pub fn polar_to_cartesian(z: &[f64]) -> [f64; 4] {
        let (r, phi, pr, pphi) = (z[0], z[1], z[2], z[3]);
        let (s, c) = phi.sin_cos();
        [
            r * c,
            r * s,
            pr * c - pphi / r * s,
            pr * s + pphi / r * c,
        ]
    }

    /// Off-surface sample: draws `r ∈ [0.1, 5)`, then `φ, p_r, p_φ ∈ [−5, 5)`.
    pub fn sample_point(&self, chart: &Arc<ChartSpec>, rng: &mut SampleRng) -> PhaseSpacePoint {
        let r = rng.uniform(0.1, 5.0);
        let rest = rng.vector(3, -5.0, 5.0);
        PhaseSpacePoint::new(chart, vec![r, rest[0], rest[1], rest[2]]).expect("r above the floor")
    }

    /// On-surface sample at `t`: draws `φ ∈ [−π, π)`, then `p_φ ∈ [−5, 5)`,
    /// redrawing both while `r* < 0.05`.
    pub fn sample_surface_point(&self, chart: &Arc<ChartSpec>, rng: &mut SampleRng, t: f64) -> PhaseSpacePoint {
        loop {
            let phi = rng.uniform(-PI, PI);
            let p_phi = rng.uniform(-5.0, 5.0);
            if let Ok((r, _)) = self.reduced_point_at(p_phi, t) {
                if r >= SAMPLE_R_FLOOR {
                    return self.surface_point(chart, phi, p_phi, t).expect("r above the floor");
                }
            }
        }
    }
}
