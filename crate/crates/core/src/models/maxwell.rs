//! Abelian gauge field on a periodic cubic lattice of side `L`.
//!
//! Phase space is `(A, E)` with `A_i(x)` the positions and `E_i(x)` their
//! conjugate momenta, `3L³` each, stored component-major: index `i·L³ + site`
//! with `site = x + L(y + Lz)`. `D` is the forward-difference gradient
//! `(DΛ)_i(x) = (Λ(x + e_i) − Λ(x))/a`, the divergence is `−Dᵀ` and the
//! scalar Laplacian `−DᵀD`.
//!
//! Gauss law `C(x) = (div E)(x)` and Coulomb gauge `χ(x) = (div A)(x)` sum to
//! zero over the lattice, so the last site of each is dropped. What remains is
//! a second-class set whose Dirac bracket `{A_i(x), E_j(y)}_D` is the
//! transverse projector `P = 1 − D(DᵀD)⁺Dᵀ`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chart::{ChartSpec, PhaseSpacePoint};
use crate::constraint::{ConstraintSet, DegeneracyTest, DiracStructure};
use crate::dynamics::{evolve, FlowSpec, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::sampling::SampleRng;

/// Relative tolerance for the transversality precondition of [`LatticeMaxwell::evolve`].
pub const TRANSVERSE_TOL: f64 = 1e-10;

const CG_TOL: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeMaxwell {
    side: usize,
    spacing: f64,
}

/// Blocks of the coordinate Dirac-bracket matrix.
#[derive(Clone, Debug)]
pub struct MaxwellDiracBlocks {
    /// `{A_i(x), E_j(y)}_D`.
    pub ae: DMatrix<f64>,
    /// `{A_i(x), A_j(y)}_D`.
    pub aa: DMatrix<f64>,
    /// `{E_i(x), E_j(y)}_D`.
    pub ee: DMatrix<f64>,
}

impl LatticeMaxwell {
    pub fn new(side: usize, spacing: f64) -> Result<Self> {
        if side < 2 {
            return Err(Error::usage(format!("lattice side must be at least 2, got {side}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::usage(format!("lattice spacing must be positive, got {spacing}")));
        }
        Ok(LatticeMaxwell { side, spacing })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn n_sites(&self) -> usize {
        self.side.pow(3)
    }

    /// `3L³`, the length of `A` or `E`.
    pub fn field_len(&self) -> usize {
        3 * self.n_sites()
    }

    pub fn site(&self, x: usize, y: usize, z: usize) -> usize {
        let l = self.side;
        x % l + l * (y % l + l * (z % l))
    }

    fn coords_of(&self, s: usize) -> [usize; 3] {
        let l = self.side;
        [s % l, (s / l) % l, s / (l * l)]
    }

    /// Site `s` shifted by `±1` along `axis`.
    fn shift(&self, s: usize, axis: usize, forward: bool) -> usize {
        let l = self.side;
        let mut c = self.coords_of(s);
        c[axis] = if forward { (c[axis] + 1) % l } else { (c[axis] + l - 1) % l };
        self.site(c[0], c[1], c[2])
    }

    pub fn gradient(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n_sites();
        let mut out = vec![0.0; 3 * n];
        for axis in 0..3 {
            for s in 0..n {
                out[axis * n + s] = (f[self.shift(s, axis, true)] - f[s]) / self.spacing;
            }
        }
        out
    }

    /// `Dᵀv`.
    pub fn gradient_transpose(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n_sites();
        let mut out = vec![0.0; n];
        for axis in 0..3 {
            for s in 0..n {
                out[s] += (v[axis * n + self.shift(s, axis, false)] - v[axis * n + s]) / self.spacing;
            }
        }
        out
    }

    /// Backward-difference divergence `−Dᵀv`.
    pub fn divergence(&self, v: &[f64]) -> Vec<f64> {
        self.gradient_transpose(v).into_iter().map(|x| -x).collect()
    }

    /// Divergence at one site.
    pub fn divergence_at(&self, v: &[f64], s: usize) -> f64 {
        let n = self.n_sites();
        (0..3)
            .map(|axis| v[axis * n + s] - v[axis * n + self.shift(s, axis, false)])
            .sum::<f64>()
            / self.spacing
    }

    /// `DᵀD f`, minus the scalar Laplacian.
    fn neg_laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.gradient_transpose(&self.gradient(f))
    }

    /// Componentwise Laplacian `−DᵀD A_i`.
    pub fn vector_laplacian(&self, a: &[f64]) -> Vec<f64> {
        let n = self.n_sites();
        let mut out = Vec::with_capacity(3 * n);
        for axis in 0..3 {
            out.extend(self.neg_laplacian(&a[axis * n..(axis + 1) * n]).into_iter().map(|x| -x));
        }
        out
    }

    /// `(DᵀD)⁺ b` by conjugate gradients on the mean-zero subspace.
    pub fn solve_laplacian(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = b.len() as f64;
        let mean = b.iter().sum::<f64>() / n;
        let r0: Vec<f64> = b.iter().map(|v| v - mean).collect();
        let bnorm = dot(&r0, &r0).sqrt();
        let mut x = vec![0.0; b.len()];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = r0;
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        for _ in 0..10 * b.len() + 100 {
            let ap = self.neg_laplacian(&p);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rr / pap;
            for i in 0..x.len() {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new = dot(&r, &r);
            if rr_new.sqrt() <= CG_TOL * bnorm {
                let m = x.iter().sum::<f64>() / n;
                return Ok(x.into_iter().map(|v| v - m).collect());
            }
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..p.len() {
                p[i] = r[i] + beta * p[i];
            }
        }
        Err(Error::Degenerate {
            det: 0.0,
            threshold: CG_TOL,
            point: Vec::new(),
        })
    }

    /// `P v = v − D(DᵀD)⁺Dᵀ v`.
    pub fn apply_projector(&self, v: &[f64]) -> Result<Vec<f64>> {
        let lambda = self.solve_laplacian(&self.gradient_transpose(v))?;
        let g = self.gradient(&lambda);
        Ok(v.iter().zip(&g).map(|(a, b)| a - b).collect())
    }

    /// Dense transverse projector, one column per unit vector.
    pub fn projector(&self) -> Result<DMatrix<f64>> {
        let dim = self.field_len();
        let mut p = DMatrix::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        for j in 0..dim {
            e[j] = 1.0;
            let col = self.apply_projector(&e)?;
            e[j] = 0.0;
            for (i, v) in col.into_iter().enumerate() {
                p[(i, j)] = v;
            }
        }
        Ok(p)
    }

    pub fn chart(&self) -> Arc<ChartSpec> {
        let n = self.n_sites();
        let names = |prefix: char| -> Vec<String> {
            (0..3)
                .flat_map(|axis| {
                    (0..n).map(move |s| {
                        let c = self.coords_of(s);
                        format!("{prefix}{}({},{},{})", ["x", "y", "z"][axis], c[0], c[1], c[2])
                    })
                })
                .collect()
        };
        Arc::new(ChartSpec::new(&names('A'), &names('E')).expect("distinct labels"))
    }

    fn divergence_field(&self, chart: &Arc<ChartSpec>, name: String, offset: usize, s: usize) -> ScalarField {
        let model = self.clone();
        let n = self.n_sites();
        let dim = chart.dim();
        let mut grad = vec![0.0; dim];
        for axis in 0..3 {
            grad[offset + axis * n + s] += 1.0 / self.spacing;
            grad[offset + axis * n + self.shift(s, axis, false)] -= 1.0 / self.spacing;
        }
        ScalarField::from_closed_form(
            chart,
            name,
            move |z| model.divergence_at(&z[offset..offset + 3 * n], s),
            move |_| grad.clone(),
        )
    }

    /// Coulomb gauge `χ(x) = div A` then Gauss law `C(x) = div E`, each on
    /// every site but the last.
    pub fn constraint_set(&self, chart: &Arc<ChartSpec>) -> ConstraintSet {
        let n = self.n_sites();
        let mut fields = Vec::with_capacity(2 * (n - 1));
        for s in 0..n - 1 {
            fields.push(self.divergence_field(chart, format!("chi{s}"), 0, s));
        }
        for s in 0..n - 1 {
            fields.push(self.divergence_field(chart, format!("gauss{s}"), 3 * n, s));
        }
        ConstraintSet::new(chart, fields).expect("2(L³ − 1) constraints in 6L³ dimensions")
    }

    /// Gauss law alone on every site but the last.
    pub fn gauss_set(&self, chart: &Arc<ChartSpec>) -> ConstraintSet {
        let n = self.n_sites();
        let fields = (0..n - 1)
            .map(|s| self.divergence_field(chart, format!("gauss{s}"), 3 * n, s))
            .collect();
        ConstraintSet::new(chart, fields).expect("L³ − 1 constraints")
    }

    /// Coordinate Dirac brackets of the lattice fields under `(χ, C)`.
    ///
    /// The constraints are linear, so the brackets are the same at every
    /// point; they are evaluated at the origin. Singularity is decided by
    /// numerical rank.
    pub fn dirac_blocks(&self) -> Result<MaxwellDiracBlocks> {
        let chart = self.chart();
        let cs = self.constraint_set(&chart);
        let dim = chart.dim();
        let ds = DiracStructure::at_coords_with(&cs, &vec![0.0; dim], DegeneracyTest::Rank(1e-10))?;
        let pi = ds.coordinate_matrix();
        let h = dim / 2;
        Ok(MaxwellDiracBlocks {
            ae: pi.view((0, h), (h, h)).into_owned(),
            aa: pi.view((0, 0), (h, h)).into_owned(),
            ee: pi.view((h, h), (h, h)).into_owned(),
        })
    }

    /// `H = ½Σ E² + ½Σ_ij (D_j A_i)²`.
    pub fn energy(&self, z: &[f64]) -> f64 {
        let n3 = self.field_len();
        let (a, e) = z.split_at(n3);
        let n = self.n_sites();
        let grad_sq: f64 = (0..3)
            .map(|axis| {
                let g = self.gradient(&a[axis * n..(axis + 1) * n]);
                dot(&g, &g)
            })
            .sum();
        0.5 * (dot(e, e) + grad_sq)
    }

    /// Hamiltonian with closed-form gradient `(−ΔA, E)`.
    pub fn hamiltonian(&self, chart: &Arc<ChartSpec>) -> ScalarField {
        let (m1, m2) = (self.clone(), self.clone());
        let n3 = self.field_len();
        ScalarField::from_closed_form(
            chart,
            "H",
            move |z| m1.energy(z),
            move |z| {
                let mut g: Vec<f64> = m2.vector_laplacian(&z[..n3]).into_iter().map(|x| -x).collect();
                g.extend_from_slice(&z[n3..]);
                g
            },
        )
    }

    /// Largest `|P v − v|` relative to `max(1, max|v|)`.
    pub fn transverse_defect(&self, v: &[f64]) -> Result<f64> {
        let pv = self.apply_projector(v)?;
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        Ok(pv.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale)
    }

    /// `Ȧ = E`, `Ė = ΔA` from transverse initial data. Residuals record the
    /// Coulomb gauge and Gauss law on every site but the last.
    pub fn evolve(&self, a0: &[f64], e0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
        let n3 = self.field_len();
        if a0.len() != n3 || e0.len() != n3 {
            return Err(Error::usage(format!("fields must have length 3L³ = {n3}")));
        }
        for (name, v) in [("A", a0), ("E", e0)] {
            let defect = self.transverse_defect(v)?;
            if !(defect <= TRANSVERSE_TOL) {
                return Err(Error::usage(format!(
                    "initial {name} is not transverse: |Pv − v| = {defect:e}"
                )));
            }
        }
        let chart = self.chart();
        let mut z = a0.to_vec();
        z.extend_from_slice(e0);
        let x0 = PhaseSpacePoint::new(&chart, z)?;
        let flow = FlowSpec::poisson(Some(self.hamiltonian(&chart))).with_monitor(self.constraint_set(&chart));
        evolve(&x0, &flow, cfg)
    }

    /// Lattice wave number `k = 2πn/(La)`.
    fn wave_numbers(&self, n: [i64; 3]) -> [f64; 3] {
        let l = self.side as f64;
        n.map(|ni| 2.0 * PI * ni as f64 / (l * self.spacing))
    }

    /// Real eigenmode `A_i(x) = η_i cos(k·x + k_i a/2)` of the vector Laplacian
    /// with frequency `ω² = Σ 4 sin²(k_i a/2)/a²`. Transverse iff
    /// `Σ η_i sin(k_i a/2) = 0`.
    pub fn transverse_mode(&self, n: [i64; 3], eta: [f64; 3]) -> Result<(Vec<f64>, f64)> {
        let k = self.wave_numbers(n);
        let a = self.spacing;
        let s = k.map(|ki| (ki * a / 2.0).sin());
        let div = eta.iter().zip(&s).map(|(e, si)| e * si).sum::<f64>();
        if div.abs() > 1e-12 * eta.iter().fold(1.0f64, |m, e| m.max(e.abs())) {
            return Err(Error::usage(format!("polarization {eta:?} is not transverse to mode {n:?}")));
        }
        let sites = self.n_sites();
        let mut field = vec![0.0; 3 * sites];
        for s_idx in 0..sites {
            let c = self.coords_of(s_idx);
            let phase: f64 = (0..3).map(|j| k[j] * c[j] as f64 * a).sum();
            for axis in 0..3 {
                field[axis * sites + s_idx] = eta[axis] * (phase + k[axis] * a / 2.0).cos();
            }
        }
        let omega = (s.iter().map(|si| 4.0 * si * si).sum::<f64>()).sqrt() / a;
        Ok((field, omega))
    }

    /// `P` applied to a uniform random vector in `[−1, 1)^{3L³}`.
    pub fn random_transverse(&self, rng: &mut SampleRng) -> Result<Vec<f64>> {
        let v = rng.vector(self.field_len(), -1.0, 1.0);
        self.apply_projector(&v)
    }

    /// Random scalar with zero lattice mean.
    pub fn random_mean_zero(&self, rng: &mut SampleRng) -> Vec<f64> {
        let v = rng.vector(self.n_sites(), -1.0, 1.0);
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.into_iter().map(|x| x - m).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let m = LatticeMaxwell::new(3, 1.0).unwrap();
        let mut f = vec![0.0; 27];
        f[m.site(1, 1, 1)] = 1.0;
        let lap = m.divergence(&m.gradient(&f));
        assert_eq!(lap[m.site(1, 1, 1)], -6.0);
        assert_eq!(lap[m.site(2, 1, 1)], 1.0);
        assert_eq!(lap[m.site(1, 1, 0)], 1.0);
        assert_eq!(lap.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn projector_kills_gradients_and_fixes_curls() {
        let m = LatticeMaxwell::new(4, 1.0).unwrap();
        let mut rng = SampleRng::new(3);
        let lambda = m.random_mean_zero(&mut rng);
        let g = m.gradient(&lambda);
        let pg = m.apply_projector(&g).unwrap();
        assert!(pg.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-12);
        let t = m.random_transverse(&mut rng).unwrap();
        assert!(m.divergence(&t).iter().all(|v| v.abs() < 1e-12));
        assert!(m.transverse_defect(&t).unwrap() < 1e-12);
    }

    #[test]
    fn mode_is_divergence_free_eigenvector() {
        let m = LatticeMaxwell::new(4, 1.0).unwrap();
        let (a, omega) = m.transverse_mode([1, 0, 0], [0.0, 1.0, 0.0]).unwrap();
        assert!(m.divergence(&a).iter().all(|v| v.abs() < 1e-12));
        let lap = m.vector_laplacian(&a);
        for (l, v) in lap.iter().zip(&a) {
            assert!((l + omega * omega * v).abs() < 1e-12);
        }
        assert!(m.transverse_mode([1, 0, 0], [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn side_one_is_rejected() {
        assert!(LatticeMaxwell::new(1, 1.0).is_err());
    }
}
