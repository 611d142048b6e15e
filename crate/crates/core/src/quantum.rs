//! States on the circle in the angular-momentum basis and the reduced
//! quantum dynamics of the toy model.
//!
//! A state is `ψ(φ) = Σ_m c_m e^{imφ}` over `m ∈ [−M, M]`, normalized by
//! `(1/2π)∫|ψ|² dφ = Σ|c_m|² = 1`. The physical Hamiltonian is diagonal,
//! `Ĥ|m⟩ = U(r*_m)|m⟩` with `r*_m = ((k² + (mħ)²)/α²)^{1/4}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::klauder::KlauderModel;
use crate::sampling::SampleRng;

/// Default mode cutoff `M`.
pub const DEFAULT_M_MAX: usize = 64;

/// Nodes used by the angle quadrature oracle.
pub const PHI_QUADRATURE_INTERVALS: usize = 4096;

/// Coefficients are held as `c_m = b_m e^{−iθ_m}` with the accumulated phase
/// `θ_m` kept apart, so time evolution never touches `|c_m|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct CircleState {
    m_max: usize,
    hbar: f64,
    base: Vec<Complex64>,
    shift: Vec<f64>,
}

/// JSON layout: `{"hbar": .., "m_max": .., "coeffs": [[re, im], ..]}`, `m = −M..M`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRepr {
    hbar: f64,
    m_max: usize,
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<StateRepr> for CircleState {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        CircleState::new(
            r.m_max,
            r.hbar,
            r.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
        )
    }
}

impl From<CircleState> for StateRepr {
    fn from(s: CircleState) -> Self {
        StateRepr {
            hbar: s.hbar,
            m_max: s.m_max,
            coeffs: s.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl CircleState {
    /// `coeffs` lists `c_{−M}..c_M`.
    pub fn new(m_max: usize, hbar: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if m_max == 0 {
            return Err(Error::usage("mode cutoff must be positive"));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::usage(format!("hbar must be positive and finite, got {hbar}")));
        }
        if coeffs.len() != 2 * m_max + 1 {
            return Err(Error::usage(format!(
                "expected {} coefficients for m_max = {m_max}, got {}",
                2 * m_max + 1,
                coeffs.len()
            )));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite {
                what: "coefficient",
                label: format!("c_{}", i as i64 - m_max as i64),
            });
        }
        Ok(CircleState {
            m_max,
            hbar,
            shift: vec![0.0; coeffs.len()],
            base: coeffs,
        })
    }

    /// Coefficients given as `(m, c_m)`; all others zero.
    pub fn from_modes(m_max: usize, hbar: f64, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * m_max + 1];
        for &(m, c) in modes {
            if m.unsigned_abs() as usize > m_max {
                return Err(Error::usage(format!("mode {m} is outside the window ±{m_max}")));
            }
            coeffs[(m + m_max as i64) as usize] += c;
        }
        CircleState::new(m_max, hbar, coeffs)
    }

    pub fn basis(m_max: usize, hbar: f64, m: i64) -> Result<Self> {
        CircleState::from_modes(m_max, hbar, &[(m, Complex64::new(1.0, 0.0))])
    }

    /// Normalized state with `n_modes` random coefficients on the lowest modes
    /// `−⌊n/2⌋..`: draws `re, im ∈ [−1, 1)` per mode in increasing `m`.
    pub fn random(m_max: usize, hbar: f64, n_modes: usize, rng: &mut SampleRng) -> Result<Self> {
        let lo = -((n_modes / 2) as i64);
        let modes: Vec<(i64, Complex64)> = (0..n_modes as i64)
            .map(|j| {
                let re = rng.uniform(-1.0, 1.0);
                let im = rng.uniform(-1.0, 1.0);
                (lo + j, Complex64::new(re, im))
            })
            .collect();
        CircleState::from_modes(m_max, hbar, &modes)?.normalize()
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `c_{−M}..c_M`.
    pub fn coeffs(&self) -> Vec<Complex64> {
        (0..self.base.len()).map(|i| self.coeff_at(i)).collect()
    }

    fn coeff_at(&self, i: usize) -> Complex64 {
        if self.shift[i] == 0.0 {
            self.base[i]
        } else {
            self.base[i] * Complex64::cis(-self.shift[i])
        }
    }

    /// `|c_m|²` for every mode.
    pub fn weights(&self) -> Vec<f64> {
        self.base.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> + '_ {
        let m = self.m_max as i64;
        -m..=m
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        let i = m + self.m_max as i64;
        if i < 0 || i as usize >= self.base.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeff_at(i as usize)
        }
    }

    /// `Σ|c_m|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.base.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(Error::usage("cannot normalize the zero state"));
        }
        Ok(CircleState {
            base: self.base.iter().map(|c| c / n).collect(),
            ..self.clone()
        })
    }

    /// `ψ(φ)`.
    pub fn wavefunction(&self, phi: f64) -> Complex64 {
        self.modes()
            .zip(self.base.iter().zip(&self.shift))
            .map(|(m, (c, &p))| c * Complex64::cis(m as f64 * phi - p))
            .sum()
    }

    fn with_phases(&self, phase: impl Fn(usize) -> f64) -> Self {
        CircleState {
            shift: self
                .shift
                .iter()
                .enumerate()
                .map(|(i, p)| (p + phase(i)).rem_euclid(2.0 * PI))
                .collect(),
            ..self.clone()
        }
    }
}

/// `r*_m` and `U_m = U(r*_m)` for every mode of the window.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable {
    pub m_max: usize,
    pub hbar: f64,
    pub k: f64,
    pub alpha: f64,
    pub r_star: Vec<f64>,
    pub energy: Vec<f64>,
}

impl SpectrumTable {
    /// Spectrum at the instantaneous `k(t)`; `(k, m) = (0, 0)` gets `r* = 0`.
    pub fn at_time(model: &KlauderModel, m_max: usize, t: f64) -> Result<Self> {
        let k = model.k(t);
        if !k.is_finite() {
            return Err(Error::NonFinite {
                what: "k(t)",
                label: format!("t = {t}"),
            });
        }
        let (hbar, a2) = (model.hbar, model.alpha * model.alpha);
        let m = m_max as i64;
        let r_star: Vec<f64> = (-m..=m)
            .map(|j| {
                let pj = j as f64 * hbar;
                ((k * k + pj * pj) / a2).powf(0.25)
            })
            .collect();
        let energy = r_star.iter().map(|&r| model.potential.value(r)).collect();
        Ok(SpectrumTable {
            m_max,
            hbar,
            k,
            alpha: model.alpha,
            r_star,
            energy,
        })
    }

    pub fn new(model: &KlauderModel, m_max: usize) -> Result<Self> {
        Self::at_time(model, m_max, 0.0)
    }

    fn index(&self, m: i64) -> usize {
        (m + self.m_max as i64) as usize
    }

    pub fn r_star_of(&self, m: i64) -> f64 {
        self.r_star[self.index(m)]
    }

    pub fn energy_of(&self, m: i64) -> f64 {
        self.energy[self.index(m)]
    }

    fn check(&self, s: &CircleState) -> Result<()> {
        if s.m_max != self.m_max {
            return Err(Error::usage(format!(
                "state window ±{} does not match spectrum window ±{}",
                s.m_max, self.m_max
            )));
        }
        if (s.hbar - self.hbar).abs() > 0.0 {
            return Err(Error::usage("state and spectrum use different hbar"));
        }
        Ok(())
    }

    /// Fails when a mode with `r*_m = 0` carries weight.
    fn check_degenerate(&self, s: &CircleState) -> Result<()> {
        for (i, (r, c)) in self.r_star.iter().zip(&s.base).enumerate() {
            if *r == 0.0 && c.norm_sqr() > 0.0 {
                return Err(Error::Domain(format!(
                    "mode m = {} has r* = 0 (k = 0) and non-zero weight",
                    i as i64 - self.m_max as i64
                )));
            }
        }
        Ok(())
    }
}

/// `c_m ↦ c_m e^{−iU_m t/ħ}`.
pub fn evolve_static(s: &CircleState, table: &SpectrumTable, t: f64) -> Result<CircleState> {
    table.check(s)?;
    Ok(s.with_phases(|i| table.energy[i] * t / s.hbar))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quadrature {
    /// Composite Simpson on `intervals` (rounded up to even) equal panels.
    Simpson { intervals: usize },
    /// Adaptive Simpson with absolute tolerance `tol`.
    Adaptive { tol: f64 },
}

/// `c_m ↦ c_m exp(−(i/ħ)∫_{t0}^{t1} U_m(t') dt')`.
///
/// Every instantaneous Hamiltonian is a function of `p̂_φ` alone, so they all
/// commute and the time-ordered exponential reduces to these phase integrals.
pub fn evolve_time_dependent(
    s: &CircleState,
    model: &KlauderModel,
    t0: f64,
    t1: f64,
    quad: Quadrature,
) -> Result<CircleState> {
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::usage("integration limits must be finite"));
    }
    if (model.hbar - s.hbar).abs() > 0.0 {
        return Err(Error::usage("state and model use different hbar"));
    }
    let (hbar, a2) = (model.hbar, model.alpha * model.alpha);
    let mut phases = Vec::with_capacity(s.base.len());
    for m in s.modes() {
        let pm = m as f64 * hbar;
        let u = |t: f64| {
            let k = model.k(t);
            model.potential.value(((k * k + pm * pm) / a2).powf(0.25))
        };
        for t in [t0, 0.5 * (t0 + t1), t1] {
            if !u(t).is_finite() {
                return Err(Error::NonFinite {
                    what: "U(r*(t))",
                    label: format!("m = {m}, t = {t}"),
                });
            }
        }
        let integral = match quad {
            Quadrature::Simpson { intervals } => simpson(u, t0, t1, intervals),
            Quadrature::Adaptive { tol } => adaptive_simpson(u, t0, t1, tol),
        };
        if !integral.is_finite() {
            return Err(Error::NonFinite {
                what: "phase integral",
                label: format!("m = {m}"),
            });
        }
        phases.push(integral / hbar);
    }
    Ok(s.with_phases(|i| phases[i]))
}

/// Composite Simpson rule on `[a, b]` with `n` panels (raised to the next even number).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

/// Adaptive Simpson with Richardson correction.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `(⟨r̂⟩, ⟨p̂_r⟩, ⟨p̂_φ⟩)`; these do not change under [`evolve_static`].
pub fn expect_reduced(s: &CircleState, table: &SpectrumTable) -> Result<(f64, f64, f64)> {
    table.check(s)?;
    table.check_degenerate(s)?;
    let mut out = (0.0, 0.0, 0.0);
    for ((m, w), r) in s.modes().zip(s.weights()).zip(&table.r_star) {
        if w == 0.0 {
            continue;
        }
        out.0 += w * r;
        out.1 += w * table.k / r;
        out.2 += w * m as f64 * s.hbar;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiExpectation {
    pub mean: f64,
    /// Imaginary part left over by the double sum; zero up to rounding.
    pub imag_residue: f64,
}

/// `⟨φ̂⟩ = π − i Σ_{n≠m} c*_m c_n e^{(i/ħ)(U_m − U_n)t} / (n − m)` for the
/// angle taken in `[0, 2π)`. Coefficients are evolved to `t` first.
pub fn expect_phi(s: &CircleState, table: &SpectrumTable, t: f64) -> Result<PhiExpectation> {
    let st = evolve_static(s, table, t)?;
    let coeffs = st.coeffs();
    let mut sum = Complex64::new(0.0, 0.0);
    for (m, cm) in st.modes().zip(&coeffs) {
        if cm.norm_sqr() == 0.0 {
            continue;
        }
        for (n, cn) in st.modes().zip(&coeffs) {
            if n != m {
                sum += cm.conj() * cn / (n - m) as f64;
            }
        }
    }
    let value = Complex64::new(PI * st.norm_sqr(), 0.0) - Complex64::i() * sum;
    Ok(PhiExpectation {
        mean: value.re,
        imag_residue: value.im,
    })
}

/// `(1/2π)∫₀^{2π} φ |ψ(φ, t)|² dφ` by composite Simpson.
pub fn expect_phi_quadrature(s: &CircleState, table: &SpectrumTable, t: f64, intervals: usize) -> Result<f64> {
    let st = evolve_static(s, table, t)?;
    Ok(simpson(|phi| phi * st.wavefunction(phi).norm_sqr(), 0.0, 2.0 * PI, intervals) / (2.0 * PI))
}

/// `⟨x̂ + iŷ⟩ = Σ_n r*_n c*_{n+1} c_n e^{(i/ħ)(U_{n+1} − U_n)t}` and
/// `⟨p̂_x + ip̂_y⟩ = Σ_n (k + i(n+1)ħ)/r*_n · c*_{n+1} c_n e^{(i/ħ)(U_{n+1} − U_n)t}`,
/// i.e. the orderings `e^{iφ} r̂` and `e^{iφ} p̂_r + i p̂_φ e^{iφ} r̂⁻¹`.
pub fn expect_cartesian(s: &CircleState, table: &SpectrumTable, t: f64) -> Result<(Complex64, Complex64)> {
    let st = evolve_static(s, table, t)?;
    let mut xy = Complex64::new(0.0, 0.0);
    let mut pxy = Complex64::new(0.0, 0.0);
    let top = st.m_max as i64;
    for n in -top..top {
        let coh = st.coeff(n + 1).conj() * st.coeff(n);
        if coh.norm_sqr() == 0.0 {
            continue;
        }
        let r = table.r_star_of(n);
        if r == 0.0 {
            return Err(Error::Domain(format!("mode n = {n} has r* = 0 and couples to n + 1")));
        }
        xy += r * coh;
        pxy += Complex64::new(table.k, (n + 1) as f64 * st.hbar) / r * coh;
    }
    Ok((xy, pxy))
}

/// Same expectations as [`expect_cartesian`] from dense mode-space matrices
/// of `e^{iφ}`, `r̂`, `r̂⁻¹`, `p̂_r`, `p̂_φ` composed in the stated order.
pub fn expect_cartesian_matrix_oracle(
    s: &CircleState,
    table: &SpectrumTable,
    t: f64,
) -> Result<(Complex64, Complex64)> {
    let st = evolve_static(s, table, t)?;
    let coeffs = st.coeffs();
    let dim = coeffs.len();
    let hbar = st.hbar;
    let diag = |d: Vec<Complex64>| -> Vec<Vec<Complex64>> {
        let mut mat = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (i, v) in d.into_iter().enumerate() {
            mat[i][i] = v;
        }
        mat
    };
    let mul = |a: &Vec<Vec<Complex64>>, b: &Vec<Vec<Complex64>>| -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for i in 0..dim {
            for k in 0..dim {
                if a[i][k].norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    };
    let weight = |w: f64| if w == 0.0 { 0.0 } else { 1.0 / w };
    let mut shift = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for j in 0..dim - 1 {
        shift[j + 1][j] = Complex64::new(1.0, 0.0);
    }
    let r = diag(table.r_star.iter().map(|&v| Complex64::new(v, 0.0)).collect());
    let r_inv = diag(table.r_star.iter().map(|&v| Complex64::new(weight(v), 0.0)).collect());
    let p_r = diag(table.r_star.iter().map(|&v| Complex64::new(table.k * weight(v), 0.0)).collect());
    let p_phi = diag(st.modes().map(|m| Complex64::new(m as f64 * hbar, 0.0)).collect());

    let x_op = mul(&shift, &r);
    let a = mul(&shift, &p_r);
    let b = mul(&p_phi, &mul(&shift, &r_inv));
    let expect = |op: &Vec<Vec<Complex64>>| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += coeffs[i].conj() * op[i][j] * coeffs[j];
            }
        }
        acc
    };
    Ok((expect(&x_op), expect(&a) + Complex64::i() * expect(&b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::potential::Potential;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalize_examples() {
        let s = CircleState::from_modes(2, 1.0, &[(1, c(2.0, 0.0))]).unwrap().normalize().unwrap();
        assert_eq!(s.coeff(1), c(1.0, 0.0));
        let s = CircleState::from_modes(2, 1.0, &[(0, c(1.0, 0.0)), (1, c(1.0, 0.0))])
            .unwrap()
            .normalize()
            .unwrap();
        assert!((s.coeff(0).re - 0.5f64.sqrt()).abs() < 1e-15);
        let again = s.normalize().unwrap();
        for (a, b) in s.coeffs().iter().zip(again.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
        let zero = CircleState::from_modes(2, 1.0, &[]).unwrap();
        assert!(matches!(zero.normalize(), Err(Error::Usage(_))));
    }

    #[test]
    fn json_round_trip() {
        let s = CircleState::from_modes(1, 0.5, &[(-1, c(0.6, 0.0)), (1, c(0.0, 0.8))]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"hbar":0.5,"m_max":1,"coeffs":[[0.6,0.0],[0.0,0.0],[0.0,0.8]]}"#);
        let back: CircleState = serde_json::from_str(&text).unwrap();
        for (a, b) in back.coeffs().iter().zip(s.coeffs()) {
            assert!((a - b).norm() < 1e-16);
        }
        assert!(serde_json::from_str::<CircleState>(r#"{"hbar":1,"m_max":1,"coeffs":[[1,0]]}"#).is_err());
    }

    #[test]
    fn reduced_expectations() {
        let m = KlauderModel::new(1.0, 0.0).unwrap();
        let table = SpectrumTable::new(&m, 3).unwrap();
        let s = CircleState::basis(3, 1.0, 1).unwrap();
        assert_eq!(expect_reduced(&s, &table).unwrap(), (1.0, 0.0, 1.0));
        let sym = CircleState::from_modes(3, 1.0, &[(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))])
            .unwrap()
            .normalize()
            .unwrap();
        assert!(expect_reduced(&sym, &table).unwrap().2.abs() < 1e-15);
        let zero_mode = CircleState::basis(3, 1.0, 0).unwrap();
        assert!(matches!(expect_reduced(&zero_mode, &table), Err(Error::Domain(_))));

        let m1 = KlauderModel::new(1.0, 1.0).unwrap();
        let t1 = SpectrumTable::new(&m1, 3).unwrap();
        assert_eq!(expect_reduced(&zero_mode, &t1).unwrap(), (1.0, 1.0, 0.0));
    }

    #[test]
    fn phi_of_two_mode_state_at_zero_time() {
        let m = KlauderModel::new(1.0, 1.0).unwrap().with_potential(Potential::harmonic()).unwrap();
        let table = SpectrumTable::new(&m, 4).unwrap();
        let s = CircleState::from_modes(4, 1.0, &[(0, c(1.0, 0.0)), (1, c(1.0, 0.0))])
            .unwrap()
            .normalize()
            .unwrap();
        let e = expect_phi(&s, &table, 0.0).unwrap();
        assert!((e.mean - PI).abs() < 1e-15);
        assert!(e.imag_residue.abs() < 1e-15);
        let later = expect_phi(&s, &table, 0.7).unwrap();
        let quad = expect_phi_quadrature(&s, &table, 0.7, PHI_QUADRATURE_INTERVALS).unwrap();
        assert!((later.mean - quad).abs() < 1e-8, "{} vs {quad}", later.mean);
    }

    #[test]
    fn cartesian_single_term() {
        let m = KlauderModel::new(1.0, 1.0).unwrap();
        let table = SpectrumTable::new(&m, 2).unwrap();
        let s = CircleState::from_modes(2, 1.0, &[(0, c(1.0, 0.0)), (1, c(1.0, 0.0))])
            .unwrap()
            .normalize()
            .unwrap();
        let (xy, _) = expect_cartesian(&s, &table, 0.0).unwrap();
        assert!((xy - c(0.5, 0.0)).norm() < 1e-15);
        let single = CircleState::basis(2, 1.0, 1).unwrap();
        assert_eq!(expect_cartesian(&single, &table, 0.3).unwrap(), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn simpson_rules() {
        assert!((simpson(|x| x * x * x, 0.0, 2.0, 2) - 4.0).abs() < 1e-14);
        assert!((adaptive_simpson(f64::sqrt, 0.0, 1.0, 1e-13) - 2.0 / 3.0).abs() < 1e-11);
    }
}
