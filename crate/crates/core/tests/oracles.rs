//! Closed-form values worked out by hand for specific points.

use std::f64::consts::PI;

use dirac_core::models::{KlauderModel, LatticeMaxwell, Potential, RelativisticParticle};
use dirac_core::quantum::{expect_cartesian, expect_phi, expect_reduced, CircleState, SpectrumTable};
use dirac_core::{
    classify, constraint_matrix, dirac_bracket, fp_determinant, ConstraintClass, Error, PhaseSpacePoint, ScalarField,
};
use num_complex::Complex64;

#[test]
fn klauder_constraint_matrix_at_unit_point() {
    // {χ, C} = p_r² + p_φ²/r² + α²r² = 1 + 0 + 1 at (r, φ, p_r, p_φ) = (1, 0, 1, 0).
    let m = KlauderModel::new(1.0, 1.0).unwrap();
    let c = m.polar_chart();
    let x = PhaseSpacePoint::new(&c, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
    let mat = constraint_matrix(&m.constraint_set(&c), &x).unwrap();
    assert_eq!(mat[(0, 1)], 2.0);
    assert_eq!(mat[(1, 0)], -2.0);
    let det = fp_determinant(&[m.chi(&c)], &[m.constraint(&c)], &x).unwrap();
    assert_eq!(det, 2.0);
}

#[test]
fn klauder_r_phi_bracket_by_hand() {
    // (r, p_r, p_φ) = (2, 0.5, 1), α = 1: D = 1 + 1 + 16 = 18, {r, φ}_D = −2/18,
    // {φ, p_r}_D = −0.5/18.
    let m = KlauderModel::new(1.0, 0.3).unwrap();
    let c = m.polar_chart();
    let cs = m.constraint_set(&c);
    let x = PhaseSpacePoint::new(&c, vec![2.0, 0.4, 0.5, 1.0]).unwrap();
    let f = |l: &str| ScalarField::coordinate(&c, l).unwrap();
    let rphi = dirac_bracket(&f("r"), &f("phi"), &cs, &x).unwrap();
    let phipr = dirac_bracket(&f("phi"), &f("p_r"), &cs, &x).unwrap();
    let phipphi = dirac_bracket(&f("phi"), &f("p_phi"), &cs, &x).unwrap();
    assert!((rphi + 1.0 / 9.0).abs() < 1e-15, "{rphi}");
    assert!((phipr + 0.5 / 18.0).abs() < 1e-15, "{phipr}");
    assert!((phipphi - 1.0).abs() < 1e-15);
}

#[test]
fn classification_of_klauder_sets() {
    let m = KlauderModel::new(1.0, 1.0).unwrap();
    let c = m.polar_chart();
    let pts: Vec<PhaseSpacePoint> = [0.5, 1.5, -2.0]
        .iter()
        .map(|&p| m.surface_point(&c, 0.0, p, 0.0).unwrap())
        .collect();
    assert_eq!(classify(&m.constraint_set(&c), &pts, 1e-10).unwrap().kind, ConstraintClass::SecondClass);
    assert_eq!(classify(&m.first_class_set(&c), &pts, 1e-10).unwrap().kind, ConstraintClass::FirstClass);
}

#[test]
fn dirac_bracket_at_origin_is_a_domain_error() {
    let m = KlauderModel::new(1.0, 0.0).unwrap();
    assert!(matches!(m.reduced_point(0.0), Err(Error::Domain(_))));
}

#[test]
fn phi_rate_from_bracket() {
    // U = ½r², α = 1, k = 0, p_φ = 2: r* = √2, U'(r*) = √2, rate = 2·√2 / (2·2√2) = 0.5.
    let m = KlauderModel::new(1.0, 0.0).unwrap().with_potential(Potential::harmonic()).unwrap();
    assert!((m.phi_rate(2.0).unwrap() - 0.5).abs() < 1e-15);
    let c = m.polar_chart();
    let x = m.surface_point(&c, 0.0, 2.0, 0.0).unwrap();
    let phi = ScalarField::coordinate(&c, "phi").unwrap();
    let b = dirac_bracket(&phi, &m.hamiltonian(&c), &m.constraint_set(&c), &x).unwrap();
    assert!((b - 0.5).abs() < 1e-14, "{b}");
}

#[test]
fn particle_velocity() {
    // p = (3, 4), m = 0: not allowed; m = 5 gives E = √50, v = p/E.
    let p = RelativisticParticle::new(5.0, 2).unwrap();
    let x = p.trajectory(&[0.0, 0.0], &[3.0, 4.0], 50f64.sqrt()).unwrap();
    assert!((x[0] - 3.0).abs() < 1e-15 && (x[1] - 4.0).abs() < 1e-15);
    assert!(RelativisticParticle::new(0.0, 2).is_err());
}

#[test]
fn maxwell_projector_trace_and_rank() {
    for l in [2, 3] {
        let lattice = LatticeMaxwell::new(l, 1.0).unwrap();
        let p = lattice.projector().unwrap();
        let n = (l * l * l) as f64;
        assert!((p.trace() - (2.0 * n + 1.0)).abs() < 1e-10);
    }
}

#[test]
fn maxwell_plane_wave_frequency() {
    // n = (1, 0, 0) on L = 4: k = π/2, ω = 2 sin(π/4) = √2.
    let lattice = LatticeMaxwell::new(4, 1.0).unwrap();
    let (_, omega) = lattice.transverse_mode([1, 0, 0], [0.0, 1.0, 0.0]).unwrap();
    assert!((omega - 2f64.sqrt()).abs() < 1e-15);
    assert!(lattice.transverse_mode([1, 0, 0], [1.0, 0.0, 0.0]).is_err());
}

#[test]
fn two_mode_phi_expectation_by_hand() {
    // c_0 = c_1 = 1/√2 with U ≡ 0: ⟨φ⟩ = π − i(c_0* c_1 − c_1* c_0) = π, and
    // with c_1 = i/√2 the cross term gives π − i(i/2 + i/2) = π + 1.
    let m = KlauderModel::new(1.0, 1.0).unwrap().with_potential(Potential::Poly { coeffs: vec![] }).unwrap();
    let t = SpectrumTable::new(&m, 3).unwrap();
    let h = 0.5f64.sqrt();
    let s = CircleState::from_modes(3, 1.0, &[(0, Complex64::new(h, 0.0)), (1, Complex64::new(0.0, h))]).unwrap();
    let e = expect_phi(&s, &t, 0.0).unwrap();
    assert!((e.mean - (PI + 1.0)).abs() < 1e-15, "{}", e.mean);
    assert!(e.imag_residue.abs() < 1e-15);
}

#[test]
fn single_mode_expectations() {
    // |m = 2⟩, k = 0, α = 1, ħ = 1: r* = √2, ⟨p_r⟩ = 0, ⟨p_φ⟩ = 2, no coherences.
    let m = KlauderModel::new(1.0, 0.0).unwrap();
    let t = SpectrumTable::new(&m, 4).unwrap();
    let s = CircleState::basis(4, 1.0, 2).unwrap();
    let (r, pr, pphi) = expect_reduced(&s, &t).unwrap();
    assert!((r - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!((pr, pphi), (0.0, 2.0));
    let (xy, pxy) = expect_cartesian(&s, &t, 1.3).unwrap();
    assert_eq!((xy, pxy), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    assert_eq!(expect_phi(&s, &t, 4.0).unwrap().mean, PI);
}
