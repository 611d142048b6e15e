//! Poisson brackets and gradient diagnostics.

use crate::chart::{ChartSpec, PhaseSpacePoint};
use crate::error::{Error, Result};
use crate::field::{central_difference, ScalarField};

/// `Σ_i (∂a/∂q_i ∂b/∂p_i − ∂b/∂q_i ∂a/∂p_i)` at `x`.
pub fn poisson_bracket(a: &ScalarField, b: &ScalarField, x: &PhaseSpacePoint) -> Result<f64> {
    a.ensure_chart(x.chart())?;
    b.ensure_chart(x.chart())?;
    let ga = checked_gradient(a, x.coords(), x.chart())?;
    let gb = checked_gradient(b, x.coords(), x.chart())?;
    Ok(symplectic_product(&ga, &gb))
}

/// Bracket of two gradient vectors in `(q.., p..)` order.
pub fn symplectic_product(ga: &[f64], gb: &[f64]) -> f64 {
    let n = ga.len() / 2;
    (0..n)
        .map(|i| ga[i] * gb[n + i] - gb[i] * ga[n + i])
        .sum()
}

/// `Ω·g` for the canonical Poisson tensor: the vector field `{z, f}` with `g = ∇f`.
pub fn hamiltonian_vector(g: &[f64]) -> Vec<f64> {
    let n = g.len() / 2;
    let mut out = vec![0.0; g.len()];
    for i in 0..n {
        out[i] = g[n + i];
        out[n + i] = -g[i];
    }
    out
}

pub(crate) fn checked_gradient(f: &ScalarField, z: &[f64], chart: &ChartSpec) -> Result<Vec<f64>> {
    let g = f.gradient_at(z);
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "gradient",
            label: chart.labels()[i].clone(),
        });
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub max_rel_err: f64,
    /// Coordinate where the worst discrepancy occurred.
    pub worst_label: String,
}

/// Compares `f`'s gradient map against central differences with step
/// `cbrt(ε)·max(1, |x_i|)`. Relative errors are taken against
/// `max(1, |finite difference|)`.
pub fn gradient_consistency_check(f: &ScalarField, x: &PhaseSpacePoint) -> GradientReport {
    let z = x.coords();
    let value = |w: &[f64]| f.value_at(w);
    let h0 = f64::EPSILON.cbrt();
    let fd = central_difference(&value, z, |zi| h0 * zi.abs().max(1.0));
    let g = f.gradient_at(z);
    let (worst, max_rel_err) = g
        .iter()
        .zip(&fd)
        .map(|(gi, di)| {
            let err = (gi - di).abs() / di.abs().max(1.0);
            if err.is_nan() {
                f64::INFINITY
            } else {
                err
            }
        })
        .enumerate()
        .fold((0, 0.0), |best, (i, e)| if e > best.1 { (i, e) } else { best });
    GradientReport {
        max_rel_err,
        worst_label: x.chart().labels()[worst].clone(),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dual::Dual;

    fn chart2() -> Arc<ChartSpec> {
        Arc::new(ChartSpec::new(&["q1", "q2"], &["p1", "p2"]).unwrap())
    }

    #[test]
    fn canonical_relations_are_exact() {
        let c = chart2();
        let x = PhaseSpacePoint::new(&c, vec![0.3, -1.2, 2.5, 0.7]).unwrap();
        for (i, a) in c.labels().iter().enumerate() {
            for (j, b) in c.labels().iter().enumerate() {
                let fa = ScalarField::coordinate(&c, a).unwrap();
                let fb = ScalarField::coordinate(&c, b).unwrap();
                let expected = match (i, j) {
                    (0, 2) | (1, 3) => 1.0,
                    (2, 0) | (3, 1) => -1.0,
                    _ => 0.0,
                };
                assert_eq!(poisson_bracket(&fa, &fb, &x).unwrap(), expected);
            }
        }
    }

    #[test]
    fn chart_mismatch_is_a_usage_error() {
        let c = chart2();
        let other = Arc::new(ChartSpec::new(&["x"], &["px"]).unwrap());
        let a = ScalarField::coordinate(&c, "q1").unwrap();
        let x = PhaseSpacePoint::new(&other, vec![0.0, 1.0]).unwrap();
        assert!(matches!(poisson_bracket(&a, &a, &x), Err(Error::Usage(_))));
    }

    #[test]
    fn non_finite_gradient_names_the_label() {
        let c = chart2();
        let a = ScalarField::from_dual(&c, "sqrt_p2", |z| z[3].sqrt());
        let b = ScalarField::coordinate(&c, "q1").unwrap();
        let x = PhaseSpacePoint::new(&c, vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        match poisson_bracket(&a, &b, &x) {
            Err(Error::NonFinite { label, .. }) => assert_eq!(label, "p2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gradient_check_accepts_polynomial_and_flags_offset() {
        let c = chart2();
        let x = PhaseSpacePoint::new(&c, vec![3.0, 0.5, -0.2, 1.1]).unwrap();
        let sq = ScalarField::from_dual(&c, "q1^2", |z| z[0] * z[0]);
        assert!(gradient_consistency_check(&sq, &x).max_rel_err < 1e-6);

        let wrong = ScalarField::from_closed_form(
            &c,
            "bad",
            |z| z[0] * z[0],
            |z| vec![2.0 * z[0] + 1.0, 1.0, 1.0, 1.0],
        );
        assert!(gradient_consistency_check(&wrong, &x).max_rel_err > 0.1);
    }

    #[test]
    fn numerical_gradient_field_brackets_close_to_exact() {
        let c = chart2();
        let x = PhaseSpacePoint::new(&c, vec![0.4, 1.3, -0.6, 0.9]).unwrap();
        let exact = ScalarField::from_dual(&c, "f", |z| z[0] * z[2] * z[2] + Dual::sin(z[1]) * z[3]);
        let numeric = ScalarField::numerical(
            &c,
            "f",
            |z| z[0] * z[2] * z[2] + z[1].sin() * z[3],
            1e-5,
        )
        .unwrap();
        let h = ScalarField::from_dual(&c, "h", |z| z[0] * z[1] + z[2] * z[3] * z[3]);
        let a = poisson_bracket(&exact, &h, &x).unwrap();
        let b = poisson_bracket(&numeric, &h, &x).unwrap();
        assert!((a - b).abs() < 1e-8);
    }
}
