use serde::{Deserialize, Serialize};

use crate::dual::Dual;

/// Radial potential `U(r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Potential {
    /// `U(r) = Σ_i coeffs[i]·rⁱ`.
    Poly { coeffs: Vec<f64> },
}

impl Default for Potential {
    fn default() -> Self {
        Potential::Poly { coeffs: Vec::new() }
    }
}

impl Potential {
    /// `U(r) = ½r²`.
    pub fn harmonic() -> Self {
        Potential::Poly {
            coeffs: vec![0.0, 0.0, 0.5],
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Potential::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c),
        }
    }

    /// `U'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Potential::Poly { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * r + i as f64 * c),
        }
    }

    pub fn dual(&self, r: Dual) -> Dual {
        match self {
            Potential::Poly { coeffs } => coeffs
                .iter()
                .rev()
                .fold(Dual::constant(0.0), |acc, &c| acc * r + c),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Potential::Poly { coeffs } => coeffs.iter().all(|c| c.is_finite()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_direct_sum() {
        let u = Potential::Poly {
            coeffs: vec![1.0, -2.0, 0.5, 3.0],
        };
        let r = 1.7;
        let direct = 1.0 - 2.0 * r + 0.5 * r * r + 3.0 * r * r * r;
        let slope = -2.0 + r + 9.0 * r * r;
        assert!((u.value(r) - direct).abs() < 1e-14);
        assert!((u.derivative(r) - slope).abs() < 1e-14);
        let d = u.dual(Dual::variable(r));
        assert!((d.re - direct).abs() < 1e-14 && (d.eps - slope).abs() < 1e-13);
    }

    #[test]
    fn empty_potential_is_zero() {
        let u = Potential::default();
        assert_eq!((u.value(3.0), u.derivative(3.0)), (0.0, 0.0));
    }

    #[test]
    fn parses_tagged_json() {
        let u: Potential = serde_json::from_str(r#"{"type":"poly","coeffs":[0,0,0.5]}"#).unwrap();
        assert_eq!(u, Potential::harmonic());
        assert!(serde_json::from_str::<Potential>(r#"{"type":"poly","coeffs":[],"x":1}"#).is_err());
    }
}
