//! Differentiable scalar functions on phase space.

use std::fmt;
use std::sync::Arc;

use crate::chart::{ChartSpec, PhaseSpacePoint};
use crate::dual::Dual;
use crate::error::{Error, Result};

pub type DualFn = Arc<dyn Fn(&[Dual]) -> Dual + Send + Sync>;
pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradientKind {
    Exact,
    Numerical { step: f64 },
}

#[derive(Clone)]
enum Repr {
    /// Gradient by forward-mode differentiation.
    Dual(DualFn),
    /// Caller-registered closed-form gradient.
    Closed { value: ValueFn, gradient: GradientFn },
    /// Central differences with a fixed absolute step.
    Numerical { value: ValueFn, step: f64 },
}

/// A real function on a chart together with its gradient map.
#[derive(Clone)]
pub struct ScalarField {
    chart: Arc<ChartSpec>,
    name: String,
    repr: Repr,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("gradient_kind", &self.gradient_kind())
            .finish()
    }
}

impl ScalarField {
    /// Field written over dual numbers; its gradient is exact.
    pub fn from_dual(
        chart: &Arc<ChartSpec>,
        name: impl Into<String>,
        f: impl Fn(&[Dual]) -> Dual + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            chart: Arc::clone(chart),
            name: name.into(),
            repr: Repr::Dual(Arc::new(f)),
        }
    }

    pub fn from_closed_form(
        chart: &Arc<ChartSpec>,
        name: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            chart: Arc::clone(chart),
            name: name.into(),
            repr: Repr::Closed {
                value: Arc::new(value),
                gradient: Arc::new(gradient),
            },
        }
    }

    pub fn numerical(
        chart: &Arc<ChartSpec>,
        name: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        step: f64,
    ) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::usage(format!("finite-difference step must be positive, got {step}")));
        }
        Ok(ScalarField {
            chart: Arc::clone(chart),
            name: name.into(),
            repr: Repr::Numerical {
                value: Arc::new(value),
                step,
            },
        })
    }

    /// The coordinate function `z ↦ z[label]`.
    pub fn coordinate(chart: &Arc<ChartSpec>, label: &str) -> Result<Self> {
        let i = chart.index_of(label)?;
        Ok(ScalarField::from_dual(chart, label, move |z| z[i]))
    }

    pub fn constant(chart: &Arc<ChartSpec>, c: f64) -> Self {
        ScalarField::from_dual(chart, format!("{c}"), move |_| Dual::constant(c))
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        &self.chart
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn gradient_kind(&self) -> GradientKind {
        match &self.repr {
            Repr::Dual(_) | Repr::Closed { .. } => GradientKind::Exact,
            Repr::Numerical { step, .. } => GradientKind::Numerical { step: *step },
        }
    }

    /// The dual-number form, when the field was built from one.
    pub fn dual_fn(&self) -> Option<&DualFn> {
        match &self.repr {
            Repr::Dual(f) => Some(f),
            _ => None,
        }
    }

    pub fn value(&self, x: &PhaseSpacePoint) -> Result<f64> {
        self.ensure_chart(x.chart())?;
        Ok(self.value_at(x.coords()))
    }

    pub fn gradient(&self, x: &PhaseSpacePoint) -> Result<Vec<f64>> {
        self.ensure_chart(x.chart())?;
        Ok(self.gradient_at(x.coords()))
    }

    pub(crate) fn ensure_chart(&self, chart: &ChartSpec) -> Result<()> {
        if self.chart.same_as(chart) {
            Ok(())
        } else {
            Err(Error::usage(format!(
                "field `{}` lives on chart {:?}, point on {:?}",
                self.name,
                self.chart.labels(),
                chart.labels()
            )))
        }
    }

    /// Value at raw coordinates (no domain check).
    pub fn value_at(&self, z: &[f64]) -> f64 {
        match &self.repr {
            Repr::Dual(f) => {
                let zd: Vec<Dual> = z.iter().map(|&v| Dual::constant(v)).collect();
                f(&zd).re
            }
            Repr::Closed { value, .. } | Repr::Numerical { value, .. } => value(z),
        }
    }

    /// Gradient at raw coordinates (no domain check).
    pub fn gradient_at(&self, z: &[f64]) -> Vec<f64> {
        match &self.repr {
            Repr::Dual(f) => {
                let mut zd: Vec<Dual> = z.iter().map(|&v| Dual::constant(v)).collect();
                (0..z.len())
                    .map(|i| {
                        zd[i].eps = 1.0;
                        let d = f(&zd).eps;
                        zd[i].eps = 0.0;
                        d
                    })
                    .collect()
            }
            Repr::Closed { gradient, .. } => gradient(z),
            Repr::Numerical { value, step } => central_difference(value.as_ref(), z, |_| *step),
        }
    }
}

/// Central-difference gradient with a per-coordinate step.
pub(crate) fn central_difference(
    f: &(dyn Fn(&[f64]) -> f64 + Send + Sync),
    z: &[f64],
    step: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let mut work = z.to_vec();
    (0..z.len())
        .map(|i| {
            let h = step(z[i]);
            let (hi, lo) = (z[i] + h, z[i] - h);
            work[i] = hi;
            let up = f(&work);
            work[i] = lo;
            let down = f(&work);
            work[i] = z[i];
            (up - down) / (hi - lo)
        })
        .collect()
}
