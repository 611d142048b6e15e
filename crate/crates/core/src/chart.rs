//! Phase-space charts and points.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Region removed from a chart, checked when points are constructed.
#[derive(Clone)]
pub struct DomainExclusion {
    description: String,
    admissible: Predicate,
}

impl DomainExclusion {
    /// `admissible` returns true for points that are allowed.
    pub fn new(
        description: impl Into<String>,
        admissible: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        DomainExclusion {
            description: description.into(),
            admissible: Arc::new(admissible),
        }
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn admits(&self, coords: &[f64]) -> bool {
        (self.admissible)(coords)
    }
}

impl fmt::Debug for DomainExclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("DomainExclusion")
            .field(&self.description)
            .finish()
    }
}

/// A 2N-dimensional chart with coordinates ordered `(q_1..q_N, p_1..p_N)`.
#[derive(Clone, Debug)]
pub struct ChartSpec {
    n_pairs: usize,
    labels: Vec<String>,
    exclusion: Option<DomainExclusion>,
}

impl ChartSpec {
    pub fn new<S: AsRef<str>>(positions: &[S], momenta: &[S]) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::usage("a chart needs at least one canonical pair"));
        }
        if positions.len() != momenta.len() {
            return Err(Error::usage(format!(
                "{} positions but {} momenta",
                positions.len(),
                momenta.len()
            )));
        }
        let labels: Vec<String> = positions
            .iter()
            .chain(momenta)
            .map(|s| s.as_ref().to_string())
            .collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::usage(format!("duplicate chart label `{l}`")));
            }
        }
        Ok(ChartSpec {
            n_pairs: positions.len(),
            labels,
            exclusion: None,
        })
    }

    pub fn with_exclusion(mut self, exclusion: DomainExclusion) -> Self {
        self.exclusion = Some(exclusion);
        self
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn dim(&self) -> usize {
        2 * self.n_pairs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn exclusion(&self) -> Option<&DomainExclusion> {
        self.exclusion.as_ref()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::usage(format!("chart has no coordinate `{label}`")))
    }

    /// Charts are interchangeable when their labels agree.
    pub fn same_as(&self, other: &ChartSpec) -> bool {
        std::ptr::eq(self, other) || self.labels == other.labels
    }

    pub(crate) fn check_coords(&self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.dim() {
            return Err(Error::usage(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "coordinate",
                label: self.labels[i].clone(),
            });
        }
        if let Some(ex) = &self.exclusion {
            if !ex.admits(coords) {
                return Err(Error::Domain(format!(
                    "point {coords:?} violates chart domain ({})",
                    ex.description()
                )));
            }
        }
        Ok(())
    }
}

/// A validated point of a chart.
#[derive(Clone, Debug)]
pub struct PhaseSpacePoint {
    chart: Arc<ChartSpec>,
    coords: Vec<f64>,
}

impl PhaseSpacePoint {
    pub fn new(chart: &Arc<ChartSpec>, coords: Vec<f64>) -> Result<Self> {
        chart.check_coords(&coords)?;
        Ok(PhaseSpacePoint {
            chart: Arc::clone(chart),
            coords,
        })
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        &self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn get(&self, label: &str) -> Result<f64> {
        Ok(self.coords[self.chart.index_of(label)?])
    }
}
