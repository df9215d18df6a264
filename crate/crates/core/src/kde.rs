//! Gaussian kernel density estimation over the minority class: fitting,
//! evaluation, bandwidth selection, and sampling from the fitted density.
//!
//! The estimate is a product kernel with one bandwidth per feature,
//! `f(x) = (1/n) Σ_i Π_j (1/h_j) φ((x_j − x_ij)/h_j)`, with each `h_j` from
//! Scott's rule `n^(−1/5)·s_j` unless overridden. Sampling is exact for the
//! Gaussian kernel: a uniformly chosen training point plus per-feature
//! Gaussian noise with std `h_j`.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.5066282746310002;

/// Scott's rule bandwidth `n^(−1/5)·s`.
pub fn scott_bandwidth(n: usize, s: f64) -> f64 {
    assert!(n >= 1, "Scott's rule needs at least one sample");
    assert!(s >= 0.0, "standard deviation must be non-negative");
    (n as f64).powf(-0.2) * s
}

/// Fitted minority-class density: the training points plus one Gaussian
/// bandwidth per feature. A zero bandwidth (constant feature) degenerates
/// that coordinate to a point mass — sampling copies it, but pointwise
/// density evaluation is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    training_points: Array2<f64>,
    bandwidths: Vec<f64>,
}

/// Ascending positive multipliers applied to the Scott baseline during grid
/// search.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BandwidthGrid {
    multipliers: Vec<f64>,
}

impl BandwidthGrid {
    pub fn new(multipliers: Vec<f64>) -> Result<Self> {
        if multipliers.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".to_string()));
        }
        if multipliers.iter().any(|m| !m.is_finite() || *m <= 0.0) {
            return Err(Error::InvalidGrid(
                "multipliers must be positive finite reals".to_string(),
            ));
        }
        if multipliers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "multipliers must be strictly ascending".to_string(),
            ));
        }
        Ok(Self { multipliers })
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }
}

impl TryFrom<Vec<f64>> for BandwidthGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        BandwidthGrid::new(v)
    }
}

impl From<BandwidthGrid> for Vec<f64> {
    fn from(g: BandwidthGrid) -> Vec<f64> {
        g.multipliers
    }
}

/// How the grid search scores a candidate bandwidth.
pub enum BandwidthCriterion<'a> {
    /// Sample MISE against a known true density, evaluated at the training
    /// points. Only meaningful on synthetic data where `f` is known.
    OracleMise(&'a dyn Fn(&[f64]) -> f64),
    /// Leave-one-out log-likelihood of the training points, maximized.
    LooLogLikelihood,
}

/// Per-feature Scott baseline bandwidths (population std convention).
pub fn scott_baseline(points: &ArrayView2<f64>) -> Vec<f64> {
    let n = points.nrows();
    let nf = n as f64;
    points
        .columns()
        .into_iter()
        .map(|col| {
            let mean = col.sum() / nf;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
            scott_bandwidth(n, var.sqrt())
        })
        .collect()
}

impl KdeModel {
    /// Fits a KDE on the given points. Bandwidths default to Scott's rule
    /// applied per feature; `bandwidth_override` replaces them wholesale.
    pub fn fit(minority_points: &ArrayView2<f64>, bandwidth_override: Option<&[f64]>) -> Result<Self> {
        let n = minority_points.nrows();
        let d = minority_points.ncols();
        if n == 0 || d == 0 {
            return Err(Error::EmptyInput {
                what: "KDE training points",
            });
        }
        let bandwidths = match bandwidth_override {
            Some(h) => {
                if h.len() != d {
                    return Err(Error::DimensionMismatch {
                        what: "bandwidth override",
                        expected: d,
                        actual: h.len(),
                    });
                }
                if h.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidArgument(
                        "bandwidths must be finite and non-negative".to_string(),
                    ));
                }
                h.to_vec()
            }
            None => scott_baseline(minority_points),
        };
        Ok(Self {
            training_points: minority_points.to_owned(),
            bandwidths,
        })
    }

    pub fn n(&self) -> usize {
        self.training_points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.training_points.ncols()
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn training_points(&self) -> ArrayView2<'_, f64> {
        self.training_points.view()
    }

    /// Density of the fitted mixture at `x`. Rejected when any bandwidth is
    /// zero, since a point mass has no finite pdf value off the data.
    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "evaluation point",
                expected: self.dim(),
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput {
                what: "evaluation point",
            });
        }
        if let Some(j) = self.bandwidths.iter().position(|&h| h == 0.0) {
            return Err(Error::DegenerateBandwidth { feature: j });
        }
        Ok(self.kernel_sum(x) * self.normalizer() / self.n() as f64)
    }

    // Π_j 1/(h_j √2π)
    fn normalizer(&self) -> f64 {
        self.bandwidths.iter().map(|h| 1.0 / (h * SQRT_2PI)).product()
    }

    // Σ_i exp(−½ Σ_j ((x_j − x_ij)/h_j)²)
    fn kernel_sum(&self, x: &[f64]) -> f64 {
        self.training_points
            .rows()
            .into_iter()
            .map(|row| {
                let sq: f64 = row
                    .iter()
                    .zip(x)
                    .zip(&self.bandwidths)
                    .map(|((xi, xj), h)| {
                        let z = (xj - xi) / h;
                        z * z
                    })
                    .sum();
                (-0.5 * sq).exp()
            })
            .sum()
    }

    /// Draws `k` points from the fitted mixture: a uniformly chosen training
    /// point plus per-feature Gaussian noise with std `h_j`. A zero bandwidth
    /// copies that coordinate exactly.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Array2<f64> {
        let d = self.dim();
        let mut out = Array2::zeros((k, d));
        let normal = StandardNormal;
        for mut row in out.rows_mut() {
            let i = rng.gen_range(0..self.n());
            for j in 0..d {
                let z: f64 = normal.sample(rng);
                let h = self.bandwidths[j];
                let center = self.training_points[[i, j]];
                row[j] = if h > 0.0 { center + h * z } else { center };
            }
        }
        out
    }

    /// Sample mean integrated square error against a known density:
    /// `(1/m) Σ_i (f̃(x_i) − f(x_i))²` over the supplied evaluation points.
    pub fn sample_mise<F>(&self, true_density: F, eval_points: &ArrayView2<f64>) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        if eval_points.nrows() == 0 {
            return Err(Error::EmptyInput {
                what: "MISE evaluation points",
            });
        }
        let mut acc = 0.0;
        for row in eval_points.rows() {
            let x = row.as_slice().expect("contiguous row");
            let estimated = self.density_at(x)?;
            let truth = true_density(x);
            if !truth.is_finite() {
                return Err(Error::NonFiniteDensity);
            }
            acc += (estimated - truth).powi(2);
        }
        Ok(acc / eval_points.nrows() as f64)
    }

    // Leave-one-out density of training point i under this model.
    fn loo_density(&self, i: usize) -> f64 {
        let x: Vec<f64> = self.training_points.row(i).to_vec();
        let total = self.kernel_sum(&x);
        // The self term contributes exp(0) = 1 to the kernel sum.
        (total - 1.0).max(0.0) * self.normalizer() / (self.n() - 1) as f64
    }
}

/// Grid search over Scott-baseline multipliers. Returns the bandwidth vector
/// minimizing the MISE criterion (or maximizing LOO log-likelihood); ties
/// break toward the smallest multiplier.
pub fn select_bandwidth(
    points: &ArrayView2<f64>,
    grid: &BandwidthGrid,
    criterion: BandwidthCriterion<'_>,
) -> Result<Vec<f64>> {
    if points.nrows() == 0 {
        return Err(Error::EmptyInput {
            what: "bandwidth selection points",
        });
    }
    if matches!(criterion, BandwidthCriterion::LooLogLikelihood) && points.nrows() < 2 {
        return Err(Error::LooRequiresTwoPoints { n: points.nrows() });
    }
    let baseline = scott_baseline(points);

    let mut best: Option<(f64, Vec<f64>)> = None;
    for &m in grid.multipliers() {
        let candidate: Vec<f64> = baseline.iter().map(|h| m * h).collect();
        let model = KdeModel::fit(points, Some(&candidate))?;
        // Lower is better; LOO log-likelihood is negated.
        let score = match &criterion {
            BandwidthCriterion::OracleMise(f) => model.sample_mise(f, points)?,
            BandwidthCriterion::LooLogLikelihood => {
                if let Some(j) = candidate.iter().position(|&h| h == 0.0) {
                    return Err(Error::DegenerateBandwidth { feature: j });
                }
                -(0..points.nrows()).map(|i| model.loo_density(i).ln()).sum::<f64>()
            }
        };
        match &best {
            Some((best_score, _)) if score >= *best_score => {}
            _ => best = Some((score, candidate)),
        }
    }
    Ok(best.expect("grid is non-empty").1)
}
