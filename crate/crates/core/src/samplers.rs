//! The three balancing strategies — KDE oversampling, random oversampling,
//! random undersampling — behind one interface, plus a pass-through
//! "imbalanced" baseline.
//!
//! Oversamplers retain every original minority row and append synthetic rows
//! until the classes are exactly balanced. Resampling applies to training
//! data only; for KDE the training data is expected to be standardized (the
//! space the classifier sees).

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kde::{select_bandwidth, BandwidthCriterion, BandwidthGrid, KdeModel};

/// Bare method identity, used in outcomes, reports, and config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    None,
    Kde,
    Ros,
    Rus,
}

impl SamplerKind {
    /// Column name used in summary tables; the baseline renders as
    /// "imbalanced".
    pub fn display_name(&self) -> &'static str {
        match self {
            SamplerKind::None => "imbalanced",
            SamplerKind::Kde => "KDE",
            SamplerKind::Ros => "ROS",
            SamplerKind::Rus => "RUS",
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::None => "none",
            SamplerKind::Kde => "kde",
            SamplerKind::Ros => "ros",
            SamplerKind::Rus => "rus",
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the KDE sampler picks its bandwidths.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthMode {
    /// Scott's rule per feature (the default).
    #[default]
    Scott,
    /// Fixed per-feature bandwidth vector.
    Override(Vec<f64>),
    /// Grid search over Scott multipliers with the leave-one-out
    /// log-likelihood criterion.
    LooGrid(BandwidthGrid),
}

/// Which balancing method to apply. KDE parameters exist only on the KDE
/// variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SamplerSpec {
    None,
    Kde {
        #[serde(default)]
        bandwidth: BandwidthMode,
    },
    Ros,
    Rus,
}

impl SamplerSpec {
    pub fn kde_scott() -> Self {
        SamplerSpec::Kde {
            bandwidth: BandwidthMode::Scott,
        }
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            SamplerSpec::None => SamplerKind::None,
            SamplerSpec::Kde { .. } => SamplerKind::Kde,
            SamplerSpec::Ros => SamplerKind::Ros,
            SamplerSpec::Rus => SamplerKind::Rus,
        }
    }
}

/// Result of one resampling pass.
#[derive(Debug, Clone)]
pub struct ResampleOutcome {
    pub data: Dataset,
    pub kind: SamplerKind,
    pub n_synthetic: usize,
    pub n_removed: usize,
}

/// Applies the balancing method to a training set. Deterministic given the
/// random state.
pub fn resample<R: Rng + ?Sized>(
    train: &Dataset,
    spec: &SamplerSpec,
    rng: &mut R,
) -> Result<ResampleOutcome> {
    let n_majority = train.count(0);
    let n_minority = train.count(1);
    if n_majority == 0 || n_minority == 0 {
        return Err(Error::SingleClass {
            name: train.name.clone(),
        });
    }
    if n_minority > n_majority {
        return Err(Error::LabelsInverted {
            minority: n_minority,
            majority: n_majority,
        });
    }

    match spec {
        SamplerSpec::None => Ok(ResampleOutcome {
            data: train.clone(),
            kind: SamplerKind::None,
            n_synthetic: 0,
            n_removed: 0,
        }),
        SamplerSpec::Ros => {
            let deficit = n_majority - n_minority;
            let minority_idx = train.class_indices(1);
            let mut rows = Vec::with_capacity(deficit);
            for _ in 0..deficit {
                let pick = minority_idx[rng.gen_range(0..minority_idx.len())];
                rows.push(train.features.row(pick).to_owned());
            }
            let data = append_minority_rows(train, &rows);
            Ok(ResampleOutcome {
                data,
                kind: SamplerKind::Ros,
                n_synthetic: deficit,
                n_removed: 0,
            })
        }
        SamplerSpec::Rus => {
            let majority_idx = train.class_indices(0);
            let chosen = rand::seq::index::sample(rng, majority_idx.len(), n_minority);
            let mut keep_majority = vec![false; train.n_samples()];
            for c in chosen.iter() {
                keep_majority[majority_idx[c]] = true;
            }
            let kept: Vec<usize> = (0..train.n_samples())
                .filter(|&i| train.labels[i] == 1 || keep_majority[i])
                .collect();
            Ok(ResampleOutcome {
                data: train.select(&kept),
                kind: SamplerKind::Rus,
                n_synthetic: 0,
                n_removed: n_majority - n_minority,
            })
        }
        SamplerSpec::Kde { bandwidth } => {
            let deficit = n_majority - n_minority;
            let minority = train.class_rows(1);
            let model = match bandwidth {
                BandwidthMode::Scott => KdeModel::fit(&minority.view(), None)?,
                BandwidthMode::Override(h) => KdeModel::fit(&minority.view(), Some(h))?,
                BandwidthMode::LooGrid(grid) => {
                    let h = select_bandwidth(
                        &minority.view(),
                        grid,
                        BandwidthCriterion::LooLogLikelihood,
                    )?;
                    KdeModel::fit(&minority.view(), Some(&h))?
                }
            };
            let synthetic = model.sample(deficit, rng);
            let rows: Vec<_> = synthetic.rows().into_iter().map(|r| r.to_owned()).collect();
            let data = append_minority_rows(train, &rows);
            Ok(ResampleOutcome {
                data,
                kind: SamplerKind::Kde,
                n_synthetic: deficit,
                n_removed: 0,
            })
        }
    }
}

fn append_minority_rows(train: &Dataset, rows: &[ndarray::Array1<f64>]) -> Dataset {
    let mut features = Array2::zeros((train.n_samples() + rows.len(), train.n_features()));
    features
        .slice_mut(ndarray::s![..train.n_samples(), ..])
        .assign(&train.features);
    for (k, row) in rows.iter().enumerate() {
        features.row_mut(train.n_samples() + k).assign(row);
    }
    let mut labels = train.labels.clone();
    labels.extend(std::iter::repeat_n(1u8, rows.len()));
    Dataset {
        name: train.name.clone(),
        features,
        labels,
        feature_names: train.feature_names.clone(),
    }
}

/// Checks the outcome invariants: exact balance for the balancing kinds,
/// untouched data for the baseline, and synthetic/removed counts consistent
/// with the method.
pub fn verify_balance(outcome: &ResampleOutcome) -> bool {
    let majority = outcome.data.count(0);
    let minority = outcome.data.count(1);
    match outcome.kind {
        SamplerKind::None => outcome.n_synthetic == 0 && outcome.n_removed == 0,
        SamplerKind::Ros | SamplerKind::Kde => {
            majority == minority && outcome.n_removed == 0 && outcome.n_synthetic <= minority
        }
        SamplerKind::Rus => majority == minority && outcome.n_synthetic == 0,
    }
}
