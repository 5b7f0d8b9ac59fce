//! Robot parts and the hidden linear productivity model.

use rand::seq::index;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::GenError;

pub const NUM_QUANTITATIVE: usize = 7;
pub const NUM_CATEGORICAL: usize = 3;
pub const NUM_PARTS: usize = NUM_QUANTITATIVE + NUM_CATEGORICAL;

pub const PRODUCTIVITY_MIN: f64 = -100.0;
pub const PRODUCTIVITY_MAX: f64 = 100.0;

const MAX_MODEL_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Alpha,
    Beta,
    Gamma,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Alpha, Label::Beta, Label::Gamma];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartKind {
    Quantitative { min: f64, max: f64 },
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartSpec {
    pub name: &'static str,
    pub kind: PartKind,
}

const fn quant(name: &'static str, max: f64) -> PartSpec {
    PartSpec {
        name,
        kind: PartKind::Quantitative { min: 0.0, max },
    }
}

/// The ten parts in wire order: seven quantitative, then three categorical.
/// The first four quantitative parts live on `[0, 100]`, the next three on
/// `[0, 1]`.
pub const PARTS: [PartSpec; NUM_PARTS] = [
    quant("Astrogation Buffer Length", 100.0),
    quant("InfoCore Size", 100.0),
    quant("AutoTerrain Tread Count", 100.0),
    quant("Cranial Uplink Bandwidth", 100.0),
    quant("Polarity Sinks", 1.0),
    quant("Sonoreceptors", 1.0),
    quant("Repulsorlift Motor HP", 1.0),
    PartSpec {
        name: "Arakyd Vocabulator Model",
        kind: PartKind::Categorical,
    },
    PartSpec {
        name: "Axial Piston Model",
        kind: PartKind::Categorical,
    },
    PartSpec {
        name: "Nanochip Model",
        kind: PartKind::Categorical,
    },
];

pub fn part_index(name: &str) -> Option<usize> {
    PARTS.iter().position(|p| p.name == name)
}

/// A single part reading as it travels over the wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartValue {
    Number(f64),
    Label(Label),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartVector {
    pub quantitative: [f64; NUM_QUANTITATIVE],
    pub categorical: [Label; NUM_CATEGORICAL],
}

impl PartVector {
    pub fn get(&self, part: usize) -> PartValue {
        if part < NUM_QUANTITATIVE {
            PartValue::Number(self.quantitative[part])
        } else {
            PartValue::Label(self.categorical[part - NUM_QUANTITATIVE])
        }
    }

    pub fn in_declared_ranges(&self) -> bool {
        self.quantitative.iter().zip(&PARTS).all(|(&v, spec)| match spec.kind {
            PartKind::Quantitative { min, max } => (min..=max).contains(&v),
            PartKind::Categorical => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductivityModel {
    /// One weight per quantitative part, in raw part units.
    pub weights: [f64; NUM_QUANTITATIVE],
    /// `categorical_effects[part][label]`, added one-hot.
    pub categorical_effects: [[f64; 3]; NUM_CATEGORICAL],
    pub intercept: f64,
    /// Names of the parts that drive productivity.
    pub active_set: Vec<String>,
}

impl ProductivityModel {
    /// Linear response before clipping.
    pub fn linear(&self, parts: &PartVector) -> f64 {
        let mut total = self.intercept;
        for (w, v) in self.weights.iter().zip(&parts.quantitative) {
            total += w * v;
        }
        for (effects, label) in self.categorical_effects.iter().zip(&parts.categorical) {
            total += effects[label.index()];
        }
        total
    }

    pub fn productivity(&self, parts: &PartVector) -> f64 {
        self.linear(parts).clamp(PRODUCTIVITY_MIN, PRODUCTIVITY_MAX)
    }
}

fn sample_parts<R: RngCore>(rng: &mut R) -> PartVector {
    let mut quantitative = [0.0; NUM_QUANTITATIVE];
    for (slot, spec) in quantitative.iter_mut().zip(&PARTS) {
        if let PartKind::Quantitative { min, max } = spec.kind {
            *slot = rng.random_range(min..=max);
        }
    }
    let categorical = std::array::from_fn(|_| Label::ALL[rng.random_range(0..3)]);
    PartVector {
        quantitative,
        categorical,
    }
}

fn draw_model<R: RngCore>(rng: &mut R) -> ProductivityModel {
    let active_count = rng.random_range(2..=4);
    let mut active: Vec<usize> = index::sample(rng, NUM_PARTS, active_count).into_vec();
    active.sort_unstable();

    let mut weights = [0.0; NUM_QUANTITATIVE];
    for (i, w) in weights.iter_mut().enumerate() {
        let PartKind::Quantitative { min, max } = PARTS[i].kind else {
            unreachable!()
        };
        // Effect of sweeping the part across its full range.
        let full_range_effect = if active.contains(&i) {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * rng.random_range(50.0..110.0)
        } else {
            3.0 * rng.sample::<f64, _>(StandardNormal)
        };
        *w = full_range_effect / (max - min);
    }

    let mut categorical_effects = [[0.0; 3]; NUM_CATEGORICAL];
    for (c, effects) in categorical_effects.iter_mut().enumerate() {
        let scale = if active.contains(&(NUM_QUANTITATIVE + c)) {
            35.0
        } else {
            2.0
        };
        for e in effects.iter_mut() {
            *e = scale * rng.sample::<f64, _>(StandardNormal);
        }
    }

    ProductivityModel {
        weights,
        categorical_effects,
        intercept: 0.0,
        active_set: active.iter().map(|&i| PARTS[i].name.to_string()).collect(),
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Samples `n` part vectors and a productivity model with 2-4 dominant
/// parts. The intercept centers the linear response on a positive target
/// and is then raised in unit steps until mean productivity is positive.
/// Draws without a single negative robot are discarded and redrawn.
pub fn gen_parts_productivity<R: RngCore>(
    rng: &mut R,
    n: usize,
) -> Result<(Vec<PartVector>, ProductivityModel), GenError> {
    if n < 2 {
        return Err(GenError::TooFewRobots(n));
    }
    for _ in 0..MAX_MODEL_ATTEMPTS {
        let parts: Vec<PartVector> = (0..n).map(|_| sample_parts(rng)).collect();
        let mut model = draw_model(rng);
        let target_mean = rng.random_range(10.0..25.0);
        let linear: Vec<f64> = parts.iter().map(|p| model.linear(p)).collect();
        model.intercept = target_mean - mean(&linear);

        let mut productivity: Vec<f64> = parts.iter().map(|p| model.productivity(p)).collect();
        while mean(&productivity) <= 0.0 {
            model.intercept += 1.0;
            productivity = parts.iter().map(|p| model.productivity(p)).collect();
        }
        if productivity.iter().any(|&p| p < 0.0) {
            return Ok((parts, model));
        }
    }
    Err(GenError::ProductivityRetries(MAX_MODEL_ATTEMPTS))
}
