//! Problem instances: arm set, finite stream distribution, hidden parameter,
//! noise model, the built-in circular benchmark, and the classification-to-
//! bandit reduction.

use crate::error::{Error, Result};
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const SIMPLEX_TOL: f64 = 1e-12;

/// A best-arm-identification instance over a linear model with a finite
/// stream distribution.
#[derive(Clone, Debug)]
pub struct Instance {
    arms: Vec<DVector<f64>>,
    stream_points: Vec<DVector<f64>>,
    stream_probs: Vec<f64>,
    theta_star: DVector<f64>,
    noise_sigma: f64,
    bound_b: f64,
    cum_probs: Vec<f64>,
}

impl Instance {
    pub fn new(
        arms: Vec<DVector<f64>>,
        stream_points: Vec<DVector<f64>>,
        stream_probs: Vec<f64>,
        theta_star: DVector<f64>,
        noise_sigma: f64,
        bound_b: f64,
    ) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidInput("instance needs at least one arm".into()));
        }
        if stream_points.is_empty() {
            return Err(Error::InvalidInput(
                "instance needs at least one stream point".into(),
            ));
        }
        if stream_points.len() != stream_probs.len() {
            return Err(Error::InvalidInput(format!(
                "{} stream points vs {} probabilities",
                stream_points.len(),
                stream_probs.len()
            )));
        }
        let dim = theta_star.len();
        if dim == 0 {
            return Err(Error::InvalidInput("theta_star must be nonempty".into()));
        }
        for z in arms.iter().chain(stream_points.iter()) {
            if z.len() != dim {
                return Err(Error::InvalidInput(
                    "arm/stream point dimension mismatch with theta_star".into(),
                ));
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite coordinate".into()));
            }
        }
        if stream_probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidInput(
                "stream probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = stream_probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidInput(format!(
                "stream probabilities sum to {total}, expected 1"
            )));
        }
        if !noise_sigma.is_finite() || noise_sigma < 0.0 {
            return Err(Error::InvalidInput("noise sigma must be >= 0".into()));
        }
        if !bound_b.is_finite() || bound_b <= 0.0 {
            return Err(Error::InvalidInput("bound B must be > 0".into()));
        }
        let max_abs = stream_points
            .iter()
            .map(|x| x.dot(&theta_star).abs())
            .fold(0.0f64, f64::max);
        if max_abs > bound_b * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "max |<x, theta*>| = {max_abs} exceeds bound B = {bound_b}"
            )));
        }
        let mut cum_probs = Vec::with_capacity(stream_probs.len());
        let mut acc = 0.0;
        for &p in &stream_probs {
            acc += p;
            cum_probs.push(acc);
        }
        if let Some(last) = cum_probs.last_mut() {
            *last = 1.0;
        }
        Ok(Instance {
            arms,
            stream_points,
            stream_probs,
            theta_star,
            noise_sigma,
            bound_b,
            cum_probs,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn arms(&self) -> &[DVector<f64>] {
        &self.arms
    }

    pub fn stream_points(&self) -> &[DVector<f64>] {
        &self.stream_points
    }

    pub fn stream_probs(&self) -> &[f64] {
        &self.stream_probs
    }

    pub fn theta_star(&self) -> &DVector<f64> {
        &self.theta_star
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn bound_b(&self) -> f64 {
        self.bound_b
    }

    /// Index of the unique best arm and the minimum gap to any other arm.
    pub fn gap_and_best(&self) -> Result<(usize, f64)> {
        let values: Vec<f64> = self.arms.iter().map(|z| z.dot(&self.theta_star)).collect();
        let best = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("arms are nonempty");
        let mut min_gap = f64::INFINITY;
        for (i, &v) in values.iter().enumerate() {
            if i != best {
                min_gap = min_gap.min(values[best] - v);
            }
        }
        if self.arms.len() == 1 {
            return Ok((0, f64::INFINITY));
        }
        if min_gap <= 0.0 {
            return Err(Error::DegenerateInstance(
                "best arm is not unique (zero minimum gap)".into(),
            ));
        }
        Ok((best, min_gap))
    }

    /// Draws a stream point index from the categorical stream distribution.
    pub fn sample_stream_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cum_probs.partition_point(|&c| c <= u).min(self.stream_points.len() - 1)
    }

    /// Draws a stream point from the categorical stream distribution.
    pub fn sample_stream<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        self.stream_points[self.sample_stream_index(rng)].clone()
    }

    /// Draws a label `y = <x, theta*> + sigma * N(0,1)`.
    pub fn sample_label<R: Rng + ?Sized>(&self, x: &DVector<f64>, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        x.dot(&self.theta_star) + self.noise_sigma * z
    }

    pub fn to_json_string(&self) -> String {
        let doc = InstanceJson::from(self);
        serde_json::to_string_pretty(&doc).expect("instance serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: InstanceJson = serde_json::from_str(s)
            .map_err(|e| Error::InvalidInput(format!("instance JSON: {e}")))?;
        doc.try_into()
    }
}

/// JSON form of an instance; arrays are row-major per point/arm.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub dim: usize,
    pub arms: Vec<Vec<f64>>,
    pub stream_points: Vec<Vec<f64>>,
    pub stream_probs: Vec<f64>,
    pub theta_star: Vec<f64>,
    pub noise_sigma: f64,
    #[serde(rename = "bound_B")]
    pub bound_b: f64,
}

impl From<&Instance> for InstanceJson {
    fn from(inst: &Instance) -> Self {
        InstanceJson {
            dim: inst.dim(),
            arms: inst.arms.iter().map(|z| z.iter().copied().collect()).collect(),
            stream_points: inst
                .stream_points
                .iter()
                .map(|x| x.iter().copied().collect())
                .collect(),
            stream_probs: inst.stream_probs.clone(),
            theta_star: inst.theta_star.iter().copied().collect(),
            noise_sigma: inst.noise_sigma,
            bound_b: inst.bound_b,
        }
    }
}

impl TryFrom<InstanceJson> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceJson) -> Result<Self> {
        let dim = doc.dim;
        let to_vec = |rows: Vec<Vec<f64>>, what: &str| -> Result<Vec<DVector<f64>>> {
            rows.into_iter()
                .map(|r| {
                    if r.len() != dim {
                        Err(Error::InvalidInput(format!(
                            "{what} entry has {} coordinates, expected {dim}",
                            r.len()
                        )))
                    } else {
                        Ok(DVector::from_vec(r))
                    }
                })
                .collect()
        };
        Instance::new(
            to_vec(doc.arms, "arms")?,
            to_vec(doc.stream_points, "stream_points")?,
            doc.stream_probs,
            DVector::from_vec(doc.theta_star),
            doc.noise_sigma,
            doc.bound_b,
        )
    }
}

/// The circular two-dimensional benchmark: three arms `e1`, `e2`,
/// `(cos 0.3, sin 0.3)`, hidden parameter `2 e1`, unit noise, and a 30-point
/// stream on the unit circle with weights proportional to `cos^2`.
pub fn benchmark_instance() -> Instance {
    let n = 30usize;
    let arms = vec![
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![0.0, 1.0]),
        DVector::from_vec(vec![0.3f64.cos(), 0.3f64.sin()]),
    ];
    let mut stream_points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let angle = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        stream_points.push(DVector::from_vec(vec![angle.cos(), angle.sin()]));
        weights.push(angle.cos().powi(2));
    }
    let total: f64 = weights.iter().sum();
    let stream_probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    Instance::new(
        arms,
        stream_points,
        stream_probs,
        DVector::from_vec(vec![2.0, 0.0]),
        1.0,
        2.0,
    )
    .expect("benchmark instance is valid")
}

/// Minimal two-point instance: arms and stream both `{e1, e2}`, uniform
/// stream, `theta* = (1, 0)`.
pub fn two_point_instance(noise_sigma: f64) -> Instance {
    let e1 = DVector::from_vec(vec![1.0, 0.0]);
    let e2 = DVector::from_vec(vec![0.0, 1.0]);
    Instance::new(
        vec![e1.clone(), e2.clone()],
        vec![e1, e2],
        vec![0.5, 0.5],
        DVector::from_vec(vec![1.0, 0.0]),
        noise_sigma,
        1.0,
    )
    .expect("two-point instance is valid")
}

/// A finite agnostic-classification problem: hypotheses label a finite domain
/// with +/-1, labels follow the regression function eta, risk is evaluated
/// under pi while samples arrive under nu.
#[derive(Clone, Debug)]
pub struct ClassificationInstance {
    domain_points: Vec<f64>,
    hypotheses: Vec<Vec<i8>>,
    eta: Vec<f64>,
    pi_probs: Vec<f64>,
    nu_probs: Vec<f64>,
}

impl ClassificationInstance {
    pub fn new(
        domain_points: Vec<f64>,
        hypotheses: Vec<Vec<i8>>,
        eta: Vec<f64>,
        pi_probs: Vec<f64>,
        nu_probs: Vec<f64>,
    ) -> Result<Self> {
        let n = domain_points.len();
        if n == 0 {
            return Err(Error::InvalidInput("domain must be nonempty".into()));
        }
        if hypotheses.is_empty() {
            return Err(Error::InvalidInput("need at least one hypothesis".into()));
        }
        for h in &hypotheses {
            if h.len() != n {
                return Err(Error::InvalidInput(
                    "hypothesis length must match domain size".into(),
                ));
            }
            if h.iter().any(|&v| v != 1 && v != -1) {
                return Err(Error::InvalidInput("hypothesis labels must be +/-1".into()));
            }
        }
        if eta.len() != n || eta.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
            return Err(Error::InvalidInput(
                "eta must have one value in [0,1] per domain point".into(),
            ));
        }
        for (name, probs) in [("pi", &pi_probs), ("nu", &nu_probs)] {
            if probs.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{name} must have one probability per domain point"
                )));
            }
            if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::InvalidInput(format!("{name} entries must be >= 0")));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::InvalidInput(format!(
                    "{name} sums to {total}, expected 1"
                )));
            }
        }
        Ok(ClassificationInstance {
            domain_points,
            hypotheses,
            eta,
            pi_probs,
            nu_probs,
        })
    }

    pub fn domain_points(&self) -> &[f64] {
        &self.domain_points
    }

    pub fn hypotheses(&self) -> &[Vec<i8>] {
        &self.hypotheses
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn pi_probs(&self) -> &[f64] {
        &self.pi_probs
    }

    pub fn nu_probs(&self) -> &[f64] {
        &self.nu_probs
    }

    /// Risk under pi: mass where the hypothesis disagrees with the likelier
    /// label, `sum_x pi(x) [eta(x) 1{h(x)=-1} + (1-eta(x)) 1{h(x)=+1}]`.
    pub fn risk(&self, h: usize) -> f64 {
        self.hypotheses[h]
            .iter()
            .zip(&self.eta)
            .zip(&self.pi_probs)
            .map(|((&hx, &e), &p)| if hx == 1 { p * (1.0 - e) } else { p * e })
            .sum()
    }

    /// nu-mass of the disagreement set of two hypotheses.
    pub fn disagreement(&self, h1: usize, h2: usize) -> f64 {
        self.hypotheses[h1]
            .iter()
            .zip(&self.hypotheses[h2])
            .zip(&self.nu_probs)
            .map(|((&a, &b), &p)| if a != b { p } else { 0.0 })
            .sum()
    }

    /// Index of the unique risk minimizer.
    pub fn best_hypothesis(&self) -> Result<usize> {
        let risks: Vec<f64> = (0..self.hypotheses.len()).map(|h| self.risk(h)).collect();
        let best = risks
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("hypotheses are nonempty");
        let tied = risks
            .iter()
            .enumerate()
            .any(|(i, &r)| i != best && r <= risks[best]);
        if tied {
            return Err(Error::DegenerateInstance(
                "risk minimizer is not unique".into(),
            ));
        }
        Ok(best)
    }
}

/// Embeds a finite classification problem as a linear best-arm instance. Each
/// hypothesis becomes the arm `z^(h)` with `z^(h)_x = pi(x) 1{h(x)=1}`, the
/// hidden parameter is `theta*_x = 2 eta(x) - 1`, and the returned offset
/// `c = sum_x pi(x) eta(x)` satisfies `risk(h) = c - <z^(h), theta*>`.
pub fn classification_to_bandit(ci: &ClassificationInstance) -> Result<(Instance, f64)> {
    let n = ci.domain_points.len();
    let arms: Vec<DVector<f64>> = ci
        .hypotheses
        .iter()
        .map(|h| {
            DVector::from_fn(n, |x, _| {
                if h[x] == 1 {
                    ci.pi_probs[x]
                } else {
                    0.0
                }
            })
        })
        .collect();
    let theta_star = DVector::from_fn(n, |x, _| 2.0 * ci.eta[x] - 1.0);
    let stream_points: Vec<DVector<f64>> = (0..n)
        .map(|x| DVector::from_fn(n, |i, _| if i == x { 1.0 } else { 0.0 }))
        .collect();
    let offset: f64 = ci
        .pi_probs
        .iter()
        .zip(&ci.eta)
        .map(|(&p, &e)| p * e)
        .sum();
    let instance = Instance::new(
        arms,
        stream_points,
        ci.nu_probs.clone(),
        theta_star,
        1.0,
        1.0,
    )?;
    Ok((instance, offset))
}

/// One stream arrival with its query decision.
#[derive(Clone, Debug)]
pub struct LabeledDraw {
    pub x: DVector<f64>,
    /// Present iff `queried`.
    pub y: Option<f64>,
    pub queried: bool,
    pub query_prob: f64,
}

impl LabeledDraw {
    pub fn queried(x: DVector<f64>, y: f64, query_prob: f64) -> Self {
        LabeledDraw {
            x,
            y: Some(y),
            queried: true,
            query_prob,
        }
    }

    pub fn skipped(x: DVector<f64>, query_prob: f64) -> Self {
        LabeledDraw {
            x,
            y: None,
            queried: false,
            query_prob,
        }
    }

    /// `Q * x * y`, the zero vector for skipped draws.
    pub fn weighted_vector(&self) -> DVector<f64> {
        match (self.queried, self.y) {
            (true, Some(y)) => &self.x * y,
            _ => DVector::zeros(self.x.len()),
        }
    }
}
