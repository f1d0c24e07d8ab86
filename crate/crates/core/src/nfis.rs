//! First-order Sugeno fuzzy inference with Gaussian memberships, initialized
//! from k-means clusters and trained by the hybrid rule: global least squares
//! for the linear consequents, a gradient step for the premises.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::seeded;
use crate::som::MinMaxScaler;
use crate::table::InformationTable;

/// Ridge term added to the consequent least-squares problem.
pub const RIDGE: f64 = 1e-8;
const WIDTH_FLOOR_FRACTION: f64 = 1e-3;
const KMEANS_MAX_ITERATIONS: usize = 100;
pub const CURVE_SAMPLES: usize = 101;

pub fn gaussian(x: f64, center: f64, width: f64) -> f64 {
    (-(x - center).powi(2) / (2.0 * width * width)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    /// `p0, p1, ..., pn`: the rule output is `p0 + Σ pi·xi`.
    pub consequent: Vec<f64>,
}

impl FuzzyRule {
    fn log_firing(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.widths)
            .zip(x)
            .map(|((c, s), xi)| -(xi - c).powi(2) / (2.0 * s * s))
            .sum()
    }

    pub fn firing_strength(&self, x: &[f64]) -> f64 {
        self.log_firing(x).exp()
    }

    pub fn output(&self, x: &[f64]) -> f64 {
        self.consequent[0] + self.consequent[1..].iter().zip(x).map(|(p, xi)| p * xi).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRuleBase {
    pub input_names: Vec<String>,
    /// Training range `(min, max)` of each input.
    pub input_ranges: Vec<(f64, f64)>,
    pub rules: Vec<FuzzyRule>,
}

impl FuzzyRuleBase {
    pub fn input_count(&self) -> usize {
        self.input_names.len()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.input_count() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.input_count(),
                found: x.len(),
            })
        }
    }

    fn span(&self, i: usize) -> f64 {
        let (lo, hi) = self.input_ranges[i];
        hi - lo
    }

    fn width_floor(&self, i: usize) -> f64 {
        width_floor(self.span(i))
    }

    /// Normalized firing strengths. When every strength underflows, the rule
    /// whose center is nearest takes weight 1.
    pub fn normalized_weights(&self, x: &[f64]) -> Vec<f64> {
        let w: Vec<f64> = self.rules.iter().map(|r| r.firing_strength(x)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 && total.is_finite() {
            return w.iter().map(|v| v / total).collect();
        }
        let nearest = self
            .rules
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let d: f64 = r.centers.iter().zip(x).map(|(c, xi)| (xi - c).powi(2)).sum();
                (k, d)
            })
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
            .0;
        let mut out = vec![0.0; self.rules.len()];
        out[nearest] = 1.0;
        out
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        self.normalized_weights(x)
            .iter()
            .zip(&self.rules)
            .map(|(w, r)| w * r.output(x))
            .sum()
    }

    pub fn mse(&self, inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
        let sum: f64 = inputs
            .iter()
            .zip(targets)
            .map(|(x, t)| (self.evaluate_unchecked(x) - t).powi(2))
            .sum();
        sum / inputs.len() as f64
    }
}

fn width_floor(span: f64) -> f64 {
    if span > 0.0 {
        WIDTH_FLOOR_FRACTION * span
    } else {
        WIDTH_FLOOR_FRACTION
    }
}

pub fn evaluate_fis(base: &FuzzyRuleBase, x: &[f64]) -> Result<f64> {
    base.evaluate(x)
}

fn distinct_points(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        if !out.contains(r) {
            out.push(r.clone());
        }
    }
    out
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Lloyd's k-means on `points`, seeded by `k` distinct points drawn without
/// replacement. Returns each point's cluster.
fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    let mut candidates = distinct_points(points);
    candidates.shuffle(&mut seeded(seed));
    let mut centers: Vec<Vec<f64>> = candidates.into_iter().take(k).collect();
    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..KMEANS_MAX_ITERATIONS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = (0, f64::INFINITY);
            for (c, center) in centers.iter().enumerate() {
                let d = squared_distance(p, center);
                if d < best.1 {
                    best = (c, d);
                }
            }
            if assignment[i] != best.0 {
                assignment[i] = best.0;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = points.iter().zip(&assignment).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
            if members.is_empty() {
                continue;
            }
            for j in 0..dim {
                center[j] = members.iter().map(|m| m[j]).sum::<f64>() / members.len() as f64;
            }
        }
    }
    assignment
}

/// One rule per k-means cluster of the (min-max scaled) condition vectors.
/// Centers and widths are the cluster mean and standard deviation in
/// original units, widths floored at 1e-3 of the attribute range. Consequents
/// start constant at the cluster's mean decision.
pub fn initialize_fis(train: &InformationTable, rule_count: usize, seed: u64) -> Result<FuzzyRuleBase> {
    if train.is_empty() {
        return Err(Error::EmptyData);
    }
    if rule_count == 0 {
        return Err(invalid("rule count must be positive"));
    }
    let conditions = train.conditions();
    let available = distinct_points(conditions).len();
    if rule_count > available {
        return Err(Error::TooManyRules {
            requested: rule_count,
            available,
        });
    }
    let n = train.attribute_count();
    let scaler = MinMaxScaler::fit(conditions)?;
    let scaled: Vec<Vec<f64>> = conditions.iter().map(|x| scaler.transform(x)).collect();
    let assignment = kmeans(&scaled, rule_count, seed);

    let input_ranges: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let col = train.column(j);
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();

    let all: Vec<usize> = (0..train.len()).collect();
    let rules = (0..rule_count)
        .map(|c| {
            let mut members: Vec<usize> = all.iter().copied().filter(|&i| assignment[i] == c).collect();
            if members.is_empty() {
                members = all.clone();
            }
            let m = members.len() as f64;
            let mut centers = vec![0.0; n];
            let mut widths = vec![0.0; n];
            for j in 0..n {
                let mean = members.iter().map(|&i| conditions[i][j]).sum::<f64>() / m;
                let var = members.iter().map(|&i| (conditions[i][j] - mean).powi(2)).sum::<f64>() / m;
                centers[j] = mean;
                widths[j] = var.sqrt().max(width_floor(input_ranges[j].1 - input_ranges[j].0));
            }
            let mut consequent = vec![0.0; n + 1];
            consequent[0] = members.iter().map(|&i| train.decisions()[i]).sum::<f64>() / m;
            FuzzyRule {
                centers,
                widths,
                consequent,
            }
        })
        .collect();

    Ok(FuzzyRuleBase {
        input_names: train.attribute_names().to_vec(),
        input_ranges,
        rules,
    })
}

/// Gradient of the training MSE with respect to every premise parameter,
/// consequents held fixed. Indexed `[rule][input]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PremiseGradient {
    pub centers: Vec<Vec<f64>>,
    pub widths: Vec<Vec<f64>>,
}

pub fn premise_gradient(base: &FuzzyRuleBase, inputs: &[Vec<f64>], targets: &[f64]) -> PremiseGradient {
    let r_count = base.rules.len();
    let n = base.input_count();
    let mut centers = vec![vec![0.0; n]; r_count];
    let mut widths = vec![vec![0.0; n]; r_count];
    let m = inputs.len() as f64;
    for (x, t) in inputs.iter().zip(targets) {
        let w: Vec<f64> = base.rules.iter().map(|r| r.firing_strength(x)).collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            // nearest-center fallback is locally constant in the premises
            continue;
        }
        let f: Vec<f64> = base.rules.iter().map(|r| r.output(x)).collect();
        let y: f64 = w.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() / total;
        let outer = 2.0 * (y - t) / m;
        for (r, rule) in base.rules.iter().enumerate() {
            // ∂y/∂w_r · w_r
            let dy = outer * (f[r] - y) / total * w[r];
            for i in 0..n {
                let diff = x[i] - rule.centers[i];
                let s = rule.widths[i];
                centers[r][i] += dy * diff / (s * s);
                widths[r][i] += dy * diff * diff / (s * s * s);
            }
        }
    }
    PremiseGradient { centers, widths }
}

/// Solves all consequents at once by ridge-regularized least squares on the
/// normalized-firing-strength-weighted regressors `w̄_r · [1, x]`.
pub fn fit_consequents(base: &mut FuzzyRuleBase, inputs: &[Vec<f64>], targets: &[f64]) {
    let n = base.input_count();
    let stride = n + 1;
    let cols = base.rules.len() * stride;
    let rows = inputs.len();
    let mut a = DMatrix::<f64>::zeros(rows + cols, cols);
    let mut b = DVector::<f64>::zeros(rows + cols);
    for (k, x) in inputs.iter().enumerate() {
        let w = base.normalized_weights(x);
        for (r, wr) in w.iter().enumerate() {
            a[(k, r * stride)] = *wr;
            for i in 0..n {
                a[(k, r * stride + i + 1)] = wr * x[i];
            }
        }
        b[k] = targets[k];
    }
    let lambda = RIDGE.sqrt();
    for c in 0..cols {
        a[(rows + c, c)] = lambda;
    }
    let svd = a.svd(true, true);
    let solution = svd
        .solve(&b, 1e-14)
        .expect("both singular-vector sets were requested");
    for (r, rule) in base.rules.iter_mut().enumerate() {
        for j in 0..stride {
            rule.consequent[j] = solution[r * stride + j];
        }
    }
}

/// Hybrid training. Each epoch solves the consequents by least squares,
/// records the training RMSE, then moves the premises one step of length
/// `learning_rate` against the gradient, measured in range-normalized
/// coordinates. The lowest-RMSE parameters seen are returned.
pub fn train_fis(
    base: &FuzzyRuleBase,
    train: &InformationTable,
    epochs: usize,
    learning_rate: f64,
) -> Result<(FuzzyRuleBase, Vec<f64>)> {
    if epochs == 0 {
        return Err(invalid("epochs must be at least 1"));
    }
    if !(learning_rate > 0.0 && learning_rate.is_finite()) {
        return Err(invalid("learning rate must be positive"));
    }
    if train.is_empty() {
        return Err(Error::EmptyData);
    }
    if train.attribute_count() != base.input_count() {
        return Err(Error::DimensionMismatch {
            expected: base.input_count(),
            found: train.attribute_count(),
        });
    }
    let inputs = train.conditions();
    let targets = train.decisions();

    let mut current = base.clone();
    let mut best = current.clone();
    let mut best_rmse = current.mse(inputs, targets).sqrt();
    let mut trace = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        fit_consequents(&mut current, inputs, targets);
        let rmse = current.mse(inputs, targets).sqrt();
        trace.push(rmse);
        if rmse < best_rmse {
            best_rmse = rmse;
            best = current.clone();
        }
        premise_step(&mut current, inputs, targets, learning_rate);
    }
    Ok((best, trace))
}

fn premise_step(base: &mut FuzzyRuleBase, inputs: &[Vec<f64>], targets: &[f64], learning_rate: f64) {
    let grad = premise_gradient(base, inputs, targets);
    let spans: Vec<f64> = (0..base.input_count())
        .map(|i| {
            let s = base.span(i);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let mut norm2 = 0.0;
    for (gc, gw) in grad.centers.iter().zip(&grad.widths) {
        for i in 0..spans.len() {
            norm2 += (gc[i] * spans[i]).powi(2) + (gw[i] * spans[i]).powi(2);
        }
    }
    let norm = norm2.sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return;
    }
    let floors: Vec<f64> = (0..spans.len()).map(|i| base.width_floor(i)).collect();
    for (r, rule) in base.rules.iter_mut().enumerate() {
        for i in 0..spans.len() {
            let scale = learning_rate * spans[i] * spans[i] / norm;
            rule.centers[i] -= scale * grad.centers[r][i];
            rule.widths[i] = (rule.widths[i] - scale * grad.widths[r][i]).max(floors[i]);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipParameter {
    pub input: String,
    pub rule: usize,
    pub center: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipCurve {
    pub input: String,
    pub rule: usize,
    /// `(x, μ(x))` samples across the input's training range.
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub parameters: Vec<MembershipParameter>,
    pub curves: Vec<MembershipCurve>,
}

impl MembershipReport {
    /// `input,rule,x,mu` rows, one per sample point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("input,rule,x,mu\n");
        for c in &self.curves {
            for (x, mu) in &c.points {
                let _ = writeln!(out, "{},{},{x},{mu}", c.input, c.rule);
            }
        }
        out
    }
}

pub fn membership_report(base: &FuzzyRuleBase) -> MembershipReport {
    let mut parameters = Vec::new();
    let mut curves = Vec::new();
    for (i, name) in base.input_names.iter().enumerate() {
        let (lo, hi) = base.input_ranges[i];
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        for (r, rule) in base.rules.iter().enumerate() {
            let (c, s) = (rule.centers[i], rule.widths[i]);
            parameters.push(MembershipParameter {
                input: name.clone(),
                rule: r + 1,
                center: c,
                width: s,
            });
            let points = (0..CURVE_SAMPLES)
                .map(|k| {
                    let x = lo + (hi - lo) * k as f64 / (CURVE_SAMPLES - 1) as f64;
                    (x, gaussian(x, c, s))
                })
                .collect();
            curves.push(MembershipCurve {
                input: name.clone(),
                rule: r + 1,
                points,
            });
        }
    }
    MembershipReport { parameters, curves }
}
