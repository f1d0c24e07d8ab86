mod common;

use common::rng;
use granular::nfis::{fit_consequents, gaussian, premise_gradient, FuzzyRule};
use granular::FuzzyRuleBase;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_base(r: &mut ChaCha8Rng) -> FuzzyRuleBase {
    let inputs = r.random_range(1..=4);
    let rules = r.random_range(1..=4);
    FuzzyRuleBase {
        input_names: (0..inputs).map(|i| format!("x{i}")).collect(),
        input_ranges: vec![(0.0, 10.0); inputs],
        rules: (0..rules)
            .map(|_| FuzzyRule {
                centers: (0..inputs).map(|_| r.random_range(0.0..10.0)).collect(),
                widths: (0..inputs).map(|_| r.random_range(1.5..6.0)).collect(),
                consequent: (0..=inputs).map(|_| r.random_range(-3.0..3.0)).collect(),
            })
            .collect(),
    }
}

fn random_data(r: &mut ChaCha8Rng, inputs: usize, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..inputs).map(|_| r.random_range(0.0..10.0)).collect()).collect();
    let ts = (0..n).map(|_| r.random_range(-10.0..10.0)).collect();
    (xs, ts)
}

/// Weighted-average Sugeno output written out directly.
fn sugeno_oracle(base: &FuzzyRuleBase, x: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for rule in &base.rules {
        let mut w = 1.0;
        for i in 0..x.len() {
            w *= (-(x[i] - rule.centers[i]).powi(2) / (2.0 * rule.widths[i].powi(2))).exp();
        }
        let mut f = rule.consequent[0];
        for i in 0..x.len() {
            f += rule.consequent[i + 1] * x[i];
        }
        num += w * f;
        den += w;
    }
    num / den
}

fn mse(base: &FuzzyRuleBase, xs: &[Vec<f64>], ts: &[f64]) -> f64 {
    xs.iter().zip(ts).map(|(x, t)| (sugeno_oracle(base, x) - t).powi(2)).sum::<f64>() / xs.len() as f64
}

#[test]
fn premise_gradient_matches_central_differences() {
    let mut r = rng(2024);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let base = random_base(&mut r);
        let (xs, ts) = random_data(&mut r, base.input_count(), 25);
        let grad = premise_gradient(&base, &xs, &ts);
        for rr in 0..base.rule_count() {
            for i in 0..base.input_count() {
                for (is_width, analytic) in [(false, grad.centers[rr][i]), (true, grad.widths[rr][i])] {
                    let mut plus = base.clone();
                    let mut minus = base.clone();
                    if is_width {
                        plus.rules[rr].widths[i] += h;
                        minus.rules[rr].widths[i] -= h;
                    } else {
                        plus.rules[rr].centers[i] += h;
                        minus.rules[rr].centers[i] -= h;
                    }
                    let fd = (mse(&plus, &xs, &ts) - mse(&minus, &xs, &ts)) / (2.0 * h);
                    // single-rule bases have identically zero premise gradients;
                    // the floor keeps finite-difference round-off from counting
                    let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-4);
                    worst = worst.max(rel);
                    assert!(rel <= 1e-4, "analytic {analytic} vs fd {fd}");
                }
            }
        }
    }
    eprintln!("worst relative error {worst:e}");
}

#[test]
fn evaluation_matches_weighted_average_oracle() {
    let mut r = rng(8);
    for _ in 0..200 {
        let base = random_base(&mut r);
        let (xs, _) = random_data(&mut r, base.input_count(), 5);
        for x in &xs {
            let got = base.evaluate(x).unwrap();
            let want = sugeno_oracle(&base, x);
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
        }
    }
}

#[test]
fn output_is_convex_combination_of_rule_outputs() {
    let mut r = rng(13);
    for _ in 0..200 {
        let base = random_base(&mut r);
        let (xs, _) = random_data(&mut r, base.input_count(), 5);
        for x in &xs {
            let outs: Vec<f64> = base.rules.iter().map(|rule| rule.output(x)).collect();
            let lo = outs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = outs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let y = base.evaluate(x).unwrap();
            assert!(y >= lo - 1e-9 && y <= hi + 1e-9);
        }
    }
}

#[test]
fn memberships_lie_in_unit_interval() {
    let mut r = rng(4);
    for _ in 0..1000 {
        let c = r.random_range(-5.0..5.0);
        let s = r.random_range(0.01..3.0);
        let x = c + r.random_range(-3.0..3.0) * s;
        let mu = gaussian(x, c, s);
        assert!(mu > 0.0 && mu <= 1.0);
        assert_eq!(gaussian(c, c, s), 1.0);
    }
}

#[test]
fn least_squares_consequents_cannot_be_improved_by_nudging() {
    let mut r = rng(31);
    for _ in 0..10 {
        let mut base = random_base(&mut r);
        let (xs, ts) = random_data(&mut r, base.input_count(), 40);
        fit_consequents(&mut base, &xs, &ts);
        let fitted = base.mse(&xs, &ts);
        for rr in 0..base.rule_count() {
            for j in 0..=base.input_count() {
                for delta in [1e-3, -1e-3] {
                    let mut p = base.clone();
                    p.rules[rr].consequent[j] += delta;
                    assert!(p.mse(&xs, &ts) >= fitted);
                }
            }
        }
    }
}
