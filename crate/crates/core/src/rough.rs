//! Rough-set machinery over symbolic decision systems: indiscernibility
//! partitions, lower/upper approximations, exact rule induction and
//! rule-based classification.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Fully symbolic table. Levels are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionSystem {
    condition_attributes: Vec<String>,
    decision_attribute: String,
    rows: Vec<Vec<u32>>,
    decisions: Vec<u32>,
}

impl DecisionSystem {
    pub fn new(
        condition_attributes: Vec<String>,
        decision_attribute: impl Into<String>,
        rows: Vec<Vec<u32>>,
        decisions: Vec<u32>,
    ) -> Result<Self> {
        if rows.len() != decisions.len() {
            return Err(invalid(format!(
                "{} condition rows but {} decisions",
                rows.len(),
                decisions.len()
            )));
        }
        for row in &rows {
            if row.len() != condition_attributes.len() {
                return Err(Error::DimensionMismatch {
                    expected: condition_attributes.len(),
                    found: row.len(),
                });
            }
        }
        if rows.iter().flatten().chain(&decisions).any(|&l| l == 0) {
            return Err(invalid("symbolic levels start at 1"));
        }
        Ok(Self {
            condition_attributes,
            decision_attribute: decision_attribute.into(),
            rows,
            decisions,
        })
    }

    pub fn condition_attributes(&self) -> &[String] {
        &self.condition_attributes
    }

    pub fn decision_attribute(&self) -> &str {
        &self.decision_attribute
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn decisions(&self) -> &[u32] {
        &self.decisions
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn all_attributes(&self) -> Vec<usize> {
        (0..self.condition_attributes.len()).collect()
    }

    /// Objects whose decision equals `level`.
    pub fn decision_concept(&self, level: u32) -> BTreeSet<usize> {
        (0..self.len()).filter(|&i| self.decisions[i] == level).collect()
    }

    fn check_attrs(&self, attrs: &[usize]) -> Result<()> {
        if attrs.is_empty() {
            return Err(invalid("attribute subset must be non-empty"));
        }
        match attrs.iter().find(|&&a| a >= self.condition_attributes.len()) {
            Some(&a) => Err(Error::UnknownAttribute(a)),
            None => Ok(()),
        }
    }

    /// Blocks of objects agreeing on every attribute in `attrs`. Blocks come
    /// in order of their first member; members are ascending.
    pub fn indiscernibility_classes(&self, attrs: &[usize]) -> Result<Vec<Vec<usize>>> {
        self.check_attrs(attrs)?;
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let key: Vec<u32> = attrs.iter().map(|&a| row[a]).collect();
            let b = *index.entry(key).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(i);
        }
        Ok(blocks)
    }

    pub fn lower_approximation(&self, concept: &BTreeSet<usize>, attrs: &[usize]) -> Result<BTreeSet<usize>> {
        Ok(self
            .indiscernibility_classes(attrs)?
            .into_iter()
            .filter(|block| block.iter().all(|i| concept.contains(i)))
            .flatten()
            .collect())
    }

    pub fn upper_approximation(&self, concept: &BTreeSet<usize>, attrs: &[usize]) -> Result<BTreeSet<usize>> {
        Ok(self
            .indiscernibility_classes(attrs)?
            .into_iter()
            .filter(|block| block.iter().any(|i| concept.contains(i)))
            .flatten()
            .collect())
    }

    fn matching<'a>(&'a self, descriptors: &'a [(usize, u32)]) -> impl Iterator<Item = usize> + 'a {
        (0..self.len()).filter(move |&i| descriptors.iter().all(|&(a, l)| self.rows[i][a] == l))
    }

    /// `(support, matched)`: objects matching the descriptors with decision
    /// `decision`, and all objects matching the descriptors.
    fn coverage(&self, descriptors: &[(usize, u32)], decision: u32) -> (usize, usize) {
        self.matching(descriptors).fold((0, 0), |(s, m), i| {
            (s + usize::from(self.decisions[i] == decision), m + 1)
        })
    }
}

/// `IF descriptors THEN decision`. Descriptors are `(attribute index, level)`
/// pairs in ascending attribute order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub descriptors: Vec<(usize, u32)>,
    pub decision: u32,
    pub support: usize,
    pub strength: f64,
    pub certainty: f64,
}

impl DecisionRule {
    pub fn matches(&self, row: &[u32]) -> bool {
        self.descriptors.iter().all(|&(a, l)| row.get(a) == Some(&l))
    }
}

/// Minimum rule strength for a rule to be kept.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrengthFactor(f64);

impl StrengthFactor {
    pub fn new(threshold: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&threshold) {
            Ok(Self(threshold))
        } else {
            Err(invalid(format!("strength factor {threshold} outside [0, 1]")))
        }
    }

    pub fn threshold(self) -> f64 {
        self.0
    }
}

impl Default for StrengthFactor {
    fn default() -> Self {
        Self(0.0)
    }
}

/// Certain rules: one per consistent block of the full-attribute partition,
/// shortened greedily in attribute order while certainty stays 1, filtered
/// by strength and deduplicated.
pub fn extract_exact_rules(system: &DecisionSystem, strength: StrengthFactor) -> Vec<DecisionRule> {
    if system.is_empty() || system.condition_attributes.is_empty() {
        return Vec::new();
    }
    let blocks = system
        .indiscernibility_classes(&system.all_attributes())
        .expect("full attribute set is valid");
    let universe = system.len() as f64;

    let mut rules: Vec<DecisionRule> = Vec::new();
    for block in blocks {
        let decision = system.decisions[block[0]];
        if block.iter().any(|&i| system.decisions[i] != decision) {
            continue;
        }
        let representative = &system.rows[block[0]];
        let mut descriptors: Vec<(usize, u32)> = representative.iter().copied().enumerate().collect();
        for attr in 0..representative.len() {
            if descriptors.len() == 1 {
                break;
            }
            let candidate: Vec<(usize, u32)> = descriptors.iter().copied().filter(|&(a, _)| a != attr).collect();
            let (support, matched) = system.coverage(&candidate, decision);
            if support == matched {
                descriptors = candidate;
            }
        }
        let (support, matched) = system.coverage(&descriptors, decision);
        debug_assert_eq!(support, matched);
        let rule = DecisionRule {
            descriptors,
            decision,
            support,
            strength: support as f64 / universe,
            certainty: support as f64 / matched as f64,
        };
        if rule.strength >= strength.threshold() && !rules.contains(&rule) {
            rules.push(rule);
        }
    }
    rules
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub level: u32,
    pub recognized: bool,
}

/// Classifies one symbolic condition row. Unmatched rows get `fallback`;
/// conflicting matches resolve to the strongest rule, then the lower level.
pub fn classify(rules: &[DecisionRule], row: &[u32], fallback: u32) -> Classification {
    let best = rules
        .iter()
        .filter(|r| r.matches(row))
        .min_by(|a, b| b.strength.total_cmp(&a.strength).then(a.decision.cmp(&b.decision)));
    match best {
        Some(rule) => Classification {
            level: rule.decision,
            recognized: true,
        },
        None => Classification {
            level: fallback,
            recognized: false,
        },
    }
}

/// One sign-based move: lower the threshold by `step` when the error grew,
/// raise it when the error shrank, clamp to `[0, 1]`.
pub fn update_strength_factor(current: StrengthFactor, em_now: f64, em_prev: f64, step: f64) -> StrengthFactor {
    let delta = if em_now > em_prev {
        -step
    } else if em_now < em_prev {
        step
    } else {
        0.0
    };
    StrengthFactor((current.0 + delta).clamp(0.0, 1.0))
}

/// Adaptive strength factor whose step halves every time the direction of
/// movement reverses, so the threshold sequence settles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrengthSchedule {
    factor: StrengthFactor,
    step: f64,
    last_direction: i8,
}

impl StrengthSchedule {
    pub fn new(initial: StrengthFactor, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("strength step must be positive"));
        }
        Ok(Self {
            factor: initial,
            step,
            last_direction: 0,
        })
    }

    pub fn current(&self) -> StrengthFactor {
        self.factor
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn update(&mut self, em_now: f64, em_prev: f64) -> StrengthFactor {
        let direction: i8 = if em_now > em_prev {
            -1
        } else if em_now < em_prev {
            1
        } else {
            0
        };
        if direction != 0 {
            if self.last_direction != 0 && direction != self.last_direction {
                self.step /= 2.0;
            }
            self.last_direction = direction;
            self.factor = update_strength_factor(self.factor, em_now, em_prev, self.step);
        }
        self.factor
    }
}

/// Rules together with the attribute names needed to print them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub condition_attributes: Vec<String>,
    pub decision_attribute: String,
    pub rules: Vec<DecisionRule>,
}

impl RuleSet {
    pub fn new(system: &DecisionSystem, rules: Vec<DecisionRule>) -> Self {
        Self {
            condition_attributes: system.condition_attributes.clone(),
            decision_attribute: system.decision_attribute.clone(),
            rules,
        }
    }

    pub fn format_rule(&self, rule: &DecisionRule) -> String {
        let premise = rule
            .descriptors
            .iter()
            .map(|&(a, l)| format!("{}={l}", self.condition_attributes[a]))
            .collect::<Vec<_>>()
            .join(" AND ");
        format!(
            "IF {premise} THEN {}={} (support {}, strength {:.4}, certainty {:.1})",
            self.decision_attribute, rule.decision, rule.support, rule.strength, rule.certainty
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            let _ = writeln!(out, "{}", self.format_rule(rule));
        }
        out
    }
}
