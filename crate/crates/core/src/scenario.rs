//! Scenario types shared by both game engines, plus validation.
//!
//! Scenario files mirror these types one-to-one as JSON; unknown keys are
//! rejected so a typo in a config never silently changes an experiment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::DemandModel;

/// Information regime for the beer game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMode {
    /// Each stage sees only its own local state.
    Isolated,
    /// Each stage additionally sees its immediate upstream partner's
    /// lead time, inventory, and backlog.
    Sharing,
}

/// Prompt-encoded risk stance for LLM agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskPreference {
    Averse,
    Neutral,
    Appetite,
}

/// Serial multi-echelon beer game configuration. Stage index 0 is the
/// retailer; the last index is the manufacturer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeerScenario {
    pub num_stages: usize,
    /// Number of periods T.
    pub horizon: u32,
    /// Per-stage starting on-hand inventory.
    pub initial_inventory: Vec<u32>,
    /// Per-stage inbound shipping delay (manufacturer: production delay).
    pub lead_time: Vec<u32>,
    /// Per-stage outbound shipment / production release cap per period.
    pub capacity: Vec<u32>,
    /// Per-stage holding cost per unit per period.
    pub holding_cost: Vec<f64>,
    /// Per-stage backlog cost per unit per period.
    pub backlog_cost: Vec<f64>,
    pub demand: DemandModel,
    pub info_mode: InfoMode,
    pub seed: u64,
}

/// Horizontal market game configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketScenario {
    pub model: MarketModel,
    pub rounds: u32,
    pub seed: u64,
}

/// The market-clearing mechanism and its economic parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarketModel {
    /// Quantity competition, inverse demand P = a - bQ.
    Cournot { a: f64, b: f64, costs: Vec<f64> },
    /// Price competition for a homogeneous good, demand Q = a - bP,
    /// winner-takes-all with equal tie splits. `tick` is the price grid.
    BertrandHomogeneous {
        a: f64,
        b: f64,
        costs: Vec<f64>,
        tick: f64,
    },
    /// Price competition with differentiated goods,
    /// q_i = A_i - B_i p_i + sum_{j != i} d_ij p_j.
    BertrandDifferentiated {
        intercepts: Vec<f64>,
        own_price_slopes: Vec<f64>,
        substitution: SubstitutionSpec,
        costs: Vec<f64>,
    },
}

/// Cross-price substitution, either a full matrix or the convenience
/// heterogeneity mapping d_ij = d_base / h_j (higher heterogeneity of firm
/// j makes it harder to substitute away from firm j).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubstitutionSpec {
    Matrix(Vec<Vec<f64>>),
    FromHeterogeneity {
        d_base: f64,
        coefficients: Vec<f64>,
    },
}

impl SubstitutionSpec {
    /// Resolve to an n x n matrix with a zero diagonal.
    pub fn resolve(&self, n: usize) -> Result<Vec<Vec<f64>>, ValidationError> {
        match self {
            SubstitutionSpec::Matrix(m) => Ok(m.clone()),
            SubstitutionSpec::FromHeterogeneity { d_base, coefficients } => {
                if coefficients.len() != n {
                    return Err(ValidationError::single(
                        "substitution.coefficients",
                        format!("expected {} entries, got {}", n, coefficients.len()),
                    ));
                }
                let mut m = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            m[i][j] = d_base / coefficients[j];
                        }
                    }
                }
                Ok(m)
            }
        }
    }
}

/// One invariant violation, with the path of the offending field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Error, PartialEq)]
#[error("invalid scenario: {}", .violations.iter().map(|v| format!("{}: {}", v.path, v.message)).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl ValidationError {
    pub fn single(path: &str, message: impl Into<String>) -> Self {
        ValidationError {
            violations: vec![Violation {
                path: path.to_string(),
                message: message.into(),
            }],
        }
    }
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn new() -> Self {
        Checker { violations: Vec::new() }
    }

    fn require(&mut self, ok: bool, path: &str, message: impl Into<String>) {
        if !ok {
            self.violations.push(Violation {
                path: path.to_string(),
                message: message.into(),
            });
        }
    }

    fn finish(self) -> Result<(), ValidationError> {
        if self.violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations: self.violations })
        }
    }
}

/// Validate a beer scenario, reporting every violation at once.
pub fn validate_beer(s: &BeerScenario) -> Result<(), ValidationError> {
    let mut c = Checker::new();
    let n = s.num_stages;
    c.require(n >= 2, "num_stages", "must be at least 2");
    c.require(s.horizon >= 1, "horizon", "must be at least 1");
    for (name, len) in [
        ("initial_inventory", s.initial_inventory.len()),
        ("lead_time", s.lead_time.len()),
        ("capacity", s.capacity.len()),
        ("holding_cost", s.holding_cost.len()),
        ("backlog_cost", s.backlog_cost.len()),
    ] {
        c.require(len == n, name, format!("expected {} entries (one per stage), got {}", n, len));
    }
    for (i, lt) in s.lead_time.iter().enumerate() {
        c.require(*lt >= 1, &format!("lead_time[{i}]"), "must be at least 1");
    }
    for (i, cap) in s.capacity.iter().enumerate() {
        c.require(*cap > 0, &format!("capacity[{i}]"), "must be positive");
    }
    for (i, h) in s.holding_cost.iter().enumerate() {
        c.require(h.is_finite() && *h >= 0.0, &format!("holding_cost[{i}]"), "must be finite and >= 0");
    }
    for (i, sc) in s.backlog_cost.iter().enumerate() {
        c.require(sc.is_finite() && *sc >= 0.0, &format!("backlog_cost[{i}]"), "must be finite and >= 0");
    }
    validate_demand(&s.demand, s.horizon, &mut c);
    c.finish()
}

fn validate_demand(model: &DemandModel, horizon: u32, c: &mut Checker) {
    match model {
        DemandModel::Constant { .. } => {}
        DemandModel::UniformInt { lo, hi } => {
            c.require(lo <= hi, "demand.lo", format!("lo {lo} must be <= hi {hi}"));
        }
        DemandModel::SeasonalUniform { phases } => {
            c.require(!phases.is_empty(), "demand.phases", "must not be empty");
            let mut total = 0u32;
            for (i, p) in phases.iter().enumerate() {
                c.require(p.lo <= p.hi, &format!("demand.phases[{i}]"), format!("lo {} must be <= hi {}", p.lo, p.hi));
                c.require(p.length >= 1, &format!("demand.phases[{i}].length"), "must be at least 1");
                total += p.length;
            }
            c.require(
                total == horizon,
                "demand.phases",
                format!("phase lengths sum to {total}, horizon is {horizon}"),
            );
        }
        DemandModel::NormalRounded { mean, sd } => {
            c.require(mean.is_finite(), "demand.mean", "must be finite");
            c.require(sd.is_finite() && *sd > 0.0, "demand.sd", "must be finite and > 0");
        }
    }
}

/// Validate a market scenario, reporting every violation at once.
pub fn validate_market(s: &MarketScenario) -> Result<(), ValidationError> {
    let mut c = Checker::new();
    c.require(s.rounds >= 1, "rounds", "must be at least 1");
    match &s.model {
        MarketModel::Cournot { a, b, costs } => {
            c.require(!costs.is_empty(), "market.costs", "need at least one firm");
            c.require(b.is_finite() && *b > 0.0, "market.b", "price slope must be > 0");
            let max_cost = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            c.require(
                costs.is_empty() || *a > max_cost,
                "market.a",
                format!("a = {a} must exceed the highest marginal cost {max_cost}"),
            );
            for (i, cost) in costs.iter().enumerate() {
                c.require(cost.is_finite() && *cost >= 0.0, &format!("market.costs[{i}]"), "must be finite and >= 0");
            }
        }
        MarketModel::BertrandHomogeneous { a, b, costs, tick } => {
            c.require(costs.len() >= 2, "market.costs", "need at least two firms");
            c.require(b.is_finite() && *b > 0.0, "market.b", "demand slope must be > 0");
            c.require(tick.is_finite() && *tick > 0.0, "market.tick", "must be > 0");
            let max_cost = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            c.require(
                costs.is_empty() || *a > max_cost,
                "market.a",
                format!("a = {a} must exceed the highest marginal cost {max_cost}"),
            );
            for (i, cost) in costs.iter().enumerate() {
                c.require(cost.is_finite() && *cost >= 0.0, &format!("market.costs[{i}]"), "must be finite and >= 0");
            }
        }
        MarketModel::BertrandDifferentiated {
            intercepts,
            own_price_slopes,
            substitution,
            costs,
        } => {
            let n = costs.len();
            c.require(n >= 2, "market.costs", "need at least two firms");
            c.require(
                intercepts.len() == n,
                "market.intercepts",
                format!("expected {} entries, got {}", n, intercepts.len()),
            );
            c.require(
                own_price_slopes.len() == n,
                "market.own_price_slopes",
                format!("expected {} entries, got {}", n, own_price_slopes.len()),
            );
            for (i, b) in own_price_slopes.iter().enumerate() {
                c.require(b.is_finite() && *b > 0.0, &format!("market.own_price_slopes[{i}]"), "must be > 0");
            }
            match substitution.resolve(n) {
                Err(e) => c.violations.extend(e.violations),
                Ok(m) => {
                    c.require(m.len() == n, "market.substitution", format!("expected {} rows, got {}", n, m.len()));
                    for (i, row) in m.iter().enumerate() {
                        c.require(
                            row.len() == n,
                            &format!("market.substitution[{i}]"),
                            format!("expected {} entries, got {}", n, row.len()),
                        );
                        for (j, d) in row.iter().enumerate() {
                            if i == j {
                                c.require(*d == 0.0, &format!("market.substitution[{i}][{j}]"), "diagonal must be 0");
                            } else {
                                c.require(d.is_finite() && *d >= 0.0, &format!("market.substitution[{i}][{j}]"), "must be >= 0");
                            }
                        }
                    }
                    // symmetric case: enforce the equilibrium validity condition
                    if let Some((b, c_sub)) = symmetric_parameters(intercepts, own_price_slopes, &m) {
                        c.require(
                            2.0 * b > c_sub * (n as f64 - 1.0),
                            "market.substitution",
                            format!("symmetric case requires 2B > C(n-1); got 2*{b} vs {c_sub}*{}", n - 1),
                        );
                    }
                }
            }
        }
    }
    c.finish()
}

/// When all intercepts, slopes, and off-diagonal substitution entries are
/// equal, return (B, C) of the symmetric model.
pub fn symmetric_parameters(
    intercepts: &[f64],
    own_price_slopes: &[f64],
    substitution: &[Vec<f64>],
) -> Option<(f64, f64)> {
    let n = own_price_slopes.len();
    if n < 2 || intercepts.len() != n || substitution.len() != n {
        return None;
    }
    let a0 = intercepts[0];
    let b0 = own_price_slopes[0];
    if intercepts.iter().any(|a| *a != a0) || own_price_slopes.iter().any(|b| *b != b0) {
        return None;
    }
    let mut c0: Option<f64> = None;
    for (i, row) in substitution.iter().enumerate() {
        if row.len() != n {
            return None;
        }
        for (j, d) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            match c0 {
                None => c0 = Some(*d),
                Some(c) if *d == c => {}
                _ => return None,
            }
        }
    }
    c0.map(|c| (b0, c))
}


#[cfg(test)]
mod tests {
    use super::tests_support::beer_421;
    use super::*;
    use crate::demand::SeasonalPhase;

    #[test]
    fn valid_beer_passes() {
        assert!(validate_beer(&beer_421()).is_ok());
    }

    #[test]
    fn zero_stage_scenario_rejected() {
        let mut s = beer_421();
        s.num_stages = 0;
        s.initial_inventory.clear();
        s.lead_time.clear();
        s.capacity.clear();
        s.holding_cost.clear();
        s.backlog_cost.clear();
        let err = validate_beer(&s).unwrap_err();
        assert!(err.violations.iter().any(|v| v.path == "num_stages"));
    }

    #[test]
    fn phase_sum_mismatch_rejected() {
        let mut s = beer_421();
        s.horizon = 12;
        s.demand = DemandModel::SeasonalUniform {
            phases: vec![
                SeasonalPhase { length: 3, lo: 0, hi: 4 },
                SeasonalPhase { length: 3, lo: 4, hi: 8 },
                SeasonalPhase { length: 2, lo: 0, hi: 4 },
                SeasonalPhase { length: 3, lo: 4, hi: 8 },
            ],
        };
        let err = validate_beer(&s).unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| v.path == "demand.phases" && v.message.contains("sum to 11")));
    }

    #[test]
    fn cournot_cost_above_intercept_rejected() {
        let s = MarketScenario {
            model: MarketModel::Cournot { a: 10.0, b: 1.0, costs: vec![20.0] },
            rounds: 10,
            seed: 1,
        };
        let err = validate_market(&s).unwrap_err();
        assert!(err.violations.iter().any(|v| v.path == "market.a"));
    }

    #[test]
    fn differentiated_validity_condition_enforced() {
        let s = MarketScenario {
            model: MarketModel::BertrandDifferentiated {
                intercepts: vec![100.0, 100.0],
                own_price_slopes: vec![1.0, 1.0],
                substitution: SubstitutionSpec::Matrix(vec![vec![0.0, 2.0], vec![2.0, 0.0]]),
                costs: vec![20.0, 20.0],
            },
            rounds: 10,
            seed: 1,
        };
        let err = validate_market(&s).unwrap_err();
        assert!(err.violations.iter().any(|v| v.message.contains("2B > C(n-1)")));
    }

    #[test]
    fn heterogeneity_mapping_resolves() {
        let spec = SubstitutionSpec::FromHeterogeneity {
            d_base: 0.5,
            coefficients: vec![0.5, 1.5],
        };
        let m = spec.resolve(2).unwrap();
        assert_eq!(m[0][0], 0.0);
        assert_eq!(m[1][1], 0.0);
        assert!((m[0][1] - 0.5 / 1.5).abs() < 1e-12);
        assert!((m[1][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scenario_json_rejects_unknown_keys() {
        let json = r#"{
            "num_stages": 2, "horizon": 4,
            "initial_inventory": [5, 5], "lead_time": [1, 1],
            "capacity": [20, 20], "holding_cost": [0.5, 0.5],
            "backlog_cost": [1.0, 1.0],
            "demand": {"constant": {"level": 3}},
            "info_mode": "isolated", "seed": 1,
            "bogus": true
        }"#;
        let err = serde_json::from_str::<BeerScenario>(json).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
