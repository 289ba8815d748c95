//! Post-hoc analytics over completed episodes: variance and bullwhip
//! amplification ratios, information gain between information regimes, and
//! distance-to-equilibrium convergence. All pure recomputations from the
//! recorded series.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::EquilibriumSolution;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("series is empty")]
    EmptySeries,
    #[error("demand variance is zero; amplification ratio undefined")]
    ZeroDemandVariance,
    #[error("baseline amplification is zero; information gain undefined")]
    ZeroBaseline,
    #[error("trailing window {k} exceeds the {rounds} recorded rounds")]
    WindowTooLong { k: usize, rounds: usize },
}

/// Population variance (divide by N).
pub fn variance(series: &[u32]) -> Result<f64, MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    let n = series.len() as f64;
    let mean = series.iter().map(|v| f64::from(*v)).sum::<f64>() / n;
    let ss = series
        .iter()
        .map(|v| {
            let d = f64::from(*v) - mean;
            d * d
        })
        .sum::<f64>();
    Ok(ss / n)
}

/// Per-stage order-variance amplification relative to demand variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BullwhipReport {
    pub demand_variance: f64,
    pub order_variance: Vec<f64>,
    /// Var(orders_i) / Var(demand), one per stage.
    pub amplification: Vec<f64>,
}

/// Amplification ratios from realized series. `warmup` periods are
/// excluded from the front of every series before computing variances.
pub fn amplification(
    orders_by_stage: &[Vec<u32>],
    demand: &[u32],
    warmup: usize,
) -> Result<BullwhipReport, MetricsError> {
    let demand_tail = demand.get(warmup.min(demand.len())..).unwrap_or(&[]);
    let denom = variance(demand_tail)?;
    amplification_with_demand_variance(orders_by_stage, denom, warmup)
}

/// Same, but against an externally supplied demand variance (e.g. the
/// theoretical variance of the configured distribution).
pub fn amplification_with_demand_variance(
    orders_by_stage: &[Vec<u32>],
    demand_variance: f64,
    warmup: usize,
) -> Result<BullwhipReport, MetricsError> {
    if demand_variance == 0.0 {
        return Err(MetricsError::ZeroDemandVariance);
    }
    let mut order_variance = Vec::with_capacity(orders_by_stage.len());
    for orders in orders_by_stage {
        let tail = orders.get(warmup.min(orders.len())..).unwrap_or(&[]);
        order_variance.push(variance(tail)?);
    }
    let ratios = order_variance.iter().map(|v| v / demand_variance).collect();
    Ok(BullwhipReport {
        demand_variance,
        order_variance,
        amplification: ratios,
    })
}

/// Percentage reduction of an amplification ratio under information
/// sharing: 100 * (without - with) / without.
pub fn information_gain(amp_without: f64, amp_with: f64) -> Result<f64, MetricsError> {
    if amp_without == 0.0 {
        return Err(MetricsError::ZeroBaseline);
    }
    Ok(100.0 * (amp_without - amp_with) / amp_without)
}

/// Distance-to-equilibrium trajectory of one market episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// |action - equilibrium action| per round per firm.
    pub action_deviation: Vec<Vec<f64>>,
    /// |P - P*| per round, when the game has a market price.
    pub price_deviation: Option<Vec<f64>>,
    /// Mean absolute action deviation per firm over the last k rounds.
    pub trailing_mean_action_deviation: Vec<f64>,
    /// Mean absolute price deviation over the last k rounds.
    pub trailing_mean_price_deviation: Option<f64>,
    pub k: usize,
}

/// Per-round deviations from the oracle equilibrium plus trailing-k means.
pub fn convergence(
    actions_by_round: &[Vec<u32>],
    prices_by_round: Option<&[f64]>,
    equilibrium: &EquilibriumSolution,
    k: usize,
) -> Result<ConvergenceReport, MetricsError> {
    let rounds = actions_by_round.len();
    if k > rounds || k == 0 {
        return Err(MetricsError::WindowTooLong { k, rounds });
    }
    let n = equilibrium.actions.len();
    let action_deviation: Vec<Vec<f64>> = actions_by_round
        .iter()
        .map(|actions| {
            (0..n)
                .map(|i| (f64::from(actions[i]) - equilibrium.actions[i]).abs())
                .collect()
        })
        .collect();
    let trailing: Vec<f64> = (0..n)
        .map(|i| {
            action_deviation[rounds - k..]
                .iter()
                .map(|row| row[i])
                .sum::<f64>()
                / k as f64
        })
        .collect();
    let price_deviation = match (prices_by_round, equilibrium.market_price) {
        (Some(prices), Some(p_star)) => {
            Some(prices.iter().map(|p| (p - p_star).abs()).collect::<Vec<f64>>())
        }
        _ => None,
    };
    let trailing_price = price_deviation.as_ref().map(|devs| {
        devs[devs.len() - k.min(devs.len())..].iter().sum::<f64>() / k.min(devs.len()) as f64
    });
    Ok(ConvergenceReport {
        action_deviation,
        price_deviation,
        trailing_mean_action_deviation: trailing,
        trailing_mean_price_deviation: trailing_price,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::cournot_equilibrium;
    use proptest::prelude::*;

    #[test]
    fn variance_hand_values() {
        assert_eq!(variance(&[4, 4, 4, 4]).unwrap(), 0.0);
        assert_eq!(variance(&[0, 8]).unwrap(), 16.0);
        assert_eq!(variance(&[2, 4, 6]).unwrap(), 8.0 / 3.0);
        assert_eq!(variance(&[1, 2, 3, 4]).unwrap(), 1.25);
        assert_eq!(variance(&[5]).unwrap(), 0.0);
        assert_eq!(variance(&[]), Err(MetricsError::EmptySeries));
    }

    #[test]
    fn passthrough_chain_has_unit_ratios() {
        let demand = vec![3, 7, 1, 5, 4];
        let orders = vec![demand.clone(), demand.clone()];
        let report = amplification(&orders, &demand, 0).unwrap();
        assert_eq!(report.amplification, vec![1.0, 1.0]);
    }

    #[test]
    fn doubling_deviations_quadruples_the_ratio() {
        // orders = 2*(demand - mean) + mean with integer-exact values
        let demand = vec![2, 6, 2, 6];
        let orders = vec![vec![0, 8, 0, 8]];
        let report = amplification(&orders, &demand, 0).unwrap();
        assert_eq!(report.amplification, vec![4.0]);
    }

    #[test]
    fn constant_demand_is_undefined() {
        let orders = vec![vec![1, 2, 3]];
        assert_eq!(
            amplification(&orders, &[4, 4, 4], 0),
            Err(MetricsError::ZeroDemandVariance)
        );
    }

    #[test]
    fn warmup_trims_the_front() {
        let demand = vec![100, 0, 8, 0, 8];
        let orders = vec![vec![100, 0, 8, 0, 8]];
        let report = amplification(&orders, &demand, 1).unwrap();
        assert_eq!(report.demand_variance, 16.0);
        assert_eq!(report.amplification, vec![1.0]);
    }

    #[test]
    fn theoretical_denominator_option() {
        let orders = vec![vec![0, 8, 0, 8]];
        let report = amplification_with_demand_variance(&orders, 6.0, 0).unwrap();
        assert_eq!(report.amplification, vec![16.0 / 6.0]);
    }

    #[test]
    fn information_gain_reference_rows() {
        let g = information_gain(6.08, 4.80).unwrap();
        assert!((g - 21.05).abs() < 0.01);
        let g = information_gain(1.46, 2.38).unwrap();
        assert!((g - -63.01).abs() < 0.01);
        assert_eq!(information_gain(3.3, 3.3).unwrap(), 0.0);
        assert_eq!(information_gain(0.0, 1.0), Err(MetricsError::ZeroBaseline));
    }

    #[test]
    fn convergence_at_fixed_point_is_zero() {
        let eq = cournot_equilibrium(100.0, 1.0, &[25.0, 25.0]).unwrap();
        let q = eq.actions[0].round() as u32;
        // play the exact (integral) equilibrium
        let eq_exact = EquilibriumSolution {
            actions: vec![f64::from(q), f64::from(q)],
            quantities: vec![f64::from(q), f64::from(q)],
            market_price: Some(100.0 - 2.0 * f64::from(q)),
            aggregate_quantity: Some(2.0 * f64::from(q)),
            tick_feasible_actions: None,
        };
        let rounds = vec![vec![q, q]; 5];
        let report = convergence(&rounds, None, &eq_exact, 3).unwrap();
        assert!(report.action_deviation.iter().all(|r| r.iter().all(|d| *d == 0.0)));
        assert_eq!(report.trailing_mean_action_deviation, vec![0.0, 0.0]);
    }

    #[test]
    fn rounded_nash_play_leaves_constant_gap() {
        let eq = cournot_equilibrium(100.0, 1.0, &[0.0, 0.0]).unwrap();
        let rounds = vec![vec![33, 33]; 4];
        let report = convergence(&rounds, None, &eq, 4).unwrap();
        for dev in &report.trailing_mean_action_deviation {
            assert!((dev - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_round_window_edge() {
        let eq = cournot_equilibrium(100.0, 1.0, &[0.0, 0.0]).unwrap();
        let rounds = vec![vec![30, 36]];
        let report = convergence(&rounds, Some(&[34.0]), &eq, 1).unwrap();
        assert_eq!(report.trailing_mean_action_deviation[0], report.action_deviation[0][0]);
        let p_dev = report.price_deviation.unwrap();
        assert!((p_dev[0] - (34.0_f64 - 100.0 / 3.0).abs()).abs() < 1e-12);
        assert!(convergence(&rounds, None, &eq, 2).is_err());
    }

    proptest! {
        #[test]
        fn variance_is_translation_invariant(series in proptest::collection::vec(0u32..500, 2..40), shift in 1u32..100) {
            let shifted: Vec<u32> = series.iter().map(|v| v + shift).collect();
            let a = variance(&series).unwrap();
            let b = variance(&shifted).unwrap();
            prop_assert!((a - b).abs() < 1e-6 * a.max(1.0));
        }
    }
}
