//! Bertrand price competition: homogeneous goods (winner-takes-all with
//! equal tie splits) and differentiated goods (linear cross-price demand),
//! each with its Nash-equilibrium oracle.

use super::solve::solve_linear;
use super::{EquilibriumSolution, MarketError};

/// Clear one homogeneous-good round. Demand D(p) = max(0, a - b * p_min)
/// goes entirely to the lowest-priced firm; ties split it equally
/// (fractional shares allowed in accounting).
pub fn bertrand_homogeneous_clear(
    a: f64,
    b: f64,
    costs: &[f64],
    prices: &[u32],
) -> Result<(Vec<f64>, Vec<f64>), MarketError> {
    if prices.len() != costs.len() {
        return Err(MarketError::WrongArity {
            expected: costs.len(),
            got: prices.len(),
        });
    }
    let p_min = *prices.iter().min().expect("at least one firm");
    let demand = (a - b * f64::from(p_min)).max(0.0);
    let winners = prices.iter().filter(|p| **p == p_min).count() as f64;
    let sales: Vec<f64> = prices
        .iter()
        .map(|p| if *p == p_min { demand / winners } else { 0.0 })
        .collect();
    let profits = prices
        .iter()
        .zip(costs)
        .zip(&sales)
        .map(|((p, c), s)| (f64::from(*p) - c) * s)
        .collect();
    Ok((sales, profits))
}

/// Equilibrium of the homogeneous-good game.
///
/// Unique lowest cost: the low-cost firm prices at the limit c2 (of
/// c2 - epsilon) and serves D(c2); everyone else prices at own cost and
/// sells nothing. `tick_feasible_actions` replaces the winner's limit
/// price with the playable grid price c2 - tick. When k firms share the
/// lowest cost, all k price at c1 and split D(c1) k ways.
pub fn bertrand_homogeneous_equilibrium(
    a: f64,
    b: f64,
    costs: &[f64],
    tick: f64,
) -> Result<EquilibriumSolution, MarketError> {
    let n = costs.len();
    if n < 2 {
        return Err(MarketError::WrongArity { expected: 2, got: n });
    }
    let c1 = costs.iter().cloned().fold(f64::INFINITY, f64::min);
    let low_firms: Vec<usize> = (0..n).filter(|&i| costs[i] == c1).collect();

    if low_firms.len() >= 2 {
        let k = low_firms.len() as f64;
        let demand = (a - b * c1).max(0.0);
        let actions: Vec<f64> = costs.iter().map(|c| if *c == c1 { c1 } else { *c }).collect();
        let quantities: Vec<f64> = costs
            .iter()
            .map(|c| if *c == c1 { demand / k } else { 0.0 })
            .collect();
        return Ok(EquilibriumSolution {
            tick_feasible_actions: Some(actions.clone()),
            actions,
            quantities,
            market_price: Some(c1),
            aggregate_quantity: Some(demand),
        });
    }

    let winner = low_firms[0];
    let c2 = costs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != winner)
        .map(|(_, c)| *c)
        .fold(f64::INFINITY, f64::min);
    let demand = (a - b * c2).max(0.0);
    let actions: Vec<f64> = (0..n).map(|i| if i == winner { c2 } else { costs[i] }).collect();
    let mut tick_actions = actions.clone();
    tick_actions[winner] = c2 - tick;
    let quantities: Vec<f64> = (0..n).map(|i| if i == winner { demand } else { 0.0 }).collect();
    Ok(EquilibriumSolution {
        actions,
        quantities,
        market_price: Some(c2),
        aggregate_quantity: Some(demand),
        tick_feasible_actions: Some(tick_actions),
    })
}

/// Clear one differentiated-good round:
/// q_i = max(0, A_i - B_i p_i + sum_{j != i} d_ij p_j),
/// profit_i = (p_i - c_i) * q_i.
pub fn bertrand_differentiated_clear(
    intercepts: &[f64],
    own_price_slopes: &[f64],
    substitution: &[Vec<f64>],
    costs: &[f64],
    prices: &[u32],
) -> Result<(Vec<f64>, Vec<f64>), MarketError> {
    let n = costs.len();
    if prices.len() != n {
        return Err(MarketError::WrongArity { expected: n, got: prices.len() });
    }
    let mut sales = Vec::with_capacity(n);
    for i in 0..n {
        let mut q = intercepts[i] - own_price_slopes[i] * f64::from(prices[i]);
        for j in 0..n {
            if j != i {
                q += substitution[i][j] * f64::from(prices[j]);
            }
        }
        sales.push(q.max(0.0));
    }
    let profits = prices
        .iter()
        .zip(costs)
        .zip(&sales)
        .map(|((p, c), s)| (f64::from(*p) - c) * s)
        .collect();
    Ok((sales, profits))
}

/// Equilibrium of the differentiated-good game: solves the stacked
/// first-order conditions p_i = (A_i + sum_{j != i} d_ij p_j + B_i c_i) / (2 B_i).
///
/// Requires 2 B_i > sum_{j != i} d_ij for every firm (the symmetric form of
/// this is the validity condition 2B > C(n-1)); otherwise the best-response
/// system has no stable solution and an explicit error is returned.
pub fn bertrand_differentiated_equilibrium(
    intercepts: &[f64],
    own_price_slopes: &[f64],
    substitution: &[Vec<f64>],
    costs: &[f64],
) -> Result<EquilibriumSolution, MarketError> {
    let n = costs.len();
    if n == 0 {
        return Err(MarketError::WrongArity { expected: 2, got: 0 });
    }
    for i in 0..n {
        let cross: f64 = (0..n).filter(|j| *j != i).map(|j| substitution[i][j]).sum();
        if !(2.0 * own_price_slopes[i] > cross) {
            return Err(MarketError::NoEquilibrium {
                detail: format!(
                    "firm {}: requires 2B > sum of cross-price slopes (2*{} vs {})",
                    i, own_price_slopes[i], cross
                ),
            });
        }
    }
    let mut m = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        m[i][i] = 2.0 * own_price_slopes[i];
        for j in 0..n {
            if j != i {
                m[i][j] = -substitution[i][j];
            }
        }
        rhs[i] = intercepts[i] + own_price_slopes[i] * costs[i];
    }
    let prices = solve_linear(m, rhs).ok_or(MarketError::SingularSystem)?;
    let mut quantities = Vec::with_capacity(n);
    for i in 0..n {
        let mut q = intercepts[i] - own_price_slopes[i] * prices[i];
        for j in 0..n {
            if j != i {
                q += substitution[i][j] * prices[j];
            }
        }
        quantities.push(q);
    }
    Ok(EquilibriumSolution {
        actions: prices,
        quantities,
        market_price: None,
        aggregate_quantity: None,
        tick_feasible_actions: None,
    })
}

/// Symmetric-case closed form: p* = (A + Bc) / (2B - C(n-1)) and
/// q* = A + [C(n-1) - B] p*. Second route used to cross-check the general
/// linear solve.
pub fn bertrand_symmetric_closed_form(
    a: f64,
    b: f64,
    c_sub: f64,
    cost: f64,
    n: usize,
) -> Result<(f64, f64), MarketError> {
    let k = c_sub * (n as f64 - 1.0);
    let denom = 2.0 * b - k;
    if !(denom > 0.0) {
        return Err(MarketError::NoEquilibrium {
            detail: format!("requires 2B > C(n-1); got 2*{b} vs {k}"),
        });
    }
    let p = (a + b * cost) / denom;
    let q = a + (k - b) * p;
    Ok((p, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_clear_matches_recorded_round() {
        let (sales, profits) =
            bertrand_homogeneous_clear(100.0, 1.0, &[20.0, 40.0], &[40, 70]).unwrap();
        assert_eq!(sales, vec![60.0, 0.0]);
        assert_eq!(profits, vec![1200.0, 0.0]);
    }

    #[test]
    fn homogeneous_tie_splits_demand() {
        let (sales, _) = bertrand_homogeneous_clear(100.0, 1.0, &[20.0, 40.0], &[30, 30]).unwrap();
        assert_eq!(sales, vec![35.0, 35.0]);
    }

    #[test]
    fn homogeneous_demand_floor() {
        let (sales, profits) =
            bertrand_homogeneous_clear(100.0, 1.0, &[20.0, 40.0], &[120, 130]).unwrap();
        assert_eq!(sales, vec![0.0, 0.0]);
        assert_eq!(profits, vec![0.0, 0.0]);
    }

    #[test]
    fn homogeneous_sales_sum_to_demand() {
        let prices = [31, 31, 77];
        let (sales, _) =
            bertrand_homogeneous_clear(100.0, 1.0, &[20.0, 20.0, 40.0], &prices).unwrap();
        let total: f64 = sales.iter().sum();
        assert_eq!(total, 100.0 - 31.0);
    }

    #[test]
    fn homogeneous_equilibrium_unique_low_cost() {
        let eq = bertrand_homogeneous_equilibrium(100.0, 1.0, &[20.0, 40.0], 1.0).unwrap();
        assert_eq!(eq.actions, vec![40.0, 40.0]);
        assert_eq!(eq.quantities, vec![60.0, 0.0]);
        assert_eq!(eq.tick_feasible_actions.as_deref(), Some(&[39.0, 40.0][..]));
    }

    #[test]
    fn homogeneous_equilibrium_shared_low_cost() {
        let eq = bertrand_homogeneous_equilibrium(100.0, 1.0, &[20.0, 20.0], 1.0).unwrap();
        assert_eq!(eq.actions, vec![20.0, 20.0]);
        assert_eq!(eq.quantities, vec![40.0, 40.0]);
    }

    #[test]
    fn tick_price_beats_limit_price_for_winner() {
        // firm 1 at 39 vs firm 2 at 40: winner takes D(39) = 61
        let (sales, profits) =
            bertrand_homogeneous_clear(100.0, 1.0, &[20.0, 40.0], &[39, 40]).unwrap();
        assert_eq!(sales[0], 61.0);
        let undercut_profit = profits[0];
        // at the tie price 40 the winner splits the market
        let (_, tie_profits) =
            bertrand_homogeneous_clear(100.0, 1.0, &[20.0, 40.0], &[40, 40]).unwrap();
        assert!(undercut_profit > tie_profits[0]);
        assert_eq!(undercut_profit, 19.0 * 61.0);
    }

    #[test]
    fn differentiated_clear_linear_demand() {
        let sub = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        let (sales, _) = bertrand_differentiated_clear(
            &[100.0, 100.0],
            &[1.0, 1.0],
            &sub,
            &[20.0, 20.0],
            &[80, 80],
        )
        .unwrap();
        assert_eq!(sales, vec![60.0, 60.0]);
    }

    #[test]
    fn differentiated_clear_intercept_and_floor() {
        let sub = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        let (sales, _) =
            bertrand_differentiated_clear(&[100.0, 100.0], &[1.0, 1.0], &sub, &[20.0, 20.0], &[0, 0])
                .unwrap();
        assert_eq!(sales, vec![100.0, 100.0]);
        let (sales, _) =
            bertrand_differentiated_clear(&[100.0, 100.0], &[1.0, 1.0], &sub, &[20.0, 20.0], &[500, 0])
                .unwrap();
        assert_eq!(sales[0], 0.0);
    }

    #[test]
    fn differentiated_symmetric_equilibrium() {
        let sub = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        let eq = bertrand_differentiated_equilibrium(
            &[100.0, 100.0],
            &[1.0, 1.0],
            &sub,
            &[20.0, 20.0],
        )
        .unwrap();
        assert!((eq.actions[0] - 80.0).abs() < 1e-9);
        assert!((eq.actions[1] - 80.0).abs() < 1e-9);
        assert!((eq.quantities[0] - 60.0).abs() < 1e-9);
        let (p, q) = bertrand_symmetric_closed_form(100.0, 1.0, 0.5, 20.0, 2).unwrap();
        assert!((p - 80.0).abs() < 1e-12);
        assert!((q - 60.0).abs() < 1e-12);
    }

    #[test]
    fn zero_substitution_gives_monopoly_price() {
        let (p, _) = bertrand_symmetric_closed_form(100.0, 1.0, 0.0, 20.0, 2).unwrap();
        assert_eq!(p, (100.0 + 20.0) / 2.0);
    }

    #[test]
    fn validity_boundary_is_an_error() {
        // 2B = C(n-1)
        assert!(matches!(
            bertrand_symmetric_closed_form(100.0, 1.0, 2.0, 20.0, 2),
            Err(MarketError::NoEquilibrium { .. })
        ));
        let sub = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
        assert!(matches!(
            bertrand_differentiated_equilibrium(&[100.0, 100.0], &[1.0, 1.0], &sub, &[20.0, 20.0]),
            Err(MarketError::NoEquilibrium { .. })
        ));
    }
}
