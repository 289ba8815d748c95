//! Cournot quantity competition: market clearing and the Nash-equilibrium
//! oracle for arbitrary (heterogeneous) marginal costs.

use super::solve::solve_linear;
use super::{EquilibriumSolution, MarketError};

/// Clear one Cournot round: P = max(0, a - b * sum q),
/// profit_i = (P - c_i) * q_i.
pub fn cournot_clear(
    a: f64,
    b: f64,
    costs: &[f64],
    quantities: &[u32],
) -> Result<(f64, Vec<f64>), MarketError> {
    if quantities.len() != costs.len() {
        return Err(MarketError::WrongArity {
            expected: costs.len(),
            got: quantities.len(),
        });
    }
    let total: f64 = quantities.iter().map(|q| f64::from(*q)).sum();
    let price = (a - b * total).max(0.0);
    let profits = quantities
        .iter()
        .zip(costs)
        .map(|(q, c)| (price - c) * f64::from(*q))
        .collect();
    Ok((price, profits))
}

/// Solve the Cournot-Nash equilibrium.
///
/// Stacks the first-order conditions into the linear system with diagonal
/// 2b and off-diagonal b against d_i = a - c_i, then drops firms whose
/// solution quantity is negative (fixing them at zero) and re-solves until
/// every active firm produces a positive quantity. Q* and P* come from the
/// closed forms over the active set, which the solved quantities match to
/// numerical precision.
pub fn cournot_equilibrium(
    a: f64,
    b: f64,
    costs: &[f64],
) -> Result<EquilibriumSolution, MarketError> {
    let n = costs.len();
    if n == 0 {
        return Err(MarketError::WrongArity { expected: 1, got: 0 });
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(MarketError::SingularSystem);
    }

    let mut active: Vec<usize> = (0..n).collect();
    loop {
        let k = active.len();
        if k == 0 {
            return Err(MarketError::NoEquilibrium {
                detail: "no firm can profitably produce".to_string(),
            });
        }
        let mut m = vec![vec![b; k]; k];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 2.0 * b;
        }
        let rhs: Vec<f64> = active.iter().map(|&i| a - costs[i]).collect();
        let q_active = solve_linear(m, rhs).ok_or(MarketError::SingularSystem)?;

        if let Some(worst) = q_active
            .iter()
            .enumerate()
            .filter(|(_, q)| **q < 0.0)
            .min_by(|(_, x), (_, y)| x.partial_cmp(y).unwrap())
            .map(|(idx, _)| idx)
        {
            active.remove(worst);
            continue;
        }

        let mut quantities = vec![0.0; n];
        for (idx, &firm) in active.iter().enumerate() {
            quantities[firm] = q_active[idx];
        }
        let cost_sum: f64 = active.iter().map(|&i| costs[i]).sum();
        let kf = k as f64;
        let aggregate = (kf * a - cost_sum) / (b * (kf + 1.0));
        let price = (a + cost_sum) / (kf + 1.0);
        return Ok(EquilibriumSolution {
            actions: quantities.clone(),
            quantities,
            market_price: Some(price),
            aggregate_quantity: Some(aggregate),
            tick_feasible_actions: None,
        });
    }
}
