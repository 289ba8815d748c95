//! Prompt rendering. The system and process templates are fixed texts
//! with `{placeholder}` slots; rendering is deterministic and fails on any
//! unresolved slot. Golden-file tests pin the rendered bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beer::{stage_name, Observation};
use crate::market::EquilibriumSolution;
use crate::scenario::{BeerScenario, InfoMode, MarketModel, MarketScenario, RiskPreference};

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("unresolved placeholder {{{name}}}")]
    UnresolvedPlaceholder { name: String },
    #[error("missing value for placeholder {{{name}}}")]
    MissingValue { name: String },
}

/// A rendered prompt pair plus the substitutions that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_message: String,
    pub process_message: String,
    pub placeholders_resolved: BTreeMap<String, String>,
}

// --- shared numeric formatting -------------------------------------------

/// Parameters print with at least one decimal ("100.0", "1.0", "0.5").
pub(crate) fn fmt_param(x: f64) -> String {
    if (x * 10.0).fract() == 0.0 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

/// Prices and quantities in outcome blocks print with two decimals.
pub(crate) fn fmt_two(x: f64) -> String {
    format!("{x:.2}")
}

/// Rewards print as integers when whole ("0", "-48"), else plainly.
pub(crate) fn fmt_reward(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x}")
    }
}

fn fmt_u32_list(items: &[u32]) -> String {
    let inner: Vec<String> = items.iter().map(|v| v.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

fn fmt_reward_list(items: &[f64]) -> String {
    let inner: Vec<String> = items.iter().map(|v| fmt_reward(*v)).collect();
    format!("[{}]", inner.join(", "))
}

// --- template engine ------------------------------------------------------

/// Substitute `{name}` slots from the map; every slot must resolve and the
/// output must contain no leftover markers.
pub fn render_template(
    template: &str,
    values: &BTreeMap<String, String>,
) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let end = after.find('}').ok_or_else(|| PromptError::UnresolvedPlaceholder {
            name: after.chars().take(24).collect(),
        })?;
        let name = &after[..end];
        let value = values.get(name).ok_or_else(|| PromptError::MissingValue {
            name: name.to_string(),
        })?;
        out.push_str(value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

// --- market templates -------------------------------------------------------

const COURNOT_SYSTEM: &str = "\
You are a rational firm competing in a market with {num_firms} firms. You are {firm_name} (Firm {firm_number}). Your goal is to maximize profit by deciding quantity.

Market mechanism:
- Each round you and other firms simultaneously decide your quantities
- Market price is determined by the inverse demand function: P = a - bQ, where Q is the total quantity of all firms
- Your profit equals: Profit = (P - c) \u{d7} q, where c is your marginal cost, q is your quantity
- Other firms are also trying to maximize their profits
- Each round you can only observe the previous market results, you cannot know other firms' decisions in advance

As a rational entrepreneur, you need to:
- Gradually optimize your strategy by observing market reactions
- Consider the demand function, your costs, and possible behaviors of other firms
- Analyze trends based on historical observations and make the best decision";

const COURNOT_PROCESS: &str = "\
It's round {round}, you are firm {firm_number} in this market.

Your current state:
{state_block}

Market information:
{model_description}

You need to decide how many units to produce this round. Consider:
1. The market demand function: P = a - bQ
2. Your marginal cost
3. How your quantity affects market price
4. How to set quantity to maximize profit: (P - marginal cost) \u{d7} quantity

Please analyze the market situation, then provide your quantity decision.

Start by explaining your reasoning in one or two sentences, then give an integer quantity in square brackets (e.g. [26]).";

const BERTRAND_SYSTEM: &str = "\
You are a rational firm competing in a market with {num_firms} firms. You are {firm_name} (Firm {firm_number}). Your goal is to maximize profit by deciding price.

Market mechanism:
- Each round you and other firms simultaneously decide your prices
- Your demand function: q = a - bP + sum dP', where P' are other firms' prices
- Parameter a is your potential market size, b is your price elasticity, d is product substitution coefficient
- When d > 0, rising prices by other firms will increase demand for your product (positive substitution effect)
- Your profit equals: Profit = (P - c) \u{d7} q, where P is your price, c is your marginal cost, q is your sales volume
- Other firms are also trying to maximize their profits
- Each round you can only observe the previous market results, you cannot know other firms' decisions in advance

As a rational entrepreneur, you need to:
- Gradually optimize your pricing strategy by observing market reactions
- Consider the demand function, product substitutability, your costs, and possible behaviors of other firms
- Analyze historical price and sales data to find the optimal price
- Think about how price changes affect demand and profit
- Remember not to set price below your marginal cost, otherwise you will incur a loss";

const BERTRAND_PROCESS: &str = "\
It's round {round}, you are firm {firm_number} in this market.

Your current state:
{state_block}

Market information:
{model_description}

You need to decide the price for your product this round. Consider:
1. Your demand function: q = a - bP + sum dP', where P' are other firms' prices
2. Your marginal cost: {marginal_cost} units/price
3. The effect of price on demand volume
4. Substitution coefficients indicate how other firms' price changes affect your demand
5. How to set price to maximize profit: (price - marginal cost) \u{d7} sales volume

Please analyze the market situation, then provide your price decision.

Start by explaining your reasoning in one or two sentences, then give an integer price in square brackets (e.g. [45]).";

/// Render the system and process messages for one firm in one round of a
/// market game. `round` is 1-based. The Bertrand variants include the
/// firm's oracle equilibrium hints, as shown to the live agents.
pub fn render_market_prompts(
    scenario: &MarketScenario,
    firm_index: usize,
    firm_name: &str,
    round: u32,
    history: &MarketHistoryView,
    equilibrium: Option<&EquilibriumSolution>,
) -> Result<PromptBundle, PromptError> {
    let n = scenario.num_firms();
    let mut values = BTreeMap::new();
    if firm_name.is_empty() {
        return Err(PromptError::MissingValue { name: "firm_name".to_string() });
    }
    values.insert("num_firms".to_string(), n.to_string());
    values.insert("firm_name".to_string(), firm_name.to_string());
    values.insert("firm_number".to_string(), (firm_index + 1).to_string());
    values.insert("round".to_string(), round.to_string());

    let (system_tpl, process_tpl) = match &scenario.model {
        MarketModel::Cournot { .. } => (COURNOT_SYSTEM, COURNOT_PROCESS),
        _ => (BERTRAND_SYSTEM, BERTRAND_PROCESS),
    };

    let mut state_lines: Vec<String> = Vec::new();
    match &scenario.model {
        MarketModel::Cournot { a, b, costs } => {
            state_lines.push(format!(
                "- Demand function: P = {} - {} Q (where Q is the total quantity of all firms)",
                fmt_param(*a),
                fmt_param(*b)
            ));
            state_lines.push(format!(
                "- Your marginal cost: {} units/price",
                fmt_param(costs[firm_index])
            ));
            values.insert(
                "model_description".to_string(),
                format!(
                    "Cournot quantity competition among {} firms. Market price: P = a - bQ with a = {}, b = {}. All firms decide quantities simultaneously each round.",
                    n,
                    fmt_param(*a),
                    fmt_param(*b)
                ),
            );
        }
        MarketModel::BertrandHomogeneous { a, b, costs, .. } => {
            state_lines.push(format!(
                "- Demand function parameters: a = {}, b = {}",
                fmt_param(*a),
                fmt_param(*b)
            ));
            state_lines.push(format!(
                "- Your marginal cost: {} units/price",
                fmt_param(costs[firm_index])
            ));
            state_lines.push(
                "- Your demand function: q = f(all prices) based on market demand and product differentiation"
                    .to_string(),
            );
            values.insert(
                "marginal_cost".to_string(),
                fmt_param(costs[firm_index]),
            );
            values.insert(
                "model_description".to_string(),
                format!(
                    "Bertrand price competition among {} firms selling a homogeneous product. Market demand: Q = a - bP with a = {}, b = {}. The lowest-priced firm captures the whole market; ties split demand equally.",
                    n,
                    fmt_param(*a),
                    fmt_param(*b)
                ),
            );
        }
        MarketModel::BertrandDifferentiated { intercepts, own_price_slopes, costs, .. } => {
            state_lines.push(format!(
                "- Demand function parameters: a = {}, b = {}",
                fmt_param(intercepts[firm_index]),
                fmt_param(own_price_slopes[firm_index])
            ));
            state_lines.push(format!(
                "- Your marginal cost: {} units/price",
                fmt_param(costs[firm_index])
            ));
            state_lines.push(
                "- Your demand function: q = f(all prices) based on market demand and product differentiation"
                    .to_string(),
            );
            values.insert(
                "marginal_cost".to_string(),
                fmt_param(costs[firm_index]),
            );
            values.insert(
                "model_description".to_string(),
                format!(
                    "Bertrand price competition among {} firms selling differentiated products. Your demand: q = a - bP + sum dP' with the parameters above; cross-price substitution coefficients shift demand toward you when competitors raise prices.",
                    n
                ),
            );
        }
    }

    if !matches!(scenario.model, MarketModel::Cournot { .. }) {
        if let Some(eq) = equilibrium {
            state_lines.push(format!(
                "- Nash equilibrium price for you: {}",
                fmt_two(eq.actions[firm_index])
            ));
            state_lines.push(format!(
                "- Nash equilibrium quantity for you: {}",
                fmt_two(eq.quantities[firm_index])
            ));
        }
    }

    if !history.rounds.is_empty() {
        state_lines.push("- Previous market results (from old to new):".to_string());
        for entry in &history.rounds {
            state_lines.push(entry.clone());
        }
    }
    values.insert("state_block".to_string(), state_lines.join("\n"));

    let system_message = render_template(system_tpl, &values)?;
    let process_message = render_template(process_tpl, &values)?;
    Ok(PromptBundle { system_message, process_message, placeholders_resolved: values })
}

/// Pre-formatted per-round history lines for one firm, oldest first.
#[derive(Clone, Debug, Default)]
pub struct MarketHistoryView {
    pub rounds: Vec<String>,
}

impl MarketHistoryView {
    /// What one firm is told about past rounds: its own action and profit
    /// plus aggregate market results, never competitors' individual
    /// decisions.
    pub fn for_firm(state: &crate::market::MarketState, firm_index: usize) -> Self {
        let mut rounds = Vec::new();
        for (r, actions) in state.action_history.iter().enumerate() {
            let profit = state.profit_history[r][firm_index];
            let line = match &state.scenario.model {
                MarketModel::Cournot { .. } => {
                    let total: u32 = actions.iter().sum();
                    format!(
                        "  Round {}: your quantity = {}, total quantity = {}, market price = {}, your profit = {}",
                        r + 1,
                        actions[firm_index],
                        total,
                        fmt_two(state.price_history[r]),
                        fmt_two(profit)
                    )
                }
                _ => {
                    let sales = &state.sales_history[r];
                    let total: f64 = sales.iter().sum();
                    format!(
                        "  Round {}: your price = {}, your sales volume = {}, your profit = {}, total market sales = {}",
                        r + 1,
                        actions[firm_index],
                        fmt_two(sales[firm_index]),
                        fmt_two(profit),
                        fmt_two(total)
                    )
                }
            };
            rounds.push(line);
        }
        MarketHistoryView { rounds }
    }
}

// --- beer game templates ----------------------------------------------------

const RISK_AVERSE_SYSTEM: &str = "\
You are highly risk-averse and prioritize avoiding stockouts at all costs. You should maintain higher inventory levels to ensure you can always meet demand. It's better to have excess inventory than to risk backlog. You should place larger orders earlier to provide a safety buffer.";

const RISK_APPETITE_SYSTEM: &str = "\
You are profit-oriented, and your first goal is to obtain the highest reward. You should keep inventory levels low and place orders in a timely manner. If the loss caused by backlogs affects your reward, you should replenish the stock in time. You should place orders more frequently and adjust your ordering strategy in time to ensure higher rewards.";

const RISK_NEUTRAL_SYSTEM: &str = "\
You should balance inventory holding costs with the risk of stockouts. Aim to maintain a moderate inventory level that can handle normal demand fluctuations. Try to balance the costs of backlog with the costs of holding excess inventory.";

const INFO_SHARING_SYSTEM: &str = "\
As part of our information sharing system, you will receive data about upstream stages' Lead Time, Inventory Level, and Current Backlog. Use this information to better anticipate supply chain issues and optimize your ordering decisions.";

const BEER_PROCESS: &str = "\
Now this is round {round} of {horizon}, and you are at stage {stage_number} ({stage_name}) of {num_stages} in the supply chain.

Your current state:
{state_block}

{guidelines}";

const GUIDELINE_INVENTORY: &str = "Consider your current inventory, backlog, and expected future orders.";
const GUIDELINE_LEAD_TIME: &str =
    "Account for lead time \u{2013} you need to place orders in advance.";
const GUIDELINE_PATTERNS: &str =
    "Analyze patterns in your downstream's ordering history to forecast future demand.";
const GUIDELINE_UPSTREAM: &str =
    "Review the information about upstream stages to anticipate potential supply issues.";
const GUIDELINE_BALANCE: &str = "Try to avoid both stockouts and excess inventory.";
const GUIDELINE_OPEN_ORDERS: &str = "Open orders should always equal to \"expected downstream orders + backlog.\" If open orders are larger than this, the inventory will rise (once the open orders arrive). If open orders are smaller than this, the backlog will not go down and it may even rise.";

const BEER_CLOSING_UPSTREAM: &str = "Please first explain your reasoning in 1-2 sentences based on the downstream order pattern you observe, the upstream supply chain information, and your historical performance, then provide your order quantity as a non-negative integer within brackets (e.g. [5]).";
const BEER_CLOSING_TOPMOST: &str = "Please first explain your reasoning in 1-2 sentences based on the downstream order pattern you observe and your historical performance, then provide your order quantity as a non-negative integer within brackets (e.g. [5]).";

fn beer_guidelines(is_topmost: bool) -> String {
    let mut items: Vec<&str> = vec![GUIDELINE_INVENTORY, GUIDELINE_LEAD_TIME, GUIDELINE_PATTERNS];
    if !is_topmost {
        items.push(GUIDELINE_UPSTREAM);
    }
    items.push(GUIDELINE_BALANCE);
    items.push(GUIDELINE_OPEN_ORDERS);
    let mut out = String::from("Guidelines for your decision:\n");
    for (i, item) in items.iter().enumerate() {
        out.push_str(&format!("{}. {}\n", i + 1, item));
    }
    out.push_str(if is_topmost { BEER_CLOSING_TOPMOST } else { BEER_CLOSING_UPSTREAM });
    out
}

fn beer_state_block(obs: &Observation) -> String {
    let mut lines: Vec<String> = Vec::new();
    lines.push(format!("- Lead Time: {} round(s)", obs.lead_time));
    lines.push(format!("- Inventory Level: {} unit(s)", obs.on_hand));
    lines.push(format!(
        "- Current Backlog (you owing to the downstream): {} unit(s)",
        obs.backlog_to_downstream
    ));
    if let Some(ub) = obs.upstream_backlog_owed_to_me {
        lines.push(format!("- Upstream Backlog (your upstream owing to you): {ub} unit(s)"));
    }
    lines.push(format!(
        "- Previous Sales (in the recent round(s), from old to new): {}",
        fmt_u32_list(&obs.recent_sales)
    ));
    lines.push(format!(
        "- Arriving Deliveries (in this and the next round(s), from near to far): {}",
        fmt_u32_list(&obs.arriving_deliveries)
    ));
    if let Some(demands) = &obs.demand_history {
        lines.push(format!("- Recent consumer demands (from old to new): {}", fmt_u32_list(demands)));
        if let Some((lo, hi)) = obs.demand_range_hint {
            lines.push(format!(
                "- Your market research indicates customer demand varies between {lo} and {hi} units per round."
            ));
        }
    } else {
        lines.push(format!(
            "- Historical orders from your downstream (from old to new): {}",
            fmt_u32_list(&obs.received_order_history)
        ));
        if let Some(now) = obs.received_order_now {
            lines.push(format!(
                "- Your immediate downstream has just placed an order of {now} units."
            ));
        }
    }
    if let Some(up) = &obs.upstream_info {
        lines.push(format!("- Upstream Lead Time (shared): {} round(s)", up.lead_time));
        lines.push(format!("- Upstream Inventory Level (shared): {} unit(s)", up.on_hand));
        lines.push(format!("- Upstream Current Backlog (shared): {} unit(s)", up.backlog));
    }
    lines.push(format!(
        "- Your historical rewards/profits (from old to new): {}",
        fmt_reward_list(&obs.reward_history)
    ));
    if let Some(last) = obs.reward_history.last() {
        lines.push(format!(
            "- Your most recent reward was {}, which reflects your reward in the previous round.",
            fmt_reward(*last)
        ));
        let mean: f64 = obs.reward_history.iter().sum::<f64>() / obs.reward_history.len() as f64;
        let line = if (last - mean).abs() < 1e-9 {
            "- Your recent performance has been consistent with your average."
        } else if *last < mean {
            "- Your recent decisions have been less profitable than your average performance."
        } else {
            "- Your recent decisions have been more profitable than your average performance."
        };
        lines.push(line.to_string());
    }
    lines.join("\n")
}

/// Render the system and process messages for one beer-game stage.
///
/// The system message is the verbatim risk preamble, extended with the
/// information-sharing preamble under that mode; the process message is
/// the stage-appropriate template (the topmost stage has no upstream to
/// review) around the observation's state block.
pub fn render_beer_prompts(
    scenario: &BeerScenario,
    obs: &Observation,
    risk: RiskPreference,
    info_mode: InfoMode,
) -> Result<PromptBundle, PromptError> {
    let preamble = match risk {
        RiskPreference::Averse => RISK_AVERSE_SYSTEM,
        RiskPreference::Neutral => RISK_NEUTRAL_SYSTEM,
        RiskPreference::Appetite => RISK_APPETITE_SYSTEM,
    };
    let system_message = match info_mode {
        InfoMode::Isolated => preamble.to_string(),
        InfoMode::Sharing => format!("{preamble}\n\n{INFO_SHARING_SYSTEM}"),
    };

    let is_topmost = obs.stage_index + 1 == scenario.num_stages;
    let mut values = BTreeMap::new();
    values.insert("round".to_string(), (obs.period + 1).to_string());
    values.insert("horizon".to_string(), scenario.horizon.to_string());
    values.insert("stage_number".to_string(), (obs.stage_index + 1).to_string());
    values.insert(
        "stage_name".to_string(),
        stage_name(obs.stage_index, scenario.num_stages),
    );
    values.insert("num_stages".to_string(), scenario.num_stages.to_string());
    values.insert("state_block".to_string(), beer_state_block(obs));
    values.insert("guidelines".to_string(), beer_guidelines(is_topmost));

    let process_message = render_template(BEER_PROCESS, &values)?;
    Ok(PromptBundle { system_message, process_message, placeholders_resolved: values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::MarketState;
    use crate::scenario::tests_support::beer_421;

    fn cournot_triopoly() -> MarketScenario {
        MarketScenario {
            model: MarketModel::Cournot { a: 100.0, b: 1.0, costs: vec![15.0, 20.0, 25.0] },
            rounds: 10,
            seed: 1,
        }
    }

    fn bertrand_hetero() -> MarketScenario {
        MarketScenario {
            model: MarketModel::BertrandHomogeneous {
                a: 100.0,
                b: 1.0,
                costs: vec![20.0, 40.0],
                tick: 1.0,
            },
            rounds: 10,
            seed: 1,
        }
    }

    #[test]
    fn cournot_process_contains_transcript_cost_line() {
        let scenario = cournot_triopoly();
        let bundle = render_market_prompts(
            &scenario,
            0,
            "Low_cost_firm",
            1,
            &MarketHistoryView::default(),
            None,
        )
        .unwrap();
        assert!(bundle.process_message.contains("Your marginal cost: 15.0 units/price"));
        assert!(bundle
            .process_message
            .contains("P = 100.0 - 1.0 Q (where Q is the total quantity of all firms)"));
        assert!(bundle.system_message.contains("You are Low_cost_firm (Firm 1)."));
    }

    #[test]
    fn bertrand_system_names_demand_function() {
        let scenario = bertrand_hetero();
        let eq = crate::market::equilibrium(&scenario).unwrap();
        let bundle = render_market_prompts(
            &scenario,
            0,
            "Firm_1",
            1,
            &MarketHistoryView::default(),
            Some(&eq),
        )
        .unwrap();
        assert!(bundle
            .system_message
            .contains("Your demand function: q = a - bP + sum dP', where P' are other firms' prices"));
        assert!(bundle.process_message.contains("Nash equilibrium price for you: 40.00"));
        assert!(bundle.process_message.contains("Nash equilibrium quantity for you: 60.00"));
    }

    #[test]
    fn empty_firm_name_is_a_render_error() {
        let scenario = cournot_triopoly();
        let err = render_market_prompts(
            &scenario,
            0,
            "",
            1,
            &MarketHistoryView::default(),
            None,
        )
        .unwrap_err();
        assert_eq!(err, PromptError::MissingValue { name: "firm_name".to_string() });
    }

    #[test]
    fn history_lines_show_own_and_aggregate_results_only() {
        let scenario = cournot_triopoly();
        let mut state = MarketState::new(scenario.clone());
        state.apply_round(&[28, 20, 16]).unwrap();
        let view = MarketHistoryView::for_firm(&state, 0);
        assert_eq!(
            view.rounds,
            vec!["  Round 1: your quantity = 28, total quantity = 64, market price = 36.00, your profit = 588.00"]
        );
        let bundle =
            render_market_prompts(&scenario, 0, "Low_cost_firm", 2, &view, None).unwrap();
        assert!(bundle.process_message.contains("It's round 2"));
        assert!(bundle.process_message.contains("market price = 36.00"));
        // competitor's individual quantity never leaks
        assert!(!bundle.process_message.contains("= 20,"));
    }

    #[test]
    fn risk_preambles_are_verbatim() {
        let scenario = beer_421();
        let obs = sample_retailer_obs();
        let averse =
            render_beer_prompts(&scenario, &obs, RiskPreference::Averse, InfoMode::Isolated)
                .unwrap();
        assert!(averse.system_message.contains("prioritize avoiding stockouts at all costs"));
        let appetite =
            render_beer_prompts(&scenario, &obs, RiskPreference::Appetite, InfoMode::Isolated)
                .unwrap();
        assert!(appetite.system_message.contains("first goal is to obtain the highest reward"));
        let neutral =
            render_beer_prompts(&scenario, &obs, RiskPreference::Neutral, InfoMode::Isolated)
                .unwrap();
        assert!(neutral.system_message.contains("balance inventory holding costs"));
    }

    #[test]
    fn sharing_mode_appends_system_prompt_and_state_lines() {
        let scenario = beer_421();
        let mut obs = sample_wholesaler_obs();
        obs.upstream_info = Some(crate::beer::UpstreamInfo {
            lead_time: 2,
            on_hand: 4,
            backlog: 0,
        });
        let bundle =
            render_beer_prompts(&scenario, &obs, RiskPreference::Neutral, InfoMode::Sharing)
                .unwrap();
        assert!(bundle.system_message.contains("information sharing system"));
        assert!(bundle.process_message.contains("Upstream Inventory Level (shared): 4 unit(s)"));
        assert!(bundle
            .process_message
            .contains("Review the information about upstream stages"));
    }

    #[test]
    fn manufacturer_guidelines_have_five_items() {
        let scenario = beer_421();
        let obs = sample_manufacturer_obs();
        let bundle =
            render_beer_prompts(&scenario, &obs, RiskPreference::Averse, InfoMode::Isolated)
                .unwrap();
        assert!(bundle.process_message.contains("5. Open orders should always equal"));
        assert!(!bundle.process_message.contains("6."));
        assert!(!bundle.process_message.contains("Review the information about upstream stages"));
    }

    pub(crate) fn sample_retailer_obs() -> Observation {
        Observation {
            stage_index: 0,
            period: 6,
            lead_time: 2,
            on_hand: 8,
            backlog_to_downstream: 0,
            upstream_backlog_owed_to_me: Some(36),
            recent_sales: vec![4, 6, 2],
            arriving_deliveries: vec![12, 0],
            received_order_now: None,
            received_order_history: vec![],
            demand_history: Some(vec![6, 3, 7, 4, 6, 2]),
            demand_range_hint: Some((0, 8)),
            reward_history: vec![0.0; 6],
            upstream_info: None,
        }
    }

    pub(crate) fn sample_wholesaler_obs() -> Observation {
        Observation {
            stage_index: 1,
            period: 6,
            lead_time: 2,
            on_hand: 0,
            backlog_to_downstream: 36,
            upstream_backlog_owed_to_me: Some(160),
            recent_sales: vec![0, 12, 0],
            arriving_deliveries: vec![0, 0],
            received_order_now: Some(12),
            received_order_history: vec![12, 12, 12, 12, 12, 12],
            demand_history: None,
            demand_range_hint: None,
            reward_history: vec![0.0, -12.0, -12.0, -24.0, -24.0, -36.0],
            upstream_info: None,
        }
    }

    pub(crate) fn sample_manufacturer_obs() -> Observation {
        Observation {
            stage_index: 3,
            period: 6,
            lead_time: 3,
            on_hand: 240,
            backlog_to_downstream: 228,
            upstream_backlog_owed_to_me: Some(0),
            recent_sales: vec![8, 20, 20],
            arriving_deliveries: vec![0, 0, 180],
            received_order_now: Some(112),
            received_order_history: vec![12, 108, 72, 0, 32, 64],
            demand_history: None,
            demand_range_hint: None,
            reward_history: vec![0.0, -108.0, -180.0, -172.0, -184.0, -228.0],
            upstream_info: None,
        }
    }
}
