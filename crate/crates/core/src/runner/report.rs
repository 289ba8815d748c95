//! Metric tables and plot-ready CSV exports computed from persisted runs.

use std::path::{Path, PathBuf};

use crate::beer::stage_name;
use crate::market::equilibrium;
use crate::metrics::{amplification, amplification_with_demand_variance, BullwhipReport};
use crate::scenario::InfoMode;

use super::{load_episodes, load_run_scenario, EpisodeBody, GameConfig, RunError, Scenario};

#[derive(Clone, Debug, Default)]
pub struct MetricsOptions {
    /// Periods dropped from the front of every series before variances.
    pub warmup: usize,
    /// Use this demand variance instead of the realized series' variance.
    pub theoretical_demand_variance: Option<f64>,
}

fn risk_label(scenario: &Scenario) -> String {
    let mut risks: Vec<String> = scenario
        .agents
        .iter()
        .filter_map(|a| a.risk())
        .map(|r| format!("{r:?}").to_lowercase())
        .collect();
    risks.sort();
    risks.dedup();
    match risks.len() {
        0 => "none".to_string(),
        1 => risks.pop().unwrap(),
        _ => "mixed".to_string(),
    }
}

fn info_mode_label(mode: InfoMode) -> &'static str {
    match mode {
        InfoMode::Isolated => "isolated",
        InfoMode::Sharing => "sharing",
    }
}

struct BullwhipRow {
    run: String,
    episode: u32,
    risk: String,
    info_mode: String,
    stage_index: usize,
    stage_name: String,
    order_variance: f64,
    demand_variance: f64,
    amplification: f64,
    fallbacks: u32,
}

fn beer_series(periods: &[super::BeerPeriodRecord], num_stages: usize) -> (Vec<Vec<u32>>, Vec<u32>) {
    let mut orders = vec![Vec::with_capacity(periods.len()); num_stages];
    let mut demand = Vec::with_capacity(periods.len());
    for p in periods {
        demand.push(p.demand);
        for (i, o) in p.orders.iter().enumerate() {
            orders[i].push(*o);
        }
    }
    (orders, demand)
}

fn episode_bullwhip(
    report_opts: &MetricsOptions,
    orders: &[Vec<u32>],
    demand: &[u32],
) -> Result<BullwhipReport, crate::metrics::MetricsError> {
    match report_opts.theoretical_demand_variance {
        Some(v) => amplification_with_demand_variance(orders, v, report_opts.warmup),
        None => amplification(orders, demand, report_opts.warmup),
    }
}

/// Write `metrics.csv`: one row per (run, episode, stage) of every beer run,
/// with variance, amplification, and the information gain column filled on
/// sharing-mode rows that have an isolated-mode counterpart (same risk,
/// stage, and episode index) among the given runs.
pub fn write_metrics_csv(
    run_dirs: &[PathBuf],
    out_path: &Path,
    options: &MetricsOptions,
) -> Result<(), RunError> {
    let mut rows: Vec<BullwhipRow> = Vec::new();
    for run_dir in run_dirs {
        let scenario = load_run_scenario(run_dir)?;
        let GameConfig::Beer(beer) = &scenario.game else { continue };
        let risk = risk_label(&scenario);
        let mode = info_mode_label(beer.info_mode);
        for record in load_episodes(run_dir)? {
            let EpisodeBody::Beer(periods) = &record.body else { continue };
            if periods.is_empty() {
                continue;
            }
            let (orders, demand) = beer_series(periods, beer.num_stages);
            let report = match episode_bullwhip(options, &orders, &demand) {
                Ok(r) => r,
                // constant-demand scenarios have no defined ratio
                Err(_) => continue,
            };
            for stage in 0..beer.num_stages {
                rows.push(BullwhipRow {
                    run: scenario.name.clone(),
                    episode: record.episode,
                    risk: risk.clone(),
                    info_mode: mode.to_string(),
                    stage_index: stage,
                    stage_name: stage_name(stage, beer.num_stages),
                    order_variance: report.order_variance[stage],
                    demand_variance: report.demand_variance,
                    amplification: report.amplification[stage],
                    fallbacks: record.fallback_decisions,
                });
            }
        }
    }

    let mut w = csv::Writer::from_path(out_path)?;
    w.write_record([
        "run",
        "episode",
        "risk",
        "info_mode",
        "stage_index",
        "stage",
        "order_variance",
        "demand_variance",
        "amplification",
        "information_gain_pct",
        "fallback_decisions",
    ])?;
    for row in &rows {
        let gain = if row.info_mode == "sharing" {
            rows.iter()
                .find(|o| {
                    o.info_mode == "isolated"
                        && o.risk == row.risk
                        && o.stage_index == row.stage_index
                        && o.episode == row.episode
                })
                .and_then(|baseline| {
                    crate::metrics::information_gain(baseline.amplification, row.amplification)
                        .ok()
                })
        } else {
            None
        };
        w.write_record([
            row.run.clone(),
            row.episode.to_string(),
            row.risk.clone(),
            row.info_mode.clone(),
            row.stage_index.to_string(),
            row.stage_name.clone(),
            format!("{}", row.order_variance),
            format!("{}", row.demand_variance),
            format!("{}", row.amplification),
            gain.map(|g| format!("{g}")).unwrap_or_default(),
            row.fallbacks.to_string(),
        ])?;
    }
    w.flush().map_err(std::io::Error::from)?;
    Ok(())
}

/// Write `convergence.csv` for a market run: one row per (episode, round,
/// firm) with the distance to the oracle equilibrium.
pub fn write_convergence_csv(run_dir: &Path, out_path: &Path) -> Result<(), RunError> {
    let scenario = load_run_scenario(run_dir)?;
    let GameConfig::Market(market) = &scenario.game else {
        return Err(RunError::BadRunDirectory(
            "convergence report applies to market runs".to_string(),
        ));
    };
    let oracle = equilibrium(market)?;
    let mut w = csv::Writer::from_path(out_path)?;
    w.write_record([
        "run",
        "episode",
        "round",
        "firm",
        "action",
        "eq_action",
        "abs_deviation",
        "price",
        "price_star",
        "abs_price_deviation",
    ])?;
    for record in load_episodes(run_dir)? {
        let EpisodeBody::Market(rounds) = &record.body else { continue };
        for round in rounds {
            for (firm, action) in round.actions.iter().enumerate() {
                let eq_action = oracle.actions[firm];
                let dev = (f64::from(*action) - eq_action).abs();
                let (price, p_star, p_dev) = match (round.price, oracle.market_price) {
                    (Some(p), Some(ps)) => {
                        (format!("{p}"), format!("{ps}"), format!("{}", (p - ps).abs()))
                    }
                    _ => (String::new(), String::new(), String::new()),
                };
                w.write_record([
                    scenario.name.clone(),
                    record.episode.to_string(),
                    round.round.to_string(),
                    (firm + 1).to_string(),
                    action.to_string(),
                    format!("{eq_action}"),
                    format!("{dev}"),
                    price,
                    p_star,
                    p_dev,
                ])?;
            }
        }
    }
    w.flush().map_err(std::io::Error::from)?;
    Ok(())
}

/// Emit plot-ready CSVs into `<run_dir>/plots/`:
///
/// - market runs: per-episode action trajectories with equilibrium
///   reference columns, plus price (Cournot) or sales (Bertrand) files;
/// - beer runs: per-episode per-period orders by stage with demand, plus
///   one amplification file across episodes.
pub fn emit_plot_data(run_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let scenario = load_run_scenario(run_dir)?;
    let episodes = load_episodes(run_dir)?;
    if episodes.is_empty() {
        return Err(RunError::BadRunDirectory("run has no episodes".to_string()));
    }
    let plots = run_dir.join("plots");
    std::fs::create_dir_all(&plots)?;
    let mut written = Vec::new();

    match &scenario.game {
        GameConfig::Market(market) => {
            let oracle = equilibrium(market)?;
            let n = market.num_firms();
            let is_cournot =
                matches!(market.model, crate::scenario::MarketModel::Cournot { .. });
            let action_col = if is_cournot { "q" } else { "p" };
            let symmetric = oracle
                .actions
                .iter()
                .all(|a| (a - oracle.actions[0]).abs() < 1e-9);
            for record in &episodes {
                let EpisodeBody::Market(rounds) = &record.body else { continue };
                let path = plots.join(format!("ep_{:04}_actions.csv", record.episode));
                let mut w = csv::Writer::from_path(&path)?;
                let mut header: Vec<String> = vec!["round".to_string()];
                header.extend((1..=n).map(|i| format!("{action_col}_firm{i}")));
                if symmetric {
                    header.push(format!("{action_col}_star"));
                } else {
                    header.extend((1..=n).map(|i| format!("{action_col}_star_{i}")));
                }
                w.write_record(&header)?;
                for round in rounds {
                    let mut rec: Vec<String> = vec![round.round.to_string()];
                    rec.extend(round.actions.iter().map(|a| a.to_string()));
                    if symmetric {
                        rec.push(format!("{}", oracle.actions[0]));
                    } else {
                        rec.extend(oracle.actions.iter().map(|a| format!("{a}")));
                    }
                    w.write_record(&rec)?;
                }
                w.flush().map_err(std::io::Error::from)?;
                written.push(path);

                if is_cournot {
                    let path = plots.join(format!("ep_{:04}_price.csv", record.episode));
                    let mut w = csv::Writer::from_path(&path)?;
                    w.write_record(["round", "price", "p_star"])?;
                    let p_star = oracle.market_price.unwrap_or(f64::NAN);
                    for round in rounds {
                        w.write_record([
                            round.round.to_string(),
                            format!("{}", round.price.unwrap_or(f64::NAN)),
                            format!("{p_star}"),
                        ])?;
                    }
                    w.flush().map_err(std::io::Error::from)?;
                    written.push(path);
                } else {
                    let path = plots.join(format!("ep_{:04}_sales.csv", record.episode));
                    let mut w = csv::Writer::from_path(&path)?;
                    let mut header: Vec<String> = vec!["round".to_string()];
                    header.extend((1..=n).map(|i| format!("sales_firm{i}")));
                    w.write_record(&header)?;
                    for round in rounds {
                        let mut rec: Vec<String> = vec![round.round.to_string()];
                        if let Some(sales) = &round.sales {
                            rec.extend(sales.iter().map(|s| format!("{s}")));
                        }
                        w.write_record(&rec)?;
                    }
                    w.flush().map_err(std::io::Error::from)?;
                    written.push(path);
                }
            }
        }
        GameConfig::Beer(beer) => {
            for record in &episodes {
                let EpisodeBody::Beer(periods) = &record.body else { continue };
                let path = plots.join(format!("ep_{:04}_orders.csv", record.episode));
                let mut w = csv::Writer::from_path(&path)?;
                let mut header: Vec<String> = vec!["period".to_string()];
                header.extend((0..beer.num_stages).map(|i| stage_name(i, beer.num_stages)));
                header.push("demand".to_string());
                w.write_record(&header)?;
                for p in periods {
                    let mut rec: Vec<String> = vec![p.period.to_string()];
                    rec.extend(p.orders.iter().map(|o| o.to_string()));
                    rec.push(p.demand.to_string());
                    w.write_record(&rec)?;
                }
                w.flush().map_err(std::io::Error::from)?;
                written.push(path);
            }

            let amp_path = plots.join("amplification.csv");
            let mut w = csv::Writer::from_path(&amp_path)?;
            w.write_record(["episode", "risk", "info_mode", "stage_index", "stage", "amplification"])?;
            let risk = risk_label(&scenario);
            let mode = info_mode_label(beer.info_mode);
            let mut any = false;
            for record in &episodes {
                let EpisodeBody::Beer(periods) = &record.body else { continue };
                let (orders, demand) = beer_series(periods, beer.num_stages);
                if let Ok(report) = amplification(&orders, &demand, 0) {
                    any = true;
                    for stage in 0..beer.num_stages {
                        w.write_record([
                            record.episode.to_string(),
                            risk.clone(),
                            mode.to_string(),
                            stage.to_string(),
                            stage_name(stage, beer.num_stages),
                            format!("{}", report.amplification[stage]),
                        ])?;
                    }
                }
            }
            w.flush().map_err(std::io::Error::from)?;
            if any {
                written.push(amp_path);
            }
        }
    }
    Ok(written)
}

/// Re-run every episode of a run directory against its recorded actions;
/// collects all divergences keyed by episode.
pub fn verify_run(run_dir: &Path) -> Result<Vec<(u32, Vec<super::Divergence>)>, RunError> {
    let scenario = load_run_scenario(run_dir)?;
    let mut out = Vec::new();
    for record in load_episodes(run_dir)? {
        let divergences = super::verify_episode(&scenario, &record)?;
        out.push((record.episode, divergences));
    }
    Ok(out)
}

#[allow(unused_imports)]
pub(crate) use super::Divergence;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn risk_label_reflects_roster() {
        use crate::agents::{AgentKind, AgentSpec};
        use crate::scenario::tests_support::beer_421;
        use crate::scenario::RiskPreference;
        let mk = |risk: Option<RiskPreference>| AgentSpec {
            id: "a".to_string(),
            kind: AgentKind::Llm {
                model_id: "m".to_string(),
                temperature: 0.0,
                risk,
                max_retries: 0,
            },
            action_bounds: None,
        };
        let mut scenario = Scenario {
            name: "t".to_string(),
            game: GameConfig::Beer(beer_421()),
            agents: vec![mk(Some(RiskPreference::Averse))],
            observation: Default::default(),
        };
        assert_eq!(risk_label(&scenario), "averse");
        scenario.agents.push(mk(Some(RiskPreference::Neutral)));
        assert_eq!(risk_label(&scenario), "mixed");
        scenario.agents.clear();
        assert_eq!(risk_label(&scenario), "none");
    }
}
