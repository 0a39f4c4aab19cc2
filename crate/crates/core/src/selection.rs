//! Budgeted choice of which pool samples to annotate, driven by the pool ×
//! test distance table.
//!
//! Every strategy is deterministic. Ties fall back to the lower total
//! distance to the test set where that is meaningful, then to the lower pool
//! row index.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Schema;
use crate::oracle::AnnotationOracle;
use crate::retriever::PairwiseDistanceSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    TopK,
    Balance,
    Coverage,
    Random,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::TopK => "topk",
            Strategy::Balance => "balance",
            Strategy::Coverage => "coverage",
            Strategy::Random => "random",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "topk" => Ok(Strategy::TopK),
            "balance" => Ok(Strategy::Balance),
            "coverage" => Ok(Strategy::Coverage),
            "random" => Ok(Strategy::Random),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

/// One round of the coverage strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStep {
    pub sample_id: String,
    pub covered_test_ids: Vec<String>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub strategy: Strategy,
    pub budget: usize,
    pub chosen: Vec<String>,
    /// Samples inspected during selection; at least `chosen.len()`.
    pub checked_count: usize,
    pub checked_ids: Vec<String>,
    /// Set when the budget exceeded the pool and everything was returned.
    pub budget_exceeds_pool: bool,
    /// Times the primary criterion tied and a fallback decided the order.
    pub tie_breaks: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance: Option<BalanceAudit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<Vec<CoverageStep>>,
}

impl SelectionResult {
    fn new(strategy: Strategy, budget: usize, chosen: Vec<String>) -> Self {
        SelectionResult {
            strategy,
            budget,
            checked_count: chosen.len(),
            checked_ids: chosen.clone(),
            chosen,
            budget_exceeds_pool: false,
            tie_breaks: 0,
            u: None,
            seed: None,
            balance: None,
            coverage: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceAudit {
    /// `⌊B / R⌋`.
    pub quota: usize,
    /// Per-relation counts over samples accepted by the quota walk.
    pub tallies: BTreeMap<String, usize>,
    /// Relations still under quota when the walk ended, with the missing count.
    pub shortfall: BTreeMap<String, usize>,
    /// Samples added from the global order after the walk.
    pub refilled: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedCandidate {
    pub index: usize,
    pub frequency: usize,
    pub total_distance: f64,
}

fn check_budget(budget: usize) -> Result<()> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    Ok(())
}

/// Pool rows ranked by how often they are among the `u` nearest rows of a
/// test column (descending), then by total distance to the test set, then by
/// row index. Returns the ranking and the number of tie-break decisions.
pub fn topk_ranking(p: &PairwiseDistanceSet, u: usize) -> Result<(Vec<RankedCandidate>, usize)> {
    if u == 0 {
        return Err(Error::InvalidArgument("u must be at least 1".into()));
    }
    let mut frequency = vec![0usize; p.n];
    let mut rows: Vec<usize> = (0..p.n).collect();
    for j in 0..p.m {
        rows.sort_by(|&a, &b| p.get(a, j).total_cmp(&p.get(b, j)).then(a.cmp(&b)));
        rows.iter().take(u).for_each(|&i| frequency[i] += 1);
    }
    let mut ranked: Vec<RankedCandidate> = (0..p.n)
        .map(|i| RankedCandidate {
            index: i,
            frequency: frequency[i],
            total_distance: p.row(i).iter().sum(),
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.frequency
            .cmp(&a.frequency)
            .then(a.total_distance.total_cmp(&b.total_distance))
            .then(a.index.cmp(&b.index))
    });
    let ties = ranked.windows(2).filter(|w| w[0].frequency == w[1].frequency).count();
    Ok((ranked, ties))
}

pub fn select_top_k(p: &PairwiseDistanceSet, u: usize, budget: usize) -> Result<SelectionResult> {
    check_budget(budget)?;
    let (ranked, _) = topk_ranking(p, u)?;
    let take = budget.min(p.n);
    let chosen: Vec<String> = ranked[..take].iter().map(|c| p.pool_ids[c.index].clone()).collect();
    let ties = ranked[..(take + 1).min(p.n)]
        .windows(2)
        .filter(|w| w[0].frequency == w[1].frequency)
        .count();
    let mut result = SelectionResult::new(Strategy::TopK, budget, chosen);
    result.budget_exceeds_pool = budget > p.n;
    result.tie_breaks = ties;
    result.u = Some(u);
    Ok(result)
}

/// Walks the top-k ranking, checking each candidate's relations with the
/// oracle and accepting it while any of its relations is below `⌊B/R⌋`.
/// Leftover slots are refilled from the ranking. Accepted and refilled
/// samples are annotated through the oracle.
pub fn select_balance(
    p: &PairwiseDistanceSet,
    schema: &Schema,
    u: usize,
    budget: usize,
    oracle: &mut AnnotationOracle,
) -> Result<SelectionResult> {
    check_budget(budget)?;
    let relations = &schema.relation_types;
    let quota = budget / relations.len();
    let (ranked, ties) = topk_ranking(p, u)?;
    let mut tallies: BTreeMap<String, usize> = relations.iter().map(|r| (r.clone(), 0)).collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut checked: Vec<String> = Vec::new();

    let unmet = |t: &BTreeMap<String, usize>| t.values().any(|&c| c < quota);
    for cand in &ranked {
        if chosen.len() >= budget || !unmet(&tallies) {
            break;
        }
        let id = &p.pool_ids[cand.index];
        let labels = oracle.check(id)?;
        checked.push(id.clone());
        let helps = labels.iter().any(|l| tallies.get(l).is_some_and(|&c| c < quota));
        if helps {
            for l in &labels {
                if let Some(c) = tallies.get_mut(l) {
                    *c += 1;
                }
            }
            chosen.push(cand.index);
        }
    }
    let shortfall: BTreeMap<String, usize> = tallies
        .iter()
        .filter(|(_, &c)| c < quota)
        .map(|(r, &c)| (r.clone(), quota - c))
        .collect();

    let mut refilled = Vec::new();
    for cand in &ranked {
        if chosen.len() >= budget {
            break;
        }
        if !chosen.contains(&cand.index) {
            chosen.push(cand.index);
            refilled.push(p.pool_ids[cand.index].clone());
        }
    }
    let chosen: Vec<String> = chosen.iter().map(|&i| p.pool_ids[i].clone()).collect();
    for id in &chosen {
        oracle.annotate(id)?;
        if !checked.contains(id) {
            checked.push(id.clone());
        }
    }
    let mut result = SelectionResult::new(Strategy::Balance, budget, chosen);
    result.checked_count = checked.len();
    result.checked_ids = checked;
    result.budget_exceeds_pool = budget > p.n;
    result.tie_breaks = ties;
    result.u = Some(u);
    result.balance = Some(BalanceAudit {
        quota,
        tallies,
        shortfall,
        refilled,
    });
    Ok(result)
}

/// Greedy coverage: each round, every remaining pool row is scored by the sum
/// of its `⌈M/B⌉` smallest distances to still-uncovered test samples; the
/// cheapest row is chosen and those test samples are marked covered. Stops
/// after `B` rounds or once every test sample is covered.
pub fn select_coverage(p: &PairwiseDistanceSet, budget: usize) -> Result<SelectionResult> {
    check_budget(budget)?;
    let k = p.m.div_ceil(budget);
    let mut row_live = vec![true; p.n];
    let mut col_live = vec![true; p.m];
    let mut steps: Vec<CoverageStep> = Vec::new();
    let mut chosen = Vec::new();
    let mut ties = 0;

    for _ in 0..budget {
        if !col_live.iter().any(|&c| c) || !row_live.iter().any(|&r| r) {
            break;
        }
        let mut best: Option<(f64, usize, Vec<usize>)> = None;
        for i in (0..p.n).filter(|&i| row_live[i]) {
            let mut cols: Vec<usize> = (0..p.m).filter(|&j| col_live[j]).collect();
            cols.sort_by(|&a, &b| p.get(i, a).total_cmp(&p.get(i, b)).then(a.cmp(&b)));
            cols.truncate(k);
            let cost: f64 = cols.iter().map(|&j| p.get(i, j)).sum();
            match &best {
                Some((c, _, _)) if cost.total_cmp(c) != Ordering::Less => {
                    if cost == *c {
                        ties += 1;
                    }
                }
                _ => best = Some((cost, i, cols)),
            }
        }
        let (cost, i, cols) = best.expect("at least one live row");
        row_live[i] = false;
        cols.iter().for_each(|&j| col_live[j] = false);
        chosen.push(p.pool_ids[i].clone());
        steps.push(CoverageStep {
            sample_id: p.pool_ids[i].clone(),
            covered_test_ids: cols.iter().map(|&j| p.test_ids[j].clone()).collect(),
            cost,
        });
    }
    let mut result = SelectionResult::new(Strategy::Coverage, budget, chosen);
    result.budget_exceeds_pool = budget > p.n;
    result.tie_breaks = ties;
    result.coverage = Some(steps);
    Ok(result)
}

/// Seeded uniform sample without replacement.
pub fn select_random(pool_ids: &[String], budget: usize, seed: u64) -> Result<SelectionResult> {
    check_budget(budget)?;
    if budget > pool_ids.len() {
        return Err(Error::BudgetExceedsPool {
            budget,
            pool: pool_ids.len(),
        });
    }
    let mut ids = pool_ids.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    ids.truncate(budget);
    let mut result = SelectionResult::new(Strategy::Random, budget, ids);
    result.seed = Some(seed);
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub id: String,
    /// Negated mean distance to the test set.
    pub similarity: f64,
}

/// Orders chosen samples by ascending similarity to the test set: the least
/// similar first, the most similar last (adjacent to the query).
pub fn order_demonstrations(chosen: &[String], p: &PairwiseDistanceSet) -> Result<Vec<ScoredSample>> {
    let mut scored = chosen
        .iter()
        .map(|id| {
            let i = p.pool_index(id).ok_or_else(|| Error::UnknownSample(id.clone()))?;
            let mean = if p.m == 0 {
                0.0
            } else {
                p.row(i).iter().sum::<f64>() / p.m as f64
            };
            Ok(ScoredSample {
                id: id.clone(),
                similarity: -mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.similarity.total_cmp(&b.similarity).then_with(|| a.id.cmp(&b.id)));
    Ok(scored)
}
