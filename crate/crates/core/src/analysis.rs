//! Scenario enumeration, relation attribution and base-score sweeps.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ArgumentId, Framework, Polarity, Relation};
use crate::semantics::{CompiledGraph, EvalConfig, Mask, SemanticsKind};

/// Exhaustive enumeration refuses more toggles than this.
pub const MAX_TOGGLES: usize = 24;
/// Exact Shapley attribution refuses more relations than this.
pub const MAX_EXACT_RELATIONS: usize = 20;

const CHUNK: usize = 4096;
const SAMPLE_CHUNK: usize = 256;

/// Removes arguments before enumerating; optionally also drops every argument
/// left without a path to an option.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalFilter {
    pub remove: Vec<ArgumentId>,
    #[serde(default)]
    pub prune_unreachable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub framework: Framework,
    /// Free on/off variables; every other non-option argument keeps its flag.
    pub toggles: Vec<ArgumentId>,
    /// The two options compared in tables and gaps, as (r, ¬r).
    pub pair: (ArgumentId, ArgumentId),
    pub risk: Option<ArgumentId>,
    pub without_risk: RemovalFilter,
}

impl Scenario {
    pub fn new(name: impl Into<String>, framework: Framework, toggles: Vec<ArgumentId>) -> Result<Self> {
        let options = framework.options();
        if options.len() < 2 {
            return Err(Error::BadRequest("a scenario needs at least two options".into()));
        }
        let scenario = Scenario {
            name: name.into(),
            pair: (options[0].clone(), options[1].clone()),
            framework,
            toggles,
            risk: None,
            without_risk: RemovalFilter::default(),
        };
        scenario.check()?;
        Ok(scenario)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for t in &self.toggles {
            let arg = self
                .framework
                .argument(t)
                .ok_or_else(|| Error::UnknownArgument(t.to_string()))?;
            if arg.is_option() {
                return Err(Error::BadRequest(format!("option {t} cannot be a toggle")));
            }
            if !seen.insert(t) {
                return Err(Error::BadRequest(format!("toggle {t} listed twice")));
            }
        }
        for o in [&self.pair.0, &self.pair.1] {
            if !self.framework.is_option(o) {
                return Err(Error::NotAnOption(o.to_string()));
            }
        }
        Ok(())
    }

    /// The scenario with `filter` applied: arguments removed (and pruned), and
    /// toggles restricted to what remains.
    pub fn without(&self, filter: &RemovalFilter) -> Result<Scenario> {
        for id in &filter.remove {
            if !self.framework.contains(id) {
                return Err(Error::UnknownArgument(id.to_string()));
            }
            if self.framework.is_option(id) {
                return Err(Error::OptionEditForbidden(id.to_string()));
            }
        }
        let mut keep: BTreeSet<ArgumentId> = self
            .framework
            .arguments()
            .map(|a| a.id.clone())
            .filter(|id| !filter.remove.contains(id))
            .collect();
        let mut framework = self.framework.restricted_to(&keep);
        if filter.prune_unreachable {
            let reaching = framework.reaching_options();
            keep.retain(|id| framework.is_option(id) || reaching.contains(id));
            framework = framework.restricted_to(&keep);
        }
        Ok(Scenario {
            name: self.name.clone(),
            toggles: self.toggles.iter().filter(|t| keep.contains(*t)).cloned().collect(),
            pair: self.pair.clone(),
            risk: self.risk.clone().filter(|r| keep.contains(r)),
            without_risk: RemovalFilter::default(),
            framework,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnumerationFilter {
    All,
    /// Only combinations where the argument is effectively active.
    Active {
        id: ArgumentId,
    },
    /// Only combinations where the argument is effectively inactive.
    Inactive {
        id: ArgumentId,
    },
    /// Enumerate the scenario with arguments removed.
    Without(RemovalFilter),
}

impl EnumerationFilter {
    pub fn label(&self) -> String {
        match self {
            EnumerationFilter::All => "all".into(),
            EnumerationFilter::Active { id } => format!("{id}_active"),
            EnumerationFilter::Inactive { id } => format!("{id}_inactive"),
            EnumerationFilter::Without(f) => {
                let ids: Vec<&str> = f.remove.iter().map(|i| i.as_str()).collect();
                let mut s = format!("without_{}", ids.join("_"));
                if !f.prune_unreachable {
                    s.push_str("_keep_inert");
                }
                s
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub scenario: String,
    pub filter: String,
    pub n: u64,
    pub counts: BTreeMap<ArgumentId, u64>,
    pub ties: u64,
    pub pct_per_option: BTreeMap<ArgumentId, f64>,
    pub pct_tie: f64,
    /// Mean and population standard deviation of σ(r) − σ(¬r) over the combinations.
    pub mean_gap: f64,
    pub std_gap: f64,
}

impl DistributionTable {
    pub fn pct(&self, option: &str) -> f64 {
        ArgumentId::new(option)
            .ok()
            .and_then(|id| self.pct_per_option.get(&id).copied())
            .unwrap_or(0.0)
    }
}

/// Precomputed activity structure over a compiled graph.
struct Activation {
    base: Vec<bool>,
    options: Vec<bool>,
    toggles: Vec<usize>,
    derived: Vec<(usize, Vec<usize>)>,
}

impl Activation {
    fn new(scenario: &Scenario, graph: &CompiledGraph) -> Self {
        let fw = &scenario.framework;
        let idx = |id: &ArgumentId| graph.index_of(id).expect("argument compiled");
        let mut base = vec![false; graph.ids().len()];
        let mut options = vec![false; graph.ids().len()];
        let mut derived = Vec::new();
        for arg in fw.arguments() {
            let i = idx(&arg.id);
            options[i] = arg.is_option();
            base[i] = arg.is_option() || (arg.derived_active_from.is_empty() && arg.active);
            if !arg.is_option() && !arg.derived_active_from.is_empty() {
                derived.push((i, arg.derived_active_from.iter().map(idx).collect()));
            }
        }
        Activation {
            base,
            options,
            toggles: scenario.toggles.iter().map(idx).collect(),
            derived,
        }
    }

    fn fill(&self, combo: u64, out: &mut [bool]) {
        out.copy_from_slice(&self.base);
        // toggles on derived arguments are dummies: the rule decides
        for (bit, &t) in self.toggles.iter().enumerate() {
            if !self.options[t] && !self.derived.iter().any(|(d, _)| *d == t) {
                out[t] = combo >> bit & 1 == 1;
            }
        }
        loop {
            let mut changed = false;
            for (d, from) in &self.derived {
                if !out[*d] && from.iter().any(|&f| out[f]) {
                    out[*d] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    n: u64,
    wins: Vec<u64>,
    ties: u64,
    gaps: Vec<f64>,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.n += other.n;
        if self.wins.len() < other.wins.len() {
            self.wins.resize(other.wins.len(), 0);
        }
        for (a, b) in self.wins.iter_mut().zip(other.wins) {
            *a += b;
        }
        self.ties += other.ties;
        self.gaps.extend(other.gaps);
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn pct(count: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        100.0 * count as f64 / n as f64
    }
}

fn tally(
    scenario: &Scenario,
    graph: &CompiledGraph,
    condition: Option<(usize, bool)>,
    kind: SemanticsKind,
    config: &EvalConfig,
    tie_epsilon: f64,
) -> Result<Tally> {
    if scenario.toggles.len() > MAX_TOGGLES {
        return Err(Error::TooManyToggles(scenario.toggles.len(), MAX_TOGGLES));
    }
    let activation = Activation::new(scenario, graph);
    let options: Vec<usize> = scenario
        .framework
        .options()
        .iter()
        .map(|o| graph.index_of(o).expect("compiled"))
        .collect();
    let r = graph.index_of(&scenario.pair.0).expect("compiled");
    let nr = graph.index_of(&scenario.pair.1).expect("compiled");
    let total: u64 = 1 << scenario.toggles.len();
    let chunks = total.div_ceil(CHUNK as u64);
    let parts: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally {
                wins: vec![0; options.len()],
                ..Tally::default()
            };
            let mut active = vec![false; graph.ids().len()];
            let start = c * CHUNK as u64;
            for combo in start..(start + CHUNK as u64).min(total) {
                activation.fill(combo, &mut active);
                if let Some((node, want)) = condition {
                    if active[node] != want {
                        continue;
                    }
                }
                let eval = graph.evaluate(
                    kind,
                    config,
                    &Mask {
                        nodes: Some(&active),
                        edges: None,
                    },
                );
                let max = options
                    .iter()
                    .map(|&o| eval.values[o])
                    .fold(f64::NEG_INFINITY, f64::max);
                let winners: Vec<usize> = (0..options.len())
                    .filter(|&k| max - eval.values[options[k]] <= tie_epsilon)
                    .collect();
                t.n += 1;
                if winners.len() == 1 {
                    t.wins[winners[0]] += 1;
                } else {
                    t.ties += 1;
                }
                t.gaps.push(eval.values[r] - eval.values[nr]);
            }
            t
        })
        .collect();
    let mut out = Tally {
        wins: vec![0; options.len()],
        ..Tally::default()
    };
    for p in parts {
        out.merge(p);
    }
    Ok(out)
}

fn table(scenario: &Scenario, filter: String, t: Tally) -> DistributionTable {
    let options = scenario.framework.options();
    let (mean_gap, std_gap) = mean_std(&t.gaps);
    DistributionTable {
        scenario: scenario.name.clone(),
        filter,
        n: t.n,
        counts: options.iter().cloned().zip(t.wins.iter().copied()).collect(),
        ties: t.ties,
        pct_per_option: options
            .iter()
            .cloned()
            .zip(t.wins.iter().map(|&w| pct(w, t.n)))
            .collect(),
        pct_tie: pct(t.ties, t.n),
        mean_gap,
        std_gap,
    }
}

/// Evaluates every on/off assignment of the scenario's toggles (derived
/// activation applied) and tallies which option is strictly strongest.
pub fn enumerate_decisions(
    scenario: &Scenario,
    filter: &EnumerationFilter,
    kind: SemanticsKind,
    config: &EvalConfig,
    tie_epsilon: f64,
) -> Result<DistributionTable> {
    config.validate()?;
    scenario.check()?;
    let reduced;
    let (scn, condition_id) = match filter {
        EnumerationFilter::All => (scenario, None),
        EnumerationFilter::Active { id } => (scenario, Some((id, true))),
        EnumerationFilter::Inactive { id } => (scenario, Some((id, false))),
        EnumerationFilter::Without(f) => {
            reduced = scenario.without(f)?;
            (&reduced, None)
        }
    };
    let graph = CompiledGraph::new(&scn.framework);
    let condition = match condition_id {
        Some((id, want)) => Some((
            graph
                .index_of(id)
                .ok_or_else(|| Error::UnknownArgument(id.to_string()))?,
            want,
        )),
        None => None,
    };
    let t = tally(scn, &graph, condition, kind, config, tie_epsilon)?;
    Ok(table(scenario, filter.label(), t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributionMethod {
    ExactShapley,
    PermutationSampling { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionEntry {
    pub relation: Relation,
    pub contributions: BTreeMap<ArgumentId, f64>,
    /// Standard error of each contribution; zero for exact attribution.
    pub stderr: BTreeMap<ArgumentId, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionTable {
    pub method: AttributionMethod,
    pub options: Vec<ArgumentId>,
    pub final_strengths: BTreeMap<ArgumentId, f64>,
    pub base_scores: BTreeMap<ArgumentId, f64>,
    pub entries: Vec<AttributionEntry>,
}

impl AttributionTable {
    pub fn entry(&self, polarity: Polarity, source: &str, target: &str) -> Option<&AttributionEntry> {
        self.entries.iter().find(|e| {
            e.relation.polarity == polarity
                && e.relation.source.as_str() == source
                && e.relation.target.as_str() == target
        })
    }

    pub fn total(&self, option: &ArgumentId) -> f64 {
        self.entries.iter().map(|e| e.contributions[option]).sum()
    }
}

struct Game<'a> {
    graph: CompiledGraph,
    active: Vec<bool>,
    players: Vec<usize>,
    options: Vec<usize>,
    kind: SemanticsKind,
    config: &'a EvalConfig,
}

impl Game<'_> {
    fn value(&self, edges: &[bool]) -> Vec<f64> {
        let eval = self.graph.evaluate(
            self.kind,
            self.config,
            &Mask {
                nodes: Some(&self.active),
                edges: Some(edges),
            },
        );
        self.options.iter().map(|&o| eval.values[o]).collect()
    }

    fn edge_mask(&self, subset: impl Iterator<Item = usize>) -> Vec<bool> {
        let mut mask = vec![false; self.graph.edges().len()];
        for p in subset {
            mask[self.players[p]] = true;
        }
        mask
    }
}

/// Shapley value of every relation among effectively active arguments, for
/// every option. A relation outside a coalition is simply absent; the
/// arguments stay.
pub fn relation_attribution(
    framework: &Framework,
    method: AttributionMethod,
    kind: SemanticsKind,
    config: &EvalConfig,
) -> Result<AttributionTable> {
    config.validate()?;
    let graph = CompiledGraph::new(framework);
    let activity = framework.effective_activity(&BTreeMap::new())?;
    let active: Vec<bool> = graph.ids().iter().map(|id| activity.contains(id)).collect();
    let players: Vec<usize> = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, r)| activity.contains(&r.source) && activity.contains(&r.target))
        .map(|(i, _)| i)
        .collect();
    let option_ids = framework.options();
    let game = Game {
        options: option_ids
            .iter()
            .map(|o| graph.index_of(o).expect("compiled"))
            .collect(),
        graph,
        active,
        players,
        kind,
        config,
    };
    let n = game.players.len();
    let k = game.options.len();
    let (means, errs) = match method {
        AttributionMethod::ExactShapley => {
            if n > MAX_EXACT_RELATIONS {
                return Err(Error::TooManyRelations(n, MAX_EXACT_RELATIONS));
            }
            (exact_shapley(&game), vec![vec![0.0; k]; n])
        }
        AttributionMethod::PermutationSampling { samples, seed } => {
            if samples < 2 {
                return Err(Error::BadRequest("sampling needs at least 2 permutations".into()));
            }
            sampled_shapley(&game, samples, seed)
        }
    };
    let full = game.value(&game.edge_mask(0..n));
    let entries = (0..n)
        .map(|p| AttributionEntry {
            relation: game.graph.edges()[game.players[p]].clone(),
            contributions: option_ids.iter().cloned().zip(means[p].iter().copied()).collect(),
            stderr: option_ids.iter().cloned().zip(errs[p].iter().copied()).collect(),
        })
        .collect();
    Ok(AttributionTable {
        method,
        final_strengths: option_ids.iter().cloned().zip(full).collect(),
        base_scores: option_ids
            .iter()
            .map(|o| (o.clone(), framework.argument(o).expect("option").base_score))
            .collect(),
        options: option_ids,
        entries,
    })
}

fn exact_shapley(game: &Game) -> Vec<Vec<f64>> {
    let n = game.players.len();
    let k = game.options.len();
    let values: Vec<Vec<f64>> = (0..1u64 << n)
        .into_par_iter()
        .map(|s| game.value(&game.edge_mask((0..n).filter(|&p| s >> p & 1 == 1))))
        .collect();
    // weight(|S|) = |S|! (n − |S| − 1)! / n!
    let mut weight = vec![0.0; n.max(1)];
    for (size, w) in weight.iter_mut().enumerate() {
        let mut x = 1.0 / n as f64;
        for i in 0..size {
            x *= (size - i) as f64 / (n - 1 - i) as f64;
        }
        *w = x;
    }
    (0..n)
        .map(|p| {
            let bit = 1u64 << p;
            let mut phi = vec![0.0; k];
            for s in (0..1u64 << n).filter(|s| s & bit == 0) {
                let w = weight[s.count_ones() as usize];
                for o in 0..k {
                    phi[o] += w * (values[(s | bit) as usize][o] - values[s as usize][o]);
                }
            }
            phi
        })
        .collect()
}

/// Per-player, per-option values.
type Matrix = Vec<Vec<f64>>;

fn sampled_shapley(game: &Game, samples: usize, seed: u64) -> (Matrix, Matrix) {
    let n = game.players.len();
    let k = game.options.len();
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<(Matrix, Matrix)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut sum = vec![vec![0.0; k]; n];
            let mut sumsq = vec![vec![0.0; k]; n];
            let mut order: Vec<usize> = (0..n).collect();
            let count = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
            for _ in 0..count {
                order.shuffle(&mut rng);
                let mut mask = vec![false; game.graph.edges().len()];
                let mut prev = game.value(&mask);
                for &p in &order {
                    mask[game.players[p]] = true;
                    let cur = game.value(&mask);
                    for o in 0..k {
                        let d = cur[o] - prev[o];
                        sum[p][o] += d;
                        sumsq[p][o] += d * d;
                    }
                    prev = cur;
                }
            }
            (sum, sumsq)
        })
        .collect();
    let mut sum = vec![vec![0.0; k]; n];
    let mut sumsq = vec![vec![0.0; k]; n];
    for (s, q) in parts {
        for p in 0..n {
            for o in 0..k {
                sum[p][o] += s[p][o];
                sumsq[p][o] += q[p][o];
            }
        }
    }
    let m = samples as f64;
    let mut means = vec![vec![0.0; k]; n];
    let mut errs = vec![vec![0.0; k]; n];
    for p in 0..n {
        for o in 0..k {
            let mean = sum[p][o] / m;
            let var = ((sumsq[p][o] - m * mean * mean) / (m - 1.0)).max(0.0);
            means[p][o] = mean;
            errs[p][o] = (var / m).sqrt();
        }
    }
    (means, errs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepGroup {
    All,
    Active,
    Inactive,
}

impl SweepGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepGroup::All => "all",
            SweepGroup::Active => "active",
            SweepGroup::Inactive => "inactive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub tau: f64,
    pub group: SweepGroup,
    pub n: u64,
    pub mean_gap: f64,
    pub std_gap: f64,
    pub pct_r: f64,
    pub pct_nr: f64,
    pub pct_tie: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub target: ArgumentId,
    pub grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn series(&self, group: SweepGroup) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.group == group).collect()
    }
}

/// `n` evenly spaced points from 0 to 1 inclusive.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Re-runs the enumeration with the base score of `target` set to each grid
/// value, grouping combinations by whether `target` is active.
pub fn base_score_sweep(
    scenario: &Scenario,
    target: &ArgumentId,
    grid: &[f64],
    kind: SemanticsKind,
    config: &EvalConfig,
    tie_epsilon: f64,
) -> Result<SweepResult> {
    config.validate()?;
    scenario.check()?;
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::BadRequest(
            "grid must be non-empty, strictly increasing and within [0, 1]".into(),
        ));
    }
    let base_graph = CompiledGraph::new(&scenario.framework);
    let node = base_graph
        .index_of(target)
        .ok_or_else(|| Error::UnknownArgument(target.to_string()))?;
    let mut points = Vec::new();
    for &tau in grid {
        let mut graph = base_graph.clone();
        graph.set_base(node, tau)?;
        for (group, condition) in [
            (SweepGroup::All, None),
            (SweepGroup::Active, Some((node, true))),
            (SweepGroup::Inactive, Some((node, false))),
        ] {
            let t = tally(scenario, &graph, condition, kind, config, tie_epsilon)?;
            let tbl = table(scenario, group.as_str().into(), t);
            points.push(SweepPoint {
                tau,
                group,
                n: tbl.n,
                mean_gap: tbl.mean_gap,
                std_gap: tbl.std_gap,
                pct_r: tbl.pct_per_option[&scenario.pair.0],
                pct_nr: tbl.pct_per_option[&scenario.pair.1],
                pct_tie: tbl.pct_tie,
            });
        }
    }
    Ok(SweepResult {
        target: target.clone(),
        grid: grid.to_vec(),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub scenario: String,
    pub filter: String,
    pub n: u64,
    pub pct_r: f64,
    pub pct_nr: f64,
    pub pct_tie: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionRow {
    pub polarity: String,
    pub source: String,
    pub target: String,
    pub contrib_r: f64,
    pub contrib_nr: f64,
    pub stderr_r: f64,
    pub stderr_nr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub group: String,
    pub mean_gap: f64,
    pub std_gap: f64,
    pub pct_r: f64,
    pub pct_nr: f64,
    pub pct_tie: f64,
}

pub fn distribution_rows(tables: &[DistributionTable], r: &ArgumentId, nr: &ArgumentId) -> Vec<DistributionRow> {
    tables
        .iter()
        .map(|t| DistributionRow {
            scenario: t.scenario.clone(),
            filter: t.filter.clone(),
            n: t.n,
            pct_r: t.pct_per_option.get(r).copied().unwrap_or(0.0),
            pct_nr: t.pct_per_option.get(nr).copied().unwrap_or(0.0),
            pct_tie: t.pct_tie,
        })
        .collect()
}

pub fn attribution_rows(table: &AttributionTable, r: &ArgumentId, nr: &ArgumentId) -> Vec<AttributionRow> {
    table
        .entries
        .iter()
        .map(|e| AttributionRow {
            polarity: e.relation.polarity.short().into(),
            source: e.relation.source.to_string(),
            target: e.relation.target.to_string(),
            contrib_r: e.contributions.get(r).copied().unwrap_or(0.0),
            contrib_nr: e.contributions.get(nr).copied().unwrap_or(0.0),
            stderr_r: e.stderr.get(r).copied().unwrap_or(0.0),
            stderr_nr: e.stderr.get(nr).copied().unwrap_or(0.0),
        })
        .collect()
}

pub fn sweep_rows(result: &SweepResult) -> Vec<SweepRow> {
    result
        .points
        .iter()
        .map(|p| SweepRow {
            tau: p.tau,
            group: p.group.as_str().into(),
            mean_gap: p.mean_gap,
            std_gap: p.std_gap,
            pct_r: p.pct_r,
            pct_nr: p.pct_nr,
            pct_tie: p.pct_tie,
        })
        .collect()
}

/// Writes rows with a header line derived from the row's field names.
pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(|e| Error::BadRequest(format!("csv: {e}"))))
        .collect()
}

pub const DISTRIBUTION_HEADER: &str = "scenario,filter,n,pct_r,pct_nr,pct_tie";
pub const ATTRIBUTION_HEADER: &str = "polarity,source,target,contrib_r,contrib_nr,stderr_r,stderr_nr";
pub const SWEEP_HEADER: &str = "tau,group,mean_gap,std_gap,pct_r,pct_nr,pct_tie";
