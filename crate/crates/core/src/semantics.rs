//! Gradual semantics: Quadratic Energy (default), DF-QuAD and Euler-based.
//!
//! Acyclic graphs are evaluated exactly in one topological pass. Cyclic graphs
//! (or callers that ask for it) go through damped synchronous iteration.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_score, ArgumentId, Framework, Polarity, Relation};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticsKind {
    #[default]
    QuadraticEnergy,
    DfQuad,
    EulerBased,
}

impl SemanticsKind {
    pub const ALL: [SemanticsKind; 3] = [
        SemanticsKind::QuadraticEnergy,
        SemanticsKind::DfQuad,
        SemanticsKind::EulerBased,
    ];

    /// Strength of an argument with base score `base` under aggregate `agg`.
    pub fn influence(self, base: f64, agg: &Aggregate) -> f64 {
        match self {
            SemanticsKind::QuadraticEnergy => qe(base, agg.energy),
            SemanticsKind::DfQuad => dfquad(base, agg.attack_mass(), agg.support_mass()),
            SemanticsKind::EulerBased => euler(base, agg.energy),
        }
    }

    /// The semantics' own measure of support minus attack: the energy for
    /// Quadratic Energy and Euler-based, `v_s − v_a` for DF-QuAD.
    pub fn dominance(self, agg: &Aggregate) -> f64 {
        match self {
            SemanticsKind::QuadraticEnergy | SemanticsKind::EulerBased => agg.energy,
            SemanticsKind::DfQuad => agg.support_mass() - agg.attack_mass(),
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            SemanticsKind::QuadraticEnergy => "qe",
            SemanticsKind::DfQuad => "dfquad",
            SemanticsKind::EulerBased => "euler",
        }
    }
}

impl fmt::Display for SemanticsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl std::str::FromStr for SemanticsKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "qe" | "quadratic_energy" | "quadraticenergy" => Ok(SemanticsKind::QuadraticEnergy),
            "dfquad" | "df_quad" => Ok(SemanticsKind::DfQuad),
            "euler" | "euler_based" | "eulerbased" => Ok(SemanticsKind::EulerBased),
            _ => Err(Error::BadRequest(format!("unknown semantics `{s}`"))),
        }
    }
}

/// Running aggregate over an argument's direct attackers and supporters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregate {
    /// Σ σ(supporters) − Σ σ(attackers).
    pub energy: f64,
    attack_keep: f64,
    support_keep: f64,
}

impl Default for Aggregate {
    fn default() -> Self {
        Aggregate {
            energy: 0.0,
            attack_keep: 1.0,
            support_keep: 1.0,
        }
    }
}

impl Aggregate {
    pub fn push(&mut self, strength: f64, polarity: Polarity) {
        match polarity {
            Polarity::Support => {
                self.energy += strength;
                self.support_keep *= 1.0 - strength;
            }
            Polarity::Attack => {
                self.energy -= strength;
                self.attack_keep *= 1.0 - strength;
            }
        }
    }

    /// `1 − Π(1 − σ)` over attackers.
    pub fn attack_mass(&self) -> f64 {
        1.0 - self.attack_keep
    }

    /// `1 − Π(1 − σ)` over supporters.
    pub fn support_mass(&self) -> f64 {
        1.0 - self.support_keep
    }
}

fn qe(base: f64, energy: f64) -> f64 {
    let sq = energy * energy;
    let h = sq / (1.0 + sq);
    if energy <= 0.0 {
        base - base * h
    } else {
        base + (1.0 - base) * h
    }
}

fn dfquad(base: f64, attack: f64, support: f64) -> f64 {
    if attack >= support {
        base - base * (attack - support)
    } else {
        base + (1.0 - base) * (support - attack)
    }
}

fn euler(base: f64, energy: f64) -> f64 {
    1.0 - (1.0 - base * base) / (1.0 + base * energy.exp())
}

/// Quadratic Energy influence function.
pub fn influence_qe(base: f64, energy: f64) -> Result<f64> {
    validate_score(base)?;
    Ok(qe(base, energy))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Exact topological pass when acyclic, iteration otherwise.
    #[default]
    Auto,
    /// Always iterate, even on acyclic graphs.
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Step size of the damped update, in (0, 1].
    pub damping: f64,
    #[serde(default)]
    pub mode: EvalMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            epsilon: 1e-9,
            max_iterations: 10_000,
            damping: 0.5,
            mode: EvalMode::Auto,
        }
    }
}

impl EvalConfig {
    pub fn iterative() -> Self {
        EvalConfig {
            mode: EvalMode::Iterative,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad_epsilon = self.epsilon.is_nan() || self.epsilon <= 0.0;
        let bad_damping = self.damping.is_nan() || self.damping <= 0.0 || self.damping > 1.0;
        if bad_epsilon || self.max_iterations == 0 || bad_damping {
            return Err(Error::BadRequest(format!("invalid evaluation config {self:?}")));
        }
        Ok(())
    }
}

/// Final strengths of the active arguments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrengthMap {
    pub values: BTreeMap<ArgumentId, f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl StrengthMap {
    pub fn get(&self, id: &ArgumentId) -> Option<f64> {
        self.values.get(id).copied()
    }

    /// Strength of `id`, panicking if it was not evaluated. Test convenience.
    pub fn of(&self, id: &str) -> f64 {
        let key = ArgumentId::new(id).expect("valid id");
        self.values[&key]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
struct Parent {
    node: usize,
    edge: usize,
    polarity: Polarity,
}

/// Index-based view of a framework for repeated evaluation under different
/// activity masks, edge subsets or base scores.
#[derive(Clone, Debug)]
pub struct CompiledGraph {
    ids: Vec<ArgumentId>,
    index: HashMap<ArgumentId, usize>,
    base: Vec<f64>,
    parents: Vec<Vec<Parent>>,
    edges: Vec<Relation>,
    order: Option<Vec<usize>>,
}

/// Optional restrictions for [`CompiledGraph::evaluate`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Mask<'a> {
    pub nodes: Option<&'a [bool]>,
    pub edges: Option<&'a [bool]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    /// Indexed like [`CompiledGraph::ids`]; entries of inactive nodes are NaN.
    pub values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl CompiledGraph {
    pub fn new(framework: &Framework) -> Self {
        let ids: Vec<ArgumentId> = framework.arguments().map(|a| a.id.clone()).collect();
        let index: HashMap<ArgumentId, usize> = ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
        let base = framework.arguments().map(|a| a.base_score).collect();
        let edges: Vec<Relation> = framework.relations().collect();
        let mut parents = vec![Vec::new(); ids.len()];
        for (e, rel) in edges.iter().enumerate() {
            parents[index[&rel.target]].push(Parent {
                node: index[&rel.source],
                edge: e,
                polarity: rel.polarity,
            });
        }
        let order = topological_order(&parents);
        CompiledGraph {
            ids,
            index,
            base,
            parents,
            edges,
            order,
        }
    }

    pub fn ids(&self) -> &[ArgumentId] {
        &self.ids
    }

    pub fn index_of(&self, id: &ArgumentId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> &[Relation] {
        &self.edges
    }

    pub fn is_acyclic(&self) -> bool {
        self.order.is_some()
    }

    pub fn base(&self, node: usize) -> f64 {
        self.base[node]
    }

    pub fn set_base(&mut self, node: usize, value: f64) -> Result<()> {
        validate_score(value)?;
        self.base[node] = value;
        Ok(())
    }

    fn aggregate(&self, node: usize, values: &[f64], mask: &Mask) -> Aggregate {
        let mut agg = Aggregate::default();
        for p in &self.parents[node] {
            if mask.nodes.is_some_and(|m| !m[p.node]) || mask.edges.is_some_and(|m| !m[p.edge]) {
                continue;
            }
            agg.push(values[p.node], p.polarity);
        }
        agg
    }

    /// Aggregate of `node` given already-computed `values`.
    pub fn aggregate_at(&self, node: usize, values: &[f64], mask: &Mask) -> Aggregate {
        self.aggregate(node, values, mask)
    }

    pub fn evaluate(&self, kind: SemanticsKind, config: &EvalConfig, mask: &Mask) -> Evaluation {
        let active = |i: usize| mask.nodes.is_none_or(|m| m[i]);
        match (&self.order, config.mode) {
            (Some(order), EvalMode::Auto) => {
                let mut values = vec![f64::NAN; self.ids.len()];
                for &i in order {
                    if active(i) {
                        let agg = self.aggregate(i, &values, mask);
                        values[i] = kind.influence(self.base[i], &agg);
                    }
                }
                Evaluation {
                    values,
                    iterations: 1,
                    converged: true,
                }
            }
            _ => self.iterate(kind, config, mask),
        }
    }

    fn iterate(&self, kind: SemanticsKind, config: &EvalConfig, mask: &Mask) -> Evaluation {
        let n = self.ids.len();
        let active: Vec<bool> = (0..n).map(|i| mask.nodes.is_none_or(|m| m[i])).collect();
        let mut current: Vec<f64> = (0..n)
            .map(|i| if active[i] { self.base[i] } else { f64::NAN })
            .collect();
        let mut next = current.clone();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < config.max_iterations {
            iterations += 1;
            let mut delta: f64 = 0.0;
            for i in (0..n).filter(|&i| active[i]) {
                let agg = self.aggregate(i, &current, mask);
                let target = kind.influence(self.base[i], &agg);
                let value = current[i] + config.damping * (target - current[i]);
                delta = delta.max((value - current[i]).abs());
                next[i] = value;
            }
            std::mem::swap(&mut current, &mut next);
            if delta < config.epsilon {
                converged = true;
                break;
            }
        }
        Evaluation {
            values: current,
            iterations,
            converged,
        }
    }
}

fn topological_order(parents: &[Vec<Parent>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut children = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (child, ps) in parents.iter().enumerate() {
        for p in ps {
            children[p.node].push(child);
            indegree[child] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Evaluates the effectively active arguments of `framework` (see
/// [`Framework::effective_activity`]).
pub fn evaluate(framework: &Framework, kind: SemanticsKind, config: &EvalConfig) -> Result<StrengthMap> {
    evaluate_with(framework, &BTreeMap::new(), kind, config)
}

/// Like [`evaluate`] with activation overrides applied first.
pub fn evaluate_with(
    framework: &Framework,
    overrides: &BTreeMap<ArgumentId, bool>,
    kind: SemanticsKind,
    config: &EvalConfig,
) -> Result<StrengthMap> {
    config.validate()?;
    let active = framework.effective_activity(overrides)?;
    if active.is_empty() {
        return Err(Error::EmptyFramework);
    }
    let graph = CompiledGraph::new(framework);
    let mask: Vec<bool> = graph.ids().iter().map(|id| active.contains(id)).collect();
    let eval = graph.evaluate(
        kind,
        config,
        &Mask {
            nodes: Some(&mask),
            edges: None,
        },
    );
    Ok(collect(&graph, &eval, &active))
}

fn collect(graph: &CompiledGraph, eval: &Evaluation, active: &BTreeSet<ArgumentId>) -> StrengthMap {
    let values = graph
        .ids()
        .iter()
        .zip(&eval.values)
        .filter(|(id, _)| active.contains(*id))
        .map(|(id, v)| (id.clone(), *v))
        .collect();
    StrengthMap {
        values,
        iterations: eval.iterations,
        converged: eval.converged,
    }
}

/// Σ σ(supporters) − Σ σ(attackers) over the direct edges into `arg`. Parents
/// missing from `strengths` are treated as inactive.
pub fn aggregate(framework: &Framework, strengths: &StrengthMap, arg: &ArgumentId) -> Result<f64> {
    if !framework.contains(arg) {
        return Err(Error::UnknownArgument(arg.to_string()));
    }
    let mut agg = Aggregate::default();
    for (src, pol) in framework.incoming(arg) {
        if let Some(s) = strengths.get(src) {
            agg.push(s, pol);
        }
    }
    Ok(agg.energy)
}
