//! Variables, domains and the two knowledge-base backends.
//!
//! A knowledge base is either an explicit joint table or a Bayesian network.
//! Both are loaded from a JSON document, validated once, and never mutated
//! afterwards, so a `&KnowledgeBase` can be shared freely between threads.
//!
//! Joint tables and CPT rows are laid out in row-major order over the listed
//! variables: the last variable varies fastest.

use std::collections::HashMap;

use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Probability mass tolerance for normalization checks.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: usize,
    pub name: String,
    pub values: Vec<String>,
}

impl Variable {
    pub fn domain_size(&self) -> usize {
        self.values.len()
    }

    /// True for the `["t", "f"]` convention that enables bare `x` / `!x` syntax.
    pub fn is_boolean(&self) -> bool {
        self.values.len() == 2 && self.values[0] == "t" && self.values[1] == "f"
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    /// Variable ids in layout order.
    pub order: Vec<usize>,
    pub probs: Vec<f64>,
    /// `strides[id]` is the flat-index stride of variable `id`.
    strides: Vec<usize>,
}

impl JointTable {
    fn index_of(&self, assignment: &[usize]) -> usize {
        assignment
            .iter()
            .zip(&self.strides)
            .map(|(value, stride)| value * stride)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkNode {
    pub parents: Vec<usize>,
    /// One row per parent configuration (row-major over `parents`), each a
    /// distribution over the variable's domain.
    pub cpt: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    /// Indexed by variable id.
    pub nodes: Vec<NetworkNode>,
}

impl BayesNet {
    fn row_index(&self, var: usize, assignment: &[usize], variables: &[Variable]) -> usize {
        self.nodes[var].parents.iter().fold(0, |acc, &p| {
            acc * variables[p].domain_size() + assignment[p]
        })
    }

    /// Variables in `seed` together with all their ancestors.
    pub fn ancestral_closure(&self, seed: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut marked = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = seed.into_iter().collect();
        while let Some(v) = stack.pop() {
            if !marked[v] {
                marked[v] = true;
                stack.extend(self.nodes[v].parents.iter().copied());
            }
        }
        marked
    }

    /// `P(var = assignment[var] | parents)` read from the CPT.
    pub fn local_probability(&self, var: usize, assignment: &[usize], variables: &[Variable]) -> f64 {
        let row = self.row_index(var, assignment, variables);
        self.nodes[var].cpt[row][assignment[var]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Joint(JointTable),
    Network(BayesNet),
}

/// An immutable, validated probability model.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub name: Option<String>,
    variables: Vec<Variable>,
    by_name: HashMap<String, usize>,
    body: Body,
}

impl KnowledgeBase {
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: usize) -> &Variable {
        &self.variables[id]
    }

    pub fn variable_by_name(&self, name: &str) -> Option<&Variable> {
        self.by_name.get(name).map(|&id| &self.variables[id])
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::domain_size).collect()
    }

    /// Probability of one full assignment (`assignment[id]` is a value index).
    pub fn joint_probability(&self, assignment: &[usize]) -> Result<f64, ModelError> {
        if assignment.len() != self.variables.len() {
            return Err(ModelError::Assignment(format!(
                "expected {} values, got {}",
                self.variables.len(),
                assignment.len()
            )));
        }
        for (var, &value) in self.variables.iter().zip(assignment) {
            if value >= var.domain_size() {
                return Err(ModelError::Assignment(format!(
                    "value index {value} out of range for `{}`",
                    var.name
                )));
            }
        }
        Ok(self.joint_unchecked(assignment))
    }

    /// Name-based variant of [`joint_probability`](Self::joint_probability).
    pub fn joint_probability_named(&self, assignment: &[(&str, &str)]) -> Result<f64, ModelError> {
        let mut values = vec![usize::MAX; self.variables.len()];
        for &(name, value) in assignment {
            let var = self
                .variable_by_name(name)
                .ok_or_else(|| ModelError::Assignment(format!("unknown variable `{name}`")))?;
            values[var.id] = var.value_index(value).ok_or_else(|| {
                ModelError::Assignment(format!("unknown value `{value}` for `{name}`"))
            })?;
        }
        if let Some(missing) = values.iter().position(|&v| v == usize::MAX) {
            return Err(ModelError::Assignment(format!(
                "no value for `{}`",
                self.variables[missing].name
            )));
        }
        Ok(self.joint_unchecked(&values))
    }

    pub(crate) fn joint_unchecked(&self, assignment: &[usize]) -> f64 {
        match &self.body {
            Body::Joint(table) => table.probs[table.index_of(assignment)],
            Body::Network(net) => (0..self.variables.len())
                .map(|v| net.local_probability(v, assignment, &self.variables))
                .product(),
        }
    }

    /// Every full assignment, in row-major order over variable ids.
    pub fn assignments(&self) -> Assignments {
        Assignments::new(self.domain_sizes())
    }

    /// Expands the model into an explicit joint table over the declared
    /// variable order.
    pub fn to_joint_table(&self) -> KnowledgeBase {
        let probs = self.assignments().map(|a| self.joint_unchecked(&a)).collect();
        let order = (0..self.variables.len()).collect();
        let table = JointTable::new(order, probs, &self.variables);
        KnowledgeBase::from_parts(self.name.clone(), self.variables.clone(), Body::Joint(table))
    }

    /// Chain-rule factorization of the joint into a network where each variable
    /// has every earlier variable as a parent. Parent rows with zero mass get a
    /// uniform distribution.
    pub fn to_chain_network(&self) -> KnowledgeBase {
        let n = self.variables.len();
        let sizes = self.domain_sizes();
        let joint: Vec<(Vec<usize>, f64)> = self
            .assignments()
            .map(|a| {
                let p = self.joint_unchecked(&a);
                (a, p)
            })
            .collect();
        let mut nodes = Vec::with_capacity(n);
        for v in 0..n {
            let parents: Vec<usize> = (0..v).collect();
            let rows: usize = sizes[..v].iter().product();
            let mut cpt = vec![vec![0.0; sizes[v]]; rows];
            for (a, p) in &joint {
                let row = parents.iter().fold(0, |acc, &q| acc * sizes[q] + a[q]);
                cpt[row][a[v]] += p;
            }
            for row in &mut cpt {
                let mass: f64 = row.iter().sum();
                if mass > 0.0 {
                    row.iter_mut().for_each(|x| *x /= mass);
                } else {
                    row.iter_mut().for_each(|x| *x = 1.0 / sizes[v] as f64);
                }
            }
            nodes.push(NetworkNode { parents, cpt });
        }
        KnowledgeBase::from_parts(
            self.name.clone(),
            self.variables.clone(),
            Body::Network(BayesNet { nodes }),
        )
    }

    pub(crate) fn from_parts(name: Option<String>, variables: Vec<Variable>, body: Body) -> Self {
        let by_name = variables.iter().map(|v| (v.name.clone(), v.id)).collect();
        KnowledgeBase {
            name,
            variables,
            by_name,
            body,
        }
    }

    /// Builds and validates a joint-table knowledge base.
    pub fn from_joint(
        variables: Vec<(String, Vec<String>)>,
        order: &[&str],
        probs: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let doc = KbDocument {
            name: None,
            variables: variables
                .into_iter()
                .map(|(name, values)| VariableDoc { name, values })
                .collect(),
            joint: Some(JointDoc {
                order: order.iter().map(|s| s.to_string()).collect(),
                probs,
            }),
            network: None,
        };
        doc.into_kb()
    }

    /// Builds and validates a Bayesian-network knowledge base. Each entry is
    /// `(variable, parents, cpt)`.
    pub fn from_network(
        variables: Vec<(String, Vec<String>)>,
        network: Vec<NodeSpec<'_>>,
    ) -> Result<Self, ModelError> {
        let doc = KbDocument {
            name: None,
            variables: variables
                .into_iter()
                .map(|(name, values)| VariableDoc { name, values })
                .collect(),
            joint: None,
            network: Some(
                network
                    .into_iter()
                    .map(|(var, parents, cpt)| NodeDoc {
                        var: var.to_string(),
                        parents: parents.into_iter().map(str::to_string).collect(),
                        cpt,
                    })
                    .collect(),
            ),
        };
        doc.into_kb()
    }

    /// Serializes back into the JSON document format.
    pub fn to_document(&self) -> KbDocument {
        let variables = self
            .variables
            .iter()
            .map(|v| VariableDoc {
                name: v.name.clone(),
                values: v.values.clone(),
            })
            .collect();
        let name_of = |id: usize| self.variables[id].name.clone();
        match &self.body {
            Body::Joint(t) => KbDocument {
                name: self.name.clone(),
                variables,
                joint: Some(JointDoc {
                    order: t.order.iter().map(|&id| name_of(id)).collect(),
                    probs: t.probs.clone(),
                }),
                network: None,
            },
            Body::Network(net) => KbDocument {
                name: self.name.clone(),
                variables,
                joint: None,
                network: Some(
                    net.nodes
                        .iter()
                        .enumerate()
                        .map(|(id, node)| NodeDoc {
                            var: name_of(id),
                            parents: node.parents.iter().map(|&p| name_of(p)).collect(),
                            cpt: node.cpt.clone(),
                        })
                        .collect(),
                ),
            },
        }
    }
}

impl JointTable {
    fn new(order: Vec<usize>, probs: Vec<f64>, variables: &[Variable]) -> Self {
        let mut strides = vec![0; variables.len()];
        let mut stride = 1;
        for &id in order.iter().rev() {
            strides[id] = stride;
            stride *= variables[id].domain_size();
        }
        JointTable {
            order,
            probs,
            strides,
        }
    }
}

/// Odometer over the Cartesian product of domains, last position fastest.
#[derive(Debug, Clone)]
pub struct Assignments {
    sizes: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl Assignments {
    pub fn new(sizes: Vec<usize>) -> Self {
        let current = if sizes.contains(&0) {
            None
        } else {
            Some(vec![0; sizes.len()])
        };
        Assignments { sizes, current }
    }
}

impl Iterator for Assignments {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.sizes[i] {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

// ---------------------------------------------------------------------------
// JSON document

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub variables: Vec<VariableDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<Vec<NodeDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDoc {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub order: Vec<String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub var: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<Vec<f64>>,
}

/// `(variable, parents, cpt)` for [`KnowledgeBase::from_network`].
pub type NodeSpec<'a> = (&'a str, Vec<&'a str>, Vec<Vec<f64>>);

/// Parses and validates a knowledge-base document.
pub fn load_kb(text: &str) -> Result<KnowledgeBase, ModelError> {
    let doc: KbDocument = serde_json::from_str(text)?;
    doc.into_kb()
}

/// Reads a knowledge base from disk; the file stem becomes the default name.
pub fn load_kb_file(path: impl AsRef<std::path::Path>) -> Result<KnowledgeBase, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut kb = load_kb(&text)?;
    if kb.name.is_none() {
        kb.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(kb)
}

fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::Validation(msg.into())
}

fn check_distribution(what: &str, probs: &[f64]) -> Result<(), ModelError> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(invalid(format!("{what}: entry {p} is not a probability")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(invalid(format!("{what}: entries sum to {total}, not 1")));
    }
    Ok(())
}

impl KbDocument {
    pub fn into_kb(self) -> Result<KnowledgeBase, ModelError> {
        let mut variables = Vec::with_capacity(self.variables.len());
        let mut by_name = HashMap::new();
        for (id, v) in self.variables.into_iter().enumerate() {
            if v.values.len() < 2 {
                return Err(invalid(format!(
                    "variable `{}` needs at least two values",
                    v.name
                )));
            }
            for (i, value) in v.values.iter().enumerate() {
                if v.values[..i].contains(value) {
                    return Err(invalid(format!(
                        "variable `{}` lists value `{value}` twice",
                        v.name
                    )));
                }
            }
            if by_name.insert(v.name.clone(), id).is_some() {
                return Err(invalid(format!("duplicate variable name `{}`", v.name)));
            }
            variables.push(Variable {
                id,
                name: v.name,
                values: v.values,
            });
        }
        let lookup = |name: &str, context: &str| {
            by_name
                .get(name)
                .copied()
                .ok_or_else(|| invalid(format!("{context}: unknown variable `{name}`")))
        };

        let body = match (self.joint, self.network) {
            (Some(_), Some(_)) => {
                return Err(invalid("document has both `joint` and `network`"));
            }
            (None, None) => return Err(invalid("document needs `joint` or `network`")),
            (Some(joint), None) => {
                let mut order = Vec::with_capacity(joint.order.len());
                for name in &joint.order {
                    let id = lookup(name, "joint order")?;
                    if order.contains(&id) {
                        return Err(invalid(format!("joint order lists `{name}` twice")));
                    }
                    order.push(id);
                }
                if order.len() != variables.len() {
                    return Err(invalid("joint order must list every variable exactly once"));
                }
                let expected: usize = variables.iter().map(Variable::domain_size).product();
                if joint.probs.len() != expected {
                    return Err(invalid(format!(
                        "joint table has {} entries, expected {expected}",
                        joint.probs.len()
                    )));
                }
                check_distribution("joint table", &joint.probs)?;
                Body::Joint(JointTable::new(order, joint.probs, &variables))
            }
            (None, Some(network)) => {
                let mut nodes: Vec<Option<NetworkNode>> = vec![None; variables.len()];
                for node in network {
                    let id = lookup(&node.var, "network")?;
                    if nodes[id].is_some() {
                        return Err(invalid(format!("network defines `{}` twice", node.var)));
                    }
                    let mut parents = Vec::with_capacity(node.parents.len());
                    for p in &node.parents {
                        let pid = lookup(p, &format!("parents of `{}`", node.var))?;
                        if pid == id || parents.contains(&pid) {
                            return Err(invalid(format!(
                                "parents of `{}`: `{p}` is repeated or self-referential",
                                node.var
                            )));
                        }
                        parents.push(pid);
                    }
                    let rows: usize = parents.iter().map(|&p| variables[p].domain_size()).product();
                    if node.cpt.len() != rows {
                        return Err(invalid(format!(
                            "CPT of `{}` has {} rows, expected {rows}",
                            node.var,
                            node.cpt.len()
                        )));
                    }
                    let width = variables[id].domain_size();
                    for (r, row) in node.cpt.iter().enumerate() {
                        if row.len() != width {
                            return Err(invalid(format!(
                                "CPT of `{}` row {r} has {} entries, expected {width}",
                                node.var,
                                row.len()
                            )));
                        }
                        check_distribution(&format!("CPT of `{}` row {r}", node.var), row)?;
                    }
                    nodes[id] = Some(NetworkNode {
                        parents,
                        cpt: node.cpt,
                    });
                }
                let nodes: Vec<NetworkNode> = nodes
                    .into_iter()
                    .enumerate()
                    .map(|(id, n)| {
                        n.ok_or_else(|| {
                            invalid(format!("network has no CPT for `{}`", variables[id].name))
                        })
                    })
                    .collect::<Result<_, _>>()?;

                let mut graph = DiGraph::<usize, ()>::new();
                let ix: Vec<_> = (0..nodes.len()).map(|v| graph.add_node(v)).collect();
                for (child, node) in nodes.iter().enumerate() {
                    for &p in &node.parents {
                        graph.add_edge(ix[p], ix[child], ());
                    }
                }
                if let Err(cycle) = petgraph::algo::toposort(&graph, None) {
                    let at = graph[cycle.node_id()];
                    return Err(invalid(format!(
                        "network has a cycle through `{}`",
                        variables[at].name
                    )));
                }
                Body::Network(BayesNet { nodes })
            }
        };

        Ok(KnowledgeBase::from_parts(self.name, variables, body))
    }
}
