//! Rendering valid mappings as SQL.
//!
//! The focus becomes the SELECT target, every relation the mapping touches
//! goes into FROM, values become equality conditions, and the relations are
//! connected by the foreign-key edges of a minimum Steiner tree. Cyclic
//! schemas can admit several minimum trees; one query is emitted per tree.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::matcher::ValidMapping;
use crate::schema::{AttrId, ElementRef, ElementStore, FkGraph, FkId, RelId, ValueId};

/// A tree of foreign-key edges spanning a set of relations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JoinTree {
    pub relations: BTreeSet<RelId>,
    pub edges: BTreeSet<FkId>,
}

/// Relations the mapping involves or implies.
pub fn required_relations(m: &ValidMapping, store: &ElementStore) -> BTreeSet<RelId> {
    m.element_set()
        .into_iter()
        .map(|e| store.owning_relation(e))
        .collect()
}

/// All minimum-edge trees of `g` that span `required`. Empty when the
/// required relations lie in different components.
pub fn enumerate_join_trees(g: &FkGraph, required: &BTreeSet<RelId>) -> Vec<JoinTree> {
    let Some(&root) = required.iter().next() else {
        return Vec::new();
    };
    if required.len() == 1 {
        return vec![JoinTree {
            relations: required.clone(),
            edges: BTreeSet::new(),
        }];
    }
    if !connected_within(g, root, required) {
        return Vec::new();
    }

    for size in required.len() - 1..g.relation_count.max(required.len()) {
        let mut search = TreeSearch {
            g,
            required,
            size,
            visited: HashSet::new(),
            found: BTreeSet::new(),
        };
        let mut nodes = BTreeSet::from([root]);
        let mut edges = BTreeSet::new();
        search.grow(&mut nodes, &mut edges);
        if !search.found.is_empty() {
            return search.found.into_iter().collect();
        }
    }
    Vec::new()
}

fn connected_within(g: &FkGraph, root: RelId, required: &BTreeSet<RelId>) -> bool {
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        for e in g.edges.iter().filter(|e| e.touches(node)) {
            let next = e.other(node);
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    required.is_subset(&seen)
}

/// Grows trees outward from the root one frontier edge at a time, so every
/// state is connected and acyclic by construction.
struct TreeSearch<'a> {
    g: &'a FkGraph,
    required: &'a BTreeSet<RelId>,
    size: usize,
    visited: HashSet<BTreeSet<usize>>,
    found: BTreeSet<JoinTree>,
}

impl TreeSearch<'_> {
    fn grow(&mut self, nodes: &mut BTreeSet<RelId>, edges: &mut BTreeSet<usize>) {
        let missing = self.required.difference(nodes).count();
        if edges.len() == self.size {
            if missing == 0 {
                self.found.insert(JoinTree {
                    relations: nodes.clone(),
                    edges: edges.iter().map(|&i| self.g.edges[i].fk).collect(),
                });
            }
            return;
        }
        if missing > self.size - edges.len() {
            return;
        }
        for (i, e) in self.g.edges.iter().enumerate() {
            if edges.contains(&i) || nodes.contains(&e.a) == nodes.contains(&e.b) {
                continue;
            }
            let new_node = if nodes.contains(&e.a) { e.b } else { e.a };
            edges.insert(i);
            if self.visited.insert(edges.clone()) {
                nodes.insert(new_node);
                self.grow(nodes, edges);
                nodes.remove(&new_node);
            }
            edges.remove(&i);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    /// `attribute = literal`
    Value {
        attribute: AttrId,
        value: ValueId,
        text: String,
    },
    /// `child.fk = parent.key`
    Join { fk: FkId, text: String },
}

impl Condition {
    pub fn text(&self) -> &str {
        match self {
            Condition::Value { text, .. } | Condition::Join { text, .. } => text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SqlQuery {
    pub text: String,
    pub select: String,
    pub from: Vec<String>,
    pub conditions: Vec<Condition>,
}

impl fmt::Display for SqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Serialize for SqlQuery {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.text)
    }
}

pub fn generate_sql(m: &ValidMapping, tree: &JoinTree, store: &ElementStore) -> SqlQuery {
    let select = match m.focus {
        ElementRef::Relation(r) => format!("{}.*", store.relation(r).name),
        ElementRef::Attribute(a) => store.attr_name(a),
        ElementRef::Value(v) => store.attr_name(store.value(v).attribute),
    };

    let mut from: Vec<String> = tree
        .relations
        .iter()
        .chain(required_relations(m, store).iter())
        .map(|&r| store.relation(r).name.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    from.sort();

    let mut conditions: Vec<Condition> = m
        .values_in_question_order()
        .into_iter()
        .map(|v| {
            let attribute = store.value(v).attribute;
            Condition::Value {
                attribute,
                value: v,
                text: format!("{} = {}", store.attr_name(attribute), store.sql_literal(v)),
            }
        })
        .collect();
    let mut joins: Vec<Condition> = tree
        .edges
        .iter()
        .map(|&fk| {
            let key = store.foreign_key(fk);
            Condition::Join {
                fk,
                text: format!(
                    "{} = {}",
                    store.attr_name(key.from),
                    store.attr_name(key.to)
                ),
            }
        })
        .collect();
    joins.sort_by(|a, b| a.text().cmp(b.text()));
    conditions.extend(joins);

    let mut text = format!("SELECT {select} FROM {}", from.join(", "));
    if !conditions.is_empty() {
        let clauses: Vec<&str> = conditions.iter().map(Condition::text).collect();
        text.push_str(" WHERE ");
        text.push_str(&clauses.join(" AND "));
    }
    SqlQuery {
        text,
        select,
        from,
        conditions,
    }
}

fn plural(noun: &str) -> String {
    if noun.ends_with('s') {
        noun.to_string()
    } else if let Some(stem) = noun
        .strip_suffix('y')
        .filter(|s| !s.ends_with(['a', 'e', 'i', 'o', 'u']))
    {
        format!("{stem}ies")
    } else if noun.ends_with('x') || noun.ends_with("ch") || noun.ends_with("sh") {
        format!("{noun}es")
    } else {
        format!("{noun}s")
    }
}

/// English rendering of a mapping, e.g. `movies where director is 'Clint Eastwood'`.
pub fn paraphrase(m: &ValidMapping, store: &ElementStore) -> String {
    let focus_rel = store.owning_relation(m.focus);
    let rows = plural(&store.relation(focus_rel).name);
    let conditions: Vec<String> = m
        .values_in_question_order()
        .into_iter()
        .map(|v| {
            let attr = store.attribute(store.value(v).attribute);
            let subject = if attr.relation == focus_rel {
                attr.name.clone()
            } else {
                format!("{} {}", store.relation(attr.relation).name, attr.name)
            };
            format!("{subject} is {}", store.sql_literal(v))
        })
        .collect();

    let head = match (m.focus, conditions.is_empty()) {
        (ElementRef::Attribute(a), true) => {
            format!("the {} of all {rows}", store.attribute(a).name)
        }
        (ElementRef::Attribute(a), false) => format!("the {} of {rows}", store.attribute(a).name),
        (_, true) => format!("all {rows}"),
        (_, false) => rows,
    };
    if conditions.is_empty() {
        head
    } else {
        format!("{head} where {}", conditions.join(" and "))
    }
}

/// One reading of a question: a valid mapping with every SQL variant.
#[derive(Debug, Clone, Serialize)]
pub struct Interpretation {
    #[serde(skip)]
    pub mapping: ValidMapping,
    pub paraphrase: String,
    pub focus: String,
    pub wh: String,
    pub element_set: Vec<String>,
    pub phrases: Vec<PhrasePair>,
    pub sql: Vec<SqlQuery>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhrasePair {
    pub phrase: String,
    pub element: String,
}

/// Builds the interpretation of a valid mapping: all join-tree SQL variants,
/// sorted and without duplicates. The SQL list is empty only when the
/// required relations are disconnected in the join graph.
pub fn interpret(m: &ValidMapping, store: &ElementStore, graph: &FkGraph) -> Interpretation {
    let required = required_relations(m, store);
    let mut sql: Vec<SqlQuery> = enumerate_join_trees(graph, &required)
        .iter()
        .map(|t| generate_sql(m, t, store))
        .collect();
    sql.sort_by(|a, b| a.text.cmp(&b.text));
    sql.dedup_by(|a, b| a.text == b.text);
    Interpretation {
        paraphrase: paraphrase(m, store),
        focus: store.describe(m.focus),
        wh: m.wh.clone(),
        element_set: m
            .element_set()
            .into_iter()
            .map(|e| store.describe(e))
            .collect(),
        phrases: m
            .phrase_pairs()
            .into_iter()
            .map(|(p, e)| PhrasePair {
                phrase: p.text(),
                element: store.describe(e),
            })
            .collect(),
        sql,
        mapping: m.clone(),
    }
}
