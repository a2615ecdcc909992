//! The database-element universe: relations, attributes, values, the
//! relOf / attOf / key functions, compatible WH words and the foreign-key
//! join graph.
//!
//! Elements are stored in canonical (sorted) order so that identical schema
//! content always produces identical ids regardless of declaration order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RelId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AttrId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ValueId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FkId(pub usize);

/// A database element: a relation, an attribute or a value.
///
/// The derived ordering (relations, then attributes, then values) is the
/// canonical order used for element sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ElementRef {
    Relation(RelId),
    Attribute(AttrId),
    Value(ValueId),
}

impl ElementRef {
    pub fn is_value(self) -> bool {
        matches!(self, ElementRef::Value(_))
    }

    /// Attributes and relations are the elements that may serve as focus.
    pub fn is_focusable(self) -> bool {
        !self.is_value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Text,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub wh_words: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub relation: RelId,
    pub name: String,
    pub is_key: bool,
    pub kind: ValueKind,
    pub wh_words: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueElement {
    pub attribute: AttrId,
    pub literal: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForeignKey {
    pub from: AttrId,
    pub to: AttrId,
}

/// A value element as named in a lexicon file, before resolution.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueDecl {
    pub relation: String,
    pub attribute: String,
    pub literal: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementStore {
    relations: Vec<Relation>,
    attributes: Vec<Attribute>,
    values: Vec<ValueElement>,
    foreign_keys: Vec<ForeignKey>,
    rel_index: BTreeMap<String, RelId>,
    attr_index: BTreeMap<(String, String), AttrId>,
    value_index: BTreeMap<(AttrId, String), ValueId>,
}

// Schema file layout.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    relations: Vec<RelationDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationDecl {
    name: String,
    #[serde(default)]
    wh: Vec<String>,
    #[serde(default)]
    attributes: Vec<AttributeDecl>,
    #[serde(default)]
    foreign_keys: Vec<ForeignKeyDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeDecl {
    name: String,
    #[serde(default)]
    key: bool,
    #[serde(rename = "type", default = "default_kind")]
    kind: ValueKind,
    #[serde(default)]
    wh: Vec<String>,
}

fn default_kind() -> ValueKind {
    ValueKind::Text
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForeignKeyDecl {
    attribute: String,
    references: AttrRefDecl,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttrRefDecl {
    relation: String,
    attribute: String,
}

fn check_identifier(what: &'static str, name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
        return Err(Error::Malformed {
            what,
            message: format!("`{name}` must be a non-empty lowercase identifier"),
        });
    }
    Ok(())
}

impl ElementStore {
    /// Parses a schema file and adds the value elements named by the lexicon.
    pub fn load(schema_text: &str, lexicon_values: &[ValueDecl]) -> Result<Self> {
        let file: SchemaFile =
            serde_json::from_str(schema_text).map_err(|e| Error::malformed("schema", e))?;

        let mut rel_names = BTreeSet::new();
        for rel in &file.relations {
            check_identifier("relation name", &rel.name)?;
            if !rel_names.insert(rel.name.clone()) {
                return Err(Error::Duplicate {
                    what: "relation",
                    name: rel.name.clone(),
                });
            }
        }
        let mut by_name: Vec<&RelationDecl> = file.relations.iter().collect();
        by_name.sort_by(|a, b| a.name.cmp(&b.name));

        let mut store = ElementStore::default();
        for (i, rel) in by_name.iter().enumerate() {
            store.rel_index.insert(rel.name.clone(), RelId(i));
            store.relations.push(Relation {
                name: rel.name.clone(),
                wh_words: rel.wh.iter().cloned().collect(),
            });
        }

        let mut attrs = Vec::new();
        for (i, rel) in by_name.iter().enumerate() {
            for attr in &rel.attributes {
                check_identifier("attribute name", &attr.name)?;
                attrs.push(Attribute {
                    relation: RelId(i),
                    name: attr.name.clone(),
                    is_key: attr.key,
                    kind: attr.kind,
                    wh_words: attr.wh.iter().cloned().collect(),
                });
            }
        }
        attrs.sort_by(|a, b| (a.relation, &a.name).cmp(&(b.relation, &b.name)));
        for (i, attr) in attrs.iter().enumerate() {
            let key = (
                store.relations[attr.relation.0].name.clone(),
                attr.name.clone(),
            );
            if store.attr_index.insert(key.clone(), AttrId(i)).is_some() {
                return Err(Error::Duplicate {
                    what: "attribute",
                    name: format!("{}.{}", key.0, key.1),
                });
            }
        }
        store.attributes = attrs;

        let mut fks = Vec::new();
        for rel in &by_name {
            for fk in &rel.foreign_keys {
                let from = store.attr_id(&rel.name, &fk.attribute)?;
                let to = store.attr_id(&fk.references.relation, &fk.references.attribute)?;
                if !store.attributes[to.0].is_key {
                    return Err(Error::ForeignKeyNotKey {
                        from: store.attr_name(from),
                        to: store.attr_name(to),
                    });
                }
                fks.push(ForeignKey { from, to });
            }
        }
        fks.sort_by_key(|fk| (fk.from, fk.to));
        if let Some(pair) = fks.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Duplicate {
                what: "foreign key",
                name: format!(
                    "{} -> {}",
                    store.attr_name(pair[0].from),
                    store.attr_name(pair[0].to)
                ),
            });
        }
        store.foreign_keys = fks;

        let mut values = BTreeSet::new();
        for decl in lexicon_values {
            let attribute = store.attr_id(&decl.relation, &decl.attribute)?;
            if store.attributes[attribute.0].kind == ValueKind::Numeric
                && decl.literal.trim().parse::<f64>().is_err()
            {
                return Err(Error::NonNumericLiteral {
                    attribute: store.attr_name(attribute),
                    literal: decl.literal.clone(),
                });
            }
            values.insert((attribute, decl.literal.clone()));
        }
        for (i, (attribute, literal)) in values.into_iter().enumerate() {
            store
                .value_index
                .insert((attribute, literal.clone()), ValueId(i));
            store.values.push(ValueElement { attribute, literal });
        }
        Ok(store)
    }

    pub fn relations(&self) -> impl Iterator<Item = (RelId, &Relation)> {
        self.relations
            .iter()
            .enumerate()
            .map(|(i, r)| (RelId(i), r))
    }

    pub fn attributes(&self) -> impl Iterator<Item = (AttrId, &Attribute)> {
        self.attributes
            .iter()
            .enumerate()
            .map(|(i, a)| (AttrId(i), a))
    }

    pub fn values(&self) -> impl Iterator<Item = (ValueId, &ValueElement)> {
        self.values.iter().enumerate().map(|(i, v)| (ValueId(i), v))
    }

    pub fn foreign_keys(&self) -> impl Iterator<Item = (FkId, &ForeignKey)> {
        self.foreign_keys
            .iter()
            .enumerate()
            .map(|(i, f)| (FkId(i), f))
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn relation(&self, id: RelId) -> &Relation {
        &self.relations[id.0]
    }

    pub fn attribute(&self, id: AttrId) -> &Attribute {
        &self.attributes[id.0]
    }

    pub fn value(&self, id: ValueId) -> &ValueElement {
        &self.values[id.0]
    }

    pub fn foreign_key(&self, id: FkId) -> &ForeignKey {
        &self.foreign_keys[id.0]
    }

    pub fn rel_id(&self, name: &str) -> Result<RelId> {
        self.rel_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn attr_id(&self, relation: &str, attribute: &str) -> Result<AttrId> {
        self.rel_id(relation)?;
        self.attr_index
            .get(&(relation.to_string(), attribute.to_string()))
            .copied()
            .ok_or_else(|| Error::UnknownAttribute(format!("{relation}.{attribute}")))
    }

    pub fn value_id(&self, relation: &str, attribute: &str, literal: &str) -> Result<ValueId> {
        let attr = self.attr_id(relation, attribute)?;
        self.value_index
            .get(&(attr, literal.to_string()))
            .copied()
            .ok_or_else(|| Error::UnknownValue(format!("{relation}.{attribute} = {literal:?}")))
    }

    /// relOf: the relation owning an attribute.
    pub fn rel_of(&self, attr: AttrId) -> Result<RelId> {
        self.attributes
            .get(attr.0)
            .map(|a| a.relation)
            .ok_or_else(|| Error::UnknownAttribute(format!("#{}", attr.0)))
    }

    /// attOf: the attribute owning a value.
    pub fn att_of(&self, value: ValueId) -> Result<AttrId> {
        self.values
            .get(value.0)
            .map(|v| v.attribute)
            .ok_or_else(|| Error::UnknownValue(format!("#{}", value.0)))
    }

    pub fn is_key(&self, attr: AttrId) -> bool {
        self.attributes[attr.0].is_key
    }

    /// compWH: the WH words compatible with an attribute or relation.
    pub fn comp_wh(&self, element: ElementRef) -> Result<&BTreeSet<String>> {
        match element {
            ElementRef::Relation(r) => self
                .relations
                .get(r.0)
                .map(|r| &r.wh_words)
                .ok_or_else(|| Error::UnknownRelation(format!("#{}", r.0))),
            ElementRef::Attribute(a) => self
                .attributes
                .get(a.0)
                .map(|a| &a.wh_words)
                .ok_or_else(|| Error::UnknownAttribute(format!("#{}", a.0))),
            ElementRef::Value(v) => Err(Error::UnknownAttribute(format!(
                "value {} has no compatible WH words",
                self.describe(ElementRef::Value(v))
            ))),
        }
    }

    /// The relation an element belongs to: itself, relOf, or relOf∘attOf.
    pub fn owning_relation(&self, element: ElementRef) -> RelId {
        match element {
            ElementRef::Relation(r) => r,
            ElementRef::Attribute(a) => self.attributes[a.0].relation,
            ElementRef::Value(v) => self.attributes[self.values[v.0].attribute.0].relation,
        }
    }

    pub fn attr_name(&self, attr: AttrId) -> String {
        let a = &self.attributes[attr.0];
        format!("{}.{}", self.relations[a.relation.0].name, a.name)
    }

    /// SQL rendering of a value's literal: numbers bare, text single-quoted
    /// with embedded quotes doubled.
    pub fn sql_literal(&self, value: ValueId) -> String {
        let v = &self.values[value.0];
        match self.attributes[v.attribute.0].kind {
            ValueKind::Numeric => v.literal.trim().to_string(),
            ValueKind::Text => format!("'{}'", v.literal.replace('\'', "''")),
        }
    }

    /// Human-readable name: `movie`, `movie.title`, `movie.title = 'Unforgiven'`.
    pub fn describe(&self, element: ElementRef) -> String {
        match element {
            ElementRef::Relation(r) => self.relations[r.0].name.clone(),
            ElementRef::Attribute(a) => self.attr_name(a),
            ElementRef::Value(v) => format!(
                "{} = {}",
                self.attr_name(self.values[v.0].attribute),
                self.sql_literal(v)
            ),
        }
    }

    /// The undirected join graph: one edge per foreign key.
    pub fn fk_adjacency(&self) -> FkGraph {
        FkGraph {
            relation_count: self.relations.len(),
            edges: self
                .foreign_keys()
                .map(|(id, fk)| FkEdge {
                    fk: id,
                    a: self.attributes[fk.from.0].relation,
                    b: self.attributes[fk.to.0].relation,
                })
                .collect(),
        }
    }
}

/// An undirected multigraph over relations; edges are labeled by foreign key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FkGraph {
    pub relation_count: usize,
    pub edges: Vec<FkEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FkEdge {
    pub fk: FkId,
    pub a: RelId,
    pub b: RelId,
}

impl FkEdge {
    pub fn other(&self, end: RelId) -> RelId {
        if self.a == end {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, node: RelId) -> bool {
        self.a == node || self.b == node
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementRef::Relation(r) => write!(f, "R{}", r.0),
            ElementRef::Attribute(a) => write!(f, "A{}", a.0),
            ElementRef::Value(v) => write!(f, "V{}", v.0),
        }
    }
}
