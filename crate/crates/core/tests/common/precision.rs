//! Structural checks on emitted SQL, parsed back from its text rather than
//! read off the generator's own data structures.

use std::collections::{BTreeMap, BTreeSet};

use precise_core::schema::{ElementRef, ElementStore};
use precise_core::sqlgen::Interpretation;

struct Parsed {
    select: String,
    from: Vec<String>,
    conditions: Vec<(String, String)>,
}

/// Splits on `sep` outside single-quoted literals.
fn split_outside_quotes<'a>(text: &'a str, sep: &str) -> Vec<&'a str> {
    let mut parts = Vec::new();
    let mut in_quote = false;
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\'' {
            in_quote = !in_quote;
        } else if !in_quote && text[i..].starts_with(sep) {
            parts.push(&text[start..i]);
            i += sep.len();
            start = i;
            continue;
        }
        i += 1;
    }
    parts.push(&text[start..]);
    parts
}

fn parse(sql: &str) -> Result<Parsed, String> {
    let rest = sql.strip_prefix("SELECT ").ok_or("missing SELECT")?;
    let (select, rest) = rest.split_once(" FROM ").ok_or("missing FROM")?;
    let (from, where_clause) = match split_outside_quotes(rest, " WHERE ").as_slice() {
        [from] => (*from, None),
        [from, w] => (*from, Some(*w)),
        _ => return Err("more than one WHERE".into()),
    };
    let conditions = match where_clause {
        None => Vec::new(),
        Some(w) => split_outside_quotes(w, " AND ")
            .into_iter()
            .map(|c| {
                c.split_once(" = ")
                    .map(|(l, r)| (l.to_string(), r.to_string()))
                    .ok_or_else(|| format!("condition `{c}` is not an equality"))
            })
            .collect::<Result<_, _>>()?,
    };
    Ok(Parsed {
        select: select.to_string(),
        from: from.split(", ").map(String::from).collect(),
        conditions,
    })
}

fn is_column(s: &str) -> bool {
    !s.starts_with('\'') && s.contains('.') && !s.chars().next().is_some_and(|c| c.is_ascii_digit())
}

fn relation_of(column: &str) -> &str {
    column.split('.').next().unwrap()
}

fn find(parent: &mut BTreeMap<String, String>, x: &str) -> String {
    let p = parent[x].clone();
    if p == x {
        return p;
    }
    let root = find(parent, &p);
    parent.insert(x.to_string(), root.clone());
    root
}

/// Violations of referential closure, tree-shaped joins, and value
/// equalities for every SQL variant of an interpretation.
pub fn structural_violations(interp: &Interpretation, store: &ElementStore) -> Vec<String> {
    let mut out = Vec::new();
    let m = &interp.mapping;

    let mut expected_values: Vec<(String, String)> = m
        .element_set()
        .into_iter()
        .filter_map(|e| match e {
            ElementRef::Value(v) => Some((
                store.attr_name(store.value(v).attribute),
                store.sql_literal(v),
            )),
            _ => None,
        })
        .collect();
    expected_values.sort();
    let expected_select = match m.focus {
        ElementRef::Relation(r) => format!("{}.*", store.relation(r).name),
        ElementRef::Attribute(a) => store.attr_name(a),
        ElementRef::Value(v) => store.attr_name(store.value(v).attribute),
    };
    let mapped_relations: BTreeSet<String> = m
        .element_set()
        .into_iter()
        .map(|e| store.relation(store.owning_relation(e)).name.clone())
        .collect();
    let fk_pairs: BTreeSet<(String, String)> = store
        .foreign_keys()
        .map(|(_, fk)| (store.attr_name(fk.from), store.attr_name(fk.to)))
        .collect();

    if interp.sql.is_empty() {
        out.push(format!("`{}` has no SQL", interp.paraphrase));
    }
    for sql in &interp.sql {
        let text = &sql.text;
        let p = match parse(text) {
            Ok(p) => p,
            Err(e) => {
                out.push(format!("{text}: {e}"));
                continue;
            }
        };
        let from: BTreeSet<String> = p.from.iter().cloned().collect();
        if from.len() != p.from.len() {
            out.push(format!("{text}: duplicate relation in FROM"));
        }
        if p.select != expected_select {
            out.push(format!(
                "{text}: selects {} instead of {expected_select}",
                p.select
            ));
        }
        if !mapped_relations.is_subset(&from) {
            out.push(format!("{text}: FROM misses a mapped relation"));
        }
        let mut columns = vec![p.select.as_str()];
        let mut values = Vec::new();
        let mut joins = Vec::new();
        for (l, r) in &p.conditions {
            columns.push(l);
            if is_column(r) {
                columns.push(r);
                joins.push((l.clone(), r.clone()));
            } else {
                values.push((l.clone(), r.clone()));
            }
        }
        for c in columns {
            if !from.contains(relation_of(c)) {
                out.push(format!("{text}: `{c}` refers outside FROM"));
            }
        }
        values.sort();
        if values != expected_values {
            out.push(format!(
                "{text}: value conditions {values:?} != mapping values {expected_values:?}"
            ));
        }

        if joins.len() + 1 != from.len() {
            out.push(format!(
                "{text}: {} joins over {} relations",
                joins.len(),
                from.len()
            ));
        }
        let mut parent: BTreeMap<String, String> =
            from.iter().map(|r| (r.clone(), r.clone())).collect();
        for (l, r) in &joins {
            if !fk_pairs.contains(&(l.clone(), r.clone())) {
                out.push(format!("{text}: `{l} = {r}` is not a foreign key"));
                continue;
            }
            let (a, b) = (relation_of(l), relation_of(r));
            if !parent.contains_key(a) || !parent.contains_key(b) {
                continue;
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                out.push(format!("{text}: joins contain a cycle"));
            }
            parent.insert(ra, rb);
        }
        let roots: BTreeSet<String> = from.iter().map(|r| find(&mut parent, r)).collect();
        if roots.len() > 1 {
            out.push(format!("{text}: joins leave FROM disconnected"));
        }
    }
    out
}
