//! Brute-force reference implementations, kept independent of the search
//! strategies they check.

use std::collections::BTreeSet;

use precise_core::lexicon::Lexicon;
use precise_core::schema::{FkGraph, FkId, RelId};
use precise_core::stem::stem;
use precise_core::tokenizer::{CoveringAssignment, OccurrenceKind};
use rand::seq::SliceRandom;
use rand::Rng;

const STOP: [&str; 12] = [
    "are", "the", "on", "a", "in", "is", "be", "of", "do", "with", "have", "has",
];
const WH: [&str; 6] = ["who", "which", "what", "where", "when", "how"];

/// An occurrence as `(1-based start, stems, kind)`.
pub type Occ = (usize, Vec<String>, &'static str);

pub fn occ_of(a: &CoveringAssignment) -> Vec<Occ> {
    a.occurrences
        .iter()
        .map(|o| {
            let kind = match o.kind {
                OccurrenceKind::Lexical => "lexical",
                OccurrenceKind::Stop => "stop",
                OccurrenceKind::Wh => "wh",
            };
            (o.start, o.key.0.clone(), kind)
        })
        .collect()
}

/// Every segmentation of the question into spans, each span read as any
/// phrase (lexicon, Stop, WH) of the same length whose stems agree.
pub fn brute_force_assignments(
    words: &[String],
    lex: &Lexicon,
    stop_extra: &[String],
    wh_extra: &[String],
) -> BTreeSet<Vec<Occ>> {
    let mut phrases: BTreeSet<(Vec<String>, &'static str)> = BTreeSet::new();
    let stems = |text: &str| text.split_whitespace().map(stem).collect::<Vec<_>>();
    for entry in lex.entries() {
        phrases.insert((
            entry.phrase.words().iter().map(|w| stem(w)).collect(),
            "lexical",
        ));
    }
    for s in STOP
        .iter()
        .copied()
        .chain(stop_extra.iter().map(String::as_str))
    {
        phrases.insert((stems(s), "stop"));
    }
    for s in WH
        .iter()
        .copied()
        .chain(wh_extra.iter().map(String::as_str))
    {
        phrases.insert((stems(s), "wh"));
    }

    let n = words.len();
    let q: Vec<String> = words.iter().map(|w| stem(w)).collect();
    let mut out = BTreeSet::new();
    // bit i of `cuts` set: a span boundary after word i+1
    for cuts in 0u32..(1 << (n - 1)) {
        let mut spans = Vec::new();
        let mut start = 0;
        for i in 0..n {
            if i == n - 1 || cuts & (1 << i) != 0 {
                spans.push((start, i + 1));
                start = i + 1;
            }
        }
        let readings: Vec<Vec<Occ>> = spans
            .iter()
            .map(|&(s, e)| {
                phrases
                    .iter()
                    .filter(|(p, _)| p[..] == q[s..e])
                    .map(|(p, kind)| (s + 1, p.clone(), *kind))
                    .collect()
            })
            .collect();
        let mut partial: Vec<Vec<Occ>> = vec![Vec::new()];
        for options in readings {
            partial = partial
                .into_iter()
                .flat_map(|prefix| {
                    options.iter().map(move |o| {
                        let mut next = prefix.clone();
                        next.push(o.clone());
                        next
                    })
                })
                .collect();
        }
        out.extend(partial);
    }
    out
}

/// All injections left → right that follow `adjacency`, found by trying
/// every ordered choice of distinct right nodes.
pub fn brute_force_injections(
    adjacency: &[Vec<usize>],
    right_count: usize,
) -> BTreeSet<Vec<usize>> {
    fn permute(
        k: usize,
        right_count: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for r in 0..right_count {
            if !used[r] {
                used[r] = true;
                cur.push(r);
                permute(k, right_count, used, cur, out);
                cur.pop();
                used[r] = false;
            }
        }
    }
    let mut all = Vec::new();
    permute(
        adjacency.len(),
        right_count,
        &mut vec![false; right_count],
        &mut Vec::new(),
        &mut all,
    );
    all.into_iter()
        .filter(|choice| {
            choice
                .iter()
                .enumerate()
                .all(|(l, r)| adjacency[l].contains(r))
        })
        .collect()
}

/// Minimum-size edge subsets forming a tree that covers `required`.
pub fn brute_force_steiner(g: &FkGraph, required: &BTreeSet<RelId>) -> BTreeSet<BTreeSet<FkId>> {
    let m = g.edges.len();
    assert!(m <= 16);
    let mut best: Option<usize> = None;
    let mut out = BTreeSet::new();
    if required.is_empty() {
        return out;
    }
    for mask in 0u32..(1 << m) {
        let chosen: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let mut nodes: BTreeSet<RelId> = chosen
            .iter()
            .flat_map(|&i| [g.edges[i].a, g.edges[i].b])
            .collect();
        if chosen.is_empty() {
            nodes = required.clone();
            if nodes.len() != 1 {
                continue;
            }
        }
        if !required.is_subset(&nodes) || chosen.len() + 1 != nodes.len() {
            continue;
        }
        // union-find: a tree has no edge joining already-connected nodes
        let mut parent: Vec<usize> = (0..g.relation_count).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let root = find(p, p[x]);
                p[x] = root;
            }
            p[x]
        }
        let mut acyclic = true;
        for &i in &chosen {
            let (a, b) = (
                find(&mut parent, g.edges[i].a.0),
                find(&mut parent, g.edges[i].b.0),
            );
            if a == b {
                acyclic = false;
                break;
            }
            parent[a] = b;
        }
        if !acyclic {
            continue;
        }
        match best {
            Some(b) if chosen.len() > b => continue,
            Some(b) if chosen.len() < b => out.clear(),
            _ => {}
        }
        best = Some(chosen.len());
        out.insert(chosen.iter().map(|&i| g.edges[i].fk).collect());
    }
    out
}

/// A random small tokenizer fixture: schema/lexicon texts, the extensions,
/// and a question.
pub struct TokenizerFixture {
    pub schema: String,
    pub lexicon: String,
    pub stop_extra: Vec<String>,
    pub wh_extra: Vec<String>,
    pub words: Vec<String>,
}

const VOCAB: [&str; 10] = [
    "cat", "cats", "run", "running", "the", "what", "red", "x", "y", "in",
];

pub fn random_tokenizer_fixture<R: Rng>(rng: &mut R, max_len: usize) -> TokenizerFixture {
    let pick = |rng: &mut R| VOCAB.choose(rng).unwrap().to_string();
    let mut entries = Vec::new();
    for i in 0..rng.gen_range(0..7) {
        let len = rng.gen_range(1..=3);
        let phrase: Vec<String> = (0..len).map(|_| pick(rng)).collect();
        let element = if rng.gen_bool(0.3) {
            r#"{"kind": "relation", "relation": "r"}"#.to_string()
        } else {
            format!(r#"{{"kind": "value", "relation": "r", "attribute": "t", "literal": "v{i}"}}"#)
        };
        entries.push(format!(
            r#"{{"phrase": {}, "element": {element}}}"#,
            serde_json::to_string(&phrase).unwrap()
        ));
    }
    let stop_extra: Vec<String> = (0..rng.gen_range(0..2)).map(|_| pick(rng)).collect();
    let wh_extra: Vec<String> = if rng.gen_bool(0.2) {
        vec!["red x".to_string()]
    } else {
        Vec::new()
    };
    let lexicon = format!(
        r#"{{"stop_extra": {}, "wh_extra": {}, "entries": [{}]}}"#,
        serde_json::to_string(&stop_extra).unwrap(),
        serde_json::to_string(&wh_extra).unwrap(),
        entries.join(",")
    );
    let n = rng.gen_range(1..=max_len);
    TokenizerFixture {
        schema: r#"{"relations": [{"name": "r", "attributes": [{"name": "t", "key": true}]}]}"#
            .to_string(),
        lexicon,
        stop_extra,
        wh_extra,
        words: (0..n).map(|_| pick(rng)).collect(),
    }
}

pub fn random_adjacency<R: Rng>(
    rng: &mut R,
    max_left: usize,
    max_right: usize,
) -> (Vec<Vec<usize>>, usize) {
    let right = rng.gen_range(1..=max_right);
    let left = rng.gen_range(0..=max_left);
    let density = rng.gen_range(0.2..0.9);
    let adjacency = (0..left)
        .map(|_| (0..right).filter(|_| rng.gen_bool(density)).collect())
        .collect();
    (adjacency, right)
}

pub fn random_graph<R: Rng>(rng: &mut R, max_edges: usize) -> (FkGraph, BTreeSet<RelId>) {
    use precise_core::schema::FkEdge;
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=max_edges);
    let edges = (0..m)
        .map(|i| FkEdge {
            fk: FkId(i),
            a: RelId(rng.gen_range(0..n)),
            b: RelId(rng.gen_range(0..n)),
        })
        .collect();
    let k = rng.gen_range(1..=n.min(4));
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let required = ids[..k].iter().map(|&i| RelId(i)).collect();
    (
        FkGraph {
            relation_count: n,
            edges,
        },
        required,
    )
}

/// Runs `count` random tokenizer fixtures; returns the mismatching cases.
pub fn tokenizer_discrepancies(seed: u64, count: usize, max_len: usize) -> Vec<String> {
    use precise_core::lexicon::LexiconFile;
    use precise_core::schema::ElementStore;
    use precise_core::tokenizer::{enumerate_assignments, normalize};
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for case in 0..count {
        let fx = random_tokenizer_fixture(&mut rng, max_len);
        let file = LexiconFile::parse(&fx.lexicon).unwrap();
        let store = ElementStore::load(&fx.schema, &file.value_decls().unwrap()).unwrap();
        let lex = Lexicon::build(&file, &store).unwrap();
        let q = normalize(&fx.words.join(" ")).unwrap();
        let got: Vec<Vec<Occ>> = enumerate_assignments(&q, &lex).iter().map(occ_of).collect();
        let got_set: BTreeSet<Vec<Occ>> = got.iter().cloned().collect();
        let expected = brute_force_assignments(&fx.words, &lex, &fx.stop_extra, &fx.wh_extra);
        if got_set != expected || got_set.len() != got.len() {
            bad.push(format!("case {case}: {:?} with {}", fx.words, fx.lexicon));
        }
    }
    bad
}

pub fn matching_discrepancies(seed: u64, count: usize, max_left: usize) -> Vec<String> {
    use precise_core::matcher::enumerate_injections;
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for case in 0..count {
        let (adjacency, right) = random_adjacency(&mut rng, max_left, max_left + 1);
        let got = enumerate_injections(&adjacency, right);
        let got_set: BTreeSet<Vec<usize>> = got.iter().cloned().collect();
        if got_set != brute_force_injections(&adjacency, right) || got_set.len() != got.len() {
            bad.push(format!("case {case}: {adjacency:?} over {right}"));
        }
    }
    bad
}

pub fn steiner_discrepancies(seed: u64, count: usize, max_edges: usize) -> Vec<String> {
    use precise_core::sqlgen::enumerate_join_trees;
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for case in 0..count {
        let (g, required) = random_graph(&mut rng, max_edges);
        let trees = enumerate_join_trees(&g, &required);
        let got: BTreeSet<BTreeSet<FkId>> = trees.iter().map(|t| t.edges.clone()).collect();
        let structural = trees
            .iter()
            .all(|t| t.edges.len() + 1 == t.relations.len() && required.is_subset(&t.relations));
        if got != brute_force_steiner(&g, &required) || got.len() != trees.len() || !structural {
            bad.push(format!("case {case}: {g:?} required {required:?}"));
        }
    }
    bad
}
