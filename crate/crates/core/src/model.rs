//! JSON model files.
//!
//! ```json
//! {
//!   "d": 2,
//!   "tree": [{"id": "r"}, {"id": "u", "parent": "r"}, {"id": "m", "parent": "r"}],
//!   "prices": {"r": ["10", "1"], "u": ["12", "1"], "m": ["9", "1"]},
//!   "k": "1/20",
//!   "payoff": {"u": ["1", "-10"]},
//!   "exercise": "european",
//!   "options": {"asset": 2, "convention": "standard"}
//! }
//! ```
//!
//! `pi` (a `d × d` matrix per node) may replace `prices` and `k`. Nodes
//! missing from `payoff` pay nothing. `exercise` is `"american"`,
//! `"european"`, `{"bermudan": [dates]}` or a map from node id to bool.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::market::{EventTree, Market, Matrix};
use crate::policy::{make_american, make_bermudan, make_european, ExercisePolicy, PayoffProcess};
use crate::rational::{from_json, Vector};
use crate::seller::Convention;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    id: String,
    #[serde(default)]
    parent: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ExerciseEntry {
    Named(String),
    Bermudan { bermudan: Vec<usize> },
    Nodes(BTreeMap<String, bool>),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OptionsEntry {
    asset: Option<usize>,
    convention: Option<String>,
    cap: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    d: usize,
    tree: Vec<NodeEntry>,
    #[serde(default)]
    pi: Option<BTreeMap<String, Vec<Vec<Value>>>>,
    #[serde(default)]
    prices: Option<BTreeMap<String, Vec<Value>>>,
    #[serde(default)]
    k: Option<Value>,
    #[serde(default)]
    payoff: BTreeMap<String, Vec<Value>>,
    exercise: ExerciseEntry,
    #[serde(default)]
    options: OptionsEntry,
}

/// A parsed model with its default options.
#[derive(Clone, Debug)]
pub struct Model {
    pub market: Market,
    pub payoff: PayoffProcess,
    pub policy: ExercisePolicy,
    /// Zero-based index of the pricing asset.
    pub asset: usize,
    pub convention: Convention,
    pub cap: Option<usize>,
}

pub fn parse_convention(s: &str) -> Result<Convention> {
    match s {
        "standard" => Ok(Convention::Standard),
        "interchanged" => Ok(Convention::Interchanged),
        _ => Err(Error::Parse(format!("unknown convention `{s}` (expected standard or interchanged)"))),
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidModel(msg)
}

fn vector(values: &[Value], d: usize, what: &str) -> Result<Vector> {
    if values.len() != d {
        return Err(invalid(format!("{what}: expected {d} entries, found {}", values.len())));
    }
    values
        .iter()
        .enumerate()
        .map(|(j, v)| from_json(v).map_err(|e| invalid(format!("{what}, entry {}: {e}", j + 1))))
        .collect()
}

/// Checks that every key names a node.
fn known_ids<T>(tree: &EventTree, map: &BTreeMap<String, T>, field: &str) -> Result<()> {
    match map.keys().find(|id| tree.index_of(id).is_none()) {
        Some(id) => Err(invalid(format!("`{field}` refers to unknown node `{id}`"))),
        None => Ok(()),
    }
}

fn per_node<'a, T>(tree: &EventTree, map: &'a BTreeMap<String, T>, field: &str) -> Result<Vec<&'a T>> {
    known_ids(tree, map, field)?;
    (0..tree.len())
        .map(|k| map.get(tree.id(k)).ok_or_else(|| invalid(format!("`{field}` is missing node `{}`", tree.id(k)))))
        .collect()
}

impl Model {
    pub fn from_json_str(text: &str) -> Result<Model> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let d = file.d;
        if d == 0 {
            return Err(invalid("`d` must be positive".into()));
        }
        let spec: Vec<(String, Option<String>)> = file.tree.into_iter().map(|n| (n.id, n.parent)).collect();
        let tree = EventTree::new(&spec)?;
        let market = match (file.pi, file.prices, file.k) {
            (Some(pi), None, None) => {
                let mats = per_node(&tree, &pi, "pi")?
                    .into_iter()
                    .enumerate()
                    .map(|(k, rows)| {
                        if rows.len() != d {
                            return Err(invalid(format!("pi at `{}`: expected {d} rows", tree.id(k))));
                        }
                        rows.iter()
                            .enumerate()
                            .map(|(r, row)| vector(row, d, &format!("pi at `{}`, row {}", tree.id(k), r + 1)))
                            .collect::<Result<Matrix>>()
                    })
                    .collect::<Result<Vec<Matrix>>>()?;
                Market::new(tree, mats)?
            }
            (None, Some(prices), Some(k)) => {
                let k = from_json(&k).map_err(|e| invalid(format!("k: {e}")))?;
                let ps = per_node(&tree, &prices, "prices")?
                    .into_iter()
                    .enumerate()
                    .map(|(n, p)| vector(p, d, &format!("prices at `{}`", tree.id(n))))
                    .collect::<Result<Vec<Vector>>>()?;
                Market::from_prices(tree, &ps, &k)?
            }
            _ => return Err(invalid("give either `pi` or both `prices` and `k`".into())),
        };
        let tree = &market.tree;
        known_ids(tree, &file.payoff, "payoff")?;
        let xi = (0..tree.len())
            .map(|k| match file.payoff.get(tree.id(k)) {
                Some(v) => vector(v, d, &format!("payoff at `{}`", tree.id(k))),
                None => Ok(vec![num_traits::Zero::zero(); d]),
            })
            .collect::<Result<Vec<Vector>>>()?;
        let policy = match file.exercise {
            ExerciseEntry::Named(s) if s == "american" => make_american(tree),
            ExerciseEntry::Named(s) if s == "european" => make_european(tree),
            ExerciseEntry::Named(s) => return Err(invalid(format!("unknown exercise style `{s}`"))),
            ExerciseEntry::Bermudan { bermudan } => make_bermudan(tree, &bermudan)?,
            ExerciseEntry::Nodes(map) => {
                known_ids(tree, &map, "exercise")?;
                ExercisePolicy::new((0..tree.len()).map(|k| map.get(tree.id(k)).copied().unwrap_or(false)).collect())
            }
        };
        let problems = crate::policy::validate_policy(tree, &policy);
        if !problems.is_empty() {
            return Err(invalid(format!("exercise policy: {}", problems.join("; "))));
        }
        let asset = match file.options.asset {
            None => d - 1,
            Some(a) if (1..=d).contains(&a) => a - 1,
            Some(a) => return Err(invalid(format!("options.asset must be between 1 and {d}, found {a}"))),
        };
        let convention = match &file.options.convention {
            None => Convention::Standard,
            Some(s) => parse_convention(s)?,
        };
        Ok(Model { market, payoff: PayoffProcess::new(xi), policy, asset, convention, cap: file.options.cap })
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Model::from_json_str(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            Error::InvalidModel(m) => Error::InvalidModel(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
