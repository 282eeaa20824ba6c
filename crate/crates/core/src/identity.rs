//! Developer identity resolution.
//!
//! Raw `(name, email)` author pairs are grouped when they share a lowercased
//! email. An optional alias file adds manual merges on top of that rule.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::MiningError;

/// Canonical developer id, stable within one analysis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeveloperId(String);

impl DeveloperId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeveloperId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DeveloperId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// An author signature exactly as it appears in a commit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RawAuthor {
    pub name: String,
    pub email: String,
}

impl RawAuthor {
    pub fn new(name: impl Into<String>, email: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            email: email.into(),
        }
    }

    /// Grouping key: the lowercased email, or the lowercased name when the
    /// signature carries no email.
    fn key(&self) -> String {
        let email = self.email.trim().to_lowercase();
        if email.is_empty() {
            format!("name:{}", self.name.trim().to_lowercase())
        } else {
            email
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeveloperIdentity {
    pub id: DeveloperId,
    pub display_name: String,
    pub email: String,
    pub aliases: BTreeSet<RawAuthor>,
}

/// One `canonical_email <- alias_email` rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasRule {
    pub canonical: String,
    pub alias: String,
}

/// Parses an alias-override file. Blank lines and `#` comments are ignored.
pub fn parse_alias_rules(text: &str) -> Result<Vec<AliasRule>, MiningError> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: &str| MiningError::AliasFile {
            line: i + 1,
            reason: reason.to_string(),
        };
        let (canonical, alias) = line
            .split_once("<-")
            .ok_or_else(|| err("expected `canonical_email <- alias_email`"))?;
        let (canonical, alias) = (canonical.trim(), alias.trim());
        if canonical.is_empty() || alias.is_empty() {
            return Err(err("empty email"));
        }
        rules.push(AliasRule {
            canonical: canonical.to_lowercase(),
            alias: alias.to_lowercase(),
        });
    }
    Ok(rules)
}

/// Partition of raw authors into developer identities.
#[derive(Clone, Debug, Default)]
pub struct IdentityMap {
    identities: Vec<DeveloperIdentity>,
    by_raw: HashMap<RawAuthor, usize>,
    by_id: HashMap<DeveloperId, usize>,
}

impl IdentityMap {
    pub fn resolve(&self, raw: &RawAuthor) -> Option<&DeveloperIdentity> {
        self.by_raw.get(raw).map(|&i| &self.identities[i])
    }

    pub fn get(&self, id: &DeveloperId) -> Option<&DeveloperIdentity> {
        self.by_id.get(id).map(|&i| &self.identities[i])
    }

    /// Identities ordered by canonical id.
    pub fn iter(&self) -> impl Iterator<Item = &DeveloperIdentity> {
        self.identities.iter()
    }

    pub fn len(&self) -> usize {
        self.identities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.identities.is_empty()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Groups raw authors into identities.
///
/// `authors` maps each raw signature to the number of commits it authored;
/// the most frequent signature of a group supplies its display name and email.
/// The canonical id is the smallest override target in the group if any rule
/// applies, else the smallest grouping key.
pub fn resolve_identities(
    authors: &BTreeMap<RawAuthor, usize>,
    rules: &[AliasRule],
) -> IdentityMap {
    let mut keys: BTreeMap<String, usize> = BTreeMap::new();
    for raw in authors.keys() {
        let n = keys.len();
        keys.entry(raw.key()).or_insert(n);
    }
    let mut canonical_targets = BTreeSet::new();
    for rule in rules {
        for k in [&rule.canonical, &rule.alias] {
            let n = keys.len();
            keys.entry(k.clone()).or_insert(n);
        }
        canonical_targets.insert(rule.canonical.clone());
    }

    let mut uf = UnionFind((0..keys.len()).collect());
    for rule in rules {
        uf.union(keys[&rule.canonical], keys[&rule.alias]);
    }

    let mut target_of_root: BTreeMap<usize, String> = BTreeMap::new();
    for target in &canonical_targets {
        let root = uf.find(keys[target]);
        target_of_root.entry(root).or_insert_with(|| target.clone());
    }
    let mut groups: BTreeMap<usize, (Option<String>, Vec<&RawAuthor>)> = BTreeMap::new();
    for raw in authors.keys() {
        let root = uf.find(keys[&raw.key()]);
        let group = groups.entry(root).or_default();
        group.0 = target_of_root.get(&root).cloned();
        group.1.push(raw);
    }

    let mut identities: Vec<DeveloperIdentity> = groups
        .into_values()
        .map(|(canonical, members)| {
            let id = canonical.unwrap_or_else(|| {
                members.iter().map(|m| m.key()).min().expect("non-empty group")
            });
            let primary = members
                .iter()
                .copied()
                .max_by(|a, b| authors[*a].cmp(&authors[*b]).then_with(|| b.cmp(a)))
                .expect("non-empty group");
            DeveloperIdentity {
                id: DeveloperId::new(id),
                display_name: primary.name.clone(),
                email: primary.email.clone(),
                aliases: members.into_iter().cloned().collect(),
            }
        })
        .collect();
    identities.sort_by(|a, b| a.id.cmp(&b.id));

    let mut by_raw = HashMap::new();
    let mut by_id = HashMap::new();
    for (i, ident) in identities.iter().enumerate() {
        by_id.insert(ident.id.clone(), i);
        for raw in &ident.aliases {
            by_raw.insert(raw.clone(), i);
        }
    }
    IdentityMap {
        identities,
        by_raw,
        by_id,
    }
}
