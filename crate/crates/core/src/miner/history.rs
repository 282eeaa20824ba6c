//! Rename-following history walk.
//!
//! Commits are replayed parents-first. Every path of every replayed commit is
//! bound to a *lineage*: the identity of one file across renames. A lineage
//! starts where a path is added, survives renames, and ends where the path is
//! deleted. When a merge sees the same path carried by two different lineages
//! on its parents, the lineages are unified.

use std::collections::{BTreeMap, HashMap};

use git2::{Commit, Delta, Diff, DiffFindOptions, DiffOptions, Oid, Patch, Repository, Sort};

use super::Checkout;
use crate::error::MiningError;
use crate::identity::RawAuthor;

/// Rename detection similarity threshold, in percent.
pub const RENAME_SIMILARITY: u16 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawContribution {
    pub adds: u64,
    pub last_ts: i64,
}

/// History of one file present at the analyzed version.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileHistory {
    pub creator: RawAuthor,
    /// Earlier paths, oldest first.
    pub renamed_from: Vec<String>,
    pub contributions: BTreeMap<RawAuthor, RawContribution>,
}

#[derive(Clone, Debug)]
pub struct HistoryWalk {
    /// Commits authored per raw signature, merges included.
    pub authors: BTreeMap<RawAuthor, usize>,
    pub commit_count: usize,
    pub head_ts: i64,
    /// Keyed by path at the analyzed version.
    pub files: BTreeMap<String, FileHistory>,
}

type PathState = HashMap<String, usize>;

struct Lineage {
    /// (topological position, author index) of the creating commit.
    creator: (usize, usize),
    names: Vec<(usize, String)>,
    contributions: HashMap<usize, RawContribution>,
}

#[derive(Default)]
struct Lineages {
    items: Vec<Lineage>,
    parent: Vec<usize>,
}

impl Lineages {
    fn create(&mut self, name: &str, position: usize, author: usize) -> usize {
        let id = self.items.len();
        self.items.push(Lineage {
            creator: (position, author),
            names: vec![(position, name.to_string())],
            contributions: HashMap::new(),
        });
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn touch(&mut self, lineage: usize, author: usize, adds: u64, ts: i64) {
        self.items[lineage]
            .contributions
            .entry(author)
            .and_modify(|c| {
                c.adds += adds;
                c.last_ts = c.last_ts.max(ts);
            })
            .or_insert(RawContribution { adds, last_ts: ts });
    }
}

fn signature_author(commit: &Commit<'_>) -> RawAuthor {
    let sig = commit.author();
    RawAuthor::new(
        String::from_utf8_lossy(sig.name_bytes()).trim(),
        String::from_utf8_lossy(sig.email_bytes()).trim(),
    )
}

fn corrupt(msg: &str) -> MiningError {
    MiningError::CorruptHistory(git2::Error::from_str(msg))
}

fn delta_path(file: git2::DiffFile<'_>) -> Option<String> {
    file.path().map(|p| p.to_string_lossy().replace('\\', "/"))
}

fn commit_diff<'r>(
    repo: &'r Repository,
    parent: Option<&Commit<'_>>,
    commit: &Commit<'_>,
) -> Result<Diff<'r>, git2::Error> {
    let parent_tree = parent.map(|p| p.tree()).transpose()?;
    let tree = commit.tree()?;
    let mut opts = DiffOptions::new();
    opts.context_lines(0).ignore_submodules(true);
    let mut diff = repo.diff_tree_to_tree(parent_tree.as_ref(), Some(&tree), Some(&mut opts))?;
    let mut find = DiffFindOptions::new();
    find.renames(true).rename_threshold(RENAME_SIMILARITY);
    diff.find_similar(Some(&mut find))?;
    Ok(diff)
}

fn added_lines(diff: &Diff<'_>, idx: usize) -> Result<u64, git2::Error> {
    if diff.get_delta(idx).is_some_and(|d| d.flags().is_binary()) {
        return Ok(0);
    }
    Ok(match Patch::from_diff(diff, idx)? {
        Some(patch) => patch.line_stats()?.1 as u64,
        None => 0,
    })
}

/// Hands out a parent's path state, moving it out on its last use.
fn take_state(
    states: &mut HashMap<Oid, PathState>,
    pending: &mut HashMap<Oid, usize>,
    parent: Oid,
) -> Result<PathState, MiningError> {
    let left = pending
        .get_mut(&parent)
        .ok_or_else(|| corrupt("parent outside walk"))?;
    *left -= 1;
    if *left == 0 {
        states.remove(&parent)
    } else {
        states.get(&parent).cloned()
    }
    .ok_or_else(|| corrupt("parent replayed after child"))
}

/// Walks every commit reachable from the checkout's head.
pub fn walk_history(checkout: &Checkout) -> Result<HistoryWalk, MiningError> {
    let repo = checkout.repo();
    let mut revwalk = repo.revwalk()?;
    revwalk.set_sorting(Sort::TOPOLOGICAL | Sort::REVERSE)?;
    revwalk.push(checkout.head())?;
    let order: Vec<Oid> = revwalk.collect::<Result<_, _>>()?;

    let mut author_index: HashMap<RawAuthor, usize> = HashMap::new();
    let mut author_list: Vec<RawAuthor> = Vec::new();
    let mut author_commits: Vec<usize> = Vec::new();
    let mut pending: HashMap<Oid, usize> = HashMap::new();
    for oid in &order {
        let commit = repo.find_commit(*oid)?;
        for p in commit.parent_ids() {
            *pending.entry(p).or_default() += 1;
        }
        let raw = signature_author(&commit);
        let idx = *author_index.entry(raw.clone()).or_insert_with(|| {
            author_list.push(raw);
            author_commits.push(0);
            author_list.len() - 1
        });
        author_commits[idx] += 1;
    }

    let mut lineages = Lineages::default();
    let mut states: HashMap<Oid, PathState> = HashMap::new();
    for (position, oid) in order.iter().enumerate() {
        let commit = repo.find_commit(*oid)?;
        let author = author_index[&signature_author(&commit)];
        let ts = commit.author().when().seconds();
        let parent_ids: Vec<Oid> = commit.parent_ids().collect();

        let mut state = match parent_ids.first() {
            Some(p) => take_state(&mut states, &mut pending, *p)?,
            None => PathState::new(),
        };
        let mut others = Vec::with_capacity(parent_ids.len().saturating_sub(1));
        for p in parent_ids.iter().skip(1) {
            others.push(take_state(&mut states, &mut pending, *p)?);
        }
        let first_parent = parent_ids.first().map(|p| repo.find_commit(*p)).transpose()?;
        let diff = commit_diff(repo, first_parent.as_ref(), &commit)?;
        let is_merge = parent_ids.len() > 1;

        for (i, delta) in diff.deltas().enumerate() {
            let old = delta_path(delta.old_file());
            let new = delta_path(delta.new_file());
            let lineage = match delta.status() {
                Delta::Deleted => {
                    if let Some(old) = old {
                        state.remove(&old);
                    }
                    continue;
                }
                Delta::Added | Delta::Copied => {
                    let Some(new) = new else { continue };
                    let inherited = others.iter().find_map(|s| s.get(&new).copied());
                    let l = match inherited {
                        Some(l) if is_merge => l,
                        _ => {
                            let l = lineages.create(&new, position, author);
                            if is_merge {
                                // introduced by the merge itself: creator, no adds
                                lineages.touch(l, author, 0, ts);
                            }
                            l
                        }
                    };
                    state.insert(new, l);
                    l
                }
                Delta::Renamed => {
                    let (Some(old), Some(new)) = (old, new) else { continue };
                    let l = match state.remove(&old) {
                        Some(l) => l,
                        None => lineages.create(&old, position, author),
                    };
                    lineages.items[l].names.push((position, new.clone()));
                    state.insert(new, l);
                    l
                }
                _ => {
                    let Some(new) = new else { continue };
                    match state.get(&new) {
                        Some(&l) => l,
                        None => {
                            let l = lineages.create(&new, position, author);
                            state.insert(new, l);
                            l
                        }
                    }
                }
            };
            if !is_merge {
                let adds = added_lines(&diff, i)?;
                lineages.touch(lineage, author, adds, ts);
            }
        }

        for other in &others {
            for (path, &theirs) in other {
                if let Some(&ours) = state.get(path) {
                    lineages.union(ours, theirs);
                }
            }
        }

        if pending.get(oid).copied().unwrap_or(0) > 0 || *oid == checkout.head() {
            states.insert(*oid, state);
        }
    }

    let head_state = states
        .remove(&checkout.head())
        .ok_or_else(|| corrupt("head not replayed"))?;

    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for l in 0..lineages.items.len() {
        let root = lineages.find(l);
        members.entry(root).or_default().push(l);
    }

    let mut files = BTreeMap::new();
    for (path, lineage) in head_state {
        let root = lineages.find(lineage);
        let group = &members[&root];
        let creator = group
            .iter()
            .map(|&l| lineages.items[l].creator)
            .min()
            .expect("lineage group is non-empty");
        let mut names: Vec<(usize, String)> = group
            .iter()
            .flat_map(|&l| lineages.items[l].names.iter().cloned())
            .collect();
        names.sort();
        let mut renamed_from: Vec<String> = Vec::new();
        for (_, name) in names {
            if name != path && !renamed_from.contains(&name) {
                renamed_from.push(name);
            }
        }
        let mut contributions: BTreeMap<RawAuthor, RawContribution> = BTreeMap::new();
        for &l in group {
            for (&a, c) in &lineages.items[l].contributions {
                contributions
                    .entry(author_list[a].clone())
                    .and_modify(|e: &mut RawContribution| {
                        e.adds += c.adds;
                        e.last_ts = e.last_ts.max(c.last_ts);
                    })
                    .or_insert(*c);
            }
        }
        files.insert(
            path,
            FileHistory {
                creator: author_list[creator.1].clone(),
                renamed_from,
                contributions,
            },
        );
    }

    let head_ts = repo.find_commit(checkout.head())?.author().when().seconds();
    let authors = author_list.into_iter().zip(author_commits).collect();
    Ok(HistoryWalk {
        authors,
        commit_count: order.len(),
        head_ts,
        files,
    })
}
