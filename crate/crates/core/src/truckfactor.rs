//! Greedy truck factor.
//!
//! Repeatedly remove the developer who is expert on the most files until at
//! most half of the files still have a non-removed expert. The number of
//! removals is the truck factor.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::doe::FileKnowledge;
use crate::error::TruckFactorError;
use crate::identity::DeveloperId;

/// Coverage at or below this fraction stops the loop.
pub const STOP_COVERAGE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageStep {
    pub step: usize,
    pub coverage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TruckFactorResult {
    pub value: usize,
    pub removed_developers: Vec<DeveloperId>,
    pub coverage_trace: Vec<CoverageStep>,
}

/// Fraction of `files` that keep at least one expert outside `removed`.
pub fn coverage(files: &[&FileKnowledge], removed: &BTreeSet<DeveloperId>) -> f64 {
    if files.is_empty() {
        return 0.0;
    }
    let covered = files
        .iter()
        .filter(|f| f.experts.iter().any(|d| !removed.contains(d)))
        .count();
    covered as f64 / files.len() as f64
}

#[derive(Default)]
struct Standing {
    files: usize,
    doe_sum: f64,
}

fn standings<'a>(
    files: &[&'a FileKnowledge],
    removed: &BTreeSet<DeveloperId>,
) -> BTreeMap<&'a DeveloperId, Standing> {
    let mut out: BTreeMap<&DeveloperId, Standing> = BTreeMap::new();
    for f in files {
        for d in &f.experts {
            if !removed.contains(d) {
                out.entry(d).or_default().files += 1;
            }
        }
    }
    for f in files {
        for e in &f.entries {
            if let Some(s) = out.get_mut(&e.developer_id) {
                s.doe_sum += e.doe;
            }
        }
    }
    out
}

/// The non-removed developer who is expert on the most files. Ties go to the
/// higher DOE sum over `files`, then to the smaller id.
pub fn select_top_author(
    files: &[&FileKnowledge],
    removed: &BTreeSet<DeveloperId>,
) -> Result<DeveloperId, TruckFactorError> {
    standings(files, removed)
        .into_iter()
        .max_by(|(da, a), (db, b)| {
            a.files
                .cmp(&b.files)
                .then(a.doe_sum.total_cmp(&b.doe_sum))
                .then_with(|| db.cmp(da))
        })
        .map(|(d, _)| d.clone())
        .ok_or(TruckFactorError::NoExpertsLeft)
}

pub fn compute_truck_factor(files: &[&FileKnowledge]) -> TruckFactorResult {
    let mut removed = BTreeSet::new();
    let mut order = Vec::new();
    let mut trace = Vec::new();
    loop {
        let cov = coverage(files, &removed);
        trace.push(CoverageStep {
            step: order.len(),
            coverage: cov,
        });
        if cov <= STOP_COVERAGE {
            break;
        }
        // coverage > 0 guarantees a surviving expert
        let top = select_top_author(files, &removed).expect("covered file has an expert");
        removed.insert(top.clone());
        order.push(top);
    }
    TruckFactorResult {
        value: order.len(),
        removed_developers: order,
        coverage_trace: trace,
    }
}
