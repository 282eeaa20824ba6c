//! Degree of Expertise (DOE): a linear model over lines added, first
//! authorship, recency and file size.
//!
//! ```text
//! DOE = 5.28223 + 0.23173·ln(1 + adds) + 0.36151·fa
//!               - 0.19421·ln(1 + numDays) - 0.28761·ln(size)
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::DoeError;
use crate::identity::DeveloperId;
use crate::miner::{ContributionFact, FileRecord};

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DoeCoefficients {
    pub intercept: f64,
    pub adds_coef: f64,
    pub fa_coef: f64,
    /// Subtracted.
    pub num_days_coef: f64,
    /// Subtracted.
    pub size_coef: f64,
}

impl Default for DoeCoefficients {
    fn default() -> Self {
        Self {
            intercept: 5.28223,
            adds_coef: 0.23173,
            fa_coef: 0.36151,
            num_days_coef: 0.19421,
            size_coef: 0.28761,
        }
    }
}

/// Normalized-DOE cutoff at or above which a contributor is a file expert.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ExpertThreshold(f64);

impl ExpertThreshold {
    pub const DEFAULT: ExpertThreshold = ExpertThreshold(0.75);

    pub fn new(value: f64) -> Result<Self, DoeError> {
        if value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(DoeError::Threshold(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for ExpertThreshold {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<f64> for ExpertThreshold {
    type Error = DoeError;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ExpertThreshold> for f64 {
    fn from(t: ExpertThreshold) -> f64 {
        t.0
    }
}

pub fn compute_doe(
    adds: u64,
    first_authorship: bool,
    num_days: u64,
    size: u64,
    coeffs: &DoeCoefficients,
) -> Result<f64, DoeError> {
    if size < 1 {
        return Err(DoeError::Domain(size));
    }
    let fa = if first_authorship { 1.0 } else { 0.0 };
    Ok(coeffs.intercept + coeffs.adds_coef * (adds as f64).ln_1p() + coeffs.fa_coef * fa
        - coeffs.num_days_coef * (num_days as f64).ln_1p()
        - coeffs.size_coef * (size as f64).ln())
}

/// Whole days from `last_ts` to `reference_ts`, floored, never negative.
pub fn num_days(reference_ts: i64, last_ts: i64) -> u64 {
    (reference_ts.saturating_sub(last_ts).max(0) / SECONDS_PER_DAY) as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DoeEntry {
    pub developer_id: DeveloperId,
    pub path: String,
    pub adds: u64,
    pub first_authorship: bool,
    pub num_days: u64,
    pub doe: f64,
    pub normalized_doe: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FileKnowledge {
    pub path: String,
    pub loc: u64,
    /// Sorted by developer id.
    pub entries: Vec<DoeEntry>,
    pub experts: BTreeSet<DeveloperId>,
    pub importance_score: f64,
}

impl FileKnowledge {
    pub fn entry(&self, dev: &DeveloperId) -> Option<&DoeEntry> {
        self.entries
            .binary_search_by(|e| e.developer_id.cmp(dev))
            .ok()
            .map(|i| &self.entries[i])
    }
}

/// Fills `normalized_doe` relative to the per-file maximum. Non-positive
/// values normalize to 0.
pub fn normalize(entries: &mut [DoeEntry]) {
    let max = entries.iter().map(|e| e.doe).fold(f64::NEG_INFINITY, f64::max);
    for e in entries.iter_mut() {
        e.normalized_doe = if max > 0.0 && e.doe > 0.0 {
            e.doe / max
        } else {
            0.0
        };
    }
}

/// Developers whose normalized DOE reaches `threshold`. The developers tied at
/// the file's maximum DOE always qualify, so a non-empty entry list never
/// yields an empty expert set.
pub fn classify_experts(entries: &[DoeEntry], threshold: ExpertThreshold) -> BTreeSet<DeveloperId> {
    let max = entries.iter().map(|e| e.doe).fold(f64::NEG_INFINITY, f64::max);
    entries
        .iter()
        .filter(|e| e.doe == max || (e.doe > 0.0 && e.normalized_doe >= threshold.value()))
        .map(|e| e.developer_id.clone())
        .collect()
}

/// Scores every contributor of one file.
pub fn score_file(
    file: &FileRecord,
    facts: &[&ContributionFact],
    reference_ts: i64,
    coeffs: &DoeCoefficients,
    threshold: ExpertThreshold,
) -> Result<FileKnowledge, DoeError> {
    let mut entries = facts
        .iter()
        .map(|f| {
            let days = num_days(reference_ts, f.last_commit_ts);
            Ok(DoeEntry {
                developer_id: f.developer_id.clone(),
                path: file.path.clone(),
                adds: f.adds,
                first_authorship: f.first_authorship,
                num_days: days,
                doe: compute_doe(f.adds, f.first_authorship, days, file.loc, coeffs)?,
                normalized_doe: 0.0,
            })
        })
        .collect::<Result<Vec<_>, DoeError>>()?;
    entries.sort_by(|a, b| a.developer_id.cmp(&b.developer_id));
    normalize(&mut entries);
    let experts = classify_experts(&entries, threshold);
    let importance_score = entries.iter().map(|e| e.doe).sum();
    Ok(FileKnowledge {
        path: file.path.clone(),
        loc: file.loc,
        entries,
        experts,
        importance_score,
    })
}

/// Scores every file; `facts` may be in any order.
pub fn score_files(
    files: &[FileRecord],
    facts: &[ContributionFact],
    reference_ts: i64,
    coeffs: &DoeCoefficients,
    threshold: ExpertThreshold,
) -> Result<Vec<FileKnowledge>, DoeError> {
    let mut by_path: std::collections::HashMap<&str, Vec<&ContributionFact>> =
        std::collections::HashMap::new();
    for f in facts {
        by_path.entry(f.path.as_str()).or_default().push(f);
    }
    files
        .iter()
        .map(|file| {
            let file_facts = by_path.get(file.path.as_str()).map_or(&[][..], |v| &v[..]);
            score_file(file, file_facts, reference_ts, coeffs, threshold)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(dev: &str, doe: f64) -> DoeEntry {
        DoeEntry {
            developer_id: dev.into(),
            path: "f".into(),
            adds: 0,
            first_authorship: false,
            num_days: 0,
            doe,
            normalized_doe: 0.0,
        }
    }

    fn entries(does: &[(&str, f64)]) -> Vec<DoeEntry> {
        let mut v: Vec<_> = does.iter().map(|(d, x)| entry(d, *x)).collect();
        normalize(&mut v);
        v
    }

    fn ids(v: &[&str]) -> BTreeSet<DeveloperId> {
        v.iter().map(|s| DeveloperId::from(*s)).collect()
    }

    #[test]
    fn intercept_only_case_is_exact() {
        let c = DoeCoefficients::default();
        assert_eq!(compute_doe(0, false, 0, 1, &c).unwrap(), 5.28223);
    }

    #[test]
    fn zero_size_is_a_domain_error() {
        assert_eq!(
            compute_doe(3, true, 0, 0, &DoeCoefficients::default()),
            Err(DoeError::Domain(0))
        );
    }

    #[test]
    fn threshold_bounds() {
        assert!(ExpertThreshold::new(0.0).is_err());
        assert!(ExpertThreshold::new(1.5).is_err());
        assert!(ExpertThreshold::new(f64::NAN).is_err());
        assert!(ExpertThreshold::new(1.0).is_ok());
        assert!(serde_json::from_str::<ExpertThreshold>("1.2").is_err());
    }

    #[test]
    fn days_are_floored() {
        assert_eq!(num_days(10 * SECONDS_PER_DAY, 0), 10);
        assert_eq!(num_days(10 * SECONDS_PER_DAY - 1, 0), 9);
        assert_eq!(num_days(0, 5), 0);
    }

    #[test]
    fn half_value_falls_below_default_threshold() {
        let e = entries(&[("a", 4.0), ("b", 2.0)]);
        assert_eq!(e[0].normalized_doe, 1.0);
        assert_eq!(e[1].normalized_doe, 0.5);
        assert_eq!(classify_experts(&e, ExpertThreshold::DEFAULT), ids(&["a"]));
    }

    #[test]
    fn threshold_comparison_is_inclusive() {
        let e = entries(&[("a", 1.0), ("b", 0.8), ("c", 0.4)]);
        assert_eq!(classify_experts(&e, ExpertThreshold::DEFAULT), ids(&["a", "b"]));
        let e = entries(&[("a", 4.0), ("b", 3.0)]);
        assert_eq!(classify_experts(&e, ExpertThreshold::DEFAULT), ids(&["a", "b"]));
    }

    #[test]
    fn threshold_one_keeps_only_ties_at_max() {
        let e = entries(&[("a", 3.0), ("b", 3.0), ("c", 2.999)]);
        let t = ExpertThreshold::new(1.0).unwrap();
        assert_eq!(classify_experts(&e, t), ids(&["a", "b"]));
    }

    #[test]
    fn equal_values_are_all_experts() {
        let e = entries(&[("a", 2.5), ("b", 2.5), ("c", 2.5)]);
        for t in [0.01, 0.5, 1.0] {
            let t = ExpertThreshold::new(t).unwrap();
            assert_eq!(classify_experts(&e, t).len(), 3);
        }
    }

    #[test]
    fn non_positive_values_never_qualify_unless_max() {
        let e = entries(&[("a", 3.0), ("b", -0.5), ("c", 0.0)]);
        assert_eq!(e[1].normalized_doe, 0.0);
        assert_eq!(e[2].normalized_doe, 0.0);
        assert_eq!(classify_experts(&e, ExpertThreshold::new(0.001).unwrap()), ids(&["a"]));

        let e = entries(&[("a", -1.0), ("b", -2.0)]);
        assert_eq!(classify_experts(&e, ExpertThreshold::DEFAULT), ids(&["a"]));
    }

    #[test]
    fn single_contributor_is_sole_expert() {
        let file = FileRecord {
            path: "f.rs".into(),
            loc: 20,
            creator_id: "a".into(),
            renamed_from: vec![],
        };
        let fact = ContributionFact {
            developer_id: "a".into(),
            path: "f.rs".into(),
            adds: 20,
            first_authorship: true,
            last_commit_ts: 0,
        };
        let k = score_file(&file, &[&fact], 0, &DoeCoefficients::default(), ExpertThreshold::DEFAULT)
            .unwrap();
        assert_eq!(k.entries[0].normalized_doe, 1.0);
        assert_eq!(k.experts, ids(&["a"]));
        assert_eq!(k.importance_score, k.entries[0].doe);
    }
}
