//! Expected values computed outside this workspace (40-digit mpmath
//! evaluation of the expertise model) and a naive greedy truck factor
//! simulator that shares no code with the library.

/// `(adds, fa, num_days, size, doe)` reference evaluations.
pub const DOE_CASES: &[(u64, bool, u64, u64, f64)] = &[
    (0, false, 0, 1, 5.28223),
    (100, true, 0, 100, 5.3887088801755900942),
    (0, false, 364, 1000, 2.1496714391726918875),
];

/// `(developer, path, doe, normalized_doe)` on the standard fixture.
pub const STANDARD_DOE: &[(&str, &str, f64, f64)] = &[
    ("alice@example.com", "README.md", 4.6232367266115033, 0.95986782155068367),
    ("bob@example.com", "README.md", 4.8165347590698285, 1.0),
    ("alice@example.com", "docs/guide.md", 3.7502674266162539, 0.91222734655692768),
    ("carol@example.com", "docs/guide.md", 4.111110504164455, 1.0),
    ("alice@example.com", "src/core.rs", 3.9725211294106602, 1.0),
    ("bob@example.com", "src/core.rs", 3.7078977945860389, 0.93338655070567761),
    ("carol@example.com", "src/core.rs", 2.8245040380186804, 0.71101045054421325),
    ("alice@example.com", "src/helpers.rs", 4.2762336605558533, 1.0),
    ("carol@example.com", "src/helpers.rs", 3.6109553220573205, 0.84442423138962535),
    ("bob@example.com", "src/net/client.rs", 4.283329281818413, 1.0),
    ("carol@example.com", "src/net/client.rs", 3.7010252044275883, 0.86405339419909887),
    ("carol@example.com", "src/net/proto.rs", 4.4319667350118368, 1.0),
];

/// `(path, importance_score, experts)` on the standard fixture.
pub const STANDARD_FILE_SCORES: &[(&str, f64, &[&str])] = &[
    ("README.md", 9.4397714856813317, &["alice@example.com", "bob@example.com"]),
    ("docs/guide.md", 7.8613779307807089, &["alice@example.com", "carol@example.com"]),
    ("src/core.rs", 10.504922962015379, &["alice@example.com", "bob@example.com"]),
    ("src/helpers.rs", 7.8871889826131739, &["alice@example.com", "carol@example.com"]),
    ("src/net/client.rs", 7.9843544862460013, &["bob@example.com", "carol@example.com"]),
    ("src/net/proto.rs", 4.4319667350118368, &["carol@example.com"]),
];

/// `(node path, truck factor, removal order)` for every node of the standard
/// fixture's tree. The root is `""`.
pub const STANDARD_TREE_TF: &[(&str, usize, &[&str])] = &[
    ("", 2, &["carol@example.com", "alice@example.com"]),
    ("README.md", 2, &["bob@example.com", "alice@example.com"]),
    ("docs", 2, &["carol@example.com", "alice@example.com"]),
    ("docs/guide.md", 2, &["carol@example.com", "alice@example.com"]),
    ("src", 2, &["carol@example.com", "alice@example.com"]),
    ("src/core.rs", 2, &["alice@example.com", "bob@example.com"]),
    ("src/helpers.rs", 2, &["alice@example.com", "carol@example.com"]),
    ("src/net", 1, &["carol@example.com"]),
    ("src/net/client.rs", 2, &["bob@example.com", "carol@example.com"]),
    ("src/net/proto.rs", 1, &["carol@example.com"]),
];

/// `(developer, days before reference, active)`.
pub const STANDARD_ACTIVITY: &[(&str, i64, bool)] = &[
    ("alice@example.com", 365, true),
    ("bob@example.com", 10, true),
    ("carol@example.com", 400, false),
];

/// One contributor of a simulated file.
#[derive(Clone, Debug)]
pub struct SimEntry {
    pub developer: String,
    pub doe: f64,
    pub expert: bool,
}

/// Plays the greedy loop one step at a time, recounting everything from
/// scratch. Returns the removal order.
pub fn simulate_truck_factor(files: &[Vec<SimEntry>]) -> Vec<String> {
    let mut removed: Vec<String> = Vec::new();
    loop {
        let mut alive = 0usize;
        for f in files {
            if f.iter().any(|e| e.expert && !removed.contains(&e.developer)) {
                alive += 1;
            }
        }
        if files.is_empty() || 2 * alive <= files.len() {
            return removed;
        }

        let mut candidates: Vec<String> = Vec::new();
        for f in files {
            for e in f {
                if e.expert && !removed.contains(&e.developer) && !candidates.contains(&e.developer) {
                    candidates.push(e.developer.clone());
                }
            }
        }
        let mut best: Option<(usize, f64, String)> = None;
        for c in candidates {
            let mut count = 0;
            let mut sum = 0.0;
            for f in files {
                for e in f {
                    if e.developer == c {
                        sum += e.doe;
                        if e.expert {
                            count += 1;
                        }
                    }
                }
            }
            let better = match &best {
                None => true,
                Some((bc, bs, bid)) => {
                    count > *bc
                        || (count == *bc && sum > *bs)
                        || (count == *bc && sum == *bs && c < *bid)
                }
            };
            if better {
                best = Some((count, sum, c));
            }
        }
        removed.push(best.expect("a covered file has an expert").2);
    }
}
