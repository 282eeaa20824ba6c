//! Scripted git repositories for tests.
//!
//! Every commit gets an explicit author/committer date so that histories are
//! reproducible down to the commit hash.

use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

pub mod oracle;

pub const DAY: i64 = 86_400;

/// Author date of the head commit of [`standard_fixture`].
pub const REFERENCE_TS: i64 = 1_700_000_000;

#[derive(Clone, Copy, Debug)]
pub struct Author {
    pub name: &'static str,
    pub email: &'static str,
}

pub const ALICE: Author = Author {
    name: "Alice",
    email: "alice@example.com",
};
pub const BOB: Author = Author {
    name: "Bob",
    email: "bob@example.com",
};
pub const CAROL: Author = Author {
    name: "Carol",
    email: "carol@example.com",
};

pub struct FixtureRepo {
    dir: TempDir,
}

impl FixtureRepo {
    /// Creates an empty repository whose initial branch is `branch`.
    pub fn init(branch: &str) -> Self {
        let dir = tempfile::Builder::new()
            .prefix("tfscope-fixture")
            .tempdir()
            .expect("tempdir");
        let repo = Self { dir };
        repo.git(&["init", "-q", "-b", branch], None, 0);
        repo.git(&["config", "commit.gpgsign", "false"], None, 0);
        repo
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn url(&self) -> String {
        self.path().to_string_lossy().into_owned()
    }

    pub fn write(&self, rel: &str, content: impl AsRef<[u8]>) -> &Self {
        let p = self.path().join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).unwrap();
        }
        fs::write(p, content).unwrap();
        self
    }

    /// Writes `lines` numbered lines tagged with `tag`.
    pub fn write_lines(&self, rel: &str, tag: &str, lines: usize) -> &Self {
        self.write(rel, numbered(tag, 0, lines))
    }

    /// Appends `lines` new numbered lines to an existing file.
    pub fn append_lines(&self, rel: &str, tag: &str, lines: usize) -> &Self {
        let mut content = fs::read_to_string(self.path().join(rel)).unwrap();
        content.push_str(&numbered(tag, 0, lines));
        self.write(rel, content)
    }

    /// Drops the first `count` lines of a file.
    pub fn delete_lines(&self, rel: &str, count: usize) -> &Self {
        let content = fs::read_to_string(self.path().join(rel)).unwrap();
        let rest: String = content
            .split_inclusive('\n')
            .skip(count)
            .collect::<Vec<_>>()
            .concat();
        self.write(rel, rest)
    }

    pub fn mv(&self, from: &str, to: &str) -> &Self {
        if let Some(parent) = self.path().join(to).parent() {
            fs::create_dir_all(parent).unwrap();
        }
        self.git(&["mv", from, to], None, 0);
        self
    }

    pub fn rm(&self, rel: &str) -> &Self {
        self.git(&["rm", "-q", rel], None, 0);
        self
    }

    /// Stages everything and commits as `author` at unix time `ts`.
    pub fn commit(&self, author: Author, ts: i64, message: &str) -> String {
        self.git(&["add", "-A"], None, 0);
        self.git(
            &["commit", "-q", "--allow-empty", "-m", message],
            Some(author),
            ts,
        );
        self.head()
    }

    pub fn checkout_new(&self, branch: &str, start: &str) {
        self.git(&["checkout", "-q", "-b", branch, start], None, 0);
    }

    pub fn checkout(&self, branch: &str) {
        self.git(&["checkout", "-q", branch], None, 0);
    }

    /// Non-fast-forward merge of `branch` into the current branch.
    pub fn merge(&self, branch: &str, author: Author, ts: i64) -> String {
        self.git(
            &["merge", "-q", "--no-ff", "-m", &format!("Merge {branch}"), branch],
            Some(author),
            ts,
        );
        self.head()
    }

    pub fn head(&self) -> String {
        self.git(&["rev-parse", "HEAD"], None, 0).trim().to_string()
    }

    pub fn rev(&self, spec: &str) -> String {
        self.git(&["rev-parse", spec], None, 0).trim().to_string()
    }

    pub fn git(&self, args: &[&str], author: Option<Author>, ts: i64) -> String {
        let mut cmd = Command::new("git");
        cmd.args(args)
            .current_dir(self.path())
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("HOME", self.path())
            .env("GIT_AUTHOR_NAME", "fixture")
            .env("GIT_AUTHOR_EMAIL", "fixture@example.com")
            .env("GIT_COMMITTER_NAME", "fixture")
            .env("GIT_COMMITTER_EMAIL", "fixture@example.com");
        if let Some(a) = author {
            let date = format!("@{ts} +0000");
            cmd.env("GIT_AUTHOR_NAME", a.name)
                .env("GIT_AUTHOR_EMAIL", a.email)
                .env("GIT_COMMITTER_NAME", a.name)
                .env("GIT_COMMITTER_EMAIL", a.email)
                .env("GIT_AUTHOR_DATE", &date)
                .env("GIT_COMMITTER_DATE", &date);
        }
        let out = cmd.output().expect("git is installed");
        assert!(
            out.status.success(),
            "git {:?} failed: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    pub fn into_tempdir(self) -> TempDir {
        self.dir
    }
}

fn numbered(tag: &str, start: usize, count: usize) -> String {
    (start..start + count)
        .map(|i| format!("{tag} line {i}\n"))
        .collect()
}

/// Timestamp `days` days before [`REFERENCE_TS`].
pub fn days_before(days: i64) -> i64 {
    REFERENCE_TS - days * DAY
}

/// Bytes that trip the NUL-byte binary heuristic.
pub fn png_bytes() -> Vec<u8> {
    let mut v = vec![0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a, 0, 0, 0, 0x0d];
    v.extend_from_slice(b"IHDR\0\0\0\x10\0\0\0\x10\x08\x06\0\0\0");
    v
}

/// The reference scenario: three developers, eleven commits (one merge),
/// a pure rename, a deletion-only commit, a binary file and an empty file.
///
/// ```text
/// d-1000 Alice  add README.md(3) src/core.rs(10) src/util.rs(4) empty.txt(0)
/// d-900  Carol  add docs/guide.md(6) assets/logo.png(binary), src/core.rs -1
/// d-800  Bob    src/core.rs +40
/// d-700  Carol  mv src/util.rs -> src/helpers.rs
///   feature (from d-700):
///   d-500 Bob    add src/net/client.rs(8)
///   d-420 Carol  src/net/client.rs +2
///   d-400 Carol  add src/net/proto.rs(5)
/// d-600  Alice  docs/guide.md +4
/// d-365  Alice  src/core.rs +3
/// d-10   Bob    README.md -2
/// d-0    Bob    merge feature
/// ```
pub fn standard_fixture() -> FixtureRepo {
    let r = FixtureRepo::init("main");
    r.write_lines("README.md", "readme", 3)
        .write_lines("src/core.rs", "core", 10)
        .write_lines("src/util.rs", "util", 4)
        .write("empty.txt", "");
    r.commit(ALICE, days_before(1000), "initial import");

    r.write_lines("docs/guide.md", "guide", 6)
        .write("assets/logo.png", png_bytes())
        .delete_lines("src/core.rs", 1);
    r.commit(CAROL, days_before(900), "docs and logo");

    r.append_lines("src/core.rs", "core-bob", 40);
    r.commit(BOB, days_before(800), "extend core");

    r.mv("src/util.rs", "src/helpers.rs");
    let fork = r.commit(CAROL, days_before(700), "rename util");

    r.append_lines("docs/guide.md", "guide-alice", 4);
    r.commit(ALICE, days_before(600), "guide section");

    r.checkout_new("feature", &fork);
    r.write_lines("src/net/client.rs", "client", 8);
    r.commit(BOB, days_before(500), "network client");
    r.append_lines("src/net/client.rs", "client-carol", 2);
    r.commit(CAROL, days_before(420), "client retries");
    r.write_lines("src/net/proto.rs", "proto", 5);
    r.commit(CAROL, days_before(400), "protocol");

    r.checkout("main");
    r.append_lines("src/core.rs", "core-alice", 3);
    r.commit(ALICE, days_before(365), "core fixes");
    r.delete_lines("README.md", 2);
    r.commit(BOB, days_before(10), "trim readme");
    r.merge("feature", BOB, REFERENCE_TS);
    r
}

pub fn workdir() -> TempDir {
    tempfile::Builder::new()
        .prefix("tfscope-work")
        .tempdir()
        .expect("tempdir")
}

/// A contribution fact the standard fixture's script encodes.
#[derive(Clone, Copy, Debug)]
pub struct ExpectedFact {
    pub developer: &'static str,
    pub path: &'static str,
    pub adds: u64,
    pub first_authorship: bool,
    pub days_before: i64,
}

const fn fact(
    developer: &'static str,
    path: &'static str,
    adds: u64,
    first_authorship: bool,
    days_before: i64,
) -> ExpectedFact {
    ExpectedFact {
        developer,
        path,
        adds,
        first_authorship,
        days_before,
    }
}

/// Facts of [`standard_fixture`], ordered by path then developer.
pub const STANDARD_FACTS: &[ExpectedFact] = &[
    fact("alice@example.com", "README.md", 3, true, 1000),
    fact("bob@example.com", "README.md", 0, false, 10),
    fact("alice@example.com", "docs/guide.md", 4, false, 600),
    fact("carol@example.com", "docs/guide.md", 6, true, 900),
    fact("alice@example.com", "src/core.rs", 13, true, 365),
    fact("bob@example.com", "src/core.rs", 40, false, 800),
    fact("carol@example.com", "src/core.rs", 0, false, 900),
    fact("alice@example.com", "src/helpers.rs", 4, true, 1000),
    fact("carol@example.com", "src/helpers.rs", 0, false, 700),
    fact("bob@example.com", "src/net/client.rs", 8, true, 500),
    fact("carol@example.com", "src/net/client.rs", 2, false, 420),
    fact("carol@example.com", "src/net/proto.rs", 5, true, 400),
];

/// `(path, loc, creator, renamed_from)` of [`standard_fixture`].
pub const STANDARD_FILES: &[(&str, u64, &str, &[&str])] = &[
    ("README.md", 1, "alice@example.com", &[]),
    ("docs/guide.md", 10, "carol@example.com", &[]),
    ("src/core.rs", 52, "alice@example.com", &[]),
    ("src/helpers.rs", 4, "alice@example.com", &["src/util.rs"]),
    ("src/net/client.rs", 10, "bob@example.com", &[]),
    ("src/net/proto.rs", 5, "carol@example.com", &[]),
];

pub const STANDARD_COMMITS: usize = 11;
pub const STANDARD_DEVELOPERS: usize = 3;
