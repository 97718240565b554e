//! On-disk leaderboard of best known packings.
//!
//! Layout under the catalog root:
//!
//! ```text
//! index.jsonl                  one CatalogEntry per line
//! packings/<C|R>/<d>/<n>.txt   packing files
//! .lock                        present while a writer holds the catalog
//! ```
//!
//! Every file is replaced by writing a temporary sibling and renaming it.

pub mod format;
pub mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::analysis::{certify, Certificate, CertifyOptions};
use crate::bounds::best_lower_bound;
use crate::constructions::best_removal;
use crate::error::{Error, Result};
use crate::frame::{Field, UnitFrame};

pub use format::{parse_packing, parse_packing_with, serialize_packing, ParseOptions};
pub use table::{bounds_table, render_leaderboard, TableFormat};

/// Smallest coherence decrease that counts as an improvement.
pub const IMPROVEMENT: f64 = 1e-10;
/// Agreement required between a stored coherence and its re-certification.
pub const RECERTIFY_TOL: f64 = 1e-9;
/// Creator note for entries derived by deleting a vector.
pub const AUTO_NOTE: &str = "AUTO";

const INDEX_FILE: &str = "index.jsonl";
const LOCK_FILE: &str = ".lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Key {
    pub d: usize,
    pub n: usize,
    pub field: Field,
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.d, self.n, self.field)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub d: usize,
    pub n: usize,
    pub field: Field,
    pub coherence: f64,
    pub lower_bound: f64,
    pub creator_note: String,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: u64,
    /// Path of the packing file relative to the catalog root.
    pub packing_ref: String,
}

impl CatalogEntry {
    pub fn key(&self) -> Key {
        Key {
            d: self.d,
            n: self.n,
            field: self.field,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Accepted,
    RejectedWorse { incumbent: f64 },
    RejectedInvalid { reason: String },
}

#[derive(Debug, Clone)]
pub struct SubmitOutcome {
    pub decision: Decision,
    pub certificate: Option<Certificate>,
    /// Entries installed by vector removal after an acceptance.
    pub propagated: Vec<Key>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FsckIssue {
    MissingPacking {
        key: Key,
        detail: String,
    },
    CoherenceMismatch {
        key: Key,
        stored: f64,
        recomputed: f64,
    },
    BelowBound {
        key: Key,
        coherence: f64,
        bound: f64,
    },
    NotMonotone {
        smaller: Key,
        larger: Key,
    },
}

impl fmt::Display for FsckIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FsckIssue::MissingPacking { key, detail } => {
                write!(f, "{key}: packing unreadable: {detail}")
            }
            FsckIssue::CoherenceMismatch {
                key,
                stored,
                recomputed,
            } => write!(
                f,
                "{key}: stored coherence {stored} but packing certifies {recomputed}"
            ),
            FsckIssue::BelowBound {
                key,
                coherence,
                bound,
            } => write!(f, "{key}: coherence {coherence} below lower bound {bound}"),
            FsckIssue::NotMonotone { smaller, larger } => {
                write!(f, "{smaller} has larger coherence than {larger}")
            }
        }
    }
}

/// A catalog rooted at a directory.
#[derive(Debug)]
pub struct Catalog {
    root: PathBuf,
    index: BTreeMap<Key, CatalogEntry>,
}

/// Held while mutating; removes the lock file when dropped.
struct WriteLock {
    path: PathBuf,
}

impl WriteLock {
    fn acquire(root: &Path) -> Result<Self> {
        let path = root.join(LOCK_FILE);
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(WriteLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(path)),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Catalog {
    /// Opens the catalog at `root`, creating an empty one if needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let index_path = root.join(INDEX_FILE);
        let mut index = BTreeMap::new();
        match fs::read_to_string(&index_path) {
            Ok(text) => {
                for (i, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let entry: CatalogEntry =
                        serde_json::from_str(line).map_err(|source| Error::Index {
                            line: i + 1,
                            source,
                        })?;
                    index.insert(entry.key(), entry);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(index_path, e)),
        }
        Ok(Catalog { root, index })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn get(&self, key: &Key) -> Option<&CatalogEntry> {
        self.index.get(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.index.values()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Reads the packing stored for `key`.
    pub fn load_packing(&self, key: &Key) -> Result<UnitFrame> {
        let entry = self
            .index
            .get(key)
            .ok_or_else(|| Error::MissingEntry(key.to_string()))?;
        let path = self.root.join(&entry.packing_ref);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        parse_packing(&text)
    }

    fn packing_ref(key: &Key) -> String {
        format!("packings/{}/{}/{}.txt", key.field, key.d, key.n)
    }

    fn persist_index(&self) -> Result<()> {
        let mut text = String::new();
        for entry in self.index.values() {
            text.push_str(&serde_json::to_string(entry).expect("entry serializes"));
            text.push('\n');
        }
        write_atomic(&self.root.join(INDEX_FILE), text.as_bytes())
    }

    fn install(&mut self, frame: &UnitFrame, coherence: f64, note: &str) -> Result<Key> {
        let key = Key {
            d: frame.d(),
            n: frame.n(),
            field: frame.field(),
        };
        let packing_ref = Self::packing_ref(&key);
        write_atomic(
            &self.root.join(&packing_ref),
            serialize_packing(frame).as_bytes(),
        )?;
        self.index.insert(
            key,
            CatalogEntry {
                d: key.d,
                n: key.n,
                field: key.field,
                coherence,
                lower_bound: best_lower_bound(key.d, key.n, key.field).best,
                creator_note: note.to_string(),
                timestamp: now(),
                packing_ref,
            },
        );
        Ok(key)
    }

    /// Certifies `frame` and installs it if it beats the incumbent at its
    /// `(d, n, field)` by more than [`IMPROVEMENT`]. An acceptance then
    /// propagates downward in `n` by vector removal.
    pub fn submit(&mut self, frame: &UnitFrame, note: &str) -> Result<SubmitOutcome> {
        let _lock = WriteLock::acquire(&self.root)?;
        let invalid = |reason: String, certificate: Option<Certificate>| SubmitOutcome {
            decision: Decision::RejectedInvalid { reason },
            certificate,
            propagated: vec![],
        };
        if note.trim().is_empty() {
            return Ok(invalid("creator note must be nonempty".into(), None));
        }
        let certificate = match certify(frame, &CertifyOptions::numerical()) {
            Ok(c) => c,
            Err(e) => return Ok(invalid(e.to_string(), None)),
        };
        if certificate.coherence < certificate.lower_bound - IMPROVEMENT {
            let reason = format!(
                "coherence {} is below the lower bound {}",
                certificate.coherence, certificate.lower_bound
            );
            return Ok(invalid(reason, Some(certificate)));
        }
        let key = Key {
            d: frame.d(),
            n: frame.n(),
            field: frame.field(),
        };
        if let Some(incumbent) = self.index.get(&key) {
            if certificate.coherence >= incumbent.coherence - IMPROVEMENT {
                return Ok(SubmitOutcome {
                    decision: Decision::RejectedWorse {
                        incumbent: incumbent.coherence,
                    },
                    certificate: Some(certificate),
                    propagated: vec![],
                });
            }
        }
        self.install(frame, certificate.coherence, note.trim())?;
        let propagated = self.propagate_locked(key)?;
        self.persist_index()?;
        Ok(SubmitOutcome {
            decision: Decision::Accepted,
            certificate: Some(certificate),
            propagated,
        })
    }

    /// Installs single-vector removals of the `(d, n)` incumbent at `n - 1`,
    /// `n - 2`, ... for as long as each beats the entry it would replace.
    pub fn auto_propagate(&mut self, d: usize, n: usize, field: Field) -> Result<Vec<Key>> {
        let _lock = WriteLock::acquire(&self.root)?;
        let updated = self.propagate_locked(Key { d, n, field })?;
        if !updated.is_empty() {
            self.persist_index()?;
        }
        Ok(updated)
    }

    fn propagate_locked(&mut self, start: Key) -> Result<Vec<Key>> {
        if !self.index.contains_key(&start) {
            return Err(Error::MissingEntry(start.to_string()));
        }
        let mut updated = Vec::new();
        let mut key = start;
        while key.n >= 3 {
            let source = self.load_packing(&key)?;
            let (reduced, _) = best_removal(&source)?;
            let mu = crate::analysis::coherence(&reduced)?;
            let target = Key {
                n: key.n - 1,
                ..key
            };
            let improves = self
                .index
                .get(&target)
                .is_none_or(|e| mu < e.coherence - IMPROVEMENT);
            if !improves {
                break;
            }
            self.install(&reduced, mu, AUTO_NOTE)?;
            updated.push(target);
            key = target;
        }
        Ok(updated)
    }

    /// Re-certifies every entry and checks that coherence does not decrease
    /// with `n` for fixed `(d, field)`.
    pub fn fsck(&self) -> Vec<FsckIssue> {
        let mut issues = Vec::new();
        for (key, entry) in &self.index {
            match self.load_packing(key) {
                Ok(frame) => {
                    if (frame.d(), frame.n(), frame.field()) != (key.d, key.n, key.field) {
                        issues.push(FsckIssue::MissingPacking {
                            key: *key,
                            detail: "packing shape does not match its entry".into(),
                        });
                        continue;
                    }
                    let recomputed = crate::analysis::coherence_unchecked(&frame);
                    if (recomputed - entry.coherence).abs() > RECERTIFY_TOL {
                        issues.push(FsckIssue::CoherenceMismatch {
                            key: *key,
                            stored: entry.coherence,
                            recomputed,
                        });
                    }
                    let bound = best_lower_bound(key.d, key.n, key.field).best;
                    if recomputed < bound - IMPROVEMENT {
                        issues.push(FsckIssue::BelowBound {
                            key: *key,
                            coherence: recomputed,
                            bound,
                        });
                    }
                }
                Err(e) => issues.push(FsckIssue::MissingPacking {
                    key: *key,
                    detail: e.to_string(),
                }),
            }
        }
        let mut entries: Vec<&CatalogEntry> = self.index.values().collect();
        entries.sort_by_key(|e| (e.field, e.d, e.n));
        for pair in entries.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if (a.field, a.d) == (b.field, b.d) && a.coherence > b.coherence + IMPROVEMENT {
                issues.push(FsckIssue::NotMonotone {
                    smaller: a.key(),
                    larger: b.key(),
                });
            }
        }
        issues
    }

    pub fn render_table(&self, format: TableFormat) -> String {
        render_leaderboard(self.index.values(), format)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{mub_maximal, simplex};

    #[test]
    fn accepts_then_rejects_the_same_packing() {
        let dir = tempfile::tempdir().unwrap();
        let mut cat = Catalog::open(dir.path()).unwrap();
        let f = simplex(3, Field::Complex);
        let out = cat.submit(&f, "etf").unwrap();
        assert_eq!(out.decision, Decision::Accepted);
        let e = cat
            .get(&Key {
                d: 3,
                n: 4,
                field: Field::Complex,
            })
            .unwrap();
        assert!((e.coherence - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(e.creator_note, "etf");
        let before = fs::read(dir.path().join(INDEX_FILE)).unwrap();
        let again = cat.submit(&f, "etf").unwrap();
        assert!(matches!(again.decision, Decision::RejectedWorse { .. }));
        assert_eq!(fs::read(dir.path().join(INDEX_FILE)).unwrap(), before);
    }

    #[test]
    fn index_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut cat = Catalog::open(dir.path()).unwrap();
            cat.submit(&mub_maximal(2).unwrap(), "mub").unwrap();
        }
        let cat = Catalog::open(dir.path()).unwrap();
        assert!(cat
            .get(&Key {
                d: 2,
                n: 6,
                field: Field::Complex
            })
            .is_some());
        assert!(cat.fsck().is_empty(), "{:?}", cat.fsck());
        assert!(!dir.path().join(LOCK_FILE).exists());
    }

    #[test]
    fn lock_blocks_a_second_writer() {
        let dir = tempfile::tempdir().unwrap();
        let mut cat = Catalog::open(dir.path()).unwrap();
        fs::write(dir.path().join(LOCK_FILE), "1").unwrap();
        let err = cat.submit(&simplex(2, Field::Real), "etf").unwrap_err();
        assert!(matches!(err, Error::Locked(_)));
    }

    #[test]
    fn empty_note_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let mut cat = Catalog::open(dir.path()).unwrap();
        let out = cat.submit(&simplex(2, Field::Real), " ").unwrap();
        assert!(matches!(out.decision, Decision::RejectedInvalid { .. }));
        assert!(cat.is_empty());
    }

    #[test]
    fn single_vector_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let mut cat = Catalog::open(dir.path()).unwrap();
        let f = UnitFrame::standard_basis(Field::Real, 2, 1).unwrap();
        let out = cat.submit(&f, "x").unwrap();
        assert!(matches!(out.decision, Decision::RejectedInvalid { .. }));
    }

    #[test]
    fn auto_needs_a_source() {
        let dir = tempfile::tempdir().unwrap();
        let mut cat = Catalog::open(dir.path()).unwrap();
        assert!(matches!(
            cat.auto_propagate(3, 9, Field::Complex),
            Err(Error::MissingEntry(_))
        ));
    }

    #[test]
    fn fsck_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let mut cat = Catalog::open(dir.path()).unwrap();
        cat.submit(&simplex(3, Field::Real), "etf").unwrap();
        let key = Key {
            d: 3,
            n: 4,
            field: Field::Real,
        };
        let path = dir.path().join(&cat.get(&key).unwrap().packing_ref);
        fs::write(
            &path,
            serialize_packing(&UnitFrame::standard_basis(Field::Real, 4, 4).unwrap()),
        )
        .unwrap();
        let issues = cat.fsck();
        assert!(matches!(issues[0], FsckIssue::MissingPacking { .. }));
        fs::remove_file(&path).unwrap();
        assert!(!cat.fsck().is_empty());
    }
}
