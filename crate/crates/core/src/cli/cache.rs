//! On-disk cache of rank witnesses. Every entry is re-verified when the
//! file is loaded; anything that fails is dropped with a warning.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::elliptic::{CurvePoint, Family, TwistedCurve};
use crate::error::{Error, Result};

const CACHE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    /// On the normalized model `y² = x³ ∓ D²x`.
    pub point: CurvePoint,
    /// Search bound at discovery.
    pub height_bound: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    schema_version: u32,
    entries: BTreeMap<String, Vec<serde_json::Value>>,
}

#[derive(Debug)]
pub struct PointCache {
    path: PathBuf,
    entries: BTreeMap<String, Vec<CacheEntry>>,
    dirty: bool,
    /// Entries rejected on load.
    pub dropped: Vec<String>,
}

fn key(curve: &TwistedCurve) -> String {
    format!("{}:{}", curve.family.tag(), curve.d)
}

fn parse_key(k: &str) -> Option<TwistedCurve> {
    let (tag, d) = k.split_once(':')?;
    let family = match tag {
        "x3-x" => Family::Congruent,
        "x3+x" => Family::Plus,
        _ => return None,
    };
    TwistedCurve::new(d.parse().ok()?, family).ok()
}

fn verify(curve: &TwistedCurve, e: &CacheEntry) -> bool {
    let model = curve.normalized();
    model.contains(&e.point) && model.is_non_torsion(&e.point).unwrap_or(false)
}

impl PointCache {
    pub fn empty(path: &Path) -> Self {
        PointCache { path: path.to_path_buf(), entries: BTreeMap::new(), dirty: false, dropped: vec![] }
    }

    /// Load and re-verify. A missing file is an empty cache; an unreadable
    /// one is discarded as a whole.
    pub fn load(path: &Path) -> Self {
        let mut cache = PointCache::empty(path);
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(_) => return cache,
        };
        let file: CacheFile = match serde_json::from_str(&text) {
            Ok(f) => f,
            Err(e) => {
                cache.dropped.push(format!("whole file: {e}"));
                return cache;
            }
        };
        if file.schema_version != CACHE_SCHEMA {
            cache.dropped.push(format!("whole file: schema {}", file.schema_version));
            return cache;
        }
        for (k, raw) in file.entries {
            let Some(curve) = parse_key(&k) else {
                cache.dropped.push(format!("{k}: bad key"));
                continue;
            };
            for v in raw {
                match serde_json::from_value::<CacheEntry>(v) {
                    Ok(e) if verify(&curve, &e) => cache.entries.entry(k.clone()).or_default().push(e),
                    Ok(e) => cache.dropped.push(format!("{k}: {} fails verification", e.point)),
                    Err(err) => cache.dropped.push(format!("{k}: {err}")),
                }
            }
        }
        cache
    }

    /// A cached witness of height at most `bound`, least height first.
    pub fn lookup(&self, curve: &TwistedCurve, bound: u64) -> Option<&CacheEntry> {
        self.entries
            .get(&key(curve))?
            .iter()
            .filter(|e| e.point.height() <= bound.into())
            .min_by(|a, b| a.point.canonical_cmp(&b.point))
    }

    pub fn insert(&mut self, curve: &TwistedCurve, point: CurvePoint, height_bound: u64) -> Result<()> {
        let entry = CacheEntry { point, height_bound };
        if !verify(curve, &entry) {
            return Err(Error::InvalidParameter(format!("refusing to cache {}", entry.point)));
        }
        let list = self.entries.entry(key(curve)).or_default();
        if !list.iter().any(|e| e.point == entry.point) {
            list.push(entry);
            list.sort_by(|a, b| a.point.canonical_cmp(&b.point));
            self.dirty = true;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Write via a temporary file in the same directory and rename over
    /// the target.
    pub fn save(&mut self) -> Result<()> {
        if !self.dirty {
            return Ok(());
        }
        let dir = self.path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        std::fs::create_dir_all(dir)?;
        let file = CacheFile {
            schema_version: CACHE_SCHEMA,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|e| serde_json::to_value(e).expect("serializable")).collect()))
                .collect(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer_pretty(&mut tmp, &file).map_err(|e| Error::Io(e.to_string()))?;
        tmp.write_all(b"\n")?;
        tmp.persist(&self.path).map_err(|e| Error::Io(e.to_string()))?;
        self.dirty = false;
        Ok(())
    }
}
