use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::{Error, Result, VERSION};

use super::OutputFile;

const MANIFEST: &str = "MANIFEST";
const MANIFEST_HEADER: &str = "AQSIM-CACHE v1";

/// Environment variable naming the cache root.
pub const CACHE_ENV: &str = "AQSIM_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryMeta {
    pub version: String,
    /// Seconds since the Unix epoch at store time.
    pub created: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lookup {
    Hit { files: Vec<OutputFile>, meta: EntryMeta },
    Miss,
    /// The entry exists but fails its digest check.
    Corrupted(String),
}

/// Content-addressed result store: one directory per configuration hash.
#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    /// Root from [`CACHE_ENV`], falling back to `.aqsim-cache` in the working directory.
    pub fn from_env() -> Self {
        Cache::new(std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".aqsim-cache")))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entry_dir(&self, key: &str) -> PathBuf {
        self.root.join(key)
    }

    pub fn lookup(&self, key: &str) -> Result<Lookup> {
        let dir = self.entry_dir(key);
        let manifest = match fs::read_to_string(dir.join(MANIFEST)) {
            Ok(m) => m,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Ok(if dir.exists() { Lookup::Corrupted("manifest missing".into()) } else { Lookup::Miss });
            }
            Err(e) => return Err(e.into()),
        };
        match read_entry(&dir, &manifest) {
            Ok((files, meta)) => Ok(Lookup::Hit { files, meta }),
            Err(Error::CacheCorrupted(why)) => Ok(Lookup::Corrupted(why)),
            Err(e) => Err(e),
        }
    }

    /// Write an entry, replacing any previous one under the same key.
    pub fn store(&self, key: &str, files: &[OutputFile]) -> Result<()> {
        fs::create_dir_all(&self.root)?;
        let tmp = self.root.join(format!(".{key}.tmp"));
        if tmp.exists() {
            fs::remove_dir_all(&tmp)?;
        }
        fs::create_dir_all(&tmp)?;
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut manifest = format!("{MANIFEST_HEADER}\nversion {VERSION}\ncreated {created}\n");
        for f in files {
            fs::write(tmp.join(&f.name), &f.contents)?;
            manifest.push_str(&format!("file {} {}\n", digest(f.contents.as_bytes()), f.name));
        }
        fs::write(tmp.join(MANIFEST), manifest)?;
        let dir = self.entry_dir(key);
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::rename(&tmp, &dir)?;
        Ok(())
    }
}

fn read_entry(dir: &Path, manifest: &str) -> Result<(Vec<OutputFile>, EntryMeta)> {
    let bad = |why: String| Error::CacheCorrupted(why);
    let mut lines = manifest.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(bad("manifest header".into()));
    }
    let mut meta = EntryMeta { version: String::new(), created: 0 };
    let mut files = Vec::new();
    for line in lines {
        let mut parts = line.splitn(3, ' ');
        match (parts.next(), parts.next(), parts.next()) {
            (Some("version"), Some(v), None) => meta.version = v.to_string(),
            (Some("created"), Some(t), None) => meta.created = t.parse().map_err(|_| bad(format!("timestamp {t:?}")))?,
            (Some("file"), Some(sum), Some(name)) => {
                let contents = fs::read_to_string(dir.join(name)).map_err(|e| bad(format!("{name}: {e}")))?;
                if digest(contents.as_bytes()) != sum {
                    return Err(bad(format!("{name}: digest mismatch")));
                }
                files.push(OutputFile { name: name.to_string(), contents });
            }
            _ => return Err(bad(format!("manifest line {line:?}"))),
        }
    }
    Ok((files, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn files() -> Vec<OutputFile> {
        vec![
            OutputFile { name: "a.csv".into(), contents: "x,y\n1,2\n".into() },
            OutputFile { name: "b.csv".into(), contents: "z\n".into() },
        ]
    }

    #[test]
    fn store_then_hit() {
        let tmp = tempfile::tempdir().unwrap();
        let cache = Cache::new(tmp.path());
        assert_eq!(cache.lookup("k").unwrap(), Lookup::Miss);
        cache.store("k", &files()).unwrap();
        match cache.lookup("k").unwrap() {
            Lookup::Hit { files: got, meta } => {
                assert_eq!(got, files());
                assert_eq!(meta.version, VERSION);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(cache.lookup("other").unwrap(), Lookup::Miss);
    }

    #[test]
    fn tampering_is_detected() {
        let tmp = tempfile::tempdir().unwrap();
        let cache = Cache::new(tmp.path());
        cache.store("k", &files()).unwrap();
        fs::write(cache.entry_dir("k").join("b.csv"), "w\n").unwrap();
        assert!(matches!(cache.lookup("k").unwrap(), Lookup::Corrupted(_)));
        cache.store("k", &files()).unwrap();
        fs::remove_file(cache.entry_dir("k").join("a.csv")).unwrap();
        assert!(matches!(cache.lookup("k").unwrap(), Lookup::Corrupted(_)));
        fs::remove_file(cache.entry_dir("k").join(MANIFEST)).unwrap();
        assert!(matches!(cache.lookup("k").unwrap(), Lookup::Corrupted(_)));
    }
}
