//! Content-addressed storage for generated PNG images.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

/// Hex SHA-256 of `bytes`, used both as image key and as state digest.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub trait ImageStore: Send + Sync {
    /// Stores PNG bytes and returns their content key.
    fn put(&self, png: &[u8]) -> io::Result<String>;
    fn get(&self, key: &str) -> io::Result<Option<Vec<u8>>>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    images: Mutex<HashMap<String, Vec<u8>>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.images.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ImageStore for MemoryStore {
    fn put(&self, png: &[u8]) -> io::Result<String> {
        let key = content_hash(png);
        self.images
            .lock()
            .expect("store lock")
            .entry(key.clone())
            .or_insert_with(|| png.to_vec());
        Ok(key)
    }

    fn get(&self, key: &str) -> io::Result<Option<Vec<u8>>> {
        Ok(self.images.lock().expect("store lock").get(key).cloned())
    }
}

/// Directory of `<hash>.png` files.
#[derive(Debug, Clone)]
pub struct DirStore {
    root: PathBuf,
}

impl DirStore {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(DirStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path_for(&self, key: &str) -> Option<PathBuf> {
        // keys are hex digests; anything else cannot name a stored file
        if key.is_empty() || !key.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        Some(self.root.join(format!("{key}.png")))
    }
}

impl ImageStore for DirStore {
    fn put(&self, png: &[u8]) -> io::Result<String> {
        let key = content_hash(png);
        let path = self.path_for(&key).expect("hex key");
        if !path.exists() {
            let tmp = self.root.join(format!(".{key}.tmp"));
            fs::write(&tmp, png)?;
            fs::rename(&tmp, &path)?;
        }
        Ok(key)
    }

    fn get(&self, key: &str) -> io::Result<Option<Vec<u8>>> {
        let Some(path) = self.path_for(key) else {
            return Ok(None);
        };
        match fs::read(path) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }
}
