//! Persistent, content-keyed embedding store.
//!
//! File layout, little-endian:
//!
//! ```text
//! header   "EXEMBC" version:u8 0:u8
//! record   'R' plen:u16 provider mlen:u16 model key:[u8;32] dim:u32 dim*f32
//! footer   'F' count:u64 count*(key:[u8;32] offset:u64) footer_at:u64 "EXIDX\0\0\0"
//! ```
//!
//! Records are only ever appended. The footer is rewritten after the last
//! record on [`EmbeddingCache::flush`]; a file without a valid footer is
//! recovered by scanning the records and dropping a torn tail.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::{Error, Result};

const MAGIC: &[u8; 6] = b"EXEMBC";
const VERSION: u8 = 1;
const HEADER_LEN: u64 = 8;
const FOOTER_MAGIC: &[u8; 8] = b"EXIDX\0\0\0";

pub type CacheKey = [u8; 32];

pub fn cache_key(provider: &str, model: &str, text: &str) -> CacheKey {
    let mut h = Sha256::new();
    h.update(provider.as_bytes());
    h.update([0]);
    h.update(model.as_bytes());
    h.update([0]);
    h.update(text.as_bytes());
    h.finalize().into()
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    offset: u64,
    dim: u32,
    /// Byte position of the vector data.
    data: u64,
}

pub struct EmbeddingCache {
    path: PathBuf,
    file: File,
    index: HashMap<CacheKey, Slot>,
    /// End of the last record; the footer starts here.
    data_end: u64,
    dirty: bool,
}

fn read_u16(r: &mut impl Read) -> std::io::Result<u16> {
    let mut b = [0; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

impl EmbeddingCache {
    /// Opens or creates the cache file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(&path)?;
        let len = file.metadata()?.len();
        if len == 0 {
            file.write_all(MAGIC)?;
            file.write_all(&[VERSION, 0])?;
            file.flush()?;
            return Ok(EmbeddingCache {
                path,
                file,
                index: HashMap::new(),
                data_end: HEADER_LEN,
                dirty: true,
            });
        }
        let mut head = [0u8; 8];
        file.seek(SeekFrom::Start(0))?;
        file.read_exact(&mut head).map_err(|_| Error::format("embedding cache header truncated"))?;
        if &head[..6] != MAGIC {
            return Err(Error::format(format!("{} is not an embedding cache", path.display())));
        }
        if head[6] != VERSION {
            return Err(Error::format(format!("unsupported embedding cache version {}", head[6])));
        }
        let mut cache = EmbeddingCache {
            path,
            file,
            index: HashMap::new(),
            data_end: HEADER_LEN,
            dirty: false,
        };
        if !cache.load_footer(len)? {
            cache.scan(len)?;
            cache.dirty = true;
        }
        Ok(cache)
    }

    fn load_footer(&mut self, len: u64) -> Result<bool> {
        if len < HEADER_LEN + 16 {
            return Ok(false);
        }
        self.file.seek(SeekFrom::Start(len - 16))?;
        let footer_at = read_u64(&mut self.file)?;
        let mut magic = [0u8; 8];
        self.file.read_exact(&mut magic)?;
        if &magic != FOOTER_MAGIC || footer_at < HEADER_LEN || footer_at >= len - 16 {
            return Ok(false);
        }
        let mut r = BufReader::new(&self.file);
        r.seek(SeekFrom::Start(footer_at))?;
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        if tag[0] != b'F' {
            return Ok(false);
        }
        let count = read_u64(&mut r)?;
        if footer_at + 9 + count * 40 + 16 != len {
            return Ok(false);
        }
        let mut offsets = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let mut key = [0u8; 32];
            r.read_exact(&mut key)?;
            offsets.push((key, read_u64(&mut r)?));
        }
        for (key, offset) in offsets {
            let slot = self.read_slot(offset)?;
            self.index.insert(key, slot);
        }
        self.data_end = footer_at;
        Ok(true)
    }

    fn read_slot(&self, offset: u64) -> Result<Slot> {
        let mut r = BufReader::new(&self.file);
        r.seek(SeekFrom::Start(offset + 1))?;
        let plen = read_u16(&mut r)? as u64;
        r.seek_relative(plen as i64)?;
        let mlen = read_u16(&mut r)? as u64;
        r.seek_relative(mlen as i64 + 32)?;
        let dim = read_u32(&mut r)?;
        Ok(Slot {
            offset,
            dim,
            data: offset + 1 + 2 + plen + 2 + mlen + 32 + 4,
        })
    }

    /// Rebuilds the index from the records, stopping at the first torn or
    /// foreign byte.
    fn scan(&mut self, len: u64) -> Result<()> {
        let mut r = BufReader::new(&self.file);
        r.seek(SeekFrom::Start(HEADER_LEN))?;
        let mut pos = HEADER_LEN;
        loop {
            let mut tag = [0u8; 1];
            if r.read_exact(&mut tag).is_err() || tag[0] != b'R' {
                break;
            }
            let step = (|| -> std::io::Result<(CacheKey, u64, u32, u64)> {
                let plen = read_u16(&mut r)? as u64;
                r.seek_relative(plen as i64)?;
                let mlen = read_u16(&mut r)? as u64;
                r.seek_relative(mlen as i64)?;
                let mut key = [0u8; 32];
                r.read_exact(&mut key)?;
                let dim = read_u32(&mut r)?;
                let header = 1 + 2 + plen + 2 + mlen + 32 + 4;
                Ok((key, header, dim, header + dim as u64 * 4))
            })();
            let Ok((key, header, dim, total)) = step else { break };
            if pos + total > len {
                break;
            }
            self.index.insert(
                key,
                Slot {
                    offset: pos,
                    dim,
                    data: pos + header,
                },
            );
            pos += total;
            r.seek(SeekFrom::Start(pos))?;
        }
        self.data_end = pos;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, key: &CacheKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn get(&mut self, key: &CacheKey) -> Result<Option<Vec<f32>>> {
        let Some(slot) = self.index.get(key).copied() else {
            return Ok(None);
        };
        let mut buf = vec![0u8; slot.dim as usize * 4];
        self.file.seek(SeekFrom::Start(slot.data))?;
        self.file.read_exact(&mut buf)?;
        Ok(Some(buf.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect()))
    }

    /// Appends a vector unless the key is already stored.
    pub fn put(&mut self, provider: &str, model: &str, key: CacheKey, vector: &[f32]) -> Result<()> {
        if self.index.contains_key(&key) {
            return Ok(());
        }
        let (p, m) = (provider.as_bytes(), model.as_bytes());
        if p.len() > u16::MAX as usize || m.len() > u16::MAX as usize {
            return Err(Error::format("provider or model name too long"));
        }
        let offset = self.data_end;
        let mut rec = Vec::with_capacity(41 + p.len() + m.len() + vector.len() * 4);
        rec.push(b'R');
        rec.extend_from_slice(&(p.len() as u16).to_le_bytes());
        rec.extend_from_slice(p);
        rec.extend_from_slice(&(m.len() as u16).to_le_bytes());
        rec.extend_from_slice(m);
        rec.extend_from_slice(&key);
        rec.extend_from_slice(&(vector.len() as u32).to_le_bytes());
        let data = offset + rec.len() as u64;
        for v in vector {
            rec.extend_from_slice(&v.to_le_bytes());
        }
        // drop any footer before appending so the file stays scannable
        self.file.set_len(offset)?;
        self.file.seek(SeekFrom::Start(offset))?;
        self.file.write_all(&rec)?;
        self.data_end = offset + rec.len() as u64;
        self.index.insert(
            key,
            Slot {
                offset,
                dim: vector.len() as u32,
                data,
            },
        );
        self.dirty = true;
        Ok(())
    }

    /// Writes the index footer.
    pub fn flush(&mut self) -> Result<()> {
        if !self.dirty {
            return Ok(());
        }
        let mut entries: Vec<(&CacheKey, &Slot)> = self.index.iter().collect();
        entries.sort_unstable_by_key(|(_, s)| s.offset);
        self.file.set_len(self.data_end)?;
        self.file.seek(SeekFrom::Start(self.data_end))?;
        let mut w = BufWriter::new(&self.file);
        w.write_all(b"F")?;
        w.write_all(&(entries.len() as u64).to_le_bytes())?;
        for (key, slot) in entries {
            w.write_all(key)?;
            w.write_all(&slot.offset.to_le_bytes())?;
        }
        w.write_all(&self.data_end.to_le_bytes())?;
        w.write_all(FOOTER_MAGIC)?;
        w.flush()?;
        drop(w);
        self.file.sync_data()?;
        self.dirty = false;
        Ok(())
    }
}

impl Drop for EmbeddingCache {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        let k1 = cache_key("local", "m", "hello");
        let k2 = cache_key("local", "m", "world");
        {
            let mut c = EmbeddingCache::open(&path).unwrap();
            c.put("local", "m", k1, &[1.0, -2.5, 3.25]).unwrap();
            c.put("local", "m", k2, &[0.5; 8]).unwrap();
            c.put("local", "m", k1, &[9.0]).unwrap();
            assert_eq!(c.len(), 2);
        }
        let mut c = EmbeddingCache::open(&path).unwrap();
        assert_eq!(c.get(&k1).unwrap().unwrap(), vec![1.0, -2.5, 3.25]);
        assert_eq!(c.get(&k2).unwrap().unwrap(), vec![0.5; 8]);
        assert_eq!(c.get(&cache_key("local", "m", "other")).unwrap(), None);
        c.put("remote", "m", cache_key("remote", "m", "hello"), &[7.0]).unwrap();
        drop(c);
        assert_eq!(EmbeddingCache::open(&path).unwrap().len(), 3);
    }

    #[test]
    fn keys_separate_provider_model_and_text() {
        assert_ne!(cache_key("a", "bc", "d"), cache_key("ab", "c", "d"));
        assert_ne!(cache_key("a", "b", "c"), cache_key("a", "b", "c "));
    }

    #[test]
    fn recovers_from_a_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        let k = cache_key("p", "m", "t");
        {
            let mut c = EmbeddingCache::open(&path).unwrap();
            c.put("p", "m", k, &[1.0, 2.0]).unwrap();
            c.put("p", "m", cache_key("p", "m", "u"), &[3.0, 4.0]).unwrap();
            std::mem::forget(c);
        }
        let len = std::fs::metadata(&path).unwrap().len();
        let f = OpenOptions::new().write(true).open(&path).unwrap();
        f.set_len(len - 3).unwrap();
        drop(f);
        let mut c = EmbeddingCache::open(&path).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.get(&k).unwrap().unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        std::fs::write(&path, b"not a cache at all").unwrap();
        assert!(EmbeddingCache::open(&path).is_err());
    }
}
