//! Binary on-disk cache for constructed nets.
//!
//! Layout (little endian): magic, format version, key length and key
//! bytes, certification (samples, misses, max distance), point count `n`,
//! then `n` doubles. The file name is a digest of the key; the stored key
//! is compared on load so that collisions and stale files are rebuilt.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::Certification;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CDPNET\0\0";
pub(crate) const FORMAT_VERSION: u32 = 1;

fn path_for(dir: &Path, key: &str) -> PathBuf {
    let digest = Sha256::digest(key.as_bytes());
    let name: String = digest[..16].iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("{name}.net"))
}

pub(crate) fn load(dir: &Path, key: &str) -> Option<(Vec<f64>, Certification)> {
    let mut bytes = Vec::new();
    fs::File::open(path_for(dir, key)).ok()?.read_to_end(&mut bytes).ok()?;
    let parsed = parse(&bytes, key);
    if parsed.is_none() {
        log::warn!("ignoring unreadable or stale net cache entry for {key}");
    }
    parsed
}

fn parse(bytes: &[u8], key: &str) -> Option<(Vec<f64>, Certification)> {
    let mut pos = 0usize;
    let mut take = |n: usize| -> Option<&[u8]> {
        let out = bytes.get(pos..pos + n)?;
        pos += n;
        Some(out)
    };
    if take(8)? != MAGIC {
        return None;
    }
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes"));
    let u64_at = |b: &[u8]| u64::from_le_bytes(b.try_into().expect("8 bytes"));
    if u32_at(take(4)?) != FORMAT_VERSION {
        return None;
    }
    let key_len = u32_at(take(4)?) as usize;
    if take(key_len)? != key.as_bytes() {
        return None;
    }
    let samples = u64_at(take(8)?) as usize;
    let misses = u64_at(take(8)?) as usize;
    let max_distance = f64::from_bits(u64_at(take(8)?));
    let n = u64_at(take(8)?) as usize;
    let body = take(n.checked_mul(8)?)?;
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_bits(u64_at(c)))
        .collect();
    Some((
        data,
        Certification {
            samples,
            misses,
            max_distance,
        },
    ))
}

pub(crate) fn store(dir: &Path, key: &str, data: &[f64], cert: &Certification) -> Result<()> {
    let wrap = |e: std::io::Error| Error::Cache(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(wrap)?;
    let mut out = Vec::with_capacity(48 + key.len() + 8 * data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(key.len() as u32).to_le_bytes());
    out.extend_from_slice(key.as_bytes());
    out.extend_from_slice(&(cert.samples as u64).to_le_bytes());
    out.extend_from_slice(&(cert.misses as u64).to_le_bytes());
    out.extend_from_slice(&cert.max_distance.to_bits().to_le_bytes());
    out.extend_from_slice(&(data.len() as u64).to_le_bytes());
    for x in data {
        out.extend_from_slice(&x.to_bits().to_le_bytes());
    }
    let target = path_for(dir, key);
    let tmp = target.with_extension(format!("tmp{}", std::process::id()));
    fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(&out))
        .map_err(wrap)?;
    fs::rename(&tmp, &target).map_err(wrap)?;
    Ok(())
}

/// Load `key` from the configured cache or build and store it.
pub(crate) fn cached<F>(
    dir: Option<&Path>,
    key: &str,
    build: F,
) -> Result<(Vec<f64>, Certification)>
where
    F: FnOnce() -> Result<(Vec<f64>, Certification)>,
{
    if let Some(dir) = dir {
        if let Some(hit) = load(dir, key) {
            return Ok(hit);
        }
    }
    let built = build()?;
    if let Some(dir) = dir {
        if let Err(e) = store(dir, key, &built.0, &built.1) {
            log::warn!("could not write net cache: {e}");
        }
    }
    Ok(built)
}
