//! Plain-text coefficient tables, exact to the bit.
//!
//! ```text
//! pkm-coefficients 1 k=12 m=1 tol=0x1.b7cdfd9d7bdbbp-34 precision_bits=256
//! n,sign,log_mag_hex,tail_bound_hex,c_max,cusp_sign,cusp_log_mag_hex
//! 1,1,-0x1.2b3e6d5c7a1f0p+1,-0x1.3c2d1e0f9a8b7p+5,11,1,-0x1.2b3e6d5c7a1f0p+1
//! ```
//!
//! `tail_bound_hex` is the natural log of the certified error bound. Entries
//! run `n = 1..=N`; a final line with `n = m > N` is the table's anchor.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::poincare::{build_table, CoefficientEntry, CoefficientTable, ModularParams};
use crate::special::logscalar::{f64_from_hex, f64_to_hex};
use crate::special::SignedLogReal;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "pkm-coefficients";
const COLUMNS: &str = "n,sign,log_mag_hex,tail_bound_hex,c_max,cusp_sign,cusp_log_mag_hex";

fn entry_line(out: &mut String, e: &CoefficientEntry) {
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        e.n,
        e.value.sign(),
        f64_to_hex(e.value.log_mag()),
        f64_to_hex(e.log_tail),
        e.c_max,
        e.cusp.sign(),
        f64_to_hex(e.cusp.log_mag())
    )
    .expect("writing to a String");
}

/// Serializes a complete table. Tables that stopped on a failure are not
/// written, since reading one back would lose the reason.
pub fn table_to_string(table: &CoefficientTable) -> Result<String> {
    if let Some(f) = &table.failure {
        return Err(Error::Precision(format!("table stopped at n = {}: {}", f.n, f.error)));
    }
    let p = table.params;
    let mut out = format!(
        "{MAGIC} {FORMAT_VERSION} k={} m={} tol={} precision_bits={}\n{COLUMNS}\n",
        p.k,
        p.m,
        f64_to_hex(table.tol),
        table.precision_bits
    );
    for e in table.entries.iter().chain(table.anchor.iter()) {
        entry_line(&mut out, e);
    }
    Ok(out)
}

fn field<'a>(header: &'a str, key: &str) -> Result<&'a str> {
    header
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .ok_or_else(|| Error::Format(format!("header lacks {key}")))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Format(format!("bad {what}: {s:?}")))
}

fn hex(s: &str, what: &str) -> Result<f64> {
    f64_from_hex(s).ok_or_else(|| Error::Format(format!("bad {what}: {s:?}")))
}

fn signed(sign: &str, log_mag: &str) -> Result<SignedLogReal> {
    let s: i8 = parse(sign, "sign")?;
    if !(-1..=1).contains(&s) {
        return Err(Error::Format(format!("sign must be -1, 0 or 1, got {s}")));
    }
    Ok(SignedLogReal::new(s, hex(log_mag, "log magnitude")?))
}

/// Inverse of [`table_to_string`].
pub fn table_from_str(text: &str) -> Result<CoefficientTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))?;
    let mut words = header.split_whitespace();
    if words.next() != Some(MAGIC) {
        return Err(Error::Format("not a coefficient table".into()));
    }
    let version: u32 = parse(words.next().unwrap_or(""), "version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let params = ModularParams::new(parse(field(header, "k")?, "k")?, parse(field(header, "m")?, "m")?)
        .map_err(|e| Error::Format(e.to_string()))?;
    let tol = hex(field(header, "tol")?, "tol")?;
    let precision_bits = parse(field(header, "precision_bits")?, "precision_bits")?;
    if lines.next() != Some(COLUMNS) {
        return Err(Error::Format("missing column line".into()));
    }
    let mut entries: Vec<CoefficientEntry> = Vec::new();
    let mut anchor = None;
    for line in lines {
        if anchor.is_some() {
            return Err(Error::Format("entries after the anchor".into()));
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Format(format!("expected 7 fields, got {}: {line:?}", f.len())));
        }
        let e = CoefficientEntry {
            n: parse(f[0], "n")?,
            value: signed(f[1], f[2])?,
            log_tail: hex(f[3], "tail bound")?,
            c_max: parse(f[4], "c_max")?,
            cusp: signed(f[5], f[6])?,
        };
        if e.n as usize == entries.len() + 1 {
            entries.push(e);
        } else if e.n == params.m && e.n as usize > entries.len() + 1 {
            anchor = Some(e);
        } else {
            return Err(Error::Format(format!("entry n = {} out of sequence", e.n)));
        }
    }
    if entries.is_empty() {
        return Err(Error::Format("table has no entries".into()));
    }
    Ok(CoefficientTable {
        params,
        tol,
        precision_bits,
        entries,
        anchor,
        failure: None,
    })
}

/// File holding the table for these parameters under `dir`.
pub fn cache_path(dir: &Path, params: &ModularParams, tol: f64, precision_bits: u32) -> PathBuf {
    dir.join(format!(
        "k{}-m{}-tol{:016x}-b{}.pkm",
        params.k,
        params.m,
        tol.to_bits(),
        precision_bits
    ))
}

/// The first `n_max` entries of `table`, with `p(m)` kept as the anchor
/// when it falls beyond them.
fn truncated(table: &CoefficientTable, n_max: u64) -> CoefficientTable {
    let mut t = table.clone();
    let m = t.params.m;
    if (n_max as usize) < t.entries.len() {
        if m > n_max && t.anchor.is_none() {
            t.anchor = t.get(m).copied();
        }
        t.entries.truncate(n_max as usize);
    }
    t
}

/// Reads the cached table when it covers `n_max`, otherwise builds (or
/// extends) it and writes the file. Returns the table and whether the cache
/// was hit.
pub fn load_or_build(dir: &Path, params: &ModularParams, n_max: u64, tol: f64, precision_bits: u32) -> Result<(CoefficientTable, bool)> {
    let path = cache_path(dir, params, tol, precision_bits);
    let cached = match fs::read_to_string(&path) {
        Ok(text) => Some(table_from_str(&text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(t) = &cached {
        if t.entries.len() as u64 >= n_max {
            return Ok((truncated(t, n_max), true));
        }
    }
    let table = match cached {
        Some(mut t) => {
            t.extend_to(n_max);
            t
        }
        None => build_table(params, n_max, tol)?,
    };
    if table.failure.is_none() {
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, table_to_string(&table)?)?;
        fs::rename(&tmp, &path)?;
    }
    Ok((table, false))
}
