use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

/// Default download location. `{name}` is replaced by the dataset name.
pub const DEFAULT_PMLB_URL: &str = "https://github.com/EpistasisLab/pmlb/raw/master/datasets/{name}/{name}.tsv.gz";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchOutcome {
    CacheHit(PathBuf),
    Downloaded(PathBuf),
}

impl FetchOutcome {
    pub fn path(&self) -> &Path {
        match self {
            FetchOutcome::CacheHit(p) | FetchOutcome::Downloaded(p) => p,
        }
    }
}

pub fn cache_path(name: &str, cache_dir: &Path) -> PathBuf {
    cache_dir.join(name).join(format!("{name}.tsv"))
}

/// Download a benchmark dataset into `cache_dir/<name>/<name>.tsv`.
///
/// A cached file is returned without touching the network. Downloads may be
/// gzip-compressed or plain TSV; either way the content must parse as a
/// dataset before it is moved into the cache.
pub fn fetch_pmlb(name: &str, cache_dir: &Path, url_template: &str) -> Result<FetchOutcome> {
    if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
        return Err(Error::Config(format!("invalid dataset name '{name}'")));
    }
    let target = cache_path(name, cache_dir);
    if target.is_file() {
        return Ok(FetchOutcome::CacheHit(target));
    }
    let url = url_template.replace("{name}", name);
    let fail = |reason: String| Error::Fetch {
        name: name.to_string(),
        url: url.clone(),
        reason,
    };

    let response = ureq::get(&url).call().map_err(|e| match e {
        ureq::Error::StatusCode(404) => fail("not found (HTTP 404)".into()),
        ureq::Error::StatusCode(code) => fail(format!("HTTP status {code}")),
        other => fail(format!(
            "{other} (offline? place the file at {} to skip the download)",
            target.display()
        )),
    })?;
    let mut raw = Vec::new();
    response
        .into_body()
        .into_reader()
        .read_to_end(&mut raw)
        .map_err(|e| fail(format!("reading response body: {e}")))?;

    let text = if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| fail(format!("gzip decompression failed: {e}")))?;
        out
    } else {
        raw
    };
    super::tsv::read_tsv(&text[..], Path::new(&url))
        .map_err(|e| fail(format!("downloaded file is not a valid dataset: {e}")))?;

    let dir = target.parent().expect("cache path has a parent");
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{name}.tsv.partial"));
    std::fs::File::create(&tmp)?.write_all(&text)?;
    std::fs::rename(&tmp, &target)?;
    Ok(FetchOutcome::Downloaded(target))
}
