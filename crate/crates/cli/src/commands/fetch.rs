use std::path::Path;

use dcgpann::data::{fetch_pmlb, FetchOutcome};

use crate::CliError;

pub fn fetch(name: &str, cache_dir: &Path, url_template: &str) -> Result<FetchOutcome, CliError> {
    Ok(fetch_pmlb(name, cache_dir, url_template)?)
}
