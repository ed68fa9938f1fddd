use std::fs;
use std::io::Read;
use std::process::ExitCode;

use crowdinfer::data::Catalog;
use crowdinfer::{Error, Result};

use crate::FetchArgs;

/// Downloads every file of a catalog entry into `--dir`, checking SHA-256 sums
/// where the catalog records them. The only command that touches the network.
pub fn fetch(args: FetchArgs) -> Result<ExitCode> {
    let catalog = match &args.catalog {
        Some(path) => Catalog::from_path(path)?,
        None => Catalog::builtin(),
    };
    let entry = catalog.get(&args.name)?;
    let base = args.url.clone().or_else(|| entry.url.clone()).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "catalog entry `{}` has no download URL; pass --url or place the files under the directory by hand",
            args.name
        ))
    })?;
    for file in entry.files() {
        let url = format!("{}/{}", base.trim_end_matches('/'), file);
        eprintln!("fetching {url}");
        let response = ureq::get(&url)
            .call()
            .map_err(|e| Error::Parse(format!("download of {url} failed: {e}")))?;
        let mut bytes = Vec::new();
        response
            .into_reader()
            .read_to_end(&mut bytes)
            .map_err(|e| Error::io(&args.dir, e))?;
        entry.verify(file, &bytes)?;
        let path = args.dir.join(file);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
    }
    Ok(ExitCode::SUCCESS)
}
