use std::fs;
use std::path::Path;

use serde::Serialize;
use vinedag::learning::to_u_scale;
use vinedag::{Dataset, RVineModel, Scale};

use crate::{CliError, CliResult};

pub const MATRIX_FILE: &str = "matrix.txt";
pub const INDEPENDENCE_FILE: &str = "independence.txt";
pub const COPULAS_FILE: &str = "copulas.txt";

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub(crate) fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| CliError::Io { path: parent.display().to_string(), source })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub(crate) fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    write_text(path, &s)
}

/// CSV with a header; the scale is detected unless given.
pub fn read_dataset(path: &Path, scale: Option<Scale>) -> CliResult<Dataset> {
    let file = fs::File::open(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Ok(Dataset::read_csv(file, scale)?)
}

/// Raw data becomes pseudo-observations; u and z data pass through.
pub(crate) fn copula_data(data: &Dataset) -> CliResult<Dataset> {
    Ok(match data.scale() {
        Scale::X => to_u_scale(data)?,
        _ => data.clone(),
    })
}

pub fn write_model(dir: &Path, model: &RVineModel) -> CliResult<()> {
    ensure_dir(dir)?;
    write_text(&dir.join(MATRIX_FILE), &model.matrix().to_text())?;
    write_text(&dir.join(INDEPENDENCE_FILE), &model.independence().to_text())?;
    write_text(&dir.join(COPULAS_FILE), &model.copula_table())
}

pub fn read_model(dir: &Path) -> CliResult<RVineModel> {
    let m = read_text(&dir.join(MATRIX_FILE))?;
    let f = read_text(&dir.join(INDEPENDENCE_FILE))?;
    let c = read_text(&dir.join(COPULAS_FILE))?;
    Ok(RVineModel::from_texts(&m, &f, &c)?)
}
