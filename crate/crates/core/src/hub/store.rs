use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::{CoordinateId, DatasetConfig, ExplanationDataset, HubError, Instance, IntoCoordinate};

pub const CONFIG_FILE: &str = "config.json";
pub const DATA_FILE: &str = "data.jsonl";

/// `<root>/<dataset>-<model>-<explainer>/<version>`
pub fn dataset_dir(root: &Path, id: &CoordinateId) -> PathBuf {
    root.join(id.canonical()).join(&id.version)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HubError + '_ {
    move |source| HubError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Writes `config.json` and `data.jsonl` under the dataset's directory and
/// returns that directory.
pub fn save(ds: &ExplanationDataset, root: &Path) -> Result<PathBuf, HubError> {
    ds.config.coordinate.check()?;
    let dir = dataset_dir(root, &ds.config.coordinate);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let config_path = dir.join(CONFIG_FILE);
    let mut config = serde_json::to_string_pretty(&ds.config).expect("config serializes");
    config.push('\n');
    fs::write(&config_path, config).map_err(io_err(&config_path))?;

    let data_path = dir.join(DATA_FILE);
    let mut buf = Vec::with_capacity(ds.instances.len() * 256);
    for inst in &ds.instances {
        serde_json::to_writer(&mut buf, inst).expect("instance serializes");
        buf.push(b'\n');
    }
    fs::File::create(&data_path)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(io_err(&data_path))?;
    Ok(dir)
}

/// Loads and validates a dataset. Unknown JSON fields are ignored.
pub fn load(id: impl IntoCoordinate, root: &Path) -> Result<ExplanationDataset, HubError> {
    let ds = load_unvalidated(id, root)?;
    let violations = ds.validate();
    if violations.is_empty() {
        Ok(ds)
    } else {
        Err(HubError::Invalid {
            coordinate: ds.config.coordinate.to_string(),
            violations,
        })
    }
}

/// Parses a dataset without checking its invariants. Syntax errors still
/// fail, citing the offending line.
pub fn load_unvalidated(
    id: impl IntoCoordinate,
    root: &Path,
) -> Result<ExplanationDataset, HubError> {
    let id = id.into_coordinate()?;
    let dir = dataset_dir(root, &id);
    if !dir.is_dir() {
        return Err(HubError::NotFound {
            coordinate: id.to_string(),
            path: dir,
        });
    }
    let config_path = dir.join(CONFIG_FILE);
    let data_path = dir.join(DATA_FILE);
    for path in [&config_path, &data_path] {
        if !path.is_file() {
            return Err(HubError::NotFound {
                coordinate: id.to_string(),
                path: path.clone(),
            });
        }
    }
    let text = fs::read_to_string(&config_path).map_err(io_err(&config_path))?;
    let config: DatasetConfig =
        serde_json::from_str(&text).map_err(|source| HubError::Parse {
            line: source.line(),
            path: config_path.clone(),
            source,
        })?;

    let file = fs::File::open(&data_path).map_err(io_err(&data_path))?;
    let mut instances = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(&data_path))?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: Instance = serde_json::from_str(&line).map_err(|source| HubError::Parse {
            path: data_path.clone(),
            line: i + 1,
            source,
        })?;
        instances.push(inst);
    }
    Ok(ExplanationDataset { config, instances })
}

/// Versions present on disk for a `dataset-model-explainer` name, sorted
/// by numeric components where possible.
pub fn list_versions(root: &Path, canonical: &str) -> Result<Vec<String>, HubError> {
    let dir = root.join(canonical);
    let entries = match fs::read_dir(&dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(&dir)(e)),
    };
    let mut versions: Vec<String> = entries
        .filter_map(Result::ok)
        .filter(|e| e.path().join(CONFIG_FILE).is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    versions.sort_by(|a, b| version_key(a).cmp(&version_key(b)).then_with(|| a.cmp(b)));
    Ok(versions)
}

fn version_key(v: &str) -> Vec<u64> {
    v.split('.').map(|p| p.parse().unwrap_or(u64::MAX)).collect()
}
