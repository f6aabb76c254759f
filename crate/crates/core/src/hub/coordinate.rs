use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HubError;

pub const DEFAULT_VERSION: &str = "1.0";

/// `dataset-model-explainer` plus a version tag.
///
/// The string form is `dataset-model-explainer` (version `1.0`) or
/// `dataset-model-explainer@<version>`:
///
/// ```
/// use thermostat::hub::CoordinateId;
///
/// let id: CoordinateId = "imdb-bert-lig".parse().unwrap();
/// assert_eq!((id.dataset.as_str(), id.version.as_str()), ("imdb", "1.0"));
/// let v: CoordinateId = "imdb-bert-lig@1.1".parse().unwrap();
/// assert_eq!(v.to_string(), "imdb-bert-lig@1.1");
/// assert_eq!(v.canonical(), "imdb-bert-lig");
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoordinateId {
    pub dataset: String,
    pub model: String,
    pub explainer: String,
    #[serde(default = "default_version")]
    pub version: String,
}

fn default_version() -> String {
    DEFAULT_VERSION.to_owned()
}

fn valid_component(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn valid_version(s: &str) -> bool {
    !s.is_empty()
        && s != "."
        && s != ".."
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'.' || b == b'_')
}

impl CoordinateId {
    pub fn new(dataset: &str, model: &str, explainer: &str) -> Result<Self, HubError> {
        Self::with_version(dataset, model, explainer, DEFAULT_VERSION)
    }

    pub fn with_version(
        dataset: &str,
        model: &str,
        explainer: &str,
        version: &str,
    ) -> Result<Self, HubError> {
        let id = Self {
            dataset: dataset.to_owned(),
            model: model.to_owned(),
            explainer: explainer.to_owned(),
            version: version.to_owned(),
        };
        id.check()?;
        Ok(id)
    }

    pub fn check(&self) -> Result<(), HubError> {
        for (what, part) in [
            ("dataset", &self.dataset),
            ("model", &self.model),
            ("explainer", &self.explainer),
        ] {
            if !valid_component(part) {
                return Err(HubError::InvalidCoordinate(format!(
                    "{what} component {part:?} must be non-empty lowercase [a-z0-9_]"
                )));
            }
        }
        if !valid_version(&self.version) {
            return Err(HubError::InvalidCoordinate(format!(
                "version {:?} must be non-empty [A-Za-z0-9._]",
                self.version
            )));
        }
        Ok(())
    }

    /// `dataset-model-explainer`, without the version.
    pub fn canonical(&self) -> String {
        format!("{}-{}-{}", self.dataset, self.model, self.explainer)
    }

    pub fn at_version(&self, version: &str) -> Result<Self, HubError> {
        Self::with_version(&self.dataset, &self.model, &self.explainer, version)
    }
}

impl fmt::Display for CoordinateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.canonical(), self.version)
    }
}

impl FromStr for CoordinateId {
    type Err = HubError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, version) = match s.split_once('@') {
            Some((name, version)) => (name, version),
            None => (s, DEFAULT_VERSION),
        };
        let parts: Vec<&str> = name.split('-').collect();
        match parts.as_slice() {
            [d, m, e] => Self::with_version(d, m, e, version),
            _ => Err(HubError::InvalidCoordinate(format!(
                "{s:?} is not of the form dataset-model-explainer[@version]"
            ))),
        }
    }
}

/// Anything [`super::load`] accepts as a dataset identifier.
pub trait IntoCoordinate {
    fn into_coordinate(self) -> Result<CoordinateId, HubError>;
}

impl IntoCoordinate for CoordinateId {
    fn into_coordinate(self) -> Result<CoordinateId, HubError> {
        self.check()?;
        Ok(self)
    }
}

impl IntoCoordinate for &CoordinateId {
    fn into_coordinate(self) -> Result<CoordinateId, HubError> {
        self.clone().into_coordinate()
    }
}

impl IntoCoordinate for &str {
    fn into_coordinate(self) -> Result<CoordinateId, HubError> {
        self.parse()
    }
}

impl IntoCoordinate for &String {
    fn into_coordinate(self) -> Result<CoordinateId, HubError> {
        self.parse()
    }
}
