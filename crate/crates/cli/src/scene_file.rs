//! JSON scene files.
//!
//! A scene is either a catalog entry or an explicit ambient metric plus an
//! immersed patch, using the engine's own serialized forms:
//!
//! ```json
//! {
//!   "ambient": { "type": "diagonal_exp", "f": [ { "nvars": 5, "terms": [[[2,0,0,0,0], 0.3]] }, ... ] },
//!   "submanifold": { "map": { "type": "graph", "k": 4, "n": 5, "u": [ { "op": "const", "value": 0.0 } ] },
//!                    "base": [0.0, 0.0, 0.0, 0.0] },
//!   "points": [[0.1, 0.0, 0.0, 0.0]],
//!   "quantities": ["K1", "K2"],
//!   "expect": { "K2": 0.0 },
//!   "tolerance": 1e-9
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use qgeo::immersion::ImmersedPatch;
use qgeo::metric::MetricField;
use qgeo::scene::{self, Scene};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Catalog entry; excludes `ambient` and `submanifold`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<MetricField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submanifold: Option<ImmersedPatch>,
    /// Chart points; the patch base point when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    /// Registry names; every valid invariant when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantities: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expect: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Marker for problems with the caller's input rather than the numerics.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config(msg: String) -> anyhow::Error {
    ConfigError(msg).into()
}

impl SceneFile {
    pub fn catalog(name: &str, seed: u64) -> Self {
        SceneFile {
            name: None,
            catalog: Some(name.to_string()),
            seed: Some(seed),
            ambient: None,
            submanifold: None,
            points: Vec::new(),
            quantities: Vec::new(),
            expect: BTreeMap::new(),
            tolerance: None,
        }
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        // serde_json reports line and column
        let f: SceneFile = serde_json::from_str(text).map_err(|e| config(format!("scene file: {e}")))?;
        f.scene()?;
        Ok(f)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Build and validate the scene.
    pub fn scene(&self) -> anyhow::Result<Scene> {
        let mut s = match (&self.catalog, &self.ambient, &self.submanifold) {
            (Some(c), None, None) => scene::catalog(c, self.seed.unwrap_or(0)).map_err(|e| config(e.to_string()))?,
            (None, Some(metric), Some(patch)) => Scene {
                name: self.name.clone().unwrap_or_else(|| "scene".into()),
                metric: metric.clone(),
                patch: patch.clone(),
                domain: None,
            },
            (Some(_), _, _) => bail!(config("`catalog` excludes `ambient` and `submanifold`".into())),
            _ => bail!(config("need either `catalog` or both `ambient` and `submanifold`".into())),
        };
        if let Some(n) = &self.name {
            s.name = n.clone();
        }
        let (k, n) = (s.patch.k(), s.patch.n());
        if !(2..=8).contains(&n) || k == 0 || k >= n {
            bail!(config(format!("dimensions must satisfy 1 <= k < n, 2 <= n <= 8; got k={k}, n={n}")));
        }
        if s.metric.dim() != n {
            bail!(config(format!("ambient dimension {} does not match the immersion's n={n}", s.metric.dim())));
        }
        s.metric.validate().map_err(|e| config(e.to_string()))?;
        for p in self.points.iter().chain([&s.patch.base]) {
            if p.len() != k {
                bail!(config(format!("point {p:?} has {} coordinates, expected {k}", p.len())));
            }
        }
        for q in self.quantities.iter().chain(self.expect.keys()) {
            if qgeo::invariants::lookup(q).is_none() {
                bail!(config(format!("unknown quantity {q:?}")));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                bail!(config(format!("tolerance must be positive, got {t}")));
            }
        }
        Ok(s)
    }
}
