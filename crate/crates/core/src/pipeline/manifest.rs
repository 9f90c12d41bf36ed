use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectAnnotation {
    /// Binary mask PNG; any non-zero pixel belongs to the object.
    pub mask: PathBuf,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub image: PathBuf,
    #[serde(default)]
    pub objects: Vec<ObjectAnnotation>,
    /// Light-source mask; when absent the union of light-class objects is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation_mask: Option<PathBuf>,
}

impl ManifestEntry {
    fn paths(&self) -> impl Iterator<Item = &PathBuf> {
        std::iter::once(&self.image)
            .chain(self.objects.iter().map(|o| &o.mask))
            .chain(self.saturation_mask.iter())
    }
}

/// A set of segmented source images. Relative paths are resolved against
/// the manifest's directory at load time.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceManifest {
    /// Class label -> supercategory.
    #[serde(default)]
    pub class_taxonomy: BTreeMap<String, String>,
    #[serde(default)]
    pub entries: Vec<ManifestEntry>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.')
}

impl SourceManifest {
    pub fn supercategory(&self, class: &str) -> Option<&str> {
        self.class_taxonomy.get(class).map(String::as_str)
    }

    /// Checks ids, classes and files. All missing files are reported together.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !valid_id(&e.id) {
                return Err(Error::Manifest(format!(
                    "entry id `{}` must be non-empty and use only [A-Za-z0-9._-]",
                    e.id
                )));
            }
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Manifest(format!("duplicate entry id `{}`", e.id)));
            }
            for o in &e.objects {
                if !self.class_taxonomy.contains_key(&o.class) {
                    return Err(Error::UnknownClass {
                        entry: e.id.clone(),
                        class: o.class.clone(),
                    });
                }
            }
        }
        let missing: Vec<PathBuf> = self
            .entries
            .iter()
            .flat_map(ManifestEntry::paths)
            .filter(|p| !p.is_file())
            .cloned()
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingFiles(missing))
        }
    }

    /// Makes every relative path absolute with respect to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for e in &mut self.entries {
            fix(&mut e.image);
            for o in &mut e.objects {
                fix(&mut o.mask);
            }
            if let Some(s) = e.saturation_mask.as_mut() {
                fix(s);
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Keeps the entries accepted by `keep`, preserving order.
    pub fn filtered(&self, mut keep: impl FnMut(&ManifestEntry) -> bool) -> Self {
        Self {
            class_taxonomy: self.class_taxonomy.clone(),
            entries: self.entries.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }
}

/// Reads, resolves and validates a manifest. An empty file yields an empty
/// manifest.
pub fn load_manifest(path: &Path) -> Result<SourceManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        log::warn!("manifest {} is empty", path.display());
        return Ok(SourceManifest::default());
    }
    let mut manifest = SourceManifest::from_json(&text)?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let base = std::path::absolute(&base).map_err(|e| Error::io(&base, e))?;
    manifest.resolve_paths(&base);
    manifest.validate()?;
    if manifest.entries.is_empty() {
        log::warn!("manifest {} has no entries", path.display());
    }
    Ok(manifest)
}
