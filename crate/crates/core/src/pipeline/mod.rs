//! Dataset runs: manifests, configuration, source filtering, parallel pair
//! generation, provenance records, verification and annotation importers.

mod config;
mod generate;
pub mod import;
mod manifest;
mod record;
mod select;
mod verify;

pub use config::{GenerationConfig, GenerationMode, KernelConfig, SizeShare};
pub use generate::{
    generate_dataset, write_pair, Failure, Rejection, RunSummary, CONFIG_FILE, SUMMARY_FILE,
};
pub use manifest::{load_manifest, ManifestEntry, ObjectAnnotation, SourceManifest};
pub use record::{
    derive_seed, entry_offset, kernel_id, pair_dir_name, PairOutputs, PairRecord, RecordObject,
    RECORD_FILE, RECORD_VERSION,
};
pub use select::{
    bright_fraction, check_illum_entry, check_illum_source, load_objects, mask_area,
    saturation_sources, select_illum_images, select_objects, union_masks, IllumRejection,
    LoadedObject,
};
pub use verify::{verify_dataset, PairStatus, PairVerdict, VerifyReport};
