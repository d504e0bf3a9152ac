//! On-disk formats: SMEB embeddings, dataset manifests with JSONL prompts,
//! and mixture manifests.

pub mod dataset;
pub mod mixture;
pub mod smeb;

pub use dataset::{
    load_manifest, read_prompts, template_partitions, validate_corpus, DatasetManifest,
    InstanceRecord, TaskData, TaskRecord, ValidationReport,
};
pub use mixture::{
    to_canonical_json, ConfigEcho, MixtureManifest, Strategy, TaskMixture, TemplateSelection,
};
pub use smeb::{read_smeb, read_smeb_header, write_smeb, EmbeddingMatrix};
