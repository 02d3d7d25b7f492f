//! Snapshot persistence, run configuration, and report emission.

mod config;
mod report;
mod snapshot;

pub use config::{FieldKind, FieldSpec, ModeAmp, RunConfig};
pub use report::{norm_table, report_csv, report_text, write_report, write_table, Table};
pub use snapshot::{
    decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, SnapshotMeta, SNAPSHOT_MAGIC,
};
