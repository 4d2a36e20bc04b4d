//! Snapshot container and CSV time series.

mod series;
mod snapshot;

pub use series::{append_series, read_series, SeriesRow, SERIES_COLUMNS};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
