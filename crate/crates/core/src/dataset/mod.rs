//! NSL-KDD record layout, feature schema and encoding.

mod encode;
mod parse;
mod record;
mod schema;
mod split;
mod synth;

pub use encode::{encode, split_traffic, EncodedDataset};
pub use parse::{parse_line, parse_nslkdd, ParseError, SERVICE_CODES};
pub use record::{
    RawRecord, BINARY_COLUMNS, CATEGORICAL_COLUMNS, FLAG_CODES, NSL_KDD_COLUMNS, NUMERIC_COLUMNS, PROTOCOLS,
};
pub use schema::{build_schema, build_schema_with_ranges, ColumnKind, ColumnSpec, FeatureSchema, OneHotGroup};
pub use split::stratified_split;
pub use synth::{synth_dataset, MALICIOUS_FRACTION, SYNTH_FLAGS, SYNTH_SERVICES};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot build a schema from an empty record list")]
    EmptyRecords,
    #[error("column '{column}': value '{value}' is not in the schema")]
    UnseenCategory { column: String, value: String },
    #[error("record has {got} numeric fields, expected {expected}")]
    NumericArity { expected: usize, got: usize },
}
