//! Messages, payload hex encoding and the `.tutlog` record format.
//!
//! A log is a sequence of blank-line-separated blocks, one `KEY: VALUE`
//! pair per line, keys in the fixed order `LOG_CNT TIME [TICK_MS] SOURCE
//! DIRECTION NAME [STATUS] [INFO] TYPE RELEVANCE TOLERANCE [EXPECTED]
//! [ACTUAL]`. The parser additionally reads several pairs (and several
//! records) per line.

mod log;
mod payload;
mod record;

pub use log::{parse_log, record_from_pairs, Diagnostic, LogError, ParsedLog};
pub use payload::{decode_payload, encode_payload, Payload, PayloadError};
pub use record::{
    is_valid_info, serialize_log, serialize_record, Channel, Direction, DirectionError, LogRecord,
    Message, RecordError, Relevance, RelevanceError, Stamp, StampError, Status, StatusError,
    STAMP_FORMAT,
};
