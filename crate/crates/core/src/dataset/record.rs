use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// The 41 NSL-KDD feature columns, in file order.
pub const NSL_KDD_COLUMNS: [&str; 41] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

pub const CATEGORICAL_COLUMNS: [&str; 3] = ["protocol_type", "service", "flag"];

pub const BINARY_COLUMNS: [&str; 6] = [
    "land",
    "logged_in",
    "root_shell",
    "su_attempted",
    "is_host_login",
    "is_guest_login",
];

pub const PROTOCOLS: [&str; 3] = ["icmp", "tcp", "udp"];

pub const FLAG_CODES: [&str; 11] = [
    "OTH", "REJ", "RSTO", "RSTOS0", "RSTR", "S0", "S1", "S2", "S3", "SF", "SH",
];

/// Numeric columns: every NSL-KDD column except the three categorical ones.
pub const NUMERIC_COLUMNS: [&str; 38] = {
    let mut out = [""; 38];
    let mut i = 0;
    let mut j = 0;
    while i < NSL_KDD_COLUMNS.len() {
        if i < 1 || i > 3 {
            out[j] = NSL_KDD_COLUMNS[i];
            j += 1;
        }
        i += 1;
    }
    out
};

/// One flow record in NSL-KDD column layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub protocol_type: String,
    pub service: String,
    pub flag: String,
    /// Values of [`NUMERIC_COLUMNS`], in that order.
    pub numeric: Vec<f64>,
    /// Attack name, or `normal`.
    pub label: String,
    pub difficulty: Option<u32>,
}

impl RawRecord {
    pub fn is_malicious(&self) -> bool {
        self.label != "normal"
    }

    pub fn categorical(&self, column: &str) -> Option<&str> {
        match column {
            "protocol_type" => Some(&self.protocol_type),
            "service" => Some(&self.service),
            "flag" => Some(&self.flag),
            _ => None,
        }
    }

    pub fn numeric_value(&self, column: &str) -> Option<f64> {
        NUMERIC_COLUMNS
            .iter()
            .position(|c| *c == column)
            .and_then(|i| self.numeric.get(i).copied())
    }
}
