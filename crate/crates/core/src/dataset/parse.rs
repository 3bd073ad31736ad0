use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::record::{RawRecord, FLAG_CODES, NSL_KDD_COLUMNS, NUMERIC_COLUMNS, PROTOCOLS};

/// The 70 service codes that occur in NSL-KDD.
pub const SERVICE_CODES: [&str; 70] = [
    "IRC",
    "X11",
    "Z39_50",
    "aol",
    "auth",
    "bgp",
    "courier",
    "csnet_ns",
    "ctf",
    "daytime",
    "discard",
    "domain",
    "domain_u",
    "echo",
    "eco_i",
    "ecr_i",
    "efs",
    "exec",
    "finger",
    "ftp",
    "ftp_data",
    "gopher",
    "harvest",
    "hostnames",
    "http",
    "http_2784",
    "http_443",
    "http_8001",
    "imap4",
    "iso_tsap",
    "klogin",
    "kshell",
    "ldap",
    "link",
    "login",
    "mtp",
    "name",
    "netbios_dgm",
    "netbios_ns",
    "netbios_ssn",
    "netstat",
    "nnsp",
    "nntp",
    "ntp_u",
    "other",
    "pm_dump",
    "pop_2",
    "pop_3",
    "printer",
    "private",
    "red_i",
    "remote_job",
    "rje",
    "shell",
    "smtp",
    "sql_net",
    "ssh",
    "sunrpc",
    "supdup",
    "systat",
    "telnet",
    "tftp_u",
    "tim_i",
    "time",
    "urh_i",
    "urp_i",
    "uucp",
    "uucp_path",
    "vmnet",
    "whois",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based physical line number.
    pub line: usize,
    pub message: String,
}

/// Parses comma-separated NSL-KDD lines: 41 features, the label and an
/// optional difficulty score. Blank lines are skipped.
pub fn parse_nslkdd(text: &str) -> Result<Vec<RawRecord>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(i + 1, line)?);
    }
    Ok(out)
}

pub fn parse_line(line_no: usize, line: &str) -> Result<RawRecord, ParseError> {
    let err = |message: String| ParseError { line: line_no, message };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 42 && fields.len() != 43 {
        return Err(err(format!("expected 42 or 43 fields, got {}", fields.len())));
    }
    let (protocol, service, flag) = (fields[1], fields[2], fields[3]);
    if !PROTOCOLS.contains(&protocol) {
        return Err(err(format!("column 'protocol_type': unknown protocol '{protocol}'")));
    }
    if !SERVICE_CODES.contains(&service) {
        return Err(err(format!("column 'service': unknown service '{service}'")));
    }
    if !FLAG_CODES.contains(&flag) {
        return Err(err(format!("column 'flag': unknown flag '{flag}'")));
    }
    let mut numeric = Vec::with_capacity(NUMERIC_COLUMNS.len());
    for (j, name) in NSL_KDD_COLUMNS.iter().enumerate() {
        if (1..=3).contains(&j) {
            continue;
        }
        let v: f64 = fields[j]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| err(format!("column '{name}': '{}' is not a number", fields[j])))?;
        numeric.push(v);
    }
    let difficulty = match fields.get(42) {
        Some(d) => Some(
            d.parse::<u32>()
                .map_err(|_| err(format!("column 'difficulty': '{d}' is not an integer")))?,
        ),
        None => None,
    };
    Ok(RawRecord {
        protocol_type: protocol.to_string(),
        service: service.to_string(),
        flag: flag.to_string(),
        numeric,
        label: fields[41].to_string(),
        difficulty,
    })
}

impl RawRecord {
    /// The record as one NSL-KDD line, without a trailing newline.
    pub fn to_line(&self) -> String {
        let mut parts: Vec<String> = Vec::with_capacity(43);
        let mut numeric = self.numeric.iter();
        for (j, _) in NSL_KDD_COLUMNS.iter().enumerate() {
            parts.push(match j {
                1 => self.protocol_type.clone(),
                2 => self.service.clone(),
                3 => self.flag.clone(),
                _ => numeric.next().map(|v| format!("{v}")).unwrap_or_default(),
            });
        }
        parts.push(self.label.clone());
        if let Some(d) = self.difficulty {
            parts.push(format!("{d}"));
        }
        parts.join(",")
    }
}
