use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use super::record::{RawRecord, NUMERIC_COLUMNS};
use crate::rng::seeded;

/// Miniature service vocabulary with the protocol each service runs over.
pub const SYNTH_SERVICES: [(&str, &str); 8] = [
    ("ftp_data", "tcp"),
    ("http", "tcp"),
    ("smtp", "tcp"),
    ("ssh", "tcp"),
    ("domain_u", "udp"),
    ("tftp_u", "udp"),
    ("eco_i", "icmp"),
    ("ecr_i", "icmp"),
];

/// Flags each protocol may carry in the synthetic corpus.
pub const SYNTH_FLAGS: [(&str, &[&str]); 3] = [
    ("tcp", &["REJ", "RSTO", "S0", "SF"]),
    ("udp", &["SF"]),
    ("icmp", &["SF"]),
];

/// Roughly the attack share of the NSL-KDD test split.
pub const MALICIOUS_FRACTION: f64 = 0.55;
const MALICIOUS_LABELS: [&str; 4] = ["neptune", "smurf", "portsweep", "guess_passwd"];

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[(&'a str, f64)]) -> &'a str {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut u = rng.random::<f64>() * total;
    for (v, w) in items {
        if u < *w {
            return v;
        }
        u -= w;
    }
    items[items.len() - 1].0
}

fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> f64 {
    if rng.random::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

fn rate(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    let v = Normal::new(mean, sd).expect("valid normal").sample(rng);
    // two decimals, like the published rate columns
    libm::round(v.clamp(0.0, 1.0) * 100.0) / 100.0
}

fn count(rng: &mut ChaCha8Rng, mean: f64, sd: f64, max: f64) -> f64 {
    libm::round(Normal::new(mean, sd).expect("valid normal").sample(rng).clamp(0.0, max))
}

fn bytes(rng: &mut ChaCha8Rng, mu: f64, sigma: f64) -> f64 {
    libm::floor(LogNormal::new(mu, sigma).expect("valid lognormal").sample(rng))
}

/// Deterministic synthetic corpus in NSL-KDD layout. Benign and malicious
/// records differ mainly in their continuous features; categorical values
/// always respect [`SYNTH_SERVICES`] and [`SYNTH_FLAGS`].
pub fn synth_dataset(seed: u64, n: usize) -> Vec<RawRecord> {
    let mut rng = seeded(seed);
    (0..n).map(|_| synth_record(&mut rng)).collect()
}

fn synth_record(rng: &mut ChaCha8Rng) -> RawRecord {
    let malicious = rng.random::<f64>() < MALICIOUS_FRACTION;
    let protocol = if malicious {
        pick(rng, &[("tcp", 0.62), ("udp", 0.13), ("icmp", 0.25)])
    } else {
        pick(rng, &[("tcp", 0.78), ("udp", 0.15), ("icmp", 0.07)])
    };
    let service = match (protocol, malicious) {
        ("tcp", false) => pick(rng, &[("http", 0.5), ("smtp", 0.2), ("ftp_data", 0.2), ("ssh", 0.1)]),
        ("tcp", true) => pick(rng, &[("http", 0.3), ("smtp", 0.15), ("ftp_data", 0.2), ("ssh", 0.35)]),
        ("udp", false) => pick(rng, &[("domain_u", 0.8), ("tftp_u", 0.2)]),
        ("udp", true) => pick(rng, &[("domain_u", 0.4), ("tftp_u", 0.6)]),
        (_, false) => pick(rng, &[("eco_i", 0.5), ("ecr_i", 0.5)]),
        (_, true) => pick(rng, &[("eco_i", 0.3), ("ecr_i", 0.7)]),
    };
    let flag = match (protocol, malicious) {
        ("tcp", false) => pick(rng, &[("SF", 0.88), ("REJ", 0.05), ("RSTO", 0.04), ("S0", 0.03)]),
        ("tcp", true) => pick(rng, &[("SF", 0.35), ("REJ", 0.2), ("RSTO", 0.1), ("S0", 0.35)]),
        _ => "SF",
    };
    let syn_error = flag == "S0";
    let rejected = flag == "REJ" || flag == "RSTO";
    let tcp = protocol == "tcp";

    let numeric: Vec<f64> = NUMERIC_COLUMNS
        .iter()
        .map(|col| {
            let m = malicious;
            match *col {
                "duration" => {
                    if m {
                        if rng.random::<f64>() < 0.85 {
                            0.0
                        } else {
                            bytes(rng, 2.0, 1.5)
                        }
                    } else if tcp {
                        bytes(rng, 1.5, 1.8)
                    } else {
                        0.0
                    }
                }
                "src_bytes" => {
                    if m {
                        bytes(rng, 3.0, 2.0)
                    } else {
                        bytes(rng, 6.0, 1.2)
                    }
                }
                "dst_bytes" => {
                    if m {
                        if rng.random::<f64>() < 0.8 {
                            0.0
                        } else {
                            bytes(rng, 4.0, 2.0)
                        }
                    } else if tcp {
                        bytes(rng, 7.0, 1.5)
                    } else {
                        bytes(rng, 4.5, 1.0)
                    }
                }
                "land" => bernoulli(rng, if m { 0.01 } else { 0.0005 }),
                "wrong_fragment" => {
                    if m && rng.random::<f64>() < 0.05 {
                        1.0 + libm::floor(rng.random::<f64>() * 3.0)
                    } else {
                        0.0
                    }
                }
                "urgent" => bernoulli(rng, 0.002),
                "hot" => count(rng, if m { 0.3 } else { 0.8 }, 1.0, 30.0),
                "num_failed_logins" => {
                    if m && service == "ssh" {
                        count(rng, 1.5, 1.0, 5.0)
                    } else {
                        0.0
                    }
                }
                "logged_in" => bernoulli(rng, if m { 0.12 } else { 0.72 }),
                "num_compromised" => count(rng, if m { 0.2 } else { 0.05 }, 0.5, 20.0),
                "root_shell" => bernoulli(rng, if m { 0.02 } else { 0.003 }),
                "su_attempted" => bernoulli(rng, 0.003),
                "num_root" => count(rng, 0.05, 0.4, 10.0),
                "num_file_creations" => count(rng, if m { 0.05 } else { 0.2 }, 0.5, 10.0),
                "num_shells" => bernoulli(rng, 0.004),
                "num_access_files" => count(rng, if m { 0.02 } else { 0.1 }, 0.3, 5.0),
                "num_outbound_cmds" => 0.0,
                "is_host_login" => bernoulli(rng, 0.001),
                "is_guest_login" => bernoulli(rng, if m { 0.03 } else { 0.01 }),
                "count" => {
                    if m {
                        count(rng, 220.0, 130.0, 511.0)
                    } else {
                        count(rng, 12.0, 15.0, 511.0)
                    }
                }
                "srv_count" => {
                    if m {
                        count(rng, 40.0, 60.0, 511.0)
                    } else {
                        count(rng, 14.0, 15.0, 511.0)
                    }
                }
                "serror_rate" | "srv_serror_rate" | "dst_host_serror_rate" | "dst_host_srv_serror_rate" => {
                    if syn_error {
                        rate(rng, 0.95, 0.08)
                    } else if m {
                        rate(rng, 0.12, 0.15)
                    } else {
                        rate(rng, 0.02, 0.05)
                    }
                }
                "rerror_rate" | "srv_rerror_rate" | "dst_host_rerror_rate" | "dst_host_srv_rerror_rate" => {
                    if rejected {
                        rate(rng, 0.9, 0.1)
                    } else if m {
                        rate(rng, 0.1, 0.15)
                    } else {
                        rate(rng, 0.03, 0.06)
                    }
                }
                "same_srv_rate" | "dst_host_same_srv_rate" => {
                    if m {
                        rate(rng, 0.25, 0.25)
                    } else {
                        rate(rng, 0.9, 0.12)
                    }
                }
                "diff_srv_rate" | "dst_host_diff_srv_rate" => {
                    if m {
                        rate(rng, 0.3, 0.2)
                    } else {
                        rate(rng, 0.04, 0.06)
                    }
                }
                "srv_diff_host_rate" | "dst_host_srv_diff_host_rate" => {
                    if m {
                        rate(rng, 0.1, 0.15)
                    } else {
                        rate(rng, 0.12, 0.15)
                    }
                }
                "dst_host_same_src_port_rate" => {
                    if m {
                        rate(rng, 0.4, 0.35)
                    } else {
                        rate(rng, 0.1, 0.15)
                    }
                }
                "dst_host_count" => count(rng, if m { 230.0 } else { 140.0 }, 80.0, 255.0),
                "dst_host_srv_count" => {
                    if m {
                        count(rng, 30.0, 50.0, 255.0)
                    } else {
                        count(rng, 180.0, 70.0, 255.0)
                    }
                }
                _ => 0.0,
            }
        })
        .collect();

    let label: String = if malicious {
        MALICIOUS_LABELS[rng.random_range(0..MALICIOUS_LABELS.len())].to_string()
    } else {
        "normal".to_string()
    };
    RawRecord {
        protocol_type: protocol.to_string(),
        service: service.to_string(),
        flag: flag.to_string(),
        numeric,
        label,
        difficulty: Some(rng.random_range(0..22)),
    }
}
