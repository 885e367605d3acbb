//! Report envelopes and value formatting.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use graph_schro::{Complex64, DMatrix, DVector, Tolerances};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub report: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, tolerances: Tolerances, report: T) -> Self {
        Self {
            tool: "graph-schro",
            version: env!("CARGO_PKG_VERSION"),
            command,
            input_sha256: None,
            seed: None,
            tolerances,
            report,
        }
    }

    pub fn input(mut self, text: Option<&str>) -> Self {
        self.input_sha256 = text.map(sha256_hex);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `[re, im]` pairs so that JSON stays readable.
pub fn complex(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn complex_vector(v: &DVector<Complex64>) -> Vec<[f64; 2]> {
    v.iter().copied().map(complex).collect()
}

pub fn complex_matrix(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().map(complex).collect())
        .collect()
}

/// Log-domain margins with `−∞` written as `null`.
pub fn finite_or_none(values: &[f64]) -> Vec<Option<f64>> {
    values.iter().map(|&v| v.is_finite().then_some(v)).collect()
}

pub fn write_text(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

pub fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
