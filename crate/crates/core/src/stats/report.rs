use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kernel,
    Mc,
}

/// `ν_n(f)` against its limit `ν(f)` at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluctuationReport {
    pub n: usize,
    pub f_id: String,
    pub nu_n: f64,
    pub nu: f64,
    pub gap: f64,
    pub method: Method,
    pub mc_se: Option<f64>,
}

impl FluctuationReport {
    pub fn new(n: usize, f_id: impl Into<String>, nu_n: f64, nu: f64, method: Method, mc_se: Option<f64>) -> Self {
        FluctuationReport { n, f_id: f_id.into(), nu_n, nu, gap: nu_n - nu, method, mc_se }
    }
}

/// One CSV row per report, columns `n,f,method,nu_n,nu,gap,mc_se`.
pub fn reports_to_csv(reports: &[FluctuationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "f", "method", "nu_n", "nu", "gap", "mc_se"]).map_err(csv_err)?;
    for r in reports {
        let method = match r.method {
            Method::Kernel => "kernel",
            Method::Mc => "mc",
        };
        w.write_record([
            r.n.to_string(),
            r.f_id.clone(),
            method.to_string(),
            format!("{:e}", r.nu_n),
            format!("{:e}", r.nu),
            format!("{:e}", r.gap),
            r.mc_se.map(|s| format!("{s:e}")).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn reports_to_json(reports: &[FluctuationReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}
