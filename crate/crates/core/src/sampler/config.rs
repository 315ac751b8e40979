use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerTag {
    Dpp,
    Mcmc,
}

/// One sampled `n`-point configuration with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub points: Vec<Complex64>,
    pub potential_id: String,
    pub perturbation_id: Option<String>,
    pub tag: SamplerTag,
    pub seed: u64,
    /// RNG stream the configuration was drawn on.
    pub stream: u64,
    /// Sweep index (MCMC only).
    pub sweep: Option<u64>,
    /// Running acceptance rate (MCMC only).
    pub acceptance_rate: Option<f64>,
    /// Tuning diagnostic attached by the MCMC sampler.
    pub warning: Option<String>,
}

impl Configuration {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(z) = self.points.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Schema(format!("non-finite point {z}")));
        }
        if self.tag == SamplerTag::Mcmc {
            match self.acceptance_rate {
                Some(a) if a > 0.0 && a < 1.0 => {}
                other => return Err(Error::Schema(format!("mcmc acceptance rate {other:?} outside (0, 1)"))),
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let mut meta = Map::new();
        meta.insert("stream".into(), json!(self.stream));
        if let Some(h) = &self.perturbation_id {
            meta.insert("pert".into(), json!(h));
        }
        if let Some(s) = self.sweep {
            meta.insert("sweep".into(), json!(s));
        }
        if let Some(a) = self.acceptance_rate {
            meta.insert("acc".into(), json!(a));
        }
        if let Some(w) = &self.warning {
            meta.insert("warning".into(), json!(w));
        }
        json!({
            "n": self.n(),
            "pot": self.potential_id,
            "tag": self.tag,
            "seed": self.seed,
            "pts": self.points.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "meta": meta,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Meta {
            #[serde(default)]
            stream: u64,
            pert: Option<String>,
            sweep: Option<u64>,
            acc: Option<f64>,
            warning: Option<String>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Line {
            n: usize,
            pot: String,
            tag: SamplerTag,
            seed: u64,
            pts: Vec<[f64; 2]>,
            meta: Option<Meta>,
        }
        let line: Line = serde_json::from_value(v.clone()).map_err(|e| Error::Schema(e.to_string()))?;
        if line.pts.len() != line.n {
            return Err(Error::Schema(format!("header says n = {} but {} points are listed", line.n, line.pts.len())));
        }
        let meta = line.meta.unwrap_or(Meta { stream: 0, pert: None, sweep: None, acc: None, warning: None });
        let c = Configuration {
            points: line.pts.into_iter().map(|[x, y]| Complex64::new(x, y)).collect(),
            potential_id: line.pot,
            perturbation_id: meta.pert,
            tag: line.tag,
            seed: line.seed,
            stream: meta.stream,
            sweep: meta.sweep,
            acceptance_rate: meta.acc,
            warning: meta.warning,
        };
        c.validate()?;
        Ok(c)
    }
}

/// Writes one JSON object per line.
pub fn write_configurations<'a, W: Write>(out: W, configs: impl IntoIterator<Item = &'a Configuration>) -> Result<()> {
    let mut out = BufWriter::new(out);
    for c in configs {
        serde_json::to_writer(&mut out, &c.to_json())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn persist_configurations<'a>(path: impl AsRef<Path>, configs: impl IntoIterator<Item = &'a Configuration>) -> Result<()> {
    write_configurations(File::create(path)?, configs)
}

/// Streaming JSONL reader. Blank lines are skipped; line numbers in errors
/// are 1-based.
pub struct ConfigurationReader<R> {
    lines: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> ConfigurationReader<R> {
    pub fn new(reader: R) -> Self {
        ConfigurationReader { lines: reader.lines(), line: 0 }
    }
}

impl ConfigurationReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(BufReader::new(File::open(path)?)))
    }
}

impl<R: BufRead> Iterator for ConfigurationReader<R> {
    type Item = Result<Configuration>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            let line = self.line;
            let value: Value = match serde_json::from_str(&text) {
                Ok(v) => v,
                Err(e) => return Some(Err(Error::Parse { line, msg: e.to_string() })),
            };
            return Some(Configuration::from_json(&value).map_err(|e| match e {
                Error::Schema(msg) => Error::Schema(format!("line {line}: {msg}")),
                other => other,
            }));
        }
    }
}

pub fn load_configurations(path: impl AsRef<Path>) -> Result<Vec<Configuration>> {
    ConfigurationReader::open(path)?.collect()
}
