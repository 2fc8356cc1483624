//! Stored chain draws and their text serialization.
//!
//! The file starts with `# key = value` header lines and continues with one
//! comma-separated row per draw:
//!
//! ```text
//! iteration,accepted,delta_h,log_w|NA,sigma_sq_1..sigma_sq_p,delta (row-major, (p+1) x K)
//! ```
//!
//! Floating-point values are written with 17 significant digits so a reload is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::engine::chain::{ChainState, IterationReport, Phase};
use crate::engine::McmcSettings;
use crate::error::{Error, Result};
use crate::model::{PriorFamily, PriorSpec, Standardization, WMode};

const FORMAT_TAG: &str = "sparselogit-samples-1";

/// Acceptance bookkeeping for one phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseStats {
    pub iterations: usize,
    pub accepted: usize,
    pub divergent: usize,
    /// Sum over iterations of the number of active feature rows.
    pub active_total: usize,
}

impl PhaseStats {
    pub(crate) fn record(&mut self, report: &IterationReport) {
        self.iterations += 1;
        self.accepted += report.accepted as usize;
        self.divergent += report.divergent as usize;
        self.active_total += report.active_features;
    }

    /// Fraction of HMC updates rejected; 0 for an empty phase.
    pub fn rejection_rate(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            1.0 - self.accepted as f64 / self.iterations as f64
        }
    }

    /// Average number of feature rows updated per iteration.
    pub fn mean_active(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.active_total as f64 / self.iterations as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoreMetadata {
    pub n_features: usize,
    pub class_count: usize,
    pub settings: McmcSettings,
    pub prior: PriorSpec,
    /// Fingerprint of the training data the chain was run on.
    pub fingerprint: String,
    pub initial: PhaseStats,
    pub sampling: PhaseStats,
    /// Training standardization, so new data can be mapped consistently.
    pub standardization: Option<Standardization>,
}

impl StoreMetadata {
    /// Metadata for a hand-assembled store of the given shape.
    pub fn for_shape(n_features: usize, class_count: usize) -> Self {
        Self {
            n_features,
            class_count,
            settings: McmcSettings::new(0, 1, 1, 1, 0.3, 0.0, 0),
            prior: PriorSpec::new(PriorFamily::T, 1.0, -10.0),
            fingerprint: String::new(),
            initial: PhaseStats::default(),
            sampling: PhaseStats::default(),
            standardization: None,
        }
    }
}

/// One stored state of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct Draw {
    /// Global iteration count (both phases) at which the state was recorded.
    pub iteration: usize,
    pub accepted: bool,
    pub delta_h: f64,
    pub log_w: Option<f64>,
    pub sigma_sq: Vec<f64>,
    /// `(p + 1) x K` contrasts.
    pub delta: Array2<f64>,
}

impl Draw {
    pub(crate) fn from_state(state: &ChainState, report: &IterationReport) -> Self {
        Self {
            iteration: state.iteration(),
            accepted: report.accepted,
            delta_h: report.delta_h,
            log_w: state.log_w(),
            sigma_sq: state.sigma_sq().as_slice().to_vec(),
            delta: state.delta().as_array().clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleStore {
    metadata: StoreMetadata,
    draws: Vec<Draw>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(",")
}

impl SampleStore {
    pub fn new(metadata: StoreMetadata) -> Self {
        Self {
            metadata,
            draws: Vec::new(),
        }
    }

    pub fn metadata(&self) -> &StoreMetadata {
        &self.metadata
    }

    pub fn draws(&self) -> &[Draw] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.metadata.n_features
    }

    pub fn class_count(&self) -> usize {
        self.metadata.class_count
    }

    /// Appends a draw after checking its shape against the metadata.
    pub fn push(&mut self, draw: Draw) {
        assert_eq!(
            draw.sigma_sq.len(),
            self.metadata.n_features,
            "sigma_sq length"
        );
        assert_eq!(
            draw.delta.dim(),
            (self.metadata.n_features + 1, self.metadata.class_count - 1),
            "delta shape"
        );
        self.draws.push(draw);
    }

    pub(crate) fn set_stats(&mut self, phase: Phase, stats: PhaseStats) {
        match phase {
            Phase::Initial => self.metadata.initial = stats,
            Phase::Sampling => self.metadata.sampling = stats,
        }
    }

    /// Rejection rate of the sampling phase.
    pub fn rejection_rate(&self) -> f64 {
        self.metadata.sampling.rejection_rate()
    }

    /// Appends the draws of `other`, which must have the same shape.
    pub fn append(&mut self, other: &SampleStore) -> Result<()> {
        if other.metadata.n_features != self.metadata.n_features {
            return Err(Error::dims(
                "store features",
                self.metadata.n_features,
                other.metadata.n_features,
            ));
        }
        if other.metadata.class_count != self.metadata.class_count {
            return Err(Error::dims(
                "store classes",
                self.metadata.class_count,
                other.metadata.class_count,
            ));
        }
        self.draws.extend(other.draws.iter().cloned());
        Ok(())
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let m = &self.metadata;
        let s = &m.settings;
        let pr = &m.prior;
        writeln!(out, "# format = {FORMAT_TAG}")?;
        writeln!(out, "# p = {}", m.n_features)?;
        writeln!(out, "# classes = {}", m.class_count)?;
        writeln!(out, "# prior = {}", pr.family)?;
        writeln!(out, "# alpha = {}", fmt_f64(pr.alpha))?;
        writeln!(out, "# log_w = {}", fmt_f64(pr.log_w))?;
        match pr.w_mode {
            WMode::Fixed => writeln!(out, "# w_mode = fixed")?,
            WMode::Hyper { prior_variance } => {
                writeln!(out, "# w_mode = hyper")?;
                writeln!(out, "# hyper_w_var = {}", fmt_f64(prior_variance))?;
            }
        }
        writeln!(out, "# sigma0_sq = {}", fmt_f64(pr.sigma0_sq))?;
        writeln!(out, "# n1 = {}", s.n1)?;
        writeln!(out, "# l1 = {}", s.l1)?;
        writeln!(out, "# n2 = {}", s.n2)?;
        writeln!(out, "# l2 = {}", s.l2)?;
        writeln!(out, "# eps = {}", fmt_f64(s.eps))?;
        writeln!(out, "# zeta = {}", fmt_f64(s.zeta))?;
        writeln!(out, "# thin = {}", s.thin)?;
        writeln!(out, "# seed = {}", s.seed)?;
        writeln!(out, "# fingerprint = {}", m.fingerprint)?;
        for (name, st) in [("initial", &m.initial), ("sampling", &m.sampling)] {
            writeln!(out, "# {name}_iterations = {}", st.iterations)?;
            writeln!(out, "# {name}_accepted = {}", st.accepted)?;
            writeln!(out, "# {name}_divergent = {}", st.divergent)?;
            writeln!(out, "# {name}_active_total = {}", st.active_total)?;
        }
        if let Some(std) = &m.standardization {
            writeln!(out, "# train_means = {}", fmt_list(&std.means))?;
            writeln!(out, "# train_sds = {}", fmt_list(&std.sds))?;
        }
        let mut line = String::new();
        for d in &self.draws {
            line.clear();
            line.push_str(&d.iteration.to_string());
            line.push(',');
            line.push(if d.accepted { '1' } else { '0' });
            line.push(',');
            line.push_str(&fmt_f64(d.delta_h));
            line.push(',');
            match d.log_w {
                Some(v) => line.push_str(&fmt_f64(v)),
                None => line.push_str("NA"),
            }
            for &v in d.sigma_sq.iter().chain(d.delta.iter()) {
                line.push(',');
                line.push_str(&fmt_f64(v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut header = Header::default();
        let mut rows: Vec<(usize, String)> = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::StoreFormat {
                line: line_no,
                message: e.to_string(),
            })?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (key, value) = rest.split_once('=').ok_or_else(|| Error::StoreFormat {
                    line: line_no,
                    message: "header line without '='".into(),
                })?;
                header
                    .entries
                    .push((line_no, key.trim().to_string(), value.trim().to_string()));
            } else {
                rows.push((line_no, line.to_string()));
            }
        }
        let metadata = header.into_metadata()?;
        let mut store = SampleStore::new(metadata);
        let p = store.metadata.n_features;
        let k = store.metadata.class_count - 1;
        for (line_no, row) in rows {
            let draw = parse_row(&row, p, k).map_err(|message| Error::StoreFormat {
                line: line_no,
                message,
            })?;
            if let Some(last) = store.draws.last() {
                if draw.iteration <= last.iteration {
                    return Err(Error::StoreFormat {
                        line: line_no,
                        message: "iterations must be strictly increasing".into(),
                    });
                }
            }
            store.draws.push(draw);
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("cannot parse '{s}' as a number"))
}

fn parse_row(row: &str, p: usize, k: usize) -> std::result::Result<Draw, String> {
    let fields: Vec<&str> = row.split(',').collect();
    let expected = 4 + p + (p + 1) * k;
    if fields.len() != expected {
        return Err(format!(
            "expected {expected} fields, found {}",
            fields.len()
        ));
    }
    let iteration = fields[0]
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("bad iteration '{}'", fields[0]))?;
    let accepted = match fields[1].trim() {
        "1" => true,
        "0" => false,
        other => return Err(format!("bad acceptance flag '{other}'")),
    };
    let delta_h = parse_f64(fields[2])?;
    let log_w = match fields[3].trim() {
        "NA" => None,
        s => Some(parse_f64(s)?),
    };
    let sigma_sq = fields[4..4 + p]
        .iter()
        .map(|s| parse_f64(s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let delta_vals = fields[4 + p..]
        .iter()
        .map(|s| parse_f64(s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let delta = Array2::from_shape_vec((p + 1, k), delta_vals).map_err(|e| e.to_string())?;
    Ok(Draw {
        iteration,
        accepted,
        delta_h,
        log_w,
        sigma_sq,
        delta,
    })
}

#[derive(Default)]
struct Header {
    entries: Vec<(usize, String, String)>,
}

impl Header {
    fn get(&self, key: &str) -> Option<&(usize, String, String)> {
        self.entries.iter().find(|(_, k, _)| k == key)
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, _, value) = self.get(key).ok_or_else(|| Error::StoreFormat {
            line: 0,
            message: format!("missing header key '{key}'"),
        })?;
        value.parse::<T>().map_err(|_| Error::StoreFormat {
            line: *line,
            message: format!("bad value '{value}' for '{key}'"),
        })
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, _, value)) => value
                .split(',')
                .map(|s| {
                    parse_f64(s).map_err(|message| Error::StoreFormat {
                        line: *line,
                        message,
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    fn into_metadata(self) -> Result<StoreMetadata> {
        let format: String = self.require("format")?;
        if format != FORMAT_TAG {
            return Err(Error::StoreFormat {
                line: 1,
                message: format!("unsupported format '{format}'"),
            });
        }
        let family: PriorFamily =
            self.require::<String>("prior")?
                .parse()
                .map_err(|m: String| Error::StoreFormat {
                    line: 0,
                    message: m,
                })?;
        let w_mode = match self.require::<String>("w_mode")?.as_str() {
            "fixed" => WMode::Fixed,
            "hyper" => WMode::Hyper {
                prior_variance: self.require("hyper_w_var")?,
            },
            other => {
                return Err(Error::StoreFormat {
                    line: 0,
                    message: format!("unknown w_mode '{other}'"),
                })
            }
        };
        let prior = PriorSpec {
            family,
            alpha: self.require("alpha")?,
            log_w: self.require("log_w")?,
            w_mode,
            sigma0_sq: self.require("sigma0_sq")?,
        };
        let settings = McmcSettings {
            n1: self.require("n1")?,
            l1: self.require("l1")?,
            n2: self.require("n2")?,
            l2: self.require("l2")?,
            eps: self.require("eps")?,
            zeta: self.require("zeta")?,
            thin: self.require("thin")?,
            seed: self.require("seed")?,
        };
        let stats = |name: &str| -> Result<PhaseStats> {
            Ok(PhaseStats {
                iterations: self.require(&format!("{name}_iterations"))?,
                accepted: self.require(&format!("{name}_accepted"))?,
                divergent: self.require(&format!("{name}_divergent"))?,
                active_total: self.require(&format!("{name}_active_total"))?,
            })
        };
        let standardization = match (self.list("train_means")?, self.list("train_sds")?) {
            (Some(means), Some(sds)) => Some(Standardization { means, sds }),
            _ => None,
        };
        let class_count: usize = self.require("classes")?;
        if class_count < 2 {
            return Err(Error::StoreFormat {
                line: 0,
                message: format!("need at least 2 classes, got {class_count}"),
            });
        }
        Ok(StoreMetadata {
            n_features: self.require("p")?,
            class_count,
            settings,
            prior,
            fingerprint: self
                .get("fingerprint")
                .map(|e| e.2.clone())
                .unwrap_or_default(),
            initial: stats("initial")?,
            sampling: stats("sampling")?,
            standardization,
        })
    }
}
