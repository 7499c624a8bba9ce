//! Optional subprocess client for an external computer-algebra engine
//! (PARI/GP-compatible `gp` binary).
//!
//! The client never computes arithmetic itself: it generates one
//! deterministic script per task, feeds it to the engine on stdin, and
//! parses a line-oriented, sentinel-delimited reply:
//!
//! ```text
//! GGC_BEGIN <task>
//! GGC <key>=<value>
//! ...
//! GGC_END <task>
//! ```
//!
//! Every fetched field is tagged `provenance = cas`, and the script text
//! plus the engine version string are kept for audit.  The engine is
//! located through `GGC_ENGINE_PATH` (default `gp`) and each task is
//! bounded by `GGC_TASK_TIMEOUT_SECS` (default 60), overridable per client.
//! Bundled data never depends on this module; it is a refresher only.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::record::{
    CapitulationEntry, FieldRecord, HilbertAux, LayerSequence, Provenance, Tower,
};

/// Environment variable naming the engine binary.
pub const ENGINE_PATH_VAR: &str = "GGC_ENGINE_PATH";
/// Environment variable with the per-task timeout in seconds.
pub const TIMEOUT_VAR: &str = "GGC_TASK_TIMEOUT_SECS";

/// One fetchable quantity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CasTask {
    /// Cyclic invariants of the class group of Q(sqrt(-d)).
    ClassGroup,
    /// The auxiliary class number: h(Q(sqrt(3d))) for p = 3, h(k(zeta_p))
    /// for p >= 5.
    AuxClassNumber,
    /// ord_p(#A_n) for layers n = c, ..., c+depth-1 of a tower whose
    /// defining polynomials are stored on the record.
    LayerClassNumbers { tower: Tower, c: u32, depth: u32 },
    /// Principality of the listed generator classes at one layer.
    Capitulation { generators: Vec<String>, layer: u32 },
}

impl CasTask {
    pub fn name(&self) -> &'static str {
        match self {
            CasTask::ClassGroup => "class_group",
            CasTask::AuxClassNumber => "aux_class_number",
            CasTask::LayerClassNumbers { .. } => "layer_class_numbers",
            CasTask::Capitulation { .. } => "capitulation",
        }
    }
}

/// Fundamental discriminant of Q(sqrt(m)) for a square-free nonzero m.
fn fundamental_discriminant(m: i64) -> i64 {
    if m.rem_euclid(4) == 1 {
        m
    } else {
        4 * m
    }
}

fn tower_layer_label(tower: Tower, n: u32) -> Vec<String> {
    match tower {
        Tower::N => vec![format!("N{n}"), format!("k{n}a")],
        Tower::Nstar => vec![format!("Nstar{n}")],
        Tower::Anticyclotomic => vec![format!("k{n}a")],
        Tower::Cyclotomic => vec![format!("k{n}c")],
        Tower::H => vec![format!("H{n}")],
    }
}

fn lookup_polynomial(
    defining: Option<&BTreeMap<String, String>>,
    tower: Tower,
    n: u32,
) -> Result<&str> {
    let map = defining.ok_or_else(|| {
        Error::DataMissing("defining_polynomials (needed for layer scripts)".into())
    })?;
    for label in tower_layer_label(tower, n) {
        if let Some(poly) = map.get(&label) {
            return Ok(poly.as_str());
        }
    }
    Err(Error::DataMissing(format!(
        "defining polynomial for layer {n} of the {tower:?} tower"
    )))
}

/// The deterministic engine script for one task.
pub fn generate_script(
    task: &CasTask,
    p: u64,
    d: u64,
    defining: Option<&BTreeMap<String, String>>,
) -> Result<String> {
    let name = task.name();
    let mut lines: Vec<String> = vec![
        "default(parisize, 64000000);".into(),
        format!("print(\"GGC_BEGIN {name}\");"),
        "print(\"GGC engine_version=\", version);".into(),
    ];
    match task {
        CasTask::ClassGroup => {
            let disc = fundamental_discriminant(-(d as i64));
            lines.push(format!("K = quadclassunit({disc});"));
            lines.push("print(\"GGC cyc=\", K.cyc);".into());
        }
        CasTask::AuxClassNumber => {
            if p == 3 {
                let disc = fundamental_discriminant(3 * d as i64);
                lines.push(format!("K = quadclassunit({disc});"));
                lines.push("print(\"GGC kind=real_quad\");".into());
                lines.push("print(\"GGC h=\", K.no);".into());
            } else {
                lines.push(format!(
                    "P = polredbest(polcompositum(x^2 + {d}, polcyclo({p}))[1]);"
                ));
                lines.push("K = bnfinit(P, 1);".into());
                lines.push("print(\"GGC kind=k_zetap\");".into());
                lines.push("print(\"GGC h=\", K.no);".into());
            }
        }
        CasTask::LayerClassNumbers { tower, c, depth } => {
            if *depth == 0 {
                return Err(Error::TaskUnsupported("layer depth must be >= 1".into()));
            }
            for n in *c..c + depth {
                let poly = lookup_polynomial(defining, *tower, n)?;
                lines.push(format!("K{n} = bnfinit({poly}, 1);"));
                lines.push(format!(
                    "print(\"GGC ord_{n}=\", valuation(K{n}.no, {p}));"
                ));
            }
        }
        CasTask::Capitulation { generators, layer } => {
            if generators.is_empty() {
                return Err(Error::TaskUnsupported(
                    "capitulation needs at least one generator".into(),
                ));
            }
            let poly = lookup_polynomial(defining, Tower::N, *layer)?;
            lines.push(format!("K = bnfinit({poly}, 1);"));
            for gen in generators {
                lines.push(format!("pr = idealprimedec(K, {gen})[1];"));
                lines.push(format!(
                    "print(\"GGC principal_{gen}=\", if(vecmax(concat(bnfisprincipal(K, pr)[1], [0])) == 0, 1, 0));"
                ));
            }
        }
    }
    lines.push(format!("print(\"GGC_END {name}\");"));
    lines.push("quit();".into());
    Ok(lines.join("\n") + "\n")
}

/// Audit trail of one executed task.
#[derive(Debug, Clone)]
pub struct TaskAudit {
    pub task: String,
    pub script: String,
    pub engine_version: Option<String>,
}

/// Fields produced by a fetch, to be merged into a record with
/// `provenance = cas`.
#[derive(Debug, Clone, Default)]
pub struct RecordPatch {
    pub class_group_k: Option<Vec<u32>>,
    pub hilbert_aux: Option<HilbertAux>,
    pub layers: Option<Vec<LayerSequence>>,
    pub capitulation: Option<Vec<CapitulationEntry>>,
    pub audits: Vec<TaskAudit>,
}

impl RecordPatch {
    /// Merge into a record, tagging every touched field `cas`.
    pub fn apply_to(&self, rec: &mut FieldRecord) {
        if let Some(cg) = &self.class_group_k {
            rec.class_group_k = cg.clone();
            rec.provenance
                .insert("class_group_k".into(), Provenance::Cas);
        }
        if let Some(aux) = &self.hilbert_aux {
            rec.hilbert_aux = Some(aux.clone());
            rec.provenance.insert("hilbert_aux".into(), Provenance::Cas);
        }
        if let Some(layers) = &self.layers {
            let mut merged = rec.layers.clone().unwrap_or_default();
            for new_entry in layers {
                merged.retain(|l| l.tower != new_entry.tower);
                merged.push(new_entry.clone());
            }
            rec.layers = Some(merged);
            rec.provenance.insert("layers".into(), Provenance::Cas);
        }
        if let Some(cap) = &self.capitulation {
            rec.capitulation = Some(cap.clone());
            rec.provenance.insert("capitulation".into(), Provenance::Cas);
        }
    }
}

/// Subprocess client for the external engine.
#[derive(Debug, Clone)]
pub struct CasClient {
    engine_path: PathBuf,
    timeout: Duration,
}

impl Default for CasClient {
    fn default() -> Self {
        Self::from_env()
    }
}

impl CasClient {
    /// Engine path and timeout from the environment, with defaults.
    pub fn from_env() -> Self {
        let engine_path = std::env::var(ENGINE_PATH_VAR)
            .map(PathBuf::from)
            .unwrap_or_else(|_| PathBuf::from("gp"));
        let timeout = std::env::var(TIMEOUT_VAR)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .map(Duration::from_secs)
            .unwrap_or(Duration::from_secs(60));
        CasClient {
            engine_path,
            timeout,
        }
    }

    pub fn with_engine(mut self, path: impl Into<PathBuf>) -> Self {
        self.engine_path = path.into();
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Run all tasks for (p, d) and return the patch.  `base` supplies
    /// defining polynomials for layer and capitulation scripts.
    pub fn fetch(
        &self,
        p: u64,
        d: u64,
        tasks: &[CasTask],
        base: Option<&FieldRecord>,
    ) -> Result<RecordPatch> {
        let mut patch = RecordPatch::default();
        let defining = base.and_then(|r| r.defining_polynomials.as_ref());
        for task in tasks {
            let script = generate_script(task, p, d, defining)?;
            let (pairs, raw) = self.run_script(&script, task.name())?;
            let engine_version = pairs
                .iter()
                .find(|(k, _)| k == "engine_version")
                .map(|(_, v)| v.clone());
            patch.audits.push(TaskAudit {
                task: task.name().into(),
                script: script.clone(),
                engine_version,
            });
            self.absorb(task, p, &pairs, &raw, &mut patch)?;
        }
        Ok(patch)
    }

    fn absorb(
        &self,
        task: &CasTask,
        p: u64,
        pairs: &[(String, String)],
        raw: &str,
        patch: &mut RecordPatch,
    ) -> Result<()> {
        let get = |key: &str| -> Result<&str> {
            pairs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::ParseFailure {
                    task: task.name().into(),
                    message: format!("missing key `{key}`"),
                    raw: raw.to_string(),
                })
        };
        match task {
            CasTask::ClassGroup => {
                let cyc = parse_int_list(get("cyc")?).map_err(|message| Error::ParseFailure {
                    task: task.name().into(),
                    message,
                    raw: raw.to_string(),
                })?;
                let mut exps: Vec<u32> = cyc
                    .iter()
                    .map(|&inv| {
                        let mut v = 0u32;
                        let mut m = inv;
                        while m % p == 0 {
                            m /= p;
                            v += 1;
                        }
                        v
                    })
                    .filter(|&v| v > 0)
                    .collect();
                exps.sort_unstable_by(|a, b| b.cmp(a));
                patch.class_group_k = Some(exps);
            }
            CasTask::AuxClassNumber => {
                let h: u64 = get("h")?.trim().parse().map_err(|e| Error::ParseFailure {
                    task: task.name().into(),
                    message: format!("class number: {e}"),
                    raw: raw.to_string(),
                })?;
                let aux = match get("kind")? {
                    "real_quad" => HilbertAux {
                        real_quad_class_number: Some(h),
                        k_zetap_class_number: None,
                    },
                    "k_zetap" => HilbertAux {
                        real_quad_class_number: None,
                        k_zetap_class_number: Some(h),
                    },
                    other => {
                        return Err(Error::ParseFailure {
                            task: task.name().into(),
                            message: format!("unknown kind `{other}`"),
                            raw: raw.to_string(),
                        })
                    }
                };
                patch.hilbert_aux = Some(aux);
            }
            CasTask::LayerClassNumbers { tower, c, depth } => {
                let mut ords = Vec::with_capacity(*depth as usize);
                for n in *c..c + depth {
                    let v: u32 =
                        get(&format!("ord_{n}"))?
                            .trim()
                            .parse()
                            .map_err(|e| Error::ParseFailure {
                                task: task.name().into(),
                                message: format!("ord_{n}: {e}"),
                                raw: raw.to_string(),
                            })?;
                    ords.push(v);
                }
                patch
                    .layers
                    .get_or_insert_with(Vec::new)
                    .push(LayerSequence {
                        tower: *tower,
                        c: *c,
                        ords,
                    });
            }
            CasTask::Capitulation { generators, layer } => {
                let mut entries = Vec::with_capacity(generators.len());
                for gen in generators {
                    let flag = get(&format!("principal_{gen}"))?.trim();
                    let principal = match flag {
                        "1" => true,
                        "0" => false,
                        other => {
                            return Err(Error::ParseFailure {
                                task: task.name().into(),
                                message: format!("principal_{gen}: unexpected `{other}`"),
                                raw: raw.to_string(),
                            })
                        }
                    };
                    entries.push(CapitulationEntry {
                        generator: gen.clone(),
                        layer: *layer,
                        principal,
                    });
                }
                patch.capitulation = Some(entries);
            }
        }
        Ok(())
    }

    /// Spawn the engine, feed the script on stdin, and collect the
    /// sentinel-delimited key/value pairs.  Kills the child on timeout.
    fn run_script(&self, script: &str, task_name: &str) -> Result<(Vec<(String, String)>, String)> {
        let mut child = Command::new(&self.engine_path)
            .args(["-q", "-f"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| {
                if e.kind() == std::io::ErrorKind::NotFound {
                    Error::EngineMissing(self.engine_path.display().to_string())
                } else {
                    Error::Io(e)
                }
            })?;
        {
            let mut stdin = child.stdin.take().expect("stdin was piped");
            // the engine may exit before reading everything; ignore EPIPE
            let _ = stdin.write_all(script.as_bytes());
        }
        let stdout = child.stdout.take().expect("stdout was piped");
        let reader = std::thread::spawn(move || -> std::io::Result<String> {
            use std::io::Read;
            let mut buf = String::new();
            let mut stdout = stdout;
            stdout.read_to_string(&mut buf)?;
            Ok(buf)
        });
        let deadline = Instant::now() + self.timeout;
        loop {
            match child.try_wait()? {
                Some(_) => break,
                None => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(Error::EngineTimeout {
                            task: task_name.into(),
                            seconds: self.timeout.as_secs(),
                        });
                    }
                    std::thread::sleep(Duration::from_millis(10));
                }
            }
        }
        let raw = reader
            .join()
            .map_err(|_| Error::ParseFailure {
                task: task_name.into(),
                message: "engine output reader panicked".into(),
                raw: String::new(),
            })??;
        let pairs = parse_sentinel_block(&raw, task_name).ok_or_else(|| Error::ParseFailure {
            task: task_name.into(),
            message: "sentinel block not found".into(),
            raw: raw.clone(),
        })?;
        Ok((pairs, raw))
    }
}

fn parse_sentinel_block(raw: &str, task_name: &str) -> Option<Vec<(String, String)>> {
    let begin = format!("GGC_BEGIN {task_name}");
    let end = format!("GGC_END {task_name}");
    let mut inside = false;
    let mut done = false;
    let mut pairs = Vec::new();
    for line in raw.lines() {
        let line = line.trim();
        if line == begin {
            inside = true;
            continue;
        }
        if line == end {
            done = inside;
            break;
        }
        if inside {
            if let Some(rest) = line.strip_prefix("GGC ") {
                if let Some((k, v)) = rest.split_once('=') {
                    pairs.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
        }
    }
    done.then_some(pairs)
}

fn parse_int_list(text: &str) -> std::result::Result<Vec<u64>, String> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| format!("expected a bracketed list, got `{text}`"))?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad list entry `{part}`: {e}"))
        })
        .collect()
}
