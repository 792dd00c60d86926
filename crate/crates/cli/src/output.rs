use std::io::Write;
use std::path::{Path, PathBuf};

use hilbert_orbits::numfield::{FieldElement, NumberField};
use serde_json::{json, Value};

use crate::config::Job;
use crate::CliError;

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn emit(out: Option<&str>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(Path::new(p), bytes),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s.into_bytes()
}

pub fn coords(x: &FieldElement) -> Vec<String> {
    x.coords().iter().map(|c| c.to_string()).collect()
}

/// Resolved config plus a description of the loaded field.
pub fn echo(job: &Job, k: Option<&NumberField>) -> Value {
    let mut cfg = serde_json::to_value(&job.cfg).expect("config serializes");
    if let (Some(k), Value::Object(m)) = (k, &mut cfg) {
        m.insert(
            "field_data".into(),
            json!({
                "name": k.name(),
                "degree": k.degree(),
                "signature": k.signature(),
                "min_poly": k.min_poly_ints().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "torsion_order": k.torsion_order(),
            }),
        );
    }
    cfg
}

/// A JSON document with the config echoed under `"config"`.
pub fn document(job: &Job, k: Option<&NumberField>, mut body: Value) -> Result<(), CliError> {
    if let Value::Object(m) = &mut body {
        m.insert("config".into(), echo(job, k));
    }
    emit(job.cfg.out.as_deref(), &pretty(&body))
}

/// A non-JSON payload; the config and `summary` go to `<out>.meta.json`.
pub fn with_sidecar(job: &Job, k: Option<&NumberField>, payload: &[u8], summary: Value) -> Result<(), CliError> {
    emit(job.cfg.out.as_deref(), payload)?;
    if let Some(out) = job.cfg.out.as_deref() {
        let meta = json!({ "config": echo(job, k), "summary": summary });
        write_atomic(&meta_path(Path::new(out)), &pretty(&meta))?;
    }
    Ok(())
}
