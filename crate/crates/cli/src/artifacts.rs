//! Output directory bookkeeping: digests, the run manifest, and the SVG
//! scatter.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use swapfit_core::ModelSpec;

use crate::failure::Failure;
use crate::settings::Settings;

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    fn of(path: PathBuf, content: &[u8]) -> Self {
        Self { path, sha256: sha256_hex(content), bytes: content.len() as u64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    /// Absolute paths.
    pub inputs: Vec<FileDigest>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<FileDigest>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

/// One record per command; rerunning a command replaces its record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub runs: Vec<RunRecord>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Manifest, Failure> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read(&path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_slice(&text).map_err(|e| Failure::input(format!("bad manifest {}: {e}", path.display())))
    }
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Collects digests of everything a command reads and writes.
pub struct Run {
    dir: PathBuf,
    command: &'static str,
    started: u128,
    inputs: Vec<FileDigest>,
    artifacts: Vec<FileDigest>,
}

impl Run {
    pub fn start(dir: &Path, command: &'static str) -> Result<Run, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::general(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Run { dir: dir.to_path_buf(), command, started: now_ms(), inputs: Vec::new(), artifacts: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        let abs = std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
        if !self.inputs.iter().any(|d| d.path == abs) {
            self.inputs.push(FileDigest::of(abs, &bytes));
        }
        Ok(bytes)
    }

    pub fn write(&mut self, name: &str, content: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| Failure::general(format!("cannot write {}: {e}", path.display())))?;
        self.artifacts.retain(|d| d.path != Path::new(name));
        self.artifacts.push(FileDigest::of(PathBuf::from(name), content));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Merges this run into the directory's manifest.
    pub fn finish(self, settings: &Settings) -> Result<(), Failure> {
        let path = self.dir.join(MANIFEST);
        let mut manifest = match std::fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes).unwrap_or_else(|_| Manifest::empty()),
            Err(_) => Manifest::empty(),
        };
        manifest.version = env!("CARGO_PKG_VERSION").to_string();
        manifest.runs.retain(|r| r.command != self.command);
        manifest.runs.push(RunRecord {
            command: self.command.to_string(),
            config: serde_json::to_value(settings)?,
            seed: settings.seed,
            inputs: self.inputs,
            artifacts: self.artifacts,
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
        });
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| Failure::general(format!("cannot write {}: {e}", path.display())))
    }
}

impl Manifest {
    fn empty() -> Self {
        Manifest { version: String::new(), runs: Vec::new() }
    }
}

/// Recomputes every recorded digest; returns one line per mismatch.
pub fn verify(dir: &Path, manifest: &Manifest) -> Vec<String> {
    let mut problems = Vec::new();
    for run in &manifest.runs {
        let files =
            run.inputs.iter().map(|d| (d, d.path.clone())).chain(run.artifacts.iter().map(|d| (d, dir.join(&d.path))));
        for (recorded, path) in files {
            match std::fs::read(&path) {
                Ok(bytes) if sha256_hex(&bytes) == recorded.sha256 => {}
                Ok(_) => problems.push(format!("{}: {} digest mismatch", run.command, path.display())),
                Err(e) => problems.push(format!("{}: {}: {e}", run.command, path.display())),
            }
        }
    }
    problems
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;
const BLUE: &str = "#1f77b4";
const ORANGE: &str = "#ff7f0e";

/// Scatter of `(x, y)` with the fitted curve. Orange marks points where X
/// is explanatory (`z = 1`), blue where Y is.
pub fn scatter_svg(title: &str, x: &[f64], y: &[f64], z: &[u8], model: &ModelSpec) -> String {
    let bounds = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = bounds(x);
    let (y0, y1) = bounds(y);
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{title}</text>"#, WIDTH / 2.0);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ =
        writeln!(s, r#"<polyline points="{left},{top} {left},{bottom} {right},{bottom}" fill="none" stroke="black"/>"#);
    for (label, xv, yv, anchor) in [
        (format!("{x0:.2}"), left, bottom + 18.0, "start"),
        (format!("{x1:.2}"), right, bottom + 18.0, "end"),
        (format!("{y0:.2}"), left - 6.0, bottom, "end"),
        (format!("{y1:.2}"), left - 6.0, top + 4.0, "end"),
    ] {
        let _ = writeln!(s, r#"<text x="{xv}" y="{yv}" text-anchor="{anchor}" font-size="12">{label}</text>"#);
    }
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">x</text>"#, WIDTH / 2.0, HEIGHT - 20.0);
    let _ = writeln!(s, r#"<text x="20" y="{}" text-anchor="middle" font-size="13">y</text>"#, HEIGHT / 2.0);

    for ((&xi, &yi), &zi) in x.iter().zip(y).zip(z) {
        let color = if zi == 1 { ORANGE } else { BLUE };
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="{color}"/>"#, px(xi), py(yi));
    }

    let steps = 200;
    let curve: Vec<String> = (0..=steps)
        .map(|k| x0 + (x1 - x0) * k as f64 / steps as f64)
        .map(|v| (v, model.forward(v)))
        .filter(|&(_, g)| g.is_finite() && g >= y0 && g <= y1)
        .map(|(v, g)| format!("{:.2},{:.2}", px(v), py(g)))
        .collect();
    if curve.len() > 1 {
        let _ =
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, curve.join(" "));
    }

    for (i, (color, label)) in [(ORANGE, "x explanatory (z = 1)"), (BLUE, "y explanatory (z = 0)")].iter().enumerate() {
        let ly = MARGIN + 10.0 + 18.0 * i as f64;
        let _ = writeln!(s, r#"<circle cx="{}" cy="{ly}" r="4" fill="none" stroke="{color}"/>"#, MARGIN + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">{label}</text>"#, MARGIN + 30.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}
