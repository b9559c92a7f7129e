use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

use super::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_path: Option<String>,
    pub config_sha256: String,
    pub seed: u64,
    pub timestamp: String,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<&Path>, config_bytes: &[u8], seed: u64, outputs: &[&str]) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_path: config_path.map(|p| p.display().to_string()),
            config_sha256: sha256_hex(config_bytes),
            seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| CliError::Check(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Check(format!("{}: {e}", path.display())))
    }
}

/// Compare a previous run in `dir` against the current config bytes.
pub fn check_manifest(dir: &Path, command: &str, config_bytes: &[u8]) -> Result<RunManifest, CliError> {
    let m = RunManifest::read(dir)?;
    if m.command != command {
        return Err(CliError::Check(format!(
            "manifest is for `{}`, not `{command}`",
            m.command
        )));
    }
    let digest = sha256_hex(config_bytes);
    if m.config_sha256 != digest {
        return Err(CliError::Check(format!(
            "config digest mismatch: manifest {}, config {digest}",
            m.config_sha256
        )));
    }
    for out in &m.outputs {
        if !dir.join(out).is_file() {
            return Err(CliError::Check(format!("missing output {out}")));
        }
    }
    Ok(m)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Buffered CSV table written in one go.
pub struct Table {
    path: PathBuf,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(dir: &Path, name: &str, header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table {
            path: dir.join(name),
            writer,
        }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> Result<(), CliError> {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        write_file(&self.path, &bytes)
    }
}

/// Log–log plot of `|R − Ψ|` against `Ψ`: one polyline per sample and a
/// reference line of the given slope.
pub fn error_plot_svg(psi: &[f64], errors: &[Vec<f64>], slope: f64) -> String {
    const W: f64 = 960.0;
    const H: f64 = 640.0;
    const PAD: f64 = 60.0;
    let floor = 0.5;
    let lx: Vec<f64> = psi.iter().map(|p| p.max(1e-300).log10()).collect();
    let ly = |e: f64| e.abs().max(floor).log10();
    let (x0, x1) = bounds(lx.iter().copied());
    let (y0, y1) = bounds(errors.iter().flatten().map(|&e| ly(e)).chain([floor.log10()]));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0).max(1e-12) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0).max(1e-12) * (H - 2.0 * PAD);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<g stroke=\"black\"><line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\"/><line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\"/></g>\n",
        b = H - PAD,
        r = W - PAD
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">log10 Psi ({x0:.2} .. {x1:.2})</text>\n",
        W / 2.0,
        H - 20.0
    ));
    s.push_str(&format!(
        "<text x=\"20\" y=\"{}\" transform=\"rotate(-90 20 {})\" text-anchor=\"middle\">log10 |R - Psi| ({y0:.2} .. {y1:.2})</text>\n",
        H / 2.0,
        H / 2.0
    ));
    for errs in errors {
        let pts: Vec<String> = lx
            .iter()
            .zip(errs)
            .map(|(&x, &e)| format!("{:.2},{:.2}", sx(x), sy(ly(e))))
            .collect();
        s.push_str(&format!(
            "<polyline class=\"sample\" fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.4\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
    }
    // reference through the first checkpoint's median error
    let mut first: Vec<f64> = errors.iter().filter_map(|e| e.first()).map(|&e| ly(e)).collect();
    first.sort_by(|a, b| a.total_cmp(b));
    let anchor = first.get(first.len() / 2).copied().unwrap_or(0.0);
    let start = lx.first().copied().unwrap_or(0.0);
    let end = lx.last().copied().unwrap_or(0.0);
    s.push_str(&format!(
        "<polyline class=\"reference\" fill=\"none\" stroke=\"crimson\" stroke-width=\"2\" points=\"{:.2},{:.2} {:.2},{:.2}\"/>\n",
        sx(start),
        sy(anchor),
        sx(end),
        sy(anchor + slope * (end - start))
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" fill=\"crimson\">slope {slope:.4}</text>\n",
        W - PAD - 120.0,
        PAD
    ));
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_structure() {
        let svg = error_plot_svg(
            &[10.0, 100.0, 1000.0],
            &[vec![1.0, -5.0, 20.0], vec![0.0, 3.0, 9.0]],
            2.0 / 3.0,
        );
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches("class=\"reference\"").count(), 1);
        assert!(svg.contains("viewBox=\"0 0 960 640\""));
    }

    #[test]
    fn digest_tracks_bytes() {
        assert_ne!(sha256_hex(b"{}"), sha256_hex(b"{ }"));
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
