use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::pattern::PhotonPattern;
use super::sampling::{SampleMeta, SampleSet, SampleSource};

/// `dir/name.jsonl` → `dir/name.meta.json`.
pub fn meta_path(samples_path: &Path) -> PathBuf {
    let stem = samples_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    samples_path.with_file_name(format!("{stem}.meta.json"))
}

/// One JSON array of 8 counts per line, plus the companion metadata file.
pub fn write_samples(path: &Path, samples: &SampleSet) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for shot in &samples.shots {
        writeln!(w, "{shot}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let mut meta = samples.meta.clone();
    meta.shots = samples.shots.len();
    let meta_file = meta_path(path);
    let json = serde_json::to_string_pretty(&meta)?;
    fs::write(&meta_file, json + "\n").map_err(|e| Error::io(&meta_file, e))
}

pub fn read_meta(path: &Path) -> Result<SampleMeta> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_line(line: &str) -> std::result::Result<PhotonPattern, String> {
    let values: Vec<i64> = serde_json::from_str(line).map_err(|e| format!("not a JSON integer array: {e}"))?;
    if values.len() != 8 {
        return Err(format!("expected 8 counts, found {}", values.len()));
    }
    let mut counts = [0u16; 8];
    for (mode, (&v, slot)) in values.iter().zip(counts.iter_mut()).enumerate() {
        *slot = u16::try_from(v).map_err(|_| format!("count {v} on mode {mode} is out of range"))?;
    }
    Ok(PhotonPattern(counts))
}

/// Read a sample file. `#` lines and blank lines are skipped; metadata is
/// taken from the companion file when present.
pub fn ingest_samples(path: &Path) -> Result<SampleSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut shots = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let shot = parse_line(line).map_err(|reason| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            reason,
        })?;
        shots.push(shot);
    }
    if shots.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            reason: "file contains no shots".into(),
        });
    }

    let companion = meta_path(path);
    let mut meta = if companion.exists() {
        let meta = read_meta(&companion)?;
        if meta.shots != shots.len() {
            return Err(Error::Parse {
                path: companion,
                line: 0,
                reason: format!("metadata lists {} shots, file has {}", meta.shots, shots.len()),
            });
        }
        meta
    } else {
        SampleMeta {
            code: None,
            source: SampleSource::Ingested,
            seed: None,
            loss: None,
            threshold: false,
            shots: shots.len(),
            cutoff_pairs: None,
            covered_mass: None,
        }
    };
    if meta.threshold {
        if let Some(i) = shots.iter().position(|p| p.max_count() > 1) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                reason: "threshold data with a count above 1".into(),
            });
        }
    }
    meta.source = SampleSource::Ingested;
    Ok(SampleSet { shots, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::make_embedding;
    use crate::engine::{build_table, sample};

    #[test]
    fn three_identical_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        fs::write(&p, "# header\n[0,0,1,0,0,0,1,0]\n[0,0,1,0,0,0,1,0]\n\n[0, 0, 1, 0, 0, 0, 1, 0]\n").unwrap();
        let s = ingest_samples(&p).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.shots.iter().all(|x| *x == PhotonPattern([0, 0, 1, 0, 0, 0, 1, 0])));
        assert_eq!(s.meta.source, SampleSource::Ingested);
        assert_eq!(s.meta.code, None);
    }

    #[test]
    fn malformed_lines_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.jsonl");
        for (body, line, needle) in [
            ("[0,0,0,0,0,0,0,0]\n[1,2]\n", 2, "expected 8 counts"),
            ("[0,0,0,0,0,0,0,-1]\n", 1, "out of range"),
            ("[0,0,0,0,0,0,0,0]\n\n#c\nhello\n", 4, "JSON"),
            ("[0,0,0,0,0,0,0,0.5]\n", 1, "JSON"),
        ] {
            fs::write(&p, body).unwrap();
            match ingest_samples(&p) {
                Err(Error::Parse { line: l, reason, .. }) => {
                    assert_eq!(l, line);
                    assert!(reason.contains(needle), "{reason}");
                }
                other => panic!("expected parse error, got {other:?}"),
            }
        }
        fs::write(&p, "# only a comment\n").unwrap();
        assert!(ingest_samples(&p).is_err());
        assert!(matches!(
            ingest_samples(&dir.path().join("missing.jsonl")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn written_samples_ingest_back() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("1111111111.jsonl");
        let spec = make_embedding("1111111111".parse().unwrap()).unwrap();
        let set = sample(&build_table(&spec, 8).unwrap(), 500, 3).unwrap();
        write_samples(&p, &set).unwrap();
        assert!(dir.path().join("1111111111.meta.json").exists());
        let back = ingest_samples(&p).unwrap();
        assert_eq!(back.shots, set.shots);
        let mut expected = set.meta.clone();
        expected.source = SampleSource::Ingested;
        assert_eq!(back.meta, expected);
    }

    #[test]
    fn meta_shot_count_must_match() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.jsonl");
        let spec = make_embedding("0000000100".parse().unwrap()).unwrap();
        let set = sample(&build_table(&spec, 8).unwrap(), 10, 3).unwrap();
        write_samples(&p, &set).unwrap();
        let body = fs::read_to_string(&p).unwrap();
        let truncated: String = body.lines().take(5).map(|l| format!("{l}\n")).collect();
        fs::write(&p, truncated).unwrap();
        assert!(ingest_samples(&p).is_err());
    }
}
