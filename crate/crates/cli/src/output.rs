//! Artifact writing: a staging directory that is either moved into place
//! whole or deleted, CSV helpers, and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mmmcmc_core::model::AlkaneParams;
use mmmcmc_core::pseudomarginal::default_bin_width;

use crate::config::ExperimentConfig;
use crate::{Experiment, RunError};

pub const MANIFEST: &str = "manifest.txt";

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_owned(), source }
}

/// Scratch directory inside the output directory. Dropping it without
/// [`Staging::commit`] deletes everything written so far.
#[derive(Debug)]
pub struct Staging {
    target: PathBuf,
    dir: PathBuf,
    created_target: bool,
    done: bool,
}

impl Staging {
    pub fn create(target: &Path, tag: &str) -> Result<Self, RunError> {
        let created_target = !target.exists();
        fs::create_dir_all(target).map_err(io_err(target))?;
        let dir = target.join(format!(".partial-{tag}-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
        }
        fs::create_dir(&dir).map_err(io_err(&dir))?;
        Ok(Self { target: target.to_owned(), dir, created_target, done: false })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Moves every staged file into the output directory, replacing files of
    /// the same name. Returns the final paths, sorted.
    pub fn commit(mut self) -> Result<Vec<PathBuf>, RunError> {
        let mut names: Vec<_> = fs::read_dir(&self.dir)
            .map_err(io_err(&self.dir))?
            .map(|e| e.map(|e| e.file_name()))
            .collect::<Result<_, _>>()
            .map_err(io_err(&self.dir))?;
        names.sort();
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let to = self.target.join(&name);
            fs::rename(self.dir.join(&name), &to).map_err(io_err(&to))?;
            out.push(to);
        }
        fs::remove_dir(&self.dir).map_err(io_err(&self.dir))?;
        self.done = true;
        Ok(out)
    }

    pub fn discard(self) {}
}

impl Drop for Staging {
    fn drop(&mut self) {
        if self.done {
            return;
        }
        if let Err(e) = fs::remove_dir_all(&self.dir) {
            log::warn!("could not remove {}: {e}", self.dir.display());
        }
        if self.created_target {
            // Only succeeds when nothing else lives there.
            let _ = fs::remove_dir(&self.target);
        }
    }
}

/// Writes `header` and one line per row.
pub fn write_csv<I, S>(path: &Path, header: &str, rows: I) -> Result<(), RunError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let go = || -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        for row in rows {
            writeln!(w, "{}", row.as_ref())?;
        }
        w.flush()
    };
    go().map_err(io_err(path))
}

/// Flat `key=value` record of everything needed to repeat the run: the
/// resolved configuration (after scaling), then metadata.
pub fn write_manifest(dir: &Path, experiment: Experiment, cfg: &ExperimentConfig, scale: f64) -> Result<(), RunError> {
    let p = AlkaneParams { temperature: cfg.temperature, ..AlkaneParams::default() };
    let lambda = cfg.lambda_factor * p.k_b;
    let mut lines: Vec<String> = cfg.to_key_values().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    let meta = [
        ("experiment", experiment.name().to_string()),
        ("version", env!("CARGO_PKG_VERSION").to_string()),
        ("scale", scale.to_string()),
        ("seed_scheme", "ChaCha8Rng::seed_from_u64(seed) with stream (task << 32) | run".to_string()),
        ("k_b", p.k_b.to_string()),
        ("k_a", p.k_a.to_string()),
        ("r0", p.r0.to_string()),
        ("theta0_deg", p.theta0.to_degrees().to_string()),
        ("torsion_c", p.c.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
        ("beta", p.beta().to_string()),
        ("lambda", lambda.to_string()),
        ("dt_micro", (cfg.dt_micro_factor / lambda).to_string()),
        ("bin_width_resolved", cfg.bin_width.unwrap_or_else(|| default_bin_width(lambda)).to_string()),
    ];
    lines.extend(meta.into_iter().map(|(k, v)| format!("{k}={v}")));
    write_csv(&dir.join(MANIFEST), "# mmmcmc run manifest", lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_staging_leaves_nothing() {
        let root = tempfile::tempdir().unwrap();
        let target = root.path().join("out");
        let s = Staging::create(&target, "t").unwrap();
        write_csv(&s.path().join("a.csv"), "x", ["1"]).unwrap();
        s.discard();
        assert!(!target.exists());
    }

    #[test]
    fn commit_moves_files() {
        let root = tempfile::tempdir().unwrap();
        let s = Staging::create(root.path(), "t").unwrap();
        write_csv(&s.path().join("a.csv"), "x", ["1", "2"]).unwrap();
        let files = s.commit().unwrap();
        assert_eq!(files, vec![root.path().join("a.csv")]);
        assert_eq!(fs::read_to_string(&files[0]).unwrap(), "x\n1\n2\n");
        assert_eq!(fs::read_dir(root.path()).unwrap().count(), 1);
    }
}
