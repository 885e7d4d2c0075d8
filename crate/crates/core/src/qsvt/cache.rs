//! On-disk cache of phase sequences.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::phases::{find_phases, verify, PhaseSequence, CONVENTION};
use super::poly::InversionPolynomial;
use crate::error::Result;

/// Part of every cache key; bump when angle finding changes.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub mu: f64,
    pub epsilon: f64,
    pub degree: usize,
    pub convention: String,
    pub code_version: String,
    pub coefficients: Vec<f64>,
    pub sequence: PhaseSequence,
}

/// Directory of JSON files keyed by `(μ, ε, degree, convention, version)`.
#[derive(Debug, Clone)]
pub struct PhaseCache {
    dir: PathBuf,
}

impl PhaseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, poly: &InversionPolynomial) -> PathBuf {
        self.dir.join(format!(
            "phases_mu-{:016x}_eps-{:016x}_d{}_{}_v{}.json",
            poly.mu.to_bits(),
            poly.epsilon.to_bits(),
            poly.degree,
            CONVENTION,
            CODE_VERSION
        ))
    }

    /// Cached phases for `poly`, computing and storing them on a miss.
    /// Entries whose stored polynomial differs are recomputed.
    pub fn get_or_compute(&self, poly: &InversionPolynomial) -> Result<PhaseSequence> {
        let path = self.path_for(poly);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(entry) = serde_json::from_str::<CacheEntry>(&text) {
                if entry.coefficients == poly.coefficients && entry.convention == CONVENTION {
                    return Ok(entry.sequence);
                }
            }
        }
        let sequence = find_phases(poly)?;
        std::fs::create_dir_all(&self.dir)?;
        let entry = CacheEntry {
            mu: poly.mu,
            epsilon: poly.epsilon,
            degree: poly.degree,
            convention: CONVENTION.to_string(),
            code_version: CODE_VERSION.to_string(),
            coefficients: poly.coefficients.clone(),
            sequence: sequence.clone(),
        };
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string(&entry)?)?;
        std::fs::rename(&tmp, &path)?;
        Ok(sequence)
    }

    /// Every readable entry, sorted by file name.
    pub fn entries(&self) -> Result<Vec<CacheEntry>> {
        let mut paths: Vec<PathBuf> = match std::fs::read_dir(&self.dir) {
            Ok(rd) => rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect(),
            Err(_) => return Ok(Vec::new()),
        };
        paths.sort();
        let mut out = Vec::new();
        for p in paths {
            let text = std::fs::read_to_string(&p)?;
            out.push(serde_json::from_str(&text)?);
        }
        Ok(out)
    }
}

impl CacheEntry {
    /// Max deviation of the stored phases from the stored polynomial.
    pub fn recheck(&self, points: usize) -> f64 {
        verify(&self.sequence.phases, &self.coefficients, points)
    }
}
