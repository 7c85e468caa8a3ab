use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use ergoloc::qmat::{matrix_from_json, matrix_to_json};
use ergoloc::ComplexMatrix;

use crate::CliError;

/// A real number, optionally a multiple of pi: `0.4pi`, `pi`, `-2pi`, `1.5`.
pub fn angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let bad = || format!("cannot read {text:?} as a number or a multiple of pi");
    if let Some(head) = t.strip_suffix("pi") {
        let factor = match head.trim() {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.strip_suffix('*').unwrap_or(h).parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(factor * PI);
    }
    let v: f64 = t.parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        (0..self.steps)
            .map(|i| self.start + span * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// `start:stop:steps` with inclusive endpoints and `steps >= 2`.
pub fn sweep(text: &str) -> Result<Sweep, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("sweep {text:?} must look like start:stop:steps"));
    }
    let steps: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("sweep step count {:?} is not an integer", parts[2]))?;
    if steps < 2 {
        return Err(format!("sweep needs at least 2 steps, got {steps}"));
    }
    Ok(Sweep { start: angle(parts[0])?, stop: angle(parts[1])?, steps })
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    matrix_from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<(), CliError> {
    write_text(path, &matrix_to_json(m))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
}

/// Full double precision, 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
