//! Numerical tolerances shared by every module.
//!
//! Every strict inequality in the security checks is evaluated against one of
//! these values, and every emitted report embeds the record it was computed
//! with.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `‖U†U − I‖_max` bound for accepting a tagging unitary.
    pub unitarity: f64,
    /// Max-norm asymmetry accepted before symmetrizing a Hermitian input.
    pub hermitian: f64,
    /// Margin for the strict inequalities of the security conditions.
    pub condition: f64,
    /// Phase-equivalence and column-relation checks.
    pub phase: f64,
    /// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
    pub jacobi: f64,
    pub jacobi_max_sweeps: usize,
    /// Norm check on state vectors.
    pub normalization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unitarity: 1e-10,
            hermitian: 1e-10,
            condition: 1e-9,
            phase: 1e-9,
            jacobi: 1e-12,
            jacobi_max_sweeps: 100,
            normalization: 1e-12,
        }
    }
}

impl Tolerances {
    /// Applies a `NAME=VALUE` override as accepted by the CLI `--tol` flag.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("tolerance override `{spec}` is not NAME=VALUE")))?;
        let parse = |v: &str| -> Result<f64> {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("tolerance `{name}` has non-numeric value `{v}`")))?;
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid(format!(
                    "tolerance `{name}` must be positive and finite"
                )));
            }
            Ok(x)
        };
        match name.trim() {
            "unitarity" => self.unitarity = parse(value)?,
            "hermitian" => self.hermitian = parse(value)?,
            "condition" => self.condition = parse(value)?,
            "phase" => self.phase = parse(value)?,
            "jacobi" => self.jacobi = parse(value)?,
            "normalization" => self.normalization = parse(value)?,
            "jacobi_max_sweeps" => {
                self.jacobi_max_sweeps = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("jacobi_max_sweeps must be an integer, got `{value}`")))?
            }
            other => return Err(Error::invalid(format!("unknown tolerance `{other}`"))),
        }
        Ok(())
    }
}
