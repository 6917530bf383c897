//! The ring-spec document format.
//!
//! A ring spec describes a finite-dimensional local algebra, either as a
//! truncated polynomial preset or by explicit structure constants. The
//! loader re-verifies every algebra invariant, so a parsed spec that
//! builds is a certified local algebra.

use crate::algebra::{AlgebraError, FiniteDimAlgebra};
use crate::field::{FieldError, PrimeField};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RingSpecError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field: {0}")]
    Field(#[from] FieldError),
    #[error("invalid algebra: {0}")]
    Validation(#[from] AlgebraError),
    #[error("unknown preset '{0}' (expected e.g. trunc:2)")]
    UnknownPreset(String),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u64,
}

/// A ring-spec document.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RingSpec {
    TruncatedPolynomial {
        field: FieldSpec,
        exponent: usize,
    },
    StructureConstants {
        field: FieldSpec,
        dim: usize,
        basis_labels: Vec<String>,
        /// Entries (u, v, w, scalar): e_u · e_v contains scalar · e_w.
        mult_table: Vec<(usize, usize, usize, u64)>,
        unit: Vec<u64>,
        maxideal_basis: Vec<Vec<u64>>,
    },
}

impl RingSpec {
    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            RingSpec::TruncatedPolynomial { field, exponent } => {
                format!("F_{}[x]/(x^{})", field.p, exponent)
            }
            RingSpec::StructureConstants { field, dim, .. } => {
                format!("structure-constant algebra of dim {dim} over F_{}", field.p)
            }
        }
    }

    pub fn field_p(&self) -> u64 {
        match self {
            RingSpec::TruncatedPolynomial { field, .. } => field.p,
            RingSpec::StructureConstants { field, .. } => field.p,
        }
    }

    /// Canonical JSON encoding (serde field order, no whitespace).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("ring specs serialize")
    }
}

/// Parse a ring-spec document, with line/column diagnostics on failure.
pub fn parse_ring_spec(doc: &str) -> Result<RingSpec, RingSpecError> {
    serde_json::from_str(doc).map_err(|e| RingSpecError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Build the certified algebra a spec describes.
pub fn build_algebra(spec: &RingSpec) -> Result<Arc<FiniteDimAlgebra>, RingSpecError> {
    match spec {
        RingSpec::TruncatedPolynomial { field, exponent } => {
            let f = PrimeField::new(field.p)?;
            Ok(FiniteDimAlgebra::truncated_polynomial(f, *exponent)?)
        }
        RingSpec::StructureConstants {
            field,
            dim,
            basis_labels,
            mult_table,
            unit,
            maxideal_basis,
        } => {
            let f = PrimeField::new(field.p)?;
            Ok(FiniteDimAlgebra::from_structure_constants(
                f,
                *dim,
                basis_labels.clone(),
                mult_table,
                unit.clone(),
                maxideal_basis.clone(),
            )?)
        }
    }
}

/// Resolve a CLI-style preset: `trunc:E` is k[x]/(x^E) over F_p.
pub fn preset_spec(p: u64, preset: &str) -> Result<RingSpec, RingSpecError> {
    if let Some(e) = preset.strip_prefix("trunc:") {
        let exponent: usize = e
            .parse()
            .map_err(|_| RingSpecError::UnknownPreset(preset.to_string()))?;
        return Ok(RingSpec::TruncatedPolynomial {
            field: FieldSpec { p },
            exponent,
        });
    }
    Err(RingSpecError::UnknownPreset(preset.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_trunc_preset_document() {
        let spec =
            parse_ring_spec(r#"{"field":{"p":2},"type":"truncated_polynomial","exponent":2}"#)
                .unwrap();
        let a = build_algebra(&spec).unwrap();
        assert_eq!(a.dim(), 2);
        assert_eq!(spec.describe(), "F_2[x]/(x^2)");
    }

    #[test]
    fn parse_structure_constants_document() {
        // F_2[x,y]/(x^2, y^2, xy)
        let doc = r#"{
            "type": "structure_constants",
            "field": {"p": 2},
            "dim": 3,
            "basis_labels": ["1", "x", "y"],
            "mult_table": [[0,0,0,1],[0,1,1,1],[1,0,1,1],[0,2,2,1],[2,0,2,1]],
            "unit": [1,0,0],
            "maxideal_basis": [[0,1,0],[0,0,1]]
        }"#;
        let spec = parse_ring_spec(doc).unwrap();
        let a = build_algebra(&spec).unwrap();
        assert_eq!(a.dim(), 3);
        assert_eq!(a.verify_local().unwrap().nilpotency_index, 2);
    }

    #[test]
    fn non_prime_characteristic_rejected() {
        let spec =
            parse_ring_spec(r#"{"field":{"p":4},"type":"truncated_polynomial","exponent":2}"#)
                .unwrap();
        assert!(matches!(build_algebra(&spec), Err(RingSpecError::Field(_))));
    }

    #[test]
    fn parse_error_carries_location() {
        let err = parse_ring_spec("{\n  \"type\": oops\n}").unwrap_err();
        match err {
            RingSpecError::Parse { line, .. } => assert_eq!(line, 2),
            _ => panic!("expected parse error"),
        }
    }

    #[test]
    fn invalid_algebra_rejected_by_loader() {
        // unit not idempotent: 1·1 = 0
        let doc = r#"{
            "type": "structure_constants",
            "field": {"p": 2},
            "dim": 2,
            "basis_labels": ["1", "x"],
            "mult_table": [[0,1,1,1],[1,0,1,1]],
            "unit": [1,0],
            "maxideal_basis": [[0,1]]
        }"#;
        let spec = parse_ring_spec(doc).unwrap();
        assert!(matches!(
            build_algebra(&spec),
            Err(RingSpecError::Validation(_))
        ));
    }

    #[test]
    fn preset_round_trip() {
        let spec = preset_spec(3, "trunc:3").unwrap();
        assert_eq!(
            spec,
            RingSpec::TruncatedPolynomial { field: FieldSpec { p: 3 }, exponent: 3 }
        );
        assert!(preset_spec(2, "poly:2").is_err());
    }

    #[test]
    fn ground_field_spec_is_loadable() {
        // The field itself: dim 1, empty maximal ideal. Valid as an algebra;
        // the theorem pipeline rejects it later.
        let doc = r#"{
            "type": "structure_constants",
            "field": {"p": 2},
            "dim": 1,
            "basis_labels": ["1"],
            "mult_table": [[0,0,0,1]],
            "unit": [1],
            "maxideal_basis": []
        }"#;
        let spec = parse_ring_spec(doc).unwrap();
        let a = build_algebra(&spec).unwrap();
        assert_eq!(a.dim(), 1);
    }
}
