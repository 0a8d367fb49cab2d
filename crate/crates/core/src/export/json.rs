use serde::{Deserialize, Serialize};

use super::{Axis, ExportBundle, ExportError};
use crate::engine::ParetoApproximation;

/// Value of the `format` field.
pub const APPROXIMATION_FORMAT: &str = "mopareto-approximation/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    axes: Vec<Axis>,
    approximation: ParetoApproximation,
}

/// Pretty-printed canonical JSON; values in normalised orientation.
pub fn emit_json(bundle: &ExportBundle) -> Result<String, ExportError> {
    bundle.check()?;
    let doc = Document {
        format: APPROXIMATION_FORMAT.into(),
        axes: bundle.axes.clone(),
        approximation: bundle.approximation.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("approximation serialises");
    s.push('\n');
    Ok(s)
}

/// Reads a document written by [`emit_json`].
pub fn parse_json(text: &str) -> Result<ExportBundle, ExportError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| ExportError::Json(e.to_string()))?;
    if doc.format != APPROXIMATION_FORMAT {
        return Err(ExportError::Json(format!("unknown format \"{}\"", doc.format)));
    }
    let bundle = ExportBundle {
        approximation: doc.approximation,
        axes: doc.axes,
    };
    bundle.check()?;
    Ok(bundle)
}
