use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Image-level verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Real => "real",
            Label::Fake => "fake",
        }
    }

    pub fn is_fake(self) -> bool {
        self == Label::Fake
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?}, expected \"real\" or \"fake\"")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(Label::Real),
            "fake" => Ok(Label::Fake),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

/// One of the four forensic tools.
///
/// The declaration order is the tie-break order used when ranking tools
/// with equal scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ToolId {
    #[serde(rename = "ELA")]
    Ela,
    #[serde(rename = "FFT")]
    Fft,
    #[serde(rename = "NPP")]
    Npp,
    #[serde(rename = "zoom_in")]
    ZoomIn,
}

impl ToolId {
    pub const ALL: [ToolId; 4] = [ToolId::Ela, ToolId::Fft, ToolId::Npp, ToolId::ZoomIn];

    /// Function name used in tool calls and score files.
    pub fn name(self) -> &'static str {
        match self {
            ToolId::Ela => "ELA",
            ToolId::Fft => "FFT",
            ToolId::Npp => "NPP",
            ToolId::ZoomIn => "zoom_in",
        }
    }
}

impl fmt::Display for ToolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("UnknownTool: {0:?}")]
pub struct UnknownTool(pub String);

impl FromStr for ToolId {
    type Err = UnknownTool;

    /// Exact match on the serialized function names.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ToolId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| UnknownTool(s.to_string()))
    }
}
