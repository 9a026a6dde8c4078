//! Completion and trajectory text formats.
//!
//! All tags are matched byte-exactly: `<answer>`, `</answer>`,
//! `<|box_start|>`, `<|box_end|>`, `<tool_call>`, `</tool_call>`,
//! `<tool_response>`.

mod answer;
mod templates;
mod tool_call;
mod trajectory;

pub use answer::{answer_span, parse_answer, parse_box_coords, render_answer, ParsedAnswer};
pub use templates::{system_prompt, USER_PROMPT};
pub use tool_call::{detect_tool_usage, parse_tool_call, tool_call_spans, ToolCall};
pub use trajectory::{parse_trajectory, read_trajectories, serialize_trajectory, Role, Trajectory, Turn};

use crate::UnknownTool;

pub const ANSWER_OPEN: &str = "<answer>";
pub const ANSWER_CLOSE: &str = "</answer>";
pub const BOX_START: &str = "<|box_start|>";
pub const BOX_END: &str = "<|box_end|>";
pub const TOOL_CALL_OPEN: &str = "<tool_call>";
pub const TOOL_CALL_CLOSE: &str = "</tool_call>";
pub const TOOL_RESPONSE_OPEN: &str = "<tool_response>";
pub const TOOL_RESPONSE_CLOSE: &str = "</tool_response>";
pub const IMAGE_PLACEHOLDER: &str = "<image>";

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("MissingAnswerTag: no <answer>...</answer> span")]
    MissingAnswerTag,
    #[error("NoLabelKeyword: answer {0:?} mentions neither \"real\" nor \"fake\"")]
    NoLabelKeyword(String),
    #[error("MalformedJson: {0}")]
    MalformedJson(String),
    #[error(transparent)]
    UnknownTool(#[from] UnknownTool),
    #[error("BadArguments: {0}")]
    BadArguments(String),
    #[error("InvalidTrajectory: {0}")]
    InvalidTrajectory(String),
}

impl ParseError {
    /// Stable name of the error kind, for reports and logs.
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::MissingAnswerTag => "MissingAnswerTag",
            ParseError::NoLabelKeyword(_) => "NoLabelKeyword",
            ParseError::MalformedJson(_) => "MalformedJson",
            ParseError::UnknownTool(_) => "UnknownTool",
            ParseError::BadArguments(_) => "BadArguments",
            ParseError::InvalidTrajectory(_) => "InvalidTrajectory",
        }
    }
}

/// Byte ranges of the contents of every `open ... close` pair, scanning left
/// to right without nesting. An unterminated `open` ends the scan.
pub(crate) fn tagged_spans<'a>(text: &'a str, open: &'a str, close: &'a str) -> impl Iterator<Item = &'a str> + 'a {
    let mut rest = text;
    std::iter::from_fn(move || {
        let start = rest.find(open)? + open.len();
        let len = rest[start..].find(close)?;
        let span = &rest[start..start + len];
        rest = &rest[start + len + close.len()..];
        Some(span)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_spans_scan_in_order() {
        let spans: Vec<_> = tagged_spans("a<x>1</x>b<x>2</x><x>3", "<x>", "</x>").collect();
        assert_eq!(spans, ["1", "2"]);
        assert_eq!(tagged_spans("<x><x>1</x>", "<x>", "</x>").next(), Some("<x>1"));
    }
}
