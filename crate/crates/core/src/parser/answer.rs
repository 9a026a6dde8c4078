use std::sync::LazyLock;

use regex::Regex;

use super::{tagged_spans, ParseError, ANSWER_CLOSE, ANSWER_OPEN, BOX_END, BOX_START};
use crate::geometry::BoundingBox;
use crate::parser::detect_tool_usage;
use crate::Label;

/// Verdict extracted from a completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAnswer {
    pub label: Label,
    /// Valid boxes found inside the answer, in order of appearance. Kept for
    /// `Real` answers too; the reward layer decides what they mean.
    pub boxes: Vec<BoundingBox>,
    /// Whether the completion shows a supported tool call or a tool response.
    pub tool_used: bool,
}

static FLAT_COORDS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*$").unwrap());
static PAIR_COORDS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*,\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*$").unwrap()
});

/// Contents of the first `<answer>...</answer>` span.
pub fn answer_span(text: &str) -> Option<&str> {
    tagged_spans(text, ANSWER_OPEN, ANSWER_CLOSE).next()
}

/// Parses `x1,y1,x2,y2` or `(x1, y1), (x2, y2)`; `None` for anything else,
/// including degenerate or negative rectangles.
pub fn parse_box_coords(span: &str) -> Option<BoundingBox> {
    let caps = FLAT_COORDS.captures(span).or_else(|| PAIR_COORDS.captures(span))?;
    let mut c = [0i64; 4];
    for (slot, m) in c.iter_mut().zip(caps.iter().skip(1)) {
        *slot = m?.as_str().parse().ok()?;
    }
    BoundingBox::from_coords(c).ok()
}

/// Extracts the verdict, boxes and tool usage from a raw completion.
///
/// "fake" takes precedence when both keywords occur in the answer.
pub fn parse_answer(completion: &str) -> Result<ParsedAnswer, ParseError> {
    let span = answer_span(completion).ok_or(ParseError::MissingAnswerTag)?;
    let lower = span.to_lowercase();
    let label = if lower.contains("fake") {
        Label::Fake
    } else if lower.contains("real") {
        Label::Real
    } else {
        return Err(ParseError::NoLabelKeyword(span.to_string()));
    };
    let boxes = tagged_spans(span, BOX_START, BOX_END)
        .filter_map(parse_box_coords)
        .collect();
    Ok(ParsedAnswer {
        label,
        boxes,
        tool_used: detect_tool_usage(&[completion]),
    })
}

/// Canonical answer text: `<answer>real</answer>` or
/// `<answer>fake, <|box_start|>x1,y1,x2,y2<|box_end|>...</answer>`.
pub fn render_answer(label: Label, boxes: &[BoundingBox]) -> String {
    let mut out = String::from(ANSWER_OPEN);
    out.push_str(label.as_str());
    if label == Label::Fake {
        for b in boxes {
            out.push_str(", ");
            out.push_str(BOX_START);
            out.push_str(&b.to_string());
            out.push_str(BOX_END);
        }
    }
    out.push_str(ANSWER_CLOSE);
    out
}
