use serde_json::Value;

use super::{tagged_spans, ParseError, TOOL_CALL_CLOSE, TOOL_CALL_OPEN, TOOL_RESPONSE_OPEN};
use crate::ToolId;

/// One parsed `<tool_call>` payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToolCall {
    pub tool: ToolId,
    /// Raw `[x1, y1, x2, y2]`, present exactly for `zoom_in`.
    pub bbox: Option<[i64; 4]>,
}

impl ToolCall {
    pub fn new(tool: ToolId) -> Result<Self, ParseError> {
        if tool == ToolId::ZoomIn {
            return Err(ParseError::BadArguments("zoom_in requires a bbox".into()));
        }
        Ok(Self { tool, bbox: None })
    }

    pub fn zoom_in(bbox: [i64; 4]) -> Self {
        Self {
            tool: ToolId::ZoomIn,
            bbox: Some(bbox),
        }
    }

    /// `{"name": ..., "arguments": {...}}` as it appears inside the tags.
    pub fn to_json(&self) -> String {
        let args = match self.bbox {
            Some([x1, y1, x2, y2]) => format!("{{\"bbox\": [{x1}, {y1}, {x2}, {y2}]}}"),
            None => "{}".to_string(),
        };
        format!("{{\"name\": \"{}\", \"arguments\": {}}}", self.tool.name(), args)
    }

    /// Full tagged form, one call per block.
    pub fn to_span(&self) -> String {
        format!("{TOOL_CALL_OPEN}\n{}\n{TOOL_CALL_CLOSE}", self.to_json())
    }
}

/// Contents of every `<tool_call>...</tool_call>` pair.
pub fn tool_call_spans(text: &str) -> impl Iterator<Item = &str> {
    tagged_spans(text, TOOL_CALL_OPEN, TOOL_CALL_CLOSE)
}

/// Parses the JSON between one pair of `<tool_call>` tags.
pub fn parse_tool_call(span: &str) -> Result<ToolCall, ParseError> {
    let value: Value = serde_json::from_str(span.trim()).map_err(|e| ParseError::MalformedJson(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| ParseError::MalformedJson("tool call is not a JSON object".into()))?;
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| ParseError::MalformedJson("missing string field \"name\"".into()))?;
    let tool: ToolId = name.parse()?;

    let empty = serde_json::Map::new();
    let args = match obj.get("arguments") {
        None | Some(Value::Null) => &empty,
        Some(Value::Object(m)) => m,
        Some(other) => {
            return Err(ParseError::BadArguments(format!(
                "arguments must be an object, got {other}"
            )));
        }
    };

    if tool != ToolId::ZoomIn {
        if !args.is_empty() {
            return Err(ParseError::BadArguments(format!("{tool} takes no arguments")));
        }
        return Ok(ToolCall { tool, bbox: None });
    }

    if let Some(extra) = args.keys().find(|k| k.as_str() != "bbox") {
        return Err(ParseError::BadArguments(format!(
            "unexpected zoom_in argument {extra:?}"
        )));
    }
    let items = args
        .get("bbox")
        .and_then(Value::as_array)
        .ok_or_else(|| ParseError::BadArguments("zoom_in requires a bbox array".into()))?;
    if items.len() != 4 {
        return Err(ParseError::BadArguments(format!(
            "bbox needs 4 integers, got {}",
            items.len()
        )));
    }
    let mut bbox = [0i64; 4];
    for (slot, v) in bbox.iter_mut().zip(items) {
        *slot = v
            .as_i64()
            .ok_or_else(|| ParseError::BadArguments(format!("bbox entry {v} is not an integer")))?;
    }
    Ok(ToolCall::zoom_in(bbox))
}

/// Tool usage flag: any well-formed call to a supported tool, or any tool
/// response tag, in any of the turns.
pub fn detect_tool_usage<S: AsRef<str>>(turns: &[S]) -> bool {
    turns.iter().map(AsRef::as_ref).any(|text| {
        text.contains(TOOL_RESPONSE_OPEN) || tool_call_spans(text).any(|span| parse_tool_call(span).is_ok())
    })
}
