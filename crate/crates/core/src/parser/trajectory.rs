//! Multi-turn trajectories and their JSONL record form.
//!
//! One record per line:
//!
//! ```json
//! {"sample_id": "x", "messages": [{"role": "user", "content": "<image>..."}], "images": ["x.png"]}
//! ```
//!
//! Images are referenced by `<image>` placeholders in message content, matched
//! in order against the record-level `images` array. Assistant tool calls are
//! appended to the message content as tagged blocks; tool responses are
//! wrapped in `<tool_response>` tags.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{
    answer_span, parse_answer, parse_tool_call, ParseError, ToolCall, ANSWER_OPEN, IMAGE_PLACEHOLDER, TOOL_CALL_CLOSE,
    TOOL_CALL_OPEN, TOOL_RESPONSE_CLOSE, TOOL_RESPONSE_OPEN,
};
use crate::geometry::BoundingBox;
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "system")]
    System,
    #[serde(rename = "user")]
    User,
    #[serde(rename = "assistant")]
    Assistant,
    #[serde(rename = "tool")]
    ToolResponse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub role: Role,
    /// Message text without tool-call blocks or tool-response wrapping.
    pub content: String,
    /// One path per `<image>` placeholder in `content`.
    pub images: Vec<String>,
    /// Only assistant turns carry calls.
    pub tool_calls: Vec<ToolCall>,
}

const RESERVED_TAGS: [&str; 4] = [TOOL_CALL_OPEN, TOOL_CALL_CLOSE, TOOL_RESPONSE_OPEN, TOOL_RESPONSE_CLOSE];

impl Turn {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
            images: Vec::new(),
            tool_calls: Vec::new(),
        }
    }

    pub fn with_images(mut self, images: Vec<String>) -> Self {
        self.images = images;
        self
    }

    pub fn with_tool_calls(mut self, calls: Vec<ToolCall>) -> Self {
        self.tool_calls = calls;
        self
    }

    fn validate(&self) -> Result<(), ParseError> {
        if !self.tool_calls.is_empty() && self.role != Role::Assistant {
            return Err(ParseError::InvalidTrajectory(format!(
                "{:?} turn carries tool calls",
                self.role
            )));
        }
        let placeholders = self.content.matches(IMAGE_PLACEHOLDER).count();
        if placeholders != self.images.len() {
            return Err(ParseError::InvalidTrajectory(format!(
                "{placeholders} image placeholders but {} image paths",
                self.images.len()
            )));
        }
        if let Some(tag) = RESERVED_TAGS.iter().find(|t| self.content.contains(*t)) {
            return Err(ParseError::InvalidTrajectory(format!(
                "content contains reserved tag {tag}"
            )));
        }
        Ok(())
    }

    /// Message content as written to the record.
    fn wire_content(&self) -> String {
        match self.role {
            Role::ToolResponse => format!("{TOOL_RESPONSE_OPEN}\n{}\n{TOOL_RESPONSE_CLOSE}", self.content),
            _ if self.tool_calls.is_empty() => self.content.clone(),
            _ => {
                let calls: Vec<String> = self.tool_calls.iter().map(ToolCall::to_span).collect();
                if self.content.is_empty() {
                    calls.join("\n")
                } else {
                    format!("{}\n{}", self.content, calls.join("\n"))
                }
            }
        }
    }
}

/// Ordered conversation for one sample plus its terminal verdict, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    sample_id: String,
    turns: Vec<Turn>,
    final_label: Option<Label>,
    final_boxes: Vec<BoundingBox>,
}

impl Trajectory {
    /// Validates the turns and reads the verdict from the final assistant
    /// turn. An `<answer>` tag may appear only in that turn.
    pub fn new(sample_id: impl Into<String>, turns: Vec<Turn>) -> Result<Self, ParseError> {
        for t in &turns {
            t.validate()?;
        }
        let answers: Vec<usize> = turns
            .iter()
            .enumerate()
            .filter(|(_, t)| t.content.contains(ANSWER_OPEN))
            .map(|(i, _)| i)
            .collect();
        let (final_label, final_boxes) = match answers.as_slice() {
            [] => (None, Vec::new()),
            [i] if *i + 1 == turns.len() && turns[*i].role == Role::Assistant && turns[*i].tool_calls.is_empty() => {
                match answer_span(&turns[*i].content).map(|_| parse_answer(&turns[*i].content)) {
                    Some(Ok(a)) => (Some(a.label), a.boxes),
                    _ => (None, Vec::new()),
                }
            }
            _ => {
                return Err(ParseError::InvalidTrajectory(
                    "an answer may only appear in the final assistant turn".into(),
                ))
            }
        };
        Ok(Self {
            sample_id: sample_id.into(),
            turns,
            final_label,
            final_boxes,
        })
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn final_label(&self) -> Option<Label> {
        self.final_label
    }

    pub fn final_boxes(&self) -> &[BoundingBox] {
        &self.final_boxes
    }

    /// Tools invoked, in call order.
    pub fn tool_sequence(&self) -> Vec<crate::ToolId> {
        self.turns
            .iter()
            .flat_map(|t| t.tool_calls.iter().map(|c| c.tool))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct WireMessage {
    role: Role,
    content: String,
}

#[derive(Serialize, Deserialize)]
struct WireRecord {
    sample_id: String,
    messages: Vec<WireMessage>,
    images: Vec<String>,
}

/// One JSON line (without the trailing newline).
pub fn serialize_trajectory(t: &Trajectory) -> String {
    let record = WireRecord {
        sample_id: t.sample_id.clone(),
        messages: t
            .turns
            .iter()
            .map(|turn| WireMessage {
                role: turn.role,
                content: turn.wire_content(),
            })
            .collect(),
        images: t.turns.iter().flat_map(|turn| turn.images.iter().cloned()).collect(),
    };
    serde_json::to_string(&record).expect("record contains only strings")
}

fn split_assistant(content: &str) -> Result<(String, Vec<ToolCall>), ParseError> {
    let Some(start) = content.find(TOOL_CALL_OPEN) else {
        return Ok((content.to_string(), Vec::new()));
    };
    let prefix = &content[..start];
    let text = prefix.strip_suffix('\n').unwrap_or(prefix).to_string();

    let mut calls = Vec::new();
    let mut rest = &content[start..];
    loop {
        rest = rest.trim_start_matches('\n');
        if rest.is_empty() {
            break;
        }
        let body = rest
            .strip_prefix(TOOL_CALL_OPEN)
            .ok_or_else(|| ParseError::InvalidTrajectory("text after tool call block".into()))?;
        let end = body
            .find(TOOL_CALL_CLOSE)
            .ok_or_else(|| ParseError::InvalidTrajectory("unterminated tool call".into()))?;
        calls.push(parse_tool_call(&body[..end])?);
        rest = &body[end + TOOL_CALL_CLOSE.len()..];
    }
    Ok((text, calls))
}

fn unwrap_tool_response(content: &str) -> Result<String, ParseError> {
    let inner = content
        .strip_prefix(TOOL_RESPONSE_OPEN)
        .ok_or_else(|| ParseError::InvalidTrajectory("tool turn without <tool_response> tag".into()))?;
    let inner = inner.strip_prefix('\n').unwrap_or(inner);
    let inner = inner
        .strip_suffix(TOOL_RESPONSE_CLOSE)
        .ok_or_else(|| ParseError::InvalidTrajectory("unterminated tool response".into()))?;
    Ok(inner.strip_suffix('\n').unwrap_or(inner).to_string())
}

/// Inverse of [`serialize_trajectory`].
pub fn parse_trajectory(line: &str) -> Result<Trajectory, ParseError> {
    let record: WireRecord = serde_json::from_str(line).map_err(|e| ParseError::MalformedJson(e.to_string()))?;
    let mut images = record.images.into_iter();
    let mut turns = Vec::with_capacity(record.messages.len());
    for msg in record.messages {
        let (content, tool_calls) = match msg.role {
            Role::Assistant => split_assistant(&msg.content)?,
            Role::ToolResponse => (unwrap_tool_response(&msg.content)?, Vec::new()),
            _ => (msg.content, Vec::new()),
        };
        let n = content.matches(IMAGE_PLACEHOLDER).count();
        let paths: Vec<String> = images.by_ref().take(n).collect();
        if paths.len() != n {
            return Err(ParseError::InvalidTrajectory(
                "fewer image paths than placeholders".into(),
            ));
        }
        turns.push(Turn {
            role: msg.role,
            content,
            images: paths,
            tool_calls,
        });
    }
    if images.next().is_some() {
        return Err(ParseError::InvalidTrajectory(
            "more image paths than placeholders".into(),
        ));
    }
    Trajectory::new(record.sample_id, turns)
}

/// Reads a JSONL corpus, skipping blank lines. Errors carry the 1-based line number.
pub fn read_trajectories(reader: impl BufRead) -> Result<Vec<Trajectory>, (usize, ParseError)> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| (i + 1, ParseError::MalformedJson(e.to_string())))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_trajectory(&line).map_err(|e| (i + 1, e))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{render_answer, USER_PROMPT};
    use crate::ToolId;
    use proptest::prelude::*;

    fn user_turn(path: &str) -> Turn {
        Turn::new(Role::User, USER_PROMPT).with_images(vec![path.into()])
    }

    #[test]
    fn real_verdict_record() {
        let t = Trajectory::new(
            "s1",
            vec![user_turn("s1.png"), Turn::new(Role::Assistant, "<answer>real</answer>")],
        )
        .unwrap();
        assert_eq!(t.final_label(), Some(Label::Real));
        let line = serialize_trajectory(&t);
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["messages"][1]["content"], "<answer>real</answer>");
        assert_eq!(v["messages"][1]["role"], "assistant");
        assert_eq!(v["images"], serde_json::json!(["s1.png"]));
        assert_eq!(parse_trajectory(&line).unwrap(), t);
    }

    #[test]
    fn single_ela_call_golden() {
        let b = BoundingBox::new(10, 20, 30, 40).unwrap();
        let t = Trajectory::new(
            "s2",
            vec![
                user_turn("img/s2.png"),
                Turn::new(Role::Assistant, "").with_tool_calls(vec![ToolCall::new(ToolId::Ela).unwrap()]),
                Turn::new(Role::ToolResponse, "<image>").with_images(vec!["maps/s2_ELA.png".into()]),
                Turn::new(Role::Assistant, render_answer(Label::Fake, &[b])),
            ],
        )
        .unwrap();
        let golden = concat!(
            r#"{"sample_id":"s2","messages":["#,
            r#"{"role":"user","content":"<image>Determine if this image is real or fake. If manipulation is found, highlight the tampered regions with bounding boxes."},"#,
            r#"{"role":"assistant","content":"<tool_call>\n{\"name\": \"ELA\", \"arguments\": {}}\n</tool_call>"},"#,
            r#"{"role":"tool","content":"<tool_response>\n<image>\n</tool_response>"},"#,
            r#"{"role":"assistant","content":"<answer>fake, <|box_start|>10,20,30,40<|box_end|></answer>"}],"#,
            r#""images":["img/s2.png","maps/s2_ELA.png"]}"#
        );
        assert_eq!(serialize_trajectory(&t), golden);
        let back = parse_trajectory(golden).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.final_boxes(), &[b]);
        assert_eq!(back.tool_sequence(), vec![ToolId::Ela]);
    }

    #[test]
    fn invalid_turns_rejected() {
        let bad = Turn::new(Role::User, "x").with_tool_calls(vec![ToolCall::new(ToolId::Fft).unwrap()]);
        assert!(Trajectory::new("a", vec![bad]).is_err());
        let bad = Turn::new(Role::User, "<image><image>").with_images(vec!["a".into()]);
        assert!(Trajectory::new("a", vec![bad]).is_err());
        let bad = Turn::new(Role::Assistant, "see <tool_call>");
        assert!(Trajectory::new("a", vec![bad]).is_err());
        let early = vec![
            Turn::new(Role::Assistant, "<answer>real</answer>"),
            Turn::new(Role::User, "again"),
        ];
        assert!(Trajectory::new("a", early).is_err());
    }

    #[test]
    fn trajectory_without_answer() {
        let t = Trajectory::new("a", vec![Turn::new(Role::User, "hi")]).unwrap();
        assert_eq!(t.final_label(), None);
        let t = Trajectory::new("a", vec![Turn::new(Role::Assistant, "<answer>maybe</answer>")]).unwrap();
        assert_eq!(t.final_label(), None);
    }

    #[test]
    fn record_image_count_mismatch() {
        let line = r#"{"sample_id":"a","messages":[{"role":"user","content":"<image>"}],"images":[]}"#;
        assert!(parse_trajectory(line).is_err());
        let line = r#"{"sample_id":"a","messages":[{"role":"user","content":"x"}],"images":["p"]}"#;
        assert!(parse_trajectory(line).is_err());
        let line = r#"{"sample_id":"a","messages":[{"role":"tool","content":"x"}],"images":[]}"#;
        assert!(parse_trajectory(line).is_err());
    }

    #[test]
    fn read_reports_line_numbers() {
        let good = serialize_trajectory(&Trajectory::new("a", vec![Turn::new(Role::User, "q")]).unwrap());
        let text = format!("{good}\n\n{{broken\n");
        let err = read_trajectories(text.as_bytes()).unwrap_err();
        assert_eq!(err.0, 3);
    }

    pub(crate) fn arb_trajectory() -> impl Strategy<Value = Trajectory> {
        let text = "[a-zA-Z0-9 ,.:\n]{0,24}";
        let call = prop_oneof![
            Just(ToolCall::new(ToolId::Ela).unwrap()),
            Just(ToolCall::new(ToolId::Fft).unwrap()),
            Just(ToolCall::new(ToolId::Npp).unwrap()),
            (-50i64..500, -50i64..500, 0i64..600, 0i64..600).prop_map(|(a, b, c, d)| ToolCall::zoom_in([a, b, c, d])),
        ];
        let middle = (
            prop_oneof![
                Just(Role::System),
                Just(Role::User),
                Just(Role::Assistant),
                Just(Role::ToolResponse)
            ],
            text,
            0usize..3,
            proptest::collection::vec(call, 0..3),
            "[a-z/_.]{1,12}",
        )
            .prop_map(|(role, body, n_img, calls, path)| {
                let content = format!("{body}{}", IMAGE_PLACEHOLDER.repeat(n_img));
                let images = (0..n_img).map(|i| format!("{path}{i}")).collect();
                let calls = if role == Role::Assistant { calls } else { Vec::new() };
                Turn::new(role, content).with_images(images).with_tool_calls(calls)
            });
        let verdict = prop_oneof![
            Just(None),
            Just(Some((Label::Real, Vec::new()))),
            proptest::collection::vec((0u32..300, 0u32..300, 1u32..80, 1u32..80), 0..4).prop_map(|bs| {
                Some((
                    Label::Fake,
                    bs.into_iter()
                        .map(|(x, y, w, h)| BoundingBox::new(x, y, x + w, y + h).unwrap())
                        .collect(),
                ))
            }),
        ];
        ("[a-z0-9_]{1,10}", proptest::collection::vec(middle, 0..6), verdict).prop_map(|(id, mut turns, verdict)| {
            if let Some((label, boxes)) = verdict {
                turns.push(Turn::new(Role::Assistant, render_answer(label, &boxes)));
            }
            Trajectory::new(id, turns).expect("generator builds valid trajectories")
        })
    }

    proptest! {
        #[test]
        fn round_trip(t in arb_trajectory()) {
            let line = serialize_trajectory(&t);
            prop_assert!(!line.contains('\n'));
            prop_assert_eq!(parse_trajectory(&line).unwrap(), t);
        }

        #[test]
        fn parse_never_panics(s in ".{0,300}") {
            let _ = parse_trajectory(&s);
        }
    }
}
