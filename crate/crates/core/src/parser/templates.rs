//! Fixed prompt text used when materializing trajectories.

use serde_json::json;

use crate::ToolId;

/// Question asked in the first user turn; the image placeholder comes first.
pub const USER_PROMPT: &str = "<image>Determine if this image is real or fake. \
If manipulation is found, highlight the tampered regions with bounding boxes.";

fn tool_schema(tool: ToolId) -> serde_json::Value {
    let (description, parameters) = match tool {
        ToolId::ZoomIn => (
            "Zooms in on a suspicious region to check for fine-grained manipulation artifacts like inconsistent textures or noise.",
            json!({
                "type": "object",
                "properties": {
                    "bbox": {
                        "type": "array",
                        "items": {"type": "integer"},
                        "description": "The bounding box coordinates [x1, y1, x2, y2] of the region to zoom in."
                    }
                },
                "required": ["bbox"]
            }),
        ),
        ToolId::Ela => (
            "Performs Error Level Analysis to reveal inconsistencies in the image's compression levels. Tampered regions often exhibit distinct error levels.",
            json!({"type": "object", "properties": {}, "required": []}),
        ),
        ToolId::Fft => (
            "Analyzes the image's frequency domain using Fast Fourier Transform. Tampering can introduce periodic artifacts or disrupt natural frequency patterns.",
            json!({"type": "object", "properties": {}, "required": []}),
        ),
        ToolId::Npp => (
            "Analyzes the image's noise fingerprints using Noise Print Pattern. Tampered regions often show inconsistent noise variance compared to the authentic background.",
            json!({"type": "object", "properties": {}, "required": []}),
        ),
    };
    json!({
        "type": "function",
        "function": {"name": tool.name(), "description": description, "parameters": parameters}
    })
}

/// System prompt advertising the four tools and the `<tool_call>` protocol.
pub fn system_prompt() -> String {
    let order = [ToolId::ZoomIn, ToolId::Ela, ToolId::Fft, ToolId::Npp];
    let tools: Vec<String> = order.iter().map(|&t| tool_schema(t).to_string()).collect();
    format!(
        "You are a helpful assistant.\n\n# Tools\n\nYou may call one or more functions to assist with the user query.\n\n\
         You are provided with function signatures within <tools></tools> XML tags:\n<tools>\n{}\n</tools>\n\n\
         For each function call, return a json object with function name and arguments within <tool_call></tool_call> XML tags:\n\
         <tool_call>\n{{\"name\": <function-name>, \"arguments\": <args-json-object>}}\n</tool_call>",
        tools.join("\n")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_prompt_lists_every_tool() {
        let p = system_prompt();
        for t in ToolId::ALL {
            assert!(p.contains(&format!("\"name\":\"{}\"", t.name())), "{t}");
        }
        assert!(p.ends_with("</tool_call>"));
    }

    #[test]
    fn user_prompt_has_one_image() {
        assert_eq!(USER_PROMPT.matches("<image>").count(), 1);
    }
}
