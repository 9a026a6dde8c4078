use anyhow::{bail, Result};
use serde_json::json;
use vcrkit::evalkit::mask_to_boxes;
use vcrkit::BinaryMask;

use super::Mask2BoxArgs;

/// Prints one `{mask, boxes}` JSON line per input mask.
pub fn run(a: Mask2BoxArgs) -> Result<()> {
    if a.masks.is_empty() {
        bail!("no mask files given");
    }
    for path in &a.masks {
        let mask = BinaryMask::load(path)?;
        let boxes = mask_to_boxes(&mask);
        println!("{}", json!({"mask": path.display().to_string(), "boxes": boxes}));
    }
    Ok(())
}
