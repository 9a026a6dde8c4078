use anyhow::{anyhow, bail, Context, Result};
use vcrkit::toolbox::run_tool;
use vcrkit::{RasterImage, ToolId, UnknownTool};

use super::{required, tool_args, ToolCmdArgs};

fn parse_bbox(s: &str) -> Result<[i64; 4]> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow!("BadArguments: bbox `{s}` must be four integers x1,y1,x2,y2"))?;
    match parts.as_slice() {
        [a, b, c, d] => Ok([*a, *b, *c, *d]),
        _ => bail!("BadArguments: bbox `{s}` must have exactly four values"),
    }
}

/// Tool names on the command line are matched case-insensitively
/// (`ela` and `ELA` both work); wire formats stay exact.
fn parse_tool_name(name: &str) -> Result<ToolId, UnknownTool> {
    ToolId::ALL
        .into_iter()
        .find(|t| t.name().eq_ignore_ascii_case(name))
        .ok_or_else(|| UnknownTool(name.to_string()))
}

pub fn run(a: ToolCmdArgs) -> Result<()> {
    let tool = parse_tool_name(&a.name)?;
    let input = required(&a.input, "in")?;
    let out = required(&a.out, "out")?;
    let mut args = tool_args(
        a.quality,
        a.amplification,
        a.fft_mode.as_deref(),
        a.block_size,
        a.radial_cutoff,
        a.min_side,
    )?;
    args.bbox = a.bbox.as_deref().map(parse_bbox).transpose()?;
    args.external_map = a.external_map.clone();

    let img = RasterImage::load(&input)?;
    let result = run_tool(tool, &img, &args)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    result.output.save_png(&out)?;
    println!("{}", serde_json::to_string(&result.params)?);
    Ok(())
}
