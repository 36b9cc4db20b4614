//! Render the multi-center construction of a fixture as SVG.

use mp_polar::assembly::ReconstructionMode;
use mp_polar::dataset::{gen_fixtures, render_instance, RenderOptions, Suite};

fn main() -> mp_polar::Result<()> {
    let set = gen_fixtures(Suite::Concave, 1, 11)?;
    let svg = render_instance(
        &set,
        1,
        &RenderOptions {
            mode: ReconstructionMode::Multi,
            ..Default::default()
        },
    )?;
    let path = std::env::temp_dir().join("mp_polar_render.svg");
    std::fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
