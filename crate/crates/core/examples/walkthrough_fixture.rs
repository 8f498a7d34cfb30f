// SPDX-License-Identifier: Apache-2.0

//! Writes the chair/table/flowerpot walkthrough capture and gesture script.
//!
//! ```text
//! cargo run -p sightline-core --example walkthrough_fixture -- crates/cli/fixtures/walkthrough
//! ```

#[path = "../tests/support/scenes.rs"]
mod scenes;

use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).ok_or("usage: walkthrough_fixture <dir>")?);
    std::fs::create_dir_all(&dir)?;
    let (rgb, depth) = scenes::walkthrough(1);
    rgb.save_png(dir.join("rgb.png"))?;
    depth.save_png(dir.join("depth.png"))?;
    std::fs::write(dir.join("script.txt"), scenes::WALKTHROUGH_SCRIPT)?;
    println!("wrote {}", dir.display());
    Ok(())
}
