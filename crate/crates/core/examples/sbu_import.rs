//! Lay out a small SBU-style tree on disk, load it back and render one
//! record as SBU text again.
//!
//! cargo run --example sbu_import

use std::fs;

use aia::skeldata::{load_sbu_tree, synth_generate, write_sbu, ParseMode};

fn main() -> aia::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    // <set>/<class:02>/<take>/skeleton_pos.txt
    for (i, r) in synth_generate(1, 1, 12, 15)?.iter().enumerate() {
        let take = dir.path().join("s01s02").join(format!("{:02}", r.category.index() + 1)).join("001");
        fs::create_dir_all(&take).expect("mkdir");
        let mut text = write_sbu(r)?;
        if i == 0 {
            text = text.replace('\n', ",\n");
        }
        fs::write(take.join("skeleton_pos.txt"), text).expect("write");
    }

    match load_sbu_tree(dir.path(), ParseMode::Strict) {
        Ok(_) => println!("strict mode accepted the trailing comma"),
        Err(e) => println!("strict: {e}"),
    }
    let records = load_sbu_tree(dir.path(), ParseMode::Lenient)?;
    for r in &records {
        println!("{} {:>12}: {} frames", r.set_id, r.category.label(), r.frames());
    }
    let first = write_sbu(&records[0])?;
    println!("{}", first.lines().next().unwrap_or("").chars().take(72).collect::<String>());
    Ok(())
}
