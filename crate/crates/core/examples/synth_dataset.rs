//! Generate the seeded synthetic interaction set, split it by subject sets
//! and write it to a JSON dataset file.
//!
//! cargo run --example synth_dataset -- [out.json]

use aia::skeldata::{split_by_sets, synth_generate, write_dataset, Interaction, DEFAULT_HELD_OUT};

fn main() -> aia::Result<()> {
    let records = synth_generate(0, 5, 40, 15)?;
    let split = split_by_sets(&records, &DEFAULT_HELD_OUT)?;
    println!("{} records, {} train pairs, {} test pairs", records.len(), split.train.len(), split.test.len());
    for c in Interaction::ALL {
        let r = records.iter().find(|r| r.category == c).unwrap();
        let depth0 = r.actor.joint(0, 0)[2];
        let depth1 = r.actor.joint(r.frames() - 1, 0)[2];
        println!("{:>12}: actor root depth {depth0:.2} -> {depth1:.2}", c.label());
    }
    if let Some(path) = std::env::args().nth(1) {
        write_dataset(path.as_ref(), &records)?;
        println!("wrote {path}");
    }
    Ok(())
}
