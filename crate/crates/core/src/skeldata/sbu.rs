//! SBU Kinect interaction text files.
//!
//! One line per frame: the frame index followed by 90 comma-separated reals,
//! person one's 15 joints then person two's, each joint as `x, y, depth`.
//! The public release lays files out as `<set>/<class:02>/<take>/skeleton_pos.txt`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::sequence::{Interaction, InteractionRecord, SkeletonSequence, COORDS, SBU_JOINTS};
use crate::error::{Error, Result};

const VALUES_PER_PERSON: usize = SBU_JOINTS * COORDS;
const FIELDS_PER_LINE: usize = 1 + 2 * VALUES_PER_PERSON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Exact field counts and range-checked values.
    #[default]
    Strict,
    /// Tolerates blank lines and trailing separators; no range checks.
    Lenient,
}

/// Parse SBU text for an interaction whose class and set are already known.
pub fn parse_sbu(
    text: &str,
    origin: &str,
    category: Interaction,
    set_id: &str,
    mode: ParseMode,
) -> Result<InteractionRecord> {
    let mut actor = Vec::new();
    let mut reactor = Vec::new();
    let err = |line: usize, reason: String| Error::Parse { path: origin.to_string(), line, reason };

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match mode {
            ParseMode::Strict => raw.trim_end_matches('\r'),
            ParseMode::Lenient => raw.trim().trim_end_matches(',').trim_end(),
        };
        if line.is_empty() {
            if mode == ParseMode::Lenient {
                continue;
            }
            return Err(err(lineno, "empty line".into()));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != FIELDS_PER_LINE {
            return Err(err(lineno, format!("expected {FIELDS_PER_LINE} fields, found {}", fields.len())));
        }
        let index = fields[0].trim();
        if index.parse::<f64>().is_err() {
            return Err(err(lineno, format!("bad frame index '{index}'")));
        }
        let mut values = Vec::with_capacity(FIELDS_PER_LINE - 1);
        for (k, f) in fields[1..].iter().enumerate() {
            let v: f64 =
                f.trim().parse().map_err(|_| err(lineno, format!("field {} is not a number: '{f}'", k + 2)))?;
            if !v.is_finite() {
                return Err(err(lineno, format!("field {} is not finite", k + 2)));
            }
            values.push(v);
        }
        actor.extend_from_slice(&values[..VALUES_PER_PERSON]);
        reactor.extend_from_slice(&values[VALUES_PER_PERSON..]);
    }
    if actor.is_empty() {
        return Err(err(0, "no frames".into()));
    }

    let actor = SkeletonSequence::new(SBU_JOINTS, actor)?;
    let reactor = SkeletonSequence::new(SBU_JOINTS, reactor)?;
    if mode == ParseMode::Strict {
        actor.validate_ranges()?;
        reactor.validate_ranges()?;
    }
    InteractionRecord::new(category, set_id, actor, reactor)
}

/// Parse one file, taking class and set id from its position in the SBU
/// directory layout.
pub fn parse_sbu_file(path: &Path, mode: ParseMode) -> Result<InteractionRecord> {
    let (category, set_id) = infer_meta(path)?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sbu(&text, &path.display().to_string(), category, &set_id, mode)
}

fn infer_meta(path: &Path) -> Result<(Interaction, String)> {
    let comps: Vec<String> = path.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    // .../<set>/<class>/<take>/<file>
    if comps.len() >= 4 {
        let set_id = &comps[comps.len() - 4];
        let class = &comps[comps.len() - 3];
        if let Some(category) = class.parse::<usize>().ok().and_then(Interaction::from_sbu_folder) {
            if is_set_id(set_id) {
                return Ok((category, set_id.clone()));
            }
        }
    }
    Err(Error::Dataset(format!("{} is not laid out as <set>/<class>/<take>/<file>", path.display())))
}

fn is_set_id(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 6 && b[0] == b's' && b[3] == b's' && [1, 2, 4, 5].iter().all(|&i| b[i].is_ascii_digit())
}

/// Load every `skeleton_pos.txt` under an SBU release root, sorted by path.
pub fn load_sbu_tree(root: &Path, mode: ParseMode) -> Result<Vec<InteractionRecord>> {
    let mut files = Vec::new();
    collect_files(root, &mut files)?;
    files.sort();
    files.iter().map(|p| parse_sbu_file(p, mode)).collect()
}

fn collect_files(dir: &Path, out: &mut Vec<std::path::PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == "skeleton_pos.txt") {
            out.push(path);
        }
    }
    Ok(())
}

/// Render a 15-joint record back to SBU text with six decimals.
pub fn write_sbu(record: &InteractionRecord) -> Result<String> {
    if record.actor.joints() != SBU_JOINTS {
        return Err(Error::Dataset(format!(
            "SBU files hold {SBU_JOINTS}-joint skeletons, record has {}",
            record.actor.joints()
        )));
    }
    let mut out = String::new();
    for t in 0..record.frames() {
        write!(out, "{}", t + 1).unwrap();
        for v in record.actor.frame(t).iter().chain(record.reactor.frame(t)) {
            write!(out, ",{v:.6}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_line(idx: usize) -> String {
        format!("{idx},{}", vec!["0"; 90].join(","))
    }

    #[test]
    fn zero_line_gives_two_zero_skeletons() {
        let r = parse_sbu(&zero_line(1), "mem", Interaction::Hugging, "s01s02", ParseMode::Strict).unwrap();
        assert_eq!(r.frames(), 1);
        assert!(r.actor.data().iter().chain(r.reactor.data()).all(|&v| v == 0.0));
        assert_eq!(r.actor.joints(), 15);
    }

    #[test]
    fn three_lines_three_frames() {
        let text = (1..=3).map(zero_line).collect::<Vec<_>>().join("\n") + "\n";
        let r = parse_sbu(&text, "mem", Interaction::Hugging, "s01s02", ParseMode::Strict).unwrap();
        assert_eq!(r.frames(), 3);
    }

    #[test]
    fn wrong_field_count_names_line() {
        let text = format!("{}\n2,0,0\n", zero_line(1));
        match parse_sbu(&text, "f.txt", Interaction::Hugging, "s01s02", ParseMode::Strict) {
            Err(Error::Parse { line, path, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(path, "f.txt");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn strict_rejects_out_of_range_lenient_accepts() {
        let mut fields = vec!["0.5"; 90];
        fields[2] = "9.0";
        let text = format!("1,{}", fields.join(","));
        assert!(matches!(
            parse_sbu(&text, "m", Interaction::Kicking, "s01s02", ParseMode::Strict),
            Err(Error::OutOfRange { field: "depth", .. })
        ));
        assert!(parse_sbu(&text, "m", Interaction::Kicking, "s01s02", ParseMode::Lenient).is_ok());
    }

    #[test]
    fn lenient_skips_trailing_separator_and_blank_lines() {
        let text = format!("{},  \n\n{}\n", zero_line(1), zero_line(2));
        assert!(parse_sbu(&text, "m", Interaction::Kicking, "s01s02", ParseMode::Strict).is_err());
        let r = parse_sbu(&text, "m", Interaction::Kicking, "s01s02", ParseMode::Lenient).unwrap();
        assert_eq!(r.frames(), 2);
    }

    #[test]
    fn meta_comes_from_layout() {
        let p = Path::new("/data/SBU/s03s04/04/002/skeleton_pos.txt");
        let (c, s) = infer_meta(p).unwrap();
        assert_eq!(c, Interaction::Punching);
        assert_eq!(s, "s03s04");
        assert!(infer_meta(Path::new("skeleton_pos.txt")).is_err());
        assert!(infer_meta(Path::new("/x/s03s04/09/002/skeleton_pos.txt")).is_err());
    }
}
