//! The twenty benchmark cases, embedded at compile time.
//!
//! Sizes, flock sizes and obstacle presence follow the usual three groups:
//! obstacle-free (1-6), obstacles with small flocks (7-13) and obstacles
//! with large flocks (14-20). The cluster and obstacle layouts are our own
//! approximations, not published coordinates.

use crate::error::{Error, Result};
use crate::world::ScenarioSpec;

const CASES: [&str; 20] = [
    include_str!("../../scenarios/case01.toml"),
    include_str!("../../scenarios/case02.toml"),
    include_str!("../../scenarios/case03.toml"),
    include_str!("../../scenarios/case04.toml"),
    include_str!("../../scenarios/case05.toml"),
    include_str!("../../scenarios/case06.toml"),
    include_str!("../../scenarios/case07.toml"),
    include_str!("../../scenarios/case08.toml"),
    include_str!("../../scenarios/case09.toml"),
    include_str!("../../scenarios/case10.toml"),
    include_str!("../../scenarios/case11.toml"),
    include_str!("../../scenarios/case12.toml"),
    include_str!("../../scenarios/case13.toml"),
    include_str!("../../scenarios/case14.toml"),
    include_str!("../../scenarios/case15.toml"),
    include_str!("../../scenarios/case16.toml"),
    include_str!("../../scenarios/case17.toml"),
    include_str!("../../scenarios/case18.toml"),
    include_str!("../../scenarios/case19.toml"),
    include_str!("../../scenarios/case20.toml"),
];

pub const CASE_COUNT: usize = CASES.len();

/// Case numbers (1-based) in a group.
pub fn group(g: u8) -> Result<std::ops::RangeInclusive<usize>> {
    match g {
        1 => Ok(1..=6),
        2 => Ok(7..=13),
        3 => Ok(14..=20),
        _ => Err(Error::InvalidParameter(format!("group must be 1, 2 or 3, got {g}"))),
    }
}

/// Embedded case `n` (1-based).
pub fn case(n: usize) -> Result<ScenarioSpec> {
    let text = n
        .checked_sub(1)
        .and_then(|i| CASES.get(i))
        .ok_or_else(|| Error::InvalidParameter(format!("no case {n}; cases run 1..={CASE_COUNT}")))?;
    let spec = ScenarioSpec::from_toml_str(text).map_err(|e| Error::parse(format!("case{n:02}.toml"), e))?;
    spec.validate()?;
    Ok(spec)
}

/// A case given as a number (`3`, `case03`) or a path to a scenario file.
pub fn resolve(name: &str) -> Result<ScenarioSpec> {
    let digits = name.strip_prefix("case").unwrap_or(name);
    match digits.parse::<usize>() {
        Ok(n) => case(n),
        Err(_) => ScenarioSpec::read(name),
    }
}
