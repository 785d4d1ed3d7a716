use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{betti, to_cubical};
use crate::decomposition::{RegionAssignment, Tag};
use crate::{Error, Result};

const EXPECTED_TABLE: &str = include_str!("../../fixtures/expected_betti.json");

/// Betti numbers `(β_0, β_1, ...)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BettiVector(pub Vec<usize>);

impl BettiVector {
    fn trimmed(&self) -> &[usize] {
        let end = self.0.iter().rposition(|&b| b != 0).map_or(0, |i| i + 1);
        &self.0[..end]
    }

    /// Equality up to trailing zeros.
    pub fn matches(&self, other: &BettiVector) -> bool {
        self.trimmed() == other.trimmed()
    }
}

impl fmt::Display for BettiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Expected Betti vector of every region of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpectedBetti(pub BTreeMap<Tag, BettiVector>);

impl ExpectedBetti {
    pub fn num_labels(&self) -> usize {
        self.0.keys().filter(|t| matches!(t, Tag::Label(_))).count()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn ellipsoidal(dim: usize) -> ExpectedBetti {
    let mut sphere = vec![0; dim];
    sphere[0] = 1;
    sphere[dim - 1] += 1;
    let mut ball = vec![0; dim];
    ball[0] = 1;
    let mut map = BTreeMap::new();
    map.insert(Tag::Uncertain, BettiVector(sphere.clone()));
    map.insert(Tag::Label(0), BettiVector(sphere));
    map.insert(Tag::Label(1), BettiVector(ball));
    ExpectedBetti(map)
}

/// Expected Betti numbers of a catalog system.
pub fn expected_betti(system: &str) -> Result<ExpectedBetti> {
    let table: BTreeMap<String, ExpectedBetti> = serde_json::from_str(EXPECTED_TABLE)?;
    if let Some(e) = table.get(system) {
        return Ok(e.clone());
    }
    system
        .strip_prefix("ellipsoidal_")
        .and_then(|s| s.strip_suffix('d'))
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&d| d >= 2)
        .map(ellipsoidal)
        .ok_or_else(|| Error::UnknownSystem(system.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagBetti {
    pub tag: Tag,
    pub cells: usize,
    /// `None` when the region is empty.
    pub betti: Option<BettiVector>,
    pub expected: BettiVector,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConleyResult {
    pub success: bool,
    pub per_tag: Vec<TagBetti>,
    /// First failing region in the order `U, N_0, N_1, ...`.
    pub failure: Option<String>,
}

/// Compares the homology of `U` and every `N_k` with the expected table.
pub fn conley_check(assignment: &RegionAssignment, expected: &ExpectedBetti) -> Result<ConleyResult> {
    let mut tags: Vec<Tag> = expected.0.keys().copied().collect();
    for t in assignment.tags() {
        if !tags.contains(&t) {
            tags.push(t);
        }
    }
    tags.sort();
    let computed: Vec<(Tag, usize, Option<BettiVector>)> = tags
        .par_iter()
        .map(|&tag| {
            let cx = to_cubical(assignment, tag);
            let b = if cx.is_empty() { None } else { Some(betti(&cx)?) };
            Ok((tag, cx.len(), b))
        })
        .collect::<Result<_>>()?;

    let mut failure = None;
    let mut per_tag = Vec::with_capacity(computed.len());
    for (tag, cells, b) in computed {
        let reason = match (expected.0.get(&tag), &b) {
            (None, _) => Some(format!("unexpected region {tag}")),
            (Some(_), None) => Some(format!("region {tag} is empty")),
            (Some(e), Some(b)) if !b.matches(e) => {
                Some(format!("region {tag} has Betti numbers {b}, expected {e}"))
            }
            _ => None,
        };
        if failure.is_none() {
            failure = reason.clone();
        }
        per_tag.push(TagBetti {
            tag,
            cells,
            betti: b,
            expected: expected.0.get(&tag).cloned().unwrap_or(BettiVector(vec![])),
            matches: reason.is_none(),
        });
    }
    Ok(ConleyResult {
        success: failure.is_none(),
        per_tag,
        failure,
    })
}
