use serde::{Deserialize, Serialize};

use super::{BettiVector, ConleyResult};
use crate::decomposition::Tag;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseNode {
    pub name: String,
    pub region: Tag,
    pub betti: Option<BettiVector>,
}

/// Poset with one minimal node per attracting region below a single top node
/// carrying the uncertain region, and the size of the attractor lattice
/// generated by the disjoint attractors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub minimal: Vec<MorseNode>,
    pub top: MorseNode,
    /// Pairs `(lower, upper)` of the strict order.
    pub order: Vec<(String, String)>,
    pub lattice_size: usize,
}

pub fn morse_report(result: &ConleyResult) -> MorseReport {
    let find = |tag: Tag| {
        result
            .per_tag
            .iter()
            .find(|t| t.tag == tag)
            .and_then(|t| t.betti.clone())
    };
    let minimal: Vec<MorseNode> = result
        .per_tag
        .iter()
        .filter_map(|t| match t.tag {
            Tag::Label(k) => Some(MorseNode {
                name: format!("M{k}"),
                region: t.tag,
                betti: t.betti.clone(),
            }),
            Tag::Uncertain => None,
        })
        .collect();
    let top = MorseNode {
        name: "M".into(),
        region: Tag::Uncertain,
        betti: find(Tag::Uncertain),
    };
    let order = minimal
        .iter()
        .map(|m| (m.name.clone(), top.name.clone()))
        .collect();
    // all unions of the disjoint minimal attractors, plus the global attractor
    let lattice_size = (1usize << minimal.len()) + 1;
    MorseReport {
        minimal,
        top,
        order,
        lattice_size,
    }
}
