//! Subset cover: choose p ground elements that completely contain as many
//! family members as possible. With no B-side equations, attacking a set of
//! B entities kills exactly the A entities whose supporters it covers.

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("family member {index} has element {element} outside the ground set")]
    ForeignElement { index: usize, element: String },
    #[error("ground set of {0} elements exceeds the exhaustive limit of 64")]
    TooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetCoverInstance {
    ground: Vec<String>,
    family: Vec<BTreeSet<String>>,
    pub p: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetCoverSolution {
    pub chosen: BTreeSet<String>,
    pub covered_count: usize,
    /// covered_count >= q
    pub satisfies: bool,
}

impl SubsetCoverInstance {
    pub fn new(
        ground: impl IntoIterator<Item = String>,
        family: Vec<BTreeSet<String>>,
        p: usize,
        q: usize,
    ) -> Result<Self, CoverError> {
        let ground: Vec<String> = ground.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if ground.len() > 64 {
            return Err(CoverError::TooLarge(ground.len()));
        }
        for (index, member) in family.iter().enumerate() {
            if let Some(e) = member.iter().find(|e| ground.binary_search(e).is_err()) {
                return Err(CoverError::ForeignElement { index, element: e.clone() });
            }
        }
        Ok(SubsetCoverInstance { ground, family, p, q })
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn family(&self) -> &[BTreeSet<String>] {
        &self.family
    }
}

/// Exhaustive over all p-element subsets (p clamped to |S|); ties go to the
/// lexicographically smallest choice.
pub fn solve_subset_cover(instance: &SubsetCoverInstance) -> SubsetCoverSolution {
    let ground = &instance.ground;
    let masks: Vec<u64> = instance
        .family
        .iter()
        .map(|m| m.iter().map(|e| 1u64 << ground.binary_search(e).expect("validated")).fold(0, |a, b| a | b))
        .collect();
    let p = instance.p.min(ground.len());

    let mut best: Option<(usize, Vec<usize>)> = None;
    for combo in (0..ground.len()).combinations(p) {
        let chosen = combo.iter().fold(0u64, |a, &i| a | (1 << i));
        let covered = masks.iter().filter(|&&m| m & chosen == m).count();
        if best.as_ref().is_none_or(|(c, _)| covered > *c) {
            best = Some((covered, combo));
        }
    }
    let (covered_count, combo) = best.expect("combinations(p) of n >= p is non-empty");
    SubsetCoverSolution {
        chosen: combo.into_iter().map(|i| ground[i].clone()).collect(),
        covered_count,
        satisfies: covered_count >= instance.q,
    }
}
