//! Joint decoding by membership in a known correlation set.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Codeword;
use crate::error::{Error, Result};
use crate::graph::LabeledBipartiteGraph;
use crate::oracle::{CorrelationSet, Sender};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipOutcome {
    /// The unique surviving member, if exactly one survived.
    pub triple: Option<[u64; 3]>,
    pub survivors: u64,
    /// Triples examined.
    pub steps: u64,
}

impl MembershipOutcome {
    pub fn is_ok(&self) -> bool {
        self.triple.is_some()
    }
}

fn check_inputs(codewords: &[Codeword; 3], set: &CorrelationSet, graphs: &[LabeledBipartiteGraph; 3]) -> Result<()> {
    for s in Sender::ALL {
        let (c, g) = (&codewords[s.index()], &graphs[s.index()]);
        if c.sender != s {
            return Err(Error::Input(format!("codeword {} belongs to sender {}", s.index(), c.sender)));
        }
        if g.params().n != set.n() {
            return Err(Error::WidthMismatch {
                expected: set.n(),
                actual: g.params().n,
            });
        }
        c.payload.expect_width(g.params().m)?;
    }
    Ok(())
}

/// Members of `set` whose every component is adjacent to its sender's payload.
///
/// Walks whichever is smaller: the set itself or the product of per-sender
/// candidate lists.
pub fn decode_membership(
    codewords: &[Codeword; 3],
    set: &CorrelationSet,
    graphs: &[LabeledBipartiteGraph; 3],
) -> Result<MembershipOutcome> {
    check_inputs(codewords, set, graphs)?;
    let n = set.n();
    let candidates: Vec<Vec<u64>> = Sender::ALL
        .iter()
        .map(|s| {
            let (g, p) = (&graphs[s.index()], codewords[s.index()].payload.value());
            (0..1u64 << n).filter(|&x| g.is_neighbor(x, p)).collect()
        })
        .collect();
    let product = candidates.iter().map(|c| c.len() as u128).product::<u128>();
    let mut survivors = 0u64;
    let mut last = None;
    let mut steps = 0u64;
    if product <= set.len() as u128 {
        for &a in &candidates[0] {
            for &b in &candidates[1] {
                for &c in &candidates[2] {
                    steps += 1;
                    if set.contains(&[a, b, c]) {
                        survivors += 1;
                        last = Some([a, b, c]);
                    }
                }
            }
        }
    } else {
        let member: Vec<Vec<bool>> = candidates
            .iter()
            .map(|c| {
                let mut v = vec![false; 1 << n];
                c.iter().for_each(|&x| v[x as usize] = true);
                v
            })
            .collect();
        set.for_each(|t| {
            steps += 1;
            if (0..3).all(|i| member[i][t[i] as usize]) {
                survivors += 1;
                last = Some(t);
            }
        });
    }
    Ok(MembershipOutcome {
        triple: if survivors == 1 { last } else { None },
        survivors,
        steps,
    })
}

/// Two members sharing all three payloads when every sender uses the fixed label
/// `labels[i]`; both then decode to at least two survivors.
pub fn pigeonhole_collision(
    set: &CorrelationSet,
    graphs: &[LabeledBipartiteGraph; 3],
    labels: [u64; 3],
) -> Option<([u64; 3], [u64; 3])> {
    let mut seen: HashMap<[u64; 3], [u64; 3]> = HashMap::new();
    let mut found = None;
    set.for_each(|t| {
        if found.is_some() {
            return;
        }
        let key = [0, 1, 2].map(|i| graphs[i].neighbor_raw(t[i], labels[i] % graphs[i].degree()));
        match seen.get(&key) {
            Some(&first) => found = Some((first, t)),
            None => {
                seen.insert(key, t);
            }
        }
    });
    found
}
