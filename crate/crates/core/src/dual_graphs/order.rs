use std::collections::BTreeMap;

use super::{MapStratumData, StratumCode, StratumData, VertexId};

/// `s ≺ s'`: `s'` is isomorphic to a contraction of `s` along a nonempty
/// set of edges. Not reflexive; see [`equivalent`].
pub fn precedes(s: &StratumData, s_prime: &StratumData) -> bool {
    if s_prime.edges().len() >= s.edges().len() {
        return false;
    }
    let target = s_prime.canonical_code();
    contraction_codes(s, None).any(|c| c == target)
}

pub fn map_precedes(ms: &MapStratumData, ms_prime: &MapStratumData) -> bool {
    if ms_prime.base().edges().len() >= ms.base().edges().len() {
        return false;
    }
    let target = ms_prime.canonical_code();
    contraction_codes(ms.base(), Some(ms.degrees())).any(|c| c == target)
}

/// Isomorphism of stratum data (genus and tail preserving).
pub fn equivalent(a: &StratumData, b: &StratumData) -> bool {
    a.canonical_code() == b.canonical_code()
}

pub fn map_equivalent(a: &MapStratumData, b: &MapStratumData) -> bool {
    a.canonical_code() == b.canonical_code()
}

/// Canonical codes of the contractions along every nonempty edge subset.
fn contraction_codes<'a>(
    s: &'a StratumData,
    degrees: Option<&'a BTreeMap<VertexId, u32>>,
) -> impl Iterator<Item = StratumCode> + 'a {
    let n_edges = s.edges().len();
    (1u64..(1u64 << n_edges)).map(move |mask| {
        // descending indices keep the remaining positions valid
        let mut ms = MapStratumData {
            base: s.clone(),
            degrees: degrees.cloned().unwrap_or_else(|| s.vertices().iter().map(|v| (v.id, 0)).collect()),
        };
        for e in (0..n_edges).rev().filter(|e| mask >> e & 1 == 1) {
            ms = ms.contract(e).expect("edge index in range");
        }
        ms.canonical_code()
    })
}
