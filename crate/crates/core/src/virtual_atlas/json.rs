//! JSON atlas models:
//!
//! ```json
//! {
//!   "n": 1,
//!   "ground": [{"index": [], "points": [1, 2]}, {"index": [1], "points": [2, 3]}],
//!   "overlaps": [{"small": [], "large": [1], "domain": [2], "codomain": [2], "map": [[2, 2]]}],
//!   "fiber_ranks": [1],
//!   "theta": [{"small": [], "large": [1], "labels": [1]}]
//! }
//! ```
//!
//! Ground sets and overlaps that are not listed are empty.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    indices, subset_of, AtlasError, FiberedPatchSystem, FinitePatchSystem, Overlap, Point, TransitionLabeling,
    MAX_INDICES,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtlasJson {
    pub n: usize,
    pub ground: Vec<GroundJson>,
    #[serde(default)]
    pub overlaps: Vec<OverlapJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_ranks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<ThetaJson>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundJson {
    pub index: Vec<u32>,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OverlapJson {
    pub small: Vec<u32>,
    pub large: Vec<u32>,
    pub domain: Vec<Point>,
    pub codomain: Vec<Point>,
    pub map: Vec<(Point, Point)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThetaJson {
    pub small: Vec<u32>,
    pub large: Vec<u32>,
    pub labels: Vec<u32>,
}

impl AtlasJson {
    pub fn parse(text: &str) -> Result<Self, AtlasError> {
        serde_json::from_str(text).map_err(|e| AtlasError::Json(e.to_string()))
    }

    fn check_indices(&self, idx: &[u32]) -> Result<(), AtlasError> {
        if let Some(&bad) = idx.iter().find(|&&i| i == 0 || i as usize > self.n) {
            return Err(AtlasError::Json(format!("index {bad} outside 1..={}", self.n)));
        }
        Ok(())
    }

    pub fn to_system(&self) -> Result<FiberedPatchSystem, AtlasError> {
        if self.n > MAX_INDICES {
            return Err(AtlasError::TooManyIndices(self.n));
        }
        let mut ground = vec![BTreeSet::new(); 1 << self.n];
        for g in &self.ground {
            self.check_indices(&g.index)?;
            ground[subset_of(&g.index) as usize].extend(g.points.iter().copied());
        }
        let mut overlaps = BTreeMap::new();
        for o in &self.overlaps {
            self.check_indices(&o.small)?;
            self.check_indices(&o.large)?;
            let map: BTreeMap<Point, Point> = o.map.iter().copied().collect();
            if map.len() != o.map.len() {
                return Err(AtlasError::Json("map lists a point twice".into()));
            }
            overlaps.insert(
                (subset_of(&o.small), subset_of(&o.large)),
                Overlap { domain: o.domain.iter().copied().collect(), codomain: o.codomain.iter().copied().collect(), map },
            );
        }
        let fiber_ranks = self.fiber_ranks.clone().unwrap_or_else(|| vec![1; self.n]);
        if fiber_ranks.len() != self.n {
            return Err(AtlasError::Json(format!("fiber_ranks needs {} entries", self.n)));
        }
        Ok(FiberedPatchSystem { base: FinitePatchSystem::new(self.n, ground, overlaps)?, fiber_ranks })
    }

    pub fn transition_labeling(&self) -> Result<Option<TransitionLabeling>, AtlasError> {
        let Some(theta) = &self.theta else { return Ok(None) };
        let mut labels = BTreeMap::new();
        for t in theta {
            self.check_indices(&t.small)?;
            self.check_indices(&t.large)?;
            labels.insert((subset_of(&t.small), subset_of(&t.large)), t.labels.clone());
        }
        Ok(Some(TransitionLabeling { n: self.n, labels }))
    }

    pub fn from_system(p: &FiberedPatchSystem) -> Self {
        let base = &p.base;
        AtlasJson {
            n: base.n(),
            ground: (0..1u32 << base.n())
                .map(|s| GroundJson { index: indices(s), points: base.ground(s).iter().copied().collect() })
                .collect(),
            overlaps: base
                .overlaps()
                .iter()
                .map(|(&(i, j), o)| OverlapJson {
                    small: indices(i),
                    large: indices(j),
                    domain: o.domain.iter().copied().collect(),
                    codomain: o.codomain.iter().copied().collect(),
                    map: o.map.iter().map(|(&a, &b)| (a, b)).collect(),
                })
                .collect(),
            fiber_ranks: Some(p.fiber_ranks.clone()),
            theta: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"n":1,"ground":[{"index":[],"points":[1,2]},{"index":[1],"points":[2,3]}],
            "overlaps":[{"small":[],"large":[1],"domain":[2],"codomain":[2],"map":[[2,2]]}]}"#;
        let parsed = AtlasJson::parse(text).unwrap();
        let sys = parsed.to_system().unwrap();
        assert_eq!(sys.base.ground(1).len(), 2);
        let again = AtlasJson::from_system(&sys).to_system().unwrap();
        assert_eq!(again, sys);
    }

    #[test]
    fn rejects_bad_indices() {
        let text = r#"{"n":1,"ground":[{"index":[],"points":[1]},{"index":[2],"points":[1]}]}"#;
        assert!(matches!(AtlasJson::parse(text).unwrap().to_system(), Err(AtlasError::Json(_))));
    }
}
