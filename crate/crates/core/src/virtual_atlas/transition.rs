use std::collections::BTreeMap;

use super::{indices, violation, Axiom, Report, Subset};

/// Multisets `Θ_{J,I}` of generator indices for `I ⊆ J`, stored as sorted
/// lists. Missing entries with `I = J` are empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionLabeling {
    pub n: usize,
    pub labels: BTreeMap<(Subset, Subset), Vec<u32>>,
}

impl TransitionLabeling {
    /// `Θ_{J,I} = {Θ_j : j ∈ J - I}`.
    pub fn canonical(n: usize) -> Self {
        let mut labels = BTreeMap::new();
        for j in 0..1u32 << n {
            for i in 0..1u32 << n {
                if i & !j == 0 {
                    labels.insert((i, j), indices(j & !i));
                }
            }
        }
        TransitionLabeling { n, labels }
    }

    fn get(&self, i: Subset, j: Subset) -> Vec<u32> {
        let mut v = self.labels.get(&(i, j)).cloned().unwrap_or_default();
        v.sort_unstable();
        v
    }
}

/// `Θ_{U,C} = Θ_{I,C} ⊎ Θ_{J,C}` for every pair, with `U = I ∪ J`, `C = I ∩ J`.
pub fn check_transition_data(t: &TransitionLabeling) -> Report {
    let mut violations = Vec::new();
    for i in 0..1u32 << t.n {
        for j in 0..1u32 << t.n {
            let (u, c) = (i | j, i & j);
            let mut sum = t.get(c, i);
            sum.extend(t.get(c, j));
            sum.sort_unstable();
            let whole = t.get(c, u);
            if whole != sum {
                violations.push(violation(
                    Axiom::Transition,
                    i,
                    j,
                    format!("Θ_(U,C) = {whole:?} but the two legs give {sum:?}"),
                ));
            }
        }
    }
    Report { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_labelings_pass() {
        for n in 0..=6 {
            assert!(check_transition_data(&TransitionLabeling::canonical(n)).passed(), "n = {n}");
        }
    }

    #[test]
    fn missing_generator_fails_at_named_pair() {
        let mut t = TransitionLabeling::canonical(2);
        t.labels.insert((0, 0b11), vec![1]);
        let r = check_transition_data(&t);
        assert!(r.violations.iter().any(|v| v.pair == (vec![1], vec![2])));
    }
}
