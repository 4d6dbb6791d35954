//! Ordered pairs (J₁, J₂) of subsets of a q-point set whose union is the
//! whole set, the index structure of the A-operator sum.

/// Patterns for the level-2 operator: subsets of size at most two.
pub fn union_pair_patterns(q: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    union_pair_patterns_level(q, 2)
}

/// Every element goes to J₁ only, J₂ only, or both; keep pairs with both
/// sides of size at most `t`.
pub fn union_pair_patterns_level(q: usize, t: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    assert!(q >= 1);
    let mut out = Vec::new();
    let mut state = vec![0u8; q];
    loop {
        let j1: Vec<usize> = (0..q).filter(|&i| state[i] != 1).collect();
        let j2: Vec<usize> = (0..q).filter(|&i| state[i] != 0).collect();
        if j1.len() <= t && j2.len() <= t {
            out.push((j1, j2));
        }
        // odometer over {0: J1 only, 1: J2 only, 2: both}
        let mut pos = 0;
        loop {
            if pos == q {
                return out;
            }
            state[pos] += 1;
            if state[pos] < 3 {
                break;
            }
            state[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_for_level_two() {
        assert_eq!(union_pair_patterns(1).len(), 3);
        assert_eq!(union_pair_patterns(2).len(), 9);
        assert_eq!(union_pair_patterns(3).len(), 12);
        assert_eq!(union_pair_patterns(4).len(), 6);
    }

    #[test]
    fn singleton_patterns() {
        let mut p = union_pair_patterns(1);
        p.sort();
        assert_eq!(
            p,
            vec![
                (vec![], vec![0]),
                (vec![0], vec![]),
                (vec![0], vec![0]),
            ]
        );
    }

    #[test]
    fn four_point_patterns_are_disjoint_pairs() {
        for (j1, j2) in union_pair_patterns(4) {
            assert_eq!(j1.len(), 2);
            assert_eq!(j2.len(), 2);
            assert!(j1.iter().all(|x| !j2.contains(x)));
        }
    }

    #[test]
    fn level_one_counts() {
        assert_eq!(union_pair_patterns_level(1, 1).len(), 3);
        assert_eq!(union_pair_patterns_level(2, 1).len(), 2);
    }

    #[test]
    fn union_always_covers() {
        for q in 1..=4 {
            for (j1, j2) in union_pair_patterns(q) {
                let mut u: Vec<usize> = j1.iter().chain(j2.iter()).copied().collect();
                u.sort_unstable();
                u.dedup();
                assert_eq!(u, (0..q).collect::<Vec<_>>());
            }
        }
    }
}
