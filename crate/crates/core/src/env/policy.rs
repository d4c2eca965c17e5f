use super::ActionVector;

/// Non-adaptive baseline: a fixed fraction of `T₀` split evenly over the
/// live tracks. With nothing tracked the whole slot goes to scanning.
pub fn fixed_policy(fraction: f64, tracked: &[bool], t0: f64) -> ActionVector {
    let n = tracked.iter().filter(|t| **t).count();
    if n == 0 {
        return ActionVector::zeros(tracked.len());
    }
    let each = (fraction * t0 / n as f64).min(t0);
    ActionVector {
        dwells: tracked
            .iter()
            .map(|t| if *t { each } else { 0.0 })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ninety_percent_over_three() {
        let a = fixed_policy(0.9, &[true, false, true, true, false], 2.5);
        assert_eq!(a.dwells, vec![0.75, 0.0, 0.75, 0.75, 0.0]);
    }

    #[test]
    fn nothing_tracked_scans_all_slot() {
        assert_eq!(fixed_policy(0.9, &[false; 5], 2.5), ActionVector::zeros(5));
    }

    #[test]
    fn usage_bounded_by_fraction() {
        for n in 1..=5 {
            for f in [0.0, 0.3, 0.5, 0.7, 0.9, 1.0] {
                let mask: Vec<bool> = (0..5).map(|i| i < n).collect();
                let a = fixed_policy(f, &mask, 2.5);
                assert!(a.total() / 2.5 <= f + 1e-12);
            }
        }
    }
}
