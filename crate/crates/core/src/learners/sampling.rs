/// Inverse-CDF draw: the first arm whose cumulative probability exceeds `u`.
///
/// Arms are scanned in index order, so equal cumulative sums resolve to the
/// lower index. If rounding leaves `u` above the final cumulative sum, the
/// last arm with positive mass is returned.
#[inline]
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    debug_assert!((0.0..1.0).contains(&u));
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scans_in_index_order() {
        let p = [0.25, 0.0, 0.75];
        assert_eq!(sample_index(&p, 0.0), 0);
        assert_eq!(sample_index(&p, 0.2499), 0);
        assert_eq!(sample_index(&p, 0.25), 2);
        assert_eq!(sample_index(&p, 0.9999999), 2);
    }

    #[test]
    fn rounding_overflow_falls_back_to_last_positive() {
        let p = [0.3, 0.3, 0.3999999999, 0.0];
        assert_eq!(sample_index(&p, 0.99999999999), 2);
    }
}
