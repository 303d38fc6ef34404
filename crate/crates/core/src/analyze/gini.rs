use super::AnalyzeError;

/// Gini coefficient of a count vector, `Σ_i Σ_j |x_i − x_j| / (2 n² μ)`.
///
/// Evaluated in the sorted form `(2 Σ i·x_(i) − (n+1) Σ x) / (n Σ x)` with
/// integer arithmetic, so the only rounding is the final division.
pub fn gini(counts: &[u64]) -> Result<f64, AnalyzeError> {
    if counts.is_empty() {
        return Err(AnalyzeError::EmptyCounts);
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as u128;
    let total: u128 = sorted.iter().map(|&x| x as u128).sum();
    if total == 0 {
        return Err(AnalyzeError::AllZeroCounts);
    }
    let weighted: u128 = sorted.iter().enumerate().map(|(i, &x)| (i as u128 + 1) * x as u128).sum();
    let num = 2 * weighted - (n + 1) * total;
    Ok(num as f64 / (n * total) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_cases() {
        assert_eq!(gini(&[5, 5, 5, 5]).unwrap(), 0.0);
        assert_eq!(gini(&[8, 0, 0, 0]).unwrap(), 0.75);
        assert_eq!(gini(&[1, 2, 3, 4]).unwrap(), 0.25);
        assert_eq!(gini(&[7]).unwrap(), 0.0);
    }

    #[test]
    fn undefined_inputs() {
        assert!(matches!(gini(&[]), Err(AnalyzeError::EmptyCounts)));
        assert!(matches!(gini(&[0, 0]), Err(AnalyzeError::AllZeroCounts)));
    }

    #[test]
    fn spike_reaches_upper_bound() {
        let mut v = vec![0u64; 365];
        v[100] = 42;
        assert!((gini(&v).unwrap() - 364.0 / 365.0).abs() < 1e-15);
    }
}
