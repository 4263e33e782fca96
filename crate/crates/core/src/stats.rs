//! Statistical kernels shared across the analysis modules: χ² tail
//! probabilities, goodness-of-fit machinery, Pearson correlation, one-way
//! ANOVA and multinomial sampling for Monte Carlo p-values.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("no observations")]
    EmptyObservation,
    #[error("reference proportions must be non-negative and sum to 1 (got {sum})")]
    BadReference { sum: f64 },
    #[error("inputs have zero variance")]
    ZeroVariance,
    #[error("need at least two groups with at least two total observations")]
    TooFewGroups,
    #[error("input lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
}

/// Upper-tail probability of the χ² distribution with `dof` degrees of
/// freedom. `dof = 0` degenerates to a point mass at zero.
pub fn chi2_sf(x: f64, dof: u64) -> f64 {
    if dof == 0 {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    if !x.is_finite() {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    if x <= 0.0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof as f64).expect("dof > 0");
    (1.0 - d.cdf(x)).clamp(0.0, 1.0)
}

/// Upper-tail probability of the F distribution.
pub fn f_sf(x: f64, df1: u64, df2: u64) -> f64 {
    if !x.is_finite() {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    if x <= 0.0 {
        return 1.0;
    }
    let d = FisherSnedecor::new(df1 as f64, df2 as f64).expect("positive dof");
    (1.0 - d.cdf(x)).clamp(0.0, 1.0)
}

/// χ² goodness-of-fit statistic Σ (O−E)²/E against expected counts.
/// Categories with zero expectation contribute +∞ when observed and are
/// skipped otherwise.
pub fn gof_statistic(observed: &[u64], expected: &[f64]) -> f64 {
    let mut stat = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e > 0.0 {
            let diff = o as f64 - e;
            stat += diff * diff / e;
        } else if o > 0 {
            return f64::INFINITY;
        }
    }
    stat
}

/// One multinomial draw of `n` trials over `probs` (need not be normalized
/// beyond summing to 1; trailing mass absorbs rounding).
pub fn multinomial_draw(rng: &mut ChaCha12Rng, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut rest: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let frac = if rest > 0.0 { (p / rest).clamp(0.0, 1.0) } else { 0.0 };
        // binomial(remaining, frac) by inversion on small counts, normal tail
        // approximation is avoided to keep determinism simple and exact
        let mut c = 0u64;
        for _ in 0..remaining {
            if rng.gen::<f64>() < frac {
                c += 1;
            }
        }
        counts[i] = c;
        remaining -= c;
        rest -= p;
    }
    counts
}

/// Pearson linear correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch { a: xs.len(), b: ys.len() });
    }
    if xs.is_empty() {
        return Err(StatsError::EmptyObservation);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// One-way ANOVA F-test across groups; missing groups (empty vectors) are
/// dropped.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AnovaResult {
    pub f_stat: f64,
    pub df_between: u64,
    pub df_within: u64,
    pub pvalue: f64,
}

pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<AnovaResult, StatsError> {
    let groups: Vec<&Vec<f64>> = groups.iter().filter(|g| !g.is_empty()).collect();
    let g = groups.len();
    let n: usize = groups.iter().map(|v| v.len()).sum();
    if g < 2 || n <= g {
        return Err(StatsError::TooFewGroups);
    }
    let grand = groups.iter().flat_map(|v| v.iter()).sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for grp in &groups {
        let m = grp.iter().sum::<f64>() / grp.len() as f64;
        ssb += grp.len() as f64 * (m - grand) * (m - grand);
        ssw += grp.iter().map(|&x| (x - m) * (x - m)).sum::<f64>();
    }
    let df_between = (g - 1) as u64;
    let df_within = (n - g) as u64;
    if ssw <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let f_stat = (ssb / df_between as f64) / (ssw / df_within as f64);
    let pvalue = f_sf(f_stat, df_between, df_within);
    Ok(AnovaResult {
        f_stat,
        df_between,
        df_within,
        pvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn chi2_tail_matches_reference() {
        // scipy: chi2.sf(10, 1)
        assert!((chi2_sf(10.0, 1) - 0.001565402258002549).abs() < 1e-12);
        // scipy: chi2.sf(2.417910447761194, 3)
        assert!((chi2_sf(2.417910447761194, 3) - 0.4903093069653883).abs() < 1e-12);
        assert_eq!(chi2_sf(0.0, 5), 1.0);
    }

    #[test]
    fn gof_statistic_matches_brute_force() {
        let obs = [10u64, 0];
        let exp = [5.0, 5.0];
        assert!((gof_statistic(&obs, &exp) - 10.0).abs() < 1e-12);
        assert_eq!(gof_statistic(&[1, 0], &[0.0, 1.0]), f64::INFINITY);
        assert_eq!(gof_statistic(&[0, 2], &[0.0, 2.0]), 0.0);
    }

    #[test]
    fn pearson_perfect_and_degenerate() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [2.0, 4.0, 6.0];
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        let flat = [1.0, 1.0, 1.0];
        assert!(matches!(pearson(&xs, &flat), Err(StatsError::ZeroVariance)));
    }

    #[test]
    fn anova_matches_reference() {
        // scipy: f_oneway([1,2],[3,4]) -> F=8, p=0.10557280900008414
        let r = one_way_anova(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!((r.f_stat - 8.0).abs() < 1e-12);
        assert_eq!((r.df_between, r.df_within), (1, 2));
        assert!((r.pvalue - 0.10557280900008414).abs() < 1e-10);
        // scipy: f_oneway([1,2,3],[2,3,4],[5,6,7]) -> F=13, p=0.006591796875
        let r2 = one_way_anova(&[vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0]])
            .unwrap();
        assert!((r2.f_stat - 13.0).abs() < 1e-12);
        assert!((r2.pvalue - 0.006591796875).abs() < 1e-10);
    }

    #[test]
    fn multinomial_draw_is_exact_and_reproducible() {
        let mut rng = substream(7, &[1]);
        let a = multinomial_draw(&mut rng, 1000, &[0.2, 0.3, 0.5]);
        assert_eq!(a.iter().sum::<u64>(), 1000);
        let mut rng2 = substream(7, &[1]);
        let b = multinomial_draw(&mut rng2, 1000, &[0.2, 0.3, 0.5]);
        assert_eq!(a, b);
    }
}
