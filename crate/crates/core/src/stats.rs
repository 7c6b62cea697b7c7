//! Rank-based significance tests for distance matrices: Kruskal-Wallis
//! one-way analysis of variance and Dunn's pairwise z test with Šidák
//! adjustment, plus the chi-square and normal tail functions they need.

use crate::tsv;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group '{0}' is empty")]
    EmptyGroup(String),
    #[error("need at least 3 observations in total, got {0}")]
    TooFewObservations(usize),
    #[error("group '{0}' contains a non-finite value")]
    NonFinite(String),
}

/// A named sample.
pub type Group = (String, Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct KruskalWallisResult {
    /// Tie-corrected statistic.
    pub h: f64,
    pub df: usize,
    pub p: f64,
    /// Every observation was identical; `h` is reported as 0 and `p` as 1.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseComparison {
    pub pair: (String, String),
    /// Mean rank of the first group minus that of the second, standardized.
    pub z: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

impl PairwiseComparison {
    /// `**` below 0.01, `*` below 0.05, otherwise `ns`.
    pub fn significance(&self) -> &'static str {
        star(self.p_adjusted)
    }
}

pub fn star(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        "ns"
    }
}

/// Pooled mid-ranks of all groups.
struct Ranking {
    /// Sum of ranks per group.
    rank_sums: Vec<f64>,
    sizes: Vec<usize>,
    n: usize,
    /// Σ (t³ - t) over tie blocks.
    tie_term: f64,
}

fn rank_groups(groups: &[Group]) -> Result<Ranking, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    let mut pooled = Vec::new();
    for (g, (name, values)) in groups.iter().enumerate() {
        if values.is_empty() {
            return Err(StatsError::EmptyGroup(name.clone()));
        }
        for &v in values {
            if !v.is_finite() {
                return Err(StatsError::NonFinite(name.clone()));
            }
            pooled.push((v, g));
        }
    }
    let n = pooled.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations(n));
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sums = vec![0.0; groups.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // positions i..j (0-based) share the mean of ranks i+1..=j
        let mid = (i + 1 + j) as f64 / 2.0;
        for &(_, g) in &pooled[i..j] {
            rank_sums[g] += mid;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    Ok(Ranking {
        rank_sums,
        sizes: groups.iter().map(|(_, v)| v.len()).collect(),
        n,
        tie_term,
    })
}

pub fn kruskal_wallis(groups: &[Group]) -> Result<KruskalWallisResult, StatsError> {
    let r = rank_groups(groups)?;
    let df = groups.len() - 1;
    let n = r.n as f64;
    let correction = 1.0 - r.tie_term / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalWallisResult { h: 0.0, df, p: 1.0, degenerate: true });
    }
    let ss: f64 = r.rank_sums.iter().zip(&r.sizes).map(|(s, &k)| s * s / k as f64).sum();
    let h = ((12.0 / (n * (n + 1.0)) * ss - 3.0 * (n + 1.0)) / correction).max(0.0);
    Ok(KruskalWallisResult { h, df, p: chi_square_sf(h, df as f64), degenerate: false })
}

/// Dunn's test on every unordered pair, in input order, with Šidák
/// adjustment over the `k(k-1)/2` comparisons.
pub fn dunn_pairwise(groups: &[Group]) -> Result<Vec<PairwiseComparison>, StatsError> {
    let r = rank_groups(groups)?;
    let n = r.n as f64;
    let k = groups.len();
    let m = k * (k - 1) / 2;
    let variance = n * (n + 1.0) / 12.0 - r.tie_term / (12.0 * (n - 1.0));
    let mean_rank: Vec<f64> = r.rank_sums.iter().zip(&r.sizes).map(|(s, &c)| s / c as f64).collect();

    let mut out = Vec::with_capacity(m);
    for i in 0..k {
        for j in i + 1..k {
            let se = (variance * (1.0 / r.sizes[i] as f64 + 1.0 / r.sizes[j] as f64)).sqrt();
            let z = if variance > 0.0 { (mean_rank[i] - mean_rank[j]) / se } else { 0.0 };
            let p_raw = (2.0 * normal_sf(z.abs())).min(1.0);
            out.push(PairwiseComparison {
                pair: (groups[i].0.clone(), groups[j].0.clone()),
                z,
                p_raw,
                p_adjusted: sidak_adjust(p_raw, m),
            });
        }
    }
    Ok(out)
}

/// Šidák family-wise adjustment `1 - (1 - p)^m`, clamped to `[0, 1]`.
pub fn sidak_adjust(p_raw: f64, m: usize) -> f64 {
    let p = p_raw.clamp(0.0, 1.0);
    // 1 - (1-p)^m == -expm1(m * ln(1-p)), accurate for small p
    let adjusted = -(m as f64 * (-p).ln_1p()).exp_m1();
    adjusted.clamp(p, 1.0)
}

/// Upper tail `P(X > x)` of a chi-square with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

/// Upper tail `1 - Φ(z)` of the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    // erfc(z/√2)/2 = Q(1/2, z²/2)/2 for z ≥ 0
    if z.is_nan() {
        return f64::NAN;
    }
    let half_tail = 0.5 * gamma_q(0.5, 0.5 * z * z);
    if z >= 0.0 {
        half_tail
    } else {
        1.0 - half_tail
    }
}

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;

/// Lanczos approximation (g = 7, 9 terms) to ln Γ(a) for a > 0.
#[allow(clippy::excessive_precision)] // published coefficients, kept verbatim
pub fn ln_gamma(a: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if a < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * a).sin()).ln() - ln_gamma(1.0 - a);
    }
    let a = a - 1.0;
    let mut sum = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        sum += c / (a + i as f64);
    }
    let t = a + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (a + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

fn prefactor(a: f64, x: f64) -> f64 {
    (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// P(a, x) by its power series; converges quickly for x < a + 1.
fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum * prefactor(a, x)).clamp(0.0, 1.0)
}

/// Q(a, x) by the Legendre continued fraction (modified Lentz); for x ≥ a + 1.
fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (prefactor(a, x) * h).clamp(0.0, 1.0)
}

/// Kruskal-Wallis plus Dunn-Šidák results for one set of groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceTable {
    pub kruskal_wallis: KruskalWallisResult,
    pub pairs: Vec<PairwiseComparison>,
}

impl SignificanceTable {
    pub fn compute(groups: &[Group]) -> Result<SignificanceTable, StatsError> {
        Ok(SignificanceTable {
            kruskal_wallis: kruskal_wallis(groups)?,
            pairs: dunn_pairwise(groups)?,
        })
    }

    pub fn to_tsv(&self) -> String {
        let kw = &self.kruskal_wallis;
        let mut out = String::from("# kruskal-wallis\n");
        out.push_str(&tsv::render([
            vec!["H".to_owned(), "df".into(), "p".into(), "significance".into(), "degenerate".into()],
            vec![tsv::full(kw.h), kw.df.to_string(), tsv::full(kw.p), star(kw.p).into(), kw.degenerate.to_string()],
        ]));
        out.push_str("# dunn-sidak\n");
        let header = ["group_a", "group_b", "z", "p_raw", "p_adjusted", "significance"].map(String::from).to_vec();
        let body = self.pairs.iter().map(|c| {
            vec![
                c.pair.0.clone(),
                c.pair.1.clone(),
                tsv::full(c.z),
                tsv::full(c.p_raw),
                tsv::full(c.p_adjusted),
                c.significance().to_owned(),
            ]
        });
        out.push_str(&tsv::render(std::iter::once(header).chain(body)));
        out
    }
}
