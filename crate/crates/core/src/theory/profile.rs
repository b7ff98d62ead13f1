//! Limit profiles `ν_j, θ_j, γ_j, δ_j` along an index set `K`.
//!
//! `γ_j = lim q_{k+j}/q_k` and `δ_j = lim η_{k+j}/η_k` over `k ∈ K`, with
//! `ν_j = lim q_{k+j-1}/q_{k+j}` and `θ_j = lim η_{k+j}/η_{k+j-1}`, so that
//! `γ_j = γ_{j-1}/ν_j` and `δ_j = θ_j δ_{j-1}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::ext::ExtReal;
use super::TheoryError;
use crate::cf::{CfKind, CfSpec, ConvergentTable, KSubsequence};
use crate::quadratic::Quadratic;

/// Default Cauchy-gap tolerance for numeric profiles.
pub const DEFAULT_NUMERIC_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Analytic,
    Numeric,
}

/// How a numeric profile was estimated and how far it is from settled.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericDiagnostics {
    /// The indices `k` whose ratios entered the error bar, ascending.
    pub k_used: Vec<usize>,
    pub tol: f64,
    /// Largest spread over `k_used` of each `γ_j` ratio, `j = 0..=jmax`.
    pub gamma_gap: Vec<f64>,
    /// Same for `δ_j`.
    pub delta_gap: Vec<f64>,
    /// Indices `j` whose `γ_j` or `δ_j` spread exceeds `tol`.
    pub non_convergent: Vec<usize>,
}

impl NumericDiagnostics {
    pub fn converged(&self) -> bool {
        self.non_convergent.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitProfile {
    pub jmax: usize,
    /// `nu[j-1] = ν_j` for `j = 1..=jmax`.
    pub nu: Vec<ExtReal>,
    /// `theta[j-1] = θ_j`.
    pub theta: Vec<ExtReal>,
    /// `gamma[j] = γ_j` for `j = 0..=jmax`.
    pub gamma: Vec<ExtReal>,
    pub delta: Vec<ExtReal>,
    pub provenance: Provenance,
    pub k_subsequence: KSubsequence,
    /// `ν` and `θ` repeat with this period, so `γ_{j+L} = γ_j γ_L` and
    /// `δ_{j+L} = δ_j δ_L`.
    pub period: Option<usize>,
    pub diagnostics: Option<NumericDiagnostics>,
}

impl LimitProfile {
    fn from_nu_theta(
        nu: Vec<ExtReal>,
        theta: Vec<ExtReal>,
        provenance: Provenance,
        k_subsequence: KSubsequence,
        period: Option<usize>,
    ) -> Self {
        let jmax = nu.len();
        let mut gamma = vec![ExtReal::one()];
        let mut delta = vec![ExtReal::one()];
        for j in 1..=jmax {
            gamma.push(gamma[j - 1].div(&nu[j - 1]));
            delta.push(theta[j - 1].mul(&delta[j - 1]));
        }
        Self {
            jmax,
            nu,
            theta,
            gamma,
            delta,
            provenance,
            k_subsequence,
            period,
            diagnostics: None,
        }
    }

    /// `ν_j` for `j ≥ 1`, continued periodically past `jmax` when possible.
    pub fn nu(&self, j: usize) -> Option<ExtReal> {
        self.periodic_entry(&self.nu, j)
    }

    pub fn theta(&self, j: usize) -> Option<ExtReal> {
        self.periodic_entry(&self.theta, j)
    }

    fn periodic_entry(&self, v: &[ExtReal], j: usize) -> Option<ExtReal> {
        if j == 0 {
            return None;
        }
        if j <= v.len() {
            return Some(v[j - 1].clone());
        }
        let l = self.period?;
        let r = (j - 1) % l;
        v.get(r).cloned()
    }

    /// `γ_j`, extended past `jmax` by periodicity or by absorption at `∞`.
    pub fn gamma(&self, j: usize) -> Option<ExtReal> {
        if j <= self.jmax {
            return Some(self.gamma[j].clone());
        }
        if self.gamma.iter().any(|g| g.is_infinite()) {
            return Some(ExtReal::Infinite);
        }
        let l = self.period.filter(|&l| l <= self.jmax)?;
        Some(self.gamma(j - l)?.mul(&self.gamma[l]))
    }

    /// `δ_j`, extended past `jmax` by periodicity or absorption at zero.
    pub fn delta(&self, j: usize) -> Option<ExtReal> {
        if j <= self.jmax {
            return Some(self.delta[j].clone());
        }
        if self.delta.iter().any(|d| d.is_zero()) {
            return Some(ExtReal::zero());
        }
        let l = self.period.filter(|&l| l <= self.jmax)?;
        Some(self.delta(j - l)?.mul(&self.delta[l]))
    }

    /// Smallest `N ≤ jmax` with `γ_N = ∞`.
    pub fn first_infinite(&self) -> Option<usize> {
        self.gamma.iter().position(|g| g.is_infinite())
    }
}

/// Value of the purely periodic continued fraction `[a_1, ..., a_L, a_1, ...]`.
pub fn purely_periodic_value(cycle: &[u64]) -> Quadratic {
    assert!(!cycle.is_empty());
    // x = M(x) for the Möbius map M = Π [[0,1],[1,a_i]].
    let (mut a, mut b, mut c, mut d) = (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one());
    for &t in cycle {
        let t = BigInt::from(t);
        let (na, nb) = (b.clone(), &a + &b * &t);
        let (nc, nd) = (d.clone(), &c + &d * &t);
        a = na;
        b = nb;
        c = nc;
        d = nd;
    }
    // C x² + (D − A) x − B = 0, positive root.
    let disc = (&a - &d) * (&a - &d) + BigInt::from(4) * &b * &c;
    let two_c = BigRational::from_integer(BigInt::from(2) * &c);
    Quadratic::new(
        BigRational::from_integer(&a - &d) / &two_c,
        BigRational::one() / two_c,
        &disc,
    )
}

/// Closed-form profile for the built-in families.
///
/// * periodic specs: `K` must pick one phase of the period, and `ν_j`, `θ_j`
///   are purely periodic continued fractions of the reversed and forward cycle;
/// * `block:N`: `K` must be multiples of `N`, values in Fibonacci ratios;
/// * `affine:a,b` with `a ≥ 1`: `γ_1 = ∞`.
///
/// `jmax` is raised so that the stored range covers one full period, or the
/// first infinite `γ`.
pub fn profile_analytic(spec: &CfSpec, jmax: usize) -> Result<LimitProfile, TheoryError> {
    let jmax = jmax.max(1);
    match &spec.kind {
        CfKind::Explicit(_) => Err(TheoryError::UnsupportedSpec(
            "explicit specs have no closed form; use the numeric profile".into(),
        )),
        CfKind::EventuallyPeriodic { preperiod, period } => {
            periodic_profile(spec, preperiod.len(), period.len(), jmax)
        }
        CfKind::Affine { slope: 0, offset } => {
            let inner = CfSpec::constant(*offset).with_subsequence(spec.k_subsequence.clone())?;
            periodic_profile(&inner, 0, 1, jmax)
        }
        CfKind::Affine { .. } => {
            let zeros = vec![ExtReal::zero(); jmax];
            Ok(LimitProfile::from_nu_theta(
                zeros.clone(),
                zeros,
                Provenance::Analytic,
                spec.k_subsequence.clone(),
                Some(1),
            ))
        }
        CfKind::BlockFamily(n) => block_profile(spec, *n as usize, jmax),
    }
}

fn phase_of(k: &KSubsequence, l: usize) -> Option<usize> {
    match k {
        KSubsequence::All => (l == 1).then_some(0),
        KSubsequence::Arithmetic { step, offset } => (step % l == 0).then_some(offset % l),
        KSubsequence::List(ks) => {
            let r = ks[0] % l;
            ks.iter().all(|k| k % l == r).then_some(r)
        }
    }
}

fn periodic_profile(spec: &CfSpec, pre: usize, l: usize, jmax: usize) -> Result<LimitProfile, TheoryError> {
    let phase = phase_of(&spec.k_subsequence, l).ok_or_else(|| {
        TheoryError::UnsupportedSpec(format!(
            "K = {} does not select a single phase of the period {l}; the limits do not exist",
            spec.k_subsequence
        ))
    })?;
    let jmax = jmax.max(l + 1);
    // A representative k in the phase class, past the preperiod by a full period.
    let mut k = pre + l;
    while k % l != phase {
        k += 1;
    }
    let mut nu = Vec::with_capacity(jmax);
    let mut theta = Vec::with_capacity(jmax);
    for j in 1..=jmax {
        let i = k + j;
        let rev: Vec<u64> = (0..l).map(|t| spec.term(i - t)).collect::<Result<_, _>>()?;
        let fwd: Vec<u64> = (1..=l).map(|t| spec.term(i + t)).collect::<Result<_, _>>()?;
        nu.push(ExtReal::Exact(purely_periodic_value(&rev)));
        theta.push(ExtReal::Exact(purely_periodic_value(&fwd)));
    }
    Ok(LimitProfile::from_nu_theta(
        nu,
        theta,
        Provenance::Analytic,
        spec.k_subsequence.clone(),
        Some(l),
    ))
}

fn fibonacci(n: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..n {
        let c = &a + &b;
        a = std::mem::replace(&mut b, c);
    }
    a
}

fn block_profile(spec: &CfSpec, n: usize, jmax: usize) -> Result<LimitProfile, TheoryError> {
    if phase_of(&spec.k_subsequence, n) != Some(0) {
        return Err(TheoryError::UnsupportedSpec(format!(
            "block:{n} has closed-form limits only along multiples of {n}, got K = {}",
            spec.k_subsequence
        )));
    }
    let jmax = jmax.max(n);
    let ratio = |a: usize, b: usize| ExtReal::rational(BigRational::new(fibonacci(a), fibonacci(b)));
    let mut nu = Vec::with_capacity(jmax);
    let mut theta = Vec::with_capacity(jmax);
    for j in 1..=jmax {
        let r = j % n;
        nu.push(ratio(r, r + 1));
        theta.push(ratio(n - 1 - r, n - r));
    }
    Ok(LimitProfile::from_nu_theta(
        nu,
        theta,
        Provenance::Analytic,
        spec.k_subsequence.clone(),
        Some(n),
    ))
}

/// Estimates the profile from ratios along `ks`, which must be sorted or
/// sortable, have at least three members and leave room for `jmax` more
/// indices in the table.
///
/// Each value is the ratio at the largest `k`; its error bar is the largest
/// deviation from it over the last three members of `ks` plus the width of
/// the enclosure. Spreads above `tol` are reported as non-convergent.
pub fn profile_numeric(
    table: &ConvergentTable,
    ks: &[usize],
    jmax: usize,
    tol: f64,
) -> Result<LimitProfile, TheoryError> {
    let mut ks: Vec<usize> = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 3 {
        return Err(TheoryError::InsufficientDepth(format!(
            "need at least three indices in K, got {}",
            ks.len()
        )));
    }
    let top = *ks.last().unwrap();
    if top + jmax > table.depth() {
        return Err(TheoryError::InsufficientDepth(format!(
            "K reaches {top} and jmax is {jmax}, but the table depth is {}",
            table.depth()
        )));
    }
    let used: Vec<usize> = ks[ks.len() - 3..].to_vec();

    let q_ratio = |num: usize, den: usize| -> (f64, f64) {
        let r = BigRational::new(table.qs()[num].clone(), table.qs()[den].clone());
        (r.to_f64().unwrap_or(f64::NAN), 0.0)
    };
    let eta_ratio = |num: usize, den: usize| -> Result<(f64, f64), TheoryError> {
        let r = table
            .eta_enclosure(num)?
            .checked_div(&table.eta_enclosure(den)?)?;
        Ok((r.to_f64(), r.width_f64()))
    };
    let estimate = |f: &dyn Fn(usize) -> Result<(f64, f64), TheoryError>| -> Result<(ExtReal, f64), TheoryError> {
        let (v, w) = f(top)?;
        let mut spread = 0.0f64;
        let mut width = w;
        for &k in &used {
            let (vk, wk) = f(k)?;
            spread = spread.max((vk - v).abs());
            width = width.max(wk);
        }
        Ok((ExtReal::approx(v, spread + width), spread))
    };

    let mut nu = Vec::with_capacity(jmax);
    let mut theta = Vec::with_capacity(jmax);
    let mut gamma = vec![ExtReal::one()];
    let mut delta = vec![ExtReal::one()];
    let mut gamma_gap = vec![0.0];
    let mut delta_gap = vec![0.0];
    let mut non_convergent = Vec::new();
    for j in 1..=jmax {
        nu.push(estimate(&|k| Ok(q_ratio(k + j - 1, k + j)))?.0);
        theta.push(estimate(&|k| eta_ratio(k + j, k + j - 1))?.0);
        let (g, gg) = estimate(&|k| Ok(q_ratio(k + j, k)))?;
        let (d, dg) = estimate(&|k| eta_ratio(k + j, k))?;
        if gg > tol || dg > tol {
            non_convergent.push(j);
        }
        gamma.push(g);
        delta.push(d);
        gamma_gap.push(gg);
        delta_gap.push(dg);
    }
    Ok(LimitProfile {
        jmax,
        nu,
        theta,
        gamma,
        delta,
        provenance: Provenance::Numeric,
        k_subsequence: KSubsequence::List(ks),
        period: None,
        diagnostics: Some(NumericDiagnostics {
            k_used: used,
            tol,
            gamma_gap,
            delta_gap,
            non_convergent,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::build_table;
    use crate::cf::ConvergentTable;

    fn golden_alpha() -> Quadratic {
        purely_periodic_value(&[1])
    }

    #[test]
    fn periodic_values() {
        let a = golden_alpha();
        assert!((a.to_f64() - 0.6180339887498949).abs() < 1e-15);
        let s = purely_periodic_value(&[2]);
        assert!((s.to_f64() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        // [1,2,1,2,...] = (√3 − 1)
        let v = purely_periodic_value(&[1, 2]);
        assert!((v.to_f64() - (3f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn golden_profile() {
        let p = profile_analytic(&CfSpec::constant(1), 4).unwrap();
        let a = ExtReal::Exact(golden_alpha());
        for j in 0..=4 {
            assert_eq!(p.gamma(j).unwrap(), a.pow(-(j as i32)));
            assert_eq!(p.delta(j).unwrap(), a.pow(j as i32));
        }
        assert_eq!(p.gamma(9).unwrap(), a.pow(-9));
    }

    #[test]
    fn block_three_profile() {
        let p = profile_analytic(&CfSpec::block(3), 3).unwrap();
        let g: Vec<f64> = (0..=3).map(|j| p.gamma(j).unwrap().to_f64()).collect();
        let d: Vec<f64> = (0..=3).map(|j| p.delta(j).unwrap().to_f64()).collect();
        assert_eq!(g, vec![1.0, 1.0, 2.0, f64::INFINITY]);
        assert_eq!(d, vec![1.0, 1.0, 0.0, 0.0]);
        assert!(profile_analytic(&CfSpec::block(3).with_subsequence(KSubsequence::All).unwrap(), 3).is_err());
    }

    #[test]
    fn affine_has_infinite_gamma_one() {
        let p = profile_analytic(&CfSpec::affine(1, 1), 3).unwrap();
        assert!(p.gamma(1).unwrap().is_infinite());
        let p = profile_analytic(&CfSpec::affine(0, 2), 3).unwrap();
        assert!(p.gamma(1).unwrap().is_finite());
    }

    #[test]
    fn explicit_is_rejected() {
        let s = CfSpec::explicit(&[1, 2, 3]).unwrap();
        assert!(matches!(profile_analytic(&s, 2), Err(TheoryError::UnsupportedSpec(_))));
    }

    #[test]
    fn numeric_golden() {
        let t = ConvergentTable::with_precision(&CfSpec::constant(1), 24, 80).unwrap();
        let ks: Vec<usize> = (10..=20).collect();
        let p = profile_numeric(&t, &ks, 3, DEFAULT_NUMERIC_TOL).unwrap();
        assert_eq!(p.gamma(0).unwrap(), ExtReal::one());
        let g1 = p.gamma(1).unwrap();
        assert!((g1.to_f64() - 1.618033988749895).abs() < 1e-3);
        assert!(g1.err() < 1e-3);
        assert!(p.diagnostics.as_ref().unwrap().converged());
    }

    #[test]
    fn numeric_needs_room() {
        let t = build_table(&CfSpec::constant(1), 10).unwrap();
        assert!(profile_numeric(&t, &[8, 9, 10], 2, 1e-6).is_err());
        assert!(profile_numeric(&t, &[1, 2], 2, 1e-6).is_err());
    }
}
