//! Slowly and regularly varying functions, with numerical checks of the
//! Karamata sup/inf comparison lemmas.
//!
//! A slowly varying function satisfies `L(lambda s)/L(s) -> 1` as
//! `s -> infinity` for every fixed `lambda > 0`; a regularly varying
//! function of index `beta` is `s^beta L(s)`. The shipped families cover
//! iterated-log powers, exponentials of iterated-log powers, a bounded
//! oscillating example and the Karamata representation
//! `c(s) exp(int_{s0}^s eps(tau)/tau dtau)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Shared function handle for the Karamata representation.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const E: f64 = std::f64::consts::E;

/// The slowly varying families shipped with the crate.
#[derive(Clone)]
pub enum SlowFamily {
    /// `L(s) = value`.
    Constant { value: f64 },
    /// `L(s) = prod_j (ln_j s)^(mu_j)` with `ln_j` the j-fold iterated log.
    IterLogPower { exponents: Vec<f64> },
    /// `L(s) = exp( prod_j (ln_j s)^(mu_j) )`.
    ExpLogPower { exponents: Vec<f64> },
    /// `L(s) = exp( (ln s)^(1/3) cos((ln s)^(1/3)) )`, bounded away from 0
    /// and infinity on no interval; slowly varying but not monotone.
    Oscillating,
    /// Karamata representation with user-supplied `c` and `eps` handles.
    Karamata { scale: RealFn, drift: RealFn, start: f64 },
    /// A positive multiple of another slowly varying function.
    Scaled { factor: f64, inner: Box<SlowVarying> },
}

impl fmt::Debug for SlowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlowFamily::Constant { value } => write!(f, "Constant({value})"),
            SlowFamily::IterLogPower { exponents } => write!(f, "IterLogPower({exponents:?})"),
            SlowFamily::ExpLogPower { exponents } => write!(f, "ExpLogPower({exponents:?})"),
            SlowFamily::Oscillating => write!(f, "Oscillating"),
            SlowFamily::Karamata { start, .. } => write!(f, "Karamata(start={start})"),
            SlowFamily::Scaled { factor, inner } => write!(f, "Scaled({factor}, {inner:?})"),
        }
    }
}

/// A slowly varying function together with the start of its domain.
///
/// Values below `domain_start` are rejected by [`SlowVarying::eval`];
/// callers that need small arguments (series weights, symbol synthesis)
/// use [`SlowVarying::eval_clamped`] which freezes the function at its
/// domain start.
#[derive(Clone, Debug)]
pub struct SlowVarying {
    family: SlowFamily,
    domain_start: f64,
}

/// Exponential tower `e, e^e, ...` guarding iterated logs of depth `m`.
fn log_tower(depth: usize) -> f64 {
    let mut t = 1.0_f64;
    for _ in 0..depth {
        t = t.exp();
    }
    t
}

/// j-fold iterated natural logarithm.
fn iter_ln(mut s: f64, depth: usize) -> f64 {
    for _ in 0..depth {
        s = s.ln();
    }
    s
}

impl SlowVarying {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Argument(format!("constant family needs value > 0, got {value}")));
        }
        Ok(Self { family: SlowFamily::Constant { value }, domain_start: E })
    }

    pub fn iter_log_power(exponents: &[f64]) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::Argument("iterated-log family needs at least one exponent".into()));
        }
        Ok(Self {
            family: SlowFamily::IterLogPower { exponents: exponents.to_vec() },
            domain_start: log_tower(exponents.len()),
        })
    }

    pub fn exp_log_power(exponents: &[f64]) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::Argument("exp-log family needs at least one exponent".into()));
        }
        Ok(Self {
            family: SlowFamily::ExpLogPower { exponents: exponents.to_vec() },
            domain_start: log_tower(exponents.len()),
        })
    }

    pub fn oscillating() -> Self {
        Self { family: SlowFamily::Oscillating, domain_start: E }
    }

    pub fn karamata(scale: RealFn, drift: RealFn, start: f64) -> Result<Self> {
        if !(start > 0.0) || !start.is_finite() {
            return Err(Error::Argument(format!("karamata start must be positive, got {start}")));
        }
        Ok(Self {
            family: SlowFamily::Karamata { scale, drift, start },
            domain_start: start.max(E),
        })
    }

    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Argument(format!("scale factor must be positive, got {factor}")));
        }
        let domain_start = self.domain_start;
        Ok(Self { family: SlowFamily::Scaled { factor, inner: Box::new(self) }, domain_start })
    }

    pub fn family(&self) -> &SlowFamily {
        &self.family
    }

    pub fn domain_start(&self) -> f64 {
        self.domain_start
    }

    /// Pointwise evaluation. Rejects `s` below the domain start and any
    /// non-finite or non-positive outcome.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= self.domain_start) {
            return Err(Error::Domain(format!(
                "argument {s} below domain start {}",
                self.domain_start
            )));
        }
        let value = match &self.family {
            SlowFamily::Constant { value } => *value,
            SlowFamily::IterLogPower { exponents } => {
                let mut prod = 1.0;
                for (j, &mu) in exponents.iter().enumerate() {
                    prod *= iter_ln(s, j + 1).powf(mu);
                }
                prod
            }
            SlowFamily::ExpLogPower { exponents } => {
                let mut prod = 1.0;
                for (j, &mu) in exponents.iter().enumerate() {
                    prod *= iter_ln(s, j + 1).powf(mu);
                }
                prod.exp()
            }
            SlowFamily::Oscillating => {
                let u = s.ln().cbrt();
                (u * u.cos()).exp()
            }
            SlowFamily::Karamata { scale, drift, start } => {
                let integral = log_integral(drift, *start, s)?;
                scale(s) * integral.exp()
            }
            SlowFamily::Scaled { factor, inner } => factor * inner.eval(s)?,
        };
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Evaluation(format!(
                "slowly varying family produced {value} at s = {s}"
            )));
        }
        Ok(value)
    }

    /// Evaluation with the argument clamped to the domain start. Used where
    /// small indices must still receive a finite weight.
    pub fn eval_clamped(&self, s: f64) -> Result<f64> {
        self.eval(s.max(self.domain_start))
    }

    /// Pointwise reciprocal where the family supports it.
    pub fn reciprocal(&self) -> Option<Self> {
        match &self.family {
            SlowFamily::Constant { value } => SlowVarying::constant(1.0 / value).ok(),
            SlowFamily::IterLogPower { exponents } => {
                let negated: Vec<f64> = exponents.iter().map(|m| -m).collect();
                let mut rec = SlowVarying::iter_log_power(&negated).ok()?;
                rec.domain_start = self.domain_start;
                Some(rec)
            }
            SlowFamily::Scaled { factor, inner } => {
                inner.reciprocal().and_then(|r| r.scaled(1.0 / factor).ok())
            }
            _ => None,
        }
    }
}

/// Adaptive Simpson quadrature of `drift(tau)/tau` over `[lo, hi]` after the
/// substitution `tau = e^v`, to relative tolerance 1e-10.
fn log_integral(drift: &RealFn, lo: f64, hi: f64) -> Result<f64> {
    let f = |v: f64| drift(v.exp());
    let a = lo.ln();
    let b = hi.ln();
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let val = adaptive_simpson(&f, a, b, fa, fm, fb, whole, 1e-10 * (1.0 + whole.abs()), 48);
    if !val.is_finite() {
        return Err(Error::Evaluation("karamata drift integral diverged".into()));
    }
    Ok(val)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// A regularly varying function `s^index * slow(s)`.
#[derive(Clone, Debug)]
pub struct RegVarying {
    pub index: f64,
    pub slow: SlowVarying,
}

impl RegVarying {
    pub fn new(index: f64, slow: SlowVarying) -> Result<Self> {
        if !index.is_finite() {
            return Err(Error::Argument(format!("index must be finite, got {index}")));
        }
        Ok(Self { index, slow })
    }

    /// Pure power law `s^index`.
    pub fn power(index: f64) -> Result<Self> {
        Self::new(index, SlowVarying::constant(1.0)?)
    }

    pub fn domain_start(&self) -> f64 {
        self.slow.domain_start()
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        let value = s.powf(self.index) * self.slow.eval(s)?;
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Evaluation(format!("regularly varying value {value} at s = {s}")));
        }
        Ok(value)
    }

    /// The power factor stays exact; only the slow part is clamped. At
    /// `s = 0` this gives `0` for positive index and the frozen slow value
    /// for index zero.
    pub fn eval_clamped(&self, s: f64) -> Result<f64> {
        let value = s.powf(self.index) * self.slow.eval_clamped(s)?;
        if !value.is_finite() {
            return Err(Error::Evaluation(format!(
                "regularly varying value {value} at s = {s} (index {})",
                self.index
            )));
        }
        Ok(value)
    }
}

/// Options for the Karamata sup/inf mesh.
#[derive(Clone, Debug)]
pub struct KaramataOptions {
    /// Log-spaced mesh density over `[N0, s]`.
    pub points_per_decade: usize,
    /// Extra density factor applied over the final decade `[s/10, s]`.
    pub endpoint_refinement: usize,
    /// Optional deterministic jitter of interior mesh points, as
    /// `(seed, relative amplitude)` in units of the local mesh step.
    pub jitter: Option<(u64, f64)>,
}

impl Default for KaramataOptions {
    fn default() -> Self {
        // Suprema of slowly varying integrands concentrate near the endpoint.
        Self { points_per_decade: 512, endpoint_refinement: 4, jitter: None }
    }
}

fn karamata_mesh(n0: f64, s: f64, opts: &KaramataOptions) -> Vec<f64> {
    let decades = (s / n0).log10().max(0.0);
    let base = ((decades * opts.points_per_decade as f64).ceil() as usize).max(2);
    let mut mesh = Vec::with_capacity(base + 1);
    let ln_lo = n0.ln();
    let ln_hi = s.ln();
    for i in 0..=base {
        mesh.push((ln_lo + (ln_hi - ln_lo) * i as f64 / base as f64).exp());
    }
    // Refined tail over the last decade.
    let tail_lo = (s / 10.0).max(n0);
    let fine = opts.points_per_decade * opts.endpoint_refinement;
    let ln_lo = tail_lo.ln();
    for i in 0..=fine {
        mesh.push((ln_lo + (ln_hi - ln_lo) * i as f64 / fine as f64).exp());
    }
    if let Some((seed, amplitude)) = opts.jitter {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let step = (ln_hi - n0.ln()) / base as f64;
        for v in mesh.iter_mut() {
            // Keep the endpoints exact so the ratio at tau = s is always seen.
            if *v > n0 * (1.0 + 1e-12) && *v < s * (1.0 - 1e-12) {
                let u: f64 = rng.random_range(-1.0..1.0);
                *v *= (amplitude * step * u).exp();
            }
        }
    }
    mesh.push(s);
    mesh
}

enum Extremum {
    Sup,
    Inf,
}

fn karamata_extremum_check(
    l: &SlowVarying,
    epsilon: f64,
    s_grid: &[f64],
    opts: &KaramataOptions,
    which: Extremum,
) -> Result<Vec<f64>> {
    if s_grid.is_empty() {
        return Err(Error::Argument("empty s grid".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Argument(format!("epsilon must be positive, got {epsilon}")));
    }
    let n0 = l.domain_start();
    for w in s_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Argument("s grid must be strictly increasing".into()));
        }
    }
    if s_grid[0] < n0 {
        return Err(Error::Argument(format!(
            "s grid starts below the domain start {n0}"
        )));
    }
    let sign = match which {
        Extremum::Sup => epsilon,
        Extremum::Inf => -epsilon,
    };
    let mut ratios = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let mesh = karamata_mesh(n0, s, opts);
        let mut best = f64::NAN;
        for &tau in &mesh {
            let g = tau.powf(sign) * l.eval(tau)?;
            best = match which {
                Extremum::Sup => {
                    if best.is_nan() || g > best {
                        g
                    } else {
                        best
                    }
                }
                Extremum::Inf => {
                    if best.is_nan() || g < best {
                        g
                    } else {
                        best
                    }
                }
            };
        }
        let reference = s.powf(sign) * l.eval(s)?;
        ratios.push(best / reference);
    }
    Ok(ratios)
}

/// Ratios `sup_{tau <= s} tau^eps L(tau) / (s^eps L(s))` over `s_grid`.
///
/// For slowly varying `L` these converge to 1 from above as `s` grows.
pub fn karamata_sup_check(
    l: &SlowVarying,
    epsilon: f64,
    s_grid: &[f64],
    opts: &KaramataOptions,
) -> Result<Vec<f64>> {
    karamata_extremum_check(l, epsilon, s_grid, opts, Extremum::Sup)
}

/// Ratios `inf_{tau <= s} tau^(-eps) L(tau) / (s^(-eps) L(s))`, the mirror
/// of [`karamata_sup_check`]; converge to 1 from below.
pub fn karamata_inf_check(
    l: &SlowVarying,
    epsilon: f64,
    s_grid: &[f64],
    opts: &KaramataOptions,
) -> Result<Vec<f64>> {
    karamata_extremum_check(l, epsilon, s_grid, opts, Extremum::Inf)
}

/// `|L(lambda s)/L(s) - lambda^index - ... |` probe used by the family
/// self-tests: returns `R(lambda s)/R(s)` over the given `s` values.
pub fn variation_ratios(r: &RegVarying, lambda: f64, s_values: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let a = r.eval(lambda * s)?;
        let b = r.eval(s)?;
        out.push(a / b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shipped_families() -> Vec<(&'static str, SlowVarying)> {
        vec![
            ("constant", SlowVarying::constant(1.0).unwrap()),
            ("ln", SlowVarying::iter_log_power(&[1.0]).unwrap()),
            ("ln^2", SlowVarying::iter_log_power(&[2.0]).unwrap()),
            ("1/ln", SlowVarying::iter_log_power(&[-1.0]).unwrap()),
            ("ln.lnln", SlowVarying::iter_log_power(&[1.0, 1.0]).unwrap()),
            ("exp(sqrt(ln))", SlowVarying::exp_log_power(&[0.5]).unwrap()),
            ("oscillating", SlowVarying::oscillating()),
            (
                "karamata-log",
                SlowVarying::karamata(
                    Arc::new(|_| 1.0),
                    Arc::new(|tau: f64| 1.0 / tau.ln()),
                    E,
                )
                .unwrap(),
            ),
            ("scaled-ln", SlowVarying::iter_log_power(&[1.0]).unwrap().scaled(2.5).unwrap()),
        ]
    }

    #[test]
    fn constant_family_evaluates_to_its_value() {
        let l = SlowVarying::constant(1.0).unwrap();
        assert_eq!(l.eval(100.0).unwrap(), 1.0);
    }

    #[test]
    fn iter_log_power_matches_ln() {
        // L(s) = ln s at s = e^2.
        let l = SlowVarying::iter_log_power(&[1.0]).unwrap();
        let v = l.eval(E * E).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn exp_log_power_matches_closed_form() {
        // exp((ln s)^{1/2}) at s = e^4 is e^2.
        let l = SlowVarying::exp_log_power(&[0.5]).unwrap();
        let v = l.eval(E.powi(4)).unwrap();
        assert!((v - E * E).abs() < 1e-9, "got {v}, want {}", E * E);
        assert!((v - 7.389056).abs() < 1e-5);
    }

    #[test]
    fn eval_below_domain_start_is_a_domain_error() {
        let l = SlowVarying::iter_log_power(&[1.0, 1.0]).unwrap();
        assert!(l.domain_start() > 15.0);
        assert!(matches!(l.eval(3.0), Err(Error::Domain(_))));
        // Clamped evaluation freezes at the domain start instead.
        let frozen = l.eval_clamped(3.0).unwrap();
        assert!((frozen - l.eval(l.domain_start()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn karamata_quadrature_reproduces_log_power() {
        // eps(tau) = mu / ln(tau) gives L(s) = (ln s / ln s0)^mu.
        let mu = 0.75;
        let l = SlowVarying::karamata(
            Arc::new(|_| 1.0),
            Arc::new(move |tau: f64| mu / tau.ln()),
            E,
        )
        .unwrap();
        for &s in &[10.0_f64, 1e3, 1e6, 1e9] {
            let want = s.ln().powf(mu);
            let got = l.eval(s).unwrap();
            assert!(
                (got / want - 1.0).abs() < 1e-9,
                "s={s}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn slow_variation_limit_for_every_shipped_family() {
        // eval(lambda s)/eval(s) -> 1 along s = 10^j, j = 3..8, with the
        // deviation from 1 essentially non-increasing in j.
        let s_values: Vec<f64> = (3..=8).map(|j| 10f64.powi(j)).collect();
        for (name, l) in shipped_families() {
            let r = RegVarying::new(0.0, l).unwrap();
            for lambda in [0.5, 2.0, 10.0] {
                let ratios = variation_ratios(&r, lambda, &s_values).unwrap();
                let devs: Vec<f64> = ratios.iter().map(|v| (v - 1.0).abs()).collect();
                for w in devs.windows(2) {
                    assert!(
                        w[1] <= w[0] * 1.05 + 1e-12,
                        "{name} lambda={lambda}: deviations not contracting: {devs:?}"
                    );
                }
                assert!(
                    devs[devs.len() - 1] < 0.35,
                    "{name} lambda={lambda}: final deviation too large: {devs:?}"
                );
            }
        }
    }

    #[test]
    fn regular_variation_limit_matches_index() {
        // Constant slow part: the ratio is lambda^beta exactly. A log slow
        // part converges like 1/ln s, so it only gets a loose tolerance.
        let s_values: Vec<f64> = (4..=8).map(|j| 10f64.powi(j)).collect();
        let exact = RegVarying::new(-0.5, SlowVarying::constant(2.0).unwrap()).unwrap();
        let slow = RegVarying::new(-0.5, SlowVarying::iter_log_power(&[1.0]).unwrap()).unwrap();
        for lambda in [0.5, 2.0, 10.0_f64] {
            let target = lambda.powf(-0.5);
            let ratios = variation_ratios(&exact, lambda, &s_values).unwrap();
            for r in &ratios {
                assert!((r / target - 1.0).abs() < 1e-12, "lambda={lambda}: {r} vs {target}");
            }
            let ratios = variation_ratios(&slow, lambda, &s_values).unwrap();
            let last = ratios[ratios.len() - 1];
            assert!(
                (last / target - 1.0).abs() < 0.15,
                "lambda={lambda}: {last} vs {target}"
            );
            // Deviation from the limit shrinks along the grid.
            let first_dev = (ratios[0] / target - 1.0).abs();
            let last_dev = (last / target - 1.0).abs();
            assert!(last_dev < first_dev);
        }
    }

    #[test]
    fn index_zero_ratios_agree_with_slow_part_exactly() {
        let slow = SlowVarying::iter_log_power(&[2.0]).unwrap();
        let r = RegVarying::new(0.0, slow.clone()).unwrap();
        for &s in &[1e3, 1e5, 1e7] {
            let a = r.eval(2.0 * s).unwrap() / r.eval(s).unwrap();
            let b = slow.eval(2.0 * s).unwrap() / slow.eval(s).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sup_check_constant_family_is_exactly_one() {
        let l = SlowVarying::constant(1.0).unwrap();
        let ratios =
            karamata_sup_check(&l, 1.0, &[100.0, 1e4], &KaramataOptions::default()).unwrap();
        for r in ratios {
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sup_check_log_family_monotone_integrand() {
        // tau^{0.5} ln tau is increasing, so the sup sits at the endpoint.
        let l = SlowVarying::iter_log_power(&[1.0]).unwrap();
        let ratios =
            karamata_sup_check(&l, 0.5, &[1e6], &KaramataOptions::default()).unwrap();
        assert!((ratios[0] - 1.0).abs() < 1e-9, "got {}", ratios[0]);
    }

    #[test]
    fn inf_check_reciprocal_log_family() {
        let l = SlowVarying::iter_log_power(&[-1.0]).unwrap();
        let ratios =
            karamata_inf_check(&l, 0.5, &[1e6], &KaramataOptions::default()).unwrap();
        assert!((ratios[0] - 1.0).abs() < 1e-9, "got {}", ratios[0]);
    }

    #[test]
    fn inf_check_log_family_large_epsilon() {
        let l = SlowVarying::iter_log_power(&[1.0]).unwrap();
        let ratios =
            karamata_inf_check(&l, 1.0, &[1e8], &KaramataOptions::default()).unwrap();
        assert!((ratios[0] - 1.0).abs() < 0.05, "got {}", ratios[0]);
    }

    #[test]
    fn reciprocal_duality_links_inf_and_sup() {
        // inf tau^{-eps} L = 1 / sup tau^{eps} (1/L) on the same mesh.
        let grid = [1e3, 1e5, 1e7];
        let opts = KaramataOptions::default();
        for (name, l) in shipped_families() {
            let Some(k) = l.reciprocal() else { continue };
            let inf = karamata_inf_check(&l, 0.7, &grid, &opts).unwrap();
            let sup = karamata_sup_check(&k, 0.7, &grid, &opts).unwrap();
            for (a, b) in inf.iter().zip(sup.iter()) {
                assert!(
                    (a * b - 1.0).abs() < 1e-8,
                    "{name}: duality product {}",
                    a * b
                );
            }
        }
    }

    #[test]
    fn sup_check_matches_a_brute_force_oracle_with_interior_supremum() {
        // For small epsilon and decaying L the supremum sits away from the
        // endpoint: tau^0.05 / ln(tau) is decreasing until tau = e^20, so at
        // s = 1e6 the sup lives at the left edge and the ratio is far from 1.
        // The oracle is an independent dense linear mesh.
        let l = SlowVarying::iter_log_power(&[-1.0]).unwrap();
        let eps = 0.05;
        let s = 1e6;
        let ratios = karamata_sup_check(&l, eps, &[s], &KaramataOptions::default()).unwrap();
        let mut oracle_sup = f64::NEG_INFINITY;
        let n = 2_000_000;
        for i in 0..=n {
            let tau = E + (s - E) * i as f64 / n as f64;
            let g = tau.powf(eps) / tau.ln();
            if g > oracle_sup {
                oracle_sup = g;
            }
        }
        let oracle_ratio = oracle_sup / (s.powf(eps) / s.ln());
        assert!(oracle_ratio > 2.0, "supremum should be interior, got {oracle_ratio}");
        assert!(
            (ratios[0] / oracle_ratio - 1.0).abs() < 1e-4,
            "mesh {} vs oracle {oracle_ratio}",
            ratios[0]
        );
    }

    #[test]
    fn karamata_scale_function_sets_the_limit() {
        // c(s) = 2 + 1/s converges to 2, so L(s) ~ 2 (ln s)^mu.
        let mu = 0.5;
        let l = SlowVarying::karamata(
            Arc::new(|s: f64| 2.0 + 1.0 / s),
            Arc::new(move |tau: f64| mu / tau.ln()),
            E,
        )
        .unwrap();
        for &s in &[1e4_f64, 1e8] {
            let want = (2.0 + 1.0 / s) * s.ln().powf(mu);
            let got = l.eval(s).unwrap();
            assert!((got / want - 1.0).abs() < 1e-9, "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn jittered_mesh_is_deterministic_and_still_converges() {
        let l = SlowVarying::iter_log_power(&[1.0]).unwrap();
        let opts = KaramataOptions {
            jitter: Some((42, 0.25)),
            ..KaramataOptions::default()
        };
        let a = karamata_sup_check(&l, 0.5, &[1e6], &opts).unwrap();
        let b = karamata_sup_check(&l, 0.5, &[1e6], &opts).unwrap();
        assert_eq!(a, b);
        assert!((a[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_grid_is_an_argument_error() {
        let l = SlowVarying::constant(1.0).unwrap();
        assert!(matches!(
            karamata_sup_check(&l, 1.0, &[], &KaramataOptions::default()),
            Err(Error::Argument(_))
        ));
    }
}
