//! Radially symmetric dispersal kernels on periodic grids: construction,
//! k-fold convolution powers via the Fourier symbol, the sharp Young
//! (Brascamp-Lieb) sup-norm bound, and small-frequency symbol fits.
//!
//! Every kernel carries its real Fourier symbol sampled at the grid
//! frequencies. Radial symmetry makes the symbol real and even, so the
//! symbol of the k-fold convolution is the plain k-th power and convolution
//! powers are one inverse transform each. Periodization is monitored
//! through a wrap-around estimate: the mass of `J_(k/2)` outside the
//! `|x| > X/2` shell, squared.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::grid::{l1_norm, sup_norm, GridMeta, SpectralGrid};
use crate::regvar::SlowVarying;

/// Wrap-around mass estimates above this value make a convolution power
/// untrustworthy.
pub const WRAPAROUND_LIMIT: f64 = 1e-6;

/// Relative tolerance below which tiny negative lobes still count as a
/// nonnegative kernel.
const NEGATIVE_LOBE_TOLERANCE: f64 = 1e-12;

/// Kernel families constructible on a grid.
///
/// The first four are sampled in physical space; the symbol families are
/// built from a prescribed Fourier symbol and inverse-transformed, which
/// keeps them real, even and mass-one by construction.
#[derive(Clone, Debug)]
pub enum KernelFamily {
    /// Normalized indicator of a centered interval (ball in 2-d).
    Box { width: f64 },
    /// Normalized triangular bump on `[-half_base, half_base]` (cone in 2-d).
    Tent { half_base: f64 },
    /// Centered Gaussian density.
    Gaussian { variance: f64 },
    /// Symbol `exp(-scale |xi|^sigma)`, the stable law of index `sigma`.
    StableSymbol { sigma: f64, scale: f64 },
    /// Symbol `exp(-scale |xi|^sigma (ln(e + 1/|xi|))^mu)`.
    LogPerturbedSymbol { sigma: f64, mu: f64, scale: f64 },
    /// Symbol `exp(-scale |xi|^sigma L(|xi|^(-gamma)))` with `L` clamped at
    /// its domain start.
    PrescribedSymbol { sigma: f64, gamma: f64, scale: f64, slow: SlowVarying },
    /// `J(x) = c / (|x|^n (1 + ln^2 |x|))`, capped at the origin by the value
    /// one grid cell away. Integrable but in no `L^(1+eps)`.
    PathologicalLogTail,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Box { .. } => "box",
            KernelFamily::Tent { .. } => "tent",
            KernelFamily::Gaussian { .. } => "gaussian",
            KernelFamily::StableSymbol { .. } => "stable",
            KernelFamily::LogPerturbedSymbol { .. } => "logperturbed",
            KernelFamily::PrescribedSymbol { .. } => "prescribed",
            KernelFamily::PathologicalLogTail => "pathological",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            KernelFamily::Box { width } => vec![*width],
            KernelFamily::Tent { half_base } => vec![*half_base],
            KernelFamily::Gaussian { variance } => vec![*variance],
            KernelFamily::StableSymbol { sigma, scale } => vec![*sigma, *scale],
            KernelFamily::LogPerturbedSymbol { sigma, mu, scale } => vec![*sigma, *mu, *scale],
            KernelFamily::PrescribedSymbol { sigma, gamma, scale, .. } => {
                vec![*sigma, *gamma, *scale]
            }
            KernelFamily::PathologicalLogTail => vec![],
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Argument(msg));
        match self {
            KernelFamily::Box { width } if !(*width > 0.0) => bad(format!("box width {width}")),
            KernelFamily::Tent { half_base } if !(*half_base > 0.0) => {
                bad(format!("tent half_base {half_base}"))
            }
            KernelFamily::Gaussian { variance } if !(*variance > 0.0) => {
                bad(format!("gaussian variance {variance}"))
            }
            KernelFamily::StableSymbol { sigma, scale } => {
                if !(*sigma > 0.0 && *sigma <= 2.0) {
                    return bad(format!("stable index must lie in (0, 2], got {sigma}"));
                }
                if !(*scale > 0.0) {
                    return bad(format!("stable scale {scale}"));
                }
                Ok(())
            }
            KernelFamily::LogPerturbedSymbol { sigma, mu, scale } => {
                if !(*sigma > 0.0 && *sigma <= 2.0) {
                    return bad(format!("log-perturbed index must lie in (0, 2], got {sigma}"));
                }
                if !mu.is_finite() || !(*scale > 0.0) {
                    return bad(format!("log-perturbed parameters mu={mu} scale={scale}"));
                }
                Ok(())
            }
            KernelFamily::PrescribedSymbol { sigma, gamma, scale, .. } => {
                if !(*sigma > 0.0 && *sigma <= 2.0) || !(*gamma > 0.0) || !(*scale > 0.0) {
                    return bad(format!(
                        "prescribed-symbol parameters sigma={sigma} gamma={gamma} scale={scale}"
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Characteristic physical length used by the resolution guard.
    fn characteristic_scale(&self) -> Option<f64> {
        match self {
            KernelFamily::Box { width } => Some(*width),
            KernelFamily::Tent { half_base } => Some(*half_base),
            KernelFamily::Gaussian { variance } => Some(variance.sqrt()),
            KernelFamily::PathologicalLogTail => Some(1.0),
            // Symbol-built families remain exact spectral objects even when
            // their physical-space density is narrower than the grid; they
            // get an advisory flag instead of a hard error.
            _ => None,
        }
    }

    /// Closed-form mass outside `[-X, X)^n` where one exists.
    fn tail_mass(&self, dim: usize, half_width: f64) -> Option<f64> {
        match self {
            KernelFamily::Box { width } | KernelFamily::Tent { half_base: width } => {
                Some(if *width < half_width { 0.0 } else { 1.0 })
            }
            KernelFamily::Gaussian { variance } => Some(match dim {
                1 => erfc(half_width / (2.0 * variance).sqrt()),
                _ => (-half_width * half_width / (2.0 * variance)).exp(),
            }),
            KernelFamily::StableSymbol { sigma, scale } if (*sigma - 1.0).abs() < 1e-12 => {
                // Cauchy law with scale parameter `scale`.
                match dim {
                    1 => Some(1.0 - 2.0 / std::f64::consts::PI * (half_width / scale).atan()),
                    _ => None,
                }
            }
            KernelFamily::PathologicalLogTail => match dim {
                1 => Some(1.0 - 2.0 / std::f64::consts::PI * half_width.ln().atan()),
                _ => None,
            },
            _ => None,
        }
    }

    /// Symbol value at radius `r`, for the symbol-built families.
    fn symbol_value(&self, r: f64) -> Result<f64> {
        let v = match self {
            KernelFamily::StableSymbol { sigma, scale } => (-scale * r.powf(*sigma)).exp(),
            KernelFamily::LogPerturbedSymbol { sigma, mu, scale } => {
                if r == 0.0 {
                    1.0
                } else {
                    (-scale * r.powf(*sigma) * (std::f64::consts::E + 1.0 / r).ln().powf(*mu))
                        .exp()
                }
            }
            KernelFamily::PrescribedSymbol { sigma, gamma, scale, slow } => {
                if r == 0.0 {
                    1.0
                } else {
                    let l = slow.eval_clamped(r.powf(-gamma))?;
                    (-scale * r.powf(*sigma) * l).exp()
                }
            }
            _ => unreachable!("symbol_value called on a physical-space family"),
        };
        Ok(v)
    }

    fn is_symbol_built(&self) -> bool {
        matches!(
            self,
            KernelFamily::StableSymbol { .. }
                | KernelFamily::LogPerturbedSymbol { .. }
                | KernelFamily::PrescribedSymbol { .. }
        )
    }
}

/// A kernel sampled on a periodic grid together with its cached symbol.
///
/// Immutable after construction; all derived computations allocate their
/// own workspaces, so shared references are safe across threads.
#[derive(Clone, Debug)]
pub struct GridKernel {
    meta: GridMeta,
    samples: Vec<f64>,
    symbol: Vec<f64>,
    l1: f64,
    nonneg: bool,
    normalization_deficit: f64,
    tail_mass: Option<f64>,
    under_resolved: bool,
    family_name: String,
    family_params: Vec<f64>,
}

/// Build a normalized kernel of the given family on `[-X, X)^n`.
pub fn make_kernel(
    family: &KernelFamily,
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
) -> Result<GridKernel> {
    family.validate()?;
    let meta = GridMeta::new(dim, half_width, points_per_axis)?;
    let h = meta.spacing();

    if let Some(scale) = family.characteristic_scale() {
        if scale < 4.0 * h {
            return Err(Error::Resolution(format!(
                "family scale {scale} is below 4 grid cells (h = {h})"
            )));
        }
    }
    let tail_mass = family.tail_mass(dim, half_width);
    if let Some(mass) = tail_mass {
        // Physical-space sampling truncates tails outright. Symbol-built
        // kernels periodize instead (mass folds back in), and the
        // pathological family exists for its origin singularity; for those
        // the closed-form tail stays advisory.
        let truncation_sensitive = matches!(
            family,
            KernelFamily::Box { .. } | KernelFamily::Tent { .. } | KernelFamily::Gaussian { .. }
        );
        if truncation_sensitive && mass > 1e-6 {
            return Err(Error::Argument(format!(
                "mass {mass:.3e} outside the domain exceeds 1e-6; enlarge half_width"
            )));
        }
    }

    let grid = SpectralGrid::new(meta);
    let (mut samples, mut symbol, under_resolved) = if family.is_symbol_built() {
        let mut symbol = vec![0.0; meta.len()];
        for (flat, v) in symbol.iter_mut().enumerate() {
            *v = family.symbol_value(meta.freq_radius(flat))?;
        }
        let mut samples = grid.inverse_real(&symbol);
        // Symmetrize away inverse-transform rounding so the radial-symmetry
        // invariant holds exactly.
        for flat in 0..samples.len() {
            let m = meta.mirror(flat);
            if m > flat {
                let avg = 0.5 * (samples[flat] + samples[m]);
                samples[flat] = avg;
                samples[m] = avg;
            }
        }
        let nyquist = family.symbol_value(meta.freq_max())?;
        (samples, symbol, nyquist > 0.5)
    } else {
        let samples = sample_physical(family, &meta);
        let spectrum = grid.forward(&samples);
        let mut max_im = 0.0_f64;
        let symbol: Vec<f64> = spectrum
            .iter()
            .map(|c| {
                max_im = max_im.max(c.im.abs());
                c.re
            })
            .collect();
        debug_assert!(max_im <= 1e-10 * (symbol[0].abs() + 1.0), "symbol not real: {max_im}");
        (samples, symbol, false)
    };

    check_radial_symmetry(&samples, &meta)?;

    let max_sample = sup_norm(&samples);
    let min_sample = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let nonneg = min_sample >= -NEGATIVE_LOBE_TOLERANCE * max_sample;

    // Normalize by the signed mass, which equals the symbol at frequency
    // zero. For nonnegative kernels this is the L1 norm; for kernels with
    // finite-band negative lobes it keeps the zero mode exactly neutral
    // instead of letting the lobes bleed into every symbol value.
    let signed_mass = meta.cell_volume() * samples.iter().sum::<f64>();
    if !(signed_mass > 0.0) || !signed_mass.is_finite() {
        return Err(Error::Evaluation(format!("kernel mass {signed_mass} before normalization")));
    }
    let normalization_deficit = (1.0 - signed_mass).abs();
    let inv = 1.0 / signed_mass;
    for v in samples.iter_mut() {
        *v *= inv;
    }
    for v in symbol.iter_mut() {
        *v *= inv;
    }
    let l1 = l1_norm(&samples, &meta);

    let kernel = GridKernel {
        meta,
        samples,
        symbol,
        l1,
        nonneg,
        normalization_deficit,
        tail_mass,
        under_resolved,
        family_name: family.name().to_string(),
        family_params: family.params(),
    };
    debug_assert!((kernel.symbol[0] - 1.0).abs() < 1e-10);
    if kernel.nonneg {
        // For nonnegative kernels the signed mass is the L1 norm, so both
        // normalization targets coincide.
        debug_assert!((kernel.l1 - 1.0).abs() < 1e-10);
        debug_assert!((kernel.symbol[0] - kernel.l1).abs() < 1e-10);
    }
    Ok(kernel)
}

fn sample_physical(family: &KernelFamily, meta: &GridMeta) -> Vec<f64> {
    let h = meta.spacing();
    let dim = meta.dim;
    let value = |r: f64| -> f64 {
        match family {
            KernelFamily::Box { width } => {
                let half = width / 2.0;
                let height = match dim {
                    1 => 1.0 / width,
                    _ => 1.0 / (std::f64::consts::PI * half * half),
                };
                if (r - half).abs() < 1e-9 * h {
                    0.5 * height
                } else if r < half {
                    height
                } else {
                    0.0
                }
            }
            KernelFamily::Tent { half_base } => {
                let a = *half_base;
                if r >= a {
                    0.0
                } else {
                    let height = match dim {
                        1 => 1.0 / a,
                        _ => 3.0 / (std::f64::consts::PI * a * a),
                    };
                    height * (1.0 - r / a)
                }
            }
            KernelFamily::Gaussian { variance } => {
                let v = *variance;
                let norm = match dim {
                    1 => (2.0 * std::f64::consts::PI * v).sqrt(),
                    _ => 2.0 * std::f64::consts::PI * v,
                };
                (-r * r / (2.0 * v)).exp() / norm
            }
            KernelFamily::PathologicalLogTail => {
                let norm = match dim {
                    1 => 2.0 * std::f64::consts::PI,
                    _ => 2.0 * std::f64::consts::PI * std::f64::consts::PI,
                };
                let rr = if r == 0.0 { h } else { r };
                let ln = rr.ln();
                1.0 / (norm * rr.powi(dim as i32) * (1.0 + ln * ln))
            }
            _ => unreachable!("sample_physical called on a symbol-built family"),
        }
    };
    (0..meta.len()).map(|flat| value(meta.radius(flat))).collect()
}

fn check_radial_symmetry(samples: &[f64], meta: &GridMeta) -> Result<()> {
    let scale = sup_norm(samples).max(f64::MIN_POSITIVE);
    for flat in 0..samples.len() {
        let m = meta.mirror(flat);
        if (samples[flat] - samples[m]).abs() > 1e-12 * scale {
            return Err(Error::Evaluation(format!(
                "kernel breaks radial symmetry at index {flat}"
            )));
        }
    }
    if meta.dim == 2 {
        // Axis permutation on the square grid.
        let m = meta.points_per_axis;
        for i in 0..m {
            for j in (i + 1)..m {
                if (samples[i * m + j] - samples[j * m + i]).abs() > 1e-12 * scale {
                    return Err(Error::Evaluation(format!(
                        "kernel breaks axis-permutation symmetry at ({i}, {j})"
                    )));
                }
            }
        }
    }
    Ok(())
}

impl GridKernel {
    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Real Fourier symbol at the grid frequencies (even and real by the
    /// radial-symmetry invariant).
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    /// `|1 - mass before normalization|`, the truncation deficit.
    pub fn normalization_deficit(&self) -> f64 {
        self.normalization_deficit
    }

    /// Closed-form mass outside the domain where available.
    pub fn tail_mass(&self) -> Option<f64> {
        self.tail_mass
    }

    /// True when the symbol has not decayed by the Nyquist frequency, so
    /// physical-space samples of this kernel are aliased.
    pub fn is_under_resolved(&self) -> bool {
        self.under_resolved
    }

    pub fn family_name(&self) -> &str {
        &self.family_name
    }

    pub fn family_params(&self) -> &[f64] {
        &self.family_params
    }

    fn power_samples(&self, grid: &SpectralGrid, k: usize) -> Vec<f64> {
        let powered: Vec<f64> = self.symbol.iter().map(|s| s.powi(k as i32)).collect();
        grid.inverse_real(&powered)
    }

    /// Trapezoid mass of `|samples|` on the `|x| > X/2` shell.
    fn shell_mass(&self, samples: &[f64]) -> f64 {
        let cut = self.meta.half_width / 2.0;
        let mut mass = 0.0;
        for (flat, v) in samples.iter().enumerate() {
            if self.meta.radius(flat) > cut {
                mass += v.abs();
            }
        }
        mass * self.meta.cell_volume()
    }

    fn wraparound_estimate(&self, grid: &SpectralGrid, k: usize) -> f64 {
        if k <= 1 {
            return 0.0;
        }
        let half = k.div_ceil(2);
        let shell = self.shell_mass(&self.power_samples(grid, half));
        shell * shell
    }

    /// k-fold convolution power via the symbol, with a periodization guard.
    pub fn convolution_power(&self, k: usize) -> Result<ConvolutionPower> {
        if k == 0 {
            return Err(Error::Argument("convolution power needs k >= 1".into()));
        }
        if k == 1 {
            return Ok(ConvolutionPower {
                meta: self.meta,
                k,
                sup_norm: sup_norm(&self.samples),
                l1_norm: self.l1,
                wraparound_estimate: 0.0,
                samples: self.samples.clone(),
            });
        }
        let grid = SpectralGrid::new(self.meta);
        let estimate = self.wraparound_estimate(&grid, k);
        if estimate > WRAPAROUND_LIMIT {
            return Err(Error::Periodization { k, estimate, limit: WRAPAROUND_LIMIT });
        }
        let samples = self.power_samples(&grid, k);
        Ok(ConvolutionPower {
            meta: self.meta,
            k,
            sup_norm: sup_norm(&samples),
            l1_norm: l1_norm(&samples, &self.meta),
            wraparound_estimate: estimate,
            samples,
        })
    }

    /// Largest `k <= cap` whose wrap-around estimate stays trustworthy.
    pub fn max_trustworthy_k(&self, cap: usize) -> usize {
        if cap <= 1 {
            return cap.max(1);
        }
        let grid = SpectralGrid::new(self.meta);
        if self.wraparound_estimate(&grid, cap) <= WRAPAROUND_LIMIT {
            return cap;
        }
        let mut lo = 1usize;
        let mut hi = cap;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.wraparound_estimate(&grid, mid) <= WRAPAROUND_LIMIT {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Sharp Young bound on `sup |J_k|`.
    ///
    /// `intermediate` is the exact product-constant form
    /// `e^(n/2) k^(-n/2) (int |J|^(k/(k-1)))^(k-1)`, evaluated in the log
    /// domain; `limiting` is its large-k entropy form
    /// `e^(n/2) exp(gamma int |J| ln |J|) k^(-n/2)`.
    pub fn sharp_young_bound(&self, k: usize, gamma_probe: f64) -> Result<YoungBound> {
        if k == 0 {
            return Err(Error::Argument("sharp young bound needs k >= 1".into()));
        }
        if !(gamma_probe > 0.0) || !gamma_probe.is_finite() {
            return Err(Error::Argument(format!("gamma probe must be positive, got {gamma_probe}")));
        }
        let n = self.meta.dim as f64;
        let hn = self.meta.cell_volume();

        let mut entropy = 0.0_f64;
        for &v in &self.samples {
            let a = v.abs();
            if a > 0.0 {
                entropy += a * a.ln();
            }
        }
        entropy *= hn;

        let intermediate = if k == 1 {
            (0.5 * n).exp() * sup_norm(&self.samples)
        } else {
            let p = k as f64 / (k as f64 - 1.0);
            let integral: f64 = self.samples.iter().map(|v| v.abs().powf(p)).sum::<f64>() * hn;
            (0.5 * n - 0.5 * n * (k as f64).ln() + (k as f64 - 1.0) * integral.ln()).exp()
        };
        let limiting = if entropy.is_finite() {
            (0.5 * n + gamma_probe * entropy - 0.5 * n * (k as f64).ln()).exp()
        } else {
            f64::INFINITY
        };
        Ok(YoungBound { intermediate, limiting, entropy })
    }

    /// Least-squares fit of `ln(1 - symbol)` over a low-frequency band.
    pub fn estimate_symbol_expansion(
        &self,
        band: (f64, f64),
        model: &ExpansionModel,
    ) -> Result<SymbolExpansion> {
        let (lo, hi) = band;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Argument(format!("bad fit band ({lo}, {hi})")));
        }
        if hi >= 1.0 {
            return Err(Error::Argument(format!(
                "fit band must sit below frequency 1 so ln(1/|xi|) stays positive, got {hi}"
            )));
        }
        if hi > self.meta.freq_max() {
            return Err(Error::Argument("fit band exceeds resolved frequencies".into()));
        }

        let mut radii = Vec::new();
        let mut y = Vec::new();
        for flat in 0..self.symbol.len() {
            let r = self.meta.freq_radius(flat);
            if r >= lo && r <= hi {
                let one_minus = 1.0 - self.symbol[flat];
                if one_minus <= 0.0 {
                    return Err(Error::Fit(format!(
                        "1 - symbol is non-positive ({one_minus:.3e}) at |xi| = {r}"
                    )));
                }
                radii.push(r);
                y.push(one_minus.ln());
            }
        }
        if radii.len() < 16 {
            return Err(Error::Argument(format!(
                "fit band holds only {} frequency samples, need at least 16",
                radii.len()
            )));
        }

        let ones = vec![1.0; radii.len()];
        let ln_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let (coeffs, modeled): (Vec<f64>, Vec<f64>) = match model {
            ExpansionModel::PowerOnly => {
                let c = least_squares(&[&ones, &ln_r], &y)?;
                let fit: Vec<f64> = ln_r.iter().map(|&x| c[0] + c[1] * x).collect();
                (c, fit)
            }
            ExpansionModel::PowerLog => {
                let lnln: Vec<f64> = radii.iter().map(|r| (1.0 / r).ln().ln()).collect();
                let c = least_squares(&[&ones, &ln_r, &lnln], &y)?;
                let fit: Vec<f64> = ln_r
                    .iter()
                    .zip(lnln.iter())
                    .map(|(&x, &w)| c[0] + c[1] * x + c[2] * w)
                    .collect();
                (c, fit)
            }
            ExpansionModel::PrescribedSlow { slow, gamma } => {
                let mut shifted = Vec::with_capacity(y.len());
                let mut offsets = Vec::with_capacity(y.len());
                for (&r, &yy) in radii.iter().zip(y.iter()) {
                    let off = slow.eval_clamped(r.powf(-gamma))?.ln();
                    offsets.push(off);
                    shifted.push(yy - off);
                }
                let c = least_squares(&[&ones, &ln_r], &shifted)?;
                let fit: Vec<f64> = ln_r
                    .iter()
                    .zip(offsets.iter())
                    .map(|(&x, &off)| c[0] + c[1] * x + off)
                    .collect();
                (c, fit)
            }
        };

        let residual = y
            .iter()
            .zip(modeled.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));

        let (mu, gamma) = match model {
            ExpansionModel::PowerOnly => (0.0, 1.0),
            ExpansionModel::PowerLog => (coeffs[2], 1.0),
            ExpansionModel::PrescribedSlow { gamma, .. } => (0.0, *gamma),
        };
        Ok(SymbolExpansion {
            amplitude: coeffs[0].exp(),
            sigma: coeffs[1],
            mu,
            gamma,
            fit_residual: residual,
        })
    }
}

/// A k-fold convolution power and its norms.
#[derive(Clone, Debug)]
pub struct ConvolutionPower {
    pub meta: GridMeta,
    pub k: usize,
    pub samples: Vec<f64>,
    pub sup_norm: f64,
    pub l1_norm: f64,
    pub wraparound_estimate: f64,
}

/// The two forms of the sharp Young sup-norm bound.
#[derive(Clone, Copy, Debug)]
pub struct YoungBound {
    pub intermediate: f64,
    pub limiting: f64,
    pub entropy: f64,
}

/// Model classes for [`GridKernel::estimate_symbol_expansion`].
#[derive(Clone, Debug)]
pub enum ExpansionModel {
    /// `1 - symbol = A |xi|^sigma`.
    PowerOnly,
    /// `1 - symbol = A |xi|^sigma (ln(1/|xi|))^mu`.
    PowerLog,
    /// `1 - symbol = A |xi|^sigma L(|xi|^(-gamma))` with `L`, `gamma` fixed.
    PrescribedSlow { slow: SlowVarying, gamma: f64 },
}

/// Fitted small-frequency expansion parameters of a symbol.
#[derive(Clone, Copy, Debug)]
pub struct SymbolExpansion {
    pub amplitude: f64,
    pub sigma: f64,
    pub mu: f64,
    pub gamma: f64,
    pub fit_residual: f64,
}

/// Sharp constant `C_p = (p^(1/p) / q^(1/q))^(1/2)` of Young's convolution
/// inequality, `1/p + 1/q = 1`.
pub fn brascamp_lieb_constant(p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Argument(format!("exponent must satisfy p >= 1, got {p}")));
    }
    if p == 1.0 || p.is_infinite() {
        return Ok(1.0);
    }
    if p == 2.0 {
        return Ok(1.0);
    }
    let q = p / (p - 1.0);
    Ok((0.5 * (p.ln() / p - q.ln() / q)).exp())
}

/// Half-width that makes `feature_width` span exactly `cells` grid cells.
/// With `cells` odd, jump discontinuities land between nodes, which keeps
/// trapezoid integrals of indicator kernels exact.
pub fn aligned_half_width(points_per_axis: usize, feature_width: f64, cells: usize) -> f64 {
    points_per_axis as f64 * feature_width / (2.0 * cells as f64)
}

fn least_squares(cols: &[&[f64]], y: &[f64]) -> Result<Vec<f64>> {
    let m = cols.len();
    let n = y.len();
    let mut ata = vec![vec![0.0_f64; m]; m];
    let mut aty = vec![0.0_f64; m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for r in 0..n {
                s += cols[i][r] * cols[j][r];
            }
            ata[i][j] = s;
        }
        let mut s = 0.0;
        for r in 0..n {
            s += cols[i][r] * y[r];
        }
        aty[i] = s;
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let mut pivot = col;
        for row in (col + 1)..m {
            if ata[row][col].abs() > ata[pivot][col].abs() {
                pivot = row;
            }
        }
        if ata[pivot][col].abs() < 1e-300 {
            return Err(Error::Fit("singular normal equations".into()));
        }
        ata.swap(col, pivot);
        aty.swap(col, pivot);
        for row in (col + 1)..m {
            let f = ata[row][col] / ata[col][col];
            for cc in col..m {
                ata[row][cc] -= f * ata[col][cc];
            }
            aty[row] -= f * aty[col];
        }
    }
    let mut x = vec![0.0_f64; m];
    for row in (0..m).rev() {
        let mut s = aty[row];
        for cc in (row + 1)..m {
            s -= ata[row][cc] * x[cc];
        }
        x[row] = s / ata[row][row];
    }
    Ok(x)
}
