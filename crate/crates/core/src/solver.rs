//! Evolution of the nonlocal equation `du/dt = J*u - chi0 u` on the
//! periodic grid, by two independent routes.
//!
//! The spectral route exponentiates the symbol pointwise,
//! `u_hat(t) = exp((J_hat - chi0) t) u0_hat`, and is exact up to grid
//! discretization for any `t`. The series route accumulates the
//! exponential-series terms `e^(-chi0 t) t^k/k! J^k u0`, one FFT
//! convolution per term, with a certified Poisson tail bound. The two
//! routes are each other's oracle.

use rustfft::num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::grid::{l1_norm, l2_norm, sup_norm, GridMeta, SpectralGrid};
use crate::kernels::GridKernel;

/// Norm index used throughout the decay experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormP {
    One,
    Two,
    Inf,
}

impl NormP {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormP::One => "1",
            NormP::Two => "2",
            NormP::Inf => "inf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(NormP::One),
            "2" => Ok(NormP::Two),
            "inf" | "sup" => Ok(NormP::Inf),
            other => Err(Error::Argument(format!("unknown norm index {other:?}"))),
        }
    }

    /// The Hoelder weight `1 - 1/p` that scales decay exponents.
    pub fn holder_weight(&self) -> f64 {
        match self {
            NormP::One => 0.0,
            NormP::Two => 0.5,
            NormP::Inf => 1.0,
        }
    }
}

/// Trapezoid norms of one snapshot.
#[derive(Clone, Copy, Debug)]
pub struct NormSet {
    pub l1: f64,
    pub l2: f64,
    pub sup: f64,
}

impl NormSet {
    fn of(samples: &[f64], meta: &GridMeta) -> Self {
        Self { l1: l1_norm(samples, meta), l2: l2_norm(samples, meta), sup: sup_norm(samples) }
    }

    pub fn get(&self, p: NormP) -> f64 {
        match p {
            NormP::One => self.l1,
            NormP::Two => self.l2,
            NormP::Inf => self.sup,
        }
    }
}

/// Which route produced a snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Series,
    Spectral,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Spectral => "spectral",
        }
    }
}

/// Initial-data families.
#[derive(Clone, Debug)]
pub enum InitialFamily {
    /// Centered Gaussian density.
    Gaussian { variance: f64 },
    /// Normalized box of the given width.
    Box { width: f64 },
    /// One-cell impulse of unit mass. Its discrete Fourier content is flat,
    /// so `fourier_l1` grows with the grid; use a band-limited family for
    /// symbol-expansion experiments.
    Spike,
    /// Raised-cosine spectrum `cos^2(pi |xi| / (2 cutoff))` below `cutoff`.
    BandLimited { cutoff: f64 },
}

/// Grid-compatible initial data with cached spectrum and norms.
#[derive(Clone, Debug)]
pub struct InitialData {
    meta: GridMeta,
    samples: Vec<f64>,
    spectrum: Vec<Complex64>,
    pub l1_norm: f64,
    pub sup_norm: f64,
    /// Trapezoid L1 norm of the discrete symbol of `u0`.
    pub fourier_l1: f64,
}

impl InitialData {
    pub fn from_samples(meta: GridMeta, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != meta.len() {
            return Err(Error::GridMismatch(format!(
                "initial data has {} samples, grid expects {}",
                samples.len(),
                meta.len()
            )));
        }
        let grid = SpectralGrid::new(meta);
        let spectrum = grid.forward(&samples);
        Self::finish(meta, samples, spectrum)
    }

    fn finish(meta: GridMeta, samples: Vec<f64>, spectrum: Vec<Complex64>) -> Result<Self> {
        let dxi = (std::f64::consts::PI / meta.half_width).powi(meta.dim as i32);
        let fourier_l1 = dxi * spectrum.iter().map(|c| c.norm()).sum::<f64>();
        let out = Self {
            meta,
            l1_norm: l1_norm(&samples, &meta),
            sup_norm: sup_norm(&samples),
            fourier_l1,
            samples,
            spectrum,
        };
        if !out.l1_norm.is_finite() || !out.sup_norm.is_finite() || !out.fourier_l1.is_finite() {
            return Err(Error::Evaluation("initial data has non-finite norms".into()));
        }
        Ok(out)
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }
}

/// Build initial data of the given family on a grid.
pub fn make_initial(family: &InitialFamily, meta: GridMeta) -> Result<InitialData> {
    let h = meta.spacing();
    match family {
        InitialFamily::Gaussian { variance } => {
            if !(*variance > 0.0) {
                return Err(Error::Argument(format!("gaussian variance {variance}")));
            }
            let v = *variance;
            let norm = match meta.dim {
                1 => (2.0 * std::f64::consts::PI * v).sqrt(),
                _ => 2.0 * std::f64::consts::PI * v,
            };
            let samples: Vec<f64> = (0..meta.len())
                .map(|flat| {
                    let r = meta.radius(flat);
                    (-r * r / (2.0 * v)).exp() / norm
                })
                .collect();
            InitialData::from_samples(meta, samples)
        }
        InitialFamily::Box { width } => {
            if !(*width > 0.0) || *width >= meta.half_width {
                return Err(Error::Argument(format!("box width {width}")));
            }
            let half = width / 2.0;
            let height = match meta.dim {
                1 => 1.0 / width,
                _ => 1.0 / (std::f64::consts::PI * half * half),
            };
            let samples: Vec<f64> = (0..meta.len())
                .map(|flat| {
                    let r = meta.radius(flat);
                    if (r - half).abs() < 1e-9 * h {
                        0.5 * height
                    } else if r < half {
                        height
                    } else {
                        0.0
                    }
                })
                .collect();
            InitialData::from_samples(meta, samples)
        }
        InitialFamily::Spike => {
            let mut samples = vec![0.0; meta.len()];
            let center = meta.points_per_axis / 2;
            let flat = match meta.dim {
                1 => center,
                _ => center * meta.points_per_axis + center,
            };
            samples[flat] = 1.0 / meta.cell_volume();
            InitialData::from_samples(meta, samples)
        }
        InitialFamily::BandLimited { cutoff } => {
            if !(*cutoff > 0.0) || *cutoff > meta.freq_max() {
                return Err(Error::Argument(format!(
                    "band-limited cutoff {cutoff} outside (0, {}]",
                    meta.freq_max()
                )));
            }
            let grid = SpectralGrid::new(meta);
            let spectrum: Vec<Complex64> = (0..meta.len())
                .map(|flat| {
                    let r = meta.freq_radius(flat);
                    let v = if r < *cutoff {
                        let c = (std::f64::consts::PI * r / (2.0 * cutoff)).cos();
                        c * c
                    } else {
                        0.0
                    };
                    Complex64::new(v, 0.0)
                })
                .collect();
            let samples: Vec<f64> = grid.inverse(&spectrum).iter().map(|c| c.re).collect();
            InitialData::finish(meta, samples, spectrum)
        }
    }
}

/// One state of the evolution with its norms.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub samples: Vec<f64>,
    pub norms: NormSet,
    pub method: Method,
}

/// Tunables for the series route.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Above this `t` the series route refuses and advises the spectral one.
    pub t_series_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { t_series_max: 200.0 }
    }
}

fn check_grids(kernel: &GridKernel, u0: &InitialData) -> Result<()> {
    if kernel.meta() != u0.meta() {
        return Err(Error::GridMismatch(format!(
            "kernel grid {:?} vs initial data grid {:?}",
            kernel.meta(),
            u0.meta()
        )));
    }
    Ok(())
}

/// Green-operator action by pointwise symbol exponentiation. Exact in time;
/// the only error is grid discretization.
pub fn solve_spectral(
    kernel: &GridKernel,
    u0: &InitialData,
    removal_rate: f64,
    t: f64,
) -> Result<Snapshot> {
    check_grids(kernel, u0)?;
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(Snapshot {
            t,
            norms: NormSet::of(u0.samples(), u0.meta()),
            samples: u0.samples().to_vec(),
            method: Method::Spectral,
        });
    }
    let grid = SpectralGrid::new(*kernel.meta());
    let evolved: Vec<Complex64> = kernel
        .symbol()
        .iter()
        .zip(u0.spectrum().iter())
        .map(|(&s, &c)| c * ((s - removal_rate) * t).exp())
        .collect();
    let samples: Vec<f64> = grid.inverse(&evolved).iter().map(|c| c.re).collect();
    let norms = NormSet::of(&samples, kernel.meta());
    Ok(Snapshot { t, samples, norms, method: Method::Spectral })
}

/// Green-operator action by the exponential series, one FFT convolution per
/// term. The discarded tail is certified below `tol * sup|u0|` through the
/// L1 contraction of the iterates.
pub fn solve_series(
    kernel: &GridKernel,
    u0: &InitialData,
    removal_rate: f64,
    t: f64,
    tol: f64,
) -> Result<Snapshot> {
    solve_series_with(kernel, u0, removal_rate, t, tol, &SolverOptions::default())
}

pub fn solve_series_with(
    kernel: &GridKernel,
    u0: &InitialData,
    removal_rate: f64,
    t: f64,
    tol: f64,
    opts: &SolverOptions,
) -> Result<Snapshot> {
    check_grids(kernel, u0)?;
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("time must be nonnegative, got {t}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Argument(format!("series tolerance must lie in (0, 1), got {tol}")));
    }
    if t > opts.t_series_max {
        return Err(Error::Cost(format!(
            "series route at t = {t} exceeds t_series_max = {}; use the spectral route",
            opts.t_series_max
        )));
    }
    if t == 0.0 {
        return Ok(Snapshot {
            t,
            norms: NormSet::of(u0.samples(), u0.meta()),
            samples: u0.samples().to_vec(),
            method: Method::Series,
        });
    }

    let grid = SpectralGrid::new(*kernel.meta());
    let lambda = t * kernel.l1();
    let mut kmax =
        (lambda + 6.0 * (lambda * (1.0 / tol).ln()).sqrt()).ceil() as usize;
    kmax = kmax.max(8);
    // Certified tail: sum_{k > K} e^(-chi0 t) t^k/k! |J|_1^k |u0|_sup, with the
    // Poisson mass past K dominated geometrically.
    let tail_ok = |kmax: usize| -> bool {
        let rho = lambda / (kmax as f64 + 2.0);
        if rho >= 1.0 {
            return false;
        }
        let ln_mass = (kmax as f64 + 1.0) * lambda.ln() - lambda
            - ln_gamma(kmax as f64 + 2.0)
            - (1.0 - rho).ln();
        let ln_tail = (kernel.l1() - removal_rate) * t + ln_mass;
        ln_tail.exp() <= tol
    };
    while !tail_ok(kmax) {
        kmax *= 2;
        if kmax > 100_000_000 {
            return Err(Error::Evaluation("series tail not controlled".into()));
        }
    }

    // Only the running iterate and the log-domain weight are kept.
    let mut iterate = u0.samples().to_vec();
    let mut acc = vec![0.0_f64; iterate.len()];
    let ln_t = t.ln();
    let mut ln_w = -removal_rate * t;
    for k in 0..=kmax {
        let w = ln_w.exp();
        if w > 0.0 {
            for (a, v) in acc.iter_mut().zip(iterate.iter()) {
                *a += w * v;
            }
        }
        if k < kmax {
            let spec = grid.forward(&iterate);
            let conv: Vec<f64> = spec
                .iter()
                .zip(kernel.symbol().iter())
                .map(|(c, &s)| (c * s).re)
                .collect();
            iterate = grid.inverse_real(&conv);
        }
        ln_w += ln_t - ((k + 1) as f64).ln();
    }
    let norms = NormSet::of(&acc, kernel.meta());
    Ok(Snapshot { t, samples: acc, norms, method: Method::Series })
}

/// `u(t)` minus the first `n_subtract` explicit series terms, for decay
/// fits of the remainder.
pub fn refined_remainder(
    kernel: &GridKernel,
    u0: &InitialData,
    removal_rate: f64,
    t: f64,
    n_subtract: usize,
) -> Result<Snapshot> {
    if n_subtract > 64 {
        return Err(Error::Argument(format!(
            "remainder subtraction supports at most 64 terms, got {n_subtract}"
        )));
    }
    let full = solve_spectral(kernel, u0, removal_rate, t)?;
    if n_subtract == 0 {
        return Ok(full);
    }
    let grid = SpectralGrid::new(*kernel.meta());
    let mut samples = full.samples;
    let mut iterate = u0.samples().to_vec();
    let ln_t = if t > 0.0 { t.ln() } else { f64::NEG_INFINITY };
    let mut ln_w = -removal_rate * t;
    for k in 0..n_subtract {
        let w = if t == 0.0 && k == 0 { 1.0 } else { ln_w.exp() };
        if w > 0.0 {
            for (a, v) in samples.iter_mut().zip(iterate.iter()) {
                *a -= w * v;
            }
        }
        if k + 1 < n_subtract {
            let spec = grid.forward(&iterate);
            let conv: Vec<f64> = spec
                .iter()
                .zip(kernel.symbol().iter())
                .map(|(c, &s)| (c * s).re)
                .collect();
            iterate = grid.inverse_real(&conv);
        }
        ln_w += ln_t - ((k + 1) as f64).ln();
    }
    let norms = NormSet::of(&samples, kernel.meta());
    Ok(Snapshot { t, samples, norms, method: Method::Spectral })
}

/// One row of a norm-versus-time table.
#[derive(Clone, Copy, Debug)]
pub struct NormRow {
    pub t: f64,
    pub method: Method,
    pub p: NormP,
    pub value: f64,
}

/// Norm trajectories over a time grid.
#[derive(Clone, Debug, Default)]
pub struct NormTable {
    pub rows: Vec<NormRow>,
}

impl NormTable {
    /// The `(t, norm)` series for one norm index.
    pub fn series(&self, p: NormP) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.p == p).map(|r| (r.t, r.value)).collect()
    }
}

/// Track the requested norms over a time grid with a single set of FFT
/// plans. Snapshots at distinct times are independent.
pub fn track_norms(
    kernel: &GridKernel,
    u0: &InitialData,
    removal_rate: f64,
    t_grid: &[f64],
    method: Method,
    norms: &[NormP],
) -> Result<NormTable> {
    check_grids(kernel, u0)?;
    if t_grid.is_empty() || norms.is_empty() {
        return Err(Error::Argument("empty time grid or norm set".into()));
    }
    let grid = SpectralGrid::new(*kernel.meta());
    let mut table = NormTable::default();
    for &t in t_grid {
        let set = match method {
            Method::Spectral => {
                if t == 0.0 {
                    NormSet::of(u0.samples(), u0.meta())
                } else {
                    let evolved: Vec<Complex64> = kernel
                        .symbol()
                        .iter()
                        .zip(u0.spectrum().iter())
                        .map(|(&s, &c)| c * ((s - removal_rate) * t).exp())
                        .collect();
                    let samples: Vec<f64> =
                        grid.inverse(&evolved).iter().map(|c| c.re).collect();
                    NormSet::of(&samples, kernel.meta())
                }
            }
            Method::Series => solve_series(kernel, u0, removal_rate, t, 1e-12)?.norms,
        };
        for &p in norms {
            table.rows.push(NormRow { t, method, p, value: set.get(p) });
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{aligned_half_width, make_kernel, KernelFamily};

    fn box_pair(points: usize) -> (GridKernel, InitialData) {
        let x = aligned_half_width(points, 1.0, (points / 32) | 1);
        let kernel = make_kernel(&KernelFamily::Box { width: 1.0 }, 1, x, points).unwrap();
        let u0 = make_initial(&InitialFamily::Box { width: 1.0 }, *kernel.meta()).unwrap();
        (kernel, u0)
    }

    #[test]
    fn both_methods_are_the_identity_at_time_zero() {
        let (kernel, u0) = box_pair(2048);
        let a = solve_spectral(&kernel, &u0, 1.0, 0.0).unwrap();
        let b = solve_series(&kernel, &u0, 1.0, 0.0, 1e-12).unwrap();
        assert_eq!(a.samples, u0.samples());
        assert_eq!(b.samples, u0.samples());
    }

    #[test]
    fn mass_is_conserved_when_removal_matches_the_kernel_mass() {
        let kernel = make_kernel(&KernelFamily::Gaussian { variance: 1.0 }, 1, 60.0, 2048).unwrap();
        let u0 = make_initial(&InitialFamily::Gaussian { variance: 1.0 }, *kernel.meta()).unwrap();
        let h = kernel.meta().cell_volume();
        let mass0: f64 = u0.samples().iter().sum::<f64>() * h;
        for &t in &[2.0, 20.0, 200.0] {
            let snap = solve_spectral(&kernel, &u0, kernel.l1(), t).unwrap();
            let mass: f64 = snap.samples.iter().sum::<f64>() * h;
            assert!(
                (mass / mass0 - 1.0).abs() < 1e-10,
                "t={t}: mass {mass} vs {mass0}"
            );
        }
    }

    #[test]
    fn series_and_spectral_agree() {
        let (kernel, u0) = box_pair(4096);
        for &t in &[1.0, 5.0, 25.0] {
            let a = solve_series(&kernel, &u0, 1.0, t, 1e-12).unwrap();
            let b = solve_spectral(&kernel, &u0, 1.0, t).unwrap();
            let mut worst = 0.0_f64;
            for (x, y) in a.samples.iter().zip(b.samples.iter()) {
                worst = worst.max((x - y).abs());
            }
            assert!(
                worst <= 1e-8 * u0.sup_norm,
                "t={t}: sup difference {worst}"
            );
        }
    }

    #[test]
    fn positivity_is_preserved() {
        let (kernel, u0) = box_pair(2048);
        for &t in &[1.0, 10.0, 60.0] {
            let snap = solve_spectral(&kernel, &u0, 1.0, t).unwrap();
            let min = snap.samples.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-10 * u0.sup_norm, "t={t}: min {min}");
        }
    }

    #[test]
    fn excess_removal_gives_exponential_contraction() {
        // chi0 = 2 > |J|_1 = 1 forces |u(t)|_1 <= e^(-t) |u0|_1.
        let (kernel, u0) = box_pair(2048);
        for &t in &[1.0, 5.0, 20.0] {
            let snap = solve_series(&kernel, &u0, 2.0, t, 1e-12).unwrap();
            let bound = (-(2.0 - kernel.l1()) * t).exp() * u0.l1_norm * (1.0 + 1e-8);
            assert!(snap.norms.l1 <= bound, "t={t}: {} vs {bound}", snap.norms.l1);
            assert!(snap.norms.l1 >= 0.5 * bound);
        }
    }

    #[test]
    fn series_route_refuses_large_times() {
        let (kernel, u0) = box_pair(2048);
        assert!(matches!(
            solve_series(&kernel, &u0, 1.0, 500.0, 1e-10),
            Err(Error::Cost(_))
        ));
    }

    #[test]
    fn grid_mismatch_is_detected() {
        let (kernel, _) = box_pair(2048);
        let other = GridMeta::new(1, 32.0, 1024).unwrap();
        let u0 = make_initial(&InitialFamily::Gaussian { variance: 1.0 }, other).unwrap();
        assert!(matches!(
            solve_spectral(&kernel, &u0, 1.0, 1.0),
            Err(Error::GridMismatch(_))
        ));
    }

    /// Independent quadrature oracle for the Gaussian-kernel peak value:
    /// u(t, 0) = (1/2pi) Int exp((e^(-xi^2/2) - 1) t) u0_hat(xi) dxi.
    fn gaussian_peak_oracle(t: f64) -> f64 {
        let f = |xi: f64| ((-(0.5 * xi * xi)).exp() - 1.0) * t;
        let g = |xi: f64| (f(xi)).exp() * (-0.5 * xi * xi).exp();
        // Plain Simpson on [-12, 12]; the integrand is smooth and tiny at
        // the ends, 20k panels are plenty for 1e-10 relative accuracy.
        let n = 20_000;
        let a = -12.0;
        let b = 12.0;
        let hh = (b - a) / n as f64;
        let mut s = g(a) + g(b);
        for i in 1..n {
            let x = a + i as f64 * hh;
            s += g(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * hh / 3.0 / (2.0 * std::f64::consts::PI)
    }

    #[test]
    fn gaussian_evolution_matches_the_quadrature_oracle() {
        let kernel = make_kernel(&KernelFamily::Gaussian { variance: 1.0 }, 1, 64.0, 8192).unwrap();
        let u0 = make_initial(&InitialFamily::Gaussian { variance: 1.0 }, *kernel.meta()).unwrap();
        let s20 = solve_spectral(&kernel, &u0, 1.0, 20.0).unwrap();
        let oracle = gaussian_peak_oracle(20.0);
        assert!(
            (s20.norms.sup / oracle - 1.0).abs() < 1e-8,
            "{} vs {oracle}",
            s20.norms.sup
        );
        // sup|u| sqrt(t) stabilizes: t = 20 vs t = 80 agree within 5% after
        // the sqrt rescaling.
        let s80 = solve_spectral(&kernel, &u0, 1.0, 80.0).unwrap();
        let a = s20.norms.sup * 20f64.sqrt();
        let b = s80.norms.sup * 80f64.sqrt();
        assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
    }

    #[test]
    fn remainder_with_zero_terms_is_the_full_solution() {
        let (kernel, u0) = box_pair(2048);
        let full = solve_spectral(&kernel, &u0, 1.0, 8.0).unwrap();
        let rem = refined_remainder(&kernel, &u0, 1.0, 8.0, 0).unwrap();
        assert_eq!(full.samples, rem.samples);
    }

    #[test]
    fn remainder_order_is_capped() {
        let (kernel, u0) = box_pair(2048);
        assert!(matches!(
            refined_remainder(&kernel, &u0, 1.0, 8.0, 65),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn spike_remainder_decays_like_the_square_root_law() {
        let x = aligned_half_width(8192, 1.0, 129);
        let kernel = make_kernel(&KernelFamily::Box { width: 1.0 }, 1, x, 8192).unwrap();
        let u0 = make_initial(&InitialFamily::Spike, *kernel.meta()).unwrap();
        let mut scaled = Vec::new();
        for &t in &[50.0, 100.0, 200.0, 400.0] {
            let rem = refined_remainder(&kernel, &u0, 1.0, t, 1).unwrap();
            scaled.push(rem.norms.sup * t.sqrt());
        }
        let max = scaled.iter().cloned().fold(0.0_f64, f64::max);
        let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 2.0, "scaled remainder norms {scaled:?}");
    }

    #[test]
    fn remainder_triangle_inequality_between_orders() {
        let (kernel, u0) = box_pair(2048);
        let t = 30.0;
        let r1 = refined_remainder(&kernel, &u0, 1.0, t, 1).unwrap();
        let r2 = refined_remainder(&kernel, &u0, 1.0, t, 2).unwrap();
        // The order-2 remainder differs from order-1 by the k = 1 term.
        let grid = SpectralGrid::new(*kernel.meta());
        let spec = grid.forward(u0.samples());
        let conv: Vec<f64> =
            spec.iter().zip(kernel.symbol().iter()).map(|(c, &s)| (c * s).re).collect();
        let ju0 = grid.inverse_real(&conv);
        let term_bound = (-t).exp() * t * sup_norm(&ju0);
        assert!(r2.norms.sup <= r1.norms.sup + term_bound + 1e-12);
    }

    #[test]
    fn spike_fourier_mass_grows_with_refinement() {
        let meta_a = GridMeta::new(1, 32.0, 1024).unwrap();
        let meta_b = GridMeta::new(1, 32.0, 4096).unwrap();
        let a = make_initial(&InitialFamily::Spike, meta_a).unwrap();
        let b = make_initial(&InitialFamily::Spike, meta_b).unwrap();
        assert!(b.fourier_l1 > 3.0 * a.fourier_l1, "{} vs {}", b.fourier_l1, a.fourier_l1);
    }

    #[test]
    fn band_limited_initial_data_has_compact_spectrum() {
        let meta = GridMeta::new(1, 256.0, 4096).unwrap();
        let u0 = make_initial(&InitialFamily::BandLimited { cutoff: 1.0 }, meta).unwrap();
        for (flat, c) in u0.spectrum().iter().enumerate() {
            if meta.freq_radius(flat) > 1.0 {
                assert_eq!(c.norm(), 0.0);
            }
        }
        assert!((u0.spectrum()[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_evolution_conserves_mass_and_cross_validates() {
        let kernel = make_kernel(&KernelFamily::Gaussian { variance: 1.0 }, 2, 24.0, 256).unwrap();
        let u0 = make_initial(&InitialFamily::Gaussian { variance: 1.0 }, *kernel.meta()).unwrap();
        let h2 = kernel.meta().cell_volume();
        let mass0: f64 = u0.samples().iter().sum::<f64>() * h2;
        let a = solve_spectral(&kernel, &u0, 1.0, 6.0).unwrap();
        let b = solve_series(&kernel, &u0, 1.0, 6.0, 1e-12).unwrap();
        let mass: f64 = a.samples.iter().sum::<f64>() * h2;
        assert!((mass / mass0 - 1.0).abs() < 1e-10);
        let mut worst = 0.0_f64;
        for (x, y) in a.samples.iter().zip(b.samples.iter()) {
            worst = worst.max((x - y).abs());
        }
        assert!(worst <= 1e-8 * u0.sup_norm, "sup difference {worst}");
        // In 2-d the sup decays like 1/t.
        let late = solve_spectral(&kernel, &u0, 1.0, 24.0).unwrap();
        let ratio = (a.norms.sup * 6.0) / (late.norms.sup * 24.0);
        assert!((ratio - 1.0).abs() < 0.15, "scaled sups {ratio}");
    }

    #[test]
    fn norm_table_round_trip() {
        let (kernel, u0) = box_pair(2048);
        let table = track_norms(
            &kernel,
            &u0,
            1.0,
            &[1.0, 2.0, 4.0],
            Method::Spectral,
            &[NormP::One, NormP::Inf],
        )
        .unwrap();
        assert_eq!(table.rows.len(), 6);
        let sups = table.series(NormP::Inf);
        assert_eq!(sups.len(), 3);
        assert!(sups.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12)));
    }
}
