//! Radial solutions on the cylinder: the Fowler-type second-order ODE, its
//! conserved first integral, period detection in the bounded regimes, and
//! the exponential tail expansion of the unbounded regimes.
//!
//! Regimes by (n, k):
//!   * k = 1          - the Yamabe equation in the v-variable; bounded
//!                      solutions are constant or periodic.
//!   * 2 <= k < n/2   - "small": periodic profiles around a constant.
//!   * k = n/2        - "middle": xi ~ sqrt(1 - h^{1/k}) t + a_0.
//!   * n/2 < k <= n   - "large": xi ~ t + a_0, with ladder rates generated
//!                      by rho_0 = 2 - n/k and n.
//!
//! For the sigma_k branch the conserved quantity along any trajectory is
//!   e^{(2k-n) xi} (1 - xi_t^2)^k - e^{-n xi} = h,
//! and all tail coefficients are pinned by h and a_0; the leading one is
//!   a_1 = k/(2k-n) * (h^{1/k}/2) * e^{-rho_0 a_0},
//! followed by the recursion a_2 = -a_1^2 rho_0 / 4.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{fit_decay, fit_exp_sum, DecayModel};
use crate::ode::{integrate_2d, SampledCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Yamabe,
    Small,
    Middle,
    Large,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Yamabe => "yamabe",
            Regime::Small => "small",
            Regime::Middle => "middle",
            Regime::Large => "large",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProblemParams {
    pub n: usize,
    pub k: usize,
    /// Normalizing constant 2^{-k} C(n, k) on the curvature side.
    pub c_k: f64,
    pub regime: Regime,
}

impl ProblemParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParams(format!("dimension n = {n} must be >= 3")));
        }
        if k < 1 || k > n {
            return Err(Error::InvalidParams(format!("k = {k} out of range 1..={n}")));
        }
        let mut c_k = 1.0;
        for i in 0..k {
            c_k = c_k * (n - i) as f64 / (i + 1) as f64;
        }
        c_k *= 0.5f64.powi(k as i32);
        let regime = if k == 1 {
            Regime::Yamabe
        } else if 2 * k < n {
            Regime::Small
        } else if 2 * k == n {
            Regime::Middle
        } else {
            Regime::Large
        };
        Ok(ProblemParams { n, k, c_k, regime })
    }

    /// rho_0 = 2 - n/k, the slow kernel decay rate of the large regime.
    pub fn slow_rate(&self) -> f64 {
        2.0 - self.n as f64 / self.k as f64
    }

    pub fn is_sigma(&self) -> bool {
        self.k >= 2
    }

    /// Critical Sobolev-type exponent (n+2)/(n-2) of the Yamabe branch.
    pub fn yamabe_exponent(&self) -> f64 {
        (self.n as f64 + 2.0) / (self.n as f64 - 2.0)
    }

    /// Right-hand side of the radial ODE as a first-order system.
    pub fn radial_rhs(&self, y: [f64; 2]) -> [f64; 2] {
        let (xi, v) = (y[0], y[1]);
        if self.is_sigma() {
            let n = self.n as f64;
            let k = self.k as f64;
            let one = (1.0 - v) * (1.0 + v);
            let acc = -(n / (2.0 * k) - 1.0) * one
                + n / (2.0 * k) * one.powi(1 - self.k as i32) * (-2.0 * k * xi).exp();
            [v, acc]
        } else {
            let n = self.n as f64;
            let acc = 0.25 * (n - 2.0) * (n - 2.0) * xi
                - 0.25 * n * (n - 2.0) * xi.powf(self.yamabe_exponent());
            [v, acc]
        }
    }

    /// Conserved quantity: the first integral (sigma_k) or the phase-plane
    /// energy (Yamabe).
    pub fn conserved(&self, xi: f64, xi_t: f64) -> f64 {
        if self.is_sigma() {
            let n = self.n as f64;
            let k = self.k as f64;
            // (1 - v)(1 + v) avoids cancellation when |v| is close to 1
            let one = (1.0 - xi_t) * (1.0 + xi_t);
            ((2.0 * k - n) * xi).exp() * one.powi(self.k as i32) - (-n * xi).exp()
        } else {
            let n = self.n as f64;
            let c = (n - 2.0) * (n - 2.0) / 8.0;
            0.5 * xi_t * xi_t - c * xi * xi + c * xi.powf(2.0 * n / (n - 2.0))
        }
    }
}

/// A radial solution sampled on a uniform grid, with Hermite evaluation
/// between samples.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub params: ProblemParams,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    /// First integral (sigma_k) or energy (Yamabe), from the initial data.
    pub h: f64,
    /// Set when h <= 0 was accepted for a sigma_k run (useful for negative
    /// tests; such profiles do not model nonremovable singularities).
    pub h_flagged: bool,
    /// Asymptotic shift a_0 = lim (xi - slope * t), middle/large regimes.
    pub offset: Option<f64>,
    pub period: Option<f64>,
    /// Max first-integral drift over the grid.
    pub drift: f64,
    curve: SampledCurve,
}

impl RadialProfile {
    pub fn value(&self, t: f64) -> f64 {
        self.curve.value(t)
    }

    pub fn slope(&self, t: f64) -> f64 {
        self.curve.slope(t)
    }

    pub fn second_deriv(&self, t: f64) -> f64 {
        self.params.radial_rhs([self.value(t), self.slope(t)])[1]
    }

    pub fn t_min(&self) -> f64 {
        self.t_grid[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.t_grid.last().unwrap()
    }

    /// Slope of the linear growth: 1 (large), sqrt(1-h^{1/k}) (middle),
    /// 0 (bounded regimes).
    pub fn linear_slope(&self) -> f64 {
        match self.params.regime {
            Regime::Large => 1.0,
            Regime::Middle => (1.0 - self.h.powf(1.0 / self.params.k as f64)).max(0.0).sqrt(),
            _ => 0.0,
        }
    }
}

/// The unique constant radial solution of the bounded regimes.
pub fn constant_radial(params: &ProblemParams) -> Result<f64> {
    match params.regime {
        Regime::Yamabe => {
            let n = params.n as f64;
            Ok(((n - 2.0) / n).powf((n - 2.0) / 4.0))
        }
        Regime::Small => {
            let n = params.n as f64;
            let k = params.k as f64;
            Ok(-(1.0 - 2.0 * k / n).ln() / (2.0 * k))
        }
        other => Err(Error::NoConstantSolution(other.to_string())),
    }
}

/// Integrate the radial ODE with data (xi0, xi_t0) at t = 0 over
/// [t_min, t_max] (t_min <= 0 <= t_max), sampled every `dt`.
pub fn integrate_radial(
    params: &ProblemParams,
    xi0: f64,
    xit0: f64,
    t_span: (f64, f64),
    dt: f64,
) -> Result<RadialProfile> {
    let (t_min, t_max) = t_span;
    if t_min > 0.0 || t_max < 0.0 || t_max <= t_min {
        return Err(Error::InvalidParams(format!(
            "span [{t_min}, {t_max}] must contain the data point t = 0"
        )));
    }
    if params.is_sigma() && xit0.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "|xi_t(0)| = {} >= 1 leaves the ellipticity region",
            xit0.abs()
        )));
    }
    if !params.is_sigma() && xi0 <= 0.0 {
        return Err(Error::Domain("Yamabe profiles require v(0) > 0".into()));
    }
    let h = params.conserved(xi0, xit0);
    let h_flagged = params.is_sigma() && h <= 0.0;

    let rhs = |_t: f64, y: [f64; 2]| params.radial_rhs(y);
    let guard = |_t: f64, y: [f64; 2]| {
        if params.is_sigma() {
            y[1].abs() >= 1.0 - 1e-13
        } else {
            y[0] <= 1e-13
        }
    };

    let mut ts = Vec::new();
    let mut ys: Vec<[f64; 2]> = Vec::new();
    if t_min < 0.0 {
        let (bt, by) = integrate_2d(rhs, guard, 0.0, [xi0, xit0], t_min, dt)?;
        for (t, y) in bt.into_iter().zip(by).skip(1).rev() {
            ts.push(t);
            ys.push(y);
        }
    }
    if t_max > 0.0 {
        let (ft, fy) = integrate_2d(rhs, guard, 0.0, [xi0, xit0], t_max, dt)?;
        ts.extend(ft);
        ys.extend(fy);
    } else {
        ts.push(0.0);
        ys.push([xi0, xit0]);
    }

    let values: Vec<f64> = ys.iter().map(|y| y[0]).collect();
    let slopes: Vec<f64> = ys.iter().map(|y| y[1]).collect();
    let dy1: Vec<f64> = ys.iter().map(|y| params.radial_rhs(*y)[1]).collect();
    let mut drift: f64 = 0.0;
    for y in &ys {
        drift = drift.max((params.conserved(y[0], y[1]) - h).abs());
    }
    let curve = SampledCurve { t0: ts[0], dt, y: ys, dy1 };

    let mut profile = RadialProfile {
        params: *params,
        t_grid: ts,
        values,
        slopes,
        h,
        h_flagged,
        offset: None,
        period: None,
        drift,
        curve,
    };
    if matches!(params.regime, Regime::Middle | Regime::Large) && !h_flagged {
        profile.offset = fit_offset(&profile).ok();
    }
    Ok(profile)
}

/// Pointwise residual of the conserved quantity against the stored value.
pub fn first_integral_residual(profile: &RadialProfile) -> f64 {
    let mut worst: f64 = 0.0;
    for (xi, v) in profile.values.iter().zip(&profile.slopes) {
        worst = worst.max((profile.params.conserved(*xi, *v) - profile.h).abs());
    }
    worst
}

/// Period of a bounded nonconstant profile, from successive maxima with
/// sub-grid refinement, verified by orbit closure over one extra period.
/// Constant profiles return None.
pub fn detect_period(profile: &RadialProfile) -> Result<Option<f64>> {
    match profile.params.regime {
        Regime::Yamabe | Regime::Small => {}
        other => {
            return Err(Error::WrongRegime {
                expected: "yamabe or small".into(),
                got: other.to_string(),
            })
        }
    }
    let scale = profile
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if scale.1 - scale.0 < 1e-10 {
        return Ok(None); // constant profile
    }
    // maxima: slope crosses + -> -
    let mut maxima = Vec::new();
    for i in 1..profile.t_grid.len() {
        if profile.slopes[i - 1] > 0.0 && profile.slopes[i] <= 0.0 {
            let mut a = profile.t_grid[i - 1];
            let mut b = profile.t_grid[i];
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if profile.slope(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            maxima.push(0.5 * (a + b));
        }
    }
    if maxima.len() < 3 {
        return Err(Error::Classification(format!(
            "found {} maxima; profile looks monotone or the span is too short",
            maxima.len()
        )));
    }
    let diffs: Vec<f64> = maxima.windows(2).map(|w| w[1] - w[0]).collect();
    let period = diffs.iter().sum::<f64>() / diffs.len() as f64;
    // closure check over one extra period
    let t0 = maxima[0];
    if t0 + 2.0 * period > profile.t_max() {
        return Err(Error::InsufficientRange(
            "span does not cover one extra period for the closure check".into(),
        ));
    }
    let mut closure: f64 = 0.0;
    let samples = 200;
    for i in 0..samples {
        let t = t0 + period * i as f64 / samples as f64;
        closure = closure.max((profile.value(t + period) - profile.value(t)).abs());
    }
    if closure > 1e-6 {
        return Err(Error::Classification(format!(
            "orbit fails to close: max |xi(t+T) - xi(t)| = {closure:.3e}"
        )));
    }
    Ok(Some(period))
}

/// Exponent ladder of the radial tail expansion.
#[derive(Debug, Clone, Serialize)]
pub struct RadialIndexSet {
    pub regime: Regime,
    /// Strictly increasing rates nu_0 = 0 < nu_1 < ...
    pub rates: Vec<f64>,
    /// Generating increment: n*sqrt(1-h^{1/k}) (middle) or rho_0 (large).
    pub increment: f64,
    /// Large regime only: whether n / rho_0 is an integer, which collapses
    /// the two generators onto one arithmetic ladder.
    pub n_over_rho0_integer: bool,
}

/// Build the radial ladder I_0 up to `cutoff`.
///
/// Middle regime: multiples of n * sqrt(1 - h^{1/k}). The generating
/// increment carries the factor n: the fitted exponent ladder of integrated
/// profiles decays in these units (the first-integral correction enters
/// through e^{-n xi}), matching the coarse remainder estimate.
/// Large regime: { i * rho_0 + n * j }.
pub fn nu_index_set(params: &ProblemParams, h: f64, cutoff: f64) -> Result<RadialIndexSet> {
    match params.regime {
        Regime::Middle => {
            if !(0.0..1.0).contains(&h) {
                return Err(Error::Domain(format!(
                    "middle regime requires h in (0,1), got {h}"
                )));
            }
            let s = (1.0 - h.powf(1.0 / params.k as f64)).sqrt();
            let inc = params.n as f64 * s;
            let mut rates = Vec::new();
            let mut v = 0.0;
            while v <= cutoff + 1e-12 {
                rates.push(v);
                v += inc;
            }
            Ok(RadialIndexSet {
                regime: params.regime,
                rates,
                increment: inc,
                n_over_rho0_integer: false,
            })
        }
        Regime::Large => {
            let rho0 = params.slow_rate();
            let n = params.n as f64;
            let mut rates = Vec::new();
            let mut j = 0;
            while n * j as f64 <= cutoff + 1e-12 {
                let mut i = 0;
                loop {
                    let v = i as f64 * rho0 + n * j as f64;
                    if v > cutoff + 1e-12 {
                        break;
                    }
                    rates.push(v);
                    i += 1;
                }
                j += 1;
            }
            rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rates.dedup_by(|a, b| (*a - *b).abs() < 1e-11);
            // n/rho_0 = n k / (2k - n), exact integer test
            let num = params.n * params.k;
            let den = 2 * params.k - params.n;
            Ok(RadialIndexSet {
                regime: params.regime,
                rates,
                increment: rho0,
                n_over_rho0_integer: num % den == 0,
            })
        }
        other => Err(Error::WrongRegime {
            expected: "middle or large".into(),
            got: other.to_string(),
        }),
    }
}

/// Closed-form leading tail coefficient of the large regime, pinned by the
/// first integral: a_1 = k/(2k-n) * (h^{1/k}/2) * e^{-rho_0 a_0}.
pub fn coeff_a1_closed(params: &ProblemParams, h: f64, a0: f64) -> f64 {
    let n = params.n as f64;
    let k = params.k as f64;
    let rho0 = params.slow_rate();
    k / (2.0 * k - n) * h.powf(1.0 / k) / 2.0 * (-rho0 * a0).exp()
}

/// Second tail coefficient from the expansion recursion: a_2 = -a_1^2 rho_0/4.
pub fn coeff_a2_closed(a1: f64, rho0: f64) -> f64 {
    -a1 * a1 * rho0 / 4.0
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialExpansion {
    /// a_0..a_m against rates nu_0 = 0 < nu_1 < ... < nu_m.
    pub coeffs: Vec<f64>,
    pub rates: Vec<f64>,
    pub order: usize,
    pub linear_slope: f64,
    /// Fitted decay rate of the remainder after subtracting all m+1 terms.
    pub remainder_rate: f64,
    /// nu_{m+1}, what the remainder rate should reach.
    pub remainder_rate_expected: f64,
    /// Sequentially fitted ladder rates (stage i fit should match nu_{i+1}).
    pub ladder_rates: Vec<f64>,
}

/// Fit the tail expansion xi ~ slope*t + a_0 + sum a_i e^{-nu_i t} of an
/// unbounded profile by joint linear least squares with the ladder rates
/// fixed, then verify the ladder by sequential subtraction and log fits.
pub fn radial_expansion(profile: &RadialProfile, m: usize) -> Result<RadialExpansion> {
    if !matches!(profile.params.regime, Regime::Middle | Regime::Large) {
        return Err(Error::WrongRegime {
            expected: "middle or large".into(),
            got: profile.params.regime.to_string(),
        });
    }
    let h = profile.h;
    let slope_lin = profile.linear_slope();
    // rates through m+2 guard terms
    let mut cutoff_guess = 4.0;
    let ladder = loop {
        let set = nu_index_set(&profile.params, h, cutoff_guess)?;
        if set.rates.len() >= m + 4 {
            break set;
        }
        cutoff_guess *= 2.0;
        if cutoff_guess > 1e4 {
            return Err(Error::Budget("ladder cutoff grew unreasonably".into()));
        }
    };
    let rates = &ladder.rates;
    let nu_next = rates[m + 1];

    // window: next-order term must clear the integrator noise by 10x
    let t_hi = ((1e11f64).ln() / nu_next).min(profile.t_max() - 1.0);
    let t_lo = (0.3 * t_hi).max(2.0);
    if t_hi - t_lo < 3.0 {
        return Err(Error::InsufficientRange(format!(
            "window [{t_lo:.2}, {t_hi:.2}] too short for order {m}; integrate farther"
        )));
    }
    let npts = 500;
    let ts: Vec<f64> =
        (0..npts).map(|i| t_lo + (t_hi - t_lo) * i as f64 / (npts - 1) as f64).collect();
    let psi: Vec<f64> = ts.iter().map(|t| profile.value(*t) - slope_lin * t).collect();
    let terms: Vec<(f64, usize)> = rates[..m + 3].iter().map(|r| (*r, 0usize)).collect();
    let coeffs_full = fit_exp_sum(&ts, &psi, &terms)?;
    let coeffs: Vec<f64> = coeffs_full[..=m].to_vec();

    // sequential ladder verification
    let mut ladder_rates = Vec::new();
    for stage in 0..=m {
        let nu_stage = rates[stage + 1];
        let hi = ((1e11f64).ln() / nu_stage).min(profile.t_max() - 1.0);
        let lo = (0.35 * hi).max(2.0);
        let n_fit = 200;
        let tf: Vec<f64> =
            (0..n_fit).map(|i| lo + (hi - lo) * i as f64 / (n_fit - 1) as f64).collect();
        let resid: Vec<f64> = tf
            .iter()
            .map(|t| {
                let mut r = profile.value(*t) - slope_lin * t;
                for (c, nu) in coeffs_full[..=stage].iter().zip(&rates[..=stage]) {
                    r -= c * (-nu * t).exp();
                }
                r
            })
            .collect();
        let fit = fit_decay(&tf, &resid, DecayModel::PureExp)?;
        ladder_rates.push(fit.rate);
    }
    let remainder_rate = *ladder_rates.last().unwrap();

    if profile.params.regime == Regime::Large {
        let scale = coeffs.iter().map(|c| c.abs()).fold(0.0f64, f64::max).max(1e-30);
        if m >= 1 && coeffs[1].abs() < 1e-8 * scale {
            return Err(Error::Classification(
                "leading tail coefficient a_1 vanished; profile is not in the expected family"
                    .into(),
            ));
        }
    }

    Ok(RadialExpansion {
        coeffs,
        rates: rates[..=m].to_vec(),
        order: m,
        linear_slope: slope_lin,
        remainder_rate,
        remainder_rate_expected: nu_next,
        ladder_rates,
    })
}

/// Fit the asymptotic shift a_0 of an unbounded profile.
fn fit_offset(profile: &RadialProfile) -> Result<f64> {
    let exp = radial_expansion(profile, 1)?;
    Ok(exp.coeffs[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_regimes() {
        assert_eq!(ProblemParams::new(3, 1).unwrap().regime, Regime::Yamabe);
        assert_eq!(ProblemParams::new(5, 2).unwrap().regime, Regime::Small);
        assert_eq!(ProblemParams::new(4, 2).unwrap().regime, Regime::Middle);
        assert_eq!(ProblemParams::new(3, 2).unwrap().regime, Regime::Large);
        assert!(ProblemParams::new(2, 1).is_err());
        assert!(ProblemParams::new(3, 4).is_err());
        // c_k = 2^{-k} C(n,k)
        assert!((ProblemParams::new(3, 2).unwrap().c_k - 0.75).abs() < 1e-15);
    }

    #[test]
    fn constant_solutions() {
        // sigma_k (5,2): (1/4) ln 5
        let p = ProblemParams::new(5, 2).unwrap();
        let c = constant_radial(&p).unwrap();
        assert!((c - 5f64.ln() / 4.0).abs() < 1e-14);
        // Yamabe n = 4: sqrt(1/2); n = 3: (1/3)^{1/4}
        let c4 = constant_radial(&ProblemParams::new(4, 1).unwrap()).unwrap();
        assert!((c4 - 0.5f64.sqrt()).abs() < 1e-14);
        let c3 = constant_radial(&ProblemParams::new(3, 1).unwrap()).unwrap();
        assert!((c3 - (1f64 / 3.0).powf(0.25)).abs() < 1e-14);
        // no constant in the large regime
        assert!(constant_radial(&ProblemParams::new(3, 2).unwrap()).is_err());
        // the constant is a fixed point of the flow
        let prof = integrate_radial(&p, c, 0.0, (0.0, 20.0), 0.01).unwrap();
        for v in &prof.values {
            assert!((v - c).abs() < 1e-12);
        }
    }

    #[test]
    fn first_integral_examples() {
        // (3,2), xi(0)=1, xi_t(0)=0: h = e - e^{-3}
        let p = ProblemParams::new(3, 2).unwrap();
        let prof = integrate_radial(&p, 1.0, 0.0, (0.0, 30.0), 0.01).unwrap();
        assert!((prof.h - (1f64.exp() - (-3f64).exp())).abs() < 1e-14);
        assert!(first_integral_residual(&prof) < 1e-8, "drift {}", prof.drift);
        // sensitivity: corrupting xi_t by 1e-3 must blow the residual
        let mut bad = prof.clone();
        for s in bad.slopes.iter_mut() {
            *s += 1e-3;
        }
        assert!(first_integral_residual(&bad) > 1e-4);
    }

    #[test]
    fn ellipticity_guard() {
        let p = ProblemParams::new(3, 2).unwrap();
        assert!(matches!(
            integrate_radial(&p, 0.0, 1.5, (0.0, 10.0), 0.01),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn period_detection_small_regime() {
        let p = ProblemParams::new(5, 2).unwrap();
        let c = constant_radial(&p).unwrap();
        let prof = integrate_radial(&p, c + 0.3, 0.0, (0.0, 120.0), 0.01).unwrap();
        let period = detect_period(&prof).unwrap().expect("periodic");
        assert!(period > 1.0 && period < 20.0);
        // constant profile: no period
        let cprof = integrate_radial(&p, c, 0.0, (0.0, 60.0), 0.01).unwrap();
        assert_eq!(detect_period(&cprof).unwrap(), None);
    }

    #[test]
    fn period_detection_yamabe() {
        let p = ProblemParams::new(3, 1).unwrap();
        let c = constant_radial(&p).unwrap();
        let prof = integrate_radial(&p, c + 0.02, 0.0, (0.0, 160.0), 0.01).unwrap();
        let period = detect_period(&prof).unwrap().expect("periodic");
        // near the constant the period approaches 2 pi / sqrt(n-2)
        let lin = 2.0 * std::f64::consts::PI / (p.n as f64 - 2.0).sqrt();
        assert!((period - lin).abs() < 0.1, "period {period} vs linearized {lin}");
    }

    #[test]
    fn large_regime_expansion_coefficients() {
        let p = ProblemParams::new(3, 2).unwrap();
        let prof = integrate_radial(&p, 1.0, 0.0, (0.0, 42.0), 0.01).unwrap();
        let exp = radial_expansion(&prof, 2).unwrap();
        let a0 = exp.coeffs[0];
        let a1 = coeff_a1_closed(&p, prof.h, a0);
        assert!(
            (exp.coeffs[1] - a1).abs() / a1.abs() < 1e-5,
            "a1 fitted {} vs closed {a1}",
            exp.coeffs[1]
        );
        let a2 = coeff_a2_closed(a1, p.slow_rate());
        assert!(
            (exp.coeffs[2] - a2).abs() / a2.abs() < 1e-4,
            "a2 fitted {} vs closed {a2}",
            exp.coeffs[2]
        );
        // ladder: 0.5, 1.0, 1.5 within 1%
        for (i, r) in exp.ladder_rates.iter().enumerate() {
            let want = 0.5 * (i + 1) as f64;
            assert!((r - want).abs() / want < 0.01, "stage {i}: {r} vs {want}");
        }
    }

    #[test]
    fn middle_regime_ladder_increment_carries_n() {
        let p = ProblemParams::new(4, 2).unwrap();
        let prof = integrate_radial(&p, 1.0, 0.0, (0.0, 40.0), 0.01).unwrap();
        let s = prof.linear_slope();
        let set = nu_index_set(&p, prof.h, 10.0 * s * p.n as f64).unwrap();
        assert!((set.increment - p.n as f64 * s).abs() < 1e-12);
        // fitted slope of xi_t - s matches n*s, not s
        let ts: Vec<f64> = (0..200).map(|i| 6.0 + 14.0 * i as f64 / 199.0).collect();
        let ys: Vec<f64> = ts.iter().map(|t| prof.slope(*t) - s).collect();
        let fit = fit_decay(&ts, &ys, DecayModel::PureExp).unwrap();
        assert!(
            (fit.rate - set.increment).abs() / set.increment < 0.05,
            "rate {} vs increment {}",
            fit.rate,
            set.increment
        );
    }

    #[test]
    fn large_index_set_is_half_integer_ladder_for_3_2() {
        let p = ProblemParams::new(3, 2).unwrap();
        let set = nu_index_set(&p, 1.0, 3.2).unwrap();
        let want = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
        assert_eq!(set.rates.len(), want.len());
        for (a, b) in set.rates.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(set.n_over_rho0_integer); // 3 / 0.5 = 6
    }

    #[test]
    fn backward_forward_round_trip() {
        let p = ProblemParams::new(3, 2).unwrap();
        let prof = integrate_radial(&p, 0.7, 0.2, (-8.0, 8.0), 0.01).unwrap();
        // re-integrate from the far end back towards 0
        let end = prof.t_max();
        let (bt, back) = crate::ode::integrate_2d(
            |_t, y| p.radial_rhs(y),
            |_, _| false,
            end,
            [prof.value(end), prof.slope(end)],
            1e-9,
            0.01,
        )
        .unwrap();
        let t_last = *bt.last().unwrap();
        let last = back.last().unwrap();
        assert!((last[0] - prof.value(t_last)).abs() < 1e-9);
        assert!((last[1] - prof.slope(t_last)).abs() < 1e-9);
        assert!(t_last < 0.02);
    }
}
