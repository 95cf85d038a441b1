//! Thin wrapper around an adaptive 8th-order Dormand-Prince integrator
//! (dense output of order 7) for the small autonomous systems used here.
//! Tolerances default to 1e-12 relative / 1e-14 absolute: the expansion
//! fits downstream consume many digits.

use nalgebra::Vector2;
use ode_solvers::dop853::Dop853;
use ode_solvers::dop_shared::{OutputType, System};

use crate::error::{Error, Result};

pub const RTOL: f64 = 1e-12;
pub const ATOL: f64 = 1e-14;

struct Guarded<F, G> {
    rhs: F,
    guard: G,
    stopped_at: Option<(f64, [f64; 2])>,
}

impl<F, G> System<f64, Vector2<f64>> for &mut Guarded<F, G>
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
    G: Fn(f64, [f64; 2]) -> bool,
{
    fn system(&self, t: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        let d = (self.rhs)(t, [y[0], y[1]]);
        dy[0] = d[0];
        dy[1] = d[1];
    }

    fn solout(&mut self, t: f64, y: &Vector2<f64>, _dy: &Vector2<f64>) -> bool {
        if (self.guard)(t, [y[0], y[1]]) {
            self.stopped_at = Some((t, [y[0], y[1]]));
            true
        } else {
            false
        }
    }
}

/// Integrate y' = f(t, y) from t0 to t_end (either direction), sampling the
/// dense output every |dt| in the direction of integration. A `guard`
/// returning true aborts with a singular-trajectory error carrying the
/// location.
pub fn integrate_2d<F, G>(
    rhs: F,
    guard: G,
    t0: f64,
    y0: [f64; 2],
    t_end: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<[f64; 2]>)>
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
    G: Fn(f64, [f64; 2]) -> bool,
{
    assert!(dt > 0.0 && t_end != t0);
    assert!(
        t0 * t_end >= 0.0,
        "integration span must not cross t = 0 (split the run at the origin)"
    );
    // The backend's dense-output bookkeeping expects |t| to increase; runs
    // toward the origin are reparametrized as s = t0 - t.
    if t_end.abs() < t0.abs() {
        let flipped = |s: f64, y: [f64; 2]| {
            let d = rhs(t0 - s, y);
            [-d[0], -d[1]]
        };
        let fguard = |s: f64, y: [f64; 2]| guard(t0 - s, y);
        let (ss, ys) = integrate_2d(flipped, fguard, 0.0, y0, t0 - t_end, dt)
            .map_err(|e| match e {
                Error::SingularTrajectory { t } => Error::SingularTrajectory { t: t0 - t },
                other => other,
            })?;
        let ts = ss.into_iter().map(|s| t0 - s).collect();
        return Ok((ts, ys));
    }
    let step = if t_end > t0 { dt } else { -dt };
    let mut sys = Guarded { rhs, guard, stopped_at: None };
    let (outcome, ts, ys) = {
        let mut solver = Dop853::from_param(
            &mut sys,
            t0,
            t_end,
            step,
            Vector2::new(y0[0], y0[1]),
            RTOL,
            ATOL,
            0.9,   // safety factor
            0.0,   // PI controller beta
            0.333, // fac_min
            6.0,   // fac_max
            (t_end - t0).abs(),
            0.0, // initial h chosen automatically
            2_000_000,
            1000,
            OutputType::Dense,
        );
        let outcome = solver.integrate();
        let (ts, ys) = solver.results().get();
        let ys: Vec<[f64; 2]> = ys.iter().map(|v| [v[0], v[1]]).collect();
        (outcome, ts.clone(), ys)
    };
    if let Some((t, _)) = sys.stopped_at {
        return Err(Error::SingularTrajectory { t });
    }
    outcome.map_err(|e| Error::NonConvergence(format!("integrator: {e:?}")))?;
    Ok((ts, ys))
}

/// Convenience: no guard.
pub fn integrate_2d_plain<F>(
    rhs: F,
    t0: f64,
    y0: [f64; 2],
    t_end: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<[f64; 2]>)>
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    integrate_2d(rhs, |_, _| false, t0, y0, t_end, dt)
}

/// Uniformly sampled trajectory with cubic Hermite evaluation between
/// samples (the stored slope field makes the interpolant 4th order).
#[derive(Debug, Clone)]
pub struct SampledCurve {
    pub t0: f64,
    pub dt: f64,
    /// y[i] = state at t0 + i*dt
    pub y: Vec<[f64; 2]>,
    /// derivative of the first component at the samples (= second component
    /// for our 2nd-order systems); derivative of the second component.
    pub dy1: Vec<f64>,
}

impl SampledCurve {
    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.y.len() - 1) as f64
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 - 1e-12 && t <= self.t_end() + 1e-12
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        let s = ((t - self.t0) / self.dt).floor();
        let i = (s as isize).clamp(0, self.y.len() as isize - 2) as usize;
        let u = (t - (self.t0 + i as f64 * self.dt)) / self.dt;
        (i, u)
    }

    /// Hermite-cubic value of component 0 (uses component 1 as its slope).
    pub fn value(&self, t: f64) -> f64 {
        let (i, u) = self.segment(t);
        hermite(u, self.dt, self.y[i][0], self.y[i][1], self.y[i + 1][0], self.y[i + 1][1])
    }

    /// Hermite-cubic value of component 1 (uses the stored dy1 as its slope).
    pub fn slope(&self, t: f64) -> f64 {
        let (i, u) = self.segment(t);
        hermite(u, self.dt, self.y[i][1], self.dy1[i], self.y[i + 1][1], self.dy1[i + 1])
    }
}

fn hermite(u: f64, h: f64, y0: f64, m0: f64, y1: f64, m1: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * h * m0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * h * m1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_round_trip() {
        // the dense output ends at the last multiple of dt inside the span
        let rhs = |_t: f64, y: [f64; 2]| [y[1], -y[0]];
        let (ts, ys) = integrate_2d_plain(rhs, 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI, 0.1)
            .unwrap();
        let t = *ts.last().unwrap();
        let last = ys.last().unwrap();
        assert!((last[0] - t.cos()).abs() < 1e-10);
        assert!((last[1] + t.sin()).abs() < 1e-10);
        assert!(ts.len() > 60);
    }

    #[test]
    fn backward_integration_supported() {
        let rhs = |_t: f64, y: [f64; 2]| [y[1], -y[0]];
        let (_, ys) = integrate_2d_plain(rhs, 0.0, [1.0, 0.0], -1.0, 0.05).unwrap();
        let last = ys.last().unwrap();
        assert!((last[0] - 1.0f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn guard_reports_location() {
        // the reported location is the end of the accepted step that crossed
        let rhs = |_t: f64, y: [f64; 2]| [y[1], y[0].cos()];
        let err = integrate_2d(rhs, |_, y| y[1] > 1.0, 0.0, [0.0, 0.0], 10.0, 0.1).unwrap_err();
        match err {
            Error::SingularTrajectory { t } => assert!(t > 1.0, "stopped at {t}"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn hermite_interpolation_accuracy() {
        let rhs = |_t: f64, y: [f64; 2]| [y[1], -y[0]];
        let (_, ys) = integrate_2d_plain(rhs, 0.0, [1.0, 0.0], 3.0, 0.01).unwrap();
        let dy1 = ys.iter().map(|y| -y[0]).collect();
        let c = SampledCurve { t0: 0.0, dt: 0.01, y: ys, dy1 };
        for t in [0.123456, 1.7654321, 2.9999] {
            assert!((c.value(t) - t.cos()).abs() < 1e-9);
            assert!((c.slope(t) + t.sin()).abs() < 1e-9);
        }
    }
}
