//! Small time-series fitting helpers shared by the solvers and tests.

/// Single-frequency estimate for a uniformly sampled real signal.
#[derive(Clone, Copy, Debug)]
pub struct FrequencyFit {
    /// Angular frequency, radians per unit time. Zero for constant signals.
    pub omega: f64,
    /// Number of full oscillation periods covered by the samples.
    pub periods: f64,
    /// Root-mean-square amplitude of the signal.
    pub rms: f64,
}

/// Fits the angular frequency of `x(t) = A cos(omega t + phase)` sampled at
/// spacing `dt`, using the three-point recurrence
/// `x[n-1] + x[n+1] = 2 cos(omega dt) x[n]`, solved in least squares. Exact
/// for noiseless sinusoids of any amplitude and phase, including omega = 0.
pub fn fit_frequency(samples: &[f64], dt: f64) -> Option<FrequencyFit> {
    if samples.len() < 3 || dt <= 0.0 || dt.is_nan() {
        return None;
    }
    let n = samples.len();
    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();

    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..n - 1 {
        num += samples[i] * (samples[i - 1] + samples[i + 1]);
        den += 2.0 * samples[i] * samples[i];
    }
    if den <= f64::MIN_POSITIVE * n as f64 {
        // signal is zero (or alternates through exact zeros); no tone to fit
        return Some(FrequencyFit {
            omega: 0.0,
            periods: 0.0,
            rms,
        });
    }
    let c = (num / den).clamp(-1.0, 1.0);
    let omega = c.acos() / dt;
    let periods = omega * (n as f64 - 1.0) * dt / std::f64::consts::TAU;
    Some(FrequencyFit {
        omega,
        periods,
        rms,
    })
}

/// Ordinary least squares line through `(x, y)` pairs.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(LineFit {
        slope,
        intercept,
        r2,
    })
}

/// Time at which `samples` first drops to `threshold`, with linear
/// interpolation between the bracketing points. `samples[i]` is taken at
/// `t = i * dt`. Returns None if the series never reaches the threshold.
pub fn first_crossing_time(samples: &[f64], dt: f64, threshold: f64) -> Option<f64> {
    if samples.is_empty() || dt <= 0.0 || dt.is_nan() {
        return None;
    }
    if samples[0] <= threshold {
        return Some(0.0);
    }
    for i in 1..samples.len() {
        if samples[i] <= threshold {
            let span = samples[i - 1] - samples[i];
            let frac = if span > 0.0 {
                (samples[i - 1] - threshold) / span
            } else {
                1.0
            };
            return Some(((i - 1) as f64 + frac) * dt);
        }
    }
    None
}
