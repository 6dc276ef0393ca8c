use super::{CurveSample, RunOutcome, SolverError};

pub const MIN_SAMPLES: usize = 10;

/// Applied strain (percent) at the start of the first segment whose slope is
/// below 10% of the first segment's slope; `+∞` if there is none.
pub fn ductility_onset(curve: &[CurveSample]) -> Result<f64, SolverError> {
    if curve.len() < MIN_SAMPLES {
        return Err(SolverError::TooFewSamples { got: curve.len(), need: MIN_SAMPLES });
    }
    let slopes: Vec<(f64, f64)> = curve
        .windows(2)
        .filter(|w| w[1].applied_strain > w[0].applied_strain)
        .map(|w| {
            let de = w[1].applied_strain - w[0].applied_strain;
            (w[0].applied_strain, (w[1].mean_effective_stress - w[0].mean_effective_stress) / de)
        })
        .collect();
    let Some(&(_, initial)) = slopes.first() else {
        return Ok(f64::INFINITY);
    };
    Ok(slopes
        .iter()
        .find(|(_, s)| *s < 0.1 * initial)
        .map_or(f64::INFINITY, |(e, _)| 100.0 * e))
}

/// Mean exposition of tagged nodes that had yielded by the step at which
/// `onset_percent` was reached. `exposition` maps a node to its tag's E.
pub fn homologous_exposition<F>(outcome: &RunOutcome, onset_percent: f64, exposition: F) -> Option<f64>
where
    F: Fn(usize) -> Option<f64>,
{
    let step = outcome
        .samples
        .iter()
        .find(|s| 100.0 * s.applied_strain >= onset_percent)?
        .step;
    let values: Vec<f64> = outcome
        .first_yield
        .iter()
        .enumerate()
        .filter(|(_, y)| y.is_some_and(|y| y <= step))
        .filter_map(|(i, _)| exposition(i))
        .collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}
