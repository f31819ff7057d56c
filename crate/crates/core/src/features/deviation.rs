use crate::engine::LossModel;
use crate::error::{Error, Result};

use super::{AnalyticModel, FeatureLabel, FeatureVector, Provenance};

/// Analytic components below this make the relative deviation undefined.
pub const UNDEFINED_BELOW: f64 = 1e-12;

const BISECTION_WIDTH: f64 = 1e-4;

/// Loss factors 0.00, 0.01, …, 0.99.
pub fn default_loss_grid() -> Vec<f64> {
    (0..100).map(|i| f64::from(i) / 100.0).collect()
}

/// `(sampled − analytic(η)) / analytic(η)` per component over a grid of
/// loss factors `1 − η`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationCurve {
    pub loss_factors: Vec<f64>,
    pub labels: Vec<FeatureLabel>,
    /// `deviations[g][i]`: grid point `g`, component `i`; `None` where the
    /// analytic value vanishes.
    pub deviations: Vec<Vec<Option<f64>>>,
}

impl DeviationCurve {
    /// Grid intervals `[g, g+1]` over which component `i` changes sign, or
    /// grid points where it is exactly zero.
    pub fn sign_changes(&self, component: usize) -> Vec<usize> {
        let col: Vec<Option<f64>> = self.deviations.iter().map(|row| row[component]).collect();
        let mut out = Vec::new();
        for g in 0..col.len() {
            match (col[g], col.get(g + 1).copied().flatten()) {
                (Some(a), _) if a.abs() < UNDEFINED_BELOW => out.push(g),
                (Some(a), Some(b)) if a * b < 0.0 && b.abs() >= UNDEFINED_BELOW => out.push(g),
                _ => {}
            }
        }
        out
    }
}

fn check_inputs(sampled: &FeatureVector) -> Result<Vec<usize>> {
    if sampled.provenance != Provenance::Sampled {
        return Err(Error::InvalidArgument("deviation needs a sampled feature vector".into()));
    }
    let specs = sampled
        .event_specs()
        .ok_or_else(|| Error::InvalidArgument("deviation is defined for event labels only".into()))?;
    let Some(first) = specs.first() else {
        return Err(Error::InvalidArgument("feature vector has no components".into()));
    };
    if specs.iter().any(|e| e.n_max != first.n_max) {
        return Err(Error::InvalidArgument("event labels mix different n_max".into()));
    }
    Ok(specs.iter().map(|e| e.k).collect())
}

fn deviation_at(sampled: &FeatureVector, model: &AnalyticModel, ks: &[usize], n_max: usize, loss_factor: f64) -> Result<Vec<Option<f64>>> {
    let analytic = model.events(ks, n_max, LossModel::from_loss_factor(loss_factor)?);
    Ok(sampled
        .values
        .iter()
        .zip(&analytic.values)
        .map(|(&s, &a)| (a >= UNDEFINED_BELOW).then(|| (s - a) / a))
        .collect())
}

fn n_max_of(sampled: &FeatureVector) -> usize {
    match &sampled.labels[0] {
        FeatureLabel::Event(e) => e.n_max,
        FeatureLabel::Orbit(_) => unreachable!("checked by check_inputs"),
    }
}

pub fn relative_deviation(sampled: &FeatureVector, model: &AnalyticModel, loss_grid: &[f64]) -> Result<DeviationCurve> {
    let ks = check_inputs(sampled)?;
    if loss_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("loss grid must be strictly increasing".into()));
    }
    let n_max = n_max_of(sampled);
    let deviations = loss_grid
        .iter()
        .map(|&l| deviation_at(sampled, model, &ks, n_max, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeviationCurve {
        loss_factors: loss_grid.to_vec(),
        labels: sampled.labels.clone(),
        deviations,
    })
}

/// Loss factor at which component `component` of the sampled vector meets
/// the analytic curve: the first sign change on `loss_grid`, refined by
/// bisection to 1e-4. `None` if the deviation never changes sign.
pub fn match_loss(sampled: &FeatureVector, model: &AnalyticModel, component: usize, loss_grid: &[f64]) -> Result<Option<f64>> {
    if component >= sampled.len() {
        return Err(Error::InvalidArgument(format!(
            "component {component} out of range for a {}-component vector",
            sampled.len()
        )));
    }
    let curve = relative_deviation(sampled, model, loss_grid)?;
    let Some(&g) = curve.sign_changes(component).first() else {
        return Ok(None);
    };
    let at_g = curve.deviations[g][component].expect("sign change on defined points");
    if at_g.abs() < UNDEFINED_BELOW {
        return Ok(Some(loss_grid[g]));
    }
    let ks = check_inputs(sampled)?;
    let n_max = n_max_of(sampled);
    let f = |l: f64| -> Result<f64> {
        Ok(deviation_at(sampled, model, &ks[component..=component], n_max, l)?[0].unwrap_or(f64::NAN))
    };
    let (mut lo, mut hi) = (loss_grid[g], loss_grid[g + 1]);
    let lo_sign = at_g.signum();
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v.is_nan() {
            break;
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::make_embedding;
    use crate::features::AnalyticReference;

    fn model() -> AnalyticModel {
        let spec = make_embedding("1111111111".parse().unwrap()).unwrap();
        AnalyticModel::new(spec, 8, AnalyticReference::Exact).unwrap()
    }

    fn as_sampled(mut fv: FeatureVector) -> FeatureVector {
        fv.provenance = Provenance::Sampled;
        fv
    }

    #[test]
    fn self_deviation_is_zero() {
        let m = model();
        let sampled = as_sampled(m.events(&[2, 4, 6, 8], 8, LossModel::lossless()));
        let curve = relative_deviation(&sampled, &m, &[0.0]).unwrap();
        assert_eq!(curve.deviations, vec![vec![Some(0.0); 4]]);
        for c in 0..4 {
            let l = match_loss(&sampled, &m, c, &default_loss_grid()).unwrap().unwrap();
            assert!(l.abs() < 1e-3);
        }
    }

    #[test]
    fn recovers_the_generating_loss() {
        let m = model();
        let truth = as_sampled(m.events(&[2, 4, 6, 8], 8, LossModel::from_loss_factor(0.37).unwrap()));
        for c in 0..4 {
            let l = match_loss(&truth, &m, c, &default_loss_grid()).unwrap().unwrap();
            assert!((l - 0.37).abs() < 2e-4, "component {c}: {l}");
        }
    }

    #[test]
    fn odd_events_are_undefined_when_lossless() {
        let m = model();
        let sampled = as_sampled(m.events(&[1, 2], 8, LossModel::from_loss_factor(0.2).unwrap()));
        let curve = relative_deviation(&sampled, &m, &[0.0, 0.1]).unwrap();
        assert_eq!(curve.deviations[0][0], None);
        assert!(curve.deviations[1][0].is_some());
    }

    #[test]
    fn input_validation() {
        let m = model();
        let analytic = m.events(&[2], 8, LossModel::lossless());
        assert!(relative_deviation(&analytic, &m, &[0.0]).is_err());
        let sampled = as_sampled(analytic);
        assert!(relative_deviation(&sampled, &m, &[0.2, 0.1]).is_err());
        assert!(match_loss(&sampled, &m, 1, &[0.0, 0.1]).is_err());
        let mut mixed = as_sampled(m.orbits(&["1,1".parse().unwrap()], LossModel::lossless()));
        assert!(relative_deviation(&mixed, &m, &[0.0]).is_err());
        mixed.labels.clear();
        mixed.values.clear();
        assert!(relative_deviation(&mixed, &m, &[0.0]).is_err());
    }

    #[test]
    fn no_crossing_gives_none() {
        let m = model();
        let mut sampled = as_sampled(m.events(&[2], 8, LossModel::lossless()));
        sampled.values[0] = 0.9;
        assert_eq!(match_loss(&sampled, &m, 0, &default_loss_grid()).unwrap(), None);
    }
}
