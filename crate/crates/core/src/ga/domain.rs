use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::laminate::normalize_angle;

const GRID_TOL: f64 = 1e-9;

/// Admissible ply angles. Angles are directions, so every domain lives in
/// `[0, 180)` degrees.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleDomain {
    Continuous,
    IntegerDegrees,
    /// Multiples of a step in degrees; the step must divide 180.
    MultiplesOf(f64),
    /// Explicit list of angles in degrees.
    FiniteSet(Vec<f64>),
}

impl AngleDomain {
    pub fn validate(&self) -> Result<()> {
        match self {
            AngleDomain::MultiplesOf(step) => {
                let n = 180.0 / step;
                if !(step.is_finite() && *step > 0.0 && *step <= 180.0) || (n - n.round()).abs() > GRID_TOL {
                    return Err(Error::InvalidOptimizer(format!(
                        "angle step {step} deg must divide 180 evenly"
                    )));
                }
            }
            AngleDomain::FiniteSet(values) => {
                if values.is_empty() {
                    return Err(Error::InvalidOptimizer("finite angle set is empty".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidOptimizer(
                        "finite angle set has a non-finite entry".into(),
                    ));
                }
            }
            AngleDomain::Continuous | AngleDomain::IntegerDegrees => {}
        }
        Ok(())
    }

    /// Discrete candidate values in radians, sorted and without duplicates
    /// modulo 180 degrees; `None` for the continuous domain.
    pub fn values(&self) -> Option<Vec<f64>> {
        let degrees: Vec<f64> = match self {
            AngleDomain::Continuous => return None,
            AngleDomain::IntegerDegrees => (0..180).map(f64::from).collect(),
            AngleDomain::MultiplesOf(step) => {
                let n = (180.0 / step).round() as usize;
                (0..n).map(|k| k as f64 * step).collect()
            }
            AngleDomain::FiniteSet(v) => v.clone(),
        };
        let mut rad: Vec<f64> = degrees.iter().map(|d| normalize_angle(d.to_radians())).collect();
        rad.sort_by(f64::total_cmp);
        rad.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        Some(rad)
    }

    pub fn contains(&self, angle: f64) -> bool {
        if !(0.0..PI).contains(&angle) {
            return false;
        }
        match self.values() {
            None => true,
            Some(v) => v.iter().any(|x| (x - angle).abs() < 1e-9),
        }
    }

    pub fn label(&self) -> String {
        match self {
            AngleDomain::Continuous => "continuous".into(),
            AngleDomain::IntegerDegrees => "integer".into(),
            AngleDomain::MultiplesOf(step) => format!("multiples of {step} deg"),
            AngleDomain::FiniteSet(v) => {
                let items: Vec<String> = v.iter().map(|d| d.to_string()).collect();
                format!("set {{{}}}", items.join(", "))
            }
        }
    }
}

/// Sampling and mutation over a validated domain.
#[derive(Debug, Clone)]
pub(crate) struct GeneSampler {
    values: Option<Vec<f64>>,
    normal: Normal<f64>,
}

impl GeneSampler {
    pub fn new(domain: &AngleDomain, sigma: f64) -> Result<Self> {
        domain.validate()?;
        let normal =
            Normal::new(0.0, sigma).map_err(|e| Error::InvalidOptimizer(format!("mutation scale {sigma}: {e}")))?;
        Ok(GeneSampler {
            values: domain.values(),
            normal,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match &self.values {
            None => normalize_angle(rng.random::<f64>() * PI),
            Some(v) => v[rng.random_range(0..v.len())],
        }
    }

    /// Gaussian step wrapped into `[0, pi)` for the continuous domain, uniform
    /// resampling otherwise.
    pub fn mutate<R: Rng>(&self, gene: f64, rng: &mut R) -> f64 {
        match &self.values {
            None => normalize_angle(gene + self.normal.sample(rng)),
            Some(_) => self.sample(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grids() {
        assert_eq!(AngleDomain::IntegerDegrees.values().unwrap().len(), 180);
        assert_eq!(AngleDomain::MultiplesOf(5.0).values().unwrap().len(), 36);
        assert_eq!(AngleDomain::MultiplesOf(10.0).values().unwrap().len(), 18);
        assert!(AngleDomain::MultiplesOf(7.0).validate().is_err());
        assert!(AngleDomain::MultiplesOf(0.0).validate().is_err());
        assert!(AngleDomain::FiniteSet(vec![]).validate().is_err());
        let set = AngleDomain::FiniteSet(vec![0.0, 180.0, 45.0, -135.0]);
        assert_eq!(set.values().unwrap().len(), 2);
        assert!(AngleDomain::Continuous.values().is_none());
    }

    #[test]
    fn samples_stay_in_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [
            AngleDomain::Continuous,
            AngleDomain::IntegerDegrees,
            AngleDomain::MultiplesOf(10.0),
            AngleDomain::FiniteSet(vec![0.0, 30.0, 45.0, 60.0, 90.0, 120.0, 135.0, 150.0]),
        ] {
            let s = GeneSampler::new(&d, 10f64.to_radians()).unwrap();
            let mut g = s.sample(&mut rng);
            for _ in 0..500 {
                assert!(d.contains(g), "{} {g}", d.label());
                g = s.mutate(g, &mut rng);
            }
        }
    }
}
