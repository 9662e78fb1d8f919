use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Finite univariate observations with optional provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet<T> {
    values: Vec<T>,
    seed: Option<u64>,
    source: Option<DistributionSpec<T>>,
}

impl<T: Real> SampleSet<T> {
    /// Wraps observed values, rejecting NaN and infinities.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Self { values, seed: None, source: None })
    }

    pub(crate) fn from_trusted(values: Vec<T>, seed: Option<u64>, source: Option<DistributionSpec<T>>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values, seed, source }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn source(&self) -> Option<&DistributionSpec<T>> {
        self.source.as_ref()
    }

    /// `(min, max)` of the sample; errors when the sample is empty or constant.
    pub fn support(&self) -> Result<(T, T)> {
        let first = *self
            .values
            .first()
            .ok_or_else(|| Error::InsufficientSample("sample is empty".into()))?;
        let (lo, hi) = self
            .values
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo < hi {
            Ok((lo, hi))
        } else {
            Err(Error::DegenerateSample)
        }
    }

    /// Values in ascending order.
    pub fn sorted(&self) -> Vec<T> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        v
    }

    /// Applies `x -> offset + scale * x` to every value (provenance dropped).
    pub fn affine(&self, offset: T, scale: T) -> Result<Self> {
        Self::new(self.values.iter().map(|&x| offset + scale * x).collect())
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn std_dev(&self) -> T {
        let n = self.values.len();
        if n < 2 {
            return T::zero();
        }
        let mean = self.values.iter().copied().sum::<T>() / T::from_count(n);
        let ss = self.values.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>();
        (ss / T::from_count(n - 1)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(SampleSet::new(vec![1.0, f64::NAN]).unwrap_err(), Error::NonFiniteValue(1));
        assert_eq!(SampleSet::new(vec![f64::INFINITY]).unwrap_err(), Error::NonFiniteValue(0));
    }

    #[test]
    fn support_and_degeneracy() {
        let s = SampleSet::new(vec![3.0, -1.0, 2.0]).unwrap();
        assert_eq!(s.support().unwrap(), (-1.0, 3.0));
        assert_eq!(SampleSet::new(vec![5.0; 4]).unwrap().support().unwrap_err(), Error::DegenerateSample);
        assert!(matches!(SampleSet::<f64>::new(vec![]).unwrap().support(), Err(Error::InsufficientSample(_))));
    }

    #[test]
    fn std_dev_of_known_values() {
        let s = SampleSet::new(vec![2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((s.std_dev() - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    }
}
