//! A single handle over plain and Hilbert-ordered schemes.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hilbert::{self, CubifyingMap, HilbertCodec, OrderedBase};
use crate::particles::{ResampleResult, WeightedParticleSystem, Weights};
use crate::resample::Scheme;
use crate::stream::UniformSource;

/// Any supported resampling scheme.
///
/// Ordered variants use `psi~` on every axis and the finest codec for the
/// system's dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resampler {
    Plain(Scheme),
    Ordered(OrderedBase),
}

impl Resampler {
    pub fn resample<S: UniformSource + ?Sized>(
        &self,
        system: &WeightedParticleSystem,
        source: &mut S,
    ) -> Result<ResampleResult> {
        self.prepare(system)?.resample(source)
    }

    /// Does the ordering work once, for repeated draws on a fixed system.
    pub fn prepare<'a>(&self, system: &'a WeightedParticleSystem) -> Result<Prepared<'a>> {
        match *self {
            Resampler::Plain(scheme) => {
                scheme.validate()?;
                Ok(Prepared {
                    system,
                    scheme,
                    ordering: None,
                })
            }
            Resampler::Ordered(base) => {
                base.scheme().validate()?;
                let d = system.dim();
                let perm = hilbert::hilbert_sort(
                    system,
                    &CubifyingMap::real_line(d),
                    &HilbertCodec::for_dim(d)?,
                )?;
                let weights = system.weights().permuted(&perm);
                Ok(Prepared {
                    system,
                    scheme: base.scheme(),
                    ordering: Some((perm, weights)),
                })
            }
        }
    }

    pub fn is_ordered(&self) -> bool {
        matches!(self, Resampler::Ordered(_))
    }
}

/// A resampler bound to one particle system.
#[derive(Debug, Clone)]
pub struct Prepared<'a> {
    system: &'a WeightedParticleSystem,
    scheme: Scheme,
    ordering: Option<(Vec<usize>, Weights)>,
}

impl Prepared<'_> {
    pub fn resample<S: UniformSource + ?Sized>(&self, source: &mut S) -> Result<ResampleResult> {
        match &self.ordering {
            None => self.scheme.resample(self.system.weights(), source),
            Some((perm, weights)) => {
                let r = self.scheme.resample(weights, source)?;
                hilbert::unpermute(r, perm, self.system)
            }
        }
    }

    /// Only the ancestor indices (original indexing), skipping count bookkeeping.
    pub fn ancestors<S: UniformSource + ?Sized>(&self, source: &mut S) -> Result<Vec<usize>> {
        match &self.ordering {
            None => Ok(self.scheme.resample(self.system.weights(), source)?.ancestors),
            Some((perm, weights)) => Ok(self
                .scheme
                .resample(weights, source)?
                .ancestors
                .into_iter()
                .map(|a| perm[a])
                .collect()),
        }
    }

    /// The Hilbert permutation, when ordered.
    pub fn permutation(&self) -> Option<&[usize]> {
        self.ordering.as_ref().map(|(p, _)| p.as_slice())
    }
}

impl From<Scheme> for Resampler {
    fn from(s: Scheme) -> Self {
        Resampler::Plain(s)
    }
}

impl fmt::Display for Resampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resampler::Plain(s) => s.fmt(f),
            Resampler::Ordered(OrderedBase::Stratified) => f.write_str("ordered-stratified"),
            Resampler::Ordered(OrderedBase::Systematic) => f.write_str("ordered-systematic"),
            Resampler::Ordered(OrderedBase::DeterministicAlpha(a)) => write!(f, "ordered-alpha:{a}"),
        }
    }
}

impl FromStr for Resampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r = match s {
            "ordered-stratified" => Resampler::Ordered(OrderedBase::Stratified),
            "ordered-systematic" => Resampler::Ordered(OrderedBase::Systematic),
            other => match other.strip_prefix("ordered-alpha:") {
                Some(a) => {
                    let alpha: f64 = a
                        .parse()
                        .map_err(|_| Error::UnsupportedScheme(other.to_string()))?;
                    if !(alpha > 0.0 && alpha < 1.0) {
                        return Err(Error::AlphaOutOfRange(alpha));
                    }
                    Resampler::Ordered(OrderedBase::DeterministicAlpha(alpha))
                }
                None => Resampler::Plain(other.parse()?),
            },
        };
        Ok(r)
    }
}

impl serde::Serialize for Resampler {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Resampler {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::UniformStream;

    #[test]
    fn names_round_trip() {
        for name in [
            "multinomial",
            "stratified",
            "systematic",
            "residual-multinomial",
            "residual-stratified",
            "ssp",
            "deterministic-alpha:0.5",
            "ordered-stratified",
            "ordered-systematic",
            "ordered-alpha:0.5",
        ] {
            let r: Resampler = name.parse().unwrap();
            assert_eq!(r.to_string(), name);
        }
        assert!("ordered-alpha:0".parse::<Resampler>().is_err());
    }

    #[test]
    fn ordered_single_particle() {
        let sys = WeightedParticleSystem::new(vec![0.3, -2.0], 2, &[5.0]).unwrap();
        let mut s = UniformStream::new(0, 0);
        for name in ["ordered-stratified", "ordered-systematic", "ordered-alpha:0.5"] {
            let r: Resampler = name.parse().unwrap();
            assert_eq!(r.resample(&sys, &mut s).unwrap().ancestors, vec![0]);
        }
    }
}
