//! Radial mollifier shapes and the name-keyed registry that selects them.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use super::MollifierError;

/// Unnormalized radial shape supported on the unit disc.
pub trait RadialProfile: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Shape value at radius `r ∈ [0, 1)`; must vanish for `r ≥ 1`.
    fn shape(&self, r: f64) -> f64;
}

/// `exp(−1/(1−r²))`, the standard bump.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bump;

impl RadialProfile for Bump {
    fn name(&self) -> &'static str {
        "bump"
    }

    fn shape(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        (-1.0 / (1.0 - r * r)).exp()
    }
}

/// `exp(−2/(1−r²))`: same support, more mass near the centre.
#[derive(Debug, Clone, Copy, Default)]
pub struct SteepBump;

impl RadialProfile for SteepBump {
    fn name(&self) -> &'static str {
        "steep-bump"
    }

    fn shape(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        (-2.0 / (1.0 - r * r)).exp()
    }
}

#[derive(Debug, Clone)]
pub struct ProfileRegistry {
    entries: BTreeMap<&'static str, Arc<dyn RadialProfile>>,
}

impl ProfileRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, profile: Arc<dyn RadialProfile>) {
        self.entries.insert(profile.name(), profile);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RadialProfile>, MollifierError> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| MollifierError::UnknownProfile {
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for ProfileRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Bump));
        r.register(Arc::new(SteepBump));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        let reg = ProfileRegistry::default();
        assert_eq!(reg.names(), vec!["bump", "steep-bump"]);
        assert_eq!(reg.get("bump").unwrap().name(), "bump");
        let err = reg.get("gaussian").unwrap_err();
        assert!(err.to_string().contains("steep-bump"));
    }

    #[test]
    fn shapes_vanish_outside_unit_disc() {
        for p in [&Bump as &dyn RadialProfile, &SteepBump] {
            assert_eq!(p.shape(1.0), 0.0);
            assert_eq!(p.shape(3.0), 0.0);
            assert!(p.shape(0.999) >= 0.0);
            assert!(p.shape(0.0) > p.shape(0.5));
        }
    }
}
