/// Work limits that turn runaway searches into errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guards {
    /// Segments or single terms summed by one discounted value.
    pub max_terms: u64,
    /// Largest effective horizon searched for.
    pub max_horizon: u64,
    /// Largest index explored by counterexample searches.
    pub search_bound: u64,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_terms: 100_000_000,
            max_horizon: 100_000_000,
            search_bound: 10_000_000,
        }
    }
}

impl Guards {
    /// Every limit multiplied by `factor` (saturating).
    pub fn scaled(&self, factor: f64) -> Guards {
        let f = |x: u64| ((x as f64) * factor).clamp(1.0, u64::MAX as f64) as u64;
        Guards {
            max_terms: f(self.max_terms),
            max_horizon: f(self.max_horizon),
            search_bound: f(self.search_bound),
        }
    }
}
