use crate::error::{Error, Result};
use crate::numerics::Mode;

/// Resource caps. Exact big-rational tables grow quickly with `N`, and the
/// enumeration routes are exponential, so callers check instances against
/// these before running them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub exact_max_levels: usize,
    pub exact_max_n: usize,
    pub log_max_levels: usize,
    pub log_max_n: usize,
    pub bruteforce_max_configs: u64,
    pub orbit_max_levels: usize,
    pub orbit_max_n: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            exact_max_levels: 16,
            exact_max_n: 64,
            log_max_levels: 100_000,
            log_max_n: 10_000,
            bruteforce_max_configs: 10_000_000,
            orbit_max_levels: 8,
            orbit_max_n: 12,
        }
    }
}

impl Limits {
    /// No caps at all.
    pub fn unlimited() -> Self {
        Limits {
            exact_max_levels: usize::MAX,
            exact_max_n: usize::MAX,
            log_max_levels: usize::MAX,
            log_max_n: usize::MAX,
            bruteforce_max_configs: u64::MAX,
            orbit_max_levels: usize::MAX,
            orbit_max_n: usize::MAX,
        }
    }

    pub fn check_table(&self, mode: Mode, levels: usize, nmax: usize) -> Result<()> {
        let (max_levels, max_n) = match mode {
            Mode::Exact => (self.exact_max_levels, self.exact_max_n),
            Mode::LogFloat => (self.log_max_levels, self.log_max_n),
        };
        check("level count", levels, max_levels)?;
        check("particle number", nmax, max_n)
    }

    pub fn check_orbit(&self, levels: usize, n: usize) -> Result<()> {
        check("orbit level count", levels, self.orbit_max_levels)?;
        check("orbit particle number", n, self.orbit_max_n)
    }
}

fn check(what: &'static str, value: usize, limit: usize) -> Result<()> {
    if value > limit {
        Err(Error::LimitExceeded { what, value, limit })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let l = Limits::default();
        assert!(l.check_table(Mode::Exact, 16, 64).is_ok());
        assert!(l.check_table(Mode::Exact, 17, 64).is_err());
        assert!(l.check_table(Mode::LogFloat, 2000, 2000).is_ok());
        assert!(l.check_table(Mode::LogFloat, 10, 10_001).is_err());
        assert!(l.check_orbit(8, 12).is_ok());
        assert!(l.check_orbit(9, 1).is_err());
        assert!(Limits::unlimited()
            .check_table(Mode::Exact, 1 << 20, 1 << 20)
            .is_ok());
    }
}
