//! Size caps for the exhaustive and exact solvers.
//!
//! Defaults can be overridden through `UNCLAB_CAPS`, a comma separated list
//! of `key=value` pairs, for example `UNCLAB_CAPS=grid_dim=6,lp_dim=8`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps {
    /// longest resolution accepted by the brute-force bracket
    pub brute_bracket_len: usize,
    /// largest dimension for the all-subsets projection class
    pub all_subsets_dim: usize,
    pub grid_dim: usize,
    pub lp_dim: usize,
    /// largest materialised pattern built by the Rademacher constructor
    pub pattern_len: usize,
    /// most constant runs in an Elton layout (coordinates are stored run-length)
    pub elton_coords: u64,
    /// largest universe for the brute-force Elton maximiser
    pub elton_miniature: u64,
    pub search_universe: usize,
    pub remark_universe: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            brute_bracket_len: 8,
            all_subsets_dim: 22,
            grid_dim: 10,
            lp_dim: 14,
            pattern_len: 1 << 20,
            elton_coords: 10_000,
            elton_miniature: 16,
            search_universe: 16,
            remark_universe: 20,
        }
    }
}

impl Caps {
    pub const ENV: &'static str = "UNCLAB_CAPS";

    pub fn from_env() -> Result<Caps> {
        match std::env::var(Self::ENV) {
            Ok(s) => Caps::default().with_overrides(&s),
            Err(_) => Ok(Caps::default()),
        }
    }

    pub fn with_overrides(mut self, spec: &str) -> Result<Caps> {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("bad cap override {part:?}")))?;
            let v: u64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad cap value in {part:?}")))?;
            let u = v as usize;
            match k.trim() {
                "brute_bracket_len" => self.brute_bracket_len = u,
                "all_subsets_dim" => self.all_subsets_dim = u,
                "grid_dim" => self.grid_dim = u,
                "lp_dim" => self.lp_dim = u,
                "pattern_len" => self.pattern_len = u,
                "elton_coords" => self.elton_coords = v,
                "elton_miniature" => self.elton_miniature = v,
                "search_universe" => self.search_universe = u,
                "remark_universe" => self.remark_universe = u,
                other => return Err(Error::Domain(format!("unknown cap {other:?}"))),
            }
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let c = Caps::default().with_overrides("grid_dim=3, elton_coords=99").unwrap();
        assert_eq!(c.grid_dim, 3);
        assert_eq!(c.elton_coords, 99);
        assert_eq!(c.lp_dim, 14);
        assert!(Caps::default().with_overrides("nope=1").is_err());
        assert!(Caps::default().with_overrides("grid_dim").is_err());
    }
}
