//! Molecule description files.
//!
//! TOML with per-spin lists and the J couplings as the rows of the upper
//! triangle (`j_hz[i]` lists J(i, i+1), J(i, i+2), ...):
//!
//! ```toml
//! name = "chloroform"
//! n = 2
//! nuclei = ["1H", "13C"]
//! offsets_hz = [150.0, -250.0]
//! j_hz = [[215.0]]
//! t1 = [19.0, 25.0]          # optional, seconds
//! t2 = [7.0, 0.3]            # optional, seconds
//! polarization = [1.0, 0.2514]
//! coupling = "isotropic"     # or "liquid_crystal", which also reads d_hz
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{CouplingMode, SpinSystem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeFile {
    pub name: String,
    pub n: usize,
    pub nuclei: Vec<String>,
    pub offsets_hz: Vec<f64>,
    pub j_hz: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_hz: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<Vec<f64>>,
    pub polarization: Vec<f64>,
    #[serde(default)]
    pub coupling: CouplingMode,
}

fn full_matrix(n: usize, upper: &[Vec<f64>], what: &str) -> Result<Vec<Vec<f64>>> {
    if upper.len() != n.saturating_sub(1) && !(upper.is_empty() && n <= 1) {
        return Err(Error::InvalidSystem(format!("{what} needs {} rows, got {}", n - 1, upper.len())));
    }
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in upper.iter().enumerate() {
        if row.len() != n - 1 - i {
            return Err(Error::InvalidSystem(format!("{what} row {} needs {} entries", i + 1, n - 1 - i)));
        }
        for (k, &v) in row.iter().enumerate() {
            m[i][i + 1 + k] = v;
            m[i + 1 + k][i] = v;
        }
    }
    Ok(m)
}

fn upper_rows(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    (0..n.saturating_sub(1)).map(|i| m[i][i + 1..].to_vec()).collect()
}

impl MoleculeFile {
    pub fn to_system(&self) -> Result<SpinSystem> {
        let n = self.n;
        let len_ok = |v: usize, what: &str| {
            if v != n {
                Err(Error::InvalidSystem(format!("{what} has {v} entries for {n} spins")))
            } else {
                Ok(())
            }
        };
        len_ok(self.nuclei.len(), "nuclei")?;
        len_ok(self.offsets_hz.len(), "offsets_hz")?;
        len_ok(self.polarization.len(), "polarization")?;
        let wrap = |v: &Option<Vec<f64>>, what: &str| -> Result<Vec<Option<f64>>> {
            match v {
                None => Ok(vec![None; n]),
                Some(v) => {
                    len_ok(v.len(), what)?;
                    Ok(v.iter().map(|&x| Some(x)).collect())
                }
            }
        };
        let sys = SpinSystem {
            name: self.name.clone(),
            n,
            offsets_hz: self.offsets_hz.clone(),
            j_hz: full_matrix(n, &self.j_hz, "j_hz")?,
            d_hz: match &self.d_hz {
                Some(d) => full_matrix(n, d, "d_hz")?,
                None => vec![vec![0.0; n]; n],
            },
            t1: wrap(&self.t1, "t1")?,
            t2: wrap(&self.t2, "t2")?,
            polarization_ratio: self.polarization.clone(),
            nucleus: self.nuclei.clone(),
            mode: self.coupling,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn from_system(sys: &SpinSystem) -> Self {
        let opt = |v: &[Option<f64>]| -> Option<Vec<f64>> { v.iter().copied().collect() };
        let has_d = sys.d_hz.iter().flatten().any(|&v| v != 0.0);
        MoleculeFile {
            name: sys.name.clone(),
            n: sys.n,
            nuclei: sys.nucleus.clone(),
            offsets_hz: sys.offsets_hz.clone(),
            j_hz: upper_rows(&sys.j_hz),
            d_hz: has_d.then(|| upper_rows(&sys.d_hz)),
            t1: opt(&sys.t1),
            t2: opt(&sys.t2),
            polarization: sys.polarization_ratio.clone(),
            coupling: sys.mode,
        }
    }
}

pub fn parse_molecule(text: &str) -> Result<SpinSystem> {
    let f: MoleculeFile = toml::from_str(text)?;
    f.to_system()
}

pub fn load_molecule(path: impl AsRef<Path>) -> Result<SpinSystem> {
    parse_molecule(&std::fs::read_to_string(path)?)
}

pub fn molecule_to_toml(sys: &SpinSystem) -> Result<String> {
    toml::to_string(&MoleculeFile::from_system(sys)).map_err(|e| Error::InvalidArgument(e.to_string()))
}

const BUNDLED: [(&str, &str); 6] = [
    ("chloroform", include_str!("../molecules/chloroform.toml")),
    ("sodium_formate", include_str!("../molecules/sodium_formate.toml")),
    ("chfbr2", include_str!("../molecules/chfbr2.toml")),
    ("bromotrifluoroethylene", include_str!("../molecules/bromotrifluoroethylene.toml")),
    ("pentafluoro", include_str!("../molecules/pentafluoro.toml")),
    ("seven_spin", include_str!("../molecules/seven_spin.toml")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// Source text of a bundled molecule file.
pub fn bundled_source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn bundled(name: &str) -> Result<SpinSystem> {
    let src = bundled_source(name)
        .ok_or_else(|| Error::InvalidArgument(format!("no bundled molecule '{name}' (have {:?})", bundled_names())))?;
    parse_molecule(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_load() {
        for name in bundled_names() {
            let s = bundled(name).unwrap();
            assert_eq!(s.name, name);
        }
        let s = bundled("seven_spin").unwrap();
        assert_eq!(s.j_hz[0][5], -221.0);
        assert_eq!(s.j_hz[6][5], 69.0);
        assert_eq!(s.j_hz[3][6], 60.0);
        let c = bundled("chfbr2").unwrap();
        assert_eq!((c.j_hz[0][1], c.j_hz[0][2], c.j_hz[1][2]), (50.0, 224.0, -311.0));
    }

    #[test]
    fn five_fluorine_block_matches_seven_spin() {
        let five = bundled("pentafluoro").unwrap();
        let seven = bundled("seven_spin").unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(five.j_hz[i][j], seven.j_hz[i][j]);
            }
        }
    }

    #[test]
    fn round_trip() {
        let s = bundled("bromotrifluoroethylene").unwrap();
        let again = parse_molecule(&molecule_to_toml(&s).unwrap()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn malformed_files_rejected() {
        let bad_rows = "name='x'\nn=3\nnuclei=['1H','1H','1H']\noffsets_hz=[0.0,0.0,0.0]\nj_hz=[[1.0]]\npolarization=[1.0,1.0,1.0]\n";
        assert!(parse_molecule(bad_rows).is_err());
        let bad_t = "name='x'\nn=1\nnuclei=['1H']\noffsets_hz=[0.0]\nj_hz=[]\nt1=[0.1]\nt2=[1.0]\npolarization=[1.0]\n";
        assert!(parse_molecule(bad_t).is_err());
        assert!(parse_molecule("name='x'\nfoo=1\n").is_err());
        assert!(bundled("benzene").is_err());
    }
}
