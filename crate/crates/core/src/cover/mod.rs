//! Density-controlled dyadic covers: the near-optimal cover, its
//! low-density enlargement, and the collar refinement.

mod collar;
mod density;
mod epsilon;

pub use collar::{build_collar_cover, CollarChecks};
pub use density::{
    build_qp_cover, density, density_in, enlarge_to_low_density, ChainCheck, DensityReport,
};
pub use epsilon::{choose_epsilon, CalibratedConstants, EpsilonConfig, EpsilonMode};

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::content::{hc_dyadic, ContentParams};
use crate::dyadic::{DyadicCube, VoxelSet};
use crate::scalar::Real;

/// Stage a cover member was produced by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoverTag {
    Qpp,
    Qp,
    /// Collar layer, the first layer being the enlarged cube itself.
    CollarLayer(u32),
}

impl fmt::Display for CoverTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverTag::Qpp => write!(f, "qpp"),
            CoverTag::Qp => write!(f, "qp"),
            CoverTag::CollarLayer(k) => write!(f, "collar_layer_{k}"),
        }
    }
}

impl std::str::FromStr for CoverTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "qpp" => Ok(CoverTag::Qpp),
            "qp" => Ok(CoverTag::Qp),
            _ => s
                .strip_prefix("collar_layer_")
                .and_then(|k| k.parse().ok())
                .map(CoverTag::CollarLayer)
                .ok_or_else(|| format!("unknown cover tag {s:?}")),
        }
    }
}

impl Serialize for CoverTag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CoverTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverMember {
    pub level: i32,
    pub anchor: Vec<i64>,
    pub tag: CoverTag,
    /// Index of the enlarged cube this member descends from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
}

impl CoverMember {
    pub fn cube(&self) -> DyadicCube {
        DyadicCube::new(self.level, self.anchor.clone())
    }
}

/// A finite family of dyadic cubes with stage tags.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverFamily {
    pub members: Vec<CoverMember>,
}

impl CoverFamily {
    pub fn from_cubes(cubes: impl IntoIterator<Item = DyadicCube>, tag: CoverTag) -> Self {
        CoverFamily {
            members: cubes
                .into_iter()
                .map(|c| CoverMember {
                    level: c.level,
                    anchor: c.anchor,
                    tag,
                    source: None,
                })
                .collect(),
        }
    }

    pub fn cubes(&self) -> Vec<DyadicCube> {
        self.members.iter().map(|m| m.cube()).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Σ (size/2)^m over members.
    pub fn total_cost<T: Real>(&self, m: T) -> T {
        self.members
            .iter()
            .map(|c| c.cube().cost(m))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Whether every cell of `x` lies inside some member.
    pub fn covers(&self, x: &VoxelSet) -> bool {
        let set: std::collections::HashSet<DyadicCube> = self.cubes().into_iter().collect();
        let levels: std::collections::BTreeSet<i32> = self.members.iter().map(|m| m.level).collect();
        x.cubes().all(|c| {
            levels
                .iter()
                .any(|&l| l >= c.level && set.contains(&c.ancestor(l)))
        })
    }

    /// Whether no member contains another.
    pub fn is_antichain(&self) -> bool {
        let cubes = self.cubes();
        for (i, a) in cubes.iter().enumerate() {
            for (j, b) in cubes.iter().enumerate() {
                if i != j && a.contains(b) {
                    return false;
                }
            }
        }
        true
    }
}

/// The witness cover of `hc_dyadic(x)`.
///
/// Its total equals the content, below `slack` times it whenever the
/// content is positive; the empty set gets the empty cover, whose total of
/// zero is below any positive `delta_prime`.
pub fn extract_qpp_cover<T: Real>(
    x: &VoxelSet,
    params: &ContentParams<T>,
    slack: T,
    delta_prime: T,
) -> crate::Result<CoverFamily> {
    if !(slack > T::one()) {
        return Err(crate::Error::Input(format!("slack must exceed 1, got {slack}")));
    }
    if !(delta_prime > T::zero()) {
        return Err(crate::Error::Input("delta_prime must be positive".into()));
    }
    let res = hc_dyadic(x, params);
    Ok(CoverFamily::from_cubes(res.witness_cover, CoverTag::Qpp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_strings() {
        for t in [CoverTag::Qpp, CoverTag::Qp, CoverTag::CollarLayer(3)] {
            assert_eq!(t.to_string().parse::<CoverTag>().unwrap(), t);
        }
        let m = CoverMember {
            level: 1,
            anchor: vec![0, 0],
            tag: CoverTag::CollarLayer(2),
            source: Some(0),
        };
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"level":1,"anchor":[0,0],"tag":"collar_layer_2","source":0}"#);
    }

    #[test]
    fn qpp_examples() {
        let p = ContentParams::new(1.0, 2).unwrap();
        let one = VoxelSet::new(2, 0, vec![vec![0, 0]]).unwrap();
        let c = extract_qpp_cover(&one, &p, 1.1, 1e-9).unwrap();
        assert_eq!(c.cubes(), vec![DyadicCube::new(0, vec![0, 0])]);
        let block = VoxelSet::new(2, 0, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
        let c = extract_qpp_cover(&block, &p, 1.1, 1e-9).unwrap();
        assert_eq!(c.cubes(), vec![DyadicCube::new(1, vec![0, 0])]);
        assert_eq!(c.total_cost(1.0), 1.0);
        let e = extract_qpp_cover(&VoxelSet::empty(2, 0), &p, 1.1, 1e-9).unwrap();
        assert!(e.is_empty());
    }
}
