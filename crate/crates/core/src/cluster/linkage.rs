use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ClusterError;

/// Inter-cluster dissimilarity rule, expressed through the Lance–Williams
/// recurrence
///
/// ```text
/// d(k, i∪j) = αi·d(k,i) + αj·d(k,j) + β·d(i,j) + γ·|d(k,i) − d(k,j)|
/// ```
///
/// All kinds operate on squared Euclidean input. Ward and centroid then
/// report merge heights in the same squared units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LinkageKind {
    Single,
    Complete,
    Average,
    #[default]
    Ward,
    Centroid,
    Median,
}

/// `(αi, αj, β, γ)` for merging clusters of sizes `ni` and `nj`, seen from a
/// third cluster of size `nk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub alpha_i: f64,
    pub alpha_j: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LinkageKind {
    pub const ALL: [LinkageKind; 6] = [
        LinkageKind::Single,
        LinkageKind::Complete,
        LinkageKind::Average,
        LinkageKind::Ward,
        LinkageKind::Centroid,
        LinkageKind::Median,
    ];

    pub const REDUCIBLE: [LinkageKind; 4] = [
        LinkageKind::Single,
        LinkageKind::Complete,
        LinkageKind::Average,
        LinkageKind::Ward,
    ];

    /// Reducible linkages never bring a merged cluster closer to a third
    /// cluster than both parts were; nearest-neighbour chains are exact for
    /// them and heights are monotone.
    pub fn is_reducible(self) -> bool {
        !matches!(self, LinkageKind::Centroid | LinkageKind::Median)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LinkageKind::Single => "single",
            LinkageKind::Complete => "complete",
            LinkageKind::Average => "average",
            LinkageKind::Ward => "ward",
            LinkageKind::Centroid => "centroid",
            LinkageKind::Median => "median",
        }
    }

    pub fn coefficients(self, ni: usize, nj: usize, nk: usize) -> Coefficients {
        let (ni, nj, nk) = (ni as f64, nj as f64, nk as f64);
        let (alpha_i, alpha_j, beta, gamma) = match self {
            LinkageKind::Single => (0.5, 0.5, 0.0, -0.5),
            LinkageKind::Complete => (0.5, 0.5, 0.0, 0.5),
            LinkageKind::Average => (ni / (ni + nj), nj / (ni + nj), 0.0, 0.0),
            LinkageKind::Ward => {
                let t = ni + nj + nk;
                ((ni + nk) / t, (nj + nk) / t, -nk / t, 0.0)
            }
            LinkageKind::Centroid => {
                let s = ni + nj;
                (ni / s, nj / s, -(ni * nj) / (s * s), 0.0)
            }
            LinkageKind::Median => (0.5, 0.5, -0.25, 0.0),
        };
        Coefficients {
            alpha_i,
            alpha_j,
            beta,
            gamma,
        }
    }

    /// Distance from cluster `k` to the union of `i` and `j`.
    ///
    /// Single and complete use `min`/`max` directly, which is what the
    /// recurrence reduces to, without the rounding of the general form.
    #[inline]
    pub fn update(self, d_ki: f64, d_kj: f64, d_ij: f64, ni: usize, nj: usize, nk: usize) -> f64 {
        match self {
            LinkageKind::Single => d_ki.min(d_kj),
            LinkageKind::Complete => d_ki.max(d_kj),
            _ => {
                let c = self.coefficients(ni, nj, nk);
                c.alpha_i * d_ki + c.alpha_j * d_kj + c.beta * d_ij + c.gamma * (d_ki - d_kj).abs()
            }
        }
    }
}

impl fmt::Display for LinkageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkageKind {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LinkageKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ClusterError::InvalidLinkage(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_round_trip() {
        for k in LinkageKind::ALL {
            assert_eq!(k.as_str().parse::<LinkageKind>().unwrap(), k);
        }
        assert!(matches!(
            "wards".parse::<LinkageKind>(),
            Err(ClusterError::InvalidLinkage(_))
        ));
        assert_eq!(LinkageKind::default(), LinkageKind::Ward);
    }

    proptest! {
        // The specialised min/max updates agree with the general recurrence.
        #[test]
        fn single_and_complete_follow_coefficients(a in 0f64..1e4, b in 0f64..1e4, c in 0f64..1e4) {
            for k in [LinkageKind::Single, LinkageKind::Complete] {
                let co = k.coefficients(1, 1, 1);
                let general = co.alpha_i * a + co.alpha_j * b + co.beta * c + co.gamma * (a - b).abs();
                prop_assert!((k.update(a, b, c, 1, 1, 1) - general).abs() <= 1e-9 * (1.0 + general));
            }
        }

        #[test]
        fn alphas_sum_to_one_for_size_weighted_kinds(ni in 1usize..50, nj in 1usize..50) {
            for k in [LinkageKind::Average, LinkageKind::Centroid, LinkageKind::Median, LinkageKind::Single] {
                let c = k.coefficients(ni, nj, 7);
                prop_assert!((c.alpha_i + c.alpha_j - 1.0).abs() < 1e-12);
            }
            // Ward: αi + αj + β = 1
            let c = LinkageKind::Ward.coefficients(ni, nj, 7);
            prop_assert!((c.alpha_i + c.alpha_j + c.beta - 1.0).abs() < 1e-12);
        }
    }
}
